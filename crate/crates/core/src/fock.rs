//! Truncated Fock-space weights of diagonal states and phase-averaged
//! coherent (PhAC) photon statistics.
//!
//! A PhAC state of amplitude `|α|` is diagonal in the photon-number basis
//! with Poisson weights of mean `|α|²`. Everything downstream (the signed
//! fit, the analytic dip formulas) only ever needs these diagonal weights
//! and their first two factorial moments.

use crate::error::{invalid, Result};

/// Default truncation order. The Poisson tail at the largest stock grid
/// amplitude (α = 1.45, mean 2.1025) is below 1e-20 at n = 32, so even a
/// coefficient of magnitude 40 leaves nothing visible above double
/// precision.
pub const DEFAULT_N_MAX: usize = 32;

/// Whether a weight vector is a genuine probability distribution or a
/// signed reconstruction from a non-convex mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FockMode {
    Physical,
    Signed,
}

/// Photon-number weights `p_0..p_n_max` of a diagonal state.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    weights: Vec<f64>,
    mode: FockMode,
}

impl FockVector {
    /// A physical (non-negative) weight vector. Trace is not forced to 1
    /// here; truncated distributions carry their tail separately.
    pub fn physical(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("fock vector", "no weights"));
        }
        for (n, &p) in weights.iter().enumerate() {
            if !p.is_finite() {
                return Err(invalid("fock vector", format!("weight {n} not finite")));
            }
            if p < 0.0 {
                return Err(invalid("fock vector", format!("weight {n} = {p} negative in physical mode")));
            }
        }
        Ok(Self { weights, mode: FockMode::Physical })
    }

    /// A signed weight vector, as produced by reconstructing a non-convex
    /// mixture. Entries may be negative.
    pub fn signed(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("fock vector", "no weights"));
        }
        if let Some(n) = weights.iter().position(|p| !p.is_finite()) {
            return Err(invalid("fock vector", format!("weight {n} not finite")));
        }
        Ok(Self { weights, mode: FockMode::Signed })
    }

    /// The pure single-photon state |1><1| truncated at `n_max`.
    pub fn single_photon(n_max: usize) -> Self {
        assert!(n_max >= 1, "single photon needs n_max >= 1");
        let mut weights = vec![0.0; n_max + 1];
        weights[1] = 1.0;
        Self { weights, mode: FockMode::Physical }
    }

    /// The vacuum state truncated at `n_max`.
    pub fn vacuum(n_max: usize) -> Self {
        let mut weights = vec![0.0; n_max + 1];
        weights[0] = 1.0;
        Self { weights, mode: FockMode::Physical }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_max(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn mode(&self) -> FockMode {
        self.mode
    }

    /// Sum of all weights.
    pub fn trace(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Total negative mass, Σ_n max(0, -p_n).
    pub fn negativity(&self) -> f64 {
        self.weights.iter().map(|&p| (-p).max(0.0)).sum()
    }

    /// True when the trace sits within `tol` of 1.
    pub fn is_unit_trace(&self, tol: f64) -> bool {
        (self.trace() - 1.0).abs() <= tol
    }
}

/// A phase-averaged coherent state, identified by its field amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhacSpec {
    amplitude: f64,
}

impl PhacSpec {
    pub fn new(amplitude: f64) -> Result<Self> {
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(invalid("PhAC amplitude", format!("{amplitude}")));
        }
        Ok(Self { amplitude })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
}

/// Photon-number distribution of a PhAC state up to `n_max`:
/// `p_n = e^{-α²} α^{2n} / n!`.
///
/// Computed by the stable recurrence `p_{n+1} = p_n α² / (n+1)` from
/// `p_0 = e^{-α²}`; no renormalization is applied, the truncated mass is
/// reported by [`tail_mass`].
pub fn phac_fock(spec: PhacSpec, n_max: usize) -> FockVector {
    let mean = spec.amplitude * spec.amplitude;
    let mut weights = Vec::with_capacity(n_max + 1);
    let mut p = (-mean).exp();
    weights.push(p);
    for n in 0..n_max {
        p *= mean / (n as f64 + 1.0);
        weights.push(p);
    }
    FockVector { weights, mode: FockMode::Physical }
}

/// Probability mass above the truncation order, `1 - Σ_{n<=n_max} p_n`.
///
/// Summed forward from `p_{n_max}` rather than subtracting from 1, so tiny
/// tails (1e-20 and below) come out accurate instead of rounding to zero.
pub fn tail_mass(spec: PhacSpec, n_max: usize) -> f64 {
    let mean = spec.amplitude * spec.amplitude;
    if mean == 0.0 {
        return 0.0;
    }
    let mut p = (-mean).exp();
    for n in 0..n_max {
        p *= mean / (n as f64 + 1.0);
    }
    // p = p_{n_max}; accumulate strictly-above-truncation terms.
    let mut tail = 0.0;
    let mut n = n_max;
    loop {
        p *= mean / (n as f64 + 1.0);
        tail += p;
        n += 1;
        if (p < tail * 1e-18 && n as f64 > mean) || p < 1e-300 || n > n_max + 1_000_000 {
            break;
        }
    }
    tail
}

/// First and second factorial moments of a diagonal state:
/// `M2 = ⟨n⟩ = Σ n p_n` and `M4 = ⟨a†²a²⟩ = Σ n(n-1) p_n`.
pub fn moment_m2m4(fock: &FockVector) -> (f64, f64) {
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for (n, &p) in fock.weights().iter().enumerate() {
        let n = n as f64;
        m2 += n * p;
        m4 += n * (n - 1.0) * p;
    }
    (m2, m4)
}

/// Overlap with |1><1|: the p_1 entry of the vector.
pub fn fidelity_to_single_photon(fock: &FockVector) -> f64 {
    fock.weights().get(1).copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn vacuum_amplitude_gives_vacuum_vector() {
        let v = phac_fock(PhacSpec::new(0.0).unwrap(), 8);
        assert_eq!(v.weights()[0], 1.0);
        assert!(v.weights()[1..].iter().all(|&p| p == 0.0));
        assert_eq!(v.mode(), FockMode::Physical);
    }

    #[test]
    fn unit_amplitude_p1_is_inverse_e() {
        let v = phac_fock(PhacSpec::new(1.0).unwrap(), 16);
        assert_abs_diff_eq!(v.weights()[1], (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn largest_grid_amplitude_sums_to_one() {
        // Independent route: Poisson CDF at the truncation order.
        use statrs::distribution::{DiscreteCDF, Poisson};
        let v = phac_fock(PhacSpec::new(1.45).unwrap(), 32);
        let cdf = Poisson::new(1.45f64 * 1.45).unwrap().cdf(32);
        assert_abs_diff_eq!(v.trace(), cdf, epsilon = 1e-14);
        assert_abs_diff_eq!(v.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tail_mass_examples() {
        assert_eq!(tail_mass(PhacSpec::new(0.0).unwrap(), 0), 0.0);
        let t = tail_mass(PhacSpec::new(1.0).unwrap(), 0);
        assert_abs_diff_eq!(t, 1.0 - (-1.0f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn tail_mass_matches_summed_poisson_tail() {
        // Independent route: sum the Poisson pmf above the truncation.
        use statrs::distribution::{Discrete, Poisson};
        let dist = Poisson::new(1.45f64 * 1.45).unwrap();
        let oracle: f64 = (33..220).map(|n| dist.pmf(n)).sum();
        let t = tail_mass(PhacSpec::new(1.45).unwrap(), 32);
        assert!(t < 1e-20, "tail {t}");
        assert!(oracle < 1e-20, "oracle tail {oracle}");
        assert!((t - oracle).abs() <= 1e-12 * oracle.max(t) + 1e-300);
    }

    #[test]
    fn moments_of_fock_states() {
        assert_eq!(moment_m2m4(&FockVector::single_photon(8)), (1.0, 0.0));
        assert_eq!(moment_m2m4(&FockVector::vacuum(8)), (0.0, 0.0));
    }

    #[test]
    fn phac_moments_match_brute_force_poisson_sums() {
        use statrs::distribution::{Discrete, Poisson};
        for &alpha in &[0.3, 0.8, 1.0, 1.45] {
            let mean = alpha * alpha;
            let dist = Poisson::new(mean).unwrap();
            let m2_oracle: f64 = (0u64..120).map(|n| n as f64 * dist.pmf(n)).sum();
            let m4_oracle: f64 =
                (0u64..120).map(|n| n as f64 * (n as f64 - 1.0) * dist.pmf(n)).sum();
            let (m2, m4) = moment_m2m4(&phac_fock(PhacSpec::new(alpha).unwrap(), 64));
            assert_abs_diff_eq!(m2, m2_oracle, epsilon = 1e-12);
            assert_abs_diff_eq!(m4, m4_oracle, epsilon = 1e-12);
            assert_abs_diff_eq!(m2, mean, epsilon = 1e-10);
            assert_abs_diff_eq!(m4, mean * mean, epsilon = 1e-10);
        }
    }

    #[test]
    fn fidelity_is_p1() {
        assert_eq!(fidelity_to_single_photon(&FockVector::single_photon(4)), 1.0);
        let v = phac_fock(PhacSpec::new(1.0).unwrap(), 16);
        assert_abs_diff_eq!(fidelity_to_single_photon(&v), (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn physical_mode_rejects_negative_weights() {
        assert!(FockVector::physical(vec![0.5, -0.1, 0.6]).is_err());
        assert!(FockVector::signed(vec![0.5, -0.1, 0.6]).is_ok());
    }

    proptest! {
        #[test]
        fn weights_nonneg_and_mode_is_poissonian(alpha in 0.01f64..2.0) {
            let v = phac_fock(PhacSpec::new(alpha).unwrap(), 48);
            prop_assert!(v.weights().iter().all(|&p| p >= 0.0));
            let argmax = v
                .weights()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0 as i64;
            let m = (alpha * alpha).floor() as i64;
            prop_assert!(argmax == m || argmax == (m - 1).max(0), "argmax {argmax} mean floor {m}");
        }

        #[test]
        fn tail_plus_trace_is_one(alpha in 0.0f64..2.0, extra in 0usize..16) {
            let n_max = 32 + extra;
            let spec = PhacSpec::new(alpha).unwrap();
            let total = phac_fock(spec, n_max).trace() + tail_mass(spec, n_max);
            prop_assert!((total - 1.0).abs() < 1e-12, "total {total}");
        }

        #[test]
        fn phac_moments_are_mean_and_mean_squared(alpha in 0.0f64..1.45) {
            let (m2, m4) = moment_m2m4(&phac_fock(PhacSpec::new(alpha).unwrap(), 32));
            let mean = alpha * alpha;
            prop_assert!((m2 - mean).abs() < 1e-10);
            prop_assert!((m4 - mean * mean).abs() < 1e-10);
        }
    }
}
