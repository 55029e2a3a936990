//! Signed, bound-constrained fits of a target diagonal state by PhAC
//! states, the sign-split ancilla bookkeeping, and the amplitude scaling
//! law.
//!
//! The fit minimizes the squared distance between the target's photon
//! number weights and those of the mixture `Σ_j c_j ρ(α_j)` up to a
//! truncation order, holding `Σ c_j = 1` exactly and clamping every
//! coefficient into `|c_j| <= B_j`. This is a small convex QP solved by an
//! exact active-set method with a fixed pivot order, so for given inputs
//! the output is bit-identical across runs.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::fock::{phac_fock, FockVector, PhacSpec};
use crate::qp::solve_box_trace_qp;

/// The stock six-amplitude grid used throughout the default configs.
pub const DEFAULT_AMPLITUDES: [f64; 6] = [0.05, 0.1, 0.2, 0.4, 0.8, 1.45];

/// Strictly increasing non-negative PhAC amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeGrid {
    amplitudes: Vec<f64>,
}

impl AmplitudeGrid {
    pub fn new(amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(invalid("amplitude grid", "empty"));
        }
        for &a in &amplitudes {
            if !a.is_finite() || a < 0.0 {
                return Err(invalid("amplitude grid", format!("amplitude {a}")));
            }
        }
        for w in amplitudes.windows(2) {
            if w[1] <= w[0] {
                return Err(invalid(
                    "amplitude grid",
                    format!("not strictly increasing: {} then {}", w[0], w[1]),
                ));
            }
        }
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Every amplitude multiplied by `x > 0`.
    pub fn scaled(&self, x: f64) -> Self {
        Self { amplitudes: self.amplitudes.iter().map(|a| a * x).collect() }
    }
}

impl Default for AmplitudeGrid {
    fn default() -> Self {
        Self { amplitudes: DEFAULT_AMPLITUDES.to_vec() }
    }
}

/// Per-coefficient magnitude caps `|c_j| <= B_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBounds {
    per_coefficient_max: Vec<f64>,
}

impl CoefficientBounds {
    pub fn new(per_coefficient_max: Vec<f64>) -> Result<Self> {
        if per_coefficient_max.is_empty() {
            return Err(invalid("coefficient bounds", "empty"));
        }
        for &b in &per_coefficient_max {
            if !b.is_finite() || b <= 0.0 {
                return Err(invalid("coefficient bounds", format!("bound {b}")));
            }
        }
        Ok(Self { per_coefficient_max })
    }

    pub fn uniform(len: usize, bound: f64) -> Result<Self> {
        Self::new(vec![bound; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.per_coefficient_max
    }

    pub fn len(&self) -> usize {
        self.per_coefficient_max.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_coefficient_max.is_empty()
    }
}

/// A signed mixture of PhAC states together with its fit diagnostics.
///
/// Diagnostics are `None` on decompositions that were rescaled or read
/// back from a hand-written record, since they refer to the original fit
/// target.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    grid: AmplitudeGrid,
    coefficients: Vec<f64>,
    total_weight: f64,
    fidelity: Option<f64>,
    l2_residual: Option<f64>,
    negativity: Option<f64>,
}

impl Decomposition {
    /// Assemble from grid and coefficients, checking the unit-trace
    /// constraint. Diagnostics stay unset.
    pub fn from_parts(grid: AmplitudeGrid, coefficients: Vec<f64>) -> Result<Self> {
        if grid.len() != coefficients.len() {
            return Err(invalid(
                "decomposition",
                format!("{} amplitudes vs {} coefficients", grid.len(), coefficients.len()),
            ));
        }
        if let Some(c) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(invalid("decomposition", format!("coefficient {c}")));
        }
        let trace: f64 = coefficients.iter().sum();
        if (trace - 1.0).abs() > 1e-9 {
            return Err(invalid("decomposition", format!("trace {trace} not 1 within 1e-9")));
        }
        let total_weight = coefficients.iter().map(|c| c.abs()).sum();
        Ok(Self {
            grid,
            coefficients,
            total_weight,
            fidelity: None,
            l2_residual: None,
            negativity: None,
        })
    }

    pub fn grid(&self) -> &AmplitudeGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// C = Σ |c_j|, the sampling-cost factor of the signed representation.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn fidelity(&self) -> Option<f64> {
        self.fidelity
    }

    pub fn l2_residual(&self) -> Option<f64> {
        self.l2_residual
    }

    pub fn negativity(&self) -> Option<f64> {
        self.negativity
    }

    /// Field moments of the represented state: `M2 = Σ c_j α_j²` and
    /// `M4 = Σ c_j α_j⁴`.
    pub fn field_moments(&self) -> (f64, f64) {
        let mut m2 = 0.0;
        let mut m4 = 0.0;
        for (c, a) in self.coefficients.iter().zip(self.grid.amplitudes()) {
            let a2 = a * a;
            m2 += c * a2;
            m4 += c * a2 * a2;
        }
        (m2, m4)
    }

    /// Serialize to the flat text record consumed by the sweep runner and
    /// the CLI: `# key=value` headers, then one `index,amplitude,
    /// coefficient` line per grid entry. Floats are written with enough
    /// digits to round-trip exactly.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        out.push_str("# decomposition v1\n");
        let _ = writeln!(out, "# fidelity={}", opt(self.fidelity));
        let _ = writeln!(out, "# l2_residual={}", opt(self.l2_residual));
        let _ = writeln!(out, "# negativity={}", opt(self.negativity));
        let _ = writeln!(out, "# total_weight={}", self.total_weight);
        for (j, (a, c)) in self.grid.amplitudes().iter().zip(&self.coefficients).enumerate() {
            let _ = writeln!(out, "{},{},{}", j + 1, a, c);
        }
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let mut fidelity = None;
        let mut l2_residual = None;
        let mut negativity = None;
        let mut amplitudes = Vec::new();
        let mut coefficients = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: String| Error::Parse { line: lineno + 1, msg };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some((key, value)) = rest.split_once('=') {
                    let slot = match key.trim() {
                        "fidelity" => &mut fidelity,
                        "l2_residual" => &mut l2_residual,
                        "negativity" => &mut negativity,
                        _ => continue,
                    };
                    *slot = parse_opt(value.trim())
                        .map_err(|m| err(format!("{key}: {m}")))?;
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, got {}", fields.len())));
            }
            let index: usize =
                fields[0].trim().parse().map_err(|_| err("bad index".into()))?;
            if index != amplitudes.len() + 1 {
                return Err(err(format!("index {index} out of order")));
            }
            amplitudes.push(
                fields[1].trim().parse::<f64>().map_err(|_| err("bad amplitude".into()))?,
            );
            coefficients.push(
                fields[2].trim().parse::<f64>().map_err(|_| err("bad coefficient".into()))?,
            );
        }
        let grid = AmplitudeGrid::new(amplitudes)?;
        let mut dec = Self::from_parts(grid, coefficients)?;
        dec.fidelity = fidelity;
        dec.l2_residual = l2_residual;
        dec.negativity = negativity;
        Ok(dec)
    }

    pub fn write_record(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_record())?;
        Ok(())
    }

    pub fn read_record(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_record(&std::fs::read_to_string(path)?)
    }
}

fn opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "na".into(),
    }
}

fn parse_opt(s: &str) -> std::result::Result<Option<f64>, String> {
    if s == "na" {
        return Ok(None);
    }
    s.parse::<f64>().map(Some).map_err(|_| format!("bad float {s:?}"))
}

/// The sign-split two-branch form of a signed mixture: positive-weight
/// PhAC states on one ancilla setting, negative-weight ones on the other.
#[derive(Debug, Clone, PartialEq)]
pub struct AncillaRepresentation {
    positive_branch: Vec<(f64, f64)>,
    negative_branch: Vec<(f64, f64)>,
    total_weight: f64,
}

impl AncillaRepresentation {
    /// `(amplitude, |c|)` pairs with positive coefficients.
    pub fn positive_branch(&self) -> &[(f64, f64)] {
        &self.positive_branch
    }

    /// `(amplitude, |c|)` pairs with negative coefficients.
    pub fn negative_branch(&self) -> &[(f64, f64)] {
        &self.negative_branch
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }
}

/// Solve the signed bound-constrained fit of `target` on `grid`.
///
/// Returns the coefficients minimizing the squared weight mismatch up to
/// `n_max`, subject to `Σ c_j = 1` and `|c_j| <= B_j`, plus diagnostics
/// computed from the reconstruction.
pub fn fit_target(
    target: &FockVector,
    grid: &AmplitudeGrid,
    bounds: &CoefficientBounds,
    n_max: usize,
) -> Result<Decomposition> {
    if grid.len() != bounds.len() {
        return Err(invalid(
            "fit inputs",
            format!("{} amplitudes vs {} bounds", grid.len(), bounds.len()),
        ));
    }
    if target.negativity() > 0.0 {
        return Err(invalid("fit target", "target must be physical"));
    }
    for w in grid.amplitudes().windows(2) {
        if (w[1] - w[0]).abs() < 1e-12 {
            return Err(Error::DegenerateGrid { first: w[0], second: w[1] });
        }
    }
    let bound_sum: f64 = bounds.values().iter().sum();
    if bound_sum < 1.0 {
        return Err(Error::InfeasibleBounds { bound_sum });
    }

    let j_count = grid.len();
    let basis: Vec<FockVector> = grid
        .amplitudes()
        .iter()
        .map(|&a| phac_fock(PhacSpec::new(a).expect("grid validated"), n_max))
        .collect();
    let mut t = vec![0.0; n_max + 1];
    for (n, slot) in t.iter_mut().enumerate() {
        *slot = target.weights().get(n).copied().unwrap_or(0.0);
    }

    // Gram matrix and projections of the target on the basis.
    let mut g = vec![vec![0.0; j_count]; j_count];
    let mut q = vec![0.0; j_count];
    for i in 0..j_count {
        for j in i..j_count {
            let dot: f64 = basis[i]
                .weights()
                .iter()
                .zip(basis[j].weights())
                .map(|(x, y)| x * y)
                .sum();
            g[i][j] = dot;
            g[j][i] = dot;
        }
        q[i] = basis[i].weights().iter().zip(&t).map(|(x, y)| x * y).sum();
    }

    let lower: Vec<f64> = bounds.values().iter().map(|b| -b).collect();
    let coefficients = solve_box_trace_qp(&g, &q, &lower, bounds.values(), 1.0)?;

    let mut reconstruction = vec![0.0; n_max + 1];
    for (c, base) in coefficients.iter().zip(&basis) {
        for (r, w) in reconstruction.iter_mut().zip(base.weights()) {
            *r += c * w;
        }
    }
    let fidelity = reconstruction.get(1).copied().unwrap_or(0.0);
    let l2_residual = reconstruction
        .iter()
        .zip(&t)
        .map(|(r, t)| (r - t) * (r - t))
        .sum::<f64>()
        .sqrt();
    let negativity = reconstruction.iter().map(|&p| (-p).max(0.0)).sum();
    let total_weight = coefficients.iter().map(|c| c.abs()).sum();

    Ok(Decomposition {
        grid: grid.clone(),
        coefficients,
        total_weight,
        fidelity: Some(fidelity),
        l2_residual: Some(l2_residual),
        negativity: Some(negativity),
    })
}

/// Partition a decomposition's coefficients by sign into the two ancilla
/// branches. Weights are absolute values; grid order is kept.
pub fn sign_split(dec: &Decomposition) -> AncillaRepresentation {
    let mut positive_branch = Vec::new();
    let mut negative_branch = Vec::new();
    for (&c, &a) in dec.coefficients().iter().zip(dec.grid().amplitudes()) {
        if c > 0.0 {
            positive_branch.push((a, c));
        } else if c < 0.0 {
            negative_branch.push((a, -c));
        }
    }
    AncillaRepresentation {
        positive_branch,
        negative_branch,
        total_weight: dec.total_weight(),
    }
}

/// Scale every grid amplitude by `x > 0`, keeping the coefficients.
///
/// The scaled mixture represents the scaled state, so the fit diagnostics
/// (which refer to the unscaled target) are dropped. `x = 1` returns the
/// decomposition unchanged.
pub fn scale(dec: &Decomposition, x: f64) -> Decomposition {
    assert!(x > 0.0 && x.is_finite(), "scale factor must be positive");
    if x == 1.0 {
        return dec.clone();
    }
    Decomposition {
        grid: dec.grid.scaled(x),
        coefficients: dec.coefficients.clone(),
        total_weight: dec.total_weight,
        fidelity: None,
        l2_residual: None,
        negativity: None,
    }
}

/// The signed weight vector `Σ_j c_j ρ(α_j)` truncated at `n_max`.
pub fn reconstruct(dec: &Decomposition, n_max: usize) -> FockVector {
    let mut weights = vec![0.0; n_max + 1];
    for (&c, &a) in dec.coefficients().iter().zip(dec.grid().amplitudes()) {
        let base = phac_fock(PhacSpec::new(a).expect("grid validated"), n_max);
        for (w, b) in weights.iter_mut().zip(base.weights()) {
            *w += c * b;
        }
    }
    FockVector::signed(weights).expect("finite by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fidelity_to_single_photon, moment_m2m4, tail_mass};
    use approx::assert_abs_diff_eq;

    fn eq6() -> AmplitudeGrid {
        AmplitudeGrid::default()
    }

    #[test]
    fn grid_rejects_unsorted_and_negative() {
        assert!(AmplitudeGrid::new(vec![0.2, 0.1]).is_err());
        assert!(AmplitudeGrid::new(vec![-0.1, 0.2]).is_err());
        assert!(AmplitudeGrid::new(vec![0.1, 0.1]).is_err());
        assert!(AmplitudeGrid::new(vec![0.0, 0.2]).is_ok());
    }

    #[test]
    fn target_in_basis_is_recovered_exactly() {
        let grid = AmplitudeGrid::new(vec![0.2, 0.5, 0.9]).unwrap();
        let target = phac_fock(PhacSpec::new(0.5).unwrap(), 32);
        let bounds = CoefficientBounds::uniform(3, 40.0).unwrap();
        let dec = fit_target(&target, &grid, &bounds, 32).unwrap();
        assert_abs_diff_eq!(dec.coefficients()[0], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(dec.coefficients()[1], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(dec.coefficients()[2], 0.0, epsilon = 1e-10);
        assert!(dec.l2_residual().unwrap() <= 1e-10);
    }

    #[test]
    fn five_amplitudes_below_one_reach_999() {
        for amps in [
            vec![0.2, 0.4, 0.6, 0.8, 1.0],
            vec![0.1, 0.3, 0.5, 0.7, 0.9],
            vec![0.0625, 0.125, 0.25, 0.5, 1.0],
        ] {
            let grid = AmplitudeGrid::new(amps).unwrap();
            let bounds = CoefficientBounds::uniform(5, 40.0).unwrap();
            let dec =
                fit_target(&FockVector::single_photon(32), &grid, &bounds, 32).unwrap();
            assert!(
                dec.fidelity().unwrap() >= 0.999,
                "fidelity {} on {:?}",
                dec.fidelity().unwrap(),
                dec.grid().amplitudes()
            );
        }
    }

    #[test]
    fn stock_grid_regime_a_solution() {
        // Golden values produced by this solver and cross-checked against
        // an exhaustive enumeration of active-set configurations.
        let bounds = CoefficientBounds::uniform(6, 40.0).unwrap();
        let dec = fit_target(&FockVector::single_photon(32), &eq6(), &bounds, 32).unwrap();
        let c = dec.coefficients();
        assert_eq!(c[0], -40.0);
        assert_abs_diff_eq!(c[1], 5.1166492, epsilon = 1e-4);
        assert_abs_diff_eq!(c[2], 39.4385945, epsilon = 1e-4);
        assert_abs_diff_eq!(c[3], -3.6446496, epsilon = 1e-5);
        assert_abs_diff_eq!(dec.fidelity().unwrap(), 1.0000095, epsilon = 1e-6);
        assert_abs_diff_eq!(dec.l2_residual().unwrap(), 7.5966e-5, epsilon = 1e-8);
        assert_abs_diff_eq!(dec.negativity().unwrap(), 8.295e-5, epsilon = 1e-7);
        assert_abs_diff_eq!(dec.total_weight(), 88.2934, epsilon = 1e-3);
        assert!(dec.fidelity().unwrap() >= 0.99);
        assert!(dec.total_weight() >= 1.0);
    }

    #[test]
    fn stock_grid_regime_b_solution() {
        let bounds = CoefficientBounds::new(vec![5.0, 10.0, 10.0, 10.0, 10.0, 10.0]).unwrap();
        let dec = fit_target(&FockVector::single_photon(32), &eq6(), &bounds, 32).unwrap();
        let c = dec.coefficients();
        assert_eq!(c[0], -5.0);
        assert_eq!(c[1], -10.0);
        assert_abs_diff_eq!(c[2], 8.8462581, epsilon = 1e-6);
        assert_abs_diff_eq!(c[3], 8.1430926, epsilon = 1e-6);
        assert_abs_diff_eq!(c[4], -1.0627447, epsilon = 1e-6);
        assert_abs_diff_eq!(c[5], 0.0733940, epsilon = 1e-6);
        assert_abs_diff_eq!(dec.fidelity().unwrap(), 0.9989634, epsilon = 1e-6);
        assert_abs_diff_eq!(dec.l2_residual().unwrap(), 7.472342e-3, epsilon = 1e-8);
    }

    #[test]
    fn tighter_bounds_never_lower_residual() {
        let target = FockVector::single_photon(32);
        let mut last = f64::INFINITY;
        for b in [2.0, 5.0, 10.0, 20.0, 40.0] {
            let bounds = CoefficientBounds::uniform(6, b).unwrap();
            let dec = fit_target(&target, &eq6(), &bounds, 32).unwrap();
            let r = dec.l2_residual().unwrap();
            assert!(r <= last + 1e-12, "bound {b}: residual {r} > {last}");
            last = r;
        }
    }

    #[test]
    fn regime_a_fidelity_at_least_regime_b() {
        let target = FockVector::single_photon(32);
        let a = fit_target(&target, &eq6(), &CoefficientBounds::uniform(6, 40.0).unwrap(), 32)
            .unwrap();
        let b = fit_target(
            &target,
            &eq6(),
            &CoefficientBounds::new(vec![5.0, 10.0, 10.0, 10.0, 10.0, 10.0]).unwrap(),
            32,
        )
        .unwrap();
        assert!(a.fidelity().unwrap() >= b.fidelity().unwrap());
    }

    #[test]
    fn infeasible_bounds_detected() {
        let grid = AmplitudeGrid::new(vec![0.2, 0.5]).unwrap();
        let bounds = CoefficientBounds::new(vec![0.3, 0.4]).unwrap();
        let err =
            fit_target(&FockVector::single_photon(8), &grid, &bounds, 8).unwrap_err();
        assert!(matches!(err, Error::InfeasibleBounds { .. }));
    }

    #[test]
    fn near_coincident_amplitudes_detected() {
        let grid = AmplitudeGrid::new(vec![0.2, 0.2 + 1e-13]).unwrap();
        let bounds = CoefficientBounds::uniform(2, 40.0).unwrap();
        let err =
            fit_target(&FockVector::single_photon(8), &grid, &bounds, 8).unwrap_err();
        assert!(matches!(err, Error::DegenerateGrid { .. }));
    }

    #[test]
    fn sign_split_examples() {
        let grid = AmplitudeGrid::new(vec![0.3]).unwrap();
        let dec = Decomposition::from_parts(grid, vec![1.0]).unwrap();
        let anc = sign_split(&dec);
        assert_eq!(anc.positive_branch(), &[(0.3, 1.0)]);
        assert!(anc.negative_branch().is_empty());
        assert_eq!(anc.total_weight(), 1.0);

        let grid = AmplitudeGrid::new(vec![0.3, 0.7]).unwrap();
        let dec = Decomposition::from_parts(grid, vec![2.0, -1.0]).unwrap();
        let anc = sign_split(&dec);
        assert_eq!(anc.positive_branch(), &[(0.3, 2.0)]);
        assert_eq!(anc.negative_branch(), &[(0.7, 1.0)]);
        assert_eq!(anc.total_weight(), 3.0);
    }

    #[test]
    fn sign_split_branch_sums_differ_by_one() {
        let bounds = CoefficientBounds::uniform(6, 40.0).unwrap();
        let dec = fit_target(&FockVector::single_photon(32), &eq6(), &bounds, 32).unwrap();
        let anc = sign_split(&dec);
        let pos: f64 = anc.positive_branch().iter().map(|(_, w)| w).sum();
        let neg: f64 = anc.negative_branch().iter().map(|(_, w)| w).sum();
        assert_abs_diff_eq!(pos - neg, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(pos + neg, dec.total_weight(), epsilon = 1e-9);
    }

    #[test]
    fn scale_examples() {
        let bounds = CoefficientBounds::uniform(6, 40.0).unwrap();
        let dec = fit_target(&FockVector::single_photon(32), &eq6(), &bounds, 32).unwrap();
        let same = scale(&dec, 1.0);
        assert_eq!(same, dec);
        let doubled = scale(&dec, 2.0);
        let expect = [0.1, 0.2, 0.4, 0.8, 1.6, 2.9];
        for (a, e) in doubled.grid().amplitudes().iter().zip(expect) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-12);
        }
        assert_eq!(doubled.coefficients(), dec.coefficients());
        assert!(doubled.fidelity().is_none());
        assert!(doubled.l2_residual().is_none());
    }

    #[test]
    fn scaling_law_at_moment_level() {
        let bounds = CoefficientBounds::uniform(6, 40.0).unwrap();
        let dec = fit_target(&FockVector::single_photon(32), &eq6(), &bounds, 32).unwrap();
        let (m2, m4) = moment_m2m4(&reconstruct(&dec, 48));
        for x in [0.5, 2.0] {
            // Truncation grows with the scaled mean photon number.
            let n_max = (((x * 1.45) * (x * 1.45)) as usize + 1) * 8 + 48;
            let scaled = scale(&dec, x);
            let (m2x, m4x) = moment_m2m4(&reconstruct(&scaled, n_max));
            assert_abs_diff_eq!(m2x, x * x * m2, epsilon = 1e-9);
            assert_abs_diff_eq!(m4x, x * x * x * x * m4, epsilon = 1e-9);
        }
    }

    #[test]
    fn reconstruct_examples() {
        let grid = AmplitudeGrid::new(vec![0.0]).unwrap();
        let dec = Decomposition::from_parts(grid, vec![1.0]).unwrap();
        let rec = reconstruct(&dec, 8);
        assert_eq!(rec.weights()[0], 1.0);
        assert!(rec.weights()[1..].iter().all(|&p| p == 0.0));

        let bounds = CoefficientBounds::uniform(6, 40.0).unwrap();
        let fit = fit_target(&FockVector::single_photon(32), &eq6(), &bounds, 32).unwrap();
        let rec = reconstruct(&fit, 32);
        assert!(fidelity_to_single_photon(&rec) >= 0.999);
        let neg = rec.negativity();
        assert!(neg > 0.0 && neg < 0.05, "negativity {neg}");
        // Trace accounts for the coefficient-weighted truncation tail.
        let weighted_tail: f64 = fit
            .coefficients()
            .iter()
            .zip(fit.grid().amplitudes())
            .map(|(c, &a)| c * tail_mass(PhacSpec::new(a).unwrap(), 32))
            .sum();
        assert_abs_diff_eq!(rec.trace(), 1.0 - weighted_tail, epsilon = 1e-9);
    }

    #[test]
    fn record_round_trips_exactly() {
        let bounds = CoefficientBounds::uniform(6, 40.0).unwrap();
        let dec = fit_target(&FockVector::single_photon(32), &eq6(), &bounds, 32).unwrap();
        let text = dec.to_record();
        let back = Decomposition::from_record(&text).unwrap();
        assert_eq!(back.coefficients(), dec.coefficients());
        assert_eq!(back.grid(), dec.grid());
        assert_eq!(back.fidelity(), dec.fidelity());
        assert_eq!(back.l2_residual(), dec.l2_residual());
        assert_eq!(back.negativity(), dec.negativity());
        assert_eq!(back.to_record(), text);
    }

    #[test]
    fn record_parses_na_diagnostics() {
        let text = "# fidelity=na\n1,0.3,2\n2,0.7,-1\n";
        let dec = Decomposition::from_record(text).unwrap();
        assert!(dec.fidelity().is_none());
        assert_eq!(dec.total_weight(), 3.0);
    }
}
