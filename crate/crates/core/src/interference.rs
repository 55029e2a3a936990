//! The 50/50 hybrid-coupler transformation, energy detection, and the
//! closed-form dip oracles.
//!
//! Conventions frozen for reproducibility: the coupler acts as
//! `out1 = (in1 + i·in2)/√2`, `out2 = (i·in1 + in2)/√2`. Any 50/50
//! unitary yields the same phase-averaged moments.

use num_complex::Complex64;

use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::waveform::ComplexTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct CouplerOutput {
    pub out1: ComplexTrace,
    pub out2: ComplexTrace,
}

/// Phase-averaged detector energies and their product, in pulse-energy
/// units (τ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTriple {
    pub e1_mean: f64,
    pub e2_mean: f64,
    pub e1e2_mean: f64,
}

/// Apply the 90° hybrid coupler samplewise.
pub fn hybrid_couple(in1: &ComplexTrace, in2: &ComplexTrace) -> Result<CouplerOutput> {
    if !in1.same_grid(in2) {
        return Err(Error::GridMismatch);
    }
    let mut out1 = ComplexTrace::zeros(in1.len(), in1.sample_period(), in1.start_time());
    let mut out2 = out1.clone();
    couple_into(in1, in2, &mut out1, &mut out2);
    Ok(CouplerOutput { out1, out2 })
}

pub(crate) fn couple_into(
    in1: &ComplexTrace,
    in2: &ComplexTrace,
    out1: &mut ComplexTrace,
    out2: &mut ComplexTrace,
) {
    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;
    for (((u, v), o1), o2) in in1
        .samples()
        .iter()
        .zip(in2.samples())
        .zip(out1.samples_mut())
        .zip(out2.samples_mut())
    {
        // (u + i·v)/√2 and (i·u + v)/√2, written out per quadrature.
        *o1 = Complex64::new((u.re - v.im) * S, (u.im + v.re) * S);
        *o2 = Complex64::new((v.re - u.im) * S, (v.im + u.re) * S);
    }
}

/// Detected pulse energy: `Σ |s_k|² · sample_period` over the record.
pub fn pulse_energy(trace: &ComplexTrace) -> f64 {
    trace.samples().iter().map(|s| s.norm_sqr()).sum::<f64>() * trace.sample_period()
}

/// Overlap fraction of two width-τ rectangles shifted by δτ.
pub fn overlap_f(delta_tau: f64, tau: f64) -> f64 {
    assert!(tau > 0.0);
    let x = delta_tau.abs() / tau;
    if x >= 1.0 {
        0.0
    } else {
        1.0 - x
    }
}

/// HOM dip of two identical PhAC states: `g² = 1 - f²/2`.
pub fn g2_phac_analytic(f: f64) -> f64 {
    1.0 - 0.5 * f * f
}

/// Baseline-normalized HOM dip of an ideal single-photon pair:
/// `g² ∝ 1 - f²`.
pub fn g2_single_analytic(f: f64) -> f64 {
    1.0 - f * f
}

/// Phase-averaged coupler-output moments for coherent amplitudes `a`, `b`
/// with pulse overlap `f`, in pulse-energy units.
///
/// With a uniformly random relative phase Δ the instantaneous energies are
/// `E1 = (a²+b²)/2 - f·a·b·sinΔ` and `E2 = (a²+b²)/2 + f·a·b·sinΔ`, so the
/// phase averages are `⟨E1⟩ = ⟨E2⟩ = (a²+b²)/2` and
/// `⟨E1E2⟩ = (a²+b²)²/4 - f²·a²·b²/2`.
pub fn classical_moments(a: f64, b: f64, f: f64) -> MomentTriple {
    let s = 0.5 * (a * a + b * b);
    MomentTriple {
        e1_mean: s,
        e2_mean: s,
        e1e2_mean: s * s - 0.5 * f * f * (a * a) * (b * b),
    }
}

/// Closed-form conditional dip for a signed mixture feeding both coupler
/// arms. Returns `(raw, normalized)` where `raw = N(f)/M2²` with
/// `N(f) = (M4 + M2²)/2 - f²·M2²/2`, and `normalized = N(f)/N(0)`.
///
/// For an exact single photon (`M2 = 1`, `M4 = 0`) the normalized dip is
/// `1 - f²`; for a single PhAC (`M4 = M2²`) both outputs reduce to
/// `1 - f²/2`.
pub fn conditional_g2_analytic(dec: &Decomposition, f: f64) -> Result<(f64, f64)> {
    let (m2, m4) = dec.field_moments();
    if m2 <= 0.0 {
        return Err(Error::DegenerateState { m2 });
    }
    let n0 = 0.5 * (m4 + m2 * m2);
    if n0 <= 0.0 {
        return Err(Error::DegenerateState { m2 });
    }
    let nf = n0 - 0.5 * f * f * m2 * m2;
    Ok((nf / (m2 * m2), nf / n0))
}
