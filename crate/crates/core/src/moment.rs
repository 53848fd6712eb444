//! Moment map, gauge residual, finite-time weights and the Kempf–Ness
//! functional.
//!
//! Everything is stated with the hermitian matrices
//! `H_i = Σ_{h(α)=i} φ_α φ_α* − Σ_{t(α)=i} Tr_M(φ_α* φ_α)`; the gauge
//! equation reads `H_i = τ_i·I`.

use crate::linalg::{self, CMat};
use crate::quiver::{GaugeElement, Representation};
use crate::{QuiverError, Result};

/// Per-vertex stability parameters.
pub type Tau = [f64];

pub fn moment_map(r: &Representation) -> Vec<CMat> {
    let q = r.quiver();
    let n = &r.dims().n;
    let mut h: Vec<CMat> = n.iter().map(|&k| linalg::zeros(k, k)).collect();
    for a in 0..q.arrow_count() {
        let (t, hd) = (q.tail(a), q.head(a));
        let phi = r.arrow(a);
        h[hd] += phi * phi.adjoint();
        if r.twist(a) == 1 {
            h[t] -= phi.adjoint() * phi;
        } else {
            for s in r.slices(a) {
                h[t] -= s.adjoint() * &s;
            }
        }
    }
    h
}

/// `H_i − τ_i·I`.
pub fn shifted_moment(r: &Representation, tau: &Tau) -> Vec<CMat> {
    moment_map(r)
        .into_iter()
        .zip(tau)
        .map(|(h, &t)| {
            let n = h.nrows();
            h - linalg::identity(n) * linalg::c(t, 0.0)
        })
        .collect()
}

/// `(Σ_i ‖H_i − τ_i I‖²_F)^{1/2}`.
pub fn gauge_residual(r: &Representation, tau: &Tau) -> f64 {
    shifted_moment(r, tau)
        .iter()
        .map(linalg::fro_sq)
        .sum::<f64>()
        .sqrt()
}

/// `Σ_i τ_i n_i`; must vanish for the gauge equation to be solvable.
pub fn trace_defect(tau: &Tau, n: &[usize]) -> f64 {
    tau.iter().zip(n).map(|(t, &k)| t * k as f64).sum()
}

pub fn check_trace(tau: &Tau, n: &[usize]) -> Result<()> {
    if tau.len() != n.len() {
        return Err(QuiverError::DimensionMismatch(format!(
            "{} parameters for {} vertices",
            tau.len(),
            n.len()
        )));
    }
    let defect = trace_defect(tau, n);
    let scale: f64 = 1.0
        + tau
            .iter()
            .zip(n)
            .map(|(t, &k)| t.abs() * k as f64)
            .sum::<f64>();
    if defect.abs() > 1e-12 * scale {
        return Err(QuiverError::TraceObstruction(defect));
    }
    Ok(())
}

/// Gauge element `exp(t·s)` for hermitian directions `s`.
pub fn exp_direction(s: &[CMat], t: f64) -> GaugeElement {
    GaugeElement::vertex(s.iter().map(|si| linalg::expm_hermitian(si, t)).collect())
}

/// `Σ_i ⟨H_i(exp(t·s)·r) − τ_i I, s_i⟩`.
pub fn finite_time_weight(r: &Representation, s: &[CMat], tau: &Tau, t: f64) -> Result<f64> {
    let moved = crate::quiver::gauge_act(&exp_direction(s, t), r)?;
    Ok(shifted_moment(&moved, tau)
        .iter()
        .zip(s)
        .map(|(d, si)| linalg::inner(si, d).re)
        .sum())
}

/// Closed form `Ψ(r, g) = ½(‖g·r‖² − ‖r‖²) − Σ_i τ_i log|det g_i|`.
pub fn kempf_ness(r: &Representation, g: &GaugeElement, tau: &Tau) -> Result<f64> {
    let moved = crate::quiver::gauge_act(g, r)?;
    let logdet: f64 =
        g.g.iter()
            .zip(tau)
            .map(|(gi, t)| {
                let lg: f64 = linalg::singular_values(gi).iter().map(|s| s.ln()).sum();
                t * lg
            })
            .sum();
    Ok(0.5 * (moved.norm_sq() - r.norm_sq()) - logdet)
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// `∫₀¹ λ_t(r, s) dt` by composite five-point Gauss–Legendre on `panels`
/// subintervals.
pub fn kempf_ness_quadrature(
    r: &Representation,
    s: &[CMat],
    tau: &Tau,
    panels: usize,
) -> Result<f64> {
    let panels = panels.max(1);
    let h = 1.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            total += w * 0.5 * h * finite_time_weight(r, s, tau, mid + 0.5 * h * x)?;
        }
    }
    Ok(total)
}
