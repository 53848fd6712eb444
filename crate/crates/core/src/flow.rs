//! Downward Kempf–Ness flow for the gauge equation `H_i = τ_i·I`.
//!
//! Each step moves `r ← exp(−η·ξ)·r` with `ξ_i = H_i(r) − τ_i I`. The step
//! `η` is chosen by Armijo backtracking on `f = ½·residual²`, whose slope
//! along the flow is `−2‖δφ‖²` with `δφ_j = ξ_h φ_j − φ_j ξ_t`.

use crate::linalg::{self, CMat};
use crate::moment::{check_trace, shifted_moment, Tau};
use crate::quiver::{from_twist_slices, GaugeElement, Representation};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100_000,
            step: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    /// The flow direction vanished without reaching the target.
    Stationary,
    /// No step size passed the sufficient-decrease test.
    LineSearch,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    /// Residual before each step and after the last one.
    pub residual_trace: Vec<f64>,
    /// Accepted step per iteration (`0` for the initial entry).
    pub step_trace: Vec<f64>,
    pub final_residual: f64,
    pub converged: bool,
    pub step_size_used: f64,
    pub stop: StopReason,
    /// `g` with `output = g·input`.
    pub gauge: GaugeElement,
}

const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const GROW: f64 = 1.2;
const MIN_STEP: f64 = 1e-14;
/// Largest exponent `η·‖ξ‖` taken in one step.
const TRUST: f64 = 10.0;
/// Relative decrease of `f` below which a step counts as stagnant.
const STAGNANT_DECREASE: f64 = 1e-13;
/// Consecutive stagnant steps that end the flow.
const STAGNANT_STEPS: usize = 50;

fn move_by(r: &Representation, e: &[CMat], e_inv: &[CMat]) -> Representation {
    let q = r.quiver();
    let phi = (0..q.arrow_count())
        .map(|a| {
            let (t, h) = (q.tail(a), q.head(a));
            if r.twist(a) == 1 {
                &e[h] * r.arrow(a) * &e_inv[t]
            } else {
                let slices: Vec<CMat> = r.slices(a).iter().map(|s| &e[h] * s * &e_inv[t]).collect();
                from_twist_slices(&slices, r.dims().n[h], r.dims().n[t])
            }
        })
        .collect();
    r.with_phi_unchecked(phi)
}

fn direction_norm_sq(r: &Representation, xi: &[CMat]) -> f64 {
    let q = r.quiver();
    (0..q.arrow_count())
        .map(|a| {
            let (t, h) = (q.tail(a), q.head(a));
            r.slices(a)
                .iter()
                .map(|s| linalg::fro_sq(&(&xi[h] * s - s * &xi[t])))
                .sum::<f64>()
        })
        .sum()
}

pub fn solve_gauge_equation(
    r: &Representation,
    tau: &Tau,
    opts: &SolveOptions,
) -> Result<(Representation, SolveReport)> {
    check_trace(tau, &r.dims().n)?;
    let mut cur = r.clone();
    let mut gauge = GaugeElement::identity(r.dims());
    let mut xi = shifted_moment(&cur, tau);
    let mut f = 0.5 * xi.iter().map(linalg::fro_sq).sum::<f64>();
    let mut residual_trace = vec![(2.0 * f).sqrt()];
    let mut step_trace = vec![0.0];
    let mut eta = opts.step;
    let mut used = 0.0;
    let mut iterations = 0;
    let mut stagnant = 0;
    let stop = loop {
        let res = (2.0 * f).sqrt();
        if res <= opts.tol {
            break StopReason::Converged;
        }
        if iterations >= opts.max_iter {
            break StopReason::MaxIterations;
        }
        let slope = 2.0 * direction_norm_sq(&cur, &xi);
        if slope <= 1e-30 * (1.0 + f) {
            break StopReason::Stationary;
        }
        let xi_norm = xi.iter().map(linalg::spectral_norm).fold(0.0, f64::max);
        eta = eta.min(TRUST / xi_norm);
        let accepted = loop {
            if eta < MIN_STEP {
                break None;
            }
            let e: Vec<CMat> = xi.iter().map(|x| linalg::expm_hermitian(x, -eta)).collect();
            let e_inv: Vec<CMat> = xi.iter().map(|x| linalg::expm_hermitian(x, eta)).collect();
            let cand = move_by(&cur, &e, &e_inv);
            let xi_c = shifted_moment(&cand, tau);
            let f_c = 0.5 * xi_c.iter().map(linalg::fro_sq).sum::<f64>();
            if f_c.is_finite() && f_c <= f - ARMIJO_C * eta * slope {
                break Some((cand, xi_c, f_c, e));
            }
            eta *= SHRINK;
        };
        let Some((cand, xi_c, f_c, e)) = accepted else {
            break StopReason::LineSearch;
        };
        if f - f_c <= STAGNANT_DECREASE * f {
            stagnant += 1;
        } else {
            stagnant = 0;
        }
        gauge = GaugeElement::vertex(e.iter().zip(&gauge.g).map(|(a, b)| a * b).collect());
        cur = cand;
        xi = xi_c;
        f = f_c;
        used = eta;
        iterations += 1;
        residual_trace.push((2.0 * f).sqrt());
        step_trace.push(eta);
        eta *= GROW;
        if stagnant >= STAGNANT_STEPS && (2.0 * f).sqrt() > opts.tol {
            break StopReason::Stationary;
        }
    };
    let final_residual = (2.0 * f).sqrt();
    let report = SolveReport {
        iterations,
        residual_trace,
        step_trace,
        final_residual,
        converged: stop == StopReason::Converged,
        step_size_used: used,
        stop,
        gauge,
    };
    Ok((cur, report))
}
