//! Destabilizing subrepresentation search.
//!
//! With `θ_τ(U) = Σ τ_i dim U_i`, a representation is τ-semistable iff
//! `θ_τ(U) ≥ 0` for every invariant tuple `U`, and τ-stable iff `θ_τ(U) > 0`
//! for every proper nonzero one. The search is sound but not complete: it
//! explores the lattice generated from seed vectors under closure, sums and
//! intersections. When every vertex has dimension at most one it enumerates
//! all coordinate tuples and is exhaustive.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, CMat, CVec};
use crate::moment::{check_trace, Tau};
use crate::quiver::{
    generated_subrep, invariance_residual, Representation, SubrepCandidate, SubspaceTuple,
};
use crate::symmetric::{
    is_isotropic, orthogonal_complement, structured_residual, BlockForm, SymmetricStructure,
};
use crate::{QuiverError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Look for `θ < 0`.
    Semistable,
    /// Look for `θ ≤ 0` on a proper nonzero tuple.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub mode: SearchMode,
    /// Maximum number of lattice elements explored.
    pub budget: usize,
    /// Random seed vectors per vertex.
    pub random_seeds: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            mode: SearchMode::Semistable,
            budget: 256,
            random_seeds: 4,
            seed: 0,
        }
    }
}

impl SearchOptions {
    pub fn strict() -> Self {
        Self {
            mode: SearchMode::Strict,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Destabilizer {
    pub candidate: SubrepCandidate,
    pub theta: f64,
}

/// Tolerance for comparing `θ` with zero.
pub const THETA_TOL: f64 = 1e-9;
/// Invariance tolerance for lattice members.
pub const INVARIANCE_TOL: f64 = 1e-9;

fn is_exhaustive(r: &Representation) -> bool {
    r.dims().n.iter().all(|&n| n <= 1)
}

/// All invariant coordinate tuples when every dimension is at most one.
fn enumerate_small(r: &Representation) -> Vec<SubspaceTuple> {
    let n = &r.dims().n;
    let active: Vec<usize> = (0..n.len()).filter(|&i| n[i] == 1).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << active.len()) {
        let bases = n
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let on = active
                    .iter()
                    .position(|&a| a == i)
                    .is_some_and(|p| mask >> p & 1 == 1);
                if on {
                    linalg::identity(1)
                } else {
                    linalg::zeros(k, 0)
                }
            })
            .collect();
        let u = SubspaceTuple { bases };
        if invariance_residual(r, &u) <= INVARIANCE_TOL {
            out.push(u);
        }
    }
    out
}

fn unit(n: usize, k: usize, z: num_complex::Complex64) -> CVec {
    let mut v = CVec::zeros(n);
    v[k] = z;
    v
}

fn seed_vectors(r: &Representation, opts: &SearchOptions) -> Vec<(usize, CVec)> {
    let q = r.quiver();
    let n = &r.dims().n;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut seeds = Vec::new();
    for (i, &k) in n.iter().enumerate() {
        for a in 0..k {
            seeds.push((i, unit(k, a, linalg::ONE)));
        }
        for a in 0..k {
            for b in (a + 1)..k {
                for z in [linalg::ONE, -linalg::ONE, linalg::I, -linalg::I] {
                    seeds.push((i, unit(k, a, linalg::ONE) + unit(k, b, z)));
                }
            }
        }
        for _ in 0..opts.random_seeds {
            if k > 0 {
                seeds.push((
                    i,
                    linalg::random_gaussian(&mut rng, k, 1)
                        .column(0)
                        .into_owned(),
                ));
            }
        }
        // vectors killed by every outgoing map generate themselves
        let outgoing: Vec<CMat> = (0..q.arrow_count())
            .filter(|&a| q.tail(a) == i)
            .flat_map(|a| r.slices(a))
            .collect();
        if k > 0 && !outgoing.is_empty() {
            let stacked = outgoing
                .iter()
                .skip(1)
                .fold(outgoing[0].clone(), |acc, m| linalg::vstack(&acc, m));
            let ker = linalg::null_space(&stacked, 1e-10);
            for c in 0..ker.ncols() {
                seeds.push((i, ker.column(c).into_owned()));
            }
        }
    }
    // eigenvectors of untwisted loops
    for a in 0..q.arrow_count() {
        if q.is_loop(a) && r.twist(a) == 1 && n[q.tail(a)] > 0 {
            for space in linalg::eigenvectors(r.arrow(a), 1e-8) {
                for c in 0..space.ncols() {
                    seeds.push((q.tail(a), space.column(c).into_owned()));
                }
            }
        }
    }
    seeds
}

fn push_unique(lattice: &mut Vec<SubspaceTuple>, u: SubspaceTuple) -> bool {
    if lattice.iter().any(|v| v.same_as(&u)) {
        false
    } else {
        lattice.push(u);
        true
    }
}

/// Invariant subspace tuples explored by the search, including `0` and the
/// full space.
pub fn invariant_lattice(r: &Representation, opts: &SearchOptions) -> Vec<SubspaceTuple> {
    if is_exhaustive(r) {
        return enumerate_small(r);
    }
    let d = r.dims();
    let mut lattice = vec![SubspaceTuple::zero(d), SubspaceTuple::full(d)];
    for (i, v) in seed_vectors(r, opts) {
        if lattice.len() >= opts.budget {
            break;
        }
        let g = generated_subrep(r, &[(i, v)]);
        if g.invariance_residual <= INVARIANCE_TOL {
            push_unique(&mut lattice, g.subspace);
        }
    }
    close_lattice(&mut lattice, opts.budget, |u| {
        invariance_residual(r, u) <= INVARIANCE_TOL
    });
    lattice
}

fn close_lattice(
    lattice: &mut Vec<SubspaceTuple>,
    budget: usize,
    keep: impl Fn(&SubspaceTuple) -> bool,
) {
    let mut frontier = 0;
    while frontier < lattice.len() && lattice.len() < budget {
        let u = lattice[frontier].clone();
        for k in 0..frontier {
            if lattice.len() >= budget {
                return;
            }
            let v = lattice[k].clone();
            for w in [u.sum(&v), u.intersect(&v)] {
                if keep(&w) {
                    push_unique(lattice, w);
                }
            }
        }
        frontier += 1;
    }
}

fn best_witness(
    r: &Representation,
    tau: &Tau,
    cands: &[SubspaceTuple],
    mode: SearchMode,
) -> Option<Destabilizer> {
    let mut best: Option<Destabilizer> = None;
    for u in cands {
        let theta = u.theta(tau);
        let hit = match mode {
            SearchMode::Semistable => theta < -THETA_TOL,
            SearchMode::Strict => theta <= THETA_TOL && !u.is_zero() && !u.is_full(),
        };
        if hit && best.as_ref().is_none_or(|b| theta < b.theta) {
            best = Some(Destabilizer {
                candidate: SubrepCandidate::new(r, u.clone()),
                theta,
            });
        }
    }
    best
}

pub fn find_destabilizer(
    r: &Representation,
    tau: &Tau,
    opts: &SearchOptions,
) -> Result<Option<Destabilizer>> {
    check_trace(tau, &r.dims().n)?;
    Ok(best_witness(r, tau, &invariant_lattice(r, opts), opts.mode))
}

/// Tolerance for the structured-input precondition.
pub const STRUCTURED_TOL: f64 = 1e-8;
/// Tolerance for isotropy of witnesses.
pub const ISOTROPY_TOL: f64 = 1e-9;

/// Checks that `τ_{σ(i)} = −τ_i` and `τ_i = 0` at fixed vertices.
pub fn check_structured_tau(tau: &Tau, s: &SymmetricStructure) -> Result<()> {
    if tau.len() != s.sigma_v.len() {
        return Err(QuiverError::DimensionMismatch("parameter count".into()));
    }
    let bad = (0..tau.len())
        .map(|i| (tau[i] + tau[s.sigma_v[i]]).abs())
        .fold(0.0, f64::max);
    if bad > 1e-12 {
        return Err(QuiverError::DimensionMismatch(format!(
            "parameters are not σ-antisymmetric (defect {bad:e})"
        )));
    }
    Ok(())
}

/// Isotropic invariant tuples explored by the isotropic search.
pub fn isotropic_lattice(
    r: &Representation,
    s: &SymmetricStructure,
    c: &BlockForm,
    opts: &SearchOptions,
) -> Vec<SubspaceTuple> {
    let base = invariant_lattice(r, opts);
    if is_exhaustive(r) {
        return base
            .into_iter()
            .filter(|u| is_isotropic(u, s, c, ISOTROPY_TOL))
            .collect();
    }
    let mut out: Vec<SubspaceTuple> = Vec::new();
    for u in &base {
        let perp = orthogonal_complement(u, s, c);
        for w in [u.clone(), u.intersect(&perp), perp] {
            if out.len() >= opts.budget {
                break;
            }
            if is_isotropic(&w, s, c, ISOTROPY_TOL) && invariance_residual(r, &w) <= INVARIANCE_TOL
            {
                push_unique(&mut out, w);
            }
        }
    }
    close_lattice(&mut out, opts.budget, |w| {
        is_isotropic(w, s, c, ISOTROPY_TOL) && invariance_residual(r, w) <= INVARIANCE_TOL
    });
    out
}

pub fn find_isotropic_destabilizer(
    r: &Representation,
    tau: &Tau,
    s: &SymmetricStructure,
    c: &BlockForm,
    opts: &SearchOptions,
) -> Result<Option<Destabilizer>> {
    crate::symmetric::validate_symmetric(r.quiver(), r.dims(), s).into_result()?;
    crate::symmetric::validate_form(r.dims(), s, c).into_result()?;
    let res = structured_residual(r, s, c);
    if res > STRUCTURED_TOL * (1.0 + r.norm_sq().sqrt()) {
        return Err(QuiverError::NotStructured(res));
    }
    check_structured_tau(tau, s)?;
    Ok(best_witness(
        r,
        tau,
        &isotropic_lattice(r, s, c, opts),
        opts.mode,
    ))
}
