//! Rational one-parameter subgroups, their exact limiting weights, and the
//! filtrations they induce.

use crate::linalg::{self, CMat};
use crate::moment::Tau;
use crate::quiver::{invariance_residual, Representation, SubspaceTuple};
use crate::symmetric::{structured_algebra_residual, BlockForm, SymmetricStructure};
use crate::{QuiverError, Result};

/// `χ_i = Q_i · diag(w_i) · Q_i*` with `Q_i` unitary and integer weights.
#[derive(Debug, Clone)]
pub struct OnePS {
    pub q: Vec<CMat>,
    pub w: Vec<Vec<i64>>,
}

impl OnePS {
    /// Diagonal one-parameter subgroup in the standard basis.
    pub fn diagonal(w: Vec<Vec<i64>>) -> Self {
        let q = w.iter().map(|wi| linalg::identity(wi.len())).collect();
        Self { q, w }
    }

    pub fn new(q: Vec<CMat>, w: Vec<Vec<i64>>) -> Result<Self> {
        if q.len() != w.len() {
            return Err(QuiverError::DimensionMismatch(
                "bases and weights cover different vertices".into(),
            ));
        }
        for (qi, wi) in q.iter().zip(&w) {
            if qi.shape() != (wi.len(), wi.len()) {
                return Err(QuiverError::DimensionMismatch(
                    "basis shape does not match weight count".into(),
                ));
            }
            let n = wi.len();
            if linalg::fro(&(qi.adjoint() * qi - linalg::identity(n))) > 1e-10 {
                return Err(QuiverError::DimensionMismatch(
                    "one-parameter subgroup basis is not unitary".into(),
                ));
            }
        }
        Ok(Self { q, w })
    }

    /// The hermitian generators `χ_i`.
    pub fn matrices(&self) -> Vec<CMat> {
        self.q
            .iter()
            .zip(&self.w)
            .map(|(qi, wi)| {
                let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                    wi.len(),
                    wi.iter().map(|&x| linalg::c(x as f64, 0.0)),
                ));
                qi * d * qi.adjoint()
            })
            .collect()
    }

    pub fn scaled(&self, k: i64) -> Self {
        Self {
            q: self.q.clone(),
            w: self
                .w
                .iter()
                .map(|wi| wi.iter().map(|x| x * k).collect())
                .collect(),
        }
    }

    /// `Σ_i τ_i tr χ_i`.
    pub fn pairing(&self, tau: &Tau) -> f64 {
        self.w
            .iter()
            .zip(tau)
            .map(|(wi, t)| t * wi.iter().sum::<i64>() as f64)
            .sum()
    }

    pub fn is_central(&self) -> bool {
        let mut all = self.w.iter().flatten();
        match all.next() {
            None => true,
            Some(first) => all.all(|x| x == first),
        }
    }
}

/// A limiting weight: finite or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Finite(f64),
    Infinite,
}

impl Weight {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Weight::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Weight::Finite(x) => Some(*x),
            Weight::Infinite => None,
        }
    }
}

/// Default tolerance on the size of positive-weight components.
pub const COMPONENT_TOL: f64 = 1e-10;

/// Largest norm among components of strictly positive weight.
pub fn positive_weight_mass(r: &Representation, chi: &OnePS) -> f64 {
    let q = r.quiver();
    let mut worst: f64 = 0.0;
    for a in 0..q.arrow_count() {
        let (t, h) = (q.tail(a), q.head(a));
        for s in r.slices(a) {
            // components in the eigenbases: entry (x, y) has weight w_h[x] − w_t[y]
            let rotated = chi.q[h].adjoint() * s * &chi.q[t];
            let mut mass = 0.0;
            for x in 0..rotated.nrows() {
                for y in 0..rotated.ncols() {
                    if chi.w[h][x] - chi.w[t][y] > 0 {
                        mass += rotated[(x, y)].norm_sqr();
                    }
                }
            }
            worst = worst.max(mass.sqrt());
        }
    }
    worst
}

/// `lim_{t→∞} λ_t(r, χ)` computed exactly from the weight decomposition.
pub fn maximal_weight(r: &Representation, chi: &OnePS, tau: &Tau, tol: f64) -> Weight {
    if positive_weight_mass(r, chi) > tol {
        Weight::Infinite
    } else {
        Weight::Finite(-chi.pairing(tau))
    }
}

/// One step `V^k` of a weight filtration.
#[derive(Debug, Clone)]
pub struct FiltrationStep {
    pub lambda: i64,
    pub subspace: SubspaceTuple,
}

/// `V^k` = span of eigenvectors with weight `≤ λ_k`, over the sorted distinct
/// weights of all vertices.
pub fn weight_filtration(chi: &OnePS) -> Vec<FiltrationStep> {
    let mut lambdas: Vec<i64> = chi.w.iter().flatten().copied().collect();
    lambdas.sort_unstable();
    lambdas.dedup();
    lambdas
        .into_iter()
        .map(|lambda| {
            let bases = chi
                .q
                .iter()
                .zip(&chi.w)
                .map(|(qi, wi)| {
                    let idx: Vec<usize> = (0..wi.len()).filter(|&k| wi[k] <= lambda).collect();
                    linalg::select_columns(qi, &idx)
                })
                .collect();
            FiltrationStep {
                lambda,
                subspace: SubspaceTuple { bases },
            }
        })
        .collect()
}

pub const FILTRATION_TOL: f64 = 1e-10;

/// Whether every step of the weight filtration is a subrepresentation.
pub fn filtration_invariance(r: &Representation, chi: &OnePS) -> bool {
    weight_filtration(chi)
        .iter()
        .all(|s| invariance_residual(r, &s.subspace) <= FILTRATION_TOL)
}

/// Tolerance on the structured Lie algebra condition for `χ`.
pub const ALGEBRA_TOL: f64 = 1e-8;

/// Limiting weight of a structured one-parameter subgroup:
/// `−2·Σ_{i<σ(i)} τ_i tr χ_i` when finite.
pub fn orthogonal_weight(
    r: &Representation,
    chi: &OnePS,
    tau: &Tau,
    s: &SymmetricStructure,
    c: &BlockForm,
    tol: f64,
) -> Result<Weight> {
    let res = structured_algebra_residual(&chi.matrices(), s, c);
    if res > ALGEBRA_TOL {
        return Err(QuiverError::NotInStructuredAlgebra(res));
    }
    if positive_weight_mass(r, chi) > tol {
        return Ok(Weight::Infinite);
    }
    let paired: f64 = (0..tau.len())
        .filter(|&i| i < s.sigma_v[i])
        .map(|i| tau[i] * chi.w[i].iter().sum::<i64>() as f64)
        .sum();
    Ok(Weight::Finite(-2.0 * paired))
}
