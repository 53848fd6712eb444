//! Plain quivers, dimension vectors, twisted representations and the gauge
//! action.
//!
//! A representation assigns to every arrow `α: t → h` with twist dimension
//! `m` a matrix of shape `n_h × (n_t·m)`. Columns are ordered as the
//! Kronecker product `V_t ⊗ M_α`: column `b·m + j` is the image of
//! `e_b ⊗ e_j`. With this ordering a gauge element acts on the source by the
//! literal Kronecker product `g_t ⊗ g_α`.

use std::collections::HashSet;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, CMat, CVec};
use crate::validation::ValidationReport;
use crate::{QuiverError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub id: String,
    pub tail: String,
    pub head: String,
}

impl Arrow {
    pub fn new(id: &str, tail: &str, head: &str) -> Self {
        Self {
            id: id.to_string(),
            tail: tail.to_string(),
            head: head.to_string(),
        }
    }
}

/// A finite quiver. Endpoints are resolved to vertex positions on
/// construction; unresolved endpoints are reported by [`validate_quiver`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
    ends: Vec<Option<(usize, usize)>>,
}

impl Quiver {
    pub fn new(vertices: Vec<String>, arrows: Vec<Arrow>) -> Self {
        let find = |id: &str| vertices.iter().position(|v| v == id);
        let ends = arrows
            .iter()
            .map(|a| match (find(&a.tail), find(&a.head)) {
                (Some(t), Some(h)) => Some((t, h)),
                _ => None,
            })
            .collect();
        Self {
            vertices,
            arrows,
            ends,
        }
    }

    /// Convenience constructor from `(id, tail, head)` triples.
    pub fn from_edges(vertices: &[&str], arrows: &[(&str, &str, &str)]) -> Self {
        Self::new(
            vertices.iter().map(|v| v.to_string()).collect(),
            arrows
                .iter()
                .map(|(id, t, h)| Arrow::new(id, t, h))
                .collect(),
        )
    }

    /// `v1 → v2`.
    pub fn a2() -> Self {
        Self::from_edges(&["v1", "v2"], &[("a", "v1", "v2")])
    }

    /// `k` parallel arrows `v1 → v2`.
    pub fn kronecker(k: usize) -> Self {
        let ids: Vec<String> = (1..=k).map(|i| format!("a{i}")).collect();
        let edges: Vec<(&str, &str, &str)> =
            ids.iter().map(|id| (id.as_str(), "v1", "v2")).collect();
        Self::from_edges(&["v1", "v2"], &edges)
    }

    /// One vertex with a single loop.
    pub fn jordan() -> Self {
        Self::from_edges(&["v"], &[("a", "v", "v")])
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    pub fn arrow_index(&self, id: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.id == id)
    }

    /// Tail position of arrow `a`. Panics on an unresolved endpoint, which
    /// validated inputs never have.
    pub fn tail(&self, a: usize) -> usize {
        self.ends[a].expect("unresolved arrow tail").0
    }

    pub fn head(&self, a: usize) -> usize {
        self.ends[a].expect("unresolved arrow head").1
    }

    pub fn is_loop(&self, a: usize) -> bool {
        self.tail(a) == self.head(a)
    }
}

/// Vertex dimensions `n` and arrow twist dimensions `m`, aligned with the
/// quiver's vertex and arrow order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionVector {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
}

impl DimensionVector {
    pub fn new(n: Vec<usize>, m: Vec<usize>) -> Self {
        Self { n, m }
    }

    /// All twist dimensions equal to one.
    pub fn untwisted(q: &Quiver, n: Vec<usize>) -> Self {
        Self {
            n,
            m: vec![1; q.arrow_count()],
        }
    }

    pub fn total(&self) -> usize {
        self.n.iter().sum()
    }
}

pub fn validate_quiver(q: &Quiver, d: &DimensionVector) -> ValidationReport {
    let mut report = ValidationReport::new();
    let mut seen = HashSet::new();
    for v in &q.vertices {
        if !seen.insert(v.as_str()) {
            report.push(
                "duplicate-vertex",
                format!("vertex id {v:?} is declared twice"),
            );
        }
    }
    let mut seen = HashSet::new();
    for a in &q.arrows {
        if !seen.insert(a.id.as_str()) {
            report.push(
                "duplicate-arrow",
                format!("arrow id {:?} is declared twice", a.id),
            );
        }
        for end in [&a.tail, &a.head] {
            if q.vertex_index(end).is_none() {
                report.push(
                    "unknown-vertex",
                    format!("arrow {:?} references unknown vertex {end:?}", a.id),
                );
            }
        }
    }
    if d.n.len() != q.vertex_count() {
        report.push(
            "dims-length",
            format!(
                "dimension vector has {} entries for {} vertices",
                d.n.len(),
                q.vertex_count()
            ),
        );
    }
    if d.m.len() != q.arrow_count() {
        report.push(
            "twist-length",
            format!(
                "twist vector has {} entries for {} arrows",
                d.m.len(),
                q.arrow_count()
            ),
        );
    }
    for (a, &m) in d.m.iter().enumerate() {
        if m == 0 {
            let id = q.arrows.get(a).map(|x| x.id.as_str()).unwrap_or("?");
            report.push(
                "twist-positive",
                format!("twisting dimension must be positive (arrow {id:?})"),
            );
        }
    }
    report
}

/// Complex dimension of the representation space: `Σ_α n_h·n_t·m_α`.
pub fn representation_dimension(q: &Quiver, d: &DimensionVector) -> Result<usize> {
    validate_quiver(q, d).into_result()?;
    Ok((0..q.arrow_count())
        .map(|a| d.n[q.head(a)] * d.n[q.tail(a)] * d.m[a])
        .sum())
}

/// Splits a twisted matrix into its `m` untwisted slices `V_t → V_h`.
pub fn twist_slices(phi: &CMat, m: usize) -> Vec<CMat> {
    let nt = phi.ncols() / m.max(1);
    (0..m)
        .map(|j| {
            let mut s = linalg::zeros(phi.nrows(), nt);
            for b in 0..nt {
                s.set_column(b, &phi.column(b * m + j));
            }
            s
        })
        .collect()
}

/// Inverse of [`twist_slices`].
pub fn from_twist_slices(slices: &[CMat], rows: usize, nt: usize) -> CMat {
    let m = slices.len();
    let mut phi = linalg::zeros(rows, nt * m);
    for (j, s) in slices.iter().enumerate() {
        for b in 0..nt {
            phi.set_column(b * m + j, &s.column(b));
        }
    }
    phi
}

#[derive(Debug, Clone)]
pub struct Representation {
    quiver: Arc<Quiver>,
    dims: DimensionVector,
    phi: Vec<CMat>,
}

impl Representation {
    pub fn new(quiver: Arc<Quiver>, dims: DimensionVector, phi: Vec<CMat>) -> Result<Self> {
        validate_quiver(&quiver, &dims).into_result()?;
        if phi.len() != quiver.arrow_count() {
            return Err(QuiverError::DimensionMismatch(format!(
                "{} matrices for {} arrows",
                phi.len(),
                quiver.arrow_count()
            )));
        }
        for (a, p) in phi.iter().enumerate() {
            let want = (dims.n[quiver.head(a)], dims.n[quiver.tail(a)] * dims.m[a]);
            if p.shape() != want {
                return Err(QuiverError::DimensionMismatch(format!(
                    "arrow {:?} has shape {:?}, expected {:?}",
                    quiver.arrows[a].id,
                    p.shape(),
                    want
                )));
            }
        }
        Ok(Self { quiver, dims, phi })
    }

    pub fn zero(quiver: Arc<Quiver>, dims: DimensionVector) -> Result<Self> {
        validate_quiver(&quiver, &dims).into_result()?;
        let phi = (0..quiver.arrow_count())
            .map(|a| linalg::zeros(dims.n[quiver.head(a)], dims.n[quiver.tail(a)] * dims.m[a]))
            .collect();
        Ok(Self { quiver, dims, phi })
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn quiver_arc(&self) -> &Arc<Quiver> {
        &self.quiver
    }

    pub fn dims(&self) -> &DimensionVector {
        &self.dims
    }

    pub fn phi(&self) -> &[CMat] {
        &self.phi
    }

    pub fn arrow(&self, a: usize) -> &CMat {
        &self.phi[a]
    }

    pub fn twist(&self, a: usize) -> usize {
        self.dims.m[a]
    }

    pub fn slices(&self, a: usize) -> Vec<CMat> {
        twist_slices(&self.phi[a], self.dims.m[a])
    }

    /// Same quiver and dims, new matrices. Shapes are checked.
    pub fn with_phi(&self, phi: Vec<CMat>) -> Result<Self> {
        Self::new(self.quiver.clone(), self.dims.clone(), phi)
    }

    pub(crate) fn with_phi_unchecked(&self, phi: Vec<CMat>) -> Self {
        Self {
            quiver: self.quiver.clone(),
            dims: self.dims.clone(),
            phi,
        }
    }

    /// Largest Frobenius distance over arrows.
    pub fn distance(&self, other: &Representation) -> f64 {
        self.phi
            .iter()
            .zip(&other.phi)
            .map(|(a, b)| {
                if a.shape() == b.shape() {
                    linalg::fro(&(a - b))
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }

    /// `Σ_α ‖φ_α‖²_F`.
    pub fn norm_sq(&self) -> f64 {
        self.phi.iter().map(linalg::fro_sq).sum()
    }

    pub fn scale(&self, s: f64) -> Representation {
        self.with_phi_unchecked(self.phi.iter().map(|p| p * linalg::c(s, 0.0)).collect())
    }

    pub fn same_shape(&self, other: &Representation) -> bool {
        *self.quiver == *other.quiver && self.dims == other.dims
    }
}

/// A tuple of vertex matrices (and optional twist matrices) acting by change
/// of basis.
#[derive(Debug, Clone)]
pub struct GaugeElement {
    pub g: Vec<CMat>,
    pub g_tw: Option<Vec<CMat>>,
}

impl GaugeElement {
    pub fn vertex(g: Vec<CMat>) -> Self {
        Self { g, g_tw: None }
    }

    pub fn identity(d: &DimensionVector) -> Self {
        Self::vertex(d.n.iter().map(|&n| linalg::identity(n)).collect())
    }

    /// Group product `self · other` (apply `other` first).
    pub fn compose(&self, other: &GaugeElement) -> GaugeElement {
        let g = self.g.iter().zip(&other.g).map(|(a, b)| a * b).collect();
        let g_tw = match (&self.g_tw, &other.g_tw) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x * y).collect()),
        };
        GaugeElement { g, g_tw }
    }

    pub fn inverse(&self) -> Result<GaugeElement> {
        let inv = |ms: &[CMat], what: &str| -> Result<Vec<CMat>> {
            ms.iter()
                .enumerate()
                .map(|(k, m)| {
                    linalg::inverse(m)
                        .ok_or_else(|| QuiverError::NotInvertible(format!("{what} {k}")))
                })
                .collect()
        };
        Ok(GaugeElement {
            g: inv(&self.g, "vertex")?,
            g_tw: self.g_tw.as_ref().map(|t| inv(t, "twist")).transpose()?,
        })
    }
}

/// Minimum reciprocal condition number accepted for gauge matrices.
pub const GAUGE_MIN_RCOND: f64 = 1e-13;

/// `φ_α ↦ g_h · φ_α · (g_t ⊗ g_α)^{-1}`.
pub fn gauge_act(g: &GaugeElement, r: &Representation) -> Result<Representation> {
    let q = r.quiver();
    let d = r.dims();
    if g.g.len() != q.vertex_count() {
        return Err(QuiverError::DimensionMismatch(
            "gauge element vertex count".into(),
        ));
    }
    let mut inv = Vec::with_capacity(g.g.len());
    for (i, gi) in g.g.iter().enumerate() {
        if gi.shape() != (d.n[i], d.n[i]) {
            return Err(QuiverError::DimensionMismatch(format!(
                "gauge matrix at vertex {:?}",
                q.vertices()[i]
            )));
        }
        if linalg::rcond(gi) < GAUGE_MIN_RCOND {
            return Err(QuiverError::NotInvertible(q.vertices()[i].clone()));
        }
        inv.push(
            linalg::inverse(gi)
                .ok_or_else(|| QuiverError::NotInvertible(q.vertices()[i].clone()))?,
        );
    }
    let tw_inv: Option<Vec<CMat>> = match &g.g_tw {
        None => None,
        Some(tw) => {
            if tw.len() != q.arrow_count() {
                return Err(QuiverError::DimensionMismatch(
                    "twist gauge arrow count".into(),
                ));
            }
            let mut out = Vec::with_capacity(tw.len());
            for (a, ga) in tw.iter().enumerate() {
                if ga.shape() != (d.m[a], d.m[a]) {
                    return Err(QuiverError::DimensionMismatch(format!(
                        "twist gauge at arrow {:?}",
                        q.arrows()[a].id
                    )));
                }
                if linalg::rcond(ga) < GAUGE_MIN_RCOND {
                    return Err(QuiverError::NotInvertible(q.arrows()[a].id.clone()));
                }
                out.push(
                    linalg::inverse(ga)
                        .ok_or_else(|| QuiverError::NotInvertible(q.arrows()[a].id.clone()))?,
                );
            }
            Some(out)
        }
    };
    let phi = (0..q.arrow_count())
        .map(|a| {
            let (t, h) = (q.tail(a), q.head(a));
            let right = match &tw_inv {
                Some(tw) => linalg::kron(&inv[t], &tw[a]),
                None if d.m[a] == 1 => inv[t].clone(),
                None => linalg::kron(&inv[t], &linalg::identity(d.m[a])),
            };
            &g.g[h] * &r.phi[a] * right
        })
        .collect();
    Ok(r.with_phi_unchecked(phi))
}

/// Per-vertex subspaces carried by orthonormal bases.
#[derive(Debug, Clone)]
pub struct SubspaceTuple {
    pub bases: Vec<CMat>,
}

/// Tolerance for deciding equality of subspaces.
pub const SUBSPACE_EQ_TOL: f64 = 1e-8;
const SPAN_TOL: f64 = 1e-10;

impl SubspaceTuple {
    pub fn zero(d: &DimensionVector) -> Self {
        Self {
            bases: d.n.iter().map(|&n| linalg::zeros(n, 0)).collect(),
        }
    }

    pub fn full(d: &DimensionVector) -> Self {
        Self {
            bases: d.n.iter().map(|&n| linalg::identity(n)).collect(),
        }
    }

    /// Orthonormalizes arbitrary spanning sets.
    pub fn from_spanning(spans: Vec<CMat>) -> Self {
        Self {
            bases: spans.iter().map(|s| linalg::orth(s, SPAN_TOL)).collect(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(|b| b.ncols()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.bases.iter().map(|b| b.ncols()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.bases.iter().all(|b| b.ncols() == b.nrows())
    }

    pub fn projectors(&self) -> Vec<CMat> {
        self.bases.iter().map(linalg::projector).collect()
    }

    pub fn sum(&self, other: &SubspaceTuple) -> SubspaceTuple {
        Self::from_spanning(
            self.bases
                .iter()
                .zip(&other.bases)
                .map(|(a, b)| linalg::hstack(a, b))
                .collect(),
        )
    }

    pub fn intersect(&self, other: &SubspaceTuple) -> SubspaceTuple {
        Self {
            bases: self
                .bases
                .iter()
                .zip(&other.bases)
                .map(|(a, b)| linalg::intersect(a, b, SPAN_TOL))
                .collect(),
        }
    }

    /// Largest principal-angle sine over vertices (1 if dimensions differ).
    pub fn distance(&self, other: &SubspaceTuple) -> f64 {
        self.bases
            .iter()
            .zip(&other.bases)
            .map(|(a, b)| linalg::subspace_distance(a, b))
            .fold(0.0, f64::max)
    }

    pub fn same_as(&self, other: &SubspaceTuple) -> bool {
        self.dims() == other.dims() && self.distance(other) < SUBSPACE_EQ_TOL
    }

    /// `Σ_i τ_i · dim U_i`.
    pub fn theta(&self, tau: &[f64]) -> f64 {
        self.bases
            .iter()
            .zip(tau)
            .map(|(b, t)| t * b.ncols() as f64)
            .sum()
    }

    pub fn contains(&self, vertex: usize, v: &CVec) -> bool {
        let b = &self.bases[vertex];
        let nv = v.norm();
        if nv == 0.0 {
            return true;
        }
        let resid = v - b * (b.adjoint() * v);
        resid.norm() <= 1e-9 * nv
    }
}

#[derive(Debug, Clone)]
pub struct SubrepCandidate {
    pub subspace: SubspaceTuple,
    pub invariance_residual: f64,
}

/// `max_α ‖(I − P_h) φ_α (P_t ⊗ I_m)‖_F`.
pub fn invariance_residual(r: &Representation, u: &SubspaceTuple) -> f64 {
    let q = r.quiver();
    let p = u.projectors();
    (0..q.arrow_count())
        .map(|a| {
            let (t, h) = (q.tail(a), q.head(a));
            let n_h = r.dims.n[h];
            let right = if r.dims.m[a] == 1 {
                p[t].clone()
            } else {
                linalg::kron(&p[t], &linalg::identity(r.dims.m[a]))
            };
            linalg::fro(&((linalg::identity(n_h) - &p[h]) * &r.phi[a] * right))
        })
        .fold(0.0, f64::max)
}

impl SubrepCandidate {
    pub fn new(r: &Representation, subspace: SubspaceTuple) -> Self {
        let invariance_residual = invariance_residual(r, &subspace);
        Self {
            subspace,
            invariance_residual,
        }
    }
}

/// Relative size below which a new vector is considered inside the current span.
const GROWTH_TOL: f64 = 1e-11;

/// Smallest subspace tuple containing the seeds and closed under every map
/// `v ↦ φ_α(v ⊗ e_j)`.
pub fn generated_subrep(r: &Representation, seeds: &[(usize, CVec)]) -> SubrepCandidate {
    let q = r.quiver();
    let mut basis: Vec<Vec<CVec>> = vec![Vec::new(); q.vertex_count()];
    let mut queue: Vec<(usize, CVec)> = Vec::new();

    fn absorb(basis: &mut [Vec<CVec>], queue: &mut Vec<(usize, CVec)>, i: usize, v: CVec) {
        let nv = v.norm();
        if nv == 0.0 || !nv.is_finite() {
            return;
        }
        let mut w = v.clone();
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for b in basis[i].iter() {
                let coef = b.dotc(&w);
                w -= b * coef;
            }
        }
        let nw = w.norm();
        if nw > GROWTH_TOL * nv && basis[i].len() < v.len() {
            let u = w / linalg::c(nw, 0.0);
            basis[i].push(u.clone());
            queue.push((i, u));
        }
    }

    for (i, v) in seeds {
        assert_eq!(
            v.len(),
            r.dims.n[*i],
            "seed length does not match vertex dimension"
        );
        absorb(&mut basis, &mut queue, *i, v.clone());
    }
    let slices: Vec<Vec<CMat>> = (0..q.arrow_count()).map(|a| r.slices(a)).collect();
    while let Some((i, u)) = queue.pop() {
        for a in 0..q.arrow_count() {
            if q.tail(a) != i {
                continue;
            }
            let h = q.head(a);
            for s in &slices[a] {
                absorb(&mut basis, &mut queue, h, s * &u);
            }
        }
    }
    let bases = basis
        .iter()
        .enumerate()
        .map(|(i, vs)| {
            let mut m = linalg::zeros(r.dims.n[i], vs.len());
            for (k, v) in vs.iter().enumerate() {
                m.set_column(k, v);
            }
            m
        })
        .collect();
    SubrepCandidate::new(r, SubspaceTuple { bases })
}

/// Block-diagonal direct sum; dimensions add per vertex.
pub fn direct_sum(r1: &Representation, r2: &Representation) -> Result<Representation> {
    if *r1.quiver != *r2.quiver || r1.dims.m != r2.dims.m {
        return Err(QuiverError::DimensionMismatch(
            "direct sum needs the same quiver and twisting dims".into(),
        ));
    }
    let q = r1.quiver();
    let n: Vec<usize> = r1
        .dims
        .n
        .iter()
        .zip(&r2.dims.n)
        .map(|(a, b)| a + b)
        .collect();
    let dims = DimensionVector::new(n, r1.dims.m.clone());
    let phi = (0..q.arrow_count())
        .map(|a| {
            let s1 = r1.slices(a);
            let s2 = r2.slices(a);
            let slices: Vec<CMat> = s1
                .iter()
                .zip(&s2)
                .map(|(x, y)| linalg::block_diag(x, y))
                .collect();
            from_twist_slices(&slices, dims.n[q.head(a)], dims.n[q.tail(a)])
        })
        .collect();
    Ok(Representation {
        quiver: r1.quiver.clone(),
        dims,
        phi,
    })
}

/// Deterministic standard complex Gaussian representation.
pub fn random_representation(
    q: Arc<Quiver>,
    d: DimensionVector,
    seed: u64,
) -> Result<Representation> {
    validate_quiver(&q, &d).into_result()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = (0..q.arrow_count())
        .map(|a| linalg::random_gaussian(&mut rng, d.n[q.head(a)], d.n[q.tail(a)] * d.m[a]))
        .collect();
    Ok(Representation {
        quiver: q,
        dims: d,
        phi,
    })
}
