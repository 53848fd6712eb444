//! Symmetric and supermixed structures on a quiver: the involution σ, the
//! block quadratic form C, the σ-transpose on representation space and
//! isotropy of subspaces.
//!
//! Every vertex `a` carries a sign `s_a = form_sign · eps_v[a]` describing the
//! symmetry of the form across the pair `{a, σa}`: `C_{σa,a} = s_a·C_{a,σa}ᵀ`.
//! The C-transpose of a slice `φ_j: V_t → V_h` is
//! `φ_jᵗ = C_{t,σt}^{-1} · φ_jᵀ · C_{h,σh}`, and on arrows whose endpoint
//! signs differ it is additionally multiplied by `s_t`, so that the
//! transpose is always an involution.

use rand::Rng;

use crate::linalg::{self, CMat};
use crate::quiver::{
    from_twist_slices, twist_slices, DimensionVector, GaugeElement, Quiver, Representation,
    SubspaceTuple,
};
use crate::validation::ValidationReport;
use crate::{QuiverError, Result};

/// A sign, always `+1` or `-1`.
pub type Sign = i8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricStructure {
    pub sigma_v: Vec<usize>,
    pub sigma_a: Vec<usize>,
    pub form_sign: Sign,
    pub eps_v: Vec<Sign>,
    pub eps_a: Vec<Sign>,
}

impl SymmetricStructure {
    /// Plain symmetric structure: all `eps` equal to `+1`.
    pub fn new(sigma_v: Vec<usize>, sigma_a: Vec<usize>, form_sign: Sign) -> Self {
        let eps_v = vec![1; sigma_v.len()];
        let eps_a = vec![1; sigma_a.len()];
        Self {
            sigma_v,
            sigma_a,
            form_sign,
            eps_v,
            eps_a,
        }
    }

    /// Builds σ from lists of exchanged id pairs; unlisted ids are fixed.
    pub fn from_pairs(
        q: &Quiver,
        vertex_pairs: &[(&str, &str)],
        arrow_pairs: &[(&str, &str)],
        form_sign: Sign,
    ) -> Result<Self> {
        let mut sv: Vec<usize> = (0..q.vertex_count()).collect();
        let mut sa: Vec<usize> = (0..q.arrow_count()).collect();
        for (x, y) in vertex_pairs {
            let (i, j) = (lookup(q.vertex_index(x), x)?, lookup(q.vertex_index(y), y)?);
            sv[i] = j;
            sv[j] = i;
        }
        for (x, y) in arrow_pairs {
            let (a, b) = (lookup(q.arrow_index(x), x)?, lookup(q.arrow_index(y), y)?);
            sa[a] = b;
            sa[b] = a;
        }
        Ok(Self::new(sv, sa, form_sign))
    }

    pub fn with_eps(mut self, eps_v: Vec<Sign>, eps_a: Vec<Sign>) -> Self {
        self.eps_v = eps_v;
        self.eps_a = eps_a;
        self
    }

    /// `s_a = form_sign · eps_v[a]`.
    pub fn vertex_sign(&self, a: usize) -> Sign {
        self.form_sign * self.eps_v[a]
    }

    /// Correction factor making the C-transpose of arrow `a` an involution.
    pub fn transpose_factor(&self, q: &Quiver, a: usize) -> Sign {
        let (st, sh) = (self.vertex_sign(q.tail(a)), self.vertex_sign(q.head(a)));
        if st == sh {
            1
        } else {
            st
        }
    }

    pub fn is_fixed_vertex(&self, i: usize) -> bool {
        self.sigma_v[i] == i
    }

    /// Canonical representative of each vertex orbit: `i ≤ σ(i)`.
    pub fn canonical_vertices(&self) -> Vec<usize> {
        (0..self.sigma_v.len())
            .filter(|&i| i <= self.sigma_v[i])
            .collect()
    }
}

fn lookup(idx: Option<usize>, id: &str) -> Result<usize> {
    idx.ok_or_else(|| QuiverError::DimensionMismatch(format!("unknown id {id:?}")))
}

fn is_sign(s: Sign) -> bool {
    s == 1 || s == -1
}

pub fn validate_symmetric(
    q: &Quiver,
    d: &DimensionVector,
    s: &SymmetricStructure,
) -> ValidationReport {
    let mut rep = crate::quiver::validate_quiver(q, d);
    if !rep.is_valid() {
        return rep;
    }
    let (nv, na) = (q.vertex_count(), q.arrow_count());
    if s.sigma_v.len() != nv || s.eps_v.len() != nv {
        rep.push(
            "sigma-length",
            "vertex involution or vertex signs do not cover every vertex",
        );
        return rep;
    }
    if s.sigma_a.len() != na || s.eps_a.len() != na {
        rep.push(
            "sigma-length",
            "arrow involution or arrow signs do not cover every arrow",
        );
        return rep;
    }
    if !is_sign(s.form_sign) {
        rep.push("form-sign", "form sign must be +1 or -1");
    }
    let vid = |i: usize| q.vertices()[i].as_str();
    let aid = |a: usize| q.arrows()[a].id.as_str();
    let mut involutive = true;
    for i in 0..nv {
        let j = s.sigma_v[i];
        if j >= nv || s.sigma_v[j] != i {
            rep.push(
                "vertex-involution",
                format!("σ on vertices is not an involution at {:?}", vid(i)),
            );
            involutive = false;
            continue;
        }
        if !is_sign(s.eps_v[i]) {
            rep.push("eps-sign", format!("vertex sign at {:?} is not ±1", vid(i)));
        } else if s.eps_v[i] * s.eps_v[j] != 1 {
            rep.push(
                "eps-vertex",
                format!("eps_v[{:?}]·eps_v[{:?}] must be 1", vid(i), vid(j)),
            );
        }
        if d.n[i] != d.n[j] {
            rep.push(
                "dims-sigma",
                format!(
                    "dimension not σ-compatible: n[{:?}]={} but n[{:?}]={}",
                    vid(i),
                    d.n[i],
                    vid(j),
                    d.n[j]
                ),
            );
        }
    }
    for a in 0..na {
        let b = s.sigma_a[a];
        if b >= na || s.sigma_a[b] != a {
            rep.push(
                "arrow-involution",
                format!("σ on arrows is not an involution at {:?}", aid(a)),
            );
            involutive = false;
            continue;
        }
        if !is_sign(s.eps_a[a]) {
            rep.push("eps-sign", format!("arrow sign at {:?} is not ±1", aid(a)));
        } else if s.eps_a[a] * s.eps_a[b] != 1 {
            rep.push(
                "eps-arrow",
                format!("eps_a[{:?}]·eps_a[{:?}] must be 1", aid(a), aid(b)),
            );
        }
        if d.m[a] != d.m[b] {
            rep.push(
                "twist-sigma",
                format!("twisting dimension not σ-compatible at {:?}", aid(a)),
            );
        }
    }
    if !involutive {
        return rep;
    }
    for a in 0..na {
        let b = s.sigma_a[a];
        let (t, h) = (q.tail(a), q.head(a));
        if s.sigma_v[t] != q.head(b) || s.sigma_v[h] != q.tail(b) {
            rep.push(
                "arrow-endpoints",
                format!(
                    "σ(t(α)) = h(σ(α)) and σ(h(α)) = t(σ(α)) fail for arrow {:?}",
                    aid(a)
                ),
            );
        }
        if t == s.sigma_v[h] && b != a {
            rep.push(
                "self-dual-arrow",
                format!(
                    "arrow {:?} satisfies t(α) = σ(h(α)) but is not fixed by σ",
                    aid(a)
                ),
            );
        }
    }
    rep
}

/// Quadratic form on `⊕ V_i` stored per vertex: `blocks[i] = C_{i,σ(i)}`.
#[derive(Debug, Clone)]
pub struct BlockForm {
    pub blocks: Vec<CMat>,
    pub form_sign: Sign,
}

impl BlockForm {
    /// Builds a form from blocks given on canonical vertices (`i ≤ σ(i)`);
    /// the partner blocks are filled by the symmetry rule.
    pub fn from_canonical(s: &SymmetricStructure, canonical: Vec<(usize, CMat)>) -> Result<Self> {
        let nv = s.sigma_v.len();
        let mut blocks: Vec<Option<CMat>> = vec![None; nv];
        for (i, b) in canonical {
            let j = s.sigma_v[i];
            let sign = linalg::c(s.vertex_sign(i) as f64, 0.0);
            if i != j {
                blocks[j] = Some(b.transpose() * sign);
            }
            blocks[i] = Some(b);
        }
        let blocks = blocks
            .into_iter()
            .enumerate()
            .map(|(i, b)| {
                b.ok_or_else(|| QuiverError::DegenerateForm(format!("missing block at vertex {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            blocks,
            form_sign: s.form_sign,
        })
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.blocks[i]
    }

    /// The form on `⊕ V_i` as one matrix in vertex order.
    pub fn assemble(&self, s: &SymmetricStructure, d: &DimensionVector) -> CMat {
        let offsets: Vec<usize> =
            d.n.iter()
                .scan(0, |acc, &n| Some(std::mem::replace(acc, *acc + n)))
                .collect();
        let total = d.total();
        let mut c = linalg::zeros(total, total);
        for i in 0..d.n.len() {
            let j = s.sigma_v[i];
            c.view_mut((offsets[i], offsets[j]), (d.n[i], d.n[j]))
                .copy_from(&self.blocks[i]);
        }
        c
    }
}

pub fn validate_form(
    d: &DimensionVector,
    s: &SymmetricStructure,
    c: &BlockForm,
) -> ValidationReport {
    let mut rep = ValidationReport::new();
    if c.blocks.len() != d.n.len() {
        rep.push("form-length", "form does not have one block per vertex");
        return rep;
    }
    for i in 0..d.n.len() {
        let j = s.sigma_v[i];
        let b = &c.blocks[i];
        if b.shape() != (d.n[i], d.n[j]) {
            rep.push(
                "form-shape",
                format!("block at vertex {i} has shape {:?}", b.shape()),
            );
            continue;
        }
        if d.n[i] > 0 && linalg::rcond(b) < 1e-12 {
            rep.push(
                "form-degenerate",
                format!("block at vertex {i} is degenerate"),
            );
        }
        let sign = linalg::c(s.vertex_sign(i) as f64, 0.0);
        if c.blocks[j].shape() == (d.n[j], d.n[i]) {
            let r = linalg::fro(&(&c.blocks[j] - b.transpose() * sign));
            if r > 1e-10 * (1.0 + linalg::fro(b)) {
                rep.push(
                    "form-symmetry",
                    format!("blocks at vertices {i} and {j} break the form symmetry"),
                );
            }
        }
    }
    rep
}

/// Identity pairing on exchanged pairs, `I` or the standard `J` on fixed
/// vertices according to the vertex sign.
pub fn standard_form(q: &Quiver, d: &DimensionVector, s: &SymmetricStructure) -> Result<BlockForm> {
    validate_symmetric(q, d, s).into_result()?;
    let mut canonical = Vec::new();
    for i in s.canonical_vertices() {
        let n = d.n[i];
        let block = if !s.is_fixed_vertex(i) || s.vertex_sign(i) == 1 {
            linalg::identity(n)
        } else {
            if n % 2 == 1 {
                return Err(QuiverError::OddSymplecticDimension {
                    vertex: q.vertices()[i].clone(),
                    dim: n,
                });
            }
            linalg::symplectic_j(n)
        };
        canonical.push((i, block));
    }
    BlockForm::from_canonical(s, canonical)
}

fn check_compatible(r: &Representation, s: &SymmetricStructure, c: &BlockForm) -> Result<()> {
    let rep = validate_symmetric(r.quiver(), r.dims(), s);
    rep.into_result()?;
    validate_form(r.dims(), s, c).into_result()
}

/// C-transpose of a twisted map along arrow `a`, before the involution sign
/// correction. Result maps `V_{σh} ⊗ M → V_{σt}`.
fn raw_c_transpose(q: &Quiver, c: &BlockForm, a: usize, phi: &CMat, m: usize) -> CMat {
    let (t, h) = (q.tail(a), q.head(a));
    let ct_inv = linalg::inverse(&c.blocks[t]).expect("form block is invertible");
    let slices: Vec<CMat> = twist_slices(phi, m)
        .iter()
        .map(|p| &ct_inv * p.transpose() * &c.blocks[h])
        .collect();
    let rows = c.blocks[t].nrows();
    let cols = c.blocks[h].ncols();
    from_twist_slices(&slices, rows, cols)
}

/// C-transpose including the involution sign correction.
pub fn c_transpose(
    q: &Quiver,
    s: &SymmetricStructure,
    c: &BlockForm,
    a: usize,
    phi: &CMat,
    m: usize,
) -> CMat {
    let t = raw_c_transpose(q, c, a, phi, m);
    if s.transpose_factor(q, a) == 1 {
        t
    } else {
        -t
    }
}

/// `T(r)_α = −ε_α · (φ_{σα})ᵗ`. An involution on representation space.
pub fn sigma_transpose(
    r: &Representation,
    s: &SymmetricStructure,
    c: &BlockForm,
) -> Result<Representation> {
    check_compatible(r, s, c)?;
    Ok(sigma_transpose_unchecked(r, s, c))
}

pub(crate) fn sigma_transpose_unchecked(
    r: &Representation,
    s: &SymmetricStructure,
    c: &BlockForm,
) -> Representation {
    let q = r.quiver();
    let phi = (0..q.arrow_count())
        .map(|a| {
            let b = s.sigma_a[a];
            let t = c_transpose(q, s, c, b, r.arrow(b), r.twist(b));
            t * linalg::c(-(s.eps_a[a] as f64), 0.0)
        })
        .collect();
    r.with_phi_unchecked(phi)
}

/// Residual `max_α ‖φ_{σα} + ε_α φ_αᵗ‖_F`; structured iff it is within `tol`.
pub fn is_structured_rep(
    r: &Representation,
    s: &SymmetricStructure,
    c: &BlockForm,
    tol: f64,
) -> Result<(bool, f64)> {
    check_compatible(r, s, c)?;
    let res = structured_residual(r, s, c);
    Ok((res <= tol, res))
}

pub(crate) fn structured_residual(
    r: &Representation,
    s: &SymmetricStructure,
    c: &BlockForm,
) -> f64 {
    let q = r.quiver();
    (0..q.arrow_count())
        .map(|a| {
            let b = s.sigma_a[a];
            let t =
                c_transpose(q, s, c, a, r.arrow(a), r.twist(a)) * linalg::c(s.eps_a[a] as f64, 0.0);
            linalg::fro(&(r.arrow(b) + t))
        })
        .fold(0.0, f64::max)
}

/// `½(r + T(r))`, the projection onto structured representations.
pub fn project_structured(
    r: &Representation,
    s: &SymmetricStructure,
    c: &BlockForm,
) -> Result<Representation> {
    let t = sigma_transpose(r, s, c)?;
    let half = linalg::c(0.5, 0.0);
    Ok(r.with_phi_unchecked(
        r.phi()
            .iter()
            .zip(t.phi())
            .map(|(a, b)| (a + b) * half)
            .collect(),
    ))
}

/// C-orthogonal complement: at vertex `i`, the vectors pairing to zero with
/// `U_{σ(i)}`.
pub fn orthogonal_complement(
    u: &SubspaceTuple,
    s: &SymmetricStructure,
    c: &BlockForm,
) -> SubspaceTuple {
    let bases = (0..u.bases.len())
        .map(|i| {
            let j = s.sigma_v[i];
            // C(u, w) = uᵀ C_{σi,i} w for u ∈ V_{σi}, w ∈ V_i
            let constraint = u.bases[j].transpose() * &c.blocks[j];
            linalg::null_space(&constraint, 1e-10)
        })
        .collect();
    SubspaceTuple { bases }
}

/// Largest entry magnitude of `C` restricted to `U × U`.
pub fn isotropy_residual(u: &SubspaceTuple, s: &SymmetricStructure, c: &BlockForm) -> f64 {
    (0..u.bases.len())
        .map(|i| {
            let j = s.sigma_v[i];
            let m = u.bases[i].transpose() * &c.blocks[i] * &u.bases[j];
            m.iter().map(|z| z.norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

pub fn is_isotropic(u: &SubspaceTuple, s: &SymmetricStructure, c: &BlockForm, tol: f64) -> bool {
    isotropy_residual(u, s, c) <= tol
}

/// `max_i ‖g_iᵀ C_{i,σi} g_{σi} − C_{i,σi}‖_F`; zero on the structured group.
pub fn structured_group_residual(g: &GaugeElement, s: &SymmetricStructure, c: &BlockForm) -> f64 {
    (0..g.g.len())
        .map(|i| {
            let j = s.sigma_v[i];
            linalg::fro(&(g.g[i].transpose() * &c.blocks[i] * &g.g[j] - &c.blocks[i]))
        })
        .fold(0.0, f64::max)
}

/// `max_i ‖ξ_iᵀ C_{i,σi} + C_{i,σi} ξ_{σi}‖_F`; zero on the structured Lie algebra.
pub fn structured_algebra_residual(xi: &[CMat], s: &SymmetricStructure, c: &BlockForm) -> f64 {
    (0..xi.len())
        .map(|i| {
            let j = s.sigma_v[i];
            linalg::fro(&(xi[i].transpose() * &c.blocks[i] + &c.blocks[i] * &xi[j]))
        })
        .fold(0.0, f64::max)
}

/// Random element of the structured gauge group. Exchanged pairs get a random
/// invertible `g_i` and its C-dual partner; fixed vertices get a Cayley
/// transform of a random Lie algebra element.
pub fn random_structured_gauge<R: Rng + ?Sized>(
    rng: &mut R,
    d: &DimensionVector,
    s: &SymmetricStructure,
    c: &BlockForm,
) -> GaugeElement {
    let nv = d.n.len();
    let mut g: Vec<CMat> = vec![linalg::zeros(0, 0); nv];
    for i in s.canonical_vertices() {
        let n = d.n[i];
        let j = s.sigma_v[i];
        let ci = &c.blocks[i];
        if i != j {
            let gi = linalg::random_invertible(rng, n);
            let gi_inv_t = linalg::inverse(&gi).expect("invertible sample").transpose();
            let ci_inv = linalg::inverse(ci).expect("form block is invertible");
            g[j] = ci_inv * gi_inv_t * ci;
            g[i] = gi;
        } else {
            let sign = linalg::c(s.vertex_sign(i) as f64, 0.0);
            let k0 = linalg::random_gaussian(rng, n, n) * linalg::c(0.3, 0.0);
            // Kᵀ = −s·K
            let k = (&k0 - k0.transpose() * sign) * linalg::c(0.5, 0.0);
            let x = linalg::inverse(ci).expect("form block is invertible") * k;
            let id = linalg::identity(n);
            let left = linalg::inverse(&(&id - &x)).expect("Cayley transform is defined");
            g[i] = left * (&id + &x);
        }
    }
    GaugeElement::vertex(g)
}
