//! Generalized orthogonal and symplectic quivers and their associated
//! symmetric quivers.
//!
//! A spec lists paired characters `χ_i` (with multiplicity space `V_i`),
//! self-inverse characters `μ_j` (with `W_j`) and the irreducible summands of
//! the representation space. The built quiver has vertices `q_i`, `q_i*`
//! (interleaved) followed by `p_j`; every summand becomes one σ-fixed arrow or
//! a pair of exchanged arrows `g_k`, `g_k*`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, CMat};
use crate::quiver::{
    from_twist_slices, twist_slices, Arrow, DimensionVector, GaugeElement, Quiver, Representation,
};
use crate::symmetric::{
    c_transpose, standard_form, structured_group_residual, structured_residual, BlockForm, Sign,
    SymmetricStructure,
};
use crate::validation::ValidationReport;
use crate::{QuiverError, Result};

/// Irreducible summand types. Indices are zero-based positions in the
/// paired (`i`) or self-inverse (`j`) character lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SummandKind {
    /// Λ²(V_i): arrow `q_i* → q_i`, fixed by σ.
    AltV(usize),
    /// Λ²(V_i*): arrow `q_i → q_i*`, fixed by σ.
    AltVdual(usize),
    /// End(V_i): loops at `q_i` and `q_i*`.
    EndE(usize),
    /// Λ²(W_j): loop at `p_j`, fixed by σ.
    AltW(usize),
    /// V_j ⊗ V_i*: `q_i → q_j` and `q_j* → q_i*`.
    VV(usize, usize),
    /// V_j ⊗ V_i: `q_i* → q_j` and `q_j* → q_i`.
    VdualV(usize, usize),
    /// V_j* ⊗ V_i*: `q_i → q_j*` and `q_j → q_i*`.
    VVdual(usize, usize),
    /// W_j ⊗ W_{j'}: `p_j → p_{j'}` and `p_{j'} → p_j`.
    WW(usize, usize),
    /// W_j ⊗ V_i*: `q_i → p_j` and `p_j → q_i*`.
    VW(usize, usize),
    /// W_j ⊗ V_i: `q_i* → p_j` and `p_j → q_i`.
    VdualW(usize, usize),
}

impl SummandKind {
    pub fn name(&self) -> &'static str {
        match self {
            SummandKind::AltV(_) => "ALT_V",
            SummandKind::AltVdual(_) => "ALT_Vdual",
            SummandKind::EndE(_) => "END_E",
            SummandKind::AltW(_) => "ALT_W",
            SummandKind::VV(..) => "V_V",
            SummandKind::VdualV(..) => "Vdual_V",
            SummandKind::VVdual(..) => "V_Vdual",
            SummandKind::WW(..) => "W_W",
            SummandKind::VW(..) => "V_W",
            SummandKind::VdualW(..) => "Vdual_W",
        }
    }

    /// Whether the summand is drawn as a single σ-fixed arrow.
    pub fn is_fixed(&self) -> bool {
        matches!(
            self,
            SummandKind::AltV(_) | SummandKind::AltVdual(_) | SummandKind::AltW(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summand {
    pub kind: SummandKind,
    pub twist: usize,
}

impl Summand {
    pub fn new(kind: SummandKind) -> Self {
        Self { kind, twist: 1 }
    }

    pub fn twisted(kind: SummandKind, twist: usize) -> Self {
        Self { kind, twist }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedQuiverSpec {
    /// `+1` for O(V), `-1` for Sp(V).
    pub group_sign: Sign,
    pub paired_chars: Vec<(String, usize)>,
    pub selfinv_chars: Vec<(String, usize)>,
    pub summands: Vec<Summand>,
}

/// Vertex position of `q_i`.
pub fn q_vertex(i: usize) -> usize {
    2 * i
}

/// Vertex position of `q_i*`.
pub fn q_dual_vertex(i: usize) -> usize {
    2 * i + 1
}

impl GeneralizedQuiverSpec {
    pub fn p_vertex(&self, j: usize) -> usize {
        2 * self.paired_chars.len() + j
    }

    fn n(&self, i: usize) -> usize {
        self.paired_chars[i].1
    }

    fn w(&self, j: usize) -> usize {
        self.selfinv_chars[j].1
    }

    /// `(tail, head)` of the main arrow `g_k` and, for paired kinds, of `g_k*`.
    fn arrow_ends(&self, kind: SummandKind) -> ((usize, usize), Option<(usize, usize)>) {
        use SummandKind::*;
        let (q, qd) = (q_vertex, q_dual_vertex);
        match kind {
            AltV(i) => ((qd(i), q(i)), None),
            AltVdual(i) => ((q(i), qd(i)), None),
            EndE(i) => ((q(i), q(i)), Some((qd(i), qd(i)))),
            AltW(j) => ((self.p_vertex(j), self.p_vertex(j)), None),
            VV(i, j) => ((q(i), q(j)), Some((qd(j), qd(i)))),
            VdualV(i, j) => ((qd(i), q(j)), Some((qd(j), q(i)))),
            VVdual(i, j) => ((q(i), qd(j)), Some((q(j), qd(i)))),
            WW(j, k) => (
                (self.p_vertex(j), self.p_vertex(k)),
                Some((self.p_vertex(k), self.p_vertex(j))),
            ),
            VW(i, j) => ((q(i), self.p_vertex(j)), Some((self.p_vertex(j), qd(i)))),
            VdualW(i, j) => ((qd(i), self.p_vertex(j)), Some((self.p_vertex(j), q(i)))),
        }
    }

    fn vertex_dim(&self, v: usize) -> usize {
        let r = self.paired_chars.len();
        if v < 2 * r {
            self.n(v / 2)
        } else {
            self.w(v - 2 * r)
        }
    }

    /// Shape `(rows, cols)` of the coordinate matrix of summand `k`.
    pub fn coord_shape(&self, k: usize) -> (usize, usize) {
        let s = &self.summands[k];
        let ((t, h), _) = self.arrow_ends(s.kind);
        (self.vertex_dim(h), self.vertex_dim(t) * s.twist)
    }

    /// Complex dimension of summand `k`, accounting for the kind constraint.
    pub fn summand_dimension(&self, k: usize) -> usize {
        let s = &self.summands[k];
        let per_slice = match s.kind {
            SummandKind::AltV(i) | SummandKind::AltVdual(i) => {
                let n = self.n(i);
                if self.group_sign == 1 {
                    n * n.saturating_sub(1) / 2
                } else {
                    n * (n + 1) / 2
                }
            }
            SummandKind::AltW(j) => {
                let w = self.w(j);
                if self.group_sign == 1 {
                    w * w.saturating_sub(1) / 2
                } else {
                    w * (w + 1) / 2
                }
            }
            _ => {
                let (r, c) = self.coord_shape(k);
                return r * c;
            }
        };
        per_slice * s.twist
    }
}

pub fn validate_generalized(gq: &GeneralizedQuiverSpec) -> ValidationReport {
    use SummandKind::*;
    let mut rep = ValidationReport::new();
    if gq.group_sign != 1 && gq.group_sign != -1 {
        rep.push(
            "group-sign",
            "group sign must be +1 (orthogonal) or -1 (symplectic)",
        );
    }
    for (label, n) in &gq.paired_chars {
        if *n == 0 {
            rep.push("char-dim", format!("character {label:?} has dimension 0"));
        }
    }
    for (label, w) in &gq.selfinv_chars {
        if *w == 0 {
            rep.push("char-dim", format!("character {label:?} has dimension 0"));
        } else if gq.group_sign == -1 && w % 2 == 1 {
            rep.push(
                "symplectic-odd",
                format!("self-inverse block {label:?} has odd dimension {w} under Sp"),
            );
        }
    }
    let mut labels = std::collections::HashSet::new();
    for (label, _) in gq.paired_chars.iter().chain(&gq.selfinv_chars) {
        if !labels.insert(label.as_str()) {
            rep.push(
                "char-label",
                format!("character label {label:?} is declared twice"),
            );
        }
    }
    let (r, l) = (gq.paired_chars.len(), gq.selfinv_chars.len());
    for (k, s) in gq.summands.iter().enumerate() {
        if s.twist == 0 {
            rep.push(
                "twist-positive",
                format!("summand {k}: twisting dimension must be positive"),
            );
        }
        let (pi, pj): (Vec<usize>, Vec<usize>) = match s.kind {
            AltV(i) | AltVdual(i) | EndE(i) => (vec![i], vec![]),
            AltW(j) => (vec![], vec![j]),
            VV(i, j) | VdualV(i, j) | VVdual(i, j) => {
                if i == j {
                    rep.push(
                        "distinct-indices",
                        format!(
                            "summand {k} ({}) breaks the index constraint: indices must differ",
                            s.kind.name()
                        ),
                    );
                }
                (vec![i, j], vec![])
            }
            WW(j, jj) => {
                if j == jj {
                    rep.push(
                        "distinct-indices",
                        format!(
                            "summand {k} ({}) breaks the index constraint: indices must differ",
                            s.kind.name()
                        ),
                    );
                }
                (vec![], vec![j, jj])
            }
            VW(i, j) | VdualW(i, j) => (vec![i], vec![j]),
        };
        if pi.iter().any(|&i| i >= r) || pj.iter().any(|&j| j >= l) {
            rep.push(
                "unknown-character",
                format!(
                    "summand {k} ({}) references an undeclared character",
                    s.kind.name()
                ),
            );
            continue;
        }
        if s.twist > 0 && gq.summand_dimension(k) == 0 {
            rep.push(
                "trivial-summand",
                format!("summand {k} ({}) is the zero space", s.kind.name()),
            );
        }
    }
    rep
}

/// The symmetric quiver built from a generalized spec, with its form.
#[derive(Debug, Clone)]
pub struct BuiltQuiver {
    pub quiver: Arc<Quiver>,
    pub dims: DimensionVector,
    pub structure: SymmetricStructure,
    pub form: BlockForm,
    /// `(g_k, Some(g_k*))` arrow positions per summand.
    pub arrows_of: Vec<(usize, Option<usize>)>,
}

pub fn build_symmetric_quiver(gq: &GeneralizedQuiverSpec) -> Result<BuiltQuiver> {
    validate_generalized(gq).into_result()?;
    let mut vertices = Vec::new();
    let mut n = Vec::new();
    for (i, (_, dim)) in gq.paired_chars.iter().enumerate() {
        vertices.push(format!("q{}", i + 1));
        vertices.push(format!("q{}*", i + 1));
        n.extend([*dim, *dim]);
    }
    for (j, (_, dim)) in gq.selfinv_chars.iter().enumerate() {
        vertices.push(format!("p{}", j + 1));
        n.push(*dim);
    }
    let mut arrows = Vec::new();
    let mut m = Vec::new();
    let mut sigma_a = Vec::new();
    let mut arrows_of = Vec::new();
    for (k, s) in gq.summands.iter().enumerate() {
        let ((t, h), dual) = gq.arrow_ends(s.kind);
        let a = arrows.len();
        arrows.push(Arrow::new(
            &format!("g{}", k + 1),
            &vertices[t],
            &vertices[h],
        ));
        m.push(s.twist);
        match dual {
            None => {
                sigma_a.push(a);
                arrows_of.push((a, None));
            }
            Some((t2, h2)) => {
                arrows.push(Arrow::new(
                    &format!("g{}*", k + 1),
                    &vertices[t2],
                    &vertices[h2],
                ));
                m.push(s.twist);
                sigma_a.extend([a + 1, a]);
                arrows_of.push((a, Some(a + 1)));
            }
        }
    }
    let r = gq.paired_chars.len();
    let sigma_v: Vec<usize> = (0..vertices.len())
        .map(|v| if v < 2 * r { v ^ 1 } else { v })
        .collect();
    let quiver = Arc::new(Quiver::new(vertices, arrows));
    let dims = DimensionVector::new(n, m);
    let structure = SymmetricStructure::new(sigma_v, sigma_a, gq.group_sign);
    let form = standard_form(&quiver, &dims, &structure)?;
    Ok(BuiltQuiver {
        quiver,
        dims,
        structure,
        form,
        arrows_of,
    })
}

/// Relative tolerance for the kind constraint on coordinates.
pub const KIND_TOL: f64 = 1e-10;

/// Places coordinates on the built quiver: `φ_{g_k} = A_k`, and
/// `φ_{g_k*} = −A_kᵗ` for paired kinds.
pub fn embed_representation(gq: &GeneralizedQuiverSpec, coords: &[CMat]) -> Result<Representation> {
    let b = build_symmetric_quiver(gq)?;
    embed_into(gq, &b, coords)
}

pub fn embed_into(
    gq: &GeneralizedQuiverSpec,
    b: &BuiltQuiver,
    coords: &[CMat],
) -> Result<Representation> {
    if coords.len() != gq.summands.len() {
        return Err(QuiverError::DimensionMismatch(format!(
            "{} coordinate matrices for {} summands",
            coords.len(),
            gq.summands.len()
        )));
    }
    let mut phi: Vec<CMat> = vec![linalg::zeros(0, 0); b.quiver.arrow_count()];
    for (k, a) in coords.iter().enumerate() {
        if a.shape() != gq.coord_shape(k) {
            return Err(QuiverError::DimensionMismatch(format!(
                "summand {k} coordinates have shape {:?}, expected {:?}",
                a.shape(),
                gq.coord_shape(k)
            )));
        }
        let (g, gs) = b.arrows_of[k];
        let m = gq.summands[k].twist;
        let t = c_transpose(&b.quiver, &b.structure, &b.form, g, a, m);
        match gs {
            None => {
                let residual = linalg::fro(&(a + &t));
                if residual > KIND_TOL * (1.0 + linalg::fro(a)) {
                    return Err(QuiverError::KindSymmetryViolated { index: k, residual });
                }
                phi[g] = a.clone();
            }
            Some(gs) => {
                phi[g] = a.clone();
                phi[gs] = -t;
            }
        }
    }
    Representation::new(b.quiver.clone(), b.dims.clone(), phi)
}

/// Tolerance used to decide whether an input is structured before extraction.
pub const STRUCTURED_TOL: f64 = 1e-9;

/// Reads back the coordinates of a structured representation.
pub fn extract_representation(r: &Representation, gq: &GeneralizedQuiverSpec) -> Result<Vec<CMat>> {
    let b = build_symmetric_quiver(gq)?;
    if *r.quiver() != *b.quiver || *r.dims() != b.dims {
        return Err(QuiverError::DimensionMismatch(
            "representation is not on the built quiver".into(),
        ));
    }
    let res = structured_residual(r, &b.structure, &b.form);
    if res > STRUCTURED_TOL * (1.0 + r.norm_sq().sqrt()) {
        return Err(QuiverError::NotStructured(res));
    }
    Ok(b.arrows_of
        .iter()
        .map(|&(g, _)| r.arrow(g).clone())
        .collect())
}

/// Action of the structured group on coordinates, computed per kind from
/// `h_i = g_{q_i}` and `k_j = g_{p_j}` alone.
pub fn act_on_coords(
    gq: &GeneralizedQuiverSpec,
    g: &GaugeElement,
    coords: &[CMat],
) -> Result<Vec<CMat>> {
    use SummandKind::*;
    let r = gq.paired_chars.len();
    let h = |i: usize| &g.g[q_vertex(i)];
    let k = |j: usize| &g.g[2 * r + j];
    let inv = |m: &CMat| {
        linalg::inverse(m).ok_or_else(|| QuiverError::NotInvertible("gauge matrix".into()))
    };
    let mut out = Vec::with_capacity(coords.len());
    for (idx, a) in coords.iter().enumerate() {
        let s = &gq.summands[idx];
        let slices = twist_slices(a, s.twist);
        let mut acted = Vec::with_capacity(slices.len());
        for x in &slices {
            let y = match s.kind {
                AltV(i) => h(i) * x * h(i).transpose(),
                AltVdual(i) => {
                    let hi = inv(h(i))?;
                    hi.transpose() * x * hi
                }
                EndE(i) => h(i) * x * inv(h(i))?,
                AltW(j) => k(j) * x * inv(k(j))?,
                VV(i, j) => h(j) * x * inv(h(i))?,
                VdualV(i, j) => h(j) * x * h(i).transpose(),
                VVdual(i, j) => inv(h(j))?.transpose() * x * inv(h(i))?,
                WW(j, jj) => k(jj) * x * inv(k(j))?,
                VW(i, j) => k(j) * x * inv(h(i))?,
                VdualW(i, j) => k(j) * x * h(i).transpose(),
            };
            acted.push(y);
        }
        let (rows, cols) = gq.coord_shape(idx);
        out.push(from_twist_slices(&acted, rows, cols / s.twist));
    }
    Ok(out)
}

/// Tolerance on `gᵀ C g = C` for accepting a gauge element.
pub const GROUP_TOL: f64 = 1e-8;

/// `‖embed(g·coords) − g·embed(coords)‖`, maximized over arrows.
pub fn check_equivariance(
    gq: &GeneralizedQuiverSpec,
    g: &GaugeElement,
    coords: &[CMat],
) -> Result<f64> {
    let b = build_symmetric_quiver(gq)?;
    if g.g.len() != b.quiver.vertex_count() {
        return Err(QuiverError::DimensionMismatch(
            "gauge element vertex count".into(),
        ));
    }
    let res = structured_group_residual(g, &b.structure, &b.form);
    if res > GROUP_TOL {
        return Err(QuiverError::NotInStructuredGroup(res));
    }
    let lhs = embed_into(gq, &b, &act_on_coords(gq, g, coords)?)?;
    let rhs = crate::quiver::gauge_act(g, &embed_into(gq, &b, coords)?)?;
    Ok(lhs.distance(&rhs))
}

/// Seeded random coordinates satisfying every kind constraint.
pub fn random_coords(gq: &GeneralizedQuiverSpec, seed: u64) -> Result<Vec<CMat>> {
    let b = build_symmetric_quiver(gq)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..gq.summands.len())
        .map(|k| {
            let (rows, cols) = gq.coord_shape(k);
            let x = linalg::random_gaussian(&mut rng, rows, cols);
            if gq.summands[k].kind.is_fixed() {
                let (a, _) = b.arrows_of[k];
                let t = c_transpose(
                    &b.quiver,
                    &b.structure,
                    &b.form,
                    a,
                    &x,
                    gq.summands[k].twist,
                );
                (x - t) * linalg::c(0.5, 0.0)
            } else {
                x
            }
        })
        .collect())
}
