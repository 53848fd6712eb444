//! Intertwiner spaces, simplicity, polystable decomposition and the
//! orthogonal classification of summands.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, CMat};
use crate::moment::Tau;
use crate::quiver::{direct_sum, from_twist_slices, gauge_act, GaugeElement, Representation};
use crate::search::{find_destabilizer, find_isotropic_destabilizer, SearchMode, SearchOptions};
use crate::symmetric::{BlockForm, SymmetricStructure};
use crate::{QuiverError, Result};

/// Basis of `Hom(r1, r2)`: tuples `X_i: V1_i → V2_i` with
/// `X_h φ1_j = φ2_j X_t` for every arrow and twist slice. The basis is
/// orthonormal for the Frobenius inner product on tuples.
#[derive(Debug, Clone)]
pub struct HomSpace {
    pub basis: Vec<Vec<CMat>>,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `Σ_k c_k · basis_k`.
    pub fn combine(
        &self,
        coeffs: &[num_complex::Complex64],
        shapes: &[(usize, usize)],
    ) -> Vec<CMat> {
        let mut out: Vec<CMat> = shapes.iter().map(|&(a, b)| linalg::zeros(a, b)).collect();
        for (c, b) in coeffs.iter().zip(&self.basis) {
            for (o, x) in out.iter_mut().zip(b) {
                *o += x * *c;
            }
        }
        out
    }
}

pub type EndAlgebra = HomSpace;

/// Relative tolerance on singular values for intertwiner null spaces.
pub const NULL_TOL: f64 = 1e-10;

pub fn hom_space(r1: &Representation, r2: &Representation) -> Result<HomSpace> {
    if *r1.quiver() != *r2.quiver() || r1.dims().m != r2.dims().m {
        return Err(QuiverError::DimensionMismatch(
            "intertwiners need the same quiver and twisting".into(),
        ));
    }
    let q = r1.quiver();
    let (n1, n2) = (&r1.dims().n, &r2.dims().n);
    let mut offset = vec![0usize; n1.len() + 1];
    for i in 0..n1.len() {
        offset[i + 1] = offset[i] + n1[i] * n2[i];
    }
    let unknowns = offset[n1.len()];
    let mut rows: Vec<CMat> = Vec::new();
    for a in 0..q.arrow_count() {
        let (t, h) = (q.tail(a), q.head(a));
        for (p1, p2) in r1.slices(a).iter().zip(r2.slices(a)) {
            // vec(X_h φ1) − vec(φ2 X_t), column-major
            let eqs = n2[h] * n1[t];
            let mut block = linalg::zeros(eqs, unknowns);
            let left = linalg::kron(&p1.transpose(), &linalg::identity(n2[h]));
            let right = linalg::kron(&linalg::identity(n1[t]), &p2);
            let mut lv = block.view_mut((0, offset[h]), (eqs, n1[h] * n2[h]));
            lv += &left;
            let mut rv = block.view_mut((0, offset[t]), (eqs, n1[t] * n2[t]));
            rv -= &right;
            rows.push(block);
        }
    }
    let system = if rows.is_empty() {
        linalg::zeros(0, unknowns)
    } else {
        rows.iter()
            .skip(1)
            .fold(rows[0].clone(), |acc, m| linalg::vstack(&acc, m))
    };
    let null = linalg::null_space(&system, NULL_TOL);
    let basis = (0..null.ncols())
        .map(|c| {
            (0..n1.len())
                .map(|i| {
                    let col: Vec<_> = null
                        .view((offset[i], c), (n1[i] * n2[i], 1))
                        .iter()
                        .copied()
                        .collect();
                    CMat::from_column_slice(n2[i], n1[i], &col)
                })
                .collect()
        })
        .collect();
    Ok(HomSpace { basis })
}

pub fn endomorphism_algebra(r: &Representation) -> EndAlgebra {
    hom_space(r, r).expect("a representation has the same shape as itself")
}

/// Only global scalars commute with `r`. Vertices of dimension zero carry no
/// unknowns and do not contribute.
pub fn is_simple(r: &Representation) -> bool {
    endomorphism_algebra(r).dim() == 1
}

/// `max_α ‖X_h φ1 − φ2 (X_t ⊗ I)‖_F`.
pub fn intertwining_residual(x: &[CMat], r1: &Representation, r2: &Representation) -> f64 {
    let q = r1.quiver();
    (0..q.arrow_count())
        .map(|a| {
            let (t, h) = (q.tail(a), q.head(a));
            r1.slices(a)
                .iter()
                .zip(r2.slices(a))
                .map(|(p1, p2)| linalg::fro(&(&x[h] * p1 - p2 * &x[t])))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Minimum reciprocal condition number for a generic intertwiner to count as
/// an isomorphism.
pub const ISO_RCOND: f64 = 1e-8;

/// An isomorphism `r1 → r2` if a generic intertwiner is invertible.
pub fn find_isomorphism(
    r1: &Representation,
    r2: &Representation,
    seed: u64,
) -> Result<Option<Vec<CMat>>> {
    if r1.dims().n != r2.dims().n {
        return Ok(None);
    }
    let hom = hom_space(r1, r2)?;
    if hom.dim() == 0 {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<_> = linalg::random_gaussian(&mut rng, hom.dim(), 1)
        .iter()
        .copied()
        .collect();
    let shapes: Vec<(usize, usize)> = r1.dims().n.iter().map(|&k| (k, k)).collect();
    let x = hom.combine(&coeffs, &shapes);
    if x.iter()
        .all(|xi| xi.nrows() == 0 || linalg::rcond(xi) >= ISO_RCOND)
    {
        Ok(Some(x))
    } else {
        Ok(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummandTag {
    PlainStable,
    OrthStableF,
    DualPairE,
    SelfDualPairS,
}

impl SummandTag {
    pub fn name(&self) -> &'static str {
        match self {
            SummandTag::PlainStable => "PLAIN_STABLE",
            SummandTag::OrthStableF => "ORTH_STABLE_F",
            SummandTag::DualPairE => "DUAL_PAIR_E",
            SummandTag::SelfDualPairS => "SELFDUAL_PAIR_S",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SummandEntry {
    pub rep: Representation,
    pub multiplicity: usize,
    pub tag: SummandTag,
}

/// `gauge_act(change_of_basis, r)` is the block direct sum of the summands,
/// each repeated `multiplicity` times, in listed order.
#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub summands: Vec<SummandEntry>,
    pub change_of_basis: GaugeElement,
}

impl DecompositionReport {
    /// The direct sum that `change_of_basis` should produce.
    pub fn assembled(&self, like: &Representation) -> Result<Representation> {
        let zero_dims = crate::quiver::DimensionVector::new(
            vec![0; like.dims().n.len()],
            like.dims().m.clone(),
        );
        let mut acc = Representation::zero(like.quiver_arc().clone(), zero_dims)?;
        for s in &self.summands {
            for _ in 0..s.multiplicity {
                acc = direct_sum(&acc, &s.rep)?;
            }
        }
        Ok(acc)
    }

    pub fn recomposition_residual(&self, original: &Representation) -> Result<f64> {
        let moved = gauge_act(&self.change_of_basis, original)?;
        Ok(moved.distance(&self.assembled(original)?))
    }
}

/// Residual allowed for a split to count as a direct-sum decomposition.
pub const SPLIT_TOL: f64 = 1e-9;
const RESAMPLES: usize = 16;

/// A summand located by its column bases in the original coordinates.
#[derive(Debug, Clone)]
struct Piece {
    bases: Vec<CMat>,
    rep: Representation,
}

/// `T_h^{-1} φ (T_t ⊗ I)` for square per-vertex matrices `T`.
fn change_coords(r: &Representation, t: &[CMat]) -> Result<Representation> {
    let inv: Vec<CMat> = t
        .iter()
        .map(|m| {
            linalg::inverse(m).ok_or_else(|| QuiverError::NotInvertible("change of basis".into()))
        })
        .collect::<Result<_>>()?;
    gauge_act(&GaugeElement::vertex(inv), r)
}

/// Restricts `r` to the block of columns `[start, start + len)` per vertex.
fn block_of(r: &Representation, start: &[usize], len: &[usize]) -> Representation {
    let q = r.quiver();
    let phi = (0..q.arrow_count())
        .map(|a| {
            let (t, h) = (q.tail(a), q.head(a));
            let slices: Vec<CMat> = r
                .slices(a)
                .iter()
                .map(|s| s.view((start[h], start[t]), (len[h], len[t])).into_owned())
                .collect();
            from_twist_slices(&slices, len[h], len[t])
        })
        .collect();
    let dims = crate::quiver::DimensionVector::new(len.to_vec(), r.dims().m.clone());
    Representation::new(r.quiver_arc().clone(), dims, phi).expect("block shapes are consistent")
}

/// Largest off-diagonal block norm of `r` for the given block sizes.
fn off_block_residual(r: &Representation, sizes: &[Vec<usize>]) -> f64 {
    let q = r.quiver();
    let nb = sizes.len();
    let starts: Vec<Vec<usize>> = (0..nb)
        .map(|b| {
            (0..r.dims().n.len())
                .map(|i| sizes[..b].iter().map(|s| s[i]).sum())
                .collect()
        })
        .collect();
    let mut worst: f64 = 0.0;
    for a in 0..q.arrow_count() {
        let (t, h) = (q.tail(a), q.head(a));
        for s in r.slices(a) {
            for b1 in 0..nb {
                for b2 in 0..nb {
                    if b1 != b2 {
                        let v =
                            s.view((starts[b1][h], starts[b2][t]), (sizes[b1][h], sizes[b2][t]));
                        worst = worst.max(v.norm());
                    }
                }
            }
        }
    }
    worst
}

fn cluster(values: &mut Vec<num_complex::Complex64>) -> Vec<num_complex::Complex64> {
    let scale = 1.0 + values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<num_complex::Complex64> = Vec::new();
    for &z in values.iter() {
        if !out.iter().any(|c| (c - z).norm() <= 1e-6 * scale) {
            out.push(z);
        }
    }
    out
}

/// Splits `r` by the generalized eigenspaces of a symmetrized random
/// endomorphism. `None` when `r` has only scalar endomorphisms.
fn split_once(
    r: &Representation,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(Vec<CMat>, Vec<Vec<usize>>)>> {
    let end = endomorphism_algebra(r);
    if end.dim() <= 1 {
        return Ok(None);
    }
    let n = &r.dims().n;
    let shapes: Vec<(usize, usize)> = n.iter().map(|&k| (k, k)).collect();
    for _ in 0..RESAMPLES {
        let coeffs: Vec<_> = linalg::random_gaussian(rng, end.dim(), 1)
            .iter()
            .copied()
            .collect();
        let x = end.combine(&coeffs, &shapes);
        let y: Vec<CMat> = x.iter().map(|m| m + m.adjoint()).collect();
        // orthogonal projection back into End
        let proj: Vec<_> = end
            .basis
            .iter()
            .map(|b| b.iter().zip(&y).map(|(bi, yi)| linalg::inner(bi, yi)).sum())
            .collect();
        let z = end.combine(&proj, &shapes);
        let mut all: Vec<_> = z.iter().flat_map(linalg::eigenvalues).collect();
        let lambdas = cluster(&mut all);
        if lambdas.len() < 2 {
            continue;
        }
        let mut t: Vec<CMat> = n.iter().map(|&k| linalg::zeros(k, 0)).collect();
        let mut sizes = Vec::new();
        for lam in &lambdas {
            let mut size = Vec::with_capacity(n.len());
            for (i, zi) in z.iter().enumerate() {
                let k = n[i];
                let shifted = zi - linalg::identity(k) * *lam;
                let mut power = linalg::identity(k);
                for _ in 0..k.max(1) {
                    power = &power * &shifted;
                }
                let space = linalg::null_space(&power, 1e-7);
                size.push(space.ncols());
                t[i] = linalg::hstack(&t[i], &space);
            }
            sizes.push(size);
        }
        if t.iter()
            .zip(n)
            .any(|(ti, &k)| ti.ncols() != k || (k > 0 && linalg::rcond(ti) < 1e-10))
        {
            continue;
        }
        return Ok(Some((t, sizes)));
    }
    Err(QuiverError::NonSemisimple(
        "indecomposable but End has dimension above one".into(),
    ))
}

fn split_recursive(piece: Piece, rng: &mut ChaCha8Rng, out: &mut Vec<Piece>) -> Result<()> {
    if piece.rep.dims().total() == 0 {
        return Ok(());
    }
    let Some((t, sizes)) = split_once(&piece.rep, rng)? else {
        out.push(piece);
        return Ok(());
    };
    let moved = change_coords(&piece.rep, &t)?;
    let scale = 1.0 + moved.norm_sq().sqrt();
    let off = off_block_residual(&moved, &sizes);
    if off > SPLIT_TOL * scale {
        return Err(QuiverError::NonSemisimple(format!(
            "complement does not split (off-block residual {off:.3e})"
        )));
    }
    let nv = sizes[0].len();
    let mut start = vec![0usize; nv];
    for size in &sizes {
        let rep = block_of(&moved, &start, size);
        let bases = (0..nv)
            .map(|i| {
                let cols = &t[i].columns(start[i], size[i]);
                &piece.bases[i] * cols
            })
            .collect();
        split_recursive(Piece { bases, rep }, rng, out)?;
        for i in 0..nv {
            start[i] += size[i];
        }
    }
    Ok(())
}

/// Isotypic group: representative and the bases of every copy, each copy
/// already rewritten so that its block equals the representative.
#[derive(Debug, Clone)]
struct Group {
    rep: Representation,
    copies: Vec<Vec<CMat>>,
}

fn group_pieces(pieces: Vec<Piece>, seed: u64) -> Result<Vec<Group>> {
    let mut groups: Vec<Group> = Vec::new();
    for p in pieces {
        let mut placed = false;
        for g in groups.iter_mut() {
            if let Some(x) = find_isomorphism(&g.rep, &p.rep, seed)? {
                // x: rep → p.rep, so p's coordinates composed with x give rep exactly
                let bases = p.bases.iter().zip(&x).map(|(b, xi)| b * xi).collect();
                g.copies.push(bases);
                placed = true;
                break;
            }
        }
        if !placed {
            groups.push(Group {
                rep: p.rep,
                copies: vec![p.bases],
            });
        }
    }
    Ok(groups)
}

fn isotypic_groups(r: &Representation, seed: u64) -> Result<Vec<Group>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = Piece {
        bases: r.dims().n.iter().map(|&k| linalg::identity(k)).collect(),
        rep: r.clone(),
    };
    let mut pieces = Vec::new();
    split_recursive(full, &mut rng, &mut pieces)?;
    group_pieces(pieces, seed)
}

/// Columns ordered as listed, inverted into a gauge element.
fn change_of_basis(columns: &[Vec<CMat>], n: &[usize]) -> Result<GaugeElement> {
    let t: Vec<CMat> = (0..n.len())
        .map(|i| {
            columns
                .iter()
                .fold(linalg::zeros(n[i], 0), |acc, c| linalg::hstack(&acc, &c[i]))
        })
        .collect();
    let inv = t
        .iter()
        .map(|m| {
            linalg::inverse(m)
                .ok_or_else(|| QuiverError::NotInvertible("decomposition basis".into()))
        })
        .collect::<Result<_>>()?;
    Ok(GaugeElement::vertex(inv))
}

/// Polystable decomposition into simple summands with multiplicities.
pub fn decompose(r: &Representation, seed: u64) -> Result<DecompositionReport> {
    let groups = isotypic_groups(r, seed)?;
    let mut cols = Vec::new();
    let mut summands = Vec::new();
    for g in groups {
        cols.extend(g.copies.iter().cloned());
        summands.push(SummandEntry {
            rep: g.rep,
            multiplicity: g.copies.len(),
            tag: SummandTag::PlainStable,
        });
    }
    let change_of_basis = change_of_basis(&cols, &r.dims().n)?;
    Ok(DecompositionReport {
        summands,
        change_of_basis,
    })
}

/// `D(E)`: `D_i = E_{σ(i)}*` and `D_α = −ε_α c_{σα} (E_{σα})ᵀ` slice by slice.
/// Together with `E` it carries the hyperbolic form of [`hyperbolic_double`].
pub fn dual_representation(e: &Representation, s: &SymmetricStructure) -> Representation {
    let q = e.quiver();
    let n: Vec<usize> = (0..q.vertex_count())
        .map(|i| e.dims().n[s.sigma_v[i]])
        .collect();
    let phi = (0..q.arrow_count())
        .map(|a| {
            let b = s.sigma_a[a];
            let sign = -(s.eps_a[a] as f64) * s.transpose_factor(q, b) as f64;
            let slices: Vec<CMat> = e
                .slices(b)
                .iter()
                .map(|x| x.transpose() * linalg::c(sign, 0.0))
                .collect();
            from_twist_slices(&slices, n[q.head(a)], n[q.tail(a)])
        })
        .collect();
    let dims = crate::quiver::DimensionVector::new(n, e.dims().m.clone());
    Representation::new(e.quiver_arc().clone(), dims, phi).expect("dual shapes are consistent")
}

/// Block of the hyperbolic form on `E ⊕ D(E)` at vertex `i`, in `(E, D)`
/// ordering: `[[0, I], [s_i·I, 0]]`.
fn hyperbolic_block(e_n: &[usize], s: &SymmetricStructure, i: usize) -> CMat {
    let j = s.sigma_v[i];
    let (ei, ej) = (e_n[i], e_n[j]);
    // rows: E_i ⊕ D_i = E_i ⊕ E_j*, cols: E_j ⊕ D_j = E_j ⊕ E_i*
    let mut b = linalg::zeros(ei + ej, ej + ei);
    b.view_mut((0, ej), (ei, ei))
        .copy_from(&linalg::identity(ei));
    b.view_mut((ei, 0), (ej, ej))
        .copy_from(&(linalg::identity(ej) * linalg::c(s.vertex_sign(i) as f64, 0.0)));
    b
}

/// `E ⊕ D(E)` with its hyperbolic form; always structured.
pub fn hyperbolic_double(
    e: &Representation,
    s: &SymmetricStructure,
) -> Result<(Representation, BlockForm)> {
    let d = dual_representation(e, s);
    let sum = direct_sum(e, &d)?;
    let blocks = (0..s.sigma_v.len())
        .map(|i| hyperbolic_block(&e.dims().n, s, i))
        .collect();
    Ok((
        sum,
        BlockForm {
            blocks,
            form_sign: s.form_sign,
        },
    ))
}

/// Nondegeneracy threshold for the restriction of the form to a summand.
pub const GRAM_RCOND: f64 = 1e-8;

/// `σ_min` of the form restricted to the span of `bases` (orthonormalized),
/// relative to the largest block of `C`.
fn gram_rcond(bases: &[CMat], s: &SymmetricStructure, c: &BlockForm) -> f64 {
    let q: Vec<CMat> = bases.iter().map(|b| linalg::orth(b, 1e-12)).collect();
    let mut offset = vec![0usize; q.len() + 1];
    for i in 0..q.len() {
        offset[i + 1] = offset[i] + q[i].ncols();
    }
    let total = offset[q.len()];
    if total == 0 {
        return 1.0;
    }
    let mut g = linalg::zeros(total, total);
    for i in 0..q.len() {
        let j = s.sigma_v[i];
        let block = q[i].transpose() * &c.blocks[i] * &q[j];
        g.view_mut((offset[i], offset[j]), (q[i].ncols(), q[j].ncols()))
            .copy_from(&block);
    }
    let scale = c
        .blocks
        .iter()
        .map(linalg::spectral_norm)
        .fold(0.0, f64::max);
    let smin = linalg::singular_values(&g)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    smin / scale.max(f64::MIN_POSITIVE)
}

/// Decomposes a structured polystable representation and tags every
/// summand by how the form restricts to it.
pub fn classify_orthogonal_decomposition(
    r: &Representation,
    s: &SymmetricStructure,
    c: &BlockForm,
    seed: u64,
) -> Result<DecompositionReport> {
    crate::symmetric::validate_symmetric(r.quiver(), r.dims(), s).into_result()?;
    crate::symmetric::validate_form(r.dims(), s, c).into_result()?;
    let groups = isotypic_groups(r, seed)?;
    let mut used = vec![false; groups.len()];
    let mut cols: Vec<Vec<CMat>> = Vec::new();
    let mut summands = Vec::new();
    for gi in 0..groups.len() {
        if used[gi] {
            continue;
        }
        used[gi] = true;
        let g = &groups[gi];
        let dual = dual_representation(&g.rep, s);
        let k = g.copies.len();
        if find_isomorphism(&g.rep, &dual, seed)?.is_some() {
            if gram_rcond(&g.copies[0], s, c) >= GRAM_RCOND {
                cols.extend(g.copies.iter().cloned());
                summands.push(SummandEntry {
                    rep: g.rep.clone(),
                    multiplicity: k,
                    tag: SummandTag::OrthStableF,
                });
            } else {
                if k % 2 == 1 {
                    return Err(QuiverError::DegenerateForm(format!(
                        "self-dual isotropic summand with odd multiplicity {k}"
                    )));
                }
                for copy in &g.copies {
                    cols.push(copy.clone());
                }
                let pair = direct_sum(&g.rep, &g.rep)?;
                summands.push(SummandEntry {
                    rep: pair,
                    multiplicity: k / 2,
                    tag: SummandTag::SelfDualPairS,
                });
            }
            continue;
        }
        let mut partner = None;
        for (gj, other) in groups.iter().enumerate() {
            if !used[gj] {
                if let Some(x) = find_isomorphism(&dual, &other.rep, seed)? {
                    partner = Some((gj, x));
                    break;
                }
            }
        }
        let Some((gj, x)) = partner else {
            return Err(QuiverError::DegenerateForm(
                "form degenerate on polystable decomposition: isotropic summand without dual partner".into(),
            ));
        };
        used[gj] = true;
        let other = &groups[gj];
        if other.copies.len() != k {
            return Err(QuiverError::DegenerateForm(format!(
                "summand multiplicity {k} differs from its dual's {}",
                other.copies.len()
            )));
        }
        for (ce, cd) in g.copies.iter().zip(&other.copies) {
            cols.push(ce.clone());
            // x: D(E) → other.rep; rewrite the partner copy so its block is D(E)
            cols.push(cd.iter().zip(&x).map(|(b, xi)| b * xi).collect());
        }
        let pair = direct_sum(&g.rep, &dual)?;
        summands.push(SummandEntry {
            rep: pair,
            multiplicity: k,
            tag: SummandTag::DualPairE,
        });
    }
    let change_of_basis = interleave_pairs(&cols, &summands, &r.dims().n)?;
    Ok(DecompositionReport {
        summands,
        change_of_basis,
    })
}

/// Pair summands are direct sums of two blocks; merge the two copies' column
/// sets so that each pair occupies one contiguous block per vertex.
fn interleave_pairs(
    cols: &[Vec<CMat>],
    summands: &[SummandEntry],
    n: &[usize],
) -> Result<GaugeElement> {
    let mut merged: Vec<Vec<CMat>> = Vec::new();
    let mut it = cols.iter();
    for s in summands {
        for _ in 0..s.multiplicity {
            match s.tag {
                SummandTag::OrthStableF | SummandTag::PlainStable => {
                    merged.push(it.next().expect("column set").clone())
                }
                SummandTag::DualPairE | SummandTag::SelfDualPairS => {
                    let a = it.next().expect("column set");
                    let b = it.next().expect("column set");
                    merged.push(a.iter().zip(b).map(|(x, y)| linalg::hstack(x, y)).collect());
                }
            }
        }
    }
    change_of_basis(&merged, n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationReport {
    pub plain_ss: bool,
    pub orth_ss: bool,
    pub plain_stable: bool,
    pub orth_stable: bool,
    pub simple: bool,
    /// Whether an orthogonally stable input splits into mutually
    /// non-isomorphic plain summands (`None` when not applicable).
    pub orth_stable_splits: Option<bool>,
    pub consistent: bool,
}

/// Runs the plain and isotropic searches and checks the relations between
/// plain and orthogonal (semi)stability.
pub fn orth_plain_relation_check(
    r: &Representation,
    s: &SymmetricStructure,
    c: &BlockForm,
    tau: &Tau,
    opts: &SearchOptions,
) -> Result<RelationReport> {
    let semi = SearchOptions {
        mode: SearchMode::Semistable,
        ..*opts
    };
    let strict = SearchOptions {
        mode: SearchMode::Strict,
        ..*opts
    };
    let plain_ss = find_destabilizer(r, tau, &semi)?.is_none();
    let plain_stable = find_destabilizer(r, tau, &strict)?.is_none();
    let orth_ss = find_isotropic_destabilizer(r, tau, s, c, &semi)?.is_none();
    let orth_stable = find_isotropic_destabilizer(r, tau, s, c, &strict)?.is_none();
    let simple = is_simple(r);
    let orth_stable_splits = if orth_stable {
        Some(match decompose(r, opts.seed) {
            Ok(d) => d.summands.iter().all(|e| e.multiplicity == 1),
            Err(_) => false,
        })
    } else {
        None
    };
    let consistent = plain_ss == orth_ss
        && (!plain_stable || (orth_stable && simple))
        && orth_stable_splits.unwrap_or(true);
    Ok(RelationReport {
        plain_ss,
        orth_ss,
        plain_stable,
        orth_stable,
        simple,
        orth_stable_splits,
        consistent,
    })
}

/// Convenience: the vector `(x, i·x)` basis of the diagonal of `r ⊕ r`.
pub fn twisted_diagonal(n: &[usize]) -> Vec<CMat> {
    n.iter()
        .map(|&k| {
            let top = linalg::identity(k);
            let bottom = linalg::identity(k) * linalg::I;
            linalg::vstack(&top, &bottom) * linalg::c(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_matrix;
    use crate::quiver::{random_representation, DimensionVector, Quiver};
    use crate::symmetric::{is_structured_rep, standard_form, validate_form};
    use std::sync::Arc;

    fn a2(x: f64) -> Representation {
        let q = Arc::new(Quiver::a2());
        let d = DimensionVector::untwisted(&q, vec![1, 1]);
        Representation::new(q, d, vec![real_matrix(1, 1, &[x])]).unwrap()
    }

    #[test]
    fn endomorphism_examples() {
        assert_eq!(endomorphism_algebra(&a2(1.0)).dim(), 1);
        assert_eq!(endomorphism_algebra(&a2(0.0)).dim(), 2);
        let rr = direct_sum(&a2(1.0), &a2(1.0)).unwrap();
        assert_eq!(endomorphism_algebra(&rr).dim(), 4);
        for b in endomorphism_algebra(&rr).basis {
            assert!(intertwining_residual(&b, &rr, &rr) <= 1e-10);
        }
    }

    #[test]
    fn simplicity_examples() {
        assert!(is_simple(&a2(1.0)));
        assert!(!is_simple(&a2(0.0)));
        let q = Arc::new(Quiver::jordan());
        let d = DimensionVector::untwisted(&q, vec![2]);
        let j = Representation::new(q, d, vec![real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0])]).unwrap();
        assert!(!is_simple(&j));
    }

    #[test]
    fn zero_dimensional_vertices_are_ignored() {
        let q = Arc::new(Quiver::a2());
        let r =
            Representation::zero(q.clone(), DimensionVector::untwisted(&q, vec![1, 0])).unwrap();
        assert!(is_simple(&r));
    }

    #[test]
    fn decomposition_examples() {
        let one = decompose(&a2(1.0), 1).unwrap();
        assert_eq!(one.summands.len(), 1);
        assert_eq!(one.summands[0].multiplicity, 1);

        let q = Arc::new(Quiver::jordan());
        let d = DimensionVector::untwisted(&q, vec![1]);
        let e = |x: f64| {
            Representation::new(q.clone(), d.clone(), vec![real_matrix(1, 1, &[x])]).unwrap()
        };
        let two = direct_sum(&e(1.0), &e(2.0)).unwrap();
        let rep = decompose(&two, 2).unwrap();
        assert_eq!(rep.summands.len(), 2);
        assert!(rep.recomposition_residual(&two).unwrap() <= 1e-8);

        let sq = direct_sum(&a2(1.0), &a2(1.0)).unwrap();
        let rep = decompose(&sq, 3).unwrap();
        assert_eq!(rep.summands.len(), 1);
        assert_eq!(rep.summands[0].multiplicity, 2);
        assert!(rep.recomposition_residual(&sq).unwrap() <= 1e-8);
    }

    #[test]
    fn nilpotent_jordan_is_not_semisimple() {
        let q = Arc::new(Quiver::jordan());
        let d = DimensionVector::untwisted(&q, vec![2]);
        let j = Representation::new(q, d, vec![real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0])]).unwrap();
        assert!(matches!(
            decompose(&j, 0),
            Err(QuiverError::NonSemisimple(_))
        ));
    }

    #[test]
    fn decomposition_of_random_sum_recomposes() {
        let q = Arc::new(Quiver::kronecker(3));
        let d = DimensionVector::untwisted(&q, vec![1, 2]);
        let a = random_representation(q.clone(), d.clone(), 1).unwrap();
        let b = random_representation(q.clone(), d, 2).unwrap();
        let sum = direct_sum(&direct_sum(&a, &b).unwrap(), &a).unwrap();
        let rep = decompose(&sum, 5).unwrap();
        let mut mults: Vec<usize> = rep.summands.iter().map(|s| s.multiplicity).collect();
        mults.sort();
        assert_eq!(mults, vec![1, 2]);
        assert!(rep.recomposition_residual(&sum).unwrap() <= 1e-8);
        for s in &rep.summands {
            assert_eq!(endomorphism_algebra(&s.rep).dim(), 1);
        }
    }

    #[test]
    fn hyperbolic_double_is_structured() {
        let q = Arc::new(Quiver::from_edges(
            &["q", "q*", "p"],
            &[
                ("g", "q", "q"),
                ("g*", "q*", "q*"),
                ("a", "q", "q*"),
                ("x", "q", "p"),
                ("x*", "p", "q*"),
            ],
        ));
        for sign in [1, -1] {
            let s = SymmetricStructure::from_pairs(
                &q,
                &[("q", "q*")],
                &[("g", "g*"), ("x", "x*")],
                sign,
            )
            .unwrap();
            let d = DimensionVector::untwisted(&q, vec![2, 1, 2]);
            let e = random_representation(q.clone(), d, 4).unwrap();
            let (sum, c) = hyperbolic_double(&e, &s).unwrap();
            assert!(validate_form(sum.dims(), &s, &c).is_valid());
            let (ok, res) = is_structured_rep(&sum, &s, &c, 1e-12).unwrap();
            assert!(ok, "sign {sign}: residual {res}");
        }
    }

    #[test]
    fn structured_fixed_vertex_instance_is_orthogonally_stable() {
        let q = Arc::new(Quiver::from_edges(
            &["p"],
            &[("a", "p", "p"), ("b", "p", "p")],
        ));
        let s = SymmetricStructure::new(vec![0], vec![0, 1], 1);
        let d = DimensionVector::untwisted(&q, vec![3]);
        let c = standard_form(&q, &d, &s).unwrap();
        let raw = random_representation(q, d, 6).unwrap();
        let r = crate::symmetric::project_structured(&raw, &s, &c).unwrap();
        let rel = orth_plain_relation_check(&r, &s, &c, &[0.0], &SearchOptions::default()).unwrap();
        assert!(rel.plain_ss && rel.orth_ss && rel.plain_stable && rel.orth_stable && rel.simple);
        assert!(rel.consistent);
        let cls = classify_orthogonal_decomposition(&r, &s, &c, 1).unwrap();
        assert_eq!(cls.summands.len(), 1);
        assert_eq!(cls.summands[0].tag, SummandTag::OrthStableF);
    }

    fn paired_quiver() -> (Arc<Quiver>, SymmetricStructure) {
        let q = Arc::new(Quiver::from_edges(
            &["q", "q*", "p"],
            &[
                ("g", "q", "q"),
                ("g*", "q*", "q*"),
                ("a", "q", "q*"),
                ("b", "p", "p"),
            ],
        ));
        let s = SymmetricStructure::from_pairs(&q, &[("q", "q*")], &[("g", "g*")], 1).unwrap();
        (q, s)
    }

    #[test]
    fn mixed_summand_types_are_classified() {
        let (q, s) = paired_quiver();
        let d = DimensionVector::untwisted(&q, vec![4, 4, 1]);
        let c = standard_form(&q, &d, &s).unwrap();
        let lam = 1.5;
        let g = real_matrix(
            4,
            4,
            &[
                lam, 0., 0., 0., 0., lam, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.,
            ],
        );
        let mut a = linalg::zeros(4, 4);
        a[(2, 3)] = linalg::ONE;
        a[(3, 2)] = -linalg::ONE;
        let r = Representation::new(q, d, vec![g.clone(), -g, a, linalg::zeros(1, 1)]).unwrap();
        assert!(is_structured_rep(&r, &s, &c, 1e-12).unwrap().0);
        let cls = classify_orthogonal_decomposition(&r, &s, &c, 7).unwrap();
        let mut tags: Vec<(&str, usize)> = cls
            .summands
            .iter()
            .map(|e| (e.tag.name(), e.multiplicity))
            .collect();
        tags.sort();
        assert_eq!(
            tags,
            vec![
                ("DUAL_PAIR_E", 2),
                ("ORTH_STABLE_F", 1),
                ("SELFDUAL_PAIR_S", 1)
            ]
        );
        assert!(cls.recomposition_residual(&r).unwrap() <= 1e-8);
    }

    #[test]
    fn dual_pair_relation_check() {
        let (q, s) = paired_quiver();
        let d = DimensionVector::untwisted(&q, vec![1, 1, 0]);
        let one = |x: f64| real_matrix(1, 1, &[x]);
        let e = Representation::new(
            q,
            d,
            vec![one(1.0), one(2.0), one(1.0), linalg::zeros(0, 0)],
        )
        .unwrap();
        let dual = dual_representation(&e, &s);
        assert_eq!(dual.arrow(0)[(0, 0)].re, -2.0);
        assert_eq!(dual.arrow(2)[(0, 0)].re, -1.0);
        let (sum, c) = hyperbolic_double(&e, &s).unwrap();
        let tau = [-1.0, 1.0, 0.0];
        let rel = orth_plain_relation_check(&sum, &s, &c, &tau, &SearchOptions::default()).unwrap();
        assert!(rel.plain_ss && rel.orth_ss);
        assert!(!rel.plain_stable && !rel.orth_stable && !rel.simple);
        assert!(rel.consistent);
        let cls = classify_orthogonal_decomposition(&sum, &s, &c, 3).unwrap();
        assert_eq!(cls.summands.len(), 1);
        assert_eq!(
            (cls.summands[0].tag, cls.summands[0].multiplicity),
            (SummandTag::DualPairE, 1)
        );
        assert!(cls.recomposition_residual(&sum).unwrap() <= 1e-8);
    }
}
