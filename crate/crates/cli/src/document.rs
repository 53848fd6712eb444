//! The quiver document: a JSON file describing a quiver, dimensions, an
//! optional representation, stability parameters and at most one of a
//! symmetric, generalized or mixed block.

use std::collections::BTreeMap;
use std::sync::Arc;

use quiverkit::generalized::{
    build_symmetric_quiver, embed_into, random_coords, validate_generalized, GeneralizedQuiverSpec,
    Summand, SummandKind,
};
use quiverkit::linalg::{self, CMat};
use quiverkit::mixed::{validate_mixed_setting, ArrowSymbol, GroupSymbol, MixedQuiverSetting};
use quiverkit::quiver::{
    random_representation, validate_quiver, Arrow, DimensionVector, Quiver, Representation,
};
use quiverkit::symmetric::{
    standard_form, validate_form, validate_symmetric, BlockForm, SymmetricStructure,
};
use quiverkit::ValidationReport;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A complex matrix as rows of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuiverDocument {
    pub schema_version: u32,
    #[serde(default)]
    pub vertices: Vec<String>,
    #[serde(default)]
    pub arrows: Vec<ArrowEntry>,
    #[serde(default)]
    pub dims: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representation: Option<BTreeMap<String, MatrixRows>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<SymmetricBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generalized: Option<GeneralizedBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed: Option<MixedBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowEntry {
    pub id: String,
    pub tail: String,
    pub head: String,
    #[serde(default = "one")]
    pub twist: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Orthogonal,
    Symplectic,
}

/// σ maps may list each pair in one direction only; unlisted ids are fixed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetricBlock {
    #[serde(default)]
    pub sigma_vertices: BTreeMap<String, String>,
    #[serde(default)]
    pub sigma_arrows: BTreeMap<String, String>,
    pub form: FormKind,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub eps_v: BTreeMap<String, i8>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub eps_a: BTreeMap<String, i8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharEntry {
    pub label: String,
    pub dim: usize,
}

/// `args` are 1-based positions in the paired (`i`) or self-inverse (`j`)
/// character lists, in the order the kind names them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummandEntry {
    pub kind: String,
    pub args: Vec<usize>,
    #[serde(default = "one")]
    pub twist: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralizedBlock {
    /// `"O"` or `"Sp"`.
    pub group: String,
    #[serde(default)]
    pub paired_chars: Vec<CharEntry>,
    #[serde(default)]
    pub selfinv_chars: Vec<CharEntry>,
    #[serde(default)]
    pub summands: Vec<SummandEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixedBlock {
    pub g_sym: BTreeMap<String, String>,
    pub h_sym: BTreeMap<String, String>,
    #[serde(default)]
    pub sigma_vertices: BTreeMap<String, String>,
    #[serde(default)]
    pub sigma_arrows: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub step: Option<f64>,
}

/// Parses the raw text. Syntax and schema errors carry the line number.
pub fn parse(text: &str) -> Result<QuiverDocument, CliError> {
    let doc: QuiverDocument =
        serde_json::from_str(text).map_err(|e| CliError::parse(e.line(), e.to_string()))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(CliError::parse(
            1,
            format!("unsupported schema_version {}", doc.schema_version),
        ));
    }
    Ok(doc)
}

pub fn matrix_from_rows(rows: &MatrixRows, nrows: usize, ncols: usize) -> Option<CMat> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(CMat::from_fn(nrows, ncols, |i, j| {
        linalg::c(rows[i][j][0], rows[i][j][1])
    }))
}

pub fn matrix_to_rows(m: &CMat) -> MatrixRows {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Which of the mutually exclusive blocks the document carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Plain,
    Symmetric,
    Generalized,
    Mixed,
}

/// A loaded document, resolved to indices.
#[derive(Debug, Clone)]
pub struct Context {
    pub kind: Kind,
    pub quiver: Arc<Quiver>,
    pub dims: DimensionVector,
    /// `None` when the document neither lists a representation nor can
    /// generate one (invalid shapes).
    pub rep: Option<Representation>,
    pub tau: Option<Vec<f64>>,
    pub symmetric: Option<(SymmetricStructure, BlockForm)>,
    pub generalized: Option<GeneralizedQuiverSpec>,
    pub mixed: Option<MixedQuiverSetting>,
    pub seed: u64,
    pub report: ValidationReport,
}

impl Context {
    pub fn is_valid(&self) -> bool {
        self.report.is_valid()
    }

    pub fn require_valid(&self) -> Result<(), CliError> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(CliError::invalid(self.report.clone()))
        }
    }

    pub fn representation(&self) -> Result<&Representation, CliError> {
        self.require_valid()?;
        self.rep
            .as_ref()
            .ok_or_else(|| CliError::semantic("no representation available"))
    }

    pub fn tau(&self) -> Result<&[f64], CliError> {
        self.tau
            .as_deref()
            .ok_or_else(|| CliError::semantic("tau is required for this command"))
    }
}

fn sigma_indices(
    ids: &[String],
    map: &BTreeMap<String, String>,
    what: &str,
    report: &mut ValidationReport,
) -> Vec<usize> {
    let index = |s: &str| ids.iter().position(|v| v == s);
    let mut sigma: Vec<usize> = (0..ids.len()).collect();
    for (a, b) in map {
        match (index(a), index(b)) {
            (Some(i), Some(j)) => {
                if sigma[i] != i && sigma[i] != j {
                    report.push("sigma-conflict", format!("{what} {a:?} is mapped twice"));
                }
                sigma[i] = j;
                if !map.contains_key(b) {
                    sigma[j] = i;
                }
            }
            _ => report.push(
                "unknown-id",
                format!("σ references unknown {what} {a:?} or {b:?}"),
            ),
        }
    }
    sigma
}

fn summand_kind(
    entry: &SummandEntry,
    k: usize,
    report: &mut ValidationReport,
) -> Option<SummandKind> {
    use SummandKind::*;
    let args: Vec<usize> = entry.args.iter().map(|&a| a.wrapping_sub(1)).collect();
    if entry.args.contains(&0) {
        report.push("summand-args", format!("summand {k}: indices are 1-based"));
        return None;
    }
    let arity = |n: usize, report: &mut ValidationReport| {
        if args.len() != n {
            report.push(
                "summand-args",
                format!("summand {k} ({}) takes {n} indices", entry.kind),
            );
            false
        } else {
            true
        }
    };
    let kind = match entry.kind.as_str() {
        "ALT_V" => arity(1, report).then(|| AltV(args[0])),
        "ALT_Vdual" => arity(1, report).then(|| AltVdual(args[0])),
        "END_E" => arity(1, report).then(|| EndE(args[0])),
        "ALT_W" => arity(1, report).then(|| AltW(args[0])),
        "V_V" => arity(2, report).then(|| VV(args[0], args[1])),
        "Vdual_V" => arity(2, report).then(|| VdualV(args[0], args[1])),
        "V_Vdual" => arity(2, report).then(|| VVdual(args[0], args[1])),
        "W_W" => arity(2, report).then(|| WW(args[0], args[1])),
        "V_W" => arity(2, report).then(|| VW(args[0], args[1])),
        "Vdual_W" => arity(2, report).then(|| VdualW(args[0], args[1])),
        other => {
            report.push(
                "summand-kind",
                format!("summand {k}: unknown kind {other:?}"),
            );
            None
        }
    };
    kind
}

fn generalized_spec(
    block: &GeneralizedBlock,
    report: &mut ValidationReport,
) -> Option<GeneralizedQuiverSpec> {
    let group_sign = match block.group.as_str() {
        "O" => 1,
        "Sp" => -1,
        other => {
            report.push(
                "group-sign",
                format!("group must be \"O\" or \"Sp\", got {other:?}"),
            );
            return None;
        }
    };
    let mut summands = Vec::new();
    for (k, e) in block.summands.iter().enumerate() {
        if let Some(kind) = summand_kind(e, k, report) {
            summands.push(Summand::twisted(kind, e.twist));
        }
    }
    if !report.is_valid() {
        return None;
    }
    Some(GeneralizedQuiverSpec {
        group_sign,
        paired_chars: block
            .paired_chars
            .iter()
            .map(|c| (c.label.clone(), c.dim))
            .collect(),
        selfinv_chars: block
            .selfinv_chars
            .iter()
            .map(|c| (c.label.clone(), c.dim))
            .collect(),
        summands,
    })
}

fn resolve_dims(doc: &QuiverDocument, report: &mut ValidationReport) -> DimensionVector {
    for v in doc.dims.keys() {
        if !doc.vertices.contains(v) {
            report.push(
                "unknown-vertex",
                format!("dims references unknown vertex {v:?}"),
            );
        }
    }
    let n = doc
        .vertices
        .iter()
        .map(|v| match doc.dims.get(v) {
            Some(&k) => k,
            None => {
                report.push(
                    "missing-dim",
                    format!("no dimension given for vertex {v:?}"),
                );
                0
            }
        })
        .collect();
    DimensionVector::new(n, doc.arrows.iter().map(|a| a.twist).collect())
}

fn resolve_tau(
    tau: &BTreeMap<String, f64>,
    vertices: &[String],
    report: &mut ValidationReport,
) -> Vec<f64> {
    for v in tau.keys() {
        if !vertices.contains(v) {
            report.push(
                "unknown-vertex",
                format!("tau references unknown vertex {v:?}"),
            );
        }
    }
    vertices
        .iter()
        .map(|v| tau.get(v).copied().unwrap_or(0.0))
        .collect()
}

fn inline_representation(
    q: &Arc<Quiver>,
    d: &DimensionVector,
    rows: &BTreeMap<String, MatrixRows>,
    report: &mut ValidationReport,
) -> Option<Representation> {
    for id in rows.keys() {
        if q.arrow_index(id).is_none() {
            report.push(
                "unknown-arrow",
                format!("representation references unknown arrow {id:?}"),
            );
        }
    }
    let mut phi = Vec::new();
    for (a, arrow) in q.arrows().iter().enumerate() {
        let (r, c) = (d.n[q.head(a)], d.n[q.tail(a)] * d.m[a]);
        match rows.get(&arrow.id) {
            None if r * c == 0 => phi.push(linalg::zeros(r, c)),
            None => {
                report.push(
                    "missing-map",
                    format!("no matrix given for arrow {:?}", arrow.id),
                );
                return None;
            }
            Some(m) => match matrix_from_rows(m, r, c) {
                Some(m) => phi.push(m),
                None => {
                    report.push(
                        "map-shape",
                        format!("matrix for arrow {:?} must be {r} × {c}", arrow.id),
                    );
                    return None;
                }
            },
        }
    }
    Representation::new(q.clone(), d.clone(), phi).ok()
}

/// Resolves ids, runs every validator relevant to the document's kind, and
/// builds the representation (inline, or seeded when absent).
pub fn load(doc: &QuiverDocument) -> Context {
    let mut report = ValidationReport::new();
    let seed = doc.seed.unwrap_or(0);
    let blocks = [
        doc.symmetric.is_some(),
        doc.generalized.is_some(),
        doc.mixed.is_some(),
    ];
    if blocks.iter().filter(|&&b| b).count() > 1 {
        report.push(
            "exclusive-blocks",
            "at most one of symmetric, generalized and mixed may be present",
        );
    }
    if let Some(block) = &doc.generalized {
        return load_generalized(doc, block, report, seed);
    }

    let quiver = Arc::new(Quiver::new(
        doc.vertices.clone(),
        doc.arrows
            .iter()
            .map(|a| Arrow::new(&a.id, &a.tail, &a.head))
            .collect(),
    ));
    let dims = resolve_dims(doc, &mut report);
    report.extend(validate_quiver(&quiver, &dims));
    let tau = doc
        .tau
        .as_ref()
        .map(|t| resolve_tau(t, &doc.vertices, &mut report));
    let arrow_ids: Vec<String> = doc.arrows.iter().map(|a| a.id.clone()).collect();

    let mut symmetric = None;
    let mut kind = Kind::Plain;
    if let Some(block) = &doc.symmetric {
        kind = Kind::Symmetric;
        let sv = sigma_indices(&doc.vertices, &block.sigma_vertices, "vertex", &mut report);
        let sa = sigma_indices(&arrow_ids, &block.sigma_arrows, "arrow", &mut report);
        let sign = if block.form == FormKind::Orthogonal {
            1
        } else {
            -1
        };
        let eps_v = lookup_signs(&doc.vertices, &block.eps_v, "vertex", &mut report);
        let eps_a = lookup_signs(&arrow_ids, &block.eps_a, "arrow", &mut report);
        let s = SymmetricStructure::new(sv, sa, sign).with_eps(eps_v, eps_a);
        if report.is_valid() {
            let sym_report = validate_symmetric(&quiver, &dims, &s);
            if sym_report.is_valid() {
                match standard_form(&quiver, &dims, &s) {
                    Ok(c) => {
                        report.extend(validate_form(&dims, &s, &c));
                        symmetric = Some((s, c));
                    }
                    Err(e) => report.push("form", e.to_string()),
                }
            } else {
                report.extend(sym_report);
            }
        }
    }

    let mut mixed = None;
    if let Some(block) = &doc.mixed {
        kind = Kind::Mixed;
        mixed = mixed_setting(doc, block, &quiver, &dims, &arrow_ids, &mut report);
        if let Some(ms) = &mixed {
            report.extend(validate_mixed_setting(ms));
        }
    }

    let rep = if !report.is_valid() {
        None
    } else if let Some(rows) = &doc.representation {
        inline_representation(&quiver, &dims, rows, &mut report)
    } else {
        random_representation(quiver.clone(), dims.clone(), seed).ok()
    };
    Context {
        kind,
        quiver,
        dims,
        rep,
        tau,
        symmetric,
        generalized: None,
        mixed,
        seed,
        report,
    }
}

fn lookup_signs(
    ids: &[String],
    map: &BTreeMap<String, i8>,
    what: &str,
    report: &mut ValidationReport,
) -> Vec<i8> {
    for k in map.keys() {
        if !ids.contains(k) {
            report.push("unknown-id", format!("sign given for unknown {what} {k:?}"));
        }
    }
    ids.iter()
        .map(|v| map.get(v).copied().unwrap_or(1))
        .collect()
}

fn mixed_setting(
    doc: &QuiverDocument,
    block: &MixedBlock,
    quiver: &Arc<Quiver>,
    dims: &DimensionVector,
    arrow_ids: &[String],
    report: &mut ValidationReport,
) -> Option<MixedQuiverSetting> {
    let mut g_sym = Vec::new();
    for v in &doc.vertices {
        let sym = block.g_sym.get(v).map(String::as_str).unwrap_or("GL");
        match GroupSymbol::parse(sym) {
            Some(g) => g_sym.push(g),
            None => report.push(
                "mixed-symbol",
                format!("unknown group symbol {sym:?} at vertex {v:?}"),
            ),
        }
    }
    let mut h_sym = Vec::new();
    for a in arrow_ids {
        let sym = block.h_sym.get(a).map(String::as_str).unwrap_or("M");
        match ArrowSymbol::parse(sym) {
            Some(h) => h_sym.push(h),
            None => report.push(
                "mixed-symbol",
                format!("unknown arrow symbol {sym:?} at arrow {a:?}"),
            ),
        }
    }
    for k in block.g_sym.keys() {
        if !doc.vertices.contains(k) {
            report.push(
                "unknown-vertex",
                format!("group symbol for unknown vertex {k:?}"),
            );
        }
    }
    for k in block.h_sym.keys() {
        if !arrow_ids.contains(k) {
            report.push(
                "unknown-arrow",
                format!("arrow symbol for unknown arrow {k:?}"),
            );
        }
    }
    let sigma_v = sigma_indices(&doc.vertices, &block.sigma_vertices, "vertex", report);
    let sigma_a = sigma_indices(arrow_ids, &block.sigma_arrows, "arrow", report);
    if !report.is_valid() {
        return None;
    }
    Some(MixedQuiverSetting {
        quiver: quiver.clone(),
        n: dims.n.clone(),
        g_sym,
        h_sym,
        sigma_v,
        sigma_a,
    })
}

fn load_generalized(
    doc: &QuiverDocument,
    block: &GeneralizedBlock,
    mut report: ValidationReport,
    seed: u64,
) -> Context {
    let empty = || {
        (
            Arc::new(Quiver::new(vec![], vec![])),
            DimensionVector::new(vec![], vec![]),
        )
    };
    let gq = generalized_spec(block, &mut report);
    let gq = match gq {
        Some(g) => {
            report.extend(validate_generalized(&g));
            Some(g)
        }
        None => None,
    };
    let built = match (&gq, report.is_valid()) {
        (Some(g), true) => match build_symmetric_quiver(g) {
            Ok(b) => Some(b),
            Err(e) => {
                report.push("generalized", e.to_string());
                None
            }
        },
        _ => None,
    };
    let Some(b) = built else {
        let (quiver, dims) = empty();
        return Context {
            kind: Kind::Generalized,
            quiver,
            dims,
            rep: None,
            tau: None,
            symmetric: None,
            generalized: gq,
            mixed: None,
            seed,
            report,
        };
    };
    let gq = gq.expect("built from a spec");
    let vertices = b.quiver.vertices().to_vec();
    let tau = doc
        .tau
        .as_ref()
        .map(|t| resolve_tau(t, &vertices, &mut report));
    let rep = if let Some(rows) = &doc.representation {
        inline_representation(&b.quiver, &b.dims, rows, &mut report)
    } else {
        random_coords(&gq, seed)
            .and_then(|coords| embed_into(&gq, &b, &coords))
            .ok()
    };
    Context {
        kind: Kind::Generalized,
        quiver: b.quiver.clone(),
        dims: b.dims.clone(),
        rep,
        tau,
        symmetric: Some((b.structure.clone(), b.form.clone())),
        generalized: Some(gq),
        mixed: None,
        seed,
        report,
    }
}

/// The symmetric document produced from a generalized one, with a seeded
/// structured representation attached.
pub fn symmetric_document(ctx: &Context) -> Result<QuiverDocument, CliError> {
    let gq = ctx
        .generalized
        .as_ref()
        .ok_or_else(|| CliError::semantic("document has no generalized block"))?;
    ctx.require_valid()?;
    let b = build_symmetric_quiver(gq).map_err(CliError::from)?;
    let q = &b.quiver;
    let s = &b.structure;
    let vertices = q.vertices().to_vec();
    let arrows: Vec<ArrowEntry> = q
        .arrows()
        .iter()
        .enumerate()
        .map(|(a, ar)| ArrowEntry {
            id: ar.id.clone(),
            tail: ar.tail.clone(),
            head: ar.head.clone(),
            twist: b.dims.m[a],
        })
        .collect();
    let dims = vertices
        .iter()
        .cloned()
        .zip(b.dims.n.iter().copied())
        .collect();
    let sigma_vertices = (0..vertices.len())
        .filter(|&i| s.sigma_v[i] > i)
        .map(|i| (vertices[i].clone(), vertices[s.sigma_v[i]].clone()))
        .collect();
    let sigma_arrows = (0..arrows.len())
        .filter(|&a| s.sigma_a[a] > a)
        .map(|a| (arrows[a].id.clone(), arrows[s.sigma_a[a]].id.clone()))
        .collect();
    let rep = ctx
        .rep
        .as_ref()
        .ok_or_else(|| CliError::semantic("no representation available"))?;
    let representation = arrows
        .iter()
        .zip(rep.phi())
        .map(|(a, m)| (a.id.clone(), matrix_to_rows(m)))
        .collect();
    Ok(QuiverDocument {
        schema_version: SCHEMA_VERSION,
        vertices,
        arrows,
        dims,
        representation: Some(representation),
        tau: None,
        symmetric: Some(SymmetricBlock {
            sigma_vertices,
            sigma_arrows,
            form: if s.form_sign == 1 {
                FormKind::Orthogonal
            } else {
                FormKind::Symplectic
            },
            eps_v: BTreeMap::new(),
            eps_a: BTreeMap::new(),
        }),
        generalized: None,
        mixed: None,
        solver: None,
        seed: Some(ctx.seed),
    })
}
