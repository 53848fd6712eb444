use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use quiverkit::decompose::{classify_orthogonal_decomposition, decompose, DecompositionReport};
use quiverkit::flow::{solve_gauge_equation, SolveOptions, StopReason};
use quiverkit::linalg::{self, CMat};
use quiverkit::quiver::{Quiver, Representation, SubspaceTuple};
use quiverkit::search::{
    find_destabilizer, find_isotropic_destabilizer, SearchMode, SearchOptions,
};
use quiverkit::weights::{maximal_weight, orthogonal_weight, OnePS, Weight, COMPONENT_TOL};
use quiverkit::{QuiverError, ValidationReport};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::document::{self, matrix_from_rows, Context, Kind, MatrixRows};
use crate::output::{self, matrix, num};
use crate::{
    BatchCommand, Cli, CliError, Command, ModeArg, Outcome, EXIT_NEGATIVE, EXIT_OK, EXIT_PARSE,
    TOL_ENV,
};

/// Loaded input with its digest.
struct Input {
    digest: String,
    doc: document::QuiverDocument,
    ctx: Context,
}

fn read_input(path: &Path) -> Result<Input, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::semantic(format!("cannot read {}: {e}", path.display())))?;
    let digest = output::digest(&bytes);
    let text = String::from_utf8(bytes).map_err(|_| CliError::parse(1, "input is not UTF-8"))?;
    let doc = document::parse(&text)?;
    let ctx = document::load(&doc);
    Ok(Input { digest, doc, ctx })
}

/// Report body and exit code of a successful command.
struct Finding {
    exit: u8,
    parameters: Value,
    results: Value,
    seed: Option<u64>,
}

fn envelope(command: &str, digest: Option<&str>, f: &Finding) -> Value {
    json!({
        "schema_version": document::SCHEMA_VERSION,
        "command": command,
        "input_digest": digest,
        "seed": f.seed,
        "parameters": f.parameters,
        "results": f.results,
    })
}

fn error_report(command: &str, digest: Option<&str>, e: &CliError) -> Value {
    let kind = match e.exit {
        EXIT_PARSE => "parse",
        _ if e.report.is_some() => "invalid",
        _ => "semantic",
    };
    json!({
        "schema_version": document::SCHEMA_VERSION,
        "command": command,
        "input_digest": digest,
        "error": {
            "kind": kind,
            "message": e.to_string(),
            "line": e.line,
            "violations": e.report.as_ref().map(violations),
        },
    })
}

fn violations(rep: &ValidationReport) -> Value {
    json!(rep
        .violations
        .iter()
        .map(|v| json!({"code": v.code, "message": v.message}))
        .collect::<Vec<_>>())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::semantic(format!("cannot write {}: {e}", path.display())))
}

/// Runs `body` on the loaded file and wraps the result into a report.
fn execute<F>(
    command: &str,
    file: &Path,
    report_path: Option<&PathBuf>,
    timing: bool,
    body: F,
) -> Outcome
where
    F: FnOnce(&Input) -> Result<Finding, CliError>,
{
    let start = Instant::now();
    let input = read_input(file);
    let digest = input.as_ref().ok().map(|i| i.digest.clone());
    let result = input.and_then(|i| body(&i));
    let (exit, mut value, stderr) = match &result {
        Ok(f) => (
            f.exit,
            envelope(command, digest.as_deref(), f),
            String::new(),
        ),
        Err(e) => (
            e.exit,
            error_report(command, digest.as_deref(), e),
            format!("error: {e}\n"),
        ),
    };
    if timing {
        value["timing"] = json!({"seconds": start.elapsed().as_secs_f64()});
    }
    let text = output::to_json(&value) + "\n";
    if let Some(p) = report_path {
        if let Err(e) = write_file(p, &text) {
            return Outcome {
                exit: e.exit,
                stdout: text,
                stderr: format!("error: {e}\n"),
            };
        }
    }
    Outcome {
        exit,
        stdout: text,
        stderr,
    }
}

pub fn dispatch(cli: &Cli) -> Outcome {
    let t = cli.timing;
    match &cli.command {
        Command::Validate { file } => execute("validate", file, None, t, validate),
        Command::BuildDw { file, out } => execute("build-dw", file, None, t, |i| build_dw(i, out)),
        Command::Solve {
            file,
            tol,
            max_iter,
            step,
            seed,
            trace,
            report,
        } => {
            let flags = SolveFlags {
                tol: *tol,
                max_iter: *max_iter,
                step: *step,
                seed: *seed,
                trace: trace.clone(),
            };
            execute("solve", file, report.as_ref(), t, |i| solve(i, &flags))
        }
        Command::Stability {
            file,
            mode,
            isotropic,
            budget,
            seed,
            report,
        } => {
            let flags = StabilityFlags {
                mode: *mode,
                isotropic: *isotropic,
                budget: *budget,
                seed: *seed,
            };
            execute("stability", file, report.as_ref(), t, |i| {
                stability(i, &flags)
            })
        }
        Command::Decompose {
            file,
            orthogonal,
            seed,
            report,
        } => execute("decompose", file, report.as_ref(), t, |i| {
            decompose_cmd(i, *orthogonal, *seed)
        }),
        Command::Weight {
            file,
            chi,
            orthogonal,
            report,
        } => execute("weight", file, report.as_ref(), t, |i| {
            weight(i, chi, *orthogonal)
        }),
        Command::Batch { dir, command } => batch(dir, *command),
    }
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Plain => "plain",
        Kind::Symmetric => "symmetric",
        Kind::Generalized => "generalized",
        Kind::Mixed => "mixed",
    }
}

fn validate(input: &Input) -> Result<Finding, CliError> {
    let ctx = &input.ctx;
    Ok(Finding {
        exit: if ctx.is_valid() {
            EXIT_OK
        } else {
            crate::EXIT_SEMANTIC
        },
        parameters: json!({}),
        results: json!({
            "kind": kind_name(ctx.kind),
            "valid": ctx.is_valid(),
            "violations": violations(&ctx.report),
        }),
        seed: None,
    })
}

fn build_dw(input: &Input, out: &Path) -> Result<Finding, CliError> {
    let ctx = &input.ctx;
    if ctx.kind != Kind::Generalized {
        return Err(CliError::semantic("build-dw needs a generalized block"));
    }
    let doc = document::symmetric_document(ctx)?;
    write_file(out, &(output::to_json(&doc) + "\n"))?;
    Ok(Finding {
        exit: EXIT_OK,
        parameters: json!({"out": out.display().to_string()}),
        results: json!({
            "vertices": doc.vertices,
            "arrows": doc.arrows.iter().map(|a| json!({"id": a.id, "tail": a.tail, "head": a.head, "twist": a.twist})).collect::<Vec<_>>(),
            "dims": doc.dims,
        }),
        seed: Some(ctx.seed),
    })
}

struct SolveFlags {
    tol: Option<f64>,
    max_iter: Option<usize>,
    step: Option<f64>,
    seed: Option<u64>,
    trace: Option<PathBuf>,
}

fn env_tol() -> Result<Option<f64>, CliError> {
    match std::env::var(TOL_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| CliError::semantic(format!("{TOL_ENV} must be a number, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn solve_options(input: &Input, flags: &SolveFlags) -> Result<SolveOptions, CliError> {
    let defaults = SolveOptions::default();
    let file = input.doc.solver.clone().unwrap_or_default();
    let opts = SolveOptions {
        tol: flags
            .tol
            .or(file.tol)
            .or(env_tol()?)
            .unwrap_or(defaults.tol),
        max_iter: flags
            .max_iter
            .or(file.max_iter)
            .unwrap_or(defaults.max_iter),
        step: flags.step.or(file.step).unwrap_or(defaults.step),
    };
    if !(opts.tol > 0.0 && opts.step > 0.0) {
        return Err(CliError::semantic("tol and step must be positive"));
    }
    Ok(opts)
}

/// The document's representation, regenerated when a seed flag overrides
/// the document seed and no representation is inline.
fn representation_for(input: &Input, seed: Option<u64>) -> Result<Representation, CliError> {
    let ctx = &input.ctx;
    match seed {
        Some(s) if s != ctx.seed && input.doc.representation.is_none() => {
            let mut doc = input.doc.clone();
            doc.seed = Some(s);
            document::load(&doc).representation().cloned()
        }
        _ => ctx.representation().cloned(),
    }
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Converged => "converged",
        StopReason::Stationary => "stationary",
        StopReason::LineSearch => "line_search",
        StopReason::MaxIterations => "max_iterations",
    }
}

fn rep_json(r: &Representation) -> Value {
    let q = r.quiver();
    let map: BTreeMap<&str, Value> = q
        .arrows()
        .iter()
        .zip(r.phi())
        .map(|(a, m)| (a.id.as_str(), matrix(m)))
        .collect();
    json!(map)
}

fn per_vertex(q: &Quiver, ms: &[CMat]) -> Value {
    let map: BTreeMap<&str, Value> = q
        .vertices()
        .iter()
        .zip(ms)
        .map(|(v, m)| (v.as_str(), matrix(m)))
        .collect();
    json!(map)
}

fn solve(input: &Input, flags: &SolveFlags) -> Result<Finding, CliError> {
    let ctx = &input.ctx;
    let r = representation_for(input, flags.seed)?;
    let tau = ctx.tau()?;
    let opts = solve_options(input, flags)?;
    let (out, rep) = solve_gauge_equation(&r, tau, &opts)?;
    if let Some(path) = &flags.trace {
        write_file(
            path,
            &output::trace_csv(&rep.residual_trace, &rep.step_trace),
        )?;
    }
    Ok(Finding {
        exit: if rep.converged {
            EXIT_OK
        } else {
            EXIT_NEGATIVE
        },
        parameters: json!({"tol": opts.tol, "max_iter": opts.max_iter, "step": opts.step}),
        results: json!({
            "converged": rep.converged,
            "stop": stop_name(rep.stop),
            "iterations": rep.iterations,
            "initial_residual": num(rep.residual_trace[0]),
            "final_residual": num(rep.final_residual),
            "step_size_used": num(rep.step_size_used),
            "representation": rep_json(&out),
            "gauge": per_vertex(r.quiver(), &rep.gauge.g),
        }),
        seed: Some(flags.seed.unwrap_or(ctx.seed)),
    })
}

struct StabilityFlags {
    mode: ModeArg,
    isotropic: bool,
    budget: usize,
    seed: Option<u64>,
}

fn subspace_json(q: &Quiver, u: &SubspaceTuple) -> Value {
    let dims: BTreeMap<&str, usize> = q
        .vertices()
        .iter()
        .zip(u.dims())
        .map(|(v, k)| (v.as_str(), k))
        .collect();
    json!({"dims": dims, "basis": per_vertex(q, &u.bases)})
}

fn stability(input: &Input, flags: &StabilityFlags) -> Result<Finding, CliError> {
    let ctx = &input.ctx;
    if flags.isotropic && ctx.symmetric.is_none() {
        return Err(CliError::semantic(
            "--isotropic needs a symmetric or generalized block",
        ));
    }
    let r = representation_for(input, flags.seed)?;
    let tau = ctx.tau()?;
    let seed = flags.seed.unwrap_or(ctx.seed);
    let mode = match flags.mode {
        ModeArg::Semi => SearchMode::Semistable,
        ModeArg::Strict => SearchMode::Strict,
    };
    let opts = SearchOptions {
        mode,
        budget: flags.budget,
        seed,
        ..SearchOptions::default()
    };
    let found = match &ctx.symmetric {
        Some((s, c)) if flags.isotropic => find_isotropic_destabilizer(&r, tau, s, c, &opts)?,
        _ => find_destabilizer(&r, tau, &opts)?,
    };
    let witness = found.as_ref().map(|w| {
        let mut v = subspace_json(r.quiver(), &w.candidate.subspace);
        v["theta"] = num(w.theta);
        v["invariance_residual"] = num(w.candidate.invariance_residual);
        v
    });
    Ok(Finding {
        exit: if found.is_some() {
            EXIT_NEGATIVE
        } else {
            EXIT_OK
        },
        parameters: json!({
            "mode": if mode == SearchMode::Semistable { "semi" } else { "strict" },
            "isotropic": flags.isotropic,
            "budget": flags.budget,
        }),
        results: json!({"destabilized": found.is_some(), "witness": witness}),
        seed: Some(seed),
    })
}

fn decomposition_json(r: &Representation, d: &DecompositionReport) -> Result<Value, CliError> {
    let q = r.quiver();
    let summands: Vec<Value> = d
        .summands
        .iter()
        .map(|s| {
            let dims: BTreeMap<&str, usize> = q
                .vertices()
                .iter()
                .zip(&s.rep.dims().n)
                .map(|(v, &k)| (v.as_str(), k))
                .collect();
            json!({
                "tag": s.tag.name(),
                "multiplicity": s.multiplicity,
                "dims": dims,
                "representation": rep_json(&s.rep),
            })
        })
        .collect();
    Ok(json!({
        "summands": summands,
        "change_of_basis": per_vertex(q, &d.change_of_basis.g),
        "recomposition_residual": num(d.recomposition_residual(r)?),
    }))
}

fn decompose_cmd(input: &Input, orthogonal: bool, seed: Option<u64>) -> Result<Finding, CliError> {
    let ctx = &input.ctx;
    if orthogonal && ctx.symmetric.is_none() {
        return Err(CliError::semantic(
            "--orthogonal needs a symmetric or generalized block",
        ));
    }
    let r = representation_for(input, seed)?;
    let seed = seed.unwrap_or(ctx.seed);
    let result = match &ctx.symmetric {
        Some((s, c)) if orthogonal => classify_orthogonal_decomposition(&r, s, c, seed),
        _ => decompose(&r, seed),
    };
    let parameters = json!({"orthogonal": orthogonal});
    match result {
        Ok(d) => Ok(Finding {
            exit: EXIT_OK,
            parameters,
            results: decomposition_json(&r, &d)?,
            seed: Some(seed),
        }),
        Err(e @ (QuiverError::NonSemisimple(_) | QuiverError::DegenerateForm(_))) => Ok(Finding {
            exit: EXIT_NEGATIVE,
            parameters,
            results: json!({"diagnostic": e.to_string()}),
            seed: Some(seed),
        }),
        Err(e) => Err(e.into()),
    }
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ChiFile {
    weights: BTreeMap<String, Vec<i64>>,
    #[serde(default)]
    basis: BTreeMap<String, MatrixRows>,
}

fn chi_syntax(msg: impl Into<String>) -> CliError {
    CliError::parse(1, msg)
}

/// Per-vertex weights from `"v1=0;v2=-1,2"` or a JSON file.
pub fn parse_chi(arg: &str, q: &Quiver, n: &[usize]) -> Result<OnePS, CliError> {
    let path = Path::new(arg);
    let (weights, basis) = if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::semantic(format!("cannot read {arg}: {e}")))?;
        let f: ChiFile =
            serde_json::from_str(&text).map_err(|e| CliError::parse(e.line(), e.to_string()))?;
        (f.weights, f.basis)
    } else {
        let mut weights = BTreeMap::new();
        for part in arg.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (v, ws) = part
                .split_once('=')
                .ok_or_else(|| chi_syntax(format!("expected vertex=weights, got {part:?}")))?;
            let ws: Vec<i64> = ws
                .split(',')
                .map(|w| {
                    w.trim()
                        .parse::<i64>()
                        .map_err(|_| chi_syntax(format!("weight {w:?} is not an integer")))
                })
                .collect::<Result<_, _>>()?;
            weights.insert(v.trim().to_string(), ws);
        }
        (weights, BTreeMap::new())
    };
    for v in weights.keys().chain(basis.keys()) {
        if q.vertex_index(v).is_none() {
            return Err(CliError::semantic(format!(
                "chi references unknown vertex {v:?}"
            )));
        }
    }
    let mut w = Vec::new();
    let mut b = Vec::new();
    for (i, v) in q.vertices().iter().enumerate() {
        let wi = weights.get(v).cloned().unwrap_or_else(|| vec![0; n[i]]);
        let wi = if wi.len() == 1 && n[i] > 1 {
            vec![wi[0]; n[i]]
        } else {
            wi
        };
        if wi.len() != n[i] {
            return Err(CliError::semantic(format!(
                "vertex {v:?} needs {} weights, got {}",
                n[i],
                wi.len()
            )));
        }
        w.push(wi);
        b.push(match basis.get(v) {
            Some(rows) => matrix_from_rows(rows, n[i], n[i]).ok_or_else(|| {
                CliError::semantic(format!("basis at {v:?} must be {0} × {0}", n[i]))
            })?,
            None => linalg::identity(n[i]),
        });
    }
    OnePS::new(b, w).map_err(CliError::from)
}

fn weight(input: &Input, chi: &str, orthogonal: bool) -> Result<Finding, CliError> {
    let ctx = &input.ctx;
    if orthogonal && ctx.symmetric.is_none() {
        return Err(CliError::semantic(
            "--orthogonal needs a symmetric or generalized block",
        ));
    }
    let r = ctx.representation()?;
    let tau = ctx.tau()?;
    let chi_ps = parse_chi(chi, r.quiver(), &r.dims().n)?;
    let w = match &ctx.symmetric {
        Some((s, c)) if orthogonal => orthogonal_weight(r, &chi_ps, tau, s, c, COMPONENT_TOL)?,
        _ => maximal_weight(r, &chi_ps, tau, COMPONENT_TOL),
    };
    let value = match w {
        Weight::Finite(x) => num(x),
        Weight::Infinite => json!("INF"),
    };
    let chi_weights: BTreeMap<&str, &Vec<i64>> = r
        .quiver()
        .vertices()
        .iter()
        .map(String::as_str)
        .zip(&chi_ps.w)
        .collect();
    Ok(Finding {
        exit: EXIT_OK,
        parameters: json!({"chi": chi_weights, "orthogonal": orthogonal}),
        results: json!({"weight": value}),
        seed: None,
    })
}

fn batch(dir: &Path, command: BatchCommand) -> Outcome {
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) => {
            return Outcome {
                exit: crate::EXIT_SEMANTIC,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            };
        }
    };
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let runs: Vec<(String, Outcome)> = files
        .par_iter()
        .map(|f| {
            let name = f
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let out = match command {
                BatchCommand::Validate => execute("validate", f, None, false, validate),
                BatchCommand::Solve => {
                    let flags = SolveFlags {
                        tol: None,
                        max_iter: None,
                        step: None,
                        seed: None,
                        trace: None,
                    };
                    execute("solve", f, None, false, |i| solve(i, &flags))
                }
                BatchCommand::Stability => {
                    let flags = StabilityFlags {
                        mode: ModeArg::Semi,
                        isotropic: false,
                        budget: 256,
                        seed: None,
                    };
                    execute("stability", f, None, false, |i| stability(i, &flags))
                }
                BatchCommand::Decompose => execute("decompose", f, None, false, |i| {
                    decompose_cmd(i, false, None)
                }),
            };
            (name, out)
        })
        .collect();
    let exit = runs.iter().map(|(_, o)| o.exit).max().unwrap_or(EXIT_OK);
    let items: Vec<Value> = runs
        .iter()
        .map(|(name, o)| {
            let report: Value = serde_json::from_str(&o.stdout).unwrap_or(Value::Null);
            json!({"file": name, "exit": o.exit, "report": report})
        })
        .collect();
    let value =
        json!({"schema_version": document::SCHEMA_VERSION, "command": "batch", "runs": items});
    Outcome {
        exit,
        stdout: output::to_json(&value) + "\n",
        stderr: String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_chi_parses_and_broadcasts() {
        let q = Quiver::from_edges(&["v1", "v2"], &[("a", "v1", "v2")]);
        let chi = parse_chi("v1=0; v2=-1", &q, &[1, 2]).unwrap();
        assert_eq!(chi.w, vec![vec![0], vec![-1, -1]]);
        let err = parse_chi("v1:0", &q, &[1, 1]).unwrap_err();
        assert_eq!(err.exit, EXIT_PARSE);
        assert_eq!(
            parse_chi("v9=1", &q, &[1, 1]).unwrap_err().exit,
            crate::EXIT_SEMANTIC
        );
    }
}
