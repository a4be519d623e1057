//! Command handlers. Each one maps parsed arguments and the input text to a
//! [`CommandResult`]; nothing here touches the process streams.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};
use vgp_core::expansion::{partition_function_series_with, weighted_signs_with, SeriesOptions};
use vgp_core::phase_graph::{generate_sign_problem, generate_spf, generate_stoquastic};
use vgp_core::{
    apply_rotation, combine_estimates, decompose_pmr, divdiff_exp, mcmc_weighted_sign, Amplitude, EnergyList,
    Hamiltonian, PhaseGraph, Scheme, SignEstimate, SignedLogValue, Tolerances, VgpReport, WeightedSignReport,
};

use crate::cli::{Command, GlobalOpts, Kind, SchemeArg, SeriesArgs};
use crate::document::{load_hamiltonian, HamiltonianDoc};
use crate::error::{exit, CliError};
use crate::parallel::RayonMap;

/// Outcome of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub stdout_doc: Option<Value>,
    pub stderr_text: String,
}

impl CommandResult {
    fn ok(doc: Value) -> Self {
        Self { exit_code: exit::OK, stdout_doc: Some(doc), stderr_text: String::new() }
    }

    fn failure(err: &CliError) -> Self {
        Self { exit_code: err.exit_code(), stdout_doc: None, stderr_text: format!("error: {err}\n") }
    }
}

/// Runs `command`. `input` supplies the document text and is only called by
/// commands that read one.
pub fn execute(
    global: &GlobalOpts,
    command: &Command,
    input: impl FnOnce() -> Result<String, CliError>,
) -> CommandResult {
    match dispatch(global, command, input) {
        Ok(r) => r,
        Err(e) => CommandResult::failure(&e),
    }
}

fn dispatch(
    g: &GlobalOpts,
    command: &Command,
    input: impl FnOnce() -> Result<String, CliError>,
) -> Result<CommandResult, CliError> {
    let tol = Tolerances { herm: g.tol_herm, zero: g.tol_zero };
    for (name, v) in [("tol-phase", g.tol_phase), ("tol-zero", g.tol_zero), ("tol-herm", g.tol_herm)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("--{name} must be a nonnegative number, got {v}")));
        }
    }
    let pool = || RayonMap::new(g.threads);
    match command {
        Command::Analyze { max_len, max_count } => {
            Ok(CommandResult::ok(analyze(g, &load_hamiltonian(&input()?, &tol)?, *max_len, *max_count)))
        }
        Command::Cure => cure(g, &load_hamiltonian(&input()?, &tol)?),
        Command::Stoquasticize => {
            let h = load_hamiltonian(&input()?, &tol)?.stoquasticize();
            Ok(CommandResult::ok(serde_json::to_value(HamiltonianDoc::sparse_from(&h, None))?))
        }
        Command::Generate { kind, n, density } => generate(*kind, *n, *density, g.seed).map(CommandResult::ok),
        Command::Partition { beta, series } => {
            let h = load_hamiltonian(&input()?, &tol)?;
            let p = decompose_pmr(&h);
            let s = partition_function_series_with(&p, *beta, &series_options(series)?, &pool())?;
            Ok(CommandResult::ok(json!({
                "beta": s.beta,
                "Z": finite_or_null(s.z_log),
                "Z_log": signed_log(s.z_log),
                "q_max": s.q_max,
                "tail_bound": s.tail_bound,
            })))
        }
        Command::Signs { beta, scan, series } => {
            let h = load_hamiltonian(&input()?, &tol)?;
            let p = decompose_pmr(&h);
            let opts = series_options(series)?;
            let map = pool();
            match (beta, scan) {
                (_, Some(spec)) => {
                    let mut out = Vec::new();
                    for b in parse_scan(spec)? {
                        out.push(signs_doc(&weighted_signs_with(&p, b, &opts, &map)?));
                    }
                    Ok(CommandResult::ok(Value::Array(out)))
                }
                (Some(b), None) => Ok(CommandResult::ok(signs_doc(&weighted_signs_with(&p, *b, &opts, &map)?))),
                (None, None) => Err(CliError::Usage("either --beta or --scan is required".into())),
            }
        }
        Command::Sample { scheme, beta, steps, burn_in, chains } => {
            if *chains == 0 {
                return Err(CliError::Usage("--chains must be at least 1".into()));
            }
            let h = load_hamiltonian(&input()?, &tol)?;
            let p = decompose_pmr(&h);
            let scheme = match scheme {
                SchemeArg::Stoq => Scheme::Stoq,
                SchemeArg::Abs => Scheme::Abs,
            };
            let parts: Vec<SignEstimate> = pool().install(|| {
                (0..*chains)
                    .into_par_iter()
                    .map(|i| mcmc_weighted_sign(&p, *beta, scheme, *steps, *burn_in, g.seed.wrapping_add(i)))
                    .collect::<Result<_, _>>()
            })?;
            let est = combine_estimates(&parts)?;
            Ok(CommandResult::ok(json!({
                "scheme": scheme_name(est.scheme),
                "beta": beta,
                "mean": est.mean,
                "stderr": est.stderr,
                "n_samples": est.n_samples,
                "acceptance_rate": est.acceptance_rate,
                "chains": chains,
                "seed": g.seed,
            })))
        }
        Command::Dd => dd(&input()?).map(CommandResult::ok),
    }
}

fn series_options(a: &SeriesArgs) -> Result<SeriesOptions, CliError> {
    if !(a.rel_tol > 0.0 && a.rel_tol < 1.0) {
        return Err(CliError::Usage(format!("--rel-tol must lie in (0, 1), got {}", a.rel_tol)));
    }
    Ok(SeriesOptions { rel_tol: a.rel_tol, budget: a.budget, fixed_order: a.q_max })
}

fn tolerance_doc(g: &GlobalOpts) -> Value {
    json!({ "phase": g.tol_phase, "zero": g.tol_zero, "herm": g.tol_herm })
}

fn report_doc(r: &VgpReport) -> Value {
    json!({
        "is_vgp": r.is_vgp,
        "components": r.components,
        "violations": r.violations.iter().map(|c| json!({ "cycle": c.vertices, "phase": c.phase })).collect::<Vec<_>>(),
        "theta": r.rotation.as_ref().map(|t| t.theta.clone()),
    })
}

fn analyze(g: &GlobalOpts, h: &Hamiltonian, max_len: usize, max_count: usize) -> Value {
    let graph = PhaseGraph::build(h, g.tol_zero);
    let report = graph.is_vgp(g.tol_phase);
    let (cycles, truncated) = graph.chordless_cycles(max_len, max_count);
    let mut by_len: BTreeMap<usize, usize> = BTreeMap::new();
    let mut nonzero = 0usize;
    for c in &cycles {
        *by_len.entry(c.vertices.len()).or_default() += 1;
        if c.phase.abs() > g.tol_phase {
            nonzero += 1;
        }
    }
    let mut doc = report_doc(&report);
    let obj = doc.as_object_mut().expect("object");
    obj.insert("is_stoquastic".into(), json!(h.is_stoquastic(g.tol_zero)));
    obj.insert("dim".into(), json!(h.dim()));
    obj.insert("edges".into(), json!(graph.num_edges()));
    obj.insert(
        "chordless_cycles".into(),
        json!({
            "total": cycles.len(),
            "by_length": by_len.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
            "nonvanishing": nonzero,
            "truncated": truncated,
            "max_len": max_len,
            "max_count": max_count,
        }),
    );
    obj.insert("tolerances".into(), tolerance_doc(g));
    doc
}

fn cure(g: &GlobalOpts, h: &Hamiltonian) -> Result<CommandResult, CliError> {
    let graph = PhaseGraph::build(h, g.tol_zero);
    let report = graph.is_vgp(g.tol_phase);
    let Some(rotation) = report.rotation.clone() else {
        let n = report.violations.len();
        return Ok(CommandResult {
            exit_code: exit::NOT_VGP,
            stdout_doc: Some(report_doc(&report)),
            stderr_text: format!("error: not curable, {n} fundamental cycle(s) carry a nonzero phase\n"),
        });
    };
    let rotated = clear_roundoff(apply_rotation(h, &rotation)?, g.tol_phase, g.tol_zero);
    Ok(CommandResult::ok(json!({
        "theta": rotation.theta,
        "matrix": HamiltonianDoc::sparse_from(&rotated, None),
        "is_stoquastic": rotated.is_stoquastic(g.tol_zero),
        "tolerances": tolerance_doc(g),
    })))
}

fn generate(kind: Kind, n: usize, density: f64, seed: u64) -> Result<Value, CliError> {
    let (h, meta) = match kind {
        Kind::Stoquastic => (generate_stoquastic(n, density, seed)?, json!({ "kind": "stoquastic" })),
        Kind::Spf => {
            let (h, rot) = generate_spf(n, density, seed)?;
            (h, json!({ "kind": "spf", "theta": rot.theta }))
        }
        Kind::SignProblem => {
            let inst = generate_sign_problem(n, density, seed)?;
            let meta = json!({
                "kind": "sign_problem",
                "theta": inst.theta.theta,
                "edge": [inst.edge.0, inst.edge.1],
                "delta": inst.delta,
            });
            (inst.hamiltonian, meta)
        }
    };
    let mut meta = meta;
    let obj = meta.as_object_mut().expect("object");
    obj.insert("n".into(), json!(n));
    obj.insert("density".into(), json!(density));
    obj.insert("seed".into(), json!(seed));
    obj.insert("is_stoquastic".into(), json!(h.is_stoquastic(0.0)));
    Ok(serde_json::to_value(HamiltonianDoc::sparse_from(&h, Some(meta)))?)
}

fn signs_doc(r: &WeightedSignReport) -> Value {
    json!({
        "beta": r.beta,
        "Z": finite_or_null(r.z_true),
        "Z_log": signed_log(r.z_true),
        "q_max": r.q_max,
        "tail_bound": r.tail_bound,
        "sgn_stoq": r.sgn_stoq,
        "sgn_abs": r.sgn_abs,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DdInput {
    beta: f64,
    energies: Vec<f64>,
}

fn dd(text: &str) -> Result<Value, CliError> {
    let DdInput { beta, energies } = serde_json::from_str(text)?;
    let v = divdiff_exp(&EnergyList::new(beta, energies)?);
    let mut doc = json!({ "sign": v.sign, "log_mag": v.log_mag });
    if v.fits_f64() {
        doc["value"] = json!(v.to_f64());
    }
    Ok(doc)
}

/// Parses `b0:b1:steps` into `steps` evenly spaced values from `b0` to `b1`.
pub fn parse_scan(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("--scan expects b0:b1:steps, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [b0, b1, steps] = parts.as_slice() else {
        return Err(bad());
    };
    let b0: f64 = b0.trim().parse().map_err(|_| bad())?;
    let b1: f64 = b1.trim().parse().map_err(|_| bad())?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    if steps == 0 || !b0.is_finite() || !b1.is_finite() {
        return Err(bad());
    }
    if steps == 1 {
        return Ok(vec![b0]);
    }
    Ok((0..steps).map(|k| b0 + (b1 - b0) * k as f64 / (steps - 1) as f64).collect())
}

fn signed_log(v: SignedLogValue) -> Value {
    json!({ "sign": v.sign, "log_mag": if v.sign == 0 { Value::Null } else { json!(v.log_mag) } })
}

fn finite_or_null(v: SignedLogValue) -> Value {
    if v.fits_f64() {
        json!(v.to_f64())
    } else {
        Value::Null
    }
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Stoq => "stoq",
        Scheme::Abs => "abs",
    }
}

/// Drops imaginary parts whose phase is below `tol_phase`; they are
/// round-off left by the rotation.
fn clear_roundoff(h: Hamiltonian, tol_phase: f64, tol_zero: f64) -> Hamiltonian {
    let cleaned: Vec<(usize, usize, Amplitude)> = h
        .upper()
        .map(|((i, j), a)| {
            let im = if a.im.abs() <= tol_phase * a.norm() { 0.0 } else { a.im };
            (i, j, Amplitude::new(a.re, im))
        })
        .chain(h.diagonal().into_iter().enumerate().map(|(i, e)| (i, i, Amplitude::new(e, 0.0))))
        .collect();
    Hamiltonian::from_sparse(h.dim(), &cleaned, &Tolerances { herm: 0.0, zero: tol_zero }).unwrap_or(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_parsing() {
        assert_eq!(parse_scan("0.5:1.5:3").unwrap(), vec![0.5, 1.0, 1.5]);
        assert_eq!(parse_scan("2:3:1").unwrap(), vec![2.0]);
        for bad in ["1:2", "a:2:3", "1:2:0", "1:2:3:4", "1:inf:2"] {
            assert!(parse_scan(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn dd_example() {
        let v = dd(r#"{"beta":1,"energies":[0,1]}"#).unwrap();
        assert_eq!(v["sign"], -1);
        assert!((v["value"].as_f64().unwrap() + 0.6321205588285577).abs() < 1e-12);
    }

    #[test]
    fn dd_out_of_range_omits_value() {
        let v = dd(r#"{"beta":1,"energies":[-1000]}"#).unwrap();
        assert!(v.get("value").is_none());
        assert!((v["log_mag"].as_f64().unwrap() - 1000.0).abs() < 1e-9);
    }
}
