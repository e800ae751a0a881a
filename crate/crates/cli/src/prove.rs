use std::path::{Path, PathBuf};

use clap::Args;
use liftlab::calibration::{CONSTANTS_VERSION, CP_STAR_BITS};
use liftlab::cp::{replay, Context, CpMetrics, CpProof, LinearInequality};
use liftlab::gen::{eq_linear_spec, gen_refutation_lifted_pebbling_split, gen_treelike_semantic, lifted_pebbling_cnf, GenMetrics};
use liftlab::search::extract_protocol;
use serde_json::{json, Value};

use crate::util::{emit, fail, load_cnf, load_dag, read, write_atomic, CliError};

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("generator").required(true).args(["treelike", "coding"])))]
pub struct ProveArgs {
    /// DAG file whose lifted pebbling formula is refuted.
    dag: PathBuf,
    /// Tree-like semantic refutation with equality gadgets.
    #[arg(long)]
    treelike: bool,
    /// Constant-space refutation that codes predecessors into one bundle.
    #[arg(long)]
    coding: bool,
    #[arg(long, default_value_t = 1)]
    q: usize,
    /// Bundle width for --coding; defaults to max in-degree + 1.
    #[arg(long)]
    k: Option<usize>,
    /// Number of bundles for --coding.
    #[arg(long, default_value_t = 1)]
    chunks: usize,
    /// Also extract and check the locally real protocol (--treelike only).
    #[arg(long, requires = "treelike")]
    protocol: bool,
    /// Output directory; files are named after the DAG and generator.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn metrics_json(m: &GenMetrics) -> Value {
    json!({
        "generator": m.generator,
        "length": m.length,
        "line_space": m.line_space,
        "coeff_bits": m.coeff_bits,
        "n": m.n,
        "q": m.q,
        "k": m.k,
        "constants_version": m.constants_version,
    })
}

pub fn run_prove(a: ProveArgs) -> Result<(), CliError> {
    if a.q == 0 || a.q > 8 {
        return Err(CliError::Usage("--q must be between 1 and 8".into()));
    }
    let dag = load_dag(&a.dag)?;
    let spec = eq_linear_spec(a.q);
    let lifted = lifted_pebbling_cnf(&dag, &spec).map_err(fail)?;
    let (generator, k, proof) = if a.treelike {
        ("treelike_semantic", 0, gen_treelike_semantic(&dag, a.q).map_err(fail)?)
    } else {
        let k = a.k.unwrap_or(dag.max_indegree() + 1);
        ("lifted_pebbling", k, gen_refutation_lifted_pebbling_split(&dag, &spec, k, a.chunks).map_err(fail)?)
    };
    // Self-check: the written proof must replay against the written formula.
    let cnf_text = lifted.cnf.to_dimacs();
    let proof_text = proof.to_text();
    let reparsed = CpProof::parse(&proof_text).map_err(fail)?;
    let cnf = liftlab::Cnf::parse_dimacs(&cnf_text).map_err(fail)?;
    let metrics = replay(&Context::from_cnf(&cnf), &reparsed).map_err(|e| fail(format!("generated proof does not verify: {e}")))?.metrics;
    let gm = GenMetrics {
        generator: generator.into(),
        length: metrics.length,
        line_space: metrics.line_space,
        coeff_bits: metrics.coeff_bits,
        n: dag.n(),
        q: a.q,
        k,
        constants_version: CONSTANTS_VERSION,
    };
    let stem = a.dag.file_stem().map_or("proof".into(), |s| s.to_string_lossy().into_owned());
    let stem = format!("{stem}_{generator}_q{}", a.q);
    let cnf_path = a.out.join(format!("{stem}.cnf"));
    let proof_path = a.out.join(format!("{stem}.proof"));
    let sidecar = a.out.join(format!("{stem}.proof.json"));
    write_atomic(&cnf_path, &cnf_text)?;
    write_atomic(&proof_path, &proof_text)?;
    write_atomic(&sidecar, &(serde_json::to_string_pretty(&metrics_json(&gm)).unwrap() + "\n"))?;
    let mut summary = json!({
        "command": "prove",
        "cnf": cnf_path.display().to_string(),
        "proof": proof_path.display().to_string(),
        "metrics": metrics_json(&gm),
    });
    if a.protocol {
        let p = extract_protocol(&cnf, &reparsed).map_err(fail)?;
        let path = a.out.join(format!("{stem}.protocol"));
        write_atomic(&path, &p.to_text())?;
        summary["protocol"] = json!({ "path": path.display().to_string(), "nodes": p.num_nodes(), "depth": p.depth() });
    }
    emit(&summary, None)
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("axiom_source").required(true).args(["cnf", "axioms"])))]
pub struct VerifyArgs {
    proof: PathBuf,
    /// DIMACS formula whose clauses are the axioms.
    #[arg(long)]
    cnf: Option<PathBuf>,
    /// One inequality per line, e.g. `1*x0 -2*x3 >= -1`.
    #[arg(long)]
    axioms: Option<PathBuf>,
    /// Coefficient bit bound for the CP* flag.
    #[arg(long, default_value_t = CP_STAR_BITS)]
    beta: u64,
    /// Metrics sidecar to compare against; `<proof>.json` is used when present.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_axioms(path: &Path) -> Result<Context, CliError> {
    let mut axioms = Vec::new();
    for (i, line) in read(path)?.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        axioms.push(LinearInequality::parse(line).map_err(|m| fail(format!("{}:{}: {m}", path.display(), i + 1)))?);
    }
    Ok(Context::from_inequalities(0, axioms))
}

fn compare_sidecar(path: &Path, m: &CpMetrics) -> Result<Value, CliError> {
    let v: Value = serde_json::from_str(&read(path)?).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    let mut mismatches = Vec::new();
    for (key, got) in [("length", m.length as u64), ("line_space", m.line_space as u64), ("coeff_bits", m.coeff_bits)] {
        if v.get(key).and_then(Value::as_u64) != Some(got) {
            mismatches.push(format!("{key}: sidecar {} vs replay {got}", v.get(key).unwrap_or(&Value::Null)));
        }
    }
    Ok(json!({ "path": path.display().to_string(), "matches": mismatches.is_empty(), "mismatches": mismatches }))
}

pub fn run_verify(a: VerifyArgs) -> Result<(), CliError> {
    let ctx = match (&a.cnf, &a.axioms) {
        (Some(c), _) => Context::from_cnf(&load_cnf(c)?),
        (None, Some(p)) => load_axioms(p)?,
        (None, None) => unreachable!("clap requires an axiom source"),
    };
    let proof = CpProof::parse(&read(&a.proof)?).map_err(|e| fail(format!("{}: {e}", a.proof.display())))?;
    let m = match replay(&ctx, &proof) {
        Ok(r) => r.metrics,
        Err(e) => {
            emit(&json!({ "command": "verify", "valid": false, "error": e.to_string() }), a.out.as_deref())?;
            return Err(fail(format!("verification failed: {e}")));
        }
    };
    let mut report = json!({
        "command": "verify",
        "valid": true,
        "length": m.length,
        "line_space": m.line_space,
        "coeff_bits": m.coeff_bits,
        "beta": a.beta,
        "cp_star": m.cp_star(a.beta),
    });
    let sidecar = a.sidecar.clone().or_else(|| {
        let p = PathBuf::from(format!("{}.json", a.proof.display()));
        p.exists().then_some(p)
    });
    let mut ok = true;
    if let Some(s) = sidecar {
        let cmp = compare_sidecar(&s, &m)?;
        ok = cmp["matches"] == true;
        report["sidecar"] = cmp;
    }
    emit(&report, a.out.as_deref())?;
    if !ok {
        return Err(fail("metrics differ from the sidecar"));
    }
    Ok(())
}
