use std::path::{Path, PathBuf};

use clap::Args;
use liftlab::cnf::pebbling_formula;
use liftlab::ns::{certificate_at_degree, find_design, gap_complexity, ns_degree, verify_certificate, verify_design};
use liftlab::pebbling::rpeb;
use liftlab::search::{dt_depth, dt_depth_pebbling, pdt_to_ns, ParityTree};
use liftlab::{Cnf, Dag};
use serde_json::{json, Map, Value};

use crate::util::{emit, load_instance, par_map, Budget, CliError, Instance};

/// `--all` runs the gap solver only up to this many variables.
const GAP_AUTO_VARS: usize = 12;
/// The exhaustive decision-tree solver is skipped above this many variables.
const DT_AUTO_VARS: usize = 20;

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// DAG files (`dag <n>` header) or DIMACS CNF files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// rpeb, dt, pdt, ns and gap, with every cross-check.
    #[arg(long)]
    all: bool,
    #[arg(long)]
    rpeb: bool,
    #[arg(long)]
    dt: bool,
    /// Turn the optimal decision tree into an F₂ certificate.
    #[arg(long)]
    pdt: bool,
    #[arg(long)]
    ns: bool,
    #[arg(long)]
    gap: bool,
    /// Look for a degree-d design, or a certificate showing none exists.
    #[arg(long, requires = "d")]
    design: bool,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 2)]
    p: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    budget_seconds: Option<f64>,
}

struct Report {
    fields: Map<String, Value>,
    violations: Vec<String>,
    complete: bool,
    satisfiable: bool,
}

impl Report {
    fn set(&mut self, k: &str, v: impl Into<Value>) {
        self.fields.insert(k.into(), v.into());
    }

    fn agree(&mut self, what: &str, a: usize, b: usize) {
        if a != b {
            self.violations.push(format!("{what}: {a} != {b}"));
        }
    }
}

pub fn run(a: SolveArgs) -> Result<(), CliError> {
    if !(a.all || a.rpeb || a.dt || a.pdt || a.ns || a.gap || a.design) {
        return Err(CliError::Usage("choose at least one solver (--all, --rpeb, --dt, --pdt, --ns, --gap, --design)".into()));
    }
    if liftlab::field::Fp::new(a.p).is_err() {
        return Err(CliError::Usage(format!("--p {} is not a prime", a.p)));
    }
    let budget = Budget::new(a.budget_seconds)?;
    let reports = par_map(&a.inputs, |path| solve_one(&a, path, budget));
    let mut instances = Vec::new();
    let (mut consistent, mut complete) = (true, true);
    let mut satisfiable = Vec::new();
    for (path, r) in a.inputs.iter().zip(reports) {
        let mut r = r?;
        consistent &= r.violations.is_empty();
        complete &= r.complete;
        if r.satisfiable {
            satisfiable.push(path.display().to_string());
        }
        r.set("consistent", r.violations.is_empty());
        r.set("complete", r.complete);
        r.set("violations", r.violations.clone());
        instances.push(Value::Object(r.fields));
    }
    let report = json!({ "command": "solve", "p": a.p, "instances": instances, "consistent": consistent, "complete": complete });
    emit(&report, a.out.as_deref())?;
    if !satisfiable.is_empty() {
        return Err(CliError::Failure(format!("satisfiable: {}", satisfiable.join(", "))));
    }
    if !consistent {
        return Err(CliError::Failure("cross-check violated".into()));
    }
    if !complete {
        return Err(CliError::Budget("budget exhausted; report is incomplete".into()));
    }
    Ok(())
}

fn solve_one(a: &SolveArgs, path: &Path, budget: Budget) -> Result<Report, CliError> {
    let mut r = Report { fields: Map::new(), violations: Vec::new(), complete: true, satisfiable: false };
    r.set("input", path.display().to_string());
    let (dag, cnf): (Option<Dag>, Cnf) = match load_instance(path)? {
        Instance::Dag(d) => {
            let f = pebbling_formula(&d).map_err(crate::util::fail)?;
            r.set("vertices", d.n());
            (Some(d), f)
        }
        Instance::Cnf(f) => (None, f),
    };
    r.set("variables", cnf.num_vars);
    r.set("clauses", cnf.clauses.len());
    if let Some(m) = cnf.find_model().map_err(crate::util::fail)? {
        r.satisfiable = true;
        r.set("satisfiable", true);
        r.set("model", (0..cnf.num_vars).map(|i| m >> i & 1 == 1).collect::<Vec<_>>());
        return Ok(r);
    }
    let mut stages: Vec<&str> = Vec::new();
    let want = |flag: bool| a.all || flag;
    if dag.is_some() && want(a.rpeb) {
        stages.push("rpeb");
    }
    if want(a.ns) {
        stages.push("ns");
    }
    if want(a.dt) || want(a.pdt) {
        stages.push("dt");
    }
    if want(a.pdt) {
        stages.push("pdt");
    }
    if a.gap || (a.all && cnf.num_vars <= GAP_AUTO_VARS) {
        stages.push("gap");
    }
    if a.design {
        stages.push("design");
    }
    let mut rp = None;
    let mut dt = None;
    let mut ns = None;
    for stage in stages {
        if budget.exhausted() {
            r.complete = false;
            break;
        }
        let e = |e: &dyn std::fmt::Display| CliError::Failure(format!("{}: {stage}: {e}", path.display()));
        match stage {
            "rpeb" => {
                let d = dag.as_ref().expect("rpeb only for DAG input");
                let v = rpeb(d).map_err(|x| e(&x))?.0;
                r.set("rpeb", v);
                rp = Some(v);
            }
            "dt" => {
                let (depth, tree) = if cnf.num_vars <= DT_AUTO_VARS {
                    let (depth, tree) = dt_depth(&cnf).map_err(|x| e(&x))?;
                    (depth, Some(tree))
                } else if let Some(d) = &dag {
                    (dt_depth_pebbling(d).map_err(|x| e(&x))?, None)
                } else {
                    return Err(e(&format!("{} variables is too many for the decision-tree solver", cnf.num_vars)));
                };
                if let (Some(d), Some(_)) = (&dag, &tree) {
                    r.agree("dt vs pebbling-state dt", depth, dt_depth_pebbling(d).map_err(|x| e(&x))?);
                }
                r.set("dt", depth);
                dt = Some((depth, tree));
            }
            "pdt" => {
                let Some((depth, Some(tree))) = &dt else { continue };
                let cert = pdt_to_ns(&cnf, &ParityTree::from(tree)).map_err(|x| e(&x))?;
                r.set("pdt_certificate_degree", cert.d);
                if cert.d > *depth {
                    r.violations.push(format!("pdt certificate degree {} exceeds dt {depth}", cert.d));
                }
                if a.p == 2 {
                    if let Some(n) = ns {
                        if cert.d < n {
                            r.violations.push(format!("pdt certificate degree {} below ns {n}", cert.d));
                        }
                    }
                }
            }
            "ns" => {
                let (d, cert) = ns_degree(&cnf, a.p).map_err(|x| e(&x))?;
                verify_certificate(&cnf, a.p, &cert).map_err(|x| e(&x))?;
                r.set("ns", d);
                ns = Some(d);
            }
            "gap" => {
                let (g, _) = gap_complexity(&cnf, a.p).map_err(|x| e(&x))?;
                r.set("gap", g);
                if let Some(n) = ns {
                    r.agree("gap vs ns", g, n);
                }
            }
            "design" => {
                let d = a.d.expect("clap requires --d");
                match find_design(&cnf, a.p, d).map_err(|x| e(&x))? {
                    Some(design) => {
                        verify_design(&cnf, a.p, &design).map_err(|x| e(&x))?;
                        if certificate_at_degree(&cnf, a.p, d).map_err(|x| e(&x))?.is_some() {
                            r.violations.push(format!("both a design and a certificate exist at degree {d}"));
                        }
                        r.set("design", design.to_text());
                    }
                    None => {
                        let cert = certificate_at_degree(&cnf, a.p, d).map_err(|x| e(&x))?;
                        match cert {
                            Some(c) => {
                                verify_certificate(&cnf, a.p, &c).map_err(|x| e(&x))?;
                                r.set("design", Value::Null);
                                r.set("certificate", c.to_text());
                            }
                            None => r.violations.push(format!("neither a design nor a certificate at degree {d}")),
                        }
                    }
                }
            }
            _ => unreachable!("unknown stage"),
        }
    }
    if let Some(rp) = rp {
        if let Some(n) = ns {
            r.agree("rpeb vs ns", rp, n);
        }
        if let Some((d, _)) = dt {
            r.agree("rpeb vs dt", rp, d);
        }
    }
    if a.p == 2 {
        if let (Some(n), Some((d, _))) = (ns, &dt) {
            if n > *d {
                r.violations.push(format!("F2 ns {n} exceeds dt {d}"));
            }
        }
    }
    Ok(r)
}
