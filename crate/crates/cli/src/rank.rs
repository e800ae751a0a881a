use std::path::PathBuf;

use clap::Args;
use liftlab::field::Fp;
use liftlab::poly::MultilinearPoly;
use liftlab::rank::{check_lifting_bounds, goodness, is_good, rank_additivity_probe, ExactMatrix, Goodness, LiftingReport, MatrixField};
use liftlab::Gadget;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::util::{emit, fail, read, CliError};

/// Coefficient field for polynomials composed over ℚ.
const RATIONAL_POLY_PRIME: u64 = 1_000_003;
/// Failure descriptions kept in a fuzz report.
const MAX_LISTED: usize = 20;

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["check_bounds", "is_good"])))]
pub struct RankArgs {
    /// Check the degree-to-rank sandwich, on a given instance or by fuzzing.
    #[arg(long)]
    check_bounds: bool,
    /// Decide goodness of --matrix, with a witness when it is not good.
    #[arg(long, requires = "matrix")]
    is_good: bool,
    /// Number of random instances; requires --seed.
    #[arg(long, requires = "seed", conflicts_with = "matrix")]
    fuzz: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Matrix file: `matrix <rows> <cols> <Q|F<p>>` and one line per row.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Polynomial as `mask:coeff` pairs, e.g. `0:1,3:2` for 1 + 2 z0 z1.
    #[arg(long)]
    poly: Option<String>,
    /// Number of gadget copies.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_matrix(a: &RankArgs) -> Result<ExactMatrix, CliError> {
    let path = a.matrix.as_ref().ok_or_else(|| CliError::Usage("--matrix is required".into()))?;
    ExactMatrix::parse(&read(path)?).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn poly_field(field: MatrixField) -> Fp {
    match field {
        MatrixField::Prime(fp) => fp,
        MatrixField::Rational => Fp::new(RATIONAL_POLY_PRIME).expect("prime"),
    }
}

fn parse_poly(spec: &str, n: usize, f: Fp) -> Result<MultilinearPoly, CliError> {
    let mut terms = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || CliError::Usage(format!("bad term '{part}' (expected mask:coeff)"));
        let (m, c) = part.split_once(':').ok_or_else(bad)?;
        let m = match m.strip_prefix("0x") {
            Some(h) => u64::from_str_radix(h, 16).map_err(|_| bad())?,
            None => m.parse().map_err(|_| bad())?,
        };
        if n < 64 && m >> n != 0 {
            return Err(CliError::Usage(format!("monomial {m} uses variables beyond z{}", n - 1)));
        }
        terms.push((m, f.reduce(c.parse().map_err(|_| bad())?)));
    }
    Ok(MultilinearPoly::from_terms(n, f, terms))
}

fn report_json(r: &LiftingReport) -> Value {
    json!({
        "rank_g": r.rank_g,
        "rank": r.actual,
        "upper": r.upper.to_string(),
        "lower": r.lower.as_ref().map(ToString::to_string),
        "sharpened_lower": r.sharpened_lower.as_ref().map(ToString::to_string),
        "good": r.good,
        "exact_for_good": r.exact_good,
        "within_bounds": r.within_bounds(),
    })
}

pub fn run(a: RankArgs) -> Result<(), CliError> {
    if a.is_good {
        let g = load_matrix(&a)?;
        let witness = match goodness(&g) {
            Goodness::Good => Value::Null,
            Goodness::OnesInRowSpace(c) => json!({ "side": "row", "coefficients": c.iter().map(ToString::to_string).collect::<Vec<_>>() }),
            Goodness::OnesInColumnSpace(c) => json!({ "side": "column", "coefficients": c.iter().map(ToString::to_string).collect::<Vec<_>>() }),
        };
        let report = json!({ "command": "rank", "mode": "is_good", "field": g.field().to_string(), "rank": g.rank(), "good": witness.is_null(), "witness": witness });
        return emit(&report, a.out.as_deref());
    }
    if let Some(count) = a.fuzz {
        let seed = a.seed.expect("clap requires --seed");
        let summary = fuzz(count, seed).map_err(fail)?;
        let violations = summary["violations"].as_u64().unwrap_or(0);
        emit(&summary, a.out.as_deref())?;
        if violations > 0 {
            return Err(fail(format!("{violations} violations")));
        }
        return Ok(());
    }
    let g = load_matrix(&a)?;
    let n = a.n.ok_or_else(|| CliError::Usage("--check-bounds on a matrix needs --n".into()))?;
    let spec = a.poly.as_deref().ok_or_else(|| CliError::Usage("--check-bounds on a matrix needs --poly".into()))?;
    let p = parse_poly(spec, n, poly_field(g.field()))?;
    let r = check_lifting_bounds(&p, &g, n).map_err(fail)?;
    let ok = r.within_bounds() && r.sharpened_holds() != Some(false) && r.exact_good != Some(false);
    let mut report = report_json(&r);
    report["command"] = json!("rank");
    report["mode"] = json!("check_bounds");
    report["n"] = json!(n);
    emit(&report, a.out.as_deref())?;
    if !ok {
        return Err(fail("degree-to-rank bound violated"));
    }
    Ok(())
}

/// Random gadgets of four kinds, plus the equality gadgets, each composed
/// with a random polynomial on one or two copies.
fn fuzz(count: usize, seed: u64) -> Result<Value, liftlab::rank::RankError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f2 = MatrixField::Prime(Fp::new(2).expect("prime"));
    let f3 = MatrixField::Prime(Fp::new(3).expect("prime"));
    let mut gadgets = Vec::with_capacity(count + 3);
    for i in 0..count {
        let (r, c) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
        let (field, lo, hi) = match i % 4 {
            0 => (MatrixField::Rational, 0, 1),
            1 => (MatrixField::Rational, 0, 1),
            2 => ([f2, f3][rng.gen_range(0..2)], 0, 2),
            _ => (MatrixField::Rational, -1, 1),
        };
        let mut m: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(lo..=hi)).collect()).collect();
        if i % 4 == 1 {
            // A zero row and column make the gadget good.
            let (zr, zc) = (rng.gen_range(0..r), rng.gen_range(0..c));
            m[zr].iter_mut().for_each(|v| *v = 0);
            m.iter_mut().for_each(|row| row[zc] = 0);
        }
        gadgets.push(ExactMatrix::from_i64(field, &m)?);
    }
    let structured = [1, 2, 3].map(|q| ExactMatrix::from_gadget(&Gadget::eq(q), MatrixField::Rational));
    gadgets.extend(structured.iter().cloned());
    let (mut violations, mut good, mut sharpened) = (0usize, 0usize, 0usize);
    let mut failures = Vec::new();
    for (i, g) in gadgets.iter().enumerate() {
        let n = if g.rows().max(g.cols()) > 4 { 1 } else { rng.gen_range(1..=2) };
        let f = poly_field(g.field());
        let terms: Vec<(u64, u64)> = (0..1u64 << n).map(|m| (m, f.reduce(rng.gen_range(-3..=3)))).collect();
        let p = MultilinearPoly::from_terms(n, f, terms);
        let r = check_lifting_bounds(&p, g, n)?;
        let probe = rank_additivity_probe(&ExactMatrix::ones(g.rows(), g.cols(), g.field())?, g)?;
        let mut bad = Vec::new();
        if !r.within_bounds() {
            bad.push("sandwich");
        }
        if r.sharpened_holds() == Some(false) {
            bad.push("sharpened lower bound");
        }
        if r.exact_good == Some(false) {
            bad.push("equality for a good gadget");
        }
        if is_good(g) != probe {
            bad.push("goodness vs additivity");
        }
        good += r.good as usize;
        sharpened += r.sharpened_lower.is_some() as usize;
        if !bad.is_empty() {
            violations += 1;
            if failures.len() < MAX_LISTED {
                failures.push(json!({ "instance": i, "checks": bad, "matrix": g.to_text(), "report": report_json(&r) }));
            }
        }
    }
    Ok(json!({
        "command": "rank",
        "mode": "check_bounds_fuzz",
        "seed": seed,
        "random_instances": count,
        "structured_instances": structured.len(),
        "good_instances": good,
        "sharpened_checked": sharpened,
        "violations": violations,
        "failures": failures,
    }))
}
