use std::path::PathBuf;

use clap::Args;
use liftlab::cnf::pebbling_formula;
use liftlab::dag::Family;
use liftlab::lift::lift_cnf;
use liftlab::{Dag, Gadget};
use serde_json::json;

use crate::util::{emit, fail, write_atomic, CliError};

#[derive(Args, Debug)]
pub struct GenArgs {
    /// path, pyramid or tree
    #[arg(long)]
    family: Family,
    /// Path length: a single size or an inclusive range like 2..6.
    #[arg(long, conflicts_with = "h")]
    n: Option<String>,
    /// Height for pyramids and complete binary trees, single or range.
    #[arg(long)]
    h: Option<String>,
    /// Gadget to lift with; only `eq` is available.
    #[arg(long, requires = "q")]
    gadget: Option<String>,
    #[arg(long, requires = "gadget")]
    q: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn sizes(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("bad size '{spec}' (expected N or A..B)"));
    let (lo, hi) = match spec.split_once("..") {
        Some((a, b)) => (a.parse().map_err(|_| bad())?, b.trim_start_matches('=').parse().map_err(|_| bad())?),
        None => {
            let v = spec.parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

pub fn run(a: GenArgs) -> Result<(), CliError> {
    let spec = match (a.family, &a.n, &a.h) {
        (Family::Path, Some(n), None) => n,
        (Family::Path, _, _) => return Err(CliError::Usage("--family path takes --n".into())),
        (_, None, Some(h)) => h,
        (_, _, _) => return Err(CliError::Usage("pyramids and trees take --h".into())),
    };
    let gadget = match (a.gadget.as_deref(), a.q) {
        (None, _) => None,
        (Some("eq"), Some(q)) if (1..=8).contains(&q) => Some(Gadget::eq(q)),
        (Some("eq"), _) => return Err(CliError::Usage("--q must be between 1 and 8".into())),
        (Some(other), _) => return Err(CliError::Usage(format!("unknown gadget '{other}'"))),
    };
    let name = match a.family {
        Family::Path => "path",
        Family::Pyramid => "pyramid",
        Family::CompleteBinaryTree => "tree",
    };
    let mut written = Vec::new();
    for size in sizes(spec)? {
        let dag = Dag::family(a.family, size).map_err(fail)?;
        let stem = format!("{name}{size}");
        let cnf = pebbling_formula(&dag).map_err(fail)?;
        let mut files = vec![(format!("{stem}.dag"), dag.to_text()), (format!("{stem}.cnf"), cnf.to_dimacs())];
        if let Some(g) = &gadget {
            let lifted = lift_cnf(&cnf, g);
            let s = format!("{stem}_eq{}", g.q());
            files.push((format!("{s}.cnf"), lifted.cnf.to_dimacs()));
            files.push((format!("{s}.prov"), lifted.provenance_text()));
        }
        for (file, text) in files {
            let path = a.out.join(&file);
            write_atomic(&path, &text)?;
            written.push(path.display().to_string());
        }
    }
    emit(&json!({ "command": "gen", "files": written }), None)
}
