//! Exit codes, file helpers, wall-clock budgets and worker fan-out.

use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use liftlab::{Cnf, Dag};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable input shape; exit 2.
    Usage(String),
    /// Verification failure, satisfiable input, violated cross-check; exit 1.
    Failure(String),
    /// Wall-clock budget exhausted; exit 3.
    Budget(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
            CliError::Budget(_) => EXIT_BUDGET,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) | CliError::Budget(m) => f.write_str(m),
        }
    }
}

pub fn fail(e: impl fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Failure(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let name = path.file_name().ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

/// Print JSON to stdout or write it to `out`.
pub fn emit(value: &serde_json::Value, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n";
    match out {
        Some(p) => write_atomic(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub enum Instance {
    Dag(Dag),
    Cnf(Cnf),
}

/// A DAG file starts with a `dag <n>` header; anything else is DIMACS.
pub fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let text = read(path)?;
    let first = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).find(|l| !l.is_empty());
    let ctx = |e: &dyn fmt::Display| CliError::Failure(format!("{}: {e}", path.display()));
    if first.is_some_and(|l| l.starts_with("dag")) {
        Dag::parse(&text).map(Instance::Dag).map_err(|e| ctx(&e))
    } else {
        Cnf::parse_dimacs(&text).map(Instance::Cnf).map_err(|e| ctx(&e))
    }
}

pub fn load_dag(path: &Path) -> Result<Dag, CliError> {
    match load_instance(path)? {
        Instance::Dag(d) => Ok(d),
        Instance::Cnf(_) => Err(CliError::Usage(format!("{} is not a DAG file", path.display()))),
    }
}

pub fn load_cnf(path: &Path) -> Result<Cnf, CliError> {
    match load_instance(path)? {
        Instance::Cnf(c) => Ok(c),
        Instance::Dag(_) => Err(CliError::Usage(format!("{} is not a DIMACS file", path.display()))),
    }
}

/// Wall-clock guard checked between solver stages.
#[derive(Clone, Copy)]
pub struct Budget {
    deadline: Option<Instant>,
}

impl Budget {
    pub fn new(seconds: Option<f64>) -> Result<Budget, CliError> {
        match seconds {
            Some(s) if !(s >= 0.0 && s.is_finite()) => Err(CliError::Usage(format!("bad budget {s}"))),
            Some(s) => Ok(Budget { deadline: Some(Instant::now() + Duration::from_secs_f64(s)) }),
            None => Ok(Budget { deadline: None }),
        }
    }

    pub fn exhausted(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Worker count from `LIFTLAB_THREADS`, else the available parallelism.
pub fn threads() -> usize {
    std::env::var("LIFTLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Apply `f` to every item on a pool of workers; results keep input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..threads().min(items.len()).max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                *slots[i].lock().unwrap() = Some(f(item));
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every item processed")).collect()
}
