//! Clauses, CNF formulas, DIMACS I/O and pebbling formulas.

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::dag::{Dag, DagError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    pub var: usize,
    pub pos: bool,
}

impl Lit {
    pub fn pos(var: usize) -> Lit {
        Lit { var, pos: true }
    }
    pub fn neg(var: usize) -> Lit {
        Lit { var, pos: false }
    }
    pub fn negate(self) -> Lit {
        Lit { var: self.var, pos: !self.pos }
    }
    /// Truth value under a total assignment.
    pub fn eval(self, value: bool) -> bool {
        value == self.pos
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("clause mentions variable {0} with both polarities")]
    Tautology(usize),
    #[error("literal on variable {var} but formula has {num_vars} variables")]
    VarOutOfRange { var: usize, num_vars: usize },
    #[error("dimacs parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0} variables exceed the 64-variable limit of this routine")]
    TooManyVars(usize),
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// Disjunction of literals, sorted by variable, no variable repeated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    pub fn new(mut lits: Vec<Lit>) -> Result<Clause, CnfError> {
        lits.sort();
        lits.dedup();
        for w in lits.windows(2) {
            if w[0].var == w[1].var {
                return Err(CnfError::Tautology(w[0].var));
            }
        }
        Ok(Clause { lits })
    }

    pub fn empty() -> Clause {
        Clause { lits: Vec::new() }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn width(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.lits.iter().map(|l| l.var)
    }

    pub fn var_mask(&self) -> u64 {
        self.lits.iter().fold(0, |m, l| m | 1 << l.var)
    }

    pub fn pos_mask(&self) -> u64 {
        self.lits.iter().filter(|l| l.pos).fold(0, |m, l| m | 1 << l.var)
    }

    pub fn neg_mask(&self) -> u64 {
        self.lits.iter().filter(|l| !l.pos).fold(0, |m, l| m | 1 << l.var)
    }

    pub fn is_falsified(&self, assignment: &[bool]) -> bool {
        self.lits.iter().all(|l| !l.eval(assignment[l.var]))
    }

    /// Falsified by the assignment whose ones are the bits of `ones` (≤ 64 variables).
    pub fn is_falsified_mask(&self, ones: u64) -> bool {
        self.pos_mask() & ones == 0 && self.neg_mask() & !ones == 0
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return write!(f, "⊥");
        }
        let parts: Vec<String> =
            self.lits.iter().map(|l| if l.pos { format!("x{}", l.var) } else { format!("¬x{}", l.var) }).collect();
        write!(f, "{}", parts.join(" ∨ "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
    pub names: Option<Vec<String>>,
}

impl Cnf {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Cnf, CnfError> {
        for c in &clauses {
            if let Some(l) = c.lits().iter().find(|l| l.var >= num_vars) {
                return Err(CnfError::VarOutOfRange { var: l.var, num_vars });
            }
        }
        Ok(Cnf { num_vars, clauses, names: None })
    }

    /// Convenience constructor from signed 1-based literals, DIMACS style.
    pub fn from_signed(num_vars: usize, clauses: &[&[i64]]) -> Result<Cnf, CnfError> {
        let cs = clauses
            .iter()
            .map(|c| {
                Clause::new(c.iter().map(|&x| Lit { var: x.unsigned_abs() as usize - 1, pos: x > 0 }).collect())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Cnf::new(num_vars, cs)
    }

    pub fn width(&self) -> usize {
        self.clauses.iter().map(Clause::width).max().unwrap_or(0)
    }

    pub fn falsified_clauses(&self, assignment: &[bool]) -> Vec<usize> {
        (0..self.clauses.len()).filter(|&i| self.clauses[i].is_falsified(assignment)).collect()
    }

    pub fn falsified_clauses_mask(&self, ones: u64) -> Vec<usize> {
        (0..self.clauses.len()).filter(|&i| self.clauses[i].is_falsified_mask(ones)).collect()
    }

    pub fn require_mask(&self) -> Result<(), CnfError> {
        if self.num_vars > 64 {
            Err(CnfError::TooManyVars(self.num_vars))
        } else {
            Ok(())
        }
    }

    /// First satisfying assignment by enumeration, as a mask of true variables.
    pub fn find_model(&self) -> Result<Option<u64>, CnfError> {
        if self.num_vars > 30 {
            return Err(CnfError::TooManyVars(self.num_vars));
        }
        let masks: Vec<(u64, u64)> = self.clauses.iter().map(|c| (c.pos_mask(), c.neg_mask())).collect();
        Ok((0..1u64 << self.num_vars).find(|&a| masks.iter().all(|&(p, n)| p & a != 0 || n & !a != 0)))
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c.lits() {
                let v = l.var as i64 + 1;
                let _ = write!(s, "{} ", if l.pos { v } else { -v });
            }
            s.push_str("0\n");
        }
        s
    }

    pub fn parse_dimacs(text: &str) -> Result<Cnf, CnfError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: String| CnfError::Parse { line: i + 1, msg };
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if line.starts_with('p') {
                let toks: Vec<&str> = line.split_whitespace().collect();
                match toks.as_slice() {
                    ["p", "cnf", v, c] if header.is_none() => {
                        let v = v.parse().map_err(|_| err(format!("bad variable count '{v}'")))?;
                        let c = c.parse().map_err(|_| err(format!("bad clause count '{c}'")))?;
                        header = Some((v, c));
                    }
                    _ => return Err(err(format!("bad header '{line}'"))),
                }
                continue;
            }
            let (nv, _) = header.ok_or_else(|| err("clause before header".into()))?;
            for tok in line.split_whitespace() {
                let x: i64 = tok.parse().map_err(|_| err(format!("bad literal '{tok}'")))?;
                if x == 0 {
                    clauses.push(Clause::new(std::mem::take(&mut current)).map_err(|e| err(e.to_string()))?);
                } else {
                    let var = x.unsigned_abs() as usize - 1;
                    if var >= nv {
                        return Err(err(format!("literal {x} exceeds {nv} variables")));
                    }
                    current.push(Lit { var, pos: x > 0 });
                }
            }
        }
        let (nv, nc) = header.ok_or(CnfError::Parse { line: 0, msg: "missing header".into() })?;
        if !current.is_empty() {
            return Err(CnfError::Parse { line: 0, msg: "unterminated clause".into() });
        }
        if clauses.len() != nc {
            return Err(CnfError::Parse { line: 0, msg: format!("header says {nc} clauses, found {}", clauses.len()) });
        }
        Cnf::new(nv, clauses)
    }
}

/// Pebbling formula: one variable per vertex; for each vertex in id order
/// either the source clause z_v or the clause ¬pred(v) ∨ z_v; then ¬z_sink.
pub fn pebbling_formula(dag: &Dag) -> Result<Cnf, CnfError> {
    let t = dag.sink()?;
    let mut clauses = Vec::with_capacity(dag.n() + 1);
    for v in 0..dag.n() {
        let mut lits: Vec<Lit> = dag.preds(v).iter().map(|&u| Lit::neg(u)).collect();
        lits.push(Lit::pos(v));
        clauses.push(Clause::new(lits)?);
    }
    clauses.push(Clause::new(vec![Lit::neg(t)])?);
    let mut cnf = Cnf::new(dag.n(), clauses)?;
    cnf.names = Some((0..dag.n()).map(|v| format!("z{v}")).collect());
    Ok(cnf)
}

/// Index of the sink clause in a pebbling formula.
pub fn sink_clause_index(dag: &Dag) -> usize {
    dag.n()
}
