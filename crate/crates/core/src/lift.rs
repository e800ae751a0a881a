//! Truth-table gadgets and lifting of CNF formulas.
//!
//! Original variable i becomes the blocks x_{i,1..q} and y_{i,1..q}, numbered
//! x_{i,j} = 2qi + j − 1 and y_{i,j} = 2qi + q + j − 1. Inside a gadget the
//! integer x stands for Σ_j x_j 2^{j−1}.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::cnf::{Clause, Cnf, CnfError, Lit};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    q: usize,
    table: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("gadget table must be {expected}x{expected}")]
    BadTable { expected: usize },
    #[error("encoding must be over {0} variables")]
    BadEncoding(usize),
    #[error("provenance parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

impl Gadget {
    pub fn from_table(q: usize, table: Vec<Vec<bool>>) -> Result<Gadget, LiftError> {
        let side = 1 << q;
        if q == 0 || table.len() != side || table.iter().any(|r| r.len() != side) {
            return Err(LiftError::BadTable { expected: side });
        }
        Ok(Gadget { q, table })
    }

    /// Equality on q-bit strings.
    pub fn eq(q: usize) -> Gadget {
        let side = 1 << q;
        let table = (0..side).map(|x| (0..side).map(|y| x == y).collect()).collect();
        Gadget { q, table }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn table(&self) -> &[Vec<bool>] {
        &self.table
    }

    pub fn eval(&self, x: usize, y: usize) -> bool {
        self.table[x][y]
    }

    /// Canonical CNF over 2q local variables (x bits then y bits): one clause
    /// per row where the target value fails, negating that row.
    pub fn cnf(&self, polarity: Polarity) -> Cnf {
        let q = self.q;
        let side = 1usize << q;
        let want = polarity == Polarity::Positive;
        let mut clauses = Vec::new();
        for x in 0..side {
            for y in 0..side {
                if self.table[x][y] != want {
                    let row = x | y << q;
                    let lits = (0..2 * q).map(|k| Lit { var: k, pos: row >> k & 1 == 0 }).collect();
                    clauses.push(Clause::new(lits).expect("distinct variables"));
                }
            }
        }
        if clauses.len() == side * side {
            clauses = vec![Clause::empty()];
        }
        Cnf::new(2 * q, clauses).expect("local variables")
    }
}

/// Compact equality encodings: the positive side is ⋀_j (x̄_j ∨ y_j)(x_j ∨ ȳ_j),
/// the negative side distributes ⋁_j (x_j ≠ y_j) into 2^q clauses of width 2q.
pub fn eq_compact_encodings(q: usize) -> (Cnf, Cnf) {
    let mut pos = Vec::new();
    for j in 0..q {
        pos.push(Clause::new(vec![Lit::neg(j), Lit::pos(q + j)]).unwrap());
        pos.push(Clause::new(vec![Lit::pos(j), Lit::neg(q + j)]).unwrap());
    }
    let mut neg = Vec::new();
    for choice in 0..1usize << q {
        let lits = (0..q)
            .flat_map(|j| {
                let p = choice >> j & 1 == 0;
                [Lit { var: j, pos: p }, Lit { var: q + j, pos: p }]
            })
            .collect();
        neg.push(Clause::new(lits).unwrap());
    }
    (Cnf::new(2 * q, pos).unwrap(), Cnf::new(2 * q, neg).unwrap())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedCnf {
    pub cnf: Cnf,
    pub q: usize,
    /// Original clause index for every lifted clause.
    pub provenance: Vec<usize>,
}

pub fn x_var(q: usize, i: usize, j: usize) -> usize {
    2 * q * i + j
}

pub fn y_var(q: usize, i: usize, j: usize) -> usize {
    2 * q * i + q + j
}

/// Lift with the gadget's canonical encodings.
pub fn lift_cnf(cnf: &Cnf, g: &Gadget) -> LiftedCnf {
    lift_cnf_with(cnf, g.q, &g.cnf(Polarity::Positive), &g.cnf(Polarity::Negative)).expect("canonical encodings are well formed")
}

/// Lift with caller-supplied encodings of g (positive literals) and ¬g
/// (negative literals), both over 2q local variables.
pub fn lift_cnf_with(cnf: &Cnf, q: usize, pos_enc: &Cnf, neg_enc: &Cnf) -> Result<LiftedCnf, LiftError> {
    if pos_enc.num_vars != 2 * q || neg_enc.num_vars != 2 * q {
        return Err(LiftError::BadEncoding(2 * q));
    }
    let block = |i: usize, l: Lit| Lit { var: 2 * q * i + l.var, pos: l.pos };
    let mut seen = HashSet::new();
    let mut clauses = Vec::new();
    let mut provenance = Vec::new();
    for (ci, clause) in cnf.clauses.iter().enumerate() {
        let factors: Vec<(usize, &Cnf)> =
            clause.lits().iter().map(|l| (l.var, if l.pos { pos_enc } else { neg_enc })).collect();
        if factors.iter().any(|(_, f)| f.clauses.is_empty()) {
            continue;
        }
        // Odometer over one clause choice per literal, first literal slowest.
        let mut pick = vec![0usize; factors.len()];
        'outer: loop {
            let mut lits = Vec::new();
            for (k, &(var, enc)) in factors.iter().enumerate() {
                lits.extend(enc.clauses[pick[k]].lits().iter().map(|&l| block(var, l)));
            }
            if let Ok(c) = Clause::new(lits) {
                if seen.insert(c.clone()) {
                    clauses.push(c);
                    provenance.push(ci);
                }
            }
            let mut k = factors.len();
            loop {
                if k == 0 {
                    break 'outer;
                }
                k -= 1;
                pick[k] += 1;
                if pick[k] < factors[k].1.clauses.len() {
                    break;
                }
                pick[k] = 0;
            }
        }
    }
    let mut out = Cnf::new(2 * q * cnf.num_vars, clauses)?;
    let mut names = Vec::with_capacity(out.num_vars);
    for i in 0..cnf.num_vars {
        names.extend((1..=q).map(|j| format!("x_{i}_{j}")));
        names.extend((1..=q).map(|j| format!("y_{i}_{j}")));
    }
    out.names = Some(names);
    Ok(LiftedCnf { cnf: out, q, provenance })
}

/// Evaluate the gadget blockwise: lifted assignment ↦ original assignment.
pub fn apply_gadget(g: &Gadget, num_orig: usize, lifted: &[bool]) -> Vec<bool> {
    let q = g.q;
    (0..num_orig)
        .map(|i| {
            let x = (0..q).fold(0, |a, j| a | (lifted[x_var(q, i, j)] as usize) << j);
            let y = (0..q).fold(0, |a, j| a | (lifted[y_var(q, i, j)] as usize) << j);
            g.eval(x, y)
        })
        .collect()
}

impl LiftedCnf {
    pub fn provenance_text(&self) -> String {
        let mut s = String::new();
        for (i, &o) in self.provenance.iter().enumerate() {
            let _ = writeln!(s, "lift {i} {o}");
        }
        s
    }

    pub fn parse_provenance(text: &str) -> Result<Vec<usize>, LiftError> {
        let mut out = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| LiftError::Parse { line: i + 1, msg: msg.to_string() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                ["lift", a, b] => {
                    let a: usize = a.parse().map_err(|_| err("bad index"))?;
                    let b: usize = b.parse().map_err(|_| err("bad index"))?;
                    if a != out.len() {
                        return Err(err("indices must be consecutive"));
                    }
                    out.push(b);
                }
                _ => return Err(err("expected 'lift <lifted> <orig>'")),
            }
        }
        Ok(out)
    }
}
