//! Parity decision trees and their translation into F₂ Nullstellensatz
//! refutations.

use std::fmt;

use super::sexpr::{branches, number, Sexpr};
use super::SearchError;
use crate::cnf::Cnf;
use crate::field::Fp;
use crate::ns::{verify_certificate, NsCertificate};
use crate::poly::MultilinearPoly;

/// Internal nodes query ⊕_{i∈mask} z_i ⊕ constant; the 0-branch is taken
/// when the query evaluates to 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParityTree {
    Leaf(usize),
    Query { mask: u64, constant: bool, zero: Box<ParityTree>, one: Box<ParityTree> },
}

impl ParityTree {
    pub fn query(mask: u64, constant: bool, zero: ParityTree, one: ParityTree) -> Self {
        ParityTree::Query { mask, constant, zero: Box::new(zero), one: Box::new(one) }
    }

    pub fn depth(&self) -> usize {
        match self {
            ParityTree::Leaf(_) => 0,
            ParityTree::Query { zero, one, .. } => 1 + zero.depth().max(one.depth()),
        }
    }

    pub fn run(&self, ones: u64) -> usize {
        match self {
            ParityTree::Leaf(c) => *c,
            ParityTree::Query { mask, constant, zero, one } => {
                let b = (mask & ones).count_ones() % 2 == 1;
                if b != *constant { one } else { zero }.run(ones)
            }
        }
    }

    /// `(p <mask-hex> <0|1> (0 …) (1 …))` with leaves `(leaf <clause>)`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self, SearchError> {
        Self::from_sexpr(&Sexpr::parse(text)?)
    }

    fn from_sexpr(e: &Sexpr) -> Result<Self, SearchError> {
        let Sexpr::List(items) = e else { return Err(SearchError::Parse("expected a list".into())) };
        match items.first().and_then(Sexpr::atom) {
            Some("leaf") if items.len() == 2 => Ok(ParityTree::Leaf(number(&items[1], "clause index")?)),
            Some("p") if items.len() == 5 => {
                let hex = items[1].atom().unwrap_or("");
                let mask = u64::from_str_radix(hex.trim_start_matches("0x"), 16)
                    .map_err(|_| SearchError::Parse(format!("bad mask '{hex}'")))?;
                let constant = match items[2].atom() {
                    Some("0") => false,
                    Some("1") => true,
                    _ => return Err(SearchError::Parse("constant must be 0 or 1".into())),
                };
                let (z, o) = branches(items)?;
                Ok(Self::query(mask, constant, Self::from_sexpr(z)?, Self::from_sexpr(o)?))
            }
            _ => Err(SearchError::Parse("expected (leaf c) or (p mask c (0 …) (1 …))".into())),
        }
    }
}

impl fmt::Display for ParityTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParityTree::Leaf(c) => write!(f, "(leaf {c})"),
            ParityTree::Query { mask, constant, zero, one } => {
                write!(f, "(p 0x{mask:x} {} (0 {zero}) (1 {one}))", *constant as u8)
            }
        }
    }
}

/// Affine system over F₂ in reduced row echelon form; each row is
/// (mask, rhs) with a distinct lowest bit as pivot.
#[derive(Clone, Default)]
struct Affine {
    rows: Vec<(u64, bool)>,
}

impl Affine {
    fn reduce(&self, mut mask: u64, mut rhs: bool) -> (u64, bool) {
        for &(m, r) in &self.rows {
            let pivot = m & m.wrapping_neg();
            if mask & pivot != 0 {
                mask ^= m;
                rhs ^= r;
            }
        }
        (mask, rhs)
    }

    /// Add Σ_{mask} z_i = rhs; false if the system becomes inconsistent.
    fn insert(&mut self, mask: u64, rhs: bool) -> bool {
        let (m, r) = self.reduce(mask, rhs);
        if m == 0 {
            return !r;
        }
        let pivot = m & m.wrapping_neg();
        for row in &mut self.rows {
            if row.0 & pivot != 0 {
                row.0 ^= m;
                row.1 ^= r;
            }
        }
        self.rows.push((m, r));
        true
    }

    /// The solution with every free variable 0.
    fn solution(&self, n: usize) -> Vec<bool> {
        let mut z = vec![false; n];
        for &(m, r) in &self.rows {
            z[m.trailing_zeros() as usize] = r;
        }
        z
    }
}

/// Every reachable leaf's clause is falsified by every assignment reaching
/// it. Leaves whose path constraints are inconsistent are never reached and
/// are accepted. Returns the depth.
pub fn verify_pdt(cnf: &Cnf, pdt: &ParityTree) -> Result<usize, SearchError> {
    if cnf.num_vars > 64 {
        return Err(SearchError::TooManyVars(cnf.num_vars));
    }
    check(cnf, pdt, &Affine::default())?;
    Ok(pdt.depth())
}

fn check(cnf: &Cnf, t: &ParityTree, sys: &Affine) -> Result<(), SearchError> {
    let n = cnf.num_vars;
    match t {
        ParityTree::Leaf(k) => {
            let c = cnf.clauses.get(*k).ok_or(SearchError::BadClause(*k))?;
            for l in c.lits() {
                let (m, r) = sys.reduce(1 << l.var, false);
                // Forced false when z_var is determined and equals the falsifying value.
                if m == 0 && r != l.pos {
                    continue;
                }
                let mut s = sys.clone();
                s.insert(1 << l.var, l.pos);
                return Err(SearchError::WrongLeaf { clause: *k, witness: s.solution(n) });
            }
            Ok(())
        }
        ParityTree::Query { mask, constant, zero, one } => {
            if n < 64 && mask >> n != 0 {
                return Err(SearchError::VarOutOfRange(63 - mask.leading_zeros() as usize));
            }
            for (b, sub) in [(false, zero), (true, one)] {
                let mut s = sys.clone();
                if s.insert(*mask, b ^ constant) {
                    check(cnf, sub, &s)?;
                }
            }
            Ok(())
        }
    }
}

/// F₂ refutation of degree ≤ depth: each leaf contributes the product of
/// its edge indicators divided by the encoding of its clause.
pub fn pdt_to_ns(cnf: &Cnf, pdt: &ParityTree) -> Result<NsCertificate, SearchError> {
    let d = verify_pdt(cnf, pdt)?;
    let f = Fp::new(2).expect("2 is prime");
    let n = cnf.num_vars;
    let mut q = vec![MultilinearPoly::zero(n, f); cnf.clauses.len()];
    collect(cnf, pdt, &MultilinearPoly::constant(n, f, 1), &mut q)?;
    let cert = NsCertificate { p: 2, d, q };
    verify_certificate(cnf, 2, &cert)?;
    Ok(cert)
}

fn collect(cnf: &Cnf, t: &ParityTree, r: &MultilinearPoly, q: &mut [MultilinearPoly]) -> Result<(), SearchError> {
    match t {
        ParityTree::Leaf(k) => {
            let s = r.divide_by_clause(&cnf.clauses[*k]).ok_or(SearchError::Division(*k))?;
            q[*k] = q[*k].add(&s);
            Ok(())
        }
        ParityTree::Query { mask, constant, zero, one } => {
            for (b, sub) in [(false, zero), (true, one)] {
                // r_e = p_v + b + 1 with p_v = Σ z_i + constant.
                let c = (*constant ^ b ^ true) as u64;
                let edge = MultilinearPoly::from_terms(r.n, r.field, crate::bits(*mask).map(|i| (1u64 << i, 1)).chain([(0, c)]));
                collect(cnf, sub, &r.mul(&edge), q)?;
            }
            Ok(())
        }
    }
}

impl From<&super::DecisionTree> for ParityTree {
    fn from(t: &super::DecisionTree) -> Self {
        match t {
            super::DecisionTree::Leaf(c) => ParityTree::Leaf(*c),
            super::DecisionTree::Query { var, zero, one } => {
                ParityTree::query(1 << var, false, zero.as_ref().into(), one.as_ref().into())
            }
        }
    }
}
