//! Nullstellensatz refutations, designs and algebraic gaps over prime fields.
//!
//! The degree of a product E(C)·z_T is |vars(C) ∪ T|; the Boolean axioms are
//! absorbed by multilinear reduction. Generators at degree d are therefore
//! ml(E(C)·z_T) with T disjoint from vars(C) and |vars(C)| + |T| ≤ d.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::cnf::{Clause, Cnf};
use crate::dag::Dag;
use crate::field::{self, FieldError, Fp};
use crate::pebbling::reachable_configs;
use crate::poly::MultilinearPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NsError {
    #[error("clause {0} is empty")]
    EmptyClause(usize),
    #[error("{0} variables exceed the limit of this routine")]
    TooManyVars(usize),
    #[error("no refutation of degree ≤ n: the formula is satisfiable")]
    Satisfiable,
    #[error("certificate has {got} polynomials for {want} axioms")]
    WrongArity { got: usize, want: usize },
    #[error("sum = {0} ≠ 1")]
    SumNotOne(String),
    #[error("axiom {axiom}: degree {degree} exceeds bound {bound}")]
    DegreeOverflow { axiom: usize, degree: usize, bound: usize },
    #[error("design has D(1) = {0}, expected 1")]
    NotNormalized(u64),
    #[error("design value on monomial {0:#x} of size above d")]
    DesignTooWide(u64),
    #[error("design violated at axiom {axiom} times monomial {monomial:#x}")]
    DesignViolation { axiom: usize, monomial: u64 },
    #[error("field mismatch: expected p = {want}, got {got}")]
    FieldMismatch { want: u64, got: u64 },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Dag(#[from] crate::dag::DagError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsCertificate {
    pub p: u64,
    pub d: usize,
    pub q: Vec<MultilinearPoly>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    pub p: u64,
    pub d: usize,
    /// Values on monomials of size ≤ d; absent entries are zero.
    pub values: BTreeMap<u64, u64>,
}

impl Design {
    pub fn value(&self, mask: u64) -> u64 {
        self.values.get(&mask).copied().unwrap_or(0)
    }

    /// Apply the functional to a polynomial.
    pub fn apply(&self, f: Fp, poly: &MultilinearPoly) -> u64 {
        poly.terms().fold(0, |a, (m, c)| f.add(a, f.mul(c, self.value(m))))
    }
}

/// A partial assignment: variables in `fixed` take the bits of `ones`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartialAssignment {
    pub n: usize,
    pub fixed: u64,
    pub ones: u64,
}

impl fmt::Display for PartialAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = (0..self.n)
            .map(|i| match (self.fixed >> i & 1, self.ones >> i & 1) {
                (0, _) => "*",
                (_, 1) => "1",
                _ => "0",
            })
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

fn check_input(cnf: &Cnf, limit: usize) -> Result<(), NsError> {
    if cnf.num_vars > limit {
        return Err(NsError::TooManyVars(cnf.num_vars));
    }
    if let Some(i) = cnf.clauses.iter().position(Clause::is_empty) {
        return Err(NsError::EmptyClause(i));
    }
    Ok(())
}

/// Subsets of `universe` with exactly k elements, in increasing mask order.
fn subsets_of_size(universe: u64, k: usize) -> Vec<u64> {
    let elems: Vec<u64> = crate::bits(universe).map(|i| 1u64 << i).collect();
    let mut out = Vec::new();
    fn rec(elems: &[u64], k: usize, start: usize, acc: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..elems.len() {
            if elems.len() - i < k {
                break;
            }
            rec(elems, k - 1, i + 1, acc | elems[i], out);
        }
    }
    rec(&elems, k, 0, 0, &mut out);
    out.sort_unstable();
    out
}

fn full_mask(n: usize) -> u64 {
    if n == 64 { u64::MAX } else { (1u64 << n) - 1 }
}

/// Generators (axiom index, T) whose degree |vars(C)| + |T| is exactly d.
fn generators_at(cnf: &Cnf, d: usize) -> Vec<(usize, u64)> {
    let all = full_mask(cnf.num_vars);
    let mut out = Vec::new();
    for (i, c) in cnf.clauses.iter().enumerate() {
        if let Some(k) = d.checked_sub(c.width()) {
            for t in subsets_of_size(all & !c.var_mask(), k) {
                out.push((i, t));
            }
        }
    }
    out
}

/// Generators of degree at most d.
pub fn generators(cnf: &Cnf, d: usize) -> Vec<(usize, u64)> {
    (0..=d).flat_map(|k| generators_at(cnf, k)).collect()
}

fn generator_poly(cnf: &Cnf, f: Fp, axiom: usize, t: u64) -> MultilinearPoly {
    MultilinearPoly::encode_clause(&cnf.clauses[axiom], cnf.num_vars, f).mul(&MultilinearPoly::monomial(cnf.num_vars, f, t, 1))
}

type Sparse = BTreeMap<u64, u64>;
type Combo = BTreeMap<usize, u64>;

/// Echelon basis keyed by leading monomial (largest mask), each row tracking
/// its combination of generators.
struct Echelon {
    f: Fp,
    rows: HashMap<u64, (Sparse, Combo)>,
}

fn axpy<K: Ord + Copy>(f: Fp, y: &mut BTreeMap<K, u64>, a: u64, x: &BTreeMap<K, u64>) {
    for (&k, &v) in x {
        let e = y.entry(k).or_insert(0);
        *e = f.add(*e, f.mul(a, v));
        if *e == 0 {
            y.remove(&k);
        }
    }
}

impl Echelon {
    fn new(f: Fp) -> Self {
        Echelon { f, rows: HashMap::new() }
    }

    fn insert(&mut self, mut row: Sparse, mut combo: Combo) {
        let f = self.f;
        while let Some((&lead, &c)) = row.iter().next_back() {
            match self.rows.get(&lead) {
                Some((brow, bcombo)) => {
                    let a = f.neg(c);
                    axpy(f, &mut row, a, brow);
                    axpy(f, &mut combo, a, bcombo);
                }
                None => {
                    let inv = f.inv(c);
                    row.values_mut().for_each(|v| *v = f.mul(*v, inv));
                    combo.values_mut().for_each(|v| *v = f.mul(*v, inv));
                    self.rows.insert(lead, (row, combo));
                    return;
                }
            }
        }
    }

    fn unit_combo(&self) -> Option<&Combo> {
        self.rows.get(&0).map(|(_, c)| c)
    }
}

fn assemble(cnf: &Cnf, f: Fp, d: usize, gens: &[(usize, u64)], combo: &Combo) -> NsCertificate {
    let mut q = vec![MultilinearPoly::zero(cnf.num_vars, f); cnf.clauses.len()];
    for (&j, &lambda) in combo {
        let (axiom, t) = gens[j];
        q[axiom].add_term(t, lambda);
    }
    NsCertificate { p: f.p(), d, q }
}

/// Least refutation degree and a certificate attaining it.
pub fn ns_degree(cnf: &Cnf, p: u64) -> Result<(usize, NsCertificate), NsError> {
    check_input(cnf, 64)?;
    let f = Fp::new(p)?;
    let mut ech = Echelon::new(f);
    let mut gens = Vec::new();
    for d in 1..=cnf.num_vars {
        for g in generators_at(cnf, d) {
            let j = gens.len();
            gens.push(g);
            let poly = generator_poly(cnf, f, g.0, g.1);
            ech.insert(poly.terms().collect(), Combo::from([(j, 1)]));
        }
        if let Some(combo) = ech.unit_combo() {
            return Ok((d, assemble(cnf, f, d, &gens, combo)));
        }
    }
    Err(NsError::Satisfiable)
}

/// A certificate of degree at most d, if one exists.
pub fn certificate_at_degree(cnf: &Cnf, p: u64, d: usize) -> Result<Option<NsCertificate>, NsError> {
    check_input(cnf, 64)?;
    let f = Fp::new(p)?;
    let gens = generators(cnf, d);
    let mut ech = Echelon::new(f);
    for (j, &(axiom, t)) in gens.iter().enumerate() {
        ech.insert(generator_poly(cnf, f, axiom, t).terms().collect(), Combo::from([(j, 1)]));
    }
    Ok(ech.unit_combo().map(|c| assemble(cnf, f, d, &gens, c)))
}

/// Check Σ ml(E(C_i)·q_i) = 1 and the degree bound; returns the actual degree.
pub fn verify_certificate(cnf: &Cnf, p: u64, cert: &NsCertificate) -> Result<usize, NsError> {
    check_input(cnf, 64)?;
    let f = Fp::new(p)?;
    if cert.p != p {
        return Err(NsError::FieldMismatch { want: p, got: cert.p });
    }
    if cert.q.len() != cnf.clauses.len() {
        return Err(NsError::WrongArity { got: cert.q.len(), want: cnf.clauses.len() });
    }
    let n = cnf.num_vars;
    let mut sum = MultilinearPoly::zero(n, f);
    let mut degree = 0;
    for (i, (c, q)) in cnf.clauses.iter().zip(&cert.q).enumerate() {
        let q = MultilinearPoly::from_terms(n, f, q.terms());
        sum = sum.add(&MultilinearPoly::encode_clause(c, n, f).mul(&q));
        let deg = q.terms().map(|(m, _)| (m | c.var_mask()).count_ones() as usize).max().unwrap_or(0);
        if deg > cert.d {
            return Err(NsError::DegreeOverflow { axiom: i, degree: deg, bound: cert.d });
        }
        degree = degree.max(deg);
    }
    if !sum.is_one() {
        return Err(NsError::SumNotOne(sum.to_string()));
    }
    Ok(degree)
}

/// All monomials of size ≤ d over n variables, by size then mask.
fn low_monomials(n: usize, d: usize) -> Vec<u64> {
    (0..=d.min(n)).flat_map(|k| subsets_of_size(full_mask(n), k)).collect()
}

/// Solve for a d-design: D(1) = 1 and D annihilates every degree-d generator.
pub fn find_design(cnf: &Cnf, p: u64, d: usize) -> Result<Option<Design>, NsError> {
    check_input(cnf, 24)?;
    let f = Fp::new(p)?;
    let monos = low_monomials(cnf.num_vars, d);
    let index: HashMap<u64, usize> = monos.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut unit = vec![0; monos.len()];
    unit[index[&0]] = 1;
    rows.push(unit);
    rhs.push(1);
    for (axiom, t) in generators(cnf, d) {
        let mut row = vec![0; monos.len()];
        for (m, c) in generator_poly(cnf, f, axiom, t).terms() {
            row[index[&m]] = c;
        }
        rows.push(row);
        rhs.push(0);
    }
    Ok(field::solve(f, &rows, &rhs).map(|x| Design {
        p,
        d,
        values: monos.iter().zip(x).filter(|&(_, v)| v != 0).map(|(&m, v)| (m, v)).collect(),
    }))
}

pub fn verify_design(cnf: &Cnf, p: u64, design: &Design) -> Result<(), NsError> {
    check_input(cnf, 64)?;
    let f = Fp::new(p)?;
    if design.p != p {
        return Err(NsError::FieldMismatch { want: p, got: design.p });
    }
    if let Some(&m) = design.values.keys().find(|m| m.count_ones() as usize > design.d) {
        return Err(NsError::DesignTooWide(m));
    }
    let one = design.value(0) % p;
    if one != 1 {
        return Err(NsError::NotNormalized(one));
    }
    for (axiom, t) in generators(cnf, design.d) {
        if design.apply(f, &generator_poly(cnf, f, axiom, t)) != 0 {
            return Err(NsError::DesignViolation { axiom, monomial: t });
        }
    }
    Ok(())
}

/// D(z_T) = 1 exactly for configurations reachable from ∅ with at most d pebbles.
pub fn pebbling_design(dag: &Dag, d: usize, p: u64) -> Result<Design, NsError> {
    dag.sink()?;
    Fp::new(p)?;
    let reach = reachable_configs(dag, d, 0)?;
    Ok(Design { p, d, values: reach.into_iter().map(|c| (c, 1)).collect() })
}

/// For each clause, the partial assignment fixing exactly its variables to falsifying values.
pub fn certificates(cnf: &Cnf) -> Vec<PartialAssignment> {
    cnf.clauses
        .iter()
        .map(|c| PartialAssignment { n: cnf.num_vars, fixed: c.var_mask(), ones: c.neg_mask() })
        .collect()
}

/// Largest g such that some p with the full monomial has deg(p↾π) ≤ n − g for
/// every clause certificate π. The witness keeps only coefficients of size > n − g.
pub fn gap_complexity(cnf: &Cnf, p: u64) -> Result<(usize, MultilinearPoly), NsError> {
    check_input(cnf, 20)?;
    let f = Fp::new(p)?;
    let n = cnf.num_vars;
    let all = full_mask(n);
    let certs = certificates(cnf);
    let mut best = (0, MultilinearPoly::monomial(n, f, all, 1));
    for g in 1..=n {
        // Unknowns: p̂(S) with |S| > n − g; the full monomial is pinned to 1.
        let unknowns: Vec<u64> = ((n - g + 1)..=n).flat_map(|k| subsets_of_size(all, k)).collect();
        let index: HashMap<u64, usize> = unknowns.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut pin = vec![0; unknowns.len()];
        pin[index[&all]] = 1;
        rows.push(pin);
        rhs.push(1);
        for pi in &certs {
            let free = all & !pi.fixed;
            let one_vars: Vec<u64> = crate::bits(pi.ones).map(|i| 1u64 << i).collect();
            for k in (n - g + 1)..=free.count_ones() as usize {
                for r in subsets_of_size(free, k) {
                    let mut row = vec![0; unknowns.len()];
                    for a in 0..1u64 << one_vars.len() {
                        let s = crate::bits(a).fold(r, |acc, i| acc | one_vars[i]);
                        row[index[&s]] = 1;
                    }
                    rows.push(row);
                    rhs.push(0);
                }
            }
        }
        match field::solve(f, &rows, &rhs) {
            Some(x) => best = (g, MultilinearPoly::from_terms(n, f, unknowns.iter().copied().zip(x))),
            None => break,
        }
    }
    Ok(best)
}

impl NsCertificate {
    pub fn to_text(&self) -> String {
        let mut s = format!("ns-cert p={} d={}\n", self.p, self.d);
        for (i, q) in self.q.iter().enumerate() {
            for (m, c) in q.terms() {
                let _ = writeln!(s, "q {i} {m:x} {c}");
            }
        }
        s
    }

    /// Parse; the axiom count and variable count come from the formula.
    pub fn parse(text: &str, cnf: &Cnf) -> Result<NsCertificate, NsError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (p, d) = parse_header(lines.next(), "ns-cert")?;
        let f = Fp::new(p)?;
        let mut q = vec![MultilinearPoly::zero(cnf.num_vars, f); cnf.clauses.len()];
        for (i, line) in lines {
            let err = |msg: &str| NsError::Parse { line: i + 1, msg: msg.into() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            let ["q", a, m, c] = toks.as_slice() else { return Err(err("expected 'q <axiom> <mask-hex> <coeff>'")) };
            let a: usize = a.parse().map_err(|_| err("bad axiom index"))?;
            let m = u64::from_str_radix(m, 16).map_err(|_| err("bad monomial"))?;
            let c: u64 = c.parse().map_err(|_| err("bad coefficient"))?;
            q.get_mut(a).ok_or_else(|| err("axiom index out of range"))?.add_term(m, c);
        }
        Ok(NsCertificate { p, d, q })
    }
}

impl Design {
    pub fn to_text(&self) -> String {
        let mut s = format!("design p={} d={}\n", self.p, self.d);
        for (m, v) in &self.values {
            let _ = writeln!(s, "D {m:x} {v}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Design, NsError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (p, d) = parse_header(lines.next(), "design")?;
        let mut values = BTreeMap::new();
        for (i, line) in lines {
            let err = |msg: &str| NsError::Parse { line: i + 1, msg: msg.into() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            let ["D", m, v] = toks.as_slice() else { return Err(err("expected 'D <mask-hex> <value>'")) };
            let m = u64::from_str_radix(m, 16).map_err(|_| err("bad monomial"))?;
            let v: u64 = v.parse().map_err(|_| err("bad value"))?;
            if v % p != 0 {
                values.insert(m, v % p);
            }
        }
        Ok(Design { p, d, values })
    }
}

fn parse_header(line: Option<(usize, &str)>, tag: &str) -> Result<(u64, usize), NsError> {
    let err = |msg: String| NsError::Parse { line: 1, msg };
    let (_, line) = line.ok_or_else(|| err("empty input".into()))?;
    let toks: Vec<&str> = line.split_whitespace().collect();
    match toks.as_slice() {
        [t, p, d] if *t == tag => {
            let p = p.strip_prefix("p=").and_then(|v| v.parse().ok()).ok_or_else(|| err("bad p".into()))?;
            let d = d.strip_prefix("d=").and_then(|v| v.parse().ok()).ok_or_else(|| err("bad d".into()))?;
            Ok((p, d))
        }
        _ => Err(err(format!("expected '{tag} p=<p> d=<d>'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::pebbling_formula;

    fn contradiction() -> Cnf {
        Cnf::from_signed(1, &[&[1], &[-1]]).unwrap()
    }

    #[test]
    fn unit_contradiction() {
        let f = contradiction();
        let (d, cert) = ns_degree(&f, 2).unwrap();
        assert_eq!(d, 1);
        assert_eq!(verify_certificate(&f, 2, &cert), Ok(1));
        let fp = Fp::new(5).unwrap();
        let bad = NsCertificate {
            p: 5,
            d: 1,
            q: vec![MultilinearPoly::constant(1, fp, 1), MultilinearPoly::zero(1, fp)],
        };
        assert_eq!(verify_certificate(&f, 5, &bad).unwrap_err().to_string(), "sum = 1 - z0 ≠ 1");
    }

    #[test]
    fn designs_for_small_cases() {
        let f = contradiction();
        let d0 = find_design(&f, 3, 0).unwrap().unwrap();
        assert_eq!(d0.value(0), 1);
        assert!(find_design(&f, 3, 1).unwrap().is_none());

        let peb = pebbling_formula(&Dag::path(2)).unwrap();
        let d1 = find_design(&peb, 2, 1).unwrap().unwrap();
        assert_eq!((d1.value(0), d1.value(1), d1.value(2)), (1, 1, 0));
        let pd = pebbling_design(&Dag::path(2), 1, 2).unwrap();
        assert_eq!(pd, d1);
        assert!(verify_design(&peb, 2, &pd).is_ok());
        let pd2 = pebbling_design(&Dag::path(2), 2, 2).unwrap();
        assert!(matches!(verify_design(&peb, 2, &pd2), Err(NsError::DesignViolation { axiom: 2, .. })));

        let zero = Design { p: 2, d: 1, values: BTreeMap::from([(0, 1)]) };
        assert!(verify_design(&f, 2, &zero).is_err());
    }

    #[test]
    fn certificate_shapes() {
        let c = Cnf::from_signed(3, &[&[1, -2]]).unwrap();
        assert_eq!(certificates(&c)[0].to_string(), "(0,1,*)");
        let peb = pebbling_formula(&Dag::path(2)).unwrap();
        let shown: Vec<String> = certificates(&peb).iter().map(|c| c.to_string()).collect();
        assert_eq!(shown, vec!["(0,*)", "(1,0)", "(*,1)"]);
    }

    #[test]
    fn gaps() {
        assert_eq!(gap_complexity(&contradiction(), 2).unwrap().0, 1);
        let peb = pebbling_formula(&Dag::path(2)).unwrap();
        assert_eq!(gap_complexity(&peb, 2).unwrap().0, 2);
        assert_eq!(ns_degree(&peb, 2).unwrap().0, 2);
    }

    #[test]
    fn empty_clause_rejected() {
        let f = Cnf::new(1, vec![Clause::empty()]).unwrap();
        assert_eq!(ns_degree(&f, 2).unwrap_err(), NsError::EmptyClause(0));
    }

    #[test]
    fn text_round_trips() {
        let peb = pebbling_formula(&Dag::path(3)).unwrap();
        let (_, cert) = ns_degree(&peb, 3).unwrap();
        assert_eq!(NsCertificate::parse(&cert.to_text(), &peb).unwrap(), cert);
        let d = pebbling_design(&Dag::path(3), 1, 3).unwrap();
        assert_eq!(Design::parse(&d.to_text()).unwrap(), d);
    }
}
