//! Sparse multilinear polynomials over F_p with monomials as variable masks.

use std::collections::BTreeMap;
use std::fmt;

use crate::bits;
use crate::cnf::Clause;
use crate::field::Fp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilinearPoly {
    pub n: usize,
    pub field: Fp,
    terms: BTreeMap<u64, u64>,
}

impl MultilinearPoly {
    pub fn zero(n: usize, field: Fp) -> Self {
        MultilinearPoly { n, field, terms: BTreeMap::new() }
    }

    pub fn monomial(n: usize, field: Fp, mask: u64, coeff: u64) -> Self {
        let mut p = Self::zero(n, field);
        p.add_term(mask, coeff);
        p
    }

    pub fn constant(n: usize, field: Fp, c: u64) -> Self {
        Self::monomial(n, field, 0, c)
    }

    pub fn from_terms(n: usize, field: Fp, terms: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut p = Self::zero(n, field);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, mask: u64, coeff: u64) {
        let c = coeff % self.field.p();
        if c == 0 {
            return;
        }
        let e = self.terms.entry(mask).or_insert(0);
        *e = self.field.add(*e, c);
        if *e == 0 {
            self.terms.remove(&mask);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coeff(&self, mask: u64) -> u64 {
        self.terms.get(&mask).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(0) == 1
    }

    /// Largest monomial size; zero for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    /// Union of all monomials.
    pub fn support(&self) -> u64 {
        self.terms.keys().fold(0, |a, &m| a | m)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in other.terms() {
            r.add_term(m, c);
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in other.terms() {
            r.add_term(m, self.field.neg(c));
        }
        r
    }

    pub fn scale(&self, k: u64) -> Self {
        Self::from_terms(self.n, self.field, self.terms().map(|(m, c)| (m, self.field.mul(c, k % self.field.p()))))
    }

    /// Product followed by multilinear reduction (z² = z).
    pub fn mul(&self, other: &Self) -> Self {
        let mut r = Self::zero(self.n, self.field);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                r.add_term(a | b, self.field.mul(ca, cb));
            }
        }
        r
    }

    /// Value at the 0/1 point whose ones are `ones`.
    pub fn eval(&self, ones: u64) -> u64 {
        self.terms().filter(|&(m, _)| m & !ones == 0).fold(0, |a, (_, c)| self.field.add(a, c))
    }

    /// Substitute the variables in `fixed` by the bits of `ones`.
    pub fn restrict(&self, fixed: u64, ones: u64) -> Self {
        let mut r = Self::zero(self.n, self.field);
        for (m, c) in self.terms() {
            if m & fixed & !ones == 0 {
                r.add_term(m & !fixed, c);
            }
        }
        r
    }

    /// E(C) = ∏_{z∈C⁺}(1 − z) ∏_{z∈C⁻} z, expanded.
    pub fn encode_clause(clause: &Clause, n: usize, field: Fp) -> Self {
        let neg = clause.neg_mask();
        let mut r = Self::zero(n, field);
        let pos: Vec<usize> = bits(clause.pos_mask()).collect();
        for s in 0..1u64 << pos.len() {
            let mask = bits(s).fold(neg, |a, i| a | 1 << pos[i]);
            let c = if s.count_ones() % 2 == 0 { 1 } else { field.p() - 1 };
            r.add_term(mask, c);
        }
        r
    }

    /// Quotient s with E(C)·s = self and s free of vars(C), if it exists.
    pub fn divide_by_clause(&self, clause: &Clause) -> Option<Self> {
        let s = self.restrict(clause.var_mask(), clause.neg_mask());
        let e = Self::encode_clause(clause, self.n, self.field);
        (e.mul(&s) == *self).then_some(s)
    }
}

impl fmt::Display for MultilinearPoly {
    /// Coefficients above p/2 print as negatives, so 1 − z reads naturally.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let p = self.field.p();
        for (k, (m, c)) in self.terms().enumerate() {
            let (neg, mag) = if c > p / 2 { (true, p - c) } else { (false, c) };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> = bits(m).map(|i| format!("z{i}")).collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1 {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Lit;

    #[test]
    fn clause_encodings() {
        let f = Fp::new(3).unwrap();
        let z = Clause::new(vec![Lit::pos(0)]).unwrap();
        assert_eq!(MultilinearPoly::encode_clause(&z, 1, f), MultilinearPoly::from_terms(1, f, [(0, 1), (1, 2)]));
        let zbar = Clause::new(vec![Lit::neg(0)]).unwrap();
        assert_eq!(MultilinearPoly::encode_clause(&zbar, 1, f), MultilinearPoly::monomial(1, f, 1, 1));
        let c = Clause::new(vec![Lit::pos(0), Lit::neg(1)]).unwrap();
        let e = MultilinearPoly::encode_clause(&c, 2, f);
        assert_eq!(e, MultilinearPoly::from_terms(2, f, [(2, 1), (3, 2)]));
        for a in 0..4u64 {
            assert_eq!(e.eval(a) == 0, !c.is_falsified_mask(a));
        }
    }

    #[test]
    fn division() {
        let f = Fp::new(2).unwrap();
        let c = Clause::new(vec![Lit::pos(0), Lit::neg(1)]).unwrap();
        let e = MultilinearPoly::encode_clause(&c, 3, f);
        let s = MultilinearPoly::from_terms(3, f, [(0, 1), (4, 1)]);
        assert_eq!(e.mul(&s).divide_by_clause(&c), Some(s));
        assert!(MultilinearPoly::constant(3, f, 1).divide_by_clause(&c).is_none());
    }
}
