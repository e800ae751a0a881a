use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::cnf::Clause;

/// Σ a_i x_i ≥ rhs with terms sorted by variable and no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearInequality {
    terms: Vec<(usize, BigInt)>,
    rhs: BigInt,
}

impl LinearInequality {
    pub fn new(terms: impl IntoIterator<Item = (usize, BigInt)>, rhs: BigInt) -> Self {
        let mut t: Vec<(usize, BigInt)> = terms.into_iter().collect();
        t.sort_by_key(|(v, _)| *v);
        let mut merged: Vec<(usize, BigInt)> = Vec::with_capacity(t.len());
        for (v, c) in t {
            match merged.last_mut() {
                Some((lv, lc)) if *lv == v => *lc += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        LinearInequality { terms: merged, rhs }
    }

    /// Small-integer convenience constructor.
    pub fn from_i64(terms: &[(usize, i64)], rhs: i64) -> Self {
        Self::new(terms.iter().map(|&(v, c)| (v, BigInt::from(c))), BigInt::from(rhs))
    }

    /// +1 per positive literal, −1 per negative, rhs 1 − #negative.
    pub fn from_clause(clause: &Clause) -> Self {
        let negs = clause.lits().iter().filter(|l| !l.pos).count() as i64;
        Self::new(
            clause.lits().iter().map(|l| (l.var, BigInt::from(if l.pos { 1 } else { -1 }))),
            BigInt::from(1 - negs),
        )
    }

    /// x_v ≥ 0
    pub fn var_lo(v: usize) -> Self {
        Self::from_i64(&[(v, 1)], 0)
    }

    /// −x_v ≥ −1
    pub fn var_hi(v: usize) -> Self {
        Self::from_i64(&[(v, -1)], -1)
    }

    pub fn contradiction() -> Self {
        Self::new([], BigInt::one())
    }

    pub fn terms(&self) -> &[(usize, BigInt)] {
        &self.terms
    }

    pub fn rhs(&self) -> &BigInt {
        &self.rhs
    }

    pub fn coeff(&self, v: usize) -> BigInt {
        self.terms.binary_search_by_key(&v, |(u, _)| *u).map(|i| self.terms[i].1.clone()).unwrap_or_default()
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().map(|(v, _)| *v)
    }

    /// Empty left-hand side with positive right-hand side.
    pub fn is_contradiction(&self) -> bool {
        self.terms.is_empty() && self.rhs.is_positive()
    }

    /// c·self + d·other
    pub fn combine(&self, c: &BigInt, other: &Self, d: &BigInt) -> Self {
        Self::new(
            self.terms.iter().map(|(v, a)| (*v, a * c)).chain(other.terms.iter().map(|(v, b)| (*v, b * d))),
            &self.rhs * c + &other.rhs * d,
        )
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.terms.iter().map(|(v, a)| (*v, a * c)), &self.rhs * c)
    }

    /// Division with rounding up, when c divides every coefficient.
    pub fn divide(&self, c: &BigInt) -> Option<Self> {
        if !c.is_positive() || self.terms.iter().any(|(_, a)| !a.is_multiple_of(c)) {
            return None;
        }
        Some(LinearInequality {
            terms: self.terms.iter().map(|(v, a)| (*v, a / c)).collect(),
            rhs: Integer::div_ceil(&self.rhs, c),
        })
    }

    pub fn lhs_value(&self, assignment: &dyn Fn(usize) -> bool) -> BigInt {
        self.terms.iter().filter(|(v, _)| assignment(*v)).map(|(_, a)| a.clone()).sum()
    }

    pub fn satisfied_by(&self, assignment: &dyn Fn(usize) -> bool) -> bool {
        self.lhs_value(assignment) >= self.rhs
    }

    /// Same left-hand side and at least as strong a right-hand side.
    pub fn dominates(&self, other: &Self) -> bool {
        self.terms == other.terms && self.rhs >= other.rhs
    }

    /// Bit length of the largest coefficient or right-hand side.
    pub fn coeff_bits(&self) -> u64 {
        self.terms.iter().map(|(_, a)| a.bits()).chain(std::iter::once(self.rhs.bits())).max().unwrap_or(0)
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms.last().map(|(v, _)| *v)
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        let (lhs, rhs) = s.split_once(">=").ok_or_else(|| format!("missing '>=' in '{s}'"))?;
        let rhs: BigInt = rhs.trim().parse().map_err(|_| format!("bad right-hand side '{}'", rhs.trim()))?;
        let mut terms = Vec::new();
        for tok in lhs.split_whitespace() {
            if tok == "0" {
                continue;
            }
            let (c, v) = tok.split_once("*x").ok_or_else(|| format!("bad term '{tok}'"))?;
            let c: BigInt = c.parse().map_err(|_| format!("bad coefficient in '{tok}'"))?;
            let v: usize = v.parse().map_err(|_| format!("bad variable in '{tok}'"))?;
            terms.push((v, c));
        }
        Ok(Self::new(terms, rhs))
    }
}

impl fmt::Display for LinearInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 >= {}", self.rhs);
        }
        for (i, (v, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}*x{v}")?;
        }
        write!(f, " >= {}", self.rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Lit;

    #[test]
    fn clause_translation() {
        let c = Clause::new(vec![Lit::pos(0), Lit::pos(1), Lit::neg(2)]).unwrap();
        assert_eq!(LinearInequality::from_clause(&c), LinearInequality::from_i64(&[(0, 1), (1, 1), (2, -1)], 0));
        let x = Clause::new(vec![Lit::pos(0)]).unwrap();
        assert_eq!(LinearInequality::from_clause(&x), LinearInequality::from_i64(&[(0, 1)], 1));
        let nx = Clause::new(vec![Lit::neg(0)]).unwrap();
        assert_eq!(LinearInequality::from_clause(&nx), LinearInequality::from_i64(&[(0, -1)], 0));
    }

    #[test]
    fn rules() {
        let a = LinearInequality::from_i64(&[(0, 1)], 1);
        let b = LinearInequality::from_i64(&[(0, -1)], 0);
        assert!(a.combine(&BigInt::one(), &b, &BigInt::one()).is_contradiction());
        let two = BigInt::from(2);
        let d = LinearInequality::from_i64(&[(0, 2), (1, 4)], 3).divide(&two).unwrap();
        assert_eq!(d, LinearInequality::from_i64(&[(0, 1), (1, 2)], 2));
        assert!(LinearInequality::from_i64(&[(0, 2), (1, 3)], 3).divide(&two).is_none());
        let neg = LinearInequality::from_i64(&[(0, 2)], -3).divide(&two).unwrap();
        assert_eq!(neg.rhs(), &BigInt::from(-1));
    }

    #[test]
    fn text() {
        let i = LinearInequality::from_i64(&[(3, -2), (0, 5)], -7);
        assert_eq!(i.to_string(), "5*x0 -2*x3 >= -7");
        assert_eq!(LinearInequality::parse(&i.to_string()).unwrap(), i);
        assert_eq!(LinearInequality::parse("0 >= 2").unwrap(), LinearInequality::new([], BigInt::from(2)));
    }
}
