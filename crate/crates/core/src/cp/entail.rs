//! Semantic entailment over 0/1 points.
//!
//! {P_1, P_2} ⊨ C fails iff some 0/1 point satisfies every P_i together with
//! the negated conclusion −Σ c x ≥ 1 − rhs. Small supports are enumerated in
//! Gray-code order; larger ones go to a branch and bound that fixes the
//! variable with the largest coefficient first.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::LinearInequality;

/// Supports up to this size are enumerated exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 22;

/// A system in dense form over the union support.
struct System<T> {
    vars: Vec<usize>,
    rows: Vec<(Vec<T>, T)>,
}

fn negated(c: &LinearInequality) -> LinearInequality {
    LinearInequality::new(c.terms().iter().map(|(v, a)| (*v, -a)), BigInt::one() - c.rhs())
}

fn dense(constraints: &[LinearInequality]) -> System<BigInt> {
    let mut vars: Vec<usize> = constraints.iter().flat_map(|c| c.vars()).collect();
    vars.sort_unstable();
    vars.dedup();
    let pos: BTreeMap<usize, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let rows = constraints
        .iter()
        .map(|c| {
            let mut row = vec![BigInt::zero(); vars.len()];
            for (v, a) in c.terms() {
                row[pos[v]] = a.clone();
            }
            (row, c.rhs().clone())
        })
        .collect();
    System { vars, rows }
}

/// i128 copy of the system when all partial sums stay far from overflow.
fn to_i128(sys: &System<BigInt>) -> Option<System<i128>> {
    let limit = BigInt::from(1u128 << 100);
    let mut rows = Vec::new();
    for (row, rhs) in &sys.rows {
        let mass: BigInt = row.iter().map(|a| a.abs()).sum::<BigInt>() + rhs.abs();
        if mass >= limit {
            return None;
        }
        rows.push((row.iter().map(|a| a.to_i128().unwrap()).collect(), rhs.to_i128().unwrap()));
    }
    Some(System { vars: sys.vars.clone(), rows })
}

trait Num: Clone + Ord + Signed {}
impl Num for i128 {}
impl Num for BigInt {}

/// A point satisfying every row, by Gray-code enumeration.
fn feasible_exhaustive<T: Num>(sys: &System<T>) -> Option<u64> {
    let n = sys.vars.len();
    assert!(n <= 40, "exhaustive search over {n} variables");
    let mut sums: Vec<T> = vec![T::zero(); sys.rows.len()];
    let ok = |sums: &[T]| sums.iter().zip(&sys.rows).all(|(s, (_, r))| s >= r);
    let mut point = 0u64;
    if ok(&sums) {
        return Some(0);
    }
    for step in 1u64..1 << n {
        let k = step.trailing_zeros() as usize;
        point ^= 1 << k;
        let on = point >> k & 1 == 1;
        for (s, (row, _)) in sums.iter_mut().zip(&sys.rows) {
            if !row[k].is_zero() {
                if on {
                    *s = s.clone() + row[k].clone();
                } else {
                    *s = s.clone() - row[k].clone();
                }
            }
        }
        if ok(&sums) {
            return Some(point);
        }
    }
    None
}

/// A point satisfying every row, by depth-first branch and bound.
fn feasible_bnb<T: Num>(sys: &System<T>) -> Option<u64> {
    let n = sys.vars.len();
    let weight = |k: usize| sys.rows.iter().map(|(r, _)| r[k].abs()).max().unwrap_or_else(T::zero);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| weight(b).cmp(&weight(a)).then(a.cmp(&b)));

    // Per row: current partial sum, and the extreme values the unfixed tail can add.
    let mut sums: Vec<T> = vec![T::zero(); sys.rows.len()];
    let mut max_rest: Vec<T> = sys.rows.iter().map(|(r, _)| r.iter().filter(|a| a.is_positive()).cloned().fold(T::zero(), |x, y| x + y)).collect();
    let mut min_rest: Vec<T> = sys.rows.iter().map(|(r, _)| r.iter().filter(|a| a.is_negative()).cloned().fold(T::zero(), |x, y| x + y)).collect();

    fn go<T: Num>(
        sys: &System<T>,
        order: &[usize],
        depth: usize,
        point: u64,
        sums: &mut [T],
        max_rest: &mut [T],
        min_rest: &mut [T],
    ) -> Option<u64> {
        let mut all_safe = true;
        for (i, (_, rhs)) in sys.rows.iter().enumerate() {
            if sums[i].clone() + max_rest[i].clone() < *rhs {
                return None;
            }
            if sums[i].clone() + min_rest[i].clone() < *rhs {
                all_safe = false;
            }
        }
        if all_safe {
            return Some(point);
        }
        let k = order[depth];
        for (i, (row, _)) in sys.rows.iter().enumerate() {
            let a = &row[k];
            if a.is_positive() {
                max_rest[i] = max_rest[i].clone() - a.clone();
            } else if a.is_negative() {
                min_rest[i] = min_rest[i].clone() - a.clone();
            }
        }
        // Try the value that helps the violated-conclusion row first: it is the last row.
        let last = &sys.rows.last().unwrap().0[k];
        let first_one = last.is_positive();
        let mut found = None;
        for value in [first_one, !first_one] {
            if value {
                for (i, (row, _)) in sys.rows.iter().enumerate() {
                    sums[i] = sums[i].clone() + row[k].clone();
                }
            }
            let r = go(sys, order, depth + 1, if value { point | 1 << k } else { point }, sums, max_rest, min_rest);
            if value {
                for (i, (row, _)) in sys.rows.iter().enumerate() {
                    sums[i] = sums[i].clone() - row[k].clone();
                }
            }
            if r.is_some() {
                found = r;
                break;
            }
        }
        for (i, (row, _)) in sys.rows.iter().enumerate() {
            let a = &row[k];
            if a.is_positive() {
                max_rest[i] = max_rest[i].clone() + a.clone();
            } else if a.is_negative() {
                min_rest[i] = min_rest[i].clone() + a.clone();
            }
        }
        found
    }
    assert!(n <= 64, "branch and bound limited to 64 variables");
    go(sys, &order, 0, 0, &mut sums, &mut max_rest, &mut min_rest)
}

fn system(premises: &[&LinearInequality], conclusion: &LinearInequality) -> System<BigInt> {
    let mut constraints: Vec<LinearInequality> = premises.iter().map(|&p| p.clone()).collect();
    constraints.push(negated(conclusion));
    dense(&constraints)
}

fn decode(sys_vars: &[usize], point: u64) -> Vec<usize> {
    sys_vars.iter().enumerate().filter(|(i, _)| point >> i & 1 == 1).map(|(_, &v)| v).collect()
}

/// Exhaustive check; returns a counterexample (its true variables) if one exists.
pub fn counterexample_exhaustive(premises: &[&LinearInequality], conclusion: &LinearInequality) -> Option<Vec<usize>> {
    let sys = system(premises, conclusion);
    let point = match to_i128(&sys) {
        Some(s) => feasible_exhaustive(&s),
        None => feasible_exhaustive(&sys),
    };
    point.map(|p| decode(&sys.vars, p))
}

/// Branch-and-bound check; returns a counterexample if one exists.
pub fn counterexample_bnb(premises: &[&LinearInequality], conclusion: &LinearInequality) -> Option<Vec<usize>> {
    let sys = system(premises, conclusion);
    let point = match to_i128(&sys) {
        Some(s) => feasible_bnb(&s),
        None => feasible_bnb(&sys),
    };
    point.map(|p| decode(&sys.vars, p))
}

/// Every 0/1 point satisfying the premises satisfies the conclusion.
pub fn semantic_entails(premises: &[&LinearInequality], conclusion: &LinearInequality) -> bool {
    let mut support: Vec<usize> = premises.iter().flat_map(|p| p.vars()).chain(conclusion.vars()).collect();
    support.sort_unstable();
    support.dedup();
    if support.len() <= EXHAUSTIVE_LIMIT {
        counterexample_exhaustive(premises, conclusion).is_none()
    } else {
        counterexample_bnb(premises, conclusion).is_none()
    }
}
