//! Constant-space derivations of clauses: the falsified-clause step, the
//! binary accumulator and the clause-derivation procedure built on both.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::builder::{pow2, Builder, Id, Literal};
use super::GenError;
use crate::cnf::{Clause, Lit};
use crate::cp::{Context, CpProof, LinearInequality, ProofMode, Rules, Shape};

/// Where a premise comes from when it is needed.
#[derive(Debug, Clone)]
pub enum Source {
    Raw(LinearInequality),
    Clause(usize),
    Line(Id),
}

impl Source {
    fn ineq<'b>(&'b self, b: &'b Builder) -> &'b LinearInequality {
        match self {
            Source::Raw(a) => a,
            Source::Clause(k) => b.clause(*k),
            Source::Line(id) => b.get(*id),
        }
    }

    fn materialize(&self, b: &mut Builder) -> Id {
        match self {
            Source::Raw(a) => b.raw(a),
            Source::Clause(k) => b.ax(*k),
            Source::Line(id) => b.copy(*id),
        }
    }
}

/// The clause falsified exactly by `point` on `vars`.
pub fn falsified_clause(vars: &[usize], point: &dyn Fn(usize) -> bool) -> Clause {
    Clause::new(vars.iter().map(|&v| Lit { var: v, pos: !point(v) }).collect()).expect("distinct variables")
}

/// Turn `line`, falsified at `point`, into Σ ℓ_v ≥ 1 over `targets`, where ℓ_v
/// is the literal false at `point`. Variables outside `targets` are weakened
/// away first. Consumes `line`.
pub fn weaken_to_falsified(b: &mut Builder, line: Id, point: &dyn Fn(usize) -> bool, targets: &[usize]) -> Result<Id, GenError> {
    let mut line = line;
    let extra: Vec<(usize, BigInt)> = b.get(line).terms().iter().filter(|(v, _)| !targets.contains(v)).cloned().collect();
    for (v, a) in extra {
        line = b.add_var(line, v, &-a);
    }
    // Rewrite in literal terms: a·x = a·ℓ when x = 0 at the point, a − a·ℓ otherwise.
    let ineq = b.get(line);
    let mut shifted = ineq.rhs().clone();
    let mut coeffs = Vec::with_capacity(targets.len());
    for &v in targets {
        let a = ineq.coeff(v);
        if point(v) {
            shifted -= &a;
            coeffs.push(-a);
        } else {
            coeffs.push(a);
        }
    }
    if shifted < BigInt::one() {
        return Err(GenError::Internal(format!("'{}' is not falsified at the point", b.get(line))));
    }
    let m = coeffs.iter().max().cloned().unwrap_or_else(BigInt::one).max(BigInt::one());
    for (&v, a) in targets.iter().zip(&coeffs) {
        let c = &m - a;
        if c.is_positive() {
            line = b.add_lit(line, Literal { var: v, neg: point(v) }, &c, true);
        }
    }
    b.div(line, m)
}

/// The accumulator Σ 2^i λ_i ≥ bound over `positions` (λ_i is the literal of
/// position i), built from C_β lines supplied by `provider` for every β below
/// `bound`. The provider must leave exactly one new live line Σ ℓ ≥ r, r ≥ 1,
/// where ℓ_i is λ_i when β_i = 0 and 1 − λ_i otherwise.
pub fn accumulate(
    b: &mut Builder,
    positions: &[Literal],
    bound: u64,
    provider: &mut dyn FnMut(&mut Builder, u64) -> Result<Id, GenError>,
) -> Result<Id, GenError> {
    let n = positions.len();
    assert!(n >= 1 && n < 64, "accumulator over {n} positions");
    assert!(bound <= 1 << n);
    let mut acc = b.lit_lo(positions[0]);
    for (i, &p) in positions.iter().enumerate().skip(1) {
        acc = b.add_lit(acc, p, &pow2(i), true);
    }
    for beta in 0..bound {
        let r = provider(b, beta)?;
        let next = increment(b, positions, acc, beta, r)?;
        b.del(acc);
        acc = next;
    }
    Ok(acc)
}

/// Copy of the accumulator with positions below `below` weakened away and the
/// rest divided by 2^below.
fn trimmed(b: &mut Builder, acc: Id, positions: &[Literal], below: usize) -> Result<Id, GenError> {
    let mut t = b.copy(acc);
    for (i, &p) in positions.iter().enumerate().take(below) {
        t = b.add_lit(t, p, &pow2(i), false);
    }
    b.div(t, pow2(below))
}

/// From Acc_β and C_β (line `r`, consumed) derive Acc_{β+1}.
///
/// With H_t = Σ_{i≥t} 2^{i−t} λ_i and D_t = H_t − ⌊β/2^t⌋, the line
/// R_t: D_t + Σ_{i<t} ℓ_i ≥ 1 goes from R_n = C_β down to R_0 = Acc_{β+1}.
/// Every level re-trims the accumulator, so a step costs O(n²) lines.
fn increment(b: &mut Builder, positions: &[Literal], acc: Id, beta: u64, r: Id) -> Result<Id, GenError> {
    let n = positions.len();
    let ell = |i: usize| Literal { var: positions[i].var, neg: positions[i].neg ^ (beta >> i & 1 == 1) };
    let mut r = r;
    for t in (0..n).rev() {
        if beta >> t & 1 == 0 {
            if t == n - 1 {
                continue;
            }
            // D_{t+1} ≥ 0, added once: R_t = R_{t+1} + D_{t+1}.
            let a = trimmed(b, acc, positions, t + 1)?;
            let next = b.lin(r, a, 1, 1);
            b.del(r);
            b.del(a);
            r = next;
        } else {
            // 2H_{t+1} + λ_t ≥ β_t, then + λ_t and halve: D_{t+1} − ℓ_t ≥ 0.
            let y = trimmed(b, acc, positions, t)?;
            let y = b.add_lit(y, positions[t], &BigInt::one(), true);
            let y = b.div(y, 2)?;
            let y2 = b.copy(y);
            let mut z = b.lin(r, y, 1, 1);
            b.del(r);
            b.del(y);
            for i in 0..t {
                z = b.add_lit(z, ell(i), &BigInt::one(), true);
            }
            let z = b.div(z, 2)?;
            let next = b.lin(z, y2, 1, 1);
            b.del(z);
            b.del(y2);
            r = next;
        }
    }
    Ok(r)
}

/// Derive `clause` from the premises in `f` over `vars` in constant space.
///
/// Variables outside the clause take the low accumulator positions; clause
/// variables take the top ones, complemented when the literal is negative, so
/// the accumulator Σ 2^i λ_i ≥ 2^m weakens to the clause itself.
pub fn derive_clause(b: &mut Builder, f: &[Source], vars: &[usize], clause: &Clause) -> Result<Id, GenError> {
    let mut positions: Vec<Literal> =
        vars.iter().filter(|&&v| !clause.vars().any(|u| u == v)).map(|&v| Literal { var: v, neg: false }).collect();
    let m = positions.len();
    positions.extend(clause.lits().iter().map(|l| Literal { var: l.var, neg: !l.pos }));
    let all: Vec<usize> = positions.iter().map(|p| p.var).collect();
    if positions.is_empty() {
        // No variables at all: some premise is already a contradiction.
        let s = f
            .iter()
            .find(|s| s.ineq(b).is_contradiction())
            .ok_or_else(|| GenError::NotImplied { witness: vec![] })?
            .clone();
        return Ok(s.materialize(b));
    }
    let mut provider = |b: &mut Builder, beta: u64| -> Result<Id, GenError> {
        let point: HashMap<usize, bool> = positions.iter().enumerate().map(|(i, p)| (p.var, (beta >> i & 1 == 1) ^ p.neg)).collect();
        let at = |v: usize| point.get(&v).copied().unwrap_or(false);
        let s = f
            .iter()
            .find(|s| !s.ineq(b).satisfied_by(&at))
            .ok_or_else(|| GenError::NotImplied { witness: all.iter().filter(|&&v| at(v)).copied().collect() })?
            .clone();
        let line = s.materialize(b);
        weaken_to_falsified(b, line, &at, &all)
    };
    let acc = accumulate(b, &positions, 1 << m, &mut provider)?;
    let falsify: HashMap<usize, bool> = clause.lits().iter().map(|l| (l.var, !l.pos)).collect();
    let targets: Vec<usize> = clause.vars().collect();
    weaken_to_falsified(b, acc, &|v| falsify.get(&v).copied().unwrap_or(false), &targets)
}

fn sorted_vars<'x>(it: impl Iterator<Item = usize> + 'x) -> Vec<usize> {
    let mut v: Vec<usize> = it.collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Derivation of C_α from the first axiom falsified by α. Axioms are raw
/// lines of `Context::from_inequalities`.
pub fn gen_falsified_clause(axioms: &[LinearInequality], alpha: &[bool]) -> Result<CpProof, GenError> {
    let at = |v: usize| alpha.get(v).copied().unwrap_or(false);
    if let Some(v) = axioms.iter().flat_map(|a| a.vars()).find(|&v| v >= alpha.len()) {
        return Err(GenError::Precondition(format!("assignment does not cover variable {v}")));
    }
    let first = axioms.iter().find(|a| !a.satisfied_by(&at)).ok_or(GenError::AllSatisfied)?;
    let vars: Vec<usize> = (0..alpha.len()).collect();
    let target = LinearInequality::from_clause(&falsified_clause(&vars, &at));
    let mut b = Builder::new(&[]);
    let line = b.raw(first);
    weaken_to_falsified(&mut b, line, &at, &vars)?;
    Ok(b.finish(ProofMode::Derivation(target), Rules::Syntactic, Shape::Dag))
}

/// Σ_{i<n} 2^i x_i ≥ bound, where `provider(α)` returns a derivation of
/// C_α (over x_0..x_{n−1}) for each α below the bound.
pub fn gen_accumulator(
    ctx: &Context,
    n: usize,
    bound: u64,
    provider: &mut dyn FnMut(u64) -> Result<CpProof, GenError>,
) -> Result<CpProof, GenError> {
    if n == 0 || n >= 63 || bound > 1 << n {
        return Err(GenError::Precondition(format!("need 1 ≤ n < 63 and bound ≤ 2^n (n = {n}, bound = {bound})")));
    }
    let positions: Vec<Literal> = (0..n).map(|v| Literal { var: v, neg: false }).collect();
    let vars: Vec<usize> = (0..n).collect();
    let mut b = Builder::new(&ctx.clauses);
    let mut wrapped = |b: &mut Builder, alpha: u64| -> Result<Id, GenError> {
        let sub = provider(alpha).map_err(|e| GenError::Provider { alpha, source: Box::new(e) })?;
        let target = LinearInequality::from_clause(&falsified_clause(&vars, &|v| alpha >> v & 1 == 1));
        b.splice(&sub, &target).map_err(|e| GenError::Provider { alpha, source: Box::new(e) })
    };
    accumulate(&mut b, &positions, bound, &mut wrapped)?;
    let target = LinearInequality::new((0..n).map(|i| (i, pow2(i))), BigInt::from(bound));
    Ok(b.finish(ProofMode::Derivation(target), Rules::Syntactic, Shape::Dag))
}

/// Every 0/1 point satisfying `f` satisfies `clause`; otherwise a witness
/// (true variables of the support).
pub fn check_implication(f: &[LinearInequality], clause: &Clause) -> Result<Vec<usize>, GenError> {
    let vars = sorted_vars(f.iter().flat_map(|a| a.vars().collect::<Vec<_>>()).chain(clause.vars()));
    if vars.len() > 20 {
        return Err(GenError::Precondition(format!("{} variables exceed the limit of 20", vars.len())));
    }
    for mask in 0u64..1 << vars.len() {
        let point: HashMap<usize, bool> = vars.iter().enumerate().map(|(i, &v)| (v, mask >> i & 1 == 1)).collect();
        let at = |v: usize| point[&v];
        if f.iter().all(|a| a.satisfied_by(&at)) && !clause.lits().iter().any(|l| l.eval(at(l.var))) {
            return Err(GenError::NotImplied { witness: vars.iter().filter(|&&v| at(v)).copied().collect() });
        }
    }
    Ok(vars)
}

/// Constant-space derivation of `clause` from the raw axioms `f`.
pub fn gen_clause_derivation(f: &[LinearInequality], clause: &Clause) -> Result<CpProof, GenError> {
    let vars = check_implication(f, clause)?;
    let mut b = Builder::new(&[]);
    let sources: Vec<Source> = f.iter().cloned().map(Source::Raw).collect();
    derive_clause(&mut b, &sources, &vars, clause)?;
    let target = LinearInequality::from_clause(clause);
    Ok(b.finish(ProofMode::Derivation(target), Rules::Syntactic, Shape::Dag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp::verify_proof;

    fn ineq(t: &[(usize, i64)], r: i64) -> LinearInequality {
        LinearInequality::from_i64(t, r)
    }

    fn ctx(n: usize, f: &[LinearInequality]) -> Context {
        Context::from_inequalities(n, f.iter().cloned())
    }

    #[test]
    fn falsified_clause_examples() {
        let f = [ineq(&[(0, 1)], 1)];
        let p = gen_falsified_clause(&f, &[false]).unwrap();
        assert!(verify_proof(&ctx(1, &f), &p).is_ok());

        let f = [ineq(&[(0, 1), (1, 1)], 2)];
        let p = gen_falsified_clause(&f, &[false, true]).unwrap();
        assert_eq!(p.mode, ProofMode::Derivation(ineq(&[(0, 1), (1, -1)], 0)));
        assert!(verify_proof(&ctx(2, &f), &p).is_ok());

        assert_eq!(gen_falsified_clause(&f, &[true, true]).unwrap_err(), GenError::AllSatisfied);
    }

    fn tautology_provider(n: usize) -> impl FnMut(u64) -> Result<CpProof, GenError> {
        move |alpha| {
            let point: Vec<bool> = (0..n).map(|i| alpha >> i & 1 == 1).collect();
            let vars: Vec<usize> = (0..n).collect();
            let c = LinearInequality::from_clause(&falsified_clause(&vars, &|v| point[v]));
            gen_falsified_clause(&[c], &point)
        }
    }

    fn tautology(n: usize) -> Vec<LinearInequality> {
        (0..1u64 << n)
            .map(|a| LinearInequality::from_clause(&falsified_clause(&(0..n).collect::<Vec<_>>(), &|v| a >> v & 1 == 1)))
            .collect()
    }

    #[test]
    fn accumulator_examples() {
        let c = ctx(2, &tautology(2));
        let p = gen_accumulator(&c, 2, 1, &mut tautology_provider(2)).unwrap();
        assert_eq!(p.mode, ProofMode::Derivation(ineq(&[(0, 1), (1, 2)], 1)));
        verify_proof(&c, &p).unwrap();

        let c1 = ctx(1, &[]);
        let p = gen_accumulator(&c1, 1, 0, &mut tautology_provider(1)).unwrap();
        assert_eq!(p.mode, ProofMode::Derivation(ineq(&[(0, 1)], 0)));
        verify_proof(&c1, &p).unwrap();

        for n in 1..=4 {
            let c = ctx(n, &tautology(n));
            for bound in 0..=1u64 << n {
                let p = gen_accumulator(&c, n, bound, &mut tautology_provider(n)).unwrap();
                verify_proof(&c, &p).unwrap_or_else(|e| panic!("n={n} bound={bound}: {e}"));
            }
        }
    }

    #[test]
    fn envelopes() {
        use crate::calibration::{C_B1, C_B2, S_B1, S_B2};
        for n in 1..=5 {
            let c = ctx(n, &tautology(n));
            for alpha in 0..1u64 << n {
                let mut prov = tautology_provider(n);
                let m = verify_proof(&c, &prov(alpha).unwrap()).unwrap();
                assert!(m.line_space <= S_B2 && m.length <= C_B2 * n, "{m:?}");
            }
            for bound in [1, (1u64 << n) / 2, 1 << n] {
                let mut provided = 0;
                let mut inner = tautology_provider(n);
                let mut prov = |a: u64| {
                    let p = inner(a)?;
                    provided += p.steps.len();
                    Ok(p)
                };
                let p = gen_accumulator(&c, n, bound, &mut prov).unwrap();
                let m = verify_proof(&c, &p).unwrap();
                assert!(m.line_space <= S_B1, "{m:?}");
                assert!(m.length - provided <= C_B1 * n * n * bound as usize + n + 1, "n={n} bound={bound} {m:?}");
            }
        }
    }

    #[test]
    fn full_accumulator_contradicts() {
        let c = ctx(3, &tautology(3));
        let p = gen_accumulator(&c, 3, 8, &mut tautology_provider(3)).unwrap();
        let m = verify_proof(&c, &p).unwrap();
        assert!(m.line_space <= 8, "{m:?}");
    }

    #[test]
    fn clause_derivations() {
        let f = [ineq(&[(0, 1)], 1)];
        let p = gen_clause_derivation(&f, &Clause::new(vec![Lit::pos(0)]).unwrap()).unwrap();
        verify_proof(&ctx(1, &f), &p).unwrap();

        let f = [ineq(&[(0, 1), (1, 1)], 2)];
        let p = gen_clause_derivation(&f, &Clause::new(vec![Lit::pos(0)]).unwrap()).unwrap();
        verify_proof(&ctx(2, &f), &p).unwrap();

        // The pair x − y ≥ 0, y − x ≥ 0 implies x̄ ∨ y.
        let f = [ineq(&[(0, 1), (1, -1)], 0), ineq(&[(0, -1), (1, 1)], 0)];
        let c = Clause::new(vec![Lit::neg(0), Lit::pos(1)]).unwrap();
        let p = gen_clause_derivation(&f, &c).unwrap();
        verify_proof(&ctx(2, &f), &p).unwrap();

        let e = gen_clause_derivation(&f, &Clause::new(vec![Lit::pos(0)]).unwrap()).unwrap_err();
        assert!(matches!(e, GenError::NotImplied { .. }));
    }

    #[test]
    fn refutes_complete_tautology() {
        for n in 1..=4 {
            let f = tautology(n);
            let p = gen_clause_derivation(&f, &Clause::empty()).unwrap();
            verify_proof(&ctx(n, &f), &p).unwrap();
        }
    }
}
