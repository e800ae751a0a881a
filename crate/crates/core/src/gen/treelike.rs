//! Tree-like semantic refutations of pebbling formulas lifted with equality.
//!
//! Each vertex v of G becomes a blob of q vertices v_1..v_q of G′, one per
//! bit, with complete bipartite edges between blobs, and L(v_j) = x_{v,j} − y_{v,j}.
//! The refutation keeps L(W) ≥ 0 and −L(W) ≥ 0 for the processed set W
//! (newest vertex least significant) and folds in one blob vertex at a time.

use std::collections::HashMap;

use num_bigint::BigInt;

use super::builder::{pow2, Builder, Id};
use super::GenError;
use crate::cnf::{pebbling_formula, Clause, Lit};
use crate::cp::{CpProof, LinearInequality, ProofMode, Rules, Shape};
use crate::dag::Dag;
use crate::lift::{lift_cnf, x_var, y_var, Gadget};

/// The blob graph: vertex v·q + j stands for bit j of v.
pub fn blob_graph(dag: &Dag, q: usize) -> Dag {
    let mut edges = Vec::new();
    for &(u, w) in dag.edges() {
        for i in 0..q {
            for j in 0..q {
                edges.push((u * q + i, w * q + j));
            }
        }
    }
    Dag::new(dag.n() * q, &edges).expect("blobs of an acyclic graph")
}

struct Tree<'a> {
    b: Builder<'a>,
    index: HashMap<Clause, usize>,
}

impl Tree<'_> {
    fn axiom(&mut self, c: &Clause) -> Option<Id> {
        self.index.get(c).copied().map(|k| self.b.ax(k))
    }

    /// The clause `base` from lifted axioms, resolving away `free` with
    /// arity-2 semantic steps. A leaf uses base ∪ row if it is an axiom,
    /// otherwise the row clause alone.
    fn resolve(&mut self, base: &[Lit], free: &[usize], fixed: &mut Vec<Lit>) -> Result<Id, GenError> {
        let clause = Clause::new(base.iter().chain(fixed.iter()).copied().collect()).expect("distinct variables");
        if fixed.len() == free.len() {
            if let Some(id) = self.axiom(&clause) {
                return Ok(id);
            }
            let row = Clause::new(fixed.clone()).expect("distinct variables");
            return self.axiom(&row).ok_or_else(|| GenError::Internal(format!("no lifted axiom covers {clause}")));
        }
        let v = free[fixed.len()];
        let mut kids = Vec::with_capacity(2);
        for lit in [Lit::pos(v), Lit::neg(v)] {
            fixed.push(lit);
            kids.push(self.resolve(base, free, fixed)?);
            fixed.pop();
        }
        let r = self.b.sem(&kids, LinearInequality::from_clause(&clause));
        for k in kids {
            self.b.del(k);
        }
        Ok(r)
    }

    /// Λ_0 = 2^{p+1}·line + S with S = Σ_j 2^j x_{u_j}. The extra factor 2
    /// keeps L(W) ≤ −1 infeasible for every value of the slack.
    fn slack_start(&mut self, line: Id, pred_x: &[usize]) -> Id {
        let p = pred_x.len();
        let mut lam = self.b.scale(line, pow2(p + 1));
        self.b.del(line);
        for (j, &x) in pred_x.iter().enumerate() {
            let t = self.b.vlo(x);
            let next = self.b.lin(lam, t, 1, pow2(j));
            self.b.del(lam);
            self.b.del(t);
            lam = next;
        }
        lam
    }
}

/// Literals of J_b over the predecessor blobs: both variables of u_j take
/// the polarity that is false when x = y = b_j.
fn j_lits(q: usize, preds: &[(usize, usize)], beta: u64) -> Vec<Lit> {
    preds
        .iter()
        .enumerate()
        .flat_map(|(j, &(u, i))| {
            let pos = beta >> j & 1 == 0;
            [Lit { var: x_var(q, u, i), pos }, Lit { var: y_var(q, u, i), pos }]
        })
        .collect()
}

/// Tree-like semantic refutation of Peb_G ∘ EQ_q (canonical encoding).
///
/// Every blob axiom L(w) + J_b ≥ 0 is itself resolved out of the lifted
/// clauses, so the proof only uses axioms of the formula.
pub fn gen_treelike_semantic(dag: &Dag, q: usize) -> Result<CpProof, GenError> {
    if dag.max_indegree() > 2 {
        return Err(GenError::Precondition(format!("in-degree {} exceeds 2", dag.max_indegree())));
    }
    if q == 0 {
        return Err(GenError::Precondition("q must be at least 1".into()));
    }
    let sink = dag.sink()?;
    let lifted = lift_cnf(&pebbling_formula(dag)?, &Gadget::eq(q));
    let clauses: Vec<LinearInequality> = lifted.cnf.clauses.iter().map(LinearInequality::from_clause).collect();
    let index = lifted.cnf.clauses.iter().enumerate().map(|(k, c)| (c.clone(), k)).collect();
    let mut t = Tree { b: Builder::new(&clauses), index };
    let lw = |v: usize, i: usize| LinearInequality::from_i64(&[(x_var(q, v, i), 1), (y_var(q, v, i), -1)], 0);

    // (line, current inequality) for L(W) ≥ 0 and −L(W) ≥ 0.
    let mut state: Option<[(Id, LinearInequality); 2]> = None;
    for &w in dag.topo_order() {
        let preds: Vec<(usize, usize)> = dag.preds(w).iter().flat_map(|&u| (0..q).map(move |i| (u, i))).collect();
        let pred_x: Vec<usize> = preds.iter().map(|&(u, i)| x_var(q, u, i)).collect();
        let p = preds.len();
        if w == sink {
            break;
        }
        for i in 0..q {
            let free: Vec<usize> = (0..q).filter(|&k| k != i).flat_map(|k| [x_var(q, w, k), y_var(q, w, k)]).collect();
            let mut next = Vec::with_capacity(2);
            for (side, sign) in [(0usize, 1i64), (1, -1)] {
                // The w part of the axiom: x ∨ ȳ for the lower bound, x̄ ∨ y for the upper.
                let wl = [Lit { var: x_var(q, w, i), pos: sign > 0 }, Lit { var: y_var(q, w, i), pos: sign < 0 }];
                let lwi = lw(w, i).scale(&BigInt::from(sign));
                let cur = state.as_ref().map(|s| s[side].clone());
                let line = match cur {
                    None if p == 0 => {
                        let a = t.resolve(&wl, &free, &mut Vec::new())?;
                        (a, lwi)
                    }
                    None => return Err(GenError::Internal(format!("vertex {w} has predecessors but nothing was derived"))),
                    Some((id, ineq)) => {
                        let target = ineq.combine(&BigInt::from(2), &lwi, &BigInt::from(1));
                        if p == 0 {
                            let a = t.resolve(&wl, &free, &mut Vec::new())?;
                            let r = t.b.lin(id, a, 2, 1);
                            t.b.del(id);
                            t.b.del(a);
                            (r, target)
                        } else {
                            let mut lam = t.slack_start(id, &pred_x);
                            let mut lam_ineq = t.b.get(lam).clone();
                            for beta in 0..1u64 << p {
                                let mut base = j_lits(q, &preds, beta);
                                base.extend(wl);
                                let a = t.resolve(&base, &free, &mut Vec::new())?;
                                lam_ineq = lam_ineq.combine(&BigInt::from(1), &lwi, &BigInt::from(1));
                                let r = t.b.sem(&[lam, a], lam_ineq.clone());
                                t.b.del(lam);
                                t.b.del(a);
                                lam = r;
                            }
                            let r = t.b.sem(&[lam], target.clone());
                            t.b.del(lam);
                            (r, target)
                        }
                    }
                };
                next.push(line);
            }
            let [lo, hi]: [(Id, LinearInequality); 2] = next.try_into().expect("two sides");
            state = Some([lo, hi]);
        }
    }

    // Sink stage: J_b ≥ 1 for every b, from the sink's axioms and the sink clauses.
    let preds: Vec<(usize, usize)> = dag.preds(sink).iter().flat_map(|&u| (0..q).map(move |i| (u, i))).collect();
    let pred_x: Vec<usize> = preds.iter().map(|&(u, i)| x_var(q, u, i)).collect();
    let free: Vec<usize> = (0..q).flat_map(|k| [x_var(q, sink, k), y_var(q, sink, k)]).collect();
    let p = preds.len();
    match state {
        None => {
            t.resolve(&[], &free, &mut Vec::new())?;
        }
        Some(sides) => {
            let mut ends = Vec::with_capacity(2);
            for (id, ineq) in sides {
                let mut lam = t.slack_start(id, &pred_x);
                let mut lam_ineq = t.b.get(lam).clone();
                for beta in 0..1u64 << p {
                    let c = t.resolve(&j_lits(q, &preds, beta), &free, &mut Vec::new())?;
                    lam_ineq = LinearInequality::new(lam_ineq.terms().to_vec(), lam_ineq.rhs() + 1);
                    let r = t.b.sem(&[lam, c], lam_ineq.clone());
                    t.b.del(lam);
                    t.b.del(c);
                    lam = r;
                }
                let one = LinearInequality::new(ineq.terms().to_vec(), BigInt::from(1));
                let r = t.b.sem(&[lam], one);
                t.b.del(lam);
                ends.push(r);
            }
            t.b.lin(ends[0], ends[1], 1, 1);
        }
    }
    Ok(t.b.finish(ProofMode::Refutation, Rules::Semantic, Shape::Tree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp::{replay, semantic_entails, Context, Origin};

    fn check(dag: &Dag, q: usize) -> usize {
        let p = gen_treelike_semantic(dag, q).unwrap();
        let ctx = Context::from_cnf(&lift_cnf(&pebbling_formula(dag).unwrap(), &Gadget::eq(q)).cnf);
        let r = replay(&ctx, &p).unwrap();
        for line in &r.lines {
            if line.origin == Origin::Derived && line.premises.len() <= 2 {
                let ps: Vec<&LinearInequality> = line.premises.iter().map(|&k| &r.lines[k].ineq).collect();
                assert!(semantic_entails(&ps, &line.ineq));
            }
        }
        r.metrics.length
    }

    #[test]
    fn small_graphs() {
        check(&Dag::path(1), 1);
        check(&Dag::path(2), 1);
        check(&Dag::path(3), 2);
        check(&Dag::pyramid(2), 1);
    }

    #[test]
    fn blob_shape() {
        let g = blob_graph(&Dag::path(2), 2);
        assert_eq!(g.n(), 4);
        assert_eq!(g.edges().len(), 4);
        assert_eq!(g.sinks(), vec![2, 3]);
    }
}
