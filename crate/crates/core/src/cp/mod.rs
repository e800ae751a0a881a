//! Cutting planes: proof objects, the rule engine and proof metrics.
//!
//! A proof is a sequence of configuration changes. Step indices refer to
//! positions among the currently live lines, oldest first.

mod entail;
mod ineq;
mod text;

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

pub use entail::{counterexample_bnb, counterexample_exhaustive, semantic_entails, EXHAUSTIVE_LIMIT};
pub use ineq::LinearInequality;

use crate::cnf::Cnf;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    ClauseAxiom(usize),
    RawAxiom(LinearInequality),
    VarLo(usize),
    VarHi(usize),
    Lin { i: usize, j: usize, c: BigInt, d: BigInt },
    Div { i: usize, c: BigInt },
    Sem { premises: Vec<usize>, conclusion: LinearInequality },
    Del(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofMode {
    Refutation,
    Derivation(LinearInequality),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rules {
    Syntactic,
    Semantic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Dag,
    Tree,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpProof {
    pub mode: ProofMode,
    pub rules: Rules,
    pub shape: Shape,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CpMetrics {
    /// Number of configurations, the empty start included.
    pub length: usize,
    pub line_space: usize,
    pub coeff_bits: u64,
}

impl CpMetrics {
    /// Whether every coefficient fits in β bits.
    pub fn cp_star(&self, beta: u64) -> bool {
        self.coeff_bits <= beta
    }
}

/// What axiom steps may refer to.
#[derive(Debug, Clone, Default)]
pub struct Context {
    pub num_vars: usize,
    pub clauses: Vec<LinearInequality>,
    pub raw: HashSet<LinearInequality>,
}

impl Context {
    pub fn from_cnf(cnf: &Cnf) -> Self {
        Context {
            num_vars: cnf.num_vars,
            clauses: cnf.clauses.iter().map(LinearInequality::from_clause).collect(),
            raw: HashSet::new(),
        }
    }

    pub fn from_inequalities(num_vars: usize, axioms: impl IntoIterator<Item = LinearInequality>) -> Self {
        Context { num_vars, clauses: Vec::new(), raw: axioms.into_iter().collect() }
    }

    pub fn with_raw(mut self, axioms: impl IntoIterator<Item = LinearInequality>) -> Self {
        self.raw.extend(axioms);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CpError {
    #[error("step {step}: {reason}")]
    Step { step: usize, reason: String },
    #[error("{0}")]
    Final(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// How a line entered the proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Clause(usize),
    Raw,
    VarLo(usize),
    VarHi(usize),
    Derived,
}

/// A line created during replay; premises are line ids (creation order).
#[derive(Debug, Clone)]
pub struct Line {
    pub ineq: LinearInequality,
    pub origin: Origin,
    pub premises: Vec<usize>,
    pub step: usize,
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub lines: Vec<Line>,
    /// Live line ids after the last step.
    pub live: Vec<usize>,
    pub metrics: CpMetrics,
    /// Line id witnessing the goal.
    pub goal_line: usize,
}

fn fail(step: usize, reason: impl Into<String>) -> CpError {
    CpError::Step { step, reason: reason.into() }
}

/// Live configuration plus the history of every line ever created.
struct Engine<'a> {
    ctx: &'a Context,
    rules: Rules,
    tree: bool,
    lines: Vec<Line>,
    live: Vec<usize>,
    used: Vec<bool>,
    space: usize,
    bits: u64,
}

impl<'a> Engine<'a> {
    fn new(ctx: &'a Context, rules: Rules, shape: Shape) -> Self {
        Engine { ctx, rules, tree: shape == Shape::Tree, lines: vec![], live: vec![], used: vec![], space: 0, bits: 0 }
    }

    fn push(&mut self, line: Line) {
        self.bits = self.bits.max(line.ineq.coeff_bits());
        self.lines.push(line);
        self.used.push(false);
        self.live.push(self.lines.len() - 1);
        self.space = self.space.max(self.live.len());
    }

    fn apply(&mut self, s: usize, step: &Step) -> Result<(), CpError> {
        let live = &self.live;
        let get = |i: usize| live.get(i).copied().ok_or_else(|| fail(s, format!("line {i} is not live ({} live)", live.len())));
        let check_var = |v: usize| {
            if self.ctx.num_vars > 0 && v >= self.ctx.num_vars {
                Err(fail(s, format!("variable {v} out of range")))
            } else {
                Ok(v)
            }
        };
        let (ineq, origin, premises) = match step {
            Step::Del(i) => {
                let id = get(*i)?;
                self.live.retain(|&x| x != id);
                return Ok(());
            }
            Step::ClauseAxiom(k) => {
                let c = self.ctx.clauses.get(*k).ok_or_else(|| fail(s, format!("no clause axiom {k}")))?;
                (c.clone(), Origin::Clause(*k), vec![])
            }
            Step::RawAxiom(a) => {
                if !self.ctx.raw.contains(a) {
                    return Err(fail(s, format!("raw axiom '{a}' is not in the axiom set")));
                }
                (a.clone(), Origin::Raw, vec![])
            }
            Step::VarLo(v) => (LinearInequality::var_lo(check_var(*v)?), Origin::VarLo(*v), vec![]),
            Step::VarHi(v) => (LinearInequality::var_hi(check_var(*v)?), Origin::VarHi(*v), vec![]),
            Step::Lin { i, j, c, d } => {
                if c.is_negative() || d.is_negative() {
                    return Err(fail(s, "negative multiplier"));
                }
                let (a, b) = (get(*i)?, get(*j)?);
                let r = self.lines[a].ineq.combine(c, &self.lines[b].ineq, d);
                (r, Origin::Derived, if a == b { vec![a] } else { vec![a, b] })
            }
            Step::Div { i, c } => {
                if *c < BigInt::one() {
                    return Err(fail(s, "divisor must be at least 1"));
                }
                let a = get(*i)?;
                let r = self.lines[a].ineq.divide(c).ok_or_else(|| fail(s, format!("{c} does not divide every coefficient")))?;
                (r, Origin::Derived, vec![a])
            }
            Step::Sem { premises, conclusion } => {
                if self.rules == Rules::Syntactic {
                    return Err(fail(s, "semantic step in syntactic mode"));
                }
                if premises.len() > 2 {
                    return Err(fail(s, "semantic step with more than two premises"));
                }
                let mut ids: Vec<usize> = premises.iter().map(|&i| get(i)).collect::<Result<_, _>>()?;
                ids.dedup();
                let refs: Vec<&LinearInequality> = ids.iter().map(|&k| &self.lines[k].ineq).collect();
                if !semantic_entails(&refs, conclusion) {
                    return Err(fail(s, format!("premises do not entail '{conclusion}'")));
                }
                (conclusion.clone(), Origin::Derived, ids)
            }
        };
        if self.tree {
            for &p in &premises {
                if self.lines[p].origin == Origin::Derived {
                    if self.used[p] {
                        return Err(fail(s, format!("derived line {p} used twice in a tree-like proof")));
                    }
                    self.used[p] = true;
                }
            }
        }
        self.push(Line { ineq, origin, premises, step: s });
        Ok(())
    }
}

/// Replay every step, enforcing rules, shape and the goal.
pub fn replay(ctx: &Context, proof: &CpProof) -> Result<Replay, CpError> {
    let mut e = Engine::new(ctx, proof.rules, proof.shape);
    for (s, step) in proof.steps.iter().enumerate() {
        e.apply(s, step)?;
    }
    let goal_line = match &proof.mode {
        ProofMode::Refutation => e.live.iter().copied().find(|&k| e.lines[k].ineq.is_contradiction()),
        ProofMode::Derivation(t) => e.live.iter().copied().find(|&k| e.lines[k].ineq.dominates(t)),
    };
    let goal_line = goal_line.ok_or_else(|| {
        CpError::Final(match &proof.mode {
            ProofMode::Refutation => "no live contradiction 0 >= k with k >= 1".into(),
            ProofMode::Derivation(t) => format!("no live line dominates target '{t}'"),
        })
    })?;
    Ok(Replay {
        metrics: CpMetrics { length: proof.steps.len() + 1, line_space: e.space, coeff_bits: e.bits },
        lines: e.lines,
        live: e.live,
        goal_line,
    })
}

pub fn verify_proof(ctx: &Context, proof: &CpProof) -> Result<CpMetrics, CpError> {
    replay(ctx, proof).map(|r| r.metrics)
}

/// Apply one step to a configuration (semantic steps allowed) and return the new configuration.
pub fn apply_step(config: &[LinearInequality], step: &Step, ctx: &Context) -> Result<Vec<LinearInequality>, CpError> {
    let mut e = Engine::new(ctx, Rules::Semantic, Shape::Dag);
    for ineq in config {
        e.push(Line { ineq: ineq.clone(), origin: Origin::Raw, premises: vec![], step: 0 });
    }
    e.apply(0, step)?;
    Ok(e.live.iter().map(|&k| e.lines[k].ineq.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ineq(t: &[(usize, i64)], r: i64) -> LinearInequality {
        LinearInequality::from_i64(t, r)
    }

    #[test]
    fn trivial_refutation() {
        let cnf = Cnf::from_signed(1, &[&[1], &[-1]]).unwrap();
        let proof = CpProof {
            mode: ProofMode::Refutation,
            rules: Rules::Syntactic,
            shape: Shape::Dag,
            steps: vec![Step::ClauseAxiom(0), Step::ClauseAxiom(1), Step::Lin { i: 0, j: 1, c: 1.into(), d: 1.into() }],
        };
        let m = verify_proof(&Context::from_cnf(&cnf), &proof).unwrap();
        assert_eq!(m, CpMetrics { length: 4, line_space: 3, coeff_bits: 1 });
        assert!(m.cp_star(1));
    }

    #[test]
    fn semantic_in_syntactic_mode() {
        let cnf = Cnf::from_signed(1, &[&[1], &[-1]]).unwrap();
        let proof = CpProof {
            mode: ProofMode::Refutation,
            rules: Rules::Syntactic,
            shape: Shape::Dag,
            steps: vec![Step::ClauseAxiom(0), Step::Sem { premises: vec![0], conclusion: ineq(&[(0, 1)], 0) }],
        };
        let e = verify_proof(&Context::from_cnf(&cnf), &proof).unwrap_err();
        assert!(e.to_string().contains("semantic step in syntactic mode"));
    }

    #[test]
    fn tree_like_single_use() {
        let cnf = Cnf::from_signed(1, &[&[1], &[-1]]).unwrap();
        let one = BigInt::one();
        let steps = vec![
            Step::ClauseAxiom(0),
            Step::Lin { i: 0, j: 0, c: one.clone(), d: 0.into() },
            Step::Lin { i: 1, j: 1, c: 2.into(), d: 0.into() },
            Step::Lin { i: 1, j: 1, c: 3.into(), d: 0.into() },
        ];
        let mut proof = CpProof { mode: ProofMode::Derivation(ineq(&[(0, 3)], 3)), rules: Rules::Syntactic, shape: Shape::Dag, steps };
        assert!(verify_proof(&Context::from_cnf(&cnf), &proof).is_ok());
        proof.shape = Shape::Tree;
        assert!(verify_proof(&Context::from_cnf(&cnf), &proof).unwrap_err().to_string().contains("used twice"));
    }

    #[test]
    fn apply_step_examples() {
        let ctx = Context::default();
        let out = apply_step(&[ineq(&[(0, 2), (1, 4)], 3)], &Step::Div { i: 0, c: 2.into() }, &ctx).unwrap();
        assert_eq!(out[1], ineq(&[(0, 1), (1, 2)], 2));
        assert!(apply_step(&[ineq(&[(0, 2), (1, 3)], 3)], &Step::Div { i: 0, c: 2.into() }, &ctx).is_err());
        let out = apply_step(&[ineq(&[(0, 1)], 1), ineq(&[(0, -1)], 0)], &Step::Lin { i: 0, j: 1, c: 1.into(), d: 1.into() }, &ctx).unwrap();
        assert!(out[2].is_contradiction());
    }
}
