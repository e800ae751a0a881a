//! Proof assembly with stable line handles.
//!
//! Steps address live lines by position; generators hold `Id`s that stay
//! valid until the line is deleted, and the builder translates.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::GenError;
use crate::cp::{CpProof, LinearInequality, ProofMode, Rules, Shape, Step};

pub type Id = usize;

/// A literal x_var (neg = false) or 1 − x_var (neg = true).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub var: usize,
    pub neg: bool,
}

pub struct Builder<'a> {
    clauses: &'a [LinearInequality],
    steps: Vec<Step>,
    lines: Vec<Option<LinearInequality>>,
    live: Vec<Id>,
}

impl<'a> Builder<'a> {
    pub fn new(clauses: &'a [LinearInequality]) -> Self {
        Builder { clauses, steps: Vec::new(), lines: Vec::new(), live: Vec::new() }
    }

    fn position(&self, id: Id) -> usize {
        self.live.iter().position(|&x| x == id).unwrap_or_else(|| panic!("line {id} is not live"))
    }

    fn push(&mut self, step: Step, ineq: LinearInequality) -> Id {
        self.steps.push(step);
        self.lines.push(Some(ineq));
        let id = self.lines.len() - 1;
        self.live.push(id);
        id
    }

    pub fn get(&self, id: Id) -> &LinearInequality {
        self.lines[id].as_ref().expect("deleted line")
    }

    pub fn clause(&self, k: usize) -> &'a LinearInequality {
        &self.clauses[k]
    }

    pub fn live(&self) -> &[Id] {
        &self.live
    }

    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn ax(&mut self, k: usize) -> Id {
        let c = self.clauses[k].clone();
        self.push(Step::ClauseAxiom(k), c)
    }

    pub fn raw(&mut self, a: &LinearInequality) -> Id {
        self.push(Step::RawAxiom(a.clone()), a.clone())
    }

    pub fn vlo(&mut self, v: usize) -> Id {
        self.push(Step::VarLo(v), LinearInequality::var_lo(v))
    }

    pub fn vhi(&mut self, v: usize) -> Id {
        self.push(Step::VarHi(v), LinearInequality::var_hi(v))
    }

    pub fn lin(&mut self, a: Id, b: Id, c: impl Into<BigInt>, d: impl Into<BigInt>) -> Id {
        let (c, d) = (c.into(), d.into());
        debug_assert!(!c.is_negative() && !d.is_negative());
        let r = self.get(a).combine(&c, self.get(b), &d);
        let (i, j) = (self.position(a), self.position(b));
        self.push(Step::Lin { i, j, c, d }, r)
    }

    pub fn copy(&mut self, a: Id) -> Id {
        self.lin(a, a, 1, 0)
    }

    pub fn scale(&mut self, a: Id, c: impl Into<BigInt>) -> Id {
        self.lin(a, a, c, 0)
    }

    fn div_keep(&mut self, a: Id, c: BigInt) -> Result<Id, GenError> {
        let r = self
            .get(a)
            .divide(&c)
            .ok_or_else(|| GenError::Internal(format!("{c} does not divide '{}'", self.get(a))))?;
        let i = self.position(a);
        Ok(self.push(Step::Div { i, c }, r))
    }

    /// Divide, consuming `a`.
    pub fn div(&mut self, a: Id, c: impl Into<BigInt>) -> Result<Id, GenError> {
        let c = c.into();
        if c.is_one() {
            return Ok(a);
        }
        let r = self.div_keep(a, c)?;
        self.del(a);
        Ok(r)
    }

    /// Semantic step; entailment is left to the verifier.
    pub fn sem(&mut self, premises: &[Id], conclusion: LinearInequality) -> Id {
        let ps = premises.iter().map(|&p| self.position(p)).collect();
        self.push(Step::Sem { premises: ps, conclusion: conclusion.clone() }, conclusion)
    }

    pub fn del(&mut self, a: Id) {
        let i = self.position(a);
        self.steps.push(Step::Del(i));
        self.live.remove(i);
        self.lines[a] = None;
    }

    /// line + |delta|·(x_v ≥ 0) when delta > 0, line + |delta|·(−x_v ≥ −1)
    /// when delta < 0. Consumes `line`.
    pub fn add_var(&mut self, line: Id, v: usize, delta: &BigInt) -> Id {
        if delta.is_zero() {
            return line;
        }
        let t = if delta.is_positive() { self.vlo(v) } else { self.vhi(v) };
        let r = self.lin(line, t, 1, delta.abs());
        self.del(t);
        self.del(line);
        r
    }

    /// Add c·(ℓ ≥ 0) when `lo`, else c·(−ℓ ≥ −1). Consumes `line`.
    pub fn add_lit(&mut self, line: Id, lit: Literal, c: &BigInt, lo: bool) -> Id {
        let delta = if lo != lit.neg { c.clone() } else { -c };
        self.add_var(line, lit.var, &delta)
    }

    /// Fresh line ℓ ≥ 0.
    pub fn lit_lo(&mut self, lit: Literal) -> Id {
        if lit.neg {
            self.vhi(lit.var)
        } else {
            self.vlo(lit.var)
        }
    }

    /// Replay a finished sub-proof inside this one and keep only the line
    /// dominating `target`.
    pub fn splice(&mut self, proof: &CpProof, target: &LinearInequality) -> Result<Id, GenError> {
        let base = self.live.len();
        let mut local: Vec<Id> = Vec::new();
        for step in &proof.steps {
            let at = |i: usize| local.get(i).copied().ok_or_else(|| GenError::Internal(format!("sub-proof refers to line {i}")));
            let id = match step {
                Step::ClauseAxiom(k) => {
                    if *k >= self.clauses.len() {
                        return Err(GenError::Internal(format!("sub-proof uses clause {k}")));
                    }
                    self.ax(*k)
                }
                Step::RawAxiom(a) => self.raw(a),
                Step::VarLo(v) => self.vlo(*v),
                Step::VarHi(v) => self.vhi(*v),
                Step::Lin { i, j, c, d } => {
                    let (a, b) = (at(*i)?, at(*j)?);
                    self.lin(a, b, c.clone(), d.clone())
                }
                Step::Div { i, c } => {
                    let a = at(*i)?;
                    self.div_keep(a, c.clone())?
                }
                Step::Sem { premises, conclusion } => {
                    let ps = premises.iter().map(|&i| at(i)).collect::<Result<Vec<_>, _>>()?;
                    self.sem(&ps, conclusion.clone())
                }
                Step::Del(i) => {
                    let a = at(*i)?;
                    self.del(a);
                    local.remove(*i);
                    continue;
                }
            };
            local.push(id);
        }
        debug_assert!(self.live.len() >= base);
        let goal = local
            .iter()
            .copied()
            .find(|&id| self.get(id).dominates(target))
            .ok_or_else(|| GenError::Internal(format!("sub-proof does not reach '{target}'")))?;
        for id in local {
            if id != goal {
                self.del(id);
            }
        }
        Ok(goal)
    }

    pub fn finish(self, mode: ProofMode, rules: Rules, shape: Shape) -> CpProof {
        CpProof { mode, rules, shape, steps: self.steps }
    }
}

pub fn pow2(i: usize) -> BigInt {
    BigInt::one() << i
}
