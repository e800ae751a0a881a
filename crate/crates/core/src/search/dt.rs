//! Ordinary decision trees for Search(F) and the exact depth solver.

use std::collections::HashMap;
use std::fmt;

use super::sexpr::{branches, number, Sexpr};
use super::SearchError;
use crate::cnf::Cnf;

/// Internal nodes query one variable; leaves name a clause of F.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecisionTree {
    Leaf(usize),
    Query { var: usize, zero: Box<DecisionTree>, one: Box<DecisionTree> },
}

impl DecisionTree {
    pub fn query(var: usize, zero: DecisionTree, one: DecisionTree) -> Self {
        DecisionTree::Query { var, zero: Box::new(zero), one: Box::new(one) }
    }

    pub fn depth(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Query { zero, one, .. } => 1 + zero.depth().max(one.depth()),
        }
    }

    pub fn num_nodes(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 1,
            DecisionTree::Query { zero, one, .. } => 1 + zero.num_nodes() + one.num_nodes(),
        }
    }

    /// The clause reached on a total assignment.
    pub fn run(&self, assignment: &[bool]) -> usize {
        match self {
            DecisionTree::Leaf(c) => *c,
            DecisionTree::Query { var, zero, one } => if assignment[*var] { one } else { zero }.run(assignment),
        }
    }

    /// `(q <var> (0 …) (1 …))` with leaves `(leaf <clause>)`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self, SearchError> {
        Self::from_sexpr(&Sexpr::parse(text)?)
    }

    fn from_sexpr(e: &Sexpr) -> Result<Self, SearchError> {
        let Sexpr::List(items) = e else { return Err(SearchError::Parse("expected a list".into())) };
        match items.first().and_then(Sexpr::atom) {
            Some("leaf") if items.len() == 2 => Ok(DecisionTree::Leaf(number(&items[1], "clause index")?)),
            Some("q") if items.len() == 4 => {
                let (z, o) = branches(items)?;
                Ok(Self::query(number(&items[1], "variable")?, Self::from_sexpr(z)?, Self::from_sexpr(o)?))
            }
            _ => Err(SearchError::Parse("expected (leaf c) or (q v (0 …) (1 …))".into())),
        }
    }
}

impl fmt::Display for DecisionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionTree::Leaf(c) => write!(f, "(leaf {c})"),
            DecisionTree::Query { var, zero, one } => write!(f, "(q {var} (0 {zero}) (1 {one}))"),
        }
    }
}

/// Every leaf's clause is falsified by every assignment reaching it.
/// Returns the depth; on failure reports an assignment reaching a bad leaf.
pub fn verify_dt(cnf: &Cnf, tree: &DecisionTree) -> Result<usize, SearchError> {
    let mut path = vec![None; cnf.num_vars];
    walk(cnf, tree, &mut path)?;
    Ok(tree.depth())
}

fn walk(cnf: &Cnf, t: &DecisionTree, path: &mut Vec<Option<bool>>) -> Result<(), SearchError> {
    match t {
        DecisionTree::Leaf(k) => {
            let c = cnf.clauses.get(*k).ok_or(SearchError::BadClause(*k))?;
            if let Some(l) = c.lits().iter().find(|l| path[l.var] != Some(!l.pos)) {
                let mut witness: Vec<bool> = path.iter().map(|v| v.unwrap_or(false)).collect();
                witness[l.var] = l.pos;
                return Err(SearchError::WrongLeaf { clause: *k, witness });
            }
            Ok(())
        }
        DecisionTree::Query { var, zero, one } => {
            match path.get(*var) {
                None => return Err(SearchError::VarOutOfRange(*var)),
                Some(Some(_)) => return Err(SearchError::RepeatedQuery(*var)),
                Some(None) => {}
            }
            for (b, sub) in [(false, zero), (true, one)] {
                path[*var] = Some(b);
                walk(cnf, sub, path)?;
            }
            path[*var] = None;
            Ok(())
        }
    }
}

/// Variable limit of the exact solver.
pub const DT_MAX_VARS: usize = 24;

struct Solver<'a> {
    cnf: &'a Cnf,
    /// (variables, falsifying ones) per clause.
    masks: Vec<(u64, u64)>,
    memo: HashMap<(u64, u64), (usize, Choice)>,
}

#[derive(Clone, Copy)]
enum Choice {
    Leaf(usize),
    Query(usize),
}

impl Solver<'_> {
    fn solve(&mut self, fixed: u64, ones: u64) -> Result<usize, SearchError> {
        if let Some(&(d, _)) = self.memo.get(&(fixed, ones)) {
            return Ok(d);
        }
        if let Some(k) = self.masks.iter().position(|&(v, f)| v & !fixed == 0 && ones & v == f) {
            self.memo.insert((fixed, ones), (0, Choice::Leaf(k)));
            return Ok(0);
        }
        // Variables of clauses that are still open; others never help.
        let live = self
            .masks
            .iter()
            .filter(|&&(v, f)| (ones ^ f) & v & fixed == 0)
            .fold(0u64, |acc, &(v, _)| acc | v)
            & !fixed;
        if live == 0 {
            let witness = (0..self.cnf.num_vars).map(|i| ones >> i & 1 == 1).collect();
            return Err(SearchError::Satisfiable { witness });
        }
        let mut best = (usize::MAX, Choice::Leaf(0));
        for v in crate::bits(live) {
            let bit = 1u64 << v;
            let d0 = self.solve(fixed | bit, ones)?;
            if d0 + 1 >= best.0 {
                continue;
            }
            let d1 = self.solve(fixed | bit, ones | bit)?;
            let d = 1 + d0.max(d1);
            if d < best.0 {
                best = (d, Choice::Query(v));
                if d == 1 {
                    break;
                }
            }
        }
        self.memo.insert((fixed, ones), best);
        Ok(best.0)
    }

    fn tree(&self, fixed: u64, ones: u64) -> DecisionTree {
        match self.memo[&(fixed, ones)].1 {
            Choice::Leaf(k) => DecisionTree::Leaf(k),
            Choice::Query(v) => {
                let bit = 1u64 << v;
                DecisionTree::query(v, self.tree(fixed | bit, ones), self.tree(fixed | bit, ones | bit))
            }
        }
    }
}

/// Minimum depth of a decision tree solving Search(F), with a witness tree.
/// Leaves name the lowest-index falsified clause.
pub fn dt_depth(cnf: &Cnf) -> Result<(usize, DecisionTree), SearchError> {
    if cnf.num_vars > DT_MAX_VARS {
        return Err(SearchError::TooManyVars(cnf.num_vars));
    }
    let masks = cnf.clauses.iter().map(|c| (c.var_mask(), c.neg_mask())).collect();
    let mut s = Solver { cnf, masks, memo: HashMap::new() };
    let d = s.solve(0, 0)?;
    Ok((d, s.tree(0, 0)))
}
