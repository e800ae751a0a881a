//! Locally real protocols read off tree-like cutting-planes refutations.
//!
//! Each proof line ℓ: a·x ≥ b becomes a node whose half-space is the set of
//! 0/1 points violating it, −a·x ≥ 1 − b. The root is the final
//! contradiction, so its half-space is everything; leaves are axioms. An
//! input that lies in a node's half-space also lies in the half-space of one
//! of its children, since the children entail the parent.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::One;

use super::SearchError;
use crate::cnf::Cnf;
use crate::cp::{replay, semantic_entails, Context, CpProof, LinearInequality, Origin, ProofMode, Shape};

/// Inputs are checked exhaustively up to this many variables.
pub const PROTOCOL_EXHAUSTIVE_VARS: usize = 16;
/// Pseudo-random inputs checked above that size.
pub const PROTOCOL_SAMPLES: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolNode {
    /// The proof line this node came from.
    pub line: usize,
    pub halfspace: LinearInequality,
    pub children: Vec<usize>,
    /// Clause index output at a leaf; `None` for internal nodes and for
    /// variable-bound axioms, whose half-space is empty.
    pub output: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocallyRealProtocol {
    pub num_vars: usize,
    /// Node 0 is the root.
    pub nodes: Vec<ProtocolNode>,
}

fn negate(l: &LinearInequality) -> LinearInequality {
    LinearInequality::new(l.terms().iter().map(|(v, a)| (*v, -a)), BigInt::one() - l.rhs())
}

impl LocallyRealProtocol {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn go(p: &LocallyRealProtocol, u: usize) -> usize {
            p.nodes[u].children.iter().map(|&c| 1 + go(p, c)).max().unwrap_or(0)
        }
        go(self, 0)
    }

    /// Walk from the root, always moving to the first child whose half-space
    /// contains the input; returns the clause output at the leaf.
    pub fn run(&self, input: &[bool]) -> Result<usize, SearchError> {
        let at = |v: usize| input[v];
        let fails = |reason: String| SearchError::ProtocolFails { input: input.to_vec(), reason };
        let mut u = 0;
        if !self.nodes[0].halfspace.satisfied_by(&at) {
            return Err(fails("input is outside the root half-space".into()));
        }
        loop {
            let node = &self.nodes[u];
            if node.children.is_empty() {
                return node.output.ok_or_else(|| fails(format!("reached leaf {u} without an output")));
            }
            u = *node
                .children
                .iter()
                .find(|&&c| self.nodes[c].halfspace.satisfied_by(&at))
                .ok_or_else(|| fails(format!("no child of node {u} contains the input")))?;
        }
    }

    /// One block per node: id, source line, children, output and half-space.
    pub fn to_text(&self) -> String {
        let mut s = format!("protocol {} nodes {}\n", self.num_vars, self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            let kids: Vec<String> = n.children.iter().map(|c| c.to_string()).collect();
            let out = n.output.map_or("-".to_string(), |k| k.to_string());
            let _ = writeln!(s, "node {i} line {} children [{}] out {out} : {}", n.line, kids.join(" "), n.halfspace);
        }
        s
    }
}

/// Build the protocol of a tree-like refutation of `cnf` and check it: every
/// node is covered by its children, and every input (a fixed pseudo-random
/// sample for large formulas) ends at a falsified clause.
pub fn extract_protocol(cnf: &Cnf, proof: &CpProof) -> Result<LocallyRealProtocol, SearchError> {
    if proof.shape != Shape::Tree {
        return Err(SearchError::WrongProofKind("tree-like"));
    }
    if proof.mode != ProofMode::Refutation {
        return Err(SearchError::WrongProofKind("a refutation"));
    }
    let ctx = Context::from_cnf(cnf);
    let r = replay(&ctx, proof)?;
    let mut p = LocallyRealProtocol { num_vars: cnf.num_vars, nodes: Vec::new() };
    let mut stack = vec![(r.goal_line, None::<usize>)];
    while let Some((line, parent)) = stack.pop() {
        let l = &r.lines[line];
        let output = match &l.origin {
            Origin::Clause(k) => Some(*k),
            Origin::Raw => ctx.clauses.iter().position(|c| *c == l.ineq),
            Origin::VarLo(_) | Origin::VarHi(_) | Origin::Derived => None,
        };
        let id = p.nodes.len();
        p.nodes.push(ProtocolNode { line, halfspace: negate(&l.ineq), children: vec![], output });
        if let Some(par) = parent {
            p.nodes[par].children.push(id);
        }
        for &c in l.premises.iter().rev() {
            stack.push((c, Some(id)));
        }
    }
    for (u, node) in p.nodes.iter().enumerate() {
        if node.children.is_empty() {
            continue;
        }
        let kids: Vec<&LinearInequality> = node.children.iter().map(|&c| &r.lines[p.nodes[c].line].ineq).collect();
        if !semantic_entails(&kids, &r.lines[node.line].ineq) {
            return Err(SearchError::Inconsistent { node: u });
        }
    }
    let n = cnf.num_vars;
    let inputs: Box<dyn Iterator<Item = Vec<bool>>> = if n <= PROTOCOL_EXHAUSTIVE_VARS {
        Box::new((0..1u64 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect()))
    } else {
        Box::new((0..PROTOCOL_SAMPLES).map(move |s| {
            let mut state = s;
            let mut word = 0;
            (0..n)
                .map(|i| {
                    if i % 64 == 0 {
                        word = splitmix64(&mut state);
                    }
                    word >> (i % 64) & 1 == 1
                })
                .collect()
        }))
    };
    for x in inputs {
        let k = p.run(&x)?;
        if !cnf.clauses[k].is_falsified(&x) {
            return Err(SearchError::ProtocolFails { input: x, reason: format!("clause {k} is satisfied") });
        }
    }
    Ok(p)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::Dag;
    use crate::gen::gen_treelike_semantic;
    use crate::lift::{lift_cnf, Gadget};
    use crate::cnf::pebbling_formula;
    use crate::cp::{Rules, Step};

    fn lifted(dag: &Dag, q: usize) -> Cnf {
        lift_cnf(&pebbling_formula(dag).unwrap(), &Gadget::eq(q)).cnf
    }

    #[test]
    fn generated_proofs_give_protocols() {
        for (dag, q) in [(Dag::path(2), 1), (Dag::path(3), 1), (Dag::path(2), 2)] {
            let proof = gen_treelike_semantic(&dag, q).unwrap();
            let f = lifted(&dag, q);
            let p = extract_protocol(&f, &proof).unwrap();
            let lines = replay(&Context::from_cnf(&f), &proof).unwrap().lines.len();
            assert_eq!(p.num_nodes(), lines);
            assert!(p.nodes[0].halfspace.satisfied_by(&|_| false));
            assert!(p.to_text().starts_with(&format!("protocol {} nodes {lines}", f.num_vars)));
        }
    }

    #[test]
    fn dag_shaped_proof_is_rejected() {
        let dag = Dag::path(2);
        let mut proof = gen_treelike_semantic(&dag, 1).unwrap();
        proof.shape = Shape::Dag;
        assert_eq!(extract_protocol(&lifted(&dag, 1), &proof), Err(SearchError::WrongProofKind("tree-like")));
    }

    #[test]
    fn unit_pair() {
        let f = Cnf::from_signed(1, &[&[1], &[-1]]).unwrap();
        let proof = CpProof {
            mode: ProofMode::Refutation,
            rules: Rules::Syntactic,
            shape: Shape::Tree,
            steps: vec![
                Step::ClauseAxiom(0),
                Step::ClauseAxiom(1),
                Step::Lin { i: 0, j: 1, c: BigInt::one(), d: BigInt::one() },
            ],
        };
        let p = extract_protocol(&f, &proof).unwrap();
        assert_eq!(p.num_nodes(), 3);
        assert_eq!(p.depth(), 1);
        assert_eq!(p.run(&[false]).unwrap(), 0);
        assert_eq!(p.run(&[true]).unwrap(), 1);
    }
}
