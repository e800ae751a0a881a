//! Decision trees for pebbling formulas and reversible pebblings.
//!
//! Everything runs on G′, the graph with a fresh sink z′ fed by the old
//! sink. Search(Peb_G) is the search problem of G′ started from the state
//! where z′ is known to be 0, and the clause of z′ in G′ plays the role of
//! the sink clause of G (both have index n). A state is a pair (ones, Z) of
//! vertices known to be 1 and 0; head(Z) is the first vertex of the path
//! through Z.

use std::collections::HashMap;

use super::{verify_dt, DecisionTree, SearchError};
use crate::cnf::pebbling_formula;
use crate::dag::Dag;
use crate::pebbling::{validate_pebbling, Mode, PebblingSequence};

struct Graph {
    pred: Vec<u64>,
    succ: Vec<u64>,
    desc: Vec<u64>,
}

impl Graph {
    fn new(g: &Dag) -> Graph {
        Graph {
            pred: (0..g.n()).map(|v| g.pred_mask(v)).collect(),
            succ: (0..g.n()).map(|v| g.succs(v).iter().fold(0, |m, &w| m | 1 << w)).collect(),
            desc: (0..g.n()).map(|v| g.reach_mask(v)).collect(),
        }
    }

    /// Vertices with a path to `head` whose vertices other than `head`
    /// avoid `blocked`; `head` excluded.
    fn relevant(&self, blocked: u64, head: usize) -> u64 {
        let mut seen = 0u64;
        let mut stack = vec![head];
        while let Some(u) = stack.pop() {
            for v in crate::bits(self.pred[u] & !blocked & !seen) {
                seen |= 1 << v;
                stack.push(v);
            }
        }
        seen
    }

    /// A path from `a` to `b` with interior outside `blocked`.
    fn connects(&self, a: usize, b: usize, blocked: u64) -> bool {
        let mut seen = 0u64;
        let mut stack = vec![a];
        while let Some(u) = stack.pop() {
            if self.succ[u] >> b & 1 == 1 {
                return true;
            }
            for v in crate::bits(self.succ[u] & !blocked & !seen) {
                seen |= 1 << v;
                stack.push(v);
            }
        }
        false
    }

    /// head(Z) when some path to the sink meets ones ∪ Z exactly in Z.
    fn path_like(&self, ones: u64, zeros: u64, order: &[usize]) -> Option<usize> {
        let chain: Vec<usize> = order.iter().copied().filter(|&v| zeros >> v & 1 == 1).collect();
        let blocked = ones | zeros;
        chain.windows(2).all(|w| self.connects(w[0], w[1], blocked)).then(|| chain[0])
    }
}

fn super_graph(dag: &Dag) -> Result<(Dag, usize), SearchError> {
    let g = dag.with_super_sink()?;
    g.require_mask()?;
    Ok((g, dag.n()))
}

/// Depth of an optimal decision tree for Search(Peb_G), computed over
/// (ones, head) states and only querying relevant vertices.
pub fn dt_depth_pebbling(dag: &Dag) -> Result<usize, SearchError> {
    let (g, top) = super_graph(dag)?;
    let gr = Graph::new(&g);
    let mut memo = HashMap::new();
    Ok(state_depth(&gr, 0, top, &mut memo))
}

fn state_depth(g: &Graph, ones: u64, head: usize, memo: &mut HashMap<(u64, usize), usize>) -> usize {
    if g.pred[head] & !ones == 0 {
        return 0;
    }
    let region = g.relevant(ones, head);
    // Only ones adjacent to the region or the head matter.
    let touching = crate::bits(region | 1 << head).fold(0, |m, v| m | g.pred[v]);
    let key = (ones & touching, head);
    if let Some(&d) = memo.get(&key) {
        return d;
    }
    let mut best = usize::MAX;
    for v in crate::bits(region) {
        let d0 = state_depth(g, ones, v, memo);
        if d0 + 1 >= best {
            continue;
        }
        let d1 = state_depth(g, ones | 1 << v, head, memo);
        best = best.min(1 + d0.max(d1));
        if best == 1 {
            break;
        }
    }
    memo.insert(key, best);
    best
}

/// Accept a visiting pebbling of G's sink, or one on G′ surrounding z′.
fn check_pebbling(dag: &Dag, g: &Dag, top: usize, seq: &PebblingSequence) -> Result<(), SearchError> {
    if seq.free != 0 || seq.partial {
        return Err(SearchError::NotPebblingTree("pebbling must start from nothing and be complete".into()));
    }
    match seq.mode {
        Mode::Visiting => validate_pebbling(dag, seq)?,
        Mode::Surrounding(t) if t == top => validate_pebbling(g, seq)?,
        Mode::Surrounding(t) => {
            return Err(SearchError::NotPebblingTree(format!("surrounding pebbling targets {t}, not the super-sink {top}")))
        }
    };
    if seq.configs[0] != 0 {
        return Err(SearchError::NotPebblingTree("first configuration must be empty".into()));
    }
    Ok(())
}

/// Decision tree of depth ≤ cost(seq) for Search(Peb_G) from a pebbling
/// that visits the sink of G.
pub fn pebbling_to_dt(dag: &Dag, seq: &PebblingSequence) -> Result<DecisionTree, SearchError> {
    let (g, top) = super_graph(dag)?;
    check_pebbling(dag, &g, top, seq)?;
    let gr = Graph::new(&g);
    let t = tree_from(&gr, 0, 1 << top, top, seq.configs.clone());
    verify_dt(&pebbling_formula(dag)?, &t)?;
    Ok(t)
}

/// Tree for the state (ones, zeros) from a partial pebbling that surrounds
/// `w` ∈ zeros and whose static pebbles are all in `ones`.
fn tree_from(g: &Graph, ones: u64, zeros: u64, w: usize, configs: Vec<u64>) -> DecisionTree {
    let stat = configs.iter().fold(u64::MAX, |a, &c| a & c);
    if g.pred[w] & !stat == 0 {
        return DecisionTree::Leaf(w);
    }
    // The earliest vertex placed after the start and kept to the end.
    let last = *configs.last().expect("non-empty pebbling");
    let (m, v) = crate::bits(last & !stat)
        .map(|v| {
            let m = (1..configs.len()).rev().find(|&i| configs[i - 1] >> v & 1 == 0).expect("non-static vertex was placed");
            (m, v)
        })
        .min()
        .expect("some predecessor of w is not static");
    let tail = configs[m..].to_vec();
    let back: Vec<u64> = tail.iter().rev().map(|&c| c & !g.desc[v]).collect();
    let bit = 1u64 << v;
    if ones & bit != 0 {
        return tree_from(g, ones, zeros, w, tail);
    }
    if zeros & bit != 0 {
        return tree_from(g, ones, zeros, v, back);
    }
    DecisionTree::query(v, tree_from(g, ones, zeros | bit, v, back), tree_from(g, ones | bit, zeros, w, tail))
}

/// Visiting pebbling of G's sink of cost ≤ depth(dt) from a decision tree
/// solving Search(Peb_G). Queries that are repeated or irrelevant to the
/// current state are allowed.
pub fn dt_to_pebbling(dag: &Dag, dt: &DecisionTree) -> Result<PebblingSequence, SearchError> {
    verify_dt(&pebbling_formula(dag)?, dt)?;
    let (g, top) = super_graph(dag)?;
    let gr = Graph::new(&g);
    let order = g.topo_order().to_vec();
    let mut configs = pebbling_from(&gr, &order, dt, 0, 1 << top, top)?;
    configs.dedup();
    let seq = PebblingSequence::visiting(configs);
    validate_pebbling(dag, &seq)?;
    Ok(seq)
}

/// Pebbling that starts at exactly `ones` and surrounds `head`, with cost
/// measured against `ones`, for the path-like state (ones, zeros).
fn pebbling_from(
    g: &Graph,
    order: &[usize],
    t: &DecisionTree,
    ones: u64,
    zeros: u64,
    head: usize,
) -> Result<Vec<u64>, SearchError> {
    match t {
        DecisionTree::Leaf(k) => {
            if *k != head || g.pred[head] & !ones != 0 {
                return Err(SearchError::NotPebblingTree(format!("leaf {k} in a state with head {head}")));
            }
            Ok(vec![ones])
        }
        DecisionTree::Query { var, zero, one } => {
            let v = *var;
            let bit = 1u64 << v;
            if ones & bit != 0 {
                return pebbling_from(g, order, one, ones, zeros, head);
            }
            if zeros & bit != 0 {
                return pebbling_from(g, order, zero, ones, zeros, head);
            }
            let region = g.relevant(ones | zeros, head);
            if region & bit != 0 {
                let p0 = pebbling_from(g, order, zero, ones, zeros | bit, v)?;
                let p1 = pebbling_from(g, order, one, ones | bit, zeros, head)?;
                let mut out = p0.clone();
                out.extend(p0.iter().rev().map(|&c| c | bit));
                out.extend(p1);
                out.dedup();
                return Ok(out);
            }
            if g.path_like(ones | bit, zeros, order) == Some(head) {
                // Pebbles outside the region around head cannot help to surround it.
                let keep = region | 1 << head;
                let p1 = pebbling_from(g, order, one, ones | bit, zeros, head)?;
                let mut out: Vec<u64> = p1.into_iter().map(|c| (c & keep) | ones).collect();
                out.dedup();
                return Ok(out);
            }
            if g.path_like(ones, zeros | bit, order) == Some(head) {
                return pebbling_from(g, order, zero, ones, zeros | bit, head);
            }
            Err(SearchError::NotPebblingTree(format!("query {v} leaves no path-like state")))
        }
    }
}
