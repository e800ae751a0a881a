//! Directed acyclic graphs with a frozen topological order.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DagError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("cycle through edge ({0},{1})")]
    Cycle(usize, usize),
    #[error("duplicate edge ({0},{1})")]
    Duplicate(usize, usize),
    #[error("edge ({0},{1}) refers to a vertex outside 0..{2}")]
    OutOfRange(usize, usize, usize),
    #[error("expected a unique sink, found sinks {0:?}")]
    NotSingleSink(Vec<usize>),
    #[error("{0} vertices exceed the 64-vertex limit of exact solvers")]
    TooLarge(usize),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Named graph families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Path,
    Pyramid,
    CompleteBinaryTree,
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "path" => Ok(Family::Path),
            "pyramid" => Ok(Family::Pyramid),
            "tree" | "complete_binary_tree" => Ok(Family::CompleteBinaryTree),
            other => Err(format!("unknown family '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    n: usize,
    edges: Vec<(usize, usize)>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    topo: Vec<usize>,
    topo_pos: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl Dag {
    /// Build from an edge list. Edge order is irrelevant; the stored list is sorted.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Dag, DagError> {
        if n == 0 {
            return Err(DagError::Empty);
        }
        let mut seen = BTreeSet::new();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(DagError::OutOfRange(u, v, n));
            }
            if u == v {
                return Err(DagError::Cycle(u, v));
            }
            if !seen.insert((u, v)) {
                return Err(DagError::Duplicate(u, v));
            }
            preds[v].push(u);
            succs[u].push(v);
        }
        for list in preds.iter_mut().chain(succs.iter_mut()) {
            list.sort_unstable();
        }

        // Kahn with the smallest ready vertex first, so the order is canonical.
        let mut indeg: Vec<usize> = preds.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            topo.push(v);
            for &w in &succs[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        if topo.len() < n {
            // Walk backwards along unprocessed predecessors until a vertex repeats.
            let mut v = (0..n).find(|&v| indeg[v] > 0).unwrap();
            let mut visited = vec![false; n];
            loop {
                visited[v] = true;
                let u = *preds[v].iter().find(|&&u| indeg[u] > 0).unwrap();
                if visited[u] {
                    return Err(DagError::Cycle(u, v));
                }
                v = u;
            }
        }
        let mut topo_pos = vec![0; n];
        for (i, &v) in topo.iter().enumerate() {
            topo_pos[v] = i;
        }
        Ok(Dag {
            n,
            edges: seen.into_iter().collect(),
            preds,
            succs,
            topo,
            topo_pos,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Dag {
        assert_eq!(labels.len(), self.n);
        self.labels = Some(labels);
        self
    }

    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => format!("v{v}"),
        }
    }

    /// The chain 0 → 1 → … → n−1.
    pub fn path(n: usize) -> Dag {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Dag::new(n, &edges).expect("path is acyclic")
    }

    /// Pyramid of height h: h+1 layers, bottom layer first with h+1 vertices,
    /// vertex j of layer l fed by vertices j and j+1 of layer l−1.
    pub fn pyramid(h: usize) -> Dag {
        let width = |l: usize| h + 1 - l;
        let mut offset = vec![0; h + 2];
        for l in 0..=h {
            offset[l + 1] = offset[l] + width(l);
        }
        let mut edges = Vec::new();
        for l in 1..=h {
            for j in 0..width(l) {
                let v = offset[l] + j;
                edges.push((offset[l - 1] + j, v));
                edges.push((offset[l - 1] + j + 1, v));
            }
        }
        Dag::new(offset[h + 1], &edges).expect("pyramid is acyclic")
    }

    /// Complete binary in-tree of height h, leaves first, root last.
    pub fn complete_binary_tree(h: usize) -> Dag {
        let mut offset = vec![0; h + 2];
        for l in 0..=h {
            offset[l + 1] = offset[l] + (1 << (h - l));
        }
        let mut edges = Vec::new();
        for l in 1..=h {
            for j in 0..(1 << (h - l)) {
                let v = offset[l] + j;
                edges.push((offset[l - 1] + 2 * j, v));
                edges.push((offset[l - 1] + 2 * j + 1, v));
            }
        }
        Dag::new(offset[h + 1], &edges).expect("tree is acyclic")
    }

    /// Named family of the given size (path length, pyramid or tree height).
    pub fn family(kind: Family, size: usize) -> Result<Dag, DagError> {
        if size == 0 {
            return Err(DagError::Empty);
        }
        Ok(match kind {
            Family::Path => Dag::path(size),
            Family::Pyramid => Dag::pyramid(size),
            Family::CompleteBinaryTree => Dag::complete_binary_tree(size),
        })
    }

    /// Parse a compact edge list such as `0-1,1-2`; the vertex count is one
    /// more than the largest id unless given.
    pub fn from_edge_list(spec: &str, n: Option<usize>) -> Result<Dag, DagError> {
        let mut edges = Vec::new();
        for (i, part) in spec.split(',').map(str::trim).filter(|s| !s.is_empty()).enumerate() {
            let (a, b) = part.split_once('-').ok_or_else(|| DagError::Parse {
                line: i + 1,
                msg: format!("expected u-v, got '{part}'"),
            })?;
            let parse = |s: &str| {
                s.trim().parse::<usize>().map_err(|_| DagError::Parse {
                    line: i + 1,
                    msg: format!("bad vertex '{s}'"),
                })
            };
            edges.push((parse(a)?, parse(b)?));
        }
        let n = n.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(1));
        Dag::new(n, &edges)
    }

    /// Every DAG on `n` vertices with exactly one sink, one per isomorphism
    /// class, each labeled in topological order. Practical up to n = 7.
    pub fn single_sink_dags(n: usize) -> Vec<Dag> {
        assert!((1..=8).contains(&n), "enumeration supports 1..=8 vertices");
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        let mut classes = std::collections::BTreeMap::new();
        for set in 0..1u64 << pairs.len() {
            let edges: Vec<(usize, usize)> = crate::bits(set).map(|k| pairs[k]).collect();
            let mut out = vec![0usize; n];
            for &(u, _) in &edges {
                out[u] += 1;
            }
            if out.iter().filter(|&&d| d == 0).count() != 1 {
                continue;
            }
            classes.entry(canonical_code(n, &edges)).or_insert(edges);
        }
        classes.into_values().map(|e| Dag::new(n, &e).expect("forward edges are acyclic")).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn preds(&self, v: usize) -> &[usize] {
        &self.preds[v]
    }

    pub fn succs(&self, v: usize) -> &[usize] {
        &self.succs[v]
    }

    pub fn pred_mask(&self, v: usize) -> u64 {
        self.preds[v].iter().fold(0, |m, &u| m | 1 << u)
    }

    pub fn max_indegree(&self) -> usize {
        self.preds.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn sources(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.preds[v].is_empty()).collect()
    }

    pub fn sinks(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.succs[v].is_empty()).collect()
    }

    pub fn unique_sink(&self) -> Option<usize> {
        match self.sinks().as_slice() {
            [t] => Some(*t),
            _ => None,
        }
    }

    pub fn sink(&self) -> Result<usize, DagError> {
        self.unique_sink().ok_or_else(|| DagError::NotSingleSink(self.sinks()))
    }

    /// Topological order fixed at construction (smallest ready id first).
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn topo_position(&self, v: usize) -> usize {
        self.topo_pos[v]
    }

    /// Vertices reachable from v, v included.
    pub fn reach_mask(&self, v: usize) -> u64 {
        let mut mask = 1u64 << v;
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &w in &self.succs[u] {
                if mask >> w & 1 == 0 {
                    mask |= 1 << w;
                    stack.push(w);
                }
            }
        }
        mask
    }

    /// Vertices that can reach v, v included.
    pub fn ancestor_mask(&self, v: usize) -> u64 {
        let mut mask = 1u64 << v;
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &w in &self.preds[u] {
                if mask >> w & 1 == 0 {
                    mask |= 1 << w;
                    stack.push(w);
                }
            }
        }
        mask
    }

    /// Exact solvers use u64 configurations.
    pub fn require_mask(&self) -> Result<(), DagError> {
        if self.n > 64 {
            Err(DagError::TooLarge(self.n))
        } else {
            Ok(())
        }
    }

    /// G plus a fresh vertex n fed only by the old sink.
    pub fn with_super_sink(&self) -> Result<Dag, DagError> {
        let t = self.sink()?;
        let mut edges = self.edges.clone();
        edges.push((t, self.n));
        Dag::new(self.n + 1, &edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("dag {}\n", self.n);
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "edge {u} {v}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Dag, DagError> {
        let mut n = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| DagError::Parse { line: i + 1, msg };
            let toks: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad integer '{s}'")));
            match toks.as_slice() {
                ["dag", c] if n.is_none() => n = Some(num(c)?),
                ["edge", u, v] if n.is_some() => edges.push((num(u)?, num(v)?)),
                _ => return Err(err(format!("unexpected '{line}'"))),
            }
        }
        let n = n.ok_or(DagError::Parse { line: 0, msg: "missing 'dag <n>' header".into() })?;
        Dag::new(n, &edges)
    }
}

/// Least adjacency code over relabelings that sort vertices by
/// (in-degree, out-degree); isomorphic graphs get equal codes.
fn canonical_code(n: usize, edges: &[(usize, usize)]) -> u64 {
    let mut adj = vec![0u64; n];
    let mut key = vec![(0usize, 0usize); n];
    for &(u, v) in edges {
        adj[u] |= 1 << v;
        key[v].0 += 1;
        key[u].1 += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| key[v]);
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || key[order[i]] != key[order[start]] {
            blocks.push((start, i));
            start = i;
        }
    }
    let mut best = u64::MAX;
    permute_blocks(&mut order, &blocks, 0, &mut |ord| {
        let mut pos = vec![0; n];
        for (a, &v) in ord.iter().enumerate() {
            pos[v] = a;
        }
        let code = edges.iter().fold(0u64, |c, &(u, v)| c | 1 << (pos[u] * n + pos[v]));
        best = best.min(code);
    });
    best
}

/// Visit every arrangement of `order` that permutes within each block.
fn permute_blocks(order: &mut Vec<usize>, blocks: &[(usize, usize)], b: usize, visit: &mut dyn FnMut(&[usize])) {
    let Some(&(lo, hi)) = blocks.get(b) else {
        visit(order);
        return;
    };
    fn within(order: &mut Vec<usize>, lo: usize, hi: usize, blocks: &[(usize, usize)], b: usize, visit: &mut dyn FnMut(&[usize])) {
        if hi - lo <= 1 {
            permute_blocks(order, blocks, b + 1, visit);
            return;
        }
        for i in lo..hi {
            order.swap(lo, i);
            within(order, lo + 1, hi, blocks, b, visit);
            order.swap(lo, i);
        }
    }
    within(order, lo, hi, blocks, b, visit);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families() {
        let p = Dag::path(3);
        assert_eq!(p.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(p.unique_sink(), Some(2));

        let py = Dag::pyramid(2);
        assert_eq!(py.n(), 6);
        assert_eq!(py.edges().len(), 6);
        assert_eq!(py.unique_sink(), Some(5));
        assert_eq!(py.preds(3), &[0, 1]);
        assert_eq!(py.preds(5), &[3, 4]);

        let t = Dag::complete_binary_tree(2);
        assert_eq!(t.n(), 7);
        assert_eq!(t.unique_sink(), Some(6));
        assert_eq!(t.max_indegree(), 2);
    }

    #[test]
    fn malformed_edges() {
        let e = Dag::new(2, &[(0, 0)]).unwrap_err();
        assert!(e.to_string().contains("cycle"));
        let e = Dag::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap_err();
        assert!(matches!(e, DagError::Cycle(..)));
        assert!(matches!(Dag::new(2, &[(0, 1), (0, 1)]), Err(DagError::Duplicate(0, 1))));
        assert!(matches!(Dag::family(Family::Path, 0), Err(DagError::Empty)));
    }

    #[test]
    fn text_round_trip() {
        let d = Dag::pyramid(3);
        let back = Dag::parse(&format!("# comment\n{}", d.to_text())).unwrap();
        assert_eq!(d, back);
        assert!(Dag::parse("edge 0 1").is_err());
    }

    #[test]
    fn edge_list_spec() {
        let d = Dag::from_edge_list("0-1, 1-2,0-2", None).unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.preds(2), &[0, 1]);
    }

    #[test]
    fn single_sink_classes() {
        // Oracle: minimum code over all n! relabelings.
        fn naive(n: usize) -> usize {
            let mut perms: Vec<Vec<usize>> = vec![vec![]];
            for k in 0..n {
                perms = perms
                    .into_iter()
                    .flat_map(|p| (0..=k).map(move |i| { let mut q = p.clone(); q.insert(i, k); q }))
                    .collect();
            }
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
            let mut seen = BTreeSet::new();
            for set in 0..1u64 << pairs.len() {
                let e: Vec<(usize, usize)> = crate::bits(set).map(|k| pairs[k]).collect();
                let sinks = (0..n).filter(|&v| e.iter().all(|&(u, _)| u != v)).count();
                if sinks != 1 {
                    continue;
                }
                let code = perms.iter().map(|p| e.iter().fold(0u64, |c, &(u, v)| c | 1 << (p[u] * n + p[v]))).min().unwrap();
                seen.insert(code);
            }
            seen.len()
        }
        for n in 1..=5 {
            let all = Dag::single_sink_dags(n);
            assert_eq!(all.len(), naive(n), "n = {n}");
            assert!(all.iter().all(|d| d.unique_sink().is_some()));
        }
        assert_eq!(Dag::single_sink_dags(3).len(), 3);
    }
}
