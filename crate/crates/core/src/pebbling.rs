//! Reversible pebbling: validation and exact price solvers.
//!
//! Configurations are u64 vertex masks. Placing or removing a pebble on v is
//! legal when every predecessor of v carries a pebble.

use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::bits;
use crate::dag::{Dag, DagError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// The last configuration contains the sink.
    Visiting,
    /// The last configuration contains every predecessor of the target.
    Surrounding(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PebblingSequence {
    pub configs: Vec<u64>,
    pub mode: Mode,
    pub free: u64,
    /// Waives the goal check.
    pub partial: bool,
}

impl PebblingSequence {
    pub fn visiting(configs: Vec<u64>) -> Self {
        PebblingSequence { configs, mode: Mode::Visiting, free: 0, partial: false }
    }

    pub fn surrounding(configs: Vec<u64>, target: usize, free: u64) -> Self {
        PebblingSequence { configs, mode: Mode::Surrounding(target), free, partial: false }
    }

    /// Non-free pebbles in use at the worst moment.
    pub fn cost(&self) -> usize {
        self.configs.iter().map(|&c| (c & !self.free).count_ones() as usize).max().unwrap_or(0)
    }

    pub fn reversed(&self) -> Self {
        let mut s = self.clone();
        s.configs.reverse();
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PebblingError {
    #[error("empty pebbling")]
    Empty,
    #[error("first configuration is not contained in the free pebbles")]
    BadStart,
    #[error("step {step}: configurations differ in {count} vertices, expected exactly one")]
    NotAMove { step: usize, count: u32 },
    #[error("step {step}: illegal move on vertex {vertex}, predecessors not all pebbled")]
    IllegalMove { step: usize, vertex: usize },
    #[error("step {step}: vertex {vertex} outside the graph")]
    OutOfRange { step: usize, vertex: usize },
    #[error("goal not met in the final configuration")]
    GoalNotMet,
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// Check every move and the goal; returns the cost.
pub fn validate_pebbling(dag: &Dag, seq: &PebblingSequence) -> Result<usize, PebblingError> {
    dag.require_mask()?;
    let first = *seq.configs.first().ok_or(PebblingError::Empty)?;
    let all = if dag.n() == 64 { u64::MAX } else { (1u64 << dag.n()) - 1 };
    for (step, &c) in seq.configs.iter().enumerate() {
        if c & !all != 0 {
            return Err(PebblingError::OutOfRange { step, vertex: (c & !all).trailing_zeros() as usize });
        }
    }
    if first & !seq.free != 0 {
        return Err(PebblingError::BadStart);
    }
    for (i, w) in seq.configs.windows(2).enumerate() {
        let diff = w[0] ^ w[1];
        if diff.count_ones() != 1 {
            return Err(PebblingError::NotAMove { step: i + 1, count: diff.count_ones() });
        }
        let v = diff.trailing_zeros() as usize;
        if dag.pred_mask(v) & !w[0] != 0 {
            return Err(PebblingError::IllegalMove { step: i + 1, vertex: v });
        }
    }
    if !seq.partial {
        let last = *seq.configs.last().unwrap();
        let ok = match seq.mode {
            Mode::Visiting => last >> dag.sink()? & 1 == 1,
            Mode::Surrounding(t) => dag.pred_mask(t) & !last == 0,
        };
        if !ok {
            return Err(PebblingError::GoalNotMet);
        }
    }
    Ok(seq.cost())
}

fn neighbours(pred: &[u64], c: u64, budget: usize, free: u64) -> impl Iterator<Item = (usize, u64)> + '_ {
    (0..pred.len()).filter_map(move |v| {
        if pred[v] & !c != 0 {
            return None;
        }
        let next = c ^ (1 << v);
        ((next & !free).count_ones() as usize <= budget).then_some((v, next))
    })
}

/// All configurations reachable from `free` with at most `budget` non-free pebbles.
pub fn reachable_configs(dag: &Dag, budget: usize, free: u64) -> Result<HashSet<u64>, DagError> {
    dag.require_mask()?;
    let pred: Vec<u64> = (0..dag.n()).map(|v| dag.pred_mask(v)).collect();
    let mut seen = HashSet::from([free]);
    let mut queue = VecDeque::from([free]);
    while let Some(c) = queue.pop_front() {
        for (_, next) in neighbours(&pred, c, budget, free) {
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    Ok(seen)
}

/// Shortest route from `start` to a goal configuration within the budget,
/// choosing the smallest toggled vertex at every step among shortest routes.
fn solve_budget(pred: &[u64], start: u64, budget: usize, free: u64, goal: &dyn Fn(u64) -> bool) -> Option<Vec<u64>> {
    let mut seen = HashSet::from([start]);
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for (_, next) in neighbours(pred, c, budget, free) {
            if seen.insert(next) {
                order.push(next);
                queue.push_back(next);
            }
        }
    }
    let goals: Vec<u64> = order.iter().copied().filter(|&c| goal(c)).collect();
    if goals.is_empty() {
        return None;
    }
    // Distances to the goal set; moves are symmetric so the same neighbour relation applies.
    let mut dist: HashMap<u64, usize> = goals.iter().map(|&c| (c, 0)).collect();
    let mut queue: VecDeque<u64> = goals.into_iter().collect();
    while let Some(c) = queue.pop_front() {
        let d = dist[&c];
        for (_, next) in neighbours(pred, c, budget, free) {
            if !dist.contains_key(&next) {
                dist.insert(next, d + 1);
                queue.push_back(next);
            }
        }
    }
    let mut path = vec![start];
    let mut c = start;
    while dist[&c] > 0 {
        let d = dist[&c];
        let (_, next) = neighbours(pred, c, budget, free)
            .find(|(_, nx)| dist.get(nx) == Some(&(d - 1)))
            .expect("distance labels are consistent");
        path.push(next);
        c = next;
    }
    Some(path)
}

/// Reversible pebbling price and a witness visiting the unique sink.
pub fn rpeb(dag: &Dag) -> Result<(usize, PebblingSequence), DagError> {
    dag.require_mask()?;
    let t = dag.sink()?;
    let pred: Vec<u64> = (0..dag.n()).map(|v| dag.pred_mask(v)).collect();
    for b in 1..=dag.n() {
        if let Some(path) = solve_budget(&pred, 0, b, 0, &|c| c >> t & 1 == 1) {
            return Ok((b, PebblingSequence::visiting(path)));
        }
    }
    unreachable!("n pebbles always suffice")
}

/// Surrounding price of `target` when the pebbles in `free` are already
/// placed and cost nothing.
pub fn speb(dag: &Dag, target: usize, free: u64) -> Result<(usize, PebblingSequence), DagError> {
    dag.require_mask()?;
    let pred: Vec<u64> = (0..dag.n()).map(|v| dag.pred_mask(v)).collect();
    let need = pred[target];
    for b in 0..=dag.n() {
        if let Some(path) = solve_budget(&pred, free, b, free, &|c| need & !c == 0) {
            return Ok((b, PebblingSequence::surrounding(path, target, free)));
        }
    }
    unreachable!("n pebbles always suffice")
}

/// Vertices of a mask, for display.
pub fn mask_vertices(mask: u64) -> Vec<usize> {
    bits(mask).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_examples() {
        let p2 = Dag::path(2);
        assert_eq!(validate_pebbling(&p2, &PebblingSequence::visiting(vec![0, 1, 3])), Ok(2));
        assert_eq!(
            validate_pebbling(&p2, &PebblingSequence::visiting(vec![0, 2])),
            Err(PebblingError::IllegalMove { step: 1, vertex: 1 })
        );
        let p3 = Dag::path(3);
        assert_eq!(validate_pebbling(&p3, &PebblingSequence::visiting(vec![0, 1, 3, 2, 6])), Ok(2));
        assert_eq!(
            validate_pebbling(&p3, &PebblingSequence::visiting(vec![0, 1])),
            Err(PebblingError::GoalNotMet)
        );
        let mut partial = PebblingSequence::visiting(vec![0, 1]);
        partial.partial = true;
        assert_eq!(validate_pebbling(&p3, &partial), Ok(1));
    }

    #[test]
    fn prices() {
        assert_eq!(rpeb(&Dag::path(1)).unwrap().0, 1);
        assert_eq!(rpeb(&Dag::path(2)).unwrap().0, 2);
        assert_eq!(speb(&Dag::path(2), 1, 0).unwrap().0, 1);
        let py = Dag::pyramid(2);
        assert_eq!(speb(&py, 0, 0).unwrap().0, 0);
        let (p, w) = rpeb(&py).unwrap();
        assert_eq!(validate_pebbling(&py, &w), Ok(p));
    }

    #[test]
    fn witness_is_lexicographically_least() {
        let (_, w) = rpeb(&Dag::path(3)).unwrap();
        assert_eq!(w.configs, vec![0, 1, 3, 2, 6]);
    }

    #[test]
    fn multi_sink_rejected() {
        let d = Dag::new(3, &[(0, 1), (0, 2)]).unwrap();
        assert!(rpeb(&d).is_err());
        assert!(speb(&d, 2, 0).is_ok());
    }
}
