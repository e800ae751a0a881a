//! Linear gadgets and the constant-space refutation of lifted pebbling
//! formulas.
//!
//! A bundle U stores Σ_{u∈U} K^{e(u)} L(u) as the pair of lines L(U) ≥ 0 and
//! −L(U) ≥ 0. Since |L(u)| < K, L(U) = 0 exactly when every member gadget
//! evaluates to 1, and single members can be recovered by trimming.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

use super::builder::{Builder, Id};
use super::space::{derive_clause, Source};
use super::GenError;
use crate::cnf::{pebbling_formula, Clause, Lit};
use crate::cp::{replay, Context, CpError, CpMetrics, CpProof, LinearInequality, ProofMode, Rules, Shape};
use crate::dag::Dag;
use crate::lift::{lift_cnf, x_var, y_var, Gadget, LiftedCnf};

/// L(x, y) = c + Σ a_i x_i + b_i y_i; the gadget is 1 exactly where L = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearGadgetSpec {
    pub q: usize,
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub c: i64,
}

/// Σ_j 2^{j−1} (x_j − y_j).
pub fn eq_linear_spec(q: usize) -> LinearGadgetSpec {
    let a: Vec<i64> = (0..q).map(|j| 1 << j).collect();
    LinearGadgetSpec { q, b: a.iter().map(|x| -x).collect(), a, c: 0 }
}

impl LinearGadgetSpec {
    /// Value at the integers x, y (bit j of x is x_{j+1}).
    pub fn value(&self, x: usize, y: usize) -> i64 {
        self.c + (0..self.q).map(|j| self.a[j] * (x >> j & 1) as i64 + self.b[j] * (y >> j & 1) as i64).sum::<i64>()
    }

    /// 1 + max |L|.
    pub fn k(&self) -> u64 {
        let side = 1usize << self.q;
        1 + (0..side).flat_map(|x| (0..side).map(move |y| (x, y))).map(|(x, y)| self.value(x, y).unsigned_abs()).max().unwrap_or(0)
    }

    pub fn induced_gadget(&self) -> Gadget {
        let side = 1usize << self.q;
        let table = (0..side).map(|x| (0..side).map(|y| self.value(x, y) == 0).collect()).collect();
        Gadget::from_table(self.q, table).expect("square table")
    }

    pub fn matches(&self, g: &Gadget) -> bool {
        self.induced_gadget() == *g
    }

    /// L(v) ≥ 0 over the lifted variables of vertex v.
    pub fn lower(&self, v: usize) -> LinearInequality {
        let q = self.q;
        LinearInequality::new(
            (0..q).flat_map(|j| [(x_var(q, v, j), BigInt::from(self.a[j])), (y_var(q, v, j), BigInt::from(self.b[j]))]),
            BigInt::from(-self.c),
        )
    }

    /// −L(v) ≥ 0.
    pub fn upper(&self, v: usize) -> LinearInequality {
        let l = self.lower(v);
        l.scale(&BigInt::from(-1))
    }

    /// Whether L is a positive combination of the differences x_j − y_j and
    /// the gadget is equality, so that L(v) ≥ 0 is a weighted sum of the
    /// clauses x_j ∨ ȳ_j.
    fn sums_differences(&self) -> bool {
        self.c == 0
            && self.a.iter().zip(&self.b).all(|(a, b)| *a > 0 && *b == -a)
            && self.induced_gadget() == Gadget::eq(self.q)
    }

    fn check(&self) -> Result<(), GenError> {
        if self.q == 0 || self.a.len() != self.q || self.b.len() != self.q {
            return Err(GenError::UnsupportedGadget(format!("arity {} with {} and {} coefficients", self.q, self.a.len(), self.b.len())));
        }
        if !self.sums_differences() {
            return Err(GenError::UnsupportedGadget("only positive combinations of x_j − y_j defining equality are supported".into()));
        }
        Ok(())
    }
}

/// The lifted formula the refutation works on.
pub fn lifted_pebbling_cnf(dag: &Dag, spec: &LinearGadgetSpec) -> Result<LiftedCnf, GenError> {
    Ok(lift_cnf(&pebbling_formula(dag)?, &spec.induced_gadget()))
}

/// A verified-in-isolation piece of a proof with two target lines.
#[derive(Debug, Clone)]
pub struct Fragment {
    pub proof: CpProof,
    pub context: Context,
    pub targets: [LinearInequality; 2],
}

impl Fragment {
    /// Replays the proof and checks that both targets are dominated by live lines.
    pub fn verify(&self) -> Result<CpMetrics, CpError> {
        let r = replay(&self.context, &self.proof)?;
        for t in &self.targets {
            if !r.live.iter().any(|&k| r.lines[k].ineq.dominates(t)) {
                return Err(CpError::Final(format!("no live line dominates '{t}'")));
            }
        }
        Ok(r.metrics)
    }
}

/// Vertex exponents and the lines of one bundle.
#[derive(Debug, Clone, Default)]
struct Bundle {
    members: BTreeMap<usize, u32>,
    lines: Option<(Id, Id)>,
}

struct Coder<'s> {
    spec: &'s LinearGadgetSpec,
    k: BigInt,
}

impl<'s> Coder<'s> {
    fn new(spec: &'s LinearGadgetSpec) -> Self {
        Coder { spec, k: BigInt::from(spec.k()) }
    }

    fn kpow(&self, e: u32) -> BigInt {
        num_traits::pow(self.k.clone(), e as usize)
    }

    fn vertex_vars(&self, v: usize) -> Vec<usize> {
        let q = self.spec.q;
        (0..q).map(|j| x_var(q, v, j)).chain((0..q).map(|j| y_var(q, v, j))).collect()
    }

    /// Copy of `line` with the members of exponent < `below` weakened away,
    /// divided by K^below.
    fn trim(&self, b: &mut Builder, bundle: &Bundle, line: Id, below: u32) -> Result<Id, GenError> {
        let mut t = b.copy(line);
        for (&v, &e) in &bundle.members {
            if e < below {
                for x in self.vertex_vars(v) {
                    let a = b.get(t).coeff(x);
                    t = b.add_var(t, x, &-a);
                }
            }
        }
        b.div(t, self.kpow(below))
    }

    /// L(u) ≥ 0 and −L(u) ≥ 0 from the bundle pair, which stays live.
    fn extract(&self, b: &mut Builder, bundle: &Bundle, u: usize) -> Result<(Id, Id), GenError> {
        let e = *bundle.members.get(&u).ok_or_else(|| GenError::Precondition(format!("vertex {u} is not in the bundle")))?;
        let (plus, minus) = bundle.lines.ok_or_else(|| GenError::Precondition("empty bundle".into()))?;
        let higher = bundle.members.values().any(|&f| f > e);
        let one_side = |b: &mut Builder, keep: Id, other: Id| -> Result<Id, GenError> {
            let lo = self.trim(b, bundle, keep, e)?;
            if !higher {
                return Ok(lo);
            }
            let hi = self.trim(b, bundle, other, e + 1)?;
            let r = b.lin(lo, hi, 1, self.k.clone());
            b.del(lo);
            b.del(hi);
            Ok(r)
        };
        let lp = one_side(b, plus, minus)?;
        let lm = one_side(b, minus, plus)?;
        Ok((lp, lm))
    }

    /// Add the pair for u (consumed) with exponent e.
    fn append(&self, b: &mut Builder, bundle: &mut Bundle, u: usize, e: u32, pair: (Id, Id)) -> Result<(), GenError> {
        if bundle.members.contains_key(&u) {
            return Err(GenError::Precondition(format!("vertex {u} is already in the bundle")));
        }
        let w = self.kpow(e);
        let next = match bundle.lines {
            None => (b.scale(pair.0, w.clone()), b.scale(pair.1, w)),
            Some((p, m)) => {
                let np = b.lin(p, pair.0, 1, w.clone());
                let nm = b.lin(m, pair.1, 1, w);
                b.del(p);
                b.del(m);
                (np, nm)
            }
        };
        b.del(pair.0);
        b.del(pair.1);
        bundle.lines = Some(next);
        bundle.members.insert(u, e);
        Ok(())
    }

    /// L(w) pair from the predecessor pairs and the lifted axiom clauses of w,
    /// one difference clause at a time through the clause-derivation procedure.
    fn propagate(&self, b: &mut Builder, w: usize, preds: &[(usize, (Id, Id))], axioms: &[usize]) -> Result<(Id, Id), GenError> {
        let q = self.spec.q;
        let mut f: Vec<Source> = preds.iter().flat_map(|(_, (p, m))| [Source::Line(*p), Source::Line(*m)]).collect();
        f.extend(axioms.iter().map(|&k| Source::Clause(k)));
        let mut vars: Vec<usize> = preds.iter().flat_map(|(u, _)| self.vertex_vars(*u)).chain(self.vertex_vars(w)).collect();
        vars.sort_unstable();
        vars.dedup();
        let side = |b: &mut Builder, positive_x: bool| -> Result<Id, GenError> {
            let mut acc: Option<Id> = None;
            for j in 0..q {
                let (x, y) = (x_var(q, w, j), y_var(q, w, j));
                let clause = Clause::new(vec![Lit { var: x, pos: positive_x }, Lit { var: y, pos: !positive_x }]).expect("two variables");
                let d = derive_clause(b, &f, &vars, &clause)?;
                let weight = BigInt::from(self.spec.a[j]);
                acc = Some(match acc {
                    None if weight.is_one() => d,
                    None => {
                        let s = b.scale(d, weight);
                        b.del(d);
                        s
                    }
                    Some(a) => {
                        let s = b.lin(a, d, 1, weight);
                        b.del(a);
                        b.del(d);
                        s
                    }
                });
            }
            Ok(acc.expect("q ≥ 1"))
        };
        let plus = side(b, true)?;
        let minus = side(b, false)?;
        Ok((plus, minus))
    }
}

fn clauses_of(lifted: &LiftedCnf, original: usize) -> Vec<usize> {
    lifted.provenance.iter().enumerate().filter(|(_, &o)| o == original).map(|(i, _)| i).collect()
}

/// Extract L(u) from the bundle of `members` (exponent = vertex id + 1).
pub fn gen_coding_extract(members: &[usize], u: usize, spec: &LinearGadgetSpec) -> Result<Fragment, GenError> {
    spec.check()?;
    let coder = Coder::new(spec);
    let mut bundle = Bundle::default();
    for &v in members {
        bundle.members.insert(v, v as u32 + 1);
    }
    let pair = bundle_pair(&coder, &bundle);
    let context = Context::from_inequalities(0, pair.clone());
    let mut b = Builder::new(&[]);
    let p = b.raw(&pair[0]);
    let m = b.raw(&pair[1]);
    bundle.lines = Some((p, m));
    coder.extract(&mut b, &bundle, u)?;
    let targets = [spec.lower(u), spec.upper(u)];
    Ok(Fragment { proof: b.finish(ProofMode::Derivation(targets[0].clone()), Rules::Syntactic, Shape::Dag), context, targets })
}

fn bundle_pair(coder: &Coder, bundle: &Bundle) -> [LinearInequality; 2] {
    let mut plus = LinearInequality::new([], BigInt::from(0));
    for (&v, &e) in &bundle.members {
        plus = plus.combine(&BigInt::one(), &coder.spec.lower(v), &coder.kpow(e));
    }
    let minus = plus.scale(&BigInt::from(-1));
    [plus, minus]
}

/// Append L(u) to the bundle of `members` (exponent = vertex id + 1).
pub fn gen_coding_append(members: &[usize], u: usize, spec: &LinearGadgetSpec) -> Result<Fragment, GenError> {
    spec.check()?;
    let coder = Coder::new(spec);
    let mut bundle = Bundle::default();
    for &v in members {
        bundle.members.insert(v, v as u32 + 1);
    }
    let mut axioms = vec![spec.lower(u), spec.upper(u)];
    let mut b = Builder::new(&[]);
    if !members.is_empty() {
        let pair = bundle_pair(&coder, &bundle);
        let p = b.raw(&pair[0]);
        let m = b.raw(&pair[1]);
        bundle.lines = Some((p, m));
        axioms.extend(pair);
    }
    let lu = (b.raw(&axioms[0]), b.raw(&axioms[1]));
    coder.append(&mut b, &mut bundle, u, u as u32 + 1, lu)?;
    let targets = bundle_pair(&coder, &bundle);
    let context = Context::from_inequalities(0, axioms);
    Ok(Fragment { proof: b.finish(ProofMode::Derivation(targets[0].clone()), Rules::Syntactic, Shape::Dag), context, targets })
}

/// Derive the L(w) pair from the L pairs of w's predecessors and the lifted
/// pebbling axiom of w.
pub fn gen_coding_propagate(dag: &Dag, w: usize, spec: &LinearGadgetSpec) -> Result<Fragment, GenError> {
    spec.check()?;
    let lifted = lifted_pebbling_cnf(dag, spec)?;
    let coder = Coder::new(spec);
    let pred_axioms: Vec<LinearInequality> = dag.preds(w).iter().flat_map(|&u| [spec.lower(u), spec.upper(u)]).collect();
    let mut context = Context::from_cnf(&lifted.cnf);
    context.raw.extend(pred_axioms);
    let mut b = Builder::new(&context.clauses);
    let preds: Vec<(usize, (Id, Id))> = dag.preds(w).iter().map(|&u| (u, (b.raw(&spec.lower(u)), b.raw(&spec.upper(u))))).collect();
    coder.propagate(&mut b, w, &preds, &clauses_of(&lifted, w))?;
    let targets = [spec.lower(w), spec.upper(w)];
    Ok(Fragment { proof: b.finish(ProofMode::Derivation(targets[0].clone()), Rules::Syntactic, Shape::Dag), context, targets })
}

/// Refutation of Peb_G ∘ g keeping a single bundle; see
/// [`gen_refutation_lifted_pebbling_split`].
pub fn gen_refutation_lifted_pebbling(dag: &Dag, spec: &LinearGadgetSpec, k: usize) -> Result<CpProof, GenError> {
    gen_refutation_lifted_pebbling_split(dag, spec, k, 1)
}

/// Constant-space refutation of Peb_G ∘ g over `lifted_pebbling_cnf`.
///
/// Vertices are processed in topological order: the predecessors of w are
/// extracted from their bundles, L(w) is derived from them and the lifted
/// axioms of w, then appended. The topological order is cut into `chunks`
/// contiguous bundles, each with exponents restarting at 1, which trades
/// two lines of space per bundle for smaller coefficients. The sink's pair
/// together with the lifted sink clauses is unsatisfiable and yields 0 ≥ 1.
pub fn gen_refutation_lifted_pebbling_split(dag: &Dag, spec: &LinearGadgetSpec, k: usize, chunks: usize) -> Result<CpProof, GenError> {
    spec.check()?;
    let sink = dag.sink()?;
    if dag.max_indegree() + 1 > k {
        return Err(GenError::Precondition(format!("in-degree {} exceeds k − 1 = {}", dag.max_indegree(), k.saturating_sub(1))));
    }
    if chunks == 0 {
        return Err(GenError::Precondition("at least one bundle is needed".into()));
    }
    let lifted = lifted_pebbling_cnf(dag, spec)?;
    let clauses: Vec<LinearInequality> = lifted.cnf.clauses.iter().map(LinearInequality::from_clause).collect();
    let coder = Coder::new(spec);
    let n = dag.n();
    let size = n.div_ceil(chunks).max(1);
    let chunk_of = |v: usize| dag.topo_position(v) / size;
    let exp_of = |v: usize| (dag.topo_position(v) % size) as u32 + 1;
    let mut bundles: Vec<Bundle> = vec![Bundle::default(); n.div_ceil(size)];
    let mut b = Builder::new(&clauses);
    for &w in dag.topo_order() {
        let mut preds = Vec::new();
        for &u in dag.preds(w) {
            preds.push((u, coder.extract(&mut b, &bundles[chunk_of(u)], u)?));
        }
        let pair = coder.propagate(&mut b, w, &preds, &clauses_of(&lifted, w))?;
        for (_, (p, m)) in preds {
            b.del(p);
            b.del(m);
        }
        if w != sink {
            coder.append(&mut b, &mut bundles[chunk_of(w)], w, exp_of(w), pair)?;
            continue;
        }
        let f: Vec<Source> = [Source::Line(pair.0), Source::Line(pair.1)]
            .into_iter()
            .chain(clauses_of(&lifted, n).into_iter().map(Source::Clause))
            .collect();
        derive_clause(&mut b, &f, &coder.vertex_vars(w), &Clause::empty())?;
    }
    Ok(b.finish(ProofMode::Refutation, Rules::Syntactic, Shape::Dag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp::verify_proof;

    #[test]
    fn eq_spec() {
        let s = eq_linear_spec(1);
        assert_eq!((s.a.clone(), s.b.clone(), s.c, s.k()), (vec![1], vec![-1], 0, 2));
        let s2 = eq_linear_spec(2);
        assert_eq!(s2.k(), 4);
        assert!(s2.matches(&Gadget::eq(2)));
        assert_eq!(s2.lower(0), LinearInequality::from_i64(&[(0, 1), (1, 2), (2, -1), (3, -2)], 0));
    }

    #[test]
    fn fragments() {
        let s = eq_linear_spec(1);
        let f = gen_coding_extract(&[0, 1], 0, &s).unwrap();
        assert_eq!(f.targets[0], LinearInequality::from_i64(&[(0, 1), (1, -1)], 0));
        f.verify().unwrap();
        gen_coding_extract(&[0, 1, 2], 1, &eq_linear_spec(2)).unwrap().verify().unwrap();
        gen_coding_append(&[], 0, &s).unwrap().verify().unwrap();
        gen_coding_append(&[0, 2], 1, &eq_linear_spec(2)).unwrap().verify().unwrap();
        gen_coding_propagate(&Dag::path(2), 1, &s).unwrap().verify().unwrap();
        gen_coding_propagate(&Dag::path(2), 0, &s).unwrap().verify().unwrap();
    }

    #[test]
    fn refutations_verify() {
        for n in 2..=4 {
            let d = Dag::path(n);
            let s = eq_linear_spec(1);
            let p = gen_refutation_lifted_pebbling(&d, &s, 2).unwrap();
            let ctx = Context::from_cnf(&lifted_pebbling_cnf(&d, &s).unwrap().cnf);
            verify_proof(&ctx, &p).unwrap_or_else(|e| panic!("path({n}): {e}"));
        }
    }
}
