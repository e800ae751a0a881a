//! Exact rank experiments: composed matrices p∘gⁿ, the good-gadget test,
//! degree-to-rank bounds and the rank measure of rectangle covers.
//!
//! Matrices carry their field. Over ℚ entries are reduced fractions and rank
//! is computed by fraction-free elimination over the integers; over F_p
//! entries are canonical residues.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use thiserror::Error;

use crate::cnf::Cnf;
use crate::field::{self, Fp, FieldError};
use crate::lift::Gadget;
use crate::ns::{self, NsError};
use crate::poly::MultilinearPoly;

/// Largest side length of a composed matrix.
pub const MAX_SIDE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrices live over different fields ({0} and {1})")]
    FieldMismatch(MatrixField, MatrixField),
    #[error("composed matrix would have {0} rows or columns (limit {MAX_SIDE})")]
    TooLarge(u128),
    #[error("rank measure is undefined: every restriction has rank 0")]
    Undefined,
    #[error("rectangle index out of bounds: {0}")]
    OutOfBounds(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Ns(#[from] NsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixField {
    Rational,
    Prime(Fp),
}

impl fmt::Display for MatrixField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixField::Rational => write!(f, "Q"),
            MatrixField::Prime(fp) => write!(f, "F{}", fp.p()),
        }
    }
}

impl MatrixField {
    pub fn parse(s: &str) -> Result<MatrixField, String> {
        if s == "Q" {
            return Ok(MatrixField::Rational);
        }
        let p = s
            .strip_prefix('F')
            .and_then(|t| t.parse::<u64>().ok())
            .ok_or_else(|| format!("unknown field '{s}' (expected Q or F<p>)"))?;
        Fp::new(p).map(MatrixField::Prime).map_err(|e| e.to_string())
    }

    fn normalize(self, v: BigRational) -> BigRational {
        match self {
            MatrixField::Rational => v,
            MatrixField::Prime(fp) => {
                let p = BigInt::from(fp.p());
                let num = v.numer().mod_floor(&p);
                let den = v.denom().mod_floor(&p);
                let inv = fp.inv(den.to_u64().expect("residue"));
                BigRational::from_integer((num * BigInt::from(inv)).mod_floor(&p))
            }
        }
    }

    /// Embed an F_p coefficient: the same residue over F_p, the symmetric
    /// representative in (−p/2, p/2] over ℚ.
    fn lift(self, source: Fp, c: u64) -> BigRational {
        let v = match self {
            MatrixField::Prime(_) => c as i64,
            MatrixField::Rational if c > source.p() / 2 => c as i64 - source.p() as i64,
            MatrixField::Rational => c as i64,
        };
        BigRational::from_integer(BigInt::from(v))
    }
}

/// A dense matrix over ℚ or F_p with normalized entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    field: MatrixField,
    data: Vec<BigRational>,
}

impl ExactMatrix {
    pub fn new(rows: usize, cols: usize, field: MatrixField, entries: Vec<BigRational>) -> Result<Self, RankError> {
        if rows == 0 || cols == 0 {
            return Err(RankError::Dimension("matrices need at least one row and column".into()));
        }
        if entries.len() != rows * cols {
            return Err(RankError::Dimension(format!("{} entries for a {rows}×{cols} matrix", entries.len())));
        }
        let data = entries.into_iter().map(|v| field.normalize(v)).collect();
        Ok(ExactMatrix { rows, cols, field, data })
    }

    pub fn from_i64(field: MatrixField, rows: &[Vec<i64>]) -> Result<Self, RankError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(RankError::Dimension("ragged rows".into()));
        }
        let data = rows.iter().flatten().map(|&v| BigRational::from_integer(v.into())).collect();
        Self::new(rows.len(), cols, field, data)
    }

    pub fn filled(rows: usize, cols: usize, field: MatrixField, v: i64) -> Result<Self, RankError> {
        Self::new(rows, cols, field, vec![BigRational::from_integer(v.into()); rows * cols])
    }

    pub fn ones(rows: usize, cols: usize, field: MatrixField) -> Result<Self, RankError> {
        Self::filled(rows, cols, field, 1)
    }

    pub fn identity(n: usize, field: MatrixField) -> Result<Self, RankError> {
        let mut m = Self::filled(n, n, field, 0)?;
        for i in 0..n {
            m.data[i * n + i] = BigRational::one();
        }
        Ok(m)
    }

    /// The 0/1 truth table of a Boolean gadget.
    pub fn from_gadget(g: &Gadget, field: MatrixField) -> Self {
        let side = 1usize << g.q();
        let data = (0..side * side)
            .map(|k| if g.eval(k / side, k % side) { BigRational::one() } else { BigRational::zero() })
            .collect();
        ExactMatrix { rows: side, cols: side, field, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> MatrixField {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    fn same_field(&self, other: &Self) -> Result<(), RankError> {
        if self.field != other.field {
            return Err(RankError::FieldMismatch(self.field, other.field));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, RankError> {
        self.same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(RankError::Dimension(format!(
                "{}×{} plus {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self::new(self.rows, self.cols, self.field, data)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let data = self.data.iter().map(|a| a * c).collect();
        Self::new(self.rows, self.cols, self.field, data).expect("same shape")
    }

    /// Kronecker product; row (i, k) of the result is i·rows(other) + k.
    pub fn tensor(&self, other: &Self) -> Result<Self, RankError> {
        self.same_field(other)?;
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut data = Vec::with_capacity(r * c);
        for i in 0..self.rows {
            for k in 0..other.rows {
                for j in 0..self.cols {
                    for l in 0..other.cols {
                        data.push(self.get(i, j) * other.get(k, l));
                    }
                }
            }
        }
        Self::new(r, c, self.field, data)
    }

    pub fn transpose(&self) -> Self {
        let data = (0..self.cols).flat_map(|j| (0..self.rows).map(move |i| (i, j))).map(|(i, j)| self.get(i, j).clone()).collect();
        ExactMatrix { rows: self.cols, cols: self.rows, field: self.field, data }
    }

    /// The rows `rs` and columns `cs`, in the given order.
    pub fn submatrix(&self, rs: &[usize], cs: &[usize]) -> Result<Self, RankError> {
        if let Some(&i) = rs.iter().find(|&&i| i >= self.rows) {
            return Err(RankError::OutOfBounds(format!("row {i}")));
        }
        if let Some(&j) = cs.iter().find(|&&j| j >= self.cols) {
            return Err(RankError::OutOfBounds(format!("column {j}")));
        }
        let data = rs.iter().flat_map(|&i| cs.iter().map(move |&j| (i, j))).map(|(i, j)| self.get(i, j).clone()).collect();
        Self::new(rs.len(), cs.len(), self.field, data)
    }

    /// Append a constant row.
    fn with_row(&self, v: i64) -> Self {
        let mut data = self.data.clone();
        data.extend(std::iter::repeat(BigRational::from_integer(v.into())).take(self.cols));
        ExactMatrix { rows: self.rows + 1, cols: self.cols, field: self.field, data }
    }

    pub fn rank(&self) -> usize {
        match self.field {
            MatrixField::Prime(fp) => {
                let m: Vec<Vec<u64>> = self
                    .data
                    .chunks(self.cols)
                    .map(|r| r.iter().map(|v| v.numer().to_u64().expect("canonical residue")).collect())
                    .collect();
                field::rank(fp, &m)
            }
            MatrixField::Rational => {
                let m = self
                    .data
                    .chunks(self.cols)
                    .map(|r| {
                        let l = r.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
                        r.iter().map(|v| v.numer() * (&l / v.denom())).collect()
                    })
                    .collect();
                bareiss_rank(m)
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("matrix {} {} {}\n", self.rows, self.cols, self.field);
        for r in self.data.chunks(self.cols) {
            let row: Vec<String> = r.iter().map(ToString::to_string).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parse `matrix <rows> <cols> <Q|F<p>>` followed by one line per row.
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, RankError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, msg: String| RankError::Parse { line, msg };
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "matrix" {
            return Err(err(hl, "expected 'matrix <rows> <cols> <field>'".into()));
        }
        let rows: usize = h[1].parse().map_err(|_| err(hl, format!("bad row count '{}'", h[1])))?;
        let cols: usize = h[2].parse().map_err(|_| err(hl, format!("bad column count '{}'", h[2])))?;
        let field = MatrixField::parse(h[3]).map_err(|m| err(hl, m))?;
        let mut data = Vec::with_capacity(rows * cols);
        let mut seen = 0;
        for (ln, l) in lines {
            let row: Vec<BigRational> = l
                .split_whitespace()
                .map(|t| t.parse::<BigRational>().map_err(|_| err(ln, format!("bad entry '{t}'"))))
                .collect::<Result<_, _>>()?;
            if row.len() != cols {
                return Err(err(ln, format!("expected {cols} entries, found {}", row.len())));
            }
            data.extend(row);
            seen += 1;
            if seen > rows {
                return Err(err(ln, format!("more than {rows} rows")));
            }
        }
        if seen != rows {
            return Err(err(hl, format!("expected {rows} rows, found {seen}")));
        }
        Self::new(rows, cols, field, data)
    }
}

/// Fraction-free elimination; every intermediate entry is a minor of the
/// input, so each division is exact.
fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot = &top[r];
        for row in rest.iter_mut() {
            for j in c + 1..cols {
                let v = &pivot[c] * &row[j] - &row[c] * &pivot[j];
                debug_assert!((&v % &prev).is_zero());
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = top[r][c].clone();
        r += 1;
    }
    r
}

/// Monomial coefficients of `p` embedded into `field`, with masks.
pub fn coefficients_in(p: &MultilinearPoly, field: MatrixField) -> Result<Vec<(u64, BigRational)>, RankError> {
    if let MatrixField::Prime(fp) = field {
        if fp != p.field {
            return Err(RankError::FieldMismatch(MatrixField::Prime(p.field), field));
        }
    }
    Ok(p.terms().map(|(m, c)| (m, field.lift(p.field, c))).collect())
}

fn composed_side(base: usize, n: usize) -> Result<usize, RankError> {
    let side = (base as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if side > MAX_SIDE as u128 {
        return Err(RankError::TooLarge(side));
    }
    Ok(side as usize)
}

/// p∘gⁿ for a polynomial given by its monomial coefficients. Row index
/// (x₁,…,x_n) has x₁ as the most significant digit.
pub fn compose_terms(terms: &[(u64, BigRational)], g: &ExactMatrix, n: usize) -> Result<ExactMatrix, RankError> {
    if let Some((m, _)) = terms.iter().find(|(m, _)| n < 64 && m >> n != 0) {
        return Err(RankError::Dimension(format!("monomial {m:#b} uses variables beyond z_{n}")));
    }
    let (rs, cs) = (composed_side(g.rows, n)?, composed_side(g.cols, n)?);
    let digits = |mut v: usize, base: usize| {
        let mut d = vec![0; n];
        for k in (0..n).rev() {
            d[k] = v % base;
            v /= base;
        }
        d
    };
    let cols: Vec<Vec<usize>> = (0..cs).map(|y| digits(y, g.cols)).collect();
    let mut data = Vec::with_capacity(rs * cs);
    for x in 0..rs {
        let xd = digits(x, g.rows);
        for yd in &cols {
            let mut v = BigRational::zero();
            for (mask, c) in terms {
                let mut t = c.clone();
                for i in crate::bits(*mask) {
                    let e = g.get(xd[i], yd[i]);
                    if e.is_zero() {
                        t = BigRational::zero();
                        break;
                    }
                    t *= e;
                }
                v += t;
            }
            data.push(v);
        }
    }
    ExactMatrix::new(rs, cs, g.field, data)
}

/// p∘gⁿ: entry (x, y) is p(g[x₁,y₁], …, g[x_n,y_n]). Over ℚ the F_p
/// coefficients of p are read as their symmetric integer representatives.
pub fn compose_matrix(p: &MultilinearPoly, g: &ExactMatrix, n: usize) -> Result<ExactMatrix, RankError> {
    compose_terms(&coefficients_in(p, g.field)?, g, n)
}

/// The all-ones vector lies in neither the row space nor the column space.
pub fn is_good(g: &ExactMatrix) -> bool {
    let r = g.rank();
    g.with_row(1).rank() > r && g.transpose().with_row(1).rank() > r
}

/// Why a matrix fails to be good: coefficients c with cᵀG = 1ᵀ (row space)
/// or G c = 1 (column space).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Goodness {
    Good,
    OnesInRowSpace(Vec<BigRational>),
    OnesInColumnSpace(Vec<BigRational>),
}

/// `is_good` with a certificate when the answer is no.
pub fn goodness(g: &ExactMatrix) -> Goodness {
    let ones = |k: usize| vec![BigRational::one(); k];
    if let Some(c) = solve(&g.transpose(), &ones(g.cols)) {
        return Goodness::OnesInRowSpace(c);
    }
    if let Some(c) = solve(g, &ones(g.rows)) {
        return Goodness::OnesInColumnSpace(c);
    }
    Goodness::Good
}

/// Some x with a x = b over the matrix field, by Gauss-Jordan elimination.
pub fn solve(a: &ExactMatrix, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let f = a.field;
    let (rows, cols) = (a.rows, a.cols);
    let mut m: Vec<Vec<BigRational>> = (0..rows)
        .map(|i| (0..cols).map(|j| a.get(i, j).clone()).chain([f.normalize(b[i].clone())]).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = f.normalize(m[r][c].recip());
        for v in m[r].iter_mut() {
            *v = f.normalize(&*v * &inv);
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let k = m[i][c].clone();
                for j in c..=cols {
                    let v = &m[i][j] - &k * &m[r][j];
                    m[i][j] = f.normalize(v);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Some(x)
}

/// Whether rank(f + g) = rank(f) + rank(g).
pub fn rank_additivity_probe(f: &ExactMatrix, g: &ExactMatrix) -> Result<bool, RankError> {
    Ok(f.add(g)?.rank() == f.rank() + g.rank())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftingReport {
    pub rank_g: usize,
    pub actual: usize,
    /// Σ rank(g)^{|S|} over the support of p.
    pub upper: BigInt,
    /// Σ (rank(g) − 3)^{|S|}; `None` when rank(g) < 3.
    pub lower: Option<BigInt>,
    /// Σ (rank(g) − 2)^{|S|}; only for gadgets that are not full rank.
    pub sharpened_lower: Option<BigInt>,
    pub good: bool,
    /// actual = upper, reported for good gadgets only.
    pub exact_good: Option<bool>,
}

impl LiftingReport {
    pub fn within_bounds(&self) -> bool {
        let actual = BigInt::from(self.actual);
        actual <= self.upper && self.lower.as_ref().map_or(true, |l| *l <= actual)
    }

    pub fn sharpened_holds(&self) -> Option<bool> {
        self.sharpened_lower.as_ref().map(|l| *l <= BigInt::from(self.actual))
    }
}

fn support_sum(sizes: &[u32], base: usize) -> BigInt {
    sizes.iter().map(|&k| Pow::pow(BigInt::from(base), k)).sum()
}

/// Rank of p∘gⁿ against the degree-to-rank sandwich.
pub fn check_lifting_bounds(p: &MultilinearPoly, g: &ExactMatrix, n: usize) -> Result<LiftingReport, RankError> {
    let terms = coefficients_in(p, g.field)?;
    let actual = compose_terms(&terms, g, n)?.rank();
    let sizes: Vec<u32> = terms.iter().map(|(m, _)| m.count_ones()).collect();
    let rank_g = g.rank();
    let good = is_good(g);
    let upper = support_sum(&sizes, rank_g);
    Ok(LiftingReport {
        rank_g,
        actual,
        lower: (rank_g >= 3).then(|| support_sum(&sizes, rank_g - 3)),
        sharpened_lower: (rank_g >= 3 && rank_g < g.rows.min(g.cols)).then(|| support_sum(&sizes, rank_g - 2)),
        good,
        exact_good: good.then(|| BigInt::from(actual) == upper),
        upper,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rectangle {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub clause: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RectangleCover {
    pub rects: Vec<Rectangle>,
}

impl RectangleCover {
    /// Every cell of the rows × cols grid lies in some rectangle.
    pub fn covers(&self, rows: usize, cols: usize) -> bool {
        let mut hit = vec![false; rows * cols];
        for r in &self.rects {
            for &i in &r.rows {
                for &j in &r.cols {
                    if i < rows && j < cols {
                        hit[i * cols + j] = true;
                    }
                }
            }
        }
        hit.into_iter().all(|b| b)
    }

    /// Each rectangle carries a clause C such that every cell falsifies C
    /// under gⁿ and every coordinate outside vars(C) projects onto all of
    /// X × Y. Rows and columns are indexed as in `compose_matrix`.
    pub fn is_structured(&self, cnf: &Cnf, g: &Gadget) -> bool {
        let n = cnf.num_vars;
        let side = 1usize << g.q();
        let digits = |mut v: usize| {
            let mut d = vec![0; n];
            for k in (0..n).rev() {
                d[k] = v % side;
                v /= side;
            }
            d
        };
        self.rects.iter().all(|r| {
            let Some(c) = r.clause.and_then(|k| cnf.clauses.get(k)) else { return false };
            let xs: Vec<Vec<usize>> = r.rows.iter().map(|&x| digits(x)).collect();
            let ys: Vec<Vec<usize>> = r.cols.iter().map(|&y| digits(y)).collect();
            let falsified = xs.iter().all(|x| {
                ys.iter().all(|y| {
                    let z: Vec<bool> = (0..n).map(|i| g.eval(x[i], y[i])).collect();
                    c.is_falsified(&z)
                })
            });
            let mask = c.var_mask();
            let full = (0..n).filter(|&i| mask >> i & 1 == 0).all(|i| {
                let mut seen_x = vec![false; side];
                let mut seen_y = vec![false; side];
                xs.iter().for_each(|x| seen_x[x[i]] = true);
                ys.iter().for_each(|y| seen_y[y[i]] = true);
                seen_x.into_iter().chain(seen_y).all(|b| b)
            });
            falsified && full
        })
    }
}

/// μ(R, A) = rank(A) / max over R of rank(A↾R).
pub fn rank_measure(cover: &RectangleCover, a: &ExactMatrix) -> Result<BigRational, RankError> {
    let mut best = 0;
    for r in &cover.rects {
        if r.rows.is_empty() || r.cols.is_empty() {
            continue;
        }
        best = best.max(a.submatrix(&r.rows, &r.cols)?.rank());
    }
    if best == 0 {
        return Err(RankError::Undefined);
    }
    Ok(BigRational::new(a.rank().into(), best.into()))
}

/// Numerical values of the rank-measure and communication lower bounds
/// driven by Nullstellensatz degree. Logarithms are base 2.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub ns_degree: usize,
    pub n: usize,
    pub k: usize,
    pub rank_g: usize,
    /// log₂ of (1/k)(d·r/(e·n))^d · exp(−6n/r).
    pub measure_log2: f64,
    pub measure_value: f64,
    /// d·log₂(d·r/(e·n)) − 6n·log₂(e)/r − log₂ k.
    pub cc_bound: f64,
    pub vacuous: bool,
    /// Gap-complexity witness used for the pattern matrix.
    pub witness: MultilinearPoly,
    pub witness_gap: usize,
    /// Rank of witness∘gⁿ over F_p when it fits the size guard.
    pub witness_rank: Option<usize>,
}

pub fn bound_report(cnf: &Cnf, g: &Gadget, p: u64) -> Result<BoundReport, RankError> {
    let fp = Fp::new(p)?;
    let (d, _) = ns::ns_degree(cnf, p)?;
    let (witness_gap, witness) = ns::gap_complexity(cnf, p)?;
    let gm = ExactMatrix::from_gadget(g, MatrixField::Prime(fp));
    let rank_g = gm.rank();
    let n = cnf.num_vars;
    let k = cnf.width().max(1);
    let (df, nf, rf, kf) = (d as f64, n as f64, rank_g as f64, k as f64);
    let e = std::f64::consts::E;
    let log2e = std::f64::consts::LOG2_E;
    let ratio = df * rf / (e * nf);
    // The communication bound is the base-2 logarithm of the measure bound.
    let measure_log2 = if d == 0 { 0.0 } else { df * ratio.log2() } - 6.0 * nf * log2e / rf - kf.log2();
    let cc_bound = measure_log2;
    let witness_rank = match compose_matrix(&witness, &gm, n) {
        Ok(m) => Some(m.rank()),
        Err(RankError::TooLarge(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(BoundReport {
        ns_degree: d,
        n,
        k,
        rank_g,
        measure_log2,
        measure_value: measure_log2.exp2(),
        cc_bound,
        vacuous: cc_bound <= 0.0,
        witness,
        witness_gap,
        witness_rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: MatrixField = MatrixField::Rational;

    fn m(rows: &[&[i64]]) -> ExactMatrix {
        ExactMatrix::from_i64(Q, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn f(p: u64) -> Fp {
        Fp::new(p).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(m(&[&[2, 1], &[1, 2]]).rank(), 2);
        assert_eq!(ExactMatrix::ones(4, 4, Q).unwrap().rank(), 1);
        for q in 1..=3 {
            assert_eq!(ExactMatrix::from_gadget(&Gadget::eq(q), Q).rank(), 1 << q);
        }
        assert_eq!(m(&[&[1, 2, 3], &[2, 4, 6], &[0, 0, 1]]).rank(), 2);
        assert_eq!(m(&[&[0, 0], &[0, 0]]).rank(), 0);
        // [[1,1],[1,-1]] is singular over F₂ only.
        let h = ExactMatrix::from_i64(MatrixField::Prime(f(2)), &[vec![1, 1], vec![1, -1]]).unwrap();
        assert_eq!(h.rank(), 1);
        assert_eq!(m(&[&[1, 1], &[1, -1]]).rank(), 2);
    }

    #[test]
    fn fractions_are_cleared() {
        let half = BigRational::new(1.into(), 2.into());
        let a = ExactMatrix::new(2, 2, Q, vec![half.clone(), BigRational::one(), BigRational::one(), BigRational::from_integer(2.into())]).unwrap();
        assert_eq!(a.rank(), 1);
        let b = ExactMatrix::new(1, 1, MatrixField::Prime(f(5)), vec![half]).unwrap();
        assert_eq!(b.get(0, 0), &BigRational::from_integer(3.into()));
    }

    #[test]
    fn goodness_examples() {
        assert!(!is_good(&m(&[&[1, 0], &[0, 1]])));
        assert!(is_good(&m(&[&[0, 0], &[0, 1]])));
        assert!(is_good(&m(&[&[0, 0, 0], &[0, 1, 2], &[0, 3, 1]])));
        let ones = ExactMatrix::ones(2, 2, Q).unwrap();
        assert!(!rank_additivity_probe(&ones, &m(&[&[1, 0], &[0, 1]])).unwrap());
        assert!(rank_additivity_probe(&ones, &m(&[&[0, 0], &[0, 1]])).unwrap());
        let zero = m(&[&[0, 0], &[0, 0]]);
        assert!(rank_additivity_probe(&zero, &zero).unwrap());
    }

    #[test]
    fn composition_examples() {
        let fp = f(1_000_003);
        let g = m(&[&[1, 2], &[3, 5]]);
        let z1 = MultilinearPoly::monomial(1, fp, 1, 1);
        assert_eq!(compose_matrix(&z1, &g, 1).unwrap(), g);
        let one = MultilinearPoly::constant(2, fp, 1);
        let c = compose_matrix(&one, &g, 2).unwrap();
        assert_eq!(c, ExactMatrix::ones(4, 4, Q).unwrap());
        assert_eq!(c.rank(), 1);

        // XOR = z₁ + z₂ − 2z₁z₂ composed with EQ_1.
        let xor = MultilinearPoly::from_terms(2, fp, [(1, 1), (2, 1), (3, fp.reduce(-2))]);
        let eq1 = ExactMatrix::from_gadget(&Gadget::eq(1), Q);
        let a = compose_matrix(&xor, &eq1, 2).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                let z = [(x >> 1 == y >> 1) as i64, (x & 1 == y & 1) as i64];
                assert_eq!(a.get(x, y), &BigRational::from_integer((z[0] ^ z[1]).into()));
            }
        }
        let r = check_lifting_bounds(&xor, &eq1, 2).unwrap();
        assert_eq!(r.actual, a.rank());
        assert!(r.within_bounds());
        assert_eq!(r.upper, BigInt::from(2 + 2 + 4));
        assert!(r.lower.is_none() && !r.good && r.exact_good.is_none());
    }

    #[test]
    fn lifting_bound_examples() {
        let fp = f(1_000_003);
        let g = m(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]);
        let r = check_lifting_bounds(&MultilinearPoly::monomial(1, fp, 1, 1), &g, 1).unwrap();
        assert_eq!((r.lower, r.actual, r.upper), (Some(BigInt::one()), 4, BigInt::from(4)));

        // A good rank-2 gadget with a zero row and column.
        let g = m(&[&[0, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert!(is_good(&g));
        let r = check_lifting_bounds(&MultilinearPoly::monomial(2, fp, 3, 1), &g, 2).unwrap();
        assert_eq!(r.actual, 4);
        assert_eq!(r.exact_good, Some(true));
    }

    #[test]
    fn composition_is_linear_in_p() {
        let fp = f(7);
        let g = ExactMatrix::from_i64(MatrixField::Prime(fp), &[vec![1, 2], vec![0, 3]]).unwrap();
        let p = MultilinearPoly::from_terms(2, fp, [(0, 3), (1, 5), (3, 2)]);
        let r = MultilinearPoly::from_terms(2, fp, [(2, 4), (3, 6)]);
        let lhs = compose_matrix(&p.add(&r), &g, 2).unwrap();
        let rhs = compose_matrix(&p, &g, 2).unwrap().add(&compose_matrix(&r, &g, 2).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn size_guard() {
        let g = ExactMatrix::from_gadget(&Gadget::eq(2), Q);
        let p = MultilinearPoly::constant(7, f(3), 1);
        assert!(matches!(compose_matrix(&p, &g, 7), Err(RankError::TooLarge(16384))));
        assert_eq!(composed_side(4, 6), Ok(4096));
    }

    #[test]
    fn rank_measure_examples() {
        let a = ExactMatrix::from_gadget(&Gadget::eq(2), Q);
        let full = RectangleCover { rects: vec![Rectangle { rows: (0..4).collect(), cols: (0..4).collect(), clause: None }] };
        assert_eq!(rank_measure(&full, &a).unwrap(), BigRational::one());
        let diag = RectangleCover {
            rects: (0..4).map(|i| Rectangle { rows: vec![i], cols: vec![i], clause: None }).collect(),
        };
        assert_eq!(rank_measure(&diag, &a).unwrap(), BigRational::from_integer(4.into()));
        assert!(!diag.covers(4, 4));
        let off = RectangleCover { rects: vec![Rectangle { rows: vec![0], cols: vec![1], clause: None }] };
        assert_eq!(rank_measure(&off, &a), Err(RankError::Undefined));
        let bad = RectangleCover { rects: vec![Rectangle { rows: vec![9], cols: vec![0], clause: None }] };
        assert!(matches!(rank_measure(&bad, &a), Err(RankError::OutOfBounds(_))));
    }

    #[test]
    fn structured_cover() {
        // x ∧ ¬x lifted with EQ_1: clause 0 is (x), clause 1 is (¬x).
        let cnf = Cnf::from_signed(1, &[&[1], &[-1]]).unwrap();
        let g = Gadget::eq(1);
        // g = 0 off the diagonal falsifies (x); g = 1 on it falsifies (¬x).
        let cover = RectangleCover {
            rects: vec![
                Rectangle { rows: vec![0], cols: vec![1], clause: Some(0) },
                Rectangle { rows: vec![1], cols: vec![0], clause: Some(0) },
                Rectangle { rows: vec![0], cols: vec![0], clause: Some(1) },
                Rectangle { rows: vec![1], cols: vec![1], clause: Some(1) },
            ],
        };
        assert!(cover.covers(2, 2));
        assert!(cover.is_structured(&cnf, &g));
        let wrong = RectangleCover { rects: vec![Rectangle { rows: vec![0], cols: vec![0], clause: Some(0) }] };
        assert!(!wrong.is_structured(&cnf, &g));
    }

    #[test]
    fn text_round_trip() {
        let a = m(&[&[1, -2], &[0, 3]]).scale(&BigRational::new(1.into(), 3.into()));
        let b = ExactMatrix::parse(&a.to_text()).unwrap();
        assert_eq!(a, b);
        let c = ExactMatrix::parse("# EQ\nmatrix 2 2 F3\n1 0\n0 4\n").unwrap();
        assert_eq!(c.get(1, 1), &BigRational::one());
        assert!(ExactMatrix::parse("matrix 2 2 Q\n1 0\n").is_err());
        assert!(ExactMatrix::parse("matrix 1 2 F4\n1 0\n").is_err());
    }

    #[test]
    fn bound_report_path2() {
        let dag = crate::Dag::path(2);
        let cnf = crate::cnf::pebbling_formula(&dag).unwrap();
        let r = bound_report(&cnf, &Gadget::eq(2), 2).unwrap();
        assert_eq!(r.ns_degree, 2);
        assert_eq!(r.rank_g, 4);
        assert_eq!(r.witness_gap, 2);
        // d = 2, r = 4, n = 2, k = 2.
        let expect = 2.0 * (4.0 / std::f64::consts::E).log2() - 12.0 * std::f64::consts::LOG2_E / 4.0 - 1.0;
        assert!((r.cc_bound - expect).abs() < 1e-9);
        assert!(r.vacuous);
        assert!(r.witness_rank.is_some());
    }
}
