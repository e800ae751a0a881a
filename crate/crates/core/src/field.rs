//! Prime field arithmetic and dense elimination over F_p.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime in [2, 2^31]")]
    BadPrime(u64),
}

/// The field F_p with p ≤ 2^31, elements stored as canonical residues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fp {
    p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Result<Fp, FieldError> {
        if !(2..=1 << 31).contains(&p) || !is_prime(p) {
            return Err(FieldError::BadPrime(p));
        }
        Ok(Fp { p })
    }

    pub fn p(self) -> u64 {
        self.p
    }

    pub fn reduce(self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    pub fn add(self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    pub fn sub(self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    pub fn neg(self, a: u64) -> u64 {
        (self.p - a) % self.p
    }

    pub fn mul(self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    pub fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(self, a: u64) -> u64 {
        assert!(a % self.p != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Row-reduce in place; returns pivot columns in row order.
pub fn row_reduce(f: Fp, m: &mut [Vec<u64>]) -> Vec<usize> {
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(k) = (r..m.len()).find(|&k| m[k][c] != 0) else { continue };
        m.swap(r, k);
        let inv = f.inv(m[r][c]);
        for x in m[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let pivot_row = m[r].clone();
        for (k, row) in m.iter_mut().enumerate() {
            if k != r && row[c] != 0 {
                let factor = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    if y != 0 {
                        *x = f.sub(*x, f.mul(factor, y));
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(f: Fp, m: &[Vec<u64>]) -> usize {
    let mut m = m.to_vec();
    row_reduce(f, &mut m).len()
}

/// Solve A·x = b; free variables are set to zero.
pub fn solve(f: Fp, a: &[Vec<u64>], b: &[u64]) -> Option<Vec<u64>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<u64>> = a.iter().zip(b).map(|(row, &bi)| {
        let mut r = row.clone();
        r.push(bi);
        r
    }).collect();
    let pivots = row_reduce(f, &mut m);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![0; cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][cols];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let f = Fp::new(7).unwrap();
        assert_eq!(f.mul(f.inv(3), 3), 1);
        assert_eq!(f.reduce(-1), 6);
        assert!(Fp::new(9).is_err());
        assert!(Fp::new(1).is_err());
        assert!(Fp::new(2147483647).is_ok());
    }

    #[test]
    fn elimination() {
        let f = Fp::new(2).unwrap();
        assert_eq!(rank(f, &[vec![1, 1], vec![1, 1]]), 1);
        let g = Fp::new(5).unwrap();
        let x = solve(g, &[vec![1, 2], vec![3, 4]], &[1, 0]).unwrap();
        assert_eq!((g.add(x[0], g.mul(2, x[1])), g.add(g.mul(3, x[0]), g.mul(4, x[1]))), (1, 0));
        assert!(solve(g, &[vec![1, 1], vec![1, 1]], &[1, 0]).is_none());
    }
}
