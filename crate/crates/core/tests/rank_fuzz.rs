//! Randomized checks of the rank laboratory against elementary linear algebra.

use liftlab::field::Fp;
use liftlab::poly::MultilinearPoly;
use liftlab::rank::{check_lifting_bounds, compose_matrix, goodness, is_good, Goodness, rank_additivity_probe, ExactMatrix, MatrixField};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, field: MatrixField, lo: i64, hi: i64) -> ExactMatrix {
    let m: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(lo..=hi)).collect()).collect();
    ExactMatrix::from_i64(field, &m).unwrap()
}

/// Whether appending an all-ones row leaves the rank unchanged.
fn ones_in_row_space(g: &ExactMatrix) -> bool {
    let mut data: Vec<_> = (0..g.rows()).flat_map(|i| (0..g.cols()).map(move |j| (i, j))).map(|(i, j)| g.get(i, j).clone()).collect();
    data.extend(std::iter::repeat(num_rational::BigRational::from_integer(1.into())).take(g.cols()));
    ExactMatrix::new(g.rows() + 1, g.cols(), g.field(), data).unwrap().rank() == g.rank()
}

#[test]
fn goodness_matches_additivity_with_all_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fields = [
        MatrixField::Rational,
        MatrixField::Prime(Fp::new(2).unwrap()),
        MatrixField::Prime(Fp::new(3).unwrap()),
    ];
    let mut good = 0;
    for t in 0..200 {
        let field = fields[t % 3];
        let (r, c) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let g = random_matrix(&mut rng, r, c, field, 0, 2);
        let ones = ExactMatrix::ones(r, c, field).unwrap();
        let probe = rank_additivity_probe(&ones, &g).unwrap();
        assert_eq!(is_good(&g), probe, "{}", g.to_text());
        let by_definition = !ones_in_row_space(&g) && !ones_in_row_space(&g.transpose());
        assert_eq!(is_good(&g), by_definition, "{}", g.to_text());
        good += probe as usize;
    }
    assert!(good > 0 && good < 200, "fuzz should hit both outcomes, got {good} good");
}

#[test]
fn sandwich_on_random_gadgets() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let fp = Fp::new(1_000_003).unwrap();
    let mut done = 0;
    let mut sharpened = 0;
    while done < 50 {
        let g = random_matrix(&mut rng, 8, 8, MatrixField::Rational, 0, 1);
        if g.rank() < 4 {
            continue;
        }
        let terms: Vec<(u64, u64)> = (0..4u64).map(|m| (m, fp.reduce(rng.gen_range(-3..=3)))).collect();
        let p = MultilinearPoly::from_terms(2, fp, terms);
        let r = check_lifting_bounds(&p, &g, 2).unwrap();
        assert!(r.within_bounds(), "{r:?}\n{}", g.to_text());
        if r.good {
            assert_eq!(r.exact_good, Some(true), "{r:?}");
        }
        if let Some(ok) = r.sharpened_holds() {
            assert!(ok, "{r:?}");
            sharpened += 1;
        }
        done += 1;
    }
    assert!(sharpened > 0);
}

#[test]
fn equality_for_good_gadgets() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let fp = Fp::new(1_000_003).unwrap();
    let mut hits = 0;
    for _ in 0..200 {
        // A zero row and column force goodness.
        let mut m: Vec<Vec<i64>> = (0..4).map(|_| (0..4).map(|_| rng.gen_range(0..=1)).collect()).collect();
        let (zr, zc) = (rng.gen_range(0..4), rng.gen_range(0..4));
        m[zr].iter_mut().for_each(|v| *v = 0);
        m.iter_mut().for_each(|row| row[zc] = 0);
        let g = ExactMatrix::from_i64(MatrixField::Rational, &m).unwrap();
        if g.is_zero() {
            continue;
        }
        assert!(is_good(&g));
        let terms: Vec<(u64, u64)> = (0..4u64).map(|m| (m, rng.gen_range(0..3))).collect();
        let p = MultilinearPoly::from_terms(2, fp, terms);
        let r = check_lifting_bounds(&p, &g, 2).unwrap();
        assert_eq!(BigInt::from(r.actual), r.upper, "{r:?}");
        hits += 1;
    }
    assert!(hits > 100);
}

#[test]
fn tensor_additivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let q = MatrixField::Rational;
    let mut additive = 0;
    for _ in 0..120 {
        let (r, c) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let f = random_matrix(&mut rng, r, c, q, 0, 1);
        let g = random_matrix(&mut rng, r, c, q, 0, 1);
        if !rank_additivity_probe(&f, &g).unwrap() {
            continue;
        }
        additive += 1;
        let (ar, ac) = (rng.gen_range(1..=2), rng.gen_range(1..=3));
        let a = random_matrix(&mut rng, ar, ac, q, -1, 1);
        let b = random_matrix(&mut rng, ar, ac, q, -1, 1);
        let sum = f.tensor(&a).unwrap().add(&g.tensor(&b).unwrap()).unwrap();
        assert_eq!(sum.rank(), f.rank() * a.rank() + g.rank() * b.rank());
    }
    assert!(additive > 10);
}

proptest! {
    #[test]
    fn composition_is_additive(
        g in prop::collection::vec(0i64..5, 4),
        p in prop::collection::vec(0u64..5, 4),
        r in prop::collection::vec(0u64..5, 4),
    ) {
        let fp = Fp::new(5).unwrap();
        let field = MatrixField::Prime(fp);
        let g = ExactMatrix::from_i64(field, &[g[..2].to_vec(), g[2..].to_vec()]).unwrap();
        let p = MultilinearPoly::from_terms(2, fp, p.into_iter().enumerate().map(|(m, c)| (m as u64, c)));
        let r = MultilinearPoly::from_terms(2, fp, r.into_iter().enumerate().map(|(m, c)| (m as u64, c)));
        let lhs = compose_matrix(&p.add(&r), &g, 2).unwrap();
        let rhs = compose_matrix(&p, &g, 2).unwrap().add(&compose_matrix(&r, &g, 2).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn rank_is_transpose_invariant(m in prop::collection::vec(-2i64..3, 12)) {
        let a = ExactMatrix::from_i64(MatrixField::Rational, &m.chunks(4).map(<[i64]>::to_vec).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(a.rank(), a.transpose().rank());
        prop_assert!(a.rank() <= 3);
    }
}

#[test]
fn goodness_witnesses_check_out() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for field in [MatrixField::Rational, MatrixField::Prime(Fp::new(3).unwrap())] {
        for _ in 0..100 {
            let (r, c) = (rng.gen_range(1..5), rng.gen_range(1..5));
            let rows: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(-1..2)).collect()).collect();
            let g = ExactMatrix::from_i64(field, &rows).unwrap();
            let is_one = |v: BigRational| ExactMatrix::new(1, 1, field, vec![v]).unwrap().get(0, 0).is_one();
            match goodness(&g) {
                Goodness::Good => assert!(is_good(&g)),
                Goodness::OnesInRowSpace(x) => {
                    assert!(!is_good(&g));
                    assert!((0..c).all(|j| is_one((0..r).map(|i| &x[i] * g.get(i, j)).sum())));
                }
                Goodness::OnesInColumnSpace(x) => {
                    assert!(!is_good(&g));
                    assert!((0..r).all(|i| is_one((0..c).map(|j| g.get(i, j) * &x[j]).sum())));
                }
            }
        }
    }
}
