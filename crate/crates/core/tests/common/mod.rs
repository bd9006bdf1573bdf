//! Seeded random inputs shared by the integration tests.
#![allow(dead_code)]

use hgm_core::scalar::rat;
use hgm_core::{check_in_x, ParamVector, Rat, Shape, TableProblem, XMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random `alpha` with every entry nonzero, entries in `-4..=4`.
pub fn nonzero_alpha(rng: &mut TestRng, shape: Shape) -> ParamVector {
    loop {
        let mut e: Vec<i64> = (1..shape.width())
            .map(|_| {
                let v = rng.gen_range(1..=4);
                if rng.gen_bool(0.5) {
                    v
                } else {
                    -v
                }
            })
            .collect();
        let s: i64 = e.iter().sum();
        if s == 0 {
            continue;
        }
        e.insert(0, -s);
        return ParamVector::new(shape, e).unwrap();
    }
}

/// Random statistical `alpha` (negative on `1..=k`, positive on the middle
/// indices) with every entry nonzero. Upper entries are at least `min_up`.
pub fn statistical_alpha(rng: &mut TestRng, shape: Shape, max: i64) -> ParamVector {
    let (k, n) = (shape.k(), shape.n());
    loop {
        let mut e = vec![0i64];
        e.extend((0..k).map(|_| -rng.gen_range(1..=max)));
        e.extend((0..n).map(|_| rng.gen_range(1..=max)));
        let last = rng.gen_range(1..=max);
        e.push(last);
        let s: i64 = e.iter().sum();
        if s == 0 {
            continue;
        }
        e[0] = -s;
        return ParamVector::new(shape, e).unwrap();
    }
}

pub fn small_rat(rng: &mut TestRng) -> Rat {
    let n = rng.gen_range(1..=9);
    let d = rng.gen_range(1..=9);
    if rng.gen_bool(0.2) {
        rat(-n, d)
    } else {
        rat(n, d)
    }
}

/// Random rational `x` with all minors nonzero.
pub fn x_in_x(rng: &mut TestRng, shape: Shape) -> XMatrix<Rat> {
    loop {
        let rows = (0..shape.k())
            .map(|_| (0..shape.n()).map(|_| small_rat(rng)).collect())
            .collect();
        let x = XMatrix::new(rows).unwrap();
        if check_in_x(&x).is_empty() {
            return x;
        }
    }
}

pub fn random_vector(rng: &mut TestRng, len: usize) -> Vec<Rat> {
    (0..len).map(|_| small_rat(rng)).collect()
}

/// Random positive margins with the given total split over `r` parts.
pub fn margins(rng: &mut TestRng, r: usize, total: i64) -> Vec<i64> {
    let mut v = vec![1i64; r];
    for _ in 0..total - r as i64 {
        v[rng.gen_range(0..r)] += 1;
    }
    v
}

/// A random problem whose `x` lies in `X`.
pub fn table_problem(rng: &mut TestRng, r1: usize, r2: usize, total: i64) -> TableProblem {
    loop {
        let rows = margins(rng, r1, total);
        let cols = margins(rng, r2, total);
        let p = (0..r1)
            .map(|_| (0..r2).map(|_| rat(rng.gen_range(1..=9), rng.gen_range(1..=9))).collect())
            .collect();
        let problem = TableProblem::new(rows, cols, p).unwrap();
        let mapped = hgm_core::map_problem(&problem).unwrap();
        if check_in_x(&mapped.x).is_empty() {
            return problem;
        }
    }
}
