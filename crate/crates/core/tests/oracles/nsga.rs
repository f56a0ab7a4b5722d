//! Reference dominance, front peeling, crowding and diversity, written
//! directly from their definitions.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn dominates(a: &[BigRational], b: &[BigRational]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

pub fn dominance_matrix(objs: &[Vec<BigRational>]) -> Vec<Vec<bool>> {
    objs.iter().map(|a| objs.iter().map(|b| dominates(a, b)).collect()).collect()
}

/// Repeatedly removes the members nobody remaining dominates.
pub fn peel(objs: &[Vec<BigRational>]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..objs.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> =
            left.iter().copied().filter(|&i| !left.iter().any(|&j| dominates(&objs[j], &objs[i]))).collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

/// `None` stands for an infinite distance.
pub fn crowding(points: &[Vec<BigRational>]) -> Vec<Option<BigRational>> {
    let n = points.len();
    if n <= 2 {
        return vec![None; n];
    }
    let mut out: Vec<Option<BigRational>> = vec![Some(int(0)); n];
    for k in 0..points[0].len() {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| points[a][k].cmp(&points[b][k]).then(a.cmp(&b)));
        let span = &points[idx[n - 1]][k] - &points[idx[0]][k];
        out[idx[0]] = None;
        out[idx[n - 1]] = None;
        for pos in 1..n - 1 {
            if let (Some(d), false) = (&mut out[idx[pos]], span == int(0)) {
                *d = &*d + (&points[idx[pos + 1]][k] - &points[idx[pos - 1]][k]) / &span;
            }
        }
    }
    out
}

/// sd by counting, for every key, the members that fix it.
pub fn social_diversity(fixed: &[BTreeSet<String>]) -> Vec<BigRational> {
    fixed
        .iter()
        .map(|mine| {
            let mut total = int(0);
            for key in mine {
                let holders = fixed.iter().filter(|s| s.contains(key)).count() as i64;
                total += frac(1, holders);
            }
            total
        })
        .collect()
}

/// Small integer vectors, so that ties and duplicates are frequent.
pub fn random_population<R: Rng>(rng: &mut R, max: usize, objectives: usize) -> Vec<Vec<BigRational>> {
    let n = rng.gen_range(1..=max);
    (0..n).map(|_| (0..objectives).map(|_| int(rng.gen_range(0..6))).collect()).collect()
}
