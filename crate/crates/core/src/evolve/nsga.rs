//! Dominance, non-dominated sorting and crowding distance over objective
//! vectors, all minimized, in exact rationals.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::Zero;

/// A crowding or diversity value; boundary points are infinitely far.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Distance {
    Finite(BigRational),
    Infinite,
}

impl Distance {
    pub fn zero() -> Self {
        Distance::Finite(BigRational::zero())
    }
}

/// `a` is no worse on every objective and strictly better on one.
pub fn dominates(a: &[BigRational], b: &[BigRational]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Greater => return false,
            Ordering::Less => strictly = true,
            Ordering::Equal => {}
        }
    }
    strictly
}

/// Fast non-dominated sort. Fronts list indices in ascending order.
pub fn fast_nondominated_sort(objs: &[Vec<BigRational>]) -> Vec<Vec<usize>> {
    let n = objs.len();
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for p in 0..n {
        for q in 0..n {
            if p != q {
                if dominates(&objs[p], &objs[q]) {
                    dominated[p].push(q);
                } else if dominates(&objs[q], &objs[p]) {
                    count[p] += 1;
                }
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&p| count[p] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated[p] {
                count[q] -= 1;
                if count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each member of `front` (indices into `objs`), in
/// front order.
pub fn crowding_distance(objs: &[Vec<BigRational>], front: &[usize]) -> Vec<Distance> {
    let n = front.len();
    if n <= 2 {
        return vec![Distance::Infinite; n];
    }
    let mut dist = vec![Distance::zero(); n];
    let m = objs[front[0]].len();
    for k in 0..m {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| objs[front[a]][k].cmp(&objs[front[b]][k]).then(front[a].cmp(&front[b])));
        let lo = &objs[front[order[0]]][k];
        let hi = &objs[front[order[n - 1]]][k];
        dist[order[0]] = Distance::Infinite;
        dist[order[n - 1]] = Distance::Infinite;
        let range = hi - lo;
        if range.is_zero() {
            continue;
        }
        for w in 1..n - 1 {
            if let Distance::Finite(d) = &mut dist[order[w]] {
                let gap = &objs[front[order[w + 1]]][k] - &objs[front[order[w - 1]]][k];
                *d += gap / &range;
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn v(xs: &[i64]) -> Vec<BigRational> {
        xs.iter().map(|x| r(*x)).collect()
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&v(&[1, 3]), &v(&[2, 3])));
        assert!(!dominates(&v(&[1, 5]), &v(&[2, 3])));
        assert!(!dominates(&v(&[2, 3]), &v(&[1, 5])));
        assert!(!dominates(&v(&[2, 3]), &v(&[2, 3])));
    }

    #[test]
    fn identical_vectors_form_one_front() {
        let objs = vec![v(&[1, 1]); 5];
        assert_eq!(fast_nondominated_sort(&objs), vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn chain_gives_singletons() {
        let objs: Vec<_> = (0..4).rev().map(|i| v(&[i, i])).collect();
        assert_eq!(fast_nondominated_sort(&objs), vec![vec![3], vec![2], vec![1], vec![0]]);
    }

    #[test]
    fn small_fronts_are_infinite() {
        let objs = vec![v(&[0, 1]), v(&[1, 0])];
        assert_eq!(crowding_distance(&objs, &[0]), [Distance::Infinite]);
        assert_eq!(crowding_distance(&objs, &[0, 1]), [Distance::Infinite, Distance::Infinite]);
    }

    #[test]
    fn equal_objectives_have_zero_interior() {
        let objs = vec![v(&[2, 2]); 4];
        let d = crowding_distance(&objs, &[0, 1, 2, 3]);
        assert_eq!(d.iter().filter(|x| **x == Distance::Infinite).count(), 2);
        assert_eq!(d.iter().filter(|x| **x == Distance::zero()).count(), 2);
    }
}
