//! Exact rational linear algebra: Gaussian elimination with full pivoting
//! on row order, used by the exact-equilibrium extraction and by the
//! brute-force quadratic reference solver.

use num_traits::Zero;

use crate::error::Error;
use crate::rat::Rat;
use crate::Result;

/// Solves A x = b exactly. A is given row-major and must be square and
/// nonsingular; rank deficiency is reported, never perturbed around.
pub fn solve_linear_system(a: &[Vec<Rat>], b: &[Rat]) -> Result<Vec<Rat>> {
    let n = a.len();
    if n == 0 {
        return Ok(vec![]);
    }
    if a.iter().any(|row| row.len() != n) || b.len() != n {
        return Err(Error::Internal("solve_linear_system: shape mismatch".into()));
    }
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !m[r][col].is_zero());
        let Some(pivot_row) = pivot_row else {
            return Err(Error::RankDeficient(format!(
                "no pivot in column {col} of a {n}x{n} system"
            )));
        };
        m.swap(col, pivot_row);
        let pivot = m[col][col].clone();
        for item in m[col].iter_mut().skip(col) {
            *item = &*item / &pivot;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..=n {
                    let delta = &factor * &m[col][c];
                    m[r][c] = &m[r][c] - &delta;
                }
            }
        }
    }
    Ok(m.into_iter().map(|row| row[n].clone()).collect())
}

/// Rank of a rational matrix, by elimination.
pub fn rank(a: &[Vec<Rat>]) -> usize {
    if a.is_empty() {
        return 0;
    }
    let cols = a[0].len();
    let mut m: Vec<Vec<Rat>> = a.to_vec();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pr) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let pivot = m[rank][col].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let factor = &m[r][col] / &pivot;
                for c in col..cols {
                    let delta = &factor * &m[rank][c];
                    m[r][c] = &m[r][c] - &delta;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{ri, rq};

    #[test]
    fn solves_small_system() {
        // 2x + y = 5, x - y = 1  =>  x = 2, y = 1
        let a = vec![vec![ri(2), ri(1)], vec![ri(1), ri(-1)]];
        let x = solve_linear_system(&a, &[ri(5), ri(1)]).unwrap();
        assert_eq!(x, vec![ri(2), ri(1)]);
    }

    #[test]
    fn exact_fractions() {
        let a = vec![
            vec![rq(1, 3), rq(1, 7)],
            vec![rq(2, 5), rq(5, 11)],
        ];
        let b = [rq(1, 2), rq(3, 4)];
        let x = solve_linear_system(&a, &b).unwrap();
        for (row, rhs) in a.iter().zip(&b) {
            let lhs: Rat = row.iter().zip(&x).map(|(c, v)| c * v).sum();
            assert_eq!(lhs, *rhs);
        }
    }

    #[test]
    fn reports_rank_deficiency() {
        let a = vec![vec![ri(1), ri(2)], vec![ri(2), ri(4)]];
        assert!(matches!(
            solve_linear_system(&a, &[ri(1), ri(2)]),
            Err(Error::RankDeficient(_))
        ));
        assert_eq!(rank(&a), 1);
        assert_eq!(rank(&[vec![ri(1), ri(0)], vec![ri(0), ri(1)]]), 2);
    }
}
