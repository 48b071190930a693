//! Exact integer and rational linear algebra: Smith normal form for the
//! unimodularity checks and Gaussian elimination for barycentric solves.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Invariant factors of an integer matrix (the diagonal of its Smith normal
/// form), as positive integers. The length of the result is the rank.
#[allow(clippy::needless_range_loop)]
pub fn smith_normal_form(mut m: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut t = 0;
    'pivot: while t < rows.min(cols) {
        // minimal-magnitude nonzero entry of the trailing block becomes the pivot
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if m[i][j].is_zero() {
                    continue;
                }
                if pivot.is_none_or(|(pi, pj)| m[i][j].abs() < m[pi][pj].abs()) {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        // clear the pivot column; a nonzero remainder is smaller than the
        // pivot, so restart pivot selection
        for i in t + 1..rows {
            if m[i][t].is_zero() {
                continue;
            }
            let q = &m[i][t] / &m[t][t];
            if !q.is_zero() {
                for j in t..cols {
                    let s = &q * &m[t][j];
                    m[i][j] -= s;
                }
            }
            if !m[i][t].is_zero() {
                continue 'pivot;
            }
        }
        // clear the pivot row
        for j in t + 1..cols {
            if m[t][j].is_zero() {
                continue;
            }
            let q = &m[t][j] / &m[t][t];
            if !q.is_zero() {
                for i in t..rows {
                    let s = &q * &m[i][t];
                    m[i][j] -= s;
                }
            }
            if !m[t][j].is_zero() {
                continue 'pivot;
            }
        }
        // the pivot must divide every remaining entry; fold an offending row
        // into the pivot row and redo
        for i in t + 1..rows {
            for j in t + 1..cols {
                if !(&m[i][j] % &m[t][t]).is_zero() {
                    let addend = m[i].clone();
                    for (dst, src) in m[t].iter_mut().zip(addend) {
                        *dst += src;
                    }
                    continue 'pivot;
                }
            }
        }
        t += 1;
    }
    (0..t).map(|k| m[k][k].abs()).collect()
}

/// Solve `A x = b` exactly over the rationals, requiring a unique solution.
///
/// Returns `None` when the system is inconsistent or underdetermined.
#[allow(clippy::needless_range_loop)]
pub fn solve_exact(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    assert_eq!(rows, b.len(), "matrix and right-hand side must agree");
    let mut aug: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_rows: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&r| !aug[r][col].is_zero()) else {
            continue;
        };
        aug.swap(row, p);
        let pivot = aug[row][col].clone();
        for entry in aug[row].iter_mut() {
            *entry /= &pivot;
        }
        for r in 0..rows {
            if r != row && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                for c in col..=cols {
                    let s = &factor * &aug[row][c];
                    aug[r][c] -= s;
                }
            }
        }
        pivot_rows.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    // inconsistent: a zero row with nonzero right-hand side
    for r in row..rows {
        if !aug[r][cols].is_zero() {
            return None;
        }
    }
    // underdetermined: fewer pivots than unknowns
    if pivot_rows.len() != cols {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (r, &col) in pivot_rows.iter().enumerate() {
        x[col] = aug[r][cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_matrix(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    fn factors(rows: &[&[i64]]) -> Vec<i64> {
        smith_normal_form(int_matrix(rows))
            .iter()
            .map(|f| i64::try_from(f).unwrap())
            .collect()
    }

    #[test]
    fn snf_basics() {
        assert_eq!(factors(&[&[1, 0], &[0, 1]]), vec![1, 1]);
        assert_eq!(factors(&[&[0, 1], &[1, 0]]), vec![1, 1]);
        assert_eq!(factors(&[&[2, 0], &[0, 4]]), vec![2, 4]);
        assert_eq!(factors(&[&[2, 1], &[1, 2]]), vec![1, 3]);
        // rank-deficient
        assert_eq!(factors(&[&[1, 2], &[2, 4]]), vec![1]);
        assert_eq!(factors(&[&[0, 0], &[0, 0]]), Vec::<i64>::new());
    }

    #[test]
    fn snf_divisibility_chain() {
        // gcd of entries is 2, gcd of 2x2 minors is 4, determinant is 624
        let f = factors(&[&[2, 4, 4], &[-6, 6, 12], &[10, 4, 16]]);
        assert_eq!(f, vec![2, 2, 156]);
    }

    #[test]
    fn snf_wide_unimodular_lattice() {
        // rows span a direct summand of Z^3
        assert_eq!(factors(&[&[1, 0, 0], &[0, 1, 1]]), vec![1, 1]);
        // index-2 sublattice
        assert_eq!(factors(&[&[2, 0, 0], &[0, 1, 0]]), vec![1, 2]);
    }

    fn rat(x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    #[test]
    fn solve_unique_system() {
        let a = vec![vec![rat(2), rat(1)], vec![rat(1), rat(-1)]];
        let b = vec![rat(5), rat(-2)];
        let x = solve_exact(&a, &b).unwrap();
        assert_eq!(x, vec![rat(1), rat(3)]);
    }

    #[test]
    fn solve_overdetermined_consistent() {
        let a = vec![vec![rat(1)], vec![rat(2)], vec![rat(3)]];
        let b = vec![rat(4), rat(8), rat(12)];
        assert_eq!(solve_exact(&a, &b).unwrap(), vec![rat(4)]);
    }

    #[test]
    fn solve_rejects_inconsistent_and_underdetermined() {
        let a = vec![vec![rat(1)], vec![rat(1)]];
        assert_eq!(solve_exact(&a, &[rat(1), rat(2)]), None);
        let a = vec![vec![rat(1), rat(1)]];
        assert_eq!(solve_exact(&a, &[rat(2)]), None);
    }
}
