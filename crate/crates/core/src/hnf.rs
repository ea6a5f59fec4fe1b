//! Integer Hermite normal form for sublattices of ℤᵈ.
//!
//! Lattices are given by generating row vectors. The normal form is upper
//! triangular with positive pivots, and every entry above a pivot lies in
//! `[0, pivot)`; it is unique for a given lattice.

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Nonzero rows of the Hermite normal form of the lattice spanned by `rows`.
pub fn hermite_normal_form(rows: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = rows
        .iter()
        .filter(|r| r.iter().any(|&x| x != 0))
        .cloned()
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..dim {
        if pivot_row >= m.len() {
            break;
        }
        for r in pivot_row + 1..m.len() {
            if m[r][col] == 0 {
                continue;
            }
            let (a, b) = (m[pivot_row][col], m[r][col]);
            let (g, x, y) = ext_gcd(a, b);
            let (u, v) = (a / g, b / g);
            for c in col..dim {
                let (p, q) = (m[pivot_row][c], m[r][c]);
                m[pivot_row][c] = x * p + y * q;
                m[r][c] = -v * p + u * q;
            }
        }
        if m[pivot_row][col] == 0 {
            continue;
        }
        if m[pivot_row][col] < 0 {
            for x in m[pivot_row].iter_mut() {
                *x = -*x;
            }
        }
        let h = m[pivot_row][col];
        for r in 0..pivot_row {
            let q = m[r][col].div_euclid(h);
            if q != 0 {
                for c in col..dim {
                    m[r][c] -= q * m[pivot_row][c];
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    m
}

/// Write `tau = Σ kᵢ·basisᵢ + c` with `0 ≤ cᵢ < basisᵢᵢ`, for a full-rank
/// basis in Hermite normal form. Returns `(k, c)`.
pub fn reduce(basis: &[Vec<i64>], tau: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let d = tau.len();
    let mut c = tau.to_vec();
    let mut k = vec![0; d];
    for i in 0..d {
        let q = c[i].div_euclid(basis[i][i]);
        k[i] = q;
        if q != 0 {
            for j in i..d {
                c[j] -= q * basis[i][j];
            }
        }
    }
    (k, c)
}

/// Product of the diagonal, the index of the lattice in ℤᵈ.
pub fn index(basis: &[Vec<i64>]) -> u64 {
    basis.iter().enumerate().map(|(i, r)| r[i] as u64).product()
}

/// Lattice points of the fundamental parallelepiped, in lexicographic order.
pub fn coset_representatives(basis: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let d = basis.len();
    let mut out = vec![Vec::with_capacity(d)];
    for i in 0..d {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                (0..basis[i][i]).map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkerboard() {
        let h = hermite_normal_form(&[vec![1, 1], vec![1, -1]], 2);
        assert_eq!(h, vec![vec![1, 1], vec![0, 2]]);
        assert_eq!(index(&h), 2);
        assert_eq!(coset_representatives(&h), vec![vec![0, 0], vec![0, 1]]);
    }

    #[test]
    fn reduce_recovers_vector() {
        let h = hermite_normal_form(&[vec![3, 0], vec![1, 1]], 2);
        assert_eq!(h, vec![vec![1, 1], vec![0, 3]]);
        for tau in [[5, -7], [-2, 0], [0, 0], [4, 4]] {
            let (k, c) = reduce(&h, &tau);
            assert!((0..2).all(|i| (0..h[i][i]).contains(&c[i])));
            let back: Vec<i64> = (0..2)
                .map(|j| k[0] * h[0][j] + k[1] * h[1][j] + c[j])
                .collect();
            assert_eq!(back, tau.to_vec());
        }
    }

    #[test]
    fn rank_deficient() {
        let h = hermite_normal_form(&[vec![2, 4], vec![-1, -2], vec![0, 0]], 2);
        assert_eq!(h, vec![vec![1, 2]]);
    }

    #[test]
    fn redundant_generators() {
        let h = hermite_normal_form(&[vec![6, 0], vec![0, 4], vec![3, 2], vec![9, 6]], 2);
        assert_eq!(h, vec![vec![3, 2], vec![0, 4]]);
    }
}
