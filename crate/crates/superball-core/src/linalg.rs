//! Small dense linear algebra helpers: 3×3 primitives and an LU solver for
//! the Newton systems (at most 16 unknowns).

use alloc::vec;
use alloc::vec::Vec;

pub(crate) type Mat3 = [[f64; 3]; 3];

pub(crate) fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Cofactor matrix C with C[i][k] = ∂ det(B) / ∂ B[i][k].
#[allow(clippy::needless_range_loop)]
pub(crate) fn cofactor3(m: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
            let (k1, k2) = ((k + 1) % 3, (k + 2) % 3);
            c[i][k] = m[i1][k1] * m[i2][k2] - m[i1][k2] * m[i2][k1];
        }
    }
    c
}

/// ∂ C[i][k] / ∂ B[l][m] for the 3×3 cofactor matrix: ε_{ilr} ε_{kms} B[r][s],
/// zero when i = l or k = m.
pub(crate) fn dcofactor3(b: &Mat3, i: usize, k: usize, l: usize, m: usize) -> f64 {
    if i == l || k == m {
        return 0.0;
    }
    let r = 3 - i - l;
    let s = 3 - k - m;
    let sign = |a: usize, b: usize| -> f64 {
        // parity of the cycle (a, b, remaining)
        if (b + 3 - a) % 3 == 1 {
            1.0
        } else {
            -1.0
        }
    };
    sign(i, l) * sign(k, m) * b[r][s]
}

pub(crate) fn mat_vec3(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    }
    out
}

pub(crate) fn inverse3(m: &Mat3) -> Option<Mat3> {
    let d = det3(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let c = cofactor3(m);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[i][j] = c[j][i] / d;
        }
    }
    Some(inv)
}

/// Max row sum of absolute values (the ℓ∞ operator norm).
pub(crate) fn linf_norm3(m: &Mat3) -> f64 {
    let mut best = 0.0f64;
    for row in m {
        let s = row[0].abs() + row[1].abs() + row[2].abs();
        best = best.max(s);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Singular;

/// Solves `a x = b` in place by LU with partial pivoting. `a` is `n × n`
/// row-major and is destroyed; the solution overwrites `b`.
pub(crate) fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<(), Singular> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        // only exact zero (or non-finite) pivots are fatal: near-singular
        // systems arise legitimately (the p = 2 stationarity system is
        // rank-deficient along rotations) and the Newton line search copes
        // with the resulting large steps
        if best == 0.0 || !best.is_finite() {
            return Err(Singular);
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for j in col + 1..n {
                a[row * n + j] -= f * a[col * n + j];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for j in col + 1..n {
            s -= a[col * n + j] * b[j];
        }
        b[col] = s / a[col * n + col];
    }
    Ok(())
}

/// Least-squares solution of `a x ≈ rhs` (a is `rows × cols`, row-major,
/// rows ≥ cols) via the normal equations. Returns `None` when the normal
/// matrix is numerically singular.
pub(crate) fn lstsq(a: &[f64], rhs: &[f64], rows: usize, cols: usize) -> Option<Vec<f64>> {
    let mut ata = vec![0.0; cols * cols];
    let mut atb = vec![0.0; cols];
    for i in 0..cols {
        for j in 0..cols {
            let mut s = 0.0;
            for r in 0..rows {
                s += a[r * cols + i] * a[r * cols + j];
            }
            ata[i * cols + j] = s;
        }
        let mut s = 0.0;
        for r in 0..rows {
            s += a[r * cols + i] * rhs[r];
        }
        atb[i] = s;
    }
    solve_dense(&mut ata, &mut atb, cols).ok()?;
    Some(atb)
}
