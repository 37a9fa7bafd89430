//! Dense complex Gaussian elimination with partial pivoting.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solves `a x = b` for a square system stored row-major.
///
/// One step of iterative refinement follows the elimination.
pub fn solve<const N: usize>(a: &[[Complex64; N]; N], b: &[Complex64; N]) -> Result<[Complex64; N]> {
    let (lu, perm, condition) = factor(a)?;
    let mut x = substitute(&lu, &perm, b);
    let r = residual(a, &x, b);
    let dx = substitute(&lu, &perm, &r);
    for (xi, di) in x.iter_mut().zip(dx) {
        *xi += di;
    }
    if x.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::SingularMatrix { condition });
    }
    Ok(x)
}

/// b − a x.
pub fn residual<const N: usize>(a: &[[Complex64; N]; N], x: &[Complex64; N], b: &[Complex64; N]) -> [Complex64; N] {
    let mut r = *b;
    for (ri, row) in r.iter_mut().zip(a) {
        for (aij, xj) in row.iter().zip(x) {
            *ri -= aij * xj;
        }
    }
    r
}

pub fn norm<const N: usize>(v: &[Complex64; N]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

type Factored<const N: usize> = ([[Complex64; N]; N], [usize; N], f64);

fn factor<const N: usize>(a: &[[Complex64; N]; N]) -> Result<Factored<N>> {
    let mut lu = *a;
    let mut perm = [0usize; N];
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i;
    }
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::SingularMatrix { condition: f64::INFINITY });
    }
    let mut largest_pivot: f64 = 0.0;
    let mut smallest_pivot = f64::INFINITY;

    for k in 0..N {
        let (pivot_row, pivot_mag) = (k..N)
            .map(|i| (i, lu[i][k].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_mag <= f64::EPSILON * scale * 1e-6 {
            return Err(Error::SingularMatrix {
                condition: largest_pivot.max(scale) / pivot_mag.max(f64::MIN_POSITIVE),
            });
        }
        largest_pivot = largest_pivot.max(pivot_mag);
        smallest_pivot = smallest_pivot.min(pivot_mag);
        lu.swap(k, pivot_row);
        perm.swap(k, pivot_row);

        let pivot = lu[k][k];
        for i in k + 1..N {
            let factor = lu[i][k] / pivot;
            lu[i][k] = factor;
            for j in k + 1..N {
                let t = lu[k][j];
                lu[i][j] -= factor * t;
            }
        }
    }
    Ok((lu, perm, largest_pivot / smallest_pivot))
}

fn substitute<const N: usize>(lu: &[[Complex64; N]; N], perm: &[usize; N], b: &[Complex64; N]) -> [Complex64; N] {
    let mut y = [Complex64::new(0.0, 0.0); N];
    for i in 0..N {
        let mut acc = b[perm[i]];
        for j in 0..i {
            acc -= lu[i][j] * y[j];
        }
        y[i] = acc;
    }
    let mut x = [Complex64::new(0.0, 0.0); N];
    for i in (0..N).rev() {
        let mut acc = y[i];
        for j in i + 1..N {
            acc -= lu[i][j] * x[j];
        }
        x[i] = acc / lu[i][i];
    }
    x
}
