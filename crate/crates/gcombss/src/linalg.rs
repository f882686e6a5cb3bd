//! Dense Cholesky and matrix-free conjugate gradient kernels.
//!
//! Both are deliberately dependency-free: every system solved in this crate
//! is symmetric positive definite and at most a few hundred unknowns, so a
//! blocked LAPACK backend would buy nothing over cache-friendly slice loops.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// In-place lower Cholesky factorization (the strict upper triangle is left
/// untouched).
///
/// `rel_pivot_tol` is relative to the largest diagonal entry of the input:
/// pass a positive value (e.g. `1e-12`) to detect rank deficiency, or `0.0`
/// to fail only on numerically non-positive pivots.
pub(crate) fn cholesky_factor(a: &mut Array2<f64>, rel_pivot_tol: f64) -> Result<()> {
    let p = a.nrows();
    if a.ncols() != p {
        return Err(Error::Dimension(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let buf = a
        .as_slice_mut()
        .expect("factorization buffer must be contiguous");
    let mut diag_max = 0.0f64;
    for i in 0..p {
        diag_max = diag_max.max(buf[i * p + i].abs());
    }
    let floor = rel_pivot_tol * diag_max.max(f64::MIN_POSITIVE);
    let mut col = vec![0.0; p];
    for j in 0..p {
        col[..j].copy_from_slice(&buf[j * p..j * p + j]);
        let djj = buf[j * p + j] - dot(&col[..j], &col[..j]);
        if !djj.is_finite() || djj <= floor {
            return Err(Error::Singular(format!(
                "non-positive pivot {djj:.3e} at column {j} (threshold {floor:.3e})"
            )));
        }
        let d = djj.sqrt();
        buf[j * p + j] = d;
        for i in (j + 1)..p {
            let row = &mut buf[i * p..(i + 1) * p];
            let (prefix, rest) = row.split_at_mut(j);
            rest[0] = (rest[0] - dot(prefix, &col[..j])) / d;
        }
    }
    Ok(())
}

/// Solves `L L^T x = b` in place given the factor from [`cholesky_factor`].
pub(crate) fn cholesky_solve_in_place(l: &Array2<f64>, b: &mut Array1<f64>) {
    let p = l.nrows();
    debug_assert_eq!(b.len(), p);
    let lb = l.as_slice().expect("factor must be contiguous");
    let x = b.as_slice_mut().expect("rhs must be contiguous");
    // forward: L z = b
    for i in 0..p {
        let row = &lb[i * p..i * p + i];
        let s = dot(row, &x[..i]);
        x[i] = (x[i] - s) / lb[i * p + i];
    }
    // backward: L^T x = z, column oriented so row prefixes stay contiguous
    for i in (0..p).rev() {
        x[i] /= lb[i * p + i];
        let xi = x[i];
        let row = &lb[i * p..i * p + i];
        for (k, lik) in row.iter().enumerate() {
            x[k] -= lik * xi;
        }
    }
}

/// Outcome of a conjugate gradient run.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CgReport {
    pub iterations: usize,
    pub rel_residual: f64,
    pub converged: bool,
}

/// Conjugate gradient for a symmetric positive definite operator.
///
/// `apply(v, out)` must write `A v` into `out`. `x` is used as the initial
/// guess and receives the solution. Convergence is declared when
/// `||b - A x|| <= rel_tol * ||b||`.
pub(crate) fn conjugate_gradient<F>(
    mut apply: F,
    b: &Array1<f64>,
    x: &mut Array1<f64>,
    rel_tol: f64,
    max_iter: usize,
) -> CgReport
where
    F: FnMut(&Array1<f64>, &mut Array1<f64>),
{
    let b_norm = b.dot(b).sqrt();
    if b_norm == 0.0 {
        x.fill(0.0);
        return CgReport {
            iterations: 0,
            rel_residual: 0.0,
            converged: true,
        };
    }
    let mut ax = Array1::zeros(b.len());
    apply(x, &mut ax);
    let mut r = b - &ax;
    let mut rs_old = r.dot(&r);
    if rs_old.sqrt() <= rel_tol * b_norm {
        return CgReport {
            iterations: 0,
            rel_residual: rs_old.sqrt() / b_norm,
            converged: true,
        };
    }
    let mut p = r.clone();
    let mut ap = ax; // reuse buffer
    for iter in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = p.dot(&ap);
        if pap <= 0.0 || !pap.is_finite() {
            // loss of positive definiteness in finite precision; report as-is
            return CgReport {
                iterations: iter,
                rel_residual: rs_old.sqrt() / b_norm,
                converged: false,
            };
        }
        let alpha = rs_old / pap;
        x.scaled_add(alpha, &p);
        r.scaled_add(-alpha, &ap);
        let rs_new = r.dot(&r);
        if rs_new.sqrt() <= rel_tol * b_norm {
            return CgReport {
                iterations: iter,
                rel_residual: rs_new.sqrt() / b_norm,
                converged: true,
            };
        }
        let beta = rs_new / rs_old;
        p.zip_mut_with(&r, |pi, &ri| *pi = ri + beta * *pi);
        rs_old = rs_new;
    }
    CgReport {
        iterations: max_iter,
        rel_residual: rs_old.sqrt() / b_norm,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_spd(p: usize, rng: &mut ChaCha20Rng) -> Array2<f64> {
        let m = Array2::from_shape_fn((p, p), |_| rng.random_range(-1.0..1.0));
        let mut a = m.t().dot(&m);
        for i in 0..p {
            a[[i, i]] += p as f64;
        }
        a
    }

    #[test]
    fn cholesky_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for p in [1usize, 2, 5, 17] {
            let a = random_spd(p, &mut rng);
            let x_true = Array1::from_shape_fn(p, |_| rng.random_range(-2.0..2.0));
            let b = a.dot(&x_true);
            let mut f = a.clone();
            cholesky_factor(&mut f, 1e-12).unwrap();
            let mut x = b.clone();
            cholesky_solve_in_place(&f, &mut x);
            for i in 0..p {
                assert_abs_diff_eq!(x[i], x_true[i], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn cholesky_detects_rank_deficiency() {
        // second row duplicates the first
        let mut a = array![[2.0, 2.0, 1.0], [2.0, 2.0, 1.0], [1.0, 1.0, 3.0]];
        let err = cholesky_factor(&mut a, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Singular(_)));
    }

    #[test]
    fn cg_matches_direct_solve() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let p = 24;
        let a = random_spd(p, &mut rng);
        let x_true = Array1::from_shape_fn(p, |_| rng.random_range(-2.0..2.0));
        let b = a.dot(&x_true);
        let mut x = Array1::zeros(p);
        let report = conjugate_gradient(
            |v, out| out.assign(&a.dot(v)),
            &b,
            &mut x,
            1e-10,
            10 * p,
        );
        assert!(report.converged);
        for i in 0..p {
            assert_abs_diff_eq!(x[i], x_true[i], epsilon = 1e-7);
        }
    }

    #[test]
    fn cg_zero_rhs_returns_zero() {
        let b = Array1::zeros(4);
        let mut x = Array1::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let report = conjugate_gradient(|v, out| out.assign(v), &b, &mut x, 1e-8, 10);
        assert!(report.converged);
        assert_eq!(report.iterations, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }
}
