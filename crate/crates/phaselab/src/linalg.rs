//! Linear solvers for the implicit substeps: tridiagonal elimination in 1D and
//! matrix-free conjugate gradients for the symmetric positive definite 2D systems.

use crate::{Error, Result};

/// Solve a tridiagonal system by the Thomas algorithm.
///
/// `lower[i]` multiplies x[i−1] in row i (lower[0] ignored), `diag[i]` multiplies
/// x[i], `upper[i]` multiplies x[i+1] (upper[n−1] ignored). The matrices produced
/// by the implicit substeps are strictly diagonally dominant, so no pivoting is
/// needed; a vanishing pivot is reported as a numerical failure.
pub fn thomas_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::domain(format!(
            "tridiagonal bands must share one length, got {}, {}, {}, {}",
            lower.len(),
            n,
            upper.len(),
            rhs.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() < f64::MIN_POSITIVE {
        return Err(Error::numerics("tridiagonal solve hit a zero pivot in row 0"));
    }
    c_prime[0] = upper[0] / pivot;
    d_prime[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c_prime[i - 1];
        if pivot.abs() < f64::MIN_POSITIVE {
            return Err(Error::numerics(format!(
                "tridiagonal solve hit a zero pivot in row {i}"
            )));
        }
        c_prime[i] = upper[i] / pivot;
        d_prime[i] = (rhs[i] - lower[i] * d_prime[i - 1]) / pivot;
    }
    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c_prime[i] * next;
    }
    Ok(x)
}

/// Solve A x = b for a symmetric positive definite operator given matrix-free.
///
/// Iterates from `x0` until ‖b − A x‖ ≤ `tol_rel`·‖b‖ (absolute tolerance
/// `tol_rel` when b = 0), or fails after `max_iter` iterations. Returns the
/// solution and the iteration count.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x0: &[f64],
    tol_rel: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    if x0.len() != n {
        return Err(Error::domain(format!(
            "initial guess length {} does not match rhs length {}",
            x0.len(),
            n
        )));
    }
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let target = if b_norm > 0.0 { tol_rel * b_norm } else { tol_rel };

    let mut x = x0.to_vec();
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
    let mut rs_old = r.iter().map(|v| v * v).sum::<f64>();
    if rs_old.sqrt() <= target {
        return Ok((x, 0));
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    for iter in 1..=max_iter {
        apply(&p, &mut ap);
        let p_ap = p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        if !(p_ap > 0.0) {
            return Err(Error::numerics(format!(
                "conjugate gradient lost positive definiteness (pᵀAp = {p_ap} at iteration {iter})"
            )));
        }
        let alpha = rs_old / p_ap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new = r.iter().map(|v| v * v).sum::<f64>();
        if rs_new.sqrt() <= target {
            return Ok((x, iter));
        }
        let beta = rs_new / rs_old;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs_old = rs_new;
    }
    Err(Error::numerics(format!(
        "conjugate gradient failed to converge within {max_iter} iterations \
         (residual {:.3e}, target {:.3e})",
        rs_old.sqrt(),
        target
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_a_hand_solved_system() {
        // [2 1 0; 1 3 1; 0 1 2] x = [3, 10, 9] has solution x = (0.5, 2, 3.5).
        let x = thomas_solve(&[0.0, 1.0, 1.0], &[2.0, 3.0, 2.0], &[1.0, 1.0, 0.0], &[3.0, 10.0, 9.0])
            .unwrap();
        for (got, want) in x.iter().zip([0.5, 2.0, 3.5]) {
            assert!((got - want).abs() < 1e-14, "got {got}, want {want}");
        }
    }

    #[test]
    fn thomas_solves_a_discrete_poisson_problem() {
        // −u'' = π² sin(πx), u(0) = u(1) = 0, standard second-order stencil.
        let n = 200;
        let h = 1.0 / (n as f64 + 1.0);
        let lower = vec![-1.0; n];
        let diag = vec![2.0; n];
        let upper = vec![-1.0; n];
        let rhs: Vec<f64> = (1..=n)
            .map(|i| {
                let x = i as f64 * h;
                std::f64::consts::PI.powi(2) * (std::f64::consts::PI * x).sin() * h * h
            })
            .collect();
        let u = thomas_solve(&lower, &diag, &upper, &rhs).unwrap();
        let mut max_err = 0.0f64;
        for (i, ui) in u.iter().enumerate() {
            let x = (i + 1) as f64 * h;
            max_err = max_err.max((ui - (std::f64::consts::PI * x).sin()).abs());
        }
        assert!(max_err < 1e-4, "max error {max_err} too large for n = {n}");
    }

    #[test]
    fn thomas_rejects_mismatched_bands() {
        assert!(thomas_solve(&[0.0], &[1.0, 1.0], &[0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn conjugate_gradient_solves_spd_system() {
        // A = diag(1..n) is SPD; solution of A x = 1 is x_i = 1/(i+1).
        let n = 50;
        let apply = |v: &[f64], out: &mut [f64]| {
            for i in 0..n {
                out[i] = (i as f64 + 1.0) * v[i];
            }
        };
        let b = vec![1.0; n];
        let (x, iters) = conjugate_gradient(apply, &b, &vec![0.0; n], 1e-12, 500).unwrap();
        assert!(iters > 0);
        for (i, xi) in x.iter().enumerate() {
            let want = 1.0 / (i as f64 + 1.0);
            assert!((xi - want).abs() < 1e-10, "x[{i}] = {xi}, want {want}");
        }
    }

    #[test]
    fn conjugate_gradient_reports_nonconvergence() {
        let apply = |v: &[f64], out: &mut [f64]| out.copy_from_slice(v);
        let b = vec![1.0, 2.0];
        let err = conjugate_gradient(apply, &b, &[5.0, 5.0], 1e-14, 0).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("failed to converge"), "unexpected error: {msg}");
    }

    #[test]
    fn conjugate_gradient_detects_indefinite_operators() {
        let apply = |v: &[f64], out: &mut [f64]| {
            out[0] = -v[0];
            out[1] = -v[1];
        };
        let err = conjugate_gradient(apply, &[1.0, 1.0], &[0.0, 0.0], 1e-12, 10).unwrap_err();
        assert!(format!("{err}").contains("positive definiteness"));
    }
}
