//! Reference solvers and error metrics used to validate the spectral solver.
//!
//! Everything here runs in `f64` and shares no code path with the FFT
//! solver: the dense oracle factors the circulant Laplacian explicitly and
//! the Jacobi solver relaxes the stencil in the pixel domain.

use nalgebra::{DMatrix, DVector};

use crate::diffops::gradient_periodic;
use crate::error::{GfcError, Result};
use crate::field::{ScalarField, VectorField};

/// Largest grid [`dense_poisson_solve`] accepts.
pub const DENSE_PIXEL_LIMIT: usize = 4096;

/// Relaxation weight of [`jacobi_solve`]. Undamped Jacobi never converges on
/// the checkerboard mode of even-sized periodic grids.
pub const JACOBI_DAMPING: f64 = 0.8;

/// Dense matrix of the periodic 5-point Laplacian on an `h x w` grid.
pub fn circulant_laplacian(h: usize, w: usize) -> DMatrix<f64> {
    let n = h * w;
    let mut a = DMatrix::zeros(n, n);
    for r in 0..h {
        for c in 0..w {
            let p = r * w + c;
            a[(p, p)] -= 4.0;
            for (nr, nc) in [
                ((r + h - 1) % h, c),
                ((r + 1) % h, c),
                (r, (c + w - 1) % w),
                (r, (c + 1) % w),
            ] {
                a[(p, nr * w + nc)] += 1.0;
            }
        }
    }
    a
}

/// Minimum-norm least-squares solution of the periodic Poisson system,
/// returned with zero mean.
pub fn dense_poisson_solve(l: &ScalarField<f64>) -> Result<ScalarField<f64>> {
    let (h, w) = l.shape();
    let n = h * w;
    if n > DENSE_PIXEL_LIMIT {
        return Err(GfcError::SizeGuard {
            pixels: n,
            limit: DENSE_PIXEL_LIMIT,
        });
    }
    // -A is positive semi-definite with the constants as its null space;
    // adding J/n makes it definite without touching the mean-zero subspace.
    let mut system = -circulant_laplacian(h, w);
    system.add_scalar_mut(1.0 / n as f64);
    let mean = l.mean();
    let rhs = DVector::from_iterator(n, l.values().iter().map(|&v| -(v - mean)));
    let solution = system
        .cholesky()
        .expect("regularized periodic Laplacian is positive definite")
        .solve(&rhs);
    let mut out = ScalarField::new(h, w, solution.iter().copied().collect())?;
    let m = out.mean();
    out = out.add_scalar(-m);
    Ok(out)
}

/// Damped Jacobi relaxation of the periodic 5-point system from a zero
/// start, returned with zero mean.
pub fn jacobi_solve(l: &ScalarField<f64>, iterations: usize) -> ScalarField<f64> {
    let (h, w) = l.shape();
    let mut x = ScalarField::<f64>::zeros(h, w);
    let mut next = x.clone();
    for _ in 0..iterations {
        for r in 0..h {
            let (up, down) = ((r + h - 1) % h, (r + 1) % h);
            for c in 0..w {
                let (left, right) = ((c + w - 1) % w, (c + 1) % w);
                let neighbours = x[(up, c)] + x[(down, c)] + x[(r, left)] + x[(r, right)];
                let jacobi = (neighbours - l[(r, c)]) / 4.0;
                let current = x[(r, c)];
                next[(r, c)] = current + JACOBI_DAMPING * (jacobi - current);
            }
        }
        std::mem::swap(&mut x, &mut next);
    }
    let m = x.mean();
    x.add_scalar(-m)
}

/// Root mean square of `ec - ep` over both components and all pixels.
pub fn field_rmse(ec: &VectorField<f64>, ep: &VectorField<f64>) -> Result<f64> {
    if ec.shape() != ep.shape() {
        return Err(GfcError::ShapeMismatch {
            expected: ep.shape(),
            actual: ec.shape(),
        });
    }
    let sq = |a: &ScalarField<f64>, b: &ScalarField<f64>| -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum()
    };
    let total = sq(ec.ex(), ep.ex()) + sq(ec.ey(), ep.ey());
    Ok((total / (2 * ec.ex().len()) as f64).sqrt())
}

fn dot(a: &VectorField<f64>, b: &VectorField<f64>) -> f64 {
    let part = |x: &ScalarField<f64>, y: &ScalarField<f64>| -> f64 {
        x.values().iter().zip(y.values()).map(|(p, q)| p * q).sum()
    };
    part(a.ex(), b.ex()) + part(a.ey(), b.ey())
}

/// Normalized inner product `<ep - grad(ic), grad(u)> / (|ep - grad(ic)| |grad(u)|)`
/// with periodic gradients.
///
/// A residual field that vanishes relative to `ep` yields 0; a constant `u`
/// has no gradient to test against and is rejected.
pub fn orthogonality_residual(
    ep: &VectorField<f64>,
    ic: &ScalarField<f64>,
    u: &ScalarField<f64>,
) -> Result<f64> {
    if ic.shape() != ep.shape() || u.shape() != ep.shape() {
        return Err(GfcError::ShapeMismatch {
            expected: ep.shape(),
            actual: if ic.shape() != ep.shape() { ic.shape() } else { u.shape() },
        });
    }
    let grad_ic = gradient_periodic(ic);
    let residual = VectorField::new(
        ep.ex().zip_map(grad_ic.ex(), |a, b| a - b)?,
        ep.ey().zip_map(grad_ic.ey(), |a, b| a - b)?,
    )?;
    let grad_u = gradient_periodic(u);
    let u_norm = dot(&grad_u, &grad_u).sqrt();
    if u_norm == 0.0 {
        return Err(GfcError::ZeroNorm("test potential has no gradient"));
    }
    let r_norm = dot(&residual, &residual).sqrt();
    let scale = dot(ep, ep).sqrt().max(f64::MIN_POSITIVE);
    if r_norm <= 1e-12 * scale {
        return Ok(0.0);
    }
    Ok(dot(&residual, &grad_u) / (r_norm * u_norm))
}
