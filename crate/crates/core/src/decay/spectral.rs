use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PhysicalParams;
use crate::spatial::{generalized_eigen, Operators, SymBanded};

/// Largest grid handled by the dense eigen-solve.
pub const MAX_ELEMENTS: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    /// Sorted by decreasing real part, then by imaginary part.
    pub eigenvalues: Vec<(f64, f64)>,
    pub max_real_part: f64,
    /// Undamped modal frequency splitting the spectrum in half.
    pub resolved_cutoff: f64,
    /// Largest real part among eigenvalues with |Im λ| below the cutoff.
    ///
    /// The upper half of a cubic Hermite spectrum has no continuum
    /// counterpart; its tip slopes are small, so those modes are barely damped
    /// and they set `max_real_part` on fine grids. The average-acceleration
    /// scheme does not resolve them either, so this is the value a
    /// time-domain decay rate should be compared with.
    pub resolved_max_real_part: f64,
}

/// Spectrum of the linearised beam subsystem with damping f(s) = gain·s.
///
/// The first-order system is written in modal coordinates of the undamped
/// pencil (EI·K_b − ρϖ²M0, M) with Φ M-orthonormal and μ its eigenvalues.
/// With z = [√μ·q; q̇] it reads ż = A·z,
///
/// ```text
/// A = [ 0        diag(√μ)            ]
///     [ −diag(√μ) −EI·gain·(Φᵀb)(Φᵀb)ᵀ ]
/// ```
///
/// which is similar to the physical first-order operator and is exactly
/// skew-symmetric when the gain vanishes.
pub fn spectral_abscissa(ops: &Operators, params: &PhysicalParams, gain: f64) -> Result<Spectrum> {
    let ne = ops.grid.n_elements();
    if ne > MAX_ELEMENTS {
        return Err(Error::Config(format!(
            "spectral oracle is limited to n_elements <= {MAX_ELEMENTS}, got {ne}"
        )));
    }
    if !(gain.is_finite() && gain >= 0.0) {
        return Err(Error::Config(format!("linear gain must be >= 0, got {gain}")));
    }
    let stiff = SymBanded::combine(&[
        (params.ei, &ops.bending),
        (-params.rho * params.varpi * params.varpi, &ops.l2_mass),
    ]);
    let (mu, phi) = generalized_eigen(&stiff.to_dense(), &ops.mass.to_dense(), true)?;
    let phi = phi.expect("eigenvectors requested");
    if mu[0] <= 0.0 {
        return Err(Error::Numerical(format!(
            "stiffness pencil is not positive (lowest eigenvalue {:e})",
            mu[0]
        )));
    }
    let n = mu.len();
    let c = phi.row(ops.tip_slope.index).transpose();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        let d = mu[i].sqrt();
        a[(i, n + i)] = d;
        a[(n + i, i)] = -d;
        for j in 0..n {
            a[(n + i, n + j)] = -params.ei * gain * c[i] * c[j];
        }
    }
    let schur = nalgebra::linalg::Schur::try_new(a, 1e-15, 100_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let ev: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    let mut eigenvalues: Vec<(f64, f64)> = ev.iter().map(|z| (z.re, z.im)).collect();
    eigenvalues.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.total_cmp(&y.1)));
    let max_real_part = eigenvalues[0].0;
    let resolved_cutoff = mu[n / 2].sqrt();
    let resolved_max_real_part = eigenvalues
        .iter()
        .filter(|e| e.1.abs() < resolved_cutoff)
        .map(|e| e.0)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Spectrum {
        eigenvalues,
        max_real_part,
        resolved_cutoff,
        resolved_max_real_part,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{assemble, Grid};

    #[test]
    fn conservative_spectrum_is_imaginary() {
        let p = PhysicalParams::unit(0.0);
        let ops = assemble(&p, &Grid::new(8).unwrap()).unwrap();
        let s = spectral_abscissa(&ops, &p, 0.0).unwrap();
        assert_eq!(s.eigenvalues.len(), 32);
        assert!(s.max_real_part.abs() < 1e-8);
        // conjugate pairing and the first clamped-free frequency
        let beta4 = 1.875_104_068_711_961f64.powi(4);
        let lowest = s.eigenvalues.iter().map(|e| e.1.abs()).fold(f64::INFINITY, f64::min);
        assert!((lowest * lowest - beta4).abs() < 1e-3 * beta4);
        let sum_im: f64 = s.eigenvalues.iter().map(|e| e.1).sum();
        assert!(sum_im.abs() < 1e-6);
    }

    #[test]
    fn damping_moves_spectrum_left() {
        let p = PhysicalParams::unit(0.0);
        let ops = assemble(&p, &Grid::new(16).unwrap()).unwrap();
        let s = spectral_abscissa(&ops, &p, 0.5).unwrap();
        assert!(s.max_real_part < 0.0);
        assert!(s.resolved_max_real_part < s.max_real_part);
        // the lowest mode is the slowest resolved one and is well damped
        assert!(s.resolved_max_real_part < -1.0);
    }

    #[test]
    fn too_large_grid_rejected() {
        let p = PhysicalParams::unit(0.0);
        let ops = assemble(&p, &Grid::new(65).unwrap()).unwrap();
        assert!(matches!(spectral_abscissa(&ops, &p, 0.5), Err(Error::Config(_))));
    }
}
