use crate::landau_de_gennes::MaterialParams;
use crate::spectral::{SpectralGrid, Spectrum, SymTraceless, Vector3};

use super::identities::divergence_q;
use super::VerificationError;

/// `A = ‖∇u‖² + L1‖ΔQ‖² + (L2+L3)‖∇ div Q‖²` and `Ã = A + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostic {
    pub a: f64,
    pub a_tilde: f64,
}

impl Diagnostic {
    fn new(a: f64) -> Self {
        Self {
            a,
            a_tilde: a + 1.0,
        }
    }
}

/// The higher-order quantity controlled under large viscosity, from spectral
/// sums.
pub fn higher_order_diagnostic(
    grid: &SpectralGrid<f64>,
    u: &Spectrum<f64, Vector3>,
    q: &Spectrum<f64, SymTraceless>,
    p: &MaterialParams<f64>,
) -> Diagnostic {
    let div = divergence_q(grid, q);
    Diagnostic::new(
        grid.grad_norm_sq(u) + p.l1 * grid.lap_norm_sq(q) + p.l23() * grid.grad_norm_sq(&div),
    )
}

/// Same quantity by quadrature of the derivative fields on the grid points.
pub fn higher_order_diagnostic_physical(
    grid: &SpectralGrid<f64>,
    u: &Spectrum<f64, Vector3>,
    q: &Spectrum<f64, SymTraceless>,
    p: &MaterialParams<f64>,
) -> Result<Diagnostic, VerificationError> {
    let mut grad_u = 0.0;
    let mut grad_div = 0.0;
    let div = divergence_q(grid, q);
    for axis in 0..3 {
        let du = grid.to_physical(&grid.derivative(u, axis))?;
        grad_u += grid.inner_physical(&du, &du);
        let dd = grid.to_physical(&grid.derivative(&div, axis))?;
        grad_div += grid.inner_physical(&dd, &dd);
    }
    let lap = grid.to_physical(&grid.laplacian(q))?;
    let lap_q = grid.inner_physical(&lap, &lap);
    Ok(Diagnostic::new(grad_u + p.l1 * lap_q + p.l23() * grad_div))
}
