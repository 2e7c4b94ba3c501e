use crate::landau_de_gennes::{free_energy, molecular_field_k, MaterialParams};
use crate::spectral::{random_band_limited, RandomSpec, SpectralGrid, Spectrum, SymTraceless};

use super::VerificationError;

/// Number of random directions tried by [`variational_consistency`].
pub const VARIATIONAL_DIRECTIONS: usize = 10;

/// Worst relative mismatch between `⟨−H, G⟩` and the fourth-order central
/// difference of `ε ↦ F(Q + εG)`, over random band-limited directions `G`
/// of unit root-mean-square size.
///
/// `F` is a quartic polynomial in `ε` and the stencil is exact on quartics,
/// so what remains is round-off amplified by `1/fd_step`.
pub fn variational_consistency(
    grid: &SpectralGrid<f64>,
    q: &Spectrum<f64, SymTraceless>,
    p: &MaterialParams<f64>,
    fd_step: f64,
    seed: u64,
) -> Result<f64, VerificationError> {
    if !(1e-7..=1e-3).contains(&fd_step) {
        return Err(VerificationError::InvalidStep(fd_step));
    }
    let q = grid.dealias(q);
    let h = molecular_field_k(grid, &q, p);
    let h_norm = grid.norm_sq(&h).sqrt();
    let energy = |e: f64, g: &Spectrum<f64, SymTraceless>| {
        let mut x = q.clone();
        x.axpy(e, g);
        free_energy(grid, &x, p)
    };
    let mut worst: f64 = 0.0;
    for d in 0..VARIATIONAL_DIRECTIONS as u64 {
        let spec = RandomSpec::new(
            2.0,
            seed.wrapping_add(d.wrapping_mul(0x2545_f491_4f6c_dd1d)),
        );
        let g: Spectrum<f64, SymTraceless> = random_band_limited(grid, &spec)?;
        let g_norm = grid.norm_sq(&g).sqrt();
        if g_norm == 0.0 {
            continue;
        }
        let s = fd_step;
        let fd = (-energy(2.0 * s, &g) + 8.0 * energy(s, &g) - 8.0 * energy(-s, &g)
            + energy(-2.0 * s, &g))
            / (12.0 * s);
        let exact = -grid.inner(&h, &g);
        let err = (fd - exact).abs();
        if err == 0.0 {
            continue;
        }
        // Guard against directions nearly orthogonal to H.
        let denom = exact.abs().max(1e-8 * h_norm * g_norm);
        worst = worst.max(if denom > 0.0 {
            err / denom
        } else {
            f64::INFINITY
        });
    }
    Ok(worst)
}
