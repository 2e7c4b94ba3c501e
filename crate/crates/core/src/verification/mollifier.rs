use crate::spectral::{
    random_band_limited, RandomSpec, Scalar, ScalarField, SpectralGrid, Spectrum,
};

use super::{IdentityReport, VerificationError};

/// Checks that `J_n` is idempotent, self-adjoint in `L²` and commutes with
/// `∂₁`, on random band-limited scalar fields.
///
/// Three reports per `n`, named `idempotence(n)`, `self_adjoint(n)` and
/// `commutes_d1(n)`. Inner products are taken by physical quadrature so the
/// check does not reduce to a statement about the multiplier alone.
pub fn mollifier_suite(
    grid: &SpectralGrid<f64>,
    n_list: &[usize],
    seed: u64,
) -> Result<Vec<IdentityReport>, VerificationError> {
    let spec = RandomSpec::new(1.0, seed);
    let f: Spectrum<f64, Scalar> = random_band_limited(grid, &spec)?;
    let g: Spectrum<f64, Scalar> = random_band_limited(
        grid,
        &RandomSpec {
            seed: seed ^ 0x9e37_79b9_7f4a_7c15,
            ..spec
        },
    )?;
    let f_phys = grid.to_physical(&f)?;
    let g_phys = grid.to_physical(&g)?;
    let norm = |x: &ScalarField<f64>| grid.inner_physical(x, x).sqrt();
    let mut out = Vec::with_capacity(3 * n_list.len());
    for &n in n_list {
        let jf = grid.mollify(&f, n)?;
        let jjf = grid.mollify(&jf, n)?;
        let diff = jjf.sub(&jf).max_abs();
        out.push(IdentityReport::new(
            format!("idempotence({n})"),
            diff,
            jf.max_abs(),
        ));

        let jf_phys = grid.to_physical(&jf)?;
        let jg_phys = grid.to_physical(&grid.mollify(&g, n)?)?;
        let lhs = grid.inner_physical(&jf_phys, &g_phys);
        let rhs = grid.inner_physical(&f_phys, &jg_phys);
        out.push(IdentityReport::new(
            format!("self_adjoint({n})"),
            lhs - rhs,
            norm(&f_phys) * norm(&g_phys),
        ));

        let a = grid.to_physical(&grid.derivative(&jf, 0))?;
        let b = grid.to_physical(&grid.mollify(&grid.derivative(&f, 0), n)?)?;
        let grad = grid.grad_norm_sq(&f).sqrt();
        out.push(IdentityReport::new(
            format!("commutes_d1({n})"),
            norm(&a.sub(&b)),
            grad,
        ));
    }
    Ok(out)
}
