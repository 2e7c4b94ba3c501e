use crate::scalar::Real;
use crate::spectral::{SpectralError, SpectralGrid, Spectrum, SymTraceless, Vector3};

use super::fields::{map_points, molecular_field_spectral, qtensor_at};
use super::linear::{contract_k, curl_contraction, expand, gather};
use super::pointwise::bulk_density;
use super::MaterialParams;

/// Energy budget of a state: the parts of the Lyapunov functional and the two
/// dissipation rates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyReport<T> {
    pub time: T,
    pub kinetic: T,
    pub elastic_l1: T,
    pub elastic_l23: T,
    pub elastic_l4_cross: T,
    pub bulk: T,
    pub total: T,
    /// `μ‖∇u‖²`
    pub dissipation_viscous: T,
    /// `Γ‖H‖²`, with `H` the molecular field restricted to the dealias mask.
    pub dissipation_rotational: T,
}

impl<T: Real> EnergyReport<T> {
    pub fn dissipation(&self) -> T {
        self.dissipation_viscous + self.dissipation_rotational
    }
}

fn check(grid_dims: [usize; 3], found: [usize; 3]) -> Result<(), SpectralError> {
    if grid_dims == found {
        Ok(())
    } else {
        Err(SpectralError::GridMismatch {
            expected: grid_dims,
            found,
        })
    }
}

/// `((L1/2)‖∇Q‖², ((L2+L3)/2)‖div Q‖², (L4/2)∫e_lαk Q_lβ Q_αβ,k)` by Parseval.
pub fn elastic_energies<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> [T; 3] {
    let mut grad = T::zero();
    let mut div = T::zero();
    let mut cross = T::zero();
    for idx in 0..grid.len() {
        let k = grid.k(idx);
        let qm = expand(gather(q, idx));
        grad += grid.k2(idx) * q.dot_at(q, idx);
        let w = contract_k(k, &qm);
        div += w.iter().map(|c| c.norm_sqr()).sum::<T>();
        // e_lαk Q_αβ,k = −C_lβ
        let c = curl_contraction(k, &qm);
        for l in 0..3 {
            for b in 0..3 {
                cross -= (qm[l][b].conj() * c[l][b]).re;
            }
        }
    }
    let v = grid.volume();
    let half = T::lit(0.5);
    [
        half * p.l1 * grad * v,
        half * p.l23() * div * v,
        half * p.l4 * cross * v,
    ]
}

/// `∫ f_bulk(Q) dx`, integrated exactly on a grid fine enough for the quartic
/// term.
pub fn bulk_energy<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> T {
    if p.bulk_is_linear() {
        return T::lit(0.5) * p.a * grid.norm_sq(q);
    }
    let qg = grid.quadrature_grid(4);
    let phys = qg.lift(&q.component_refs());
    let refs: Vec<&[T]> = phys.iter().map(|v| v.as_slice()).collect();
    let dens = map_points(&refs, 1, |v, o| o[0] = bulk_density(&qtensor_at(v), p));
    qg.integrate(&dens[0])
}

/// Full energy report. `h` may supply a precomputed masked molecular field.
pub fn total_energy_with<T: Real>(
    grid: &SpectralGrid<T>,
    u: &Spectrum<T, Vector3>,
    q: &Spectrum<T, SymTraceless>,
    h: Option<&Spectrum<T, SymTraceless>>,
    p: &MaterialParams<T>,
) -> Result<EnergyReport<T>, SpectralError> {
    match h {
        Some(h) => energy_report_from_parts(grid, u, q, h, bulk_energy(grid, q, p), p),
        None => {
            check(grid.dims(), q.dims())?;
            let ms = molecular_field_spectral(grid, q, p);
            energy_report_from_parts(grid, u, q, &ms.h, ms.bulk_energy, p)
        }
    }
}

/// Energy report from a molecular field and bulk energy already in hand.
pub fn energy_report_from_parts<T: Real>(
    grid: &SpectralGrid<T>,
    u: &Spectrum<T, Vector3>,
    q: &Spectrum<T, SymTraceless>,
    h: &Spectrum<T, SymTraceless>,
    bulk: T,
    p: &MaterialParams<T>,
) -> Result<EnergyReport<T>, SpectralError> {
    check(grid.dims(), u.dims())?;
    check(grid.dims(), q.dims())?;
    check(grid.dims(), h.dims())?;
    let kinetic = T::lit(0.5) * grid.norm_sq(u);
    let [elastic_l1, elastic_l23, elastic_l4_cross] = elastic_energies(grid, q, p);
    Ok(EnergyReport {
        time: T::zero(),
        kinetic,
        elastic_l1,
        elastic_l23,
        elastic_l4_cross,
        bulk,
        total: kinetic + elastic_l1 + elastic_l23 + elastic_l4_cross + bulk,
        dissipation_viscous: p.mu * grid.grad_norm_sq(u),
        dissipation_rotational: p.gamma * grid.norm_sq(h),
    })
}

pub fn total_energy<T: Real>(
    grid: &SpectralGrid<T>,
    u: &Spectrum<T, Vector3>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> Result<EnergyReport<T>, SpectralError> {
    total_energy_with(grid, u, q, None, p)
}

/// Free energy `∫ (f_elasticity + f_bulk)` of a band-limited `Q`.
pub fn free_energy<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> T {
    let [a, b, c] = elastic_energies(grid, q, p);
    a + b + c + bulk_energy(grid, q, p)
}

/// `∫ (Q_ij,k Q_ik,j − Q_ij,j Q_ik,k) dx` by grid quadrature, with `‖∇Q‖²`
/// as its natural scale.
pub fn null_lagrangian<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
) -> Result<(T, T), SpectralError> {
    check(grid.dims(), q.dims())?;
    let unit = MaterialParams {
        a: T::zero(),
        b: T::zero(),
        c: T::one(),
        l1: T::lit(2.0),
        l2: -T::lit(2.0),
        l3: T::lit(2.0),
        l4: T::zero(),
        mu: T::one(),
        gamma: T::one(),
    };
    // (L1, L2, L3) = (2, −2, 2) turns the density pieces into |∇Q|², −|div Q|²
    // and Q_ik,j Q_ij,k.
    let parts = super::fields::elastic_density_parts_field(grid, q, &unit)?;
    let cell = grid.cell_volume();
    let sum = |v: &Vec<T>| v.iter().copied().sum::<T>() * cell;
    Ok((sum(&parts[2]) + sum(&parts[1]), sum(&parts[0])))
}

/// Margin of the lower bound `(L4/2)∫e_lαk Q_lβ Q_αβ,k ≥ −(L1/4)‖∇Q‖² − (L4²/L1)‖Q‖²`.
pub fn l4_cross_margin<T: Real>(
    grid: &SpectralGrid<T>,
    q: &Spectrum<T, SymTraceless>,
    p: &MaterialParams<T>,
) -> T {
    let [_, _, cross] = elastic_energies(grid, q, p);
    let c = p.l4 * p.l4 / p.l1;
    cross + T::lit(0.25) * p.l1 * grid.grad_norm_sq(q) + c * grid.norm_sq(q)
}
