#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use num_complex::Complex;
use proptest::prelude::*;
use qtensor::landau_de_gennes::{
    antisymmetric_stress, bulk_density, coercivity_constant_k, distortion_stress, elastic_density,
    elastic_energies, first_violation, free_energy, l4_cross_margin, lagrange_multipliers,
    molecular_field, molecular_field_k, null_lagrangian, total_energy, CoercivitySearch,
    MaterialParams,
};
use qtensor::spectral::{
    random_band_limited, QTensorField, RandomSpec, SpectralGrid, Spectrum, SymTraceless, Vector3,
    VectorField3,
};
use qtensor::tensor::{Matrix3, QTensor};

fn grid(n: usize) -> SpectralGrid<f64> {
    SpectralGrid::cubic(n, 2.0 * PI).unwrap()
}

fn random_q(g: &SpectralGrid<f64>, seed: u64, rms: f64) -> Spectrum<f64, SymTraceless> {
    random_band_limited(g, &RandomSpec::new(2.0, seed).rms(rms)).unwrap()
}

fn random_u(g: &SpectralGrid<f64>, seed: u64, rms: f64) -> Spectrum<f64, Vector3> {
    random_band_limited(g, &RandomSpec::new(2.0, seed).solenoidal().rms(rms)).unwrap()
}

fn params() -> MaterialParams<f64> {
    MaterialParams::default()
}

fn only_l1() -> MaterialParams<f64> {
    MaterialParams {
        a: 0.0,
        b: 0.0,
        c: 0.0,
        l2: 0.0,
        l3: 0.0,
        l4: 0.0,
        ..params()
    }
}

fn levi(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn q_of(c: [f64; 5]) -> [[f64; 3]; 3] {
    [
        [c[0], c[1], c[2]],
        [c[1], c[3], c[4]],
        [c[2], c[4], -c[0] - c[3]],
    ]
}

/// `Q` and `∂_k Q` at an arbitrary point, summed mode by mode.
struct Direct {
    q: [[f64; 3]; 3],
    dq: [[[f64; 3]; 3]; 3],
    u: [f64; 3],
}

fn direct_eval(
    g: &SpectralGrid<f64>,
    q: &Spectrum<f64, SymTraceless>,
    u: &Spectrum<f64, Vector3>,
    x: [f64; 3],
) -> Direct {
    let mut qc = [0.0; 5];
    let mut dqc = [[0.0; 5]; 3];
    let mut uc = [0.0; 3];
    for idx in 0..g.len() {
        if !g.retained(idx) {
            continue;
        }
        let k = g.k(idx);
        let phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
        let e = Complex::new(phase.cos(), phase.sin());
        for c in 0..5 {
            let v = q.component(c)[idx] * e;
            qc[c] += v.re;
            for d in 0..3 {
                // ∂_d e^{ik·x} = i k_d e^{ik·x}
                dqc[d][c] -= v.im * k[d];
            }
        }
        for c in 0..3 {
            uc[c] += (u.component(c)[idx] * e).re;
        }
    }
    Direct {
        q: q_of(qc),
        dq: [q_of(dqc[0]), q_of(dqc[1]), q_of(dqc[2])],
        u: uc,
    }
}

/// Full Lyapunov integrand coded from scratch with explicit index loops.
fn direct_density(d: &Direct, p: &MaterialParams<f64>) -> f64 {
    let (q, dq) = (&d.q, &d.dq);
    // dq[k][i][j] = Q_ij,k
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    let mut l3 = 0.0;
    let mut l4 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                l1 += dq[k][i][j] * dq[k][i][j];
                l2 += dq[j][i][j] * dq[k][i][k];
                l3 += dq[j][i][k] * dq[k][i][j];
                for l in 0..3 {
                    l4 += levi(l, i, k) * q[l][j] * dq[k][i][j];
                }
            }
        }
    }
    let mut tr2 = 0.0;
    let mut tr3 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            tr2 += q[i][j] * q[j][i];
            for k in 0..3 {
                tr3 += q[i][j] * q[j][k] * q[k][i];
            }
        }
    }
    let kinetic = 0.5 * (d.u[0] * d.u[0] + d.u[1] * d.u[1] + d.u[2] * d.u[2]);
    let elastic = 0.5 * (p.l1 * l1 + p.l2 * l2 + p.l3 * l3) + 0.5 * p.l4 * l4;
    let bulk = 0.5 * p.a * tr2 - p.b / 3.0 * tr3 + 0.25 * p.c * tr2 * tr2;
    kinetic + elastic + bulk
}

fn single_mode(
    g: &SpectralGrid<f64>,
    amp: QTensor<f64>,
    k: [f64; 3],
) -> Spectrum<f64, SymTraceless> {
    let f = QTensorField::from_fn(g.dims(), |idx| {
        let x = g.coordinates(idx);
        amp.scale((k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).sin())
    });
    g.to_spectral(&f).unwrap()
}

#[test]
fn bulk_density_examples() {
    let p = params();
    assert_eq!(bulk_density(&QTensor::zero(), &p), 0.0);
    let q = QTensor::new(2.0 / 3.0, 0.0, 0.0, -1.0 / 3.0, 0.0);
    let expect = p.a / 3.0 - 2.0 * p.b / 27.0 + p.c / 9.0;
    assert!((bulk_density(&q, &p) - expect).abs() < 1e-15);
    let even = MaterialParams { b: 0.0, ..p };
    let q = QTensor::new(0.3, -0.2, 0.7, 0.1, 0.4);
    assert_eq!(bulk_density(&q, &even), bulk_density(&q.scale(-1.0), &even));
}

#[test]
fn constant_q_has_no_elastic_density() {
    let g = grid(16);
    let qf = QTensorField::from_fn(g.dims(), |_| QTensor::uniaxial(0.5, [0.0, 0.6, 0.8]));
    let d = elastic_density(&g, &g.to_spectral(&qf).unwrap(), &params()).unwrap();
    assert!(d.max_abs() < 1e-14);
}

#[test]
fn single_off_diagonal_mode_density() {
    let g = grid(16);
    let q = single_mode(&g, QTensor::new(0.0, 1.0, 0.0, 0.0, 0.0), [1.0, 0.0, 0.0]);
    let d = elastic_density(&g, &q, &only_l1()).unwrap();
    for idx in 0..g.len() {
        let x = g.coordinates(idx)[0];
        let expect = x.cos().powi(2);
        assert!((d.component(0)[idx] - expect).abs() < 1e-10);
    }
}

#[test]
fn l4_term_matches_spectral_cross_energy() {
    let g = grid(16);
    let p = params();
    let only_l4 = MaterialParams {
        l1: 0.0,
        l2: 0.0,
        l3: 0.0,
        ..p
    };
    for seed in 0..5 {
        let q = random_q(&g, seed, 0.5);
        let d = elastic_density(&g, &q, &only_l4).unwrap();
        let quad: f64 = d.component(0).iter().sum::<f64>() * g.cell_volume();
        let [_, _, cross] = elastic_energies(&g, &q, &p);
        assert!(
            (quad - cross).abs() <= 1e-12 * cross.abs().max(1e-3),
            "{quad} {cross}"
        );
    }
}

#[test]
fn total_energy_examples() {
    let g = grid(16);
    let p = params();
    let zero = total_energy(
        &g,
        &Spectrum::zeros(g.dims()),
        &Spectrum::zeros(g.dims()),
        &p,
    )
    .unwrap();
    assert_eq!(zero.total, 0.0);
    assert_eq!(zero.dissipation_viscous, 0.0);
    assert_eq!(zero.dissipation_rotational, 0.0);

    let uf = VectorField3::from_components(
        g.dims(),
        vec![
            vec![0.0; g.len()],
            (0..g.len()).map(|i| g.coordinates(i)[0].sin()).collect(),
            vec![0.0; g.len()],
        ],
    )
    .unwrap();
    let u = g.to_spectral(&uf).unwrap();
    let r = total_energy(&g, &u, &Spectrum::zeros(g.dims()), &p).unwrap();
    assert!((r.kinetic - g.volume() / 4.0).abs() < 1e-10);
    assert!((r.total - r.kinetic).abs() < 1e-12);
    // ‖∇u‖² = V/2 for a unit mode
    assert!((r.dissipation_viscous - p.mu * g.volume() / 2.0).abs() < 1e-10);

    let mismatch = total_energy(
        &g,
        &Spectrum::zeros([8, 8, 8]),
        &Spectrum::zeros(g.dims()),
        &p,
    );
    assert!(mismatch.is_err());
}

#[test]
fn total_energy_matches_direct_quadrature() {
    // K = 4 on 12³; the quartic density is integrated exactly by 18 points per axis.
    let g = grid(12);
    let p = params();
    let m = 18;
    for seed in [3u64, 17] {
        let q = random_q(&g, seed, 0.6);
        let u = random_u(&g, seed + 50, 0.4);
        let r = total_energy(&g, &u, &q, &p).unwrap();
        let parts = r.kinetic + r.elastic_l1 + r.elastic_l23 + r.elastic_l4_cross + r.bulk;
        assert!((parts - r.total).abs() <= 1e-14 * r.total.abs());
        let h = 2.0 * PI / m as f64;
        let mut sum = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let d = direct_eval(&g, &q, &u, [i as f64 * h, j as f64 * h, k as f64 * h]);
                    sum += direct_density(&d, &p);
                }
            }
        }
        let oracle = sum * h * h * h;
        assert!(
            (oracle - r.total).abs() <= 1e-12 * oracle.abs(),
            "oracle {oracle} report {}",
            r.total
        );
    }
}

#[test]
fn molecular_field_examples() {
    let g = grid(16);
    let p = params();
    let mf = molecular_field(&g, &Spectrum::zeros(g.dims()), &p).unwrap();
    assert_eq!(mf.h.max_abs(), 0.0);

    let lin = MaterialParams {
        b: 0.0,
        c: 0.0,
        a: 0.7,
        ..p
    };
    let q0 = QTensor::uniaxial(0.4, [0.6, 0.8, 0.0]);
    let qf = QTensorField::from_fn(g.dims(), |_| q0);
    let mf = molecular_field(&g, &g.to_spectral(&qf).unwrap(), &lin).unwrap();
    assert!(mf.m.max_abs() < 1e-14 && mf.e.max_abs() < 1e-14);
    for idx in (0..g.len()).step_by(97) {
        let d = mf.h.at(idx) - q0.scale(-lin.a);
        assert!(d.frobenius_norm() < 1e-14);
    }

    let lin = MaterialParams {
        a: 0.3,
        ..only_l1()
    };
    let amp = QTensor::new(0.2, -0.4, 0.1, 0.5, 0.3);
    let k = [1.0, 2.0, -1.0];
    let q = single_mode(&g, amp, k);
    let qp = g.to_physical(&q).unwrap();
    let mf = molecular_field(&g, &q, &lin).unwrap();
    let factor = -lin.l1 * 6.0 - lin.a;
    for idx in 0..g.len() {
        let d = mf.h.at(idx) - qp.at(idx).scale(factor);
        assert!(d.frobenius_norm() < 1e-10);
    }
}

#[test]
fn multipliers_vanish_when_their_factors_do() {
    let g = grid(16);
    let (l0, anti) = lagrange_multipliers(&g, &Spectrum::zeros(g.dims()), &params()).unwrap();
    assert_eq!(l0.max_abs(), 0.0);
    assert_eq!(anti.max_abs(), 0.0);
    let p = MaterialParams {
        l2: 0.0,
        l3: 0.0,
        l4: 0.0,
        b: 0.0,
        ..params()
    };
    let (l0, anti) = lagrange_multipliers(&g, &random_q(&g, 4, 1.0), &p).unwrap();
    assert!(l0.max_abs() < 1e-14);
    assert!(anti.max_abs() < 1e-14);
}

#[test]
fn multipliers_reassemble_the_molecular_field() {
    let g = grid(16);
    let p = params();
    let q = random_q(&g, 11, 0.8);
    let qp = g.to_physical(&q).unwrap();
    let first: Vec<_> = (0..3)
        .map(|k| g.to_physical(&g.derivative(&q, k)).unwrap())
        .collect();
    let second: Vec<Vec<_>> = (0..3)
        .map(|k| {
            (0..3)
                .map(|j| {
                    g.to_physical(&g.derivative(&g.derivative(&q, k), j))
                        .unwrap()
                })
                .collect()
        })
        .collect();
    let (l0, anti) = lagrange_multipliers(&g, &q, &p).unwrap();
    let mf = molecular_field(&g, &q, &p).unwrap();
    let mut worst: f64 = 0.0;
    let scale = mf.h.max_abs();
    for idx in 0..g.len() {
        let qm = qp.at(idx).to_matrix();
        let d1: [Matrix3<f64>; 3] = std::array::from_fn(|k| first[k].at(idx).to_matrix());
        // d2[k][j] = ∂_j ∂_k Q
        let d2: [[Matrix3<f64>; 3]; 3] =
            std::array::from_fn(|k| std::array::from_fn(|j| second[k][j].at(idx).to_matrix()));
        let (tr2, _) = qp.at(idx).trace_invariants();
        let mut worst_here: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut u = -p.a * qm[(i, j)] - p.c * tr2 * qm[(i, j)];
                for k in 0..3 {
                    u += p.l1 * d2[k][k][(i, j)];
                    u += p.l23() * d2[k][j][(i, k)];
                    u += p.b * qm[(i, k)] * qm[(k, j)];
                    for l in 0..3 {
                        u += p.l4 * levi(l, i, k) * d1[k][(l, j)];
                    }
                }
                let delta = if i == j { 1.0 } else { 0.0 };
                let h = u - l0.component(0)[idx] * delta - anti.at(idx)[(i, j)];
                worst_here = worst_here.max((h - mf.h.at(idx).to_matrix()[(i, j)]).abs());
            }
        }
        worst = worst.max(worst_here);
    }
    assert!(worst <= 1e-10 * scale.max(1.0), "worst {worst}");
}

#[test]
fn distortion_stress_vanishes_without_gradients() {
    let g = grid(16);
    let p = params();
    assert_eq!(
        distortion_stress(&g, &Spectrum::zeros(g.dims()), &p)
            .unwrap()
            .max_abs(),
        0.0
    );
    let qf = QTensorField::from_fn(g.dims(), |_| QTensor::new(0.1, 0.2, -0.3, 0.4, 0.05));
    let s = distortion_stress(&g, &g.to_spectral(&qf).unwrap(), &p).unwrap();
    assert!(s.max_abs() < 1e-14);
}

#[test]
fn single_mode_distortion_stress_is_negative_semidefinite() {
    let g = grid(16);
    let amp = QTensor::new(0.3, 0.1, -0.2, -0.5, 0.25);
    let k = [2.0, -1.0, 1.0];
    let q = single_mode(&g, amp, k);
    let s = distortion_stress(&g, &q, &only_l1()).unwrap();
    let norm2 = amp.dot(&amp);
    for idx in 0..g.len() {
        let x = g.coordinates(idx);
        let c = (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).cos();
        let m = s.at(idx);
        for i in 0..3 {
            for j in 0..3 {
                let oracle = -k[i] * k[j] * c * c * norm2;
                assert!((m[(i, j)] - oracle).abs() < 1e-10);
                assert!((m[(i, j)] - m[(j, i)]).abs() < 1e-12);
            }
        }
        // v·σv = −c²|Q̂|²(k·v)² ≤ 0
        for v in [[1.0, 0.0, 0.0], [0.3, -0.7, 0.2], [1.0, 1.0, 1.0]] {
            let mut quad = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    quad += v[i] * m[(i, j)] * v[j];
                }
            }
            assert!(quad <= 1e-12);
        }
    }
}

#[test]
fn distortion_stress_matches_index_contraction() {
    let g = grid(12);
    let p = params();
    let q = random_q(&g, 8, 0.7);
    let s = distortion_stress(&g, &q, &p).unwrap();
    let u0 = Spectrum::zeros(g.dims());
    for idx in (0..g.len()).step_by(37) {
        let d = direct_eval(&g, &q, &u0, g.coordinates(idx));
        let (qm, dq) = (&d.q, &d.dq);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        acc += p.l1 * dq[i][k][l] * dq[j][k][l];
                        acc += p.l3 * dq[l][k][j] * dq[i][k][l];
                        for m in 0..3 {
                            if l == 0 {
                                acc += p.l2 * dq[m][k][m] * dq[i][k][j];
                            }
                            acc += 0.5 * p.l4 * levi(m, k, j) * qm[m][l] * dq[i][k][l];
                        }
                    }
                }
                assert!((s.at(idx)[(i, j)] + acc).abs() < 1e-10, "({i},{j})");
            }
        }
    }
}

#[test]
fn antisymmetric_stress_properties() {
    let g = grid(16);
    let p = params();
    let q = g.to_physical(&random_q(&g, 2, 1.0)).unwrap();
    let zero = QTensorField::zeros(g.dims());
    assert_eq!(antisymmetric_stress(&zero, &q).unwrap().max_abs(), 0.0);
    let bulk_only = q.scaled(-p.a);
    assert!(antisymmetric_stress(&q, &bulk_only).unwrap().max_abs() < 1e-15);

    let h = molecular_field(&g, &random_q(&g, 2, 1.0), &p).unwrap().h;
    let other = g.to_physical(&random_q(&g, 3, 1.0)).unwrap();
    let s = antisymmetric_stress(&other, &h).unwrap();
    let scale = other.max_abs() * h.max_abs();
    for idx in 0..g.len() {
        let m = s.at(idx);
        assert!((m + m.transpose()).max_abs() <= 1e-12 * scale);
    }
    assert!(antisymmetric_stress(&QTensorField::zeros([8, 8, 8]), &h).is_err());
}

#[test]
fn coercivity_examples() {
    let search = CoercivitySearch::default();
    let with = |a: f64, b: f64, c: f64| MaterialParams {
        a,
        b,
        c,
        ..params()
    };
    assert_eq!(
        coercivity_constant_k(&with(0.0, 0.0, 1.0), &search).unwrap(),
        0.0
    );
    let k = coercivity_constant_k(&with(-2.0, 0.0, 1.0), &search).unwrap();
    assert!(k >= 2.0 && k <= 2.0 * search.ratio, "{k}");
    let k1 = coercivity_constant_k(&with(-1.0, 3.0, 1.0), &search).unwrap();
    let k2 = coercivity_constant_k(&with(-1.0, 3.0, 1.0), &search).unwrap();
    assert_eq!(k1, k2);
    assert!(first_violation(k1, -1.0, 3.0, 1.0, &search).is_none());
}

#[test]
fn null_lagrangian_on_a_fixed_field() {
    let g = grid(16);
    let (value, scale) = null_lagrangian(&g, &random_q(&g, 42, 1.0)).unwrap();
    assert!(scale > 0.0);
    assert!(value.abs() <= 1e-10 * scale);
}

fn fourth_order_slope(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn molecular_field_is_symmetric_traceless(seed in 0u64..10_000) {
        let g = grid(12);
        let mf = molecular_field(&g, &random_q(&g, seed, 1.0), &params()).unwrap();
        let scale = mf.h.max_abs();
        for idx in 0..g.len() {
            let m = mf.h.at(idx).to_matrix();
            prop_assert!(m.trace().abs() <= 1e-12 * scale);
            prop_assert!((m - m.transpose()).max_abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn variational_derivative_is_minus_h(seed in 0u64..10_000) {
        let g = grid(12);
        let p = params();
        let q = random_q(&g, seed, 0.5);
        let dir = random_q(&g, seed + 7, 1.0);
        let h = molecular_field_k(&g, &q, &p);
        let analytic = -g.inner(&h, &dir);
        let fd = fourth_order_slope(|e| {
            let mut qe = q.clone();
            qe.axpy(e, &dir);
            free_energy(&g, &qe, &p)
        }, 1e-3);
        prop_assert!((fd - analytic).abs() <= 1e-6 * analytic.abs(), "{} {}", fd, analytic);
    }

    #[test]
    fn null_lagrangian_vanishes(seed in 0u64..10_000) {
        let g = grid(12);
        let (value, scale) = null_lagrangian(&g, &random_q(&g, seed, 1.0)).unwrap();
        prop_assert!(value.abs() <= 1e-10 * scale);
    }

    #[test]
    fn l4_cross_term_lower_bound(seed in 0u64..10_000, l4 in -2.0f64..2.0, rms in 0.1f64..3.0) {
        let g = grid(12);
        let p = MaterialParams { l4, ..params() };
        prop_assert!(l4_cross_margin(&g, &random_q(&g, seed, rms), &p) >= 0.0);
    }
}
