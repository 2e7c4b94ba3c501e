//! Pointwise algebra of the energy densities and stresses.

use crate::scalar::Real;
use crate::tensor::{Matrix3, QTensor, LEVI_CIVITA};

use super::MaterialParams;

/// `(a/2)tr(Q²) − (b/3)tr(Q³) + (c/4)(tr Q²)²`.
pub fn bulk_density<T: Real>(q: &QTensor<T>, p: &MaterialParams<T>) -> T {
    let (tr2, tr3) = q.trace_invariants();
    p.a * T::lit(0.5) * tr2 - p.b / T::lit(3.0) * tr3 + p.c * T::lit(0.25) * tr2 * tr2
}

/// Nonlinear part of the bulk field, `b(Q² − ⅓|Q|²I) − c·tr(Q²)·Q`.
pub fn bulk_nonlinear<T: Real>(q: &QTensor<T>, p: &MaterialParams<T>) -> QTensor<T> {
    let m = q.to_matrix();
    let q2 = (m * m).sym_traceless();
    let (tr2, _) = q.trace_invariants();
    q2.scale(p.b) - q.scale(p.c * tr2)
}

/// Full bulk field `B_Q = −aQ + b(Q² − ⅓|Q|²I) − c·tr(Q²)·Q`.
pub fn bulk_tensor<T: Real>(q: &QTensor<T>, p: &MaterialParams<T>) -> QTensor<T> {
    bulk_nonlinear(q, p) - q.scale(p.a)
}

/// The four pieces of the elastic density at a point, `(L1, L2, L3, L4)`
/// terms in that order. `dq[k]` holds `∂_k Q`.
pub fn elastic_density_parts<T: Real>(
    q: &Matrix3<T>,
    dq: &[Matrix3<T>; 3],
    p: &MaterialParams<T>,
) -> [T; 4] {
    let half = T::lit(0.5);
    let mut grad2 = T::zero();
    for d in dq {
        grad2 += d.contract(d);
    }
    // (div Q)_i = Q_ij,j
    let div: [T; 3] = std::array::from_fn(|i| dq[0][(i, 0)] + dq[1][(i, 1)] + dq[2][(i, 2)]);
    let div2 = div[0] * div[0] + div[1] * div[1] + div[2] * div[2];
    // Q_ik,j Q_ij,k
    let mut cross = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                cross += dq[j][(i, k)] * dq[k][(i, j)];
            }
        }
    }
    // e_lik Q_lj Q_ij,k
    let mut chiral = T::zero();
    for &(l, i, k, s) in &LEVI_CIVITA {
        let mut acc = T::zero();
        for j in 0..3 {
            acc += q[(l, j)] * dq[k][(i, j)];
        }
        chiral += T::lit(s as f64) * acc;
    }
    [
        half * p.l1 * grad2,
        half * p.l2 * div2,
        half * p.l3 * cross,
        half * p.l4 * chiral,
    ]
}

/// `σ^d_ij = −(L1 Q_kl,i Q_kl,j + L2 Q_km,m Q_kj,i + L3 Q_kj,l Q_kl,i + (L4/2) e_mkj Q_ml Q_kl,i)`.
pub fn distortion_stress_at<T: Real>(
    q: &Matrix3<T>,
    dq: &[Matrix3<T>; 3],
    p: &MaterialParams<T>,
) -> Matrix3<T> {
    let div: [T; 3] = std::array::from_fn(|k| dq[0][(k, 0)] + dq[1][(k, 1)] + dq[2][(k, 2)]);
    let half_l4 = T::lit(0.5) * p.l4;
    Matrix3::from_fn(|i, j| {
        let t1 = dq[i].contract(&dq[j]);
        let mut t2 = T::zero();
        let mut t3 = T::zero();
        for k in 0..3 {
            t2 += div[k] * dq[i][(k, j)];
            for l in 0..3 {
                t3 += dq[l][(k, j)] * dq[i][(k, l)];
            }
        }
        let mut t4 = T::zero();
        for &(m, k, jj, s) in &LEVI_CIVITA {
            if jj != j {
                continue;
            }
            let mut acc = T::zero();
            for l in 0..3 {
                acc += q[(m, l)] * dq[i][(k, l)];
            }
            t4 += T::lit(s as f64) * acc;
        }
        -(p.l1 * t1 + p.l2 * t2 + p.l3 * t3 + half_l4 * t4)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> MaterialParams<f64> {
        MaterialParams {
            a: 0.7,
            b: 1.3,
            c: 2.1,
            ..MaterialParams::default()
        }
    }

    #[test]
    fn bulk_density_examples() {
        let p = params();
        assert_eq!(bulk_density(&QTensor::zero(), &p), 0.0);
        let q = QTensor::new(2.0 / 3.0, 0.0, 0.0, -1.0 / 3.0, 0.0);
        let expect = p.a / 3.0 - 2.0 * p.b / 27.0 + p.c / 9.0;
        assert!((bulk_density(&q, &p) - expect).abs() < 1e-15);
        let even = MaterialParams { b: 0.0, ..p };
        let r = QTensor::new(0.3, -0.1, 0.25, 0.4, 0.05);
        assert_eq!(bulk_density(&r, &even), bulk_density(&r.scale(-1.0), &even));
    }

    #[test]
    fn bulk_tensor_is_minus_gradient_of_density() {
        // d/dε f(Q + εG) = −B:G for traceless symmetric G
        let p = params();
        let q = QTensor::new(0.3, -0.1, 0.25, 0.4, 0.05);
        let g = QTensor::new(-0.2, 0.5, 0.1, 0.3, -0.4);
        let h = 1e-4;
        let f = |e: f64| bulk_density(&(q + g.scale(e)), &p);
        let fd = (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
        let an = -bulk_tensor(&q, &p).dot(&g);
        assert!((fd - an).abs() < 1e-10);
    }

    #[test]
    fn stress_with_only_l1_is_negative_semidefinite() {
        let p = MaterialParams {
            l2: 0.0,
            l3: 0.0,
            l4: 0.0,
            ..params()
        };
        let q = QTensor::new(0.3, -0.1, 0.25, 0.4, 0.05).to_matrix();
        let dq = [
            QTensor::new(0.1, 0.2, -0.3, 0.05, 0.4).to_matrix(),
            QTensor::new(-0.5, 0.1, 0.0, 0.2, -0.2).to_matrix(),
            QTensor::new(0.0, -0.3, 0.6, 0.1, 0.1).to_matrix(),
        ];
        let s = distortion_stress_at(&q, &dq, &p);
        assert!((s - s.transpose()).max_abs() < 1e-15);
        for v in [[1.0, 0.0, 0.0], [0.3, -0.7, 0.2], [0.0, 1.0, 1.0]] {
            let mut quad = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    quad += v[i] * s[(i, j)] * v[j];
                }
            }
            assert!(quad <= 1e-15);
        }
    }
}
