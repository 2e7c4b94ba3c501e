use crate::landau_de_gennes::EnergyReport;

use super::VerificationError;

/// Discrete residual of `dE/dt + μ‖∇u‖² + Γ‖H‖² = 0` along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct BalanceResidual {
    /// Interval midpoints.
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `Σ|r_m|dt / ∫ dissipation dt`.
    pub aggregate: f64,
}

/// Dissipation at the midpoint of interval `m`, interpolated from the samples
/// by a cubic (a quadratic when there are only three).
fn midpoint_value(d: &[f64], m: usize) -> f64 {
    const CENTRAL: [f64; 4] = [-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0];
    const FIRST: [f64; 4] = [5.0 / 16.0, 15.0 / 16.0, -5.0 / 16.0, 1.0 / 16.0];
    let n = d.len();
    if n == 3 {
        let w = [3.0 / 8.0, 6.0 / 8.0, -1.0 / 8.0];
        return if m == 0 {
            w[0] * d[0] + w[1] * d[1] + w[2] * d[2]
        } else {
            w[2] * d[0] + w[1] * d[1] + w[0] * d[2]
        };
    }
    let dot = |w: &[f64; 4], s: &[f64]| w.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
    if m == 0 {
        dot(&FIRST, &d[..4])
    } else if m + 2 == n {
        let last: [f64; 4] = [FIRST[3], FIRST[2], FIRST[1], FIRST[0]];
        dot(&last, &d[n - 4..])
    } else {
        dot(&CENTRAL, &d[m - 1..m + 3])
    }
}

/// `r_m = (E_{m+1} − E_m)/dt + D(t_{m+½})`, the midpoint dissipation being
/// interpolated to fourth order from the sampled values.
///
/// Reports are expected `dt` apart; the recorded times are checked when they
/// are not all zero.
pub fn energy_balance_residual(
    reports: &[EnergyReport<f64>],
    dt: f64,
) -> Result<BalanceResidual, VerificationError> {
    if reports.len() < 3 {
        return Err(VerificationError::TooFewSamples {
            needed: 3,
            found: reports.len(),
        });
    }
    let timed = reports.iter().any(|r| r.time != 0.0);
    let mut times = Vec::with_capacity(reports.len() - 1);
    let mut residuals = Vec::with_capacity(reports.len() - 1);
    let mut abs_sum = 0.0;
    let mut dissipated = 0.0;
    let diss: Vec<f64> = reports.iter().map(|r| r.dissipation()).collect();
    for (m, w) in reports.windows(2).enumerate() {
        if timed {
            let gap = w[1].time - w[0].time;
            if (gap - dt).abs() > 1e-9 * dt.max(gap.abs()) {
                return Err(VerificationError::NonUniform {
                    dt,
                    found: gap,
                    index: m,
                });
            }
        }
        let d = midpoint_value(&diss, m);
        let r = (w[1].total - w[0].total) / dt + d;
        times.push(if timed {
            0.5 * (w[0].time + w[1].time)
        } else {
            (m as f64 + 0.5) * dt
        });
        residuals.push(r);
        abs_sum += r.abs() * dt;
        dissipated += d * dt;
    }
    let aggregate = if abs_sum == 0.0 {
        0.0
    } else if dissipated > 0.0 {
        abs_sum / dissipated
    } else {
        f64::INFINITY
    };
    Ok(BalanceResidual {
        times,
        residuals,
        aggregate,
    })
}

/// Least-squares slope of `log error` against `log dt`.
pub fn observed_order(dts: &[f64], errors: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = dts
        .iter()
        .zip(errors)
        .map(|(d, e)| (d.ln(), e.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(t: f64, total: f64, diss: f64) -> EnergyReport<f64> {
        EnergyReport {
            time: t,
            total,
            dissipation_viscous: diss,
            ..Default::default()
        }
    }

    #[test]
    fn exact_exponential_decay_has_second_order_residual() {
        // E = e^{−2t}, D = 2e^{−2t}
        let agg = |dt: f64| {
            let r: Vec<_> = (0..=(1.0 / dt).round() as usize)
                .map(|m| {
                    let t = m as f64 * dt;
                    report(t, (-2.0 * t).exp(), 2.0 * (-2.0 * t).exp())
                })
                .collect();
            energy_balance_residual(&r, dt).unwrap().aggregate
        };
        let dts = [0.02, 0.01, 0.005];
        let errs: Vec<f64> = dts.iter().map(|&d| agg(d)).collect();
        let order = observed_order(&dts, &errs);
        assert!((order - 2.0).abs() < 0.05, "{order}");
    }

    #[test]
    fn midpoint_interpolation_is_exact_for_cubics() {
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t - 0.25 * t * t * t;
        let d: Vec<f64> = (0..6).map(|i| f(i as f64)).collect();
        for m in 0..5 {
            assert!((midpoint_value(&d, m) - f(m as f64 + 0.5)).abs() < 1e-12);
        }
        let d: Vec<f64> = (0..3)
            .map(|i| f(i as f64) + 0.25 * (i * i * i) as f64)
            .collect();
        for m in 0..2 {
            let t = m as f64 + 0.5;
            assert!((midpoint_value(&d, m) - (1.0 - 2.0 * t + 0.5 * t * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_short_or_uneven_trajectories() {
        let r = [report(0.0, 1.0, 0.0), report(0.1, 1.0, 0.0)];
        assert!(matches!(
            energy_balance_residual(&r, 0.1),
            Err(VerificationError::TooFewSamples { .. })
        ));
        let r = [
            report(0.0, 1.0, 0.0),
            report(0.1, 1.0, 0.0),
            report(0.3, 1.0, 0.0),
        ];
        assert!(matches!(
            energy_balance_residual(&r, 0.1),
            Err(VerificationError::NonUniform { index: 1, .. })
        ));
    }

    #[test]
    fn stationary_state_has_zero_residual() {
        let r = vec![report(0.0, 0.0, 0.0); 4];
        let b = energy_balance_residual(&r, 0.5).unwrap();
        assert!(b.residuals.iter().all(|&x| x == 0.0));
        assert_eq!(b.aggregate, 0.0);
    }
}
