//! Search for the constant `K` that makes the shifted bulk energy coercive:
//! `(K/2)s + (c/8)s² ≤ (K + a/2)s − (b/3)t + (c/4)s²` for every admissible
//! pair `s = tr(Q²)`, `t = tr(Q³)`, where `|t| ≤ s^{3/2}/√6`.

use thiserror::Error;

use super::MaterialParams;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoercivitySearch {
    /// Number of geometric grid points `K_j = k_min·ratio^j` to try.
    pub budget: usize,
    pub k_min: f64,
    pub ratio: f64,
    pub s_max: f64,
    pub samples: usize,
}

impl Default for CoercivitySearch {
    fn default() -> Self {
        Self {
            budget: 4000,
            k_min: 1e-3,
            ratio: 1.01,
            s_max: 100.0,
            samples: 100_000,
        }
    }
}

impl CoercivitySearch {
    pub fn with_budget(budget: usize) -> Self {
        Self {
            budget,
            ..Self::default()
        }
    }

    /// The `j`-th candidate; index 0 is `K = 0`.
    pub fn candidate(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.k_min * self.ratio.powf((j - 1) as f64)
        }
    }
}

#[derive(Clone, Copy, Debug, Error, PartialEq)]
pub enum CoercivityError {
    #[error("c = {0} must be positive")]
    NonPositiveC(f64),
    #[error("search settings are invalid")]
    InvalidSearch,
    #[error("no K up to {k_max} works; the inequality fails at s = {s}, t = {t}")]
    Exhausted { k_max: f64, s: f64, t: f64 },
}

/// Whether the inequality holds at one invariant pair.
pub fn coercivity_holds(k: f64, a: f64, b: f64, c: f64, s: f64, t: f64) -> bool {
    0.5 * k * s + 0.125 * c * s * s <= (k + 0.5 * a) * s - b / 3.0 * t + 0.25 * c * s * s
}

/// First sampled `(s, t)` violating the inequality at `k`.
///
/// Samples `s` uniformly on `[0, s_max]`; for each `s` checks `t` at both
/// ends of its admissible range and at zero. The inequality is affine in `t`,
/// so the endpoints (one of which is `sign(b)·s^{3/2}/√6`) are the worst case.
pub fn first_violation(
    k: f64,
    a: f64,
    b: f64,
    c: f64,
    search: &CoercivitySearch,
) -> Option<(f64, f64)> {
    let n = search.samples.max(2);
    for i in 0..n {
        let s = search.s_max * i as f64 / (n - 1) as f64;
        let tmax = s.powf(1.5) / 6f64.sqrt();
        let worst = if b >= 0.0 { tmax } else { -tmax };
        for t in [worst, -worst, 0.0] {
            if !coercivity_holds(k, a, b, c, s, t) {
                return Some((s, t));
            }
        }
    }
    None
}

/// Smallest candidate `K` certified by sampling.
///
/// Feasibility is monotone in `K`, so after checking `K = 0` the geometric
/// grid is bisected.
pub fn coercivity_constant_k<T: Real>(
    p: &MaterialParams<T>,
    search: &CoercivitySearch,
) -> Result<f64, CoercivityError> {
    let (a, b, c) = (p.a.to_f64_lossy(), p.b.to_f64_lossy(), p.c.to_f64_lossy());
    if !(c > 0.0) {
        return Err(CoercivityError::NonPositiveC(c));
    }
    if search.budget == 0 || !(search.k_min > 0.0 && search.ratio > 1.0 && search.s_max > 0.0) {
        return Err(CoercivityError::InvalidSearch);
    }
    let last = search.budget;
    let fails = |j: usize| first_violation(search.candidate(j), a, b, c, search);
    if fails(0).is_none() {
        return Ok(0.0);
    }
    if let Some((s, t)) = fails(last) {
        return Err(CoercivityError::Exhausted {
            k_max: search.candidate(last),
            s,
            t,
        });
    }
    // invariant: lo fails, hi passes
    let (mut lo, mut hi) = (0usize, last);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fails(mid).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(search.candidate(hi))
}

/// Closed-form threshold `max(0, −a + 2b²/(27c))` of the worst-case reduction.
pub fn coercivity_threshold(a: f64, b: f64, c: f64) -> f64 {
    (-a + 2.0 * b * b / (27.0 * c)).max(0.0)
}
