use thiserror::Error;

use crate::scalar::Real;

/// Material constants of the Landau-de Gennes energy and the flow.
///
/// The tumbling parameter and the `L5` elastic constant are fixed to zero and
/// have no fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub l1: T,
    pub l2: T,
    pub l3: T,
    pub l4: T,
    pub mu: T,
    pub gamma: T,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("parameter {name} is not finite")]
    NonFinite { name: &'static str },
    #[error("c = {0} violates c > 0 (the quartic bulk term must keep the energy bounded below)")]
    NonPositiveC(f64),
    #[error("L1 = {0} violates L1 > 0 (the energy must be bounded below)")]
    NonPositiveL1(f64),
    #[error("L2 + L3 = {0} violates L2 + L3 >= 0 (the energy must be bounded below)")]
    NegativeL23(f64),
    #[error("mu = {0} violates mu > 0")]
    NonPositiveMu(f64),
    #[error("gamma = {0} violates gamma > 0")]
    NonPositiveGamma(f64),
}

#[derive(Clone, Debug, Error, PartialEq)]
#[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ParamErrors(pub Vec<ParamError>);

impl<T: Real> MaterialParams<T> {
    /// Every violated constraint, in a fixed order.
    pub fn violations(&self) -> Vec<ParamError> {
        let mut out = Vec::new();
        let named = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("L1", self.l1),
            ("L2", self.l2),
            ("L3", self.l3),
            ("L4", self.l4),
            ("mu", self.mu),
            ("gamma", self.gamma),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                out.push(ParamError::NonFinite { name });
            }
        }
        if !out.is_empty() {
            return out;
        }
        let z = T::zero();
        if self.c <= z {
            out.push(ParamError::NonPositiveC(self.c.to_f64_lossy()));
        }
        if self.l1 <= z {
            out.push(ParamError::NonPositiveL1(self.l1.to_f64_lossy()));
        }
        if self.l2 + self.l3 < z {
            out.push(ParamError::NegativeL23((self.l2 + self.l3).to_f64_lossy()));
        }
        if self.mu <= z {
            out.push(ParamError::NonPositiveMu(self.mu.to_f64_lossy()));
        }
        if self.gamma <= z {
            out.push(ParamError::NonPositiveGamma(self.gamma.to_f64_lossy()));
        }
        out
    }

    pub fn validated(self) -> Result<Self, ParamErrors> {
        let v = self.violations();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(ParamErrors(v))
        }
    }

    #[inline]
    pub fn l23(&self) -> T {
        self.l2 + self.l3
    }

    /// Whether the bulk term is linear in Q.
    pub fn bulk_is_linear(&self) -> bool {
        self.b == T::zero() && self.c == T::zero()
    }

    pub fn cast<U: Real>(&self) -> MaterialParams<U> {
        let f = |x: T| U::lit(x.to_f64_lossy());
        MaterialParams {
            a: f(self.a),
            b: f(self.b),
            c: f(self.c),
            l1: f(self.l1),
            l2: f(self.l2),
            l3: f(self.l3),
            l4: f(self.l4),
            mu: f(self.mu),
            gamma: f(self.gamma),
        }
    }
}

impl Default for MaterialParams<f64> {
    fn default() -> Self {
        Self {
            a: -0.2,
            b: 1.0,
            c: 1.0,
            l1: 1.0,
            l2: 0.5,
            l3: 0.5,
            l4: 0.3,
            mu: 1.0,
            gamma: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_every_violation() {
        let p = MaterialParams {
            c: -1.0,
            l1: 0.0,
            l2: -1.0,
            l3: 0.5,
            mu: 0.0,
            ..MaterialParams::default()
        };
        let v = p.violations();
        assert_eq!(
            v,
            vec![
                ParamError::NonPositiveC(-1.0),
                ParamError::NonPositiveL1(0.0),
                ParamError::NegativeL23(-0.5),
                ParamError::NonPositiveMu(0.0),
            ]
        );
        assert!(p.validated().unwrap_err().to_string().contains("c > 0"));
        assert!(MaterialParams::default().validated().is_ok());
        let nan = MaterialParams {
            a: f64::NAN,
            ..MaterialParams::default()
        };
        assert_eq!(nan.violations(), vec![ParamError::NonFinite { name: "a" }]);
    }
}
