//! Minkowski 3-vectors with signature (−,+,+), the wedge product, the Φ
//! functional and the coefficient record of a bilinear master equation.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Complex 3-vector on the basis (e₀, e₁, e₂) with e₀·e₀ = −1.
///
/// Real vectors are the special case with vanishing imaginary parts; build
/// them with [`MinkVec3::real`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinkVec3 {
    pub v0: Complex64,
    pub v1: Complex64,
    pub v2: Complex64,
}

impl MinkVec3 {
    pub const ZERO: MinkVec3 = MinkVec3 {
        v0: Complex64::new(0.0, 0.0),
        v1: Complex64::new(0.0, 0.0),
        v2: Complex64::new(0.0, 0.0),
    };

    pub fn new(v0: Complex64, v1: Complex64, v2: Complex64) -> Self {
        Self { v0, v1, v2 }
    }

    pub fn real(v0: f64, v1: f64, v2: f64) -> Self {
        Self::new(v0.into(), v1.into(), v2.into())
    }

    pub fn from_real(v: [f64; 3]) -> Self {
        Self::real(v[0], v[1], v[2])
    }

    /// Basis vector e_k.
    pub fn basis(k: usize) -> Self {
        let mut v = [0.0; 3];
        v[k] = 1.0;
        Self::from_real(v)
    }

    pub fn components(&self) -> [Complex64; 3] {
        [self.v0, self.v1, self.v2]
    }

    pub fn re(&self) -> [f64; 3] {
        [self.v0.re, self.v1.re, self.v2.re]
    }

    pub fn im(&self) -> [f64; 3] {
        [self.v0.im, self.v1.im, self.v2.im]
    }

    pub fn dot(&self, other: &MinkVec3) -> Complex64 {
        dot(self, other)
    }

    pub fn wedge(&self, other: &MinkVec3) -> MinkVec3 {
        wedge(self, other)
    }

    /// Largest component modulus.
    pub fn max_abs(&self) -> f64 {
        self.components().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> MinkVec3 {
        MinkVec3::new(self.v0 * s, self.v1 * s, self.v2 * s)
    }
}

impl Add for MinkVec3 {
    type Output = MinkVec3;
    fn add(self, rhs: MinkVec3) -> MinkVec3 {
        MinkVec3::new(self.v0 + rhs.v0, self.v1 + rhs.v1, self.v2 + rhs.v2)
    }
}

impl Sub for MinkVec3 {
    type Output = MinkVec3;
    fn sub(self, rhs: MinkVec3) -> MinkVec3 {
        MinkVec3::new(self.v0 - rhs.v0, self.v1 - rhs.v1, self.v2 - rhs.v2)
    }
}

impl Neg for MinkVec3 {
    type Output = MinkVec3;
    fn neg(self) -> MinkVec3 {
        MinkVec3::new(-self.v0, -self.v1, -self.v2)
    }
}

impl Mul<Complex64> for MinkVec3 {
    type Output = MinkVec3;
    fn mul(self, s: Complex64) -> MinkVec3 {
        self.scale(s)
    }
}

impl Mul<f64> for MinkVec3 {
    type Output = MinkVec3;
    fn mul(self, s: f64) -> MinkVec3 {
        self.scale(s.into())
    }
}

impl Mul<MinkVec3> for Complex64 {
    type Output = MinkVec3;
    fn mul(self, v: MinkVec3) -> MinkVec3 {
        v.scale(self)
    }
}

impl Mul<MinkVec3> for f64 {
    type Output = MinkVec3;
    fn mul(self, v: MinkVec3) -> MinkVec3 {
        v.scale(self.into())
    }
}

/// −a₀b₀ + a₁b₁ + a₂b₂, bilinear without conjugation.
pub fn dot(a: &MinkVec3, b: &MinkVec3) -> Complex64 {
    -a.v0 * b.v0 + a.v1 * b.v1 + a.v2 * b.v2
}

/// Wedge with e₀∧e₁ = −e₂, e₁∧e₂ = e₀, e₂∧e₀ = −e₁.
pub fn wedge(a: &MinkVec3, b: &MinkVec3) -> MinkVec3 {
    MinkVec3::new(
        a.v1 * b.v2 - a.v2 * b.v1,
        -(a.v2 * b.v0 - a.v0 * b.v2),
        -(a.v0 * b.v1 - a.v1 * b.v0),
    )
}

/// Real-component dot product, same metric.
pub fn dot_re(a: [f64; 3], b: [f64; 3]) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Real-component wedge product.
pub fn wedge_re(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        -(a[2] * b[0] - a[0] * b[2]),
        -(a[0] * b[1] - a[1] * b[0]),
    ]
}

/// Initial-state data entering the Φ functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiContext {
    pub delta0_sq: f64,
    pub kappa0: f64,
}

impl PhiContext {
    /// Δ₀² = 4μ₀(μ₀+ν₀) + κ₀².
    pub fn from_initial(mu0: f64, kappa0: f64, nu0: f64) -> Self {
        Self {
            delta0_sq: 4.0 * mu0 * (mu0 + nu0) + kappa0 * kappa0,
            kappa0,
        }
    }
}

/// Φ(v) = ½(v₀+v₁) + ½Δ₀²(v₀−v₁) + κ₀v₂.
pub fn phi(v: &MinkVec3, ctx: &PhiContext) -> Complex64 {
    0.5 * (v.v0 + v.v1) + 0.5 * ctx.delta0_sq * (v.v0 - v.v1) + ctx.kappa0 * v.v2
}

/// The seven real constants of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MasterEqCoefficients {
    pub gamma: f64,
    pub theta: [f64; 3],
    pub eta: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMode {
    #[default]
    Physical,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("coefficient {name} is not finite")]
    NonFinite { name: &'static str },
    #[error("physical validation: {0}")]
    Unphysical(String),
}

impl MasterEqCoefficients {
    pub fn new(gamma: f64, theta: [f64; 3], eta: [f64; 3]) -> Self {
        Self { gamma, theta, eta }
    }

    pub fn theta_vec(&self) -> MinkVec3 {
        MinkVec3::from_real(self.theta)
    }

    pub fn eta_vec(&self) -> MinkVec3 {
        MinkVec3::from_real(self.eta)
    }

    /// Largest magnitude among the seven constants, floored at 1e-300.
    pub fn scale(&self) -> f64 {
        self.theta
            .iter()
            .chain(self.eta.iter())
            .chain(std::iter::once(&self.gamma))
            .fold(1e-300, |m, x| m.max(x.abs()))
    }

    pub fn as_array(&self) -> [f64; 7] {
        let [t0, t1, t2] = self.theta;
        let [e0, e1, e2] = self.eta;
        [self.gamma, t0, t1, t2, e0, e1, e2]
    }

    pub fn validate(&self, mode: ValidationMode) -> Result<(), ValidationError> {
        const NAMES: [&str; 7] = ["gamma", "theta0", "theta1", "theta2", "eta0", "eta1", "eta2"];
        for (name, x) in NAMES.iter().zip(self.as_array()) {
            if !x.is_finite() {
                return Err(ValidationError::NonFinite { name });
            }
        }
        if mode == ValidationMode::Raw {
            return Ok(());
        }
        let [t0, t1, _] = self.theta;
        let [e0, e1, _] = self.eta;
        let fail = |msg: String| Err(ValidationError::Unphysical(msg));
        if t0 <= 0.0 {
            return fail(format!("theta0 = {t0} must be positive"));
        }
        if t1.abs() >= t0 {
            return fail(format!("|theta1| = {} must be below theta0 = {t0}", t1.abs()));
        }
        if e0 > 0.0 {
            return fail(format!("eta0 = {e0} must be non-positive"));
        }
        if e1 - e0 < 0.0 {
            return fail(format!("eta1 - eta0 = {} must be non-negative", e1 - e0));
        }
        if e0 + e1 > 0.0 {
            return fail(format!("eta0 + eta1 = {} must be non-positive", e0 + e1));
        }
        Ok(())
    }
}
