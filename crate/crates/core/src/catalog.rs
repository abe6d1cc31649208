//! Canonical constructors for the named master-equation classes, a classifier,
//! the Gibbs-stationary test, the two-operator complete-positivity realization
//! and the thermal parameter b.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::MasterEqCoefficients;
use crate::stationary::{factorized_residual, gamma_vector, gibbs_vector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("unsupported realization: eta2 = {0} must vanish")]
    UnsupportedRealization(f64),
    #[error("CP witness reconstruction error {0:e} exceeds tolerance")]
    ReconstructionMismatch(f64),
    #[error("unknown equation class '{0}'")]
    UnknownClass(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EquationClass {
    KL,
    CL,
    ConjugateCL,
    GeneralizedCL,
    HPZ,
    ConjugateHPZ,
    GeneralizedKL1,
    GeneralizedKL2,
    GenericFactorized,
    Generic,
}

impl EquationClass {
    pub const ALL: [EquationClass; 10] = [
        EquationClass::KL,
        EquationClass::CL,
        EquationClass::ConjugateCL,
        EquationClass::GeneralizedCL,
        EquationClass::HPZ,
        EquationClass::ConjugateHPZ,
        EquationClass::GeneralizedKL1,
        EquationClass::GeneralizedKL2,
        EquationClass::GenericFactorized,
        EquationClass::Generic,
    ];

    /// Classes with a canonical constructor.
    pub const NAMED: [EquationClass; 8] = [
        EquationClass::KL,
        EquationClass::CL,
        EquationClass::ConjugateCL,
        EquationClass::GeneralizedCL,
        EquationClass::HPZ,
        EquationClass::ConjugateHPZ,
        EquationClass::GeneralizedKL1,
        EquationClass::GeneralizedKL2,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EquationClass::KL => "KL",
            EquationClass::CL => "CL",
            EquationClass::ConjugateCL => "ConjugateCL",
            EquationClass::GeneralizedCL => "GeneralizedCL",
            EquationClass::HPZ => "HPZ",
            EquationClass::ConjugateHPZ => "ConjugateHPZ",
            EquationClass::GeneralizedKL1 => "GeneralizedKL1",
            EquationClass::GeneralizedKL2 => "GeneralizedKL2",
            EquationClass::GenericFactorized => "GenericFactorized",
            EquationClass::Generic => "Generic",
        }
    }
}

impl fmt::Display for EquationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EquationClass {
    type Err = CatalogError;

    /// Accepts the full names and the short tags cCL, gCL, cHPZ, gKL1, gKL2.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let class = match s.trim() {
            "KL" => EquationClass::KL,
            "CL" => EquationClass::CL,
            "ConjugateCL" | "cCL" => EquationClass::ConjugateCL,
            "GeneralizedCL" | "gCL" => EquationClass::GeneralizedCL,
            "HPZ" => EquationClass::HPZ,
            "ConjugateHPZ" | "cHPZ" => EquationClass::ConjugateHPZ,
            "GeneralizedKL1" | "gKL1" => EquationClass::GeneralizedKL1,
            "GeneralizedKL2" | "gKL2" => EquationClass::GeneralizedKL2,
            "GenericFactorized" => EquationClass::GenericFactorized,
            "Generic" => EquationClass::Generic,
            other => return Err(CatalogError::UnknownClass(other.to_string())),
        };
        Ok(class)
    }
}

/// Named class parameters. θ₀ may be given as ω₀ (θ₀ = 2ω₀) and η₀ as the
/// thermal b (η₀ = −2γb).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ClassParams {
    pub gamma: Option<f64>,
    pub theta0: Option<f64>,
    pub omega0: Option<f64>,
    pub eta0: Option<f64>,
    pub b: Option<f64>,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    pub eta2: Option<f64>,
}

fn violation(msg: impl Into<String>) -> CatalogError {
    CatalogError::DomainViolation(msg.into())
}

fn exactly_one(a: Option<f64>, b: Option<f64>, names: &str) -> Result<Option<f64>, CatalogError> {
    match (a, b) {
        (Some(_), Some(_)) => Err(violation(format!("give only one of {names}"))),
        (Some(x), None) | (None, Some(x)) => Ok(Some(x)),
        (None, None) => Ok(None),
    }
}

fn fixed(value: Option<f64>, name: &str, class: EquationClass) -> Result<(), CatalogError> {
    match value {
        Some(_) => Err(violation(format!("{name} is fixed by class {class}"))),
        None => Ok(()),
    }
}

/// Coefficients of a named class from its free parameters.
pub fn canonical(class: EquationClass, p: &ClassParams) -> Result<MasterEqCoefficients, CatalogError> {
    let gamma = p.gamma.ok_or_else(|| violation("gamma is required"))?;
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(violation(format!("gamma must be positive, got {gamma}")));
    }
    let theta0 = exactly_one(p.theta0, p.omega0.map(|w| 2.0 * w), "theta0, omega0")?
        .ok_or_else(|| violation("theta0 or omega0 is required"))?;
    if theta0.is_nan() || theta0 <= 0.0 {
        return Err(violation(format!("theta0 must be positive, got {theta0}")));
    }
    let eta0 = exactly_one(p.eta0, p.b.map(|b| -2.0 * gamma * b), "eta0, b")?
        .ok_or_else(|| violation("eta0 or b is required"))?;
    if eta0.is_nan() || eta0 >= 0.0 {
        return Err(violation(format!("eta0 must be negative, got {eta0}")));
    }
    let theta1_free = || -> Result<f64, CatalogError> {
        let t1 = p.theta1.unwrap_or(0.0);
        if t1.abs() > theta0 {
            return Err(violation(format!("|theta1| = {} exceeds theta0 = {theta0}", t1.abs())));
        }
        Ok(t1)
    };
    use EquationClass as E;
    let (theta, eta) = match class {
        E::KL => {
            fixed(p.theta1, "theta1", class)?;
            fixed(p.theta2, "theta2", class)?;
            fixed(p.eta2, "eta2", class)?;
            ([theta0, 0.0, 0.0], [eta0, 0.0, 0.0])
        }
        E::CL | E::ConjugateCL | E::HPZ | E::ConjugateHPZ => {
            fixed(p.theta2, "theta2", class)?;
            let eta2 = if matches!(class, E::HPZ | E::ConjugateHPZ) {
                p.eta2.unwrap_or(0.0)
            } else {
                fixed(p.eta2, "eta2", class)?;
                0.0
            };
            let sign = if matches!(class, E::CL | E::HPZ) { 1.0 } else { -1.0 };
            ([theta0, theta1_free()?, -sign * gamma], [eta0, sign * eta0, eta2])
        }
        E::GeneralizedCL => {
            fixed(p.theta1, "theta1", class)?;
            fixed(p.eta2, "eta2", class)?;
            let t2 = p.theta2.unwrap_or(0.0);
            if t2.abs() > gamma {
                return Err(violation(format!("|theta2| = {} exceeds gamma = {gamma}", t2.abs())));
            }
            ([theta0, 0.0, t2], [eta0, -eta0 * t2 / gamma, 0.0])
        }
        E::GeneralizedKL1 => {
            fixed(p.theta2, "theta2", class)?;
            fixed(p.eta2, "eta2", class)?;
            let t1 = theta1_free()?;
            ([theta0, t1, 0.0], [eta0, eta0 * t1 / theta0, 0.0])
        }
        E::GeneralizedKL2 => {
            fixed(p.theta2, "theta2", class)?;
            fixed(p.eta2, "eta2", class)?;
            let t1 = theta1_free()?;
            ([theta0, t1, gamma * t1 / theta0], [eta0, 0.0, 0.0])
        }
        E::GenericFactorized | E::Generic => {
            return Err(violation(format!("class {class} has no canonical form")));
        }
    };
    Ok(MasterEqCoefficients::new(gamma, theta, eta))
}

/// Most specific class whose defining relations hold to relative tolerance tol.
pub fn classify(c: &MasterEqCoefficients, tol: f64) -> EquationClass {
    let s = c.scale();
    let close = |a: f64, b: f64| (a - b).abs() <= tol * s;
    let g = c.gamma;
    let [t0, t1, t2] = c.theta;
    let [e0, e1, e2] = c.eta;
    let no_e2 = close(e2, 0.0);
    use EquationClass as E;
    if close(t1, 0.0) && close(t2, 0.0) && close(e1, 0.0) && no_e2 {
        E::KL
    } else if no_e2 && close(t1, 0.0) && t2.abs() <= g + tol * s && close(e1 * g, -e0 * t2) {
        E::GeneralizedCL
    } else if no_e2 && close(e1, e0) && close(t2, -g) {
        E::CL
    } else if no_e2 && close(e1, -e0) && close(t2, g) {
        E::ConjugateCL
    } else if no_e2 && close(t2, 0.0) && close(e1 * t0, e0 * t1) {
        E::GeneralizedKL1
    } else if no_e2 && close(e1, 0.0) && close(t2 * t0, g * t1) {
        E::GeneralizedKL2
    } else if close(e1, e0) && close(t2, -g) {
        E::HPZ
    } else if close(e1, -e0) && close(t2, g) {
        E::ConjugateHPZ
    } else if factorized_residual(c) <= tol {
        E::GenericFactorized
    } else {
        E::Generic
    }
}

/// Which thermal-occupation exponent to use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ThermalForm {
    /// ½ + 1/(e^{ω₀/kT} − 1), whose high-temperature limit is kT/ω₀.
    #[default]
    Consistent,
    /// ½ + 1/(e^{ω₀/2kT} − 1) as printed.
    Printed,
}

pub fn thermal_b(omega0: f64, k_t: f64, form: ThermalForm) -> f64 {
    let x = match form {
        ThermalForm::Consistent => omega0 / k_t,
        ThermalForm::Printed => omega0 / (2.0 * k_t),
    };
    0.5 + 1.0 / x.exp_m1()
}

/// Stationary Γ has Γ₁ = Γ₂ = 0 (relative to Γ₀), and then Γ₀ = −η₀/γ.
pub fn gibbs_stationary(c: &MasterEqCoefficients, tol: f64) -> bool {
    let Ok(gv) = gamma_vector(c) else {
        return false;
    };
    gibbs_vector(&gv, tol) && (gv[0] + c.eta[0] / c.gamma).abs() <= tol.max(1e-12) * (1.0 + gv[0].abs())
}

/// Two Lindblad operators Vᵢ = cᵢa + dᵢa†. In the generic case cᵢ = c and
/// dᵢ = c·sᵢ; when |η₀| = γ the realization degenerates to cᵢ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CpWitness {
    pub c: f64,
    pub s: Option<[f64; 2]>,
    pub c_coeffs: [f64; 2],
    pub d_coeffs: [f64; 2],
    /// (γ, η₀, η₁, η₂) rebuilt from the operator coefficients.
    pub reconstructed: [f64; 4],
    pub reconstruction_error: f64,
}

pub const CP_RECONSTRUCTION_TOL: f64 = 1e-10;

fn rebuild(cs: [f64; 2], ds: [f64; 2]) -> [f64; 4] {
    let sum = |f: &dyn Fn(usize) -> f64| f(0) + f(1);
    [
        -2.0 * sum(&|i| cs[i] * cs[i] - ds[i] * ds[i]),
        -2.0 * sum(&|i| cs[i] * cs[i] + ds[i] * ds[i]),
        -4.0 * sum(&|i| cs[i] * ds[i]),
        0.0,
    ]
}

/// Real two-operator CP realization of the dissipative part, if one exists.
///
/// Absent when the CP inequalities fail; an error when they hold but η₂ ≠ 0,
/// which the real realization cannot represent.
pub fn cp_decompose(c: &MasterEqCoefficients) -> Result<Option<CpWitness>, CatalogError> {
    let g = c.gamma;
    let [e0, e1, e2] = c.eta;
    let s = c.scale();
    if g.is_nan() || g <= 0.0 {
        return Err(violation(format!("gamma must be positive, got {g}")));
    }
    // The inequalities hold for any number of operators, so failing them means
    // no realization exists; only then does the real two-operator form matter.
    let gap = -e0 - g;
    let slack = 1e-12 * s * s;
    if e0 > 0.0 || gap < -1e-12 * s || e0 * e0 - e1 * e1 - e2 * e2 - g * g < -slack {
        return Ok(None);
    }
    if e2.abs() > 1e-12 * s {
        return Err(CatalogError::UnsupportedRealization(e2));
    }
    let disc = e0 * e0 - e1 * e1 - g * g;
    let (cval, svals, cs, ds) = if gap <= 1e-12 * s {
        let d = (g / 4.0).sqrt();
        (0.0, None, [0.0, 0.0], [d, d])
    } else {
        let cval = (gap / 8.0).sqrt();
        let root = disc.max(0.0).sqrt();
        let sv = [(-e1 + root) / gap, (-e1 - root) / gap];
        (cval, Some(sv), [cval, cval], [cval * sv[0], cval * sv[1]])
    };
    let reconstructed = rebuild(cs, ds);
    let input = [g, e0, e1, e2];
    let err = reconstructed
        .iter()
        .zip(input.iter())
        .map(|(r, x)| (r - x).abs() / (1.0 + x.abs()))
        .fold(0.0, f64::max);
    if err > CP_RECONSTRUCTION_TOL {
        return Err(CatalogError::ReconstructionMismatch(err));
    }
    Ok(Some(CpWitness {
        c: cval,
        s: svals,
        c_coeffs: cs,
        d_coeffs: ds,
        reconstructed,
        reconstruction_error: err,
    }))
}

/// Image under (Q, P) → (P, −Q): θ₁, θ₂, η₁, η₂ change sign.
pub fn conjugate(c: &MasterEqCoefficients) -> MasterEqCoefficients {
    let [t0, t1, t2] = c.theta;
    let [e0, e1, e2] = c.eta;
    MasterEqCoefficients::new(c.gamma, [t0, -t1, -t2], [e0, -e1, -e2])
}
