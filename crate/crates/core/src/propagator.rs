//! Time-evolution operator in the 4D representation: closed form, ordered
//! exponential product, eigen-route cross-check and a brute-force matrix
//! exponential.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{MasterEqCoefficients, MinkVec3, dot, dot_re, wedge, wedge_re};
use crate::generators::{
    GeneratorName, Sympl4, assemble_k, assemble_k0, assemble_k1, generator_matrix, m_minus_matrix,
    m_plus_matrix, m0_matrix,
};
use crate::stationary::gamma_vector;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagatorError {
    #[error("singular denominator: {0}")]
    SingularDenominator(String),
    #[error("pole in m0 at t = {t}")]
    PoleInM0 { t: f64 },
    #[error("axis vector is not unit: theta_hat . theta_hat - 1 = {residual:e}")]
    NonUnitAxis { residual: f64 },
    #[error("matrix exponential overflow (norm {norm:e})")]
    NormOverflow { norm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Underdamped,
    CriticallyDamped,
    Overdamped,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Underdamped => "underdamped",
            Regime::CriticallyDamped => "critically_damped",
            Regime::Overdamped => "overdamped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaValue {
    pub omega_sq: f64,
    /// Principal root: real and non-negative for ω² ≥ 0, else +i√(−ω²).
    pub omega: Complex64,
    pub regime: Regime,
}

pub fn omega_of(c: &MasterEqCoefficients) -> OmegaValue {
    let omega_sq = dot_re(c.theta, c.theta);
    let omega = if omega_sq >= 0.0 {
        Complex64::new(omega_sq.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-omega_sq).sqrt())
    };
    let tol = 1e-12 * c.theta[0] * c.theta[0];
    let regime = if omega_sq.abs() <= tol {
        Regime::CriticallyDamped
    } else if omega_sq < 0.0 {
        Regime::Underdamped
    } else {
        Regime::Overdamped
    };
    OmegaValue { omega_sq, omega, regime }
}

/// θ̂ = θ/ω.
pub fn theta_hat(c: &MasterEqCoefficients) -> Result<MinkVec3, PropagatorError> {
    let w = omega_of(c).omega;
    if w.norm() <= 1e-300 {
        return Err(PropagatorError::SingularDenominator("theta_hat at omega = 0".into()));
    }
    Ok(c.theta_vec().scale(w.inv()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Π±(v) = v − θ̂(θ̂·v) ∓ θ̂∧v.
pub fn projector_pm(
    sign: Sign,
    v: &MinkVec3,
    theta_hat: &MinkVec3,
) -> Result<MinkVec3, PropagatorError> {
    let residual = (dot(theta_hat, theta_hat) - 1.0).norm();
    if residual > 1e-10 {
        return Err(PropagatorError::NonUnitAxis { residual });
    }
    Ok(projector_unchecked(sign, v, theta_hat))
}

fn projector_unchecked(sign: Sign, v: &MinkVec3, th: &MinkVec3) -> MinkVec3 {
    let base = *v - th.scale(dot(th, v));
    match sign {
        Sign::Plus => base - wedge(th, v),
        Sign::Minus => base + wedge(th, v),
    }
}

/// cosh(√w2·x) for real w2 of either sign.
pub(crate) fn even_cosh(w2: f64, x: f64) -> f64 {
    if w2 >= 0.0 {
        (w2.sqrt() * x).cosh()
    } else {
        ((-w2).sqrt() * x).cos()
    }
}

/// sinh(√w2·x)/√w2, continued through w2 = 0.
pub(crate) fn sinhc(w2: f64, x: f64) -> f64 {
    let z = w2 * x * x;
    if z.abs() < 1e-10 {
        x * (1.0 + z / 6.0 + z * z / 120.0)
    } else if w2 > 0.0 {
        let r = w2.sqrt();
        (r * x).sinh() / r
    } else {
        let r = (-w2).sqrt();
        (r * x).sin() / r
    }
}

/// sinh(x·t/2)/x with the three-term series near x = 0.
fn half_sinh_ratio(x: Complex64, t: f64, scale: f64) -> Complex64 {
    if x.norm() < 1e-7 * scale {
        let x2 = x * x;
        t / 2.0 + x2 * t.powi(3) / 48.0 + x2 * x2 * t.powi(5) / 3840.0
    } else {
        (x * (t / 2.0)).sinh() / x
    }
}

fn legendre_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(24).unwrap()))
}

/// Composite Gauss–Legendre on [a, b] with panels short enough for the
/// exponential rates involved.
fn integrate_panels<F: Fn(f64) -> f64>(a: f64, b: f64, rate: f64, f: F) -> f64 {
    let panels = ((rate * (b - a).abs()).ceil() as usize).clamp(1, 4096);
    let h = (b - a) / panels as f64;
    let rule = legendre_rule();
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * h;
            rule.integrate(lo, lo + h, &f)
        })
        .sum()
}

/// The pair (Sa+Sb, (Sa−Sb)/(ωγ)) with Sa = sinh((γ−ω)t/2)/(γ−ω) and
/// Sb = sinh((γ+ω)t/2)/(γ+ω), both entire in (γ², ω²).
fn sigma_weights(gamma: f64, w: &OmegaValue, t: f64) -> (f64, f64) {
    let scale = gamma.abs().max(w.omega.norm()).max(1.0);
    let g = Complex64::new(gamma, 0.0);
    let sa = half_sinh_ratio(g - w.omega, t, scale);
    let sb = half_sinh_ratio(g + w.omega, t, scale);
    let sum = (sa + sb).re;
    let product = (g * w.omega).norm();
    let diff = if product * t * t >= 1e-2 {
        ((sa - sb) / (g * w.omega)).re
    } else {
        let rate = gamma.abs().max(w.omega.norm());
        -2.0 * integrate_panels(0.0, t / 2.0, rate, |s| {
            sinhc(gamma * gamma, s) * sinhc(w.omega_sq, s)
        })
    };
    (sum, diff)
}

/// Σ(t), the coefficient vector of the raising generators in the closed form.
pub fn sigma_vector(c: &MasterEqCoefficients, t: f64) -> [f64; 3] {
    let w = omega_of(c);
    let (sum, diff) = sigma_weights(c.gamma, &w, t);
    let td = dot_re(c.theta, c.eta);
    let tw = wedge_re(c.theta, c.eta);
    std::array::from_fn(|k| sum * c.eta[k] - diff * td * c.theta[k] - c.gamma * diff * tw[k])
}

/// H = {K₀, K₁} = 2γK₀O₀ − 2i(θ·η)M₀O₊.
pub fn h_matrix(c: &MasterEqCoefficients) -> Sympl4 {
    let o0 = generator_matrix(GeneratorName::O0);
    let op = generator_matrix(GeneratorName::OPlus);
    assemble_k0(c) * o0 * (2.0 * c.gamma)
        - (m0_matrix() * op) * Complex64::new(0.0, 2.0 * dot_re(c.theta, c.eta))
}

/// e^{γt/2}·exp(−tK′) from the closed form.
pub fn propagator_closed_form(
    c: &MasterEqCoefficients,
    t: f64,
) -> Result<Sympl4, PropagatorError> {
    let gamma = c.gamma;
    let w = omega_of(c);
    let cw = even_cosh(w.omega_sq, t / 2.0);
    let sw = sinhc(w.omega_sq, t / 2.0);
    let cg = (gamma * t / 2.0).cosh();
    let sg = sinhc(gamma * gamma, t / 2.0);
    let sigma = sigma_vector(c, t);
    let inner = Sympl4::identity() * (cw * cg) + h_matrix(c) * (2.0 * sw * sg)
        - assemble_k0(c) * (2.0 * sw * cg)
        - generator_matrix(GeneratorName::O0) * (2.0 * cw * gamma * sg)
        - generator_matrix(GeneratorName::OPlus) * sigma[0]
        - generator_matrix(GeneratorName::L1Plus) * sigma[1]
        - generator_matrix(GeneratorName::L2Plus) * sigma[2];
    let out = inner * (gamma * t / 2.0).exp();
    if !out.is_finite() {
        return Err(PropagatorError::NormOverflow { norm: f64::INFINITY });
    }
    Ok(out)
}

/// Cross-check through the two-eigenvalue decomposition of K′; requires
/// ωγ ≠ 0 and γ ≠ ±ω.
pub fn propagator_eigen_route(
    c: &MasterEqCoefficients,
    t: f64,
) -> Result<Sympl4, PropagatorError> {
    let w = omega_of(c).omega;
    let g = Complex64::new(c.gamma, 0.0);
    let beta = w * g / 2.0;
    let scale = c.scale();
    if beta.norm() < 1e-8 * scale * scale || (g - w).norm() < 1e-8 * scale || (g + w).norm() < 1e-8 * scale {
        return Err(PropagatorError::SingularDenominator("eigen route needs distinct eigenvalues".into()));
    }
    let kp = assemble_k(c, false).matrix;
    let h = assemble_k0(c).anticommutator(&assemble_k1(c));
    let ah = (kp * h + h * kp) * 0.5;
    let cp = ((g + w) * (t / 2.0)).cosh();
    let cm = ((g - w) * (t / 2.0)).cosh();
    let sp = ((g + w) * (t / 2.0)).sinh() / (g + w);
    let sm = ((g - w) * (t / 2.0)).sinh() / (g - w);
    let body = Sympl4::identity() * ((cp + cm) * 0.5) + h * ((cp - cm) / (beta * 2.0))
        - kp * (sp + sm)
        - ah * ((sp - sm) / beta);
    Ok(body * (c.gamma * t / 2.0).exp())
}

/// Coefficients of the ordered exponential product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BchCoefficients {
    pub t: f64,
    pub h: f64,
    pub m0: Complex64,
    /// The root of m₀ used by the product (fixes the branch).
    pub sqrt_m0: Complex64,
    pub m_plus: Complex64,
    pub m_minus: Complex64,
    pub g: MinkVec3,
}

pub fn bch_coefficients(
    c: &MasterEqCoefficients,
    t: f64,
) -> Result<BchCoefficients, PropagatorError> {
    let w = omega_of(c);
    let [t0, t1, t2] = c.theta;
    let cw = even_cosh(w.omega_sq, t / 2.0);
    let sw = sinhc(w.omega_sq, t / 2.0);
    let denom = Complex64::new(cw, t0 * sw);
    if denom.norm() < 1e-14 * (1.0 + cw.abs()) {
        return Err(PropagatorError::PoleInM0 { t });
    }
    let sqrt_m0 = denom.inv();
    let m_plus = -(I * t1 + t2) * sw * sqrt_m0;
    let m_minus = -(I * t1 - t2) * sw * sqrt_m0;
    Ok(BchCoefficients {
        t,
        h: -c.gamma * t,
        m0: sqrt_m0 * sqrt_m0,
        sqrt_m0,
        m_plus,
        m_minus,
        g: g_vector(c, t)?,
    })
}

/// g(t), from the printed closed form away from its removable singularities
/// and from the integral representation near them.
pub fn g_vector(c: &MasterEqCoefficients, t: f64) -> Result<MinkVec3, PropagatorError> {
    if t == 0.0 {
        return Ok(MinkVec3::ZERO);
    }
    let w = omega_of(c);
    let gamma = c.gamma;
    let scale = gamma.abs().max(w.omega.norm()).max(1.0);
    let g = Complex64::new(gamma, 0.0);
    let regular = w.omega.norm() >= 1e-2 * scale
        && (g - w.omega).norm() >= 1e-3 * scale
        && (g + w.omega).norm() >= 1e-3 * scale
        && gamma.abs() >= 1e-3 * scale;
    if regular { g_vector_printed(c, t) } else { g_vector_integral(c, t) }
}

/// Γ + e^{−γt}/γ (θ̂·η)θ̂ + e^{−(γ−ω)t}/(2(γ−ω)) Π₊(η) + e^{−(γ+ω)t}/(2(γ+ω)) Π₋(η).
pub fn g_vector_printed(c: &MasterEqCoefficients, t: f64) -> Result<MinkVec3, PropagatorError> {
    let gam = gamma_vector(c)
        .map_err(|e| PropagatorError::SingularDenominator(e.to_string()))?;
    let th = theta_hat(c)?;
    let eta = c.eta_vec();
    let w = omega_of(c).omega;
    let g = Complex64::new(c.gamma, 0.0);
    let along = th.scale(dot(&th, &eta) * ((-c.gamma * t).exp() / c.gamma));
    let plus = projector_unchecked(Sign::Plus, &eta, &th);
    let minus = projector_unchecked(Sign::Minus, &eta, &th);
    let wp = (-(g - w) * t).exp() / ((g - w) * 2.0);
    let wm = (-(g + w) * t).exp() / ((g + w) * 2.0);
    Ok(MinkVec3::from_real(gam) + along + plus.scale(wp) + minus.scale(wm))
}

/// g(t) = −∫₀ᵗ e^{−γu} e^{−uθ∧} η du, evaluated as the exponential of the
/// augmented linear flow dg/dt = −η − γg − θ∧g.
pub fn g_vector_integral(c: &MasterEqCoefficients, t: f64) -> Result<MinkVec3, PropagatorError> {
    let [t0, t1, t2] = c.theta;
    let [e0, e1, e2] = c.eta;
    let gm = c.gamma;
    let flow = Matrix4::new(
        -gm, t2, -t1, -e0,
        t2, -gm, -t0, -e1,
        -t1, t0, -gm, -e2,
        0.0, 0.0, 0.0, 0.0,
    )
    .map(|x| Complex64::new(x * t, 0.0));
    let e = matrix_exp(&Sympl4(flow))?;
    Ok(MinkVec3::new(e.get(0, 3), e.get(1, 3), e.get(2, 3)))
}

/// Product of the seven ordered factors; equals e^{γt/2}·exp(−tK′).
pub fn propagator_from_bch(b: &BchCoefficients) -> Sympl4 {
    let id = Sympl4::identity();
    let o0 = generator_matrix(GeneratorName::O0);
    let raising = |name, coef: Complex64| id + generator_matrix(name) * coef;
    let half_h = b.h / 2.0;
    let damping = (id * half_h.cosh() + o0 * (2.0 * half_h.sinh())) * (-half_h).exp();
    let r = b.sqrt_m0;
    let rot = id * ((r + r.inv()) * 0.5) + m0_matrix() * (r - r.inv());
    raising(GeneratorName::L2Plus, b.g.v2)
        * raising(GeneratorName::L1Plus, b.g.v1)
        * raising(GeneratorName::OPlus, b.g.v0)
        * damping
        * (id + m_plus_matrix() * b.m_plus)
        * rot
        * (id + m_minus_matrix() * b.m_minus)
}

/// Scaling-and-squaring exponential with a degree-18 Taylor core.
pub fn matrix_exp(m: &Sympl4) -> Result<Sympl4, PropagatorError> {
    let norm = m.norm_inf();
    if !norm.is_finite() || norm > 700.0 {
        return Err(PropagatorError::NormOverflow { norm });
    }
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = m.0 / Complex64::new(2f64.powi(squarings), 0.0);
    let mut term = Matrix4::<Complex64>::identity();
    let mut sum = term;
    for k in 1..=18 {
        term = term * a / Complex64::new(k as f64, 0.0);
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    let out = Sympl4(sum);
    if !out.is_finite() {
        return Err(PropagatorError::NormOverflow { norm });
    }
    Ok(out)
}

/// e^{γt/2}·matrix_exp(−tK′), the brute-force reference.
pub fn propagator_by_exponential(
    c: &MasterEqCoefficients,
    t: f64,
) -> Result<Sympl4, PropagatorError> {
    let k = assemble_k(c, true);
    Ok(matrix_exp(&(k.matrix * -t))? * k.scalar_factor(t))
}
