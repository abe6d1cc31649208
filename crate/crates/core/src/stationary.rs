//! Stationary states: the Γ vector, existence, well-behavedness, positivity,
//! the factorized condition and the Dekker comparison.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{MasterEqCoefficients, dot_re, wedge_re};
use crate::propagator::{Regime, omega_of};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StationaryError {
    #[error("stationary vector undefined: gamma = {gamma}, omega^2 = {omega_sq}")]
    SingularGamma { gamma: f64, omega_sq: f64 },
}

/// Outcome of an inequality `margin ≥ 0` with an absolute boundary band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Boundary,
    Fails,
}

pub const BOUNDARY_TOL: f64 = 1e-9;

impl Verdict {
    pub fn from_margin(margin: f64) -> Self {
        if margin.abs() <= BOUNDARY_TOL {
            Verdict::Boundary
        } else if margin > 0.0 {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    /// Holds or sits on the boundary.
    pub fn satisfied(&self) -> bool {
        !matches!(self, Verdict::Fails)
    }
}

/// Γ = (−γ²η + (θ·η)θ + γθ∧η) / (γ(γ²−ω²)).
pub fn gamma_vector(c: &MasterEqCoefficients) -> Result<[f64; 3], StationaryError> {
    let g = c.gamma;
    let w2 = dot_re(c.theta, c.theta);
    let gap = g * g - w2;
    if g == 0.0 || gap.abs() <= 1e-10 * (g * g).max(w2.abs()) {
        return Err(StationaryError::SingularGamma { gamma: g, omega_sq: w2 });
    }
    let td = dot_re(c.theta, c.eta);
    let tw = wedge_re(c.theta, c.eta);
    let pref = 1.0 / (g * gap);
    Ok(std::array::from_fn(|k| {
        pref * (-g * g * c.eta[k] + td * c.theta[k] + g * tw[k])
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExistenceReason {
    GammaNonpositive,
    OverdampedOmegaGeGamma,
    Ok,
}

impl ExistenceReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExistenceReason::GammaNonpositive => "gamma_nonpositive",
            ExistenceReason::OverdampedOmegaGeGamma => "overdamped_omega_ge_gamma",
            ExistenceReason::Ok => "ok",
        }
    }
}

pub fn existence(c: &MasterEqCoefficients) -> (bool, ExistenceReason) {
    if c.gamma <= 0.0 {
        return (false, ExistenceReason::GammaNonpositive);
    }
    let w = omega_of(c);
    if w.regime == Regime::Overdamped && w.omega.re >= c.gamma {
        return (false, ExistenceReason::OverdampedOmegaGeGamma);
    }
    (true, ExistenceReason::Ok)
}

/// Numerator of Γ₀−Γ₁ written out in components; its sign matches Γ₀−Γ₁
/// whenever the stationary state exists.
pub fn well_behaved_componentwise(c: &MasterEqCoefficients) -> f64 {
    let g = c.gamma;
    let [t0, t1, t2] = c.theta;
    let [e0, e1, e2] = c.eta;
    g * (-e0 + e1) * (g - t2) + (t0 - t1) * (-t0 * e0 + t1 * e1) - e2 * (t0 - t1) * (g - t2)
}

/// (θ·η)² − γ²η·η − γ²(γ²−θ·θ); non-negative iff −Γ·Γ ≥ 1 when the state
/// exists.
pub fn positivity_componentwise(c: &MasterEqCoefficients) -> f64 {
    let g2 = c.gamma * c.gamma;
    let [t0, t1, t2] = c.theta;
    let [e0, e1, e2] = c.eta;
    let td = -t0 * e0 + t1 * e1 + t2 * e2;
    td * td + g2 * (e0 * e0 - e1 * e1 - e2 * e2) - g2 * (g2 - dot_re(c.theta, c.theta))
}

/// |η₂(θ₂²−γ²) + η₀(−θ₀θ₂+γθ₁) + η₁(θ₁θ₂−γθ₀)| divided by the cube of the
/// coefficient scale.
pub fn factorized_residual(c: &MasterEqCoefficients) -> f64 {
    let g = c.gamma;
    let [t0, t1, t2] = c.theta;
    let [e0, e1, e2] = c.eta;
    let sep = e2 * (t2 * t2 - g * g) + e0 * (-t0 * t2 + g * t1) + e1 * (t1 * t2 - g * t0);
    sep.abs() / c.scale().powi(3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DekkerComparison {
    /// −η·η ≥ γ².
    pub dekker: Verdict,
    /// (θ·η)²/γ² + θ·θ − η·η ≥ γ².
    pub generic: Verdict,
}

pub fn dekker_vs_generic(c: &MasterEqCoefficients) -> DekkerComparison {
    let g2 = c.gamma * c.gamma;
    let ee = dot_re(c.eta, c.eta);
    let td = dot_re(c.theta, c.eta);
    let tt = dot_re(c.theta, c.theta);
    DekkerComparison {
        dekker: Verdict::from_margin(-ee - g2),
        generic: Verdict::from_margin(td * td / g2 + tt - ee - g2),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryReport {
    pub gamma_vec: Option<[f64; 3]>,
    pub exists: bool,
    pub reason: ExistenceReason,
    pub mu_st: Option<f64>,
    pub kappa_st: Option<f64>,
    pub nu_st: Option<f64>,
    pub well_behaved: Option<Verdict>,
    pub positive: Option<Verdict>,
    /// −Γ·Γ − 1, which carries the sign of ν_st for well-behaved states.
    pub positivity_margin: Option<f64>,
    pub factorized_residual: f64,
    pub gibbs: bool,
    /// Vector and componentwise forms give the same verdicts.
    pub forms_agree: bool,
}

pub fn stationary_params(c: &MasterEqCoefficients) -> StationaryReport {
    let (exists, reason) = existence(c);
    let gamma_vec = gamma_vector(c).ok();
    let mut report = StationaryReport {
        gamma_vec,
        exists,
        reason,
        mu_st: None,
        kappa_st: None,
        nu_st: None,
        well_behaved: None,
        positive: None,
        positivity_margin: None,
        factorized_residual: factorized_residual(c),
        gibbs: false,
        forms_agree: true,
    };
    let Some(gv) = gamma_vec.filter(|_| exists) else {
        return report;
    };
    let [g0, g1, g2] = gv;
    let diff = g0 - g1;
    let margin = -dot_re(gv, gv) - 1.0;
    report.mu_st = Some(1.0 / (2.0 * diff));
    report.kappa_st = Some(-g2 / diff);
    report.nu_st = Some(margin / (2.0 * diff));
    report.well_behaved = Some(if diff > 0.0 { Verdict::Holds } else { Verdict::Fails });
    report.positive = Some(Verdict::from_margin(margin));
    report.positivity_margin = Some(margin);
    report.gibbs = gibbs_vector(&gv, 1e-9);

    let denom = c.gamma * (c.gamma * c.gamma - dot_re(c.theta, c.theta));
    let diff_cw = well_behaved_componentwise(c) / denom;
    let margin_cw = positivity_componentwise(c) / (c.gamma * denom);
    let agree = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
    report.forms_agree = agree(diff, diff_cw) && agree(margin, margin_cw);
    report
}

pub(crate) fn gibbs_vector(gv: &[f64; 3], tol: f64) -> bool {
    gv[1].abs() <= tol * gv[0].abs() && gv[2].abs() <= tol * gv[0].abs()
}
