//! Time-dependent Gaussian parameters (μ, κ, ν) by the closed form, the ODE
//! system and the matrix pipeline, plus density, Wigner and moment
//! observables.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{MasterEqCoefficients, PhiContext, dot, phi};
use crate::generators::{Sympl4, assemble_k};
use crate::propagator::{
    PropagatorError, Sign, g_vector, matrix_exp, omega_of, projector_pm, propagator_closed_form,
    theta_hat,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolutionError {
    #[error("singular denominator D(t) = {value:e} at t = {t}")]
    SingularDenominator { t: f64, value: f64 },
    #[error("imaginary residue {residue:e} in {field} at t = {t}")]
    ImaginaryResidue { t: f64, field: &'static str, residue: f64 },
    #[error("integration left the stable region at t = {t} (mu = {mu:e})")]
    BlowUp { t: f64, mu: f64 },
    #[error("det D22 = {value:e} is singular at t = {t}")]
    SingularD22 { t: f64, value: f64 },
    #[error("normalization mismatch at t = {t}: {from_r} vs {from_det}")]
    NormalizationMismatch { t: f64, from_r: f64, from_det: f64 },
    #[error("Wigner function not normalizable: mu + nu = {0}")]
    NonNormalizable(f64),
    #[error("mu must be positive, got {0}")]
    NonPositiveMu(f64),
    #[error(transparent)]
    Propagator(#[from] PropagatorError),
}

/// Gaussian density matrix √(2μ/π)·exp(−2μQ² − iκQr − (μ+ν)r²/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianParams {
    pub mu: f64,
    pub kappa: f64,
    pub nu: f64,
}

impl GaussianParams {
    pub fn new(mu: f64, kappa: f64, nu: f64) -> Self {
        Self { mu, kappa, nu }
    }

    /// Figure shorthand: 4μ₀ = 1/b₀ and μ₀+ν₀ = b₀.
    pub fn from_b0(b0: f64, kappa0: f64) -> Self {
        let mu = 1.0 / (4.0 * b0);
        Self { mu, kappa: kappa0, nu: b0 - mu }
    }

    pub fn phi_context(&self) -> PhiContext {
        PhiContext::from_initial(self.mu, self.kappa, self.nu)
    }

    pub fn max_rel_diff(&self, other: &GaussianParams) -> f64 {
        let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + b.abs());
        rel(self.mu, other.mu)
            .max(rel(self.kappa, other.kappa))
            .max(rel(self.nu, other.nu))
    }

    fn require_positive_mu(&self) -> Result<(), EvolutionError> {
        if self.mu > 0.0 { Ok(()) } else { Err(EvolutionError::NonPositiveMu(self.mu)) }
    }
}

/// ⟨x²⟩, ⟨p²⟩ and ½⟨xp+px⟩ of a Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondMoments {
    pub xx: f64,
    pub pp: f64,
    pub xp_sym: f64,
}

impl SecondMoments {
    pub fn uncertainty_product(&self) -> f64 {
        self.xx * self.pp - self.xp_sym * self.xp_sym
    }
}

pub fn second_moments(p: &GaussianParams) -> SecondMoments {
    SecondMoments {
        xx: 1.0 / (4.0 * p.mu),
        pp: p.mu + p.nu + p.kappa * p.kappa / (4.0 * p.mu),
        xp_sym: -p.kappa / (4.0 * p.mu),
    }
}

pub fn density_at(p: &GaussianParams, q: f64, r: f64) -> Complex64 {
    let exponent = Complex64::new(
        -2.0 * p.mu * q * q - (p.mu + p.nu) * r * r / 2.0,
        -p.kappa * q * r,
    );
    (2.0 * p.mu / PI).sqrt() * exponent.exp()
}

pub fn wigner_at(p: &GaussianParams, q: f64, mom: f64) -> Result<f64, EvolutionError> {
    let s = p.mu + p.nu;
    if s <= 0.0 {
        return Err(EvolutionError::NonNormalizable(s));
    }
    let a = (4.0 * p.mu * s + p.kappa * p.kappa) / (2.0 * s);
    let exponent = -a * q * q - p.kappa / s * q * mom - mom * mom / (2.0 * s);
    Ok((p.mu / s).sqrt() / PI * exponent.exp())
}

/// Right-hand sides (dμ/dt, dκ/dt, d(μ+ν)/dt).
pub fn rates(c: &MasterEqCoefficients, mu: f64, kappa: f64, mu_nu: f64) -> [f64; 3] {
    let g = c.gamma;
    let [t0, t1, t2] = c.theta;
    let [e0, e1, e2] = c.eta;
    let dmu = (g + t2) * mu + (t0 - t1) * mu * kappa + 2.0 * (e0 - e1) * mu * mu;
    let dkappa = 0.5 * (t0 + t1) + t2 * kappa
        - 0.5 * (t0 - t1) * (4.0 * mu * mu_nu - kappa * kappa)
        + 2.0 * e2 * mu
        + 2.0 * (e0 - e1) * mu * kappa;
    let dmunu = -0.5 * (e0 + e1) - (g - t2) * mu_nu + (t0 - t1) * mu_nu * kappa
        - e2 * kappa
        - 0.5 * (e0 - e1) * kappa * kappa;
    [dmu, dkappa, dmunu]
}

/// The closed-form denominator, numerators and the largest summand of D.
struct ClosedFormParts {
    d: Complex64,
    d_leading: f64,
    mu: Complex64,
    kappa: Complex64,
    nu: Complex64,
}

fn closed_form_parts(
    c: &MasterEqCoefficients,
    init: &GaussianParams,
    t: f64,
) -> Result<ClosedFormParts, EvolutionError> {
    let ctx = init.phi_context();
    let th = theta_hat(c)?;
    let w = omega_of(c).omega;
    let g = g_vector(c, t)?;
    let (mu0, k0, nu0) = (init.mu, init.kappa, init.nu);
    let eg = (c.gamma * t).exp();
    let ewp = (w * t).exp() / 2.0;
    let ewm = (-w * t).exp() / 2.0;
    let phi_th = phi(&th, &ctx);

    let b_prime = th.v2 + k0 * (th.v0 - th.v1);
    let c_prime = (th.v0 - th.v1) * phi_th;
    let d_terms = [
        2.0 * mu0 * eg * (g.v0 - g.v1),
        -c_prime,
        ewp * (1.0 + c_prime - b_prime),
        ewm * (1.0 + c_prime + b_prime),
    ];
    let d: Complex64 = d_terms.iter().sum();
    let d_leading = d_terms.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let b = -0.5 * (th.v0 + th.v1) + 0.5 * ctx.delta0_sq * (th.v0 - th.v1);
    let cc = th.v2 * phi_th;
    let mu_num = Complex64::new(mu0 * eg, 0.0);
    let kappa_num = -2.0 * mu0 * eg * g.v2 + cc + ewp * (k0 - cc - b) + ewm * (k0 - cc + b);
    let pm = projector_pm(Sign::Minus, &g, &th)?;
    let pp = projector_pm(Sign::Plus, &g, &th)?;
    let nu_num = (mu0 + nu0) * (-c.gamma * t).exp() - mu0 * eg * (dot(&g, &g) + 1.0)
        + dot(&th, &g) * phi_th
        + ewp * phi(&pm, &ctx)
        + ewm * phi(&pp, &ctx);
    Ok(ClosedFormParts {
        d,
        d_leading,
        mu: mu_num / d,
        kappa: kappa_num / d,
        nu: nu_num / d,
    })
}

/// D(t) of the closed form.
pub fn denominator_at(
    c: &MasterEqCoefficients,
    init: &GaussianParams,
    t: f64,
) -> Result<Complex64, EvolutionError> {
    Ok(closed_form_parts(c, init, t)?.d)
}

/// Checks D(0) = 1 on a few fixed coefficient sets; returns the worst error.
pub fn normalization_self_test() -> Result<f64, f64> {
    let cases = [
        (
            MasterEqCoefficients::new(1.0, [2.0, 0.5, -1.0], [-2.0, -2.0, 0.3]),
            GaussianParams::new(1.0, 1.0, 1.0),
        ),
        (
            MasterEqCoefficients::new(0.7, [1.0, 0.9, 0.8], [-1.5, 0.2, 0.0]),
            GaussianParams::new(0.3, -0.4, 0.2),
        ),
        (
            MasterEqCoefficients::new(1.3, [3.0, 0.0, 0.0], [-2.6, 0.0, 0.0]),
            GaussianParams::from_b0(0.6, 1.0),
        ),
    ];
    let mut worst = 0.0f64;
    for (c, init) in cases {
        let d = denominator_at(&c, &init, 0.0).map_err(|_| f64::INFINITY)?;
        worst = worst.max((d - 1.0).norm());
    }
    if worst <= 1e-12 { Ok(worst) } else { Err(worst) }
}

fn check_residue(t: f64, field: &'static str, z: Complex64) -> Result<f64, EvolutionError> {
    if z.im.abs() > 1e-8 * (1.0 + z.re.abs()) || !z.re.is_finite() {
        return Err(EvolutionError::ImaginaryResidue { t, field, residue: z.im });
    }
    Ok(z.re)
}

/// μ = μ′/D, κ = κ′/D, ν = ν′/D.
///
/// Near ω = 0 the axis θ̂ is undefined, and the state is read off the closed-form
/// propagator instead.
pub fn evolve_closed_form(
    c: &MasterEqCoefficients,
    init: &GaussianParams,
    t: f64,
) -> Result<GaussianParams, EvolutionError> {
    init.require_positive_mu()?;
    let w = omega_of(c);
    let scale = c.gamma.abs().max(w.omega.norm()).max(1.0);
    if w.omega.norm() < 1e-2 * scale {
        let prop = propagator_closed_form(c, t)? * (-c.gamma * t / 2.0).exp();
        return from_propagator(&prop, c, init, t);
    }
    let parts = closed_form_parts(c, init, t)?;
    if parts.d.norm() < 1e-12 * parts.d_leading {
        return Err(EvolutionError::SingularDenominator { t, value: parts.d.norm() });
    }
    Ok(GaussianParams {
        mu: check_residue(t, "mu", parts.mu)?,
        kappa: check_residue(t, "kappa", parts.kappa)?,
        nu: check_residue(t, "nu", parts.nu)?,
    })
}

fn rk4_step(c: &MasterEqCoefficients, y: [f64; 3], h: f64) -> [f64; 3] {
    let f = |y: [f64; 3]| rates(c, y[0], y[1], y[2]);
    let add = |y: [f64; 3], k: [f64; 3], s: f64| std::array::from_fn(|i| y[i] + s * k[i]);
    let k1 = f(y);
    let k2 = f(add(y, k1, h / 2.0));
    let k3 = f(add(y, k2, h / 2.0));
    let k4 = f(add(y, k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn integrate_fixed(
    c: &MasterEqCoefficients,
    init: &GaussianParams,
    t: f64,
    steps: usize,
) -> Result<[f64; 3], EvolutionError> {
    let h = t / steps as f64;
    let mut y = [init.mu, init.kappa, init.mu + init.nu];
    for k in 0..steps {
        y = rk4_step(c, y, h);
        if !(y[0] > 1e-12 && y[0] < 1e12) || y.iter().any(|x| !x.is_finite()) {
            return Err(EvolutionError::BlowUp { t: (k + 1) as f64 * h, mu: y[0] });
        }
    }
    Ok(y)
}

/// Classical RK4 on (μ, κ, μ+ν), halving the step until two successive
/// answers agree to 1e−9 relative or the step reaches 1e−6.
pub fn evolve_ode(
    c: &MasterEqCoefficients,
    init: &GaussianParams,
    t: f64,
    dt: f64,
) -> Result<GaussianParams, EvolutionError> {
    init.require_positive_mu()?;
    if t == 0.0 {
        return Ok(*init);
    }
    let mut steps = ((t.abs() / dt).ceil() as usize).max(1);
    let mut prev = integrate_fixed(c, init, t, steps)?;
    loop {
        steps *= 2;
        let next = integrate_fixed(c, init, t, steps)?;
        let converged = prev
            .iter()
            .zip(next.iter())
            .all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        prev = next;
        if converged || t.abs() / steps as f64 <= 1e-6 {
            break;
        }
    }
    Ok(GaussianParams { mu: prev[0], kappa: prev[1], nu: prev[2] - prev[0] })
}

fn initial_r(init: &GaussianParams) -> Matrix2<Complex64> {
    let ik = Complex64::new(0.0, init.kappa);
    Matrix2::new(Complex64::new(4.0 * init.mu, 0.0), ik, ik, Complex64::new(init.mu + init.nu, 0.0))
}

/// Block product exp(−tK′)·ρ′(0) with ρ′(0) = [[I, −R₀], [0, I]].
pub fn pipeline_blocks(prop: &Sympl4, init: &GaussianParams) -> Sympl4 {
    let z = Matrix2::zeros();
    let id = Matrix2::identity();
    let rho = Sympl4::from_blocks(id, -initial_r(init), z, id);
    *prop * rho
}

fn from_propagator(
    prop: &Sympl4,
    c: &MasterEqCoefficients,
    init: &GaussianParams,
    t: f64,
) -> Result<GaussianParams, EvolutionError> {
    let d = pipeline_blocks(prop, init);
    let d22 = d.b22();
    let det = d22.determinant();
    if det.norm() < 1e-12 {
        return Err(EvolutionError::SingularD22 { t, value: det.norm() });
    }
    let inv = d22.try_inverse().ok_or(EvolutionError::SingularD22 { t, value: det.norm() })?;
    let r = -d.b12() * inv;
    let mu = r[(0, 0)] / 4.0;
    let kappa = r[(0, 1)] / Complex64::new(0.0, 1.0);
    let nu = r[(1, 1)] - mu;
    let mu_det = init.mu * (c.gamma * t).exp() / det;
    if (mu - mu_det).norm() > 1e-9 * (1.0 + mu.norm()) {
        return Err(EvolutionError::NormalizationMismatch { t, from_r: mu.re, from_det: mu_det.re });
    }
    Ok(GaussianParams {
        mu: check_residue(t, "mu", mu)?,
        kappa: check_residue(t, "kappa", kappa)?,
        nu: check_residue(t, "nu", nu)?,
    })
}

/// R = −D₁₂D₂₂⁻¹ read from the brute-force exponential of −tK′.
pub fn evolve_matrix_pipeline(
    c: &MasterEqCoefficients,
    init: &GaussianParams,
    t: f64,
) -> Result<GaussianParams, EvolutionError> {
    init.require_positive_mu()?;
    let prop = matrix_exp(&(assemble_k(c, false).matrix * -t))?;
    from_propagator(&prop, c, init, t)
}

/// Closed-form samples at the given times.
pub fn trajectory(
    c: &MasterEqCoefficients,
    init: &GaussianParams,
    times: &[f64],
) -> Result<Vec<(f64, GaussianParams)>, EvolutionError> {
    times.iter().map(|&t| Ok((t, evolve_closed_form(c, init, t)?))).collect()
}

/// n uniform samples on [0, t_max].
pub fn uniform_times(t_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinNu {
    pub t: f64,
    pub nu: f64,
}

pub const SCAN_POINTS: usize = 2000;

/// Horizon of the min-ν scan: max(20, 10/γ).
pub fn scan_horizon(c: &MasterEqCoefficients) -> f64 {
    if c.gamma > 0.0 { (10.0 / c.gamma).max(20.0) } else { 20.0 }
}

/// Minimum of ν(t) on the scan grid, refined by golden-section search.
pub fn min_nu_scan(c: &MasterEqCoefficients, init: &GaussianParams) -> Result<MinNu, EvolutionError> {
    let times = uniform_times(scan_horizon(c), SCAN_POINTS);
    let nus: Vec<f64> = times
        .iter()
        .map(|&t| evolve_closed_form(c, init, t).map(|p| p.nu))
        .collect::<Result<_, _>>()?;
    let (k, &nu_k) = nus
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("scan grid is non-empty");
    let mut best = MinNu { t: times[k], nu: nu_k };
    let lo = times[k.saturating_sub(1)];
    let hi = times[(k + 1).min(times.len() - 1)];
    if hi > lo {
        let f = |t: f64| evolve_closed_form(c, init, t).map(|p| p.nu);
        let (t, nu) = golden_section(lo, hi, f)?;
        if nu < best.nu {
            best = MinNu { t, nu };
        }
    }
    Ok(best)
}

fn golden_section<F>(mut a: f64, mut b: f64, f: F) -> Result<(f64, f64), EvolutionError>
where
    F: Fn(f64) -> Result<f64, EvolutionError>,
{
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..80 {
        if (b - a).abs() <= 1e-12 * (1.0 + b.abs()) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 < f2 { (x1, f1) } else { (x2, f2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::stationary_params;
    use gauss_quad::GaussHermite;
    use proptest::prelude::*;
    use std::num::NonZeroUsize;

    fn stable() -> impl Strategy<Value = MasterEqCoefficients> {
        (0.5f64..2.0, 0.5f64..3.0, -1.0f64..1.0, -2.0f64..2.0, -3.0f64..-0.2, -1.0f64..1.0, -2.0f64..2.0)
            .prop_map(|(g, t0, f1, t2, e0, f1e, e2)| {
                MasterEqCoefficients::new(g, [t0, f1 * t0 * 0.99, t2], [e0, f1e * e0.abs(), e2])
            })
            .prop_filter("stationary state exists and is well behaved", |c| {
                let r = stationary_params(c);
                r.exists && r.well_behaved.is_some_and(|v| v.satisfied())
                    && (omega_of(c).omega_sq < 0.0 || omega_of(c).omega.re < 0.5 * c.gamma)
            })
    }

    fn initial() -> impl Strategy<Value = GaussianParams> {
        (0.2f64..2.0, -1.0f64..1.0, 0.0f64..2.0).prop_map(|(m, k, n)| GaussianParams::new(m, k, n))
    }

    #[test]
    fn self_test_passes() {
        assert!(normalization_self_test().unwrap() <= 1e-12);
    }

    #[test]
    fn identity_at_zero() {
        let c = MasterEqCoefficients::new(1.0, [2.0, 0.5, -1.0], [-2.0, -2.0, 0.3]);
        let init = GaussianParams::new(0.7, -0.3, 0.4);
        assert!(evolve_closed_form(&c, &init, 0.0).unwrap().max_rel_diff(&init) < 1e-14);
        assert_eq!(evolve_ode(&c, &init, 0.0, 0.01).unwrap(), init);
        assert!(evolve_matrix_pipeline(&c, &init, 0.0).unwrap().max_rel_diff(&init) < 1e-14);
    }

    #[test]
    fn kl_relaxes_to_stationary_state() {
        let c = MasterEqCoefficients::new(1.0, [4.0, 0.0, 0.0], [-2.0, 0.0, 0.0]);
        let p = evolve_closed_form(&c, &GaussianParams::new(0.5, 0.0, 0.0), 30.0).unwrap();
        assert!((p.mu - 0.25).abs() < 1e-10);
        assert!(p.kappa.abs() < 1e-10);
        assert!((p.nu - 0.75).abs() < 1e-10);
    }

    #[test]
    fn negative_damping_blows_up() {
        let c = MasterEqCoefficients::new(-1.0, [4.0, 0.0, 0.0], [-2.0, 0.0, 0.0]);
        match evolve_ode(&c, &GaussianParams::new(0.5, 0.0, 0.0), 40.0, 0.01) {
            Err(EvolutionError::BlowUp { .. }) => {}
            Ok(p) => assert!(p.mu < 1e-10),
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn critical_regime_uses_propagator() {
        let c = MasterEqCoefficients::new(1.0, [2.0, 0.0, 2.0], [-1.5, 0.3, 0.2]);
        let init = GaussianParams::new(0.8, 0.2, 0.5);
        for t in [0.5, 2.0, 6.0] {
            let a = evolve_closed_form(&c, &init, t).unwrap();
            let b = evolve_ode(&c, &init, t, 0.01).unwrap();
            assert!(a.max_rel_diff(&b) < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn density_examples() {
        let ground = GaussianParams::new(0.5, 0.0, 0.0);
        assert!((density_at(&ground, 0.0, 0.0).re - (1.0 / PI).sqrt()).abs() < 1e-15);
        let p = GaussianParams::new(0.8, 0.6, 0.3);
        for (q, r) in [(0.3, 0.7), (-1.1, 0.2), (0.0, 1.5)] {
            assert!((density_at(&p, q, r) - density_at(&p, q, -r).conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn density_normalized_by_hermite() {
        let rule = GaussHermite::new(NonZeroUsize::new(200).unwrap());
        for p in [GaussianParams::new(0.5, 0.0, 0.0), GaussianParams::new(2.3, 1.0, -0.5), GaussianParams::new(0.07, -0.4, 3.0)] {
            // Substitute Q = x/√(2μ) so the weight e^{−x²} carries the Gaussian.
            let s = 1.0 / (2.0 * p.mu).sqrt();
            let total = rule.integrate(|x| density_at(&p, s * x, 0.0).re * (x * x).exp() * s);
            assert!((total - 1.0).abs() < 1e-10, "{p:?}: {total}");
        }
    }

    #[test]
    fn wigner_examples() {
        let ground = GaussianParams::new(0.5, 0.0, 0.0);
        for (q, m) in [(0.0f64, 0.0f64), (0.4, -1.2), (1.5, 0.3)] {
            let expected = (-q * q - m * m).exp() / PI;
            assert!((wigner_at(&ground, q, m).unwrap() - expected).abs() < 1e-15);
        }
        let p = GaussianParams::new(0.9, 0.0, 0.4);
        let s = p.mu + p.nu;
        for (q, m) in [(0.2, 0.5), (-0.7, 1.1)] {
            let f = (p.mu / PI).sqrt() * (-2.0 * p.mu * q * q).exp();
            let g = (-m * m / (2.0 * s)).exp() / (PI * s).sqrt();
            assert!((wigner_at(&p, q, m).unwrap() - f * g).abs() < 1e-12);
        }
        assert!(matches!(
            wigner_at(&GaussianParams::new(0.5, 0.0, -0.6), 0.0, 0.0),
            Err(EvolutionError::NonNormalizable(_))
        ));
    }

    #[test]
    fn wigner_normalized_by_hermite() {
        let rule = GaussHermite::new(NonZeroUsize::new(200).unwrap());
        for p in [GaussianParams::new(0.5, 0.0, 0.0), GaussianParams::new(1.4, 0.8, -0.3), GaussianParams::new(0.3, -1.2, 2.0)] {
            let s = p.mu + p.nu;
            // Complete the square in P for each Q, then integrate Q.
            let a = (4.0 * p.mu * s + p.kappa * p.kappa) / (2.0 * s);
            let qs = 1.0 / (a - p.kappa * p.kappa / (2.0 * s)).sqrt();
            let ps = (2.0 * s).sqrt();
            let total = rule.integrate(|x| {
                let q = qs * x;
                let shift = -p.kappa * q;
                rule.integrate(|y| {
                    let m = shift + ps * y;
                    wigner_at(&p, q, m).unwrap() * (y * y).exp() * ps
                }) * (x * x).exp() * qs
            });
            assert!((total - 1.0).abs() < 1e-8, "{p:?}: {total}");
        }
    }

    #[test]
    fn moments_examples() {
        let m = second_moments(&GaussianParams::new(0.5, 0.0, 0.0));
        assert_eq!((m.xx, m.pp, m.xp_sym), (0.5, 0.5, 0.0));
        assert_eq!(m.uncertainty_product(), 0.25);
        let m = second_moments(&GaussianParams::new(0.5, 1.0, 0.0));
        assert_eq!((m.xp_sym, m.pp), (-0.5, 1.0));
        assert!((m.uncertainty_product() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn b0_shorthand() {
        let p = GaussianParams::from_b0(0.6, 1.0);
        assert!((p.mu - 5.0 / 12.0).abs() < 1e-15);
        assert!((p.nu - (0.6 - 5.0 / 12.0)).abs() < 1e-15);
    }

    #[test]
    fn pipeline_block_relation() {
        let c = MasterEqCoefficients::new(1.2, [2.0, 0.4, -0.7], [-1.8, 0.5, 0.3]);
        let init = GaussianParams::new(0.6, 0.3, 0.9);
        for t in [0.4, 1.7, 4.0] {
            let prop = matrix_exp(&(assemble_k(&c, false).matrix * -t)).unwrap();
            let d = pipeline_blocks(&prop, &init);
            let rel = d.b11().transpose() * d.b22() - d.b21().transpose() * d.b12();
            assert!((rel - Matrix2::identity()).iter().all(|z| z.norm() < 1e-10));
        }
    }

    #[test]
    fn min_scan_finds_known_dip() {
        // Fig. 1 left, η₂ = −1.5: early-time dip below zero.
        let c = MasterEqCoefficients::new(1.0, [2.0, 0.5, -1.0], [-2.0, -2.0, -1.5]);
        let m = min_nu_scan(&c, &GaussianParams::new(1.0, 1.0, 1.0)).unwrap();
        assert!(m.nu < 0.0 && m.t > 0.0 && m.t < 5.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn three_routes_agree(c in stable(), init in initial(), t in 0.0f64..10.0) {
            let cf = evolve_closed_form(&c, &init, t).unwrap();
            let mp = evolve_matrix_pipeline(&c, &init, t).unwrap();
            let ode = evolve_ode(&c, &init, t, 0.01).unwrap();
            prop_assert!(cf.max_rel_diff(&mp) < 1e-8, "pipeline {:?} vs {:?}", mp, cf);
            prop_assert!(cf.max_rel_diff(&ode) < 1e-6, "ode {:?} vs {:?}", ode, cf);
        }

        #[test]
        fn closed_form_solves_rates(c in stable(), init in initial(), t in 0.1f64..10.0) {
            let d = 1e-5;
            let p = evolve_closed_form(&c, &init, t).unwrap();
            let a = evolve_closed_form(&c, &init, t + d).unwrap();
            let b = evolve_closed_form(&c, &init, t - d).unwrap();
            let fd = [(a.mu - b.mu) / (2.0 * d), (a.kappa - b.kappa) / (2.0 * d), (a.mu + a.nu - b.mu - b.nu) / (2.0 * d)];
            let rhs = rates(&c, p.mu, p.kappa, p.mu + p.nu);
            for k in 0..3 {
                prop_assert!((fd[k] - rhs[k]).abs() <= 1e-6 * (1.0 + rhs[k].abs()));
            }
        }

        #[test]
        fn relaxes_to_stationary(c in stable(), init in initial()) {
            let r = stationary_params(&c);
            let p = evolve_closed_form(&c, &init, 40.0 / c.gamma).unwrap();
            let st = GaussianParams::new(r.mu_st.unwrap(), r.kappa_st.unwrap(), r.nu_st.unwrap());
            prop_assert!(p.max_rel_diff(&st) < 1e-5);
        }

        #[test]
        fn mu_stays_positive(c in stable(), init in initial(), t in 0.0f64..20.0) {
            prop_assert!(evolve_closed_form(&c, &init, t).unwrap().mu > 0.0);
        }

        #[test]
        fn uncertainty_equivalence(mu in 0.01f64..5.0, kappa in -3.0f64..3.0, nu in -2.0f64..2.0) {
            let p = GaussianParams::new(mu, kappa, nu);
            let prod = second_moments(&p).uncertainty_product();
            prop_assert_eq!(nu >= 0.0, prod >= 0.25 - 1e-12 * (1.0 + prod.abs()));
            let m = second_moments(&p);
            prop_assert!((m.xx - 1.0 / (4.0 * mu)).abs() < 1e-15 * m.xx);
        }

        #[test]
        fn trajectory_uncertainty_tracks_nu(c in stable(), init in initial()) {
            for (_, p) in trajectory(&c, &init, &uniform_times(10.0, 40)).unwrap() {
                let prod = second_moments(&p).uncertainty_product();
                if p.nu.abs() > 1e-9 {
                    prop_assert_eq!(p.nu > 0.0, prod > 0.25);
                }
            }
        }
    }
}
