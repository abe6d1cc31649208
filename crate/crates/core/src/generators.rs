//! 4×4 complex representations of the generator algebra and the symplectic
//! structure they preserve.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex64;

use crate::algebra::MasterEqCoefficients;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense 4×4 complex matrix with quadrant access.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sympl4(pub Matrix4<Complex64>);

impl Sympl4 {
    pub fn zero() -> Self {
        Sympl4(Matrix4::zeros())
    }

    pub fn identity() -> Self {
        Sympl4(Matrix4::identity())
    }

    pub fn from_blocks(
        b11: Matrix2<Complex64>,
        b12: Matrix2<Complex64>,
        b21: Matrix2<Complex64>,
        b22: Matrix2<Complex64>,
    ) -> Self {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&b11);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&b12);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&b21);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&b22);
        Sympl4(m)
    }

    pub fn from_real_diag(d: [f64; 4]) -> Self {
        let mut m = Matrix4::zeros();
        for (k, x) in d.iter().enumerate() {
            m[(k, k)] = Complex64::new(*x, 0.0);
        }
        Sympl4(m)
    }

    fn block(&self, r: usize, c: usize) -> Matrix2<Complex64> {
        self.0.fixed_view::<2, 2>(r, c).into_owned()
    }

    pub fn b11(&self) -> Matrix2<Complex64> {
        self.block(0, 0)
    }

    pub fn b12(&self) -> Matrix2<Complex64> {
        self.block(0, 2)
    }

    pub fn b21(&self) -> Matrix2<Complex64> {
        self.block(2, 0)
    }

    pub fn b22(&self) -> Matrix2<Complex64> {
        self.block(2, 2)
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.0[(r, c)]
    }

    /// Plain transpose, no conjugation.
    pub fn transpose(&self) -> Self {
        Sympl4(self.0.transpose())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Sympl4(self.0 * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum-row-sum norm, used for exponential scaling.
    pub fn norm_inf(&self) -> f64 {
        (0..4)
            .map(|r| (0..4).map(|c| self.0[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &Sympl4) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn commutator(&self, other: &Sympl4) -> Sympl4 {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Sympl4) -> Sympl4 {
        *self * *other + *other * *self
    }
}

impl Add for Sympl4 {
    type Output = Sympl4;
    fn add(self, rhs: Sympl4) -> Sympl4 {
        Sympl4(self.0 + rhs.0)
    }
}

impl Sub for Sympl4 {
    type Output = Sympl4;
    fn sub(self, rhs: Sympl4) -> Sympl4 {
        Sympl4(self.0 - rhs.0)
    }
}

impl Neg for Sympl4 {
    type Output = Sympl4;
    fn neg(self) -> Sympl4 {
        Sympl4(-self.0)
    }
}

impl Mul for Sympl4 {
    type Output = Sympl4;
    fn mul(self, rhs: Sympl4) -> Sympl4 {
        Sympl4(self.0 * rhs.0)
    }
}

impl Mul<Complex64> for Sympl4 {
    type Output = Sympl4;
    fn mul(self, s: Complex64) -> Sympl4 {
        self.scale(s)
    }
}

impl Mul<f64> for Sympl4 {
    type Output = Sympl4;
    fn mul(self, s: f64) -> Sympl4 {
        self.scale(s.into())
    }
}

impl Mul<Sympl4> for Complex64 {
    type Output = Sympl4;
    fn mul(self, m: Sympl4) -> Sympl4 {
        m.scale(self)
    }
}

impl Mul<Sympl4> for f64 {
    type Output = Sympl4;
    fn mul(self, m: Sympl4) -> Sympl4 {
        m.scale(self.into())
    }
}

/// Tags for the twenty basis matrices.
///
/// `L0`, `M1`, `M2` select the matrices of iL₀, iM₁, iM₂. The `J*` tags are
/// the auxiliary second-order operators in (Q, r): `JQSq` is Q²/2,
/// `JIQr` is iQr, `JDQSq` is ∂²/∂Q²/2, `JIQDr` is iQ∂/∂r, `JQDQ` is
/// Q∂/∂Q+½ and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorName {
    L0,
    M1,
    M2,
    O0,
    OPlus,
    L1Plus,
    L2Plus,
    OMinus,
    L1Minus,
    L2Minus,
    JQSq,
    JIQr,
    JRSq,
    JDQSq,
    JIDQDr,
    JDRSq,
    JIQDr,
    JIRDQ,
    JQDQ,
    JRDR,
}

impl GeneratorName {
    pub const ALL: [GeneratorName; 20] = [
        GeneratorName::L0,
        GeneratorName::M1,
        GeneratorName::M2,
        GeneratorName::O0,
        GeneratorName::OPlus,
        GeneratorName::L1Plus,
        GeneratorName::L2Plus,
        GeneratorName::OMinus,
        GeneratorName::L1Minus,
        GeneratorName::L2Minus,
        GeneratorName::JQSq,
        GeneratorName::JIQr,
        GeneratorName::JRSq,
        GeneratorName::JDQSq,
        GeneratorName::JIDQDr,
        GeneratorName::JDRSq,
        GeneratorName::JIQDr,
        GeneratorName::JIRDQ,
        GeneratorName::JQDQ,
        GeneratorName::JRDR,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            GeneratorName::L0 => "iL0",
            GeneratorName::M1 => "iM1",
            GeneratorName::M2 => "iM2",
            GeneratorName::O0 => "O0",
            GeneratorName::OPlus => "O+",
            GeneratorName::L1Plus => "L1+",
            GeneratorName::L2Plus => "L2+",
            GeneratorName::OMinus => "O-",
            GeneratorName::L1Minus => "L1-",
            GeneratorName::L2Minus => "L2-",
            GeneratorName::JQSq => "J(Q^2/2)",
            GeneratorName::JIQr => "J(iQr)",
            GeneratorName::JRSq => "J(r^2/2)",
            GeneratorName::JDQSq => "J(dQ^2/2)",
            GeneratorName::JIDQDr => "J(i dQ dr)",
            GeneratorName::JDRSq => "J(dr^2/2)",
            GeneratorName::JIQDr => "J(iQ dr)",
            GeneratorName::JIRDQ => "J(ir dQ)",
            GeneratorName::JQDQ => "J(Q dQ+1/2)",
            GeneratorName::JRDR => "J(r dr+1/2)",
        }
    }
}

impl fmt::Display for GeneratorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn m2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Matrix2<Complex64> {
    Matrix2::new(a, b, c, d)
}

fn r2(a: f64, b: f64, c: f64, d: f64) -> Matrix2<Complex64> {
    m2(a.into(), b.into(), c.into(), d.into())
}

fn sigma1() -> Matrix2<Complex64> {
    r2(0.0, 1.0, 1.0, 0.0)
}

fn sigma3() -> Matrix2<Complex64> {
    r2(1.0, 0.0, 0.0, -1.0)
}

fn raise() -> Matrix2<Complex64> {
    r2(0.0, 1.0, 0.0, 0.0)
}

fn lower() -> Matrix2<Complex64> {
    r2(0.0, 0.0, 1.0, 0.0)
}

fn upper_proj() -> Matrix2<Complex64> {
    r2(1.0, 0.0, 0.0, 0.0)
}

fn lower_proj() -> Matrix2<Complex64> {
    r2(0.0, 0.0, 0.0, 1.0)
}

/// The exact matrix attached to a basis tag.
pub fn generator_matrix(name: GeneratorName) -> Sympl4 {
    use GeneratorName::*;
    let z = Matrix2::<Complex64>::zeros();
    let id = Matrix2::<Complex64>::identity();
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    let two = Complex64::new(2.0, 0.0);
    let two_i = Complex64::new(0.0, 2.0);
    let (s1, s3, sp, sm, su, sd) = (sigma1(), sigma3(), raise(), lower(), upper_proj(), lower_proj());
    match name {
        L0 => Sympl4::from_blocks(z, s1, s1, z) * half_i,
        M1 => Sympl4::from_blocks(z, s1, -s1, z) * half_i,
        M2 => Sympl4::from_blocks(-id, z, z, id) * half,
        O0 => Sympl4::from_blocks(-s3, z, z, s3) * half,
        OPlus => Sympl4::from_blocks(z, sd, su, z) * -half,
        L1Plus => Sympl4::from_blocks(z, -sd, su, z) * half,
        L2Plus => Sympl4::from_blocks(-sm, z, z, sp) * half_i,
        OMinus => Sympl4::from_blocks(z, su, sd, z) * two,
        L1Minus => Sympl4::from_blocks(z, su, -sd, z) * two,
        L2Minus => Sympl4::from_blocks(sp, z, z, -sm) * two_i,
        JQSq => Sympl4::from_blocks(z, su, z, z),
        JIQr => Sympl4::from_blocks(z, s1, z, z) * I,
        JRSq => Sympl4::from_blocks(z, sd, z, z),
        JDQSq => Sympl4::from_blocks(z, z, -su, z),
        JIDQDr => Sympl4::from_blocks(z, z, -s1, z) * I,
        JDRSq => Sympl4::from_blocks(z, z, -sd, z),
        JIQDr => Sympl4::from_blocks(sp, z, z, -sm) * I,
        JIRDQ => Sympl4::from_blocks(sm, z, z, -sp) * I,
        JQDQ => Sympl4::from_blocks(su, z, z, -su),
        JRDR => Sympl4::from_blocks(sd, z, z, -sd),
    }
}

/// The skew form β = [[0, I], [−I, 0]].
pub fn beta() -> Sympl4 {
    let z = Matrix2::zeros();
    let id = Matrix2::identity();
    Sympl4::from_blocks(z, id, -id, z)
}

/// M₀ = iL₀ / i.
pub fn m0_matrix() -> Sympl4 {
    generator_matrix(GeneratorName::L0) * -I
}

/// M₁ = iM₁ / i.
pub fn m1_matrix() -> Sympl4 {
    generator_matrix(GeneratorName::M1) * -I
}

/// M₂ = iM₂ / i.
pub fn m2_matrix() -> Sympl4 {
    generator_matrix(GeneratorName::M2) * -I
}

/// M₊ = M₁ + iM₂.
pub fn m_plus_matrix() -> Sympl4 {
    m1_matrix() + m2_matrix() * I
}

/// M₋ = M₁ − iM₂.
pub fn m_minus_matrix() -> Sympl4 {
    m1_matrix() - m2_matrix() * I
}

/// Unitary part θ₀iL₀ + θ₁iM₁ + θ₂iM₂.
pub fn assemble_k0(c: &MasterEqCoefficients) -> Sympl4 {
    use GeneratorName::*;
    let [t0, t1, t2] = c.theta;
    generator_matrix(L0) * t0 + generator_matrix(M1) * t1 + generator_matrix(M2) * t2
}

/// Dissipative part γO₀ + η₀O₊ + η₁L₁₊ + η₂L₂₊ (without the scalar −γ/2).
pub fn assemble_k1(c: &MasterEqCoefficients) -> Sympl4 {
    use GeneratorName::*;
    let [e0, e1, e2] = c.eta;
    generator_matrix(O0) * c.gamma
        + generator_matrix(OPlus) * e0
        + generator_matrix(L1Plus) * e1
        + generator_matrix(L2Plus) * e2
}

/// Generator matrix plus the scalar part that the 4D representation cannot
/// carry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssembledK {
    pub matrix: Sympl4,
    /// Scalar added to the operator on top of `matrix`: −γ/2 when the shift
    /// is included, zero for the shifted generator K′.
    pub scalar_shift: f64,
}

impl AssembledK {
    /// Factor e^{−t·shift} multiplying exp(−t·matrix) in the full propagator.
    pub fn scalar_factor(&self, t: f64) -> f64 {
        (-t * self.scalar_shift).exp()
    }
}

pub fn assemble_k(c: &MasterEqCoefficients, include_identity_shift: bool) -> AssembledK {
    AssembledK {
        matrix: assemble_k0(c) + assemble_k1(c),
        scalar_shift: if include_identity_shift { -0.5 * c.gamma } else { 0.0 },
    }
}

/// H = {K₀, K₁} built from the matrices.
pub fn anticommutator_h(c: &MasterEqCoefficients) -> Sympl4 {
    assemble_k0(c).anticommutator(&assemble_k1(c))
}

/// max |Sᵀ β S − β|.
pub fn symplectic_check(s: &Sympl4) -> f64 {
    let b = beta();
    (s.transpose() * b * *s).max_diff(&b)
}

/// max |βJ − (βJ)ᵀ|; zero for elements of the Lie algebra.
pub fn generator_residual(j: &Sympl4) -> f64 {
    let bj = beta() * *j;
    bj.max_diff(&bj.transpose())
}

/// Least-squares expansion of `m` over the given basis matrices, returning the
/// coefficients and the max-norm residual.
pub fn project_onto(m: &Sympl4, basis: &[GeneratorName]) -> (Vec<Complex64>, f64) {
    let a = DMatrix::from_fn(16, basis.len(), |k, j| {
        generator_matrix(basis[j]).0[(k / 4, k % 4)]
    });
    let b = DVector::from_fn(16, |k, _| m.0[(k / 4, k % 4)]);
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-13).unwrap_or_else(|_| DVector::zeros(basis.len()));
    let residual = (a * &x - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    (x.iter().copied().collect(), residual)
}
