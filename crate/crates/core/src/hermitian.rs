//! Dense Hermitian linear algebra for small dimensions: cyclic Jacobi
//! eigendecomposition and spectrally defined matrix functions.
//!
//! The matrix functions have removable singularities at zero eigenvalues
//! (`μ/(1-e^{-tμ}) → 1/t`). Near zero they switch to truncated series, so
//! they stay exact when the eigenvalue is exactly zero, which happens at
//! pencil roots.

use std::str::FromStr;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::{cre, Real, C};

const MAX_SWEEPS: usize = 100;
const SERIES_CUTOFF: f64 = 1e-4;
const LOG_DOMAIN_CUTOFF: f64 = 30.0;

/// An n×n complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm<T> {
    matrix: CMatrix<T>,
}

impl<T: Real> HermitianForm<T> {
    /// Validates Hermiticity to absolute tolerance `1e-10` and symmetrizes.
    pub fn new(n: usize, entries: Vec<C<T>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension n must be at least 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        Self::from_matrix(CMatrix::from_row_major(n, n, entries))
    }

    pub fn from_matrix(matrix: CMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidParameter("dimension n must be at least 1".into()));
        }
        let asym = matrix.hermitian_asymmetry();
        if !(asym <= T::tol(1e-10)) {
            return Err(Error::NonHermitian { asymmetry: asym.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self::symmetrized(matrix))
    }

    fn symmetrized(m: CMatrix<T>) -> Self {
        let n = m.nrows();
        let half = T::lit(0.5);
        let matrix = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                cre(m[(i, i)].re)
            } else {
                (m[(i, j)] + m[(j, i)].conj()).scale(half)
            }
        });
        Self { matrix }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        assert!(!diag.is_empty(), "empty diagonal");
        Self { matrix: CMatrix::from_real_diagonal(diag) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { matrix: CMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: CMatrix::identity(n) }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> C<T> {
        self.matrix[(i, j)]
    }

    /// `a·self + b·other`; real combinations of Hermitian forms stay Hermitian.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        assert_eq!(self.n(), other.n(), "combining forms of different size");
        let m = &self.matrix.scale_real(a) + &other.matrix.scale_real(b);
        Self::symmetrized(m)
    }

    pub fn scale(&self, a: T) -> Self {
        Self { matrix: self.matrix.scale_real(a) }
    }

    /// The pencil member `self - 2η·levi`.
    pub fn pencil_at(&self, levi: &Self, eta: T) -> Self {
        self.combine(T::one(), levi, -T::lit(2.0) * eta)
    }

    pub fn norm(&self) -> T {
        self.matrix.frobenius_norm()
    }

    /// Unitary conjugation `U·H·U^†`.
    pub fn conjugate_by(&self, u: &CMatrix<T>) -> Self {
        Self::symmetrized(&(u * &self.matrix) * &u.adjoint())
    }

    /// Quadratic form `v^† H v` (real).
    pub fn quadratic(&self, v: &[C<T>]) -> T {
        let hv = self.matrix.mul_vec(v);
        v.iter().zip(&hv).fold(T::zero(), |acc, (a, b)| acc + (a.conj() * b).re)
    }

    pub fn determinant(&self) -> T {
        self.matrix.determinant().re
    }

    pub fn eig(&self) -> Result<EigenSystem<T>> {
        eig_hermitian(self)
    }
}

/// Eigenvalues (ascending) and the unitary of column eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem<T> {
    pub eigenvalues: Vec<T>,
    pub unitary: CMatrix<T>,
}

impl<T: Real> EigenSystem<T> {
    /// `U·diag(f(μ_j))·U^†`.
    pub fn apply(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        let n = self.eigenvalues.len();
        let vals: Vec<T> = self.eigenvalues.iter().map(|&m| f(m)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            (0..n).fold(C::zero(), |acc, k| {
                acc + self.unitary[(i, k)] * self.unitary[(j, k)].conj() * vals[k]
            })
        })
    }

    pub fn reconstruct(&self) -> CMatrix<T> {
        self.apply(|m| m)
    }

    /// Spectral bound `max |μ_j|`.
    pub fn spectral_radius(&self) -> T {
        self.eigenvalues.iter().fold(T::zero(), |a, m| a.max(m.abs()))
    }
}

/// Cyclic Jacobi eigendecomposition of a Hermitian form.
pub fn eig_hermitian<T: Real>(h: &HermitianForm<T>) -> Result<EigenSystem<T>> {
    let n = h.n();
    let mut a = h.matrix().clone();
    let mut u = CMatrix::identity(n);
    let threshold = T::tol(1e-13) * a.frobenius_norm();

    let off_norm = |a: &CMatrix<T>| {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut u, p, q);
            }
        }
    }
    if !converged && off_norm(&a) > threshold {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).expect("finite eigenvalues"));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let unitary = CMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok(EigenSystem { eigenvalues, unitary })
}

/// One complex Jacobi rotation annihilating `a[p][q]`. The phase of `a[p][q]`
/// is removed first so the remaining rotation is the real symmetric one.
fn rotate<T: Real>(a: &mut CMatrix<T>, u: &mut CMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == T::zero() {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (T::lit(2.0) * mag);
    let t = if theta.abs() > T::lit(1e150) {
        T::one() / (T::lit(2.0) * theta)
    } else {
        let sgn = if theta < T::zero() { -T::one() } else { T::one() };
        sgn / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let ph_conj = phase.conj();

    // V = [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]] on the (p, q) block.
    let vpp = cre(c);
    let vpq = cre(s);
    let vqp = ph_conj * (-s);
    let vqq = ph_conj * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * vpp + akq * vqp;
        a[(k, q)] = akp * vpq + akq * vqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = vpp.conj() * apk + vqp.conj() * aqk;
        a[(q, k)] = vpq.conj() * apk + vqq.conj() * aqk;
    }
    a[(p, q)] = C::zero();
    a[(q, p)] = C::zero();
    a[(p, p)] = cre(a[(p, p)].re);
    a[(q, q)] = cre(a[(q, q)].re);

    for k in 0..n {
        let ukp = u[(k, p)];
        let ukq = u[(k, q)];
        u[(k, p)] = ukp * vpp + ukq * vqp;
        u[(k, q)] = ukp * vpq + ukq * vqq;
    }
}

/// The spectral functions available to [`matfun`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardedFn {
    /// μ ↦ e^{-tμ}
    ExpNeg,
    /// μ ↦ μ/(1 - e^{-tμ})
    BoseRatio,
    /// μ ↦ (μ/2)/tanh(tμ/2)
    TanhRatio,
    /// μ ↦ (μ/2)·e^{tμ/2}/sinh(tμ/2)
    SinhRatio,
}

impl GuardedFn {
    pub fn eval<T: Real>(self, mu: T, t: T) -> T {
        match self {
            GuardedFn::ExpNeg => (-t * mu).exp(),
            GuardedFn::BoseRatio => bose_ratio(mu, t),
            GuardedFn::TanhRatio => tanh_ratio(mu, t),
            GuardedFn::SinhRatio => sinh_ratio(mu, t),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GuardedFn::ExpNeg => "exp_neg",
            GuardedFn::BoseRatio => "bose_ratio",
            GuardedFn::TanhRatio => "tanh_ratio",
            GuardedFn::SinhRatio => "sinh_ratio",
        }
    }
}

impl FromStr for GuardedFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp_neg" => Ok(GuardedFn::ExpNeg),
            "bose_ratio" => Ok(GuardedFn::BoseRatio),
            "tanh_ratio" => Ok(GuardedFn::TanhRatio),
            "sinh_ratio" => Ok(GuardedFn::SinhRatio),
            other => Err(Error::UnknownFunction(other.to_string())),
        }
    }
}

/// `x/(1-e^{-x})` through order 6 (Bernoulli coefficients).
fn bose_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    T::one() + x / T::lit(2.0) + x2 / T::lit(12.0) - x2 * x2 / T::lit(720.0)
        + x2 * x2 * x2 / T::lit(30240.0)
}

/// `(x/2)·coth(x/2)` through order 6.
fn coth_series<T: Real>(x: T) -> T {
    let x2 = x * x;
    T::one() + x2 / T::lit(12.0) - x2 * x2 / T::lit(720.0) + x2 * x2 * x2 / T::lit(30240.0)
}

/// `μ/(1-e^{-tμ})`, valued `1/t` at `μ = 0`. Always positive.
pub fn bose_ratio<T: Real>(mu: T, t: T) -> T {
    let x = t * mu;
    if x.abs() < T::lit(SERIES_CUTOFF) {
        bose_series(x) / t
    } else if x > T::zero() {
        mu / -(-x).exp_m1()
    } else {
        mu * x.exp() / x.exp_m1()
    }
}

/// Natural logarithm of [`bose_ratio`], finite for every real `μ`.
pub fn ln_bose_ratio<T: Real>(mu: T, t: T) -> T {
    let x = t * mu;
    if x.abs() < T::lit(SERIES_CUTOFF) {
        bose_series(x).ln() - t.ln()
    } else if x > T::zero() {
        mu.ln() - (-(-x).exp()).ln_1p()
    } else {
        (-mu).ln() + x - (-x.exp()).ln_1p()
    }
}

/// `(μ/2)/tanh(tμ/2)`, valued `1/t` at `μ = 0`.
pub fn tanh_ratio<T: Real>(mu: T, t: T) -> T {
    let x = t * mu;
    if x.abs() < T::lit(SERIES_CUTOFF) {
        coth_series(x) / t
    } else {
        mu / T::lit(2.0) / (x / T::lit(2.0)).tanh()
    }
}

/// `(μ/2)·e^{tμ/2}/sinh(tμ/2)`, valued `1/t` at `μ = 0`; log-domain for
/// `|tμ| > 30`.
pub fn sinh_ratio<T: Real>(mu: T, t: T) -> T {
    let x = t * mu;
    let two = T::lit(2.0);
    if x.abs() < T::lit(SERIES_CUTOFF) {
        bose_series(x) / t
    } else if x.abs() > T::lit(LOG_DOMAIN_CUTOFF) {
        let y = (x / two).abs();
        let ln_sinh = y + (-(-two * y).exp()).ln_1p() - two.ln();
        ((mu / two).abs().ln() + x / two - ln_sinh).exp()
    } else {
        mu / two * (x / two).exp() / (x / two).sinh()
    }
}

/// Spectral calculus `U·diag(f(μ_j))·U^†` for a guarded function.
pub fn matfun<T: Real>(h: &HermitianForm<T>, f: GuardedFn, t: T) -> Result<CMatrix<T>> {
    if !(t > T::zero()) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    let eig = eig_hermitian(h)?;
    Ok(eig.apply(|mu| f.eval(mu, t)))
}

/// Same as [`matfun`] with the function named by its identifier.
pub fn matfun_named<T: Real>(h: &HermitianForm<T>, name: &str, t: T) -> Result<CMatrix<T>> {
    matfun(h, name.parse()?, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    pub(crate) fn random_hermitian(rng: &mut StdRng, n: usize, scale: f64) -> HermitianForm<f64> {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cre(rng.gen_range(-scale..scale));
            for j in i + 1..n {
                let z = Complex::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        HermitianForm::from_matrix(m).unwrap()
    }

    #[test]
    fn identity_spectrum() {
        let e = eig_hermitian(&HermitianForm::<f64>::identity(2)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);
        assert!(e.reconstruct().max_abs_diff(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn swap_matrix_spectrum() {
        let h = HermitianForm::new(2, vec![cre(0.0), cre(1.0), cre(1.0), cre(0.0)]).unwrap();
        let e = h.eig().unwrap();
        assert_relative_eq!(e.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(e.eigenvalues[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let r = HermitianForm::new(2, vec![cre(0.0), cre(1.0), cre(2.0), cre(0.0)]);
        assert!(matches!(r, Err(Error::NonHermitian { .. })));
        let r = HermitianForm::new(1, vec![Complex::new(1.0, 0.5)]);
        assert!(matches!(r, Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let h = random_hermitian(&mut rng, 4, 2.0);
            let e = h.eig().unwrap();
            let err = e.reconstruct().relative_diff(h.matrix(), 1e-300);
            assert!(err < 1e-11, "reconstruction error {err}");
            let gram = &e.unitary.adjoint() * &e.unitary;
            assert!(gram.max_abs_diff(&CMatrix::identity(4)) < 1e-12);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn larger_and_degenerate_inputs() {
        let mut rng = StdRng::seed_from_u64(11);
        let h = random_hermitian(&mut rng, 16, 1.0);
        let e = h.eig().unwrap();
        assert!(e.reconstruct().relative_diff(h.matrix(), 1e-300) < 1e-11);
        // repeated eigenvalue hidden by a random unitary
        let u = random_hermitian(&mut rng, 4, 1.0).eig().unwrap().unitary;
        let d = HermitianForm::from_real_diagonal(&[1.0, 1.0, 1.0, 2.0]).conjugate_by(&u);
        let e = d.eig().unwrap();
        for (a, b) in e.eigenvalues.iter().zip([1.0, 1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn f32_jacobi_converges() {
        let h = HermitianForm::<f32>::new(
            3,
            vec![
                cre(2.0), Complex::new(0.5, 0.5), cre(0.0),
                Complex::new(0.5, -0.5), cre(-1.0), Complex::new(0.0, 0.25),
                cre(0.0), Complex::new(0.0, -0.25), cre(0.5),
            ],
        )
        .unwrap();
        let e = h.eig().unwrap();
        assert!(e.reconstruct().relative_diff(h.matrix(), 1e-30) < 1e-5);
    }

    #[test]
    fn guarded_limits_at_zero() {
        assert_eq!(bose_ratio(0.0, 2.0), 0.5);
        assert_eq!(tanh_ratio(0.0, 2.0), 0.5);
        assert_eq!(sinh_ratio(0.0, 2.0), 0.5);
        assert_relative_eq!(ln_bose_ratio(0.0, 2.0), 0.5f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn guarded_functions_continuous_across_series_switch() {
        for &t in &[0.3, 1.0, 7.0] {
            for &sign in &[-1.0, 1.0] {
                let below = sign * 0.999_999e-4 / t;
                let above = sign * 1.000_001e-4 / t;
                for f in [GuardedFn::BoseRatio, GuardedFn::TanhRatio, GuardedFn::SinhRatio] {
                    let (a, b): (f64, f64) = (f.eval(below, t), f.eval(above, t));
                    assert!((a - b).abs() < 1e-9 * a.abs(), "{} jumps at t={t}", f.name());
                }
            }
        }
    }

    #[test]
    fn sinh_ratio_equals_bose_ratio_everywhere() {
        for &x in &[-800.0, -40.0, -31.0, -29.0, -1.0, -1e-5, 1e-5, 0.7, 29.0, 31.0, 45.0, 800.0] {
            let (a, b): (f64, f64) = (sinh_ratio(x, 1.0), bose_ratio(x, 1.0));
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "x = {x}: {a} vs {b}");
            if a > 1e-300 {
                assert_relative_eq!(ln_bose_ratio(x, 1.0), a.ln(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn bose_ratio_never_overflows() {
        assert!(bose_ratio(-1e4, 1.0) >= 0.0);
        assert_relative_eq!(bose_ratio(1e4, 1.0), 1e4);
        assert_relative_eq!(ln_bose_ratio(-1e4, 1.0), 1e4f64.ln() - 1e4, max_relative = 1e-14);
    }

    #[test]
    fn matfun_examples() {
        let z = HermitianForm::<f64>::zeros(2);
        let e = matfun(&z, GuardedFn::ExpNeg, 1.0).unwrap();
        assert!(e.max_abs_diff(&CMatrix::identity(2)) < 1e-15);

        let s = HermitianForm::from_real_diagonal(&[0.0]);
        let b = matfun(&s, GuardedFn::BoseRatio, 2.0).unwrap();
        assert_eq!(b[(0, 0)].re, 0.5);

        let d = HermitianForm::from_real_diagonal(&[1.0, -1.0]);
        let b = matfun(&d, GuardedFn::BoseRatio, 1.0).unwrap();
        let expect0 = 1.0 / (1.0 - (-1.0f64).exp());
        let expect1 = -1.0 / (1.0 - 1.0f64.exp());
        assert_relative_eq!(b[(0, 0)].re, expect0, max_relative = 1e-14);
        assert_relative_eq!(b[(1, 1)].re, expect1, max_relative = 1e-14);
        assert_relative_eq!(b[(0, 0)].re, 1.581977, epsilon = 1e-6);
        assert_relative_eq!(b[(1, 1)].re, 0.581977, epsilon = 1e-6);
    }

    #[test]
    fn matfun_rejects_unknown_and_nonpositive_time() {
        let d = HermitianForm::from_real_diagonal(&[1.0]);
        assert!(matches!(matfun_named(&d, "cosh", 1.0), Err(Error::UnknownFunction(_))));
        assert!(matches!(matfun(&d, GuardedFn::ExpNeg, 0.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn bose_determinant_matches_product() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let h = random_hermitian(&mut rng, 3, 1.5);
            let t = rng.gen_range(0.1..2.0);
            let det = matfun(&h, GuardedFn::BoseRatio, t).unwrap().determinant().re;
            let prod: f64 = h.eig().unwrap().eigenvalues.iter().map(|&m| bose_ratio(m, t)).product();
            assert_relative_eq!(det, prod, max_relative = 1e-10);
        }
    }

    #[test]
    fn exp_neg_is_a_one_parameter_group() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..1000 {
            let n = rng.gen_range(1..5);
            let h = random_hermitian(&mut rng, n, 1.5);
            let (a, b) = (rng.gen_range(0.01..1.5), rng.gen_range(0.01..1.5));
            let ab = matfun(&h, GuardedFn::ExpNeg, a + b).unwrap();
            let prod = &matfun(&h, GuardedFn::ExpNeg, a).unwrap() * &matfun(&h, GuardedFn::ExpNeg, b).unwrap();
            assert!(ab.max_abs_diff(&prod) < 1e-10 * ab.max_abs().max(1.0));
        }
    }
}
