//! The η-integrand `det M / det(1 - e^{-tM}) · e^{-tω(M)}`, `M = R - 2ηL`,
//! its integral over the line or over `[-δ, δ]`, and the t→∞ limit.

use crate::error::{Direction, Error, Result};
use crate::exterior::{basis, index_sums, spectral_endomorphism, FormEndomorphism};
use crate::hermitian::{ln_bose_ratio, HermitianForm};
use crate::matrix::CMatrix;
use crate::poly::{poly_abs_scale, EtaPencil};
use crate::quadrature::{integrate, panel_breaks, QuadOptions};
use crate::scalar::{Real, C};

/// Pointwise data: Levi form, curvature form, the weight parameter β and a
/// volume quadrature weight.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvaturePoint<T> {
    pub levi: HermitianForm<T>,
    pub curvature: HermitianForm<T>,
    pub beta: T,
    pub weight: T,
}

impl<T: Real> CurvaturePoint<T> {
    pub fn new(levi: HermitianForm<T>, curvature: HermitianForm<T>) -> Result<Self> {
        if levi.n() != curvature.n() {
            return Err(Error::DimensionMismatch { expected: levi.n(), found: curvature.n() });
        }
        Ok(Self { levi, curvature, beta: T::zero(), weight: T::one() })
    }

    pub fn with_beta(mut self, beta: T) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_weight(mut self, weight: T) -> Result<Self> {
        if !(weight > T::zero()) || !weight.is_finite() {
            return Err(Error::InvalidParameter(format!("weight must be positive, got {weight}")));
        }
        self.weight = weight;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.levi.n()
    }

    /// `M(η) = R - 2ηL`.
    pub fn pencil_at(&self, eta: T) -> HermitianForm<T> {
        self.curvature.pencil_at(&self.levi, eta)
    }

    pub fn pencil(&self) -> Result<EtaPencil<T>> {
        EtaPencil::new(self.curvature.clone(), self.levi.clone())
    }

    pub fn levi_eigenvalues(&self) -> Result<Vec<T>> {
        Ok(self.levi.eig()?.eigenvalues)
    }
}

/// Exponential tail behaviour of the η-integrand: `|f(η)| ~ e^{-t·rate·|η|}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport<T> {
    pub plus_decays: bool,
    pub minus_decays: bool,
    pub rate_plus: T,
    pub rate_minus: T,
}

impl<T: Real> DecayReport<T> {
    pub fn both(&self) -> bool {
        self.plus_decays && self.minus_decays
    }

    pub fn require_both(&self) -> Result<()> {
        if !self.plus_decays {
            return Err(Error::DivergentIntegral { direction: Direction::Plus });
        }
        if !self.minus_decays {
            return Err(Error::DivergentIntegral { direction: Direction::Minus });
        }
        Ok(())
    }
}

/// Levi eigenvalues this close to zero count as zero.
fn levi_dead_band<T: Real>(lambda: &[T]) -> T {
    let max = lambda.iter().fold(T::zero(), |m, l| m.max(l.abs()));
    T::tol(1e-12) * (T::one() + max)
}

fn sign_counts<T: Real>(lambda: &[T]) -> (usize, usize) {
    let band = levi_dead_band(lambda);
    let pos = lambda.iter().filter(|&&l| l > band).count();
    let neg = lambda.iter().filter(|&&l| l < -band).count();
    (pos, neg)
}

/// Condition Y(q) on the Levi eigenvalues.
pub fn y_condition<T: Real>(lambda: &[T], q: usize) -> Result<bool> {
    let n = lambda.len();
    if n == 0 || q > n {
        return Err(Error::DegreeOutOfRange { n, q });
    }
    let (pos, neg) = sign_counts(lambda);
    let same = (n + 1 - q).max(q + 1);
    let mixed = (n + 1 - q).min(q + 1);
    Ok(pos >= same || neg >= same || pos.min(neg) >= mixed)
}

/// Decay of the degree-q integrand as `η → ±∞`.
pub fn tail_decay<T: Real>(levi: &HermitianForm<T>, q: usize) -> Result<DecayReport<T>> {
    let n = levi.n();
    if q > n {
        return Err(Error::DegreeOutOfRange { n, q });
    }
    let lambda = levi.eig()?.eigenvalues;
    let band = levi_dead_band(&lambda);
    let clean: Vec<T> = lambda.iter().map(|&l| if l.abs() <= band { T::zero() } else { l }).collect();
    // Per unit η the pencil eigenvalues grow like ν_j = ∓2λ_j.
    let rate = |sign: T| {
        let mut nu: Vec<T> = clean.iter().map(|&l| sign * T::lit(-2.0) * l).collect();
        nu.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        let negative: T = nu.iter().filter(|&&v| v < T::zero()).fold(T::zero(), |a, &v| a - v);
        let smallest: T = nu[..q].iter().fold(T::zero(), |a, &v| a + v);
        let r = negative + smallest;
        if r > band {
            r
        } else {
            T::zero()
        }
    };
    let (rp, rm) = (rate(T::one()), rate(-T::one()));
    Ok(DecayReport { plus_decays: rp > T::zero(), minus_decays: rm > T::zero(), rate_plus: rp, rate_minus: rm })
}

fn check_args<T: Real>(n: usize, q: usize, t: T) -> Result<()> {
    if q > n {
        return Err(Error::DegreeOutOfRange { n, q });
    }
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// `Π_j μ_j/(1 - e^{-tμ_j}) · e^{-tω(M)}` for `M = R - 2ηL`, finite at
/// pencil roots. The prefactor is combined with the exponential in the log
/// domain so that large `t` neither overflows nor underflows prematurely.
pub fn density_integrand<T: Real>(
    p: &CurvaturePoint<T>,
    q: usize,
    t: T,
    eta: T,
) -> Result<FormEndomorphism<T>> {
    check_args(p.n(), q, t)?;
    integrand_of(&p.pencil_at(eta), q, t)
}

pub(crate) fn integrand_of<T: Real>(m: &HermitianForm<T>, q: usize, t: T) -> Result<FormEndomorphism<T>> {
    let eig = m.eig()?;
    let b = basis(m.n(), q)?;
    let log_pref = eig.eigenvalues.iter().fold(T::zero(), |a, &mu| a + ln_bose_ratio(mu, t));
    let d: Vec<T> = index_sums(&eig.eigenvalues, &b).iter().map(|&s| (log_pref - t * s).exp()).collect();
    Ok(spectral_endomorphism(&eig, &b, &d))
}

/// Analytic bound on the integrand tails outside `[-H, H]`.
#[derive(Debug, Clone, Copy)]
pub struct TailBound<T> {
    n: usize,
    t: T,
    rate_plus: T,
    rate_minus: T,
    /// `1/t + ‖R‖`
    a: T,
    /// `2·max|λ|`
    b: T,
    /// `t·n·‖R‖`, the log of the eigenvalue-shift allowance
    shift: T,
}

impl<T: Real> TailBound<T> {
    pub fn new(p: &CurvaturePoint<T>, q: usize, t: T) -> Result<Self> {
        check_args(p.n(), q, t)?;
        let decay = tail_decay(&p.levi, q)?;
        let c = p.curvature.norm();
        let lmax = p.levi.eig()?.spectral_radius();
        Ok(Self {
            n: p.n(),
            t,
            rate_plus: decay.rate_plus,
            rate_minus: decay.rate_minus,
            a: T::one() / t + c,
            b: T::lit(2.0) * lmax,
            shift: t * T::count(p.n()) * c,
        })
    }

    /// Upper bound for `∫_{|η|>H} ‖integrand(η)‖ dη`, unnormalized. Infinite
    /// when either tail fails to decay.
    pub fn integral_beyond(&self, h: T) -> T {
        self.one_side(self.rate_plus, h) + self.one_side(self.rate_minus, h)
    }

    /// `∫_H^∞ (a + bη)^n e^{shift} e^{-tρη} dη` by the closed form
    /// `e^{-kH} Σ_m P^{(m)}(H)/k^{m+1}`, evaluated in logs.
    fn one_side(&self, rho: T, h: T) -> T {
        if !(rho > T::zero()) {
            return T::infinity();
        }
        let k = self.t * rho;
        let base = self.a + self.b * h;
        let mut logs = Vec::with_capacity(self.n + 1);
        let mut falling = T::zero();
        for m in 0..=self.n {
            if m > 0 {
                if self.b == T::zero() {
                    break;
                }
                falling = falling + T::count(self.n - m + 1).ln();
            }
            let bm = if m == 0 { T::zero() } else { T::count(m) * self.b.ln() };
            logs.push(falling + bm + T::count(self.n - m) * base.ln() - T::count(m + 1) * k.ln());
        }
        let top = logs.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
        let sum = logs.iter().fold(T::zero(), |acc, &l| acc + (l - top).exp());
        (top + sum.ln() + self.shift - k * h).exp()
    }
}

/// `(2π)^{-(n+1)}` normalized tail certificate of the density at window `H`.
pub fn tail_certificate<T: Real>(p: &CurvaturePoint<T>, q: usize, t: T, h: T) -> Result<T> {
    let b = TailBound::new(p, q, t)?;
    Ok(b.integral_beyond(h) * two_pi_pow::<T>(p.n() + 1).recip())
}

pub(crate) fn two_pi_pow<T: Real>(k: usize) -> T {
    (T::lit(2.0) * T::PI()).powi(k as i32)
}

/// Full-line integration of a flattened matrix-valued integrand: integrate
/// `[-H, H]`, then add shells `H < |η| ≤ 2H` until `cert(H)` drops below
/// `1e-12` of the accumulated value.
pub(crate) fn integrate_full_line<T, F>(
    f: &F,
    roots: &[T],
    max_width: Option<T>,
    cert: impl Fn(T) -> T,
    opts: &QuadOptions<T>,
) -> Result<(Vec<C<T>>, T)>
where
    T: Real,
    F: Fn(T) -> Vec<C<T>> + Sync,
{
    let rmax = roots.iter().fold(T::zero(), |m, r| m.max(r.abs()));
    let mut h = T::lit(2.0) * (T::one() + rmax);
    let width = |h: T| max_width.unwrap_or(T::PI()).min(h);
    let first = integrate(f, &panel_breaks(-h, h, roots, width(h)), opts)?;
    let mut acc = first.value;
    for _ in 0..64 {
        let bound = cert(h);
        let magnitude = acc.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        if bound <= T::tol(1e-12) * magnitude || bound <= T::min_positive_value() {
            return Ok((acc, bound));
        }
        let shell_opts = QuadOptions { abs_tol: opts.abs_tol.max(opts.rel_tol * magnitude), ..*opts };
        let shell_width = max_width.unwrap_or(h / T::lit(4.0));
        let h2 = h * T::lit(2.0);
        for (a, b) in [(-h2, -h), (h, h2)] {
            let part = integrate(f, &panel_breaks(a, b, roots, shell_width), &shell_opts)?;
            for (x, y) in acc.iter_mut().zip(part.value) {
                *x += y;
            }
        }
        h = h2;
    }
    Err(Error::MaxSubdivisions { limit: 64 })
}

/// Diagonal density `(2π)^{-(n+1)} ∫ density_integrand dη` over the line or
/// over `[-δ, δ]`.
pub fn density_diagonal<T: Real>(
    p: &CurvaturePoint<T>,
    q: usize,
    t: T,
    delta: Option<T>,
) -> Result<FormEndomorphism<T>> {
    density_diagonal_with(p, q, t, delta, &QuadOptions::default())
}

pub fn density_diagonal_with<T: Real>(
    p: &CurvaturePoint<T>,
    q: usize,
    t: T,
    delta: Option<T>,
    opts: &QuadOptions<T>,
) -> Result<FormEndomorphism<T>> {
    let n = p.n();
    check_args(n, q, t)?;
    let b = basis(n, q)?;
    let dim = b.len();
    let f = |eta: T| integrand_of(&p.pencil_at(eta), q, t).map(|e| e.matrix.into_vec());
    let f = |eta: T| f(eta).expect("Jacobi converges on Hermitian input");
    let norm = two_pi_pow::<T>(n + 1).recip();

    let value = match delta {
        Some(d) => {
            if !(d >= T::zero()) {
                return Err(Error::InvalidParameter(format!("delta must be nonnegative, got {d}")));
            }
            if p.beta != T::zero() {
                return Err(Error::NonRigidTruncation { beta: p.beta.to_f64().unwrap_or(f64::NAN) });
            }
            if d == T::zero() {
                return Ok(FormEndomorphism::zeros(b));
            }
            let roots = p.pencil()?.roots().unwrap_or_default();
            integrate(&f, &panel_breaks(-d, d, &roots, T::PI()), opts)?.value
        }
        None => {
            tail_decay(&p.levi, q)?.require_both()?;
            let roots = p.pencil()?.roots().unwrap_or_default();
            let bound = TailBound::new(p, q, t)?;
            integrate_full_line(&f, &roots, None, |h| bound.integral_beyond(h), opts)?.0
        }
    };
    let matrix = CMatrix::from_row_major(dim, dim, value.into_iter().map(|z| z * norm).collect());
    FormEndomorphism::new(b, matrix)
}

/// Pointwise `t → ∞` limit of the degree-j trace: `|det M(η)|` on the
/// signature-j set (j negative, n-j positive eigenvalues), zero elsewhere.
pub fn limit_integrand<T: Real>(p: &CurvaturePoint<T>, j: usize, eta: T) -> Result<T> {
    let n = p.n();
    if j > n {
        return Err(Error::DegreeOutOfRange { n, q: j });
    }
    let pencil = p.pencil()?;
    let value = pencil.eval(eta);
    if value.abs() < T::tol(1e-12) * poly_abs_scale(pencil.det_poly(), eta).max(T::one()) {
        return Err(Error::OnSignatureBoundary { eta: eta.to_f64().unwrap_or(f64::NAN) });
    }
    let sig = pencil.signature_at(eta)?;
    if sig.zeros == 0 && sig.negatives == j {
        Ok(pencil.det_direct(eta).abs())
    } else {
        Ok(T::zero())
    }
}

/// Real part of a trace whose imaginary part must be negligible.
pub(crate) fn real_trace<T: Real>(e: &FormEndomorphism<T>) -> Result<T> {
    let tr = e.trace();
    let scale = e.matrix.max_abs().max(T::min_positive_value());
    if tr.im.abs() > T::tol(1e-10) * scale.max(tr.re.abs()) && tr.im.abs() > T::tol(1e-10) {
        return Err(Error::ComplexResidue { imag: tr.im.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(tr.re)
}
