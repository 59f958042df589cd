//! Closed-form kernels: Mehler's formula on `ℂⁿ`, the η-fiber kernel of
//! `e^{-t□_η}`, and the Heisenberg heat kernel obtained by integrating the
//! fibers against `e^{iΔθ·η}`.

use crate::density::{integrand_of, integrate_full_line, tail_decay, two_pi_pow, CurvaturePoint, TailBound};
use crate::error::{Error, Result};
use crate::exterior::{basis, FormEndomorphism};
use crate::hermitian::{sinh_ratio, tanh_ratio, HermitianForm};
use crate::matrix::CMatrix;
use crate::quadrature::{integrate, panel_breaks, QuadOptions};
use crate::scalar::{Real, C};

/// Coordinate and measure conventions of the model space, kept in one place.
///
/// Real coordinates `x ∈ ℝ^{2n}` map to `z_j = x_{2j-1} + i·x_{2j}`. The
/// metric has `⟨∂x_j|∂x_k⟩ = 2δ_jk`, so `|x|² = 2Σx_j² = 2Σ|z_j|²`, and the
/// volume is `dv = 2ⁿ dx`.
#[derive(Debug, Clone, Copy)]
pub struct ModelConventions;

impl ModelConventions {
    /// `⟨∂x_j|∂x_j⟩`.
    pub const METRIC: f64 = 2.0;

    /// `dv/dx` on `ℂⁿ`.
    pub fn volume_factor<T: Real>(n: usize) -> T {
        T::lit(Self::METRIC).powi(n as i32)
    }

    /// A real quadratic form in the model metric, `½⟨Fx|x⟩`, equals
    /// `(METRIC/2)·z^†Fz` in complex coordinates.
    pub fn half_metric<T: Real>() -> T {
        T::lit(Self::METRIC / 2.0)
    }

    pub fn to_complex<T: Real>(x: &[T]) -> Vec<C<T>> {
        assert!(x.len() % 2 == 0, "real coordinates come in pairs");
        x.chunks(2).map(|p| C::new(p[0], p[1])).collect()
    }

    pub fn to_real<T: Real>(z: &[C<T>]) -> Vec<T> {
        z.iter().flat_map(|c| [c.re, c.im]).collect()
    }
}

/// A point `(z, θ)` of `H_n = ℂⁿ × ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergPoint<T> {
    pub z: Vec<C<T>>,
    pub theta: T,
}

impl<T: Real> HeisenbergPoint<T> {
    pub fn new(z: Vec<C<T>>, theta: T) -> Self {
        Self { z, theta }
    }

    pub fn origin(n: usize) -> Self {
        Self { z: vec![C::new(T::zero(), T::zero()); n], theta: T::zero() }
    }

    /// From `2n + 1` reals `(x_1, …, x_{2n}, θ)`.
    pub fn from_reals(coords: &[T]) -> Result<Self> {
        if coords.len() % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "expected 2n+1 coordinates, got {}",
                coords.len()
            )));
        }
        let (x, theta) = coords.split_at(coords.len() - 1);
        Ok(Self { z: ModelConventions::to_complex(x), theta: theta[0] })
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }
}

/// A kernel value on `Λ^q`, scalar prefactors folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelValue<T> {
    pub endo: FormEndomorphism<T>,
}

impl<T: Real> KernelValue<T> {
    pub fn scalar(&self) -> C<T> {
        self.endo.matrix[(0, 0)]
    }

    pub fn trace(&self) -> C<T> {
        self.endo.trace()
    }
}

fn hermitian_pair<T: Real>(m: &CMatrix<T>, u: &[C<T>], v: &[C<T>]) -> C<T> {
    // u^† M v, row by row without a temporary
    let cols = m.ncols();
    let data = m.as_slice();
    u.iter().enumerate().fold(C::new(T::zero(), T::zero()), |acc, (i, a)| {
        let row = data[i * cols..(i + 1) * cols].iter().zip(v).fold(C::new(T::zero(), T::zero()), |r, (&x, &y)| r + x * y);
        acc + a.conj() * row
    })
}

/// The time-`t` kernel of `□_η` for a fixed Hessian `M` and degree `q`,
/// with everything that does not depend on the points precomputed.
///
/// The Gaussian exponent is `-z^†Fz - w^†Fw + w^†G₊z + conj(w^†G₋z)` with
/// `F = (M/2)coth(tM/2)` and `G_± = (±M/2)e^{±tM/2}/sinh(tM/2)`, scaled by
/// the metric convention. Its real part is never positive.
#[derive(Debug, Clone)]
pub struct FiberKernel<T> {
    n: usize,
    f: CMatrix<T>,
    gp: CMatrix<T>,
    gm: CMatrix<T>,
    form: Vec<C<T>>,
    dim: usize,
    /// `form[0]·(2π)^{-n}`
    scalar_scale: C<T>,
}

impl<T: Real> FiberKernel<T> {
    pub fn new(m: &HermitianForm<T>, q: usize, t: T) -> Result<Self> {
        check_time(t)?;
        let eig = m.eig()?;
        let form = integrand_of(m, q, t)?;
        let dim = form.dim();
        let scalar_scale = form.matrix.as_slice()[0] * two_pi_pow::<T>(m.n()).recip();
        Ok(Self {
            n: m.n(),
            f: eig.apply(|mu| tanh_ratio(mu, t)),
            gp: eig.apply(|mu| sinh_ratio(mu, t)),
            gm: eig.apply(|mu| sinh_ratio(-mu, t)),
            form: form.matrix.into_vec(),
            dim,
            scalar_scale,
        })
    }

    /// Mehler's kernel of `e^{-tH}`, `H = 2□` on functions.
    pub fn mehler(a: &HermitianForm<T>, t: T) -> Result<Self> {
        check_time(t)?;
        Self::new(a, 0, T::lit(2.0) * t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Side length of the `Λ^q` matrix.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self, z: &[C<T>], w: &[C<T>]) -> C<T> {
        let quad = -hermitian_pair(&self.f, z, z) - hermitian_pair(&self.f, w, w)
            + hermitian_pair(&self.gp, w, z)
            + hermitian_pair(&self.gm, w, z).conj();
        quad * ModelConventions::half_metric::<T>()
    }

    /// Row-major entries without the `(2π)^{-n}` factor.
    pub fn eval_unscaled(&self, z: &[C<T>], w: &[C<T>]) -> Vec<C<T>> {
        let g = self.exponent(z, w).exp();
        self.form.iter().map(|&v| v * g).collect()
    }

    pub fn eval(&self, z: &[C<T>], w: &[C<T>]) -> Vec<C<T>> {
        let norm = two_pi_pow::<T>(self.n).recip();
        self.eval_unscaled(z, w).into_iter().map(|v| v * norm).collect()
    }

    /// The `(0,0)` entry, the whole kernel when `q = 0`.
    pub fn scalar(&self, z: &[C<T>], w: &[C<T>]) -> C<T> {
        self.scalar_scale * self.exponent(z, w).exp()
    }

    /// Same as [`Self::scalar`] at real coordinates.
    pub fn scalar_real(&self, x: &[T], y: &[T]) -> C<T> {
        // grid loops call this millions of times; skip the heap for small n
        const STACK: usize = 8;
        if self.n > STACK || x.len() != 2 * self.n || y.len() != 2 * self.n {
            return self.scalar(&ModelConventions::to_complex(x), &ModelConventions::to_complex(y));
        }
        let zero = C::new(T::zero(), T::zero());
        let (mut z, mut w) = ([zero; STACK], [zero; STACK]);
        for j in 0..self.n {
            z[j] = C::new(x[2 * j], x[2 * j + 1]);
            w[j] = C::new(y[2 * j], y[2 * j + 1]);
        }
        self.scalar(&z[..self.n], &w[..self.n])
    }
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    Ok(())
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Mehler's formula: the kernel of `e^{-tH}` where `H = 2□` for the
/// Hessian `A`, at real points `x, y ∈ ℝ^{2n}`.
pub fn mehler_kernel<T: Real>(a: &HermitianForm<T>, t: T, x: &[T], y: &[T]) -> Result<C<T>> {
    let n = a.n();
    check_len(2 * n, x.len())?;
    check_len(2 * n, y.len())?;
    Ok(FiberKernel::mehler(a, t)?.scalar_real(x, y))
}

/// `e^{-t□_η}(z, w)` before the `(2π)^{-n}` normalization, flattened.
fn fiber_unscaled<T: Real>(m: &HermitianForm<T>, q: usize, t: T, z: &[C<T>], w: &[C<T>]) -> Result<Vec<C<T>>> {
    Ok(FiberKernel::new(m, q, t)?.eval_unscaled(z, w))
}

/// Kernel of `e^{-t□_η}` on `(0,q)`-forms at `z, w ∈ ℂⁿ`.
pub fn boxeta_kernel<T: Real>(
    p: &CurvaturePoint<T>,
    eta: T,
    q: usize,
    t: T,
    z: &[C<T>],
    w: &[C<T>],
) -> Result<KernelValue<T>> {
    check_time(t)?;
    let n = p.n();
    check_len(n, z.len())?;
    check_len(n, w.len())?;
    let b = basis(n, q)?;
    let d = b.len();
    let norm = two_pi_pow::<T>(n).recip();
    let flat = fiber_unscaled(&p.pencil_at(eta), q, t, z, w)?;
    let matrix = CMatrix::from_row_major(d, d, flat.into_iter().map(|v| v * norm).collect());
    Ok(KernelValue { endo: FormEndomorphism::new(b, matrix)? })
}

/// `Φ₀(z) = z^†Rz`, the quadratic part of the weight at θ = 0.
pub fn phi0<T: Real>(curvature: &HermitianForm<T>, z: &[C<T>]) -> T {
    curvature.quadratic(z)
}

/// The η-independent factor `e^{(β/2)(Δθ + i(-z^†Lz + w^†Lw))}·e^{(Φ₀(z)-Φ₀(w))/2}`.
pub fn heisenberg_prefactor<T: Real>(
    p: &CurvaturePoint<T>,
    x: &HeisenbergPoint<T>,
    y: &HeisenbergPoint<T>,
) -> C<T> {
    let half = T::lit(0.5);
    let dtheta = x.theta - y.theta;
    let levi_phase = -p.levi.quadratic(&x.z) + p.levi.quadratic(&y.z);
    let re = half * p.beta * dtheta + half * (phi0(&p.curvature, &x.z) - phi0(&p.curvature, &y.z));
    let im = half * p.beta * levi_phase;
    C::from_polar(re.exp(), im)
}

/// Heisenberg heat kernel `(2π)^{-1} ∫ e^{iΔθη}·prefactor·e^{-t□_η}(z, w) dη`
/// over the line or `[-δ, δ]`.
pub fn heisenberg_heat_kernel<T: Real>(
    p: &CurvaturePoint<T>,
    q: usize,
    t: T,
    x: &HeisenbergPoint<T>,
    y: &HeisenbergPoint<T>,
    delta: Option<T>,
) -> Result<KernelValue<T>> {
    heisenberg_heat_kernel_with(p, q, t, x, y, delta, &QuadOptions::default())
}

pub fn heisenberg_heat_kernel_with<T: Real>(
    p: &CurvaturePoint<T>,
    q: usize,
    t: T,
    x: &HeisenbergPoint<T>,
    y: &HeisenbergPoint<T>,
    delta: Option<T>,
    opts: &QuadOptions<T>,
) -> Result<KernelValue<T>> {
    check_time(t)?;
    let n = p.n();
    check_len(n, x.n())?;
    check_len(n, y.n())?;
    let b = basis(n, q)?;
    let dim = b.len();
    let dtheta = x.theta - y.theta;
    // At Δθ = 0 this is π, the density's panel width, so the reductions to
    // the diagonal density are exact.
    let width = T::PI() / (T::lit(4.0) * dtheta.abs() + T::one());
    let f = |eta: T| {
        let phase = C::from_polar(T::one(), dtheta * eta);
        fiber_unscaled(&p.pencil_at(eta), q, t, &x.z, &y.z)
            .expect("Jacobi converges on Hermitian input")
            .into_iter()
            .map(|v| v * phase)
            .collect::<Vec<_>>()
    };

    let value = match delta {
        Some(d) => {
            if !(d >= T::zero()) {
                return Err(Error::InvalidParameter(format!("delta must be nonnegative, got {d}")));
            }
            if p.beta != T::zero() {
                return Err(Error::NonRigidTruncation { beta: p.beta.to_f64().unwrap_or(f64::NAN) });
            }
            if d == T::zero() {
                return Ok(KernelValue { endo: FormEndomorphism::zeros(b) });
            }
            let roots = p.pencil()?.roots().unwrap_or_default();
            integrate(&f, &panel_breaks(-d, d, &roots, width), opts)?.value
        }
        None => {
            tail_decay(&p.levi, q)?.require_both()?;
            let roots = p.pencil()?.roots().unwrap_or_default();
            // |gaussian| ≤ 1 and |phase| = 1, so the density bound applies.
            let bound = TailBound::new(p, q, t)?;
            let fixed = if dtheta == T::zero() { None } else { Some(width) };
            integrate_full_line(&f, &roots, fixed, |h| bound.integral_beyond(h), opts)?.0
        }
    };
    let scale = heisenberg_prefactor(p, x, y) * two_pi_pow::<T>(n + 1).recip();
    let matrix = CMatrix::from_row_major(dim, dim, value.into_iter().map(|v| v * scale).collect());
    Ok(KernelValue { endo: FormEndomorphism::new(b, matrix)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::density_diagonal;
    use crate::hermitian::bose_ratio;
    use crate::scalar::cre;
    use approx::assert_relative_eq;
    use num_complex::Complex;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn point(r: &[f64], l: &[f64]) -> CurvaturePoint<f64> {
        CurvaturePoint::new(HermitianForm::from_real_diagonal(l), HermitianForm::from_real_diagonal(r)).unwrap()
    }

    #[test]
    fn mehler_at_origin() {
        let a = HermitianForm::from_real_diagonal(&[1.0, -0.5]);
        let k = mehler_kernel(&a, 0.7, &[0.0; 4], &[0.0; 4]).unwrap();
        let want = bose_ratio(1.0, 1.4) * bose_ratio(-0.5, 1.4) / (2.0 * std::f64::consts::PI).powi(2);
        assert_relative_eq!(k.re, want, max_relative = 1e-14);
        assert_eq!(k.im, 0.0);
        let z = HermitianForm::from_real_diagonal(&[0.0]);
        let k = mehler_kernel(&z, 0.3, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_relative_eq!(k.re, 1.0 / (4.0 * std::f64::consts::PI * 0.3), max_relative = 1e-14);
    }

    #[test]
    fn mehler_hermitian_symmetry() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.gen_range(1..4);
            let mut m = CMatrix::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = cre(rng.gen_range(-2.0..2.0));
                for j in i + 1..n {
                    let c = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    m[(i, j)] = c;
                    m[(j, i)] = c.conj();
                }
            }
            let a = HermitianForm::from_matrix(m).unwrap();
            let x: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t = rng.gen_range(0.2..2.0);
            let kxy = mehler_kernel(&a, t, &x, &y).unwrap();
            let kyx = mehler_kernel(&a, t, &y, &x).unwrap();
            assert!((kxy - kyx.conj()).norm() < 1e-12 * kxy.norm().max(1e-300));
        }
    }

    #[test]
    fn boxeta_at_origin_matches_integrand() {
        let p = point(&[-1.0, 1.0], &[1.0, 1.0]);
        let z = vec![C::new(0.0, 0.0); 2];
        let k = boxeta_kernel(&p, 0.3, 1, 0.8, &z, &z).unwrap();
        let e = crate::density::density_integrand(&p, 1, 0.8, 0.3).unwrap();
        let want = e.matrix.scale_real((2.0 * std::f64::consts::PI).powi(-2));
        assert!(k.endo.matrix.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn boxeta_diagonal_positive() {
        let p = point(&[1.0, 0.5], &[0.5, 2.0]);
        let z = vec![C::new(0.4, -0.3), C::new(-1.0, 0.2)];
        for &eta in &[-1.0, 0.0, 0.7] {
            let k = boxeta_kernel(&p, eta, 0, 1.0, &z, &z).unwrap().scalar();
            assert!(k.re > 0.0 && k.im.abs() < 1e-15 * k.re);
        }
    }

    #[test]
    fn origin_reduces_to_density() {
        let p = point(&[-1.0, 1.0], &[1.0, 1.0]);
        let o = HeisenbergPoint::origin(2);
        let k = heisenberg_heat_kernel(&p, 1, 1.0, &o, &o, None).unwrap();
        let d = density_diagonal(&p, 1, 1.0, None).unwrap();
        assert_eq!(k.endo.matrix, d.matrix);
        let k = heisenberg_heat_kernel(&p, 0, 1.0, &o, &o, Some(1.5)).unwrap();
        let d = density_diagonal(&p, 0, 1.0, Some(1.5)).unwrap();
        assert_eq!(k.endo.matrix, d.matrix);
    }

    #[test]
    fn point_parsing() {
        let x = HeisenbergPoint::from_reals(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x.z, vec![C::new(1.0, 2.0)]);
        assert_eq!(x.theta, 3.0);
        assert!(HeisenbergPoint::from_reals(&[1.0, 2.0]).is_err());
    }
}
