//! Finite-difference residual of the heat equation `∂_t K + □K = 0`.

use crate::density::CurvaturePoint;
use crate::error::{Error, Result};
use crate::exterior::omega_endomorphism;
use crate::heisenberg::ModelConventions;
use crate::hermitian::HermitianForm;
use crate::matrix::CMatrix;
use crate::scalar::{Real, C};

/// `scale·□` acting on the first argument of a kernel, for a Hessian `M`:
/// `Σ_j [-¼Δ_j - ½M_jj - ½(Mz)_j ∂_j + ½conj((Mz)_j) ∂̄_j + ¼|(Mz)_j|²]`
/// on each entry, plus `ω(M)` from the left on the `Λ^q` index.
#[derive(Debug, Clone)]
pub struct BoxOperator<T> {
    m: HermitianForm<T>,
    omega: CMatrix<T>,
    scale: T,
}

impl<T: Real> BoxOperator<T> {
    pub fn boxeta(p: &CurvaturePoint<T>, eta: T, q: usize) -> Result<Self> {
        let m = p.pencil_at(eta);
        let omega = omega_endomorphism(&m, q)?.matrix;
        Ok(Self { m, omega, scale: T::one() })
    }

    /// `H = 2□` on functions, the generator in Mehler's formula.
    pub fn mehler(a: &HermitianForm<T>) -> Self {
        Self { m: a.clone(), omega: CMatrix::zeros(1, 1), scale: T::lit(2.0) }
    }

    /// Applies the operator at `x ∈ ℝ^{2n}` with fourth-order differences
    /// of step `h`. `f` returns a row-major `d×d` matrix.
    pub fn apply(&self, f: &dyn Fn(&[T]) -> Vec<C<T>>, x: &[T], h: T) -> Vec<C<T>> {
        let n = self.m.n();
        let d = self.omega.nrows();
        let center = f(x);
        let mut out: Vec<C<T>> = vec![C::new(T::zero(), T::zero()); center.len()];
        let z = ModelConventions::to_complex(x);
        let mz = self.m.matrix().mul_vec(&z);
        let shifted = |k: usize, s: T| {
            let mut y = x.to_vec();
            y[k] += s * h;
            f(&y)
        };
        let (c8, c12, c16, c30) = (T::lit(8.0), T::lit(12.0), T::lit(16.0), T::lit(30.0));
        let (half, quarter) = (T::lit(0.5), T::lit(0.25));
        let i = C::new(T::zero(), T::one());
        for j in 0..n {
            let mut d1 = [vec![], vec![]];
            let mut d2 = [vec![], vec![]];
            for axis in 0..2 {
                let k = 2 * j + axis;
                let (p1, m1, p2, m2) = (shifted(k, T::one()), shifted(k, -T::one()), shifted(k, T::lit(2.0)), shifted(k, -T::lit(2.0)));
                d1[axis] = (0..center.len()).map(|e| (-p2[e] + p1[e] * c8 - m1[e] * c8 + m2[e]) / (c12 * h)).collect();
                d2[axis] = (0..center.len())
                    .map(|e| (-p2[e] + p1[e] * c16 - center[e] * c30 + m1[e] * c16 - m2[e]) / (c12 * h * h))
                    .collect();
            }
            let mjj = self.m.entry(j, j).re;
            for e in 0..center.len() {
                let del = (d1[0][e] - i * d1[1][e]) * half;
                let delbar = (d1[0][e] + i * d1[1][e]) * half;
                let lap = d2[0][e] + d2[1][e];
                out[e] += -lap * quarter - center[e] * (half * mjj) - mz[j] * del * half
                    + mz[j].conj() * delbar * half
                    + center[e] * (quarter * mz[j].norm_sqr());
            }
        }
        for a in 0..d {
            for b in 0..d {
                let mut s = C::new(T::zero(), T::zero());
                for c in 0..d {
                    s += self.omega[(a, c)] * center[c * d + b];
                }
                out[a * d + b] += s;
            }
        }
        out.into_iter().map(|v| v * self.scale).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport<T> {
    /// `max |∂_t K + □K|` at step `h`.
    pub residual: T,
    /// The same at step `2h`.
    pub coarse_residual: T,
    /// Predicted discretization part of `residual` (fourth order).
    pub error_estimate: T,
}

/// Residual of `∂_t K + □K` at each probe pair `(x, y)`, `x` varying.
/// `make(t)` builds the time-`t` kernel.
pub fn heat_residual_check<T, F, K>(
    make: F,
    op: &BoxOperator<T>,
    t: T,
    probes: &[(Vec<T>, Vec<T>)],
    h: T,
    dt: T,
) -> Result<ResidualReport<T>>
where
    T: Real,
    F: Fn(T) -> Result<K>,
    K: Fn(&[T], &[T]) -> Vec<C<T>>,
{
    if t < T::lit(0.5) {
        return Err(Error::InvalidParameter(format!("residual check needs t >= 0.5, got {t}")));
    }
    if !(h > T::zero() && dt > T::zero() && T::lit(2.0) * dt < t) {
        return Err(Error::InvalidParameter("steps must be positive and 2*dt < t".into()));
    }
    let k0 = make(t)?;
    let times = [make(t + T::lit(2.0) * dt)?, make(t + dt)?, make(t - dt)?, make(t - T::lit(2.0) * dt)?];
    let mut fine = T::zero();
    let mut coarse = T::zero();
    for (x, y) in probes {
        let (p2, p1, m1, m2) = (times[0](x, y), times[1](x, y), times[2](x, y), times[3](x, y));
        let dkdt: Vec<C<T>> = (0..p1.len())
            .map(|e| (-p2[e] + p1[e] * T::lit(8.0) - m1[e] * T::lit(8.0) + m2[e]) / (T::lit(12.0) * dt))
            .collect();
        let f = |u: &[T]| k0(u, y);
        for (step, slot) in [(h, &mut fine), (T::lit(2.0) * h, &mut coarse)] {
            let bk = op.apply(&f, x, step);
            for (a, b) in dkdt.iter().zip(&bk) {
                *slot = slot.max((*a + *b).norm());
            }
        }
    }
    Ok(ResidualReport { residual: fine, coarse_residual: coarse, error_estimate: coarse / T::lit(16.0) })
}
