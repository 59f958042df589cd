//! Time stepping of `∂_t u + □_η u = 0` on functions over `ℂ¹ ≅ ℝ²`.
//!
//! For `M(η) = [a]`, `□_η = -¼Δ + (ia/2)(x∂_y - y∂_x) + ¼a²(x² + y²) - a/2`.
//! It is split as `A_x + A_y` with
//! `A_x = -¼∂_x² - (ia/2)y∂_x + ¼a²x² - a/4` and
//! `A_y = -¼∂_y² + (ia/2)x∂_y + ¼a²y² - a/4`,
//! each discretized by centered second-order differences with zero Dirichlet
//! data, and advanced by the Peaceman–Rachford form of Crank–Nicolson:
//! an implicit x-sweep then an implicit y-sweep per step, always in that order.

use rayon::prelude::*;

use crate::density::CurvaturePoint;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Square grid `[-half_width, half_width]^2` with time step `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub half_width: T,
    pub spacing: T,
    pub dt: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(half_width: T, spacing: T, dt: T) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(half_width > T::zero() && spacing > T::zero() && dt > T::zero()) {
            return bad("grid sizes must be positive".into());
        }
        if half_width / spacing > T::lit(400.0) {
            return bad(format!("half_width/spacing = {} exceeds 400", half_width / spacing));
        }
        if dt > spacing * spacing {
            return bad(format!("dt = {dt} exceeds spacing^2"));
        }
        Ok(Self { half_width, spacing, dt })
    }

    /// Points per axis.
    pub fn len(&self) -> usize {
        (T::lit(2.0) * self.half_width / self.spacing).round().to_usize().expect("finite grid") + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> T {
        -self.half_width + self.spacing * T::count(i)
    }
}

/// Values on the grid, row-major with the x index first.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    pub spec: GridSpec<T>,
    pub values: Vec<C<T>>,
}

impl<T: Real> GridField<T> {
    pub fn from_fn(spec: GridSpec<T>, f: impl Fn(T, T) -> C<T>) -> Self {
        let n = spec.len();
        let values = (0..n * n).map(|k| f(spec.coord(k / n), spec.coord(k % n))).collect();
        Self { spec, values }
    }

    pub fn side(&self) -> usize {
        self.spec.len()
    }

    pub fn at(&self, i: usize, j: usize) -> C<T> {
        self.values[i * self.side() + j]
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// Largest magnitude on the outer ring of grid points.
    pub fn boundary_max(&self) -> T {
        let n = self.side();
        let mut m = T::zero();
        for k in 0..n {
            for v in [self.at(0, k), self.at(n - 1, k), self.at(k, 0), self.at(k, n - 1)] {
                m = m.max(v.norm());
            }
        }
        m
    }

    /// `(Σ|u|² dv)^{1/2}` with `dv = 2 dx dy`.
    pub fn l2_norm(&self) -> T {
        let h = self.spec.spacing;
        let s = self.values.iter().fold(T::zero(), |a, v| a + v.norm_sqr());
        (s * T::lit(2.0) * h * h).sqrt()
    }
}

/// Solves `lower·u_{k-1} + diag_k·u_k + upper·u_{k+1} = rhs_k` with constant
/// off-diagonals, in place.
fn thomas<T: Real>(lower: C<T>, diag: &[C<T>], upper: C<T>, rhs: &mut [C<T>]) {
    let n = rhs.len();
    let mut c = vec![C::new(T::zero(), T::zero()); n];
    let mut beta = diag[0];
    c[0] = upper / beta;
    rhs[0] = rhs[0] / beta;
    for k in 1..n {
        beta = diag[k] - lower * c[k - 1];
        c[k] = upper / beta;
        rhs[k] = (rhs[k] - lower * rhs[k - 1]) / beta;
    }
    for k in (0..n - 1).rev() {
        let next = rhs[k + 1];
        rhs[k] -= c[k] * next;
    }
}

/// One directional operator `A` restricted to a grid line: constant
/// off-diagonals and a coordinate-dependent diagonal.
struct LineOp<T> {
    lower: C<T>,
    upper: C<T>,
    diag: Vec<C<T>>,
}

impl<T: Real> LineOp<T> {
    /// Line of `A_x` at fixed `y` (`sign = -1`) or of `A_y` at fixed `x`
    /// (`sign = +1`); `other` is the fixed coordinate.
    fn new(spec: &GridSpec<T>, a: T, other: T, sign: T) -> Self {
        let h = spec.spacing;
        let quarter = T::lit(0.25);
        let second = -quarter / (h * h);
        let drift = C::new(T::zero(), sign * a * other / T::lit(2.0) / (T::lit(2.0) * h));
        let n = spec.len();
        let diag = (1..n - 1)
            .map(|k| {
                let s = spec.coord(k);
                C::new(T::lit(0.5) / (h * h) + quarter * a * a * s * s - quarter * a, T::zero())
            })
            .collect();
        Self { lower: C::new(second, T::zero()) - drift, upper: C::new(second, T::zero()) + drift, diag }
    }

    /// `(I + τA)^{-1}` on the interior of a line.
    fn solve(&self, tau: T, line: &mut [C<T>]) {
        let diag: Vec<C<T>> = self.diag.iter().map(|d| *d * tau + T::one()).collect();
        thomas(self.lower * tau, &diag, self.upper * tau, line);
    }

    /// `(I - τA)` on the interior of a line, zero outside.
    fn explicit(&self, tau: T, line: &[C<T>]) -> Vec<C<T>> {
        let n = line.len();
        let zero = C::new(T::zero(), T::zero());
        (0..n)
            .map(|k| {
                let left = if k > 0 { line[k - 1] } else { zero };
                let right = if k + 1 < n { line[k + 1] } else { zero };
                line[k] - (self.lower * left + self.diag[k] * line[k] + self.upper * right) * tau
            })
            .collect()
    }
}

/// Approximates `e^{-t□_η}u0` for `n = 1`, `q = 0`.
pub fn pde_evolve<T: Real>(
    p: &CurvaturePoint<T>,
    eta: T,
    t: T,
    u0: &GridField<T>,
) -> Result<GridField<T>> {
    if p.n() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: p.n() });
    }
    if !(t >= T::zero()) {
        return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
    }
    let spec = u0.spec;
    let peak = u0.max_abs();
    if u0.boundary_max() > T::tol(1e-8) * peak {
        return Err(Error::BoundaryContamination {
            ratio: (u0.boundary_max() / peak).to_f64().unwrap_or(f64::NAN),
        });
    }
    if t == T::zero() {
        return Ok(u0.clone());
    }
    let a = p.pencil_at(eta).entry(0, 0).re;
    let n = spec.len();
    let steps = (t / spec.dt).ceil().to_usize().expect("finite step count").max(1);
    let tau = t / T::count(steps) / T::lit(2.0);

    let xs: Vec<LineOp<T>> = (1..n - 1).map(|j| LineOp::new(&spec, a, spec.coord(j), -T::one())).collect();
    let ys: Vec<LineOp<T>> = (1..n - 1).map(|i| LineOp::new(&spec, a, spec.coord(i), T::one())).collect();

    // interior only, x index first: u[(i-1)*(n-2) + (j-1)]
    let m = n - 2;
    let mut u: Vec<C<T>> = (0..m * m).map(|k| u0.at(k / m + 1, k % m + 1)).collect();
    for _ in 0..steps {
        // (I + τA_x)u* = (I - τA_y)u ; lines of constant x for A_y
        let rhs: Vec<Vec<C<T>>> = (0..m).into_par_iter().map(|i| ys[i].explicit(tau, &u[i * m..(i + 1) * m])).collect();
        let star: Vec<Vec<C<T>>> = (0..m)
            .into_par_iter()
            .map(|j| {
                let mut line: Vec<C<T>> = (0..m).map(|i| rhs[i][j]).collect();
                xs[j].solve(tau, &mut line);
                line
            })
            .collect();
        // (I + τA_y)u' = (I - τA_x)u*
        let rhs: Vec<Vec<C<T>>> = (0..m).into_par_iter().map(|j| xs[j].explicit(tau, &star[j])).collect();
        let next: Vec<Vec<C<T>>> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut line: Vec<C<T>> = (0..m).map(|j| rhs[j][i]).collect();
                ys[i].solve(tau, &mut line);
                line
            })
            .collect();
        u = next.into_iter().flatten().collect();
    }

    let zero = C::new(T::zero(), T::zero());
    let mut values = vec![zero; n * n];
    for i in 0..m {
        values[(i + 1) * n + 1..(i + 1) * n + 1 + m].copy_from_slice(&u[i * m..(i + 1) * m]);
    }
    let out = GridField { spec, values };
    // the ring next to the Dirichlet edge
    let mut edge = T::zero();
    for k in 1..n - 1 {
        for v in [out.at(1, k), out.at(n - 2, k), out.at(k, 1), out.at(k, n - 2)] {
            edge = edge.max(v.norm());
        }
    }
    let peak = out.max_abs();
    if edge > T::tol(1e-4) * peak {
        return Err(Error::BoundaryContamination { ratio: (edge / peak).to_f64().unwrap_or(f64::NAN) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::HermitianForm;

    fn gaussian(spec: GridSpec<f64>, cx: f64, cy: f64, s: f64) -> GridField<f64> {
        GridField::from_fn(spec, |x, y| C::new((-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * s * s)).exp(), 0.0))
    }

    fn point(r: f64, l: f64) -> CurvaturePoint<f64> {
        CurvaturePoint::new(HermitianForm::from_real_diagonal(&[l]), HermitianForm::from_real_diagonal(&[r])).unwrap()
    }

    #[test]
    fn grid_spec_limits() {
        assert!(GridSpec::new(6.0, 0.05, 1e-3).is_ok());
        assert!(GridSpec::new(50.0, 0.1, 1e-3).is_err());
        assert!(GridSpec::new(6.0, 0.05, 1e-2).is_err());
        assert_eq!(GridSpec::new(6.0, 0.05, 1e-3).unwrap().len(), 241);
    }

    #[test]
    fn thomas_solves() {
        let diag = vec![C::new(4.0, 1.0); 5];
        let (lo, up) = (C::new(1.0, -0.5), C::new(-1.0, 0.25));
        let x: Vec<C<f64>> = (0..5).map(|k| C::new(k as f64, 1.0 - k as f64)).collect();
        let mut rhs: Vec<C<f64>> = (0..5)
            .map(|k| {
                let l = if k > 0 { lo * x[k - 1] } else { C::new(0.0, 0.0) };
                let u = if k < 4 { up * x[k + 1] } else { C::new(0.0, 0.0) };
                l + diag[k] * x[k] + u
            })
            .collect();
        thomas(lo, &diag, up, &mut rhs);
        for (a, b) in rhs.iter().zip(&x) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_time_and_mass_decay() {
        let spec = GridSpec::new(5.0, 0.1, 5e-3).unwrap();
        let u0 = gaussian(spec, 0.3, -0.2, 0.7);
        let p = point(1.0, 0.5);
        assert_eq!(pde_evolve(&p, 0.0, 0.0, &u0).unwrap(), u0);
        let mut prev = u0.l2_norm();
        let mut u = u0;
        for _ in 0..5 {
            u = pde_evolve(&p, 0.3, 0.1, &u).unwrap();
            let now = u.l2_norm();
            assert!(now <= prev * (1.0 + 1e-9), "{now} > {prev}");
            prev = now;
        }
    }

    #[test]
    fn wide_field_is_contaminated() {
        let spec = GridSpec::new(3.0, 0.1, 5e-3).unwrap();
        let u0 = gaussian(spec, 0.0, 0.0, 2.0);
        assert!(matches!(pde_evolve(&point(1.0, 0.5), 0.0, 0.1, &u0), Err(Error::BoundaryContamination { .. })));
    }
}
