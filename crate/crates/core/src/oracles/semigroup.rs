//! Chapman–Kolmogorov checks by brute-force convolution on a grid.

use rayon::prelude::*;

use super::pde::GridSpec;
use super::simpson::reference_quadrature;
use crate::density::CurvaturePoint;
use crate::error::{Error, Result};
use crate::heisenberg::{heisenberg_heat_kernel, heisenberg_prefactor, FiberKernel, HeisenbergPoint, ModelConventions};
use crate::scalar::{pairwise_sum, Real, C};

const BLOCK: usize = 4096;

/// Tensor grid on `[-w, w]^{2n}` (every axis from `g`).
struct Cube<T> {
    dims: usize,
    side: usize,
    spec: GridSpec<T>,
}

impl<T: Real> Cube<T> {
    fn new(n: usize, spec: GridSpec<T>) -> Self {
        Self { dims: 2 * n, side: spec.len(), spec }
    }

    fn total(&self) -> usize {
        self.side.pow(self.dims as u32)
    }

    fn point(&self, mut k: usize, out: &mut [T]) -> bool {
        let mut edge = false;
        for slot in out.iter_mut().rev() {
            let i = k % self.side;
            k /= self.side;
            edge |= i == 0 || i + 1 == self.side;
            *slot = self.spec.coord(i);
        }
        edge
    }

    /// `dv` per grid cell: `2ⁿ h^{2n}`.
    fn cell(&self) -> T {
        ModelConventions::volume_factor::<T>(self.dims / 2) * self.spec.spacing.powi(self.dims as i32)
    }

    /// `Σ_u f(u) dv` in fixed blocks, plus the peak of `|g(u)|` on the grid
    /// and on its boundary for each of the given monitors.
    fn sum<F>(&self, f: F) -> (C<T>, [T; 4])
    where
        F: Fn(&[T]) -> (C<T>, [T; 2]) + Sync,
    {
        let total = self.total();
        let blocks = total.div_ceil(BLOCK);
        let parts: Vec<(C<T>, [T; 4])> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut u = vec![T::zero(); self.dims];
                let mut acc = C::new(T::zero(), T::zero());
                let mut peaks = [T::zero(); 4];
                for k in b * BLOCK..((b + 1) * BLOCK).min(total) {
                    let edge = self.point(k, &mut u);
                    let (v, mags) = f(&u);
                    acc += v;
                    for (slot, m) in mags.iter().enumerate() {
                        peaks[slot] = peaks[slot].max(*m);
                        if edge {
                            peaks[slot + 2] = peaks[slot + 2].max(*m);
                        }
                    }
                }
                (acc, peaks)
            })
            .collect();
        let re = pairwise_sum(&parts.iter().map(|p| p.0.re).collect::<Vec<_>>());
        let im = pairwise_sum(&parts.iter().map(|p| p.0.im).collect::<Vec<_>>());
        let mut peaks = [T::zero(); 4];
        for (_, p) in &parts {
            for k in 0..4 {
                peaks[k] = peaks[k].max(p[k]);
            }
        }
        (C::new(re, im) * self.cell(), peaks)
    }
}

fn check_times<T: Real>(t: T, s: T, g: &GridSpec<T>) -> Result<()> {
    let floor = T::lit(4.0) * g.dt;
    if t < floor || s < floor {
        return Err(Error::InvalidParameter(format!(
            "semigroup times must be at least 4*dt = {floor} (the delta limit is not grid-representable)"
        )));
    }
    Ok(())
}

fn check_boundary<T: Real>(peaks: [T; 4]) -> Result<()> {
    for k in 0..2 {
        if peaks[k + 2] > T::tol(1e-10) * peaks[k] {
            return Err(Error::BoundaryContamination { ratio: (peaks[k + 2] / peaks[k]).to_f64().unwrap_or(f64::NAN) });
        }
    }
    Ok(())
}

/// `∫ K(t;x,u) K(s;u,y) dv(u)` over the grid.
fn compose<T, K1, K2>(cube: &Cube<T>, kt: &K1, ks: &K2, x: &[T], y: &[T]) -> Result<C<T>>
where
    T: Real,
    K1: Fn(&[T], &[T]) -> C<T> + Sync,
    K2: Fn(&[T], &[T]) -> C<T> + Sync,
{
    let (v, peaks) = cube.sum(|u| {
        let (a, b) = (kt(x, u), ks(u, y));
        (a * b, [a.norm(), b.norm()])
    });
    check_boundary(peaks)?;
    Ok(v)
}

/// Max over probe pairs of `|∫K(t;x,u)K(s;u,y)dv(u) - K(t+s;x,y)| / |K(t+s;x,y)|`
/// for a scalar kernel on `ℝ^{2n}`. `make(t)` builds the time-`t` kernel.
pub fn semigroup_check<T, F, K>(
    n: usize,
    make: F,
    t: T,
    s: T,
    g: &GridSpec<T>,
    probes: &[(Vec<T>, Vec<T>)],
) -> Result<T>
where
    T: Real,
    F: Fn(T) -> Result<K>,
    K: Fn(&[T], &[T]) -> C<T> + Sync,
{
    check_times(t, s, g)?;
    let cube = Cube::new(n, *g);
    let (kt, ks, kts) = (make(t)?, make(s)?, make(t + s)?);
    let mut worst = T::zero();
    for (x, y) in probes {
        if x.len() != 2 * n || y.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: x.len().max(y.len()) });
        }
        let lhs = compose(&cube, &kt, &ks, x, y)?;
        let rhs = kts(x, y);
        worst = worst.max((lhs - rhs).norm() / rhs.norm());
    }
    Ok(worst)
}

/// Chapman–Kolmogorov for the δ-truncated Heisenberg kernel on functions.
///
/// Integrating `dθ_u` first gives `2πδ(η - η')` between the two η-integrals,
/// and the point prefactors telescope, so the composition equals
/// `(2π)^{-1}·prefactor(x,y)·∫_{-δ}^{δ} e^{iΔθη} (k_η(t)∘k_η(s))(z,w) dη`.
/// The inner composition runs on the z-grid, the η-integral by Simpson.
pub fn heisenberg_semigroup_check<T: Real>(
    p: &CurvaturePoint<T>,
    t: T,
    s: T,
    delta: T,
    g: &GridSpec<T>,
    probes: &[(HeisenbergPoint<T>, HeisenbergPoint<T>)],
    tol: T,
) -> Result<T> {
    check_times(t, s, g)?;
    let n = p.n();
    let cube = Cube::new(n, *g);
    let mut worst = T::zero();
    for (x, y) in probes {
        let (xr, yr) = (ModelConventions::to_real(&x.z), ModelConventions::to_real(&y.z));
        let dtheta = x.theta - y.theta;
        let failure = std::sync::Mutex::new(None);
        let inner = |eta: T| {
            let run = || -> Result<C<T>> {
                let m = p.pencil_at(eta);
                let (kt, ks) = (FiberKernel::new(&m, 0, t)?, FiberKernel::new(&m, 0, s)?);
                let kt = |a: &[T], b: &[T]| kt.scalar_real(a, b);
                let ks = |a: &[T], b: &[T]| ks.scalar_real(a, b);
                compose(&cube, &kt, &ks, &xr, &yr)
            };
            match run() {
                Ok(v) => vec![v * C::from_polar(T::one(), dtheta * eta)],
                Err(e) => {
                    failure.lock().expect("unpoisoned").get_or_insert(e);
                    vec![C::new(T::zero(), T::zero())]
                }
            }
        };
        let integral = reference_quadrature(inner, -delta, delta, tol)?;
        if let Some(e) = failure.into_inner().expect("unpoisoned") {
            return Err(e);
        }
        let lhs = integral[0] * heisenberg_prefactor(p, x, y) / (T::lit(2.0) * T::PI());
        let rhs = heisenberg_heat_kernel(p, 0, t + s, x, y, Some(delta))?.scalar();
        worst = worst.max((lhs - rhs).norm() / rhs.norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::HermitianForm;

    #[test]
    fn free_heat_kernel() {
        let g = GridSpec::new(7.0, 0.1, 1e-3).unwrap();
        let a = HermitianForm::from_real_diagonal(&[0.0]);
        let make = |t| FiberKernel::mehler(&a, t).map(|k| move |x: &[f64], y: &[f64]| k.scalar_real(x, y));
        let probes = vec![(vec![0.0, 0.0], vec![0.5, -0.3]), (vec![0.2, 0.1], vec![-0.4, 0.6])];
        let dev = semigroup_check(1, make, 0.5, 0.5, &g, &probes).unwrap();
        assert!(dev < 1e-3, "{dev}");
    }

    #[test]
    fn refuses_short_times_and_wide_kernels() {
        let g = GridSpec::new(2.0, 0.1, 1e-3).unwrap();
        let a = HermitianForm::from_real_diagonal(&[0.0]);
        let make = |t| FiberKernel::mehler(&a, t).map(|k| move |x: &[f64], y: &[f64]| k.scalar_real(x, y));
        let probes = vec![(vec![0.0, 0.0], vec![0.0, 0.0])];
        assert!(matches!(semigroup_check(1, make, 0.003, 0.5, &g, &probes), Err(Error::InvalidParameter(_))));
        assert!(matches!(
            semigroup_check(1, make, 0.5, 0.5, &g, &probes),
            Err(Error::BoundaryContamination { .. })
        ));
    }
}
