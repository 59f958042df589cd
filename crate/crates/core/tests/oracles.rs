mod common;

use crheat::oracles::*;
use crheat::*;
use rayon::prelude::*;

fn kernel_fn(m: &HermitianForm64, q: usize) -> impl Fn(f64) -> Result<Box<dyn Fn(&[f64], &[f64]) -> Vec<C64>>> + '_ {
    move |t| {
        let k = FiberKernel::new(m, q, t)?;
        Ok(Box::new(move |x: &[f64], y: &[f64]| k.eval(&ModelConventions::to_complex(x), &ModelConventions::to_complex(y))))
    }
}

fn scalar_fn(m: &HermitianForm64) -> impl Fn(f64) -> Result<Box<dyn Fn(&[f64], &[f64]) -> C64 + Sync>> + '_ {
    move |t| {
        let k = FiberKernel::new(m, 0, t)?;
        Ok(Box::new(move |x: &[f64], y: &[f64]| k.scalar_real(x, y)))
    }
}

fn probe_pairs(n: usize, count: usize, radius: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    halton_points(4 * n, count, radius, 7).into_iter().map(|v| (v[..2 * n].to_vec(), v[2 * n..].to_vec())).collect()
}

fn complex_m() -> HermitianForm64 {
    HermitianForm::new(2, vec![C::new(1.0, 0.0), C::new(0.3, 0.4), C::new(0.3, -0.4), C::new(-0.5, 0.0)]).unwrap()
}

#[test]
fn reference_quadrature_agrees_with_panel_integrator() {
    let p = common::point(&[-1.0, 1.0], &[1.0, 1.0]);
    let d = density_diagonal(&p, 1, 1.0, Some(2.0)).unwrap();
    let f = |eta: f64| density_integrand(&p, 1, 1.0, eta).unwrap().matrix.into_vec();
    let r = reference_quadrature(f, -2.0, 2.0, 1e-10).unwrap();
    let norm = (2.0 * std::f64::consts::PI).powi(-3);
    for (k, v) in r.iter().enumerate() {
        let got = d.matrix.as_slice()[k];
        assert!((got - v * norm).norm() <= 1e-8 * d.matrix.max_abs());
    }
}

/// `∫K(t;x,u)u0(u)dv(u)` at every `stride`-th grid point.
fn kernel_applied(k: &FiberKernel<f64>, u0: &GridField<f64>, stride: usize) -> Vec<(usize, usize, C64)> {
    let g = u0.spec;
    let n = g.len();
    let h = g.spacing;
    let targets: Vec<(usize, usize)> = (0..n).step_by(stride).flat_map(|i| (0..n).step_by(stride).map(move |j| (i, j))).collect();
    targets
        .into_par_iter()
        .map(|(i, j)| {
            let x = [g.coord(i), g.coord(j)];
            let mut s = C::new(0.0, 0.0);
            for (idx, v) in u0.values.iter().enumerate() {
                if v.norm() > 1e-18 {
                    s += k.scalar_real(&x, &[g.coord(idx / n), g.coord(idx % n)]) * v;
                }
            }
            (i, j, s * (2.0 * h * h))
        })
        .collect()
}

fn pde_error(spacing: f64, dt: f64) -> f64 {
    let p = common::point(&[1.0], &[0.5]);
    let g = GridSpec::new(6.0, spacing, dt).unwrap();
    let u0 = GridField::from_fn(g, |x, y| C::new((-((x - 0.4f64).powi(2) + (y - 0.2f64).powi(2)) / 1.28).exp(), 0.0));
    let u = pde_evolve(&p, 0.2, 0.3, &u0).unwrap();
    let k = FiberKernel::new(&p.pencil_at(0.2), 0, 0.3).unwrap();
    let stride = (0.5 / spacing).round() as usize;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, j, v) in kernel_applied(&k, &u0, stride) {
        num += (v - u.at(i, j)).norm_sqr();
        den += v.norm_sqr();
    }
    (num / den).sqrt()
}

#[test]
fn pde_converges_at_second_order() {
    let coarse = pde_error(0.2, 0.01);
    let fine = pde_error(0.1, 0.005);
    assert!(fine < 1e-2, "{fine:e}");
    let ratio = coarse / fine;
    assert!(ratio > 3.0 && ratio < 5.5, "ratio {ratio}");
}

#[test]
fn semigroup_of_closed_forms() {
    let g = GridSpec::new(6.0, 0.1, 1e-3).unwrap();
    let probes = probe_pairs(1, 3, 1.0);
    for a in [0.0, 1.0] {
        let a = HermitianForm::from_real_diagonal(&[a]);
        let make = |t| FiberKernel::mehler(&a, t).map(|k| move |x: &[f64], y: &[f64]| k.scalar_real(x, y));
        let dev = semigroup_check(1, make, 0.5, 0.5, &g, &probes).unwrap();
        assert!(dev < 1e-3, "{dev:e}");
    }
    let p = common::point(&[1.0], &[0.5]);
    for eta in [-1.0, 0.0, 2.0] {
        let m = p.pencil_at(eta);
        let dev = semigroup_check(1, scalar_fn(&m), 0.5, 0.5, &g, &probes).unwrap();
        assert!(dev < 1e-3, "eta {eta}: {dev:e}");
    }
    let m = complex_m();
    let g2 = GridSpec::new(5.0, 0.25, 1e-3).unwrap();
    let dev = semigroup_check(2, scalar_fn(&m), 0.5, 0.5, &g2, &probe_pairs(2, 1, 0.5)).unwrap();
    assert!(dev < 1e-3, "{dev:e}");
}

#[test]
fn heat_residuals() {
    let probes = probe_pairs(1, 20, 1.0);
    let free = HermitianForm::from_real_diagonal(&[0.0]);
    let make = |t| FiberKernel::mehler(&free, t).map(|k| move |x: &[f64], y: &[f64]| vec![k.scalar_real(x, y)]);
    let r = heat_residual_check(make, &BoxOperator::mehler(&free), 0.5, &probes, 0.05, 1e-3).unwrap();
    assert!(r.residual < 1e-5, "{r:?}");

    let p = common::point(&[1.0], &[0.5]);
    for eta in [0.0, 0.7] {
        let m = p.pencil_at(eta);
        let op = BoxOperator::boxeta(&p, eta, 0).unwrap();
        let r = heat_residual_check(kernel_fn(&m, 0), &op, 0.5, &probes, 0.05, 1e-3).unwrap();
        assert!(r.residual < 1e-4, "{r:?}");
        assert!(r.coarse_residual >= 8.0 * r.residual, "{r:?}");
        assert!(r.residual < 2.0 * r.error_estimate);
    }

    let m = complex_m();
    let p2 = CurvaturePoint::new(HermitianForm::identity(2), m.clone()).unwrap();
    let probes2 = probe_pairs(2, 20, 1.0);
    for q in 0..=2 {
        let mq = p2.pencil_at(0.2);
        let op = BoxOperator::boxeta(&p2, 0.2, q).unwrap();
        let r = heat_residual_check(kernel_fn(&mq, q), &op, 0.5, &probes2, 0.05, 1e-3).unwrap();
        assert!(r.residual < 1e-4, "q {q}: {r:?}");
    }
    let make = |t| FiberKernel::mehler(&m, t).map(|k| move |x: &[f64], y: &[f64]| vec![k.scalar_real(x, y)]);
    let r = heat_residual_check(make, &BoxOperator::mehler(&m), 0.5, &probes2, 0.05, 1e-3).unwrap();
    assert!(r.residual < 1e-4, "{r:?}");
}
