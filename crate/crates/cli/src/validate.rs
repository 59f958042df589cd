//! Built-in property and oracle suites behind `crheat validate`. Sizes are
//! trimmed so `--suite all` finishes in seconds; the test suites of the
//! library run the same checks at full strength.

use std::fmt::Write as _;

use clap::ValueEnum;
use crheat::hermitian::{bose_ratio, GuardedFn};
use crheat::oracles::{
    halton_points, heat_residual_check, reference_quadrature_real, semigroup_check, BoxOperator, GridSpec,
};
use crheat::poly::poly_eval;
use crheat::{
    density_diagonal, density_integrand, exp_endo, exp_endo_paths, heisenberg_heat_kernel, matfun, morse_global,
    morse_local, rx_partition, tail_certificate, tail_decay, y_condition, CurvaturePoint64, EtaPencil64, FiberKernel,
    HeisenbergPoint64, HermitianForm64, ManifoldDescriptor64, C64,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Hermitian,
    Exterior,
    Density,
    Mehler,
    Heisenberg,
    Morse,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SummaryFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    pub fn render(&self, format: SummaryFormat) -> String {
        match format {
            SummaryFormat::Json => crate::emit::json(self),
            SummaryFormat::Text => {
                let mut out = String::new();
                for c in &self.checks {
                    let tag = if c.passed { "PASS" } else { "FAIL" };
                    writeln!(out, "{tag} {}/{}: {}", c.suite, c.name, c.detail).unwrap();
                }
                writeln!(out, "{} passed, {} failed", self.passed, self.failed).unwrap();
                out
            }
        }
    }
}

type Outcome = Result<(bool, String), crheat::Error>;
type CheckFn = fn() -> Outcome;

const CHECKS: &[(&str, &str, CheckFn)] = &[
    ("hermitian", "eigen-reconstruction", reconstruction),
    ("hermitian", "bose-determinant", bose_determinant),
    ("hermitian", "definite-pencil-roots", pencil_roots),
    ("exterior", "euler-identity", exterior_euler),
    ("exterior", "dual-paths", dual_paths),
    ("density", "euler-identity", density_euler),
    ("density", "eta-translation", translation),
    ("density", "y-implies-decay", y_decay),
    ("density", "truncation-certificate", truncation),
    ("mehler", "semigroup", mehler_semigroup),
    ("mehler", "heat-residual", mehler_residual),
    ("heisenberg", "origin-reduction", origin_reduction),
    ("heisenberg", "weighted-adjoint", weighted_adjoint),
    ("heisenberg", "boxeta-semigroup", boxeta_semigroup),
    ("heisenberg", "boxeta-residual", boxeta_residual),
    ("morse", "exact-value", morse_exact),
    ("morse", "simpson-cross-check", morse_simpson),
    ("morse", "linearity", morse_linearity),
];

pub fn run_suite(suite: Suite) -> Summary {
    let wanted = match suite {
        Suite::All => None,
        s => Some(s.to_possible_value().expect("named").get_name().to_string()),
    };
    let checks: Vec<Check> = CHECKS
        .iter()
        .filter(|(s, _, _)| wanted.as_deref().map_or(true, |w| w == *s))
        .map(|&(suite, name, f)| {
            let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
            Check { suite, name, passed, detail }
        })
        .collect();
    let passed = checks.iter().filter(|c| c.passed).count();
    Summary { passed, failed: checks.len() - passed, checks }
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn hermitian(rng: &mut StdRng, n: usize, scale: f64) -> HermitianForm64 {
    let mut e = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        e[i * n + i] = C64::new(rng.gen_range(-scale..scale), 0.0);
        for j in i + 1..n {
            let c = C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)) * 0.5;
            e[i * n + j] = c;
            e[j * n + i] = c.conj();
        }
    }
    HermitianForm64::new(n, e).expect("Hermitian by construction")
}

fn definite(rng: &mut StdRng, n: usize) -> Result<HermitianForm64, crheat::Error> {
    let u = hermitian(rng, n, 1.0).eig()?.unitary;
    let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    Ok(HermitianForm64::from_real_diagonal(&d).conjugate_by(&u))
}

fn diag_point(r: &[f64], l: &[f64]) -> CurvaturePoint64 {
    CurvaturePoint64::new(HermitianForm64::from_real_diagonal(l), HermitianForm64::from_real_diagonal(r))
        .expect("matching sizes")
}

fn verdict(worst: f64, tol: f64, what: &str) -> Outcome {
    Ok((worst <= tol, format!("{what} {worst:.2e} (tolerance {tol:.0e})")))
}

fn reconstruction() -> Outcome {
    let mut g = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = g.gen_range(1..=6);
        let h = hermitian(&mut g, n, 3.0);
        worst = worst.max(h.eig()?.reconstruct().max_abs_diff(h.matrix()) / (1.0 + h.norm()));
    }
    verdict(worst, 1e-11, "max relative reconstruction error")
}

fn bose_determinant() -> Outcome {
    let mut g = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let (n, t) = (g.gen_range(1..=4), g.gen_range(0.1..2.0));
        let h = hermitian(&mut g, n, 1.5);
        let want: f64 = h.eig()?.eigenvalues.iter().map(|&mu| bose_ratio(mu, t)).product();
        let got = matfun(&h, GuardedFn::BoseRatio, t)?.determinant();
        worst = worst.max((got - C64::new(want, 0.0)).norm() / want.abs());
    }
    verdict(worst, 1e-10, "max relative determinant error")
}

fn pencil_roots() -> Outcome {
    let mut g = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let n = g.gen_range(1..=5);
        let l = definite(&mut g, n)?;
        let r = hermitian(&mut g, n, 2.0);
        let roots = EtaPencil64::new(r.clone(), l.clone())?.roots()?;
        if roots.len() != n {
            return Ok((false, format!("found {} roots of a definite pencil with n = {n}", roots.len())));
        }
        for eta in roots {
            let eig = r.pencil_at(&l, eta).eig()?;
            let smallest = eig.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
            worst = worst.max(smallest / (1.0 + r.norm()));
        }
    }
    verdict(worst, 1e-8, "max smallest |eigenvalue| at a root")
}

fn exterior_euler() -> Outcome {
    let mut g = rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (n, t) = (g.gen_range(1..=6), g.gen_range(0.1..2.0));
        let m = hermitian(&mut g, n, 1.5);
        let want: f64 = m.eig()?.eigenvalues.iter().map(|mu| 1.0 - (-t * mu).exp()).product();
        let mut sum = 0.0;
        let mut scale = 0.0;
        for q in 0..=n {
            let tr = exp_endo(&m, q, t)?.trace().re;
            sum += if q % 2 == 0 { tr } else { -tr };
            scale += tr.abs();
        }
        worst = worst.max((sum - want).abs() / scale);
    }
    verdict(worst, 1e-12, "max |alternating trace sum - product| / scale")
}

fn dual_paths() -> Outcome {
    let mut g = rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (n, t) = (g.gen_range(1..=6), g.gen_range(0.1..2.0));
        let q = g.gen_range(0..=n);
        let m = hermitian(&mut g, n, 1.5);
        let (a, b) = exp_endo_paths(&m, q, t)?;
        worst = worst.max(a.matrix.max_abs_diff(&b.matrix) / b.matrix.max_abs().max(1.0));
    }
    verdict(worst, 1e-10, "max path deviation")
}

fn density_euler() -> Outcome {
    let mut g = rng(6);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    while cases < 40 {
        let (n, t, eta) = (g.gen_range(1..=5), g.gen_range(0.5..5.0), g.gen_range(-2.0..2.0));
        let p = CurvaturePoint64::new(hermitian(&mut g, n, 1.0), hermitian(&mut g, n, 2.0))?;
        let det = p.pencil_at(eta).determinant();
        if det.abs() < 1e-6 {
            continue;
        }
        cases += 1;
        let sum: f64 = (0..=n)
            .map(|q| density_integrand(&p, q, t, eta).map(|e| if q % 2 == 0 { e.trace().re } else { -e.trace().re }))
            .sum::<Result<f64, _>>()?;
        worst = worst.max((sum - det).abs() / det.abs());
    }
    verdict(worst, 1e-9, "max relative deviation from det M(eta)")
}

fn translation() -> Outcome {
    let mut g = rng(7);
    let mut worst: f64 = 0.0;
    for case in 0..4 {
        let n = 2 + case % 2;
        let levi = definite(&mut g, n)?;
        let r = hermitian(&mut g, n, 1.5);
        let p = CurvaturePoint64::new(levi.clone(), r.clone())?;
        let shifted = CurvaturePoint64::new(levi.clone(), r.combine(1.0, &levi, 0.7))?.with_beta(-0.7);
        let a = density_diagonal(&p, 1, 1.0, None)?;
        let b = density_diagonal(&shifted, 1, 1.0, None)?;
        worst = worst.max(b.matrix.max_abs_diff(&a.matrix) / a.matrix.max_abs());
    }
    verdict(worst, 1e-9, "max relative change under R += 0.7 L")
}

fn y_decay() -> Outcome {
    let mut g = rng(8);
    let mut hits = 0;
    for _ in 0..200 {
        let n = g.gen_range(1..=6);
        let lambda: Vec<f64> = (0..n).map(|_| [-1.0, 0.0, 1.0][g.gen_range(0..3)] * g.gen_range(0.3..2.0)).collect();
        let levi = HermitianForm64::from_real_diagonal(&lambda);
        for q in 0..=n {
            if y_condition(&lambda, q)? {
                hits += 1;
                if !tail_decay(&levi, q)?.both() {
                    return Ok((false, format!("Y({q}) holds for {lambda:?} but a tail does not decay")));
                }
            }
        }
    }
    Ok((true, format!("{hits} Y(q) cases, all decay in both directions")))
}

fn truncation() -> Outcome {
    let r = HermitianForm64::new(2, vec![C64::new(0.5, 0.0), C64::new(0.2, 0.3), C64::new(0.2, -0.3), C64::new(-1.0, 0.0)])?;
    let p = CurvaturePoint64::new(HermitianForm64::from_real_diagonal(&[1.0, 0.8]), r)?;
    let full = density_diagonal(&p, 1, 1.0, None)?;
    let cut = density_diagonal(&p, 1, 1.0, Some(4.0))?;
    let gap = cut.matrix.max_abs_diff(&full.matrix);
    let cert = tail_certificate(&p, 1, 1.0, 4.0)?;
    Ok((gap <= cert, format!("|density(D=4) - density(full)| = {gap:.2e} vs certificate {cert:.2e}")))
}

fn probe_pairs(n: usize, count: usize, radius: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    halton_points(4 * n, count, radius, 7).into_iter().map(|v| (v[..2 * n].to_vec(), v[2 * n..].to_vec())).collect()
}

fn mehler_semigroup() -> Outcome {
    let g = GridSpec::new(6.0, 0.1, 1e-3)?;
    let probes = probe_pairs(1, 3, 1.0);
    let mut worst: f64 = 0.0;
    for a in [0.0, 1.0, -0.5] {
        let a = HermitianForm64::from_real_diagonal(&[a]);
        let make = |t| FiberKernel::mehler(&a, t).map(|k| move |x: &[f64], y: &[f64]| k.scalar_real(x, y));
        worst = worst.max(semigroup_check(1, make, 0.5, 0.5, &g, &probes)?);
    }
    verdict(worst, 1e-3, "max Chapman-Kolmogorov deviation")
}

fn mehler_residual() -> Outcome {
    let a = HermitianForm64::new(2, vec![C64::new(1.0, 0.0), C64::new(0.3, 0.4), C64::new(0.3, -0.4), C64::new(-0.5, 0.0)])?;
    let make = |t| FiberKernel::mehler(&a, t).map(|k| move |x: &[f64], y: &[f64]| vec![k.scalar_real(x, y)]);
    let r = heat_residual_check(make, &BoxOperator::mehler(&a), 0.5, &probe_pairs(2, 20, 1.0), 0.05, 1e-3)?;
    verdict(r.residual, 1e-4, "max heat-equation residual")
}

fn origin_reduction() -> Outcome {
    let mut g = rng(9);
    let p = CurvaturePoint64::new(definite(&mut g, 2)?, hermitian(&mut g, 2, 1.0))?;
    let o = HeisenbergPoint64::origin(2);
    for q in 0..=2 {
        if tail_decay(&p.levi, q)?.both() {
            let k = heisenberg_heat_kernel(&p, q, 1.0, &o, &o, None)?;
            if k.endo.matrix != density_diagonal(&p, q, 1.0, None)?.matrix {
                return Ok((false, format!("kernel at the origin differs from the density for q = {q}")));
            }
        }
    }
    Ok((true, "kernel at x = y = 0 equals the density bit for bit".into()))
}

fn weighted_adjoint() -> Outcome {
    let mut g = rng(10);
    let p = CurvaturePoint64::new(definite(&mut g, 2)?, hermitian(&mut g, 2, 1.0))?.with_beta(0.4);
    let weight = |x: &HeisenbergPoint64| p.beta * x.theta + p.curvature.quadratic(&x.z);
    let mut point = || {
        let z = (0..2).map(|_| C64::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0))).collect();
        HeisenbergPoint64::new(z, g.gen_range(-1.0..1.0))
    };
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let (x, y) = (point(), point());
        let kxy = heisenberg_heat_kernel(&p, 1, 0.8, &x, &y, None)?;
        let kyx = heisenberg_heat_kernel(&p, 1, 0.8, &y, &x, None)?;
        let s = ((weight(&y) - weight(&x)) / 2.0).exp();
        let a = kxy.endo.matrix.scale_real(s);
        let b = kyx.endo.matrix.scale_real(s.recip()).adjoint();
        worst = worst.max(a.max_abs_diff(&b) / a.max_abs());
    }
    verdict(worst, 1e-8, "max weighted adjoint asymmetry")
}

fn boxeta_semigroup() -> Outcome {
    let p = diag_point(&[1.0], &[0.5]);
    let g = GridSpec::new(6.0, 0.1, 1e-3)?;
    let probes = probe_pairs(1, 3, 1.0);
    let mut worst: f64 = 0.0;
    for eta in [-1.0, 0.0, 2.0] {
        let m = p.pencil_at(eta);
        let make = |t| FiberKernel::new(&m, 0, t).map(|k| move |x: &[f64], y: &[f64]| k.scalar_real(x, y));
        worst = worst.max(semigroup_check(1, make, 0.5, 0.5, &g, &probes)?);
    }
    verdict(worst, 1e-3, "max Chapman-Kolmogorov deviation")
}

fn boxeta_residual() -> Outcome {
    let p = CurvaturePoint64::new(
        HermitianForm64::identity(2),
        HermitianForm64::new(2, vec![C64::new(1.0, 0.0), C64::new(0.3, 0.4), C64::new(0.3, -0.4), C64::new(-0.5, 0.0)])?,
    )?;
    let probes = probe_pairs(2, 20, 1.0);
    let mut worst: f64 = 0.0;
    for q in 0..=2 {
        let m = p.pencil_at(0.2);
        let make = |t| {
            FiberKernel::new(&m, q, t).map(|k| {
                move |x: &[f64], y: &[f64]| {
                    k.eval(&crheat::ModelConventions::to_complex(x), &crheat::ModelConventions::to_complex(y))
                }
            })
        };
        let r = heat_residual_check(make, &BoxOperator::boxeta(&p, 0.2, q)?, 0.5, &probes, 0.05, 1e-3)?;
        worst = worst.max(r.residual);
    }
    verdict(worst, 1e-4, "max heat-equation residual over q = 0..2")
}

fn morse_exact() -> Outcome {
    let r = HermitianForm64::from_real_diagonal(&[-1.0, 1.0]);
    let l = HermitianForm64::identity(2);
    let v1 = morse_local(&r, &l, 1, None)?.finite();
    let v0 = morse_local(&r, &l, 0, None)?;
    let v0d = morse_local(&r, &l, 0, Some(1.0))?.finite();
    let ok = matches!(v1, Some(x) if (x - 2.0 / 3.0).abs() < 1e-14)
        && v0.is_divergent()
        && matches!(v0d, Some(x) if (x - 2.0 / 3.0).abs() < 1e-14);
    let show = |v: Option<f64>| v.map_or("divergent".to_string(), |x| format!("{x:?}"));
    Ok((ok, format!("j=1 full line {}, j=0 full line {}, j=0 delta=1 {}", show(v1), show(v0.finite()), show(v0d))))
}

fn morse_simpson() -> Outcome {
    let mut g = rng(12);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (n, delta) = (g.gen_range(1..=4), g.gen_range(0.5..4.0));
        let (r, l) = (hermitian(&mut g, n, 2.0), hermitian(&mut g, n, 1.0));
        let part = rx_partition(&r, &l)?;
        let poly = part.pencil().det_poly().to_vec();
        for j in 0..=n {
            let exact = morse_local(&r, &l, j, Some(delta))?.finite().unwrap_or(f64::NAN);
            let mut numeric = 0.0;
            for cell in part.cells_with(j) {
                let a = cell.lo.map_or(-delta, |a| a.max(-delta));
                let b = cell.hi.map_or(delta, |b| b.min(delta));
                if b > a {
                    numeric += reference_quadrature_real(|x| poly_eval(&poly, x).abs(), a, b, 1e-13)?;
                }
            }
            worst = worst.max((exact - numeric).abs() / exact.abs().max(1e-12));
        }
    }
    verdict(worst, 1e-10, "max relative deviation from Simpson")
}

fn morse_linearity() -> Outcome {
    let pt = || diag_point(&[-1.0, 1.0], &[1.0, 1.0]);
    let one = ManifoldDescriptor64::new("one", vec![pt()])?;
    let two = ManifoldDescriptor64::new("two", vec![pt(), pt()])?;
    let a = morse_global(&one, 1, None)?.per_j_weak[1].finite().unwrap_or(f64::NAN);
    let b = morse_global(&two, 1, None)?.per_j_weak[1].finite().unwrap_or(f64::NAN);
    verdict((b - 2.0 * a).abs() / a.abs(), 1e-15, "relative deviation of the doubled descriptor")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exterior_suite_passes() {
        let s = run_suite(Suite::Exterior);
        assert_eq!(s.checks.len(), 2);
        assert!(s.passed(), "{}", s.render(SummaryFormat::Text));
    }

    #[test]
    fn every_check_belongs_to_a_named_suite() {
        let names: Vec<String> =
            Suite::value_variants().iter().map(|s| s.to_possible_value().unwrap().get_name().to_string()).collect();
        assert!(CHECKS.iter().all(|(s, _, _)| names.iter().any(|n| n == s)));
    }
}
