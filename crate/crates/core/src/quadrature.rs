//! Adaptive 15-point Gauss–Kronrod quadrature for vector-valued complex
//! integrands on a union of panels.
//!
//! Refinement is global: every round bisects each panel whose error estimate
//! exceeds its length-proportional share of the tolerance. The new panels of
//! one round are evaluated in parallel and collected in order, and sums are
//! pairwise over the ordered panel list, so results do not depend on the
//! thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, pairwise_sum_vecs, Real, C};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self { abs_tol: T::tol(1e-9), rel_tol: T::tol(1e-9), max_subdivisions: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult<T> {
    pub value: Vec<C<T>>,
    pub error: T,
    pub panels: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
struct Panel<T> {
    a: T,
    b: T,
    value: Vec<C<T>>,
    error: T,
}

fn gk15<T: Real, F>(f: &F, a: T, b: T) -> Panel<T>
where
    F: Fn(T) -> Vec<C<T>>,
{
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let center = f(mid);
    let dim = center.len();
    let mut kron: Vec<C<T>> = center.iter().map(|&v| v * T::lit(WGK[7])).collect();
    let mut gauss: Vec<C<T>> = center.iter().map(|&v| v * T::lit(WG[3])).collect();
    for (k, &x) in XGK[..7].iter().enumerate() {
        let dx = half * T::lit(x);
        let (lo, hi) = (f(mid - dx), f(mid + dx));
        let wk = T::lit(WGK[k]);
        for i in 0..dim {
            let s = lo[i] + hi[i];
            kron[i] += s * wk;
            if k % 2 == 1 {
                gauss[i] += s * T::lit(WG[k / 2]);
            }
        }
    }
    let mut error = T::zero();
    for i in 0..dim {
        kron[i] = kron[i] * half;
        gauss[i] = gauss[i] * half;
        error = error.max((kron[i] - gauss[i]).norm());
    }
    Panel { a, b, value: kron, error }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, never placing a node on
/// an interior break point.
pub fn integrate<T, F>(f: &F, breaks: &[T], opts: &QuadOptions<T>) -> Result<QuadResult<T>>
where
    T: Real,
    F: Fn(T) -> Vec<C<T>> + Sync,
{
    let mut spans: Vec<(T, T)> =
        breaks.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect();
    if spans.is_empty() {
        return Ok(QuadResult { value: Vec::new(), error: T::zero(), panels: 0, evaluations: 0 });
    }
    let total_len = pairwise_sum(&spans.iter().map(|(a, b)| *b - *a).collect::<Vec<_>>());
    let mut panels: Vec<Panel<T>> = spans.par_drain(..).map(|(a, b)| gk15(f, a, b)).collect();
    let mut evaluations = 15 * panels.len();

    loop {
        let value = pairwise_sum_vecs(&panels.iter().map(|p| p.value.clone()).collect::<Vec<_>>());
        let error = pairwise_sum(&panels.iter().map(|p| p.error).collect::<Vec<_>>());
        let magnitude = value.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        let tol = opts.abs_tol.max(opts.rel_tol * magnitude);
        if error <= tol {
            return Ok(QuadResult { value, error, panels: panels.len(), evaluations });
        }
        if panels.len() >= opts.max_subdivisions {
            return Err(Error::MaxSubdivisions { limit: opts.max_subdivisions });
        }

        let mut split: Vec<bool> = panels
            .iter()
            .map(|p| {
                let resolvable = p.b - p.a > T::lit(64.0) * T::epsilon() * (T::one() + p.a.abs().max(p.b.abs()));
                resolvable && p.error > tol * (p.b - p.a) / total_len
            })
            .collect();
        if !split.iter().any(|&s| s) {
            // the shares are met but the sum is not: take the worst panel
            let worst = (0..panels.len())
                .max_by(|&i, &j| panels[i].error.partial_cmp(&panels[j].error).expect("finite errors"))
                .expect("nonempty");
            split[worst] = true;
        }
        let halves: Vec<(T, T)> = panels
            .iter()
            .zip(&split)
            .filter(|(_, &s)| s)
            .flat_map(|(p, _)| {
                let m = (p.a + p.b) / T::lit(2.0);
                [(p.a, m), (m, p.b)]
            })
            .collect();
        if halves.is_empty() {
            return Err(Error::MaxSubdivisions { limit: panels.len() });
        }
        evaluations += 15 * halves.len();
        let mut fresh = halves.into_par_iter().map(|(a, b)| gk15(f, a, b)).collect::<Vec<_>>().into_iter();
        let mut next = Vec::with_capacity(panels.len() * 2);
        for (p, s) in panels.into_iter().zip(split) {
            if s {
                next.push(fresh.next().expect("left half"));
                next.push(fresh.next().expect("right half"));
            } else {
                next.push(p);
            }
        }
        panels = next;
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_real<T, F>(f: &F, breaks: &[T], opts: &QuadOptions<T>) -> Result<(T, T)>
where
    T: Real,
    F: Fn(T) -> T + Sync,
{
    let g = |x: T| vec![C::new(f(x), T::zero())];
    let r = integrate(&g, breaks, opts)?;
    Ok((r.value.first().map_or(T::zero(), |z| z.re), r.error))
}

/// Splits `[a, b]` at the given interior points and further so that no
/// panel is wider than `max_width`.
pub fn panel_breaks<T: Real>(a: T, b: T, interior: &[T], max_width: T) -> Vec<T> {
    let mut pts: Vec<T> = vec![a];
    pts.extend(interior.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).expect("finite break points"));
    pts.dedup();
    let mut out = vec![pts[0]];
    for w in pts.windows(2) {
        let pieces = ((w[1] - w[0]) / max_width).ceil().to_usize().unwrap_or(1).max(1);
        for k in 1..=pieces {
            out.push(if k == pieces { w[1] } else { w[0] + (w[1] - w[0]) * T::count(k) / T::count(pieces) });
        }
    }
    out
}
