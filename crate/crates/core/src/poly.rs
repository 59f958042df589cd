//! The pencil `M(η) = R - 2ηL`, its determinant polynomial and real roots.

use crate::error::{Error, Result};
use crate::hermitian::HermitianForm;
use crate::scalar::{Real, C};

/// Pencil `R - 2ηL` with its determinant polynomial `p(η)` (ascending coefficients).
#[derive(Debug, Clone, PartialEq)]
pub struct EtaPencil<T> {
    r: HermitianForm<T>,
    l: HermitianForm<T>,
    det_poly: Vec<T>,
}

/// Counts of negative, positive and (near-)zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub negatives: usize,
    pub positives: usize,
    pub zeros: usize,
}

impl<T: Real> EtaPencil<T> {
    pub fn new(r: HermitianForm<T>, l: HermitianForm<T>) -> Result<Self> {
        let det_poly = pencil_det_poly(&r, &l)?;
        Ok(Self { r, l, det_poly })
    }

    pub fn n(&self) -> usize {
        self.r.n()
    }

    pub fn curvature(&self) -> &HermitianForm<T> {
        &self.r
    }

    pub fn levi(&self) -> &HermitianForm<T> {
        &self.l
    }

    pub fn det_poly(&self) -> &[T] {
        &self.det_poly
    }

    pub fn at(&self, eta: T) -> HermitianForm<T> {
        self.r.pencil_at(&self.l, eta)
    }

    /// `p(η)` from the coefficients.
    pub fn eval(&self, eta: T) -> T {
        poly_eval(&self.det_poly, eta)
    }

    /// `det(R - 2ηL)` by LU, independent of the coefficients.
    pub fn det_direct(&self, eta: T) -> T {
        self.at(eta).determinant()
    }

    /// Sorted real roots of `p`. Simple roots are re-polished against the
    /// LU determinant, which is more accurate than the interpolated
    /// coefficients.
    pub fn roots(&self) -> Result<Vec<T>> {
        if self.det_poly.iter().all(|c| *c == T::zero()) {
            return Err(Error::IdenticallyDegeneratePencil);
        }
        let mut roots = pencil_real_roots(&self.det_poly)?;
        for r in roots.iter_mut() {
            let d = T::tol(1e-9) * (T::one() + r.abs());
            let (lo, hi) = (*r - d, *r + d);
            let (flo, fhi) = (self.det_direct(lo), self.det_direct(hi));
            if flo != T::zero() && fhi != T::zero() && (flo < T::zero()) != (fhi < T::zero()) {
                *r = bisect(|x| self.det_direct(x), lo, hi);
            }
        }
        Ok(roots)
    }

    /// Inertia of `M(η)` with dead-band `1e-10·‖M‖`.
    pub fn signature_at(&self, eta: T) -> Result<Signature> {
        let m = self.at(eta);
        let band = T::tol(1e-10) * m.norm();
        let eig = m.eig()?;
        let mut sig = Signature { negatives: 0, positives: 0, zeros: 0 };
        for &mu in &eig.eigenvalues {
            if mu.abs() <= band {
                sig.zeros += 1;
            } else if mu < T::zero() {
                sig.negatives += 1;
            } else {
                sig.positives += 1;
            }
        }
        Ok(sig)
    }
}

/// Horner evaluation of ascending coefficients.
pub fn poly_eval<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

/// `Σ |c_i||x|^i`, the natural magnitude for judging `p(x) ≈ 0`.
pub(crate) fn poly_abs_scale<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x.abs() + c.abs())
}

pub fn poly_derivative<T: Real>(coeffs: &[T]) -> Vec<T> {
    coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * T::count(k)).collect()
}

/// Antiderivative vanishing at 0.
pub fn poly_antiderivative<T: Real>(coeffs: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(coeffs.len() + 1);
    out.push(T::zero());
    out.extend(coeffs.iter().enumerate().map(|(k, &c)| c / T::count(k + 1)));
    out
}

/// Coefficients of `det(R - 2ηL)` by interpolation at Chebyshev nodes on
/// `[-s, s]`, `s = 1 + ‖R‖ + ‖L‖`.
///
/// Values at the outer nodes grow like `(s‖L‖)^n`, which costs accuracy where
/// the roots live. A second interpolation of the residual `det - p` on the
/// natural scale `(1 + ‖R‖)/(2‖L‖)` restores it.
pub fn pencil_det_poly<T: Real>(r: &HermitianForm<T>, l: &HermitianForm<T>) -> Result<Vec<T>> {
    if r.n() != l.n() {
        return Err(Error::DimensionMismatch { expected: r.n(), found: l.n() });
    }
    let n = r.n();
    let s = T::one() + r.norm() + l.norm();
    let det = |eta: T| r.pencil_at(l, eta).matrix().determinant();

    let mut coeffs = chebyshev_fit(n, s, det);
    if l.norm() > T::zero() {
        let s2 = ((T::one() + r.norm()) / (T::lit(2.0) * l.norm())).min(s);
        let re: Vec<T> = coeffs.iter().map(|c| c.re).collect();
        let correction = chebyshev_fit(n, s2, |eta| det(eta) - C::new(poly_eval(&re, eta), T::zero()));
        for (c, d) in coeffs.iter_mut().zip(correction) {
            *c += d;
        }
    }

    // Trim in the scaled variable, where the coefficients are comparable.
    let max = coeffs
        .iter()
        .enumerate()
        .map(|(m, a)| a.norm() * s.powi(m as i32))
        .fold(T::zero(), T::max);
    let trim = T::tol(1e-12) * max;
    let mut out: Vec<T> = coeffs
        .iter()
        .enumerate()
        .map(|(m, a)| if a.norm() * s.powi(m as i32) < trim { T::zero() } else { a.re })
        .collect();
    while out.len() > 1 && *out.last().unwrap() == T::zero() {
        out.pop();
    }
    Ok(out)
}

/// Degree-`n` interpolant of `f` at the `n+1` Chebyshev nodes of `[-s, s]`,
/// returned as monomial coefficients in the unscaled variable.
fn chebyshev_fit<T: Real>(n: usize, s: T, f: impl Fn(T) -> C<T>) -> Vec<C<T>> {
    let npts = n + 1;
    let pi = T::PI();
    let zero = C::new(T::zero(), T::zero());
    let values: Vec<C<T>> = (0..npts)
        .map(|k| f(s * (pi * (T::count(k) + T::lit(0.5)) / T::count(npts)).cos()))
        .collect();

    let cheb: Vec<C<T>> = (0..npts)
        .map(|j| {
            let acc = (0..npts).fold(zero, |acc, k| {
                let angle = pi * T::count(j) * (T::count(k) + T::lit(0.5)) / T::count(npts);
                acc + values[k] * angle.cos()
            });
            let norm = if j == 0 { T::one() } else { T::lit(2.0) };
            acc * norm / T::count(npts)
        })
        .collect();

    // Monomial coefficients of T_j by the three-term recurrence.
    let mut mono = vec![zero; npts];
    let mut t_prev = vec![T::zero(); npts];
    let mut t_cur = vec![T::zero(); npts];
    t_prev[0] = T::one();
    if npts > 1 {
        t_cur[1] = T::one();
    }
    for (j, cj) in cheb.iter().enumerate() {
        if j >= 2 {
            let mut next = vec![T::zero(); npts];
            for i in 0..npts {
                if i > 0 {
                    next[i] += T::lit(2.0) * t_cur[i - 1];
                }
                next[i] -= t_prev[i];
            }
            t_prev = std::mem::replace(&mut t_cur, next);
        }
        let tj = if j == 0 { &t_prev } else { &t_cur };
        for i in 0..npts {
            mono[i] += *cj * tj[i];
        }
    }
    mono.iter().enumerate().map(|(m, &a)| a / s.powi(m as i32)).collect()
}

/// Sorted distinct real roots of `p` (ascending coefficients).
pub fn pencil_real_roots<T: Real>(p: &[T]) -> Result<Vec<T>> {
    let mut coeffs = p.to_vec();
    while coeffs.last() == Some(&T::zero()) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }

    let lead = coeffs[deg];
    let mut comp = vec![vec![T::zero(); deg]; deg];
    for j in 0..deg {
        comp[0][j] = -coeffs[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        comp[i][i - 1] = T::one();
    }
    balance(&mut comp);
    let eigs = hqr(comp)?;

    let mut roots = Vec::new();
    for (re, im) in eigs {
        let slack = T::one() + re.abs();
        let accept = im.abs() < T::tol(1e-8) * slack
            || (im.abs() < T::lit(1e-4) * slack
                && poly_eval(&coeffs, re).abs() <= T::tol(1e-7) * poly_abs_scale(&coeffs, re));
        if accept {
            roots.push(polish(&coeffs, re, im.abs()));
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    let mut out: Vec<T> = Vec::with_capacity(roots.len());
    for r in roots {
        match out.last() {
            Some(&last) if (r - last).abs() <= T::tol(1e-7) * (T::one() + r.abs()) => {}
            _ => out.push(r),
        }
    }
    Ok(out)
}

/// Refines a root estimate by bisection on `p`, or on the derivative
/// `p^{(m-1)}` for a root of multiplicity `m`, inside the smallest bracket
/// that shows a sign change above rounding noise.
fn polish<T: Real>(p: &[T], x0: T, spread: T) -> T {
    let mut chain = vec![p.to_vec()];
    while chain.last().unwrap().len() > 2 {
        let d = poly_derivative(chain.last().unwrap());
        chain.push(d);
    }
    let noise = |f: &[T], x: T| T::lit(8.0) * T::count(f.len()) * T::epsilon() * poly_abs_scale(f, x);
    let mut d = T::tol(1e-12) * (T::one() + x0.abs());
    let max_d = T::lit(1e-3) * (T::one() + x0.abs()) + spread;
    while d <= max_d {
        for f in &chain {
            let (lo, hi) = (x0 - d, x0 + d);
            let (flo, fhi) = (poly_eval(f, lo), poly_eval(f, hi));
            let loud = flo.abs() > noise(f, lo) || fhi.abs() > noise(f, hi);
            if loud && (flo < T::zero()) != (fhi < T::zero()) {
                return bisect(|x| poly_eval(f, x), lo, hi);
            }
        }
        d = d * T::lit(10.0);
    }
    x0
}

pub(crate) fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if (fm < T::zero()) == (flo < T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// Diagonal similarity balancing by powers of two.
fn balance<T: Real>(a: &mut [Vec<T>]) {
    let n = a.len();
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let mut g = r / radix;
            let mut f = T::one();
            let s = c + r;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < T::lit(0.95) * s {
                done = false;
                let g = T::one() / f;
                for j in 0..n {
                    a[i][j] *= g;
                }
                for row in a.iter_mut() {
                    row[i] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

fn sign_of<T: Real>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues `(re, im)` of a real upper Hessenberg matrix by the shifted
/// double-step QR iteration.
fn hqr<T: Real>(mut a: Vec<Vec<T>>) -> Result<Vec<(T, T)>> {
    let n = a.len() as isize;
    let mut wr = vec![T::zero(); n as usize];
    let mut wi = vec![T::zero(); n as usize];
    let mut anorm = T::zero();
    for i in 0..n as usize {
        for j in i.saturating_sub(1)..n as usize {
            anorm += a[i][j].abs();
        }
    }
    macro_rules! at {
        ($i:expr, $j:expr) => {
            a[($i) as usize][($j) as usize]
        };
    }

    let mut nn = n - 1;
    let mut t = T::zero();
    let (mut p, mut q, mut r) = (T::zero(), T::zero(), T::zero());
    let (mut x, mut y, mut z, mut w);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 1 {
                let mut s = at!(l - 1, l - 1).abs() + at!(l, l).abs();
                if s == T::zero() {
                    s = anorm;
                }
                if at!(l, l - 1).abs() + s == s {
                    at!(l, l - 1) = T::zero();
                    break;
                }
                l -= 1;
            }
            x = at!(nn, nn);
            if l == nn {
                wr[nn as usize] = x + t;
                wi[nn as usize] = T::zero();
                nn -= 1;
                break;
            }
            y = at!(nn - 1, nn - 1);
            w = at!(nn, nn - 1) * at!(nn - 1, nn);
            if l == nn - 1 {
                p = T::lit(0.5) * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                let (i1, i0) = (nn as usize, (nn - 1) as usize);
                if q >= T::zero() {
                    z = p + sign_of(z, p);
                    wr[i0] = x + z;
                    wr[i1] = x + z;
                    if z != T::zero() {
                        wr[i1] = x - w / z;
                    }
                    wi[i0] = T::zero();
                    wi[i1] = T::zero();
                } else {
                    wr[i0] = x + p;
                    wr[i1] = x + p;
                    wi[i0] = -z;
                    wi[i1] = z;
                }
                nn -= 2;
                break;
            }
            if its == 60 {
                return Err(Error::NoConvergence { sweeps: its });
            }
            if its == 10 || its == 20 || its == 40 {
                t += x;
                for i in 0..=nn {
                    at!(i, i) -= x;
                }
                let s = at!(nn, nn - 1).abs() + at!(nn - 1, nn - 2).abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            its += 1;
            let mut m = nn - 2;
            while m >= l {
                z = at!(m, m);
                r = x - z;
                let s = y - z;
                p = (r * s - w) / at!(m + 1, m) + at!(m, m + 1);
                q = at!(m + 1, m + 1) - z - r - s;
                r = at!(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = at!(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (at!(m - 1, m - 1).abs() + z.abs() + at!(m + 1, m + 1).abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                at!(i, i - 2) = T::zero();
                if i != m + 2 {
                    at!(i, i - 3) = T::zero();
                }
            }
            let mut k = m;
            while k <= nn - 1 {
                if k != m {
                    p = at!(k, k - 1);
                    q = at!(k + 1, k - 1);
                    r = T::zero();
                    if k != nn - 1 {
                        r = at!(k + 2, k - 1);
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != T::zero() {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign_of((p * p + q * q + r * r).sqrt(), p);
                if s != T::zero() {
                    if k == m {
                        if l != m {
                            at!(k, k - 1) = -at!(k, k - 1);
                        }
                    } else {
                        at!(k, k - 1) = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        p = at!(k, j) + q * at!(k + 1, j);
                        if k != nn - 1 {
                            p += r * at!(k + 2, j);
                            at!(k + 2, j) -= p * z;
                        }
                        at!(k + 1, j) -= p * y;
                        at!(k, j) -= p * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        p = x * at!(i, k) + y * at!(i, k + 1);
                        if k != nn - 1 {
                            p += z * at!(i, k + 2);
                            at!(i, k + 2) -= p * r;
                        }
                        at!(i, k + 1) -= p * q;
                        at!(i, k) -= p;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).collect())
}
