//! Adaptive Simpson quadrature, deliberately unrelated to the Gauss–Kronrod
//! path used by the library.

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

const MAX_INTERVALS: usize = 1 << 20;

struct Piece<T> {
    a: T,
    b: T,
    fa: Vec<C<T>>,
    fm: Vec<C<T>>,
    fb: Vec<C<T>>,
    whole: Vec<C<T>>,
}

fn simpson<T: Real>(a: T, b: T, fa: &[C<T>], fm: &[C<T>], fb: &[C<T>]) -> Vec<C<T>> {
    let h = (b - a) / T::lit(6.0);
    fa.iter().zip(fm).zip(fb).map(|((&x, &y), &z)| (x + y * T::lit(4.0) + z) * h).collect()
}

fn dist<T: Real>(u: &[C<T>], v: &[C<T>]) -> T {
    u.iter().zip(v).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
}

/// `∫_a^b f` for a vector of complex values. The local acceptance test uses
/// a tenth of `tol`, relative to the size of a first coarse estimate and
/// proportional to interval length.
pub fn reference_quadrature<T, F>(f: F, a: T, b: T, tol: T) -> Result<Vec<C<T>>>
where
    T: Real,
    F: Fn(T) -> Vec<C<T>>,
{
    capped(f, a, b, tol, MAX_INTERVALS)
}

fn capped<T, F>(f: F, a: T, b: T, tol: T, cap: usize) -> Result<Vec<C<T>>>
where
    T: Real,
    F: Fn(T) -> Vec<C<T>>,
{
    if !(b > a) {
        let dim = f(a).len();
        return Ok(vec![C::new(T::zero(), T::zero()); dim]);
    }
    let tol = tol / T::lit(10.0);
    let two = T::lit(2.0);
    // coarse scale from a 16-panel composite rule
    let coarse = (0..=16)
        .map(|k| f(a + (b - a) * T::count(k) / T::lit(16.0)))
        .fold(T::zero(), |m, v| m.max(v.iter().fold(T::zero(), |mm, z| mm.max(z.norm()))));
    let target = tol * (coarse * (b - a)).max(T::min_positive_value());

    let (fa, fb, fm) = (f(a), f(b), f((a + b) / two));
    let whole = simpson(a, b, &fa, &fm, &fb);
    let mut stack = vec![Piece { a, b, fa, fm, fb, whole }];
    let mut acc: Option<Vec<C<T>>> = None;
    let mut intervals = 1usize;
    while let Some(p) = stack.pop() {
        let m = (p.a + p.b) / two;
        let (flm, frm) = (f((p.a + m) / two), f((m + p.b) / two));
        let left = simpson(p.a, m, &p.fa, &flm, &p.fm);
        let right = simpson(m, p.b, &p.fm, &frm, &p.fb);
        let both: Vec<C<T>> = left.iter().zip(&right).map(|(x, y)| *x + *y).collect();
        let local = target * (p.b - p.a) / (b - a);
        let tiny = p.b - p.a <= T::lit(64.0) * T::epsilon() * (T::one() + p.a.abs());
        if dist(&both, &p.whole) <= T::lit(15.0) * local || tiny {
            // Richardson step
            let refined: Vec<C<T>> =
                both.iter().zip(&p.whole).map(|(s2, s1)| *s2 + (*s2 - *s1) / T::lit(15.0)).collect();
            match acc.as_mut() {
                None => acc = Some(refined),
                Some(v) => v.iter_mut().zip(refined).for_each(|(x, y)| *x += y),
            }
            continue;
        }
        intervals += 1;
        if intervals > cap {
            return Err(Error::MaxSubdivisions { limit: cap });
        }
        stack.push(Piece { a: m, b: p.b, fa: p.fm.clone(), fm: frm, fb: p.fb, whole: right });
        stack.push(Piece { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left });
    }
    Ok(acc.unwrap_or_default())
}

pub fn reference_quadrature_real<T, F>(f: F, a: T, b: T, tol: T) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let v = reference_quadrature(|x| vec![C::new(f(x), T::zero())], a, b, tol)?;
    Ok(v[0].re)
}
