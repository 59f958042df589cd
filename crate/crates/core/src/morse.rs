//! Signature partitions of the pencil, exact Morse integrals and the
//! finite-t heat traces that approach them.

use rayon::prelude::*;

use crate::density::{density_diagonal_with, real_trace, y_condition, CurvaturePoint};
use crate::error::{Error, Result};
use crate::hermitian::HermitianForm;
use crate::poly::{poly_antiderivative, poly_eval, EtaPencil, Signature};
use crate::quadrature::QuadOptions;
use crate::scalar::{pairwise_sum, Real};

/// One open interval of constant inertia; `None` ends are infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<T> {
    pub lo: Option<T>,
    pub hi: Option<T>,
    pub signature: Signature,
}

impl<T: Real> Cell<T> {
    pub fn is_bounded(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    /// Intersection with `[-δ, δ]`, if nonempty. Unbounded ends stay `None`
    /// when no δ is given.
    fn clip(&self, delta: Option<T>) -> Option<(Option<T>, Option<T>)> {
        let Some(d) = delta else { return Some((self.lo, self.hi)) };
        let lo = self.lo.map_or(-d, |a| a.max(-d));
        let hi = self.hi.map_or(d, |b| b.min(d));
        (hi > lo).then_some((Some(lo), Some(hi)))
    }
}

/// The partition of ℝ by the real roots of `det(R - 2ηL)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaPartition<T> {
    pub breakpoints: Vec<T>,
    pub cells: Vec<Cell<T>>,
    pencil: EtaPencil<T>,
}

impl<T: Real> EtaPartition<T> {
    pub fn pencil(&self) -> &EtaPencil<T> {
        &self.pencil
    }

    pub fn cells_with(&self, negatives: usize) -> impl Iterator<Item = &Cell<T>> {
        self.cells.iter().filter(move |c| c.signature.negatives == negatives && c.signature.zeros == 0)
    }
}

pub fn rx_partition<T: Real>(r: &HermitianForm<T>, l: &HermitianForm<T>) -> Result<EtaPartition<T>> {
    let pencil = EtaPencil::new(r.clone(), l.clone())?;
    let breakpoints = pencil.roots()?;
    let reach = T::one() + r.norm() / (T::one() + l.norm());
    let mut cells = Vec::with_capacity(breakpoints.len() + 1);
    let mut lo: Option<T> = None;
    for k in 0..=breakpoints.len() {
        let hi = breakpoints.get(k).copied();
        let probe = match (lo, hi) {
            (Some(a), Some(b)) => (a + b) / T::lit(2.0),
            (Some(a), None) => a + reach,
            (None, Some(b)) => b - reach,
            (None, None) => T::zero(),
        };
        cells.push(Cell { lo, hi, signature: pencil.signature_at(probe)? });
        lo = hi;
    }
    Ok(EtaPartition { breakpoints, cells, pencil })
}

/// A Morse integral: finite, or divergent because a signature cell is
/// unbounded and no truncation was given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MorseValue<T> {
    Finite(T),
    Divergent,
}

impl<T: Real> MorseValue<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            MorseValue::Finite(v) => Some(v),
            MorseValue::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, MorseValue::Divergent)
    }
}

/// `∫_{R(j) ∩ [-δ,δ]} |det(R - 2ηL)| dη` by the exact antiderivative.
pub fn morse_local<T: Real>(
    r: &HermitianForm<T>,
    l: &HermitianForm<T>,
    j: usize,
    delta: Option<T>,
) -> Result<MorseValue<T>> {
    let n = r.n();
    if j > n {
        return Err(Error::DegreeOutOfRange { n, q: j });
    }
    check_delta(delta)?;
    let part = rx_partition(r, l)?;
    morse_on_partition(&part, j, delta)
}

fn check_delta<T: Real>(delta: Option<T>) -> Result<()> {
    match delta {
        Some(d) if !(d >= T::zero()) => Err(Error::InvalidParameter(format!("delta must be nonnegative, got {d}"))),
        _ => Ok(()),
    }
}

pub fn morse_on_partition<T: Real>(part: &EtaPartition<T>, j: usize, delta: Option<T>) -> Result<MorseValue<T>> {
    let p = part.pencil.det_poly();
    let anti = poly_antiderivative(p);
    let mut pieces = Vec::new();
    for cell in part.cells_with(j) {
        let Some((lo, hi)) = cell.clip(delta) else { continue };
        // |p| > 0 on the open cell, so even a constant diverges there
        let (Some(a), Some(b)) = (lo, hi) else { return Ok(MorseValue::Divergent) };
        let sign = poly_eval(p, (a + b) / T::lit(2.0)).signum();
        pieces.push(sign * (poly_eval(&anti, b) - poly_eval(&anti, a)));
    }
    Ok(MorseValue::Finite(pairwise_sum(&pieces)))
}

/// Points `x_i` with weights `w_i` standing in for `∫_X … dv_X`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldDescriptor<T> {
    pub name: String,
    pub q_max: usize,
    points: Vec<CurvaturePoint<T>>,
}

impl<T: Real> ManifoldDescriptor<T> {
    pub fn new(name: impl Into<String>, points: Vec<CurvaturePoint<T>>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyDescriptor)?.n();
        if let Some(p) = points.iter().find(|p| p.n() != first) {
            return Err(Error::MixedDimension { first, other: p.n() });
        }
        Ok(Self { name: name.into(), q_max: first, points })
    }

    pub fn with_q_max(mut self, q_max: usize) -> Result<Self> {
        if q_max > self.n() {
            return Err(Error::DegreeOutOfRange { n: self.n(), q: q_max });
        }
        self.q_max = q_max;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.points[0].n()
    }

    pub fn points(&self) -> &[CurvaturePoint<T>] {
        &self.points
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorseReport<T> {
    pub q: usize,
    pub delta: Option<T>,
    /// Weak bounds for `j = 0..=q`, including `(2π)^{-(n+1)}` and weights.
    pub per_j_weak: Vec<MorseValue<T>>,
    /// `Σ_{j≤m} (-1)^{m-j} weak_j` for `m = 0..=q`, `None` once a term diverges.
    pub strong_partial_sums: Vec<Option<T>>,
    /// `feasibility[j]`: every point gave a finite integral.
    pub feasibility: Vec<bool>,
    /// `y_condition[i][j]`: Y(j) at point i.
    pub y_condition: Vec<Vec<bool>>,
    /// Whether the strong inequality at level m has its hypotheses: δ given,
    /// or Y(j) at every point for all j ≤ m.
    pub strong_hypothesis: Vec<bool>,
}

impl<T: Real> MorseReport<T> {
    pub fn all_infeasible(&self) -> bool {
        self.feasibility.iter().all(|f| !f)
    }
}

fn check_degree<T: Real>(d: &ManifoldDescriptor<T>, q: usize) -> Result<()> {
    if q > d.n() {
        return Err(Error::DegreeOutOfRange { n: d.n(), q });
    }
    Ok(())
}

fn norm_const<T: Real>(n: usize) -> T {
    (T::lit(2.0) * T::PI()).powi(-(n as i32 + 1))
}

pub fn morse_global<T: Real>(d: &ManifoldDescriptor<T>, q: usize, delta: Option<T>) -> Result<MorseReport<T>> {
    check_degree(d, q)?;
    check_delta(delta)?;
    let n = d.n();
    let local: Vec<Vec<MorseValue<T>>> = d
        .points
        .par_iter()
        .map(|p| {
            let part = rx_partition(&p.curvature, &p.levi)?;
            (0..=q).map(|j| morse_on_partition(&part, j, delta)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let y = d
        .points
        .iter()
        .map(|p| {
            let lambda = p.levi_eigenvalues()?;
            (0..=q).map(|j| y_condition(&lambda, j)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let c = norm_const::<T>(n);
    let mut per_j_weak = Vec::with_capacity(q + 1);
    for j in 0..=q {
        let terms: Option<Vec<T>> =
            d.points.iter().zip(&local).map(|(p, v)| v[j].finite().map(|x| p.weight * x)).collect();
        per_j_weak.push(terms.map_or(MorseValue::Divergent, |t| MorseValue::Finite(c * pairwise_sum(&t))));
    }
    let feasibility: Vec<bool> = per_j_weak.iter().map(|v| !v.is_divergent()).collect();
    let strong_partial_sums = (0..=q)
        .map(|m| {
            let terms: Option<Vec<T>> = (0..=m)
                .map(|j| per_j_weak[j].finite().map(|v| if (m - j) % 2 == 0 { v } else { -v }))
                .collect();
            terms.map(|t| pairwise_sum(&t))
        })
        .collect();
    let strong_hypothesis =
        (0..=q).map(|m| delta.is_some() || y.iter().all(|row| row[..=m].iter().all(|&b| b))).collect();
    Ok(MorseReport { q, delta, per_j_weak, strong_partial_sums, feasibility, y_condition: y, strong_hypothesis })
}

/// `Σ_i w_i Tr density_diagonal(x_i, j, t, δ)` for `j = 0..=q`.
pub fn heat_trace<T: Real>(d: &ManifoldDescriptor<T>, q: usize, t: T, delta: Option<T>) -> Result<Vec<T>> {
    check_degree(d, q)?;
    (0..=q).map(|j| heat_trace_degree(d, j, t, delta)).collect()
}

/// The single-degree term of [`heat_trace`].
pub fn heat_trace_degree<T: Real>(d: &ManifoldDescriptor<T>, j: usize, t: T, delta: Option<T>) -> Result<T> {
    heat_trace_degree_with(d, j, t, delta, &QuadOptions::default())
}

pub fn heat_trace_degree_with<T: Real>(
    d: &ManifoldDescriptor<T>,
    j: usize,
    t: T,
    delta: Option<T>,
    opts: &QuadOptions<T>,
) -> Result<T> {
    check_degree(d, j)?;
    let terms: Vec<T> = d
        .points
        .iter()
        .map(|p| Ok(p.weight * real_trace(&density_diagonal_with(p, j, t, delta, opts)?)?))
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::density_diagonal;
    use approx::assert_relative_eq;

    fn diag(v: &[f64]) -> HermitianForm<f64> {
        HermitianForm::from_real_diagonal(v)
    }

    fn sig(negatives: usize, positives: usize) -> Signature {
        Signature { negatives, positives, zeros: 0 }
    }

    #[test]
    fn partition_examples() {
        let p = rx_partition(&diag(&[-1.0, 1.0]), &diag(&[1.0, 1.0])).unwrap();
        assert_eq!(p.breakpoints.len(), 2);
        assert!((p.breakpoints[0] + 0.5).abs() < 1e-14 && (p.breakpoints[1] - 0.5).abs() < 1e-14);
        let sigs: Vec<_> = p.cells.iter().map(|c| c.signature).collect();
        assert_eq!(sigs, vec![sig(0, 2), sig(1, 1), sig(2, 0)]);

        let p = rx_partition(&diag(&[2.0, -1.0]), &diag(&[0.0, 0.0])).unwrap();
        assert!(p.breakpoints.is_empty());
        assert_eq!(p.cells.len(), 1);
        assert_eq!(p.cells[0].signature, sig(1, 1));

        let p = rx_partition(&diag(&[1.0, 1.0]), &diag(&[1.0, 1.0])).unwrap();
        assert_eq!(p.breakpoints.len(), 1);
        assert!((p.breakpoints[0] - 0.5).abs() < 1e-12);
        let sigs: Vec<_> = p.cells.iter().map(|c| c.signature).collect();
        assert_eq!(sigs, vec![sig(0, 2), sig(2, 0)]);

        assert!(matches!(
            rx_partition(&diag(&[0.0, 1.0]), &diag(&[0.0, 0.0])),
            Err(Error::IdenticallyDegeneratePencil)
        ));
    }

    #[test]
    fn local_examples() {
        let (r, l) = (diag(&[-1.0, 1.0]), diag(&[1.0, 1.0]));
        let v = morse_local(&r, &l, 1, None).unwrap().finite().unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-14);
        let v = morse_local(&r, &l, 0, Some(1.0)).unwrap().finite().unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-14);
        assert!(morse_local(&r, &l, 0, None).unwrap().is_divergent());
        assert_eq!(morse_local(&r, &l, 2, Some(0.0)).unwrap(), MorseValue::Finite(0.0));
        // constant determinant on the whole line
        assert!(morse_local(&diag(&[1.0]), &diag(&[0.0]), 0, None).unwrap().is_divergent());
    }

    fn single(weight: f64) -> CurvaturePoint<f64> {
        CurvaturePoint::new(diag(&[1.0, 1.0]), diag(&[-1.0, 1.0])).unwrap().with_weight(weight).unwrap()
    }

    #[test]
    fn global_report() {
        let d = ManifoldDescriptor::new("one", vec![single(1.0)]).unwrap();
        let rep = morse_global(&d, 1, None).unwrap();
        let c = (2.0 * std::f64::consts::PI).powi(-3);
        assert!(rep.per_j_weak[0].is_divergent());
        assert_relative_eq!(rep.per_j_weak[1].finite().unwrap(), c * 2.0 / 3.0, max_relative = 1e-14);
        assert_eq!(rep.feasibility, vec![false, true]);
        assert_eq!(rep.strong_partial_sums, vec![None, None]);
        assert_eq!(rep.y_condition, vec![vec![false, true]]);

        let two = ManifoldDescriptor::new("two", vec![single(0.5), single(0.5)]).unwrap();
        let rep2 = morse_global(&two, 1, None).unwrap();
        assert_relative_eq!(
            rep2.per_j_weak[1].finite().unwrap(),
            rep.per_j_weak[1].finite().unwrap(),
            max_relative = 1e-15
        );

        let zero = morse_global(&d, 2, Some(0.0)).unwrap();
        assert!(zero.per_j_weak.iter().all(|v| *v == MorseValue::Finite(0.0)));
        assert!(zero.strong_partial_sums.iter().all(|v| *v == Some(0.0)));

        let cut = morse_global(&d, 2, Some(1.0)).unwrap();
        for m in 0..=2 {
            let direct: f64 = (0..=m)
                .map(|j| (-1f64).powi((m - j) as i32) * cut.per_j_weak[j].finite().unwrap())
                .sum();
            assert!((cut.strong_partial_sums[m].unwrap() - direct).abs() < 1e-16);
        }
    }

    #[test]
    fn descriptor_errors() {
        assert!(matches!(ManifoldDescriptor::<f64>::new("e", vec![]), Err(Error::EmptyDescriptor)));
        let p1 = CurvaturePoint::new(diag(&[1.0]), diag(&[1.0])).unwrap();
        assert!(matches!(
            ManifoldDescriptor::new("m", vec![p1, single(1.0)]),
            Err(Error::MixedDimension { first: 1, other: 2 })
        ));
    }

    #[test]
    fn heat_trace_basics() {
        let d = ManifoldDescriptor::new("one", vec![single(1.0)]).unwrap();
        assert_eq!(heat_trace(&d, 2, 1.0, Some(0.0)).unwrap(), vec![0.0; 3]);
        let tr = heat_trace_degree(&d, 1, 1.0, None).unwrap();
        let direct = density_diagonal(&d.points()[0], 1, 1.0, None).unwrap().trace();
        assert_eq!(tr, direct.re);
        assert!(matches!(heat_trace(&d, 1, 1.0, None), Err(Error::DivergentIntegral { .. })));
    }
}
