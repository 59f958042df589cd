//! Degree-q exterior algebra over `ℂⁿ`: the ordered basis `ω̄^J`, the
//! wedge-and-contract endomorphism `ω(M) = Σ M_jl ω̄^j ∧ (ω̄^l ∧)*`, and its
//! exponential.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::hermitian::{EigenSystem, HermitianForm};
use crate::matrix::CMatrix;
use crate::scalar::{binomial, Real, C};

/// Strictly increasing q-tuples of `{0..n}` in lexicographic order. Indices
/// are 0-based; [`MultiIndexBasis::one_based`] gives the conventional labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndexBasis {
    n: usize,
    q: usize,
    indices: Vec<Vec<usize>>,
}

impl MultiIndexBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.indices.iter().map(|j| j.iter().map(|i| i + 1).collect()).collect()
    }

    /// Position of a sorted multi-index.
    pub fn position(&self, idx: &[usize]) -> Option<usize> {
        self.indices.binary_search_by(|probe| probe.as_slice().cmp(idx)).ok()
    }
}

impl fmt::Display for MultiIndexBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .one_based()
            .iter()
            .map(|j| format!("({})", j.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", parts.join(","))
    }
}

pub fn basis(n: usize, q: usize) -> Result<MultiIndexBasis> {
    if q > n || n == 0 {
        return Err(Error::DegreeOutOfRange { n, q });
    }
    let mut indices = Vec::with_capacity(binomial(n, q));
    let mut cur: Vec<usize> = (0..q).collect();
    loop {
        indices.push(cur.clone());
        // advance to the next combination
        let mut i = q;
        loop {
            if i == 0 {
                return Ok(MultiIndexBasis { n, q, indices });
            }
            i -= 1;
            if cur[i] < n - q + i {
                cur[i] += 1;
                for k in i + 1..q {
                    cur[k] = cur[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// A complex matrix acting on the `Λ^q` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FormEndomorphism<T> {
    pub basis: MultiIndexBasis,
    pub matrix: CMatrix<T>,
}

impl<T: Real> FormEndomorphism<T> {
    pub fn new(basis: MultiIndexBasis, matrix: CMatrix<T>) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: matrix.nrows() });
        }
        Ok(Self { basis, matrix })
    }

    pub fn zeros(basis: MultiIndexBasis) -> Self {
        let d = basis.len();
        Self { basis, matrix: CMatrix::zeros(d, d) }
    }

    pub fn identity(basis: MultiIndexBasis) -> Self {
        let d = basis.len();
        Self { basis, matrix: CMatrix::identity(d) }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn trace(&self) -> C<T> {
        self.matrix.trace()
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self { basis: self.basis.clone(), matrix: self.matrix.scale(s) }
    }

    pub fn entry(&self, i: usize, j: usize) -> C<T> {
        self.matrix[(i, j)]
    }
}

/// Matrix of `ω(M)` on `Λ^q`: column `J_in`, row `J_out`.
pub fn omega_endomorphism<T: Real>(m: &HermitianForm<T>, q: usize) -> Result<FormEndomorphism<T>> {
    let n = m.n();
    let b = basis(n, q)?;
    let d = b.len();
    let mut out = CMatrix::zeros(d, d);
    let mut target = Vec::with_capacity(q);
    for (col, jin) in b.indices().iter().enumerate() {
        for (pos, &l) in jin.iter().enumerate() {
            // (ω̄^l ∧)* removes l with sign (-1)^pos
            let rest: Vec<usize> = jin.iter().copied().filter(|&k| k != l).collect();
            let s1 = pos % 2 == 1;
            for j in 0..n {
                if rest.contains(&j) {
                    continue;
                }
                // ω̄^j ∧ moves j past the smaller indices of `rest`
                let before = rest.iter().filter(|&&k| k < j).count();
                target.clear();
                target.extend_from_slice(&rest[..before]);
                target.push(j);
                target.extend_from_slice(&rest[before..]);
                let row = b.position(&target).expect("wedge stays in the basis");
                let coeff = m.entry(j, l);
                if s1 ^ (before % 2 == 1) {
                    out[(row, col)] -= coeff;
                } else {
                    out[(row, col)] += coeff;
                }
            }
        }
    }
    Ok(FormEndomorphism { basis: b, matrix: out })
}

/// The q-th exterior power of `U`: entry `(I, J)` is the minor `det U[I, J]`.
pub fn exterior_power<T: Real>(u: &CMatrix<T>, b: &MultiIndexBasis) -> CMatrix<T> {
    let q = b.q();
    let d = b.len();
    if q == 0 {
        return CMatrix::identity(1);
    }
    CMatrix::from_fn(d, d, |r, c| {
        let (ri, ci) = (&b.indices()[r], &b.indices()[c]);
        if q == 1 {
            return u[(ri[0], ci[0])];
        }
        CMatrix::from_fn(q, q, |i, j| u[(ri[i], ci[j])]).determinant()
    })
}

/// Eigenvalue sums `Σ_{j∈J} μ_j` over the basis.
pub fn index_sums<T: Real>(values: &[T], b: &MultiIndexBasis) -> Vec<T> {
    b.indices().iter().map(|j| j.iter().map(|&i| values[i]).fold(T::zero(), |a, v| a + v)).collect()
}

/// `Λ^qU · diag(d) · (Λ^qU)^†` for an eigensystem of `M`.
pub fn spectral_endomorphism<T: Real>(
    eig: &EigenSystem<T>,
    b: &MultiIndexBasis,
    d: &[T],
) -> FormEndomorphism<T> {
    let w = exterior_power(&eig.unitary, b);
    let k = b.len();
    let matrix = CMatrix::from_fn(k, k, |i, j| {
        (0..k).fold(C::zero(), |acc, m| acc + w[(i, m)] * w[(j, m)].conj() * d[m])
    });
    FormEndomorphism { basis: b.clone(), matrix }
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let norm = a.frobenius_norm();
    let mut squarings = 0;
    let mut scale = T::one();
    while norm * scale > T::lit(0.25) {
        scale = scale / T::lit(2.0);
        squarings += 1;
    }
    let x = a.scale_real(scale);
    let n = a.nrows();
    let mut sum = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=30 {
        term = (&term * &x).scale_real(T::one() / T::count(k));
        sum = &sum + &term;
        if term.frobenius_norm() <= T::epsilon() * sum.frobenius_norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Both evaluations of `e^{-tω(M)}`: (a) `expm` of the induced matrix,
/// (b) the exterior power of the eigenbasis of `M`.
pub fn exp_endo_paths<T: Real>(
    m: &HermitianForm<T>,
    q: usize,
    t: T,
) -> Result<(FormEndomorphism<T>, FormEndomorphism<T>)> {
    let omega = omega_endomorphism(m, q)?;
    let a = FormEndomorphism { basis: omega.basis.clone(), matrix: expm(&omega.matrix.scale_real(-t)) };
    let eig = m.eig()?;
    let sums = index_sums(&eig.eigenvalues, &omega.basis);
    let d: Vec<T> = sums.iter().map(|&s| (-t * s).exp()).collect();
    let b = spectral_endomorphism(&eig, &omega.basis, &d);
    Ok((a, b))
}

/// `e^{-tω(M)}` on `Λ^q`, cross-checked between the two paths.
pub fn exp_endo<T: Real>(m: &HermitianForm<T>, q: usize, t: T) -> Result<FormEndomorphism<T>> {
    if !(t > T::zero()) {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    let (a, b) = exp_endo_paths(m, q, t)?;
    let dev = a.matrix.relative_diff(&b.matrix, T::min_positive_value());
    if !(dev <= T::tol(1e-8)) {
        return Err(Error::PathMismatch { deviation: dev.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(b)
}

/// Elementary symmetric polynomial `e_q(x_1..x_n)`.
pub fn elementary_symmetric<T: Real>(x: &[T], q: usize) -> T {
    let mut e = vec![T::zero(); q + 1];
    e[0] = T::one();
    for &v in x {
        for k in (1..=q).rev() {
            e[k] = e[k] + e[k - 1] * v;
        }
    }
    e[q]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cre;
    use num_complex::Complex;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random(rng: &mut StdRng, n: usize, scale: f64) -> HermitianForm<f64> {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cre(rng.gen_range(-scale..scale));
            for j in i + 1..n {
                let z = Complex::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        HermitianForm::from_matrix(m).unwrap()
    }

    #[test]
    fn basis_examples() {
        assert_eq!(basis(3, 2).unwrap().one_based(), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(basis(5, 0).unwrap().indices(), &[Vec::<usize>::new()]);
        let b = basis(4, 2).unwrap();
        assert_eq!(b.len(), 6);
        assert_eq!(b.one_based()[0], vec![1, 2]);
        assert_eq!(b.one_based()[5], vec![3, 4]);
        assert!(matches!(basis(2, 3), Err(Error::DegreeOutOfRange { n: 2, q: 3 })));
        assert_eq!(b.to_string(), "[(1,2),(1,3),(1,4),(2,3),(2,4),(3,4)]");
    }

    proptest! {
        #[test]
        fn basis_is_sorted_and_complete(n in 1usize..9, q_frac in 0.0f64..1.0) {
            let q = ((n as f64 + 1.0) * q_frac) as usize;
            let b = basis(n, q.min(n)).unwrap();
            prop_assert_eq!(b.len(), binomial(n, q.min(n)));
            for j in b.indices() {
                prop_assert!(j.windows(2).all(|w| w[0] < w[1]));
            }
            prop_assert!(b.indices().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn omega_diagonal_anchor() {
        let m = HermitianForm::from_real_diagonal(&[2.0, -3.0]);
        let w = omega_endomorphism(&m, 1).unwrap();
        assert_eq!(w.matrix, CMatrix::from_real_diagonal(&[2.0, -3.0]));
        let m = HermitianForm::from_real_diagonal(&[1.0, 2.0, 4.0]);
        let w = omega_endomorphism(&m, 2).unwrap();
        assert_eq!(w.matrix, CMatrix::from_real_diagonal(&[3.0, 5.0, 6.0]));
    }

    #[test]
    fn omega_extreme_degrees() {
        let mut rng = StdRng::seed_from_u64(1);
        let m = random(&mut rng, 4, 1.0);
        let w0 = omega_endomorphism(&m, 0).unwrap();
        assert_eq!(w0.matrix, CMatrix::zeros(1, 1));
        let wn = omega_endomorphism(&m, 4).unwrap();
        assert!((wn.matrix[(0, 0)] - m.matrix().trace()).norm() < 1e-14);
        let w1 = omega_endomorphism(&m, 1).unwrap();
        assert!(w1.matrix.max_abs_diff(m.matrix()) < 1e-15);
    }

    #[test]
    fn exp_endo_examples() {
        let e = exp_endo(&HermitianForm::<f64>::zeros(3), 2, 1.0).unwrap();
        assert!(e.matrix.max_abs_diff(&CMatrix::identity(3)) < 1e-15);
        let e = exp_endo(&HermitianForm::from_real_diagonal(&[1.0, -1.0]), 1, 1.0).unwrap();
        let want = CMatrix::from_real_diagonal(&[(-1.0f64).exp(), 1.0f64.exp()]);
        assert!(e.matrix.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn dual_paths_agree() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..100 {
            let n = rng.gen_range(1..7);
            let q = rng.gen_range(0..=n);
            let m = random(&mut rng, n, 1.5);
            let t = rng.gen_range(0.1..2.0);
            let (a, b) = exp_endo_paths(&m, q, t).unwrap();
            assert!(a.matrix.relative_diff(&b.matrix, 1e-300) < 1e-10);
        }
    }

    #[test]
    fn trace_and_euler_identities() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..6);
            let m = random(&mut rng, n, 1.0);
            let t = rng.gen_range(0.1..3.0);
            let mu = m.eig().unwrap().eigenvalues;
            let x: Vec<f64> = mu.iter().map(|&v| (-t * v).exp()).collect();
            let mut euler = 0.0;
            for q in 0..=n {
                let tr = exp_endo(&m, q, t).unwrap().trace();
                assert!(tr.im.abs() < 1e-12);
                let e = elementary_symmetric(&x, q);
                assert!((tr.re - e).abs() < 1e-10 * e.abs().max(1.0));
                euler += if q % 2 == 0 { tr.re } else { -tr.re };
            }
            let prod: f64 = x.iter().map(|v| 1.0 - v).product();
            assert!((euler - prod).abs() < 1e-10 * prod.abs().max(1e-3), "{euler} vs {prod}");
        }
    }

    #[test]
    fn unitary_equivariance() {
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..20 {
            let n = rng.gen_range(2..5);
            let q = rng.gen_range(0..=n);
            let m = random(&mut rng, n, 1.0);
            let u = random(&mut rng, n, 1.0).eig().unwrap().unitary;
            let rotated = omega_endomorphism(&m.conjugate_by(&u), q).unwrap();
            let w = omega_endomorphism(&m, q).unwrap();
            let lu = exterior_power(&u, &w.basis);
            let conj = &(&lu * &w.matrix) * &lu.adjoint();
            assert!(rotated.matrix.max_abs_diff(&conj) < 1e-12);
            let (mut p1, mut p2) = (CMatrix::identity(w.dim()), CMatrix::identity(w.dim()));
            for _ in 0..3 {
                p1 = &p1 * &rotated.matrix;
                p2 = &p2 * &w.matrix;
                assert!((p1.trace() - p2.trace()).norm() < 1e-10 * p2.trace().norm().max(1.0));
            }
        }
    }

    #[test]
    fn f32_exponential_paths() {
        let m = HermitianForm::<f32>::from_real_diagonal(&[0.5, -0.25, 1.0]);
        let e = exp_endo(&m, 2, 1.0).unwrap();
        assert!((e.trace().re - elementary_symmetric(&[(-0.5f32).exp(), 0.25f32.exp(), (-1.0f32).exp()], 2)).abs() < 1e-5);
    }

    #[test]
    fn exp_endo_rejects_bad_degree() {
        let m = HermitianForm::<f64>::identity(2);
        assert!(matches!(exp_endo(&m, 3, 1.0), Err(Error::DegreeOutOfRange { .. })));
    }
}
