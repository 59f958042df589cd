#![allow(dead_code)]

use crheat::{CurvaturePoint64, HermitianForm64, C64};
use rand::rngs::StdRng;
use rand::Rng;

pub fn hermitian(rng: &mut StdRng, n: usize, scale: f64) -> HermitianForm64 {
    let mut entries = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        entries[i * n + i] = C64::new(rng.gen_range(-scale..scale), 0.0);
        for j in i + 1..n {
            let c = C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)) * 0.5;
            entries[i * n + j] = c;
            entries[j * n + i] = c.conj();
        }
    }
    HermitianForm64::new(n, entries).unwrap()
}

pub fn diagonal(rng: &mut StdRng, n: usize, lo: f64, hi: f64) -> HermitianForm64 {
    let d: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    HermitianForm64::from_real_diagonal(&d)
}

pub fn point(r: &[f64], l: &[f64]) -> CurvaturePoint64 {
    CurvaturePoint64::new(HermitianForm64::from_real_diagonal(l), HermitianForm64::from_real_diagonal(r)).unwrap()
}

/// A random positive-definite Levi form conjugated by a random unitary.
pub fn definite_levi(rng: &mut StdRng, n: usize) -> HermitianForm64 {
    let h = hermitian(rng, n, 1.0);
    let eig = h.eig().unwrap();
    let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    HermitianForm64::from_real_diagonal(&d).conjugate_by(&eig.unitary)
}
