//! CSV and JSON writers. Floats use Rust's shortest round-trip formatting so
//! reruns are byte-identical.

use std::fmt::Write as _;

use clap::ValueEnum;
use crheat::{FormEndomorphism64, MorseValue64, C64};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn real(x: f64) -> String {
    format!("{x:?}")
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// The endomorphism, its trace and optional `(η, Tr integrand)` samples.
#[derive(Debug, Clone, Serialize)]
pub struct EndoTable {
    pub n: usize,
    pub q: usize,
    pub t: f64,
    pub delta: Option<f64>,
    /// 1-based multi-indices labelling rows and columns.
    pub basis: Vec<Vec<usize>>,
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub trace: [f64; 2],
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub integrand_trace: Vec<Sample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub eta: f64,
    pub trace: [f64; 2],
}

impl EndoTable {
    pub fn new(n: usize, q: usize, t: f64, delta: Option<f64>, e: &FormEndomorphism64) -> Self {
        let dim = e.dim();
        Self {
            n,
            q,
            t,
            delta,
            basis: e.basis.one_based(),
            matrix: (0..dim).map(|i| (0..dim).map(|j| pair(e.entry(i, j))).collect()).collect(),
            trace: pair(e.trace()),
            integrand_trace: Vec::new(),
        }
    }

    pub fn push_sample(&mut self, eta: f64, trace: C64) {
        self.integrand_trace.push(Sample { eta, trace: pair(trace) });
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => json(self),
            Format::Csv => {
                let mut out = String::from("kind,i,j,eta,re,im\n");
                for (i, row) in self.matrix.iter().enumerate() {
                    for (j, [re, im]) in row.iter().enumerate() {
                        writeln!(out, "entry,{i},{j},,{},{}", real(*re), real(*im)).unwrap();
                    }
                }
                writeln!(out, "trace,,,,{},{}", real(self.trace[0]), real(self.trace[1])).unwrap();
                for s in &self.integrand_trace {
                    writeln!(out, "integrand_trace,,,{},{},{}", real(s.eta), real(s.trace[0]), real(s.trace[1]))
                        .unwrap();
                }
                out
            }
        }
    }
}

/// One Morse table row.
#[derive(Debug, Clone, Serialize)]
pub struct MorseRow {
    pub kind: &'static str,
    pub j: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub value: Option<f64>,
    pub status: &'static str,
}

impl MorseRow {
    pub fn weak(j: usize, v: MorseValue64) -> Self {
        match v {
            MorseValue64::Finite(x) => Self { kind: "weak", j, t: None, value: Some(x), status: "finite" },
            MorseValue64::Divergent => Self { kind: "weak", j, t: None, value: None, status: "divergent" },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MorseTable {
    pub name: String,
    pub n: usize,
    pub q: usize,
    pub delta: Option<f64>,
    pub rows: Vec<MorseRow>,
}

impl MorseTable {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => json(self),
            Format::Csv => {
                let mut out = String::from("kind,j,t,value,status\n");
                for r in &self.rows {
                    let t = r.t.map(real).unwrap_or_default();
                    let v = r.value.map(real).unwrap_or_default();
                    writeln!(out, "{},{},{t},{v},{}", r.kind, r.j, r.status).unwrap();
                }
                out
            }
        }
    }
}

pub fn json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}
