//! Point and descriptor files: strict JSON, complex numbers as `[re, im]`.

use std::path::Path;

use anyhow::{Context, Result};
use crheat::{CurvaturePoint64, HermitianForm64, ManifoldDescriptor64, C64};
use serde::{Deserialize, Serialize};

use crate::Failure;

pub const SCHEMA_VERSION: &str = "1";

/// A Hermitian matrix as rows of `[re, im]` pairs, checked on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<[f64; 2]>>", into = "Vec<Vec<[f64; 2]>>")]
pub struct MatrixSpec(Vec<Vec<[f64; 2]>>);

impl TryFrom<Vec<Vec<[f64; 2]>>> for MatrixSpec {
    type Error = String;

    fn try_from(rows: Vec<Vec<[f64; 2]>>) -> std::result::Result<Self, String> {
        let n = rows.len();
        if n == 0 {
            return Err("matrix has no rows".into());
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(format!("matrix is not square: row {i} has {} entries, expected {n}", r.len()));
        }
        if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err("matrix entries must be finite".into());
        }
        let spec = MatrixSpec(rows);
        spec.form().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

impl From<MatrixSpec> for Vec<Vec<[f64; 2]>> {
    fn from(m: MatrixSpec) -> Self {
        m.0
    }
}

impl MatrixSpec {
    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn form(&self) -> crheat::Result<HermitianForm64> {
        let entries = self.0.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
        HermitianForm64::new(self.n(), entries)
    }

    pub fn from_form(h: &HermitianForm64) -> Self {
        let n = h.n();
        MatrixSpec((0..n).map(|i| (0..n).map(|j| [h.entry(i, j).re, h.entry(i, j).im]).collect()).collect())
    }
}

fn one() -> f64 {
    1.0
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema_version: Option<String>,
    n: usize,
    levi: MatrixSpec,
    curvature: MatrixSpec,
    #[serde(default, skip_serializing_if = "is_zero")]
    beta: f64,
    #[serde(default = "one")]
    weight: f64,
}

/// One curvature point: the body shared by point files and descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint", into = "RawPoint")]
pub struct PointSpec {
    pub n: usize,
    pub levi: MatrixSpec,
    pub curvature: MatrixSpec,
    pub beta: f64,
    pub weight: f64,
}

fn check_version(v: &str) -> std::result::Result<(), String> {
    if v != SCHEMA_VERSION {
        return Err(format!("unsupported schema_version \"{v}\" (expected \"{SCHEMA_VERSION}\")"));
    }
    Ok(())
}

impl TryFrom<RawPoint> for PointSpec {
    type Error = String;

    fn try_from(raw: RawPoint) -> std::result::Result<Self, String> {
        if let Some(v) = &raw.schema_version {
            check_version(v)?;
        }
        if raw.n == 0 {
            return Err("n must be positive".into());
        }
        for (name, m) in [("levi", &raw.levi), ("curvature", &raw.curvature)] {
            if m.n() != raw.n {
                return Err(format!("{name} is {0}x{0} but n = {1}", m.n(), raw.n));
            }
        }
        if !raw.beta.is_finite() {
            return Err("beta must be finite".into());
        }
        if !(raw.weight > 0.0 && raw.weight.is_finite()) {
            return Err(format!("weight must be positive, got {}", raw.weight));
        }
        Ok(PointSpec { n: raw.n, levi: raw.levi, curvature: raw.curvature, beta: raw.beta, weight: raw.weight })
    }
}

impl From<PointSpec> for RawPoint {
    fn from(p: PointSpec) -> Self {
        RawPoint {
            schema_version: None,
            n: p.n,
            levi: p.levi,
            curvature: p.curvature,
            beta: p.beta,
            weight: p.weight,
        }
    }
}

impl PointSpec {
    pub fn to_point(&self) -> crheat::Result<CurvaturePoint64> {
        CurvaturePoint64::new(self.levi.form()?, self.curvature.form()?)?.with_beta(self.beta).with_weight(self.weight)
    }
}

/// A standalone point file; `schema_version` is mandatory here.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct PointFile(pub PointSpec);

impl TryFrom<RawPoint> for PointFile {
    type Error = String;

    fn try_from(raw: RawPoint) -> std::result::Result<Self, String> {
        if raw.schema_version.is_none() {
            return Err("missing field `schema_version`".into());
        }
        PointSpec::try_from(raw).map(PointFile)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDescriptor {
    schema_version: String,
    name: String,
    points: Vec<PointSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDescriptor", into = "RawDescriptor")]
pub struct DescriptorFile {
    pub name: String,
    pub points: Vec<PointSpec>,
}

impl TryFrom<RawDescriptor> for DescriptorFile {
    type Error = String;

    fn try_from(raw: RawDescriptor) -> std::result::Result<Self, String> {
        check_version(&raw.schema_version)?;
        let first = raw.points.first().ok_or("descriptor has no points")?.n;
        if let Some((i, p)) = raw.points.iter().enumerate().find(|(_, p)| p.n != first) {
            return Err(format!("point {i} has n = {} but point 0 has n = {first}", p.n));
        }
        Ok(DescriptorFile { name: raw.name, points: raw.points })
    }
}

impl From<DescriptorFile> for RawDescriptor {
    fn from(d: DescriptorFile) -> Self {
        RawDescriptor { schema_version: SCHEMA_VERSION.into(), name: d.name, points: d.points }
    }
}

impl DescriptorFile {
    pub fn to_descriptor(&self) -> crheat::Result<ManifoldDescriptor64> {
        let points = self.points.iter().map(PointSpec::to_point).collect::<crheat::Result<Vec<_>>>()?;
        ManifoldDescriptor64::new(self.name.clone(), points)
    }

    /// Pretty JSON with fixed key order and shortest round-trip floats.
    pub fn canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("descriptor serializes");
        s.push('\n');
        s
    }
}

/// Parses `text` as `T`, reporting failures as `path:line:column: message`.
pub fn parse<T: serde::de::DeserializeOwned>(text: &str, path: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m).to_string();
        Failure::usage(format!("{path}:{}:{}: {msg}", e.line(), e.column())).into()
    })
}

pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(|e| Failure::usage(format!("{e:#}")))?;
    parse(&text, &path.display().to_string())
}
