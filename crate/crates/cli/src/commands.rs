//! Argument parsing and the command bodies. Each command renders its whole
//! output to a string so the binary and the tests share one path.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use crheat::{
    density_diagonal_with, density_integrand, heat_trace_degree_with, heisenberg_heat_kernel_with, morse_global,
    Error, HeisenbergPoint64, QuadOptions,
};

use crate::emit::{EndoTable, Format, MorseRow, MorseTable};
use crate::files::{load, DescriptorFile, PointFile};
use crate::validate::{run_suite, Suite, SummaryFormat};
use crate::{Failure, EXIT_FAILED, EXIT_INFEASIBLE, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "crheat", version, about = "Model heat kernels, densities and Morse bounds for the Kohn Laplacian")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diagonal density endomorphism and its trace at one point.
    Density(DensityArgs),
    /// Heisenberg-group heat kernel between two points.
    Kernel(KernelArgs),
    /// Weak and strong Morse bounds for a descriptor.
    Morse(MorseArgs),
    /// Run the built-in property and oracle suites.
    Validate(ValidateArgs),
    /// Rewrite a descriptor in canonical form.
    Canon(CanonArgs),
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    #[arg(long, default_value_t = 1e-9)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_subdivisions: usize,
}

impl QuadArgs {
    fn options(&self) -> Result<QuadOptions<f64>> {
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) || self.abs_tol + self.rel_tol == 0.0 {
            return Err(Failure::usage("tolerances must be nonnegative and not both zero").into());
        }
        if self.max_subdivisions == 0 {
            return Err(Failure::usage("--max-subdivisions must be positive").into());
        }
        Ok(QuadOptions { abs_tol: self.abs_tol, rel_tol: self.rel_tol, max_subdivisions: self.max_subdivisions })
    }
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Point file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub q: usize,
    #[arg(long)]
    pub t: f64,
    /// Integrate over [-D, D] instead of the whole line.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Also sample the integrand trace at A, A+STEP, ..., B.
    #[arg(long, value_name = "A:B:STEP", allow_hyphen_values = true)]
    pub eta_grid: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Point file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub q: usize,
    #[arg(long)]
    pub t: f64,
    /// First point as x_1,...,x_2n,theta.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    /// Second point as y_1,...,y_2n,theta.
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Args)]
pub struct MorseArgs {
    /// Descriptor file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub q: usize,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Comma-separated times for heat-trace rows.
    #[arg(long, value_delimiter = ',')]
    pub heat_t: Vec<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, value_enum, default_value = "text")]
    pub format: SummaryFormat,
}

#[derive(Debug, Args)]
pub struct CanonArgs {
    /// Descriptor file.
    #[arg(long)]
    pub input: PathBuf,
    /// Write here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// What a command produced: stdout text, an optional note for stderr and
/// the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: Option<String>,
    pub code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, stderr: None, code: EXIT_OK }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Density(a) => density(a),
        Command::Kernel(a) => kernel(a),
        Command::Morse(a) => morse(a),
        Command::Validate(a) => {
            let summary = run_suite(a.suite);
            let code = if summary.passed() { EXIT_OK } else { EXIT_FAILED };
            Ok(Outcome { stdout: summary.render(a.format), stderr: None, code })
        }
        Command::Canon(a) => {
            let d: DescriptorFile = load(&a.input)?;
            let text = d.canonical();
            match &a.output {
                Some(path) => {
                    std::fs::write(path, text).map_err(|e| Failure::failed(format!("cannot write {}: {e}", path.display())))?;
                    Ok(Outcome::ok(String::new()))
                }
                None => Ok(Outcome::ok(text)),
            }
        }
    }
}

fn lib<T>(r: crheat::Result<T>) -> Result<T> {
    r.map_err(|e| Failure::from(e).into())
}

/// Parses `A:B:STEP` into the sample points `A + k·STEP ≤ B`.
pub fn parse_eta_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Failure::usage(format!("--eta-grid expects A:B:STEP with A <= B and STEP > 0, got {spec:?}"));
    let parts: Vec<f64> = spec.split(':').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [a, b, step] = parts[..] else { return Err(bad().into()) };
    if !(a.is_finite() && b.is_finite() && step > 0.0 && step.is_finite() && a <= b) {
        return Err(bad().into());
    }
    let count = ((b - a) / step * (1.0 + 1e-12)).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(Failure::usage(format!("--eta-grid would produce {count} samples (limit 1000000)")).into());
    }
    Ok((0..count).map(|k| a + k as f64 * step).collect())
}

/// Parses a comma-separated coordinate list of length `2n + 1`.
pub fn parse_coords(flag: &str, raw: &str, n: usize) -> Result<HeisenbergPoint64> {
    let values: Vec<f64> = raw
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::usage(format!("--{flag}: {e} in {raw:?}")))?;
    if values.len() != 2 * n + 1 {
        return Err(Failure::usage(format!(
            "--{flag}: expected 2n+1 = {} coordinates for n = {n}, got {}",
            2 * n + 1,
            values.len()
        ))
        .into());
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::usage(format!("--{flag}: coordinates must be finite")).into());
    }
    lib(HeisenbergPoint64::from_reals(&values))
}

fn check_q(q: usize, n: usize) -> Result<()> {
    if q > n {
        return Err(Failure::usage(format!("q out of range: q = {q} but n = {n}")).into());
    }
    Ok(())
}

pub fn density(a: &DensityArgs) -> Result<Outcome> {
    let opts = a.quad.options()?;
    let spec = load::<PointFile>(&a.input)?.0;
    check_q(a.q, spec.n)?;
    let grid = a.eta_grid.as_deref().map(parse_eta_grid).transpose()?;
    let p = lib(spec.to_point())?;
    let endo = lib(density_diagonal_with(&p, a.q, a.t, a.delta, &opts))?;
    let mut table = EndoTable::new(spec.n, a.q, a.t, a.delta, &endo);
    for eta in grid.unwrap_or_default() {
        table.push_sample(eta, lib(density_integrand(&p, a.q, a.t, eta))?.trace());
    }
    Ok(Outcome::ok(table.render(a.format)))
}

pub fn kernel(a: &KernelArgs) -> Result<Outcome> {
    let opts = a.quad.options()?;
    let spec = load::<PointFile>(&a.input)?.0;
    check_q(a.q, spec.n)?;
    let x = parse_coords("x", &a.x, spec.n)?;
    let y = parse_coords("y", &a.y, spec.n)?;
    let p = lib(spec.to_point())?;
    let k = lib(heisenberg_heat_kernel_with(&p, a.q, a.t, &x, &y, a.delta, &opts))?;
    Ok(Outcome::ok(EndoTable::new(spec.n, a.q, a.t, a.delta, &k.endo).render(a.format)))
}

pub fn morse(a: &MorseArgs) -> Result<Outcome> {
    let opts = a.quad.options()?;
    let file: DescriptorFile = load(&a.input)?;
    let n = file.points[0].n;
    check_q(a.q, n)?;
    if let Some(t) = a.heat_t.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Failure::usage(format!("--heat-t values must be positive, got {t}")).into());
    }
    let d = lib(file.to_descriptor())?;
    let report = lib(morse_global(&d, a.q, a.delta))?;

    let mut rows: Vec<MorseRow> = report.per_j_weak.iter().enumerate().map(|(j, v)| MorseRow::weak(j, *v)).collect();
    for (m, s) in report.strong_partial_sums.iter().enumerate() {
        let status = match s {
            None => "divergent",
            Some(_) if report.strong_hypothesis[m] => "holds",
            Some(_) => "unverified",
        };
        rows.push(MorseRow { kind: "strong", j: m, t: None, value: *s, status });
    }
    for &t in &a.heat_t {
        for j in 0..=a.q {
            let row = match heat_trace_degree_with(&d, j, t, a.delta, &opts) {
                Ok(v) => MorseRow { kind: "heat", j, t: Some(t), value: Some(v), status: "finite" },
                Err(Error::DivergentIntegral { .. }) => {
                    MorseRow { kind: "heat", j, t: Some(t), value: None, status: "divergent" }
                }
                Err(e) => return Err(Failure::from(e).into()),
            };
            rows.push(row);
        }
    }
    let table = MorseTable { name: file.name.clone(), n, q: a.q, delta: a.delta, rows };
    let mut out = Outcome::ok(table.render(a.format));
    if a.delta.is_none() && report.all_infeasible() {
        out.code = EXIT_INFEASIBLE;
        out.stderr = Some(format!(
            "every degree j = 0..={} diverges on the full eta-line; rerun with --delta D to truncate",
            a.q
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_grid_parsing() {
        assert_eq!(parse_eta_grid("-1:1:0.5").unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(parse_eta_grid("0:0.3:0.1").unwrap().len(), 4);
        for bad in ["1:0:0.1", "0:1:0", "0:1", "a:1:0.1", "0:1:-1"] {
            assert!(parse_eta_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn coordinate_count() {
        assert!(parse_coords("x", "0,0,0", 1).is_ok());
        let e = parse_coords("x", "0,0", 1).unwrap_err();
        assert!(e.to_string().contains("2n+1 = 3"), "{e}");
        assert!(parse_coords("x", "0,nope,0", 1).is_err());
    }
}
