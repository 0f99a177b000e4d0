//! File formats: coefficient JSON, Wigner tables, grid dumps, verification
//! and correlation reports, spin-measure estimates, and the generator-spec
//! JSON consumed by the CLI.
//!
//! Numbers are rendered with shortest-round-trip decimals (both in CSV and
//! JSON), so a write/read cycle reproduces every double bit-for-bit and equal
//! inputs produce byte-identical artifacts. This module works with concrete
//! `f64` data: files pin a wire precision even though the math layer is
//! generic.

use crate::error::{Error, Result};
use crate::fields::{CovarianceSpec, InvarianceFamily, SpinMeasure};
use crate::grid::QuadratureGrid;
use crate::half::{check_degree, dim, labels, offset};
use crate::linalg::CMatrix;
use crate::mc::{
    bi_rotated_pair_moment_closed_form, left_rotated_pair_moment_closed_form,
    right_rotated_pair_moment_closed_form, CorrelationReport, CorrelationTarget,
    EstimatedSpinMeasures, MeasureMode,
};
use crate::transform::SpectralCoefficients;
use crate::wigner::WignerMatrix;
use num_complex::Complex;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

// ---------------------------------------------------------------------------
// Coefficient files
// ---------------------------------------------------------------------------

/// JSON form of a coefficient set: `band_limit_doubled` plus one block per
/// degree, rows indexed by `m` ascending, each row a list of `[re, im]`
/// pairs indexed by `s` ascending.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsFile {
    pub band_limit_doubled: i32,
    pub blocks: Vec<CoefficientBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientBlock {
    pub two_ell: i32,
    pub rows: Vec<Vec<[f64; 2]>>,
}

pub fn coefficients_to_file(c: &SpectralCoefficients<f64>) -> CoefficientsFile {
    CoefficientsFile {
        band_limit_doubled: c.two_big_l,
        blocks: (0..=c.two_big_l)
            .map(|d| {
                let block = &c.blocks[d as usize];
                CoefficientBlock {
                    two_ell: d,
                    rows: (0..block.rows())
                        .map(|r| {
                            (0..block.cols())
                                .map(|col| {
                                    let z = block[(r, col)];
                                    [z.re, z.im]
                                })
                                .collect()
                        })
                        .collect(),
                }
            })
            .collect(),
    }
}

pub fn coefficients_from_file(f: &CoefficientsFile) -> Result<SpectralCoefficients<f64>> {
    check_degree(f.band_limit_doubled)?;
    if f.blocks.len() != (f.band_limit_doubled + 1) as usize {
        return Err(Error::InvalidSpec(format!(
            "coefficient file needs {} blocks, got {}",
            f.band_limit_doubled + 1,
            f.blocks.len()
        )));
    }
    let mut out = SpectralCoefficients::zeros(f.band_limit_doubled)?;
    for (d, block) in f.blocks.iter().enumerate() {
        if block.two_ell != d as i32 {
            return Err(Error::InvalidSpec(format!(
                "block {d} labeled two_ell={}, expected {d}",
                block.two_ell
            )));
        }
        let n = dim(d as i32);
        if block.rows.len() != n {
            return Err(Error::InvalidSpec(format!(
                "block {d} needs {n} rows, got {}",
                block.rows.len()
            )));
        }
        for (r, row) in block.rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSpec(format!(
                    "block {d} row {r} needs {n} entries, got {}",
                    row.len()
                )));
            }
            for (col, pair) in row.iter().enumerate() {
                out.blocks[d][(r, col)] = Complex::new(pair[0], pair[1]);
            }
        }
    }
    Ok(out)
}

pub fn coefficients_to_json(c: &SpectralCoefficients<f64>) -> String {
    // Struct serialization cannot fail: fields are finite numbers.
    serde_json::to_string_pretty(&coefficients_to_file(c)).expect("serialize coefficients")
}

pub fn coefficients_from_json(s: &str) -> Result<SpectralCoefficients<f64>> {
    let file: CoefficientsFile =
        serde_json::from_str(s).map_err(|e| Error::InvalidSpec(format!("coefficient JSON: {e}")))?;
    coefficients_from_file(&file)
}

/// CSV rows of a coefficient set — `two_ell,two_m,two_s,re,im` with degrees
/// ascending, `m` outer, `s` inner (the Wigner-table layout).
pub fn write_coefficients_csv<W: Write>(w: &mut W, c: &SpectralCoefficients<f64>) -> Result<()> {
    writeln!(w, "two_ell,two_m,two_s,re,im")?;
    for (l, m, s) in c.indices() {
        let v = c.get(l, m, s);
        writeln!(w, "{l},{m},{s},{},{}", v.re, v.im)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Wigner tables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WignerRow {
    pub two_ell: i32,
    pub two_m: i32,
    pub two_s: i32,
    pub re: f64,
    pub im: f64,
}

pub fn wigner_rows(m: &WignerMatrix<f64>) -> Vec<WignerRow> {
    let mut rows = Vec::new();
    for two_m in crate::half::labels(m.two_ell) {
        for two_s in crate::half::labels(m.two_ell) {
            let z = m.get(two_m, two_s);
            rows.push(WignerRow {
                two_ell: m.two_ell,
                two_m,
                two_s,
                re: z.re,
                im: z.im,
            });
        }
    }
    rows
}

pub fn write_wigner_csv<W: Write>(w: &mut W, m: &WignerMatrix<f64>) -> Result<()> {
    writeln!(w, "two_ell,two_m,two_s,re,im")?;
    for row in wigner_rows(m) {
        writeln!(
            w,
            "{},{},{},{},{}",
            row.two_ell, row.two_m, row.two_s, row.re, row.im
        )?;
    }
    Ok(())
}

pub fn write_wigner_json<W: Write>(w: &mut W, m: &WignerMatrix<f64>) -> Result<()> {
    let text = serde_json::to_string_pretty(&wigner_rows(m)).expect("serialize wigner rows");
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Grid dumps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRow {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub weight: f64,
}

pub fn grid_rows(grid: &QuadratureGrid<f64>) -> Vec<GridRow> {
    grid.nodes
        .iter()
        .map(|n| GridRow {
            phi: n.euler.phi,
            theta: n.euler.theta,
            psi: n.euler.psi,
            weight: n.weight,
        })
        .collect()
}

pub fn write_grid_csv<W: Write>(w: &mut W, grid: &QuadratureGrid<f64>) -> Result<()> {
    writeln!(w, "phi,theta,psi,weight")?;
    for row in grid_rows(grid) {
        writeln!(w, "{},{},{},{}", row.phi, row.theta, row.psi, row.weight)?;
    }
    Ok(())
}

pub fn write_grid_json<W: Write>(w: &mut W, grid: &QuadratureGrid<f64>) -> Result<()> {
    let text = serde_json::to_string_pretty(&grid_rows(grid)).expect("serialize grid rows");
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Verification reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyRow {
    pub name: String,
    pub metric: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn write_verify_csv<W: Write>(w: &mut W, rows: &[VerifyRow]) -> Result<()> {
    writeln!(w, "name,metric,threshold,pass")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{}",
            row.name, row.metric, row.threshold, row.pass
        )?;
    }
    Ok(())
}

pub fn write_verify_json<W: Write>(w: &mut W, rows: &[VerifyRow]) -> Result<()> {
    let text = serde_json::to_string_pretty(rows).expect("serialize verify rows");
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Correlation reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationRowFile {
    pub a: [i32; 3],
    pub b: [i32; 3],
    pub est_corr: [f64; 2],
    pub pred_corr: [f64; 2],
    pub stderr_corr: f64,
    pub pass_corr: bool,
    pub est_pseudo: [f64; 2],
    pub pred_pseudo: [f64; 2],
    pub stderr_pseudo: f64,
    pub pass_pseudo: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationFile {
    pub samples: usize,
    pub all_pass: bool,
    pub rows: Vec<CorrelationRowFile>,
}

pub fn correlation_report_to_file(report: &CorrelationReport<f64>) -> CorrelationFile {
    CorrelationFile {
        samples: report.samples,
        all_pass: report.all_pass(),
        rows: report
            .rows
            .iter()
            .map(|r| CorrelationRowFile {
                a: [r.target.a.0, r.target.a.1, r.target.a.2],
                b: [r.target.b.0, r.target.b.1, r.target.b.2],
                est_corr: [r.est_corr.re, r.est_corr.im],
                pred_corr: [r.target.predicted_corr.re, r.target.predicted_corr.im],
                stderr_corr: r.stderr_corr,
                pass_corr: r.pass_corr,
                est_pseudo: [r.est_pseudo.re, r.est_pseudo.im],
                pred_pseudo: [r.target.predicted_pseudo.re, r.target.predicted_pseudo.im],
                stderr_pseudo: r.stderr_pseudo,
                pass_pseudo: r.pass_pseudo,
            })
            .collect(),
    }
}

pub fn write_correlation_csv<W: Write>(w: &mut W, report: &CorrelationReport<f64>) -> Result<()> {
    writeln!(
        w,
        "a_two_ell,a_two_m,a_two_s,b_two_ell,b_two_m,b_two_s,moment,est_re,est_im,pred_re,pred_im,stderr,pass"
    )?;
    for r in &report.rows {
        let (a, b) = (r.target.a, r.target.b);
        writeln!(
            w,
            "{},{},{},{},{},{},corr,{},{},{},{},{},{}",
            a.0,
            a.1,
            a.2,
            b.0,
            b.1,
            b.2,
            r.est_corr.re,
            r.est_corr.im,
            r.target.predicted_corr.re,
            r.target.predicted_corr.im,
            r.stderr_corr,
            r.pass_corr
        )?;
        writeln!(
            w,
            "{},{},{},{},{},{},pseudo,{},{},{},{},{},{}",
            a.0,
            a.1,
            a.2,
            b.0,
            b.1,
            b.2,
            r.est_pseudo.re,
            r.est_pseudo.im,
            r.target.predicted_pseudo.re,
            r.target.predicted_pseudo.im,
            r.stderr_pseudo,
            r.pass_pseudo
        )?;
    }
    Ok(())
}

pub fn write_correlation_json<W: Write>(w: &mut W, report: &CorrelationReport<f64>) -> Result<()> {
    let text = serde_json::to_string_pretty(&correlation_report_to_file(report))
        .expect("serialize correlation report");
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Spin-measure estimates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassRow {
    pub family: String,
    pub two_ell: Option<i32>,
    pub two_m: Option<i32>,
    pub two_s: Option<i32>,
    pub mass: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinMeasureFile {
    pub mode: String,
    pub samples: usize,
    pub effective_samples: usize,
    pub rows: Vec<MassRow>,
}

pub fn spin_measures_to_file(est: &EstimatedSpinMeasures<f64>) -> SpinMeasureFile {
    let mut rows = Vec::new();
    for (&(l, m, s), e) in &est.total {
        rows.push(MassRow {
            family: "total".into(),
            two_ell: Some(l),
            two_m: Some(m),
            two_s: Some(s),
            mass: e.mass,
            stderr: e.stderr,
        });
    }
    for (&m, e) in &est.left {
        rows.push(MassRow {
            family: "left".into(),
            two_ell: None,
            two_m: Some(m),
            two_s: None,
            mass: e.mass,
            stderr: e.stderr,
        });
    }
    for (&s, e) in &est.right {
        rows.push(MassRow {
            family: "right".into(),
            two_ell: None,
            two_m: None,
            two_s: Some(s),
            mass: e.mass,
            stderr: e.stderr,
        });
    }
    for (&(m, s), e) in &est.bi {
        rows.push(MassRow {
            family: "bi".into(),
            two_ell: None,
            two_m: Some(m),
            two_s: Some(s),
            mass: e.mass,
            stderr: e.stderr,
        });
    }
    SpinMeasureFile {
        mode: match est.mode {
            MeasureMode::Weak => "weak".into(),
            MeasureMode::Strong => "strong".into(),
        },
        samples: est.samples,
        effective_samples: est.effective_samples,
        rows,
    }
}

fn opt_i32(v: Option<i32>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_spin_measures_csv<W: Write>(
    w: &mut W,
    est: &EstimatedSpinMeasures<f64>,
) -> Result<()> {
    writeln!(w, "family,two_ell,two_m,two_s,mass,stderr")?;
    for row in spin_measures_to_file(est).rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            row.family,
            opt_i32(row.two_ell),
            opt_i32(row.two_m),
            opt_i32(row.two_s),
            row.mass,
            row.stderr
        )?;
    }
    Ok(())
}

pub fn write_spin_measures_json<W: Write>(
    w: &mut W,
    est: &EstimatedSpinMeasures<f64>,
) -> Result<()> {
    let text = serde_json::to_string_pretty(&spin_measures_to_file(est))
        .expect("serialize spin measures");
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Generator specs
// ---------------------------------------------------------------------------

/// On-disk generator description. `variant` selects the family; the other
/// fields are required or forbidden per variant:
///
/// - `bi_invariant`: `band_limit_doubled` + `spectrum` (one `sigma^2` per
///   degree);
/// - `left_invariant`: `band_limit_doubled` + `k_matrices` (one square
///   complex matrix per degree, entries as `[re, im]`);
/// - `rotated_left` / `rotated_right` / `rotated_bi`: `template` (a
///   coefficient file, nonzero);
/// - `realize_spin_measure`: `mu` (`{two_ell, masses}`).
///
/// `seed` and `samples` are optional defaults that command-line flags may
/// override.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpecFile {
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_limit_doubled: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_matrices: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<CoefficientsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<SpinMeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinMeasureSpec {
    pub two_ell: i32,
    pub masses: Vec<f64>,
}

/// Boxed sampling closure produced by [`GeneratorConfig::generator`].
pub type BoxedGenerator<'a> =
    Box<dyn Fn(&mut ChaCha8Rng) -> Result<SpectralCoefficients<f64>> + Sync + 'a>;

/// A parsed, validated generator.
#[derive(Debug, Clone)]
pub enum GeneratorConfig {
    BiInvariant(CovarianceSpec<f64>),
    LeftInvariant(CovarianceSpec<f64>),
    Rotated {
        template: SpectralCoefficients<f64>,
        family: InvarianceFamily,
    },
    RealizeSpinMeasure(SpinMeasure<f64>),
}

impl GeneratorConfig {
    pub fn band_limit(&self) -> i32 {
        match self {
            GeneratorConfig::BiInvariant(spec) | GeneratorConfig::LeftInvariant(spec) => {
                spec.band_limit()
            }
            GeneratorConfig::Rotated { template, .. } => template.two_big_l,
            GeneratorConfig::RealizeSpinMeasure(mu) => mu.two_ell,
        }
    }

    /// Closed-form `(E{a_A conj(a_B)}, E{a_A a_B})` under this generator.
    pub fn pair_moment(
        &self,
        a: (i32, i32, i32),
        b: (i32, i32, i32),
    ) -> (Complex<f64>, Complex<f64>) {
        let zero = Complex::new(0.0, 0.0);
        match self {
            GeneratorConfig::BiInvariant(spec) | GeneratorConfig::LeftInvariant(spec) => {
                match spec {
                    // Independent circular coefficients, variance sigma^2(l).
                    CovarianceSpec::BiInvariant { sigma_sq, .. } => {
                        let corr = if a == b {
                            Complex::new(sigma_sq[a.0 as usize], 0.0)
                        } else {
                            zero
                        };
                        (corr, zero)
                    }
                    // Rows i.i.d. with cross-column covariance K(s, s').
                    CovarianceSpec::LeftInvariant { k_matrices, .. } => {
                        let corr = if a.0 == b.0 && a.1 == b.1 {
                            let k = &k_matrices[a.0 as usize];
                            k[(offset(a.0, a.2), offset(b.0, b.2))]
                        } else {
                            zero
                        };
                        (corr, zero)
                    }
                }
            }
            GeneratorConfig::Rotated { template, family } => match family {
                InvarianceFamily::Left => left_rotated_pair_moment_closed_form(template, a, b),
                InvarianceFamily::Right => right_rotated_pair_moment_closed_form(template, a, b),
                InvarianceFamily::Bi => bi_rotated_pair_moment_closed_form(template, a, b),
            },
            // a_{m,s} = mu({s})^{1/2} D_{s,m}(gamma_s), one independent Haar
            // element per column: correlations are delta / (2l+1); a pseudo
            // moment needs the same column and s = -s, hence s = 0.
            GeneratorConfig::RealizeSpinMeasure(mu) => {
                if a.0 != mu.two_ell || b.0 != mu.two_ell {
                    return (zero, zero);
                }
                let inv_dim = 1.0 / f64::from(mu.two_ell + 1);
                let mass = mu.masses[offset(mu.two_ell, a.2)];
                let corr = if a == b {
                    Complex::new(mass * inv_dim, 0.0)
                } else {
                    zero
                };
                let pseudo = if a.2 == 0 && b.2 == 0 && a.1 == -b.1 {
                    let sign = if (a.1 / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    Complex::new(sign * mass * inv_dim, 0.0)
                } else {
                    zero
                };
                (corr, pseudo)
            }
        }
    }

    /// Correlation targets for every coefficient pair within the band limit,
    /// with this generator's closed-form predictions attached.
    ///
    /// The list is quadratic in the coefficient count, so the band limit is
    /// capped at 8 (285 coefficients, 81k pairs).
    pub fn correlation_targets(&self) -> Result<Vec<CorrelationTarget<f64>>> {
        let band = self.band_limit();
        if band > 8 {
            return Err(Error::InvalidSpec(format!(
                "all-pairs correlation targets need band_limit_doubled <= 8, got {band}"
            )));
        }
        let mut indices = Vec::new();
        for two_ell in 0..=band {
            for two_m in labels(two_ell) {
                for two_s in labels(two_ell) {
                    indices.push((two_ell, two_m, two_s));
                }
            }
        }
        let mut out = Vec::with_capacity(indices.len() * indices.len());
        for &a in &indices {
            for &b in &indices {
                let (predicted_corr, predicted_pseudo) = self.pair_moment(a, b);
                out.push(CorrelationTarget {
                    a,
                    b,
                    predicted_corr,
                    predicted_pseudo,
                });
            }
        }
        Ok(out)
    }

    /// Sampling closure suitable for the Monte Carlo estimators.
    pub fn generator(&self) -> BoxedGenerator<'_> {
        match self {
            GeneratorConfig::BiInvariant(spec) => {
                Box::new(move |rng| crate::fields::gen_gaussian_bi_invariant(spec, rng))
            }
            GeneratorConfig::LeftInvariant(spec) => {
                Box::new(move |rng| crate::fields::gen_gaussian_left_invariant(spec, rng))
            }
            GeneratorConfig::Rotated { template, family } => {
                let family = *family;
                Box::new(move |rng| crate::fields::gen_rotated(template, family, rng))
            }
            GeneratorConfig::RealizeSpinMeasure(mu) => {
                Box::new(move |rng| crate::fields::realize_spin_measure(mu, rng))
            }
        }
    }
}

/// A generator plus the run parameters carried in the same file.
#[derive(Debug, Clone)]
pub struct GeneratorRun {
    pub config: GeneratorConfig,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

fn require<T>(opt: Option<T>, what: &str, variant: &str) -> Result<T> {
    opt.ok_or_else(|| Error::InvalidSpec(format!("variant {variant} requires `{what}`")))
}

fn forbid<T>(opt: &Option<T>, what: &str, variant: &str) -> Result<()> {
    if opt.is_some() {
        return Err(Error::InvalidSpec(format!(
            "variant {variant} does not accept `{what}`"
        )));
    }
    Ok(())
}

pub fn parse_generator_spec(json: &str) -> Result<GeneratorRun> {
    let file: GeneratorSpecFile = serde_json::from_str(json)
        .map_err(|e| Error::InvalidSpec(format!("generator spec JSON: {e}")))?;
    let variant = file.variant.as_str();
    let config = match variant {
        "bi_invariant" => {
            forbid(&file.k_matrices, "k_matrices", variant)?;
            forbid(&file.template, "template", variant)?;
            forbid(&file.mu, "mu", variant)?;
            let two_big_l = require(file.band_limit_doubled, "band_limit_doubled", variant)?;
            let sigma_sq = require(file.spectrum, "spectrum", variant)?;
            let spec = CovarianceSpec::BiInvariant {
                two_big_l,
                sigma_sq,
            };
            spec.validate()?;
            GeneratorConfig::BiInvariant(spec)
        }
        "left_invariant" => {
            forbid(&file.spectrum, "spectrum", variant)?;
            forbid(&file.template, "template", variant)?;
            forbid(&file.mu, "mu", variant)?;
            let two_big_l = require(file.band_limit_doubled, "band_limit_doubled", variant)?;
            let raw = require(file.k_matrices, "k_matrices", variant)?;
            let mut k_matrices = Vec::with_capacity(raw.len());
            for (d, rows) in raw.iter().enumerate() {
                let n = dim(d as i32);
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidSpec(format!(
                        "k_matrices[{d}] must be {n}x{n}"
                    )));
                }
                let mut k = CMatrix::zeros(n, n);
                for (r, row) in rows.iter().enumerate() {
                    for (c, pair) in row.iter().enumerate() {
                        k[(r, c)] = Complex::new(pair[0], pair[1]);
                    }
                }
                k_matrices.push(k);
            }
            let spec = CovarianceSpec::LeftInvariant {
                two_big_l,
                k_matrices,
            };
            spec.validate()?;
            GeneratorConfig::LeftInvariant(spec)
        }
        "rotated_left" | "rotated_right" | "rotated_bi" => {
            forbid(&file.spectrum, "spectrum", variant)?;
            forbid(&file.k_matrices, "k_matrices", variant)?;
            forbid(&file.mu, "mu", variant)?;
            let raw = require(file.template, "template", variant)?;
            let template = coefficients_from_file(&raw)?;
            if template.norm_sq() <= 0.0 {
                return Err(Error::InvalidSpec(
                    "rotated variants need a nonzero template".into(),
                ));
            }
            if let Some(b) = file.band_limit_doubled {
                if b != template.two_big_l {
                    return Err(Error::InvalidSpec(format!(
                        "band_limit_doubled {b} does not match template band limit {}",
                        template.two_big_l
                    )));
                }
            }
            let family = match variant {
                "rotated_left" => InvarianceFamily::Left,
                "rotated_right" => InvarianceFamily::Right,
                _ => InvarianceFamily::Bi,
            };
            GeneratorConfig::Rotated { template, family }
        }
        "realize_spin_measure" => {
            forbid(&file.spectrum, "spectrum", variant)?;
            forbid(&file.k_matrices, "k_matrices", variant)?;
            forbid(&file.template, "template", variant)?;
            let raw = require(file.mu, "mu", variant)?;
            let mu = SpinMeasure {
                two_ell: raw.two_ell,
                masses: raw.masses,
            };
            mu.validate()?;
            if let Some(b) = file.band_limit_doubled {
                if b != mu.two_ell {
                    return Err(Error::InvalidSpec(format!(
                        "band_limit_doubled {b} does not match mu degree {}",
                        mu.two_ell
                    )));
                }
            }
            GeneratorConfig::RealizeSpinMeasure(mu)
        }
        other => {
            return Err(Error::InvalidSpec(format!(
                "unknown generator variant `{other}`"
            )));
        }
    };
    Ok(GeneratorRun {
        config,
        seed: file.seed,
        samples: file.samples,
    })
}
