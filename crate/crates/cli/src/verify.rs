//! The ordered verification suite behind `su2fields verify`.
//!
//! Each check compares an implementation route against an independent oracle
//! (algebraic identity, finite differences, quadrature, or a closed form
//! recomputed here in integer arithmetic) and reports one row
//! `(name, metric, threshold, pass)`. Checks run in a fixed order and every
//! random probe draws from its own deterministic substream, so reruns with
//! the same settings produce byte-identical reports.

use std::collections::BTreeMap;

use num_complex::Complex;
use su2fields::fields::basis_vector;
use su2fields::grid::build_grid;
use su2fields::group::haar_sample;
use su2fields::half::labels;
use su2fields::io::VerifyRow;
use su2fields::mc::{
    haar_pair_moment_closed_form, schur_moment_closed_form, schur_moment_quadrature, substream,
};
use su2fields::transform::{
    fd_sphere_laplacian, laplacian_multiplier, multiplier_identity_exact, synthesize,
    LaplacianKind, SpectralCoefficients,
};
use su2fields::wigner::{
    ambient_laplacian_fd_defect, symmetry_check, wigner_matrix, BAND_LIMIT_CAP,
};
use su2fields::{Error, Result, Su2};

use rand::Rng;

/// Check names in execution order, with their default thresholds.
pub const CHECKS: [(&str, f64); 9] = [
    ("unitarity", 1e-10),
    ("homomorphism", 1e-10),
    ("symmetry", 1e-12),
    ("harmonicity", 1e-5),
    ("grid_gate", 1e-8),
    ("laplacian_exact", 0.0),
    ("laplacian_fd", 1e-4),
    ("haar_moments", 1e-9),
    ("schur_moments", 1e-9),
];

pub struct VerifySettings {
    /// Doubled band limit for the representation-level checks.
    pub band: i32,
    pub seed: u64,
    /// Random probes per check.
    pub samples: usize,
    /// Per-check threshold overrides, keyed by check name.
    pub overrides: BTreeMap<String, f64>,
}

/// Run every check in order. Returns the report rows; the caller decides the
/// exit code from the `pass` column.
pub fn run_verify(s: &VerifySettings) -> Result<Vec<VerifyRow>> {
    if s.band > BAND_LIMIT_CAP {
        return Err(Error::BandLimitExceeded {
            two_ell: s.band,
            cap: BAND_LIMIT_CAP,
        });
    }
    let threshold = |name: &str, default: f64| -> f64 {
        s.overrides.get(name).copied().unwrap_or(default)
    };
    let mut rows = Vec::with_capacity(CHECKS.len());
    let push = |rows: &mut Vec<VerifyRow>, name: &str, metric: f64| {
        let default = CHECKS
            .iter()
            .find(|(n, _)| *n == name)
            .expect("known check name")
            .1;
        let thr = threshold(name, default);
        rows.push(VerifyRow {
            name: name.to_string(),
            metric,
            threshold: thr,
            pass: metric <= thr,
        });
    };

    push(&mut rows, "unitarity", unitarity_metric(s)?);
    push(&mut rows, "homomorphism", homomorphism_metric(s)?);
    push(&mut rows, "symmetry", symmetry_metric(s)?);
    push(&mut rows, "harmonicity", harmonicity_metric(s)?);
    push(&mut rows, "grid_gate", grid_gate_metric(s)?);
    push(&mut rows, "laplacian_exact", laplacian_exact_metric());
    push(&mut rows, "laplacian_fd", laplacian_fd_metric(s)?);
    push(&mut rows, "haar_moments", haar_moments_metric(s)?);
    push(&mut rows, "schur_moments", schur_moments_metric(s)?);
    Ok(rows)
}

/// Max unitarity defect of `D^l(g)` over random elements and all degrees.
fn unitarity_metric(s: &VerifySettings) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..s.samples {
        let mut rng = substream(s.seed, 1_000 + i as u64);
        let g: Su2 = haar_sample(&mut rng);
        for two_ell in 0..=s.band {
            worst = worst.max(wigner_matrix(two_ell, &g)?.unitarity_defect());
        }
    }
    Ok(worst)
}

/// Max entrywise defect of `D(g1 g2) = D(g1) D(g2)` over random pairs.
fn homomorphism_metric(s: &VerifySettings) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..s.samples {
        let mut rng = substream(s.seed, 2_000 + i as u64);
        let g1: Su2 = haar_sample(&mut rng);
        let g2: Su2 = haar_sample(&mut rng);
        let g12 = g1.mul(&g2);
        for two_ell in 0..=s.band {
            let d1 = wigner_matrix(two_ell, &g1)?;
            let d2 = wigner_matrix(two_ell, &g2)?;
            let d12 = wigner_matrix(two_ell, &g12)?;
            worst = worst.max(d12.entries.sub(&d1.entries.mul(&d2.entries)).max_abs());
        }
    }
    Ok(worst)
}

/// Max defect of the conjugation identities over random elements.
fn symmetry_metric(s: &VerifySettings) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..s.samples {
        let mut rng = substream(s.seed, 3_000 + i as u64);
        let g: Su2 = haar_sample(&mut rng);
        for two_ell in 0..=s.band {
            worst = worst.max(symmetry_check(two_ell, &g)?);
        }
    }
    Ok(worst)
}

/// Finite-difference harmonicity of the homogeneous extensions at off-sphere
/// points, degrees 2l in {1, 2, 3, 4} (independent of the band setting).
fn harmonicity_metric(s: &VerifySettings) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..s.samples {
        let mut rng = substream(s.seed, 4_000 + i as u64);
        let g: Su2 = haar_sample(&mut rng);
        let r: f64 = rng.gen_range(0.5..1.6);
        let x = [
            r * g.alpha.re,
            r * g.alpha.im,
            r * g.beta.re,
            r * g.beta.im,
        ];
        for two_ell in 1..=4 {
            for two_m in labels(two_ell) {
                for two_s in labels(two_ell) {
                    worst =
                        worst.max(ambient_laplacian_fd_defect(two_ell, two_m, two_s, x, 1e-3)?);
                }
            }
        }
    }
    Ok(worst)
}

/// Full orthonormality gate at the configured band limit, folded with the
/// total-weight identity (relative defect against `16 pi^2`).
fn grid_gate_metric(s: &VerifySettings) -> Result<f64> {
    let grid = build_grid::<f64>(s.band)?;
    let gram = grid.verify_exactness()?;
    let volume = 16.0 * std::f64::consts::PI * std::f64::consts::PI;
    let weight = ((grid.total_weight() - volume) / volume).abs();
    Ok(gram.max(weight))
}

/// Laplacian multiplier table vs the closed forms recomputed here in doubled
/// integer arithmetic, plus the exact splitting identity; any mismatch
/// contributes 1.0 to the metric, so the expected metric is exactly 0.
fn laplacian_exact_metric() -> f64 {
    let mut worst = 0.0f64;
    for two_ell in 0..=BAND_LIMIT_CAP {
        for two_s in labels(two_ell) {
            if !multiplier_identity_exact(two_ell, two_s) {
                worst = worst.max(1.0);
            }
            let expect = |num: i32| -(f64::from(num)) / 4.0;
            let table = [
                (LaplacianKind::Full, expect(two_ell * (two_ell + 2))),
                (LaplacianKind::Vertical, expect(two_s * two_s)),
                (
                    LaplacianKind::Horizontal,
                    expect((two_ell - two_s) * (two_ell + two_s + 2) + 2 * two_s),
                ),
                (
                    LaplacianKind::Spin,
                    expect((two_ell - two_s) * (two_ell + two_s + 2)),
                ),
            ];
            for (kind, reference) in table {
                let got: f64 = laplacian_multiplier(kind, two_ell, two_s)
                    .expect("valid indices by construction");
                worst = worst.max((got - reference).abs());
            }
        }
    }
    worst
}

/// Spectral full Laplacian vs the finite-difference oracle on a random
/// degree-1 field: relative defect at random points.
fn laplacian_fd_metric(s: &VerifySettings) -> Result<f64> {
    let mut rng = substream(s.seed, 5_000);
    let mut coeffs = SpectralCoefficients::<f64>::zeros(2)?;
    for two_m in labels(2) {
        for two_s in labels(2) {
            coeffs.set(
                2,
                two_m,
                two_s,
                Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
        }
    }
    let field = synthesize(&coeffs);
    let mult: f64 = laplacian_multiplier(LaplacianKind::Full, 2, 0)?;
    let mut worst = 0.0f64;
    for i in 0..s.samples.min(5) {
        let mut rng = substream(s.seed, 5_100 + i as u64);
        let g: Su2 = haar_sample(&mut rng);
        let fd = fd_sphere_laplacian(&field, &g, 1e-3);
        let expect = field(&g) * mult;
        worst = worst.max((fd - expect).norm() / expect.norm().max(1e-6));
    }
    Ok(worst)
}

/// Both Haar pair-moment families by quadrature vs the closed forms, for all
/// index pairs with degrees up to `min(band, 4)`.
fn haar_moments_metric(s: &VerifySettings) -> Result<f64> {
    let cap = s.band.min(4);
    let grid = build_grid::<f64>(2 * cap)?;
    let mut indices = Vec::new();
    for two_ell in 0..=cap {
        for two_m in labels(two_ell) {
            for two_s in labels(two_ell) {
                indices.push((two_ell, two_m, two_s));
            }
        }
    }
    // Precompute per-index node values so the pair loop is a weighted dot.
    let mut values: Vec<Vec<Complex<f64>>> = vec![Vec::with_capacity(grid.nodes.len()); indices.len()];
    let mut weights = Vec::with_capacity(grid.nodes.len());
    for node in &grid.nodes {
        weights.push(node.weight);
        let mats: Vec<_> = (0..=cap)
            .map(|d| wigner_matrix(d, &node.element))
            .collect::<Result<_>>()?;
        for (k, &(l, m, sx)) in indices.iter().enumerate() {
            values[k].push(mats[l as usize].get(m, sx));
        }
    }
    let volume = 16.0 * std::f64::consts::PI * std::f64::consts::PI;
    let mut worst = 0.0f64;
    for (ka, &a) in indices.iter().enumerate() {
        for (kb, &b) in indices.iter().enumerate() {
            let mut corr = Complex::new(0.0, 0.0);
            let mut pseudo = Complex::new(0.0, 0.0);
            for (j, w) in weights.iter().enumerate() {
                let za = values[ka][j];
                let zb = values[kb][j];
                corr += za * zb.conj() * *w;
                pseudo += za * zb * *w;
            }
            let (ec, ep) = haar_pair_moment_closed_form(a, b);
            worst = worst
                .max((corr / volume - ec).norm())
                .max((pseudo / volume - ep).norm());
        }
    }
    Ok(worst)
}

/// Schur moments of `D(g) v` pairs by quadrature vs the closed form, for
/// degrees up to `min(band, 4)` with one basis and one random probe vector.
fn schur_moments_metric(s: &VerifySettings) -> Result<f64> {
    let cap = s.band.min(4);
    let grid = build_grid::<f64>(2 * cap)?;
    let mut worst = 0.0f64;
    for two_ell in 0..=cap {
        let mut rng = substream(s.seed, 6_000 + two_ell as u64);
        let v = basis_vector::<f64>(two_ell, -two_ell);
        let vp: Vec<Complex<f64>> = (0..v.len())
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let (corr, pseudo) = schur_moment_quadrature(&grid, two_ell, &v, &vp)?;
        for (i, two_i) in labels(two_ell).enumerate() {
            for (j, two_j) in labels(two_ell).enumerate() {
                let (ec, ep) = schur_moment_closed_form(two_ell, &v, &vp, two_i, two_j);
                worst = worst
                    .max((corr[(i, j)] - ec).norm())
                    .max((pseudo[(i, j)] - ep).norm());
            }
        }
    }
    Ok(worst)
}
