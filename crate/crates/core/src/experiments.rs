//! Config-driven experiment runs producing the JSON/CSV artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{boundary_points, clip_ball, DomainSpec};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::{triangulate, triangulate_domain, MarkedPolygon};
use crate::mixed::{lemma1_check, psi, rayleigh_quotient, solve_mixed, Lemma1Record};
use crate::nodal::{analyze, NodalGeometryReport};
use crate::steklov::{cluster_indices, solve_steklov, CLUSTER_GAP};

pub const OUT_ENV: &str = "STEKLOV_LAB_OUT";

/// A catalog id or an inline specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainRef {
    Id(String),
    Spec(DomainSpec),
}

impl DomainRef {
    pub fn resolve(&self) -> Result<DomainSpec> {
        match self {
            DomainRef::Id(id) => DomainSpec::by_id(id)
                .ok_or_else(|| Error::InvalidInput(format!("unknown domain id '{id}'"))),
            DomainRef::Spec(s) => Ok(s.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MixedSweep {
    /// Boundary balls `B(x₀, s) ∩ Ω`, meshed at `h_over_s · s`. Without
    /// `x0_index` the center is drawn from the boundary samples with the
    /// config seed.
    Ball {
        domain: DomainRef,
        #[serde(default)]
        x0_index: Option<usize>,
        #[serde(default = "default_samples")]
        n_boundary_samples: usize,
        s_values: Vec<f64>,
        #[serde(default = "default_h_over_s")]
        h_over_s: f64,
    },
    /// Sloshing tanks `(0, L) × (−d, 0)`; the bump is centred mid-surface with
    /// radius `min(L/2, d)`, so it vanishes on the walls and the bottom.
    Tank { length: f64, depth_values: Vec<f64>, h: f64 },
}

fn default_samples() -> usize {
    64
}

fn default_h_over_s() -> f64 {
    0.05
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_collar() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domains: Vec<DomainRef>,
    /// Strictly decreasing mesh sizes.
    pub h_levels: Vec<f64>,
    pub k_eigenpairs: usize,
    /// `[λ_min, λ_max]` for the scaling summary.
    pub lambda_window: [f64; 2],
    #[serde(default)]
    pub mixed_sweeps: Vec<MixedSweep>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Collar depth as a fraction of each domain's diameter.
    #[serde(default = "default_collar")]
    pub collar_depth: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.domains.is_empty() {
            return bad("no domains".into());
        }
        for d in &self.domains {
            d.resolve()?.validate()?;
        }
        if self.h_levels.is_empty() || self.h_levels.iter().any(|&h| !(h > 0.0)) {
            return bad("h_levels must be positive and non-empty".into());
        }
        if self.h_levels.windows(2).any(|w| w[1] >= w[0]) {
            return bad("h_levels must be strictly decreasing".into());
        }
        if self.k_eigenpairs < 2 {
            return bad("k_eigenpairs must be at least 2".into());
        }
        if !(self.lambda_window[0] < self.lambda_window[1]) {
            return bad("lambda_window must be increasing".into());
        }
        if !(self.collar_depth > 0.0) {
            return bad("collar_depth must be positive".into());
        }
        for s in &self.mixed_sweeps {
            match s {
                MixedSweep::Ball { domain, s_values, h_over_s, n_boundary_samples, x0_index } => {
                    domain.resolve()?;
                    if s_values.iter().any(|&s| !(s > 0.0)) || !(*h_over_s > 0.0) {
                        return bad("ball sweep needs positive s_values and h_over_s".into());
                    }
                    if *n_boundary_samples < 3 || x0_index.is_some_and(|i| i >= *n_boundary_samples) {
                        return bad("ball sweep x0_index outside the boundary samples".into());
                    }
                }
                MixedSweep::Tank { length, depth_values, h } => {
                    if !(*length > 0.0 && *h > 0.0) || depth_values.iter().any(|&d| !(d > 0.0)) {
                        return bad("tank sweep needs positive length, depths and h".into());
                    }
                }
            }
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical)[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// `STEKLOV_LAB_OUT` overrides the configured directory.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumRecord {
    pub domain_id: String,
    pub h: f64,
    pub n_vertices: usize,
    pub n_boundary_vertices: usize,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub clusters: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub domain_id: String,
    pub h: f64,
    #[serde(flatten)]
    pub report: NodalGeometryReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingSummary {
    pub domain_id: String,
    pub h: f64,
    pub rows_in_window: usize,
    /// max/min of `density_radius·λ` over the upper half of the window.
    pub density_ratio_upper_half: Option<f64>,
    pub min_rho_times_lambda: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExperimentResults {
    pub config_hash: String,
    pub spectra: Vec<SpectrumRecord>,
    pub nodal: Vec<ExperimentRecord>,
    pub scaling: Vec<ScalingSummary>,
    pub lemma1: Vec<Lemma1Record>,
}

/// Spectral sweep only (`scaling`), or everything (`run`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunScope {
    Scaling,
    All,
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    if let Some(n) = jobs {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        return Ok(pool.install(f));
    }
    let _ = jobs;
    Ok(f())
}

/// Spectrum and nodal reports for one `(domain, h)` pair.
pub fn spectral_task(
    spec: &DomainSpec,
    h: f64,
    k: usize,
    collar_fraction: f64,
) -> Result<(SpectrumRecord, Vec<ExperimentRecord>)> {
    let mesh = triangulate_domain(spec, h)?;
    let spectrum = solve_steklov(&mesh, k)?;
    let collar = collar_fraction * spec.diameter();
    let nodal = (1..spectrum.len())
        .map(|i| {
            analyze(&mesh, &spectrum.interior_extensions[i], spectrum.eigenvalues[i], i, Some(collar))
                .map(|report| ExperimentRecord { domain_id: spec.id.clone(), h, report })
        })
        .collect::<Result<Vec<_>>>()?;
    let record = SpectrumRecord {
        domain_id: spec.id.clone(),
        h,
        n_vertices: mesh.n_vertices(),
        n_boundary_vertices: spectrum.boundary_vertices.len(),
        clusters: cluster_indices(&spectrum.eigenvalues, CLUSTER_GAP),
        eigenvalues: spectrum.eigenvalues,
        residuals: spectrum.residuals,
    };
    Ok((record, nodal))
}

/// `lemma1.csv` rows of one sweep.
pub fn mixed_sweep_rows(sweep: &MixedSweep, seed: u64) -> Result<Vec<Lemma1Record>> {
    match sweep {
        MixedSweep::Ball { domain, x0_index, n_boundary_samples, s_values, h_over_s } => {
            let spec = domain.resolve()?;
            let samples = boundary_points(&spec, *n_boundary_samples)?;
            let idx = match x0_index {
                Some(i) => *i,
                None => ChaCha8Rng::seed_from_u64(seed).gen_range(0..samples.len()),
            };
            let x0 = samples[idx].point;
            let rows = crate::linalg::map_indices(s_values.len(), |j| {
                let s = s_values[j];
                lemma1_check(&clip_ball(&spec, x0, s)?, h_over_s * s)
            });
            rows.into_iter().collect()
        }
        MixedSweep::Tank { length, depth_values, h } => {
            let rows = crate::linalg::map_indices(depth_values.len(), |j| tank_row(*length, depth_values[j], *h));
            rows.into_iter().collect()
        }
    }
}

fn tank_row(length: f64, depth: f64, h: f64) -> Result<Lemma1Record> {
    let mesh = triangulate(&MarkedPolygon::sloshing_tank(length, depth), h)?;
    let sigma1 = solve_mixed(&mesh, 1)?.eigenvalues[0];
    let x0 = Point::new(0.5 * length, 0.0);
    let s = (0.5 * length).min(depth);
    let u: Vec<f64> = mesh.vertices.iter().map(|&p| psi(p, x0, s)).collect();
    let r_psi = rayleigh_quotient(&mesh, &u)?;
    Ok(Lemma1Record {
        domain: "sloshing".into(),
        x0,
        s,
        h,
        sigma1,
        r_psi,
        sigma1_s: sigma1 * s,
        bound_holds: sigma1 <= r_psi * (1.0 + 5.0 * h / s),
    })
}

fn summarize(cfg: &ExperimentConfig, spectra: &[SpectrumRecord], nodal: &[ExperimentRecord]) -> Vec<ScalingSummary> {
    let finest = *cfg.h_levels.last().unwrap();
    let [lo, hi] = cfg.lambda_window;
    let mid = 0.5 * (lo + hi);
    let mut ids: Vec<&str> = Vec::new();
    for s in spectra {
        if !ids.contains(&s.domain_id.as_str()) {
            ids.push(&s.domain_id);
        }
    }
    ids.into_iter()
        .map(|id| {
            let rows: Vec<&NodalGeometryReport> = nodal
                .iter()
                .filter(|r| r.domain_id == id && r.h == finest)
                .map(|r| &r.report)
                .filter(|r| r.lambda >= lo && r.lambda <= hi)
                .collect();
            let upper: Vec<f64> = rows
                .iter()
                .filter(|r| r.lambda >= mid)
                .map(|r| r.density_radius_times_lambda)
                .collect();
            let ratio = (!upper.is_empty()).then(|| {
                upper.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                    / upper.iter().copied().fold(f64::INFINITY, f64::min)
            });
            let min_rho = rows.iter().map(|r| r.min_rho_times_lambda).reduce(f64::min);
            ScalingSummary {
                domain_id: id.to_string(),
                h: finest,
                rows_in_window: rows.len(),
                density_ratio_upper_half: ratio,
                min_rho_times_lambda: min_rho,
            }
        })
        .collect()
}

/// Runs the configured sweeps. Results are gathered in config order, so the
/// thread count never changes the output.
pub fn run(cfg: &ExperimentConfig, scope: RunScope, jobs: Option<usize>) -> Result<ExperimentResults> {
    cfg.validate()?;
    let domains: Vec<DomainSpec> = cfg.domains.iter().map(DomainRef::resolve).collect::<Result<_>>()?;
    let tasks: Vec<(usize, f64)> = (0..domains.len())
        .flat_map(|d| cfg.h_levels.iter().map(move |&h| (d, h)))
        .collect();
    with_jobs(jobs, || {
        let outcomes = crate::linalg::map_indices(tasks.len(), |t| {
            let (d, h) = tasks[t];
            spectral_task(&domains[d], h, cfg.k_eigenpairs, cfg.collar_depth)
        });
        let mut results = ExperimentResults { config_hash: cfg.hash(), ..Default::default() };
        for o in outcomes {
            let (spec, nodal) = o?;
            results.spectra.push(spec);
            results.nodal.extend(nodal);
        }
        results.scaling = summarize(cfg, &results.spectra, &results.nodal);
        if scope == RunScope::All {
            for (i, sweep) in cfg.mixed_sweeps.iter().enumerate() {
                results.lemma1.extend(mixed_sweep_rows(sweep, cfg.seed.wrapping_add(i as u64))?);
            }
        }
        Ok(results)
    })?
}

pub const NODAL_HEADER: [&str; 12] = [
    "domain_id",
    "h",
    "eig_index",
    "lambda",
    "n_domains",
    "density_radius",
    "density_radius_times_lambda",
    "min_rho",
    "min_rho_times_lambda",
    "max_rayleigh_residual",
    "collar_density_radius",
    "config_hash",
];

pub const LEMMA1_HEADER: [&str; 6] = ["domain", "x0", "s", "sigma1", "r_psi", "sigma1_s"];

pub const CONVERGENCE_HEADER: [&str; 6] =
    ["domain_id", "eig_index", "h", "lambda", "delta_from_coarser", "config_hash"];

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("{}: {e}", path.display()))
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// Formats a point as `x;y` for a single CSV field.
pub fn format_point(p: Point) -> String {
    format!("{};{}", p.x, p.y)
}

pub fn nodal_rows(results: &ExperimentResults) -> Vec<Vec<String>> {
    results
        .nodal
        .iter()
        .map(|r| {
            let n = &r.report;
            vec![
                r.domain_id.clone(),
                r.h.to_string(),
                n.eig_index.to_string(),
                n.lambda.to_string(),
                n.n_domains.to_string(),
                n.density_radius.to_string(),
                n.density_radius_times_lambda.to_string(),
                n.min_rho.to_string(),
                n.min_rho_times_lambda.to_string(),
                n.max_rayleigh_residual.to_string(),
                opt(n.collar_density_radius),
                results.config_hash.clone(),
            ]
        })
        .collect()
}

pub fn convergence_rows(results: &ExperimentResults) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let mut ids: Vec<&str> = Vec::new();
    for s in &results.spectra {
        if !ids.contains(&s.domain_id.as_str()) {
            ids.push(&s.domain_id);
        }
    }
    for id in ids {
        let levels: Vec<&SpectrumRecord> = results.spectra.iter().filter(|s| s.domain_id == id).collect();
        let k = levels.iter().map(|s| s.eigenvalues.len()).min().unwrap_or(0);
        for i in 0..k {
            for (j, s) in levels.iter().enumerate() {
                let delta = (j > 0).then(|| (s.eigenvalues[i] - levels[j - 1].eigenvalues[i]).abs());
                rows.push(vec![
                    id.to_string(),
                    i.to_string(),
                    s.h.to_string(),
                    s.eigenvalues[i].to_string(),
                    opt(delta),
                    results.config_hash.clone(),
                ]);
            }
        }
    }
    rows
}

pub fn lemma1_rows(results: &ExperimentResults) -> Vec<Vec<String>> {
    results
        .lemma1
        .iter()
        .map(|r| {
            vec![
                r.domain.clone(),
                format_point(r.x0),
                r.s.to_string(),
                r.sigma1.to_string(),
                r.r_psi.to_string(),
                r.sigma1_s.to_string(),
            ]
        })
        .collect()
}

#[derive(Serialize)]
struct SpectraFile<'a> {
    config_hash: &'a str,
    spectra: &'a [SpectrumRecord],
    scaling: &'a [ScalingSummary],
}

/// Writes the artifacts of `scope` into `dir` and returns their paths.
pub fn write_outputs(results: &ExperimentResults, dir: &Path, scope: RunScope) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    let spectra = dir.join("spectra.json");
    let body = serde_json::to_string_pretty(&SpectraFile {
        config_hash: &results.config_hash,
        spectra: &results.spectra,
        scaling: &results.scaling,
    })
    .expect("spectra serialize");
    fs::write(&spectra, body + "\n").map_err(|e| io_err(&spectra, e))?;
    written.push(spectra);
    let nodal = dir.join("nodal_scaling.csv");
    write_csv(&nodal, &NODAL_HEADER, nodal_rows(results))?;
    written.push(nodal);
    let conv = dir.join("convergence.csv");
    write_csv(&conv, &CONVERGENCE_HEADER, convergence_rows(results))?;
    written.push(conv);
    if scope == RunScope::All {
        let lemma = dir.join("lemma1.csv");
        write_csv(&lemma, &LEMMA1_HEADER, lemma1_rows(results))?;
        written.push(lemma);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"domains": ["square"], "h_levels": [0.5, 0.25], "k_eigenpairs": 4,
                "lambda_window": [0.5, 4.0]}"#,
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_levels() {
        let mut c = tiny();
        c.h_levels = vec![0.1, 0.2];
        assert!(c.validate().is_err());
        c.h_levels = vec![0.2];
        c.k_eigenpairs = 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_domain_is_invalid() {
        let r = ExperimentConfig::from_json(
            r#"{"domains": ["torus"], "h_levels": [0.5], "k_eigenpairs": 2, "lambda_window": [0, 1]}"#,
        );
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let c = tiny();
        assert_eq!(c.hash(), tiny().hash());
        assert_eq!(c.hash().len(), 16);
        let mut d = tiny();
        d.seed = 1;
        assert_ne!(c.hash(), d.hash());
    }

    #[test]
    fn row_counts() {
        let r = run(&tiny(), RunScope::Scaling, None).unwrap();
        assert_eq!(r.nodal.len(), 2 * 3);
        assert_eq!(convergence_rows(&r).len(), 2 * 4);
    }
}
