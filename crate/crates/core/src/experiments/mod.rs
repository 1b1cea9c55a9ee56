//! Experiment configuration, suites and report files.
//!
//! A suite writes three files into the output directory: `<suite>.csv` with
//! one row per check, `<suite>.json` with the verdicts and full reports, and
//! `manifest.json` with the seed, crate version and wall time. The CSV and
//! JSON depend only on the configuration, never on timing or thread count.

pub mod checks;
pub mod criteria;
pub mod estimator;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eulerian::{walk_law_consistency, DEFAULT_TRAVERSE_CAP};
use crate::fmt::{g17, to_json_string};
use crate::graphs;
use crate::isomorphism::{baby_iso_check, ray_knight_two_sample};
use crate::network::{load_network, Network};
use crate::rng::sub_seed;
use crate::tree::tree_concentration_experiment;
use crate::walk::inverse_local_time_tails;

use checks::{best_sweep, coupling_check, recursive_sampler_check, wp_invariance_check};
use criteria::{evaluate_all, invariance_network, Budget};
use estimator::{aldous_concentration_experiment, estimate_cover_time, EstimatorConfig};

pub const SCHEMA_VERSION: u32 = 1;

pub const SUITES: [&str; 7] = ["smoke", "ray-knight", "coupling", "concentration", "eulerian", "estimator", "full"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleCounts {
    pub gff: usize,
    pub walk: usize,
    pub cover: usize,
    /// Multiplier on the acceptance budget used by the `full` suite.
    pub full_scale: f64,
}

impl Default for SampleCounts {
    fn default() -> Self {
        SampleCounts {
            gff: 10_000,
            walk: 10_000,
            cover: 500,
            full_scale: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: String,
    /// Edge list; each suite has a built-in network when absent.
    pub graph_path: Option<PathBuf>,
    pub root: usize,
    pub seed: u64,
    pub samples: SampleCounts,
    pub t_values: Vec<f64>,
    pub epsilon: f64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            suite: "smoke".into(),
            graph_path: None,
            root: 0,
            seed: 1,
            samples: SampleCounts::default(),
            t_values: vec![0.5, 2.0],
            epsilon: 0.5,
            output_dir: PathBuf::from("covergff-out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !SUITES.contains(&self.suite.as_str()) {
            return Err(Error::UnknownSuite(self.suite.clone()));
        }
        let s = &self.samples;
        if s.gff < 100 || s.walk == 0 || s.cover < 2 || !(s.full_scale > 0.0) {
            return Err(Error::invalid("sample counts must be positive (gff ≥ 100, cover ≥ 2)"));
        }
        if self.t_values.is_empty() || self.t_values.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Error::invalid("t_values must be positive and finite"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid("epsilon must lie in (0, 1)"));
        }
        Ok(())
    }

    fn network_or(&self, fallback: impl FnOnce() -> Network) -> Result<Network> {
        match &self.graph_path {
            Some(p) => load_network(&fs::read_to_string(p)?, self.root),
            None => fallback().with_root(self.root),
        }
    }

    pub fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            gff_samples: self.samples.gff,
            epsilon: self.epsilon,
            cover_runs: self.samples.cover,
            start: None,
            seed: self.seed,
        }
    }
}

/// One line of a suite CSV.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub statistic: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckRow {
    fn new(check: impl Into<String>, statistic: &str, value: f64, threshold: f64, pass: bool) -> Self {
        CheckRow {
            check: check.into(),
            statistic: statistic.into(),
            value,
            threshold,
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    pub seed: u64,
    pub rows: Vec<CheckRow>,
    pub pass: bool,
    pub reports: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub suite: String,
    pub seed: u64,
    pub crate_name: &'static str,
    pub crate_version: &'static str,
    pub config: ExperimentConfig,
    pub wall_time_seconds: f64,
    pub files: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: SuiteReport,
    pub manifest: Manifest,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    pub manifest_path: PathBuf,
}

struct Collector {
    rows: Vec<CheckRow>,
    reports: serde_json::Map<String, serde_json::Value>,
}

impl Collector {
    fn new() -> Self {
        Collector {
            rows: Vec::new(),
            reports: serde_json::Map::new(),
        }
    }

    fn row(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    fn report<T: Serialize>(&mut self, key: impl Into<String>, value: &T) -> Result<()> {
        self.reports.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }
}

fn ray_knight_suite(cfg: &ExperimentConfig, c: &mut Collector, samples: usize) -> Result<()> {
    let net = cfg.network_or(|| graphs::path(5))?;
    for (i, &t) in cfg.t_values.iter().enumerate() {
        let r = ray_knight_two_sample(&net, t, samples, sub_seed(cfg.seed, &format!("ray-knight-{i}")))?;
        let min_p = r.per_vertex.iter().map(|v| v.ks.p_value).fold(1.0, f64::min);
        c.row(CheckRow::new(format!("ray-knight t={t}"), "min_ks_p", min_p, r.ks_level, r.pass));
        c.report(format!("ray-knight-{i}"), &r)?;
    }
    Ok(())
}

fn coupling_suite(cfg: &ExperimentConfig, c: &mut Collector) -> Result<()> {
    let tree = cfg.network_or(|| graphs::random_tree(20, cfg.seed))?;
    for (i, &t) in cfg.t_values.iter().enumerate() {
        let r = coupling_check(&tree, t, cfg.samples.walk, sub_seed(cfg.seed, &format!("coupling-{i}")))?;
        c.row(CheckRow::new(format!("coupling t={t}"), "violations", r.violations as f64, 0.0, r.pass));
        c.report(format!("coupling-{i}"), &r)?;
        let s = recursive_sampler_check(&tree, t, cfg.samples.walk, sub_seed(cfg.seed, &format!("sampler-{i}")))?;
        let min_p = s.ks.iter().map(|k| k.p_value).fold(1.0, f64::min);
        c.row(CheckRow::new(format!("recursive-sampler t={t}"), "min_ks_p", min_p, s.ks_level, s.pass));
        c.report(format!("sampler-{i}"), &s)?;
    }
    Ok(())
}

fn concentration_suite(cfg: &ExperimentConfig, c: &mut Collector) -> Result<()> {
    let tree = cfg.network_or(|| graphs::binary_tree(6))?;
    let r = tree_concentration_experiment(&tree, cfg.samples.cover, cfg.samples.gff, sub_seed(cfg.seed, "tree"))?;
    c.row(CheckRow::new("tree-concentration", "ratio", r.ratio, f64::NAN, true));
    c.report("tree-concentration", &r)?;
    for (i, &t) in cfg.t_values.iter().enumerate() {
        let rows = inverse_local_time_tails(&tree, t, &[1.0, 2.0, 4.0, 8.0], cfg.samples.walk, sub_seed(cfg.seed, &format!("tails-{i}")))?;
        for row in &rows {
            let pass = row.empirical <= row.bound + 4.0 * row.stderr;
            c.row(CheckRow::new(format!("ilt-tail t={t} λ={}", row.lambda), "tail", row.empirical, row.bound, pass));
        }
        c.report(format!("tails-{i}"), &rows)?;
    }
    let family: Vec<(String, Network)> = (3..=6).map(|h| (format!("binary-depth-{h}"), graphs::binary_tree(h))).collect();
    let d = aldous_concentration_experiment(&family, cfg.samples.cover, sub_seed(cfg.seed, "dispersion"))?;
    for p in &d.points {
        c.row(CheckRow::new(format!("dispersion {}", p.label), "sd_over_mean", p.dispersion, p.hit_cover_scale, true));
    }
    c.row(CheckRow::new("dispersion-trend", "decreasing", f64::from(u8::from(d.decreasing)), 1.0, d.decreasing));
    c.report("dispersion", &d)?;
    let lines: Vec<(String, Network)> = [8, 16, 32].iter().map(|&n| (format!("line-{n}"), graphs::path(n))).collect();
    let l = aldous_concentration_experiment(&lines, cfg.samples.cover, sub_seed(cfg.seed, "line-dispersion"))?;
    for p in &l.points {
        c.row(CheckRow::new(format!("dispersion {}", p.label), "sd_over_mean", p.dispersion, p.hit_cover_scale, true));
    }
    c.report("line-dispersion", &l)?;
    Ok(())
}

fn eulerian_suite(cfg: &ExperimentConfig, c: &mut Collector, vertices: usize, cap: u32) -> Result<()> {
    let s = best_sweep(vertices, cap)?;
    c.row(CheckRow::new("best-sweep", "graphs", s.graphs as f64, 0.0, s.pass));
    c.report("best-sweep", &s)?;
    let paths = (cfg.samples.walk / 10).max(10);
    let inv = wp_invariance_check(&invariance_network(), 1.5, paths, 5, sub_seed(cfg.seed, "invariance"))?;
    c.row(CheckRow::new("wp-invariance", "max_log_gap", inv.max_log_gap, 1e-9, inv.pass));
    c.report("wp-invariance", &inv)?;
    let runs = cfg.samples.walk.max(20_000);
    let law = walk_law_consistency(&graphs::path(2), &[1.0, 1.0], 0.1, runs, DEFAULT_TRAVERSE_CAP, sub_seed(cfg.seed, "path-law"))?;
    c.row(CheckRow::new("path-law", "max_abs_z", law.max_abs_z, 5.0, law.pass));
    c.report("path-law", &law)?;
    Ok(())
}

fn estimator_suite(cfg: &ExperimentConfig, c: &mut Collector) -> Result<()> {
    let net = cfg.network_or(|| graphs::binary_tree(6))?;
    let est = estimate_cover_time(&net, &cfg.estimator())?;
    c.row(CheckRow::new("estimate", "cover_time", est.estimate, f64::NAN, true));
    c.row(CheckRow::new("gate", "t_hit_over_estimate", est.gate_ratio, est.gate_threshold, est.gate_pass));
    if let Some(sim) = &est.simulation {
        c.row(CheckRow::new("simulated", "ratio", sim.ratio, 2.0, sim.upper_bound_ok));
    }
    c.report("estimate", &est)?;
    let budget = Budget {
        tree_depths: vec![4, 6, 8],
        gff_samples: cfg.samples.gff,
        tree_cover_runs: cfg.samples.cover,
        ..Budget::scaled(cfg.samples.full_scale)
    };
    let pts = criteria::tree_ratios(&budget, sub_seed(cfg.seed, "trend"))?;
    for p in &pts {
        c.row(CheckRow::new(format!("ratio {}", p.label), "ratio", p.ratio, p.ratio_stderr, true));
    }
    let decreasing = pts.windows(2).all(|w| w[1].ratio < w[0].ratio);
    c.row(CheckRow::new("ratio-trend", "decreasing", f64::from(u8::from(decreasing)), 1.0, decreasing));
    c.report("trend", &pts)?;
    Ok(())
}

fn smoke_suite(cfg: &ExperimentConfig, c: &mut Collector) -> Result<()> {
    let quick = ExperimentConfig {
        samples: SampleCounts {
            gff: 2000,
            walk: 2000,
            cover: 200,
            full_scale: cfg.samples.full_scale,
        },
        t_values: vec![cfg.t_values[0]],
        ..cfg.clone()
    };
    ray_knight_suite(&quick, c, 2000)?;
    let b = baby_iso_check(1.0, &[0.5, 1.0, 2.0], 20_000, sub_seed(cfg.seed, "baby"))?;
    c.row(CheckRow::new("baby-iso ℓ=1", "rows", b.rows.len() as f64, 0.0, b.pass));
    c.report("baby-iso", &b)?;
    let s = best_sweep(3, 5)?;
    c.row(CheckRow::new("best-sweep", "graphs", s.graphs as f64, 0.0, s.pass));
    let est = estimate_cover_time(&cfg.network_or(|| graphs::path(10))?, &quick.estimator())?;
    c.row(CheckRow::new("estimate", "cover_time", est.estimate, f64::NAN, true));
    c.report("estimate", &est)?;
    Ok(())
}

fn full_suite(cfg: &ExperimentConfig, c: &mut Collector) -> Result<()> {
    let budget = Budget::scaled(cfg.samples.full_scale);
    c.report("budget", &budget)?;
    for o in evaluate_all(&budget, cfg.seed)? {
        c.row(CheckRow::new(format!("criterion-{:02} {}", o.id, o.name), "pass", f64::from(u8::from(o.pass)), 1.0, o.pass));
        c.report(format!("criterion-{:02}", o.id), &o)?;
    }
    Ok(())
}

pub fn write_rows_csv<W: std::io::Write>(mut out: W, rows: &[CheckRow]) -> std::io::Result<()> {
    writeln!(out, "check,statistic,value,threshold,pass")?;
    for r in rows {
        writeln!(out, "\"{}\",{},{},{},{}", r.check.replace('"', "\"\""), r.statistic, g17(r.value), g17(r.threshold), r.pass)?;
    }
    Ok(())
}

/// Runs the configured suite and writes its CSV, JSON and manifest.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let mut c = Collector::new();
    match cfg.suite.as_str() {
        "smoke" => smoke_suite(cfg, &mut c)?,
        "ray-knight" => ray_knight_suite(cfg, &mut c, cfg.samples.walk)?,
        "coupling" => coupling_suite(cfg, &mut c)?,
        "concentration" => concentration_suite(cfg, &mut c)?,
        "eulerian" => eulerian_suite(cfg, &mut c, 4, 6)?,
        "estimator" => estimator_suite(cfg, &mut c)?,
        "full" => full_suite(cfg, &mut c)?,
        other => return Err(Error::UnknownSuite(other.into())),
    }
    let report = SuiteReport {
        schema_version: SCHEMA_VERSION,
        suite: cfg.suite.clone(),
        seed: cfg.seed,
        pass: c.rows.iter().all(|r| r.pass),
        rows: c.rows,
        reports: c.reports,
    };
    fs::create_dir_all(&cfg.output_dir)?;
    let csv_path = cfg.output_dir.join(format!("{}.csv", cfg.suite));
    let json_path = cfg.output_dir.join(format!("{}.json", cfg.suite));
    let manifest_path = cfg.output_dir.join("manifest.json");
    let mut csv = Vec::new();
    write_rows_csv(&mut csv, &report.rows)?;
    fs::write(&csv_path, csv)?;
    fs::write(&json_path, to_json_string(&report)?)?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        suite: cfg.suite.clone(),
        seed: cfg.seed,
        crate_name: env!("CARGO_PKG_NAME"),
        crate_version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        files: vec![
            csv_path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            json_path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
        ],
    };
    fs::write(&manifest_path, to_json_string(&manifest)?)?;
    Ok(ExperimentOutcome {
        report,
        manifest,
        csv_path,
        json_path,
        manifest_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing_and_validation() {
        let cfg = ExperimentConfig::from_json(r#"{"suite": "eulerian", "seed": 9, "samples": {"walk": 500}}"#).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.samples.walk, 500);
        assert_eq!(cfg.samples.gff, 10_000);
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"suite": "nope"}"#),
            Err(Error::UnknownSuite(_))
        ));
        assert!(ExperimentConfig::from_json(r#"{"epsilon": 1.5}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"t_values": []}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn csv_rows_render_with_full_precision() {
        let mut out = Vec::new();
        write_rows_csv(&mut out, &[CheckRow::new("a \"b\"", "x", 0.1, f64::NAN, true)]).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.ends_with("\"a \"\"b\"\"\",x,0.10000000000000001,nan,true\n"), "{s}");
    }
}
