// SPDX-License-Identifier: MIT OR Apache-2.0

use std::time::Instant;

use anyhow::Context;
use kdwbs::metrics::evaluate_run;
use kdwbs::pipeline::{run_detection, DetectConfig, DetectionOutcome};
use kdwbs::simulator::gen_scenario;
use kdwbs::{Bandwidth, KernelFamily, Sample};

use crate::manifest::{
    load_manifest, read_json, write_json, DetectOutput, EvaluateOutput, PathEntry, ResultChangePoints,
    RunManifest, TruthOutput,
};
use crate::{bench as bench_mod, BenchArgs, DetectArgs, DetectorArgs, EvaluateArgs, SimulateArgs, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0:#}")]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Runtime(_) => 2,
        }
    }
}

impl From<kdwbs::Error> for CliError {
    fn from(e: kdwbs::Error) -> Self {
        Self::Runtime(e.into())
    }
}

pub(crate) fn check_len(len: usize) -> Result<(), CliError> {
    if len == 0 || !len.is_multiple_of(3) {
        return Err(CliError::Usage(format!("--T must be a positive multiple of 3, got {len}")));
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    check_len(args.len)?;
    let (sample, truth) = gen_scenario(args.scenario, args.len, args.dim, args.seed).map_err(|e| match e {
        kdwbs::Error::BadDimension { .. } => CliError::Usage(e.to_string()),
        other => other.into(),
    })?;
    sample
        .write_csv_path(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    let doc = TruthOutput {
        schema: SCHEMA_VERSION,
        truth,
    };
    write_json(&doc, Some(&args.truth))?;
    Ok(())
}

/// Builds the library configuration from the shared flags.
pub fn detect_config(d: &DetectorArgs, seed: u64, tau: Option<f64>) -> Result<DetectConfig, CliError> {
    let bandwidth = match d.h.trim() {
        "auto" => Bandwidth::Auto,
        v => match v.parse::<f64>() {
            Ok(h) if h.is_finite() && h > 0.0 => Bandwidth::Fixed(h),
            _ => return Err(CliError::Usage(format!("--h must be 'auto' or a positive number, got '{v}'"))),
        },
    };
    let kernel: KernelFamily = d
        .kernel
        .parse()
        .map_err(|e: kdwbs::Error| CliError::Usage(e.to_string()))?;
    if let Some(t) = tau {
        if !t.is_finite() {
            return Err(CliError::Usage(format!("--tau must be finite, got {t}")));
        }
    }
    if !(d.alpha > 0.0 && d.alpha <= 1.0) {
        return Err(CliError::Usage(format!("--alpha must be in (0, 1], got {}", d.alpha)));
    }
    let mut cfg = DetectConfig::with_seed(seed);
    cfg.segmenter.intervals = d.intervals;
    cfg.segmenter.bandwidth = bandwidth;
    cfg.segmenter.kernel = kernel;
    cfg.segmenter.tau = tau;
    cfg.segmenter.min_interval_len = d.min_interval_len;
    cfg.segmenter.max_interval_len = d.max_interval_len;
    cfg.segmenter.include_full_interval = d.include_full_interval;
    cfg.segmenter.gram_budget = d.gram_budget;
    cfg.selector.directions = d.directions;
    cfg.selector.alpha = d.alpha;
    cfg.exact_tau = d.exact_tau;
    Ok(cfg)
}

pub fn path_entries(outcome: &DetectionOutcome) -> Vec<PathEntry> {
    outcome
        .path
        .records
        .iter()
        .map(|r| PathEntry { b: r.b, a: r.a })
        .collect()
}

pub fn detect(args: &DetectArgs) -> Result<(), CliError> {
    let (input, cfg) = match &args.from_manifest {
        Some(m) => {
            let man = load_manifest(m)?;
            let input = man
                .input
                .ok_or_else(|| anyhow::anyhow!("manifest {} has no input path", m.display()))?;
            let cfg = man
                .config
                .ok_or_else(|| anyhow::anyhow!("manifest {} has no detection config", m.display()))?;
            (input, cfg)
        }
        None => {
            let input = args.input.clone().expect("clap enforces --input");
            (input, detect_config(&args.detector, args.seed, args.tau)?)
        }
    };
    let sample = Sample::read_csv_path(&input).with_context(|| format!("reading {}", input.display()))?;
    let start = Instant::now();
    let outcome = run_detection(&sample, &cfg)?;
    let wall = start.elapsed().as_secs_f64();
    log::info!(
        "detected {} change points (h = {}, buffer = {})",
        outcome.change_points.len(),
        outcome.params.h,
        outcome.params.buffer
    );

    let mut manifest = RunManifest::new("detect");
    manifest.input = Some(input);
    manifest.bandwidth = Some(outcome.params.h);
    manifest.buffer = Some(outcome.params.buffer);
    manifest.used_gram = Some(outcome.used_gram);
    manifest.config = Some(cfg);
    manifest.wall_time_s = wall;
    let doc = DetectOutput {
        schema: SCHEMA_VERSION,
        change_points: outcome.change_points.clone(),
        path: path_entries(&outcome),
        selection: outcome.selection,
        manifest,
    };
    write_json(&doc, args.out.as_deref())?;
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let est: ResultChangePoints = read_json(&args.result)?;
    let truth: TruthOutput = read_json(&args.truth)?;
    let result = evaluate_run(&est.change_points, &truth.truth.change_points);
    let mut manifest = RunManifest::new("evaluate");
    manifest.input = Some(args.result.clone());
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    let doc = EvaluateOutput {
        schema: SCHEMA_VERSION,
        result,
        manifest,
    };
    write_json(&doc, args.out.as_deref())?;
    Ok(())
}

pub fn bench(args: &BenchArgs) -> Result<(), CliError> {
    check_len(args.len)?;
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be >= 1".into()));
    }
    // Validate the shared flags once, before any replicate runs.
    detect_config(&args.detector, args.seed, None)?;
    let rows = bench_mod::run_bench(args)?;
    bench_mod::write_table(&rows, args.exact_tau_audit, args.out.as_deref())?;
    Ok(())
}
