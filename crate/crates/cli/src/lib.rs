//! Subcommand runners for the `pds` binary.
//!
//! Every run writes its CSV tables and a `manifest.json` into the output
//! directory. Failures map onto exit codes through [`CliError::exit_code`].

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pds_core::montecarlo::{compare_log10, ensemble_pdf, targets_from_linearization};
use pds_core::optimize::{design_piecewise, grid_search, refine, OptimizationResult, PiecewiseReference};
use pds_core::spectra::moment_integrals;
use pds_core::rare::RareOptions;
use pds_core::{estimate, Attachment, ErrorClass, PdsError, PdsEstimate};
use serde::Serialize;
use thiserror::Error;

use crate::config::{Config, DesignFamily};
use crate::output::{CsvTable, Manifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Pds(#[from] PdsError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Pds(e) => match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Numerical => 3,
                ErrorClass::Assumption => 4,
            },
        }
    }
}

/// Options shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config_path: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub threads: usize,
}

struct Timer(BTreeMap<String, f64>);

impl Timer {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let v = f();
        self.0.insert(name.to_string(), t.elapsed().as_secs_f64());
        v
    }
}

fn manifest(command: &str, ctx: &RunContext, cfg: &Config) -> Result<Manifest, CliError> {
    let grid = cfg.frequency_grid()?;
    let base = moment_integrals(&cfg.spectrum()?, &grid)?;
    Ok(Manifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: serde_json::to_value(cfg).expect("config serializes"),
        config_path: ctx.config_path.display().to_string(),
        seed: ctx.seed,
        threads: ctx.threads,
        timings: BTreeMap::new(),
        sigma_h: base.sigma_h(),
        sigma_h_dot: base.sigma_h_dot(),
        sigma_eta: None,
        probabilities: BTreeMap::new(),
        gamma: None,
        outputs: Vec::new(),
        extra: BTreeMap::new(),
    })
}

fn write_estimate(est: &PdsEstimate, cfg: &Config, out: &Path, m: &mut Manifest) -> Result<(), CliError> {
    m.sigma_eta = Some(est.eta.sigma());
    for p in &est.profiles {
        m.probabilities.insert(p.quantity.to_string(), p.probability);
        for &frame in &cfg.pds.frames {
            let pdf = est.pdf(p.quantity, frame)?;
            let name = format!("pdf_{}_{}.csv", p.quantity, frame_name(frame));
            output::pdf_table(&pdf).write(&out.join(&name))?;
            m.outputs.push(name);
        }
    }
    let mut t = CsvTable::new(&["quantity", "frame", "sigma_background", "probability", "mean_duration"]);
    for p in &est.profiles {
        for &frame in &cfg.pds.frames {
            let pdf = est.pdf(p.quantity, frame)?;
            t.row(vec![
                p.quantity.to_string(),
                frame_name(frame).into(),
                output::num(pdf.sigma),
                output::num(p.probability),
                output::num(p.mean_duration),
            ]);
        }
    }
    t.write(&out.join("summary.csv"))?;
    m.outputs.push("summary.csv".into());
    if let Some(meas) = &est.measures {
        let mut t = CsvTable::new(&["n", "k_bar", "lambda_bar", "omega_n", "zeta"]);
        for p in &meas.points {
            let (w, z) = meas.equivalent(p.n);
            t.row([p.n, p.k_bar, p.lambda_bar, w, z].iter().map(|v| output::num(*v)).collect());
        }
        t.write(&out.join("effective_measures.csv"))?;
        m.outputs.push("effective_measures.csv".into());
    }
    Ok(())
}

fn frame_name(f: pds_core::Frame) -> &'static str {
    match f {
        pds_core::Frame::Relative => "relative",
        pds_core::Frame::Absolute => "absolute",
    }
}

fn prepare(ctx: &RunContext) -> Result<Config, CliError> {
    let cfg = Config::load(&ctx.config_path)?;
    std::fs::create_dir_all(&ctx.out).map_err(|source| CliError::Io { path: ctx.out.clone(), source })?;
    Ok(cfg)
}

/// Background statistics, rare-event profiles and synthesized PDFs.
pub fn run_estimate(ctx: &RunContext) -> Result<Manifest, CliError> {
    let cfg = prepare(ctx)?;
    let mut m = manifest("estimate", ctx, &cfg)?;
    let mut timer = Timer(BTreeMap::new());
    let model = cfg.model()?;
    let forcing = cfg.forcing()?;
    let quantities = cfg.quantities(&model)?;
    let opts = cfg.pds_options()?;
    let est = timer.time("pds", || estimate(&model, &forcing, &quantities, &opts))?;
    write_estimate(&est, &cfg, &ctx.out, &mut m)?;
    m.timings = timer.0;
    m.write(&ctx.out)?;
    Ok(m)
}

#[derive(Debug, Serialize)]
struct ComparisonRecord {
    quantity: String,
    frame: &'static str,
    max_abs_log10: f64,
    mean_abs_log10: f64,
    bins: usize,
    passed: bool,
}

/// PDS estimate against the Monte-Carlo ensemble on the masked log10 density.
pub fn run_validate(ctx: &RunContext) -> Result<Manifest, CliError> {
    let cfg = prepare(ctx)?;
    let mut m = manifest("validate", ctx, &cfg)?;
    let mut timer = Timer(BTreeMap::new());
    let model = cfg.model()?;
    let forcing = cfg.forcing()?;
    let quantities = cfg.quantities(&model)?;
    let opts = cfg.pds_options()?;
    let est = timer.time("pds", || estimate(&model, &forcing, &quantities, &opts))?;
    write_estimate(&est, &cfg, &ctx.out, &mut m)?;
    let mc_cfg = cfg.montecarlo;
    let targets = targets_from_linearization(&est.lin, &quantities, &cfg.pds.frames, mc_cfg.bin_fraction)?;
    let grid = cfg.frequency_grid()?;
    let mc_opts = cfg.mc_options(ctx.seed);
    let mc = timer.time("monte_carlo", || ensemble_pdf(&model, &forcing, &grid, &targets, &mc_opts))?;
    let mut summary = CsvTable::new(&["quantity", "frame", "max_abs_log10", "mean_abs_log10", "bins", "passed"]);
    let mut records = Vec::new();
    for h in &mc.histograms {
        let pdf = est.pdf(h.quantity, h.frame)?;
        let c = compare_log10(h, &pdf, mc_cfg.min_count, 0.0);
        let passed = c.bins > 0 && c.max_abs <= mc_cfg.threshold;
        let name = format!("mc_{}_{}.csv", h.quantity, frame_name(h.frame));
        output::mc_table(h, &pdf).write(&ctx.out.join(&name))?;
        m.outputs.push(name);
        summary.row(vec![
            h.quantity.to_string(),
            frame_name(h.frame).into(),
            output::num(c.max_abs),
            output::num(c.mean_abs),
            c.bins.to_string(),
            passed.to_string(),
        ]);
        records.push(ComparisonRecord {
            quantity: h.quantity.to_string(),
            frame: frame_name(h.frame),
            max_abs_log10: c.max_abs,
            mean_abs_log10: c.mean_abs,
            bins: c.bins,
            passed,
        });
    }
    summary.write(&ctx.out.join("comparison.csv"))?;
    m.outputs.push("comparison.csv".into());
    m.extra.insert("comparison".into(), serde_json::to_value(&records).expect("records serialize"));
    m.extra.insert("realizations".into(), mc.realizations.into());
    m.extra.insert("record_length".into(), mc.record_length.into());
    m.timings = timer.0;
    m.write(&ctx.out)?;
    Ok(m)
}

fn surface_table(r: &OptimizationResult) -> CsvTable {
    let mut t = CsvTable::new(&["first", "second", "objective", "ratio"]);
    for (i, a) in r.first.iter().enumerate() {
        for (j, b) in r.second.iter().enumerate() {
            let v = r.surface[i][j];
            t.row(vec![
                output::num(*a),
                output::num(*b),
                v.map(output::num).unwrap_or_default(),
                r.ratio_at(i, j).map(output::num).unwrap_or_default(),
            ]);
        }
    }
    t
}

/// Grid search for the attachment family named in `[optimize]`.
pub fn run_optimize(ctx: &RunContext) -> Result<Manifest, CliError> {
    let cfg = prepare(ctx)?;
    let ocfg = cfg.optimize.clone().ok_or_else(|| CliError::Config("optimize needs an [optimize] table".into()))?;
    let mut m = manifest("optimize", ctx, &cfg)?;
    let mut timer = Timer(BTreeMap::new());
    let base = cfg.model()?.with_attachment(None);
    let forcing = cfg.forcing()?;
    // Surfaces need thousands of estimates; unset resolution keys use the screening preset.
    let opts = cfg.pds_options_from(RareOptions::screening())?;
    let grid = ocfg.design_grid()?;
    let mut result = match ocfg.family() {
        Some(family) => timer.time("search", || grid_search(&base, &forcing, &grid, family, ocfg.attachment_mass, &opts))?,
        None => {
            let tmd = match ocfg.reference {
                Some(r) => Attachment::tmd(ocfg.attachment_mass, r.damping, r.k),
                None => {
                    let tmd_grid = pds_core::optimize::DesignGrid::default_attachment(ocfg.objective());
                    let r = timer.time("reference_search", || {
                        grid_search(&base, &forcing, &tmd_grid, pds_core::optimize::Family::Tmd, ocfg.attachment_mass, &opts)
                    })?;
                    r.best
                }
            };
            let reference = PiecewiseReference::from_tmd(&base, &forcing, tmd, &opts)?;
            m.extra.insert("reference".into(), serde_json::to_value(reference).expect("reference serializes"));
            timer.time("search", || design_piecewise(&base, &forcing, &reference, &grid, &opts))?
        }
    };
    if ocfg.refine {
        if let Some(family) = ocfg.family() {
            result = timer.time("refine", || refine(&base, &forcing, &result, &grid, family, ocfg.attachment_mass, &opts))?;
        }
    }
    surface_table(&result).write(&ctx.out.join("surface.csv"))?;
    m.outputs.push("surface.csv".into());
    m.gamma = Some(result.ratio);
    let (a, b) = result.best_params();
    m.extra.insert("argmin".into(), serde_json::json!({ "first": a, "second": b }));
    m.extra.insert("best".into(), serde_json::to_value(result.best).expect("attachment serializes"));
    m.extra.insert("baseline".into(), result.baseline.into());
    m.extra.insert("family".into(), serde_json::to_value(ocfg.family).expect("family serializes"));
    if ocfg.family == DesignFamily::Piecewise {
        m.extra.insert("gamma_kind".into(), "relative_to_tmd".into());
    }
    m.timings = timer.0;
    m.write(&ctx.out)?;
    Ok(m)
}
