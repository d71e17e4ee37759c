//! Experiment driver: runs the construction and verification pipelines and
//! writes canonical JSON reports and CSV tables.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod config;

use std::path::{Path, PathBuf};

use lpframes::construction::{block_plan_entries, choose_block_sizes};
use lpframes::diagnostics::{
    orlicz_sums, projection_check, restriction_tail_entry, restriction_tail_profile, synthesis_norm_estimate,
    translate_frame_scenario_check, ExponentTag, DEFAULT_INFLATION,
};
use lpframes::haar::unconditional_constant_estimate;
use lpframes::report::num;
use lpframes::separation::min_distance_of;
use lpframes::{
    construct_frame, frame_constants, haar_system, make_indicator, partition_uniformly_separated,
    promote_to_schauder_frame, refine, ConstructionConfig, Error, FramePair, GridSpec, PointFamily, Provenance,
    Report, ReportEntry, SweepMode,
};
use serde_json::{json, Value};

pub use config::ExperimentConfig;

/// Tolerance of the projection identities.
pub const PROJECTION_TOL: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Construct,
    Verify,
    Partition,
    Constants,
    Compactness,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Construct => "construct",
            Command::Verify => "verify",
            Command::Partition => "partition",
            Command::Constants => "constants",
            Command::Compactness => "compactness",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    /// Named CSV tables.
    pub csv: Vec<(String, String)>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.all_passed() {
            0
        } else {
            1
        }
    }
}

/// Parameter errors from the library are configuration mistakes; anything
/// else ends the pipeline with a partial report.
fn classify(report: &mut Report, e: Error) -> Result<(), CliError> {
    match e {
        Error::Parameter(m) => Err(CliError::Usage(m)),
        other => {
            report.error = Some(other.to_string());
            Ok(())
        }
    }
}

macro_rules! stage {
    ($report:ident, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => {
                classify($report, err)?;
                return Ok(());
            }
        }
    };
}

pub fn run(command: Command, config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let cfg = config.resolved();
    cfg.validate()?;
    let echo = serde_json::to_value(&cfg).expect("config serializes");
    let mut report = Report::new(command.name(), echo);
    let mut csv = Vec::new();
    match command {
        Command::Construct => construct(&cfg, &mut report)?,
        Command::Verify => verify(&cfg, &mut report)?,
        Command::Partition => partition(&cfg, &mut report)?,
        Command::Constants => constants(&cfg, &mut report)?,
        Command::Compactness => compactness(&cfg, &mut report, &mut csv)?,
    }
    Ok(Outcome { report, csv })
}

fn construct(cfg: &ExperimentConfig, report: &mut Report) -> Result<(), CliError> {
    let p = cfg.p();
    if !(p > 2.0) {
        return Err(CliError::Usage(format!("construct needs p > 2, got {p}")));
    }
    let ku_bound = cfg.ku_bound.expect("validated");
    let ccfg = ConstructionConfig {
        p,
        dim: cfg.d(),
        levels: cfg.levels(),
        mode: cfg.mode(),
        ku_bound,
        lambda: cfg.lambda_source()?,
        level: cfg.level()?,
        half_width: cfg.box_half_width,
        seed: cfg.seed(),
        tol: cfg.tol(),
        draws: cfg.draws(),
        samples: cfg.samples(),
        sign_trials: cfg.trials(),
        ..ConstructionConfig::demo(p, cfg.levels())
    };
    let plan = stage!(report, choose_block_sizes(p, ku_bound, ccfg.levels, ccfg.mode));
    report.tables.insert("block_sizes".into(), json!(plan.sizes));
    let out = match construct_frame(&ccfg) {
        Ok(out) => out,
        Err(e) => {
            report.extend(block_plan_entries(&plan));
            return classify(report, e);
        }
    };
    report.extend(out.entries.iter().cloned());
    let prov = ccfg.mode.provenance();

    let m0 = stage!(report, synthesis_norm_estimate(&out.approximate, ExponentTag::Two, cfg.draws(), cfg.seed()));
    report.push(ReportEntry::check_le("synthesis_l2_estimate", m0, 1.0 + out.phi2.upper, prov));
    let scenario = stage!(
        report,
        translate_frame_scenario_check(&out.approximate, cfg.r_lower(), 100, cfg.seed(), PROJECTION_TOL)
    );
    report.extend(scenario.into_iter().map(|mut e| {
        e.provenance = prov;
        e
    }));

    let c = &out.constructed;
    report.tables.insert("ladder".into(), json!(c.ladder.indices()));
    report.tables.insert("blocks".into(), json!(c.ladder.blocks()));
    report.tables.insert(
        "grid".into(),
        json!({"level": c.spec.level, "lo": c.spec.bounds.lo, "hi": c.spec.bounds.hi}),
    );
    report.tables.insert("orlicz".into(), orlicz_table(&out.approximate));
    report.tables.insert(
        "frame".into(),
        json!({
            "k": num(out.constants.k),
            "k_u": num(out.constants.k_u),
            "k1": num(out.seminormalized.auxiliary.k1),
            "delta0": num(out.seminormalized.auxiliary.delta0),
            "t_norm": num(out.seminormalized.t_norm),
            "phi2_truncated": [num(out.phi2.lower), num(out.phi2.upper)],
        }),
    );
    Ok(())
}

fn orlicz_table(frame: &FramePair) -> Value {
    let s = orlicz_sums(frame);
    json!({
        "s": num(s.s),
        "q": num(s.q),
        "functions": s.functions.iter().copied().map(num).collect::<Vec<_>>(),
        "functionals": s.functionals.iter().copied().map(num).collect::<Vec<_>>(),
    })
}

/// The frame bundle from `--frame`, or the Haar basis of `--count` elements.
fn load_frame(cfg: &ExperimentConfig) -> Result<(FramePair, Option<lpframes::BasisSystem>), CliError> {
    if let Some(path) = &cfg.frame {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut frame: FramePair =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if cfg.p.is_some() {
            frame.exponents = lpframes::Exponents::new(cfg.p()).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        return Ok((frame, None));
    }
    let n = cfg.count();
    let d = cfg.d();
    let c = lpframes::haar::reference_side_exponent(d);
    let mut depth = 0;
    while (1usize << (depth * d)) < n {
        depth += 1;
    }
    let level = cfg.level()?.unwrap_or(c + depth as i32);
    let spec = GridSpec::centered(d, level, cfg.box_half_width.unwrap_or(2.0)).map_err(|e| CliError::Usage(e.to_string()))?;
    let system = haar_system(&spec, cfg.p(), n).map_err(|e| CliError::Usage(e.to_string()))?;
    let frame = FramePair::new(cfg.p(), system.functions(), system.duals()).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((frame, Some(system)))
}

fn verify(cfg: &ExperimentConfig, report: &mut Report) -> Result<(), CliError> {
    let (frame, _) = load_frame(cfg)?;
    let promoted = stage!(report, promote_to_schauder_frame(&frame, cfg.tol()));
    report.push(
        ReportEntry::check_le("reconstruction", promoted.max_residual, cfg.tol(), Provenance::Strict)
            .with_detail("core_dim", json!(promoted.span.dim_core())),
    );
    let mode = SweepMode::auto(frame.len(), 14, cfg.trials());
    let k = stage!(report, frame_constants(&promoted.frame, mode, cfg.seed()));
    report.push(constants_entry(&k));
    let proj = stage!(report, projection_check(&frame, 100, cfg.seed(), PROJECTION_TOL));
    report.push(proj);
    let scenario = stage!(report, translate_frame_scenario_check(&frame, cfg.r_lower(), 100, cfg.seed(), PROJECTION_TOL));
    report.extend(scenario.into_iter().filter(|e| e.name != "projection"));
    report.tables.insert("orlicz".into(), orlicz_table(&frame));
    Ok(())
}

fn constants_entry(k: &lpframes::FrameConstants) -> ReportEntry {
    ReportEntry::check("unconditional_constant", k.k_u.is_finite() && k.k <= k.k_u, k.k_u, Provenance::Strict)
        .with_detail("k", num(k.k))
        .with_detail("mode", json!(k.mode.name()))
        .with_detail("sign_vectors", json!(k.sign_vectors))
        .with_detail("k_witness", json!(k.k_witness))
}

fn constants(cfg: &ExperimentConfig, report: &mut Report) -> Result<(), CliError> {
    let (frame, system) = load_frame(cfg)?;
    let mode = SweepMode::auto(frame.len(), 14, cfg.trials());
    let k = stage!(report, frame_constants(&frame, mode, cfg.seed()));
    report.push(ReportEntry::info("frame_constant", k.k, Provenance::Strict));
    report.push(constants_entry(&k));
    if let Some(system) = system {
        let est = stage!(report, unconditional_constant_estimate(&system, mode, cfg.seed()));
        let entry = match system.ku_upper {
            Some(upper) => ReportEntry::check_le("basis_unconditional", est, upper, Provenance::Strict),
            None => ReportEntry::info("basis_unconditional", est, Provenance::Strict),
        };
        report.push(entry.with_detail("lower", num(system.ku_lower)));
    }
    Ok(())
}

fn partition(cfg: &ExperimentConfig, report: &mut Report) -> Result<(), CliError> {
    let t = cfg.t.ok_or_else(|| CliError::Usage("partition needs --t".into()))?;
    let path = cfg.points.as_ref().ok_or_else(|| CliError::Usage("partition needs --points".into()))?;
    let family = PointFamily::new(config::read_points(path)?).map_err(|e| CliError::Usage(e.to_string()))?;
    let part = stage!(report, partition_uniformly_separated(&family, t));
    let min = part
        .classes
        .iter()
        .map(|c| min_distance_of(&family, c))
        .fold(f64::INFINITY, f64::min);
    report.push(ReportEntry::check_ge("separation", min, t, Provenance::Strict).with_detail("valid", json!(part.is_valid_for(&family))));
    report.push(ReportEntry::info("classes", part.classes.len() as f64, Provenance::Strict));
    let fine = stage!(report, refine(&family, &part, 2.0 * t));
    let nested = fine
        .classes
        .iter()
        .all(|c| part.classes.iter().any(|coarse| c.iter().all(|i| coarse.contains(i))));
    report.push(ReportEntry::check(
        "refinement",
        nested && fine.is_valid_for(&family),
        fine.classes.len() as f64,
        Provenance::Strict,
    ));
    report.tables.insert("classes".into(), json!(part.classes));
    report.tables.insert("refined_classes".into(), json!(fine.classes));
    Ok(())
}

fn compactness(cfg: &ExperimentConfig, report: &mut Report, csv: &mut Vec<(String, String)>) -> Result<(), CliError> {
    let d = cfg.d();
    let n = cfg.count();
    let points: Vec<Vec<f64>> = cfg.lambda_source()?.take(n);
    if points.len() < n {
        return Err(CliError::Usage(format!("λ source has {} points, {n} requested", points.len())));
    }
    let width = cfg.width();
    let reach = points
        .iter()
        .flat_map(|x| x.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()))
        + width
        + 2.0;
    let [lo, hi] = cfg.region();
    let half = cfg.box_half_width.unwrap_or(0.0).max(reach.max(lo.abs()).max(hi.abs()).ceil());
    let spec = stage!(report, GridSpec::centered(d, cfg.level()?.unwrap_or(0), half));
    let unit = |x: &[f64], w: f64| {
        let upper: Vec<f64> = x.iter().enumerate().map(|(k, v)| v + if k == 0 { w } else { 1.0 }).collect();
        make_indicator(&spec, x, &upper, 1.0)
    };
    let mut fs = Vec::with_capacity(n);
    let mut fps = Vec::with_capacity(n);
    for x in &points {
        let (shift, _) = stage!(report, spec.snap(x));
        let snapped = spec.shift_to_point(&shift);
        fs.push(stage!(report, unit(&snapped, width)));
        fps.push(stage!(report, unit(&snapped, 1.0)));
    }
    let frame = stage!(report, FramePair::new(cfg.p(), fs, fps));
    let region = stage!(report, spec.lattice_box(&vec![lo; d], &vec![hi; d]));
    let profile = stage!(
        report,
        restriction_tail_profile(&frame, &region, cfg.samples(), cfg.seed(), DEFAULT_INFLATION)
    );
    report.push(restriction_tail_entry(&profile));
    let vanish = profile.rows.iter().position(|r| r.t_n == 0.0).map_or(f64::INFINITY, |i| i as f64);
    report.push(ReportEntry::info("tail_vanishes_at", vanish, Provenance::Strict));
    report.tables.insert(
        "tails".into(),
        json!(profile
            .rows
            .iter()
            .map(|r| json!({"n": r.n, "t_n": num(r.t_n), "bound": num(r.bound), "measured": num(r.measured)}))
            .collect::<Vec<_>>()),
    );
    csv.push(("tails".into(), profile.to_csv()));
    Ok(())
}

/// Writes the report to `out` (stdout when absent) and the CSV tables to `csv`.
/// Several tables go to `csv` with the table name inserted before the extension.
pub fn emit(outcome: &Outcome, out: Option<&Path>, csv: Option<&Path>) -> Result<(), CliError> {
    let text = outcome.report.to_canonical_json();
    match out {
        Some(path) => std::fs::write(path, &text).map_err(|e| CliError::io(path, e))?,
        None => print!("{text}"),
    }
    if let Some(path) = csv {
        let single = outcome.csv.len() == 1;
        for (name, table) in &outcome.csv {
            let target = if single {
                path.to_path_buf()
            } else {
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
                path.with_file_name(format!("{stem}.{name}.csv"))
            };
            std::fs::write(&target, table).map_err(|e| CliError::io(&target, e))?;
        }
    }
    Ok(())
}

/// One line per entry, for the terminal.
pub fn summary(report: &Report) -> String {
    let mut s = String::new();
    for e in &report.entries {
        let status = match e.status {
            lpframes::Status::Pass => "pass",
            lpframes::Status::Fail => "FAIL",
            lpframes::Status::Info => "info",
        };
        let bound = e.bound.map_or(String::new(), |b| format!(" (bound {b:.6e})"));
        s.push_str(&format!("{status:4} {:28} {:.6e}{bound}\n", e.name, e.measured));
    }
    if let Some(err) = &report.error {
        s.push_str(&format!("error: {err}\n"));
    }
    s
}
