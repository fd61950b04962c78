//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use riesz_one_core::affinity::{affinity_hellinger, affinity_to_uniform};
use riesz_one_core::circlepoly::DEFAULT_COMBINATORIAL_CAP;
use riesz_one_core::construction::{MeasureTrendConfig, PRESET_NAMES};
use riesz_one_core::diagnostics::{build_report, stage_mahler, DichotomyConfig};
use riesz_one_core::{
    GridOffset, MahlerEngine, RankOneConstruction, ReportConfig, SparseCirclePolynomial, UnitCircleGrid,
};
use serde::Serialize;

use crate::cache::{density_cached, DensityCache};
use crate::config::{load_construction, load_report_config, parse_params, parse_range, parse_u128_list};
use crate::error::{AppError, AppResult};
use crate::io::{to_json_string, write_atomic, write_atomic_with, write_json};
use crate::parallel::{bourgain_study, oracle_check, with_threads};
use crate::csv_out;

#[derive(Debug, Parser)]
#[command(name = "riesz-one", version, about = "Spectral diagnostics for rank-one constructions")]
pub struct Cli {
    /// Worker threads for data-parallel steps (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in construction presets.
    Presets,
    /// Validate a construction and print heights and total measure.
    Describe {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 8)]
        stages: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Partial Riesz product density as `theta,value` CSV.
    Density {
        #[command(flatten)]
        source: SourceArgs,
        /// Product over stages `from..stages`.
        #[arg(long)]
        stages: usize,
        #[arg(long, default_value_t = 0)]
        from: usize,
        /// Grid size; default is the smallest exact power of two.
        #[arg(long)]
        grid: Option<usize>,
        /// Use the grid `e^{2πi j/N}` instead of the half-step grid.
        #[arg(long)]
        aligned: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare Mahler measure engines on one polynomial.
    Mahler {
        /// Exponents of `m^{-1/2} Σ z^e`, e.g. `0,1,3`.
        #[arg(long, conflicts_with_all = ["preset", "config"])]
        poly: Option<String>,
        #[command(flatten)]
        source: SourceArgs,
        /// Stage polynomial of the construction to measure.
        #[arg(long, default_value_t = 0)]
        stage: usize,
        #[arg(long, value_delimiter = ',', default_value = "grid,jensen,szego,kolmogorov-lower")]
        engines: Vec<MahlerEngine>,
        #[arg(long, default_value_t = 1 << 16)]
        grid: usize,
        #[arg(long, default_value_t = 512)]
        szego_order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Affinity and Hellinger distance of two partial products (or one
    /// against Lebesgue measure).
    Affinity {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        other_preset: Option<String>,
        #[arg(long = "other-param", value_name = "KEY=VALUE")]
        other_params: Vec<String>,
        #[arg(long, default_value_t = 0)]
        other_seed: u64,
        #[arg(long, conflicts_with = "other_preset")]
        other_config: Option<PathBuf>,
        #[arg(long)]
        stages: usize,
        #[arg(long, default_value_t = 1 << 16)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full spectral report as JSON.
    Diagnose {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        report_config: Option<PathBuf>,
        #[arg(long)]
        stages: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        engine: Option<MahlerEngine>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one CSV per report section here.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
    /// Occurrence-set autocorrelation against DFT coefficients.
    OracleCheck {
        #[command(flatten)]
        source: SourceArgs,
        /// Ambient stage `M`.
        #[arg(long)]
        stages: usize,
        /// Base stage `K₀`.
        #[arg(long, default_value_t = 0)]
        base: usize,
        #[arg(long, default_value = "0..121", allow_hyphen_values = true)]
        lags: String,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gap study on random sparse exponent sets.
    Bourgain {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        sets: usize,
        #[arg(long, default_value_t = 2)]
        min_terms: usize,
        #[arg(long, default_value_t = 256)]
        max_terms: usize,
        /// Exponents are drawn from `[0, span·n)`.
        #[arg(long, default_value_t = 4)]
        span: u128,
        #[arg(long, default_value_t = 256)]
        min_grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Preset parameter, e.g. `m=3`, `spacers=0,1,0`.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Construction JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub stage_cap: Option<usize>,
    #[arg(long)]
    pub combinatorial_cap: Option<u128>,
}

impl SourceArgs {
    pub fn construction(&self) -> AppResult<RankOneConstruction> {
        let c = load_source(self.preset.as_deref(), &self.params, self.seed, self.config.as_deref())?
            .ok_or_else(|| AppError::Usage("one of --preset or --config is required".into()))?;
        Ok(match self.stage_cap {
            Some(cap) => c.with_stage_cap(cap),
            None => c,
        })
    }

    fn cap(&self) -> u128 {
        self.combinatorial_cap.unwrap_or(DEFAULT_COMBINATORIAL_CAP)
    }
}

fn load_source(
    preset: Option<&str>,
    params: &[String],
    seed: u64,
    config: Option<&Path>,
) -> AppResult<Option<RankOneConstruction>> {
    match (preset, config) {
        (Some(name), None) => Ok(Some(RankOneConstruction::preset(name, parse_params(params)?, seed)?)),
        (None, Some(path)) => {
            if !params.is_empty() {
                return Err(AppError::Usage("--param only applies to --preset".into()));
            }
            load_construction(path).map(Some)
        }
        (None, None) => Ok(None),
        (Some(_), Some(_)) => Err(AppError::Usage("--preset and --config are exclusive".into())),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Errors go to stderr as one JSON line.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = cli.threads;
    match with_threads(threads, || dispatch(cli.command)).and_then(|r| r) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

/// Writes `text` to `out`, or to stdout without one.
fn emit(out: Option<&Path>, text: &str) -> AppResult<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| AppError::io("<stdout>", e))
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> AppResult<()> {
    match out {
        Some(path) => write_json(path, value),
        None => emit(None, &format!("{}\n", to_json_string(value)?)),
    }
}

fn emit_csv(out: Option<&Path>, fill: impl FnOnce(&mut dyn Write) -> AppResult<()>) -> AppResult<()> {
    match out {
        Some(path) => write_atomic_with(path, fill),
        None => {
            let mut buf = Vec::new();
            fill(&mut buf)?;
            emit(None, &String::from_utf8(buf).expect("csv output is utf-8"))
        }
    }
}

fn exact_grid_for(c: &RankOneConstruction, from: usize, to: usize, min_n: usize) -> AppResult<UnitCircleGrid> {
    let h = c.heights_strict(to)?;
    let span = h.heights[to] - h.heights[from.min(to)];
    Ok(UnitCircleGrid::exact_for(span, min_n)?)
}

#[derive(Serialize)]
struct Description {
    name: String,
    generator: Option<riesz_one_core::GeneratorSpec>,
    stages: usize,
    cut_counts: Vec<u64>,
    heights: Vec<u128>,
    overflow: bool,
    total_measure: riesz_one_core::TotalMeasure,
}

#[derive(Serialize)]
struct MahlerRow {
    engine: MahlerEngine,
    value: Option<f64>,
    error: Option<String>,
}

fn dispatch(command: Command) -> AppResult<()> {
    match command {
        Command::Presets => {
            let mut text = String::new();
            for name in PRESET_NAMES {
                text.push_str(name);
                text.push('\n');
            }
            emit(None, &text)
        }
        Command::Describe { source, stages, out } => {
            let c = source.construction()?;
            let heights = c.heights(stages.min(c.available_stages()))?;
            let count = heights.heights.len() - 1;
            let description = Description {
                name: c.name.clone(),
                generator: c.generator.clone(),
                stages: count,
                cut_counts: c.cut_counts(count)?,
                total_measure: c.total_measure(count, &MeasureTrendConfig::default())?,
                overflow: heights.overflow,
                heights: heights.heights,
            };
            emit_json(out.as_deref(), &description)
        }
        Command::Density {
            source,
            stages,
            from,
            grid,
            aligned,
            out,
        } => {
            let c = source.construction()?;
            if from > stages {
                return Err(AppError::Usage(format!("--from {from} exceeds --stages {stages}")));
            }
            let offset = if aligned { GridOffset::Aligned } else { GridOffset::HalfStep };
            let n = match grid {
                Some(n) => n,
                None => exact_grid_for(&c, from, stages, 64)?.len(),
            };
            let grid = UnitCircleGrid::new(n, offset)?;
            let ks: Vec<usize> = (from..stages).collect();
            let density = density_cached(DensityCache::from_env().as_ref(), &c, &ks, grid)?;
            emit_csv(out.as_deref(), |w| csv_out::density_csv(w, &density))
        }
        Command::Mahler {
            poly,
            source,
            stage,
            engines,
            grid,
            szego_order,
            out,
        } => {
            let poly = match poly {
                Some(text) => SparseCirclePolynomial::new(parse_u128_list(&text)?)?,
                None => riesz_one_core::circlepoly::stage_polynomial(&source.construction()?, stage)?,
            };
            let grid = UnitCircleGrid::half_step(grid)?;
            let cfg = DichotomyConfig {
                szego_order,
                ..DichotomyConfig::default()
            };
            let rows: Vec<MahlerRow> = engines
                .iter()
                .map(|&engine| match stage_mahler(&poly, engine, grid, &cfg) {
                    Ok(v) => MahlerRow {
                        engine,
                        value: Some(v),
                        error: None,
                    },
                    Err(e) => MahlerRow {
                        engine,
                        value: None,
                        error: Some(e.to_string()),
                    },
                })
                .collect();
            match out {
                Some(path) => write_atomic_with(&path, |w| {
                    let mut csv = csv::Writer::from_writer(w);
                    csv.write_record(["engine", "value", "error"])?;
                    for r in &rows {
                        csv.write_record([
                            r.engine.to_string(),
                            r.value.map_or(String::new(), |v| v.to_string()),
                            r.error.clone().unwrap_or_default(),
                        ])?;
                    }
                    csv.flush().map_err(|e| AppError::io(&path, e))
                })?,
                None => {
                    let mut text = format!("{:<18} {}\n", "engine", "M(P)");
                    for r in &rows {
                        let value = match (&r.value, &r.error) {
                            (Some(v), _) => format!("{v:.10}"),
                            (None, Some(e)) => format!("error: {e}"),
                            (None, None) => String::new(),
                        };
                        text.push_str(&format!("{:<18} {}\n", r.engine.as_str(), value));
                    }
                    emit(None, &text)?;
                }
            }
            if rows.iter().all(|r| r.value.is_none()) {
                return Err(AppError::CheckFailed("every engine failed".into()));
            }
            Ok(())
        }
        Command::Affinity {
            source,
            other_preset,
            other_params,
            other_seed,
            other_config,
            stages,
            grid,
            out,
        } => {
            let c = source.construction()?;
            let grid = UnitCircleGrid::half_step(grid)?;
            let cache = DensityCache::from_env();
            let ks: Vec<usize> = (0..stages).collect();
            let f = density_cached(cache.as_ref(), &c, &ks, grid)?;
            let result = match load_source(other_preset.as_deref(), &other_params, other_seed, other_config.as_deref())? {
                Some(other) => {
                    let g = density_cached(cache.as_ref(), &other, &ks, grid)?;
                    affinity_hellinger(&f, &g)?
                }
                None => affinity_to_uniform(&f),
            };
            emit_json(out.as_deref(), &result)
        }
        Command::Diagnose {
            source,
            report_config,
            stages,
            grid,
            engine,
            out,
            csv_dir,
        } => {
            let c = source.construction()?;
            let mut cfg = match report_config {
                Some(path) => load_report_config(&path)?,
                None => ReportConfig::default(),
            };
            if let Some(k) = stages {
                cfg.stages = k;
            }
            if let Some(n) = grid {
                cfg.grid_n = n;
            }
            if let Some(e) = engine {
                cfg.engine = e;
            }
            if let Some(cap) = source.combinatorial_cap {
                cfg.combinatorial_cap = cap;
            }
            let report = build_report(&c, &cfg)?;
            if let Some(dir) = csv_dir {
                std::fs::create_dir_all(&dir).map_err(|e| AppError::io(&dir, e))?;
                for (name, bytes) in csv_out::report_tables(&report)? {
                    write_atomic(&dir.join(name), &bytes)?;
                }
            }
            emit_json(out.as_deref(), &report)
        }
        Command::OracleCheck {
            source,
            stages,
            base,
            lags,
            grid,
            tol,
            out,
        } => {
            let c = source.construction()?;
            let lags = parse_range(&lags)?;
            let grid = match grid {
                Some(n) => UnitCircleGrid::half_step(n)?,
                None => {
                    let widest = lags.start.unsigned_abs().max(lags.end.unsigned_abs()) as usize;
                    exact_grid_for(&c, base, stages, 2 * widest + 2)?
                }
            };
            let check = oracle_check(&c, base, stages, grid, lags, source.cap())?;
            if let Some(path) = out {
                write_atomic_with(&path, |w| {
                    let mut csv = csv::Writer::from_writer(w);
                    csv.write_record(["n", "autocorrelation", "fourier", "deviation"])?;
                    for r in &check.rows {
                        csv.write_record([
                            r.lag.to_string(),
                            r.autocorrelation.to_string(),
                            r.fourier.to_string(),
                            r.deviation.to_string(),
                        ])?;
                    }
                    csv.flush().map_err(|e| AppError::io(&path, e))
                })?;
            }
            emit(
                None,
                &format!(
                    "lags {} grid {} max_abs_deviation {:e}\n",
                    check.rows.len(),
                    check.grid_n,
                    check.max_abs_deviation
                ),
            )?;
            if check.max_abs_deviation > tol {
                return Err(AppError::CheckFailed(format!(
                    "max deviation {:e} exceeds {tol:e}",
                    check.max_abs_deviation
                )));
            }
            Ok(())
        }
        Command::Bourgain {
            seed,
            sets,
            min_terms,
            max_terms,
            span,
            min_grid,
            out,
        } => {
            if max_terms < min_terms {
                return Err(AppError::Usage("--max-terms is below --min-terms".into()));
            }
            let study = bourgain_study(seed, sets, min_terms..max_terms + 1, span, min_grid)?;
            if let Some(path) = &out {
                write_atomic_with(path, |w| csv_out::bourgain_csv(w, &study.gaps))?;
            }
            emit(
                None,
                &format!(
                    "sets {} seed {} min_gap {} all_strict {}\n",
                    study.gaps.len(),
                    study.seed,
                    study.min_gap,
                    study.all_strict
                ),
            )?;
            if !study.all_strict {
                return Err(AppError::CheckFailed("a set reached l1 >= 1".into()));
            }
            Ok(())
        }
    }
}
