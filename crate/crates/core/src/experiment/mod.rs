//! Experiment harness: replicated runs on disk, aggregation, GE map
//! projection and tree export.
//!
//! A run directory holds
//!
//! ```text
//! config.snapshot   full config of this replicate (runs = 1, its own seed)
//! trend.csv         best fitness per checkpoint
//! archive.csv       ME archive, or the projected GE map
//! coverage.csv      ME only
//! population.csv    GE only, final population best first
//! evals.csv         every evaluation, with --log-all-evals
//! meta.txt          wall-clock time
//! ```
//!
//! Everything except meta.txt is a pure function of the snapshot.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::eval::Descriptor;
use crate::evo::{run_ge, run_map_elites, Archive, CoveragePoint, Individual, TrendPoint};
use crate::{Error, Result};

pub mod config;
pub mod records;

pub use config::{parse_entries, Algorithm, Entry, ExperimentConfig};
use records::{ArchiveRow, EvalLog, MapCell, TrendSummaryRow};

pub const SNAPSHOT: &str = "config.snapshot";
pub const TREND: &str = "trend.csv";
pub const ARCHIVE: &str = "archive.csv";
pub const COVERAGE: &str = "coverage.csv";
pub const POPULATION: &str = "population.csv";
pub const EVALS: &str = "evals.csv";
pub const META: &str = "meta.txt";
pub const AVERAGE_MAP: &str = "average_map.csv";
pub const MAX_MAP: &str = "max_map.csv";
pub const TREND_SUMMARY: &str = "trend_summary.csv";

/// Summary of one finished replicate.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub index: usize,
    pub seed: u64,
    pub dir: PathBuf,
    pub trend: Vec<TrendPoint>,
    /// Empty for GE.
    pub coverage: Vec<CoveragePoint>,
    /// `None` for GE.
    pub archive: Option<Archive>,
    pub best_fitness: Option<f64>,
    pub evaluations: u64,
    pub elapsed: Duration,
}

/// Loads `dir/config.snapshot`.
pub fn load_snapshot(dir: &Path) -> Result<ExperimentConfig> {
    let path = dir.join(SNAPSHOT);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let entries = parse_entries(&text, &path.display().to_string())?;
    ExperimentConfig::from_entries(&entries, &[])
}

/// Loads an optional config file with CLI overrides on top.
pub fn load_config(file: Option<&Path>, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    let entries = match file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_entries(&text, &path.display().to_string())?
        }
        None => Vec::new(),
    };
    ExperimentConfig::from_entries(&entries, overrides)
}

/// Runs every replicate of `config` into `config.out/run_{r}`.
///
/// The config is validated before anything is written, and each run
/// directory appears only once complete.
pub fn run_experiment(config: &ExperimentConfig, mut progress: impl FnMut(&RunRecord)) -> Result<Vec<RunRecord>> {
    config.validate()?;
    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    let mut records = Vec::with_capacity(config.n_runs);
    for r in 0..config.n_runs {
        let record = run_replicate(config, r)?;
        progress(&record);
        records.push(record);
    }
    Ok(records)
}

/// Config of replicate `r`: the master seed offset by `r`, one run.
pub fn replicate_config(config: &ExperimentConfig, r: usize) -> ExperimentConfig {
    ExperimentConfig { seed: config.seed.wrapping_add(r as u64), n_runs: 1, ..config.clone() }
}

fn run_replicate(config: &ExperimentConfig, r: usize) -> Result<RunRecord> {
    let rc = replicate_config(config, r);
    let dir = config.out.join(format!("run_{r}"));
    let partial = config.out.join(format!(".run_{r}.partial"));
    if partial.exists() {
        fs::remove_dir_all(&partial).map_err(|e| Error::io(&partial, e))?;
    }
    fs::create_dir(&partial).map_err(|e| Error::io(&partial, e))?;
    let result = write_replicate(&rc, r, &partial);
    let mut record = match result {
        Ok(record) => record,
        Err(e) => {
            let _ = fs::remove_dir_all(&partial);
            return Err(e);
        }
    };
    if dir.exists() {
        if !dir.join(SNAPSHOT).is_file() {
            return Err(Error::record(&dir, "exists and is not a run directory; refusing to replace it"));
        }
        fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    fs::rename(&partial, &dir).map_err(|e| Error::io(&dir, e))?;
    record.dir = dir;
    Ok(record)
}

fn write_replicate(rc: &ExperimentConfig, index: usize, dir: &Path) -> Result<RunRecord> {
    write_text(&dir.join(SNAPSHOT), &rc.to_text())?;
    let evaluator = rc.evaluator();
    let evals_path = dir.join(EVALS);
    let mut log =
        if rc.log_all_evals { Some(EvalLog::new(BufWriter::new(records::create(&evals_path)?))?) } else { None };
    let mut log_error: Option<Error> = None;
    let mut observe = |ind: &Individual| {
        if let (Some(log), None) = (log.as_mut(), &log_error) {
            if let Err(e) = log.push(ind) {
                log_error = Some(e);
            }
        }
    };

    let started = Instant::now();
    let mut record = match rc.algorithm {
        Algorithm::Me => {
            let out = run_map_elites(&rc.me, &evaluator, rc.seed, &mut observe)?;
            write_csv(&dir.join(TREND), |w| records::write_trend(w, &out.trend))?;
            write_csv(&dir.join(COVERAGE), |w| records::write_coverage(w, &out.coverage))?;
            write_csv(&dir.join(ARCHIVE), |w| records::write_archive(w, &out.archive))?;
            RunRecord {
                index,
                seed: rc.seed,
                dir: dir.to_path_buf(),
                best_fitness: out.archive.best().map(|(_, e)| e.fitness),
                trend: out.trend,
                coverage: out.coverage,
                archive: Some(out.archive),
                evaluations: out.evaluations,
                elapsed: Duration::ZERO,
            }
        }
        Algorithm::Ge => {
            let out = run_ge(&rc.ge, &evaluator, rc.seed, &mut observe)?;
            write_csv(&dir.join(TREND), |w| records::write_trend(w, &out.trend))?;
            write_csv(&dir.join(POPULATION), |w| records::write_population(w, &out.population))?;
            RunRecord {
                index,
                seed: rc.seed,
                dir: dir.to_path_buf(),
                best_fitness: Some(out.best.fitness),
                trend: out.trend,
                coverage: Vec::new(),
                archive: None,
                evaluations: out.evaluations,
                elapsed: Duration::ZERO,
            }
        }
    };
    if let Some(e) = log_error {
        return Err(e);
    }
    if let Some(log) = log {
        log.finish()?;
    }
    record.elapsed = started.elapsed();
    write_text(
        &dir.join(META),
        &format!("wall_clock_seconds = {:.3}\nevaluations = {}\n", record.elapsed.as_secs_f64(), record.evaluations),
    )?;
    Ok(record)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_csv(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(records::create(path)?);
    f(&mut w)
}

/// Writes via a sibling temp file so readers never see half a file.
fn write_csv_atomic(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let res = write_csv(&tmp, f);
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Accepts run directories or experiment directories holding `run_*`.
pub fn expand_run_dirs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.join(SNAPSHOT).is_file() {
            out.push(input.clone());
            continue;
        }
        let entries = fs::read_dir(input).map_err(|e| Error::io(input, e))?;
        let mut runs: Vec<(usize, PathBuf)> = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(input, e))?;
            let name = entry.file_name();
            let Some(n) = name.to_str().and_then(|n| n.strip_prefix("run_")).and_then(|n| n.parse().ok()) else {
                continue;
            };
            if entry.path().join(SNAPSHOT).is_file() {
                runs.push((n, entry.path()));
            }
        }
        if runs.is_empty() {
            return Err(Error::record(input, "no run directories found"));
        }
        runs.sort();
        out.extend(runs.into_iter().map(|(_, p)| p));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct AggregateSummary {
    pub runs: Vec<PathBuf>,
    /// False when some run has no archive.csv (GE without projection).
    pub maps_written: bool,
    pub trend: Vec<TrendSummaryRow>,
    pub average_map: Vec<MapCell>,
    pub max_map: Vec<MapCell>,
}

/// Averages replicates of one experiment into `out`.
pub fn aggregate(inputs: &[PathBuf], out: &Path) -> Result<AggregateSummary> {
    let runs = expand_run_dirs(inputs)?;
    let configs = runs.iter().map(|d| load_snapshot(d)).collect::<Result<Vec<_>>>()?;
    let reference = &configs[0];
    for (dir, c) in runs.iter().zip(&configs).skip(1) {
        if c.experiment_text() != reference.experiment_text() {
            return Err(Error::Config(format!(
                "{} and {} come from different configurations",
                runs[0].display(),
                dir.display()
            )));
        }
    }

    let mut trends = Vec::with_capacity(runs.len());
    for dir in &runs {
        let path = dir.join(TREND);
        trends.push(records::read_trend(records::open(&path)?, &path)?);
    }
    let trend = summarize_trends(&trends, &runs)?;

    let grid = reference.grid();
    let mut archives = Vec::new();
    for dir in &runs {
        let path = dir.join(ARCHIVE);
        if !path.is_file() {
            archives.clear();
            break;
        }
        let rows = records::read_archive(records::open(&path)?, &grid, reference.ge.max_value, &path)?;
        archives.push(rows);
    }
    let maps_written = archives.len() == runs.len();
    let (average_map, max_map) = if maps_written { combine_maps(&archives, grid.bins) } else { (vec![], vec![]) };

    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_csv_atomic(&out.join(TREND_SUMMARY), |w| records::write_trend_summary(w, &trend))?;
    if maps_written {
        write_csv_atomic(&out.join(AVERAGE_MAP), |w| records::write_map(w, &average_map))?;
        write_csv_atomic(&out.join(MAX_MAP), |w| records::write_map(w, &max_map))?;
    }
    Ok(AggregateSummary { runs, maps_written, trend, average_map, max_map })
}

fn summarize_trends(trends: &[Vec<TrendPoint>], runs: &[PathBuf]) -> Result<Vec<TrendSummaryRow>> {
    let checkpoints: Vec<u64> = trends[0].iter().map(|p| p.evaluations).collect();
    for (t, dir) in trends.iter().zip(runs).skip(1) {
        if t.iter().map(|p| p.evaluations).ne(checkpoints.iter().copied()) {
            return Err(Error::record(dir.join(TREND), "checkpoints differ from the first run"));
        }
    }
    Ok(checkpoints
        .iter()
        .enumerate()
        .map(|(i, &evaluations)| {
            let values: Vec<f64> = trends.iter().filter_map(|t| t[i].best_fitness).collect();
            let (mean, std) = mean_std(&values);
            TrendSummaryRow { evaluations, mean, std, runs: values.len() }
        })
        .collect())
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()))
}

/// Per-cell average over the runs occupying the cell, and per-cell maximum.
fn combine_maps(archives: &[Vec<ArchiveRow>], bins: usize) -> (Vec<MapCell>, Vec<MapCell>) {
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); bins * bins];
    for rows in archives {
        for row in rows {
            values[row.cell.0 * bins + row.cell.1].push(row.elite.fitness);
        }
    }
    let cell = |i: usize| (i / bins, i % bins);
    let average = values
        .iter()
        .enumerate()
        .map(|(i, v)| MapCell { cell: cell(i), fitness: mean_std(v).0, runs: v.len() })
        .collect();
    let max = values
        .iter()
        .enumerate()
        .map(|(i, v)| MapCell { cell: cell(i), fitness: v.iter().copied().reduce(f64::max), runs: v.len() })
        .collect();
    (average, max)
}

/// Fills a map from a GE run's evaluation log and writes it as archive.csv.
pub fn project_ge_map(run_dir: &Path) -> Result<Archive> {
    let config = load_snapshot(run_dir)?;
    if config.algorithm != Algorithm::Ge {
        return Err(Error::Config(format!("{} is not a GE run", run_dir.display())));
    }
    let path = run_dir.join(EVALS);
    if !path.is_file() {
        return Err(Error::record(&path, "missing; rerun with --log-all-evals"));
    }
    let rows = records::read_evals(records::open(&path)?, config.ge.max_value, &path)?;
    let archive = project(&config, rows.iter().map(|r| r.to_individual()));
    write_csv_atomic(&run_dir.join(ARCHIVE), |w| records::write_archive(w, &archive))?;
    Ok(archive)
}

/// Inserts individuals, in order, into an empty archive with the config's grid.
pub fn project(config: &ExperimentConfig, individuals: impl IntoIterator<Item = Individual>) -> Archive {
    let mut archive = Archive::new(config.grid());
    for ind in individuals {
        archive.add(&ind);
    }
    archive
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeSelector {
    Cell(usize, usize),
    Best,
}

#[derive(Debug, Clone)]
pub struct ExportedTree {
    pub path: PathBuf,
    pub text: String,
    pub fitness: f64,
    pub descriptor: Descriptor,
}

/// Re-evaluates a stored genotype with its stored seed and writes the
/// simplified tree next to the run's files.
pub fn export_tree(run_dir: &Path, selector: TreeSelector) -> Result<ExportedTree> {
    let config = load_snapshot(run_dir)?;
    let max_value = config.ge.max_value;
    let archive_path = run_dir.join(ARCHIVE);
    let read_archive = || -> Result<Archive> {
        let rows = records::read_archive(records::open(&archive_path)?, &config.grid(), max_value, &archive_path)?;
        Ok(records::archive_from_rows(config.grid(), &rows))
    };

    let (genotype, stored_fitness, eval_seed, file_name, label) = match selector {
        TreeSelector::Cell(e, d) => {
            if !archive_path.is_file() {
                return Err(Error::record(&archive_path, "missing; GE runs need project-ge-map first"));
            }
            let archive = read_archive()?;
            let bins = archive.grid().bins;
            if e >= bins || d >= bins {
                return Err(Error::Config(format!("cell ({e}, {d}) outside a {bins}x{bins} grid")));
            }
            let elite =
                archive.get((e, d)).ok_or_else(|| Error::record(&archive_path, format!("cell ({e}, {d}) is empty")))?;
            (
                elite.genotype.clone(),
                elite.fitness,
                elite.eval_seed,
                format!("tree_{e}_{d}.txt"),
                format!("cell ({e}, {d})"),
            )
        }
        TreeSelector::Best => match config.algorithm {
            Algorithm::Me => {
                let archive = read_archive()?;
                let (cell, elite) = archive.best().ok_or_else(|| Error::record(&archive_path, "archive is empty"))?;
                (
                    elite.genotype.clone(),
                    elite.fitness,
                    elite.eval_seed,
                    "tree_best.txt".to_string(),
                    format!("best, cell ({}, {})", cell.0, cell.1),
                )
            }
            Algorithm::Ge => {
                let path = run_dir.join(POPULATION);
                let rows = records::read_population(records::open(&path)?, max_value, &path)?;
                let best = rows.first().ok_or_else(|| Error::record(&path, "population is empty"))?;
                (best.genotype.clone(), best.fitness, best.eval_seed, "tree_best.txt".to_string(), "best".to_string())
            }
        },
    };

    let result = config.evaluator().evaluate(&genotype, eval_seed);
    if result.fitness.to_bits() != stored_fitness.to_bits() {
        return Err(Error::record(
            run_dir,
            format!("re-evaluation gave fitness {} but {} was stored", result.fitness, stored_fitness),
        ));
    }
    let detail = result.detail.ok_or_else(|| Error::record(run_dir, "stored genotype does not translate"))?;
    let descriptor = Descriptor { entropy: detail.entropy, depth: detail.tree_depth };
    let text = format!(
        "# {label}: fitness {}, entropy {}, depth {}\n{}",
        result.fitness,
        detail.entropy,
        detail.tree_depth,
        detail.simplified_tree.render(config.env.action_names())
    );
    let path = run_dir.join(file_name);
    write_text(&path, &text)?;
    Ok(ExportedTree { path, text, fitness: result.fitness, descriptor })
}
