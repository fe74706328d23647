//! CSV files written into run directories, and their readers.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back gives bit-identical values.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::eval::Descriptor;
use crate::evo::{Archive, CoveragePoint, Elite, GridSpec, Individual, TrendPoint};
use crate::grammar::Genotype;
use crate::{Error, Result};

pub const TREND_HEADER: &[&str] = &["evaluations", "best_fitness"];
pub const COVERAGE_HEADER: &[&str] = &["evaluations", "coverage"];
pub const ARCHIVE_HEADER: &[&str] =
    &["entropy_bin", "depth_bin", "fitness", "entropy", "depth", "eval_seed", "genotype"];
pub const POPULATION_HEADER: &[&str] = &["rank", "fitness", "entropy", "depth", "eval_seed", "genotype"];
pub const EVALS_HEADER: &[&str] = &["index", "fitness", "entropy", "depth", "eval_seed", "genotype"];
pub const MAP_HEADER: &[&str] = &["entropy_bin", "depth_bin", "fitness", "runs"];
pub const TREND_SUMMARY_HEADER: &[&str] = &["evaluations", "mean", "std", "runs"];

/// One archive.csv row.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveRow {
    pub cell: (usize, usize),
    pub elite: Elite,
}

/// One evals.csv / population.csv row. `index` is the rank for population files.
#[derive(Debug, Clone, PartialEq)]
pub struct IndividualRow {
    pub index: u64,
    pub fitness: f64,
    pub descriptor: Option<Descriptor>,
    pub eval_seed: u64,
    pub genotype: Genotype,
}

impl IndividualRow {
    pub fn from_individual(ind: &Individual) -> Self {
        Self {
            index: ind.index,
            fitness: ind.fitness,
            descriptor: ind.descriptor,
            eval_seed: ind.eval_seed,
            genotype: ind.genotype.clone(),
        }
    }

    pub fn to_individual(&self) -> Individual {
        Individual {
            genotype: self.genotype.clone(),
            fitness: self.fitness,
            descriptor: self.descriptor,
            eval_seed: self.eval_seed,
            index: self.index,
        }
    }
}

/// One cell of an aggregated map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapCell {
    pub cell: (usize, usize),
    /// `None` when no run occupied the cell.
    pub fitness: Option<f64>,
    pub runs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendSummaryRow {
    pub evaluations: u64,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub runs: usize,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(header)?;
    Ok(w)
}

pub fn write_trend<W: Write>(w: W, trend: &[TrendPoint]) -> Result<()> {
    let mut w = writer(w, TREND_HEADER)?;
    for p in trend {
        w.write_record([p.evaluations.to_string(), opt(p.best_fitness)])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))
}

pub fn write_coverage<W: Write>(w: W, coverage: &[CoveragePoint]) -> Result<()> {
    let mut w = writer(w, COVERAGE_HEADER)?;
    for p in coverage {
        w.write_record([p.evaluations.to_string(), p.coverage.to_string()])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))
}

pub fn write_archive<W: Write>(w: W, archive: &Archive) -> Result<()> {
    let mut w = writer(w, ARCHIVE_HEADER)?;
    for ((e, d), elite) in archive.iter() {
        w.write_record([
            e.to_string(),
            d.to_string(),
            elite.fitness.to_string(),
            elite.descriptor.entropy.to_string(),
            elite.descriptor.depth.to_string(),
            elite.eval_seed.to_string(),
            elite.genotype.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))
}

fn write_individual_rows<'a, W: Write>(
    w: W,
    header: &[&str],
    rows: impl IntoIterator<Item = (u64, &'a Individual)>,
) -> Result<()> {
    let mut w = writer(w, header)?;
    for (index, ind) in rows {
        let (entropy, depth) = match ind.descriptor {
            Some(d) => (d.entropy.to_string(), d.depth.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            index.to_string(),
            ind.fitness.to_string(),
            entropy,
            depth,
            ind.eval_seed.to_string(),
            ind.genotype.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))
}

/// Population in the order given (best first), with its rank as first column.
pub fn write_population<W: Write>(w: W, population: &[Individual]) -> Result<()> {
    write_individual_rows(w, POPULATION_HEADER, population.iter().enumerate().map(|(i, p)| (i as u64, p)))
}

/// Streaming writer for the per-evaluation log.
pub struct EvalLog<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> EvalLog<W> {
    pub fn new(w: W) -> Result<Self> {
        Ok(Self { inner: writer(w, EVALS_HEADER)? })
    }

    pub fn push(&mut self, ind: &Individual) -> Result<()> {
        let (entropy, depth) = match ind.descriptor {
            Some(d) => (d.entropy.to_string(), d.depth.to_string()),
            None => (String::new(), String::new()),
        };
        self.inner.write_record([
            ind.index.to_string(),
            ind.fitness.to_string(),
            entropy,
            depth,
            ind.eval_seed.to_string(),
            ind.genotype.to_string(),
        ])?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| Error::Csv(e.into()))
    }
}

pub fn write_map<W: Write>(w: W, cells: &[MapCell]) -> Result<()> {
    let mut w = writer(w, MAP_HEADER)?;
    for c in cells {
        w.write_record([c.cell.0.to_string(), c.cell.1.to_string(), opt(c.fitness), c.runs.to_string()])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))
}

pub fn write_trend_summary<W: Write>(w: W, rows: &[TrendSummaryRow]) -> Result<()> {
    let mut w = writer(w, TREND_SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([r.evaluations.to_string(), opt(r.mean), opt(r.std), r.runs.to_string()])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))
}

// ---- readers ----

/// Reads records after checking the header. `origin` names the source in errors.
fn records<R: Read>(r: R, header: &[&str], origin: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let found = reader.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::record(
            origin,
            format!("unexpected header {:?}, expected {:?}", found.iter().collect::<Vec<_>>(), header),
        ));
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        out.push(rec?);
    }
    Ok(out)
}

struct Fields<'a> {
    rec: &'a csv::StringRecord,
    origin: &'a Path,
    row: usize,
}

impl Fields<'_> {
    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::record(self.origin, format!("row {}: {msg}", self.row))
    }

    fn raw(&self, i: usize, name: &str) -> Result<&str> {
        self.rec.get(i).ok_or_else(|| self.err(format!("missing {name}")))
    }

    fn parse<T: std::str::FromStr>(&self, i: usize, name: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.raw(i, name)?;
        s.parse().map_err(|e| self.err(format!("{name} {s:?}: {e}")))
    }

    fn finite(&self, i: usize, name: &str) -> Result<f64> {
        let v: f64 = self.parse(i, name)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(format!("{name} is not finite")))
        }
    }

    fn opt_finite(&self, i: usize, name: &str) -> Result<Option<f64>> {
        if self.raw(i, name)?.is_empty() {
            Ok(None)
        } else {
            self.finite(i, name).map(Some)
        }
    }

    fn genotype(&self, i: usize, max_value: u32) -> Result<Genotype> {
        Genotype::parse(self.raw(i, "genotype")?, max_value).map_err(|e| self.err(e))
    }

    fn descriptor(&self, entropy: usize, depth: usize) -> Result<Option<Descriptor>> {
        let e = self.raw(entropy, "entropy")?;
        let d = self.raw(depth, "depth")?;
        match (e.is_empty(), d.is_empty()) {
            (true, true) => Ok(None),
            (false, false) => {
                let entropy = self.finite(entropy, "entropy")?;
                if !(0.0..=1.0).contains(&entropy) {
                    return Err(self.err("entropy outside [0, 1]"));
                }
                Ok(Some(Descriptor { entropy, depth: self.parse(depth, "depth")? }))
            }
            _ => Err(self.err("entropy and depth must both be set or both be empty")),
        }
    }
}

fn each<R: Read, T>(
    r: R,
    header: &[&str],
    origin: &Path,
    mut f: impl FnMut(&Fields<'_>) -> Result<T>,
) -> Result<Vec<T>> {
    records(r, header, origin)?.iter().enumerate().map(|(i, rec)| f(&Fields { rec, origin, row: i + 1 })).collect()
}

pub fn read_trend<R: Read>(r: R, origin: &Path) -> Result<Vec<TrendPoint>> {
    each(r, TREND_HEADER, origin, |f| {
        Ok(TrendPoint { evaluations: f.parse(0, "evaluations")?, best_fitness: f.opt_finite(1, "best_fitness")? })
    })
}

pub fn read_coverage<R: Read>(r: R, origin: &Path) -> Result<Vec<CoveragePoint>> {
    each(r, COVERAGE_HEADER, origin, |f| {
        Ok(CoveragePoint { evaluations: f.parse(0, "evaluations")?, coverage: f.finite(1, "coverage")? })
    })
}

/// Reads archive rows, checking bins against `grid` and rejecting duplicate cells.
pub fn read_archive<R: Read>(r: R, grid: &GridSpec, max_value: u32, origin: &Path) -> Result<Vec<ArchiveRow>> {
    let rows = each(r, ARCHIVE_HEADER, origin, |f| {
        let cell: (usize, usize) = (f.parse(0, "entropy_bin")?, f.parse(1, "depth_bin")?);
        if cell.0 >= grid.bins || cell.1 >= grid.bins {
            return Err(f.err(format!("cell {cell:?} outside a {0}x{0} grid", grid.bins)));
        }
        let descriptor = f.descriptor(3, 4)?.ok_or_else(|| f.err("elite without descriptor"))?;
        Ok(ArchiveRow {
            cell,
            elite: Elite {
                genotype: f.genotype(6, max_value)?,
                fitness: f.finite(2, "fitness")?,
                descriptor,
                eval_seed: f.parse(5, "eval_seed")?,
            },
        })
    })?;
    let mut seen = vec![false; grid.bins * grid.bins];
    for row in &rows {
        let slot = &mut seen[row.cell.0 * grid.bins + row.cell.1];
        if *slot {
            return Err(Error::record(origin, format!("cell {:?} listed twice", row.cell)));
        }
        *slot = true;
    }
    Ok(rows)
}

pub fn archive_from_rows(grid: GridSpec, rows: &[ArchiveRow]) -> Archive {
    let mut archive = Archive::new(grid);
    for row in rows {
        archive.insert(row.cell, row.elite.clone());
    }
    archive
}

fn read_individual_rows<R: Read>(r: R, header: &[&str], max_value: u32, origin: &Path) -> Result<Vec<IndividualRow>> {
    each(r, header, origin, |f| {
        Ok(IndividualRow {
            index: f.parse(0, header[0])?,
            fitness: f.finite(1, "fitness")?,
            descriptor: f.descriptor(2, 3)?,
            eval_seed: f.parse(4, "eval_seed")?,
            genotype: f.genotype(5, max_value)?,
        })
    })
}

pub fn read_evals<R: Read>(r: R, max_value: u32, origin: &Path) -> Result<Vec<IndividualRow>> {
    read_individual_rows(r, EVALS_HEADER, max_value, origin)
}

pub fn read_population<R: Read>(r: R, max_value: u32, origin: &Path) -> Result<Vec<IndividualRow>> {
    read_individual_rows(r, POPULATION_HEADER, max_value, origin)
}

pub fn read_map<R: Read>(r: R, origin: &Path) -> Result<Vec<MapCell>> {
    each(r, MAP_HEADER, origin, |f| {
        Ok(MapCell {
            cell: (f.parse(0, "entropy_bin")?, f.parse(1, "depth_bin")?),
            fitness: f.opt_finite(2, "fitness")?,
            runs: f.parse(3, "runs")?,
        })
    })
}

pub fn read_trend_summary<R: Read>(r: R, origin: &Path) -> Result<Vec<TrendSummaryRow>> {
    each(r, TREND_SUMMARY_HEADER, origin, |f| {
        Ok(TrendSummaryRow {
            evaluations: f.parse(0, "evaluations")?,
            mean: f.opt_finite(1, "mean")?,
            std: f.opt_finite(2, "std")?,
            runs: f.parse(3, "runs")?,
        })
    })
}

pub(crate) fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}
