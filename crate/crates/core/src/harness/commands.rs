//! The CLI subcommands. Staged commands read the previous stage's files from
//! the output directory; `run_experiment` runs every stage in memory.
//!
//! Output layout under `out`:
//!
//! ```text
//! manifest.csv
//! fields/<stem>.csv   diagrams/<stem>.csv   census/<stem>.csv   vectors/<stem>.csv
//! landscapes/<row>/avg_<class>.csv   landscapes/<row>/diff_<a>_<b>.csv
//! models/<row>/<a>_vs_<b>.model
//! report.csv
//! plots/<row>/<name>.svg
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::plot::{render_svg, PlotKind};
use super::{
    class_dir, classes, classify_comparison, comparison_classes, par_map, plan, row_dir, sample_diagram,
    simulate_sample, thread_pool, vectorize_all, ExperimentConfig, SampleId, Samplers,
};
use crate::critical::detect_critical;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::landscape::{average, difference, layout_entries_from_csv, LandscapeVector};
use crate::persistence::PersistenceDiagram;

/// One line of the experiment report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub comparison: String,
    pub eta: f64,
    pub nu: f64,
    pub accuracy: f64,
    pub calibration: f64,
}

const REPORT_HEADER: &str = "comparison,eta,nu,accuracy,calibration";

/// Report CSV with metrics rounded to one decimal.
pub fn report_to_csv(rows: &[ReportRow]) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.1},{:.1}",
            r.comparison, r.eta, r.nu, r.accuracy, r.calibration
        );
    }
    out
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some(REPORT_HEADER) {
        return Err(Error::parse(path, format!("expected header `{REPORT_HEADER}`")));
    }
    lines
        .map(|line| {
            let bad = || Error::parse(path, format!("bad report line `{line}`"));
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 5 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok(ReportRow {
                comparison: f[0].to_string(),
                eta: num(f[1])?,
                nu: num(f[2])?,
                accuracy: num(f[3])?,
                calibration: num(f[4])?,
            })
        })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn stage_path(cfg: &ExperimentConfig, stage: &str, id: &SampleId) -> PathBuf {
    cfg.out.join(stage).join(format!("{}.csv", id.stem(cfg)))
}

fn manifest(cfg: &ExperimentConfig, ids: &[SampleId]) -> String {
    let mut out = String::from("sample,row,eta,nu,model,transform,replica,split,index,seed,stream\n");
    for id in ids {
        let spec = cfg.model_spec(id.row, id.model);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            id.stem(cfg),
            id.row,
            spec.matern.eta,
            spec.matern.nu,
            spec.name,
            spec.transform.name(),
            id.replica,
            id.split,
            id.index,
            cfg.seed,
            id.stream()
        );
    }
    out
}

/// Draws every planned sample and writes the fields and the manifest.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<usize> {
    let pool = thread_pool(cfg)?;
    let ids = plan(cfg);
    let samplers = Samplers::new(cfg)?;
    par_map(&pool, &ids, |id| {
        let field = simulate_sample(cfg, &samplers, id)?;
        write_text(&stage_path(cfg, "fields", id), &field.to_csv_string())
    })?;
    write_text(&cfg.out.join("manifest.csv"), &manifest(cfg, &ids))?;
    log::info!("simulated {} fields into {}", ids.len(), cfg.out.display());
    Ok(ids.len())
}

/// Persistence diagram and critical census of one field file.
pub fn ph_single(input: &Path, diagram_out: &Path, census_out: Option<&Path>) -> Result<()> {
    let field = ScalarField::read_csv(input)?;
    write_text(diagram_out, &sample_diagram(&field)?.to_csv_string())?;
    if let Some(path) = census_out {
        write_text(path, &detect_critical(&field).to_csv_string())?;
    }
    Ok(())
}

/// Diagrams and censuses for every simulated field.
pub fn run_ph(cfg: &ExperimentConfig) -> Result<usize> {
    let pool = thread_pool(cfg)?;
    let ids = plan(cfg);
    par_map(&pool, &ids, |id| {
        ph_single(
            &stage_path(cfg, "fields", id),
            &stage_path(cfg, "diagrams", id),
            Some(&stage_path(cfg, "census", id)),
        )
    })?;
    Ok(ids.len())
}

/// Landscape vectors for every diagram, on a per-row grid taken from the
/// training diagrams.
pub fn run_vectorize(cfg: &ExperimentConfig) -> Result<usize> {
    let pool = thread_pool(cfg)?;
    let ids = plan(cfg);
    let diagrams = par_map(&pool, &ids, |id| PersistenceDiagram::read_csv(stage_path(cfg, "diagrams", id)))?;
    let vectors = vectorize_all(cfg, &pool, &ids, &diagrams)?;
    let jobs: Vec<(&SampleId, &LandscapeVector)> = ids.iter().zip(&vectors).collect();
    par_map(&pool, &jobs, |(id, v)| write_text(&stage_path(cfg, "vectors", id), &v.to_csv_string()?))?;
    Ok(ids.len())
}

fn read_vectors(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, ids: &[SampleId]) -> Result<Vec<LandscapeVector>> {
    par_map(pool, ids, |id| LandscapeVector::read_csv(stage_path(cfg, "vectors", id)))
}

fn sample_index(ids: &[SampleId]) -> HashMap<SampleId, usize> {
    ids.iter().enumerate().map(|(i, id)| (*id, i)).collect()
}

/// Writes per-class averages over all samples and, per comparison, the
/// difference of the two class averages.
fn write_landscapes(cfg: &ExperimentConfig, ids: &[SampleId], vectors: &[LandscapeVector]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for row in 0..cfg.matern.len() {
        let dir = cfg.out.join("landscapes").join(row_dir(cfg, row));
        let mut averages = HashMap::new();
        for (model, replica) in classes(cfg) {
            let members: Vec<LandscapeVector> = ids
                .iter()
                .zip(vectors)
                .filter(|(id, _)| id.row == row && id.model == model && id.replica == replica)
                .map(|(_, v)| v.clone())
                .collect();
            let avg = average(&members)?;
            let path = dir.join(format!("avg_{}.csv", class_dir(cfg, model, replica)));
            write_text(&path, &avg.to_csv_string()?)?;
            written.push(path);
            averages.insert((model, replica), avg);
        }
        for c in 0..cfg.comparisons.len() {
            let (pos, neg) = comparison_classes(cfg, c);
            let diff = difference(&averages[&pos], &averages[&neg])?;
            let path = dir.join(format!(
                "diff_{}_{}.csv",
                class_dir(cfg, pos.0, pos.1),
                class_dir(cfg, neg.0, neg.1)
            ));
            write_text(&path, &diff.to_csv_string()?)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Average landscapes and differences from the vector files.
pub fn run_landscape(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let pool = thread_pool(cfg)?;
    let ids = plan(cfg);
    let vectors = read_vectors(cfg, &pool, &ids)?;
    write_landscapes(cfg, &ids, &vectors)
}

/// Runs every comparison on every row, writing models and the report.
fn classify_all(
    cfg: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    ids: &[SampleId],
    vectors: &[LandscapeVector],
) -> Result<Vec<ReportRow>> {
    let index = sample_index(ids);
    let jobs: Vec<(usize, usize)> = (0..cfg.matern.len())
        .flat_map(|r| (0..cfg.comparisons.len()).map(move |c| (r, c)))
        .collect();
    let results = par_map(pool, &jobs, |&(row, c)| classify_comparison(cfg, &index, vectors, row, c))?;
    let mut rows = Vec::with_capacity(jobs.len());
    for (&(row, c), (model, report)) in jobs.iter().zip(results) {
        let (a, b) = cfg.comparisons[c];
        let name = format!("{}_vs_{}.model", cfg.models[a].name, cfg.models[b].name);
        write_text(&cfg.out.join("models").join(row_dir(cfg, row)).join(name), &model.to_text())?;
        let (eta, nu) = cfg.matern[row];
        rows.push(ReportRow {
            comparison: cfg.comparison_label(c),
            eta,
            nu,
            accuracy: report.accuracy,
            calibration: report.calibration,
        });
    }
    write_text(&cfg.out.join("report.csv"), &report_to_csv(&rows))?;
    Ok(rows)
}

/// Trains and evaluates from the vector files.
pub fn run_classify(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let pool = thread_pool(cfg)?;
    let ids = plan(cfg);
    let vectors = read_vectors(cfg, &pool, &ids)?;
    classify_all(cfg, &pool, &ids, &vectors)
}

/// The whole pipeline in memory. Writes the manifest, landscapes, models
/// and the report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let pool = thread_pool(cfg)?;
    let ids = plan(cfg);
    let samplers = Samplers::new(cfg)?;
    log::info!("experiment: {} samples on {} rows", ids.len(), cfg.matern.len());
    let diagrams = par_map(&pool, &ids, |id| sample_diagram(&simulate_sample(cfg, &samplers, id)?))?;
    let vectors = vectorize_all(cfg, &pool, &ids, &diagrams)?;
    write_text(&cfg.out.join("manifest.csv"), &manifest(cfg, &ids))?;
    write_landscapes(cfg, &ids, &vectors)?;
    classify_all(cfg, &pool, &ids, &vectors)
}

fn collect_csv(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_csv(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "csv") {
            out.push(path);
        }
    }
    Ok(())
}

/// Renders landscape files to SVG. With no explicit inputs, plots every file
/// under `out/landscapes`, mirroring its layout under `out/plots`.
pub fn run_plot(cfg: &ExperimentConfig, inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let base = cfg.out.join("landscapes");
    let mut files = inputs.to_vec();
    if files.is_empty() {
        collect_csv(&base, &mut files)?;
    }
    files.sort();
    let mut written = Vec::new();
    for input in files {
        let text = fs::read_to_string(&input).map_err(|e| Error::io(&input, e))?;
        let (layout, entries) = layout_entries_from_csv(&text, &input)?;
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("plot").to_string();
        let kind = PlotKind::from_name(&stem);
        let rel = input
            .strip_prefix(&base)
            .ok()
            .and_then(Path::parent)
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let title = rel.join(&stem).display().to_string();
        let path = cfg.out.join("plots").join(&rel).join(format!("{stem}.svg"));
        write_text(&path, &render_svg(&layout, &entries, kind, &title))?;
        written.push(path);
    }
    Ok(written)
}
