//! Benchmark harness: solves every `.smt2` file in a directory and reports
//! one CSV row per file plus a sat/unsat/inconclusive summary.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::engine::{SolverConfig, Verdict};
use crate::error::Result;
use crate::smtlib;

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub file: String,
    /// `sat`, `unsat`, `unknown`, or `error`.
    pub verdict: String,
    pub wall_millis: u128,
    pub branches_explored: u64,
    pub product_states_max: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BenchSummary {
    pub sat: usize,
    pub unsat: usize,
    pub inconclusive: usize,
}

/// Solves all `.smt2` files under `dir` (sorted by name) with up to `jobs`
/// worker threads. Unreadable or failing files become `error` rows; the run
/// continues. Rows come back in input order.
pub fn bench_run(dir: &Path, cfg: &SolverConfig, jobs: usize) -> Result<(Vec<BenchRow>, BenchSummary)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "smt2"))
        .collect();
    files.sort();

    let slots: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; files.len()]);
    let next: AtomicUsize = AtomicUsize::new(0);
    let jobs = jobs.max(1).min(files.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= files.len() {
                    return;
                }
                let row = solve_one(&files[i], cfg);
                slots.lock().expect("bench row slot").as_mut_slice()[i] = Some(row);
            });
        }
    });
    let rows: Vec<BenchRow> = slots
        .into_inner()
        .expect("bench rows")
        .into_iter()
        .map(|r| r.expect("every file produced a row"))
        .collect();
    let mut summary = BenchSummary::default();
    for row in &rows {
        match row.verdict.as_str() {
            "sat" => summary.sat += 1,
            "unsat" => summary.unsat += 1,
            _ => summary.inconclusive += 1,
        }
    }
    Ok((rows, summary))
}

fn solve_one(path: &Path, cfg: &SolverConfig) -> BenchRow {
    let file = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let started = std::time::Instant::now();
    let outcome = std::fs::read_to_string(path)
        .map_err(crate::error::Error::from)
        .and_then(|text| smtlib::solve_script(&text, cfg));
    match outcome {
        Ok((result, _, _)) => BenchRow {
            file,
            verdict: match result.verdict {
                Verdict::Sat => "sat",
                Verdict::Unsat => "unsat",
                Verdict::Unknown => "unknown",
            }
            .to_string(),
            wall_millis: result.stats.wall.as_millis(),
            branches_explored: result.stats.branches_explored,
            product_states_max: result.stats.max_product_states,
        },
        Err(_) => BenchRow {
            file,
            verdict: "error".to_string(),
            wall_millis: started.elapsed().as_millis(),
            branches_explored: 0,
            product_states_max: 0,
        },
    }
}

/// Columns: file, verdict, wall-millis, branches-explored,
/// product-states-max; one final summary row.
pub fn write_csv<W: std::io::Write>(
    rows: &[BenchRow],
    summary: &BenchSummary,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["file", "verdict", "wall-millis", "branches-explored", "product-states-max"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.file.as_str(),
            r.verdict.as_str(),
            &r.wall_millis.to_string(),
            &r.branches_explored.to_string(),
            &r.product_states_max.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.write_record([
        "summary",
        &format!(
            "sat={} unsat={} inconcl={}",
            summary.sat, summary.unsat, summary.inconclusive
        ),
        "",
        "",
        "",
    ])
    .map_err(csv_err)?;
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Internal(format!("csv: {e}"))
}
