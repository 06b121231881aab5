//! Aggregation of eval sidecars: value against budget, seed agreement.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::run::{load_sidecar, Sidecar};
use crate::{CliError, CliResult};

/// Slack allowed before a larger budget counts as giving a larger value.
const MONOTONE_TOL: f64 = 1e-9;

struct Row {
    run: usize,
    point: usize,
    value: f64,
    monotone: bool,
}

/// Key of a budget ladder: same method, domain, grid and seed.
fn ladder_key(s: &Sidecar) -> String {
    format!(
        "{:?}|{}|{:?}|{:?}|{:?}|{}",
        s.method, s.domain, s.grid, s.slice, s.base, s.seed
    )
}

fn budget(s: &Sidecar) -> (usize, usize, usize) {
    (s.config.degree, s.config.restarts, s.config.max_evals)
}

pub fn cmd_report(paths: &[PathBuf], out: Option<&Path>) -> CliResult<()> {
    if paths.is_empty() {
        return Err(CliError::Parse("no run artifacts given".into()));
    }
    let runs: Vec<Sidecar> = paths.iter().map(|p| load_sidecar(p)).collect::<CliResult<_>>()?;

    // value against budget within each ladder
    let mut ladders: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, s) in runs.iter().enumerate() {
        ladders.entry(ladder_key(s)).or_default().push(i);
    }
    let mut rows = Vec::new();
    let mut broken = 0;
    for members in ladders.values() {
        let mut order = members.clone();
        order.sort_by_key(|&i| budget(&runs[i]));
        let points = order.iter().map(|&i| runs[i].points.len()).min().unwrap_or(0);
        for p in 0..points {
            let mut best = f64::INFINITY;
            for &i in &order {
                let v = runs[i].points[p].value;
                let monotone = v <= best + MONOTONE_TOL || !v.is_finite() && !best.is_finite();
                if !monotone {
                    broken += 1;
                }
                best = best.min(v);
                rows.push(Row {
                    run: i,
                    point: p,
                    value: v,
                    monotone,
                });
            }
        }
    }
    rows.sort_by_key(|r| (r.run, r.point));

    // same configuration and seed: values must agree exactly
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, s) in runs.iter().enumerate() {
        groups
            .entry(format!("{}|{:?}", ladder_key(s), budget(s)))
            .or_default()
            .push(i);
    }
    let mut mismatched = 0;
    for members in groups.values().filter(|m| m.len() > 1) {
        let first = &runs[members[0]].points;
        for &i in &members[1..] {
            let same = runs[i].points.len() == first.len()
                && runs[i]
                    .points
                    .iter()
                    .zip(first)
                    .all(|(a, b)| a.value.to_bits() == b.value.to_bits());
            if !same {
                mismatched += 1;
            }
        }
    }

    for (i, s) in runs.iter().enumerate() {
        let finite: Vec<f64> = s.points.iter().map(|p| p.value).filter(|v| v.is_finite()).collect();
        let mean = if finite.is_empty() {
            f64::NAN
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        println!(
            "run {i}: {} method {:?} degree {} restarts {} seed {}: {} points, {} feasible, mean value {mean:.6}, {:.2} s",
            paths[i].display(),
            s.method,
            s.config.degree,
            s.config.restarts,
            s.seed,
            s.points.len(),
            s.points.iter().filter(|p| p.feasible).count(),
            s.wall_time_s
        );
    }
    println!("budget monotonicity: {broken} increases across {} ladders", ladders.len());
    println!("repeat runs: {mismatched} disagree with their first run");

    if let Some(path) = out {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Parse(e.to_string());
        w.write_record(["run", "method", "degree", "restarts", "max_evals", "seed", "point", "value", "monotone"])
            .map_err(err)?;
        for r in &rows {
            let s = &runs[r.run];
            w.write_record([
                r.run.to_string(),
                format!("{:?}", s.method).to_lowercase(),
                s.config.degree.to_string(),
                s.config.restarts.to_string(),
                s.config.max_evals.to_string(),
                s.seed.to_string(),
                r.point.to_string(),
                r.value.to_string(),
                r.monotone.to_string(),
            ])
            .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Parse(e.to_string()))?;
        std::fs::write(path, bytes).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(())
}
