use std::fmt::Write as _;

use gradavg_core::OptimizerKind;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::experiment::{run_experiment, RunSummary};
use crate::HarnessError;

#[derive(Debug)]
pub struct GridRow {
    pub optimizer: OptimizerKind,
    /// A failed run keeps its error; the rest of the grid still runs.
    pub outcome: Result<RunSummary, HarnessError>,
}

impl GridRow {
    pub fn final_test_metric(&self) -> Option<f64> {
        self.outcome
            .as_ref()
            .ok()
            .filter(|s| !s.diverged())
            .map(|s| s.final_test_metric)
    }
}

#[derive(Debug)]
pub struct GridTable {
    /// Sorted by optimizer name.
    pub rows: Vec<GridRow>,
    /// `|GA − SGD| / SGD` on the final test metric, when both ran cleanly.
    pub gap: Option<f64>,
}

impl GridTable {
    pub fn row(&self, kind: OptimizerKind) -> Option<&GridRow> {
        self.rows.iter().find(|r| r.optimizer == kind)
    }

    pub fn any_diverged(&self) -> bool {
        self.rows
            .iter()
            .any(|r| matches!(&r.outcome, Ok(s) if s.diverged()))
    }

    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.outcome.is_err())
    }

    /// Plain-text table: one line per optimizer, then the gap line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            match &r.outcome {
                Ok(s) => writeln!(out, "{}", s.line()),
                Err(e) => writeln!(out, "optimizer={} status=failed error={e:?}", r.optimizer),
            }
            .expect("write to String");
        }
        match self.gap {
            Some(g) => writeln!(out, "gradavg_vs_sgd_gap={g}"),
            None => writeln!(out, "gradavg_vs_sgd_gap="),
        }
        .expect("write to String");
        out
    }
}

/// Runs every config, possibly concurrently, and assembles the table once all
/// runs are done. Configs are expected to share task and data.
pub fn run_grid(cfgs: &[ExperimentConfig]) -> GridTable {
    let mut rows: Vec<GridRow> = cfgs
        .par_iter()
        .map(|cfg| GridRow {
            optimizer: cfg.optimizer,
            outcome: run_experiment(cfg),
        })
        .collect();
    rows.sort_by_key(|r| r.optimizer.name());

    let metric = |k| {
        rows.iter()
            .find(|r| r.optimizer == k)
            .and_then(GridRow::final_test_metric)
    };
    let gap = match (metric(OptimizerKind::GradAvg), metric(OptimizerKind::Sgd)) {
        (Some(ga), Some(sgd)) => Some((ga - sgd).abs() / sgd.abs()),
        _ => None,
    };
    GridTable { rows, gap }
}
