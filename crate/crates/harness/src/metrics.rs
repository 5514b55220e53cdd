use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::HarnessError;

pub const METRICS_HEADER: &str = "epoch,train_loss,test_metric";

/// One metrics row. `test_metric` is test MSE for regression and test
/// accuracy (fraction correct) for classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub test_metric: f64,
}

/// Append-only metrics CSV; every row is flushed as soon as it is written.
pub struct MetricsWriter {
    path: PathBuf,
    out: BufWriter<File>,
    last_epoch: usize,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self, HarnessError> {
        let io = |source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let mut out = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(out, "{METRICS_HEADER}").map_err(io)?;
        out.flush().map_err(io)?;
        Ok(Self {
            path: path.to_path_buf(),
            out,
            last_epoch: 0,
        })
    }

    pub fn append(&mut self, r: &RunRecord) -> Result<(), HarnessError> {
        if r.epoch != self.last_epoch + 1 {
            return Err(HarnessError::Config(format!(
                "metrics epochs must increase by one: got {} after {}",
                r.epoch, self.last_epoch
            )));
        }
        let path = &self.path;
        let io = |source| HarnessError::Io {
            path: path.clone(),
            source,
        };
        writeln!(self.out, "{},{},{}", r.epoch, r.train_loss, r.test_metric).map_err(io)?;
        self.out.flush().map_err(io)?;
        self.last_epoch = r.epoch;
        Ok(())
    }
}
