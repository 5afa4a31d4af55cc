use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::PipelineSpec;
use crate::codec;
use crate::raster::Raster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepReport {
    pub index: usize,
    pub op: String,
    pub out: String,
    pub duration_ms: f64,
    pub status: StepStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputReport {
    pub name: String,
    pub path: PathBuf,
    /// SHA-256 of the bytes written, lowercase hex.
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub success: bool,
    pub steps: Vec<StepReport>,
    pub outputs: Vec<OutputReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    pub fn failed_step(&self) -> Option<&StepReport> {
        self.steps.iter().find(|s| s.status == StepStatus::Failed)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn resolve(workdir: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        workdir.join(p)
    }
}

/// Executes the steps in order, writing each declared output as soon as it
/// is produced. Halts on the first failure; outputs already written stay on
/// disk.
pub fn run_pipeline(spec: &PipelineSpec, workdir: &Path) -> RunReport {
    let mut report = RunReport {
        success: false,
        steps: Vec::with_capacity(spec.steps.len()),
        outputs: Vec::new(),
        error: None,
    };

    let mut values: HashMap<&str, Raster> = HashMap::new();
    for (name, path) in &spec.inputs {
        match codec::read_image(&resolve(workdir, path)) {
            Ok(r) => {
                values.insert(name, r);
            }
            Err(e) => {
                report.error = Some(format!("input `{name}` ({path}): {e}"));
                return report;
            }
        }
    }

    for (index, step) in spec.steps.iter().enumerate() {
        let started = Instant::now();
        let result = step
            .resolve()
            .map_err(|errs| errs.join("; "))
            .and_then(|op| {
                let inputs: Vec<&Raster> = step
                    .inputs
                    .iter()
                    .map(|n| values.get(n.as_str()).ok_or_else(|| format!("name `{n}` is unbound")))
                    .collect::<Result<_, _>>()?;
                op.apply(&inputs).map_err(|e| e.to_string())
            })
            .and_then(|raster| {
                if let Some(path) = spec.outputs.get(&step.out) {
                    let target = resolve(workdir, path);
                    let bytes = codec::write_image(&raster, &target).map_err(|e| format!("writing {path}: {e}"))?;
                    report.outputs.push(OutputReport {
                        name: step.out.clone(),
                        path: target,
                        sha256: sha256_hex(&bytes),
                    });
                }
                Ok(raster)
            });
        let duration_ms = started.elapsed().as_secs_f64() * 1e3;
        match result {
            Ok(raster) => {
                report.steps.push(StepReport {
                    index,
                    op: step.op.clone(),
                    out: step.out.clone(),
                    duration_ms,
                    status: StepStatus::Ok,
                    error: None,
                });
                values.insert(&step.out, raster);
            }
            Err(e) => {
                report.error = Some(format!("step {index} ({}): {e}", step.op));
                report.steps.push(StepReport {
                    index,
                    op: step.op.clone(),
                    out: step.out.clone(),
                    duration_ms,
                    status: StepStatus::Failed,
                    error: Some(e),
                });
                return report;
            }
        }
    }
    report.success = true;
    report
}
