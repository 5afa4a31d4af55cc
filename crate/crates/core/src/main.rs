use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use serde_json::{json, Map, Value};

use restore_core::pipeline::{self, PipelineSpec, Step, PIPELINE_VERSION, REGISTRY};
use restore_core::service::{self, ServiceConfig};

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

#[derive(Parser)]
#[command(name = "restore", version, about = "Restoration of scanned ancient documents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a pipeline document.
    Run {
        spec: PathBuf,
        /// Base directory for relative paths (default: the pipeline file's directory).
        #[arg(long)]
        workdir: Option<PathBuf>,
    },
    /// Parse and validate a pipeline document without running it.
    Validate { spec: PathBuf },
    /// Write the spectrum magnitude view of an image.
    Spectrum {
        input: PathBuf,
        output: PathBuf,
        /// Log-scale the magnitudes.
        #[arg(long)]
        log: bool,
    },
    /// Threshold + dipole-edge text enhancement.
    #[command(group(ArgGroup::new("thresh").args(["threshold", "auto"])))]
    Enhance {
        input: PathBuf,
        output: PathBuf,
        /// Fixed binarization threshold in [0, 1].
        #[arg(long)]
        threshold: Option<f64>,
        /// Pick the threshold with Otsu's method (default).
        #[arg(long)]
        auto: bool,
        #[arg(long, default_value_t = 2)]
        radius: i64,
        #[arg(long, default_value_t = 0.8)]
        gain: f64,
        #[arg(long, default_value_t = 0.75)]
        mix: f64,
    },
    /// Fourier filtering with a mask image or a generated mask.
    #[command(group(ArgGroup::new("mask_kind").required(true).args(["mask", "highpass", "notch"])))]
    Filter {
        input: PathBuf,
        output: PathBuf,
        /// DC-centred mask image at the padded spectrum size.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// High-pass: CUTOFF[,SOFTNESS] in frequency samples.
        #[arg(long, value_name = "CUTOFF[,SOFT]")]
        highpass: Option<String>,
        /// Horizontal-axis notch: HALFWIDTH,GUARD in frequency samples.
        #[arg(long, value_name = "HALFWIDTH,GUARD")]
        notch: Option<String>,
        /// Clamp instead of renormalizing the filtered image.
        #[arg(long)]
        clamp: bool,
    },
    /// Serve the workbench HTTP API.
    Serve {
        #[arg(long, env = "RESTORE_LISTEN", default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        #[arg(long, env = "RESTORE_MAX_DIM", default_value_t = 8192)]
        max_dim: usize,
        #[arg(long, env = "RESTORE_MAX_IMAGES", default_value_t = 4096)]
        max_images: usize,
        #[arg(long, env = "RESTORE_SPILL_DIR")]
        spill_dir: Option<PathBuf>,
        #[arg(long, env = "RESTORE_UI_DIR")]
        ui_dir: Option<PathBuf>,
    },
    /// List the registered operations and their params.
    Ops,
}

fn parse_numbers(text: &str, min: usize, max: usize, what: &str) -> Result<Vec<f64>, String> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if (min..=max).contains(&v.len()) => Ok(v),
        _ => Err(format!("--{what} expects {min} to {max} comma-separated numbers, got `{text}`")),
    }
}

fn absolute(p: &Path) -> String {
    std::path::absolute(p)
        .unwrap_or_else(|_| p.to_path_buf())
        .to_string_lossy()
        .into_owned()
}

/// A one-step pipeline from `input` to `output`, plus optional extra inputs.
fn single_step(op: &str, params: Value, input: &Path, extra: &[(&str, &Path)], output: &Path) -> PipelineSpec {
    let mut inputs = BTreeMap::from([("src".to_string(), absolute(input))]);
    let mut names = vec!["src".to_string()];
    for (name, path) in extra {
        inputs.insert(name.to_string(), absolute(path));
        names.push(name.to_string());
    }
    let params: Map<String, Value> = params.as_object().cloned().unwrap_or_default();
    PipelineSpec {
        version: PIPELINE_VERSION,
        inputs,
        steps: vec![Step {
            op: op.into(),
            params,
            inputs: names,
            out: "result".into(),
        }],
        outputs: BTreeMap::from([("result".to_string(), absolute(output))]),
    }
}

fn execute(spec: &PipelineSpec, workdir: &Path) -> ExitCode {
    if let Err(errs) = spec.validate() {
        eprintln!("{errs}");
        return ExitCode::from(EXIT_VALIDATION);
    }
    let report = pipeline::run_pipeline(spec, workdir);
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if report.success {
        ExitCode::SUCCESS
    } else {
        if let Some(e) = &report.error {
            eprintln!("error: {e}");
        }
        ExitCode::from(EXIT_RUNTIME)
    }
}

fn load_spec(path: &Path) -> Result<PipelineSpec, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: reading {}: {e}", path.display());
        ExitCode::from(EXIT_RUNTIME)
    })?;
    pipeline::parse_pipeline(&text).map_err(|errs| {
        eprintln!("{errs}");
        ExitCode::from(EXIT_VALIDATION)
    })
}

fn run(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Run { spec, workdir } => {
            let parsed = match load_spec(&spec) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let workdir = workdir.unwrap_or_else(|| match spec.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            });
            execute(&parsed, &workdir)
        }
        Command::Validate { spec } => match load_spec(&spec) {
            Ok(s) => {
                println!("valid: {} step(s)", s.steps.len());
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Spectrum { input, output, log } => {
            execute(&single_step("spectrum_view", json!({ "log": log }), &input, &[], &output), Path::new("."))
        }
        Command::Enhance {
            input,
            output,
            threshold,
            auto: _,
            radius,
            gain,
            mix,
        } => {
            let t = threshold.map_or(json!("auto"), Value::from);
            let params = json!({ "t": t, "radius": radius, "gain": gain, "mix": mix });
            execute(&single_step("enhance_text", params, &input, &[], &output), Path::new("."))
        }
        Command::Filter {
            input,
            output,
            mask,
            highpass,
            notch,
            clamp,
        } => {
            let renormalize = !clamp;
            let spec = if let Some(mask) = mask {
                single_step(
                    "mask_filter",
                    json!({ "renormalize": renormalize }),
                    &input,
                    &[("mask", &mask)],
                    &output,
                )
            } else if let Some(text) = highpass {
                match parse_numbers(&text, 1, 2, "highpass") {
                    Ok(v) => single_step(
                        "highpass_filter",
                        json!({ "cutoff": v[0], "softness": v.get(1).copied().unwrap_or(0.0), "renormalize": renormalize }),
                        &input,
                        &[],
                        &output,
                    ),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(EXIT_VALIDATION);
                    }
                }
            } else {
                let text = notch.expect("clap enforces one mask kind");
                match parse_numbers(&text, 2, 2, "notch") {
                    Ok(v) => single_step(
                        "notch_filter",
                        json!({ "half_width": v[0], "guard": v[1], "renormalize": renormalize }),
                        &input,
                        &[],
                        &output,
                    ),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(EXIT_VALIDATION);
                    }
                }
            };
            execute(&spec, Path::new("."))
        }
        Command::Serve {
            listen,
            max_dim,
            max_images,
            spill_dir,
            ui_dir,
        } => {
            let config = ServiceConfig {
                listen,
                max_dim,
                max_images,
                spill_dir,
                ui_dir,
                ..ServiceConfig::default()
            };
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_RUNTIME);
                }
            };
            eprintln!("listening on http://{listen}");
            match runtime.block_on(service::serve(config)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            }
        }
        Command::Ops => {
            for op in REGISTRY {
                let params: Vec<String> = op
                    .params
                    .iter()
                    .map(|p| match p.default {
                        pipeline::ParamDefault::Required => p.name.to_string(),
                        d => format!("{}={d:?}", p.name),
                    })
                    .collect();
                println!("{:<18} in={:?} params=[{}]  {}", op.name, op.inputs, params.join(", "), op.summary);
            }
            ExitCode::SUCCESS
        }
    }
}

fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            ExitCode::from(code)
        }
    }
}
