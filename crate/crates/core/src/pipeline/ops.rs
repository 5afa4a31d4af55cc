//! The operation registry shared by the pipeline runner, the CLI and the
//! workbench service. Every op has a name, named input slots and a param
//! schema; params are validated and defaulted here before anything runs.

use serde_json::{Map, Value};

use crate::codec;
use crate::compose::{self, BasRelief, BlendMode, EnhanceParams, Threshold};
use crate::edge::{self, EdgeMap};
use crate::error::Result;
use crate::raster::{self, Field, Raster};
use crate::spectral::{self, NotchAxis};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamKind {
    Number { min: f64, max: f64 },
    Integer { min: i64, max: i64 },
    Bool,
    Choice(&'static [&'static str]),
    /// A number in `[0, 1]` or the string `"auto"`.
    ThresholdOrAuto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamDefault {
    Required,
    Number(f64),
    Integer(i64),
    Bool(bool),
    Text(&'static str),
}

impl ParamDefault {
    fn to_value(self) -> Option<Value> {
        match self {
            ParamDefault::Required => None,
            ParamDefault::Number(v) => Some(Value::from(v)),
            ParamDefault::Integer(v) => Some(Value::from(v)),
            ParamDefault::Bool(v) => Some(Value::from(v)),
            ParamDefault::Text(v) => Some(Value::from(v)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: ParamDefault,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpSchema {
    pub name: &'static str,
    /// Named input slots, in positional order.
    pub inputs: &'static [&'static str],
    pub params: &'static [ParamSpec],
    pub summary: &'static str,
}

const fn param(name: &'static str, kind: ParamKind, default: ParamDefault) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        default,
    }
}

const UNIT: ParamKind = ParamKind::Number { min: 0.0, max: 1.0 };
const GAIN: ParamKind = ParamKind::Number { min: 0.0, max: 100.0 };
const FREQ: ParamKind = ParamKind::Number {
    min: 0.0,
    max: 1.0e6,
};
const RADIUS: ParamKind = ParamKind::Integer { min: 1, max: 64 };
const OFFSET: ParamKind = ParamKind::Integer { min: -8, max: 8 };
const IMAGE: &[&str] = &["image"];

pub static REGISTRY: &[OpSchema] = &[
    OpSchema {
        name: "grayscale",
        inputs: IMAGE,
        params: &[],
        summary: "pass-through; decoded images are already single-channel luma",
    },
    OpSchema {
        name: "threshold_binary",
        inputs: IMAGE,
        params: &[param("t", UNIT, ParamDefault::Required)],
        summary: "white where v > t, black elsewhere",
    },
    OpSchema {
        name: "otsu",
        inputs: IMAGE,
        params: &[param(
            "bins",
            ParamKind::Integer { min: 2, max: 65536 },
            ParamDefault::Integer(256),
        )],
        summary: "binarize at the Otsu threshold",
    },
    OpSchema {
        name: "dipole_edge_map",
        inputs: IMAGE,
        params: &[param("radius", RADIUS, ParamDefault::Integer(2))],
        summary: "dipole-moment edge magnitude",
    },
    OpSchema {
        name: "edge_threshold",
        inputs: IMAGE,
        params: &[param("t", UNIT, ParamDefault::Required)],
        summary: "binary edge mask, 1 where E > t",
    },
    OpSchema {
        name: "blend",
        inputs: &["a", "b"],
        params: &[
            param(
                "mode",
                ParamKind::Choice(&["alpha", "multiply_darken", "min"]),
                ParamDefault::Text("alpha"),
            ),
            param("alpha", UNIT, ParamDefault::Number(0.5)),
        ],
        summary: "combine two layers",
    },
    OpSchema {
        name: "overlay_edges",
        inputs: &["image", "edges"],
        params: &[param("gain", GAIN, ParamDefault::Number(0.8))],
        summary: "darken the image along edges",
    },
    OpSchema {
        name: "bas_relief",
        inputs: IMAGE,
        params: &[
            param("dx", OFFSET, ParamDefault::Integer(1)),
            param("dy", OFFSET, ParamDefault::Integer(1)),
            param("depth", GAIN, ParamDefault::Number(1.0)),
            param("bias", UNIT, ParamDefault::Number(0.5)),
        ],
        summary: "relief rendering from a directional difference",
    },
    OpSchema {
        name: "enhance_text",
        inputs: IMAGE,
        params: &[
            param("t", ParamKind::ThresholdOrAuto, ParamDefault::Text("auto")),
            param("radius", RADIUS, ParamDefault::Integer(2)),
            param("gain", GAIN, ParamDefault::Number(0.8)),
            param("mix", UNIT, ParamDefault::Number(0.75)),
        ],
        summary: "threshold + dipole edges text enhancement preset",
    },
    OpSchema {
        name: "highpass_filter",
        inputs: IMAGE,
        params: &[
            param("cutoff", FREQ, ParamDefault::Required),
            param("softness", FREQ, ParamDefault::Number(0.0)),
            param("renormalize", ParamKind::Bool, ParamDefault::Bool(true)),
        ],
        summary: "radial high-pass Fourier filter",
    },
    OpSchema {
        name: "notch_filter",
        inputs: IMAGE,
        params: &[
            param("half_width", FREQ, ParamDefault::Number(1.0)),
            param("guard", FREQ, ParamDefault::Number(4.0)),
            param(
                "axis",
                ParamKind::Choice(&["horizontal", "vertical"]),
                ParamDefault::Text("horizontal"),
            ),
            param("renormalize", ParamKind::Bool, ParamDefault::Bool(true)),
        ],
        summary: "axis notch Fourier filter (horizontal removes vertical lines)",
    },
    OpSchema {
        name: "mask_filter",
        inputs: &["image", "mask"],
        params: &[param("renormalize", ParamKind::Bool, ParamDefault::Bool(true))],
        summary: "Fourier filter with a DC-centred mask image of the padded spectrum size",
    },
    OpSchema {
        name: "normalize",
        inputs: IMAGE,
        params: &[
            param("lo", UNIT, ParamDefault::Number(0.0)),
            param("hi", UNIT, ParamDefault::Number(1.0)),
        ],
        summary: "stretch [min, max] onto [lo, hi]",
    },
    OpSchema {
        name: "spectrum_view",
        inputs: IMAGE,
        params: &[param("log", ParamKind::Bool, ParamDefault::Bool(false))],
        summary: "spectrum magnitude view at the padded size",
    },
    OpSchema {
        name: "encode",
        inputs: IMAGE,
        params: &[],
        summary: "quantize to the 8-bit levels written to disk",
    },
];

pub fn schema(name: &str) -> Option<&'static OpSchema> {
    REGISTRY.iter().find(|s| s.name == name)
}

/// Params with every default filled in, keyed by name.
pub type ResolvedParams = Map<String, Value>;

fn check_value(spec: &ParamSpec, v: &Value) -> std::result::Result<(), String> {
    let name = spec.name;
    match spec.kind {
        ParamKind::Number { min, max } => match v.as_f64() {
            Some(x) if x.is_finite() && (min..=max).contains(&x) => Ok(()),
            Some(x) => Err(format!("param `{name}` = {x} is outside [{min}, {max}]")),
            None => Err(format!("param `{name}` must be a number")),
        },
        ParamKind::Integer { min, max } => match v.as_i64() {
            Some(x) if (min..=max).contains(&x) => Ok(()),
            Some(x) => Err(format!("param `{name}` = {x} is outside [{min}, {max}]")),
            None => Err(format!("param `{name}` must be an integer")),
        },
        ParamKind::Bool => v
            .is_boolean()
            .then_some(())
            .ok_or_else(|| format!("param `{name}` must be true or false")),
        ParamKind::Choice(options) => match v.as_str() {
            Some(s) if options.contains(&s) => Ok(()),
            _ => Err(format!("param `{name}` must be one of {options:?}")),
        },
        ParamKind::ThresholdOrAuto => match v {
            Value::String(s) if s == "auto" => Ok(()),
            Value::Number(n) if n.as_f64().is_some_and(|x| (0.0..=1.0).contains(&x)) => Ok(()),
            _ => Err(format!("param `{name}` must be \"auto\" or a number in [0, 1]")),
        },
    }
}

/// Validates `params` against the op's schema and fills defaults. All
/// problems are reported, not just the first.
pub fn resolve_params(schema: &OpSchema, params: &Map<String, Value>) -> std::result::Result<ResolvedParams, Vec<String>> {
    let mut errors = Vec::new();
    for key in params.keys() {
        if !schema.params.iter().any(|p| p.name == key) {
            errors.push(format!("op `{}` has no param `{key}`", schema.name));
        }
    }
    let mut resolved = Map::new();
    for spec in schema.params {
        match params.get(spec.name) {
            Some(v) => match check_value(spec, v) {
                Ok(()) => {
                    resolved.insert(spec.name.to_string(), v.clone());
                }
                Err(e) => errors.push(e),
            },
            None => match spec.default.to_value() {
                Some(v) => {
                    resolved.insert(spec.name.to_string(), v);
                }
                None => errors.push(format!(
                    "op `{}` is missing required param `{}`",
                    schema.name, spec.name
                )),
            },
        }
    }
    if errors.is_empty() {
        Ok(resolved)
    } else {
        Err(errors)
    }
}

/// A validated, ready-to-run operation.
#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Grayscale,
    Threshold { t: f64 },
    Otsu { bins: usize },
    DipoleEdgeMap { radius: usize },
    EdgeThreshold { t: f64 },
    Blend { mode: BlendMode, alpha: f64 },
    OverlayEdges { gain: f64 },
    BasRelief(BasRelief),
    EnhanceText(EnhanceParams),
    Highpass { cutoff: f64, softness: f64, renormalize: bool },
    Notch { half_width: f64, guard: f64, axis: NotchAxis, renormalize: bool },
    MaskFilter { renormalize: bool },
    Normalize { lo: f64, hi: f64 },
    SpectrumView { log: bool },
    Encode,
}

fn num(p: &ResolvedParams, key: &str) -> f64 {
    p[key].as_f64().expect("validated number")
}

fn int(p: &ResolvedParams, key: &str) -> i64 {
    p[key].as_i64().expect("validated integer")
}

fn flag(p: &ResolvedParams, key: &str) -> bool {
    p[key].as_bool().expect("validated bool")
}

fn text<'a>(p: &'a ResolvedParams, key: &str) -> &'a str {
    p[key].as_str().expect("validated string")
}

impl Op {
    /// Looks the op up and validates its params.
    pub fn parse(name: &str, params: &Map<String, Value>) -> std::result::Result<(Op, ResolvedParams), Vec<String>> {
        let schema = schema(name).ok_or_else(|| vec![format!("unknown op `{name}`")])?;
        let p = resolve_params(schema, params)?;
        let op = match name {
            "grayscale" => Op::Grayscale,
            "threshold_binary" => Op::Threshold { t: num(&p, "t") },
            "otsu" => Op::Otsu {
                bins: int(&p, "bins") as usize,
            },
            "dipole_edge_map" => Op::DipoleEdgeMap {
                radius: int(&p, "radius") as usize,
            },
            "edge_threshold" => Op::EdgeThreshold { t: num(&p, "t") },
            "blend" => Op::Blend {
                mode: BlendMode::from_name(text(&p, "mode")).expect("validated choice"),
                alpha: num(&p, "alpha"),
            },
            "overlay_edges" => Op::OverlayEdges { gain: num(&p, "gain") },
            "bas_relief" => Op::BasRelief(BasRelief {
                dx: int(&p, "dx") as i32,
                dy: int(&p, "dy") as i32,
                depth: num(&p, "depth"),
                bias: num(&p, "bias"),
            }),
            "enhance_text" => Op::EnhanceText(EnhanceParams {
                threshold: match p["t"].as_f64() {
                    Some(t) => Threshold::Manual(t),
                    None => Threshold::Auto,
                },
                radius: int(&p, "radius") as usize,
                edge_gain: num(&p, "gain"),
                mix: num(&p, "mix"),
            }),
            "highpass_filter" => Op::Highpass {
                cutoff: num(&p, "cutoff"),
                softness: num(&p, "softness"),
                renormalize: flag(&p, "renormalize"),
            },
            "notch_filter" => Op::Notch {
                half_width: num(&p, "half_width"),
                guard: num(&p, "guard"),
                axis: if text(&p, "axis") == "vertical" {
                    NotchAxis::Vertical
                } else {
                    NotchAxis::Horizontal
                },
                renormalize: flag(&p, "renormalize"),
            },
            "mask_filter" => Op::MaskFilter {
                renormalize: flag(&p, "renormalize"),
            },
            "normalize" => {
                let (lo, hi) = (num(&p, "lo"), num(&p, "hi"));
                if lo >= hi {
                    return Err(vec![format!("param `lo` ({lo}) must be below `hi` ({hi})")]);
                }
                Op::Normalize { lo, hi }
            }
            "spectrum_view" => Op::SpectrumView { log: flag(&p, "log") },
            "encode" => Op::Encode,
            other => unreachable!("op `{other}` is in the registry but not constructed"),
        };
        Ok((op, p))
    }

    /// Runs the op. `inputs` holds one raster per schema input slot.
    pub fn apply(&self, inputs: &[&Raster]) -> Result<Raster> {
        let img = inputs[0];
        match *self {
            Op::Grayscale => Ok(img.clone()),
            Op::Threshold { t } => raster::threshold_binary(img, t),
            Op::Otsu { bins } => {
                let t = raster::otsu_threshold(&raster::histogram(img, bins)?)?;
                raster::threshold_binary(img, t)
            }
            Op::DipoleEdgeMap { radius } => Ok(edge::dipole_edge_map(img, radius)?.to_raster()),
            Op::EdgeThreshold { t } => edge::edge_threshold(&EdgeMap::from_raster(img), t),
            Op::Blend { mode, alpha } => compose::blend(img, inputs[1], mode, alpha),
            Op::OverlayEdges { gain } => compose::overlay_edges(img, &EdgeMap::from_raster(inputs[1]), gain),
            Op::BasRelief(ref p) => compose::bas_relief(img, p),
            Op::EnhanceText(ref p) => compose::enhance_text(img, p),
            Op::Highpass {
                cutoff,
                softness,
                renormalize,
            } => spectral::fourier_filter(img, renormalize, |w, h| {
                spectral::make_highpass_mask(w, h, cutoff, softness)
            }),
            Op::Notch {
                half_width,
                guard,
                axis,
                renormalize,
            } => spectral::fourier_filter(img, renormalize, |w, h| {
                spectral::make_axis_notch_mask(w, h, axis, half_width, guard)
            }),
            Op::MaskFilter { renormalize } => spectral::fourier_filter(img, renormalize, |w, h| {
                spectral::mask_from_raster(inputs[1], (w, h))
            }),
            Op::Normalize { lo, hi } => raster::normalize_range(&Field::from(img), lo, hi),
            Op::SpectrumView { log } => Ok(spectral::spectrum_magnitude_view(
                &spectral::forward_spectrum(img),
                log,
            )),
            Op::Encode => {
                let bytes = codec::encode_image(img, codec::ImageFormat::Pgm)?;
                codec::decode_image(&bytes, codec::ImageFormat::Pgm)
            }
        }
    }
}
