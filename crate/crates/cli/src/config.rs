//! Config files and flag overrides.

use std::path::Path;

use p4ladder::numeric::multidim_axis_default;
use p4ladder::P4Config;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::{Failure, MultidimArgs, NumericArgs};

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Overlays the keys of `obj` on `base`; `P4Config` rejects unknown keys.
fn overlay(base: &P4Config, obj: Map<String, Value>) -> Result<P4Config, Failure> {
    let mut merged = match serde_json::to_value(base) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("P4Config serializes to an object"),
    };
    merged.extend(obj);
    let cfg: P4Config =
        serde_json::from_value(Value::Object(merged)).map_err(|e| Failure::Usage(format!("bad config: {e}")))?;
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn as_object(v: Value, what: &str) -> Result<Map<String, Value>, Failure> {
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(Failure::Usage(format!("{what} must be a JSON object"))),
    }
}

pub fn numeric_config(args: &NumericArgs) -> Result<P4Config, Failure> {
    let mut obj = match &args.config {
        Some(path) => {
            let v: Value = serde_json::from_str(&read(path)?)
                .map_err(|e| Failure::Usage(format!("malformed config {}: {e}", path.display())))?;
            as_object(v, "config")?
        }
        None => Map::new(),
    };
    let mut set = |k: &str, v: Option<Value>| {
        if let Some(v) = v {
            obj.insert(k.to_string(), v);
        }
    };
    set("alpha", args.alpha.map(Value::from));
    set("beta", args.beta.map(Value::from));
    set("x0", args.x0.map(Value::from));
    set("f0", args.f0.map(Value::from));
    set("fp0", args.fp0.map(Value::from));
    set("h", args.h.map(Value::from));
    set("n_max", args.n_max.map(Value::from));
    set("fd_order", args.fd_order.map(Value::from));
    set("kind", args.kind.map(|k| Value::from(p4ladder::WeightType::from(k).to_string())));
    overlay(&P4Config::default(), obj)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MultidimFile {
    axes: Vec<Value>,
    #[serde(default)]
    n_max: Option<usize>,
}

pub struct MultidimConfig {
    pub axes: Vec<P4Config>,
    pub n_max: usize,
}

pub const MULTIDIM_DEFAULT_LEVELS: usize = 2;

pub fn multidim_config(args: &MultidimArgs) -> Result<MultidimConfig, Failure> {
    let (axes, file_n_max) = match (&args.config, args.axes) {
        (Some(_), Some(_)) => return Err(Failure::Usage("give either --config or --axes, not both".into())),
        (Some(path), None) => {
            let file: MultidimFile = serde_json::from_str(&read(path)?)
                .map_err(|e| Failure::Usage(format!("malformed config {}: {e}", path.display())))?;
            let axes = file
                .axes
                .into_iter()
                .map(|v| overlay(&multidim_axis_default(), as_object(v, "each axis")?))
                .collect::<Result<Vec<_>, _>>()?;
            (axes, file.n_max)
        }
        (None, n) => (vec![multidim_axis_default(); n.unwrap_or(2)], None),
    };
    if axes.len() < 2 {
        return Err(Failure::Usage(format!("multidim needs at least 2 axes, got {}", axes.len())));
    }
    let n_max = args.n_max.or(file_n_max).unwrap_or(MULTIDIM_DEFAULT_LEVELS);
    Ok(MultidimConfig { axes, n_max })
}
