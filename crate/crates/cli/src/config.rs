//! Experiment config files: TOML, versioned, strictly parsed.
//!
//! Sections that have task- or planner-dependent defaults (`params`, `biped`, `planner`) are
//! merged key by key onto those defaults, so a file only lists what it changes.

use std::fmt;
use std::path::{Path, PathBuf};

use horizon_bench::cost::CostSpec;
use horizon_bench::planners::{PlannerConfig, PlannerKind};
use horizon_bench::sim::BipedParams;
use horizon_bench::tasks::{CostVariant, TaskId, TaskParams, TaskSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

pub const VERSION: u32 = 1;
pub const DEFAULT_SWEEP_LENGTHS: [f64; 6] = [2.0, 4.0, 8.0, 12.0, 16.0, 20.0];

/// A config or usage problem. The CLI maps it to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: u32,
    name: String,
    task: TaskId,
    variant: CostVariant,
    episode_length_s: Option<f64>,
    seeds: Option<Vec<u64>>,
    sweep_lengths_s: Option<Vec<f64>>,
    out: Option<PathBuf>,
    planner: Option<Table>,
    params: Option<Table>,
    biped: Option<Table>,
    cost: Option<CostSpec>,
    #[serde(default)]
    bench: Vec<RawCell>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCell {
    task: TaskId,
    #[serde(default = "ours")]
    variant: CostVariant,
    planner: PlannerKind,
    iterations: usize,
    horizon_s: f64,
    episode_length_s: Option<f64>,
}

fn ours() -> CostVariant {
    CostVariant::Ours
}

/// One row of a bench grid: a (task, planner, iterations, horizon) combination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchCell {
    pub task: TaskId,
    pub variant: CostVariant,
    pub episode_length_s: f64,
    pub planner: PlannerConfig,
}

/// A fully resolved experiment: every default filled in, every id checked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment {
    pub version: u32,
    pub name: String,
    pub task: TaskId,
    pub variant: CostVariant,
    pub episode_length_s: f64,
    pub seeds: Vec<u64>,
    pub sweep_lengths_s: Vec<f64>,
    pub out: Option<PathBuf>,
    pub planner: PlannerConfig,
    pub params: TaskParams,
    pub biped: BipedParams,
    pub cost: CostSpec,
    pub bench: Vec<BenchCell>,
}

impl Experiment {
    pub fn task_spec(&self) -> Result<TaskSpec, ConfigError> {
        TaskSpec::new(self.task, self.variant, self.biped.clone(), self.params.clone(), Some(self.cost.clone()))
            .map_err(|e| err(e.to_string()))
    }

    pub fn cell_task_spec(&self, cell: &BenchCell) -> Result<TaskSpec, ConfigError> {
        TaskSpec::with_defaults(cell.task, cell.variant).map_err(|e| err(e.to_string()))
    }

    /// The resolved config as a JSON value, for embedding in reports.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("experiment serializes")
    }
}

pub fn load(path: &Path, sets: &[String]) -> Result<Experiment, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| err(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text, sets).map_err(|e| err(format!("{}: {e}", path.display())))
}

/// Parses config text, applies `dotted.key=value` overrides, then resolves and validates.
pub fn parse(text: &str, sets: &[String]) -> Result<Experiment, ConfigError> {
    let mut doc: Table = text.parse().map_err(|e: toml::de::Error| err(e.to_string()))?;
    if sets.is_empty() {
        // typed pass on the untouched text keeps line numbers in the diagnostics
        RawConfig::deserialize(toml::Deserializer::new(text)).map_err(|e| err(e.to_string()))?;
    }
    for s in sets {
        apply_set(&mut doc, s)?;
    }
    let raw: RawConfig = Value::Table(doc).try_into().map_err(|e: toml::de::Error| err(e.to_string()))?;
    resolve(raw)
}

/// Sets `a.b.c = value` in the document. The value is read as a TOML value, or as a bare
/// string when it does not parse as one.
pub fn apply_set(doc: &mut Table, assignment: &str) -> Result<(), ConfigError> {
    let (key, value) = assignment.split_once('=').ok_or_else(|| err(format!("--set expects KEY=VALUE, got '{assignment}'")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(err(format!("--set has a malformed key '{key}'")));
    }
    let value = match format!("v = {}", value.trim()).parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(value.trim().to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut table = doc;
    for (i, part) in parts[..parts.len() - 1].iter().enumerate() {
        let entry = table.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        table = entry.as_table_mut().ok_or_else(|| err(format!("--set {key}: '{}' is not a table", parts[..=i].join("."))))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Serializes `base`, overlays `patch` key by key, and deserializes the result strictly.
fn merged<T: Serialize + DeserializeOwned + Clone>(section: &str, base: &T, patch: Option<Table>) -> Result<T, ConfigError> {
    let Some(patch) = patch else {
        return Ok(base.clone());
    };
    let mut value = Value::try_from(base).map_err(|e| err(e.to_string()))?;
    overlay(value.as_table_mut().expect("struct serializes to a table"), patch);
    T::deserialize(value).map_err(|e| err(format!("in [{section}]: {e}")))
}

fn overlay(base: &mut Table, patch: Table) {
    for (k, v) in patch {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(p)) => overlay(b, p),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn planner_defaults(kind: PlannerKind) -> PlannerConfig {
    match kind {
        PlannerKind::Ilqg => PlannerConfig::default(),
        PlannerKind::Sampling => PlannerConfig::sampling(),
    }
}

fn check_length(what: &str, length: f64, control_dt: f64) -> Result<(), ConfigError> {
    let steps = length / control_dt;
    if !(length > 0.0) || (steps - steps.round()).abs() > 1e-9 {
        return Err(err(format!("{what} = {length} s is not a positive multiple of the control step {control_dt} s")));
    }
    Ok(())
}

fn resolve(raw: RawConfig) -> Result<Experiment, ConfigError> {
    if raw.version != VERSION {
        return Err(err(format!("unsupported config version {}, expected {VERSION}", raw.version)));
    }
    let kind = match raw.planner.as_ref().and_then(|t| t.get("kind")) {
        Some(v) => PlannerKind::deserialize(v.clone()).map_err(|e| err(format!("in [planner]: kind: {e}")))?,
        None if raw.task == TaskId::Push => PlannerKind::Sampling,
        None => PlannerKind::Ilqg,
    };
    let planner = merged("planner", &planner_defaults(kind), raw.planner)?;
    planner.validate().map_err(|e| err(format!("in [planner]: {e}")))?;
    let params = merged("params", &TaskParams::defaults_for(raw.task), raw.params)?;
    let biped = merged("biped", &BipedParams::default(), raw.biped)?;
    let episode_length_s = raw.episode_length_s.unwrap_or(params.episode_length_s);
    let seeds = raw.seeds.unwrap_or_else(|| (0..6).collect());
    if seeds.is_empty() {
        return Err(err("seeds must not be empty"));
    }
    let sweep_lengths_s = raw.sweep_lengths_s.unwrap_or_else(|| DEFAULT_SWEEP_LENGTHS.to_vec());
    if sweep_lengths_s.is_empty() || sweep_lengths_s.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(err("sweep_lengths_s must be non-empty and strictly ascending"));
    }
    check_length("episode_length_s", episode_length_s, biped.control_dt)?;
    for &l in &sweep_lengths_s {
        check_length("sweep_lengths_s entry", l, biped.control_dt)?;
    }

    let spec = TaskSpec::new(raw.task, raw.variant, biped.clone(), params.clone(), raw.cost).map_err(|e| err(e.to_string()))?;
    let mut bench = Vec::with_capacity(raw.bench.len());
    for (i, c) in raw.bench.into_iter().enumerate() {
        let planner = PlannerConfig { iterations: c.iterations, horizon_s: c.horizon_s, ..planner_defaults(c.planner) };
        planner.validate().map_err(|e| err(format!("bench cell {i}: {e}")))?;
        let length = c.episode_length_s.unwrap_or(episode_length_s);
        check_length(&format!("bench cell {i} episode_length_s"), length, BipedParams::default().control_dt)?;
        bench.push(BenchCell { task: c.task, variant: c.variant, episode_length_s: length, planner });
    }
    Ok(Experiment {
        version: raw.version,
        name: raw.name,
        task: raw.task,
        variant: raw.variant,
        episode_length_s,
        seeds,
        sweep_lengths_s,
        out: raw.out,
        planner,
        params,
        biped,
        cost: spec.cost,
        bench,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "version = 1\nname = \"t\"\ntask = \"stand\"\nvariant = \"ours\"\n";

    #[test]
    fn minimal_config_takes_defaults() {
        let e = parse(MINIMAL, &[]).unwrap();
        assert_eq!(e.seeds, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(e.planner, PlannerConfig::default());
        assert_eq!(e.episode_length_s, 8.0);
        assert_eq!(e.sweep_lengths_s, DEFAULT_SWEEP_LENGTHS.to_vec());
    }

    #[test]
    fn push_defaults_to_sampling() {
        let e = parse(&MINIMAL.replace("stand", "push"), &[]).unwrap();
        assert_eq!(e.planner, PlannerConfig::sampling());
        assert_eq!(e.params, TaskParams::defaults_for(TaskId::Push));
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = parse(&format!("{MINIMAL}colour = 3\n"), &[]).unwrap_err();
        assert!(e.0.contains("colour") && e.0.contains("line 5"), "{e}");
        let e = parse(&format!("{MINIMAL}[params]\nwalk_speed = 1.0\n"), &[]).unwrap_err();
        assert!(e.0.contains("walk_speed"), "{e}");
        let e = parse(MINIMAL, &["planner.horizon = 1".into()]).unwrap_err();
        assert!(e.0.contains("horizon"), "{e}");
    }

    #[test]
    fn overrides_apply_before_validation() {
        let e = parse(MINIMAL, &["planner.iterations=4".into(), "seeds=[3]".into(), "variant=hb".into(), "params.joint_noise=0".into()]).unwrap();
        assert_eq!(e.planner.iterations, 4);
        assert_eq!(e.seeds, vec![3]);
        assert_eq!(e.variant, CostVariant::Hb);
        assert_eq!(e.params.joint_noise, 0.0);
        assert!(parse(MINIMAL, &["planner.iterations=0".into()]).is_err());
        assert!(parse(MINIMAL, &["novalue".into()]).is_err());
    }

    #[test]
    fn lengths_must_be_whole_steps() {
        assert!(parse(MINIMAL, &["episode_length_s=0.031".into()]).is_err());
        assert!(parse(MINIMAL, &["sweep_lengths_s=[4.0, 2.0]".into()]).is_err());
        assert!(parse(MINIMAL, &["version=2".into()]).is_err());
    }
}
