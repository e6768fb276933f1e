//! Scenario documents: one `section.key = value` per line, `#` comments.
//!
//! ```text
//! # quarantine at 5%, release at 1%, half the workforce essential
//! run.seed = 7
//! intervention.enabled = true
//! intervention.essential_fraction = 0.5
//! behavior.store_visits_per_week = 0, 0.5, 2, 2, 2, 2, 1.5, 1
//! ```
//!
//! Every key has a default; unknown keys are rejected.

use std::path::Path;
use std::str::FromStr;

use crate::engine::{ExecutionMode, ScenarioConfig};
use crate::error::{Error, Result};
use crate::intervention::ReturnMode;

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "run.label",
    "run.seed",
    "run.horizon_days",
    "run.r0_window_days",
    "run.seed_index_case",
    "run.parallel",
    "disease.lambda_contagion",
    "disease.days_no_symptoms",
    "disease.days_showing_symptoms",
    "behavior.store_visits_per_week",
    "behavior.store_kind_mix",
    "behavior.friend_visit_prob",
    "behavior.symptomatic_stay_home_prob",
    "behavior.panic_store_visit_prob",
    "intervention.enabled",
    "intervention.quarantine_start_frac",
    "intervention.quarantine_end_frac",
    "intervention.essential_fraction",
    "intervention.return_mode",
    "intervention.gradual_days",
    "intervention.panic_enabled",
    "intervention.panic_days",
    "intervention.release_enabled",
    "synthesis.scale",
    "synthesis.proximity_factor",
    "synthesis.friend_count",
    "synthesis.friend_radius",
    "synthesis.seed",
    "synthesis.age_distribution",
    "synthesis.employment",
];

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or_default().trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config {
                line,
                key: content.to_string(),
                reason: "expected `section.key = value`".into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        set(&mut cfg, key, value).map_err(|reason| Error::Config {
            line,
            key: key.to_string(),
            reason,
        })?;
    }
    cfg.validate().map_err(|e| match e {
        Error::InvalidParam { key, reason } => Error::Config {
            line: 0,
            key: full_key(key),
            reason,
        },
        other => other,
    })?;
    Ok(cfg)
}

/// Maps a field name reported by validation back to its document key.
fn full_key(field: &str) -> String {
    KEYS.iter()
        .find(|k| k.rsplit('.').next() == Some(field))
        .map_or_else(|| field.to_string(), |k| k.to_string())
}

type Parsed<T> = std::result::Result<T, String>;

fn scalar<T: FromStr>(v: &str) -> Parsed<T> {
    v.parse()
        .map_err(|_| format!("cannot parse `{v}` as {}", std::any::type_name::<T>()))
}

fn boolean(v: &str) -> Parsed<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

fn list<const N: usize>(v: &str) -> Parsed<[f64; N]> {
    let items = v
        .split(',')
        .map(|t| scalar::<f64>(t.trim()))
        .collect::<Parsed<Vec<f64>>>()?;
    let len = items.len();
    items
        .try_into()
        .map_err(|_| format!("expected {N} comma-separated values, got {len}"))
}

fn set(cfg: &mut ScenarioConfig, key: &str, v: &str) -> Parsed<()> {
    match key {
        "run.label" => cfg.label = v.to_string(),
        "run.seed" => cfg.seed = scalar(v)?,
        "run.horizon_days" => cfg.horizon_days = scalar(v)?,
        "run.r0_window_days" => cfg.r0_window_days = scalar(v)?,
        "run.seed_index_case" => cfg.seed_index_case = boolean(v)?,
        "run.parallel" => {
            cfg.execution = if boolean(v)? {
                ExecutionMode::Parallel
            } else {
                ExecutionMode::Sequential
            }
        }
        "disease.lambda_contagion" => cfg.disease.lambda_contagion = scalar(v)?,
        "disease.days_no_symptoms" => cfg.disease.days_no_symptoms = scalar(v)?,
        "disease.days_showing_symptoms" => cfg.disease.days_showing_symptoms = scalar(v)?,
        "behavior.store_visits_per_week" => cfg.behavior.store_visits_per_week = list(v)?,
        "behavior.store_kind_mix" => cfg.behavior.store_kind_mix = list(v)?,
        "behavior.friend_visit_prob" => cfg.behavior.friend_visit_prob = list(v)?,
        "behavior.symptomatic_stay_home_prob" => {
            cfg.behavior.symptomatic_stay_home_prob = scalar(v)?
        }
        "behavior.panic_store_visit_prob" => cfg.behavior.panic_store_visit_prob = scalar(v)?,
        "intervention.enabled" => cfg.intervention.enabled = boolean(v)?,
        "intervention.quarantine_start_frac" => {
            cfg.intervention.quarantine_start_frac = scalar(v)?
        }
        "intervention.quarantine_end_frac" => cfg.intervention.quarantine_end_frac = scalar(v)?,
        "intervention.essential_fraction" => cfg.intervention.essential_fraction = scalar(v)?,
        "intervention.return_mode" => {
            cfg.intervention.return_mode = ReturnMode::parse(v)
                .ok_or_else(|| format!("expected immediate or gradual, got `{v}`"))?
        }
        "intervention.gradual_days" => cfg.intervention.gradual_days = scalar(v)?,
        "intervention.panic_enabled" => cfg.intervention.panic_enabled = boolean(v)?,
        "intervention.panic_days" => cfg.intervention.panic_days = scalar(v)?,
        "intervention.release_enabled" => cfg.intervention.release_enabled = boolean(v)?,
        "synthesis.scale" => cfg.synthesis.scale = scalar(v)?,
        "synthesis.proximity_factor" => cfg.synthesis.proximity_factor = scalar(v)?,
        "synthesis.friend_count" => cfg.synthesis.friend_count = scalar(v)?,
        "synthesis.friend_radius" => cfg.synthesis.friend_radius = scalar(v)?,
        "synthesis.seed" => cfg.synthesis.seed = scalar(v)?,
        "synthesis.age_distribution" => cfg.synthesis.age_distribution.0 = list(v)?,
        "synthesis.employment" => cfg.synthesis.employment.0 = list(v)?,
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

/// Renders a config back into document form, every key included.
pub fn render_scenario(cfg: &ScenarioConfig) -> String {
    fn join<const N: usize>(xs: &[f64; N]) -> String {
        xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
    }
    let b = &cfg.behavior;
    let d = &cfg.disease;
    let iv = &cfg.intervention;
    let s = &cfg.synthesis;
    let lines = [
        format!("run.label = {}", cfg.label),
        format!("run.seed = {}", cfg.seed),
        format!("run.horizon_days = {}", cfg.horizon_days),
        format!("run.r0_window_days = {}", cfg.r0_window_days),
        format!("run.seed_index_case = {}", cfg.seed_index_case),
        format!("run.parallel = {}", cfg.execution == ExecutionMode::Parallel),
        format!("disease.lambda_contagion = {}", d.lambda_contagion),
        format!("disease.days_no_symptoms = {}", d.days_no_symptoms),
        format!("disease.days_showing_symptoms = {}", d.days_showing_symptoms),
        format!("behavior.store_visits_per_week = {}", join(&b.store_visits_per_week)),
        format!("behavior.store_kind_mix = {}", join(&b.store_kind_mix)),
        format!("behavior.friend_visit_prob = {}", join(&b.friend_visit_prob)),
        format!("behavior.symptomatic_stay_home_prob = {}", b.symptomatic_stay_home_prob),
        format!("behavior.panic_store_visit_prob = {}", b.panic_store_visit_prob),
        format!("intervention.enabled = {}", iv.enabled),
        format!("intervention.quarantine_start_frac = {}", iv.quarantine_start_frac),
        format!("intervention.quarantine_end_frac = {}", iv.quarantine_end_frac),
        format!("intervention.essential_fraction = {}", iv.essential_fraction),
        format!("intervention.return_mode = {}", iv.return_mode.label()),
        format!("intervention.gradual_days = {}", iv.gradual_days),
        format!("intervention.panic_enabled = {}", iv.panic_enabled),
        format!("intervention.panic_days = {}", iv.panic_days),
        format!("intervention.release_enabled = {}", iv.release_enabled),
        format!("synthesis.scale = {}", s.scale),
        format!("synthesis.proximity_factor = {}", s.proximity_factor),
        format!("synthesis.friend_count = {}", s.friend_count),
        format!("synthesis.friend_radius = {}", s.friend_radius),
        format!("synthesis.seed = {}", s.seed),
        format!("synthesis.age_distribution = {}", join(&s.age_distribution.0)),
        format!("synthesis.employment = {}", join(&s.employment.0)),
    ];
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
