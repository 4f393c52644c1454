//! Run configuration as flat `section.key = value` text.
//!
//! Every tunable has a dotted key such as `cpg.motor.v_th` or
//! `physics.contact_stiffness`. Missing keys keep their defaults, unknown keys
//! are rejected, and the resolved configuration is written back in the same
//! format so a run directory always records what produced it.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::astrocyte::AstrocyteParams;
use crate::cpg::CpgParams;
use crate::error::ConfigError;
use crate::physics::{BackendKind, PhysicsBackend, PhysicsParams, ScriptedBackend, SimplifiedQuadruped, StubScript};
use crate::plasticity::PlasticityParams;
use crate::trainer::{SessionConfig, TrainerParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub seed: u64,
    pub sessions: usize,
    pub backend: BackendKind,
    pub out: String,
    /// Sessions between checkpoints; 0 keeps only the final one.
    pub checkpoint_every: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            sessions: 300,
            backend: BackendKind::Simplified,
            out: "runs/default".into(),
            checkpoint_every: 10,
        }
    }
}

/// Parameters of the scripted backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StubSettings {
    pub vel_x: f64,
    pub omega: [f64; 3],
    /// Time after which the torso lies on its side; `none` never topples.
    pub topple_after: Option<f64>,
}

impl Default for StubSettings {
    fn default() -> Self {
        Self {
            vel_x: 1.0,
            omega: [0.0; 3],
            topple_after: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub run: RunSettings,
    pub cpg: CpgParams,
    pub astrocyte: AstrocyteParams,
    pub plasticity: PlasticityParams,
    pub session: SessionConfig,
    pub physics: PhysicsParams,
    pub stub: StubSettings,
}

impl RunConfig {
    /// Load a config file; the name `default` yields the built-in defaults.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        if path.as_os_str() == "default" {
            return Ok(Self::default());
        }
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Apply a `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| ConfigError::invalid(spec, "override must look like key=value"))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let mut root = serde_json::to_value(&*self).expect("config serializes");
        let mut slot = &mut root;
        for part in key.split('.') {
            slot = slot
                .as_object_mut()
                .and_then(|m| m.get_mut(part))
                .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        }
        if slot.is_object() {
            return Err(ConfigError::invalid(key, "names a section, not a value"));
        }
        let parsed = parse_value(value, slot);
        if !compatible(slot, &parsed) {
            return Err(ConfigError::invalid(key, format!("`{value}` does not match the type of {slot}")));
        }
        *slot = parsed;
        *self = serde_json::from_value(root).map_err(|e| ConfigError::invalid(key, e.to_string()))?;
        Ok(())
    }

    /// All keys with their values, one `key = value` line each, sorted.
    pub fn to_text(&self) -> String {
        let root = serde_json::to_value(self).expect("config serializes");
        let mut lines = Vec::new();
        flatten("", &root, &mut lines);
        let mut out = String::new();
        for (k, v) in lines {
            out.push_str(&k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    pub fn keys(&self) -> Vec<String> {
        let root = serde_json::to_value(self).expect("config serializes");
        let mut lines = Vec::new();
        flatten("", &root, &mut lines);
        lines.into_iter().map(|(k, _)| k).collect()
    }

    pub fn trainer_params(&self) -> TrainerParams {
        TrainerParams {
            cpg: self.cpg.clone(),
            astrocyte: self.astrocyte.clone(),
            plasticity: self.plasticity.clone(),
            session: self.session.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.trainer_params().validate()?;
        self.physics.validate()?;
        if self.physics.dt != self.session.dt {
            return Err(ConfigError::invalid("physics.dt", "must equal session.dt"));
        }
        if self.physics.hip_target != self.cpg.hip.target {
            return Err(ConfigError::invalid("physics.hip_target", "must equal cpg.hip.target"));
        }
        if self.run.out.is_empty() {
            return Err(ConfigError::invalid("run.out", "must not be empty"));
        }
        Ok(())
    }

    pub fn build_backend(&self) -> Box<dyn PhysicsBackend> {
        match self.run.backend {
            BackendKind::Simplified => Box::new(SimplifiedQuadruped::new(self.physics.clone(), self.cpg.limits.clone())),
            BackendKind::Stub => Box::new(ScriptedBackend::new(
                StubScript::Steady {
                    vel_x: self.stub.vel_x,
                    omega: self.stub.omega,
                    topple_after: self.stub.topple_after,
                },
                &self.cpg.limits,
                self.cpg.hip.target,
                self.session.dt,
            )),
        }
    }
}

fn parse_value(raw: &str, current: &Value) -> Value {
    if raw == "none" {
        return Value::Null;
    }
    if current.is_string() {
        return Value::String(raw.to_string());
    }
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn compatible(old: &Value, new: &Value) -> bool {
    use Value::*;
    matches!(
        (old, new),
        (Null, _) | (_, Null) | (Bool(_), Bool(_)) | (Number(_), Number(_)) | (String(_), String(_)) | (Array(_), Array(_))
    )
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), "none".into())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
