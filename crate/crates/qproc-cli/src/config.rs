//! Experiment configuration: a single JSON document naming the target
//! channel, processor, cost function, optimizer and an optional parameter
//! sweep. Command-line flags override individual fields.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use qproc::costs::CostKind;
use qproc::io::{ChannelSpec, ProcessorSpec};
use qproc::optim::{Constraint, OptimizerConfig, Schedule};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub channel: ChannelSpec,
    pub processor: ProcessorSpec,
    #[serde(default)]
    pub cost: CostSpec,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output_path: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostSpec {
    Trace,
    Infidelity,
    SmoothTrace { mu: f64 },
}

impl Default for CostSpec {
    fn default() -> Self {
        CostSpec::Trace
    }
}

impl CostSpec {
    pub fn kind(&self) -> CostKind {
        match self {
            CostSpec::Trace => CostKind::Trace,
            CostSpec::Infidelity => CostKind::Infidelity,
            CostSpec::SmoothTrace { mu } => CostKind::SmoothTrace { mu: *mu },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ps,
    Fw,
    FwLs,
    SmoothedFw,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScheduleSpec {
    InvSqrt { c: f64 },
    Harmonic { a: f64, b: f64 },
    FwClassic,
    Geometric { a0: f64, rho: f64 },
}

impl ScheduleSpec {
    fn schedule(&self) -> Schedule {
        match self {
            ScheduleSpec::InvSqrt { c } => Schedule::InvSqrt { c: *c },
            ScheduleSpec::Harmonic { a, b } => Schedule::Harmonic { a: *a, b: *b },
            ScheduleSpec::FwClassic => Schedule::FwClassic,
            ScheduleSpec::Geometric { a0, rho } => Schedule::Geometric { a0: *a0, rho: *rho },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSpec {
    Full,
    ChoiSet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerSpec {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default = "default_constraint")]
    pub constraint: ConstraintSpec,
    #[serde(default = "default_eta")]
    pub eta_scale: f64,
    #[serde(default)]
    pub early_stop: bool,
}

fn default_method() -> Method {
    Method::Ps
}
fn default_iterations() -> usize {
    500
}
fn default_constraint() -> ConstraintSpec {
    ConstraintSpec::Full
}
fn default_eta() -> f64 {
    1.0
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        Self {
            method: default_method(),
            iterations: default_iterations(),
            seed: 0,
            schedule: None,
            constraint: default_constraint(),
            eta_scale: default_eta(),
            early_stop: false,
        }
    }
}

impl OptimizerSpec {
    pub fn build(&self, choi_d: usize) -> OptimizerConfig {
        let schedule = match &self.schedule {
            Some(s) => s.schedule(),
            None => match self.method {
                Method::Ps => Schedule::Harmonic { a: 1.0, b: 10.0 },
                _ => Schedule::FwClassic,
            },
        };
        let constraint = match self.constraint {
            ConstraintSpec::Full => Constraint::FullStates,
            ConstraintSpec::ChoiSet => Constraint::ChoiSet { d: choi_d },
        };
        OptimizerConfig {
            iterations: self.iterations,
            schedule,
            seed: self.seed,
            constraint,
            smoothing_eta_scale: self.eta_scale,
            early_stop: self.early_stop,
            keep_iterates: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: String,
    pub values: Vec<f64>,
}

/// Rebuild a channel spec with one named parameter replaced, for sweeps.
pub fn channel_with_param(spec: &ChannelSpec, param: &str, value: f64) -> anyhow::Result<ChannelSpec> {
    let mut json = serde_json::to_value(spec).context("serializing channel spec")?;
    let obj = json.as_object_mut().context("channel spec is not an object")?;
    if !obj.contains_key(param) {
        bail!("channel spec has no parameter `{param}`");
    }
    obj.insert(param.to_string(), serde_json::json!(value));
    let rebuilt: ChannelSpec = serde_json::from_value(json).context("rebuilding channel spec")?;
    Ok(rebuilt)
}
