//! Declarative TOML configuration: model tables, scenarios and scenario
//! grids.
//!
//! Parsing is strict: unknown keys are rejected everywhere. A model is a
//! list of rows `{ mechanism, effect, covariate?, parameter, period? }`
//! where `mechanism` is `network` or `behavior` and the effect `rate`
//! sets the rate parameter of the sub-model (optionally per period).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::EstimationOptions;
use crate::model::{Centering, Effect, EffectKind, ModelSpec, Target};
use crate::perturb::{MissingPolicy, TurnoverPolicy};
use crate::power::{Design, ScenarioSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRow {
    pub mechanism: Target,
    pub effect: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariate: Option<String>,
    pub parameter: f64,
    /// 1-based period for rate rows; omitted rates apply to every period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelTable {
    pub rows: Vec<ModelRow>,
}

/// Replacement of one effect parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Override {
    pub effect: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariate: Option<String>,
    pub parameter: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<Override>,
    pub design: Design,
    #[serde(default)]
    pub missing: MissingPolicy,
    #[serde(default)]
    pub turnover: TurnoverPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub focal: Vec<String>,
}

/// Cartesian product of models, missing counts and turnover counts over a
/// shared design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub prefix: String,
    pub models: Vec<String>,
    pub design: Design,
    #[serde(default = "zero_list")]
    pub missing: Vec<usize>,
    #[serde(default = "zero_list")]
    pub turnover: Vec<usize>,
    #[serde(default = "half")]
    pub turnover_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub focal: Vec<String>,
}

fn zero_list() -> Vec<usize> {
    vec![0]
}

fn half() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub estimation: EstimationOptions,
    pub models: BTreeMap<String, ModelTable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scenarios: Vec<ScenarioConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grids: Vec<GridConfig>,
}

fn default_replications() -> usize {
    200
}

fn default_alpha() -> f64 {
    0.05
}

impl ModelTable {
    /// Builds the model; errors name the offending row.
    pub fn to_model(&self, name: &str) -> Result<ModelSpec> {
        let mut model = ModelSpec {
            network_effects: Vec::new(),
            behavior_effects: Vec::new(),
            network_rate: Vec::new(),
            behavior_rate: Vec::new(),
            centering: Centering::default(),
        };
        let mut per_period: [BTreeMap<usize, f64>; 2] = Default::default();
        let mut uniform: [Option<f64>; 2] = [None, None];
        for (r, row) in self.rows.iter().enumerate() {
            let at =
                |msg: String| Error::Config(format!("model `{name}` row {} (effect `{}`): {msg}", r + 1, row.effect));
            let slot = usize::from(row.mechanism == Target::Behavior);
            if row.effect == "rate" {
                if row.covariate.is_some() {
                    return Err(at("rate rows take no covariate".into()));
                }
                match row.period {
                    Some(0) => return Err(at("periods are numbered from 1".into())),
                    Some(p) => {
                        if per_period[slot].insert(p, row.parameter).is_some() {
                            return Err(at("rate given twice for the same period".into()));
                        }
                    }
                    None => {
                        if uniform[slot].replace(row.parameter).is_some() {
                            return Err(at("rate given twice".into()));
                        }
                    }
                }
                continue;
            }
            if row.period.is_some() {
                return Err(at("only rate rows take a period".into()));
            }
            let kind = EffectKind::parse(&row.effect, row.covariate.as_deref()).map_err(|e| at(e.to_string()))?;
            if kind.target() != row.mechanism {
                return Err(at(format!("effect belongs to the {:?} sub-model", kind.target())));
            }
            let effect = Effect::new(kind, row.parameter);
            match row.mechanism {
                Target::Network => model.network_effects.push(effect),
                Target::Behavior => model.behavior_effects.push(effect),
            }
        }
        for slot in 0..2 {
            let rates = if per_period[slot].is_empty() {
                uniform[slot].into_iter().collect()
            } else {
                if uniform[slot].is_some() {
                    return Err(Error::Config(format!(
                        "model `{name}`: mix of uniform and per-period rates"
                    )));
                }
                let n = *per_period[slot].keys().last().unwrap();
                (1..=n)
                    .map(|p| {
                        per_period[slot]
                            .get(&p)
                            .copied()
                            .ok_or_else(|| Error::Config(format!("model `{name}`: rate for period {p} missing")))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            if slot == 0 {
                model.network_rate = rates;
            } else {
                model.behavior_rate = rates;
            }
        }
        model
            .validate()
            .map_err(|e| Error::Config(format!("model `{name}`: {e}")))?;
        Ok(model)
    }

    /// Table rows of a model, the inverse of [`ModelTable::to_model`].
    pub fn from_model(model: &ModelSpec) -> Self {
        let mut rows = Vec::new();
        let rates = |mechanism: Target, rates: &[f64]| {
            let uniform = rates.len() == 1;
            rates
                .iter()
                .enumerate()
                .map(|(p, &r)| ModelRow {
                    mechanism,
                    effect: "rate".into(),
                    covariate: None,
                    parameter: r,
                    period: (!uniform).then_some(p + 1),
                })
                .collect::<Vec<_>>()
        };
        rows.extend(rates(Target::Network, &model.network_rate));
        let effect_row = |mechanism: Target, e: &Effect| ModelRow {
            mechanism,
            effect: e.kind.short_name().into(),
            covariate: e.kind.covariate().map(str::to_string),
            parameter: e.parameter,
            period: None,
        };
        rows.extend(model.network_effects.iter().map(|e| effect_row(Target::Network, e)));
        rows.extend(rates(Target::Behavior, &model.behavior_rate));
        rows.extend(model.behavior_effects.iter().map(|e| effect_row(Target::Behavior, e)));
        Self { rows }
    }
}

fn apply_overrides(model: &mut ModelSpec, overrides: &[Override], scenario: &str) -> Result<()> {
    for o in overrides {
        let kind = EffectKind::parse(&o.effect, o.covariate.as_deref())
            .map_err(|e| Error::Config(format!("scenario `{scenario}` override: {e}")))?;
        let effect = model.effect_mut(&kind).ok_or_else(|| {
            Error::Config(format!(
                "scenario `{scenario}` overrides `{kind}`, which is not in the model"
            ))
        })?;
        effect.parameter = o.parameter;
    }
    Ok(())
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks that every model builds and every scenario resolves.
    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() && self.grids.is_empty() {
            return Err(Error::Config("config defines no scenarios".into()));
        }
        self.scenarios().map(|_| ())
    }

    pub fn model(&self, name: &str) -> Result<ModelSpec> {
        self.models
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown model `{name}`")))?
            .to_model(name)
    }

    /// All scenarios, explicit ones first, then grid expansions.
    pub fn scenarios(&self) -> Result<Vec<ScenarioSpec>> {
        let mut out = Vec::new();
        for s in &self.scenarios {
            let mut model = self
                .model(&s.model)
                .map_err(|e| Error::Config(format!("scenario `{}`: {e}", s.id)))?;
            apply_overrides(&mut model, &s.overrides, &s.id)?;
            out.push(ScenarioSpec {
                id: s.id.clone(),
                model,
                design: s.design.clone(),
                missing: s.missing.clone(),
                turnover: s.turnover.clone(),
                replications: s.replications.unwrap_or(self.replications),
                alpha: s.alpha.unwrap_or(self.alpha),
                focal_effects: s.focal.clone(),
                seed: self.seed,
                estimation: self.estimation.clone(),
            });
        }
        for g in &self.grids {
            for name in &g.models {
                let model = self
                    .model(name)
                    .map_err(|e| Error::Config(format!("grid `{}`: {e}", g.prefix)))?;
                for &t in &g.turnover {
                    for &m in &g.missing {
                        out.push(ScenarioSpec {
                            id: format!("{}-{name}-t{t}-m{m}", g.prefix),
                            model: model.clone(),
                            design: g.design.clone(),
                            missing: MissingPolicy { per_group_count: m },
                            turnover: TurnoverPolicy {
                                per_group_count: t,
                                time: g.turnover_time,
                            },
                            replications: g.replications.unwrap_or(self.replications),
                            alpha: g.alpha.unwrap_or(self.alpha),
                            focal_effects: g.focal.clone(),
                            seed: self.seed,
                            estimation: self.estimation.clone(),
                        });
                    }
                }
            }
        }
        for s in &out {
            s.validate().map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("scenario `{}`: {msg}", s.id)),
                other => other,
            })?;
        }
        let mut ids: Vec<&str> = out.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate scenario id `{}`", w[0])));
        }
        Ok(out)
    }

    pub fn scenario(&self, id: &str) -> Result<ScenarioSpec> {
        self.scenarios()?
            .into_iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{id}`")))
    }
}
