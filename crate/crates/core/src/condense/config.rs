use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::{NeighborPolicy, Pool};
use crate::propagation::{FeatureRecipe, Fusion};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "herding")]
    Herding,
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "kcenter")]
    KCenter,
    #[serde(rename = "topk", alias = "topk_prototype")]
    TopkPrototype,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Herding,
        Method::Random,
        Method::KCenter,
        Method::TopkPrototype,
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Herding => "herding",
            Method::Random => "random",
            Method::KCenter => "kcenter",
            Method::TopkPrototype => "topk",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "herding" => Ok(Method::Herding),
            "random" => Ok(Method::Random),
            "kcenter" => Ok(Method::KCenter),
            "topk" | "topk_prototype" => Ok(Method::TopkPrototype),
            other => Err(format!(
                "unknown method `{other}` (expected herding, random, kcenter or topk)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CondensationConfig {
    pub method: Method,
    pub ratio: f64,
    /// Overrides `ratio` with one ratio per class.
    pub class_ratios: Option<Vec<f64>>,
    pub metapaths: Vec<String>,
    pub fusion: Fusion,
    /// Ablation: select on the target type's raw features.
    pub use_raw_features: bool,
    pub seed: Option<u64>,
    pub pool: Pool,
    pub neighbor_policy: NeighborPolicy,
}

impl CondensationConfig {
    pub fn new(method: Method, ratio: f64, metapaths: Vec<String>) -> Self {
        Self {
            method,
            ratio,
            class_ratios: None,
            metapaths,
            fusion: Fusion::default(),
            use_raw_features: false,
            seed: None,
            pool: Pool::default(),
            neighbor_policy: NeighborPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return Err(Error::Config(format!("ratio {} outside (0, 1]", self.ratio)));
        }
        if self.method == Method::Random && self.seed.is_none() {
            return Err(Error::Config("method random requires a seed".into()));
        }
        if !self.use_raw_features && self.metapaths.is_empty() {
            return Err(Error::Config(
                "no metapaths given (pass at least one, or use raw features)".into(),
            ));
        }
        Ok(())
    }

    pub fn recipe(&self) -> FeatureRecipe {
        FeatureRecipe {
            metapaths: self.metapaths.clone(),
            fusion: self.fusion,
            raw: self.use_raw_features,
        }
    }

    /// Features the proxy evaluator uses. The raw-feature ablation only
    /// changes what selection sees; evaluation keeps the metapaths.
    pub fn eval_recipe(&self) -> FeatureRecipe {
        FeatureRecipe::propagated(self.metapaths.clone(), self.fusion)
    }
}

/// Partially specified configuration as read from a file; every key is
/// optional so command-line flags can fill or override it.
///
/// Accepts JSON or `key = value` lines (`#` starts a comment; `metapaths`
/// and `class_ratios` are comma separated).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub method: Option<Method>,
    pub ratio: Option<f64>,
    pub class_ratios: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub metapaths: Option<Vec<String>>,
    pub fusion: Option<Fusion>,
    pub pool: Option<Pool>,
    pub neighbor_policy: Option<String>,
    pub use_raw_features: Option<bool>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()));
        }
        let mut cfg = ConfigFile::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Config(format!("line {}: bad {what} `{value}`", n + 1));
            let list = || value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
            match key {
                "method" => cfg.method = Some(value.parse().map_err(|_| bad("method"))?),
                "ratio" => cfg.ratio = Some(value.parse().map_err(|_| bad("ratio"))?),
                "class_ratios" => {
                    cfg.class_ratios = Some(
                        list()
                            .map(|s| s.parse().map_err(|_| bad("class ratio")))
                            .collect::<Result<_>>()?,
                    )
                }
                "seed" => cfg.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "metapaths" => cfg.metapaths = Some(list().collect()),
                "fusion" => cfg.fusion = Some(value.parse().map_err(|_| bad("fusion"))?),
                "pool" => cfg.pool = Some(value.parse().map_err(|_| bad("pool"))?),
                "neighbor_policy" => cfg.neighbor_policy = Some(value.to_string()),
                "use_raw_features" => {
                    cfg.use_raw_features = Some(value.parse().map_err(|_| bad("boolean"))?)
                }
                other => return Err(Error::Config(format!("line {}: unknown key `{other}`", n + 1))),
            }
        }
        Ok(cfg)
    }

    /// Keys set in `other` replace those in `self`.
    pub fn merge(self, other: ConfigFile) -> ConfigFile {
        ConfigFile {
            method: other.method.or(self.method),
            ratio: other.ratio.or(self.ratio),
            class_ratios: other.class_ratios.or(self.class_ratios),
            seed: other.seed.or(self.seed),
            metapaths: other.metapaths.or(self.metapaths),
            fusion: other.fusion.or(self.fusion),
            pool: other.pool.or(self.pool),
            neighbor_policy: other.neighbor_policy.or(self.neighbor_policy),
            use_raw_features: other.use_raw_features.or(self.use_raw_features),
        }
    }

    /// Fill defaults and validate. `method` and `ratio` have no default.
    pub fn resolve(self) -> Result<CondensationConfig> {
        let method = self
            .method
            .ok_or_else(|| Error::Config("method is required".into()))?;
        let ratio = self
            .ratio
            .ok_or_else(|| Error::Config("ratio is required".into()))?;
        let neighbor_policy = match self.neighbor_policy {
            Some(p) => p.parse().map_err(Error::Config)?,
            None => NeighborPolicy::default(),
        };
        let cfg = CondensationConfig {
            method,
            ratio,
            class_ratios: self.class_ratios,
            metapaths: self.metapaths.unwrap_or_default(),
            fusion: self.fusion.unwrap_or_default(),
            use_raw_features: self.use_raw_features.unwrap_or(false),
            seed: self.seed,
            pool: self.pool.unwrap_or_default(),
            neighbor_policy,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl From<&CondensationConfig> for ConfigFile {
    fn from(c: &CondensationConfig) -> Self {
        ConfigFile {
            method: Some(c.method),
            ratio: Some(c.ratio),
            class_ratios: c.class_ratios.clone(),
            seed: c.seed,
            metapaths: Some(c.metapaths.clone()),
            fusion: Some(c.fusion),
            pool: Some(c.pool),
            neighbor_policy: Some(c.neighbor_policy.to_string()),
            use_raw_features: Some(c.use_raw_features),
        }
    }
}
