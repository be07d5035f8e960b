use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};
use thiserror::Error;

use wco::gallery::{self, GalleryError, GalleryItem};
use wco::random::{random_corpus, RandomSpaceConfig};
use wco::{PointSpace, SpaceError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON in {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// JSON space document.
    #[arg(long, value_name = "FILE", conflicts_with = "gallery")]
    pub space: Option<PathBuf>,
    /// Gallery family name (see `wco gallery list`).
    #[arg(long, value_name = "NAME")]
    pub gallery: Option<String>,
    /// Gallery parameter, repeatable.
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    /// Window size for gallery families.
    #[arg(long, default_value_t = 16)]
    pub window: u64,
    /// Number of seeded random spaces.
    #[arg(long, value_name = "N")]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Largest dimension of random spaces.
    #[arg(long, default_value_t = 12)]
    pub max_dim: usize,
}

pub enum Input {
    Space { path: PathBuf, space: PointSpace },
    Gallery { name: String, params: BTreeMap<String, String>, window: u64, item: GalleryItem },
    Random { seed: u64, spaces: Vec<PointSpace>, config: RandomSpaceConfig },
}

impl Input {
    pub fn describe(&self) -> Value {
        match self {
            Input::Space { path, space } => json!({"kind": "space", "path": path, "points": space.len()}),
            Input::Gallery { name, params, window, .. } => json!({"kind": "gallery", "name": name, "params": params, "window": window}),
            Input::Random { seed, spaces, config } => json!({
                "kind": "random", "seed": seed, "count": spaces.len(),
                "min_dim": config.min_dim, "max_dim": config.max_dim, "zero_weight_prob": config.zero_weight_prob,
            }),
        }
    }
}

pub fn read_json(path: &PathBuf) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.clone(), source })
}

pub fn load_space(path: &PathBuf) -> Result<PointSpace, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
    // separate malformed JSON from a well-formed but invalid document
    serde_json::from_str::<Value>(&text).map_err(|source| CliError::Json { path: path.clone(), source })?;
    Ok(PointSpace::from_json(&text)?)
}

pub fn parse_params(raw: &[String]) -> Result<BTreeMap<String, String>, CliError> {
    raw.iter()
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("parameter {kv:?} is not K=V")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

impl InputArgs {
    /// Resolves the input; `allow_none` accepts an empty selection.
    pub fn load(&self, allow_none: bool) -> Result<Option<Input>, CliError> {
        let chosen = usize::from(self.space.is_some()) + usize::from(self.gallery.is_some()) + usize::from(self.random.is_some());
        if chosen > 1 {
            return Err(CliError::Usage("give only one of --space, --gallery and --random".into()));
        }
        if let Some(path) = &self.space {
            return Ok(Some(Input::Space { path: path.clone(), space: load_space(path)? }));
        }
        if let Some(name) = &self.gallery {
            let params = parse_params(&self.params)?;
            let item = gallery::build(name, &params)?;
            return Ok(Some(Input::Gallery { name: name.clone(), params, window: self.window, item }));
        }
        if let Some(count) = self.random {
            let config = self.random_config()?;
            return Ok(Some(Input::Random { seed: self.seed, spaces: random_corpus(self.seed, count, &config), config }));
        }
        if allow_none {
            Ok(None)
        } else {
            Err(CliError::Usage("one of --space, --gallery or --random is required".into()))
        }
    }

    pub fn random_config(&self) -> Result<RandomSpaceConfig, CliError> {
        let config = RandomSpaceConfig { max_dim: self.max_dim, ..RandomSpaceConfig::default() };
        if config.max_dim < config.min_dim {
            return Err(CliError::Usage(format!("--max-dim must be at least {}", config.min_dim)));
        }
        Ok(config)
    }
}

/// An exponent given as a decimal or `p/q`, kept exactly.
#[derive(Debug, Clone)]
pub struct Number {
    pub text: String,
    pub exact: BigRational,
    pub value: f64,
}

pub fn parse_number(name: &str, text: &str) -> Result<Number, CliError> {
    let exact = gallery::parse_rational(name, text)?;
    let value = exact.to_f64().ok_or_else(|| CliError::Usage(format!("{name} out of range")))?;
    Ok(Number { text: text.to_string(), exact, value })
}

pub fn parse_list(name: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',').filter(|t| !t.trim().is_empty()).map(|t| parse_number(name, t).map(|n| n.value)).collect()
}
