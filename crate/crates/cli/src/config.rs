//! Run configuration: a TOML file, overridden by environment and flags.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;

use unithood::counts::ProviderConfig;
use unithood::extract::ExtractConfig;
use unithood::measures::{OuConfig, UhThresholds};
use unithood::CountProvider;

use crate::{usage, ExtractArgs, ProviderArgs};

/// Overrides the provider cache path. A `--cache` flag still wins.
pub const CACHE_ENV: &str = "UNITHOOD_CACHE";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ExtractSection {
    prepositions: Option<Vec<String>>,
    split_proper_common: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rounds: usize,
    pub provider: ProviderConfig,
    pub ou: OuConfig,
    pub uh: UhThresholds,
    extract: ExtractSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rounds: 1,
            provider: ProviderConfig::default(),
            ou: OuConfig::default(),
            uh: UhThresholds::default(),
            extract: ExtractSection::default(),
        }
    }
}

impl RunConfig {
    /// Reads `path` if given, then applies the cache environment variable.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
            cfg.provider.cache_path = Some(v.into());
        }
        Ok(cfg)
    }

    pub fn with_provider_args(mut self, a: &ProviderArgs) -> Self {
        let p = &mut self.provider;
        if let Some(k) = a.provider {
            p.kind = k.into();
        }
        if a.index.is_some() {
            p.index.clone_from(&a.index);
        }
        if a.endpoint.is_some() {
            p.endpoint_template.clone_from(&a.endpoint);
        }
        if a.count_path.is_some() {
            p.count_field_path.clone_from(&a.count_path);
        }
        if a.cache.is_some() {
            p.cache_path.clone_from(&a.cache);
        }
        if let Some(r) = a.rate_limit {
            p.rate_limit = r;
        }
        if a.fixed_n.is_some() {
            p.fixed_n = a.fixed_n;
        }
        if a.function_words.is_some() {
            p.function_words.clone_from(&a.function_words);
        }
        self
    }

    pub fn with_extract_args(mut self, a: &ExtractArgs) -> Self {
        if a.prepositions.is_some() {
            self.extract.prepositions.clone_from(&a.prepositions);
        }
        if a.no_split_proper {
            self.extract.split_proper_common = Some(false);
        }
        self
    }

    pub fn extract_config(&self) -> ExtractConfig {
        let mut cfg = ExtractConfig::default();
        if let Some(p) = &self.extract.prepositions {
            cfg = cfg.with_prepositions(p);
        }
        if let Some(split) = self.extract.split_proper_common {
            cfg.split_proper_common = split;
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(usage("rounds must be at least 1"));
        }
        self.ou.validate().map_err(|e| usage(e.to_string()))?;
        self.uh.validate().map_err(|e| usage(e.to_string()))?;
        self.provider.validate().map_err(|e| usage(e.to_string()))?;
        Ok(())
    }

    /// Builds the configured provider. Invalid settings are usage errors;
    /// failures opening the index or cache are data errors.
    pub fn build_provider(&self) -> Result<Box<dyn CountProvider>> {
        self.provider.validate().map_err(|e| usage(e.to_string()))?;
        Ok(self.provider.build()?)
    }
}
