//! Pipeline configuration file.

use std::path::{Path, PathBuf};

use pcx_core::expansion::ExpansionConfig;
use pcx_core::synthesis::{GeneratorSpec, MixWeights};
use pcx_core::SemanticClass;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::json::from_slice;
use crate::io::read_file;

fn default_dataset_id() -> String {
    "dataset".into()
}

/// Everything a reproducible run needs. Relative paths are resolved against
/// the directory of the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_dataset_id")]
    pub dataset_id: String,
    #[serde(default)]
    pub expansion: ExpansionConfig,
    #[serde(default)]
    pub generators: Vec<GeneratorEntry>,
    #[serde(default)]
    pub bank: BankConfig,
    #[serde(default)]
    pub scenes_dir: Option<PathBuf>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub manifest: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dataset_id: default_dataset_id(),
            expansion: ExpansionConfig::default(),
            generators: Vec::new(),
            bank: BankConfig::default(),
            scenes_dir: None,
            out_dir: None,
            manifest: None,
        }
    }
}

/// One procedural asset to generate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEntry {
    pub class: SemanticClass,
    /// Defaults to the class name.
    #[serde(default)]
    pub prompt: Option<String>,
    pub spec: GeneratorSpec,
}

impl GeneratorEntry {
    pub fn prompt(&self) -> &str {
        self.prompt.as_deref().unwrap_or(self.class.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankConfig {
    #[serde(default)]
    pub dirs: Vec<PathBuf>,
    #[serde(default)]
    pub mix: MixWeights,
}

impl PipelineConfig {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let config: Self = from_slice(bytes)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads, validates and resolves paths relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let mut config = Self::parse(&read_file(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.expansion.validate().map_err(|e| Error::Config(e.to_string()))?;
        for (i, g) in self.generators.iter().enumerate() {
            g.spec
                .validate()
                .map_err(|e| Error::Config(format!("generators[{i}]: {e}")))?;
        }
        if self.bank.mix.generated < 0.0
            || self.bank.mix.external < 0.0
            || self.bank.mix.generated + self.bank.mix.external <= 0.0
        {
            return Err(Error::Config("bank.mix weights must be non-negative and not all zero".into()));
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.bank.dirs.iter_mut().for_each(join);
        self.scenes_dir.iter_mut().for_each(join);
        self.out_dir.iter_mut().for_each(join);
        self.manifest.iter_mut().for_each(join);
    }
}
