//! Object bank directories: PLY assets plus a `bank.json` index.

use std::path::Path;

use pcx_core::synthesis::{generate, MixWeights, ObjectBank};
use pcx_core::{ObjectAsset, Provenance, SemanticClass};
use serde::{Deserialize, Serialize};

use crate::config::GeneratorEntry;
use crate::error::{Error, Result};
use crate::io::json::{from_slice, to_pretty};
use crate::io::ply::{read_ply, write_ply, Encoding};
use crate::io::{read_file, write_atomic};

pub const BANK_INDEX: &str = "bank.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankIndex {
    pub assets: Vec<BankEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankEntry {
    /// PLY file name relative to the bank directory.
    pub file: String,
    pub class: SemanticClass,
    pub prompt: String,
    pub provenance: Provenance,
    #[serde(default)]
    pub generator_name: String,
    #[serde(default)]
    pub seed: u64,
}

pub fn read_index(dir: &Path) -> Result<BankIndex> {
    from_slice(&read_file(&dir.join(BANK_INDEX))?)
}

/// File name for a generated asset, unique per (class, spec).
fn asset_file(entry: &GeneratorEntry) -> Result<String> {
    let spec = serde_json::to_vec(&entry.spec).map_err(|e| Error::Config(e.to_string()))?;
    let hash = pcx_core::rng::fnv1a64(&spec);
    Ok(format!("{}_{}_{hash:016x}.ply", entry.class, entry.spec.shape.name()))
}

/// Generates every entry and adds it to the bank at `dir`, replacing index
/// entries with the same file name. Nothing is written unless every asset
/// generates.
pub fn generate_into(dir: &Path, entries: &[GeneratorEntry]) -> Result<Vec<BankEntry>> {
    let mut files = Vec::with_capacity(entries.len());
    let mut added = Vec::with_capacity(entries.len());
    for entry in entries {
        let asset = generate(&entry.spec, entry.class.clone(), entry.prompt())?;
        let file = asset_file(entry)?;
        files.push((file.clone(), write_ply(&asset.cloud, Encoding::BinaryLittleEndian)?));
        added.push(BankEntry {
            file,
            class: asset.class,
            prompt: asset.prompt,
            provenance: asset.provenance,
            generator_name: asset.generator_name,
            seed: asset.seed,
        });
    }
    let mut index = match read_index(dir) {
        Ok(index) => index,
        Err(Error::MissingFile(_)) => BankIndex::default(),
        Err(e) => return Err(e),
    };
    index.assets.retain(|a| !added.iter().any(|b| b.file == a.file));
    index.assets.extend(added.iter().cloned());
    index.assets.sort_by(|a, b| a.file.cmp(&b.file));
    for (file, bytes) in &files {
        write_atomic(&dir.join(file), bytes)?;
    }
    write_atomic(&dir.join(BANK_INDEX), &to_pretty(&index)?)?;
    Ok(added)
}

/// Reads a user-supplied PLY as an external asset.
pub fn load_external_asset(path: &Path, class: SemanticClass) -> Result<ObjectAsset> {
    let cloud = read_ply(&read_file(path)?)?;
    Ok(ObjectAsset::external(cloud, class)?)
}

pub fn load_bank_dir(dir: &Path) -> Result<Vec<ObjectAsset>> {
    let index = read_index(dir)?;
    index
        .assets
        .iter()
        .map(|e| {
            let path = dir.join(&e.file);
            let cloud = read_ply(&read_file(&path)?)?;
            let asset = match e.provenance {
                Provenance::Generated => {
                    ObjectAsset::generated(cloud, e.class.clone(), e.generator_name.clone(), e.seed, e.prompt.clone())?
                }
                Provenance::External => ObjectAsset {
                    generator_name: e.generator_name.clone(),
                    seed: e.seed,
                    prompt: e.prompt.clone(),
                    ..ObjectAsset::external(cloud, e.class.clone())?
                },
            };
            Ok(asset)
        })
        .collect()
}

/// Loads and pools several bank directories in the given order.
pub fn load_bank(dirs: &[impl AsRef<Path>], mix: MixWeights) -> Result<ObjectBank> {
    let mut assets = Vec::new();
    for d in dirs {
        assets.extend(load_bank_dir(d.as_ref())?);
    }
    Ok(ObjectBank::new(assets, mix)?)
}
