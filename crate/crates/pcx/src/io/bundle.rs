//! Scene bundles: a directory holding `scene.ply` (binary little-endian) and
//! `labels.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use pcx_core::{LabeledScene, SemanticClass};
use serde::{Deserialize, Serialize};

use super::ply::{read_ply, write_ply, Encoding};
use super::json::from_slice;
use super::{read_file, write_atomic};
use crate::error::{Error, Result};

pub const SCENE_FILE: &str = "scene.ply";
pub const LABELS_FILE: &str = "labels.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelsFile {
    pub scene_id: String,
    pub instances: Vec<InstanceEntry>,
    pub point_instance_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceEntry {
    pub id: u32,
    pub class: SemanticClass,
}

impl LabelsFile {
    pub fn of(scene: &LabeledScene) -> Self {
        Self {
            scene_id: scene.scene_id.clone(),
            instances: scene
                .classes
                .iter()
                .map(|(&id, class)| InstanceEntry {
                    id,
                    class: class.clone(),
                })
                .collect(),
            point_instance_ids: scene.labels.clone(),
        }
    }
}

fn schema(path: String, message: impl Into<String>) -> Error {
    Error::SchemaViolation {
        path,
        message: message.into(),
    }
}

/// Scene ids name bundle directories, so they must be plain path components.
pub fn check_scene_id(id: &str) -> Result<()> {
    let ok = !id.is_empty() && !id.starts_with('.') && !id.contains(['/', '\\', '\0']);
    if ok {
        Ok(())
    } else {
        Err(schema("$.scene_id".into(), format!("{id:?} cannot be used as a directory name")))
    }
}

pub fn encode_labels(scene: &LabeledScene) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec(&LabelsFile::of(scene)).map_err(|e| schema("$".into(), e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_bundle(scene: &LabeledScene, dir: &Path) -> Result<()> {
    scene.check()?;
    check_scene_id(&scene.scene_id)?;
    let ply = write_ply(&scene.cloud, Encoding::BinaryLittleEndian)?;
    let labels = encode_labels(scene)?;
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    write_atomic(&dir.join(SCENE_FILE), &ply)?;
    write_atomic(&dir.join(LABELS_FILE), &labels)
}

/// Assembles a scene from decoded parts, rejecting any inconsistency.
pub fn scene_from_parts(cloud: pcx_core::PointCloud, labels: LabelsFile) -> Result<LabeledScene> {
    check_scene_id(&labels.scene_id)?;
    let mut classes = BTreeMap::new();
    for (i, entry) in labels.instances.iter().enumerate() {
        if entry.id == 0 {
            return Err(schema(format!("$.instances[{i}].id"), "id 0 is reserved for background"));
        }
        if classes.insert(entry.id, entry.class.clone()).is_some() {
            return Err(schema(format!("$.instances[{i}].id"), format!("duplicate instance id {}", entry.id)));
        }
    }
    if labels.point_instance_ids.len() != cloud.len() {
        return Err(Error::LengthMismatch {
            ids: labels.point_instance_ids.len(),
            vertices: cloud.len(),
        });
    }
    let used: BTreeSet<u32> = labels.point_instance_ids.iter().copied().filter(|&id| id != 0).collect();
    if let Some(&id) = used.iter().find(|id| !classes.contains_key(id)) {
        return Err(Error::UnmappedInstance {
            id,
            reason: "labels points but has no class entry",
        });
    }
    if let Some(&id) = classes.keys().find(|id| !used.contains(id)) {
        return Err(Error::UnmappedInstance {
            id,
            reason: "has a class entry but labels no points",
        });
    }
    Ok(LabeledScene::new(labels.scene_id, cloud, labels.point_instance_ids, classes)?)
}

pub fn read_bundle(dir: &Path) -> Result<LabeledScene> {
    let ply = read_file(&dir.join(SCENE_FILE))?;
    let labels = read_file(&dir.join(LABELS_FILE))?;
    let cloud = read_ply(&ply)?;
    let labels: LabelsFile = from_slice(&labels)?;
    scene_from_parts(cloud, labels)
}

/// Bundle directories directly under `dir`, sorted by name. Hidden entries
/// and plain files are skipped.
pub fn list_bundles(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(Error::io(dir))? {
        let entry = entry.map_err(Error::io(dir))?;
        let name = entry.file_name();
        if name.to_string_lossy().starts_with('.') {
            continue;
        }
        if entry.file_type().map_err(Error::io(entry.path()))?.is_dir() {
            out.push(entry.path());
        }
    }
    out.sort();
    Ok(out)
}
