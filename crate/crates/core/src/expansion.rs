//! Scene expansion by centroid overlay.
//!
//! Each inserted object is moved so that its centroid sits on the scene's
//! centroid, then shifted by per-axis uniform noise bounded by a fraction of
//! the scene's bounding-box half-extent. A dataset run plans how many objects
//! every scene receives, expands each scene from its own random substream
//! and records every insertion in an [`ExpansionManifest`].
//!
//! Random draws happen in a fixed order: the count plan comes from
//! [`Stream::for_plan`] over scenes sorted by id; inside a scene, each object
//! consumes its asset draw, one yaw draw (taken even when yaw augmentation is
//! off) and then the x, y, z noise draws from [`Stream::for_scene`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::geometry::{Point3, Rgb};
use crate::rng::Stream;
use crate::scene::{LabeledScene, ObjectAsset, Provenance, SemanticClass, Vocabulary};
use crate::synthesis::{default_target_sizes, normalize_to_extent, ObjectBank};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields))]
pub enum CountMode {
    /// Every scene independently receives `k ~ Uniform{1..max_per_scene}`.
    PerSceneUniform,
    /// Exactly `budget` insertions spread over the dataset.
    ExactBudget { budget: u64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", deny_unknown_fields))]
pub enum Sizing {
    Off,
    /// Resize to a per-class longest dimension. Classes missing from the table
    /// keep their size; external assets are resized only when
    /// `include_external` is set.
    ClassTable {
        targets: BTreeMap<SemanticClass, f64>,
        #[cfg_attr(feature = "serde", serde(default))]
        include_external: bool,
    },
}

impl Default for Sizing {
    fn default() -> Self {
        Sizing::ClassTable {
            targets: default_target_sizes(),
            include_external: false,
        }
    }
}

impl Sizing {
    fn target_for(&self, class: &SemanticClass, provenance: Provenance) -> Option<f64> {
        match self {
            Sizing::Off => None,
            Sizing::ClassTable {
                targets,
                include_external,
            } => {
                if provenance == Provenance::External && !include_external {
                    None
                } else {
                    targets.get(class).copied()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ExpansionConfig {
    pub max_per_scene: u32,
    pub count_mode: CountMode,
    /// Per-axis fraction of the scene half-extent bounding the noise.
    pub noise_fraction: [f64; 3],
    pub yaw_augmentation: bool,
    pub sizing: Sizing,
    pub master_seed: u64,
    /// Prompt word (or asset class) to dataset class.
    pub class_map: BTreeMap<String, SemanticClass>,
    /// When set, inserted classes are checked against this list.
    pub vocabulary: Option<Vec<SemanticClass>>,
    /// Reject out-of-vocabulary classes instead of flagging them.
    pub strict_vocabulary: bool,
    /// Color given to uncolored assets inserted into colored scenes.
    pub fill_color: [u8; 3],
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self {
            max_per_scene: 2,
            count_mode: CountMode::PerSceneUniform,
            noise_fraction: [0.5; 3],
            yaw_augmentation: false,
            sizing: Sizing::default(),
            master_seed: 0,
            class_map: BTreeMap::new(),
            vocabulary: None,
            strict_vocabulary: false,
            fill_color: Rgb::FILL.0,
        }
    }
}

impl ExpansionConfig {
    pub fn validate(&self) -> Result<()> {
        for (axis, eta) in ["x", "y", "z"].iter().zip(self.noise_fraction) {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::InvalidConfig(format!(
                    "noise_fraction {axis} must lie in [0, 1], got {eta}"
                )));
            }
        }
        if let Sizing::ClassTable { targets, .. } = &self.sizing {
            for (class, t) in targets {
                if !(*t > 0.0 && t.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "target size for {class} must be positive, got {t}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Dataset class for an asset: `class_map[prompt]`, else
    /// `class_map[asset class]`, else the asset's own class.
    pub fn resolve_class(&self, asset: &ObjectAsset) -> SemanticClass {
        self.class_map
            .get(&asset.prompt)
            .or_else(|| self.class_map.get(asset.class.as_str()))
            .cloned()
            .unwrap_or_else(|| asset.class.clone())
    }

    fn vocabulary(&self) -> Option<Vocabulary> {
        self.vocabulary.as_ref().map(|v| Vocabulary::new(v.iter().cloned()))
    }
}

/// Exact record of one insertion.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementRecord {
    pub scene_id: String,
    pub instance_id: u32,
    pub class: SemanticClass,
    /// Translation applied to the (resized, rotated) object.
    pub applied_offset: Point3,
    /// Translation that would put the object centroid exactly on the scene
    /// centroid.
    pub ideal_offset: Point3,
    /// Sampled displacement of the object centroid from the scene centroid.
    pub noise: Point3,
    /// Per-axis `eta * half_extent`.
    pub noise_bound: Point3,
    pub yaw: Option<f64>,
    pub provenance: Provenance,
    pub generator_name: String,
    pub asset_seed: u64,
    pub point_count: usize,
    pub in_vocabulary: bool,
}

impl PlacementRecord {
    /// `|noise_c| <= eta_c * h_c` on every axis, with no tolerance.
    pub fn noise_within_bound(&self) -> bool {
        (0..3).all(|c| self.noise.axis(c).abs() <= self.noise_bound.axis(c))
    }
}

/// Draws `n_scenes` insertion counts.
///
/// In exact-budget mode, every scene contributes `max_per_scene` slots and
/// `budget` of those slots are chosen uniformly without replacement.
pub fn plan_counts(n_scenes: usize, config: &ExpansionConfig, stream: &mut Stream) -> Result<Vec<u32>> {
    let max = config.max_per_scene;
    match config.count_mode {
        CountMode::PerSceneUniform => Ok((0..n_scenes)
            .map(|_| if max == 0 { 0 } else { 1 + stream.below(u64::from(max)) as u32 })
            .collect()),
        CountMode::ExactBudget { budget } => {
            let capacity = u64::from(max) * n_scenes as u64;
            if budget > capacity {
                return Err(Error::InfeasibleBudget {
                    budget,
                    max_per_scene: max,
                    scenes: n_scenes,
                });
            }
            let mut slots: Vec<u32> = (0..n_scenes as u32)
                .flat_map(|s| core::iter::repeat_n(s, max as usize))
                .collect();
            // Partial Fisher-Yates: the first `budget` slots become a uniform
            // sample without replacement.
            let budget = budget as usize;
            for i in 0..budget {
                let j = i + stream.below((slots.len() - i) as u64) as usize;
                slots.swap(i, j);
            }
            let mut counts = alloc::vec![0u32; n_scenes];
            for &s in &slots[..budget] {
                counts[s as usize] += 1;
            }
            Ok(counts)
        }
    }
}

/// Inserts one asset by centroid overlay plus bounded noise.
pub fn place_object(
    scene: &LabeledScene,
    asset: &ObjectAsset,
    config: &ExpansionConfig,
    stream: &mut Stream,
) -> Result<(LabeledScene, PlacementRecord)> {
    if scene.cloud.is_empty() {
        return Err(Error::EmptyScene);
    }
    let class = config.resolve_class(asset);
    let in_vocabulary = config.vocabulary().is_none_or(|v| v.contains(&class));
    if !in_vocabulary && config.strict_vocabulary {
        return Err(Error::ClassNotInVocabulary(class.into()));
    }

    let scene_centroid = scene.cloud.centroid()?;
    let half = scene.cloud.aabb()?.half_extent();

    let mut object = asset.cloud.clone();
    if let Some(target) = config.sizing.target_for(&class, asset.provenance) {
        object = normalize_to_extent(&object, target)?;
    }
    let yaw_draw = stream.next_f64();
    let yaw = config.yaw_augmentation.then_some(yaw_draw * TAU);
    if let Some(angle) = yaw {
        object = object.rotate_yaw_about_centroid(angle)?;
    }

    let [ex, ey, ez] = config.noise_fraction;
    let noise_bound = Point3::new(ex * half.x, ey * half.y, ez * half.z);
    let noise = Point3::new(
        noise_bound.x * stream.next_signed_open(),
        noise_bound.y * stream.next_signed_open(),
        noise_bound.z * stream.next_signed_open(),
    );

    let object_centroid = object.centroid()?;
    let ideal_offset = scene_centroid - object_centroid;
    let applied_offset = (scene_centroid + noise) - object_centroid;
    let placed = ObjectAsset {
        cloud: object.translate(applied_offset),
        class: class.clone(),
        ..asset.clone()
    };
    let (expanded, id) = scene.add_instance_with_fill(&placed, Rgb(config.fill_color))?;
    let record = PlacementRecord {
        scene_id: scene.scene_id.clone(),
        instance_id: id.get(),
        class,
        applied_offset,
        ideal_offset,
        noise,
        noise_bound,
        yaw,
        provenance: asset.provenance,
        generator_name: asset.generator_name.clone(),
        asset_seed: asset.seed,
        point_count: placed.cloud.len(),
        in_vocabulary,
    };
    Ok((expanded, record))
}

/// A scene after expansion together with its insertions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedScene {
    pub scene: LabeledScene,
    pub records: Vec<PlacementRecord>,
    pub instances_before: usize,
}

/// Draws and places `count` assets in sequence.
pub fn expand_scene(
    scene: &LabeledScene,
    bank: &ObjectBank,
    count: u32,
    config: &ExpansionConfig,
    stream: &mut Stream,
) -> Result<ExpandedScene> {
    if count > config.max_per_scene {
        return Err(Error::CountAboveMax {
            count,
            max: config.max_per_scene,
        });
    }
    let instances_before = scene.instance_count();
    let mut current = scene.clone();
    let mut records = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let asset = bank.draw(stream)?;
        let (next, record) = place_object(&current, asset, config, stream)?;
        current = next;
        records.push(record);
    }
    Ok(ExpandedScene {
        scene: current,
        records,
        instances_before,
    })
}

/// Validates every scene and returns insertion counts aligned with `scenes`.
///
/// Counts are drawn over scenes sorted by id, so they do not depend on input
/// order.
pub fn plan_dataset(scenes: &[LabeledScene], config: &ExpansionConfig) -> Result<Vec<u32>> {
    config.validate()?;
    let mut order: Vec<usize> = (0..scenes.len()).collect();
    order.sort_by(|&a, &b| scenes[a].scene_id.cmp(&scenes[b].scene_id));
    for pair in order.windows(2) {
        if scenes[pair[0]].scene_id == scenes[pair[1]].scene_id {
            return Err(Error::DuplicateScene(scenes[pair[0]].scene_id.clone()));
        }
    }
    for s in scenes {
        s.check().map_err(|e| e.in_scene(&s.scene_id))?;
    }
    let sorted_counts = plan_counts(scenes.len(), config, &mut Stream::for_plan(config.master_seed))?;
    let mut counts = alloc::vec![0; scenes.len()];
    for (rank, &i) in order.iter().enumerate() {
        counts[i] = sorted_counts[rank];
    }
    Ok(counts)
}

/// Expands one scene of a dataset run from its own substream.
pub fn expand_planned(
    scene: &LabeledScene,
    bank: &ObjectBank,
    count: u32,
    config: &ExpansionConfig,
) -> Result<ExpandedScene> {
    let mut stream = Stream::for_scene(config.master_seed, &scene.scene_id);
    expand_scene(scene, bank, count, config, &mut stream).map_err(|e| e.in_scene(&scene.scene_id))
}

/// Serial dataset expansion. Output scenes keep the input order; manifest
/// records are sorted by scene id.
pub fn expand_dataset(
    dataset_id: &str,
    scenes: &[LabeledScene],
    bank: &ObjectBank,
    config: &ExpansionConfig,
) -> Result<(Vec<LabeledScene>, ExpansionManifest)> {
    let counts = plan_dataset(scenes, config)?;
    let expanded = scenes
        .iter()
        .zip(&counts)
        .map(|(s, &k)| expand_planned(s, bank, k, config))
        .collect::<Result<Vec<_>>>()?;
    let manifest = ExpansionManifest::assemble(dataset_id, config, &expanded);
    Ok((expanded.into_iter().map(|e| e.scene).collect(), manifest))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct InsertionRecord {
    pub instance_id: u32,
    pub class: SemanticClass,
    pub provenance: Provenance,
    pub generator_name: String,
    pub asset_seed: u64,
    pub applied_offset: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SceneRecord {
    pub scene_id: String,
    pub inserted: Vec<InsertionRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Totals {
    pub scenes: u64,
    pub instances_before: u64,
    pub instances_after: u64,
    pub instances_added: u64,
}

/// Record of a dataset expansion run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ExpansionManifest {
    pub dataset_id: String,
    pub master_seed: u64,
    pub max_per_scene: u32,
    pub scenes: Vec<SceneRecord>,
    pub totals: Totals,
}

/// A manifest invariant breach, located by JSON path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestViolation {
    pub path: String,
    pub message: String,
}

impl ExpansionManifest {
    pub fn assemble(dataset_id: &str, config: &ExpansionConfig, expanded: &[ExpandedScene]) -> Self {
        let mut sorted: Vec<&ExpandedScene> = expanded.iter().collect();
        sorted.sort_by(|a, b| a.scene.scene_id.cmp(&b.scene.scene_id));
        let scenes: Vec<SceneRecord> = sorted
            .iter()
            .map(|e| SceneRecord {
                scene_id: e.scene.scene_id.clone(),
                inserted: e
                    .records
                    .iter()
                    .map(|r| InsertionRecord {
                        instance_id: r.instance_id,
                        class: r.class.clone(),
                        provenance: r.provenance,
                        generator_name: r.generator_name.clone(),
                        asset_seed: r.asset_seed,
                        applied_offset: r.applied_offset.to_array(),
                    })
                    .collect(),
            })
            .collect();
        let before: u64 = expanded.iter().map(|e| e.instances_before as u64).sum();
        let added: u64 = expanded.iter().map(|e| e.records.len() as u64).sum();
        ExpansionManifest {
            dataset_id: dataset_id.into(),
            master_seed: config.master_seed,
            max_per_scene: config.max_per_scene,
            totals: Totals {
                scenes: scenes.len() as u64,
                instances_before: before,
                instances_after: before + added,
                instances_added: added,
            },
            scenes,
        }
    }

    pub fn validate(&self) -> Vec<ManifestViolation> {
        let mut out = Vec::new();
        let mut flag = |path: String, message: String| out.push(ManifestViolation { path, message });
        let t = &self.totals;
        if t.instances_before.checked_add(t.instances_added) != Some(t.instances_after) {
            flag(
                "$.totals.instances_after".into(),
                format!(
                    "expected instances_before + instances_added = {} + {}, got {}",
                    t.instances_before, t.instances_added, t.instances_after
                ),
            );
        }
        let inserted: u64 = self.scenes.iter().map(|s| s.inserted.len() as u64).sum();
        if inserted != t.instances_added {
            flag(
                "$.totals.instances_added".into(),
                format!("scene records list {inserted} insertions, totals say {}", t.instances_added),
            );
        }
        if t.scenes != self.scenes.len() as u64 {
            flag(
                "$.totals.scenes".into(),
                format!("{} scene records, totals say {}", self.scenes.len(), t.scenes),
            );
        }
        let mut seen = BTreeSet::new();
        for (i, s) in self.scenes.iter().enumerate() {
            if s.inserted.len() > self.max_per_scene as usize {
                flag(
                    format!("$.scenes[{i}].inserted"),
                    format!("{} insertions exceed max_per_scene {}", s.inserted.len(), self.max_per_scene),
                );
            }
            if !seen.insert(s.scene_id.as_str()) {
                flag(format!("$.scenes[{i}].scene_id"), format!("duplicate scene id {:?}", s.scene_id));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DatasetStats {
    pub scenes: u64,
    pub total_instances: u64,
    pub total_points: u64,
    pub per_class: BTreeMap<String, u64>,
    pub min_instances: u64,
    pub mean_instances: f64,
    pub max_instances: u64,
}

pub fn dataset_stats(scenes: &[LabeledScene]) -> DatasetStats {
    if scenes.is_empty() {
        return DatasetStats::default();
    }
    let mut stats = DatasetStats {
        scenes: scenes.len() as u64,
        min_instances: u64::MAX,
        ..Default::default()
    };
    for s in scenes {
        let n = s.instance_count() as u64;
        stats.total_instances += n;
        stats.total_points += s.cloud.len() as u64;
        stats.min_instances = stats.min_instances.min(n);
        stats.max_instances = stats.max_instances.max(n);
        let used: BTreeSet<u32> = s.labels.iter().copied().filter(|&l| l != 0).collect();
        for id in used {
            if let Some(class) = s.classes.get(&id) {
                *stats.per_class.entry(class.as_str().into()).or_default() += 1;
            }
        }
    }
    stats.mean_instances = stats.total_instances as f64 / stats.scenes as f64;
    stats
}
