//! Labeled scenes: a point cloud, one instance id per point, and the class of
//! every instance.
//!
//! Id `0` marks background points and never appears in the class table.
//! Fresh ids are `max + 1` and are never recycled.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{PointCloud, Rgb};
use crate::{Error, Result};

/// Lowercase, whitespace-free class token such as `chair`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
pub struct SemanticClass(String);

impl SemanticClass {
    pub fn new(name: &str) -> Result<Self> {
        let valid = !name.is_empty()
            && !name.chars().any(char::is_whitespace)
            && !name.chars().any(char::is_uppercase);
        if valid {
            Ok(Self(name.into()))
        } else {
            Err(Error::InvalidClass(name.into()))
        }
    }

    /// Lowercases first, for names taken from file names.
    pub fn normalized(name: &str) -> Result<Self> {
        Self::new(&name.to_lowercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for SemanticClass {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Self::new(&s)
    }
}

impl From<SemanticClass> for String {
    fn from(c: SemanticClass) -> String {
        c.0
    }
}

impl fmt::Display for SemanticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A set of admissible class names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary(BTreeSet<SemanticClass>);

impl Vocabulary {
    pub const S3DIS: [&'static str; 13] = [
        "ceiling", "floor", "wall", "beam", "column", "window", "door", "table", "chair", "sofa",
        "bookcase", "board", "clutter",
    ];

    pub fn new(classes: impl IntoIterator<Item = SemanticClass>) -> Self {
        Self(classes.into_iter().collect())
    }

    pub fn s3dis() -> Self {
        Self::new(Self::S3DIS.iter().map(|c| SemanticClass(c.to_string())))
    }

    pub fn contains(&self, class: &SemanticClass) -> bool {
        self.0.contains(class)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Identifier of a real (non-background) instance; always `>= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceId(u32);

impl InstanceId {
    pub fn new(id: u32) -> Option<Self> {
        (id != 0).then_some(Self(id))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One breach of the [`LabeledScene`] invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    LengthMismatch { points: usize, labels: usize },
    /// An id used by some point has no class.
    UnmappedInstance(u32),
    /// A class entry whose id no point carries.
    OrphanClass(u32),
    /// The background id `0` appears in the class table.
    ReservedId,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LengthMismatch { points, labels } => {
                write!(f, "{labels} labels for {points} points")
            }
            Violation::UnmappedInstance(id) => write!(f, "instance {id} has no class"),
            Violation::OrphanClass(id) => write!(f, "class entry for instance {id} has no points"),
            Violation::ReservedId => f.write_str("id 0 is reserved for background"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScene {
    pub scene_id: String,
    pub cloud: PointCloud,
    /// Instance id per point, `0` for background.
    pub labels: Vec<u32>,
    /// Keyed by raw id so that a corrupt `0` entry stays representable.
    pub classes: BTreeMap<u32, SemanticClass>,
}

impl LabeledScene {
    /// Builds a scene and rejects it unless every invariant holds.
    pub fn new(
        scene_id: impl Into<String>,
        cloud: PointCloud,
        labels: Vec<u32>,
        classes: BTreeMap<u32, SemanticClass>,
    ) -> Result<Self> {
        let scene = Self {
            scene_id: scene_id.into(),
            cloud,
            labels,
            classes,
        };
        scene.check()?;
        Ok(scene)
    }

    /// An unlabeled scene: every point is background.
    pub fn unlabeled(scene_id: impl Into<String>, cloud: PointCloud) -> Self {
        let labels = alloc::vec![0; cloud.len()];
        Self {
            scene_id: scene_id.into(),
            cloud,
            labels,
            classes: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.labels.len() != self.cloud.len() {
            out.push(Violation::LengthMismatch {
                points: self.cloud.len(),
                labels: self.labels.len(),
            });
        }
        if self.classes.contains_key(&0) {
            out.push(Violation::ReservedId);
        }
        let used: BTreeSet<u32> = self.labels.iter().copied().filter(|&id| id != 0).collect();
        for &id in &used {
            if !self.classes.contains_key(&id) {
                out.push(Violation::UnmappedInstance(id));
            }
        }
        for &id in self.classes.keys() {
            if id != 0 && !used.contains(&id) {
                out.push(Violation::OrphanClass(id));
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidScene(v))
        }
    }

    pub fn next_instance_id(&self) -> InstanceId {
        let max = self.classes.keys().next_back().copied().unwrap_or(0);
        InstanceId(max + 1)
    }

    pub fn instance_points(&self, id: InstanceId) -> Result<Vec<usize>> {
        if !self.classes.contains_key(&id.0) {
            return Err(Error::UnknownInstance(id.0));
        }
        Ok(self
            .labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == id.0)
            .map(|(i, _)| i)
            .collect())
    }

    pub fn class_of(&self, id: InstanceId) -> Option<&SemanticClass> {
        self.classes.get(&id.0)
    }

    /// Number of distinct nonzero ids carried by points.
    pub fn instance_count(&self) -> usize {
        self.labels
            .iter()
            .filter(|&&id| id != 0)
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Appends `asset` as a fresh instance. Existing points, colors and labels
    /// are left bit-identical.
    pub fn add_instance(&self, asset: &ObjectAsset) -> Result<(LabeledScene, InstanceId)> {
        self.add_instance_with_fill(asset, Rgb::FILL)
    }

    /// Like [`add_instance`](Self::add_instance) with an explicit fill color
    /// for uncolored assets placed into a colored scene. Colors of an asset
    /// placed into an uncolored scene are dropped.
    pub fn add_instance_with_fill(
        &self,
        asset: &ObjectAsset,
        fill: Rgb,
    ) -> Result<(LabeledScene, InstanceId)> {
        self.check()?;
        if asset.cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let id = self.next_instance_id();
        let cloud = if self.cloud.colors().is_some() {
            self.cloud.concat(&asset.cloud, fill)
        } else {
            let (points, _) = asset.cloud.clone().into_parts();
            self.cloud.concat(&PointCloud::new(points)?, fill)
        };
        let mut labels = Vec::with_capacity(cloud.len());
        labels.extend_from_slice(&self.labels);
        labels.resize(cloud.len(), id.0);
        let mut classes = self.classes.clone();
        classes.insert(id.0, asset.class.clone());
        Ok((
            LabeledScene {
                scene_id: self.scene_id.clone(),
                cloud,
                labels,
                classes,
            },
            id,
        ))
    }
}

pub fn dataset_instance_count(scenes: &[LabeledScene]) -> usize {
    scenes.iter().map(LabeledScene::instance_count).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Provenance {
    Generated,
    External,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Generated => "generated",
            Provenance::External => "external",
        })
    }
}

/// An object ready to be inserted into scenes.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectAsset {
    pub cloud: PointCloud,
    pub class: SemanticClass,
    pub provenance: Provenance,
    pub generator_name: String,
    pub seed: u64,
    /// Single-word prompt the object was made from; informational only.
    pub prompt: String,
}

impl ObjectAsset {
    pub fn generated(
        cloud: PointCloud,
        class: SemanticClass,
        generator_name: impl Into<String>,
        seed: u64,
        prompt: impl Into<String>,
    ) -> Result<Self> {
        let generator_name = generator_name.into();
        if generator_name.is_empty() {
            return Err(Error::InvalidSpec("generated asset needs a generator name".into()));
        }
        Self::build(cloud, class, Provenance::Generated, generator_name, seed, prompt.into())
    }

    pub fn external(cloud: PointCloud, class: SemanticClass) -> Result<Self> {
        let prompt = class.as_str().into();
        Self::build(cloud, class, Provenance::External, String::new(), 0, prompt)
    }

    fn build(
        cloud: PointCloud,
        class: SemanticClass,
        provenance: Provenance,
        generator_name: String,
        seed: u64,
        prompt: String,
    ) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        Ok(Self {
            cloud,
            class,
            provenance,
            generator_name,
            seed,
            prompt,
        })
    }
}
