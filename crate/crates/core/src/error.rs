use alloc::string::String;
use alloc::vec::Vec;

use crate::scene::Violation;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("scale factor must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("point cloud is degenerate (all points coincide)")]
    DegenerateCloud,
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
    #[error("color count {colors} does not match point count {points}")]
    ColorLengthMismatch { points: usize, colors: usize },
    #[error("invalid class name {0:?}")]
    InvalidClass(String),
    #[error("invalid scene: {}", join_violations(.0))]
    InvalidScene(Vec<Violation>),
    #[error("unknown instance id {0}")]
    UnknownInstance(u32),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("object bank has no eligible assets")]
    EmptyBank,
    #[error("invalid expansion config: {0}")]
    InvalidConfig(String),
    #[error("budget {budget} exceeds capacity {max_per_scene} x {scenes}")]
    InfeasibleBudget { budget: u64, max_per_scene: u32, scenes: usize },
    #[error("scene has no points")]
    EmptyScene,
    #[error("count {count} exceeds max_per_scene {max}")]
    CountAboveMax { count: u32, max: u32 },
    #[error("class {0:?} is not in the dataset vocabulary")]
    ClassNotInVocabulary(String),
    #[error("duplicate scene id {0:?}")]
    DuplicateScene(String),
    #[error("scene {scene_id}: {source}")]
    Scene {
        scene_id: String,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
    #[error("both index sets are empty")]
    BothEmpty,
    #[error("inputs span more than one scene or class")]
    CrossSceneInput,
    #[error("no ground-truth instances")]
    NoGroundTruth,
    #[error("prediction references unknown scene {0:?}")]
    UnknownScene(String),
    #[error("invalid prediction: {0}")]
    InvalidPrediction(String),
}

impl Error {
    pub(crate) fn in_scene(self, scene_id: &str) -> Self {
        Error::Scene {
            scene_id: scene_id.into(),
            source: alloc::boxed::Box::new(self),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, violation) in v.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        let _ = write!(out, "{violation}");
    }
    out
}
