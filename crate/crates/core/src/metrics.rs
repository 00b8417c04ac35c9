//! Instance-segmentation evaluation on point-index masks.
//!
//! Matching is greedy in descending confidence (ties by scene id, then input
//! index). Each prediction takes the unmatched ground truth of its scene with
//! the highest IoU at or above the threshold (ties to the lower ground-truth
//! index). Precision is made monotone non-increasing from the right before
//! integrating over recall. mAP averages IoU thresholds 0.50:0.05:0.95;
//! classes without ground truth are left out of every mean and listed in
//! [`MetricsReport::excluded_classes`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::scene::{InstanceId, LabeledScene, SemanticClass};
use crate::{Error, Result};

/// Sorted, duplicate-free point indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(from = "Vec<u32>", into = "Vec<u32>"))]
pub struct IndexSet(Vec<u32>);

impl IndexSet {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> Option<u32> {
        self.0.last().copied()
    }

    pub fn intersection_len(&self, other: &IndexSet) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

impl From<Vec<u32>> for IndexSet {
    fn from(mut v: Vec<u32>) -> Self {
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

impl From<IndexSet> for Vec<u32> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

impl FromIterator<u32> for IndexSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        Self::from(iter.into_iter().collect::<Vec<_>>())
    }
}

/// `|a ∩ b| / |a ∪ b|`.
pub fn iou(a: &IndexSet, b: &IndexSet) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Err(Error::BothEmpty);
    }
    let inter = a.intersection_len(b);
    let union = a.len() + b.len() - inter;
    Ok(inter as f64 / union as f64)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PredictedInstance {
    pub scene_id: String,
    pub class: SemanticClass,
    pub confidence: f64,
    pub point_indices: IndexSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthInstance {
    pub scene_id: String,
    pub class: SemanticClass,
    pub points: IndexSet,
}

/// Ground-truth instances of every scene, in scene order then ascending id.
pub fn ground_truth_instances(scenes: &[LabeledScene]) -> Vec<GroundTruthInstance> {
    let mut out = Vec::new();
    for s in scenes {
        let mut members: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (i, &l) in s.labels.iter().enumerate() {
            if l != 0 {
                members.entry(l).or_default().push(i as u32);
            }
        }
        for (id, points) in members {
            if let Some(class) = InstanceId::new(id).and_then(|id| s.class_of(id)) {
                out.push(GroundTruthInstance {
                    scene_id: s.scene_id.clone(),
                    class: class.clone(),
                    points: IndexSet(points),
                });
            }
        }
    }
    out
}

fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidPrediction(format!("IoU threshold must lie in (0, 1], got {t}")))
    }
}

/// One class's predictions in processing order, with their nonzero IoUs
/// against same-scene ground truths.
struct Problem {
    /// Input index of each prediction, in processing order.
    order: Vec<usize>,
    /// `(gt index, iou)` candidates per processed prediction, sorted by
    /// ascending gt index.
    candidates: Vec<Vec<(usize, f64)>>,
    n_gt: usize,
}

impl Problem {
    fn build(preds: &[&PredictedInstance], gts: &[&GroundTruthInstance]) -> Self {
        let mut order: Vec<usize> = (0..preds.len()).collect();
        order.sort_by(|&a, &b| {
            preds[b]
                .confidence
                .total_cmp(&preds[a].confidence)
                .then_with(|| preds[a].scene_id.cmp(&preds[b].scene_id))
                .then(a.cmp(&b))
        });
        let mut by_scene: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (g, gt) in gts.iter().enumerate() {
            by_scene.entry(gt.scene_id.as_str()).or_default().push(g);
        }
        let candidates = order
            .iter()
            .map(|&p| {
                let pred = preds[p];
                by_scene
                    .get(pred.scene_id.as_str())
                    .into_iter()
                    .flatten()
                    .filter_map(|&g| {
                        let inter = pred.point_indices.intersection_len(&gts[g].points);
                        (inter > 0).then(|| {
                            let union = pred.point_indices.len() + gts[g].points.len() - inter;
                            (g, inter as f64 / union as f64)
                        })
                    })
                    .collect()
            })
            .collect();
        Self {
            order,
            candidates,
            n_gt: gts.len(),
        }
    }

    /// Matched ground truth per processed prediction.
    fn matches(&self, threshold: f64) -> Vec<Option<usize>> {
        let mut taken = alloc::vec![false; self.n_gt];
        self.candidates
            .iter()
            .map(|cands| {
                let mut best: Option<(usize, f64)> = None;
                for &(g, v) in cands {
                    if taken[g] || v < threshold {
                        continue;
                    }
                    // Strictly greater keeps the lower index on ties.
                    if best.is_none_or(|(_, bv)| v > bv) {
                        best = Some((g, v));
                    }
                }
                best.map(|(g, _)| {
                    taken[g] = true;
                    g
                })
            })
            .collect()
    }

    fn average_precision(&self, threshold: f64) -> Option<f64> {
        if self.n_gt == 0 {
            return None;
        }
        let tp: Vec<bool> = self.matches(threshold).iter().map(Option::is_some).collect();
        Some(ap_from_hits(&tp, self.n_gt))
    }
}

/// Integrates the enveloped precision over recall. Recall rises by exactly
/// `1 / n_gt` at each hit, so the integral is the sum of the envelope at the
/// hits divided by `n_gt`.
fn ap_from_hits(hits: &[bool], n_gt: usize) -> f64 {
    let mut precision = Vec::with_capacity(hits.len());
    let mut tp = 0usize;
    for (i, &hit) in hits.iter().enumerate() {
        tp += usize::from(hit);
        precision.push(tp as f64 / (i + 1) as f64);
    }
    for i in (0..precision.len().saturating_sub(1)).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let sum: f64 = hits
        .iter()
        .zip(&precision)
        .filter(|(&hit, _)| hit)
        .map(|(_, &p)| p)
        .sum();
    sum / n_gt as f64
}

fn same_class(preds: &[PredictedInstance], gts: &[GroundTruthInstance]) -> Option<SemanticClass> {
    let mut classes = preds.iter().map(|p| &p.class).chain(gts.iter().map(|g| &g.class));
    let first = classes.next()?.clone();
    classes.all(|c| *c == first).then_some(first)
}

/// Greedy matching within one scene and class. Returns `(prediction index,
/// matched ground-truth index)` in processing order.
pub fn match_instances(
    preds: &[PredictedInstance],
    gts: &[GroundTruthInstance],
    threshold: f64,
) -> Result<Vec<(usize, Option<usize>)>> {
    check_threshold(threshold)?;
    let mut scenes = preds.iter().map(|p| &p.scene_id).chain(gts.iter().map(|g| &g.scene_id));
    if let Some(first) = scenes.next() {
        if !scenes.all(|s| s == first) || same_class(preds, gts).is_none() {
            return Err(Error::CrossSceneInput);
        }
    }
    let pr: Vec<&PredictedInstance> = preds.iter().collect();
    let gr: Vec<&GroundTruthInstance> = gts.iter().collect();
    let problem = Problem::build(&pr, &gr);
    Ok(problem.order.iter().copied().zip(problem.matches(threshold)).collect())
}

/// AP of one class pooled over any number of scenes.
pub fn average_precision(
    preds: &[PredictedInstance],
    gts: &[GroundTruthInstance],
    threshold: f64,
) -> Result<f64> {
    check_threshold(threshold)?;
    if !preds.is_empty() || !gts.is_empty() {
        same_class(preds, gts).ok_or(Error::CrossSceneInput)?;
    }
    let pr: Vec<&PredictedInstance> = preds.iter().collect();
    let gr: Vec<&GroundTruthInstance> = gts.iter().collect();
    Problem::build(&pr, &gr)
        .average_precision(threshold)
        .ok_or(Error::NoGroundTruth)
}

/// `[0.25, 0.50, 0.55, ..., 0.95]`.
pub fn report_thresholds() -> Vec<f64> {
    core::iter::once(0.25)
        .chain((0..10).map(|k| (50 + 5 * k) as f64 / 100.0))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassMetrics {
    /// AP per entry of [`MetricsReport::thresholds`].
    pub ap_by_threshold: Vec<f64>,
    /// Mean AP over 0.50:0.05:0.95.
    pub ap: f64,
    pub ap50: f64,
    pub ap25: f64,
    pub gt_instances: u64,
    pub predictions: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub thresholds: Vec<f64>,
    /// Mean over classes of the per-class mean over 0.50:0.05:0.95.
    pub ap: f64,
    pub ap50: f64,
    pub ap25: f64,
    pub per_class: BTreeMap<String, ClassMetrics>,
    /// Predicted classes with no ground truth; not part of any mean.
    pub excluded_classes: Vec<String>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Scores `preds` against the instances of `scenes`.
pub fn evaluate(preds: &[PredictedInstance], scenes: &[LabeledScene]) -> Result<MetricsReport> {
    let sizes: BTreeMap<&str, usize> = scenes.iter().map(|s| (s.scene_id.as_str(), s.cloud.len())).collect();
    for (i, p) in preds.iter().enumerate() {
        let n = *sizes
            .get(p.scene_id.as_str())
            .ok_or_else(|| Error::UnknownScene(p.scene_id.clone()))?;
        if p.point_indices.is_empty() {
            return Err(Error::InvalidPrediction(format!("prediction {i} has no points")));
        }
        if p.point_indices.max().is_some_and(|m| m as usize >= n) {
            return Err(Error::InvalidPrediction(format!(
                "prediction {i} indexes past the {n} points of scene {}",
                p.scene_id
            )));
        }
        if !(0.0..=1.0).contains(&p.confidence) {
            return Err(Error::InvalidPrediction(format!(
                "prediction {i} confidence {} outside [0, 1]",
                p.confidence
            )));
        }
    }

    let gts = ground_truth_instances(scenes);
    let mut gt_by_class: BTreeMap<&SemanticClass, Vec<&GroundTruthInstance>> = BTreeMap::new();
    for g in &gts {
        gt_by_class.entry(&g.class).or_default().push(g);
    }
    let mut pred_by_class: BTreeMap<&SemanticClass, Vec<&PredictedInstance>> = BTreeMap::new();
    for p in preds {
        pred_by_class.entry(&p.class).or_default().push(p);
    }

    let thresholds = report_thresholds();
    let mut per_class = BTreeMap::new();
    for (class, class_gts) in &gt_by_class {
        let class_preds = pred_by_class.get(class).map(Vec::as_slice).unwrap_or(&[]);
        let problem = Problem::build(class_preds, class_gts);
        let ap_by_threshold: Vec<f64> = thresholds
            .iter()
            .map(|&t| problem.average_precision(t).unwrap_or(0.0))
            .collect();
        per_class.insert(
            String::from(class.as_str()),
            ClassMetrics {
                ap: mean(ap_by_threshold[1..].iter().copied()),
                ap50: ap_by_threshold[1],
                ap25: ap_by_threshold[0],
                ap_by_threshold,
                gt_instances: class_gts.len() as u64,
                predictions: class_preds.len() as u64,
            },
        );
    }
    let excluded_classes = pred_by_class
        .keys()
        .filter(|c| !gt_by_class.contains_key(*c))
        .map(|c| String::from(c.as_str()))
        .collect();
    Ok(MetricsReport {
        ap: mean(per_class.values().map(|c: &ClassMetrics| c.ap)),
        ap50: mean(per_class.values().map(|c| c.ap50)),
        ap25: mean(per_class.values().map(|c| c.ap25)),
        thresholds,
        per_class,
        excluded_classes,
    })
}
