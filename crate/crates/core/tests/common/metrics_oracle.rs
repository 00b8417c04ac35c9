//! Straight-line reference evaluator and random micro-dataset builder.
//!
//! Shares no code with `pcx_core::metrics`: IoU goes through `BTreeSet`,
//! ordering is by repeated selection, and AP is integrated over the distinct
//! recall levels of the fully enumerated PR curve.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use pcx_core::metrics::PredictedInstance;
use pcx_core::{LabeledScene, Point3, PointCloud, SemanticClass, Stream};

pub struct OracleReport {
    pub per_class: BTreeMap<String, Vec<f64>>,
    pub ap: f64,
    pub ap50: f64,
    pub ap25: f64,
}

pub fn thresholds() -> Vec<f64> {
    let mut t = vec![0.25];
    for k in 0..10 {
        t.push((50 + 5 * k) as f64 / 100.0);
    }
    t
}

struct Gt {
    scene: String,
    points: BTreeSet<u32>,
}

fn set_iou(a: &BTreeSet<u32>, b: &BTreeSet<u32>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.union(b).count();
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Index of the prediction that must be processed first among `remaining`.
fn first_in_order(preds: &[&PredictedInstance], remaining: &[usize]) -> usize {
    let mut best = remaining[0];
    for &i in &remaining[1..] {
        let (a, b) = (preds[i], preds[best]);
        let before = a.confidence > b.confidence
            || (a.confidence == b.confidence
                && (a.scene_id < b.scene_id || (a.scene_id == b.scene_id && i < best)));
        if before {
            best = i;
        }
    }
    best
}

fn oracle_ap(preds: &[&PredictedInstance], gts: &[Gt], threshold: f64) -> f64 {
    let mut remaining: Vec<usize> = (0..preds.len()).collect();
    let mut used = vec![false; gts.len()];
    let mut pr_points: Vec<(f64, f64)> = Vec::new();
    let mut tp = 0usize;
    let mut seen = 0usize;
    while !remaining.is_empty() {
        let p = first_in_order(preds, &remaining);
        remaining.retain(|&i| i != p);
        let pset: BTreeSet<u32> = preds[p].point_indices.as_slice().iter().copied().collect();
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if used[g] || gt.scene != preds[p].scene_id {
                continue;
            }
            let v = set_iou(&pset, &gt.points);
            if v >= threshold && best.map_or(true, |(_, bv)| v > bv) {
                best = Some((g, v));
            }
        }
        seen += 1;
        if let Some((g, _)) = best {
            used[g] = true;
            tp += 1;
        }
        pr_points.push((tp as f64 / gts.len() as f64, tp as f64 / seen as f64));
    }
    let mut levels: Vec<f64> = pr_points.iter().map(|&(r, _)| r).filter(|&r| r > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut ap = 0.0;
    let mut prev = 0.0;
    for r in levels {
        let p = pr_points
            .iter()
            .filter(|&&(rr, _)| rr >= r)
            .map(|&(_, pp)| pp)
            .fold(0.0, f64::max);
        ap += (r - prev) * p;
        prev = r;
    }
    ap
}

pub fn oracle_evaluate(preds: &[PredictedInstance], scenes: &[LabeledScene]) -> OracleReport {
    let mut gts: BTreeMap<String, Vec<Gt>> = BTreeMap::new();
    for s in scenes {
        let ids: BTreeSet<u32> = s.labels.iter().copied().filter(|&l| l != 0).collect();
        for id in ids {
            let points = (0..s.labels.len() as u32).filter(|&i| s.labels[i as usize] == id).collect();
            gts.entry(s.classes[&id].as_str().to_string()).or_default().push(Gt {
                scene: s.scene_id.clone(),
                points,
            });
        }
    }
    let ts = thresholds();
    let mut per_class = BTreeMap::new();
    for (class, class_gts) in &gts {
        let cp: Vec<&PredictedInstance> = preds.iter().filter(|p| p.class.as_str() == class).collect();
        per_class.insert(class.clone(), ts.iter().map(|&t| oracle_ap(&cp, class_gts, t)).collect::<Vec<_>>());
    }
    let n = per_class.len() as f64;
    let avg = |f: &dyn Fn(&Vec<f64>) -> f64| {
        if per_class.is_empty() {
            0.0
        } else {
            per_class.values().map(|v| f(v)).sum::<f64>() / n
        }
    };
    OracleReport {
        ap: avg(&|v| v[1..].iter().sum::<f64>() / 10.0),
        ap50: avg(&|v| v[1]),
        ap25: avg(&|v| v[0]),
        per_class,
    }
}

const CLASSES: [&str; 3] = ["chair", "table", "sofa"];

/// Up to 4 scenes, up to 6 instances and 60 points per scene, with noisy,
/// duplicated and spurious predictions and quantized (often tied)
/// confidences.
pub fn random_micro_dataset(rng: &mut Stream) -> (Vec<LabeledScene>, Vec<PredictedInstance>) {
    let n_scenes = 1 + rng.below(4) as usize;
    let mut scenes = Vec::new();
    let mut preds = Vec::new();
    for s in 0..n_scenes {
        let n_points = 10 + rng.below(51) as usize;
        let n_inst = rng.below(7) as u32;
        let labels: Vec<u32> = (0..n_points)
            .map(|_| if n_inst == 0 { 0 } else { rng.below(n_inst as u64 + 1) as u32 })
            .collect();
        let used: BTreeSet<u32> = labels.iter().copied().filter(|&l| l != 0).collect();
        let classes: BTreeMap<u32, SemanticClass> = used
            .iter()
            .map(|&id| (id, SemanticClass::new(CLASSES[rng.below(3) as usize]).unwrap()))
            .collect();
        let cloud = PointCloud::new((0..n_points).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect()).unwrap();
        let scene_id = format!("scene{s}");
        let scene = LabeledScene::new(scene_id.clone(), cloud, labels.clone(), classes.clone()).unwrap();
        let conf = |rng: &mut Stream| rng.below(11) as f64 / 10.0;
        for (&id, class) in &classes {
            let copies = rng.below(3);
            for _ in 0..copies {
                let mut pts: Vec<u32> = (0..n_points as u32)
                    .filter(|&i| labels[i as usize] == id && rng.below(5) != 0)
                    .collect();
                for i in 0..n_points as u32 {
                    if labels[i as usize] != id && rng.below(8) == 0 {
                        pts.push(i);
                    }
                }
                if pts.is_empty() {
                    pts.push(rng.below(n_points as u64) as u32);
                }
                let class = if rng.below(6) == 0 {
                    SemanticClass::new(CLASSES[rng.below(3) as usize]).unwrap()
                } else {
                    class.clone()
                };
                preds.push(PredictedInstance {
                    scene_id: scene_id.clone(),
                    class,
                    confidence: conf(rng),
                    point_indices: pts.into(),
                });
            }
        }
        for _ in 0..rng.below(3) {
            let start = rng.below(n_points as u64) as u32;
            let len = 1 + rng.below(10) as u32;
            let pts: Vec<u32> = (start..(start + len).min(n_points as u32)).collect();
            preds.push(PredictedInstance {
                scene_id: scene_id.clone(),
                class: SemanticClass::new(CLASSES[rng.below(3) as usize]).unwrap(),
                confidence: conf(rng),
                point_indices: pts.into(),
            });
        }
        scenes.push(scene);
    }
    (scenes, preds)
}
