//! Parallel dataset stages over a bounded worker pool.
//!
//! Work is split per scene and results are collected in input order, so
//! output does not depend on the worker count.

use std::fs;
use std::path::Path;

use pcx_core::expansion::{expand_planned, plan_dataset, ExpansionConfig, ExpansionManifest};
use pcx_core::synthesis::ObjectBank;
use pcx_core::LabeledScene;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};
use crate::io::bundle::{check_scene_id, list_bundles, read_bundle, write_bundle};

pub const WORKERS_ENV: &str = "PCX_WORKERS";

/// Worker count: the explicit flag, else `PCX_WORKERS`, else the number of
/// available cores.
pub fn worker_count(flag: Option<usize>) -> Result<usize> {
    if let Some(n) = flag {
        return positive(n);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => {
            let n = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{WORKERS_ENV}={v:?} is not a worker count")))?;
            positive(n)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, usize::from)),
    }
}

fn positive(n: usize) -> Result<usize> {
    if n == 0 {
        Err(Error::Config("worker count must be at least 1".into()))
    } else {
        Ok(n)
    }
}

pub fn pool(workers: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

/// The first error in input order, so failures are reported identically
/// regardless of scheduling.
fn first_error<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

fn dir_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Reads every bundle under `dir` (sorted by directory name).
pub fn read_scenes(dir: &Path, pool: &ThreadPool) -> Result<Vec<LabeledScene>> {
    let dirs = list_bundles(dir)?;
    let results = pool.install(|| {
        dirs.par_iter()
            .map(|d| read_bundle(d).map_err(|e| e.in_scene(&dir_name(d))))
            .collect()
    });
    first_error(results)
}

/// Plans counts, expands every scene from its own substream and assembles
/// the manifest.
pub fn expand_parallel(
    dataset_id: &str,
    scenes: &[LabeledScene],
    bank: &ObjectBank,
    config: &ExpansionConfig,
    pool: &ThreadPool,
) -> Result<(Vec<LabeledScene>, ExpansionManifest)> {
    let counts = plan_dataset(scenes, config)?;
    let results: Vec<Result<_>> = pool.install(|| {
        scenes
            .par_iter()
            .zip(counts.par_iter())
            .map(|(s, &k)| expand_planned(s, bank, k, config).map_err(Error::from))
            .collect()
    });
    let expanded = first_error(results)?;
    for r in expanded.iter().flat_map(|e| &e.records) {
        if !r.in_vocabulary {
            log::warn!("scene {}: inserted class {} is outside the vocabulary", r.scene_id, r.class);
        }
    }
    let manifest = ExpansionManifest::assemble(dataset_id, config, &expanded);
    Ok((expanded.into_iter().map(|e| e.scene).collect(), manifest))
}

/// Writes `scene` as a bundle at `target`, staging in a hidden sibling
/// directory and renaming it into place.
pub fn write_bundle_atomic(scene: &LabeledScene, target: &Path) -> Result<()> {
    let staging = crate::io::temp_sibling(target);
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(Error::io(&staging))?;
    }
    let result = write_bundle(scene, &staging).and_then(|()| {
        if target.exists() {
            fs::remove_dir_all(target).map_err(Error::io(target))?;
        }
        fs::rename(&staging, target).map_err(Error::io(target))
    });
    if result.is_err() {
        let _ = fs::remove_dir_all(&staging);
    }
    result
}

pub fn write_scenes(scenes: &[LabeledScene], out: &Path, pool: &ThreadPool) -> Result<()> {
    fs::create_dir_all(out).map_err(Error::io(out))?;
    let results: Vec<Result<()>> = pool.install(|| {
        scenes
            .par_iter()
            .map(|s| {
                check_scene_id(&s.scene_id)
                    .and_then(|()| write_bundle_atomic(s, &out.join(&s.scene_id)))
                    .map_err(|e| e.in_scene(&s.scene_id))
            })
            .collect()
    });
    first_error(results).map(|_| ())
}
