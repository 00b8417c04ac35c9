#![allow(dead_code)]

#[path = "../../../core/tests/common/fixtures.rs"]
pub mod fixtures;
#[path = "../../../core/tests/common/metrics_oracle.rs"]
pub mod metrics_oracle;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use pcx_core::{LabeledScene, Point3, PointCloud};

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the `pcx` binary.
pub fn pcx<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    pcx_env(args, &[])
}

pub fn pcx_env<I, S>(args: I, env: &[(&str, &str)]) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pcx"));
    cmd.args(args).env_remove("PCX_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn pcx");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Every file under `dir` with its bytes, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_owned()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_owned(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// The scene with every coordinate rounded to 32-bit storage.
pub fn rounded_to_f32(scene: &LabeledScene) -> LabeledScene {
    let points = scene
        .cloud
        .points()
        .iter()
        .map(|p| Point3::from(p.to_array().map(|v| f64::from(v as f32))))
        .collect();
    let cloud = PointCloud::from_parts(points, scene.cloud.colors().map(<[_]>::to_vec)).unwrap();
    LabeledScene {
        cloud,
        ..scene.clone()
    }
}
