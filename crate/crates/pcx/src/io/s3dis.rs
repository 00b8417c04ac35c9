//! Import of S3DIS-style rooms: one `<class>_<index>.txt` file per object,
//! each line `x y z r g b`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use pcx_core::{LabeledScene, Point3, PointCloud, Rgb, SemanticClass};

use super::read_file;
use crate::error::{Error, Result};

/// Class name of an annotation file: the lowercased stem before the final
/// underscore, which must be followed by a decimal index.
pub fn class_from_filename(name: &str) -> Result<SemanticClass> {
    let bad = || Error::UnparsableFilename(name.to_owned());
    let stem = name.strip_suffix(".txt").ok_or_else(bad)?;
    let (class, index) = stem.rsplit_once('_').ok_or_else(bad)?;
    if class.is_empty() || index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    SemanticClass::normalized(class).map_err(|_| bad())
}

/// Parses one `x y z r g b` line.
pub fn parse_line(line: &str) -> std::result::Result<(Point3, Rgb), String> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != 6 {
        return Err(format!("expected 6 fields, found {}", tokens.len()));
    }
    let mut xyz = [0.0; 3];
    for (v, t) in xyz.iter_mut().zip(&tokens[..3]) {
        *v = t.parse::<f64>().map_err(|_| format!("bad coordinate {t:?}"))?;
        if !v.is_finite() {
            return Err(format!("non-finite coordinate {t:?}"));
        }
    }
    let mut rgb = [0u8; 3];
    for (v, t) in rgb.iter_mut().zip(&tokens[3..]) {
        *v = t.parse::<u8>().map_err(|_| format!("bad color component {t:?}, expected 0-255"))?;
    }
    Ok((Point3::from(xyz), Rgb(rgb)))
}

/// The directory holding the annotation files and the room's scene id.
///
/// A room directory may hold its files directly or in an `Annotations`
/// subdirectory; when `dir` itself is named `Annotations`, the room name is
/// taken from its parent.
fn resolve_room(dir: &Path) -> (PathBuf, String) {
    let name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let nested = dir.join("Annotations");
    if nested.is_dir() {
        (nested, name(dir))
    } else if name(dir) == "Annotations" {
        (dir.to_owned(), dir.parent().map(name).unwrap_or_default())
    } else {
        (dir.to_owned(), name(dir))
    }
}

pub fn import_s3dis_room(dir: &Path) -> Result<LabeledScene> {
    let (annotations, scene_id) = resolve_room(dir);
    let mut files = Vec::new();
    for entry in fs::read_dir(&annotations).map_err(Error::io(&annotations))? {
        let entry = entry.map_err(Error::io(&annotations))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if entry.file_type().map_err(Error::io(entry.path()))?.is_file() && name.ends_with(".txt") {
            files.push(name);
        }
    }
    if files.is_empty() {
        return Err(Error::EmptyRoom(dir.to_owned()));
    }
    files.sort();

    let mut points = Vec::new();
    let mut colors = Vec::new();
    let mut labels = Vec::new();
    let mut classes = BTreeMap::new();
    for (i, name) in files.iter().enumerate() {
        let class = class_from_filename(name)?;
        let path = annotations.join(name);
        let text = String::from_utf8(read_file(&path)?).map_err(|e| Error::MalformedLine {
            file: path.clone(),
            line: 0,
            message: format!("not UTF-8: {e}"),
        })?;
        let id = i as u32 + 1;
        let before = points.len();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (p, c) = parse_line(line).map_err(|message| Error::MalformedLine {
                file: path.clone(),
                line: n + 1,
                message,
            })?;
            points.push(p);
            colors.push(c);
            labels.push(id);
        }
        if points.len() == before {
            return Err(Error::EmptyAnnotation(path));
        }
        classes.insert(id, class);
    }
    let cloud = PointCloud::with_colors(points, colors)?;
    Ok(LabeledScene::new(scene_id, cloud, labels, classes)?)
}
