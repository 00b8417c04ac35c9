//! PLY 1.0 point clouds, `ascii` and `binary_little_endian`.
//!
//! Only the `vertex` element is decoded: `x`, `y`, `z` (float or double) and
//! optionally `red`, `green`, `blue` (uchar). Other vertex properties are
//! skipped, and other elements are ignored.

use std::fmt::Write as _;

use pcx_core::{Point3, PointCloud, Rgb};

use crate::error::{Error, Location, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn decode(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => f64::from(b[0] as i8),
            Scalar::U8 => f64::from(b[0]),
            Scalar::I16 => f64::from(i16::from_le_bytes([b[0], b[1]])),
            Scalar::U16 => f64::from(u16::from_le_bytes([b[0], b[1]])),
            Scalar::I32 => f64::from(i32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::U32 => f64::from(u32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::F32 => f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
        }
    }

    /// Parses an ascii token, rounding through `f32` for float properties.
    fn parse_token(self, tok: &str) -> Option<f64> {
        match self {
            Scalar::F32 => tok.parse::<f32>().ok().map(f64::from),
            Scalar::F64 => tok.parse::<f64>().ok(),
            Scalar::I8 => tok.parse::<i8>().ok().map(f64::from),
            Scalar::U8 => tok.parse::<u8>().ok().map(f64::from),
            Scalar::I16 => tok.parse::<i16>().ok().map(f64::from),
            Scalar::U16 => tok.parse::<u16>().ok().map(f64::from),
            Scalar::I32 => tok.parse::<i32>().ok().map(f64::from),
            Scalar::U32 => tok.parse::<u32>().ok().map(f64::from),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug)]
struct Header {
    encoding: Encoding,
    elements: Vec<Element>,
    /// Byte offset of the body.
    body: usize,
    /// Number of header lines, for ascii line numbers.
    lines: usize,
}

fn header_err(line: usize, message: impl Into<String>) -> Error {
    Error::MalformedHeader {
        line,
        message: message.into(),
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut pos = 0;
    let mut line_no = 0;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        line_no += 1;
        let Some(len) = bytes[pos..].iter().position(|&b| b == b'\n') else {
            return Err(header_err(line_no, "missing end_header"));
        };
        let raw = &bytes[pos..pos + len];
        pos += len + 1;
        let line = std::str::from_utf8(raw)
            .map_err(|_| header_err(line_no, "header is not UTF-8"))?
            .trim_end_matches('\r');
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap_or("");
        if line_no == 1 {
            if line != "ply" {
                return Err(header_err(1, "first line must be \"ply\""));
            }
            continue;
        }
        match keyword {
            "format" => {
                let fmt = words.next().unwrap_or("");
                if words.next() != Some("1.0") {
                    return Err(header_err(line_no, "expected format version 1.0"));
                }
                encoding = Some(match fmt {
                    "ascii" => Encoding::Ascii,
                    "binary_little_endian" => Encoding::BinaryLittleEndian,
                    "binary_big_endian" => return Err(Error::UnsupportedFormat(fmt.to_owned())),
                    _ => return Err(header_err(line_no, format!("unknown format {fmt:?}"))),
                });
            }
            "comment" | "obj_info" | "" => {}
            "element" => {
                let (Some(name), Some(count)) = (words.next(), words.next()) else {
                    return Err(header_err(line_no, "element needs a name and a count"));
                };
                let count = count
                    .parse()
                    .map_err(|_| header_err(line_no, format!("bad element count {count:?}")))?;
                elements.push(Element {
                    name: name.to_owned(),
                    count,
                    properties: Vec::new(),
                });
            }
            "property" => {
                let Some(element) = elements.last_mut() else {
                    return Err(header_err(line_no, "property before any element"));
                };
                let scalar = |w: Option<&str>| {
                    w.and_then(Scalar::parse)
                        .ok_or_else(|| header_err(line_no, format!("unknown property type {w:?}")))
                };
                let first = words.next();
                let property = if first == Some("list") {
                    let count = scalar(words.next())?;
                    let item = scalar(words.next())?;
                    if matches!(count, Scalar::F32 | Scalar::F64) {
                        return Err(header_err(line_no, "list count must be an integer type"));
                    }
                    words
                        .next()
                        .ok_or_else(|| header_err(line_no, "list property needs a name"))?;
                    Property::List { count, item }
                } else {
                    let ty = scalar(first)?;
                    let name = words
                        .next()
                        .ok_or_else(|| header_err(line_no, "property needs a name"))?;
                    Property::Scalar {
                        name: name.to_owned(),
                        ty,
                    }
                };
                element.properties.push(property);
            }
            "end_header" => break,
            other => return Err(header_err(line_no, format!("unknown keyword {other:?}"))),
        }
    }
    let encoding = encoding.ok_or_else(|| header_err(line_no, "missing format line"))?;
    Ok(Header {
        encoding,
        elements,
        body: pos,
        lines: line_no,
    })
}

/// Positions of the decoded fields within a vertex record.
struct VertexLayout {
    xyz: [usize; 3],
    rgb: Option<[usize; 3]>,
}

fn vertex_layout(element: &Element, line: usize) -> Result<VertexLayout> {
    let find = |wanted: &str| {
        element.properties.iter().position(|p| matches!(p, Property::Scalar { name, .. } if name == wanted))
    };
    let ty = |i: usize| match &element.properties[i] {
        Property::Scalar { ty, .. } => *ty,
        Property::List { .. } => unreachable!("found by scalar name"),
    };
    let mut xyz = [0; 3];
    for (slot, axis) in xyz.iter_mut().zip(["x", "y", "z"]) {
        let i = find(axis).ok_or_else(|| header_err(line, format!("vertex has no {axis} property")))?;
        if !matches!(ty(i), Scalar::F32 | Scalar::F64) {
            return Err(header_err(line, format!("vertex {axis} must be float or double")));
        }
        *slot = i;
    }
    let rgb = match (find("red"), find("green"), find("blue")) {
        (Some(r), Some(g), Some(b)) => {
            if [r, g, b].iter().any(|&i| ty(i) != Scalar::U8) {
                return Err(header_err(line, "vertex colors must be uchar"));
            }
            Some([r, g, b])
        }
        (None, None, None) => None,
        _ => return Err(header_err(line, "vertex colors need all of red, green, blue")),
    };
    Ok(VertexLayout { xyz, rgb })
}

/// Decodes the vertex element of a PLY file.
pub fn read_ply(bytes: &[u8]) -> Result<PointCloud> {
    let header = parse_header(bytes)?;
    let Some(vertex_index) = header.elements.iter().position(|e| e.name == "vertex") else {
        return Err(header_err(header.lines, "no vertex element"));
    };
    let vertex = &header.elements[vertex_index];
    let layout = vertex_layout(vertex, header.lines)?;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(vertex.count.min(1 << 24));
    match header.encoding {
        Encoding::BinaryLittleEndian => {
            let mut reader = BinaryReader {
                bytes,
                pos: header.body,
            };
            for e in &header.elements[..vertex_index] {
                for _ in 0..e.count {
                    reader.record(&e.properties, None)?;
                }
            }
            for _ in 0..vertex.count {
                let mut row = Vec::with_capacity(vertex.properties.len());
                reader.record(&vertex.properties, Some(&mut row))?;
                rows.push(row);
            }
        }
        Encoding::Ascii => {
            let body = std::str::from_utf8(&bytes[header.body..]).map_err(|e| Error::MalformedBody {
                at: Location::Byte((header.body + e.valid_up_to()) as u64),
                message: "ascii body is not UTF-8".into(),
            })?;
            let mut lines = body
                .lines()
                .enumerate()
                .map(|(i, l)| (header.lines + 1 + i, l))
                .filter(|(_, l)| !l.trim().is_empty());
            let mut last_line = header.lines;
            let mut next_line = |what: &str| {
                lines.next().map(|(n, l)| {
                    last_line = n;
                    (n, l)
                }).ok_or_else(|| Error::TruncatedBody {
                    at: Location::Line(last_line + 1),
                    message: format!("expected {what}"),
                })
            };
            for e in &header.elements[..vertex_index] {
                for i in 0..e.count {
                    next_line(&format!("{} {i} of {}", e.name, e.count))?;
                }
            }
            for i in 0..vertex.count {
                let (n, line) = next_line(&format!("vertex {i} of {}", vertex.count))?;
                rows.push(ascii_record(&vertex.properties, line, n)?);
            }
        }
    }

    let mut points = Vec::with_capacity(rows.len());
    let mut colors = layout.rgb.map(|_| Vec::with_capacity(rows.len()));
    for row in &rows {
        let [x, y, z] = layout.xyz.map(|i| row[i]);
        points.push(Point3::new(x, y, z));
        if let (Some(rgb), Some(colors)) = (layout.rgb, colors.as_mut()) {
            colors.push(Rgb(rgb.map(|i| row[i] as u8)));
        }
    }
    Ok(PointCloud::from_parts(points, colors)?)
}

struct BinaryReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl BinaryReader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::TruncatedBody {
                at: Location::Byte(self.pos as u64),
                message: format!("needed {n} more bytes, {} left", self.bytes.len() - self.pos),
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    /// Reads one element record, pushing scalar values (lists as NaN) into
    /// `row` when given.
    fn record(&mut self, properties: &[Property], mut row: Option<&mut Vec<f64>>) -> Result<()> {
        for p in properties {
            let value = match p {
                Property::Scalar { ty, .. } => ty.decode(self.take(ty.size())?),
                Property::List { count, item } => {
                    let n = count.decode(self.take(count.size())?);
                    if n < 0.0 {
                        return Err(Error::MalformedBody {
                            at: Location::Byte((self.pos - count.size()) as u64),
                            message: format!("negative list length {n}"),
                        });
                    }
                    self.take(n as usize * item.size())?;
                    f64::NAN
                }
            };
            if let Some(row) = row.as_deref_mut() {
                row.push(value);
            }
        }
        Ok(())
    }
}

fn ascii_record(properties: &[Property], line: &str, line_no: usize) -> Result<Vec<f64>> {
    let bad = |message: String| Error::MalformedBody {
        at: Location::Line(line_no),
        message,
    };
    let mut tokens = line.split_whitespace();
    let mut next = |what: &str| tokens.next().ok_or_else(|| bad(format!("missing {what}")));
    let mut row = Vec::with_capacity(properties.len());
    for p in properties {
        match p {
            Property::Scalar { name, ty } => {
                let tok = next(name)?;
                let v = ty
                    .parse_token(tok)
                    .ok_or_else(|| bad(format!("cannot parse {tok:?} as {ty:?} for {name}")))?;
                row.push(v);
            }
            Property::List { count, item } => {
                let tok = next("list length")?;
                let n = count
                    .parse_token(tok)
                    .filter(|n| *n >= 0.0)
                    .ok_or_else(|| bad(format!("bad list length {tok:?}")))?;
                for _ in 0..n as usize {
                    let tok = next("list item")?;
                    item.parse_token(tok)
                        .ok_or_else(|| bad(format!("cannot parse list item {tok:?}")))?;
                }
                row.push(f64::NAN);
            }
        }
    }
    if let Some(extra) = tokens.next() {
        return Err(bad(format!("unexpected trailing token {extra:?}")));
    }
    Ok(row)
}

fn to_f32(index: usize, value: f64) -> Result<f32> {
    let v = value as f32;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::CoordinateOverflow { index, value })
    }
}

/// Encodes `cloud` with 32-bit float coordinates and, when colored, 8-bit
/// colors. Output bytes depend only on the input.
pub fn write_ply(cloud: &PointCloud, encoding: Encoding) -> Result<Vec<u8>> {
    let colors = cloud.colors();
    let mut coords = Vec::with_capacity(cloud.len());
    for (i, p) in cloud.points().iter().enumerate() {
        coords.push([to_f32(i, p.x)?, to_f32(i, p.y)?, to_f32(i, p.z)?]);
    }

    let mut header = String::from("ply\n");
    header.push_str(match encoding {
        Encoding::Ascii => "format ascii 1.0\n",
        Encoding::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    let _ = writeln!(header, "element vertex {}", cloud.len());
    header.push_str("property float x\nproperty float y\nproperty float z\n");
    if colors.is_some() {
        header.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    header.push_str("end_header\n");

    let mut out = header.into_bytes();
    match encoding {
        Encoding::BinaryLittleEndian => {
            out.reserve(cloud.len() * 15);
            for (i, c) in coords.iter().enumerate() {
                for v in c {
                    out.extend_from_slice(&v.to_le_bytes());
                }
                if let Some(colors) = colors {
                    out.extend_from_slice(&colors[i].0);
                }
            }
        }
        Encoding::Ascii => {
            let mut body = String::with_capacity(cloud.len() * 32);
            for (i, [x, y, z]) in coords.iter().enumerate() {
                let _ = write!(body, "{x} {y} {z}");
                if let Some(colors) = colors {
                    let [r, g, b] = colors[i].0;
                    let _ = write!(body, " {r} {g} {b}");
                }
                body.push('\n');
            }
            out.extend_from_slice(body.as_bytes());
        }
    }
    Ok(out)
}
