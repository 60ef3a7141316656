//! KITTI text formats: 3D detections, tracking labels and tracking results.
//!
//! All three are whitespace-separated, one object per line. Column layouts
//! (0-based):
//!
//! | file       | columns |
//! |------------|---------|
//! | detections | `frame type truncated occluded alpha x1 y1 x2 y2 h w l x y z rotation_y score` (17) |
//! | labels     | `frame track_id type truncated occluded alpha x1 y1 x2 y2 h w l x y z rotation_y` (17) |
//! | results    | `frame track_id type truncated occluded alpha x1 y1 x2 y2 h w l x y z rotation_y score` (18) |
//!
//! Note the size order is `h w l`. Blank lines are ignored. See `FORMATS.md`
//! at the repository root for the full contract.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::{Box3D, GeometryError};
use crate::tracker::{Detection, FrameGroups, TrackReport};

pub const DETECTION_COLUMNS: usize = 17;
pub const LABEL_COLUMNS: usize = 17;
pub const RESULT_COLUMNS: usize = 18;

/// Placeholders written for fields the tracker does not estimate.
pub const PLACEHOLDER_TRUNCATED: i32 = -1;
pub const PLACEHOLDER_OCCLUDED: i32 = -1;
pub const PLACEHOLDER_ALPHA: i32 = -10;
pub const PLACEHOLDER_BBOX: i32 = -1;

pub const DONT_CARE: &str = "DontCare";

#[derive(Debug, Error)]
pub enum KittiError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}:{line}: expected {expected} fields, found {found}")]
    Arity {
        source_name: String,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{source_name}:{line}: field `{field}` is not a valid number: {value:?}")]
    Number {
        source_name: String,
        line: usize,
        field: &'static str,
        value: String,
    },
    #[error("{source_name}:{line}: invalid box: {source}")]
    Box {
        source_name: String,
        line: usize,
        #[source]
        source: GeometryError,
    },
}

/// One row of a KITTI tracking label file.
#[derive(Debug, Clone, PartialEq)]
pub struct GtObject {
    pub frame: u32,
    /// Ground-truth track id; `-1` on `DontCare` rows.
    pub track_id: i64,
    pub category: String,
    pub truncated: f64,
    pub occluded: f64,
    pub alpha: f64,
    pub bbox2d: [f64; 4],
    /// `None` only for `DontCare` rows, whose sentinel 3D fields are not a box.
    pub box3d: Option<Box3D>,
}

impl GtObject {
    pub fn is_dont_care(&self) -> bool {
        self.category == DONT_CARE
    }

    /// Whether the object takes part in matching.
    pub fn is_matchable(&self) -> bool {
        !self.is_dont_care() && self.box3d.is_some()
    }
}

struct Row<'a> {
    source_name: &'a str,
    line: usize,
    fields: Vec<&'a str>,
}

impl<'a> Row<'a> {
    fn num<T: FromStr>(&self, idx: usize, field: &'static str) -> Result<T, KittiError> {
        self.fields[idx].parse().map_err(|_| KittiError::Number {
            source_name: self.source_name.to_string(),
            line: self.line,
            field,
            value: self.fields[idx].to_string(),
        })
    }

    fn float(&self, idx: usize, field: &'static str) -> Result<f64, KittiError> {
        let v: f64 = self.num(idx, field)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(KittiError::Number {
                source_name: self.source_name.to_string(),
                line: self.line,
                field,
                value: self.fields[idx].to_string(),
            })
        }
    }

    /// Reads `h w l x y z rotation_y` starting at `start`.
    fn box3d(&self, start: usize) -> Result<Box3D, KittiError> {
        let names = ["h", "w", "l", "x", "y", "z", "rotation_y"];
        let mut v = [0.0; 7];
        for (k, name) in names.iter().enumerate() {
            v[k] = self.float(start + k, name)?;
        }
        let [h, w, l, x, y, z, ry] = v;
        Box3D::new(x, y, z, l, w, h, ry).map_err(|source| KittiError::Box {
            source_name: self.source_name.to_string(),
            line: self.line,
            source,
        })
    }

    fn check_numeric(&self, range: std::ops::Range<usize>) -> Result<(), KittiError> {
        for idx in range {
            self.float(idx, "numeric")?;
        }
        Ok(())
    }
}

fn rows<'a>(
    text: &'a str,
    source_name: &'a str,
    expected: usize,
) -> impl Iterator<Item = Result<Row<'a>, KittiError>> + 'a {
    text.lines().enumerate().filter_map(move |(k, raw)| {
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            return None;
        }
        let line = k + 1;
        if fields.len() != expected {
            return Some(Err(KittiError::Arity {
                source_name: source_name.to_string(),
                line,
                expected,
                found: fields.len(),
            }));
        }
        Some(Ok(Row {
            source_name,
            line,
            fields,
        }))
    })
}

fn read_file(path: &Path) -> Result<String, KittiError> {
    std::fs::read_to_string(path).map_err(|source| KittiError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn category_matches(found: &str, wanted: Option<&str>) -> bool {
    wanted.map_or(true, |w| found.eq_ignore_ascii_case(w))
}

fn push<T>(groups: &mut FrameGroups<T>, frame: u32, item: T) {
    groups.entry(frame).or_default().push(item);
}

/// Parses a detection file. `category` filters rows case-insensitively; rows
/// of other categories are still checked to be well formed.
pub fn parse_detections(
    text: &str,
    source_name: &str,
    category: Option<&str>,
) -> Result<FrameGroups<Detection>, KittiError> {
    let mut groups = FrameGroups::new();
    for row in rows(text, source_name, DETECTION_COLUMNS) {
        let row = row?;
        let frame: u32 = row.num(0, "frame")?;
        row.check_numeric(2..9)?;
        let score = row.float(16, "score")?;
        if !category_matches(row.fields[1], category) {
            row.check_numeric(9..16)?;
            continue;
        }
        let box3d = row.box3d(9)?;
        push(
            &mut groups,
            frame,
            Detection::new(frame, box3d, score, row.fields[1]),
        );
    }
    Ok(groups)
}

pub fn read_detections(
    path: impl AsRef<Path>,
    category: Option<&str>,
) -> Result<FrameGroups<Detection>, KittiError> {
    let path = path.as_ref();
    parse_detections(&read_file(path)?, &path.display().to_string(), category)
}

/// Parses a tracking label file. `DontCare` rows are always kept (flagged,
/// never matched); other rows are filtered by `category`.
pub fn parse_gt_labels(
    text: &str,
    source_name: &str,
    category: Option<&str>,
) -> Result<FrameGroups<GtObject>, KittiError> {
    let mut groups = FrameGroups::new();
    for row in rows(text, source_name, LABEL_COLUMNS) {
        let row = row?;
        let frame: u32 = row.num(0, "frame")?;
        let track_id: i64 = row.num(1, "track_id")?;
        let cat = row.fields[2];
        let dont_care = cat == DONT_CARE;
        if !dont_care && !category_matches(cat, category) {
            row.check_numeric(3..17)?;
            continue;
        }
        let truncated = row.float(3, "truncated")?;
        let occluded = row.float(4, "occluded")?;
        let alpha = row.float(5, "alpha")?;
        let bbox2d = [
            row.float(6, "x1")?,
            row.float(7, "y1")?,
            row.float(8, "x2")?,
            row.float(9, "y2")?,
        ];
        let box3d = if dont_care {
            row.check_numeric(10..17)?;
            row.box3d(10).ok()
        } else {
            Some(row.box3d(10)?)
        };
        push(
            &mut groups,
            frame,
            GtObject {
                frame,
                track_id,
                category: cat.to_string(),
                truncated,
                occluded,
                alpha,
                bbox2d,
                box3d,
            },
        );
    }
    Ok(groups)
}

pub fn read_gt_labels(
    path: impl AsRef<Path>,
    category: Option<&str>,
) -> Result<FrameGroups<GtObject>, KittiError> {
    let path = path.as_ref();
    parse_gt_labels(&read_file(path)?, &path.display().to_string(), category)
}

/// Parses a tracking result file (the format [`write_tracking_results`] emits).
pub fn parse_tracking_results(
    text: &str,
    source_name: &str,
    category: Option<&str>,
) -> Result<FrameGroups<TrackReport>, KittiError> {
    let mut groups = FrameGroups::new();
    for row in rows(text, source_name, RESULT_COLUMNS) {
        let row = row?;
        let frame: u32 = row.num(0, "frame")?;
        let id: u64 = row.num(1, "track_id")?;
        row.check_numeric(3..10)?;
        let score = row.float(17, "score")?;
        if !category_matches(row.fields[2], category) {
            row.check_numeric(10..17)?;
            continue;
        }
        let box3d = row.box3d(10)?;
        push(
            &mut groups,
            frame,
            TrackReport {
                frame,
                id,
                box3d,
                score,
            },
        );
    }
    Ok(groups)
}

pub fn read_tracking_results(
    path: impl AsRef<Path>,
    category: Option<&str>,
) -> Result<FrameGroups<TrackReport>, KittiError> {
    let path = path.as_ref();
    parse_tracking_results(&read_file(path)?, &path.display().to_string(), category)
}

/// Renders reports in KITTI tracking format, sorted by `(frame, id)`.
///
/// Numbers use the shortest representation that parses back to the same
/// `f64`, so reading the output reproduces every tracked field exactly.
pub fn format_tracking_results(reports: &[TrackReport], category: &str) -> String {
    let mut sorted: Vec<&TrackReport> = reports.iter().collect();
    sorted.sort_by_key(|r| (r.frame, r.id));
    let mut out = String::new();
    for r in sorted {
        let b = &r.box3d;
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {p} {p} {p} {p} {} {} {} {} {} {} {} {}",
            r.frame,
            r.id,
            category,
            PLACEHOLDER_TRUNCATED,
            PLACEHOLDER_OCCLUDED,
            PLACEHOLDER_ALPHA,
            b.h(),
            b.w(),
            b.l(),
            b.x(),
            b.y(),
            b.z(),
            b.theta(),
            r.score,
            p = PLACEHOLDER_BBOX,
        );
    }
    out
}

/// Writes a result file. An empty report list produces an empty file.
pub fn write_tracking_results(
    reports: &[TrackReport],
    category: &str,
    path: impl AsRef<Path>,
) -> Result<(), KittiError> {
    let path = path.as_ref();
    std::fs::write(path, format_tracking_results(reports, category)).map_err(|source| {
        KittiError::Io {
            path: path.display().to_string(),
            source,
        }
    })
}

/// Sequence files in `dir` named `NNNN.txt` (exactly four digits), keyed by
/// the four-digit stem. Other entries are ignored.
pub fn discover_sequences(dir: impl AsRef<Path>) -> Result<BTreeMap<String, PathBuf>, KittiError> {
    let dir = dir.as_ref();
    let io_err = |source| KittiError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut found = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(stem) = name.strip_suffix(".txt") else {
            continue;
        };
        if stem.len() == 4 && stem.bytes().all(|b| b.is_ascii_digit()) && path.is_file() {
            found.insert(stem.to_string(), path);
        }
    }
    Ok(found)
}
