//! Detections / ground-truth JSON files.
//!
//! ```json
//! { "video": "pool.mp4", "frame_width": 640, "frame_height": 480,
//!   "frames": [ { "index": 0, "detections": [
//!     { "bbox": [10, 20, 110, 80], "score": 0.97, "class": "diver", "identity": "Emma" } ] } ] }
//! ```
//!
//! Parsing goes through `serde_json::Value` so every schema error can name
//! the offending field path.

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::imaging::BoundingBox;

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame_index: u64,
    pub bbox: BoundingBox,
    pub score: f64,
    pub class_label: String,
    /// Present on ground truth and on identified detections.
    pub identity: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameDetections {
    pub index: u64,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionsFile {
    pub video: String,
    pub frame_width: u32,
    pub frame_height: u32,
    /// Sorted by index, indices unique.
    pub frames: Vec<FrameDetections>,
}

/// Result of a lenient parse: the document plus one message per ignored field.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub file: DetectionsFile,
    pub warnings: Vec<String>,
}

struct Ctx {
    strict: bool,
    warnings: Vec<String>,
}

impl Ctx {
    fn check_keys(&mut self, obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                let at = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
                if self.strict {
                    return Err(Error::schema(at, "unknown field"));
                }
                self.warnings.push(format!("{at}: unknown field ignored"));
            }
        }
        Ok(())
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::schema(join(path, key), "missing required field"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::schema(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::schema(path, "expected an array"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::schema(path, "expected a string"))
}

fn as_uint(v: &Value, path: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| Error::schema(path, "expected a non-negative integer"))
}

/// Box coordinates may be written as integral floats (`12.0`).
fn as_coord(v: &Value, path: &str) -> Result<u32> {
    if let Some(u) = v.as_u64() {
        return u32::try_from(u).map_err(|_| Error::schema(path, "coordinate too large"));
    }
    match v.as_f64() {
        Some(f) if f >= 0.0 && f.fract() == 0.0 && f <= u32::MAX as f64 => Ok(f as u32),
        _ => Err(Error::schema(path, "expected a non-negative integer pixel coordinate")),
    }
}

fn parse_detection(ctx: &mut Ctx, v: &Value, frame_index: u64, path: &str) -> Result<Detection> {
    let obj = as_object(v, path)?;
    ctx.check_keys(obj, &["bbox", "score", "class", "identity"], path)?;
    let bpath = join(path, "bbox");
    let coords = as_array(field(obj, "bbox", path)?, &bpath)?;
    if coords.len() != 4 {
        return Err(Error::schema(bpath, "expected [x_min, y_min, x_max, y_max]"));
    }
    let c: Vec<u32> = coords
        .iter()
        .enumerate()
        .map(|(i, v)| as_coord(v, &format!("{bpath}[{i}]")))
        .collect::<Result<_>>()?;
    let bbox = BoundingBox::new(c[0], c[1], c[2], c[3])
        .map_err(|_| Error::schema(&bpath, "box must satisfy x_min < x_max and y_min < y_max"))?;
    let spath = join(path, "score");
    let score = field(obj, "score", path)?
        .as_f64()
        .ok_or_else(|| Error::schema(&spath, "expected a number"))?;
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::schema(spath, "score must be in [0, 1]"));
    }
    let class_label = as_str(field(obj, "class", path)?, &join(path, "class"))?.to_string();
    let identity = match obj.get("identity") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let ipath = join(path, "identity");
            let s = as_str(v, &ipath)?;
            if s.is_empty() {
                return Err(Error::schema(ipath, "identity must be nonempty"));
            }
            Some(s.to_string())
        }
    };
    Ok(Detection {
        frame_index,
        bbox,
        score,
        class_label,
        identity,
    })
}

/// Parse and validate a detections document. `strict` turns unknown fields
/// into errors instead of warnings.
pub fn parse_detections(text: &str, strict: bool) -> Result<Parsed> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    let mut ctx = Ctx {
        strict,
        warnings: Vec::new(),
    };
    let obj = as_object(&root, "document")?;
    ctx.check_keys(obj, &["video", "frame_width", "frame_height", "frames"], "")?;
    let video = as_str(field(obj, "video", "")?, "video")?.to_string();
    let dim = |key: &str| -> Result<u32> {
        let v = as_uint(field(obj, key, "")?, key)?;
        match u32::try_from(v) {
            Ok(d) if d > 0 => Ok(d),
            _ => Err(Error::schema(key, "expected a positive 32-bit integer")),
        }
    };
    let frame_width = dim("frame_width")?;
    let frame_height = dim("frame_height")?;

    let mut frames = Vec::new();
    let mut seen = BTreeSet::new();
    for (fi, fv) in as_array(field(obj, "frames", "")?, "frames")?.iter().enumerate() {
        let path = format!("frames[{fi}]");
        let fobj = as_object(fv, &path)?;
        ctx.check_keys(fobj, &["index", "detections"], &path)?;
        let index = as_uint(field(fobj, "index", &path)?, &join(&path, "index"))?;
        if !seen.insert(index) {
            return Err(Error::schema(join(&path, "index"), format!("duplicate frame index {index}")));
        }
        let dpath = join(&path, "detections");
        let detections = as_array(field(fobj, "detections", &path)?, &dpath)?
            .iter()
            .enumerate()
            .map(|(di, dv)| parse_detection(&mut ctx, dv, index, &format!("{dpath}[{di}]")))
            .collect::<Result<Vec<_>>>()?;
        frames.push(FrameDetections { index, detections });
    }
    frames.sort_by_key(|f| f.index);

    let file = DetectionsFile {
        video,
        frame_width,
        frame_height,
        frames,
    };
    file.check_bounds()?;
    Ok(Parsed {
        file,
        warnings: ctx.warnings,
    })
}

#[derive(Serialize)]
struct WireDetection<'a> {
    bbox: [u32; 4],
    score: f64,
    class: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    identity: Option<&'a str>,
}

#[derive(Serialize)]
struct WireFrame<'a> {
    index: u64,
    detections: Vec<WireDetection<'a>>,
}

#[derive(Serialize)]
struct WireFile<'a> {
    video: &'a str,
    frame_width: u32,
    frame_height: u32,
    frames: Vec<WireFrame<'a>>,
}

impl DetectionsFile {
    pub fn new(video: impl Into<String>, frame_width: u32, frame_height: u32) -> Self {
        Self {
            video: video.into(),
            frame_width,
            frame_height,
            frames: Vec::new(),
        }
    }

    /// Every box that does not fit the declared frame size, reported together.
    pub fn check_bounds(&self) -> Result<()> {
        let offenders: Vec<String> = self
            .frames
            .iter()
            .flat_map(|f| f.detections.iter().enumerate().map(move |(i, d)| (f.index, i, d)))
            .filter(|(_, _, d)| !d.bbox.fits_within(self.frame_width, self.frame_height))
            .map(|(f, i, d)| format!("frame {f} detection {i} {}", d.bbox))
            .collect();
        if offenders.is_empty() {
            Ok(())
        } else {
            Err(Error::BoxesOutOfFrame(offenders))
        }
    }

    /// Ground truth requires an identity on every detection.
    pub fn require_identities(&self) -> Result<()> {
        for f in &self.frames {
            for (i, d) in f.detections.iter().enumerate() {
                if d.identity.is_none() {
                    return Err(Error::schema(
                        format!("frame {} detection {i}", f.index),
                        "ground truth detection without identity",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn frame(&self, index: u64) -> Option<&FrameDetections> {
        self.frames
            .binary_search_by_key(&index, |f| f.index)
            .ok()
            .map(|i| &self.frames[i])
    }

    pub fn detection_count(&self) -> usize {
        self.frames.iter().map(|f| f.detections.len()).sum()
    }

    pub fn to_json(&self) -> String {
        let wire = WireFile {
            video: &self.video,
            frame_width: self.frame_width,
            frame_height: self.frame_height,
            frames: self
                .frames
                .iter()
                .map(|f| WireFrame {
                    index: f.index,
                    detections: f
                        .detections
                        .iter()
                        .map(|d| WireDetection {
                            bbox: [d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max],
                            score: d.score,
                            class: &d.class_label,
                            identity: d.identity.as_deref(),
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&wire).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "video": "pool", "frame_width": 100, "frame_height": 50,
        "frames": [
            { "index": 3, "detections": [] },
            { "index": 1, "detections": [
                { "bbox": [0, 0, 10, 10], "score": 0.9, "class": "diver", "identity": "Emma" },
                { "bbox": [50.0, 5, 100, 50], "score": 1, "class": "diver" }
            ] }
        ]
    }"#;

    #[test]
    fn parses_and_sorts() {
        let p = parse_detections(DOC, true).unwrap();
        assert!(p.warnings.is_empty());
        let f = &p.file;
        assert_eq!(f.frames.iter().map(|f| f.index).collect::<Vec<_>>(), [1, 3]);
        let d = &f.frames[0].detections;
        assert_eq!(d[0].identity.as_deref(), Some("Emma"));
        assert_eq!(d[1].bbox, BoundingBox::new(50, 5, 100, 50).unwrap());
        assert_eq!(d[1].frame_index, 1);
        assert!(f.require_identities().is_err());
    }

    #[test]
    fn round_trip() {
        let f = parse_detections(DOC, true).unwrap().file;
        let again = parse_detections(&f.to_json(), true).unwrap().file;
        assert_eq!(f, again);
    }

    #[test]
    fn unknown_fields_strict_and_lenient() {
        let doc = DOC.replace(r#""score": 1,"#, r#""score": 1, "track": 4,"#);
        let err = parse_detections(&doc, true).unwrap_err();
        match err {
            Error::Schema { location, .. } => assert_eq!(location, "frames[1].detections[1].track"),
            e => panic!("{e}"),
        }
        let p = parse_detections(&doc, false).unwrap();
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn field_errors_carry_paths() {
        let cases = [
            (DOC.replace(r#""score": 0.9"#, r#""score": 1.5"#), "frames[1].detections[0].score"),
            (DOC.replace(r#"[0, 0, 10, 10]"#, r#"[0, 0, 10]"#), "frames[1].detections[0].bbox"),
            (DOC.replace(r#"[0, 0, 10, 10]"#, r#"[0, 0, 10.5, 10]"#), "frames[1].detections[0].bbox[2]"),
            (DOC.replace(r#"[0, 0, 10, 10]"#, r#"[10, 0, 10, 10]"#), "frames[1].detections[0].bbox"),
            (DOC.replace(r#""index": 3"#, r#""index": 1"#), "frames[1].index"),
            (DOC.replace(r#""video": "pool","#, ""), "video"),
            (DOC.replace(r#""identity": "Emma""#, r#""identity": """#), "frames[1].detections[0].identity"),
        ];
        for (doc, want) in cases {
            match parse_detections(&doc, true) {
                Err(Error::Schema { location, .. }) => assert_eq!(location, want),
                other => panic!("expected schema error at {want}, got {other:?}"),
            }
        }
    }

    #[test]
    fn syntax_error_has_line() {
        match parse_detections("{\n  \"video\": ,\n}", true) {
            Err(Error::Schema { location, .. }) => assert!(location.starts_with("line 2"), "{location}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_of_frame_boxes_all_listed() {
        let doc = DOC
            .replace(r#"[0, 0, 10, 10]"#, r#"[0, 0, 101, 10]"#)
            .replace(r#"[50.0, 5, 100, 50]"#, r#"[50, 5, 100, 51]"#);
        match parse_detections(&doc, true) {
            Err(Error::BoxesOutOfFrame(list)) => assert_eq!(list.len(), 2),
            other => panic!("{other:?}"),
        }
    }
}
