//! Session orchestration: extract descriptors for every accepted detection,
//! cluster them, and hand out one identity per detection and frame.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::clustering::{
    kmeans_fit, label_clusters, squared_distance, FeatureVector, IdentityMap, KMeansParams,
    Standardizer,
};
use crate::config::{ClusterCount, SessionConfig, SessionMode};
use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;
use crate::pipeline::detections::{Detection, DetectionsFile};
use crate::pipeline::extract::{is_soft_failure, PreparedFrame};
use crate::ClusterModel;

/// Random access to decoded RGB frames by frame index.
pub trait FrameSource: Sync {
    fn frame(&self, index: u64) -> Result<ImageBuffer>;
}

/// Frames held in memory.
#[derive(Debug, Clone, Default)]
pub struct InMemoryFrames {
    frames: BTreeMap<u64, ImageBuffer>,
}

impl InMemoryFrames {
    pub fn new(frames: impl IntoIterator<Item = (u64, ImageBuffer)>) -> Self {
        Self {
            frames: frames.into_iter().collect(),
        }
    }

    /// Frames numbered from 0 in vector order.
    pub fn from_vec(frames: Vec<ImageBuffer>) -> Self {
        Self::new(frames.into_iter().enumerate().map(|(i, f)| (i as u64, f)))
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

impl FrameSource for InMemoryFrames {
    fn frame(&self, index: u64) -> Result<ImageBuffer> {
        self.frames
            .get(&index)
            .cloned()
            .ok_or_else(|| Error::FrameMismatch(format!("no frame with index {index}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    pub frame_index: Option<u64>,
    pub detection_index: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionLog {
    pub entries: Vec<LogEntry>,
}

impl SessionLog {
    fn note(&mut self, frame_index: Option<u64>, detection_index: Option<usize>, message: impl Into<String>) {
        let message = message.into();
        log::debug!("{message}");
        self.entries.push(LogEntry {
            frame_index,
            detection_index,
            message,
        });
    }
}

/// Detections accepted for identification.
pub fn accepts(det: &Detection, cfg: &SessionConfig) -> bool {
    det.class_label == cfg.class_label && det.score >= cfg.min_score
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("threads: {e}")))
}

/// Descriptors of all accepted detections, in (frame, detection) order.
/// Soft failures are logged and skipped.
pub fn extract_features(
    frames: &dyn FrameSource,
    detections: &DetectionsFile,
    cfg: &SessionConfig,
) -> Result<(Vec<FeatureVector>, SessionLog)> {
    let per_frame = |f: &crate::pipeline::detections::FrameDetections| -> Result<Vec<std::result::Result<FeatureVector, (usize, Error)>>> {
        let wanted: Vec<(usize, &Detection)> = f
            .detections
            .iter()
            .enumerate()
            .filter(|(_, d)| accepts(d, cfg))
            .collect();
        if wanted.is_empty() {
            return Ok(Vec::new());
        }
        let img = frames.frame(f.index)?;
        if (img.width(), img.height()) != (detections.frame_width, detections.frame_height) {
            return Err(Error::FrameMismatch(format!(
                "frame {} is {}x{}, detections declare {}x{}",
                f.index,
                img.width(),
                img.height(),
                detections.frame_width,
                detections.frame_height
            )));
        }
        let prepared = PreparedFrame::new(&img)?;
        let mut out = Vec::with_capacity(wanted.len());
        for (i, d) in wanted {
            match prepared.features(&d.bbox, &cfg.features) {
                Ok(dims) => out.push(Ok(FeatureVector {
                    dims,
                    frame_index: f.index,
                    detection_index: i,
                })),
                Err(e) if is_soft_failure(&e) => out.push(Err((i, e))),
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    };

    let results: Vec<_> = thread_pool(cfg.threads)?
        .install(|| detections.frames.par_iter().map(per_frame).collect());

    let mut vectors = Vec::new();
    let mut log = SessionLog::default();
    for (f, r) in detections.frames.iter().zip(results) {
        for item in r? {
            match item {
                Ok(v) => vectors.push(v),
                Err((i, e)) => log.note(Some(f.index), Some(i), format!("skipped: {e}")),
            }
        }
    }
    let rejected = detections.detection_count()
        - detections
            .frames
            .iter()
            .flat_map(|f| &f.detections)
            .filter(|d| accepts(d, cfg))
            .count();
    if rejected > 0 {
        log.note(None, None, format!("{rejected} detection(s) below score threshold or of another class"));
    }
    Ok((vectors, log))
}

/// Outcome of one session.
#[derive(Debug, Clone)]
pub struct SessionOutput {
    /// Input detections with `identity` filled for identified ones and
    /// cleared for everything else.
    pub assignments: DetectionsFile,
    /// Last fitted model. In online mode it was fitted on a prefix of
    /// `vectors`.
    pub model: ClusterModel,
    pub identities: IdentityMap,
    pub standardizer: Option<Standardizer<f64>>,
    /// Raw descriptors in (frame, detection) order.
    pub vectors: Vec<FeatureVector>,
    pub log: SessionLog,
}

/// Give each detection of one frame a distinct cluster. Detections closest
/// to their nearest centroid choose first; a detection whose nearest
/// centroid is taken falls back to its nearest unclaimed one. Only clusters
/// accepted by `eligible` are handed out.
pub fn unique_assignment(
    centroids: &[Vec<f64>],
    vectors: &[&[f64]],
    eligible: impl Fn(usize) -> bool,
) -> Vec<Option<usize>> {
    let dists: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| centroids.iter().map(|c| squared_distance(c, v)).collect())
        .collect();
    let best = |row: &[f64]| {
        row.iter()
            .enumerate()
            .filter(|(j, _)| eligible(*j))
            .map(|(_, &d)| d)
            .fold(f64::INFINITY, f64::min)
    };
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| best(&dists[a]).total_cmp(&best(&dists[b])).then(a.cmp(&b)));

    let mut claimed = vec![false; centroids.len()];
    let mut out = vec![None; vectors.len()];
    for i in order {
        let pick = (0..centroids.len())
            .filter(|&j| eligible(j) && !claimed[j])
            .min_by(|&a, &b| dists[i][a].total_cmp(&dists[i][b]).then(a.cmp(&b)));
        if let Some(j) = pick {
            claimed[j] = true;
            out[i] = Some(j);
        }
    }
    out
}

struct Fitted {
    model: ClusterModel,
    identities: IdentityMap,
    standardizer: Option<Standardizer<f64>>,
}

impl Fitted {
    fn project(&self, v: &FeatureVector) -> Vec<f64> {
        match &self.standardizer {
            Some(s) => s.apply(&v.dims),
            None => v.dims.to_vec(),
        }
    }

    /// Identity names for one frame's vectors.
    fn name_frame(&self, vectors: &[&FeatureVector]) -> Vec<Option<String>> {
        let projected: Vec<Vec<f64>> = vectors.iter().map(|v| self.project(v)).collect();
        let refs: Vec<&[f64]> = projected.iter().map(Vec::as_slice).collect();
        unique_assignment(&self.model.centroids, &refs, |c| self.identities.name(c).is_some())
            .into_iter()
            .map(|c| c.and_then(|c| self.identities.name(c)).map(str::to_string))
            .collect()
    }
}

fn fit(vectors: &[&FeatureVector], k: usize, cfg: &SessionConfig) -> Result<Fitted> {
    let owned: Vec<FeatureVector> = vectors.iter().map(|v| (*v).clone()).collect();
    let standardizer = if cfg.clustering.normalize {
        Some(Standardizer::fit(&owned)?)
    } else {
        None
    };
    let data: Vec<Vec<f64>> = match &standardizer {
        Some(s) => owned.iter().map(|v| s.apply(&v.dims)).collect(),
        None => owned.iter().map(|v| v.dims.to_vec()).collect(),
    };
    let params = KMeansParams {
        k,
        seed: cfg.clustering.seed,
        tol: cfg.clustering.tol,
        max_iter: cfg.clustering.max_iter,
    };
    let model = kmeans_fit(&data, &params)?;
    let identities = label_clusters(&model, &owned, cfg.names.as_deref())?;
    Ok(Fitted {
        model,
        identities,
        standardizer,
    })
}

/// Vectors of each frame, in frame order.
fn group_by_frame(vectors: &[FeatureVector]) -> Vec<(u64, Vec<&FeatureVector>)> {
    let mut groups: Vec<(u64, Vec<&FeatureVector>)> = Vec::new();
    for v in vectors {
        match groups.last_mut() {
            Some((f, g)) if *f == v.frame_index => g.push(v),
            _ => groups.push((v.frame_index, vec![v])),
        }
    }
    groups
}

fn target_k(count: ClusterCount, running_max: usize) -> usize {
    match count {
        ClusterCount::Fixed(k) => k,
        ClusterCount::Auto => running_max,
    }
}

/// Identify every accepted detection of the session.
pub fn run_session(
    frames: &dyn FrameSource,
    detections: &DetectionsFile,
    cfg: &SessionConfig,
) -> Result<SessionOutput> {
    let (vectors, mut log) = extract_features(frames, detections, cfg)?;
    if vectors.is_empty() {
        return Err(Error::EmptySession);
    }
    let groups = group_by_frame(&vectors);
    let mut names: BTreeMap<(u64, usize), String> = BTreeMap::new();
    let mut record = |group: &[&FeatureVector], fitted: &Fitted| {
        for (v, n) in group.iter().zip(fitted.name_frame(group)) {
            if let Some(n) = n {
                names.insert((v.frame_index, v.detection_index), n);
            }
        }
    };

    let fitted = match cfg.mode {
        SessionMode::Batch => {
            let max = groups.iter().map(|(_, g)| g.len()).max().unwrap_or(0);
            let k = target_k(cfg.clustering.k, max);
            let all: Vec<&FeatureVector> = vectors.iter().collect();
            let fitted = fit(&all, k, cfg)?;
            log.note(None, None, format!("fitted k={k} on {} vectors", all.len()));
            for (_, g) in &groups {
                record(g, &fitted);
            }
            fitted
        }
        SessionMode::Online => {
            let mut seen: Vec<&FeatureVector> = Vec::new();
            let mut pending: Vec<usize> = Vec::new();
            let mut running_max = 0;
            let mut current: Option<Fitted> = None;
            // frames without accepted detections still count toward warm-up
            let position: BTreeMap<u64, usize> = detections
                .frames
                .iter()
                .enumerate()
                .map(|(i, f)| (f.index, i))
                .collect();
            for (gi, (frame, g)) in groups.iter().enumerate() {
                seen.extend(g.iter().copied());
                running_max = running_max.max(g.len());
                let k = target_k(cfg.clustering.k, running_max);
                let warmed = position[frame] + 1 >= cfg.warmup_frames && seen.len() >= k;
                let refit = match &current {
                    None => warmed,
                    Some(f) => cfg.clustering.k == ClusterCount::Auto && k > f.model.k,
                };
                if refit {
                    let f = fit(&seen, k, cfg)?;
                    log.note(Some(*frame), None, format!("fitted k={k} on {} vectors", seen.len()));
                    current = Some(f);
                }
                match &current {
                    Some(f) => {
                        for p in pending.drain(..) {
                            record(&groups[p].1, f);
                        }
                        record(g, f);
                    }
                    None => pending.push(gi),
                }
            }
            let fitted = match current {
                Some(f) => f,
                None => {
                    let k = target_k(cfg.clustering.k, running_max);
                    let f = fit(&seen, k, cfg)?;
                    log.note(None, None, format!("session shorter than warm-up, fitted k={k} on {} vectors", seen.len()));
                    f
                }
            };
            for p in pending.drain(..) {
                record(&groups[p].1, &fitted);
            }
            fitted
        }
    };

    let mut assignments = detections.clone();
    for f in &mut assignments.frames {
        for (i, d) in f.detections.iter_mut().enumerate() {
            d.identity = names.get(&(f.index, i)).cloned();
        }
        let mut taken: Vec<&str> = f.detections.iter().filter_map(|d| d.identity.as_deref()).collect();
        let n = taken.len();
        taken.sort_unstable();
        taken.dedup();
        if taken.len() != n {
            return Err(Error::Invariant(format!("frame {} has a repeated identity", f.index)));
        }
    }
    Ok(SessionOutput {
        assignments,
        model: fitted.model,
        identities: fitted.identities,
        standardizer: fitted.standardizer,
        vectors,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::BoundingBox;
    use crate::pipeline::detections::FrameDetections;

    /// Two rectangles of different color and texture that trade sides halfway.
    fn session(frames: u64) -> (InMemoryFrames, DetectionsFile) {
        let (w, h) = (160u32, 80u32);
        let mut imgs = Vec::new();
        let mut file = DetectionsFile::new("unit", w, h);
        for f in 0..frames {
            let swap = f >= frames / 2;
            let (xa, xb) = if swap { (90, 10) } else { (10, 90) };
            let mut data = vec![0u8; (w * h * 3) as usize];
            for y in 0..h {
                for x in 0..w {
                    let i = ((y * w + x) * 3) as usize;
                    let px = if (xa..xa + 50).contains(&x) && (15..65).contains(&y) {
                        [220, 40, 40]
                    } else if (xb..xb + 50).contains(&x) && (15..65).contains(&y) {
                        if (x + y) % 3 == 0 { [30, 30, 200] } else { [60, 200, 90] }
                    } else {
                        [10, 20, 40]
                    };
                    data[i..i + 3].copy_from_slice(&px);
                }
            }
            imgs.push(ImageBuffer::from_rgb8(w, h, data).unwrap());
            let det = |x: u32, id: &str| Detection {
                frame_index: f,
                bbox: BoundingBox::new(x - 5, 10, x + 55, 70).unwrap(),
                score: 0.9,
                class_label: "diver".into(),
                identity: Some(id.into()),
            };
            // detection order alternates so index does not leak identity
            let dets = if f % 2 == 0 {
                vec![det(xa, "red"), det(xb, "green")]
            } else {
                vec![det(xb, "green"), det(xa, "red")]
            };
            file.frames.push(FrameDetections { index: f, detections: dets });
        }
        (InMemoryFrames::from_vec(imgs), file)
    }

    fn consistent(out: &SessionOutput, truth: &DetectionsFile) -> bool {
        let mut map = BTreeMap::new();
        for (a, t) in out.assignments.frames.iter().zip(&truth.frames) {
            for (da, dt) in a.detections.iter().zip(&t.detections) {
                let got = da.identity.clone().unwrap();
                let want = dt.identity.clone().unwrap();
                if *map.entry(got).or_insert(want.clone()) != want {
                    return false;
                }
            }
        }
        map.len() == 2
    }

    #[test]
    fn batch_separates_two_divers() {
        let (frames, file) = session(10);
        let out = run_session(&frames, &file, &SessionConfig::default()).unwrap();
        assert_eq!(out.model.k, 2);
        assert_eq!(out.vectors.len(), 20);
        assert!(consistent(&out, &file));
        // the detection listed first in frame 0 is the red one, so it is named first
        assert_eq!(out.assignments.frames[0].detections[0].identity.as_deref(), Some("diver-0"));
    }

    #[test]
    fn online_matches_batch_here() {
        let (frames, file) = session(12);
        let cfg = SessionConfig {
            mode: SessionMode::Online,
            warmup_frames: 4,
            ..SessionConfig::default()
        };
        let out = run_session(&frames, &file, &cfg).unwrap();
        assert!(consistent(&out, &file));
        assert_eq!(out.model.assignments.len(), 8);
    }

    #[test]
    fn names_and_determinism() {
        let (frames, file) = session(6);
        let cfg = SessionConfig {
            names: Some(vec!["Emma".into(), "Noah".into()]),
            threads: 2,
            ..SessionConfig::default()
        };
        let a = run_session(&frames, &file, &cfg).unwrap();
        let b = run_session(&frames, &file, &SessionConfig { threads: 1, ..cfg.clone() }).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.identities.names(), ["Emma", "Noah"]);
        let short = SessionConfig {
            names: Some(vec!["Emma".into()]),
            ..cfg
        };
        assert!(matches!(
            run_session(&frames, &file, &short),
            Err(Error::InsufficientNames { needed: 2, given: 1 })
        ));
    }

    #[test]
    fn filtered_and_empty() {
        let (frames, mut file) = session(4);
        file.frames[1].detections[0].score = 0.1;
        file.frames[2].detections[1].class_label = "fish".into();
        let out = run_session(&frames, &file, &SessionConfig::default()).unwrap();
        assert_eq!(out.vectors.len(), 6);
        assert!(out.assignments.frames[1].detections[0].identity.is_none());
        for f in &mut file.frames {
            f.detections.clear();
        }
        assert!(matches!(
            run_session(&frames, &file, &SessionConfig::default()),
            Err(Error::EmptySession)
        ));
    }

    #[test]
    fn frame_size_mismatch() {
        let (_, file) = session(2);
        let frames = InMemoryFrames::from_vec(vec![ImageBuffer::filled_rgb(10, 10, [1, 2, 3]); 2]);
        assert!(matches!(
            run_session(&frames, &file, &SessionConfig::default()),
            Err(Error::FrameMismatch(_))
        ));
    }

    #[test]
    fn duplicate_repair_prefers_closer_detection() {
        let centroids = vec![vec![0.0], vec![10.0], vec![20.0]];
        let a = [1.0];
        let b = [0.5];
        let c = [30.0];
        let got = unique_assignment(&centroids, &[&a, &b, &c], |_| true);
        assert_eq!(got, [Some(1), Some(0), Some(2)]);
        let got = unique_assignment(&centroids, &[&a, &b, &c], |j| j != 2);
        assert_eq!(got, [Some(1), Some(0), None]);
    }
}
