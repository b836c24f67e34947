//! Synthetic pool sequences with known identities.
//!
//! Divers are drawn as a suit ellipse with a head, an air tank and optional
//! fins, moving along seeded smooth trajectories over a tiled pool floor.
//! Exits and re-entries slide the diver out of (or into) the frame over a
//! few frames. Ground-truth boxes are the pixel extent of each silhouette,
//! clipped to the frame; a diver counts as visible while at least half of
//! its silhouette is inside the frame.

use std::f64::consts::{PI, TAU};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::imaging::{lab_pixel_to_srgb, BoundingBox, ImageBuffer};
use crate::pipeline::detections::{Detection, DetectionsFile, FrameDetections};
use crate::pipeline::session::FrameSource;

#[derive(Debug, Clone, PartialEq)]
pub struct DiverAppearance {
    pub name: String,
    pub suit_lab: [f32; 3],
    /// Semi-axes of the body ellipse at unit scale, in pixels.
    pub body: (f64, f64),
    pub flippers: bool,
    /// Standard deviation of the per-pixel suit brightness noise.
    pub texture_noise: f64,
}

/// A span of the sequence during which a diver is in the scene, as
/// fractions of the frame count, half-open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Presence {
    pub enter: f64,
    pub leave: f64,
}

impl Presence {
    pub const ALWAYS: Presence = Presence { enter: 0.0, leave: 1.0 };
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiverSpec {
    pub appearance: DiverAppearance,
    pub presence: Vec<Presence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motion {
    /// Each diver keeps to its own lane, swimming back and forth.
    Lanes,
    /// Divers roam the whole frame and cross each other.
    Freeform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub frames: usize,
    pub width: u32,
    pub height: u32,
    pub divers: Vec<DiverSpec>,
    pub motion: Motion,
    /// Vertical swing around the lane center, in pixels.
    pub lane_swing: f64,
    /// Rising air bubbles drawn over the divers.
    pub bubbles: bool,
    /// Frames taken to slide out of or into the scene.
    pub transition_frames: usize,
}

pub const PRESET_COUNT: u8 = 7;

fn emma(flippers: bool) -> DiverAppearance {
    DiverAppearance {
        name: "Emma".into(),
        suit_lab: [52.0, 62.0, 48.0],
        body: (58.0, 15.0),
        flippers,
        texture_noise: 4.0,
    }
}

fn liam(flippers: bool) -> DiverAppearance {
    DiverAppearance {
        name: "Liam".into(),
        suit_lab: [28.0, 8.0, -38.0],
        body: (70.0, 19.0),
        flippers,
        texture_noise: 14.0,
    }
}

fn noah(flippers: bool) -> DiverAppearance {
    DiverAppearance {
        name: "Noah".into(),
        suit_lab: [62.0, -42.0, 38.0],
        body: (64.0, 17.0),
        flippers,
        texture_noise: 9.0,
    }
}

impl ScenarioSpec {
    /// The seven pool scenarios: (1) two divers, one exits; (2) two divers,
    /// one exits for the middle third and returns; (3, 4) as (1, 2) with
    /// fins; (5, 6) three divers, one exits, without and with fins; (7) two
    /// divers swimming freely.
    pub fn preset(id: u8) -> Result<Self> {
        let half = vec![Presence { enter: 0.0, leave: 0.5 }];
        let away = vec![
            Presence { enter: 0.0, leave: 1.0 / 3.0 },
            Presence { enter: 2.0 / 3.0, leave: 1.0 },
        ];
        let always = vec![Presence::ALWAYS];
        let d = |appearance: DiverAppearance, presence: &Vec<Presence>| DiverSpec {
            appearance,
            presence: presence.clone(),
        };
        let (name, divers, motion) = match id {
            1 => ("two divers, no fins, one exits", vec![d(emma(false), &always), d(liam(false), &half)], Motion::Lanes),
            2 => ("two divers, no fins, one exits and returns", vec![d(emma(false), &always), d(liam(false), &away)], Motion::Lanes),
            3 => ("two divers, fins, one exits", vec![d(emma(true), &always), d(liam(true), &half)], Motion::Lanes),
            4 => ("two divers, fins, one exits and returns", vec![d(emma(true), &always), d(liam(true), &away)], Motion::Lanes),
            5 => (
                "three divers, no fins, one exits",
                vec![d(emma(false), &always), d(noah(false), &always), d(liam(false), &half)],
                Motion::Lanes,
            ),
            6 => (
                "three divers, fins, one exits",
                vec![d(emma(true), &always), d(noah(true), &always), d(liam(true), &half)],
                Motion::Lanes,
            ),
            7 => ("two divers, no fins, freeform", vec![d(emma(false), &always), d(liam(false), &always)], Motion::Freeform),
            _ => return Err(Error::Scenario(format!("no preset {id}, expected 1..={PRESET_COUNT}"))),
        };
        let three = divers.len() == 3;
        Ok(Self {
            name: format!("scenario {id}: {name}"),
            frames: 300,
            width: 640,
            height: 480,
            divers,
            motion,
            lane_swing: if three { 45.0 } else { 12.0 },
            bubbles: three,
            transition_frames: 15,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.divers.len()) {
            return Err(Error::Scenario(format!("{} divers, expected 1 to 3", self.divers.len())));
        }
        if self.frames == 0 || self.width < 64 || self.height < 64 {
            return Err(Error::Scenario("need at least one frame of 64x64 pixels".into()));
        }
        for (i, d) in self.divers.iter().enumerate() {
            let a = &d.appearance;
            if a.name.is_empty() || self.divers[..i].iter().any(|o| o.appearance.name == a.name) {
                return Err(Error::Scenario(format!("diver {i} needs a unique nonempty name")));
            }
            if !(a.body.0 > 0.0 && a.body.1 > 0.0 && a.texture_noise >= 0.0) {
                return Err(Error::Scenario(format!("diver {}: invalid body or noise", a.name)));
            }
            let mut last = 0.0;
            for p in &d.presence {
                if !(p.enter >= last && p.enter < p.leave && p.leave <= 1.0) {
                    return Err(Error::Scenario(format!(
                        "diver {}: presence spans must be increasing, disjoint and within [0, 1]",
                        a.name
                    )));
                }
                last = p.leave;
            }
        }
        Ok(())
    }
}

/// Per-diver trajectory constants, drawn once from the scenario seed.
#[derive(Debug, Clone)]
struct Path {
    base: (f64, f64),
    amp: (f64, f64),
    period: (f64, f64),
    phase: (f64, f64),
    scale_period: f64,
    scale_phase: f64,
    tilt_period: f64,
    tilt_phase: f64,
    kick_phase: f64,
}

#[derive(Debug, Clone, Copy)]
struct Pose {
    cx: f64,
    cy: f64,
    scale: f64,
    tilt: f64,
    facing: f64,
    kick: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Suit,
    Head,
    Tank,
    Fin,
}

fn in_triangle(p: (f64, f64), a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> bool {
    let s = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
    let (d1, d2, d3) = (s(a, b, p), s(b, c, p), s(c, a, p));
    !((d1 < 0.0 || d2 < 0.0 || d3 < 0.0) && (d1 > 0.0 || d2 > 0.0 || d3 > 0.0))
}

/// Silhouette part at body coordinates (u along the body toward the head,
/// v downward), at unit scale.
fn part_at(app: &DiverAppearance, kick: f64, u: f64, v: f64) -> Option<Part> {
    let (a, b) = app.body;
    let (hx, hr) = (a + 0.3 * b, 0.7 * b);
    if (u - hx).powi(2) + (v + 0.1 * b).powi(2) <= hr * hr {
        return Some(Part::Head);
    }
    if (-0.45 * a..=0.25 * a).contains(&u) && (-1.3 * b..=-0.6 * b).contains(&v) {
        return Some(Part::Tank);
    }
    if (u / a).powi(2) + (v / b).powi(2) <= 1.0 {
        return Some(Part::Suit);
    }
    if app.flippers {
        let k = kick * 0.45 * b;
        if in_triangle((u, v), (-0.9 * a, -0.2 * b), (-1.45 * a, -0.8 * b + k), (-1.45 * a, 0.8 * b + k)) {
            return Some(Part::Fin);
        }
    }
    None
}

/// Farthest extent of the silhouette from its center at unit scale.
fn reach(app: &DiverAppearance) -> f64 {
    let (a, b) = app.body;
    (1.5 * a).max(a + b) + 1.4 * b
}

const SKIN: [f64; 3] = [205.0, 160.0, 130.0];
const TANK: [f64; 3] = [150.0, 152.0, 160.0];
const FIN: [f64; 3] = [25.0, 25.0, 30.0];

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Pixels covered by one diver in one frame, possibly outside the frame.
struct Footprint {
    pixels: Vec<(i64, i64, Part, f64)>,
}

impl Footprint {
    fn extent(&self) -> Option<(i64, i64, i64, i64)> {
        let mut it = self.pixels.iter();
        let &(x, y, _, _) = it.next()?;
        Some(it.fold((x, y, x, y), |(a, b, c, d), &(x, y, _, _)| (a.min(x), b.min(y), c.max(x), d.max(y))))
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticScenario {
    spec: ScenarioSpec,
    seed: u64,
    background: Vec<u8>,
    paths: Vec<Path>,
    truth: DetectionsFile,
}

impl SyntheticScenario {
    pub fn new(spec: &ScenarioSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = spec.divers.len();
        let (w, h) = (spec.width as f64, spec.height as f64);
        let paths = (0..n)
            .map(|i| {
                let fi = i as f64;
                let jitter = |rng: &mut ChaCha8Rng, r: f64| rng.random_range(-r..=r);
                let (base, amp, phase) = match spec.motion {
                    Motion::Lanes => (
                        (w * 0.5, h * (fi + 1.0) / (n as f64 + 1.0)),
                        (w * rng.random_range(0.16..0.24), spec.lane_swing),
                        (PI * fi + jitter(&mut rng, 0.4), if i % 2 == 0 { 0.0 } else { PI }),
                    ),
                    Motion::Freeform => (
                        (w * 0.5, h * 0.5),
                        (w * 0.3, h * 0.3),
                        (
                            PI / 2.0 + TAU * fi / n as f64 + jitter(&mut rng, 0.15),
                            TAU * fi / n as f64 + jitter(&mut rng, 0.15),
                        ),
                    ),
                };
                Path {
                    base,
                    amp,
                    period: (rng.random_range(160.0..240.0), rng.random_range(150.0..260.0)),
                    phase,
                    scale_period: rng.random_range(90.0..150.0),
                    scale_phase: rng.random_range(0.0..TAU),
                    tilt_period: rng.random_range(70.0..130.0),
                    tilt_phase: rng.random_range(0.0..TAU),
                    kick_phase: rng.random_range(0.0..TAU),
                }
            })
            .collect();
        let mut scenario = Self {
            spec: spec.clone(),
            seed,
            background: pool_floor(spec.width, spec.height, &mut rng),
            paths,
            truth: DetectionsFile::new(spec.name.clone(), spec.width, spec.height),
        };
        scenario.check_initial_overlap()?;
        scenario.truth = scenario.build_truth();
        Ok(scenario)
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn truth(&self) -> &DetectionsFile {
        &self.truth
    }

    pub fn len(&self) -> usize {
        self.spec.frames
    }

    pub fn is_empty(&self) -> bool {
        self.spec.frames == 0
    }

    /// Frame bounds `[start, end)` of each presence span of diver `d`.
    fn spans(&self, d: usize) -> Vec<(usize, usize)> {
        let n = self.spec.frames as f64;
        self.spec.divers[d]
            .presence
            .iter()
            .map(|p| ((p.enter * n).round() as usize, (p.leave * n).round() as usize))
            .filter(|(a, b)| a < b)
            .collect()
    }

    fn pose(&self, d: usize, f: usize) -> Option<Pose> {
        let span = self.spans(d).into_iter().find(|&(a, b)| (a..b).contains(&f))?;
        let p = &self.paths[d];
        let t = f as f64;
        let wx = TAU / p.period.0;
        let wy = TAU / p.period.1;
        let mut cx = p.base.0 + p.amp.0 * (wx * t + p.phase.0).sin();
        let cy = p.base.1 + p.amp.1 * (wy * t + p.phase.1).sin();
        let velocity = p.amp.0 * wx * (wx * t + p.phase.0).cos();
        let scale = 1.0 + 0.12 * (TAU * t / p.scale_period + p.scale_phase).sin();

        // Slide out through the nearer side edge, quadratically eased.
        let app = &self.spec.divers[d].appearance;
        let width = self.spec.width as f64;
        let trans = self.spec.transition_frames;
        let push = |cx: f64| {
            let r = reach(app) * scale + 2.0;
            if cx < width / 2.0 {
                -(cx + r)
            } else {
                width - cx + r
            }
        };
        let (start, end) = span;
        let progress = if trans > 0 && end < self.spec.frames && f + trans >= end {
            Some((f + trans + 1 - end) as f64 / (trans + 1) as f64)
        } else if trans > 0 && start > 0 && f < start + trans {
            Some((start + trans - f) as f64 / (trans + 1) as f64)
        } else {
            None
        };
        if let Some(q) = progress {
            cx += q * q * push(cx);
        }
        Some(Pose {
            cx,
            cy,
            scale,
            tilt: 0.15 * (TAU * t / p.tilt_period + p.tilt_phase).sin(),
            facing: if velocity < 0.0 { -1.0 } else { 1.0 },
            kick: (TAU * t / 18.0 + p.kick_phase).sin(),
        })
    }

    fn footprint(&self, d: usize, pose: &Pose) -> Footprint {
        let app = &self.spec.divers[d].appearance;
        let r = (reach(app) * pose.scale).ceil() as i64 + 1;
        let (cx, cy) = (pose.cx, pose.cy);
        let (sin, cos) = pose.tilt.sin_cos();
        let mut pixels = Vec::new();
        for y in (cy as i64 - r)..=(cy as i64 + r) {
            for x in (cx as i64 - r)..=(cx as i64 + r) {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                let u = (dx * cos + dy * sin) / pose.scale * pose.facing;
                let v = (-dx * sin + dy * cos) / pose.scale;
                if let Some(part) = part_at(app, pose.kick, u, v) {
                    pixels.push((x, y, part, v / app.body.1));
                }
            }
        }
        Footprint { pixels }
    }

    fn check_initial_overlap(&self) -> Result<()> {
        let boxes: Vec<(usize, (i64, i64, i64, i64))> = (0..self.spec.divers.len())
            .filter_map(|d| self.pose(d, 0).map(|p| (d, p)))
            .filter_map(|(d, p)| self.footprint(d, &p).extent().map(|e| (d, e)))
            .collect();
        for (i, (da, a)) in boxes.iter().enumerate() {
            for (db, b) in &boxes[i + 1..] {
                if a.0 <= b.2 && b.0 <= a.2 && a.1 <= b.3 && b.1 <= a.3 {
                    return Err(Error::Scenario(format!(
                        "divers {} and {} overlap in the first frame",
                        self.spec.divers[*da].appearance.name, self.spec.divers[*db].appearance.name
                    )));
                }
            }
        }
        Ok(())
    }

    fn build_truth(&self) -> DetectionsFile {
        let (w, h) = (self.spec.width as i64, self.spec.height as i64);
        let mut file = DetectionsFile::new(self.spec.name.clone(), self.spec.width, self.spec.height);
        for f in 0..self.spec.frames {
            let mut detections = Vec::new();
            for d in 0..self.spec.divers.len() {
                let Some(pose) = self.pose(d, f) else { continue };
                let fp = self.footprint(d, &pose);
                let inside: Vec<_> = fp
                    .pixels
                    .iter()
                    .filter(|p| (0..w).contains(&p.0) && (0..h).contains(&p.1))
                    .collect();
                if inside.is_empty() || 2 * inside.len() < fp.pixels.len() {
                    continue;
                }
                let (x0, y0, x1, y1) = inside.iter().fold((w, h, 0, 0), |(a, b, c, e), p| {
                    (a.min(p.0), b.min(p.1), c.max(p.0), e.max(p.1))
                });
                detections.push(Detection {
                    frame_index: f as u64,
                    bbox: BoundingBox {
                        x_min: x0 as u32,
                        y_min: y0 as u32,
                        x_max: x1 as u32 + 1,
                        y_max: y1 as u32 + 1,
                    },
                    score: 1.0,
                    class_label: "diver".into(),
                    identity: Some(self.spec.divers[d].appearance.name.clone()),
                });
            }
            file.frames.push(FrameDetections {
                index: f as u64,
                detections,
            });
        }
        file
    }

    /// Render frame `f`. Every frame has its own noise stream, so frames can
    /// be produced in any order.
    pub fn render(&self, f: usize) -> Result<ImageBuffer> {
        if f >= self.spec.frames {
            return Err(Error::FrameMismatch(format!(
                "frame {f} beyond the {} synthetic frames",
                self.spec.frames
            )));
        }
        let (w, h) = (self.spec.width as i64, self.spec.height as i64);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(f as u64 + 1);

        let mut img = self.background.clone();
        let mut chunk = Vec::new();
        for px in img.chunks_exact_mut(3) {
            if chunk.is_empty() {
                chunk.extend(rng.next_u32().to_le_bytes());
            }
            let n = (chunk.pop().expect("refilled") % 7) as i16 - 3;
            for c in px {
                *c = (*c as i16 + n).clamp(0, 255) as u8;
            }
        }

        for d in 0..self.spec.divers.len() {
            let Some(pose) = self.pose(d, f) else { continue };
            let app = &self.spec.divers[d].appearance;
            let suit = lab_pixel_to_srgb(app.suit_lab).map(f64::from);
            let noise = Normal::new(0.0, app.texture_noise.max(1e-9)).expect("finite sigma");
            for (x, y, part, v) in self.footprint(d, &pose).pixels {
                if !(0..w).contains(&x) || !(0..h).contains(&y) {
                    continue;
                }
                let rgb = match part {
                    Part::Suit => {
                        let shade = 1.0 - 0.25 * v * v;
                        let n = noise.sample(&mut rng);
                        suit.map(|c| c * shade + n)
                    }
                    Part::Head => SKIN.map(|c| c + rng.random_range(-3.0..3.0)),
                    Part::Tank => TANK.map(|c| c * (1.0 - 0.2 * (v + 0.95).abs())),
                    Part::Fin => FIN,
                };
                let i = ((y * w + x) * 3) as usize;
                for (dst, c) in img[i..i + 3].iter_mut().zip(rgb) {
                    *dst = clamp_u8(c);
                }
            }
            if self.spec.bubbles {
                self.draw_bubbles(&mut img, d, &pose, f);
            }
        }
        ImageBuffer::from_rgb8(self.spec.width, self.spec.height, img)
    }

    fn draw_bubbles(&self, img: &mut [u8], d: usize, pose: &Pose, f: usize) {
        let app = &self.spec.divers[d].appearance;
        let (w, h) = (self.spec.width as i64, self.spec.height as i64);
        let head_x = pose.cx + pose.facing * (app.body.0 + 0.3 * app.body.1) * pose.scale;
        let head_y = pose.cy - app.body.1 * pose.scale;
        for j in 0..6 {
            let rise = ((f * 3 + j * 17) % 90) as f64;
            let bx = head_x + 8.0 * ((f + 11 * j) as f64 * 0.3).sin();
            let by = head_y - rise;
            let r = 2.0 + (j % 3) as f64;
            for y in (by - r).floor() as i64..=(by + r).ceil() as i64 {
                for x in (bx - r).floor() as i64..=(bx + r).ceil() as i64 {
                    let dd = (x as f64 + 0.5 - bx).powi(2) + (y as f64 + 0.5 - by).powi(2);
                    if dd > r * r || !(0..w).contains(&x) || !(0..h).contains(&y) {
                        continue;
                    }
                    let i = ((y * w + x) * 3) as usize;
                    for c in &mut img[i..i + 3] {
                        *c = clamp_u8(*c as f64 * 0.4 + 255.0 * 0.6);
                    }
                }
            }
        }
    }

    pub fn render_all(&self) -> Result<Vec<ImageBuffer>> {
        (0..self.spec.frames).map(|f| self.render(f)).collect()
    }
}

impl FrameSource for SyntheticScenario {
    fn frame(&self, index: u64) -> Result<ImageBuffer> {
        self.render(index as usize)
    }
}

/// Blue pool floor: a vertical gradient, dark lane lines with end markers,
/// tile grout and faint caustics.
fn pool_floor(width: u32, height: u32, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let (w, h) = (width as f64, height as f64);
    let lane_gap = h / 4.0;
    let lane_offset = rng.random_range(0.0..lane_gap);
    let caustic = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
    let mut out = Vec::with_capacity((width * height * 3) as usize);
    for y in 0..height {
        for x in 0..width {
            let (xf, yf) = (x as f64, y as f64);
            let g = yf / h;
            let mut rgb = [60.0 - 20.0 * g, 140.0 - 35.0 * g, 185.0 - 35.0 * g];
            let light = 10.0 * (0.045 * xf + 0.06 * yf + caustic.0).sin() * (0.03 * xf - 0.05 * yf + caustic.1).sin();
            let lane_d = ((yf - lane_offset).rem_euclid(lane_gap) - lane_gap / 2.0).abs();
            let line = lane_d > lane_gap / 2.0 - 5.0 && xf > w * 0.06 && xf < w * 0.94;
            let grout = x % 40 == 0 || y % 40 == 0;
            if line {
                rgb = [20.0, 35.0, 70.0];
            } else if grout {
                rgb = rgb.map(|c| c * 0.85);
            }
            out.extend(rgb.map(|c| clamp_u8(c + light)));
        }
    }
    out
}

/// Render all frames and ground truth of a scenario.
pub fn synth_scenario(spec: &ScenarioSpec, seed: u64) -> Result<(Vec<ImageBuffer>, DetectionsFile)> {
    let s = SyntheticScenario::new(spec, seed)?;
    Ok((s.render_all()?, s.truth.clone()))
}
