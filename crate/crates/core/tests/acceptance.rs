//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::time::Instant;

use diverid_core::clustering::{kmeans_fit, KMeansParams};
use diverid_core::config::SessionConfig;
use diverid_core::features::frequency::{dft2d, Matrix};
use diverid_core::features::shape::{central_moments, convex_hull, rdp_simplify};
use diverid_core::features::{color::quadrants, quadrant_color_means};
use diverid_core::geometry::{cross, point_segment_distance, Contour, Point2};
use diverid_core::imaging::{rgb_to_lab, BoundingBox, ImageBuffer};
use diverid_core::pipeline::evaluate::{evaluate, ScenarioReport};
use diverid_core::pipeline::extract::PreparedFrame;
use diverid_core::pipeline::session::run_session;
use diverid_core::pipeline::synth::{ScenarioSpec, SyntheticScenario};
use diverid_core::pipeline::FrameSource;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

const SCENARIO_SEED: u64 = 2024;

/// Synthesize a scenario, identify it from its own truth boxes on one
/// thread, and score the result.
fn run_scenario(id: u8) -> (ScenarioReport, SyntheticScenario, diverid_core::pipeline::SessionOutput, f64) {
    let start = Instant::now();
    let spec = ScenarioSpec::preset(id).expect("preset");
    let scenario = SyntheticScenario::new(&spec, SCENARIO_SEED).expect("scenario");
    let cfg = SessionConfig { threads: 1, ..SessionConfig::default() };
    let out = run_session(&scenario, scenario.truth(), &cfg).expect("session");
    let report = evaluate(&spec.name, &out.assignments, scenario.truth(), 0.5).expect("evaluate");
    (report, scenario, out, start.elapsed().as_secs_f64())
}

fn scenario_one() -> Outcome {
    let (r, s, _, secs) = run_scenario(1);
    let spec = s.spec();
    let ok = r.accuracy_pct >= 98.0 && spec.frames >= 300 && (spec.width, spec.height) == (640, 480) && secs < 60.0;
    outcome(
        ok,
        format!(
            "accuracy {:.2}% (missed {:.2}, wrong {:.2}) over {} frames at {}x{}, {:.1} s single-threaded",
            r.accuracy_pct, r.missed_pct, r.wrong_pct, spec.frames, spec.width, spec.height, secs
        ),
    )
}

fn scenario_two() -> Outcome {
    let (r, s, out, _) = run_scenario(2);
    // the returning diver's predicted label before the gap and after it
    let n = s.len();
    let label_of = |range: std::ops::Range<usize>| -> Vec<String> {
        let mut labels = Vec::new();
        for f in range {
            let truth = &s.truth().frames[f];
            let pred = &out.assignments.frames[f];
            for t in truth.detections.iter().filter(|d| d.identity.as_deref() == Some("Liam")) {
                if let Some(p) = pred.detections.iter().find(|p| p.bbox == t.bbox) {
                    if let Some(id) = &p.identity {
                        labels.push(id.clone());
                    }
                }
            }
        }
        labels
    };
    let majority = |v: &[String]| -> Option<String> {
        let mut best: Option<(usize, &String)> = None;
        for l in v {
            let c = v.iter().filter(|x| *x == l).count();
            if best.is_none_or(|(bc, _)| c > bc) {
                best = Some((c, l));
            }
        }
        best.map(|(_, l)| l.clone())
    };
    let before = majority(&label_of(0..n / 3));
    let after = majority(&label_of(2 * n / 3..n));
    let kept = before.is_some() && before == after && r.alignment.get(before.as_ref().unwrap()).map(String::as_str) == Some("Liam");
    outcome(
        r.accuracy_pct >= 93.0 && kept,
        format!(
            "accuracy {:.2}% (missed {:.2}, wrong {:.2}); returning diver labeled {:?} before exit, {:?} after re-entry",
            r.accuracy_pct, r.missed_pct, r.wrong_pct, before, after
        ),
    )
}

fn scenario_five() -> Outcome {
    let (r, s, _, _) = run_scenario(5);
    let overlapping = s
        .truth()
        .frames
        .iter()
        .filter(|f| {
            f.detections
                .iter()
                .enumerate()
                .any(|(i, a)| f.detections[i + 1..].iter().any(|b| a.bbox.intersection(&b.bbox) > 0))
        })
        .count();
    outcome(
        r.accuracy_pct >= 70.0,
        format!(
            "accuracy {:.2}% (missed {:.2}, wrong {:.2}); {} frames with overlapping boxes",
            r.accuracy_pct, r.missed_pct, r.wrong_pct, overlapping
        ),
    )
}

fn naive_dft(m: &Matrix<f64>) -> Vec<Complex<f64>> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut out = Vec::with_capacity(rows * cols);
    for k in 0..rows {
        for l in 0..cols {
            let mut acc = Complex::new(0.0, 0.0);
            for i in 0..rows {
                for j in 0..cols {
                    let ang = -2.0 * std::f64::consts::PI * ((k * i) as f64 / rows as f64 + (l * j) as f64 / cols as f64);
                    acc += Complex::from_polar(m.get(i, j), ang);
                }
            }
            out.push(acc);
        }
    }
    out
}

fn dft_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst, mut worst_parseval) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (r, c) = (rng.random_range(1..=16), rng.random_range(1..=16));
        let data: Vec<f64> = (0..r * c).map(|_| rng.random_range(-255.0..255.0)).collect();
        let m = Matrix::new(r, c, data.clone()).unwrap();
        let fast = dft2d(&m).unwrap();
        let slow = naive_dft(&m);
        let scale = slow.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        for (a, b) in fast.as_slice().iter().zip(&slow) {
            worst = worst.max((a - b).norm() / scale);
        }
        let energy: f64 = data.iter().map(|x| x * x).sum();
        let spectral: f64 = fast.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() / (r * c) as f64;
        worst_parseval = worst_parseval.max((energy - spectral).abs() / energy.max(1e-300));
    }
    outcome(
        worst <= 1e-9 && worst_parseval <= 1e-6,
        format!("max relative error {worst:.2e} (limit 1e-9), Parseval {worst_parseval:.2e} (limit 1e-6), 100 matrices up to 16x16"),
    )
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Random triangle plus bar with a linear intensity gradient on a black
/// grayscale canvas of random size.
fn random_crop(rng: &mut ChaCha8Rng) -> (u32, u32, Vec<u8>) {
    let (w, h) = (rng.random_range(12..28u32), rng.random_range(12..28u32));
    let mut img = vec![0u8; (w * h) as usize];
    let (gx, gy, base) = (rng.random_range(0.0..6.0), rng.random_range(0.0..6.0), rng.random_range(40.0..120.0));
    let tri = [
        (rng.random_range(0.0..w as f64 * 0.4), rng.random_range(0.0..h as f64 * 0.4)),
        (rng.random_range(w as f64 * 0.6..w as f64), rng.random_range(0.0..h as f64 * 0.5)),
        (rng.random_range(0.0..w as f64), rng.random_range(h as f64 * 0.6..h as f64)),
    ];
    let bar = (rng.random_range(0..w / 2), rng.random_range(0..h / 2), rng.random_range(2..5u32), rng.random_range(3..h / 2 + 4));
    for y in 0..h {
        for x in 0..w {
            let p = (x as f64 + 0.5, y as f64 + 0.5);
            let s = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            let d = [s(tri[0], tri[1]), s(tri[1], tri[2]), s(tri[2], tri[0])];
            let inside_tri = d.iter().all(|&v| v >= 0.0) || d.iter().all(|&v| v <= 0.0);
            let inside_bar = (bar.0..bar.0 + bar.2).contains(&x) && (bar.1..(bar.1 + bar.3).min(h)).contains(&y);
            if inside_tri || inside_bar {
                img[(y * w + x) as usize] = (base + gx * x as f64 + gy * y as f64).min(255.0) as u8;
            }
        }
    }
    (w, h, img)
}

fn hu_of(w: u32, h: u32, data: Vec<u8>) -> Option<[f64; 7]> {
    let img = ImageBuffer::from_gray8(w, h, data).unwrap();
    central_moments::<f64>(&img, &img.full_box()).ok().map(|m| m.hu())
}

fn hu_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut t_err, mut r_err, mut s_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut crops = 0;
    while crops < 50 {
        let (w, h, img) = random_crop(&mut rng);
        let Some(hu) = hu_of(w, h, img.clone()) else { continue };
        crops += 1;

        // translation: same content at an offset inside a larger canvas
        let (ox, oy) = (rng.random_range(1..20u32), rng.random_range(1..20u32));
        let (tw, th) = (w + ox + 5, h + oy + 3);
        let mut t = vec![0u8; (tw * th) as usize];
        for y in 0..h {
            for x in 0..w {
                t[((y + oy) * tw + x + ox) as usize] = img[(y * w + x) as usize];
            }
        }
        let hu_t = hu_of(tw, th, t).unwrap();

        // 90 degree rotation: (x, y) -> (h - 1 - y, x)
        let mut r = vec![0u8; (w * h) as usize];
        for y in 0..h {
            for x in 0..w {
                r[(x * h + (h - 1 - y)) as usize] = img[(y * w + x) as usize];
            }
        }
        let hu_r = hu_of(h, w, r).unwrap();

        // 2x nearest upscale
        let mut s = vec![0u8; (4 * w * h) as usize];
        for y in 0..2 * h {
            for x in 0..2 * w {
                s[(y * 2 * w + x) as usize] = img[((y / 2) * w + x / 2) as usize];
            }
        }
        let hu_s = hu_of(2 * w, 2 * h, s).unwrap();

        for i in 0..7 {
            t_err = t_err.max(rel(hu[i], hu_t[i]));
            r_err = r_err.max(rel(hu[i], hu_r[i]));
            s_err = s_err.max(rel(hu[i], hu_s[i]));
        }
    }
    outcome(
        t_err <= 1e-12 && r_err <= 1e-9 && s_err <= 5e-2,
        format!("max relative deviation on 50 crops: translation {t_err:.2e} (1e-12), rotation {r_err:.2e} (1e-9), 2x upscale {s_err:.2e} (5e-2)"),
    )
}

fn rdp_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut endpoints_ok = true;
    for _ in 0..1000 {
        let n = rng.random_range(2..=60);
        let pts: Vec<Point2<f64>> = (0..n)
            .map(|_| Point2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)))
            .collect();
        let eps = rng.random_range(0.0..10.0);
        let c = Contour::new(pts.clone());
        let s = rdp_simplify(&c, eps).unwrap();
        endpoints_ok &= s.points.first() == pts.first() && s.points.last() == pts.last();
        for p in &pts {
            let d = s
                .points
                .windows(2)
                .map(|w| point_segment_distance(*p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min);
            let d = if s.points.len() == 1 { p.distance(s.points[0]) } else { d };
            worst_excess = worst_excess.max(d - eps);
        }
    }
    outcome(
        worst_excess <= 1e-9 && endpoints_ok,
        format!("1000 polylines: worst (deviation - epsilon) = {worst_excess:.2e}, endpoints preserved: {endpoints_ok}"),
    )
}

fn hull_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let (mut contain_min, mut mismatches, mut not_idem, mut sets) = (f64::INFINITY, 0, 0, 0);
    while sets < 500 {
        let n = rng.random_range(3..=30);
        // small integer grid so duplicates and collinear triples occur
        let pts: Vec<Point2<f64>> = (0..n)
            .map(|_| Point2::new(rng.random_range(0..12) as f64, rng.random_range(0..12) as f64))
            .collect();
        let Ok(hull) = convex_hull(&pts) else { continue };
        sets += 1;
        let hv = &hull.points;
        for p in &pts {
            for i in 0..hv.len() {
                contain_min = contain_min.min(cross(hv[i], hv[(i + 1) % hv.len()], *p));
            }
        }
        // brute force: a distinct point is a hull vertex iff it lies in no
        // proper triangle and on no segment spanned by the other points
        let mut distinct = pts.clone();
        distinct.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
        distinct.dedup();
        let extreme: Vec<Point2<f64>> = distinct
            .iter()
            .filter(|&&p| {
                let others: Vec<_> = distinct.iter().filter(|&&q| q != p).copied().collect();
                let in_tri = others.iter().enumerate().any(|(i, &a)| {
                    others[i + 1..].iter().enumerate().any(|(j, &b)| {
                        let on_seg = cross(a, b, p) == 0.0
                            && p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x)
                            && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y);
                        on_seg
                            || others[i + j + 2..].iter().any(|&c| {
                                if cross(a, b, c) == 0.0 {
                                    return false;
                                }
                                let (d1, d2, d3) = (cross(a, b, p), cross(b, c, p), cross(c, a, p));
                                (d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0) || (d1 <= 0.0 && d2 <= 0.0 && d3 <= 0.0)
                            })
                    })
                });
                !in_tri
            })
            .copied()
            .collect();
        let mut got = hv.clone();
        got.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
        if got != extreme {
            mismatches += 1;
        }
        if convex_hull(hv).map(|h| h.points != *hv).unwrap_or(true) {
            not_idem += 1;
        }
    }
    outcome(
        contain_min >= -1e-9 && mismatches == 0 && not_idem == 0,
        format!("500 sets: min containment cross {contain_min:.2e} (>= -1e-9), vertex-set mismatches {mismatches}, non-idempotent {not_idem}"),
    )
}

fn kmeans_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let (mut increases, mut k1_err, mut nondet) = (0, 0.0f64, 0);
    for t in 0..100 {
        let n = rng.random_range(5..120);
        let dims = rng.random_range(1..=18);
        let k = rng.random_range(1..=5.min(n));
        let data: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dims).map(|_| rng.random_range(-100.0..100.0)).collect())
            .collect();
        let params = KMeansParams { k, seed: t, tol: 1e-4, max_iter: 300 };
        let m = kmeans_fit(&data, &params).unwrap();
        for w in m.inertia_history.windows(2) {
            if w[1] > w[0] * (1.0 + 1e-12) + 1e-12 {
                increases += 1;
            }
        }
        let again = kmeans_fit(&data, &params).unwrap();
        if again.assignments != m.assignments
            || again.centroids.iter().flatten().map(|v| v.to_bits()).ne(m.centroids.iter().flatten().map(|v| v.to_bits()))
        {
            nondet += 1;
        }
        let one = kmeans_fit(&data, &KMeansParams { k: 1, ..params }).unwrap();
        for d in 0..dims {
            let mean = data.iter().map(|v| v[d]).sum::<f64>() / n as f64;
            k1_err = k1_err.max((one.centroids[0][d] - mean).abs());
        }
    }
    outcome(
        increases == 0 && k1_err <= 1e-12 && nondet == 0,
        format!("100 datasets: inertia increases {increases}, k=1 mean error {k1_err:.2e} (1e-12), nondeterministic fits {nondet}"),
    )
}

fn color_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (w, h) = (rng.random_range(4..64u32), rng.random_range(4..64u32));
        let rgb: Vec<u8> = (0..w * h * 3).map(|_| rng.random()).collect();
        let lab = rgb_to_lab(&ImageBuffer::from_rgb8(w, h, rgb).unwrap()).unwrap();
        let x0 = rng.random_range(0..w - 2);
        let y0 = rng.random_range(0..h - 2);
        let bbox = BoundingBox::new(x0, y0, rng.random_range(x0 + 2..=w), rng.random_range(y0 + 2..=h)).unwrap();
        let got = quadrant_color_means(&lab, &bbox).unwrap().mu;
        for (q, g) in quadrants(&bbox).iter().zip(got) {
            let mut sum = 0.0f64;
            let mut count = 0.0;
            for y in q.y_min..q.y_max {
                for x in q.x_min..q.x_max {
                    let [l, a, b] = lab.lab(x, y);
                    sum += l as f64 + a as f64 + b as f64;
                    count += 1.0;
                }
            }
            worst = worst.max(rel(g, sum / count));
        }
    }
    outcome(worst <= 1e-6, format!("100 crops: max relative error {worst:.2e} (limit 1e-6)"))
}

fn throughput() -> Outcome {
    let spec = ScenarioSpec { frames: 40, ..ScenarioSpec::preset(1).unwrap() };
    let s = SyntheticScenario::new(&spec, 5).unwrap();
    let frames: Vec<_> = (0..spec.frames as u64).map(|f| s.frame(f).unwrap()).collect();
    let cfg = SessionConfig::default();
    let start = Instant::now();
    let mut n = 0usize;
    for (img, f) in frames.iter().zip(&s.truth().frames) {
        let prepared = PreparedFrame::new(img).unwrap();
        for d in &f.detections {
            prepared.features(&d.bbox, &cfg.features).unwrap();
            n += 1;
        }
    }
    let rate = n as f64 / start.elapsed().as_secs_f64();
    outcome(rate >= 2.4, format!("{rate:.1} detections/s single-threaded over {n} detections (floor 2.4)"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("scenario 1: two divers, one exits, >= 98% in < 60 s", scenario_one),
        ("scenario 2: exit and re-entry, >= 93%, label kept", scenario_two),
        ("scenario 5: three divers, overlaps allowed, >= 70%", scenario_five),
        ("dft2d equals naive transform, Parseval", dft_oracle),
        ("Hu moments: translation, rotation, 2x scale", hu_invariance),
        ("RDP deviation bound", rdp_bound),
        ("convex hull: containment, vertex set, idempotence", hull_suite),
        ("K-Means: monotone inertia, k=1 mean, determinism", kmeans_suite),
        ("quadrant color means equal double loop", color_oracle),
        ("feature extraction throughput >= 2.4 detections/s", throughput),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {name} :: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
