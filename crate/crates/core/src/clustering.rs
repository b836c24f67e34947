//! Lloyd's K-Means with Forgy initialization, plus the bookkeeping that
//! turns cluster indices into stable identity names.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Length of the per-detection descriptor.
pub const FEATURE_DIMS: usize = 18;

/// Names of the descriptor dimensions, in storage order.
pub const FEATURE_NAMES: [&str; FEATURE_DIMS] = [
    "mu1", "mu2", "mu3", "mu4", "amp_r", "amp_g", "amp_b", "edge_x", "edge_y", "hull_x", "hull_y",
    "hu1", "hu2", "hu3", "hu4", "hu5", "hu6", "hu7",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub dims: [f64; FEATURE_DIMS],
    pub frame_index: u64,
    pub detection_index: usize,
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.dims
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams<T> {
    pub k: usize,
    pub seed: u64,
    /// Stop once no centroid moves farther than this (Euclidean).
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> KMeansParams<T> {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            tol: T::lit(1e-4),
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel<T> {
    pub k: usize,
    pub centroids: Vec<Vec<T>>,
    /// Cluster index of each training vector.
    pub assignments: Vec<usize>,
    pub inertia: T,
    /// Inertia after each centroid update.
    pub inertia_history: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

#[inline]
pub fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
pub fn nearest<T: Scalar>(centroids: &[Vec<T>], v: &[T]) -> (usize, T) {
    let mut best = (0, squared_distance(&centroids[0], v));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = squared_distance(c, v);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign_all<T: Scalar, V: AsRef<[T]>>(centroids: &[Vec<T>], data: &[V], out: &mut [usize]) -> bool {
    let mut changed = false;
    for (slot, v) in out.iter_mut().zip(data) {
        let (j, _) = nearest(centroids, v.as_ref());
        if *slot != j {
            *slot = j;
            changed = true;
        }
    }
    changed
}

fn inertia<T: Scalar, V: AsRef<[T]>>(centroids: &[Vec<T>], data: &[V], assignments: &[usize]) -> T {
    data.iter()
        .zip(assignments)
        .map(|(v, &j)| squared_distance(&centroids[j], v.as_ref()))
        .sum()
}

/// Move the member farthest from its centroid into each empty cluster.
fn repair_empty<T: Scalar, V: AsRef<[T]>>(
    centroids: &mut [Vec<T>],
    data: &[V],
    assignments: &mut [usize],
) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &a in assignments.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let far = (0..data.len())
            .filter(|&i| counts[assignments[i]] > 1)
            .map(|i| (i, squared_distance(&centroids[assignments[i]], data[i].as_ref())))
            .fold(None::<(usize, T)>, |best, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        let Some((i, _)) = far else {
            return;
        };
        assignments[i] = empty;
        centroids[empty] = data[i].as_ref().to_vec();
    }
}

fn update_means<T: Scalar, V: AsRef<[T]>>(
    centroids: &mut [Vec<T>],
    data: &[V],
    assignments: &[usize],
) {
    let dims = centroids[0].len();
    let mut sums = vec![vec![T::zero(); dims]; centroids.len()];
    let mut counts = vec![0usize; centroids.len()];
    for (v, &j) in data.iter().zip(assignments) {
        counts[j] += 1;
        for (s, &x) in sums[j].iter_mut().zip(v.as_ref()) {
            *s += x;
        }
    }
    for ((c, s), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
        if n > 0 {
            let n = T::from_usize_lossy(n);
            *c = s.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Lloyd iterations from `k` seeded, distinct training vectors.
///
/// Each iteration repairs empty clusters, moves every centroid to the mean
/// of its members and reassigns. The fit stops when the largest centroid
/// displacement drops below `tol` and the reassignment left the partition
/// unchanged, or after `max_iter` iterations.
pub fn kmeans_fit<T: Scalar, V: AsRef<[T]>>(data: &[V], params: &KMeansParams<T>) -> Result<ClusterModel<T>> {
    let k = params.k;
    if k == 0 {
        return Err(Error::contract("k must be at least 1"));
    }
    if data.len() < k {
        return Err(Error::InsufficientData(format!(
            "{} vectors cannot form {k} clusters",
            data.len()
        )));
    }
    let dims = data[0].as_ref().len();
    if data.iter().any(|v| v.as_ref().len() != dims) {
        return Err(Error::contract("vectors differ in dimension"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut centroids: Vec<Vec<T>> = rand::seq::index::sample(&mut rng, data.len(), k)
        .into_iter()
        .map(|i| data[i].as_ref().to_vec())
        .collect();
    let mut assignments = vec![usize::MAX; data.len()];
    assign_all(&centroids, data, &mut assignments);

    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        repair_empty(&mut centroids, data, &mut assignments);
        let previous = centroids.clone();
        update_means(&mut centroids, data, &assignments);
        history.push(inertia(&centroids, data, &assignments));

        let shift = previous
            .iter()
            .zip(&centroids)
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(T::zero(), T::max);
        let changed = assign_all(&centroids, data, &mut assignments);
        if shift < params.tol && !changed {
            converged = true;
            break;
        }
    }

    let inertia = inertia(&centroids, data, &assignments);
    log::debug!(
        "kmeans k={k} n={} iterations={iterations} converged={converged} inertia={inertia}",
        data.len()
    );
    Ok(ClusterModel {
        k,
        centroids,
        assignments,
        inertia,
        inertia_history: history,
        iterations,
        converged,
        seed: params.seed,
    })
}

impl<T: Scalar> ClusterModel<T> {
    pub fn assign(&self, v: &[T]) -> usize {
        nearest(&self.centroids, v).0
    }

    pub fn distances(&self, v: &[T]) -> Vec<T> {
        self.centroids
            .iter()
            .map(|c| squared_distance(c, v).sqrt())
            .collect()
    }
}

/// Per-dimension z-score statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer<T> {
    pub mean: Vec<T>,
    /// Population standard deviation; zero marks a pass-through dimension.
    pub std: Vec<T>,
}

impl<T: Scalar> Standardizer<T> {
    pub fn fit<V: AsRef<[T]>>(data: &[V]) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "normalization needs at least 2 vectors, got {}",
                data.len()
            )));
        }
        let dims = data[0].as_ref().len();
        let n = T::from_usize_lossy(data.len());
        let mut mean = vec![T::zero(); dims];
        for v in data {
            for (m, &x) in mean.iter_mut().zip(v.as_ref()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![T::zero(); dims];
        for v in data {
            for ((s, &x), &m) in var.iter_mut().zip(v.as_ref()).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        let std = var
            .into_iter()
            .zip(&mean)
            .map(|(s, &m)| {
                let sd = (s / n).sqrt();
                // variance at rounding level of the mean counts as constant
                if sd <= T::epsilon() * m.abs() * T::lit(16.0) {
                    T::zero()
                } else {
                    sd
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        v.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&x, (&m, &s))| if s == T::zero() { x } else { (x - m) / s })
            .collect()
    }
}

/// Z-score every vector; constant dimensions pass through unchanged.
pub fn normalize_features(vectors: &[FeatureVector]) -> Result<(Vec<FeatureVector>, Standardizer<f64>)> {
    let stats = Standardizer::fit(vectors)?;
    let out = vectors
        .iter()
        .map(|v| {
            let mut dims = [0.0; FEATURE_DIMS];
            dims.copy_from_slice(&stats.apply(&v.dims));
            FeatureVector { dims, ..v.clone() }
        })
        .collect();
    Ok((out, stats))
}

/// Cluster index to identity name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdentityMap {
    names: HashMap<usize, String>,
    order: Vec<usize>,
}

impl IdentityMap {
    pub fn name(&self, cluster: usize) -> Option<&str> {
        self.names.get(&cluster).map(String::as_str)
    }

    /// Clusters in naming order.
    pub fn clusters(&self) -> &[usize] {
        &self.order
    }

    /// Names in the order they were handed out.
    pub fn names(&self) -> Vec<&str> {
        self.order.iter().map(|c| self.names[c].as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

pub fn default_name(i: usize) -> String {
    format!("diver-{i}")
}

/// Name nonempty clusters in order of their earliest member, by
/// (frame_index, detection_index).
pub fn label_clusters<T: Scalar>(
    model: &ClusterModel<T>,
    vectors: &[FeatureVector],
    names: Option<&[String]>,
) -> Result<IdentityMap> {
    if vectors.len() != model.assignments.len() {
        return Err(Error::contract(format!(
            "model was fitted on {} vectors, got {}",
            model.assignments.len(),
            vectors.len()
        )));
    }
    let mut first: HashMap<usize, (u64, usize)> = HashMap::new();
    for (v, &c) in vectors.iter().zip(&model.assignments) {
        let key = (v.frame_index, v.detection_index);
        first
            .entry(c)
            .and_modify(|k| *k = (*k).min(key))
            .or_insert(key);
    }
    let mut order: Vec<usize> = first.keys().copied().collect();
    order.sort_by_key(|c| first[c]);

    if let Some(given) = names {
        if given.len() < order.len() {
            return Err(Error::InsufficientNames {
                needed: order.len(),
                given: given.len(),
            });
        }
    }
    let names = order
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let name = names.map_or_else(|| default_name(i), |n| n[i].clone());
            (c, name)
        })
        .collect();
    Ok(IdentityMap { names, order })
}
