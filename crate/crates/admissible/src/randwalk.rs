//! Random walks w_n = g₁⋯g_n driven by a finitely supported measure, and the
//! statistics of their projections: drift in T, logarithmic projections, and
//! sublinear tracking of the limiting hierarchy path.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::amalgam::{Amalgam, GroupElement};
use crate::hhs::{threshold_sum, Domain, Hhs};
use crate::stats::{linear_fit, max, mean, quantile, relative_growth};
use crate::tree::{self, index_map, limit_ray, TreeRay, TreeVertex};
use crate::Error;

/// Threshold used when the distance formula stands in for the word metric.
pub const PROXY_THRESHOLD: f64 = 3.0;

/// First percentile of d_T(o, w₄₀₀)/400 for the uniform generator measure, from a pilot run (seed 1).
pub const PILOT_DRIFT_Q01: f64 = 0.255;

#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    pub support: Vec<(GroupElement, f64)>,
}

/// Outcome of the axis test on the semigroup generated by the support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elementarity {
    /// Loxodromic elements found among products of at most two support elements.
    pub loxodromics: usize,
    /// Whether two of them have disjoint pairs of endpoints.
    pub independent_pair: bool,
}

impl Elementarity {
    pub fn non_elementary(&self) -> bool {
        self.independent_pair
    }
}

impl Measure {
    pub fn new(support: Vec<(GroupElement, f64)>) -> Result<Self, Error> {
        if support.is_empty() {
            return Err(Error::Measure("empty support".into()));
        }
        if support.iter().any(|(_, p)| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Measure("probabilities must be positive".into()));
        }
        let total: f64 = support.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Measure(format!("probabilities sum to {total}")));
        }
        Ok(Measure { support })
    }

    pub fn uniform(elements: Vec<GroupElement>) -> Result<Self, Error> {
        let p = 1.0 / elements.len() as f64;
        Self::new(elements.into_iter().map(|g| (g, p)).collect())
    }

    /// Uniform on {a₁, b₁, a₂, b₂, t₁}±.
    pub fn uniform_generators(group: &Amalgam) -> Self {
        Self::uniform(group.generators()).expect("ten generators")
    }

    pub fn point_mass(g: GroupElement) -> Self {
        Measure { support: vec![(g, 1.0)] }
    }

    pub fn elementarity(&self, group: &Amalgam) -> Elementarity {
        let elems: Vec<&GroupElement> = self.support.iter().map(|(g, _)| g).collect();
        let mut cands: Vec<GroupElement> = elems.iter().map(|g| (*g).clone()).collect();
        for a in &elems {
            for b in &elems {
                cands.push(group.multiply(a, b));
            }
        }
        let lox: Vec<(GroupElement, usize)> = cands
            .into_iter()
            .filter_map(|g| translation_length(group, &g).filter(|t| *t > 0).map(|t| (g, t)))
            .collect();
        let ends: Vec<[TreeVertex; 2]> = lox.iter().map(|(g, _)| endpoints(group, g)).collect();
        let mut independent_pair = false;
        'outer: for i in 0..ends.len() {
            for j in i + 1..ends.len() {
                if disjoint_ends(&ends[i], &ends[j]) {
                    independent_pair = true;
                    break 'outer;
                }
            }
        }
        Elementarity { loxodromics: lox.len(), independent_pair }
    }

    /// Rejects measures with no loxodromic element, whose projections to T stay bounded.
    pub fn guard(&self, group: &Amalgam) -> Result<Elementarity, Error> {
        let e = self.elementarity(group);
        if e.loxodromics == 0 {
            return Err(Error::Measure("elementary: no element acts loxodromically on the tree".into()));
        }
        Ok(e)
    }
}

fn power(group: &Amalgam, g: &GroupElement, k: i64) -> GroupElement {
    let base = if k < 0 { group.invert(g) } else { g.clone() };
    let mut x = GroupElement::identity();
    for _ in 0..k.unsigned_abs() {
        x = group.multiply(&x, &base);
    }
    x
}

fn orbit_point(group: &Amalgam, g: &GroupElement, k: i64) -> TreeVertex {
    tree::act(group, &power(group, g, k), &TreeVertex::base())
}

/// Translation length of g on T, read off d(v₁, g⁴v₁) − d(v₁, g²v₁) = 2τ.
pub fn translation_length(group: &Amalgam, g: &GroupElement) -> Option<usize> {
    let v = TreeVertex::base();
    let d2 = tree::distance(&v, &orbit_point(group, g, 2));
    let d4 = tree::distance(&v, &orbit_point(group, g, 4));
    Some(d4.saturating_sub(d2) / 2)
}

const END_POWER: i64 = 12;

fn endpoints(group: &Amalgam, g: &GroupElement) -> [TreeVertex; 2] {
    [orbit_point(group, g, END_POWER), orbit_point(group, g, -END_POWER)]
}

/// Ends are distinct when the Gromov products at v₁ stay below half the depths.
fn disjoint_ends(a: &[TreeVertex; 2], b: &[TreeVertex; 2]) -> bool {
    let v = TreeVertex::base();
    a.iter().all(|p| {
        b.iter().all(|q| {
            let dp = tree::distance(&v, p);
            let dq = tree::distance(&v, q);
            let gromov = (dp + dq - tree::distance(p, q)) / 2;
            2 * gromov <= dp.min(dq)
        })
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplePath {
    pub seed: u64,
    pub stream: u64,
    pub steps: usize,
    /// Indices into the measure support.
    pub increments: Vec<usize>,
    pub positions: Vec<GroupElement>,
    pub vertices: Vec<TreeVertex>,
}

pub fn sample(group: &Amalgam, measure: &Measure, n: usize, seed: u64) -> SamplePath {
    sample_stream(group, measure, n, seed, 0)
}

/// Path number `stream` of the experiment with the given seed.
pub fn sample_stream(group: &Amalgam, measure: &Measure, n: usize, seed: u64, stream: u64) -> SamplePath {
    let weights = WeightedIndex::new(measure.support.iter().map(|(_, p)| *p)).expect("validated measure");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let pieces: Vec<_> = measure.support.iter().map(|(g, _)| group.pieces(g)).collect();
    let mut w = GroupElement::identity();
    let mut increments = Vec::with_capacity(n);
    let mut positions = Vec::with_capacity(n + 1);
    let mut vertices = Vec::with_capacity(n + 1);
    positions.push(w.clone());
    vertices.push(index_map(&w));
    for _ in 0..n {
        let i = weights.sample(&mut rng);
        for p in &pieces[i] {
            group.push(&mut w, p);
        }
        increments.push(i);
        vertices.push(index_map(&w));
        positions.push(w.clone());
    }
    SamplePath { seed, stream, steps: n, increments, positions, vertices }
}

/// Parameters of a batch of independent walks.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkConfig {
    pub paths: usize,
    pub checkpoints: Vec<usize>,
    /// Length of the extended path whose final quarter fixes the limit ray.
    pub ray_steps: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig { paths: 500, checkpoints: vec![100, 200, 400], ray_steps: 800, seed: 7 }
    }
}

/// Statistics of one path at one checkpoint n.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub n: usize,
    pub tree_distance: usize,
    /// sup over scanned proper domains of d_Y(o, w_n).
    pub sup_projection: f64,
    pub sup_domain: String,
    /// Distance-formula proxy from w_n to the nearest corner of the limit hierarchy path.
    pub tracking: f64,
    /// Depth of the stabilized tree prefix of w₀…w_n.
    pub prefix_depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord {
    pub stream: u64,
    pub ray_depth: usize,
    pub checkpoints: Vec<Checkpoint>,
}

/// Distance-formula proxy from x to the nearest corner of a ray's hierarchy path.
pub fn distance_to_ray(hhs: &Hhs, x: &GroupElement, ray: &TreeRay, corners: &[GroupElement]) -> f64 {
    let i = ray.project_index(&index_map(x));
    let lo = i.saturating_sub(2);
    let hi = (i + 2).min(corners.len() - 1);
    corners[lo..=hi].iter().map(|c| hhs.distance_formula(x, c, PROXY_THRESHOLD)).fold(f64::INFINITY, f64::min)
}

pub fn analyze_path(hhs: &Hhs, path: &SamplePath, checkpoints: &[usize]) -> Result<PathRecord, Error> {
    let ray = limit_ray(&path.positions)?;
    let corners = hhs.ray_corners(&ray);
    let o = GroupElement::identity();
    let base = TreeVertex::base();
    let mut out = Vec::new();
    for &n in checkpoints {
        let w = &path.positions[n];
        let (sup, dom) = hhs.max_proper_projection(&o, w);
        let prefix_depth = limit_ray(&path.positions[..=n]).map_or(0, |r| r.depth());
        out.push(Checkpoint {
            n,
            tree_distance: tree::distance(&base, &path.vertices[n]),
            sup_projection: sup,
            sup_domain: if dom == Domain::Tree { String::new() } else { dom.label(&hhs.group) },
            tracking: distance_to_ray(hhs, w, &ray, &corners),
            prefix_depth,
        });
    }
    Ok(PathRecord { stream: path.stream, ray_depth: ray.depth(), checkpoints: out })
}

/// Samples and analyses `cfg.paths` walks in parallel; records are ordered by stream.
pub fn run_walks(hhs: &Hhs, measure: &Measure, cfg: &WalkConfig) -> Result<Vec<PathRecord>, Error> {
    measure.guard(&hhs.group)?;
    let steps = cfg.ray_steps.max(cfg.checkpoints.iter().copied().max().unwrap_or(0));
    (0..cfg.paths as u64)
        .into_par_iter()
        .map(|s| {
            let path = sample_stream(&hhs.group, measure, steps, cfg.seed, s);
            analyze_path(hhs, &path, &cfg.checkpoints)
        })
        .collect()
}

fn column(records: &[PathRecord], n: usize, f: impl Fn(&Checkpoint) -> f64) -> Vec<f64> {
    records.iter().filter_map(|r| r.checkpoints.iter().find(|c| c.n == n).map(&f)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftRow {
    pub n: usize,
    pub mean: f64,
    pub q01: f64,
    /// Fraction of paths with d_T(o, w_n) ≥ l·n.
    pub exceedance: f64,
}

pub fn drift_stats(records: &[PathRecord], ns: &[usize], l: f64) -> Result<Vec<DriftRow>, Error> {
    if records.len() < 30 {
        return Err(Error::Measure(format!("drift needs at least 30 paths, got {}", records.len())));
    }
    Ok(ns
        .iter()
        .map(|&n| {
            let rates = column(records, n, |c| c.tree_distance as f64 / n as f64);
            let exceed = rates.iter().filter(|r| **r >= l).count() as f64 / rates.len() as f64;
            DriftRow { n, mean: mean(&rates), q01: quantile(&rates, 0.01), exceedance: exceed }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogRow {
    pub n: usize,
    pub q95: f64,
    /// q95 / ln n.
    pub c: f64,
    /// Fraction of paths with sup_Y d_Y(o, w_n) ≤ C·ln n at the fitted C.
    pub within: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogFit {
    /// Largest of the per-n constants.
    pub c: f64,
    pub rows: Vec<LogRow>,
    /// Largest relative change of the per-n constant between consecutive n.
    pub drift: f64,
}

pub fn log_projection_stats(records: &[PathRecord], ns: &[usize], q: f64) -> LogFit {
    let per_n: Vec<(usize, Vec<f64>)> = ns.iter().map(|&n| (n, column(records, n, |c| c.sup_projection))).collect();
    let c_of = |n: usize, v: &[f64]| quantile(v, q) / (n as f64).ln();
    let c = per_n.iter().map(|(n, v)| c_of(*n, v)).fold(0.0, f64::max);
    let rows: Vec<LogRow> = per_n
        .iter()
        .map(|(n, v)| {
            let bound = c * (*n as f64).ln();
            LogRow {
                n: *n,
                q95: quantile(v, q),
                c: c_of(*n, v),
                within: v.iter().filter(|s| **s <= bound + 1e-9).count() as f64 / v.len() as f64,
            }
        })
        .collect();
    let drift = rows.windows(2).map(|w| relative_growth(w[0].c, w[1].c).abs()).fold(0.0, f64::max);
    LogFit { c, rows, drift }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackingRow {
    pub n: usize,
    /// Mean of proxy(w_n, path)/n.
    pub mean: f64,
    pub q95: f64,
}

pub fn tracking_stats(records: &[PathRecord], ns: &[usize]) -> Vec<TrackingRow> {
    ns.iter()
        .map(|&n| {
            let v = column(records, n, |c| c.tracking / n as f64);
            TrackingRow { n, mean: mean(&v), q95: quantile(&v, 0.95) }
        })
        .collect()
}

/// One (x, y, ray) triple of the projection-control protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionSample {
    /// Distance-formula proxy for ‖x‖.
    pub norm: f64,
    pub dist_to_ray: f64,
    pub step: usize,
    /// d_T between the tree projections of Π_ξ(x) and Π_ξ(y).
    pub spread: usize,
}

/// Samples x leaving a random ray partway along, and y with d(x, y) ≤ D₁·d(x, γ), and measures the spread of their projections.
pub fn contraction_samples(
    hhs: &Hhs,
    measure: &Measure,
    count: usize,
    seed: u64,
    d1: f64,
) -> Result<Vec<ContractionSample>, Error> {
    measure.guard(&hhs.group)?;
    let g = &hhs.group;
    (0..count as u64)
        .into_par_iter()
        .map(|s| {
            let walk = sample_stream(g, measure, 400, seed, 3 * s);
            let ray = limit_ray(&walk.positions)?;
            let corners = hhs.ray_corners(&ray);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(3 * s + 1);
            let along = rand::Rng::gen_range(&mut rng, 0..=120usize);
            let len = rand::Rng::gen_range(&mut rng, 4..=40usize);
            let off = sample_stream(g, measure, len, seed, 3 * s + 1).positions.pop().expect("non-empty");
            let x = g.multiply(&walk.positions[along], &off);
            let dist = distance_to_ray(hhs, &x, &ray, &corners);
            let step = (d1 * dist).floor() as usize;
            let u = sample_stream(g, measure, step, seed, 3 * s + 2).positions.pop().expect("non-empty");
            let y = g.multiply(&x, &u);
            let px = hhs.project_to_ray(&x, &ray);
            let py = hhs.project_to_ray(&y, &ray);
            Ok(ContractionSample {
                norm: threshold_sum(&hhs.profile(&GroupElement::identity(), &x), PROXY_THRESHOLD),
                dist_to_ray: dist,
                step,
                spread: tree::distance(&index_map(&px), &index_map(&py)),
            })
        })
        .collect()
}

/// Slope of log(1 + max spread) against log log‖x‖ over bins of ‖x‖.
pub fn spread_exponent(samples: &[ContractionSample]) -> f64 {
    let mut bins: std::collections::BTreeMap<i64, Vec<f64>> = std::collections::BTreeMap::new();
    for s in samples.iter().filter(|s| s.norm >= 3.0) {
        bins.entry((s.norm.log2() * 2.0).floor() as i64).or_default().push(s.spread as f64);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = bins
        .iter()
        .filter(|(_, v)| v.len() >= 5)
        .map(|(k, v)| {
            let norm = 2f64.powf((*k as f64 + 0.5) / 2.0);
            (norm.ln().ln(), (1.0 + max(v)).ln())
        })
        .unzip();
    if xs.len() < 2 {
        return 0.0;
    }
    linear_fit(&xs, &ys).slope
}
