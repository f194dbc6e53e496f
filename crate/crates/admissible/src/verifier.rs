//! Sampling and enumeration harness turning the HHS axioms and the lemmas
//! around them into reports with fitted constants.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::amalgam::{Ball, GroupElement};
use crate::blocks::{self, axis_from_origin, covering_constant, line_axis, neighborhood_overlap, strip};
use crate::freegroup::{line_projection, FreeWord};
use crate::hhs::{self, relation, Domain, Hhs, Point, Relation};
use crate::randwalk::{contraction_samples, spread_exponent, Measure};
use crate::stats::{linear_fit, quantile, relative_growth};
use crate::tree::{self, adjacent, home_vertex, index_map, TreeVertex};
use crate::Error;

pub const CHECK_IDS: [&str; 14] = [
    "consistency",
    "bounded-geodesic-image",
    "complexity",
    "partial-realization",
    "uniqueness",
    "lemma-k",
    "hierarchy-growth",
    "bounded-projection",
    "projection-lipschitz",
    "index-map-lipschitz",
    "strip-quasiconvexity",
    "line-malnormality",
    "line-covering",
    "distance-formula",
];

fn axiom_of(id: &str) -> &'static str {
    match id {
        "consistency" => "consistency",
        "bounded-geodesic-image" => "bounded geodesic image",
        "complexity" => "finite complexity",
        "partial-realization" => "partial realization",
        "uniqueness" => "uniqueness",
        "lemma-k" => "strip projection bound",
        "hierarchy-growth" => "hierarchy path growth",
        "bounded-projection" => "bounded projection",
        "projection-lipschitz" => "projections",
        "index-map-lipschitz" => "index map",
        "strip-quasiconvexity" => "strip quasiconvexity",
        "line-malnormality" => "almost malnormal lines",
        "line-covering" => "line covering",
        "distance-formula" => "distance formula",
        _ => "unknown",
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Partial,
    Fail,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Partial => "partial",
            Status::Fail => "fail",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub id: String,
    pub radius: usize,
    pub samples: usize,
    pub seed: u64,
    /// Fitted constants in a fixed order.
    pub constants: Vec<(String, f64)>,
    pub witness: String,
    pub status: Status,
    pub note: String,
}

impl CheckReport {
    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckParams {
    pub radius: usize,
    pub samples: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams { radius: 4, samples: 1000, seed: 1, threshold: 10.0 }
    }
}

/// Deterministic per-check seed derived from the suite seed and the check id.
pub fn sub_seed(seed: u64, id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(id.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

pub struct Verifier {
    pub hhs: Hhs,
    pub ball: Ball,
}

struct Ctx<'a> {
    v: &'a Verifier,
    members: Vec<&'a GroupElement>,
    rng: ChaCha8Rng,
}

impl<'a> Ctx<'a> {
    fn element(&mut self) -> GroupElement {
        (*self.members.choose(&mut self.rng).expect("non-empty ball")).clone()
    }

    fn vertex(&mut self) -> TreeVertex {
        home_vertex(&self.element())
    }

    /// A line origin of length ≤ 2 at the given vertex type.
    fn origin(&mut self, vertex_type: u8) -> FreeWord {
        let len = self.rng.gen_range(0..=2usize);
        let mut w = FreeWord::identity();
        for _ in 0..len {
            let l = [1i8, -1, 2, -2][self.rng.gen_range(0..4)];
            w = w.mul(&FreeWord::letter(l));
        }
        crate::freegroup::coset_rep(&w, self.v.hhs.group.h(vertex_type))
    }

    fn neighbor(&mut self, v: &TreeVertex) -> TreeVertex {
        let o = self.origin(v.vertex_type);
        v.neighbor(&o)
    }

    /// A vertex within `hops` random steps of `v`.
    fn near(&mut self, v: &TreeVertex, hops: usize) -> TreeVertex {
        let mut w = v.clone();
        for _ in 0..self.rng.gen_range(0..=hops) {
            w = self.neighbor(&w);
        }
        w
    }

    fn domain_at(&mut self, v: TreeVertex) -> Domain {
        if self.rng.gen_bool(0.5) {
            Domain::Rline(v)
        } else {
            Domain::Hhat(v)
        }
    }

    fn word(&self, x: &GroupElement) -> String {
        let w = self.v.hhs.group.to_word(x);
        if w.is_empty() {
            "1".into()
        } else {
            w
        }
    }

    fn label(&self, d: &Domain) -> String {
        d.label(&self.v.hhs.group)
    }
}

/// Running maximum with the witness that attains it.
struct Max {
    value: f64,
    witness: String,
}

impl Max {
    fn new() -> Self {
        Max { value: 0.0, witness: String::new() }
    }

    fn offer(&mut self, value: f64, witness: impl FnOnce() -> String) {
        if value > self.value || (self.witness.is_empty() && value >= self.value) {
            self.value = value;
            self.witness = witness();
        }
    }
}

impl Verifier {
    pub fn new(hhs: Hhs, ball: Ball) -> Self {
        Verifier { hhs, ball }
    }

    pub fn build(hhs: Hhs, radius: usize) -> Result<Self, Error> {
        let ball = hhs.group.ball(radius)?;
        Ok(Verifier { hhs, ball })
    }

    fn ctx(&self, id: &str, p: &CheckParams) -> Ctx<'_> {
        let r = p.radius.min(self.ball.radius);
        Ctx {
            v: self,
            members: self.ball.within(r).map(|(g, _)| g).collect(),
            rng: ChaCha8Rng::seed_from_u64(sub_seed(p.seed, id)),
        }
    }

    fn report(
        &self,
        id: &str,
        p: &CheckParams,
        constants: Vec<(&str, f64)>,
        witness: String,
        status: Status,
        note: String,
    ) -> CheckReport {
        CheckReport {
            id: id.to_string(),
            radius: p.radius.min(self.ball.radius),
            samples: p.samples,
            seed: p.seed,
            constants: constants.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            witness,
            status,
            note,
        }
    }

    pub fn run_check(&self, id: &str, p: &CheckParams) -> Result<CheckReport, Error> {
        if p.radius > self.ball.radius {
            let mut r = self.run_check(id, &CheckParams { radius: self.ball.radius, ..p.clone() })?;
            r.status = r.status.max(Status::Partial);
            r.note = format!("cap: achieved radius {} of {}; {}", self.ball.radius, p.radius, r.note);
            return Ok(r);
        }
        match id {
            "consistency" => Ok(self.consistency(p)),
            "bounded-geodesic-image" => Ok(self.bounded_geodesic_image(p)),
            "complexity" => Ok(self.complexity(p)),
            "partial-realization" => self.partial_realization(p),
            "uniqueness" => Ok(self.uniqueness(p)),
            "lemma-k" => Ok(self.lemma_k(p)),
            "hierarchy-growth" => Ok(self.hierarchy_growth(p, None)),
            "bounded-projection" => self.bounded_projection(p),
            "projection-lipschitz" => Ok(self.projection_lipschitz(p)),
            "index-map-lipschitz" => Ok(self.index_map_lipschitz(p)),
            "strip-quasiconvexity" => self.strip_quasiconvexity(p),
            "line-malnormality" => Ok(self.line_malnormality(p)),
            "line-covering" => Ok(self.line_covering(p)),
            "distance-formula" => Ok(self.distance_formula(p)),
            _ => Err(Error::Parse(format!("unknown check id {id}"))),
        }
    }

    pub fn run_all(&self, p: &CheckParams) -> Result<Vec<CheckReport>, Error> {
        CHECK_IDS.iter().map(|id| self.run_check(id, p)).collect()
    }

    /// Runs one check at each radius and tabulates its constants.
    pub fn stability_sweep(
        &self,
        id: &str,
        radii: &[usize],
        p: &CheckParams,
        tolerance: f64,
    ) -> Result<Vec<TrendRow>, Error> {
        let reports: Vec<CheckReport> = radii
            .iter()
            .map(|&r| self.run_check(id, &CheckParams { radius: r, ..p.clone() }))
            .collect::<Result<_, _>>()?;
        Ok(trend(&reports, tolerance))
    }

    fn vertex_set(&self, r: usize) -> Vec<TreeVertex> {
        let set: BTreeSet<TreeVertex> = self.ball.within(r).map(|(g, _)| home_vertex(g)).collect();
        set.into_iter().collect()
    }

    // ♣ for transverse pairs, ♠ for nested pairs, ♦ for U ⊊ V against a third domain.
    fn consistency(&self, p: &CheckParams) -> CheckReport {
        let mut c = self.ctx("consistency", p);
        let h = &self.hhs;
        let mut club = Max::new();
        let mut spade = Max::new();
        let mut diamond = Max::new();
        let mut n_club = 0;
        while n_club < p.samples {
            let x = c.element();
            let v0 = c.vertex();
            let dv = c.domain_at(v0.clone());
            let w0 = c.near(&v0, 3);
            let dw = c.domain_at(w0);
            if relation(&dv, &dw) != Relation::Transverse {
                continue;
            }
            n_club += 1;
            let pw = h.p_set(&dv, &dw).expect("transverse").point;
            let pv = h.p_set(&dw, &dv).expect("transverse").point;
            let a = h.domain_distance(&dw, &h.pi(&dw, &x).point, &pw);
            let b = h.domain_distance(&dv, &h.pi(&dv, &x).point, &pv);
            let val = a.min(b);
            club.offer(val, || format!("x={} V={} W={}", c.word(&x), c.label(&dv), c.label(&dw)));
        }
        for _ in 0..p.samples {
            let x = c.element();
            let v0 = c.vertex();
            let (dv, dw) = if c.rng.gen_bool(0.5) {
                let dv = c.domain_at(v0);
                (dv, Domain::Tree)
            } else {
                let toward = if home_vertex(&x) != v0 && c.rng.gen_bool(0.5) {
                    tree::geodesic_tail(&home_vertex(&x), &v0, 1)[0].clone()
                } else {
                    c.neighbor(&v0)
                };
                (Domain::Rline(v0), Domain::Hhat(toward))
            };
            let rho = h.rho(&dv, &dw).expect("nested").point;
            let a = h.domain_distance(&dw, &h.pi(&dw, &x).point, &rho);
            let image = h.rho_map(&dw, &dv, &h.pi(&dw, &x).point).expect("nested").point;
            let b = if image == Point::Whole {
                f64::INFINITY
            } else {
                h.domain_distance(&dv, &h.pi(&dv, &x).point, &image)
            };
            spade.offer(a.min(b), || format!("x={} V={} W={}", c.word(&x), c.label(&dv), c.label(&dw)));
        }
        let exact = p.radius <= 4;
        if exact {
            let verts = self.vertex_set(p.radius);
            let mut domains = vec![Domain::Tree];
            for v in &verts {
                domains.push(Domain::Rline(v.clone()));
                domains.push(Domain::Hhat(v.clone()));
            }
            let set: BTreeSet<&TreeVertex> = verts.iter().collect();
            for u in &verts {
                let mut nbrs: Vec<TreeVertex> = vec![u.parent()];
                nbrs.extend(verts.iter().filter(|w| w.parent() == *u).cloned());
                for v in nbrs.into_iter().filter(|v| set.contains(v)) {
                    let du = Domain::Rline(u.clone());
                    let dv = Domain::Hhat(v.clone());
                    for dw in &domains {
                        if let Some(val) = self.diamond_value(&du, &dv, dw) {
                            diamond.offer(val, || format!("U={} V={} W={}", c.label(&du), c.label(&dv), c.label(dw)));
                        }
                    }
                }
            }
        } else {
            for _ in 0..p.samples {
                let u = c.vertex();
                let v = c.neighbor(&u);
                let w = c.near(&u, 3);
                let dw = if c.rng.gen_bool(0.1) { Domain::Tree } else { c.domain_at(w) };
                let du = Domain::Rline(u);
                let dv = Domain::Hhat(v);
                if let Some(val) = self.diamond_value(&du, &dv, &dw) {
                    diamond.offer(val, || format!("U={} V={} W={}", c.label(&du), c.label(&dv), c.label(&dw)));
                }
            }
        }
        let witness = [&club, &spade, &diamond].iter().map(|m| m.witness.clone()).collect::<Vec<_>>().join(" | ");
        let finite = club.value.is_finite() && spade.value.is_finite() && diamond.value.is_finite();
        self.report(
            "consistency",
            p,
            vec![("club", club.value), ("spade", spade.value), ("diamond", diamond.value)],
            witness,
            if finite { Status::Pass } else { Status::Fail },
            if exact { "diamond exhaustive".into() } else { "diamond sampled".into() },
        )
    }

    fn diamond_value(&self, u: &Domain, v: &Domain, w: &Domain) -> Option<f64> {
        if w == u || w == v {
            return None;
        }
        let a = self.hhs.script_p(u, w)?;
        let b = self.hhs.script_p(v, w)?;
        Some(self.hhs.domain_distance(w, &a.point, &b.point))
    }

    fn bounded_geodesic_image(&self, p: &CheckParams) -> CheckReport {
        let mut c = self.ctx("bounded-geodesic-image", p);
        let h = &self.hhs;
        let mut tree_e = Max::new();
        let mut hhat_e = Max::new();
        let mut links = Max::new();
        let mut link_violations = 0usize;
        let mut values = Vec::with_capacity(p.samples);
        for _ in 0..p.samples {
            let x = c.element();
            let y = c.element();
            // W ⊊ T: a geodesic of T against ρ^W_T = its vertex.
            let geo = tree::geodesic(&index_map(&x), &index_map(&y));
            let base = geo[c.rng.gen_range(0..geo.len())].clone();
            let w = c.near(&base, 2);
            let dw = c.domain_at(w.clone());
            let near = geo.iter().map(|g| tree::distance(g, &w)).min().unwrap_or(0) as f64;
            let traces: Vec<Point> = geo
                .iter()
                .map(|g| h.rho_map(&Domain::Tree, &dw, &Point::Vertex(g.clone())).expect("nested").point)
                .collect();
            let diam = set_diameter(h, &dw, &traces);
            let tree_val = near.min(diam);
            tree_e.offer(tree_val, || format!("x={} y={} W={}", c.word(&x), c.word(&y), c.label(&dw)));

            // R_w ⊊ Ĥ_v: a coned-off geodesic against the apex of ℓ_[v,w].
            let v = home_vertex(&x);
            let px = h.h_point(&v, &x);
            let py = h.h_point(&v, &y);
            let (_, path) = h.coned(v.vertex_type, &px, &py);
            let o = if c.rng.gen_bool(0.5) {
                let hp: Vec<&FreeWord> =
                    path.iter().filter_map(|q| if let Point::H(z) = q { Some(z) } else { None }).collect();
                let z = hp[c.rng.gen_range(0..hp.len())].clone();
                let k = c.origin(v.vertex_type);
                crate::freegroup::coset_rep(&z.mul(&k), h.group.h(v.vertex_type))
            } else {
                c.origin(v.vertex_type)
            };
            let wr = Domain::Rline(v.neighbor(&o));
            let dv = Domain::Hhat(v.clone());
            let apex = h.rho(&wr, &dv).expect("nested").point;
            let near = path.iter().map(|q| h.domain_distance(&dv, q, &apex)).fold(f64::INFINITY, f64::min);
            let images: Vec<Point> = path.iter().map(|q| h.rho_map(&dv, &wr, q).expect("nested").point).collect();
            let diam = set_diameter(h, &wr, &images);
            values.push(tree_val.max(near.min(diam)));
            hhat_e.offer(near.min(diam), || {
                format!("x={} y={} V={} W={}", c.word(&x), c.word(&y), c.label(&dv), c.label(&wr))
            });

            // Large links in T: domains with large projections sit on or next to [π(x), π(y)].
            let on: BTreeSet<&TreeVertex> = geo.iter().collect();
            for (d, val) in h.profile(&x, &y) {
                if let Domain::Hhat(u) = &d {
                    if !on.contains(u) {
                        links.offer(val, || format!("x={} y={} W={}", c.word(&x), c.word(&y), c.label(&d)));
                    }
                }
                if let Some(u) = d.vertex() {
                    if !on.contains(u) && !geo.iter().any(|g| adjacent(g, u)) {
                        link_violations += 1;
                    }
                }
            }
        }
        // E is fitted on the first half and tested on the second.
        let half = values.len() / 2;
        let e = values[..half].iter().copied().fold(0.0, f64::max);
        let violations = values[half..].iter().filter(|v| **v > e).count();
        self.report(
            "bounded-geodesic-image",
            p,
            vec![
                ("E", e),
                ("violations", violations as f64),
                ("E_tree", tree_e.value),
                ("E_hhat", hhat_e.value),
                ("large_links_lambda", 2.0),
                ("large_links_E", links.value),
                ("large_links_violations", link_violations as f64),
            ],
            [tree_e.witness, hhat_e.witness, links.witness].join(" | "),
            if violations == 0 && link_violations == 0 && e.is_finite() { Status::Pass } else { Status::Fail },
            format!("E fitted on {half} geodesics, tested on {}", values.len() - half),
        )
    }

    fn complexity(&self, p: &CheckParams) -> CheckReport {
        let verts = self.vertex_set(p.radius);
        let mut domains = vec![Domain::Tree];
        for v in &verts {
            domains.push(Domain::Rline(v.clone()));
            domains.push(Domain::Hhat(v.clone()));
        }
        let mut violations = 0usize;
        let mut witness = String::new();
        for (i, a) in domains.iter().enumerate() {
            for b in &domains[i..] {
                let cases = [
                    a == b,
                    hhs::is_properly_nested(a, b),
                    hhs::is_properly_nested(b, a),
                    hhs::is_orthogonal(a, b),
                    hhs::is_transverse_case(a, b),
                ];
                let n = cases.iter().filter(|c| **c).count();
                let symmetric = hhs::is_orthogonal(a, b) == hhs::is_orthogonal(b, a)
                    && hhs::is_transverse_case(a, b) == hhs::is_transverse_case(b, a);
                if n != 1 || !symmetric {
                    violations += 1;
                    if witness.is_empty() {
                        witness = format!("{} vs {}", a.label(&self.hhs.group), b.label(&self.hhs.group));
                    }
                }
            }
        }
        // Longest ⊑-chain: depth in the nesting order, counted in domains.
        let chain = domains
            .iter()
            .map(|d| match d {
                Domain::Tree => 1,
                Domain::Hhat(_) => 2,
                Domain::Rline(v) => {
                    if domains.iter().any(|e| matches!(e, Domain::Hhat(w) if adjacent(v, w))) {
                        3
                    } else {
                        2
                    }
                }
            })
            .max()
            .unwrap_or(0);
        // Largest pairwise-orthogonal family.
        let mut family = 1;
        for a in &domains {
            let partners: Vec<&Domain> = domains.iter().filter(|b| hhs::is_orthogonal(a, b)).collect();
            if !partners.is_empty() {
                family = family.max(2);
            }
            for (i, b) in partners.iter().enumerate() {
                for c in &partners[i + 1..] {
                    if hhs::is_orthogonal(b, c) {
                        family = family.max(3);
                    }
                }
            }
        }
        let ok = violations == 0 && chain == 3 && family <= 2;
        self.report(
            "complexity",
            p,
            vec![
                ("domains", domains.len() as f64),
                ("relation_violations", violations as f64),
                ("longest_chain", chain as f64),
                ("max_orthogonal_family", family as f64),
            ],
            witness,
            if ok { Status::Pass } else { Status::Fail },
            "exhaustive over domains indexed by the ball".into(),
        )
    }

    fn partial_realization(&self, p: &CheckParams) -> Result<CheckReport, Error> {
        let mut c = self.ctx("partial-realization", p);
        let h = &self.hhs;
        let mut alpha = Max::new();
        for _ in 0..p.samples {
            let v = c.vertex();
            let pr = c.rng.gen_range(-20..=20i64);
            let z = c.element();
            let zb = blocks::locate(&h.group, &z).base;
            let family: Vec<(Domain, Point)> = match c.rng.gen_range(0..4) {
                0 => vec![(Domain::Rline(v.clone()), Point::R(pr))],
                1 => vec![(Domain::Hhat(v.clone()), Point::H(zb))],
                2 => vec![(Domain::Rline(v.clone()), Point::R(pr)), (Domain::Hhat(v.clone()), Point::H(zb))],
                _ => {
                    let w = c.neighbor(&v);
                    vec![(Domain::Rline(v.clone()), Point::R(pr)), (Domain::Rline(w), Point::R(-pr / 2))]
                }
            };
            let x = h.realize(&family)?;
            for (d, target) in &family {
                let val = h.domain_distance(d, &h.pi(d, &x).point, target);
                alpha.offer(val, || format!("x={} at {}", c.word(&x), c.label(d)));
                let mut others = vec![Domain::Tree];
                for _ in 0..4 {
                    let u = c.near(d.vertex().expect("proper"), 3);
                    others.push(c.domain_at(u));
                }
                if let Domain::Rline(u) = d {
                    others.push(Domain::Hhat(c.neighbor(u)));
                }
                for w in others {
                    if let Some(set) = h.script_p(d, &w) {
                        let val = h.domain_distance(&w, &h.pi(&w, &x).point, &set.point);
                        alpha.offer(val, || format!("x={} {} in {}", c.word(&x), c.label(d), c.label(&w)));
                    }
                }
            }
        }
        Ok(self.report(
            "partial-realization",
            p,
            vec![("alpha", alpha.value)],
            alpha.witness,
            Status::Pass,
            String::new(),
        ))
    }

    fn uniqueness(&self, p: &CheckParams) -> CheckReport {
        let h = &self.hhs;
        let o = GroupElement::identity();
        let ks = [5.0, 10.0, 20.0];
        // Largest word length of an element whose projections all stay below k.
        let mut below = [0u8; 3];
        let mut witness = vec![String::new(); 3];
        for (x, len) in self.ball.within(p.radius) {
            let m = h.profile(&o, x).into_iter().map(|(_, d)| d).fold(0.0, f64::max);
            for (i, k) in ks.iter().enumerate() {
                if m < *k && len >= below[i] {
                    below[i] = len;
                    witness[i] = h.group.to_word(x);
                }
            }
        }
        let theta: Vec<f64> = below.iter().map(|b| *b as f64 + 1.0).collect();
        let determined: Vec<bool> = below.iter().map(|b| (*b as usize) < p.radius).collect();
        let all = determined.iter().all(|d| *d);
        let note = ks
            .iter()
            .zip(&determined)
            .map(|(k, d)| format!("theta({k}) {}", if *d { "determined" } else { "exceeds radius" }))
            .collect::<Vec<_>>()
            .join("; ");
        self.report(
            "uniqueness",
            p,
            vec![("theta_5", theta[0]), ("theta_10", theta[1]), ("theta_20", theta[2])],
            witness.join(" | "),
            if all { Status::Pass } else { Status::Partial },
            note,
        )
    }

    fn lemma_k(&self, p: &CheckParams) -> CheckReport {
        let mut c = self.ctx("lemma-k", p);
        let h = &self.hhs;
        let mut a = Max::new();
        let mut n = 0;
        while n < p.samples {
            let v = c.vertex();
            let w = c.neighbor(&v);
            let n1 = c.neighbor(&v);
            let n2 = c.neighbor(&v);
            if w == n1 || w == n2 || n1 == n2 {
                continue;
            }
            n += 1;
            let e = line_axis(&h.group, &v, &w);
            let (l1, _) = line_projection(&line_axis(&h.group, &v, &n1), &e).expect("distinct lines");
            let (l2, _) = line_projection(&line_axis(&h.group, &v, &n2), &e).expect("distinct lines");
            let gap = (e.lattice(l1) - e.lattice(l2)).abs() as f64;
            let off1 = c.element();
            let off2 = c.element();
            let x = h.group.multiply(&n1.rep(), &off1);
            let y = h.group.multiply(&n2.rep(), &off2);
            if tree::distance(&home_vertex(&x), &v) < 2 || tree::distance(&home_vertex(&y), &v) < 2 {
                continue;
            }
            let d = (h.r_coord(&w, &x) - h.r_coord(&w, &y)).abs() as f64;
            a.offer(d / (gap + 1.0), || {
                format!("x={} y={} e={}", c.word(&x), c.word(&y), c.label(&Domain::Rline(w.clone())))
            });
        }
        self.report("lemma-k", p, vec![("A", a.value)], a.witness, Status::Pass, String::new())
    }

    /// Envelope |y| ≤ c·(d_T + 1)·E³ over pairs (1, y) with proper projections ≤ E = 8.
    pub fn hierarchy_growth(&self, p: &CheckParams, fitted_c: Option<f64>) -> CheckReport {
        let h = &self.hhs;
        let o = GroupElement::identity();
        let e_max = 8.0;
        let mut c_fit = Max::new();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut violations = 0usize;
        let mut used = 0usize;
        for (x, len) in self.ball.within(p.radius) {
            if len == 0 {
                continue;
            }
            let prof = h.profile(&o, x);
            let dt = prof.iter().find(|(d, _)| *d == Domain::Tree).map_or(0.0, |(_, v)| *v);
            let e = prof.iter().filter(|(d, _)| *d != Domain::Tree).map(|(_, v)| *v).fold(1.0, f64::max);
            if e > e_max {
                continue;
            }
            used += 1;
            let ratio = len as f64 / ((dt + 1.0) * e.powi(3));
            c_fit.offer(ratio, || h.group.to_word(x));
            if let Some(cf) = fitted_c {
                if ratio > cf + 1e-12 {
                    violations += 1;
                }
            }
            if dt >= 1.0 {
                xs.push(dt.ln());
                ys.push((len as f64).ln());
            }
        }
        let slope = if xs.len() >= 2 { linear_fit(&xs, &ys).slope } else { 0.0 };
        let ok = slope <= 1.0 && violations == 0;
        self.report(
            "hierarchy-growth",
            p,
            vec![
                ("c", c_fit.value),
                ("exponent", slope),
                ("pairs", used as f64),
                ("envelope_violations", violations as f64),
            ],
            c_fit.witness,
            if ok { Status::Pass } else { Status::Fail },
            format!("E = {e_max}, p = 3"),
        )
    }

    fn bounded_projection(&self, p: &CheckParams) -> Result<CheckReport, Error> {
        let m = Measure::uniform_generators(&self.hhs.group);
        let seed = sub_seed(p.seed, "bounded-projection");
        let count = (p.samples / 10).max(20);
        let calib = contraction_samples(&self.hhs, &m, count / 2, seed, 0.5)?;
        let test = contraction_samples(&self.hhs, &m, count, seed.wrapping_add(1), 0.5)?;
        let d2 = calib.iter().map(|s| s.spread).max().unwrap_or(0) as f64;
        let violations = test.iter().filter(|s| s.spread as f64 > d2).count();
        let exponent = spread_exponent(&test);
        Ok(self.report(
            "bounded-projection",
            p,
            vec![("D1", 0.5), ("D2", d2), ("violations", violations as f64), ("spread_exponent", exponent)],
            String::new(),
            if violations == 0 && exponent <= 3.0 { Status::Pass } else { Status::Fail },
            format!("{} calibration and {} test triples", calib.len(), test.len()),
        ))
    }

    fn projection_lipschitz(&self, p: &CheckParams) -> CheckReport {
        let mut c = self.ctx("projection-lipschitz", p);
        let h = &self.hhs;
        let gens = h.group.generators();
        let mut step = Max::new();
        for _ in 0..p.samples {
            let x = c.element();
            let s = gens.choose(&mut c.rng).expect("generators");
            let y = h.group.multiply(&x, s);
            for (d, val) in h.profile(&x, &y) {
                step.offer(val, || format!("x={} s={} W={}", c.word(&x), c.word(s), c.label(&d)));
            }
        }
        self.report(
            "projection-lipschitz",
            p,
            vec![("max_step", step.value), ("K", (step.value / 2.0).ceil().max(1.0)), ("xi", 0.0)],
            step.witness,
            Status::Pass,
            String::new(),
        )
    }

    fn index_map_lipschitz(&self, p: &CheckParams) -> CheckReport {
        let mut c = self.ctx("index-map-lipschitz", p);
        let h = &self.hhs;
        let gens = h.group.generators();
        let mut step = Max::new();
        let mut equivariance = 0usize;
        for _ in 0..p.samples {
            let x = c.element();
            let s = gens.choose(&mut c.rng).expect("generators");
            let y = h.group.multiply(&x, s);
            let d = tree::distance(&index_map(&x), &index_map(&y)) as f64;
            step.offer(d, || format!("x={} s={}", c.word(&x), c.word(s)));
            let g = c.element();
            let gx = h.group.multiply(&g, &x);
            let v = index_map(&x);
            let moved = tree::act(&h.group, &g, &v);
            if index_map(&gx) != moved {
                equivariance += 1;
            }
        }
        self.report(
            "index-map-lipschitz",
            p,
            vec![("lipschitz", step.value), ("equivariance_violations", equivariance as f64)],
            step.witness,
            if equivariance == 0 { Status::Pass } else { Status::Fail },
            String::new(),
        )
    }

    fn strip_quasiconvexity(&self, p: &CheckParams) -> Result<CheckReport, Error> {
        let mut c = self.ctx("strip-quasiconvexity", p);
        let mut eps = Max::new();
        let mut n = 0;
        while n < p.samples.min(200) {
            let v = c.vertex();
            let a = c.neighbor(&v);
            let b = c.neighbor(&v);
            if a == b {
                continue;
            }
            n += 1;
            let s = strip(&self.hhs.group, &v, &a, &b)?;
            let val = blocks::strip_quasiconvexity(&s, p.radius as i64) as f64;
            eps.offer(val, || {
                format!(
                    "{} {} {}",
                    c.label(&Domain::Hhat(v.clone())),
                    c.label(&Domain::Hhat(a.clone())),
                    c.label(&Domain::Hhat(b.clone()))
                )
            });
        }
        Ok(self.report(
            "strip-quasiconvexity",
            p,
            vec![("epsilon", eps.value)],
            eps.witness,
            Status::Pass,
            String::new(),
        ))
    }

    fn line_malnormality(&self, p: &CheckParams) -> CheckReport {
        let mut c = self.ctx("line-malnormality", p);
        let g = &self.hhs.group;
        let mut diam = Max::new();
        let origins: Vec<Vec<FreeWord>> = (0..2).map(|t| blocks::line_origins(g, t, p.radius.min(4))).collect();
        for _ in 0..p.samples.min(300) {
            let t = c.rng.gen_range(0..2u8);
            let v = TreeVertex::root(t);
            let o = &origins[t as usize];
            let a = o.choose(&mut c.rng).expect("origins");
            let b = o.choose(&mut c.rng).expect("origins");
            if a == b {
                continue;
            }
            let la = axis_from_origin(g, &v, a);
            let lb = axis_from_origin(g, &v, b);
            if let Some(d) = neighborhood_overlap(&la, &lb, 2) {
                diam.offer(d as f64, || format!("{a} {b} in H_v{}", t + 1));
            }
        }
        self.report(
            "line-malnormality",
            p,
            vec![("overlap_diameter", diam.value)],
            diam.witness,
            Status::Pass,
            "r = 2".into(),
        )
    }

    fn line_covering(&self, p: &CheckParams) -> CheckReport {
        let g = &self.hhs.group;
        let r = p.radius.min(6);
        let c = covering_constant(g, 0, r).max(covering_constant(g, 1, r)) as f64;
        self.report("line-covering", p, vec![("r", c)], String::new(), Status::Pass, String::new())
    }

    fn distance_formula(&self, p: &CheckParams) -> CheckReport {
        let df = distance_formula_fit(&self.hhs, &self.ball, p.radius, p.threshold);
        let ok = df.slope > 0.0 && df.k.is_finite() && df.c.is_finite();
        self.report(
            "distance-formula",
            p,
            vec![
                ("slope", df.slope),
                ("intercept", df.intercept),
                ("qi_k", df.k),
                ("qi_c", df.c),
                ("residual_p95", df.residual_p95),
                ("pairs", df.pairs as f64),
            ],
            df.witness,
            if ok { Status::Pass } else { Status::Fail },
            format!("L = {}", p.threshold),
        )
    }
}

fn set_diameter(h: &Hhs, d: &Domain, pts: &[Point]) -> f64 {
    let pts: Vec<&Point> = pts.iter().filter(|q| **q != Point::Whole).collect();
    let mut best: f64 = 0.0;
    match d {
        Domain::Rline(_) => {
            let vals: Vec<i64> = pts.iter().filter_map(|q| if let Point::R(v) = q { Some(*v) } else { None }).collect();
            if let (Some(lo), Some(hi)) = (vals.iter().min(), vals.iter().max()) {
                best = (hi - lo) as f64;
            }
        }
        _ => {
            let uniq: Vec<&&Point> = pts.iter().collect::<Vec<_>>();
            for (i, a) in uniq.iter().enumerate() {
                for b in &uniq[i + 1..] {
                    if a != b {
                        best = best.max(h.domain_distance(d, a, b));
                    }
                }
            }
        }
    }
    best
}

/// Affine fit of word length against the distance formula over pairs (1, y).
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceFormulaFit {
    pub slope: f64,
    pub intercept: f64,
    /// Multiplicative and additive quasi-isometry constants.
    pub k: f64,
    pub c: f64,
    /// 95th percentile of |residual| / |y|.
    pub residual_p95: f64,
    pub pairs: usize,
    pub witness: String,
}

pub fn distance_formula_fit(h: &Hhs, ball: &Ball, radius: usize, threshold: f64) -> DistanceFormulaFit {
    let o = GroupElement::identity();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut elems = Vec::new();
    for (y, len) in ball.within(radius) {
        if len == 0 {
            continue;
        }
        xs.push(h.distance_formula(&o, y, threshold));
        ys.push(len as f64);
        elems.push(y);
    }
    let fit = linear_fit(&xs, &ys);
    let resid: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| (y - fit.slope * x - fit.intercept).abs()).collect();
    let rel: Vec<f64> = resid.iter().zip(&ys).map(|(r, y)| r / y).collect();
    let (worst, c) = resid.iter().enumerate().fold((0, 0.0), |acc, (i, r)| if *r > acc.1 { (i, *r) } else { acc });
    let k = if fit.slope > 0.0 { fit.slope.max(1.0 / fit.slope) } else { f64::INFINITY };
    DistanceFormulaFit {
        slope: fit.slope,
        intercept: fit.intercept,
        k,
        c,
        residual_p95: quantile(&rel, 0.95),
        pairs: xs.len(),
        witness: elems.get(worst).map(|y| h.group.to_word(y)).unwrap_or_default(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrendRow {
    pub check: String,
    pub constant: String,
    pub radii: Vec<usize>,
    pub values: Vec<f64>,
    pub max_growth: f64,
    pub flagged: bool,
}

/// Tabulates each constant across reports and flags growth beyond `tolerance` per step.
pub fn trend(reports: &[CheckReport], tolerance: f64) -> Vec<TrendRow> {
    let Some(first) = reports.first() else {
        return Vec::new();
    };
    first
        .constants
        .iter()
        .map(|(name, _)| {
            let values: Vec<f64> = reports.iter().map(|r| r.constant(name).unwrap_or(f64::NAN)).collect();
            let max_growth = values.windows(2).map(|w| relative_growth(w[0], w[1])).fold(0.0, f64::max);
            TrendRow {
                check: first.id.clone(),
                constant: name.clone(),
                radii: reports.iter().map(|r| r.radius).collect(),
                values,
                max_growth,
                flagged: max_growth > tolerance,
            }
        })
        .collect()
}

/// Ids from the audit list missing from a suite.
pub fn self_audit(reports: &[CheckReport]) -> Vec<&'static str> {
    let have: BTreeSet<&str> = reports.iter().map(|r| r.id.as_str()).collect();
    CHECK_IDS.iter().copied().filter(|id| !have.contains(id)).collect()
}

pub const CSV_HEADER: &str = "check,axiom,radius,samples,seed,constant,value,status,witness";
pub const CSV_SCHEMA: &str = "# schema: admissible-check/1";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn format_value(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.6}")
    }
}

pub fn to_csv(reports: &[CheckReport]) -> String {
    let mut out = format!("{CSV_SCHEMA}\n{CSV_HEADER}\n");
    for r in reports {
        for (name, v) in &r.constants {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.id,
                csv_field(axiom_of(&r.id)),
                r.radius,
                r.samples,
                r.seed,
                name,
                format_value(*v),
                r.status.as_str(),
                csv_field(&r.witness)
            );
        }
    }
    out
}

/// Machine-readable suite summary: one line per check.
pub fn summary(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let consts: Vec<String> = r.constants.iter().map(|(k, v)| format!("{k}={}", format_value(*v))).collect();
        let _ = writeln!(out, "{} {} {}", r.id, r.status.as_str(), consts.join(" "));
    }
    let missing = self_audit(reports);
    let _ = writeln!(
        out,
        "audit {} missing={}",
        if missing.is_empty() { "complete" } else { "incomplete" },
        missing.join(",")
    );
    out
}

pub fn trend_csv(rows: &[TrendRow]) -> String {
    let mut out = String::from("check,constant,radius,value,max_growth,flagged\n");
    for row in rows {
        for (r, v) in row.radii.iter().zip(&row.values) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                row.check,
                row.constant,
                r,
                format_value(*v),
                format_value(row.max_growth),
                row.flagged
            );
        }
    }
    out
}

/// Group-by helper used by suite consumers.
pub fn by_id(reports: &[CheckReport]) -> BTreeMap<&str, &CheckReport> {
    reports.iter().map(|r| (r.id.as_str(), r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Verifier {
        Verifier::build(Hhs::ck2(), 3).unwrap()
    }

    #[test]
    fn complexity_is_three() {
        let v = small();
        let r = v.run_check("complexity", &CheckParams { radius: 3, ..Default::default() }).unwrap();
        assert_eq!(r.constant("longest_chain"), Some(3.0));
        assert_eq!(r.constant("relation_violations"), Some(0.0));
        assert_eq!(r.constant("max_orthogonal_family"), Some(2.0));
    }

    #[test]
    fn empty_sweep_and_unknown_id() {
        let v = small();
        assert!(v.stability_sweep("complexity", &[], &CheckParams::default(), 0.1).unwrap().is_empty());
        assert!(v.run_check("nope", &CheckParams::default()).is_err());
    }

    #[test]
    fn cap_marks_partial() {
        let v = small();
        let r = v.run_check("line-covering", &CheckParams { radius: 5, ..Default::default() }).unwrap();
        assert_eq!(r.status, Status::Partial);
        assert_eq!(r.radius, 3);
    }
}
