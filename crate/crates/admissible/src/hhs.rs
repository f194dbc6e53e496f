//! The hierarchically hyperbolic structure on the orbit of the base point.
//!
//! Index set Λ = {T} ∪ {Ĥ_v} ∪ {R_v}. The tree T uses d_T, the quasi-line R_v is
//! modelled by ℤ through the fiber coordinate of B_v, and Ĥ_v is the Cayley
//! tree of F₂ with an apex joined to every boundary line by edges of weight
//! `apex_weight`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::amalgam::{Amalgam, GroupElement, VertexElement};
use crate::blocks::{axis_from_origin, embed, line_axis, locate, plane_point, segment, BlockPoint};
use crate::freegroup::{self, coset_rep, line_projection, Axis, FreeWord, Letter};
use crate::stats::median3;
use crate::tree::{self, adjacent, edge_line_origin, home_vertex, index_map, TreeRay, TreeVertex};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Tree,
    Hhat(TreeVertex),
    Rline(TreeVertex),
}

impl Domain {
    pub fn vertex(&self) -> Option<&TreeVertex> {
        match self {
            Domain::Tree => None,
            Domain::Hhat(v) | Domain::Rline(v) => Some(v),
        }
    }

    pub fn label(&self, group: &Amalgam) -> String {
        match self {
            Domain::Tree => "T".into(),
            Domain::Hhat(v) => format!("H{}", v.serialize(group)),
            Domain::Rline(v) => format!("R{}", v.serialize(group)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Equal,
    /// The first domain is properly nested in the second.
    NestedIn,
    /// The second domain is properly nested in the first.
    Contains,
    Orthogonal,
    Transverse,
}

pub fn is_properly_nested(v: &Domain, w: &Domain) -> bool {
    match (v, w) {
        (Domain::Tree, _) => false,
        (_, Domain::Tree) => true,
        (Domain::Rline(a), Domain::Hhat(b)) => adjacent(a, b),
        _ => false,
    }
}

pub fn is_orthogonal(v: &Domain, w: &Domain) -> bool {
    match (v, w) {
        (Domain::Rline(a), Domain::Hhat(b)) | (Domain::Hhat(b), Domain::Rline(a)) => a == b,
        (Domain::Rline(a), Domain::Rline(b)) => adjacent(a, b),
        _ => false,
    }
}

/// The three transverse configurations, stated positively.
pub fn is_transverse_case(v: &Domain, w: &Domain) -> bool {
    match (v, w) {
        (Domain::Rline(a), Domain::Rline(b)) => tree::distance(a, b) >= 2,
        (Domain::Rline(a), Domain::Hhat(b)) | (Domain::Hhat(b), Domain::Rline(a)) => tree::distance(a, b) >= 2,
        (Domain::Hhat(a), Domain::Hhat(b)) => a != b,
        _ => false,
    }
}

pub fn relation(v: &Domain, w: &Domain) -> Relation {
    if v == w {
        Relation::Equal
    } else if is_properly_nested(v, w) {
        Relation::NestedIn
    } else if is_properly_nested(w, v) {
        Relation::Contains
    } else if is_orthogonal(v, w) {
        Relation::Orthogonal
    } else {
        Relation::Transverse
    }
}

/// A point of some domain's hyperbolic model.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Vertex(TreeVertex),
    /// A vertex of H_v in the chart of v.
    H(FreeWord),
    /// The cone apex over the boundary line with the given origin.
    Apex(FreeWord),
    R(i64),
    /// The entire space.
    Whole,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundedSet {
    pub domain: Domain,
    pub point: Point,
    pub diameter: f64,
}

impl BoundedSet {
    fn new(domain: Domain, point: Point) -> Self {
        let diameter = if point == Point::Whole { f64::INFINITY } else { 0.0 };
        BoundedSet { domain, point, diameter }
    }
}

/// Corner points of a hierarchy path together with its shadow in T.
#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyPath {
    pub corners: Vec<GroupElement>,
    pub tree_path: Vec<TreeVertex>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Center {
    pub point: GroupElement,
    pub achieved: f64,
}

#[derive(Clone, Debug)]
pub struct Hhs {
    pub group: Amalgam,
    pub apex_weight: u64,
}

impl Hhs {
    /// Requires a gluing that exchanges base and fiber directions (anti-diagonal ±1).
    pub fn new(group: Amalgam) -> Result<Self, Error> {
        let m = group.cfg.gluing;
        if m[0][0] != 0 || m[1][1] != 0 {
            return Err(Error::Config(vec![format!(
                "quasi-line model needs an anti-diagonal gluing matrix, found {m:?}"
            )]));
        }
        Ok(Hhs { group, apex_weight: 1 })
    }

    pub fn ck2() -> Self {
        Self::new(Amalgam::ck2()).expect("CK2 gluing is the flip")
    }

    fn axis(&self, owner: &TreeVertex, neighbor: &TreeVertex) -> Axis {
        line_axis(&self.group, owner, neighbor)
    }

    /// Lattice position along a boundary line at `u`, read as a fiber coordinate of the neighbour.
    fn lattice_to_r(&self, u: &TreeVertex, p: i64) -> i64 {
        self.group.across(u.vertex_type, (p, 0)).1
    }

    /// Fiber coordinate at `to` of 𝒮_{[u,from],[u,to]} ∩ F_[u,to].
    pub fn strip_coord(&self, u: &TreeVertex, from: &TreeVertex, to: &TreeVertex) -> i64 {
        let a = self.axis(u, from);
        let b = self.axis(u, to);
        let (lo, _) = line_projection(&a, &b).expect("distinct edges carry distinct lines");
        self.lattice_to_r(u, b.lattice(lo))
    }

    /// The representative of π_{R_v}(x).
    pub fn r_coord(&self, v: &TreeVertex, x: &GroupElement) -> i64 {
        let u0 = home_vertex(x);
        if u0 == *v {
            return locate(&self.group, x).fiber;
        }
        let tail = tree::geodesic_tail(&u0, v, 2);
        self.r_local(&tail, x)
    }

    /// π_{R_v}(x) from the final vertices `[…, u, v]` of the geodesic from π(x) to v.
    fn r_local(&self, tail: &[TreeVertex], x: &GroupElement) -> i64 {
        let n = tail.len();
        let v = &tail[n - 1];
        if n == 1 {
            return locate(&self.group, x).fiber;
        }
        let u = &tail[n - 2];
        if n == 2 {
            let ax = self.axis(u, v);
            let (_, i, _) = ax.project_indexed(&locate(&self.group, x).base);
            self.lattice_to_r(u, ax.lattice(i))
        } else {
            self.strip_coord(u, &tail[n - 3], v)
        }
    }

    /// The representative of π_{Ĥ_v}(x): a vertex of H_v.
    pub fn h_point(&self, v: &TreeVertex, x: &GroupElement) -> FreeWord {
        let u0 = home_vertex(x);
        if u0 == *v {
            return locate(&self.group, x).base;
        }
        let tail = tree::geodesic_tail(&u0, v, 3);
        self.h_local(&tail, x)
    }

    /// π_{Ĥ_v}(x) from the final vertices of the geodesic from π(x) to v.
    fn h_local(&self, tail: &[TreeVertex], x: &GroupElement) -> FreeWord {
        let n = tail.len();
        let v = &tail[n - 1];
        if n == 1 {
            return locate(&self.group, x).base;
        }
        let u = &tail[n - 2];
        let q = self.r_local(&tail[..n - 1], x);
        let j = self.group.across(u.vertex_type, (0, q)).0;
        edge_line_origin(v, u).mul(&self.group.h(v.vertex_type).pow(j))
    }

    pub fn pi(&self, w: &Domain, x: &GroupElement) -> BoundedSet {
        let point = match w {
            Domain::Tree => Point::Vertex(index_map(x)),
            Domain::Hhat(v) => Point::H(self.h_point(v, x)),
            Domain::Rline(v) => Point::R(self.r_coord(v, x)),
        };
        BoundedSet::new(w.clone(), point)
    }

    /// ρ^V_W for V properly nested in W.
    pub fn rho(&self, v: &Domain, w: &Domain) -> Result<BoundedSet, Error> {
        if !is_properly_nested(v, w) {
            return Err(Error::Relation("rho needs a properly nested pair".into()));
        }
        let point = match (v, w) {
            (_, Domain::Tree) => Point::Vertex(v.vertex().expect("proper domain").clone()),
            (Domain::Rline(a), Domain::Hhat(b)) => Point::Apex(edge_line_origin(b, a)),
            _ => unreachable!("nesting is exhausted above"),
        };
        Ok(BoundedSet::new(w.clone(), point))
    }

    /// ρ^W_V applied to a point of 𝒞W, for V properly nested in W.
    pub fn rho_map(&self, w: &Domain, v: &Domain, p: &Point) -> Result<BoundedSet, Error> {
        if !is_properly_nested(v, w) {
            return Err(Error::Relation("rho_map needs a properly nested pair".into()));
        }
        let point = match (w, v) {
            (Domain::Tree, _) => {
                let Point::Vertex(x) = p else {
                    return Err(Error::Relation("point is not a tree vertex".into()));
                };
                let target = v.vertex().expect("proper domain");
                self.tree_trace(x, v, target)
            }
            (Domain::Hhat(b), Domain::Rline(a)) => {
                let c = edge_line_origin(b, a);
                let ax = axis_from_origin(&self.group, b, &c);
                match p {
                    Point::Apex(o) if coset_rep(o, &ax.core) == c => Point::Whole,
                    Point::Apex(o) => {
                        let other = axis_from_origin(&self.group, b, o);
                        let (lo, _) = line_projection(&other, &ax).expect("distinct lines");
                        Point::R(self.lattice_to_r(b, ax.lattice(lo)))
                    }
                    Point::H(z) => {
                        let (_, i, _) = ax.project_indexed(z);
                        Point::R(self.lattice_to_r(b, ax.lattice(i)))
                    }
                    _ => return Err(Error::Relation("point is not in a coned-off space".into())),
                }
            }
            _ => unreachable!("nesting is exhausted above"),
        };
        Ok(BoundedSet::new(v.clone(), point))
    }

    /// The trace in `w` of a vertex `x` at tree distance ≥ 2, or Whole when closer.
    fn tree_trace(&self, x: &TreeVertex, w: &Domain, target: &TreeVertex) -> Point {
        let path = tree::geodesic(x, target);
        let k = path.len() - 1;
        if k <= 1 {
            return Point::Whole;
        }
        let u = &path[k - 1];
        match w {
            Domain::Rline(_) => Point::R(self.strip_coord(u, &path[k - 2], target)),
            Domain::Hhat(_) => Point::Apex(edge_line_origin(target, u)),
            Domain::Tree => Point::Vertex(x.clone()),
        }
    }

    /// P^V_W for transverse V and W.
    pub fn p_set(&self, v: &Domain, w: &Domain) -> Result<BoundedSet, Error> {
        if relation(v, w) != Relation::Transverse {
            return Err(Error::Relation("P is defined for transverse pairs".into()));
        }
        let a = v.vertex().expect("proper domain");
        let b = w.vertex().expect("proper domain");
        let point = match w {
            Domain::Hhat(_) => {
                let path = tree::geodesic(b, a);
                Point::Apex(edge_line_origin(b, &path[1]))
            }
            _ => self.tree_trace(a, w, b),
        };
        Ok(BoundedSet::new(w.clone(), point))
    }

    /// 𝒫^U_W: ρ^U_W when U ⊊ W, P^U_W when U ⋔ W.
    pub fn script_p(&self, u: &Domain, w: &Domain) -> Option<BoundedSet> {
        match relation(u, w) {
            Relation::NestedIn => self.rho(u, w).ok(),
            Relation::Transverse => self.p_set(u, w).ok(),
            _ => None,
        }
    }

    pub fn domain_distance(&self, w: &Domain, a: &Point, b: &Point) -> f64 {
        if *a == Point::Whole || *b == Point::Whole {
            return 0.0;
        }
        match (w, a, b) {
            (Domain::Tree, Point::Vertex(x), Point::Vertex(y)) => tree::distance(x, y) as f64,
            (Domain::Rline(_), Point::R(x), Point::R(y)) => (x - y).abs() as f64,
            (Domain::Hhat(v), _, _) => self.hhat_distance(v.vertex_type, a, b) as f64,
            _ => panic!("points {a:?}, {b:?} do not belong to {w:?}"),
        }
    }

    pub fn d(&self, w: &Domain, x: &GroupElement, y: &GroupElement) -> f64 {
        self.domain_distance(w, &self.pi(w, x).point, &self.pi(w, y).point)
    }

    fn line(&self, vertex_type: u8, origin: &FreeWord) -> Axis {
        Axis::new(self.group.h(vertex_type).clone(), origin.clone())
    }

    /// Distance in Ĥ_v between two points of the coned-off model.
    pub fn hhat_distance(&self, vertex_type: u8, a: &Point, b: &Point) -> u64 {
        let w = self.apex_weight;
        match (a, b) {
            (Point::H(x), Point::H(y)) => self.coned(vertex_type, x, y).0,
            (Point::Apex(c), Point::H(y)) | (Point::H(y), Point::Apex(c)) => {
                let ax = self.line(vertex_type, c);
                let (z, _, _) = ax.project_indexed(y);
                w + self.coned(vertex_type, &z, y).0
            }
            (Point::Apex(c1), Point::Apex(c2)) => {
                let a1 = self.line(vertex_type, c1);
                let a2 = self.line(vertex_type, c2);
                match freegroup::bridge(&a1, &a2) {
                    None => 0,
                    Some(br) if br.length == 0 => 2 * w,
                    Some(br) => 2 * w + self.coned(vertex_type, &a1.point(br.on_first), &a2.point(br.on_second)).0,
                }
            }
            _ => panic!("points {a:?}, {b:?} are not in a coned-off space"),
        }
    }

    /// Origins of the boundary lines containing the edge from `p` along letter `l`.
    fn lines_through_edge(&self, vertex_type: u8, p: &FreeWord, l: Letter) -> Vec<FreeWord> {
        let h = self.group.h(vertex_type);
        let mut out = Vec::new();
        for (s, &c) in h.letters().iter().enumerate() {
            let pre = h.prefix(s).inverse();
            if c == l {
                out.push(coset_rep(&p.mul(&pre), h));
            }
            if c == -l {
                out.push(coset_rep(&p.mul(&FreeWord::letter(l)).mul(&pre), h));
            }
        }
        out
    }

    fn edge_letter(p: &FreeWord, q: &FreeWord) -> Letter {
        if q.len() > p.len() {
            *q.letters().last().expect("longer word")
        } else {
            -*p.letters().last().expect("longer word")
        }
    }

    /// Coned-off distance between two vertices of H_v, with a geodesic.
    ///
    /// Shortcuts through an apex only help between points of a boundary line
    /// lying on the tree geodesic, so a dynamic program along it is exact.
    pub fn coned(&self, vertex_type: u8, x: &FreeWord, y: &FreeWord) -> (u64, Vec<Point>) {
        let verts = segment(x, y);
        let n = verts.len() - 1;
        let mut spans: BTreeMap<Vec<Letter>, (usize, usize, FreeWord)> = BTreeMap::new();
        for i in 0..n {
            let l = Self::edge_letter(&verts[i], &verts[i + 1]);
            for o in self.lines_through_edge(vertex_type, &verts[i], l) {
                let e = spans.entry(o.letters().to_vec()).or_insert((i, i, o.clone()));
                e.0 = e.0.min(i);
                e.1 = e.1.max(i);
            }
        }
        let jump = 2 * self.apex_weight;
        let mut dist = vec![0u64; n + 1];
        let mut pred: Vec<(usize, Option<FreeWord>)> = vec![(0, None); n + 1];
        for j in 1..=n {
            dist[j] = dist[j - 1] + 1;
            pred[j] = (j - 1, None);
            for (a, b, o) in spans.values() {
                if *a < j && j <= b + 1 {
                    for i in *a..j {
                        if dist[i] + jump < dist[j] {
                            dist[j] = dist[i] + jump;
                            pred[j] = (i, Some(o.clone()));
                        }
                    }
                }
            }
        }
        let mut path = vec![Point::H(verts[n].clone())];
        let mut j = n;
        while j > 0 {
            let (i, via) = &pred[j];
            if let Some(o) = via {
                path.push(Point::Apex(o.clone()));
            }
            path.push(Point::H(verts[*i].clone()));
            j = *i;
        }
        path.reverse();
        (dist[n], path)
    }

    /// Domains that can carry a non-negligible projection distance between x and y.
    ///
    /// These are T, every Ĥ_u and R_u on the tree geodesic, and the neighbours
    /// of geodesic vertices whose boundary line meets the hull, in H_u, of the
    /// entry sets of x and y. Every other vertex sees both points at a
    /// uniformly bounded distance.
    pub fn relevant_domains(&self, x: &GroupElement, y: &GroupElement) -> Vec<Domain> {
        self.scan(x, y, false).into_iter().map(|(d, _)| d).collect()
    }

    /// Relevant domains with their projection distances d_W(x, y).
    pub fn profile(&self, x: &GroupElement, y: &GroupElement) -> Vec<(Domain, f64)> {
        self.scan(x, y, true)
    }

    fn scan(&self, x: &GroupElement, y: &GroupElement, measure: bool) -> Vec<(Domain, f64)> {
        let ux = home_vertex(x);
        let uy = home_vertex(y);
        let path = tree::geodesic(&ux, &uy);
        let k = path.len() - 1;
        let mut out: BTreeMap<Domain, f64> = BTreeMap::new();
        out.insert(Domain::Tree, tree::distance(&index_map(x), &index_map(y)) as f64);
        for (idx, u) in path.iter().enumerate() {
            if !measure {
                out.insert(Domain::Rline(u.clone()), 0.0);
                out.insert(Domain::Hhat(u.clone()), 0.0);
            }
            if measure {
                let xt: Vec<TreeVertex> = path[idx.saturating_sub(3)..=idx].to_vec();
                let yt: Vec<TreeVertex> = path[idx..=(idx + 3).min(k)].iter().rev().cloned().collect();
                let dr = (self.r_local(&xt[xt.len().saturating_sub(3)..], x)
                    - self.r_local(&yt[yt.len().saturating_sub(3)..], y))
                .abs();
                out.insert(Domain::Rline(u.clone()), dr as f64);
                let dh =
                    self.hhat_distance(u.vertex_type, &Point::H(self.h_local(&xt, x)), &Point::H(self.h_local(&yt, y)));
                out.insert(Domain::Hhat(u.clone()), dh as f64);
            }

            let sx = if idx == 0 {
                Entry::At(locate(&self.group, x).base)
            } else {
                Entry::Line(self.axis(u, &path[idx - 1]))
            };
            let sy = if idx == k {
                Entry::At(locate(&self.group, y).base)
            } else {
                Entry::Line(self.axis(u, &path[idx + 1]))
            };
            let mut origins: BTreeSet<Vec<Letter>> = BTreeSet::new();
            for seg in self.hull_segments(u, &sx, &sy) {
                for pair in seg.windows(2) {
                    let l = Self::edge_letter(&pair[0], &pair[1]);
                    for o in self.lines_through_edge(u.vertex_type, &pair[0], l) {
                        origins.insert(o.letters().to_vec());
                    }
                }
            }
            let prev = (idx > 0).then(|| edge_line_origin(u, &path[idx - 1]));
            let next = (idx < k).then(|| edge_line_origin(u, &path[idx + 1]));
            for o in origins {
                let o = freegroup::reduce(&o);
                if prev.as_ref() == Some(&o) || next.as_ref() == Some(&o) {
                    continue;
                }
                let w = u.neighbor(&o);
                if !measure {
                    out.insert(Domain::Rline(w.clone()), 0.0);
                    out.insert(Domain::Hhat(w), 0.0);
                    continue;
                }
                let mut xw = path[idx.saturating_sub(2)..=idx].to_vec();
                xw.push(w.clone());
                let mut yw: Vec<TreeVertex> = path[idx..=(idx + 2).min(k)].iter().rev().cloned().collect();
                yw.push(w.clone());
                let dr = (self.r_local(&xw[xw.len() - 3.min(xw.len())..], x)
                    - self.r_local(&yw[yw.len() - 3.min(yw.len())..], y))
                .abs();
                let dh =
                    self.hhat_distance(w.vertex_type, &Point::H(self.h_local(&xw, x)), &Point::H(self.h_local(&yw, y)));
                out.insert(Domain::Rline(w.clone()), dr as f64);
                out.insert(Domain::Hhat(w), dh as f64);
            }
        }
        out.into_iter().collect()
    }

    fn hull_segments(&self, u: &TreeVertex, sx: &Entry, sy: &Entry) -> Vec<Vec<FreeWord>> {
        let margin = 2 * self.group.h(u.vertex_type).len() as i64 + 2;
        let around = |ax: &Axis, i: i64| segment(&ax.point(i - margin), &ax.point(i + margin));
        match (sx, sy) {
            (Entry::At(p), Entry::At(q)) => vec![segment(p, q)],
            (Entry::At(p), Entry::Line(ax)) | (Entry::Line(ax), Entry::At(p)) => {
                let (q, i, _) = ax.project_indexed(p);
                vec![segment(p, &q), around(ax, i)]
            }
            (Entry::Line(a), Entry::Line(b)) => match freegroup::bridge(a, b) {
                Some(br) => vec![
                    segment(&a.point(br.on_first), &b.point(br.on_second)),
                    around(a, br.on_first),
                    around(b, br.on_second),
                ],
                None => vec![around(a, 0)],
            },
        }
    }

    /// Σ_W ⌊d_W(x, y)⌋_L over proper relevant domains, plus d_T(x, y).
    pub fn distance_formula(&self, x: &GroupElement, y: &GroupElement, threshold: f64) -> f64 {
        threshold_sum(&self.profile(x, y), threshold)
    }

    /// Largest proper-domain projection distance between x and y.
    pub fn max_proper_projection(&self, x: &GroupElement, y: &GroupElement) -> (f64, Domain) {
        let mut best = (0.0, Domain::Tree);
        for (w, d) in self.profile(x, y) {
            if w != Domain::Tree && d > best.0 {
                best = (d, w);
            }
        }
        best
    }

    fn corner_position(&self, a: &TreeVertex, b: &TreeVertex, p: i64, q: i64) -> GroupElement {
        let base = self.group.across(a.vertex_type, (p, 0)).0;
        let step = self.group.across(a.vertex_type, (0, 1)).0;
        let k = (q - base) / step;
        plane_point(&self.group, a, b, (p, k))
    }

    /// Corner points 𝒮_{e_{i−1}e_i} ∩ 𝒮_{e_ie_{i+1}} along a tree path starting at π(x).
    ///
    /// `last` supplies the endpoint in the final block; without it the final
    /// edge is left without a corner.
    fn corners_along(&self, x: &GroupElement, path: &[TreeVertex], last: Option<&GroupElement>) -> Vec<GroupElement> {
        let k = path.len() - 1;
        let mut out = Vec::new();
        for i in 1..=k {
            let a = &path[i - 1];
            let b = &path[i];
            let ab = self.axis(a, b);
            let p = if i == 1 {
                ab.lattice(ab.project_indexed(&locate(&self.group, x).base).1)
            } else {
                ab.lattice(line_projection(&self.axis(a, &path[i - 2]), &ab).expect("distinct lines").0)
            };
            let ba = self.axis(b, a);
            let q = if i == k {
                match last {
                    Some(y) => ba.lattice(ba.project_indexed(&locate(&self.group, y).base).1),
                    None => break,
                }
            } else {
                ba.lattice(line_projection(&self.axis(b, &path[i + 1]), &ba).expect("distinct lines").0)
            };
            out.push(self.corner_position(a, b, p, q));
        }
        out
    }

    pub fn hierarchy_path(&self, x: &GroupElement, y: &GroupElement) -> HierarchyPath {
        let tree_path = tree::geodesic(&home_vertex(x), &home_vertex(y));
        let mut corners = vec![x.clone()];
        corners.extend(self.corners_along(x, &tree_path, Some(y)));
        corners.push(y.clone());
        HierarchyPath { corners, tree_path }
    }

    /// Hierarchy path from x towards the end of a ray prefix.
    pub fn hierarchy_path_ray(&self, x: &GroupElement, ray: &TreeRay) -> HierarchyPath {
        let tree_path = tree::geodesic(&home_vertex(x), ray.end());
        let mut corners = vec![x.clone()];
        corners.extend(self.corners_along(x, &tree_path, None));
        HierarchyPath { corners, tree_path }
    }

    /// Coordinatewise center of three points, realised by a nearby orbit point.
    pub fn center(&self, x: &GroupElement, y: &GroupElement, z: &GroupElement) -> Center {
        let (vx, vy, vz) = (home_vertex(x), home_vertex(y), home_vertex(z));
        let m = tree::median(&vx, &vy, &vz);
        let hm = freegroup::median(&self.h_point(&m, x), &self.h_point(&m, y), &self.h_point(&m, z));
        let fm = median3(self.r_coord(&m, x), self.r_coord(&m, y), self.r_coord(&m, z));
        let eta0 = embed(&self.group, &BlockPoint { vertex: m.clone(), base: hm, fiber: fm });

        let mut domains: BTreeSet<Domain> = BTreeSet::new();
        for (p, q) in [(x, y), (y, z), (x, z)] {
            domains.extend(self.relevant_domains(p, q));
        }
        let targets: Vec<(Domain, Point)> = domains
            .into_iter()
            .map(|d| {
                let c = match &d {
                    Domain::Tree => Point::Vertex(tree::median(&index_map(x), &index_map(y), &index_map(z))),
                    Domain::Rline(v) => Point::R(median3(self.r_coord(v, x), self.r_coord(v, y), self.r_coord(v, z))),
                    Domain::Hhat(v) => {
                        Point::H(freegroup::median(&self.h_point(v, x), &self.h_point(v, y), &self.h_point(v, z)))
                    }
                };
                (d, c)
            })
            .collect();

        // Far from π(η) a projection depends only on the tree path, so it is shared.
        let mut far: HashMap<(TreeVertex, usize), f64> = HashMap::new();
        let mut objective = |eta: &GroupElement| -> f64 {
            let ue = home_vertex(eta);
            let mut worst: f64 = 0.0;
            for (i, (d, c)) in targets.iter().enumerate() {
                let shared = d.vertex().is_some_and(|v| tree::distance(&ue, v) >= 3);
                let val = if shared {
                    if let Some(v) = far.get(&(ue.clone(), i)) {
                        *v
                    } else {
                        let v = self.domain_distance(d, &self.pi(d, eta).point, c);
                        far.insert((ue.clone(), i), v);
                        v
                    }
                } else {
                    self.domain_distance(d, &self.pi(d, eta).point, c)
                };
                worst = worst.max(val);
            }
            worst
        };

        let mut candidates = vec![eta0.clone()];
        for s in block_words(m.vertex_type, 2) {
            let mut e = eta0.clone();
            for piece in &s {
                self.group.push(&mut e, piece);
            }
            candidates.push(e);
        }
        for (p, q) in [(x, y), (y, z), (x, z)] {
            candidates.extend(
                self.hierarchy_path(p, q).corners.into_iter().filter(|c| tree::distance(&home_vertex(c), &m) <= 1),
            );
        }
        let mut best = Center { point: eta0.clone(), achieved: objective(&eta0) };
        for c in candidates.into_iter().skip(1) {
            let v = objective(&c);
            if v < best.achieved {
                best = Center { point: c, achieved: v };
            }
        }
        best
    }

    /// Corner points of the hierarchy path from the identity along a ray prefix.
    pub fn ray_corners(&self, ray: &TreeRay) -> Vec<GroupElement> {
        self.hierarchy_path_ray(&GroupElement::identity(), ray).corners
    }

    /// Π_ξ(x) = cent(o, x, ξ), with ξ replaced by a corner deep along the ray.
    pub fn project_to_ray(&self, x: &GroupElement, ray: &TreeRay) -> GroupElement {
        let corners = self.ray_corners(ray);
        let depth = 2 * tree::distance(&TreeVertex::base(), &home_vertex(x)) + 2;
        let far = &corners[depth.min(corners.len() - 1)];
        self.center(&GroupElement::identity(), x, far).point
    }

    /// Whether z lies in the D-cloud of the ray: every relevant domain sees z within D of the path.
    pub fn cloud_member(&self, z: &GroupElement, ray: &TreeRay, bound: f64) -> bool {
        let o = GroupElement::identity();
        let corners = self.ray_corners(ray);
        let vz = home_vertex(z);
        let near = ray.project_index(&vz).min(corners.len() - 1);
        let mut domains: BTreeSet<Domain> = self.relevant_domains(&o, z).into_iter().collect();
        domains.extend(self.relevant_domains(z, &corners[near]));
        for d in domains {
            let pz = self.pi(&d, z).point;
            let dist = match &d {
                Domain::Tree => {
                    let t = index_map(z);
                    tree::distance(&t, &ray.vertices[ray.project_index(&t)]) as f64
                }
                _ => corners
                    .iter()
                    .map(|c| self.domain_distance(&d, &pz, &self.pi(&d, c).point))
                    .fold(f64::INFINITY, f64::min),
            };
            if dist > bound {
                return false;
            }
        }
        true
    }

    /// Orbit point realising coordinates on a pairwise-orthogonal family (size ≤ 2).
    pub fn realize(&self, family: &[(Domain, Point)]) -> Result<GroupElement, Error> {
        let g = &self.group;
        match family {
            [(Domain::Rline(v), Point::R(p))] => {
                Ok(embed(g, &BlockPoint { vertex: v.clone(), base: FreeWord::identity(), fiber: *p }))
            }
            [(Domain::Hhat(v), Point::H(z))] => {
                Ok(embed(g, &BlockPoint { vertex: v.clone(), base: z.clone(), fiber: 0 }))
            }
            [(Domain::Rline(v), Point::R(p)), (Domain::Hhat(w), Point::H(z))]
            | [(Domain::Hhat(w), Point::H(z)), (Domain::Rline(v), Point::R(p))]
                if v == w =>
            {
                Ok(embed(g, &BlockPoint { vertex: v.clone(), base: z.clone(), fiber: *p }))
            }
            [(Domain::Rline(v), Point::R(p)), (Domain::Rline(w), Point::R(q))] if adjacent(v, w) => {
                let base = g.across(v.vertex_type, (0, *p)).1;
                let step = g.across(v.vertex_type, (1, 0)).1;
                let j = (q - base) / step;
                Ok(plane_point(g, v, w, (j, *p)))
            }
            _ => Err(Error::Relation("family is not a realisable orthogonal family".into())),
        }
    }
}

enum Entry {
    At(FreeWord),
    Line(Axis),
}

/// Σ_W ⌊d_W⌋_L over the proper domains of a profile, plus the tree term.
pub fn threshold_sum(profile: &[(Domain, f64)], threshold: f64) -> f64 {
    profile.iter().map(|(w, d)| if *w == Domain::Tree || *d >= threshold { *d } else { 0.0 }).sum()
}

/// Products of at most `len` generators of one vertex group, as vertex pieces.
fn block_words(vertex_type: u8, len: usize) -> Vec<Vec<VertexElement>> {
    let gens: Vec<VertexElement> = [1i8, -1, 2, -2]
        .iter()
        .map(|&l| VertexElement { vertex: vertex_type, word: FreeWord::letter(l), fiber: 0 })
        .chain([1i64, -1].iter().map(|&f| VertexElement { vertex: vertex_type, word: FreeWord::identity(), fiber: f }))
        .collect();
    let mut out: Vec<Vec<VertexElement>> = vec![Vec::new()];
    let mut layer: Vec<Vec<VertexElement>> = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &layer {
            for g in &gens {
                let mut v = w.clone();
                v.push(g.clone());
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> Hhs {
        Hhs::ck2()
    }

    #[test]
    fn relation_examples() {
        let s = setup();
        let g = &s.group;
        let v1 = TreeVertex::base();
        assert_eq!(relation(&Domain::Rline(v1.clone()), &Domain::Hhat(v1.clone())), Relation::Orthogonal);
        let av2 = tree::act(g, &g.parse_word("a1").unwrap(), &TreeVertex::root(1));
        assert_eq!(relation(&Domain::Rline(av2), &Domain::Tree), Relation::NestedIn);
        let far = tree::act(g, &g.parse_word("a1 a2").unwrap(), &v1);
        assert_eq!(relation(&Domain::Hhat(v1), &Domain::Hhat(far)), Relation::Transverse);
    }

    #[test]
    fn projection_examples() {
        let s = setup();
        let g = &s.group;
        let v1 = TreeVertex::base();
        assert_eq!(s.pi(&Domain::Tree, &g.parse_word("a1").unwrap()).point, Point::Vertex(v1.clone()));
        let t5 = g.parse_word("t1^5").unwrap();
        let p = s.pi(&Domain::Rline(v1.clone()), &t5);
        assert_eq!((p.point, p.diameter), (Point::R(5), 0.0));
        let x = g.parse_word("a1 a2 a1").unwrap();
        let Point::H(z) = s.pi(&Domain::Hhat(v1.clone()), &x).point else { panic!() };
        assert!(axis_from_origin(g, &v1, &FreeWord::letter(1)).contains(&z));
    }

    #[test]
    fn rho_examples() {
        let s = setup();
        let v1 = TreeVertex::base();
        let v2 = TreeVertex::root(1);
        let r = s.rho(&Domain::Hhat(v2.clone()), &Domain::Tree).unwrap();
        assert_eq!(r.point, Point::Vertex(v2.clone()));
        let r = s.rho(&Domain::Rline(v2.clone()), &Domain::Hhat(v1.clone())).unwrap();
        assert_eq!(r.point, Point::Apex(FreeWord::identity()));
        let g = &s.group;
        let w = tree::act(g, &g.parse_word("a1 a2").unwrap(), &v1);
        let p = s.p_set(&Domain::Hhat(w), &Domain::Hhat(v1)).unwrap();
        assert_eq!(p.point, Point::Apex(FreeWord::letter(1)));
    }

    #[test]
    fn distance_examples() {
        let s = setup();
        let g = &s.group;
        let v1 = TreeVertex::base();
        let h10 = g.parse_word("h1^10").unwrap();
        assert_eq!(s.d(&Domain::Hhat(v1.clone()), &GroupElement::identity(), &h10), 2.0);
        assert_eq!(s.domain_distance(&Domain::Rline(v1.clone()), &Point::R(3), &Point::R(-2)), 5.0);
        let x = g.parse_word("a1 b2").unwrap();
        assert_eq!(s.distance_formula(&x, &x, 10.0), 0.0);
        let t = g.parse_word("t1^12").unwrap();
        assert_eq!(s.distance_formula(&GroupElement::identity(), &t, 10.0), 12.0);
    }

    #[test]
    fn center_examples() {
        let s = setup();
        let g = &s.group;
        let x = g.parse_word("a1 a2 b1").unwrap();
        let c = s.center(&x, &x, &x);
        assert_eq!((c.point, c.achieved), (x, 0.0));
        let c = s.center(&GroupElement::identity(), &g.parse_word("t1^4").unwrap(), &g.parse_word("t1^-4").unwrap());
        assert!(c.point.is_identity());
    }

    #[test]
    fn realization_of_adjacent_quasilines() {
        let s = setup();
        let v1 = TreeVertex::base();
        let v2 = TreeVertex::root(1);
        let x =
            s.realize(&[(Domain::Rline(v1.clone()), Point::R(3)), (Domain::Rline(v2.clone()), Point::R(-7))]).unwrap();
        assert_eq!(s.r_coord(&v1, &x), 3);
        assert_eq!(s.r_coord(&v2, &x), -7);
    }
}
