//! Blocks B_v = H_v × ℤ, boundary lines, boundary planes and strips.
//!
//! Block coordinates at a tree vertex `v` are taken relative to its canonical
//! representative: the point `(w, m)` is the group element `rep(v)·w·t_vᵐ`.

use crate::amalgam::{words_up_to, Amalgam, GroupElement, VertexElement};
use crate::freegroup::{bridge, coset_rep, line_projection, tree_distance, Axis, Bridge, FreeWord};
use crate::tree::{edge_line_origin, home_vertex, TreeVertex};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockPoint {
    pub vertex: TreeVertex,
    pub base: FreeWord,
    pub fiber: i64,
}

/// Coordinates of `x` in the block of its index vertex.
pub fn locate(group: &Amalgam, x: &GroupElement) -> BlockPoint {
    let vertex = home_vertex(x);
    let t = x.last_vertex();
    let (j, m) = x.remainder;
    let h = group.h(t).pow(j);
    let base = match x.syllables.last() {
        Some(s) => s.word.word().mul(&h),
        None => h,
    };
    BlockPoint { vertex, base, fiber: m }
}

/// The group element with the given block coordinates.
pub fn embed(group: &Amalgam, p: &BlockPoint) -> GroupElement {
    let mut x = p.vertex.rep();
    group.push(&mut x, &VertexElement { vertex: p.vertex.vertex_type, word: p.base.clone(), fiber: p.fiber });
    x
}

/// Coordinates of `x` in the chart of `v`, when `x` lies in `rep(v)·G_v`.
pub fn chart_coords(group: &Amalgam, v: &TreeVertex, x: &GroupElement) -> Option<(FreeWord, i64)> {
    let y = group.between(&v.rep(), x);
    let t = v.vertex_type;
    match y.syllables.len() {
        0 => {
            let (j, k) = if t == 0 { y.remainder } else { group.across(0, y.remainder) };
            Some((group.h(t).pow(j), k))
        }
        1 if y.syllables[0].vertex == t => {
            Some((y.syllables[0].word.word().mul(&group.h(t).pow(y.remainder.0)), y.remainder.1))
        }
        _ => None,
    }
}

/// The boundary line ℓ_e = F_e ∩ H_v of the edge from `owner` to `neighbor`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryLine {
    pub owner: TreeVertex,
    pub neighbor: TreeVertex,
    pub axis: Axis,
}

pub fn line_axis(group: &Amalgam, owner: &TreeVertex, neighbor: &TreeVertex) -> Axis {
    Axis::new(group.h(owner.vertex_type).clone(), edge_line_origin(owner, neighbor))
}

pub fn axis_from_origin(group: &Amalgam, owner: &TreeVertex, origin: &FreeWord) -> Axis {
    Axis::new(group.h(owner.vertex_type).clone(), origin.clone())
}

pub fn boundary_line(group: &Amalgam, owner: &TreeVertex, neighbor: &TreeVertex) -> BoundaryLine {
    BoundaryLine { owner: owner.clone(), neighbor: neighbor.clone(), axis: line_axis(group, owner, neighbor) }
}

/// Canonical origins of the boundary lines through coset representatives of length ≤ `radius`.
pub fn line_origins(group: &Amalgam, vertex_type: u8, radius: usize) -> Vec<FreeWord> {
    let h = group.h(vertex_type);
    let mut reps: Vec<FreeWord> = words_up_to(radius).iter().map(|w| coset_rep(w, h)).collect();
    reps.sort_by(|a, b| a.shortlex_cmp(b));
    reps.dedup();
    reps
}

pub fn boundary_lines(group: &Amalgam, v: &TreeVertex, radius: usize) -> Vec<BoundaryLine> {
    line_origins(group, v.vertex_type, radius)
        .into_iter()
        .map(|c| BoundaryLine { owner: v.clone(), neighbor: v.neighbor(&c), axis: axis_from_origin(group, v, &c) })
        .collect()
}

/// Largest distance from a vertex of the H_v-ball to the nearest boundary line.
pub fn covering_constant(group: &Amalgam, vertex_type: u8, radius: usize) -> u64 {
    let v = TreeVertex::root(vertex_type);
    let lines = boundary_lines(group, &v, radius);
    words_up_to(radius)
        .iter()
        .map(|w| lines.iter().map(|l| l.axis.project_indexed(w).2).min().unwrap_or(u64::MAX))
        .max()
        .unwrap_or(0)
}

/// Converts plane coordinates `(j, k)` in the chart of `a` to the chart of its neighbour.
pub fn chart_change(group: &Amalgam, a: &TreeVertex, c: (i64, i64)) -> (i64, i64) {
    group.across(a.vertex_type, c)
}

/// The point of the plane F_[a,b] with coordinates `(j, k)` in the chart of `a`.
pub fn plane_point(group: &Amalgam, a: &TreeVertex, b: &TreeVertex, (j, k): (i64, i64)) -> GroupElement {
    let c = edge_line_origin(a, b);
    let w = c.mul(&group.h(a.vertex_type).pow(j));
    embed(group, &BlockPoint { vertex: a.clone(), base: w, fiber: k })
}

/// Strip 𝒮_{e,e'} = γ × ℝ in B_owner, with γ the bridge between ℓ_e and ℓ_e'.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strip {
    pub owner: TreeVertex,
    pub first: BoundaryLine,
    pub second: BoundaryLine,
    pub bridge: Bridge,
    pub gamma: Vec<FreeWord>,
}

pub fn strip(group: &Amalgam, owner: &TreeVertex, n1: &TreeVertex, n2: &TreeVertex) -> Result<Strip, Error> {
    if n1 == n2 {
        return Err(Error::Degenerate("strip needs two distinct edges".into()));
    }
    let first = boundary_line(group, owner, n1);
    let second = boundary_line(group, owner, n2);
    let br =
        bridge(&first.axis, &second.axis).ok_or_else(|| Error::Degenerate("edges share a boundary line".into()))?;
    let p = first.axis.point(br.on_first);
    let q = second.axis.point(br.on_second);
    let gamma = segment(&p, &q);
    Ok(Strip { owner: owner.clone(), first, second, bridge: br, gamma })
}

/// Vertices of the tree geodesic from `p` to `q`.
pub fn segment(p: &FreeWord, q: &FreeWord) -> Vec<FreeWord> {
    let k = p.common_prefix_len(q);
    let mut out: Vec<FreeWord> = (k..=p.len()).rev().map(|i| p.prefix(i)).collect();
    out.extend((k + 1..=q.len()).map(|i| q.prefix(i)));
    out
}

/// The line 𝒮 ∩ F_e: a fixed lattice position on ℓ_e crossed with the fiber of the owner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneLine {
    pub owner: TreeVertex,
    pub neighbor: TreeVertex,
    /// Lattice position along ℓ_e in the owner chart.
    pub position: i64,
    /// Neighbour-chart coordinates of the point at owner fiber 0.
    pub neighbor_at_zero: (i64, i64),
    /// Neighbour-chart image of one unit of owner fiber.
    pub neighbor_direction: (i64, i64),
}

pub fn strip_plane_intersection(group: &Amalgam, s: &Strip, e: &TreeVertex) -> Result<PlaneLine, Error> {
    let (line, index) = if *e == s.first.neighbor {
        (&s.first, s.bridge.on_first)
    } else if *e == s.second.neighbor {
        (&s.second, s.bridge.on_second)
    } else {
        return Err(Error::Degenerate("edge is not a side of the strip".into()));
    };
    let position = line.axis.lattice(index);
    Ok(PlaneLine {
        owner: s.owner.clone(),
        neighbor: e.clone(),
        position,
        neighbor_at_zero: chart_change(group, &s.owner, (position, 0)),
        neighbor_direction: chart_change(group, &s.owner, (0, 1)),
    })
}

/// Largest distance from a vertex of a geodesic between two points of ℓ ∪ γ ∪ ℓ' to that union.
pub fn strip_quasiconvexity(s: &Strip, window: i64) -> u64 {
    let mut pts: Vec<FreeWord> = s.gamma.clone();
    for i in -window..=window {
        pts.push(s.first.axis.point(s.bridge.on_first + i));
        pts.push(s.second.axis.point(s.bridge.on_second + i));
    }
    let dist_to_union = |z: &FreeWord| -> u64 {
        let d1 = s.first.axis.project_indexed(z).2;
        let d2 = s.second.axis.project_indexed(z).2;
        let dg = s.gamma.iter().map(|g| tree_distance(g, z)).min().unwrap_or(u64::MAX);
        d1.min(d2).min(dg)
    };
    let mut worst = 0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            for z in segment(p, q) {
                worst = worst.max(dist_to_union(&z));
            }
        }
    }
    worst
}

/// Diameter of N_r(ℓ) ∩ N_r(ℓ') for two distinct lines of one block.
pub fn neighborhood_overlap(a: &Axis, b: &Axis, r: u64) -> Option<u64> {
    let (lo, hi) = line_projection(a, b)?;
    let ball = words_up_to(r as usize);
    let margin = 2 * r as i64 + 2 * b.core.len() as i64 + 2;
    let mut pts: Vec<FreeWord> = Vec::new();
    for i in lo - margin..=hi + margin {
        let p = b.point(i);
        for u in &ball {
            let z = p.mul(u);
            if b.project_indexed(&z).2 <= r && a.project_indexed(&z).2 <= r {
                pts.push(z);
            }
        }
    }
    let mut diam = 0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            diam = diam.max(tree_distance(p, q));
        }
    }
    Some(diam)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_examples() {
        let g = Amalgam::ck2();
        let p = locate(&g, &GroupElement::identity());
        assert_eq!(p, BlockPoint { vertex: TreeVertex::base(), base: FreeWord::identity(), fiber: 0 });
        let p = locate(&g, &g.parse_word("t1^3").unwrap());
        assert_eq!((p.vertex, p.base, p.fiber), (TreeVertex::base(), FreeWord::identity(), 3));
        let x = g.parse_word("a1 h1^2 t1").unwrap();
        let p = locate(&g, &x);
        assert_eq!(p.base, FreeWord::parse("aabab").unwrap());
        assert_eq!(p.fiber, 1);
        assert_eq!(embed(&g, &p), x);
    }

    #[test]
    fn line_examples() {
        let g = Amalgam::ck2();
        let v = TreeVertex::base();
        let lines = boundary_lines(&g, &v, 0);
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].axis.translate, FreeWord::identity());
        assert!(boundary_lines(&g, &v, 2).len() > 1);
        assert_eq!(covering_constant(&g, 0, 4), 0);
    }

    #[test]
    fn strip_examples() {
        let g = Amalgam::ck2();
        let v = TreeVertex::base();
        let n0 = v.neighbor(&FreeWord::identity());
        assert!(strip(&g, &v, &n0, &n0).is_err());
        let nb = v.neighbor(&FreeWord::parse("BB").unwrap());
        let s = strip(&g, &v, &n0, &nb).unwrap();
        assert_eq!(s.bridge.length, 1);
        assert_eq!(s.gamma.len(), 2);
        let pl = strip_plane_intersection(&g, &s, &n0).unwrap();
        assert_eq!(pl.position, -1);
        assert_eq!(pl.neighbor_at_zero, (0, -1));
        assert_eq!(strip_quasiconvexity(&s, 4), 0);
    }
}
