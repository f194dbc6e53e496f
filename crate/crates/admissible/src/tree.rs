//! The Bass-Serre tree: vertices are cosets g·G_v, decided by normal forms.
//!
//! A vertex is stored as `(s₁…s_m, τ)` denoting `s₁⋯s_m · G_τ`, with the last
//! syllable of a different type than `τ`. The root edge joins `(∅, 0)` and
//! `(∅, 1)`.

use crate::amalgam::{Amalgam, FreeWordKey, GroupElement, Syllable};
use crate::freegroup::FreeWord;
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeVertex {
    pub syllables: Vec<Syllable>,
    pub vertex_type: u8,
}

impl TreeVertex {
    /// The base vertex v₁.
    pub fn base() -> Self {
        TreeVertex { syllables: Vec::new(), vertex_type: 0 }
    }

    pub fn root(vertex_type: u8) -> Self {
        TreeVertex { syllables: Vec::new(), vertex_type }
    }

    /// Canonical coset representative, with trivial remainder.
    pub fn rep(&self) -> GroupElement {
        GroupElement { syllables: self.syllables.clone(), remainder: (0, 0) }
    }

    pub fn is_root(&self) -> bool {
        self.syllables.is_empty()
    }

    /// The neighbour one step closer to the base, or the other root vertex.
    pub fn parent(&self) -> TreeVertex {
        match self.syllables.last() {
            None => TreeVertex::root(1 - self.vertex_type),
            Some(s) => {
                TreeVertex { syllables: self.syllables[..self.syllables.len() - 1].to_vec(), vertex_type: s.vertex }
            }
        }
    }

    /// The neighbour across the edge whose boundary line in this block has origin `c`.
    pub fn neighbor(&self, c: &FreeWord) -> TreeVertex {
        if c.is_empty() {
            return self.parent();
        }
        let mut syllables = self.syllables.clone();
        syllables.push(Syllable { vertex: self.vertex_type, word: FreeWordKey::from(c) });
        TreeVertex { syllables, vertex_type: 1 - self.vertex_type }
    }

    /// Geodesic from the base vertex v₁ to `self`, inclusive.
    pub fn root_path(&self) -> Vec<TreeVertex> {
        (0..self.root_len()).map(|i| self.root_entry(i)).collect()
    }

    fn offset(&self) -> usize {
        let first_type = self.syllables.first().map_or(self.vertex_type, |s| s.vertex);
        usize::from(first_type == 1)
    }

    /// Number of vertices on the root path.
    fn root_len(&self) -> usize {
        self.syllables.len() + 1 + self.offset()
    }

    fn entry_key(&self, idx: usize) -> (usize, u8) {
        let off = self.offset();
        if idx < off {
            return (0, 0);
        }
        let i = idx - off;
        let t = if i < self.syllables.len() { self.syllables[i].vertex } else { self.vertex_type };
        (i, t)
    }

    /// The vertex at position `idx` of the root path.
    fn root_entry(&self, idx: usize) -> TreeVertex {
        let (i, t) = self.entry_key(idx);
        TreeVertex { syllables: self.syllables[..i].to_vec(), vertex_type: t }
    }

    pub fn depth(&self) -> usize {
        self.root_len() - 1
    }

    pub fn serialize(&self, group: &Amalgam) -> String {
        format!("({}, v{})", group.to_word(&self.rep()), self.vertex_type + 1)
    }
}

/// `g·v_τ` where `g` is any element of the coset.
pub fn vertex_of(x: &GroupElement, vertex_type: u8) -> TreeVertex {
    let n = x.syllables.len();
    let keep = if n > 0 && x.syllables[n - 1].vertex == vertex_type { n - 1 } else { n };
    TreeVertex { syllables: x.syllables[..keep].to_vec(), vertex_type }
}

/// The index map π(g) = g·v₁. The orbit point sits on the plane of the base edge, so it lies in X_{π(g)}.
pub fn index_map(x: &GroupElement) -> TreeVertex {
    vertex_of(x, 0)
}

/// The block whose chart holds the last syllable: g·v_{type(last syllable)}, adjacent to or equal to π(g).
pub fn home_vertex(x: &GroupElement) -> TreeVertex {
    vertex_of(x, x.last_vertex())
}

/// Left action of the group on tree vertices.
pub fn act(group: &Amalgam, g: &GroupElement, v: &TreeVertex) -> TreeVertex {
    vertex_of(&group.multiply(g, &v.rep()), v.vertex_type)
}

/// Length of the common prefix of the root paths of `u` and `w`.
fn common_len(u: &TreeVertex, w: &TreeVertex) -> usize {
    let k = u.syllables.iter().zip(&w.syllables).take_while(|(a, b)| a == b).count();
    let n = u.root_len().min(w.root_len());
    (0..n)
        .take_while(|&p| {
            let (i, t) = u.entry_key(p);
            let (j, r) = w.entry_key(p);
            i == j && t == r && i <= k
        })
        .count()
}

pub fn distance(u: &TreeVertex, w: &TreeVertex) -> usize {
    u.root_len() + w.root_len() - 2 * common_len(u, w)
}

/// The vertex at position `p` of the geodesic from `u` to `w`.
fn geodesic_entry(u: &TreeVertex, w: &TreeVertex, c: usize, p: usize) -> TreeVertex {
    let up = u.root_len() - c + 1;
    if p < up {
        u.root_entry(u.root_len() - 1 - p)
    } else {
        w.root_entry(c + p - up)
    }
}

/// Vertex sequence of the unique reduced path from `u` to `w`.
pub fn geodesic(u: &TreeVertex, w: &TreeVertex) -> Vec<TreeVertex> {
    let c = common_len(u, w);
    let n = u.root_len() + w.root_len() - 2 * c;
    (0..=n).map(|p| geodesic_entry(u, w, c, p)).collect()
}

/// The last `k + 1` vertices (or fewer) of the geodesic from `u` to `w`, ending at `w`.
pub fn geodesic_tail(u: &TreeVertex, w: &TreeVertex, k: usize) -> Vec<TreeVertex> {
    let c = common_len(u, w);
    let n = u.root_len() + w.root_len() - 2 * c;
    (n.saturating_sub(k)..=n).map(|p| geodesic_entry(u, w, c, p)).collect()
}

/// The vertex lying on all three pairwise geodesics.
pub fn median(a: &TreeVertex, b: &TreeVertex, c: &TreeVertex) -> TreeVertex {
    let meets = [(a, common_len(a, b)), (a, common_len(a, c)), (b, common_len(b, c))];
    let (v, n) = meets.iter().max_by_key(|m| m.1).expect("three meets");
    v.root_entry(n - 1)
}

pub fn tree_geodesic(u: &TreeVertex, w: &TreeVertex) -> Vec<(TreeVertex, TreeVertex)> {
    let path = geodesic(u, w);
    path.windows(2).map(|p| (p[0].clone(), p[1].clone())).collect()
}

pub fn adjacent(u: &TreeVertex, w: &TreeVertex) -> bool {
    u != w && (u.parent() == *w || w.parent() == *u)
}

/// Origin `c` of the boundary line `c·A(h)` of the edge `[a, b]` in the chart of `a`.
pub fn edge_line_origin(a: &TreeVertex, b: &TreeVertex) -> FreeWord {
    debug_assert!(adjacent(a, b), "edge endpoints must be adjacent");
    if b.syllables.len() == a.syllables.len() + 1 {
        b.syllables.last().expect("child has a syllable").word.word()
    } else {
        FreeWord::identity()
    }
}

/// Prefix of a ray in the tree starting at the base vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeRay {
    pub vertices: Vec<TreeVertex>,
}

impl TreeRay {
    pub fn base(&self) -> &TreeVertex {
        &self.vertices[0]
    }

    /// Number of stabilized edges.
    pub fn depth(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn end(&self) -> &TreeVertex {
        self.vertices.last().expect("non-empty ray")
    }

    /// Index along the ray of the nearest-point projection of `v`.
    pub fn project_index(&self, v: &TreeVertex) -> usize {
        common_len(self.end(), v).min(self.vertices.len()).max(1) - 1
    }
}

/// Stabilized prefix of the tree geodesics from v₁ to π(wᵢ) over the final quarter.
pub fn limit_ray(positions: &[GroupElement]) -> Result<TreeRay, Error> {
    let n = positions.len();
    if n < 2 {
        return Err(Error::NotStabilized);
    }
    let start = (3 * (n - 1)) / 4;
    let vertices: Vec<TreeVertex> = positions[start..].iter().map(index_map).collect();
    let first = &vertices[0];
    let c = vertices[1..].iter().map(|v| common_len(first, v)).min().unwrap_or(first.root_len());
    if c < 2 {
        return Err(Error::NotStabilized);
    }
    Ok(TreeRay { vertices: (0..c).map(|i| first.root_entry(i)).collect() })
}
