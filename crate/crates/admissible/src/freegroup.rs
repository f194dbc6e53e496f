//! Exact geometry of the rank-2 free group acting on its Cayley tree.
//!
//! Letters are encoded as `1 = a`, `-1 = A`, `2 = b`, `-2 = B`, where capitals
//! denote inverses. Words are always freely reduced.

use std::cmp::Ordering;
use std::fmt;

use crate::Error;

pub type Letter = i8;

/// A freely reduced word in F(a, b).
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct FreeWord(Vec<Letter>);

fn letter_rank(l: Letter) -> u8 {
    ((l.unsigned_abs() - 1) * 2) + u8::from(l < 0)
}

fn letter_char(l: Letter) -> char {
    match l {
        1 => 'a',
        -1 => 'A',
        2 => 'b',
        -2 => 'B',
        _ => unreachable!("invalid letter {l}"),
    }
}

/// Free reduction of an arbitrary letter sequence.
pub fn reduce(raw: &[Letter]) -> FreeWord {
    let mut out: Vec<Letter> = Vec::with_capacity(raw.len());
    for &l in raw {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    FreeWord(out)
}

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        assert!(matches!(l, 1 | -1 | 2 | -2), "invalid letter {l}");
        FreeWord(vec![l])
    }

    /// Parses a string over `{a, A, b, B}`; the empty string is the identity.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut raw = Vec::with_capacity(text.len());
        for c in text.chars() {
            raw.push(match c {
                'a' => 1,
                'A' => -1,
                'b' => 2,
                'B' => -2,
                other => return Err(Error::Parse(format!("unknown free-group letter '{other}'"))),
            });
        }
        Ok(reduce(&raw))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        FreeWord(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        let k = self.0.iter().rev().zip(other.0.iter()).take_while(|(a, b)| **a == -**b).count();
        let mut v = Vec::with_capacity(self.0.len() + other.0.len() - 2 * k);
        v.extend_from_slice(&self.0[..self.0.len() - k]);
        v.extend_from_slice(&other.0[k..]);
        FreeWord(v)
    }

    pub fn pow(&self, k: i64) -> FreeWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = FreeWord::identity();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    pub fn prefix(&self, n: usize) -> FreeWord {
        FreeWord(self.0[..n].to_vec())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.0.len() < 2 || self.0[0] != -self.0[self.0.len() - 1]
    }

    /// Shortlex order with letters ranked `a < A < b < B`.
    pub fn shortlex_cmp(&self, other: &FreeWord) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| {
            for (x, y) in self.0.iter().zip(other.0.iter()) {
                let o = letter_rank(*x).cmp(&letter_rank(*y));
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        })
    }

    /// Length of the longest common prefix.
    pub fn common_prefix_len(&self, other: &FreeWord) -> usize {
        self.0.iter().zip(other.0.iter()).take_while(|(a, b)| a == b).count()
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            write!(f, "{}", letter_char(l))?;
        }
        Ok(())
    }
}

impl fmt::Debug for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FreeWord(\"{self}\")")
    }
}

pub fn tree_distance(u: &FreeWord, v: &FreeWord) -> u64 {
    let k = u.common_prefix_len(v);
    (u.len() + v.len() - 2 * k) as u64
}

/// The unique vertex lying on all three pairwise geodesics.
pub fn median(x: &FreeWord, y: &FreeWord, z: &FreeWord) -> FreeWord {
    let xy = x.common_prefix_len(y);
    let yz = y.common_prefix_len(z);
    let xz = x.common_prefix_len(z);
    if xy >= yz && xy >= xz {
        x.prefix(xy)
    } else if yz >= xz {
        y.prefix(yz)
    } else {
        x.prefix(xz)
    }
}

pub fn is_proper_power(w: &FreeWord) -> bool {
    let n = w.len();
    (1..n).filter(|d| n.is_multiple_of(*d)).any(|d| (d..n).all(|i| w.0[i] == w.0[i - d]))
}

/// Decomposes `w = rep · h^j` with `rep` the shortlex-minimal element of `w⟨h⟩`.
pub fn coset_decompose(w: &FreeWord, h: &FreeWord) -> (FreeWord, i64) {
    let span = (2 * w.len() / h.len().max(1)) as i64 + 2;
    let mut best: Option<(FreeWord, i64)> = None;
    for k in -span..=span {
        let cand = w.mul(&h.pow(k));
        let better = match &best {
            None => true,
            Some((b, _)) => cand.shortlex_cmp(b) == Ordering::Less,
        };
        if better {
            best = Some((cand, k));
        }
    }
    let (rep, k) = best.expect("non-empty search range");
    (rep, -k)
}

pub fn coset_rep(w: &FreeWord, h: &FreeWord) -> FreeWord {
    coset_decompose(w, h).0
}

/// The axis `g·A(h)` of `g h g⁻¹`, where `A(h)` passes through the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Axis {
    pub core: FreeWord,
    pub translate: FreeWord,
}

impl Axis {
    pub fn new(core: FreeWord, translate: FreeWord) -> Self {
        debug_assert!(core.is_cyclically_reduced() && !core.is_empty());
        Axis { core, translate }
    }

    fn ray_letter(&self, i: usize, forward: bool) -> Letter {
        let n = self.core.len();
        if forward {
            self.core.0[i % n]
        } else {
            -self.core.0[n - 1 - (i % n)]
        }
    }

    /// Signed index along `A(h)` of the longest prefix of `w` on the axis.
    fn foot_in_core(&self, w: &FreeWord) -> i64 {
        let fwd = w.0.iter().enumerate().take_while(|(i, l)| **l == self.ray_letter(*i, true)).count();
        if fwd > 0 {
            return fwd as i64;
        }
        let bwd = w.0.iter().enumerate().take_while(|(i, l)| **l == self.ray_letter(*i, false)).count();
        -(bwd as i64)
    }

    /// The axis vertex with signed index `i` (index 0 is `translate`).
    pub fn point(&self, i: i64) -> FreeWord {
        let raw: Vec<Letter> = (0..i.unsigned_abs() as usize).map(|k| self.ray_letter(k, i >= 0)).collect();
        self.translate.mul(&FreeWord(raw))
    }

    /// Nearest axis vertex to `w`, its signed index, and the distance.
    pub fn project_indexed(&self, w: &FreeWord) -> (FreeWord, i64, u64) {
        let local = self.translate.inverse().mul(w);
        let i = self.foot_in_core(&local);
        let d = local.len() as u64 - i.unsigned_abs();
        (self.point(i), i, d)
    }

    pub fn index_of(&self, w: &FreeWord) -> Option<i64> {
        let (_, i, d) = self.project_indexed(w);
        (d == 0).then_some(i)
    }

    pub fn contains(&self, w: &FreeWord) -> bool {
        self.index_of(w).is_some()
    }

    /// Lattice position `⌊index / |h|⌋` of an index along the axis.
    pub fn lattice(&self, index: i64) -> i64 {
        index.div_euclid(self.core.len() as i64)
    }

    pub fn same_line(&self, other: &Axis) -> bool {
        self.core == other.core && coset_rep(&self.translate, &self.core) == coset_rep(&other.translate, &other.core)
    }
}

pub fn project_to_axis(w: &FreeWord, ax: &Axis) -> (FreeWord, u64) {
    let (p, _, d) = ax.project_indexed(w);
    (p, d)
}

/// Index interval on `onto` of the nearest-point projection of the line `from`.
///
/// Disjoint lines give a single index (the bridge endpoint); overlapping lines
/// give the overlap. Returns `None` when the two lines coincide.
pub fn line_projection(from: &Axis, onto: &Axis) -> Option<(i64, i64)> {
    if from.same_line(onto) {
        return None;
    }
    let (p, ip, _) = onto.project_indexed(&from.translate);
    if !from.contains(&p) {
        return Some((ip, ip));
    }
    let cap = 4 * (from.core.len() + onto.core.len()) as i64 + 8;
    let mut lo = ip;
    while from.contains(&onto.point(lo - 1)) {
        lo -= 1;
        if ip - lo > cap {
            return None;
        }
    }
    let mut hi = ip;
    while from.contains(&onto.point(hi + 1)) {
        hi += 1;
        if hi - ip > cap {
            return None;
        }
    }
    Some((lo, hi))
}

/// Shortest geodesic between two distinct lines, as endpoint indices and length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bridge {
    pub on_first: i64,
    pub on_second: i64,
    pub length: u64,
}

pub fn bridge(first: &Axis, second: &Axis) -> Option<Bridge> {
    let (lo2, _) = line_projection(first, second)?;
    let (lo1, _) = line_projection(second, first)?;
    let p2 = second.point(lo2);
    let (_, d) = project_to_axis(&p2, first);
    Some(Bridge { on_first: lo1, on_second: lo2, length: d })
}
