//! The admissible group G = G₁ *_{ℤ²} G₂ with Gᵢ = F(aᵢ, bᵢ) × ⟨tᵢ⟩.
//!
//! Elements are kept in a normal form of alternating syllables, each a
//! shortlex transversal representative of Gᵥ/E, followed by a remainder
//! `hᵥʲ tᵥᵏ` in the edge group, written in the coordinates of the vertex of the
//! last syllable (vertex 0 when there are no syllables).

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::freegroup::{coset_decompose, is_proper_power, FreeWord};
use crate::Error;

pub type Matrix = [[i64; 2]; 2];

#[derive(Debug, Deserialize)]
struct RawVertex {
    rank: u32,
    #[serde(default)]
    fiber: Option<String>,
    h: String,
}

#[derive(Debug, Deserialize)]
struct RawEdge {
    #[serde(default = "default_endpoints")]
    endpoints: [usize; 2],
    gluing: Matrix,
}

fn default_endpoints() -> [usize; 2] {
    [0, 1]
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    max_radius: Option<usize>,
    #[serde(default)]
    commensurability_radius: Option<usize>,
    #[serde(default)]
    vertex: Vec<RawVertex>,
    #[serde(default)]
    edge: Vec<RawEdge>,
}

/// A two-vertex, one-edge graph of groups with vertex groups F₂ × ℤ.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphOfGroupsConfig {
    pub name: String,
    pub fiber: [String; 2],
    /// Edge element hᵥ at each vertex.
    pub h: [FreeWord; 2],
    /// Sends (h₁, t₁)-coordinates of the edge group to (h₂, t₂)-coordinates.
    pub gluing: Matrix,
    pub max_radius: usize,
    pub commensurability_radius: usize,
}

pub const CK2_TOML: &str = r#"name = "CK2"
max_radius = 6
commensurability_radius = 3

[[vertex]]
rank = 2
fiber = "t1"
h = "ab"

[[vertex]]
rank = 2
fiber = "t2"
h = "ab"

[[edge]]
endpoints = [0, 1]
gluing = [[0, 1], [1, 0]]
"#;

fn det(m: &Matrix) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

impl GraphOfGroupsConfig {
    pub fn ck2() -> Self {
        Self::from_toml(CK2_TOML).expect("shipped default is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, Error> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut violations = Vec::new();
        if raw.vertex.len() != 2 {
            violations.push(format!("expected exactly 2 vertices, found {}", raw.vertex.len()));
        }
        if raw.edge.len() != 1 {
            violations.push(format!("expected exactly 1 edge, found {}", raw.edge.len()));
        }
        if !violations.is_empty() {
            return Err(Error::Config(violations));
        }
        let mut h = [FreeWord::identity(), FreeWord::identity()];
        let mut fiber = [String::from("t1"), String::from("t2")];
        for (i, v) in raw.vertex.iter().enumerate() {
            if v.rank != 2 {
                violations.push(format!("vertex {i}: free rank {} unsupported (only 2)", v.rank));
            }
            if let Some(f) = &v.fiber {
                fiber[i] = f.clone();
            }
            match FreeWord::parse(&v.h) {
                Ok(w) => {
                    if w.len() != v.h.len() {
                        violations.push(format!("vertex {i}: h = {} is not freely reduced", v.h));
                    } else if w.is_empty() {
                        violations.push(format!("vertex {i}: h is trivial"));
                    } else if !w.is_cyclically_reduced() {
                        violations.push(format!("vertex {i}: h = {w} is not cyclically reduced"));
                    } else if is_proper_power(&w) {
                        violations.push(format!("vertex {i}: h = {w} is a proper power"));
                    }
                    h[i] = w;
                }
                Err(e) => violations.push(format!("vertex {i}: {e}")),
            }
        }
        let e = &raw.edge[0];
        let mut ends = e.endpoints;
        ends.sort_unstable();
        if ends != [0, 1] {
            violations.push(format!("edge endpoints {:?} must join vertices 0 and 1", e.endpoints));
        }
        let d = det(&e.gluing);
        if d != 1 && d != -1 {
            violations.push(format!("gluing matrix {:?} is not invertible over Z (det {d})", e.gluing));
        } else {
            // Fiber directions t₁ = (0,1) and M⁻¹(0,1) must span a finite-index sublattice.
            let inv = invert(&e.gluing);
            if inv[0][1] == 0 {
                violations.push("fiber directions of the two vertex groups are parallel in the edge group".into());
            }
        }
        let cfg = GraphOfGroupsConfig {
            name: raw.name.unwrap_or_else(|| "unnamed".into()),
            fiber,
            h,
            gluing: e.gluing,
            max_radius: raw.max_radius.unwrap_or(6),
            commensurability_radius: raw.commensurability_radius.unwrap_or(3),
        };
        if violations.is_empty() {
            violations.extend(cfg.commensurability_violations());
        }
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(violations))
        }
    }

    /// Distinct edges at a vertex carry non-commensurable cyclic subgroups,
    /// checked for conjugators up to the configured radius.
    fn commensurability_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, h) in self.h.iter().enumerate() {
            for c in words_up_to(self.commensurability_radius) {
                let (rep, _) = coset_decompose(&c, h);
                if rep.is_empty() {
                    continue;
                }
                for p in 1..=2 {
                    let conj = c.mul(&h.pow(p)).mul(&c.inverse());
                    if coset_decompose(&conj, h).0.is_empty() {
                        out.push(format!("vertex {i}: {c}·h^{p}·{c}⁻¹ lies in ⟨h⟩"));
                    }
                }
            }
        }
        out
    }

    pub fn canonical_text(&self) -> String {
        format!(
            "name={};h1={};h2={};t1={};t2={};gluing={:?}",
            self.name, self.h[0], self.h[1], self.fiber[0], self.fiber[1], self.gluing
        )
    }

    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn invert(m: &Matrix) -> Matrix {
    let d = det(m);
    [[m[1][1] * d, -m[0][1] * d], [-m[1][0] * d, m[0][0] * d]]
}

fn apply(m: &Matrix, (j, k): (i64, i64)) -> (i64, i64) {
    (m[0][0] * j + m[0][1] * k, m[1][0] * j + m[1][1] * k)
}

/// All reduced words of length at most `r`, in shortlex order.
pub fn words_up_to(r: usize) -> Vec<FreeWord> {
    let mut out = vec![FreeWord::identity()];
    let mut layer = vec![FreeWord::identity()];
    for _ in 0..r {
        let mut next = Vec::new();
        for w in &layer {
            for l in [1i8, -1, 2, -2] {
                if w.letters().last() == Some(&-l) {
                    continue;
                }
                next.push(w.mul(&FreeWord::letter(l)));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub vertex: u8,
    pub word: FreeWordKey,
}

/// Hashable, ordered wrapper used inside normal forms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeWordKey(pub Arc<[i8]>);

impl FreeWordKey {
    pub fn word(&self) -> FreeWord {
        crate::freegroup::reduce(&self.0)
    }
}

impl From<&FreeWord> for FreeWordKey {
    fn from(w: &FreeWord) -> Self {
        FreeWordKey(w.letters().into())
    }
}

impl fmt::Debug for FreeWordKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.word())
    }
}

/// An element of a vertex group: `w · tᵥᵐ` at vertex `vertex`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexElement {
    pub vertex: u8,
    pub word: FreeWord,
    pub fiber: i64,
}

/// Normal form of a group element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GroupElement {
    pub syllables: Vec<Syllable>,
    pub remainder: (i64, i64),
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement::default()
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty() && self.remainder == (0, 0)
    }

    pub fn syllable_length(&self) -> usize {
        self.syllables.len()
    }

    /// Vertex of the last syllable, or vertex 0 when there is none.
    pub fn last_vertex(&self) -> u8 {
        self.syllables.last().map_or(0, |s| s.vertex)
    }

    pub fn base_vertex(&self) -> u8 {
        self.syllables.first().map_or(0, |s| s.vertex)
    }
}

/// Symmetric generating set {a₁, b₁, a₂, b₂, t₁}±.
pub const GENERATOR_NAMES: [&str; 10] = ["a1", "A1", "b1", "B1", "a2", "A2", "b2", "B2", "t1", "T1"];

/// The group together with its configuration.
#[derive(Clone, Debug)]
pub struct Amalgam {
    pub cfg: GraphOfGroupsConfig,
    inv: Matrix,
}

impl Amalgam {
    pub fn new(cfg: GraphOfGroupsConfig) -> Self {
        let inv = invert(&cfg.gluing);
        Amalgam { cfg, inv }
    }

    pub fn ck2() -> Self {
        Self::new(GraphOfGroupsConfig::ck2())
    }

    pub fn h(&self, v: u8) -> &FreeWord {
        &self.cfg.h[v as usize]
    }

    /// Converts edge-group coordinates at vertex `v` to the other vertex.
    pub fn across(&self, v: u8, c: (i64, i64)) -> (i64, i64) {
        if v == 0 {
            apply(&self.cfg.gluing, c)
        } else {
            apply(&self.inv, c)
        }
    }

    /// Edge-group coordinates of `x`'s remainder read at vertex `v`.
    fn remainder_at(&self, x: &GroupElement, v: u8) -> (i64, i64) {
        if x.last_vertex() == v {
            x.remainder
        } else {
            self.across(x.last_vertex(), x.remainder)
        }
    }

    fn store_remainder(&self, x: &mut GroupElement, v: u8, c: (i64, i64)) {
        x.remainder = if x.last_vertex() == v { c } else { self.across(v, c) };
    }

    /// Right multiplication by a vertex-group element, in place.
    pub fn push(&self, x: &mut GroupElement, g: &VertexElement) {
        let v = g.vertex;
        let h = self.h(v);
        let merge = x.syllables.last().is_some_and(|s| s.vertex == v);
        let (j, k) = self.remainder_at(x, v);
        let prefix = if merge { x.syllables.pop().expect("checked").word.word() } else { FreeWord::identity() };
        let p = prefix.mul(&h.pow(j)).mul(&g.word);
        let (rep, j2) = coset_decompose(&p, h);
        let c = (j2, k + g.fiber);
        if rep.is_empty() {
            self.store_remainder(x, v, c);
        } else {
            x.syllables.push(Syllable { vertex: v, word: FreeWordKey::from(&rep) });
            x.remainder = c;
        }
    }

    /// Decomposition of an element into vertex-group pieces.
    pub fn pieces(&self, x: &GroupElement) -> Vec<VertexElement> {
        let mut out: Vec<VertexElement> =
            x.syllables.iter().map(|s| VertexElement { vertex: s.vertex, word: s.word.word(), fiber: 0 }).collect();
        let v = x.last_vertex();
        let (j, k) = x.remainder;
        if (j, k) != (0, 0) {
            out.push(VertexElement { vertex: v, word: self.h(v).pow(j), fiber: k });
        }
        out
    }

    pub fn from_vertex_element(&self, g: &VertexElement) -> GroupElement {
        let mut x = GroupElement::identity();
        self.push(&mut x, g);
        x
    }

    pub fn multiply(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let mut out = x.clone();
        for p in self.pieces(y) {
            self.push(&mut out, &p);
        }
        out
    }

    pub fn invert(&self, x: &GroupElement) -> GroupElement {
        let mut out = GroupElement::identity();
        for p in self.pieces(x).iter().rev() {
            self.push(&mut out, &VertexElement { vertex: p.vertex, word: p.word.inverse(), fiber: -p.fiber });
        }
        out
    }

    pub fn equals(&self, x: &GroupElement, y: &GroupElement) -> bool {
        x == y
    }

    /// `x⁻¹ y`.
    pub fn between(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        self.multiply(&self.invert(x), y)
    }

    pub fn generator(&self, name: &str) -> Result<VertexElement, Error> {
        let mut chars = name.chars();
        let head = chars.next().ok_or_else(|| Error::Parse("empty generator".into()))?;
        let idx: String = chars.collect();
        let vertex = match idx.as_str() {
            "1" | "₁" => 0u8,
            "2" | "₂" => 1u8,
            other => return Err(Error::Parse(format!("unknown generator index '{other}' in '{name}'"))),
        };
        let sign = if head.is_uppercase() { -1i64 } else { 1 };
        let el = match head.to_ascii_lowercase() {
            'a' => VertexElement { vertex, word: FreeWord::letter(sign as i8), fiber: 0 },
            'b' => VertexElement { vertex, word: FreeWord::letter(2 * sign as i8), fiber: 0 },
            't' => VertexElement { vertex, word: FreeWord::identity(), fiber: sign },
            'h' => VertexElement { vertex, word: self.h(vertex).pow(sign), fiber: 0 },
            _ => return Err(Error::Parse(format!("unknown generator symbol '{name}'"))),
        };
        Ok(el)
    }

    pub fn generators(&self) -> Vec<GroupElement> {
        GENERATOR_NAMES.iter().map(|n| self.from_vertex_element(&self.generator(n).expect("fixed names"))).collect()
    }

    /// Parses a product of generator tokens such as `a1 t2`, `A1·b2^3`, `t₁ · h₂⁻¹`.
    pub fn parse_word(&self, text: &str) -> Result<GroupElement, Error> {
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        let mut x = GroupElement::identity();
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() || matches!(c, '·' | '*' | '.') {
                i += 1;
                continue;
            }
            if !matches!(c.to_ascii_lowercase(), 'a' | 'b' | 't' | 'h') {
                return Err(Error::Parse(format!("unknown generator symbol '{c}'")));
            }
            let d = *chars.get(i + 1).ok_or_else(|| Error::Parse(format!("missing index after '{c}'")))?;
            let g = self.generator(&format!("{c}{d}"))?;
            i += 2;
            let mut exp: i64 = 1;
            if chars.get(i) == Some(&'^') {
                i += 1;
                let start = i;
                while i < chars.len() && (chars[i] == '-' || chars[i].is_ascii_digit()) {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                exp = s.parse().map_err(|_| Error::Parse(format!("bad exponent '{s}'")))?;
            } else if chars.get(i) == Some(&'⁻') && chars.get(i + 1) == Some(&'¹') {
                i += 2;
                exp = -1;
            }
            let piece =
                if exp < 0 { VertexElement { vertex: g.vertex, word: g.word.inverse(), fiber: -g.fiber } } else { g };
            for _ in 0..exp.unsigned_abs() {
                self.push(&mut x, &piece);
            }
        }
        Ok(x)
    }

    /// Serializes an element as a generator word accepted by [`Amalgam::parse_word`].
    pub fn to_word(&self, x: &GroupElement) -> String {
        let mut toks: Vec<String> = Vec::new();
        for p in self.pieces(x) {
            let idx = p.vertex + 1;
            for &l in p.word.letters() {
                let s = match l {
                    1 => "a",
                    -1 => "A",
                    2 => "b",
                    _ => "B",
                };
                toks.push(format!("{s}{idx}"));
            }
            if p.fiber != 0 {
                toks.push(format!("t{idx}^{}", p.fiber));
            }
        }
        toks.join(" ")
    }

    /// Product of `n` i.i.d. draws from a finitely supported measure.
    pub fn random_word(&self, n: usize, seed: u64, support: &[(GroupElement, f64)]) -> Result<GroupElement, Error> {
        let weights = WeightedIndex::new(support.iter().map(|(_, p)| *p)).map_err(|e| Error::Measure(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = GroupElement::identity();
        for _ in 0..n {
            x = self.multiply(&x, &support[weights.sample(&mut rng)].0);
        }
        Ok(x)
    }

    pub fn ball(&self, radius: usize) -> Result<Ball, Error> {
        Ball::build(self, radius)
    }
}

/// Word-metric ball with respect to {a₁, b₁, a₂, b₂, t₁}±.
#[derive(Clone, Debug)]
pub struct Ball {
    pub radius: usize,
    pub members: Vec<GroupElement>,
    pub lengths: Vec<u8>,
    pub generators: Vec<String>,
    index: HashMap<GroupElement, u32>,
}

const CACHE_MAGIC: &[u8; 8] = b"ADMBALL1";

impl Ball {
    fn build(group: &Amalgam, radius: usize) -> Result<Ball, Error> {
        if radius > group.cfg.max_radius {
            return Err(Error::Cap(format!(
                "ball radius {radius} exceeds configured maximum {}",
                group.cfg.max_radius
            )));
        }
        let gens: Vec<VertexElement> =
            GENERATOR_NAMES.iter().map(|n| group.generator(n).expect("fixed names")).collect();
        let mut members = vec![GroupElement::identity()];
        let mut lengths = vec![0u8];
        let mut index = HashMap::new();
        index.insert(GroupElement::identity(), 0u32);
        let mut frontier = 0..1;
        for r in 1..=radius {
            let start = members.len();
            for i in frontier.clone() {
                for g in &gens {
                    let mut y = members[i].clone();
                    group.push(&mut y, g);
                    if !index.contains_key(&y) {
                        index.insert(y.clone(), members.len() as u32);
                        members.push(y);
                        lengths.push(r as u8);
                    }
                }
            }
            frontier = start..members.len();
        }
        Ok(Ball {
            radius,
            members,
            lengths,
            generators: GENERATOR_NAMES.iter().map(|s| s.to_string()).collect(),
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn word_length(&self, x: &GroupElement) -> Option<u8> {
        self.index.get(x).map(|&i| self.lengths[i as usize])
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.index.contains_key(x)
    }

    /// Number of elements of each exact word length.
    pub fn sphere_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.radius + 1];
        for &l in &self.lengths {
            out[l as usize] += 1;
        }
        out
    }

    /// Members of word length at most `r`.
    pub fn within(&self, r: usize) -> impl Iterator<Item = (&GroupElement, u8)> {
        self.members.iter().zip(self.lengths.iter().copied()).filter(move |(_, l)| (*l as usize) <= r)
    }

    pub fn write_cache<W: Write>(&self, cfg_hash: &str, mut out: W) -> Result<(), Error> {
        out.write_all(CACHE_MAGIC)?;
        write_bytes(&mut out, cfg_hash.as_bytes())?;
        write_bytes(&mut out, self.generators.join(",").as_bytes())?;
        out.write_all(&(self.radius as u32).to_le_bytes())?;
        out.write_all(&(self.members.len() as u64).to_le_bytes())?;
        for (x, l) in self.members.iter().zip(&self.lengths) {
            out.write_all(&[*l, x.syllables.len() as u8])?;
            for s in &x.syllables {
                out.write_all(&[s.vertex, s.word.0.len() as u8])?;
                out.write_all(&s.word.0.iter().map(|&b| b as u8).collect::<Vec<_>>())?;
            }
            out.write_all(&x.remainder.0.to_le_bytes())?;
            out.write_all(&x.remainder.1.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(cfg_hash: &str, mut input: R) -> Result<Ball, Error> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Parse("not a ball cache (bad magic or version)".into()));
        }
        let hash = String::from_utf8_lossy(&read_bytes(&mut input)?).to_string();
        if hash != cfg_hash {
            return Err(Error::Parse(format!("ball cache belongs to config {hash}, expected {cfg_hash}")));
        }
        let gens = String::from_utf8_lossy(&read_bytes(&mut input)?).to_string();
        if gens != GENERATOR_NAMES.join(",") {
            return Err(Error::Parse("ball cache uses a different generating set".into()));
        }
        let radius = read_u32(&mut input)? as usize;
        let n = read_u64(&mut input)? as usize;
        let mut members = Vec::with_capacity(n);
        let mut lengths = Vec::with_capacity(n);
        let mut index = HashMap::with_capacity(n);
        for i in 0..n {
            let mut hdr = [0u8; 2];
            input.read_exact(&mut hdr)?;
            let mut syllables = Vec::with_capacity(hdr[1] as usize);
            for _ in 0..hdr[1] {
                let mut sh = [0u8; 2];
                input.read_exact(&mut sh)?;
                let mut buf = vec![0u8; sh[1] as usize];
                input.read_exact(&mut buf)?;
                syllables.push(Syllable {
                    vertex: sh[0],
                    word: FreeWordKey(buf.iter().map(|&b| b as i8).collect::<Vec<i8>>().into()),
                });
            }
            let j = read_u64(&mut input)? as i64;
            let k = read_u64(&mut input)? as i64;
            let x = GroupElement { syllables, remainder: (j, k) };
            index.insert(x.clone(), i as u32);
            members.push(x);
            lengths.push(hdr[0]);
        }
        Ok(Ball {
            radius,
            members,
            lengths,
            generators: GENERATOR_NAMES.iter().map(|s| s.to_string()).collect(),
            index,
        })
    }
}

fn write_bytes<W: Write>(out: &mut W, b: &[u8]) -> Result<(), Error> {
    out.write_all(&(b.len() as u32).to_le_bytes())?;
    out.write_all(b)?;
    Ok(())
}

fn read_bytes<R: Read>(input: &mut R) -> Result<Vec<u8>, Error> {
    let n = read_u32(input)? as usize;
    let mut buf = vec![0u8; n];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32, Error> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64, Error> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        let g = Amalgam::ck2();
        assert!(g.parse_word("t₁ · h₂⁻¹").unwrap().is_identity());
        let x = g.parse_word("a1 t2").unwrap();
        assert_eq!(x.syllables.len(), 1);
        assert_eq!(x.syllables[0].word.word().to_string(), "a");
        assert_eq!(x.remainder, (1, 0));
        let y = g.parse_word("a1 a2 a1").unwrap();
        assert_eq!(y.syllables.len(), 3);
        assert_eq!(y.remainder, (0, 0));
        assert!(g.parse_word("c1").is_err());
    }

    #[test]
    fn small_balls() {
        let g = Amalgam::ck2();
        assert_eq!(g.ball(0).unwrap().len(), 1);
        assert_eq!(g.ball(1).unwrap().len(), 11);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_power = CK2_TOML.replacen("h = \"ab\"", "h = \"abab\"", 1);
        assert!(matches!(GraphOfGroupsConfig::from_toml(&bad_power), Err(Error::Config(_))));
        let singular = CK2_TOML.replace("[[0, 1], [1, 0]]", "[[1, 1], [1, 1]]");
        assert!(matches!(GraphOfGroupsConfig::from_toml(&singular), Err(Error::Config(_))));
    }
}
