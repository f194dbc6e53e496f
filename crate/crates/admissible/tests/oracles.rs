//! Independent brute-force oracles against the fast implementations.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use admissible::amalgam::{words_up_to, Amalgam, GroupElement};
use admissible::freegroup::{self, coset_rep, FreeWord, Letter};
use admissible::hhs::{Domain, Hhs};
use admissible::tree::{self, adjacent, index_map, TreeVertex};
use proptest::prelude::*;

fn letters() -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(prop_oneof![Just(1i8), Just(-1), Just(2), Just(-2)], 0..14)
}

fn naive_reduce(raw: &[Letter]) -> Vec<Letter> {
    let mut w = raw.to_vec();
    loop {
        let hit = w.windows(2).position(|p| p[0] == -p[1]);
        match hit {
            Some(i) => {
                w.drain(i..i + 2);
            }
            None => return w,
        }
    }
}

fn element(g: &Amalgam, idx: &[usize]) -> GroupElement {
    let gens = g.generators();
    idx.iter().fold(GroupElement::identity(), |acc, &i| g.multiply(&acc, &gens[i]))
}

fn gen_word() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..10, 0..12)
}

/// Edge-by-edge BFS in the Cayley tree of F₂ restricted to a ball.
fn bfs_distance(x: &FreeWord, y: &FreeWord) -> u64 {
    let mut dist: HashMap<FreeWord, u64> = HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    dist.insert(x.clone(), 0);
    queue.push_back(x.clone());
    while let Some(p) = queue.pop_front() {
        if p == *y {
            return dist[&p];
        }
        for l in [1i8, -1, 2, -2] {
            let q = p.mul(&FreeWord::letter(l));
            if q.len() <= x.len().max(y.len()) && !dist.contains_key(&q) {
                dist.insert(q.clone(), dist[&p] + 1);
                queue.push_back(q);
            }
        }
    }
    unreachable!("tree is connected")
}

/// Dijkstra in the coned-off graph on the ball of radius `r`: unit tree edges
/// plus an apex per boundary line joined to each of its vertices by `w`.
struct ConedOracle {
    index: HashMap<FreeWord, usize>,
    adj: Vec<Vec<(usize, u64)>>,
}

impl ConedOracle {
    fn new(h: &FreeWord, r: usize, w: u64) -> Self {
        let words = words_up_to(r);
        let index: HashMap<FreeWord, usize> = words.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mut adj = vec![Vec::new(); words.len()];
        for (i, p) in words.iter().enumerate() {
            for l in [1i8, -1, 2, -2] {
                if let Some(&j) = index.get(&p.mul(&FreeWord::letter(l))) {
                    adj[i].push((j, 1));
                }
            }
        }
        let mut apex: HashMap<FreeWord, usize> = HashMap::new();
        for (i, p) in words.iter().enumerate() {
            for s in 0..h.len() {
                let o = coset_rep(&p.mul(&h.prefix(s).inverse()), h);
                let a = *apex.entry(o).or_insert_with(|| {
                    adj.push(Vec::new());
                    adj.len() - 1
                });
                adj[i].push((a, w));
                adj[a].push((i, w));
            }
        }
        ConedOracle { index, adj }
    }

    fn distance(&self, x: &FreeWord, y: &FreeWord) -> u64 {
        let (s, t) = (self.index[x], self.index[y]);
        let mut dist = vec![u64::MAX; self.adj.len()];
        let mut heap = BinaryHeap::new();
        dist[s] = 0;
        heap.push(Reverse((0u64, s)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if u == t {
                return d;
            }
            if d > dist[u] {
                continue;
            }
            for &(v, c) in &self.adj[u] {
                if d + c < dist[v] {
                    dist[v] = d + c;
                    heap.push(Reverse((d + c, v)));
                }
            }
        }
        unreachable!("coned graph is connected")
    }
}

fn short_word() -> impl Strategy<Value = FreeWord> {
    prop::collection::vec(prop_oneof![Just(1i8), Just(-1), Just(2), Just(-2)], 0..6)
        .prop_map(|v| freegroup::reduce(&v))
        .prop_filter("radius 4", |w| w.len() <= 4)
}

/// Distance via the root paths, without the prefix arithmetic of the tree module.
fn root_path_distance(u: &TreeVertex, w: &TreeVertex) -> usize {
    let a = u.root_path();
    let b = w.root_path();
    let common = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    a.len() + b.len() - 2 * common
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn reduction_matches_naive(raw in letters()) {
        prop_assert_eq!(freegroup::reduce(&raw).letters().to_vec(), naive_reduce(&raw));
    }

    #[test]
    fn free_group_laws(a in letters(), b in letters(), c in letters()) {
        let (x, y, z) = (freegroup::reduce(&a), freegroup::reduce(&b), freegroup::reduce(&c));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert!(x.mul(&x.inverse()).is_identity());
    }

    #[test]
    fn tree_distance_and_median_match_bfs(a in short_word(), b in short_word(), c in short_word()) {
        prop_assert_eq!(freegroup::tree_distance(&a, &b), bfs_distance(&a, &b));
        let m = freegroup::median(&a, &b, &c);
        let cost = |p: &FreeWord| freegroup::tree_distance(p, &a) + freegroup::tree_distance(p, &b) + freegroup::tree_distance(p, &c);
        let best = words_up_to(4).iter().map(cost).min().unwrap();
        prop_assert_eq!(cost(&m), best);
    }

    #[test]
    fn coset_rep_is_idempotent_and_shortlex_minimal(raw in letters(), k in -3i64..=3) {
        let h = FreeWord::parse("ab").unwrap();
        let w = freegroup::reduce(&raw);
        let r = coset_rep(&w, &h);
        prop_assert_eq!(coset_rep(&r, &h), r.clone());
        prop_assert_eq!(coset_rep(&w.mul(&h.pow(k)), &h), r.clone());
        for j in -8..=8 {
            prop_assert!(w.mul(&h.pow(j)).shortlex_cmp(&r) != std::cmp::Ordering::Less);
        }
    }

    #[test]
    fn amalgam_group_laws(a in gen_word(), b in gen_word(), c in gen_word()) {
        let g = Amalgam::ck2();
        let (x, y, z) = (element(&g, &a), element(&g, &b), element(&g, &c));
        prop_assert_eq!(g.multiply(&g.multiply(&x, &y), &z), g.multiply(&x, &g.multiply(&y, &z)));
        prop_assert!(g.multiply(&x, &g.invert(&x)).is_identity());
        prop_assert_eq!(g.multiply(&GroupElement::identity(), &x), x.clone());
        let parsed = g.parse_word(&g.to_word(&x)).unwrap();
        prop_assert!(g.equals(&parsed, &x));
    }

    #[test]
    fn tree_operations_match_root_paths(a in gen_word(), b in gen_word(), c in gen_word()) {
        let g = Amalgam::ck2();
        let (u, v, w) = (index_map(&element(&g, &a)), index_map(&element(&g, &b)), index_map(&element(&g, &c)));
        prop_assert_eq!(tree::distance(&u, &v), root_path_distance(&u, &v));
        let geo = tree::geodesic(&u, &v);
        prop_assert_eq!(geo.len(), root_path_distance(&u, &v) + 1);
        prop_assert_eq!(geo.first(), Some(&u));
        prop_assert_eq!(geo.last(), Some(&v));
        prop_assert!(geo.windows(2).all(|p| adjacent(&p[0], &p[1])));
        let distinct: BTreeSet<&TreeVertex> = geo.iter().collect();
        prop_assert_eq!(distinct.len(), geo.len());
        let tail = tree::geodesic_tail(&u, &v, 2);
        prop_assert_eq!(&geo[geo.len() - tail.len()..], &tail[..]);

        let m = tree::median(&u, &v, &w);
        let cost = |p: &TreeVertex| root_path_distance(p, &u) + root_path_distance(p, &v) + root_path_distance(p, &w);
        let mut candidates: Vec<TreeVertex> = geo.clone();
        candidates.extend(tree::geodesic(&v, &w));
        candidates.extend(tree::geodesic(&u, &w));
        let best = candidates.iter().map(cost).min().unwrap();
        prop_assert_eq!(cost(&m), best);
    }

    #[test]
    fn action_is_an_isometry_and_index_map_is_equivariant(a in gen_word(), b in gen_word(), c in gen_word()) {
        let grp = Amalgam::ck2();
        let (g, x, y) = (element(&grp, &a), element(&grp, &b), element(&grp, &c));
        let (u, v) = (index_map(&x), index_map(&y));
        prop_assert_eq!(tree::distance(&tree::act(&grp, &g, &u), &tree::act(&grp, &g, &v)), tree::distance(&u, &v));
        let gx = grp.multiply(&g, &x);
        prop_assert_eq!(index_map(&gx), tree::act(&grp, &g, &u));
        prop_assert!(tree::distance(&index_map(&x), &tree::home_vertex(&x)) <= 1);
    }
}

#[test]
fn coned_distance_matches_dijkstra() {
    let hhs = Hhs::ck2();
    let h = hhs.group.h(0).clone();
    let oracle = ConedOracle::new(&h, 6, hhs.apex_weight);
    let ball = words_up_to(4);
    let mut checked = 0;
    for (i, x) in ball.iter().enumerate().step_by(5) {
        for y in ball.iter().skip(i % 13).step_by(7) {
            let (d, path) = hhs.coned(0, x, y);
            assert_eq!(d, oracle.distance(x, y), "{x} to {y}");
            assert!(!path.is_empty());
            checked += 1;
        }
    }
    assert!(checked > 500);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn profile_matches_direct_projections(a in gen_word(), b in gen_word()) {
        let hhs = Hhs::ck2();
        let (x, y) = (element(&hhs.group, &a), element(&hhs.group, &b));
        let prof = hhs.profile(&x, &y);
        for (d, v) in &prof {
            prop_assert_eq!(*v, hhs.d(d, &x, &y), "domain {}", d.label(&hhs.group));
        }
        let names: Vec<Domain> = prof.iter().map(|(d, _)| d.clone()).collect();
        prop_assert_eq!(hhs.relevant_domains(&x, &y), names);
    }

    #[test]
    fn unlisted_neighbours_see_bounded_projections(a in gen_word(), b in gen_word(), s in 0usize..64) {
        let hhs = Hhs::ck2();
        let (x, y) = (element(&hhs.group, &a), element(&hhs.group, &b));
        let listed: BTreeSet<Domain> = hhs.relevant_domains(&x, &y).into_iter().collect();
        let geo = tree::geodesic(&index_map(&x), &index_map(&y));
        let origins = words_up_to(2);
        let u = &geo[s % geo.len()];
        let o = coset_rep(&origins[s % origins.len()], hhs.group.h(u.vertex_type));
        let w = u.neighbor(&o);
        for d in [Domain::Rline(w.clone()), Domain::Hhat(w)] {
            if !listed.contains(&d) {
                prop_assert!(hhs.d(&d, &x, &y) <= 2.0, "{} = {}", d.label(&hhs.group), hhs.d(&d, &x, &y));
            }
        }
    }

    #[test]
    fn distance_formula_is_symmetric_and_vanishes_on_the_diagonal(a in gen_word(), b in gen_word()) {
        let hhs = Hhs::ck2();
        let (x, y) = (element(&hhs.group, &a), element(&hhs.group, &b));
        prop_assert_eq!(hhs.distance_formula(&x, &x, 3.0), 0.0);
        prop_assert_eq!(hhs.distance_formula(&x, &y, 3.0), hhs.distance_formula(&y, &x, 3.0));
    }
}

#[test]
fn sphere_sizes_of_the_default_instance() {
    let g = Amalgam::ck2();
    let ball = g.ball(4).unwrap();
    assert_eq!(ball.sphere_sizes(), vec![1, 10, 76, 548, 3906]);
    assert_eq!(ball.len(), 4541);
}
