//! Acceptance suite: one pass/fail line per criterion.

use std::fs;
use std::time::Instant;

use admissible::amalgam::{words_up_to, Amalgam, GroupElement};
use admissible::freegroup::{self, Axis, FreeWord};
use admissible::hhs::Hhs;
use admissible::randwalk::{
    contraction_samples, drift_stats, log_projection_stats, run_walks, spread_exponent, tracking_stats, Measure,
    WalkConfig, PILOT_DRIFT_Q01,
};
use admissible::stats::relative_growth;
use admissible::tree::{self, index_map};
use admissible::verifier::{format_value, CheckParams, CheckReport, Verifier};
use admissible_cli::{run, Cli};
use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_element(g: &Amalgam, gens: &[GroupElement], rng: &mut ChaCha8Rng) -> GroupElement {
    let n = rng.gen_range(0..=12);
    (0..n).fold(GroupElement::identity(), |acc, _| g.multiply(&acc, &gens[rng.gen_range(0..gens.len())]))
}

fn random_free(rng: &mut ChaCha8Rng, max: usize) -> FreeWord {
    let n = rng.gen_range(0..=max);
    let raw: Vec<i8> = (0..n).map(|_| [1i8, -1, 2, -2][rng.gen_range(0..4)]).collect();
    freegroup::reduce(&raw)
}

fn exact_structure() -> Outcome {
    let g = Amalgam::ck2();
    let gens = g.generators();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut law_fail = 0;
    for _ in 0..10_000 {
        let x = random_element(&g, &gens, &mut rng);
        let y = random_element(&g, &gens, &mut rng);
        let z = random_element(&g, &gens, &mut rng);
        let assoc = g.multiply(&g.multiply(&x, &y), &z) == g.multiply(&x, &g.multiply(&y, &z));
        let inv = g.multiply(&x, &g.invert(&x)).is_identity() && g.multiply(&g.invert(&y), &y).is_identity();
        let ident = g.multiply(&GroupElement::identity(), &z) == z && g.multiply(&z, &GroupElement::identity()) == z;
        let parse = g.parse_word(&g.to_word(&x)).map(|p| g.equals(&p, &x)).unwrap_or(false);
        if !(assoc && inv && ident && parse) {
            law_fail += 1;
        }
    }

    let ball = words_up_to(6);
    let h = FreeWord::parse("ab").unwrap();
    let mut oracle_fail = 0;
    for _ in 0..1000 {
        let (a, b, c) = (random_free(&mut rng, 6), random_free(&mut rng, 6), random_free(&mut rng, 6));
        let cost = |p: &FreeWord| {
            freegroup::tree_distance(p, &a) + freegroup::tree_distance(p, &b) + freegroup::tree_distance(p, &c)
        };
        let best: Vec<&FreeWord> = {
            let m = ball.iter().map(cost).min().unwrap();
            ball.iter().filter(|p| cost(p) == m).collect()
        };
        let median_ok = best.len() == 1 && *best[0] == freegroup::median(&a, &b, &c);

        let ax = Axis::new(h.clone(), random_free(&mut rng, 3));
        let w = random_free(&mut rng, 6);
        let (p, i, d) = ax.project_indexed(&w);
        let (bi, bd) =
            (-24i64..=24).map(|k| (k, freegroup::tree_distance(&ax.point(k), &w))).min_by_key(|(_, d)| *d).unwrap();
        let proj_ok = i == bi && d == bd && p == ax.point(bi);
        if !(median_ok && proj_ok) {
            oracle_fail += 1;
        }
    }

    let mut equiv_fail = 0;
    for _ in 0..1000 {
        let gg = random_element(&g, &gens, &mut rng);
        let x = random_element(&g, &gens, &mut rng);
        let y = random_element(&g, &gens, &mut rng);
        let (u, v) = (index_map(&x), index_map(&y));
        let moved = tree::act(&g, &gg, &u);
        let exact = index_map(&g.multiply(&gg, &x)) == moved;
        let iso = tree::distance(&moved, &tree::act(&g, &gg, &v)) == tree::distance(&u, &v);
        if !(exact && iso) {
            equiv_fail += 1;
        }
    }
    outcome(
        law_fail + oracle_fail + equiv_fail == 0,
        format!("group-law failures {law_fail}/10000, median+projection oracle failures {oracle_fail}/1000, index-map equivariance failures {equiv_fail}/1000"),
    )
}

fn relations(v: &Verifier) -> Outcome {
    let r = v.run_check("complexity", &CheckParams { radius: 4, ..Default::default() }).unwrap();
    let c = |k: &str| r.constant(k).unwrap();
    outcome(
        c("relation_violations") == 0.0 && c("longest_chain") == 3.0 && c("max_orthogonal_family") <= 2.0,
        format!(
            "{} domains, relation violations {}, longest chain {}, largest orthogonal family {}",
            c("domains"),
            c("relation_violations"),
            c("longest_chain"),
            c("max_orthogonal_family")
        ),
    )
}

/// Per-constant values across radii, with the worst step growth.
fn stability(reports: &[CheckReport], names: &[&str], tolerance: f64) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in names {
        let vals: Vec<f64> = reports.iter().map(|r| r.constant(name).unwrap()).collect();
        let growth = vals.windows(2).map(|w| relative_growth(w[0], w[1])).fold(0.0, f64::max);
        ok &= vals.iter().all(|x| x.is_finite()) && growth <= tolerance;
        let shown: Vec<String> = vals.iter().map(|x| format_value(*x)).collect();
        parts.push(format!("{name}={} (growth {})", shown.join("/"), format_value(growth)));
    }
    (ok, parts.join(", "))
}

fn sweep(v: &Verifier, id: &str, samples: usize) -> Vec<CheckReport> {
    [4, 5, 6]
        .iter()
        .map(|&r| v.run_check(id, &CheckParams { radius: r, samples, seed: 1, threshold: 10.0 }).unwrap())
        .collect()
}

fn consistency(v: &Verifier) -> Outcome {
    let reports = sweep(v, "consistency", 10_000);
    let (ok, detail) = stability(&reports, &["club", "spade", "diamond"], 0.10);
    outcome(ok, format!("radii 4/5/6: {detail}; {}", reports[0].note))
}

fn bounded_geodesic_image(v: &Verifier) -> Outcome {
    let reports = sweep(v, "bounded-geodesic-image", 2000);
    let (stable, detail) = stability(&reports, &["E"], 0.10);
    let violations: f64 =
        reports.iter().map(|r| r.constant("violations").unwrap() + r.constant("large_links_violations").unwrap()).sum();
    outcome(
        stable && violations == 0.0,
        format!("radii 4/5/6: {detail}, violations on 1000 held-out geodesics per radius {violations}"),
    )
}

fn distance_formula(v: &Verifier) -> Outcome {
    let p = |r| CheckParams { radius: r, samples: 0, seed: 1, threshold: 10.0 };
    let r4 = v.run_check("distance-formula", &p(4)).unwrap();
    let r5 = v.run_check("distance-formula", &p(5)).unwrap();
    let c = |r: &CheckReport, k: &str| r.constant(k).unwrap();
    let finite = c(&r5, "qi_k").is_finite() && c(&r5, "qi_c").is_finite();
    let residual = c(&r5, "residual_p95");
    let ok = finite && residual <= 0.25 && residual <= c(&r4, "residual_p95");
    outcome(
        ok,
        format!(
            "ball(5), L = 10: |y| = {}·DF + {}, K = {}, C = {}, p95 relative residual {} (ball(4): {})",
            format_value(c(&r5, "slope")),
            format_value(c(&r5, "intercept")),
            format_value(c(&r5, "qi_k")),
            format_value(c(&r5, "qi_c")),
            format_value(residual),
            format_value(c(&r4, "residual_p95"))
        ),
    )
}

fn hierarchy(v: &Verifier) -> Outcome {
    let p = |r| CheckParams { radius: r, ..Default::default() };
    let fit = v.hierarchy_growth(&p(4), None);
    let cf = fit.constant("c").unwrap();
    let check = v.hierarchy_growth(&p(6), Some(cf));
    let exponent = check.constant("exponent").unwrap();
    let violations = check.constant("envelope_violations").unwrap();
    outcome(
        exponent <= 1.0 && violations == 0.0,
        format!(
            "ball(6), E = 8: {} pairs, exponent {}, envelope |y| ≤ {}·(d_T+1)·E³ fitted on ball(4), violations {}",
            check.constant("pairs").unwrap(),
            format_value(exponent),
            format_value(cf),
            violations
        ),
    )
}

fn random_walk(hhs: &Hhs) -> Outcome {
    let cfg = WalkConfig::default();
    let measure = Measure::uniform_generators(&hhs.group);
    let records = run_walks(hhs, &measure, &cfg).unwrap();
    let ns = &cfg.checkpoints;
    let drift = drift_stats(&records, ns, 0.2).unwrap();
    let q01 = drift.last().unwrap().q01;
    let a = q01 > 0.0 && (q01 - PILOT_DRIFT_Q01).abs() <= 0.2 * PILOT_DRIFT_Q01;
    let logfit = log_projection_stats(&records, ns, 0.95);
    let b = logfit.rows.iter().all(|r| r.within >= 0.95) && logfit.drift <= 0.15;
    let tracking = tracking_stats(&records, ns);
    let (t200, t400) = (tracking[1].mean, tracking[2].mean);
    let c = t400 < 0.7 * t200;
    let within: Vec<String> = logfit.rows.iter().map(|r| format_value(r.within)).collect();
    outcome(
        a && b && c,
        format!(
            "(a) q01 d_T/n at n=400 = {} vs pilot {} [{}]; (b) C = {}, drift {}, coverage {} [{}]; (c) tracking {} vs {} at n=200 [{}]",
            format_value(q01),
            format_value(PILOT_DRIFT_Q01),
            if a { "pass" } else { "fail" },
            format_value(logfit.c),
            format_value(logfit.drift),
            within.join("/"),
            if b { "pass" } else { "fail" },
            format_value(t400),
            format_value(t200),
            if c { "pass" } else { "fail" }
        ),
    )
}

fn contraction(hhs: &Hhs) -> Outcome {
    let measure = Measure::uniform_generators(&hhs.group);
    let calib = contraction_samples(hhs, &measure, 200, 11, 0.5).unwrap();
    let test = contraction_samples(hhs, &measure, 1000, 12, 0.5).unwrap();
    let d2 = calib.iter().map(|s| s.spread).max().unwrap();
    let violations = test.iter().filter(|s| s.spread > d2).count();
    let exponent = spread_exponent(&test);
    let mean_dist = test.iter().map(|s| s.dist_to_ray).sum::<f64>() / test.len() as f64;
    outcome(
        violations == 0 && exponent <= 3.0,
        format!(
            "D1 = 1/2, D2 = {d2} fitted on 200 triples, violations {violations}/1000, spread exponent {}, mean distance to ray {}",
            format_value(exponent),
            format_value(mean_dist)
        ),
    )
}

fn cli(args: &[&str]) -> i32 {
    let cli = Cli::try_parse_from(std::iter::once("admissible").chain(args.iter().copied())).unwrap();
    run(&cli, &mut std::io::sink()).unwrap()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cache = cache.to_str().unwrap();
    cli(&["--cache-dir", cache, "group", "build", "--radius", "4"]);
    let mut outputs = Vec::new();
    for run_id in 0..2 {
        let ax = dir.path().join(format!("axioms{run_id}.csv"));
        let wk = dir.path().join(format!("walk{run_id}.csv"));
        let code_ax = cli(&[
            "--cache-dir",
            cache,
            "verify",
            "axioms",
            "--radius",
            "4",
            "--samples",
            "300",
            "--seed",
            "5",
            "-o",
            ax.to_str().unwrap(),
        ]);
        let code_wk =
            cli(&["walk", "run", "--paths", "60", "--steps", "100", "--seed", "7", "-o", wk.to_str().unwrap()]);
        outputs.push((code_ax, code_wk, fs::read(&ax).unwrap(), fs::read(&wk).unwrap()));
    }
    let same = outputs[0] == outputs[1];
    outcome(
        same,
        format!(
            "verify axioms (radius 4, 300 samples) and walk run (60 paths, n = 100) twice: {}",
            if same { "bytewise identical" } else { "outputs differ" }
        ),
    )
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }
    let hhs = Hhs::ck2();
    let verifier = Verifier::build(Hhs::ck2(), 6).expect("ball(6) within the configured cap");
    let criteria: Vec<Criterion> = vec![
        ("exact structure", Box::new(exact_structure)),
        ("combinatorial HHS relations", Box::new(|| relations(&verifier))),
        ("consistency constants", Box::new(|| consistency(&verifier))),
        ("bounded geodesic image", Box::new(|| bounded_geodesic_image(&verifier))),
        ("distance formula", Box::new(|| distance_formula(&verifier))),
        ("hierarchy path growth", Box::new(|| hierarchy(&verifier))),
        ("random walk", Box::new(|| random_walk(&hhs))),
        ("contraction and projection control", Box::new(|| contraction(&hhs))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} {}: {} | {} ({:.1}s)",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
