use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use admissible_cli::RunManifest;

fn admissible(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_admissible"))
        .env("ADMISSIBLE_CACHE_DIR", cache)
        .env_remove("ADMISSIBLE_TIMESTAMP")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).to_string()
}

fn write_config(dir: &Path, name: &str, h1: &str, gluing: &str) -> String {
    let p = dir.join(name);
    fs::write(
        &p,
        format!(
            "name = \"test\"\n[[vertex]]\nrank = 2\nh = \"{h1}\"\n[[vertex]]\nrank = 2\nh = \"ab\"\n[[edge]]\nendpoints = [0, 1]\ngluing = {gluing}\n"
        ),
    )
    .unwrap();
    p.to_string_lossy().to_string()
}

#[test]
fn default_config_builds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/ck2.toml");
    let o = admissible(dir.path(), &["group", "build", "--config", cfg, "--radius", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("admissibility pass"));
    assert!(s.contains("spheres=1,10,76,548"));
    let caches: Vec<_> = fs::read_dir(dir.path()).unwrap().filter_map(|e| e.ok()).collect();
    assert_eq!(caches.len(), 1, "only the renamed cache remains");
}

#[test]
fn proper_power_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pp.toml", "abab", "[[0, 1], [1, 0]]");
    let o = admissible(dir.path(), &["group", "build", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("proper power"));
}

#[test]
fn singular_gluing_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sing.toml", "ab", "[[1, 2], [2, 4]]");
    let o = admissible(dir.path(), &["group", "build", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not invertible"));
}

#[test]
fn usage_errors_and_missing_cache_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(admissible(dir.path(), &["verify", "bogus"]).status.code(), Some(2));
    let o = admissible(dir.path(), &["verify", "distance-formula", "--radius", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cache missing"));
}

#[test]
fn verify_axioms_lists_every_check() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(admissible(dir.path(), &["group", "build", "--radius", "3"]).status.code(), Some(0));
    let out = dir.path().join("axioms.csv");
    let o = admissible(
        dir.path(),
        &["verify", "axioms", "--radius", "3", "--samples", "60", "--seed", "2", "-o", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = stdout(&o);
    let ids: Vec<&str> = s.lines().filter(|l| !l.starts_with("audit")).map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(ids, admissible::verifier::CHECK_IDS.to_vec());
    assert!(s.contains("audit complete"));
    let artifact = fs::read_to_string(&out).unwrap();
    let m = RunManifest::parse(&artifact).unwrap();
    assert_eq!(m.command, "verify axioms");
    assert_eq!(m.seeds, vec![2]);
    assert_eq!(m.parameter("radius"), Some("3"));
    assert_eq!(m.timestamp, "unset");
    assert!(artifact.contains(admissible::verifier::CSV_HEADER));
}

#[test]
fn radius_beyond_cache_is_partial() {
    let dir = tempfile::tempdir().unwrap();
    admissible(dir.path(), &["group", "build", "--radius", "2"]);
    let o =
        admissible(dir.path(), &["verify", "distance-formula", "--radius", "3", "--samples", "10", "-o", "/dev/null"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("distance-formula partial"));
}

#[test]
fn walks_are_reproducible_and_analyzable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = admissible(
            dir.path(),
            &["walk", "run", "--paths", "30", "--steps", "40", "--seed", "7", "-o", p.to_str().unwrap()],
        );
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let o = admissible(dir.path(), &["walk", "analyze", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("n,drift_mean,drift_q01"));
    assert!(s.contains("tracking ratio="));
}

#[test]
fn merge_checks_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    admissible(
        dir.path(),
        &["walk", "run", "--paths", "30", "--steps", "20", "--seed", "1", "-o", a.to_str().unwrap()],
    );
    let b = dir.path().join("b.csv");
    admissible(
        dir.path(),
        &["walk", "run", "--paths", "30", "--steps", "20", "--seed", "2", "-o", b.to_str().unwrap()],
    );

    let o = admissible(dir.path(), &["report", "merge", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let merged = stdout(&o);
    let m = RunManifest::parse(&merged).unwrap();
    assert_eq!((m.command.as_str(), m.seeds.clone()), ("report merge", vec![1, 2]));
    let rows = |t: &str| t.lines().filter(|l| !l.starts_with('#')).count() - 1;
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    assert_eq!(rows(&merged), rows(&ta) + rows(&tb));

    let other = fs::read_to_string(&b).unwrap().replacen("config_hash=", "config_hash=00", 1);
    let c = dir.path().join("c.csv");
    fs::write(&c, other).unwrap();
    let o = admissible(dir.path(), &["report", "merge", a.to_str().unwrap(), c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("manifest mismatch"));
}

#[test]
fn manifest_round_trips() {
    let m = RunManifest::new("abc", "walk run", vec![("paths", "5".into()), ("steps", "9".into())], vec![3, 4]);
    assert_eq!(RunManifest::parse(&m.to_header()).unwrap(), m);
    assert!(RunManifest::parse("# nothing here\n").is_err());
}
