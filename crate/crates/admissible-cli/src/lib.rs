//! Batch front door: config ingestion, ball caches, verifier suites, walk
//! experiments and report merging. Every artifact opens with its manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use admissible::amalgam::{Amalgam, Ball, GraphOfGroupsConfig, CK2_TOML};
use admissible::hhs::Hhs;
use admissible::randwalk::{
    drift_stats, log_projection_stats, run_walks, tracking_stats, Checkpoint, Measure, PathRecord, WalkConfig,
    PILOT_DRIFT_Q01,
};
use admissible::verifier::{format_value, summary, to_csv, CheckParams, Status, Verifier, CHECK_IDS};
use admissible::Error;
use clap::{Args, Parser, Subcommand};

pub const CACHE_ENV: &str = "ADMISSIBLE_CACHE_DIR";
pub const TIMESTAMP_ENV: &str = "ADMISSIBLE_TIMESTAMP";
pub const WALK_SCHEMA: &str = "# schema: admissible-walk/1";
pub const ANALYSIS_SCHEMA: &str = "# schema: admissible-walk-summary/1";

#[derive(Parser, Debug)]
#[command(name = "admissible", version, about = "Admissible-group geometry experiments")]
pub struct Cli {
    /// Directory holding ball caches.
    #[arg(long, env = CACHE_ENV, default_value = ".admissible-cache", global = true)]
    pub cache_dir: PathBuf,
    /// Graph-of-groups config (TOML); defaults to the shipped CK2 instance.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Artifact destination; stdout when absent.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build and validate the group.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Numerical checks of the hierarchy axioms.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Random-walk experiments.
    #[command(subcommand)]
    Walk(WalkCmd),
    /// Combine artifacts.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand, Debug)]
pub enum GroupCmd {
    /// Validate the config and write the word-metric ball cache.
    Build {
        /// Ball radius; the config's max_radius when absent.
        #[arg(long)]
        radius: Option<usize>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 4)]
    pub radius: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Distance-formula threshold L.
    #[arg(long, default_value_t = 10.0)]
    pub threshold: f64,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Run every axiom check on the cached ball.
    Axioms(VerifyArgs),
    /// Fit the distance formula on the cached ball.
    DistanceFormula(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct WalkArgs {
    #[arg(long, default_value_t = 500)]
    pub paths: usize,
    #[arg(long, default_value_t = 400)]
    pub steps: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum WalkCmd {
    /// Sample paths of the uniform generator measure.
    Run(WalkArgs),
    /// Drift, log-projection and tracking statistics of a walk artifact.
    Analyze {
        input: PathBuf,
        /// Level l of the exceedance curve d_T(o, w_n) ≥ l·n.
        #[arg(long, default_value_t = 0.2)]
        level: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum ReportCmd {
    /// Concatenate artifacts whose manifests agree.
    Merge {
        #[arg(required = true, num_args = 1..)]
        files: Vec<PathBuf>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunManifest {
    pub config_hash: String,
    pub command: String,
    pub parameters: Vec<(String, String)>,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(config_hash: &str, command: &str, parameters: Vec<(&str, String)>, seeds: Vec<u64>) -> Self {
        RunManifest {
            config_hash: config_hash.to_string(),
            command: command.to_string(),
            parameters: parameters.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            seeds,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: std::env::var(TIMESTAMP_ENV).unwrap_or_else(|_| "unset".into()),
        }
    }

    pub fn to_header(&self) -> String {
        let params: Vec<String> = self.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
        format!(
            "# manifest.config_hash={}\n# manifest.command={}\n# manifest.parameters={}\n# manifest.seeds={}\n# manifest.tool_version={}\n# manifest.timestamp={}\n",
            self.config_hash,
            self.command,
            params.join(";"),
            seeds.join(","),
            self.tool_version,
            self.timestamp
        )
    }

    /// Reads the manifest lines of an artifact.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let fields: BTreeMap<&str, &str> =
            text.lines().filter_map(|l| l.strip_prefix("# manifest.")).filter_map(|l| l.split_once('=')).collect();
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| Error::Parse(format!("manifest lacks {k}")));
        let parameters = get("parameters")?
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| Error::Parse(format!("bad manifest parameter {kv}")))
            })
            .collect::<Result<_, _>>()?;
        let seeds = get("seeds")?
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad seed {s}"))))
            .collect::<Result<_, _>>()?;
        Ok(RunManifest {
            config_hash: get("config_hash")?.to_string(),
            command: get("command")?.to_string(),
            parameters,
            seeds,
            tool_version: get("tool_version")?.to_string(),
            timestamp: get("timestamp")?.to_string(),
        })
    }

    pub fn parameter(&self, key: &str) -> Option<&str> {
        self.parameters.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn load_config(path: Option<&Path>) -> Result<GraphOfGroupsConfig, Error> {
    match path {
        Some(p) => GraphOfGroupsConfig::from_toml(&fs::read_to_string(p)?),
        None => GraphOfGroupsConfig::from_toml(CK2_TOML),
    }
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().to_string()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn cache_path(dir: &Path, hash: &str, radius: usize) -> PathBuf {
    dir.join(format!("ball-{hash}-r{radius}.bin"))
}

/// The smallest cached radius covering `radius`, else the largest cached one.
fn find_cache(dir: &Path, hash: &str, radius: usize) -> Result<PathBuf, Error> {
    let prefix = format!("ball-{hash}-r");
    let mut radii: Vec<usize> = fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .filter_map(|e| {
                    let n = e.file_name().to_string_lossy().to_string();
                    n.strip_prefix(&prefix)?.strip_suffix(".bin")?.parse().ok()
                })
                .collect()
        })
        .unwrap_or_default();
    radii.sort_unstable();
    let pick = radii.iter().copied().find(|r| *r >= radius).or(radii.last().copied());
    pick.map(|r| cache_path(dir, hash, r)).ok_or_else(|| {
        Error::Io(format!("ball cache missing for config {hash} in {}; run `group build` first", dir.display()))
    })
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, artifact: &str) -> Result<(), Error> {
    match out {
        Some(p) => write_atomic(p, artifact.as_bytes()),
        None => Ok(stdout.write_all(artifact.as_bytes())?),
    }
}

/// Runs a parsed command, returning the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, Error> {
    let cfg = load_config(cli.config.as_deref())?;
    let hash = cfg.hash_hex();
    match &cli.command {
        Command::Group(GroupCmd::Build { radius }) => {
            let radius = radius.unwrap_or(cfg.max_radius);
            let group = Amalgam::new(cfg.clone());
            let ball = group.ball(radius)?;
            let mut bytes = Vec::new();
            ball.write_cache(&hash, &mut bytes)?;
            let path = cache_path(&cli.cache_dir, &hash, radius);
            write_atomic(&path, &bytes)?;
            writeln!(stdout, "config {} hash {}", cfg.name, hash)?;
            writeln!(
                stdout,
                "admissibility pass h1={} h2={} gluing={:?} commensurability_radius={}",
                cfg.h[0], cfg.h[1], cfg.gluing, cfg.commensurability_radius
            )?;
            let spheres: Vec<String> = ball.sphere_sizes().iter().map(|s| s.to_string()).collect();
            writeln!(stdout, "ball radius={} elements={} spheres={}", radius, ball.len(), spheres.join(","))?;
            writeln!(stdout, "cache {}", path.display())?;
            Ok(0)
        }
        Command::Verify(cmd) => {
            let (name, args, ids): (&str, &VerifyArgs, Vec<&str>) = match cmd {
                VerifyCmd::Axioms(a) => ("verify axioms", a, CHECK_IDS.to_vec()),
                VerifyCmd::DistanceFormula(a) => ("verify distance-formula", a, vec!["distance-formula"]),
            };
            let path = find_cache(&cli.cache_dir, &hash, args.radius)?;
            let ball = Ball::read_cache(&hash, fs::File::open(&path).map(std::io::BufReader::new)?)?;
            let hhs = Hhs::new(Amalgam::new(cfg))?;
            let verifier = Verifier::new(hhs, ball);
            let params =
                CheckParams { radius: args.radius, samples: args.samples, seed: args.seed, threshold: args.threshold };
            let reports = ids.iter().map(|id| verifier.run_check(id, &params)).collect::<Result<Vec<_>, _>>()?;
            let manifest = RunManifest::new(
                &hash,
                name,
                vec![
                    ("radius", args.radius.to_string()),
                    ("samples", args.samples.to_string()),
                    ("threshold", format_value(args.threshold)),
                ],
                vec![args.seed],
            );
            emit(cli.out.as_deref(), stdout, &format!("{}{}", manifest.to_header(), to_csv(&reports)))?;
            write!(stdout, "{}", summary(&reports))?;
            Ok(if reports.iter().any(|r| r.status == Status::Fail) { 1 } else { 0 })
        }
        Command::Walk(WalkCmd::Run(args)) => {
            let hhs = Hhs::new(Amalgam::new(cfg))?;
            let mut checkpoints: Vec<usize> = vec![args.steps / 4, args.steps / 2, args.steps];
            checkpoints.retain(|n| *n >= 2);
            checkpoints.dedup();
            let wc = WalkConfig { paths: args.paths, checkpoints, ray_steps: 2 * args.steps, seed: args.seed };
            let measure = Measure::uniform_generators(&hhs.group);
            let records = run_walks(&hhs, &measure, &wc)?;
            let manifest = RunManifest::new(
                &hash,
                "walk run",
                vec![
                    ("measure", "uniform-generators".into()),
                    ("paths", args.paths.to_string()),
                    ("steps", args.steps.to_string()),
                    ("ray_steps", wc.ray_steps.to_string()),
                ],
                vec![args.seed],
            );
            let artifact = format!("{}{}", manifest.to_header(), walk_csv(&records)?);
            emit(cli.out.as_deref(), stdout, &artifact)?;
            if cli.out.is_some() {
                writeln!(
                    stdout,
                    "walk paths={} steps={} seed={} records={}",
                    args.paths,
                    args.steps,
                    args.seed,
                    records.len()
                )?;
            }
            Ok(0)
        }
        Command::Walk(WalkCmd::Analyze { input, level }) => {
            let text = fs::read_to_string(input)?;
            let source = RunManifest::parse(&text)?;
            if source.config_hash != hash {
                return Err(Error::Config(vec![format!(
                    "walk artifact belongs to config {}, current config is {hash}",
                    source.config_hash
                )]));
            }
            let records = parse_walk_csv(&text)?;
            let mut ns: Vec<usize> =
                records.first().map(|r| r.checkpoints.iter().map(|c| c.n).collect()).unwrap_or_default();
            ns.sort_unstable();
            let drift = drift_stats(&records, &ns, *level)?;
            let logfit = log_projection_stats(&records, &ns, 0.95);
            let tracking = tracking_stats(&records, &ns);
            let mut params = source.parameters.clone();
            params.push(("level".into(), format_value(*level)));
            let manifest = RunManifest {
                command: "walk analyze".into(),
                parameters: params,
                ..RunManifest::new(&hash, "", vec![], source.seeds.clone())
            };
            let mut body = format!(
                "{ANALYSIS_SCHEMA}\nn,drift_mean,drift_q01,exceedance,sup_q95,log_c,within_c_log_n,tracking_mean,tracking_q95\n"
            );
            for ((d, l), t) in drift.iter().zip(&logfit.rows).zip(&tracking) {
                body.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    d.n,
                    format_value(d.mean),
                    format_value(d.q01),
                    format_value(d.exceedance),
                    format_value(l.q95),
                    format_value(l.c),
                    format_value(l.within),
                    format_value(t.mean),
                    format_value(t.q95)
                ));
            }
            emit(cli.out.as_deref(), stdout, &format!("{}{}", manifest.to_header(), body))?;
            if let Some(last) = drift.last() {
                writeln!(stdout, "drift q01={} pilot={}", format_value(last.q01), format_value(PILOT_DRIFT_Q01))?;
            }
            writeln!(stdout, "log-projection C={} drift={}", format_value(logfit.c), format_value(logfit.drift))?;
            if tracking.len() >= 2 {
                let (a, b) = (&tracking[tracking.len() - 2], &tracking[tracking.len() - 1]);
                writeln!(stdout, "tracking ratio={}", format_value(b.mean / a.mean))?;
            }
            Ok(0)
        }
        Command::Report(ReportCmd::Merge { files }) => {
            let merged = merge(files)?;
            emit(cli.out.as_deref(), stdout, &merged)?;
            Ok(0)
        }
    }
}

const WALK_HEADER: [&str; 8] =
    ["stream", "n", "tree_distance", "sup_projection", "sup_domain", "tracking", "prefix_depth", "ray_depth"];

pub fn walk_csv(records: &[PathRecord]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(WALK_HEADER).map_err(io)?;
    for r in records {
        for c in &r.checkpoints {
            w.write_record([
                r.stream.to_string(),
                c.n.to_string(),
                c.tree_distance.to_string(),
                format_value(c.sup_projection),
                c.sup_domain.clone(),
                format_value(c.tracking),
                c.prefix_depth.to_string(),
                r.ray_depth.to_string(),
            ])
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(format!("{WALK_SCHEMA}\n{}", String::from_utf8_lossy(&bytes)))
}

pub fn parse_walk_csv(text: &str) -> Result<Vec<PathRecord>, Error> {
    if !text.lines().any(|l| l == WALK_SCHEMA) {
        return Err(Error::Parse("not a walk artifact (schema line missing)".into()));
    }
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let bad = |what: &str| Error::Parse(format!("bad walk row: {what}"));
    let mut by_stream: BTreeMap<u64, PathRecord> = BTreeMap::new();
    for row in rd.records() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        if row.len() != WALK_HEADER.len() {
            return Err(bad("column count"));
        }
        let num = |i: usize| row[i].parse::<f64>().map_err(|_| bad(WALK_HEADER[i]));
        let int = |i: usize| row[i].parse::<u64>().map_err(|_| bad(WALK_HEADER[i]));
        let stream = int(0)?;
        let rec = by_stream.entry(stream).or_insert(PathRecord {
            stream,
            ray_depth: int(7)? as usize,
            checkpoints: Vec::new(),
        });
        rec.checkpoints.push(Checkpoint {
            n: int(1)? as usize,
            tree_distance: int(2)? as usize,
            sup_projection: num(3)?,
            sup_domain: row[4].to_string(),
            tracking: num(5)?,
            prefix_depth: int(6)? as usize,
        });
    }
    Ok(by_stream.into_values().collect())
}

/// Concatenates artifacts produced under one config and one schema.
pub fn merge(files: &[PathBuf]) -> Result<String, Error> {
    let mut manifests = Vec::new();
    let mut schema: Option<(String, String)> = None;
    let mut rows = String::new();
    for f in files {
        let text = fs::read_to_string(f)?;
        let m = RunManifest::parse(&text)?;
        if let Some(first) = manifests.first() {
            let first: &RunManifest = first;
            if first.config_hash != m.config_hash {
                return Err(Error::Config(vec![format!(
                    "manifest mismatch: {} has config {}, expected {}",
                    f.display(),
                    m.config_hash,
                    first.config_hash
                )]));
            }
        }
        let schema_line = text.lines().find(|l| l.starts_with("# schema:")).unwrap_or("").to_string();
        let mut body = text.lines().filter(|l| !l.starts_with('#'));
        let header = body.next().unwrap_or("").to_string();
        match &schema {
            None => schema = Some((schema_line, header)),
            Some(s) if *s != (schema_line.clone(), header.clone()) => {
                return Err(Error::Config(vec![format!(
                    "schema mismatch: {} does not match the first artifact",
                    f.display()
                )]));
            }
            _ => {}
        }
        for l in body {
            rows.push_str(l);
            rows.push('\n');
        }
        manifests.push(m);
    }
    let first = &manifests[0];
    let mut seeds: Vec<u64> = manifests.iter().flat_map(|m| m.seeds.iter().copied()).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let merged =
        RunManifest::new(&first.config_hash, "report merge", vec![("sources", manifests.len().to_string())], seeds);
    let mut out = merged.to_header();
    for (i, m) in manifests.iter().enumerate() {
        for line in m.to_header().lines() {
            out.push_str(&line.replacen("# manifest.", &format!("# source{i}."), 1));
            out.push('\n');
        }
    }
    let (schema_line, header) = schema.unwrap_or_default();
    out.push_str(&format!("{schema_line}\n{header}\n{rows}"));
    Ok(out)
}
