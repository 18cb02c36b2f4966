use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use knotops::cosimplicial::ObjectKind;
use knotops::geo_operads::{property_suite, Tolerances};
use knotops::poisson_operad::{basis, Convention, OperadElement};
use knotops::spectral::{algebra_suite, hh_bracket, hh_star, obstruction_report_for, ObstructionMap, Page, SpectralError};
use knotops_cli::{canonical_json, Cache, JobKey, JobKind, Lookup, TableRecord};
use serde_json::{json, Value};

const OK: u8 = 0;
const FAILURE: u8 = 1;
const USAGE: u8 = 2;
const PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "knotops", version, about = "E² pages of the Hochschild and framed cosimplicial objects of the n-Poisson operad")]
struct Cli {
    /// Cache directory; falls back to $KNOTOPS_CACHE, else no caching.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Ignore and do not write the cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the E² page of an object.
    E2 {
        kind: Kind,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 6)]
        max_level: usize,
        /// Defaults to 3(n−1).
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Check that the kernel of the map to the framed object is not a bracket ideal.
    Obstruction {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = MapArg::Inclusion)]
        map: MapArg,
    },
    /// Bracket or star product of two E² classes given as expressions.
    Bracket {
        #[arg(long)]
        n: u32,
        /// First class, e.g. "{1,2}".
        a: String,
        /// Second class, e.g. "{1,3}·{2,4}".
        b: String,
        #[arg(long, value_enum, default_value_t = Op::Bracket)]
        op: Op,
    },
    /// Run an invariant suite.
    Verify {
        target: Target,
        #[arg(long, default_value_t = 4)]
        n: u32,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Dimensions of the operad by arity and degree.
    Dims {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 7)]
        max_arity: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Hochschild,
    Semidirect,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapArg {
    Inclusion,
    Identity,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Bracket,
    Star,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Algebra,
    Geo,
}

/// A failed command with its exit code.
struct Exit(u8, String);

fn usage(msg: impl Into<String>) -> Exit {
    Exit(USAGE, msg.into())
}

fn failure(msg: impl ToString) -> Exit {
    Exit(FAILURE, msg.to_string())
}

fn convention(n: u32) -> Result<Convention, Exit> {
    Convention::new(n).map_err(|e| usage(e.to_string()))
}

/// Looks a job up in the cache, computing and storing it on a miss.
fn cached(cache: Option<&Cache>, key: &JobKey, compute: impl FnOnce() -> Result<Value, Exit>) -> Result<Value, Exit> {
    let start = Instant::now();
    if let Some(c) = cache {
        match c.get(key) {
            Lookup::Hit(v) => {
                eprintln!("cache hit {}", c.path(key).display());
                return Ok(v);
            }
            Lookup::Corrupt(why) => eprintln!("warning: {why} in {}; recomputing", c.path(key).display()),
            Lookup::Miss => {}
        }
    }
    let v = compute()?;
    eprintln!("computed in {:.3}s", start.elapsed().as_secs_f64());
    if let Some(c) = cache {
        if let Err(e) = c.put(key, &v) {
            eprintln!("warning: could not write cache: {e}");
        }
    }
    Ok(v)
}

fn run(cli: Cli) -> Result<u8, Exit> {
    let cache = if cli.no_cache {
        None
    } else {
        Cache::from_flag_or_env(cli.cache_dir.as_deref()).map_err(|e| failure(format!("cache directory: {e}")))?
    };
    let cache = cache.as_ref();
    match cli.command {
        Command::E2 {
            kind,
            n,
            max_level,
            max_degree,
            format,
        } => {
            let conv = convention(n)?;
            if max_level < 1 {
                return Err(usage("--max-level must be at least 1"));
            }
            let max_degree = max_degree.unwrap_or(3 * conv.bracket_degree());
            let (job, obj) = match kind {
                Kind::Hochschild => (JobKind::Hochschild, ObjectKind::Hochschild),
                Kind::Semidirect => (JobKind::Semidirect, ObjectKind::Semidirect),
            };
            let key = JobKey::new(job, n, max_level, max_degree);
            let value = cached(cache, &key, || {
                let page = Page::second(conv, obj, max_level, max_degree).map_err(failure)?;
                Ok(serde_json::to_value(TableRecord::from_page(key.clone(), &page)).expect("record serializes"))
            })?;
            let record: TableRecord = serde_json::from_value(value).map_err(failure)?;
            match format {
                Format::Json => print!("{}", canonical_json(&record)),
                Format::Csv => print!("{}", record.to_csv().map_err(failure)?),
            }
            Ok(OK)
        }
        Command::Obstruction { n, map } => {
            let conv = convention(n)?;
            if n % 2 == 0 || n <= 3 {
                return Err(usage(format!("obstruction needs odd n > 3, got {n}")));
            }
            let which = match map {
                MapArg::Inclusion => ObstructionMap::Inclusion,
                MapArg::Identity => ObstructionMap::Identity,
            };
            let d = conv.bracket_degree();
            let mut key = JobKey::new(JobKind::Map, n, 6, 3 * d);
            key.map = Some(map.to_possible_value().expect("not skipped").get_name().to_string());
            let value = cached(cache, &key, || {
                let r = obstruction_report_for(conv, which).map_err(|e| match e {
                    SpectralError::Precondition(m) => usage(m),
                    e => failure(e),
                })?;
                Ok(serde_json::to_value(r).expect("report serializes"))
            })?;
            print!("{}", canonical_json(&value));
            if value["partial"].as_bool().unwrap_or(true) {
                return Ok(PARTIAL);
            }
            Ok(if value["kernel_not_bracket_ideal"].as_bool() == Some(true) { OK } else { FAILURE })
        }
        Command::Bracket { n, a, b, op } => {
            let conv = convention(n)?;
            let x = OperadElement::parse(conv, &a).map_err(|e| usage(format!("{a}: {e}")))?;
            let y = OperadElement::parse(conv, &b).map_err(|e| usage(format!("{b}: {e}")))?;
            let d = conv.bracket_degree();
            // the output level must lie strictly below the cutoff
            let level = x.arity() + y.arity() + 1;
            let degree = (x.degree() + y.degree()).div_ceil(d).max(1) * d;
            let page = Page::second(conv, ObjectKind::Hochschild, level, degree).map_err(failure)?;
            let ca = page.class_of(&x).map_err(|e| usage(format!("{a}: {e}")))?;
            let cb = page.class_of(&y).map_err(|e| usage(format!("{b}: {e}")))?;
            let c = match op {
                Op::Bracket => hh_bracket(&page, &ca, &cb),
                Op::Star => hh_star(&page, &ca, &cb),
            }
            .map_err(failure)?;
            let rep = page.representative_element(&c).map_err(failure)?;
            let out = json!({
                "n": n,
                "sign_version": conv.sign_version(),
                "op": match op { Op::Bracket => "bracket", Op::Star => "star" },
                "a": a,
                "b": b,
                "p": c.p,
                "q": c.q,
                "zero": c.is_zero(),
                "basis": page.basis_labels(c.p, c.q),
                "coordinates": c.coordinates.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                "representative": rep.to_string(),
            });
            print!("{}", canonical_json(&out));
            Ok(OK)
        }
        Command::Verify {
            target,
            n,
            samples,
            seed,
        } => {
            let report = match target {
                Target::Algebra => {
                    let conv = convention(n)?;
                    algebra_suite(conv, samples.unwrap_or(200), seed).map_err(failure)?
                }
                Target::Geo => {
                    if n < 2 {
                        return Err(usage("--n must be at least 2"));
                    }
                    let samples = samples.unwrap_or(1000);
                    let mut key = JobKey::new(JobKind::GeoSuite, n, 0, 0);
                    key.samples = Some(samples);
                    key.seed = Some(seed);
                    let v = cached(cache, &key, || {
                        let r = property_suite(n as usize, samples, seed, &Tolerances::default()).map_err(failure)?;
                        Ok(serde_json::to_value(r).expect("report serializes"))
                    })?;
                    serde_json::from_value(v).map_err(failure)?
                }
            };
            print!("{}", canonical_json(&report));
            match report.first_failure() {
                Some(c) => {
                    eprintln!("failed: {} (residual {:e}, tolerance {:e})", c.check_name, c.max_residual, c.tolerance);
                    Ok(FAILURE)
                }
                None => Ok(OK),
            }
        }
        Command::Dims { n, max_arity } => {
            let conv = convention(n)?;
            let d = conv.bracket_degree();
            let rows: Vec<Value> = (0..=max_arity)
                .map(|k| {
                    let by_degree: Vec<Value> = (0..k.max(1))
                        .map(|b| json!({"q": b * d, "dim": basis(&conv, k, b * d).len()}))
                        .collect();
                    let total: usize = by_degree.iter().map(|v| v["dim"].as_u64().unwrap_or(0) as usize).sum();
                    json!({"arity": k, "degrees": by_degree, "total": total})
                })
                .collect();
            let out = json!({"n": n, "sign_version": conv.sign_version(), "arities": rows});
            print!("{}", canonical_json(&out));
            Ok(OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
