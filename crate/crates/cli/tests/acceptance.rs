//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines are always shown; exits nonzero if any criterion fails.

use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use knotops::cosimplicial::{hochschild_object, inclusion_map, semidirect_object, ObjectKind};
use knotops::geo_operads::{property_suite, Tolerances};
use knotops::poisson_operad::Convention;
use knotops::ratlin::rat;
use knotops::spectral::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<String, String> {
    let t = start.elapsed();
    check(t < limit, format!("took {t:.2?}, limit {limit:?}"))?;
    Ok(format!("{t:.2?}"))
}

fn e(err: impl std::fmt::Display) -> String {
    err.to_string()
}

fn hochschild(n: u32) -> Result<Page, String> {
    let c = Convention::new(n).map_err(e)?;
    Page::second(c, ObjectKind::Hochschild, 6, 3 * c.bracket_degree()).map_err(e)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    for n in [5, 7] {
        let page = hochschild(n)?;
        let d = (n - 1) as usize;
        check(page.dim(2, d) == 1, format!("n = {n}: dim E2(2,{d}) = {}", page.dim(2, d)))?;
        check(page.basis_labels(2, d) == ["{1,2}"], format!("n = {n}: basis {:?}", page.basis_labels(2, d)))?;
        let alpha = page.class_of_expr("{1,2}").map_err(e)?;
        check(!alpha.is_zero(), "alpha is zero")?;
    }
    within(start, Duration::from_secs(10))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    for n in [5, 7] {
        let page = hochschild(n)?;
        let q = 2 * (n - 1) as usize;
        let beta = page.class_of_expr("{1,3}·{2,4}").map_err(e)?;
        let alpha2 = page.class_of_expr("{1,2}·{3,4}").map_err(e)?;
        check(page.independent(&[&beta, &alpha2]), format!("n = {n}: beta, alpha^2 dependent"))?;
        check(page.dim(4, q) == 2, format!("n = {n}: dim E2(4,{q}) = {}", page.dim(4, q)))?;
        check(page.entry(4, q).is_some_and(|x| !x.partial()), "entry is partial")?;
    }
    within(start, Duration::from_secs(120))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let page = hochschild(5)?;
    let alpha = page.class_of_expr("{1,2}").map_err(e)?;
    let beta = page.class_of_expr("{1,3}·{2,4}").map_err(e)?;
    let alpha2 = page.class_of_expr("{1,2}·{3,4}").map_err(e)?;
    let ab = hh_bracket(&page, &alpha, &beta).map_err(e)?;
    let aa2 = hh_bracket(&page, &alpha, &alpha2).map_err(e)?;
    check((ab.p, ab.q) == (5, 12), format!("[alpha,beta] in ({}, {})", ab.p, ab.q))?;
    check(!ab.is_zero(), "[alpha,beta] = 0")?;
    check(!aa2.is_zero(), "[alpha,alpha^2] = 0")?;
    check(page.independent(&[&ab, &aa2]), "[alpha,beta], [alpha,alpha^2] dependent")?;
    let aa = hh_bracket(&page, &alpha, &alpha).map_err(e)?;
    let star = hh_star(&page, &alpha, &aa).map_err(e)?;
    let diff = page.combine(&[(rat(1), &aa2), (rat(-2), &star)]).map_err(e)?;
    check(diff.is_zero(), "[alpha,alpha^2] != 2 alpha*[alpha,alpha]")?;
    within(start, Duration::from_secs(600))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let n = 5;
    let c = Convention::new(n).map_err(e)?;
    let (p, q) = (6, 3 * c.bracket_degree());
    let hp = Page::second(c, ObjectKind::Hochschild, p, q).map_err(e)?;
    let sp = Page::second(c, ObjectKind::Semidirect, p, q).map_err(e)?;
    for t in 1..=(2 * n as i64 - 7) {
        let r = total_degree_report(&sp, t);
        check(r.complete, format!("total degree {t} not fully computed"))?;
        check(r.total_dim() == 0, format!("total degree {t} has dim {}", r.total_dim()))?;
    }
    let h = hochschild_object(c, p, q).map_err(e)?;
    let s = semidirect_object(c, p, q).map_err(e)?;
    let f = induced_e2(&inclusion_map(&h, &s).map_err(e)?, &hp, &sp).map_err(e)?;
    let alpha = hp.class_of_expr("{1,2}").map_err(e)?;
    let beta = hp.class_of_expr("{1,3}·{2,4}").map_err(e)?;
    let ab = hh_bracket(&hp, &alpha, &beta).map_err(e)?;
    check(f.apply(&alpha, &hp, &sp).map_err(e)?.is_zero(), "p(alpha) != 0")?;
    check(!f.apply(&beta, &hp, &sp).map_err(e)?.is_zero(), "p(beta) = 0")?;
    check(!f.apply(&ab, &hp, &sp).map_err(e)?.is_zero(), "p([alpha,beta]) = 0")?;
    let report = obstruction_report(c).map_err(e)?;
    check(report.kernel_not_bracket_ideal && !report.partial, "obstruction verdict")?;
    within(start, Duration::from_secs(900))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut checks = 0;
    for n in 4..=7 {
        let report = algebra_suite(Convention::new(n).map_err(e)?, 200, 1).map_err(e)?;
        if let Some(f) = report.first_failure() {
            return Err(format!("n = {n}: {} ({} failures)", f.check_name, f.max_residual));
        }
        checks += report.checks.len();
    }
    Ok(format!("{checks} checks, {:.2?}", start.elapsed()))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let tol = Tolerances::default();
    for n in 3..=5 {
        let report = property_suite(n, 1000, 7, &tol).map_err(e)?;
        if let Some(f) = report.first_failure() {
            return Err(format!("n = {n}: {} residual {:e} > {:e}", f.check_name, f.max_residual, f.tolerance));
        }
        let get = |name: &str| report.checks.iter().find(|c| c.check_name == name).map(|c| c.max_residual);
        for name in ["bn_associativity_sequential", "framed_associativity_parallel", "framed_equivariance", "i_n_operad_map"] {
            check(get(name).is_some_and(|r| r <= 1e-9), format!("n = {n}: {name}"))?;
        }
        check(get("labeled_cosimplicial_identities").is_some_and(|r| r <= 1e-12), "labeled identities")?;
        check(get("insertion_oracle_convergence").is_some_and(|r| r <= 0.1), "oracle ratio outside [0.4, 0.6]")?;
    }
    within(start, Duration::from_secs(60))
}

fn knotops(args: &[&str], cache: Option<&Path>, threads: Option<usize>) -> Result<Output, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_knotops"));
    cmd.args(args).env_remove("KNOTOPS_CACHE");
    match cache {
        Some(dir) => cmd.arg("--cache-dir").arg(dir),
        None => cmd.arg("--no-cache"),
    };
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t.to_string());
    }
    let out = cmd.output().map_err(e)?;
    check(out.status.success(), format!("{args:?} exited with {:?}", out.status.code()))?;
    Ok(out)
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(e)?;
    let jobs: [&[&str]; 4] = [
        &["e2", "hochschild", "--n", "5", "--max-level", "6", "--max-degree", "16"],
        &["e2", "semidirect", "--n", "5", "--format", "csv"],
        &["obstruction", "--n", "5"],
        &["verify", "geo", "--n", "4", "--samples", "200", "--seed", "3"],
    ];
    for args in jobs {
        let one = knotops(args, None, Some(1))?;
        let many = knotops(args, None, Some(4))?;
        check(one.stdout == many.stdout, format!("{args:?}: output depends on worker count"))?;
        let first = knotops(args, Some(dir.path()), None)?;
        let second = knotops(args, Some(dir.path()), None)?;
        check(first.stdout == one.stdout, format!("{args:?}: cached run differs"))?;
        check(first.stdout == second.stdout, format!("{args:?}: second run differs"))?;
        check(String::from_utf8_lossy(&second.stderr).contains("cache hit"), format!("{args:?}: no cache hit"))?;
    }
    // a tampered cache file is detected and recomputed
    let args = jobs[0];
    let reference = knotops(args, None, None)?.stdout;
    for entry in std::fs::read_dir(dir.path()).map_err(e)? {
        let path = entry.map_err(e)?.path();
        let text = std::fs::read_to_string(&path).map_err(e)?;
        std::fs::write(&path, text.replacen("\"dim\": 1", "\"dim\": 7", 1)).map_err(e)?;
    }
    let again = knotops(args, Some(dir.path()), None)?;
    check(again.stdout == reference, "tampered cache served")?;
    check(String::from_utf8_lossy(&again.stderr).contains("recomputing"), "no corruption warning")?;
    Ok(format!("{:.2?}", start.elapsed()))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 alpha spans E2(2, n-1) for n = 5, 7", criterion_1),
        ("2 beta and alpha^2 span E2(4, 2n-2)", criterion_2),
        ("3 [alpha,beta], [alpha,alpha^2] = 2 alpha*[alpha,alpha] in E2(5, 3n-3)", criterion_3),
        ("4 kernel of E2(p) is not a bracket ideal at n = 5", criterion_4),
        ("5 exact structural suite, n = 4..7", criterion_5),
        ("6 geometric suite, n = 3..5, 1000 samples", criterion_6),
        ("7 byte-identical tables, worker counts and cache", criterion_7),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(info) => println!("PASS  criterion {name} ({info})"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
