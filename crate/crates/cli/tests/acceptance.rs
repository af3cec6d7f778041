//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p qharmonic-cli --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path as FsPath, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use qharmonic::corpus::{self, linear_family_params, structure_linear};
use qharmonic::harmonic::NUMERIC_TOL_LAPLACIAN;
use qharmonic::path::random_polyline;
use qharmonic::regularity::{NUMERIC_TOL_FIRST, NUMERIC_TOL_SECOND};
use qharmonic::{
    check_cr, check_cr_complex, check_cr_numeric_at, check_cr_symbolic, check_harmonic, check_harmonic_complex,
    check_second_order_chains, fundamental_theorem_check, integrate_f_dq, parse, path_independence_probe,
    relation_constraints, CheckOptions, Convention, FdSettings, Grid4D, Method, Path, QuatFunction, Quaternion,
    SignedPartial, SolveOptions, Variant,
};

type Q = Quaternion<f64>;
type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

// 1 ------------------------------------------------------------------------

fn relation_set_fidelity() -> Outcome {
    let p = |sign: i8, component: usize, axis: usize| SignedPartial { sign, component, axis };
    #[rustfmt::skip]
    let table = [
        (p(1, 1, 1), p(1, 2, 2)), (p(1, 2, 2), p(1, 3, 3)), (p(1, 3, 3), p(1, 4, 4)),
        (p(1, 2, 1), p(-1, 1, 2)), (p(-1, 1, 2), p(-1, 3, 4)), (p(-1, 3, 4), p(1, 4, 3)),
        (p(1, 3, 1), p(-1, 1, 3)), (p(-1, 1, 3), p(-1, 2, 4)), (p(-1, 2, 4), p(1, 4, 2)),
        (p(1, 4, 1), p(1, 1, 4)), (p(1, 1, 4), p(-1, 2, 3)), (p(-1, 2, 3), p(-1, 3, 2)),
    ];
    let got = relation_constraints();
    ensure(got.len() == 12, || format!("{} constraints", got.len()))?;
    for (k, (c, (l, r))) in got.iter().zip(&table).enumerate() {
        ensure(c.lhs == *l && c.rhs == *r, || format!("row {k}: got {} = {}", c.lhs, c.rhs))?;
    }
    ensure(got[9].lhs.to_string() == "dF4/dx1" && got[9].rhs.to_string() == "dF1/dx4", || {
        "dF4/dx1 = +dF1/dx4 missing".into()
    })?;
    Ok("12 constraints match the reference table".into())
}

// 2 ------------------------------------------------------------------------

fn check_all_modes(f: &QuatFunction, seed: u64) -> Result<(), String> {
    let sym = CheckOptions::<f64>::symbolic(seed);
    let first = CheckOptions::numeric(100, NUMERIC_TOL_FIRST, seed);
    let second = CheckOptions::numeric(100, NUMERIC_TOL_SECOND, seed);
    let lap = CheckOptions::numeric(100, NUMERIC_TOL_LAPLACIAN, seed);
    let reports = [
        ("symbolic first-order", check_cr(f, &sym).map_err(err)?.verdict),
        ("symbolic second-order", check_second_order_chains(f, &sym).map_err(err)?.verdict),
        ("numeric first-order", check_cr(f, &first).map_err(err)?.verdict),
        ("numeric second-order", check_second_order_chains(f, &second).map_err(err)?.verdict),
    ];
    for (name, v) in reports {
        ensure(v.is_pass(), || format!("{name} check failed"))?;
    }
    for (name, o) in [("symbolic", &sym), ("numeric", &lap)] {
        let h = check_harmonic(f, o).map_err(err)?;
        ensure(h.components.len() == 4 && h.verdict.is_pass(), || format!("{name} harmonic check failed"))?;
    }
    Ok(())
}

fn positive_fixtures() -> Outcome {
    let mut fixtures = vec![QuatFunction::identity()];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    fixtures.push(QuatFunction::constant([0.0; 4]));
    for _ in 0..4 {
        fixtures.push(QuatFunction::constant(std::array::from_fn(|_| rng.gen_range(-10.0..10.0))));
    }
    let params = linear_family_params(1000, 2024);
    fixtures.extend(params.iter().map(|&a| structure_linear(a)));
    let failures: Vec<String> = fixtures
        .par_iter()
        .enumerate()
        .filter_map(|(k, f)| check_all_modes(f, 42).err().map(|e| format!("fixture {k}: {e}")))
        .collect();
    ensure(failures.is_empty(), || failures[..failures.len().min(3)].join("; "))?;
    Ok(format!("{} fixtures pass all six checks", fixtures.len()))
}

// 3 ------------------------------------------------------------------------

fn negative_fixture() -> Outcome {
    let q2 = corpus::q_squared();
    let r = check_cr_numeric_at(&q2, Variant::Canonical, &[[1.0f64; 4]], 1e-6, &FdSettings::default()).map_err(err)?;
    let c = r.find("-dF1/dx2", "-dF3/dx4").ok_or("constraint not found")?;
    ensure(!c.passed && (c.residual_max - 2.0).abs() <= 1e-4, || format!("residual {}", c.residual_max))?;
    let s = check_cr_symbolic(&q2, 42).map_err(err)?;
    let cs = s.find("-dF1/dx2", "-dF3/dx4").ok_or("constraint not found")?;
    ensure(!s.verdict.is_pass() && !cs.passed, || "symbolic check passed".into())?;
    Ok(format!(
        "residual {:.9} at (1,1,1,1); symbolic residual {}",
        c.residual_max,
        cs.residual_expr.as_deref().unwrap_or("?")
    ))
}

// 4 ------------------------------------------------------------------------

fn harmonic_implication() -> Outcome {
    let sym = CheckOptions::<f64>::symbolic(42);
    let num = CheckOptions::numeric(100, NUMERIC_TOL_LAPLACIAN, 42);
    let mut passing = Vec::new();
    for (name, f) in corpus::corpus() {
        if !check_cr_symbolic(&f, 42).map_err(err)?.verdict.is_pass() {
            continue;
        }
        let h = check_harmonic(&f, &sym).map_err(err)?;
        ensure(h.verdict.is_pass(), || format!("{name}: symbolic Laplacian not zero"))?;
        let n = check_harmonic(&f, &num).map_err(err)?;
        let worst = n.components.iter().map(|c| c.residual_max).fold(0.0, f64::max);
        ensure(n.verdict.is_pass(), || format!("{name}: numeric |Laplacian| {worst:e}"))?;
        passing.push(name);
    }
    ensure(passing.len() >= 2, || "too few corpus functions pass the first-order check".into())?;
    Ok(format!("{} passing corpus functions are harmonic ({})", passing.len(), passing.join(", ")))
}

// 5 ------------------------------------------------------------------------

fn complex_baseline() -> Outcome {
    let pair = |u: &str, v: &str| (parse(u).unwrap(), parse(v).unwrap());
    let sym = CheckOptions::<f64>::symbolic(42);
    let num = CheckOptions::numeric(100, NUMERIC_TOL_FIRST, 42);
    let lap = CheckOptions::numeric(100, NUMERIC_TOL_LAPLACIAN, 42);
    for (u, v) in [pair("x1^2 - x2^2", "2*x1*x2"), pair("exp(x1)*cos(x2)", "exp(x1)*sin(x2)")] {
        for o in [&sym, &num] {
            ensure(check_cr_complex(&u, &v, o).map_err(err)?.verdict.is_pass(), || {
                format!("({u}, {v}) fails the relations")
            })?;
        }
        for o in [&sym, &lap] {
            ensure(check_harmonic_complex(&u, &v, o).map_err(err)?.verdict.is_pass(), || {
                format!("({u}, {v}) not harmonic")
            })?;
        }
    }
    let (u, v) = pair("x1", "-x2");
    let r = check_cr_complex(&u, &v, &num).map_err(err)?;
    let c = r.constraints.iter().find(|c| c.id == "CR1").ok_or("CR1 missing")?;
    ensure(!c.passed && (c.residual_max - 2.0).abs() <= 1e-6, || format!("conjugate residual {}", c.residual_max))?;
    Ok(format!("z^2 and exp(z) pass; conjugate fails du/dx1 = dv/dx2 with residual {:.9}", c.residual_max))
}

// 6 ------------------------------------------------------------------------

fn gradient_theorem() -> Outcome {
    let corpus = corpus::corpus();
    let mut worst_open = 0.0f64;
    let mut worst_closed = 0.0f64;
    for (k, (name, f)) in corpus.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + k as u64);
        let endpoints: Vec<(Q, Q, Vec<Q>)> = (0..100)
            .map(|_| {
                let mut draw = || Q::from_array(std::array::from_fn(|_| rng.gen_range(-2.0..2.0)));
                let (a, b) = (draw(), draw());
                let loop_pts = random_polyline(a, a, &mut rng);
                (a, b, loop_pts)
            })
            .collect();
        let paths: Vec<(Vec<Q>, Vec<Q>)> = {
            let mut rng = ChaCha8Rng::seed_from_u64(700 + k as u64);
            endpoints.into_iter().map(|(a, b, l)| (random_polyline(a, b, &mut rng), l)).collect()
        };
        let (open, closed) = paths
            .par_iter()
            .map(|(open, closed)| -> Result<(f64, f64), String> {
                let r = fundamental_theorem_check(f, &Path::polyline(open.clone()).map_err(err)?).map_err(err)?;
                let c = fundamental_theorem_check(f, &Path::polyline(closed.clone()).map_err(err)?).map_err(err)?;
                let loop_integral = c.integrals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                Ok((r.max_residual(), loop_integral))
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .fold((0.0f64, 0.0f64), |(a, b), (x, y)| (a.max(x), b.max(y)));
        ensure(open <= 1e-8, || format!("{name}: residual {open:e}"))?;
        ensure(closed <= 1e-9, || format!("{name}: closed loop integral {closed:e}"))?;
        worst_open = worst_open.max(open);
        worst_closed = worst_closed.max(closed);
    }
    Ok(format!(
        "{} functions x 100 paths: max residual {worst_open:.2e}, max loop integral {worst_closed:.2e}",
        corpus.len()
    ))
}

// 7 ------------------------------------------------------------------------

fn quaternionic_quadrature() -> Outcome {
    let r = integrate_f_dq(
        &QuatFunction::identity(),
        &Path::straight(Q::zero(), Q::new(1.0, 1.0, 0.0, 0.0)).map_err(err)?,
        Convention::Left,
    )
    .map_err(err)?;
    let expect = Q::new(0.0, 1.0, 0.0, 0.0);
    ensure((r.value - expect).max_abs() <= 1e-10, || format!("got {}", r.value))?;
    let c = QuatFunction::constant([1.0, 2.0, -1.0, 0.5]);
    let probe = path_independence_probe(
        &c,
        Q::new(0.0, 0.0, 0.0, 0.0),
        Q::new(1.0, -1.0, 2.0, 0.5),
        10,
        42,
        Convention::Left,
        64,
    )
    .map_err(err)?;
    ensure(probe.max_deviation <= 1e-9, || format!("spread {:e}", probe.max_deviation))?;
    Ok(format!("integral of q dq = {}; constant-integrand spread {:.2e}", r.value, probe.max_deviation))
}

// 8 ------------------------------------------------------------------------

fn solve_sor(boundary: &str, n: usize) -> Result<Grid4D<f64>, String> {
    let mut g = Grid4D::cube(n, 0.0, 1.0).map_err(err)?;
    g.apply_boundary(&parse(boundary).map_err(err)?).map_err(err)?;
    let stats = g
        .solve(&SolveOptions { method: Method::Sor, omega: 1.5, tol: 1e-12, ..SolveOptions::default() })
        .map_err(err)?;
    ensure(stats.converged, || format!("{boundary}: not converged after {} sweeps", stats.iterations))?;
    Ok(g)
}

fn solver_exactness() -> Outcome {
    let mut errors = Vec::new();
    for b in ["x1 - x2", "x1^2 - x2^2"] {
        let g = solve_sor(b, 9)?;
        let (max, _) = g.compare_to_reference(&parse(b).unwrap()).map_err(err)?;
        ensure(max <= 1e-9, || format!("{b}: max error {max:e}"))?;
        let (lo, hi) = g.boundary_range();
        let n = g.n();
        for (idx, &v) in g.values().iter().enumerate() {
            let i = g.multi_index(idx);
            if i.iter().all(|&k| k > 0 && k < n - 1) {
                ensure(v >= lo - 1e-12 && v <= hi + 1e-12, || format!("{b}: {v} outside [{lo}, {hi}] at {i:?}"))?;
            }
        }
        errors.push(format!("{b}: {max:.2e}"));
    }
    Ok(format!("max errors {}; maximum principle holds", errors.join(", ")))
}

// 9 ------------------------------------------------------------------------

fn convergence_order() -> Outcome {
    let b = "x1^4 - 6*x1^2*x2^2 + x2^4";
    let reference = parse(b).unwrap();
    let e9 = solve_sor(b, 9)?.compare_to_reference(&reference).map_err(err)?.0;
    let e17 = solve_sor(b, 17)?.compare_to_reference(&reference).map_err(err)?.0;
    let ratio = e9 / e17;
    ensure((3.5..=4.5).contains(&ratio), || format!("ratio {ratio} (errors {e9:e}, {e17:e})"))?;
    Ok(format!("max errors {e9:.4e} (n=9), {e17:.4e} (n=17), ratio {ratio:.4}"))
}

// 10 -----------------------------------------------------------------------

fn fixture(name: &str) -> String {
    let root = FsPath::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    root.join(name).display().to_string()
}

fn cli_examples() -> Vec<(Vec<String>, i32)> {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let f = fixture;
    vec![
        (s(&["check-cr", "--function", &f("identity.qfn"), "--mode", "symbolic"]), 0),
        (s(&["check-cr", "--function", &f("qsquared.qfn"), "--mode", "numeric", "--points", "50"]), 1),
        (s(&["check-cr", "--function", &f("linear1234.qfn"), "--mode", "numeric", "--second-order"]), 0),
        (s(&["check-cr", "--function", &f("identity.qfn"), "--variant", "fueter-left"]), 0),
        (s(&["check-cr", "--function", &f("conjugate.qfn"), "--complex", "--mode", "numeric"]), 1),
        (s(&["check-harmonic", "--function", &f("quartic.qfn")]), 0),
        (s(&["check-harmonic", "--function", &f("qsquared.qfn"), "--mode", "numeric"]), 1),
        (s(&["check-harmonic", "--function", &f("expz.qfn"), "--complex", "--mode", "numeric"]), 0),
        (s(&["integrate", "--function", &f("q.qfn"), "--path", &f("diagonal.path")]), 0),
        (s(&["integrate", "--function", &f("q.qfn"), "--path", &f("helix.path"), "--convention", "right"]), 0),
        (s(&["probe-independence", "--function", &f("constant.qfn"), "--from", "0,0,0,0", "--to", "1,1,1,1"]), 0),
        (
            s(&[
                "solve",
                "--boundary",
                "x1 - x2",
                "--n",
                "9",
                "--box",
                "0,1",
                "--method",
                "sor",
                "--omega",
                "1.5",
                "--reference",
                "x1 - x2",
            ]),
            0,
        ),
        (
            s(&[
                "solve",
                "--boundary",
                "x1^2 - x2^2",
                "--n",
                "7",
                "--box",
                "-1,1",
                "--method",
                "jacobi",
                "--tol",
                "1e-9",
            ]),
            0,
        ),
    ]
}

fn run_cli(args: &[String], out: &FsPath, dump: Option<&FsPath>) -> Result<(i32, Vec<u8>, Vec<u8>), String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qharmonic"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(d) = dump {
        cmd.arg("--dump").arg(d);
    }
    let o = cmd.output().map_err(err)?;
    let code = o.status.code().unwrap_or(-1);
    let json = std::fs::read(out)
        .map_err(|e| format!("{}: no report ({e}); stderr: {}", args[0], String::from_utf8_lossy(&o.stderr)))?;
    let dumped = dump.map(std::fs::read).transpose().map_err(err)?.unwrap_or_default();
    Ok((code, json, dumped))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let examples = cli_examples();
    for (k, (args, expected)) in examples.iter().enumerate() {
        let dump =
            |tag: &str| -> Option<PathBuf> { (args[0] == "solve").then(|| dir.path().join(format!("{k}-{tag}.bin"))) };
        let (c1, j1, d1) = run_cli(args, &dir.path().join(format!("{k}-a.json")), dump("a").as_deref())?;
        let (c2, j2, d2) = run_cli(args, &dir.path().join(format!("{k}-b.json")), dump("b").as_deref())?;
        ensure(c1 == *expected && c2 == *expected, || {
            format!("`{}`: exit {c1}/{c2}, expected {expected}", args.join(" "))
        })?;
        ensure(j1 == j2, || format!("`{}`: reports differ", args.join(" ")))?;
        ensure(d1 == d2, || format!("`{}`: grid dumps differ", args.join(" ")))?;
        let v: serde_json::Value = serde_json::from_slice(&j1).map_err(err)?;
        for key in ["tool_version", "command", "input_files", "seed", "mode", "verdict", "notes"] {
            ensure(v.get(key).is_some(), || format!("`{}`: report lacks `{key}`", args.join(" ")))?;
        }
    }
    Ok(format!("{} CLI examples, two runs each, byte-identical reports", examples.len()))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 10] = [
        ("relation-set fidelity", relation_set_fidelity, Duration::from_secs(1)),
        ("positive fixtures", positive_fixtures, Duration::from_secs(30)),
        ("negative fixture", negative_fixture, Duration::from_secs(1)),
        ("harmonic implication on corpus", harmonic_implication, Duration::from_secs(10)),
        ("2D baseline", complex_baseline, Duration::from_secs(1)),
        ("gradient theorem", gradient_theorem, Duration::from_secs(10)),
        ("quaternionic quadrature", quaternionic_quadrature, Duration::from_secs(5)),
        ("solver exactness", solver_exactness, Duration::from_secs(60)),
        ("solver convergence order", convergence_order, Duration::from_secs(600)),
        ("determinism", determinism, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (k, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let result = result.and_then(|d| {
            if elapsed <= *limit {
                Ok(d)
            } else {
                Err(format!("{d}; took {elapsed:.2?}, limit {limit:?}"))
            }
        });
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{elapsed:.2?}]: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{elapsed:.2?}]: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
