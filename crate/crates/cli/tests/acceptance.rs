//! Acceptance suite: one PASS/FAIL line per criterion, then a nonzero exit if any failed.
//!
//! Reference values come from closed forms written out here, not from the library.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bregman_bound::bounds::{
    classify_convexity, estimate_c_min, local_expansion_check, verify_theorem1,
};
use bregman_bound::loss::{self, by_name, scalar_fn, LOSS_NAMES};
use bregman_bound::optimize::solve;
use bregman_bound::oracle::load_fixtures;
use bregman_bound::{
    bregman_binary, half_squared_error, kl_generalized, loss_from_weight, pinsker_rhs,
    ProbVector, ProperLoss, WeightSpec,
};
use bregman_bound_cli::output::{write_csv, Row};
use bregman_bound_cli::{run, Command, RunConfig};

const SEED: u64 = 42;
const SAMPLES: usize = 100_000;

type Criterion = Box<dyn Fn() -> Verdict>;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

// Closed forms of the loss table.

struct TableLoss {
    name: &'static str,
    l0: fn(f64) -> f64,
    l1: fn(f64) -> f64,
    entropy: fn(f64) -> f64,
    divergence: fn(f64, f64) -> f64,
    /// `None` for the point-mass weight of the 0-1 loss.
    weight: Option<fn(f64) -> f64>,
}

fn table() -> Vec<TableLoss> {
    vec![
        TableLoss {
            name: "zero-one",
            l0: |q| if q >= 0.5 { 1.0 } else { 0.0 },
            l1: |q| if q < 0.5 { 1.0 } else { 0.0 },
            entropy: |p| if p < 0.5 { p } else { 1.0 - p },
            divergence: |p, q| {
                if p < 0.5 && q >= 0.5 {
                    1.0 - 2.0 * p
                } else if p >= 0.5 && q < 0.5 {
                    2.0 * p - 1.0
                } else {
                    0.0
                }
            },
            weight: None,
        },
        TableLoss {
            name: "quadratic",
            l0: |q| q * q,
            l1: |q| (1.0 - q) * (1.0 - q),
            entropy: |p| p * (1.0 - p),
            divergence: |p, q| (p - q) * (p - q),
            weight: Some(|_| 2.0),
        },
        TableLoss {
            name: "log",
            l0: |q| (1.0 / (1.0 - q)).ln(),
            l1: |q| (1.0 / q).ln(),
            entropy: |p| p * (1.0 / p).ln() + (1.0 - p) * (1.0 / (1.0 - p)).ln(),
            divergence: |p, q| p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln(),
            weight: Some(|p| 1.0 / (p * (1.0 - p))),
        },
        TableLoss {
            name: "boosting",
            l0: |q| 2.0 * (q / (1.0 - q)).sqrt(),
            l1: |q| 2.0 * ((1.0 - q) / q).sqrt(),
            entropy: |p| 4.0 * (p * (1.0 - p)).sqrt(),
            divergence: |p, q| {
                2.0 * (p * ((1.0 - q) / q).sqrt() + (1.0 - p) * (q / (1.0 - q)).sqrt())
                    - 4.0 * (p * (1.0 - p)).sqrt()
            },
            weight: Some(|p| (p * (1.0 - p)).powf(-1.5)),
        },
    ]
}

fn table_spec(t: &TableLoss) -> WeightSpec {
    match t.weight {
        Some(w) => WeightSpec::from_density(scalar_fn(w), None),
        None => WeightSpec::point_mass(0.5, 2.0),
    }
}

fn unit_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

/// Largest deviation of `loss` from the table row over l0, l1, G, D and w.
fn table_deviation(loss: &ProperLoss, t: &TableLoss) -> f64 {
    let grid = unit_grid();
    let mut worst = 0.0f64;
    for &q in &grid {
        worst = worst
            .max((loss.l0(q) - (t.l0)(q)).abs())
            .max((loss.l1(q) - (t.l1)(q)).abs())
            .max((loss.entropy(q) - (t.entropy)(q)).abs());
        if let Some(w) = t.weight {
            let got = loss.weight(q).unwrap_or(f64::NAN);
            worst = worst.max(((got - w(q)) / w(q).max(1.0)).abs());
        }
    }
    for &p in grid.iter().step_by(7) {
        for &q in grid.iter().step_by(3) {
            worst = worst.max((bregman_binary(loss, p, q) - (t.divergence)(p, q)).abs());
        }
    }
    if t.weight.is_none() {
        let atoms = &loss.weight_spec().atoms;
        let ok = atoms.len() == 1 && atoms[0].at == 0.5 && atoms[0].mass == 2.0;
        if !ok {
            worst = f64::INFINITY;
        }
    }
    if worst.is_nan() {
        f64::INFINITY
    } else {
        worst
    }
}

fn criterion_1() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for t in table() {
        let analytic = by_name(t.name).expect("catalog loss");
        let built = match loss_from_weight(format!("{}-built", t.name), table_spec(&t)) {
            Ok(l) => l,
            Err(e) => return verdict(false, format!("{}: construction failed: {e}", t.name)),
        };
        let a = table_deviation(&analytic, &t);
        let b = table_deviation(&built, &t);
        ok &= a <= 1e-8 && b <= 1e-8;
        parts.push(format!("{} analytic {a:.1e} built {b:.1e}", t.name));
    }
    verdict(ok, parts.join(", "))
}

/// `w(1/2)` from closed forms, for the losses expected to be convex in `q`.
fn half_weight(name: &str) -> Option<f64> {
    match name {
        "quadratic" => Some(2.0),
        "log" => Some(1.0 / 0.25),
        // (c (1 - c))^(-1/2) at 1/2
        "arcsine" => Some(0.25f64.powf(-0.5)),
        _ => None,
    }
}

fn criterion_2() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    let mut convex = Vec::new();
    for name in LOSS_NAMES {
        let l = by_name(name).expect("listed loss");
        if !l.is_smooth() {
            continue;
        }
        match classify_convexity(&l, 200) {
            Ok(r) if r.is_convex => convex.push(l),
            Ok(_) => parts.push(format!("{name} not convex, skipped")),
            Err(e) => return verdict(false, format!("{name}: {e}")),
        }
    }
    let names: Vec<&str> = convex.iter().map(|l| l.name()).collect();
    if names != ["quadratic", "log", "arcsine"] {
        ok = false;
        parts.push(format!("unexpected convex set {names:?}"));
    }
    for l in &convex {
        let Some(w) = half_weight(l.name()) else {
            ok = false;
            parts.push(format!("{}: no reference weight", l.name()));
            continue;
        };
        let c = 0.5 * w + 1e-6;
        let t = Instant::now();
        let r = verify_theorem1(l, c, 200);
        let dt = t.elapsed();
        match r {
            Ok(r) => {
                ok &= r.violation_count == 0 && dt < Duration::from_secs(10);
                parts.push(format!(
                    "{} C={c} violations {} in {:.2}s",
                    l.name(),
                    r.violation_count,
                    dt.as_secs_f64()
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{}: {e}", l.name()));
            }
        }
    }
    verdict(ok, parts.join(", "))
}

// Seeded sample sets, drawn here rather than through the library sampler.

fn cube_pairs() -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..SAMPLES)
        .map(|_| {
            let mut v = || (0..3).map(|_| rng.random::<f64>()).collect::<Vec<_>>();
            (v(), v())
        })
        .collect()
}

fn simplex_pairs() -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut draw = || {
        // normalized exponentials are uniform on the simplex
        let e: Vec<f64> = (0..3).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|x| x / s).collect::<Vec<_>>()
    };
    (0..SAMPLES).map(|_| (draw(), draw())).collect()
}

fn ref_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            let t = if a > 0.0 { a * (a / b).ln() } else { 0.0 };
            t - a + b
        })
        .sum()
}

fn ref_half_sq(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

fn ref_pinsker(p: &[f64], q: &[f64]) -> f64 {
    let tv: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    0.5 * tv * tv
}

fn vectors(p: &[f64], q: &[f64], simplex: bool) -> (ProbVector, ProbVector) {
    let make = |v: &[f64]| {
        if simplex {
            ProbVector::simplex(v.to_vec())
        } else {
            ProbVector::cube(v.to_vec())
        }
        .expect("sampled vector is valid")
    };
    (make(p), make(q))
}

/// Violations of `kl >= rhs - 1e-12`, and the largest gap between library and reference
/// values of both sides.
fn count_below(
    pairs: &[(Vec<f64>, Vec<f64>)],
    simplex: bool,
    rhs: fn(&ProbVector, &ProbVector) -> bregman_bound::Result<f64>,
    reference: fn(&[f64], &[f64]) -> f64,
) -> (usize, f64) {
    let mut violations = 0;
    let mut gap = 0.0f64;
    for (p, q) in pairs {
        let (a, b) = vectors(p, q, simplex);
        let kl = kl_generalized(&a, &b).unwrap_or(f64::NAN);
        let r = rhs(&a, &b).unwrap_or(f64::NAN);
        gap = gap
            .max((kl - ref_kl(p, q)).abs())
            .max((r - reference(p, q)).abs());
        if !(kl >= r - 1e-12) {
            violations += 1;
        }
    }
    (violations, gap)
}

fn criterion_3() -> Verdict {
    let (vc, gc) = count_below(&cube_pairs(), false, half_squared_error, ref_half_sq);
    let (vs, gs) = count_below(&simplex_pairs(), true, half_squared_error, ref_half_sq);
    let gap = gc.max(gs);
    verdict(
        vc == 0 && vs == 0 && gap <= 1e-12,
        format!("cube violations {vc}, simplex violations {vs}, library vs reference {gap:.1e}"),
    )
}

fn criterion_4() -> (Verdict, String) {
    let cube = cube_pairs();
    let simplex = simplex_pairs();
    let (vs, gs) = count_below(&simplex, true, pinsker_rhs, ref_pinsker);
    let mut ordering = 0;
    for (set, is_simplex) in [(&cube, false), (&simplex, true)] {
        for (p, q) in set.iter() {
            let (a, b) = vectors(p, q, is_simplex);
            let pin = pinsker_rhs(&a, &b).unwrap_or(f64::NAN);
            let half = half_squared_error(&a, &b).unwrap_or(f64::NAN);
            if !(pin >= half - 1e-15) {
                ordering += 1;
            }
        }
    }
    // Pinsker's inequality concerns probability vectors; on the cube it is reported only
    let (vc, _) = count_below(&cube, false, pinsker_rhs, ref_pinsker);
    let note = format!(
        "cube pairs violating Pinsker (unnormalized, outside its scope): {vc} of {SAMPLES}, \
         e.g. p=(1,1,1), q=(1/2,1/2,1/2): KL {:.4} < {:.4}",
        ref_kl(&[1.0; 3], &[0.5; 3]),
        ref_pinsker(&[1.0; 3], &[0.5; 3])
    );
    (
        verdict(
            vs == 0 && ordering == 0 && gs <= 1e-12,
            format!(
                "simplex Pinsker violations {vs}, ordering violations {ordering} on both sets, \
                 library vs reference {gs:.1e}"
            ),
        ),
        note,
    )
}

fn criterion_5() -> Verdict {
    let sq = |p: f64, q: f64| (p - q) * (p - q);
    let got = estimate_c_min(&sq, 200);
    // exhaustive scan of the same interior grid
    let mut want = f64::NEG_INFINITY;
    for i in 1..=200 {
        let p = i as f64 / 201.0;
        for j in (1..=200).filter(|&j| j != i) {
            let q = j as f64 / 201.0;
            let kl = p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
            want = want.max(sq(p, q) / kl);
        }
    }
    let threshold = 0.5 * 2.0;
    verdict(
        (got - 0.5).abs() <= 0.02 && got <= threshold && (got - want).abs() <= 1e-9,
        format!("c_min {got:.6} (scan {want:.6}), threshold {threshold}"),
    )
}

fn criterion_6() -> Verdict {
    let mut ok = true;
    let mut worst = 0.0f64;
    for name in ["log", "quadratic"] {
        let l = by_name(name).expect("catalog loss");
        for p in [0.1, 0.3, 0.5] {
            for dp in [1e-2, 1e-3, 1e-4] {
                match local_expansion_check(&l, p, dp) {
                    Ok(e) => {
                        let off = (e.ratio() - 1.0).abs();
                        worst = worst.max(off / (10.0 * dp));
                        ok &= off <= 10.0 * dp && e.lhs <= e.rhs;
                    }
                    Err(_) => ok = false,
                }
            }
        }
    }
    verdict(
        ok,
        format!("largest |ratio - 1| / (10 dp) = {worst:.3}; lhs <= rhs at all 18 points"),
    )
}

// CSV round trip: the figure criteria read the CLI's own output back.

#[derive(Debug)]
struct CsvRow {
    experiment: String,
    sweep_value: f64,
    divergence: String,
    constant: f64,
    value: f64,
    bounded: f64,
    q_star: Vec<f64>,
}

fn csv_of(rows: &[Row]) -> Vec<CsvRow> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("csv");
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    reader
        .records()
        .map(|r| {
            let r = r.expect("record");
            let num = |i: usize| r[i].parse::<f64>().expect("number");
            CsvRow {
                experiment: r[0].to_string(),
                sweep_value: num(2),
                divergence: r[3].to_string(),
                constant: num(4),
                value: num(5),
                bounded: num(6),
                q_star: r[7].split(';').map(|x| x.parse().expect("q")).collect(),
            }
        })
        .collect()
}

fn ref_tv(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum()
}

fn ref_chi2(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b) / b).sum()
}

/// `g''(1)` of the shipped generators, from their closed forms.
fn ref_curvature(name: &str) -> Option<f64> {
    match name {
        "squared" => Some(2.0),
        "xlogx" => Some(1.0),
        "mahalanobis-0.5" => Some(1.0),
        "mahalanobis-2" => Some(4.0),
        "power-1.5" => Some(0.75),
        _ => None,
    }
}

fn by_div<'a>(rows: &'a [CsvRow], experiment: &str, divergence: &str) -> Vec<&'a CsvRow> {
    rows.iter()
        .filter(|r| r.experiment == experiment && r.divergence == divergence)
        .collect()
}

const P0: [f64; 3] = [0.25, 0.5, 0.25];

fn criterion_7() -> Verdict {
    let t = Instant::now();
    let mut config = RunConfig::new(Command::ExpFixedExpectation);
    config.p = P0.to_vec();
    config.support = vec![-1.0, 0.0, 1.0];
    let out = match run(&config) {
        Ok(o) => o,
        Err(e) => return verdict(false, format!("run failed: {e}")),
    };
    let rows = csv_of(&out.rows);
    let dt = t.elapsed();
    let exp = "fixed-expectation";
    let mut names: Vec<&str> = rows.iter().map(|r| r.divergence.as_str()).collect();
    names.sort();
    names.dedup();
    let mut ok = names.len() == 11;
    let (mut zero, mut asym, mut dominance, mut constants) = (0.0f64, 0.0f64, 0usize, 0usize);
    let kl = by_div(&rows, exp, "kl");
    for name in &names {
        let curve = by_div(&rows, exp, name);
        for r in &curve {
            if r.sweep_value == 0.0 {
                zero = zero.max(r.value);
            }
            if let Some(m) = curve.iter().find(|s| s.sweep_value == -r.sweep_value) {
                asym = asym.max((r.value - m.value).abs());
            }
        }
        let base = name.trim_start_matches("plugin:");
        if *name != "kl" {
            let want = ref_curvature(base).map(|c| c + 1e-6);
            if want.is_none_or(|w| curve.iter().any(|r| (r.constant - w).abs() > 1e-12)) {
                constants += 1;
            }
            for (k, r) in kl.iter().zip(&curve) {
                if k.value < r.bounded - 1e-10 {
                    dominance += 1;
                }
            }
        }
    }
    ok &= zero <= 1e-8 && asym <= 1e-8 && dominance == 0 && constants == 0;
    ok &= kl.len() == 19 && dt < Duration::from_secs(30);
    verdict(
        ok,
        format!(
            "{} curves, max value at c=0 {zero:.1e}, max asymmetry {asym:.1e}, \
             dominance failures {dominance}, constant mismatches {constants}, {:.2}s",
            names.len(),
            dt.as_secs_f64()
        ),
    )
}

fn fixtures_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/oracle.jsonl")
}

fn criterion_8() -> Verdict {
    let t = Instant::now();
    let mut config = RunConfig::new(Command::ExpEpsConstraint);
    config.p = P0.to_vec();
    config.support = vec![-1.0, 0.0, 1.0];
    let out = match run(&config) {
        Ok(o) => o,
        Err(e) => return verdict(false, format!("run failed: {e}")),
    };
    let rows = csv_of(&out.rows);
    let mut parts = Vec::new();
    let mut ok = true;
    for (tag, reference) in [("tv", ref_tv as fn(&[f64], &[f64]) -> f64), ("chi2", ref_chi2)] {
        let exp = format!("eps-constraint:{tag}");
        let (mut decreases, mut slack, mut chain, mut plug) = (0usize, 0.0f64, 0usize, 0usize);
        let kl = by_div(&rows, &exp, "kl");
        let mut names: Vec<&str> = rows
            .iter()
            .filter(|r| r.experiment == exp)
            .map(|r| r.divergence.as_str())
            .collect();
        names.sort();
        names.dedup();
        for name in &names {
            let curve = by_div(&rows, &exp, name);
            if name.starts_with("plugin:") {
                let minimized = by_div(&rows, &exp, name.trim_start_matches("plugin:"));
                for ((k, pl), mn) in kl.iter().zip(&curve).zip(&minimized) {
                    // min KL >= KL at q_KL >= D_g(p || q_KL) / C, and q_KL is feasible
                    if k.value < pl.bounded - 1e-10 || mn.value > pl.value + 1e-10 {
                        chain += 1;
                    }
                    if pl.q_star.iter().zip(&k.q_star).any(|(a, b)| a != b) {
                        plug += 1;
                    }
                }
                continue;
            }
            for w in curve.windows(2) {
                if w[1].value < w[0].value - 1e-12 {
                    decreases += 1;
                }
            }
            for r in &curve {
                slack = slack.max((reference(&P0, &r.q_star) - r.sweep_value).abs());
            }
        }
        let squared_plugin = by_div(&rows, &exp, "plugin:squared");
        let mut plug_gap = 0.0f64;
        for r in &squared_plugin {
            let d: f64 = P0.iter().zip(&r.q_star).map(|(a, b)| (a - b) * (a - b)).sum();
            plug_gap = plug_gap.max((d - r.value).abs());
        }
        let good = names.len() == 11
            && kl.len() == 20
            && decreases == 0
            && slack <= 1e-6
            && chain == 0
            && plug == 0
            && !squared_plugin.is_empty()
            && plug_gap <= 1e-9;
        ok &= good;
        parts.push(format!(
            "{tag}: decreases {decreases}, max |D - eps| {slack:.1e}, chain failures {chain}"
        ));
    }
    let fixtures = match load_fixtures(&fixtures_path()) {
        Ok(f) => f,
        Err(e) => return verdict(false, format!("fixtures: {e}")),
    };
    let mut worst = 0.0f64;
    let mut mismatches = 0;
    for f in &fixtures {
        let got = f
            .inputs
            .to_problem()
            .and_then(|p| solve(&p))
            .map(|r| r.objective_value)
            .unwrap_or(f64::NAN);
        let diff = got - f.expected_value;
        worst = worst.max(diff.abs());
        if !(diff.abs() <= 1e-5) {
            mismatches += 1;
        }
    }
    let dt = t.elapsed();
    ok &= mismatches == 0 && fixtures.len() == 21 && dt < Duration::from_secs(120);
    parts.push(format!(
        "fixtures {} worst |solver - oracle| {worst:.1e}, {:.2}s",
        fixtures.len(),
        dt.as_secs_f64()
    ));
    verdict(ok, parts.join("; "))
}

fn criterion_9() -> Verdict {
    match verify_theorem1(&loss::quadratic(), 0.4, 200) {
        Ok(r) => verdict(
            r.violation_count >= 1,
            format!("quadratic at C = 0.4: {} violations", r.violation_count),
        ),
        Err(e) => verdict(false, e.to_string()),
    }
}

fn main() -> ExitCode {
    // `cargo test -- --list` and friends expect a quiet, successful exit
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let (c4, note4) = criterion_4();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 loss table vs weight construction", Box::new(criterion_1)),
        ("2 binary bound at C = w(1/2)/2", Box::new(criterion_2)),
        ("3 KL >= half squared error", Box::new(criterion_3)),
        ("5 empirical constant of the quadratic loss", Box::new(criterion_5)),
        ("6 local expansion against Fisher information", Box::new(criterion_6)),
        ("7 fixed expectation sweep", Box::new(criterion_7)),
        ("8 divergence floor sweep and fixtures", Box::new(criterion_8)),
        ("9 negative control", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    let mut report = |label: &str, v: &Verdict, dt: Option<Duration>| {
        let status = if v.ok { "PASS" } else { "FAIL" };
        let time = dt.map(|d| format!(" [{:.2}s]", d.as_secs_f64())).unwrap_or_default();
        println!("{status} criterion {label}: {}{time}", v.detail);
        if !v.ok {
            failed += 1;
        }
    };
    for (i, (label, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = f();
        report(label, &v, Some(t.elapsed()));
        if i == 2 {
            report("4 Pinsker on the simplex and ordering", &c4, None);
            println!("note: {note4}");
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
