//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use gmfuse::agg::{
    check_monotone_at, owa, DirectionVector, MonotonicityOutcome, UnitVector, WeightVector,
};
use gmfuse::data::{load_dataset, Dataset};
use gmfuse::ensemble::{
    classify_fusion, classify_gm, Combiner, ScoreMatrix, StaticRule, TieBreaker,
};
use gmfuse::eval::{
    friedman_test, nemenyi_posthoc, run_experiment_on, win_draw_loss, write_results_csv,
    ExperimentConfig, Outcome, ResultTable,
};
use gmfuse::gm::{
    gm_apply, h_theta_apply, weights_calc, GmCombiner, RatioFamily, ReferentialSelector,
};
use gmfuse::props::{run_suite, PropsConfig};
use gmfuse::seed::derive_rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn matrix(rows: &[[f64; 2]]) -> ScoreMatrix {
    ScoreMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).expect("valid matrix")
}

fn example_h_arith() -> Check {
    let scores = matrix(&[[0.9, 0.1], [0.3, 0.7], [0.5, 0.5]]);
    let p = classify_gm(
        &scores,
        &GmCombiner::new(ReferentialSelector::ArithmeticMean),
        &mut TieBreaker::lowest_index(),
    );
    let calcs = p.class_weights.as_ref().ok_or("no weight trace")?;
    let alphas: Vec<f64> = calcs.iter().map(|c| c.referential).collect();
    ensure(
        close(&alphas, &[17.0 / 30.0, 13.0 / 30.0], 1e-9),
        format!("alpha = {alphas:?}"),
    )?;
    for c in calcs {
        ensure(
            close(c.weights.as_slice(), &[0.25, 0.30, 0.45], 1e-9),
            format!("weights = {:?}", c.weights),
        )?;
    }
    ensure(
        close(&p.fused_scores, &[0.54, 0.46], 1e-9),
        format!("Value = {:?}", p.fused_scores),
    )?;
    ensure(
        p.class_index == 0,
        format!("decided class index {}", p.class_index),
    )?;
    Ok(format!(
        "Value = ({:.6}, {:.6}), class 1",
        p.fused_scores[0], p.fused_scores[1]
    ))
}

fn example_min_fusion() -> Check {
    let scores = matrix(&[[0.45, 0.55], [0.3, 0.7], [0.5, 0.5]]);
    let p = classify_fusion(&scores, StaticRule::Min, &mut TieBreaker::lowest_index());
    ensure(
        p.fused_scores == [0.3, 0.5],
        format!("Value = {:?}", p.fused_scores),
    )?;
    ensure(
        p.class_index == 1,
        format!("decided class index {}", p.class_index),
    )?;
    Ok("Value = (0.3, 0.5), class 2".into())
}

fn example_owa() -> Check {
    let w = WeightVector::new(vec![0.2, 0.45, 0.35]).map_err(|e| e.to_string())?;
    let x = UnitVector::new(vec![0.7, 0.0, 0.3]).map_err(|e| e.to_string())?;
    let v = owa(&w, &x).map_err(|e| e.to_string())?;
    ensure((v - 0.275).abs() <= 1e-12, format!("OWA = {v}"))?;
    Ok(format!("OWA = {v}"))
}

fn ratio_witness() -> Check {
    let x = vec![0.5, 0.2, 0.1];
    let y = vec![0.5, 0.22, 0.2];
    let at = |v: &[f64]| {
        gm_apply(&RatioFamily, &UnitVector::new(v.to_vec()).expect("unit")).expect("ratio GM")
    };
    let (a, b) = (at(&x), at(&y));
    ensure((a - 0.375).abs() <= 1e-12, format!("GM(x) = {a}"))?;
    ensure((b - 0.367826).abs() <= 5e-4, format!("GM(y) = {b}"))?;
    ensure(b < a, "no strict decrease")?;
    let r = DirectionVector::new(vec![0.0, 0.02, 0.1]).map_err(|e| e.to_string())?;
    let point = UnitVector::new(x.clone()).map_err(|e| e.to_string())?;
    let outcome = check_monotone_at(
        |v| gm_apply(&RatioFamily, &UnitVector::new(v.to_vec()).expect("unit")).expect("ratio GM"),
        &r,
        &[point],
        &[1.0],
    )
    .map_err(|e| e.to_string())?;
    match outcome {
        MonotonicityOutcome::Fail(v) => {
            ensure(
                v.x == x && close(&v.shifted, &y, 1e-15),
                format!("flagged {:?} -> {:?}", v.x, v.shifted),
            )?;
            Ok(format!("GM = {a:.6} then {b:.6}, violation flagged"))
        }
        MonotonicityOutcome::Pass { .. } => Err("checker did not flag the pair".into()),
    }
}

fn property_suite() -> Check {
    let samples = 10_000;
    let report = run_suite(&PropsConfig::new(samples, 0));
    let gm_checks = report
        .results
        .iter()
        .filter(|r| r.subject.starts_with("H_"))
        .collect::<Vec<_>>();
    ensure(
        gm_checks.len() >= 4 * 9,
        format!("only {} GM properties ran", gm_checks.len()),
    )?;
    ensure(
        gm_checks.iter().all(|r| r.checked >= samples),
        "a property ran fewer than 10^4 checks",
    )?;
    if let Some(f) = report.failures().next() {
        return Err(f.to_string());
    }
    Ok(format!(
        "{} properties, {} samples each, 0 failures",
        report.results.len(),
        samples
    ))
}

fn oracle_equivalence() -> Check {
    let mut worst: f64 = 0.0;
    for selector in ReferentialSelector::ALL {
        let combiner = GmCombiner::new(selector);
        let mut rng = derive_rng(6, "oracle", &[selector as u64]);
        for i in 0..10_000 {
            let n = 2 + i % 9;
            let x = UnitVector::new((0..n).map(|_| rng.gen::<f64>()).collect()).expect("unit");
            let w = weights_calc(&x, selector).map_err(|e| e.to_string())?;
            let two_step: f64 = w
                .as_slice()
                .iter()
                .zip(x.as_slice())
                .map(|(w, v)| w * v)
                .sum();
            let closed = h_theta_apply(&combiner, &x).map_err(|e| e.to_string())?;
            let err = (two_step - closed).abs();
            worst = worst.max(err);
            ensure(
                err <= 1e-12,
                format!(
                    "{}: {:?} two-step {two_step}, closed {closed}",
                    combiner.label(),
                    x.as_slice()
                ),
            )?;
        }
    }
    Ok(format!("4 × 10^4 columns, max difference {worst:.2e}"))
}

fn table(entries: Vec<(&str, Vec<f64>)>) -> BTreeMap<String, Vec<f64>> {
    entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

fn statistics() -> Check {
    let same = table(vec![
        ("a", vec![0.8, 0.7, 0.9]),
        ("b", vec![0.8, 0.7, 0.9]),
        ("c", vec![0.8, 0.7, 0.9]),
    ]);
    let f = friedman_test(&same).map_err(|e| e.to_string())?;
    ensure(
        f.statistic == 0.0 && f.p_value == 1.0,
        format!("identical: chi2 {} p {}", f.statistic, f.p_value),
    )?;

    // A first everywhere; B and C alternate second and third.
    let a: Vec<f64> = (0..10).map(|i| 0.9 + 0.005 * i as f64).collect();
    let b: Vec<f64> = (0..10)
        .map(|i| if i % 2 == 0 { 0.7 } else { 0.6 })
        .collect();
    let c: Vec<f64> = (0..10)
        .map(|i| if i % 2 == 0 { 0.6 } else { 0.7 })
        .collect();
    let dominant = table(vec![("A", a), ("B", b), ("C", c)]);
    let report = nemenyi_posthoc(&dominant, 0.01).map_err(|e| e.to_string())?;
    ensure(
        report.friedman.p_value < 0.01,
        format!("dominant p = {}", report.friedman.p_value),
    )?;
    for other in ["B", "C"] {
        ensure(
            report.outcome("A", other) == Some(Outcome::Win),
            format!("A vs {other}: {:?}", report.outcome("A", other)),
        )?;
        ensure(
            report.outcome(other, "A") == Some(Outcome::Loss),
            format!("{other} vs A not a loss"),
        )?;
    }

    let mut rng = derive_rng(8, "wdl", &[]);
    let reports = (0..25)
        .map(|_| {
            let scores: BTreeMap<String, Vec<f64>> = ["p", "q", "r", "s"]
                .iter()
                .map(|&m| {
                    let shift = if m == "p" { 0.2 } else { 0.0 };
                    (
                        m.to_string(),
                        (0..30).map(|_| rng.gen::<f64>() * 0.8 + shift).collect(),
                    )
                })
                .collect();
            nemenyi_posthoc(&scores, 0.01)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let wdl = win_draw_loss(&reports, &names(&["p", "q"]), &names(&["r", "s"]))
        .map_err(|e| e.to_string())?;
    ensure(
        wdl.cells.iter().flatten().all(|c| c.total() == 25),
        "a cell does not sum to 25",
    )?;
    Ok(format!(
        "dominant p = {:.2e}, CD = {:.3}, p vs r = {}",
        report.friedman.p_value, report.critical_difference, wdl.cells[0][0]
    ))
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn load_desk_datasets() -> Result<Vec<Dataset>, String> {
    [
        ("iris.csv", "Species"),
        ("glass.csv", "type"),
        ("pima.csv", "type"),
    ]
    .iter()
    .map(|(f, label)| load_dataset(data_dir().join(f), label).map_err(|e| e.to_string()))
    .collect()
}

fn desk_config(parallel: bool) -> ExperimentConfig {
    ExperimentConfig {
        sizes: vec![5, 7, 10],
        combiners: Combiner::NAMES
            .iter()
            .map(|n| n.parse().expect("known combiner"))
            .collect(),
        folds: 10,
        repeats: 10,
        seed: 20240601,
        parallel,
        ..ExperimentConfig::default()
    }
}

fn results_without_timing(t: &ResultTable) -> Result<Vec<u8>, String> {
    let mut buf = Vec::new();
    write_results_csv(t, &mut buf, true).map_err(|e| e.to_string())?;
    let text = String::from_utf8(buf).map_err(|e| e.to_string())?;
    let stripped: Vec<&str> = text
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect();
    Ok(stripped.join("\n").into_bytes())
}

struct DeskRun {
    first: ResultTable,
    elapsed: Duration,
    datasets: Vec<Dataset>,
}

fn desk_run() -> Result<DeskRun, String> {
    let datasets = load_desk_datasets()?;
    let start = Instant::now();
    let first = run_experiment_on(&datasets, &desk_config(true)).map_err(|e| e.to_string())?;
    Ok(DeskRun {
        first,
        elapsed: start.elapsed(),
        datasets,
    })
}

fn desk_experiment(run: &DeskRun) -> Check {
    let t = &run.first;
    ensure(
        t.failures.is_empty(),
        format!(
            "{} failed cells, first: {:?}",
            t.failures.len(),
            t.failures.first()
        ),
    )?;
    let mut worst_margin = f64::INFINITY;
    let mut iris_min = f64::INFINITY;
    for d in &t.datasets {
        for &size in &t.sizes {
            for c in &t.combiners {
                let (mean, _) = t
                    .mean_std(&d.name, size, c)
                    .ok_or(format!("missing cell {} {size} {c}", d.name))?;
                ensure(
                    mean > d.majority_rate,
                    format!(
                        "(a) {} size {size} {c}: {mean:.4} <= {:.4}",
                        d.name, d.majority_rate
                    ),
                )?;
                worst_margin = worst_margin.min(mean - d.majority_rate);
                if d.name == "iris" {
                    iris_min = iris_min.min(mean);
                }
            }
        }
    }
    ensure(
        iris_min > 0.85,
        format!("(b) iris mean accuracy {iris_min:.4}"),
    )?;
    ensure(
        run.elapsed < Duration::from_secs(600),
        format!("(c) took {:.1?}", run.elapsed),
    )?;
    let again = run_experiment_on(&run.datasets, &desk_config(true)).map_err(|e| e.to_string())?;
    ensure(
        results_without_timing(t)? == results_without_timing(&again)?,
        "(d) rerun produced a different results file",
    )?;
    Ok(format!(
        "min margin over majority {worst_margin:.4}, iris min {iris_min:.4}, {:.1?}, rerun identical",
        run.elapsed
    ))
}

fn parallel_determinism(run: &DeskRun) -> Check {
    let serial =
        run_experiment_on(&run.datasets, &desk_config(false)).map_err(|e| e.to_string())?;
    ensure(
        serial.without_timing() == run.first.without_timing(),
        "serial and parallel result tables differ",
    )?;
    Ok(format!("{} records identical", serial.records.len()))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, outcome: Check| match outcome {
        Ok(detail) => println!("criterion {n} PASS {name}: {detail}"),
        Err(detail) => {
            failed += 1;
            println!("criterion {n} FAIL {name}: {detail}");
        }
    };
    report(1, "H_Arith worked example", example_h_arith());
    report(2, "min fusion worked example", example_min_fusion());
    report(3, "OWA worked example", example_owa());
    report(4, "ratio GM non-monotonicity witness", ratio_witness());
    report(5, "GM property suite", property_suite());
    report(6, "two-step vs closed form", oracle_equivalence());
    let run = desk_run();
    report(
        7,
        "desk-scale experiment",
        run.as_ref().map_err(Clone::clone).and_then(desk_experiment),
    );
    report(8, "Friedman / Nemenyi sanity", statistics());
    report(
        9,
        "parallel vs serial determinism",
        run.as_ref()
            .map_err(Clone::clone)
            .and_then(parallel_determinism),
    );
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
