//! Acceptance suite: one pass/fail line per criterion, non-zero exit if any fails.

use std::process::Command;
use std::time::Instant;

use benford_ecp::contamination::mixture_probabilities;
use benford_ecp::critical::{Calibrator, CriticalValueMethod};
use benford_ecp::digits::FrequencyVector;
use benford_ecp::ecp::{
    ecp_chi_squared, ecp_closed_form, ecp_mad, ecp_simulated, min_ecp_for_significance, Clamp,
    SearchConfig,
};
use benford_ecp::expectation::{expected_closed_form, mc_expected_statistic};
use benford_ecp::simulation::{run_grid, GridSpec};
use benford_ecp::statistics::{cvm, ks, kuiper};
use benford_ecp::{uniform_contaminant, StatisticKind};
use rand::{Rng, SeedableRng};

const SEED: u64 = 20_250_101;

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Outcome {
    let e = ecp_chi_squared(14.0, 100, &uniform_contaminant()).unwrap();
    outcome(
        (e.f - 0.346).abs() <= 0.002,
        format!("CHI2 14 at n=100 -> {:.4} (want 0.346 ± 0.002)", e.f),
    )
}

fn criterion_2() -> Outcome {
    // n, then CHI2 p95/p99, SSD p95/p99, MAD p95/p99 in percent.
    let reference: [(u64, [f64; 6]); 9] = [
        (100, [39.14, 50.78, 38.85, 51.10, 42.95, 55.06]),
        (500, [18.47, 23.67, 17.55, 23.01, 19.67, 25.06]),
        (1000, [13.23, 16.91, 12.44, 16.30, 13.99, 17.79]),
        (5000, [6.02, 7.67, 5.59, 7.31, 6.30, 8.00]),
        (10_000, [4.28, 5.44, 3.95, 5.17, 4.47, 5.66]),
        (50_000, [1.92, 2.44, 1.77, 2.32, 2.00, 2.54]),
        (100_000, [1.36, 1.73, 1.25, 1.64, 1.42, 1.79]),
        (500_000, [0.61, 0.78, 0.56, 0.73, 0.63, 0.80]),
        (1_000_000, [0.43, 0.55, 0.40, 0.52, 0.45, 0.57]),
    ];
    let calibrator = Calibrator::new(1_000_000, SEED)
        .unwrap()
        .with_method(StatisticKind::Ssd, CriticalValueMethod::IndependentCells)
        .unwrap()
        .with_method(StatisticKind::Mad, CriticalValueMethod::ScaledMonteCarlo)
        .unwrap();
    let u = uniform_contaminant();
    let kinds = [StatisticKind::Chi2, StatisticKind::Ssd, StatisticKind::Mad];
    let mut failures = Vec::new();
    let mut worst = [0.0f64; 3];
    for (n, printed) in reference {
        for (k, kind) in kinds.iter().enumerate() {
            for (l, level) in [0.95, 0.99].into_iter().enumerate() {
                let want = printed[2 * k + l];
                let got = 100.0
                    * min_ecp_for_significance(*kind, n, level, &calibrator, &u)
                        .unwrap()
                        .f;
                let tol = if *kind == StatisticKind::Chi2 {
                    0.02
                } else {
                    0.15
                };
                let dev = got - want;
                worst[k] = worst[k].max(dev.abs());
                if dev.abs() > tol {
                    failures.push(format!(
                        "{kind} n={n} p{}: {got:.3} vs {want}",
                        (level * 100.0) as u32
                    ));
                }
            }
        }
    }
    let summary = format!(
        "max |dev| pp: CHI2 {:.3}, SSD {:.3}, MAD {:.3}",
        worst[0], worst[1], worst[2]
    );
    if failures.is_empty() {
        outcome(true, summary)
    } else {
        outcome(false, format!("{summary}; off: {}", failures.join(", ")))
    }
}

fn criterion_3() -> Outcome {
    let spec = GridSpec {
        sizes: vec![100, 1000, 10_000],
        fractions: vec![0.01, 0.05, 0.25, 0.75, 0.95, 0.99],
        replications: 20_000,
        ..GridSpec::reference_grid(20_000, SEED)
    };
    let report = run_grid(&spec).unwrap();
    let mut failures = Vec::new();
    let mut checked = 0;
    for cell in &report.cells {
        if cell.kind == StatisticKind::Kuiper && cell.n == 100 && cell.f <= 0.05 {
            continue;
        }
        checked += 1;
        let Some(est) = cell.recovered() else {
            failures.push(format!(
                "{} n={} f={}: {}",
                cell.kind,
                cell.n,
                cell.f,
                cell.errors.join("; ")
            ));
            continue;
        };
        let se = est.std_error.unwrap_or(0.0);
        let tol = (0.015f64).max(4.0 * se);
        if (est.f - cell.f).abs() > tol {
            failures.push(format!(
                "{} n={} f={}: {:.4} (tol {:.4})",
                cell.kind, cell.n, cell.f, est.f, tol
            ));
        }
    }
    let detail = format!(
        "{checked} cells checked, {} outside tolerance",
        failures.len()
    );
    if failures.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, format!("{detail}: {}", failures.join(", ")))
    }
}

fn criterion_4() -> Outcome {
    let u = uniform_contaminant();
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for (value, n, want) in [
        (0.0296, 125, 34.73),
        (0.0231, 169, 19.12),
        (0.0259, 144, 28.23),
        (0.0335, 108, 41.16),
        (0.0362, 100, 45.86),
    ] {
        let got = 100.0 * ecp_mad(value, n, &u).unwrap().f;
        parts.push(format!("MAD({value},{n})={got:.2}"));
        if (got - want).abs() > 0.5 {
            failures.push(format!("MAD {value} n={n}: {got:.2} vs {want}"));
        }
    }
    let ks_est = ecp_simulated(
        StatisticKind::Ks,
        0.1216,
        125,
        &u,
        &SearchConfig::with_seed(SEED),
    )
    .unwrap();
    let got = 100.0 * ks_est.f;
    parts.push(format!("KS(0.1216,125)={got:.2}"));
    if (got - 38.29).abs() > 1.0 {
        failures.push(format!("KS 0.1216 n=125: {got:.2} vs 38.29"));
    }
    let detail = parts.join(" ");
    if failures.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, format!("{detail}; off: {}", failures.join(", ")))
    }
}

fn criterion_5() -> Outcome {
    let u = uniform_contaminant();
    let a = 100.0 * ecp_mad(0.0212, 200, &u).unwrap().f;
    let b = 100.0 * ecp_mad(0.0011, 100_000, &u).unwrap().f;
    outcome(
        (a - 22.0).abs() <= 1.0 && (b - 1.42).abs() <= 0.1,
        format!(
            "MAD 0.0212 n=200 -> {a:.2}% (22 ± 1); MAD 0.0011 n=100000 -> {b:.3}% (1.42 ± 0.1)"
        ),
    )
}

fn criterion_6() -> Outcome {
    let p = mixture_probabilities(0.75, &uniform_contaminant())
        .unwrap()
        .mixture;
    let (k, q, c) = (ks(&p), kuiper(&p), cvm(&p));
    outcome(
        (k - 0.2016).abs() <= 2e-4 && (q - 0.2016).abs() <= 2e-4 && (c - 0.1909).abs() <= 2e-4,
        format!("KS {k:.5}, Kuiper {q:.5}, CvM {c:.5}"),
    )
}

fn criterion_7() -> Outcome {
    let c = uniform_contaminant().constants();
    let got = [
        c.chi_quadratic,
        c.chi_linear,
        c.ssd_quadratic,
        c.ssd_linear,
        c.ssd_null,
    ];
    let want = [0.4017, 3.6153, 0.0543, 0.1087, 0.8345];
    let pass = got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 1e-4);
    outcome(pass, format!("{got:.5?}"))
}

fn run_cli(args: &[&str], cache: &std::path::Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_ecp"))
        .args(args)
        .env("ECP_CACHE_DIR", cache)
        .output()
        .expect("run ecp");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_8() -> Outcome {
    let u = uniform_contaminant();
    let mut failures = Vec::new();

    // Round trip through every closed-form inversion.
    for n in [100u64, 1000, 10_000] {
        for f in [0.05, 0.25, 0.75, 0.95] {
            for kind in [
                StatisticKind::Chi2,
                StatisticKind::Ssd,
                StatisticKind::Mad,
                StatisticKind::Ed,
            ] {
                let v = expected_closed_form(kind, n, f, &u).unwrap().value;
                let back = ecp_closed_form(kind, v, n, &u).unwrap().f;
                let tol = if kind == StatisticKind::Mad {
                    1e-4
                } else {
                    1e-6
                };
                if (back - f).abs() > tol {
                    failures.push(format!("round trip {kind} n={n} f={f}: {back}"));
                }
            }
        }
    }

    // Clamps at both ends.
    for n in [2u64, 100, 100_000] {
        for kind in [
            StatisticKind::Chi2,
            StatisticKind::Ssd,
            StatisticKind::Mad,
            StatisticKind::Ed,
        ] {
            let e0 = expected_closed_form(kind, n, 0.0, &u).unwrap().value;
            let e1 = expected_closed_form(kind, n, 1.0, &u).unwrap().value;
            let lo = ecp_closed_form(kind, e0 * 0.9, n, &u).unwrap();
            let hi = ecp_closed_form(kind, e1 * 1.1, n, &u).unwrap();
            if lo.f != 0.0
                || lo.clamped != Clamp::FloorZero
                || hi.f != 1.0
                || hi.clamped != Clamp::CeilOne
            {
                failures.push(format!("clamp {kind} n={n}"));
            }
        }
    }

    // Ordering of the CDF-based statistics on random frequency vectors.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(SEED);
    let mut order_violations = 0;
    for _ in 0..10_000 {
        let w: Vec<f64> = (0..9).map(|_| rng.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        let p = FrequencyVector::new(w.iter().map(|x| x / s).collect()).unwrap();
        let (k, q, c) = (ks(&p), kuiper(&p), cvm(&p));
        if !(k <= q + 1e-15 && q <= 2.0 * k + 1e-15 && c <= 8.0 * k * k + 1e-15) {
            order_violations += 1;
        }
    }
    if order_violations > 0 {
        failures.push(format!("{order_violations} ordering violations"));
    }

    // Simulated means against closed forms.
    let mut worst_z = 0.0f64;
    for n in [100u64, 1000, 10_000, 100_000] {
        for f in [0.01, 0.05, 0.25, 0.75, 0.95, 0.99] {
            for kind in [StatisticKind::Chi2, StatisticKind::Ssd, StatisticKind::Mad] {
                let closed = expected_closed_form(kind, n, f, &u).unwrap().value;
                let mc = mc_expected_statistic(kind, n, f, &u, 20_000, SEED ^ n).unwrap();
                let z = (mc.value - closed) / mc.std_error.unwrap();
                worst_z = worst_z.max(z.abs());
                if z.abs() > 4.0 {
                    failures.push(format!("MC {kind} n={n} f={f}: z={z:.2}"));
                }
            }
        }
    }

    // Every seeded command twice, byte for byte.
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("values.txt");
    let values: String = (0..2000)
        .map(|_| format!("{:.3}\n", 10f64.powf(rng.random::<f64>() * 5.0)))
        .collect();
    std::fs::write(&data, values).unwrap();
    let data = data.to_string_lossy().into_owned();
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "analyze",
            &data,
            "--calibration-reps",
            "2000",
            "--reps",
            "1000",
            "--format",
            "structured",
        ],
        vec![
            "ecp-from-stat",
            "--kind",
            "kuiper",
            "--value",
            "0.1",
            "--n",
            "300",
            "--reps",
            "1000",
        ],
        vec![
            "simulate",
            "--sizes",
            "200",
            "--fractions",
            "0.1",
            "--reps",
            "1000",
            "--search-reps",
            "500",
        ],
        vec!["tables", "panelA", "--sizes", "100,1000", "--reps", "2000"],
        vec!["calibrate", "--kind", "cvm", "--n", "150", "--reps", "2000"],
    ];
    let cache_a = dir.path().join("cache-a");
    let cache_b = dir.path().join("cache-b");
    for args in &commands {
        let first = run_cli(args, &cache_a);
        let second = run_cli(args, &cache_b);
        if first.0 != 0 || first != second {
            failures.push(format!(
                "`ecp {}` not reproducible (exit {})",
                args[0], first.0
            ));
        }
    }

    let detail = format!(
        "round trips, clamps, 10000 orderings, MC max |z| {worst_z:.2}, {} commands reproducible",
        commands.len()
    );
    if failures.is_empty() {
        outcome(true, detail)
    } else {
        outcome(
            false,
            format!("{detail}; failures: {}", failures.join(", ")),
        )
    }
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("1 chi-squared ECP anchor", criterion_1),
        ("2 minimum-ECP planning table", criterion_2),
        ("3 simulation grid ECP recovery", criterion_3),
        ("4 retrospective MAD/KS anchors", criterion_4),
        ("5 MAD text anchors", criterion_5),
        ("6 CDF statistic conventions", criterion_6),
        ("7 contamination constants", criterion_7),
        ("8 property suites", criterion_8),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let status = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {status} ({:.1}s) {}",
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
