//! Acceptance checks. Runs without the libtest harness so that every check
//! prints one PASS or FAIL line; the process fails if any check fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use cdma_sig::criteria::{
    ber_at, capacity_at, ed, per_user_capacity, q_approx, q_function, qd, CriterionKind,
    CriterionSpec,
};
use cdma_sig::enlarge::{compare_capacity, enlarge, EnlargementPlan, Generator, TensorDecoder};
use cdma_sig::experiment::{run_experiment, ExperimentConfig, ExperimentKind};
use cdma_sig::mc::rng_from_seed;
use cdma_sig::optimize::{make_cost, run_ga, run_pso, GaConfig, PsoConfig};
use cdma_sig::registry;
use cdma_sig::system::{constellation, ChannelParams, InputVector, NoiseLevel};
use cdma_sig::SignatureMatrix;
use rand::Rng;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn example_decode() -> Outcome {
    let a4 = registry::get("tabIII.A4").unwrap().matrix;
    let plan = enlarge(&a4, 2).unwrap();
    let y = [
        -1.4586, -0.5227, -0.8251, -1.3148, 0.9584, -0.1522, 3.7170, 2.0180,
    ];
    let x = TensorDecoder::new(&plan).unwrap().decode(&y).unwrap();
    let expected = [1, 1, -1, -1, -1, -1, -1, 1, 1, -1];
    check(x.bits() == expected, format!("decoded {:?}", x.bits()))
}

fn unitary_capacity_equality() -> Outcome {
    let a4 = registry::get("tabIII.A4").unwrap().matrix;
    let ch = ChannelParams::from_ebn0(&a4, 8.0).unwrap();
    let r = compare_capacity(&a4, &Generator::hadamard(2).unwrap(), &ch, 200_000, 1).unwrap();
    let gap = (r.lhs - r.rhs).abs();
    check(
        gap <= 3.0 * r.combined_error,
        format!(
            "C(B) = {:.4}, 2 C(A) = {:.4}, |gap| {gap:.4} vs 3 se {:.4}",
            r.lhs,
            r.rhs,
            3.0 * r.combined_error
        ),
    )
}

fn non_unitary_strict_inequality() -> Outcome {
    let g = Generator::from_rows(2, &[1.0, 0.6, 0.0, 0.8]).unwrap();
    let a = SignatureMatrix::from_rows(&[&[1.0]]).unwrap();
    let ch = ChannelParams::from_sigma(0.7).unwrap();
    let r = compare_capacity(&a, &g, &ch, 200_000, 2).unwrap();
    check(
        r.rhs - r.lhs > 3.0 * r.combined_error,
        format!(
            "C(B) = {:.4}, 2 C(A) = {:.4}, 3 se {:.4}",
            r.lhs,
            r.rhs,
            3.0 * r.combined_error
        ),
    )
}

fn scalar_capacity_quadrature() -> Outcome {
    let a = SignatureMatrix::from_rows(&[&[1.0]]).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for sigma in [0.5, 1.0] {
        let ch = ChannelParams::from_sigma(sigma).unwrap();
        let mc = capacity_at(&a, &ch, 200_000, 4).unwrap();
        let exact = common::binary_awgn_capacity(sigma);
        ok &= (mc.value - exact).abs() <= 3.0 * mc.std_error;
        detail.push(format!(
            "sigma {sigma}: {:.5} vs {exact:.5} (se {:.5})",
            mc.value, mc.std_error
        ));
    }
    check(ok, detail.join("; "))
}

fn scalar_ber() -> Outcome {
    let a = SignatureMatrix::from_rows(&[&[1.0]]).unwrap();
    let bits = 100_000;
    let mut ok = true;
    let mut detail = Vec::new();
    for db in [0.0, 4.0, 8.0] {
        let ch = ChannelParams::from_ebn0(&a, db).unwrap();
        let sim = ber_at(&a, &ch, bits, 5).unwrap();
        let p = q_function(1.0 / ch.sigma_n);
        let se = (p * (1.0 - p) / bits as f64).sqrt();
        ok &= (sim.value - p).abs() <= 3.0 * se;
        detail.push(format!("{db} dB: {:.5} vs {p:.5}", sim.value));
    }
    check(ok, detail.join("; "))
}

fn q_approximation() -> Outcome {
    let worst = (0..=600)
        .map(|i| {
            let x = i as f64 * 0.01;
            (q_function(x) - q_approx(x)).abs()
        })
        .fold(0.0, f64::max);
    check(worst <= 0.03, format!("max error {worst:.5}"))
}

fn ed_qd_rank_agreement() -> Outcome {
    let mut rng = rng_from_seed(7);
    let (mut e, mut q) = (Vec::new(), Vec::new());
    for _ in 0..50 {
        let a = common::random_matrix(&mut rng, 3, 4).unwrap();
        let ch = ChannelParams::from_ebn0(&a, 8.0).unwrap();
        e.push(ed(&a, &ch).unwrap().value);
        q.push(qd(&a, &ch).unwrap().value);
    }
    let rho = common::spearman(&e, &q);
    check(rho >= 0.99, format!("Spearman {rho:.5}"))
}

fn registry_capacity_bound() -> Outcome {
    let mut bad = Vec::new();
    let mut max = f64::NEG_INFINITY;
    for entry in registry::all() {
        let spec = CriterionSpec::new(CriterionKind::Capacity, NoiseLevel::EbN0Db(8.0), 20_000, 8);
        let c = per_user_capacity(&entry.matrix, &spec).unwrap();
        max = max.max(c.value);
        if !(c.value >= 0.0 && c.value <= 1.0 + 3.0 * c.std_error) {
            bad.push(format!("{} = {:.4}", entry.id, c.value));
        }
    }
    check(
        bad.is_empty(),
        format!(
            "{} matrices, largest {max:.4}; out of range: {bad:?}",
            registry::all().len()
        ),
    )
}

fn md_cost() -> impl Fn(&SignatureMatrix) -> f64 + Sync {
    make_cost(CriterionSpec::new(
        CriterionKind::Md,
        NoiseLevel::EbN0Db(8.0),
        0,
        0,
    ))
}

fn ga_convergence() -> Outcome {
    let trace = run_ga(4, 5, &md_cost(), &GaConfig::default()).unwrap();
    let last = trace.iterations.last().unwrap();
    let gap = (last.best_cost - last.mean_cost).abs();
    let monotone = trace
        .iterations
        .windows(2)
        .all(|w| w[1].best_cost <= w[0].best_cost);
    check(
        gap < 1e-2 && monotone && last.iteration <= 100,
        format!(
            "stopped at {} with best {:.4}, |best - mean| {gap:.5}, monotone {monotone}",
            last.iteration, last.best_cost
        ),
    )
}

fn pso_plateau() -> Outcome {
    let trace = run_pso(4, 5, &md_cost(), &PsoConfig::default()).unwrap();
    let best: Vec<f64> = trace.best_costs().collect();
    let tail = &best[best.len() - 21..];
    let flat = tail.iter().all(|&c| c == tail[20]);
    let since = best.iter().position(|&c| c == tail[20]).unwrap();
    check(
        flat,
        format!("best {:.4}, unchanged from iteration {since}", tail[20]),
    )
}

fn beta_sweep() -> Outcome {
    let cfg = ExperimentConfig::new(
        ExperimentKind::BetaSweep,
        vec![(3, 4), (3, 5), (2, 4), (2, 5)],
        vec![8.0],
        vec![1, 2, 3],
    );
    let res = run_experiment(&cfg).unwrap();
    let mut ok = res.summary.failed == 0;
    let mut detail = Vec::new();
    for kind in [CriterionKind::Capacity, CriterionKind::Ed] {
        let mut cells: Vec<_> = res
            .summary
            .cells
            .iter()
            .filter(|c| c.criterion == kind)
            .collect();
        cells.sort_by(|a, b| a.beta.total_cmp(&b.beta));
        ok &= cells.len() == 4;
        for w in cells.windows(2) {
            let slack = 3.0 * (w[0].std_error().powi(2) + w[1].std_error().powi(2)).sqrt();
            ok &= w[1].mean <= w[0].mean + slack;
        }
        let means: Vec<String> = cells.iter().map(|c| format!("{:.4}", c.mean)).collect();
        detail.push(format!("{kind}: {}", means.join(" > ")));
    }
    check(ok, detail.join("; "))
}

fn noiseless_round_trip() -> Outcome {
    let mut rng = rng_from_seed(12);
    let mut bases = vec![registry::get("tabIII.A4").unwrap().matrix];
    while bases.len() < 3 {
        let a = common::random_matrix(&mut rng, 2, 3).unwrap();
        if constellation(&a).unwrap().is_injective() {
            bases.push(a);
        }
    }
    let mut trials = 0;
    for base in &bases {
        for k in [2, 4] {
            let plan = EnlargementPlan::new(base.clone(), Generator::hadamard(k).unwrap()).unwrap();
            let decoder = TensorDecoder::new(&plan).unwrap();
            let n = k * base.n();
            for _ in 0..100 {
                let x = InputVector::from_index(rng.random_range(0..1u64 << n), n);
                let y = plan.enlarged().mul_vec(&x.to_f64()).unwrap();
                let got = decoder.decode(&y).unwrap();
                if got != x {
                    return Err(format!(
                        "k = {k}: sent {:?}, decoded {:?}",
                        x.bits(),
                        got.bits()
                    ));
                }
                trials += 1;
            }
        }
    }
    Ok(format!("{trials} blocks recovered exactly"))
}

fn main() -> ExitCode {
    let checks: [Check; 12] = [
        (
            "reference received vector decodes to the known input",
            example_decode,
        ),
        (
            "unitary enlargement preserves sum capacity",
            unitary_capacity_equality,
        ),
        (
            "non-unitary enlargement loses capacity",
            non_unitary_strict_inequality,
        ),
        (
            "scalar capacity matches quadrature",
            scalar_capacity_quadrature,
        ),
        ("scalar BER matches Q(1/sigma)", scalar_ber),
        ("exponential Q approximation within 0.03", q_approximation),
        ("ED and QD rank matrices alike", ed_qd_rank_agreement),
        (
            "registry per-user capacity within [0, 1]",
            registry_capacity_bound,
        ),
        ("GA best and mean converge on MD", ga_convergence),
        ("PSO best cost plateaus on MD", pso_plateau),
        ("per-user capacity falls with loading factor", beta_sweep),
        (
            "noiseless enlarged blocks decode exactly",
            noiseless_round_trip,
        ),
    ];
    let mut failures = 0;
    for (i, (name, f)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name} ({detail}) [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} passed, {failures} failed", checks.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
