//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on failure.
//!
//! `cargo test -p hypercomm --test acceptance` (built with the optimized test
//! profile; the slowest criteria are the SDP ones).

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hypercomm::combinatorics::balanced_sign_fixed;
use hypercomm::experiments::{csv_string, run_campaign, summarize, ExperimentConfig};
use hypercomm::linalg::{dot, jacobi_eigen};
use hypercomm::model::{contract, sample_hsbm};
use hypercomm::oracle::{brute_force_mle, log_likelihood};
use hypercomm::sdp::{certificate_check, partition_from_solution, solve_sdp, SdpOptions};
use hypercomm::spectral::{deflated_adjacency, power_second_eigenpair};
use hypercomm::thresholds::{d_gh, d_gh_variational, d_sdp, layer_gh};
use hypercomm::{AdjacencyMatrix, LabelVector, ModelSpec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn table1() -> Outcome {
    let a = [126.0, 127.0, 128.0, 130.0, 131.0, 132.0, 134.0, 135.0];
    let b = [70.0, 71.0, 72.0, 73.0, 74.0, 75.0, 76.0, 77.0];
    let sdp = [0.82, 0.81, 0.80, 0.82, 0.81, 0.80, 0.82, 0.81];
    let gh = [1.02, 1.01, 1.00, 1.02, 1.01, 1.00, 1.02, 1.01];
    let mut worst_gh = 0.0f64;
    let mut worst_sdp = 0.0f64;
    for k in 0..8 {
        let spec = ModelSpec::scaled(100, &[(4, a[k], b[k])]).map_err(|e| e.to_string())?;
        let g = d_gh(&spec).map_err(|e| e.to_string())?.d_gh;
        let s = d_sdp(&spec).map_err(|e| e.to_string())?.d_sdp;
        worst_gh = worst_gh.max((g - gh[k]).abs());
        worst_sdp = worst_sdp.max((s - sdp[k]).abs());
    }
    let exact = (layer_gh(4, 128.0, 72.0) - 1.0).abs();
    check(
        worst_gh <= 0.005 && worst_sdp <= 0.01 && exact <= 1e-12,
        format!("max |dGH err| {worst_gh:.4}, max |dSDP err| {worst_sdp:.4}, |dGH(128,72) - 1| {exact:.1e}"),
    )
}

fn low_arity_coincide() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let m = 2 + k % 2;
        let b = rng.random_range(0.1..100.0);
        let a = b + rng.random_range(0.01..100.0);
        let spec = ModelSpec::scaled(100, &[(m, a, b)]).map_err(|e| e.to_string())?;
        let g = d_gh(&spec).map_err(|e| e.to_string())?.d_gh;
        let s = d_sdp(&spec).map_err(|e| e.to_string())?.d_sdp;
        worst = worst.max((g - s).abs());
    }
    check(worst <= 1e-8, format!("100 pairs, max |dSDP - dGH| {worst:.2e}"))
}

fn random_spec(rng: &mut ChaCha8Rng) -> Vec<(usize, f64, f64)> {
    let mut arities: Vec<usize> = (2..=6).collect();
    let k = rng.random_range(1..=3);
    let mut layers = Vec::new();
    for _ in 0..k {
        let m = arities.remove(rng.random_range(0..arities.len()));
        let b = rng.random_range(0.1..80.0);
        let a = b + rng.random_range(0.01..150.0);
        layers.push((m, a, b));
    }
    layers
}

fn domination_and_additivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut violations = 0;
    let mut worst_add = 0.0f64;
    for _ in 0..1000 {
        let layers = random_spec(&mut rng);
        let spec = ModelSpec::scaled(100, &layers).map_err(|e| e.to_string())?;
        let g = d_gh(&spec).map_err(|e| e.to_string())?.d_gh;
        let s = d_sdp(&spec).map_err(|e| e.to_string())?.d_sdp;
        if s > g + 1e-9 {
            violations += 1;
        }
        let parts: f64 = layers
            .iter()
            .map(|&l| d_gh(&ModelSpec::scaled(100, &[l]).unwrap()).unwrap().d_gh)
            .sum();
        worst_add = worst_add.max((parts - g).abs() / g.max(1.0));
    }
    check(
        violations == 0 && worst_add <= 1e-12,
        format!("1000 specs, {violations} with dSDP > dGH, max relative additivity gap {worst_add:.1e}"),
    )
}

fn rate_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut worst_v, mut worst_t) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let m = rng.random_range(2..=6);
        let a = rng.random_range(0.1..200.0);
        let b = rng.random_range(0.1..200.0);
        let spec = ModelSpec::scaled(100, &[(m, a, b)]).map_err(|e| e.to_string())?;
        let opt = d_gh_variational(&spec).map_err(|e| e.to_string())?;
        worst_v = worst_v.max((opt.value - layer_gh(m, a, b)).abs());
        worst_t = worst_t.max((opt.t_star - 0.5).abs());
    }
    check(
        worst_v <= 1e-8 && worst_t <= 1e-6,
        format!("200 triples, max value err {worst_v:.2e}, max |t* - 1/2| {worst_t:.2e}"),
    )
}

fn config(json: &str) -> Result<ExperimentConfig, String> {
    ExperimentConfig::from_json(json).map_err(|e| e.to_string())
}

fn success_counts(cfg: &ExperimentConfig) -> Result<Vec<(String, usize, usize, usize)>, String> {
    let records = run_campaign(cfg, None).map_err(|e| e.to_string())?;
    let summary = summarize(cfg, &records);
    Ok(summary
        .pixels
        .iter()
        .map(|p| {
            let converged = records
                .iter()
                .filter(|r| r.pixel == p.pixel && r.algorithm.algorithm().as_str() == p.algorithm && r.converged)
                .count();
            (p.algorithm.to_string(), p.successes, p.trials, converged)
        })
        .collect())
}

fn above_threshold() -> Outcome {
    let cfg = config(
        r#"{"kind": "phase-grid", "base": {"n": 200, "layers": {"4": {"a": 180, "b": 40}}},
            "trials": 20, "algorithms": ["adjacency", "laplacian"], "master_seed": 2024}"#,
    )?;
    let counts = success_counts(&cfg)?;
    let ok = counts.iter().all(|(_, s, _, _)| *s >= 18);
    let detail = counts.iter().map(|(a, s, t, _)| format!("{a} {s}/{t}")).collect::<Vec<_>>().join(", ");
    check(ok, format!("n=200 M={{4}} (180,40): {detail}"))
}

fn below_threshold() -> Outcome {
    let cfg = config(
        r#"{"kind": "phase-grid", "base": {"n": 200, "layers": {"4": {"a": 20, "b": 10}}},
            "trials": 20, "algorithms": ["adjacency", "laplacian", "sdp"], "master_seed": 2025,
            "solver": {"sdp_max_iter": 500}}"#,
    )?;
    let counts = success_counts(&cfg)?;
    let ok = counts.iter().all(|(_, s, _, _)| *s <= 4);
    let detail = counts
        .iter()
        .map(|(a, s, t, c)| format!("{a} {s}/{t} (converged {c})"))
        .collect::<Vec<_>>()
        .join(", ");
    check(ok, format!("n=200 M={{4}} (20,10), sdp capped at 500 iterations: {detail}"))
}

fn aggregation() -> Outcome {
    let cfg = config(
        r#"{"kind": "aggregation", "base": {"n": 400, "layers": {"3": {"a": 120, "b": 91}}},
            "points": [[120, 91], [122, 92], [124, 93], [125, 94], [126, 95], [127, 96], [128, 97], [130, 98]],
            "extra_layer": {"m": 2, "a": 4, "b": 1},
            "trials": 30, "algorithms": ["adjacency"], "master_seed": 2026}"#,
    )?;
    let records = run_campaign(&cfg, None).map_err(|e| e.to_string())?;
    let summary = summarize(&cfg, &records);
    let single: usize = summary.paired.iter().map(|p| p.single).sum();
    let with_layer: usize = summary.paired.iter().map(|p| p.with_layer).sum();
    let per: Vec<String> = summary.paired.iter().map(|p| format!("{}/{}", p.single, p.with_layer)).collect();
    check(
        with_layer > single,
        format!("n=400, 8 pixels x 30 trials: single {single}, with 2:4:1 {with_layer} [{}]", per.join(" ")),
    )
}

fn sdp_correctness() -> Outcome {
    let spec = ModelSpec::scaled(80, &[(2, 16.0, 1.0)]).map_err(|e| e.to_string())?;
    let opts = SdpOptions::default();
    let (mut certified, mut exact, mut feasible, mut all) = (0, 0, 0, 0);
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let labels = LabelVector::sample(80, &mut rng).map_err(|e| e.to_string())?;
        let h = sample_hsbm(&spec, &labels, &mut rng).map_err(|e| e.to_string())?;
        let a = contract(&h);
        let cert = certificate_check(&a, &labels, None).map_err(|e| e.to_string())?.certified;
        let sol = solve_sdp(&a, &opts).map_err(|e| e.to_string())?;
        let res = sol.primal_residual.max(sol.dual_residual);
        worst = worst.max(res);
        let hit = partition_from_solution(&sol)
            .with_truth(&labels)
            .map_err(|e| e.to_string())?
            .exact
            .unwrap_or(false);
        certified += cert as usize;
        exact += hit as usize;
        feasible += (res <= 1e-6) as usize;
        all += (cert && hit && res <= 1e-6) as usize;
    }
    check(
        all >= 48,
        format!(
            "n=80 M={{2}} (16,1): certified {certified}/50, exact {exact}/50, residual <= 1e-6 {feasible}/50, all three {all}/50, max residual {worst:.1e}"
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut agree = 0;
    for k in 0..100 {
        let n = [4, 6, 8][k % 3];
        let q = rng.random_range(0.05..0.5);
        let p = rng.random_range(q + 0.05..0.95);
        let spec = ModelSpec::direct(n, &[(2, p, q)]).map_err(|e| e.to_string())?;
        let labels = LabelVector::sample(n, &mut rng).map_err(|e| e.to_string())?;
        let h = sample_hsbm(&spec, &labels, &mut rng).map_err(|e| e.to_string())?;
        let mut best = f64::NEG_INFINITY;
        for z in balanced_sign_fixed(n) {
            best = best.max(log_likelihood(&z, &h, &spec).map_err(|e| e.to_string())?);
        }
        let mle = brute_force_mle(&h, &spec).map_err(|e| e.to_string())?;
        let got = log_likelihood(&mle.labels_hat, &h, &spec).map_err(|e| e.to_string())?;
        if (got - best).abs() <= 1e-9 * best.abs().max(1.0) {
            agree += 1;
        }
    }
    check(agree == 100, format!("n <= 8 M={{2}}: {agree}/100 oracle maxima equal the likelihood maxima"))
}

fn gapped_matrix(rng: &mut ChaCha8Rng) -> Option<AdjacencyMatrix> {
    let n = 50;
    let labels: Vec<f64> = (0..n).map(|i| if i < n / 2 { 1.0 } else { -1.0 }).collect();
    let (p, q) = (rng.random_range(0.4..0.9), rng.random_range(0.0..0.2));
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let mean = if labels[i] == labels[j] { p } else { q };
            let x: f64 = (mean + rng.random_range(-0.1..0.1f64)).max(0.0);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    AdjacencyMatrix::from_dense(m).ok()
}

fn eigen_cross_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let (mut worst_v, mut worst_o) = (0.0f64, 0.0f64);
    let mut tested = 0;
    while tested < 100 {
        let Some(a) = gapped_matrix(&mut rng) else { continue };
        let p = deflated_adjacency(&a);
        let eig = jacobi_eigen(&p, 1e-14, 100);
        let mut mags: Vec<f64> = eig.values.iter().map(|v| v.abs()).collect();
        mags.sort_by(|x, y| y.total_cmp(x));
        if eig.values[0] <= 0.0 || mags[1] / mags[0] > 0.9 {
            continue;
        }
        tested += 1;
        let pair = power_second_eigenpair(&a, 1e-12, 100_000, &mut rng).map_err(|e| e.to_string())?;
        let reference: Vec<f64> = eig.vectors.column(0).iter().copied().collect();
        worst_v = worst_v.max((pair.deflated_value.unwrap() - eig.values[0]).abs());
        worst_o = worst_o.max(1.0 - dot(&pair.vector, &reference).abs());
    }
    check(
        worst_v <= 1e-6 && worst_o <= 1e-8,
        format!("100 gapped 50x50 matrices, max eigenvalue err {worst_v:.1e}, max 1 - overlap {worst_o:.1e}"),
    )
}

fn determinism() -> Outcome {
    let cfg = config(
        r#"{"kind": "phase-grid", "base": {"n": 40, "layers": {"2": {"a": 10, "b": 2}}},
            "points": [[10, 2], [4, 2]], "trials": 4,
            "algorithms": ["adjacency", "laplacian", "sdp"], "master_seed": 7,
            "solver": {"sdp_max_iter": 2000}}"#,
    )?;
    let big = config(
        r#"{"kind": "error-curve", "base": {"n": 100, "layers": {"3": {"a": 30, "b": 5}}},
            "a_values": [10, 30], "trials": 4,
            "algorithms": ["adjacency", "laplacian"], "master_seed": 8}"#,
    )?;
    let mut same = true;
    for c in [&cfg, &big] {
        let one = csv_string(&run_campaign(c, Some(1)).map_err(|e| e.to_string())?);
        let four = csv_string(&run_campaign(c, Some(4)).map_err(|e| e.to_string())?);
        same &= one == four;
    }
    check(same, "phase-grid (incl. sdp) and error-curve CSVs with 1 vs 4 threads are byte-identical".into())
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("table1_divergences", table1),
        ("low_arity_sdp_equals_gh", low_arity_coincide),
        ("domination_and_gh_additivity", domination_and_additivity),
        ("rate_function_oracle", rate_oracle),
        ("above_threshold_recovery", above_threshold),
        ("below_threshold_failure", below_threshold),
        ("aggregation_helps", aggregation),
        ("sdp_certificate_and_recovery", sdp_correctness),
        ("mle_oracle_equivalence", oracle_equivalence),
        ("power_vs_dense_eigen", eigen_cross_check),
        ("thread_count_determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name}: {d} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
