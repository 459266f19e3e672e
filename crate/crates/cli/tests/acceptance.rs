//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use fermicorr_core::dpp::sample_many;
use fermicorr_core::inequalities::{cross_check_partition, SetPartitions};
use fermicorr_core::{
    antibunching_curve, build_sampling_kernel, check_partition_bound, coherence_time_from_bandwidth, estimate_g2,
    exact_subset_probabilities, sweep_partitions, Complex64, DenseMatrix, DetectorConfig, GridSpec, HermitianMatrix,
    KernelBundle, PartitionSpec, SamplingKernel, SpectralModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s as f64, || {
        format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn random_complex(r: &mut impl Rng) -> Complex64 {
    Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

fn random_gram(r: &mut impl Rng, k: usize) -> HermitianMatrix {
    HermitianMatrix::gram(&DenseMatrix::from_fn(k, k, |_, _| random_complex(r))).unwrap()
}

struct Trial {
    matrix: HermitianMatrix,
    control: bool,
}

/// 1000 kernels, k in 1..=8. Every tenth is a positive diagonal control;
/// the rest are `B† B` with k >= 2 (a 1x1 matrix is diagonal by
/// construction, so it only appears among the controls).
fn lemma_corpus() -> Vec<Trial> {
    let mut r = ChaCha8Rng::seed_from_u64(2024);
    (0..1000)
        .map(|trial| {
            if trial % 10 == 0 {
                let k = r.random_range(1..=8);
                let d: Vec<f64> = (0..k).map(|_| r.random_range(0.1..3.0)).collect();
                Trial {
                    matrix: HermitianMatrix::from_diagonal(&d).unwrap(),
                    control: true,
                }
            } else {
                let k = r.random_range(2..=8);
                Trial {
                    matrix: random_gram(&mut r, k),
                    control: false,
                }
            }
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let corpus = lemma_corpus();
    let mut equalities = 0;
    for (i, t) in corpus.iter().enumerate() {
        let check = t.matrix.lemma_check().map_err(|e| format!("trial {i}: {e}"))?;
        ensure(check.holds && check.rhs - check.lhs >= -1e-10 * check.rhs, || {
            format!("trial {i}: lhs {} rhs {}", check.lhs, check.rhs)
        })?;
        ensure(check.is_equality == t.control, || {
            format!("trial {i}: is_equality {} but control {}", check.is_equality, t.control)
        })?;
        equalities += check.is_equality as usize;
    }
    within_budget(start.elapsed(), 10)?;
    Ok(format!("1000 kernels, {equalities} equalities, all on controls"))
}

fn two_block_partitions(k: usize) -> impl Iterator<Item = PartitionSpec> {
    SetPartitions::new(k).filter(|p| p.blocks().len() == 2)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut swept = 0;
    let mut worst = 0.0_f64;
    for (i, t) in lemma_corpus().into_iter().enumerate() {
        let k = t.matrix.dim();
        let bundle = KernelBundle::from_cross_correlations(t.matrix).map_err(|e| e.to_string())?;
        for partition in two_block_partitions(k) {
            let report = check_partition_bound(&bundle, &partition).map_err(|e| e.to_string())?;
            ensure(report.holds && report.slack >= -1e-10 * report.rhs, || {
                format!("trial {i} partition {partition}: slack {}", report.slack)
            })?;
            let cross = cross_check_partition(&bundle, &partition).map_err(|e| e.to_string())?;
            let disagreement = rel_diff(cross.det_d, report.lhs).max(rel_diff(cross.det_dprime, report.rhs));
            worst = worst.max(disagreement);
            ensure(disagreement <= 1e-10, || {
                format!("trial {i} partition {partition}: cross-check off by {disagreement:e}")
            })?;
            checked += 1;
        }
        if k <= 5 {
            let reports = sweep_partitions(&bundle, 5).map_err(|e| e.to_string())?;
            ensure(reports.iter().all(|r| r.holds), || format!("trial {i}: sweep violated"))?;
            swept += 1;
        }
    }
    within_budget(start.elapsed(), 60)?;
    Ok(format!(
        "{checked} two-block checks, {swept} full sweeps, worst cross-check disagreement {worst:.1e}"
    ))
}

fn criterion_3() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let eps = 1e-3;
    let mut perturbations = 0;
    for trial in 0..100 {
        let k = r.random_range(2..=8);
        let n_blocks = r.random_range(2..=k);
        let mut owner: Vec<usize> = (0..n_blocks).collect();
        owner.extend((n_blocks..k).map(|_| r.random_range(0..n_blocks)));
        let blocks: Vec<Vec<usize>> = (0..n_blocks)
            .map(|b| (0..k).filter(|&i| owner[i] == b).collect())
            .collect();

        // Each block is B† B + I/2, so a Hermitian perturbation of size eps
        // keeps the kernel positive definite.
        let mut gamma = vec![Complex64::new(0.0, 0.0); k * k];
        for block in &blocks {
            let sub = random_gram(&mut r, block.len());
            for (a, &i) in block.iter().enumerate() {
                for (b, &j) in block.iter().enumerate() {
                    gamma[i * k + j] = sub.get(a, b) + if i == j { 0.5 } else { 0.0 };
                }
            }
        }
        let partition = PartitionSpec::new(k, blocks).unwrap();
        let base = HermitianMatrix::new(k, gamma.clone()).unwrap();
        let report = check_partition_bound(&KernelBundle::from_cross_correlations(base).unwrap(), &partition)
            .map_err(|e| e.to_string())?;
        ensure(report.is_equality, || {
            format!("trial {trial}: block-diagonal kernel not equality")
        })?;

        for i in 0..k {
            for j in i + 1..k {
                if owner[i] == owner[j] {
                    continue;
                }
                let mut perturbed = gamma.clone();
                perturbed[i * k + j] += eps;
                perturbed[j * k + i] += eps;
                let bundle = KernelBundle::from_cross_correlations(HermitianMatrix::new(k, perturbed).unwrap())
                    .map_err(|e| e.to_string())?;
                let report = check_partition_bound(&bundle, &partition).map_err(|e| e.to_string())?;
                ensure(!report.is_equality && report.slack > 0.0, || {
                    format!(
                        "trial {trial} entry ({i},{j}): is_equality {} slack {}",
                        report.is_equality, report.slack
                    )
                })?;
                perturbations += 1;
            }
        }
    }
    Ok(format!(
        "100 block-diagonal kernels, {perturbations} perturbations all strict"
    ))
}

fn criterion_4() -> Outcome {
    let tc = 2.0e-14;
    let model = SpectralModel::gaussian(tc).map_err(|e| e.to_string())?;
    // 801 points on [-4 Tc, 4 Tc]: index 400 is tau = 0, index 500 is Tc.
    let curve = antibunching_curve(&model, -4.0 * tc, 4.0 * tc, 801).map_err(|e| e.to_string())?;
    let (tau0, at0) = curve[400];
    ensure(tau0 == 0.0 && at0 == 0.0, || {
        format!("value at tau = {tau0:e} is {at0}")
    })?;
    ensure(curve[0].1 >= 0.999 && curve[800].1 >= 0.999, || {
        format!("edges {} {}", curve[0].1, curve[800].1)
    })?;
    let expected = 1.0 - (-std::f64::consts::PI).exp();
    let at_tc = curve[500].1;
    ensure((at_tc - expected).abs() <= 1e-12, || {
        format!("value at Tc {at_tc} vs {expected}")
    })?;
    for i in 0..400 {
        ensure((curve[i].1 - curve[800 - i].1).abs() <= 1e-12, || {
            format!("not even at index {i}")
        })?;
    }
    for i in 400..800 {
        ensure(curve[i + 1].1 >= curve[i].1, || format!("not monotone at index {i}"))?;
    }
    Ok(format!(
        "g2(0) = 0, g2(Tc) = {at_tc:.12}, g2(4Tc) = {:.6}",
        curve[800].1
    ))
}

fn criterion_5() -> Outcome {
    let tc = coherence_time_from_bandwidth(0.2).map_err(|e| e.to_string())?;
    ensure((2.0e-14..=2.1e-14).contains(&tc), || format!("Tc = {tc:e}"))?;
    Ok(format!("Tc = {tc:e} s"))
}

fn random_sampling_kernel(r: &mut impl Rng, n: usize) -> SamplingKernel {
    let a = random_gram(r, n);
    let top = *a.eigen().unwrap().eigenvalues().last().unwrap();
    let scale = r.random_range(0.3..0.95) / top;
    SamplingKernel::new(HermitianMatrix::from_fn(n, |i, j| a.get(i, j) * scale).unwrap()).unwrap()
}

fn mask(bins: &[usize]) -> usize {
    bins.iter().fold(0, |m, &i| m | 1 << i)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let n_draws = 1_000_000u64;
    let mut r = ChaCha8Rng::seed_from_u64(6);

    let mut worst_tv = 0.0_f64;
    for kernel_index in 0..3 {
        let kernel = random_sampling_kernel(&mut r, 4);
        let exact = exact_subset_probabilities(&kernel).map_err(|e| e.to_string())?;
        let mut counts = [0u64; 16];
        for s in sample_many(&kernel, n_draws, kernel_index).map_err(|e| e.to_string())? {
            counts[mask(&s.occupied_bins)] += 1;
        }
        let tv = counts
            .iter()
            .zip(exact.by_mask())
            .map(|(&c, &p)| (c as f64 / n_draws as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        worst_tv = worst_tv.max(tv);
        ensure(tv <= 0.005, || {
            format!("4-bin kernel {kernel_index}: total variation {tv}")
        })?;
    }

    let mut worst_z = 0.0_f64;
    let mut subsets_checked = 0;
    for kernel_index in 0..2 {
        let kernel = random_sampling_kernel(&mut r, 8);
        let masks: Vec<usize> = sample_many(&kernel, n_draws, 100 + kernel_index)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|s| mask(&s.occupied_bins))
            .collect();
        for want in (1usize..256).filter(|m| m.count_ones() <= 3) {
            let subset: Vec<usize> = (0..8).filter(|i| want & (1 << i) != 0).collect();
            let p = kernel
                .kernel()
                .principal_submatrix(&subset)
                .and_then(|m| m.determinant())
                .map_err(|e| e.to_string())?;
            let hits = masks.iter().filter(|&&m| m & want == want).count();
            let p_hat = hits as f64 / n_draws as f64;
            let se = (p * (1.0 - p) / n_draws as f64).sqrt();
            let z = (p_hat - p).abs() / se;
            worst_z = worst_z.max(z);
            ensure(z <= 4.0, || {
                format!("8-bin kernel {kernel_index} subset {subset:?}: {p_hat} vs {p}, {z:.2} SE")
            })?;
            subsets_checked += 1;
        }
    }
    within_budget(start.elapsed(), 120)?;
    Ok(format!(
        "worst TV {worst_tv:.4}; {subsets_checked} inclusion checks, worst {worst_z:.2} SE"
    ))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let tc = 2.0e-14;
    let dt = tc / 8.0;
    let det = DetectorConfig::new(1.0, 1.0, dt).map_err(|e| e.to_string())?;
    let model = SpectralModel {
        intensity: 0.05 / dt,
        ..SpectralModel::gaussian(tc).map_err(|e| e.to_string())?
    };
    let grid = GridSpec::new(64, 0.0, dt).map_err(|e| e.to_string())?;
    let kernel = build_sampling_kernel(&model, &det, &grid).map_err(|e| e.to_string())?;
    let k00 = kernel.kernel().get(0, 0).re;
    ensure((k00 - 0.05).abs() <= 1e-12, || format!("K_ii = {k00}"))?;

    let hist = estimate_g2(&kernel, 100_000, 42).map_err(|e| e.to_string())?;
    let (g1, s1) = (hist.g2[0], hist.stderr[0]);
    let (g32, s32) = (hist.g2[31], hist.stderr[31]);
    let separation = (g32 - g1) / (s1 * s1 + s32 * s32).sqrt();
    ensure(separation > 5.0, || {
        format!("lag 1 vs 32 separated by only {separation:.2} SE")
    })?;

    let mut worst_z = 0.0_f64;
    for (i, &lag) in hist.lag_bins.iter().enumerate() {
        let analytic = model.g2_normalized(lag as f64 * dt);
        let z = (hist.g2[i] - analytic).abs() / hist.stderr[i];
        worst_z = worst_z.max(z);
        ensure(z <= 3.0, || {
            format!("lag {lag}: {} vs analytic {analytic}, {z:.2} SE", hist.g2[i])
        })?;
    }
    within_budget(start.elapsed(), 300)?;
    Ok(format!(
        "g2(1) = {g1:.4}, g2(32) = {g32:.4}, separation {separation:.1} SE, worst lag {worst_z:.2} SE"
    ))
}

fn run_cli(args: &[&str], dir: &Path) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fermicorr"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path();
    let write = |name: &str, text: &str| std::fs::write(path.join(name), text).map_err(|e| e.to_string());
    write(
        "model.json",
        r#"{"shape":"gaussian","omega0_rad_per_s":3e15,"coherence_time_s":2e-14,"group_speed_m_per_s":1e7,"axis":[0,0,1],"intensity_per_m2_s":2e13}"#,
    )?;
    write("detector.json", r#"{"eta":1,"area_m2":1,"bin_width_s":2.5e-15}"#)?;
    let points: Vec<String> = (0..7)
        .map(|i| format!(r#"{{"r":[0,0,{}],"t":{}}}"#, 1e-8 * i as f64, 5e-15 * i as f64))
        .collect();
    write("points.json", &format!("[{}]", points.join(",")))?;

    let commands: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (
            vec!["curve", "--model", "model.json", "--out", "curve.csv"],
            vec!["curve.csv"],
        ),
        (
            vec![
                "check",
                "--model",
                "model.json",
                "--points",
                "points.json",
                "--partition",
                "1,2|3,5,7|4|6",
                "--out",
                "check.json",
            ],
            vec!["check.json"],
        ),
        (
            vec![
                "sweep",
                "--model",
                "model.json",
                "--points",
                "points.json",
                "--out",
                "sweep.json",
            ],
            vec!["sweep.json"],
        ),
        (
            vec![
                "crosscheck",
                "--model",
                "model.json",
                "--points",
                "points.json",
                "--l",
                "3",
                "--out",
                "cross.json",
            ],
            vec!["cross.json"],
        ),
        (
            vec![
                "sample",
                "--model",
                "model.json",
                "--detector",
                "detector.json",
                "--grid",
                "n=32",
                "--n-samples",
                "20000",
                "--seed",
                "42",
                "--out",
                "sample.json",
                "--sample-log",
                "samples.csv",
            ],
            vec!["sample.json", "samples.csv"],
        ),
        (vec!["coherence-time", "0.2eV", "--out", "tc.json"], vec!["tc.json"]),
    ];

    let mut compared = 0;
    for (args, files) in &commands {
        let mut runs = Vec::new();
        for _ in 0..2 {
            let (code, stdout) = run_cli(args, path)?;
            ensure(code == 0, || format!("`{}` exited {code}", args.join(" ")))?;
            let mut contents = vec![stdout];
            for f in files {
                contents.push(std::fs::read(path.join(f)).map_err(|e| e.to_string())?);
            }
            runs.push(contents);
        }
        ensure(runs[0] == runs[1], || format!("`{}` is not reproducible", args[0]))?;
        for bytes in &runs[0] {
            let text = String::from_utf8_lossy(bytes);
            ensure(
                !["timestamp", "date", "created"].iter().any(|w| text.contains(w)),
                || format!("`{}` output carries a timestamp", args[0]),
            )?;
            ensure(
                text.is_empty() || text.contains("wrote") || text.contains("config_hash"),
                || format!("`{}` output lacks provenance", args[0]),
            )?;
        }
        compared += files.len();
    }
    Ok(format!(
        "{} commands, {compared} output files byte-identical across reruns",
        commands.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("lemma / Hadamard suite", criterion_1),
        ("Fischer / partition suite", criterion_2),
        ("equality iff cross-block vanishing", criterion_3),
        ("antibunching curve shape", criterion_4),
        ("coherence time from 0.2 eV", criterion_5),
        ("sampler vs exact oracle", criterion_6),
        ("empirical antibunching", criterion_7),
        ("CLI determinism", criterion_8),
    ];
    let mut failures = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.1} s] {detail}", n + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1} s] {detail}", n + 1);
            }
        }
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
