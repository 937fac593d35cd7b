//! Acceptance suite: runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each. Exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use cosenet::formatting::{compute_layout, WindowLayout};
use cosenet::matrix::segmentation_to_blocks;
use cosenet::merge::overlap_mean;
use cosenet::metrics::{transferability, window_diff};
use cosenet::pipeline::{evaluate, segment, PipelineConfig};
use cosenet::regressor::{train_ridge, RidgeModel, Split, TrainingSet};
use cosenet::scaling::{rescale_value, ScalingParams};
use cosenet::synth::{generate_dataset, generate_record, SynthDataset, SynthSpec};
use cosenet::tuner::{ga_optimize, pso_optimize, select_best, FitnessEvaluator, GaConfig, ModelBank, PsoConfig};
use cosenet::{ProbabilityVector, SegmentationVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn dataset(size: usize, var: f64, count: usize, seed: u64) -> SynthDataset {
    generate_dataset(&SynthSpec::preset(size, var, count, seed).expect("standard parameters")).unwrap()
}

fn train(data: &SynthDataset, t: usize) -> RidgeModel {
    train_ridge(&TrainingSet::from_dataset(data, t, Split::Train).unwrap(), 1.0, false).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng) -> ScalingParams {
    let a: f64 = rng.random();
    let b = rng.random::<f64>() * (1.0 - a);
    ScalingParams::new(a, b, rng.random()).unwrap()
}

/// Smallest window count whose padded length reaches `m_in`.
fn oracle_window_count(m_in: usize, t: usize) -> usize {
    (1..).find(|v| t * (v + 1) / 2 >= m_in).unwrap()
}

fn criterion_1() -> Outcome {
    for t in [8usize, 16, 32] {
        for m_in in 1..=256usize {
            let l: WindowLayout = compute_layout(m_in, t).map_err(|e| e.to_string())?;
            let printed = if m_in >= t { (2 * m_in).div_ceil(t) - 1 } else { 1 };
            if l.v != printed || l.v != oracle_window_count(m_in, t) || l.m0 != t * (l.v + 1) / 2 {
                return Err(format!("m_in={m_in} t={t}: v={} m0={}", l.v, l.m0));
            }
            if !l.m0.is_multiple_of(t / 2) || l.m0 < m_in {
                return Err(format!("m_in={m_in} t={t}: m0={} not divisible or too small", l.m0));
            }
            let mut cover = vec![0usize; l.m0];
            for i in 0..l.v {
                let start = i * t / 2;
                if start + t > l.m0 {
                    return Err(format!("window {i} overruns m0={}", l.m0));
                }
                cover[start..start + t].iter_mut().for_each(|c| *c += 1);
            }
            for (g, &c) in cover.iter().enumerate() {
                let edge = l.v >= 2 && (g < t / 2 || g >= l.m0 - t / 2);
                let want = if l.v == 1 || edge { 1 } else { 2 };
                if c != want {
                    return Err(format!(
                        "m_in={m_in} t={t}: index {g} covered {c} times, expected {want}"
                    ));
                }
            }
        }
    }
    Ok("768 (m_in, T) layouts match formula, divisibility and coverage".into())
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_fixed = 0.0f64;
    let mut worst_identity = 0.0f64;
    for _ in 0..10_000 {
        let p = random_params(&mut rng);
        worst_fixed = worst_fixed.max((rescale_value(0.5, &p).unwrap() - 0.5).abs());
        let r: f64 = rng.random();
        let id = ScalingParams::new(1.0, 0.0, rng.random()).unwrap();
        worst_identity = worst_identity.max((rescale_value(r, &id).unwrap() - r).abs());
    }
    let mut violations = 0;
    for _ in 0..100_000 {
        let p = random_params(&mut rng);
        let (x, y): (f64, f64) = (rng.random(), rng.random());
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        if rescale_value(lo, &p).unwrap() > rescale_value(hi, &p).unwrap() {
            violations += 1;
        }
    }
    check(
        worst_fixed <= 1e-12 && worst_identity <= 1e-12 && violations == 0,
        format!(
            "fixed-point err {worst_fixed:e}, identity err {worst_identity:e}, {violations} monotonicity violations"
        ),
    )
}

fn criterion_3() -> Outcome {
    let data = dataset(8, 0.0, 8192, 3);
    let model = train(&data, 8);
    let r = evaluate(&data.test, &PipelineConfig::with_defaults(&model)).map_err(|e| e.to_string())?;
    check(
        r.wd <= 0.02 && r.mse <= 0.01,
        format!("test WD {:.5}, MSE {:.2e} on {} matrices", r.wd, r.mse, r.n),
    )
}

fn criterion_4() -> Outcome {
    let data = dataset(16, 0.2, 16384, 4);
    let model = train(&data, 16);
    let r = evaluate(&data.test, &PipelineConfig::with_defaults(&model)).map_err(|e| e.to_string())?;
    check(
        1.0 - r.wd >= 0.78 && 1.0 - r.mse >= 0.88,
        format!(
            "1-WD {:.4} (floor 0.78), 1-MSE {:.4} (floor 0.88)",
            1.0 - r.wd,
            1.0 - r.mse
        ),
    )
}

fn brute_force_wd(r: &SegmentationVector, h: &SegmentationVector, k: usize) -> f64 {
    let n = r.len();
    let bounds = |s: &SegmentationVector, i: usize| (i + 1..=i + k).filter(|&p| s.bits()[p]).count();
    let differ = (0..n - k).filter(|&i| bounds(r, i) != bounds(h, i)).count();
    differ as f64 / (n - k) as f64
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..1000 {
        let n = rng.random_range(2..=64);
        let density: f64 = rng.random();
        let mut draw = || {
            let mut bits: Vec<bool> = (0..n).map(|_| rng.random_bool(density)).collect();
            bits[0] = true;
            SegmentationVector::new(bits).unwrap()
        };
        let (r, h) = (draw(), draw());
        let k = rng.random_range(1..n);
        let fast = window_diff(&r, &h, Some(k)).map_err(|e| e.to_string())?;
        let slow = brute_force_wd(&r, &h, k);
        if fast != slow {
            return Err(format!("trial {trial}: {fast} vs oracle {slow}"));
        }
    }
    Ok("1000 random triples agree exactly".into())
}

fn criterion_6() -> Outcome {
    let pv = |v: Vec<f64>| ProbabilityVector::new(v).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for t in [4usize, 8, 16] {
        for m_in in [1usize, 5, 17, 40] {
            let l = compute_layout(m_in, t).unwrap();
            let c: f64 = rng.random();
            let merged = overlap_mean(&vec![pv(vec![c; t]); l.v], &l).unwrap();
            if merged.as_slice().iter().any(|&x| x != c) {
                return Err(format!("constant {c} not preserved at m_in={m_in}, t={t}"));
            }
            let p: Vec<Vec<f64>> = (0..l.v).map(|_| (0..t).map(|_| rng.random()).collect()).collect();
            let q: Vec<Vec<f64>> = (0..l.v).map(|_| (0..t).map(|_| rng.random()).collect()).collect();
            let alpha: f64 = rng.random();
            let beta = (1.0 - alpha) * rng.random::<f64>();
            let mix: Vec<_> = p
                .iter()
                .zip(&q)
                .map(|(x, y)| pv(x.iter().zip(y).map(|(a, b)| alpha * a + beta * b).collect()))
                .collect();
            let mp = overlap_mean(&p.iter().cloned().map(pv).collect::<Vec<_>>(), &l).unwrap();
            let mq = overlap_mean(&q.iter().cloned().map(pv).collect::<Vec<_>>(), &l).unwrap();
            let mm = overlap_mean(&mix, &l).unwrap();
            for g in 0..l.m0 {
                let lin = alpha * mp.as_slice()[g] + beta * mq.as_slice()[g];
                if (mm.as_slice()[g] - lin).abs() > 1e-12 {
                    return Err(format!("linearity off by {:e}", (mm.as_slice()[g] - lin).abs()));
                }
            }
        }
    }
    let l = compute_layout(6, 4).unwrap();
    let (p1, p2) = ([0.0, 0.0, 0.2, 0.4], [0.6, 0.8, 1.0, 1.0]);
    let merged = overlap_mean(&[pv(p1.to_vec()), pv(p2.to_vec())], &l).unwrap();
    let oracle = [p1[0], p1[1], (p1[2] + p2[0]) / 2.0, (p1[3] + p2[1]) / 2.0, p2[2], p2[3]];
    let printed = [0.0, 0.0, 0.4, 0.6, 1.0, 1.0];
    let exact = merged.as_slice() == oracle;
    let near = merged
        .as_slice()
        .iter()
        .zip(printed)
        .all(|(a, b)| (a - b).abs() <= 1e-15);
    check(exact && near, format!("v=2 example merged to {:?}", merged.as_slice()))
}

fn criterion_7() -> Outcome {
    let data = dataset(8, 0.0, 8192, 7);
    let mut bank = ModelBank::new();
    bank.insert(8, train(&data, 8));
    for t in [16, 32] {
        bank.insert(t, train(&dataset(t, 0.0, 4096, 70 + t as u64), t));
    }
    let validation = &data.validation[..200];
    let eval = FitnessEvaluator::new(&bank, validation).map_err(|e| e.to_string())?;
    let ga_cfg = GaConfig {
        seed: 7,
        ..GaConfig::default()
    };
    let pso_cfg = PsoConfig {
        seed: 7,
        ..PsoConfig::default()
    };
    let mut ga_pool = Vec::new();
    let mut pso_pool = Vec::new();
    for &t in bank.keys() {
        let ga = ga_optimize(&ga_cfg, t, &eval).map_err(|e| e.to_string())?;
        if ga.best_history.len() != ga_cfg.epochs + 1 || ga.best_history.windows(2).any(|w| w[1] > w[0]) {
            return Err(format!(
                "GA history at T={t} is not non-increasing: {:?}",
                ga.best_history
            ));
        }
        let pso = pso_optimize(&pso_cfg, t, &eval).map_err(|e| e.to_string())?;
        ga_pool.extend(ga.ranked);
        pso_pool.extend(pso.ranked);
    }
    let all_feasible = ga_pool.iter().chain(&pso_pool).all(|c| c.is_feasible());
    let sel = select_best(&ga_pool, &pso_pool, &eval).map_err(|e| e.to_string())?;
    check(
        all_feasible && eval.infeasible_requests() == 0 && sel.best.fitness <= 0.02,
        format!(
            "best {} T={} fitness {:.4}; {} fitness requests, {} infeasible",
            sel.best.algorithm,
            sel.best.throughput,
            sel.best.fitness,
            eval.requests(),
            eval.infeasible_requests()
        ),
    )
}

fn criterion_8() -> Outcome {
    let model = train(&dataset(16, 0.2, 4096, 8), 16);
    let cfg = PipelineConfig::with_defaults(&model);
    for m_in in [1usize, 7, 8, 16, 33, 100, 256] {
        let groups = (m_in as f64 / 4.0).max(1.0);
        let spec = SynthSpec::new(m_in, 0.01, 0.2, groups, 2.0, 1, m_in as u64);
        let rec = generate_record(&spec, 0).map_err(|e| e.to_string())?;
        let out = segment(&rec.matrix, &cfg).map_err(|e| e.to_string())?;
        if out.segmentation.len() != m_in || out.denoised != segmentation_to_blocks(&out.segmentation) {
            return Err(format!("m_in={m_in}: got length {}", out.segmentation.len()));
        }
    }
    Ok("sizes 1, 7, 8, 16, 33, 100, 256 preserved; denoised matrices match".into())
}

fn criterion_9() -> Outcome {
    let vars = [0.0, 0.2, 0.5];
    let data: Vec<_> = vars
        .iter()
        .enumerate()
        .map(|(i, &v)| dataset(8, v, 8192, 90 + i as u64))
        .collect();
    let models: Vec<_> = data.iter().map(|d| train(d, 8)).collect();
    let grid = models
        .iter()
        .map(|m| {
            let cfg = PipelineConfig::with_defaults(m);
            data.iter()
                .map(|d| evaluate(&d.test, &cfg).map(|r| r.wd))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let tr = transferability(&grid).map_err(|e| e.to_string())?;
    check(
        tr[2] <= tr[0],
        format!(
            "Transferability(WD): trained at 0 -> {:.4}, 0.2 -> {:.4}, 0.5 -> {:.4}",
            tr[0], tr[1], tr[2]
        ),
    )
}

fn cli(args: &[String]) -> Result<(), String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cosenet_cli::run(
        std::iter::once("cosenet".to_string()).chain(args.iter().cloned()),
        &mut out,
        &mut err,
    );
    if code == 0 {
        Ok(())
    } else {
        Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err)))
    }
}

/// Every file under `dir`, with manifest durations zeroed.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let mut bytes = std::fs::read(&path).unwrap();
            if path.to_string_lossy().ends_with("manifest.json") {
                let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                v["duration_secs"] = serde_json::json!(0.0);
                bytes = serde_json::to_vec(&v).unwrap();
            }
            files.insert(path.strip_prefix(dir).unwrap().display().to_string(), bytes);
        }
    }
    files
}

fn criterion_10() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let s = |p: &str| root.join(p).display().to_string();
    let commands: Vec<Vec<String>> = [
        vec![
            "synth",
            "--size",
            "8",
            "--noise-mean",
            "0.01",
            "--noise-var",
            "0.2",
            "--groups-mean",
            "3",
            "--groups-var",
            "1",
            "--count",
            "400",
            "--seed",
            "10",
            "--out",
            &s("db"),
            "--export-matrices",
            "2",
        ],
        vec![
            "train",
            "--dataset",
            &s("db"),
            "--throughput",
            "8",
            "--out",
            &s("m8.json"),
        ],
        vec![
            "train",
            "--dataset",
            &s("db"),
            "--throughput",
            "8",
            "--standardize",
            "--out",
            &s("m8s.json"),
        ],
        vec![
            "segment",
            "--model",
            &s("m8.json"),
            "--input",
            &s("db/matrices/test-00000.csv"),
            "--scale",
            "0.3,0.4,0.2",
            "--threshold",
            "0.6",
            "--out",
            &s("seg.json"),
            "--emit-matrix",
            &s("den.csv"),
        ],
        vec![
            "eval",
            "--model",
            &s("m8.json"),
            "--dataset",
            &s("db"),
            "--out",
            &s("eval.json"),
        ],
        vec![
            "tune",
            "--models",
            &s("m8.json"),
            "--dataset",
            &s("db"),
            "--seed",
            "3",
            "--out",
            &s("tune.json"),
            "--validation-limit",
            "30",
            "--epochs",
            "3",
            "--population",
            "20",
            "--offspring",
            "10",
            "--particles",
            "6",
        ],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();

    let mut runs = Vec::new();
    for _ in 0..2 {
        for c in &commands {
            cli(c)?;
        }
        runs.push(snapshot(root));
    }
    let differing: Vec<_> = runs[0]
        .iter()
        .filter(|(k, v)| runs[1].get(*k) != Some(v))
        .map(|(k, _)| k.clone())
        .collect();
    check(
        differing.is_empty() && runs[0].len() == runs[1].len(),
        format!(
            "{} output files compared across two runs; differing: {differing:?}",
            runs[0].len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("layout law", Duration::from_secs(1), criterion_1),
        (
            "rescale fixed point, identity, monotonicity",
            Duration::from_secs(1),
            criterion_2,
        ),
        (
            "noise-free perfect recovery (T=8)",
            Duration::from_secs(30),
            criterion_3,
        ),
        (
            "noisy synthetic performance (T=16, var 0.2)",
            Duration::from_secs(180),
            criterion_4,
        ),
        ("WindowDiff oracle equivalence", Duration::from_secs(5), criterion_5),
        ("Overlap Mean properties", Duration::from_secs(1), criterion_6),
        ("tuner soundness", Duration::from_secs(600), criterion_7),
        ("end-to-end size law (T=16)", Duration::from_secs(30), criterion_8),
        ("transferability direction", Duration::from_secs(300), criterion_9),
        ("reproducibility of CLI outputs", Duration::from_secs(600), criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= *budget => (true, d),
            Ok(d) => (false, format!("{d}; exceeded the {budget:?} budget")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {:>2}: {name} ({:.2} s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
