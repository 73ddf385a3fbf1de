//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p seadet-cli --test acceptance`. The process exits 0
//! even when a criterion fails so that the workspace test run stays usable;
//! set `SEADET_ACCEPTANCE_STRICT=1` to exit 1 on any failure.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use seadet::eval::{self, SplitSpec};
use seadet::far::{fit_with_far, FarTarget};
use seadet::features::{
    apply_normalization, extract_all, fit_normalization, fpar, the, tie, FeatureConfig, FeatureVector, DEFAULT_TAU_GRID,
};
use seadet::signal::{segment_dataset, synthesize_dataset, Label, DEFAULT_STEP, DEFAULT_WINDOW, IPIX_CELL_LEN};
use seadet::svm::{train, KernelConfig, KernelForm, SvmModel, TrainConfig, Trainer};
use seadet_testkit::{dft, fbm, histogram_entropy, qp, rng, stats};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

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

// ---------------------------------------------------------------- fixtures

const DELTA: f64 = 1.0;

fn kernel() -> KernelConfig {
    KernelConfig::new(DELTA, KernelForm::Paper)
}

fn features(seed: u64, scr_db: f64, cells: usize) -> Vec<FeatureVector> {
    let d = synthesize_dataset(seed, scr_db, cells, IPIX_CELL_LEN, 1.0).expect("synthesis");
    let segs = segment_dataset(&d, DEFAULT_STEP, DEFAULT_WINDOW).expect("segmentation");
    extract_all(&segs, &FeatureConfig::default()).expect("features")
}

/// Normalized training half and raw test half of a seed-42 style dataset.
struct Prepared {
    train: Vec<FeatureVector>,
    raw_train: Vec<FeatureVector>,
    test: Vec<FeatureVector>,
    n_clutter: usize,
}

fn prepare(seed: u64, scr_db: f64) -> Prepared {
    let all = features(seed, scr_db, 14);
    let split = eval::split(&all, &SplitSpec { seed, ..SplitSpec::default() }).expect("split");
    let stats = fit_normalization(&split.train).expect("normalization");
    let train: Vec<FeatureVector> = split.train.iter().map(|v| apply_normalization(v, &stats)).collect();
    let n_clutter = train.iter().filter(|v| v.label == Label::Clutter).count();
    Prepared {
        train,
        raw_train: split.train,
        test: split.test,
        n_clutter,
    }
}

/// Small random two-class problem with per-class penalties.
struct Small {
    data: Vec<FeatureVector>,
    kernel: KernelConfig,
    beta0: f64,
    beta1: f64,
}

fn small(seed: u64, form: KernelForm, equal: bool) -> Small {
    let mut r = rng(seed);
    let m = r.gen_range(4..=20);
    let shift = r.gen_range(0.0..1.5);
    let data = (0..m)
        .map(|i| {
            let label = if (i + seed as usize) % 2 == 0 { Label::Target } else { Label::Clutter };
            let c = if label == Label::Target { shift } else { -shift };
            FeatureVector::from_array(
                [c + r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)],
                label,
            )
        })
        .collect();
    let beta0 = 10f64.powf(r.gen_range(-1.0..1.0));
    let beta1 = if equal { beta0 } else { 10f64.powf(r.gen_range(-1.0..1.0)) };
    Small {
        data,
        kernel: KernelConfig::new(r.gen_range(0.5..2.0), form),
        beta0,
        beta1,
    }
}

fn tight(beta0: f64, beta1: f64) -> TrainConfig {
    TrainConfig {
        kkt_tol: 1e-12,
        max_passes: 100_000,
        ..TrainConfig::with_penalties(beta0, beta1)
    }
}

/// Kernel written out independently of the library.
fn oracle_kernel(a: &[f64; 3], b: &[f64; 3], k: &KernelConfig) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let num = match k.form {
        KernelForm::Paper => d2.sqrt(),
        KernelForm::Gaussian => d2,
    };
    (-num / (2.0 * k.delta * k.delta)).exp()
}

fn oracle(p: &Small, c: &[f64]) -> qp::QpSolution {
    let pts: Vec<[f64; 3]> = p.data.iter().map(|f| f.as_array()).collect();
    let gram: Vec<Vec<f64>> = pts
        .iter()
        .map(|a| pts.iter().map(|b| oracle_kernel(a, b, &p.kernel)).collect())
        .collect();
    let y: Vec<f64> = p.data.iter().map(|f| f.label.sign()).collect();
    qp::solve_svm_dual(&gram, &y, c)
}

fn oracle_decision(p: &Small, sol: &qp::QpSolution, x: &[f64; 3]) -> f64 {
    p.data
        .iter()
        .zip(&sol.alpha)
        .map(|(f, a)| a * f.label.sign() * oracle_kernel(&f.as_array(), x, &p.kernel))
        .sum::<f64>()
        - sol.bias
}

// ---------------------------------------------------------------- criteria

fn smo_vs_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut disagreements = 0;
    for seed in 0..25u64 {
        let form = if seed % 2 == 0 { KernelForm::Paper } else { KernelForm::Gaussian };
        let p = small(seed, form, false);
        let m = match train(&p.data, &p.kernel, &tight(p.beta0, p.beta1)) {
            Ok(m) => m,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        let c: Vec<f64> = p
            .data
            .iter()
            .map(|f| if f.label == Label::Target { p.beta1 } else { p.beta0 })
            .collect();
        let sol = oracle(&p, &c);
        worst = worst.max((m.dual_objective() - sol.objective).abs());
        let mut r = rng(seed + 1000);
        let probes = (0..50).map(|_| [r.gen_range(-3.0..3.0), r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)]);
        for x in p.data.iter().map(|f| f.as_array()).chain(probes) {
            if (m.decision_value(&x) > 0.0) != (oracle_decision(&p, &sol, &x) > 0.0) {
                disagreements += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-6 && disagreements == 0 && t < Duration::from_secs(10),
        format!("max |Δ dual| = {worst:.2e}, {disagreements} decision disagreements, {t:.2?}"),
    )
}

fn kkt_suite() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut check = |fit: Result<SvmModel, seadet::svm::SvmError>, data: &[FeatureVector], tol: f64, what: String| {
        checked += 1;
        match fit {
            Ok(m) => {
                let r = m.kkt_report(data);
                let ok = m.converged()
                    && r.equality_residual <= 1e-9
                    && r.box_violations == 0
                    && r.max_kkt_violation <= tol + 1e-9;
                if !ok {
                    failures.push(format!("{what}: {r:?}"));
                }
            }
            Err(e) => failures.push(format!("{what}: {e}")),
        }
    };
    for seed in 0..200u64 {
        let form = if seed % 3 == 0 { KernelForm::Gaussian } else { KernelForm::Paper };
        let p = small(seed, form, seed % 5 == 0);
        let tol = 10f64.powi(-((seed % 6) as i32 + 2));
        let cfg = TrainConfig {
            kkt_tol: tol,
            max_passes: 10_000,
            ..TrainConfig::with_penalties(p.beta0, p.beta1)
        };
        check(train(&p.data, &p.kernel, &cfg), &p.data, tol, format!("cold seed {seed}"));
    }
    // Warm-started chains, as the controller runs them.
    for seed in 0..20u64 {
        let mut r = rng(seed + 500);
        let data: Vec<FeatureVector> = (0..300)
            .map(|i| {
                let label = if i % 5 == 0 { Label::Target } else { Label::Clutter };
                let c = if label == Label::Target { 1.0 } else { 0.0 };
                FeatureVector::from_array(
                    [c + r.sample::<f64, _>(StandardNormal), r.sample(StandardNormal), r.sample(StandardNormal)],
                    label,
                )
            })
            .collect();
        let mut trainer = Trainer::new(&data, kernel(), 16).expect("trainer");
        for (k, e) in [0.0, -2.0, -1.0, -3.0, 0.5, -1.5].iter().enumerate() {
            let cfg = TrainConfig::with_penalties(10f64.powf(*e), 1.0);
            check(trainer.fit(&cfg, k > 0), &data, cfg.kkt_tol, format!("warm seed {seed} step {k}"));
        }
    }
    drop(check);
    let detail = match failures.first() {
        None => format!("{checked} models satisfy box, equality and KKT tolerances"),
        Some(f) => format!("{} of {checked} models violate: {f}", failures.len()),
    };
    outcome(failures.is_empty(), detail)
}

fn feature_oracles() -> Outcome {
    let start = Instant::now();
    let mut r = rng(11);
    let mut tie_err = 0.0f64;
    for trial in 0..200 {
        let n = r.gen_range(2..5000);
        let k = [1, 2, 7, 100, 256][trial % 5];
        let x: Vec<f64> = match trial % 3 {
            0 => (0..n).map(|_| r.gen::<f64>()).collect(),
            1 => (0..n).map(|_| Exp::new(1.0).unwrap().sample(&mut r)).collect(),
            _ => (0..n).map(|_| r.gen_range(0..5) as f64 * 0.25).collect(),
        };
        tie_err = tie_err.max((tie(&x, k).unwrap() - histogram_entropy(&x, k)).abs());
    }
    let mut fpar_err = 0.0f64;
    for _ in 0..3 {
        let x: Vec<f64> = (0..4096)
            .map(|_| r.sample::<f64, _>(StandardNormal).hypot(r.sample(StandardNormal)))
            .collect();
        let slow = dft::naive_fpar(&x);
        fpar_err = fpar_err.max(((fpar(&x).unwrap() - slow) / slow).abs());
    }
    let mean_the = |h: Option<f64>| {
        (0..100u64)
            .map(|seed| {
                let mut r = rng(1000 + seed);
                let x = match h {
                    Some(h) => fbm::fgn(4096, h, &mut r),
                    None => (0..4096).map(|_| r.sample(StandardNormal)).collect(),
                };
                the(&x, &DEFAULT_TAU_GRID).unwrap()
            })
            .sum::<f64>()
            / 100.0
    };
    let (white, h3, h8) = (mean_the(None), mean_the(Some(0.3)), mean_the(Some(0.8)));
    let t = start.elapsed();
    let pass = tie_err <= 1e-12
        && fpar_err <= 1e-9
        && (white - 0.5).abs() <= 0.1
        && (h3 - 0.3).abs() <= 0.1
        && (h8 - 0.8).abs() <= 0.1
        && t < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "TIE err {tie_err:.1e}, FPAR rel err {fpar_err:.1e}, THE white {white:.3}, H0.3 → {h3:.3}, H0.8 → {h8:.3}, {t:.2?}"
        ),
    )
}

fn far_control(data: &Prepared) -> Outcome {
    if data.n_clutter < 20_000 {
        return outcome(false, format!("only {} clutter segments", data.n_clutter));
    }
    let mut parts = Vec::new();
    let mut pass = true;
    for (p_f, eta) in [(0.1, 0.001), (0.01, 0.001), (0.001, 0.0005)] {
        let start = Instant::now();
        let trace = match fit_with_far(&data.train, &kernel(), &FarTarget::new(p_f, eta)) {
            Ok(t) => t,
            Err(e) => return outcome(false, format!("P_f {p_f}: {e}")),
        };
        let t = start.elapsed();
        let got = trace.achieved_p_f();
        let ok = trace.converged
            && (got - p_f).abs() <= eta
            && trace.iterations.len() <= 50
            && t < Duration::from_secs(300);
        pass &= ok;
        let unconverged = trace.iterations.iter().filter(|i| !i.svm_converged).count();
        parts.push(format!(
            "{p_f}: P_F {got:.5} in {} fits ({unconverged} hit the SMO budget), {t:.1?}",
            trace.iterations.len()
        ));
    }
    outcome(pass, format!("{} clutter; {}", data.n_clutter, parts.join("; ")))
}

/// Training FAR at each point of a penalty grid, warm-starting along it.
fn far_along(data: &Prepared, grid: &[(f64, f64)]) -> Vec<f64> {
    let mut trainer = Trainer::new(&data.train, kernel(), 512).expect("trainer");
    grid.iter()
        .enumerate()
        .map(|(k, &(b0, b1))| {
            let m = trainer.fit(&TrainConfig::with_penalties(b0, b1), k > 0).expect("fit");
            seadet::far::empirical_far(&m, &data.train).expect("far")
        })
        .collect()
}

fn beta_trends(data: &Prepared) -> Outcome {
    let start = Instant::now();
    let n_c = data.n_clutter as f64;
    // The FAR transition sits near β0 ≈ 2 / N_c, so the β0 grid is laid out
    // in units of 1 / N_c around it.
    let beta0: Vec<f64> = (-2..=5).map(|k| 2f64.powi(k) / n_c).collect();
    let far0 = far_along(data, &beta0.iter().map(|&b| (b, 1.0)).collect::<Vec<_>>());
    let rho0 = stats::spearman(&beta0, &far0);

    let beta1: Vec<f64> = (-3..=4).map(|k| 2f64.powi(k)).collect();
    let far1 = far_along(data, &beta1.iter().map(|&b| (1.0, b)).collect::<Vec<_>>());
    let rho1 = stats::spearman(&beta1, &far1);

    // Same β1 grid at a β0 inside the transition, for the record.
    let far1_scaled = far_along(data, &beta1.iter().map(|&b| (3.0 / n_c, b)).collect::<Vec<_>>());
    let rho1_scaled = stats::spearman(&beta1, &far1_scaled);

    let t = start.elapsed();
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    let pass = rho0 <= -0.8 && rho1 >= 0.8 && t < Duration::from_secs(600);
    let mut detail = format!(
        "ρ(β0, P_F) = {rho0:.3} [P_F {}]; ρ(β1, P_F) at β0 = 1: {rho1:.3} [P_F {}]",
        fmt(&far0),
        fmt(&far1)
    );
    if !(rho1 >= 0.8) {
        detail += &format!(
            "; classes are separable so P_F is flat at β0 = 1. At β0 = 3/N_c: ρ = {rho1_scaled:.3} [P_F {}]",
            fmt(&far1_scaled)
        );
    }
    detail += &format!(", {t:.1?}");
    outcome(pass, detail)
}

fn detector_ordering(ten_db: &Prepared) -> Outcome {
    let zero_db = prepare(42, 0.0);
    let target = FarTarget::new(0.001, 0.0005);
    let mut parts = Vec::new();
    let mut pass = true;
    let mut pd = Vec::new();
    for (scr, data) in [(0.0, &zero_db), (10.0, ten_db)] {
        let fitted = match eval::fit_detector(&data.raw_train, &kernel(), &target, &TrainConfig::default()) {
            Ok(f) => f,
            Err(e) => return outcome(false, format!("{scr} dB: {e}")),
        };
        let p_d = eval::detection_probability(&fitted.model, &data.test).expect("p_d");
        let achieved = fitted.trace.achieved_p_f();
        let base = eval::hurst_threshold_baseline(&data.raw_train, &data.test, achieved).expect("baseline");
        pass &= fitted.trace.converged && p_d >= base.p_d;
        pd.push(p_d);
        parts.push(format!(
            "{scr} dB: P_d {p_d:.4} vs Hurst {:.4} at P_F {achieved:.5}",
            base.p_d
        ));
    }
    pass &= pd[1] >= pd[0];
    outcome(pass, parts.join("; "))
}

fn reduction_identity() -> Outcome {
    let mut worst_a = 0.0f64;
    let mut worst_b = 0.0f64;
    let mut checked = 0;
    for seed in 100..300u64 {
        if checked == 10 {
            break;
        }
        let p = small(seed, KernelForm::Paper, true);
        // The bias is only unique with a multiplier strictly inside the box.
        let sol = oracle(&p, &vec![p.beta0; p.data.len()]);
        if !sol.polished {
            continue;
        }
        checked += 1;
        // The weighted path: warm-started from an unequal fit, then β0 = β1.
        let mut trainer = Trainer::new(&p.data, p.kernel, 1).expect("trainer");
        trainer.fit(&tight(p.beta0 * 0.3, p.beta1), false).expect("fit");
        let m = trainer.fit(&tight(p.beta0, p.beta1), true).expect("fit");
        for (a, b) in m.full_alphas(p.data.len()).iter().zip(&sol.alpha) {
            worst_a = worst_a.max((a - b).abs());
        }
        worst_b = worst_b.max((m.bias - sol.bias).abs());
    }
    outcome(
        checked == 10 && worst_a <= 1e-8 && worst_b <= 1e-8,
        format!("{checked} problems: max |Δα| = {worst_a:.1e}, max |Δb| = {worst_b:.1e}"),
    )
}

fn run_pipeline(dir: &Path) -> Result<BTreeMap<String, String>, String> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let steps: [Vec<String>; 4] = [
        vec!["generate", "--seed", "42", "--cells", "5", "--samples", "16384", "--out", &p("data")]
            .into_iter()
            .map(String::from)
            .collect(),
        vec!["extract".into(), "--input".into(), p("data"), "--out".into(), p("features.csv")],
        vec![
            "train".into(),
            "--features".into(),
            p("features.csv"),
            "--pf".into(),
            "0.05".into(),
            "--eta".into(),
            "0.02".into(),
            "--model".into(),
            p("model.json"),
        ],
        vec![
            "evaluate".into(),
            "--features".into(),
            p("features.csv"),
            "--pf-grid".into(),
            "0.02,0.05,0.1".into(),
            "--eta".into(),
            "0.02".into(),
            "--baseline".into(),
            "hurst".into(),
            "--report".into(),
            p("report.json"),
        ],
    ];
    for args in steps {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_seadet"))
            .args(&args)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "`seadet {}` failed: {}",
                args[0],
                String::from_utf8_lossy(&out.stderr).trim()
            ));
        }
    }
    let mut hashes = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = e.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                hashes.insert(rel, format!("{:x}", Sha256::digest(&bytes)));
            }
        }
    }
    Ok(hashes)
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ha, hb) = match (run_pipeline(a.path()), run_pipeline(b.path())) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e),
    };
    let differing: Vec<&String> = ha.keys().filter(|k| ha.get(*k) != hb.get(*k)).collect();
    outcome(
        ha.len() == hb.len() && differing.is_empty(),
        if differing.is_empty() {
            format!("{} output files hash identically", ha.len())
        } else {
            format!("differing outputs: {differing:?}")
        },
    )
}

// ---------------------------------------------------------------- driver

fn report(id: usize, name: &str, o: &Outcome) {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {id} [{verdict}] {name}: {}", o.detail);
}

fn main() {
    // `cargo test` passes harness flags; a listing request expects no output.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut results = Vec::new();
    let mut record = |id: usize, name: &str, o: Outcome| {
        report(id, name, &o);
        results.push(o.pass);
    };
    record(1, "SMO matches dense QP oracle", smo_vs_oracle());
    record(2, "KKT and feasibility after training", kkt_suite());
    record(3, "feature oracles", feature_oracles());
    let ten_db = prepare(42, 10.0);
    record(4, "FAR control on seed-42 10 dB set", far_control(&ten_db));
    record(5, "penalty trends", beta_trends(&ten_db));
    record(6, "detector ordering at 0 and 10 dB", detector_ordering(&ten_db));
    record(7, "equal penalties reduce to unweighted SVM", reduction_identity());
    record(8, "end-to-end determinism", determinism());

    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 && std::env::var_os("SEADET_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
