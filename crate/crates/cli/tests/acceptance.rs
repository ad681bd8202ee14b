//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Pass criterion numbers (e.g. `3 5`) to run a subset.

#[path = "../../core/tests/common/naive_book.rs"]
mod naive_book;
#[path = "../../core/tests/common/streams.rs"]
mod streams;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use dslob_core::bench::{evaluate, fit_ridge_on_split};
use dslob_core::config::{Scenario, ScenarioConfig};
use dslob_core::dataset::{build_dataset, load_dataset, load_tensors, BuildOptions, FEATURES, LOOKBACK};
use dslob_core::fundamental::{ou_step, sample_arrivals, OuParams, ShockedArrivals};
use dslob_core::kernel::{SimTime, NANOS_PER_SEC};
use dslob_core::rng::{derive_stream, Purpose, StreamId};
use dslob_core::scenario::{generate_dataset, run_day, GenerateOptions};

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scratch() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

fn ac1_matching() -> Result<String, String> {
    let mut rng = derive_stream(7, StreamId::new(0, 0, Purpose::Custom));
    let mut ops = 0;
    for k in 0..1000 {
        let stream = streams::random_stream(&mut rng, 50);
        ops += stream.len();
        streams::check_stream(&stream).map_err(|e| format!("stream {k}: {e}"))?;
    }
    Ok(format!("1000 streams, {ops} operations, identical fills and queues"))
}

fn ac2_ou() -> Result<String, String> {
    let p = OuParams { mu: 1.0, sigma_x2: 1.0, theta: 0.5 };
    let mut rng = derive_stream(11, StreamId::new(0, 0, Purpose::Custom));
    let n = 100_000;
    let xs: Vec<f64> = (0..n).map(|_| ou_step(0.0, 1.0, &p, &mut rng).unwrap()).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let want_mean = 1.0 - (-0.5f64).exp();
    let want_var = (1.0 - (-1.0f64).exp()) / (2.0 * 0.5);
    let se = (want_var / n as f64).sqrt();
    let detail = format!("mean {mean:.5} (target {want_mean:.5}, 3 SE {:.5}), variance {var:.5} (target {want_var:.5})", 3.0 * se);
    ensure((mean - want_mean).abs() <= 3.0 * se, || detail.clone())?;
    ensure((var / want_var - 1.0).abs() <= 0.03, || detail.clone())?;
    Ok(detail)
}

fn ac3_thinning() -> Result<String, String> {
    let cfg = ScenarioConfig::default();
    let spec = cfg.shock_spec(Scenario::Small).unwrap();
    let lambda = cfg.value.lambda_bar / NANOS_PER_SEC as f64;
    let t_s = 5400.0 * NANOS_PER_SEC as f64;
    let span = 3600.0 * NANOS_PER_SEC as f64;
    let intensity = ShockedArrivals {
        lambda_bar: lambda,
        a_s: spec.a_s,
        theta_s: spec.theta_s,
        t_s: Some(t_s),
    };
    let reps = 10_000;
    let mut total = 0usize;
    for r in 0..reps {
        let mut rng = derive_stream(13, StreamId::new(r, 0, Purpose::Arrivals));
        let v = sample_arrivals(0.0, cfg.session_length * NANOS_PER_SEC as f64, &intensity, &mut rng).unwrap();
        total += v.iter().filter(|t| **t >= t_s && **t < t_s + span).count();
    }
    let mean = total as f64 / reps as f64;
    let want = lambda * (span + spec.a_s / spec.theta_s * (1.0 - (-spec.theta_s * span).exp()));
    let detail = format!("mean count {mean:.4}, expected {want:.4} (A_s={}, T=3600 s)", spec.a_s);
    ensure((mean / want - 1.0).abs() <= 0.02, || detail.clone())?;
    Ok(detail)
}

fn ac4_dataset_shape() -> Result<String, String> {
    let cfg = ScenarioConfig::desk();
    ensure(cfg.n_days == 20 && (cfg.mix.ordinary, cfg.mix.small, cfg.mix.large) == (0.5, 0.25, 0.25), || {
        format!("desk preset is not a 20-day 50/25/25 run: {} {:?}", cfg.n_days, cfg.mix)
    })?;
    let tmp = scratch();
    let (gen, out) = (tmp.path().join("gen"), tmp.path().join("ds"));
    let manifest = generate_dataset(&cfg, &gen, GenerateOptions::default()).map_err(|e| e.to_string())?;

    let mut files: BTreeMap<String, usize> = BTreeMap::new();
    for e in fs::read_dir(&gen).map_err(|e| e.to_string())? {
        let name = e.map_err(|e| e.to_string())?.file_name().into_string().unwrap();
        if let Some(stem) = name.strip_suffix(".csv") {
            let scenario = stem.rsplit('_').next().unwrap().to_string();
            *files.entry(scenario).or_default() += 1;
        }
    }
    let got = [files.get("ordinary"), files.get("small"), files.get("large")].map(|c| c.copied().unwrap_or(0));
    ensure(got == [10, 5, 5], || format!("day files per scenario {got:?}"))?;

    let t_s: BTreeMap<usize, u64> = manifest.days.iter().filter_map(|d| d.t_s.map(|t| (d.day_index, t))).collect();
    for (day, t) in &t_s {
        let secs = *t as f64 / NANOS_PER_SEC as f64;
        ensure((3600.0..=7200.0).contains(&secs), || format!("day {day}: T_s {secs} s"))?;
    }

    let desc = build_dataset(&gen, &out, BuildOptions::default()).map_err(|e| e.to_string())?;
    let ds = load_dataset(&out).map_err(|e| e.to_string())?;
    let h = desc.horizon;
    let mut windows = 0usize;
    let mut post = 0usize;
    for day in &ds.days {
        for s in 0..day.window_count(h) {
            let w = day.window(s, h);
            ensure(w.x.len() == LOOKBACK * FEATURES, || format!("day {} window {s}: {} values", day.day_index, w.x.len()))?;
            let expected = t_s.get(&day.day_index).is_some_and(|t| w.end_time >= SimTime(*t));
            ensure((w.regime.code() == 2) == expected, || format!("day {} window {s}: regime {:?}", day.day_index, w.regime))?;
            windows += 1;
            post += expected as usize;
        }
    }

    let tensors = load_tensors(&out).map_err(|e| e.to_string())?;
    let td = &tensors.descriptor;
    ensure(td.window_shape == [LOOKBACK, FEATURES], || format!("export window shape {:?}", td.window_shape))?;
    ensure(tensors.windows.len() == td.count * LOOKBACK * FEATURES, || "export size mismatch".into())?;
    let times: BTreeMap<usize, &[SimTime]> = ds.days.iter().map(|d| (d.day_index, d.times.as_slice())).collect();
    for i in 0..td.count {
        let day = tensors.day_index[i] as usize;
        let end = times[&day][tensors.start[i] as usize + LOOKBACK - 1];
        let expected = t_s.get(&day).is_some_and(|t| end >= SimTime(*t));
        ensure((tensors.regimes[i] == 2) == expected, || format!("exported sample {i}: regime {}", tensors.regimes[i]))?;
    }
    Ok(format!(
        "10/5/5 day files, {windows} windows of {LOOKBACK}x{FEATURES} ({post} post-shock), {} exported",
        td.count
    ))
}

fn ac5_shock_response() -> Result<String, String> {
    let cfg = ScenarioConfig::desk();
    let window = 600 * NANOS_PER_SEC;
    let n = 50;
    let (mut sign, mut spike) = (0, 0);
    for d in 0..n {
        let scenario = if d % 2 == 0 { Scenario::Small } else { Scenario::Large };
        let day = run_day(&cfg, scenario, d).map_err(|e| e.to_string())?;
        let shock = day.shock.ok_or("shock day without a shock")?;
        let ts = shock.t_s.as_nanos();
        let mean_mid = |a: u64, b: u64| {
            let v: Vec<f64> = day
                .snapshots
                .iter()
                .filter(|s| (a..b).contains(&s.time.as_nanos()))
                .filter_map(|s| s.mid().ok())
                .map(|m| m.as_cents())
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let displacement = mean_mid(ts, ts + window) - mean_mid(ts - window, ts);
        if displacement * shock.direction as f64 > 0.0 {
            sign += 1;
        }
        let count = |a: u64, b: u64| day.value_arrivals.iter().filter(|t| (a..b).contains(&t.as_nanos())).count();
        if count(ts, ts + window) > count(ts - window, ts) {
            spike += 1;
        }
    }
    let detail = format!("direction matched {sign}/{n}, arrivals increased {spike}/{n} (10 min before vs after)");
    ensure(sign * 100 >= 90 * n && spike * 100 >= 95 * n, || detail.clone())?;
    Ok(detail)
}

fn dslob(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dslob"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("dslob {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

fn run_pipeline(dir: &Path) -> Result<(), String> {
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    dslob(&["generate", "--config", &config.to_string_lossy(), "--out", &p("gen"), "--days", "6"])?;
    dslob(&["dataset", "--in", &p("gen"), "--out", &p("ds"), "--normalize"])?;
    dslob(&[
        "bench", "--dataset", &p("ds"), "--model", "ridge", "--lambda", "1", "--report", &p("ridge.json"), "--plot-data", &p("plot.csv"),
    ])?;
    dslob(&["bench", "--dataset", &p("ds"), "--model", "persistence", "--report", &p("persistence.json")])
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn ac6_determinism() -> Result<String, String> {
    let (a, b) = (scratch(), scratch());
    run_pipeline(a.path())?;
    run_pipeline(b.path())?;
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    ensure(ta.keys().eq(tb.keys()), || "runs produced different file sets".into())?;
    for (name, bytes) in &ta {
        ensure(tb[name] == *bytes, || format!("{} differs", name.display()))?;
    }
    let bytes: usize = ta.values().map(Vec::len).sum();
    Ok(format!("{} files ({:.1} MB) byte-identical across two runs", ta.len(), bytes as f64 / 1e6))
}

fn ac7_degradation() -> Result<String, String> {
    let base = ScenarioConfig::desk();
    let mut ordered = 0;
    let mut lines = Vec::new();
    for k in 0..5u64 {
        let mut cfg = base.clone();
        cfg.root_seed = base.root_seed + k;
        let tmp = scratch();
        let (gen, out) = (tmp.path().join("gen"), tmp.path().join("ds"));
        generate_dataset(&cfg, &gen, GenerateOptions::default()).map_err(|e| e.to_string())?;
        let opts = BuildOptions { export_stride: None, ..BuildOptions::default() };
        build_dataset(&gen, &out, opts).map_err(|e| e.to_string())?;
        let ds = load_dataset(&out).map_err(|e| e.to_string())?;
        let days = ds.model_days();
        let model = fit_ridge_on_split(&days, ds.plan(), 1.0).map_err(|e| e.to_string())?;
        let r = evaluate(&model, &ds, &days).map_err(|e| e.to_string())?;
        let ok = r.rmse_large > r.rmse_small && r.rmse_small > r.rmse_iid;
        ordered += ok as usize;
        lines.push(format!(
            "seed {}: iid {:.3} small {:.3} large {:.3}{}",
            cfg.root_seed,
            r.rmse_iid,
            r.rmse_small,
            r.rmse_large,
            if ok { "" } else { " (out of order)" }
        ));
    }
    let detail = format!("{ordered}/5 seeds ordered; {}", lines.join("; "));
    ensure(ordered >= 4, || detail.clone())?;
    Ok(detail)
}

fn main() {
    let criteria: [(u32, &str, Option<Duration>, Check); 7] = [
        (1, "matching engine equals reference matcher", Some(Duration::from_secs(10)), ac1_matching),
        (2, "OU transition moments", Some(Duration::from_secs(5)), ac2_ou),
        (3, "thinned arrival counts", Some(Duration::from_secs(30)), ac3_thinning),
        (4, "dataset shape and regimes", Some(Duration::from_secs(600)), ac4_dataset_shape),
        (5, "shock response", None, ac5_shock_response),
        (6, "pipeline determinism", None, ac6_determinism),
        (7, "directional degradation", None, ac7_degradation),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = match (result, budget) {
            (Ok(d), Some(b)) if took > b => Err(format!("{d}; took {:.1} s, budget {} s", took.as_secs_f64(), b.as_secs())),
            (r, _) => r,
        };
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("AC{id} {tag} {name} [{:.1} s]: {detail}", took.as_secs_f64());
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
