use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_day_with, RunOptions, ScenarioError};
use crate::config::{Mix, Scenario, ScenarioConfig};
use crate::dataset::write_day_csv;
use crate::rng::{derive_stream, owner, Purpose, StreamId};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const ROUNDING_RULE: &str = "largest-remainder, ties to ordinary then small then large";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioCounts {
    pub ordinary: usize,
    pub small: usize,
    pub large: usize,
}

impl ScenarioCounts {
    pub fn get(&self, s: Scenario) -> usize {
        match s {
            Scenario::Ordinary => self.ordinary,
            Scenario::Small => self.small,
            Scenario::Large => self.large,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayEntry {
    pub day_index: usize,
    pub scenario: Scenario,
    /// Root seed; together with `day_index` it fixes every stream of the day.
    pub seed: u64,
    pub status: DayStatus,
    pub file: Option<String>,
    /// Shock time in nanoseconds since the open.
    pub t_s: Option<u64>,
    pub direction: Option<i8>,
    pub magnitude: Option<f64>,
    pub records: usize,
    pub skipped_snapshots: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub root_seed: u64,
    pub n_days: usize,
    pub rounding_rule: String,
    pub counts: ScenarioCounts,
    pub config_fingerprint: String,
    pub session_length: f64,
    pub snapshot_period: f64,
    pub days: Vec<DayEntry>,
}

#[derive(Debug, Clone, Copy)]
pub struct GenerateOptions {
    /// Worker threads; 1 runs days sequentially.
    pub parallel: usize,
    /// Write a `time,seq,target,kind` trace next to every day file.
    pub trace: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self { parallel: 1, trace: false }
    }
}

/// Day counts per scenario. Floors first, then the leftover days go to the
/// largest fractional parts.
pub fn scenario_counts(n_days: usize, mix: &Mix) -> ScenarioCounts {
    let quotas: Vec<f64> = Scenario::ALL.iter().map(|s| mix.get(*s) * n_days as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..3).collect();
    // Stable sort keeps the ordinary, small, large preference on ties.
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa)
    });
    for &i in order.iter().take(n_days.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    ScenarioCounts {
        ordinary: counts[0],
        small: counts[1],
        large: counts[2],
    }
}

/// Scenario of every day index, in a seeded random order.
pub fn assign_scenarios(cfg: &ScenarioConfig) -> Vec<Scenario> {
    let counts = scenario_counts(cfg.n_days, &cfg.mix);
    let mut days: Vec<Scenario> = Scenario::ALL
        .iter()
        .flat_map(|s| std::iter::repeat_n(*s, counts.get(*s)))
        .collect();
    let mut rng = derive_stream(cfg.root_seed, StreamId::new(0, owner::RUN, Purpose::Assignment));
    days.shuffle(&mut rng);
    days
}

pub fn day_file_name(day_index: usize, scenario: Scenario) -> String {
    format!("day_{day_index:04}_{scenario}.csv")
}

/// Simulates every day of `cfg`, writing one CSV per day, `config.toml` and
/// the manifest into `out`. A day that fails is recorded as such and the run
/// continues.
pub fn generate_dataset(cfg: &ScenarioConfig, out: &Path, opts: GenerateOptions) -> Result<Manifest, ScenarioError> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let scenarios = assign_scenarios(cfg);
    let run_one = |(day_index, scenario): (usize, Scenario)| -> Result<DayEntry, ScenarioError> {
        let run_opts = RunOptions { order_log: false, trace: opts.trace };
        let mut entry = DayEntry {
            day_index,
            scenario,
            seed: cfg.root_seed,
            status: DayStatus::Failed,
            file: None,
            t_s: None,
            direction: None,
            magnitude: None,
            records: 0,
            skipped_snapshots: 0,
            error: None,
        };
        match run_day_with(cfg, scenario, day_index, run_opts) {
            Ok(day) => {
                let name = day_file_name(day_index, scenario);
                write_day_csv(&out.join(&name), &day.snapshots).map_err(|e| ScenarioError::Dataset(e.to_string()))?;
                if opts.trace {
                    let f = fs::File::create(out.join(format!("day_{day_index:04}.trace")))?;
                    day.trace.write_lines(std::io::BufWriter::new(f))?;
                }
                entry.status = DayStatus::Ok;
                entry.file = Some(name);
                entry.t_s = day.shock.map(|s| s.t_s.as_nanos());
                entry.direction = day.shock.map(|s| s.direction);
                entry.magnitude = day.shock.map(|s| s.magnitude);
                entry.records = day.snapshots.len();
                entry.skipped_snapshots = day.skipped_snapshots;
            }
            Err(e) => entry.error = Some(e.to_string()),
        }
        Ok(entry)
    };
    let jobs: Vec<(usize, Scenario)> = scenarios.iter().copied().enumerate().collect();
    let days: Vec<DayEntry> = if opts.parallel <= 1 {
        jobs.into_iter().map(run_one).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.parallel)
            .build()
            .map_err(|e| ScenarioError::Dataset(e.to_string()))?;
        pool.install(|| jobs.into_par_iter().map(run_one).collect::<Result<_, _>>())?
    };

    fs::write(out.join("config.toml"), cfg.to_toml_string())?;
    let manifest = Manifest {
        format_version: 1,
        root_seed: cfg.root_seed,
        n_days: cfg.n_days,
        rounding_rule: ROUNDING_RULE.into(),
        counts: scenario_counts(cfg.n_days, &cfg.mix),
        config_fingerprint: cfg.fingerprint(),
        session_length: cfg.session_length,
        snapshot_period: cfg.snapshot_period,
        days,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(out.join(MANIFEST_FILE), text)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, ScenarioError> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mix(o: f64, s: f64, l: f64) -> Mix {
        Mix { ordinary: o, small: s, large: l }
    }

    #[test]
    fn counts_for_common_sizes() {
        let m = mix(0.5, 0.25, 0.25);
        assert_eq!(scenario_counts(20, &m), ScenarioCounts { ordinary: 10, small: 5, large: 5 });
        assert_eq!(scenario_counts(365, &m), ScenarioCounts { ordinary: 183, small: 91, large: 91 });
        assert_eq!(scenario_counts(3, &m), ScenarioCounts { ordinary: 1, small: 1, large: 1 });
        assert_eq!(scenario_counts(1, &m), ScenarioCounts { ordinary: 1, small: 0, large: 0 });
        assert_eq!(scenario_counts(0, &m), ScenarioCounts { ordinary: 0, small: 0, large: 0 });
    }

    #[test]
    fn counts_always_sum_to_days() {
        for n in 0..200 {
            for m in [mix(0.5, 0.25, 0.25), mix(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), mix(0.1, 0.2, 0.7), mix(1.0, 0.0, 0.0)] {
                let c = scenario_counts(n, &m);
                assert_eq!(c.ordinary + c.small + c.large, n);
                for s in Scenario::ALL {
                    assert!((c.get(s) as f64 - m.get(s) * n as f64).abs() < 1.0);
                }
            }
        }
    }

    #[test]
    fn assignment_is_seeded_permutation() {
        let cfg = ScenarioConfig::desk();
        let a = assign_scenarios(&cfg);
        assert_eq!(a, assign_scenarios(&cfg));
        assert_eq!(a.iter().filter(|s| **s == Scenario::Small).count(), 5);
        let other = ScenarioConfig { root_seed: 7, ..cfg };
        assert_ne!(a, assign_scenarios(&other));
    }
}
