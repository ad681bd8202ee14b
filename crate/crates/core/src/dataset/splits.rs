use std::ops::Range;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::config::Scenario;
use crate::rng::{derive_stream, owner, Purpose, StreamId};

use super::windows::DaySeries;
use super::DatasetError;

/// Share of ordinary days held out for the in-distribution test split.
pub const HELD_OUT_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    TestIid,
    TestSmall,
    TestLarge,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Train, Split::TestIid, Split::TestSmall, Split::TestLarge];

    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayRole {
    Train,
    HeldOut,
    Shock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayPlan {
    pub day_index: usize,
    pub scenario: Scenario,
    pub role: DayRole,
    pub windows: usize,
    /// Leading windows whose last record precedes the shock.
    pub pre_shock_windows: usize,
}

impl DayPlan {
    /// Window start ranges of this day that fall in `split`.
    pub fn ranges(&self, split: Split) -> Vec<Range<usize>> {
        let all = 0..self.windows;
        let pre = 0..self.pre_shock_windows;
        let post = self.pre_shock_windows..self.windows;
        let shock_split = match self.scenario {
            Scenario::Small => Split::TestSmall,
            Scenario::Large => Split::TestLarge,
            Scenario::Ordinary => Split::TestIid,
        };
        let r = match (self.role, split) {
            (DayRole::Train, Split::Train) => all,
            (DayRole::HeldOut, Split::TestIid) => all,
            (DayRole::Shock, Split::TestIid) => pre,
            (DayRole::Shock, s) if s == shock_split => post,
            _ => 0..0,
        };
        if r.is_empty() {
            vec![]
        } else {
            vec![r]
        }
    }

    pub fn split_of(&self, start: usize) -> Split {
        match self.role {
            DayRole::Train => Split::Train,
            DayRole::HeldOut => Split::TestIid,
            DayRole::Shock if start < self.pre_shock_windows => Split::TestIid,
            DayRole::Shock if self.scenario == Scenario::Large => Split::TestLarge,
            DayRole::Shock => Split::TestSmall,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub horizon: usize,
    pub days: Vec<DayPlan>,
}

impl SplitPlan {
    pub fn count(&self, split: Split) -> usize {
        self.days
            .iter()
            .flat_map(|d| d.ranges(split))
            .map(|r| r.len())
            .sum()
    }

    pub fn counts(&self) -> [usize; 4] {
        Split::ALL.map(|s| self.count(s))
    }

    pub fn total_windows(&self) -> usize {
        self.days.iter().map(|d| d.windows).sum()
    }
}

/// Assigns days to roles. Shock days are tested before and after the shock;
/// a seeded share of the ordinary days is held out, the rest trains.
pub fn make_splits(days: &[DaySeries], h: usize, root_seed: u64) -> Result<SplitPlan, DatasetError> {
    let mut ordinary: Vec<usize> = days
        .iter()
        .filter(|d| d.scenario == Scenario::Ordinary)
        .map(|d| d.day_index)
        .collect();
    ordinary.sort_unstable();
    let held = if ordinary.len() >= 2 {
        ((ordinary.len() as f64 * HELD_OUT_FRACTION).round() as usize).max(1)
    } else {
        0
    };
    let mut rng = derive_stream(root_seed, StreamId::new(0, owner::RUN, Purpose::Split));
    ordinary.shuffle(&mut rng);
    let held_out = &ordinary[..held];

    let plan = SplitPlan {
        horizon: h,
        days: days
            .iter()
            .map(|d| DayPlan {
                day_index: d.day_index,
                scenario: d.scenario,
                role: match d.scenario {
                    Scenario::Ordinary if held_out.contains(&d.day_index) => DayRole::HeldOut,
                    Scenario::Ordinary => DayRole::Train,
                    _ => DayRole::Shock,
                },
                windows: d.window_count(h),
                pre_shock_windows: d.pre_shock_windows(h),
            })
            .collect(),
    };
    let counts = plan.counts();
    if counts.contains(&0) {
        return Err(DatasetError::EmptySplit(format!(
            "window counts train={} test_iid={} test_small={} test_large={}",
            counts[0], counts[1], counts[2], counts[3]
        )));
    }
    Ok(plan)
}
