//! Scenario controls and the finite families over which the sublinear
//! expectation is maximised.
//!
//! A scenario picks, on each control interval, a jump measure index `k` and a
//! volatility index `m` from the owning [`UncertaintySet`]. Feedback scenarios
//! look the pair up from a table indexed by control interval and by the bin
//! of the current driver state.

use crate::error::{Error, Result};
use crate::uncertainty::UncertaintySet;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ControlPair {
    pub jump: usize,
    pub vol: usize,
}

impl ControlPair {
    pub fn new(jump: usize, vol: usize) -> Self {
        Self { jump, vol }
    }
}

/// Uniform bins over `[lo, hi]` on one state component. States outside the
/// box clamp to the end bins; a state on an interior boundary belongs to the
/// upper bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateBins {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub component: usize,
}

impl StateBins {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo < hi) || count == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "state bins need lo < hi and at least one bin, got [{lo}, {hi}] with {count}"
            )));
        }
        Ok(Self {
            lo,
            hi,
            count,
            component: 0,
        })
    }

    pub fn on_component(mut self, component: usize) -> Self {
        self.component = component;
        self
    }

    pub fn bin(&self, state: &[f64]) -> usize {
        let x = state.get(self.component).copied().unwrap_or(0.0);
        let width = (self.hi - self.lo) / self.count as f64;
        let raw = ((x - self.lo) / width).floor();
        if raw.is_nan() || raw < 0.0 {
            0
        } else {
            (raw as usize).min(self.count - 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Selection {
    /// One pair per control interval.
    Fixed(Vec<ControlPair>),
    /// `table[interval][bin]`.
    Feedback {
        bins: StateBins,
        table: Vec<Vec<ControlPair>>,
    },
}

/// A piecewise-constant control on the grid `0 = t_0 < … < t_N = T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub time_grid: Vec<f64>,
    pub selection: Selection,
}

impl Scenario {
    /// The same pair on `[0, horizon]`.
    pub fn constant(horizon: f64, pair: ControlPair) -> Self {
        Self {
            time_grid: vec![0.0, horizon],
            selection: Selection::Fixed(vec![pair]),
        }
    }

    pub fn fixed(time_grid: Vec<f64>, pairs: Vec<ControlPair>) -> Result<Self> {
        let s = Self {
            time_grid,
            selection: Selection::Fixed(pairs),
        };
        s.check_shape()?;
        Ok(s)
    }

    pub fn feedback(time_grid: Vec<f64>, bins: StateBins, table: Vec<Vec<ControlPair>>) -> Result<Self> {
        let s = Self {
            time_grid,
            selection: Selection::Feedback { bins, table },
        };
        s.check_shape()?;
        Ok(s)
    }

    pub fn intervals(&self) -> usize {
        self.time_grid.len().saturating_sub(1)
    }

    pub fn horizon(&self) -> f64 {
        *self.time_grid.last().unwrap_or(&0.0)
    }

    fn check_shape(&self) -> Result<()> {
        let g = &self.time_grid;
        if g.len() < 2 || g[0] != 0.0 || g.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput(
                "control grid must start at 0 and be strictly increasing".into(),
            ));
        }
        let n = self.intervals();
        let ok = match &self.selection {
            Selection::Fixed(p) => p.len() == n,
            Selection::Feedback { bins, table } => {
                table.len() == n && table.iter().all(|row| row.len() == bins.count)
            }
        };
        if !ok {
            return Err(Error::InvalidInput(
                "selection table does not match the control grid".into(),
            ));
        }
        Ok(())
    }

    /// Every referenced index exists in `set`.
    pub fn validate(&self, set: &UncertaintySet) -> Result<()> {
        self.check_shape()?;
        let (nj, nv) = set.family_len();
        let pairs: Box<dyn Iterator<Item = &ControlPair>> = match &self.selection {
            Selection::Fixed(p) => Box::new(p.iter()),
            Selection::Feedback { table, .. } => Box::new(table.iter().flatten()),
        };
        for p in pairs {
            if p.jump >= nj || p.vol >= nv {
                return Err(Error::InvalidInput(format!(
                    "control pair ({}, {}) out of range for a family of size ({nj}, {nv})",
                    p.jump, p.vol
                )));
            }
        }
        Ok(())
    }

    /// Index of the control interval containing `t` (right end maps to the
    /// last interval).
    pub fn interval_at(&self, t: f64) -> usize {
        let n = self.intervals();
        let idx = self.time_grid.partition_point(|&g| g <= t);
        idx.saturating_sub(1).min(n - 1)
    }

    /// The `(ν, Q)` indices active on interval `i` given the state read at
    /// its left end.
    pub fn scenario_at(&self, i: usize, state: &[f64]) -> ControlPair {
        match &self.selection {
            Selection::Fixed(p) => p[i.min(p.len() - 1)],
            Selection::Feedback { bins, table } => {
                let row = &table[i.min(table.len() - 1)];
                row[bins.bin(state)]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FamilyMode {
    Single { pair: ControlPair },
    ProductLattice { control_intervals: usize },
    FeedbackLattice {
        control_intervals: usize,
        bins: StateBins,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFamily {
    pub mode: FamilyMode,
    pub cap: usize,
    pub allow_truncation: bool,
}

impl ScenarioFamily {
    pub fn single() -> Self {
        Self {
            mode: FamilyMode::Single {
                pair: ControlPair::new(0, 0),
            },
            cap: 1,
            allow_truncation: false,
        }
    }

    pub fn product_lattice(control_intervals: usize, cap: usize) -> Self {
        Self {
            mode: FamilyMode::ProductLattice { control_intervals },
            cap,
            allow_truncation: false,
        }
    }

    pub fn feedback_lattice(control_intervals: usize, bins: StateBins, cap: usize) -> Self {
        Self {
            mode: FamilyMode::FeedbackLattice {
                control_intervals,
                bins,
            },
            cap,
            allow_truncation: false,
        }
    }

    pub fn with_truncation(mut self, allow: bool) -> Self {
        self.allow_truncation = allow;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumeratedFamily {
    pub scenarios: Vec<Scenario>,
    pub truncated: bool,
    /// Size of the untruncated family, if it fits in `u128`.
    pub full_size: Option<u128>,
}

fn uniform_grid(horizon: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| if i == n { horizon } else { horizon * i as f64 / n as f64 })
        .collect()
}

/// Mixed-radix digits of `index` (most significant first).
fn digits(mut index: u128, radix: u128, len: usize) -> Vec<usize> {
    let mut out = vec![0usize; len];
    for slot in out.iter_mut().rev() {
        *slot = (index % radix) as usize;
        index /= radix;
    }
    out
}

/// Enumerates a family in a fixed order: pairs are ordered jump-major, and
/// the first interval (then the first bin) is the most significant digit.
pub fn enumerate_scenarios(
    family: &ScenarioFamily,
    set: &UncertaintySet,
    horizon: f64,
) -> Result<EnumeratedFamily> {
    if family.cap == 0 {
        return Err(Error::InvalidInput("scenario cap must be at least 1".into()));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    let (nj, nv) = set.family_len();
    let choices = (nj * nv) as u128;
    let pair_of = |d: usize| ControlPair::new(d / nv, d % nv);

    let (slots, intervals) = match &family.mode {
        FamilyMode::Single { pair } => {
            let s = Scenario::constant(horizon, *pair);
            s.validate(set)?;
            return Ok(EnumeratedFamily {
                scenarios: vec![s],
                truncated: false,
                full_size: Some(1),
            });
        }
        FamilyMode::ProductLattice { control_intervals } => (*control_intervals, *control_intervals),
        FamilyMode::FeedbackLattice {
            control_intervals,
            bins,
        } => (control_intervals * bins.count, *control_intervals),
    };
    if intervals == 0 {
        return Err(Error::InvalidInput("at least one control interval is required".into()));
    }
    let full = u32::try_from(slots).ok().and_then(|s| choices.checked_pow(s));
    let take = match full {
        Some(n) if n <= family.cap as u128 => n as usize,
        _ if family.allow_truncation => family.cap,
        _ => {
            return Err(Error::CapExceeded {
                size: full.map_or_else(|| format!("{choices}^{slots}"), |n| n.to_string()),
                cap: family.cap,
            })
        }
    };
    let grid = uniform_grid(horizon, intervals);
    let mut scenarios = Vec::with_capacity(take);
    for idx in 0..take {
        let ds = digits(idx as u128, choices, slots);
        let s = match &family.mode {
            FamilyMode::ProductLattice { .. } => Scenario {
                time_grid: grid.clone(),
                selection: Selection::Fixed(ds.into_iter().map(pair_of).collect()),
            },
            FamilyMode::FeedbackLattice { bins, .. } => Scenario {
                time_grid: grid.clone(),
                selection: Selection::Feedback {
                    bins: bins.clone(),
                    table: ds
                        .chunks(bins.count)
                        .map(|row| row.iter().map(|&d| pair_of(d)).collect())
                        .collect(),
                },
            },
            FamilyMode::Single { .. } => unreachable!(),
        };
        scenarios.push(s);
    }
    Ok(EnumeratedFamily {
        scenarios,
        truncated: full.is_none_or(|n| n > take as u128),
        full_size: full,
    })
}
