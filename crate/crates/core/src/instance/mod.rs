//! Problem data for the curing-workshop planning problem.
//!
//! An [`Instance`] is the complete, immutable input of every model builder,
//! the auditor and the matheuristic. Its JSON form has one top-level key per
//! section below; all arrays are dense and indexed `[entity][period]`, with
//! zero-based indices throughout. The schema is published in
//! `docs/instance.schema.json`.
//!
//! Periods `0..T` are the planning horizon. The [`WarmState`] carries the
//! press and mold history of the periods immediately before period `0`, which
//! the setup, campaign-ending and minimum-run rules look back into.

mod generate;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate, SizeSpec};

pub const SCHEMA_VERSION: &str = "tireplan-instance/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub schema_version: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Cardinalities and membership maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sets {
    pub tires: usize,
    pub items: usize,
    pub presses: usize,
    pub workshops: usize,
    pub drums: usize,
    /// Number of demand classes; class `0` has the highest priority.
    pub classes: usize,
    /// Tire made by each item.
    pub item_tire: Vec<usize>,
    /// Assembling workshop of each item.
    pub item_workshop: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demand {
    /// `[tire][class][period]`
    pub demand: Vec<Vec<Vec<u32>>>,
    /// `[tire][class]`, backorders carried into period 0.
    pub initial_backorder: Vec<Vec<u32>>,
    /// Per-class priority weights. Kept as metadata; no model term reads them.
    pub class_weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inventory {
    /// `[tire]`, stock at the end of the period before the horizon.
    pub initial: Vec<u32>,
    /// `[tire][period]`
    pub min: Vec<Vec<u32>>,
    /// `[tire][period]`
    pub max: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    /// `[tire]`, molds available.
    pub molds: Vec<u32>,
    /// `[tire][press]`, 1 when the tire's molds fit the press.
    pub eligibility: Vec<Vec<u8>>,
    /// `[item][period]`, units cured by one press in one period.
    pub rate: Vec<Vec<u32>>,
    /// `[press][period]`, 1 when the press is available.
    pub maintenance: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    /// `[period]`, targeted mass cured per period.
    pub target: Vec<f64>,
    /// `[period]`
    pub upper_period: Vec<f64>,
    /// `[period]`
    pub lower_period: Vec<f64>,
    /// `[macro period]`
    pub upper_macro: Vec<f64>,
    /// `[macro period]`
    pub lower_macro: Vec<f64>,
    /// `[item]`, mass of one unit.
    pub unit_weight: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Upstream {
    /// `[workshop]`, assembling time available per macro period.
    pub workshop_capacity: Vec<f64>,
    /// `[item]`, assembling time per unit.
    pub unit_time: Vec<f64>,
    /// `[drum]`, drums of each type.
    pub drum_count: Vec<u32>,
    /// `[item][drum]`, molds one drum can feed; `null` when the item does
    /// not use that drum type.
    pub drum_yield: Vec<Vec<Option<u32>>>,
}

/// Operational flexibility limits of the curing workshop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexibilityParams {
    /// Distinct items cured in the same period.
    pub max_simultaneous_items: u32,
    pub max_setups_per_period: u32,
    pub max_setups_per_macro: u32,
    pub max_endings_per_macro: u32,
    /// Periods a run must continue after a mold setup.
    pub min_run: u32,
    /// Idle periods a mold may stay in a press before a restart counts as a setup.
    pub setup_suspension: u32,
    /// Idle periods after which a stopped campaign counts as ended.
    pub ending_suspension: u32,
    /// Minimum number of molds for items in `special_items` whenever they run.
    pub min_molds: u32,
    pub special_items: Vec<usize>,
}

impl FlexibilityParams {
    /// Values used by the plant for its six-week plans.
    pub fn reference() -> Self {
        Self {
            max_simultaneous_items: 43,
            max_setups_per_period: 25,
            max_setups_per_macro: 5,
            max_endings_per_macro: 18,
            min_run: 4,
            setup_suspension: 7,
            ending_suspension: 4,
            min_molds: 0,
            special_items: Vec::new(),
        }
    }

    /// Number of history periods the look-back rules may read.
    pub fn warm_depth(&self) -> usize {
        let tm = self.min_run as usize;
        (3 * tm + 1)
            .max(self.setup_suspension as usize)
            .max(self.ending_suspension as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calendar {
    pub macro_periods: usize,
    pub periods_per_macro: usize,
    /// `[period]`, true on a non-working day.
    pub days_off: Vec<bool>,
}

impl Calendar {
    pub fn periods(&self) -> usize {
        self.days_off.len()
    }

    pub fn macro_range(&self, h: usize) -> std::ops::Range<usize> {
        h * self.periods_per_macro..(h + 1) * self.periods_per_macro
    }

    pub fn macro_of(&self, t: usize) -> usize {
        t / self.periods_per_macro.max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Enforcement {
    /// Sparse `(item, press, period)` triples that must be produced.
    pub production: Vec<[usize; 3]>,
    /// `[item][period]`, molds of the item that must be in use.
    pub molds: Vec<Vec<u32>>,
}

/// History of the periods right before the horizon, oldest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmState {
    /// `[k]`, day-off flags of the history periods.
    pub days_off: Vec<bool>,
    /// `[item][press][k]`, 1 when the item ran on the press.
    pub production: Vec<Vec<Vec<u8>>>,
    /// `[item][k]`, molds of the item in use.
    pub molds: Vec<Vec<u32>>,
}

impl WarmState {
    pub fn cold(items: usize, presses: usize, depth: usize) -> Self {
        Self {
            days_off: vec![false; depth],
            production: vec![vec![vec![0; depth]; presses]; items],
            molds: vec![vec![0; depth]; items],
        }
    }

    pub fn depth(&self) -> usize {
        self.days_off.len()
    }

    /// Production flag at a negative period (`-1` is the last history period).
    /// Periods older than the stored history read as idle.
    pub fn produced(&self, item: usize, press: usize, period: isize) -> bool {
        debug_assert!(period < 0);
        let depth = self.depth() as isize;
        if period < -depth {
            return false;
        }
        self.production[item][press][(depth + period) as usize] == 1
    }

    pub fn day_off(&self, period: isize) -> bool {
        let depth = self.depth() as isize;
        if period < -depth {
            return false;
        }
        self.days_off[(depth + period) as usize]
    }

    pub fn molds_at(&self, item: usize, period: isize) -> u32 {
        let depth = self.depth() as isize;
        if period < -depth {
            return 0;
        }
        self.molds[item][(depth + period) as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub meta: Meta,
    pub sets: Sets,
    pub demand: Demand,
    pub inventory: Inventory,
    pub capacity: Capacity,
    pub weights: Weights,
    pub upstream: Upstream,
    pub flexibility: FlexibilityParams,
    pub calendar: Calendar,
    pub enforcement: Enforcement,
    pub warm_state: WarmState,
}

/// One invariant breach, located by a JSON-style path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl Instance {
    pub fn periods(&self) -> usize {
        self.calendar.periods()
    }

    pub fn tire_of(&self, item: usize) -> usize {
        self.sets.item_tire[item]
    }

    pub fn items_of_tire(&self, tire: usize) -> impl Iterator<Item = usize> + '_ {
        self.sets
            .item_tire
            .iter()
            .enumerate()
            .filter(move |(_, &a)| a == tire)
            .map(|(i, _)| i)
    }

    pub fn items_of_workshop(&self, w: usize) -> impl Iterator<Item = usize> + '_ {
        self.sets
            .item_workshop
            .iter()
            .enumerate()
            .filter(move |(_, &x)| x == w)
            .map(|(i, _)| i)
    }

    /// Items that use drum type `d`, with their yield.
    pub fn drum_items(&self, d: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.upstream
            .drum_yield
            .iter()
            .enumerate()
            .filter_map(move |(i, row)| row[d].map(|e| (i, e)))
    }

    pub fn eligible(&self, item: usize, press: usize) -> bool {
        self.capacity.eligibility[self.tire_of(item)][press] == 1
    }

    pub fn available(&self, press: usize, t: usize) -> bool {
        self.capacity.maintenance[press][t] == 1
    }

    /// Upper bound on any per-period yield, used as the big-M of the models.
    pub fn big_m(&self) -> f64 {
        self.capacity
            .rate
            .iter()
            .flatten()
            .copied()
            .max()
            .unwrap_or(0)
            .max(1) as f64
    }

    /// Day-off flag for any period, reading the warm state for negative ones.
    pub fn day_off(&self, t: isize) -> bool {
        if t >= 0 {
            self.calendar.days_off[t as usize]
        } else {
            self.warm_state.day_off(t)
        }
    }

    /// Days off among periods `lo..hi`.
    pub fn days_off_in(&self, lo: isize, hi: isize) -> isize {
        (lo..hi).filter(|&o| self.day_off(o)).count() as isize
    }

    /// Period a run starting at `t` is compared with: `t - 1`, or when that
    /// was a day off, `t - 1` shifted back by the days off among the last
    /// `min_run` periods.
    pub fn restart_reference(&self, t: isize) -> isize {
        if self.day_off(t - 1) {
            let tm = self.flexibility.min_run as isize;
            t - 1 - self.days_off_in(t - tm, t)
        } else {
            t - 1
        }
    }

    /// Periods whose run starts oblige production at `t`: the last
    /// `min_run` periods, stretched by the days off among them.
    pub fn min_run_window(&self, t: isize) -> std::ops::Range<isize> {
        let tm = self.flexibility.min_run as isize;
        (t - tm - self.days_off_in(t - tm, t))..t
    }

    pub fn is_special(&self, item: usize) -> bool {
        self.flexibility.special_items.contains(&item)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(text)?;
        if inst.meta.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema version {:?}, expected {SCHEMA_VERSION:?}",
                inst.meta.schema_version
            )));
        }
        Ok(inst)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Returns the instance if it is well-formed, otherwise every breach.
    pub fn validated(self) -> Result<Self> {
        let errors = self.validate();
        if errors.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidInstance(errors))
        }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let errors = self.validate();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(errors))
        }
    }

    /// Checks every structural and value invariant. An empty list means the
    /// instance is well-formed.
    pub fn validate(&self) -> Vec<ValidationError> {
        let mut v = Validator::default();
        self.check_shapes(&mut v);
        if v.errors.is_empty() {
            self.check_values(&mut v);
        }
        v.errors
    }

    fn check_shapes(&self, v: &mut Validator) {
        let s = &self.sets;
        let (a, n, p, w, nd, g) = (s.tires, s.items, s.presses, s.workshops, s.drums, s.classes);
        let t = self.periods();
        let h = self.calendar.macro_periods;
        if self.meta.schema_version != SCHEMA_VERSION {
            v.push(
                "meta.schema_version",
                format!("expected {SCHEMA_VERSION:?}"),
            );
        }
        if n < a {
            v.push(
                "sets.items",
                format!("item count {n} is below tire count {a}"),
            );
        }
        if g == 0 {
            v.push("sets.classes", "at least one demand class is required");
        }
        if t != h * self.calendar.periods_per_macro {
            v.push(
                "calendar.days_off",
                format!(
                    "{t} periods but {h} macro periods of {}",
                    self.calendar.periods_per_macro
                ),
            );
        }
        v.len("sets.item_tire", &s.item_tire, n);
        v.len("sets.item_workshop", &s.item_workshop, n);
        v.grid3("demand.demand", &self.demand.demand, a, g, t);
        v.grid(
            "demand.initial_backorder",
            &self.demand.initial_backorder,
            a,
            g,
        );
        v.len("demand.class_weights", &self.demand.class_weights, g);
        v.len("inventory.initial", &self.inventory.initial, a);
        v.grid("inventory.min", &self.inventory.min, a, t);
        v.grid("inventory.max", &self.inventory.max, a, t);
        v.len("capacity.molds", &self.capacity.molds, a);
        v.grid("capacity.eligibility", &self.capacity.eligibility, a, p);
        v.grid("capacity.rate", &self.capacity.rate, n, t);
        v.grid("capacity.maintenance", &self.capacity.maintenance, p, t);
        v.len("weights.target", &self.weights.target, t);
        v.len("weights.upper_period", &self.weights.upper_period, t);
        v.len("weights.lower_period", &self.weights.lower_period, t);
        v.len("weights.upper_macro", &self.weights.upper_macro, h);
        v.len("weights.lower_macro", &self.weights.lower_macro, h);
        v.len("weights.unit_weight", &self.weights.unit_weight, n);
        v.len(
            "upstream.workshop_capacity",
            &self.upstream.workshop_capacity,
            w,
        );
        v.len("upstream.unit_time", &self.upstream.unit_time, n);
        v.len("upstream.drum_count", &self.upstream.drum_count, nd);
        v.grid("upstream.drum_yield", &self.upstream.drum_yield, n, nd);
        v.grid("enforcement.molds", &self.enforcement.molds, n, t);
        let depth = self.warm_state.depth();
        v.grid3(
            "warm_state.production",
            &self.warm_state.production,
            n,
            p,
            depth,
        );
        v.grid("warm_state.molds", &self.warm_state.molds, n, depth);
        for (k, &[i, pr, tt]) in self.enforcement.production.iter().enumerate() {
            if i >= n || pr >= p || tt >= t {
                v.push(format!("enforcement.production[{k}]"), "index out of range");
            }
        }
    }

    fn check_values(&self, v: &mut Validator) {
        let s = &self.sets;
        for (i, &a) in s.item_tire.iter().enumerate() {
            if a >= s.tires {
                v.push(
                    format!("sets.item_tire[{i}]"),
                    format!("tire {a} out of range"),
                );
            }
        }
        for (i, &w) in s.item_workshop.iter().enumerate() {
            if w >= s.workshops {
                v.push(
                    format!("sets.item_workshop[{i}]"),
                    format!("workshop {w} out of range"),
                );
            }
        }
        if v.errors.is_empty() {
            for a in 0..s.tires {
                if self.items_of_tire(a).next().is_none() {
                    v.push("sets.item_tire", format!("tire {a} has no item"));
                }
            }
        }
        for a in 0..s.tires {
            for t in 0..self.periods() {
                let (lo, hi) = (self.inventory.min[a][t], self.inventory.max[a][t]);
                if lo > hi {
                    v.push(
                        format!("inventory.min[{a}][{t}]"),
                        format!("minimum {lo} exceeds maximum {hi}"),
                    );
                }
            }
        }
        v.binary("capacity.eligibility", &self.capacity.eligibility);
        v.binary("capacity.maintenance", &self.capacity.maintenance);
        for (i, row) in self.warm_state.production.iter().enumerate() {
            v.binary(&format!("warm_state.production[{i}]"), row);
        }
        v.nonneg("weights.target", &self.weights.target);
        v.nonneg("weights.upper_period", &self.weights.upper_period);
        v.nonneg("weights.lower_period", &self.weights.lower_period);
        v.nonneg("weights.upper_macro", &self.weights.upper_macro);
        v.nonneg("weights.lower_macro", &self.weights.lower_macro);
        v.nonneg("weights.unit_weight", &self.weights.unit_weight);
        v.nonneg(
            "upstream.workshop_capacity",
            &self.upstream.workshop_capacity,
        );
        v.nonneg("upstream.unit_time", &self.upstream.unit_time);
        v.nonneg("demand.class_weights", &self.demand.class_weights);
        for (i, row) in self.upstream.drum_yield.iter().enumerate() {
            for (d, e) in row.iter().enumerate() {
                if *e == Some(0) {
                    v.push(
                        format!("upstream.drum_yield[{i}][{d}]"),
                        "drum yield must be at least 1",
                    );
                }
            }
        }
        let f = &self.flexibility;
        if f.min_run < 1 {
            v.push(
                "flexibility.min_run",
                "minimum run must be at least one period",
            );
        }
        for (k, &i) in f.special_items.iter().enumerate() {
            if i >= s.items {
                v.push(
                    format!("flexibility.special_items[{k}]"),
                    format!("item {i} out of range"),
                );
            }
        }
        if self.warm_state.depth() < f.warm_depth() {
            v.push(
                "warm_state.days_off",
                format!(
                    "history depth {} is below the required {}",
                    self.warm_state.depth(),
                    f.warm_depth()
                ),
            );
        }
        for (k, &[i, p, t]) in self.enforcement.production.iter().enumerate() {
            let a = s.item_tire[i];
            if self.capacity.eligibility[a][p] != 1 {
                v.push(
                    format!("enforcement.production[{k}]"),
                    format!("item {i} enforced on press {p} where tire {a} is not eligible"),
                );
            }
            if self.capacity.maintenance[p][t] != 1 {
                v.push(
                    format!("enforcement.production[{k}]"),
                    format!("item {i} enforced on press {p} during maintenance at period {t}"),
                );
            }
        }
        // the warm history must itself be a legal schedule
        for p in 0..s.presses {
            for k in 0..self.warm_state.depth() {
                let busy = (0..s.items)
                    .filter(|&i| self.warm_state.production[i][p][k] == 1)
                    .count();
                if busy > 1 {
                    v.push(
                        format!("warm_state.production[*][{p}][{k}]"),
                        "more than one item on a press",
                    );
                }
            }
        }
        for i in 0..s.items {
            let a = s.item_tire[i];
            for p in 0..s.presses {
                if self.capacity.eligibility[a][p] == 0
                    && self.warm_state.production[i][p].contains(&1)
                {
                    v.push(
                        format!("warm_state.production[{i}][{p}]"),
                        "history uses an ineligible press",
                    );
                }
            }
        }
    }
}

#[derive(Default)]
struct Validator {
    errors: Vec<ValidationError>,
}

impl Validator {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(ValidationError {
            path: path.into(),
            message: message.into(),
        });
    }

    fn len<T>(&mut self, path: &str, xs: &[T], want: usize) {
        if xs.len() != want {
            self.push(path, format!("expected {want} entries, found {}", xs.len()));
        }
    }

    fn grid<T>(&mut self, path: &str, xs: &[Vec<T>], rows: usize, cols: usize) {
        self.len(path, xs, rows);
        for (r, row) in xs.iter().enumerate() {
            self.len(&format!("{path}[{r}]"), row, cols);
        }
    }

    fn grid3<T>(&mut self, path: &str, xs: &[Vec<Vec<T>>], a: usize, b: usize, c: usize) {
        self.len(path, xs, a);
        for (r, m) in xs.iter().enumerate() {
            self.grid(&format!("{path}[{r}]"), m, b, c);
        }
    }

    fn binary(&mut self, path: &str, xs: &[Vec<u8>]) {
        for (r, row) in xs.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                if x > 1 {
                    self.push(
                        format!("{path}[{r}][{c}]"),
                        format!("expected 0 or 1, found {x}"),
                    );
                }
            }
        }
    }

    fn nonneg(&mut self, path: &str, xs: &[f64]) {
        for (k, &x) in xs.iter().enumerate() {
            if !(x.is_finite() && x >= 0.0) {
                self.push(
                    format!("{path}[{k}]"),
                    format!("expected a finite non-negative value, found {x}"),
                );
            }
        }
    }
}

/// Inventory, backorders and press history carried from one macro period
/// into the next.
#[derive(Debug, Clone, PartialEq)]
pub struct CarryState {
    pub inventory: Vec<u32>,
    pub backorder: Vec<Vec<u32>>,
    pub warm: WarmState,
}

impl Instance {
    pub fn initial_state(&self) -> CarryState {
        CarryState {
            inventory: self.inventory.initial.clone(),
            backorder: self.demand.initial_backorder.clone(),
            warm: self.warm_state.clone(),
        }
    }

    /// Restricts the instance to macro period `h`, starting from `state`.
    pub fn macro_slice(&self, h: usize, state: &CarryState) -> Instance {
        let range = self.calendar.macro_range(h);
        let cut = |row: &Vec<u32>| row[range.clone()].to_vec();
        let cutf = |row: &Vec<f64>| row[range.clone()].to_vec();
        let cut8 = |row: &Vec<u8>| row[range.clone()].to_vec();
        let mut out = self.clone();
        out.meta.name = format!("{}#week{h}", self.meta.name);
        out.demand.demand = self
            .demand
            .demand
            .iter()
            .map(|cls| cls.iter().map(cut).collect())
            .collect();
        out.demand.initial_backorder = state.backorder.clone();
        out.inventory.initial = state.inventory.clone();
        out.inventory.min = self.inventory.min.iter().map(cut).collect();
        out.inventory.max = self.inventory.max.iter().map(cut).collect();
        out.capacity.rate = self.capacity.rate.iter().map(cut).collect();
        out.capacity.maintenance = self.capacity.maintenance.iter().map(cut8).collect();
        out.weights.target = cutf(&self.weights.target);
        out.weights.upper_period = cutf(&self.weights.upper_period);
        out.weights.lower_period = cutf(&self.weights.lower_period);
        out.weights.upper_macro = vec![self.weights.upper_macro[h]];
        out.weights.lower_macro = vec![self.weights.lower_macro[h]];
        out.calendar = Calendar {
            macro_periods: 1,
            periods_per_macro: self.calendar.periods_per_macro,
            days_off: self.calendar.days_off[range.clone()].to_vec(),
        };
        out.enforcement = Enforcement {
            production: self
                .enforcement
                .production
                .iter()
                .filter(|e| range.contains(&e[2]))
                .map(|&[i, p, t]| [i, p, t - range.start])
                .collect(),
            molds: self.enforcement.molds.iter().map(cut).collect(),
        };
        out.warm_state = state.warm.clone();
        out
    }
}

/// Builds the history window that ends right before period `until` of a
/// schedule, shifting in the schedule's own periods after the prior history.
pub fn roll_warm_state(
    prior: &WarmState,
    days_off: &[bool],
    production: &[Vec<Vec<u8>>],
    until: usize,
) -> WarmState {
    let depth = prior.depth();
    let items = production.len();
    let presses = production.first().map_or(0, |x| x.len());
    let mut out = WarmState::cold(items, presses, depth);
    for k in 0..depth {
        // absolute period of history slot k, relative to the schedule start
        let abs = until as isize - depth as isize + k as isize;
        if abs >= 0 {
            let t = abs as usize;
            out.days_off[k] = days_off[t];
            for i in 0..items {
                let mut molds = 0;
                for p in 0..presses {
                    out.production[i][p][k] = production[i][p][t];
                    molds += production[i][p][t] as u32;
                }
                out.molds[i][k] = molds;
            }
        } else {
            out.days_off[k] = prior.day_off(abs);
            for i in 0..items {
                for p in 0..presses {
                    out.production[i][p][k] = prior.produced(i, p, abs) as u8;
                }
                out.molds[i][k] = prior.molds_at(i, abs);
            }
        }
    }
    out
}
