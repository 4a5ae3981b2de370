//! Press-level variables and rows shared by the integrated and assignment models.

use crate::instance::Instance;
use crate::milp::{LinExpr, MilpModel, Sense, VarId};

use super::tags::*;
use super::BuildOptions;

pub(crate) struct DrumVars {
    pub item: usize,
    pub drum: usize,
    pub yield_: u32,
    pub on: Vec<VarId>,
    pub count: Vec<VarId>,
}

pub(crate) struct PressBlock {
    presses: usize,
    periods: usize,
    x: Vec<Option<VarId>>,
    y: Vec<Option<VarId>>,
    s: Vec<Option<VarId>>,
    m: Vec<Option<VarId>>,
    pub sigma: Vec<Vec<VarId>>,
    pub ending: Vec<Vec<VarId>>,
    pub drums: Vec<DrumVars>,
}

impl PressBlock {
    fn at(&self, i: usize, p: usize, t: usize) -> usize {
        (i * self.presses + p) * self.periods + t
    }

    pub fn x(&self, i: usize, p: usize, t: usize) -> Option<VarId> {
        self.x[self.at(i, p, t)]
    }

    pub fn y(&self, i: usize, p: usize, t: usize) -> Option<VarId> {
        self.y[self.at(i, p, t)]
    }

    /// Adds `k·Y[i][p][t]`, reading the warm state for negative periods.
    fn add_y(&self, e: &mut LinExpr, inst: &Instance, i: usize, p: usize, t: isize, k: f64) {
        if t >= 0 {
            if let Some(v) = self.y(i, p, t as usize) {
                e.add(v, k);
            }
        } else if inst.warm_state.produced(i, p, t) {
            e.add_constant(k);
        }
    }

    /// Adds `k·m[i][p][t]`; history periods use the run starts implied by the warm state.
    fn add_m(&self, e: &mut LinExpr, inst: &Instance, i: usize, p: usize, t: isize, k: f64) {
        if t >= 0 {
            if let Some(v) = self.m[self.at(i, p, t as usize)] {
                e.add(v, k);
            }
        } else if warm_run_start(inst, i, p, t) {
            e.add_constant(k);
        }
    }

    pub fn add(model: &mut MilpModel, inst: &Instance, opts: BuildOptions) -> Self {
        let (n_n, p_n, t_n) = (inst.sets.items, inst.sets.presses, inst.periods());
        let inf = f64::INFINITY;
        let keep = |i: usize, p: usize| !opts.prune || inst.eligible(i, p);

        let mut block = Self {
            presses: p_n,
            periods: t_n,
            x: vec![None; n_n * p_n * t_n],
            y: vec![None; n_n * p_n * t_n],
            s: vec![None; n_n * p_n * t_n],
            m: vec![None; n_n * p_n * t_n],
            sigma: Vec::new(),
            ending: Vec::new(),
            drums: Vec::new(),
        };
        for i in 0..n_n {
            for p in 0..p_n {
                if !keep(i, p) {
                    continue;
                }
                for t in 0..t_n {
                    let k = block.at(i, p, t);
                    block.x[k] = Some(model.integer(format!("X_{i}_{p}_{t}"), 0.0, inf));
                    block.y[k] = Some(model.binary(format!("Y_{i}_{p}_{t}")));
                    block.s[k] = Some(model.binary(format!("s_{i}_{p}_{t}")));
                    block.m[k] = Some(model.binary(format!("m_{i}_{p}_{t}")));
                }
            }
        }
        block.sigma = (0..n_n)
            .map(|i| {
                (0..t_n)
                    .map(|t| model.binary(format!("sigma_{i}_{t}")))
                    .collect()
            })
            .collect();
        block.ending = (0..n_n)
            .map(|i| {
                (0..t_n)
                    .map(|t| model.binary(format!("e_{i}_{t}")))
                    .collect()
            })
            .collect();
        for i in 0..n_n {
            for d in 0..inst.sets.drums {
                if let Some(eps) = inst.upstream.drum_yield[i][d] {
                    block.drums.push(DrumVars {
                        item: i,
                        drum: d,
                        yield_: eps,
                        on: (0..t_n)
                            .map(|t| model.binary(format!("drumon_{i}_{d}_{t}")))
                            .collect(),
                        count: (0..t_n)
                            .map(|t| model.integer(format!("drums_{i}_{d}_{t}"), 0.0, inf))
                            .collect(),
                    });
                }
            }
        }

        block.add_rows(model, inst, opts);
        block
    }

    fn add_rows(&self, model: &mut MilpModel, inst: &Instance, opts: BuildOptions) {
        let (n_n, p_n, t_n) = (inst.sets.items, inst.sets.presses, inst.periods());
        let f = &inst.flexibility;
        let big_m = inst.big_m();
        let tau_s = f.setup_suspension as isize;
        let tau_e = f.ending_suspension as isize;
        let pf = p_n as f64;

        for i in 0..n_n {
            let a = inst.tire_of(i);
            for p in 0..p_n {
                if self.y(i, p, 0).is_none() && t_n > 0 {
                    continue;
                }
                for t in 0..t_n {
                    let k = self.at(i, p, t);
                    let (x, y, s, m) = (
                        self.x[k].unwrap(),
                        self.y[k].unwrap(),
                        self.s[k].unwrap(),
                        self.m[k].unwrap(),
                    );
                    let ti = t as isize;
                    let idx = format!("{i}_{p}_{t}");

                    let mut e = LinExpr::var(x, 1.0);
                    e.add(y, -big_m);
                    model.add_row(
                        SETUP_LINK_UPPER,
                        format!("setup_link_upper_{idx}"),
                        e,
                        Sense::Le,
                        0.0,
                    );
                    let mut e = LinExpr::var(x, 1.0);
                    e.add(y, -1.0);
                    model.add_row(
                        SETUP_LINK_LOWER,
                        format!("setup_link_lower_{idx}"),
                        e,
                        Sense::Ge,
                        0.0,
                    );
                    let mut e = LinExpr::var(x, 1.0);
                    e.add(y, -(inst.capacity.rate[i][t] as f64));
                    model.add_row(
                        ALL_OR_NOTHING,
                        format!("all_or_nothing_{idx}"),
                        e,
                        Sense::Eq,
                        0.0,
                    );

                    // a restart without production of the item in the window is a setup
                    let mut e = LinExpr::var(s, 1.0);
                    e.add(y, -1.0);
                    for o in ti - tau_s..ti {
                        self.add_y(&mut e, inst, i, p, o, 1.0);
                    }
                    model.add_row(
                        SETUP_WINDOW,
                        format!("setup_window_{idx}"),
                        e,
                        Sense::Ge,
                        0.0,
                    );

                    // a restart after another item used the press is a setup; scaled by τs·N
                    let scale = (tau_s.max(1) as f64) * n_n as f64;
                    let reference = inst.restart_reference(ti);
                    let tag = if inst.day_off(ti - 1) {
                        SETUP_INTRUSION_DAYOFF
                    } else {
                        SETUP_INTRUSION
                    };
                    let mut e = LinExpr::var(y, scale);
                    self.add_y(&mut e, inst, i, p, reference, -scale);
                    e.add_constant(-scale);
                    for o in ti - tau_s..ti {
                        for j in (0..n_n).filter(|&j| j != i) {
                            self.add_y(&mut e, inst, j, p, o, 1.0);
                        }
                    }
                    e.add(s, -scale);
                    model.add_row(tag, format!("{tag}_{idx}"), e, Sense::Le, 0.0);

                    let tag = if inst.day_off(ti - 1) {
                        MIN_RUN_START_DAYOFF
                    } else {
                        MIN_RUN_START
                    };
                    let mut e = LinExpr::var(m, 1.0);
                    e.add(y, -1.0);
                    self.add_y(&mut e, inst, i, p, reference, 1.0);
                    model.add_row(tag, format!("{tag}_{idx}"), e, Sense::Ge, 0.0);

                    if !inst.day_off(ti) {
                        let mut e = LinExpr::var(y, 1.0);
                        for o in inst.min_run_window(ti) {
                            self.add_m(&mut e, inst, i, p, o, -1.0);
                        }
                        model.add_row(
                            MIN_RUN_HOLD,
                            format!("min_run_hold_{idx}"),
                            e,
                            Sense::Ge,
                            0.0,
                        );
                    }

                    let enforced = inst.enforcement.production.contains(&[i, p, t]);
                    if !opts.prune || enforced {
                        let rhs = if enforced { 1.0 } else { 0.0 };
                        model.add_row(
                            ENFORCED_TRIAL,
                            format!("enforced_trial_{idx}"),
                            LinExpr::var(y, 1.0),
                            Sense::Ge,
                            rhs,
                        );
                    }
                    let available = inst.available(p, t);
                    if !opts.prune || !available {
                        let rhs = if available { big_m } else { 0.0 };
                        model.add_row(
                            MAINTENANCE,
                            format!("maintenance_{idx}"),
                            LinExpr::var(x, 1.0),
                            Sense::Le,
                            rhs,
                        );
                    }
                    if !opts.prune {
                        let rhs = inst.capacity.eligibility[a][p] as f64 * big_m;
                        model.add_row(
                            ELIGIBILITY,
                            format!("eligibility_{idx}"),
                            LinExpr::var(x, 1.0),
                            Sense::Le,
                            rhs,
                        );
                    }
                }
            }
        }

        for p in 0..p_n {
            for t in 0..t_n {
                let mut e = LinExpr::new();
                for i in 0..n_n {
                    self.add_y(&mut e, inst, i, p, t as isize, 1.0);
                }
                model.add_row(
                    PRESS_SINGLE_ITEM,
                    format!("press_single_item_{p}_{t}"),
                    e,
                    Sense::Le,
                    1.0,
                );
            }
        }
        for a in 0..inst.sets.tires {
            for t in 0..t_n {
                let mut e = LinExpr::new();
                for i in inst.items_of_tire(a) {
                    for p in 0..p_n {
                        self.add_y(&mut e, inst, i, p, t as isize, 1.0);
                    }
                }
                let k = inst.capacity.molds[a] as f64;
                model.add_row(
                    MOLD_CAPACITY,
                    format!("mold_capacity_{a}_{t}"),
                    e,
                    Sense::Le,
                    k,
                );
            }
        }

        let setups = |t: usize| -> LinExpr {
            let mut e = LinExpr::new();
            for i in 0..n_n {
                for p in 0..p_n {
                    if let Some(v) = self.s[self.at(i, p, t)] {
                        e.add(v, 1.0);
                    }
                }
            }
            e
        };
        let mass = |t: usize| -> LinExpr {
            let mut e = LinExpr::new();
            for i in 0..n_n {
                for p in 0..p_n {
                    if let Some(v) = self.x(i, p, t) {
                        e.add(v, inst.weights.unit_weight[i]);
                    }
                }
            }
            e
        };
        for t in 0..t_n {
            model.add_row(
                DAILY_SETUP_CAP,
                format!("daily_setup_cap_{t}"),
                setups(t),
                Sense::Le,
                f.max_setups_per_period as f64,
            );
        }
        for h in 0..inst.calendar.macro_periods {
            let mut e = LinExpr::new();
            for t in inst.calendar.macro_range(h) {
                e.extend(&setups(t), 1.0);
            }
            model.add_row(
                WEEKLY_SETUP_CAP,
                format!("weekly_setup_cap_{h}"),
                e,
                Sense::Le,
                f.max_setups_per_macro as f64,
            );
        }
        for h in 0..inst.calendar.macro_periods {
            let mut e = LinExpr::new();
            let mut target = 0.0;
            for t in inst.calendar.macro_range(h) {
                e.extend(&mass(t), 1.0);
                target += inst.weights.target[t];
            }
            let hi = target + inst.weights.upper_macro[h];
            let lo = target - inst.weights.lower_macro[h];
            model.add_row(
                WEEKLY_TONNAGE_MAX,
                format!("weekly_tonnage_max_{h}"),
                e.clone(),
                Sense::Le,
                hi,
            );
            model.add_row(
                WEEKLY_TONNAGE_MIN,
                format!("weekly_tonnage_min_{h}"),
                e,
                Sense::Ge,
                lo,
            );
        }
        for t in 0..t_n {
            let hi = inst.weights.target[t] + inst.weights.upper_period[t];
            let lo = inst.weights.target[t] - inst.weights.lower_period[t];
            model.add_row(
                DAILY_TONNAGE_MAX,
                format!("daily_tonnage_max_{t}"),
                mass(t),
                Sense::Le,
                hi,
            );
            model.add_row(
                DAILY_TONNAGE_MIN,
                format!("daily_tonnage_min_{t}"),
                mass(t),
                Sense::Ge,
                lo,
            );
        }

        let presses_used = |i: usize, t: isize| -> LinExpr {
            let mut e = LinExpr::new();
            for p in 0..p_n {
                self.add_y(&mut e, inst, i, p, t, 1.0);
            }
            e
        };
        for i in 0..n_n {
            for t in 0..t_n {
                let sigma = self.sigma[i][t];
                // scaled by P
                let mut e = LinExpr::var(sigma, pf);
                e.extend(&presses_used(i, t as isize), -1.0);
                model.add_row(
                    SIMULTANEITY_LOWER,
                    format!("simultaneity_lower_{i}_{t}"),
                    e,
                    Sense::Ge,
                    0.0,
                );
                let mut e = LinExpr::var(sigma, 1.0);
                e.extend(&presses_used(i, t as isize), -1.0);
                model.add_row(
                    SIMULTANEITY_UPPER,
                    format!("simultaneity_upper_{i}_{t}"),
                    e,
                    Sense::Le,
                    0.0,
                );
            }
        }
        for t in 0..t_n {
            let mut e = LinExpr::new();
            for i in 0..n_n {
                e.add(self.sigma[i][t], 1.0);
            }
            model.add_row(
                SIMULTANEITY_CAP,
                format!("simultaneity_cap_{t}"),
                e,
                Sense::Le,
                f.max_simultaneous_items as f64,
            );
        }

        for i in 0..n_n {
            for t in 0..t_n {
                let ti = t as isize;
                // scaled by P
                let mut e = LinExpr::var(self.ending[i][t], pf);
                e.extend(&presses_used(i, ti - tau_e), -1.0);
                for o in ti - tau_e + 1..=ti {
                    e.extend(&presses_used(i, o), pf * pf);
                }
                model.add_row(
                    CAMPAIGN_ENDING,
                    format!("campaign_ending_{i}_{t}"),
                    e,
                    Sense::Ge,
                    0.0,
                );
            }
        }
        for h in 0..inst.calendar.macro_periods {
            let mut e = LinExpr::new();
            for t in inst.calendar.macro_range(h) {
                for i in 0..n_n {
                    e.add(self.ending[i][t], 1.0);
                }
            }
            model.add_row(
                WEEKLY_ENDING_CAP,
                format!("weekly_ending_cap_{h}"),
                e,
                Sense::Le,
                f.max_endings_per_macro as f64,
            );
        }

        for w in 0..inst.sets.workshops {
            for h in 0..inst.calendar.macro_periods {
                let mut e = LinExpr::new();
                for i in inst.items_of_workshop(w) {
                    for p in 0..p_n {
                        for t in inst.calendar.macro_range(h) {
                            if let Some(v) = self.x(i, p, t) {
                                e.add(v, inst.upstream.unit_time[i]);
                            }
                        }
                    }
                }
                let cap = inst.upstream.workshop_capacity[w];
                model.add_row(
                    WORKSHOP_SATURATION,
                    format!("workshop_saturation_{w}_{h}"),
                    e,
                    Sense::Le,
                    cap,
                );
            }
        }

        for d in 0..inst.sets.drums {
            for t in 0..t_n {
                let mut e = LinExpr::new();
                for dv in self.drums.iter().filter(|dv| dv.drum == d) {
                    e.add(dv.count[t], 1.0);
                }
                let cap = inst.upstream.drum_count[d] as f64;
                model.add_row(
                    DRUM_CAPACITY,
                    format!("drum_capacity_{d}_{t}"),
                    e,
                    Sense::Le,
                    cap,
                );
            }
        }
        let md = big_m.max(2.0);
        for dv in &self.drums {
            let (i, d) = (dv.item, dv.drum);
            let eps = dv.yield_ as f64;
            for t in 0..t_n {
                let (on, count) = (dv.on[t], dv.count[t]);
                let idx = format!("{i}_{d}_{t}");
                let pair = |kc: f64, ko: f64| {
                    let mut e = LinExpr::var(count, kc);
                    e.add(on, ko);
                    e
                };
                model.add_row(
                    DRUM_LEVEL_TWO_LO,
                    format!("drum_level_two_lo_{idx}"),
                    pair(1.0, -md),
                    Sense::Ge,
                    2.0 - md,
                );
                model.add_row(
                    DRUM_LEVEL_TWO_HI,
                    format!("drum_level_two_hi_{idx}"),
                    pair(1.0, md),
                    Sense::Le,
                    2.0 + md,
                );
                model.add_row(
                    DRUM_LEVEL_LOW_LO,
                    format!("drum_level_low_lo_{idx}"),
                    pair(1.0, md),
                    Sense::Ge,
                    0.0,
                );
                model.add_row(
                    DRUM_LEVEL_LOW_HI,
                    format!("drum_level_low_hi_{idx}"),
                    pair(1.0, -md),
                    Sense::Le,
                    1.0,
                );
                // the next three are scaled by the yield ε
                let used = presses_used(i, t as isize);
                let mut e = LinExpr::var(count, eps);
                e.extend(&used, -1.0);
                model.add_row(DRUM_COVER, format!("drum_cover_{idx}"), e, Sense::Ge, 0.0);
                let mut e = used.clone();
                e.add(on, -eps * md);
                model.add_row(
                    DRUM_SWITCH_ON,
                    format!("drum_switch_on_{idx}"),
                    e,
                    Sense::Ge,
                    eps - eps * md,
                );
                let mut e = used;
                e.add(on, -eps * md);
                model.add_row(
                    DRUM_SWITCH_OFF,
                    format!("drum_switch_off_{idx}"),
                    e,
                    Sense::Le,
                    eps,
                );
            }
        }

        let molds = f.min_molds as f64;
        for &i in &f.special_items {
            for t in 0..t_n {
                let mut e = presses_used(i, t as isize);
                e.add(self.sigma[i][t], -molds);
                model.add_row(MIN_MOLDS, format!("min_molds_{i}_{t}"), e, Sense::Ge, 0.0);
            }
        }
    }
}

/// Run start of the warm history at a negative period.
pub(crate) fn warm_run_start(inst: &Instance, i: usize, p: usize, t: isize) -> bool {
    let w = &inst.warm_state;
    if t < -(w.depth() as isize) || !w.produced(i, p, t) {
        return false;
    }
    let r = inst.restart_reference(t);
    !(r >= -(w.depth() as isize) && w.produced(i, p, r))
}
