//! Seeded synthetic instances whose eligibility structure follows the
//! plant statistics: about a third of the tire/press pairs are eligible and
//! roughly one tire in six fits ten presses or fewer.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::*;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSpec {
    pub tires: usize,
    pub items: usize,
    pub presses: usize,
    pub periods_per_macro: usize,
    pub macro_periods: usize,
    pub workshops: usize,
    pub drums: usize,
    pub classes: usize,
    /// Share of eligible tire/press pairs.
    pub eligibility_density: f64,
    /// Share of tires eligible on at most `narrow_max_presses` presses.
    /// Ignored when there are no more presses than that.
    pub narrow_fraction: f64,
    pub narrow_max_presses: usize,
    /// Total demand over total press capacity.
    pub load: f64,
    /// Inclusive range of per-press rates.
    pub rate_range: (u32, u32),
    pub max_molds: u32,
    /// Relative width of the tonnage windows around their target.
    pub tonnage_tolerance: f64,
    pub flexibility: FlexibilityParams,
    /// Seed the history with long-running campaigns instead of idle presses.
    pub warm_start: bool,
}

impl SizeSpec {
    /// The plant's full size: 170 items of 150 tires on 70 presses over six
    /// weeks of seven days.
    pub fn plant_scale() -> Self {
        Self {
            tires: 150,
            items: 170,
            presses: 70,
            periods_per_macro: 7,
            macro_periods: 6,
            workshops: 4,
            drums: 30,
            classes: 3,
            eligibility_density: 0.32,
            narrow_fraction: 0.17,
            narrow_max_presses: 10,
            load: 0.8,
            rate_range: (4, 12),
            max_molds: 3,
            tonnage_tolerance: 0.6,
            flexibility: FlexibilityParams::reference(),
            warm_start: true,
        }
    }

    /// A small instance with loose side constraints.
    pub fn small(items: usize, presses: usize, periods: usize) -> Self {
        let tires = items.max(1);
        Self {
            tires,
            items,
            presses,
            periods_per_macro: periods,
            macro_periods: 1,
            workshops: 1,
            drums: 1,
            classes: 3,
            eligibility_density: 0.6,
            narrow_fraction: 0.0,
            narrow_max_presses: 10,
            load: 0.9,
            rate_range: (2, 6),
            max_molds: 2,
            tonnage_tolerance: 1.0,
            flexibility: FlexibilityParams {
                max_simultaneous_items: items as u32,
                max_setups_per_period: presses as u32,
                max_setups_per_macro: (presses * periods) as u32,
                max_endings_per_macro: (items * periods) as u32,
                min_run: 1,
                setup_suspension: 2,
                ending_suspension: 2,
                min_molds: 0,
                special_items: Vec::new(),
            },
            warm_start: false,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSizeSpec(m));
        if self.tires == 0
            || self.presses == 0
            || self.periods_per_macro == 0
            || self.macro_periods == 0
        {
            return bad("tires, presses and periods must be positive".into());
        }
        if self.items < self.tires {
            return bad(format!(
                "{} items cannot cover {} tires",
                self.items, self.tires
            ));
        }
        if self.workshops == 0 || self.drums == 0 || self.classes == 0 {
            return bad("workshops, drums and classes must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.eligibility_density)
            || !(0.0..=1.0).contains(&self.narrow_fraction)
        {
            return bad("densities must lie in [0, 1]".into());
        }
        if self.rate_range.0 == 0 || self.rate_range.0 > self.rate_range.1 {
            return bad("rate range must be positive and ordered".into());
        }
        if self.max_molds == 0 {
            return bad("at least one mold per tire is required".into());
        }
        Ok(())
    }
}

/// Generates a deterministic instance for `(seed, size)`.
pub fn generate(seed: u64, size: &SizeSpec) -> Result<Instance> {
    size.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a_n, n_n, p_n) = (size.tires, size.items, size.presses);
    let t_n = size.periods_per_macro * size.macro_periods;
    let g_n = size.classes;

    let eligibility = eligibility_matrix(&mut rng, size)?;
    let degree: Vec<usize> = eligibility
        .iter()
        .map(|r| r.iter().map(|&x| x as usize).sum())
        .collect();

    let mut item_tire: Vec<usize> = (0..a_n).collect();
    for _ in a_n..n_n {
        item_tire.push(rng.gen_range(0..a_n));
    }
    let item_workshop: Vec<usize> = (0..n_n).map(|_| rng.gen_range(0..size.workshops)).collect();

    let molds: Vec<u32> = (0..a_n)
        .map(|a| {
            let k = if rng.gen_bool(0.3) {
                rng.gen_range(1..=size.max_molds)
            } else {
                1
            };
            k.min(degree[a] as u32).max(1)
        })
        .collect();

    let days_off = vec![false; t_n];
    let base_rate: Vec<u32> = (0..n_n)
        .map(|_| rng.gen_range(size.rate_range.0..=size.rate_range.1))
        .collect();
    let rate: Vec<Vec<u32>> = base_rate
        .iter()
        .map(|&r| {
            days_off
                .iter()
                .map(|&off| if off { 0 } else { r })
                .collect()
        })
        .collect();
    let unit_weight: Vec<f64> = (0..n_n).map(|_| round2(rng.gen_range(0.5..2.0))).collect();
    let unit_time: Vec<f64> = (0..n_n).map(|_| round2(rng.gen_range(0.3..1.0))).collect();

    // per-tire share of press capacity drives its demand
    let items_per_tire: Vec<usize> = (0..a_n)
        .map(|a| item_tire.iter().filter(|&&x| x == a).count())
        .collect();
    let tire_rate: Vec<f64> = (0..a_n)
        .map(|a| {
            let rates: Vec<f64> = (0..n_n)
                .filter(|&i| item_tire[i] == a)
                .map(|i| base_rate[i] as f64)
                .collect();
            rates.iter().sum::<f64>() / rates.len() as f64
        })
        .collect();
    let mean_rate = base_rate.iter().map(|&r| r as f64).sum::<f64>() / n_n as f64;
    let press_capacity = p_n as f64 * mean_rate;
    let weights_raw: Vec<f64> = (0..a_n)
        .map(|a| (degree[a] as f64).min(molds[a] as f64 * 4.0) * rng.gen_range(0.5..1.5))
        .collect();
    let weight_sum: f64 = weights_raw.iter().sum();
    let mean_demand: Vec<f64> = weights_raw
        .iter()
        .map(|w| size.load * press_capacity * w / weight_sum)
        .collect();
    let class_share: Vec<f64> = {
        let raw: Vec<f64> = (0..g_n).map(|c| 1.0 + c as f64 * 0.5).collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|x| x / s).collect()
    };

    let mut demand = vec![vec![vec![0u32; t_n]; g_n]; a_n];
    for a in 0..a_n {
        for c in 0..g_n {
            for t in 0..t_n {
                if rng.gen_bool(0.6) {
                    let mean = mean_demand[a] * class_share[c] / 0.6;
                    demand[a][c][t] = (mean * rng.gen_range(0.4..1.6)).round() as u32;
                }
            }
        }
    }
    let initial_backorder: Vec<Vec<u32>> = (0..a_n)
        .map(|a| {
            (0..g_n)
                .map(|c| {
                    if rng.gen_bool(0.15) {
                        (mean_demand[a] * class_share[c]).round() as u32
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();

    let smin: Vec<u32> = mean_demand.iter().map(|m| m.round() as u32).collect();
    let smax: Vec<u32> = (0..a_n)
        .map(|a| smin[a] + (3.0 * mean_demand[a]).ceil() as u32 + tire_rate[a] as u32)
        .collect();
    let initial: Vec<u32> = (0..a_n).map(|a| rng.gen_range(0..=smax[a])).collect();

    let maintenance = vec![vec![1u8; t_n]; p_n];

    let flex = size.flexibility.clone();
    let depth = flex.warm_depth();
    let mut warm = WarmState::cold(n_n, p_n, depth);
    if size.warm_start {
        seed_history(
            &mut rng,
            size,
            &eligibility,
            &molds,
            &item_tire,
            &base_rate,
            &mut warm,
        );
    }

    // tonnage target: the running history when there is one, otherwise the expected load
    let warm_mass: f64 = (0..n_n)
        .map(|i| {
            warm.molds[i].last().copied().unwrap_or(0) as f64 * base_rate[i] as f64 * unit_weight[i]
        })
        .sum();
    let mean_weight = unit_weight.iter().sum::<f64>() / n_n as f64;
    let target_mass = if warm_mass > 0.0 {
        warm_mass
    } else {
        size.load * press_capacity * mean_weight
    };
    let tol = size.tonnage_tolerance;
    let target = round2(target_mass);
    let per_macro = size.periods_per_macro as f64;

    // assembling capacity: generous against the most each workshop could run
    let mut workshop_capacity = vec![0.0; size.workshops];
    for i in 0..n_n {
        let a = item_tire[i];
        let share = molds[a].min(degree[a] as u32) as f64 / items_per_tire[a] as f64;
        workshop_capacity[item_workshop[i]] +=
            unit_time[i] * base_rate[i] as f64 * share * per_macro;
    }
    let workshop_capacity: Vec<f64> = workshop_capacity
        .iter()
        .map(|c| round2(c * 1.3 + 1.0))
        .collect();

    let mut drum_yield = vec![vec![None; size.drums]; n_n];
    let mut drum_members = vec![0u32; size.drums];
    for i in 0..n_n {
        let d = rng.gen_range(0..size.drums);
        let k = molds[item_tire[i]];
        drum_yield[i][d] = Some(rng.gen_range(k.div_ceil(2).max(1)..=k + 1));
        drum_members[d] += 1;
    }
    let drum_count: Vec<u32> = drum_members
        .iter()
        .map(|&m| (m * 3).div_ceil(2).max(1))
        .collect();

    let inst = Instance {
        meta: Meta {
            schema_version: SCHEMA_VERSION.into(),
            name: format!("generated-{seed}"),
            seed: Some(seed),
        },
        sets: Sets {
            tires: a_n,
            items: n_n,
            presses: p_n,
            workshops: size.workshops,
            drums: size.drums,
            classes: g_n,
            item_tire,
            item_workshop,
        },
        demand: Demand {
            demand,
            initial_backorder,
            class_weights: (0..g_n).map(|c| (g_n - c) as f64).collect(),
        },
        inventory: Inventory {
            initial,
            min: smin.iter().map(|&m| vec![m; t_n]).collect(),
            max: smax.iter().map(|&m| vec![m; t_n]).collect(),
        },
        capacity: Capacity {
            molds,
            eligibility,
            rate,
            maintenance,
        },
        weights: Weights {
            target: vec![target; t_n],
            upper_period: vec![round2(target * tol); t_n],
            lower_period: vec![round2(target * tol); t_n],
            upper_macro: vec![round2(target * per_macro * tol); size.macro_periods],
            lower_macro: vec![round2(target * per_macro * tol); size.macro_periods],
            unit_weight,
        },
        upstream: Upstream {
            workshop_capacity,
            unit_time,
            drum_count,
            drum_yield,
        },
        flexibility: flex,
        calendar: Calendar {
            macro_periods: size.macro_periods,
            periods_per_macro: size.periods_per_macro,
            days_off,
        },
        enforcement: Enforcement {
            production: Vec::new(),
            molds: vec![vec![0; t_n]; n_n],
        },
        warm_state: warm,
    };
    inst.validated()
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn eligibility_matrix(rng: &mut ChaCha8Rng, size: &SizeSpec) -> Result<Vec<Vec<u8>>> {
    let (a_n, p_n) = (size.tires, size.presses);
    let total = (size.eligibility_density * (a_n * p_n) as f64).round() as usize;
    if total < a_n.max(p_n) {
        return Err(Error::InvalidSizeSpec(format!(
            "density {} gives {total} eligible pairs, fewer than needed to cover {a_n} tires and {p_n} presses",
            size.eligibility_density
        )));
    }
    let cap = size.narrow_max_presses;
    let narrow = if p_n > cap {
        (size.narrow_fraction * a_n as f64).round() as usize
    } else {
        0
    };
    let wide = a_n - narrow;
    let (wide_lo, narrow_hi) = if narrow > 0 { (cap + 1, cap) } else { (1, p_n) };
    let min_total = narrow + wide * wide_lo;
    let max_total = narrow * narrow_hi + wide * p_n;
    if total < min_total || total > max_total {
        return Err(Error::InvalidSizeSpec(format!(
            "{total} eligible pairs cannot be spread over {narrow} narrow and {wide} wide tires \
             (feasible range {min_total}..={max_total})"
        )));
    }

    let mut degree = vec![0usize; a_n];
    let mut order: Vec<usize> = (0..a_n).collect();
    order.shuffle(rng);
    let (narrow_tires, wide_tires) = order.split_at(narrow);
    let mut assigned = 0;
    for &a in narrow_tires {
        degree[a] = rng.gen_range(1..=narrow_hi);
        assigned += degree[a];
    }
    for &a in wide_tires {
        degree[a] = wide_lo;
        assigned += wide_lo;
    }
    // trim narrow tires when their draw overshoots what the wide ones can absorb
    let mut idx = 0;
    while assigned > total {
        let a = narrow_tires[idx % narrow_tires.len()];
        if degree[a] > 1 {
            degree[a] -= 1;
            assigned -= 1;
        }
        idx += 1;
    }
    let mut room: Vec<usize> = wide_tires
        .iter()
        .copied()
        .filter(|&a| degree[a] < p_n)
        .collect();
    while assigned < total {
        if room.is_empty() {
            room = narrow_tires
                .iter()
                .copied()
                .filter(|&a| degree[a] < narrow_hi)
                .collect();
        }
        let k = rng.gen_range(0..room.len());
        let a = room[k];
        degree[a] += 1;
        assigned += 1;
        let limit = if narrow_tires.contains(&a) {
            narrow_hi
        } else {
            p_n
        };
        if degree[a] >= limit {
            room.swap_remove(k);
        }
    }

    let mut m = vec![vec![0u8; p_n]; a_n];
    let mut presses: Vec<usize> = (0..p_n).collect();
    for a in 0..a_n {
        presses.shuffle(rng);
        for &p in &presses[..degree[a]] {
            m[a][p] = 1;
        }
    }

    // every press must serve some tire; swap ones away from over-covered presses
    let mut cover: Vec<usize> = (0..p_n)
        .map(|p| (0..a_n).filter(|&a| m[a][p] == 1).count())
        .collect();
    for p in 0..p_n {
        if cover[p] > 0 {
            continue;
        }
        let mut tires: Vec<usize> = (0..a_n).collect();
        tires.shuffle(rng);
        let donor = tires.iter().find_map(|&a| {
            (0..p_n)
                .find(|&q| m[a][q] == 1 && cover[q] >= 2)
                .map(|q| (a, q))
        });
        let Some((a, q)) = donor else {
            return Err(Error::InvalidSizeSpec(format!(
                "cannot make press {p} eligible for any tire"
            )));
        };
        m[a][q] = 0;
        m[a][p] = 1;
        cover[q] -= 1;
        cover[p] += 1;
    }
    Ok(m)
}

/// Puts long-running campaigns on most presses for the whole history window,
/// respecting molds, eligibility and the simultaneity limit.
fn seed_history(
    rng: &mut ChaCha8Rng,
    size: &SizeSpec,
    eligibility: &[Vec<u8>],
    molds: &[u32],
    item_tire: &[usize],
    base_rate: &[u32],
    warm: &mut WarmState,
) {
    let mut used = vec![0u32; size.tires];
    let mut running: Vec<usize> = Vec::new();
    let limit = size.flexibility.max_simultaneous_items as usize;
    let mut presses: Vec<usize> = (0..size.presses).collect();
    presses.shuffle(rng);
    for p in presses {
        if !rng.gen_bool(0.85) {
            continue;
        }
        // prefer items already running, then new ones while under the limit
        let mut candidates: Vec<usize> = running
            .iter()
            .copied()
            .filter(|&i| {
                eligibility[item_tire[i]][p] == 1 && used[item_tire[i]] < molds[item_tire[i]]
            })
            .collect();
        if candidates.is_empty() && running.len() < limit {
            candidates = (0..size.items)
                .filter(|&i| {
                    let a = item_tire[i];
                    eligibility[a][p] == 1
                        && used[a] < molds[a]
                        && base_rate[i] > 0
                        && !running.iter().any(|&j| item_tire[j] == a)
                })
                .collect();
        }
        let Some(&i) = candidates.choose(rng) else {
            continue;
        };
        used[item_tire[i]] += 1;
        if !running.contains(&i) {
            running.push(i);
        }
        for k in 0..warm.depth() {
            warm.production[i][p][k] = 1;
            warm.molds[i][k] += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn density(inst: &Instance) -> f64 {
        let ones: usize = inst
            .capacity
            .eligibility
            .iter()
            .flatten()
            .map(|&x| x as usize)
            .sum();
        ones as f64 / (inst.sets.tires * inst.sets.presses) as f64
    }

    #[test]
    fn plant_scale_dimensions() {
        let inst = generate(1, &SizeSpec::plant_scale()).unwrap();
        assert_eq!(
            (inst.sets.tires, inst.sets.items, inst.sets.presses),
            (150, 170, 70)
        );
        assert_eq!(inst.periods(), 42);
        assert_eq!(inst.calendar.macro_periods, 6);
        assert_eq!(inst.sets.classes, 3);
    }

    #[test]
    fn same_seed_same_bytes() {
        let spec = SizeSpec::plant_scale();
        let a = generate(1, &spec).unwrap().to_json().unwrap();
        let b = generate(1, &spec).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn density_and_narrow_share_match_targets() {
        let inst = generate(2, &SizeSpec::plant_scale()).unwrap();
        let d = density(&inst);
        assert!((0.30..=0.34).contains(&d), "density {d}");
        let narrow = inst
            .capacity
            .eligibility
            .iter()
            .filter(|r| r.iter().map(|&x| x as usize).sum::<usize>() <= 10)
            .count() as f64
            / inst.sets.tires as f64;
        assert!((narrow - 0.17).abs() < 0.02, "narrow share {narrow}");
    }

    #[test]
    fn every_tire_and_press_is_connected() {
        for seed in 0..5 {
            let inst = generate(seed, &SizeSpec::plant_scale()).unwrap();
            for row in &inst.capacity.eligibility {
                assert!(row.contains(&1));
            }
            for p in 0..inst.sets.presses {
                assert!(inst.capacity.eligibility.iter().any(|r| r[p] == 1));
            }
        }
    }

    #[test]
    fn impossible_density_is_rejected() {
        let mut spec = SizeSpec::plant_scale();
        spec.eligibility_density = 0.001;
        assert!(matches!(generate(1, &spec), Err(Error::InvalidSizeSpec(_))));
        let mut spec = SizeSpec::plant_scale();
        spec.eligibility_density = 0.99;
        assert!(matches!(generate(1, &spec), Err(Error::InvalidSizeSpec(_))));
    }

    #[test]
    fn warm_history_respects_simultaneity() {
        let inst = generate(3, &SizeSpec::plant_scale()).unwrap();
        let last = inst.warm_state.depth() - 1;
        let running = (0..inst.sets.items)
            .filter(|&i| inst.warm_state.molds[i][last] > 0)
            .count();
        assert!(running > 0);
        assert!(running <= 43);
    }
}
