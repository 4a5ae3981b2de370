//! Exhaustive search over all-or-nothing plans.
//!
//! Every press-period either idles or runs one eligible item at full rate.
//! For fixed production the best stock and backorder trajectory of each tire
//! is a min-cost flow on a time-expanded network: supply moves forward in
//! stock (convex cost around the stock window), demand of class `c` waits
//! backward at `λc/μc` per period, and whatever is never served waits until
//! the end of the horizon. The first class may also borrow: its backlog can
//! exceed what is owed to serve the second class, exactly as the balance and
//! priority rows allow. Two classes at most.

use std::collections::HashMap;

use tireplan::evaluator::{check_feasibility, compute_kpis, tire_output, PlanSolution};
use tireplan::integrated::compute_normalizers;
use tireplan::{Instance, KpiReport, ObjectiveWeights};

pub struct Candidate {
    pub plan: PlanSolution,
    pub kpis: KpiReport,
}

const INF: i64 = i64::MAX / 4;

struct Arc {
    to: usize,
    cap: i64,
    cost: f64,
}

#[derive(Default)]
struct Network {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl Network {
    fn node(&mut self) -> usize {
        self.out.push(Vec::new());
        self.out.len() - 1
    }

    fn arc(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.out[from].push(id);
        self.out[to].push(id + 1);
        id
    }

    fn flow(&self, id: usize) -> i64 {
        self.arcs[id + 1].cap
    }

    /// Successive shortest paths; the network has no negative cycle.
    fn min_cost_max_flow(&mut self, s: usize, z: usize) {
        let n = self.out.len();
        loop {
            let mut dist = vec![f64::INFINITY; n];
            let mut via = vec![usize::MAX; n];
            dist[s] = 0.0;
            for _ in 0..n {
                let mut changed = false;
                for u in 0..n {
                    if dist[u].is_infinite() {
                        continue;
                    }
                    for &id in &self.out[u] {
                        let a = &self.arcs[id];
                        if a.cap > 0 && dist[u] + a.cost < dist[a.to] - 1e-12 {
                            dist[a.to] = dist[u] + a.cost;
                            via[a.to] = id;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            if dist[z].is_infinite() {
                return;
            }
            let mut push = INF;
            let mut v = z;
            while v != s {
                push = push.min(self.arcs[via[v]].cap);
                v = self.arcs[via[v] ^ 1].to;
            }
            let mut v = z;
            while v != s {
                self.arcs[via[v]].cap -= push;
                self.arcs[via[v] ^ 1].cap += push;
                v = self.arcs[via[v] ^ 1].to;
            }
        }
    }
}

/// Cheapest `(inventory[t], backorder[c][t])` of tire `a` given its output.
pub fn allocate(
    inst: &Instance,
    weights: &ObjectiveWeights,
    a: usize,
    output: &[u64],
) -> (Vec<u32>, Vec<Vec<u32>>) {
    let (g_n, t_n) = (inst.sets.classes, inst.periods());
    assert!(
        g_n <= 2,
        "the priority rows of a middle class are not modeled"
    );
    let norm = compute_normalizers(inst);
    let (class_cost, os_cost, us_cost) = norm.coefficients(weights);
    let mut net = Network::default();
    // `z` collects final stock and unused unmet supply, exactly the real supply
    let (s, z, sink) = (net.node(), net.node(), net.node());
    let pool: Vec<usize> = (0..t_n).map(|_| net.node()).collect();
    // owed[c][t] for t < T; owed[c][T] feeds demand that is never served
    let owed: Vec<Vec<usize>> = (0..g_n)
        .map(|_| (0..=t_n).map(|_| net.node()).collect())
        .collect();

    let mut real = 0;
    for t in 0..t_n {
        let initial = if t == 0 {
            inst.inventory.initial[a] as i64
        } else {
            0
        };
        real += initial + output[t] as i64;
        net.arc(s, pool[t], initial + output[t] as i64, 0.0);
    }
    net.arc(z, sink, real, 0.0);
    let mut stock = Vec::new();
    for t in 0..t_n {
        let next = if t + 1 < t_n { pool[t + 1] } else { z };
        let (lo, hi) = (
            inst.inventory.min[a][t] as i64,
            inst.inventory.max[a][t] as i64,
        );
        stock.push([
            net.arc(pool[t], next, lo, -us_cost),
            net.arc(pool[t], next, (hi - lo).max(0), 0.0),
            net.arc(pool[t], next, INF, os_cost),
        ]);
    }
    // one unit of unmet supply per demand unit; unused units drain into `z`
    let unmet = net.node();
    let mut total = 0;
    let mut carried = vec![Vec::new(); g_n];
    for c in 0..g_n {
        for t in 0..t_n {
            let mut d = inst.demand.demand[a][c][t] as i64;
            if t == 0 {
                d += inst.demand.initial_backorder[a][c] as i64;
            }
            total += d;
            net.arc(owed[c][t], sink, d, 0.0);
            net.arc(pool[t], owed[c][t], INF, 0.0);
            carried[c].push(net.arc(owed[c][t + 1], owed[c][t], INF, class_cost[c]));
        }
        net.arc(unmet, owed[c][t_n], INF, 0.0);
    }
    net.arc(s, unmet, total, 0.0);
    net.arc(unmet, z, INF, 0.0);
    // the first class has no ghost-backorder cap: its backlog may grow past
    // what is owed to fund lower classes, never stock
    for t in 0..t_n {
        let borrow = net.node();
        net.arc(owed[0][t], borrow, INF, 0.0);
        for c in 1..g_n {
            net.arc(borrow, owed[c][t], INF, 0.0);
        }
    }
    net.min_cost_max_flow(s, sink);
    let inventory = stock
        .iter()
        .map(|ids| ids.iter().map(|&id| net.flow(id)).sum::<i64>() as u32)
        .collect();
    let backorder = carried
        .iter()
        .map(|ids| ids.iter().map(|&id| net.flow(id) as u32).collect())
        .collect();
    (inventory, backorder)
}

/// Calls `visit` for every feasible plan.
pub fn enumerate(
    inst: &Instance,
    weights: &ObjectiveWeights,
    mut visit: impl FnMut(&Candidate),
) -> usize {
    let (n_n, p_n, t_n) = (inst.sets.items, inst.sets.presses, inst.periods());
    let slots: Vec<(usize, usize)> = (0..p_n)
        .flat_map(|p| (0..t_n).map(move |t| (p, t)))
        .collect();
    let choices: Vec<Vec<Option<usize>>> = slots
        .iter()
        .map(|&(p, t)| {
            let mut c = vec![None];
            c.extend(
                (0..n_n)
                    .filter(|&i| {
                        inst.eligible(i, p) && inst.available(p, t) && inst.capacity.rate[i][t] > 0
                    })
                    .map(Some),
            );
            c
        })
        .collect();
    let mut memo: HashMap<(usize, Vec<u64>), (Vec<u32>, Vec<Vec<u32>>)> = HashMap::new();
    let mut pick = vec![0usize; slots.len()];
    let mut feasible = 0;
    loop {
        let mut x = vec![vec![vec![0u32; t_n]; p_n]; n_n];
        let mut y = vec![vec![vec![0u8; t_n]; p_n]; n_n];
        for (k, &(p, t)) in slots.iter().enumerate() {
            if let Some(i) = choices[k][pick[k]] {
                y[i][p][t] = 1;
                x[i][p][t] = inst.capacity.rate[i][t];
            }
        }
        let output = tire_output(inst, &x);
        let (inventory, backorder): (Vec<_>, Vec<_>) = output
            .iter()
            .enumerate()
            .map(|(a, out)| {
                memo.entry((a, out.clone()))
                    .or_insert_with(|| allocate(inst, weights, a, out))
                    .clone()
            })
            .unzip();
        let plan = PlanSolution::from_parts(inst, x, y, inventory, backorder).expect("dimensions");
        if check_feasibility(inst, &plan)
            .expect("dimensions")
            .is_empty()
        {
            let kpis = compute_kpis(inst, &plan, weights);
            feasible += 1;
            visit(&Candidate { plan, kpis });
        }
        // odometer step
        let mut k = 0;
        loop {
            if k == slots.len() {
                return feasible;
            }
            pick[k] += 1;
            if pick[k] < choices[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

/// Smallest objective over all feasible plans.
pub fn optimum(inst: &Instance, weights: &ObjectiveWeights) -> Option<f64> {
    let mut best: Option<f64> = None;
    enumerate(inst, weights, |c| {
        if best.is_none_or(|b| c.kpis.of < b) {
            best = Some(c.kpis.of);
        }
    });
    best
}

/// Lexicographically smallest per-class backorder totals.
pub fn lexicographic_backorders(inst: &Instance, weights: &ObjectiveWeights) -> Option<Vec<f64>> {
    let mut best: Option<Vec<f64>> = None;
    enumerate(inst, weights, |c| {
        let key = c.kpis.classes.clone();
        if best
            .as_ref()
            .is_none_or(|b| key.partial_cmp(b) == Some(std::cmp::Ordering::Less))
        {
            best = Some(key);
        }
    });
    best
}
