//! Acceptance criteria, one test each. Every test prints a single
//! `[PASS]`/`[FAIL]` line before asserting.

mod common;

use std::time::{Duration, Instant};

use common::oracle;
use tireplan::assp::build_assp_with;
use tireplan::baseline::greedy_edd;
use tireplan::evaluator::{
    check_feasibility, compare, compute_kpis, compute_kpis_range, derive_indicators, PlanSolution,
};
use tireplan::instance::{generate, SizeSpec};
use tireplan::integrated::{
    build_integrated_with, closed_form_size, compute_normalizers, solve_integrated, tags,
    BuildOptions, FormulaModel,
};
use tireplan::lssp::build_lssp;
use tireplan::matheuristic::{run_rolling_horizon, RunConfig};
use tireplan::milp::{model_size, ModelSize, SolveStatus, SolverConfig};
use tireplan::taguchi::{is_orthogonal, l16_array, rank_by_company_rules, sn_ratio};
use tireplan::{Instance, KpiReport, ObjectiveWeights};

fn verdict(name: &str, pass: bool, detail: impl std::fmt::Display) {
    let mark = if pass { "PASS" } else { "FAIL" };
    println!("[{mark}] {name}: {detail}");
    assert!(pass, "{name}: {detail}");
}

fn counted(s: &ModelSize) -> (usize, usize, usize) {
    (s.binaries, s.integers, s.constraints)
}

#[test]
fn model_size_formulas() {
    let mut mismatches = Vec::new();
    let mut slowest = Duration::ZERO;
    for (n, p, t, w) in [(2, 2, 3, 1), (5, 3, 7, 2), (10, 5, 7, 2)] {
        let mut spec = SizeSpec::small(n, p, t);
        spec.workshops = w;
        spec.eligibility_density = 1.0;
        let mut inst = generate(1, &spec).unwrap();
        // a drum yield for every (item, drum) pair makes the dense count exact
        for row in &mut inst.upstream.drum_yield {
            row.iter_mut().for_each(|e| *e = Some(e.unwrap_or(2)));
        }
        let weights = ObjectiveWeights::calibrated(inst.sets.classes);
        let dense = BuildOptions { prune: false };
        let target = inst.capacity.rate.clone();

        let start = Instant::now();
        let models = [
            (
                FormulaModel::Integrated,
                build_integrated_with(&inst, &weights, dense).unwrap(),
            ),
            (FormulaModel::Lssp, build_lssp(&inst, &weights).unwrap()),
            (
                FormulaModel::Assp,
                build_assp_with(&inst, &target, dense).unwrap(),
            ),
        ];
        for (kind, model) in &models {
            let got = counted(&model_size(model));
            let want = counted(&closed_form_size(*kind, n, p, t, w));
            if got != want {
                mismatches.push(format!(
                    "{kind:?} {:?}: (bin, int, rows) {got:?} vs {want:?}",
                    (n, p, t, w)
                ));
            }
        }
        slowest = slowest.max(start.elapsed());
    }
    let pass = mismatches.is_empty() && slowest < Duration::from_secs(1);
    let detail = if mismatches.is_empty() {
        format!("all sizes match, slowest build {slowest:?}")
    } else {
        mismatches.join("; ")
    };
    verdict("model-size formulas", pass, detail);
}

#[test]
fn brute_force_equivalence() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let cases = 40;
    for seed in 0..cases {
        let inst = common::tiny_instance(seed);
        let w = ObjectiveWeights::calibrated(inst.sets.classes);
        let best = oracle::optimum(&inst, &w);
        let sol = solve_integrated(&inst, &w, &SolverConfig::exact()).unwrap();
        match (best, sol.status, sol.plan) {
            (None, SolveStatus::Infeasible, _) => {}
            (Some(b), SolveStatus::Optimal, Some(plan)) => {
                let of = compute_kpis(&inst, &plan, &w).of;
                let model_of = sol.objective.unwrap_or(f64::NAN);
                if (of - b).abs() > 1e-6 || (model_of - b).abs() > 1e-6 {
                    failures.push(format!(
                        "seed {seed}: oracle {b}, plan {of}, model {model_of}"
                    ));
                }
            }
            (b, status, _) => {
                failures.push(format!("seed {seed}: oracle {b:?}, solver {status:?}"))
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(300);
    let detail = if failures.is_empty() {
        format!("{cases} instances agree within 1e-6 in {elapsed:?}")
    } else {
        failures.join("; ")
    };
    verdict("brute-force equivalence", pass, detail);
}

/// Single-field corruptions and the violation family each must raise.
fn corruptions(inst: &Instance, plan: &PlanSolution) -> Vec<(PlanSolution, &'static str)> {
    let mut out = Vec::new();
    let (n_n, p_n, t_n) = (inst.sets.items, inst.sets.presses, inst.periods());
    for i in 0..n_n {
        for p in 0..p_n {
            for t in 0..t_n {
                let mut bad = plan.clone();
                bad.y[i][p][t] ^= 1;
                out.push((bad, tags::ALL_OR_NOTHING));
                if plan.y[i][p][t] == 1 {
                    let mut bad = plan.clone();
                    bad.x[i][p][t] += 1;
                    out.push((bad, tags::ALL_OR_NOTHING));
                }
            }
        }
    }
    for a in 0..inst.sets.tires {
        for t in 0..t_n {
            let mut bad = plan.clone();
            bad.inventory[a][t] += 1;
            out.push((bad, tags::BALANCE));
            let mut bad = plan.clone();
            bad.backorder[a][inst.sets.classes - 1][t] += 1;
            out.push((bad, tags::BALANCE));
        }
    }
    out
}

/// Two items on one press, every rule loose, no calendar breaks.
fn window_fixture(tau_s: u32, tau_e: u32) -> Instance {
    let mut spec = SizeSpec::small(2, 1, 10);
    spec.eligibility_density = 1.0;
    let mut inst = generate(5, &spec).unwrap();
    inst.flexibility.setup_suspension = tau_s;
    inst.flexibility.ending_suspension = tau_e;
    inst.calendar.days_off.iter_mut().for_each(|d| *d = false);
    let depth = inst.flexibility.warm_depth();
    inst.warm_state = tireplan::instance::WarmState::cold(2, 1, depth);
    inst
}

fn runs(inst: &Instance, pattern: [&str; 2]) -> Vec<Vec<Vec<u8>>> {
    pattern
        .iter()
        .map(|s| vec![s.bytes().map(|b| u8::from(b == b'#')).collect::<Vec<_>>()])
        .inspect(|y: &Vec<Vec<u8>>| assert_eq!(y[0].len(), inst.periods()))
        .collect()
}

/// Setup and ending windows: (item 0 and item 1 on the press, item, period,
/// expected setup, expected ending).
fn window_cases() -> Vec<([&'static str; 2], usize, usize, u8, u8)> {
    vec![
        // restart 3 periods after the last run, press kept free: no setup
        (["###..#....", ".........."], 0, 5, 0, 0),
        // same gap, another item used the press in between: setup
        (["###..#....", "...#......"], 0, 5, 1, 0),
        // restart 4 periods after the last run: setup
        (["##...#....", ".........."], 0, 5, 1, 0),
        // suspension of 2 periods ends the campaign 2 periods after its last run
        (["###.......", ".........."], 0, 4, 0, 1),
        // restart within τe: no ending
        (["###.#.....", ".........."], 0, 4, 0, 0),
        // first run of the horizon from a cold press: setup
        (["###.......", ".........."], 0, 0, 1, 0),
    ]
}

#[test]
fn oracle_audit() {
    let mut plans = 0;
    let mut failures = Vec::new();
    let mut corrupted = 0;
    for seed in 0..12 {
        let inst = common::tiny_instance(seed);
        let w = ObjectiveWeights::calibrated(inst.sets.classes);
        let sol = solve_integrated(&inst, &w, &SolverConfig::exact()).unwrap();
        let Some(plan) = sol.plan else { continue };
        plans += 1;
        let v = check_feasibility(&inst, &plan).unwrap();
        if !v.is_empty() {
            failures.push(format!(
                "seed {seed}: decoded plan has {} violations",
                v.len()
            ));
            continue;
        }
        for (bad, family) in corruptions(&inst, &plan) {
            corrupted += 1;
            let v = check_feasibility(&inst, &bad).unwrap();
            if !v.iter().any(|x| x.tag == family) {
                let got: Vec<&str> = v.iter().map(|x| x.tag.as_str()).collect();
                failures.push(format!(
                    "seed {seed}: corruption expected {family}, got {got:?}"
                ));
            }
        }
    }
    let inst = window_fixture(3, 2);
    for (pattern, i, t, setup, ending) in window_cases() {
        let ind = derive_indicators(&inst, &runs(&inst, pattern));
        let got = (ind.setup[i][0][t], ind.ending[i][t]);
        if got != (setup, ending) {
            failures.push(format!(
                "window {pattern:?} at t={t}: (setup, ending) {got:?}, expected {:?}",
                (setup, ending)
            ));
        }
    }
    let pass = failures.is_empty() && plans > 0;
    let detail = if failures.is_empty() {
        format!(
            "{plans} decoded plans clean, {corrupted} corruptions caught, {} window fixtures",
            window_cases().len()
        )
    } else {
        failures.join("; ")
    };
    verdict("oracle audit", pass, detail);
}

#[test]
fn matheuristic_quality() {
    let limit = Duration::from_secs(60);
    let config = RunConfig {
        lssp_time_limit: limit,
        assp_time_limit: limit,
        ..RunConfig::default()
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut seed = 0;
    while rows.len() < 10 && seed < 40 {
        seed += 1;
        let inst = common::small_instance(seed, 8, 3);
        let w = ObjectiveWeights::calibrated(inst.sets.classes);
        let exact =
            solve_integrated(&inst, &w, &SolverConfig::exact().with_time_limit(limit)).unwrap();
        if exact.status != SolveStatus::Optimal {
            continue;
        }
        let opt = compute_kpis(&inst, exact.plan.as_ref().unwrap(), &w).of;
        let mh = run_rolling_horizon(&inst, &w, &config).unwrap();
        let Some(plan) = mh.plan else {
            failures.push(format!("seed {seed}: matheuristic failed {:?}", mh.failure));
            continue;
        };
        if !check_feasibility(&inst, &plan).unwrap().is_empty() {
            failures.push(format!("seed {seed}: matheuristic plan infeasible"));
            continue;
        }
        let of = compute_kpis(&inst, &plan, &w).of;
        let greedy = compute_kpis(&inst, &greedy_edd(&inst).unwrap(), &w).of;
        rows.push((seed, opt, of, greedy));
    }
    let within = rows
        .iter()
        .filter(|&&(_, opt, of, _)| of <= opt * 1.10 + 1e-9)
        .count();
    let beats = rows.iter().filter(|&&(_, _, of, g)| of < g).count();
    for &(seed, opt, of, g) in &rows {
        if of > opt * 1.10 + 1e-9 {
            failures.push(format!(
                "seed {seed}: OF {of:.4} vs optimum {opt:.4} (greedy {g:.4})"
            ));
        }
    }
    let pass = failures.is_empty() && rows.len() >= 10 && beats * 10 >= rows.len() * 8;
    let detail = format!(
        "{within}/{} within 10% of the optimum, beats greedy in {beats}/{}{}",
        rows.len(),
        rows.len(),
        if failures.is_empty() {
            String::new()
        } else {
            format!("; {}", failures.join("; "))
        }
    );
    verdict("matheuristic quality", pass, detail);
}

/// Class weights that make one unit of a class outweigh every possible unit
/// of all lower classes over the horizon; stock terms off.
fn separated_weights(inst: &Instance) -> ObjectiveWeights {
    let norm = compute_normalizers(inst);
    let horizon = inst.periods() as f64;
    let g = inst.sets.classes;
    let mut coef = vec![1.0; g];
    for c in (0..g.saturating_sub(1)).rev() {
        let below: f64 = (c + 1..g).map(|k| coef[k] * norm.classes[k]).sum();
        coef[c] = 1.0 + horizon * below;
    }
    ObjectiveWeights {
        classes: coef.iter().zip(&norm.classes).map(|(k, m)| k * m).collect(),
        overstock: 0.0,
        understock: 0.0,
    }
}

#[test]
fn prioritization() {
    let mut failures = Vec::new();
    let mut checked = 0;
    for seed in 100..120 {
        let inst = common::tiny_instance(seed);
        let w = separated_weights(&inst);
        let Some(best) = oracle::lexicographic_backorders(&inst, &w) else {
            continue;
        };
        let sol = solve_integrated(&inst, &w, &SolverConfig::exact()).unwrap();
        let Some(plan) = sol.plan else {
            failures.push(format!("seed {seed}: solver {:?}", sol.status));
            continue;
        };
        checked += 1;
        let got = compute_kpis(&inst, &plan, &w).classes;
        if got != best {
            failures.push(format!("seed {seed}: {got:?} vs lexicographic {best:?}"));
        }
    }
    let pass = failures.is_empty() && checked > 0;
    let detail = if failures.is_empty() {
        format!("{checked}/{checked} optima are lexicographic minima")
    } else {
        failures.join("; ")
    };
    verdict("prioritization", pass, detail);
}

#[test]
fn rolling_continuity() {
    let config = RunConfig {
        lssp_time_limit: Duration::from_secs(30),
        assp_time_limit: Duration::from_secs(30),
        ..RunConfig::default()
    };
    let mut failures = Vec::new();
    let mut spanning = 0;
    let mut boundaries = 0;
    for seed in 0..3 {
        let mut spec = SizeSpec::small(5, 3, 7);
        spec.macro_periods = 3;
        spec.warm_start = true;
        let inst = generate(seed, &spec).unwrap();
        let w = ObjectiveWeights::calibrated(inst.sets.classes);
        let run = run_rolling_horizon(&inst, &w, &config).unwrap();
        let Some(plan) = run.plan else {
            failures.push(format!("seed {seed}: run failed {:?}", run.failure));
            continue;
        };
        let full = derive_indicators(&inst, &plan.y);
        for h in 1..inst.calendar.macro_periods {
            boundaries += 1;
            let prev = &run.weeks[h - 1].plan;
            let week = &run.weeks[h].plan;
            let last = prev.inventory[0].len() - 1;
            let start = inst.calendar.macro_range(h).start;
            for a in 0..inst.sets.tires {
                if plan.inventory[a][start - 1] != prev.inventory[a][last]
                    || plan.inventory[a][start] != week.inventory[a][0]
                    || plan.backorder[a]
                        .iter()
                        .zip(&prev.backorder[a])
                        .any(|(f, p)| f[start - 1] != p[last])
                {
                    failures.push(format!("seed {seed}: stock breaks at week {h}, tire {a}"));
                }
            }
            for i in 0..inst.sets.items {
                for p in 0..inst.sets.presses {
                    if plan.y[i][p][start - 1] == 1 && plan.y[i][p][start] == 1 {
                        spanning += 1;
                        if week.indicators.setup[i][p][0] != 0 || full.setup[i][p][start] != 0 {
                            failures.push(format!(
                                "seed {seed}: spurious setup ({i}, {p}) at week {h}"
                            ));
                        }
                    }
                }
            }
        }
        let v = check_feasibility(&inst, &plan).unwrap();
        if v.iter().any(|x| x.tag == tags::BALANCE) {
            failures.push(format!("seed {seed}: stitched plan breaks the balance"));
        }
        let summed: f64 = (0..inst.calendar.macro_periods)
            .map(|h| compute_kpis_range(&inst, &plan, &w, inst.calendar.macro_range(h)).bt)
            .sum();
        if summed != compute_kpis(&inst, &plan, &w).bt {
            failures.push(format!("seed {seed}: weekly backorders do not add up"));
        }
    }
    let pass = failures.is_empty() && spanning > 0;
    let detail = if failures.is_empty() {
        format!("{boundaries} boundaries exact, {spanning} spanning runs without setups")
    } else {
        failures.join("; ")
    };
    verdict("rolling-horizon continuity", pass, detail);
}

/// Published (BC1, OS, BC2, BC3, US) outcomes of the sixteen calibration runs.
const TABLE_TWO: [(usize, [f64; 5]); 16] = [
    (13, [4470.0, 130.0, 47535.0, 471.0, 66047.0]),
    (6, [4523.0, 156.0, 48585.0, 464.0, 66582.0]),
    (2, [4526.0, 114.0, 44603.0, 455.0, 63359.0]),
    (11, [4658.0, 135.0, 49973.0, 469.0, 67886.0]),
    (9, [4668.0, 118.0, 46854.0, 470.0, 66012.0]),
    (5, [4823.0, 132.0, 46788.0, 465.0, 65504.0]),
    (10, [4885.0, 129.0, 47314.0, 471.0, 66574.0]),
    (15, [4957.0, 233.0, 50153.0, 462.0, 69084.0]),
    (14, [4974.0, 158.0, 49497.0, 456.0, 68394.0]),
    (1, [5044.0, 122.0, 47105.0, 473.0, 65901.0]),
    (16, [5059.0, 149.0, 50769.0, 479.0, 69830.0]),
    (8, [5102.0, 132.0, 45447.0, 459.0, 64805.0]),
    (12, [5110.0, 148.0, 48256.0, 470.0, 67285.0]),
    (3, [5183.0, 138.0, 43119.0, 451.0, 62537.0]),
    (7, [5372.0, 136.0, 45358.0, 455.0, 64968.0]),
    (4, [5448.0, 118.0, 40813.0, 452.0, 60528.0]),
];

#[test]
fn taguchi_fixtures() {
    let mut failures = Vec::new();
    for (z, want) in [
        (&[1.0][..], 0.0),
        (&[10.0, 10.0][..], -20.0),
        (&[2.0, 4.0][..], -10.0),
    ] {
        let got = sn_ratio(z).unwrap();
        if (got - want).abs() > 1e-9 {
            failures.push(format!("sn{z:?} = {got}, expected {want}"));
        }
    }
    if !is_orthogonal(&l16_array()) {
        failures.push("L16 is not orthogonal".into());
    }
    // reverse the order so the ranking cannot lean on the listed order
    let rows: Vec<(usize, [f64; 5])> = TABLE_TWO.iter().rev().copied().collect();
    let tuples: Vec<[f64; 5]> = rows.iter().map(|r| r.1).collect();
    let first = rows[rank_by_company_rules(&tuples)[0]].0;
    if first != 13 {
        failures.push(format!("instance {first} ranks first"));
    }
    let pass = failures.is_empty();
    let detail = if pass {
        "hand ratios, orthogonality and ranking (instance 13 first)".to_string()
    } else {
        failures.join("; ")
    };
    verdict("Taguchi fixtures", pass, detail);
}

/// Reference outcome per inventory configuration: (BC1, OS, BT, US).
const SENSITIVITY_REFERENCE: [[f64; 4]; 3] = [
    [2563.0, 0.0, 43103.0, 51849.0],
    [226.0, 543.0, 6298.0, 30676.0],
    [294.0, 902.0, 3758.0, 6215.0],
];

/// Per scenario and configuration: (BC1, OS, BT, US) counts and printed gaps,
/// `None` where the table prints NA.
type Printed = ([f64; 4], [Option<i64>; 4]);

fn sensitivity_tables() -> Vec<(&'static str, [Printed; 3])> {
    let s = Some;
    vec![
        (
            "S1",
            [
                (
                    [5209.0, 16456.0, 52607.0, 61980.0],
                    [s(103), None, s(22), s(6)],
                ),
                (
                    [840.0, 1561.0, 7516.0, 34145.0],
                    [s(272), s(187), s(19), s(11)],
                ),
                (
                    [912.0, 5618.0, 6779.0, 11016.0],
                    [s(210), s(523), s(80), s(77)],
                ),
            ],
        ),
        (
            "S2",
            [
                ([3681.0, 967.0, 45611.0, 54933.0], [s(44), None, s(6), s(6)]),
                (
                    [486.0, 1286.0, 7065.0, 32214.0],
                    [s(115), s(137), s(12), s(5)],
                ),
                (
                    [793.0, 3291.0, 5559.0, 8910.0],
                    [s(170), s(265), s(48), s(43)],
                ),
            ],
        ),
        (
            "S3",
            [
                ([3787.0, 866.0, 45999.0, 54933.0], [s(48), None, s(7), s(6)]),
                ([347.0, 567.0, 6647.0, 31768.0], [s(54), s(4), s(6), s(4)]),
                (
                    [785.0, 2999.0, 5067.0, 8095.0],
                    [s(167), s(232), s(35), s(30)],
                ),
            ],
        ),
        (
            "S4",
            [
                (
                    [2272.0, 36.0, 43282.0, 51341.0],
                    [s(-11), None, s(0), s(-1)],
                ),
                (
                    [323.0, 653.0, 6214.0, 29490.0],
                    [s(43), s(20), s(-1), s(-4)],
                ),
                (
                    [271.0, 1149.0, 3482.0, 6070.0],
                    [s(-8), s(27), s(-7), s(-2)],
                ),
            ],
        ),
        (
            "S5",
            [
                (
                    [2312.0, 16.0, 42335.0, 50954.0],
                    [s(-10), None, s(-2), s(-2)],
                ),
                (
                    [210.0, 528.0, 6145.0, 29179.0],
                    [s(-7), s(-3), s(-2), s(-5)],
                ),
                ([275.0, 1026.0, 3992.0, 6540.0], [s(-6), s(14), s(6), s(5)]),
            ],
        ),
    ]
}

fn report(v: [f64; 4]) -> KpiReport {
    KpiReport {
        classes: vec![v[0], 0.0, 0.0],
        bt: v[2],
        os: v[1],
        us: v[3],
        of: 0.0,
    }
}

#[test]
fn sensitivity_fixtures() {
    let kpis = ["BC1", "OS", "BT", "US"];
    let mut checked = 0;
    let mut failures = Vec::new();
    for (scenario, configs) in sensitivity_tables() {
        for (c, (values, printed)) in configs.iter().enumerate() {
            let gaps = compare(&report(SENSITIVITY_REFERENCE[c]), &report(*values)).unwrap();
            for (k, kpi) in kpis.iter().enumerate() {
                checked += 1;
                let got = gaps.get(kpi).unwrap().percent.map(|p| p.round() as i64);
                if got != printed[k] {
                    failures.push(format!(
                        "{scenario} configuration {} {kpi}: computed {got:?}, printed {:?}",
                        c + 1,
                        printed[k]
                    ));
                }
            }
        }
    }
    let pass = failures.is_empty();
    let detail = if pass {
        format!("{checked} published gaps reproduced")
    } else {
        format!(
            "{}/{checked} differ: {}",
            failures.len(),
            failures.join("; ")
        )
    };
    verdict("sensitivity fixtures", pass, detail);
}

#[test]
fn scale_smoke_test() {
    let budget = Duration::from_secs(1800 + 3600);
    let mut spec = SizeSpec::plant_scale();
    spec.macro_periods = 1;
    let inst = generate(1, &spec).unwrap();
    let w = ObjectiveWeights::calibrated(inst.sets.classes);
    let start = Instant::now();
    let run = run_rolling_horizon(&inst, &w, &RunConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let (pass, detail) = match &run.plan {
        None => (false, format!("week failed: {:?}", run.failure)),
        Some(plan) => {
            let v = check_feasibility(&inst, plan).unwrap();
            let kpi = compute_kpis(&inst, plan, &w);
            (
                v.is_empty() && elapsed <= budget,
                format!(
                    "{} items, {} presses in {elapsed:.0?}, {} violations, OF {:.4}",
                    inst.sets.items,
                    inst.sets.presses,
                    v.len(),
                    kpi.of
                ),
            )
        }
    };
    verdict("scale smoke test", pass, detail);
}
