//! Acceptance criteria, one PASS/FAIL line each.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use clmm_game::amm::{
    bonding_curve, expected_il_rate, il_fraction, il_rate, liquidity_price, position_amounts, shift_prices,
    LiquidityHistogram, Position, PriceDistribution, TickGrid,
};
use clmm_game::game::{
    atomic_utility, budget_used, budget_used_general, deviation_utility, general_taus, original_utility, theta,
    AtomicProfile, GameSpec, GeneralAllocation,
};
use clmm_game::pipeline::{attribute_fees, build_all_days, GameOptions, PoolData};
use clmm_game::amm::PricePoint;
use clmm_game::solver::{
    best_response, closed_form_constant_budget, kkt_residuals, lift_to_original, random_profile, solve_ne,
    structure_checks, waterfill_check, EquilibriumResult, SolverOptions,
};
use clmm_game::strategies::{nog, overlap, report_csv, run_strategy_suite, SuiteConfig};
use common::{random_feasible_row, random_spec, sup_distance, SpecShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn solve(spec: &GameSpec, seed: u64) -> Result<EquilibriumResult, String> {
    let opts = SolverOptions { seed, ..SolverOptions::default() };
    let r = solve_ne(spec, &opts).map_err(|e| e.to_string())?;
    check(r.converged, || format!("no convergence after {} iterations (step {:e})", r.iterations, r.last_step))?;
    Ok(r)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn ac1_closed_form() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let shape = SpecShape {
            players: rng.gen_range(2..=6),
            ranges: rng.gen_range(1..=10),
            alpha: if i % 2 == 0 { 0.5 } else { 1.0 },
            equal_budgets: true,
            with_chi: false,
            budget_scale: None,
        };
        let spec = random_spec(&mut rng, shape);
        let r = solve(&spec, i)?;
        let cf = closed_form_constant_budget(&spec).map_err(|e| e.to_string())?;
        for (a, b) in r.profile.k.iter().flatten().zip(cf.profile.k.iter().flatten()) {
            worst = worst.max(rel(*a, *b));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-6, || format!("worst relative entry error {worst:e}"))?;
    check(secs < 10.0, || format!("took {secs:.1}s"))?;
    Ok(format!("50 specs, worst rel err {worst:.1e}, {secs:.2}s"))
}

fn uniqueness_specs() -> Vec<GameSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    (0..20)
        .map(|i| {
            let shape = SpecShape {
                players: rng.gen_range(2..=6),
                ranges: rng.gen_range(1..=10),
                alpha: [0.5, 0.8, 1.0][i % 3],
                equal_budgets: false,
                with_chi: i % 2 == 1,
                budget_scale: None,
            };
            random_spec(&mut rng, shape)
        })
        .collect()
}

fn ac2_uniqueness() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for spec in uniqueness_specs() {
        let base = solve(&spec, 0)?;
        for seed in 1..5 {
            let other = solve(&spec, seed * 7919)?;
            worst = worst.max(sup_distance(&base.profile.k, &other.profile.k));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-6, || format!("profiles differ by {worst:e}"))?;
    check(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!("20 specs x 5 starts, max sup-norm gap {worst:.1e}, {secs:.2}s"))
}

fn random_suite() -> Vec<GameSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    (0..60)
        .map(|i| {
            let shape = SpecShape {
                players: rng.gen_range(1..=6),
                ranges: rng.gen_range(1..=10),
                alpha: [0.5, 0.8, 1.0][i % 3],
                equal_budgets: i % 4 == 0,
                with_chi: i % 5 == 0,
                budget_scale: None,
            };
            random_spec(&mut rng, shape)
        })
        .filter(|s| s.num_players() > 1 || s.chis().iter().all(|&c| c > 0.0))
        .collect()
}

fn ac3_kkt() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (i, spec) in random_suite().iter().chain(uniqueness_specs().iter()).enumerate() {
        let r = solve(spec, i as u64)?;
        let again = kkt_residuals(spec, &r.profile);
        worst = worst.max(r.residuals.max()).max(again.residuals.max());
        count += 1;
    }
    check(worst <= 1e-8, || format!("worst residual {worst:e}"))?;
    Ok(format!("{count} converged solves, worst residual {worst:.1e}"))
}

fn ac4_waterfill() -> Outcome {
    let mut count = 0;
    for (i, spec) in random_suite().iter().enumerate() {
        if spec.chis().iter().any(|&c| c != 0.0) {
            continue;
        }
        let r = solve(spec, i as u64)?;
        let wf = waterfill_check(spec, &r, 1e-6);
        check(wf.passed, || format!("waterfill failed on spec {i}: {wf:?}"))?;
        let st = structure_checks(spec, &r, 1e-6);
        check(st.passed(), || format!("structure failed on spec {i}: {st:?}"))?;
        count += 1;
    }
    let spec = GameSpec::new(
        TickGrid::new(vec![1.0, 4.0]).unwrap(),
        1.0,
        4.0,
        1.0,
        vec![1.0],
        vec![0.25],
        vec![0.0],
        vec![0.5, 10.0],
        vec!["a".into(), "b".into()],
    )
    .unwrap();
    let r = solve(&spec, 0)?;
    let k = (r.profile.k[0][0], r.profile.k[1][0]);
    check((k.0 - 0.5).abs() <= 1e-6 && (k.1 - (2f64.sqrt() - 0.5)).abs() <= 1e-6, || format!("fixture K = {k:?}"))?;
    check((r.lambda[0] - 0.207107).abs() <= 1e-5, || format!("lambda_1 = {}", r.lambda[0]))?;
    check(waterfill_check(&spec, &r, 1e-6).passed && structure_checks(&spec, &r, 1e-6).passed(), || {
        "fixture checks failed".into()
    })?;
    Ok(format!("{count} random specs pass; fixture K=({:.6}, {:.6}), lambda_1={:.6}", k.0, k.1, r.lambda[0]))
}

fn ac5_constant_utility() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst: f64 = 0.0;
    for i in 0..30 {
        let shape = SpecShape {
            players: rng.gen_range(2..=6),
            ranges: rng.gen_range(1..=10),
            alpha: [0.5, 0.8, 1.0][i % 3],
            equal_budgets: i % 2 == 0,
            with_chi: false,
            budget_scale: Some(rng.gen_range(1.5..4.0)),
        };
        let spec = random_spec(&mut rng, shape);
        let r = solve(&spec, i as u64)?;
        let nf = spec.num_players() as f64;
        let a = spec.alpha();
        let want = ((1.0 - a) * nf + a) / (nf * nf) * spec.fees().iter().sum::<f64>();
        for n in 0..spec.num_players() {
            worst = worst.max(rel(atomic_utility(&spec, &r.profile, n), want));
        }
    }
    check(worst <= 1e-8, || format!("worst relative utility error {worst:e}"))?;
    Ok(format!("30 ample-budget specs, worst rel err {worst:.1e}"))
}

fn ac6_positive() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut smallest = f64::INFINITY;
    for i in 0..20 {
        let shape = SpecShape {
            players: rng.gen_range(2..=6),
            ranges: rng.gen_range(1..=10),
            alpha: 0.5,
            equal_budgets: false,
            with_chi: false,
            budget_scale: None,
        };
        let spec = random_spec(&mut rng, shape);
        let r = solve(&spec, i)?;
        smallest = smallest.min(r.profile.k.iter().flatten().copied().fold(f64::INFINITY, f64::min));
    }
    check(smallest > 0.0, || format!("found entry {smallest:e}"))?;
    Ok(format!("20 specs, smallest entry {smallest:.3e}"))
}

fn random_alloc(rng: &mut ChaCha8Rng, ticks: usize) -> GeneralAllocation {
    let mut a = GeneralAllocation::new();
    for _ in 0..rng.gen_range(0..6) {
        let i = rng.gen_range(0..ticks - 1);
        let j = rng.gen_range(i + 1..ticks);
        a.insert(i, j, rng.gen_range(0.0..5.0));
    }
    a
}

fn ac7_twin_games() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst_u: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    let mut exact_budget = 0;
    for trial in 0..200 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=6);
        let dyadic = trial % 4 == 0;
        let grid = if dyadic {
            TickGrid::new((0..=m).map(|i| 4f64.powi(i as i32)).collect()).unwrap()
        } else {
            common::random_grid(&mut rng, m)
        };
        let q0 = if dyadic { 4f64.powi(rng.gen_range(0..=m as i32)) } else { rng.gen_range(grid.lowest() * 0.8..grid.highest() * 1.2) };
        let dist = PriceDistribution::Discrete(vec![(q0 * 1.3, 0.25), (q0 / 1.2, 0.5), (q0 * 2.0, 0.25)]);
        let taus: Vec<f64> = (0..m)
            .map(|r| {
                let (a, b) = grid.atomic_range(r);
                expected_il_rate(a, b, q0, &dist, 1.0).unwrap()
            })
            .collect();
        let fees: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..5.0)).collect();
        let chis: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..2.0)).collect();
        let allocs: Vec<GeneralAllocation> = (0..n)
            .map(|_| {
                let mut a = random_alloc(&mut rng, m + 1);
                if dyadic {
                    for v in a.entries.values_mut() {
                        *v = (*v * 8.0).round() / 8.0;
                    }
                }
                a
            })
            .collect();
        let rows: Vec<Vec<f64>> = allocs.iter().map(|a| theta(a, &grid).unwrap()).collect();
        let eps = grid.liquidity_prices(q0, 1.0);
        let budgets: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().zip(&eps).map(|(k, e)| k * e).sum::<f64>().max(1.0))
            .collect();
        let ids = (0..n).map(|i| format!("p{i}")).collect();
        let spec = GameSpec::new(grid, 1.0, q0, 1.0, fees, taus, chis, budgets, ids).map_err(|e| e.to_string())?;
        let general = general_taus(&spec, &dist).map_err(|e| e.to_string())?;
        let profile = AtomicProfile { k: rows };
        for p in 0..n {
            let u_orig = original_utility(&spec, &allocs, &general, p).map_err(|e| e.to_string())?;
            let u_atomic = atomic_utility(&spec, &profile, p);
            worst_u = worst_u.max((u_orig - u_atomic).abs());
            let b_gen = budget_used_general(&spec, &allocs[p]);
            let b_atom = budget_used(&spec, &profile.k[p]);
            if dyadic {
                check(b_gen == b_atom, || format!("dyadic budgets differ: {b_gen} vs {b_atom}"))?;
                exact_budget += 1;
            }
            worst_b = worst_b.max(rel(b_gen, b_atom.max(1e-300)).min((b_gen - b_atom).abs()));
        }
        if let Ok(r) = solve_ne(&spec, &SolverOptions::default()) {
            let lifted = lift_to_original(&r);
            for (p, a) in lifted.iter().enumerate() {
                check(theta(a, spec.grid()).unwrap() == r.profile.k[p], || "theta(lift(K)) != K".into())?;
            }
        }
    }
    check(worst_u <= 1e-10, || format!("utility gap {worst_u:e}"))?;
    check(worst_b <= 1e-12, || format!("budget gap {worst_b:e}"))?;
    Ok(format!(
        "200 allocations, utility gap {worst_u:.1e}, budget gap {worst_b:.1e} ({exact_budget} dyadic cases bit-equal)"
    ))
}

fn ac8_amm() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst_eps: f64 = 0.0;
    let mut worst_il: f64 = 0.0;
    let mut min_il = f64::INFINITY;
    for _ in 0..1000 {
        let mut t = [rng.gen_range(0.01..100.0), rng.gen_range(0.01..100.0), rng.gen_range(0.01..100.0)];
        t.sort_by(f64::total_cmp);
        let (a, c, b) = (t[0], t[1], t[2]);
        let q = rng.gen_range(0.005..200.0);
        let q2 = rng.gen_range(0.005..200.0);
        let (p, p2) = (rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0));
        let whole = liquidity_price(a, b, q, p);
        let parts = liquidity_price(a, c, q, p) + liquidity_price(c, b, q, p);
        worst_eps = worst_eps.max(rel(parts, whole));
        let il = |lo, hi| il_fraction(lo, hi, q, q2, p, p2).unwrap() * liquidity_price(lo, hi, q, p);
        let il_whole = il(a, b);
        let il_parts = il(a, c) + il(c, b);
        worst_il = worst_il.max((il_parts - il_whole).abs() / il_whole.abs().max(1e-12 * p2 * whole));
        let direct = il_rate(a, b, q, q2, p, p2).unwrap() * p;
        worst_il = worst_il.max((direct - il_whole).abs() / il_whole.abs().max(1e-12 * p2 * whole));
        min_il = min_il.min(il_rate(a, b, q, q2, p, p2).unwrap());
    }
    check(worst_eps <= 1e-12, || format!("liquidity price decomposition error {worst_eps:e}"))?;
    check(worst_il <= 1e-12, || format!("IL decomposition error {worst_il:e}"))?;
    check(min_il >= -1e-12, || format!("negative IL {min_il:e}"))?;

    let mut worst_curve: f64 = 0.0;
    for _ in 0..200 {
        let m = rng.gen_range(1..8);
        let grid = common::random_grid(&mut rng, m);
        let j: Vec<f64> = (0..m).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.1..10.0) }).collect();
        if j.iter().all(|&v| v == 0.0) {
            continue;
        }
        let positions: Vec<Position> = (0..m)
            .map(|r| {
                let (lo, hi) = grid.atomic_range(r);
                Position { liquidity: j[r], lower: lo, upper: hi }
            })
            .collect();
        let curve = bonding_curve(&LiquidityHistogram::new(grid.clone(), j.clone()).unwrap()).unwrap();
        for (k, bp) in curve.breakpoints().iter().enumerate() {
            let (x, y) = positions.iter().fold((0.0, 0.0), |(x, y), p| {
                let (dx, dy) = position_amounts(p, grid.ticks()[k]);
                (x + dx, y + dy)
            });
            worst_curve = worst_curve.max((bp.x - x).abs()).max((bp.y - y).abs());
            worst_curve = worst_curve.max((curve.eval(bp.x).unwrap() - y).abs());
            // Dead ranges collapse neighbouring breakpoints into one kink.
            let left_dead = k > 0 && j[k - 1] == 0.0;
            let right_dead = k < m && j[k] == 0.0;
            if !left_dead && !right_dead {
                let s = curve.slope(bp.x).unwrap();
                let t = grid.ticks()[k];
                worst_curve = worst_curve.max((s + t).abs() / t);
            }
        }
    }
    check(worst_curve <= 1e-10, || format!("bonding curve error {worst_curve:e}"))?;

    let mut worst_shift: f64 = 0.0;
    for _ in 0..1000 {
        let (px, py, q) = (rng.gen_range(0.01..1e4), rng.gen_range(0.01..1e4), rng.gen_range(1e-3..1e3));
        let (sx, sy) = shift_prices(px, py, q);
        worst_shift = worst_shift.max(rel(sx, q * sy)).max(rel(sx * sy, px * py));
    }
    check(worst_shift <= 1e-12, || format!("shift error {worst_shift:e}"))?;
    Ok(format!(
        "eps {worst_eps:.1e}, IL {worst_il:.1e}, min IL {min_il:.1e}, curve {worst_curve:.1e}, shift {worst_shift:.1e}"
    ))
}

fn ac9_fees() -> Outcome {
    let end = PricePoint::new(1.0, 1.0, 1.0).unwrap();
    let grid = TickGrid::new(vec![1.0, 4.0, 9.0]).unwrap();
    let fa = attribute_fees(&[(1.0, 9.0)], &grid, &[1.0, 1.0], &[1.0, 1.0], 0.003, &end).map_err(|e| e.to_string())?;
    check(fa.fees_y == vec![0.006, 0.006], || format!("fees {:?}", fa.fees_y))?;
    let one = TickGrid::new(vec![1.0, 4.0]).unwrap();
    let fa1 = attribute_fees(&[(1.0, 4.0)], &one, &[1.0], &[1.0], 0.003, &end).map_err(|e| e.to_string())?;
    check(fa1.fees_y == vec![0.006] && fa1.player_fees == vec![0.003], || format!("{fa1:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let m = rng.gen_range(1..6);
        let coarse = common::random_grid(&mut rng, m);
        let mut ticks = coarse.ticks().to_vec();
        for r in 0..m {
            let (a, b) = coarse.atomic_range(r);
            for _ in 0..rng.gen_range(0..3) {
                ticks.push(rng.gen_range(a..b));
            }
        }
        ticks.sort_by(f64::total_cmp);
        ticks.dedup();
        let fine = TickGrid::new(ticks).unwrap();
        let pk: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..5.0)).collect();
        let nk: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..5.0)).collect();
        let refine = |v: &[f64]| clmm_game::pipeline::refine_row(&coarse, v, &fine).unwrap();
        let (lo, hi) = (coarse.lowest(), coarse.highest());
        let trades: Vec<(f64, f64)> = (0..5).map(|_| (rng.gen_range(lo..hi), rng.gen_range(lo..hi))).collect();
        let day_end = PricePoint::new(rng.gen_range(lo..hi), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)).unwrap();
        let a = attribute_fees(&trades, &coarse, &pk, &nk, 0.003, &day_end).unwrap();
        let b = attribute_fees(&trades, &fine, &refine(&pk), &refine(&nk), 0.003, &day_end).unwrap();
        for r in 0..m {
            let (lo_r, hi_r) = coarse.atomic_range(r);
            let (i, j) = (fine.index_of(lo_r).unwrap(), fine.index_of(hi_r).unwrap());
            let sum: f64 = b.fees[i..j].iter().sum();
            let psum: f64 = b.player_fees[i..j].iter().sum();
            worst = worst.max((sum - a.fees[r]).abs() / a.fees[r].max(1e-300).max(1e-12));
            worst = worst.max((psum - a.player_fees[r]).abs() / a.player_fees[r].max(1e-300).max(1e-12));
        }
    }
    check(worst <= 1e-12, || format!("splitting error {worst:e}"))?;
    Ok(format!("fixture fees exact; splitting invariance {worst:.1e}"))
}

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn ac10_golden() -> Outcome {
    let pool = PoolData::load(&fixture_dir().join("pool")).map_err(|e| e.to_string())?;
    let (days, _) = build_all_days(&pool, &GameOptions::default()).map_err(|e| e.to_string())?;
    check(days.len() == 7, || format!("expected 7 days, got {}", days.len()))?;
    for g in &days {
        let dir = fixture_dir().join("golden").join(g.day.date.to_string());
        let spec = std::fs::read_to_string(dir.join("spec.json")).map_err(|e| e.to_string())?;
        let gt = std::fs::read_to_string(dir.join("gt.json")).map_err(|e| e.to_string())?;
        check(g.spec.to_json() == spec, || format!("{} spec differs from golden", g.day.date))?;
        check(g.gt.to_json(&g.spec) == gt, || format!("{} GT differs from golden", g.day.date))?;
    }
    let run = |jobs| {
        let config = SuiteConfig { jobs, ..SuiteConfig::default() };
        run_strategy_suite(&pool, &days, &config).and_then(|r| report_csv(&r.rows))
    };
    let a = run(1).map_err(|e| e.to_string())?;
    let b = run(1).map_err(|e| e.to_string())?;
    let c = run(3).map_err(|e| e.to_string())?;
    check(a == b && a == c, || "strategy CSV not deterministic".into())?;
    Ok(format!("7 golden days byte-identical; CSV of {} lines deterministic", a.lines().count()))
}

fn ac11_br_dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut worst_gap: f64 = 0.0;
    let mut worst_nog: f64 = 0.0;
    for i in 0..20 {
        let shape = SpecShape {
            players: rng.gen_range(2..=6),
            ranges: rng.gen_range(1..=10),
            alpha: [0.5, 0.8, 1.0][i % 3],
            equal_budgets: false,
            with_chi: i % 2 == 0,
            budget_scale: None,
        };
        let spec = random_spec(&mut rng, shape);
        let profile = random_profile(&spec, i as u64);
        let n = rng.gen_range(0..spec.num_players());
        let br = best_response(&spec, &profile, n).map_err(|e| e.to_string())?;
        let u_br = deviation_utility(&spec, &profile, n, &br);
        for _ in 0..1000 {
            let alt = random_feasible_row(&mut rng, &spec, n);
            let u = deviation_utility(&spec, &profile, n, &alt);
            worst_gap = worst_gap.max(u - u_br);
        }
        let g = nog(&spec, &profile, n, &br).map_err(|e| e.to_string())?;
        worst_nog = worst_nog.max(g.abs());
    }
    check(worst_gap <= 1e-12, || format!("alternative beats BR by {worst_gap:e}"))?;
    check(worst_nog <= 1e-9, || format!("NOG(BR) = {worst_nog:e}"))?;
    Ok(format!("20 pairs x 1000 alternatives, max excess {worst_gap:.1e}, |NOG(BR)| {worst_nog:.1e}"))
}

fn ac12_metrics() -> Outcome {
    let spec = GameSpec::new(
        TickGrid::new(vec![1.0, 4.0, 9.0]).unwrap(),
        1.0,
        9.0,
        1.0,
        vec![1.0, 1.0],
        vec![0.1, 0.1],
        vec![0.0, 0.0],
        vec![2.0],
        vec!["a".into()],
    )
    .unwrap();
    let o = |a: &[f64], b: &[f64]| overlap(&spec, 0, a, b).unwrap();
    check(o(&[1.0, 0.7], &[1.0, 0.7]) == 1.0, || "overlap(a,a) != 1".into())?;
    check(o(&[2.0, 0.0], &[0.0, 2.0]) == 0.0, || "disjoint overlap != 0".into())?;
    check((o(&[2.0, 0.0], &[1.0, 0.0]) - 0.5).abs() <= 1e-12, || "half-budget overlap != 0.5".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    let mut worst: f64 = 0.0;
    for &(a, b, q, r) in &[(1.0, 4.0, 2.0, 1.5), (1.0, 1.5, 2.0, 2.0), (0.5, 8.0, 1.0, 1.1), (2.0, 3.0, 2.4, 3.0)] {
        let quad = expected_il_rate(a, b, q, &PriceDistribution::LogUniform { r }, 1.0).unwrap();
        let half: f64 = f64::ln(r);
        let samples = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..samples {
            let q2 = q * rng.gen_range(-half..half).exp();
            sum += il_rate(a, b, q, q2, 1.0, 1.0).unwrap();
        }
        worst = worst.max((sum / samples as f64 - quad).abs());
    }
    check(worst <= 1e-4, || format!("Monte Carlo gap {worst:e}"))?;
    Ok(format!("overlap cases exact; log-uniform IL vs 1e6-sample Monte Carlo gap {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("AC1  closed-form equilibrium oracle", ac1_closed_form),
        ("AC2  uniqueness across initializations", ac2_uniqueness),
        ("AC3  KKT certification", ac3_kkt),
        ("AC4  waterfilling and budget dominance", ac4_waterfill),
        ("AC5  constant utility with ample budgets", ac5_constant_utility),
        ("AC6  positive liquidity for alpha < 1", ac6_positive),
        ("AC7  twin-games equality", ac7_twin_games),
        ("AC8  AMM math suite", ac8_amm),
        ("AC9  fee attribution", ac9_fees),
        ("AC10 pipeline golden files and determinism", ac10_golden),
        ("AC11 best-response dominance", ac11_br_dominance),
        ("AC12 metric sanity", ac12_metrics),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
