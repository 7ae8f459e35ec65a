//! End-to-end acceptance checks. Runs sequentially so the timing check is
//! not disturbed by other work, and prints one line per criterion.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use tristream::baselines::doulion_estimate;
use tristream::f2_sketch::F2Sketch;
use tristream::generate;
use tristream::indep_paths::{enumerate_two_paths, is_bipartite, verify_lower_bounds, TwoPath};
use tristream::oracles::{exact_f2, exact_transitivity, exact_two_paths};
use tristream::sparsifier::{ColoringFunction, SparsifiedGraph};
use tristream::stream::{normalize_event, Sign};
use tristream::two_path::TwoPathEstimator;
use tristream::{derive_config, run, AdjacencyGraph, EdgeEvent, EstimatorParams, VertexId};

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ins(n: u32, u: u32, v: u32) -> EdgeEvent {
    normalize_event(n, u as i64, v as i64, Sign::Insert).unwrap()
}

// 1. P2 = F2/2 - m exactly and alpha in [0, 1] on 500 random graphs, < 10 s.
fn oracle_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = 0;
    for _ in 0..500 {
        let n = rng.gen_range(2..=40);
        let g = generate::gnp(n, rng.gen_range(0.0..1.0), &mut rng);
        let (p2, f2, m) = (exact_two_paths(&g), exact_f2(&g), g.m_live() as u64);
        if 2 * p2 != f2 - 2 * m {
            bad += 1;
        }
        if let Ok(a) = exact_transitivity(&g) {
            if !(0.0..=1.0).contains(&a) {
                bad += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(bad == 0 && secs < 10.0, format!("{bad} failures, {secs:.2}s (limit 10s)"))
}

// 2. F2 sketch at eps = 0.3, delta = 0.1 within eps/6 in >= 90% of 200 trials
// on each of 20 fixtures, < 60 s.
fn sketch_concentration() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let eps = 0.3;
    let mut worst = 1.0f64;
    for fixture in 0..20u64 {
        let items: Vec<(u64, i64)> = (0..rng.gen_range(3..=12))
            .map(|i| (i * 7 + fixture, rng.gen_range(-6i64..=6)))
            .filter(|&(_, f)| f != 0)
            .collect();
        let truth: f64 = items.iter().map(|&(_, f)| (f * f) as f64).sum();
        let mut hits = 0;
        for trial in 0..200 {
            let mut sk = F2Sketch::with_accuracy(eps, 0.1, fixture * 1000 + trial).unwrap();
            for &(x, f) in &items {
                sk.update(x, f).unwrap();
            }
            if (sk.estimate() - truth).abs() <= eps / 6.0 * truth {
                hits += 1;
            }
        }
        worst = worst.min(hits as f64 / 200.0);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst >= 0.9 && secs < 60.0,
        format!("worst fixture {:.1}% within eps/6 (need 90%), {secs:.1}s (limit 60s)", worst * 100.0),
    )
}

// 3. 2-path estimate within 20% in >= 90% of 200 runs at eps = 0.2, delta = 0.1.
fn two_path_accuracy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fixtures = vec![
        ("K4", generate::complete(4)),
        ("star(8)", generate::star(8)),
        ("K3,3", generate::complete_bipartite(3, 3)),
        ("path(12)", generate::path(12)),
        ("connected(24)", generate::random_connected(24, 0.1, &mut rng)),
    ];
    let mut worst = (f64::INFINITY, "");
    for (name, g) in &fixtures {
        let truth = exact_two_paths(g) as f64;
        let stream = generate::insert_stream(g, &mut rng);
        let mut hits = 0;
        for seed in 0..200 {
            let mut est = TwoPathEstimator::with_accuracy(0.2, 0.1, seed).unwrap();
            for e in &stream {
                est.update(e).unwrap();
            }
            if (est.estimate() - truth).abs() <= 0.2 * truth {
                hits += 1;
            }
        }
        let rate = hits as f64 / 200.0;
        if rate < worst.0 {
            worst = (rate, name);
        }
    }
    outcome(
        worst.0 >= 0.9,
        format!("worst fixture {} at {:.1}% within 20% (need 90%)", worst.1, worst.0 * 100.0),
    )
}

// 4. Chi-square uniformity of 10^5 draws at level 0.01, mean draws <= 2.5.
fn sampler_uniformity() -> Outcome {
    let edges = [(1, 2), (1, 3), (1, 4), (1, 5), (2, 3), (5, 6), (6, 7), (7, 8)];
    let mut g = SparsifiedGraph::new(8, ColoringFunction::new(0, 1));
    for &(a, b) in &edges {
        g.update(&ins(8, a, b)).unwrap();
    }
    g.canonicalize();
    let host = AdjacencyGraph::from_edges(8, &edges);
    let paths: Vec<TwoPath> = enumerate_two_paths(&host);
    let mut counts = vec![0u64; paths.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let draws_total: u64 = (0..100_000)
        .map(|_| {
            let (p, d) = g.sample_counted(&mut rng).unwrap();
            counts[paths.iter().position(|&q| q == p).unwrap()] += 1;
            d as u64
        })
        .sum();
    let expected = 100_000.0 / paths.len() as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let df = (paths.len() - 1) as f64;
    let critical = ChiSquared::new(df).unwrap().inverse_cdf(0.99);
    let mean_draws = draws_total as f64 / 100_000.0;
    outcome(
        chi2 <= critical && mean_draws <= 2.5,
        format!(
            "{} 2-paths, chi2 = {chi2:.2} (critical {critical:.2}, df {df}), mean draws {mean_draws:.3} (limit 2.5)",
            paths.len()
        ),
    )
}

// 5. With 4 colors a fixed triangle is monochromatic in 1/16 +- 0.01 of 2000 seeds.
fn triangle_survival() -> Outcome {
    let survived = (0..2000u64)
        .filter(|&seed| {
            let f = ColoringFunction::new(seed, 4);
            f.is_monochromatic(VertexId(1), VertexId(2)) && f.is_monochromatic(VertexId(2), VertexId(3))
        })
        .count();
    let rate = survived as f64 / 2000.0;
    outcome(
        (rate - 1.0 / 16.0).abs() <= 0.01,
        format!("rate {rate:.4} vs 0.0625 +- 0.01"),
    )
}

// 6. Independent 2-path lower bounds: floor(m/18) on 1000 random connected
// graphs, the |V|/2 - 1 bound on trees, floor(m/9) on bipartite graphs, < 120 s.
fn independent_path_bounds() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut general = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(3..=40);
        let g = generate::random_connected(n, rng.gen_range(0.0..0.3), &mut rng);
        let r = verify_lower_bounds(&g).unwrap();
        if !r.bound_general_satisfied {
            general += 1;
        }
    }
    let mut trees = 0;
    for _ in 0..300 {
        let n = rng.gen_range(3..=40);
        let g = generate::random_connected(n, 0.0, &mut rng);
        if !verify_lower_bounds(&g).unwrap().bound_l3_satisfied {
            trees += 1;
        }
    }
    let mut bipartite = 0;
    let mut checked = 0;
    for (a, b) in (1..=6).flat_map(|a| (a..=6).map(move |b| (a, b))) {
        if a + b < 3 {
            continue;
        }
        checked += 1;
        let r = verify_lower_bounds(&generate::complete_bipartite(a, b)).unwrap();
        if r.bound_l4_satisfied != Some(true) {
            bipartite += 1;
        }
    }
    while checked < 300 {
        let n = rng.gen_range(3..=40);
        let g = generate::random_connected(n, rng.gen_range(0.0..0.3), &mut rng);
        if !is_bipartite(&g) {
            continue;
        }
        checked += 1;
        if verify_lower_bounds(&g).unwrap().bound_l4_satisfied != Some(true) {
            bipartite += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        general == 0 && trees == 0 && bipartite == 0 && secs < 120.0,
        format!(
            "violations: m/18 {general}/1000, trees {trees}/300, bipartite {bipartite}/{checked}; {secs:.1}s (limit 120s)"
        ),
    )
}

// 7. K20 insert-only, eps = 0.3, delta = 0.2, alpha_min = 1: within 30% of
// 1140 in >= 80% of 50 runs, < 60 s.
fn k20_accuracy() -> Outcome {
    let start = Instant::now();
    let g = generate::complete(20);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut hits = 0;
    let mut errors = 0;
    for seed in 0..50 {
        let stream = generate::insert_stream(&g, &mut rng);
        let cfg = derive_config(&EstimatorParams::new(0.3, 0.2, 20, 190, seed).alpha_min(1.0)).unwrap();
        match run(&stream, &cfg) {
            Ok(r) if (r.t3_hat - 1140.0).abs() <= 0.3 * 1140.0 => hits += 1,
            Ok(_) => {}
            Err(_) => errors += 1,
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        hits >= 40 && secs < 60.0,
        format!("{hits}/50 within 30% (need 40), {errors} errors, {secs:.1}s (limit 60s)"),
    )
}

// 8. K6 plus 50 decoys, then the decoys and vertex 6 deleted: identical to a
// fresh K5 run with the same seed, and within 50% of 10 in >= 70% of 100 runs.
fn dynamic_accuracy() -> Outcome {
    let n = 30;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let k6 = generate::complete(6);
    let k5: Vec<EdgeEvent> = generate::complete(5).insert_stream();
    let mut hits = 0;
    let mut identical = 0;
    for seed in 0..100u64 {
        let mut decoys = HashSet::new();
        while decoys.len() < 50 {
            let a = rng.gen_range(1..=n);
            let b = rng.gen_range(1..=n);
            if a != b && !(a <= 6 && b <= 6) {
                decoys.insert((a.min(b), a.max(b)));
            }
        }
        let mut inserts: Vec<EdgeEvent> = k6.insert_stream();
        inserts.extend(decoys.iter().map(|&(a, b)| ins(n, a, b)));
        inserts.shuffle(&mut rng);
        let mut deletes: Vec<EdgeEvent> = decoys.iter().map(|&(a, b)| ins(n, a, b).inverse()).collect();
        deletes.extend((1..6).map(|u| ins(n, u, 6).inverse()));
        deletes.shuffle(&mut rng);
        let mut stream = inserts;
        stream.extend(deletes);

        let cfg = derive_config(&EstimatorParams::new(0.3, 0.2, n, 65, seed).alpha_min(1.0)).unwrap();
        let dynamic = run(&stream, &cfg);
        let fresh = run(&k5, &cfg);
        if dynamic == fresh {
            identical += 1;
        }
        if let Ok(r) = dynamic {
            if (r.t3_hat - 10.0).abs() <= 5.0 {
                hits += 1;
            }
        }
    }
    outcome(
        identical == 100 && hits >= 70,
        format!("{identical}/100 identical to fresh K5 run, {hits}/100 within 50% (need 70)"),
    )
}

// 9. Mean indicator over >= 2000 qualified copies within
// [(1 - eps) alpha - 3 se, (1 + eps) alpha + 3 se] at eps = 0.3.
fn bias_envelope() -> Outcome {
    let eps = 0.3;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = generate::gnp(120, 0.5, &mut rng);
    let alpha = exact_transitivity(&g).unwrap();
    let stream = generate::insert_stream(&g, &mut rng);
    let mut hits = 0u64;
    let mut copies = 0u64;
    let mut seed = 0;
    while copies < 2000 && seed < 20 {
        let cfg = derive_config(
            &EstimatorParams::new(eps, 0.9, g.n(), g.m_live(), seed)
                .k_override(500)
                .colors_override(2),
        )
        .unwrap();
        seed += 1;
        if let Ok(r) = run(&stream, &cfg) {
            for x in r.indicators() {
                hits += x as u64;
                copies += 1;
            }
        }
    }
    if copies == 0 {
        return outcome(false, "no qualified copies".into());
    }
    let mean = hits as f64 / copies as f64;
    let se = (mean * (1.0 - mean) / copies as f64).sqrt();
    let (lo, hi) = ((1.0 - eps) * alpha - 3.0 * se, (1.0 + eps) * alpha + 3.0 * se);
    outcome(
        copies >= 2000 && (lo..=hi).contains(&mean),
        format!("alpha {alpha:.4}, mean X {mean:.4} over {copies} copies, envelope [{lo:.4}, {hi:.4}]"),
    )
}

// 10. Doulion on K10 at p = 0.5: mean of 1000 estimates within 5% of 120.
fn doulion_unbiased() -> Outcome {
    let stream = generate::complete(10).insert_stream();
    let mean: f64 = (0..1000)
        .map(|seed| doulion_estimate(&stream, 10, 0.5, seed).unwrap())
        .sum::<f64>()
        / 1000.0;
    outcome((mean - 120.0).abs() <= 6.0, format!("mean {mean:.2} vs 120 +- 6"))
}

// 11. After 10^4 random mixed updates the incremental structure equals a
// from-scratch rebuild, for 20 seeds.
fn structural_audit() -> Outcome {
    let n = 60;
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coloring = ColoringFunction::new(seed, 1 + (seed % 3) as u32);
        let mut g = SparsifiedGraph::new(n, coloring);
        let mut live: Vec<(u32, u32)> = Vec::new();
        let mut present = HashSet::new();
        let mut updates = 0;
        while updates < 10_000 {
            if !live.is_empty() && rng.gen_bool(0.45) {
                let (a, b) = live.swap_remove(rng.gen_range(0..live.len()));
                present.remove(&(a, b));
                g.update(&ins(n, a, b).inverse()).unwrap();
            } else {
                let a = rng.gen_range(1..=n);
                let b = rng.gen_range(1..=n);
                let key = (a.min(b), a.max(b));
                if a == b || !present.insert(key) {
                    continue;
                }
                live.push(key);
                g.update(&ins(n, a, b)).unwrap();
            }
            updates += 1;
        }
        let mut rebuilt = SparsifiedGraph::new(n, coloring);
        for &(a, b) in &live {
            rebuilt.update(&ins(n, a, b)).unwrap();
        }
        let same = g.audit().is_ok()
            && g.edge_list() == rebuilt.edge_list()
            && g.level_p2() == rebuilt.level_p2()
            && g.p2_total() == rebuilt.p2_total()
            && (1..=n).all(|v| {
                let v = VertexId(v);
                g.level_of(v) == rebuilt.level_of(v) && g.degree(v) == rebuilt.degree(v)
            });
        if !same {
            failures.push(seed);
        }
    }
    outcome(failures.is_empty(), format!("mismatching seeds: {failures:?}"))
}

fn mixed_stream(n: u32, events: usize, live_target: usize, rng: &mut ChaCha8Rng) -> Vec<EdgeEvent> {
    let mut out = Vec::with_capacity(events);
    let mut live: Vec<(u32, u32)> = Vec::new();
    let mut present = HashSet::new();
    while out.len() < events {
        let delete = live.len() >= live_target || (live.len() * 2 > live_target && rng.gen_bool(0.5));
        if delete {
            let (a, b) = live.swap_remove(rng.gen_range(0..live.len()));
            present.remove(&(a, b));
            out.push(ins(n, a, b).inverse());
        } else {
            let a = rng.gen_range(1..=n);
            let b = rng.gen_range(1..=n);
            let key = (a.min(b), a.max(b));
            if a == b || !present.insert(key) {
                continue;
            }
            live.push(key);
            out.push(ins(n, a, b));
        }
    }
    out
}

// 12. 10^6 events through 100 sparsifiers in < 30 s, per-copy update time
// within +-50% of the median across n in {10^3, 10^4, 10^5}.
fn update_cost() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let runs: Vec<(u32, Vec<EdgeEvent>)> = [1_000u32, 10_000, 100_000]
        .into_iter()
        .map(|n| (n, mixed_stream(n, 1_000_000, 20_000, &mut rng)))
        .collect();
    // untimed warm-up so the first measured run does not pay for cold caches
    // and fresh allocator pages
    for copy in 0..10 {
        let mut g = SparsifiedGraph::new(runs[0].0, ColoringFunction::new(copy, 8));
        for e in &runs[0].1 {
            g.update(e).unwrap();
        }
    }
    let mut per_update = Vec::new();
    let mut slowest = Duration::ZERO;
    for (n, stream) in &runs {
        let mut copies: Vec<SparsifiedGraph> = (0..100)
            .map(|i| SparsifiedGraph::new(*n, ColoringFunction::new(i, 8)))
            .collect();
        let start = Instant::now();
        for copy in &mut copies {
            for e in stream {
                copy.update(e).unwrap();
            }
        }
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        per_update.push(elapsed.as_secs_f64() * 1e9 / (100.0 * stream.len() as f64));
    }
    let mut sorted = per_update.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[1];
    let flat = per_update.iter().all(|&t| (t - median).abs() <= 0.5 * median);
    let ns: Vec<String> = per_update.iter().map(|t| format!("{t:.1}")).collect();
    outcome(
        flat && slowest < Duration::from_secs(30),
        format!(
            "ns per copy-update at n = 1e3/1e4/1e5: {} (median {median:.1}), slowest run {:.1}s (limit 30s)",
            ns.join("/"),
            slowest.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Check; 12] = [
        ("oracle identities", oracle_identities),
        ("F2 sketch concentration", sketch_concentration),
        ("2-path estimator accuracy", two_path_accuracy),
        ("sampler uniformity", sampler_uniformity),
        ("triangle survival rate", triangle_survival),
        ("independent 2-path bounds", independent_path_bounds),
        ("K20 insert-only accuracy", k20_accuracy),
        ("dynamic stream accuracy", dynamic_accuracy),
        ("bias envelope", bias_envelope),
        ("Doulion unbiasedness", doulion_unbiased),
        ("structural audit", structural_audit),
        ("per-edge update cost", update_cost),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "[{verdict}] {:>2}. {name}: {} ({:.1}s)",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += !o.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
