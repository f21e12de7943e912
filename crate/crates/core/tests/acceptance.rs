//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them on success).

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spanpower::baselines::{mcmr_solve, ncofdm_solve};
use spanpower::greedy::greedy_solve;
use spanpower::model::{noise_floor_mw, Channel, ChannelGrid, RadioParams};
use spanpower::oracle::{exact_bruteforce, exact_gapcut};
use spanpower::scenario::{parse_channel_csv, synthesize_gains, ScenarioConfig, DEFAULT_SEED};
use spanpower::waterfill::water_fill;
use spanpower::{Algorithm, Grid, Params};

const W: f64 = 6.0;

fn cambridge_rows() -> Vec<spanpower::scenario::ChannelRow> {
    parse_channel_csv(include_str!("../../../data/cambridge.csv")).unwrap()
}

fn cambridge_grid(seed: u64) -> Grid {
    synthesize_gains(&cambridge_rows(), W, 500.0, 3.0, 15.0, seed).unwrap()
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Grid, Params, f64) {
    let m = rng.random_range(3..=8);
    let mut indices = BTreeSet::new();
    while indices.len() < m {
        indices.insert(rng.random_range(1u32..=40));
    }
    let channels = indices
        .into_iter()
        .map(|index| Channel {
            index,
            center_freq_mhz: 470.0 + 6.0 * index as f64,
            gain: 10f64.powf(rng.random_range(-115.0..-100.0) / 10.0),
        })
        .collect();
    let grid = ChannelGrid::new(channels, W).unwrap();
    let params = RadioParams {
        num_front_ends: rng.random_range(1..=3),
        ..RadioParams::default()
    };
    let demand = rng.random_range(1.0..=200.0);
    (grid, params, demand)
}

#[test]
fn criterion_1_oracle_dominance() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut gap_sum = 0.0;
    let mut gap_max = 0.0f64;
    let n = 200;
    for i in 0..n {
        let (grid, params, demand) = random_instance(&mut rng);
        let (greedy, _) = greedy_solve(&grid, &params, demand)
            .unwrap_or_else(|e| panic!("greedy failed on instance {i}: {e}"));
        let exact = exact_bruteforce(&grid, &params, demand)
            .unwrap_or_else(|e| panic!("oracle failed on instance {i}: {e}"));
        let (g, x) = (greedy.breakdown.total_mw, exact.breakdown.total_mw);
        assert!(
            g >= x - 1e-9,
            "criterion 1 FAIL: greedy {g} mW beat the oracle {x} mW on instance {i}"
        );
        let gap = (g - x) / x;
        gap_sum += gap;
        gap_max = gap_max.max(gap);
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "criterion 1 FAIL: suite took {elapsed:?}"
    );
    println!(
        "[PASS] criterion 1 (oracle dominance): {n} instances, mean gap {:.4}%, max gap {:.4}%, {elapsed:.2?}",
        100.0 * gap_sum / n as f64,
        100.0 * gap_max
    );
}

#[test]
fn criterion_2_oracle_cross_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1); // same instance stream as criterion 1
    let n = 200;
    for i in 0..n {
        let (grid, params, demand) = random_instance(&mut rng);
        let bf = exact_bruteforce(&grid, &params, demand).unwrap();
        let gc = exact_gapcut(&grid, &params, demand).unwrap();
        let (b, g) = (bf.breakdown.total_mw, gc.breakdown.total_mw);
        assert!(
            (b - g).abs() <= 1e-9,
            "criterion 2 FAIL: oracles disagree on instance {i}: {b} vs {g} mW"
        );
    }
    println!("[PASS] criterion 2 (oracle cross-check): gap-cut = brute force on {n} instances");
}

#[test]
fn criterion_3_water_fill_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let params = Params::default();
    let n0 = params.n0_mw_per_mhz;
    for i in 0..1000 {
        let k = rng.random_range(1..=10);
        let gains: Vec<(u32, f64)> = (0..k)
            .map(|j| {
                (
                    1 + 3 * j as u32,
                    10f64.powf(rng.random_range(-118.0..-95.0) / 10.0),
                )
            })
            .collect();
        let demand = rng.random_range(0.5..(55.0 * k as f64).min(250.0));
        let wf = water_fill(&gains, demand, W, n0, params.big_a_mw)
            .unwrap_or_else(|e| panic!("water-fill failed on set {i}: {e}"));
        assert!(
            (wf.achieved_rate_mbps - demand).abs() <= 1e-9 * demand,
            "criterion 3 FAIL: rate {} != demand {demand} on set {i}",
            wf.achieved_rate_mbps
        );
        for &(idx, g) in &gains {
            let c = noise_floor_mw(g, W, n0);
            let p = wf.powers[&idx];
            if p > 0.0 {
                assert!(
                    (p + c - wf.water_level_mw).abs() <= 1e-9 * wf.water_level_mw,
                    "criterion 3 FAIL: KKT violated on set {i}"
                );
            } else {
                assert!(
                    wf.water_level_mw <= c * (1.0 + 1e-9),
                    "criterion 3 FAIL: inactive channel above water on set {i}"
                );
            }
        }
    }

    // two-channel cases against a grid-search oracle over the rate split
    for i in 0..100 {
        let g1 = 10f64.powf(rng.random_range(-115.0..-98.0) / 10.0);
        let g2 = 10f64.powf(rng.random_range(-115.0..-98.0) / 10.0);
        let demand = rng.random_range(1.0..100.0);
        let wf = water_fill(&[(1, g1), (2, g2)], demand, W, n0, params.big_a_mw).unwrap();
        let steps = 10_000;
        let mut best = f64::INFINITY;
        for t in 0..=steps {
            let f1 = demand * t as f64 / steps as f64;
            let p = spanpower::model::power_for_rate(f1, g1, W, n0)
                + spanpower::model::power_for_rate(demand - f1, g2, W, n0);
            best = best.min(p);
        }
        assert!(
            (wf.total_power_mw - best).abs() <= 1e-6 * best,
            "criterion 3 FAIL: grid search disagrees on pair {i}: {} vs {best}",
            wf.total_power_mw
        );
    }
    println!("[PASS] criterion 3 (water-fill): 1000 KKT/rate checks, 100 grid-search cross-checks");
}

#[test]
fn criterion_4_limiting_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);

    // (a) dominant fixed analog power: one front end, one channel, best gain
    for _ in 0..50 {
        let m = rng.random_range(3..=8);
        let mut indices = BTreeSet::new();
        while indices.len() < m {
            indices.insert(rng.random_range(1u32..=40));
        }
        let channels: Vec<Channel<f64>> = indices
            .into_iter()
            .map(|index| Channel {
                index,
                center_freq_mhz: 470.0 + 6.0 * index as f64,
                gain: 10f64.powf(rng.random_range(-112.0..-95.0) / 10.0),
            })
            .collect();
        let best_channel = channels
            .iter()
            .max_by(|a, b| a.gain.partial_cmp(&b.gain).unwrap())
            .unwrap()
            .index;
        let grid = ChannelGrid::new(channels, W).unwrap();
        let defaults = RadioParams::default();
        let params = RadioParams {
            alpha1_mw: defaults.alpha1_mw * 1000.0,
            beta1_mw: defaults.beta1_mw * 1000.0,
            num_front_ends: rng.random_range(1..=3),
            ..defaults
        };
        let demand = 10.0;
        for report in [
            greedy_solve(&grid, &params, demand).unwrap().0,
            exact_bruteforce(&grid, &params, demand).unwrap(),
        ] {
            assert_eq!(
                report.channels_used(),
                vec![best_channel],
                "criterion 4a FAIL: expected the single best-gain channel"
            );
            assert_eq!(report.active_front_ends(), 1, "criterion 4a FAIL");
        }
    }

    // (b) free converters: the exact solution never activates a second front end
    for _ in 0..50 {
        let (grid, base, _) = random_instance(&mut rng);
        let params = RadioParams {
            alpha2_mw_per_msps: 0.0,
            beta2_mw_per_msps: 0.0,
            num_front_ends: rng.random_range(2..=3),
            ..base
        };
        let demand = rng.random_range(1.0..60.0 * grid.len() as f64);
        let report = exact_bruteforce(&grid, &params, demand).unwrap();
        assert_eq!(
            report.active_front_ends(),
            1,
            "criterion 4b FAIL: spanning is free, a second front end only adds analog power"
        );
    }

    // (c) dominant converter power: one contiguous chunk per front end
    for &fe_count in &[2usize, 3] {
        for _ in 0..10 {
            let mut channels = Vec::new();
            let mut chunks: Vec<Vec<u32>> = Vec::new();
            for c in 0..fe_count {
                let start = 10 + 30 * c as u32;
                chunks.push((start..start + 3).collect());
                for index in start..start + 3 {
                    channels.push(Channel {
                        index,
                        center_freq_mhz: 470.0 + 6.0 * index as f64,
                        gain: 10f64.powf(rng.random_range(-108.0..-106.0) / 10.0),
                    });
                }
            }
            let grid = ChannelGrid::new(channels, W).unwrap();
            let defaults = RadioParams::default();
            let params = RadioParams {
                alpha1_mw: 0.0,
                beta1_mw: 0.0,
                alpha2_mw_per_msps: defaults.alpha2_mw_per_msps * 100.0,
                beta2_mw_per_msps: defaults.beta2_mw_per_msps * 100.0,
                num_front_ends: fe_count,
                ..defaults
            };
            let demand = 150.0 * fe_count as f64;
            let report = exact_bruteforce(&grid, &params, demand).unwrap();
            assert_eq!(report.active_front_ends(), fe_count, "criterion 4c FAIL");
            for fe in 0..fe_count {
                let set = report.assignment.set(fe);
                if set.is_empty() {
                    continue;
                }
                let width = set.last().unwrap() - set.first().unwrap() + 1;
                assert_eq!(
                    width as usize,
                    set.len(),
                    "criterion 4c FAIL: front end {fe} nulls channels inside its span"
                );
            }
            let used = report.assignment.assigned();
            for chunk in &chunks {
                assert!(
                    chunk.iter().any(|idx| used.contains(idx)),
                    "criterion 4c FAIL: a chunk went unused at demand {demand}"
                );
            }
        }
    }
    println!(
        "[PASS] criterion 4 (limiting cases): analog-dominant, converter-free, converter-dominant"
    );
}

#[test]
fn criterion_5_low_demand_equality() {
    let grid = cambridge_grid(DEFAULT_SEED);
    let params = Params::default();
    let demand = 5.0;
    let (greedy, _) = greedy_solve(&grid, &params, demand).unwrap();
    let mcmr = mcmr_solve(&grid, &params, demand).unwrap();

    let diff = (greedy.breakdown.total_mw - mcmr.breakdown.total_mw).abs();
    assert!(
        diff <= 1e-6,
        "criterion 5 FAIL: totals differ by {diff} mW at 5 Mbps"
    );
    for report in [&greedy, &mcmr] {
        assert_eq!(
            report.channels_used().len(),
            1,
            "criterion 5 FAIL: expected one channel"
        );
        assert_eq!(
            report.active_front_ends(),
            1,
            "criterion 5 FAIL: expected one front end"
        );
        let circuit = report.breakdown.fixed_analog_mw + report.breakdown.converter_mw;
        assert!(
            (circuit - 480.1).abs() <= 1e-9,
            "criterion 5 FAIL: circuit floor {circuit} != 480.1 mW"
        );
        assert!(report.breakdown.amplifier_mw > 0.0);
        assert!(
            report.breakdown.amplifier_mw < circuit,
            "criterion 5 FAIL: amplifier term should be small at 5 Mbps"
        );
    }
    println!(
        "[PASS] criterion 5 (low-demand equality): greedy = mcmr = {:.4} mW (480.1 mW circuit + {:.4} mW amplifier)",
        greedy.breakdown.total_mw, greedy.breakdown.amplifier_mw
    );
}

#[test]
fn criterion_6_sweep_dominance() {
    let params = Params::default();
    let demands: Vec<f64> = (1..=20).map(|k| 5.0 * k as f64).collect();

    // shipped default seed: dominance at every demand
    let grid = cambridge_grid(DEFAULT_SEED);
    for &demand in &demands {
        let g = greedy_solve(&grid, &params, demand)
            .unwrap()
            .0
            .breakdown
            .total_mw;
        let mc = mcmr_solve(&grid, &params, demand)
            .unwrap()
            .breakdown
            .total_mw;
        let nc = ncofdm_solve(&grid, &params, demand)
            .unwrap()
            .breakdown
            .total_mw;
        assert!(
            g <= mc.min(nc) + 1e-6,
            "criterion 6 FAIL: greedy {g} above min(mcmr {mc}, ncofdm {nc}) at {demand} Mbps (default seed)"
        );
    }

    // the shipped scenario reproduces the expected 75 Mbps behavior: the
    // contiguous baseline takes the two strongest channels on separate front
    // ends, the wideband baseline pays mostly converter power, and the exact
    // optimum is never above greedy
    let mcmr75 = mcmr_solve(&grid, &params, 75.0).unwrap();
    assert_eq!(
        mcmr75.channels_used(),
        vec![26, 28],
        "criterion 6 FAIL: mcmr run choice"
    );
    assert_eq!(
        mcmr75.active_front_ends(),
        2,
        "criterion 6 FAIL: mcmr front ends"
    );
    let nc75 = ncofdm_solve(&grid, &params, 75.0).unwrap();
    assert!(
        nc75.breakdown.converter_mw > nc75.breakdown.amplifier_mw
            && nc75.breakdown.converter_mw > nc75.breakdown.fixed_analog_mw,
        "criterion 6 FAIL: ncofdm converter power should dominate its report"
    );
    let exact75 = exact_bruteforce(&grid, &params, 75.0)
        .unwrap()
        .breakdown
        .total_mw;
    let greedy75 = greedy_solve(&grid, &params, 75.0)
        .unwrap()
        .0
        .breakdown
        .total_mw;
    assert!(
        greedy75 >= exact75 - 1e-9,
        "criterion 6 FAIL: greedy beat the oracle"
    );
    assert!(
        exact75 <= mcmr75.breakdown.total_mw + 1e-9,
        "criterion 6 FAIL: oracle order"
    );

    // 100 random seeds: dominance in at least 95% of cells, violations logged
    let mut cells = 0u32;
    let mut violations = 0u32;
    for seed in 1..=100u64 {
        let grid = cambridge_grid(seed);
        for &demand in &demands {
            cells += 1;
            let g = greedy_solve(&grid, &params, demand)
                .unwrap()
                .0
                .breakdown
                .total_mw;
            let mc = mcmr_solve(&grid, &params, demand)
                .unwrap()
                .breakdown
                .total_mw;
            let nc = ncofdm_solve(&grid, &params, demand)
                .unwrap()
                .breakdown
                .total_mw;
            if g > mc.min(nc) + 1e-6 {
                violations += 1;
                eprintln!(
                    "criterion 6 violation: seed {seed} demand {demand} Mbps: greedy {g:.3} mcmr {mc:.3} ncofdm {nc:.3}"
                );
            }
        }
    }
    let share = 1.0 - violations as f64 / cells as f64;
    assert!(
        share >= 0.95,
        "criterion 6 FAIL: dominance in only {:.1}% of cells",
        100.0 * share
    );
    println!(
        "[PASS] criterion 6 (sweep dominance): default seed clean; {violations}/{cells} violations across seeds ({:.1}% dominant)",
        100.0 * share
    );
}

#[test]
fn criterion_7_complexity() {
    // bounds on the criterion-1 instance stream
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    for _ in 0..200 {
        let (grid, params, demand) = random_instance(&mut rng);
        let (_, trace) = greedy_solve(&grid, &params, demand).unwrap();
        let m = grid.len();
        assert!(
            trace.accepted() <= m,
            "criterion 7 FAIL: {} acceptances on {m} channels",
            trace.accepted()
        );
        assert!(
            trace.candidate_evaluations <= m * m * params.num_front_ends,
            "criterion 7 FAIL: {} evaluations exceed M^2 I",
            trace.candidate_evaluations
        );
    }

    // wall time at M = 50, I = 4
    let mut indices = BTreeSet::new();
    while indices.len() < 50 {
        indices.insert(rng.random_range(1u32..=60));
    }
    let channels = indices
        .into_iter()
        .map(|index| Channel {
            index,
            center_freq_mhz: 470.0 + 6.0 * index as f64,
            gain: 10f64.powf(rng.random_range(-115.0..-100.0) / 10.0),
        })
        .collect();
    let grid = ChannelGrid::new(channels, W).unwrap();
    let params = RadioParams {
        num_front_ends: 4,
        ..RadioParams::default()
    };
    let start = Instant::now();
    let (report, trace) = greedy_solve(&grid, &params, 100.0).unwrap();
    let elapsed = start.elapsed();
    report.validate(100.0).unwrap();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "criterion 7 FAIL: M=50, I=4 took {elapsed:?}"
    );
    println!(
        "[PASS] criterion 7 (complexity): bounds hold; M=50 I=4 solved in {elapsed:.2?} ({} evaluations)",
        trace.candidate_evaluations
    );
}

#[test]
fn criterion_8_reproducibility() {
    let config = ScenarioConfig {
        channels_path: Some(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/cambridge.csv"),
        ),
        ..ScenarioConfig::default()
    };
    let algorithms = [Algorithm::Greedy, Algorithm::McMr, Algorithm::NcOfdm];

    let first = spanpower::scenario::run_sweep(&config, &algorithms, 2).unwrap();
    let second = spanpower::scenario::run_sweep(&config, &algorithms, 2).unwrap();
    let sequential = spanpower::scenario::run_sweep(&config, &algorithms, 1).unwrap();
    assert_eq!(
        first.to_csv(),
        second.to_csv(),
        "criterion 8 FAIL: repeated runs differ"
    );
    assert_eq!(
        first.to_csv(),
        sequential.to_csv(),
        "criterion 8 FAIL: parallel and sequential runs differ"
    );

    let dir = std::env::temp_dir();
    let a = dir.join("spanpower_accept_a.csv");
    let b = dir.join("spanpower_accept_b.csv");
    first.write_csv(&a).unwrap();
    second.write_csv(&b).unwrap();
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    let _ = std::fs::remove_file(&a);
    let _ = std::fs::remove_file(&b);
    assert_eq!(bytes_a, bytes_b, "criterion 8 FAIL: written files differ");
    println!(
        "[PASS] criterion 8 (reproducibility): {} rows, byte-identical across runs",
        first.rows.len()
    );
}
