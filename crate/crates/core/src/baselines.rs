//! Comparison strategies: contiguous-only multi-radio access and
//! single-front-end wideband access. Both pick their schedule to minimize
//! transmit power alone and get billed for circuit power afterwards.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{Algorithm, Assignment, ChannelGrid, RadioParams, SolutionReport, SolveMeta};
use crate::scalar::{nonnegative, Scalar};
use crate::waterfill::water_fill;

/// A contiguous run of grid numbers: no missing channel numbers inside.
#[derive(Debug, Clone, Copy)]
struct Run {
    start_pos: usize,
    end_pos: usize,
}

/// All contiguous runs of the grid, ordered by start then end position.
fn contiguous_runs<T: Scalar>(grid: &ChannelGrid<T>) -> Vec<Run> {
    let idx: Vec<u32> = grid.channels().iter().map(|c| c.index).collect();
    let mut blocks = Vec::new();
    let mut block_start = 0usize;
    for pos in 1..=idx.len() {
        if pos == idx.len() || idx[pos] != idx[pos - 1] + 1 {
            blocks.push((block_start, pos - 1));
            block_start = pos;
        }
    }
    let mut runs = Vec::new();
    for (bs, be) in blocks {
        for a in bs..=be {
            for b in a..=be {
                runs.push(Run {
                    start_pos: a,
                    end_pos: b,
                });
            }
        }
    }
    runs
}

/// Multi-channel multi-radio baseline: each front end takes one contiguous
/// run of channel numbers. Enumerates every selection of up to I pairwise
/// disjoint runs, water-fills each selection's union, and keeps the one with
/// the least transmit power (ties: smaller total span, then fewer front
/// ends). Circuit power is charged on the winning schedule.
pub fn mcmr_solve<T: Scalar>(
    grid: &ChannelGrid<T>,
    params: &RadioParams<T>,
    demand_mbps: T,
) -> Result<SolutionReport<T>> {
    let start = Instant::now();
    params.validate()?;
    if !nonnegative(demand_mbps) {
        return Err(Error::validation("demand must be nonnegative and finite"));
    }
    if demand_mbps == T::zero() {
        return SolutionReport::build(
            grid,
            params,
            Assignment::empty(params.num_front_ends),
            &Default::default(),
            SolveMeta {
                algorithm: Algorithm::McMr,
                iterations: 0,
                wall_time: start.elapsed(),
            },
        );
    }

    let runs = contiguous_runs(grid);
    let width = grid.width_mhz();
    let idx_of = |pos: usize| grid.channels()[pos].index;
    let span_of = |run: &Run| width * T::cast_u32(idx_of(run.end_pos) - idx_of(run.start_pos) + 1);

    let mut wf_totals: HashMap<u128, Option<T>> = HashMap::new();
    let mut best: Option<(T, T, usize, Vec<Run>)> = None; // (transmit, span, count, runs)
    let mut tightest_miss: Option<(f64, Error)> = None;
    let mut evaluated = 0usize;

    // Depth-first over selections in run order; `chosen` is always sorted by
    // position, so each unordered selection is visited exactly once.
    let mut stack: Vec<(usize, Vec<Run>)> = vec![(0, Vec::new())];
    while let Some((next, chosen)) = stack.pop() {
        if !chosen.is_empty() {
            evaluated += 1;
            let mask = chosen.iter().fold(0u128, |m, run| {
                (run.start_pos..=run.end_pos).fold(m, |m, pos| m | 1 << pos)
            });
            let transmit = match wf_totals.get(&mask) {
                Some(&cached) => cached,
                None => {
                    let gains: Vec<(u32, T)> = chosen
                        .iter()
                        .flat_map(|run| run.start_pos..=run.end_pos)
                        .map(|pos| {
                            let c = &grid.channels()[pos];
                            (c.index, c.gain)
                        })
                        .collect();
                    let outcome = match water_fill(
                        &gains,
                        demand_mbps,
                        width,
                        params.n0_mw_per_mhz,
                        params.big_a_mw,
                    ) {
                        Ok(wf) => Some(wf.total_power_mw),
                        Err(e @ Error::Infeasible { .. }) => {
                            let shortfall = match &e {
                                Error::Infeasible { shortfall_mbps, .. } => *shortfall_mbps,
                                _ => unreachable!(),
                            };
                            if tightest_miss.as_ref().is_none_or(|(s, _)| shortfall < *s) {
                                tightest_miss = Some((shortfall, e));
                            }
                            None
                        }
                        Err(e) => return Err(e),
                    };
                    wf_totals.insert(mask, outcome);
                    outcome
                }
            };
            if let Some(transmit) = transmit {
                let span: T = chosen.iter().map(span_of).sum();
                let count = chosen.len();
                let better = match &best {
                    None => true,
                    Some((bt, bs, bc, _)) => {
                        transmit < *bt || (transmit == *bt && (span, count) < (*bs, *bc))
                    }
                };
                if better {
                    best = Some((transmit, span, count, chosen.clone()));
                }
            }
        }
        if chosen.len() < params.num_front_ends {
            for (j, run) in runs.iter().enumerate().skip(next) {
                let disjoint = chosen
                    .last()
                    .is_none_or(|last| run.start_pos > last.end_pos);
                if disjoint {
                    let mut extended = chosen.clone();
                    extended.push(*run);
                    stack.push((j + 1, extended));
                }
            }
        }
    }

    let Some((_, _, _, winner)) = best else {
        let (_, err) = tightest_miss.expect("some selection must have been tried");
        return Err(err);
    };

    let mut sets = vec![BTreeSet::new(); params.num_front_ends];
    for (fe, run) in winner.iter().enumerate() {
        for pos in run.start_pos..=run.end_pos {
            sets[fe].insert(idx_of(pos));
        }
    }
    let assignment = Assignment::from_sets(sets)?;
    let gains = grid.gains_for(assignment.assigned())?;
    let wf = water_fill(
        &gains,
        demand_mbps,
        width,
        params.n0_mw_per_mhz,
        params.big_a_mw,
    )?;
    SolutionReport::build(
        grid,
        params,
        assignment,
        &wf.powers,
        SolveMeta {
            algorithm: Algorithm::McMr,
            iterations: evaluated,
            wall_time: start.elapsed(),
        },
    )
}

/// Single-front-end wideband baseline: water-fill the whole grid on one
/// front end. The schedule is the water-fill support, so the span stretches
/// between the outermost channels worth using.
pub fn ncofdm_solve<T: Scalar>(
    grid: &ChannelGrid<T>,
    params: &RadioParams<T>,
    demand_mbps: T,
) -> Result<SolutionReport<T>> {
    let start = Instant::now();
    params.validate()?;
    if !nonnegative(demand_mbps) {
        return Err(Error::validation("demand must be nonnegative and finite"));
    }
    let wf = water_fill(
        &grid.gains(),
        demand_mbps,
        grid.width_mhz(),
        params.n0_mw_per_mhz,
        params.big_a_mw,
    )?;
    let mut sets = vec![BTreeSet::new(); params.num_front_ends];
    sets[0] = wf.active_set.clone();
    let assignment = Assignment::from_sets(sets)?;
    SolutionReport::build(
        grid,
        params,
        assignment,
        &wf.powers,
        SolveMeta {
            algorithm: Algorithm::NcOfdm,
            iterations: 1,
            wall_time: start.elapsed(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Channel;
    use crate::oracle::exact_bruteforce;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(entries: &[(u32, f64)]) -> ChannelGrid<f64> {
        let channels = entries
            .iter()
            .map(|&(index, gain)| Channel {
                index,
                center_freq_mhz: 470.0 + 6.0 * index as f64,
                gain,
            })
            .collect();
        ChannelGrid::new(channels, 6.0).unwrap()
    }

    #[test]
    fn runs_never_cross_grid_holes() {
        let g = grid(&[(23, 1e-11), (24, 1e-11), (26, 1e-11)]);
        let runs = contiguous_runs(&g);
        // {23}, {24}, {23,24}, {26}
        assert_eq!(runs.len(), 4);
        assert!(runs.iter().all(|r| !(r.start_pos <= 1 && r.end_pos >= 2)));
    }

    #[test]
    fn mcmr_single_block_takes_support_interval() {
        // One contiguous block, one front end: the winner is the shortest run
        // whose water-fill matches the whole block's transmit power, i.e. the
        // interval between the outermost support channels.
        let g = grid(&[(23, 5e-11), (24, 1e-13), (25, 4e-11), (26, 1e-13)]);
        let params = RadioParams {
            num_front_ends: 1,
            ..RadioParams::default()
        };
        let r = 20.0;
        let report = mcmr_solve(&g, &params, r).unwrap();
        let full = water_fill(&g.gains(), r, 6.0, params.n0_mw_per_mhz, params.big_a_mw).unwrap();
        let amp = report.breakdown.amplifier_mw / params.k_pa;
        assert!((amp - full.total_power_mw).abs() <= 1e-9 * full.total_power_mw);
        let lo = *full.active_set.first().unwrap();
        let hi = *full.active_set.last().unwrap();
        let used = report.channels_used();
        assert_eq!(used.first(), Some(&lo));
        assert_eq!(used.last(), Some(&hi));
        report.validate(r).unwrap();
    }

    #[test]
    fn mcmr_prefers_strong_separated_singles() {
        // Two strong isolated channels against a weak adjacent pair.
        let g = grid(&[(23, 1e-13), (24, 1e-13), (26, 5e-11), (28, 4e-11)]);
        let params = RadioParams::default();
        let report = mcmr_solve(&g, &params, 75.0).unwrap();
        assert_eq!(report.channels_used(), vec![26, 28]);
        assert_eq!(report.active_front_ends(), 2);
    }

    #[test]
    fn ncofdm_equal_gains_uses_everything_evenly() {
        let g = grid(&[(23, 2e-11), (24, 2e-11), (33, 2e-11)]);
        let params = RadioParams::default();
        let report = ncofdm_solve(&g, &params, 60.0).unwrap();
        assert_eq!(report.active_front_ends(), 1);
        assert_eq!(report.channels_used(), vec![23, 24, 33]);
        let p23 = report.allocation.power_mw(0, 23);
        let p33 = report.allocation.power_mw(0, 33);
        assert!((p23 - p33).abs() <= 1e-9 * p23);
        // span counts the hole between 24 and 33
        assert_eq!(report.total_span_mhz(6.0), 66.0);
    }

    #[test]
    fn ncofdm_tiny_demand_collapses_to_best_channel() {
        let g = grid(&[(23, 8e-11), (40, 1e-12)]);
        let params = RadioParams::default();
        let report = ncofdm_solve(&g, &params, 2.0).unwrap();
        assert_eq!(report.channels_used(), vec![23]);
        assert_eq!(report.total_span_mhz(6.0), 6.0);
    }

    #[test]
    fn baselines_meet_demand_and_never_beat_the_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..25 {
            let m = rng.random_range(2..7);
            let mut indices = BTreeSet::new();
            while indices.len() < m {
                indices.insert(rng.random_range(1u32..30));
            }
            let entries: Vec<(u32, f64)> = indices
                .into_iter()
                .map(|idx| (idx, 10f64.powf(rng.random_range(-114.0..-100.0) / 10.0)))
                .collect();
            let g = grid(&entries);
            let params = RadioParams {
                num_front_ends: rng.random_range(1..3),
                ..RadioParams::default()
            };
            let r = rng.random_range(1.0..150.0);

            let oracle = exact_bruteforce(&g, &params, r).unwrap();
            for report in [
                mcmr_solve(&g, &params, r).unwrap(),
                ncofdm_solve(&g, &params, r).unwrap(),
            ] {
                report.validate(r).unwrap();
                assert!(report.breakdown.total_mw >= oracle.breakdown.total_mw - 1e-9);
            }
        }
    }

    #[test]
    fn ncofdm_transmit_power_is_the_single_front_end_floor() {
        // Any single-front-end schedule is a subset of the full grid, so its
        // water-fill cannot beat water-filling everything.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let g = grid(&[(3, 2e-11), (7, 6e-12), (8, 4e-11), (15, 9e-12)]);
        let params = RadioParams::default();
        let r = 55.0;
        let report = ncofdm_solve(&g, &params, r).unwrap();
        let nc_transmit = report.breakdown.amplifier_mw / params.k_pa;
        for _ in 0..30 {
            let subset: Vec<(u32, f64)> = g
                .gains()
                .into_iter()
                .filter(|_| rng.random_range(0..2) == 1)
                .collect();
            if subset.is_empty() {
                continue;
            }
            let wf = water_fill(&subset, r, 6.0, params.n0_mw_per_mhz, params.big_a_mw).unwrap();
            assert!(wf.total_power_mw >= nc_transmit - 1e-9 * nc_transmit.max(1.0));
        }
    }
}
