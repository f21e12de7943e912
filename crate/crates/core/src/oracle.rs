//! Exact solvers, used as ground truth for the greedy scheduler.
//!
//! Scheduling decisions are binary, so the problem splits into one convex
//! power allocation per candidate schedule. Two exhaustive strategies are
//! provided: [`exact_bruteforce`] enumerates channel-to-front-end maps, and
//! [`exact_gapcut`] enumerates channel subsets and splits each subset across
//! front ends by cutting at the widest index gaps, which is optimal because
//! a cut at a gap of `d` slots saves `2 (alpha2 + beta2) (d - 1) W` of
//! converter power at the fixed cost of one more active front end.
//!
//! Transmit power depends only on the set of scheduled channels (link gains
//! do not vary across front ends), so water-filling results are cached per
//! subset during enumeration.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{Algorithm, Assignment, ChannelGrid, RadioParams, SolutionReport, SolveMeta};
use crate::scalar::{nonnegative, Scalar};
use crate::waterfill::water_fill;

/// Default cap on enumeration size for both exact solvers.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 2_000_000;

struct WfCache<'a, T> {
    grid: &'a ChannelGrid<T>,
    params: &'a RadioParams<T>,
    demand_mbps: T,
    /// Minimum transmit power per channel subset; `None` marks subsets that
    /// cannot carry the demand under the cap.
    totals: HashMap<u64, Option<T>>,
}

impl<'a, T: Scalar> WfCache<'a, T> {
    fn new(grid: &'a ChannelGrid<T>, params: &'a RadioParams<T>, demand_mbps: T) -> Self {
        Self {
            grid,
            params,
            demand_mbps,
            totals: HashMap::new(),
        }
    }

    fn gains_of(&self, mask: u64) -> Vec<(u32, T)> {
        self.grid
            .channels()
            .iter()
            .enumerate()
            .filter(|(pos, _)| mask >> pos & 1 == 1)
            .map(|(_, c)| (c.index, c.gain))
            .collect()
    }

    fn transmit_total(&mut self, mask: u64) -> Option<T> {
        if let Some(&cached) = self.totals.get(&mask) {
            return cached;
        }
        let gains = self.gains_of(mask);
        let total = match water_fill(
            &gains,
            self.demand_mbps,
            self.grid.width_mhz(),
            self.params.n0_mw_per_mhz,
            self.params.big_a_mw,
        ) {
            Ok(wf) => Some(wf.total_power_mw),
            Err(Error::Infeasible { .. }) => None,
            Err(e) => panic!("water-fill failed on a validated instance: {e}"),
        };
        self.totals.insert(mask, total);
        total
    }
}

/// Candidate ranking: total power first, then fewer active front ends,
/// smaller total span, and finally a lexicographic key for determinism.
struct Best<T> {
    total_mw: T,
    actives: usize,
    span_mhz: T,
    key: Vec<u8>,
    labels: Vec<u8>,
}

impl<T: Scalar> Best<T> {
    fn consider(
        slot: &mut Option<Best<T>>,
        total_mw: T,
        actives: usize,
        span_mhz: T,
        labels: &[u8],
        num_front_ends: usize,
    ) {
        let key = || -> Vec<u8> {
            labels
                .iter()
                .map(|&l| if l == 0 { num_front_ends as u8 + 1 } else { l })
                .collect()
        };
        let better = match slot {
            None => true,
            Some(b) => {
                total_mw < b.total_mw
                    || (total_mw == b.total_mw
                        && (actives, span_mhz, key()) < (b.actives, b.span_mhz, b.key.clone()))
            }
        };
        if better {
            *slot = Some(Best {
                total_mw,
                actives,
                span_mhz,
                key: key(),
                labels: labels.to_vec(),
            });
        }
    }
}

fn check_budget(count_log2: f64, budget: u64, hint: &str) -> Result<()> {
    if count_log2 > (budget as f64).log2() {
        return Err(Error::Budget {
            required: count_log2.exp2(),
            budget,
            hint: hint.to_string(),
        });
    }
    Ok(())
}

fn empty_report<T: Scalar>(
    grid: &ChannelGrid<T>,
    params: &RadioParams<T>,
    algorithm: Algorithm,
    start: Instant,
) -> Result<SolutionReport<T>> {
    SolutionReport::build(
        grid,
        params,
        Assignment::empty(params.num_front_ends),
        &Default::default(),
        SolveMeta {
            algorithm,
            iterations: 0,
            wall_time: start.elapsed(),
        },
    )
}

/// Depth-first enumeration of channel-to-front-end maps in canonical form:
/// front-end labels first appear in increasing order, so each partition of
/// each channel subset is visited exactly once regardless of labeling.
struct MapSearch<'a, T> {
    cache: WfCache<'a, T>,
    best: Option<Best<T>>,
    labels: Vec<u8>,
    leaves: usize,
}

impl<T: Scalar> MapSearch<'_, T> {
    /// `used` counts the front ends that have appeared so far.
    fn recurse(&mut self, pos: usize, used: u8, mask: u64) {
        if pos == self.labels.len() {
            self.evaluate_leaf(mask);
            return;
        }
        let max_label = (used + 1).min(self.cache.params.num_front_ends as u8);
        for l in 0..=max_label {
            self.labels[pos] = l;
            let new_mask = if l > 0 { mask | 1 << pos } else { mask };
            self.recurse(pos + 1, used.max(l), new_mask);
        }
        self.labels[pos] = 0;
    }

    fn evaluate_leaf(&mut self, mask: u64) {
        self.leaves += 1;
        if mask == 0 {
            return; // nothing scheduled cannot carry a positive demand
        }
        let Some(transmit) = self.cache.transmit_total(mask) else {
            return;
        };
        let grid = self.cache.grid;
        let params = self.cache.params;
        let width = grid.width_mhz();
        let i = params.num_front_ends;
        let mut lo = vec![u32::MAX; i];
        let mut hi = vec![0u32; i];
        for (pos, &l) in self.labels.iter().enumerate() {
            if l > 0 {
                let idx = grid.channels()[pos].index;
                let fe = (l - 1) as usize;
                lo[fe] = lo[fe].min(idx);
                hi[fe] = hi[fe].max(idx);
            }
        }
        let mut actives = 0usize;
        let mut span = T::zero();
        for fe in 0..i {
            if lo[fe] != u32::MAX {
                actives += 1;
                span = span + width * T::cast_u32(hi[fe] - lo[fe] + 1);
            }
        }
        let circuit = T::cast_usize(actives) * params.fixed_analog_per_fe_mw()
            + params.converter_mw_per_mhz() * span;
        let total = params.k_pa * transmit + circuit;
        Best::consider(&mut self.best, total, actives, span, &self.labels, i);
    }
}

/// Global optimum by enumerating every map from channels to
/// {unused, front end 1, ..., front end I}.
///
/// Front ends are interchangeable, so maps are enumerated in canonical form
/// (labels first appear in increasing order), which visits each partition of
/// each channel subset exactly once. Requires `(I+1)^M` within `budget`.
pub fn exact_bruteforce<T: Scalar>(
    grid: &ChannelGrid<T>,
    params: &RadioParams<T>,
    demand_mbps: T,
) -> Result<SolutionReport<T>> {
    exact_bruteforce_with_budget(grid, params, demand_mbps, DEFAULT_ENUMERATION_BUDGET)
}

pub fn exact_bruteforce_with_budget<T: Scalar>(
    grid: &ChannelGrid<T>,
    params: &RadioParams<T>,
    demand_mbps: T,
    budget: u64,
) -> Result<SolutionReport<T>> {
    let start = Instant::now();
    params.validate()?;
    if !nonnegative(demand_mbps) {
        return Err(Error::validation("demand must be nonnegative and finite"));
    }
    let m = grid.len();
    let i = params.num_front_ends;
    check_budget(
        m as f64 * ((i + 1) as f64).log2(),
        budget,
        "use the gapcut oracle, which enumerates 2^M channel subsets instead",
    )?;
    if demand_mbps == T::zero() {
        return empty_report(grid, params, Algorithm::Exact, start);
    }

    let mut search = MapSearch {
        cache: WfCache::new(grid, params, demand_mbps),
        best: None,
        labels: vec![0u8; m],
        leaves: 0,
    };
    search.recurse(0, 0, 0);
    let MapSearch { best, leaves, .. } = search;

    let Some(winner) = best else {
        // Not even the full grid can carry the demand; surface its shortfall.
        let gains = grid.gains();
        water_fill(
            &gains,
            demand_mbps,
            grid.width_mhz(),
            params.n0_mw_per_mhz,
            params.big_a_mw,
        )?;
        unreachable!("full-grid water-fill must fail when no schedule is feasible");
    };

    let mut sets = vec![BTreeSet::new(); params.num_front_ends];
    for (pos, &l) in winner.labels.iter().enumerate() {
        if l > 0 {
            sets[(l - 1) as usize].insert(grid.channels()[pos].index);
        }
    }
    let assignment = Assignment::from_sets(sets)?;
    let gains = grid.gains_for(assignment.assigned())?;
    let wf = water_fill(
        &gains,
        demand_mbps,
        grid.width_mhz(),
        params.n0_mw_per_mhz,
        params.big_a_mw,
    )?;
    SolutionReport::build(
        grid,
        params,
        assignment,
        &wf.powers,
        SolveMeta {
            algorithm: Algorithm::Exact,
            iterations: leaves,
            wall_time: start.elapsed(),
        },
    )
}

/// Gap positions of a sorted index list, as `(gap_width_in_slots, position)`
/// pairs where `position` is the left neighbor's place in the list.
fn gaps(indices: &[u32]) -> Vec<(u32, usize)> {
    indices
        .windows(2)
        .enumerate()
        .map(|(pos, w)| (w[1] - w[0], pos))
        .collect()
}

/// Global optimum by enumerating channel subsets (`2^M`) and splitting each
/// subset across front ends at its widest index gaps.
///
/// Agrees with [`exact_bruteforce`] on every instance; the subset form is
/// smaller because the best partition of a fixed subset is closed-form.
pub fn exact_gapcut<T: Scalar>(
    grid: &ChannelGrid<T>,
    params: &RadioParams<T>,
    demand_mbps: T,
) -> Result<SolutionReport<T>> {
    exact_gapcut_with_budget(grid, params, demand_mbps, DEFAULT_ENUMERATION_BUDGET)
}

pub fn exact_gapcut_with_budget<T: Scalar>(
    grid: &ChannelGrid<T>,
    params: &RadioParams<T>,
    demand_mbps: T,
    budget: u64,
) -> Result<SolutionReport<T>> {
    let start = Instant::now();
    params.validate()?;
    if !nonnegative(demand_mbps) {
        return Err(Error::validation("demand must be nonnegative and finite"));
    }
    let m = grid.len();
    check_budget(m as f64, budget, "reduce the channel count")?;
    if demand_mbps == T::zero() {
        return empty_report(grid, params, Algorithm::GapCut, start);
    }

    let width = grid.width_mhz();
    let fixed = params.fixed_analog_per_fe_mw();
    let conv = params.converter_mw_per_mhz();

    // Chosen cuts for a subset: widest gaps first, while a cut still saves
    // more converter power than one more front end costs.
    let cuts_for = |indices: &[u32]| -> Vec<usize> {
        let mut by_width = gaps(indices);
        by_width.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        by_width
            .into_iter()
            .take(params.num_front_ends - 1)
            .filter(|&(d, _)| conv * T::cast_u32(d - 1) * width > fixed)
            .map(|(_, pos)| pos)
            .collect()
    };

    let mut cache = WfCache::new(grid, params, demand_mbps);
    let mut best: Option<(T, usize, T, u64)> = None; // (total, actives, span, mask)
    for mask in 1u64..1 << m {
        let Some(transmit) = cache.transmit_total(mask) else {
            continue;
        };
        let indices: Vec<u32> = cache.gains_of(mask).iter().map(|&(idx, _)| idx).collect();
        let base_slots = indices[indices.len() - 1] - indices[0] + 1;
        let cuts = cuts_for(&indices);
        let saved_slots: u32 = cuts
            .iter()
            .map(|&pos| indices[pos + 1] - indices[pos] - 1)
            .sum();
        let actives = cuts.len() + 1;
        let span = width * T::cast_u32(base_slots - saved_slots);
        let total = params.k_pa * transmit + T::cast_usize(actives) * fixed + conv * span;
        let better = match best {
            None => true,
            Some((bt, ba, bs, _)) => total < bt || (total == bt && (actives, span) < (ba, bs)),
        };
        if better {
            best = Some((total, actives, span, mask));
        }
    }

    let Some((_, _, _, mask)) = best else {
        let gains = grid.gains();
        water_fill(
            &gains,
            demand_mbps,
            grid.width_mhz(),
            params.n0_mw_per_mhz,
            params.big_a_mw,
        )?;
        unreachable!("full-grid water-fill must fail when no subset is feasible");
    };

    let gains = cache.gains_of(mask);
    let indices: Vec<u32> = gains.iter().map(|&(idx, _)| idx).collect();
    let mut cut_positions = cuts_for(&indices);
    cut_positions.sort_unstable();
    let mut sets = vec![BTreeSet::new(); params.num_front_ends];
    let mut fe = 0usize;
    for (pos, &idx) in indices.iter().enumerate() {
        sets[fe].insert(idx);
        if cut_positions.contains(&pos) {
            fe += 1;
        }
    }
    let assignment = Assignment::from_sets(sets)?;
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
            algorithm: Algorithm::GapCut,
            iterations: (1usize << m) - 1,
            wall_time: start.elapsed(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::greedy_solve;
    use crate::model::{system_power, Channel, PowerAllocation};
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

    fn random_grid(rng: &mut ChaCha8Rng, m: usize) -> ChannelGrid<f64> {
        let mut indices = BTreeSet::new();
        while indices.len() < m {
            indices.insert(rng.random_range(1u32..40));
        }
        let entries: Vec<(u32, f64)> = indices
            .into_iter()
            .map(|idx| (idx, 10f64.powf(rng.random_range(-114.0..-100.0) / 10.0)))
            .collect();
        grid(&entries)
    }

    #[test]
    fn single_channel_instance() {
        let grid = grid(&[(23, 2e-11)]);
        let params = RadioParams::default();
        let report = exact_bruteforce(&grid, &params, 20.0).unwrap();
        assert_eq!(report.channels_used(), vec![23]);
        assert_eq!(report.active_front_ends(), 1);
        report.validate(20.0).unwrap();
    }

    #[test]
    fn equal_gains_adjacent_channels_stay_on_one_front_end() {
        // Splitting adjacent channels saves no span but doubles the fixed
        // analog power, so one front end must hold all three.
        let g = 2e-11;
        let grid = grid(&[(23, g), (24, g), (25, g)]);
        let params = RadioParams {
            num_front_ends: 2,
            ..RadioParams::default()
        };
        let report = exact_bruteforce(&grid, &params, 90.0).unwrap();
        assert_eq!(report.active_front_ends(), 1);
        assert_eq!(report.channels_used(), vec![23, 24, 25]);
    }

    #[test]
    fn budget_error_suggests_gapcut() {
        let entries: Vec<(u32, f64)> = (0..20).map(|i| (i, 1e-11)).collect();
        let grid = grid(&entries);
        let params = RadioParams::default();
        let err = exact_bruteforce(&grid, &params, 10.0).unwrap_err();
        match err {
            Error::Budget { hint, .. } => assert!(hint.contains("gapcut")),
            other => panic!("expected budget error, got {other}"),
        }
    }

    #[test]
    fn gapcut_keeps_adjacent_pair_together() {
        let grid = grid(&[(23, 2e-11), (24, 3e-11)]);
        let params = RadioParams::default();
        let report = exact_gapcut(&grid, &params, 30.0).unwrap();
        assert_eq!(report.active_front_ends(), 1);
    }

    #[test]
    fn gapcut_splits_across_wide_gap() {
        // {26, 48}: a cut saves 2 * 12.7 * 21 * 6 = 3200.4 mW of converter
        // power against 327.7 mW of extra analog power.
        let grid = grid(&[(26, 2e-11), (48, 2e-11)]);
        let params = RadioParams::default();
        let report = exact_gapcut(&grid, &params, 60.0).unwrap();
        assert_eq!(report.active_front_ends(), 2);
        assert_eq!(report.total_span_mhz(6.0), 12.0);
    }

    #[test]
    fn oracles_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let m = rng.random_range(1..7);
            let grid = random_grid(&mut rng, m);
            let params = RadioParams {
                num_front_ends: rng.random_range(1..4),
                ..RadioParams::default()
            };
            let r = rng.random_range(1.0..60.0 * m as f64);
            let bf = exact_bruteforce(&grid, &params, r).unwrap();
            let gc = exact_gapcut(&grid, &params, r).unwrap();
            assert!(
                (bf.breakdown.total_mw - gc.breakdown.total_mw).abs() <= 1e-9,
                "oracles disagree: {} vs {}",
                bf.breakdown.total_mw,
                gc.breakdown.total_mw
            );
        }
    }

    #[test]
    fn oracle_no_worse_than_greedy_or_random_assignments() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..20 {
            let m = rng.random_range(2..6);
            let grid = random_grid(&mut rng, m);
            let params = RadioParams {
                num_front_ends: 2,
                ..RadioParams::default()
            };
            let r = rng.random_range(1.0..40.0 * m as f64);
            let oracle = exact_bruteforce(&grid, &params, r).unwrap();
            let (greedy, _) = greedy_solve(&grid, &params, r).unwrap();
            assert!(greedy.breakdown.total_mw >= oracle.breakdown.total_mw - 1e-9);

            // sampled assignments with water-filled powers are never cheaper
            for _ in 0..10 {
                let mut sets = vec![BTreeSet::new(); 2];
                let mut any = false;
                for ch in grid.channels() {
                    match rng.random_range(0..3) {
                        0 => {}
                        fe => {
                            sets[fe - 1].insert(ch.index);
                            any = true;
                        }
                    }
                }
                if !any {
                    continue;
                }
                let assignment = Assignment::from_sets(sets).unwrap();
                let gains = grid.gains_for(assignment.assigned()).unwrap();
                let Ok(wf) = water_fill(&gains, r, 6.0, params.n0_mw_per_mhz, params.big_a_mw)
                else {
                    continue; // this assignment cannot carry the demand
                };
                let alloc = PowerAllocation::from_channel_powers(
                    &grid,
                    &assignment,
                    &wf.powers,
                    params.n0_mw_per_mhz,
                )
                .unwrap();
                let total = system_power(&grid, &assignment, &alloc, &params)
                    .unwrap()
                    .total_mw;
                assert!(total >= oracle.breakdown.total_mw - 1e-9);
            }
        }
    }
}
