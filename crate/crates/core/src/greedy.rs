//! Greedy scheduler: seed with the best-gain channel, then repeatedly add the
//! (channel, front end) pair that minimizes total system power under an
//! equal-flow power estimate, stopping when no addition helps. The final
//! schedule gets an optimal water-filling reallocation.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{Algorithm, Assignment, ChannelGrid, RadioParams, SolutionReport, SolveMeta};
use crate::scalar::{positive, Scalar};
use crate::waterfill::{equal_flow_power, water_fill};

/// One loop iteration of the greedy scheduler: the best candidate found and
/// whether it was taken.
#[derive(Debug, Clone, Copy)]
pub struct GreedyStep<T> {
    pub channel: u32,
    pub front_end: usize,
    pub trial_total_mw: T,
    pub accepted: bool,
}

/// Trace of a greedy run, for inspection and complexity accounting.
#[derive(Debug, Clone)]
pub struct GreedyTrace<T> {
    /// Seed channel picked by the initial best-gain rule.
    pub seed_channel: u32,
    /// System power of the seed schedule under the equal-flow estimate.
    pub seed_total_mw: T,
    /// Best candidate per loop iteration, in order.
    pub steps: Vec<GreedyStep<T>>,
    /// Total (channel, front end) pairs evaluated across all iterations.
    pub candidate_evaluations: usize,
}

impl<T> GreedyTrace<T> {
    /// Loop iterations run (accepted and the final rejected one, if any).
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    /// Iterations that actually extended the schedule.
    pub fn accepted(&self) -> usize {
        self.steps.iter().filter(|s| s.accepted).count()
    }
}

/// System power of `assignment` under the equal-flow power estimate: the
/// quantity the greedy loop compares between iterations.
fn equal_flow_objective<T: Scalar>(
    grid: &ChannelGrid<T>,
    assignment: &Assignment,
    params: &RadioParams<T>,
    demand_mbps: T,
) -> T {
    let width = grid.width_mhz();
    let assigned = grid
        .gains_for(assignment.assigned())
        .expect("assigned channels come from the grid");
    let transmit: T = equal_flow_power(&assigned, demand_mbps, width, params.n0_mw_per_mhz)
        .values()
        .copied()
        .sum();
    let circuit = T::cast_usize(assignment.active_count()) * params.fixed_analog_per_fe_mw()
        + params.converter_mw_per_mhz() * assignment.total_span_mhz(width);
    params.k_pa * transmit + circuit
}

/// Trial system power of adding unassigned `channel` to `front_end`, with
/// equal flow shared across all scheduled channels including the new one.
/// Pure: the current assignment is not modified.
pub fn evaluate_candidate<T: Scalar>(
    grid: &ChannelGrid<T>,
    assignment: &Assignment,
    channel: u32,
    front_end: usize,
    params: &RadioParams<T>,
    demand_mbps: T,
) -> T {
    debug_assert!(
        assignment.owner(channel).is_none(),
        "candidate already assigned"
    );
    debug_assert!(front_end < assignment.num_front_ends());

    let width = grid.width_mhz();
    let mut gains = grid
        .gains_for(assignment.assigned())
        .expect("assigned channels come from the grid");
    gains.push((
        channel,
        grid.gain(channel).expect("candidate channel in grid"),
    ));

    let transmit: T = equal_flow_power(&gains, demand_mbps, width, params.n0_mw_per_mhz)
        .values()
        .copied()
        .sum();

    let mut fixed = T::zero();
    let mut span = T::zero();
    for fe in 0..assignment.num_front_ends() {
        let set = assignment.set(fe);
        let active = !set.is_empty() || fe == front_end;
        if active {
            fixed = fixed + params.fixed_analog_per_fe_mw();
        }
        let fe_span = if fe == front_end {
            let lo = set.first().copied().unwrap_or(channel).min(channel);
            let hi = set.last().copied().unwrap_or(channel).max(channel);
            width * T::cast_u32(hi - lo + 1)
        } else {
            assignment.span_mhz(fe, width)
        };
        span = span + fe_span;
    }
    params.k_pa * transmit + fixed + params.converter_mw_per_mhz() * span
}

/// Run the greedy scheduler and return the solution with its trace.
///
/// The returned report carries water-filled (optimal) powers for the greedy
/// schedule; the trace records the equal-flow trial totals that drove the
/// channel selection.
pub fn greedy_solve<T: Scalar>(
    grid: &ChannelGrid<T>,
    params: &RadioParams<T>,
    demand_mbps: T,
) -> Result<(SolutionReport<T>, GreedyTrace<T>)> {
    let start = Instant::now();
    params.validate()?;
    if !positive(demand_mbps) {
        return Err(Error::validation("demand must be positive and finite"));
    }

    // Seed: best-gain channel on the first front end, lowest index on ties.
    let seed_channel = grid
        .channels()
        .iter()
        .max_by(|a, b| {
            a.gain
                .partial_cmp(&b.gain)
                .unwrap()
                .then(b.index.cmp(&a.index))
        })
        .expect("grid is nonempty")
        .index;
    let mut assignment = Assignment::empty(params.num_front_ends);
    assignment.assign(0, seed_channel)?;
    let mut incumbent = equal_flow_objective(grid, &assignment, params, demand_mbps);

    let mut trace = GreedyTrace {
        seed_channel,
        seed_total_mw: incumbent,
        steps: Vec::new(),
        candidate_evaluations: 0,
    };

    loop {
        let mut best: Option<(T, u32, usize)> = None;
        for ch in grid.channels() {
            if assignment.owner(ch.index).is_some() {
                continue;
            }
            for fe in 0..params.num_front_ends {
                let trial =
                    evaluate_candidate(grid, &assignment, ch.index, fe, params, demand_mbps);
                trace.candidate_evaluations += 1;
                // Strict < keeps the first candidate on ties, and the scan
                // order makes that the smallest (channel, front end) pair.
                if best.is_none_or(|(b, _, _)| trial < b) {
                    best = Some((trial, ch.index, fe));
                }
            }
        }
        let Some((trial, channel, front_end)) = best else {
            break; // every channel scheduled
        };
        let accepted = trial <= incumbent;
        trace.steps.push(GreedyStep {
            channel,
            front_end,
            trial_total_mw: trial,
            accepted,
        });
        if !accepted {
            break;
        }
        assignment.assign(front_end, channel)?;
        incumbent = trial;
    }

    // Optimal reallocation over the chosen schedule.
    let gains = grid.gains_for(assignment.assigned())?;
    let wf = water_fill(
        &gains,
        demand_mbps,
        grid.width_mhz(),
        params.n0_mw_per_mhz,
        params.big_a_mw,
    )?;
    let meta = SolveMeta {
        algorithm: Algorithm::Greedy,
        iterations: trace.iterations(),
        wall_time: start.elapsed(),
    };
    let report = SolutionReport::build(grid, params, assignment, &wf.powers, meta)?;
    Ok((report, trace))
}
