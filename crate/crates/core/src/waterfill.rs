//! Water-filling: minimum total transmit power that carries a target rate
//! over a fixed set of channels.
//!
//! The uncapped problem has a closed-form solution. Sort channels by their
//! noise floor `c_m = N0 W / g_m`; for an active-set size `k` over the `k`
//! cheapest channels the common water level is
//! `mu(k) = (2^(r/W) * prod c_m)^(1/k)`, and the optimum takes the largest
//! `k` with `mu(k) > c_k`. Every active channel then gets `p_m = mu - c_m`,
//! which is the equal-water-level KKT point of the convex program.
//!
//! A per-channel cap is handled by clamping channels that the closed form
//! pushes above the cap and re-solving for the residual rate on the rest.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{channel_rate, noise_floor_mw};
use crate::scalar::{nonnegative, positive, Scalar};

/// Outcome of a water-filling solve.
#[derive(Debug, Clone)]
pub struct WaterFillResult<T> {
    /// Power per channel in mW; zero on channels below the water level.
    pub powers: BTreeMap<u32, T>,
    /// Common water level mu in mW.
    pub water_level_mw: T,
    /// Channels carrying positive power.
    pub active_set: BTreeSet<u32>,
    pub total_power_mw: T,
    pub achieved_rate_mbps: T,
    /// True when the per-channel cap limited at least one channel.
    pub cap_bound: bool,
}

/// Closed form over `costs` (sorted ascending): picks the largest active-set
/// size whose water level clears the costliest active channel. Returns the
/// active count and the water level; zero rate yields an empty active set
/// with the level parked at the cheapest channel's floor.
fn closed_form<T: Scalar>(costs: &[(T, u32)], rate_mbps: T, width_mhz: T) -> (usize, T) {
    let rate_term = rate_mbps * T::cast(std::f64::consts::LN_2) / width_mhz;
    let mut ln_sum = T::zero();
    let mut best: Option<(usize, T)> = None;
    for (i, &(c, _)) in costs.iter().enumerate() {
        ln_sum = ln_sum + c.ln();
        let ln_mu = (rate_term + ln_sum) / T::cast_usize(i + 1);
        if ln_mu > c.ln() {
            best = Some((i + 1, ln_mu));
        }
    }
    match best {
        Some((k, ln_mu)) => (k, ln_mu.exp()),
        None => (0, costs[0].0),
    }
}

/// Minimize total transmit power over `gains` subject to a sum-rate demand
/// and a per-channel cap.
///
/// Returns the global optimum of the convex program. Infeasible demands
/// (every channel capped and the rate still short) produce an error naming
/// the shortfall.
pub fn water_fill<T: Scalar>(
    gains: &[(u32, T)],
    demand_mbps: T,
    width_mhz: T,
    n0_mw_per_mhz: T,
    cap_mw: T,
) -> Result<WaterFillResult<T>> {
    if gains.is_empty() {
        return Err(Error::validation("water-fill needs at least one channel"));
    }
    if !nonnegative(demand_mbps) {
        return Err(Error::validation("demand must be nonnegative and finite"));
    }
    if !positive(width_mhz) {
        return Err(Error::validation("channel width must be positive"));
    }
    if !positive(n0_mw_per_mhz) {
        return Err(Error::validation("noise density must be positive"));
    }
    // infinity is a valid cap, so no finiteness requirement here
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(cap_mw > T::zero()) {
        return Err(Error::validation("power cap must be positive"));
    }
    for &(idx, g) in gains {
        if !positive(g) {
            return Err(Error::validation(format!(
                "channel {idx}: gain must be positive and finite"
            )));
        }
    }

    // Noise floors ascending; ties broken by channel index for determinism.
    let mut free: Vec<(T, u32)> = gains
        .iter()
        .map(|&(idx, g)| (noise_floor_mw(g, width_mhz, n0_mw_per_mhz), idx))
        .collect();
    free.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    {
        let mut seen = BTreeSet::new();
        for &(_, idx) in &free {
            if !seen.insert(idx) {
                return Err(Error::validation(format!("duplicate channel index {idx}")));
            }
        }
    }

    let mut clamped: Vec<(T, u32)> = Vec::new();
    let mut powers: BTreeMap<u32, T> = gains.iter().map(|&(idx, _)| (idx, T::zero())).collect();
    let water_level_mw;
    loop {
        let clamped_rate: T = clamped
            .iter()
            .map(|&(c, _)| width_mhz * ((c + cap_mw) / c).log2())
            .sum();
        let residual = (demand_mbps - clamped_rate).max(T::zero());

        if free.is_empty() {
            let shortfall = demand_mbps - clamped_rate;
            if shortfall > T::cast(1e-9) * demand_mbps.max(T::one()) {
                return Err(Error::Infeasible {
                    demand_mbps: demand_mbps.to_f64().unwrap_or(f64::NAN),
                    achieved_mbps: clamped_rate.to_f64().unwrap_or(f64::NAN),
                    shortfall_mbps: shortfall.to_f64().unwrap_or(f64::NAN),
                    cap_mw: cap_mw.to_f64().unwrap_or(f64::NAN),
                });
            }
            // Demand met exactly at the caps.
            water_level_mw = clamped
                .iter()
                .map(|&(c, _)| c + cap_mw)
                .fold(T::zero(), T::max);
            break;
        }

        let (k, mu) = closed_form(&free, residual, width_mhz);
        // Cap violators have the smallest floors, so they form a prefix.
        let over = free[..k].iter().filter(|&&(c, _)| mu - c > cap_mw).count();
        if over == 0 {
            for &(c, idx) in &free[..k] {
                powers.insert(idx, mu - c);
            }
            water_level_mw = mu;
            break;
        }
        for (c, idx) in free.drain(..over) {
            powers.insert(idx, cap_mw);
            clamped.push((c, idx));
        }
    }

    let gain_of: BTreeMap<u32, T> = gains.iter().copied().collect();
    let total_power_mw = powers.values().copied().sum();
    let achieved_rate_mbps = powers
        .iter()
        .map(|(&idx, &p)| channel_rate(p, gain_of[&idx], width_mhz, n0_mw_per_mhz))
        .sum();
    let active_set = powers
        .iter()
        .filter(|&(_, &p)| p > T::zero())
        .map(|(&idx, _)| idx)
        .collect();
    Ok(WaterFillResult {
        powers,
        water_level_mw,
        active_set,
        total_power_mw,
        achieved_rate_mbps,
        cap_bound: !clamped.is_empty(),
    })
}

/// Equal-flow heuristic: split the demand evenly across the set and invert
/// the rate formula per channel. Always feasible, never below the
/// water-filling optimum in total power.
pub fn equal_flow_power<T: Scalar>(
    gains: &[(u32, T)],
    demand_mbps: T,
    width_mhz: T,
    n0_mw_per_mhz: T,
) -> BTreeMap<u32, T> {
    if gains.is_empty() {
        return BTreeMap::new();
    }
    let flow = demand_mbps / T::cast_usize(gains.len());
    let factor = (flow / width_mhz).exp2() - T::one();
    gains
        .iter()
        .map(|&(idx, g)| (idx, factor * noise_floor_mw(g, width_mhz, n0_mw_per_mhz)))
        .collect()
}
