//! Domain model: channel grids, radio parameters, channel-to-front-end
//! assignments, power allocations, and the system power objective.
//!
//! Units are fixed across the crate: power in mW, bandwidth in MHz, rate in
//! Mbps, noise spectral density in mW/MHz. With these, the per-channel rate
//! `W log2(1 + p g / (N0 W))` is dimensionally consistent and the default
//! circuit constants can be used verbatim.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::scalar::{nonnegative, positive, Scalar};

/// One usable channel: grid index, center frequency, and linear link gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel<T> {
    /// Grid channel number (e.g. a TV channel index). Grid numbers need not
    /// be consecutive; missing numbers are counted inside a spectrum span.
    pub index: u32,
    /// Center frequency in MHz.
    pub center_freq_mhz: T,
    /// Linear power gain between transmitter and receiver (> 0).
    pub gain: T,
}

/// Ordered set of available channels sharing a common channel width.
#[derive(Debug, Clone)]
pub struct ChannelGrid<T> {
    channels: Vec<Channel<T>>,
    width_mhz: T,
}

impl<T: Scalar> ChannelGrid<T> {
    /// Build a grid, sorting channels by index. Rejects empty grids,
    /// duplicate indices, non-positive widths, and non-positive gains.
    pub fn new(mut channels: Vec<Channel<T>>, width_mhz: T) -> Result<Self> {
        if !positive(width_mhz) {
            return Err(Error::validation(
                "channel width must be positive and finite",
            ));
        }
        if channels.is_empty() {
            return Err(Error::validation(
                "channel grid must contain at least one channel",
            ));
        }
        channels.sort_by_key(|c| c.index);
        for pair in channels.windows(2) {
            if pair[0].index == pair[1].index {
                return Err(Error::validation(format!(
                    "duplicate channel index {}",
                    pair[0].index
                )));
            }
        }
        for ch in &channels {
            if !positive(ch.gain) {
                return Err(Error::validation(format!(
                    "channel {}: gain must be positive and finite",
                    ch.index
                )));
            }
        }
        Ok(Self {
            channels,
            width_mhz,
        })
    }

    pub fn width_mhz(&self) -> T {
        self.width_mhz
    }

    /// Channels in ascending index order.
    pub fn channels(&self) -> &[Channel<T>] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn channel(&self, index: u32) -> Option<&Channel<T>> {
        self.channels
            .binary_search_by_key(&index, |c| c.index)
            .ok()
            .map(|pos| &self.channels[pos])
    }

    pub fn contains(&self, index: u32) -> bool {
        self.channel(index).is_some()
    }

    pub fn gain(&self, index: u32) -> Option<T> {
        self.channel(index).map(|c| c.gain)
    }

    /// `(index, gain)` pairs in index order, the input shape water-filling takes.
    pub fn gains(&self) -> Vec<(u32, T)> {
        self.channels.iter().map(|c| (c.index, c.gain)).collect()
    }

    /// `(index, gain)` pairs restricted to `indices`.
    ///
    /// Errors if any index is missing from the grid.
    pub fn gains_for(&self, indices: impl IntoIterator<Item = u32>) -> Result<Vec<(u32, T)>> {
        indices
            .into_iter()
            .map(|idx| {
                self.gain(idx)
                    .map(|g| (idx, g))
                    .ok_or_else(|| Error::validation(format!("channel {idx} not in grid")))
            })
            .collect()
    }
}

/// Circuit and RF parameters of the (identical) radio front ends.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioParams<T> {
    /// Fixed transmitter analog power per active front end (filters, mixers, ...), mW.
    pub alpha1_mw: T,
    /// DAC power slope versus sampling rate, mW per MSPS.
    pub alpha2_mw_per_msps: T,
    /// Fixed receiver analog power per active front end, mW.
    pub beta1_mw: T,
    /// ADC power slope versus sampling rate, mW per MSPS.
    pub beta2_mw_per_msps: T,
    /// Power amplifier factor: amplifier draw is `k_pa` times emitted power.
    pub k_pa: T,
    /// Noise spectral density, mW/MHz.
    pub n0_mw_per_mhz: T,
    /// Number of front ends available at each node.
    pub num_front_ends: usize,
    /// Per-channel transmit power cap, mW (large by default, so non-binding).
    pub big_a_mw: T,
}

impl<T: Scalar> Default for RadioParams<T> {
    /// Portable-device defaults: 45.4 / 7.2 / 282.3 / 5.5 mW circuit constants,
    /// k_pa = 10.67, thermal noise floor 10^(-11.4) mW/MHz (-174 dBm/Hz),
    /// two front ends, effectively uncapped per-channel power.
    fn default() -> Self {
        Self {
            alpha1_mw: T::cast(45.4),
            alpha2_mw_per_msps: T::cast(7.2),
            beta1_mw: T::cast(282.3),
            beta2_mw_per_msps: T::cast(5.5),
            k_pa: T::cast(10.67),
            n0_mw_per_mhz: T::cast(3.9810717055349695e-12),
            num_front_ends: 2,
            big_a_mw: T::cast(1e6),
        }
    }
}

impl<T: Scalar> RadioParams<T> {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            (self.alpha1_mw, "alpha1_mw"),
            (self.alpha2_mw_per_msps, "alpha2_mw_per_msps"),
            (self.beta1_mw, "beta1_mw"),
            (self.beta2_mw_per_msps, "beta2_mw_per_msps"),
        ];
        for (v, name) in nonneg {
            if !nonnegative(v) {
                return Err(Error::validation(format!(
                    "{name} must be nonnegative and finite"
                )));
            }
        }
        if !(self.k_pa.is_finite() && self.k_pa >= T::one()) {
            return Err(Error::validation("k_pa must be >= 1"));
        }
        if !positive(self.n0_mw_per_mhz) {
            return Err(Error::validation("n0_mw_per_mhz must be positive"));
        }
        if self.num_front_ends == 0 {
            return Err(Error::validation("num_front_ends must be >= 1"));
        }
        if !positive(self.big_a_mw) {
            return Err(Error::validation("big_a_mw must be positive"));
        }
        Ok(())
    }

    /// Fixed analog power charged once per active front end: `alpha1 + beta1`.
    pub fn fixed_analog_per_fe_mw(&self) -> T {
        self.alpha1_mw + self.beta1_mw
    }

    /// Converter power per MHz of spectrum span: `2 (alpha2 + beta2)`,
    /// from the sampling rate being twice the span.
    pub fn converter_mw_per_mhz(&self) -> T {
        T::cast(2.0) * (self.alpha2_mw_per_msps + self.beta2_mw_per_msps)
    }
}

/// Spectrum span of a channel-index set: the gap between the furthest edges
/// of the used channels, including unused grid slots in between.
///
/// Empty sets span zero; otherwise `width * (max - min + 1)`.
pub fn spectrum_span<T: Scalar>(indices: impl IntoIterator<Item = u32>, width_mhz: T) -> T {
    let mut bounds: Option<(u32, u32)> = None;
    for idx in indices {
        bounds = Some(match bounds {
            None => (idx, idx),
            Some((lo, hi)) => (lo.min(idx), hi.max(idx)),
        });
    }
    match bounds {
        None => T::zero(),
        Some((lo, hi)) => width_mhz * T::cast_u32(hi - lo + 1),
    }
}

/// Shannon rate of one channel in Mbps: `W log2(1 + p g / (N0 W))`.
pub fn channel_rate<T: Scalar>(power_mw: T, gain: T, width_mhz: T, n0_mw_per_mhz: T) -> T {
    width_mhz * (T::one() + power_mw * gain / (n0_mw_per_mhz * width_mhz)).log2()
}

/// Per-channel noise floor `N0 W / g` in mW: the power that lifts the
/// channel to unit SNR, and its water-filling cost.
pub fn noise_floor_mw<T: Scalar>(gain: T, width_mhz: T, n0_mw_per_mhz: T) -> T {
    n0_mw_per_mhz * width_mhz / gain
}

/// Inverse of [`channel_rate`]: the power that makes one channel carry
/// `rate_mbps`, i.e. `(2^(r/W) - 1) N0 W / g`.
pub fn power_for_rate<T: Scalar>(rate_mbps: T, gain: T, width_mhz: T, n0_mw_per_mhz: T) -> T {
    ((rate_mbps / width_mhz).exp2() - T::one()) * noise_floor_mw(gain, width_mhz, n0_mw_per_mhz)
}

/// Disjoint channel-index sets, one per front end.
///
/// A front end is active exactly when its set is nonempty; each channel may
/// be used by at most one front end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    sets: Vec<BTreeSet<u32>>,
}

impl Assignment {
    pub fn empty(num_front_ends: usize) -> Self {
        Self {
            sets: vec![BTreeSet::new(); num_front_ends],
        }
    }

    /// Build from explicit per-front-end sets, enforcing disjointness.
    pub fn from_sets(sets: Vec<BTreeSet<u32>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for set in &sets {
            for &idx in set {
                if !seen.insert(idx) {
                    return Err(Error::validation(format!(
                        "channel {idx} assigned to more than one front end"
                    )));
                }
            }
        }
        Ok(Self { sets })
    }

    /// Assign `channel` to `front_end`, rejecting double use.
    pub fn assign(&mut self, front_end: usize, channel: u32) -> Result<()> {
        if front_end >= self.sets.len() {
            return Err(Error::validation(format!(
                "front end {front_end} out of range"
            )));
        }
        if self.owner(channel).is_some() {
            return Err(Error::validation(format!(
                "channel {channel} assigned to more than one front end"
            )));
        }
        self.sets[front_end].insert(channel);
        Ok(())
    }

    pub fn num_front_ends(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, front_end: usize) -> &BTreeSet<u32> {
        &self.sets[front_end]
    }

    pub fn sets(&self) -> &[BTreeSet<u32>] {
        &self.sets
    }

    pub fn is_active(&self, front_end: usize) -> bool {
        !self.sets[front_end].is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.sets.iter().filter(|s| !s.is_empty()).count()
    }

    /// Front end owning `channel`, if any.
    pub fn owner(&self, channel: u32) -> Option<usize> {
        self.sets.iter().position(|s| s.contains(&channel))
    }

    /// Union of all assigned channels.
    pub fn assigned(&self) -> BTreeSet<u32> {
        self.sets.iter().flatten().copied().collect()
    }

    pub fn assigned_count(&self) -> usize {
        self.sets.iter().map(|s| s.len()).sum()
    }

    /// Span of one front end in MHz.
    pub fn span_mhz<T: Scalar>(&self, front_end: usize, width_mhz: T) -> T {
        spectrum_span(self.sets[front_end].iter().copied(), width_mhz)
    }

    /// Sum of spans across front ends in MHz.
    pub fn total_span_mhz<T: Scalar>(&self, width_mhz: T) -> T {
        (0..self.sets.len())
            .map(|fe| self.span_mhz(fe, width_mhz))
            .sum()
    }

    /// Check that every assigned index exists in `grid`.
    pub fn validate_against<T: Scalar>(&self, grid: &ChannelGrid<T>) -> Result<()> {
        for set in &self.sets {
            for &idx in set {
                if !grid.contains(idx) {
                    return Err(Error::validation(format!(
                        "assigned channel {idx} not in grid"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Transmit power and carried rate of one (front end, channel) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPower<T> {
    pub power_mw: T,
    pub flow_mbps: T,
}

/// Per-channel transmit powers and flows, keyed by (front end, channel).
#[derive(Debug, Clone, Default)]
pub struct PowerAllocation<T> {
    entries: BTreeMap<(usize, u32), ChannelPower<T>>,
}

impl<T: Scalar> PowerAllocation<T> {
    pub fn new() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Attach per-channel powers to the front ends that own the channels,
    /// deriving each flow from the rate formula. Channels missing from
    /// `powers` get zero power; powers on unassigned channels are rejected.
    pub fn from_channel_powers(
        grid: &ChannelGrid<T>,
        assignment: &Assignment,
        powers: &BTreeMap<u32, T>,
        n0_mw_per_mhz: T,
    ) -> Result<Self> {
        for (&idx, &p) in powers {
            if p > T::zero() && assignment.owner(idx).is_none() {
                return Err(Error::validation(format!(
                    "positive power on unassigned channel {idx}"
                )));
            }
        }
        let width = grid.width_mhz();
        let mut entries = BTreeMap::new();
        for (fe, set) in assignment.sets().iter().enumerate() {
            for &idx in set {
                let gain = grid
                    .gain(idx)
                    .ok_or_else(|| Error::validation(format!("channel {idx} not in grid")))?;
                let p = powers.get(&idx).copied().unwrap_or_else(T::zero);
                if !nonnegative(p) {
                    return Err(Error::validation(format!(
                        "channel {idx}: power must be nonnegative and finite"
                    )));
                }
                entries.insert(
                    (fe, idx),
                    ChannelPower {
                        power_mw: p,
                        flow_mbps: channel_rate(p, gain, width, n0_mw_per_mhz),
                    },
                );
            }
        }
        Ok(Self { entries })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, u32), &ChannelPower<T>)> {
        self.entries.iter()
    }

    pub fn power_mw(&self, front_end: usize, channel: u32) -> T {
        self.entries
            .get(&(front_end, channel))
            .map(|e| e.power_mw)
            .unwrap_or_else(T::zero)
    }

    pub fn total_power_mw(&self) -> T {
        self.entries.values().map(|e| e.power_mw).sum()
    }

    pub fn total_flow_mbps(&self) -> T {
        self.entries.values().map(|e| e.flow_mbps).sum()
    }
}

/// System power split into its objective terms, all in mW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBreakdown<T> {
    /// `k_pa` times total emitted power.
    pub amplifier_mw: T,
    /// `alpha1 + beta1` per active front end.
    pub fixed_analog_mw: T,
    /// `2 (alpha2 + beta2)` per MHz of span, summed over front ends.
    pub converter_mw: T,
    pub total_mw: T,
}

impl<T: Scalar> PowerBreakdown<T> {
    pub fn zero() -> Self {
        Self {
            amplifier_mw: T::zero(),
            fixed_analog_mw: T::zero(),
            converter_mw: T::zero(),
            total_mw: T::zero(),
        }
    }
}

/// Evaluate the system power objective for a consistent assignment/allocation
/// pair: amplifier draw plus fixed analog and converter power of the active
/// front ends. Inactive front ends contribute nothing.
///
/// Rejects positive power on unassigned channels, powers above the cap, and
/// assignments referencing channels outside `grid`.
pub fn system_power<T: Scalar>(
    grid: &ChannelGrid<T>,
    assignment: &Assignment,
    allocation: &PowerAllocation<T>,
    params: &RadioParams<T>,
) -> Result<PowerBreakdown<T>> {
    assignment.validate_against(grid)?;
    if assignment.num_front_ends() != params.num_front_ends {
        return Err(Error::validation(format!(
            "assignment has {} front ends, params expect {}",
            assignment.num_front_ends(),
            params.num_front_ends
        )));
    }
    let cap_slack = params.big_a_mw * (T::one() + T::cast(1e-9));
    for (&(fe, idx), entry) in allocation.iter() {
        let p = entry.power_mw;
        if !nonnegative(p) {
            return Err(Error::validation(format!(
                "front end {fe}, channel {idx}: power must be nonnegative and finite"
            )));
        }
        if p > cap_slack {
            return Err(Error::validation(format!(
                "front end {fe}, channel {idx}: power {p} exceeds cap {}",
                params.big_a_mw
            )));
        }
        if p > T::zero() && assignment.owner(idx) != Some(fe) {
            return Err(Error::validation(format!(
                "positive power on channel {idx} not assigned to front end {fe}"
            )));
        }
    }

    let amplifier_mw = params.k_pa * allocation.total_power_mw();
    let fixed_analog_mw =
        T::cast_usize(assignment.active_count()) * params.fixed_analog_per_fe_mw();
    let converter_mw = params.converter_mw_per_mhz() * assignment.total_span_mhz(grid.width_mhz());
    Ok(PowerBreakdown {
        amplifier_mw,
        fixed_analog_mw,
        converter_mw,
        total_mw: amplifier_mw + fixed_analog_mw + converter_mw,
    })
}

/// Solver identity, used in reports, sweep rows, and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Channel-by-channel greedy scheduler with a final optimal reallocation.
    Greedy,
    /// Multi-channel multi-radio baseline: contiguous runs per front end.
    McMr,
    /// Single front end spanning all worthwhile channels.
    NcOfdm,
    /// Exhaustive enumeration of channel-to-front-end maps.
    Exact,
    /// Exhaustive enumeration over channel subsets with gap-cut splitting.
    GapCut,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Greedy,
        Algorithm::McMr,
        Algorithm::NcOfdm,
        Algorithm::Exact,
        Algorithm::GapCut,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::McMr => "mcmr",
            Algorithm::NcOfdm => "ncofdm",
            Algorithm::Exact => "exact",
            Algorithm::GapCut => "gapcut",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "greedy" => Ok(Algorithm::Greedy),
            "mcmr" => Ok(Algorithm::McMr),
            "ncofdm" => Ok(Algorithm::NcOfdm),
            "exact" => Ok(Algorithm::Exact),
            "gapcut" => Ok(Algorithm::GapCut),
            other => Err(Error::validation(format!(
                "unknown algorithm '{other}' (expected greedy, mcmr, ncofdm, exact, or gapcut)"
            ))),
        }
    }
}

/// Solver metadata attached to a report.
#[derive(Debug, Clone)]
pub struct SolveMeta {
    pub algorithm: Algorithm,
    /// Loop iterations or candidates examined, depending on the solver.
    pub iterations: usize,
    pub wall_time: Duration,
}

/// A complete solution: who uses which channels, at what power, and what the
/// system power bill is.
#[derive(Debug, Clone)]
pub struct SolutionReport<T> {
    pub assignment: Assignment,
    pub allocation: PowerAllocation<T>,
    pub breakdown: PowerBreakdown<T>,
    pub meta: SolveMeta,
}

impl<T: Scalar> SolutionReport<T> {
    /// Assemble a report from per-channel powers, deriving flows and the
    /// power breakdown. All solvers return through here.
    pub fn build(
        grid: &ChannelGrid<T>,
        params: &RadioParams<T>,
        assignment: Assignment,
        powers: &BTreeMap<u32, T>,
        meta: SolveMeta,
    ) -> Result<Self> {
        let allocation =
            PowerAllocation::from_channel_powers(grid, &assignment, powers, params.n0_mw_per_mhz)?;
        let breakdown = system_power(grid, &assignment, &allocation, params)?;
        Ok(Self {
            assignment,
            allocation,
            breakdown,
            meta,
        })
    }

    /// Sum of per-channel flows in Mbps.
    pub fn achieved_rate_mbps(&self) -> T {
        self.allocation.total_flow_mbps()
    }

    pub fn active_front_ends(&self) -> usize {
        self.assignment.active_count()
    }

    /// All assigned channels in ascending index order.
    pub fn channels_used(&self) -> Vec<u32> {
        self.assignment.assigned().into_iter().collect()
    }

    pub fn total_span_mhz(&self, width_mhz: T) -> T {
        self.assignment.total_span_mhz(width_mhz)
    }

    /// Check the report invariants: breakdown parts sum to the total and the
    /// achieved rate covers `demand_mbps`, both within 1e-9 relative.
    pub fn validate(&self, demand_mbps: T) -> Result<()> {
        let b = &self.breakdown;
        let parts = b.amplifier_mw + b.fixed_analog_mw + b.converter_mw;
        let tol = T::cast(1e-9);
        if (parts - b.total_mw).abs() > tol * b.total_mw.max(T::one()) {
            return Err(Error::validation(format!(
                "breakdown parts {parts} do not sum to total {}",
                b.total_mw
            )));
        }
        let rate = self.achieved_rate_mbps();
        if rate < demand_mbps * (T::one() - tol) {
            return Err(Error::validation(format!(
                "achieved rate {rate} Mbps below demand {demand_mbps} Mbps"
            )));
        }
        Ok(())
    }
}
