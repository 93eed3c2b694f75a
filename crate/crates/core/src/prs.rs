//! PRS sequence generation, comb mapping, and slot scheduling.
//!
//! The slot-level schedule gives each gNB its own resource-set offset so
//! transmissions never overlap; inside a slot the PRS occupies `num_symbols`
//! consecutive OFDM symbols with a comb-`K` subcarrier pattern whose offset
//! staggers from symbol to symbol. Sequences are length-31 Gold codes mapped
//! to QPSK, seeded from (sequence id, slot, symbol) the way TS 38.211 §7.4.1.7
//! does, so the exact `c_init` packing is pinned here and testable.

use crate::model::GnbDeployment;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// OFDM symbols per slot (normal cyclic prefix).
pub const SYMBOLS_PER_SLOT: usize = 14;
/// Subcarriers per physical resource block.
pub const SUBCARRIERS_PER_PRB: usize = 12;

/// Per-symbol subcarrier offset patterns, indexed by symbol within the PRS
/// allocation. TS 38.211 Table 7.4.1.7.3-1.
fn stagger_pattern(comb_size: usize) -> Option<&'static [usize; 12]> {
    match comb_size {
        2 => Some(&[0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1]),
        4 => Some(&[0, 2, 1, 3, 0, 2, 1, 3, 0, 2, 1, 3]),
        6 => Some(&[0, 3, 1, 4, 2, 5, 0, 3, 1, 4, 2, 5]),
        12 => Some(&[0, 6, 3, 9, 1, 7, 4, 10, 2, 8, 5, 11]),
        _ => None,
    }
}

/// Slot- and RE-level PRS allocation shared by all gNBs of a deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrsConfig {
    /// Periodicity of the resource set, slots.
    pub resource_set_period: usize,
    /// Slot offset of the whole resource set within the period.
    pub resource_set_offset: usize,
    /// Additional slot offset of each gNB's resource, one entry per gNB.
    pub resource_offset_per_gnb: Vec<usize>,
    /// Number of repeated slots per resource within one period.
    pub resource_repetition: usize,
    /// Slot gap between consecutive repetitions.
    pub resource_time_gap: usize,
    /// First OFDM symbol of the PRS inside its slot, 0..=13.
    pub symbol_start: usize,
    /// Number of consecutive PRS symbols.
    pub num_symbols: usize,
    /// First PRB of the PRS allocation.
    pub rb_offset: usize,
    /// Width of the PRS allocation in PRBs.
    pub num_rbs: usize,
    /// Comb size: one of {2, 4, 6, 12}.
    pub comb_size: usize,
    /// Comb subcarrier offset of each gNB, entries < comb_size.
    pub comb_offset_per_gnb: Vec<usize>,
    /// Gold sequence id of each gNB.
    pub sequence_id_per_gnb: Vec<u32>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrsError {
    #[error("gNB {gnb_a} and gNB {gnb_b} both schedule PRS in slot {slot}")]
    ConfigConflict {
        gnb_a: usize,
        gnb_b: usize,
        slot: usize,
    },
    #[error("slot {slot} is not in gNB {gnb_id}'s schedule")]
    SlotNotScheduled { gnb_id: usize, slot: usize },
    #[error("comb size {0} has no defined stagger pattern (supported: 2, 4, 6, 12)")]
    UnsupportedCombSize(usize),
    #[error("comb offset {offset} for gNB {gnb_id} must be < comb size {comb_size}")]
    CombOffsetOutOfRange {
        gnb_id: usize,
        offset: usize,
        comb_size: usize,
    },
    #[error("{num_symbols} symbols from symbol {symbol_start} exceed the 14-symbol slot")]
    SymbolRangeExceeded {
        symbol_start: usize,
        num_symbols: usize,
    },
    #[error("{num_rbs} PRBs from PRB {rb_offset} exceed the carrier width of {n_prb} PRBs")]
    RbRangeExceeded {
        rb_offset: usize,
        num_rbs: usize,
        n_prb: usize,
    },
    #[error("per-gNB list has {got} entries, deployment has {expected} gNBs")]
    PerGnbLengthMismatch { expected: usize, got: usize },
    #[error("resource set period must be positive")]
    ZeroPeriod,
    #[error("PRS allocation must span at least one symbol and one PRB")]
    EmptyAllocation,
}

impl PrsConfig {
    /// Validates the configuration against a deployment.
    pub fn validate(&self, deployment: &GnbDeployment) -> Result<(), PrsError> {
        let n = deployment.n_gnbs();
        for (len, _name) in [
            (self.resource_offset_per_gnb.len(), "resource_offset"),
            (self.comb_offset_per_gnb.len(), "comb_offset"),
            (self.sequence_id_per_gnb.len(), "sequence_id"),
        ] {
            if len != n {
                return Err(PrsError::PerGnbLengthMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        if self.resource_set_period == 0 {
            return Err(PrsError::ZeroPeriod);
        }
        if self.num_symbols == 0 || self.num_rbs == 0 {
            return Err(PrsError::EmptyAllocation);
        }
        if self.symbol_start + self.num_symbols > SYMBOLS_PER_SLOT {
            return Err(PrsError::SymbolRangeExceeded {
                symbol_start: self.symbol_start,
                num_symbols: self.num_symbols,
            });
        }
        if self.rb_offset + self.num_rbs > deployment.n_prb {
            return Err(PrsError::RbRangeExceeded {
                rb_offset: self.rb_offset,
                num_rbs: self.num_rbs,
                n_prb: deployment.n_prb,
            });
        }
        if stagger_pattern(self.comb_size).is_none() {
            return Err(PrsError::UnsupportedCombSize(self.comb_size));
        }
        for (i, &off) in self.comb_offset_per_gnb.iter().enumerate() {
            if off >= self.comb_size {
                return Err(PrsError::CombOffsetOutOfRange {
                    gnb_id: i + 1,
                    offset: off,
                    comb_size: self.comb_size,
                });
            }
        }
        build_schedule(self, n, deployment.scs_hz).map(|_| ())
    }

    /// Occupied subcarriers per PRS symbol: `12 * num_rbs / comb_size`.
    pub fn occupied_per_symbol(&self) -> usize {
        SUBCARRIERS_PER_PRB * self.num_rbs / self.comb_size
    }

    /// Absolute occupied subcarrier indices for gNB `gnb_id` in PRS symbol
    /// `sym_rel` (relative to `symbol_start`).
    pub fn occupied_subcarriers(&self, gnb_id: usize, sym_rel: usize) -> Vec<usize> {
        let pattern = stagger_pattern(self.comb_size).expect("validated comb size");
        let off = (self.comb_offset_per_gnb[gnb_id - 1] + pattern[sym_rel % 12]) % self.comb_size;
        let base = self.rb_offset * SUBCARRIERS_PER_PRB;
        (0..self.occupied_per_symbol())
            .map(|m| base + m * self.comb_size + off)
            .collect()
    }
}

/// Scheduled slots per gNB within one resource-set period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrsSchedule {
    /// `per_gnb[j]` lists the (frame, slot-in-frame) pairs of gNB `j+1`.
    pub per_gnb: Vec<Vec<(usize, usize)>>,
    /// Slots per frame for the configured numerology.
    pub slots_per_frame: usize,
    period: usize,
}

impl PrsSchedule {
    /// Absolute slot indices (within the period) for a 1-based gNB id.
    pub fn slots_of(&self, gnb_id: usize) -> Vec<usize> {
        self.per_gnb[gnb_id - 1]
            .iter()
            .map(|&(frame, slot)| frame * self.slots_per_frame + slot)
            .collect()
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn contains(&self, gnb_id: usize, slot_index: usize) -> bool {
        self.slots_of(gnb_id).contains(&(slot_index % self.period))
    }
}

/// Slots per 10 ms frame for a given subcarrier spacing (10 * 2^mu).
pub fn slots_per_frame(scs_hz: f64) -> usize {
    let mu = (scs_hz / 15e3).log2().round() as i32;
    10 * (1usize << mu.max(0) as u32)
}

/// Slot duration in seconds for a given subcarrier spacing.
pub fn slot_duration_s(scs_hz: f64) -> f64 {
    10e-3 / slots_per_frame(scs_hz) as f64
}

/// Expands the slot-level schedule: gNB `j` transmits in slots
/// `(set_offset + offset_j + r * time_gap) mod period` for each repetition
/// `r`. Fails if any two gNBs resolve to a common slot. `scs_hz` fixes the
/// numerology for the (frame, slot) labeling.
pub fn build_schedule(
    config: &PrsConfig,
    n_gnbs: usize,
    scs_hz: f64,
) -> Result<PrsSchedule, PrsError> {
    assert_eq!(
        config.resource_offset_per_gnb.len(),
        n_gnbs,
        "resource offset list must have one entry per gNB"
    );
    let period = config.resource_set_period;
    let spf = slots_per_frame(scs_hz);
    let mut per_gnb = Vec::with_capacity(n_gnbs);
    let mut owner: Vec<Option<usize>> = vec![None; period];
    for (j, &offset) in config.resource_offset_per_gnb.iter().enumerate() {
        let mut slots = Vec::with_capacity(config.resource_repetition.max(1));
        for rep in 0..config.resource_repetition.max(1) {
            let slot =
                (config.resource_set_offset + offset + rep * config.resource_time_gap) % period;
            if let Some(prev) = owner[slot] {
                return Err(PrsError::ConfigConflict {
                    gnb_a: prev + 1,
                    gnb_b: j + 1,
                    slot,
                });
            }
            owner[slot] = Some(j);
            slots.push((slot / spf, slot % spf));
        }
        per_gnb.push(slots);
    }
    Ok(PrsSchedule {
        per_gnb,
        slots_per_frame: spf,
        period,
    })
}

/// One slot's worth of frequency-domain resource elements.
///
/// Values are indexed `(symbol, subcarrier)` over `SYMBOLS_PER_SLOT` symbols
/// and `12 * n_prb` subcarriers. Unoccupied REs of a transmit grid are
/// exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    values: Vec<Complex64>,
    n_symbols: usize,
    n_subcarriers: usize,
    /// Subcarrier spacing, Hz.
    pub scs_hz: f64,
    /// Absolute slot index this grid was generated for.
    pub slot: usize,
}

impl ResourceGrid {
    pub fn zeroed(n_symbols: usize, n_subcarriers: usize, scs_hz: f64, slot: usize) -> Self {
        assert!(n_symbols > 0 && n_subcarriers > 0, "grid must be non-empty");
        Self {
            values: vec![Complex64::new(0.0, 0.0); n_symbols * n_subcarriers],
            n_symbols,
            n_subcarriers,
            scs_hz,
            slot,
        }
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    /// Occupied bandwidth of the full grid: subcarriers times spacing.
    pub fn bandwidth_hz(&self) -> f64 {
        self.n_subcarriers as f64 * self.scs_hz
    }

    pub fn get(&self, symbol: usize, subcarrier: usize) -> Complex64 {
        self.values[symbol * self.n_subcarriers + subcarrier]
    }

    pub fn set(&mut self, symbol: usize, subcarrier: usize, v: Complex64) {
        self.values[symbol * self.n_subcarriers + subcarrier] = v;
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// (symbol, subcarrier) pairs of all nonzero REs.
    pub fn occupied(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.n_symbols {
            for k in 0..self.n_subcarriers {
                if self.get(s, k).norm_sqr() > 0.0 {
                    out.push((s, k));
                }
            }
        }
        out
    }
}

/// `c_init` for the PRS generator of TS 38.211 §7.4.1.7.2, with 14 symbols
/// per slot. Pinned here so tests can assert the exact packing.
pub fn prs_c_init(sequence_id: u32, slot: usize, symbol: usize) -> u32 {
    let n_id = sequence_id as u64;
    let high = n_id >> 10;
    let low = n_id & 0x3FF;
    let c = (1u64 << 22) * high
        + (1u64 << 10) * ((SYMBOLS_PER_SLOT as u64) * slot as u64 + symbol as u64 + 1) * (2 * low + 1)
        + low;
    (c % (1u64 << 31)) as u32
}

/// Length-31 Gold sequence c(n) with the standard Nc = 1600 burn-in.
fn gold_bits(c_init: u32, len: usize) -> Vec<u8> {
    const NC: usize = 1600;
    let total = NC + len;
    let mut x1 = vec![0u8; total + 31];
    let mut x2 = vec![0u8; total + 31];
    x1[0] = 1;
    for (i, bit) in x2.iter_mut().enumerate().take(31) {
        *bit = ((c_init >> i) & 1) as u8;
    }
    for n in 0..total {
        x1[n + 31] = x1[n + 3] ^ x1[n];
        x2[n + 31] = x2[n + 3] ^ x2[n + 2] ^ x2[n + 1] ^ x2[n];
    }
    (0..len).map(|n| x1[NC + n] ^ x2[NC + n]).collect()
}

/// Generates `length` QPSK PRS symbols for one (sequence id, slot, symbol).
///
/// r(m) = (1 − 2c(2m))/√2 + j(1 − 2c(2m+1))/√2, unit magnitude, and a pure
/// function of its arguments.
pub fn generate_prs_sequence(
    sequence_id: u32,
    slot: usize,
    symbol: usize,
    length: usize,
) -> Vec<Complex64> {
    assert!(length > 0, "sequence length must be positive");
    let bits = gold_bits(prs_c_init(sequence_id, slot, symbol), 2 * length);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..length)
        .map(|m| {
            Complex64::new(
                scale * (1.0 - 2.0 * bits[2 * m] as f64),
                scale * (1.0 - 2.0 * bits[2 * m + 1] as f64),
            )
        })
        .collect()
}

/// Maps gNB `gnb_id`'s PRS into a fresh resource grid for `slot`.
///
/// Occupied subcarriers follow the comb pattern with the per-symbol stagger
/// offset; everything else stays zero.
pub fn map_prs_to_grid(
    config: &PrsConfig,
    deployment: &GnbDeployment,
    gnb_id: usize,
    slot: usize,
) -> Result<ResourceGrid, PrsError> {
    let schedule = build_schedule(config, deployment.n_gnbs(), deployment.scs_hz)?;
    if !schedule.contains(gnb_id, slot) {
        return Err(PrsError::SlotNotScheduled { gnb_id, slot });
    }
    let n_sc = deployment.n_prb * SUBCARRIERS_PER_PRB;
    let mut grid = ResourceGrid::zeroed(SYMBOLS_PER_SLOT, n_sc, deployment.scs_hz, slot);
    let seq_id = config.sequence_id_per_gnb[gnb_id - 1];
    let slot_in_frame = slot % schedule.slots_per_frame;
    for sym_rel in 0..config.num_symbols {
        let symbol = config.symbol_start + sym_rel;
        let subcarriers = config.occupied_subcarriers(gnb_id, sym_rel);
        let seq = generate_prs_sequence(seq_id, slot_in_frame, symbol, subcarriers.len());
        for (m, &k) in subcarriers.iter().enumerate() {
            grid.set(symbol, k, seq[m]);
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Position2D;

    fn deployment() -> GnbDeployment {
        GnbDeployment {
            positions: vec![
                Position2D::new(0.0, 0.0),
                Position2D::new(60.0, 0.0),
                Position2D::new(30.0, 52.0),
            ],
            carrier_hz: 3.6e9,
            scs_hz: 30e3,
            n_prb: 106,
        }
    }

    fn config() -> PrsConfig {
        PrsConfig {
            resource_set_period: 20,
            resource_set_offset: 2,
            resource_offset_per_gnb: vec![1, 2, 3],
            resource_repetition: 1,
            resource_time_gap: 1,
            symbol_start: 0,
            num_symbols: 4,
            rb_offset: 0,
            num_rbs: 106,
            comb_size: 2,
            comb_offset_per_gnb: vec![0, 1, 0],
            sequence_id_per_gnb: vec![0, 1, 2],
        }
    }

    #[test]
    fn schedule_matches_offsets_one_two_three() {
        let schedule = build_schedule(&config(), 3, 30e3).unwrap();
        assert_eq!(schedule.slots_of(1), vec![3]);
        assert_eq!(schedule.slots_of(2), vec![4]);
        assert_eq!(schedule.slots_of(3), vec![5]);
        assert_eq!(schedule.per_gnb[0], vec![(0, 3)]);
    }

    #[test]
    fn schedule_collision_is_an_error() {
        let mut cfg = config();
        cfg.resource_offset_per_gnb = vec![1, 1, 3];
        match build_schedule(&cfg, 3, 30e3) {
            Err(PrsError::ConfigConflict { gnb_a, gnb_b, slot }) => {
                assert_eq!((gnb_a, gnb_b, slot), (1, 2, 3));
            }
            other => panic!("expected ConfigConflict, got {other:?}"),
        }
    }

    #[test]
    fn schedule_with_repetitions() {
        let mut cfg = config();
        cfg.resource_offset_per_gnb = vec![0, 5, 10];
        cfg.resource_repetition = 2;
        cfg.resource_time_gap = 1;
        let schedule = build_schedule(&cfg, 3, 30e3).unwrap();
        assert_eq!(schedule.slots_of(1), vec![2, 3]);
        assert_eq!(schedule.slots_of(2), vec![7, 8]);
        assert_eq!(schedule.slots_of(3), vec![12, 13]);
    }

    #[test]
    fn sequence_is_unit_magnitude_and_deterministic() {
        let seq = generate_prs_sequence(7, 3, 2, 512);
        assert_eq!(seq.len(), 512);
        for v in &seq {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(seq, generate_prs_sequence(7, 3, 2, 512));
        assert_ne!(seq, generate_prs_sequence(8, 3, 2, 512));
    }

    #[test]
    fn c_init_packing_is_pinned() {
        // id 0, slot 0, symbol 0: 2^10 * (0*14 + 0 + 1) * 1 = 1024
        assert_eq!(prs_c_init(0, 0, 0), 1024);
        // id 1, slot 0, symbol 0: 2^10 * 1 * 3 + 1 = 3073
        assert_eq!(prs_c_init(1, 0, 0), 3073);
        // id 2048, slot 1, symbol 2: 2^22*2 + 2^10*(14+3)*(2*0+1) + 0
        assert_eq!(prs_c_init(2048, 1, 2), (1 << 23) + 1024 * 17);
    }

    /// Brute-force circular correlation magnitude, normalized by length.
    fn corr_peak(a: &[Complex64], b: &[Complex64], skip_zero_lag: bool) -> f64 {
        let n = a.len();
        let mut peak: f64 = 0.0;
        for lag in 0..n {
            if skip_zero_lag && lag == 0 {
                continue;
            }
            let sum: Complex64 = (0..n).map(|i| a[i] * b[(i + lag) % n].conj()).sum();
            peak = peak.max(sum.norm());
        }
        peak / n as f64
    }

    #[test]
    fn cross_correlation_between_ids_is_low() {
        let a = generate_prs_sequence(0, 0, 0, 4096);
        let b = generate_prs_sequence(1, 0, 0, 4096);
        // autocorrelation peak of a unit-magnitude sequence is 1 after
        // normalization; require the cross peak an order of magnitude down
        let cross = corr_peak(&a, &b, false);
        assert!(cross < 0.1, "cross-correlation peak {cross} too high");
    }

    #[test]
    fn autocorrelation_sidelobes_are_low() {
        let a = generate_prs_sequence(3, 1, 0, 1024);
        let side = corr_peak(&a, &a, true);
        assert!(side < 0.2, "autocorrelation sidelobe {side} too high");
    }

    #[test]
    fn grid_occupancy_counts() {
        let dep = deployment();
        let cfg = config();
        cfg.validate(&dep).unwrap();
        let grid = map_prs_to_grid(&cfg, &dep, 1, 3).unwrap();
        // comb-2 over 106 PRBs: 12 * 106 / 2 = 636 REs per PRS symbol
        assert_eq!(cfg.occupied_per_symbol(), 636);
        let occupied = grid.occupied();
        assert_eq!(occupied.len(), 636 * cfg.num_symbols);
        for s in 0..SYMBOLS_PER_SLOT {
            let in_symbol = occupied.iter().filter(|&&(sym, _)| sym == s).count();
            if s < cfg.num_symbols {
                assert_eq!(in_symbol, 636);
            } else {
                assert_eq!(in_symbol, 0);
            }
        }
        assert_eq!(grid.bandwidth_hz(), 38.16e6);
    }

    #[test]
    fn maximal_comb_on_one_prb() {
        let dep = deployment();
        let mut cfg = config();
        cfg.num_rbs = 1;
        cfg.comb_size = 12;
        cfg.num_symbols = 12;
        cfg.comb_offset_per_gnb = vec![0, 1, 2];
        cfg.validate(&dep).unwrap();
        assert_eq!(cfg.occupied_per_symbol(), 1);
        let grid = map_prs_to_grid(&cfg, &dep, 2, 4).unwrap();
        assert_eq!(grid.occupied().len(), 12);
    }

    #[test]
    fn stagger_covers_every_offset() {
        for comb in [2usize, 4, 6, 12] {
            let pattern = stagger_pattern(comb).unwrap();
            let mut seen = vec![false; comb];
            for &p in pattern.iter().take(comb) {
                seen[p] = true;
            }
            assert!(seen.iter().all(|&s| s), "comb {comb} stagger incomplete");
        }
        assert!(stagger_pattern(3).is_none());
    }

    #[test]
    fn unsupported_comb_rejected_at_validation() {
        let dep = deployment();
        let mut cfg = config();
        cfg.comb_size = 3;
        assert_eq!(cfg.validate(&dep), Err(PrsError::UnsupportedCombSize(3)));
    }

    #[test]
    fn gnb_occupancies_are_disjoint() {
        let dep = deployment();
        let cfg = config();
        let schedule = build_schedule(&cfg, 3, 30e3).unwrap();
        let mut seen = std::collections::HashSet::new();
        for gnb in 1..=3 {
            for slot in schedule.slots_of(gnb) {
                let grid = map_prs_to_grid(&cfg, &dep, gnb, slot).unwrap();
                for (sym, k) in grid.occupied() {
                    assert!(
                        seen.insert((slot, sym, k)),
                        "RE (slot {slot}, sym {sym}, sc {k}) occupied twice"
                    );
                }
            }
        }
    }

    #[test]
    fn unscheduled_slot_is_an_error() {
        let dep = deployment();
        let cfg = config();
        assert_eq!(
            map_prs_to_grid(&cfg, &dep, 1, 4).unwrap_err(),
            PrsError::SlotNotScheduled { gnb_id: 1, slot: 4 }
        );
    }

    #[test]
    fn schedules_spanning_multiple_frames_get_frame_labels() {
        let mut cfg = config();
        cfg.resource_set_period = 40;
        cfg.resource_set_offset = 18;
        cfg.resource_offset_per_gnb = vec![0, 4, 8];
        // 20 slots per frame at 30 kHz: slot 22 lands in frame 1
        let schedule = build_schedule(&cfg, 3, 30e3).unwrap();
        assert_eq!(schedule.per_gnb[0], vec![(0, 18)]);
        assert_eq!(schedule.per_gnb[1], vec![(1, 2)]);
        assert_eq!(schedule.slots_of(2), vec![22]);
        // 15 kHz numerology has 10 slots per frame
        let schedule = build_schedule(&cfg, 3, 15e3).unwrap();
        assert_eq!(schedule.per_gnb[1], vec![(2, 2)]);
        assert_eq!(schedule.slots_of(2), vec![22]);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn occupancies_of_valid_configs_never_intersect(
            comb_idx in 0usize..4,
            num_rbs in 1usize..24,
            rb_offset in 0usize..8,
            symbol_start in 0usize..2,
            base_offset in 0usize..10,
            gap in 1usize..3,
        ) {
            use proptest::prelude::prop_assert;
            let comb_size = [2usize, 4, 6, 12][comb_idx];
            let dep = deployment();
            let cfg = PrsConfig {
                resource_set_period: 20,
                resource_set_offset: 2,
                resource_offset_per_gnb: vec![base_offset, base_offset + gap, base_offset + 2 * gap],
                resource_repetition: 1,
                resource_time_gap: 1,
                symbol_start,
                num_symbols: comb_size.min(12),
                rb_offset,
                num_rbs,
                comb_size,
                comb_offset_per_gnb: vec![0, 1 % comb_size, 2 % comb_size],
                sequence_id_per_gnb: vec![10, 11, 12],
            };
            cfg.validate(&dep).unwrap();
            let schedule = build_schedule(&cfg, 3, dep.scs_hz).unwrap();
            let mut seen = std::collections::HashSet::new();
            for gnb in 1..=3usize {
                for slot in schedule.slots_of(gnb) {
                    let grid = map_prs_to_grid(&cfg, &dep, gnb, slot).unwrap();
                    prop_assert!(grid.occupied().len() == cfg.occupied_per_symbol() * cfg.num_symbols);
                    for (sym, k) in grid.occupied() {
                        prop_assert!(seen.insert((slot, sym, k)));
                    }
                }
            }
        }
    }
}
