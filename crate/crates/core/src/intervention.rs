//! Quarantine phase machine and the daily work rule.
//!
//! Phases only move forward: Normal, optionally Panic, Quarantine,
//! Reopening, Reopened. Panic days already run under quarantine rules;
//! they only add extra store trips.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::population::PersonId;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Normal,
    Panic,
    Quarantine,
    Reopening,
    Reopened,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::Normal,
        Phase::Panic,
        Phase::Quarantine,
        Phase::Reopening,
        Phase::Reopened,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::Panic => "panic",
            Phase::Quarantine => "quarantine",
            Phase::Reopening => "reopening",
            Phase::Reopened => "reopened",
        }
    }

    pub fn parse(s: &str) -> Option<Phase> {
        Phase::ALL.into_iter().find(|p| p.label() == s)
    }

    /// Quarantine rules (school closure, work from home, no friend visits).
    pub fn is_restricted(self) -> bool {
        matches!(self, Phase::Panic | Phase::Quarantine)
    }

    pub fn schools_open(self) -> bool {
        !self.is_restricted()
    }

    pub fn friends_allowed(self) -> bool {
        !self.is_restricted()
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnMode {
    Immediate,
    Gradual,
}

impl ReturnMode {
    pub fn label(self) -> &'static str {
        match self {
            ReturnMode::Immediate => "immediate",
            ReturnMode::Gradual => "gradual",
        }
    }

    pub fn parse(s: &str) -> Option<ReturnMode> {
        match s {
            "immediate" => Some(ReturnMode::Immediate),
            "gradual" => Some(ReturnMode::Gradual),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterventionConfig {
    /// When false the phase stays Normal for the whole run.
    pub enabled: bool,
    /// Currently-infected fraction that triggers quarantine.
    pub quarantine_start_frac: f64,
    /// Currently-infected fraction below which quarantine is lifted.
    pub quarantine_end_frac: f64,
    /// Fraction of the employed who keep working in person during quarantine.
    pub essential_fraction: f64,
    pub return_mode: ReturnMode,
    pub gradual_days: u32,
    pub panic_enabled: bool,
    pub panic_days: u32,
    pub release_enabled: bool,
}

impl Default for InterventionConfig {
    fn default() -> Self {
        InterventionConfig {
            enabled: false,
            quarantine_start_frac: 0.05,
            quarantine_end_frac: 0.01,
            essential_fraction: 0.5,
            return_mode: ReturnMode::Immediate,
            gradual_days: 14,
            panic_enabled: false,
            panic_days: 3,
            release_enabled: true,
        }
    }
}

impl InterventionConfig {
    pub fn validate(&self) -> Result<()> {
        let (start, end) = (self.quarantine_start_frac, self.quarantine_end_frac);
        if !(0.0 < end && end < start && start < 1.0) {
            return Err(Error::invalid(
                "quarantine_end_frac",
                format!("need 0 < end ({end}) < start ({start}) < 1"),
            ));
        }
        if !(0.0..=1.0).contains(&self.essential_fraction) {
            return Err(Error::invalid("essential_fraction", "must lie in [0, 1]"));
        }
        if self.gradual_days == 0 {
            return Err(Error::invalid("gradual_days", "must be at least 1"));
        }
        if self.panic_enabled && self.panic_days == 0 {
            return Err(Error::invalid("panic_days", "must be at least 1 when panic is enabled"));
        }
        Ok(())
    }

    /// Days from the start of reopening until everyone is back.
    pub fn return_window(&self) -> u32 {
        match self.return_mode {
            ReturnMode::Immediate => 1,
            ReturnMode::Gradual => self.gradual_days,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub phase: Phase,
    pub day_entered: u32,
    /// Fixed when quarantine rules first apply.
    pub essential_ids: Arc<BTreeSet<PersonId>>,
    /// Return-day offset of each non-essential worker, fixed at reopening.
    pub return_cohorts: Arc<BTreeMap<PersonId, u32>>,
}

impl Default for PhaseState {
    fn default() -> Self {
        PhaseState {
            phase: Phase::Normal,
            day_entered: 0,
            essential_ids: Arc::default(),
            return_cohorts: Arc::default(),
        }
    }
}

impl PhaseState {
    fn enter(&self, phase: Phase, day: u32) -> PhaseState {
        PhaseState {
            phase,
            day_entered: day,
            ..self.clone()
        }
    }
}

/// Start-of-day phase update. At most one transition per call.
pub fn evaluate_phase(
    infected_fraction: f64,
    current: &PhaseState,
    cfg: &InterventionConfig,
    day: u32,
) -> PhaseState {
    if !cfg.enabled {
        return current.clone();
    }
    let elapsed = day.saturating_sub(current.day_entered);
    match current.phase {
        Phase::Normal if infected_fraction >= cfg.quarantine_start_frac => {
            let next = if cfg.panic_enabled {
                Phase::Panic
            } else {
                Phase::Quarantine
            };
            current.enter(next, day)
        }
        Phase::Panic if elapsed >= cfg.panic_days => current.enter(Phase::Quarantine, day),
        Phase::Quarantine if cfg.release_enabled && infected_fraction < cfg.quarantine_end_frac => {
            current.enter(Phase::Reopening, day)
        }
        Phase::Reopening if elapsed >= cfg.return_window() => current.enter(Phase::Reopened, day),
        _ => current.clone(),
    }
}

/// Uniform subset of `employed` of size `round(fraction * |employed|)`.
pub fn select_essential(
    employed: &[PersonId],
    essential_fraction: f64,
    rng: &mut impl Rng,
) -> BTreeSet<PersonId> {
    let k = (essential_fraction * employed.len() as f64).round() as usize;
    rand::seq::index::sample(rng, employed.len(), k.min(employed.len()))
        .into_iter()
        .map(|i| employed[i])
        .collect()
}

/// Splits non-essential workers into `days` cohorts of equal size (to within
/// one). Order is fixed by a keyed hash of each person id.
pub fn partition_cohorts(
    non_essential: &[PersonId],
    days: u32,
    seed: u64,
) -> BTreeMap<PersonId, u32> {
    let mut keyed: Vec<(u64, PersonId)> = non_essential
        .iter()
        .map(|&p| (rng::key(seed, Purpose::Cohort, &[u64::from(p.0)]), p))
        .collect();
    keyed.sort_unstable();
    let n = keyed.len() as u64;
    keyed
        .into_iter()
        .enumerate()
        .map(|(rank, (_, p))| (p, (rank as u64 * u64::from(days) / n.max(1)) as u32))
        .collect()
}

/// Whether an employed person works in person on `day`.
pub fn working_today(person: PersonId, state: &PhaseState, cfg: &InterventionConfig, day: u32) -> bool {
    match state.phase {
        Phase::Normal | Phase::Reopened => true,
        Phase::Panic | Phase::Quarantine => state.essential_ids.contains(&person),
        Phase::Reopening => match cfg.return_mode {
            ReturnMode::Immediate => true,
            ReturnMode::Gradual => {
                let offset = day.saturating_sub(state.day_entered);
                state.essential_ids.contains(&person)
                    || state
                        .return_cohorts
                        .get(&person)
                        .is_none_or(|&cohort| cohort <= offset)
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> InterventionConfig {
        InterventionConfig {
            enabled: true,
            ..Default::default()
        }
    }

    fn at(phase: Phase, day: u32) -> PhaseState {
        PhaseState {
            phase,
            day_entered: day,
            ..Default::default()
        }
    }

    #[test]
    fn threshold_starts_quarantine() {
        let next = evaluate_phase(0.051, &at(Phase::Normal, 0), &cfg(), 30);
        assert_eq!((next.phase, next.day_entered), (Phase::Quarantine, 30));
        let same = evaluate_phase(0.049, &at(Phase::Normal, 0), &cfg(), 30);
        assert_eq!(same.phase, Phase::Normal);
    }

    #[test]
    fn disabled_never_moves() {
        let c = InterventionConfig::default();
        assert_eq!(evaluate_phase(0.9, &at(Phase::Normal, 0), &c, 5).phase, Phase::Normal);
    }

    #[test]
    fn release_below_end_threshold() {
        let next = evaluate_phase(0.009, &at(Phase::Quarantine, 10), &cfg(), 50);
        assert_eq!(next.phase, Phase::Reopening);
        let held = evaluate_phase(0.011, &at(Phase::Quarantine, 10), &cfg(), 50);
        assert_eq!(held.phase, Phase::Quarantine);
    }

    #[test]
    fn release_disabled_holds_forever() {
        let c = InterventionConfig {
            release_enabled: false,
            ..cfg()
        };
        let mut s = at(Phase::Quarantine, 10);
        for day in 11..1000 {
            s = evaluate_phase(0.004, &s, &c, day);
            assert_eq!(s.phase, Phase::Quarantine);
        }
    }

    #[test]
    fn panic_runs_for_its_days() {
        let c = InterventionConfig {
            panic_enabled: true,
            ..cfg()
        };
        let s = evaluate_phase(0.06, &at(Phase::Normal, 0), &c, 20);
        assert_eq!(s.phase, Phase::Panic);
        let s = evaluate_phase(0.06, &s, &c, 21);
        let s = evaluate_phase(0.06, &s, &c, 22);
        assert_eq!(s.phase, Phase::Panic);
        let s = evaluate_phase(0.06, &s, &c, 23);
        assert_eq!((s.phase, s.day_entered), (Phase::Quarantine, 23));
    }

    #[test]
    fn one_shot_machine() {
        let c = cfg();
        let mut s = PhaseState::default();
        let mut transitions = Vec::new();
        // Infection rises, falls, and rises again.
        let curve = |d: u32| -> f64 {
            match d {
                0..=19 => 0.001 * d as f64,
                20..=39 => 0.08,
                40..=59 => 0.001,
                _ => 0.2,
            }
        };
        for day in 0..200 {
            let next = evaluate_phase(curve(day), &s, &c, day);
            if next.phase != s.phase {
                assert!(next.phase > s.phase);
                transitions.push(next.phase);
            }
            s = next;
        }
        assert_eq!(
            transitions,
            vec![Phase::Quarantine, Phase::Reopening, Phase::Reopened]
        );
    }

    #[test]
    fn essential_extremes() {
        let employed: Vec<PersonId> = (0..100).map(PersonId).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(select_essential(&employed, 0.0, &mut rng).is_empty());
        assert_eq!(select_essential(&employed, 1.0, &mut rng).len(), 100);
        let tenth = select_essential(&employed, 0.1, &mut rng);
        assert_eq!(tenth.len(), 10);
        assert!(tenth.iter().all(|p| p.0 < 100));
    }

    #[test]
    fn quarantine_work_rule() {
        let c = cfg();
        let mut s = at(Phase::Quarantine, 5);
        s.essential_ids = Arc::new([PersonId(1)].into_iter().collect());
        assert!(working_today(PersonId(1), &s, &c, 6));
        assert!(!working_today(PersonId(2), &s, &c, 6));
        for phase in [Phase::Normal, Phase::Reopened] {
            assert!(working_today(PersonId(2), &at(phase, 0), &c, 6));
        }
    }

    #[test]
    fn immediate_return_is_everyone() {
        let c = cfg();
        let s = at(Phase::Reopening, 40);
        for p in 0..50 {
            assert!(working_today(PersonId(p), &s, &c, 40));
        }
    }

    #[test]
    fn cohorts_are_balanced() {
        let ids: Vec<PersonId> = (0..1003).map(PersonId).collect();
        let cohorts = partition_cohorts(&ids, 14, 9);
        let mut sizes = [0usize; 14];
        for &c in cohorts.values() {
            sizes[c as usize] += 1;
        }
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        assert!(hi - lo <= 1, "{sizes:?}");
        assert_eq!(partition_cohorts(&ids, 14, 9), cohorts);
    }

    #[test]
    fn single_day_gradual_matches_immediate() {
        let ids: Vec<PersonId> = (0..300).map(PersonId).collect();
        let essential: BTreeSet<PersonId> = ids.iter().copied().step_by(10).collect();
        let non_ess: Vec<PersonId> = ids.iter().copied().filter(|p| !essential.contains(p)).collect();
        let gradual = InterventionConfig {
            return_mode: ReturnMode::Gradual,
            gradual_days: 1,
            ..cfg()
        };
        let immediate = cfg();
        let state = PhaseState {
            phase: Phase::Reopening,
            day_entered: 30,
            essential_ids: Arc::new(essential),
            return_cohorts: Arc::new(partition_cohorts(&non_ess, 1, 3)),
        };
        for day in 30..40 {
            for &p in &ids {
                assert_eq!(
                    working_today(p, &state, &gradual, day),
                    working_today(p, &state, &immediate, day)
                );
            }
        }
        assert_eq!(gradual.return_window(), immediate.return_window());
    }

    #[test]
    fn validation() {
        cfg().validate().unwrap();
        let bad = InterventionConfig {
            quarantine_end_frac: 0.06,
            ..cfg()
        };
        assert!(bad.validate().is_err());
    }
}
