//! Day and timestep loop.
//!
//! Each day: update the phase from the start-of-day infected fraction, draw
//! the day's per-person behavior, then for each of the four timesteps place
//! everyone, resolve transmission at every site holding both an infectious
//! and a susceptible person, and apply the new infections once all sites are
//! done. Health advances after the last timestep and the day's metrics are
//! recorded.
//!
//! Randomness comes from streams keyed by (seed, person, day or week) and
//! (seed, day, timestep, site), so [`ExecutionMode::Parallel`] reproduces
//! [`ExecutionMode::Sequential`] exactly.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::disease::{
    advance_health, resolve_site, DiseaseParams, HealthState, SiteOccupancy, Stage,
    TransmissionEvent,
};
use crate::error::{Error, Result};
use crate::intervention::{
    evaluate_phase, partition_cohorts, select_essential, working_today, InterventionConfig, Phase,
    PhaseState,
};
use crate::movement::{
    build_weekly_plan, draw_panic_visit, site_for, BehaviorParams, ClockStamp, DayContext,
    Itinerary, WeeklyPlan, DAYS_PER_WEEK, TIMESTEPS_PER_DAY,
};
use crate::population::{AgeBin, PersonId, Population, SiteId, SynthesisParams};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecutionMode {
    /// Reference mode.
    #[default]
    Sequential,
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub label: String,
    pub seed: u64,
    pub horizon_days: u32,
    /// Infectees within this many days of the index case count toward R0.
    pub r0_window_days: u32,
    /// Infect one random person before day 0.
    pub seed_index_case: bool,
    pub execution: ExecutionMode,
    pub disease: DiseaseParams,
    pub behavior: BehaviorParams,
    pub intervention: InterventionConfig,
    /// How the population was built; recorded, not used by the run.
    pub synthesis: SynthesisParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            label: "scenario".into(),
            seed: 1,
            horizon_days: 365,
            r0_window_days: 10,
            seed_index_case: true,
            execution: ExecutionMode::Sequential,
            disease: DiseaseParams::default(),
            behavior: BehaviorParams::default(),
            intervention: InterventionConfig::default(),
            synthesis: SynthesisParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon_days == 0 {
            return Err(Error::invalid("horizon_days", "must be at least 1"));
        }
        self.disease.validate()?;
        self.behavior.validate()?;
        self.intervention.validate()?;
        self.synthesis.validate()
    }
}

/// End-of-day compartment counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DailyMetrics {
    pub day: u32,
    pub susceptible: u32,
    pub infected_no_symptoms: u32,
    pub infected_symptomatic: u32,
    pub infected_total: u32,
    pub recovered: u32,
    pub phase: Phase,
}

impl DailyMetrics {
    pub fn population(&self) -> u32 {
        self.susceptible + self.infected_total + self.recovered
    }

    fn tally(day: u32, phase: Phase, health: &[HealthState]) -> DailyMetrics {
        let mut c = [0u32; 4];
        for h in health {
            c[h.stage as usize] += 1;
        }
        DailyMetrics {
            day,
            susceptible: c[Stage::Healthy as usize],
            infected_no_symptoms: c[Stage::NoSymptoms as usize],
            infected_symptomatic: c[Stage::ShowingSymptoms as usize],
            infected_total: c[Stage::NoSymptoms as usize] + c[Stage::ShowingSymptoms as usize],
            recovered: c[Stage::Recovered as usize],
            phase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Summary {
    pub max_infected: u32,
    /// First day on which `max_infected` was reached.
    pub day_of_peak: u32,
    pub not_infected_final: u32,
    pub recovered_final: u32,
}

impl Summary {
    pub fn from_series(series: &[DailyMetrics]) -> Summary {
        let mut s = Summary::default();
        for m in series {
            if m.infected_total > s.max_infected {
                s.max_infected = m.infected_total;
                s.day_of_peak = m.day;
            }
        }
        if let Some(last) = series.last() {
            s.not_infected_final = last.susceptible;
            s.recovered_final = last.recovered;
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct R0Estimate {
    pub value: f64,
    /// Infectors the mean was taken over.
    pub infectors: usize,
    /// Set when there was nobody to average over; `value` is then 0.
    pub flagged: bool,
}

/// Mean direct secondary infections per infector, over the index case and
/// everyone infected before day `window_days`. The index case is seeded on
/// day 0 and recognized as the infector of generation-1 events.
pub fn estimate_r0(events: &[TransmissionEvent], window_days: u32) -> R0Estimate {
    let mut infectors: BTreeSet<PersonId> = events
        .iter()
        .filter(|e| e.generation == 1)
        .map(|e| e.infector)
        .collect();
    infectors.extend(
        events
            .iter()
            .filter(|e| e.day < window_days)
            .map(|e| e.infectee),
    );
    if infectors.is_empty() {
        return R0Estimate {
            value: 0.0,
            infectors: 0,
            flagged: true,
        };
    }
    let secondaries = events
        .iter()
        .filter(|e| infectors.contains(&e.infector))
        .count();
    R0Estimate {
        value: secondaries as f64 / infectors.len() as f64,
        infectors: infectors.len(),
        flagged: false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub label: String,
    pub seed: u64,
    pub population: u32,
    pub index_case: Option<PersonId>,
    pub series: Vec<DailyMetrics>,
    pub events: Vec<TransmissionEvent>,
    pub summary: Summary,
    pub r0: R0Estimate,
}

impl SimResult {
    /// Everyone who was ever infected, the index case included.
    pub fn ever_infected(&self) -> u32 {
        self.series
            .last()
            .map_or(0, |m| self.population - m.susceptible)
    }

    /// First day spent in `phase`, if the run reached it.
    pub fn first_day_in(&self, phase: Phase) -> Option<u32> {
        self.series.iter().find(|m| m.phase == phase).map(|m| m.day)
    }
}

/// Picks the index case uniformly and makes them infectious.
pub fn seed_index_case(health: &mut [HealthState], rng: &mut impl Rng) -> PersonId {
    let i = rng.random_range(0..health.len());
    health[i] = HealthState::new(Stage::NoSymptoms);
    PersonId(i as u32)
}

/// A run in progress. [`run_scenario`] is the usual entry point; this type
/// exists for stepping a day at a time.
pub struct Simulation {
    cfg: ScenarioConfig,
    itineraries: Vec<Itinerary>,
    bins: Vec<AgeBin>,
    employed: Vec<bool>,
    employed_ids: Vec<PersonId>,
    health: Vec<HealthState>,
    generation: Vec<u32>,
    phase: PhaseState,
    plans: Vec<WeeklyPlan>,
    plan_week: Option<u32>,
    day: u32,
    index_case: Option<PersonId>,
    series: Vec<DailyMetrics>,
    events: Vec<TransmissionEvent>,
    grid: OccupancyGrid,
}

impl Simulation {
    pub fn new(pop: &Population, cfg: &ScenarioConfig) -> Result<Simulation> {
        cfg.validate()?;
        if pop.is_empty() {
            return Err(Error::invalid("population", "no people"));
        }
        let n = pop.len();
        Ok(Simulation {
            cfg: cfg.clone(),
            itineraries: (0..n).map(|i| Itinerary::for_person(pop, i)).collect(),
            bins: pop.people.iter().map(|p| p.age_bin).collect(),
            employed: pop.people.iter().map(|p| p.employed).collect(),
            employed_ids: pop.employed_ids(),
            health: pop.people.iter().map(|p| p.health).collect(),
            generation: vec![0; n],
            phase: PhaseState::default(),
            plans: vec![WeeklyPlan::default(); n],
            plan_week: None,
            day: 0,
            index_case: None,
            series: Vec::new(),
            events: Vec::new(),
            grid: OccupancyGrid::new(pop.sites.len(), n),
        })
    }

    pub fn health(&self) -> &[HealthState] {
        &self.health
    }

    pub fn phase(&self) -> &PhaseState {
        &self.phase
    }

    pub fn day(&self) -> u32 {
        self.day
    }

    pub fn series(&self) -> &[DailyMetrics] {
        &self.series
    }

    pub fn events(&self) -> &[TransmissionEvent] {
        &self.events
    }

    pub fn seed_index_case(&mut self) -> PersonId {
        let mut r = rng::stream(self.cfg.seed, Purpose::IndexCase, &[]);
        let id = seed_index_case(&mut self.health, &mut r);
        self.index_case = Some(id);
        id
    }

    /// Makes `person` infectious as a seeded case (no transmission event).
    pub fn infect(&mut self, person: PersonId) {
        self.health[person.index()] = HealthState::new(Stage::NoSymptoms);
        self.generation[person.index()] = 0;
        self.index_case.get_or_insert(person);
    }

    pub fn current_metrics(&self) -> DailyMetrics {
        DailyMetrics::tally(self.day, self.phase.phase, &self.health)
    }

    pub fn is_finished(&self) -> bool {
        self.day >= self.cfg.horizon_days
            || self.series.last().is_some_and(|m| m.infected_total == 0)
    }

    fn update_phase(&mut self) {
        let cfg = &self.cfg.intervention;
        let start = self.current_metrics();
        let fraction = f64::from(start.infected_total) / self.health.len() as f64;
        let mut next = evaluate_phase(fraction, &self.phase, cfg, self.day);
        if self.phase.phase == Phase::Normal && next.phase.is_restricted() {
            let mut r = rng::stream(self.cfg.seed, Purpose::Essential, &[]);
            next.essential_ids = Arc::new(select_essential(
                &self.employed_ids,
                cfg.essential_fraction,
                &mut r,
            ));
        }
        if next.phase == Phase::Reopening && self.phase.phase != Phase::Reopening {
            let rest: Vec<PersonId> = self
                .employed_ids
                .iter()
                .copied()
                .filter(|p| !next.essential_ids.contains(p))
                .collect();
            next.return_cohorts = Arc::new(partition_cohorts(&rest, cfg.gradual_days, self.cfg.seed));
        }
        self.phase = next;
    }

    fn refresh_plans(&mut self) {
        let week = self.day / DAYS_PER_WEEK;
        if self.plan_week == Some(week) {
            return;
        }
        let (seed, phase, behavior) = (self.cfg.seed, self.phase.phase, &self.cfg.behavior);
        let (bins, its) = (&self.bins, &self.itineraries);
        let build = |(i, plan): (usize, &mut WeeklyPlan)| {
            let mut r = rng::stream(seed, Purpose::WeeklyPlan, &[i as u64, u64::from(week)]);
            *plan = build_weekly_plan(bins[i], its[i].friend_homes.len(), phase, behavior, &mut r);
        };
        match self.cfg.execution {
            ExecutionMode::Sequential => self.plans.iter_mut().enumerate().for_each(build),
            ExecutionMode::Parallel => self.plans.par_iter_mut().enumerate().for_each(build),
        }
        self.plan_week = Some(week);
    }

    fn day_contexts(&self) -> Vec<DayContext> {
        let day = self.day;
        let weekday = ClockStamp::new(day, 1).is_weekday();
        let seed = self.cfg.seed;
        let behavior = &self.cfg.behavior;
        let panic = self.phase.phase == Phase::Panic;
        let ctx = |i: usize| {
            let id = PersonId(i as u32);
            let keys = [i as u64, u64::from(day)];
            let stays_home = self.health[i].stage == Stage::ShowingSymptoms
                && rng::stream(seed, Purpose::StayHome, &keys)
                    .random_bool(behavior.symptomatic_stay_home_prob);
            let working = weekday
                && self.employed[i]
                && working_today(id, &self.phase, &self.cfg.intervention, day);
            let panic_visit = if panic {
                draw_panic_visit(
                    weekday,
                    behavior,
                    &mut rng::stream(seed, Purpose::Panic, &keys),
                )
            } else {
                None
            };
            DayContext {
                stays_home,
                working,
                panic_visit,
            }
        };
        match self.cfg.execution {
            ExecutionMode::Sequential => (0..self.health.len()).map(ctx).collect(),
            ExecutionMode::Parallel => (0..self.health.len()).into_par_iter().map(ctx).collect(),
        }
    }

    fn run_timestep(&mut self, timestep: u8, contexts: &[DayContext]) {
        let clock = ClockStamp::new(self.day, timestep);
        let phase = self.phase.phase;
        let (its, plans) = (&self.itineraries, &self.plans);
        let locate = |(i, loc): (usize, &mut SiteId)| {
            *loc = site_for(&its[i], clock, phase, &plans[i], contexts[i]);
        };
        match self.cfg.execution {
            ExecutionMode::Sequential => self.grid.locations.iter_mut().enumerate().for_each(locate),
            ExecutionMode::Parallel => self
                .grid
                .locations
                .par_iter_mut()
                .enumerate()
                .for_each(locate),
        }
        self.grid.group(&self.health);

        let (seed, lambda, day) = (self.cfg.seed, self.cfg.disease.lambda_contagion, self.day);
        let (grid, health, generation) = (&self.grid, &self.health, &self.generation);
        let resolve = |&site: &SiteId| {
            let mut out = Vec::new();
            let mut r = rng::stream(
                seed,
                Purpose::Transmission,
                &[u64::from(day), u64::from(timestep), u64::from(site.0)],
            );
            let occ = SiteOccupancy {
                site,
                occupants: grid.occupants(site),
            };
            resolve_site(occ, health, generation, day, timestep, lambda, &mut r, &mut out);
            out
        };
        let new_events: Vec<TransmissionEvent> = match self.cfg.execution {
            ExecutionMode::Sequential => grid.active.iter().flat_map(resolve).collect(),
            ExecutionMode::Parallel => grid
                .active
                .par_iter()
                .map(resolve)
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect(),
        };

        for e in &new_events {
            self.health[e.infectee.index()] = HealthState::new(Stage::NoSymptoms);
            self.generation[e.infectee.index()] = e.generation;
        }
        self.events.extend(new_events);
    }

    /// Simulates one full day and records its metrics.
    pub fn step_day(&mut self) -> DailyMetrics {
        self.update_phase();
        self.refresh_plans();
        let contexts = self.day_contexts();
        for ts in 1..=TIMESTEPS_PER_DAY {
            self.run_timestep(ts, &contexts);
        }
        let disease = &self.cfg.disease;
        for h in &mut self.health {
            *h = advance_health(*h, disease);
        }
        let m = self.current_metrics();
        self.series.push(m);
        self.day += 1;
        m
    }

    pub fn finish(self) -> SimResult {
        let summary = Summary::from_series(&self.series);
        let r0 = estimate_r0(&self.events, self.cfg.r0_window_days);
        SimResult {
            label: self.cfg.label,
            seed: self.cfg.seed,
            population: self.health.len() as u32,
            index_case: self.index_case,
            series: self.series,
            events: self.events,
            summary,
            r0,
        }
    }
}

/// Runs a scenario until the horizon or until nobody is infected.
pub fn run_scenario(pop: &Population, cfg: &ScenarioConfig) -> Result<SimResult> {
    let mut sim = Simulation::new(pop, cfg)?;
    if cfg.seed_index_case {
        if sim.health.iter().any(|h| h.stage != Stage::Healthy) {
            return Err(Error::invalid(
                "seed_index_case",
                "population already has non-healthy people",
            ));
        }
        sim.seed_index_case();
    }
    while !sim.is_finished() {
        sim.step_day();
    }
    Ok(sim.finish())
}

/// Per-timestep bucketing of people by site (counting sort, stable in
/// person order).
struct OccupancyGrid {
    locations: Vec<SiteId>,
    start: Vec<u32>,
    occupants: Vec<PersonId>,
    infectious: Vec<u32>,
    susceptible: Vec<u32>,
    /// Sites with someone infectious and someone susceptible, ascending.
    active: Vec<SiteId>,
}

impl OccupancyGrid {
    fn new(sites: usize, people: usize) -> Self {
        OccupancyGrid {
            locations: vec![SiteId(0); people],
            start: vec![0; sites + 1],
            occupants: vec![PersonId(0); people],
            infectious: vec![0; sites],
            susceptible: vec![0; sites],
            active: Vec::new(),
        }
    }

    fn group(&mut self, health: &[HealthState]) {
        self.start.fill(0);
        self.infectious.fill(0);
        self.susceptible.fill(0);
        for (i, loc) in self.locations.iter().enumerate() {
            let s = loc.index();
            self.start[s + 1] += 1;
            match health[i].stage {
                Stage::Healthy => self.susceptible[s] += 1,
                st if st.is_infectious() => self.infectious[s] += 1,
                _ => {}
            }
        }
        for s in 1..self.start.len() {
            self.start[s] += self.start[s - 1];
        }
        let mut cursor = self.start.clone();
        for (i, loc) in self.locations.iter().enumerate() {
            let c = &mut cursor[loc.index()];
            self.occupants[*c as usize] = PersonId(i as u32);
            *c += 1;
        }
        self.active.clear();
        self.active.extend(
            (0..self.infectious.len())
                .filter(|&s| self.infectious[s] > 0 && self.susceptible[s] > 0)
                .map(|s| SiteId(s as u32)),
        );
    }

    fn occupants(&self, site: SiteId) -> &[PersonId] {
        let s = site.index();
        &self.occupants[self.start[s] as usize..self.start[s + 1] as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(day: u32, infectee: u32, infector: u32, generation: u32) -> TransmissionEvent {
        TransmissionEvent {
            day,
            timestep: 1,
            site: SiteId(0),
            infectee: PersonId(infectee),
            infector: PersonId(infector),
            generation,
        }
    }

    #[test]
    fn r0_of_empty_log_is_flagged_zero() {
        let r = estimate_r0(&[], 10);
        assert_eq!(r.value, 0.0);
        assert!(r.flagged);
    }

    #[test]
    fn r0_counts_index_case_only() {
        let events = [ev(3, 1, 0, 1), ev(4, 2, 0, 1), ev(8, 3, 1, 2)];
        let r = estimate_r0(&events, 3);
        assert_eq!((r.value, r.infectors, r.flagged), (2.0, 1, false));
    }

    #[test]
    fn r0_window_includes_early_infectees() {
        let events = [ev(1, 1, 0, 1), ev(2, 2, 1, 2), ev(3, 3, 1, 2), ev(20, 4, 3, 3)];
        // Window 10 covers 0, 1, 2, 3: secondaries 1 + 2 + 0 + 1 = 4.
        let r = estimate_r0(&events, 10);
        assert_eq!(r.infectors, 4);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn index_case_conservation() {
        let mut h = vec![HealthState::default(); 50];
        let mut r = rng::stream(3, Purpose::IndexCase, &[]);
        let id = seed_index_case(&mut h, &mut r);
        let m = DailyMetrics::tally(0, Phase::Normal, &h);
        assert_eq!((m.infected_total, m.susceptible), (1, 49));
        assert_eq!(h[id.index()].stage, Stage::NoSymptoms);

        let mut one = vec![HealthState::default()];
        assert_eq!(seed_index_case(&mut one, &mut r), PersonId(0));

        let mut a = vec![HealthState::default(); 50];
        let mut b = vec![HealthState::default(); 50];
        let ia = seed_index_case(&mut a, &mut rng::stream(9, Purpose::IndexCase, &[]));
        let ib = seed_index_case(&mut b, &mut rng::stream(9, Purpose::IndexCase, &[]));
        assert_eq!(ia, ib);
    }

    #[test]
    fn summary_tracks_first_peak() {
        let m = |day, inf, s, r| DailyMetrics {
            day,
            susceptible: s,
            infected_no_symptoms: inf,
            infected_symptomatic: 0,
            infected_total: inf,
            recovered: r,
            phase: Phase::Normal,
        };
        let series = [m(0, 1, 9, 0), m(1, 5, 5, 0), m(2, 5, 3, 2), m(3, 0, 3, 7)];
        let s = Summary::from_series(&series);
        assert_eq!(
            s,
            Summary {
                max_infected: 5,
                day_of_peak: 1,
                not_infected_final: 3,
                recovered_final: 7
            }
        );
    }
}
