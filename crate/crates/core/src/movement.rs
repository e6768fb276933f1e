//! Where each person is at each timestep.
//!
//! A day has four timesteps. Weekday mornings (timesteps 1 and 2) are for
//! school or work, discretionary trips happen at timestep 3 on weekdays and
//! at timesteps 1 to 3 on weekends, and everyone sleeps at home at
//! timestep 4. Trips are drawn once a week per person into a [`WeeklyPlan`].

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::intervention::Phase;
use crate::population::{AgeBin, Household, Population, SiteId, SiteKind};

pub const TIMESTEPS_PER_DAY: u8 = 4;
pub const DAYS_PER_WEEK: u32 = 7;
const SLOTS: usize = DAYS_PER_WEEK as usize * TIMESTEPS_PER_DAY as usize;

/// Day 0 is a Monday.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClockStamp {
    pub day: u32,
    /// 1 to 4.
    pub timestep: u8,
}

impl ClockStamp {
    pub fn new(day: u32, timestep: u8) -> Self {
        debug_assert!((1..=TIMESTEPS_PER_DAY).contains(&timestep));
        ClockStamp { day, timestep }
    }

    pub fn day_of_week(&self) -> u32 {
        self.day % DAYS_PER_WEEK
    }

    pub fn is_weekday(&self) -> bool {
        self.day_of_week() < 5
    }
}

/// Slots eligible for a store trip: weekday timestep 3, weekend timesteps 1-3.
pub fn store_slots() -> impl Iterator<Item = (u32, u8)> {
    (0..DAYS_PER_WEEK).flat_map(|dow| {
        let steps: &[u8] = if dow < 5 { &[3] } else { &[1, 2, 3] };
        steps.iter().map(move |&ts| (dow, ts))
    })
}

/// Slots in which a person of `bin` may visit a friend. Under-20s only go on
/// weekday evenings; adults also on weekend slots.
pub fn friend_slots(bin: AgeBin) -> impl Iterator<Item = (u32, u8)> {
    let minor = bin.is_minor();
    store_slots().filter(move |&(dow, _)| !minor || dow < 5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visit {
    Store(SiteKind),
    /// Index into the household's friend list.
    Friend(u8),
}

/// One week of discretionary trips for one person.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeeklyPlan {
    slots: [Option<Visit>; SLOTS],
}

impl Default for WeeklyPlan {
    fn default() -> Self {
        WeeklyPlan {
            slots: [None; SLOTS],
        }
    }
}

impl WeeklyPlan {
    fn slot(dow: u32, timestep: u8) -> usize {
        dow as usize * TIMESTEPS_PER_DAY as usize + (timestep - 1) as usize
    }

    pub fn get(&self, dow: u32, timestep: u8) -> Option<Visit> {
        self.slots[Self::slot(dow, timestep)]
    }

    pub fn set(&mut self, dow: u32, timestep: u8, visit: Option<Visit>) {
        debug_assert!(timestep < TIMESTEPS_PER_DAY, "nothing is planned at timestep 4");
        self.slots[Self::slot(dow, timestep)] = visit;
    }

    pub fn visits(&self) -> impl Iterator<Item = (u32, u8, Visit)> + '_ {
        self.slots.iter().enumerate().filter_map(|(i, v)| {
            v.map(|v| {
                (
                    (i / TIMESTEPS_PER_DAY as usize) as u32,
                    (i % TIMESTEPS_PER_DAY as usize) as u8 + 1,
                    v,
                )
            })
        })
    }

    pub fn store_visits(&self) -> usize {
        self.visits()
            .filter(|(_, _, v)| matches!(v, Visit::Store(_)))
            .count()
    }

    pub fn friend_visits(&self) -> usize {
        self.visits()
            .filter(|(_, _, v)| matches!(v, Visit::Friend(_)))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorParams {
    /// Mean store trips per week, by age bin.
    pub store_visits_per_week: [f64; AgeBin::COUNT],
    /// Relative weights of grocery, supercenter and convenience trips.
    pub store_kind_mix: [f64; 3],
    /// Probability of a friend visit in each eligible slot, by age bin.
    pub friend_visit_prob: [f64; AgeBin::COUNT],
    pub symptomatic_stay_home_prob: f64,
    /// Per-day probability of an extra grocery or supercenter trip during panic.
    pub panic_store_visit_prob: f64,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        BehaviorParams {
            store_visits_per_week: [0.0, 0.5, 2.0, 2.0, 2.0, 2.0, 1.5, 1.0],
            store_kind_mix: [0.6, 0.25, 0.15],
            friend_visit_prob: [0.3, 0.3, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2],
            symptomatic_stay_home_prob: 0.9,
            panic_store_visit_prob: 0.9,
        }
    }
}

impl BehaviorParams {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self
            .store_visits_per_week
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::invalid("store_visits_per_week", "must be non-negative"));
        }
        if self.store_kind_mix.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || self.store_kind_mix.iter().sum::<f64>() <= 0.0
        {
            return Err(Error::invalid(
                "store_kind_mix",
                "weights must be non-negative with a positive sum",
            ));
        }
        if self.store_kind_mix[0] + self.store_kind_mix[1] <= 0.0 {
            return Err(Error::invalid(
                "store_kind_mix",
                "grocery and supercenter weights cannot both be zero",
            ));
        }
        if !self.friend_visit_prob.iter().all(|&p| prob(p)) {
            return Err(Error::invalid("friend_visit_prob", "must lie in [0, 1]"));
        }
        if !prob(self.symptomatic_stay_home_prob) {
            return Err(Error::invalid("symptomatic_stay_home_prob", "must lie in [0, 1]"));
        }
        if !prob(self.panic_store_visit_prob) {
            return Err(Error::invalid("panic_store_visit_prob", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Draws one week of trips for a person in `bin` whose household has
/// `friend_count` friends. Friend visits are left out while `phase` keeps
/// people from socializing.
pub fn build_weekly_plan(
    bin: AgeBin,
    friend_count: usize,
    phase: Phase,
    params: &BehaviorParams,
    rng: &mut impl Rng,
) -> WeeklyPlan {
    let mut plan = WeeklyPlan::default();

    let eligible: Vec<(u32, u8)> = store_slots().collect();
    let mean = params.store_visits_per_week[bin.index()];
    let trips = if mean > 0.0 {
        let drawn: f64 = Poisson::new(mean).expect("validated mean").sample(rng);
        (drawn as usize).min(eligible.len())
    } else {
        0
    };
    if trips > 0 {
        let kinds = WeightedIndex::new(params.store_kind_mix).expect("validated mix");
        for k in rand::seq::index::sample(rng, eligible.len(), trips) {
            let (dow, ts) = eligible[k];
            plan.set(dow, ts, Some(Visit::Store(SiteKind::STORES[kinds.sample(rng)])));
        }
    }

    if friend_count > 0 && phase.friends_allowed() {
        let p = params.friend_visit_prob[bin.index()];
        for (dow, ts) in friend_slots(bin) {
            if plan.get(dow, ts).is_none() && rng.random_bool(p) {
                let who = rng.random_range(0..friend_count) as u8;
                plan.set(dow, ts, Some(Visit::Friend(who)));
            }
        }
    }
    plan
}

/// Extra panic-buying trip for one day: a grocery or supercenter visit at
/// timestep 3 on weekdays, or a random daytime timestep on weekends.
pub fn draw_panic_visit(
    weekday: bool,
    params: &BehaviorParams,
    rng: &mut impl Rng,
) -> Option<(u8, SiteKind)> {
    if !rng.random_bool(params.panic_store_visit_prob) {
        return None;
    }
    let mix = &params.store_kind_mix;
    let kind = if rng.random::<f64>() * (mix[0] + mix[1]) < mix[0] {
        SiteKind::Grocery
    } else {
        SiteKind::Supercenter
    };
    let ts = if weekday { 3 } else { rng.random_range(1..=3) };
    Some((ts, kind))
}

/// Everything about one person that routing needs, resolved to site ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Itinerary {
    pub home: SiteId,
    pub school: Option<SiteId>,
    pub workplace: Option<SiteId>,
    pub grocery: SiteId,
    pub supercenter: SiteId,
    pub convenience: SiteId,
    pub friend_homes: Vec<SiteId>,
}

impl Itinerary {
    pub fn for_person(pop: &Population, index: usize) -> Itinerary {
        let person = &pop.people[index];
        let h: &Household = pop.household(person.household);
        Itinerary {
            home: h.home_site,
            school: person.school_site,
            workplace: person.employed.then_some(h.workplace),
            grocery: h.grocery,
            supercenter: h.supercenter,
            convenience: h.convenience,
            friend_homes: h
                .friends
                .iter()
                .map(|f| pop.household(*f).home_site)
                .collect(),
        }
    }

    fn store(&self, kind: SiteKind) -> SiteId {
        match kind {
            SiteKind::Grocery => self.grocery,
            SiteKind::Supercenter => self.supercenter,
            SiteKind::Convenience => self.convenience,
            _ => self.home,
        }
    }
}

/// A person's draws and entitlements for one day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DayContext {
    /// Symptomatic and drew staying home for the whole day.
    pub stays_home: bool,
    /// Employed and expected at the workplace today.
    pub working: bool,
    pub panic_visit: Option<(u8, SiteKind)>,
}

pub fn site_for(
    who: &Itinerary,
    clock: ClockStamp,
    phase: Phase,
    plan: &WeeklyPlan,
    day: DayContext,
) -> SiteId {
    if clock.timestep >= TIMESTEPS_PER_DAY || day.stays_home {
        return who.home;
    }
    if clock.is_weekday() && clock.timestep <= 2 {
        if let Some(school) = who.school.filter(|_| phase.schools_open()) {
            return school;
        }
        return match who.workplace {
            Some(w) if day.working => w,
            _ => who.home,
        };
    }
    if let Some((_, kind)) = day.panic_visit.filter(|(ts, _)| *ts == clock.timestep) {
        return who.store(kind);
    }
    match plan.get(clock.day_of_week(), clock.timestep) {
        Some(Visit::Store(kind)) => who.store(kind),
        Some(Visit::Friend(i)) if phase.friends_allowed() => who
            .friend_homes
            .get(i as usize)
            .copied()
            .unwrap_or(who.home),
        _ => who.home,
    }
}
