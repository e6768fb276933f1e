//! Synthetic population: typed sites, positioned households with friend
//! lists and assigned stores, and the people living in them.

mod county;
mod snapshot;
mod synth;

use std::fmt;
use std::ops::RangeInclusive;

use crate::disease::HealthState;
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

pub use county::{bundled_county_table, load_county_table, parse_county_table, CountyProfile};
pub use snapshot::{read_snapshot, write_snapshot, HOUSEHOLDS_FILE, PEOPLE_FILE, SITES_FILE};
pub use synth::{
    assign_friends, household_count, nearest_site, select_store, synthesize_households,
    synthesize_people, synthesize_sites,
};

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    };
}

id_type!(SiteId);
id_type!(HouseholdId);
id_type!(PersonId);

pub type CountyId = u16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SiteKind {
    Home,
    Grocery,
    Supercenter,
    Convenience,
    School,
    Workplace,
}

impl SiteKind {
    pub const ALL: [SiteKind; 6] = [
        SiteKind::Home,
        SiteKind::Grocery,
        SiteKind::Supercenter,
        SiteKind::Convenience,
        SiteKind::School,
        SiteKind::Workplace,
    ];

    pub const STORES: [SiteKind; 3] = [
        SiteKind::Grocery,
        SiteKind::Supercenter,
        SiteKind::Convenience,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SiteKind::Home => "home",
            SiteKind::Grocery => "grocery",
            SiteKind::Supercenter => "supercenter",
            SiteKind::Convenience => "convenience",
            SiteKind::School => "school",
            SiteKind::Workplace => "workplace",
        }
    }

    pub fn parse(s: &str) -> Option<SiteKind> {
        SiteKind::ALL.into_iter().find(|k| k.label() == s)
    }

    pub fn is_store(self) -> bool {
        matches!(
            self,
            SiteKind::Grocery | SiteKind::Supercenter | SiteKind::Convenience
        )
    }
}

impl fmt::Display for SiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: SiteId,
    pub kind: SiteKind,
    pub county_id: CountyId,
    pub x: f64,
    pub y: f64,
}

impl Site {
    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }
}

/// Decade age bins, with everyone 70 and over in the last one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgeBin {
    Under10,
    Teens,
    Twenties,
    Thirties,
    Forties,
    Fifties,
    Sixties,
    SeventyPlus,
}

impl AgeBin {
    pub const COUNT: usize = 8;

    pub const ALL: [AgeBin; 8] = [
        AgeBin::Under10,
        AgeBin::Teens,
        AgeBin::Twenties,
        AgeBin::Thirties,
        AgeBin::Forties,
        AgeBin::Fifties,
        AgeBin::Sixties,
        AgeBin::SeventyPlus,
    ];

    /// Oldest age the synthesizer will draw.
    pub const MAX_AGE: u8 = 94;

    pub fn from_age(years: u8) -> AgeBin {
        AgeBin::ALL[usize::from(years / 10).min(AgeBin::COUNT - 1)]
    }

    pub fn from_index(i: usize) -> Option<AgeBin> {
        AgeBin::ALL.get(i).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn years(self) -> RangeInclusive<u8> {
        let lo = self.index() as u8 * 10;
        match self {
            AgeBin::SeventyPlus => lo..=AgeBin::MAX_AGE,
            _ => lo..=lo + 9,
        }
    }

    pub fn label(self) -> &'static str {
        [
            "0-9", "10-19", "20-29", "30-39", "40-49", "50-59", "60-69", "70+",
        ][self.index()]
    }

    pub fn parse(s: &str) -> Option<AgeBin> {
        AgeBin::ALL.into_iter().find(|b| b.label() == s)
    }

    pub fn is_minor(self) -> bool {
        self < AgeBin::Twenties
    }
}

/// Carried on every person; nothing in the model reads it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sex {
    Female,
    Male,
}

impl Sex {
    pub fn label(self) -> &'static str {
        match self {
            Sex::Female => "F",
            Sex::Male => "M",
        }
    }

    pub fn parse(s: &str) -> Option<Sex> {
        match s {
            "F" => Some(Sex::Female),
            "M" => Some(Sex::Male),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Household {
    pub id: HouseholdId,
    pub county_id: CountyId,
    pub home_site: SiteId,
    pub residents: Vec<PersonId>,
    pub friends: Vec<HouseholdId>,
    pub grocery: SiteId,
    pub supercenter: SiteId,
    pub convenience: SiteId,
    pub workplace: SiteId,
    /// Shared by every resident under 20.
    pub school: SiteId,
}

impl Household {
    /// Assigned site for a non-home kind; `Home` yields the home site.
    pub fn assigned(&self, kind: SiteKind) -> SiteId {
        match kind {
            SiteKind::Home => self.home_site,
            SiteKind::Grocery => self.grocery,
            SiteKind::Supercenter => self.supercenter,
            SiteKind::Convenience => self.convenience,
            SiteKind::School => self.school,
            SiteKind::Workplace => self.workplace,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Person {
    pub id: PersonId,
    pub household: HouseholdId,
    pub age_years: u8,
    pub age_bin: AgeBin,
    pub sex: Sex,
    pub employed: bool,
    pub school_site: Option<SiteId>,
    pub health: HealthState,
    pub essential: bool,
}

/// Fraction of the population in each [`AgeBin`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgeDistribution(pub [f64; AgeBin::COUNT]);

impl Default for AgeDistribution {
    fn default() -> Self {
        AgeDistribution([0.125, 0.130, 0.135, 0.125, 0.120, 0.135, 0.120, 0.110])
    }
}

impl AgeDistribution {
    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("age_distribution", "entries must lie in [0, 1]"));
        }
        let total: f64 = self.0.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "age_distribution",
                format!("entries sum to {total}, expected 1"),
            ));
        }
        Ok(())
    }
}

/// Probability of being employed, by [`AgeBin`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmploymentTable(pub [f64; AgeBin::COUNT]);

impl Default for EmploymentTable {
    fn default() -> Self {
        EmploymentTable([0.0, 0.0, 0.8, 0.9, 0.9, 0.85, 0.4, 0.0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisParams {
    /// Multiplier from real to simulated household counts.
    pub scale: f64,
    /// Probability of taking the nearest site of a kind instead of a random one.
    pub proximity_factor: f64,
    pub friend_count: usize,
    /// In county units; every county is a unit square.
    pub friend_radius: f64,
    pub seed: u64,
    pub age_distribution: AgeDistribution,
    pub employment: EmploymentTable,
}

impl Default for SynthesisParams {
    fn default() -> Self {
        SynthesisParams {
            scale: 0.01,
            proximity_factor: 0.9,
            friend_count: 5,
            friend_radius: 0.1,
            seed: 2020,
            age_distribution: AgeDistribution::default(),
            employment: EmploymentTable::default(),
        }
    }
}

impl SynthesisParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(Error::invalid("scale", "must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.proximity_factor) {
            return Err(Error::invalid("proximity_factor", "must lie in [0, 1]"));
        }
        if self.friend_count == 0 {
            return Err(Error::invalid("friend_count", "must be at least 1"));
        }
        if self.friend_radius.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::invalid("friend_radius", "must be positive"));
        }
        if self.employment.0.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("employment", "entries must lie in [0, 1]"));
        }
        self.age_distribution.validate()
    }
}

/// A synthesized region. Ids equal vector positions in every table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Population {
    pub sites: Vec<Site>,
    pub households: Vec<Household>,
    pub people: Vec<Person>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.people.len()
    }

    pub fn is_empty(&self) -> bool {
        self.people.is_empty()
    }

    pub fn site(&self, id: SiteId) -> &Site {
        &self.sites[id.index()]
    }

    pub fn household(&self, id: HouseholdId) -> &Household {
        &self.households[id.index()]
    }

    pub fn household_of(&self, person: PersonId) -> &Household {
        self.household(self.people[person.index()].household)
    }

    pub fn employed_ids(&self) -> Vec<PersonId> {
        self.people
            .iter()
            .filter(|p| p.employed)
            .map(|p| p.id)
            .collect()
    }

    pub fn count_sites(&self, kind: SiteKind) -> usize {
        self.sites.iter().filter(|s| s.kind == kind).count()
    }

    /// Checks every structural invariant of a synthesized population.
    pub fn validate(&self) -> Result<()> {
        fn bad(file: &'static str, row: usize, reason: impl Into<String>) -> Error {
            Error::Snapshot {
                file,
                row,
                reason: reason.into(),
            }
        }

        for (i, s) in self.sites.iter().enumerate() {
            if s.id.index() != i {
                return Err(bad(SITES_FILE, i, "site ids must be dense and ordered"));
            }
            if !(0.0..=1.0).contains(&s.x) || !(0.0..=1.0).contains(&s.y) {
                return Err(bad(SITES_FILE, i, "coordinates outside the unit square"));
            }
        }

        let mut seen_person = vec![false; self.people.len()];
        for (i, h) in self.households.iter().enumerate() {
            if h.id.index() != i {
                return Err(bad(HOUSEHOLDS_FILE, i, "household ids must be dense and ordered"));
            }
            if h.residents.is_empty() {
                return Err(bad(HOUSEHOLDS_FILE, i, "household has no residents"));
            }
            for kind in SiteKind::ALL {
                let id = h.assigned(kind);
                let site = self
                    .sites
                    .get(id.index())
                    .ok_or_else(|| bad(HOUSEHOLDS_FILE, i, format!("unknown {kind} site {id}")))?;
                if site.kind != kind {
                    return Err(bad(
                        HOUSEHOLDS_FILE,
                        i,
                        format!("site {id} is a {}, expected {kind}", site.kind),
                    ));
                }
                if site.county_id != h.county_id {
                    return Err(bad(
                        HOUSEHOLDS_FILE,
                        i,
                        format!("{kind} site {id} lies in another county"),
                    ));
                }
            }
            for (j, f) in h.friends.iter().enumerate() {
                if *f == h.id {
                    return Err(bad(HOUSEHOLDS_FILE, i, "friend list contains itself"));
                }
                if f.index() >= self.households.len() {
                    return Err(bad(HOUSEHOLDS_FILE, i, format!("unknown friend {f}")));
                }
                if h.friends[..j].contains(f) {
                    return Err(bad(HOUSEHOLDS_FILE, i, format!("duplicate friend {f}")));
                }
            }
            for r in &h.residents {
                let p = self
                    .people
                    .get(r.index())
                    .ok_or_else(|| bad(HOUSEHOLDS_FILE, i, format!("unknown resident {r}")))?;
                if p.household != h.id || seen_person[r.index()] {
                    return Err(bad(
                        HOUSEHOLDS_FILE,
                        i,
                        format!("resident {r} does not belong to exactly this household"),
                    ));
                }
                seen_person[r.index()] = true;
            }
        }

        for (i, p) in self.people.iter().enumerate() {
            if p.id.index() != i {
                return Err(bad(PEOPLE_FILE, i, "person ids must be dense and ordered"));
            }
            if !seen_person[i] {
                return Err(bad(PEOPLE_FILE, i, "person is not a resident of its household"));
            }
            if AgeBin::from_age(p.age_years) != p.age_bin {
                return Err(bad(PEOPLE_FILE, i, "age bin does not match age"));
            }
            let minor = p.age_years < 20;
            match p.school_site {
                Some(s) if minor => {
                    if self.sites.get(s.index()).map(|s| s.kind) != Some(SiteKind::School) {
                        return Err(bad(PEOPLE_FILE, i, format!("site {s} is not a school")));
                    }
                }
                None if !minor => {}
                _ => {
                    return Err(bad(
                        PEOPLE_FILE,
                        i,
                        "school site must be present exactly for people under 20",
                    ))
                }
            }
            if p.essential && !p.employed {
                return Err(bad(PEOPLE_FILE, i, "essential person is not employed"));
            }
        }
        Ok(())
    }
}

/// Synthesizes the whole region, county by county in table order.
pub fn build_population(profiles: &[CountyProfile], params: &SynthesisParams) -> Result<Population> {
    params.validate()?;
    let mut pop = Population::default();

    for profile in profiles {
        profile.validate()?;
        let county = u64::from(profile.county_id);
        let seed = params.seed;

        let county_sites = synthesize_sites(
            profile,
            pop.sites.len() as u32,
            &mut rng::stream(seed, Purpose::Sites, &[county]),
        );
        pop.sites.extend(county_sites.iter().cloned());

        let homes = synthesize_households(
            profile,
            params.scale,
            pop.sites.len() as u32,
            &mut rng::stream(seed, Purpose::Households, &[county]),
        );
        if homes.is_empty() {
            continue;
        }
        for kind in SiteKind::ALL.into_iter().filter(|k| *k != SiteKind::Home) {
            if !county_sites.iter().any(|s| s.kind == kind) {
                return Err(Error::MissingSites {
                    county: profile.county_id,
                    kind: kind.label(),
                });
            }
        }
        if homes.len() <= params.friend_count {
            return Err(Error::TooFewHouseholds {
                county: profile.county_id,
                households: homes.len(),
                needed: params.friend_count + 1,
            });
        }

        let first_household = pop.households.len() as u32;
        let mut assign_rng = rng::stream(seed, Purpose::Assignment, &[county]);
        let mut friend_rng = rng::stream(seed, Purpose::Friends, &[county]);
        let mut households = Vec::with_capacity(homes.len());
        for (i, home) in homes.iter().enumerate() {
            let mut pick = |kind| {
                select_store(
                    kind,
                    home.x,
                    home.y,
                    &county_sites,
                    params.proximity_factor,
                    &mut assign_rng,
                )
            };
            let grocery = pick(SiteKind::Grocery)?;
            let supercenter = pick(SiteKind::Supercenter)?;
            let convenience = pick(SiteKind::Convenience)?;
            let workplace = pick(SiteKind::Workplace)?;
            let school = pick(SiteKind::School)?;
            let friends = assign_friends(
                i,
                &homes,
                params.friend_count,
                params.friend_radius,
                &mut friend_rng,
            )
            .into_iter()
            .map(|j| HouseholdId(first_household + j as u32))
            .collect();
            households.push(Household {
                id: HouseholdId(first_household + i as u32),
                county_id: profile.county_id,
                home_site: home.id,
                residents: Vec::new(),
                friends,
                grocery,
                supercenter,
                convenience,
                workplace,
                school,
            });
        }

        let people = synthesize_people(
            &mut households,
            profile,
            params,
            pop.people.len() as u32,
            &mut rng::stream(seed, Purpose::People, &[county]),
        )?;

        pop.sites.extend(homes);
        pop.households.extend(households);
        pop.people.extend(people);
    }
    Ok(pop)
}
