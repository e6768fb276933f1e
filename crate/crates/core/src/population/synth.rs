use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{
    AgeBin, CountyProfile, Household, Person, PersonId, Sex, Site, SiteId, SiteKind,
    SynthesisParams,
};
use crate::disease::HealthState;
use crate::error::{Error, Result};

const MAX_HOUSEHOLD_SIZE: f64 = 8.0;

/// Stores, schools and workplaces of one county, uniformly placed in its
/// unit square. Ids run consecutively from `first_id`.
pub fn synthesize_sites(profile: &CountyProfile, first_id: u32, rng: &mut impl Rng) -> Vec<Site> {
    let counts = [
        (SiteKind::Grocery, profile.grocery_count),
        (SiteKind::Supercenter, profile.supercenter_count),
        (SiteKind::Convenience, profile.convenience_count),
        (SiteKind::School, profile.school_count),
        (SiteKind::Workplace, profile.workplace_count),
    ];
    let mut sites = Vec::new();
    for (kind, n) in counts {
        for _ in 0..n {
            sites.push(Site {
                id: SiteId(first_id + sites.len() as u32),
                kind,
                county_id: profile.county_id,
                x: rng.random(),
                y: rng.random(),
            });
        }
    }
    sites
}

/// Scaled household count: round half up, never below one for a populated county.
pub fn household_count(households_real: u64, scale: f64) -> usize {
    if households_real == 0 {
        return 0;
    }
    // The epsilon keeps products like 150 * 0.01 = 1.4999999999999998 rounding up.
    let scaled = (households_real as f64 * scale + 0.5 + 1e-9).floor() as usize;
    scaled.max(1)
}

/// Home sites for a county's households, one per household.
pub fn synthesize_households(
    profile: &CountyProfile,
    scale: f64,
    first_site: u32,
    rng: &mut impl Rng,
) -> Vec<Site> {
    (0..household_count(profile.households_real, scale))
        .map(|i| Site {
            id: SiteId(first_site + i as u32),
            kind: SiteKind::Home,
            county_id: profile.county_id,
            x: rng.random(),
            y: rng.random(),
        })
        .collect()
}

/// Euclidean-nearest site of `kind`, lowest id on ties.
pub fn nearest_site(kind: SiteKind, x: f64, y: f64, sites: &[Site]) -> Option<SiteId> {
    sites
        .iter()
        .filter(|s| s.kind == kind)
        .map(|s| (s.distance_to(x, y), s.id))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, id)| id)
}

/// Nearest site of `kind` with probability `proximity_factor`, otherwise a
/// uniformly random site of the same kind.
pub fn select_store(
    kind: SiteKind,
    x: f64,
    y: f64,
    sites: &[Site],
    proximity_factor: f64,
    rng: &mut impl Rng,
) -> Result<SiteId> {
    let nearest = nearest_site(kind, x, y, sites).ok_or(Error::NoStoreOfKind {
        kind: kind.label(),
    })?;
    if rng.random::<f64>() < proximity_factor {
        return Ok(nearest);
    }
    let n = sites.iter().filter(|s| s.kind == kind).count();
    let pick = rng.random_range(0..n);
    Ok(sites
        .iter()
        .filter(|s| s.kind == kind)
        .nth(pick)
        .map(|s| s.id)
        .expect("index below kind count"))
}

/// Friend households for `homes[me]`, as indices into `homes`.
///
/// Drawn uniformly from the households within `radius`; when fewer than
/// `friend_count` lie that close, all of them are taken and the list is
/// topped up with the nearest remaining households.
pub fn assign_friends(
    me: usize,
    homes: &[Site],
    friend_count: usize,
    radius: f64,
    rng: &mut impl Rng,
) -> Vec<usize> {
    let (x, y) = (homes[me].x, homes[me].y);
    let mut within = Vec::new();
    let mut outside = Vec::new();
    for (j, h) in homes.iter().enumerate() {
        if j == me {
            continue;
        }
        let d = h.distance_to(x, y);
        if d <= radius {
            within.push(j);
        } else {
            outside.push((d, j));
        }
    }

    if within.len() >= friend_count {
        return rand::seq::index::sample(rng, within.len(), friend_count)
            .into_iter()
            .map(|k| within[k])
            .collect();
    }
    outside.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let missing = friend_count - within.len();
    within.extend(outside.into_iter().take(missing).map(|(_, j)| j));
    within
}

/// Fills each household with residents and returns them, ids consecutive
/// from `first_person`.
pub fn synthesize_people(
    households: &mut [Household],
    profile: &CountyProfile,
    params: &SynthesisParams,
    first_person: u32,
    rng: &mut impl Rng,
) -> Result<Vec<Person>> {
    params.age_distribution.validate()?;
    let size_dist = Normal::new(profile.avg_household_size, 1.0)
        .map_err(|e| Error::invalid("avg_household_size", e.to_string()))?;
    let age_dist = WeightedIndex::new(params.age_distribution.0)
        .map_err(|e| Error::invalid("age_distribution", e.to_string()))?;

    let mut people = Vec::new();
    for h in households.iter_mut() {
        let size = size_dist.sample(rng).round().clamp(1.0, MAX_HOUSEHOLD_SIZE) as usize;
        for _ in 0..size {
            let bin = AgeBin::ALL[age_dist.sample(rng)];
            let age_years = rng.random_range(bin.years());
            let sex = if rng.random_bool(0.5) {
                Sex::Female
            } else {
                Sex::Male
            };
            let employed = rng.random_bool(params.employment.0[bin.index()]);
            let id = PersonId(first_person + people.len() as u32);
            h.residents.push(id);
            people.push(Person {
                id,
                household: h.id,
                age_years,
                age_bin: bin,
                sex,
                employed,
                school_site: (age_years < 20).then_some(h.school),
                health: HealthState::default(),
                essential: false,
            });
        }
    }
    Ok(people)
}
