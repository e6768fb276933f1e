//! Health stages and co-location transmission.
//!
//! A susceptible person sharing a site with at least one infectious person
//! is infected with probability `lambda / n` per timestep, where `n` counts
//! everyone at the site. The number of infectious occupants does not enter
//! the probability.

use rand::Rng;

use crate::error::{Error, Result};
use crate::population::{PersonId, SiteId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Stage {
    #[default]
    Healthy,
    NoSymptoms,
    ShowingSymptoms,
    Recovered,
}

impl Stage {
    pub fn is_infectious(self) -> bool {
        matches!(self, Stage::NoSymptoms | Stage::ShowingSymptoms)
    }

    pub fn label(self) -> &'static str {
        match self {
            Stage::Healthy => "healthy",
            Stage::NoSymptoms => "no_symptoms",
            Stage::ShowingSymptoms => "showing_symptoms",
            Stage::Recovered => "recovered",
        }
    }

    pub fn parse(s: &str) -> Option<Stage> {
        [
            Stage::Healthy,
            Stage::NoSymptoms,
            Stage::ShowingSymptoms,
            Stage::Recovered,
        ]
        .into_iter()
        .find(|st| st.label() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HealthState {
    pub stage: Stage,
    pub days_in_stage: u16,
}

impl HealthState {
    pub const fn new(stage: Stage) -> Self {
        HealthState {
            stage,
            days_in_stage: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiseaseParams {
    pub lambda_contagion: f64,
    pub days_no_symptoms: u16,
    pub days_showing_symptoms: u16,
}

impl Default for DiseaseParams {
    fn default() -> Self {
        DiseaseParams {
            lambda_contagion: 0.25,
            days_no_symptoms: 5,
            days_showing_symptoms: 9,
        }
    }
}

impl DiseaseParams {
    /// `lambda = 0` is accepted so extinction runs can be expressed.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_contagion >= 0.0 && self.lambda_contagion.is_finite()) {
            return Err(Error::invalid("lambda_contagion", "must be a finite non-negative number"));
        }
        if self.days_no_symptoms == 0 {
            return Err(Error::invalid("days_no_symptoms", "must be at least 1"));
        }
        if self.days_showing_symptoms == 0 {
            return Err(Error::invalid("days_showing_symptoms", "must be at least 1"));
        }
        Ok(())
    }
}

/// Per-susceptible infection probability for one timestep at a site with
/// `n` occupants and at least one of them infectious.
pub fn infection_probability(n: usize, lambda: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("infection probability at an empty site".into()));
    }
    if lambda < 0.0 {
        return Err(Error::Domain(format!("negative contagion factor {lambda}")));
    }
    Ok((lambda / n as f64).min(1.0))
}

/// Everyone at one site during one timestep.
#[derive(Debug, Clone, Copy)]
pub struct SiteOccupancy<'a> {
    pub site: SiteId,
    pub occupants: &'a [PersonId],
}

impl SiteOccupancy<'_> {
    pub fn n(&self) -> usize {
        self.occupants.len()
    }

    pub fn infectious_count(&self, health: &[HealthState]) -> usize {
        self.occupants
            .iter()
            .filter(|p| health[p.index()].stage.is_infectious())
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransmissionEvent {
    pub day: u32,
    pub timestep: u8,
    pub site: SiteId,
    pub infectee: PersonId,
    pub infector: PersonId,
    /// Index case is generation 0.
    pub generation: u32,
}

/// Draws the infections at one site for one timestep and appends one event
/// per new infection to `out`. Health is not modified; callers apply the
/// events once every site of the timestep has been resolved.
///
/// Draw order: occupants in slice order, one uniform per susceptible, plus
/// one more to pick the infector when the first succeeds.
#[allow(clippy::too_many_arguments)]
pub fn resolve_site(
    occupancy: SiteOccupancy<'_>,
    health: &[HealthState],
    generation: &[u32],
    day: u32,
    timestep: u8,
    lambda: f64,
    rng: &mut impl Rng,
    out: &mut Vec<TransmissionEvent>,
) {
    let infectious: Vec<PersonId> = occupancy
        .occupants
        .iter()
        .copied()
        .filter(|p| health[p.index()].stage.is_infectious())
        .collect();
    if infectious.is_empty() {
        return;
    }
    let p = (lambda / occupancy.n() as f64).min(1.0);
    for &person in occupancy.occupants {
        if health[person.index()].stage != Stage::Healthy {
            continue;
        }
        if rng.random::<f64>() < p {
            let infector = infectious[rng.random_range(0..infectious.len())];
            out.push(TransmissionEvent {
                day,
                timestep,
                site: occupancy.site,
                infectee: person,
                infector,
                generation: generation[infector.index()] + 1,
            });
        }
    }
}

/// One day of disease progression. Healthy and Recovered do not change.
pub fn advance_health(state: HealthState, params: &DiseaseParams) -> HealthState {
    let (limit, next) = match state.stage {
        Stage::Healthy | Stage::Recovered => return state,
        Stage::NoSymptoms => (params.days_no_symptoms, Stage::ShowingSymptoms),
        Stage::ShowingSymptoms => (params.days_showing_symptoms, Stage::Recovered),
    };
    let days = state.days_in_stage.saturating_add(1);
    if days >= limit {
        HealthState::new(next)
    } else {
        HealthState {
            stage: state.stage,
            days_in_stage: days,
        }
    }
}
