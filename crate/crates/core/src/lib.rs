//! Seeded individual-based SIR simulator for a scaled multi-county region.
//!
//! The pipeline is: load a county table, synthesize a population of sites,
//! households and people ([`population`]), then step every person through
//! four timesteps per day ([`movement`]), resolving co-location transmission
//! at each site ([`disease`]) under a quarantine phase machine
//! ([`intervention`]). [`engine`] drives the loop and [`report`] /
//! [`scenario`] / [`cli`] handle the files around it.
//!
//! All randomness is drawn from streams keyed on the run seed plus the
//! identity of the entity being decided ([`rng`]), so results do not depend
//! on evaluation order or thread count.

pub mod cli;
pub mod disease;
pub mod engine;
mod error;
pub mod intervention;
pub mod movement;
pub mod population;
pub mod report;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};

pub use disease::{DiseaseParams, HealthState, Stage, TransmissionEvent};
pub use engine::{run_scenario, DailyMetrics, ExecutionMode, ScenarioConfig, SimResult};
pub use intervention::{InterventionConfig, Phase, ReturnMode};
pub use movement::BehaviorParams;
pub use population::{
    build_population, CountyProfile, Population, SiteKind, SynthesisParams,
};
