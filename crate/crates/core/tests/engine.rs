use std::sync::OnceLock;

use episim::disease::Stage;
use episim::engine::{ExecutionMode, Simulation};
use episim::population::bundled_county_table;
use episim::report::write_timeseries;
use episim::{build_population, run_scenario, InterventionConfig, Phase, Population, ReturnMode, ScenarioConfig, SimResult, SynthesisParams};

fn region() -> &'static Population {
    static POP: OnceLock<Population> = OnceLock::new();
    POP.get_or_init(|| build_population(&bundled_county_table().unwrap(), &SynthesisParams::default()).unwrap())
}

fn check_series(r: &SimResult) {
    let n = r.population;
    for w in r.series.windows(2) {
        assert!(w[1].recovered >= w[0].recovered);
        assert!(w[1].susceptible <= w[0].susceptible);
    }
    for m in &r.series {
        assert_eq!(m.population(), n, "day {}", m.day);
        assert_eq!(m.infected_total, m.infected_no_symptoms + m.infected_symptomatic);
    }
    let mut infected = std::collections::HashSet::new();
    for e in &r.events {
        assert!(infected.insert(e.infectee), "{} infected twice", e.infectee);
        assert_ne!(Some(e.infectee), r.index_case);
    }
    assert_eq!(r.ever_infected() as usize, r.events.len() + 1);
}

#[test]
fn conservation_and_monotonicity() {
    for seed in 1..=3 {
        let r = run_scenario(region(), &ScenarioConfig { seed, ..ScenarioConfig::default() }).unwrap();
        check_series(&r);
    }
    let quarantine = InterventionConfig {
        enabled: true,
        quarantine_start_frac: 0.01,
        quarantine_end_frac: 0.005,
        essential_fraction: 0.1,
        return_mode: ReturnMode::Gradual,
        panic_enabled: true,
        ..InterventionConfig::default()
    };
    for seed in [2, 4] {
        let cfg = ScenarioConfig { seed, intervention: quarantine.clone(), ..ScenarioConfig::default() };
        check_series(&run_scenario(region(), &cfg).unwrap());
    }
}

#[test]
fn stages_only_move_forward() {
    let cfg = ScenarioConfig { seed: 4, horizon_days: 60, ..ScenarioConfig::default() };
    let mut sim = Simulation::new(region(), &cfg).unwrap();
    sim.seed_index_case();
    let rank = |s: Stage| s as u8;
    let mut prev: Vec<Stage> = sim.health().iter().map(|h| h.stage).collect();
    while !sim.is_finished() {
        sim.step_day();
        for (before, now) in prev.iter_mut().zip(sim.health()) {
            assert!(rank(now.stage) >= rank(*before));
            if *before == Stage::Recovered {
                assert_eq!(now.stage, Stage::Recovered);
            }
            *before = now.stage;
        }
    }
}

#[test]
fn no_infection_within_the_same_timestep() {
    let r = run_scenario(region(), &ScenarioConfig { seed: 2, ..ScenarioConfig::default() }).unwrap();
    let infected_at: std::collections::HashMap<_, _> =
        r.events.iter().map(|e| (e.infectee, (e.day, e.timestep))).collect();
    for e in &r.events {
        if let Some(&when) = infected_at.get(&e.infector) {
            assert!(when < (e.day, e.timestep));
        }
    }
}

#[test]
fn parallel_matches_sequential() {
    for seed in [1, 2] {
        let seq = ScenarioConfig { seed, ..ScenarioConfig::default() };
        let par = ScenarioConfig { execution: ExecutionMode::Parallel, ..seq.clone() };
        let a = run_scenario(region(), &seq).unwrap();
        let b = run_scenario(region(), &par).unwrap();
        assert_eq!(a, b);

        let dir = tempfile::tempdir().unwrap();
        write_timeseries(&a, dir.path().join("a.csv")).unwrap();
        write_timeseries(&b, dir.path().join("b.csv")).unwrap();
        write_timeseries(&run_scenario(region(), &seq).unwrap(), dir.path().join("c.csv")).unwrap();
        let a = std::fs::read(dir.path().join("a.csv")).unwrap();
        assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
        assert_eq!(a, std::fs::read(dir.path().join("c.csv")).unwrap());
    }
}

#[test]
fn zero_lambda_goes_extinct() {
    let mut cfg = ScenarioConfig::default();
    cfg.disease.lambda_contagion = 0.0;
    let r = run_scenario(region(), &cfg).unwrap();
    assert!(r.events.is_empty());
    assert_eq!(r.ever_infected(), 1);
    let last = r.series.last().unwrap();
    assert_eq!(last.recovered, 1);
    assert_eq!(last.infected_total, 0);
    // 5 + 9 days of illness, then the run stops.
    assert_eq!(r.series.len(), 14);
    for m in &r.series[..13] {
        assert_eq!(m.infected_total, 1);
    }
}

#[test]
fn quarantine_phases_follow_the_machine() {
    let cfg = ScenarioConfig {
        seed: 2,
        intervention: InterventionConfig {
            enabled: true,
            quarantine_start_frac: 0.01,
            quarantine_end_frac: 0.005,
            panic_enabled: true,
            ..InterventionConfig::default()
        },
        ..ScenarioConfig::default()
    };
    let r = run_scenario(region(), &cfg).unwrap();
    let order = |p: Phase| Phase::ALL.iter().position(|q| *q == p).unwrap();
    for w in r.series.windows(2) {
        assert!(order(w[1].phase) >= order(w[0].phase));
    }
    if let Some(panic) = r.first_day_in(Phase::Panic) {
        assert_eq!(r.first_day_in(Phase::Quarantine), Some(panic + 3));
    }
}

#[test]
fn occupied_population_is_required() {
    let cfg = ScenarioConfig::default();
    assert!(run_scenario(&Population::default(), &cfg).is_err());
    let mut bad = cfg.clone();
    bad.disease.lambda_contagion = -1.0;
    assert!(run_scenario(region(), &bad).is_err());
}
