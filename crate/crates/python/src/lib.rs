//! Python bindings: build or load a population, configure a scenario, run it.

use std::sync::Arc;

use ::episim as core;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: core::Error) -> PyErr {
    if e.is_io() {
        PyIOError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// A synthesized region of sites, households and people.
#[pyclass(name = "Population", module = "episim", frozen)]
struct Population(Arc<core::Population>);

#[pymethods]
impl Population {
    /// Builds a population from a county table (the bundled one by default).
    #[staticmethod]
    #[pyo3(signature = (county_table=None, scale=0.01, seed=2020))]
    fn synthesize(py: Python<'_>, county_table: Option<std::path::PathBuf>, scale: f64, seed: u64) -> PyResult<Self> {
        let profiles = match county_table {
            Some(path) => core::population::load_county_table(path),
            None => core::population::bundled_county_table(),
        }
        .map_err(to_py)?;
        let params = core::SynthesisParams {
            scale,
            seed,
            ..core::SynthesisParams::default()
        };
        let pop = py
            .detach(|| core::build_population(&profiles, &params))
            .map_err(to_py)?;
        Ok(Population(Arc::new(pop)))
    }

    #[staticmethod]
    fn from_snapshot(dir: std::path::PathBuf) -> PyResult<Self> {
        core::population::read_snapshot(dir)
            .map(|p| Population(Arc::new(p)))
            .map_err(to_py)
    }

    fn write_snapshot(&self, dir: std::path::PathBuf) -> PyResult<()> {
        core::population::write_snapshot(&self.0, dir).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn households(&self) -> usize {
        self.0.households.len()
    }

    #[getter]
    fn sites(&self) -> usize {
        self.0.sites.len()
    }

    #[getter]
    fn employed(&self) -> usize {
        self.0.people.iter().filter(|p| p.employed).count()
    }

    /// People per age bin, keyed by label ("0-9" ... "70+").
    fn age_counts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let mut counts = [0usize; core::population::AgeBin::COUNT];
        for p in &self.0.people {
            counts[p.age_bin.index()] += 1;
        }
        let out = PyDict::new(py);
        for bin in core::population::AgeBin::ALL {
            out.set_item(bin.label(), counts[bin.index()])?;
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Population(people={}, households={}, sites={})",
            self.0.len(),
            self.0.households.len(),
            self.0.sites.len()
        )
    }
}

/// Scenario settings, addressed by the same dotted keys as scenario files.
#[pyclass(name = "Scenario", module = "episim")]
struct Scenario(core::ScenarioConfig);

#[pymethods]
impl Scenario {
    #[new]
    #[pyo3(signature = (**settings))]
    fn new(settings: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut s = Scenario(core::ScenarioConfig::default());
        if let Some(settings) = settings {
            for (k, v) in settings.iter() {
                let key: String = k.extract()?;
                s.set(&key.replacen("__", ".", 1), &v)?;
            }
        }
        Ok(s)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        core::scenario::load_scenario(path).map(Scenario).map_err(to_py)
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        core::scenario::parse_scenario(text).map(Scenario).map_err(to_py)
    }

    /// Sets one key, e.g. `set("intervention.essential_fraction", 0.1)`.
    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        let text = if let Ok(b) = value.extract::<bool>() {
            b.to_string()
        } else if let Ok(items) = value.extract::<Vec<f64>>() {
            items.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
        } else {
            value.str()?.to_string()
        };
        let doc = format!("{}{key} = {text}\n", core::scenario::render_scenario(&self.0));
        self.0 = core::scenario::parse_scenario(&doc).map_err(to_py)?;
        Ok(())
    }

    fn render(&self) -> String {
        core::scenario::render_scenario(&self.0)
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.0.seed = seed;
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label.clone()
    }

    fn __repr__(&self) -> String {
        format!("Scenario(label={:?}, seed={})", self.0.label, self.0.seed)
    }
}

/// Outcome of one run.
#[pyclass(name = "SimResult", module = "episim", frozen)]
struct SimResult(core::SimResult);

#[pymethods]
impl SimResult {
    #[getter]
    fn label(&self) -> String {
        self.0.label.clone()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[getter]
    fn population(&self) -> u32 {
        self.0.population
    }

    #[getter]
    fn max_infected(&self) -> u32 {
        self.0.summary.max_infected
    }

    #[getter]
    fn day_of_peak(&self) -> u32 {
        self.0.summary.day_of_peak
    }

    #[getter]
    fn not_infected(&self) -> u32 {
        self.0.summary.not_infected_final
    }

    #[getter]
    fn recovered(&self) -> u32 {
        self.0.summary.recovered_final
    }

    #[getter]
    fn ever_infected(&self) -> u32 {
        self.0.ever_infected()
    }

    #[getter]
    fn r0(&self) -> f64 {
        self.0.r0.value
    }

    #[getter]
    fn days(&self) -> usize {
        self.0.series.len()
    }

    /// Daily counts as a dict of equal-length lists.
    fn series<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = &self.0.series;
        let out = PyDict::new(py);
        out.set_item("day", s.iter().map(|m| m.day).collect::<Vec<_>>())?;
        out.set_item("susceptible", s.iter().map(|m| m.susceptible).collect::<Vec<_>>())?;
        out.set_item("no_symptoms", s.iter().map(|m| m.infected_no_symptoms).collect::<Vec<_>>())?;
        out.set_item("symptomatic", s.iter().map(|m| m.infected_symptomatic).collect::<Vec<_>>())?;
        out.set_item("infected_total", s.iter().map(|m| m.infected_total).collect::<Vec<_>>())?;
        out.set_item("recovered", s.iter().map(|m| m.recovered).collect::<Vec<_>>())?;
        out.set_item("phase", s.iter().map(|m| m.phase.label()).collect::<Vec<_>>())?;
        Ok(out)
    }

    /// `(day, timestep, site, infectee, infector, generation)` tuples.
    fn events(&self) -> Vec<(u32, u8, u32, u32, u32, u32)> {
        self.0
            .events
            .iter()
            .map(|e| (e.day, e.timestep, e.site.0, e.infectee.0, e.infector.0, e.generation))
            .collect()
    }

    /// Writes timeseries.csv, events.csv and summary.csv into `dir`.
    fn write(&self, dir: std::path::PathBuf) -> PyResult<()> {
        core::report::write_run(&self.0, dir).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "SimResult(label={:?}, seed={}, max_infected={}, recovered={}, r0={:.3})",
            self.0.label, self.0.seed, self.0.summary.max_infected, self.0.summary.recovered_final, self.0.r0.value
        )
    }
}

#[pyfunction]
fn run_scenario(py: Python<'_>, population: &Population, scenario: &Scenario) -> PyResult<SimResult> {
    let pop = Arc::clone(&population.0);
    let cfg = scenario.0.clone();
    py.detach(move || core::run_scenario(&pop, &cfg))
        .map(SimResult)
        .map_err(to_py)
}

#[pyfunction]
fn infection_probability(n: usize, lam: f64) -> PyResult<f64> {
    core::disease::infection_probability(n, lam).map_err(to_py)
}

#[pyfunction]
fn scale_up(sim_count: u64, sim_population: u64, real_population: u64) -> PyResult<u64> {
    core::report::scale_up(sim_count, sim_population, real_population).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "episim")]
fn episim_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Population>()?;
    m.add_class::<Scenario>()?;
    m.add_class::<SimResult>()?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(infection_probability, m)?)?;
    m.add_function(wrap_pyfunction!(scale_up, m)?)?;
    Ok(())
}
