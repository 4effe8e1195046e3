//! Python bindings: scenario generation, mobility metrics, and the routing
//! simulation, driven in-process from Python.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use manetlab::config::{ModelKind, ScenarioConfig};
use manetlab::contact::DEFAULT_SAMPLE_INTERVAL;
use manetlab::io::{export_bonnmotion, export_ns2_movements, import_bonnmotion, ImportGeometry};
use manetlab::metrics::{compute_all, MetricReport};
use manetlab::rng::{derive_seed, RandomStream};
use manetlab::routesim::{build_flows, run_simulation, PerfReport, SimParams};
use manetlab::trace::Scenario;

fn py_err(e: manetlab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Parameters for one scenario generation run.
#[pyclass(name = "ScenarioConfig")]
#[derive(Clone)]
struct PyScenarioConfig {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyScenarioConfig {
    #[new]
    #[pyo3(signature = (
        model = "RWP",
        node_count = 90,
        area_width = 1000.0,
        area_height = 1000.0,
        min_speed = 0.5,
        max_speed = 20.0,
        max_pause = 10.0,
        duration = 900.0,
        radio_range = 75.0,
        group_size = 5,
        gm_alpha = 0.75,
        gm_update_interval = 1.0,
        rpgm_max_deviation = 50.0,
        ncmm_roam_radius = 100.0,
        seed = 1,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        model: &str,
        node_count: usize,
        area_width: f64,
        area_height: f64,
        min_speed: f64,
        max_speed: f64,
        max_pause: f64,
        duration: f64,
        radio_range: f64,
        group_size: usize,
        gm_alpha: f64,
        gm_update_interval: f64,
        rpgm_max_deviation: f64,
        ncmm_roam_radius: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let inner = ScenarioConfig {
            model: ModelKind::parse(model).map_err(py_err)?,
            node_count,
            area_width,
            area_height,
            min_speed,
            max_speed,
            max_pause,
            duration,
            radio_range,
            group_size,
            gm_alpha,
            gm_update_interval,
            rpgm_max_deviation,
            ncmm_roam_radius,
            seed,
        };
        inner.validate().map_err(py_err)?;
        Ok(PyScenarioConfig { inner })
    }

    #[getter]
    fn model(&self) -> &'static str {
        self.inner.model.name()
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn max_speed(&self) -> f64 {
        self.inner.max_speed
    }

    fn __repr__(&self) -> String {
        format!(
            "ScenarioConfig(model='{}', node_count={}, max_speed={}, seed={})",
            self.inner.model, self.inner.node_count, self.inner.max_speed, self.inner.seed
        )
    }
}

/// A generated set of node traces with its area geometry.
#[pyclass(name = "Scenario")]
struct PyScenario {
    inner: Scenario,
}

#[pymethods]
impl PyScenario {
    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration
    }

    #[getter]
    fn area(&self) -> (f64, f64) {
        (self.inner.area_width, self.inner.area_height)
    }

    #[getter]
    fn radio_range(&self) -> f64 {
        self.inner.radio_range
    }

    /// Position of a node at time t as an (x, y) tuple.
    fn position_at(&self, node: usize, t: f64) -> PyResult<(f64, f64)> {
        let p = self.inner.position_at(node, t).map_err(py_err)?;
        Ok((p.x, p.y))
    }

    /// Velocity of a node at time t as a (vx, vy) tuple.
    fn velocity_at(&self, node: usize, t: f64) -> PyResult<(f64, f64)> {
        let v = self.inner.velocity_at(node, t).map_err(py_err)?;
        Ok((v.x, v.y))
    }

    /// Waypoints of one node as (time, x, y) tuples.
    fn waypoints(&self, node: usize) -> PyResult<Vec<(f64, f64, f64)>> {
        let trace = self
            .inner
            .traces
            .get(node)
            .ok_or_else(|| PyValueError::new_err(format!("no trace for node {node}")))?;
        Ok(trace
            .waypoints
            .iter()
            .map(|w| (w.time, w.position.x, w.position.y))
            .collect())
    }

    /// Structural violations found in the scenario (empty list = valid).
    #[pyo3(signature = (max_speed = None))]
    fn validate(&self, max_speed: Option<f64>) -> Vec<String> {
        manetlab::validate(&self.inner, max_speed)
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(nodes={}, duration={}, area={}x{})",
            self.inner.node_count(),
            self.inner.duration,
            self.inner.area_width,
            self.inner.area_height
        )
    }
}

/// The five mobility metrics of one scenario.
#[pyclass(name = "MetricReport")]
struct PyMetricReport {
    inner: MetricReport,
}

#[pymethods]
impl PyMetricReport {
    #[getter]
    fn avg_node_degree(&self) -> f64 {
        self.inner.avg_node_degree
    }

    #[getter]
    fn avg_partitions(&self) -> f64 {
        self.inner.avg_partitions
    }

    #[getter]
    fn total_link_changes(&self) -> u64 {
        self.inner.total_link_changes
    }

    #[getter]
    fn link_changes_per_pair(&self) -> f64 {
        self.inner.link_changes_per_pair
    }

    #[getter]
    fn avg_link_duration(&self) -> f64 {
        self.inner.avg_link_duration
    }

    #[getter]
    fn avg_relative_speed(&self) -> f64 {
        self.inner.avg_relative_speed
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("avg_node_degree", self.inner.avg_node_degree)?;
        d.set_item("avg_partitions", self.inner.avg_partitions)?;
        d.set_item("total_link_changes", self.inner.total_link_changes)?;
        d.set_item("link_changes_per_pair", self.inner.link_changes_per_pair)?;
        d.set_item("avg_link_duration", self.inner.avg_link_duration)?;
        d.set_item("avg_relative_speed", self.inner.avg_relative_speed)?;
        d.set_item("sample_interval", self.inner.sample_interval)?;
        d.set_item("radio_range", self.inner.radio_range)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "MetricReport(nd={:.3}, np={:.3}, lc={}, ld={:.3}, rs={:.3})",
            self.inner.avg_node_degree,
            self.inner.avg_partitions,
            self.inner.total_link_changes,
            self.inner.avg_link_duration,
            self.inner.avg_relative_speed
        )
    }
}

/// Packet-level outcome of one routing run.
#[pyclass(name = "PerfReport")]
struct PyPerfReport {
    inner: PerfReport,
}

#[pymethods]
impl PyPerfReport {
    #[getter]
    fn pdr(&self) -> f64 {
        self.inner.pdr
    }

    #[getter]
    fn avg_delay(&self) -> Option<f64> {
        self.inner.avg_delay
    }

    #[getter]
    fn nrl(&self) -> Option<f64> {
        self.inner.nrl
    }

    #[getter]
    fn sent_data(&self) -> u64 {
        self.inner.sent_data
    }

    #[getter]
    fn delivered_data(&self) -> u64 {
        self.inner.delivered_data
    }

    #[getter]
    fn routing_packets(&self) -> u64 {
        self.inner.routing_packets
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("pdr", self.inner.pdr)?;
        d.set_item("avg_delay", self.inner.avg_delay)?;
        d.set_item("nrl", self.inner.nrl)?;
        d.set_item("sent_data", self.inner.sent_data)?;
        d.set_item("delivered_data", self.inner.delivered_data)?;
        d.set_item("routing_packets", self.inner.routing_packets)?;
        d.set_item("dropped_no_route", self.inner.dropped_no_route)?;
        d.set_item("dropped_buffer_overflow", self.inner.dropped_buffer_overflow)?;
        d.set_item("dropped_link_break", self.inner.dropped_link_break)?;
        d.set_item("dropped_at_end", self.inner.dropped_at_end)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "PerfReport(pdr={:.1}%, delay={:?}, nrl={:?})",
            self.inner.pdr, self.inner.avg_delay, self.inner.nrl
        )
    }
}

/// Generate a scenario from a configuration.
#[pyfunction]
fn generate(config: &PyScenarioConfig) -> PyResult<PyScenario> {
    let inner = manetlab::models::generate(&config.inner).map_err(py_err)?;
    Ok(PyScenario { inner })
}

/// Compute the five mobility metrics of a scenario.
#[pyfunction]
#[pyo3(signature = (scenario, radio_range = None, sample_interval = DEFAULT_SAMPLE_INTERVAL))]
fn compute_metrics(
    scenario: &PyScenario,
    radio_range: Option<f64>,
    sample_interval: f64,
) -> PyResult<PyMetricReport> {
    let range = radio_range.unwrap_or(scenario.inner.radio_range);
    let inner = compute_all(&scenario.inner, range, sample_interval).map_err(py_err)?;
    Ok(PyMetricReport { inner })
}

/// Run the routing simulation for a configuration: the scenario is generated
/// at the routing duration, CBR flows are drawn, and PDR/delay/NRL reported.
#[pyfunction]
#[pyo3(signature = (config, connections = 15, sim_duration = 300.0, routing_radio_range = 250.0))]
fn simulate(
    config: &PyScenarioConfig,
    connections: usize,
    sim_duration: f64,
    routing_radio_range: f64,
) -> PyResult<PyPerfReport> {
    let params = SimParams {
        max_connections: connections,
        sim_duration,
        routing_radio_range,
        ..SimParams::default()
    };
    let scenario_cfg = ScenarioConfig {
        duration: sim_duration,
        ..config.inner.clone()
    };
    let scenario = manetlab::models::generate(&scenario_cfg).map_err(py_err)?;
    let mut rng = RandomStream::new(derive_seed(scenario_cfg.seed, 0x74726166666963));
    let flows = build_flows(scenario_cfg.node_count, &params, &mut rng).map_err(py_err)?;
    let inner = run_simulation(&scenario, &flows, &params, &mut rng).map_err(py_err)?;
    Ok(PyPerfReport { inner })
}

/// Serialize a scenario as a BonnMotion-style movement file.
#[pyfunction]
fn to_bonnmotion(scenario: &PyScenario) -> String {
    export_bonnmotion(&scenario.inner)
}

/// Serialize a scenario as ns-2 movement commands.
#[pyfunction]
fn to_ns2(scenario: &PyScenario) -> String {
    export_ns2_movements(&scenario.inner)
}

/// Parse a BonnMotion-style movement file into a scenario.
#[pyfunction]
fn from_bonnmotion(
    text: &str,
    area_width: f64,
    area_height: f64,
    duration: f64,
    radio_range: f64,
) -> PyResult<PyScenario> {
    let geometry = ImportGeometry {
        area_width,
        area_height,
        duration,
        radio_range,
    };
    let inner = import_bonnmotion(text, &geometry).map_err(py_err)?;
    Ok(PyScenario { inner })
}

#[pymodule]
fn manetlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenarioConfig>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyMetricReport>()?;
    m.add_class::<PyPerfReport>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(compute_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(to_bonnmotion, m)?)?;
    m.add_function(wrap_pyfunction!(to_ns2, m)?)?;
    m.add_function(wrap_pyfunction!(from_bonnmotion, m)?)?;
    Ok(())
}
