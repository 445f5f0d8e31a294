//! Python module `rdeq`.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ::rdeq::info::{self, CondPmf, DistortionMatrix, JointTable, Pmf};
use ::rdeq::orderings;
use ::rdeq::regions::{self, AuxSourceSystem, OptimizerConfig, RegionError};
use ::rdeq::sim;

create_exception!(rdeq, InfeasibleError, PyValueError);

fn region_err(e: RegionError) -> PyErr {
    match e {
        RegionError::Infeasible { .. } => InfeasibleError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn cond(rows: Vec<Vec<f64>>) -> PyResult<CondPmf> {
    CondPmf::new(rows).map_err(value_err)
}

fn rows_of(c: &CondPmf) -> Vec<Vec<f64>> {
    c.rows().map(<[f64]>::to_vec).collect()
}

/// Binary entropy in bits.
#[pyfunction]
fn h2(x: f64) -> PyResult<f64> {
    info::h2(x).map_err(value_err)
}

/// `a(1−b) + b(1−a)`.
#[pyfunction]
fn star(a: f64, b: f64) -> PyResult<f64> {
    info::star(a, b).map_err(value_err)
}

/// Entropy in bits of a probability vector.
#[pyfunction]
fn entropy(probs: Vec<f64>) -> PyResult<f64> {
    Ok(info::entropy(&Pmf::new(probs).map_err(value_err)?))
}

/// Regime name and `(2ε, 4ε(1−ε), h₂(ε))`.
#[pyfunction]
fn classify_bec_bsc(beta: f64, eps: f64) -> PyResult<(&'static str, (f64, f64, f64))> {
    let c = orderings::classify_bec_bsc(beta, eps).map_err(value_err)?;
    Ok((c.regime.name(), c.thresholds))
}

/// Whether `degraded` is `base` followed by some channel, and that channel.
#[pyfunction]
fn is_degraded(base: Vec<Vec<f64>>, degraded: Vec<Vec<f64>>) -> PyResult<(bool, Option<Vec<Vec<f64>>>)> {
    let v = orderings::is_degraded(&cond(base)?, &cond(degraded)?).map_err(value_err)?;
    let w = match v.certificate {
        Some(orderings::Certificate::DegradingChannel(w)) => Some(rows_of(&w)),
        _ => None,
    };
    Ok((v.holds, w))
}

/// Whether `first` is less noisy than `second`.
#[pyfunction]
#[pyo3(signature = (first, second, grid = orderings::DEFAULT_LESS_NOISY_GRID))]
fn is_less_noisy(first: Vec<Vec<f64>>, second: Vec<Vec<f64>>, grid: usize) -> PyResult<bool> {
    Ok(orderings::is_less_noisy(&cond(first)?, &cond(second)?, grid).map_err(value_err)?.holds)
}

/// Joint law of `(A, B, E)` and the distortion measure.
#[pyclass(frozen, name = "SourceModel")]
struct PySourceModel(regions::SourceModel);

#[pymethods]
impl PySourceModel {
    /// `p_abe[a][b][e]`; Hamming distortion unless `distortion` is given.
    #[new]
    #[pyo3(signature = (p_abe, distortion = None))]
    fn new(p_abe: Vec<Vec<Vec<f64>>>, distortion: Option<Vec<Vec<f64>>>) -> PyResult<Self> {
        let (na, nb) = (p_abe.len(), p_abe.first().map_or(0, Vec::len));
        let ne = p_abe.first().and_then(|r| r.first()).map_or(0, Vec::len);
        if p_abe.iter().any(|r| r.len() != nb || r.iter().any(|c| c.len() != ne)) {
            return Err(PyValueError::new_err("p_abe is ragged"));
        }
        let flat: Vec<f64> = p_abe.into_iter().flatten().flatten().collect();
        let joint = JointTable::new(vec![na, nb, ne], flat).map_err(value_err)?;
        let d = match distortion {
            Some(rows) => DistortionMatrix::new(rows).map_err(value_err)?,
            None => DistortionMatrix::hamming(na),
        };
        Ok(Self(regions::SourceModel::new(joint, d).map_err(region_err)?))
    }

    /// Uniform bit, Bob through BEC(β), Eve through BSC(ε).
    #[staticmethod]
    fn bec_bsc(beta: f64, eps: f64) -> PyResult<Self> {
        Ok(Self(regions::SourceModel::bec_bsc(beta, eps).map_err(region_err)?))
    }

    fn b_given_a(&self) -> Vec<Vec<f64>> {
        rows_of(&self.0.b_given_a())
    }

    fn e_given_a(&self) -> Vec<Vec<f64>> {
        rows_of(&self.0.e_given_a())
    }

    fn equivocation_without_coding(&self) -> f64 {
        self.0.equivocation_without_coding()
    }
}

/// Channel `P(y,z|x)` to Bob and Eve.
#[pyclass(frozen, name = "BroadcastChannel")]
struct PyBroadcastChannel(regions::BroadcastChannel);

#[pymethods]
impl PyBroadcastChannel {
    /// Independent branches `P(y|x) P(z|x)`.
    #[new]
    fn new(y_given_x: Vec<Vec<f64>>, z_given_x: Vec<Vec<f64>>) -> PyResult<Self> {
        let ch = regions::BroadcastChannel::from_marginals(&cond(y_given_x)?, &cond(z_given_x)?).map_err(region_err)?;
        Ok(Self(ch))
    }

    /// Noiseless to Bob, BSC(ζ) to Eve.
    #[staticmethod]
    fn noiseless_bsc(zeta: f64) -> PyResult<Self> {
        Ok(Self(regions::BroadcastChannel::noiseless_bsc(zeta).map_err(region_err)?))
    }

    fn y_given_x(&self) -> Vec<Vec<f64>> {
        rows_of(&self.0.y_given_x())
    }

    fn z_given_x(&self) -> Vec<Vec<f64>> {
        rows_of(&self.0.z_given_x())
    }
}

/// Best equivocation found and the auxiliary system attaining it.
#[pyclass(frozen, name = "RegionOptimum")]
struct PyRegionOptimum {
    #[pyo3(get)]
    delta: f64,
    #[pyo3(get)]
    distortion: f64,
    #[pyo3(get)]
    common_rate_active: Option<bool>,
    #[pyo3(get)]
    private_rate_active: bool,
    #[pyo3(get)]
    distortion_active: bool,
    /// `p(u,v|a)` with column `u·|V| + v`.
    #[pyo3(get)]
    uv_given_a: Vec<Vec<f64>>,
    #[pyo3(get)]
    p_x: Vec<f64>,
    #[pyo3(get)]
    t_given_x: Vec<Vec<f64>>,
    #[pyo3(get)]
    q_given_t: Vec<Vec<f64>>,
}

#[pymethods]
impl PyRegionOptimum {
    fn __repr__(&self) -> String {
        format!("RegionOptimum(delta={:.6}, distortion={:.6})", self.delta, self.distortion)
    }
}

impl From<regions::RegionOptimum> for PyRegionOptimum {
    fn from(o: regions::RegionOptimum) -> Self {
        let a = o.activity;
        Self {
            delta: o.delta,
            distortion: o.distortion,
            common_rate_active: a.common_rate_slack.map(|_| a.common_rate_active()),
            private_rate_active: a.private_rate_active(),
            distortion_active: a.distortion_active(),
            uv_given_a: rows_of(&o.source.uv_given_a()),
            p_x: o.channel.p_x.probs().to_vec(),
            t_given_x: rows_of(&o.channel.t_given_x),
            q_given_t: rows_of(&o.channel.q_given_t),
        }
    }
}

fn optimizer_config(restarts: usize, max_iterations: usize, seed: u64) -> OptimizerConfig {
    OptimizerConfig { restarts, max_iterations, seed, ..OptimizerConfig::default() }
}

type Solver = fn(
    &regions::SourceModel,
    &regions::BroadcastChannel,
    f64,
    f64,
    &OptimizerConfig,
) -> regions::Result<regions::RegionOptimum>;

#[allow(clippy::too_many_arguments)]
fn run_solver(
    py: Python<'_>,
    solver: Solver,
    source: &PySourceModel,
    channel: &PyBroadcastChannel,
    k: f64,
    d: f64,
    restarts: usize,
    max_iterations: usize,
    seed: u64,
) -> PyResult<PyRegionOptimum> {
    let config = optimizer_config(restarts, max_iterations, seed);
    let (s, c) = (&source.0, &channel.0);
    let result = py.detach(|| solver(s, c, k, d, &config));
    Ok(result.map_err(region_err)?.into())
}

macro_rules! optimizer_fn {
    ($name:ident, $solver:path, $doc:literal) => {
        #[doc = $doc]
        #[pyfunction]
        #[pyo3(signature = (source, channel, k, d, restarts = 32, max_iterations = 400, seed = 0))]
        #[allow(clippy::too_many_arguments)]
        fn $name(
            py: Python<'_>,
            source: &PySourceModel,
            channel: &PyBroadcastChannel,
            k: f64,
            d: f64,
            restarts: usize,
            max_iterations: usize,
            seed: u64,
        ) -> PyResult<PyRegionOptimum> {
            run_solver(py, $solver, source, channel, k, d, restarts, max_iterations, seed)
        }
    };
}

optimizer_fn!(optimize_inner, regions::optimize_inner, "Maximum inner-bound equivocation at `(k, D)`.");
optimizer_fn!(optimize_outer, regions::optimize_outer, "Maximum outer-bound equivocation at `(k, D)`.");
optimizer_fn!(prop1_max_delta, regions::prop1_max_delta, "Region when Bob's side information is less noisy.");
optimizer_fn!(prop2_max_delta, regions::prop2_max_delta, "Region when Eve's channel is less noisy.");

/// Inner-bound equivocation of a chain system `p(u|v) p(v|a)` and channel
/// auxiliaries; returns `(delta, distortion, rate1_ok, rate2_ok)`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn evaluate_inner(
    source: &PySourceModel,
    channel: &PyBroadcastChannel,
    v_given_a: Vec<Vec<f64>>,
    u_given_v: Vec<Vec<f64>>,
    p_x: Vec<f64>,
    t_given_x: Vec<Vec<f64>>,
    q_given_t: Vec<Vec<f64>>,
    k: f64,
) -> PyResult<(f64, f64, bool, bool)> {
    let aux_s = AuxSourceSystem::chain(&source.0, cond(v_given_a)?, cond(u_given_v)?).map_err(region_err)?;
    let p_x = Pmf::new(p_x).map_err(value_err)?;
    let aux_c = regions::AuxChannelSystem::new(p_x, cond(t_given_x)?, cond(q_given_t)?).map_err(region_err)?;
    let e = regions::evaluate_inner(&source.0, &channel.0, &aux_s, &aux_c, k).map_err(region_err)?;
    Ok((e.delta_bound, e.distortion, e.rate1_ok, e.rate2_ok))
}

/// Closed-form binary example; returns `(delta, constraint_ok)`.
#[pyfunction]
fn prop3_delta(beta: f64, eps: f64, zeta: f64, u: f64, q: f64) -> PyResult<(f64, bool)> {
    let v = regions::prop3_delta(beta, eps, zeta, u, q).map_err(region_err)?;
    Ok((v.delta, v.constraint_ok))
}

/// Maximum of [`prop3_delta`]; returns `(delta, u, q)`.
#[pyfunction]
#[pyo3(signature = (beta, eps, zeta, resolution = 1000))]
fn prop3_max_delta(beta: f64, eps: f64, zeta: f64, resolution: usize) -> PyResult<(f64, f64, f64)> {
    let o = regions::prop3_max_delta(beta, eps, zeta, resolution).map_err(region_err)?;
    Ok((o.delta, o.u, o.q))
}

/// Monte Carlo estimates for one scheme.
#[pyclass(frozen, name = "SimReport")]
struct PySimReport {
    #[pyo3(get)]
    mean_distortion: f64,
    #[pyo3(get)]
    decode_error_rate: f64,
    #[pyo3(get)]
    equivocation_per_symbol: f64,
    #[pyo3(get)]
    confidence_halfwidth: f64,
    #[pyo3(get)]
    trials: usize,
    #[pyo3(get)]
    n: usize,
}

#[pymethods]
impl PySimReport {
    fn __repr__(&self) -> String {
        format!(
            "SimReport(equivocation_per_symbol={:.6} ± {:.6}, decode_error_rate={:.6}, mean_distortion={:.6})",
            self.equivocation_per_symbol, self.confidence_halfwidth, self.decode_error_rate, self.mean_distortion
        )
    }
}

impl From<sim::SimReport> for PySimReport {
    fn from(r: sim::SimReport) -> Self {
        Self {
            mean_distortion: r.mean_distortion,
            decode_error_rate: r.decode_error_rate,
            equivocation_per_symbol: r.equivocation_per_symbol,
            confidence_halfwidth: r.confidence_halfwidth,
            trials: r.trials,
            n: r.n,
        }
    }
}

fn sim_config(n: usize, trials: usize, seed: u64, beta: f64, eps: f64, zeta: f64) -> sim::SimConfig {
    sim::SimConfig { n, trials, seed, beta, eps, zeta, parallel: true }
}

/// Per-symbol equivocation of uncoded transmission.
#[pyfunction]
fn uncoded_equivocation(eps: f64, zeta: f64) -> PyResult<f64> {
    sim::uncoded_equivocation(eps, zeta).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (n = 12, trials = 1000, seed = 0, beta = 0.5, eps = 0.5, zeta = 0.5))]
fn sim_uncoded(
    py: Python<'_>,
    n: usize,
    trials: usize,
    seed: u64,
    beta: f64,
    eps: f64,
    zeta: f64,
) -> PyResult<PySimReport> {
    let config = sim_config(n, trials, seed, beta, eps, zeta);
    Ok(py.detach(|| sim::sim_uncoded(&config)).map_err(value_err)?.into())
}

#[pyfunction]
#[pyo3(signature = (rate, n = 12, trials = 1000, seed = 0, beta = 0.5, eps = 0.5, zeta = 0.5))]
#[allow(clippy::too_many_arguments)]
fn sim_binning_lossless(
    py: Python<'_>,
    rate: f64,
    n: usize,
    trials: usize,
    seed: u64,
    beta: f64,
    eps: f64,
    zeta: f64,
) -> PyResult<PySimReport> {
    let config = sim_config(n, trials, seed, beta, eps, zeta);
    Ok(py.detach(|| sim::sim_binning_lossless(&config, rate)).map_err(value_err)?.into())
}

/// `rates` is `(r1, r2, rc, rp, rf, k)`.
#[pyfunction]
#[pyo3(signature = (rates, n = 12, trials = 1000, seed = 0, beta = 0.5, eps = 0.5, zeta = 0.5))]
#[allow(clippy::too_many_arguments)]
fn sim_separation_scheme(
    py: Python<'_>,
    rates: (f64, f64, f64, f64, f64, f64),
    n: usize,
    trials: usize,
    seed: u64,
    beta: f64,
    eps: f64,
    zeta: f64,
) -> PyResult<PySimReport> {
    let (r1, r2, rc, rp, rf, k) = rates;
    let rates = sim::SchemeRates { r1, r2, rc, rp, rf, k };
    let config = sim_config(n, trials, seed, beta, eps, zeta);
    Ok(py.detach(|| sim::sim_separation_scheme(&config, &rates)).map_err(value_err)?.into())
}

#[pymodule(name = "rdeq")]
fn rdeq_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add_class::<PySourceModel>()?;
    m.add_class::<PyBroadcastChannel>()?;
    m.add_class::<PyRegionOptimum>()?;
    m.add_class::<PySimReport>()?;
    m.add_function(wrap_pyfunction!(h2, m)?)?;
    m.add_function(wrap_pyfunction!(star, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(classify_bec_bsc, m)?)?;
    m.add_function(wrap_pyfunction!(is_degraded, m)?)?;
    m.add_function(wrap_pyfunction!(is_less_noisy, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_inner, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_outer, m)?)?;
    m.add_function(wrap_pyfunction!(prop1_max_delta, m)?)?;
    m.add_function(wrap_pyfunction!(prop2_max_delta, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_inner, m)?)?;
    m.add_function(wrap_pyfunction!(prop3_delta, m)?)?;
    m.add_function(wrap_pyfunction!(prop3_max_delta, m)?)?;
    m.add_function(wrap_pyfunction!(uncoded_equivocation, m)?)?;
    m.add_function(wrap_pyfunction!(sim_uncoded, m)?)?;
    m.add_function(wrap_pyfunction!(sim_binning_lossless, m)?)?;
    m.add_function(wrap_pyfunction!(sim_separation_scheme, m)?)?;
    Ok(())
}
