//! Python bindings: lattices, exact enumeration, Markov chains and the
//! closed-form results.

use std::sync::Arc;

use isinglab::analytic;
use isinglab::clusters;
use isinglab::lattice::{BoundaryCondition, Lattice};
use isinglab::mcmc::{self, ChainState, Estimator, Observable, Sampler, Schedule, Start};
use isinglab::spin::{Model, ModelParams, SpinConfig};
use isinglab::EnumerationTable;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: isinglab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn model(q: Option<u8>) -> PyResult<Model> {
    match q {
        None | Some(2) => Ok(Model::Ising),
        Some(q) => Model::potts(q).map_err(err),
    }
}

fn boundary(kind: &str, extents: &[usize], pattern: Option<Vec<i8>>, axis: Option<usize>, below: Option<usize>) -> PyResult<BoundaryCondition> {
    Ok(match kind {
        "free" => BoundaryCondition::Free,
        "periodic" => BoundaryCondition::Periodic,
        "all_plus" => BoundaryCondition::AllPlus,
        "all_minus" => BoundaryCondition::AllMinus,
        "fixed" => BoundaryCondition::Fixed(
            pattern.ok_or_else(|| PyValueError::new_err("a fixed boundary needs a pattern"))?,
        ),
        "dobrushin" => match BoundaryCondition::dobrushin_default(extents) {
            BoundaryCondition::Dobrushin { axis: a, below: b } => {
                let axis = axis.unwrap_or(a);
                let below = below.unwrap_or_else(|| if axis == a { b } else { extents.get(axis).map_or(0, |e| e / 2) });
                BoundaryCondition::Dobrushin { axis, below }
            }
            other => other,
        },
        other => return Err(PyValueError::new_err(format!("unknown boundary {other:?}"))),
    })
}

/// A finite box with a boundary condition.
#[pyclass(name = "Lattice", module = "isinglab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLattice {
    inner: Arc<Lattice>,
}

#[pymethods]
impl PyLattice {
    #[new]
    #[pyo3(signature = (extents, boundary = "free", pattern = None, axis = None, below = None))]
    fn new(extents: Vec<usize>, boundary: &str, pattern: Option<Vec<i8>>, axis: Option<usize>, below: Option<usize>) -> PyResult<Self> {
        let bc = self::boundary(boundary, &extents, pattern, axis, below)?;
        Ok(PyLattice { inner: Arc::new(Lattice::new(extents, bc).map_err(err)?) })
    }

    #[getter]
    fn extents(&self) -> Vec<usize> {
        self.inner.extents().to_vec()
    }

    #[getter]
    fn boundary(&self) -> &'static str {
        self.inner.boundary().kind()
    }

    #[getter]
    fn site_count(&self) -> usize {
        self.inner.site_count()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    #[getter]
    fn free_sites(&self) -> Vec<usize> {
        self.inner.free_sites().to_vec()
    }

    fn neighbors(&self, site: usize) -> PyResult<Vec<usize>> {
        self.inner.check_site(site).map_err(err)?;
        Ok(self.inner.neighbors(site).collect())
    }

    fn coords(&self, site: usize) -> PyResult<Vec<usize>> {
        self.inner.check_site(site).map_err(err)?;
        Ok(self.inner.coords(site))
    }

    fn index(&self, coords: Vec<usize>) -> Option<usize> {
        self.inner.index(&coords)
    }

    fn __len__(&self) -> usize {
        self.inner.site_count()
    }

    fn __repr__(&self) -> String {
        format!("Lattice({:?}, boundary={:?})", self.inner.extents(), self.inner.boundary().kind())
    }
}

fn config(lattice: &PyLattice, states: Vec<i8>, q: Option<u8>) -> PyResult<SpinConfig> {
    SpinConfig::from_states(lattice.inner.clone(), model(q)?, states).map_err(err)
}

/// Exact Boltzmann distribution of a small lattice.
#[pyclass(name = "Enumeration", module = "isinglab", frozen)]
struct PyEnumeration {
    inner: EnumerationTable,
}

#[pymethods]
impl PyEnumeration {
    #[new]
    #[pyo3(signature = (lattice, temperature, field = 0.0, q = None))]
    fn new(py: Python<'_>, lattice: &PyLattice, temperature: f64, field: f64, q: Option<u8>) -> PyResult<Self> {
        let params = ModelParams::new(model(q)?, temperature, field).map_err(err)?;
        let l = lattice.inner.clone();
        let inner = py.detach(|| isinglab::enumerate(l, params)).map_err(err)?;
        Ok(PyEnumeration { inner })
    }

    #[getter]
    fn log_z(&self) -> f64 {
        self.inner.log_z()
    }

    #[getter]
    fn configurations(&self) -> u128 {
        self.inner.configurations()
    }

    /// `<prod s(v)>` over the given sites.
    fn correlation(&self, sites: Vec<usize>) -> PyResult<f64> {
        self.inner.correlation(&sites).map_err(err)
    }

    fn marginal(&self, window: Vec<usize>, pattern: Vec<i8>) -> PyResult<f64> {
        self.inner.window_marginal(&window, &pattern).map_err(err)
    }

    fn probability(&self, lattice: &PyLattice, states: Vec<i8>) -> PyResult<f64> {
        let q = match self.inner.params().model {
            Model::Potts { q } => Some(q),
            Model::Ising => None,
        };
        self.inner.probability(&config(lattice, states, q)?).map_err(err)
    }

    /// One-point values and the matrix of two-point correlations.
    fn one_and_two_point(&self) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
        self.inner.one_and_two_point().map_err(err)
    }

    /// Largest relative violation of the Gibbs equations over windows of the given side.
    fn gibbs_violation(&self, window_size: usize) -> PyResult<f64> {
        Ok(self.inner.verify_gibbs_equations(window_size).map_err(err)?.max_violation)
    }

    /// `(<s(v)><s(w)>, <s(v)s(w)>, holds)`.
    fn fkg(&self, v: usize, w: usize) -> PyResult<(f64, f64, bool)> {
        let c = self.inner.verify_fkg(v, w).map_err(err)?;
        Ok((c.lhs, c.rhs, c.holds))
    }

    fn energy_distribution(&self) -> Vec<(i64, f64)> {
        self.inner.energy_distribution()
    }
}

/// A batch-means estimate.
#[pyclass(name = "Estimate", module = "isinglab", frozen, get_all)]
struct PyEstimate {
    observable: String,
    temperature: f64,
    mean: f64,
    std_error: f64,
    ess: f64,
    samples: u64,
    seed: u64,
}

#[pymethods]
impl PyEstimate {
    fn __repr__(&self) -> String {
        format!("Estimate({} = {} +- {})", self.observable, self.mean, self.std_error)
    }
}

/// A Markov chain on one lattice.
#[pyclass(name = "Chain", module = "isinglab")]
struct PyChain {
    inner: ChainState,
}

#[pymethods]
impl PyChain {
    #[new]
    #[pyo3(signature = (lattice, temperature, field = 0.0, q = None, seed = 0, start = "cold"))]
    fn new(lattice: &PyLattice, temperature: f64, field: f64, q: Option<u8>, seed: u64, start: &str) -> PyResult<Self> {
        let params = ModelParams::new(model(q)?, temperature, field).map_err(err)?;
        let start = match start {
            "cold" => Start::Cold,
            "random" => Start::Random,
            other => return Err(PyValueError::new_err(format!("unknown start {other:?}"))),
        };
        let inner = ChainState::start(lattice.inner.clone(), params, start, seed).map_err(err)?;
        Ok(PyChain { inner })
    }

    #[pyo3(signature = (n = 1))]
    fn metropolis(&mut self, n: u64) {
        for _ in 0..n {
            self.inner.metropolis_sweep();
        }
    }

    /// Flips one Wolff cluster and returns its size.
    fn wolff(&mut self) -> PyResult<usize> {
        self.inner.wolff_update().map_err(err)
    }

    #[getter]
    fn states(&self) -> Vec<i8> {
        self.inner.config().states().to_vec()
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy()
    }

    #[getter]
    fn sweeps(&self) -> u64 {
        self.inner.sweeps()
    }

    #[getter]
    fn acceptance_rate(&self) -> f64 {
        self.inner.acceptance_rate()
    }

    fn measure(&self, observable: &str) -> PyResult<f64> {
        Ok(self.inner.measure(&Observable::parse(observable).map_err(err)?))
    }

    /// Runs `n_sweeps` updates and returns one estimate per observable name
    /// (`m`, `abs_m`, `energy`, `spin:V`, `corr:V,W`, `window:...`).
    #[pyo3(signature = (observables, n_sweeps, burn_in, sampler = "metropolis", batches = 32, global_flip = false, conditional = false))]
    #[allow(clippy::too_many_arguments)]
    fn estimate(
        &mut self,
        py: Python<'_>,
        observables: Vec<String>,
        n_sweeps: u64,
        burn_in: u64,
        sampler: &str,
        batches: usize,
        global_flip: bool,
        conditional: bool,
    ) -> PyResult<Vec<PyEstimate>> {
        let sampler = match sampler {
            "metropolis" => Sampler::Metropolis,
            "wolff" => Sampler::Wolff,
            other => return Err(PyValueError::new_err(format!("unknown sampler {other:?}"))),
        };
        let obs = observables.iter().map(|o| Observable::parse(o)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let schedule = Schedule::new(sampler, n_sweeps, burn_in)
            .with_batches(batches)
            .with_global_flip(global_flip)
            .with_estimator(if conditional { Estimator::Conditional } else { Estimator::Raw });
        let chain = &mut self.inner;
        let estimates = py.detach(|| mcmc::estimate_many(chain, &obs, &schedule)).map_err(err)?;
        Ok(estimates
            .into_iter()
            .map(|e| PyEstimate {
                observable: e.observable,
                temperature: e.temperature,
                mean: e.mean,
                std_error: e.std_error,
                ess: e.ess,
                samples: e.samples,
                seed: e.seed,
            })
            .collect())
    }
}

#[pyfunction]
#[pyo3(signature = (q = 2.0))]
fn critical_temperature(q: f64) -> PyResult<f64> {
    analytic::critical_temperature(q).map_err(err)
}

#[pyfunction]
fn onsager_magnetization(temperature: f64) -> PyResult<f64> {
    analytic::onsager_magnetization(temperature).map_err(err)
}

/// Slope and intercept of `ln m` against `ln(T_c - T)`.
#[pyfunction]
#[pyo3(signature = (min_distance = 1e-4, max_distance = 5e-2, points = 50))]
fn onsager_exponent_fit(min_distance: f64, max_distance: f64, points: usize) -> PyResult<(f64, f64)> {
    let fit = analytic::onsager_exponent_fit(min_distance, max_distance, points).map_err(err)?;
    Ok((fit.slope, fit.intercept))
}

#[pyfunction]
fn chain_seed(master: u64, index: u64) -> u64 {
    mcmc::chain_seed(master, index)
}

/// Cluster label of every site and the cluster sizes.
#[pyfunction]
#[pyo3(signature = (lattice, states, q = None))]
fn decompose(lattice: &PyLattice, states: Vec<i8>, q: Option<u8>) -> PyResult<(Vec<u32>, Vec<usize>)> {
    let p = clusters::decompose(&config(lattice, states, q)?);
    Ok((p.labels, p.sizes))
}

/// Number of unequal edges of an Ising configuration.
#[pyfunction]
fn interface_area(lattice: &PyLattice, states: Vec<i8>) -> PyResult<usize> {
    Ok(clusters::interface(&config(lattice, states, None)?).map_err(err)?.area)
}

#[pymodule]
#[pyo3(name = "isinglab")]
fn isinglab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLattice>()?;
    m.add_class::<PyEnumeration>()?;
    m.add_class::<PyChain>()?;
    m.add_class::<PyEstimate>()?;
    m.add_function(wrap_pyfunction!(critical_temperature, m)?)?;
    m.add_function(wrap_pyfunction!(onsager_magnetization, m)?)?;
    m.add_function(wrap_pyfunction!(onsager_exponent_fit, m)?)?;
    m.add_function(wrap_pyfunction!(chain_seed, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(interface_area, m)?)?;
    Ok(())
}
