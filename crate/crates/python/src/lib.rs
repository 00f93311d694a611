//! Python module `pytwistorlab`: manifolds, flows, adapted structures, twistor
//! sections, the metric layer and the verification suites.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use twistorlab::adapted::{self, TangentPoint};
use twistorlab::cli::{self, RunConfig, Suite};
use twistorlab::geometry::{self, ManifoldSpec, PhaseState, DEFAULT_STEPS};
use twistorlab::metric;
use twistorlab::nahm::{self, NahmConfig};
use twistorlab::twistor::{self, Patch, TwistorPoint};

create_exception!(pytwistorlab, TwistorlabError, PyException);

fn err(e: twistorlab::Error) -> PyErr {
    TwistorlabError::new_err(e.to_string())
}

fn patch(name: &str) -> PyResult<Patch> {
    match name {
        "zero" => Ok(Patch::Zero),
        "infinity" => Ok(Patch::Infinity),
        other => Err(TwistorlabError::new_err(format!("unknown patch '{}'", other))),
    }
}

fn patch_name(p: Patch) -> &'static str {
    match p {
        Patch::Zero => "zero",
        Patch::Infinity => "infinity",
    }
}

fn rows<T: Copy + nalgebra::Scalar>(m: &nalgebra::DMatrix<T>) -> Vec<Vec<T>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

/// A manifold with a torsion-free or torsion-carrying connection and an
/// optional metric.
#[pyclass(frozen, module = "pytwistorlab")]
struct Manifold {
    spec: ManifoldSpec,
    name: String,
}

#[pymethods]
impl Manifold {
    #[staticmethod]
    fn from_catalog(name: &str) -> PyResult<Self> {
        let entry = twistorlab::catalog::lookup(name).map_err(err)?;
        entry.check().map_err(err)?;
        Ok(Manifold {
            spec: entry.spec,
            name: entry.name.to_string(),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec = ManifoldSpec::from_json(text).map_err(err)?;
        spec.validate().map_err(err)?;
        Ok(Manifold {
            spec,
            name: "spec".into(),
        })
    }

    fn to_json(&self) -> String {
        self.spec.to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.spec.dim
    }

    #[getter]
    fn name(&self) -> &str {
        &self.name
    }

    #[getter]
    fn has_metric(&self) -> bool {
        self.spec.has_metric()
    }

    fn center(&self) -> Vec<f64> {
        self.spec.center()
    }

    fn __repr__(&self) -> String {
        format!("Manifold('{}', dim={})", self.name, self.spec.dim)
    }
}

/// A point of twistor space in one of the two patches.
#[pyclass(frozen, get_all, module = "pytwistorlab")]
struct Point {
    patch: String,
    y: Vec<Complex64>,
    beta: Vec<Complex64>,
    zeta: Complex64,
}

impl Point {
    fn from_core(tp: TwistorPoint) -> Self {
        Point {
            patch: patch_name(tp.patch).into(),
            y: tp.y,
            beta: tp.beta,
            zeta: tp.zeta,
        }
    }
}

#[pymethods]
impl Point {
    fn __repr__(&self) -> String {
        format!("Point(patch='{}', zeta={})", self.patch, self.zeta)
    }
}

/// A holomorphic section of the twistor fibration.
#[pyclass(frozen, module = "pytwistorlab")]
struct Section {
    inner: twistor::Section,
    spec: ManifoldSpec,
}

#[pymethods]
impl Section {
    /// Value at `zeta` in the named patch ("zero" or "infinity").
    fn eval(&self, patch_name: &str, zeta: Complex64) -> PyResult<Point> {
        let tp = self.inner.eval(patch(patch_name)?, zeta).map_err(err)?;
        Ok(Point::from_core(tp))
    }

    /// `(gluing, reality)` defects over `count` points of the unit circle.
    #[pyo3(signature = (count=8, steps=DEFAULT_STEPS))]
    fn residuals(&self, count: usize, steps: usize) -> (f64, f64) {
        let r = twistor::section_residuals(&self.spec, &self.inner, &twistor::circle_grid(1.0, count), steps);
        (r.gluing, r.reality)
    }

    fn kind(&self) -> String {
        serde_json::to_string(&self.inner.kind).expect("section kinds serialize")
    }
}

#[pyfunction]
fn catalog() -> Vec<String> {
    cli::list_catalog().into_iter().map(|l| l.name).collect()
}

/// Complex-time geodesic flow; returns `(y, beta)` at time `t`.
#[pyfunction]
#[pyo3(signature = (m, y, beta, t, steps=DEFAULT_STEPS))]
fn geodesic_flow(
    m: &Manifold,
    y: Vec<Complex64>,
    beta: Vec<Complex64>,
    t: Complex64,
    steps: usize,
) -> PyResult<(Vec<Complex64>, Vec<Complex64>)> {
    let s = geometry::geodesic_flow(&m.spec, &PhaseState::new(y, beta), t, steps).map_err(err)?;
    Ok((s.y, s.beta))
}

/// The adapted complex structure at `(x, v)` as a `2n x 2n` nested list.
#[pyfunction]
#[pyo3(signature = (m, x, v, steps=DEFAULT_STEPS))]
fn adapted_j(m: &Manifold, x: Vec<f64>, v: Vec<f64>, steps: usize) -> PyResult<Vec<Vec<f64>>> {
    let j = adapted::adapted_j(&m.spec, &TangentPoint::new(x, v), steps).map_err(err)?;
    Ok(rows(&j.j))
}

/// Cauchy-Riemann defect of the leaf through `(x, v)` over a `(p, q)` grid.
#[pyfunction]
#[pyo3(signature = (m, x, v, p_max=1.0, q_max=0.3, steps=DEFAULT_STEPS))]
fn leaf_residual(m: &Manifold, x: Vec<f64>, v: Vec<f64>, p_max: f64, q_max: f64, steps: usize) -> PyResult<f64> {
    let grid = adapted::leaf_grid(p_max, q_max, 5, 3);
    adapted::leaf_holomorphicity_residual(&m.spec, &x, &v, &grid, steps).map_err(err)
}

/// Zero-patch point to infinity-patch point.
#[pyfunction]
#[pyo3(signature = (m, y, beta, zeta, steps=DEFAULT_STEPS))]
fn transition(m: &Manifold, y: Vec<Complex64>, beta: Vec<Complex64>, zeta: Complex64, steps: usize) -> PyResult<Point> {
    let tp = TwistorPoint::new(Patch::Zero, y, beta, zeta);
    Ok(Point::from_core(twistor::transition(&m.spec, &tp, steps).map_err(err)?))
}

#[pyfunction]
#[pyo3(signature = (m, x, v, steps=DEFAULT_STEPS))]
fn point_section(m: &Manifold, x: Vec<f64>, v: Vec<f64>, steps: usize) -> PyResult<Section> {
    let inner = twistor::point_section(&m.spec, &TangentPoint::new(x, v), steps).map_err(err)?;
    Ok(Section {
        inner,
        spec: m.spec.clone(),
    })
}

/// Section generated by Nahm data at `x` (flat connections only).
#[pyfunction]
#[pyo3(signature = (m, x, v1, v2, v3, frame_steps=32))]
fn nahm_section(
    m: &Manifold,
    x: Vec<f64>,
    v1: Vec<f64>,
    v2: Vec<f64>,
    v3: Vec<f64>,
    frame_steps: usize,
) -> PyResult<Section> {
    let config = NahmConfig {
        frame_steps,
        ..NahmConfig::default()
    };
    let inner = nahm::nahm_section(&m.spec, &x, &v1, &v2, &v3, &config).map_err(err)?;
    Ok(Section {
        inner,
        spec: m.spec.clone(),
    })
}

#[pyfunction]
fn h0_profile(n: usize) -> PyResult<Vec<usize>> {
    Ok(twistor::h0_profile(n).map_err(err)?.to_vec())
}

/// `omega1, omega2, omega3` and `g` at `x` as nested lists.
#[pyfunction]
fn omega_triple<'py>(py: Python<'py>, m: &Manifold, x: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let t = metric::omega_triple_at_x(&m.spec, &x).map_err(err)?;
    let d = PyDict::new(py);
    for (i, w) in t.omega.iter().enumerate() {
        d.set_item(format!("omega{}", i + 1), rows(w))?;
    }
    d.set_item("g", rows(&t.g))?;
    d.set_item("reconstruction_defect", t.reconstruction_defect())?;
    d.set_item("fit_residual", t.fit_residual)?;
    Ok(d)
}

#[pyfunction]
fn signature(m: &Manifold, x: Vec<f64>) -> PyResult<(usize, usize)> {
    metric::signature_at_x(&m.spec, &x).map_err(err)
}

/// Runs a verification suite on a catalog example; one dict per check.
#[pyfunction]
#[pyo3(signature = (suite, example, steps=DEFAULT_STEPS, tol_scale=1.0))]
fn verify<'py>(
    py: Python<'py>,
    suite: &str,
    example: &str,
    steps: usize,
    tol_scale: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let suite = Suite::parse(suite).map_err(err)?;
    let target = cli::resolve_target(Some(example), None).map_err(err)?;
    let config = RunConfig {
        steps,
        tol_scale,
        ..RunConfig::default()
    };
    let reports = py.detach(|| cli::run_suite(suite, &target, &config)).map_err(err)?;
    reports
        .into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("case", r.case)?;
            d.set_item("residual", r.residual)?;
            d.set_item("tolerance", r.tolerance)?;
            d.set_item("pass", r.pass)?;
            d.set_item("detail", r.detail)?;
            d.set_item("timing", r.timing)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn pytwistorlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TwistorlabError", m.py().get_type::<TwistorlabError>())?;
    m.add_class::<Manifold>()?;
    m.add_class::<Point>()?;
    m.add_class::<Section>()?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic_flow, m)?)?;
    m.add_function(wrap_pyfunction!(adapted_j, m)?)?;
    m.add_function(wrap_pyfunction!(leaf_residual, m)?)?;
    m.add_function(wrap_pyfunction!(transition, m)?)?;
    m.add_function(wrap_pyfunction!(point_section, m)?)?;
    m.add_function(wrap_pyfunction!(nahm_section, m)?)?;
    m.add_function(wrap_pyfunction!(h0_profile, m)?)?;
    m.add_function(wrap_pyfunction!(omega_triple, m)?)?;
    m.add_function(wrap_pyfunction!(signature, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
