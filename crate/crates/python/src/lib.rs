//! Python bindings. Angles are radians, lengths millimetres.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use holegrasp::stability::{default_alpha_axis, default_beta_axis};
use holegrasp::{
    geometry, stability, stats, BetaBound, Catalog, ContactGeometry, FrictionSet, GraspConfig,
    GripperSpec, ObjectPose, ObjectSpec, StabilityMode, TrialRecord,
};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A hollow object: cylinder or rectangular prism with a through hole.
#[pyclass(name = "Object", module = "pyholegrasp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyObject {
    inner: ObjectSpec,
}

#[pymethods]
impl PyObject {
    /// `b` defaults to `outer_diameter / 2` (a cylinder).
    #[new]
    #[pyo3(signature = (name, a, outer_diameter, inner_diameter, b=None, mass=1.0))]
    fn new(
        name: &str,
        a: f64,
        outer_diameter: f64,
        inner_diameter: f64,
        b: Option<f64>,
        mass: f64,
    ) -> PyResult<Self> {
        let spec = match b {
            None => ObjectSpec::cylinder(name, a, outer_diameter, inner_diameter),
            Some(b) => ObjectSpec::prism(name, a, b, outer_diameter, inner_diameter),
        }
        .and_then(|o| o.with_mass(mass))
        .map_err(value_error)?;
        Ok(PyObject { inner: spec })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }
    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }
    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }
    #[getter]
    fn outer_diameter(&self) -> f64 {
        self.inner.outer_diameter
    }
    #[getter]
    fn inner_diameter(&self) -> f64 {
        self.inner.inner_diameter
    }
    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass
    }

    fn __repr__(&self) -> String {
        let o = &self.inner;
        format!(
            "Object(name={:?}, a={}, b={}, outer_diameter={}, inner_diameter={}, mass={})",
            o.name, o.a, o.b, o.outer_diameter, o.inner_diameter, o.mass
        )
    }
}

/// Finger offset `x` and hole depth `delta` for one object and gripper.
#[pyclass(name = "Geometry", module = "pyholegrasp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGeometry {
    inner: ContactGeometry,
}

#[pymethods]
impl PyGeometry {
    /// Derives the geometry from finger width `w` and gripper stroke.
    #[new]
    #[pyo3(signature = (object, w, stroke=82.0))]
    fn new(object: &PyObject, w: f64, stroke: f64) -> PyResult<Self> {
        let gripper = GripperSpec::new(w, stroke).map_err(value_error)?;
        let inner = ContactGeometry::new(&gripper, &object.inner).map_err(value_error)?;
        Ok(PyGeometry { inner })
    }

    #[getter]
    fn x(&self) -> f64 {
        self.inner.x
    }
    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    fn __repr__(&self) -> String {
        format!("Geometry(x={}, delta={})", self.inner.x, self.inner.delta)
    }
}

#[pyclass(name = "Friction", module = "pyholegrasp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFriction {
    inner: FrictionSet,
}

#[pymethods]
impl PyFriction {
    #[new]
    #[pyo3(signature = (mu_s=0.0, mu_h=0.0, mu_g=0.0))]
    fn new(mu_s: f64, mu_h: f64, mu_g: f64) -> PyResult<Self> {
        let inner = FrictionSet::new(mu_s, mu_h, mu_g).map_err(value_error)?;
        Ok(PyFriction { inner })
    }

    #[getter]
    fn mu_s(&self) -> f64 {
        self.inner.mu_s
    }
    #[getter]
    fn mu_h(&self) -> f64 {
        self.inner.mu_h
    }
    #[getter]
    fn mu_g(&self) -> f64 {
        self.inner.mu_g
    }

    fn __repr__(&self) -> String {
        let f = &self.inner;
        format!("Friction(mu_s={}, mu_h={}, mu_g={})", f.mu_s, f.mu_h, f.mu_g)
    }
}

/// Bundled object and its gripper geometry.
#[pyfunction]
fn catalog_entry(name: &str) -> PyResult<(PyObject, PyGeometry)> {
    let e = Catalog::bundled().get(name).map_err(value_error)?;
    Ok((PyObject { inner: e.object }, PyGeometry { inner: e.geometry }))
}

#[pyfunction]
fn catalog_names() -> Vec<String> {
    Catalog::bundled().names().map(String::from).collect()
}

#[pyfunction]
#[pyo3(signature = (object, w, stroke=82.0))]
fn compute_x(object: &PyObject, w: f64, stroke: f64) -> PyResult<f64> {
    let gripper = GripperSpec::new(w, stroke).map_err(value_error)?;
    geometry::compute_x(&gripper, &object.inner).map_err(value_error)
}

#[pyfunction]
fn compute_delta(object: &PyObject, x: f64) -> PyResult<f64> {
    geometry::compute_delta(&object.inner, x).map_err(value_error)
}

fn grasp(object: &PyObject, geometry: &PyGeometry, l_a: f64, alpha: f64, beta: f64) -> PyResult<GraspConfig> {
    GraspConfig::new(l_a, alpha, beta, geometry.inner, &object.inner).map_err(value_error)
}

fn mode(text: &str) -> PyResult<StabilityMode> {
    text.parse().map_err(value_error)
}

/// Six `(label, m, fx, fy)` tuples in the order S1, S2, H1, H2, G1, G2.
#[pyfunction]
fn basis_wrenches(
    object: &PyObject,
    geometry: &PyGeometry,
    friction: &PyFriction,
    l_a: f64,
    alpha: f64,
    beta: f64,
) -> PyResult<Vec<(String, f64, f64, f64)>> {
    let cfg = grasp(object, geometry, l_a, alpha, beta)?;
    Ok(holegrasp::basis_wrenches(&object.inner, &cfg, &friction.inner)
        .labeled()
        .map(|(label, w)| (label.to_string(), w.m, w.fx, w.fy))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (object, geometry, friction, l_a, alpha, beta, mode="force_balance"))]
fn is_stable(
    object: &PyObject,
    geometry: &PyGeometry,
    friction: &PyFriction,
    l_a: f64,
    alpha: f64,
    beta: f64,
    mode: &str,
) -> PyResult<bool> {
    let cfg = grasp(object, geometry, l_a, alpha, beta)?;
    holegrasp::is_stable(&object.inner, &cfg, &friction.inner, self::mode(mode)?).map_err(value_error)
}

/// Returns a dict with `alpha` and `beta` axes (radians) and `feasible`,
/// a list of rows, one per alpha.
#[pyfunction]
#[pyo3(signature = (object, geometry, friction, l_a, mode="force_balance", alpha_step_deg=0.5, beta_step_deg=0.5))]
#[allow(clippy::too_many_arguments)]
fn region_sweep<'py>(
    py: Python<'py>,
    object: &PyObject,
    geometry: &PyGeometry,
    friction: &PyFriction,
    l_a: f64,
    mode: &str,
    alpha_step_deg: f64,
    beta_step_deg: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = self::mode(mode)?;
    let (alphas, betas) = (default_alpha_axis(alpha_step_deg), default_beta_axis(beta_step_deg));
    let map = py
        .detach(|| {
            stability::region_sweep(&object.inner, geometry.inner, &friction.inner, l_a, &alphas, &betas, mode)
        })
        .map_err(value_error)?;
    let rows: Vec<Vec<bool>> = (0..map.alpha_axis.len()).map(|i| map.alpha_row(i).to_vec()).collect();
    let d = PyDict::new(py);
    d.set_item("l_a", map.l_a)?;
    d.set_item("mode", map.mode.as_str())?;
    d.set_item("alpha", map.alpha_axis)?;
    d.set_item("beta", map.beta_axis)?;
    d.set_item("feasible", rows)?;
    Ok(d)
}

/// `(status, value)`: status is `finite`, `not_finite` or
/// `infeasible_at_start`; value is the bound in radians or None.
#[pyfunction]
fn beta_upper_bound(
    object: &PyObject,
    geometry: &PyGeometry,
    friction: &PyFriction,
    l_a: f64,
    alpha: f64,
) -> PyResult<(&'static str, Option<f64>)> {
    grasp(object, geometry, l_a, alpha, 0.0)?;
    let bound = holegrasp::beta_upper_bound(&object.inner, geometry.inner, &friction.inner, l_a, alpha)
        .map_err(value_error)?;
    Ok(match bound {
        BetaBound::NotFinite => ("not_finite", None),
        BetaBound::Finite { value, .. } => ("finite", Some(value)),
        BetaBound::InfeasibleAtStart => ("infeasible_at_start", None),
    })
}

/// Wilson score interval `(lower, upper)` as proportions.
#[pyfunction]
#[pyo3(signature = (successes, trials, z=stats::Z_95))]
fn wilson_ci(successes: u64, trials: u64, z: f64) -> PyResult<(f64, f64)> {
    let ci = holegrasp::wilson_ci(&TrialRecord::new(successes, trials).with_z(z)).map_err(value_error)?;
    Ok((ci.lower, ci.upper))
}

/// Pivot about the ground corner. Returns a dict with `p_c`, `r`,
/// `theta_rad` and `waypoints` as `(x, y, phi)` tuples.
#[pyfunction]
#[pyo3(signature = (object, geometry, l_a, alpha, theta=std::f64::consts::FRAC_PI_2, waypoints=64, corner_x=0.0))]
#[allow(clippy::too_many_arguments)]
fn plan_pivot<'py>(
    py: Python<'py>,
    object: &PyObject,
    geometry: &PyGeometry,
    l_a: f64,
    alpha: f64,
    theta: f64,
    waypoints: usize,
    corner_x: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = grasp(object, geometry, l_a, alpha, 0.0)?;
    let pose = ObjectPose::resting(&object.inner, corner_x);
    let plan = holegrasp::plan_pivot(&object.inner, &cfg, &pose, theta, waypoints).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("p_c", (plan.p_c[0], plan.p_c[1]))?;
    d.set_item("r", plan.r)?;
    d.set_item("theta_rad", plan.theta)?;
    let wps: Vec<(f64, f64, f64)> = plan.waypoints.iter().map(|w| (w.x, w.y, w.phi)).collect();
    d.set_item("waypoints", wps)?;
    Ok(d)
}

#[pymodule]
fn pyholegrasp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyObject>()?;
    m.add_class::<PyGeometry>()?;
    m.add_class::<PyFriction>()?;
    m.add_function(wrap_pyfunction!(catalog_entry, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_names, m)?)?;
    m.add_function(wrap_pyfunction!(compute_x, m)?)?;
    m.add_function(wrap_pyfunction!(compute_delta, m)?)?;
    m.add_function(wrap_pyfunction!(basis_wrenches, m)?)?;
    m.add_function(wrap_pyfunction!(is_stable, m)?)?;
    m.add_function(wrap_pyfunction!(region_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(beta_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(wilson_ci, m)?)?;
    m.add_function(wrap_pyfunction!(plan_pivot, m)?)?;
    Ok(())
}
