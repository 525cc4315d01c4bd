//! Python bindings.
//!
//! Sites and presheaves are wrapped as classes. Reports from the checker and
//! the inspector come back as plain dicts built from their JSON form.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use toposlab::cli::{self, CheckArgs, Format, InspectArgs};
use toposlab::decidable::is_decidable;
use toposlab::fincat::standard_site;
use toposlab::io::{self, SiteRef};
use toposlab::presheaf::{binary_product, coproduct, Exponential, DEFAULT_BUDGET};
use toposlab::sublattice::{sheaf_status, sheafify};
use toposlab::theorems::list_statements;
use toposlab::{FinCategory, PresheafTopos};

fn err(e: toposlab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A finite category, by standard name or as JSON.
#[pyclass(frozen, module = "toposlab_py")]
pub struct Site {
    inner: Arc<FinCategory>,
    name: Option<String>,
}

#[pymethods]
impl Site {
    #[new]
    fn new(source: &str) -> PyResult<Site> {
        let t = source.trim();
        if t.starts_with('{') {
            let c = io::parse_site(t, "<site>").map_err(err)?;
            Ok(Site { inner: Arc::new(c), name: None })
        } else {
            let c = standard_site(t).map_err(err)?;
            Ok(Site { inner: Arc::new(c), name: Some(t.to_string()) })
        }
    }

    fn objects(&self) -> Vec<String> {
        self.inner.objects().map(|c| self.inner.object_name(c).to_string()).collect()
    }

    /// `(name, source, target)` for every morphism, identities included.
    fn morphisms(&self) -> Vec<(String, String, String)> {
        let s = &self.inner;
        s.morphisms()
            .map(|f| {
                (
                    s.morphism_name(f).to_string(),
                    s.object_name(s.src(f)).to_string(),
                    s.object_name(s.tgt(f)).to_string(),
                )
            })
            .collect()
    }

    /// Number of sieves on each object.
    fn omega_sizes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = self.topos();
        let d = PyDict::new(py);
        for c in self.inner.objects() {
            d.set_item(self.inner.object_name(c), t.omega().omega.size(c))?;
        }
        Ok(d)
    }

    fn is_boolean(&self) -> bool {
        self.topos().is_boolean()
    }

    fn terminal(&self) -> Presheaf {
        self.wrap(toposlab::Presheaf::terminal(&self.inner))
    }

    fn initial(&self) -> Presheaf {
        self.wrap(toposlab::Presheaf::initial(&self.inner))
    }

    fn omega(&self) -> Presheaf {
        self.wrap(self.topos().omega().omega.clone())
    }

    fn yoneda(&self, object: &str) -> PyResult<Presheaf> {
        let c = self.inner.object_index(object).map_err(err)?;
        Ok(self.wrap(toposlab::Presheaf::yoneda(&self.inner, c)))
    }

    /// Parses a presheaf over this site; a site named in the JSON wins.
    fn presheaf(&self, json: &str) -> PyResult<Presheaf> {
        let x = io::parse_presheaf(json, "<presheaf>", Some(&self.inner)).map_err(err)?;
        Ok(Presheaf { inner: x, site: self.site_ref() })
    }

    fn to_json(&self) -> String {
        io::site_to_json(&self.inner)
    }

    fn __repr__(&self) -> String {
        match &self.name {
            Some(n) => format!("Site({n:?})"),
            None => format!(
                "Site(<{} objects, {} morphisms>)",
                self.inner.num_objects(),
                self.inner.num_morphisms()
            ),
        }
    }
}

impl Site {
    fn topos(&self) -> Arc<PresheafTopos> {
        PresheafTopos::new(self.name.clone().unwrap_or_else(|| "site".into()), (*self.inner).clone())
    }

    fn site_ref(&self) -> Option<SiteRef> {
        Some(match &self.name {
            Some(n) => SiteRef::Named(n.clone()),
            None => SiteRef::Inline(self.inner.spec()),
        })
    }

    fn wrap(&self, x: toposlab::Presheaf) -> Presheaf {
        Presheaf { inner: x, site: self.site_ref() }
    }
}

/// A presheaf on a finite site.
#[pyclass(frozen, module = "toposlab_py")]
pub struct Presheaf {
    inner: toposlab::Presheaf,
    site: Option<SiteRef>,
}

#[pymethods]
impl Presheaf {
    /// Parses presheaf JSON that names its own site.
    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Presheaf> {
        let spec: io::PresheafSpec =
            serde_json::from_str(json).map_err(|e| PyValueError::new_err(format!("<presheaf>: {e}")))?;
        let x = io::presheaf_from_spec(&spec, "<presheaf>", None).map_err(err)?;
        Ok(Presheaf { inner: x, site: spec.site })
    }

    fn sizes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.site();
        let d = PyDict::new(py);
        for c in s.objects() {
            d.set_item(s.object_name(c), self.inner.size(c))?;
        }
        Ok(d)
    }

    fn total(&self) -> usize {
        self.inner.total()
    }

    fn is_decidable(&self) -> bool {
        is_decidable(&self.inner).decidable
    }

    /// `{"separated": .., "sheaf": .., "witness": ..}` for double negation.
    #[pyo3(signature = (max_enum = DEFAULT_BUDGET))]
    fn sheaf_status<'py>(&self, py: Python<'py>, max_enum: u64) -> PyResult<Bound<'py, PyAny>> {
        let t = self.topos(max_enum);
        let st = sheaf_status(&self.inner, t.negneg(), max_enum).map_err(err)?;
        to_py(py, &st)
    }

    fn sheafify(&self) -> PyResult<Presheaf> {
        let t = self.topos(DEFAULT_BUDGET);
        let s = sheafify(&self.inner, &t).map_err(err)?;
        Ok(self.wrap(s.sheaf))
    }

    fn product(&self, other: &Presheaf) -> PyResult<Presheaf> {
        self.same_site(other)?;
        Ok(self.wrap(binary_product(&self.inner, &other.inner).apex))
    }

    fn coproduct(&self, other: &Presheaf) -> PyResult<Presheaf> {
        self.same_site(other)?;
        let site = self.inner.site();
        Ok(self.wrap(coproduct(site, &[self.inner.clone(), other.inner.clone()]).apex))
    }

    /// `other ^ self`.
    #[pyo3(signature = (other, max_enum = DEFAULT_BUDGET))]
    fn exponential(&self, other: &Presheaf, max_enum: u64) -> PyResult<Presheaf> {
        self.same_site(other)?;
        let e = Exponential::new(&self.inner, &other.inner, max_enum).map_err(err)?;
        Ok(self.wrap(e.object))
    }

    /// Number of natural transformations `self -> other`.
    #[pyo3(signature = (other, max_enum = DEFAULT_BUDGET))]
    fn count_hom(&self, other: &Presheaf, max_enum: u64) -> PyResult<u64> {
        self.same_site(other)?;
        self.topos(max_enum).count_hom(&self.inner, &other.inner).map_err(err)
    }

    fn is_isomorphic(&self, other: &Presheaf) -> PyResult<bool> {
        if !Arc::ptr_eq(self.inner.site(), other.inner.site()) && self.inner.site() != other.inner.site() {
            return Ok(false);
        }
        let found = self.topos(DEFAULT_BUDGET).find_iso(&self.inner, &other.inner).map_err(err)?;
        Ok(found.is_some())
    }

    fn to_json(&self) -> String {
        io::presheaf_to_json(&self.inner, self.site.clone())
    }

    fn __eq__(&self, other: &Presheaf) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        let s = self.inner.site();
        let sizes: Vec<String> = s
            .objects()
            .map(|c| format!("{}:{}", s.object_name(c), self.inner.size(c)))
            .collect();
        format!("Presheaf({})", sizes.join(" "))
    }
}

impl Presheaf {
    fn topos(&self, budget: u64) -> Arc<PresheafTopos> {
        PresheafTopos::with_budget("presheaf", (**self.inner.site()).clone(), budget)
    }

    fn wrap(&self, x: toposlab::Presheaf) -> Presheaf {
        Presheaf { inner: x, site: self.site.clone() }
    }

    fn same_site(&self, other: &Presheaf) -> PyResult<()> {
        if Arc::ptr_eq(self.inner.site(), other.inner.site()) || self.inner.site() == other.inner.site() {
            Ok(())
        } else {
            Err(PyValueError::new_err("presheaves live on different sites"))
        }
    }
}

/// The standard sites with their sizes and sieve counts.
#[pyfunction]
fn sites(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &cli::cmd_sites().map_err(err)?)
}

/// The catalogue of statements.
#[pyfunction]
fn statements(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &list_statements())
}

/// Runs statements over a target and returns the suite report.
#[pyfunction]
#[pyo3(signature = (target = "corpus", suite = "all", bound = None, seed = 0, max_enum = DEFAULT_BUDGET))]
fn check<'py>(
    py: Python<'py>,
    target: &str,
    suite: &str,
    bound: Option<u64>,
    seed: u64,
    max_enum: u64,
) -> PyResult<Bound<'py, PyAny>> {
    if bound == Some(0) {
        return Err(PyValueError::new_err("bound must be at least 1"));
    }
    let args = CheckArgs {
        target: target.into(),
        suite: suite.into(),
        bound,
        seed,
        max_enum,
        format: Format::Json,
    };
    let report = py.detach(|| cli::cmd_check(&args)).map_err(err)?;
    to_py(py, &report)
}

/// Describes one object: `0`, `1`, `omega`, `y:<object>`, a path or inline JSON.
#[pyfunction]
#[pyo3(signature = (object, site = None, bound = None, max_enum = DEFAULT_BUDGET))]
fn inspect<'py>(
    py: Python<'py>,
    object: &str,
    site: Option<&str>,
    bound: Option<u64>,
    max_enum: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let args = InspectArgs {
        object: object.into(),
        site: site.map(str::to_string),
        bound,
        max_enum,
        format: Format::Json,
    };
    let report = py.detach(|| cli::cmd_inspect(&args)).map_err(err)?;
    to_py(py, &report)
}

/// Runs the command line; returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn main(py: Python<'_>, args: Vec<String>) -> (i32, String, String) {
    py.detach(|| {
        let mut out = Vec::new();
        let mut errs = Vec::new();
        let argv = std::iter::once("toposlab".to_string()).chain(args);
        let code = cli::main_with(argv, &mut out, &mut errs);
        (
            code,
            String::from_utf8_lossy(&out).into_owned(),
            String::from_utf8_lossy(&errs).into_owned(),
        )
    })
}

#[pymodule]
pub fn toposlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Site>()?;
    m.add_class::<Presheaf>()?;
    m.add_function(wrap_pyfunction!(sites, m)?)?;
    m.add_function(wrap_pyfunction!(statements, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(inspect, m)?)?;
    m.add_function(wrap_pyfunction!(main, m)?)?;
    Ok(())
}
