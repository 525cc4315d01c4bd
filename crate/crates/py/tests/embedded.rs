use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<R>(f: impl FnOnce(Python<'_>, &Bound<'_, PyDict>) -> R) -> R {
    Python::attach(|py| {
        let m = PyModule::new(py, "toposlab_py").unwrap();
        toposlab_py::toposlab_py(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("tl", m).unwrap();
        f(py, &globals)
    })
}

fn eval(code: &str) -> String {
    with_module(|py, g| {
        let c = std::ffi::CString::new(code).unwrap();
        py.eval(&c, Some(g), None).unwrap().str().unwrap().to_string()
    })
}

#[test]
fn sites_and_omega() {
    Python::initialize();
    assert_eq!(eval("sorted(tl.Site('parallel_pair').omega_sizes().items())"), "[('E', 5), ('V', 2)]");
    assert_eq!(eval("tl.Site('delta1').objects()"), "['[0]', '[1]']");
}

#[test]
fn presheaf_algebra() {
    Python::initialize();
    assert_eq!(eval("tl.Site('zmod2').omega().total()"), "2");
    assert_eq!(eval("tl.Site('reflexive_graph').yoneda('E').is_decidable()"), "False");
    assert_eq!(eval("tl.Site('zmod2').yoneda('*').is_decidable()"), "True");
    assert_eq!(
        eval("(lambda g: g.yoneda('V').count_hom(g.omega()))(tl.Site('reflexive_graph'))"),
        "2"
    );
}

#[test]
fn errors_become_value_errors() {
    Python::initialize();
    with_module(|py, g| {
        let e = py.eval(c"tl.Site('nosuch')", Some(g), None).unwrap_err();
        assert!(e.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
}

#[test]
fn cli_round_trip() {
    Python::initialize();
    assert_eq!(eval("tl.main(['check', 'nosuch'])[0]"), "2");
    assert_eq!(eval("tl.check('sets', suite='tau-negation')['verdicts'][0]['status']"), "pass");
}
