//! Python bindings: results cross the boundary as plain dicts and lists.

use euler_workbench::eulersys;
use euler_workbench::field::AbelianField;
use euler_workbench::iwasawa::{self, QuotientOrder, ZpPowerSeries};
use num_bigint::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::{json, Value};

fn err(e: euler_workbench::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<PyObject> {
    let json = py.import_bound("json")?;
    Ok(json.call_method1("loads", (v.to_string(),))?.unbind())
}

fn field_info(e: &AbelianField) -> Value {
    json!({
        "label": e.label(),
        "conductor": e.conductor(),
        "degree": e.degree(),
        "is_real": e.is_real(),
        "rank": e.rank(),
        "subgroup": e.subgroup(),
    })
}

/// Abelian field of conductor dividing m fixed by the subgroup of (ℤ/m)ˣ generated by `generators`.
#[pyfunction]
#[pyo3(signature = (m, generators=Vec::new()))]
fn field(py: Python<'_>, m: u64, generators: Vec<u64>) -> PyResult<PyObject> {
    let e = AbelianField::new(m, &generators).map_err(err)?;
    to_py(py, &field_info(&e))
}

/// Every abelian field of conductor ≤ max_conductor.
#[pyfunction]
fn fields(py: Python<'_>, max_conductor: u64) -> PyResult<PyObject> {
    let v: Vec<Value> = euler_workbench::field::enumerate_fields(max_conductor).iter().map(field_info).collect();
    to_py(py, &Value::Array(v))
}

/// Rubin–Stark regulator identity for one real field.
#[pyfunction]
#[pyo3(signature = (m, generators=Vec::new(), bits=128))]
fn check_rubin_stark(py: Python<'_>, m: u64, generators: Vec<u64>, bits: u32) -> PyResult<PyObject> {
    let e = AbelianField::new(m, &generators).map_err(err)?;
    let r = py.allow_threads(|| eulersys::check_rubin_stark_identity(&e, bits)).map_err(err)?;
    to_py(py, &r.to_json())
}

/// Distribution relations on all nested pairs of fields of conductor ≤ max_conductor.
#[pyfunction]
fn check_distributions(py: Python<'_>, max_conductor: u64) -> PyResult<PyObject> {
    let reports = py
        .allow_threads(|| eulersys::rubin_stark_system(max_conductor).and_then(|c| eulersys::check_all_distributions(&c)))
        .map_err(err)?;
    to_py(py, &Value::Array(reports.iter().map(|r| r.to_json()).collect()))
}

/// Weierstrass preparation of a series over ℤ/p^n[T]/(T^d).
#[pyfunction]
fn weierstrass_prep(py: Python<'_>, p: u64, n: u32, d: u32, coeffs: Vec<i64>) -> PyResult<PyObject> {
    let f = ZpPowerSeries::from_i64(p, n, d, &coeffs).map_err(err)?;
    let w = iwasawa::weierstrass_prep(&f).map_err(err)?;
    let v = json!({
        "mu": w.mu,
        "lambda": w.lambda(),
        "distinguished": w.distinguished_reduced().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "p_precision": w.p_precision,
        "unit": w.unit.to_json(),
    });
    to_py(py, &v)
}

/// ord_p |Λ/(g, h)|; None when the quotient is infinite.
#[pyfunction]
fn quotient_order(g: Vec<i64>, h: Vec<i64>, p: u64) -> PyResult<Option<u32>> {
    let big = |c: &[i64]| c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
    Ok(match iwasawa::quotient_order(&big(&g), &big(&h), p).map_err(err)? {
        QuotientOrder::Finite(k) => Some(k),
        QuotientOrder::Infinite => None,
    })
}

#[pymodule]
fn euler_workbench_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(field, m)?)?;
    m.add_function(wrap_pyfunction!(fields, m)?)?;
    m.add_function(wrap_pyfunction!(check_rubin_stark, m)?)?;
    m.add_function(wrap_pyfunction!(check_distributions, m)?)?;
    m.add_function(wrap_pyfunction!(weierstrass_prep, m)?)?;
    m.add_function(wrap_pyfunction!(quotient_order, m)?)?;
    Ok(())
}
