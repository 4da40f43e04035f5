//! Python bindings. Rationals cross the boundary as `"num/den"` strings and
//! reports as canonical JSON text.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rotlab::engine::{enumerate_joint, Corruption};
use rotlab::extract::{check_choice_extraction, check_sender_extraction};
use rotlab::prob::{fmt_prob, parse_prob, statistical_distance as sd, Dist, Prob};
use rotlab::protolib::{self, ProtocolSpec};
use rotlab::report::{to_canonical_json, ExtractReport};
use rotlab::ucharness::{game_sweep, GameMode};
use rotlab::verifier::{FamilyMode, StandaloneReport, VerifyOptions};
use rotlab::Value;

const DEFAULT_BUDGET: u64 = 100_000_000;

fn prob(s: &str) -> PyResult<Prob> {
    parse_prob(s).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn runtime<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    to_canonical_json(v).map_err(runtime)
}

fn dist_of(atoms: Vec<(String, String)>) -> PyResult<Dist> {
    let mut w = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        w.push((Value::Sym(v), prob(&p)?));
    }
    Dist::new(w).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn case_of(s: &str) -> PyResult<Corruption> {
    Corruption::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown case `{s}`")))
}

/// Statistical distance between two distributions given as
/// `[(outcome, "num/den"), ...]`.
#[pyfunction]
fn statistical_distance(p: Vec<(String, String)>, q: Vec<(String, String)>) -> PyResult<String> {
    Ok(fmt_prob(&sd(&dist_of(p)?, &dist_of(q)?)))
}

/// `[(label, about), ...]` for every registered protocol.
#[pyfunction]
fn list_protocols() -> Vec<(String, String)> {
    protolib::list_protocols()
        .into_iter()
        .map(|(n, p, a)| (if p.is_empty() { n.to_string() } else { format!("{n}:{p}") }, a.to_string()))
        .collect()
}

/// One chosen-input OT run from random OT outputs: returns `(e, (z0, z1), output)`.
#[pyfunction]
fn derandomize(rot_a: (u8, u8), rot_b: (u8, u8), input_a: (u8, u8), choice: u8) -> (u8, (u8, u8), u8) {
    let r = protolib::derandomize(rot_a, rot_b, input_a, choice);
    (r.e, r.z, r.output)
}

#[pyclass(frozen, module = "rotlab_py")]
struct Protocol {
    inner: ProtocolSpec,
}

#[pymethods]
impl Protocol {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        protolib::lookup(spec)
            .map(|inner| Protocol { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    #[getter]
    fn secure(&self) -> bool {
        self.inner.secure
    }

    fn __repr__(&self) -> String {
        format!("Protocol('{}')", self.inner.label())
    }

    /// Names of the shipped attacks for a corruption case.
    fn adversaries(&self, case: &str) -> PyResult<Vec<String>> {
        Ok(self.inner.curated(case_of(case)?).into_iter().map(|a| a.name).collect())
    }

    /// Honest joint law of `(output_A, output_B)` as `[("(a,b)", "num/den"), ...]`.
    #[pyo3(signature = (budget = DEFAULT_BUDGET))]
    fn honest_outputs(&self, budget: u64) -> PyResult<Vec<(String, String)>> {
        let p = &self.inner;
        let joint = enumerate_joint(&p.alice, &p.bob, &p.channel, &p.limits, budget).map_err(runtime)?;
        let d = joint.marginal_dist(&["output_A", "output_B"]).map_err(runtime)?;
        Ok(d.iter().map(|(v, w)| (v.to_string(), fmt_prob(w))).collect())
    }

    /// Stand-alone report as JSON.
    #[pyo3(signature = (theta = "1", family = "exhaustive", budget = DEFAULT_BUDGET))]
    fn verify(&self, py: Python<'_>, theta: &str, family: &str, budget: u64) -> PyResult<String> {
        let mode = match family {
            "exhaustive" => FamilyMode::Exhaustive,
            "curated" => FamilyMode::Curated,
            other => return Err(PyValueError::new_err(format!("unknown family `{other}`"))),
        };
        let opts = VerifyOptions {
            threshold: prob(theta)?,
            bound: budget,
            mode,
            ..VerifyOptions::default()
        };
        let r = py.detach(|| StandaloneReport::build(&self.inner, &opts)).map_err(runtime)?;
        json(&r)
    }

    /// Sender and choice extraction checks as JSON.
    #[pyo3(signature = (theta = "1", budget = DEFAULT_BUDGET))]
    fn extract(&self, py: Python<'_>, theta: &str, budget: u64) -> PyResult<String> {
        let theta = prob(theta)?;
        let p = &self.inner;
        let r = py
            .detach(|| -> Result<ExtractReport, rotlab::extract::ExtractError> {
                Ok(ExtractReport {
                    protocol: p.label(),
                    theta: theta.clone(),
                    sender: check_sender_extraction(p, &theta, budget)?,
                    choice: check_choice_extraction(p, &theta, budget)?,
                })
            })
            .map_err(runtime)?;
        json(&r)
    }

    /// Distinguishing games for one case as a JSON list, one entry per
    /// shipped adversary (or only `adversary`).
    #[pyo3(signature = (case, adversary = None, mode = "exact", seed = None, samples = None, theta = "1", budget = DEFAULT_BUDGET))]
    #[allow(clippy::too_many_arguments)]
    fn uc_game(
        &self,
        py: Python<'_>,
        case: &str,
        adversary: Option<&str>,
        mode: &str,
        seed: Option<u64>,
        samples: Option<u64>,
        theta: &str,
        budget: u64,
    ) -> PyResult<String> {
        let case = case_of(case)?;
        let mode = match (mode, seed, samples) {
            ("exact", None, None) => GameMode::Exact,
            ("sampling", Some(seed), Some(samples)) => GameMode::Sampling { seed, samples },
            _ => {
                return Err(PyValueError::new_err(
                    "sampling mode requires seed and samples; exact mode forbids them",
                ))
            }
        };
        let mut family = self.inner.curated(case);
        if let Some(name) = adversary {
            family.retain(|a| a.name == name);
            if family.is_empty() {
                return Err(PyValueError::new_err(format!("no adversary named `{name}`")));
            }
        }
        let theta = prob(theta)?;
        let games = py
            .detach(|| game_sweep(&self.inner, case, &family, mode, &theta, budget))
            .map_err(runtime)?;
        json(&games)
    }
}

#[pymodule]
fn rotlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Protocol>()?;
    m.add_function(wrap_pyfunction!(statistical_distance, m)?)?;
    m.add_function(wrap_pyfunction!(list_protocols, m)?)?;
    m.add_function(wrap_pyfunction!(derandomize, m)?)?;
    Ok(())
}
