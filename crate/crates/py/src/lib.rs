//! Python bindings for mining, encoding, aggregation, training and the experiment matrix.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use histctx::aggregation::{
    aggregate_pair as agg_pair, aggregate_single as agg_single, output_dim as out_dim,
};
use histctx::experiment::{
    render_table as render, run_designed as designed, run_matrix as matrix, DesignedConfig,
    ExperimentConfig, ResultMatrix, TableFormat,
};
use histctx::fixture::{synth_fixture as synth, FixtureSpec};
use histctx::learning::{self, HeadKind};
use histctx::mining::{corpus_stats as stats, mine_repository, GitRepo};
use histctx::model::{load_corpus, save_corpus};
use histctx::{AggregationScheme, ContextSelection, Error};

create_exception!(histctx, HistctxError, PyException);

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => io.into(),
        Error::InvalidConfig(_)
        | Error::DimensionMismatch { .. }
        | Error::TooFewExamples { .. } => PyValueError::new_err(e.to_string()),
        other => HistctxError::new_err(other.to_string()),
    }
}

fn selection(contexts: &str) -> PyResult<ContextSelection> {
    contexts.parse().map_err(err)
}

fn scheme(name: &str) -> PyResult<AggregationScheme> {
    name.parse().map_err(err)
}

/// Mine `repo` into a corpus file; returns the method count.
#[pyfunction]
fn mine(repo: PathBuf, project: &str, out: PathBuf) -> PyResult<usize> {
    let git = GitRepo::open(&repo).map_err(err)?;
    let corpus = mine_repository(&git, project).map_err(err)?;
    save_corpus(&out, &corpus).map_err(err)?;
    Ok(corpus.len())
}

/// Plain-text statistics table for a corpus file.
#[pyfunction]
fn corpus_stats(corpus: PathBuf) -> PyResult<String> {
    let corpus = load_corpus(&corpus).map_err(err)?;
    Ok(stats(&corpus).map_err(err)?.render())
}

/// Build a fixture repository; `spec_json` defaults to a random spec. Returns commit hashes.
#[pyfunction]
#[pyo3(signature = (out, seed, spec_json=None))]
fn synth_fixture(out: PathBuf, seed: u64, spec_json: Option<&str>) -> PyResult<Vec<String>> {
    let spec = match spec_json {
        Some(text) => serde_json::from_str::<FixtureSpec>(text)
            .map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => FixtureSpec::random(seed),
    };
    Ok(synth(&spec, seed, &out).map_err(err)?.commits)
}

/// The five vectors of one method.
#[pyclass(name = "EncodedMethod", from_py_object)]
#[derive(Clone)]
struct PyEncodedMethod {
    inner: histctx::EncodedMethod,
}

#[pymethods]
impl PyEncodedMethod {
    #[new]
    fn new(
        code: Vec<f64>,
        history: Vec<f64>,
        caller: Vec<f64>,
        callee: Vec<f64>,
        days: f64,
    ) -> PyResult<Self> {
        let d = code.len();
        for v in [&history, &caller, &callee] {
            if v.len() != d {
                return Err(PyValueError::new_err(format!(
                    "expected {d} values, got {}",
                    v.len()
                )));
            }
        }
        Ok(Self {
            inner: histctx::EncodedMethod {
                code: code.into(),
                history: history.into(),
                caller: caller.into(),
                callee: callee.into(),
                days: vec![days].into(),
            },
        })
    }

    #[getter]
    fn code(&self) -> Vec<f64> {
        self.inner.code.0.clone()
    }

    #[getter]
    fn history(&self) -> Vec<f64> {
        self.inner.history.0.clone()
    }

    #[getter]
    fn caller(&self) -> Vec<f64> {
        self.inner.caller.0.clone()
    }

    #[getter]
    fn callee(&self) -> Vec<f64> {
        self.inner.callee.0.clone()
    }

    #[getter]
    fn days(&self) -> f64 {
        self.inner.days[0]
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }
}

/// Hashed TF-IDF encoder fitted on a corpus file.
#[pyclass(name = "Encoder")]
struct PyEncoder {
    model: histctx::VocabModel,
    corpus: Vec<histctx::ContextBundle>,
    budget: histctx::TokenBudget,
}

#[pymethods]
impl PyEncoder {
    #[new]
    #[pyo3(signature = (corpus, dim=128, seed=7, budget=512))]
    fn new(corpus: PathBuf, dim: usize, seed: u64, budget: usize) -> PyResult<Self> {
        let corpus = load_corpus(&corpus).map_err(err)?;
        let model = histctx::VocabModel::fit(&corpus, dim, seed).map_err(err)?;
        let budget = histctx::TokenBudget::new(budget).map_err(err)?;
        Ok(Self {
            model,
            corpus,
            budget,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.model.dim
    }

    fn encode_code(&self, text: &str) -> Vec<f64> {
        self.model.encode_code(text).0
    }

    /// `(project, file, qualified name, signature)` for every method, in corpus order.
    fn methods(&self) -> Vec<(String, String, String, String)> {
        self.corpus
            .iter()
            .map(|b| {
                let id = b.identity();
                (
                    id.project.clone(),
                    id.file_path.clone(),
                    id.qualified_name.clone(),
                    id.signature.clone(),
                )
            })
            .collect()
    }

    fn encode(&self, index: usize) -> PyResult<PyEncodedMethod> {
        let bundle = self
            .corpus
            .get(index)
            .ok_or_else(|| PyValueError::new_err(format!("no method {index}")))?;
        Ok(PyEncodedMethod {
            inner: self.model.encode_bundle(bundle, self.budget),
        })
    }
}

#[pyfunction]
fn aggregate_pair(
    a: &PyEncodedMethod,
    b: &PyEncodedMethod,
    contexts: &str,
    aggregation: &str,
) -> PyResult<Vec<f64>> {
    Ok(agg_pair(
        &a.inner,
        &b.inner,
        selection(contexts)?,
        scheme(aggregation)?,
    )
    .map_err(err)?
    .0)
}

#[pyfunction]
fn aggregate_single(m: &PyEncodedMethod, contexts: &str, aggregation: &str) -> PyResult<Vec<f64>> {
    Ok(
        agg_single(&m.inner, selection(contexts)?, scheme(aggregation)?)
            .map_err(err)?
            .0,
    )
}

#[pyfunction]
#[pyo3(signature = (aggregation, contexts, dim, pair=true))]
fn output_dim(aggregation: &str, contexts: &str, dim: usize, pair: bool) -> PyResult<usize> {
    Ok(out_dim(
        scheme(aggregation)?,
        selection(contexts)?,
        dim,
        pair,
    ))
}

/// Linear head with a sigmoid or softmax output.
#[pyclass(name = "LinearHead")]
struct PyLinearHead {
    inner: histctx::LinearHead,
}

#[pymethods]
impl PyLinearHead {
    #[new]
    #[pyo3(signature = (kind, n_in, n_out=1, seed=0))]
    fn new(kind: &str, n_in: usize, n_out: usize, seed: u64) -> PyResult<Self> {
        let kind = match kind {
            "sigmoid" => HeadKind::Sigmoid,
            "softmax" => HeadKind::Softmax,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown head kind `{other}`"
                )))
            }
        };
        Ok(Self {
            inner: histctx::LinearHead::init(kind, n_in, n_out, seed).map_err(err)?,
        })
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights.clone()
    }

    #[getter]
    fn bias(&self) -> Vec<f64> {
        self.inner.bias.clone()
    }

    fn forward(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.forward(&x).map_err(err)
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<usize> {
        self.inner.predict(&x).map_err(err)
    }

    /// Mean loss with weight and bias gradients.
    fn loss_and_grad(
        &self,
        xs: Vec<Vec<f64>>,
        ys: Vec<usize>,
    ) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let (loss, g) = self.inner.loss_and_grad(&refs, &ys).map_err(err)?;
        Ok((loss, g.weights, g.bias))
    }
}

#[pyfunction]
fn f1_score(precision: f64, recall: f64) -> f64 {
    learning::f1_score(precision, recall)
}

#[pyfunction]
fn pct_improvement(metric: f64, baseline: f64) -> Option<i64> {
    learning::pct_improvement(metric, baseline)
}

/// `(train, validation, test)` index lists.
#[pyfunction]
fn split_dataset(n: usize, seed: u64) -> PyResult<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let s = learning::split_dataset(n, seed).map_err(err)?;
    Ok((s.train, s.validation, s.test))
}

fn format_of(name: &str) -> PyResult<TableFormat> {
    name.parse().map_err(err)
}

/// Run the matrix described by a JSON config; returns the rendered table.
#[pyfunction]
#[pyo3(signature = (config, format="text"))]
fn run_matrix(py: Python<'_>, config: PathBuf, format: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::load(&config).map_err(err)?;
    let fmt = format_of(format)?;
    let run = py.detach(|| matrix(&cfg)).map_err(err)?;
    render(&run.matrix, fmt).map_err(err)
}

/// Render a stored matrix (`matrix.json` or its directory).
#[pyfunction]
#[pyo3(signature = (matrix, format="text"))]
fn render_table(matrix: PathBuf, format: &str) -> PyResult<String> {
    let m = ResultMatrix::load(&matrix).map_err(err)?;
    render(&m, format_of(format)?).map_err(err)
}

/// Designed experiment; returns the per-seed and median F1 scores.
#[pyfunction]
#[pyo3(signature = (seed=7, informativeness=1.0))]
fn run_designed<'py>(
    py: Python<'py>,
    seed: u64,
    informativeness: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = DesignedConfig::new(seed, informativeness);
    let out = py.detach(|| designed(&cfg)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("baseline_f1", out.baseline_f1.clone())?;
    d.set_item("history_f1", out.history_f1.clone())?;
    d.set_item("baseline_median", out.baseline_median)?;
    d.set_item("history_median", out.history_median)?;
    d.set_item("delta", out.delta())?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "histctx")]
fn histctx_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HistctxError", m.py().get_type::<HistctxError>())?;
    m.add_class::<PyEncodedMethod>()?;
    m.add_class::<PyEncoder>()?;
    m.add_class::<PyLinearHead>()?;
    m.add_function(wrap_pyfunction!(mine, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_stats, m)?)?;
    m.add_function(wrap_pyfunction!(synth_fixture, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_pair, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_single, m)?)?;
    m.add_function(wrap_pyfunction!(output_dim, m)?)?;
    m.add_function(wrap_pyfunction!(f1_score, m)?)?;
    m.add_function(wrap_pyfunction!(pct_improvement, m)?)?;
    m.add_function(wrap_pyfunction!(split_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(run_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(render_table, m)?)?;
    m.add_function(wrap_pyfunction!(run_designed, m)?)?;
    Ok(())
}
