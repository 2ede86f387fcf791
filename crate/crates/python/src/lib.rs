use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use reskew::degrade::{self, RoomSpec};
use reskew::eval::{self, CorpusManifest, Degradation, EvalOptions, NoiseSource};
use reskew::filter_design::{design_elliptic_highpass, EllipticSpec};
use reskew::synth::{self, VoiceSpec};
use reskew::{Error, Method, Polarity, ReskewConfig};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Audio { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn method(name: &str) -> PyResult<Method> {
    name.parse().map_err(py_err)
}

/// Mono audio samples at a fixed sample rate.
#[pyclass(name = "Signal", module = "reskew_py", from_py_object)]
#[derive(Clone)]
struct PySignal(reskew::Signal);

#[pymethods]
impl PySignal {
    #[new]
    fn new(samples: Vec<f64>, sample_rate: u32) -> PyResult<Self> {
        reskew::Signal::new(samples, sample_rate)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn samples(&self) -> Vec<f64> {
        self.0.samples().to_vec()
    }

    #[getter]
    fn sample_rate(&self) -> u32 {
        self.0.sample_rate()
    }

    #[getter]
    fn duration_s(&self) -> f64 {
        self.0.duration_s()
    }

    fn power(&self) -> f64 {
        self.0.power()
    }

    fn scaled(&self, gain: f64) -> PyResult<Self> {
        self.0.scaled(gain).map(Self).map_err(py_err)
    }

    fn padded(&self, lead: usize, trail: usize) -> Self {
        Self(self.0.padded(lead, trail))
    }

    fn __neg__(&self) -> Self {
        Self(-&self.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Signal(len={}, sample_rate={})",
            self.0.len(),
            self.0.sample_rate()
        )
    }
}

/// Verdict and statistic of one detection, with both excitation skewnesses.
#[pyclass(name = "Decision", module = "reskew_py", get_all, skip_from_py_object)]
struct PyDecision {
    polarity: String,
    method: String,
    statistic: f64,
    skew_residual: f64,
    skew_glottal: f64,
}

#[pymethods]
impl PyDecision {
    fn __repr__(&self) -> String {
        format!(
            "Decision(polarity='{}', method='{}', statistic={})",
            self.polarity, self.method, self.statistic
        )
    }
}

#[pyfunction]
fn skewness(x: Vec<f64>) -> PyResult<f64> {
    reskew::dsp::skewness(&x).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (signal, method = "reskew", fc = 400.0))]
fn detect_polarity(signal: &PySignal, method: &str, fc: f64) -> PyResult<PyDecision> {
    let d = reskew::detect_polarity(
        &signal.0,
        &ReskewConfig::with_cutoff(fc),
        self::method(method)?,
    )
    .map_err(py_err)?;
    Ok(PyDecision {
        polarity: d.polarity.to_string(),
        method: d.method.to_string(),
        statistic: d.statistic,
        skew_residual: d.excitation.skew_residual,
        skew_glottal: d.excitation.skew_glottal,
    })
}

/// Returns `(residual, glottal_derivative)`.
#[pyfunction]
#[pyo3(signature = (signal, fc = 400.0))]
fn excitation_signals(signal: &PySignal, fc: f64) -> PyResult<(PySignal, PySignal)> {
    let e = reskew::reskew::excitation_pair(&signal.0, &ReskewConfig::with_cutoff(fc))
        .map_err(py_err)?;
    Ok((PySignal(e.residual), PySignal(e.glottal_derivative)))
}

/// Second-order sections `[(b, a), ...]` of the elliptic high-pass.
#[pyfunction]
#[pyo3(signature = (cutoff_hz, sample_rate, order = 9))]
fn elliptic_highpass(
    cutoff_hz: f64,
    sample_rate: u32,
    order: usize,
) -> PyResult<Vec<([f64; 3], [f64; 3])>> {
    let spec = EllipticSpec {
        order,
        ..EllipticSpec::highpass(cutoff_hz, sample_rate)
    };
    let sos = design_elliptic_highpass(&spec).map_err(py_err)?;
    Ok(sos.sections().iter().map(|s| (s.b, s.a)).collect())
}

#[pyfunction]
#[pyo3(signature = (f0_hz, formants, polarity = "positive", seed = 0, duration_s = 1.0, sample_rate = 16000))]
fn synthesize_voice(
    f0_hz: f64,
    formants: Vec<(f64, f64)>,
    polarity: &str,
    seed: u64,
    duration_s: f64,
    sample_rate: u32,
) -> PyResult<PySignal> {
    let polarity: Polarity = polarity.parse().map_err(py_err)?;
    let mut spec = VoiceSpec::new(f0_hz, formants, polarity, seed);
    spec.duration_s = duration_s;
    synth::synthesize_voice(&spec, sample_rate)
        .map(PySignal)
        .map_err(py_err)
}

/// Writes the standard synthetic corpus and returns the manifest path.
#[pyfunction]
#[pyo3(signature = (out_dir, sample_rate = 16000))]
fn write_synthetic_corpus(out_dir: &str, sample_rate: u32) -> PyResult<String> {
    eval::write_synthetic_corpus(out_dir, &synth::standard_grid(), sample_rate).map_err(py_err)?;
    Ok(std::path::Path::new(out_dir)
        .join("manifest.csv")
        .to_string_lossy()
        .into_owned())
}

#[pyfunction]
fn white_noise(len: usize, sample_rate: u32, seed: u64) -> PySignal {
    PySignal(degrade::white_noise(len, sample_rate, seed))
}

#[pyfunction]
fn mix_noise(clean: &PySignal, noise: &PySignal, snr_db: f64) -> PyResult<PySignal> {
    degrade::mix_noise(&clean.0, &noise.0, snr_db)
        .map(PySignal)
        .map_err(py_err)
}

#[pyfunction]
fn measured_snr_db(clean: &PySignal, mixed: &PySignal) -> f64 {
    degrade::measured_snr_db(&clean.0, &mixed.0)
}

/// Image-method RIR for the default room at the given T60.
#[pyfunction]
#[pyo3(signature = (t60_ms, sample_rate = 16000))]
fn room_impulse_response(t60_ms: f64, sample_rate: u32) -> PyResult<PySignal> {
    let rir = degrade::image_method_rir(&RoomSpec::with_t60(t60_ms / 1000.0), sample_rate)
        .map_err(py_err)?;
    Ok(PySignal(rir.to_signal()))
}

#[pyfunction]
fn reverberate(clean: &PySignal, rir: &PySignal) -> PyResult<PySignal> {
    let rir = degrade::Rir {
        taps: rir.0.samples().to_vec(),
        sample_rate: rir.0.sample_rate(),
    };
    degrade::reverberate(&clean.0, &rir)
        .map(PySignal)
        .map_err(py_err)
}

#[pyfunction]
fn decay_time_s(rir: &PySignal, level_db: f64) -> Option<f64> {
    degrade::decay_crossing_s(rir.0.samples(), rir.0.sample_rate(), level_db)
}

#[pyfunction]
fn read_wav(path: &str) -> PyResult<PySignal> {
    reskew::wav::read_wav(path).map(PySignal).map_err(py_err)
}

#[pyfunction]
fn write_wav(path: &str, signal: &PySignal) -> PyResult<()> {
    reskew::wav::write_wav(path, &signal.0).map_err(py_err)
}

/// Evaluates a `path,polarity` manifest and returns the report as JSON.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (manifest, methods = None, fc = 400.0, snr_db = None, noise = None, t60_ms = None, seed = 0))]
fn evaluate_manifest(
    py: Python<'_>,
    manifest: &str,
    methods: Option<Vec<String>>,
    fc: f64,
    snr_db: Option<f64>,
    noise: Option<String>,
    t60_ms: Option<f64>,
    seed: u64,
) -> PyResult<String> {
    let methods = match methods {
        Some(names) => names
            .iter()
            .map(|m| method(m))
            .collect::<PyResult<Vec<_>>>()?,
        None => Method::ALL.to_vec(),
    };
    let degradation = match (snr_db, t60_ms) {
        (Some(_), Some(_)) => return Err(PyValueError::new_err("snr_db and t60_ms are exclusive")),
        (Some(snr_db), None) => Degradation::Noise {
            snr_db,
            source: noise.map_or(NoiseSource::White, |p| NoiseSource::File(p.into())),
        },
        (None, Some(ms)) => Degradation::reverb(ms),
        (None, None) => Degradation::Clean,
    };
    let opts = EvalOptions {
        config: ReskewConfig::with_cutoff(fc),
        methods,
        degradation,
        seed,
    };
    py.detach(|| {
        let m = CorpusManifest::read_csv(manifest)?;
        eval::run_batch(&m, &opts)?.to_json()
    })
    .map_err(py_err)
}

#[pymodule]
fn reskew_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySignal>()?;
    m.add_class::<PyDecision>()?;
    m.add_function(wrap_pyfunction!(skewness, m)?)?;
    m.add_function(wrap_pyfunction!(detect_polarity, m)?)?;
    m.add_function(wrap_pyfunction!(excitation_signals, m)?)?;
    m.add_function(wrap_pyfunction!(elliptic_highpass, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_voice, m)?)?;
    m.add_function(wrap_pyfunction!(write_synthetic_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(white_noise, m)?)?;
    m.add_function(wrap_pyfunction!(mix_noise, m)?)?;
    m.add_function(wrap_pyfunction!(measured_snr_db, m)?)?;
    m.add_function(wrap_pyfunction!(room_impulse_response, m)?)?;
    m.add_function(wrap_pyfunction!(reverberate, m)?)?;
    m.add_function(wrap_pyfunction!(decay_time_s, m)?)?;
    m.add_function(wrap_pyfunction!(read_wav, m)?)?;
    m.add_function(wrap_pyfunction!(write_wav, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_manifest, m)?)?;
    m.add(
        "VOWELS",
        synth::VOWELS
            .iter()
            .map(|(n, f)| (*n, f.to_vec()))
            .collect::<Vec<_>>(),
    )?;
    Ok(())
}
