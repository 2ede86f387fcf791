//! Batch evaluation: ground-truth manifests, per-file detection under an
//! optional degradation, error rate and relative computation time (RCT),
//! and parameter sweeps.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degrade::{image_method_rir, mix_noise, reverberate, white_noise, Rir, RoomSpec};
use crate::error::{Error, Result};
use crate::reskew::{excitation_pair, Method, Polarity, ReskewConfig};
use crate::signal::Signal;
use crate::synth::{synthesize_voice, GridEntry};
use crate::wav::{read_wav, write_wav};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub polarity: Polarity,
}

/// Ground truth for one corpus. On disk: CSV with header `path,polarity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusManifest {
    pub corpus_name: String,
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn new(corpus_name: impl Into<String>, entries: Vec<ManifestEntry>) -> Result<Self> {
        let m = Self {
            corpus_name: corpus_name.into(),
            entries,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for e in &self.entries {
            if !seen.insert(&e.path) {
                return Err(Error::InvalidManifest(format!(
                    "duplicate path {}",
                    e.path.display()
                )));
            }
        }
        Ok(())
    }

    /// Reads a manifest; relative paths are resolved against the manifest's
    /// directory and the corpus is named after the file stem.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new(""));
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)?;
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["path", "polarity"] {
            return Err(Error::InvalidManifest(format!(
                "expected header `path,polarity`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut entries = Vec::new();
        for record in reader.records() {
            let record = record?;
            let file = PathBuf::from(&record[0]);
            let polarity = record[1].parse()?;
            entries.push(ManifestEntry {
                path: if file.is_absolute() {
                    file
                } else {
                    base.join(file)
                },
                polarity,
            });
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::new(name, entries)
    }

    /// Writes the manifest with paths relative to `base` where possible.
    pub fn write_csv(&self, path: impl AsRef<Path>, base: Option<&Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["path", "polarity"])?;
        for e in &self.entries {
            let p = base
                .and_then(|b| e.path.strip_prefix(b).ok())
                .unwrap_or(&e.path);
            w.write_record([p.to_string_lossy().as_ref(), &e.polarity.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Additive noise source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseSource {
    /// Seeded white Gaussian noise, drawn per file.
    White,
    /// A user WAV file, truncated to each clean file's length.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Degradation {
    Clean,
    Noise { snr_db: f64, source: NoiseSource },
    Reverb { t60_ms: f64, room: RoomSpec },
}

impl Degradation {
    pub fn reverb(t60_ms: f64) -> Self {
        Self::Reverb {
            t60_ms,
            room: RoomSpec::with_t60(t60_ms / 1000.0),
        }
    }

    pub fn white_noise(snr_db: f64) -> Self {
        Self::Noise {
            snr_db,
            source: NoiseSource::White,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub config: ReskewConfig,
    pub methods: Vec<Method>,
    pub degradation: Degradation,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            config: ReskewConfig::default(),
            methods: Method::ALL.to_vec(),
            degradation: Degradation::Clean,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub truth: Polarity,
    pub verdict: Option<Polarity>,
    pub statistic: Option<f64>,
    pub correct: bool,
    pub elapsed_s: f64,
    pub duration_s: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub error_rate: f64,
    pub n_files: usize,
    pub n_errors: usize,
    pub rct: f64,
    pub per_file: Vec<FileRecord>,
}

impl MethodReport {
    fn from_records(mut per_file: Vec<FileRecord>) -> Self {
        per_file.sort_by(|a, b| a.path.cmp(&b.path));
        let n_files = per_file.len();
        let n_errors = per_file.iter().filter(|r| !r.correct).count();
        let error_rate = if n_files == 0 {
            0.0
        } else {
            n_errors as f64 / n_files as f64
        };
        let rct = rct_of(&per_file);
        Self {
            error_rate,
            n_files,
            n_errors,
            rct,
            per_file,
        }
    }
}

fn rct_of(records: &[FileRecord]) -> f64 {
    let audio: f64 = records.iter().map(|r| r.duration_s).sum();
    let compute: f64 = records.iter().map(|r| r.elapsed_s).sum();
    if audio > 0.0 {
        compute / audio
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub corpus_name: String,
    pub condition: Degradation,
    pub config: ReskewConfig,
    pub seed: u64,
    pub per_method: BTreeMap<Method, MethodReport>,
}

impl EvalReport {
    pub fn method(&self, method: Method) -> Option<&MethodReport> {
        self.per_method.get(&method)
    }

    pub fn error_rate(&self, method: Method) -> f64 {
        self.per_method[&method].error_rate
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Flat per-file table: one row per (method, file).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "method",
            "path",
            "truth",
            "verdict",
            "statistic",
            "correct",
            "elapsed_s",
        ])?;
        for (method, report) in &self.per_method {
            for r in &report.per_file {
                w.write_record([
                    method.as_str().to_string(),
                    r.path.clone(),
                    r.truth.to_string(),
                    r.verdict.map(|v| v.to_string()).unwrap_or_default(),
                    r.statistic.map(|s| s.to_string()).unwrap_or_default(),
                    r.correct.to_string(),
                    r.elapsed_s.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Copy with every timing field zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for m in r.per_method.values_mut() {
            m.rct = 0.0;
            m.per_file.iter_mut().for_each(|f| f.elapsed_s = 0.0);
        }
        r
    }
}

/// One file to evaluate, identified by `id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalItem {
    pub id: String,
    pub truth: Polarity,
}

/// Applies a degradation condition; RIRs are built once per sample rate.
pub struct Degrader<'a> {
    degradation: &'a Degradation,
    seed: u64,
    noise_file: Option<Signal>,
    rirs: Mutex<HashMap<u32, Arc<Rir>>>,
}

impl<'a> Degrader<'a> {
    pub fn new(degradation: &'a Degradation, seed: u64) -> Result<Self> {
        let noise_file = match degradation {
            Degradation::Noise {
                source: NoiseSource::File(p),
                ..
            } => Some(read_wav(p)?),
            _ => None,
        };
        Ok(Self {
            degradation,
            seed,
            noise_file,
            rirs: Mutex::new(HashMap::new()),
        })
    }

    pub fn rir(&self, room: &RoomSpec, sample_rate: u32) -> Result<Arc<Rir>> {
        let mut cache = self.rirs.lock().expect("rir cache poisoned");
        if let Some(r) = cache.get(&sample_rate) {
            return Ok(r.clone());
        }
        let rir = Arc::new(image_method_rir(room, sample_rate)?);
        cache.insert(sample_rate, rir.clone());
        Ok(rir)
    }

    pub fn apply(&self, id: &str, clean: Signal) -> Result<Signal> {
        match self.degradation {
            Degradation::Clean => Ok(clean),
            Degradation::Noise { snr_db, source } => {
                let noise = match source {
                    NoiseSource::White => {
                        white_noise(clean.len(), clean.sample_rate(), file_seed(self.seed, id))
                    }
                    NoiseSource::File(_) => self.noise_file.clone().expect("loaded in new()"),
                };
                mix_noise(&clean, &noise, *snr_db)
            }
            Degradation::Reverb { room, .. } => {
                let rir = self.rir(room, clean.sample_rate())?;
                reverberate(&clean, &rir)
            }
        }
    }
}

/// Per-file noise seed: FNV-1a of the id mixed with the run seed, so a
/// file's noise does not depend on processing order.
pub fn file_seed(seed: u64, id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Evaluates `items`, loading each through `loader`. Files are processed in
/// parallel; only the detection itself is timed.
pub fn evaluate<F>(
    corpus_name: &str,
    items: &[EvalItem],
    loader: F,
    opts: &EvalOptions,
) -> Result<EvalReport>
where
    F: Fn(&EvalItem) -> Result<Signal> + Sync,
{
    if items.is_empty() {
        return Err(Error::EmptyManifest);
    }
    if opts.methods.is_empty() {
        return Err(Error::InvalidConfig("no methods selected".into()));
    }
    let degrader = Degrader::new(&opts.degradation, opts.seed)?;

    let per_item: Vec<Vec<(Method, FileRecord)>> = items
        .par_iter()
        .map(|item| {
            let prepared = loader(item).and_then(|s| degrader.apply(&item.id, s));
            let (duration_s, outcome, elapsed_s) = match prepared {
                Ok(signal) => {
                    let start = Instant::now();
                    let pair = excitation_pair(&signal, &opts.config);
                    (signal.duration_s(), pair, start.elapsed().as_secs_f64())
                }
                Err(e) => (0.0, Err(e), 0.0),
            };
            opts.methods
                .iter()
                .map(|&method| {
                    let decided = outcome.as_ref().map_err(|e| e.to_string()).and_then(|p| {
                        p.decide(method)
                            .map(|v| (v, p.statistic(method)))
                            .map_err(|e| e.to_string())
                    });
                    let record = match decided {
                        Ok((verdict, statistic)) => FileRecord {
                            path: item.id.clone(),
                            truth: item.truth,
                            verdict: Some(verdict),
                            statistic: Some(statistic),
                            correct: verdict == item.truth,
                            elapsed_s,
                            duration_s,
                            error: None,
                        },
                        Err(message) => FileRecord {
                            path: item.id.clone(),
                            truth: item.truth,
                            verdict: None,
                            statistic: None,
                            correct: false,
                            elapsed_s,
                            duration_s,
                            error: Some(message),
                        },
                    };
                    (method, record)
                })
                .collect()
        })
        .collect();

    let mut grouped: BTreeMap<Method, Vec<FileRecord>> = BTreeMap::new();
    for (method, record) in per_item.into_iter().flatten() {
        grouped.entry(method).or_default().push(record);
    }
    Ok(EvalReport {
        corpus_name: corpus_name.to_string(),
        condition: opts.degradation.clone(),
        config: opts.config,
        seed: opts.seed,
        per_method: grouped
            .into_iter()
            .map(|(m, r)| (m, MethodReport::from_records(r)))
            .collect(),
    })
}

/// Evaluates a manifest of WAV files.
pub fn run_batch(manifest: &CorpusManifest, opts: &EvalOptions) -> Result<EvalReport> {
    let items: Vec<EvalItem> = manifest
        .entries
        .iter()
        .map(|e| EvalItem {
            id: e.path.to_string_lossy().into_owned(),
            truth: e.polarity,
        })
        .collect();
    evaluate(
        &manifest.corpus_name,
        &items,
        |item| read_wav(&item.id),
        opts,
    )
}

/// Evaluates synthetic voices generated in memory.
pub fn run_synthetic(
    grid: &[GridEntry],
    sample_rate: u32,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let items: Vec<EvalItem> = grid
        .iter()
        .map(|g| EvalItem {
            id: g.name.clone(),
            truth: g.spec.polarity,
        })
        .collect();
    let by_name: HashMap<&str, &GridEntry> = grid.iter().map(|g| (g.name.as_str(), g)).collect();
    evaluate(
        "synthetic",
        &items,
        |item| synthesize_voice(&by_name[item.id.as_str()].spec, sample_rate),
        opts,
    )
}

/// Writes every grid voice as `<name>.wav` under `dir` plus `manifest.csv`.
pub fn write_synthetic_corpus(
    dir: impl AsRef<Path>,
    grid: &[GridEntry],
    sample_rate: u32,
) -> Result<CorpusManifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let entries = grid
        .par_iter()
        .map(|g| {
            let path = dir.join(format!("{}.wav", g.name));
            write_wav(&path, &synthesize_voice(&g.spec, sample_rate)?)?;
            Ok(ManifestEntry {
                path,
                polarity: g.spec.polarity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = CorpusManifest::new("manifest", entries)?;
    manifest.write_csv(dir.join("manifest.csv"), Some(dir))?;
    Ok(manifest)
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    /// High-pass cutoff in Hz.
    Fc,
    /// SNR in dB.
    Snr,
    /// Reverberation time in ms.
    T60,
}

/// Options for one sweep point derived from `base`.
pub fn sweep_point(base: &EvalOptions, param: SweepParam, value: f64) -> EvalOptions {
    let mut opts = base.clone();
    match param {
        SweepParam::Fc => opts.config.cutoff_hz = value,
        SweepParam::Snr => {
            let source = match &base.degradation {
                Degradation::Noise { source, .. } => source.clone(),
                _ => NoiseSource::White,
            };
            opts.degradation = Degradation::Noise {
                snr_db: value,
                source,
            };
        }
        SweepParam::T60 => {
            let room = match &base.degradation {
                Degradation::Reverb { room, .. } => *room,
                _ => RoomSpec::default(),
            };
            opts.degradation = Degradation::Reverb {
                t60_ms: value,
                room: RoomSpec {
                    t60_s: value / 1000.0,
                    ..room
                },
            };
        }
    }
    opts
}

/// Runs `run` once per sweep value.
pub fn sweep<R>(
    base: &EvalOptions,
    param: SweepParam,
    values: &[f64],
    mut run: R,
) -> Result<Vec<EvalReport>>
where
    R: FnMut(&EvalOptions) -> Result<EvalReport>,
{
    values
        .iter()
        .map(|&v| run(&sweep_point(base, param, v)))
        .collect()
}

pub fn sweep_fc(
    manifest: &CorpusManifest,
    fc_values: &[f64],
    base: &EvalOptions,
) -> Result<Vec<EvalReport>> {
    sweep(base, SweepParam::Fc, fc_values, |o| run_batch(manifest, o))
}

pub fn sweep_snr(
    manifest: &CorpusManifest,
    snr_values_db: &[f64],
    noise: NoiseSource,
    base: &EvalOptions,
) -> Result<Vec<EvalReport>> {
    let base = EvalOptions {
        degradation: Degradation::Noise {
            snr_db: f64::NAN,
            source: noise,
        },
        ..base.clone()
    };
    sweep(&base, SweepParam::Snr, snr_values_db, |o| {
        run_batch(manifest, o)
    })
}

pub fn sweep_t60(
    manifest: &CorpusManifest,
    t60_values_ms: &[f64],
    room: RoomSpec,
    base: &EvalOptions,
) -> Result<Vec<EvalReport>> {
    let base = EvalOptions {
        degradation: Degradation::Reverb {
            t60_ms: room.t60_s * 1000.0,
            room,
        },
        ..base.clone()
    };
    sweep(&base, SweepParam::T60, t60_values_ms, |o| {
        run_batch(manifest, o)
    })
}

/// Relative computation time of the clean Reskew detection over a manifest.
pub fn measure_rct(manifest: &CorpusManifest, config: &ReskewConfig) -> Result<f64> {
    let opts = EvalOptions {
        config: *config,
        methods: vec![Method::Reskew],
        ..EvalOptions::default()
    };
    let report = run_batch(manifest, &opts)?;
    Ok(report.per_method[&Method::Reskew].rct)
}
