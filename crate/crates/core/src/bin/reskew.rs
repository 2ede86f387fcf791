use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use reskew::degrade::{decay_crossing_s, image_method_rir, RoomSpec};
use reskew::eval::{
    run_batch, sweep, write_synthetic_corpus, CorpusManifest, Degradation, EvalOptions, EvalReport,
    NoiseSource, SweepParam,
};
use reskew::synth::standard_grid;
use reskew::wav::{read_wav, write_wav};
use reskew::{detect_polarity, Method, Polarity, ReskewConfig};

#[derive(Parser)]
#[command(
    name = "reskew",
    version,
    about = "Speech polarity detection by excitation skewness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect the polarity of one WAV file. Exits 0 if positive, 1 if negative.
    Detect {
        file: PathBuf,
        #[arg(long, default_value = "reskew")]
        method: Method,
        #[arg(long, default_value_t = 400.0)]
        fc: f64,
    },
    /// Evaluate a manifest under one condition.
    Eval {
        #[command(flatten)]
        common: EvalArgs,
        #[arg(long)]
        snr: Option<f64>,
        #[arg(long)]
        t60: Option<f64>,
        /// Flat per-file CSV report.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evaluate a manifest over a list of parameter values.
    Sweep {
        #[command(flatten)]
        common: EvalArgs,
        #[arg(long)]
        param: Param,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Write the synthetic corpus and its manifest.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value = "default")]
        grid: Grid,
        #[arg(long, default_value_t = 16000)]
        sample_rate: u32,
    },
    /// Render a room impulse response.
    Rir {
        /// Target reverberation time in ms.
        #[arg(long)]
        t60: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 16000)]
        sample_rate: u32,
    },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Methods to score; all three when omitted.
    #[arg(long)]
    method: Vec<Method>,
    #[arg(long, default_value_t = 400.0)]
    fc: f64,
    /// `white` or a noise WAV path.
    #[arg(long, default_value = "white")]
    noise: String,
    #[arg(long, env = "RESKEW_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Param {
    Fc,
    Snr,
    T60,
}

#[derive(Clone, Copy, ValueEnum)]
enum Grid {
    Default,
}

impl EvalArgs {
    fn options(&self) -> EvalOptions {
        EvalOptions {
            config: ReskewConfig::with_cutoff(self.fc),
            methods: if self.method.is_empty() {
                Method::ALL.to_vec()
            } else {
                self.method.clone()
            },
            degradation: Degradation::Clean,
            seed: self.seed,
        }
    }

    fn noise_source(&self) -> NoiseSource {
        if self.noise == "white" {
            NoiseSource::White
        } else {
            NoiseSource::File(PathBuf::from(&self.noise))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> reskew::Result<ExitCode> {
    match command {
        Command::Detect { file, method, fc } => {
            let speech = read_wav(&file)?;
            let d = detect_polarity(&speech, &ReskewConfig::with_cutoff(fc), method)?;
            println!("{}\t{:.6}", d.polarity, d.statistic);
            Ok(match d.polarity {
                Polarity::Positive => ExitCode::SUCCESS,
                Polarity::Negative => ExitCode::from(1),
            })
        }
        Command::Eval {
            common,
            snr,
            t60,
            csv,
        } => {
            let manifest = CorpusManifest::read_csv(&common.manifest)?;
            let mut opts = common.options();
            opts.degradation = match (snr, t60) {
                (Some(_), Some(_)) => {
                    return Err(reskew::Error::InvalidConfig(
                        "--snr and --t60 are exclusive".into(),
                    ))
                }
                (Some(snr_db), None) => Degradation::Noise {
                    snr_db,
                    source: common.noise_source(),
                },
                (None, Some(ms)) => Degradation::reverb(ms),
                (None, None) => Degradation::Clean,
            };
            let report = run_batch(&manifest, &opts)?;
            print_summary(&report);
            if let Some(path) = &common.out {
                std::fs::write(path, report.to_json()?)?;
            }
            if let Some(path) = &csv {
                report.write_csv(path)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            common,
            param,
            values,
        } => {
            let manifest = CorpusManifest::read_csv(&common.manifest)?;
            let mut base = common.options();
            let param = match param {
                Param::Fc => SweepParam::Fc,
                Param::Snr => {
                    base.degradation = Degradation::Noise {
                        snr_db: f64::NAN,
                        source: common.noise_source(),
                    };
                    SweepParam::Snr
                }
                Param::T60 => SweepParam::T60,
            };
            let reports = sweep(&base, param, &values, |o| run_batch(&manifest, o))?;
            for (v, r) in values.iter().zip(&reports) {
                print!("{v}\t");
                print_summary(r);
            }
            if let Some(path) = &common.out {
                std::fs::write(path, serde_json::to_string_pretty(&reports)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth {
            out_dir,
            grid: Grid::Default,
            sample_rate,
        } => {
            let manifest = write_synthetic_corpus(&out_dir, &standard_grid(), sample_rate)?;
            println!(
                "wrote {} files and {}",
                manifest.entries.len(),
                out_dir.join("manifest.csv").display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Rir {
            t60,
            out,
            sample_rate,
        } => {
            let rir = image_method_rir(&RoomSpec::with_t60(t60 / 1000.0), sample_rate)?;
            write_wav(&out, &rir.to_signal())?;
            report_rir(&out, &rir.taps, sample_rate);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_summary(report: &EvalReport) {
    let parts: Vec<String> = report
        .per_method
        .iter()
        .map(|(m, r)| {
            format!(
                "{m} {:.2}% ({}/{}) rct {:.4}",
                100.0 * r.error_rate,
                r.n_errors,
                r.n_files,
                r.rct
            )
        })
        .collect();
    println!("{}", parts.join("\t"));
}

fn report_rir(out: &Path, taps: &[f64], fs: u32) {
    match decay_crossing_s(taps, fs, -60.0) {
        Some(t) => println!(
            "{}\t{} taps\tT60 {:.1} ms",
            out.display(),
            taps.len(),
            t * 1000.0
        ),
        None => println!("{}\t{} taps", out.display(), taps.len()),
    }
}
