use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use matrisk_cli::commands::{self, write_json};
use matrisk_cli::config::{AppConfig, BIND_ENV, MODEL_ENV};
use matrisk_cli::engine::Engine;
use matrisk_cli::error::{CliError, InputError};
use matrisk_cli::patient::parse_patient;
use matrisk_core::data::{surrogate, PatientRecord};
use matrisk_core::explain::{render_structured, render_text, ExplanationType};
use matrisk_core::stats::{survey_report, SurveyCounts};
use serde_json::{json, Map, Value};

/// Explainable maternal health risk scoring.
///
/// Exit codes: 0 success, 1 internal error, 2 usage error, 3 model not
/// found, 4 unreadable or incompatible model file, 5 invalid patient input,
/// 6 data error, 7 configuration error.
#[derive(Parser)]
#[command(name = "matrisk", version, about, long_about)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log filter (overrides the config file and MATRISK_LOG).
    #[arg(long, global = true)]
    log: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct ModelArg {
    /// Model file.
    #[arg(long, env = MODEL_ENV)]
    model: Option<PathBuf>,
}

/// One patient, from a JSON file or from individual flags.
#[derive(Args)]
struct PatientArgs {
    /// JSON file holding one patient object; `-` reads standard input.
    #[arg(long, conflicts_with_all = ["age", "systolic_bp", "diastolic_bp", "blood_sugar", "body_temp", "heart_rate", "division"])]
    patient: Option<PathBuf>,
    /// Age in years.
    #[arg(long)]
    age: Option<f64>,
    /// Systolic blood pressure, mmHg.
    #[arg(long)]
    systolic_bp: Option<f64>,
    /// Diastolic blood pressure, mmHg.
    #[arg(long)]
    diastolic_bp: Option<f64>,
    /// Blood sugar, mmol/L.
    #[arg(long)]
    blood_sugar: Option<f64>,
    /// Body temperature, degrees Fahrenheit.
    #[arg(long)]
    body_temp: Option<f64>,
    /// Heart rate, beats per minute.
    #[arg(long)]
    heart_rate: Option<f64>,
    /// Division, e.g. dhaka or sylhet.
    #[arg(long)]
    division: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train on the configured data; writes the model and its training record.
    Train {
        #[command(flatten)]
        model: ModelArg,
        /// UCI-format CSV (defaults to MATRISK_UCI_CSV, then the bundled surrogate).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Seed for both the division assignment and the split.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the held-out metrics to this file.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Predict the risk class of one patient.
    Predict {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        patient: PatientArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Explain one prediction as a Type A, B or C bundle.
    Explain {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        patient: PatientArgs,
        /// A: hybrid, B: feature contributions only, C: score only.
        #[arg(long = "type", default_value = "A")]
        kind: ExplanationType,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Evaluate the model on the held-out split of the configured data.
    Evaluate {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Evaluate on every record instead of the held-out split.
        #[arg(long)]
        all: bool,
        /// Write the metrics to this file as well as standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fuzzy risk score and fired rules for one patient. Needs no model.
    FuzzyScore {
        #[command(flatten)]
        patient: PatientArgs,
        /// Rule base file (defaults to the bundled one).
        #[arg(long)]
        rulebase: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Survey statistics report.
    Stats {
        /// Survey count file (defaults to the bundled one).
        #[arg(long)]
        survey: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the HTTP service.
    Serve {
        #[command(flatten)]
        model: ModelArg,
        /// Address to listen on.
        #[arg(long, env = BIND_ENV)]
        bind: Option<String>,
    },
    /// Write the synthetic surrogate dataset as UCI-format CSV.
    SynthData {
        #[arg(long, default_value_t = surrogate::DEFAULT_SEED)]
        seed: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_patient(args: &PatientArgs, cfg: &AppConfig, require_division: bool) -> Result<PatientRecord, CliError> {
    let value = match &args.patient {
        Some(path) => {
            let text = if path.as_os_str() == "-" {
                std::io::read_to_string(std::io::stdin()).map_err(|e| CliError::Internal(e.to_string()))?
            } else {
                std::fs::read_to_string(path)
                    .map_err(|e| InputError::single("patient", format!("{}: {e}", path.display())))?
            };
            serde_json::from_str(&text).map_err(|e| InputError::single("patient", format!("malformed JSON: {e}")))?
        }
        None => {
            let mut m = Map::new();
            let fields = [
                ("age", args.age),
                ("systolic_bp", args.systolic_bp),
                ("diastolic_bp", args.diastolic_bp),
                ("blood_sugar", args.blood_sugar),
                ("body_temp", args.body_temp),
                ("heart_rate", args.heart_rate),
            ];
            for (k, v) in fields {
                if let Some(v) = v {
                    m.insert(k.into(), json!(v));
                }
            }
            if let Some(d) = &args.division {
                m.insert("division".into(), json!(d));
            }
            Value::Object(m)
        }
    };
    Ok(parse_patient(&value, &cfg.ranges, require_division, "")?)
}

fn open_engine(cfg: &mut AppConfig, model: &ModelArg) -> Result<Engine, CliError> {
    if let Some(p) = &model.model {
        cfg.paths.model = p.clone();
    }
    Engine::open(cfg)
}

// Write errors (a closed pipe, usually) are ignored rather than panicking.
macro_rules! outln {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! out {
    ($($t:tt)*) => {{
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

fn print_json(v: &impl serde::Serialize) {
    outln!("{}", serde_json::to_string_pretty(v).expect("value serializes"));
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = AppConfig::load(cli.config.as_deref())?;
    if let Some(l) = &cli.log {
        cfg.log = l.clone();
    }
    let _ = env_logger::Builder::new()
        .parse_filters(&cfg.log)
        .format_timestamp(None)
        .try_init();

    match cli.command {
        Command::Train { model, data, seed, metrics } => {
            if let Some(p) = model.model {
                cfg.paths.model = p;
            }
            if data.is_some() {
                cfg.paths.data = data;
            }
            if let Some(s) = seed {
                cfg.pipeline.augment_seed = s;
                cfg.pipeline.split_seed = s;
            }
            let (m, record) = commands::train(&cfg)?;
            if let Some(p) = metrics {
                write_json(&p, &record.metrics)?;
            }
            outln!("model {} written to {}", m.digest(), cfg.paths.model.display());
            outln!("{}", record.validation_note);
        }
        Command::Predict { model, patient, format } => {
            let engine = open_engine(&mut cfg, &model)?;
            let r = read_patient(&patient, &cfg, true)?;
            let a = engine.assess(&r)?;
            match format {
                Format::Json => print_json(&json!({
                    "model_version": engine.version,
                    "prediction": a.prediction,
                    "fuzzy_score": a.fuzzy.score,
                    "fuzzy_fallback": a.fuzzy.fallback,
                    "features": a.features.named().map(|(k, v)| (k.to_string(), json!(v))).collect::<Map<String, Value>>(),
                })),
                Format::Text => {
                    let p = &a.prediction.probabilities;
                    outln!("Predicted risk: {:?} (probability {:.3})", a.prediction.class, a.prediction.probability);
                    outln!("Probabilities: low {:.3}, mid {:.3}, high {:.3}", p[0], p[1], p[2]);
                    outln!("Fuzzy risk score: {:.1}{}", a.fuzzy.score, if a.fuzzy.fallback { " (fallback)" } else { "" });
                    outln!("Model version: {}", engine.version);
                }
            }
        }
        Command::Explain { model, patient, kind, format } => {
            let engine = open_engine(&mut cfg, &model)?;
            let r = read_patient(&patient, &cfg, true)?;
            let b = engine.explain(&r, kind)?;
            match format {
                Format::Json => print_json(&render_structured(&b)),
                Format::Text => out!("{}", render_text(&b)),
            }
        }
        Command::Evaluate { model, data, all, out } => {
            if data.is_some() {
                cfg.paths.data = data;
            }
            let engine = open_engine(&mut cfg, &model)?;
            let m = commands::evaluate_model(&engine, &cfg, all)?;
            if let Some(p) = out {
                write_json(&p, &m)?;
            }
            print_json(&m);
        }
        Command::FuzzyScore { patient, rulebase, format } => {
            if rulebase.is_some() {
                cfg.paths.rulebase = rulebase;
            }
            let rb = cfg.rulebase()?;
            let r = read_patient(&patient, &cfg, false)?;
            let a = rb.infer(&r);
            match format {
                Format::Json => print_json(&a),
                Format::Text => {
                    outln!("Fuzzy risk score: {:.1}{}", a.score, if a.fallback { " (no rule fired; fallback)" } else { "" });
                    for f in &a.fired_rules {
                        outln!("  rule {:>2}  {:.2}  {} -> {}", f.id, f.activation, f.label, f.consequent);
                    }
                }
            }
        }
        Command::Stats { survey, format } => {
            let path = survey.or(cfg.paths.survey.clone());
            let counts = match path {
                Some(p) => SurveyCounts::from_file(&p).map_err(|e| CliError::Data(e.to_string()))?,
                None => SurveyCounts::default(),
            };
            let report = survey_report(&counts).map_err(|e| CliError::Data(e.to_string()))?;
            match format {
                Format::Json => print_json(&report),
                Format::Text => out!("{}", report.render_text()),
            }
        }
        Command::Serve { model, bind } => {
            let engine = open_engine(&mut cfg, &model)?;
            let bind = bind.unwrap_or(cfg.service.bind.clone());
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
            rt.block_on(matrisk_cli::http::serve(engine, &bind))?;
        }
        Command::SynthData { seed, out } => {
            let recs = surrogate::generate(seed);
            match out {
                Some(p) => {
                    let mut f = std::fs::File::create(&p).map_err(|e| CliError::Internal(format!("{}: {e}", p.display())))?;
                    surrogate::write_csv(&recs, &mut f).map_err(|e| CliError::Internal(e.to_string()))?;
                }
                None => {
                    let mut out = std::io::stdout().lock();
                    surrogate::write_csv(&recs, &mut out).map_err(|e| CliError::Internal(e.to_string()))?;
                    let _ = out.flush();
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
