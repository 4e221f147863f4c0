use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use airdraw_core::eval::{savings_csv, word_savings, REFERENCE_NOISE_SIGMA};
use airdraw_core::orientation::RotatedSample;
use airdraw_core::pipeline::{extract_letter, segment, MobileStage};
use airdraw_core::synth::INCH;
use airdraw_core::trace_io::{read_trace, write_jsonl};
use airdraw_core::*;
use airdraw_service::connection::DEFAULT_REBASE_MS;
use airdraw_service::server::DEFAULT_QUEUE_CAPACITY;
use airdraw_service::store::write_atomic;
use airdraw_service::{AppState, ConnectionConfig, TemplateStore};
use anyhow::anyhow;
use serde::Serialize;

use crate::config::{Config, Format};
use crate::{
    ClassifyArgs, Command, EvalArgs, Failure, PipelineArgs, ServeArgs, SynthArgs, TrainArgs,
};

type Outcome = std::result::Result<(), Failure>;

pub const DEFAULT_WORDS: [&str; 5] = ["pizza", "chicken", "cake", "wine", "coffee"];

pub fn run(command: Command, cfg: &Config) -> Outcome {
    match command {
        Command::Synth(a) => synth(a, cfg),
        Command::Pipeline(a) => pipeline(a, cfg),
        Command::Train(a) => train(a, cfg),
        Command::Classify(a) => classify(a, cfg),
        Command::Eval(a) => eval(a, cfg),
        Command::Serve(a) => serve(a, cfg),
    }
}

fn synth(a: SynthArgs, cfg: &Config) -> Outcome {
    let s = &cfg.synth;
    let size_in = a.size_in.or(s.size_in).unwrap_or(12.0);
    if !(size_in > 0.0 && size_in.is_finite()) {
        return Err(Failure::usage(anyhow!(
            "--size-in must be positive, got {size_in}"
        )));
    }
    let spec = SynthSpec::<f64> {
        letter_size: size_in * INCH,
        sample_rate: a.sample_rate.or(s.sample_rate).unwrap_or(100.0),
        duration: a.duration_s.or(s.duration_s).unwrap_or(1.5),
        noise_sigma: a.noise.or(s.noise).unwrap_or(0.0),
        arm: ArmPose::Fixed(a.arm_deg.or(s.arm_deg).unwrap_or(0.0).to_radians()),
        seed: a.seed.or(s.seed).unwrap_or(0),
        ..SynthSpec::default()
    };
    spec.validate().map_err(Failure::usage)?;
    let trace = match (a.letter, &a.word) {
        (Some(c), _) => {
            let letter = Letter::new(c);
            let path = letter_path(letter).map_err(Failure::usage)?;
            synthesize(&path, &spec).map_err(Failure::data)?
        }
        (None, Some(word)) => {
            let gap = a.gap_ms.or(s.gap_ms).unwrap_or(1000.0);
            synthesize_word(word, &spec, gap).map_err(Failure::usage)?
        }
        (None, None) => {
            return Err(Failure::usage(anyhow!(
                "one of --letter or --word is required"
            )))
        }
    };
    let out = a.out.or_else(|| cfg.output.clone());
    with_output(out.as_deref(), |w| {
        write_jsonl(w, &trace).map_err(Into::into)
    })
}

/// One line of `pipeline` output.
#[derive(Debug, Serialize)]
struct SessionRecord {
    session: usize,
    start_us: u64,
    end_us: u64,
    closed_us: u64,
    samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    rotated_ref: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rotated: Option<TraceMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prediction: Option<LetterPrediction>,
}

fn pipeline(a: PipelineArgs, cfg: &Config) -> Outcome {
    let templates = match a.templates.as_ref().or(cfg.templates.as_ref()) {
        Some(path) => {
            let set = load_templates(path)?;
            if !set.is_complete() {
                return Err(Failure::data(Error::NotTrained {
                    missing: set.missing(),
                }));
            }
            Some(set)
        }
        None => None,
    };
    let trace = read_input(a.input.as_deref().or(cfg.input.as_deref()))?;
    let (uploads, ledger) = segment(&trace, &cfg.pipeline).map_err(Failure::data)?;
    let mobile = MobileStage::new(&cfg.pipeline);
    if let Some(dir) = &a.rotated_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::data(anyhow!("cannot create {}: {e}", dir.display())))?;
    }
    let mut records = Vec::with_capacity(uploads.len());
    for upload in &uploads {
        let rotated: Vec<RotatedSample<f64>> = mobile.rotate(upload);
        let prediction = match &templates {
            Some(set) if rotated.len() >= 2 => {
                Some(mobile.classify(set, upload).map_err(Failure::data)?)
            }
            _ => None,
        };
        let (rotated_ref, inline) = match &a.rotated_dir {
            Some(dir) => {
                let path = dir.join(format!("session-{:04}.jsonl", upload.index));
                with_output(Some(&path), |w| {
                    write_jsonl(w, &rotated).map_err(Into::into)
                })?;
                (Some(path.display().to_string()), None)
            }
            None => (None, TraceMatrix::from_rotated(&rotated).ok()),
        };
        records.push(SessionRecord {
            session: upload.index,
            start_us: upload.start_us,
            end_us: upload.end_us,
            closed_us: upload.closed_us,
            samples: upload.packets.len(),
            rotated_ref,
            rotated: inline,
            prediction,
        });
    }
    let out = a.out.or_else(|| cfg.output.clone());
    with_output(out.as_deref(), |w| {
        write_jsonl(w, &records).map_err(Into::into)
    })?;
    match ledger.savings() {
        Ok(s) => eprintln!(
            "{} sessions; {} of {} samples sent ({s:.1}% saved)",
            uploads.len(),
            ledger.gated_count,
            ledger.continuous_count
        ),
        Err(_) => eprintln!("{} sessions; empty trace", uploads.len()),
    }
    Ok(())
}

fn train(a: TrainArgs, cfg: &Config) -> Outcome {
    let path = a
        .templates
        .or_else(|| cfg.templates.clone())
        .ok_or_else(|| Failure::usage(anyhow!("--templates is required")))?;
    let letter = Letter::new(a.letter);
    let set = if path.exists() {
        load_templates(&path)?
    } else {
        let alphabet = a
            .alphabet
            .as_deref()
            .map(letters)
            .unwrap_or_else(latin_alphabet);
        Templates::new(alphabet).map_err(Failure::usage)?
    };
    if !set.alphabet().contains(&letter) {
        return Err(Failure::usage(anyhow!(
            "letter {letter} is not in the template alphabet"
        )));
    }
    let trace = read_input(a.input.as_deref().or(cfg.input.as_deref()))?;
    let (uploads, _) = segment(&trace, &cfg.pipeline).map_err(Failure::data)?;
    if uploads.len() != 1 {
        return Err(Failure::data(anyhow!(
            "ambiguous training trace: {} sessions detected, exactly one is required",
            uploads.len()
        )));
    }
    let matrix = MobileStage::new(&cfg.pipeline)
        .matrix(&uploads[0])
        .map_err(Failure::data)?;
    let set = set.train(letter, matrix).map_err(Failure::data)?;
    write_atomic(&path, &set).map_err(Failure::data)?;
    let missing: String = set.missing().iter().map(|l| l.as_char()).collect();
    eprintln!(
        "trained {letter}: {}/{} letters{}",
        set.len(),
        set.alphabet().len(),
        if missing.is_empty() {
            String::new()
        } else {
            format!(", missing {missing}")
        }
    );
    Ok(())
}

fn classify(a: ClassifyArgs, cfg: &Config) -> Outcome {
    let path = a
        .templates
        .or_else(|| cfg.templates.clone())
        .ok_or_else(|| Failure::usage(anyhow!("--templates is required")))?;
    let set = load_templates(&path)?;
    let trace = read_input(a.input.as_deref().or(cfg.input.as_deref()))?;
    let matrix = extract_letter(&trace, &cfg.pipeline)
        .map_err(Failure::data)?
        .ok_or_else(|| Failure::data(anyhow!("no writing session detected")))?;
    let prediction = set
        .classify(&matrix, &cfg.pipeline.dtw)
        .map_err(Failure::data)?;
    with_output(cfg.output.as_deref(), |w| {
        write_jsonl(w, &[prediction]).map_err(Into::into)
    })
}

fn eval(a: EvalArgs, cfg: &Config) -> Outcome {
    let e = &cfg.eval;
    let size_in = a.size_in.or(e.size_in).unwrap_or(12.0);
    let noise = a.noise.or(e.noise).unwrap_or(REFERENCE_NOISE_SIGMA);
    let seed = a.seed.or(e.seed).unwrap_or(7);
    if !(size_in > 0.0 && size_in.is_finite()) {
        return Err(Failure::usage(anyhow!(
            "--size-in must be positive, got {size_in}"
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Failure::usage(anyhow!(
            "--noise must be non-negative, got {noise}"
        )));
    }
    let out = a.out.or_else(|| cfg.output.clone());

    if a.report_savings {
        let words = a
            .words
            .or_else(|| e.words.clone())
            .unwrap_or_else(|| DEFAULT_WORDS.iter().map(|w| w.to_string()).collect());
        let gap = cfg.synth.gap_ms.unwrap_or(1000.0);
        let rows = words
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let spec = SynthSpec::<f64> {
                    letter_size: size_in * INCH,
                    noise_sigma: noise,
                    seed: seed.wrapping_add(i as u64),
                    ..SynthSpec::default()
                };
                word_savings(w, &spec, gap, &cfg.pipeline)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(Failure::usage)?;
        let table = savings_csv(&rows).map_err(Failure::data)?;
        return with_output(out.as_deref(), |w| {
            w.write_all(table.as_bytes()).map_err(Into::into)
        });
    }

    let letters = letters(
        a.letters
            .as_deref()
            .or(e.letters.as_deref())
            .unwrap_or("abjwz"),
    );
    for l in &letters {
        letter_path::<f64>(*l).map_err(Failure::usage)?;
    }
    let spec = ExperimentSpec {
        letters,
        trials_per_letter: a.trials.or(e.trials).unwrap_or(100),
        synth: SynthRanges {
            letter_size: size_in * INCH,
            noise_sigma: noise,
            ..SynthRanges::default()
        },
        template_seed: seed,
        test_seed: seed.wrapping_add(1),
        pipeline: cfg.pipeline.clone(),
    };
    let matrix = run_experiment::<f64>(&spec).map_err(Failure::usage)?;
    let format = match a.format.or(e.format).unwrap_or(Format::Csv) {
        Format::Csv => ReportFormat::Csv,
        Format::Markdown => ReportFormat::Markdown,
    };
    let report = matrix.report(format);
    with_output(out.as_deref(), |w| {
        w.write_all(report.as_bytes()).map_err(Into::into)
    })
}

fn serve(a: ServeArgs, cfg: &Config) -> Outcome {
    let s = &cfg.serve;
    let addr = a
        .addr
        .or_else(|| s.addr.clone())
        .unwrap_or_else(|| "127.0.0.1".into());
    let port = a.port.or(s.port).unwrap_or(8080);
    let store = match a.templates.or_else(|| cfg.templates.clone()) {
        Some(path) => {
            let set = if path.exists() {
                load_templates(&path)?
            } else {
                Templates::new(latin_alphabet()).map_err(Failure::usage)?
            };
            TemplateStore::persistent(set, path)
        }
        None => TemplateStore::new(Templates::new(latin_alphabet()).map_err(Failure::usage)?),
    };
    let mut state = AppState::new(
        store,
        ConnectionConfig {
            pipeline: cfg.pipeline.clone(),
            rebase_ms: DEFAULT_REBASE_MS,
            ..ConnectionConfig::default()
        },
    );
    state.queue_capacity = a.queue.or(s.queue).unwrap_or(DEFAULT_QUEUE_CAPACITY);
    let runtime = tokio::runtime::Runtime::new().map_err(Failure::data)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((addr.as_str(), port))
            .await
            .map_err(|e| Failure::usage(anyhow!("cannot listen on {addr}:{port}: {e}")))?;
        let local = listener.local_addr().map_err(Failure::data)?;
        eprintln!("listening on ws://{local}/v1/stream");
        airdraw_service::serve(listener, state)
            .await
            .map_err(Failure::data)
    })
}

fn load_templates(path: &Path) -> std::result::Result<Templates, Failure> {
    let file = File::open(path)
        .map_err(|e| Failure::data(anyhow!("cannot open {}: {e}", path.display())))?;
    Templates::read_json(BufReader::new(file))
        .map_err(|e| Failure::data(anyhow!("{}: {e}", path.display())))
}

fn read_input(path: Option<&Path>) -> std::result::Result<Trace, Failure> {
    let named = path.filter(|p| p.as_os_str() != "-");
    let reader: Box<dyn BufRead> = match named {
        Some(p) => {
            Box::new(BufReader::new(File::open(p).map_err(|e| {
                Failure::data(anyhow!("cannot open {}: {e}", p.display()))
            })?))
        }
        None => Box::new(io::stdin().lock()),
    };
    let name = named.map_or_else(|| "stdin".to_string(), |p| p.display().to_string());
    read_trace(reader).map_err(|e| Failure::data(anyhow!("{name}: {e}")))
}

fn with_output(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>,
) -> Outcome {
    match path.filter(|p| p.as_os_str() != "-") {
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| Failure::data(anyhow!("cannot create {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w).map_err(Failure::data)?;
            w.flush().map_err(Failure::data)
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            f(&mut w).map_err(Failure::data)?;
            w.flush().map_err(Failure::data)
        }
    }
}
