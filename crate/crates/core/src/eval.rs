//! Confusion-matrix experiments over synthesized letters.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{Letter, SessionTraceMatrix, TemplateSet};
use crate::error::{Error, Result};
use crate::pipeline::{extract_letter, segment, PipelineConfig};
use crate::scalar::Scalar;
use crate::session::TransferLedger;
use crate::synth::{letter_path, synthesize, synthesize_word, ArmPose, SynthSpec, INCH};

/// Counts with rows = actual letter and columns = predicted letter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    alphabet: Vec<Letter>,
    counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Accuracy {
    /// Fraction correct per actual letter, in alphabet order.
    pub per_letter: Vec<(Letter, f64)>,
    /// Unweighted mean of `per_letter`.
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl ConfusionMatrix {
    pub fn new(alphabet: Vec<Letter>) -> Self {
        let n = alphabet.len();
        Self {
            alphabet,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn from_counts(alphabet: Vec<Letter>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let n = alphabet.len();
        if counts.len() != n || counts.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("confusion counts must be {n}x{n}")));
        }
        Ok(Self { alphabet, counts })
    }

    pub fn alphabet(&self) -> &[Letter] {
        &self.alphabet
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    fn index(&self, l: Letter) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|&a| a == l)
            .ok_or(Error::UnknownLetter(l))
    }

    pub fn record(&mut self, actual: Letter, predicted: Letter) -> Result<()> {
        let (i, j) = (self.index(actual)?, self.index(predicted)?);
        self.counts[i][j] += 1;
        Ok(())
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn accuracy(&self) -> Result<Accuracy> {
        let mut per_letter = Vec::with_capacity(self.alphabet.len());
        for (i, &l) in self.alphabet.iter().enumerate() {
            let total = self.row_sum(i);
            if total == 0 {
                return Err(Error::IncompleteExperiment(l));
            }
            per_letter.push((l, self.counts[i][i] as f64 / total as f64));
        }
        let mean = if per_letter.is_empty() {
            f64::NAN
        } else {
            per_letter.iter().map(|(_, a)| a).sum::<f64>() / per_letter.len() as f64
        };
        Ok(Accuracy { per_letter, mean })
    }

    /// Every diagonal entry is strictly the largest in its row.
    pub fn is_diagonal_dominant(&self) -> bool {
        self.counts
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &c)| j == i || c < row[i]))
    }

    /// Row-normalized percentages; empty rows are all zero.
    pub fn percentages(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| {
                        if total == 0 {
                            0.0
                        } else {
                            100.0 * c as f64 / total as f64
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn report(&self, format: ReportFormat) -> String {
        let pct = self.percentages();
        let mean = match self.accuracy() {
            Ok(a) if a.mean.is_finite() => format!("{:.1}%", 100.0 * a.mean),
            _ => "n/a".to_string(),
        };
        let mut out = String::new();
        match format {
            ReportFormat::Csv => {
                out.push_str("actual\\predicted");
                for l in &self.alphabet {
                    let _ = write!(out, ",{l}");
                }
                out.push('\n');
                for (l, row) in self.alphabet.iter().zip(&pct) {
                    out.push_str(&l.to_string());
                    for p in row {
                        let _ = write!(out, ",{p:.1}%");
                    }
                    out.push('\n');
                }
                let _ = writeln!(out, "mean accuracy,{mean}");
            }
            ReportFormat::Markdown => {
                out.push_str("| actual \\ predicted |");
                for l in &self.alphabet {
                    let _ = write!(out, " {l} |");
                }
                out.push_str("\n|---|");
                for _ in &self.alphabet {
                    out.push_str("---:|");
                }
                out.push('\n');
                for (l, row) in self.alphabet.iter().zip(&pct) {
                    let _ = write!(out, "| **{l}** |");
                    for p in row {
                        let _ = write!(out, " {p:.1}% |");
                    }
                    out.push('\n');
                }
                let _ = writeln!(out, "\nmean accuracy: {mean}");
            }
        }
        out
    }
}

/// A CSV report read back: alphabet and row percentages.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedReport {
    pub alphabet: Vec<Letter>,
    pub percentages: Vec<Vec<f64>>,
    pub mean: Option<f64>,
}

pub fn parse_csv_report(text: &str) -> Result<ParsedReport> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let alphabet = header
        .split(',')
        .skip(1)
        .map(|s| {
            s.parse::<Letter>()
                .map_err(|msg| Error::Parse { line: 1, msg })
        })
        .collect::<Result<Vec<_>>>()?;
    let pct = |line: usize, s: &str| -> Result<f64> {
        s.trim_end_matches('%')
            .parse::<f64>()
            .map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })
    };
    let mut percentages = Vec::new();
    let mut mean = None;
    for (idx, line) in lines {
        let mut cells = line.split(',');
        let first = cells.next().unwrap_or_default();
        if first == "mean accuracy" {
            let v = cells.next().unwrap_or("n/a");
            mean = if v == "n/a" {
                None
            } else {
                Some(pct(idx + 1, v)?)
            };
            continue;
        }
        let row = cells.map(|c| pct(idx + 1, c)).collect::<Result<Vec<_>>>()?;
        if row.len() != alphabet.len() {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected {} cells, got {}", alphabet.len(), row.len()),
            });
        }
        percentages.push(row);
    }
    Ok(ParsedReport {
        alphabet,
        percentages,
        mean,
    })
}

/// Default sensor noise for experiments, m/s² per axis. After the default
/// filter the noise norm of a still hand stays well below the 1 m/s² session
/// threshold, so sessions still end between letters.
pub const REFERENCE_NOISE_SIGMA: f64 = 0.5;

/// Per-trial randomization of the synthesized writing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthRanges {
    /// Nominal letter box edge, meters.
    pub letter_size: f64,
    /// Relative jitter of the letter box, uniform in `±size_jitter`.
    pub size_jitter: f64,
    /// Writing time per letter, seconds, uniform in `[min, max]`.
    pub duration_s: (f64, f64),
    /// Arm elevation, degrees, uniform in `[min, max]`.
    pub arm_deg: (f64, f64),
    pub noise_sigma: f64,
    pub sample_rate: f64,
}

impl Default for SynthRanges {
    fn default() -> Self {
        Self {
            letter_size: 12.0 * INCH,
            size_jitter: 0.1,
            duration_s: (1.2, 1.8),
            arm_deg: (-30.0, 30.0),
            noise_sigma: 0.0,
            sample_rate: 100.0,
        }
    }
}

impl SynthRanges {
    /// No jitter at all: every draw is the nominal 1.5 s, level-arm letter.
    pub fn fixed(letter_size: f64, noise_sigma: f64) -> Self {
        Self {
            letter_size,
            size_jitter: 0.0,
            duration_s: (1.5, 1.5),
            arm_deg: (0.0, 0.0),
            noise_sigma,
            sample_rate: 100.0,
        }
    }

    pub fn draw<T: Scalar>(&self, seed: u64) -> SynthSpec<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = |lo: f64, hi: f64| {
            if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            }
        };
        let size = self.letter_size * (1.0 + uniform(-self.size_jitter, self.size_jitter));
        let duration = uniform(self.duration_s.0, self.duration_s.1);
        let arm = uniform(self.arm_deg.0, self.arm_deg.1).to_radians();
        SynthSpec {
            letter_size: T::lit(size),
            sample_rate: T::lit(self.sample_rate),
            duration: T::lit(duration),
            noise_sigma: T::lit(self.noise_sigma),
            arm: ArmPose::Fixed(T::lit(arm)),
            seed: rng.random(),
            ..SynthSpec::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub letters: Vec<Letter>,
    pub trials_per_letter: usize,
    pub synth: SynthRanges,
    pub template_seed: u64,
    pub test_seed: u64,
    #[serde(default)]
    pub pipeline: PipelineConfig,
}

/// SplitMix64 finalizer, used to derive independent per-trace seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn trace_seed(base: u64, letter: Letter, trial: u64) -> u64 {
    mix(mix(mix(base) ^ letter.as_char() as u64) ^ trial)
}

const TEMPLATE_TRIAL: u64 = u64::MAX;

fn letter_matrix<T: Scalar>(
    letter: Letter,
    spec: &SynthSpec<T>,
    cfg: &PipelineConfig,
) -> Result<SessionTraceMatrix<T>> {
    let trace = synthesize(&letter_path(letter)?, spec)?;
    match extract_letter(&trace, cfg)? {
        Some(m) => Ok(m),
        // Nothing crossed the threshold: fall back to the raw rotated trace.
        None => {
            log::debug!("no session detected for {letter}, classifying the whole trace");
            let (uploads, _) = segment(
                &trace,
                &PipelineConfig {
                    session: crate::pipeline::SessionConfig {
                        threshold: f64::MIN_POSITIVE,
                        hold_ms: 10_000.0,
                    },
                    ..cfg.clone()
                },
            )?;
            let upload = uploads
                .into_iter()
                .next()
                .ok_or_else(|| Error::InvalidTrace(format!("empty trace for {letter}")))?;
            crate::pipeline::MobileStage::new(cfg).matrix(&upload)
        }
    }
}

/// Trains one template per letter from `template_seed`.
pub fn train_templates<T: Scalar>(spec: &ExperimentSpec) -> Result<TemplateSet<T>> {
    let matrices = spec
        .letters
        .par_iter()
        .map(|&l| {
            let synth = spec
                .synth
                .draw::<T>(trace_seed(spec.template_seed, l, TEMPLATE_TRIAL));
            letter_matrix(l, &synth, &spec.pipeline).map(|m| (l, m))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = TemplateSet::new(spec.letters.clone())?;
    for (l, m) in matrices {
        set.insert(l, m)?;
    }
    Ok(set)
}

pub fn run_experiment<T: Scalar>(spec: &ExperimentSpec) -> Result<ConfusionMatrix> {
    if spec.trials_per_letter == 0 {
        return Err(Error::Config("trials_per_letter must be at least 1".into()));
    }
    if spec.template_seed == spec.test_seed {
        return Err(Error::Config("template and test seeds must differ".into()));
    }
    spec.pipeline.validate()?;
    let templates = train_templates::<T>(spec)?;
    let jobs: Vec<(Letter, u64)> = spec
        .letters
        .iter()
        .flat_map(|&l| (0..spec.trials_per_letter as u64).map(move |k| (l, k)))
        .collect();
    let predictions = jobs
        .par_iter()
        .map(|&(l, k)| {
            let synth = spec.synth.draw::<T>(trace_seed(spec.test_seed, l, k));
            let m = letter_matrix(l, &synth, &spec.pipeline)?;
            let p = templates.classify(&m, &spec.pipeline.dtw)?;
            Ok((l, p.letter))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cm = ConfusionMatrix::new(spec.letters.clone());
    for (actual, predicted) in predictions {
        cm.record(actual, predicted)?;
    }
    Ok(cm)
}

/// Transfer accounting for one air-written word.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordSavings {
    pub word: String,
    pub ledger: TransferLedger,
    pub sessions: usize,
}

pub fn word_savings<T: Scalar>(
    word: &str,
    spec: &SynthSpec<T>,
    gap_ms: f64,
    cfg: &PipelineConfig,
) -> Result<WordSavings> {
    let trace = synthesize_word(word, spec, gap_ms)?;
    let (uploads, ledger) = segment(&trace, cfg)?;
    Ok(WordSavings {
        word: word.to_string(),
        ledger,
        sessions: uploads.len(),
    })
}

/// CSV in the word-per-column layout: continuous, gated and savings rows.
pub fn savings_csv(rows: &[WordSavings]) -> Result<String> {
    let mut out = String::from("connection");
    for r in rows {
        let _ = write!(out, ",{}", r.word);
    }
    out.push_str("\ncontinuous");
    for r in rows {
        let _ = write!(out, ",{}", r.ledger.continuous_count);
    }
    out.push_str("\nduring active sessions");
    for r in rows {
        let _ = write!(out, ",{}", r.ledger.gated_count);
    }
    out.push_str("\ndata transfer savings");
    for r in rows {
        let _ = write!(out, ",{:.1}%", r.ledger.savings()?);
    }
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::letters;

    fn table(diag: [u64; 5], rows: [[u64; 5]; 5]) -> ConfusionMatrix {
        let cm = ConfusionMatrix::from_counts(
            letters("abjwz"),
            rows.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap();
        for (i, d) in diag.iter().enumerate() {
            assert_eq!(cm.counts()[i][i], *d);
        }
        cm
    }

    #[test]
    fn non_similar_reference_mean() {
        let cm = table(
            [100, 95, 84, 74, 96],
            [
                [100, 0, 0, 0, 0],
                [5, 95, 0, 0, 0],
                [0, 4, 84, 10, 2],
                [0, 10, 16, 74, 0],
                [0, 0, 0, 4, 96],
            ],
        );
        let acc = cm.accuracy().unwrap();
        // (100 + 95 + 84 + 74 + 96) / 5 = 89.8
        assert!((acc.mean - 0.898).abs() < 1e-12);
        assert!(cm.is_diagonal_dominant());
    }

    #[test]
    fn similar_reference_mean() {
        // Row 'a' of the similar-letter reference counts only sums to 90%.
        let verbatim = ConfusionMatrix::from_counts(
            letters("adgqu"),
            vec![
                vec![54, 0, 19, 6, 11],
                vec![0, 100, 0, 0, 0],
                vec![0, 17, 18, 65, 0],
                vec![3, 0, 16, 81, 0],
                vec![0, 0, 0, 0, 100],
            ],
        )
        .unwrap();
        assert_eq!(verbatim.row_sum(0), 90);
        let acc = verbatim.accuracy().unwrap();
        // (54/90 + 1 + 0.18 + 0.81 + 1) / 5
        assert!((acc.mean - 0.718).abs() < 1e-12);

        // With the missing 10 trials counted as misses the row is out of 100.
        let completed = ConfusionMatrix::from_counts(
            letters("adgqu"),
            vec![
                vec![54, 0, 19, 6, 21],
                vec![0, 100, 0, 0, 0],
                vec![0, 17, 18, 65, 0],
                vec![3, 0, 16, 81, 0],
                vec![0, 0, 0, 0, 100],
            ],
        )
        .unwrap();
        let acc = completed.accuracy().unwrap();
        // (54 + 100 + 18 + 81 + 100) / 5 = 70.6
        assert!((acc.mean - 0.706).abs() < 1e-12);
        assert!(!completed.is_diagonal_dominant());
    }

    #[test]
    fn identity_is_perfect() {
        let mut cm = ConfusionMatrix::new(letters("xy"));
        cm.record(Letter::new('x'), Letter::new('x')).unwrap();
        cm.record(Letter::new('y'), Letter::new('y')).unwrap();
        let acc = cm.accuracy().unwrap();
        assert!(acc.per_letter.iter().all(|(_, a)| *a == 1.0));
        assert_eq!(acc.mean, 1.0);
        let csv = cm.report(ReportFormat::Csv);
        assert_eq!(
            csv,
            "actual\\predicted,x,y\nx,100.0%,0.0%\ny,0.0%,100.0%\nmean accuracy,100.0%\n"
        );
    }

    #[test]
    fn empty_row_is_incomplete() {
        let mut cm = ConfusionMatrix::new(letters("xy"));
        cm.record(Letter::new('x'), Letter::new('y')).unwrap();
        assert!(
            matches!(cm.accuracy(), Err(Error::IncompleteExperiment(l)) if l == Letter::new('y'))
        );
        assert!(cm.record(Letter::new('q'), Letter::new('x')).is_err());
    }

    #[test]
    fn empty_alphabet_report() {
        let cm = ConfusionMatrix::new(Vec::new());
        let csv = cm.report(ReportFormat::Csv);
        assert_eq!(csv, "actual\\predicted\nmean accuracy,n/a\n");
        let parsed = parse_csv_report(&csv).unwrap();
        assert!(parsed.alphabet.is_empty() && parsed.mean.is_none());
        assert!(cm.report(ReportFormat::Markdown).contains("n/a"));
    }

    #[test]
    fn csv_round_trip() {
        let cm = ConfusionMatrix::from_counts(
            letters("abc"),
            vec![vec![7, 2, 0], vec![1, 1, 1], vec![0, 0, 9]],
        )
        .unwrap();
        let parsed = parse_csv_report(&cm.report(ReportFormat::Csv)).unwrap();
        assert_eq!(parsed.alphabet, letters("abc"));
        for (r, e) in parsed.percentages.iter().zip(cm.percentages()) {
            for (a, b) in r.iter().zip(e) {
                assert!((a - b).abs() <= 0.05);
            }
        }
        let mean = cm.accuracy().unwrap().mean * 100.0;
        assert!((parsed.mean.unwrap() - mean).abs() <= 0.05);
    }

    #[test]
    fn markdown_layout() {
        let cm = ConfusionMatrix::from_counts(letters("ab"), vec![vec![3, 1], vec![0, 4]]).unwrap();
        let md = cm.report(ReportFormat::Markdown);
        assert!(md.starts_with(
            "| actual \\ predicted | a | b |\n|---|---:|---:|\n| **a** | 75.0% | 25.0% |"
        ));
        assert!(md.ends_with("mean accuracy: 87.5%\n"));
    }

    #[test]
    fn noise_free_fixed_draws_give_identity() {
        let spec = ExperimentSpec {
            letters: letters("abjwz"),
            trials_per_letter: 3,
            synth: SynthRanges::fixed(12.0 * INCH, 0.0),
            template_seed: 1,
            test_seed: 2,
            pipeline: PipelineConfig::default(),
        };
        let cm = run_experiment::<f64>(&spec).unwrap();
        for (i, row) in cm.counts().iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                assert_eq!(c, if i == j { 3 } else { 0 });
            }
        }
    }

    #[test]
    fn seeds_must_differ() {
        let spec = ExperimentSpec {
            letters: letters("ab"),
            trials_per_letter: 1,
            synth: SynthRanges::default(),
            template_seed: 5,
            test_seed: 5,
            pipeline: PipelineConfig::default(),
        };
        assert!(run_experiment::<f64>(&spec).is_err());
    }

    #[test]
    fn trace_seeds_are_distinct() {
        let a = trace_seed(7, Letter::new('a'), 0);
        assert_ne!(a, trace_seed(7, Letter::new('a'), 1));
        assert_ne!(a, trace_seed(7, Letter::new('b'), 0));
        assert_ne!(a, trace_seed(8, Letter::new('a'), 0));
    }

    #[test]
    fn savings_table_layout() {
        let rows = vec![WordSavings {
            word: "cake".into(),
            ledger: TransferLedger {
                continuous_count: 200,
                gated_count: 150,
            },
            sessions: 4,
        }];
        assert_eq!(
            savings_csv(&rows).unwrap(),
            "connection,cake\ncontinuous,200\nduring active sessions,150\ndata transfer savings,25.0%\n"
        );
    }
}
