//! Command-line workbench for the B.H. Neumann groups G(P): normal forms,
//! subgroup orders, Følner ratios, Weiss-approximation statistics, random
//! subgroup sampling and the almost-homomorphism defect harness, all with
//! reproducible seeds and machine-readable output.

mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use neumann_groups::almosthom::{self, FiniteRep};
use neumann_groups::lattice::{self, FiniteSubgroup};
use neumann_groups::neumann::{GroupElement, OddSequence, Word};
use neumann_groups::permutation::FinSuppPerm;
use neumann_groups::vershik::{self, ProbVector, SignSubgroup};
use neumann_groups::weiss::{self, PMode, PValue};
use neumann_groups::Error as CoreError;

use report::{Format, Report};

#[derive(Parser)]
#[command(
    name = "neumann-lab",
    version,
    about = "Exact and statistical experiments in the B.H. Neumann groups G(P)"
)]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Write the report to this file instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// RNG seed; required by every stochastic command
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Cap on full enumerations (elements of F_i or subgroups)
    #[arg(long, global = true, default_value_t = 1_000_000)]
    cap: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Mc,
    Auto,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum VershikTest {
    Invariance,
    Degenerate,
    Shift,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical normal form of a word in the generators t, s
    Element {
        /// Sequence literal: `5,7,9`, `5,7,9,...` or `arith:start=5,step=2`
        #[arg(long)]
        seq: String,
        /// Word over t, s with integer exponents, e.g. `s^-2 t s^2`
        #[arg(long)]
        word: String,
        /// How many coordinates to print (default: prefix length + 1)
        #[arg(long)]
        coords: Option<usize>,
    },
    /// Order of the finite subgroup L_i
    Order {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        i: usize,
    },
    /// Følner boundary ratios |g F_i △ F_i| / |F_i|
    Folner {
        #[arg(long)]
        seq: String,
        #[arg(long, default_value_t = 1)]
        i_min: usize,
        #[arg(long)]
        i_max: usize,
        /// The element g, as a word
        #[arg(long, default_value = "s")]
        gen: String,
        /// Force full enumeration even where a closed form applies
        #[arg(long)]
        enumerate: bool,
    },
    /// Weiss-approximation statistic p_i(g) for a subgroup H of N
    Weiss {
        #[arg(long)]
        seq: String,
        /// Comma-separated generator words, e.g. `t, s^-1 t s`
        #[arg(long = "H")]
        subgroup: String,
        /// Comma-separated probe words
        #[arg(long)]
        probes: String,
        #[arg(long, default_value_t = 1)]
        i_min: usize,
        #[arg(long)]
        i_max: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Random subgroups of the finitary symmetric group of the integers
    Vershik {
        /// Probability vector `alpha_0;alpha_1,...`, e.g. `0.3;0.7`
        #[arg(long)]
        alpha: String,
        /// Comma-separated basis bit strings for S, e.g. `11,01`; default {0}
        #[arg(long)]
        s_basis: Option<String>,
        /// Require every basis vector to have even weight
        #[arg(long)]
        alt: bool,
        /// Coloring window radius M
        #[arg(long)]
        window: i64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, value_enum)]
        test: VershikTest,
        /// Semicolon-separated probe permutations in cycle notation
        #[arg(long)]
        probes: Option<String>,
        /// Semicolon-separated conjugator permutations (invariance test)
        #[arg(long)]
        conjugators: Option<String>,
        /// Shift exponent (shift test)
        #[arg(long, default_value_t = 1)]
        k: i64,
    },
    /// Almost-homomorphism defect of the depth-i quotient representation
    Defect {
        #[arg(long)]
        seq: String,
        /// Number of windows the representation acts on
        #[arg(long)]
        depth: usize,
        /// Perturbation rate; 0 keeps the genuine quotient
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// Probe words are all words up to this length
        #[arg(long, default_value_t = 3)]
        probe_depth: usize,
    },
}

/// A core error annotated with the offending parameter.
struct CliError {
    param: &'static str,
    source: CoreError,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self.source {
            CoreError::Parse(_) => 2,
            CoreError::SequenceExhausted { .. } => 3,
            CoreError::EnumerationRefused { .. } => 4,
            CoreError::WindowTooSmall { .. } => 5,
            _ => 6,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.param, self.source)
    }
}

trait Ctx<T> {
    fn ctx(self, param: &'static str) -> Result<T, CliError>;
}

impl<T> Ctx<T> for Result<T, CoreError> {
    fn ctx(self, param: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError { param, source })
    }
}

fn config_error(param: &'static str, message: String) -> CliError {
    CliError {
        param,
        source: CoreError::Parse(message),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let format = match cli.format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            };
            let text = report.render(format);
            match &cli.out {
                None => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Some(path) => match std::fs::write(path, text) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => {
                        eprintln!("error: --out: {e}");
                        ExitCode::from(6)
                    }
                },
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn require_seed(cli: &Cli, why: &'static str) -> Result<u64, CliError> {
    cli.seed
        .ok_or_else(|| config_error("--seed", format!("a seed is required: {why}")))
}

/// Validation failures of user-supplied literals are configuration errors.
fn as_parse_error(e: CoreError) -> CoreError {
    match e {
        e @ CoreError::Parse(_) => e,
        other => CoreError::Parse(other.to_string()),
    }
}

fn parse_seq(text: &str) -> Result<OddSequence, CliError> {
    text.parse::<OddSequence>().map_err(as_parse_error).ctx("--seq")
}

fn parse_words(text: &str, param: &'static str) -> Result<Vec<Word>, CliError> {
    let mut words = Vec::new();
    for part in text.split(',') {
        words.push(part.trim().parse::<Word>().ctx(param)?);
    }
    Ok(words)
}

fn parse_perms(text: &str, param: &'static str) -> Result<Vec<FinSuppPerm>, CliError> {
    let mut perms = Vec::new();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        perms.push(part.parse::<FinSuppPerm>().map_err(as_parse_error).ctx(param)?);
    }
    Ok(perms)
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Element { seq, word, coords } => run_element(seq, word, *coords),
        Command::Order { seq, i } => run_order(seq, *i, cli.cap),
        Command::Folner {
            seq,
            i_min,
            i_max,
            gen,
            enumerate,
        } => run_folner(seq, *i_min, *i_max, gen, *enumerate, cli.cap),
        Command::Weiss {
            seq,
            subgroup,
            probes,
            i_min,
            i_max,
            mode,
            samples,
        } => {
            let seed = match mode {
                ModeArg::Exact => cli.seed.unwrap_or(0),
                _ => require_seed(cli, "the Monte Carlo mode samples L_i")?,
            };
            run_weiss(
                seq, subgroup, probes, *i_min, *i_max, *mode, *samples, seed, cli.cap,
            )
        }
        Command::Vershik {
            alpha,
            s_basis,
            alt,
            window,
            samples,
            test,
            probes,
            conjugators,
            k,
        } => {
            let seed = require_seed(cli, "coloring sampling is stochastic")?;
            run_vershik(
                alpha,
                s_basis.as_deref(),
                *alt,
                *window,
                *samples,
                *test,
                probes.as_deref(),
                conjugators.as_deref(),
                *k,
                seed,
            )
        }
        Command::Defect {
            seq,
            depth,
            epsilon,
            probe_depth,
        } => {
            let seed = if *epsilon > 0.0 {
                require_seed(cli, "perturbation is stochastic")?
            } else {
                cli.seed.unwrap_or(0)
            };
            run_defect(seq, *depth, *epsilon, *probe_depth, seed)
        }
    }
}

fn run_element(seq_text: &str, word_text: &str, coords: Option<usize>) -> Result<Report, CliError> {
    let seq = parse_seq(seq_text)?;
    let word = word_text.parse::<Word>().ctx("--word")?;
    let g = word.evaluate(&seq).ctx("--word")?;
    let mut report = Report::new(
        "element",
        json!({"seq": seq.to_string(), "word": word.to_string()}),
        vec!["field", "value"],
    );
    let mut push = |field: &str, value: String| {
        report.push_row([field.to_string(), value]);
    };
    push("word", word.to_string());
    push("sigma_exp", g.sigma_exp().to_string());
    push("prefix_len", g.prefix_len().to_string());
    push("in_n", g.is_in_n().to_string());
    push(
        "stabilization_index",
        match g.stabilization_index() {
            Ok(i) => i.to_string(),
            Err(_) => "-".to_string(),
        },
    );
    push("tail", g.tail_perm().to_string());
    push("tail_shift", g.sigma_exp().to_string());
    push("in_u", g.in_u().to_string());
    let count = coords.unwrap_or(g.prefix_len() + 1);
    for j in 1..=count {
        let c = g.coordinate(j).ctx("--coords")?;
        push(&format!("coordinate_{j}"), c.to_string());
    }
    Ok(report)
}

fn run_order(seq_text: &str, i: usize, cap: u64) -> Result<Report, CliError> {
    let seq = parse_seq(seq_text)?;
    let gens = lattice::l_generators(&seq, i).ctx("--i")?;
    let l = FiniteSubgroup::close(&seq, gens).ctx("--i")?;
    let mut report = Report::new(
        "order",
        json!({"seq": seq.to_string(), "i": i, "cap": cap}),
        vec!["i", "n_i", "order"],
    );
    report.push_row([
        i.to_string(),
        seq.term(i).ctx("--i")?.to_string(),
        l.order().to_string(),
    ]);
    Ok(report)
}

fn run_folner(
    seq_text: &str,
    i_min: usize,
    i_max: usize,
    gen_text: &str,
    enumerate: bool,
    cap: u64,
) -> Result<Report, CliError> {
    let seq = parse_seq(seq_text)?;
    let word = gen_text.parse::<Word>().ctx("--gen")?;
    let g = word.evaluate(&seq).ctx("--gen")?;
    let mut report = Report::new(
        "folner",
        json!({
            "seq": seq.to_string(),
            "i_min": i_min,
            "i_max": i_max,
            "gen": word.to_string(),
            "enumerate": enumerate,
            "cap": cap,
        }),
        vec!["i", "n_i", "generator", "mode", "ratio"],
    );
    let sigma = GroupElement::sigma(&seq);
    let tau = GroupElement::tau(&seq);
    let mut agreements = Vec::new();
    for i in i_min..=i_max {
        let (mode, ratio) = if enumerate {
            let value = weiss::folner_boundary_ratio_enumerated(&seq, i, &g, cap).ctx("--gen")?;
            if g == sigma || g == tau {
                let closed = weiss::folner_boundary_ratio(&seq, i, &g, cap).ctx("--gen")?;
                agreements.push(json!({"i": i, "closed_form_matches": closed == value}));
            }
            ("enumerated", value)
        } else {
            let mode = if g == sigma || g == tau {
                "closed"
            } else {
                "enumerated"
            };
            (mode, weiss::folner_boundary_ratio(&seq, i, &g, cap).ctx("--gen")?)
        };
        report.push_row([
            i.to_string(),
            seq.term(i).ctx("--i-max")?.to_string(),
            word.to_string(),
            mode.to_string(),
            ratio.to_string(),
        ]);
    }
    report.derived_checks = json!(agreements);
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn run_weiss(
    seq_text: &str,
    subgroup_text: &str,
    probes_text: &str,
    i_min: usize,
    i_max: usize,
    mode: ModeArg,
    samples: u64,
    seed: u64,
    cap: u64,
) -> Result<Report, CliError> {
    let seq = parse_seq(seq_text)?;
    let h = FiniteSubgroup::parse(&seq, subgroup_text).ctx("--H")?;
    let probes = parse_words(probes_text, "--probes")?;
    let pmode = match mode {
        ModeArg::Exact => PMode::Exact,
        ModeArg::Mc => PMode::MonteCarlo,
        ModeArg::Auto => PMode::Auto,
    };
    let reports =
        weiss::weiss_report(&h, &probes, i_min, i_max, pmode, samples, seed, cap).ctx("--probes")?;
    let mut report = Report::new(
        "weiss",
        json!({
            "seq": seq.to_string(),
            "H": subgroup_text.trim(),
            "H_order": h.order().to_string(),
            "probes": probes.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "i_min": i_min,
            "i_max": i_max,
            "mode": format!("{mode:?}").to_lowercase(),
            "samples": samples,
            "seed": seed,
            "cap": cap,
        }),
        vec![
            "probe",
            "i",
            "n_i",
            "mode",
            "value_num",
            "value_den_or_ci",
            "samples",
            "seed",
        ],
    );
    let mut trends = Vec::new();
    for probe_report in &reports {
        for row in &probe_report.rows {
            let (mode, num, den, n) = match &row.value {
                PValue::Exact(r) => {
                    ("exact", r.numer().to_string(), r.denom().to_string(), 0u64)
                }
                PValue::Estimate {
                    mean,
                    halfwidth,
                    samples,
                } => ("mc", mean.to_string(), halfwidth.to_string(), *samples),
            };
            report.push_row([
                probe_report.probe.to_string(),
                row.i.to_string(),
                row.n_i.to_string(),
                mode.to_string(),
                num,
                den,
                n.to_string(),
                seed.to_string(),
            ]);
        }
        trends.push(json!({
            "probe": probe_report.probe.to_string(),
            "trend_non_increasing": probe_report.trend_non_increasing,
            "expected_limit": 0,
        }));
    }
    report.derived_checks = json!(trends);
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn run_vershik(
    alpha_text: &str,
    s_basis: Option<&str>,
    alt: bool,
    window: i64,
    samples: u64,
    test: VershikTest,
    probes_text: Option<&str>,
    conjugators_text: Option<&str>,
    k: i64,
    seed: u64,
) -> Result<Report, CliError> {
    let alpha = alpha_text
        .parse::<ProbVector>()
        .map_err(as_parse_error)
        .ctx("--alpha")?;
    let colors = alpha.colors();
    let s = match s_basis {
        None => SignSubgroup::trivial(colors),
        Some(text) => {
            let parsed = SignSubgroup::parse(colors, text)
                .map_err(as_parse_error)
                .ctx("--s-basis")?;
            if alt {
                SignSubgroup::new_alt(colors, parsed.basis().to_vec())
                    .map_err(as_parse_error)
                    .ctx("--s-basis")?
            } else {
                parsed
            }
        }
    };
    if window < 0 {
        return Err(config_error("--window", format!("radius {window} is negative")));
    }
    let config = json!({
        "alpha": alpha.to_string(),
        "s_basis": s_basis.unwrap_or(""),
        "alt": alt,
        "window": window,
        "samples": samples,
        "seed": seed,
        "test": format!("{test:?}").to_lowercase(),
    });
    match test {
        VershikTest::Invariance => {
            let probes = parse_perms(
                probes_text
                    .ok_or_else(|| config_error("--probes", "invariance needs probes".into()))?,
                "--probes",
            )?;
            let conjugators = parse_perms(
                conjugators_text.ok_or_else(|| {
                    config_error("--conjugators", "invariance needs conjugators".into())
                })?,
                "--conjugators",
            )?;
            let rows = vershik::invariance_test(
                &alpha,
                &s,
                &probes,
                &conjugators,
                window,
                samples,
                seed,
            )
            .ctx("--probes")?;
            let mut report = Report::new(
                "vershik",
                config,
                vec![
                    "probe",
                    "conjugator",
                    "p_probe",
                    "p_conjugated",
                    "z",
                    "p_value",
                    "samples",
                    "seed",
                ],
            );
            for row in rows {
                report.push_row([
                    row.probe.to_string(),
                    row.conjugator.to_string(),
                    row.p_probe.to_string(),
                    row.p_conjugated.to_string(),
                    row.z.to_string(),
                    row.p_value.to_string(),
                    row.samples.to_string(),
                    seed.to_string(),
                ]);
            }
            Ok(report)
        }
        VershikTest::Degenerate => {
            let probes = parse_perms(
                probes_text.ok_or_else(|| {
                    config_error("--probes", "the degenerate test needs probes".into())
                })?,
                "--probes",
            )?;
            let mut report = Report::new(
                "vershik",
                config,
                vec!["probe", "parity", "members", "samples", "rate", "seed"],
            );
            for (idx, probe) in probes.iter().enumerate() {
                let rate = vershik::membership_rate(
                    &alpha,
                    &s,
                    probe,
                    window,
                    samples,
                    seed,
                    idx as u64,
                )
                .ctx("--probes")?;
                let members = (rate * samples as f64).round() as u64;
                report.push_row([
                    probe.to_string(),
                    probe.sign().to_string(),
                    members.to_string(),
                    samples.to_string(),
                    rate.to_string(),
                    seed.to_string(),
                ]);
            }
            Ok(report)
        }
        VershikTest::Shift => {
            let estimate = vershik::shift_structure_probability(&alpha, k, window, samples, seed)
                .ctx("--alpha")?;
            let mut report = Report::new(
                "vershik",
                config,
                vec!["k", "window", "samples", "estimate", "seed"],
            );
            report.push_row([
                k.to_string(),
                window.to_string(),
                samples.to_string(),
                estimate.to_string(),
                seed.to_string(),
            ]);
            Ok(report)
        }
    }
}

fn run_defect(
    seq_text: &str,
    depth: usize,
    epsilon: f64,
    probe_depth: usize,
    seed: u64,
) -> Result<Report, CliError> {
    let seq = parse_seq(seq_text)?;
    let probes = almosthom::enumerate_words(probe_depth);
    let pairs = almosthom::enumerate_pairs(probe_depth);
    let quotient = FiniteRep::quotient(&seq, depth, &probes).ctx("--depth")?;
    let (rep, distance) = if epsilon > 0.0 {
        let perturbed = quotient.perturb(epsilon, seed).ctx("--epsilon")?;
        let gens: Vec<Word> = vec!["t".parse().unwrap(), "s".parse().unwrap()];
        let d = quotient.distance(&perturbed, &gens).ctx("--epsilon")?;
        (perturbed, Some(d))
    } else {
        (quotient, None)
    };
    let mut report = Report::new(
        "defect",
        json!({
            "seq": seq.to_string(),
            "depth": depth,
            "degree": rep.degree(),
            "epsilon": epsilon,
            "probe_depth": probe_depth,
            "seed": seed,
        }),
        vec!["pair", "defect"],
    );
    let mut max_defect = neumann_groups::Rat::new(0, 1);
    for (u, v) in &pairs {
        let d = rep.defect(std::slice::from_ref(&(u.clone(), v.clone()))).ctx("--probe-depth")?;
        max_defect = max_defect.max(d);
        report.push_row([format!("{u} | {v}"), d.to_string()]);
    }
    report.derived_checks = json!({
        "degree": rep.degree(),
        "probe_elements": rep.probe_count(),
        "pairs": pairs.len(),
        "max_defect": max_defect.to_string(),
        "generator_distance": distance.map(|d| d.to_string()),
    });
    Ok(report)
}
