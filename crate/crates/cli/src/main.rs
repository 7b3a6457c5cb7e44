use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use fsverify::compiler::{compile_strong, compile_weak};
use fsverify::derandomize::{
    check_private_coin, check_public_coin, find_private_certificate, to_one_way_multihead, CheckOutcome,
    MultiTrackCertificate,
};
use fsverify::dissimilarity::{n_dissimilarity, ALL, EVEN};
use fsverify::format::{parse_machine, serialize_compiled, serialize_multihead, Machine};
use fsverify::markov::{acceptance_probability_2pfa, build_split_chain, parse_fraction, TwoPfa};
use fsverify::showcase::{NH, TWIN};
use fsverify::verifier::{fraction, Objective};
use fsverify::{Certificate, CompiledVerifier, MultiheadAutomaton, VerifierMachine};

/// Finite-state verifiers, their compilers and their analyses.
#[derive(Parser)]
#[command(name = "fsverify", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multihead automaton on an input.
    Check { machine: PathBuf, input: String },
    /// Compile a multihead automaton into a finite-state verifier.
    Compile {
        machine: PathBuf,
        /// Soundness error bound, e.g. 1/4.
        #[arg(long, default_value = "1/2")]
        eps: String,
        /// Build the verifier that also bounds non-halting by 1/2.
        #[arg(long)]
        strong: bool,
    },
    /// Print the honest certificate of a compiled verifier for a member.
    Cert { compiled: PathBuf, input: String },
    /// Exact outcome distribution of a verifier on an input and certificate.
    /// The certificate is given inline, or as `@file`.
    Prob { verifier: PathBuf, input: String, cert: String },
    /// Best certificate of bounded length against a verifier.
    Attack {
        verifier: PathBuf,
        input: String,
        #[arg(long)]
        maxlen: usize,
        /// Maximize non-halting instead of acceptance.
        #[arg(long)]
        nonhalt: bool,
    },
    /// Derandomized checks and the equivalent one-way multihead automaton.
    Derand {
        verifier: PathBuf,
        #[arg(value_enum)]
        method: Method,
        /// Input, for the private and public checks.
        input: Option<String>,
        /// Multi-track certificate file; the private check searches for one
        /// when absent.
        #[arg(long)]
        cert: Option<PathBuf>,
        /// Column cap for the private check.
        #[arg(long)]
        cap: Option<usize>,
        /// With onenfa, list the accepted strings up to this length instead
        /// of printing the automaton.
        #[arg(long)]
        lang: Option<usize>,
    },
    /// Split chain of a 2pfa on the input `xy` and its absorption.
    Markov { pfa: PathBuf, x: String, y: String },
    /// Maximum number of pairwise n-dissimilar strings.
    Dissim {
        #[arg(value_enum)]
        language: Language,
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Private,
    Public,
    Onenfa,
}

#[derive(Clone, Copy, ValueEnum)]
enum Language {
    Twin,
    Nh,
    Even,
    All,
}

/// Exit status 0 for success or acceptance, 1 for rejection.
struct Report {
    text: String,
    positive: bool,
}

impl Report {
    fn ok(text: String) -> Report {
        Report { text, positive: true }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(path: &Path) -> Result<Machine> {
    parse_machine(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn load_multihead(path: &Path) -> Result<MultiheadAutomaton> {
    match load(path)? {
        Machine::Multihead(m) => Ok(m),
        _ => bail!("{} is not a multihead automaton", path.display()),
    }
}

fn load_verifier(path: &Path) -> Result<VerifierMachine> {
    match load(path)? {
        Machine::Verifier(v) => Ok(v),
        Machine::Compiled(c) => Ok(c.verifier),
        Machine::Multihead(_) => bail!("{} is not a verifier", path.display()),
    }
}

fn load_compiled(path: &Path) -> Result<CompiledVerifier> {
    match load(path)? {
        Machine::Compiled(c) => Ok(c),
        _ => bail!("{} is not a compiled verifier", path.display()),
    }
}

fn check_input(alphabet: &[char], input: &str) -> Result<()> {
    match input.chars().find(|c| !alphabet.contains(c)) {
        Some(c) => bail!("input letter '{c}' is not in the alphabet"),
        None => Ok(()),
    }
}

fn outcome_line(o: &CheckOutcome) -> String {
    let mut s = format!(
        "{} accepting_machines={}/{}",
        if o.accepted { "accept" } else { "reject" },
        o.accepting_machines,
        o.machines
    );
    if let Some(r) = &o.reason {
        s.push_str(&format!(" reason={r}"));
    }
    s
}

fn run(cli: Cli) -> Result<Report> {
    match cli.command {
        Command::Check { machine, input } => {
            let m = load_multihead(&machine)?;
            check_input(m.alphabet(), &input)?;
            let report = m.validate();
            if !report.is_ok() {
                bail!("invalid automaton: {report}");
            }
            let yes = m.accepts(&input);
            Ok(Report { text: (if yes { "accept" } else { "reject" }).into(), positive: yes })
        }
        Command::Compile { machine, eps, strong } => {
            let m = load_multihead(&machine)?;
            let compiled = if strong {
                compile_strong(&m)?
            } else {
                compile_weak(&m, &parse_fraction(&eps).map_err(|e| anyhow!("--eps: {e}"))?)?
            };
            Ok(Report::ok(serialize_compiled(&compiled).trim_end().to_string()))
        }
        Command::Cert { compiled, input } => {
            let c = load_compiled(&compiled)?;
            check_input(c.verifier.alphabet(), &input)?;
            match c.honest_certificate(&input) {
                Ok(cert) => Ok(Report::ok(cert.render(&c.verifier))),
                Err(e) => Ok(Report { text: e.to_string(), positive: false }),
            }
        }
        Command::Prob { verifier, input, cert } => {
            let v = load_verifier(&verifier)?;
            check_input(v.alphabet(), &input)?;
            let text = match cert.strip_prefix('@') {
                Some(path) => read(Path::new(path))?,
                None => cert,
            };
            let cert = Certificate::parse(&v, &text).map_err(|e| anyhow!("certificate: {e}"))?;
            let d = v.outcome_distribution(&input, &cert)?;
            Ok(Report::ok(format!(
                "accept={} reject={} nonhalt={}",
                fraction(&d.accept),
                fraction(&d.reject),
                fraction(&d.nonhalt)
            )))
        }
        Command::Attack { verifier, input, maxlen, nonhalt } => {
            let v = load_verifier(&verifier)?;
            check_input(v.alphabet(), &input)?;
            let objective = if nonhalt { Objective::Nonhalt } else { Objective::Accept };
            let a = v.worst_case_certificate(&input, maxlen, objective)?;
            Ok(Report::ok(format!(
                "{}={} certificate=[{}] ensembles={}",
                if nonhalt { "max_nonhalt" } else { "max_accept" },
                fraction(&a.probability),
                a.certificate.render(&v),
                a.ensembles
            )))
        }
        Command::Derand { verifier, method, input, cert, cap, lang } => {
            let v = load_verifier(&verifier)?;
            let need_input = || -> Result<String> {
                let x = input.clone().ok_or_else(|| anyhow!("this method needs an input"))?;
                check_input(v.alphabet(), &x)?;
                Ok(x)
            };
            let tracks = || -> Result<Option<MultiTrackCertificate>> {
                cert.as_ref()
                    .map(|p| MultiTrackCertificate::parse(&v, &read(p)?).map_err(|e| anyhow!("certificate: {e}")))
                    .transpose()
            };
            match method {
                Method::Private => {
                    let x = need_input()?;
                    let outcome = match tracks()? {
                        Some(t) => check_private_coin(&v, &x, &t, cap)?,
                        None => match find_private_certificate(&v, &x, cap)? {
                            Some(t) => {
                                let o = check_private_coin(&v, &x, &t, cap)?;
                                let text = format!("{}\n{}", outcome_line(&o), t.render(&v).trim_end());
                                return Ok(Report { text, positive: o.accepted });
                            }
                            None => return Ok(Report { text: "reject no-certificate".into(), positive: false }),
                        },
                    };
                    Ok(Report { text: outcome_line(&outcome), positive: outcome.accepted })
                }
                Method::Public => {
                    let x = need_input()?;
                    let t = tracks()?.ok_or_else(|| anyhow!("the public check needs --cert"))?;
                    let transcripts: Vec<_> = (0..1usize << v.coin_budget()).map(|i| t.track(i)).collect();
                    let outcome = check_public_coin(&v, &x, &transcripts)?;
                    Ok(Report { text: outcome_line(&outcome), positive: outcome.accepted })
                }
                Method::Onenfa => {
                    let m = to_one_way_multihead(&v)?;
                    match lang {
                        Some(n) => {
                            let words: Vec<String> = m
                                .enumerate_language(n)
                                .into_iter()
                                .map(|w| if w.is_empty() { "(empty)".to_string() } else { w })
                                .collect();
                            Ok(Report::ok(words.join("\n")))
                        }
                        None => Ok(Report::ok(serialize_multihead(&m).trim_end().to_string())),
                    }
                }
            }
        }
        Command::Markov { pfa, x, y } => {
            let a = TwoPfa::new(load_verifier(&pfa)?)?;
            check_input(a.machine.alphabet(), &format!("{x}{y}"))?;
            let split = build_split_chain(&a, &x, &y)?;
            let via_split = split.acceptance();
            let direct = acceptance_probability_2pfa(&a, &format!("{x}{y}"));
            let mut text = format!("c={} states={}\n", split.c, 2 * split.c);
            text.push_str(&split.chain.render());
            if !split.redirected.is_empty() {
                let r: Vec<String> = split.redirected.iter().map(|i| (i + 1).to_string()).collect();
                text.push_str(&format!("redirected {}\n", r.join(" ")));
            }
            text.push_str(&format!("accept={} direct={}", fraction(&via_split), fraction(&direct)));
            if via_split != direct {
                bail!("split chain disagrees with the configuration chain\n{text}");
            }
            Ok(Report::ok(text))
        }
        Command::Dissim { language, n } => {
            let lang = match language {
                Language::Twin => &TWIN,
                Language::Nh => &NH,
                Language::Even => &EVEN,
                Language::All => &ALL,
            };
            let rep = n_dissimilarity(lang, n);
            let show = |w: &str| if w.is_empty() { "(empty)".to_string() } else { w.to_string() };
            let mut text = format!("N={}\nwitnesses {}", rep.value, rep.witnesses.iter().map(|w| show(w)).collect::<Vec<_>>().join(" "));
            for (i, j, v) in &rep.distinguishers {
                text.push_str(&format!("\n{} {} by {}", show(&rep.witnesses[*i]), show(&rep.witnesses[*j]), show(v)));
            }
            Ok(Report::ok(text))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", report.text);
            if report.positive {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
