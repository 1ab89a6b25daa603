//! Command-line front end. `run` parses arguments and returns the process exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use super::config_file::{parse_document, ConfigDoc};
use super::plot::emit_plot;
use super::report::{compare, format_report, write_samples};
use super::sweep::{read_csv, run_sweep, write_csv, SweepSpec};
use crate::analytic::{ip_asymptotic, ip_closed_form, ip_lemma1};
use crate::checks;
use crate::montecarlo::{estimate_ip_with, EvalPath};
use crate::specfun::set_gamma_corruption;

pub const EXIT_EVAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum JammerArg {
    On,
    Off,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Mc,
    Lemma1,
    Closed,
    Asymptotic,
}

impl From<PathArg> for EvalPath {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Mc => EvalPath::Mc,
            PathArg::Lemma1 => EvalPath::Lemma1,
            PathArg::Closed => EvalPath::Closed,
            PathArg::Asymptotic => EvalPath::Asymptotic,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hstcn", version, about = "Intercept probability of a jamming-aided underlay hybrid satellite-terrestrial network")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// flat dotted-key configuration file; missing keys take the default table
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Monte Carlo sample count
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub samples: u64,
    /// jammer modes to evaluate (default: both; on for `asymptotic`; the config's mode for `sample`)
    #[arg(long, global = true, value_enum)]
    pub jammer: Option<JammerArg>,
    /// param=start:stop:step with param one of gamma_i, gamma_s, gamma_sj, mu_d, omega, b, gamma_th
    #[arg(long, global = true)]
    pub sweep: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// worker threads for Monte Carlo (results do not depend on it)
    #[arg(long, global = true, env = "HSTCN_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo estimate with a 95% Wilson interval
    Mc,
    /// nested quadrature
    Lemma1,
    /// Mellin-Barnes closed form
    Closed,
    /// large-interference-budget approximation (jammer on only)
    Asymptotic,
    /// evaluate a parameter grid and write CSV plus a run manifest
    Sweep {
        #[arg(long, value_enum, value_delimiter = ',', default_value = "mc,lemma1,closed,asymptotic")]
        paths: Vec<PathArg>,
    },
    /// three-way comparison report
    Validate,
    /// dump raw channel draws as CSV
    Sample,
    /// special-function identities, sampler KS tests and a reduced three-way check
    Selftest {
        #[arg(long, hide = true)]
        mutate_gamma: bool,
    },
    /// render a sweep CSV as SVG
    Plot { input: PathBuf },
}

enum Failure {
    Config(String),
    Eval(String),
}

fn load_config(path: Option<&Path>) -> Result<ConfigDoc, Failure> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    parse_document(&text).map_err(|e| {
        let loc = path.map(|p| format!("{}: ", p.display())).unwrap_or_default();
        Failure::Config(format!("{loc}{e}"))
    })
}

fn modes(arg: Option<JammerArg>, default: JammerArg) -> Vec<bool> {
    match arg.unwrap_or(default) {
        JammerArg::On => vec![true],
        JammerArg::Off => vec![false],
        JammerArg::Both => vec![true, false],
    }
}

fn jname(on: bool) -> &'static str {
    if on {
        "on"
    } else {
        "off"
    }
}

/// Writes to `--out` when given, otherwise to stdout.
fn emit(cli: &Cli, stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), Failure> {
    match &cli.out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::Eval(format!("{}: {e}", p.display()))),
        None => stdout.write_all(bytes).map_err(|e| Failure::Eval(e.to_string())),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    if cli.samples == 0 {
        return Err(Failure::Config("--samples must be positive".into()));
    }
    if cli.workers == Some(0) {
        return Err(Failure::Config("--workers must be positive".into()));
    }
    let workers = cli.workers;
    match &cli.command {
        Command::Mc | Command::Lemma1 | Command::Closed | Command::Asymptotic => {
            let doc = load_config(cli.config.as_deref())?;
            let default = if matches!(cli.command, Command::Asymptotic) { JammerArg::On } else { JammerArg::Both };
            let mut text = String::new();
            let mut failed = Vec::new();
            for on in modes(cli.jammer, default) {
                let cfg = doc.network.with_jammer(on);
                let res = match cli.command {
                    Command::Mc => Ok(estimate_ip_with(&cfg, cli.samples, cli.seed, workers)),
                    Command::Lemma1 => ip_lemma1(&cfg),
                    Command::Closed => ip_closed_form(&cfg),
                    _ => ip_asymptotic(&cfg),
                };
                match res {
                    Ok(v) if v.path == EvalPath::Mc => text.push_str(&format!(
                        "jammer {}: IP = {:.6}  95% CI [{:.6}, {:.6}]  n = {}  seed = {}  path = mc\n",
                        jname(on),
                        v.value,
                        v.ci_low,
                        v.ci_high,
                        v.n,
                        v.seed
                    )),
                    Ok(v) => text.push_str(&format!(
                        "jammer {}: IP = {:.6}  error estimate {:.1e}  raw {:.9}  path = {}\n",
                        jname(on),
                        v.value,
                        v.error,
                        v.raw,
                        v.path.name()
                    )),
                    Err(e) => failed.push(format!("jammer {}: {e}", jname(on))),
                }
            }
            emit(cli, stdout, text.as_bytes())?;
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Eval(failed.join("\n")))
            }
        }
        Command::Sweep { paths } => {
            let doc = load_config(cli.config.as_deref())?;
            let range = cli.sweep.as_deref().ok_or_else(|| Failure::Config("sweep needs --sweep param=start:stop:step".into()))?;
            let (param, start, stop, step) = SweepSpec::parse_range(range).map_err(Failure::Config)?;
            let mut paths: Vec<EvalPath> = paths.iter().map(|&p| p.into()).collect();
            paths.dedup();
            let spec = SweepSpec {
                param,
                start,
                stop,
                step,
                jammer: modes(cli.jammer, JammerArg::Both),
                paths,
                n_samples: cli.samples,
                seed: cli.seed,
            };
            let (rows, manifest) = run_sweep(&spec, &doc, workers).map_err(Failure::Config)?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf).map_err(|e| Failure::Eval(e.to_string()))?;
            emit(cli, stdout, &buf)?;
            let man = toml::to_string(&manifest).map_err(|e| Failure::Eval(e.to_string()))?;
            match &cli.out {
                Some(p) => {
                    let mp = PathBuf::from(format!("{}.manifest.toml", p.display()));
                    std::fs::write(&mp, man).map_err(|e| Failure::Eval(format!("{}: {e}", mp.display())))?;
                    writeln!(stderr, "wrote {} and {}", p.display(), mp.display()).ok();
                }
                None => {
                    stderr.write_all(man.as_bytes()).ok();
                }
            }
            let errors: Vec<String> = manifest
                .points
                .iter()
                .flat_map(|p| p.errors.iter().map(move |e| format!("{} = {} jammer {}: {e}", spec.param.name(), p.value, jname(p.jammer))))
                .collect();
            if errors.is_empty() {
                Ok(())
            } else {
                Err(Failure::Eval(errors.join("\n")))
            }
        }
        Command::Validate => {
            let doc = load_config(cli.config.as_deref())?;
            let rows: Vec<_> =
                modes(cli.jammer, JammerArg::Both).into_iter().map(|on| compare(&doc.network.with_jammer(on), cli.samples, cli.seed, workers)).collect();
            emit(cli, stdout, format_report(&rows, cli.samples, cli.seed).as_bytes())?;
            if rows.iter().any(|r| r.evaluator_failed() || !r.passed()) {
                Err(Failure::Eval("three-way comparison failed".into()))
            } else {
                Ok(())
            }
        }
        Command::Sample => {
            let doc = load_config(cli.config.as_deref())?;
            let on = match cli.jammer {
                None => doc.network.power.jammer_on,
                Some(JammerArg::On) => true,
                Some(JammerArg::Off) => false,
                Some(JammerArg::Both) => return Err(Failure::Config("sample dumps one jammer mode at a time".into())),
            };
            let cfg = doc.network.with_jammer(on);
            match &cli.out {
                Some(p) => {
                    let f = std::fs::File::create(p).map_err(|e| Failure::Eval(format!("{}: {e}", p.display())))?;
                    write_samples(&cfg, cli.samples, cli.seed, std::io::BufWriter::new(f)).map_err(|e| Failure::Eval(e.to_string()))
                }
                None => write_samples(&cfg, cli.samples, cli.seed, stdout).map_err(|e| Failure::Eval(e.to_string())),
            }
        }
        Command::Selftest { mutate_gamma } => {
            if *mutate_gamma {
                set_gamma_corruption(true);
            }
            let results = checks::selftest(cli.seed, workers);
            set_gamma_corruption(false);
            let mut text = String::new();
            for c in &results {
                text.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
            }
            let failed: Vec<&str> = results.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            text.push_str(&format!("{} of {} checks passed\n", results.len() - failed.len(), results.len()));
            emit(cli, stdout, text.as_bytes())?;
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Eval(format!("failed checks: {}", failed.join(", "))))
            }
        }
        Command::Plot { input } => {
            let out = cli.out.as_ref().ok_or_else(|| Failure::Config("plot needs --out <file.svg>".into()))?;
            let f = std::fs::File::open(input).map_err(|e| Failure::Config(format!("{}: {e}", input.display())))?;
            let rows = read_csv(f).map_err(|e| Failure::Config(format!("{}: {e}", input.display())))?;
            emit_plot(&rows, out).map_err(Failure::Config)
        }
    }
}

pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                stdout.write_all(text.as_bytes()).ok();
            } else {
                stderr.write_all(text.as_bytes()).ok();
            }
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(Failure::Config(m)) => {
            writeln!(stderr, "configuration error: {m}").ok();
            EXIT_CONFIG
        }
        Err(Failure::Eval(m)) => {
            writeln!(stderr, "evaluation failed: {m}").ok();
            EXIT_EVAL
        }
    }
}
