//! The `logiviz` command line.
//!
//! Exit codes: 0 on success, 1 for errors in the user's input, 2 for
//! internal failures.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::apps::{self, AppError, SimConfig, SimStatus, Verdict};
use crate::inputdecode::ClickEvent;
use crate::lang::{parse_program, print, Program, Theory};
use crate::model::{merge, Structure};
use crate::service::{self, ServiceConfig};
use crate::solver::{self, SolveOptions, DEFAULT_NODE_BUDGET};
use crate::vizencode::{self, DrawingSpec};

#[derive(Parser, Debug)]
#[command(name = "logiviz", version, about = "Solve, visualise and simulate FO(.) programs")]
pub struct Cli {
    /// Branch nodes the solver may visit per inference.
    #[arg(long, global = true, env = "LOGIVIZ_NODE_BUDGET", default_value_t = DEFAULT_NODE_BUDGET)]
    pub node_budget: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and check a program.
    Check { file: PathBuf },
    /// Print models of a theory over a structure.
    Solve {
        file: PathBuf,
        #[arg(long)]
        theory: String,
        #[arg(long)]
        structure: String,
        /// Number of models; 0 prints all of them.
        #[arg(long, default_value_t = 1)]
        nbmodels: usize,
    },
    /// Emit the drawing of a structure or of a theory's first model.
    Viz {
        file: PathBuf,
        /// Without a theory the (merged) structure itself is drawn.
        #[arg(long)]
        theory: Option<String>,
        /// May be repeated; the structures are merged.
        #[arg(long, required = true)]
        structure: Vec<String>,
        #[arg(long)]
        vis_theory: Option<String>,
        /// May be repeated; the structures are merged.
        #[arg(long)]
        vis_structure: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Look for a model of one theory that another rejects.
    Compare {
        file: PathBuf,
        #[arg(long)]
        user: String,
        #[arg(long)]
        correct: String,
        #[arg(long)]
        structure: String,
        #[arg(long)]
        vis_theory: Option<String>,
        #[arg(long)]
        vis_structure: Vec<String>,
        #[arg(long, default_value_t = 10)]
        bound: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a simulation headlessly from a click log.
    Sim {
        file: PathBuf,
        /// JSON array with one array of clicked keys per step.
        #[arg(long)]
        clicks: PathBuf,
        /// Writes step-NNN.viz.json files here instead of printing.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Serve the simulation over HTTP.
    Serve {
        /// Checked at startup; sessions upload their own programs.
        file: Option<PathBuf>,
        #[arg(long, env = "LOGIVIZ_LISTEN", default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Idle session lifetime in seconds.
        #[arg(long, env = "LOGIVIZ_TTL", default_value_t = 1800)]
        ttl: u64,
        /// Caps the candidate states enumerated per inference.
        #[arg(long, env = "LOGIVIZ_NBMODELS_CAP")]
        nbmodels_cap: Option<usize>,
        /// Directory with the browser client.
        #[arg(long, env = "LOGIVIZ_STATIC_DIR")]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{source}")]
    Program {
        path: PathBuf,
        source: crate::lang::LangError,
    },
    #[error(transparent)]
    App(#[from] AppError),
    #[error("{0}")]
    Usage(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 2,
            _ => 1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load(path: &Path) -> Result<Program, CliError> {
    parse_program(&read(path)?).map_err(|source| CliError::Program {
        path: path.to_owned(),
        source,
    })
}

fn theory<'a>(p: &'a Program, name: &str) -> Result<&'a Theory, CliError> {
    p.theory(name).ok_or_else(|| {
        AppError::MissingObject {
            kind: "theory",
            name: name.into(),
        }
        .into()
    })
}

fn structure(p: &Program, names: &[String]) -> Result<Structure, CliError> {
    let mut out: Option<Structure> = None;
    for n in names {
        let s = p.structure(n).ok_or_else(|| AppError::MissingObject {
            kind: "structure",
            name: n.clone(),
        })?;
        out = Some(match out {
            None => s.clone(),
            Some(acc) => merge(&acc, s).map_err(AppError::from)?,
        });
    }
    Ok(out.unwrap_or_else(Structure::empty))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, &format!("{text}\n")),
        None => writeln!(out, "{text}").map_err(|e| CliError::Internal(e.to_string())),
    }
}

/// Parses a click log: one array of keys per step.
pub fn parse_click_log(text: &str) -> Result<Vec<Vec<String>>, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("click log: {e}")))
}

/// Runs a simulation over a click log and returns the spec of every
/// displayed frame, starting with the initial one. The flag tells whether
/// the simulation finished before the log was used up.
pub fn simulate(cfg: &SimConfig, log: &[Vec<String>]) -> Result<(Vec<DrawingSpec>, bool), AppError> {
    let mut state = apps::sim_init(cfg)?;
    let mut specs = vec![state.last_spec.clone()];
    for keys in log {
        let time = state.frame_time().unwrap_or(0);
        let clicks: Vec<ClickEvent> = keys.iter().map(|k| ClickEvent { time, key: k.clone() }).collect();
        state = apps::sim_step(cfg, &state, &clicks)?;
        if state.status == SimStatus::Finished {
            return Ok((specs, true));
        }
        specs.push(state.last_spec.clone());
    }
    Ok((specs, false))
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let opts = SolveOptions {
        nbmodels: Some(1),
        node_budget: cli.node_budget,
    };
    let io = |e: std::io::Error| CliError::Internal(e.to_string());
    match cli.command {
        Command::Check { file } => {
            load(&file)?;
        }
        Command::Solve {
            file,
            theory: t,
            structure: s,
            nbmodels,
        } => {
            let p = load(&file)?;
            let t = theory(&p, &t)?;
            let s = structure(&p, &[s])?;
            let opts = SolveOptions {
                nbmodels: (nbmodels > 0).then_some(nbmodels),
                ..opts
            };
            let ms = solver::modelexpand(t, &s, opts).map_err(AppError::from)?;
            if ms.models.is_empty() {
                writeln!(out, "Unsatisfiable").map_err(io)?;
            }
            for m in &ms.models {
                write!(out, "{}", print::structure(m)).map_err(io)?;
            }
        }
        Command::Viz {
            file,
            theory: t,
            structure: s,
            vis_theory,
            vis_structure,
            output,
        } => {
            let p = load(&file)?;
            let s = structure(&p, &s)?;
            let m = match t {
                Some(t) => solver::onemodel(theory(&p, &t)?, &s, opts)
                    .map_err(AppError::from)?
                    .ok_or(AppError::NoVisualisationModel)?,
                None => s,
            };
            let spec = match vis_theory {
                Some(tv) => apps::visualise_model(theory(&p, &tv)?, &m, &structure(&p, &vis_structure)?, opts)?,
                None => vizencode::encode(&m).map_err(AppError::from)?,
            };
            emit(out, output.as_deref(), &vizencode::serialize(&spec))?;
        }
        Command::Compare {
            file,
            user,
            correct,
            structure: s,
            vis_theory,
            vis_structure,
            bound,
            output,
        } => {
            let p = load(&file)?;
            let (tu, tc) = (theory(&p, &user)?, theory(&p, &correct)?);
            let s = structure(&p, &[s])?;
            let empty;
            let tv = match &vis_theory {
                Some(n) => theory(&p, n)?,
                None => {
                    empty = Theory::empty("none", s.vocabulary.clone());
                    &empty
                }
            };
            let (r, spec) = apps::compare_theories(tu, tc, tv, &s, &structure(&p, &vis_structure)?, bound, opts)?;
            let verdict = match r.verdict {
                Verdict::Counterexample => "counterexample",
                Verdict::Matching => "matching",
                Verdict::EquivalentUpToBound => "equivalent-up-to-bound",
            };
            writeln!(err, "{verdict} after {} model(s)", r.checked).map_err(io)?;
            if let Some(w) = &r.witness {
                write!(err, "{}", print::structure(w)).map_err(io)?;
            }
            emit(out, output.as_deref(), &vizencode::serialize(&spec))?;
        }
        Command::Sim { file, clicks, output } => {
            let p = load(&file)?;
            let log = parse_click_log(&read(&clicks)?)?;
            let cfg = SimConfig::from_program(&p, opts)?;
            let (specs, finished) = simulate(&cfg, &log)?;
            if let Some(dir) = &output {
                std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                    path: dir.clone(),
                    source,
                })?;
            }
            for (i, spec) in specs.iter().enumerate() {
                let text = vizencode::serialize(spec);
                match &output {
                    Some(dir) => write_file(&dir.join(format!("step-{i:03}.viz.json")), &format!("{text}\n"))?,
                    None => writeln!(out, "{text}").map_err(io)?,
                }
            }
            if finished {
                writeln!(err, "simulation finished after {} step(s)", specs.len() - 1).map_err(io)?;
            }
        }
        Command::Serve {
            file,
            listen,
            ttl,
            nbmodels_cap,
            static_dir,
        } => {
            if let Some(f) = &file {
                let p = load(f)?;
                SimConfig::from_program(&p, opts)?;
            }
            let config = ServiceConfig {
                ttl: Duration::from_secs(ttl),
                node_budget: cli.node_budget,
                nbmodels_cap,
                static_dir,
            };
            let rt = tokio::runtime::Runtime::new().map_err(io)?;
            rt.block_on(service::serve(listen, config))
                .map_err(|e| CliError::Usage(format!("{listen}: {e}")))?;
        }
    }
    Ok(())
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 1;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| execute(cli, out, err)));
    match result {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
        Err(_) => {
            let _ = writeln!(err, "error: internal failure");
            2
        }
    }
}
