use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use cwsat::af::{parse_by_extension, Af, Mode, Oracle, SemanticsId};
use cwsat::encoder::{dnf_matrix, encode, EncodeError};
use cwsat::formula::{parse_dimacs, write_dimacs, write_qbf};
use cwsat::hardness::{reduction_af, ThreeCnf};
use cwsat::kexpr::{parse_kexpr, search_expression, trivial_expression, validate, KExpr, SearchError};
use cwsat::solver::{self, SolverConfig, SolverError};
use cwsat::witness::{build_outer_witness, build_witness, render_witness, verify_witness};

const EXIT_FALSE: u8 = 1;
const EXIT_INPUT: u8 = 3;
const EXIT_RESOURCE: u8 = 4;

#[derive(Parser)]
#[command(name = "cwsat", version, about = "Clique-width guided SAT encodings for argumentation frameworks")]
struct Cli {
    /// Give up after this many conflicts per solver call.
    #[arg(long, global = true)]
    conflict_budget: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Cred,
    Skept,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check that an expression builds the framework.
    Validate { af: PathBuf, expr: PathBuf },
    /// Emit the encoding as DIMACS (cf/adm/com/stb) or QBF (prf/sst/stg).
    Encode {
        #[arg(long)]
        sem: SemanticsId,
        af: PathBuf,
        expr: Option<PathBuf>,
        #[arg(short)]
        o: Option<PathBuf>,
        /// Replace the CNF part of a QBF matrix by its DNF conversion.
        #[arg(long)]
        dnf_matrix: bool,
        /// Write `<clause-index> <node-id> eq<tag>` per clause.
        #[arg(long)]
        provenance: Option<PathBuf>,
    },
    /// Decide a DIMACS file.
    Solve {
        cnf: PathBuf,
        /// External solver command; the file path is appended.
        #[arg(long, env = "CWSAT_EXTERNAL_SOLVER")]
        external: Option<String>,
    },
    /// Count extensions through the encoding.
    Count {
        #[arg(long)]
        sem: SemanticsId,
        af: PathBuf,
        expr: Option<PathBuf>,
    },
    /// Credulous or skeptical acceptance of one argument.
    Accept {
        #[arg(long)]
        sem: SemanticsId,
        #[arg(long)]
        arg: String,
        #[arg(long, value_enum)]
        mode: ModeArg,
        af: PathBuf,
        expr: Option<PathBuf>,
    },
    /// Brute-force reference semantics.
    Oracle {
        #[arg(long)]
        sem: SemanticsId,
        af: PathBuf,
        #[arg(long)]
        enumerate: bool,
    },
    /// Build and verify a witness expression for the encoding's matrix.
    Witness {
        #[arg(long)]
        sem: SemanticsId,
        af: PathBuf,
        expr: Option<PathBuf>,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// 3SAT → AF reduction of a DIMACS file.
    GenHard {
        cnf: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Search for a small-width expression.
    FindKexpr {
        af: PathBuf,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        /// Search step budget.
        #[arg(long, default_value_t = 2_000_000)]
        budget: usize,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_af(path: &Path) -> Result<Af> {
    let text = read(path)?;
    parse_by_extension(&path.to_string_lossy(), &text).with_context(|| format!("in {}", path.display()))
}

fn load_expr(af: &Af, path: Option<&Path>) -> Result<KExpr> {
    match path {
        Some(p) => parse_kexpr(&read(p)?).with_context(|| format!("in {}", p.display())),
        None => {
            eprintln!("warning: no expression given; using the trivial width-{} expression", af.len());
            Ok(trivial_expression(af)?)
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = SolverConfig { conflict_budget: cli.conflict_budget };
    match cli.cmd {
        Cmd::Validate { af, expr } => {
            let af = load_af(&af)?;
            let x = parse_kexpr(&read(&expr)?)?;
            match validate(&x, &af) {
                Ok(()) => {
                    println!("VALID width={}", x.width());
                    Ok(0)
                }
                Err(d) => {
                    eprintln!("{d}");
                    println!("INVALID");
                    Ok(EXIT_INPUT)
                }
            }
        }
        Cmd::Encode { sem, af, expr, o, dnf_matrix: dnf, provenance } => {
            let af = load_af(&af)?;
            let x = load_expr(&af, expr.as_deref())?;
            let enc = encode(&af, &x, sem)?;
            let text = match (enc.qbf(), dnf) {
                (None, true) => bail!(EncodeError::BadGuide(format!("--dnf-matrix needs a second-level semantics, not {sem}"))),
                (None, false) => write_dimacs(&enc.cnf()),
                (Some(q), false) => write_qbf(&q),
                (Some(_), true) => {
                    let guide = build_outer_witness(&enc, &x)?.expression;
                    write_qbf(&dnf_matrix(&enc, &guide)?)
                }
            };
            write_out(o.as_deref(), &text)?;
            if let Some(p) = provenance {
                fs::write(&p, enc.provenance_map()).with_context(|| format!("cannot write {}", p.display()))?;
            }
            if o.is_some() {
                let (clauses, _) = enc.matrix_clauses();
                println!("vars={} clauses={}", enc.vars.len(), clauses.len());
            }
            Ok(0)
        }
        Cmd::Solve { cnf, external } => {
            let r = match external {
                Some(cmd) => solver::external_solve(&cnf, &cmd)?,
                None => solver::solve_cnf_with(&parse_dimacs(&read(&cnf)?)?, &cfg)?,
            };
            println!("{}", if r.is_sat() { "SAT" } else { "UNSAT" });
            Ok(0)
        }
        Cmd::Count { sem, af, expr } => {
            let af = load_af(&af)?;
            let x = load_expr(&af, expr.as_deref())?;
            println!("{}", solver::count(&af, &x, sem, &cfg)?);
            Ok(0)
        }
        Cmd::Accept { sem, arg, mode, af, expr } => {
            let af = load_af(&af)?;
            let x = load_expr(&af, expr.as_deref())?;
            let a = af.argument(&arg)?;
            let mode = match mode {
                ModeArg::Cred => Mode::Credulous,
                ModeArg::Skept => Mode::Skeptical,
            };
            let yes = solver::decide(&af, &x, sem, &a, mode, &cfg)?;
            println!("{}", if yes { "YES" } else { "NO" });
            Ok(if yes { 0 } else { EXIT_FALSE })
        }
        Cmd::Oracle { sem, af, enumerate } => {
            let af = load_af(&af)?;
            let exts = Oracle::new(&af)?.enumerate(sem);
            if enumerate {
                for e in &exts {
                    println!("{}", e.display(&af));
                }
            } else {
                println!("{}", exts.len());
            }
            Ok(0)
        }
        Cmd::Witness { sem, af, expr, o } => {
            let af = load_af(&af)?;
            let x = load_expr(&af, expr.as_deref())?;
            let enc = encode(&af, &x, sem)?;
            let w = build_witness(&enc, &x)?;
            if let Some(p) = &o {
                fs::write(p, render_witness(&w)).with_context(|| format!("cannot write {}", p.display()))?;
            }
            let report = verify_witness(&enc, &w);
            println!("{report}");
            Ok(if report.ok() { 0 } else { EXIT_FALSE })
        }
        Cmd::GenHard { cnf, o } => {
            let phi = ThreeCnf::from_cnf(&parse_dimacs(&read(&cnf)?)?)?;
            let af = reduction_af(&phi);
            write_out(o.as_deref(), &af.to_apx())?;
            if o.is_some() {
                println!("arguments={} attacks={}", af.len(), af.num_attacks());
            }
            Ok(0)
        }
        Cmd::FindKexpr { af, kmax, budget } => {
            let af = load_af(&af)?;
            match search_expression(&af, kmax, budget)? {
                Some(x) => println!("{x}"),
                None => println!("NONE"),
            }
            Ok(0)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if matches!(cause.downcast_ref::<SolverError>(), Some(SolverError::ResourceLimit(_)))
            || matches!(cause.downcast_ref::<SearchError>(), Some(SearchError::BudgetExhausted(_)))
        {
            return EXIT_RESOURCE;
        }
    }
    EXIT_INPUT
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
