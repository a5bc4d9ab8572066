//! Command-line surface: file ingestion, subcommand dispatch, report
//! emission, and the reproducibility suite runner.
//!
//! Exit codes: 0 success; 1 infeasible or verification failed; 2 input
//! validation; 3 numerical rank ambiguity.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use orthostab::classify::{classify_hermitian, reduce_pair_to_identity};
use orthostab::dimensions::{stab_dim_herm, stab_dim_sym, DimReport};
use orthostab::error::Error as CoreError;
use orthostab::forms::{HermSpec, SymSpec};
use orthostab::oracle::{oracle_dim_herm, oracle_dim_sym, verify_stab_element, Action};
use orthostab::stab::{stabilizer_herm, stabilizer_sym, StabilizerSpace};
use orthostab::suite::{example_2_7, example_3_3, run_suite};
use orthostab::{Mat, TolPolicy};

#[derive(Parser)]
#[command(name = "orthostab", version, about = "Canonical forms and stabilizers of symmetric/Hermitian matrices under the complex orthogonal group")]
struct Cli {
    /// Rank-tolerance multiplier; overrides the ORTHOSTAB_TOL environment
    /// variable, which overrides the default of 1.
    #[arg(long, global = true)]
    tol_multiplier: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ActionArg {
    Sym,
    Herm,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form stabilizer dimensions of a normal-form spec.
    Stabdim {
        #[arg(long)]
        spec: PathBuf,
        /// Also run the tangent-space oracle on the assembled form.
        #[arg(long)]
        with_oracle: bool,
    },
    /// Tangent-space stabilizer dimension of a concrete matrix.
    Oracle {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum)]
        action: ActionArg,
    },
    /// Parameterize the stabilizer of a normal-form spec and emit samples.
    Solve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 3)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Structural classification of a Hermitian matrix.
    Classify {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Reduce a Hermitian/symmetric pair (A, B) to (A~, I).
    Reduce {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Verify a candidate stabilizer element.
    Verify {
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        m: PathBuf,
        #[arg(long, value_enum)]
        action: ActionArg,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Run the full reproducibility suite.
    Suite {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce a worked example and diff against the shipped fixture.
    Example {
        #[arg(long)]
        name: String,
    },
}

fn exit_code_for(err: &CoreError) -> u8 {
    match err {
        CoreError::RankAmbiguous { .. }
        | CoreError::EigenvalueClusterAmbiguous(_)
        | CoreError::SingularInput { .. }
        | CoreError::InternalCheck(_) => 3,
        _ => 2,
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        2u8
    })?;
    serde_json::from_str(&text).map_err(|e| {
        eprintln!("error: cannot parse {}: {e}", path.display());
        2u8
    })
}

fn emit<T: Serialize>(value: &T) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).expect("serializable");
    // tolerate a closed pipe on the consumer side
    let _ = writeln!(std::io::stdout(), "{text}");
}

enum SpecFile {
    Sym(SymSpec),
    Herm(HermSpec),
}

fn read_spec(path: &Path) -> Result<SpecFile, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        2u8
    })?;
    if let Ok(h) = serde_json::from_str::<HermSpec>(&text) {
        if h.validate().is_ok() {
            return Ok(SpecFile::Herm(h));
        }
    }
    match serde_json::from_str::<SymSpec>(&text) {
        Ok(s) => match s.validate() {
            Ok(()) => Ok(SpecFile::Sym(s)),
            Err(e) => {
                eprintln!("error: invalid spec: {e}");
                Err(2)
            }
        },
        Err(e) => {
            eprintln!("error: {} is neither a Hermitian nor a symmetric spec: {e}", path.display());
            Err(2)
        }
    }
}

fn policy_from(cli_mult: Option<f64>) -> TolPolicy {
    let mult = cli_mult.or_else(|| {
        std::env::var("ORTHOSTAB_TOL").ok().and_then(|v| v.parse::<f64>().ok())
    });
    match mult {
        Some(m) if m > 0.0 && m.is_finite() => TolPolicy::with_multiplier(m),
        _ => TolPolicy::default(),
    }
}

fn run() -> Result<u8, u8> {
    let cli = Cli::parse();
    let policy = policy_from(cli.tol_multiplier);
    match cli.cmd {
        Cmd::Stabdim { spec, with_oracle } => {
            let spec = read_spec(&spec)?;
            let mut report: DimReport = match &spec {
                SpecFile::Sym(s) => stab_dim_sym(s).map_err(|e| {
                    eprintln!("error: {e}");
                    exit_code_for(&e)
                })?,
                SpecFile::Herm(h) => stab_dim_herm(h).map_err(|e| {
                    eprintln!("error: {e}");
                    exit_code_for(&e)
                })?,
            };
            if with_oracle {
                let handle = |e: CoreError| {
                    eprintln!("error: {e}");
                    exit_code_for(&e)
                };
                let oracle = match &spec {
                    SpecFile::Sym(s) => {
                        oracle_dim_sym(&s.assemble().map_err(handle)?, &policy)
                            .map_err(handle)?
                            .nullity as i64
                    }
                    SpecFile::Herm(h) => {
                        oracle_dim_herm(&h.assemble().map_err(handle)?, &policy)
                            .map_err(handle)?
                            .nullity as i64
                    }
                };
                report.oracle = Some(oracle);
                if oracle != report.total {
                    report.discrepancy_notes.push(format!(
                        "oracle dimension {oracle} differs from the formula total {}",
                        report.total
                    ));
                }
            }
            emit(&report);
            Ok(0)
        }
        Cmd::Oracle { matrix, action } => {
            let m: Mat = read_json(&matrix)?;
            let handle = |e: CoreError| {
                eprintln!("error: {e}");
                exit_code_for(&e)
            };
            let res = match action {
                ActionArg::Sym => oracle_dim_sym(&m, &policy).map_err(handle)?,
                ActionArg::Herm => oracle_dim_herm(&m, &policy).map_err(handle)?,
            };
            emit(&res);
            Ok(0)
        }
        Cmd::Solve { spec, samples, seed, out } => run_solve(&spec, samples, seed, &out, &policy),
        Cmd::Classify { matrix } => {
            let m: Mat = read_json(&matrix)?;
            let sc = classify_hermitian(&m, &policy).map_err(|e| {
                eprintln!("error: {e}");
                exit_code_for(&e)
            })?;
            emit(&sc);
            Ok(0)
        }
        Cmd::Reduce { a, b } => {
            let a: Mat = read_json(&a)?;
            let b: Mat = read_json(&b)?;
            let red = reduce_pair_to_identity(&a, &b, &policy).map_err(|e| {
                eprintln!("error: {e}");
                exit_code_for(&e)
            })?;
            emit(&red);
            Ok(0)
        }
        Cmd::Verify { q, m, action, tol } => {
            let q: Mat = read_json(&q)?;
            let m: Mat = read_json(&m)?;
            let act = match action {
                ActionArg::Sym => Action::Sym,
                ActionArg::Herm => Action::Herm,
            };
            let rep = verify_stab_element(&q, &m, act, tol).map_err(|e| {
                eprintln!("error: {e}");
                exit_code_for(&e)
            })?;
            let pass = rep.pass;
            emit(&rep);
            Ok(if pass { 0 } else { 1 })
        }
        Cmd::Suite { seed, out } => {
            let report = run_suite(seed, &policy).map_err(|e| {
                eprintln!("error: {e}");
                exit_code_for(&e)
            })?;
            let text = serde_json::to_string_pretty(&report).expect("serializable");
            match out {
                Some(path) => std::fs::write(&path, text.as_bytes()).map_err(|e| {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    2u8
                })?,
                None => println!("{text}"),
            }
            Ok(if report.all_pass { 0 } else { 1 })
        }
        Cmd::Example { name } => run_example(&name, &policy),
    }
}

#[derive(Serialize)]
struct SolveLedger<'a> {
    feasible: bool,
    realdim: usize,
    classes: &'a [orthostab::stab::ClassStabReport],
}

#[derive(Serialize)]
struct Certificate {
    sample: usize,
    orthogonality_residual: f64,
    action_residual: f64,
    tol: f64,
    pass: bool,
}

fn run_solve(
    spec_path: &Path,
    samples: usize,
    seed: u64,
    out: &Path,
    policy: &TolPolicy,
) -> Result<u8, u8> {
    use rand::SeedableRng;
    let handle = |e: CoreError| {
        eprintln!("error: {e}");
        exit_code_for(&e)
    };
    let spec = read_spec(spec_path)?;
    let (stab, matrix, action): (StabilizerSpace, Mat, Action) = match &spec {
        SpecFile::Sym(s) => (
            stabilizer_sym(s, policy).map_err(handle)?,
            s.assemble().map_err(handle)?,
            Action::Sym,
        ),
        SpecFile::Herm(h) => (
            stabilizer_herm(h, policy).map_err(handle)?,
            h.assemble().map_err(handle)?,
            Action::Herm,
        ),
    };
    std::fs::create_dir_all(out).map_err(|e| {
        eprintln!("error: cannot create {}: {e}", out.display());
        2u8
    })?;
    let ledger = SolveLedger {
        feasible: true,
        realdim: stab.space.realdim(),
        classes: &stab.classes,
    };
    let write = |name: String, text: String| -> Result<(), u8> {
        std::fs::write(out.join(&name), text.as_bytes()).map_err(|e| {
            eprintln!("error: cannot write {name}: {e}");
            2u8
        })
    };
    write("ledger.json".into(), serde_json::to_string_pretty(&ledger).expect("serializable"))?;
    write("matrix.json".into(), serde_json::to_string_pretty(&matrix).expect("serializable"))?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut certs = Vec::new();
    let mut all_pass = true;
    for k in 0..samples {
        let params = stab.space.sample_params(&mut rng, 0.3);
        let q = stab.space.evaluate(&params).map_err(handle)?;
        let rep = verify_stab_element(&q, &matrix, action, 1e-8).map_err(handle)?;
        all_pass &= rep.pass;
        certs.push(Certificate {
            sample: k,
            orthogonality_residual: rep.orthogonality_residual,
            action_residual: rep.action_residual,
            tol: rep.tol,
            pass: rep.pass,
        });
        write(format!("sample_{k:03}.json"), serde_json::to_string_pretty(&q).expect("serializable"))?;
    }
    write("certificates.json".into(), serde_json::to_string_pretty(&certs).expect("serializable"))?;
    Ok(if all_pass { 0 } else { 1 })
}

#[derive(Serialize)]
struct ExampleReport {
    name: String,
    matches_fixture: bool,
    details: String,
}

fn run_example(name: &str, policy: &TolPolicy) -> Result<u8, u8> {
    let handle = |e: CoreError| {
        eprintln!("error: {e}");
        exit_code_for(&e)
    };
    match name {
        "2.7" => {
            let (got, _, exact) = example_2_7().map_err(handle)?;
            let fixture = include_str!("../fixtures/example_2_7.json");
            let computed = serde_json::to_string_pretty(&got).expect("serializable");
            let matches = exact && computed.trim() == fixture.trim();
            emit(&ExampleReport {
                name: name.into(),
                matches_fixture: matches,
                details: "reshuffled block compared bit-exactly against the shipped fixture".into(),
            });
            Ok(if matches { 0 } else { 1 })
        }
        "3.3" => {
            let (sol, problems, ok) = example_3_3(policy).map_err(handle)?;
            let fixture = include_str!("../fixtures/example_3_3_ledger.json");
            let computed = serde_json::to_string_pretty(&sol.ledger).expect("serializable");
            let matches = ok && computed.trim() == fixture.trim();
            emit(&ExampleReport {
                name: name.into(),
                matches_fixture: matches,
                details: if problems.is_empty() {
                    format!("ledger matches; final residual {:.3e}", sol.base_residual)
                } else {
                    problems.join("; ")
                },
            });
            Ok(if matches { 0 } else { 1 })
        }
        other => {
            eprintln!("error: unknown example {other} (expected 2.7 or 3.3)");
            Err(2)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) | Err(code) => ExitCode::from(code),
    }
}
