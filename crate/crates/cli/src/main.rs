//! `hm`: batch computation and verification of Hecke-type indefinite theta
//! series and universal Massey systems, with JSON input/output.
//!
//! Exit codes: 0 success, 2 input error, 3 mathematical-precondition
//! failure, 4 verification failure, 5 cap exhaustion.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hecke_massey::geometry::{
    delta_projection, gamma_lattice, lambda0_lattice, lambda_lattice, necessary_condition,
    quad_form_of, DegreeTriple, ModuliParams, QuadForm,
};
use hecke_massey::indeftheta::{check_f_condition, theta_indef, CosetFunction2};
use hecke_massey::inversion::thm2_pipeline;
use hecke_massey::massey::{
    universal_massey_kernel_exact, universal_massey_kernel_truncated, verify_thm1, MasseyTensor,
};
use hecke_massey::numeric::{parse_rat, set_order_cap, Rat};
use hecke_massey::Error;

#[derive(Parser)]
#[command(
    name = "hm",
    about = "Exact indefinite theta series and universal Massey systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputMode {
    Json,
    Text,
}

#[derive(Args)]
struct OutputArg {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    output: OutputMode,
}

#[derive(Subcommand)]
enum Command {
    /// Print the indefinite theta series of a form and kernel function.
    Series {
        /// Path to a QuadForm JSON file ("-" for stdin).
        #[arg(long)]
        form: PathBuf,
        /// Path to a CosetFunction2 JSON file ("-" for stdin).
        #[arg(long)]
        function: PathBuf,
        /// Truncation order "p/q".
        #[arg(long, default_value = "6")]
        truncation: String,
        /// Verify the sign-reversal condition first and fail fast.
        #[arg(long)]
        check_f_condition: bool,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Solve for the universal Massey systems of a degree triple.
    Solve {
        /// The degrees d1 d2 d.
        #[arg(long, num_args = 3, value_names = ["D1", "D2", "D"])]
        degrees: Vec<u32>,
        /// Moduli parameters v1 v2 w1 w2 (switches to the truncated solver).
        #[arg(long, num_args = 4, value_names = ["V1", "V2", "W1", "W2"])]
        params: Option<Vec<String>>,
        /// Solve and re-verification orders for the truncated solver.
        #[arg(long, num_args = 2, value_names = ["SOLVE", "VERIFY"], default_values = ["4", "8"])]
        orders: Vec<String>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Check MP(c)_l = Theta_(Q, f_(c,l)) for every l.
    VerifyThm1 {
        /// Path to a MasseyTensor JSON file ("-" for stdin).
        #[arg(long)]
        tensor: PathBuf,
        /// Moduli parameters v1 v2 w1 w2.
        #[arg(long, num_args = 4, value_names = ["V1", "V2", "W1", "W2"])]
        params: Option<Vec<String>>,
        /// Comparison order "p/q".
        #[arg(long, default_value = "6")]
        trunc: String,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Reconstruct a Massey system whose coefficients sum to a given series.
    Invert {
        /// Path to a QuadForm JSON file ("-" for stdin).
        #[arg(long)]
        form: PathBuf,
        /// Path to a CosetFunction2 JSON file ("-" for stdin).
        #[arg(long)]
        function: PathBuf,
        /// Comparison order "p/q".
        #[arg(long, default_value = "4")]
        trunc: String,
        /// Cap on the coordinate scale N.
        #[arg(long, default_value_t = 1000)]
        cap: u64,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Print the lattices attached to a degree triple.
    LatticeInfo {
        /// The degrees d1 d2 d.
        #[arg(long, num_args = 3, value_names = ["D1", "D2", "D"])]
        degrees: Vec<u32>,
        #[command(flatten)]
        out: OutputArg,
    },
}

fn main() -> ExitCode {
    if let Ok(cap) = std::env::var("HM_MAX_CYCLO_ORDER") {
        match cap.parse::<u64>() {
            Ok(cap) => set_order_cap(cap),
            Err(_) => {
                eprintln!("error: HM_MAX_CYCLO_ORDER must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read_json(path: &PathBuf) -> Result<serde_json::Value, Error> {
    let data = if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::Input(format!("cannot read stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?
    };
    serde_json::from_str(&data).map_err(|e| {
        Error::Input(format!(
            "invalid JSON in {} at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn parse_degrees(degrees: &[u32]) -> Result<DegreeTriple, Error> {
    if degrees.len() != 3 {
        return Err(Error::Input("--degrees requires d1 d2 d".into()));
    }
    DegreeTriple::new(degrees[0], degrees[1], degrees[2])
}

fn parse_params(params: &Option<Vec<String>>) -> Result<Option<ModuliParams>, Error> {
    match params {
        None => Ok(None),
        Some(raw) => {
            if raw.len() != 4 {
                return Err(Error::Input("--params requires v1 v2 w1 w2".into()));
            }
            let vals: Vec<Rat> = raw
                .iter()
                .map(|s| parse_rat(s))
                .collect::<Result<_, _>>()?;
            Ok(Some(ModuliParams::new(
                vals[0].clone(),
                vals[1].clone(),
                vals[2].clone(),
                vals[3].clone(),
            )))
        }
    }
}

fn emit(mode: OutputMode, json: serde_json::Value, text: String) {
    match mode {
        OutputMode::Json => println!("{}", serde_json::to_string_pretty(&json).unwrap()),
        OutputMode::Text => println!("{text}"),
    }
}

fn run(cmd: Command) -> Result<ExitCode, Error> {
    match cmd {
        Command::Series {
            form,
            function,
            truncation,
            check_f_condition: check,
            out,
        } => {
            let q = QuadForm::from_json(&read_json(&form)?)?;
            let f = CosetFunction2::from_json(&read_json(&function)?)?;
            let trunc = parse_rat(&truncation)?;
            if check && !check_f_condition(&q, &f) {
                return Err(Error::Precondition(
                    "the function violates the sign-reversal condition".into(),
                ));
            }
            let series = theta_indef(&q, &f, &trunc)?;
            emit(out.output, series.to_json(), series.to_string());
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            degrees,
            params,
            orders,
            out,
        } => {
            let t = parse_degrees(&degrees)?;
            let report = match parse_params(&params)? {
                None => universal_massey_kernel_exact(&t)?,
                Some(p) => {
                    let solve = parse_rat(&orders[0])?;
                    let verify = parse_rat(&orders[1])?;
                    universal_massey_kernel_truncated(&t, &p, &solve, &verify)?
                }
            };
            let text = format!(
                "degrees ({}, {}, {}): kernel dimension {}{}",
                t.d1(),
                t.d2(),
                t.d(),
                report.basis.len(),
                report
                    .note
                    .as_ref()
                    .map(|n| format!(" ({n})"))
                    .unwrap_or_default()
            );
            emit(out.output, report.to_json(), text);
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyThm1 {
            tensor,
            params,
            trunc,
            out,
        } => {
            let c = MasseyTensor::from_json(&read_json(&tensor)?)?;
            let t = *c.degrees();
            let p = parse_params(&params)?.unwrap_or_else(ModuliParams::zero);
            let trunc = parse_rat(&trunc)?;
            let report = verify_thm1(&t, &p, &c, &trunc)?;
            let mut text = format!(
                "double products: {}\n",
                if report.double_products { "ok" } else { "FAIL" }
            );
            for check in &report.per_l {
                text.push_str(&format!(
                    "l = {}: series {}  f-condition {}\n",
                    check.l,
                    if check.series_match { "ok" } else { "FAIL" },
                    if check.f_condition { "ok" } else { "FAIL" },
                ));
            }
            text.push_str(if report.pass { "PASS" } else { "FAIL" });
            emit(out.output, report.to_json(), text);
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            })
        }
        Command::Invert {
            form,
            function,
            trunc,
            cap,
            out,
        } => {
            let q = QuadForm::from_json(&read_json(&form)?)?;
            let f = CosetFunction2::from_json(&read_json(&function)?)?;
            let trunc = parse_rat(&trunc)?;
            let report = thm2_pipeline(&q, &f, &trunc, cap)?;
            let order_str = hecke_massey::numeric::rat_string(&report.order);
            let order = order_str.strip_suffix("/1").unwrap_or(&order_str);
            let text = format!(
                "N = {}, triple ({}, {}, {}), tensor entries {}, identity up to q^{order}: {}",
                report.n,
                report.triple.d1(),
                report.triple.d2(),
                report.triple.d(),
                report.tensor.num_nonzero(),
                if report.equality { "PASS" } else { "FAIL" }
            );
            let pass = report.equality && report.double_products;
            emit(out.output, report.to_json(), text);
            Ok(if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            })
        }
        Command::LatticeInfo { degrees, out } => {
            let t = parse_degrees(&degrees)?;
            let q = quad_form_of(&t);
            let lambda = lambda_lattice(&t);
            let gamma = gamma_lattice(&t);
            let lambda0 = lambda0_lattice(&t);
            let nc = necessary_condition(&t);
            let delta = if nc {
                Some(delta_projection(&t)?)
            } else {
                None
            };
            let json = serde_json::json!({
                "degrees": t.to_json(),
                "form": q.to_json(),
                "gamma": gamma.to_json(),
                "integrality_criterion": nc,
                "lambda": lambda.to_json(),
                "lambda0": lambda0.to_json(),
                "lambda_index_in_gamma": lambda
                    .index_in(&gamma)
                    .map(|i| i.to_string())
                    .unwrap_or_default(),
                "p12_delta": delta.as_ref().map(|d| d.to_json()),
            });
            let fmt_lat = |l: &hecke_massey::lattice::Lattice2| {
                let b = l.basis();
                format!(
                    "generated by ({}, {}) and ({}, {})",
                    b[0][0], b[1][0], b[0][1], b[1][1]
                )
            };
            let text = format!(
                "degrees ({}, {}, {}): d0 = {}, integrality criterion: {}\nLambda  {}\nLambda0 {}\nGamma   {}",
                t.d1(),
                t.d2(),
                t.d(),
                t.d0(),
                nc,
                fmt_lat(&lambda),
                fmt_lat(&lambda0),
                fmt_lat(&gamma),
            );
            emit(out.output, json, text);
            Ok(ExitCode::SUCCESS)
        }
    }
}
