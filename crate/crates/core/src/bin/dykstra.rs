use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dykstra_ff::harness::{self, exit, CompareArgs, GenArgs, OptionsBlock, SolveArgs};
use dykstra_ff::Mode;

#[derive(Parser)]
#[command(name = "dykstra", version, about = "Dykstra projection onto polyhedra with stall fast-forwarding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct RunFlags {
    /// dykstra, dykstra-ff or map
    #[arg(long)]
    mode: Option<Mode>,
    /// Iteration budget [default: 10000]
    #[arg(long)]
    max_iter: Option<u64>,
    /// Stall tolerance, relative to 1 + ‖x0‖ [default: 1e-10]
    #[arg(long)]
    eps_stall: Option<f64>,
    /// Feasibility tolerance for stopping [default: 1e-9]
    #[arg(long)]
    tol_feas: Option<f64>,
    /// Stationarity tolerance for stopping [default: 1e-12]
    #[arg(long)]
    tol_conv: Option<f64>,
    /// Compare against the exact projection (n ≤ 12) when the file has no x_star
    #[arg(long)]
    oracle: bool,
    /// Half-space whose activity goes into the summary CSV
    #[arg(long)]
    watch_halfspace: Option<usize>,
}

impl RunFlags {
    fn overrides(&self) -> OptionsBlock {
        OptionsBlock {
            max_iter: self.max_iter,
            eps_stall: self.eps_stall,
            tol_feas: self.tol_feas,
            tol_conv: self.tol_conv,
            mode: self.mode,
            early_stop: None,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on a problem file
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        summary_out: Option<PathBuf>,
        /// x,y iterates (planar problems only)
        #[arg(long)]
        iterates_out: Option<PathBuf>,
    },
    /// Run plain and fast-forward Dykstra side by side
    Compare {
        problem: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
        /// Directory for data_dykstra_original.csv and data_dykstra_ff.csv
        #[arg(long)]
        summary_out: Option<PathBuf>,
    },
    /// Run the randomized property suites over seeds [from, to)
    Verify {
        #[arg(long, default_value_t = 0)]
        from: u64,
        #[arg(long, default_value_t = 100)]
        to: u64,
        /// Corrupt the fast-forward skip count; the suites must catch it
        #[arg(long)]
        mutate: bool,
    },
    /// Write a problem file to stdout or --out
    Gen {
        /// The box-and-line instance with x0 = (-4, 1.4)
        #[arg(long)]
        paper: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Planar stall-inducing instance
        #[arg(long)]
        stall: bool,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 6)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::PARSE_ERROR as u8 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Solve {
            problem,
            flags,
            trace_out,
            summary_out,
            iterates_out,
        } => harness::cmd_solve(&SolveArgs {
            problem,
            overrides: flags.overrides(),
            trace_out,
            summary_out,
            iterates_out,
            oracle: flags.oracle,
            watch: flags.watch_halfspace,
        })
        .map(|(code, report)| {
            print!("{report}");
            code
        }),
        Command::Compare {
            problem,
            flags,
            summary_out,
        } => harness::cmd_compare(&CompareArgs {
            problem,
            overrides: flags.overrides(),
            summary_dir: summary_out,
            oracle: flags.oracle,
            watch: flags.watch_halfspace,
        })
        .map(|(code, report)| {
            print!("{}", report.render());
            code
        }),
        Command::Verify { from, to, mutate } => {
            let (code, report) = harness::cmd_verify(from..to, mutate);
            print!("{report}");
            Ok(code)
        }
        Command::Gen {
            paper,
            seed,
            stall,
            dim,
            count,
            out,
        } => harness::cmd_gen(&GenArgs {
            paper,
            seed,
            stall,
            dim,
            count,
        })
        .and_then(|text| {
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(exit::CONVERGED)
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
