use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use penalap::harness::{
    self, n_for_h,
    output::{write_convection_output, write_solve_output},
    CaseConfig, CaseOutput, Problem,
};
use penalap::{Error, Result};

/// Volume-penalization solvers and convergence sweeps.
#[derive(Parser)]
#[command(name = "penalap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case and compare against its closed form when there is one.
    Run(Common),
    /// Run a case over a grid of spacings and penalization parameters.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Grid spacings; each is rounded to the nearest grid size.
        #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "n_list", required_unless_present = "n_list")]
        h_list: Vec<f64>,
        /// Grid sizes.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        n_list: Vec<usize>,
        /// Penalization parameters.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        eta_list: Vec<f64>,
    },
    /// March a convection case to steady state.
    Convection(Common),
}

#[derive(Args)]
struct Common {
    /// Case file of `key = value` lines.
    config: PathBuf,
    /// Output directory; defaults to `output_path` in the case file, then `.`.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<(CaseConfig, PathBuf)> {
        let cfg = CaseConfig::from_file(&self.config)?;
        cfg.validate()?;
        let out = self.output.clone().or_else(|| cfg.output_path.clone()).unwrap_or_else(|| PathBuf::from("."));
        Ok((cfg, out))
    }
}

fn convection(cfg: &CaseConfig, out: &std::path::Path) -> Result<()> {
    let report = harness::run_convection(cfg, |e| {
        eprintln!(
            "step {:>9}  t = {:.5}  increments u {:.3e} v {:.3e} phi {:.3e}  sor {}",
            e.step, e.time, e.increments[0], e.increments[1], e.increments[2], e.sor_sweeps
        )
    })?;
    write_convection_output(out, &report)?;
    eprintln!("steady after {} steps; Nu = {:.6}", report.state.step, report.nusselt);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let (cfg, out) = common.load()?;
            if cfg.problem()? == Problem::Convection {
                return convection(&cfg, &out);
            }
            match harness::run_case(&cfg)? {
                CaseOutput::Solve(s) => {
                    let r = &s.report;
                    eprintln!(
                        "{} n = {} eta = {:e}: linf {:.3e} l1 {:.3e} l2 {:.3e}",
                        r.problem, r.n, r.eta, r.err_linf, r.err_l1, r.err_l2
                    );
                    write_solve_output(&out, &s)
                }
                CaseOutput::Convection(c) => write_convection_output(&out, &c),
            }
        }
        Command::Convection(common) => {
            let (cfg, out) = common.load()?;
            if cfg.problem()? != Problem::Convection {
                return Err(Error::Config(format!("`convection` needs problem = convection, got {}", cfg.problem()?)));
            }
            convection(&cfg, &out)
        }
        Command::Sweep { common, h_list, n_list, eta_list } => {
            let (cfg, out) = common.load()?;
            let ns = if n_list.is_empty() {
                let extent = cfg.problem()?.extent();
                h_list.iter().map(|&h| n_for_h(extent, h)).collect::<Result<Vec<_>>>()?
            } else {
                n_list
            };
            let result = harness::sweep(&cfg, &ns, &eta_list, |r| {
                eprintln!("n = {:>6} eta = {:.1e}: l2 {:.3e} ({:.2} s)", r.n, r.eta, r.err_l2, r.runtime_s)
            })?;
            for f in &result.failures {
                eprintln!("failed n = {} eta = {:e}: {}", f.n, f.eta, f.error);
            }
            for o in &result.orders {
                eprintln!("eta = {:.1e}: order linf {:.3} l1 {:.3} l2 {:.3}", o.eta, o.order_linf, o.order_l1, o.order_l2);
            }
            harness::write_sweep(&out, &result)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors share the config-error code
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("penalap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
