use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use grating_bench::config::{Origin, RunConfig};
use grating_bench::report;
use grating_bench::run::{self, build_domain, Geometry};
use grating_bench::verify::{self, Suite};

const EXIT_USAGE: u8 = 1;
const EXIT_CHECK: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "grating-bench", version, about = "Quasi-periodic Helmholtz grating solver and verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every (k, theta) point and write one CSV row per point.
    #[command(alias = "sweep")]
    Solve(Common),
    /// Evaluate the stability constants without solving.
    Bounds(Common),
    /// Run verification suites.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: SuiteArg,
        #[command(flatten)]
        common: Common,
        /// Scale every oracle amplitude by 1.01 (negative control).
        #[arg(long, hide = true)]
        perturb_oracle: bool,
    },
    /// Print the mesh the configuration produces.
    MeshDump(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Oracles,
    Identities,
    Inequalities,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Oracles => Suite::Oracles,
            SuiteArg::Identities => Suite::Identities,
            SuiteArg::Inequalities => Suite::Inequalities,
            SuiteArg::All => Suite::All,
        }
    }
}

/// Every config key is also a flag and wins over the file.
#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long = "n_samples", alias = "n-samples")]
    n_samples: Option<String>,
    #[arg(long)]
    bc: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long = "theta_deg", alias = "theta-deg", allow_hyphen_values = true)]
    theta_deg: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long = "R", allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long = "f_minus", alias = "f-minus", allow_hyphen_values = true)]
    f_minus: Option<String>,
    #[arg(long = "f_plus", alias = "f-plus", allow_hyphen_values = true)]
    f_plus: Option<String>,
    #[arg(long = "lipschitz_L", alias = "lipschitz-L")]
    lipschitz: Option<String>,
    #[arg(long = "mesh_h", alias = "mesh-h")]
    mesh_h: Option<String>,
    #[arg(long = "fe_order", alias = "fe-order")]
    fe_order: Option<String>,
    #[arg(long = "dtn_N", alias = "dtn-N")]
    dtn_n: Option<String>,
    #[arg(long)]
    refinements: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    output: Option<String>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, grating_bench::config::ConfigError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let flags = [
            ("profile", &self.profile),
            ("n_samples", &self.n_samples),
            ("bc", &self.bc),
            ("k", &self.k),
            ("theta_deg", &self.theta_deg),
            ("gamma", &self.gamma),
            ("R", &self.r),
            ("f_minus", &self.f_minus),
            ("f_plus", &self.f_plus),
            ("lipschitz_L", &self.lipschitz),
            ("mesh_h", &self.mesh_h),
            ("fe_order", &self.fe_order),
            ("dtn_N", &self.dtn_n),
            ("refinements", &self.refinements),
            ("seed", &self.seed),
            ("trials", &self.trials),
            ("output", &self.output),
        ];
        for (key, v) in flags {
            if let Some(v) = v {
                cfg.set(key, v, Origin::Flag)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn sink(cfg: &RunConfig) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &cfg.output {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| anyhow::anyhow!("cannot create {}: {e}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

enum Failure {
    Usage(String),
    Check,
    Solver,
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let usage = |e: &dyn std::fmt::Display| Failure::Usage(e.to_string());
    match cli.command {
        Command::Solve(c) => {
            let cfg = c.load().map_err(|e| usage(&e))?;
            let geo = Geometry::new(&cfg).map_err(|e| usage(&e))?;
            let rows = run::sweep(&cfg, &geo);
            let out = sink(&cfg).map_err(|e| usage(&e))?;
            report::write_solve(out, &cfg, &geo.domain, &rows).map_err(|e| usage(&e))?;
            if rows.iter().any(|r| r.failed()) {
                return Err(Failure::Solver);
            }
        }
        Command::Bounds(c) => {
            let cfg = c.load().map_err(|e| usage(&e))?;
            let domain = build_domain(&cfg).map_err(|e| usage(&e))?;
            let rows = run::bounds_table(&cfg, &domain);
            let out = sink(&cfg).map_err(|e| usage(&e))?;
            report::write_bounds(out, &cfg, &domain, &rows).map_err(|e| usage(&e))?;
        }
        Command::Verify { suite, common, perturb_oracle } => {
            let cfg = common.load().map_err(|e| usage(&e))?;
            let rows = verify::run(&cfg, suite.into(), perturb_oracle);
            let out = sink(&cfg).map_err(|e| usage(&e))?;
            report::write_checks(out, &rows).map_err(|e| usage(&e))?;
            if verify::any_failed(&rows) {
                return Err(Failure::Check);
            }
        }
        Command::MeshDump(c) => {
            let cfg = c.load().map_err(|e| usage(&e))?;
            let geo = Geometry::new(&cfg).map_err(|e| usage(&e))?;
            let mut out = sink(&cfg).map_err(|e| usage(&e))?;
            out.write_all(run::mesh_dump(&geo.finest().mesh).as_bytes()).map_err(|e| usage(&e))?;
            out.flush().map_err(|e| usage(&e))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Check) => {
            eprintln!("verification failed");
            ExitCode::from(EXIT_CHECK)
        }
        Err(Failure::Solver) => {
            eprintln!("one or more points failed to solve");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}
