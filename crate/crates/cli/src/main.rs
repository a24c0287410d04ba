use std::f64::consts::FRAC_PI_4;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qse_core::ensemble::run_ensemble_3;
use qse_core::figures::{figure_table, FigureId, FigureParams, DEFAULT_GAMMA_BIG};
use qse_core::schedule::MonotoneTable;
use qse_core::synth::{hamiltonian_table_2, hamiltonian_table_3};
use qse_core::table::Table;
use qse_core::validate::{run_validation, ValidationConfig};
use qse_core::{run_ensemble, Angle, Curve, EnsembleConfig, Ket, NoiseModel, Schedule, SimulationMode, TimeGrid};

#[derive(Parser, Debug)]
#[command(name = "qse", version, about = "Inverse-engineered state control under stochastic noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the synthesized Hamiltonian of a schedule.
    Synth(RunArgs),
    /// Monte Carlo density matrices and fidelity of a noisy schedule.
    Simulate(RunArgs),
    /// Compare Monte Carlo ensembles with the closed-form channels.
    Validate(RunArgs),
    /// Fidelity surfaces under Ornstein-Uhlenbeck noise.
    Figure(RunArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScheduleKind {
    Linear,
    Smoothstep,
    SineSquared,
    Table,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NoiseArg {
    White,
    Ou,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ParamArg {
    Alpha,
    Theta,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Phase,
    Hamiltonian,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "linear")]
    schedule: ScheduleKind,
    /// θ(T); θ(0) is always 0.
    #[arg(long, default_value_t = FRAC_PI_4, allow_negative_numbers = true)]
    theta_final: f64,
    /// α(T); α(0) is always 0.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha_final: f64,
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    /// Two-column (time, value) file for θ with `--schedule table`.
    #[arg(long)]
    theta_table: Option<PathBuf>,
    /// Two-column file for α with `--schedule table`; otherwise α ramps linearly.
    #[arg(long)]
    alpha_table: Option<PathBuf>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
    levels: u8,
    /// Initial level for three-level runs.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    initial_level: u8,
    #[arg(long, value_enum, default_value = "white")]
    noise: NoiseArg,
    /// Γ; defaults to 1, or 10 for figures.
    #[arg(long)]
    gamma_big: Option<f64>,
    /// γ (OU memory rate).
    #[arg(long, default_value_t = 1.0)]
    gamma_small: f64,
    /// ξ₀.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    bias: f64,
    #[arg(long, value_enum, default_value = "alpha")]
    param: ParamArg,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    /// Keep every n-th grid point in simulation output.
    #[arg(long, default_value_t = 40)]
    record_every: usize,
    #[arg(long, value_enum, default_value = "phase")]
    mode: ModeArg,
    #[arg(long)]
    figure: Option<String>,
    /// Γ in Hz; adds a `time_seconds` column.
    #[arg(long)]
    gamma_hz: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_damping_fault: bool,
}

enum Failure {
    Usage(String),
    Io(io::Error),
    Validation,
}

impl From<qse_core::Error> for Failure {
    fn from(e: qse_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl RunArgs {
    fn check(&self) -> Result<(), Failure> {
        let nonneg = [("duration", self.duration), ("gamma-small", self.gamma_small)];
        for (name, v) in nonneg {
            if !(v.is_finite() && v > 0.0) {
                return Err(Failure::Usage(format!("--{name} must be positive (got {v})")));
            }
        }
        if let Some(g) = self.gamma_big {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Failure::Usage(format!("--gamma-big must be non-negative (got {g})")));
            }
        }
        if let Some(g) = self.gamma_hz {
            if !(g.is_finite() && g > 0.0) {
                return Err(Failure::Usage(format!("--gamma-hz must be positive (got {g})")));
            }
        }
        Ok(())
    }

    fn curve(&self, end: f64, table: Option<&PathBuf>, required: bool) -> Result<Curve, Failure> {
        Ok(match self.schedule {
            ScheduleKind::Linear => Curve::Linear { start: 0.0, end },
            ScheduleKind::Smoothstep => Curve::Smoothstep { start: 0.0, end },
            ScheduleKind::SineSquared => Curve::SineSquared { start: 0.0, end },
            ScheduleKind::Table => match table {
                Some(path) => Curve::Table(MonotoneTable::from_path(path)?),
                None if required => return Err(Failure::Usage("--schedule table needs --theta-table".into())),
                None => Curve::Linear { start: 0.0, end },
            },
        })
    }

    fn build_schedule(&self) -> Result<Schedule, Failure> {
        let theta = self.curve(self.theta_final, self.theta_table.as_ref(), true)?;
        let alpha = self.curve(self.alpha_final, self.alpha_table.as_ref(), false)?;
        Ok(Schedule::planar(self.duration, theta, alpha)?)
    }

    fn gamma_big(&self) -> f64 {
        self.gamma_big.unwrap_or(1.0)
    }

    fn noise_model(&self) -> Result<NoiseModel, Failure> {
        let m = match self.noise {
            NoiseArg::White => NoiseModel::white(self.gamma_big())?,
            NoiseArg::Ou => NoiseModel::ornstein_uhlenbeck(self.gamma_big(), self.gamma_small)?,
        };
        Ok(m.with_bias(self.bias)?)
    }

    fn param(&self) -> Angle {
        match self.param {
            ParamArg::Alpha => Angle::Alpha,
            ParamArg::Theta => Angle::Theta,
        }
    }

    fn mode(&self) -> SimulationMode {
        match self.mode {
            ModeArg::Phase => SimulationMode::PhaseIntegral,
            ModeArg::Hamiltonian => SimulationMode::Hamiltonian,
        }
    }

    fn output(&self) -> Result<Box<dyn Write>, Failure> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn emit(&self, table: &Table) -> Result<(), Failure> {
        let mut w = self.output()?;
        table.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn synth(args: &RunArgs) -> Result<(), Failure> {
    let s = args.build_schedule()?;
    let table = match args.levels {
        2 => hamiltonian_table_2(&s, args.steps)?,
        _ => hamiltonian_table_3(&s, args.steps)?,
    };
    args.emit(&table)
}

fn simulate(args: &RunArgs) -> Result<(), Failure> {
    let s = args.build_schedule()?;
    let m = args.noise_model()?;
    let grid = TimeGrid::new(s.duration(), args.steps)?;
    let cfg = EnsembleConfig::new(args.paths, args.seed, grid, args.mode())?.with_record_every(args.record_every)?;
    let table = match args.levels {
        2 => run_ensemble(&s, &m, args.param(), &cfg)?.to_table(args.gamma_hz)?,
        _ => {
            let initial = Ket::level(args.initial_level as usize);
            run_ensemble_3(&s, &m, args.param(), &initial, &cfg)?.to_table(args.gamma_hz)?
        }
    };
    args.emit(&table)
}

fn validate(args: &RunArgs) -> Result<(), Failure> {
    let cfg = ValidationConfig {
        gamma_big: args.gamma_big(),
        gamma_small: args.gamma_small,
        bias: args.bias,
        paths: args.paths,
        seed: args.seed,
        steps: args.steps,
        record_every: args.record_every,
        mode: args.mode(),
        inject_damping_fault: args.inject_damping_fault,
        ..ValidationConfig::new(args.build_schedule()?)
    };
    let report = run_validation(&cfg)?;
    let mut w = args.output()?;
    write!(w, "{report}")?;
    writeln!(w, "{}", if report.passed() { "validation passed" } else { "validation FAILED" })?;
    w.flush()?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn figure(args: &RunArgs) -> Result<(), Failure> {
    let id: FigureId = args
        .figure
        .as_deref()
        .ok_or_else(|| Failure::Usage("figure needs --figure {1a|1b|2}".into()))?
        .parse()?;
    let params = FigureParams {
        gamma_big: args.gamma_big.unwrap_or(DEFAULT_GAMMA_BIG),
        gamma_small: args.gamma_small,
        gamma_hz: args.gamma_hz,
        ..FigureParams::default()
    };
    args.emit(&figure_table(id, &params)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (Command::Synth(args) | Command::Simulate(args) | Command::Validate(args) | Command::Figure(args)) = &cli.command;
    let result = args.check().and_then(|()| match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Simulate(a) => simulate(a),
        Command::Validate(a) => validate(a),
        Command::Figure(a) => figure(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
