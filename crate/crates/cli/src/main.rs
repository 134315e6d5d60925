//! `endor`: command-line front end for the ENDOR Bell-state simulator.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 when an input or output
//! file cannot be read, parsed or written.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use endor_core::config::ExperimentConfig;
use endor_core::entanglement::{negativity, quantum_limit_temperature};
use endor_core::imperfections::{fit_phase_components, model_coefficients, sample_phase_surface};
use endor_core::numfmt::{fmt_sig, round_sig};
use endor_core::parser::{self, deg_to_rad};
use endor_core::prep::{bell_state, preparation, BellLabel, InitKind};
use endor_core::spectral::{find_peaks, spectrum, SpectrumOptions, Window};
use endor_core::spin::{evolve, fidelity, trace_expectation};
use endor_core::tomography::{
    detect, interferogram, DetectorFamily, Experiment, Interferogram, ScanSettings,
};
use endor_core::Execution;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "endor",
    version,
    about = "Pulsed ENDOR Bell-state preparation and phase-rotation tomography"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prepare a Bell state and print its density matrix, fidelity and negativity as JSON.
    Prepare {
        /// Bell state to prepare.
        #[arg(long, value_enum)]
        state: State,
        /// Initial state of the spin pair.
        #[arg(long, value_enum, default_value_t = Init::PseudoPure)]
        init: Init,
        /// Experiment parameters (key = value lines).
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
    /// Print the detector signal of one experiment.
    Detect {
        /// Bell state to prepare.
        #[arg(long, value_enum)]
        state: State,
        /// Detector sequence family.
        #[arg(long, value_enum)]
        family: Family,
        /// ESR detection phase, degrees.
        #[arg(long, allow_hyphen_values = true)]
        phi1: f64,
        /// NMR detection phase, degrees.
        #[arg(long, allow_hyphen_values = true)]
        phi2: f64,
        #[command(flatten)]
        errors: FlipErrors,
        /// Average with the (phi1 + 180, phi2 + 180) experiment.
        #[arg(long)]
        cycle: bool,
    },
    /// Record a phase interferogram as CSV.
    Scan {
        /// Bell state to prepare.
        #[arg(long, value_enum)]
        state: State,
        /// Detector sequence family.
        #[arg(long, value_enum)]
        family: Family,
        /// ESR phase frequency, MHz.
        #[arg(long, allow_hyphen_values = true)]
        nu1: f64,
        /// NMR phase frequency, MHz.
        #[arg(long, allow_hyphen_values = true)]
        nu2: f64,
        /// Experiment increment, ns.
        #[arg(long, default_value_t = 100.0, value_parser = positive)]
        dt: f64,
        /// Number of experiments.
        #[arg(long, default_value_t = 200, value_parser = at_least_two)]
        n: usize,
        #[command(flatten)]
        errors: FlipErrors,
        /// Average with the (phi1 + 180, phi2 + 180) experiment.
        #[arg(long)]
        cycle: bool,
        /// Output CSV path.
        #[arg(long, value_name = "FILE.csv")]
        out: PathBuf,
        #[command(flatten)]
        exec: ExecArgs,
    },
    /// Magnitude spectrum of an interferogram CSV; peaks go to stdout.
    Spectrum {
        /// Interferogram CSV written by `scan`.
        #[arg(long = "in", value_name = "FILE.csv")]
        input: PathBuf,
        /// Minimum peak height relative to the largest line.
        #[arg(long, default_value_t = 0.1, value_parser = relative)]
        peaks: f64,
        /// Output CSV path.
        #[arg(long, value_name = "FILE.csv")]
        out: PathBuf,
        /// Keep the mean (DC) component.
        #[arg(long)]
        keep_mean: bool,
        /// Apodization window.
        #[arg(long, value_enum, default_value_t = WindowArg::Rectangular)]
        window: WindowArg,
        #[command(flatten)]
        exec: ExecArgs,
    },
    /// Run a .pseq pulse program and print the final state as JSON.
    RunProgram {
        /// Pulse program to run.
        #[arg(value_name = "FILE.pseq")]
        file: PathBuf,
        /// Append the detector with this ESR phase, degrees.
        #[arg(long, allow_hyphen_values = true, requires = "phi2")]
        phi1: Option<f64>,
        /// Append the detector with this NMR phase, degrees.
        #[arg(long, allow_hyphen_values = true, requires = "phi1")]
        phi2: Option<f64>,
        /// Experiment parameters used for the sequence duration.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
    /// Fit the Fourier components of a tabulated phase surface.
    Fit {
        /// Bell state to prepare.
        #[arg(long, value_enum)]
        state: State,
        /// Detector sequence family.
        #[arg(long, value_enum)]
        family: Family,
        #[command(flatten)]
        errors: FlipErrors,
        /// Grid points per phase axis.
        #[arg(long, default_value_t = 32, value_parser = grid)]
        grid: usize,
        /// Average with the (phi1 + 180, phi2 + 180) experiment.
        #[arg(long)]
        cycle: bool,
        #[command(flatten)]
        exec: ExecArgs,
    },
    /// Temperature below which the thermally prepared singlet is entangled.
    QuantumLimit {
        /// ESR frequency, GHz.
        #[arg(long, value_parser = positive)]
        freq: f64,
    },
}

#[derive(Args)]
struct FlipErrors {
    /// Relative flip-angle error of ESR pulses.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, value_parser = deviation)]
    delta1: f64,
    /// Relative flip-angle error of NMR pulses.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true, value_parser = deviation)]
    delta2: f64,
}

#[derive(Args)]
struct ExecArgs {
    /// Evaluate samples on one thread.
    #[arg(long)]
    sequential: bool,
}

impl ExecArgs {
    fn mode(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum State {
    PsiMinus,
    PsiPlus,
    PhiMinus,
    PhiPlus,
}

impl From<State> for BellLabel {
    fn from(s: State) -> Self {
        match s {
            State::PsiMinus => BellLabel::PsiMinus,
            State::PsiPlus => BellLabel::PsiPlus,
            State::PhiMinus => BellLabel::PhiMinus,
            State::PhiPlus => BellLabel::PhiPlus,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Init {
    PseudoPure,
    PseudoBoltzmann,
    Boltzmann,
}

impl From<Init> for InitKind {
    fn from(i: Init) -> Self {
        match i {
            Init::PseudoPure => InitKind::PseudoPure,
            Init::PseudoBoltzmann => InitKind::PseudoBoltzmann,
            Init::Boltzmann => InitKind::Boltzmann,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Psi,
    Phi,
}

impl From<Family> for DetectorFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Psi => DetectorFamily::Psi,
            Family::Phi => DetectorFamily::Phi,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WindowArg {
    Rectangular,
    Hann,
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn deviation(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v.abs() < 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (-1, 1), got {v}"))
    }
}

fn relative(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1], got {v}"))
    }
}

fn count(s: &str, min: usize) -> Result<usize, String> {
    let v: usize = s
        .parse()
        .map_err(|_| format!("'{s}' is not a non-negative integer"))?;
    if v >= min {
        Ok(v)
    } else {
        Err(format!("must be at least {min}, got {v}"))
    }
}

fn at_least_two(s: &str) -> Result<usize, String> {
    count(s, 2)
}

fn grid(s: &str) -> Result<usize, String> {
    count(s, endor_core::imperfections::MIN_GRID)
}

enum Failure {
    Usage(String),
    Input(String),
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    let config = match path {
        None => ExperimentConfig::default(),
        Some(p) => ExperimentConfig::parse(&read(p)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
    };
    let warnings = config
        .validate()
        .map_err(|e| Failure::Input(format!("config: {e}")))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(config)
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values serialize")
}

fn r12(x: f64) -> f64 {
    round_sig(x, 12)
}

fn prepare(state: State, init: Init, config: Option<&Path>) -> Outcome {
    let source = config.map(|p| p.display().to_string());
    let config = load_config(config)?;
    let label = BellLabel::from(state);
    let (rho0, prog) = preparation(label, init.into(), &config).map_err(|e| match &source {
        Some(path) => Failure::Input(format!("{path}: {e}")),
        None => Failure::usage(e),
    })?;
    let rho = evolve(&rho0, &prog.compile());
    let out = json!({
        "state": label.name(),
        "init": init.to_possible_value().expect("named").get_name(),
        "density_matrix": rho,
        "fidelity": r12(fidelity(&rho, &bell_state(label))),
        "negativity": r12(negativity(&rho)),
    });
    println!("{}", pretty(&out));
    Ok(())
}

fn experiment(state: State, family: Family, errors: &FlipErrors) -> Result<Experiment, Failure> {
    let (rho, prog) = preparation(
        state.into(),
        InitKind::PseudoPure,
        &ExperimentConfig::default(),
    )
    .map_err(Failure::usage)?;
    Experiment::new(&prog, &rho, family.into(), errors.delta1, errors.delta2)
        .map_err(Failure::usage)
}

fn read_interferogram(path: &Path) -> Result<Interferogram, Failure> {
    #[derive(serde::Deserialize)]
    struct Row {
        n: usize,
        t_us: f64,
        signal: f64,
    }
    let bad = |msg: String| Failure::Input(format!("{}: {msg}", path.display()));
    let text = read(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["n", "t_us", "signal"] {
        return Err(bad("expected header 'n,t_us,signal'".into()));
    }
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        if row.n != i {
            return Err(bad(format!(
                "row {} has n = {}, expected {i}",
                i + 1,
                row.n
            )));
        }
        times.push(row.t_us);
        samples.push(row.signal);
    }
    if samples.len() < 2 {
        return Err(bad("need at least 2 samples".into()));
    }
    let dt_us = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let uneven = times
        .iter()
        .enumerate()
        .any(|(i, t)| (t - times[0] - i as f64 * dt_us).abs() > 1e-9 * dt_us.abs().max(1.0));
    if !(dt_us > 0.0) || uneven {
        return Err(bad("t_us must increase in uniform steps".into()));
    }
    Interferogram::from_samples(samples, dt_us * 1e-6).map_err(|e| bad(e.to_string()))
}

fn run_program(file: &Path, phases: Option<(f64, f64)>, config: Option<&Path>) -> Outcome {
    let config = load_config(config)?;
    let text = read(file)?;
    let doc = parser::parse(&text).map_err(|e| {
        Failure::Input(format!(
            "{}:{}:{}: {}",
            file.display(),
            e.line,
            e.column,
            e.message
        ))
    })?;
    let file_err = |e: endor_core::Error| Failure::Input(format!("{}: {e}", file.display()));
    let init = doc.init.unwrap_or(parser::InitDirective::PseudoPure(1));
    let rho0 = init.density().map_err(file_err)?;
    let prog = doc.program().map_err(file_err)?;
    let rho = evolve(&rho0, &prog.compile());
    let signal = match (phases, doc.measure) {
        (None, None) => None,
        (None, Some(m)) => Some(trace_expectation(&rho, &m.observable())),
        (Some((p1, p2)), m) => {
            let family = match m.map(|m| (m.j, m.k)) {
                Some((1, 3)) => DetectorFamily::Psi,
                Some((2, 4)) => DetectorFamily::Phi,
                _ => {
                    return Err(Failure::Input(format!(
                        "{}: --phi1/--phi2 need a 'measure S 1 3' or 'measure S 2 4' directive",
                        file.display()
                    )))
                }
            };
            Some(detect(&rho, family, deg_to_rad(p1), deg_to_rad(p2)))
        }
    };
    let out = json!({
        "steps": prog.len(),
        "duration_ns": prog.duration_ns(&config).ok().map(r12),
        "density_matrix": rho,
        "negativity": r12(negativity(&rho)),
        "signal": signal.map(r12),
    });
    println!("{}", pretty(&out));
    Ok(())
}

fn execute(command: Command) -> Outcome {
    match command {
        Command::Prepare {
            state,
            init,
            config,
        } => prepare(state, init, config.as_deref()),
        Command::Detect {
            state,
            family,
            phi1,
            phi2,
            errors,
            cycle,
        } => {
            let exp = experiment(state, family, &errors)?;
            println!(
                "{}",
                fmt_sig(exp.sample(deg_to_rad(phi1), deg_to_rad(phi2), cycle), 12)
            );
            Ok(())
        }
        Command::Scan {
            state,
            family,
            nu1,
            nu2,
            dt,
            n,
            errors,
            cycle,
            out,
            exec,
        } => {
            let settings = ScanSettings {
                nu1: nu1 * 1e6,
                nu2: nu2 * 1e6,
                dt: dt * 1e-9,
                n,
                phase_cycle: cycle,
                delta1: errors.delta1,
                delta2: errors.delta2,
            };
            for w in settings.validate().map_err(Failure::usage)? {
                eprintln!("warning: {w}");
            }
            let label = BellLabel::from(state);
            let (rho, prog) =
                preparation(label, InitKind::PseudoPure, &ExperimentConfig::default())
                    .map_err(Failure::usage)?;
            let ig = interferogram(
                &prog.with_label(label.name()),
                &rho,
                family.into(),
                &settings,
                exec.mode(),
            )
            .map_err(Failure::usage)?;
            write(&out, &ig.to_csv())
        }
        Command::Spectrum {
            input,
            peaks,
            out,
            keep_mean,
            window,
            exec,
        } => {
            let ig = read_interferogram(&input)?;
            let window = if window == WindowArg::Hann {
                Window::Hann
            } else {
                Window::Rectangular
            };
            let spec = spectrum(
                &ig,
                SpectrumOptions {
                    remove_mean: !keep_mean,
                    window,
                },
                exec.mode(),
            );
            write(&out, &spec.to_csv())?;
            let found = find_peaks(&spec, peaks).map_err(Failure::usage)?;
            let top = found.first().map_or(1.0, |p| p.magnitude);
            let mut table = String::from("freq_MHz,magnitude,relative\n");
            for p in &found {
                writeln!(
                    table,
                    "{},{},{}",
                    fmt_sig(p.frequency / 1e6, 12),
                    fmt_sig(p.magnitude, 12),
                    fmt_sig(p.magnitude / top, 6)
                )
                .expect("write to String");
            }
            print!("{table}");
            Ok(())
        }
        Command::RunProgram {
            file,
            phi1,
            phi2,
            config,
        } => run_program(&file, phi1.zip(phi2), config.as_deref()),
        Command::Fit {
            state,
            family,
            errors,
            grid,
            cycle,
            exec,
        } => {
            let exp = experiment(state, family, &errors)?;
            let c = fit_phase_components(&sample_phase_surface(&exp, grid, cycle, exec.mode()))
                .map_err(Failure::usage)?;
            let model = model_coefficients(errors.delta1, errors.delta2).map_err(Failure::usage)?;
            let rounded = |x: f64| if x.abs() < 1e-14 { 0.0 } else { r12(x) };
            let out = json!({
                "state": BellLabel::from(state).name(),
                "family": DetectorFamily::from(family),
                "delta1": errors.delta1,
                "delta2": errors.delta2,
                "grid": grid,
                "phase_cycle": cycle,
                "components": {
                    "a0": rounded(c.a0), "a1": rounded(c.a1), "a2": rounded(c.a2),
                    "a12m": rounded(c.a12m), "a12p": rounded(c.a12p),
                    "s1": rounded(c.s1), "s2": rounded(c.s2),
                    "s12m": rounded(c.s12m), "s12p": rounded(c.s12p),
                    "residual": rounded(c.residual),
                },
                "model": model,
            });
            println!("{}", pretty(&out));
            Ok(())
        }
        Command::QuantumLimit { freq } => {
            let result = quantum_limit_temperature(freq * 1e9).map_err(Failure::usage)?;
            println!(
                "{}",
                pretty(&serde_json::to_value(result).expect("serializable"))
            );
            eprintln!("{}", result.summary());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
