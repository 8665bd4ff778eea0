mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hybrid_repeater::analytics::{alpha_for_s, boundary, log_grid};

use config::{AlphaRange, Detector, Physics, Protocol, Settings};
use table::{compute_row, compute_rows, emit, header, num, sweep_csv, SWEEP_HEADER};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Validation(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "bad configuration: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Validation(n) => write!(f, "{n} validation check(s) failed"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hrsim",
    version,
    about = "Entanglement generation with coherent probes: sweeps, bounds and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single amplitude (--alpha)
    Point(Settings),
    /// Sweep the probe amplitude and write one CSV row per value
    Sweep(Settings),
    /// Tabulate the optimal (P_s, F) frontier for the fiber set by --l and --l0
    Boundary(Settings),
    /// Run the built-in consistency checks
    Validate,
    /// Generate the data behind a standard figure
    Preset {
        #[arg(value_enum)]
        figure: Figure,
        #[command(flatten)]
        settings: Settings,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Figure {
    Fig1b,
    Fig2,
}

const TD1: (f64, f64) = (0.89, 1.4e-6);
const TD2: (f64, f64) = (0.12, 3.2e-7);

fn cmd_point(s: Settings) -> Result<(), CliError> {
    let phys = Physics::from_settings(&s)?;
    let alpha = s
        .alpha
        .ok_or_else(|| CliError::Config("point needs --alpha".into()))?;
    let row = compute_row(&phys, alpha)?;
    let mut fields = vec![("alpha".to_string(), num(alpha))];
    fields.extend(phys.describe());
    let mut text = header("point", &fields, &[]);
    text.push_str(SWEEP_HEADER);
    text.push_str(",ps_delta,f_delta\n");
    text.push_str(&row.csv());
    match row.closed {
        Some((ps, f)) => text.push_str(&format!(
            ",{},{}\n",
            num(row.ps - ps),
            num(row.fidelity - f)
        )),
        None => text.push_str(",,\n"),
    }
    emit(s.out.as_deref(), &text)
}

fn cmd_sweep(s: Settings) -> Result<(), CliError> {
    let phys = Physics::from_settings(&s)?;
    let range = AlphaRange::from_settings(&s)?;
    let rows = compute_rows(&phys, &range.values())?;
    let mut fields = phys.describe();
    fields.push((
        "alpha".into(),
        format!(
            "{}..{} ({} points, {})",
            num(range.min),
            num(range.max),
            range.count,
            range.scale
        ),
    ));
    emit(
        s.out.as_deref(),
        &sweep_csv(&header("sweep", &fields, &[]), &rows),
    )
}

fn cmd_boundary(s: Settings) -> Result<(), CliError> {
    let phys = Physics::from_settings(&s)?;
    let t = phys.transmittance();
    let count = s.count.unwrap_or(101);
    if count < 2 {
        return Err(CliError::Config(
            "boundary needs --count of at least 2".into(),
        ));
    }
    let fields = vec![
        ("l".to_string(), num(phys.l)),
        ("l0".to_string(), num(phys.l0)),
        ("T".to_string(), num(t)),
        ("count".to_string(), count.to_string()),
    ];
    let mut text = header("boundary", &fields, &[]);
    text.push_str("s,ps,f_bound\n");
    for i in 0..count {
        // s runs from 1 down to 0, so ps increases row by row
        let s_val = 1.0 - i as f64 / (count - 1) as f64;
        let b = boundary(t, s_val).map_err(|e| CliError::Config(e.to_string()))?;
        text.push_str(&format!("{},{},{}\n", num(s_val), num(b.ps), num(b.f)));
    }
    emit(s.out.as_deref(), &text)
}

fn cmd_validate() -> Result<(), CliError> {
    let checks =
        hybrid_repeater::validation::run_all().map_err(|e| CliError::Config(e.to_string()))?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!("{c}");
    }
    println!(
        "{} of {} checks passed",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        return Err(CliError::Validation(failed));
    }
    Ok(())
}

struct Curve {
    name: &'static str,
    protocol: Protocol,
    detector: Detector,
    td: (f64, f64),
}

fn cmd_preset(figure: Figure, s: Settings) -> Result<(), CliError> {
    let dir: PathBuf = s
        .out
        .clone()
        .ok_or_else(|| CliError::Config("presets need --out <directory>".into()))?;
    let base = Physics::from_settings(&Settings {
        protocol: None,
        detector: None,
        ..s.clone()
    })?;
    let t = base.transmittance();
    if !(t > 0.0 && t < 1.0) {
        return Err(CliError::Config(
            "presets need a lossy fiber (--l > 0)".into(),
        ));
    }
    let count = s.count.unwrap_or(60);
    if count < 2 {
        return Err(CliError::Config(
            "presets need --count of at least 2".into(),
        ));
    }
    let (tag, curves) = match figure {
        Figure::Fig1b => (
            "fig1b",
            vec![
                Curve {
                    name: "new_pnr",
                    protocol: Protocol::New,
                    detector: Detector::Pnr,
                    td: (1.0, 0.0),
                },
                Curve {
                    name: "II_pnr",
                    protocol: Protocol::II,
                    detector: Detector::Pnr,
                    td: (1.0, 0.0),
                },
                Curve {
                    name: "I_homodyne",
                    protocol: Protocol::I,
                    detector: Detector::Homodyne,
                    td: (1.0, 0.0),
                },
            ],
        ),
        Figure::Fig2 => (
            "fig2",
            vec![
                Curve {
                    name: "I_homodyne",
                    protocol: Protocol::I,
                    detector: Detector::Homodyne,
                    td: (1.0, 0.0),
                },
                Curve {
                    name: "II_td1",
                    protocol: Protocol::II,
                    detector: Detector::Td,
                    td: TD1,
                },
                Curve {
                    name: "II_td2",
                    protocol: Protocol::II,
                    detector: Detector::Td,
                    td: TD2,
                },
                Curve {
                    name: "new_td1",
                    protocol: Protocol::New,
                    detector: Detector::Td,
                    td: TD1,
                },
                Curve {
                    name: "new_td2",
                    protocol: Protocol::New,
                    detector: Detector::Td,
                    td: TD2,
                },
            ],
        ),
    };
    // s = |<u1|u0>| from 1e-4 to 1 - 1e-4, i.e. P_s of the two-probe protocol from ~1 down to 1e-4
    let alphas: Vec<f64> = log_grid(1e-4, 1.0 - 1e-4, count)
        .into_iter()
        .map(|sv| alpha_for_s(sv, base.theta, t))
        .collect();
    let mut notes = vec!["amplitudes follow a log grid in s = exp(-2 T alpha^2 sin^2(theta/2))"];
    if figure == Figure::Fig2 && s.l.is_none() {
        notes.push("assumed fiber length l = 10 km (override with --l)");
    }
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for c in curves {
        let phys = Physics {
            protocol: c.protocol,
            detector: c.detector,
            eta: c.td.0,
            nu: c.td.1,
            ..base.clone()
        };
        let rows = compute_rows(&phys, &alphas)?;
        let mut fields = vec![("curve".to_string(), c.name.to_string())];
        fields.extend(phys.describe());
        fields.push(("count".into(), count.to_string()));
        let text = sweep_csv(&header(&format!("preset {tag}"), &fields, &notes), &rows);
        emit(Some(&dir.join(format!("{tag}_{}.csv", c.name))), &text)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Point(s) => cmd_point(s.resolve()?),
        Command::Sweep(s) => cmd_sweep(s.resolve()?),
        Command::Boundary(s) => cmd_boundary(s.resolve()?),
        Command::Validate => cmd_validate(),
        Command::Preset { figure, settings } => cmd_preset(figure, settings.resolve()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hrsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
