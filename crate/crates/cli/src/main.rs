use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use faddeev::complex_ei::{e1, ei, ei_asymptotic_partial_sum, AsymptoticConfig, EiArgument};
use faddeev::fullspace::{expansion_coefficient, first_term, g_zeta_fullspace};
use faddeev::geometry::FieldPoint;
use faddeev::harness::{
    csv_string, default_presets, discrepancy_report, format_f64, parse_s_grid, render_report_csv,
    render_report_text, run_check, run_sweep_partial, slab_prediction, write_csv_file, ConfigFile,
    SweepConfig, SweepRow, SweepTarget,
};
use faddeev::slab::{g_zeta_slab_paired, g_zeta_slab_truncated, i_nu_asymptotic, i_nu_quadrature};
use faddeev::{Error, C64};

const EXIT_USAGE: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fgreen",
    version,
    about = "Faddeev Green functions: evaluation, sweeps and oracle checks"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Sweep target: fg3, slab, radial or ei
    #[arg(long, global = true)]
    target: Option<String>,
    /// Geometric grid start:stop:count
    #[arg(long = "s-grid", global = true)]
    s_grid: Option<String>,
    /// Comma-separated truncation orders (mode counts for slab)
    #[arg(long, global = true, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    /// Output file (CSV for sweeps and reports)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// paper | fourier-standard
    #[arg(long, global = true)]
    normalization: Option<String>,
    /// unit | scaled
    #[arg(long = "alpha-convention", global = true)]
    alpha_convention: Option<String>,
    /// Seed for randomized checks
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Exponential integral at a point, or a sweep of its asymptotic partial sums
    Ei {
        /// Argument as re,im
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        /// Truncation order of the asymptotic series at --z
        #[arg(long)]
        order: Option<usize>,
    },
    /// Free-space Green function
    Fg3 {
        #[command(subcommand)]
        action: Fg3Action,
    },
    /// Slab Green function
    Slab {
        #[command(subcommand)]
        action: SlabAction,
    },
    /// Run the oracle checks of the preset table
    Validate {
        /// Run a single preset
        #[arg(long)]
        preset: Option<String>,
    },
    /// Printed formulas next to their re-derived counterparts
    Report,
}

#[derive(Subcommand)]
enum Fg3Action {
    Eval {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        psi: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
    },
    Sweep,
}

#[derive(Subcommand)]
enum SlabAction {
    Eval {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        z: Option<f64>,
        /// Number of vertical mode pairs
        #[arg(long)]
        modes: Option<usize>,
    },
    Sweep,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Validation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Format(_) | Error::Io { .. } => EXIT_USAGE,
        Error::SweepPoint { source, .. } => exit_code(source),
        _ => EXIT_DOMAIN,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Validation) => ExitCode::from(EXIT_VALIDATION),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let c = &cli.common;
    match cli.command {
        Command::Ei { z: Some(z), order } => {
            let z = parse_complex(&z)?;
            let v = ei(z)?;
            let mut out = vec![
                line("z", z),
                line("e1", e1(EiArgument::new(z)?).value),
                line("ei", v.value),
                format!("ei_err = {}", format_f64(v.err)),
            ];
            if let Some(n) = order {
                let partial =
                    ei_asymptotic_partial_sum(z, n, &AsymptoticConfig::default())? / (-z).exp();
                out.push(line("ei_asymptotic", partial));
            }
            emit_text(&out.join("\n"), c.out.as_ref())
        }
        Command::Ei { z: None, .. } => sweep(&file, c, SweepTarget::Ei),
        Command::Fg3 {
            action: Fg3Action::Sweep,
        } => {
            let target = match c.target.as_deref() {
                Some("radial") => SweepTarget::Radial,
                _ => SweepTarget::Fg3,
            };
            sweep(&file, c, target)
        }
        Command::Fg3 {
            action: Fg3Action::Eval { s, r, psi, omega },
        } => {
            let cfg = resolve(&file, c, SweepTarget::Fg3)?;
            let p = cfg.params;
            let fp = FieldPoint::new(
                r.unwrap_or(p.field_point.r),
                psi.unwrap_or(p.field_point.psi),
                omega.unwrap_or(p.field_point.omega),
            )?;
            let d = p.direction(s)?;
            let g = g_zeta_fullspace(&fp, &d, &cfg.quadrature)?;
            let c1 = expansion_coefficient(&fp, &d, 1, &cfg.quadrature)?;
            let factor = cfg.normalization.factor::<f64>();
            let out = [
                format!("s = {}", format_f64(s)),
                line("g", g.value * factor),
                format!("g_err = {}", format_f64(g.err * factor)),
                line("c1", c1.value),
                line("first_term", first_term(c1.value, fp.r, s) * factor),
            ];
            emit_text(&out.join("\n"), c.out.as_ref())
        }
        Command::Slab {
            action: SlabAction::Sweep,
        } => sweep(&file, c, SweepTarget::Slab),
        Command::Slab {
            action:
                SlabAction::Eval {
                    s,
                    r,
                    theta,
                    z,
                    modes,
                },
        } => {
            let cfg = resolve(&file, c, SweepTarget::Slab)?;
            let mut setup = cfg.params.slab;
            setup.r = r.unwrap_or(setup.r);
            setup.theta = theta.unwrap_or(setup.theta);
            setup.z = z.unwrap_or(setup.z);
            let sc = setup.config(s)?;
            let point = setup.point(&sc)?;
            let n = modes
                .or(c.orders.as_ref().and_then(|o| o.first().copied()))
                .unwrap_or_else(|| sc.default_modes());
            let q = &cfg.quadrature;
            let truncated = g_zeta_slab_truncated(&point, s, &sc, n, q)?;
            let paired = g_zeta_slab_paired(&setup.bump, &point, s, &sc, n, q)?;
            let tol = faddeev::quadrature::Tolerance::new(q.abs_tol, q.rel_tol, q.max_subdivisions);
            let out = [
                format!("s = {}", format_f64(s)),
                format!("modes = {n}"),
                line("g_truncated", truncated.value.value),
                format!("g_truncated_err = {}", format_f64(truncated.value.err)),
                line("g_paired", paired.value.value),
                line("g_paired_prediction", slab_prediction(&setup, &sc, s)?),
                line(
                    "i0_quadrature",
                    i_nu_quadrature(&point, s, 0, &sc, q)?.value,
                ),
                line(
                    "i0_principal_term",
                    i_nu_asymptotic(&point, s, &sc, cfg.alpha_convention, tol)?.value,
                ),
            ];
            emit_text(&out.join("\n"), c.out.as_ref())
        }
        Command::Validate { preset } => {
            let presets = match file.presets.clone() {
                Some(p) => p,
                None => default_presets()?,
            };
            let selected: Vec<(&String, _)> = match &preset {
                Some(name) => match presets.get_key_value(name) {
                    Some(entry) => vec![entry],
                    None => return Err(Failure::Usage(format!("no preset named `{name}`"))),
                },
                None => presets.iter().collect(),
            };
            let q = SweepConfig::from_file(&file, Some(SweepTarget::Radial))?.quadrature;
            let seed = c.seed.or(file.seed).unwrap_or(0);
            let mut all_passed = true;
            let mut text = String::new();
            for (name, p) in selected {
                let outcome = run_check(name, &p.check, seed, &q);
                all_passed &= outcome.passed;
                println!("{}", outcome.line());
                text.push_str(&outcome.line());
                text.push('\n');
            }
            if let Some(path) = &c.out {
                std::fs::write(path, text).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
            }
            if all_passed {
                Ok(())
            } else {
                Err(Failure::Validation)
            }
        }
        Command::Report => {
            let q = SweepConfig::from_file(&file, Some(SweepTarget::Radial))?.quadrature;
            let entries = discrepancy_report(&q)?;
            print!("{}", render_report_text(&entries));
            if let Some(path) = &c.out {
                let csv = render_report_csv(&entries)?;
                std::fs::write(path, csv).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
            }
            Ok(())
        }
    }
}

fn line(name: &str, v: C64) -> String {
    format!("{name} = {} {}", format_f64(v.re), format_f64(v.im))
}

fn parse_complex(text: &str) -> Result<C64, Failure> {
    let parts: Vec<&str> = text.split(',').collect();
    let parse = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| Failure::Usage(format!("complex `{text}`: {e}")))
    };
    match parts.as_slice() {
        [re] => Ok(C64::new(parse(re)?, 0.0)),
        [re, im] => Ok(C64::new(parse(re)?, parse(im)?)),
        _ => Err(Failure::Usage(format!("complex `{text}` is not re,im"))),
    }
}

fn emit_text(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|source| {
            Error::Io {
                path: path.clone(),
                source,
            }
            .into()
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Config file first, then flags. The subcommand fixes the target; `--target`
/// may only repeat it (or pick `radial` under `fg3`).
fn resolve(file: &ConfigFile, c: &Common, target: SweepTarget) -> Result<SweepConfig, Failure> {
    if let Some(t) = &c.target {
        let requested: SweepTarget = t.parse()?;
        if requested != target {
            return Err(Failure::Usage(format!(
                "--target {t} conflicts with the {} subcommand",
                target.as_str()
            )));
        }
    }
    let mut cfg = SweepConfig::from_file(file, Some(target))?;
    if let Some(grid) = &c.s_grid {
        cfg.s_values = parse_s_grid(grid)?;
    }
    if let Some(orders) = &c.orders {
        cfg.orders = orders.clone();
    }
    if let Some(n) = &c.normalization {
        cfg.normalization = n.parse()?;
    }
    if let Some(a) = &c.alpha_convention {
        cfg.alpha_convention = a.parse()?;
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &c.out {
        cfg.output_path = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sweep(file: &ConfigFile, c: &Common, target: SweepTarget) -> Result<(), Failure> {
    let cfg = resolve(file, c, target)?;
    let output = run_sweep_partial(&cfg)?;
    write_rows(&output.rows, cfg.output_path.as_ref())?;
    let mut failures = output.failures.into_iter();
    let Some(first) = failures.next() else {
        return Ok(());
    };
    for e in failures {
        eprintln!("error: {e}");
    }
    Err(Failure::Lib(first))
}

fn write_rows(rows: &[SweepRow], path: Option<&PathBuf>) -> Result<(), Failure> {
    match path {
        Some(p) => Ok(write_csv_file(rows, p)?),
        None => {
            let text = csv_string(rows)?;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Usage(format!("stdout: {e}")))
        }
    }
}
