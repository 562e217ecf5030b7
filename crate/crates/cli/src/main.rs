//! `lot`: transport, duality, geodesics and entropy experiments from the shell.
//!
//! Exit codes: 0 success, 1 unreadable or invalid input, 2 solver failure or
//! failed self-test, 3 violated precondition.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lot_conformance::instances::{rng, timelike_pair};
use lot_core::duality::{cyclical_monotonicity_margin, dual_value, find_u_separation, starshape_check, verify_certificate};
use lot_core::entropy::DensityCloud;
use lot_core::experiment::{ExperimentConfig, ExperimentOutcome};
use lot_core::geodesic::{geodesic_path, geodesy_defect, monge_ampere_residual, transport_map, Density, TransportMap};
use lot_core::grammar::{parse_density, parse_function, parse_potential, parse_spacetime};
use lot_core::io::{parse_measure, to_json, write_csv};
use lot_core::transport::{cost_matrix, ell_u};
use lot_core::{DiscreteMeasure, LotError, Spacetime};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lot", version, about = "Orlicz-type Lorentzian optimal transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Pair {
    /// Source measure (JSON with `points` and `weights`).
    #[arg(long, requires = "nu", required_unless_present = "seed")]
    mu: Option<PathBuf>,
    /// Target measure.
    #[arg(long, requires = "mu")]
    nu: Option<PathBuf>,
    /// Generate a random timelike pair in 1+1 dimensions instead of reading files.
    #[arg(long, conflicts_with_all = ["mu", "nu"])]
    seed: Option<u64>,
    /// Largest atom count of a generated measure.
    #[arg(long, default_value_t = 4, requires = "seed")]
    atoms: usize,
    /// Cost profile, e.g. `u_p:0.5` or `u_0`.
    #[arg(long, default_value = "u_p:0.5")]
    u: String,
    /// Spacetime; defaults to flat Minkowski space of the measures' dimension.
    #[arg(long)]
    spacetime: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Separation,
    Monotone,
    Starshape,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the transport distance and an optimal coupling.
    Transport(Pair),
    /// Dual value plus a separation certificate, a monotonicity scan or a star-shape scan.
    Duality {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_enum, default_value = "separation")]
        check: Check,
        /// Longest cycle for `--check monotone`.
        #[arg(long, default_value_t = 4)]
        cycle: usize,
        /// Number of scale points for `--check starshape`.
        #[arg(long, default_value_t = 5)]
        grid: usize,
    },
    /// Discrete geodesic through midpoints of the optimal coupling.
    Geodesic {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 11)]
        grid: usize,
    },
    /// Push a density through the map generated by a closed-form potential.
    GeodesicMap {
        /// `affine:a=..,b=..` or `quad:q=..,a=..,b=..`
        #[arg(long)]
        phi: String,
        /// `box:lo=..,hi=..` or `ball:center=..,r=..`
        #[arg(long)]
        rho0: String,
        #[arg(long, default_value = "u_p:0.5")]
        u: String,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        /// Gauss points per axis for box densities.
        #[arg(long, default_value_t = 8)]
        quadrature: usize,
        /// Particle count for ball densities.
        #[arg(long, default_value_t = 1024)]
        particles: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an entropy experiment from the catalogue or a config file.
    Entropy {
        #[arg(long, conflicts_with = "config", required_unless_present_any = ["config", "list"])]
        experiment: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print catalogue names and exit.
        #[arg(long)]
        list: bool,
        /// CSV of the curve (or of the radius sweep); the JSON summary goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every acceptance criterion and print a pass/fail table.
    Selftest,
}

enum Failure {
    Input(String),
    Solver(String),
    Precondition(String),
}

impl From<LotError> for Failure {
    fn from(e: LotError) -> Self {
        match e {
            LotError::Precondition(_) => Failure::Precondition(e.to_string()),
            LotError::Solver(_) | LotError::NoCausalCoupling => Failure::Solver(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_measure(path: &Path) -> Outcome<DiscreteMeasure> {
    parse_measure(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Outcome<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Solver(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct Loaded {
    st: Spacetime,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    u: lot_core::AdmissibleFunction,
    seed: Option<u64>,
}

impl Loaded {
    /// Adds the seed and the generated measures so seeded runs can be replayed.
    fn record(&self, doc: Value) -> Outcome<Value> {
        let Some(seed) = self.seed else { return Ok(doc) };
        let Value::Object(mut map) = doc else { return Ok(doc) };
        let to_value = |m: &DiscreteMeasure| serde_json::to_value(m).map_err(|e| Failure::Solver(e.to_string()));
        map.insert("seed".into(), seed.into());
        map.insert("mu".into(), to_value(&self.mu)?);
        map.insert("nu".into(), to_value(&self.nu)?);
        Ok(Value::Object(map))
    }
}

fn load(pair: &Pair) -> Outcome<Loaded> {
    let (mu, nu) = match (&pair.mu, &pair.nu, pair.seed) {
        (Some(mu), Some(nu), _) => (load_measure(mu)?, load_measure(nu)?),
        (_, _, Some(seed)) => {
            if pair.atoms == 0 {
                return Err(Failure::Input("--atoms must be positive".into()));
            }
            timelike_pair(&mut rng(seed), pair.atoms)
        }
        _ => return Err(Failure::Input("pass --mu and --nu, or --seed".into())),
    };
    let st = match &pair.spacetime {
        Some(spec) => parse_spacetime(spec)?,
        None => Spacetime::minkowski(mu.dim())?,
    };
    Ok(Loaded { st, mu, nu, u: parse_function(&pair.u)?, seed: pair.seed })
}

fn transport(pair: &Pair) -> Outcome<()> {
    let l = load(pair)?;
    let sol = ell_u(&l.st, &l.mu, &l.nu, &l.u, pair.tol)?;
    let doc = serde_json::to_value(&sol).map_err(|e| Failure::Solver(e.to_string()))?;
    emit(pair.out.as_deref(), &to_json(&l.record(doc)?)?)
}

fn duality(pair: &Pair, check: Check, cycle: usize, grid: usize) -> Outcome<()> {
    let l = load(pair)?;
    let doc = match check {
        Check::Separation => {
            let cert = find_u_separation(&l.st, &l.mu, &l.nu, &l.u, pair.tol)?;
            let report = verify_certificate(&cert, &l.st, &l.mu, &l.nu, &l.u)?;
            let dual = dual_value(&l.st, &l.mu, &l.nu, &l.u, pair.tol)?;
            json!({ "dual_value": dual, "certificate": cert, "report": report })
        }
        Check::Monotone => {
            if cycle < 2 {
                return Err(Failure::Input("--cycle must be at least 2".into()));
            }
            let sol = ell_u(&l.st, &l.mu, &l.nu, &l.u, pair.tol)?;
            let lambda = sol
                .lambda
                .finite()
                .filter(|x| *x > 0.0)
                .ok_or_else(|| Failure::Precondition("transport distance is not positive".into()))?;
            let coupling = sol.coupling.as_ref().ok_or_else(|| Failure::Solver("no optimal coupling".into()))?;
            let cost = cost_matrix(&l.st, &l.mu, &l.nu, &l.u.rescale(lambda)?)?;
            let report = cyclical_monotonicity_margin(&cost, coupling, cycle)?;
            json!({ "lambda": lambda, "coupling": coupling, "report": report })
        }
        Check::Starshape => {
            if grid == 0 {
                return Err(Failure::Input("--grid must be positive".into()));
            }
            let cert = find_u_separation(&l.st, &l.mu, &l.nu, &l.u, pair.tol)?;
            let t: Vec<f64> = (1..=grid).map(|k| k as f64 / grid as f64).collect();
            let report = starshape_check(&l.st, &l.mu, &l.nu, &cert.phi, &l.u.rescale(cert.lambda)?, &t)?;
            json!({ "lambda": cert.lambda, "phi": cert.phi, "report": report })
        }
    };
    emit(pair.out.as_deref(), &to_json(&l.record(doc)?)?)
}

fn geodesic(pair: &Pair, grid: usize) -> Outcome<()> {
    let l = load(pair)?;
    let path = geodesic_path(&l.st, &l.mu, &l.nu, &l.u, grid, pair.tol)?;
    let defect = geodesy_defect(&l.st, &path, &l.u, pair.tol)?;
    emit(pair.out.as_deref(), &to_json(&l.record(json!({ "path": path, "defect": defect }))?)?)
}

#[allow(clippy::too_many_arguments)]
fn geodesic_map(
    phi: &str,
    rho0: &str,
    u: &str,
    lambda: f64,
    s: f64,
    quadrature: usize,
    particles: usize,
    out: Option<&Path>,
) -> Outcome<()> {
    let phi = parse_potential(phi)?;
    let rho = parse_density(rho0)?;
    if phi.dim() != rho.dim() {
        return Err(Failure::Input("potential and density dimensions differ".into()));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Failure::Input(format!("--s must lie in [0, 1] (got {s})")));
    }
    let map = TransportMap::new(phi, &parse_function(u)?, lambda)?;
    let cloud = DensityCloud::from_density(&rho, quadrature, particles)?;
    let sample = transport_map(&map, s, &cloud.points, &cloud.masses)?;
    let residual = match rho {
        Density::Box { .. } if s < 1.0 => Some(monge_ampere_residual(&map, &rho, s, quadrature.max(4), 4)?),
        _ => None,
    };
    let doc = json!({ "potential": map.potential().label(), "density": rho.label(), "lambda": lambda, "sample": sample, "monge_ampere_residual": residual });
    emit(out, &to_json(&doc)?)
}

fn entropy(experiment: Option<&str>, config: Option<&Path>, list: bool, out: Option<&Path>) -> Outcome<()> {
    if list {
        for (name, text) in lot_conformance::CATALOGUE {
            if ExperimentConfig::parse(text).is_ok() {
                println!("{name}");
            }
        }
        return Ok(());
    }
    let text = match (experiment, config) {
        (Some(name), _) => lot_conformance::catalogue_entry(name)
            .ok_or_else(|| Failure::Input(format!("unknown experiment {name:?}; try --list")))?
            .to_string(),
        (None, Some(path)) => read(path)?,
        (None, None) => return Err(Failure::Input("pass --experiment or --config".into())),
    };
    let outcome = ExperimentConfig::parse(&text)?.run()?;
    if let Some(path) = out {
        let mut buf = Vec::new();
        match &outcome {
            ExperimentOutcome::Curve { curve, report, .. } => {
                let rows: Vec<Vec<f64>> = (0..curve.s_grid.len())
                    .map(|k| {
                        vec![
                            curve.s_grid[k],
                            curve.e[k],
                            curve.e1_analytic[k],
                            curve.e2_analytic[k],
                            curve.e1_fd[k],
                            curve.e2_fd[k],
                            report.margin_lambda2[k],
                            report.margin_l2pi[k],
                        ]
                    })
                    .collect();
                let header = ["s", "e", "e1_analytic", "e2_analytic", "e1_fd", "e2_fd", "margin_lambda2", "margin_l2pi"];
                write_csv(&mut buf, &header, &rows)
            }
            ExperimentOutcome::RicciFailure { report, .. } => {
                let rows: Vec<Vec<f64>> = report.rows.iter().map(|r| vec![r.radius, r.lambda, r.margin_at_start, r.min_margin]).collect();
                write_csv(&mut buf, &["radius", "lambda", "margin_at_start", "min_margin"], &rows)
            }
        }
        .expect("writing to a Vec cannot fail");
        emit(Some(path), &String::from_utf8(buf).expect("CSV is ASCII"))?;
    }
    emit(None, &to_json(&outcome)?)
}

fn selftest() -> Outcome<()> {
    let reports = lot_conformance::run_all();
    for r in &reports {
        println!("{r}");
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria pass", reports.len());
    if passed == reports.len() {
        Ok(())
    } else {
        Err(Failure::Solver(format!("{} criteria failed", reports.len() - passed)))
    }
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Transport(pair) => transport(&pair),
        Command::Duality { pair, check, cycle, grid } => duality(&pair, check, cycle, grid),
        Command::Geodesic { pair, grid } => geodesic(&pair, grid),
        Command::GeodesicMap { phi, rho0, u, lambda, s, quadrature, particles, out } => {
            geodesic_map(&phi, &rho0, &u, lambda, s, quadrature, particles, out.as_deref())
        }
        Command::Entropy { experiment, config, list, out } => entropy(experiment.as_deref(), config.as_deref(), list, out.as_deref()),
        Command::Selftest => selftest(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    lot_conformance::init_threads();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (code, kind, message) = match failure {
                Failure::Input(m) => (1, "input", m),
                Failure::Solver(m) => (2, "solver", m),
                Failure::Precondition(m) => (3, "precondition", m),
            };
            eprintln!("lot: {kind} error: {message}");
            ExitCode::from(code)
        }
    }
}
