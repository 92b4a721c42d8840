//! `bic` command-line surface.

pub mod output;

use crate::error::BicError;
use crate::oracle::{build_hamiltonian, find_bic_candidates};
use crate::params::{EmitterArrayParams, ParitySector, Sheet, Tolerances};
use crate::poles::{critical_distance, pole_trajectory, SweepParameter};
use crate::spectrum::{
    class_state, exact_resonant_epsilons, field_wavefunction, probability_approximant, resonant_energy, solve_bic,
    spectral_lines, BoundStateInContinuum, ProbabilityClass, SolveMode,
};
use clap::{Args, Parser, Subcommand};
use output::{json_document, write_csv, write_json, Cell, RunManifest, Table};
use serde_json::{json, Value};
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bic", version, about = "Bound states in the continuum of emitter arrays in a 1D massive boson field (units of m)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct TolArgs {
    #[arg(long, default_value_t = Tolerances::default().quad_abs)]
    pub quad_abs: f64,
    #[arg(long, default_value_t = Tolerances::default().quad_rel)]
    pub quad_rel: f64,
    #[arg(long, default_value_t = Tolerances::default().max_subdivisions)]
    pub max_subdivisions: usize,
    #[arg(long, default_value_t = Tolerances::default().singular)]
    pub singular: f64,
    #[arg(long, default_value_t = Tolerances::default().grid_points)]
    pub grid_points: usize,
    #[arg(long, default_value_t = Tolerances::default().root_tol)]
    pub root_tol: f64,
    #[arg(long, default_value_t = Tolerances::default().newton_max_iter)]
    pub newton_max_iter: usize,
}

impl TolArgs {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            quad_abs: self.quad_abs,
            quad_rel: self.quad_rel,
            max_subdivisions: self.max_subdivisions,
            singular: self.singular,
            grid_points: self.grid_points,
            root_tol: self.root_tol,
            newton_max_iter: self.newton_max_iter,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// BICs of one array in an energy window (JSON)
    #[command(allow_negative_numbers = true)]
    Find {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        emin: f64,
        #[arg(long)]
        emax: f64,
        #[arg(long)]
        sector: Option<ParitySector>,
        #[arg(long, default_value = "full")]
        mode: SolveMode,
        /// extra energy seeds
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Spectral lines over a spacing range (CSV)
    #[command(allow_negative_numbers = true)]
    Lines {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        dmin: f64,
        #[arg(long)]
        dmax: f64,
        #[arg(long)]
        emax: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Admissible ε for an exact resonance E_ν(d) (JSON)
    #[command(allow_negative_numbers = true)]
    ResonantEps {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        nu: u32,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Field wavefunction of a stored state (CSV)
    #[command(allow_negative_numbers = true)]
    Field {
        /// JSON file holding a state, or the output of `bic find`
        #[arg(long)]
        state: PathBuf,
        /// entry of `results` when the file is `bic find` output
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        xmin: f64,
        #[arg(long)]
        xmax: f64,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Exact and closed-form atomic probability of a class (JSON)
    #[command(allow_negative_numbers = true)]
    Prob {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        class: ProbabilityClass,
        #[arg(long)]
        nu: u32,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Pole trajectories against ε on one sheet (CSV)
    #[command(allow_negative_numbers = true)]
    Poles {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        eps_min: f64,
        #[arg(long)]
        eps_max: f64,
        #[arg(long)]
        sheet: Sheet,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 1e-10)]
        touch_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Critical spacing of the nonperturbative pair (JSON)
    #[command(allow_negative_numbers = true)]
    Critical {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        gamma: f64,
        /// lower resonance index of the window
        #[arg(long, default_value_t = 1)]
        window: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Confined eigenstates of the periodic-box Hamiltonian (JSON)
    #[command(allow_negative_numbers = true)]
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long = "L")]
        length: f64,
        #[arg(long)]
        modes: usize,
        #[arg(long)]
        emin: Option<f64>,
        #[arg(long)]
        emax: Option<f64>,
        /// minimum confinement of a reported state
        #[arg(long, default_value_t = 0.99)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical { error: BicError, seeds: Vec<f64> },
    Io(std::io::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn classify(error: BicError, seeds: &[f64]) -> CliError {
    match error {
        BicError::Domain(m) | BicError::Label(m) | BicError::Config(m) => CliError::Usage(m),
        BicError::SizeMismatch { .. } => CliError::Usage(error.to_string()),
        e => CliError::Numerical { error: e, seeds: seeds.to_vec() },
    }
}

fn usage(cond: bool, msg: impl Into<String>) -> Result<(), CliError> {
    if cond {
        Err(CliError::Usage(msg.into()))
    } else {
        Ok(())
    }
}

fn dummy_params(n: usize, d: f64, gamma: f64) -> Result<EmitterArrayParams, BicError> {
    EmitterArrayParams::new(n, 1.0, d, gamma)
}

fn load_state(path: &PathBuf, index: usize) -> Result<BoundStateInContinuum, CliError> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let v = match v.get("results") {
        Some(Value::Array(a)) => a.get(index).cloned().ok_or_else(|| CliError::Usage(format!("no state {index} in {}", path.display())))?,
        Some(other) => other.clone(),
        None => v,
    };
    serde_json::from_value(v).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Executes one parsed command; the manifest is returned with failures so
/// that error reports carry it.
pub fn execute(cmd: &Command) -> Result<(), (CliError, Option<RunManifest>)> {
    let fail = |e: CliError, m: &RunManifest| (e, Some(m.clone()));
    match cmd {
        Command::Find { n, d, gamma, emin, emax, sector, mode, seeds, out, tol } => {
            let t = tol.tolerances();
            let m = RunManifest::new(
                "find",
                json!({ "n": n, "d": d, "gamma": gamma, "emin": emin, "emax": emax, "sector": sector, "mode": mode }),
                t,
                json!({ "grid_points": t.grid_points, "seeds": seeds }),
            );
            usage(!(*emax > 1.0), format!("--emax {emax} must exceed the continuum threshold 1")).map_err(|e| fail(e, &m))?;
            usage(!(emax > emin), "--emax must exceed --emin").map_err(|e| fail(e, &m))?;
            let p = dummy_params(*n, *d, *gamma).map_err(|e| fail(classify(e, seeds), &m))?;
            let report = solve_bic(&p, *sector, *mode, (*emin, *emax), seeds, &t).map_err(|e| fail(classify(e, seeds), &m))?;
            for dg in report.unconverged.iter().chain(&report.rejected) {
                eprintln!("{}", serde_json::to_string(dg).expect("serializable"));
            }
            write_json(&json_document(&m, &report.states), out.as_deref()).map_err(|e| fail(e.into(), &m))
        }
        Command::Lines { n, gamma, dmin, dmax, emax, steps, out, tol } => {
            let t = tol.tolerances();
            let m = RunManifest::new(
                "lines",
                json!({ "n": n, "gamma": gamma, "dmin": dmin, "dmax": dmax, "emax": emax, "steps": steps }),
                t,
                json!({ "grid_points": t.grid_points, "seeds": [] }),
            );
            usage(!(*emax > 1.0), format!("--emax {emax} must exceed the continuum threshold 1")).map_err(|e| fail(e, &m))?;
            let rep = spectral_lines(*n, *gamma, (*dmin, *dmax), *steps, (1.0, *emax), &t).map_err(|e| fail(classify(e, &[]), &m))?;
            let mut table = Table::new(&[
                "d [1/m]",
                "E [m]",
                "sector",
                "nu",
                "branch",
                "chi [dimensionless]",
                "epsilon [m]",
                "exact_resonance",
            ]);
            for p in &rep.points {
                table.rows.push(vec![
                    Cell::Num(p.d),
                    Cell::Num(p.energy),
                    Cell::Text(p.sector.label().into()),
                    Cell::Int(p.nu as i64),
                    Cell::Text(p.branch.clone()),
                    Cell::Num(p.chi),
                    Cell::Num(p.epsilon),
                    Cell::Int(p.exact_resonance as i64),
                ]);
            }
            for g in &rep.gaps {
                eprintln!("{}", serde_json::to_string(g).expect("serializable"));
            }
            write_csv(&table, &m, out.as_deref()).map_err(|e| fail(e.into(), &m))
        }
        Command::ResonantEps { n, nu, d, gamma, out, tol } => {
            let t = tol.tolerances();
            let m = RunManifest::new("resonant-eps", json!({ "n": n, "nu": nu, "d": d, "gamma": gamma }), t, json!({}));
            usage(*nu == 0, "--nu must be at least 1").map_err(|e| fail(e, &m))?;
            let r = exact_resonant_epsilons(*n, *nu, *d, *gamma, &t).map_err(|e| fail(classify(e, &[]), &m))?;
            write_json(&json_document(&m, &r), out.as_deref()).map_err(|e| fail(e.into(), &m))
        }
        Command::Field { state, index, xmin, xmax, points, out, tol } => {
            let t = tol.tolerances();
            let m = RunManifest::new(
                "field",
                json!({ "state": state, "index": index, "xmin": xmin, "xmax": xmax, "points": points }),
                t,
                json!({}),
            );
            usage(*points < 2, "--points must be at least 2").map_err(|e| fail(e, &m))?;
            usage(!(xmax > xmin), "--xmax must exceed --xmin").map_err(|e| fail(e, &m))?;
            let st = load_state(state, *index).map_err(|e| fail(e, &m))?;
            let grid: Vec<f64> = (0..*points).map(|k| xmin + (xmax - xmin) * k as f64 / (*points - 1) as f64).collect();
            let f = field_wavefunction(&st, &grid, &t).map_err(|e| fail(classify(e, &[]), &m))?;
            let mut table = Table::new(&["x [1/m]", "Re xi [m^(1/2)]", "Im xi [m^(1/2)]", "|xi|^2 [m]"]);
            for (x, v) in f.x.iter().zip(&f.values) {
                table.rows.push(vec![Cell::Num(*x), Cell::Num(v.re), Cell::Num(v.im), Cell::Num(v.norm_sqr())]);
            }
            write_csv(&table, &m, out.as_deref()).map_err(|e| fail(e.into(), &m))
        }
        Command::Prob { n, class, nu, d, gamma, out, tol } => {
            let t = tol.tolerances();
            let m = RunManifest::new(
                "prob",
                json!({ "n": n, "class": class.label(), "nu": nu, "d": d, "gamma": gamma }),
                t,
                json!({ "grid_points": t.grid_points }),
            );
            usage(class.n() != *n, format!("class {class} belongs to n = {}", class.n())).map_err(|e| fail(e, &m))?;
            usage(*nu == 0, "--nu must be at least 1").map_err(|e| fail(e, &m))?;
            let r = prob_result(*n, *class, *nu, *d, *gamma, &t).map_err(|e| fail(e, &m))?;
            write_json(&json_document(&m, &r), out.as_deref()).map_err(|e| fail(e.into(), &m))
        }
        Command::Poles { n, d, gamma, eps_min, eps_max, sheet, steps, touch_tol, out, tol } => {
            let t = tol.tolerances();
            let m = RunManifest::new(
                "poles",
                json!({ "n": n, "d": d, "gamma": gamma, "eps_min": eps_min, "eps_max": eps_max, "sheet": sheet.to_string(), "steps": steps, "touch_tol": touch_tol }),
                t,
                json!({}),
            );
            usage(*sheet == Sheet::First, "--sheet must be II or III").map_err(|e| fail(e, &m))?;
            usage(!(eps_max >= eps_min) || *steps == 0, "need --eps-max ≥ --eps-min and --steps > 0").map_err(|e| fail(e, &m))?;
            let values: Vec<f64> = (0..=*steps).map(|k| eps_min + (eps_max - eps_min) * k as f64 / *steps as f64).collect();
            let base = EmitterArrayParams::new(*n, *eps_min, *d, *gamma).map_err(|e| fail(classify(e, &[]), &m))?;
            let mut table = Table::new(&["epsilon [m]", "Re z [m]", "Im z [m]", "sector", "branch"]);
            for sector in ParitySector::both() {
                for branch in 0..sector.block_size(*n) {
                    let tr = pole_trajectory(&base, sector, *sheet, branch, SweepParameter::Epsilon, &values, *touch_tol, &t)
                        .map_err(|e| fail(classify(e, &values), &m))?;
                    for p in &tr.points {
                        table.rows.push(vec![
                            Cell::Num(p.parameter),
                            Cell::Num(p.pole.z.re),
                            Cell::Num(p.pole.z.im),
                            Cell::Text(sector.label().into()),
                            Cell::Int(branch as i64),
                        ]);
                    }
                    if !tr.failures.is_empty() {
                        eprintln!("{}", json!({ "sector": sector.label(), "branch": branch, "failures": tr.failures }));
                    }
                }
            }
            write_csv(&table, &m, out.as_deref()).map_err(|e| fail(e.into(), &m))
        }
        Command::Critical { n, gamma, window, out, tol } => {
            let t = tol.tolerances();
            let m = RunManifest::new("critical", json!({ "n": n, "gamma": gamma, "window": window }), t, json!({ "grid_points": t.grid_points }));
            usage(*window == 0, "--window must be at least 1").map_err(|e| fail(e, &m))?;
            let c = critical_distance(*n, *gamma, *window, &t).map_err(|e| fail(classify(e, &[]), &m))?;
            write_json(&json_document(&m, &c), out.as_deref()).map_err(|e| fail(e.into(), &m))
        }
        Command::Oracle { n, d, gamma, epsilon, length, modes, emin, emax, threshold, out } => {
            let lo = emin.unwrap_or(1.0);
            let hi = emax.unwrap_or(epsilon + 0.1);
            let m = RunManifest::new(
                "oracle",
                json!({ "n": n, "d": d, "gamma": gamma, "epsilon": epsilon, "L": length, "modes": modes, "emin": lo, "emax": hi, "threshold": threshold }),
                Tolerances::default(),
                json!({}),
            );
            usage(!(hi > lo && hi > 1.0), "energy window must lie above 1 with --emax > --emin").map_err(|e| fail(e, &m))?;
            let p = EmitterArrayParams::new(*n, *epsilon, *d, *gamma).map_err(|e| fail(classify(e, &[]), &m))?;
            let model = build_hamiltonian(&p, *length, *modes, hi).map_err(|e| fail(classify(e, &[]), &m))?;
            let states = find_bic_candidates(&model, (lo, hi), *threshold);
            write_json(&json_document(&m, &states), out.as_deref()).map_err(|e| fail(e.into(), &m))
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProbResult {
    pub class: String,
    pub energy: f64,
    pub epsilon: f64,
    pub p_exact: f64,
    pub p_approx: f64,
}

/// Exact probability of the class member nearest to E_ν(d), and the
/// closed form at the same (ν, d, γ).
pub fn prob_result(n: usize, class: ProbabilityClass, nu: u32, d: f64, gamma: f64, tol: &Tolerances) -> Result<ProbResult, CliError> {
    let e = resonant_energy(nu, d).map_err(|e| classify(e, &[]))?;
    let below = if nu > 1 { resonant_energy(nu - 1, d).map_err(|e| classify(e, &[]))? } else { 1.0 };
    let above = resonant_energy(nu + 1, d).map_err(|e| classify(e, &[]))?;
    let window = (0.5 * (below + e), 0.5 * (e + above));
    let p = dummy_params(n, d, gamma).map_err(|e| classify(e, &[]))?;
    let report = solve_bic(&p, None, SolveMode::Full, window, &[e], tol).map_err(|er| classify(er, &[e]))?;
    let st = report
        .states
        .iter()
        .filter(|s| s.nu_nearest == nu && class_state(s) == Some(class))
        .min_by(|a, b| (a.energy - e).abs().total_cmp(&(b.energy - e).abs()))
        .ok_or_else(|| CliError::Numerical {
            error: BicError::NoConvergence { message: format!("no {class} state near E_{nu}({d})"), trajectory: vec![] },
            seeds: vec![e],
        })?;
    let approx = probability_approximant(class, nu, d, gamma).map_err(|e| classify(e, &[]))?;
    Ok(ProbResult { class: class.label().into(), energy: st.energy, epsilon: st.epsilon, p_exact: st.p, p_approx: approx })
}

fn error_document(e: &CliError, manifest: Option<&RunManifest>) -> String {
    let (kind, message, seeds, trajectory) = match e {
        CliError::Usage(m) => ("usage", m.clone(), vec![], vec![]),
        CliError::Io(err) => ("io", err.to_string(), vec![], vec![]),
        CliError::Numerical { error, seeds } => {
            let traj = match error {
                BicError::NoConvergence { trajectory, .. } => trajectory.clone(),
                _ => vec![],
            };
            ("numerical", error.to_string(), seeds.clone(), traj)
        }
    };
    let doc = json!({ "manifest": manifest, "error": { "kind": kind, "message": message, "seeds": seeds, "trajectory": trajectory } });
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err((e, m)) => {
            let doc = error_document(&e, m.as_ref());
            match e {
                CliError::Usage(ref msg) => {
                    eprintln!("error: {msg}");
                    EXIT_USAGE
                }
                CliError::Io(_) => {
                    eprint!("{doc}");
                    EXIT_NUMERICAL
                }
                CliError::Numerical { .. } => {
                    print!("{doc}");
                    EXIT_NUMERICAL
                }
            }
        }
    }
}
