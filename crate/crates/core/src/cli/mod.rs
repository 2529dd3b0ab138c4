//! Batch front end: `modkinetic <command> --config <file> --out <dir> [--threads N]`.
//!
//! Each run writes `manifest.json` and `<command>.csv` into the output
//! directory. Exit status 0 means success, 1 a configuration or I/O problem,
//! 2 a solver failure.

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::analytic::{self, SpectrumAnalytic};
use crate::dirac;
use crate::dynamics;
use crate::eigen::{self, EigenResult};
use crate::error::Error;
use crate::fit;
use crate::grid::Grid1D;
use crate::model::{ModelParams, Variant};
use crate::norm::{integrate, normalize};
use crate::operators::build_operators;
use crate::output::{json_float, Cell, Table};
use crate::par::{self, Execution};
use crate::potential::Potential;
use crate::scattering;
use crate::wavefunction::gaussian_packet;
use crate::wkb::WkbSolution;

pub use config::{parse, Command, CommandParams, RunConfig, Violation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliCommand {
    Spectrum,
    Density,
    Evolve,
    Scatter,
    Wkb,
    Dispersion,
    Klein,
    DiracCompare,
    /// Check a config file and list every violation.
    Validate,
}

impl CliCommand {
    fn run_command(self) -> Option<Command> {
        Some(match self {
            CliCommand::Spectrum => Command::Spectrum,
            CliCommand::Density => Command::Density,
            CliCommand::Evolve => Command::Evolve,
            CliCommand::Scatter => Command::Scatter,
            CliCommand::Wkb => Command::Wkb,
            CliCommand::Dispersion => Command::Dispersion,
            CliCommand::Klein => Command::Klein,
            CliCommand::DiracCompare => Command::DiracCompare,
            CliCommand::Validate => return None,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "modkinetic", version, about = "Quantum models with gradient-corrected kinetic terms")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: CliCommand,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing. Not used by `validate`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Config(Vec<Violation>),
    Io(String),
    Solver(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }

    pub fn report(&self) -> String {
        match self {
            CliError::Config(vs) => vs.iter().map(|v| format!("config error: {v}\n")).collect(),
            CliError::Io(msg) => format!("error: {msg}\n"),
            CliError::Solver(e) => format!("solver error: {e}\n"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Solver(e)
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

/// Parses `args` (program name first), runs, and returns the exit status.
/// Diagnostics go to standard error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprint!("{}", e.report());
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config(vec![Violation {
                path: "--threads".into(),
                message: "must be at least 1".into(),
            }]));
        }
        par::init_threads(n);
    }
    let text = fs::read_to_string(&cli.config).map_err(io_err(&cli.config))?;
    let Some(command) = cli.command.run_command() else {
        let cfg = parse(&text, None).map_err(CliError::Config)?;
        println!("{}: valid {} configuration", cli.config.display(), cfg.command.name());
        return Ok(());
    };
    let cfg = parse(&text, Some(command)).map_err(CliError::Config)?;
    let out = cli.out.as_ref().ok_or_else(|| {
        CliError::Config(vec![Violation {
            path: "--out".into(),
            message: format!("required for command \"{}\"", command.name()),
        }])
    })?;
    let artifacts = run(&cfg, Execution::default())?;
    artifacts.write(out, &cfg, &text)
}

/// In-memory result of one command.
#[derive(Debug, Clone)]
pub struct Artifacts {
    /// `(file name, table)` in write order; the first is `<command>.csv`.
    pub tables: Vec<(String, Table)>,
    pub summary: Value,
    pub notes: Vec<String>,
}

impl Artifacts {
    fn single(command: Command, table: Table, summary: Value) -> Self {
        Self {
            tables: vec![(format!("{}.csv", command.name()), table)],
            summary,
            notes: Vec::new(),
        }
    }

    pub fn manifest(&self, cfg: &RunConfig, config_text: &str) -> Value {
        let hash = Sha256::digest(config_text.as_bytes());
        let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
        json!({
            "name": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": cfg.command.name(),
            "config_sha256": hex,
            "files": self.tables.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
            "summary": self.summary,
            "notes": self.notes,
        })
    }

    pub fn write(&self, dir: &Path, cfg: &RunConfig, config_text: &str) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for (name, table) in &self.tables {
            let path = dir.join(name);
            table.write(&path).map_err(io_err(&path))?;
        }
        let path = dir.join("manifest.json");
        crate::output::write_json(&path, &self.manifest(cfg, config_text)).map_err(io_err(&path))
    }
}

/// Runs a validated configuration without touching the file system.
pub fn run(cfg: &RunConfig, exec: Execution) -> Result<Artifacts, CliError> {
    let need = |what: &str| {
        CliError::Config(vec![Violation {
            path: what.into(),
            message: "missing required field".into(),
        }])
    };
    let model = || cfg.model.ok_or_else(|| need("model"));
    let grid = || cfg.grid.ok_or_else(|| need("grid"));
    let pot = || cfg.potential.as_ref().ok_or_else(|| need("potential"));
    match &cfg.params {
        CommandParams::Spectrum { count } => {
            let (m, g, p) = (model()?, grid()?, pot()?);
            run_spectrum(&m, &g, p, *count, exec)
        }
        CommandParams::Density { states, a_values } => {
            let (m, g, p) = (model()?, grid()?, pot()?);
            run_density(&m, &g, p, states, a_values, exec)
        }
        CommandParams::Evolve {
            packet,
            dt,
            steps,
            stride,
            margin,
        } => {
            let (m, g, p) = (model()?, grid()?, pot()?);
            let psi0 = normalize(&gaussian_packet(g, packet.x0, packet.sigma, packet.k0), &m)?;
            let traj = dynamics::evolve_strided(&psi0, p, &m, *dt, *steps, *stride)?;
            let res = match margin {
                Some(w) => dynamics::continuity_residuals_masked(&traj, *w, exec)?,
                None => dynamics::continuity_residuals(&traj)?,
            };
            Ok(evolve_artifacts(&traj, &res))
        }
        CommandParams::Scatter { energies, incidence } => {
            let (m, p) = (model()?, pot()?);
            run_scatter(&m, p, energies, *incidence, exec)
        }
        CommandParams::Wkb {
            energy,
            reference,
            threshold,
        } => {
            let (m, g, p) = (model()?, grid()?, pot()?);
            let sol = WkbSolution::solve(*energy, p, &g, &m, *reference, *threshold)?;
            let zones: Vec<Value> = sol
                .danger_zones
                .iter()
                .map(|(a, b)| json!([json_float(*a), json_float(*b)]))
                .collect();
            let max_validity = sol.validity.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
            let summary = json!({
                "energy": json_float(*energy),
                "threshold": json_float(*threshold),
                "danger_zones": zones,
                "max_finite_validity": json_float(max_validity),
            });
            Ok(Artifacts::single(Command::Wkb, sol.table(), summary))
        }
        CommandParams::Dispersion { ks } => {
            let m = model()?;
            run_dispersion(&m, ks, exec)
        }
        CommandParams::Klein {
            energy,
            mass,
            v0,
            branches,
        } => run_klein(*energy, *mass, v0, branches, exec),
        CommandParams::DiracCompare { mass, ks } => run_dirac_compare(*mass, ks),
    }
}

/// Closed-form levels when the potential has one: the oscillator on the
/// standard and gradient variants, the flat well on any variant.
fn analytic_levels(params: &ModelParams, grid: &Grid1D, pot: &Potential, count: usize) -> Option<SpectrumAnalytic> {
    match pot {
        Potential::Harmonic { spring, .. } if params.variant() != Variant::Gauge => {
            Some(SpectrumAnalytic::oscillator(count, params.m(), *spring, params.a()))
        }
        Potential::Constant(v) if *v == 0.0 => Some(SpectrumAnalytic::well(count, params.m(), grid.length(), params.a())),
        _ => None,
    }
}

fn run_spectrum(params: &ModelParams, grid: &Grid1D, pot: &Potential, count: usize, exec: Execution) -> Result<Artifacts, CliError> {
    let ops = build_operators(pot, grid, params)?;
    let res = eigen::solve_spectrum_with(&ops, count, exec)?;
    let closed = analytic_levels(params, grid, pot, count);
    let exact = closed.as_ref().map(|s| s.energies());
    // quantum numbers start at 1 for the well, 0 otherwise
    let mut table = Table::new(["n", "E_analytic", "E_numeric", "abs_diff"]);
    for (i, e) in res.energies.iter().enumerate() {
        let (n, ea) = closed.as_ref().map_or((i, f64::NAN), |c| c.levels[i]);
        table.push(vec![n.into(), ea.into(), (*e).into(), (e - ea).abs().into()]);
    }
    let flags: Vec<Value> = res
        .diagnostics
        .flags
        .iter()
        .map(|f| json!({"index": f.index, "energy": json_float(f.energy), "kind": format!("{:?}", f.kind)}))
        .collect();
    let summary = json!({
        "eigenvalues": floats(&res.energies),
        "residuals": floats(&res.residuals),
        "bound": res.diagnostics.bound.map_or(Value::Null, json_float),
        "bound_flags": flags,
        "analytic": exact.as_deref().map_or(Value::Null, floats),
    });
    let mut art = Artifacts::single(Command::Spectrum, table, summary);
    if exact.is_none() {
        art.notes.push("no closed form for this potential and variant; E_analytic is nan".into());
    }
    Ok(art)
}

fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| json_float(*x)).collect())
}

fn a_label(a: f64) -> String {
    format!("{a}")
}

fn run_density(
    base: &ModelParams,
    grid: &Grid1D,
    pot: &Potential,
    states: &[usize],
    a_values: &[f64],
    exec: Execution,
) -> Result<Artifacts, CliError> {
    let count = states.iter().max().map_or(0, |s| s + 1);
    let runs: Vec<Result<(ModelParams, EigenResult), Error>> = par::map(exec, a_values, |&a| {
        let params = base.with_a(a)?;
        let ops = build_operators(pot, grid, &params)?;
        Ok((params, eigen::solve_spectrum_with(&ops, count, Execution::Sequential)?))
    });
    let runs: Vec<(ModelParams, EigenResult)> = runs.into_iter().collect::<Result<_, _>>()?;

    let mut header = vec!["x".to_string()];
    let mut columns = Vec::new();
    let mut stats = Map::new();
    for &s in states {
        for (params, res) in &runs {
            let rho = eigen::stationary_density(res, s, params)?;
            let name = format!("rho_n{s}_a{}", a_label(params.a()));
            let psi: Vec<f64> = res.states[s].values().iter().map(|z| z.re).collect();
            let node_min = node_minimum(&psi, &rho);
            stats.insert(
                name.clone(),
                json!({
                    "state": s,
                    "a": json_float(params.a()),
                    "energy": json_float(res.energies[s]),
                    "integral": json_float(integrate(&rho, grid)),
                    "nodes": node_min.0,
                    "min_rho_at_nodes": node_min.1.map_or(Value::Null, json_float),
                    "max_rho": json_float(rho.iter().copied().fold(0.0, f64::max)),
                }),
            );
            header.push(name);
            columns.push(rho);
        }
    }
    let mut table = Table::new(header);
    for i in 0..grid.n() {
        let mut row: Vec<Cell> = vec![grid.x(i).into()];
        row.extend(columns.iter().map(|c| Cell::Float(c[i])));
        table.push(row);
    }
    let mut art = Artifacts::single(Command::Density, table, Value::Object(stats));
    art.notes.push("each density column is normalized so that the trapezoid integral of rho is 1".into());
    art.notes.push(format!("variant: {}", base.variant().name()));
    Ok(art)
}

/// Interior sign changes of `psi` and the smallest `rho` on the two samples
/// bracketing each of them. Crossings in underflowing tails, where `|psi|`
/// is below `1e-6` of its peak, are not counted.
fn node_minimum(psi: &[f64], rho: &[f64]) -> (usize, Option<f64>) {
    let floor = 1e-6 * psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut count = 0;
    let mut min: Option<f64> = None;
    for i in 1..psi.len().saturating_sub(2) {
        let crosses = psi[i] * psi[i + 1] < 0.0 || (psi[i] == 0.0 && psi[i - 1] * psi[i + 1] < 0.0);
        if crosses && psi[i - 1].abs().max(psi[i + 2].abs()) > floor {
            count += 1;
            let r = rho[i].min(rho[i + 1]);
            min = Some(min.map_or(r, |m: f64| m.min(r)));
        }
    }
    (count, min)
}

fn evolve_artifacts(traj: &dynamics::Trajectory, res: &dynamics::Residuals) -> Artifacts {
    let mut table = Table::new(["frame", "t", "x", "re", "im", "rho"]);
    let grid = traj.grid();
    for (k, f) in traj.frames.iter().enumerate() {
        let rho = crate::norm::presence_density(f, &traj.params);
        for (i, z) in f.values().iter().enumerate() {
            table.push(vec![k.into(), traj.time(k).into(), grid.x(i).into(), z.re.into(), z.im.into(), rho[i].into()]);
        }
    }
    let norms = traj.norms();
    let l2 = traj.l2_norms();
    let times: Vec<f64> = (0..traj.frames.len()).map(|k| traj.time(k)).collect();
    let centroids = traj.centroids();
    let drift = norms.iter().map(|n| (n - norms[0]).abs()).fold(0.0, f64::max) / norms[0];
    let l2_change = l2.iter().map(|n| (n - l2[0]).abs()).fold(0.0, f64::max) / l2[0];
    let summary = json!({
        "frames": traj.frames.len(),
        "final_time": json_float(*times.last().unwrap_or(&0.0)),
        "norm_drift_relative": json_float(drift),
        "l2_change_relative": json_float(l2_change),
        "residual_charge": json_float(res.charge),
        "residual_energy": json_float(res.energy),
        "residual_momentum": json_float(res.momentum),
        "centroid_start": json_float(centroids[0]),
        "centroid_end": json_float(*centroids.last().unwrap_or(&centroids[0])),
        "centroid_velocity": json_float(fit::linear_slope(&times, &centroids)),
    });
    Artifacts::single(Command::Evolve, table, summary)
}

fn run_scatter(
    params: &ModelParams,
    pot: &Potential,
    energies: &[f64],
    side: scattering::Incidence,
    exec: Execution,
) -> Result<Artifacts, CliError> {
    let results = scattering::sweep(energies, pot, params, side, exec);
    let mut ok = Vec::new();
    let mut skipped = Vec::new();
    for (e, r) in energies.iter().zip(results) {
        match r {
            Ok(r) => ok.push(r),
            Err(err) => skipped.push(json!({"energy": json_float(*e), "reason": err.to_string()})),
        }
    }
    if ok.is_empty() {
        return Err(CliError::Solver(Error::InvalidArgument(
            "no sampled energy admits an incident wave".into(),
        )));
    }
    let propagating: Vec<&scattering::ScatterResult> = ok.iter().filter(|r| r.both_propagating()).collect();
    let defect = propagating
        .iter()
        .map(|r| (r.reflection + r.transmission - 1.0).abs())
        .fold(0.0, f64::max);
    let t_max = ok.iter().map(|r| r.transmission).fold(0.0, f64::max);
    let summary = json!({
        "solved": ok.len(),
        "both_leads_propagating": propagating.len(),
        "max_unitarity_defect": json_float(defect),
        "max_transmission": json_float(t_max),
        "skipped": skipped,
    });
    let mut art = Artifacts::single(Command::Scatter, scattering::sweep_table(&ok), summary);
    art.notes.push("k columns hold the complex wavenumber of each segment, left to right".into());
    Ok(art)
}

fn run_dispersion(params: &ModelParams, ks: &[f64], exec: Execution) -> Result<Artifacts, CliError> {
    let mut table = Table::new(["k", "omega", "v_phase", "v_group", "momentum"]);
    for &k in ks {
        let d = analytic::dispersion(k, params);
        table.push(vec![k.into(), d.omega.into(), d.v_phase.into(), d.v_group.into(), analytic::plane_wave_momentum(k, params).into()]);
    }
    let summary = if params.a() > 0.0 {
        let vp = analytic::phase_velocity_peak(params, exec)?;
        let vg = analytic::group_velocity_peak(params, exec)?;
        json!({
            "phase_velocity_peak": {"k": json_float(vp.k), "value": json_float(vp.value)},
            "group_velocity_peak": {"k": json_float(vg.k), "value": json_float(vg.value)},
        })
    } else {
        json!({"phase_velocity_peak": null, "group_velocity_peak": null})
    };
    Ok(Artifacts::single(Command::Dispersion, table, summary))
}

fn run_klein(e: f64, m: f64, v0: &[f64], branches: &[dirac::Branch], exec: Execution) -> Result<Artifacts, CliError> {
    let jobs: Vec<(dirac::Branch, f64)> = branches.iter().flat_map(|b| v0.iter().map(move |v| (*b, *v))).collect();
    let results = par::map(exec, &jobs, |&(b, v)| dirac::klein_step(e, v, m, b).map(|r| (v, r)));
    let rows: Vec<(f64, dirac::KleinResult)> = results.into_iter().collect::<Result<_, _>>()?;
    let mut per_branch = Map::new();
    for b in branches {
        let mine: Vec<&dirac::KleinResult> = rows.iter().filter(|(_, r)| r.branch == *b).map(|(_, r)| r).collect();
        let defect = mine.iter().map(|r| (r.reflection + r.transmission - 1.0).abs()).fold(0.0, f64::max);
        let r_max = mine.iter().map(|r| r.reflection).fold(f64::NEG_INFINITY, f64::max);
        let t_min = mine.iter().map(|r| r.transmission).fold(f64::INFINITY, f64::min);
        per_branch.insert(
            b.name().into(),
            json!({
                "max_unitarity_defect": json_float(defect),
                "max_reflection": json_float(r_max),
                "min_transmission": json_float(t_min),
            }),
        );
    }
    let summary = json!({"energy": json_float(e), "mass": json_float(m), "branches": per_branch});
    Ok(Artifacts::single(Command::Klein, dirac::klein_table(&rows), summary))
}

fn run_dirac_compare(m: f64, ks: &[f64]) -> Result<Artifacts, CliError> {
    let dens = dirac::density_comparison(ks, m);
    let spec = dirac::dirac_vs_modified_spectrum(ks, m);
    let positive: Vec<usize> = (0..ks.len()).filter(|&i| ks[i] > 0.0).collect();
    let slope = |ys: Vec<f64>| {
        if positive.len() < 2 {
            return Value::Null;
        }
        let xs: Vec<f64> = positive.iter().map(|&i| ks[i]).collect();
        json_float(fit::loglog_slope(&xs, &ys))
    };
    let summary = json!({
        "mass": json_float(m),
        "density_difference_slope": slope(positive.iter().map(|&i| dens[i].difference.abs()).collect()),
        "dispersion_relative_difference_slope": slope(positive.iter().map(|&i| spec[i].relative_difference.abs()).collect()),
    });
    let mut art = Artifacts::single(Command::DiracCompare, dirac::density_table(&dens), summary);
    art.tables.push(("dirac-compare-spectrum.csv".into(), dirac::spectrum_table(&spec)));
    art.notes.push("log-log slopes are fitted over the strictly positive wavenumbers".into());
    Ok(art)
}
