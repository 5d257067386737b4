//! Command-line front end: `certify`, `checks`, `evolve` and `particles`,
//! all driven by one TOML experiment file.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure,
//! 4 feasibility required but absent.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::config::{DirectionConfig, ExperimentConfig};
use crate::equilibrium::{fixed_point, Equilibrium, PhaseGrid};
use crate::error::{Error, Result};
use crate::infomatrix::checks::{
    check_case1_gershgorin, check_case2_general, check_case2_schur_with_threshold, check_example2_interval,
    check_example2_schur_chain, check_remark3, compute_lambda_u, CheckRecord, EigenBoundSpec, OpenInterval, Verdict,
};
use crate::infomatrix::{certify_lambda, search_directions, SpectralCertificate};
use crate::io;
use crate::kinetic::{
    check_dissipation_inequality_with_tol, check_energy_identity, fit_rate, DiagnosticsSeries, DissipationReport,
    KineticSolver, RateField, RateFit,
};
use crate::model::{DirectionPair, EigenRange, Kernel, KernelSpec, Potential, PotentialSpec};
use crate::particles::{marginal_l1, simulate, ParticleSnapshot};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

/// Absolute slack on `|dE/dt + DE_a|` for rows at the round-off floor.
pub const IDENTITY_ABS_FLOOR: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "vfplab", version, about = "Certify and test entropy-dissipation rates")]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "HYPO_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify λ on the configured grid and write the certificate.
    Certify {
        #[command(flatten)]
        common: CommonArgs,
        /// Exit with code 4 unless the certificate is feasible.
        #[arg(long)]
        require_feasible: bool,
    },
    /// Evaluate the closed-form checkers.
    Checks {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the PDE and test the dissipation statements.
    Evolve {
        #[command(flatten)]
        common: CommonArgs,
        /// Use this λ instead of the certified one.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Run the particle system and compare with the PDE.
    Particles {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    pub config: PathBuf,
    /// Output directory, overriding `outputs.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Parse and validate only.
    #[arg(long)]
    pub dry_run: bool,
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidInput(_) | Error::SingularMetric { .. } | Error::EmptyGrid(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        // a global pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load(common: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(out) = &common.out {
        cfg.outputs.dir = out.clone();
    }
    Ok(cfg)
}

fn dispatch(cmd: &Command) -> Result<i32> {
    let common = match cmd {
        Command::Certify { common, .. }
        | Command::Checks { common }
        | Command::Evolve { common, .. }
        | Command::Particles { common } => common,
    };
    let cfg = load(common)?;
    if common.dry_run {
        println!("config ok: {}", common.config.display());
        return Ok(EXIT_OK);
    }
    match cmd {
        Command::Certify { require_feasible, .. } => {
            let report = cmd_certify(&cfg)?;
            print!("{}", report.summary());
            Ok(if *require_feasible && !report.certificate.feasible {
                EXIT_INFEASIBLE
            } else {
                EXIT_OK
            })
        }
        Command::Checks { .. } => {
            let report = cmd_checks(&cfg)?;
            print!("{}", report.summary());
            Ok(EXIT_OK)
        }
        Command::Evolve { lambda, .. } => {
            let report = cmd_evolve(&cfg, *lambda)?;
            print!("{}", report.summary());
            Ok(EXIT_OK)
        }
        Command::Particles { .. } => {
            let report = cmd_particles(&cfg)?;
            print!("{}", report.summary());
            Ok(EXIT_OK)
        }
    }
}

/// Hessian bounds after applying config overrides to the model declarations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResolvedBounds {
    pub wxx: Option<EigenRange>,
    pub wxy: Option<EigenRange>,
    pub u: Option<EigenRange>,
}

impl ResolvedBounds {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        let kb = cfg.model.kernel.declared_bounds();
        let o = cfg.checks.bounds;
        Self {
            wxx: o.wxx.or(kb.map(|b| b.hess_xx)),
            wxy: o.wxy.or(kb.map(|b| b.hess_xy)),
            u: o.u.or(cfg.model.potential.declared_bounds()),
        }
    }

    /// Range of `∇²_xx V = ∇²_xx W + ∇²U`.
    pub fn v(&self) -> Option<EigenRange> {
        Some(self.wxx?.add(&self.u?))
    }
}

const NOT_DECLARED: &str = "skipped: bounds not declared";

/// Every applicable closed-form checker at `dir`.
pub fn run_checks(cfg: &ExperimentConfig, dir: DirectionPair) -> Vec<CheckRecord> {
    let b = ResolvedBounds::from_config(cfg);
    let singular = (dir.z1 == 0.0).then_some("metric singular: z1 = 0");
    let mut rows = Vec::new();

    rows.push(match (b.v(), b.wxy) {
        (Some(v), Some(wxy)) => {
            let spec = EigenBoundSpec {
                wxx_range: v,
                wxy_range: wxy,
                u_range: b.u,
            };
            let r = check_case1_gershgorin(&dir, &spec);
            let rec = CheckRecord::new("case1_gershgorin", r.feasible, r);
            match singular {
                Some(n) => rec.with_note(n),
                None => rec,
            }
        }
        _ => CheckRecord::skipped("case1_gershgorin", NOT_DECLARED),
    });

    rows.push(match (b.v(), b.wxy) {
        (Some(v), Some(wxy)) if wxy == EigenRange::point(0.0) => {
            let threshold = cfg.checks.threshold.unwrap_or(1.0 - cfg.checks.delta);
            let r = check_case2_schur_with_threshold(dir.z2, v.lo, v.hi, cfg.checks.delta, threshold);
            let rec = CheckRecord::new("case2_schur", r.feasible, r);
            if dir.z1 != 1.0 {
                rec.with_note("closed form fixes z1 = 1; see case2_general for the configured z1")
            } else {
                rec
            }
        }
        (Some(_), Some(_)) => CheckRecord::skipped("case2_schur", "skipped: needs a vanishing mixed Hessian"),
        _ => CheckRecord::skipped("case2_schur", NOT_DECLARED),
    });

    rows.push(match (b.v(), b.wxy) {
        (Some(v), Some(wxy)) if wxy == EigenRange::point(0.0) => {
            let r = check_case2_general(&dir, v.lo, v.hi);
            CheckRecord::new("case2_general", r.feasible, r)
        }
        (Some(_), Some(_)) => CheckRecord::skipped("case2_general", "skipped: needs a vanishing mixed Hessian"),
        _ => CheckRecord::skipped("case2_general", NOT_DECLARED),
    });

    let lambda_u = b.u.map(|u| compute_lambda_u(&dir, u.lo, u.hi));
    rows.push(match (lambda_u, b.u) {
        (Some(l), Some(u)) => CheckRecord::new(
            "lambda_u",
            l > 0.0,
            serde_json::json!({ "lambda_u": l, "u_lo": u.lo, "u_hi": u.hi }),
        ),
        _ => CheckRecord::skipped("lambda_u", NOT_DECLARED),
    });

    rows.push(match (lambda_u, b.wxx) {
        (Some(l), Some(wxx)) if dir.z1 != 0.0 => {
            let iv = check_example2_interval(&dir, l);
            let inside = l > 0.0 && iv.contains(wxx.lo) && iv.contains(wxx.hi);
            CheckRecord::new("example2_interval", inside, IntervalDetail { lambda_u: l, interval: iv, wxx })
        }
        (Some(_), Some(_)) => CheckRecord::skipped("example2_interval", "skipped: metric singular: z1 = 0"),
        _ => CheckRecord::skipped("example2_interval", NOT_DECLARED),
    });

    rows.push(match (lambda_u, b.wxx, b.wxy) {
        (Some(l), Some(wxx), Some(wxy)) => {
            let ends = [
                check_example2_schur_chain(&dir, l, wxx.lo, wxy.max_abs()),
                check_example2_schur_chain(&dir, l, wxx.hi, wxy.max_abs()),
            ];
            let ok = l > 0.0 && ends.iter().all(|r| r.feasible);
            CheckRecord::new("example2_schur_chain", ok, ends)
        }
        _ => CheckRecord::skipped("example2_schur_chain", NOT_DECLARED),
    });

    rows.push(match (&cfg.model.kernel, &cfg.model.potential, b.wxx) {
        (KernelSpec::Difference { .. }, PotentialSpec::Zero, Some(wxx)) => {
            let ends = [check_remark3(&dir, wxx.lo), check_remark3(&dir, wxx.hi)];
            let bound = ends[0].bound.min(ends[1].bound);
            CheckRecord::new(
                "remark3",
                bound > 0.0,
                serde_json::json!({ "bound": bound, "endpoints": ends }),
            )
        }
        _ => CheckRecord::skipped("remark3", "skipped: applies to difference kernels with U = 0"),
    });
    rows
}

#[derive(Debug, Clone, Copy, Serialize)]
struct IntervalDetail {
    lambda_u: f64,
    interval: OpenInterval,
    wxx: EigenRange,
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Feasible => "feasible",
        Verdict::Infeasible => "infeasible",
        Verdict::Skipped => "skipped",
    }
}

fn table(rows: &[CheckRecord]) -> String {
    let mut s = String::new();
    for r in rows {
        s += &format!("  {:<22} {:<10}", r.check, verdict_str(r.verdict));
        if let Some(n) = &r.note {
            s += &format!(" ({n})");
        }
        s.push('\n');
    }
    s
}

fn lambda_u_line(rows: &[CheckRecord]) -> Option<String> {
    let iv = rows.iter().find(|r| r.check == "example2_interval" && r.verdict != Verdict::Skipped)?;
    let l = iv.detail["lambda_u"].as_f64()?;
    let lo = iv.detail["interval"]["lo"].as_f64()?;
    let hi = iv.detail["interval"]["hi"].as_f64()?;
    Some(format!("lambda_U = {l:.4}, admissible wxx interval ({lo:.4}, {hi:.4})\n"))
}

/// Direction search summary stored next to a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub candidates: usize,
    pub best_lambda: f64,
    pub max_lambda_over_grid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub certificate: SpectralCertificate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSummary>,
}

impl CertifyReport {
    pub fn summary(&self) -> String {
        let c = &self.certificate;
        let mut s = format!(
            "lambda = {:.6e} at z = ({}, {}), argmin {:?}: {}\n",
            c.lambda,
            c.z1,
            c.z2,
            c.argmin,
            if c.feasible { "feasible" } else { "infeasible" }
        );
        if let Some(sr) = &self.search {
            s += &format!("searched {} directions\n", sr.candidates);
        }
        s += &lambda_u_line(&c.checks).unwrap_or_default();
        s += &table(&c.checks);
        s
    }
}

/// Certificate for the configured direction, or the best one of the search.
pub fn certify(cfg: &ExperimentConfig) -> Result<CertifyReport> {
    let xy = cfg.xy_grid()?;
    let (mut certificate, search) = match &cfg.direction {
        DirectionConfig::Fixed { z1, z2 } => {
            let cert = certify_lambda(&cfg.model.kernel, &cfg.model.potential, DirectionPair::new(*z1, *z2), &xy)?;
            (cert, None)
        }
        DirectionConfig::Search { search } => {
            let res = search_directions(&cfg.model.kernel, &cfg.model.potential, search, &xy)?;
            let max = res.evaluated.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
            let summary = SearchSummary {
                candidates: res.evaluated.len(),
                best_lambda: res.certificate.lambda,
                max_lambda_over_grid: max,
            };
            (res.certificate, Some(summary))
        }
    };
    certificate.checks = run_checks(cfg, certificate.dir());
    Ok(CertifyReport { certificate, search })
}

pub fn cmd_certify(cfg: &ExperimentConfig) -> Result<CertifyReport> {
    let report = certify(cfg)?;
    if cfg.outputs.json {
        io::write_json(&cfg.outputs.dir.join("certificate.json"), &report.certificate)?;
        if let Some(s) = &report.search {
            io::write_json(&cfg.outputs.dir.join("search.json"), s)?;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChecksReport {
    pub z1: f64,
    pub z2: f64,
    pub bounds: ResolvedBounds,
    pub rows: Vec<CheckRecord>,
}

impl ChecksReport {
    pub fn summary(&self) -> String {
        let mut s = format!("checks at z = ({}, {})\n", self.z1, self.z2);
        s += &lambda_u_line(&self.rows).unwrap_or_default();
        s += &table(&self.rows);
        s
    }

    pub fn row(&self, name: &str) -> Option<&CheckRecord> {
        self.rows.iter().find(|r| r.check == name)
    }
}

pub fn cmd_checks(cfg: &ExperimentConfig) -> Result<ChecksReport> {
    let dir = match cfg.fixed_direction() {
        Some(d) => d,
        None => certify(cfg)?.certificate.dir(),
    };
    let report = ChecksReport {
        z1: dir.z1,
        z2: dir.z2,
        bounds: ResolvedBounds::from_config(cfg),
        rows: run_checks(cfg, dir),
    };
    if cfg.outputs.json {
        io::write_json(&cfg.outputs.dir.join("checks.json"), &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// The relative defect of `check_energy_identity`.
    pub max_relative_defect: f64,
    pub max_abs_residual: f64,
    pub tol: f64,
    /// Every row has `|dE/dt + DE_a| ≤ tol · DE_a + 1e−9`.
    pub holds: bool,
}

pub fn energy_identity_report(series: &DiagnosticsSeries, tol: f64) -> Result<IdentityReport> {
    let rel = check_energy_identity(series)?;
    let mut max_abs: f64 = 0.0;
    let mut holds = true;
    for w in series.rows.windows(3) {
        let res = ((w[2].energy - w[0].energy) / (w[2].t - w[0].t) + w[1].de_a).abs();
        max_abs = max_abs.max(res);
        holds &= res <= tol * w[1].de_a + IDENTITY_ABS_FLOOR;
    }
    Ok(IdentityReport {
        max_relative_defect: rel,
        max_abs_residual: max_abs,
        tol,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    #[serde(rename = "E_gap")]
    pub energy_gap: Option<RateFit>,
    #[serde(rename = "DE_az")]
    pub de_az: Option<RateFit>,
    #[serde(rename = "L1")]
    pub l1: Option<RateFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveReport {
    pub lambda: f64,
    /// `certified` or `override`.
    pub lambda_source: String,
    pub z1: f64,
    pub z2: f64,
    pub fit_window: [f64; 2],
    pub fits: Fits,
    pub energy_identity: IdentityReport,
    pub dissipation: DissipationReport,
    pub energy_increase: bool,
    pub max_mass_drift: f64,
    pub min_f: f64,
    pub equilibrium_residual: f64,
    pub rows: usize,
}

impl EvolveReport {
    pub fn summary(&self) -> String {
        let rate = |f: &Option<RateFit>| f.map_or("n/a".to_string(), |r| format!("{:.4}", r.rate));
        format!(
            "lambda = {:.6} ({}), z = ({}, {})\n\
             energy identity: max defect {:.3e} -> {}\n\
             dissipation bound with tol {}: {:?}\n\
             fitted rates on [{}, {}]: E_gap {}, DE_az {}, L1 {}\n\
             energy increase: {}, max mass drift {:.2e}, min f {:.2e}\n",
            self.lambda,
            self.lambda_source,
            self.z1,
            self.z2,
            self.energy_identity.max_relative_defect,
            if self.energy_identity.holds { "holds" } else { "fails" },
            self.dissipation.tol,
            self.dissipation.verdict,
            self.fit_window[0],
            self.fit_window[1],
            rate(&self.fits.energy_gap),
            rate(&self.fits.de_az),
            rate(&self.fits.l1),
            self.energy_increase,
            self.max_mass_drift,
            self.min_f,
        )
    }
}

fn pde_setup(cfg: &ExperimentConfig) -> Result<(PhaseGrid, Equilibrium)> {
    let pde = cfg
        .pde
        .as_ref()
        .ok_or_else(|| Error::Config("this subcommand needs a [pde] section".into()))?;
    let grid = PhaseGrid::from_spec(cfg.model.domain, &pde.grid)?;
    let eq = fixed_point(&cfg.model.kernel, &cfg.model.potential, &grid, &cfg.equilibrium)?;
    Ok((grid, eq))
}

pub fn cmd_evolve(cfg: &ExperimentConfig, lambda_override: Option<f64>) -> Result<EvolveReport> {
    let (grid, eq) = pde_setup(cfg)?;
    let mut solver_cfg = cfg.pde.clone().expect("checked by pde_setup");
    let (lambda, source, dir) = match lambda_override {
        Some(l) => (l, "override", cfg.fixed_direction().unwrap_or(solver_cfg.dir)),
        None => {
            let c = certify(cfg)?.certificate;
            (c.lambda, "certified", c.dir())
        }
    };
    solver_cfg.dir = dir;
    let solver = KineticSolver::new(&solver_cfg, grid, &cfg.model.kernel, &cfg.model.potential)?;
    let out = solver.run(&eq)?;
    let series = &out.series;
    let window = cfg
        .analysis
        .fit_window
        .unwrap_or([0.2 * solver_cfg.t_end, solver_cfg.t_end]);
    let w = (window[0], window[1]);
    let report = EvolveReport {
        lambda,
        lambda_source: source.to_string(),
        z1: dir.z1,
        z2: dir.z2,
        fit_window: window,
        fits: Fits {
            energy_gap: fit_rate(series, RateField::EnergyGap, w).ok(),
            de_az: fit_rate(series, RateField::DeAz, w).ok(),
            l1: fit_rate(series, RateField::L1, w).ok(),
        },
        energy_identity: energy_identity_report(series, cfg.analysis.identity_tol)?,
        dissipation: check_dissipation_inequality_with_tol(series, lambda, cfg.analysis.dissipation_tol),
        energy_increase: series.energy_increase,
        max_mass_drift: series.max_mass_drift,
        min_f: series.min_f(),
        equilibrium_residual: eq.residual,
        rows: series.rows.len(),
    };
    let dir_out = &cfg.outputs.dir;
    if cfg.outputs.csv {
        io::write_diagnostics_csv(&dir_out.join("diagnostics.csv"), series)?;
        io::write_equilibrium(dir_out, "equilibrium", &eq)?;
        for (t, f) in &out.snapshots {
            io::write_density_csv(&dir_out.join(format!("density_t{t}.csv")), f)?;
        }
    }
    if cfg.outputs.json {
        io::write_json(&dir_out.join("evolve.json"), &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotComparison {
    pub t: f64,
    /// `∫ |ρ_particles − ρ_pde| dx` on the grid bins.
    pub l1_to_pde: f64,
    pub v_mean: f64,
    pub v_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticlesReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub dt: f64,
    pub seed: u64,
    pub snapshots: Vec<SnapshotComparison>,
}

impl ParticlesReport {
    pub fn summary(&self) -> String {
        let mut s = format!("N = {}, dt = {}, seed = {}\n", self.n, self.dt, self.seed);
        for c in &self.snapshots {
            s += &format!(
                "  t = {:<8} L1 to PDE {:.4}  v mean {:+.4}  v var {:.4}\n",
                c.t, c.l1_to_pde, c.v_mean, c.v_variance
            );
        }
        s
    }
}

/// Particle histograms against PDE marginals at matching times.
pub fn compare_with_pde(
    cfg: &ExperimentConfig,
    kernel: &dyn Kernel,
    potential: &dyn Potential,
) -> Result<(Vec<ParticleSnapshot>, Vec<Vec<f64>>, PhaseGrid)> {
    let (grid, eq) = pde_setup(cfg)?;
    let pcfg = cfg
        .particles
        .as_ref()
        .ok_or_else(|| Error::Config("particles needs a [particles] section".into()))?;
    let mut scfg = cfg.pde.clone().expect("checked by pde_setup");
    let mut times = pcfg.snapshot_times.clone();
    times.push(pcfg.t_end);
    scfg.t_end = pcfg.t_end;
    scfg.snapshot_times = times;
    let solver = KineticSolver::new(&scfg, grid.clone(), kernel, potential)?;
    let f0 = solver.initial_state(&eq)?;
    let pde = solver.run_from(f0.clone(), &eq)?;
    let run = simulate(pcfg, &f0, kernel, potential)?;
    let rhos = run
        .snapshots
        .iter()
        .map(|s| {
            pde.snapshots
                .iter()
                .find(|(t, _)| (t - s.t).abs() <= 0.5 * pcfg.dt.max(scfg.dt))
                .map(|(_, f)| f.x_marginal())
                .ok_or_else(|| Error::Config(format!("no PDE snapshot near t = {}", s.t)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((run.snapshots, rhos, grid))
}

pub fn cmd_particles(cfg: &ExperimentConfig) -> Result<ParticlesReport> {
    let (snaps, rhos, grid) = compare_with_pde(cfg, &cfg.model.kernel, &cfg.model.potential)?;
    let pcfg = cfg.particles.as_ref().expect("checked by compare_with_pde");
    let dir = &cfg.outputs.dir;
    let mut rows = Vec::new();
    for (s, rho) in snaps.iter().zip(&rhos) {
        rows.push(SnapshotComparison {
            t: s.t,
            l1_to_pde: marginal_l1(&s.x_marginal, rho, grid.hx()),
            v_mean: s.v_mean,
            v_variance: s.v_variance,
        });
        if cfg.outputs.csv {
            write_snapshot(dir, s, rho, &grid)?;
        }
    }
    let report = ParticlesReport {
        n: pcfg.n,
        dt: pcfg.dt,
        seed: pcfg.seed,
        snapshots: rows,
    };
    if cfg.outputs.json {
        io::write_json(&dir.join("particles.json"), &report)?;
    }
    Ok(report)
}

fn write_snapshot(dir: &Path, s: &ParticleSnapshot, rho: &[f64], grid: &PhaseGrid) -> Result<()> {
    io::write_profile_csv(&dir.join(format!("particles_x_t{}.csv", s.t)), "density", grid.x(), &s.x_marginal)?;
    io::write_profile_csv(&dir.join(format!("pde_x_t{}.csv", s.t)), "density", grid.x(), rho)?;
    io::write_density_csv(&dir.join(format!("particles_phase_t{}.csv", s.t)), &s.phase)
}
