//! `fracrel`: command-line driver for `fracrel-core`.
//!
//! Every subcommand prints one JSON document `{command, config, report}` on
//! stdout. Subcommands that produce fields or tables also write them under
//! `output.dir`. Exit codes: 0 success, 2 configuration error, 3 tolerance
//! breach, 4 non-convergence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fracrel_core::bessel_profile::kernel::kernel_fourier_1d;
use fracrel_core::bessel_profile::{
    bessel_potential, compute_profile, kernel_value, ode_residual, profile_energy, profile_weighted_mass, KernelSpec,
    ProfileConstants, DEFAULT_MESH_DENSITY, DEFAULT_Y_CUT,
};
use fracrel_core::config::{OutputFormat, RunConfig};
use fracrel_core::extension_solver::{
    extend, extension_pohozaev_residual, neumann_trace, trace_extrapolation_error, weighted_energy, weighted_mass,
    YMesh,
};
use fracrel_core::field_io::{load_field, save_field, save_frlf, write_rows_csv, write_tidy_csv};
use fracrel_core::samples::{random_band_limited, random_bumps};
use fracrel_core::spectral_core::{apply_multiplier, hs_norm_sq, low_order_mass, lp_norm, Field};
use fracrel_core::symmetry_tools::{
    fixed_point_iterate, radial_monotonicity_check, reflection_residual, write_shell_csv, HalfSpace, ReflectionSpec,
};
use fracrel_core::variational::{
    box_convergence_study, energy, energy_gap, geometric_t_list, ground_state_solve, nehari_defect, nehari_pohozaev_j,
    nehari_rescale, nonexistence_certificate, pohozaev_p, seed_field, sobolev_quotient_scan, Nonlinearity,
};
use fracrel_core::verify::verify_all;
use fracrel_core::{FracError, Result};

#[derive(Parser)]
#[command(name = "fracrel", version, about = "Numerics for (-Δ+m²)^s u = f(u) on periodic grids")]
struct Cli {
    /// Also write tidy CSV tables for external plotting under output.dir.
    #[arg(long, global = true)]
    plot_data: bool,
    #[command(subcommand)]
    command: Command,
}

/// Configuration file plus per-key overrides.
#[derive(Args, Clone, Default)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fractional order (operator.s).
    #[arg(long)]
    s: Option<f64>,
    /// Mass (operator.m).
    #[arg(long)]
    m: Option<f64>,
    /// Dimension (operator.N).
    #[arg(long = "N")]
    dim: Option<usize>,
    /// Box length (grid.L).
    #[arg(long = "L")]
    length: Option<f64>,
    /// Points per axis (grid.n).
    #[arg(long)]
    n: Option<usize>,
    /// Random seed (solver.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Artifact directory (output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Below,
    Above,
}

#[derive(Subcommand)]
enum Command {
    /// k_s, c₁, c₂ and the profile identities for one order s.
    Constants {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate Φ_s: CSV (y, phi, dphi) plus a JSON sidecar.
    Profile {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_Y_CUT)]
        y_cut: f64,
        #[arg(long, default_value_t = DEFAULT_MESH_DENSITY)]
        density: f64,
    },
    /// Apply (m²-Δ)^σ to a field file.
    Apply {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        sigma: f64,
        /// Output field (`.csv` or FRLF).
        #[arg(long)]
        output: PathBuf,
    },
    /// Kernel transform, Bessel-potential semigroup and L² bound.
    KernelCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Extension energy, mass and Neumann trace on a field or on random fields.
    ExtendCheck {
        #[command(flatten)]
        common: Common,
        /// Check this field instead of random band-limited ones.
        #[arg(long)]
        field: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        fields: usize,
        #[arg(long, default_value_t = 4)]
        band: usize,
    },
    /// Energy, Nehari, J and Pohozaev terms of a field.
    Pohozaev {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: PathBuf,
    },
    /// Ground state by projected descent on the Nehari–Pohozaev manifold.
    Groundstate {
        #[command(flatten)]
        common: Common,
        /// Use the model nonlinearity c t³/(1+t²) with this c.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Non-existence certificate for pure powers on Nehari-rescaled fields.
    Nonexist {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = vec![3.0, 4.0])]
        p: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        fields: usize,
    },
    /// Sobolev quotient of concentrating bubbles and the excess Λ - S.
    SobolevScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 4.0)]
        t_min: f64,
        #[arg(long, default_value_t = 32.0)]
        t_max: f64,
        #[arg(long, default_value_t = 7)]
        steps: usize,
        /// Box lengths for a convergence study at the configured spacing.
        #[arg(long, value_delimiter = ',')]
        box_lengths: Vec<f64>,
    },
    /// Fixed-point iteration u = I_s f(u) from a seeded bump.
    Fixpoint {
        #[command(flatten)]
        common: Common,
    },
    /// Reflection identity and radial diagnostics of a field.
    Symmetry {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        axis: usize,
        #[arg(long, value_enum, default_value_t = Side::Below)]
        side: Side,
    },
    /// The full identity suite; exits 3 on any breach.
    VerifyAll {
        #[command(flatten)]
        common: Common,
        /// Divide every tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tighten: f64,
    },
}

/// Report plus an optional failure that decides the exit code.
struct Outcome {
    report: Value,
    failure: Option<FracError>,
}

impl From<Value> for Outcome {
    fn from(report: Value) -> Self {
        Outcome { report, failure: None }
    }
}

fn resolve(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = common.s {
        cfg.operator.s = v;
    }
    if let Some(v) = common.m {
        cfg.operator.m = v;
    }
    if let Some(v) = common.dim {
        cfg.operator.dim = v;
    }
    if let Some(v) = common.length {
        cfg.grid.length = v;
    }
    if let Some(v) = common.n {
        cfg.grid.n = v;
    }
    if let Some(v) = common.seed {
        cfg.solver.seed = v;
    }
    if let Some(v) = &common.out {
        cfg.output.dir = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Loads a field and aligns the operator and grid blocks with it.
fn load_into(cfg: &mut RunConfig, path: &Path) -> Result<Field> {
    let field = load_field(path, Some(cfg.grid.length))?;
    cfg.operator.dim = field.grid().dim();
    cfg.grid.n = field.grid().n();
    cfg.grid.length = field.grid().length();
    cfg.validate()?;
    Ok(field)
}

fn artifact_dir(cfg: &RunConfig) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.output.dir)?;
    Ok(cfg.output.dir.clone())
}

fn write_json(path: &Path, doc: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| FracError::Format(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| FracError::Format(e.to_string()))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Residual rows `{identity, measured, tolerance, passed}` and the first breach.
#[derive(Default)]
struct Checks {
    rows: Vec<Value>,
    failure: Option<FracError>,
}

impl Checks {
    fn push(&mut self, identity: &str, measured: f64, tolerance: f64) {
        let passed = measured <= tolerance;
        if !passed && self.failure.is_none() {
            self.failure = Some(FracError::Tolerance { check: identity.to_string(), measured, tolerance });
        }
        self.rows.push(json!({"identity": identity, "measured": measured, "tolerance": tolerance, "passed": passed}));
    }
}

fn constants(cfg: &RunConfig) -> Result<Outcome> {
    let s = cfg.operator.s;
    let pc = ProfileConstants::new(s)?;
    let table = compute_profile(s, DEFAULT_Y_CUT, DEFAULT_MESH_DENSITY)?;
    let k_phi = profile_energy(&table);
    let mass = profile_weighted_mass(&table);
    let mut checks = Checks::default();
    checks.push("2s·c1 = k_s", rel(2.0 * s * pc.c1, pc.k_s), 1e-13);
    checks.push("K(Phi_s) = k_s", rel(k_phi, pc.k_s), 1e-5);
    checks.push("int Phi_s^2 t^(1-2s) dt = s k_s", rel(mass, s * pc.k_s), 1e-5);
    if s == 0.5 {
        checks.push("k_1/2 = 1", (pc.k_s - 1.0).abs(), 1e-8);
        let mut worst: f64 = 0.0;
        for i in 0..=300 {
            let y = 0.1 * i as f64;
            worst = worst.max((table.eval(y)?.0 - (-y).exp()).abs());
        }
        checks.push("Phi_1/2 = e^-y on [0, 30]", worst, 1e-8);
    }
    Ok(Outcome {
        report: json!({
            "constants": to_value(&pc)?,
            "profile_energy": k_phi,
            "profile_weighted_mass": mass,
            "residuals": checks.rows,
        }),
        failure: checks.failure,
    })
}

#[derive(serde::Serialize)]
struct ProfileRow {
    y: f64,
    phi: f64,
    dphi: f64,
}

fn profile(cfg: &RunConfig, y_cut: f64, density: f64) -> Result<Outcome> {
    let s = cfg.operator.s;
    let table = compute_profile(s, y_cut, density)?;
    let ode = ode_residual(&table, 1e-2);
    let sidecar = json!({
        "s": s,
        "tail_amplitude": table.tail_amplitude,
        "y_cut": table.y_cut,
        "nodes": table.mesh.len(),
        "k_s": table.k_s(),
        "ode_residual": to_value(&ode)?,
        "profile_energy": profile_energy(&table),
        "profile_weighted_mass": profile_weighted_mass(&table),
    });
    let dir = artifact_dir(cfg)?;
    let rows: Vec<ProfileRow> = (0..table.mesh.len())
        .map(|i| ProfileRow { y: table.mesh[i], phi: table.phi[i], dphi: table.dphi[i] })
        .collect();
    write_rows_csv(&rows, fs::File::create(dir.join("profile.csv"))?)?;
    Ok(sidecar.into())
}

fn apply(cfg: &mut RunConfig, path: &Path, sigma: f64, output: &Path) -> Result<Outcome> {
    let u = load_into(cfg, path)?;
    let params = cfg.params()?;
    let v = apply_multiplier(&u, &params, sigma)?;
    save_field(&v, output)?;
    Ok(json!({
        "input": path.display().to_string(),
        "output": output.display().to_string(),
        "sigma": sigma,
        "l2_in": lp_norm(&u, 2.0)?,
        "l2_out": lp_norm(&v, 2.0)?,
    })
    .into())
}

fn kernel_check(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.params()?;
    let s = params.s;
    let spec = KernelSpec::new(&params);
    let mut checks = Checks::default();
    let line = fracrel_core::OperatorParams::new(1, s, params.m)?;
    let mut transform = Vec::new();
    let mut worst: f64 = 0.0;
    for xi in [0.0, 0.1, 0.3, 0.7, 1.5] {
        let got = kernel_fourier_1d(xi, &line)?;
        let want = line.symbol(xi * xi).powf(-s);
        worst = worst.max(rel(got, want));
        transform.push(json!({"xi": xi, "quadrature": got, "symbol": want}));
    }
    checks.push("g_s^(xi) = (m^2+4pi^2 xi^2)^-s (N=1)", worst, 1e-4);
    let radii = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0];
    let values = radii.iter().map(|&r| kernel_value(r, &spec)).collect::<Result<Vec<f64>>>()?;
    let increases = values.windows(2).filter(|w| w[1] >= w[0]).count();
    checks.push("g_s strictly decreasing", increases as f64, 0.0);

    let grid = cfg.grid()?;
    let band = (grid.n() / 4).min(6);
    let mut semigroup: f64 = 0.0;
    let mut bound: f64 = 0.0;
    for k in 0..20 {
        let f = random_band_limited(grid, band, cfg.solver.seed + k)?;
        let chained = bessel_potential(&bessel_potential(&f, &params, 0.3)?, &params, 0.4)?;
        let direct = bessel_potential(&f, &params, 0.7)?;
        semigroup = semigroup.max(lp_norm(&chained.axpy(-1.0, &direct)?, 2.0)? / lp_norm(&direct, 2.0)?);
        let ratio = lp_norm(&bessel_potential(&f, &params, s)?, 2.0)? / lp_norm(&f, 2.0)?;
        bound = bound.max(ratio * params.m.powf(2.0 * s) - 1.0);
    }
    checks.push("I_0.3 I_0.4 = I_0.7", semigroup, 1e-12);
    checks.push("|I_s f|_2 <= m^-2s |f|_2", bound.max(0.0), 1e-12);
    Ok(Outcome {
        report: json!({
            "transform": transform,
            "kernel": radii.iter().zip(&values).map(|(r, g)| json!({"r": r, "g": g})).collect::<Vec<_>>(),
            "residuals": checks.rows,
        }),
        failure: checks.failure,
    })
}

fn extend_check(cfg: &mut RunConfig, field: Option<&Path>, fields: usize, band: usize) -> Result<Outcome> {
    let loaded = field.map(|path| load_into(cfg, path)).transpose()?;
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let inputs: Vec<(Option<u64>, Field)> = match loaded {
        Some(u) => vec![(None, u)],
        None => (0..fields as u64)
            .map(|k| Ok((Some(cfg.solver.seed + k), random_band_limited(grid, band, cfg.solver.seed + k)?)))
            .collect::<Result<_>>()?,
    };
    let table = compute_profile(params.s, DEFAULT_Y_CUT, DEFAULT_MESH_DENSITY)?;
    let ks = table.k_s();
    let mesh = YMesh::default_for(&params);
    let mut rows = Vec::new();
    let (mut e, mut m, mut t, mut x, mut p): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (seed, u) in &inputs {
        let w = extend(u, &params, &table, &mesh)?;
        let er = weighted_energy(&w) / (ks * hs_norm_sq(u, &params)?);
        let mr = weighted_mass(&w) / (params.s * ks * low_order_mass(u, &params)?);
        let op = apply_multiplier(u, &params, params.s)?.scaled(ks);
        let tr = lp_norm(&neumann_trace(&w)?.axpy(-1.0, &op)?, 2.0)? / lp_norm(&op, 2.0)?;
        let ex = trace_extrapolation_error(&w)?;
        let ext = extension_pohozaev_residual(&w, u, &cfg.nonlinearity)?;
        let flat = pohozaev_p(u, &params, &cfg.nonlinearity)?;
        let poho = (ext.residual - ks * flat.residual).abs()
            / (ext.lhs_gradient_term.abs() + ext.lhs_low_order_term.abs() + ext.rhs_potential_term.abs());
        e = e.max((er - 1.0).abs());
        m = m.max((mr - 1.0).abs());
        t = t.max(tr);
        x = x.max(ex);
        rows.push(json!({"seed": seed, "energy_ratio": er, "mass_ratio": mr, "trace_error": tr, "extrapolation_error": ex, "poho_residual": ext.residual, "poho_mismatch": poho}));
        p = p.max(poho);
    }
    let mut checks = Checks::default();
    checks.push("weighted energy = k_s ||u||^2", e, 1e-4);
    checks.push("weighted mass = s k_s m^2 |u|_low", m, 1e-4);
    checks.push("Neumann trace = k_s L^s u", t, 1e-3);
    checks.push("trace extrapolation intercept", x, 1e-8);
    checks.push("extension Pohozaev = k_s x flat Pohozaev", p, 1e-4);
    Ok(Outcome { report: json!({"k_s": ks, "fields": rows, "residuals": checks.rows}), failure: checks.failure })
}

fn pohozaev(cfg: &mut RunConfig, path: &Path) -> Result<Outcome> {
    let u = load_into(cfg, path)?;
    let params = cfg.params()?;
    let nl = cfg.nonlinearity;
    Ok(json!({
        "energy": energy(&u, &params, &nl)?,
        "nehari_defect": nehari_defect(&u, &params, &nl)?,
        "j": nehari_pohozaev_j(&u, &params, &nl)?,
        "energy_gap": energy_gap(&u, &params, &nl)?,
        "hs_norm_sq": hs_norm_sq(&u, &params)?,
        "pohozaev": to_value(&pohozaev_p(&u, &params, &nl)?)?,
    })
    .into())
}

fn groundstate(cfg: &mut RunConfig, c: Option<f64>, plot: bool) -> Result<Outcome> {
    if let Some(c) = c {
        cfg.nonlinearity = Nonlinearity::Model { c };
        cfg.validate()?;
    }
    let params = cfg.params()?;
    let gs = ground_state_solve(cfg.grid()?, &params, &cfg.nonlinearity, &cfg.solver)?;
    let dir = artifact_dir(cfg)?;
    if cfg.output.wants(OutputFormat::Frlf) {
        save_frlf(&gs.field, &dir.join("groundstate.frlf"))?;
    }
    if cfg.output.wants(OutputFormat::Csv) {
        write_rows_csv(&gs.trace, fs::File::create(dir.join("groundstate_trace.csv"))?)?;
    }
    if plot {
        write_tidy_csv(&gs.field, fs::File::create(dir.join("groundstate_field.csv"))?)?;
    }
    let report = to_value(&gs)?;
    let failure = if gs.converged {
        None
    } else {
        Some(FracError::non_convergence(
            "groundstate",
            format!(
                "after {} iterations: grad {:.3e}, J/‖u‖² {:.3e}, Pohozaev {:.3e}{}",
                gs.iterations,
                gs.grad_norm,
                gs.manifold_defect,
                gs.pohozaev.relative_residual,
                if gs.degenerate { " (collapsed towards 0)" } else { "" }
            ),
        ))
    };
    Ok(Outcome { report, failure })
}

fn nonexist(cfg: &RunConfig, ps: &[f64], fields: usize) -> Result<Outcome> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let crit = params.critical_exponent();
    let mut rows = Vec::new();
    let mut failure = None;
    for &p in ps {
        for k in 0..fields as u64 {
            let bump = random_bumps(grid, 2, 0.2 * grid.length(), true, cfg.solver.seed + k)?;
            let u = nehari_rescale(&bump, &params, p)?;
            let r = nonexistence_certificate(&u, &params, p)?;
            let critical_or_above = crit.is_some_and(|c| p >= c * (1.0 - 1e-14));
            if critical_or_above && !r.certified && failure.is_none() {
                failure = Some(FracError::Tolerance {
                    check: format!("obstruction gap at p={p}"),
                    measured: -r.gap,
                    tolerance: 0.0,
                });
            }
            let mut row = to_value(&r)?;
            row["seed"] = json!(cfg.solver.seed + k);
            rows.push(row);
        }
    }
    Ok(Outcome { report: json!({"rows": rows}), failure })
}

#[allow(clippy::too_many_arguments)]
fn sobolev(
    cfg: &RunConfig,
    mu: f64,
    t_min: f64,
    t_max: f64,
    steps: usize,
    box_lengths: &[f64],
    plot: bool,
) -> Result<Outcome> {
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let ts = geometric_t_list(t_min, t_max, steps)?;
    let scan = sobolev_quotient_scan(&params, mu, &ts, grid)?;
    let study = if box_lengths.is_empty() {
        Vec::new()
    } else {
        box_convergence_study(&params, mu, &ts, grid.spacing(), box_lengths)?
    };
    let dir = artifact_dir(cfg)?;
    if cfg.output.wants(OutputFormat::Csv) || plot {
        write_rows_csv(&scan.rows, fs::File::create(dir.join("sobolev_scan.csv"))?)?;
    }
    let mut checks = Checks::default();
    checks.push("S(v_t) constant in t", scan.s_spread, 1e-3);
    checks.push("t^N |v_t|_2*^2* = 1", scan.scaling_error, 1e-10);
    checks.push("excess <= m^2s t^-2s |U|_2^2", if scan.bound_holds { 0.0 } else { 1.0 }, 0.0);
    let study_rows: Vec<Value> = study
        .iter()
        .map(|sc| json!({"length": sc.length, "n": sc.n, "slope": sc.slope, "s_spread": sc.s_spread}))
        .collect();
    Ok(Outcome {
        report: json!({
            "scan": to_value(&scan)?,
            "box_study": study_rows,
            "residuals": checks.rows,
        }),
        failure: checks.failure,
    })
}

fn fixpoint(cfg: &RunConfig, plot: bool) -> Result<Outcome> {
    let params = cfg.params()?;
    let seed = seed_field(cfg.grid()?, cfg.solver.seed)?;
    let r = fixed_point_iterate(&seed, &params, &cfg.nonlinearity, &cfg.fixpoint)?;
    let dir = artifact_dir(cfg)?;
    let solution = r.rescaled.as_ref().unwrap_or(&r.field);
    if cfg.output.wants(OutputFormat::Frlf) {
        save_frlf(solution, &dir.join("fixpoint.frlf"))?;
    }
    if plot {
        write_tidy_csv(solution, fs::File::create(dir.join("fixpoint_field.csv"))?)?;
    }
    let failure = (!r.converged).then(|| {
        FracError::non_convergence(
            "fixpoint",
            format!("relative change {:.3e} after {} iterations", r.change, r.iterations),
        )
    });
    Ok(Outcome { report: to_value(&r)?, failure })
}

fn symmetry(cfg: &mut RunConfig, path: &Path, lambda: f64, axis: usize, side: Side, plot: bool) -> Result<Outcome> {
    let u = load_into(cfg, path)?;
    let params = cfg.params()?;
    let orientation = match side {
        Side::Below => HalfSpace::Below,
        Side::Above => HalfSpace::Above,
    };
    let spec = ReflectionSpec::new(axis, lambda, orientation);
    let refl = reflection_residual(&u, &cfg.nonlinearity, &spec, &params)?;
    let radial = radial_monotonicity_check(&u, None)?;
    if cfg.output.wants(OutputFormat::Csv) || plot {
        let dir = artifact_dir(cfg)?;
        write_shell_csv(&radial, fs::File::create(dir.join("symmetry_shells.csv"))?)?;
    }
    Ok(json!({
        "reflection": to_value(&refl)?,
        "radial": {
            "center": radial.center,
            "asymmetry": radial.asymmetry,
            "violations": radial.violations,
            "max_increase": radial.max_increase,
            "shells": radial.shells.len(),
        },
    })
    .into())
}

fn verify(cfg: &RunConfig, tighten: f64) -> Result<Outcome> {
    let report = verify_all(&cfg.params()?, tighten, cfg.solver.seed)?;
    Ok(Outcome { failure: report.first_failure(), report: to_value(&report)? })
}

fn run(cli: Cli) -> Result<(String, RunConfig, Outcome)> {
    let plot = cli.plot_data;
    let (name, common) = match &cli.command {
        Command::Constants { common } => ("constants", common),
        Command::Profile { common, .. } => ("profile", common),
        Command::Apply { common, .. } => ("apply", common),
        Command::KernelCheck { common } => ("kernel-check", common),
        Command::ExtendCheck { common, .. } => ("extend-check", common),
        Command::Pohozaev { common, .. } => ("pohozaev", common),
        Command::Groundstate { common, .. } => ("groundstate", common),
        Command::Nonexist { common, .. } => ("nonexist", common),
        Command::SobolevScan { common, .. } => ("sobolev-scan", common),
        Command::Fixpoint { common } => ("fixpoint", common),
        Command::Symmetry { common, .. } => ("symmetry", common),
        Command::VerifyAll { common, .. } => ("verify-all", common),
    };
    let mut cfg = resolve(common)?;
    let outcome = match &cli.command {
        Command::Constants { .. } => constants(&cfg)?,
        Command::Profile { y_cut, density, .. } => profile(&cfg, *y_cut, *density)?,
        Command::Apply { field, sigma, output, .. } => apply(&mut cfg, field, *sigma, output)?,
        Command::KernelCheck { .. } => kernel_check(&cfg)?,
        Command::ExtendCheck { field, fields, band, .. } => extend_check(&mut cfg, field.as_deref(), *fields, *band)?,
        Command::Pohozaev { field, .. } => pohozaev(&mut cfg, field)?,
        Command::Groundstate { c, .. } => groundstate(&mut cfg, *c, plot)?,
        Command::Nonexist { p, fields, .. } => nonexist(&cfg, p, *fields)?,
        Command::SobolevScan { mu, t_min, t_max, steps, box_lengths, .. } => {
            sobolev(&cfg, *mu, *t_min, *t_max, *steps, box_lengths, plot)?
        }
        Command::Fixpoint { .. } => fixpoint(&cfg, plot)?,
        Command::Symmetry { field, lambda, axis, side, .. } => symmetry(&mut cfg, field, *lambda, *axis, *side, plot)?,
        Command::VerifyAll { tighten, .. } => verify(&cfg, *tighten)?,
    };
    Ok((name.to_string(), cfg, outcome))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((name, cfg, outcome)) => {
            let doc = json!({
                "command": name,
                "config": serde_json::to_value(&cfg).unwrap_or(Value::Null),
                "report": outcome.report,
            });
            if matches!(name.as_str(), "groundstate" | "fixpoint" | "sobolev-scan" | "profile")
                && cfg.output.wants(OutputFormat::Json)
            {
                let path = cfg.output.dir.join(format!("{name}.json"));
                if let Err(e) = write_json(&path, &doc) {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            }
            println!("{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
            match outcome.failure {
                None => ExitCode::SUCCESS,
                Some(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
