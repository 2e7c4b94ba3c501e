//! The four batch drivers. Each returns the process exit status.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use qtensor::dynamics::{run, DynamicsError, RunSink, SimState};
use qtensor::landau_de_gennes::{null_lagrangian, EnergyReport};
use qtensor::spectral::{
    random_band_limited, QTensorField, RandomSpec, Snapshot, SpectralGrid, Spectrum, SymTraceless,
    Vector3, VectorField3,
};
use qtensor::tensor::QTensor;
use qtensor::verification::{
    cancellation_suite, delta_dissipation_check, mollifier_suite, twin_run,
    variational_consistency, viscosity_sweep, IdentityReport, VerificationError,
};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, InitialData};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    Usage = 1,
    Threshold = 2,
    BlowUp = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("{0}")]
    Setup(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Verification(#[from] VerificationError),
}

impl CommandError {
    pub fn status(&self) -> Status {
        match self {
            Self::Dynamics(DynamicsError::BlowUp(_))
            | Self::Verification(VerificationError::Dynamics(DynamicsError::BlowUp(_))) => {
                Status::BlowUp
            }
            _ => Status::Usage,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CommandError + '_ {
    move |source| CommandError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Lowercase hex sha256 of the resolved configuration echo.
pub fn config_hash(config: &ExperimentConfig) -> String {
    Sha256::digest(config.echo().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// The seed that drives generated data: the initial-data seed when there is
/// one, else 0.
pub fn base_seed(config: &ExperimentConfig) -> u64 {
    config.initial.seed().unwrap_or(0)
}

pub fn reproducibility_line(config: &ExperimentConfig, command: &str) -> String {
    format!(
        "qtensor {} {command} config-sha256 {} seed {}",
        env!("CARGO_PKG_VERSION"),
        config_hash(config),
        base_seed(config)
    )
}

pub fn build_grid(config: &ExperimentConfig) -> Result<SpectralGrid<f64>, CommandError> {
    SpectralGrid::cubic(config.grid.n, config.grid.box_length)
        .map_err(|e| CommandError::Setup(format!("grid: {e}")))
}

fn setup<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> CommandError + '_ {
    move |e| CommandError::Setup(format!("{what}: {e}"))
}

/// Seed of the `Q` part of generated random data.
fn q_seed(seed: u64) -> u64 {
    seed.wrapping_add(1 << 32)
}

pub fn initial_state(
    grid: &SpectralGrid<f64>,
    config: &ExperimentConfig,
) -> Result<SimState<f64>, CommandError> {
    let dims = grid.dims();
    let uniform = |q: QTensor<f64>| QTensorField::from_fn(dims, |_| q);
    let state = match &config.initial {
        InitialData::Zero => SimState::zeros(dims),
        InitialData::SingleMode {
            mode,
            amplitude,
            axis,
        } => {
            let base = QTensor::uniaxial(*amplitude, *axis);
            let k = std::f64::consts::TAU / grid.box_length();
            let q = QTensorField::from_fn(dims, |idx| {
                let x = grid.coordinates(idx);
                let phase =
                    k * (mode[0] as f64 * x[0] + mode[1] as f64 * x[1] + mode[2] as f64 * x[2]);
                base.scale(phase.cos())
            });
            SimState::from_physical(grid, &VectorField3::zeros(dims), &q, 0.0)
                .map_err(setup("initial data"))?
        }
        InitialData::Random {
            seed,
            decay,
            u_rms,
            q_rms,
            max_wavenumber,
        } => {
            let spec = |s: u64, rms: f64| {
                let mut r = RandomSpec::new(*decay, s).rms(rms);
                r.max_wavenumber = *max_wavenumber;
                r
            };
            let u: Spectrum<f64, Vector3> =
                random_band_limited(grid, &spec(*seed, *u_rms).solenoidal().zero_mean())
                    .map_err(setup("initial data"))?;
            let q: Spectrum<f64, SymTraceless> =
                random_band_limited(grid, &spec(q_seed(*seed), *q_rms))
                    .map_err(setup("initial data"))?;
            SimState::new(grid, u, q, 0.0).map_err(setup("initial data"))?
        }
        InitialData::Uniaxial { s, axis } => SimState::from_physical(
            grid,
            &VectorField3::zeros(dims),
            &uniform(QTensor::uniaxial(*s, *axis)),
            0.0,
        )
        .map_err(setup("initial data"))?,
        InitialData::File { path } => load_state(grid, path)?,
    };
    Ok(state)
}

fn load_state(grid: &SpectralGrid<f64>, path: &Path) -> Result<SimState<f64>, CommandError> {
    let what = format!("initial data file {}", path.display());
    let snap = Snapshot::load(path).map_err(setup(&what))?;
    if snap.dims != grid.dims() {
        return Err(CommandError::Setup(format!(
            "{what}: grid {:?} does not match the configured {:?}",
            snap.dims,
            grid.dims()
        )));
    }
    if snap.components.len() != 8 {
        return Err(CommandError::Setup(format!(
            "{what}: expected 8 components (u then Q), found {}",
            snap.components.len()
        )));
    }
    let rel = (snap.box_length - grid.box_length()).abs() / grid.box_length();
    if rel > 1e-12 {
        return Err(CommandError::Setup(format!(
            "{what}: box length {} does not match the configured {}",
            snap.box_length,
            grid.box_length()
        )));
    }
    let u = snap.field::<f64, Vector3>(0).map_err(setup(&what))?;
    let q = snap.field::<f64, SymTraceless>(3).map_err(setup(&what))?;
    SimState::from_physical(grid, &u, &q, snap.time).map_err(setup(&what))
}

fn prepare_output(config: &ExperimentConfig) -> Result<PathBuf, CommandError> {
    let dir = config.output.directory.clone();
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let echo = dir.join("resolved_config.toml");
    fs::write(&echo, config.echo()).map_err(io_err(&echo))?;
    Ok(dir)
}

fn csv_writer(path: &Path, header: &str) -> Result<BufWriter<File>, CommandError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    writeln!(w, "{header}").map_err(io_err(path))?;
    Ok(w)
}

/// Shortest round-trip form, so identical runs give identical bytes.
fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:e}")
    }
}

pub const ENERGY_HEADER: &str = "t,kinetic,elastic_L1,elastic_L23,elastic_L4_cross,bulk,total,diss_viscous,diss_rotational,balance_residual";

/// Streams energy rows and field snapshots to disk as the run produces them.
struct SimulateSink<'a> {
    grid: &'a SpectralGrid<f64>,
    csv: Option<BufWriter<File>>,
    snapshots: Option<PathBuf>,
    count: usize,
    previous: Option<EnergyReport<f64>>,
}

impl RunSink<f64> for SimulateSink<'_> {
    fn report(&mut self, r: &EnergyReport<f64>) -> io::Result<()> {
        let residual = match &self.previous {
            Some(p) if r.time > p.time => {
                (r.total - p.total) / (r.time - p.time) + 0.5 * (r.dissipation() + p.dissipation())
            }
            _ => f64::NAN,
        };
        if let Some(w) = self.csv.as_mut() {
            let row = [
                r.time,
                r.kinetic,
                r.elastic_l1,
                r.elastic_l23,
                r.elastic_l4_cross,
                r.bulk,
                r.total,
                r.dissipation_viscous,
                r.dissipation_rotational,
                residual,
            ];
            let line: Vec<String> = row.iter().map(|&x| fmt(x)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        self.previous = Some(*r);
        Ok(())
    }

    fn snapshot(&mut self, state: &SimState<f64>) -> io::Result<()> {
        let Some(dir) = &self.snapshots else {
            return Ok(());
        };
        let (u, q) = state.to_physical(self.grid).map_err(io::Error::other)?;
        let snap = Snapshot::from_fields(
            self.grid.box_length(),
            state.t,
            &[u.components(), q.components()],
        )
        .map_err(io::Error::other)?
        .with_dims(self.grid.dims());
        let path = dir.join(format!("snapshot_{:06}.qtf", self.count));
        self.count += 1;
        snap.save(path).map_err(io::Error::other)
    }
}

pub fn simulate(config: &ExperimentConfig) -> Result<Status, CommandError> {
    let grid = build_grid(config)?;
    let initial = initial_state(&grid, config)?;
    let dir = prepare_output(config)?;
    let csv_path = dir.join("energy.csv");
    let mut solver = config.solver;
    let snapshots = if config.output.snapshots {
        let d = dir.join("snapshots");
        fs::create_dir_all(&d).map_err(io_err(&d))?;
        if solver.snapshot_every == 0 {
            solver.snapshot_every = solver.report_every;
        }
        Some(d)
    } else {
        solver.snapshot_every = 0;
        None
    };
    let mut sink = SimulateSink {
        grid: &grid,
        csv: if config.output.csv {
            Some(csv_writer(&csv_path, ENERGY_HEADER)?)
        } else {
            None
        },
        snapshots,
        count: 0,
        previous: None,
    };
    let outcome = run(&grid, &initial, &config.params, &solver, &mut sink);
    if let Some(mut w) = sink.csv.take() {
        w.flush().map_err(io_err(&csv_path))?;
    }
    let summary = outcome?;
    if let Some(r) = summary.reports.last() {
        println!(
            "t = {} E = {} steps = {}",
            fmt(r.time),
            fmt(r.total),
            summary.steps
        );
    }
    match summary.halted {
        Some(b) => {
            eprintln!(
                "blow-up at t = {}: |u| = {}, |Q| = {}",
                fmt(b.time),
                fmt(b.u_l2),
                fmt(b.q_l2)
            );
            Ok(Status::BlowUp)
        }
        None => Ok(Status::Pass),
    }
}

pub const VERIFY_HEADER: &str = "suite,name,seed,value,scale,relative_residual,threshold,pass";

/// One line of `verify.csv`. A row passes when its relative residual is at
/// most the threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyRow {
    pub suite: &'static str,
    pub name: String,
    pub seed: u64,
    pub value: f64,
    pub scale: f64,
    pub relative_residual: f64,
    pub threshold: f64,
}

impl VerifyRow {
    fn from_report(suite: &'static str, seed: u64, r: IdentityReport, threshold: f64) -> Self {
        Self {
            suite,
            name: r.name,
            seed,
            value: r.value,
            scale: r.scale,
            relative_residual: r.relative_residual,
            threshold,
        }
    }

    pub fn passes(&self) -> bool {
        self.relative_residual <= self.threshold
    }
}

fn verify_seed(
    grid: &SpectralGrid<f64>,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<Vec<VerifyRow>, CommandError> {
    let p = &config.params;
    let v = &config.verify;
    let spec = |s: u64, rms: f64| RandomSpec::new(2.0, s).rms(rms);
    let random_q = |s: u64| -> Result<Spectrum<f64, SymTraceless>, CommandError> {
        let q = random_band_limited(grid, &spec(s, 0.4)).map_err(setup("verify data"))?;
        Ok(grid.dealias(&q))
    };
    let mut rows = Vec::new();

    let q = random_q(q_seed(seed))?;
    let err = variational_consistency(grid, &q, p, v.fd_step, seed)?;
    rows.push(VerifyRow {
        suite: "variational",
        name: "molecular_field".into(),
        seed,
        value: err,
        scale: 1.0,
        relative_residual: err,
        threshold: v.variational_tol,
    });

    let u: Spectrum<f64, Vector3> =
        random_band_limited(grid, &spec(seed, 0.7).solenoidal()).map_err(setup("verify data"))?;
    let state = SimState::new(grid, u, q.clone(), 0.0).map_err(setup("verify data"))?;
    for r in cancellation_suite(grid, &state, p)? {
        rows.push(VerifyRow::from_report(
            "cancellation",
            seed,
            r,
            v.identity_tol,
        ));
    }

    let (value, scale) = null_lagrangian(grid, &q).map_err(setup("null Lagrangian"))?;
    rows.push(VerifyRow::from_report(
        "null_lagrangian",
        seed,
        IdentityReport::new("null_lagrangian", value, scale),
        v.identity_tol,
    ));

    // The margin must be non-negative; only a deficit counts as residual.
    let q2 = random_q(q_seed(seed).wrapping_add(1))?;
    let r = delta_dissipation_check(grid, &q, &q2, p)?;
    let deficit = if r.value < 0.0 {
        -r.value / r.scale
    } else {
        0.0
    };
    rows.push(VerifyRow {
        suite: "delta_dissipation",
        name: r.name,
        seed,
        value: r.value,
        scale: r.scale,
        relative_residual: deficit,
        threshold: 0.0,
    });

    for r in mollifier_suite(grid, &v.mollifier_n, seed)? {
        let threshold = if r.name.starts_with("idempotence") {
            0.0
        } else {
            v.mollifier_tol
        };
        rows.push(VerifyRow::from_report("mollifier", seed, r, threshold));
    }
    Ok(rows)
}

pub fn verify_rows(config: &ExperimentConfig) -> Result<Vec<VerifyRow>, CommandError> {
    let grid = build_grid(config)?;
    let base = base_seed(config);
    let per_seed: Vec<Result<Vec<VerifyRow>, CommandError>> = (0..config.verify.seeds)
        .into_par_iter()
        .map(|i| verify_seed(&grid, config, base.wrapping_add(i)))
        .collect();
    let mut rows = Vec::new();
    for r in per_seed {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn verify(config: &ExperimentConfig) -> Result<Status, CommandError> {
    let rows = verify_rows(config)?;
    let dir = prepare_output(config)?;
    if config.output.csv {
        let path = dir.join("verify.csv");
        let mut w = csv_writer(&path, VERIFY_HEADER)?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.suite,
                r.name,
                r.seed,
                fmt(r.value),
                fmt(r.scale),
                fmt(r.relative_residual),
                fmt(r.threshold),
                r.passes()
            )
            .map_err(io_err(&path))?;
        }
        w.flush().map_err(io_err(&path))?;
    }
    let failed: Vec<&VerifyRow> = rows.iter().filter(|r| !r.passes()).collect();
    for r in &failed {
        eprintln!(
            "FAIL {}/{} seed {}: residual {} > {}",
            r.suite,
            r.name,
            r.seed,
            fmt(r.relative_residual),
            fmt(r.threshold)
        );
    }
    println!("{} checks, {} failed", rows.len(), failed.len());
    Ok(if failed.is_empty() {
        Status::Pass
    } else {
        Status::Threshold
    })
}

pub const TWIN_HEADER: &str = "t,G,diss_viscous,diss_rotational";

/// Second initial state: the first plus `scale` times a random field of unit
/// rms in both `u` and `Q`.
pub fn perturbed(
    grid: &SpectralGrid<f64>,
    state: &SimState<f64>,
    scale: f64,
    seed: u64,
) -> Result<SimState<f64>, CommandError> {
    if scale == 0.0 {
        return Ok(state.clone());
    }
    let spec = |s: u64| RandomSpec::new(3.0, s).rms(1.0);
    let du: Spectrum<f64, Vector3> =
        random_band_limited(grid, &spec(seed).solenoidal().zero_mean())
            .map_err(setup("perturbation"))?;
    let dq: Spectrum<f64, SymTraceless> =
        random_band_limited(grid, &spec(q_seed(seed))).map_err(setup("perturbation"))?;
    let mut u = state.u.clone();
    u.axpy(scale, &du);
    let mut q = state.q.clone();
    q.axpy(scale, &dq);
    SimState::new(grid, u, q, state.t).map_err(setup("perturbation"))
}

pub fn twin(config: &ExperimentConfig, scale: f64, seed: u64) -> Result<Status, CommandError> {
    if !scale.is_finite() {
        return Err(CommandError::Setup(format!(
            "--perturb-scale {scale} must be finite"
        )));
    }
    let grid = build_grid(config)?;
    let a = initial_state(&grid, config)?;
    let b = perturbed(&grid, &a, scale, seed)?;
    let dir = prepare_output(config)?;
    let result = twin_run(&grid, &a, &b, &config.params, &config.solver)?;
    if config.output.csv {
        let path = dir.join("twin.csv");
        let mut w = csv_writer(&path, TWIN_HEADER)?;
        for s in &result.samples {
            writeln!(
                w,
                "{},{},{},{}",
                fmt(s.t),
                fmt(s.g),
                fmt(s.diss_viscous),
                fmt(s.diss_rotational)
            )
            .map_err(io_err(&path))?;
        }
        w.flush().map_err(io_err(&path))?;
        let path = dir.join("twin_summary.csv");
        let mut w = csv_writer(&path, "key,value")?;
        for (k, v) in [
            ("G0", result.g0()),
            ("sup_G", result.sup_g()),
            ("c_fit", result.c_fit),
            ("c_fit_refined", result.c_fit_refined),
            ("c_fit_change", result.c_fit_change()),
            ("kappa1", result.kappa1),
            ("kappa2", result.kappa2),
        ] {
            writeln!(w, "{k},{}", fmt(v)).map_err(io_err(&path))?;
        }
        writeln!(w, "bound_satisfied,{}", result.bound_satisfied).map_err(io_err(&path))?;
        w.flush().map_err(io_err(&path))?;
    }
    println!(
        "G0 = {} sup G = {} C_fit = {} (refined {}) bound {}",
        fmt(result.g0()),
        fmt(result.sup_g()),
        fmt(result.c_fit),
        fmt(result.c_fit_refined),
        if result.bound_satisfied {
            "holds"
        } else {
            "fails"
        }
    );
    Ok(if result.bound_satisfied {
        Status::Pass
    } else {
        Status::Threshold
    })
}

pub const SWEEP_HEADER: &str = "mu,sup_a_tilde,blowup_time,steps";

pub fn sweep(config: &ExperimentConfig, mu_list: &[f64]) -> Result<Status, CommandError> {
    let grid = build_grid(config)?;
    let initial = initial_state(&grid, config)?;
    let dir = prepare_output(config)?;
    let table = viscosity_sweep(&grid, &initial, &config.params, mu_list, &config.solver)?;
    if config.output.csv {
        let path = dir.join("sweep.csv");
        let mut w = csv_writer(&path, SWEEP_HEADER)?;
        for r in &table.rows {
            writeln!(
                w,
                "{},{},{},{}",
                fmt(r.mu),
                fmt(r.sup_a_tilde),
                r.blowup_time.map_or_else(String::new, fmt),
                r.steps
            )
            .map_err(io_err(&path))?;
        }
        w.flush().map_err(io_err(&path))?;
    }
    for r in &table.rows {
        println!("mu = {} sup A~ = {}", fmt(r.mu), fmt(r.sup_a_tilde));
    }
    println!(
        "sup A~ is {}",
        if table.monotone {
            "non-increasing in mu"
        } else {
            "NOT non-increasing in mu"
        }
    );
    Ok(if table.rows.iter().any(|r| r.blowup_time.is_some()) {
        Status::BlowUp
    } else if table.monotone {
        Status::Pass
    } else {
        Status::Threshold
    })
}
