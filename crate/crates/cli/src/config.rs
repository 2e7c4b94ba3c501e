//! Experiment configuration: a TOML document with fixed sections, parsed
//! strictly. Every problem found is reported, not only the first.

use std::fmt::{self, Write as _};
use std::path::PathBuf;

use qtensor::dynamics::{Scheme, SolverConfig, StressForm};
use qtensor::landau_de_gennes::{MaterialParams, ParamError};
use toml::{Table, Value};

#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub n: usize,
    pub box_length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    Zero,
    /// `Q = amplitude · cos(2π m·x / L) · (n⊗n − I/3)`, `u = 0`.
    SingleMode {
        mode: [i64; 3],
        amplitude: f64,
        axis: [f64; 3],
    },
    Random {
        seed: u64,
        decay: f64,
        u_rms: f64,
        q_rms: f64,
        max_wavenumber: Option<f64>,
    },
    /// Constant `Q = s(n⊗n − I/3)`, `u = 0`.
    Uniaxial {
        s: f64,
        axis: [f64; 3],
    },
    /// A `QTF1` snapshot holding `u` (3 components) then `Q` (5).
    File {
        path: PathBuf,
    },
}

impl InitialData {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::Random { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub csv: bool,
    pub snapshots: bool,
}

/// Settings of the `verify` subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    /// Random states per suite.
    pub seeds: u64,
    pub identity_tol: f64,
    pub variational_tol: f64,
    pub fd_step: f64,
    pub mollifier_tol: f64,
    pub mollifier_n: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub params: MaterialParams<f64>,
    pub solver: SolverConfig<f64>,
    pub initial: InitialData,
    pub output: OutputConfig,
    pub verify: VerifyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig {
                n: 32,
                box_length: 2.0 * std::f64::consts::PI,
            },
            params: MaterialParams::default(),
            solver: SolverConfig::new(1e-3, 1.0),
            initial: InitialData::Random {
                seed: 0,
                decay: 3.0,
                u_rms: 0.5,
                q_rms: 0.3,
                max_wavenumber: None,
            },
            output: OutputConfig {
                directory: PathBuf::from("qtensor-out"),
                csv: true,
                snapshots: false,
            },
            verify: VerifyConfig {
                seeds: 4,
                identity_tol: 1e-10,
                variational_tol: 1e-6,
                fd_step: 1e-3,
                mollifier_tol: 1e-12,
                mollifier_n: vec![1, 2, 4, 8],
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigError {
    Syntax(String),
    UnknownSection(String),
    UnknownKey {
        section: String,
        key: String,
    },
    WrongType {
        section: String,
        key: String,
        expected: &'static str,
    },
    Invalid {
        section: String,
        key: String,
        reason: String,
    },
    Param(ParamError),
    Ambiguous(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Syntax(m) => write!(f, "syntax error: {m}"),
            Self::UnknownSection(s) => write!(f, "unknown section [{s}]"),
            Self::UnknownKey { section, key } => write!(f, "unknown key {section}.{key}"),
            Self::WrongType {
                section,
                key,
                expected,
            } => write!(f, "{section}.{key} must be {expected}"),
            Self::Invalid {
                section,
                key,
                reason,
            } => write!(f, "{section}.{key}: {reason}"),
            Self::Param(e) => write!(f, "params: {e}"),
            Self::Ambiguous(m) => write!(f, "ambiguous initial data: {m}"),
        }
    }
}

/// All problems found in one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const SECTIONS: [&str; 6] = ["grid", "params", "solver", "initial", "output", "verify"];

/// Reads typed values out of one section, recording problems as it goes.
struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
    used: Vec<&'static str>,
    errors: &'a mut Vec<ConfigError>,
}

impl<'a> Section<'a> {
    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.push(key);
        self.table.and_then(|t| t.get(key))
    }

    fn has(&self, key: &str) -> bool {
        self.table.is_some_and(|t| t.contains_key(key))
    }

    fn wrong(&mut self, key: &str, expected: &'static str) {
        self.errors.push(ConfigError::WrongType {
            section: self.name.into(),
            key: key.into(),
            expected,
        });
    }

    fn invalid(&mut self, key: &str, reason: impl Into<String>) {
        self.errors.push(ConfigError::Invalid {
            section: self.name.into(),
            key: key.into(),
            reason: reason.into(),
        });
    }

    fn float(&mut self, key: &'static str, default: f64) -> f64 {
        self.opt_float(key).unwrap_or(default)
    }

    fn opt_float(&mut self, key: &'static str) -> Option<f64> {
        match self.raw(key) {
            None => None,
            Some(Value::Float(x)) => Some(*x),
            Some(Value::Integer(i)) => Some(*i as f64),
            Some(_) => {
                self.wrong(key, "a number");
                None
            }
        }
    }

    fn int(&mut self, key: &'static str, default: i64) -> i64 {
        match self.raw(key) {
            None => default,
            Some(Value::Integer(i)) => *i,
            Some(_) => {
                self.wrong(key, "an integer");
                default
            }
        }
    }

    fn count(&mut self, key: &'static str, default: usize) -> usize {
        let v = self.int(key, default as i64);
        if v < 0 {
            self.invalid(key, format!("{v} must be non-negative"));
            default
        } else {
            v as usize
        }
    }

    fn boolean(&mut self, key: &'static str, default: bool) -> bool {
        match self.raw(key) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(_) => {
                self.wrong(key, "true or false");
                default
            }
        }
    }

    fn string(&mut self, key: &'static str) -> Option<String> {
        match self.raw(key) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                self.wrong(key, "a string");
                None
            }
        }
    }

    fn vector(&mut self, key: &'static str, default: [f64; 3]) -> [f64; 3] {
        match self.raw(key) {
            None => default,
            Some(Value::Array(a)) if a.len() == 3 => {
                let mut out = [0.0; 3];
                for (o, v) in out.iter_mut().zip(a) {
                    match v {
                        Value::Float(x) => *o = *x,
                        Value::Integer(i) => *o = *i as f64,
                        _ => {
                            self.wrong(key, "an array of 3 numbers");
                            return default;
                        }
                    }
                }
                out
            }
            Some(_) => {
                self.wrong(key, "an array of 3 numbers");
                default
            }
        }
    }

    fn int_list(&mut self, key: &'static str) -> Option<Vec<i64>> {
        match self.raw(key) {
            None => None,
            Some(Value::Array(a)) => {
                let mut out = Vec::with_capacity(a.len());
                for v in a {
                    match v {
                        Value::Integer(i) => out.push(*i),
                        _ => {
                            self.wrong(key, "an array of integers");
                            return None;
                        }
                    }
                }
                Some(out)
            }
            Some(_) => {
                self.wrong(key, "an array of integers");
                None
            }
        }
    }

    /// Reports keys that were present but never read.
    fn finish(self) {
        if let Some(t) = self.table {
            for key in t.keys() {
                if !self.used.contains(&key.as_str()) {
                    self.errors.push(ConfigError::UnknownKey {
                        section: self.name.into(),
                        key: key.clone(),
                    });
                }
            }
        }
    }
}

fn section<'a>(
    root: &'a Table,
    name: &'static str,
    errors: &'a mut Vec<ConfigError>,
) -> Section<'a> {
    let table = match root.get(name) {
        None => None,
        Some(Value::Table(t)) => Some(t),
        Some(_) => {
            errors.push(ConfigError::WrongType {
                section: name.into(),
                key: "".into(),
                expected: "a table",
            });
            None
        }
    };
    Section {
        name,
        table,
        used: Vec::new(),
        errors,
    }
}

fn normalized(axis: [f64; 3]) -> Option<[f64; 3]> {
    let n = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
        // Already unit length; dividing again could move the last bit and
        // break the echo round trip.
        return Some(axis);
    }
    (n > 0.0 && n.is_finite()).then(|| axis.map(|x| x / n))
}

/// Parses and validates a configuration. Missing sections and keys take the
/// defaults of [`ExperimentConfig::default`].
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigErrors(vec![ConfigError::Syntax(e.message().to_string())])
    })?;
    let mut errors = Vec::new();
    for key in root.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            errors.push(ConfigError::UnknownSection(key.clone()));
        }
    }
    let d = ExperimentConfig::default();

    let mut s = section(&root, "grid", &mut errors);
    let n = s.count("n", d.grid.n);
    if n < 8 || n % 2 == 1 {
        s.invalid("n", format!("{n} must be even and at least 8"));
    }
    let box_length = s.float("box_length", d.grid.box_length);
    if !(box_length > 0.0 && box_length.is_finite()) {
        s.invalid("box_length", format!("{box_length} must be positive"));
    }
    s.finish();
    let grid = GridConfig { n, box_length };

    let mut s = section(&root, "params", &mut errors);
    let dp = d.params;
    let params = MaterialParams {
        a: s.float("a", dp.a),
        b: s.float("b", dp.b),
        c: s.float("c", dp.c),
        l1: s.float("L1", dp.l1),
        l2: s.float("L2", dp.l2),
        l3: s.float("L3", dp.l3),
        l4: s.float("L4", dp.l4),
        mu: s.float("mu", dp.mu),
        gamma: s.float("gamma", dp.gamma),
    };
    s.finish();
    errors.extend(params.violations().into_iter().map(ConfigError::Param));

    let mut s = section(&root, "solver", &mut errors);
    let mut solver =
        SolverConfig::new(s.float("dt", d.solver.dt), s.float("t_end", d.solver.t_end));
    match s.string("scheme").as_deref() {
        None | Some("rk4") => {}
        Some("imex") => solver.scheme = Scheme::Imex,
        Some(other) => s.invalid("scheme", format!("\"{other}\" is not rk4 or imex")),
    }
    match s.string("stress").as_deref() {
        None | Some("chemical") => {}
        Some("divergence") => solver.stress = StressForm::Divergence,
        Some(other) => s.invalid(
            "stress",
            format!("\"{other}\" is not chemical or divergence"),
        ),
    }
    if s.has("mollifier_n") {
        solver.mollifier_n = Some(s.count("mollifier_n", 0));
    } else {
        s.used.push("mollifier_n");
    }
    solver.snapshot_every = s.count("snapshot_every", d.solver.snapshot_every);
    solver.report_every = s.count("report_every", d.solver.report_every);
    solver.blowup_threshold = s.float("blowup_threshold", d.solver.blowup_threshold);
    for v in solver.violations(&params) {
        s.errors.push(ConfigError::Invalid {
            section: "solver".into(),
            key: "".into(),
            reason: v,
        });
    }
    s.finish();

    let mut s = section(&root, "initial", &mut errors);
    let kind = s.string("kind").unwrap_or_else(|| "random".into());
    let initial = match kind.as_str() {
        "zero" => InitialData::Zero,
        "single_mode" => {
            let mode = match s.int_list("mode") {
                None => [1, 0, 0],
                Some(v) if v.len() == 3 => [v[0], v[1], v[2]],
                Some(_) => {
                    s.wrong("mode", "an array of 3 integers");
                    [1, 0, 0]
                }
            };
            let amplitude = s.float("amplitude", 0.1);
            let axis = s.vector("axis", [0.0, 0.0, 1.0]);
            let axis = normalized(axis).unwrap_or_else(|| {
                s.invalid("axis", "must be a nonzero vector");
                [0.0, 0.0, 1.0]
            });
            let k = (grid.n as i64) / 3;
            if mode.iter().any(|m| m.abs() > k) {
                s.invalid(
                    "mode",
                    format!("components must lie within ±{k} on this grid"),
                );
            }
            InitialData::SingleMode {
                mode,
                amplitude,
                axis,
            }
        }
        "random" => {
            let seed = s.int("seed", 0);
            if seed < 0 {
                s.invalid("seed", "must be non-negative");
            }
            let decay = s.float("decay", 3.0);
            if !(decay > 0.0 && decay.is_finite()) {
                s.invalid("decay", format!("{decay} must be positive"));
            }
            let u_rms = s.float("u_rms", 0.5);
            let q_rms = s.float("q_rms", 0.3);
            for (key, v) in [("u_rms", u_rms), ("q_rms", q_rms)] {
                if !(v >= 0.0 && v.is_finite()) {
                    s.invalid(key, format!("{v} must be non-negative"));
                }
            }
            let max_wavenumber = s.opt_float("max_wavenumber");
            if let Some(k) = max_wavenumber {
                if k.is_nan() || k <= 0.0 {
                    s.invalid("max_wavenumber", format!("{k} must be positive"));
                }
            }
            InitialData::Random {
                seed: seed.max(0) as u64,
                decay,
                u_rms,
                q_rms,
                max_wavenumber,
            }
        }
        "uniaxial" => {
            let s_value = s.float("s", 0.5);
            let axis = s.vector("axis", [0.0, 0.0, 1.0]);
            let axis = normalized(axis).unwrap_or_else(|| {
                s.invalid("axis", "must be a nonzero vector");
                [0.0, 0.0, 1.0]
            });
            InitialData::Uniaxial { s: s_value, axis }
        }
        "file" => {
            if s.has("seed") {
                s.used.push("seed");
                s.errors.push(ConfigError::Ambiguous(
                    "a seed was given together with a file; the file fully determines the data"
                        .into(),
                ));
            }
            match s.string("path") {
                Some(p) => InitialData::File { path: p.into() },
                None => {
                    s.invalid("path", "required when kind = \"file\"");
                    InitialData::Zero
                }
            }
        }
        other => {
            s.invalid(
                "kind",
                format!("\"{other}\" is not zero, single_mode, random, uniaxial or file"),
            );
            InitialData::Zero
        }
    };
    s.finish();

    let mut s = section(&root, "output", &mut errors);
    let output = OutputConfig {
        directory: s
            .string("directory")
            .map(PathBuf::from)
            .unwrap_or(d.output.directory),
        csv: s.boolean("csv", d.output.csv),
        snapshots: s.boolean("snapshots", d.output.snapshots),
    };
    s.finish();

    let mut s = section(&root, "verify", &mut errors);
    let dv = d.verify;
    let seeds = s.int("seeds", dv.seeds as i64);
    if seeds < 1 {
        s.invalid("seeds", "must be at least 1");
    }
    let fd_step = s.float("fd_step", dv.fd_step);
    if !(1e-7..=1e-3).contains(&fd_step) {
        s.invalid("fd_step", format!("{fd_step} is outside [1e-7, 1e-3]"));
    }
    let mut verify = VerifyConfig {
        seeds: seeds.max(1) as u64,
        identity_tol: s.float("identity_tol", dv.identity_tol),
        variational_tol: s.float("variational_tol", dv.variational_tol),
        fd_step,
        mollifier_tol: s.float("mollifier_tol", dv.mollifier_tol),
        mollifier_n: dv.mollifier_n,
    };
    if let Some(list) = s.int_list("mollifier_n") {
        if list.is_empty() || list.iter().any(|&n| n < 1) {
            s.invalid("mollifier_n", "needs at least one entry, each at least 1");
        } else {
            verify.mollifier_n = list.into_iter().map(|n| n as usize).collect();
        }
    }
    s.finish();

    if errors.is_empty() {
        Ok(ExperimentConfig {
            grid,
            params,
            solver,
            initial,
            output,
            verify,
        })
    } else {
        Err(ConfigErrors(errors))
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'n', 'i']) {
        s
    } else {
        format!("{s}.0")
    }
}

fn vec3(v: [f64; 3]) -> String {
    format!("[{}, {}, {}]", num(v[0]), num(v[1]), num(v[2]))
}

impl ExperimentConfig {
    /// The fully resolved configuration in the input grammar. Parsing the
    /// echo gives back the same configuration.
    pub fn echo(&self) -> String {
        let mut o = String::new();
        let p = &self.params;
        let s = &self.solver;
        let _ = writeln!(
            o,
            "[grid]\nn = {}\nbox_length = {}\n",
            self.grid.n,
            num(self.grid.box_length)
        );
        let _ = writeln!(
            o,
            "[params]\na = {}\nb = {}\nc = {}\nL1 = {}\nL2 = {}\nL3 = {}\nL4 = {}\nmu = {}\ngamma = {}\n",
            num(p.a),
            num(p.b),
            num(p.c),
            num(p.l1),
            num(p.l2),
            num(p.l3),
            num(p.l4),
            num(p.mu),
            num(p.gamma)
        );
        let _ = writeln!(o, "[solver]");
        let scheme = match s.scheme {
            Scheme::Rk4 => "rk4",
            Scheme::Imex => "imex",
        };
        let stress = match s.stress {
            StressForm::Chemical => "chemical",
            StressForm::Divergence => "divergence",
        };
        let _ = writeln!(
            o,
            "scheme = \"{scheme}\"\ndt = {}\nt_end = {}",
            num(s.dt),
            num(s.t_end)
        );
        if let Some(n) = s.mollifier_n {
            let _ = writeln!(o, "mollifier_n = {n}");
        }
        let _ = writeln!(
            o,
            "snapshot_every = {}\nreport_every = {}\nstress = \"{stress}\"\nblowup_threshold = {}\n",
            s.snapshot_every,
            s.report_every,
            num(s.blowup_threshold)
        );
        let _ = writeln!(o, "[initial]");
        match &self.initial {
            InitialData::Zero => {
                let _ = writeln!(o, "kind = \"zero\"");
            }
            InitialData::SingleMode {
                mode,
                amplitude,
                axis,
            } => {
                let _ = writeln!(
                    o,
                    "kind = \"single_mode\"\nmode = [{}, {}, {}]\namplitude = {}\naxis = {}",
                    mode[0],
                    mode[1],
                    mode[2],
                    num(*amplitude),
                    vec3(*axis)
                );
            }
            InitialData::Random {
                seed,
                decay,
                u_rms,
                q_rms,
                max_wavenumber,
            } => {
                let _ = writeln!(
                    o,
                    "kind = \"random\"\nseed = {seed}\ndecay = {}\nu_rms = {}\nq_rms = {}",
                    num(*decay),
                    num(*u_rms),
                    num(*q_rms)
                );
                if let Some(k) = max_wavenumber {
                    let _ = writeln!(o, "max_wavenumber = {}", num(*k));
                }
            }
            InitialData::Uniaxial { s, axis } => {
                let _ = writeln!(
                    o,
                    "kind = \"uniaxial\"\ns = {}\naxis = {}",
                    num(*s),
                    vec3(*axis)
                );
            }
            InitialData::File { path } => {
                let _ = writeln!(
                    o,
                    "kind = \"file\"\npath = {:?}",
                    path.display().to_string()
                );
            }
        }
        let _ = writeln!(
            o,
            "\n[output]\ndirectory = {:?}\ncsv = {}\nsnapshots = {}\n",
            self.output.directory.display().to_string(),
            self.output.csv,
            self.output.snapshots
        );
        let v = &self.verify;
        let ns: Vec<String> = v.mollifier_n.iter().map(|n| n.to_string()).collect();
        let _ = write!(
            o,
            "[verify]\nseeds = {}\nidentity_tol = {}\nvariational_tol = {}\nfd_step = {}\nmollifier_tol = {}\nmollifier_n = [{}]\n",
            v.seeds,
            num(v.identity_tol),
            num(v.variational_tol),
            num(v.fd_step),
            num(v.mollifier_tol),
            ns.join(", ")
        );
        o
    }
}
