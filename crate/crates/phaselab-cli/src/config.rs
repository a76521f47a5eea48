//! Flat `section.key = value` configuration files.
//!
//! The format is deliberately free of nesting: every line is blank, a `#`
//! comment, or a single `section.key = value` assignment. Sections are just
//! dotted prefixes. The parser rejects unknown keys, duplicate keys, and
//! malformed values, always naming the offending line; exactly one parameter
//! chart section (`physical`, `nondim`, or `hat`) must be present, and a
//! config naming two charts is rejected with both section names. `emit`
//! serializes a resolved config such that parsing it back yields an equal
//! `RunConfig`.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use phaselab::field::Face;
use phaselab::params::{HatParams, NondimParams, PhysicalParams};
use phaselab::pde::ModelForm;
use phaselab::stefan::{JumpLaw, SweepScenario};

/// What the invocation is asked to do; mirrors the subcommand set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Run,
    Profile,
    Sweep,
    Galerkin,
    StefanCompare,
    Diagnose,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Run => "run",
            Mode::Profile => "profile",
            Mode::Sweep => "sweep",
            Mode::Galerkin => "galerkin",
            Mode::StefanCompare => "stefan-compare",
            Mode::Diagnose => "diagnose",
        }
    }

    fn from_name(s: &str) -> Option<Mode> {
        Some(match s {
            "run" => Mode::Run,
            "profile" => Mode::Profile,
            "sweep" => Mode::Sweep,
            "galerkin" => Mode::Galerkin,
            "stefan-compare" => Mode::StefanCompare,
            "diagnose" => Mode::Diagnose,
            _ => return None,
        })
    }
}

/// Exactly one of the three parameter charts.
#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    Physical(PhysicalParams),
    Nondim(NondimParams),
    Hat(HatParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    pub nx: usize,
    pub ny: usize,
    pub len_x: f64,
    pub len_y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryKind {
    NoFlux,
    Mixed { gamma_faces: Vec<Face>, q_b: f64, t_b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    /// Uniform fields.
    PurePhase { phi: f64, temp: f64 },
    /// Planar solid–liquid front seeded from the equilibrium layer profile.
    Front { position: f64, temp: f64, solid_side: Side },
    /// Liquid disc in a solid matrix (2D grids only).
    Bubble { radius: f64, center_x: f64, center_y: f64, temp: f64 },
    /// Resume from a snapshot file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSpec {
    /// Step size; `None` lets the solver pick its accuracy-based default.
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Diagnostics cadence in steps (0 = initial record only).
    pub diag_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub eps_list: Vec<f64>,
    pub scenario: SweepScenario,
    /// Override for the limit θ; `None` uses the chart's value.
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinSpec {
    pub n_modes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StefanSpec {
    pub law: JumpLaw,
    pub n_cells: usize,
    /// Front-position sampling interval (simulation time).
    pub sample_dt: f64,
}

/// A fully validated configuration; one per invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Optional in the file; when present it must agree with the subcommand.
    pub mode: Option<Mode>,
    pub chart: Chart,
    pub potential: String,
    pub form: ModelForm,
    pub grid: GridSpec,
    pub boundary: BoundaryKind,
    pub initial: InitialSpec,
    pub time: TimeSpec,
    pub sweep: SweepSpec,
    pub galerkin: GalerkinSpec,
    pub stefan: StefanSpec,
}

/// A parse or validation failure, with the offending line when one exists.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub msg: String,
}

impl ConfigError {
    fn at(line: usize, msg: impl Into<String>) -> Self {
        ConfigError { line: Some(line), msg: msg.into() }
    }

    fn general(msg: impl Into<String>) -> Self {
        ConfigError { line: None, msg: msg.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.msg),
            None => write!(f, "{}", self.msg),
        }
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = std::result::Result<T, ConfigError>;

struct Entry {
    line: usize,
    value: String,
}

/// Raw `section.key → value` table with duplicate detection.
struct Table {
    entries: HashMap<String, Entry>,
}

impl Table {
    fn scan(text: &str) -> CResult<Table> {
        let mut entries: HashMap<String, Entry> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::at(
                    line_no,
                    format!("expected `section.key = value`, got `{line}`"),
                ));
            };
            let key = key.trim();
            let value = value.trim();
            if key.split('.').count() != 2 || key.starts_with('.') || key.ends_with('.') {
                return Err(ConfigError::at(
                    line_no,
                    format!("key `{key}` must have exactly one dot (`section.key`)"),
                ));
            }
            if value.is_empty() {
                return Err(ConfigError::at(line_no, format!("key `{key}` has an empty value")));
            }
            if let Some(prev) = entries.get(key) {
                return Err(ConfigError::at(
                    line_no,
                    format!("duplicate key `{key}` (first assigned at line {})", prev.line),
                ));
            }
            entries.insert(key.to_string(), Entry { line: line_no, value: value.to_string() });
        }
        Ok(Table { entries })
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn has_section(&self, section: &str) -> bool {
        let prefix = format!("{section}.");
        self.entries.keys().any(|k| k.starts_with(&prefix))
    }

    /// Line of the first (lowest-line) key of a section, for error reporting.
    fn section_line(&self, section: &str) -> Option<usize> {
        let prefix = format!("{section}.");
        self.entries
            .iter()
            .filter(|(k, _)| k.starts_with(&prefix))
            .map(|(_, e)| e.line)
            .min()
    }
}

fn parse_f64(key: &str, e: &Entry) -> CResult<f64> {
    e.value.parse::<f64>().map_err(|_| {
        ConfigError::at(e.line, format!("key `{key}`: `{}` is not a number", e.value))
    })
}

fn parse_usize(key: &str, e: &Entry) -> CResult<usize> {
    e.value.parse::<usize>().map_err(|_| {
        ConfigError::at(e.line, format!("key `{key}`: `{}` is not a nonnegative integer", e.value))
    })
}

fn parse_face(key: &str, line: usize, word: &str) -> CResult<Face> {
    Ok(match word {
        "left" => Face::Left,
        "right" => Face::Right,
        "bottom" => Face::Bottom,
        "top" => Face::Top,
        other => {
            return Err(ConfigError::at(
                line,
                format!("key `{key}`: unknown face `{other}` (expected left|right|bottom|top)"),
            ))
        }
    })
}

/// Take a key, feed it through `parse`, or fall back to `default`.
fn opt<T>(
    tab: &mut Table,
    key: &str,
    parse: impl FnOnce(&str, &Entry) -> CResult<T>,
) -> CResult<Option<T>> {
    match tab.take(key) {
        Some(e) => Ok(Some(parse(key, &e)?)),
        None => Ok(None),
    }
}

fn required_f64(tab: &mut Table, section: &str, key: &str) -> CResult<f64> {
    let full = format!("{section}.{key}");
    match tab.take(&full) {
        Some(e) => parse_f64(&full, &e),
        None => Err(ConfigError::general(format!("missing mandatory key `{full}`"))),
    }
}

const CHART_SECTIONS: [&str; 3] = ["physical", "nondim", "hat"];

fn parse_chart(tab: &mut Table) -> CResult<Chart> {
    let present: Vec<&str> =
        CHART_SECTIONS.iter().copied().filter(|s| tab.has_section(s)).collect();
    match present.len() {
        0 => {
            return Err(ConfigError::general(
                "no parameter chart: provide exactly one of the sections `physical`, \
                 `nondim`, `hat`",
            ))
        }
        1 => {}
        _ => {
            let line = present.iter().filter_map(|s| tab.section_line(s)).max();
            let names = present.join("` and `");
            return Err(ConfigError {
                line,
                msg: format!(
                    "conflicting parameter charts: sections `{names}` are both present, \
                     but exactly one of physical/nondim/hat is allowed"
                ),
            });
        }
    }
    Ok(match present[0] {
        "physical" => Chart::Physical(PhysicalParams {
            density: required_f64(tab, "physical", "density")?,
            specific_heat: required_f64(tab, "physical", "specific_heat")?,
            conductivity: required_f64(tab, "physical", "conductivity")?,
            kinetic_coeff: required_f64(tab, "physical", "kinetic_coeff")?,
            surface_tension: required_f64(tab, "physical", "surface_tension")?,
            latent_heat: required_f64(tab, "physical", "latent_heat")?,
            melt_temperature: required_f64(tab, "physical", "melt_temperature")?,
            temp_scale: required_f64(tab, "physical", "temp_scale")?,
            interface_width: required_f64(tab, "physical", "interface_width")?,
            domain_length: required_f64(tab, "physical", "domain_length")?,
            time_scale: required_f64(tab, "physical", "time_scale")?,
        }),
        "nondim" => Chart::Nondim(NondimParams {
            eps: required_f64(tab, "nondim", "eps")?,
            pe: required_f64(tab, "nondim", "pe")?,
            alpha: required_f64(tab, "nondim", "alpha")?,
            theta: required_f64(tab, "nondim", "theta")?,
            beta: required_f64(tab, "nondim", "beta")?,
            st: required_f64(tab, "nondim", "st")?,
        }),
        "hat" => Chart::Hat(HatParams {
            alpha_hat: required_f64(tab, "hat", "alpha_hat")?,
            beta_hat: required_f64(tab, "hat", "beta_hat")?,
            gamma: required_f64(tab, "hat", "gamma")?,
            delta: required_f64(tab, "hat", "delta")?,
            eps: required_f64(tab, "hat", "eps")?,
            theta: required_f64(tab, "hat", "theta")?,
        }),
        _ => unreachable!(),
    })
}

/// Parse and validate a configuration from text.
pub fn parse_config_str(text: &str) -> CResult<RunConfig> {
    let mut tab = Table::scan(text)?;

    let mode = match tab.take("run.mode") {
        Some(e) => match Mode::from_name(&e.value) {
            Some(m) => Some(m),
            None => {
                return Err(ConfigError::at(
                    e.line,
                    format!(
                        "key `run.mode`: unknown mode `{}` (expected run|profile|sweep|\
                         galerkin|stefan-compare|diagnose)",
                        e.value
                    ),
                ))
            }
        },
        None => None,
    };

    let chart = parse_chart(&mut tab)?;

    let potential =
        tab.take("potential.name").map(|e| e.value).unwrap_or_else(|| "quartic".to_string());

    let form = match tab.take("model.form") {
        Some(e) => ModelForm::from_name(&e.value)
            .map_err(|err| ConfigError::at(e.line, format!("key `model.form`: {err}")))?,
        None => ModelForm::Full,
    };

    let grid = GridSpec {
        dim: opt(&mut tab, "grid.dim", parse_usize)?.unwrap_or(1),
        nx: opt(&mut tab, "grid.nx", parse_usize)?.unwrap_or(256),
        ny: opt(&mut tab, "grid.ny", parse_usize)?.unwrap_or(256),
        len_x: opt(&mut tab, "grid.len_x", parse_f64)?.unwrap_or(1.0),
        len_y: opt(&mut tab, "grid.len_y", parse_f64)?.unwrap_or(1.0),
    };
    if grid.dim != 1 && grid.dim != 2 {
        return Err(ConfigError::general(format!(
            "key `grid.dim`: dimension must be 1 or 2, got {}",
            grid.dim
        )));
    }

    let boundary = {
        let kind = tab.take("boundary.kind");
        let gamma_entry = tab.take("boundary.gamma_faces");
        let q_b = opt(&mut tab, "boundary.q_b", parse_f64)?;
        let t_b = opt(&mut tab, "boundary.t_b", parse_f64)?;
        let (kind_name, kind_line) = match &kind {
            Some(e) => (e.value.clone(), e.line),
            None => ("no-flux".to_string(), 0),
        };
        match kind_name.as_str() {
            "no-flux" => BoundaryKind::NoFlux,
            "mixed" => {
                let gamma_faces = match &gamma_entry {
                    Some(e) => {
                        let mut faces = Vec::new();
                        for word in e.value.split(',') {
                            faces.push(parse_face("boundary.gamma_faces", e.line, word.trim())?);
                        }
                        faces
                    }
                    None => vec![Face::Left],
                };
                BoundaryKind::Mixed {
                    gamma_faces,
                    q_b: q_b.unwrap_or(0.0),
                    t_b: t_b.unwrap_or(0.0),
                }
            }
            other => {
                return Err(ConfigError::at(
                    kind_line,
                    format!("key `boundary.kind`: unknown kind `{other}` (expected no-flux|mixed)"),
                ))
            }
        }
    };

    let initial = {
        let kind = tab.take("initial.kind");
        let phi = opt(&mut tab, "initial.phi", parse_f64)?;
        let temp = opt(&mut tab, "initial.temp", parse_f64)?;
        let position = opt(&mut tab, "initial.front_position", parse_f64)?;
        let solid_side = match tab.take("initial.solid_side") {
            Some(e) => Some(match e.value.as_str() {
                "left" => Side::Left,
                "right" => Side::Right,
                other => {
                    return Err(ConfigError::at(
                        e.line,
                        format!(
                            "key `initial.solid_side`: unknown side `{other}` \
                             (expected left|right)"
                        ),
                    ))
                }
            }),
            None => None,
        };
        let radius = opt(&mut tab, "initial.radius", parse_f64)?;
        let center_x = opt(&mut tab, "initial.center_x", parse_f64)?;
        let center_y = opt(&mut tab, "initial.center_y", parse_f64)?;
        let path = tab.take("initial.path");
        let (kind_name, kind_line) = match &kind {
            Some(e) => (e.value.clone(), e.line),
            None => ("pure-phase".to_string(), 0),
        };
        match kind_name.as_str() {
            "pure-phase" => InitialSpec::PurePhase {
                phi: phi.unwrap_or(1.0),
                temp: temp.unwrap_or(0.0),
            },
            "front" => InitialSpec::Front {
                position: position.unwrap_or(0.5),
                temp: temp.unwrap_or(0.0),
                solid_side: solid_side.unwrap_or(Side::Left),
            },
            "bubble" => InitialSpec::Bubble {
                radius: radius.unwrap_or(0.25),
                center_x: center_x.unwrap_or(0.5),
                center_y: center_y.unwrap_or(0.5),
                temp: temp.unwrap_or(0.0),
            },
            "file" => {
                let Some(e) = path else {
                    return Err(ConfigError::general(
                        "missing mandatory key `initial.path` (required when initial.kind = file)",
                    ));
                };
                let p = PathBuf::from(&e.value);
                if !p.exists() {
                    return Err(ConfigError::at(
                        e.line,
                        format!("key `initial.path`: referenced file does not exist: {}", e.value),
                    ));
                }
                InitialSpec::File { path: p }
            }
            other => {
                return Err(ConfigError::at(
                    kind_line,
                    format!(
                        "key `initial.kind`: unknown kind `{other}` \
                         (expected pure-phase|front|bubble|file)"
                    ),
                ))
            }
        }
    };

    let time = TimeSpec {
        dt: opt(&mut tab, "time.dt", parse_f64)?,
        t_end: opt(&mut tab, "time.t_end", parse_f64)?.unwrap_or(1.0),
        diag_every: opt(&mut tab, "time.diag_every", parse_usize)?.unwrap_or(10),
    };

    let sweep = {
        let eps_list = match tab.take("sweep.eps_list") {
            Some(e) => {
                let mut list = Vec::new();
                for word in e.value.split(',') {
                    let word = word.trim();
                    list.push(word.parse::<f64>().map_err(|_| {
                        ConfigError::at(
                            e.line,
                            format!("key `sweep.eps_list`: `{word}` is not a number"),
                        )
                    })?);
                }
                list
            }
            None => vec![0.08, 0.04, 0.02, 0.01],
        };
        let scenario = match tab.take("sweep.scenario") {
            Some(e) => match e.value.as_str() {
                "planar" => SweepScenario::Planar1d,
                "radial" => SweepScenario::Radial2d,
                other => {
                    return Err(ConfigError::at(
                        e.line,
                        format!(
                            "key `sweep.scenario`: unknown scenario `{other}` \
                             (expected planar|radial)"
                        ),
                    ))
                }
            },
            None => SweepScenario::Planar1d,
        };
        SweepSpec { eps_list, scenario, theta: opt(&mut tab, "sweep.theta", parse_f64)? }
    };

    let galerkin =
        GalerkinSpec { n_modes: opt(&mut tab, "galerkin.n_modes", parse_usize)?.unwrap_or(16) };

    let stefan = {
        let law = match tab.take("stefan.law") {
            Some(e) => match e.value.as_str() {
                "full" => JumpLaw::Full,
                "linear" => JumpLaw::Linear,
                other => {
                    return Err(ConfigError::at(
                        e.line,
                        format!("key `stefan.law`: unknown law `{other}` (expected full|linear)"),
                    ))
                }
            },
            None => JumpLaw::Full,
        };
        StefanSpec {
            law,
            n_cells: opt(&mut tab, "stefan.n_cells", parse_usize)?.unwrap_or(512),
            sample_dt: opt(&mut tab, "stefan.sample_dt", parse_f64)?.unwrap_or(0.02),
        }
    };

    // Everything legal has been consumed; anything left is unknown.
    if let Some((key, entry)) = tab.entries.iter().min_by_key(|(_, e)| e.line) {
        return Err(ConfigError::at(entry.line, format!("unknown key `{key}`")));
    }

    Ok(RunConfig {
        mode,
        chart,
        potential,
        form,
        grid,
        boundary,
        initial,
        time,
        sweep,
        galerkin,
        stefan,
    })
}

/// Parse a configuration file.
pub fn parse_config(path: &Path) -> CResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigError::general(format!("cannot read config {}: {e}", path.display()))
    })?;
    parse_config_str(&text)
}

fn face_name(face: Face) -> &'static str {
    match face {
        Face::Left => "left",
        Face::Right => "right",
        Face::Bottom => "bottom",
        Face::Top => "top",
    }
}

/// Serialize a resolved config; `parse_config_str(&emit(c)) == Ok(c)`.
pub fn emit(cfg: &RunConfig) -> String {
    use fmt::Write;
    let mut s = String::new();
    let out = &mut s;
    if let Some(mode) = cfg.mode {
        let _ = writeln!(out, "run.mode = {}", mode.name());
    }
    match &cfg.chart {
        Chart::Physical(p) => {
            let _ = writeln!(out, "physical.density = {}", p.density);
            let _ = writeln!(out, "physical.specific_heat = {}", p.specific_heat);
            let _ = writeln!(out, "physical.conductivity = {}", p.conductivity);
            let _ = writeln!(out, "physical.kinetic_coeff = {}", p.kinetic_coeff);
            let _ = writeln!(out, "physical.surface_tension = {}", p.surface_tension);
            let _ = writeln!(out, "physical.latent_heat = {}", p.latent_heat);
            let _ = writeln!(out, "physical.melt_temperature = {}", p.melt_temperature);
            let _ = writeln!(out, "physical.temp_scale = {}", p.temp_scale);
            let _ = writeln!(out, "physical.interface_width = {}", p.interface_width);
            let _ = writeln!(out, "physical.domain_length = {}", p.domain_length);
            let _ = writeln!(out, "physical.time_scale = {}", p.time_scale);
        }
        Chart::Nondim(n) => {
            let _ = writeln!(out, "nondim.eps = {}", n.eps);
            let _ = writeln!(out, "nondim.pe = {}", n.pe);
            let _ = writeln!(out, "nondim.alpha = {}", n.alpha);
            let _ = writeln!(out, "nondim.theta = {}", n.theta);
            let _ = writeln!(out, "nondim.beta = {}", n.beta);
            let _ = writeln!(out, "nondim.st = {}", n.st);
        }
        Chart::Hat(h) => {
            let _ = writeln!(out, "hat.alpha_hat = {}", h.alpha_hat);
            let _ = writeln!(out, "hat.beta_hat = {}", h.beta_hat);
            let _ = writeln!(out, "hat.gamma = {}", h.gamma);
            let _ = writeln!(out, "hat.delta = {}", h.delta);
            let _ = writeln!(out, "hat.eps = {}", h.eps);
            let _ = writeln!(out, "hat.theta = {}", h.theta);
        }
    }
    let _ = writeln!(out, "potential.name = {}", cfg.potential);
    let _ = writeln!(out, "model.form = {}", cfg.form.name());
    let _ = writeln!(out, "grid.dim = {}", cfg.grid.dim);
    let _ = writeln!(out, "grid.nx = {}", cfg.grid.nx);
    let _ = writeln!(out, "grid.ny = {}", cfg.grid.ny);
    let _ = writeln!(out, "grid.len_x = {}", cfg.grid.len_x);
    let _ = writeln!(out, "grid.len_y = {}", cfg.grid.len_y);
    match &cfg.boundary {
        BoundaryKind::NoFlux => {
            let _ = writeln!(out, "boundary.kind = no-flux");
        }
        BoundaryKind::Mixed { gamma_faces, q_b, t_b } => {
            let _ = writeln!(out, "boundary.kind = mixed");
            let names: Vec<&str> = gamma_faces.iter().map(|f| face_name(*f)).collect();
            let _ = writeln!(out, "boundary.gamma_faces = {}", names.join(","));
            let _ = writeln!(out, "boundary.q_b = {q_b}");
            let _ = writeln!(out, "boundary.t_b = {t_b}");
        }
    }
    match &cfg.initial {
        InitialSpec::PurePhase { phi, temp } => {
            let _ = writeln!(out, "initial.kind = pure-phase");
            let _ = writeln!(out, "initial.phi = {phi}");
            let _ = writeln!(out, "initial.temp = {temp}");
        }
        InitialSpec::Front { position, temp, solid_side } => {
            let _ = writeln!(out, "initial.kind = front");
            let _ = writeln!(out, "initial.front_position = {position}");
            let _ = writeln!(out, "initial.temp = {temp}");
            let side = match solid_side {
                Side::Left => "left",
                Side::Right => "right",
            };
            let _ = writeln!(out, "initial.solid_side = {side}");
        }
        InitialSpec::Bubble { radius, center_x, center_y, temp } => {
            let _ = writeln!(out, "initial.kind = bubble");
            let _ = writeln!(out, "initial.radius = {radius}");
            let _ = writeln!(out, "initial.center_x = {center_x}");
            let _ = writeln!(out, "initial.center_y = {center_y}");
            let _ = writeln!(out, "initial.temp = {temp}");
        }
        InitialSpec::File { path } => {
            let _ = writeln!(out, "initial.kind = file");
            let _ = writeln!(out, "initial.path = {}", path.display());
        }
    }
    if let Some(dt) = cfg.time.dt {
        let _ = writeln!(out, "time.dt = {dt}");
    }
    let _ = writeln!(out, "time.t_end = {}", cfg.time.t_end);
    let _ = writeln!(out, "time.diag_every = {}", cfg.time.diag_every);
    let eps: Vec<String> = cfg.sweep.eps_list.iter().map(|e| e.to_string()).collect();
    let _ = writeln!(out, "sweep.eps_list = {}", eps.join(","));
    let scenario = match cfg.sweep.scenario {
        SweepScenario::Planar1d => "planar",
        SweepScenario::Radial2d => "radial",
    };
    let _ = writeln!(out, "sweep.scenario = {scenario}");
    if let Some(theta) = cfg.sweep.theta {
        let _ = writeln!(out, "sweep.theta = {theta}");
    }
    let _ = writeln!(out, "galerkin.n_modes = {}", cfg.galerkin.n_modes);
    let law = match cfg.stefan.law {
        JumpLaw::Full => "full",
        JumpLaw::Linear => "linear",
    };
    let _ = writeln!(out, "stefan.law = {law}");
    let _ = writeln!(out, "stefan.n_cells = {}", cfg.stefan.n_cells);
    let _ = writeln!(out, "stefan.sample_dt = {}", cfg.stefan.sample_dt);
    s
}
