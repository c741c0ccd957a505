//! Run configuration: a flat `key = value` file (TOML syntax) or a flat JSON
//! object, plus command-line overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use nahn_core::circuit::MAX_CONDITION;
use nahn_core::skin::{DEFAULT_THRESHOLD, DEFAULT_WINDOW_FRACTION};
use nahn_core::topology::{DEFAULT_EP_TOL, DEFAULT_KPOINTS};
use nahn_core::{BoundaryCondition, CircuitParams, GaugeVector, KGrid, ModelParams, Protocol};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MODEL_KEYS: [&str; 5] = ["t0", "tL", "tR", "dL", "dR"];
pub const CIRCUIT_KEYS: [&str; 8] = [
    "C0_nF",
    "C1_nF",
    "C2_nF",
    "L0_uH",
    "L1_uH",
    "R0_ohm",
    "omega_rad_s",
    "include_R0",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Spectrum,
    #[value(alias = "phase_diagram")]
    PhaseDiagram,
    Skin,
    Measure,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::PhaseDiagram => "phase-diagram",
            Command::Skin => "skin",
            Command::Measure => "measure",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "spectrum" => Some(Command::Spectrum),
            "phase-diagram" | "phase_diagram" => Some(Command::PhaseDiagram),
            "skin" => Some(Command::Skin),
            "measure" => Some(Command::Measure),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Values given on the command line; they win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub kpoints: Option<usize>,
    pub ep_tol: Option<f64>,
}

/// Lattice block. Hopping amplitudes are optional because the phase diagram
/// sweeps them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelBlock {
    pub t0: f64,
    pub t_left: Option<f64>,
    pub t_right: Option<f64>,
    pub d_left: GaugeVector,
    pub d_right: GaugeVector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum System {
    Lattice(ModelBlock),
    Circuit(CircuitParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub system: System,
    pub sites: usize,
    pub boundary: BoundaryCondition,
    pub kpoints: usize,
    pub ep_tol: f64,
    pub t_range: (f64, f64),
    pub resolution: usize,
    pub chain_sites: usize,
    pub window_fraction: f64,
    pub threshold: f64,
    pub protocol: Protocol,
    pub sigma: f64,
    pub seed: u64,
    pub seeds: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

struct Source {
    text: String,
    json: bool,
    map: BTreeMap<String, Value>,
    used: BTreeSet<String>,
}

impl Source {
    fn parse(path: &Path, text: String) -> Result<Self, CliError> {
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let value = if json {
            serde_json::from_str::<Value>(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else {
            let table: toml::Table = text
                .parse()
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            serde_json::to_value(table).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        };
        let Value::Object(obj) = value else {
            return Err(CliError::Config(format!(
                "{}: expected a flat set of key/value pairs",
                path.display()
            )));
        };
        let src = Self {
            text,
            json,
            map: obj.into_iter().collect(),
            used: BTreeSet::new(),
        };
        if let Some((key, _)) = src.map.iter().find(|(_, v)| v.is_object()) {
            return Err(src.err(key, "nested tables are not supported; use flat keys"));
        }
        Ok(src)
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.text.lines().position(|line| {
            let line = line.trim_start();
            if self.json {
                line.starts_with(&format!("\"{key}\""))
            } else {
                line.strip_prefix(key)
                    .is_some_and(|rest| rest.trim_start().starts_with('='))
            }
        })
    }

    fn err(&self, key: &str, reason: impl std::fmt::Display) -> CliError {
        match self.line_of(key) {
            Some(l) => CliError::Config(format!("line {}, key `{key}`: {reason}", l + 1)),
            None => CliError::Config(format!("key `{key}`: {reason}")),
        }
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.used.insert(key.to_string());
        self.map.get(key).cloned()
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(self.err(key, format!("expected a finite number, got {v}"))),
            },
        }
    }

    fn u64(&mut self, key: &str) -> Result<Option<u64>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| self.err(key, format!("expected a non-negative integer, got {v}"))),
        }
    }

    fn usize(&mut self, key: &str) -> Result<Option<usize>, CliError> {
        Ok(self.u64(key)?.map(|n| n as usize))
    }

    fn string(&mut self, key: &str) -> Result<Option<String>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(self.err(key, format!("expected a string, got {v}"))),
        }
    }

    fn bool(&mut self, key: &str) -> Result<Option<bool>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(b)),
            Some(v) => Err(self.err(key, format!("expected true or false, got {v}"))),
        }
    }

    fn gauge(&mut self, key: &str) -> Result<Option<GaugeVector>, CliError> {
        let Some(v) = self.take(key) else { return Ok(None) };
        let xs: Option<Vec<f64>> = v.as_array().map(|a| a.iter().filter_map(Value::as_f64).collect());
        match xs.as_deref() {
            Some(&[x, y, z]) if v.as_array().is_some_and(|a| a.len() == 3) => {
                GaugeVector::new(x, y, z).map(Some).map_err(|e| self.core_err(key, e))
            }
            _ => Err(self.err(key, format!("expected a unit vector [x, y, z], got {v}"))),
        }
    }

    fn core_err(&self, fallback: &str, e: nahn_core::Error) -> CliError {
        match e {
            nahn_core::Error::Validation { key, reason } => {
                let k = if self.has(&key) { key } else { fallback.to_string() };
                self.err(&k, reason)
            }
            other => self.err(fallback, other),
        }
    }

    fn require<T>(&self, key: &str, v: Option<T>) -> Result<T, CliError> {
        v.ok_or_else(|| CliError::Config(format!("missing key `{key}`")))
    }
}

impl RunConfig {
    pub fn load(path: &Path, command: Command, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(path, text, command, overrides)
    }

    /// `path` only decides the syntax (JSON when it ends in `.json`) and
    /// labels diagnostics.
    pub fn parse(path: &Path, text: String, command: Command, overrides: &Overrides) -> Result<Self, CliError> {
        let mut src = Source::parse(path, text)?;

        if let Some(c) = src.string("command")? {
            match Command::parse(&c) {
                Some(c) if c == command => {}
                Some(c) => {
                    return Err(src.err(
                        "command",
                        format!("config is for `{}` but `{}` was requested", c.name(), command.name()),
                    ))
                }
                None => return Err(src.err("command", format!("unknown command `{c}`"))),
            }
        }

        let has_model = MODEL_KEYS.iter().any(|k| src.has(k));
        let has_circuit = CIRCUIT_KEYS.iter().any(|k| src.has(k));
        let system = match (has_model, has_circuit) {
            (true, true) => {
                let m = MODEL_KEYS.iter().find(|k| src.has(k)).unwrap();
                let c = CIRCUIT_KEYS.iter().find(|k| src.has(k)).unwrap();
                return Err(CliError::Config(format!(
                    "config mixes model key `{m}` with circuit key `{c}`; give exactly one parameter block"
                )));
            }
            (false, false) => {
                return Err(CliError::Config(format!(
                    "no parameter block: give model keys ({}) or circuit keys ({})",
                    MODEL_KEYS.join(", "),
                    CIRCUIT_KEYS.join(", ")
                )))
            }
            (true, false) => System::Lattice(model_block(&mut src)?),
            (false, true) => System::Circuit(circuit_block(&mut src)?),
        };

        let protocol_key = src.string("protocol")?;
        let protocol = match protocol_key.as_deref() {
            None => None,
            Some("pbc_unit_cell") => Some(Protocol::PbcUnitCell),
            Some("obc_all_nodes") => Some(Protocol::ObcAllNodes),
            Some(other) => {
                return Err(src.err(
                    "protocol",
                    format!("expected \"pbc_unit_cell\" or \"obc_all_nodes\", got \"{other}\""),
                ))
            }
        };
        let boundary = match src.string("boundary")?.as_deref() {
            None => None,
            Some("pbc") => Some(BoundaryCondition::Pbc),
            Some("obc") => Some(BoundaryCondition::Obc),
            Some(other) => return Err(src.err("boundary", format!("expected \"pbc\" or \"obc\", got \"{other}\""))),
        };
        let (boundary, protocol) = match (command, boundary, protocol) {
            (Command::Skin, Some(BoundaryCondition::Pbc), _) => {
                return Err(src.err("boundary", "skin analysis runs on open chains; set boundary = \"obc\""))
            }
            (Command::Skin, _, p) => (BoundaryCondition::Obc, p.unwrap_or(Protocol::ObcAllNodes)),
            (_, Some(b), Some(p)) if p.boundary() != b => {
                return Err(src.err("protocol", format!("protocol {p:?} does not match boundary = \"{b}\"")))
            }
            (_, _, Some(p)) => (p.boundary(), p),
            (_, Some(b), None) => (b, protocol_for(b)),
            (_, None, None) => (BoundaryCondition::Pbc, Protocol::PbcUnitCell),
        };

        let default_sites = match (command, protocol) {
            (Command::Measure, Protocol::PbcUnitCell) => 19,
            (Command::Measure, Protocol::ObcAllNodes) => 47,
            _ => 100,
        };
        let sites = src.usize("N")?.unwrap_or(default_sites);
        if sites < 2 {
            return Err(src.err("N", "chain needs at least 2 sites"));
        }

        let kpoints = overrides.kpoints.or(src.usize("kpoints")?).unwrap_or(DEFAULT_KPOINTS);
        KGrid::new(kpoints).map_err(|e| src.core_err("kpoints", e))?;
        let ep_tol = overrides.ep_tol.or(src.f64("ep_tol")?).unwrap_or(DEFAULT_EP_TOL);
        if !(ep_tol.is_finite() && ep_tol > 0.0) {
            return Err(src.err("ep_tol", format!("must be positive, got {ep_tol}")));
        }

        let t_min = src.f64("t_min")?.unwrap_or(0.0);
        let t_max = src.f64("t_max")?.unwrap_or(4.0);
        if !(t_min >= 0.0 && t_max > t_min) {
            return Err(src.err("t_max", format!("need 0 <= t_min < t_max, got ({t_min}, {t_max})")));
        }
        let resolution = src.usize("resolution")?.unwrap_or(50);
        if resolution < 2 {
            return Err(src.err("resolution", "need at least 2 cells per axis"));
        }
        let chain_sites = src.usize("chain_N")?.unwrap_or(100);
        if chain_sites < 4 {
            return Err(src.err("chain_N", "skin layer needs at least 4 sites"));
        }

        let window_fraction = src.f64("window_fraction")?.unwrap_or(DEFAULT_WINDOW_FRACTION);
        if !(window_fraction > 0.0 && window_fraction < 0.5) {
            return Err(src.err(
                "window_fraction",
                format!("must lie in (0, 0.5), got {window_fraction}"),
            ));
        }
        let threshold = src.f64("threshold")?.unwrap_or(DEFAULT_THRESHOLD);
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(src.err("threshold", format!("must lie in (0, 1), got {threshold}")));
        }

        let sigma = src.f64("sigma")?.unwrap_or(0.0);
        if sigma < 0.0 {
            return Err(src.err("sigma", format!("must be non-negative, got {sigma}")));
        }
        let seed = overrides.seed.or(src.u64("seed")?).unwrap_or(0);
        let seeds = src.usize("seeds")?.unwrap_or(1);
        if seeds == 0 {
            return Err(src.err("seeds", "need at least one seed"));
        }

        let out = overrides.out.clone().or(src.string("out")?.map(PathBuf::from));
        let file_format = match src.string("format")?.as_deref() {
            None => None,
            Some("csv") => Some(Format::Csv),
            Some("json") => Some(Format::Json),
            Some(other) => return Err(src.err("format", format!("expected \"csv\" or \"json\", got \"{other}\""))),
        };
        let format = match overrides.format.or(file_format) {
            Some(f) => f,
            None if out.as_ref().and_then(|p| p.extension()).is_some_and(|e| e == "json") => Format::Json,
            None => Format::Csv,
        };

        if let Some(key) = src.map.keys().find(|k| !src.used.contains(*k)) {
            return Err(src.err(key, "unknown key"));
        }

        let cfg = Self {
            command,
            system,
            sites,
            boundary,
            kpoints,
            ep_tol,
            t_range: (t_min, t_max),
            resolution,
            chain_sites,
            window_fraction,
            threshold,
            protocol,
            sigma,
            seed,
            seeds,
            out,
            format,
        };
        cfg.check_command(&src)?;
        Ok(cfg)
    }

    fn check_command(&self, src: &Source) -> Result<(), CliError> {
        match (self.command, &self.system) {
            (Command::Spectrum | Command::Skin, System::Lattice(m)) => {
                src.require("tL", m.t_left)?;
                src.require("tR", m.t_right)?;
            }
            (Command::PhaseDiagram, System::Lattice(m)) => {
                if m.t0 != 1.0 {
                    return Err(src.err("t0", "the phase diagram is drawn at t0 = 1"));
                }
                if m.t_left.is_some() || m.t_right.is_some() {
                    let key = if m.t_left.is_some() { "tL" } else { "tR" };
                    return Err(src.err(key, "the phase diagram sweeps tL and tR; use t_min/t_max instead"));
                }
            }
            (Command::PhaseDiagram, System::Circuit(_)) => {
                return Err(CliError::Config(
                    "phase-diagram needs a model block (t0, dL, dR)".into(),
                ))
            }
            (Command::Measure, System::Lattice(_)) => {
                return Err(CliError::Config(
                    "measure needs a circuit block (C0_nF, C1_nF, ...)".into(),
                ))
            }
            _ => {}
        }
        if matches!(self.command, Command::Skin | Command::Measure) && self.sites < 4 {
            return Err(src.err("N", "skin analysis needs at least 4 sites"));
        }
        if self.command == Command::Measure && self.protocol == Protocol::PbcUnitCell && self.sites < 3 {
            return Err(src.err("N", "the unit-cell protocol needs at least 3 sites"));
        }
        Ok(())
    }

    /// Lattice parameters with both hoppings; only valid after the command
    /// check for spectrum and skin runs.
    pub fn model(&self) -> Option<ModelParams> {
        match self.system {
            System::Lattice(m) => ModelParams::new(m.t0, m.t_left?, m.t_right?, m.d_left, m.d_right).ok(),
            System::Circuit(_) => None,
        }
    }

    /// Resolved settings as a canonical JSON object. The output path is
    /// left out so files written to different places stay identical.
    pub fn canonical(&self) -> Value {
        let system = match &self.system {
            System::Lattice(m) => json!({
                "t0": m.t0,
                "tL": m.t_left,
                "tR": m.t_right,
                "dL": m.d_left.components(),
                "dR": m.d_right.components(),
            }),
            System::Circuit(c) => serde_json::to_value(c).expect("circuit parameters serialize"),
        };
        json!({
            "command": self.command.name(),
            "system": system,
            "N": self.sites,
            "boundary": self.boundary.to_string(),
            "kpoints": self.kpoints,
            "ep_tol": self.ep_tol,
            "t_min": self.t_range.0,
            "t_max": self.t_range.1,
            "resolution": self.resolution,
            "chain_N": self.chain_sites,
            "window_fraction": self.window_fraction,
            "threshold": self.threshold,
            "protocol": self.protocol,
            "sigma": self.sigma,
            "seed": self.seed,
            "seeds": self.seeds,
            "format": match self.format { Format::Csv => "csv", Format::Json => "json" },
        })
    }

    pub fn config_hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.canonical()).expect("canonical config serializes");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Numerical tolerances in force for this run.
    pub fn tolerances(&self) -> Value {
        use nahn_core::topology::{INTEGRALITY_TOL, MAX_PHASE_STEP, ON_SPECTRUM_TOL};
        json!({
            "integrality": INTEGRALITY_TOL,
            "max_phase_step": MAX_PHASE_STEP,
            "ep_tol": self.ep_tol,
            "on_spectrum": ON_SPECTRUM_TOL,
            "max_condition": MAX_CONDITION,
            "window_fraction": self.window_fraction,
            "threshold": self.threshold,
        })
    }
}

fn protocol_for(b: BoundaryCondition) -> Protocol {
    match b {
        BoundaryCondition::Pbc => Protocol::PbcUnitCell,
        BoundaryCondition::Obc => Protocol::ObcAllNodes,
    }
}

fn model_block(src: &mut Source) -> Result<ModelBlock, CliError> {
    let block = ModelBlock {
        t0: src.f64("t0")?.unwrap_or(1.0),
        t_left: src.f64("tL")?,
        t_right: src.f64("tR")?,
        d_left: src.gauge("dL")?.unwrap_or(GaugeVector::Z),
        d_right: src.gauge("dR")?.unwrap_or(GaugeVector::X),
    };
    ModelParams::new(
        block.t0,
        block.t_left.unwrap_or(0.0),
        block.t_right.unwrap_or(0.0),
        block.d_left,
        block.d_right,
    )
    .map_err(|e| src.core_err("t0", e))?;
    Ok(block)
}

fn circuit_block(src: &mut Source) -> Result<CircuitParams, CliError> {
    let mut get = |key: &str| -> Result<f64, CliError> {
        let v = src.f64(key)?;
        src.require(key, v)
    };
    let c = CircuitParams {
        c0_nf: get("C0_nF")?,
        c1_nf: get("C1_nF")?,
        c2_nf: get("C2_nF")?,
        l0_uh: get("L0_uH")?,
        l1_uh: get("L1_uH")?,
        r0_ohm: get("R0_ohm")?,
        omega: src.f64("omega_rad_s")?,
        include_resistor: src.bool("include_R0")?.unwrap_or(true),
    };
    c.validate().map_err(|e| src.core_err("C0_nF", e))?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(name: &str, text: &str, command: Command) -> Result<RunConfig, CliError> {
        RunConfig::parse(Path::new(name), text.to_string(), command, &Overrides::default())
    }

    #[test]
    fn flat_toml_model() {
        let cfg = parse(
            "p1.toml",
            "t0 = 1\ntL = 1.0\ntR = 3\nN = 60\nboundary = \"obc\"\n",
            Command::Spectrum,
        )
        .unwrap();
        let p = cfg.model().unwrap();
        assert_eq!((p.t0, p.t_left, p.t_right), (1.0, 1.0, 3.0));
        assert_eq!(cfg.sites, 60);
        assert_eq!(cfg.boundary, BoundaryCondition::Obc);
        assert_eq!(cfg.kpoints, 1024);
    }

    #[test]
    fn json_matches_toml() {
        let a = parse("a.toml", "tL = 1.2\ntR = 0.9\ndL = [0, 0, 1]\n", Command::Skin).unwrap();
        let b = parse("a.json", "{\"tL\": 1.2, \"tR\": 0.9, \"dL\": [0, 0, 1]}", Command::Skin).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn errors_name_key_and_line() {
        let e = parse("x.toml", "tL = 1\ntR = 3\nbogus = 2\n", Command::Spectrum).unwrap_err();
        assert_eq!(e.to_string(), "config error: line 3, key `bogus`: unknown key");
        let e = parse("x.toml", "tL = 1\ntR = \"three\"\n", Command::Spectrum).unwrap_err();
        assert!(e.to_string().contains("line 2, key `tR`"), "{e}");
        let e = parse("x.toml", "tL = 1\n", Command::Spectrum).unwrap_err();
        assert!(e.to_string().contains("missing key `tR`"));
        let e = parse("x.toml", "tL = 1\ntR = 1\ndL = [1, 1, 0]\n", Command::Spectrum).unwrap_err();
        assert!(e.to_string().contains("key `dL`"), "{e}");
        assert!(parse("x.toml", "tL = [1\n", Command::Spectrum)
            .unwrap_err()
            .to_string()
            .contains("line 1"));
    }

    #[test]
    fn exactly_one_block() {
        let e = parse("x.toml", "tL = 1\ntR = 1\nC0_nF = 10\n", Command::Spectrum).unwrap_err();
        assert!(e.to_string().contains("exactly one"));
        assert!(parse("x.toml", "N = 10\n", Command::Spectrum).is_err());
    }

    #[test]
    fn circuit_block_and_measure_defaults() {
        let text = "C0_nF = 10\nC1_nF = 20\nC2_nF = 30\nL0_uH = 0.95\nL1_uH = 4.4\nR0_ohm = 3.9\nprotocol = \"obc_all_nodes\"\n";
        let cfg = parse("c.toml", text, Command::Measure).unwrap();
        assert_eq!(cfg.sites, 47);
        assert_eq!(cfg.boundary, BoundaryCondition::Obc);
        let e = parse("c.toml", &text.replace("R0_ohm = 3.9", "R0_ohm = -1"), Command::Measure).unwrap_err();
        assert!(e.to_string().contains("line 6, key `R0_ohm`"), "{e}");
        let e = parse("c.toml", &format!("{text}boundary = \"pbc\"\n"), Command::Measure).unwrap_err();
        assert!(e.to_string().contains("key `protocol`"));
    }

    #[test]
    fn command_mismatches() {
        assert!(parse("x.toml", "tL = 1\ntR = 1\ncommand = \"skin\"\n", Command::Spectrum).is_err());
        assert!(parse("x.toml", "tL = 1\ntR = 1\n", Command::Measure).is_err());
        assert!(parse("x.toml", "tL = 1\ntR = 1\n", Command::PhaseDiagram).is_err());
        assert!(parse("x.toml", "dL = [0, 0, 1]\n", Command::PhaseDiagram).is_ok());
        assert!(parse("x.toml", "tL = 1\ntR = 1\nboundary = \"pbc\"\n", Command::Skin).is_err());
    }

    #[test]
    fn overrides_win_and_skip_out_in_hash() {
        let text = "tL = 1\ntR = 3\nkpoints = 256\nout = \"a.csv\"\n";
        let base = parse("x.toml", text, Command::Spectrum).unwrap();
        let o = Overrides {
            kpoints: Some(512),
            out: Some(PathBuf::from("elsewhere.json")),
            ..Default::default()
        };
        let cfg = RunConfig::parse(Path::new("x.toml"), text.into(), Command::Spectrum, &o).unwrap();
        assert_eq!(cfg.kpoints, 512);
        assert_eq!(cfg.format, Format::Json);
        let moved = Overrides {
            out: Some(PathBuf::from("b.csv")),
            ..Default::default()
        };
        let same = RunConfig::parse(Path::new("x.toml"), text.into(), Command::Spectrum, &moved).unwrap();
        assert_eq!(base.config_hash(), same.config_hash());
        assert!(parse("x.toml", "tL = 1\ntR = 3\nkpoints = 8\n", Command::Spectrum).is_err());
    }
}
