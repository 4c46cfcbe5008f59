//! Run configuration: defaults per subcommand, flat JSON config files, and
//! flag overrides, resolved into the simulator's parameter types.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qpgate::analysis::Operator;
use qpgate::gate::{adaptive_loss_cap, GateParams, HeraldOutcome, Qubit};
use qpgate::states::{make_input, FamilyKind, InputFamily};
use qpgate::FockVector;

/// A configuration problem: unparseable file, unknown key, out-of-range
/// value, or contradictory selections. Exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Fully resolved run configuration. Serialized verbatim into JSON output
/// metadata so a run can be reproduced from its own artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub t: f64,
    /// Explicit amplifier gain; ignored when `tune_gain` is set.
    pub g: Option<f64>,
    pub tune_gain: bool,
    pub eta: f64,
    /// Modelled lost photons per detector; `None` adapts to `eta`.
    pub loss_cap: Option<usize>,
    pub leak_tolerance: f64,
    pub series_order: usize,
    /// Herald pattern (H1, V1, H2, V2).
    pub herald: [usize; 4],
    /// Named programme (a | adag | x | p); overrides explicit qubit pairs.
    pub programme: Option<String>,
    /// Programme amplitudes as "re,im" pairs, used when no named programme.
    pub qubit_h: Option<String>,
    pub qubit_v: Option<String>,
    pub renormalize_qubit: bool,
    /// Gate input, e.g. "fock:1", "coherent:1.0", "cat_plus:1.2".
    pub input: String,
    pub alpha: f64,
    pub dim: usize,
    pub nbars: Vec<f64>,
    pub families: Vec<String>,
    pub operators: Vec<String>,
    pub ts: Vec<f64>,
    pub etas: Vec<f64>,
    pub out: String,
    pub format: String,
}

fn centi_range(lo: usize, hi: usize) -> Vec<f64> {
    (lo..=hi).map(|i| i as f64 / 100.0).collect()
}

impl RunConfig {
    pub fn defaults(command: &str) -> Self {
        let all_ops = vec![
            "a".to_string(),
            "adag".to_string(),
            "x".to_string(),
            "p".to_string(),
        ];
        let quadratures = vec!["x".to_string(), "p".to_string()];
        RunConfig {
            command: command.to_string(),
            t: 0.95,
            g: None,
            tune_gain: true,
            eta: 1.0,
            loss_cap: None,
            leak_tolerance: qpgate::gate::DEFAULT_LEAK_TOLERANCE,
            series_order: qpgate::gate::DEFAULT_SERIES_ORDER,
            herald: [1, 0, 0, 1],
            programme: match command {
                "fig3" => Some("x".to_string()),
                "fig4" => Some("p".to_string()),
                "gate" => Some("x".to_string()),
                _ => None,
            },
            qubit_h: None,
            qubit_v: None,
            renormalize_qubit: false,
            input: "coherent:1.0".to_string(),
            alpha: 1.0,
            dim: 8,
            nbars: (1..=60).map(|i| i as f64 / 20.0).collect(),
            families: vec![
                "coherent".to_string(),
                "cat_plus".to_string(),
                "squeezed_vacuum".to_string(),
                "tmsv_half".to_string(),
            ],
            operators: match command {
                "fig5" => quadratures,
                _ => all_ops,
            },
            ts: centi_range(80, 99),
            etas: match command {
                "fig4" => vec![0.9, 1.0],
                _ => centi_range(80, 100),
            },
            out: format!("{command}.{}", if command == "gate" { "json" } else { "csv" }),
            format: if command == "gate" { "json" } else { "csv" }.to_string(),
        }
    }

    /// Layer a flat key-value JSON config file over these defaults.
    pub fn merge_file(&mut self, path: &str) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {path}: {e}")))?;
        let overlay: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("config {path} is not valid JSON: {e}")))?;
        let serde_json::Value::Object(overlay) = overlay else {
            return err(format!("config {path} must be a flat JSON object"));
        };
        let mut base = serde_json::to_value(&*self)
            .map_err(|e| ConfigError(format!("internal config serialization: {e}")))?;
        let base_map = base.as_object_mut().expect("config serializes to an object");
        for (key, value) in overlay {
            if !base_map.contains_key(&key) {
                return err(format!("unknown config key '{key}' in {path}"));
            }
            if key == "command" {
                if value.as_str() != Some(self.command.as_str()) {
                    return err(format!(
                        "config {path} is for command '{}', invoked '{}'",
                        value.as_str().unwrap_or("?"),
                        self.command
                    ));
                }
                continue;
            }
            base_map.insert(key, value);
        }
        *self = serde_json::from_value(base)
            .map_err(|e| ConfigError(format!("config {path}: {e}")))?;
        Ok(())
    }

    /// Build the gate parameter set, validating ranges.
    pub fn gate_params(&self) -> Result<GateParams, ConfigError> {
        self.gate_params_at(self.t, self.eta)
    }

    /// Same, for one point of a (t, η) grid.
    pub fn gate_params_at(&self, t: f64, eta: f64) -> Result<GateParams, ConfigError> {
        let p = if self.tune_gain {
            GateParams::tuned(t)
        } else {
            let g = match self.g {
                Some(g) => g,
                None => return err("tune_gain is off but no explicit gain 'g' was given"),
            };
            GateParams::untuned(t, g)
        };
        let p = p
            .and_then(|p| p.with_eta(eta))
            .map_err(|e| ConfigError(e.to_string()))?;
        let [h1, v1, h2, v2] = self.herald;
        let p = p
            .with_herald(HeraldOutcome::new(h1, v1, h2, v2))
            .with_loss_cap(self.loss_cap.unwrap_or_else(|| adaptive_loss_cap(eta)));
        p.with_leak_tolerance(self.leak_tolerance)
            .and_then(|p| p.with_series_order(self.series_order))
            .map_err(|e| ConfigError(e.to_string()))
    }

    /// Resolve the programme qubit from the named programme or explicit
    /// amplitude pairs. Explicit pairs must be normalized to 1e−9 unless
    /// renormalization was requested.
    pub fn qubit(&self) -> Result<Qubit, ConfigError> {
        if let Some(name) = &self.programme {
            if self.qubit_h.is_some() || self.qubit_v.is_some() {
                return err("give either a named programme or explicit qubit amplitudes, not both");
            }
            let op: Operator = name
                .parse()
                .map_err(|e: qpgate::Error| ConfigError(e.to_string()))?;
            return Ok(op.qubit());
        }
        let (Some(h_str), Some(v_str)) = (&self.qubit_h, &self.qubit_v) else {
            return err("no programme given: set 'programme' or both 'qubit_h' and 'qubit_v'");
        };
        let h = parse_complex_pair(h_str)?;
        let v = parse_complex_pair(v_str)?;
        let norm = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if (norm - 1.0).abs() > 1e-9 && !self.renormalize_qubit {
            return err(format!(
                "programme amplitudes have norm {norm:.12}, not 1 (use renormalize_qubit to accept)"
            ));
        }
        if norm < 1e-12 {
            return err("programme amplitudes are all zero");
        }
        Qubit::new(h / norm, v / norm).map_err(|e| ConfigError(e.to_string()))
    }

    /// Parse the gate input specification "kind:parameter".
    pub fn input_state(&self) -> Result<FockVector, ConfigError> {
        let (kind, param) = self
            .input
            .split_once(':')
            .ok_or_else(|| ConfigError(format!("input '{}' is not 'kind:parameter'", self.input)))?;
        if kind == "fock" {
            let n: usize = param
                .parse()
                .map_err(|_| ConfigError(format!("fock occupation '{param}' is not an integer")))?;
            let mut amps = vec![Complex64::new(0.0, 0.0); n + 1];
            amps[n] = Complex64::new(1.0, 0.0);
            return FockVector::from_amplitudes(qpgate::ModeLabel::S, amps)
                .map_err(|e| ConfigError(e.to_string()));
        }
        let family: FamilyKind = kind
            .parse()
            .map_err(|e: qpgate::Error| ConfigError(e.to_string()))?;
        let value: f64 = param
            .parse()
            .map_err(|_| ConfigError(format!("input parameter '{param}' is not a number")))?;
        InputFamily::auto_capped(family, value)
            .and_then(|f| make_input(&f))
            .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn parsed_operators(&self) -> Result<Vec<Operator>, ConfigError> {
        self.operators
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|e: qpgate::Error| ConfigError(e.to_string()))
            })
            .collect()
    }

    pub fn parsed_families(&self) -> Result<Vec<FamilyKind>, ConfigError> {
        self.families
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|e: qpgate::Error| ConfigError(e.to_string()))
            })
            .collect()
    }

    pub fn validate_format(&self) -> Result<(), ConfigError> {
        match self.format.as_str() {
            "csv" | "json" => Ok(()),
            other => err(format!("format must be csv or json, got '{other}'")),
        }
    }
}

fn parse_complex_pair(s: &str) -> Result<Complex64, ConfigError> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| ConfigError(format!("complex value '{s}' is not 're,im'")))?;
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("bad real part in '{s}'")))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("bad imaginary part in '{s}'")))?;
    Ok(Complex64::new(re, im))
}

/// Parse a comma-separated list of floats; empty string means empty list.
pub fn parse_float_list(s: &str) -> Result<Vec<f64>, ConfigError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|_| ConfigError(format!("'{tok}' is not a number")))
        })
        .collect()
}

/// Parse a comma-separated list of names; empty string means empty list.
pub fn parse_name_list(s: &str) -> Vec<String> {
    if s.trim().is_empty() {
        return Vec::new();
    }
    s.split(',').map(|tok| tok.trim().to_string()).collect()
}
