//! Flat `key = value` experiment description.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::energy::RadioModel;
use crate::protocols::{DiffusionParams, ProtocolKind, ProtocolParams, ScoreWeights};
use crate::topology::{FieldSpec, Position};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: key `{key}` given twice (first on line {first})")]
    Duplicate {
        key: String,
        line: usize,
        first: usize,
    },
    #[error("line {line}: `{key}` expects {expected}, got `{value}`")]
    Malformed {
        key: String,
        line: usize,
        value: String,
        expected: &'static str,
    },
    #[error("line {line}: `{key}` = `{value}` is not a protocol (accepted: {accepted})")]
    UnknownProtocol {
        key: String,
        line: usize,
        value: String,
        accepted: String,
    },
    #[error("{}`{key}` {reason}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    OutOfRange {
        key: String,
        line: Option<usize>,
        reason: String,
    },
}

/// Full description of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub field_width_m: f64,
    pub field_height_m: f64,
    pub node_count: usize,
    pub bs_x_m: f64,
    pub bs_y_m: f64,
    pub initial_energy_j: f64,
    pub data_packet_bits: u64,
    pub ctrl_packet_bits: u64,
    pub e_elec_j_per_bit: f64,
    pub eps_amp_j_per_bit_m2: f64,
    pub comm_radius_m: f64,
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub max_rounds: u64,
    pub cluster_head_prob: f64,
    pub aggregate: bool,
    pub w_e: f64,
    pub w_l: f64,
    pub w_d: f64,
    pub load_max: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        let radio = RadioModel::default();
        let weights = ScoreWeights::default();
        Self {
            field_width_m: 100.0,
            field_height_m: 100.0,
            node_count: 100,
            bs_x_m: 50.0,
            bs_y_m: 200.0,
            initial_energy_j: 0.5,
            data_packet_bits: radio.data_bits,
            ctrl_packet_bits: radio.ctrl_bits,
            e_elec_j_per_bit: radio.e_elec,
            eps_amp_j_per_bit_m2: radio.eps_amp,
            comm_radius_m: 30.0,
            protocol: ProtocolKind::E3d,
            seed: 1,
            max_rounds: 100_000,
            cluster_head_prob: 0.05,
            aggregate: true,
            w_e: weights.energy,
            w_l: weights.load,
            w_d: weights.distance,
            load_max: 5,
        }
    }
}

/// Every recognized key, in rendering order.
pub const CONFIG_KEYS: [&str; 20] = [
    "field_width_m",
    "field_height_m",
    "node_count",
    "bs_x_m",
    "bs_y_m",
    "initial_energy_j",
    "data_packet_bits",
    "ctrl_packet_bits",
    "e_elec_j_per_bit",
    "eps_amp_j_per_bit_m2",
    "comm_radius_m",
    "protocol",
    "seed",
    "max_rounds",
    "cluster_head_prob",
    "aggregate",
    "w_e",
    "w_l",
    "w_d",
    "load_max",
];

impl SimConfig {
    pub fn radio(&self) -> RadioModel {
        RadioModel {
            e_elec: self.e_elec_j_per_bit,
            eps_amp: self.eps_amp_j_per_bit_m2,
            data_bits: self.data_packet_bits,
            ctrl_bits: self.ctrl_packet_bits,
        }
    }

    pub fn field_spec(&self) -> FieldSpec {
        FieldSpec {
            width: self.field_width_m,
            height: self.field_height_m,
            node_count: self.node_count,
            base_station: Position::new(self.bs_x_m, self.bs_y_m),
            comm_radius: self.comm_radius_m,
        }
    }

    pub fn weights(&self) -> ScoreWeights {
        ScoreWeights {
            energy: self.w_e,
            load: self.w_l,
            distance: self.w_d,
        }
    }

    pub fn protocol_params(&self) -> ProtocolParams {
        ProtocolParams {
            diffusion: DiffusionParams {
                weights: self.weights(),
                load_max: self.load_max,
                ctrl_bits: self.ctrl_packet_bits,
                initial_energy: self.initial_energy_j,
            },
            cluster_head_prob: self.cluster_head_prob,
            seed: self.seed,
        }
    }

    /// Range checks, without line information.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_with(&HashMap::new())
    }

    fn validate_with(&self, lines: &HashMap<&'static str, usize>) -> Result<(), ConfigError> {
        let fail = |key: &'static str, reason: &str| ConfigError::OutOfRange {
            key: key.to_string(),
            line: lines.get(key).copied(),
            reason: reason.to_string(),
        };
        let positive = |key: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(fail(key, "must be a positive finite number"))
            }
        };
        positive("field_width_m", self.field_width_m)?;
        positive("field_height_m", self.field_height_m)?;
        positive("initial_energy_j", self.initial_energy_j)?;
        positive("e_elec_j_per_bit", self.e_elec_j_per_bit)?;
        positive("eps_amp_j_per_bit_m2", self.eps_amp_j_per_bit_m2)?;
        positive("comm_radius_m", self.comm_radius_m)?;
        if self.node_count == 0 {
            return Err(fail("node_count", "must be at least 1"));
        }
        if !self.bs_x_m.is_finite() {
            return Err(fail("bs_x_m", "must be finite"));
        }
        if !self.bs_y_m.is_finite() {
            return Err(fail("bs_y_m", "must be finite"));
        }
        if self.data_packet_bits == 0 {
            return Err(fail("data_packet_bits", "must be at least 1"));
        }
        if self.ctrl_packet_bits == 0 {
            return Err(fail("ctrl_packet_bits", "must be at least 1"));
        }
        if self.ctrl_packet_bits > self.data_packet_bits {
            return Err(fail("ctrl_packet_bits", "must not exceed data_packet_bits"));
        }
        if !(0.0..=1.0).contains(&self.cluster_head_prob) {
            return Err(fail("cluster_head_prob", "must lie in [0, 1]"));
        }
        for (key, w) in [("w_e", self.w_e), ("w_l", self.w_l), ("w_d", self.w_d)] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(fail(key, "must be a non-negative finite number"));
            }
        }
        if self.w_e + self.w_l + self.w_d <= 0.0 {
            return Err(fail("w_d", "weights must not all be zero"));
        }
        if self.load_max == 0 {
            return Err(fail("load_max", "must be at least 1"));
        }
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(
    key: &str,
    line: usize,
    value: &str,
    expected: &'static str,
) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Malformed {
        key: key.to_string(),
        line,
        value: value.to_string(),
        expected,
    })
}

/// Parses config text; omitted keys keep their defaults.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let mut cfg = SimConfig::default();
    let mut seen: HashMap<&'static str, usize> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            text: content.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let Some(&key) = CONFIG_KEYS.iter().find(|k| **k == key) else {
            return Err(ConfigError::UnknownKey {
                key: key.to_string(),
                line,
            });
        };
        if let Some(&first) = seen.get(key) {
            return Err(ConfigError::Duplicate {
                key: key.to_string(),
                line,
                first,
            });
        }
        seen.insert(key, line);

        const REAL: &str = "a real number";
        const COUNT: &str = "a non-negative integer";
        match key {
            "field_width_m" => cfg.field_width_m = parse_num(key, line, value, REAL)?,
            "field_height_m" => cfg.field_height_m = parse_num(key, line, value, REAL)?,
            "node_count" => cfg.node_count = parse_num(key, line, value, COUNT)?,
            "bs_x_m" => cfg.bs_x_m = parse_num(key, line, value, REAL)?,
            "bs_y_m" => cfg.bs_y_m = parse_num(key, line, value, REAL)?,
            "initial_energy_j" => cfg.initial_energy_j = parse_num(key, line, value, REAL)?,
            "data_packet_bits" => cfg.data_packet_bits = parse_num(key, line, value, COUNT)?,
            "ctrl_packet_bits" => cfg.ctrl_packet_bits = parse_num(key, line, value, COUNT)?,
            "e_elec_j_per_bit" => cfg.e_elec_j_per_bit = parse_num(key, line, value, REAL)?,
            "eps_amp_j_per_bit_m2" => cfg.eps_amp_j_per_bit_m2 = parse_num(key, line, value, REAL)?,
            "comm_radius_m" => cfg.comm_radius_m = parse_num(key, line, value, REAL)?,
            "protocol" => {
                cfg.protocol = value.parse().map_err(|_| ConfigError::UnknownProtocol {
                    key: key.to_string(),
                    line,
                    value: value.to_string(),
                    accepted: ProtocolKind::accepted_names(),
                })?
            }
            "seed" => cfg.seed = parse_num(key, line, value, COUNT)?,
            "max_rounds" => cfg.max_rounds = parse_num(key, line, value, COUNT)?,
            "cluster_head_prob" => cfg.cluster_head_prob = parse_num(key, line, value, REAL)?,
            "aggregate" => cfg.aggregate = parse_num(key, line, value, "`true` or `false`")?,
            "w_e" => cfg.w_e = parse_num(key, line, value, REAL)?,
            "w_l" => cfg.w_l = parse_num(key, line, value, REAL)?,
            "w_d" => cfg.w_d = parse_num(key, line, value, REAL)?,
            "load_max" => cfg.load_max = parse_num(key, line, value, "a positive integer")?,
            _ => unreachable!("key list and match arms disagree"),
        }
    }
    cfg.validate_with(&seen)?;
    Ok(cfg)
}

/// Renders every key; `parse_config(&render_config(c)) == c` for valid `c`.
pub fn render_config(cfg: &SimConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    put("field_width_m", format!("{:?}", cfg.field_width_m));
    put("field_height_m", format!("{:?}", cfg.field_height_m));
    put("node_count", cfg.node_count.to_string());
    put("bs_x_m", format!("{:?}", cfg.bs_x_m));
    put("bs_y_m", format!("{:?}", cfg.bs_y_m));
    put("initial_energy_j", format!("{:?}", cfg.initial_energy_j));
    put("data_packet_bits", cfg.data_packet_bits.to_string());
    put("ctrl_packet_bits", cfg.ctrl_packet_bits.to_string());
    put("e_elec_j_per_bit", format!("{:?}", cfg.e_elec_j_per_bit));
    put(
        "eps_amp_j_per_bit_m2",
        format!("{:?}", cfg.eps_amp_j_per_bit_m2),
    );
    put("comm_radius_m", format!("{:?}", cfg.comm_radius_m));
    put("protocol", cfg.protocol.to_string());
    put("seed", cfg.seed.to_string());
    put("max_rounds", cfg.max_rounds.to_string());
    put("cluster_head_prob", format!("{:?}", cfg.cluster_head_prob));
    put("aggregate", cfg.aggregate.to_string());
    put("w_e", format!("{:?}", cfg.w_e));
    put("w_l", format!("{:?}", cfg.w_l));
    put("w_d", format!("{:?}", cfg.w_d));
    put("load_max", cfg.load_max.to_string());
    out
}
