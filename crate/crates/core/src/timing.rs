//! Protocol constants and the four channel event durations.
//!
//! Every duration in [`PhyParams`] is an integer number of microseconds.
//! [`DelayDurations`] keeps microseconds as `f64`; sums of integer inputs
//! are exact in that representation, and the renewal solver converts to
//! seconds only at the point of use.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// PHY/MAC timing constants plus the contention parameters of the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhyParams {
    pub sifs_us: u64,
    pub difs_us: u64,
    pub eifs_us: u64,
    /// Physical slot; also the duration of an empty slot.
    pub slot_us: u64,
    pub rts_us: u64,
    pub cts_us: u64,
    pub ack_us: u64,
    /// MAC header plus expected payload (`H + E[P]`).
    pub data_us: u64,
    pub n_nodes: u32,
    /// Initial contention window `W`.
    pub cw_min: u32,
    /// Maximum backoff stage `m`.
    pub max_stage: u32,
    /// Upper bound of the delay evaluation window.
    pub horizon_ms: u64,
}

impl Default for PhyParams {
    fn default() -> Self {
        Self::table1()
    }
}

impl PhyParams {
    /// The reference RTS/CTS parameter set with 20 stations, `W = 32`, `m = 5`.
    pub const fn table1() -> Self {
        PhyParams {
            sifs_us: 28,
            difs_us: 128,
            eifs_us: 456,
            slot_us: 50,
            rts_us: 350,
            cts_us: 350,
            ack_us: 300,
            data_us: 8200,
            n_nodes: 20,
            cw_min: 32,
            max_stage: 5,
            horizon_ms: 200,
        }
    }

    pub fn with_nodes(mut self, n_nodes: u32) -> Self {
        self.n_nodes = n_nodes;
        self
    }

    fn timing_fields(&self) -> [(&'static str, u64); 8] {
        [
            ("sifs_us", self.sifs_us),
            ("difs_us", self.difs_us),
            ("eifs_us", self.eifs_us),
            ("slot_us", self.slot_us),
            ("rts_us", self.rts_us),
            ("cts_us", self.cts_us),
            ("ack_us", self.ack_us),
            ("data_us", self.data_us),
        ]
    }

    /// Checks every invariant except the station count.
    fn validate_common(&self) -> Result<()> {
        if let Some((name, _)) = self.timing_fields().iter().find(|(_, v)| *v == 0) {
            return invalid(format!("{name} must be strictly positive"));
        }
        if self.cw_min < 2 {
            return invalid(format!("cw_min must be >= 2, got {}", self.cw_min));
        }
        // The largest window is cw_min << max_stage slots.
        if self.max_stage > 24 || (u64::from(self.cw_min) << self.max_stage) > u64::from(u32::MAX) {
            return invalid(format!(
                "contention window overflows at stage {} (cw_min {})",
                self.max_stage, self.cw_min
            ));
        }
        if self.horizon_ms == 0 {
            return invalid("horizon_ms must be strictly positive");
        }
        Ok(())
    }

    /// Full invariant check used by the analytical model (`n_nodes >= 2`).
    pub fn validate(&self) -> Result<()> {
        self.validate_common()?;
        if self.n_nodes < 2 {
            return invalid(format!("n_nodes must be >= 2, got {}", self.n_nodes));
        }
        Ok(())
    }

    /// The simulator also accepts a single uncontended station.
    pub fn validate_for_simulation(&self) -> Result<()> {
        self.validate_common()?;
        if self.n_nodes < 1 {
            return invalid("n_nodes must be >= 1");
        }
        Ok(())
    }

    /// Renders the parameters in the `key = value` configuration format.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.timing_fields() {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out.push_str(&format!("n_nodes = {}\n", self.n_nodes));
        out.push_str(&format!("cw_min = {}\n", self.cw_min));
        out.push_str(&format!("max_stage = {}\n", self.max_stage));
        out.push_str(&format!("horizon_ms = {}\n", self.horizon_ms));
        out
    }

    /// Applies `key = value` lines on top of `self`.
    ///
    /// Blank lines and lines starting with `#` are ignored. Unknown keys,
    /// duplicate keys and unparsable values are errors. The result is
    /// not validated; call [`PhyParams::validate`] afterwards.
    pub fn apply_config(mut self, text: &str) -> Result<Self> {
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return invalid(format!("line {}: expected `key = value`", lineno + 1));
            };
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return invalid(format!("line {}: duplicate key `{key}`", lineno + 1));
            }
            seen.push(key);

            let parse_u64 = || {
                value.parse::<u64>().map_err(|_| {
                    Error::InvalidConfig(format!(
                        "line {}: `{key}` expects a non-negative integer, got `{value}`",
                        lineno + 1
                    ))
                })
            };
            let parse_u32 = || {
                value.parse::<u32>().map_err(|_| {
                    Error::InvalidConfig(format!(
                        "line {}: `{key}` expects a non-negative integer, got `{value}`",
                        lineno + 1
                    ))
                })
            };
            match key {
                "sifs_us" => self.sifs_us = parse_u64()?,
                "difs_us" => self.difs_us = parse_u64()?,
                "eifs_us" => self.eifs_us = parse_u64()?,
                "slot_us" => self.slot_us = parse_u64()?,
                "rts_us" => self.rts_us = parse_u64()?,
                "cts_us" => self.cts_us = parse_u64()?,
                "ack_us" => self.ack_us = parse_u64()?,
                "data_us" => self.data_us = parse_u64()?,
                "n_nodes" => self.n_nodes = parse_u32()?,
                "cw_min" => self.cw_min = parse_u32()?,
                "max_stage" => self.max_stage = parse_u32()?,
                "horizon_ms" => self.horizon_ms = parse_u64()?,
                other => return invalid(format!("line {}: unknown key `{other}`", lineno + 1)),
            }
        }
        Ok(self)
    }
}

/// Parses a full configuration on top of the defaults and validates it.
impl FromStr for PhyParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let params = PhyParams::table1().apply_config(s)?;
        params.validate()?;
        Ok(params)
    }
}

/// Durations of the four non-terminating channel events, in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayDurations {
    pub d_emp: f64,
    pub d_suc: f64,
    pub d_col: f64,
    pub d_bus: f64,
}

impl DelayDurations {
    /// `[d_emp, d_suc, d_col, d_bus]`.
    pub fn as_array(&self) -> [f64; 4] {
        [self.d_emp, self.d_suc, self.d_col, self.d_bus]
    }

    /// Same ordering as [`DelayDurations::as_array`], in seconds.
    pub fn as_seconds(&self) -> [f64; 4] {
        self.as_array().map(|us| us * 1e-6)
    }
}

impl fmt::Display for DelayDurations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "D_Emp={} us, D_Suc={} us, D_Col={} us, D_Bus={} us",
            self.d_emp, self.d_suc, self.d_col, self.d_bus
        )
    }
}

/// Durations for the simulator, which also admits a single station.
pub fn compute_simulation_durations(params: &PhyParams) -> Result<DelayDurations> {
    params.validate_for_simulation()?;
    Ok(derive_durations(params))
}

/// Timing sums without any parameter validation.
pub(crate) fn derive_durations(p: &PhyParams) -> DelayDurations {
    let us = |v: u64| v as f64;
    DelayDurations {
        d_emp: us(p.slot_us),
        d_suc: us(p.rts_us + 3 * p.sifs_us + p.cts_us + p.data_us + p.ack_us + p.difs_us),
        d_col: us(p.rts_us + p.difs_us),
        d_bus: us(p.difs_us + p.sifs_us + p.ack_us),
    }
}

/// Derives the empty, success, collision and busy durations.
///
/// Note that the collision cost is `RTS + DIFS`; real DCF defers EIFS
/// after a collision, see `SimConfig::collision_eifs` for the simulator
/// variant.
pub fn compute_delay_durations(params: &PhyParams) -> Result<DelayDurations> {
    params.validate()?;
    Ok(derive_durations(params))
}
