//! Robot capability profiles: per-unit and per-motion success rates.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{FunctionalUnit, UnitId};

/// A success probability in (0, 1].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Rate(f64);

impl Rate {
    pub const CERTAIN: Rate = Rate(1.0);

    pub fn new(value: f64) -> Option<Rate> {
        (value > 0.0 && value <= 1.0).then_some(Rate(value))
    }

    /// Range-checked constructor that names `key` in the error.
    pub fn checked(key: &str, value: f64) -> Result<Rate> {
        Rate::new(value).ok_or_else(|| Error::RateOutOfRange {
            key: key.to_string(),
            value,
        })
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Accepts `0.75`, `75%` and `75 %`.
pub fn parse_rate(key: &str, text: &str) -> Result<Rate> {
    let text = text.trim();
    let value = match text.strip_suffix('%') {
        Some(pct) => pct.trim().parse::<f64>().map(|v| v / 100.0),
        None => text.parse::<f64>(),
    }
    .map_err(|_| Error::Profile(format!("`{key}`: cannot read `{text}` as a rate")))?;
    Rate::checked(key, value)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobotProfile {
    pub name: String,
    pub unit_rates: BTreeMap<UnitId, Rate>,
    /// Keyed by lowercased, trimmed motion label.
    pub motion_rates: BTreeMap<String, Rate>,
    pub default_rate: Rate,
    pub assistant_rate: Rate,
}

impl RobotProfile {
    pub fn new(name: impl Into<String>, default_rate: Rate) -> Self {
        RobotProfile {
            name: name.into(),
            unit_rates: BTreeMap::new(),
            motion_rates: BTreeMap::new(),
            default_rate,
            assistant_rate: Rate::CERTAIN,
        }
    }

    pub fn with_motion(mut self, motion: &str, rate: Rate) -> Self {
        self.motion_rates.insert(motion.trim().to_lowercase(), rate);
        self
    }

    pub fn with_unit(mut self, id: UnitId, rate: Rate) -> Self {
        self.unit_rates.insert(id, rate);
        self
    }

    pub fn with_assistant(mut self, rate: Rate) -> Self {
        self.assistant_rate = rate;
        self
    }

    /// Unit override, then motion rate, then the default.
    pub fn unit_rate(&self, unit: &FunctionalUnit) -> Rate {
        unit.id()
            .and_then(|id| self.unit_rates.get(&id))
            .or_else(|| self.motion_rates.get(&unit.motion().key()))
            .copied()
            .unwrap_or(self.default_rate)
    }
}

/// Parses the TOML profile document:
///
/// ```toml
/// name = "nao"          # optional
/// default = 0.9         # required
/// assistant = 1.0       # optional, defaults to 1.0
///
/// [motions]
/// stir = 0.75
/// pour = "80%"
///
/// [units]
/// 3 = 0.01
/// ```
///
/// Rates are numbers or strings in fraction or percent notation.
pub fn parse_profile(text: &str) -> Result<RobotProfile> {
    let doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Profile(e.message().to_string()))?;

    for key in doc.keys() {
        if !matches!(key.as_str(), "name" | "default" | "assistant" | "motions" | "units") {
            return Err(Error::Profile(format!("unknown key `{key}`")));
        }
    }

    let name = match doc.get("name") {
        None => String::new(),
        Some(toml::Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::Profile("`name` must be a string".into())),
    };
    let default_rate = match doc.get("default") {
        Some(v) => value_rate("default", v)?,
        None => return Err(Error::Profile("missing `default` rate".into())),
    };
    let assistant_rate = match doc.get("assistant") {
        Some(v) => value_rate("assistant", v)?,
        None => Rate::CERTAIN,
    };

    let mut profile = RobotProfile::new(name, default_rate).with_assistant(assistant_rate);

    if let Some(section) = doc.get("motions") {
        let table = section
            .as_table()
            .ok_or_else(|| Error::Profile("`motions` must be a table".into()))?;
        for (motion, v) in table {
            if motion.trim().is_empty() {
                return Err(Error::Profile("empty motion label".into()));
            }
            let rate = value_rate(&format!("motions.{motion}"), v)?;
            profile.motion_rates.insert(motion.trim().to_lowercase(), rate);
        }
    }
    if let Some(section) = doc.get("units") {
        let table = section
            .as_table()
            .ok_or_else(|| Error::Profile("`units` must be a table".into()))?;
        for (id, v) in table {
            let key = format!("units.{id}");
            let id: u32 = id
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::Profile(format!("`{key}`: unit ids are positive integers")))?;
            let rate = value_rate(&key, v)?;
            profile.unit_rates.insert(UnitId(id), rate);
        }
    }
    Ok(profile)
}

fn value_rate(key: &str, value: &toml::Value) -> Result<Rate> {
    match value {
        toml::Value::Float(f) => Rate::checked(key, *f),
        toml::Value::Integer(i) => Rate::checked(key, *i as f64),
        toml::Value::String(s) => parse_rate(key, s),
        _ => Err(Error::Profile(format!("`{key}` must be a number or a percentage string"))),
    }
}

/// Canonical TOML form accepted by [`parse_profile`].
pub fn write_profile(profile: &RobotProfile) -> String {
    let mut out = String::new();
    if !profile.name.is_empty() {
        out.push_str(&format!("name = {}\n", toml_string(&profile.name)));
    }
    out.push_str(&format!("default = {:?}\n", profile.default_rate.get()));
    out.push_str(&format!("assistant = {:?}\n", profile.assistant_rate.get()));
    if !profile.motion_rates.is_empty() {
        out.push_str("\n[motions]\n");
        for (motion, rate) in &profile.motion_rates {
            out.push_str(&format!("{} = {:?}\n", toml_string(motion), rate.get()));
        }
    }
    if !profile.unit_rates.is_empty() {
        out.push_str("\n[units]\n");
        for (id, rate) in &profile.unit_rates {
            out.push_str(&format!("{} = {:?}\n", id, rate.get()));
        }
    }
    out
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}
