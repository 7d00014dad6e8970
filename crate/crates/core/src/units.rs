//! Parsing of unit-suffixed quantities from scenario files.
//!
//! Every physical quantity in a scenario is written as a string with an
//! explicit unit ("-24.94 MHz", "10 mK", "6 mG", "570 counts/ms"); this
//! module normalises them to SI (Hz, s, K, T, m, counts/s).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum UnitError {
    #[error("cannot parse quantity {input:?}: expected \"<number> <unit>\"")]
    Malformed { input: String },
    #[error("unit {unit:?} in {input:?} is not a valid {expected} unit")]
    WrongDimension { input: String, unit: String, expected: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Time,
    Temperature,
    MagneticField,
    Length,
    CountRate,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Dimension::Frequency => "frequency",
            Dimension::Time => "time",
            Dimension::Temperature => "temperature",
            Dimension::MagneticField => "magnetic field",
            Dimension::Length => "length",
            Dimension::CountRate => "count rate",
        }
    }

    fn scale(self, unit: &str) -> Option<f64> {
        match self {
            Dimension::Frequency => match unit {
                "uHz" => Some(1e-6),
                "mHz" => Some(1e-3),
                "Hz" => Some(1.0),
                "kHz" => Some(1e3),
                "MHz" => Some(1e6),
                "GHz" => Some(1e9),
                "THz" => Some(1e12),
                _ => None,
            },
            Dimension::Time => match unit {
                "ns" => Some(1e-9),
                "us" => Some(1e-6),
                "ms" => Some(1e-3),
                "s" => Some(1.0),
                _ => None,
            },
            Dimension::Temperature => match unit {
                "uK" => Some(1e-6),
                "mK" => Some(1e-3),
                "K" => Some(1.0),
                _ => None,
            },
            Dimension::MagneticField => match unit {
                "uG" => Some(1e-10),
                "mG" => Some(1e-7),
                "G" => Some(1e-4),
                "uT" => Some(1e-6),
                "mT" => Some(1e-3),
                "T" => Some(1.0),
                _ => None,
            },
            Dimension::Length => match unit {
                "nm" => Some(1e-9),
                "um" => Some(1e-6),
                "mm" => Some(1e-3),
                "m" => Some(1.0),
                _ => None,
            },
            Dimension::CountRate => match unit {
                "counts/s" => Some(1.0),
                "counts/ms" => Some(1e3),
                _ => None,
            },
        }
    }
}

/// Parse "<number> <unit>" into SI units of the expected dimension.
pub fn parse_quantity(input: &str, dim: Dimension) -> Result<f64, UnitError> {
    let s = input.trim();
    let split_at = s
        .find(|c: char| !(c.is_ascii_digit() || "+-.eE".contains(c)))
        .ok_or_else(|| UnitError::Malformed { input: input.to_string() })?;
    let (num, unit) = s.split_at(split_at);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| UnitError::Malformed { input: input.to_string() })?;
    let unit = unit.trim();
    if unit.is_empty() {
        return Err(UnitError::Malformed { input: input.to_string() });
    }
    let scale = dim.scale(unit).ok_or_else(|| UnitError::WrongDimension {
        input: input.to_string(),
        unit: unit.to_string(),
        expected: dim.name(),
    })?;
    Ok(value * scale)
}

/// A unit-suffixed value as it appears in scenario files; kept as the raw
/// string through (de)serialisation so round-trips are byte-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Quantity(pub String);

impl Quantity {
    pub fn new(s: impl Into<String>) -> Self {
        Quantity(s.into())
    }

    pub fn value(&self, dim: Dimension) -> Result<f64, UnitError> {
        parse_quantity(&self.0, dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequencies() {
        assert_eq!(parse_quantity("-24.94 MHz", Dimension::Frequency).unwrap(), -24.94e6);
        assert_eq!(parse_quantity("1.5 mHz", Dimension::Frequency).unwrap(), 1.5e-3);
        assert_eq!(parse_quantity("80MHz", Dimension::Frequency).unwrap(), 80e6);
        assert_eq!(parse_quantity("1.82 THz", Dimension::Frequency).unwrap(), 1.82e12);
    }

    #[test]
    fn other_dimensions() {
        assert_eq!(parse_quantity("10 mK", Dimension::Temperature).unwrap(), 1e-2);
        assert_eq!(parse_quantity("6 mG", Dimension::MagneticField).unwrap(), 6e-7);
        assert_eq!(parse_quantity("150 ms", Dimension::Time).unwrap(), 0.15);
        assert_eq!(parse_quantity("570 counts/ms", Dimension::CountRate).unwrap(), 570e3);
        assert_eq!(parse_quantity("165 um", Dimension::Length).unwrap(), 165e-6);
    }

    #[test]
    fn rejects_missing_or_wrong_units() {
        assert!(parse_quantity("42", Dimension::Frequency).is_err());
        assert!(parse_quantity("42 ", Dimension::Frequency).is_err());
        assert!(parse_quantity("10 mG", Dimension::Frequency).is_err());
        assert!(parse_quantity("abc MHz", Dimension::Frequency).is_err());
    }
}
