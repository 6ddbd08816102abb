//! TOML descriptions of fields and curves.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ec::Curve;
use crate::fp::{Field, FieldError};

pub const BLS12_381_TOML: &str = include_str!("../presets/bls12_381.toml");
pub const TOY17_TOML: &str = include_str!("../presets/toy17.toml");
pub const BLS12_381_SCALAR_TOML: &str = include_str!("../presets/bls12_381_scalar.toml");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("bad hex integer {0:?}")]
    Hex(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("curve: {0}")]
    Curve(String),
    #[error("missing [{0}] table")]
    Missing(&'static str),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub modulus: String,
    pub bit_width: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub a: String,
    pub b: String,
    pub gx: String,
    pub gy: String,
    pub base_field: FieldSpec,
    pub scalar_field: FieldSpec,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub field: Option<FieldSpec>,
    pub curve: Option<CurveSpec>,
}

pub fn parse_hex(s: &str) -> Result<BigUint, ConfigError> {
    let t = s.trim();
    let digits = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
    if digits.is_empty() {
        return Err(ConfigError::Hex(s.to_string()));
    }
    BigUint::parse_bytes(digits.as_bytes(), 16).ok_or_else(|| ConfigError::Hex(s.to_string()))
}

impl FieldSpec {
    pub fn build(&self) -> Result<Field, ConfigError> {
        Ok(Field::new(&parse_hex(&self.modulus)?, self.bit_width)?)
    }
}

impl CurveSpec {
    pub fn build(&self) -> Result<Curve, ConfigError> {
        let base = self.base_field.build()?;
        let scalar = self.scalar_field.build()?;
        let a = parse_hex(&self.a)?;
        let b = parse_hex(&self.b)?;
        let gx = parse_hex(&self.gx)?;
        let gy = parse_hex(&self.gy)?;
        for v in [&a, &b, &gx, &gy] {
            if v >= base.modulus() {
                return Err(ConfigError::Curve("coefficient not reduced".into()));
            }
        }
        let name = self.name.clone().unwrap_or_else(|| "unnamed".into());
        Curve::new(name, base, scalar, &a, &b, &gx, &gy).map_err(|e| ConfigError::Curve(e.to_string()))
    }
}

pub fn parse_config(text: &str) -> Result<ConfigFile, ConfigError> {
    Ok(toml::from_str(text)?)
}

/// Field from a file with a `[field]` table.
pub fn field_from_toml(text: &str) -> Result<Field, ConfigError> {
    parse_config(text)?.field.ok_or(ConfigError::Missing("field"))?.build()
}

/// Curve from a file with a `[curve]` table.
pub fn curve_from_toml(text: &str) -> Result<Curve, ConfigError> {
    parse_config(text)?.curve.ok_or(ConfigError::Missing("curve"))?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_load() {
        let f = field_from_toml(BLS12_381_SCALAR_TOML).unwrap();
        assert_eq!(f.bit_width(), 255);
        let c = curve_from_toml(BLS12_381_TOML).unwrap();
        assert_eq!(c.base().bit_width(), 381);
        let t = curve_from_toml(TOY17_TOML).unwrap();
        assert_eq!(t.base().modulus(), &BigUint::from(17u32));
    }

    #[test]
    fn rejects_garbage() {
        assert!(field_from_toml("[field]\nmodulus = \"0xzz\"\nbit_width = 5").is_err());
        assert!(field_from_toml("[field]\nmodulus = \"0x11\"\nbit_width = 6").is_err());
        assert!(field_from_toml("").is_err());
        assert!(curve_from_toml("[field]\nmodulus = \"0x11\"\nbit_width = 5").is_err());
        let off_curve = TOY17_TOML.replace("gy = \"0x5\"", "gy = \"0x6\"");
        assert!(curve_from_toml(&off_curve).is_err());
    }
}
