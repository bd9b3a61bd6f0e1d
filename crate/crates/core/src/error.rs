use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("operands live over different fields")]
    FieldMismatch,

    #[error("invalid field description: {0}")]
    InvalidField(String),

    #[error("root isolation failed: {0}")]
    RootIsolation(String),

    #[error("syntax error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("exponent {exponent} exceeds the cap of {cap}")]
    ExponentCap { exponent: u64, cap: u64 },

    #[error("map is not a polynomial automorphism: {0}")]
    NotAutomorphism(String),

    #[error("map is elliptic (dynamical degree 1); a Hénon normal form requires a loxodromic map")]
    NotLoxodromic,

    #[error("a field extension is needed: adjoin a root of {}", format_minpoly(.minpoly))]
    FieldExtensionNeeded { minpoly: Vec<BigInt>, reason: String },

    #[error("the radical {0} is reducible over the base field; retry over the subfield it generates")]
    ReducibleRadical(String),

    #[error("escape radius {given} is below the filtration radius {required}")]
    InvalidRadius { given: f64, required: f64 },

    #[error("non-finite numeric input")]
    NonFinite,

    #[error("ill-conditioned root cluster: {0}")]
    IllConditioned(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Caps are reported as "undecided", never as refutations.
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::ExponentCap { .. } | Error::ResourceCap(_))
    }
}

pub(crate) fn format_minpoly(c: &[BigInt]) -> String {
    let mut parts = Vec::new();
    for (i, a) in c.iter().enumerate().rev() {
        if a == &BigInt::from(0) {
            continue;
        }
        let mon = match i {
            0 => String::new(),
            1 => "X".to_string(),
            _ => format!("X^{i}"),
        };
        if mon.is_empty() {
            parts.push(a.to_string());
        } else if a == &BigInt::from(1) {
            parts.push(mon);
        } else if a == &BigInt::from(-1) {
            parts.push(format!("-{mon}"));
        } else {
            parts.push(format!("{a}*{mon}"));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ").replace("+ -", "- ")
    }
}
