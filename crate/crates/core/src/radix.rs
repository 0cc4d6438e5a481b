//! Plate strings as little-endian base-36 integers, and integers as
//! little-endian base-255 digit vectors.
//!
//! The leftmost character of a plate is the least significant base-36 digit,
//! so `"ZZ"` is `35 + 35 * 36`. A plate whose last character is `'0'` cannot be
//! told apart from the same plate without that trailing zero; this module does
//! not try to recover it.

use std::fmt;

use thiserror::Error;

/// Longest accepted plate. `36^12 < 2^64`, so every value fits a `u64`.
pub const MAX_PLATE_LEN: usize = 12;

/// Largest base-255 digit.
pub const MAX_DIGIT: u8 = 254;

/// Number of base-255 digits accepted by [`base255_to_integer`].
pub const MAX_BASE255_DIGITS: usize = 8;

const RADIX36: u64 = 36;
const RADIX255: u64 = 255;
const ALPHABET: &[u8; 36] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RadixError {
    #[error("invalid plate character {0:?}")]
    InvalidCharacter(char),
    #[error("plate is empty")]
    EmptyPlate,
    #[error("plate has {0} characters, at most {MAX_PLATE_LEN} are allowed")]
    PlateTooLong(usize),
    #[error("value {0} does not fit in {MAX_PLATE_LEN} base-36 characters")]
    ValueTooLarge(u64),
    #[error("base-255 digit {0} is out of range")]
    DigitOutOfRange(u32),
    #[error("{0} base-255 digits exceed the supported {MAX_BASE255_DIGITS}")]
    TooManyDigits(usize),
}

/// A validated plate number: uppercase `[0-9A-Z]`, 1 to 12 characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlateNumber(String);

impl PlateNumber {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for PlateNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for PlateNumber {
    type Err = RadixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_plate(s)
    }
}

/// Little-endian base-255 digits in canonical form (no trailing zeros, except
/// the single vector `[0]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitVector(Vec<u8>);

impl DigitVector {
    /// Builds a canonical vector, trimming trailing zero digits.
    pub fn new(mut digits: Vec<u8>) -> Result<Self, RadixError> {
        if let Some(&d) = digits.iter().find(|&&d| d > MAX_DIGIT) {
            return Err(RadixError::DigitOutOfRange(d as u32));
        }
        while digits.len() > 1 && digits.last() == Some(&0) {
            digits.pop();
        }
        if digits.is_empty() {
            digits.push(0);
        }
        Ok(Self(digits))
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The digits zero-padded (or left as is, if already longer) to `len`.
    pub fn padded(&self, len: usize) -> Vec<u8> {
        let mut out = self.0.clone();
        if out.len() < len {
            out.resize(len, 0);
        }
        out
    }
}

/// Table value of a single plate character. Letters are case-insensitive.
pub fn char_to_value(c: char) -> Result<u8, RadixError> {
    match c {
        '0'..='9' => Ok(c as u8 - b'0'),
        'A'..='Z' => Ok(c as u8 - b'A' + 10),
        'a'..='z' => Ok(c as u8 - b'a' + 10),
        _ => Err(RadixError::InvalidCharacter(c)),
    }
}

/// Inverse of [`char_to_value`], always uppercase.
pub fn value_to_char(v: u8) -> Option<char> {
    ALPHABET.get(v as usize).map(|&b| b as char)
}

/// Strips spaces and hyphens, uppercases and validates a raw plate string.
pub fn parse_plate(raw: &str) -> Result<PlateNumber, RadixError> {
    let mut text = String::with_capacity(raw.len());
    for c in raw.chars().filter(|&c| c != ' ' && c != '-') {
        let v = char_to_value(c)?;
        text.push(ALPHABET[v as usize] as char);
    }
    if text.is_empty() {
        return Err(RadixError::EmptyPlate);
    }
    if text.len() > MAX_PLATE_LEN {
        return Err(RadixError::PlateTooLong(text.len()));
    }
    Ok(PlateNumber(text))
}

pub fn plate_to_integer(p: &PlateNumber) -> u64 {
    // Horner from the most significant (rightmost) character.
    p.0.chars().rev().fold(0u64, |acc, c| {
        let v = char_to_value(c).expect("PlateNumber holds only valid characters");
        acc * RADIX36 + v as u64
    })
}

pub fn integer_to_plate(mut n: u64) -> Result<PlateNumber, RadixError> {
    if n >= RADIX36.pow(MAX_PLATE_LEN as u32) {
        return Err(RadixError::ValueTooLarge(n));
    }
    let mut text = String::new();
    loop {
        text.push(ALPHABET[(n % RADIX36) as usize] as char);
        n /= RADIX36;
        if n == 0 {
            break;
        }
    }
    Ok(PlateNumber(text))
}

pub fn integer_to_base255(mut n: u64) -> DigitVector {
    let mut digits = Vec::new();
    loop {
        digits.push((n % RADIX255) as u8);
        n /= RADIX255;
        if n == 0 {
            break;
        }
    }
    DigitVector(digits)
}

/// Accepts padded (non-canonical) digit slices; trailing zeros add nothing.
pub fn base255_to_integer(digits: &[u8]) -> Result<u64, RadixError> {
    if let Some(&d) = digits.iter().find(|&&d| d > MAX_DIGIT) {
        return Err(RadixError::DigitOutOfRange(d as u32));
    }
    let significant = digits.iter().rposition(|&d| d != 0).map_or(0, |i| i + 1);
    if significant > MAX_BASE255_DIGITS {
        return Err(RadixError::TooManyDigits(significant));
    }
    Ok(digits[..significant]
        .iter()
        .rev()
        .fold(0u64, |acc, &d| acc * RADIX255 + d as u64))
}
