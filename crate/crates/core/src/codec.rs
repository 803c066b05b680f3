//! Conversion between numeric series and the digit-string wire format.
//!
//! Each value is rounded to a fixed number of fractional digits, the decimal
//! point is dropped and leading zeros are stripped, so with two digits of
//! precision `0.123 → "12"`, `1.23 → "123"` and `123.0 → "12300"`. Digits may
//! be separated (spaced mode), time steps are separated by `time_sep`, and
//! missing observations are written as `missing_token`. An encoded series
//! always ends with a separator so a model continuing it starts a new value.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::series::TimeSeries;
use crate::{Error, Result};

/// Largest digit count whose integer value is exactly representable in f64.
pub const MAX_EXACT_DIGITS: usize = 15;

/// Parameters of the series ↔ string mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingConfig {
    /// Digit radix. Only 10 is implemented; the density math is general.
    pub base: u32,
    /// Fractional digits kept per value.
    pub precision: usize,
    pub spaced: bool,
    pub time_sep: String,
    pub digit_sep: String,
    pub signed: bool,
    pub missing_token: String,
    /// Cap on digits per value.
    pub max_digits: usize,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self::spaced(3)
    }
}

impl EncodingConfig {
    /// One token per digit: `" 1 2 , 3 4 ,"`.
    pub fn spaced(precision: usize) -> Self {
        Self {
            base: 10,
            precision,
            spaced: true,
            time_sep: " ,".to_string(),
            digit_sep: " ".to_string(),
            signed: true,
            missing_token: "NaN".to_string(),
            max_digits: 12,
        }
    }

    /// Digits written back to back: `"12,34,"`.
    pub fn unspaced(precision: usize) -> Self {
        Self {
            spaced: false,
            time_sep: ",".to_string(),
            digit_sep: String::new(),
            ..Self::spaced(precision)
        }
    }

    pub fn with_time_sep(mut self, sep: impl Into<String>) -> Self {
        self.time_sep = sep.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        let has_digit = |s: &str| s.chars().any(|c| c.is_ascii_digit());
        if self.base != 10 {
            return bad("only base 10 is supported");
        }
        if self.time_sep.is_empty() || has_digit(&self.time_sep) {
            return bad("time_sep must be nonempty and digit-free");
        }
        if self.missing_token.trim().is_empty()
            || has_digit(&self.missing_token)
            || self.missing_token == self.time_sep
        {
            return bad("missing_token must be nonempty, digit-free and differ from time_sep");
        }
        if has_digit(&self.digit_sep) {
            return bad("digit_sep must be digit-free");
        }
        if self.spaced == self.digit_sep.is_empty() {
            return bad("digit_sep must be nonempty exactly when spaced");
        }
        let sep_core = self.split_pattern();
        if self.missing_token.contains(sep_core) || self.digit_sep.contains(sep_core) {
            return bad("missing_token and digit_sep must not contain the time separator");
        }
        if self.max_digits == 0 || self.max_digits > MAX_EXACT_DIGITS {
            return bad("max_digits must be in 1..=15");
        }
        if self.precision > self.max_digits {
            return bad("precision cannot exceed max_digits");
        }
        Ok(())
    }

    /// Separator written after the final value: `time_sep` without trailing
    /// whitespace, since a dangling space would be merged into the model's
    /// next token.
    pub fn terminator(&self) -> &str {
        match self.time_sep.trim_end() {
            "" => &self.time_sep,
            t => t,
        }
    }

    /// The part of `time_sep` used to split model output into values.
    pub fn split_pattern(&self) -> &str {
        match self.time_sep.trim() {
            "" => &self.time_sep,
            t => t,
        }
    }

    /// Width of one bin in encoded units, `base^-precision`.
    pub fn bin_width(&self) -> f64 {
        f64::from(self.base).powi(-(self.precision as i32))
    }

    /// The set of characters that can appear in an encoded series.
    pub fn alphabet(&self) -> NumericAlphabet {
        let mut chars: BTreeSet<char> = ('0'..='9').collect();
        if self.signed {
            chars.insert('-');
        }
        chars.extend(self.time_sep.chars());
        chars.extend(self.digit_sep.chars());
        chars.extend(self.missing_token.chars());
        NumericAlphabet { chars }
    }
}

/// Characters used by an encoding; tokens made only of these belong to the
/// numeric vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumericAlphabet {
    chars: BTreeSet<char>,
}

impl NumericAlphabet {
    pub fn contains(&self, c: char) -> bool {
        self.chars.contains(&c)
    }

    pub fn allows_token(&self, token: &str) -> bool {
        !token.is_empty() && token.chars().all(|c| self.contains(c))
    }

    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.chars.iter().copied()
    }
}

/// Rounds `|x|` half away from zero to `precision` fractional digits and
/// returns `(negative, digits)` with the decimal point dropped and leading
/// zeros stripped. Works on the shortest round-trip decimal form of `x`, so
/// `12.345` rounds up like its written form rather than its binary value.
fn rounded_digits(x: f64, precision: usize) -> (bool, String) {
    // Display for f64 never uses exponent notation.
    let repr = format!("{}", x.abs());
    let (int_part, frac_part) = repr.split_once('.').unwrap_or((&repr, ""));
    let frac = frac_part.as_bytes();
    let mut digits: Vec<u8> = int_part.bytes().collect();
    digits.extend((0..precision).map(|i| frac.get(i).copied().unwrap_or(b'0')));
    if frac.get(precision).is_some_and(|&d| d >= b'5') {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, b'1');
                break;
            }
            i -= 1;
            if digits[i] == b'9' {
                digits[i] = b'0';
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let first = digits.iter().position(|&d| d != b'0').unwrap_or(digits.len());
    let stripped = match &digits[first..] {
        [] => "0".to_string(),
        rest => String::from_utf8(rest.to_vec()).expect("ascii digits"),
    };
    let negative = x < 0.0 && stripped != "0";
    (negative, stripped)
}

/// Encodes a single value, without any separator around it.
pub fn encode_value(x: f64, cfg: &EncodingConfig) -> Result<String> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("cannot encode {x}")));
    }
    let (negative, digits) = rounded_digits(x, cfg.precision);
    if digits.len() > cfg.max_digits {
        return Err(Error::Overflow {
            value: x,
            digits: digits.len(),
            max_digits: cfg.max_digits,
        });
    }
    if negative && !cfg.signed {
        return Err(Error::NegativeUnsigned(x));
    }
    let mut out = String::with_capacity(2 * digits.len() + 2);
    if negative {
        out.push('-');
    }
    for (i, d) in digits.chars().enumerate() {
        if i > 0 || negative {
            out.push_str(&cfg.digit_sep);
        }
        out.push(d);
    }
    Ok(out)
}

/// Per-step encodings, each including its leading `digit_sep`.
pub fn encode_chunks(ts: &TimeSeries, cfg: &EncodingConfig) -> Result<Vec<String>> {
    ts.iter()
        .map(|v| {
            let body = match v {
                Some(x) => encode_value(x, cfg)?,
                None => cfg.missing_token.clone(),
            };
            Ok(format!("{}{body}", cfg.digit_sep))
        })
        .collect()
}

/// Joins per-step chunks into a prompt ending with the terminator.
pub fn join_chunks<S: AsRef<str>>(chunks: &[S], cfg: &EncodingConfig) -> String {
    if chunks.is_empty() {
        return String::new();
    }
    let mut out = String::new();
    for (i, c) in chunks.iter().enumerate() {
        if i > 0 {
            out.push_str(&cfg.time_sep);
        }
        out.push_str(c.as_ref());
    }
    out.push_str(cfg.terminator());
    out
}

/// Encodes a whole series.
pub fn encode_series(ts: &TimeSeries, cfg: &EncodingConfig) -> Result<String> {
    cfg.validate()?;
    Ok(join_chunks(&encode_chunks(ts, cfg)?, cfg))
}

/// Text that follows a nonempty encoded prompt when `future` continues it,
/// so that `encode_series(history) + encode_continuation(future)` equals
/// `encode_series(history ++ future)`.
pub fn encode_continuation(future: &TimeSeries, cfg: &EncodingConfig) -> Result<String> {
    cfg.validate()?;
    if future.is_empty() {
        return Ok(String::new());
    }
    let rest = &cfg.time_sep[cfg.terminator().len()..];
    Ok(format!("{rest}{}", join_chunks(&encode_chunks(future, cfg)?, cfg)))
}

/// Result of decoding model output.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub series: TimeSeries,
    /// Number of steps recovered before the end of input or the first
    /// unparseable chunk.
    pub valid_steps: usize,
    /// True when decoding stopped at garbage rather than at the end of input.
    pub truncated: bool,
}

enum Chunk {
    Value(f64),
    Missing,
    Invalid,
}

fn parse_chunk(raw: &str, cfg: &EncodingConfig) -> Chunk {
    let mut cleaned: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
    let sep = cfg.digit_sep.trim();
    if !sep.is_empty() {
        cleaned = cleaned.replace(sep, "");
    }
    let missing: String = cfg
        .missing_token
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    if cleaned == missing {
        return Chunk::Missing;
    }
    let (negative, digits) = match cleaned.strip_prefix('-') {
        Some(rest) if cfg.signed => (true, rest),
        Some(_) => return Chunk::Invalid,
        None => (false, cleaned.as_str()),
    };
    if digits.is_empty()
        || digits.len() > cfg.max_digits
        || !digits.bytes().all(|b| b.is_ascii_digit())
    {
        return Chunk::Invalid;
    }
    let int: u64 = digits.parse().expect("validated digits");
    // Exact integer divided by an exact power of ten: correctly rounded.
    let magnitude = int as f64 / 10f64.powi(cfg.precision as i32);
    Chunk::Value(if negative { -magnitude } else { magnitude })
}

/// Parses model output greedily, stopping at the first chunk that is neither
/// a number nor the missing token.
pub fn decode_series(text: &str, cfg: &EncodingConfig) -> Decoded {
    let mut values = Vec::new();
    let mut truncated = false;
    let pieces: Vec<&str> = text.split(cfg.split_pattern()).collect();
    let last = pieces.len().saturating_sub(1);
    for (i, piece) in pieces.into_iter().enumerate() {
        match parse_chunk(piece, cfg) {
            Chunk::Value(v) => values.push(v),
            Chunk::Missing => values.push(f64::NAN),
            Chunk::Invalid => {
                // Whitespace after the final separator is the normal end.
                truncated = !(i == last && piece.trim().is_empty());
                break;
            }
        }
    }
    let valid_steps = values.len();
    Decoded {
        series: TimeSeries::from_values(values),
        valid_steps,
        truncated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::from_values(v.to_vec())
    }

    #[test]
    fn value_examples() {
        let sp = EncodingConfig::spaced(2);
        assert_eq!(encode_value(0.123, &sp).unwrap(), "1 2");
        assert_eq!(encode_value(123.0, &sp).unwrap(), "1 2 3 0 0");
        assert_eq!(encode_value(0.0, &sp).unwrap(), "0");
        assert_eq!(encode_value(-0.001, &sp).unwrap(), "0");
        assert_eq!(encode_value(-1.5, &sp).unwrap(), "- 1 5 0");
        let un = EncodingConfig::unspaced(2);
        assert_eq!(encode_value(12.345, &un).unwrap(), "1235");
        assert_eq!(encode_value(1.005, &un).unwrap(), "101");
        assert_eq!(encode_value(9.995, &un).unwrap(), "1000");
        assert_eq!(encode_value(-2.5, &EncodingConfig::unspaced(0)).unwrap(), "-3");
        assert_eq!(encode_value(0.05, &un).unwrap(), "5");
    }

    #[test]
    fn overflow_and_unsigned_errors() {
        let mut cfg = EncodingConfig::unspaced(2);
        cfg.max_digits = 4;
        assert!(encode_value(99.99, &cfg).is_ok());
        assert!(matches!(
            encode_value(100.0, &cfg),
            Err(Error::Overflow { digits: 5, .. })
        ));
        cfg.signed = false;
        assert!(matches!(
            encode_value(-1.0, &cfg),
            Err(Error::NegativeUnsigned(_))
        ));
        assert!(encode_value(f64::NAN, &cfg).is_err());
    }

    #[test]
    fn series_example_spaced() {
        let s = encode_series(&ts(&[0.123, 1.23, 12.3, 123.0]), &EncodingConfig::spaced(2)).unwrap();
        assert_eq!(s, " 1 2 , 1 2 3 , 1 2 3 0 , 1 2 3 0 0 ,");
    }

    #[test]
    fn series_example_missing() {
        let cfg = EncodingConfig::unspaced(0).with_time_sep(", ");
        let series = TimeSeries::with_mask(vec![64.0, 0.0, 49.0], vec![false, true, false]).unwrap();
        assert_eq!(encode_series(&series, &cfg).unwrap(), "64, NaN, 49,");
        assert_eq!(encode_series(&TimeSeries::empty(), &cfg).unwrap(), "");
    }

    #[test]
    fn decode_examples() {
        let cfg = EncodingConfig::spaced(2);
        let d = decode_series("1 2 , 1 2 3 0 ,", &cfg);
        assert_eq!(d.series.values(), &[0.12, 12.30]);
        assert!(!d.truncated);
        let d = decode_series("1 2 , foo , 9 9", &cfg);
        assert_eq!(d.series.values(), &[0.12]);
        assert_eq!(d.valid_steps, 1);
        assert!(d.truncated);
        let d = decode_series(" - 1 5 , NaN , 7", &cfg);
        assert_eq!(d.valid_steps, 3);
        assert_eq!(d.series.get(0), Some(-0.15));
        assert_eq!(d.series.get(1), None);
        assert_eq!(d.series.get(2), Some(0.07));
        assert_eq!(decode_series("", &cfg).valid_steps, 0);
    }

    #[test]
    fn decode_rejects_overlong_and_unsigned_minus() {
        let mut cfg = EncodingConfig::unspaced(0);
        cfg.max_digits = 3;
        assert_eq!(decode_series("123,1234,", &cfg).valid_steps, 1);
        cfg.signed = false;
        assert_eq!(decode_series("-1,", &cfg).valid_steps, 0);
    }

    #[test]
    fn continuation_appends_to_prompt() {
        for cfg in [
            EncodingConfig::spaced(2),
            EncodingConfig::unspaced(1).with_time_sep(", "),
        ] {
            let h = ts(&[1.0, f64::NAN, 2.5]);
            let f = ts(&[3.25, -1.0]);
            let whole = encode_series(&h.concat(&f), &cfg).unwrap();
            let joined = encode_series(&h, &cfg).unwrap() + &encode_continuation(&f, &cfg).unwrap();
            assert_eq!(whole, joined);
        }
    }

    #[test]
    fn config_validation() {
        assert!(EncodingConfig::spaced(3).validate().is_ok());
        let mut c = EncodingConfig::spaced(3);
        c.base = 2;
        assert!(c.validate().is_err());
        let mut c = EncodingConfig::spaced(3);
        c.time_sep = "1".into();
        assert!(c.validate().is_err());
        let mut c = EncodingConfig::spaced(3);
        c.missing_token = " ,".into();
        assert!(c.validate().is_err());
        let mut c = EncodingConfig::unspaced(3);
        c.digit_sep = " ".into();
        assert!(c.validate().is_err());
    }

    #[test]
    fn alphabet_membership() {
        let a = EncodingConfig::spaced(2).alphabet();
        assert!(a.allows_token(" 1"));
        assert!(a.allows_token(" ,"));
        assert!(a.allows_token("NaN"));
        assert!(!a.allows_token(" the"));
        assert!(!a.allows_token(""));
    }
}
