//! Encoding checked against decimal arithmetic, and full scale/encode
//! round trips.

use std::str::FromStr;

use digitcast_core::codec::{decode_series, encode_series, encode_value, EncodingConfig};
use digitcast_core::scaler::{self, ScalerConfig};
use digitcast_core::series::TimeSeries;
use proptest::prelude::*;
use rust_decimal::{Decimal, RoundingStrategy};

/// Digits of `x` rounded half away from zero, via exact decimal math on its
/// shortest representation.
fn oracle_digits(x: f64, precision: u32) -> (bool, String) {
    let d = Decimal::from_str(&format!("{x}")).unwrap();
    let r = d.round_dp_with_strategy(precision, RoundingStrategy::MidpointAwayFromZero);
    let scaled = (r.abs() * Decimal::from(10u64.pow(precision))).normalize();
    let digits = scaled.to_string();
    (r.is_sign_negative() && !r.is_zero(), digits)
}

fn strip(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn digits_match_decimal_rounding(x in -1e7f64..1e7, precision in 0u32..5) {
        let cfg = EncodingConfig::spaced(precision as usize);
        let (negative, digits) = oracle_digits(x, precision);
        let expected = if negative { format!("-{digits}") } else { digits };
        prop_assert_eq!(strip(&encode_value(x, &cfg).unwrap()), expected);
    }

    #[test]
    fn short_decimals_round_like_their_written_form(
        int in 0u64..100_000,
        frac in 0u64..1000,
        precision in 0u32..3,
    ) {
        let x: f64 = format!("{int}.{frac:03}").parse().unwrap();
        let cfg = EncodingConfig::unspaced(precision as usize);
        let (_, digits) = oracle_digits(x, precision);
        prop_assert_eq!(encode_value(x, &cfg).unwrap(), digits);
    }

    #[test]
    fn scale_encode_decode_unscale(
        values in prop::collection::vec(-1e4f64..1e4, 1..40),
        mask in prop::collection::vec(any::<bool>(), 40),
        precision in 1usize..5,
        alpha in 0.1f64..=1.0,
        beta in 0.0f64..0.6,
        spaced in any::<bool>(),
    ) {
        let n = values.len();
        let mut missing: Vec<bool> = mask[..n].to_vec();
        missing[0] = false;
        let series = TimeSeries::with_mask(values, missing).unwrap();
        let cfg = if spaced { EncodingConfig::spaced(precision) } else { EncodingConfig::unspaced(precision) };
        let params = scaler::fit(&series, &ScalerConfig::new(alpha, beta)).unwrap();
        let scaled = scaler::transform(&series, &params);
        let text = encode_series(&scaled, &cfg).unwrap();
        let decoded = decode_series(&text, &cfg);
        prop_assert_eq!(decoded.valid_steps, n);
        prop_assert!(!decoded.truncated);
        let back = scaler::inverse_transform(&decoded.series, &params);
        let tol = 10f64.powi(-(precision as i32)) / 2.0 + 1e-9;
        for i in 0..n {
            prop_assert_eq!(back.is_missing(i), series.is_missing(i));
            if let (Some(a), Some(b)) = (series.get(i), back.get(i)) {
                let err_scaled = (a - b).abs() / params.scale_a;
                prop_assert!(err_scaled <= tol, "step {}: {} vs {}", i, a, b);
            }
        }
    }
}
