//! Helpers around the GMP-backed exact rationals used for every coefficient.

use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"-0.95"` / `"2.5e-3"`
/// into an exact rational. Decimals are converted without rounding.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: Integer = parse_integer(num)?;
        let den: Integer = parse_integer(den)?;
        if den == 0 {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::from((num, den)));
    }
    parse_decimal(s)
}

fn parse_integer(s: &str) -> Result<Integer> {
    let s = s.trim();
    let digits = s.strip_prefix('+').unwrap_or(s);
    Integer::from_str_radix(digits, 10).map_err(|_| Error::Parse(format!("invalid integer `{s}`")))
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("invalid number `{s}`"));
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, body) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(Integer::from_str_radix(&digits, 10).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten_pow = Integer::from(Integer::u_pow_u(10, scale.unsigned_abs()));
    if scale >= 0 {
        value *= ten_pow;
    } else {
        value /= ten_pow;
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// `"p/q"` or `"p"`, always reduced.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// `1/n!` as an exact rational.
pub fn inv_factorial(n: u32) -> Rational {
    Rational::from((Integer::from(1), factorial(n)))
}

/// Least common multiple of the denominators of `coeffs` (1 for an empty slice).
pub fn denominator_lcm<'a>(coeffs: impl IntoIterator<Item = &'a Rational>) -> Integer {
    let mut l = Integer::from(1);
    for c in coeffs {
        if *c.denom() != 1 {
            l.lcm_mut(c.denom());
        }
    }
    l
}
