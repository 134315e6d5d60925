//! Significant-digit number rendering shared by the CSV, JSON and `.pseq`
//! writers.

/// Renders `x` rounded to `digits` significant digits in plain decimal
/// notation, with trailing zeros (and a bare trailing '.') removed.
///
/// Exponents outside ±15 fall back to trimmed scientific notation.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1, "at least one significant digit");
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa),
    };
    let digits_str: String = mantissa.chars().filter(|c| *c != '.').collect();

    let body = if !(-15..=15).contains(&exp) {
        let (head, tail) = digits_str.split_at(1);
        let tail = tail.trim_end_matches('0');
        if tail.is_empty() {
            format!("{head}e{exp}")
        } else {
            format!("{head}.{tail}e{exp}")
        }
    } else if exp >= 0 {
        let int_len = exp as usize + 1;
        if int_len >= digits_str.len() {
            let mut s = digits_str.clone();
            s.extend(std::iter::repeat_n('0', int_len - digits_str.len()));
            s
        } else {
            trim_fraction(format!(
                "{}.{}",
                &digits_str[..int_len],
                &digits_str[int_len..]
            ))
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        trim_fraction(format!("0.{zeros}{digits_str}"))
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Rounds `x` to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x)
        .parse()
        .expect("round trip")
}

fn trim_fraction(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
