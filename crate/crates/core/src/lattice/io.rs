//! Plain-text complex matrices: one row per line, entries like `1.5-2i`
//! separated by whitespace or commas. Lines starting with `#` are comments.

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64};

pub fn format_complex(z: C64) -> String {
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

pub fn parse_complex(token: &str) -> Result<C64> {
    let s = token.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty complex entry".into()));
    }
    let bad = || Error::Parse(format!("invalid complex entry `{token}`"));
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse::<f64>().map(|re| c(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let parse_im = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(c(re, parse_im(&body[k..])?))
        }
        None => Ok(c(0.0, parse_im(body)?)),
    }
}

pub fn parse_complex_matrix(text: &str) -> Result<CMat> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|ch: char| ch.is_whitespace() || ch == ',')
            .filter(|t| !t.is_empty())
            .map(parse_complex)
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    let flat: Vec<C64> = rows.concat();
    Ok(CMat::from_row_slice(rows.len(), ncols, &flat))
}

pub fn format_complex_matrix(m: &CMat) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Splits a multi-matrix file into named sections introduced by `[name]`
/// header lines.
pub fn parse_sections(text: &str) -> Result<Vec<(String, CMat)>> {
    let mut out = Vec::new();
    let mut name: Option<String> = None;
    let mut body = String::new();
    for line in text.lines() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            if let Some(n) = name.take() {
                out.push((n, parse_complex_matrix(&body)?));
            }
            name = Some(h.trim().to_string());
            body.clear();
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    match name {
        Some(n) => out.push((n, parse_complex_matrix(&body)?)),
        None if !body.trim().is_empty() => {
            return Err(Error::Parse("matrix section without a [name] header".into()))
        }
        None => {}
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_common_spellings() {
        assert_eq!(parse_complex("1+2i").unwrap(), c(1.0, 2.0));
        assert_eq!(parse_complex("-0.5-3i").unwrap(), c(-0.5, -3.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("4").unwrap(), c(4.0, 0.0));
        assert_eq!(parse_complex("2.5i").unwrap(), c(0.0, 2.5));
        assert_eq!(parse_complex("1e-3+2E+2i").unwrap(), c(1e-3, 200.0));
        assert!(parse_complex("1+2k").is_err());
    }

    #[test]
    fn sections_split_by_header() {
        let text = "[H_b]\n1+0i 0+0i\n0+0i 1+0i\n\n[H_e]\n2+0i\n";
        let s = parse_sections(text).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].0, "H_b");
        assert_eq!(s[1].1[(0, 0)], c(2.0, 0.0));
    }

    proptest! {
        #[test]
        fn matrix_text_round_trips(vals in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 6)) {
            let m = CMat::from_row_slice(2, 3, &vals.iter().map(|&(a, b)| c(a, b)).collect::<Vec<_>>());
            let back = parse_complex_matrix(&format_complex_matrix(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
