//! Points of ℂⁿ and the `a+bi` string form used in configuration files.

use std::fmt;
use std::ops::Index;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PointError {
    #[error("coordinate {index} is not finite ({value})")]
    NonFinite { index: usize, value: Complex64 },
    #[error("point must have at least one coordinate")]
    Empty,
    #[error("cannot parse complex number {text:?}: {reason}")]
    BadComplex { text: String, reason: &'static str },
}

/// A point of ℂⁿ with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CPoint(Vec<Complex64>);

impl CPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self, PointError> {
        if coords.is_empty() {
            return Err(PointError::Empty);
        }
        for (index, c) in coords.iter().enumerate() {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(PointError::NonFinite { index, value: *c });
            }
        }
        Ok(CPoint(coords))
    }

    /// Builds a point from real coordinates (imaginary parts zero).
    pub fn from_reals(xs: &[f64]) -> Result<Self, PointError> {
        Self::new(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Builds a point from interleaved `re1, im1, ..., reN, imN`.
    pub fn from_interleaved(xs: &[f64]) -> Result<Self, PointError> {
        if xs.is_empty() || !xs.len().is_multiple_of(2) {
            return Err(PointError::Empty);
        }
        Self::new(xs.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }

    pub fn origin(n: usize) -> Self {
        CPoint(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.0
    }

    pub fn interleaved(&self) -> Vec<f64> {
        self.0.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dist(&self, other: &CPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Coordinatewise difference `self - other`.
    pub fn sub(&self, other: &CPoint) -> Vec<Complex64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }
}

impl Index<usize> for CPoint {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl fmt::Display for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_complex(*c))?;
        }
        write!(f, ")")
    }
}

impl serde::Serialize for CPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|c| format_complex(*c)))
    }
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Formats `c` as `a+bi` / `a-bi`. The output parses back to the same bits
/// (except for the sign of a zero imaginary part).
pub fn format_complex(c: Complex64) -> String {
    if c.im.is_sign_negative() {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`, with optional exponents on
/// either part.
pub fn parse_complex(text: &str) -> Result<Complex64, PointError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = |reason| PointError::BadComplex {
        text: text.to_string(),
        reason,
    };
    if s.is_empty() {
        return Err(bad("empty"));
    }
    let Some(body) = s.strip_suffix('i') else {
        return s
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad("invalid real number"));
    };
    // Find the sign that separates the real and imaginary parts: the last
    // '+' or '-' that is not the leading sign and not part of an exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            split = Some(k);
            break;
        }
    }
    let (re_txt, im_txt) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re_txt.is_empty() {
        0.0
    } else {
        re_txt.parse::<f64>().map_err(|_| bad("invalid real part"))?
    };
    let im = match im_txt {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| bad("invalid imaginary part"))?,
    };
    let c = Complex64::new(re, im);
    if !c.re.is_finite() || !c.im.is_finite() {
        return Err(bad("not finite"));
    }
    Ok(c)
}
