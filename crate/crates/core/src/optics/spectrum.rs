use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::OpticsError;
use crate::stats::trapezoid;

/// Tabulated curve over wavelength: an extinction coefficient or a channel
/// responsivity. Linear interpolation between samples, no extrapolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectrum", into = "RawSpectrum")]
pub struct Spectrum {
    wavelengths_nm: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSpectrum {
    wavelengths_nm: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawSpectrum> for Spectrum {
    type Error = OpticsError;
    fn try_from(raw: RawSpectrum) -> Result<Self, OpticsError> {
        Spectrum::new(raw.wavelengths_nm, raw.values)
    }
}

impl From<Spectrum> for RawSpectrum {
    fn from(s: Spectrum) -> Self {
        RawSpectrum {
            wavelengths_nm: s.wavelengths_nm,
            values: s.values,
        }
    }
}

impl Spectrum {
    /// Validates and wraps the samples. Requires at least two points,
    /// strictly increasing finite wavelengths and finite non-negative values.
    pub fn new(wavelengths_nm: Vec<f64>, values: Vec<f64>) -> Result<Self, OpticsError> {
        if wavelengths_nm.len() != values.len() {
            return Err(OpticsError::LengthMismatch {
                wavelengths: wavelengths_nm.len(),
                values: values.len(),
            });
        }
        if wavelengths_nm.len() < 2 {
            return Err(OpticsError::TooFewSamples(wavelengths_nm.len()));
        }
        for (i, (&w, &v)) in wavelengths_nm.iter().zip(&values).enumerate() {
            if !w.is_finite() || !v.is_finite() {
                return Err(OpticsError::NonFinite { index: i });
            }
            if v < 0.0 {
                return Err(OpticsError::Negative { index: i, value: v });
            }
            if i > 0 && w <= wavelengths_nm[i - 1] {
                return Err(OpticsError::NonIncreasing { index: i });
            }
        }
        Ok(Spectrum {
            wavelengths_nm,
            values,
        })
    }

    /// Constant curve sampled at the two ends of `[lo, hi]`.
    pub fn constant(lo: f64, hi: f64, value: f64) -> Result<Self, OpticsError> {
        Spectrum::new(alloc::vec![lo, hi], alloc::vec![value, value])
    }

    /// Parses `wavelength_nm,value` CSV text with a mandatory header row.
    /// Error line numbers are 1-based and count the header.
    pub fn from_csv_str(text: &str) -> Result<Self, SpectrumParseError> {
        let mut lines = text.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((i, l)) => break (i + 1, l),
                None => return Err(SpectrumParseError::new(0, ParseErrorKind::Empty)),
            }
        };
        let cols: Vec<&str> = header
            .1
            .trim_start_matches('\u{feff}')
            .split(',')
            .map(str::trim)
            .collect();
        if cols != ["wavelength_nm", "value"] {
            return Err(SpectrumParseError::new(header.0, ParseErrorKind::BadHeader));
        }

        let mut wavelengths = Vec::new();
        let mut values = Vec::new();
        for (i, raw) in lines {
            let line = i + 1;
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            let mut fields = raw.split(',').map(str::trim);
            let (w, v) = match (fields.next(), fields.next(), fields.next()) {
                (Some(w), Some(v), None) => (w, v),
                _ => return Err(SpectrumParseError::new(line, ParseErrorKind::Malformed)),
            };
            let w: f64 = w
                .parse()
                .map_err(|_| SpectrumParseError::new(line, ParseErrorKind::Malformed))?;
            let v: f64 = v
                .parse()
                .map_err(|_| SpectrumParseError::new(line, ParseErrorKind::Malformed))?;
            if !w.is_finite() || !v.is_finite() {
                return Err(SpectrumParseError::new(line, ParseErrorKind::NonFinite));
            }
            if v < 0.0 {
                return Err(SpectrumParseError::new(line, ParseErrorKind::Negative));
            }
            if let Some(&prev) = wavelengths.last() {
                if w <= prev {
                    return Err(SpectrumParseError::new(line, ParseErrorKind::NonIncreasing));
                }
            }
            wavelengths.push(w);
            values.push(v);
        }
        if wavelengths.len() < 2 {
            return Err(SpectrumParseError::new(
                header.0,
                ParseErrorKind::TooFewRows(wavelengths.len()),
            ));
        }
        Spectrum::new(wavelengths, values).map_err(|e| SpectrumParseError {
            line: 0,
            kind: ParseErrorKind::Invalid(e),
        })
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths_nm
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.wavelengths_nm[0], *self.wavelengths_nm.last().unwrap())
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let (a, b) = self.domain();
        a <= lo && hi <= b
    }

    /// Linearly interpolated value at `lambda_nm`.
    pub fn value_at(&self, lambda_nm: f64) -> Result<f64, OpticsError> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&lambda_nm) {
            return Err(OpticsError::OutOfDomain {
                wavelength: lambda_nm,
                lo,
                hi,
            });
        }
        let w = &self.wavelengths_nm;
        let k = w.partition_point(|&x| x < lambda_nm);
        if w[k] == lambda_nm {
            return Ok(self.values[k]);
        }
        // lambda lies strictly between w[k - 1] and w[k]
        let t = (lambda_nm - w[k - 1]) / (w[k] - w[k - 1]);
        Ok(self.values[k - 1] + t * (self.values[k] - self.values[k - 1]))
    }

    /// Trapezoid integral over `[lo, hi]` on the curve's own samples plus
    /// interpolated end points.
    pub fn integral(&self, lo: f64, hi: f64) -> Result<f64, OpticsError> {
        if !self.covers(lo, hi) {
            let (a, b) = self.domain();
            return Err(OpticsError::DoesNotCover {
                lo,
                hi,
                domain: (a, b),
            });
        }
        let mut xs = alloc::vec![lo];
        xs.extend(
            self.wavelengths_nm
                .iter()
                .copied()
                .filter(|&w| w > lo && w < hi),
        );
        xs.push(hi);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| self.value_at(x))
            .collect::<Result<_, _>>()?;
        Ok(trapezoid(&xs, &ys))
    }

    /// The same curve with every value multiplied by `factor` (≥ 0).
    pub fn scaled(&self, factor: f64) -> Result<Self, OpticsError> {
        Spectrum::new(
            self.wavelengths_nm.clone(),
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    /// Index of the smallest value (first on ties).
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v < self.values[best] {
                best = i;
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    Empty,
    BadHeader,
    Malformed,
    NonFinite,
    Negative,
    NonIncreasing,
    TooFewRows(usize),
    Invalid(OpticsError),
}

/// Spectrum CSV parse failure, tagged with the offending 1-based line.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

impl SpectrumParseError {
    fn new(line: usize, kind: ParseErrorKind) -> Self {
        SpectrumParseError { line, kind }
    }
}

impl fmt::Display for SpectrumParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what: String = match &self.kind {
            ParseErrorKind::Empty => "empty file".into(),
            ParseErrorKind::BadHeader => "expected header `wavelength_nm,value`".into(),
            ParseErrorKind::Malformed => "malformed row".into(),
            ParseErrorKind::NonFinite => "non-finite number".into(),
            ParseErrorKind::Negative => "negative value".into(),
            ParseErrorKind::NonIncreasing => "non-increasing wavelength".into(),
            ParseErrorKind::TooFewRows(n) => alloc::format!("need at least 2 rows, found {n}"),
            ParseErrorKind::Invalid(e) => alloc::format!("{e}"),
        };
        write!(f, "line {}: {}", self.line, what)
    }
}

impl core::error::Error for SpectrumParseError {}
