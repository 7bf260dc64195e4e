//! Text formats: model-spec JSON, weights/acvf CSV, plain series text and
//! JSON reports. Every float is written with 17 significant digits, which
//! round-trips `f64` exactly.

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::acvf::{AcvfSequence, ComposedAcvf, Tail};
use crate::error::{Error, Result};
use crate::models::{ArmaModel, FarimaSpec, ProcessModel};
use crate::simulation::{Noise, SimConfig};
use crate::weights::FilterWeights;

/// Burn-in added on top of the filter length when a spec gives none.
pub const DEFAULT_EXTRA_BURN_IN: usize = 1000;

/// `{"ar": [..], "ma": [..], "sigma2": x, "d": optional, "sim": optional}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub ar: Vec<f64>,
    #[serde(default)]
    pub ma: Vec<f64>,
    pub sigma2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSpec>,
}

/// `"sim": {"n": .., "burn_in": .., "seed": .., "noise": {"gaussian": v}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    pub seed: u64,
    /// Defaults to Gaussian noise with variance `sigma2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<Noise>,
}

fn field_error(field: &str, err: Error) -> Error {
    let detail = match err {
        Error::Domain(msg) => msg,
        other => other.to_string(),
    };
    Error::Domain(format!("{field}: {detail}"))
}

impl ModelSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("model spec: {e}")))
    }

    /// Builds the model, reporting the offending field on domain errors.
    pub fn model(&self) -> Result<ProcessModel> {
        if let Some(i) = self.ar.iter().position(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("ar[{i}]: coefficient is not finite")));
        }
        if let Some(i) = self.ma.iter().position(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("ma[{i}]: coefficient is not finite")));
        }
        let arma = ArmaModel::new(self.ar.clone(), self.ma.clone(), self.sigma2)
            .map_err(|e| field_error("sigma2", e))?;
        match self.d {
            None => Ok(ProcessModel::Arma(arma)),
            Some(d) => Ok(ProcessModel::Farima(
                FarimaSpec::new(d, arma).map_err(|e| field_error("d", e))?,
            )),
        }
    }

    /// The model with the simulated noise variance, and the simulation
    /// config; `burn_in` defaults to the filter length plus
    /// [`DEFAULT_EXTRA_BURN_IN`].
    pub fn simulation(&self, filter_len: usize) -> Result<(ProcessModel, SimConfig)> {
        let sim = self
            .sim
            .as_ref()
            .ok_or_else(|| Error::Config("sim: missing from model spec".into()))?;
        let noise = sim.noise.unwrap_or(Noise::Gaussian(self.sigma2));
        let v = noise.variance();
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Config(format!(
                "sim.noise: variance must be finite and > 0, got {v}"
            )));
        }
        if sim.n < 1 {
            return Err(Error::Config("sim.n: must be at least 1".into()));
        }
        let model = self.model()?.with_variance(v)?;
        let config = SimConfig {
            n_samples: sim.n,
            burn_in: sim.burn_in.unwrap_or(filter_len + DEFAULT_EXTRA_BURN_IN),
            seed: sim.seed,
            noise,
        };
        Ok((model, config))
    }
}

/// `{:.16e}`: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `n,psi_n` with a header line.
pub fn weights_csv(weights: &FilterWeights) -> String {
    let mut out = String::from("n,psi_n\n");
    for (n, c) in weights.coeffs().iter().enumerate() {
        writeln!(out, "{n},{}", fmt_f64(*c)).unwrap();
    }
    out
}

fn tail_comment(tail: &Tail) -> Option<String> {
    match *tail {
        Tail::Geometric { c, r } => Some(format!(
            "# tail geometric C={} r={}",
            fmt_f64(c),
            fmt_f64(r)
        )),
        Tail::Power { c, alpha } => Some(format!(
            "# tail power C={} alpha={}",
            fmt_f64(c),
            fmt_f64(alpha)
        )),
        Tail::Zero => Some("# tail zero".into()),
        Tail::Unknown => None,
    }
}

/// `k,gamma_k`, preceded by a `# tail ...` comment when the tail is known.
pub fn acvf_csv(acvf: &AcvfSequence) -> String {
    let mut out = String::new();
    if let Some(c) = tail_comment(acvf.tail()) {
        writeln!(out, "{c}").unwrap();
    }
    out.push_str("k,gamma_k\n");
    for (k, g) in acvf.values().iter().enumerate() {
        writeln!(out, "{k},{}", fmt_f64(*g)).unwrap();
    }
    out
}

/// [`acvf_csv`] with the truncation bound repeated in a third column.
pub fn composed_csv(composed: &ComposedAcvf) -> String {
    let mut out = String::new();
    if let Some(c) = tail_comment(composed.acvf.tail()) {
        writeln!(out, "{c}").unwrap();
    }
    out.push_str("k,gamma_k,trunc_bound\n");
    let bound = fmt_f64(composed.truncation_bound);
    for (k, g) in composed.acvf.values().iter().enumerate() {
        writeln!(out, "{k},{},{bound}", fmt_f64(*g)).unwrap();
    }
    out
}

fn parse_float(text: &str, what: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: '{}' is not a number", text.trim())))
}

fn parse_key(part: Option<&str>, key: &str) -> Result<f64> {
    let value = part
        .and_then(|p| p.strip_prefix(key))
        .and_then(|p| p.strip_prefix('='))
        .ok_or_else(|| Error::Parse(format!("tail comment: expected {key}=<value>")))?;
    parse_float(value, &format!("tail {key}"))
}

fn parse_tail(line: &str) -> Result<Tail> {
    let mut parts = line.trim_start_matches('#').split_whitespace();
    if parts.next() != Some("tail") {
        return Err(Error::Parse(format!("unrecognised comment line '{line}'")));
    }
    match parts.next() {
        Some("geometric") => Ok(Tail::Geometric {
            c: parse_key(parts.next(), "C")?,
            r: parse_key(parts.next(), "r")?,
        }),
        Some("power") => Ok(Tail::Power {
            c: parse_key(parts.next(), "C")?,
            alpha: parse_key(parts.next(), "alpha")?,
        }),
        Some("zero") => Ok(Tail::Zero),
        Some("unknown") => Ok(Tail::Unknown),
        other => Err(Error::Parse(format!(
            "tail comment: unknown kind {other:?}"
        ))),
    }
}

/// Reads `k,gamma_k` (an extra `trunc_bound` column is accepted and
/// ignored). Lags must run `0, 1, 2, …` without gaps.
pub fn parse_acvf_csv(text: &str) -> Result<AcvfSequence> {
    let mut tail = Tail::Unknown;
    let mut body_start = 0;
    let mut line_offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            tail = parse_tail(trimmed)?;
        } else if !trimmed.is_empty() {
            break;
        }
        body_start += line.len();
        line_offset += 1;
    }

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(&text.as_bytes()[body_start..]);
    let header = reader
        .headers()
        .map_err(|e| Error::Parse(format!("acvf csv: {e}")))?;
    let columns: Vec<&str> = header.iter().collect();
    if columns != ["k", "gamma_k"] && columns != ["k", "gamma_k", "trunc_bound"] {
        return Err(Error::Parse(format!(
            "acvf csv: header must be 'k,gamma_k', got '{}'",
            columns.join(",")
        )));
    }
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(format!("acvf csv: {e}")))?;
        let line = line_offset + record.position().map_or(0, |p| p.line() as usize);
        let k = &record[0];
        if k.parse::<usize>().ok() != Some(values.len()) {
            return Err(Error::Parse(format!(
                "acvf csv line {line}: expected k = {}, got '{k}'",
                values.len()
            )));
        }
        values.push(parse_float(
            &record[1],
            &format!("acvf csv line {line} gamma_k"),
        )?);
    }
    AcvfSequence::new(values, tail)
}

pub fn series_text(series: &[f64]) -> String {
    let mut out = String::with_capacity(series.len() * 25);
    for v in series {
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    out
}

pub fn parse_series(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_float(l, &format!("series line {}", i + 1)))
        .collect()
}

/// Compact JSON writer that prints finite floats as `{:.16e}`.
struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value))
    }
}

/// Serializes `value` as one line of JSON plus a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(format!("json: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}
