use std::ops::Range;

use super::SignalError;
use crate::csv::fmt_sig;

/// Uniformly sampled signal at one spatial position.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTrace {
    sample_rate: f64,
    start_time: f64,
    position: f64,
    samples: Vec<f64>,
}

impl SignalTrace {
    pub fn new(
        sample_rate: f64,
        start_time: f64,
        position: f64,
        samples: Vec<f64>,
    ) -> Result<Self, SignalError> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(SignalError::InvalidParameter(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if samples.is_empty() {
            return Err(SignalError::EmptyInput);
        }
        if samples.iter().any(|v| !v.is_finite()) || !start_time.is_finite() {
            return Err(SignalError::InvalidParameter("non-finite sample".into()));
        }
        Ok(SignalTrace {
            sample_rate,
            start_time,
            position,
            samples,
        })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn position(&self) -> f64 {
        self.position
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Time of sample `i`.
    pub fn time(&self, i: usize) -> f64 {
        self.start_time + i as f64 / self.sample_rate
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|i| self.time(i))
    }

    /// Sub-trace over a sample index range.
    pub fn slice(&self, range: Range<usize>) -> Result<SignalTrace, SignalError> {
        let samples = self
            .samples
            .get(range.clone())
            .ok_or(SignalError::EmptyInput)?
            .to_vec();
        SignalTrace::new(self.sample_rate, self.time(range.start), self.position, samples)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SignalTrace {
        SignalTrace {
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// Pointwise sum with a trace on the same grid.
    pub fn add(&self, other: &SignalTrace) -> Result<SignalTrace, SignalError> {
        if self.len() != other.len() || self.sample_rate != other.sample_rate {
            return Err(SignalError::InvalidParameter("traces are on different grids".into()));
        }
        Ok(SignalTrace {
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    pub fn concat(parts: &[SignalTrace]) -> Result<SignalTrace, SignalError> {
        let first = parts.first().ok_or(SignalError::EmptyInput)?;
        let samples = parts.iter().flat_map(|p| p.samples.iter().copied()).collect();
        SignalTrace::new(first.sample_rate, first.start_time, first.position, samples)
    }

    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.len() as f64
    }

    /// CSV with header `t,value`, 15 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 40);
        out.push_str("t,value\n");
        for (t, v) in self.times().zip(&self.samples) {
            out.push_str(&fmt_sig(t));
            out.push(',');
            out.push_str(&fmt_sig(*v));
            out.push('\n');
        }
        out
    }

    /// Parses a `t,value` or `t,x,value` CSV holding a single trace. When
    /// `sample_rate` is `None` it is inferred from the time column.
    pub fn from_csv(text: &str, sample_rate: Option<f64>) -> Result<SignalTrace, SignalError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| SignalError::Csv(e.to_string()))?
            .clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (t_col, v_col) = match (col("t"), col("value")) {
            (Some(t), Some(v)) => (t, v),
            _ => {
                return Err(SignalError::Csv(format!(
                    "expected columns t,value; found {}",
                    headers.iter().collect::<Vec<_>>().join(",")
                )))
            }
        };
        let x_col = col("x");
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut position = 0.0;
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| SignalError::Csv(e.to_string()))?;
            let field = |i: usize| -> Result<f64, SignalError> {
                record
                    .get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| SignalError::Csv(format!("row {}: bad number", line + 2)))
            };
            times.push(field(t_col)?);
            values.push(field(v_col)?);
            if let Some(x) = x_col {
                position = field(x)?;
            }
        }
        if times.len() < 2 && sample_rate.is_none() {
            return Err(SignalError::Csv("need at least two rows to infer sample rate".into()));
        }
        let rate = match sample_rate {
            Some(r) => r,
            None => (times.len() - 1) as f64 / (times[times.len() - 1] - times[0]),
        };
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SignalError::Csv("time column is not increasing".into()));
        }
        SignalTrace::new(rate, times[0], position, values)
    }
}

/// Several traces (e.g. a spatial sweep) as one `t,x,value` CSV.
pub fn traces_to_csv(traces: &[SignalTrace]) -> String {
    let mut out = String::from("t,x,value\n");
    for tr in traces {
        let x = fmt_sig(tr.position);
        for (t, v) in tr.times().zip(&tr.samples) {
            out.push_str(&format!("{},{},{}\n", fmt_sig(t), x, fmt_sig(*v)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SignalTrace::new(0.0, 0.0, 0.0, vec![1.0]).is_err());
        assert!(SignalTrace::new(10.0, 0.0, 0.0, vec![]).is_err());
        assert!(SignalTrace::new(10.0, 0.0, 0.0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let tr = SignalTrace::new(250.0, 0.5, 0.0, (0..50).map(|i| (i as f64 * 0.3).sin()).collect())
            .unwrap();
        let text = tr.to_csv();
        assert!(text.starts_with("t,value\n"));
        let back = SignalTrace::from_csv(&text, None).unwrap();
        assert!((back.sample_rate() - 250.0).abs() < 1e-9);
        assert!((back.start_time() - 0.5).abs() < 1e-15);
        for (a, b) in back.samples().iter().zip(tr.samples()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(SignalTrace::from_csv("a,b\n1,2\n", None).is_err());
        assert!(SignalTrace::from_csv("t,value\n0,1\n0.1,zz\n", None).is_err());
        assert!(SignalTrace::from_csv("t,value\n0,1\n0,2\n", None).is_err());
    }

    #[test]
    fn sweep_csv_has_position_column() {
        let a = SignalTrace::new(10.0, 0.0, 0.0, vec![1.0, 2.0]).unwrap();
        let b = SignalTrace::new(10.0, 0.0, 0.5, vec![3.0, 4.0]).unwrap();
        let text = traces_to_csv(&[a, b]);
        assert_eq!(text, "t,x,value\n0,0,1\n0.1,0,2\n0,0.5,3\n0.1,0.5,4\n");
    }
}
