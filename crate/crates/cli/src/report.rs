use serde::Serialize;

use crate::Format;

/// One measured or computed quantity of an attack report.
#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci95: Option<(f64, f64)>,
    /// Analytic or quoted value the measurement is compared with.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
}

impl Metric {
    pub fn value(name: &str, value: f64) -> Self {
        Self { name: name.into(), value, ci95: None, reference: None }
    }

    pub fn estimate(name: &str, e: &hbat_core::stats::Estimate) -> Self {
        Self { name: name.into(), value: e.p, ci95: Some(e.ci95), reference: None }
    }

    pub fn against(mut self, reference: f64) -> Self {
        self.reference = Some(reference);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub attack: String,
    pub scheme: String,
    pub k: usize,
    pub trials: u64,
    pub seed: u64,
    pub metrics: Vec<Metric>,
}

pub const CSV_HEADER: &str = "attack,scheme,k,trials,seed,metric,value,ci95_low,ci95_high,reference";

/// Whole numbers as integers, small magnitudes in scientific notation.
fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.4e}")
    } else {
        format!("{v:.6}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Report {
    pub fn csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for m in &self.metrics {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                self.attack,
                self.scheme,
                self.k,
                self.trials,
                self.seed,
                m.name,
                m.value,
                opt(m.ci95.map(|c| c.0)),
                opt(m.ci95.map(|c| c.1)),
                opt(m.reference)
            ));
        }
        out
    }

    pub fn text(&self) -> String {
        let mut out =
            format!("{} on {} (k={}, trials={}, seed={})\n", self.attack, self.scheme, self.k, self.trials, self.seed);
        for m in &self.metrics {
            out.push_str(&format!("  {:<28} {}", m.name, num(m.value)));
            if let Some((lo, hi)) = m.ci95 {
                out.push_str(&format!("  95% CI [{}, {}]", num(lo), num(hi)));
            }
            if let Some(r) = m.reference {
                out.push_str(&format!("  reference {}", num(r)));
            }
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text(),
            Format::Csv => self.csv(),
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
        }
    }
}
