use std::io::{Read, Write};

use crate::analysis::NetworkMetrics;
use crate::error::{Error, Result};

/// Column order of metrics files. Frozen: downstream plots index by it.
pub const METRICS_COLUMNS: [&str; 11] = [
    "step",
    "population",
    "coverage",
    "skeleton_length",
    "component_count",
    "cycle_count",
    "nodes_connected",
    "top_decile_mass_share",
    "junction_count",
    "junction_angle_mean",
    "junction_angle_stddev",
];

/// Format with six significant digits, without trailing zeros.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else { format!("{}", v) };
    }
    let rounded: f64 = format!("{v:.5e}").parse().expect("valid float");
    format!("{rounded}")
}

fn row(m: &NetworkMetrics) -> [String; 11] {
    [
        m.step.to_string(),
        m.population.to_string(),
        sig6(m.coverage),
        sig6(m.skeleton_length),
        m.component_count.to_string(),
        m.cycle_count.to_string(),
        m.nodes_connected.to_string(),
        sig6(m.top_decile_mass_share),
        m.junction_count.to_string(),
        sig6(m.junction_angle_mean),
        sig6(m.junction_angle_stddev),
    ]
}

/// Writes one CSV row per metrics sample after a header row.
pub struct MetricsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(sink: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(sink);
        inner.write_record(METRICS_COLUMNS)?;
        Ok(Self { inner })
    }

    pub fn append(&mut self, m: &NetworkMetrics) -> Result<()> {
        self.inner.write_record(row(m))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

/// Read a metrics file written by [`MetricsWriter`].
pub fn read_metrics<R: Read>(source: R) -> Result<Vec<NetworkMetrics>> {
    let mut reader = csv::Reader::from_reader(source);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != METRICS_COLUMNS {
        return Err(Error::Frame(format!("unexpected metrics header {header:?}")));
    }
    let bad = |col: &str| Error::Frame(format!("bad value in column {col}"));
    let mut out = Vec::new();
    for record in reader.records() {
        let r = record?;
        let f = |i: usize| r[i].parse::<f64>().map_err(|_| bad(METRICS_COLUMNS[i]));
        let u = |i: usize| r[i].parse::<usize>().map_err(|_| bad(METRICS_COLUMNS[i]));
        out.push(NetworkMetrics {
            step: r[0].parse().map_err(|_| bad("step"))?,
            population: u(1)?,
            coverage: f(2)?,
            skeleton_length: f(3)?,
            component_count: u(4)?,
            cycle_count: u(5)?,
            nodes_connected: r[6].parse().map_err(|_| bad("nodes_connected"))?,
            top_decile_mass_share: f(7)?,
            junction_count: u(8)?,
            junction_angle_mean: f(9)?,
            junction_angle_stddev: f(10)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(120.0), "120");
        assert_eq!(sig6(786.51234), "786.512");
        assert_eq!(sig6(0.123456789), "0.123457");
        assert_eq!(sig6(1234567.0), "1234570");
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
    }

    #[test]
    fn header_only_for_empty_series() {
        let w = MetricsWriter::new(Vec::new()).unwrap();
        let bytes = w.into_inner().unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap().trim_end(), METRICS_COLUMNS.join(","));
    }

    #[test]
    fn rows_round_trip() {
        let mut w = MetricsWriter::new(Vec::new()).unwrap();
        let rows: Vec<NetworkMetrics> = (1..4)
            .map(|i| NetworkMetrics {
                step: i * 50,
                coverage: 0.25,
                skeleton_length: 100.5 * i as f64,
                component_count: 1,
                cycle_count: i as usize,
                nodes_connected: i % 2 == 0,
                top_decile_mass_share: 0.5,
                junction_count: 2,
                junction_angle_mean: 120.0,
                junction_angle_stddev: 4.25,
                population: 2000,
            })
            .collect();
        for r in &rows {
            w.append(r).unwrap();
        }
        let back = read_metrics(&w.into_inner().unwrap()[..]).unwrap();
        assert_eq!(back, rows);
    }
}
