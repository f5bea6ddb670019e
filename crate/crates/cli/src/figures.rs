//! Canned sweeps over the reference deployment and their gnuplot data files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fdiab::Duplex;

use crate::runner::Row;
use crate::sweep::{Axis, Engine, MetricKind, SweepSpec};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    AssocVsBias,
    CoverageVsBias,
    CapouterVsRsi,
    CapouterVsAdc,
    ErgodicVsRsi,
    ErgodicVsXi,
}

impl Figure {
    pub const ALL: [Figure; 6] = [
        Figure::AssocVsBias,
        Figure::CoverageVsBias,
        Figure::CapouterVsRsi,
        Figure::CapouterVsAdc,
        Figure::ErgodicVsRsi,
        Figure::ErgodicVsXi,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Figure::AssocVsBias => "assoc_vs_bias",
            Figure::CoverageVsBias => "coverage_vs_bias",
            Figure::CapouterVsRsi => "capouter_vs_rsi",
            Figure::CapouterVsAdc => "capouter_vs_adc",
            Figure::ErgodicVsRsi => "ergodic_vs_rsi",
            Figure::ErgodicVsXi => "ergodic_vs_xi",
        }
    }

    pub fn parse(id: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|f| f.id() == id)
            .ok_or_else(|| CliError::Parse(format!("unknown figure `{id}` (expected one of {})", Self::ALL.map(Figure::id).join(", "))))
    }

    /// The sweep behind the figure. Monte Carlo runs only where the figure compares
    /// against simulation.
    pub fn spec(self) -> SweepSpec {
        let bias: Vec<f64> = (0..7).map(|i| -10.0 + 5.0 * i as f64).collect();
        let rsi: Vec<f64> = (0..8).map(|i| -90.0 + 10.0 * i as f64).collect();
        let both = vec![Engine::Analytic, Engine::Mc];
        let analytic = vec![Engine::Analytic];
        let duplexes = vec![Duplex::Ibfd, Duplex::Hd];
        match self {
            Figure::AssocVsBias => SweepSpec::new(Axis::BiasRatioDb, bias, vec![MetricKind::Association], both),
            Figure::CoverageVsBias => SweepSpec::new(Axis::BiasRatioDb, bias, vec![MetricKind::Coverage], both),
            Figure::CapouterVsRsi => {
                SweepSpec { duplex: duplexes, ..SweepSpec::new(Axis::EtaDb, rsi, vec![MetricKind::CapOutage], analytic) }
            }
            Figure::CapouterVsAdc => SweepSpec::new(Axis::QAdc, (1..=12).map(f64::from).collect(), vec![MetricKind::CapOutage], analytic),
            Figure::ErgodicVsRsi => SweepSpec { duplex: duplexes, ..SweepSpec::new(Axis::EtaDb, rsi, vec![MetricKind::Ergodic], analytic) },
            Figure::ErgodicVsXi => SweepSpec::new(Axis::Xi, vec![0.0, 25.0, 50.0, 100.0], vec![MetricKind::Ergodic], analytic),
        }
    }

    pub fn csv_path(self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.csv", self.id()))
    }

    pub fn dat_path(self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.dat", self.id()))
    }
}

/// Whitespace-separated columns, one line per axis value: the headline series of every
/// (engine, metric, class) combination, Monte Carlo series followed by their 95% half width.
pub fn gnuplot_table(rows: &[Row]) -> String {
    let headline: Vec<&Row> = rows.iter().filter(|r| r.link_class == "network" || r.metric.starts_with("association")).collect();
    let mut series: Vec<(String, bool)> = Vec::new();
    let mut axis: Vec<f64> = Vec::new();
    for r in &headline {
        let key = format!("{}:{}:{}", r.engine.name(), r.metric, r.link_class);
        if !series.iter().any(|(k, _)| *k == key) {
            series.push((key, r.ci95.is_some()));
        }
        if !axis.contains(&r.axis_value) {
            axis.push(r.axis_value);
        }
    }
    let axis_name = headline.first().map(|r| r.axis_name.as_str()).unwrap_or("axis");
    let mut s = format!("# {axis_name}");
    for (k, ci) in &series {
        s.push_str(&format!(" {k}"));
        if *ci {
            s.push_str(&format!(" {k}:ci95"));
        }
    }
    s.push('\n');
    for x in axis {
        let _ = write!(s, "{x}");
        for (k, ci) in &series {
            let hit = headline.iter().find(|r| r.axis_value == x && format!("{}:{}:{}", r.engine.name(), r.metric, r.link_class) == *k);
            let _ = write!(s, " {}", hit.map(|r| r.value).unwrap_or(f64::NAN));
            if *ci {
                let _ = write!(s, " {}", hit.and_then(|r| r.ci95).unwrap_or(f64::NAN));
            }
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip_and_grids() {
        for f in Figure::ALL {
            assert_eq!(Figure::parse(f.id()).unwrap(), f);
        }
        assert!(Figure::parse("fig9").is_err());
        assert_eq!(Figure::CapouterVsAdc.spec().values.len(), 12);
        assert_eq!(Figure::CoverageVsBias.spec().values[2], 0.0);
    }

    #[test]
    fn table_pivots_headline_rows() {
        let row = |engine, value, ci| Row {
            axis_name: "xi".into(),
            axis_value: value,
            engine,
            metric: "ergodic".into(),
            link_class: "network".into(),
            value: value * 2.0,
            ci95: ci,
            seconds: None,
        };
        let rows = vec![row(Engine::Analytic, 0.0, None), row(Engine::Mc, 0.0, Some(0.1)), row(Engine::Analytic, 25.0, None)];
        let t = gnuplot_table(&rows);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "# xi analytic:ergodic:network mc:ergodic:network mc:ergodic:network:ci95");
        assert_eq!(lines[1], "0 0 0 0.1");
        assert_eq!(lines[2], "25 50 NaN NaN");
    }
}
