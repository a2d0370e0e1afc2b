//! Planning tables (minimum ECP by n, minimum n by ECP) and the data behind
//! the expected-statistic curves.

use benford_ecp::critical::Calibrator;
use benford_ecp::ecp::{min_ecp_for_significance, min_n_for_significance, Clamp, DEFAULT_N_CAP};
use benford_ecp::expectation::{expected_mad, expected_ssd};
use benford_ecp::statistics::{MadConformity, SsdConformity, MAD_CUTOFFS, SSD_CUTOFFS};
use benford_ecp::{ContaminantDistribution, Error, StatisticKind};

use crate::error::CliResult;

pub const PANEL_A_SIZES: [u64; 9] = [
    100, 500, 1000, 5000, 10_000, 50_000, 100_000, 500_000, 1_000_000,
];
pub const PANEL_B_FRACTIONS: [f64; 9] = [0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.99];
pub const FIGURE_SIZES: [u64; 5] = [100, 500, 5000, 10_000, 100_000];
pub const PLANNING_KINDS: [StatisticKind; 3] =
    [StatisticKind::Chi2, StatisticKind::Ssd, StatisticKind::Mad];

/// A header row and string cells, ready for delimited output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_delimited(&self, delimiter: u8) -> String {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

fn level_label(level: f64) -> String {
    format!("p{}", (level * 100.0).round() as u32)
}

fn planning_headers(first: &str, levels: &[f64]) -> Vec<String> {
    let mut headers = vec![first.to_string()];
    for kind in PLANNING_KINDS {
        for &l in levels {
            headers.push(format!("{}_{}", kind.as_str(), level_label(l)));
        }
    }
    headers
}

/// Minimum ECP (percent) for the expected statistic to exceed each critical value.
pub fn panel_a(
    sizes: &[u64],
    levels: &[f64],
    calibrator: &Calibrator,
    contaminant: &ContaminantDistribution,
) -> CliResult<Table> {
    let mut rows = Vec::new();
    for &n in sizes {
        let mut row = vec![n.to_string()];
        for kind in PLANNING_KINDS {
            for &level in levels {
                let est = min_ecp_for_significance(kind, n, level, calibrator, contaminant)?;
                row.push(if est.clamped == Clamp::CeilOne {
                    "unreachable".to_string()
                } else {
                    format!("{:.2}", 100.0 * est.f)
                });
            }
        }
        rows.push(row);
    }
    Ok(Table {
        headers: planning_headers("n", levels),
        rows,
    })
}

/// Minimum sample size for the expected statistic to exceed each critical value.
pub fn panel_b(
    fractions: &[f64],
    levels: &[f64],
    calibrator: &Calibrator,
    contaminant: &ContaminantDistribution,
) -> CliResult<Table> {
    let mut rows = Vec::new();
    for &f in fractions {
        let mut row = vec![format!("{:.2}", 100.0 * f)];
        for kind in PLANNING_KINDS {
            for &level in levels {
                match min_n_for_significance(kind, f, level, calibrator, contaminant, DEFAULT_N_CAP)
                {
                    Ok(n) => row.push(n.to_string()),
                    Err(Error::ExceedsSearchCap { cap }) => row.push(format!(">{cap}")),
                    Err(e) => return Err(e.into()),
                }
            }
        }
        rows.push(row);
    }
    Ok(Table {
        headers: planning_headers("ecp_percent", levels),
        rows,
    })
}

/// Expected SSD and MAD over a grid of `f` for several `n`, followed by the
/// conformity cut points as reference rows.
pub fn figure1(
    sizes: &[u64],
    steps: usize,
    contaminant: &ContaminantDistribution,
) -> CliResult<Table> {
    let mut rows = Vec::new();
    for (panel, eval) in [
        (
            "SSD",
            expected_ssd as fn(u64, f64, &ContaminantDistribution) -> _,
        ),
        ("MAD", expected_mad),
    ] {
        for &n in sizes {
            for i in 0..=steps {
                let f = i as f64 / steps as f64;
                let v = eval(n, f, contaminant)?.value;
                rows.push(vec![
                    panel.to_string(),
                    "expected".to_string(),
                    n.to_string(),
                    format!("{f:.4}"),
                    format!("{v:.8}"),
                ]);
            }
        }
    }
    let ssd_classes = [
        SsdConformity::Perfect,
        SsdConformity::AcceptableClose,
        SsdConformity::MarginallyBenford,
    ];
    for (cut, class) in SSD_CUTOFFS.iter().zip(ssd_classes) {
        rows.push(cutoff_row("SSD", &class.to_string(), *cut));
    }
    let mad_classes = [
        MadConformity::Close,
        MadConformity::Acceptable,
        MadConformity::MarginallyAcceptable,
    ];
    for (cut, class) in MAD_CUTOFFS.iter().zip(mad_classes) {
        rows.push(cutoff_row("MAD", &class.to_string(), *cut));
    }
    Ok(Table {
        headers: ["panel", "series", "n", "f", "value"]
            .map(String::from)
            .to_vec(),
        rows,
    })
}

fn cutoff_row(panel: &str, below: &str, cut: f64) -> Vec<String> {
    vec![
        panel.to_string(),
        format!("upper bound of {below}"),
        String::new(),
        String::new(),
        format!("{cut:.8}"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use benford_ecp::uniform_contaminant;

    #[test]
    fn chi_squared_panel_entries() {
        let cal = Calibrator::new(1000, 0).unwrap();
        let levels = [0.95];
        let t = panel_a(
            &[100_000],
            &levels,
            &cal.clone()
                .with_method(
                    StatisticKind::Ssd,
                    benford_ecp::critical::CriticalValueMethod::IndependentCells,
                )
                .unwrap(),
            &uniform_contaminant(),
        )
        .unwrap();
        assert_eq!(t.headers[1], "CHI2_p95");
        assert_eq!(t.rows[0][1], "1.36");
    }

    #[test]
    fn figure_rows() {
        let t = figure1(&[100], 10, &uniform_contaminant()).unwrap();
        let first = &t.rows[0];
        assert_eq!(first[0], "SSD");
        assert_eq!(first[3], "0.0000");
        assert!((first[4].parse::<f64>().unwrap() - 0.008345).abs() < 1e-6);
        assert_eq!(t.rows.len(), 2 * 11 + 6);
        let csv = t.to_delimited(b',');
        assert!(csv.starts_with("panel,series,n,f,value\n"));
    }
}
