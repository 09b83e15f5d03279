//! CSV and manifest rendering for sweep results.

use rbl_core::montecarlo::{EstimatorKind, ExperimentConfig, MetricsRow};

use crate::config::render_sweep;

/// Format a float cell: full-precision scientific notation, or the
/// literal token `nan` for non-finite values (failure counts live in the
/// adjacent columns).
pub fn float_cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        "nan".to_string()
    }
}

fn estimator_columns(kind: EstimatorKind) -> Vec<String> {
    let p = kind.column_prefix();
    if kind.has_pose() {
        [
            "rmse_q", "mae_q", "bias_q", "rmse_t", "rmse_s", "fail", "nonconv", "refl",
        ]
        .iter()
        .map(|m| format!("{p}_{m}"))
        .collect()
    } else {
        vec![format!("{p}_rmse_s"), format!("{p}_fail")]
    }
}

/// Header line for the given estimator selection.
pub fn csv_header(estimators: &[EstimatorKind]) -> String {
    let mut cols = vec!["zeta_db".to_string()];
    for kind in estimators {
        cols.extend(estimator_columns(*kind));
    }
    cols.extend(
        ["rcrb_q", "rcrb_t", "urcrb_q", "urcrb_t", "crb_failures", "clamp_events"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols.join(",")
}

/// One data line per sweep point.
pub fn csv_line(row: &MetricsRow) -> String {
    let mut cells = vec![float_cell(row.zeta_db)];
    for (kind, m) in &row.estimators {
        if kind.has_pose() {
            cells.push(float_cell(m.rmse_q));
            cells.push(float_cell(m.mae_q));
            cells.push(float_cell(m.bias_q));
            cells.push(float_cell(m.rmse_t));
            cells.push(float_cell(m.rmse_s));
            cells.push(m.failures.to_string());
            cells.push(m.nonconverged.to_string());
            cells.push(m.reflections.to_string());
        } else {
            cells.push(float_cell(m.rmse_s));
            cells.push(m.failures.to_string());
        }
    }
    cells.push(float_cell(row.rcrb_q));
    cells.push(float_cell(row.rcrb_t));
    cells.push(float_cell(row.urcrb_q));
    cells.push(float_cell(row.urcrb_t));
    cells.push(row.crb_failures.to_string());
    cells.push(row.clamp_events.to_string());
    cells.join(",")
}

/// Render the complete CSV for a sweep.
pub fn render_csv(estimators: &[EstimatorKind], rows: &[MetricsRow]) -> String {
    let mut out = csv_header(estimators);
    out.push('\n');
    for row in rows {
        out.push_str(&csv_line(row));
        out.push('\n');
    }
    out
}

/// FNV-1a 64-bit hash, used for the per-row checksums in the manifest.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Render the run manifest: tool metadata, per-row checksums, and an
/// echo of the resolved configuration that re-parses identically.
pub fn render_manifest(
    cfg: &ExperimentConfig,
    csv_name: &str,
    rows: &[MetricsRow],
    created_unix: u64,
) -> String {
    let mut out = String::new();
    out.push_str("[manifest]\n");
    out.push_str(&format!("tool = rbl {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("created_unix = {created_unix}\n"));
    out.push_str(&format!("seed = {}\n", cfg.seed));
    out.push_str(&format!("csv = {csv_name}\n"));
    out.push_str(&format!("rows = {}\n", rows.len()));
    for (i, row) in rows.iter().enumerate() {
        let checksum = fnv1a64(csv_line(row).as_bytes());
        out.push_str(&format!("row_checksum_{i} = {checksum:016x}\n"));
    }
    out.push('\n');
    out.push_str(&render_sweep(cfg));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rbl_core::montecarlo::EstimatorMetrics;

    fn sample_row() -> MetricsRow {
        MetricsRow {
            zeta_db: 40.0,
            estimators: vec![
                (
                    // Every trial failed: pose metrics degrade to NaN
                    // with the count in the failure column.
                    EstimatorKind::OucLs,
                    EstimatorMetrics {
                        rmse_q: f64::NAN,
                        mae_q: f64::NAN,
                        bias_q: f64::NAN,
                        rmse_t: f64::NAN,
                        rmse_s: f64::NAN,
                        failures: 7,
                        nonconverged: 1,
                        reflections: 2,
                    },
                ),
                (
                    EstimatorKind::Classical,
                    EstimatorMetrics {
                        rmse_q: f64::NAN,
                        mae_q: f64::NAN,
                        bias_q: f64::NAN,
                        rmse_t: f64::NAN,
                        rmse_s: 9.0,
                        failures: 3,
                        nonconverged: 0,
                        reflections: 0,
                    },
                ),
            ],
            rcrb_q: 0.4,
            rcrb_t: 1.5,
            urcrb_q: 0.6,
            urcrb_t: 1.9,
            crb_failures: 0,
            clamp_events: 0,
        }
    }

    #[test]
    fn header_matches_selection() {
        let header = csv_header(&[EstimatorKind::OucLs, EstimatorKind::Classical]);
        assert_eq!(
            header,
            "zeta_db,ouc_ls_rmse_q,ouc_ls_mae_q,ouc_ls_bias_q,ouc_ls_rmse_t,ouc_ls_rmse_s,\
             ouc_ls_fail,ouc_ls_nonconv,ouc_ls_refl,classical_rmse_s,classical_fail,\
             rcrb_q,rcrb_t,urcrb_q,urcrb_t,crb_failures,clamp_events"
        );
    }

    #[test]
    fn non_finite_cells_render_as_nan_token() {
        let line = csv_line(&sample_row());
        assert!(line.contains(",nan,"));
        assert!(!line.contains("NaN"));
        // Cells line up with the header.
        let header = csv_header(&[EstimatorKind::OucLs, EstimatorKind::Classical]);
        assert_eq!(line.split(',').count(), header.split(',').count());
    }

    #[test]
    fn fnv_reference_values() {
        // Standard FNV-1a test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }
}
