//! Published Monte-Carlo risk values (n = 1000, L = 0.03), indexed by
//! example 1 to 7. A copy lives in `fixtures/reference_values.json`; the
//! test below keeps the two in sync.

pub const FIGURE2_LEVELS: [u32; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// Mean Hellinger risk of the selected estimator, one row per depth.
pub const FIGURE2_MEAN_H2: [[f64; 7]; 10] = [
    [0.031, 0.046, 0.299, 0.181, 0.089, 0.291, 0.358],
    [0.011, 0.015, 0.087, 0.107, 0.024, 0.170, 0.241],
    [0.011, 0.014, 0.026, 0.058, 0.013, 0.067, 0.156],
    [0.011, 0.018, 0.026, 0.035, 0.015, 0.046, 0.113],
    [0.011, 0.018, 0.022, 0.038, 0.015, 0.048, 0.098],
    [0.011, 0.018, 0.022, 0.038, 0.015, 0.048, 0.065],
    [0.011, 0.018, 0.024, 0.038, 0.015, 0.048, 0.044],
    [0.011, 0.018, 0.024, 0.038, 0.015, 0.048, 0.040],
    [0.011, 0.018, 0.024, 0.038, 0.015, 0.048, 0.040],
    [0.011, 0.018, 0.024, 0.038, 0.015, 0.048, 0.040],
];

/// Depth and replicate count of the depth-7 comparison tables.
pub const COMPARISON_LEVEL: u32 = 7;
pub const COMPARISON_REPLICATES: usize = 250;
pub const FIGURE2_REPLICATES: usize = 100;

pub const FIGURE4_MEAN_H2_SELECTED: [f64; 7] = [0.011, 0.017, 0.022, 0.038, 0.018, 0.052, 0.049];
pub const FIGURE4_MEAN_H2_ORACLE: [f64; 7] = [0.007, 0.011, 0.015, 0.028, 0.012, 0.037, 0.041];

/// Quantiles of the ratio of selected to oracle risk, at the levels of
/// `mctd_core::sim::QUANTILE_LEVELS`.
pub const FIGURE4_RATIO_QUANTILES: [[f64; 7]; 4] = [
    [1.473, 1.513, 1.443, 1.369, 1.422, 1.420, 1.200],
    [1.698, 1.627, 1.557, 1.440, 1.575, 1.481, 1.244],
    [1.921, 1.834, 1.683, 1.509, 1.749, 1.543, 1.290],
    [2.113, 1.965, 1.770, 1.558, 1.839, 1.590, 1.317],
];

pub const FIGURE5_MEAN_L2: [f64; 7] = [0.064, 0.108, 0.229, 0.319, 0.116, 0.528, 2.82];

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn fixture() -> Value {
        let path = concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/fixtures/reference_values.json"
        );
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
    }

    fn row(v: &Value) -> Vec<f64> {
        v.as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect()
    }

    #[test]
    fn constants_match_fixture() {
        let f = fixture();
        let levels: Vec<u32> = f["figure2"]["levels"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap() as u32)
            .collect();
        assert_eq!(levels, FIGURE2_LEVELS);
        let table = f["figure2"]["mean_h2"].as_array().unwrap();
        assert_eq!(table.len(), FIGURE2_MEAN_H2.len());
        for (fixture_row, constant_row) in table.iter().zip(&FIGURE2_MEAN_H2) {
            assert_eq!(row(fixture_row), constant_row.to_vec());
        }
        let fig4 = &f["figure4"];
        assert_eq!(fig4["level"].as_u64().unwrap() as u32, COMPARISON_LEVEL);
        assert_eq!(
            fig4["replicates"].as_u64().unwrap() as usize,
            COMPARISON_REPLICATES
        );
        assert_eq!(
            row(&fig4["mean_h2_selected"]),
            FIGURE4_MEAN_H2_SELECTED.to_vec()
        );
        assert_eq!(
            row(&fig4["mean_h2_oracle"]),
            FIGURE4_MEAN_H2_ORACLE.to_vec()
        );
        for (key, constant_row) in ["q0_50", "q0_75", "q0_90", "q0_95"]
            .iter()
            .zip(&FIGURE4_RATIO_QUANTILES)
        {
            assert_eq!(row(&fig4[*key]), constant_row.to_vec(), "{key}");
        }
        assert_eq!(
            row(&f["figure5"]["mean_l2_selected"]),
            FIGURE5_MEAN_L2.to_vec()
        );
    }

    #[test]
    fn quantile_rows_increase() {
        for e in 0..7 {
            for q in 1..4 {
                assert!(FIGURE4_RATIO_QUANTILES[q][e] > FIGURE4_RATIO_QUANTILES[q - 1][e]);
            }
            assert!(FIGURE4_MEAN_H2_ORACLE[e] < FIGURE4_MEAN_H2_SELECTED[e]);
        }
    }
}
