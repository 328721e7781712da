//! Literal evaluation of `γ(m)` for small problems, used to check the
//! dynamic programs.

use crate::loss::{score_fk, PenaltyConfig};
use crate::partition::{enumerate_partitions, intersect, Partition};
use crate::stats::StatsPyramid;
use crate::sum::CompensatedSum;
use crate::{Error, Result};

use super::Selector;

/// How [`gamma_direct`] evaluates each `SUP_K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerSupMethod {
    /// Maximize over every partition in `M_ℓ` (d = 1, ℓ ≤ 2).
    Enumerate,
    /// Use the inner tree program (d = 1, ℓ ≤ 3).
    Dp,
}

/// `γ(m) = Σ_{K∈m} sup_{m'} [Σ_{K'∈m'} F_K(K') − pen(m' ∨ K)] + 2 pen(m)`.
pub fn gamma_direct(
    m: &Partition,
    stats: &StatsPyramid,
    config: &PenaltyConfig,
    level: u32,
    method: InnerSupMethod,
) -> Result<f64> {
    let cap = match method {
        InnerSupMethod::Enumerate => 2,
        InnerSupMethod::Dp => 3,
    };
    if stats.d() != 1 || level > cap {
        return Err(Error::Capacity(format!(
            "direct evaluation of gamma is limited to d = 1 and depth <= {cap}"
        )));
    }
    if m.dim() != 2 || m.max_level() > level || level > stats.max_level() {
        return Err(Error::InvalidInput(format!(
            "partition of depth {} is not in M_{level}",
            m.max_level()
        )));
    }
    let w = config.leaf_weight();
    let mut total = CompensatedSum::default();
    match method {
        InnerSupMethod::Enumerate => {
            let all = enumerate_partitions(level, 1)?;
            for k in m.cells() {
                let sup = all
                    .iter()
                    .map(|m2| {
                        m2.cells()
                            .iter()
                            .filter(|c| intersect(k, c).is_some())
                            .map(|c| score_fk(k, c, stats, config) - w)
                            .collect::<CompensatedSum>()
                            .value()
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                total.add(sup);
            }
        }
        InnerSupMethod::Dp => {
            let sel = Selector::new(stats, config.l(), level)?;
            for k in m.cells() {
                total.add(sel.inner_sup(k).0);
            }
        }
    }
    total.add(2.0 * config.pen(m.len()));
    Ok(total.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Sample;

    #[test]
    fn trivial_partition_on_empty_square_costs_one_weight() {
        let s = Sample::from_scalars(vec![1.5, 2.0, 3.0, 4.0]).unwrap();
        let stats = StatsPyramid::bin(&s, 2).unwrap();
        let config = PenaltyConfig::new(0.1, s.n()).unwrap();
        for method in [InnerSupMethod::Enumerate, InnerSupMethod::Dp] {
            let g = gamma_direct(&Partition::trivial(2), &stats, &config, 2, method).unwrap();
            assert!((g - config.leaf_weight()).abs() < 1e-15);
        }
    }

    #[test]
    fn both_methods_agree() {
        let s = Sample::from_scalars(vec![
            0.1, 0.4, 0.35, 0.8, 0.62, 0.2, 0.9, 0.55, 0.5, 0.05, 0.7,
        ])
        .unwrap();
        let stats = StatsPyramid::bin(&s, 2).unwrap();
        let config = PenaltyConfig::new(0.03, s.n()).unwrap();
        for m in enumerate_partitions(2, 1).unwrap() {
            let a = gamma_direct(&m, &stats, &config, 2, InnerSupMethod::Enumerate).unwrap();
            let b = gamma_direct(&m, &stats, &config, 2, InnerSupMethod::Dp).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn guards() {
        let s = Sample::from_scalars(vec![0.1, 0.4, 0.35, 0.8]).unwrap();
        let stats = StatsPyramid::bin(&s, 4).unwrap();
        let config = PenaltyConfig::new(0.03, s.n()).unwrap();
        let m = Partition::trivial(2);
        assert!(matches!(
            gamma_direct(&m, &stats, &config, 3, InnerSupMethod::Enumerate),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            gamma_direct(&m, &stats, &config, 4, InnerSupMethod::Dp),
            Err(Error::Capacity(_))
        ));
        let deep = Partition::regular(2, 3).unwrap();
        assert!(matches!(
            gamma_direct(&deep, &stats, &config, 2, InnerSupMethod::Enumerate),
            Err(Error::InvalidInput(_))
        ));
    }
}
