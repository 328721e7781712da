//! Adaptive composite Gauss–Legendre quadrature for piecewise-smooth
//! integrands with known breakpoints.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Quadrature settings: rule order, maximum bisection depth per panel and
/// the absolute tolerance between successive refinements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub order: usize,
    pub max_refinements: u32,
    pub abs_tol: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            order: 16,
            max_refinements: 20,
            abs_tol: 1e-9,
        }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        if !(1..=256).contains(&self.order) {
            return Err(Error::Config(format!(
                "quadrature order {} not in 1..=256",
                self.order
            )));
        }
        if self.max_refinements > 40 {
            return Err(Error::Config(format!(
                "max_refinements {} exceeds 40",
                self.max_refinements
            )));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Config(format!(
                "abs_tol {} must be positive",
                self.abs_tol
            )));
        }
        Ok(())
    }
}

// Floor on the acceptance threshold relative to the panel value, so that
// refinement stops once rounding dominates.
const RELATIVE_FLOOR: f64 = 1e-13;

/// A ready-to-use rule built from a [`QuadSpec`].
#[derive(Debug, Clone)]
pub struct Quadrature {
    spec: QuadSpec,
    // Nodes mapped to [0, 1] with weights summing to 1.
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature {
    pub fn new(spec: QuadSpec) -> Result<Self> {
        spec.validate()?;
        let rule = GaussLegendre::new(NonZeroUsize::new(spec.order).expect("validated order"));
        let (nodes, weights) = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .unzip();
        Ok(Quadrature {
            spec,
            nodes,
            weights,
        })
    }

    pub fn spec(&self) -> &QuadSpec {
        &self.spec
    }

    #[inline]
    fn panel<const N: usize>(&self, f: &impl Fn(f64) -> [f64; N], a: f64, b: f64) -> [f64; N] {
        let h = b - a;
        let mut acc = [0.0; N];
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(a + h * x);
            for k in 0..N {
                acc[k] += w * v[k];
            }
        }
        acc.map(|v| v * h)
    }

    fn refine<const N: usize>(
        &self,
        f: &impl Fn(f64) -> [f64; N],
        a: f64,
        b: f64,
        whole: [f64; N],
        depth: u32,
    ) -> [f64; N] {
        let m = 0.5 * (a + b);
        let left = self.panel(f, a, m);
        let right = self.panel(f, m, b);
        let halves: [f64; N] = std::array::from_fn(|k| left[k] + right[k]);
        let converged = (0..N).all(|k| {
            let tol = self.spec.abs_tol.max(RELATIVE_FLOOR * halves[k].abs());
            (halves[k] - whole[k]).abs() <= tol
        });
        if converged || depth >= self.spec.max_refinements {
            return halves;
        }
        let l = self.refine(f, a, m, left, depth + 1);
        let r = self.refine(f, m, b, right, depth + 1);
        std::array::from_fn(|k| l[k] + r[k])
    }

    /// `∫_a^b f` for a vector-valued integrand, splitting at every
    /// breakpoint strictly inside `(a, b)` and bisecting each panel until
    /// successive refinements agree.
    pub fn integrate<const N: usize>(
        &self,
        f: impl Fn(f64) -> [f64; N],
        a: f64,
        b: f64,
        breakpoints: &[f64],
    ) -> [f64; N] {
        let mut total = [0.0; N];
        if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
            return total;
        }
        let mut cuts: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&t| t > a && t < b)
            .collect();
        cuts.sort_by(f64::total_cmp);
        let mut lo = a;
        for hi in cuts.into_iter().chain(std::iter::once(b)) {
            if hi > lo {
                let whole = self.panel(&f, lo, hi);
                let part = self.refine(&f, lo, hi, whole, 0);
                for k in 0..N {
                    total[k] += part[k];
                }
            }
            lo = hi;
        }
        total
    }

    /// Scalar convenience wrapper around [`Quadrature::integrate`].
    pub fn integrate_scalar(
        &self,
        f: impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        breakpoints: &[f64],
    ) -> f64 {
        self.integrate(|x| [f(x)], a, b, breakpoints)[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        let q = Quadrature::new(QuadSpec {
            order: 4,
            ..Default::default()
        })
        .unwrap();
        let v = q.integrate_scalar(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0, &[]);
        assert_abs_diff_eq!(v, 32.0 - 8.0, epsilon = 1e-12);
    }

    #[test]
    fn handles_kinks_at_breakpoints() {
        let q = Quadrature::new(QuadSpec::default()).unwrap();
        let f = |x: f64| {
            if x < 0.3 {
                0.0
            } else {
                (-(x - 0.3) / 0.01).exp() / 0.01
            }
        };
        let v = q.integrate_scalar(f, 0.0, 1.0, &[0.3]);
        assert_abs_diff_eq!(v, 1.0 - (-70.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn refines_sharp_peaks() {
        let q = Quadrature::new(QuadSpec::default()).unwrap();
        let sd = 1e-3;
        let pdf = |x: f64| {
            (-(x - 0.5).powi(2) / (2.0 * sd * sd)).exp()
                / (sd * (2.0 * std::f64::consts::PI).sqrt())
        };
        let [a, b] = q.integrate(|x| [pdf(x), 2.0 * pdf(x)], 0.0, 1.0, &[]);
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(b, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn empty_and_reversed_ranges_are_zero() {
        let q = Quadrature::new(QuadSpec::default()).unwrap();
        assert_eq!(q.integrate_scalar(|_| 1.0, 1.0, 1.0, &[]), 0.0);
        assert_eq!(q.integrate_scalar(|_| 1.0, 1.0, 0.0, &[]), 0.0);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        for spec in [
            QuadSpec {
                order: 0,
                ..Default::default()
            },
            QuadSpec {
                abs_tol: 0.0,
                ..Default::default()
            },
            QuadSpec {
                abs_tol: f64::NAN,
                ..Default::default()
            },
            QuadSpec {
                max_refinements: 99,
                ..Default::default()
            },
        ] {
            assert!(matches!(Quadrature::new(spec), Err(Error::Config(_))));
        }
    }
}
