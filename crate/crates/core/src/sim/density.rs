//! Closed-form transition densities of the example chains.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::function::beta::ln_beta;

use crate::loss::TransitionDensity;

use super::Example;

fn gaussian(y: f64, mean: f64, sd: f64) -> f64 {
    let z = (y - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
}

/// Density of the β(a, b) law, zero outside `[0, 1]`.
fn beta_pdf(t: f64, a: f64, b: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    let log = (a - 1.0) * t.ln() + (b - 1.0) * (1.0 - t).ln() - ln_beta(a, b);
    log.exp()
}

pub(super) fn beta_scale_sd(x: f64) -> f64 {
    let bump = 0.5 * beta_pdf(5.0 * x / 3.0, 4.0, 4.0)
        + beta_pdf((5.0 * x - 2.0) / 3.0, 400.0, 400.0) / 20.0;
    1.0 / 9.0 - bump / 23.0
}

pub(super) fn two_bump_g(x: f64) -> f64 {
    let c = 9.0 * 2f64.sqrt() / (4.0 * PI.sqrt());
    c * ((-18.0 * (x - 0.5).powi(2)).exp() + (-162.0 * (x - 0.75).powi(2)).exp())
}

fn bimodal_noise(u: f64) -> f64 {
    let c = 5.0 * 2f64.sqrt() / (2.0 * PI.sqrt());
    c * ((-50.0 * (u - 1.0).powi(2)).exp() + (-50.0 * u * u).exp())
}

fn exp_jump_shift(x: f64) -> f64 {
    x / (50.0 * x + 1.0)
}

impl Example {
    /// Mean and standard deviation of the Gaussian transitions (1 to 5).
    fn gaussian_params(self, x: f64) -> Option<(f64, f64)> {
        match self {
            Example::Ar => Some((0.5 * x + 0.25, 0.25)),
            Example::Arch => Some((
                (6.0 + (12.0 * x - 6.0).sin()) / 12.0,
                ((x - 6.0).cos() + 3.0) / 12.0,
            )),
            Example::BetaScale => Some(((x + 1.0) / 3.0, beta_scale_sd(x))),
            Example::TwoBump => Some(((two_bump_g(x) + 1.0) / 4.0, 0.125)),
            Example::ArNarrow => Some((0.5 * x + 0.25, FRAC_1_SQRT_2 / 4.0)),
            Example::Bimodal | Example::ExpJump => None,
        }
    }

    /// `s(x, y)`. For the last chain the law from `x = 0` is a point mass
    /// and the density is taken to be 0.
    pub fn density_at(self, x: f64, y: f64) -> f64 {
        if let Some((mean, sd)) = self.gaussian_params(x) {
            return gaussian(y, mean, sd);
        }
        match self {
            Example::Bimodal => 2.0 * bimodal_noise(2.0 * y - x),
            Example::ExpJump => {
                let c = exp_jump_shift(x);
                if x <= 0.0 || y < c {
                    0.0
                } else {
                    (-(y - c) / x).exp() / x
                }
            }
            _ => unreachable!(),
        }
    }

    /// An interval outside of which `s(x, ·)` carries less than `1e-15` of
    /// its mass.
    pub fn conditional_support(self, x: f64) -> (f64, f64) {
        if let Some((mean, sd)) = self.gaussian_params(x) {
            return (mean - 9.0 * sd, mean + 9.0 * sd);
        }
        match self {
            Example::Bimodal => ((x - 0.9) / 2.0, (x + 1.9) / 2.0),
            Example::ExpJump => {
                let c = exp_jump_shift(x);
                (c, c + 40.0 * x.max(0.0))
            }
            _ => unreachable!(),
        }
    }
}

impl TransitionDensity for Example {
    fn density(&self, x: f64, y: f64) -> f64 {
        self.density_at(x, y)
    }

    fn breakpoints(&self, x: f64) -> Vec<f64> {
        match self {
            Example::ExpJump => vec![exp_jump_shift(x)],
            _ => Vec::new(),
        }
    }
}

/// `s(x, y)` of example `example`.
pub fn true_density(example: Example, x: f64, y: f64) -> f64 {
    example.density_at(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{QuadSpec, Quadrature};
    use crate::sim::{simulate, ChainSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ar_density_at_centre() {
        let expected = 1.0 / (0.25 * (2.0 * PI).sqrt());
        assert!((Example::Ar.density_at(0.5, 0.5) - expected).abs() < 1e-14);
        assert!((expected - 1.595_769_121_605_731).abs() < 1e-12);
    }

    #[test]
    fn every_density_integrates_to_one() {
        let q = Quadrature::new(QuadSpec::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for e in Example::ALL {
            for _ in 0..20 {
                let x: f64 = rand::Rng::random_range(&mut rng, 0.0..1.0);
                let (lo, hi) = e.conditional_support(x);
                let v = q.integrate_scalar(|y| e.density_at(x, y), lo, hi, &e.breakpoints(x));
                assert!(
                    (v - 1.0).abs() < 1e-6,
                    "example {}: x = {x}, integral {v}",
                    e.id()
                );
            }
        }
    }

    #[test]
    fn beta_scale_sd_stays_positive() {
        let min = (0..=10_000)
            .map(|i| beta_scale_sd(i as f64 / 10_000.0 * 1.5 - 0.25))
            .fold(f64::INFINITY, f64::min);
        assert!(min > 0.06 && min < 0.07, "{min}");
        assert_eq!(beta_scale_sd(-0.1), 1.0 / 9.0);
    }

    #[test]
    fn exp_jump_density_conventions() {
        assert_eq!(Example::ExpJump.density_at(0.0, 0.3), 0.0);
        let x = 0.2;
        let c = x / (50.0 * x + 1.0);
        assert_eq!(Example::ExpJump.density_at(x, c - 1e-9), 0.0);
        assert!((Example::ExpJump.density_at(x, c) - 1.0 / x).abs() < 1e-12);
        assert_eq!(Example::ExpJump.breakpoints(x), vec![c]);
    }

    /// One-step histogram from a fixed state against bin probabilities of
    /// the closed form, inside 3σ binomial bands.
    fn one_step_screen(example: Example, x: f64, seed: u64) {
        let draws = 100_000;
        let bins = 20;
        let (lo, hi) = example.conditional_support(x);
        let (lo, hi) = (lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo));
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..draws {
            let y = example.step(x, &mut rng);
            if y >= lo && y < hi {
                counts[((y - lo) / width) as usize] += 1;
            }
        }
        let q = Quadrature::new(QuadSpec::default()).unwrap();
        for (b, &c) in counts.iter().enumerate() {
            let (a, z) = (lo + b as f64 * width, lo + (b + 1) as f64 * width);
            let p = q.integrate_scalar(|y| example.density_at(x, y), a, z, &example.breakpoints(x));
            let expected = draws as f64 * p;
            let band = 3.0 * (draws as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (c as f64 - expected).abs() <= band.max(3.0),
                "example {} bin {b}: {c} vs {expected:.1} ± {band:.1}",
                example.id()
            );
        }
    }

    #[test]
    fn bimodal_transitions_match_closed_form() {
        one_step_screen(Example::Bimodal, 0.4, 5);
    }

    #[test]
    fn gaussian_and_exponential_transitions_match_closed_form() {
        one_step_screen(Example::Arch, 0.3, 6);
        one_step_screen(Example::BetaScale, 0.7, 7);
        one_step_screen(Example::ExpJump, 0.3, 8);
    }

    #[test]
    fn long_run_states_mostly_in_the_unit_interval() {
        for e in [
            Example::Ar,
            Example::Arch,
            Example::BetaScale,
            Example::TwoBump,
        ] {
            let s = simulate(&ChainSpec::new(e), 2_000, 1).unwrap();
            assert!(
                s.in_square_fraction() > 0.75,
                "example {}: {}",
                e.id(),
                s.in_square_fraction()
            );
        }
    }
}
