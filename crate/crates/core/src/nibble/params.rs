use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("rank must be at least 2, got {0}")]
    Rank(usize),
    #[error("degree scale must be finite and > 1, got {0}")]
    Delta(f64),
    #[error("phi1 must be finite and positive, got {0}")]
    Phi1(f64),
    #[error("phi2 must lie in (0, 1), got {0}")]
    Phi2(f64),
    #[error("epsilon must be finite and non-negative, got {0}")]
    Epsilon(f64),
    #[error("palette size must be positive")]
    Colors,
}

/// User overrides for the asymptotic constants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Relaxation {
    pub phi1: Option<f64>,
    pub phi2: Option<f64>,
    pub colors: Option<usize>,
    pub epsilon: Option<f64>,
}

/// Constants of the iterative coloring procedure.
///
/// The per-round quantities (`p_i`, `t_i`, ζ_i, ...) are derived on demand by
/// [`Params::schedule`]. Logarithms are natural.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub k: usize,
    pub delta: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub beta: f64,
    /// Palette size C, also the ideal palette size p_0.
    pub colors: usize,
    pub relaxed: bool,
}

impl Params {
    /// φ1 = 1/(60·2^k), φ2 = 1/k^4, C = ⌈φ1^{-1} (Δ/ln Δ)^{1/(k-1)}⌉.
    pub fn theoretical(k: usize, delta: f64) -> Result<Self, ParamsError> {
        Self::build(k, delta, Relaxation::default(), false)
    }

    pub fn relaxed(k: usize, delta: f64, relax: Relaxation) -> Result<Self, ParamsError> {
        Self::build(k, delta, relax, true)
    }

    fn build(k: usize, delta: f64, relax: Relaxation, relaxed: bool) -> Result<Self, ParamsError> {
        if k < 2 {
            return Err(ParamsError::Rank(k));
        }
        if !(delta.is_finite() && delta > 1.0) {
            return Err(ParamsError::Delta(delta));
        }
        let kf = k as f64;
        let phi1 = relax.phi1.unwrap_or(1.0 / (60.0 * 2f64.powi(k as i32)));
        if !(phi1.is_finite() && phi1 > 0.0) {
            return Err(ParamsError::Phi1(phi1));
        }
        let phi2 = relax.phi2.unwrap_or(1.0 / kf.powi(4));
        if !(phi2 > 0.0 && phi2 < 1.0) {
            return Err(ParamsError::Phi2(phi2));
        }
        let theta = 1.0 / (4.0 * kf);
        let log = delta.ln();
        let epsilon = relax
            .epsilon
            .unwrap_or(4.0 * delta.powf(-theta) * log.powi(2 * k as i32));
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(ParamsError::Epsilon(epsilon));
        }
        let colors = match relax.colors {
            Some(c) => c,
            None => ((delta / log).powf(1.0 / (kf - 1.0)) / phi1).ceil() as usize,
        };
        if colors == 0 {
            return Err(ParamsError::Colors);
        }
        Ok(Self {
            k,
            delta,
            phi1,
            phi2,
            theta,
            epsilon,
            beta: 1.0 - phi2,
            colors,
            relaxed,
        })
    }

    /// Loop ends at the first round with ζ_i <= 1/(8k).
    pub fn termination_threshold(&self) -> f64 {
        1.0 / (8.0 * self.k as f64)
    }

    /// ζ_{i-1} - ζ_i = β φ2 / (24 φ1).
    pub fn zeta_step(&self) -> f64 {
        self.beta * self.phi2 / (24.0 * self.phi1)
    }

    /// 24 (k-1) φ1 ln Δ / ((1 - φ2) φ2).
    pub fn round_bound(&self) -> f64 {
        24.0 * (self.k as f64 - 1.0) * self.phi1 * self.delta.ln() / ((1.0 - self.phi2) * self.phi2)
    }

    pub fn schedule(&self) -> Schedule<'_> {
        Schedule {
            params: self,
            next: None,
        }
    }

    pub fn round(&self, i: usize) -> RoundParams {
        self.schedule().nth(i).expect("schedule is infinite")
    }

    /// First `i` with ζ_i <= 1/(8k), searched up to `limit`.
    pub fn round_count(&self, limit: usize) -> Option<usize> {
        let threshold = self.termination_threshold();
        self.schedule()
            .take(limit + 1)
            .find(|r| r.zeta <= threshold)
            .map(|r| r.i)
    }
}

/// Ideal and approximate quantities after round `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundParams {
    pub i: usize,
    /// p_i
    pub palette: f64,
    /// p'_i
    pub palette_approx: f64,
    /// t_i
    pub cdegree: f64,
    /// t'_i
    pub cdegree_approx: f64,
    pub zeta: f64,
    /// π_i; zero for `i = 0`.
    pub activation: f64,
    /// α_i; one for `i = 0`.
    pub alpha: f64,
    /// α'_i; one for `i = 0`.
    pub alpha_prime: f64,
}

impl RoundParams {
    /// The c-degree weight base φ1 p_i.
    pub fn weight(&self, params: &Params) -> f64 {
        params.phi1 * self.palette
    }
}

pub struct Schedule<'a> {
    params: &'a Params,
    next: Option<RoundParams>,
}

impl Params {
    /// Round-0 quantities: p_0 = C, t_0 = (k-1)Δ.
    pub fn initial_round(&self) -> RoundParams {
        let palette = self.colors as f64;
        let cdegree = (self.k as f64 - 1.0) * self.delta;
        finish(self, 0, palette, cdegree, 0.0, 1.0, 1.0)
    }

    /// Advances the recurrences by one round.
    pub fn next_round(&self, prev: &RoundParams) -> RoundParams {
        let k = self.k as i32;
        let weight = self.phi1 * prev.palette;
        let activation = self.phi2 * weight.powi(k - 2) / (4.0 * prev.cdegree);
        let alpha = 1.0 - self.beta * activation * prev.palette / 5.0;
        let alpha_prime = 1.0 - self.beta * activation * prev.palette / 6.0;
        let palette = self.beta * prev.palette;
        let cdegree = alpha_prime * self.beta.powi(k - 1) * prev.cdegree;
        finish(self, prev.i + 1, palette, cdegree, activation, alpha, alpha_prime)
    }
}

impl Iterator for Schedule<'_> {
    type Item = RoundParams;

    fn next(&mut self) -> Option<RoundParams> {
        let current = match &self.next {
            None => self.params.initial_round(),
            Some(prev) => self.params.next_round(prev),
        };
        self.next = Some(current);
        Some(current)
    }
}

fn finish(
    p: &Params,
    i: usize,
    palette: f64,
    cdegree: f64,
    activation: f64,
    alpha: f64,
    alpha_prime: f64,
) -> RoundParams {
    let shrink = (1.0 - p.epsilon / 8.0).max(0.0);
    RoundParams {
        i,
        palette,
        palette_approx: shrink.powi(i as i32) * palette,
        cdegree,
        cdegree_approx: (1.0 + p.epsilon).powi(i as i32) * cdegree,
        zeta: cdegree / (p.phi1 * palette).powi(p.k as i32 - 1),
        activation,
        alpha,
        alpha_prime,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theoretical_constants() {
        let p = Params::theoretical(3, 1e4).unwrap();
        assert_eq!(p.phi1, 1.0 / 480.0);
        assert_eq!(p.phi2, 1.0 / 81.0);
        assert_eq!(p.theta, 1.0 / 12.0);
        assert_eq!(p.beta, 80.0 / 81.0);
        let c = 480.0 * (1e4f64 / 1e4f64.ln()).sqrt();
        assert_eq!(p.colors, c.ceil() as usize);
        let eps = 4.0 * 1e4f64.powf(-1.0 / 12.0) * 1e4f64.ln().powi(6);
        assert!((p.epsilon - eps).abs() <= 1e-12 * eps);
        assert!(!p.relaxed);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(Params::theoretical(1, 10.0), Err(ParamsError::Rank(1)));
        assert!(matches!(Params::theoretical(3, 1.0), Err(ParamsError::Delta(_))));
        let bad = Relaxation {
            phi2: Some(1.0),
            ..Default::default()
        };
        assert!(matches!(Params::relaxed(3, 10.0, bad), Err(ParamsError::Phi2(_))));
        let zero = Relaxation {
            colors: Some(0),
            ..Default::default()
        };
        assert_eq!(Params::relaxed(3, 10.0, zero), Err(ParamsError::Colors));
    }

    #[test]
    fn round_zero() {
        let p = Params::theoretical(4, 1e3).unwrap();
        let r0 = p.round(0);
        assert_eq!(r0.palette, p.colors as f64);
        assert_eq!(r0.cdegree, 3.0 * 1e3);
        assert_eq!(r0.cdegree_approx, r0.cdegree);
        assert_eq!(r0.palette_approx, r0.palette);
        assert_eq!(r0.activation, 0.0);
    }

    #[test]
    fn first_round_by_hand() {
        let relax = Relaxation {
            phi1: Some(0.5),
            phi2: Some(0.1),
            colors: Some(10),
            epsilon: Some(0.0),
        };
        let p = Params::relaxed(3, 4.0, relax).unwrap();
        let r1 = p.round(1);
        // pi = 0.1 * 5 / (4 * 8)
        let pi = 0.1 * 5.0 / 32.0;
        assert!((r1.activation - pi).abs() < 1e-15);
        let ap = 1.0 - 0.9 * pi * 10.0 / 6.0;
        assert!((r1.alpha_prime - ap).abs() < 1e-15);
        assert!((r1.palette - 9.0).abs() < 1e-12);
        assert!((r1.cdegree - ap * 0.81 * 8.0).abs() < 1e-12);
        assert_eq!(r1.palette_approx, r1.palette);
    }

    #[test]
    fn zeta_decreases_by_constant_step() {
        let p = Params::theoretical(3, 1e4).unwrap();
        let step = p.zeta_step();
        let z: Vec<f64> = p.schedule().take(20).map(|r| r.zeta).collect();
        for w in z.windows(2) {
            assert!(((w[0] - w[1]) - step).abs() < 1e-9 * step);
        }
    }

    #[test]
    fn already_terminated() {
        let relax = Relaxation {
            phi1: Some(1.0),
            colors: Some(100),
            ..Default::default()
        };
        let p = Params::relaxed(3, 2.0, relax).unwrap();
        assert!(p.round(0).zeta <= p.termination_threshold());
        assert_eq!(p.round_count(10), Some(0));
    }
}
