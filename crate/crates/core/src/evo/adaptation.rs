//! Relaxation-factor adaptation (time-variant and uniform).

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Adapted factors are kept this far inside `(omega_lo, omega_hi)`.
pub const CLAMP_MARGIN: f64 = 1e-6;
/// Standard deviation of the Gaussian draws scaling the adaptation steps.
pub const DRAW_STD_DEV: f64 = 0.25;

pub const DEFAULT_E_X: f64 = 0.125;
pub const DEFAULT_E_Y: f64 = 0.03125;
pub const DEFAULT_LAMBDA: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AdaptationMode {
    /// Step sizes scaled by the decaying factor `lambda ln(1 + 1/(t + lambda))`.
    #[default]
    TimeVariant,
    /// Step sizes with a constant unit factor.
    Uniform,
    /// No adaptation; factors stay at their initial values.
    Frozen,
}

impl std::str::FromStr for AdaptationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tva" => Ok(Self::TimeVariant),
            "ua" => Ok(Self::Uniform),
            "frozen" => Ok(Self::Frozen),
            other => Err(Error::InvalidConfig(format!("unknown adaptation mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationParams {
    pub omega_lo: f64,
    pub omega_hi: f64,
    /// Scale of the step that moves the worse factor.
    pub e_x: f64,
    /// Scale of the step that pushes the better factor outwards.
    pub e_y: f64,
    pub lambda: f64,
    pub mode: AdaptationMode,
}

impl Default for AdaptationParams {
    fn default() -> Self {
        Self {
            omega_lo: 0.0,
            omega_hi: 2.0,
            e_x: DEFAULT_E_X,
            e_y: DEFAULT_E_Y,
            lambda: DEFAULT_LAMBDA,
            mode: AdaptationMode::TimeVariant,
        }
    }
}

impl AdaptationParams {
    pub fn with_mode(mode: AdaptationMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            omega_lo,
            omega_hi,
            e_x,
            e_y,
            lambda,
            ..
        } = *self;
        if !(omega_lo.is_finite() && omega_hi.is_finite()) {
            return Err(Error::InvalidConfig("omega bounds must be finite".into()));
        }
        if !(omega_hi - omega_lo > 2.0 * CLAMP_MARGIN) {
            return Err(Error::InvalidConfig(format!(
                "omega bounds ({omega_lo}, {omega_hi}) must be increasing and wider than {}",
                2.0 * CLAMP_MARGIN
            )));
        }
        if !(e_x > 0.0 && e_y > 0.0) {
            return Err(Error::InvalidConfig("e_x and e_y must be positive".into()));
        }
        if !(lambda > 10.0) {
            return Err(Error::InvalidConfig("lambda must exceed 10".into()));
        }
        Ok(())
    }

    /// Step-size factor at generation `t` for the configured mode.
    pub fn time_factor(&self, t: u64) -> f64 {
        match self.mode {
            AdaptationMode::TimeVariant => btv_parameter(t, self.lambda),
            AdaptationMode::Uniform => 1.0,
            AdaptationMode::Frozen => 0.0,
        }
    }

    pub fn clamp(&self, omega: f64) -> f64 {
        omega.clamp(self.omega_lo + CLAMP_MARGIN, self.omega_hi - CLAMP_MARGIN)
    }
}

/// `lambda * ln(1 + 1/(t + lambda))`: in `(0, 1)` for `lambda > 10`, decreasing in `t`.
pub fn btv_parameter(t: u64, lambda: f64) -> f64 {
    lambda * (1.0 / (t as f64 + lambda)).ln_1p()
}

/// The deterministic part of one pair adaptation, given the step parameters.
///
/// `worse` moves to `(0.5 + p_x)(worse + better)`. `better` moves by
/// `p_y` of its distance to the bound on the far side from `worse` (or stays
/// if both are equal). Both results are clamped.
pub fn adapt_with_steps(worse: f64, better: f64, p_x: f64, p_y: f64, params: &AdaptationParams) -> (f64, f64) {
    let worse_new = (0.5 + p_x) * (worse + better);
    let better_new = if better > worse {
        better + p_y * (params.omega_hi - better)
    } else if better < worse {
        better + p_y * (params.omega_lo - better)
    } else {
        better
    };
    (params.clamp(worse_new), params.clamp(better_new))
}

/// Adapts the factors of a pair from their errors.
///
/// Arguments and results are positional: `(omega_a, omega_b)` in,
/// `(omega_a', omega_b')` out. The worse-error member is moved towards the
/// better one, which is pushed away. Equal errors leave both untouched and
/// consume no randomness; otherwise exactly two draws are taken, the worse
/// member's first.
pub fn adapt_pair<R: Rng + ?Sized>(
    (omega_a, error_a): (f64, f64),
    (omega_b, error_b): (f64, f64),
    params: &AdaptationParams,
    t: u64,
    rng: &mut R,
) -> (f64, f64) {
    if params.mode == AdaptationMode::Frozen || error_a == error_b {
        return (omega_a, omega_b);
    }
    let a_is_worse = error_a > error_b;
    let (worse, better) = if a_is_worse {
        (omega_a, omega_b)
    } else {
        (omega_b, omega_a)
    };

    let normal = Normal::new(0.0, DRAW_STD_DEV).expect("constant std dev is valid");
    let g_x = normal.sample(rng);
    let g_y = normal.sample(rng);
    let tf = params.time_factor(t);
    let p_x = params.e_x * g_x * tf;
    let p_y = (params.e_y * g_y * tf).abs();

    let (worse_new, better_new) = adapt_with_steps(worse, better, p_x, p_y, params);
    if a_is_worse {
        (worse_new, better_new)
    } else {
        (better_new, worse_new)
    }
}
