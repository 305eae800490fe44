//! Single-photon state algebra: preparation, phase encoding, channel
//! rotation and projective measurement.
//!
//! States live in the two-dimensional space spanned by `|0⟩` and `|1⟩` and
//! are stored with `amp0` real and nonnegative, so two states compare equal
//! exactly when they are the same ray.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tolerance::ALGEBRAIC;

/// Number of phase settings `n` and amplitude angle `θ` shared by every
/// preparation and measurement in a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisConfig {
    n: u32,
    theta: f64,
}

impl BasisConfig {
    /// Rejects `n < 3`, `n = 4` (two bases only, which pins the check
    /// distribution at one half) and `θ` outside `(0, π/2)`.
    pub fn new(n: u32, theta: f64) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!("n must be at least 3, got {n}")));
        }
        if n == 4 {
            return Err(invalid("n = 4 is not allowed"));
        }
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(invalid(format!("theta must lie in (0, π/2), got {theta}")));
        }
        Ok(Self { n, theta })
    }

    /// `θ = π/4`.
    pub fn with_n(n: u32) -> Result<Self> {
        Self::new(n, FRAC_PI_4)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Relative phase `2πx/n` carried by index `x`.
    pub fn phase(&self, index: u32) -> f64 {
        2.0 * PI * f64::from(index) / f64::from(self.n)
    }

    pub fn check_index(&self, index: u32) -> Result<()> {
        if index == 0 || index > self.n {
            return Err(invalid(format!("index {index} outside [1, {}]", self.n)));
        }
        Ok(())
    }

    /// Wraps any integer onto `[1, n]`.
    pub fn wrap_index(&self, index: i64) -> u32 {
        let n = i64::from(self.n);
        let r = index.rem_euclid(n);
        if r == 0 {
            self.n
        } else {
            r as u32
        }
    }

    /// Offset `(a − w) mod n` in `[0, n)`.
    pub fn offset(&self, a: u32, w: u32) -> u32 {
        (i64::from(a) - i64::from(w)).rem_euclid(i64::from(self.n)) as u32
    }
}

/// Normalized two-component amplitude vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    amp0: Complex64,
    amp1: Complex64,
}

impl PureState {
    /// Builds a state, checking normalization and removing the global phase.
    pub fn new(amp0: Complex64, amp1: Complex64) -> Result<Self> {
        let norm = amp0.norm_sqr() + amp1.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > ALGEBRAIC {
            return Err(invalid(format!("state norm {norm} differs from 1")));
        }
        Ok(Self::canonical(amp0, amp1))
    }

    /// `cos(angle)|0⟩ + e^{iφ} sin(angle)|1⟩`.
    pub fn from_angles(angle: f64, phase: f64) -> Self {
        Self::canonical(
            Complex64::new(angle.cos(), 0.0),
            Complex64::from_polar(angle.sin(), phase),
        )
    }

    fn canonical(amp0: Complex64, amp1: Complex64) -> Self {
        let r = amp0.norm();
        if r > 0.0 {
            let unphase = amp0.conj() / r;
            Self {
                amp0: Complex64::new(r, 0.0),
                amp1: amp1 * unphase,
            }
        } else {
            Self { amp0: Complex64::new(0.0, 0.0), amp1 }
        }
    }

    pub fn amp0(&self) -> Complex64 {
        self.amp0
    }

    pub fn amp1(&self) -> Complex64 {
        self.amp1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    /// Amplitude angle in `[0, π/2]` of the canonical form.
    pub fn amplitude_angle(&self) -> f64 {
        self.amp1.norm().atan2(self.amp0.re)
    }

    /// Relative phase of `|1⟩` against `|0⟩`.
    pub fn relative_phase(&self) -> f64 {
        self.amp1.arg()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amp0.conj() * other.amp0 + self.amp1.conj() * other.amp1
    }

    /// Swaps the `|0⟩`/`|1⟩` amplitudes (an `H ↔ V` polarization flip).
    pub fn flipped(&self) -> Self {
        Self::canonical(self.amp1, self.amp0)
    }

    pub fn approx_eq(&self, other: &PureState, tol: f64) -> bool {
        (self.amp0 - other.amp0).norm() <= tol && (self.amp1 - other.amp1).norm() <= tol
    }
}

/// Bob's message encoding (and Alice's masking) operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncodeOp {
    /// Identity; carries message bit 0.
    U0,
    /// Phase flip `σ_z`; carries message bit 1.
    U1,
}

impl EncodeOp {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            EncodeOp::U1
        } else {
            EncodeOp::U0
        }
    }

    pub fn bit(self) -> bool {
        matches!(self, EncodeOp::U1)
    }

    /// Product of two operations (both are diagonal, so they commute).
    pub fn compose(self, other: EncodeOp) -> EncodeOp {
        EncodeOp::from_bit(self.bit() ^ other.bit())
    }
}

/// Projective measurement onto `|ψ_w⟩` (outcome `g = 0`) versus its
/// complement (`g = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    basis_index: u32,
    config: BasisConfig,
    /// Extra phase flip folded into the projector; used when decoding
    /// against a state that was masked with `U1`.
    flip: EncodeOp,
}

impl Measurement {
    pub fn new(basis_index: u32, config: BasisConfig) -> Result<Self> {
        config.check_index(basis_index)?;
        Ok(Self { basis_index, config, flip: EncodeOp::U0 })
    }

    /// Projector onto `op|ψ_w⟩`.
    pub fn with_op(basis_index: u32, config: BasisConfig, op: EncodeOp) -> Result<Self> {
        let mut m = Self::new(basis_index, config)?;
        m.flip = op;
        Ok(m)
    }

    pub fn basis_index(&self) -> u32 {
        self.basis_index
    }

    pub fn config(&self) -> BasisConfig {
        self.config
    }

    pub fn flip(&self) -> EncodeOp {
        self.flip
    }

    /// The state projected onto by outcome `g = 0`.
    pub fn target(&self) -> PureState {
        let base = PureState::from_angles(self.config.theta, self.config.phase(self.basis_index));
        apply_encode(&base, self.flip)
    }
}

/// Channel noise acting on the amplitude angle, `θ → θ + δθ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelRotation {
    pub delta_theta: f64,
}

impl ChannelRotation {
    pub fn new(delta_theta: f64) -> Self {
        Self { delta_theta }
    }
}

/// Binary detector outcome `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    /// Projected onto the measurement state.
    Zero,
    /// Projected onto its complement.
    One,
}

impl Outcome {
    pub fn as_u8(self) -> u8 {
        match self {
            Outcome::Zero => 0,
            Outcome::One => 1,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Outcome::Zero
    }
}

/// `cosθ|0⟩ + e^{i2πx/n} sinθ|1⟩`.
pub fn prepare(x: u32, config: BasisConfig) -> Result<PureState> {
    config.check_index(x)?;
    Ok(PureState::from_angles(config.theta, config.phase(x)))
}

pub fn apply_encode(state: &PureState, op: EncodeOp) -> PureState {
    match op {
        EncodeOp::U0 => *state,
        EncodeOp::U1 => PureState { amp0: state.amp0, amp1: -state.amp1 },
    }
}

/// Advances the amplitude angle of the canonical form by `δθ`, keeping the
/// relative phase. Composition is additive while the angle stays inside
/// `[0, π/2]`; past that the canonical form absorbs a sign into the phase.
pub fn apply_rotation(state: &PureState, rot: ChannelRotation) -> PureState {
    if rot.delta_theta == 0.0 {
        return *state;
    }
    let angle = state.amplitude_angle() + rot.delta_theta;
    PureState::from_angles(angle, state.relative_phase())
}

/// Born probability of `g = 0`.
pub fn outcome_probability(state: &PureState, m: &Measurement) -> f64 {
    m.target().inner(state).norm_sqr().clamp(0.0, 1.0)
}

/// Draws `g` by the Born rule from the caller's stream.
pub fn sample_outcome<R: Rng + ?Sized>(state: &PureState, m: &Measurement, rng: &mut R) -> Outcome {
    sample_with_probability(outcome_probability(state, m), rng)
}

pub(crate) fn sample_with_probability<R: Rng + ?Sized>(p_zero: f64, rng: &mut R) -> Outcome {
    if rng.random::<f64>() < p_zero {
        Outcome::Zero
    } else {
        Outcome::One
    }
}

/// `|⟨a|b⟩|²`.
pub fn state_fidelity(a: &PureState, b: &PureState) -> f64 {
    a.inner(b).norm_sqr().clamp(0.0, 1.0)
}
