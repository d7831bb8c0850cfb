//! Two-pipe interference device.
//!
//! Each pipe delivers a signal photon to the screen with amplitude
//! `G(x) exp(i s_k kappa x + i delta_k)`, `G(x) = exp(-x^2 / (4 w^2))`,
//! `s_1 = +1`, `s_2 = -1`. The idler photon of the same pair records which
//! pipe was used, giving the joint state
//! `(|1>|psi_1> + |2>|psi_2>) / sqrt(2)` on `idler ⊗ screen`.
//!
//! The screen is discretized into `bins` cells spanning
//! `[-x_max * w, x_max * w]`; amplitudes are sampled at cell centres and
//! renormalized.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    born_probabilities, Bipartition, Label, MeasurementBasis, Scope, StateVector, Subsystem,
    LINALG_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    /// Fringe wavenumber, radians per screen unit.
    pub kappa: f64,
    /// Envelope width `w`, screen units.
    pub envelope_width: f64,
    /// Half-width of the screen grid in units of `w`.
    pub x_max: f64,
    pub bins: usize,
    /// Extra phase picked up in pipe 2, radians.
    pub relative_phase: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        DeviceConfig {
            kappa: PI,
            envelope_width: 2.0,
            x_max: 8.0,
            bins: 256,
            relative_phase: 0.0,
        }
    }
}

impl DeviceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::param("kappa", "kappa > 0", self.kappa));
        }
        if !(self.envelope_width > 0.0 && self.envelope_width.is_finite()) {
            return Err(Error::param("w", "w > 0", self.envelope_width));
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return Err(Error::param("x_max", "x_max > 0", self.x_max));
        }
        if self.bins < 2 {
            return Err(Error::param("B", "B >= 2", self.bins));
        }
        if !self.relative_phase.is_finite() {
            return Err(Error::param(
                "relative_phase",
                "finite",
                self.relative_phase,
            ));
        }
        Ok(())
    }

    /// Half-width of the screen in screen units.
    pub fn half_width(&self) -> f64 {
        self.x_max * self.envelope_width
    }

    pub fn bin_width(&self) -> f64 {
        2.0 * self.half_width() / self.bins as f64
    }

    pub fn bin_center(&self, j: usize) -> f64 {
        -self.half_width() + (j as f64 + 0.5) * self.bin_width()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        (0..self.bins).map(|j| self.bin_center(j)).collect()
    }

    /// Bin containing `x`, or `None` outside the screen.
    pub fn bin_index(&self, x: f64) -> Option<usize> {
        let l = self.half_width();
        if !(-l..=l).contains(&x) {
            return None;
        }
        let j = ((x + l) / self.bin_width()).floor() as usize;
        Some(j.min(self.bins - 1))
    }

    /// Dimensions of the joint `idler ⊗ screen` space.
    pub fn joint_dims(&self) -> Bipartition {
        Bipartition::new(2, self.bins)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pipe {
    One,
    Two,
}

impl Pipe {
    pub const BOTH: [Pipe; 2] = [Pipe::One, Pipe::Two];

    /// Position of the pipe on the idler factor.
    pub fn index(self) -> usize {
        match self {
            Pipe::One => 0,
            Pipe::Two => 1,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }
}

impl TryFrom<u8> for Pipe {
    type Error = Error;

    fn try_from(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Pipe::One),
            2 => Ok(Pipe::Two),
            _ => Err(Error::InvalidPipe(k)),
        }
    }
}

/// Unnormalized screen amplitude of the photon travelling through `pipe`.
pub fn pipe_amplitude(cfg: &DeviceConfig, pipe: Pipe, x: f64) -> Complex64 {
    let w = cfg.envelope_width;
    let envelope = (-x * x / (4.0 * w * w)).exp();
    let phase = match pipe {
        Pipe::One => cfg.kappa * x,
        Pipe::Two => -cfg.kappa * x + cfg.relative_phase,
    };
    Complex64::from_polar(envelope, phase)
}

/// Screen mode `|psi_k>` sampled on bin centres, unit norm.
pub fn screen_mode(cfg: &DeviceConfig, pipe: Pipe) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let amps: Vec<Complex64> = cfg
        .bin_centers()
        .into_iter()
        .map(|x| pipe_amplitude(cfg, pipe, x))
        .collect();
    let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(amps.into_iter().map(|a| a / n).collect())
}

/// The entangled idler/screen state, labelled `Pair(pipe number, bin)`.
pub fn build_joint_state(cfg: &DeviceConfig) -> Result<StateVector> {
    let dims = cfg.joint_dims();
    let mut labels = Vec::with_capacity(dims.dim());
    let mut amps = Vec::with_capacity(dims.dim());
    for pipe in Pipe::BOTH {
        for (j, a) in screen_mode(cfg, pipe)?.into_iter().enumerate() {
            labels.push(Label::Pair(pipe.number() as usize, j));
            amps.push(a * FRAC_1_SQRT_2);
        }
    }
    StateVector::new(labels, amps)?.normalize()
}

/// Idler measurement that reveals the pipe.
pub fn which_path_basis(cfg: &DeviceConfig) -> MeasurementBasis {
    MeasurementBasis::from_label_groups(
        Scope::Factor(cfg.joint_dims(), Subsystem::First),
        vec![("pipe1", vec![0]), ("pipe2", vec![1])],
    )
    .expect("two disjoint singletons cover the idler")
}

/// Idler measurement in the `(|1> ± |2>) / sqrt(2)` basis.
pub fn eraser_basis(cfg: &DeviceConfig) -> MeasurementBasis {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    MeasurementBasis::from_vectors(
        Scope::Factor(cfg.joint_dims(), Subsystem::First),
        vec![("plus", vec![vec![h, h]]), ("minus", vec![vec![h, -h]])],
    )
    .expect("eraser basis is orthonormal")
}

/// Probability vector over screen bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenDistribution {
    probs: Vec<f64>,
}

impl ScreenDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no bins".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidDistribution(format!("entry {p}")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > LINALG_TOL {
            return Err(Error::InvalidDistribution(format!("sum {s}")));
        }
        Ok(ScreenDistribution { probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let s: f64 = weights.iter().sum();
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidDistribution(format!("weight sum {s}")));
        }
        Self::new(weights.into_iter().map(|w| w / s).collect())
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Total variation distance, half the L1 distance.
    pub fn total_variation(&self, other: &ScreenDistribution) -> Result<f64> {
        self.check_len(other)?;
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    pub fn max_abs_diff(&self, other: &ScreenDistribution) -> Result<f64> {
        self.check_len(other)?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn check_len(&self, other: &ScreenDistribution) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            })
        }
    }
}

// |a ± b|^2, with roundoff-level cancellation flushed to an exact zero.
fn superpose(a: Complex64, b: Complex64, sign: f64) -> f64 {
    let s = a + b * sign;
    if s.norm() <= 4.0 * f64::EPSILON * (a.norm() + b.norm()) {
        0.0
    } else {
        s.norm_sqr()
    }
}

fn modes(cfg: &DeviceConfig) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    Ok((screen_mode(cfg, Pipe::One)?, screen_mode(cfg, Pipe::Two)?))
}

/// Screen pattern with both paths interfering: `|psi_1 + psi_2|^2`.
pub fn coherent_distribution(cfg: &DeviceConfig) -> Result<ScreenDistribution> {
    let (m1, m2) = modes(cfg)?;
    ScreenDistribution::from_weights(
        m1.iter()
            .zip(&m2)
            .map(|(a, b)| superpose(*a, *b, 1.0))
            .collect(),
    )
}

/// Screen pattern with which-path information: `(|psi_1|^2 + |psi_2|^2) / 2`.
pub fn incoherent_distribution(cfg: &DeviceConfig) -> Result<ScreenDistribution> {
    let (m1, m2) = modes(cfg)?;
    ScreenDistribution::from_weights(
        m1.iter()
            .zip(&m2)
            .map(|(a, b)| 0.5 * (a.norm_sqr() + b.norm_sqr()))
            .collect(),
    )
}

/// Screen patterns conditioned on the eraser outcomes of the idler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EraserConditionals {
    pub plus: ScreenDistribution,
    pub minus: ScreenDistribution,
    /// Born probabilities of the `plus` and `minus` idler outcomes.
    pub outcome_probabilities: [f64; 2],
}

pub fn eraser_conditionals(cfg: &DeviceConfig) -> Result<EraserConditionals> {
    let (m1, m2) = modes(cfg)?;
    let plus = ScreenDistribution::from_weights(
        m1.iter()
            .zip(&m2)
            .map(|(a, b)| superpose(*a, *b, 1.0))
            .collect(),
    )?;
    let minus = ScreenDistribution::from_weights(
        m1.iter()
            .zip(&m2)
            .map(|(a, b)| superpose(*a, *b, -1.0))
            .collect(),
    )?;
    let probs = born_probabilities(&build_joint_state(cfg)?, &eraser_basis(cfg))?;
    Ok(EraserConditionals {
        plus,
        minus,
        outcome_probabilities: [probs[0], probs[1]],
    })
}

/// Writes `x, p_coherent, p_incoherent, p_plus, p_minus` with a header row.
/// Probabilities are in shortest round-trip scientific notation.
pub fn write_distributions_csv<W: Write>(cfg: &DeviceConfig, out: W) -> Result<()> {
    let coherent = coherent_distribution(cfg)?;
    let incoherent = incoherent_distribution(cfg)?;
    let eraser = eraser_conditionals(cfg)?;
    let mut w = csv::Writer::from_writer(out);
    let export = |e: csv::Error| Error::Export(e.to_string());
    w.write_record(["x", "p_coherent", "p_incoherent", "p_plus", "p_minus"])
        .map_err(export)?;
    for (j, x) in cfg.bin_centers().into_iter().enumerate() {
        w.write_record(&[
            x.to_string(),
            format!("{:e}", coherent.probabilities()[j]),
            format!("{:e}", incoherent.probabilities()[j]),
            format!("{:e}", eraser.plus.probabilities()[j]),
            format!("{:e}", eraser.minus.probabilities()[j]),
        ])
        .map_err(export)?;
    }
    w.flush().map_err(|e| Error::Export(e.to_string()))
}
