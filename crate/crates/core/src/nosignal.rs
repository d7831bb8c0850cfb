//! No-signaling checks on the receiver's side of the telegraph.
//!
//! The detectors-on screen state is computed two ways: as the Born-weighted
//! mixture of the screen states left after a which-path measurement of the
//! idler, and (for the detectors-off reference) as the partial trace of the
//! untouched joint state. The routes share no code beyond the state itself.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::device::{
    build_joint_state, eraser_conditionals, incoherent_distribution, which_path_basis,
    DeviceConfig, Pipe, ScreenDistribution,
};
use crate::error::{Error, Result};
use crate::protocol::{
    random_bits, screen_marginal, transmit_message, DetectorConfig, ModelMode, TransmissionPlan,
};
use crate::quantum::{
    born_collapse, born_probabilities, trace_distance, DensityMatrix, StateVector, Subsystem,
};
use crate::rng::SeedStream;

/// Pass thresholds for [`verify_no_signaling`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Bound on total variation and trace distance.
    pub distance: f64,
    /// Bound on mutual information, bits.
    pub information_bits: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            distance: 1e-10,
            information_bits: 0.01,
        }
    }
}

impl Tolerance {
    /// The same bound for every measure.
    pub fn uniform(t: f64) -> Self {
        Tolerance {
            distance: t,
            information_bits: t,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.distance > 0.0 && self.information_bits > 0.0 {
            Ok(())
        } else {
            Err(Error::param(
                "tolerance",
                "tolerance > 0",
                format!("{self:?}"),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoSignalReport {
    pub mode: ModelMode,
    /// TV between the receiver's screen marginals for detectors on and off.
    pub tv_distance: f64,
    /// Trace distance between the receiver's reduced screen states.
    pub trace_distance_reduced: f64,
    /// Information one screen hit carries about a uniformly random detector
    /// setting, bits.
    pub mutual_information_bits: f64,
    pub tolerance: Tolerance,
    pub verdict: Verdict,
}

impl NoSignalReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for NoSignalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: {}", self.mode)?;
        writeln!(f, "tv_distance: {:e}", self.tv_distance)?;
        writeln!(
            f,
            "trace_distance_reduced: {:e}",
            self.trace_distance_reduced
        )?;
        writeln!(
            f,
            "mutual_information_bits: {:e}",
            self.mutual_information_bits
        )?;
        writeln!(f, "distance_threshold: {:e}", self.tolerance.distance)?;
        writeln!(
            f,
            "information_threshold_bits: {:e}",
            self.tolerance.information_bits
        )?;
        writeln!(
            f,
            "verdict: {}",
            match self.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "fail",
            }
        )
    }
}

/// Screen state after the idler is measured which-path, as the
/// probability-weighted mixture of the collapsed screen states.
pub fn measured_screen_state(cfg: &DeviceConfig) -> Result<DensityMatrix> {
    let joint = build_joint_state(cfg)?;
    let basis = which_path_basis(cfg);
    let probs = born_probabilities(&joint, &basis)?;
    let mut parts = Vec::with_capacity(probs.len());
    for (k, p) in probs.into_iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let (_, collapsed) = born_collapse(&joint, &basis, k)?;
        parts.push((
            p,
            collapsed.reduced_density(cfg.joint_dims(), Subsystem::Second)?,
        ));
    }
    DensityMatrix::mixture(&parts)
}

/// Screen state of the untouched pair, by partial trace of `|psi><psi|`.
pub fn unmeasured_screen_state(cfg: &DeviceConfig) -> Result<DensityMatrix> {
    let rho = DensityMatrix::from_state(&build_joint_state(cfg)?)?;
    rho.partial_trace(cfg.joint_dims(), Subsystem::Second)
}

/// Screen state the naive-collapse reading assigns to detectors off: both
/// paths in a single coherent superposition.
fn naive_coherent_screen_state(cfg: &DeviceConfig) -> Result<DensityMatrix> {
    let m1 = crate::device::screen_mode(cfg, Pipe::One)?;
    let m2 = crate::device::screen_mode(cfg, Pipe::Two)?;
    let sum = StateVector::from_amplitudes(m1.iter().zip(&m2).map(|(a, b)| a + b).collect())
        .normalize()?;
    DensityMatrix::from_state(&sum)
}

/// Reduced screen states `(detectors on, detectors off)` under `mode`.
pub fn reduced_screen_states(
    cfg: &DeviceConfig,
    mode: ModelMode,
) -> Result<(DensityMatrix, DensityMatrix)> {
    let on = measured_screen_state(cfg)?;
    let off = match mode {
        ModelMode::UnitaryQM => unmeasured_screen_state(cfg)?,
        ModelMode::NaiveCollapse => naive_coherent_screen_state(cfg)?,
    };
    Ok((on, off))
}

fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum::<f64>()
}

/// Mutual information between a fair detector-setting bit and one hit drawn
/// from the corresponding distribution (Jensen-Shannon divergence, bits).
pub fn single_hit_information(on: &ScreenDistribution, off: &ScreenDistribution) -> Result<f64> {
    if on == off {
        return Ok(0.0);
    }
    on.total_variation(off)?;
    let mix: Vec<f64> = on
        .probabilities()
        .iter()
        .zip(off.probabilities())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let js = entropy_bits(&mix)
        - 0.5 * (entropy_bits(on.probabilities()) + entropy_bits(off.probabilities()));
    Ok(js.max(0.0))
}

pub fn verify_no_signaling(
    cfg: &DeviceConfig,
    mode: ModelMode,
    tolerance: Tolerance,
) -> Result<NoSignalReport> {
    tolerance.validate()?;
    let p_on = screen_marginal(cfg, DetectorConfig::On, mode)?;
    let p_off = screen_marginal(cfg, DetectorConfig::Off, mode)?;
    let tv_distance = p_on.total_variation(&p_off)?;
    let (rho_on, rho_off) = reduced_screen_states(cfg, mode)?;
    let trace_distance_reduced = trace_distance(&rho_on, &rho_off)?;
    let mutual_information_bits = single_hit_information(&p_on, &p_off)?;
    let pass = tv_distance < tolerance.distance
        && trace_distance_reduced < tolerance.distance
        && mutual_information_bits < tolerance.information_bits;
    Ok(NoSignalReport {
        mode,
        tv_distance,
        trace_distance_reduced,
        mutual_information_bits,
        tolerance,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
    })
}

/// Max-norm of `(plus + minus) / 2 - incoherent`, bin by bin.
pub fn eraser_residual(plus: &[f64], minus: &[f64], incoherent: &[f64]) -> Result<f64> {
    if plus.len() != incoherent.len() || minus.len() != incoherent.len() {
        return Err(Error::DimensionMismatch {
            expected: incoherent.len(),
            actual: plus.len().max(minus.len()),
        });
    }
    Ok(plus
        .iter()
        .zip(minus)
        .zip(incoherent)
        .map(|((p, m), i)| (0.5 * (p + m) - i).abs())
        .fold(0.0, f64::max))
}

/// How far the eraser-conditioned patterns are from averaging back to the
/// incoherent pattern.
pub fn eraser_decomposition_check(cfg: &DeviceConfig) -> Result<f64> {
    let e = eraser_conditionals(cfg)?;
    let pi = incoherent_distribution(cfg)?;
    eraser_residual(
        e.plus.probabilities(),
        e.minus.probabilities(),
        pi.probabilities(),
    )
}

/// Plug-in mutual information of paired binary samples, bits.
pub fn plug_in_mutual_information(pairs: &[(bool, bool)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::NoSymbols);
    }
    let n = pairs.len() as f64;
    let mut joint = [[0usize; 2]; 2];
    for &(a, b) in pairs {
        joint[usize::from(a)][usize::from(b)] += 1;
    }
    let row = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
    let col = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]];
    let mut mi = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let c = joint[a][b];
            if c == 0 {
                continue;
            }
            let pab = c as f64 / n;
            mi += pab * ((c as f64 * n) / (row[a] as f64 * col[b] as f64)).log2();
        }
    }
    Ok(mi.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEstimate {
    pub mode: ModelMode,
    pub plan: TransmissionPlan,
    pub symbols: usize,
    pub mutual_information_bits: f64,
    pub error_rate: f64,
    /// Counts indexed `[sent][received]`.
    pub confusion: [[usize; 2]; 2],
}

/// Sends `k` uniformly random bits and estimates the mutual information
/// between sent and decoded symbols.
pub fn channel_mutual_information(
    mode: ModelMode,
    plan: &TransmissionPlan,
    k: usize,
    cfg: &DeviceConfig,
    stream: SeedStream,
) -> Result<ChannelEstimate> {
    if k == 0 {
        return Err(Error::NoSymbols);
    }
    let bits = random_bits(k, stream);
    let t = transmit_message(&bits, plan, mode, cfg, stream)?;
    let pairs: Vec<(bool, bool)> = t.symbols.iter().map(|s| (s.sent, s.received)).collect();
    let mut confusion = [[0usize; 2]; 2];
    for &(a, b) in &pairs {
        confusion[usize::from(a)][usize::from(b)] += 1;
    }
    Ok(ChannelEstimate {
        mode,
        plan: *plan,
        symbols: k,
        mutual_information_bits: plug_in_mutual_information(&pairs)?,
        error_rate: t.error_rate(),
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::coherent_distribution;
    use std::f64::consts::PI;

    #[test]
    fn unitary_mode_passes() {
        let r = verify_no_signaling(
            &DeviceConfig::default(),
            ModelMode::UnitaryQM,
            Tolerance::default(),
        )
        .unwrap();
        assert!(r.tv_distance < 1e-12, "{r:?}");
        assert!(r.trace_distance_reduced < 1e-12, "{r:?}");
        assert_eq!(r.mutual_information_bits, 0.0);
        assert!(r.passed());
    }

    #[test]
    fn naive_mode_fails() {
        let cfg = DeviceConfig::default();
        let r = verify_no_signaling(&cfg, ModelMode::NaiveCollapse, Tolerance::default()).unwrap();
        let tv = coherent_distribution(&cfg)
            .unwrap()
            .total_variation(&incoherent_distribution(&cfg).unwrap())
            .unwrap();
        assert_eq!(r.tv_distance, tv);
        assert!(r.tv_distance > 0.3);
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn vacuous_tolerance_passes_everything() {
        for mode in [ModelMode::UnitaryQM, ModelMode::NaiveCollapse] {
            let r = verify_no_signaling(&DeviceConfig::default(), mode, Tolerance::uniform(1.0))
                .unwrap();
            assert!(r.passed(), "{r:?}");
        }
        assert!(verify_no_signaling(
            &DeviceConfig::default(),
            ModelMode::UnitaryQM,
            Tolerance::uniform(0.0)
        )
        .is_err());
    }

    #[test]
    fn routes_agree_under_unitary_evolution() {
        let cfg = DeviceConfig::default();
        let (on, off) = reduced_screen_states(&cfg, ModelMode::UnitaryQM).unwrap();
        let d_on = on.probabilities().unwrap();
        let d_off = off.probabilities().unwrap();
        let max = d_on
            .iter()
            .zip(&d_off)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max < 1e-12, "{max}");
        // route (a) is the same computation as the unitary screen marginal
        let p_on = screen_marginal(&cfg, DetectorConfig::On, ModelMode::UnitaryQM).unwrap();
        let p_off = screen_marginal(&cfg, DetectorConfig::Off, ModelMode::UnitaryQM).unwrap();
        for (a, b) in p_on.probabilities().iter().zip(p_off.probabilities()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn mixture_identity_for_both_idler_bases() {
        let cfg = DeviceConfig {
            relative_phase: 0.4,
            ..Default::default()
        };
        let joint = build_joint_state(&cfg).unwrap();
        let marginal = unmeasured_screen_state(&cfg)
            .unwrap()
            .probabilities()
            .unwrap();
        for basis in [which_path_basis(&cfg), crate::device::eraser_basis(&cfg)] {
            let probs = born_probabilities(&joint, &basis).unwrap();
            let mut mix = vec![0.0; cfg.bins];
            for (k, p) in probs.iter().enumerate() {
                let (_, s) = born_collapse(&joint, &basis, k).unwrap();
                let cond = s
                    .reduced_density(cfg.joint_dims(), Subsystem::Second)
                    .unwrap()
                    .probabilities()
                    .unwrap();
                for (m, c) in mix.iter_mut().zip(cond) {
                    *m += p * c;
                }
            }
            let dev = mix
                .iter()
                .zip(&marginal)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(dev < 1e-12, "{dev}");
        }
    }

    #[test]
    fn eraser_check_examples() {
        assert!(eraser_decomposition_check(&DeviceConfig::default()).unwrap() < 1e-12);
        let shifted = DeviceConfig {
            relative_phase: PI / 2.0,
            ..Default::default()
        };
        assert!(eraser_decomposition_check(&shifted).unwrap() < 1e-12);

        let cfg = DeviceConfig::default();
        let e = eraser_conditionals(&cfg).unwrap();
        let pi = incoherent_distribution(&cfg).unwrap();
        let mut plus = e.plus.probabilities().to_vec();
        plus[100] += 1e-3;
        let r = eraser_residual(&plus, e.minus.probabilities(), pi.probabilities()).unwrap();
        assert!(r >= 5e-4 * (1.0 - 1e-9), "{r}");
        assert!(eraser_residual(&plus[1..], e.minus.probabilities(), pi.probabilities()).is_err());
    }

    #[test]
    fn plug_in_estimator() {
        assert_eq!(plug_in_mutual_information(&[(true, false)]).unwrap(), 0.0);
        assert!(plug_in_mutual_information(&[]).is_err());
        let perfect = [(true, true), (false, false), (true, true), (false, false)];
        assert!((plug_in_mutual_information(&perfect).unwrap() - 1.0).abs() < 1e-15);
        let independent = [(true, true), (true, false), (false, true), (false, false)];
        assert_eq!(plug_in_mutual_information(&independent).unwrap(), 0.0);
    }

    #[test]
    fn channel_edge_cases() {
        let plan = TransmissionPlan::new(10, 1.0, 1).unwrap();
        let cfg = DeviceConfig::default();
        let s = SeedStream::new(3);
        assert_eq!(
            channel_mutual_information(ModelMode::NaiveCollapse, &plan, 0, &cfg, s),
            Err(Error::NoSymbols)
        );
        let one = channel_mutual_information(ModelMode::NaiveCollapse, &plan, 1, &cfg, s).unwrap();
        assert_eq!(one.mutual_information_bits, 0.0);
    }

    #[test]
    fn text_report_is_key_value_lines() {
        let r = verify_no_signaling(
            &DeviceConfig::default(),
            ModelMode::UnitaryQM,
            Tolerance::default(),
        )
        .unwrap();
        let text = r.to_text();
        for line in text.lines() {
            assert!(line.contains(": "), "{line}");
        }
        assert!(text.ends_with("verdict: pass\n"));
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["verdict"], "pass");
        assert_eq!(json["mode"], "UnitaryQM");
    }
}
