//! 1+1 Minkowski kinematics for two instantaneous telegraphs whose
//! "instantaneous" frames move in opposite directions.
//!
//! Units have `c = 1`. A frame with velocity `beta` has simultaneity lines of
//! slope `beta` in the lab `(t, x)` chart.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub x: f64,
}

impl Event {
    pub fn new(t: f64, x: f64) -> Self {
        Event { t, x }
    }
}

/// Velocity of an inertial frame relative to the lab, `|beta| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FrameVelocity(f64);

impl FrameVelocity {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.abs() < 1.0 {
            Ok(FrameVelocity(beta))
        } else {
            Err(Error::Superluminal(beta))
        }
    }

    pub fn beta(self) -> f64 {
        self.0
    }

    pub fn gamma(self) -> f64 {
        1.0 / (1.0 - self.0 * self.0).sqrt()
    }

    pub fn reversed(self) -> Self {
        FrameVelocity(-self.0)
    }
}

impl TryFrom<f64> for FrameVelocity {
    type Error = Error;
    fn try_from(beta: f64) -> Result<Self> {
        FrameVelocity::new(beta)
    }
}

impl From<FrameVelocity> for f64 {
    fn from(v: FrameVelocity) -> f64 {
        v.0
    }
}

/// Lorentz boost of `e` into the frame moving at `beta`.
pub fn boost(e: Event, beta: FrameVelocity) -> Event {
    let b = beta.beta();
    let g = beta.gamma();
    Event {
        t: g * (e.t - b * e.x),
        x: g * (e.x - b * e.t),
    }
}

/// Squared interval `dt^2 - dx^2`; negative for spacelike separation.
pub fn interval(a: Event, b: Event) -> f64 {
    let dt = b.t - a.t;
    let dx = b.x - a.x;
    dt * dt - dx * dx
}

/// Reception at `x_rec` of a signal that is instantaneous in `frame`.
pub fn signal_reception(emission: Event, x_rec: f64, frame: FrameVelocity) -> Event {
    Event {
        t: emission.t + frame.beta() * (x_rec - emission.x),
        x: x_rec,
    }
}

/// Which frame makes collapse instantaneous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum FrameStrategy {
    /// One preferred frame for every telegraph.
    Privileged { beta0: FrameVelocity },
    /// Each telegraph has its own frame; telegraph A's moves at `+v`, B's at `-v`.
    StateDependent { v: FrameVelocity },
}

impl FrameStrategy {
    /// Frames of telegraphs A and B.
    pub fn frames(&self) -> (FrameVelocity, FrameVelocity) {
        match *self {
            FrameStrategy::Privileged { beta0 } => (beta0, beta0),
            FrameStrategy::StateDependent { v } => (v, v.reversed()),
        }
    }
}

/// The four events of the relay loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParadoxTrace {
    pub a_emission: Event,
    pub a_reception: Event,
    pub b_emission: Event,
    pub b_reception: Event,
    /// `t(A emission) - t(B reception)`; positive when the relayed message
    /// arrives before it was first sent.
    pub loop_advance: f64,
    pub closed_loop: bool,
}

impl ParadoxTrace {
    pub fn events(&self) -> [(&'static str, Event); 4] {
        [
            ("A emission", self.a_emission),
            ("A reception", self.a_reception),
            ("B emission", self.b_emission),
            ("B reception", self.b_reception),
        ]
    }

    /// Event table `label,t,x`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let export = |e: csv::Error| Error::Export(e.to_string());
        w.write_record(["label", "t", "x"]).map_err(export)?;
        for (label, e) in self.events() {
            w.write_record(&[label.to_string(), e.t.to_string(), e.x.to_string()])
                .map_err(export)?;
        }
        w.flush().map_err(|e| Error::Export(e.to_string()))
    }
}

/// Telegraph A sends from `x = separation` to the automaton's partner at
/// `x = 0`, which relays immediately through B back to `x = separation`.
pub fn build_paradox(strategy: FrameStrategy, separation: f64) -> Result<ParadoxTrace> {
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::param("X", "X > 0", separation));
    }
    let (frame_a, frame_b) = strategy.frames();
    let a_emission = Event::new(0.0, separation);
    let a_reception = signal_reception(a_emission, 0.0, frame_a);
    let b_emission = a_reception;
    let b_reception = signal_reception(b_emission, separation, frame_b);
    let loop_advance = a_emission.t - b_reception.t;
    Ok(ParadoxTrace {
        a_emission,
        a_reception,
        b_emission,
        b_reception,
        loop_advance,
        closed_loop: loop_advance > 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Message {
    M1,
    M2,
}

/// What the automaton sends through A for each message it reads from B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonRule {
    pub on_m1: Message,
    pub on_m2: Message,
}

impl AutomatonRule {
    pub const NEGATION: AutomatonRule = AutomatonRule {
        on_m1: Message::M2,
        on_m2: Message::M1,
    };
    pub const IDENTITY: AutomatonRule = AutomatonRule {
        on_m1: Message::M1,
        on_m2: Message::M2,
    };

    pub fn apply(&self, m: Message) -> Message {
        match m {
            Message::M1 => self.on_m1,
            Message::M2 => self.on_m2,
        }
    }
}

/// Messages consistent with a closed loop feeding the automaton its own output.
pub fn automaton_fixed_points(rule: AutomatonRule) -> Vec<Message> {
    [Message::M1, Message::M2]
        .into_iter()
        .filter(|m| rule.apply(*m) == *m)
        .collect()
}

/// Loop geometry plus the automaton's verdict on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadoxReport {
    pub strategy: FrameStrategy,
    pub separation: f64,
    pub trace: ParadoxTrace,
    pub rule: AutomatonRule,
    pub fixed_points: Vec<Message>,
    /// A closed loop with no self-consistent message.
    pub contradiction: bool,
}

pub fn paradox_report(
    strategy: FrameStrategy,
    separation: f64,
    rule: AutomatonRule,
) -> Result<ParadoxReport> {
    let trace = build_paradox(strategy, separation)?;
    let fixed_points = automaton_fixed_points(rule);
    Ok(ParadoxReport {
        strategy,
        separation,
        trace,
        rule,
        contradiction: trace.closed_loop && fixed_points.is_empty(),
        fixed_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fv(b: f64) -> FrameVelocity {
        FrameVelocity::new(b).unwrap()
    }

    fn close(a: Event, b: Event, tol: f64) -> bool {
        (a.t - b.t).abs() < tol && (a.x - b.x).abs() < tol
    }

    #[test]
    fn boost_examples() {
        let e = Event::new(0.3, -1.7);
        assert_eq!(boost(e, fv(0.0)), e);
        let b = boost(Event::new(0.0, 1.0), fv(0.6));
        assert!(close(b, Event::new(-0.75, 1.25), 1e-15), "{b:?}");
        assert!(close(boost(boost(e, fv(0.8)), fv(-0.8)), e, 1e-12));
        assert_eq!(FrameVelocity::new(1.0), Err(Error::Superluminal(1.0)));
        assert!(FrameVelocity::new(-1.5).is_err());
    }

    #[test]
    fn interval_examples() {
        let e = Event::new(1.0, 2.0);
        assert_eq!(interval(e, e), 0.0);
        assert_eq!(interval(Event::new(0.0, 0.0), Event::new(0.0, 1.0)), -1.0);
    }

    #[test]
    fn reception_examples() {
        let em = Event::new(2.0, 3.0);
        assert_eq!(signal_reception(em, -4.0, fv(0.0)), Event::new(2.0, -4.0));
        let rec = signal_reception(Event::new(0.0, 1.0), 0.0, fv(0.5));
        assert!(close(rec, Event::new(-0.5, 0.0), 1e-15));
        let (b1, b2) = (boost(Event::new(0.0, 1.0), fv(0.5)), boost(rec, fv(0.5)));
        assert!((b1.t - b2.t).abs() < 1e-15);
        assert_eq!(signal_reception(em, 3.0, fv(0.7)), em);
    }

    #[test]
    fn state_dependent_loop() {
        let p = build_paradox(FrameStrategy::StateDependent { v: fv(0.5) }, 1.0).unwrap();
        assert!(close(p.a_reception, Event::new(-0.5, 0.0), 1e-15));
        assert!(close(p.b_reception, Event::new(-1.0, 1.0), 1e-15));
        assert!((p.loop_advance - 1.0).abs() < 1e-15);
        assert!(p.closed_loop);
        assert_eq!(p.b_emission, p.a_reception);

        let p = build_paradox(FrameStrategy::StateDependent { v: fv(0.0) }, 1.0).unwrap();
        assert!(p.events().iter().all(|(_, e)| e.t == 0.0));
        assert_eq!(p.loop_advance, 0.0);
        assert!(!p.closed_loop);
    }

    #[test]
    fn privileged_frame_cancels() {
        let p = build_paradox(FrameStrategy::Privileged { beta0: fv(0.3) }, 1.0).unwrap();
        assert!(close(p.b_reception, p.a_emission, 1e-15));
        assert!(p.loop_advance.abs() < 1e-15);
        assert!(!p.closed_loop);
        assert!(build_paradox(FrameStrategy::Privileged { beta0: fv(0.3) }, 0.0).is_err());
        assert!(build_paradox(FrameStrategy::Privileged { beta0: fv(0.3) }, -2.0).is_err());
    }

    #[test]
    fn automaton_examples() {
        assert!(automaton_fixed_points(AutomatonRule::NEGATION).is_empty());
        assert_eq!(
            automaton_fixed_points(AutomatonRule::IDENTITY),
            vec![Message::M1, Message::M2]
        );
        let constant = AutomatonRule {
            on_m1: Message::M1,
            on_m2: Message::M1,
        };
        assert_eq!(automaton_fixed_points(constant), vec![Message::M1]);
    }

    #[test]
    fn report_flags_contradiction_only_for_closed_loop_and_no_fixed_point() {
        let sd = FrameStrategy::StateDependent { v: fv(0.5) };
        let pr = FrameStrategy::Privileged { beta0: fv(0.5) };
        assert!(
            paradox_report(sd, 1.0, AutomatonRule::NEGATION)
                .unwrap()
                .contradiction
        );
        assert!(
            !paradox_report(sd, 1.0, AutomatonRule::IDENTITY)
                .unwrap()
                .contradiction
        );
        assert!(
            !paradox_report(pr, 1.0, AutomatonRule::NEGATION)
                .unwrap()
                .contradiction
        );
    }

    #[test]
    fn trace_csv_and_json() {
        let p = build_paradox(FrameStrategy::StateDependent { v: fv(0.5) }, 1.0).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "label,t,x\nA emission,0,1\nA reception,-0.5,0\nB emission,-0.5,0\nB reception,-1,1\n"
        );
        let json = serde_json::to_value(p).unwrap();
        assert_eq!(json["loop_advance"], 1.0);
        let s: FrameStrategy =
            serde_json::from_str(r#"{"strategy":"state_dependent","v":0.5}"#).unwrap();
        assert_eq!(s, FrameStrategy::StateDependent { v: fv(0.5) });
        assert!(
            serde_json::from_str::<FrameStrategy>(r#"{"strategy":"privileged","beta0":1.2}"#)
                .is_err()
        );
    }

    proptest! {
        #[test]
        fn interval_is_boost_invariant(t1 in -10.0f64..10.0, x1 in -10.0f64..10.0, t2 in -10.0f64..10.0, x2 in -10.0f64..10.0, neg in any::<bool>()) {
            let b = fv(if neg { -0.9 } else { 0.9 });
            let (e1, e2) = (Event::new(t1, x1), Event::new(t2, x2));
            let d = interval(e1, e2) - interval(boost(e1, b), boost(e2, b));
            prop_assert!(d.abs() < 1e-10);
        }

        #[test]
        fn legs_are_simultaneous_and_spacelike(v in -0.99f64..0.99, sep in 0.01f64..100.0, privileged in any::<bool>()) {
            let strategy = if privileged {
                FrameStrategy::Privileged { beta0: fv(v) }
            } else {
                FrameStrategy::StateDependent { v: fv(v) }
            };
            let p = build_paradox(strategy, sep).unwrap();
            let (fa, fb) = strategy.frames();
            for (em, rec, f) in [(p.a_emission, p.a_reception, fa), (p.b_emission, p.b_reception, fb)] {
                prop_assert!((boost(em, f).t - boost(rec, f).t).abs() < 1e-12 * sep.max(1.0));
                prop_assert!(interval(em, rec) < 0.0);
            }
            prop_assert!((p.b_reception.x - p.a_emission.x).abs() < 1e-12);
            let expected = if privileged { 0.0 } else { 2.0 * v * sep };
            prop_assert!((p.loop_advance - expected).abs() < 1e-12 * sep.max(1.0));
        }
    }
}
