//! Named easing curves for the animation clock.
//!
//! Curves follow the d3-ease definitions. Transcendental functions go
//! through `libm` so results do not depend on the platform math library.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Easing {
    #[default]
    Linear,
    QuadIn,
    QuadOut,
    QuadInOut,
    CubicIn,
    CubicOut,
    CubicInOut,
    SinIn,
    SinOut,
    SinInOut,
    ExpIn,
    ExpOut,
    ExpInOut,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown easing `{0}`")]
pub struct UnknownEasing(pub String);

impl Easing {
    pub const ALL: [Easing; 13] = [
        Easing::Linear,
        Easing::QuadIn,
        Easing::QuadOut,
        Easing::QuadInOut,
        Easing::CubicIn,
        Easing::CubicOut,
        Easing::CubicInOut,
        Easing::SinIn,
        Easing::SinOut,
        Easing::SinInOut,
        Easing::ExpIn,
        Easing::ExpOut,
        Easing::ExpInOut,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Easing::Linear => "linear",
            Easing::QuadIn => "quad-in",
            Easing::QuadOut => "quad-out",
            Easing::QuadInOut => "quad-in-out",
            Easing::CubicIn => "cubic-in",
            Easing::CubicOut => "cubic-out",
            Easing::CubicInOut => "cubic-in-out",
            Easing::SinIn => "sin-in",
            Easing::SinOut => "sin-out",
            Easing::SinInOut => "sin-in-out",
            Easing::ExpIn => "exp-in",
            Easing::ExpOut => "exp-out",
            Easing::ExpInOut => "exp-in-out",
        }
    }

    /// Maps a fraction of elapsed time in `[0, 1]` to an eased fraction.
    /// Inputs outside the unit interval are clamped.
    pub fn apply(self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            Easing::Linear => t,
            Easing::QuadIn => t * t,
            Easing::QuadOut => t * (2.0 - t),
            Easing::QuadInOut => {
                let t2 = t * 2.0;
                if t2 <= 1.0 {
                    t2 * t2 / 2.0
                } else {
                    let u = t2 - 1.0;
                    (u * (2.0 - u) + 1.0) / 2.0
                }
            }
            Easing::CubicIn => t * t * t,
            Easing::CubicOut => {
                let u = t - 1.0;
                u * u * u + 1.0
            }
            Easing::CubicInOut => {
                let t2 = t * 2.0;
                if t2 <= 1.0 {
                    t2 * t2 * t2 / 2.0
                } else {
                    let u = t2 - 2.0;
                    (u * u * u + 2.0) / 2.0
                }
            }
            Easing::SinIn => {
                if t == 1.0 {
                    1.0
                } else {
                    1.0 - libm::cos(t * std::f64::consts::FRAC_PI_2)
                }
            }
            Easing::SinOut => libm::sin(t * std::f64::consts::FRAC_PI_2),
            Easing::SinInOut => (1.0 - libm::cos(std::f64::consts::PI * t)) / 2.0,
            Easing::ExpIn => tpmt(1.0 - t),
            Easing::ExpOut => 1.0 - tpmt(t),
            Easing::ExpInOut => {
                let t2 = t * 2.0;
                if t2 <= 1.0 {
                    tpmt(1.0 - t2) / 2.0
                } else {
                    (2.0 - tpmt(t2 - 1.0)) / 2.0
                }
            }
        }
    }

    /// Smallest `t` with `apply(t) >= y`, by bisection. All named curves are
    /// monotone non-decreasing on `[0, 1]`.
    pub fn inverse(self, y: f64) -> f64 {
        if self == Easing::Linear {
            return y.clamp(0.0, 1.0);
        }
        if y <= 0.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..100 {
            let mid = lo + (hi - lo) / 2.0;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.apply(mid) >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// `2^(-10t)` rescaled so that `tpmt(0) = 1` and `tpmt(1) = 0`.
fn tpmt(x: f64) -> f64 {
    (libm::pow(2.0, -10.0 * x) - 0.0009765625) * 1.0009775171065494
}

/// Named easing application; fails on unknown names.
pub fn apply_easing(name: &str, t: f64) -> Result<f64, UnknownEasing> {
    Ok(name.parse::<Easing>()?.apply(t))
}

impl FromStr for Easing {
    type Err = UnknownEasing;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Easing::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| UnknownEasing(s.to_string()))
    }
}

impl fmt::Display for Easing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Easing {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Easing {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_examples() {
        assert_eq!(apply_easing("linear", 0.3).unwrap(), 0.3);
        assert_eq!(apply_easing("quad-in", 0.5).unwrap(), 0.25);
        assert_eq!(apply_easing("cubic-in-out", 0.5).unwrap(), 0.5);
        assert_eq!(apply_easing("cubic-in", 0.5).unwrap(), 0.125);
        assert!(apply_easing("bounce", 0.5).is_err());
    }

    #[test]
    fn endpoints_and_monotonicity() {
        for e in Easing::ALL {
            assert!(e.apply(0.0).abs() <= 1e-9, "{e} at 0");
            assert!((e.apply(1.0) - 1.0).abs() <= 1e-9, "{e} at 1");
            let mut prev = e.apply(0.0);
            for i in 1..=1000 {
                let y = e.apply(i as f64 / 1000.0);
                assert!(y + 1e-12 >= prev, "{e} not monotone at {i}");
                prev = y;
            }
        }
    }

    #[test]
    fn inverse_round_trips() {
        for e in Easing::ALL {
            for i in 0..=20 {
                let t = i as f64 / 20.0;
                let y = e.apply(t);
                let back = e.apply(e.inverse(y));
                assert!((back - y).abs() < 1e-9, "{e} at {t}");
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for e in Easing::ALL {
            assert_eq!(e.name().parse::<Easing>().unwrap(), e);
        }
    }
}
