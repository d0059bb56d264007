//! Parametric spherical-head model and talker directivity.
//!
//! Azimuths are in degrees, 0° straight ahead of the listener and positive
//! toward the listener's left.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::config::{DirectivityModel, Trajectory, TrajectoryKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ear {
    Left,
    Right,
}

impl Ear {
    pub const BOTH: [Ear; 2] = [Ear::Left, Ear::Right];

    pub fn index(self) -> usize {
        match self {
            Ear::Left => 0,
            Ear::Right => 1,
        }
    }

    /// +1 for the left ear, −1 for the right.
    pub fn side(self) -> f64 {
        match self {
            Ear::Left => 1.0,
            Ear::Right => -1.0,
        }
    }
}

/// Wraps an angle in degrees to `(-180, 180]`.
pub fn wrap_deg(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Talker orientation at `t_s` seconds.
pub fn orientation_at(trajectory: &Trajectory, t_s: f64) -> Result<f64> {
    if !(t_s >= 0.0) {
        return Err(Error::invalid(format!("negative time {t_s}")));
    }
    Ok(match trajectory.kind {
        TrajectoryKind::Stationary => trajectory.start_deg,
        TrajectoryKind::ConstantRotation => {
            let moving = (t_s - trajectory.onset_s).max(0.0);
            let span = trajectory.end_deg - trajectory.start_deg;
            let travelled = (360.0 * trajectory.speed_rev_per_s * moving).min(span.abs());
            trajectory.start_deg + travelled.copysign(span)
        }
    })
}

/// Woodworth interaural time difference `(a/c)(θ + sin θ)`, right-ear
/// arrival minus left-ear arrival. Positive for sources on the left.
pub fn itd_seconds(azimuth_deg: f64, head_radius_m: f64, c_mps: f64) -> f64 {
    let az = wrap_deg(azimuth_deg);
    let lateral = if az.abs() <= 90.0 { az.abs() } else { 180.0 - az.abs() };
    let theta = lateral.to_radians();
    let tau = head_radius_m / c_mps * (theta + theta.sin());
    if az < 0.0 {
        -tau
    } else {
        tau
    }
}

/// First-order spherical head-shadow filter
/// `(1 + iα·ω/2ω₀) / (1 + iω/2ω₀)`, `ω₀ = c/a`, `α = 1 + cos(θ − θ_ear)`.
pub fn head_shadow_gain(
    azimuth_deg: f64,
    ear: Ear,
    freq_hz: f64,
    head_radius_m: f64,
    c_mps: f64,
    ear_deg: f64,
) -> Complex64 {
    let theta_ear = ear.side() * ear_deg;
    let alpha = 1.0 + (azimuth_deg - theta_ear).to_radians().cos();
    let omega0 = c_mps / head_radius_m;
    let x = 2.0 * PI * freq_hz / (2.0 * omega0);
    Complex64::new(1.0, alpha * x) / Complex64::new(1.0, x)
}

impl DirectivityModel {
    /// Cardioid mix coefficient at `freq_hz`: constant outside the outer
    /// band centres, linear in log-frequency between them.
    pub fn beta_at(&self, freq_hz: f64) -> f64 {
        let c = &self.band_centers_hz;
        let b = &self.beta;
        if freq_hz <= c[0] {
            return b[0];
        }
        if freq_hz >= c[c.len() - 1] {
            return b[b.len() - 1];
        }
        let i = c.partition_point(|&x| x <= freq_hz) - 1;
        let t = (freq_hz / c[i]).ln() / (c[i + 1] / c[i]).ln();
        b[i] + t * (b[i + 1] - b[i])
    }

    /// Radiation gain toward a direction `theta_rel_deg` off the talker's facing axis.
    pub fn gain(&self, theta_rel_deg: f64, freq_hz: f64) -> f64 {
        let beta = self.beta_at(freq_hz);
        (1.0 - beta) + beta * theta_rel_deg.to_radians().cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: f64 = 0.0875;
    const C: f64 = 343.0;

    #[test]
    fn orientation_examples() {
        let still = Trajectory::stationary(-90.0);
        assert_eq!(orientation_at(&still, 3.0).unwrap(), -90.0);
        let rot = Trajectory::rotation(0.1);
        assert_eq!(orientation_at(&rot, 0.0).unwrap(), -90.0);
        assert!(orientation_at(&rot, 2.5).unwrap().abs() < 1e-12);
        assert_eq!(orientation_at(&rot, 10.0).unwrap(), 90.0);
        assert!(orientation_at(&rot, -0.1).is_err());
        let delayed = Trajectory {
            onset_s: 1.0,
            ..rot
        };
        assert_eq!(orientation_at(&delayed, 0.5).unwrap(), -90.0);
        assert!(orientation_at(&delayed, 3.5).unwrap().abs() < 1e-12);
    }

    #[test]
    fn itd_examples() {
        assert_eq!(itd_seconds(0.0, 0.2, C), 0.0);
        assert_eq!(itd_seconds(180.0, A, C), 0.0);
        // (a/c)(π/2 + 1), evaluated independently
        let expected = 0.0875 / 343.0 * (std::f64::consts::FRAC_PI_2 + 1.0);
        assert!((expected - 655.8e-6).abs() < 0.05e-6);
        assert!((itd_seconds(90.0, A, C) - expected).abs() < 1e-15);
        assert!((itd_seconds(-90.0, A, C) + expected).abs() < 1e-15);
    }

    #[test]
    fn itd_is_antisymmetric_and_peaks_at_the_side() {
        for deg in (0..=180).step_by(5).map(f64::from) {
            let l = itd_seconds(deg, A, C);
            assert!((l + itd_seconds(-deg, A, C)).abs() < 1e-18);
            assert!(l.abs() <= itd_seconds(90.0, A, C) + 1e-18);
            // front/back folding
            assert!((l - itd_seconds(180.0 - deg, A, C)).abs() < 1e-15);
        }
    }

    #[test]
    fn shadow_limits() {
        for az in [-170.0, -90.0, 0.0, 45.0, 135.0] {
            for ear in Ear::BOTH {
                assert!((head_shadow_gain(az, ear, 1e-6, A, C, 100.0).norm() - 1.0).abs() < 1e-9);
            }
        }
        // on the ear axis α = 2: high-frequency limit +6.02 dB
        let hi = head_shadow_gain(100.0, Ear::Left, 1e9, A, C, 100.0).norm();
        assert!((hi - 2.0).abs() < 1e-5);
        // diametrically opposite α = 0
        let lo = head_shadow_gain(-80.0, Ear::Left, 1e9, A, C, 100.0).norm();
        assert!(lo < 1e-5);
        // mirror symmetry between the ears
        let l = head_shadow_gain(30.0, Ear::Left, 4000.0, A, C, 100.0);
        let r = head_shadow_gain(-30.0, Ear::Right, 4000.0, A, C, 100.0);
        assert!((l - r).norm() < 1e-15);
    }

    #[test]
    fn directivity_shape() {
        let d = DirectivityModel::default();
        assert_eq!(d.beta_at(100.0), 0.3);
        assert_eq!(d.beta_at(2000.0), 0.6);
        assert_eq!(d.beta_at(20_000.0), 0.85);
        assert!((d.beta_at(1000.0) - 0.45).abs() < 1e-12);
        for f in [250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0] {
            assert!((d.gain(0.0, f) - 1.0).abs() < 1e-15);
            let mut prev = f64::INFINITY;
            for deg in (0..=180).step_by(10) {
                let g = d.gain(deg as f64, f);
                assert!(g <= prev);
                prev = g;
            }
        }
        // higher bands are more directional
        assert!(d.gain(90.0, 8000.0) < d.gain(90.0, 2000.0));
        assert!(d.gain(90.0, 2000.0) < d.gain(90.0, 500.0));
    }

    #[test]
    fn wrap() {
        assert_eq!(wrap_deg(190.0), -170.0);
        assert_eq!(wrap_deg(-180.0), 180.0);
        assert_eq!(wrap_deg(45.0), 45.0);
    }
}
