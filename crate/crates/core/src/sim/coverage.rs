//! Geometric ground truth of what a sensor can perceive.

use super::geometry::Point;
use super::scenario::{ModalityParams, SensorPlacement};

/// Perturbation the user performs for a sensor to react to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stimulus {
    /// Stop-start-stop-start-stop body motion.
    S5,
    LaptopFlash,
    HandWave,
    /// Wake phrase played at a volume level.
    Speak {
        volume: u32,
    },
}

impl Stimulus {
    pub fn name(self) -> &'static str {
        match self {
            Stimulus::S5 => "s5",
            Stimulus::LaptopFlash => "laptop-flash",
            Stimulus::HandWave => "hand-wave",
            Stimulus::Speak { .. } => "speak",
        }
    }
}

/// Whether a stimulus at `point` falls inside the sensor's coverage.
///
/// Sector sensors cover points within range and within half the field of
/// view of the heading. Audio sensors cover the disk whose radius is the
/// hearing distance at the spoken volume.
pub fn coverage_oracle(sensor: &SensorPlacement, point: Point, stimulus: Stimulus) -> bool {
    match (&sensor.params, stimulus) {
        (ModalityParams::Audio(a), Stimulus::Speak { volume }) => point.dist(sensor.position) <= a.radius(volume),
        (ModalityParams::Audio(_), _) => false,
        (_, Stimulus::Speak { .. }) => false,
        _ => sensor.sector().contains(point),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scenario::Modality;

    fn cam() -> SensorPlacement {
        SensorPlacement::new(
            "02:00:00:00:00:01".parse().unwrap(),
            Modality::Camera,
            Point::new(1.0, 1.0),
            0.0,
        )
    }

    #[test]
    fn own_position_is_covered() {
        assert!(coverage_oracle(&cam(), Point::new(1.0, 1.0), Stimulus::S5));
    }

    #[test]
    fn behind_a_camera_is_not_covered() {
        assert!(!coverage_oracle(&cam(), Point::new(0.0, 1.0), Stimulus::S5));
        assert!(coverage_oracle(&cam(), Point::new(2.0, 1.5), Stimulus::S5));
    }

    #[test]
    fn audio_radius_follows_volume() {
        let a = SensorPlacement::new(
            "02:00:00:00:00:02".parse().unwrap(),
            Modality::Audio,
            Point::new(0.0, 0.0),
            0.0,
        );
        let p = Point::new(3.0, 0.0);
        assert!(coverage_oracle(&a, p, Stimulus::Speak { volume: 2 }));
        assert!(!coverage_oracle(&a, p, Stimulus::Speak { volume: 1 }));
        assert!(!coverage_oracle(&a, p, Stimulus::S5));
    }
}
