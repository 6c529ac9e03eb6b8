//! Unicycle dynamics shared by the agent history, predictor, and planner.

use serde::{Deserialize, Serialize};

/// Planar unicycle state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnicycleState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
}

impl UnicycleState {
    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// One control step: longitudinal acceleration and steering rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Control {
    pub accel: f64,
    pub steer_rate: f64,
}

impl Control {
    pub const ZERO: Control = Control {
        accel: 0.0,
        steer_rate: 0.0,
    };
}

/// Advances one step: trapezoidal speed along the pre-step heading, then the
/// heading update. A constant-acceleration straight segment therefore moves
/// by `v·dt + a·dt²/2`.
pub fn step(state: UnicycleState, control: Control, dt: f64) -> UnicycleState {
    let new_speed = state.speed + control.accel * dt;
    let travel = 0.5 * (state.speed + new_speed) * dt;
    UnicycleState {
        x: state.x + travel * state.heading.cos(),
        y: state.y + travel * state.heading.sin(),
        heading: state.heading + control.steer_rate * dt,
        speed: new_speed,
    }
}

/// Replays a control sequence; returns the state after each step.
pub fn rollout(initial: UnicycleState, controls: &[Control], dt: f64) -> Vec<UnicycleState> {
    let mut states = Vec::with_capacity(controls.len());
    let mut current = initial;
    for &c in controls {
        current = step(current, c, dt);
        states.push(current);
    }
    states
}

/// Wraps an angle to (−π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % std::f64::consts::TAU;
    if t > std::f64::consts::PI {
        t -= std::f64::consts::TAU;
    } else if t <= -std::f64::consts::PI {
        t += std::f64::consts::TAU;
    }
    t
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Projection of a point onto a polyline.
#[derive(Debug, Clone, Copy)]
pub struct PolylineProjection {
    pub distance: f64,
    /// Heading of the segment carrying the projection.
    pub heading: f64,
    /// Arclength from the polyline start to the projected point.
    pub arclength: f64,
}

pub fn project_to_polyline(polyline: &[[f64; 2]], point: [f64; 2]) -> PolylineProjection {
    assert!(polyline.len() >= 2, "polyline needs at least two points");
    let mut best = PolylineProjection {
        distance: f64::INFINITY,
        heading: 0.0,
        arclength: 0.0,
    };
    let mut walked = 0.0;
    for seg in polyline.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let d = [b[0] - a[0], b[1] - a[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let t = if len2 > 0.0 {
            (((point[0] - a[0]) * d[0] + (point[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let proj = [a[0] + t * d[0], a[1] + t * d[1]];
        let dist = distance(point, proj);
        if dist < best.distance {
            best = PolylineProjection {
                distance: dist,
                heading: d[1].atan2(d[0]),
                arclength: walked + t * len2.sqrt(),
            };
        }
        walked += len2.sqrt();
    }
    best
}

/// Point at a given arclength along a polyline, clamped to its ends, with the
/// local segment heading.
pub fn point_at_arclength(polyline: &[[f64; 2]], s: f64) -> ([f64; 2], f64) {
    assert!(polyline.len() >= 2);
    let mut remaining = s.max(0.0);
    for seg in polyline.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let len = distance(a, b);
        let heading = (b[1] - a[1]).atan2(b[0] - a[0]);
        if remaining <= len || std::ptr::eq(seg.as_ptr(), &polyline[polyline.len() - 2]) {
            let t = if len > 0.0 { (remaining / len).min(1.0) } else { 0.0 };
            return ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], heading);
        }
        remaining -= len;
    }
    let last = polyline[polyline.len() - 1];
    let prev = polyline[polyline.len() - 2];
    (last, (last[1] - prev[1]).atan2(last[0] - prev[0]))
}

pub fn polyline_length(polyline: &[[f64; 2]]) -> f64 {
    polyline.windows(2).map(|seg| distance(seg[0], seg[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_constant_acceleration_kinematics() {
        let start = UnicycleState {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            speed: 4.0,
        };
        let dt = 0.5;
        let after = step(
            start,
            Control {
                accel: 2.0,
                steer_rate: 0.0,
            },
            dt,
        );
        assert!((after.speed - 5.0).abs() < 1e-15);
        // v dt + a dt²/2 = 2.0 + 0.25
        assert!((after.x - 2.25).abs() < 1e-15);
        assert_eq!(after.y, 0.0);
    }

    #[test]
    fn wrap_angle_stays_in_range() {
        for k in -8..8 {
            let t = wrap_angle(1.0 + k as f64 * std::f64::consts::TAU);
            assert!((t - 1.0).abs() < 1e-9);
        }
        assert!((wrap_angle(std::f64::consts::PI + 0.1) + std::f64::consts::PI - 0.1).abs() < 1e-12);
    }

    #[test]
    fn projection_finds_nearest_segment() {
        let lane = [[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]];
        let proj = project_to_polyline(&lane, [3.0, 2.0]);
        assert!((proj.distance - 2.0).abs() < 1e-12);
        assert!((proj.arclength - 3.0).abs() < 1e-12);
        assert!(proj.heading.abs() < 1e-12);
        let proj = project_to_polyline(&lane, [12.0, 5.0]);
        assert!((proj.distance - 2.0).abs() < 1e-12);
        assert!((proj.heading - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn arclength_lookup_clamps_to_ends() {
        let lane = [[0.0, 0.0], [10.0, 0.0]];
        assert_eq!(point_at_arclength(&lane, 4.0).0, [4.0, 0.0]);
        assert_eq!(point_at_arclength(&lane, 40.0).0, [10.0, 0.0]);
    }
}
