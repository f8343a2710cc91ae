//! Robot motion models.
//!
//! Two abstraction levels are supported. At the single-integrator level a
//! robot is a point whose velocity is commanded directly. At the unicycle
//! level the robot has a heading and accepts linear and angular speed. The
//! near-identity diffeomorphism maps single-integrator commands for a point
//! held a distance `l` ahead of the wheel axle onto unicycle commands, which
//! is how single-integrator controllers drive differential-drive robots.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::math::Vec2;
use crate::{Error, Result};

/// Position in meters plus heading in radians, normalized to `(-pi, pi]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta: wrap_angle(theta) }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    fn check_finite(&self) -> Result<()> {
        if self.x.is_finite() && self.y.is_finite() && self.theta.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(format!("pose {self:?}")))
        }
    }
}

/// Single-integrator velocity command (m/s).
pub type SiVelocity = Vec2;

/// Unicycle command: linear speed `v` (m/s) and turn rate `omega` (rad/s).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UniVelocity {
    pub v: f64,
    pub omega: f64,
}

/// Geometry used when translating between abstraction levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbstractionParams {
    /// Look-ahead offset of the controlled point (m).
    pub l: f64,
    pub wheel_base: f64,
    pub wheel_radius: f64,
}

impl Default for AbstractionParams {
    fn default() -> Self {
        // Wheel geometry is nominal miniature differential-drive scale.
        Self { l: 0.05, wheel_base: 0.03, wheel_radius: 0.005 }
    }
}

impl AbstractionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("l", self.l), ("wheel_base", self.wheel_base), ("wheel_radius", self.wheel_radius)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !dt.is_finite() {
        return Err(Error::NonFinite("dt".into()));
    }
    if dt <= 0.0 {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    Ok(())
}

/// Explicit Euler step of the single integrator `x' = u`. Heading is untouched.
pub fn si_step(pose: Pose, u: SiVelocity, dt: f64) -> Result<Pose> {
    pose.check_finite()?;
    if !u.is_finite() {
        return Err(Error::NonFinite(format!("velocity {u:?}")));
    }
    check_dt(dt)?;
    Ok(Pose { x: pose.x + u.x * dt, y: pose.y + u.y * dt, theta: pose.theta })
}

/// Explicit Euler step of unicycle kinematics.
pub fn uni_step(pose: Pose, cmd: UniVelocity, dt: f64) -> Result<Pose> {
    pose.check_finite()?;
    if !(cmd.v.is_finite() && cmd.omega.is_finite()) {
        return Err(Error::NonFinite(format!("unicycle command {cmd:?}")));
    }
    check_dt(dt)?;
    let (s, c) = pose.theta.sin_cos();
    Ok(Pose { x: pose.x + cmd.v * c * dt, y: pose.y + cmd.v * s * dt, theta: wrap_angle(pose.theta + cmd.omega * dt) })
}

/// Map a single-integrator velocity for the look-ahead point onto unicycle
/// commands: `v = R(-theta)_x u`, `omega = R(-theta)_y u / l`.
pub fn si_to_uni(u: SiVelocity, pose: Pose, params: &AbstractionParams) -> Result<UniVelocity> {
    if !params.l.is_finite() || params.l <= 0.0 {
        return Err(Error::InvalidParameter(format!("look-ahead offset l must be > 0, got {}", params.l)));
    }
    pose.check_finite()?;
    if !u.is_finite() {
        return Err(Error::NonFinite(format!("velocity {u:?}")));
    }
    let (s, c) = pose.theta.sin_cos();
    Ok(UniVelocity { v: c * u.x + s * u.y, omega: (-s * u.x + c * u.y) / params.l })
}

/// Inverse direction of [`si_to_uni`]: the velocity of the look-ahead point
/// produced by a unicycle command.
pub fn uni_to_si(cmd: UniVelocity, pose: Pose, params: &AbstractionParams) -> SiVelocity {
    let (s, c) = pose.theta.sin_cos();
    Vec2::new(c * cmd.v - params.l * s * cmd.omega, s * cmd.v + params.l * c * cmd.omega)
}

/// The point `l` ahead of the robot along its heading.
pub fn uni_to_si_point(pose: Pose, params: &AbstractionParams) -> Result<Vec2> {
    pose.check_finite()?;
    if !params.l.is_finite() || params.l < 0.0 {
        return Err(Error::InvalidParameter(format!("look-ahead offset l must be >= 0, got {}", params.l)));
    }
    let (s, c) = pose.theta.sin_cos();
    Ok(Vec2::new(pose.x + params.l * c, pose.y + params.l * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalGains {
    pub k_v: f64,
    pub k_w: f64,
    pub v_max: f64,
    pub w_max: f64,
    /// Distance below which the robot counts as arrived (m).
    pub arrival_tolerance: f64,
}

impl Default for GoalGains {
    fn default() -> Self {
        Self { k_v: 1.0, k_w: 2.0, v_max: 0.1, w_max: 2.0 * PI, arrival_tolerance: 0.005 }
    }
}

/// Proportional waypoint tracking for a unicycle.
pub fn go_to_goal(pose: Pose, goal: Vec2, gains: &GoalGains) -> UniVelocity {
    let delta = goal - pose.position();
    let distance = delta.norm();
    if distance < gains.arrival_tolerance {
        return UniVelocity::default();
    }
    let bearing_error = wrap_angle(delta.y.atan2(delta.x) - pose.theta);
    UniVelocity {
        v: (gains.k_v * distance * bearing_error.cos()).clamp(-gains.v_max, gains.v_max),
        omega: (gains.k_w * bearing_error).clamp(-gains.w_max, gains.w_max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn assert_pose(p: Pose, x: f64, y: f64, theta: f64) {
        assert_abs_diff_eq!(p.x, x, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, y, epsilon = 1e-12);
        assert_abs_diff_eq!(p.theta, theta, epsilon = 1e-12);
    }

    #[test]
    fn si_step_examples() {
        assert_pose(si_step(Pose::new(0.0, 0.0, 0.0), Vec2::new(1.0, 0.0), 0.1).unwrap(), 0.1, 0.0, 0.0);
        assert_pose(si_step(Pose::new(0.3, -0.2, 1.0), Vec2::ZERO, 0.5).unwrap(), 0.3, -0.2, 1.0);
        assert_pose(si_step(Pose::new(0.0, 0.0, 0.0), Vec2::new(0.1, 0.1), 1.0).unwrap(), 0.1, 0.1, 0.0);
    }

    #[test]
    fn si_step_rejects_bad_input() {
        let p = Pose::default();
        assert!(matches!(si_step(p, Vec2::new(f64::NAN, 0.0), 0.1), Err(Error::NonFinite(_))));
        assert!(matches!(si_step(p, Vec2::ZERO, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(si_step(p, Vec2::ZERO, f64::INFINITY), Err(Error::NonFinite(_))));
    }

    #[test]
    fn uni_step_examples() {
        let v1 = UniVelocity { v: 1.0, omega: 0.0 };
        assert_pose(uni_step(Pose::new(0.0, 0.0, 0.0), v1, 0.1).unwrap(), 0.1, 0.0, 0.0);
        assert_pose(uni_step(Pose::new(0.0, 0.0, FRAC_PI_2), v1, 0.1).unwrap(), 0.0, 0.1, FRAC_PI_2);
        let spin = UniVelocity { v: 0.0, omega: PI };
        assert_pose(uni_step(Pose::new(0.0, 0.0, 0.0), spin, 1.0).unwrap(), 0.0, 0.0, PI);
        assert!(uni_step(Pose::default(), UniVelocity { v: f64::NAN, omega: 0.0 }, 0.1).is_err());
    }

    #[test]
    fn si_to_uni_examples() {
        let params = AbstractionParams { l: 0.05, ..Default::default() };
        let r = si_to_uni(Vec2::new(0.5, 0.0), Pose::new(0.0, 0.0, 0.0), &params).unwrap();
        assert_abs_diff_eq!(r.v, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.omega, 0.0, epsilon = 1e-12);
        let r = si_to_uni(Vec2::new(0.0, 0.1), Pose::new(0.0, 0.0, 0.0), &params).unwrap();
        assert_abs_diff_eq!(r.v, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.omega, 2.0, epsilon = 1e-12);
        let r = si_to_uni(Vec2::new(0.0, 0.5), Pose::new(0.0, 0.0, FRAC_PI_2), &params).unwrap();
        assert_abs_diff_eq!(r.v, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.omega, 0.0, epsilon = 1e-12);

        let bad = AbstractionParams { l: 0.0, ..Default::default() };
        assert!(matches!(si_to_uni(Vec2::ZERO, Pose::default(), &bad), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn look_ahead_point() {
        let params = AbstractionParams { l: 0.05, ..Default::default() };
        let p = uni_to_si_point(Pose::new(0.0, 0.0, 0.0), &params).unwrap();
        assert_abs_diff_eq!(p.x, 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-12);
        let p = uni_to_si_point(Pose::new(1.0, 1.0, FRAC_PI_2), &params).unwrap();
        assert_abs_diff_eq!(p.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 1.05, epsilon = 1e-12);
        let zero = AbstractionParams { l: 0.0, ..Default::default() };
        assert_eq!(uni_to_si_point(Pose::new(0.0, 0.0, 2.3), &zero).unwrap(), Vec2::ZERO);
    }

    #[test]
    fn go_to_goal_examples() {
        let gains = GoalGains { k_v: 1.0, k_w: 2.0, v_max: 10.0, w_max: 10.0, arrival_tolerance: 1e-3 };
        let ahead = go_to_goal(Pose::default(), Vec2::new(1.0, 0.0), &gains);
        assert!(ahead.v > 0.0);
        assert_eq!(ahead.omega, 0.0);
        assert_eq!(go_to_goal(Pose::default(), Vec2::ZERO, &gains), UniVelocity::default());
        let left = go_to_goal(Pose::default(), Vec2::new(0.0, 1.0), &gains);
        assert_abs_diff_eq!(left.omega, 2.0 * FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(left.v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn go_to_goal_saturates() {
        let gains = GoalGains { k_v: 5.0, k_w: 5.0, v_max: 0.1, w_max: 1.0, arrival_tolerance: 1e-3 };
        let cmd = go_to_goal(Pose::default(), Vec2::new(-3.0, 0.1), &gains);
        assert!(cmd.v.abs() <= 0.1 && cmd.omega.abs() <= 1.0);
    }

    #[test]
    fn wrap_boundaries() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI / 2.0), -FRAC_PI_2, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn heading_stays_wrapped(
            theta in -10.0f64..10.0,
            cmds in prop::collection::vec((-1.0f64..1.0, -20.0f64..20.0), 1..50),
        ) {
            let mut pose = Pose::new(0.0, 0.0, theta);
            for (v, omega) in cmds {
                pose = uni_step(pose, UniVelocity { v, omega }, 0.05).unwrap();
                prop_assert!(pose.theta > -PI && pose.theta <= PI);
            }
        }

        #[test]
        fn si_step_linear_in_command(
            x in -1.0f64..1.0, y in -1.0f64..1.0,
            ux in -1.0f64..1.0, uy in -1.0f64..1.0,
            scale in -3.0f64..3.0, dt in 0.001f64..0.5,
        ) {
            let p = Pose::new(x, y, 0.0);
            let base = si_step(p, Vec2::new(ux, uy), dt).unwrap();
            let scaled = si_step(p, Vec2::new(ux, uy) * scale, dt).unwrap();
            let d_base = base.position() - p.position();
            let d_scaled = scaled.position() - p.position();
            prop_assert!((d_scaled - d_base * scale).norm() <= 1e-12);
        }

        #[test]
        fn diffeomorphism_first_order_consistent(
            theta in -PI..PI,
            ux in -0.2f64..0.2, uy in -0.2f64..0.2,
        ) {
            let u = Vec2::new(ux, uy);
            prop_assume!(u.norm() > 1e-3);
            let params = AbstractionParams::default();
            let pose = Pose::new(0.1, -0.2, theta);
            let cmd = si_to_uni(u, pose, &params).unwrap();
            let before = uni_to_si_point(pose, &params).unwrap();
            let after = uni_to_si_point(uni_step(pose, cmd, 1e-4).unwrap(), &params).unwrap();
            let d = after - before;
            let angle = (d.perp().dot(u)).atan2(d.dot(u)).abs();
            prop_assert!(angle < 1e-3, "angle {angle}");
            // The analytic inverse recovers the command exactly.
            prop_assert!((uni_to_si(cmd, pose, &params) - u).norm() < 1e-12);
        }
    }
}
