use nalgebra::Matrix3;
#[allow(unused_imports)]
use num_traits::Float;

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(b: f64) -> Matrix3<f64> {
    let (s, c) = b.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Proper rotation from ZYZ Euler angles: `R = Rz(α)·Ry(β)·Rz(γ)`.
pub fn euler_rotation(alpha: f64, beta: f64, gamma: f64) -> Matrix3<f64> {
    rot_z(alpha) * rot_y(beta) * rot_z(gamma)
}

/// Inverse of [`euler_rotation`] for a proper rotation matrix. At the
/// gimbal-lock poles (`β ∈ {0, π}`) the split between α and γ is
/// arbitrary; γ is set to zero.
pub fn euler_from_rotation(r: &Matrix3<f64>) -> (f64, f64, f64) {
    let beta = r[(2, 2)].clamp(-1.0, 1.0).acos();
    let sb = beta.sin();
    if sb > 1e-12 {
        let alpha = r[(1, 2)].atan2(r[(0, 2)]);
        let gamma = r[(2, 1)].atan2(-r[(2, 0)]);
        (alpha, beta, gamma)
    } else if r[(2, 2)] > 0.0 {
        (r[(1, 0)].atan2(r[(0, 0)]), 0.0, 0.0)
    } else {
        ((-r[(1, 0)]).atan2(r[(1, 1)]), core::f64::consts::PI, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;
    use nalgebra::Vector3;

    #[test]
    fn zero_angles_are_identity() {
        assert_eq!(euler_rotation(0.0, 0.0, 0.0), Matrix3::identity());
    }

    #[test]
    fn quarter_turn_about_y_maps_z_to_x() {
        let r = euler_rotation(0.0, FRAC_PI_2, 0.0);
        let v = r * Vector3::z();
        assert!((v - Vector3::x()).norm() < 1e-15);
    }

    #[test]
    fn proper_and_orthogonal() {
        for &(a, b, c) in &[(0.3, 1.2, -2.0), (3.0, 0.01, 1.0), (-1.0, 3.1, 0.2)] {
            let r = euler_rotation(a, b, c);
            assert!((r.transpose() * r - Matrix3::identity()).abs().max() < 1e-14);
            assert!((r.determinant() - 1.0).abs() < 1e-14);
            let inv = r.try_inverse().unwrap();
            assert!((r * inv - Matrix3::identity()).abs().max() < 1e-14);
        }
    }

    #[test]
    fn euler_round_trip() {
        for &(a, b, c) in &[(0.3, 1.2, -2.0), (3.0, 0.01, 1.0), (-1.0, 3.1, 0.2), (0.5, 0.0, 0.0), (0.5, core::f64::consts::PI, 0.0)] {
            let r = euler_rotation(a, b, c);
            let (a2, b2, c2) = euler_from_rotation(&r);
            let r2 = euler_rotation(a2, b2, c2);
            assert!((r - r2).abs().max() < 1e-12, "{a} {b} {c}");
        }
    }
}
