use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use super::{check_lengths, log_signals, weighted_lstsq};
use crate::encoding::AcqScheme;
use crate::error::{Error, Result};
use crate::tensor::{SymTensor3, Vec6};

/// Log-linear least squares of `ln S = ln S₀ − b:D`, returning `(S₀, D)`.
pub fn fit_dti(signals: &[f64], scheme: &AcqScheme) -> Result<(f64, SymTensor3)> {
    check_lengths(signals, scheme)?;
    let m = scheme.len();
    let design = DMatrix::from_fn(m, 7, |i, j| {
        if j == 0 {
            1.0
        } else {
            -scheme.points()[i].mandel()[j - 1]
        }
    });
    let y: DVector<f64> = log_signals(signals);
    let (x, rank) = weighted_lstsq(&design, &y, None);
    if rank < 7 {
        return Err(Error::Rank { rank, required: 7 });
    }
    let d = Vec6([x[1], x[2], x[3], x[4], x[5], x[6]]).to_tensor();
    Ok((x[0].exp(), d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::DiscreteDtd;
    use crate::encoding::{generate_scheme, signal_dtd, SchemeSpec};

    #[test]
    fn exact_recovery() {
        let d0 = SymTensor3::new(1.5, 0.8, 0.4, 0.1, -0.2, 0.3);
        let scheme = generate_scheme(&SchemeSpec::default_scheme()).unwrap();
        let s: alloc::vec::Vec<f64> = signal_dtd(&DiscreteDtd::single(d0).unwrap(), &scheme)
            .iter()
            .map(|v| 0.9 * v)
            .collect();
        let (s0, d) = fit_dti(&s, &scheme).unwrap();
        assert!((s0 - 0.9).abs() < 1e-10);
        assert!((d - d0).max_abs() < 1e-10);
    }

    #[test]
    fn flat_signal_gives_zero_tensor() {
        let scheme = generate_scheme(&SchemeSpec::default_scheme()).unwrap();
        let (s0, d) = fit_dti(&alloc::vec![1.0; 100], &scheme).unwrap();
        assert!((s0 - 1.0).abs() < 1e-12);
        assert!(d.max_abs() < 1e-12);
    }

    #[test]
    fn too_few_directions() {
        let scheme = generate_scheme(&SchemeSpec {
            shells: alloc::vec![
                crate::encoding::Shell { b: 0.0, b_delta: 0.0, count: 1 },
                crate::encoding::Shell { b: 1.0, b_delta: 0.0, count: 8 },
            ],
        })
        .unwrap();
        let s = alloc::vec![1.0; scheme.len()];
        assert!(matches!(fit_dti(&s, &scheme), Err(Error::Rank { .. })));
    }

    #[test]
    fn length_mismatch() {
        let scheme = generate_scheme(&SchemeSpec::default_scheme()).unwrap();
        assert!(matches!(
            fit_dti(&[1.0; 3], &scheme),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
