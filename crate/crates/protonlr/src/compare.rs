//! Relative differences between two dose volumes.

use std::path::Path;

use crate::error::{AppError, AppResult};
use crate::output::read_vtk;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    /// ‖a − b‖₂ / ‖b‖₂.
    pub relative_l2: f64,
    /// max|a − b| / max|b|.
    pub relative_linf: f64,
}

/// Differences of `a` relative to the reference `b`; zero when the fields are identical.
pub fn compare(a: &[f64], b: &[f64]) -> Comparison {
    assert_eq!(a.len(), b.len(), "compared fields differ in length");
    let (mut diff2, mut ref2, mut diff_max, mut ref_max) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        diff2 += d * d;
        ref2 += y * y;
        diff_max = diff_max.max(d.abs());
        ref_max = ref_max.max(y.abs());
    }
    let rel = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };
    Comparison { relative_l2: rel(diff2.sqrt(), ref2.sqrt()), relative_linf: rel(diff_max, ref_max) }
}

/// Compares one scalar field of two VTK volumes on the same grid.
pub fn compare_files(a: &Path, b: &Path, field: &str) -> AppResult<Comparison> {
    let va = read_vtk(a)?;
    let vb = read_vtk(b)?;
    if va.cells != vb.cells {
        return Err(AppError::format(b, format!("grid {:?} differs from {:?} in {}", vb.cells, va.cells, a.display())));
    }
    let get = |v: &crate::output::VtkVolume, p: &Path| {
        v.fields.get(field).cloned().ok_or_else(|| AppError::format(p, format!("no field `{field}`")))
    };
    Ok(compare(&get(&va, a)?, &get(&vb, b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_fields_compare_to_zero() {
        let a = vec![0.0, 1.5, -2.0];
        assert_eq!(compare(&a, &a), Comparison { relative_l2: 0.0, relative_linf: 0.0 });
        assert_eq!(compare(&[0.0; 3], &[0.0; 3]).relative_l2, 0.0);
    }

    proptest! {
        #[test]
        fn scaling_error_is_exact(v in prop::collection::vec(0.1f64..10.0, 1..40), eps in 0.0f64..0.5) {
            let a: Vec<f64> = v.iter().map(|x| x * (1.0 + eps)).collect();
            let c = compare(&a, &v);
            prop_assert!((c.relative_l2 - eps).abs() < 1e-12);
            prop_assert!((c.relative_linf - eps).abs() < 1e-12);
        }
    }
}
