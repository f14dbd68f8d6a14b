//! Two-dimensional complex FFTs on row-major (y-major) arrays.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::par;

type Plan = Arc<dyn Fft<f64>>;
type PlanCache = Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Plan>)>;

fn plan(len: usize, direction: FftDirection) -> Plan {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let (planner, plans) = &mut *guard;
    let key = (len, direction == FftDirection::Forward);
    plans
        .entry(key)
        .or_insert_with(|| planner.plan_fft(len, direction))
        .clone()
}

fn transform_rows(data: &mut [Complex64], row_len: usize, fft: &Plan) {
    let scratch_len = fft.get_inplace_scratch_len();
    par::for_each_row_with(
        data,
        row_len,
        || vec![Complex64::default(); scratch_len],
        |scratch, _, row| fft.process_with_scratch(row, scratch),
    );
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    // dst is cols x rows
    par::for_each_row(dst, rows, |c, out| {
        for (r, o) in out.iter_mut().enumerate() {
            *o = src[r * cols + c];
        }
    });
}

/// Unnormalized 2D DFT in place; `data` holds `ny` rows of length `nx`.
pub(crate) fn fft2(data: &mut [Complex64], nx: usize, ny: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), nx * ny);
    transform_rows(data, nx, &plan(nx, direction));
    let mut buf = vec![Complex64::default(); nx * ny];
    transpose(data, &mut buf, ny, nx);
    transform_rows(&mut buf, ny, &plan(ny, direction));
    transpose(&buf, data, nx, ny);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_then_inverse_is_identity_up_to_scale() {
        let (nx, ny) = (16, 8);
        let orig: Vec<Complex64> = (0..nx * ny)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut data = orig.clone();
        fft2(&mut data, nx, ny, FftDirection::Forward);
        fft2(&mut data, nx, ny, FftDirection::Inverse);
        let scale = (nx * ny) as f64;
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / scale - b).norm() < 1e-13);
        }
    }

    #[test]
    fn single_mode_lands_in_expected_bin() {
        let (nx, ny) = (8, 8);
        let mut data: Vec<Complex64> = (0..nx * ny)
            .map(|i| {
                let (k, j) = (i / nx, i % nx);
                let ph = 2.0 * std::f64::consts::PI * (j as f64 * 2.0 + k as f64 * 3.0) / 8.0;
                Complex64::new(ph.cos(), ph.sin())
            })
            .collect();
        fft2(&mut data, nx, ny, FftDirection::Forward);
        for (i, c) in data.iter().enumerate() {
            let expected = if i == 3 * nx + 2 { 64.0 } else { 0.0 };
            assert!((c.re - expected).abs() < 1e-10 && c.im.abs() < 1e-10);
        }
    }
}
