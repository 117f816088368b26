use serde::{Deserialize, Serialize};

/// Layout of the frequency grid, in units of the bath cutoff where noted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    /// Uniform background spacing in units of ν_c.
    pub spacing: f64,
    /// Extent below `−η` in units of ν_c.
    pub red_span: f64,
    /// Extent above `η` in units of ν_c.
    pub blue_span: f64,
    /// Half-width, in units of ν_c, of the graded refinement around each line.
    pub core_span: f64,
    /// Step in the sinh-graded coordinate around each line.
    pub sinh_step: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { spacing: 1.0 / 200.0, red_span: 12.0, blue_span: 6.0, core_span: 0.5, sinh_step: 0.02 }
    }
}

/// Uniform background on `[lo, hi]` merged with `c ± γ sinh(u)` points for each `(c, γ)`.
pub fn frequency_grid(lo: f64, hi: f64, cutoff: f64, lines: &[(f64, f64)], opts: &GridOptions) -> Vec<f64> {
    let h = opts.spacing * cutoff;
    let n = ((hi - lo) / h).ceil().max(1.0) as usize;
    let mut pts: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let span = opts.core_span * cutoff;
    for &(c, g) in lines {
        if !(g > 0.0) || c < lo || c > hi {
            continue;
        }
        let u_max = (span / g).asinh();
        let m = (u_max / opts.sinh_step).ceil() as usize;
        pts.push(c);
        for k in 1..=m {
            let d = g * (u_max * k as f64 / m as f64).sinh();
            pts.extend([c - d, c + d].into_iter().filter(|x| (lo..=hi).contains(x)));
        }
    }
    pts.sort_by(f64::total_cmp);
    let tol = 1e-13 * (hi - lo);
    pts.dedup_by(|b, a| (*b - *a).abs() <= tol);
    pts
}

/// Trapezoidal integral of samples `y` on the grid `x`.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}
