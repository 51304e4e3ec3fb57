//! Derivative-free bounded scalar maximization.

/// Result of a one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `x_tol`. The best point seen,
/// including the two endpoints, is returned, so the result is never worse than
/// `f(lo)` or `f(hi)` even if `f` is not unimodal on the bracket.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, x_tol: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut best = Maximum { x: a, value: f(a) };
    let consider = |x: f64, v: f64, best: &mut Maximum| {
        if v > best.value || best.value.is_nan() {
            *best = Maximum { x, value: v };
        }
    };
    let fb = f(b);
    consider(b, fb, &mut best);

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    consider(c, fc, &mut best);
    consider(d, fd, &mut best);

    let tol = x_tol.max(f64::EPSILON * (a.abs() + b.abs()));
    // bracket shrinks by 1/φ per step; cap iterations anyway in case of NaNs
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            consider(c, fc, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            consider(d, fd, &mut best);
        }
    }
    best
}

/// Multi-start maximization: evaluates `f` on `grid` (increasing), then runs a
/// golden-section search in the bracket around every grid-local maximum.
pub fn multistart_max<F>(mut f: F, grid: &[f64], x_tol: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    assert!(!grid.is_empty(), "multistart grid must not be empty");
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut best = Maximum {
        x: grid[0],
        value: values[0],
    };
    for (i, (&x, &v)) in grid.iter().zip(&values).enumerate() {
        if v > best.value {
            best = Maximum { x, value: v };
        }
        let left_ok = i == 0 || values[i - 1] <= v;
        let right_ok = i + 1 == grid.len() || values[i + 1] <= v;
        if left_ok && right_ok && grid.len() > 1 {
            let lo = grid[i.saturating_sub(1)];
            let hi = grid[(i + 1).min(grid.len() - 1)];
            let local = golden_section_max(&mut f, lo, hi, x_tol);
            if local.value > best.value {
                best = local;
            }
        }
    }
    best
}

/// `n` equally spaced points covering `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}
