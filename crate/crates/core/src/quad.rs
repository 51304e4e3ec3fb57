//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands.
//!
//! Every component must satisfy `err ≤ max(abs_tol, rel_tol·|I|)`; the panel
//! with the largest weighted error is bisected until that holds. Matrix-valued
//! integrals are flattened into fixed-size arrays by the callers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
    /// Number of equal panels the interval is split into before adapting.
    pub initial_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_segments: 20_000,
            initial_panels: 1,
        }
    }
}

struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Segment<N> {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}

impl<const N: usize> Eq for Segment<N> {}

impl<const N: usize> PartialOrd for Segment<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const N: usize> Ord for Segment<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

/// One Gauss–Kronrod panel: (Kronrod value, error estimate, ∫|f|).
fn kronrod_panel<const N: usize, F>(f: &mut F, a: f64, b: f64) -> ([f64; N], [f64; N], [f64; N])
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut samples = [[0.0; N]; 15];
    samples[7] = f(center);
    for j in 0..7 {
        let dx = half * XGK[j];
        samples[j] = f(center - dx);
        samples[14 - j] = f(center + dx);
    }

    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    let mut abs_int = [0.0; N];
    let mut asc = [0.0; N];
    for c in 0..N {
        let mut k = WGK[7] * samples[7][c];
        let mut g = WG[3] * samples[7][c];
        let mut ka = WGK[7] * samples[7][c].abs();
        for j in 0..7 {
            let (lo, hi) = (samples[j][c], samples[14 - j][c]);
            k += WGK[j] * (lo + hi);
            ka += WGK[j] * (lo.abs() + hi.abs());
            if j % 2 == 1 {
                g += WG[j / 2] * (lo + hi);
            }
        }
        let mean = 0.5 * k;
        let mut s = WGK[7] * (samples[7][c] - mean).abs();
        for j in 0..7 {
            s += WGK[j] * ((samples[j][c] - mean).abs() + (samples[14 - j][c] - mean).abs());
        }
        kronrod[c] = k * half;
        gauss[c] = g * half;
        abs_int[c] = ka * half.abs();
        asc[c] = s * half.abs();
    }

    let mut error = [0.0; N];
    for c in 0..N {
        let mut err = (kronrod[c] - gauss[c]).abs();
        if asc[c] != 0.0 && err != 0.0 {
            err = asc[c] * (200.0 * err / asc[c]).powf(1.5).min(1.0);
        }
        let floor = 50.0 * f64::EPSILON * abs_int[c];
        if abs_int[c] > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && floor > err {
            err = floor;
        }
        error[c] = err;
    }
    (kronrod, error, abs_int)
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_initial_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }

    pub fn with_max_segments(mut self, segments: usize) -> Self {
        self.max_segments = segments.max(1);
        self
    }

    /// Integrates every component of `f` over `[a, b]`.
    pub fn integrate<const N: usize, F>(&self, mut f: F, a: f64, b: f64) -> Result<[f64; N]>
    where
        F: FnMut(f64) -> [f64; N],
    {
        if a == b {
            return Ok([0.0; N]);
        }
        let panels = self.initial_panels.max(1);
        let width = (b - a) / panels as f64;

        let mut raw = Vec::with_capacity(panels);
        let mut total = [0.0; N];
        let mut total_err = [0.0; N];
        let mut total_abs = [0.0; N];
        for i in 0..panels {
            let lo = a + width * i as f64;
            let hi = if i + 1 == panels { b } else { lo + width };
            let (v, e, ab) = kronrod_panel(&mut f, lo, hi);
            for c in 0..N {
                total[c] += v[c];
                total_err[c] += e[c];
                total_abs[c] += ab[c];
            }
            raw.push((lo, hi, v, e));
        }

        // weights are frozen from the first pass so that heap keys stay comparable
        let mut weight = [0.0; N];
        for c in 0..N {
            weight[c] = 1.0 / self.allowed(total[c], total_abs[c]).max(f64::MIN_POSITIVE);
        }
        let key = |e: &[f64; N]| (0..N).map(|c| e[c] * weight[c]).fold(0.0, f64::max);

        let mut heap: BinaryHeap<Segment<N>> = raw
            .into_iter()
            .map(|(a, b, value, error)| Segment {
                a,
                b,
                priority: key(&error),
                value,
                error,
            })
            .collect();

        let min_width = (b - a).abs() * 1e-13;
        loop {
            if self.converged(&total, &total_err, &total_abs) {
                // recompute from scratch to shed accumulated drift before accepting
                let (v, e) = Self::resum(&heap);
                if self.converged(&v, &e, &total_abs) {
                    return Ok(v);
                }
                total = v;
                total_err = e;
            }
            let worst_estimate = total_err.iter().copied().fold(0.0, f64::max);
            if heap.len() >= self.max_segments {
                return Err(self.failure(a, b, worst_estimate, heap.len()));
            }
            let seg = heap.pop().expect("heap never empties");
            let mid = 0.5 * (seg.a + seg.b);
            if (seg.b - seg.a).abs() < min_width {
                return Err(self.failure(a, b, worst_estimate, heap.len() + 1));
            }
            let (lv, le, _) = kronrod_panel(&mut f, seg.a, mid);
            let (rv, re, _) = kronrod_panel(&mut f, mid, seg.b);
            for c in 0..N {
                total[c] += lv[c] + rv[c] - seg.value[c];
                total_err[c] += le[c] + re[c] - seg.error[c];
            }
            heap.push(Segment {
                a: seg.a,
                b: mid,
                priority: key(&le),
                value: lv,
                error: le,
            });
            heap.push(Segment {
                a: mid,
                b: seg.b,
                priority: key(&re),
                value: rv,
                error: re,
            });
        }
    }

    pub fn integrate_scalar<F>(&self, mut f: F, a: f64, b: f64) -> Result<f64>
    where
        F: FnMut(f64) -> f64,
    {
        self.integrate(|x| [f(x)], a, b).map(|v| v[0])
    }

    /// `∫_a^∞ f`, via the substitution `x = a + s / (1 − s)`.
    pub fn integrate_to_infinity<F>(&self, mut f: F, a: f64) -> Result<f64>
    where
        F: FnMut(f64) -> f64,
    {
        self.integrate_scalar(
            |s| {
                let one_minus = 1.0 - s;
                let x = a + s / one_minus;
                f(x) / (one_minus * one_minus)
            },
            0.0,
            1.0,
        )
    }

    fn allowed(&self, value: f64, abs_int: f64) -> f64 {
        self.abs_tol
            .max(self.rel_tol * value.abs())
            .max(100.0 * f64::EPSILON * abs_int)
    }

    fn converged<const N: usize>(&self, value: &[f64; N], error: &[f64; N], abs_int: &[f64; N]) -> bool {
        (0..N).all(|c| error[c] <= self.allowed(value[c], abs_int[c]))
    }

    fn resum<const N: usize>(heap: &BinaryHeap<Segment<N>>) -> ([f64; N], [f64; N]) {
        let mut v = [0.0; N];
        let mut e = [0.0; N];
        for seg in heap.iter() {
            for c in 0..N {
                v[c] += seg.value[c];
                e[c] += seg.error[c];
            }
        }
        (v, e)
    }

    fn failure(&self, a: f64, b: f64, estimate: f64, segments: usize) -> Error {
        Error::QuadratureNonConvergence {
            a,
            b,
            estimate,
            segments,
        }
    }
}
