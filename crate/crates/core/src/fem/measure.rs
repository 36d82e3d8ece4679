use serde::{Deserialize, Serialize};

use super::{FeFunction, Mesh, Space};

/// Closed interval `[lo, hi]`; empty when `hi <= lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn length(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

/// Accumulates per-piece contributions of a function that is linear on each piece.
#[derive(Default)]
struct NormAcc {
    l1: f64,
    l2sq: f64,
    linf: f64,
}

impl NormAcc {
    fn push_linear(&mut self, len: f64, a: f64, b: f64) {
        if len <= 0.0 {
            return;
        }
        self.l1 += linear_abs_integral(len, a, b);
        self.l2sq += len * (a * a + a * b + b * b) / 3.0;
        self.linf = self.linf.max(a.abs()).max(b.abs());
    }

    fn finish(&self, which: Norm) -> f64 {
        match which {
            Norm::L1 => self.l1,
            Norm::L2 => self.l2sq.sqrt(),
            Norm::Linf => self.linf,
        }
    }
}

/// `∫ |v|` for `v` linear from `a` to `b` over an interval of length `len`.
fn linear_abs_integral(len: f64, a: f64, b: f64) -> f64 {
    if a * b >= 0.0 {
        0.5 * len * (a.abs() + b.abs())
    } else {
        0.5 * len * (a * a + b * b) / (a.abs() + b.abs())
    }
}

/// Exact L1/L2/L∞ norm of a P0 or P1 function, optionally restricted to a list
/// of disjoint intervals.
pub fn norm(f: &FeFunction, which: Norm, subset: Option<&[Interval]>) -> f64 {
    let mesh = f.mesh();
    let whole = [Interval::new(mesh.domain().0, mesh.domain().1)];
    let pieces = subset.unwrap_or(&whole);
    let h = mesh.h();
    let v = f.values();
    let mut acc = NormAcc::default();
    for iv in pieces.iter().filter(|iv| iv.length() > 0.0) {
        let (first, last) = cell_range(mesh, iv);
        for k in first..=last {
            let (x0, x1) = (mesh.node(k), mesh.node(k + 1));
            let (s, e) = (iv.lo.max(x0), iv.hi.min(x1));
            if e <= s {
                continue;
            }
            match f.space() {
                Space::P0 => acc.push_linear(e - s, v[k], v[k]),
                Space::P1 => {
                    let at = |x: f64| v[k] + (v[k + 1] - v[k]) * (x - x0) / h;
                    acc.push_linear(e - s, at(s), at(e));
                }
            }
        }
    }
    acc.finish(which)
}

fn cell_range(mesh: &Mesh, iv: &Interval) -> (usize, usize) {
    let (a, b) = mesh.domain();
    let lo = iv.lo.clamp(a, b);
    let hi = iv.hi.clamp(a, b);
    (mesh.locate(lo), mesh.locate(hi))
}

/// Measure of `{x : lo < |p(x)| < hi}` for a P1 function, exact for the
/// piecewise linear interpolant.
pub fn band_measure(p: &FeFunction, lo: f64, hi: f64) -> f64 {
    debug_assert_eq!(p.space(), Space::P1);
    if hi <= lo {
        return 0.0;
    }
    let h = p.mesh().h();
    let v = p.values();
    let mut total = 0.0;
    for k in 0..p.mesh().n_cells() {
        let (a, b) = (v[k], v[k + 1]);
        if a * b < 0.0 {
            // split at the zero crossing
            let t = a.abs() / (a.abs() + b.abs());
            total += segment_band(t * h, 0.0, a.abs(), lo, hi);
            total += segment_band((1.0 - t) * h, 0.0, b.abs(), lo, hi);
        } else {
            total += segment_band(h, a.abs(), b.abs(), lo, hi);
        }
    }
    total
}

/// Measure of `{lo < v < hi}` for `v` linear between `v0, v1 >= 0` over `len`.
fn segment_band(len: f64, v0: f64, v1: f64, lo: f64, hi: f64) -> f64 {
    let (vmin, vmax) = if v0 <= v1 { (v0, v1) } else { (v1, v0) };
    if vmax == vmin {
        return if lo < vmin && vmin < hi { len } else { 0.0 };
    }
    let overlap = (hi.min(vmax) - lo.max(vmin)).max(0.0);
    len * overlap / (vmax - vmin)
}

/// Piecewise constant function with arbitrary breakpoints, used to hold exact
/// bang-bang controls whose switching points need not be mesh nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstant {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstant {
    /// `breaks` strictly increasing with `values.len() + 1` entries.
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(breaks.len(), values.len() + 1, "need one more break than values");
        assert!(breaks.windows(2).all(|w| w[0] < w[1]), "breaks must increase");
        Self { breaks, values }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let j = self.breaks[1..self.breaks.len() - 1].partition_point(|&b| b <= x);
        self.values[j]
    }

    /// Exact norm of `u - self` for a P0 `u`, merging both sets of breakpoints.
    pub fn distance(&self, u: &FeFunction, which: Norm) -> f64 {
        debug_assert_eq!(u.space(), Space::P0);
        let mesh = u.mesh();
        let mut acc = NormAcc::default();
        let mut j = 0;
        for k in 0..mesh.n_cells() {
            let (x0, x1) = (mesh.node(k), mesh.node(k + 1));
            let mut s = x0;
            while s < x1 {
                while j + 1 < self.values.len() && self.breaks[j + 1] <= s {
                    j += 1;
                }
                let e = if j + 1 < self.values.len() { self.breaks[j + 1].min(x1) } else { x1 };
                let d = u.values()[k] - self.values[j];
                acc.push_linear(e - s, d, d);
                s = e;
            }
        }
        acc.finish(which)
    }

    /// Total length of pieces whose value satisfies `pred`.
    pub fn measure_where(&self, pred: impl Fn(f64) -> bool) -> f64 {
        self.values
            .iter()
            .zip(self.breaks.windows(2))
            .filter(|(v, _)| pred(**v))
            .map(|(_, w)| w[1] - w[0])
            .sum()
    }
}
