//! Exact piecewise-linear and piecewise-constant functions of time.

use serde::Serialize;

use crate::error::{Error, Result};

/// Breakpoints closer than this are treated as one.
const MERGE_EPS: f64 = 1e-12;

/// Continuous piecewise-linear function on a closed domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseLinearFn {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinearFn {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidPlf("no breakpoints"));
        }
        if xs.len() != ys.len() {
            return Err(Error::InvalidPlf("breakpoint and value counts differ"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPlf("non-finite entry"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPlf("breakpoints not strictly increasing"));
        }
        Ok(Self { xs, ys })
    }

    pub fn constant(lo: f64, hi: f64, value: f64) -> Self {
        if hi > lo {
            Self {
                xs: vec![lo, hi],
                ys: vec![value, value],
            }
        } else {
            Self {
                xs: vec![lo],
                ys: vec![value],
            }
        }
    }

    pub fn zero(lo: f64, hi: f64) -> Self {
        Self::constant(lo, hi, 0.0)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && x <= hi
    }

    pub fn eval(&self, x: f64) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        let j = self.xs.partition_point(|&b| b <= x);
        if j == 0 {
            return Some(self.ys[0]);
        }
        if j == self.xs.len() {
            return Some(*self.ys.last().unwrap());
        }
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        if x == x0 {
            return Some(self.ys[j - 1]);
        }
        let w = (x - x0) / (x1 - x0);
        Some(self.ys[j - 1] + w * (self.ys[j] - self.ys[j - 1]))
    }

    /// Slope of the segment starting at or containing `x`; at the right end
    /// the last segment's slope.
    pub fn slope_at(&self, x: f64) -> Option<f64> {
        if !self.contains(x) || self.xs.len() < 2 {
            return if self.contains(x) { Some(0.0) } else { None };
        }
        let j = self.xs.partition_point(|&b| b <= x).clamp(1, self.xs.len() - 1);
        Some(self.segment_slope(j - 1))
    }

    fn segment_slope(&self, j: usize) -> f64 {
        (self.ys[j + 1] - self.ys[j]) / (self.xs[j + 1] - self.xs[j])
    }

    pub fn slopes(&self) -> Vec<f64> {
        (0..self.xs.len().saturating_sub(1))
            .map(|j| self.segment_slope(j))
            .collect()
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            xs: self.xs.clone(),
            ys: self.ys.iter().map(|&y| f(y)).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map_values(|y| a * y)
    }

    pub fn add_scalar(&self, b: f64) -> Self {
        self.map_values(|y| y + b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b, false)
    }

    pub fn subtract(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b, false)
    }

    pub fn max(&self, other: &Self) -> Result<Self> {
        self.combine(other, f64::max, true)
    }

    pub fn min(&self, other: &Self) -> Result<Self> {
        self.combine(other, f64::min, true)
    }

    pub fn max_const(&self, c: f64) -> Self {
        let (lo, hi) = self.domain();
        self.max(&Self::constant(lo, hi, c))
            .expect("same domain")
    }

    pub fn clamp_zero(&self) -> Self {
        self.max_const(0.0)
    }

    /// Pointwise combination on the common domain. With `crossings`, the
    /// zeros of `self - other` inside segments become breakpoints, which
    /// keeps max/min exact.
    fn combine(&self, other: &Self, op: impl Fn(f64, f64) -> f64, crossings: bool) -> Result<Self> {
        let (alo, ahi) = self.domain();
        let (blo, bhi) = other.domain();
        let lo = alo.max(blo);
        let hi = ahi.min(bhi);
        if lo > hi {
            return Err(Error::DisjointDomains);
        }
        let mut xs: Vec<f64> = self
            .xs
            .iter()
            .chain(&other.xs)
            .copied()
            .filter(|&x| x > lo && x < hi)
            .collect();
        xs.push(lo);
        xs.push(hi);
        xs.sort_by(f64::total_cmp);
        let xs = dedup_close(xs);
        let mut out_x = Vec::with_capacity(xs.len() * 2);
        let mut out_y = Vec::with_capacity(xs.len() * 2);
        let mut prev: Option<(f64, f64)> = None;
        for &x in &xs {
            let a = self.eval(x).unwrap();
            let b = other.eval(x).unwrap();
            let d = a - b;
            if crossings {
                if let Some((px, pd)) = prev {
                    if (pd < 0.0 && d > 0.0) || (pd > 0.0 && d < 0.0) {
                        let xc = px + (x - px) * pd / (pd - d);
                        if xc - px > MERGE_EPS && x - xc > MERGE_EPS {
                            let ya = self.eval(xc).unwrap();
                            let yb = other.eval(xc).unwrap();
                            out_x.push(xc);
                            out_y.push(op(ya, yb));
                        }
                    }
                }
            }
            out_x.push(x);
            out_y.push(op(a, b));
            prev = Some((x, d));
        }
        Ok(Self { xs: out_x, ys: out_y })
    }

    /// Drops interior breakpoints where the slope does not change.
    pub fn simplify(&self) -> Self {
        if self.xs.len() <= 2 {
            return self.clone();
        }
        let mut xs = vec![self.xs[0]];
        let mut ys = vec![self.ys[0]];
        for j in 1..self.xs.len() - 1 {
            let (x0, y0) = (*xs.last().unwrap(), *ys.last().unwrap());
            let (x1, y1) = (self.xs[j], self.ys[j]);
            let (x2, y2) = (self.xs[j + 1], self.ys[j + 1]);
            let interp = y0 + (y2 - y0) * (x1 - x0) / (x2 - x0);
            let scale = 1.0 + y0.abs().max(y1.abs()).max(y2.abs());
            if (interp - y1).abs() > 1e-12 * scale {
                xs.push(x1);
                ys.push(y1);
            }
        }
        xs.push(*self.xs.last().unwrap());
        ys.push(*self.ys.last().unwrap());
        Self { xs, ys }
    }

    pub fn integral(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| 0.5 * (y[0] + y[1]) * (x[1] - x[0]))
            .sum()
    }

    /// Integral over `[a, b]` intersected with the domain.
    pub fn integral_between(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = self.domain();
        let a = a.max(lo);
        let b = b.min(hi);
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        let mut x0 = a;
        let mut y0 = self.eval(a).unwrap();
        let start = self.xs.partition_point(|&x| x <= a);
        for j in start..self.xs.len() {
            let x1 = self.xs[j].min(b);
            let y1 = if self.xs[j] <= b { self.ys[j] } else { self.eval(b).unwrap() };
            total += 0.5 * (y0 + y1) * (x1 - x0);
            x0 = x1;
            y0 = y1;
            if self.xs[j] >= b {
                break;
            }
        }
        total
    }

    pub fn min_value(&self) -> f64 {
        self.ys.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.ys.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.ys.iter().fold(0.0, |m, y| m.max(y.abs()))
    }

    /// Inverse of a strictly increasing function.
    pub fn inverse(&self) -> Result<Self> {
        if self.ys.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPlf("function not strictly increasing"));
        }
        Ok(Self {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
        })
    }
}

fn dedup_close(mut xs: Vec<f64>) -> Vec<f64> {
    let hi = *xs.last().unwrap();
    xs.dedup_by(|b, a| *b - *a <= MERGE_EPS);
    // keep the exact right end
    if let Some(last) = xs.last_mut() {
        *last = hi;
    }
    xs
}

/// Piecewise-constant function, zero outside `[xs[0], xs[n]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFn {
    xs: Vec<f64>,
    vals: Vec<f64>,
}

impl StepFn {
    pub fn zero() -> Self {
        Self {
            xs: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// `vals[j]` holds on `[xs[j], xs[j + 1])`.
    pub fn new(xs: Vec<f64>, vals: Vec<f64>) -> Result<Self> {
        if xs.is_empty() && vals.is_empty() {
            return Ok(Self::zero());
        }
        if xs.len() != vals.len() + 1 {
            return Err(Error::InvalidPlf("step function needs one more breakpoint than values"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPlf("breakpoints not strictly increasing"));
        }
        Ok(Self { xs, vals })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(|&v| v == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.xs.is_empty() || x < self.xs[0] || x >= *self.xs.last().unwrap() {
            return 0.0;
        }
        let j = self.xs.partition_point(|&b| b <= x);
        self.vals[j - 1]
    }

    pub fn integral(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(&self.vals)
            .map(|(x, v)| v * (x[1] - x[0]))
            .sum()
    }

    /// `∫ self · g` over the support of `self` (which must lie in g's domain).
    pub fn integral_product(&self, g: &PiecewiseLinearFn) -> f64 {
        self.xs
            .windows(2)
            .zip(&self.vals)
            .filter(|(_, &v)| v != 0.0)
            .map(|(x, v)| v * g.integral_between(x[0], x[1]))
            .sum()
    }

    /// Running integral on `[lo, hi]`.
    pub fn cumulative(&self, lo: f64, hi: f64) -> PiecewiseLinearFn {
        let mut xs = vec![lo];
        let mut ys = vec![0.0];
        let mut acc = 0.0;
        for (w, v) in self.xs.windows(2).zip(&self.vals) {
            let a = w[0].max(lo);
            let b = w[1].min(hi);
            if b <= a {
                continue;
            }
            if a > *xs.last().unwrap() {
                xs.push(a);
                ys.push(acc);
            }
            acc += v * (b - a);
            if b > *xs.last().unwrap() {
                xs.push(b);
                ys.push(acc);
            } else {
                *ys.last_mut().unwrap() = acc;
            }
        }
        if hi > *xs.last().unwrap() {
            xs.push(hi);
            ys.push(acc);
        }
        PiecewiseLinearFn { xs, ys }
    }

    pub fn min_positive_value(&self) -> Option<f64> {
        self.vals.iter().copied().filter(|&v| v != 0.0).reduce(f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tent(peak: f64, center: f64, beta: f64, gamma: f64) -> PiecewiseLinearFn {
        // peak − ĉ with a single preferred time, clamped at zero
        let c = PiecewiseLinearFn::new(
            vec![0.0, center, 100.0],
            vec![beta * center, 0.0, gamma * (100.0 - center)],
        )
        .unwrap();
        PiecewiseLinearFn::constant(0.0, 100.0, peak)
            .subtract(&c)
            .unwrap()
            .clamp_zero()
    }

    #[test]
    fn tent_peaks_at_five() {
        let f = tent(5.0, 60.0, 0.3, 0.6);
        assert_abs_diff_eq!(f.eval(60.0).unwrap(), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.eval(60.0 - 5.0 / 0.3).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.eval(10.0).unwrap(), 0.0);
        assert_abs_diff_eq!(f.max_value(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn tent_integral_is_triangle_area() {
        let f = tent(5.0, 60.0, 0.3, 0.6);
        let delta = 0.3 * 0.6 / 0.9;
        assert_abs_diff_eq!(f.integral(), 25.0 / (2.0 * delta), epsilon = 1e-9);
        assert_abs_diff_eq!(f.integral(), 62.5, epsilon = 1e-9);
    }

    #[test]
    fn self_subtraction_is_zero() {
        let f = tent(5.0, 60.0, 0.3, 0.6);
        let z = f.subtract(&f).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn disjoint_domains_rejected() {
        let a = PiecewiseLinearFn::constant(0.0, 1.0, 1.0);
        let b = PiecewiseLinearFn::constant(2.0, 3.0, 1.0);
        assert_eq!(a.subtract(&b), Err(Error::DisjointDomains));
    }

    #[test]
    fn evaluation_at_breakpoints_returns_stored_values() {
        let f = PiecewiseLinearFn::new(vec![0.0, 1.0, 3.0], vec![2.0, -1.0, 5.0]).unwrap();
        assert_eq!(f.eval(1.0), Some(-1.0));
        assert_eq!(f.eval(3.0), Some(5.0));
        assert_eq!(f.eval(2.0), Some(2.0));
        assert_eq!(f.eval(3.5), None);
        assert_eq!(f.slope_at(1.0), Some(3.0));
        assert_eq!(f.slope_at(0.5), Some(-3.0));
    }

    #[test]
    fn integral_between_matches_full_integral() {
        let f = tent(5.0, 60.0, 0.3, 0.6);
        let parts = f.integral_between(0.0, 55.5) + f.integral_between(55.5, 61.25) + f.integral_between(61.25, 100.0);
        assert_abs_diff_eq!(parts, f.integral(), epsilon = 1e-9);
        assert_abs_diff_eq!(f.integral_between(60.0, 60.0), 0.0);
    }

    #[test]
    fn max_inserts_crossings() {
        let a = PiecewiseLinearFn::new(vec![0.0, 2.0], vec![0.0, 2.0]).unwrap();
        let b = PiecewiseLinearFn::new(vec![0.0, 2.0], vec![2.0, 0.0]).unwrap();
        let m = a.max(&b).unwrap();
        assert_eq!(m.breakpoints(), &[0.0, 1.0, 2.0]);
        assert_abs_diff_eq!(m.integral(), 3.0);
    }

    #[test]
    fn simplify_keeps_shape() {
        let f = PiecewiseLinearFn::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 2.0, 0.0]).unwrap();
        let s = f.simplify();
        assert_eq!(s.breakpoints(), &[0.0, 2.0, 3.0]);
    }

    #[test]
    fn step_function_integrals() {
        let s = StepFn::new(vec![0.0, 1.0, 3.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(s.integral(), 4.0);
        assert_eq!(s.eval(0.5), 2.0);
        assert_eq!(s.eval(3.0), 0.0);
        let c = s.cumulative(-1.0, 5.0);
        assert_eq!(c.eval(-0.5), Some(0.0));
        assert_eq!(c.eval(1.0), Some(2.0));
        assert_eq!(c.eval(5.0), Some(4.0));
        let g = PiecewiseLinearFn::new(vec![0.0, 3.0], vec![0.0, 3.0]).unwrap();
        // ∫0^1 2t + ∫1^3 t = 1 + 4
        assert_abs_diff_eq!(s.integral_product(&g), 5.0, epsilon = 1e-12);
    }
}
