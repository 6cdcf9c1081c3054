//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite and infinite ranges.

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Reported error above this is a failure.
    pub fail_above: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_intervals: 4000,
            fail_above: 1e-6,
        }
    }
}

/// Value and error estimate of an integral.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let fc = eval(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = eval(c - dx) + eval(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Bisects the worst piece of `bounds` until the summed error meets the tolerance.
fn refine<F: FnMut(f64) -> f64>(f: &mut F, bounds: &[f64], cfg: &QuadConfig) -> Vec<Piece> {
    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    for w in bounds.windows(2) {
        let (v, e) = gk15(f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Piece { a: w[0], b: w[1], value: v, error: e });
    }
    while err > cfg.abs_tol.max(cfg.rel_tol * total.abs()) && heap.len() < cfg.max_intervals {
        let p = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(f, p.a, mid);
        let (v2, e2) = gk15(f, mid, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Piece { a: p.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: p.b, value: v2, error: e2 });
    }
    heap.into_vec()
}

/// Adaptive integration of a smooth integrand on a finite interval.
fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Integral {
    let pieces = refine(&mut f, &[a, b], cfg);
    // Summing the pieces sheds accumulated rounding in the running sums.
    let value = pieces.iter().map(|p| p.value).sum();
    let error = pieces.iter().map(|p| p.error).sum();
    Integral { value, error }
}

/// Inverse of the whole-line map `x = t / (1 − t²)`.
fn line_to_unit(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        -1.0
    } else {
        2.0 * x / (1.0 + (1.0 + 4.0 * x * x).sqrt())
    }
}

/// `x ↦ ∫_{−∞}^x f` at many points.
///
/// One adaptive pass over the whole line fixes a partition and its prefix sums.
/// Each evaluation then costs one GK15 rule on the partial piece, instead of a
/// fresh adaptive integral.
pub struct RunningIntegral<F> {
    f: F,
    starts: Vec<f64>,
    ends: Vec<f64>,
    prefix: Vec<f64>,
}

impl<F: Fn(f64) -> f64> RunningIntegral<F> {
    pub fn new(f: F, breaks: &[f64], cfg: &QuadConfig) -> Self {
        let mut bounds = vec![-1.0];
        let mut inner: Vec<f64> = breaks.iter().map(|b| line_to_unit(*b)).filter(|t| *t > -1.0 && *t < 1.0).collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        bounds.extend(inner);
        bounds.push(1.0);
        let mut g = |t: f64| Self::mapped(&f, t);
        let mut pieces = refine(&mut g, &bounds, cfg);
        pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
        let mut prefix = Vec::with_capacity(pieces.len() + 1);
        prefix.push(0.0);
        for p in &pieces {
            prefix.push(prefix[prefix.len() - 1] + p.value);
        }
        Self {
            f,
            starts: pieces.iter().map(|p| p.a).collect(),
            ends: pieces.iter().map(|p| p.b).collect(),
            prefix,
        }
    }

    fn mapped(f: &F, t: f64) -> f64 {
        let d = 1.0 - t * t;
        f(t / d) * (1.0 + t * t) / (d * d)
    }

    pub fn at(&self, x: f64) -> f64 {
        let t = line_to_unit(x);
        if t <= -1.0 {
            return 0.0;
        }
        let i = self.starts.partition_point(|s| *s <= t).saturating_sub(1);
        if t >= self.ends[i] {
            return self.prefix[i + 1];
        }
        let mut g = |s: f64| Self::mapped(&self.f, s);
        self.prefix[i] + gk15(&mut g, self.starts[i], t).0
    }
}

/// `∫_a^b f` where either end may be infinite.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Integral {
    if a == b {
        return Integral { value: 0.0, error: 0.0 };
    }
    if a > b {
        let r = integrate(f, b, a, cfg);
        return Integral { value: -r.value, error: r.error };
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(f, a, b, cfg),
        // x = a + (1 − s)/s, s ∈ (0, 1]
        (true, false) => adaptive(
            |s| {
                let x = a + (1.0 - s) / s;
                f(x) / (s * s)
            },
            0.0,
            1.0,
            cfg,
        ),
        (false, true) => adaptive(
            |s| {
                let x = b - (1.0 - s) / s;
                f(x) / (s * s)
            },
            0.0,
            1.0,
            cfg,
        ),
        // x = t / (1 − t²), t ∈ (−1, 1)
        (false, false) => adaptive(
            |t| {
                let d = 1.0 - t * t;
                f(t / d) * (1.0 + t * t) / (d * d)
            },
            -1.0,
            1.0,
            cfg,
        ),
    }
}

/// Splits the range at `breaks` (kinks or jumps of the integrand) and sums the pieces.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Integral {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|c| *c > a && *c < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(b);
    let mut out = Integral { value: 0.0, error: 0.0 };
    for w in pts.windows(2) {
        let r = integrate(&mut f, w[0], w[1], cfg);
        out.value += r.value;
        out.error += r.error;
    }
    out
}

/// Checked variant: fails when the error estimate exceeds `cfg.fail_above`.
pub fn integrate_checked<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<f64> {
    let r = integrate_with_breaks(f, a, b, breaks, cfg);
    if !r.value.is_finite() || r.error > cfg.fail_above {
        return Err(Error::QuadratureNotConverged(r.error));
    }
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, &QuadConfig::default());
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_over_the_line() {
        let r = integrate(|x| (-0.5 * x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, &QuadConfig::default());
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn half_lines() {
        let cfg = QuadConfig::default();
        let r = integrate(|x| (-x).exp(), 1.0, f64::INFINITY, &cfg);
        assert!((r.value - (-1.0f64).exp()).abs() < 1e-11);
        let l = integrate(|x| x.exp(), f64::NEG_INFINITY, 0.0, &cfg);
        assert!((l.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn kink_with_breakpoint() {
        let v = integrate_checked(|x| (-x.abs()).exp(), f64::NEG_INFINITY, f64::INFINITY, &[0.0], &QuadConfig::default())
            .unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn running_integral_matches_direct_integrals() {
        let cfg = QuadConfig::default();
        let f = |x: f64| (-x.abs()).exp();
        let r = RunningIntegral::new(f, &[0.0], &cfg);
        for x in [f64::NEG_INFINITY, -30.0, -1.5, 0.0, 0.3, 2.0, 50.0, f64::INFINITY] {
            let exact = if x <= 0.0 { x.exp() } else { 2.0 - (-x).exp() };
            assert!((r.at(x) - exact).abs() < 1e-11, "x = {x}: {} vs {exact}", r.at(x));
        }
        let n = RunningIntegral::new(|x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt(), &[], &cfg);
        assert!((n.at(1.0) - 0.841_344_746_068_542_9).abs() < 1e-11);
    }

    #[test]
    fn divergent_integral_fails() {
        let cfg = QuadConfig { max_intervals: 50, ..QuadConfig::default() };
        assert!(integrate_checked(|x| 1.0 / x, 0.0, 1.0, &[], &cfg).is_err());
    }
}
