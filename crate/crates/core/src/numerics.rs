//! Quadrature, adaptive RK4, bisection and least squares.

use std::sync::OnceLock;

const GL_ORDER: usize = 20;

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
fn gl_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        out
    })
}

/// Gauss-Legendre on a single panel.
pub fn gauss_panel(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    gl_rule().iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// Composite Gauss-Legendre with `panels` equal panels.
pub fn gauss_composite(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|i| gauss_panel(&mut f, a + h * i as f64, a + h * (i + 1) as f64)).sum()
}

/// Composite Gauss-Legendre on panels refined geometrically towards `a`.
pub fn gauss_graded(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, levels: usize) -> f64 {
    let len = b - a;
    let mut sum = 0.0;
    let mut hi = 1.0;
    for _ in 0..levels {
        let lo = 0.5 * hi;
        sum += gauss_panel(&mut f, a + len * lo, a + len * hi);
        hi = lo;
    }
    sum + gauss_panel(&mut f, a, a + len * hi)
}

/// Failure of the adaptive integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepUnderflow {
    pub at: f64,
}

/// Adaptive RK4 with step doubling and local extrapolation.
#[derive(Clone, Copy, Debug)]
pub struct Rk4 {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for Rk4 {
    fn default() -> Self {
        Self { atol: 1e-13, rtol: 1e-12, max_steps: 10_000_000 }
    }
}

fn rk4_step<const N: usize>(
    f: &mut impl FnMut(f64, &[f64; N]) -> [f64; N],
    s: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let add = |y: &[f64; N], k: &[f64; N], c: f64| {
        let mut o = *y;
        for i in 0..N {
            o[i] += c * k[i];
        }
        o
    };
    let k1 = f(s, y);
    let k2 = f(s + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = f(s + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = f(s + h, &add(y, &k3, h));
    let mut o = *y;
    for i in 0..N {
        o[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    o
}

impl Rk4 {
    /// Integrates from `s0` to `s1` starting with step `h`; returns the state and
    /// the step to try next.
    pub fn integrate<const N: usize>(
        &self,
        mut f: impl FnMut(f64, &[f64; N]) -> [f64; N],
        s0: f64,
        s1: f64,
        y0: [f64; N],
        h0: f64,
    ) -> Result<([f64; N], f64), StepUnderflow> {
        let mut s = s0;
        let mut y = y0;
        let mut h = h0.min(s1 - s0);
        let mut next_h = h;
        let mut steps = 0usize;
        while s < s1 {
            steps += 1;
            if steps > self.max_steps {
                return Err(StepUnderflow { at: s });
            }
            let last = s + h >= s1;
            if last {
                h = s1 - s;
            }
            if s + h == s || !(h > 0.0) {
                return Err(StepUnderflow { at: s });
            }
            let big = rk4_step(&mut f, s, &y, h);
            let mid = rk4_step(&mut f, s, &y, 0.5 * h);
            let fine = rk4_step(&mut f, s + 0.5 * h, &mid, 0.5 * h);
            let mut err: f64 = 0.0;
            let mut finite = true;
            for i in 0..N {
                finite &= fine[i].is_finite() && big[i].is_finite();
                let sc = self.atol + self.rtol * fine[i].abs().max(y[i].abs());
                err = err.max((fine[i] - big[i]).abs() / (15.0 * sc));
            }
            if !finite {
                h *= 0.25;
                continue;
            }
            if err <= 1.0 {
                for i in 0..N {
                    y[i] = fine[i] + (fine[i] - big[i]) / 15.0;
                }
                s = if last { s1 } else { s + h };
                let grow = if err == 0.0 { 4.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 4.0) };
                if !last {
                    next_h = h * grow;
                } else {
                    next_h = next_h.max(h * grow);
                }
                h *= grow;
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.5);
            }
        }
        Ok((y, next_h))
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64, max_iter: usize) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return None;
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Ordinary least squares `y = slope x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Some(LinearFit { slope, intercept, rms_residual: (rss / n as f64).sqrt() })
}


/// Quintic Hermite interpolation on `[x0, x1]` from values and first and second
/// derivatives at both ends; returns `(y, y', y'')` at `x`.
#[allow(clippy::too_many_arguments)]
pub fn hermite5(x0: f64, x1: f64, y0: [f64; 3], y1: [f64; 3], x: f64) -> [f64; 3] {
    let hh = x1 - x0;
    let u = (x - x0) / hh;
    let (u2, u3, u4, u5) = (u * u, u * u * u, u * u * u * u, u * u * u * u * u);
    let b = [
        1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5,
        u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5,
        0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5),
        10.0 * u3 - 15.0 * u4 + 6.0 * u5,
        -4.0 * u3 + 7.0 * u4 - 3.0 * u5,
        0.5 * (u3 - 2.0 * u4 + u5),
    ];
    let d = [
        -30.0 * u2 + 60.0 * u3 - 30.0 * u4,
        1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4,
        0.5 * (2.0 * u - 9.0 * u2 + 12.0 * u3 - 5.0 * u4),
        30.0 * u2 - 60.0 * u3 + 30.0 * u4,
        -12.0 * u2 + 28.0 * u3 - 15.0 * u4,
        0.5 * (3.0 * u2 - 8.0 * u3 + 5.0 * u4),
    ];
    let dd = [
        -60.0 * u + 180.0 * u2 - 120.0 * u3,
        -36.0 * u + 96.0 * u2 - 60.0 * u3,
        0.5 * (2.0 - 18.0 * u + 36.0 * u2 - 20.0 * u3),
        60.0 * u - 180.0 * u2 + 120.0 * u3,
        -24.0 * u + 84.0 * u2 - 60.0 * u3,
        0.5 * (6.0 * u - 24.0 * u2 + 20.0 * u3),
    ];
    let c = [y0[0], hh * y0[1], hh * hh * y0[2], y1[0], hh * y1[1], hh * hh * y1[2]];
    let dot = |w: &[f64; 6]| w.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
    [dot(&b), dot(&d) / hh, dot(&dd) / (hh * hh)]
}

/// Cubic Hermite interpolation from values and first derivatives.
pub fn hermite3(x0: f64, x1: f64, y0: [f64; 2], y1: [f64; 2], x: f64) -> [f64; 3] {
    let hh = x1 - x0;
    let u = (x - x0) / hh;
    let (u2, u3) = (u * u, u * u * u);
    let b = [2.0 * u3 - 3.0 * u2 + 1.0, u3 - 2.0 * u2 + u, -2.0 * u3 + 3.0 * u2, u3 - u2];
    let d = [6.0 * u2 - 6.0 * u, 3.0 * u2 - 4.0 * u + 1.0, -6.0 * u2 + 6.0 * u, 3.0 * u2 - 2.0 * u];
    let dd = [12.0 * u - 6.0, 6.0 * u - 4.0, -12.0 * u + 6.0, 6.0 * u - 2.0];
    let c = [y0[0], hh * y0[1], y1[0], hh * y1[1]];
    let dot = |w: &[f64; 4]| w.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
    [dot(&b), dot(&d) / hh, dot(&dd) / (hh * hh)]
}
