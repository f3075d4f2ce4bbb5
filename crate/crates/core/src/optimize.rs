//! Derivative-free minimization on a box.
//!
//! [`powell`] is Powell's conjugate direction-set method. Each line search is a
//! bounded Brent minimization over the segment of the direction that stays in
//! the box, followed by a check of both segment endpoints, so solutions sitting
//! on a bound are reached exactly. No gradients are used, which matters for the
//! piecewise-constant tax factor that makes firm objectives discontinuous.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::domain("bound vectors differ in length"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::domain("every lower bound must be finite and not exceed its upper bound"));
        }
        Ok(Bounds { lower, upper })
    }

    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| l <= v && v <= u)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| if u > l { rng.gen_range(l..=u) } else { l })
            .collect()
    }

    /// Step range `[t_lo, t_hi]` keeping `x + t d` inside the box.
    fn segment(&self, x: &[f64], d: &[f64]) -> (f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for k in 0..x.len() {
            if d[k] == 0.0 {
                continue;
            }
            let a = (self.lower[k] - x[k]) / d[k];
            let b = (self.upper[k] - x[k]) / d[k];
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
        (lo.min(0.0), hi.max(0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowellOptions {
    /// Relative decrease of one full sweep below which the search stops.
    pub ftol: f64,
    /// Absolute step tolerance of each line search.
    pub xtol: f64,
    pub max_iterations: usize,
}

impl Default for PowellOptions {
    fn default() -> Self {
        PowellOptions { ftol: 1e-10, xtol: 1e-8, max_iterations: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

struct Counted<'a, F> {
    f: &'a mut F,
    calls: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<'_, F> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.calls += 1;
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::numeric(format!("objective returned {v} at {x:?}")))
        }
    }
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;
const LINE_MAX_EVALS: usize = 500;

/// Brent's bounded scalar minimization of `g` on `[a, b]`.
fn brent_bounded<G: FnMut(f64) -> Result<f64>>(mut g: G, mut a: f64, mut b: f64, xtol: f64) -> Result<(f64, f64)> {
    let sqrt_eps = f64::EPSILON.sqrt();
    let mut fulc = a + GOLDEN * (b - a);
    let mut nfc = fulc;
    let mut xf = fulc;
    let mut rat: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut fx = g(xf)?;
    let mut ffulc = fx;
    let mut fnfc = fx;
    let mut xm = 0.5 * (a + b);
    let mut tol1 = sqrt_eps * xf.abs() + xtol / 3.0;
    let mut tol2 = 2.0 * tol1;
    let mut evals = 1;

    while (xf - xm).abs() > tol2 - 0.5 * (b - a) {
        let mut golden = true;
        if e.abs() > tol1 {
            golden = false;
            let mut r = (xf - nfc) * (fx - ffulc);
            let mut q = (xf - fulc) * (fx - fnfc);
            let mut p = (xf - fulc) * q - (xf - nfc) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            r = e;
            e = rat;
            if p.abs() < (0.5 * q * r).abs() && p > q * (a - xf) && p < q * (b - xf) {
                rat = p / q;
                let x = xf + rat;
                if x - a < tol2 || b - x < tol2 {
                    rat = if xm >= xf { tol1 } else { -tol1 };
                }
            } else {
                golden = true;
            }
        }
        if golden {
            e = if xf >= xm { a - xf } else { b - xf };
            rat = GOLDEN * e;
        }
        let step = if rat >= 0.0 { rat.abs().max(tol1) } else { -rat.abs().max(tol1) };
        let x = xf + step;
        let fu = g(x)?;
        evals += 1;
        if fu <= fx {
            if x >= xf {
                a = xf;
            } else {
                b = xf;
            }
            fulc = nfc;
            ffulc = fnfc;
            nfc = xf;
            fnfc = fx;
            xf = x;
            fx = fu;
        } else {
            if x < xf {
                a = x;
            } else {
                b = x;
            }
            if fu <= fnfc || nfc == xf {
                fulc = nfc;
                ffulc = fnfc;
                nfc = x;
                fnfc = fu;
            } else if fu <= ffulc || fulc == xf || fulc == nfc {
                fulc = x;
                ffulc = fu;
            }
        }
        xm = 0.5 * (a + b);
        tol1 = sqrt_eps * xf.abs() + xtol / 3.0;
        tol2 = 2.0 * tol1;
        if evals >= LINE_MAX_EVALS {
            break;
        }
    }
    Ok((xf, fx))
}

/// Minimizes along `d` from `x` within the box; updates `x` and returns the new value.
/// Never returns a value above `fx`.
fn line_search<F: FnMut(&[f64]) -> f64>(
    f: &mut Counted<'_, F>,
    x: &mut [f64],
    fx: f64,
    d: &[f64],
    bounds: &Bounds,
    xtol: f64,
    scratch: &mut Vec<f64>,
) -> Result<f64> {
    let (lo, hi) = bounds.segment(x, d);
    if hi - lo <= 0.0 {
        return Ok(fx);
    }
    scratch.clear();
    scratch.extend_from_slice(x);
    let base = scratch.clone();
    let at = |t: f64, f: &mut Counted<'_, F>, buf: &mut Vec<f64>| -> Result<f64> {
        for k in 0..base.len() {
            buf[k] = base[k] + t * d[k];
        }
        bounds.clamp(buf);
        f.eval(buf)
    };
    let (t_star, f_star) = brent_bounded(|t| at(t, f, scratch), lo, hi, xtol)?;
    let mut best_t = 0.0;
    let mut best_f = fx;
    for (t, v) in [(t_star, f_star), (lo, at(lo, f, scratch)?), (hi, at(hi, f, scratch)?)] {
        if v < best_f {
            best_f = v;
            best_t = t;
        }
    }
    if best_t != 0.0 {
        for k in 0..x.len() {
            x[k] = base[k] + best_t * d[k];
        }
        bounds.clamp(x);
    }
    Ok(best_f)
}

/// Powell's direction-set minimization of `f` from `start`, confined to `bounds`.
///
/// Stops when a full sweep lowers the objective by at most `ftol` relative to its
/// magnitude; hitting `max_iterations` returns the best point with `converged = false`.
pub fn powell<F: FnMut(&[f64]) -> f64>(f: &mut F, start: &[f64], bounds: &Bounds, opts: &PowellOptions) -> Result<Minimum> {
    let n = start.len();
    if n != bounds.dim() {
        return Err(Error::domain("start point and bounds differ in dimension"));
    }
    let mut f = Counted { f, calls: 0 };
    let mut x = start.to_vec();
    bounds.clamp(&mut x);
    let mut fval = f.eval(&x)?;
    if n == 0 {
        return Ok(Minimum { point: x, value: fval, iterations: 0, evaluations: f.calls, converged: true });
    }
    let mut dirs: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut d = vec![0.0; n];
            d[i] = 1.0;
            d
        })
        .collect();
    let mut scratch = Vec::with_capacity(n);
    let mut x_sweep = vec![0.0; n];
    let mut x_ext = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    loop {
        let f_sweep = fval;
        x_sweep.copy_from_slice(&x);
        let mut biggest = 0;
        let mut delta = 0.0;
        for (i, d) in dirs.iter().enumerate() {
            let before = fval;
            fval = line_search(&mut f, &mut x, fval, d, bounds, opts.xtol, &mut scratch)?;
            if before - fval > delta {
                delta = before - fval;
                biggest = i;
            }
        }
        iterations += 1;
        if 2.0 * (f_sweep - fval) <= opts.ftol * (f_sweep.abs() + fval.abs()) + 1e-20 {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }

        // Extrapolate along the net displacement of this sweep.
        let mut d: Vec<f64> = x.iter().zip(&x_sweep).map(|(a, b)| a - b).collect();
        let norm = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm == 0.0 {
            continue;
        }
        let (_, hi) = bounds.segment(&x, &d);
        let step = hi.min(1.0);
        for k in 0..n {
            x_ext[k] = x[k] + step * d[k];
        }
        bounds.clamp(&mut x_ext);
        let f_ext = f.eval(&x_ext)?;
        if f_sweep > f_ext {
            let mut t = 2.0 * (f_sweep + f_ext - 2.0 * fval);
            let tmp = f_sweep - fval - delta;
            t *= tmp * tmp;
            let tmp = f_sweep - f_ext;
            t -= delta * tmp * tmp;
            if t < 0.0 {
                d.iter_mut().for_each(|v| *v /= norm);
                fval = line_search(&mut f, &mut x, fval, &d, bounds, opts.xtol, &mut scratch)?;
                dirs[biggest] = dirs[n - 1].clone();
                dirs[n - 1] = d;
            }
        }
    }

    Ok(Minimum { point: x, value: fval, iterations, evaluations: f.calls, converged })
}

/// Runs [`powell`] from `start` and from `restarts - 1` uniform random points,
/// keeping the lowest value. Ties keep the earlier start.
pub fn powell_multistart<F: FnMut(&[f64]) -> f64, R: Rng>(
    f: &mut F,
    start: &[f64],
    bounds: &Bounds,
    opts: &PowellOptions,
    restarts: usize,
    rng: &mut R,
) -> Result<Minimum> {
    let mut best = powell(f, start, bounds, opts)?;
    let mut evaluations = best.evaluations;
    for _ in 1..restarts.max(1) {
        let s = bounds.sample(rng);
        let cand = powell(f, &s, bounds, opts)?;
        evaluations += cand.evaluations;
        if cand.value < best.value {
            best = cand;
        }
    }
    best.evaluations = evaluations;
    Ok(best)
}
