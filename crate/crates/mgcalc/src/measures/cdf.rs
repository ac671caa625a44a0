use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec;

use super::{DensityMeasure, Interval, MeasureSpec, MeasureVariant, ScalarFn};

/// Evaluator for the distribution function `F(x) = mu([a, x])` and its
/// pseudoinverse `t -> inf { y : F(y) >= t }`.
///
/// # Properties
/// * `F(a) = 0` and `F(b) = 1` exactly; all values are clamped to `[0, 1]`.
/// * `F` is nondecreasing on sorted inputs.
/// * pseudoinverse values land on the left endpoint of level sets, so flat
///   stretches of `F` (support gaps) resolve to their infimum.
#[derive(Debug, Clone)]
pub struct CdfEvaluator {
    inner: Arc<Inner>,
}

#[derive(Debug)]
struct Inner {
    spec: MeasureSpec,
    tol: f64,
    depth_limit: u32,
    /// Prefix sums of IFS weights, cached for the evaluation loop.
    prefix_weights: Vec<f64>,
}

impl CdfEvaluator {
    pub const DEFAULT_TOL: f64 = 1e-10;
    pub const DEFAULT_DEPTH_LIMIT: u32 = 4096;

    pub fn new(spec: MeasureSpec) -> Result<Self> {
        Self::with_params(spec, Self::DEFAULT_TOL, Self::DEFAULT_DEPTH_LIMIT)
    }

    /// `tol` bounds the absolute error of one CDF evaluation; `depth_limit`
    /// caps the recursion (or quadrature refinement) spent reaching it.
    pub fn with_params(spec: MeasureSpec, tol: f64, depth_limit: u32) -> Result<Self> {
        if !tol.is_finite() || !(tol > 0.0) || tol > 0.1 {
            return Err(Error::validation(format!(
                "tolerance {tol} must lie in (0, 0.1]"
            )));
        }
        if depth_limit == 0 {
            return Err(Error::validation("depth limit must be positive"));
        }
        let prefix_weights = match spec.variant() {
            MeasureVariant::SelfSimilar(ifs) => {
                let mut acc = 0.0;
                let mut prefix = Vec::with_capacity(ifs.weights().len());
                for w in ifs.weights() {
                    prefix.push(acc);
                    acc += w;
                }
                prefix
            }
            _ => Vec::new(),
        };
        Ok(CdfEvaluator {
            inner: Arc::new(Inner {
                spec,
                tol,
                depth_limit,
                prefix_weights,
            }),
        })
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.inner.spec
    }

    pub fn interval(&self) -> Interval {
        self.inner.spec.interval()
    }

    pub fn tol(&self) -> f64 {
        self.inner.tol
    }

    pub fn depth_limit(&self) -> u32 {
        self.inner.depth_limit
    }

    /// Distribution function `F(x)` for `x` in `[a, b]`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let iv = self.interval();
        if !iv.contains(x) {
            return Err(Error::domain("x", x, iv.bounds_string()));
        }
        if x == iv.a() {
            return Ok(0.0);
        }
        if x == iv.b() {
            return Ok(1.0);
        }
        let value = match self.inner.spec.variant() {
            MeasureVariant::Density(dm) => self.density_cdf(dm, x)?,
            MeasureVariant::Salem(sp) => self.salem_cdf(sp.p, sp.q, x)?,
            MeasureVariant::SelfSimilar(_) => self.ifs_cdf(x)?,
        };
        Ok(value.clamp(0.0, 1.0))
    }

    /// `F` on a batch of points; parallel when the feature is enabled.
    pub fn cdf_grid(&self, xs: &[f64]) -> Result<Vec<f64>> {
        exec::try_map_f64(xs, |&x| self.cdf(x))
    }

    /// Pseudoinverse `t -> inf { y : F(y) >= t }`, with `F^(-1)(0) = a` and
    /// `F^(-1)(1) = b`.
    ///
    /// The recursive families are inverted by expanding `t` digit by digit on
    /// the mass scale and mirroring each digit on the geometric side. That
    /// keeps `F(pseudo_inverse(t))` within `tol` of `t` even where `F` climbs
    /// through a steep address (bisection would be off by one ulp in `y`,
    /// which a steep cell turns into far more than `tol` in mass). Ties at a
    /// branch boundary descend into the lower branch, so plateau values
    /// resolve to the left end of their level set. Density measures use
    /// monotone bisection on `F` run to float exhaustion.
    pub fn pseudo_inverse(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain("t", t, "[0, 1]"));
        }
        let iv = self.interval();
        if t <= 0.0 {
            return Ok(iv.a());
        }
        if t >= 1.0 {
            return Ok(iv.b());
        }
        match self.inner.spec.variant() {
            MeasureVariant::Density(_) => self.bisect_pseudo_inverse(t),
            MeasureVariant::Salem(sp) => self.salem_pseudo_inverse(sp.p, sp.q, t),
            MeasureVariant::SelfSimilar(_) => self.ifs_pseudo_inverse(t),
        }
    }

    /// Pseudoinverse on a batch of points; parallel when the feature is
    /// enabled.
    pub fn pseudo_inverse_grid(&self, ts: &[f64]) -> Result<Vec<f64>> {
        exec::try_map_f64(ts, |&t| self.pseudo_inverse(t))
    }

    fn bisect_pseudo_inverse(&self, t: f64) -> Result<f64> {
        let iv = self.interval();
        let mut lo = iv.a();
        let mut hi = iv.b();
        // Invariant: F(lo) < t <= F(hi).
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid)? >= t {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    fn salem_pseudo_inverse(&self, p: f64, q: f64, t: f64) -> Result<f64> {
        let tol = self.inner.tol;
        let mut x_acc = 0.0;
        let mut x_scale = 1.0;
        let mut t_scale = 1.0;
        let mut t_cur = t;
        let mut steps = 0;
        loop {
            if t_cur <= 0.0 {
                return Ok(x_acc);
            }
            if t_cur >= 1.0 {
                return Ok(x_acc + x_scale);
            }
            if t_scale <= tol {
                // Linear interpolation inside the terminal cell; F moves by
                // at most t_scale across it.
                return Ok(x_acc + x_scale * t_cur);
            }
            if steps >= self.inner.depth_limit {
                return Err(Error::Precision {
                    requested: tol,
                    achieved: t_scale,
                });
            }
            if t_cur <= p {
                t_cur /= p;
                t_scale *= p;
                x_scale *= q;
            } else {
                t_cur = (t_cur - p) / (1.0 - p);
                t_scale *= 1.0 - p;
                x_acc += x_scale * q;
                x_scale *= 1.0 - q;
            }
            steps += 1;
        }
    }

    fn ifs_pseudo_inverse(&self, t: f64) -> Result<f64> {
        let ifs = match self.inner.spec.variant() {
            MeasureVariant::SelfSimilar(ifs) => ifs,
            _ => unreachable!(),
        };
        let iv = self.interval();
        let (a, b) = (iv.a(), iv.b());
        let tol = self.inner.tol;
        let maps = ifs.maps();
        let weights = ifs.weights();
        let prefix = &self.inner.prefix_weights;
        // Composite of the maps chosen so far: x = r * xi + c, xi in [a, b].
        let mut r = 1.0;
        let mut c = 0.0;
        let mut t_scale = 1.0;
        let mut t_cur = t;
        let mut steps = 0;
        loop {
            if t_cur <= 0.0 {
                return Ok(r * a + c);
            }
            if t_cur >= 1.0 {
                return Ok(r * b + c);
            }
            if t_scale <= tol {
                return Ok(r * (a + t_cur * (b - a)) + c);
            }
            if steps >= self.inner.depth_limit {
                return Err(Error::Precision {
                    requested: tol,
                    achieved: t_scale,
                });
            }
            let i = (0..weights.len())
                .find(|&i| t_cur <= prefix[i] + weights[i])
                .unwrap_or(weights.len() - 1);
            t_cur = (t_cur - prefix[i]) / weights[i];
            t_scale *= weights[i];
            c += r * maps[i].c;
            r *= maps[i].r;
            steps += 1;
        }
    }

    fn density_cdf(&self, dm: &DensityMeasure, x: f64) -> Result<f64> {
        let iv = self.interval();
        if let Some(cf) = dm.closed_form_cdf() {
            let fa = cf.eval(iv.a());
            let fb = cf.eval(iv.b());
            return Ok((cf.eval(x) - fa) / (fb - fa));
        }
        let part = adaptive_simpson(
            dm.density_fn(),
            iv.a(),
            x,
            0.25 * self.inner.tol,
            self.inner.depth_limit.min(48),
        )?;
        Ok(part / dm.mass())
    }

    fn salem_cdf(&self, p: f64, q: f64, x: f64) -> Result<f64> {
        let tol = self.inner.tol;
        let mut acc = 0.0;
        let mut scale = 1.0;
        let mut y = x;
        let mut steps = 0;
        loop {
            if y <= 0.0 {
                return Ok(acc);
            }
            if y >= 1.0 {
                return Ok(acc + scale);
            }
            if scale <= tol {
                // Remaining factor F(y) is approximated by y itself; the
                // error is below `scale`.
                return Ok(acc + scale * y);
            }
            if steps >= self.inner.depth_limit {
                return Err(Error::Precision {
                    requested: tol,
                    achieved: scale,
                });
            }
            if y <= q {
                scale *= p;
                y /= q;
            } else {
                acc += scale * p;
                scale *= 1.0 - p;
                y = (y - q) / (1.0 - q);
            }
            steps += 1;
        }
    }

    fn ifs_cdf(&self, x: f64) -> Result<f64> {
        let ifs = match self.inner.spec.variant() {
            MeasureVariant::SelfSimilar(ifs) => ifs,
            _ => unreachable!(),
        };
        let iv = self.interval();
        let (a, b) = (iv.a(), iv.b());
        let tol = self.inner.tol;
        let maps = ifs.maps();
        let weights = ifs.weights();
        let prefix = &self.inner.prefix_weights;
        let mut acc = 0.0;
        let mut scale = 1.0;
        let mut y = x;
        let mut steps = 0;
        loop {
            if y <= a {
                return Ok(acc);
            }
            if y >= b {
                return Ok(acc + scale);
            }
            if scale <= tol {
                return Ok(acc + scale * (y - a) / (b - a));
            }
            if steps >= self.inner.depth_limit {
                return Err(Error::Precision {
                    requested: tol,
                    achieved: scale,
                });
            }
            let mut located = None;
            for (i, m) in maps.iter().enumerate() {
                if y <= m.apply(b) {
                    if y < m.apply(a) {
                        // Gap to the left of image i: F is flat there.
                        return Ok(acc + scale * prefix[i]);
                    }
                    located = Some(i);
                    break;
                }
            }
            match located {
                Some(i) => {
                    acc += scale * prefix[i];
                    scale *= weights[i];
                    y = maps[i].invert(y).clamp(a, b);
                }
                // Sliver between the last image and b (endpoint slack).
                None => return Ok(acc + scale),
            }
            steps += 1;
        }
    }
}

/// Total integral of a density over `[a, b]`, used at validation time.
pub(crate) fn integrate_density(density: &ScalarFn, a: f64, b: f64, tol: f64) -> Result<f64> {
    adaptive_simpson(density, a, b, tol, 40)
}

/// Recursive adaptive Simpson quadrature. Endpoint evaluations that come out
/// non-finite are nudged inward, which tolerates integrable singularities at
/// the interval ends.
fn adaptive_simpson(f: &ScalarFn, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = guarded_eval(f, a, a, b)?;
    let fb = guarded_eval(f, b, a, b)?;
    let m = 0.5 * (a + b);
    let fm = guarded_eval(f, m, a, b)?;
    let whole = simpson(a, b, fa, fm, fb);
    simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, max_depth)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &ScalarFn,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = guarded_eval(f, lm, a, b)?;
    let frm = guarded_eval(f, rm, a, b)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (m - a).abs() <= f64::EPSILON * a.abs().max(b.abs()) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Precision {
            requested: tol,
            achieved: delta.abs() / 15.0,
        });
    }
    let half = 0.5 * tol;
    Ok(
        simpson_rec(f, a, lm, m, fa, flm, fm, left, half, depth - 1)?
            + simpson_rec(f, m, rm, b, fm, frm, fb, right, half, depth - 1)?,
    )
}

fn guarded_eval(f: &ScalarFn, x: f64, lo: f64, hi: f64) -> Result<f64> {
    let v = f.eval(x);
    if v.is_finite() {
        return Ok(v);
    }
    // Nudge toward the interior; integrable singularities at the endpoints
    // then contribute a sliver below any practical mass tolerance.
    let span = hi - lo;
    for eps in [1e-13, 1e-10] {
        let shifted = if x - lo <= hi - x {
            x + eps * span
        } else {
            x - eps * span
        };
        let v = f.eval(shifted);
        if v.is_finite() {
            return Ok(v);
        }
    }
    Err(Error::validation(format!(
        "density evaluates non-finite at x = {x}"
    )))
}
