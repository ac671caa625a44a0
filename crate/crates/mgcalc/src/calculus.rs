//! First and second derivatives with respect to a measure, and the
//! fundamental-theorem representation they satisfy.
//!
//! All difference quotients are taken in the distribution coordinate
//! `t = F(x)`: a step of size `h` means a mass increment of `h`, not a
//! spatial one. Stencil points are pulled back through the pseudoinverse and
//! the quotients use the measured `F` values of those points, so flat
//! stretches of `F` (support gaps) cost accuracy but never break the
//! formulas.

use crate::error::{Error, Result};
use crate::measures::{kahan_sum, CdfEvaluator, MuQuadrature, ScalarFn};

/// A real function on the measure's interval, optionally carrying its exact
/// derivative with respect to the measure.
#[derive(Debug, Clone)]
pub struct MuFunction {
    eval: ScalarFn,
    derivative: Option<ScalarFn>,
}

impl MuFunction {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        MuFunction {
            eval: ScalarFn::new(f),
            derivative: None,
        }
    }

    pub fn with_derivative(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        MuFunction {
            eval: ScalarFn::new(f),
            derivative: Some(ScalarFn::new(df)),
        }
    }

    pub fn from_parts(eval: ScalarFn, derivative: Option<ScalarFn>) -> Self {
        MuFunction { eval, derivative }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval.eval(x)
    }

    /// Exact derivative with respect to the measure, when one is attached.
    pub fn analytic_derivative(&self) -> Option<&ScalarFn> {
        self.derivative.as_ref()
    }
}

/// Coefficients of a measure-harmonic function `x -> offset + slope * F(x)`.
/// These span the kernel of the second derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicPair {
    pub offset: f64,
    pub slope: f64,
}

impl HarmonicPair {
    pub fn new(offset: f64, slope: f64) -> Self {
        HarmonicPair { offset, slope }
    }

    /// Realize the harmonic function against a concrete measure. Evaluation
    /// panics outside the measure's interval.
    pub fn to_mu_function(&self, evaluator: &CdfEvaluator) -> MuFunction {
        let ev = evaluator.clone();
        let (offset, slope) = (self.offset, self.slope);
        MuFunction::with_derivative(
            move |x| offset + slope * ev.cdf(x).expect("harmonic evaluation failed"),
            move |_| slope,
        )
    }
}

/// Bracket of stencil targets in the distribution coordinate together with
/// their pullbacks, measured distribution values, and function values.
struct Stencil {
    s: Vec<f64>,
    u: Vec<f64>,
}

fn pull_stencil(
    f: &MuFunction,
    evaluator: &CdfEvaluator,
    targets: &[f64],
    x: f64,
    h: f64,
) -> Result<Stencil> {
    let mut s = Vec::with_capacity(targets.len());
    let mut u = Vec::with_capacity(targets.len());
    for &t in targets {
        let y = evaluator.pseudo_inverse(t)?;
        s.push(evaluator.cdf(y)?);
        u.push(f.eval(y));
    }
    let span = s[s.len() - 1] - s[0];
    let wanted = targets[targets.len() - 1] - targets[0];
    if !(span > 0.5 * wanted) {
        return Err(Error::DegenerateBracket { x, h });
    }
    Ok(Stencil { s, u })
}

/// Derivative of the interpolating quadratic through three `(s, u)` pairs,
/// evaluated at `s_star`.
fn quadratic_derivative(s: &[f64], u: &[f64], s_star: f64) -> f64 {
    let d1 = (u[1] - u[0]) / (s[1] - s[0]);
    let d2 = ((u[2] - u[1]) / (s[2] - s[1]) - d1) / (s[2] - s[0]);
    d1 + d2 * (2.0 * s_star - s[0] - s[1])
}

/// Numerical derivative of `f` with respect to the measure at `x`, using a
/// mass step `h`: central difference quotient in the distribution coordinate
/// where both sides fit, one-sided three-point stencil at the boundary.
///
/// Functions with an attached analytic derivative can be queried directly
/// via [`MuFunction::analytic_derivative`]; this routine always differences.
pub fn mu_derivative(f: &MuFunction, evaluator: &CdfEvaluator, x: f64, h: f64) -> Result<f64> {
    let iv = evaluator.interval();
    if !iv.contains(x) {
        return Err(Error::domain("x", x, iv.bounds_string()));
    }
    if !h.is_finite() || !(h > 0.0) {
        return Err(Error::validation(format!("step h = {h} must be positive")));
    }
    if h > 1.0 {
        // Total mass is 1: no bracket with increment h exists.
        return Err(Error::DegenerateBracket { x, h });
    }
    let t = evaluator.cdf(x)?;
    if t - 0.5 * h >= 0.0 && t + 0.5 * h <= 1.0 {
        let st = pull_stencil(f, evaluator, &[t - 0.5 * h, t + 0.5 * h], x, h)?;
        return Ok((st.u[1] - st.u[0]) / (st.s[1] - st.s[0]));
    }
    if 2.0 * h <= 1.0 {
        // One-sided quadratic stencil anchored at the boundary-side target.
        let (targets, at_first) = if t < 0.5 * h {
            ([t, t + h, t + 2.0 * h], true)
        } else {
            ([t - 2.0 * h, t - h, t], false)
        };
        let st = pull_stencil(f, evaluator, &targets, x, h)?;
        let s_star = if at_first { st.s[0] } else { st.s[2] };
        return Ok(quadratic_derivative(&st.s, &st.u, s_star));
    }
    // Step too large for a one-sided quadratic; fall back to the widest
    // two-point bracket containing t.
    let lo = (t - 0.5 * h).clamp(0.0, 1.0 - h);
    let st = pull_stencil(f, evaluator, &[lo, lo + h], x, h)?;
    Ok((st.u[1] - st.u[0]) / (st.s[1] - st.s[0]))
}

/// Numerical second derivative of `f` with respect to the measure at `x`:
/// three-point second difference in the distribution coordinate with mass
/// step `h`, the stencil shifted inward near the endpoints.
pub fn mu_laplacian(f: &MuFunction, evaluator: &CdfEvaluator, x: f64, h: f64) -> Result<f64> {
    let iv = evaluator.interval();
    if !iv.contains(x) {
        return Err(Error::domain("x", x, iv.bounds_string()));
    }
    if !h.is_finite() || !(h > 0.0) || h > 0.5 {
        return Err(Error::validation(format!(
            "step h = {h} must lie in (0, 0.5]"
        )));
    }
    let t = evaluator.cdf(x)?;
    let c = t.clamp(h, 1.0 - h);
    let st = pull_stencil(f, evaluator, &[c - h, c, c + h], x, h)?;
    let d1 = (st.u[1] - st.u[0]) / (st.s[1] - st.s[0]);
    let d2 = ((st.u[2] - st.u[1]) / (st.s[2] - st.s[1]) - d1) / (st.s[2] - st.s[0]);
    Ok(2.0 * d2)
}

/// Defect of the fundamental-theorem representation at `x`:
///
/// `f(x) - f(a) - grad_at_a * F(x) - integral over [a, x] of
/// (F(x) - F(y)) * laplacian_of_f(y) dmu(y)`.
///
/// Vanishes identically when `grad_at_a` and `laplacian_of_f` are the true
/// first derivative at `a` and second derivative of `f`; the returned value
/// otherwise measures quadrature plus model error.
pub fn representation_residual(
    f: &MuFunction,
    laplacian_of_f: impl Fn(f64) -> f64,
    grad_at_a: f64,
    quad: &MuQuadrature,
    x: f64,
) -> Result<f64> {
    let evaluator = quad.evaluator();
    let iv = evaluator.interval();
    if !iv.contains(x) {
        return Err(Error::domain("x", x, iv.bounds_string()));
    }
    let tx = evaluator.cdf(x)?;
    let xs = quad.nodes_x();
    let ts = quad.cdf_at_nodes();
    let ws = quad.grid().weights();
    let cut = xs.partition_point(|&xk| xk <= x);
    let integral = kahan_sum((0..cut).map(|k| ws[k] * (tx - ts[k]) * laplacian_of_f(xs[k])));
    Ok(f.eval(x) - f.eval(iv.a()) - grad_at_a * tx - integral)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::measures::{AffineMap, Interval, MeasureSpec, QuadratureGrid, ScalarFn};
    use crate::spectral::{eigenpair, BoundaryCondition};

    fn cantor43_ev() -> CdfEvaluator {
        let spec = MeasureSpec::self_similar(
            Interval::new(0.0, 1.0).unwrap(),
            vec![
                AffineMap::new(0.5, 0.0),
                AffineMap::new(1.0 / 3.0, 2.0 / 3.0),
            ],
            vec![0.7, 0.3],
        )
        .unwrap();
        CdfEvaluator::new(spec).unwrap()
    }

    fn lebesgue_ev() -> CdfEvaluator {
        let spec = MeasureSpec::density(
            Interval::new(0.0, 1.0).unwrap(),
            ScalarFn::new(|_| 1.0),
            Some(ScalarFn::new(|x| x)),
        )
        .unwrap();
        CdfEvaluator::new(spec).unwrap()
    }

    #[test]
    fn harmonic_functions_have_constant_derivative_and_zero_laplacian() {
        let ev = cantor43_ev();
        let h = HarmonicPair::new(0.25, -1.5).to_mu_function(&ev);
        assert_eq!(h.analytic_derivative().unwrap().eval(0.3), -1.5);
        // the quotient cancels the measured F exactly, gap interiors included
        for x in [0.1, 0.25, 0.45, 0.55, 0.7, 0.95] {
            let d = mu_derivative(&h, &ev, x, 1e-4).unwrap();
            assert!((d + 1.5).abs() < 1e-9, "x = {x}: {d}");
        }
        for x in [0.2, 0.5, 0.9] {
            assert!(mu_laplacian(&h, &ev, x, 1e-3).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn laplacian_of_squared_cdf_is_two() {
        // f = F^2 pulls back to u(t) = t^2, whose second difference is exact
        for ev in [
            lebesgue_ev(),
            cantor43_ev(),
            CdfEvaluator::new(MeasureSpec::salem(0.7, 0.5).unwrap()).unwrap(),
        ] {
            let e2 = ev.clone();
            let f = MuFunction::new(move |x| {
                let t = e2.cdf(x).expect("inside the interval");
                t * t
            });
            for x in [0.15, 0.5, 0.85] {
                let lap = mu_laplacian(&f, &ev, x, 1e-3).unwrap();
                assert!(
                    (lap - 2.0).abs() < 1e-5,
                    "{} at {x}: {lap}",
                    ev.spec().variant().name()
                );
            }
        }
    }

    #[test]
    fn eigenfunction_laplacian_matches_its_eigenvalue() {
        let ev = cantor43_ev();
        let pair = eigenpair(2, BoundaryCondition::Dirichlet, &ev).unwrap();
        for x in [0.2, 0.45, 0.8] {
            let lap = mu_laplacian(pair.eigenfunction(), &ev, x, 1e-4).unwrap();
            let want = pair.lambda() * pair.eval(x);
            assert!((lap - want).abs() < 1e-4 * (1.0 + want.abs()), "x = {x}");
        }
    }

    #[test]
    fn boundary_stencils_cover_the_endpoints() {
        // x at the endpoints forces the one-sided quadratic path
        let ev = lebesgue_ev();
        let f = MuFunction::new(|x| x * x);
        let d0 = mu_derivative(&f, &ev, 0.0, 1e-3).unwrap();
        assert!(d0.abs() < 1e-8, "{d0}");
        let d1 = mu_derivative(&f, &ev, 1.0, 1e-3).unwrap();
        assert!((d1 - 2.0).abs() < 1e-8, "{d1}");
        // step so large only the clamped two-point bracket fits
        let dw = mu_derivative(&f, &ev, 0.9, 0.9).unwrap();
        assert!((dw - 1.0).abs() < 0.5, "{dw}");
    }

    #[test]
    fn derivative_rejects_bad_points_and_degenerate_brackets() {
        let ev = cantor43_ev();
        let f = MuFunction::new(|x| x);
        assert!(matches!(
            mu_derivative(&f, &ev, 2.0, 1e-3),
            Err(Error::Domain { .. })
        ));
        assert!(mu_derivative(&f, &ev, 0.5, 0.0).is_err());
        assert!(mu_derivative(&f, &ev, 0.5, f64::NAN).is_err());
        // no bracket of mass increment > 1 exists
        assert!(matches!(
            mu_derivative(&f, &ev, 0.5, 1.5),
            Err(Error::DegenerateBracket { .. })
        ));
        // a step below one ulp of t collapses both stencil targets
        assert!(matches!(
            mu_derivative(&f, &ev, 0.55, 1e-17),
            Err(Error::DegenerateBracket { .. })
        ));
        assert!(mu_laplacian(&f, &ev, 0.5, 0.6).is_err());
        assert!(mu_laplacian(&f, &ev, -1.0, 1e-3).is_err());
    }

    #[test]
    fn representation_residual_vanishes_for_harmonics() {
        let ev = cantor43_ev();
        let q = MuQuadrature::new(&ev, &QuadratureGrid::midpoint(2_000).unwrap()).unwrap();
        let h = HarmonicPair::new(0.3, 2.0).to_mu_function(&ev);
        for x in [0.0, 0.3, 0.55, 1.0] {
            let r = representation_residual(&h, |_| 0.0, 2.0, &q, x).unwrap();
            assert!(r.abs() < 1e-12, "x = {x}: {r}");
        }
        assert!(representation_residual(&h, |_| 0.0, 2.0, &q, 1.5).is_err());
    }

    #[test]
    fn representation_residual_is_quadrature_small_for_eigenpairs() {
        let ev = cantor43_ev();
        let q = MuQuadrature::new(&ev, &QuadratureGrid::midpoint(50_000).unwrap()).unwrap();
        let pair = eigenpair(1, BoundaryCondition::Dirichlet, &ev).unwrap();
        let lam = pair.lambda();
        for x in [0.25, 0.6, 0.9] {
            let r = representation_residual(
                pair.eigenfunction(),
                |y| lam * pair.eval(y),
                pair.initial_slope(),
                &q,
                x,
            )
            .unwrap();
            assert!(r.abs() < 1e-6, "x = {x}: {r}");
        }
    }

    #[test]
    fn mu_function_accessors() {
        let f = MuFunction::with_derivative(|x| 2.0 * x, |_| 2.0);
        assert_eq!(f.eval(0.25), 0.5);
        assert_eq!(f.analytic_derivative().unwrap().eval(0.9), 2.0);
        let g = MuFunction::from_parts(ScalarFn::new(|x| x), None);
        assert!(g.analytic_derivative().is_none());
        assert_eq!(g.eval(0.3), 0.3);
    }

    proptest! {
        #[test]
        fn prop_harmonic_evaluation_is_offset_plus_slope_times_cdf(
            offset in -2.0..2.0f64,
            slope in -2.0..2.0f64,
            x in 0.0..=1.0f64,
        ) {
            let ev = cantor43_ev();
            let h = HarmonicPair::new(offset, slope).to_mu_function(&ev);
            let want = offset + slope * ev.cdf(x).unwrap();
            prop_assert_eq!(h.eval(x), want);
        }
    }
}
