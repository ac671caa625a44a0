//! The worked measure families: the arcsine measure (whose von Neumann
//! eigenfunctions are signed Chebyshev polynomials), Salem's strictly
//! increasing singular functions, and two-map Cantor measures, plus the
//! residual checks tying each family to the general machinery.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec;
use crate::measures::{
    arcsine_measure, AffineMap, CdfEvaluator, Interval, MeasureSpec, MeasureVariant, ScalarFn,
};
use crate::rng;
use crate::spectral::{eigenpair, BoundaryCondition};

/// Chebyshev polynomial of the first kind, evaluated through the three-term
/// recurrence `T_{n+1}(x) = 2x T_n(x) - T_{n-1}(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChebyshevPolynomial {
    n: u32,
}

impl ChebyshevPolynomial {
    pub fn new(n: u32) -> Self {
        ChebyshevPolynomial { n }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `T_n(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.n {
            0 => 1.0,
            1 => x,
            _ => {
                let (mut prev, mut cur) = (1.0, x);
                for _ in 2..=self.n {
                    (prev, cur) = (cur, 2.0 * x * cur - prev);
                }
                cur
            }
        }
    }

    /// `dT_n/dx`, from the differentiated recurrence
    /// `T'_{n+1}(x) = 2 T_n(x) + 2x T'_n(x) - T'_{n-1}(x)`.
    pub fn derivative(&self, x: f64) -> f64 {
        match self.n {
            0 => 0.0,
            1 => 1.0,
            _ => {
                let (mut t_prev, mut t_cur) = (1.0, x);
                let (mut d_prev, mut d_cur) = (0.0, 1.0);
                for _ in 2..=self.n {
                    let t_next = 2.0 * x * t_cur - t_prev;
                    let d_next = 2.0 * t_cur + 2.0 * x * d_cur - d_prev;
                    (t_prev, t_cur) = (t_cur, t_next);
                    (d_prev, d_cur) = (d_cur, d_next);
                }
                d_cur
            }
        }
    }
}

/// Lebesgue measure on `[0, 1]`: unit density, identity CDF. The base case
/// in which every measure-calculus object reduces to its classical twin.
pub fn lebesgue() -> MeasureSpec {
    MeasureSpec::density(
        Interval::new(0.0, 1.0).expect("interval is valid"),
        ScalarFn::new(|_| 1.0),
        Some(ScalarFn::new(|x| x)),
    )
    .expect("unit density is valid")
}

/// The arcsine measure on `[-1, 1]`, density `1/(pi sqrt(1 - x^2))`, CDF
/// `arccos(-x)/pi`. Its von Neumann eigenfunctions are `(-1)^n T_n`.
pub fn chebyshev() -> MeasureSpec {
    arcsine_measure()
}

/// Salem measure on `[0, 1]` with left-branch mass `p` and left-branch
/// length `q`. Strictly increasing; singular whenever `p != q`.
pub fn salem_family(p: f64, q: f64) -> Result<MeasureSpec> {
    MeasureSpec::salem(p, q)
}

/// Self-similar measure on `[0, 1]` for ordered affine contractions with
/// disjoint images and the given weights.
pub fn cantor_family(maps: Vec<AffineMap>, weights: Vec<f64>) -> Result<MeasureSpec> {
    MeasureSpec::self_similar(
        Interval::new(0.0, 1.0).expect("interval is valid"),
        maps,
        weights,
    )
}

/// Two-map Cantor measure with unequal ratios (1/2 and 1/3) and weights
/// (0.7, 0.3); addressable from the CLI as preset `cantor-4.3`.
pub fn inhomogeneous_cantor() -> MeasureSpec {
    cantor_family(
        vec![
            AffineMap::new(0.5, 0.0),
            AffineMap::new(1.0 / 3.0, 2.0 / 3.0),
        ],
        vec![0.7, 0.3],
    )
    .expect("preset is valid")
}

/// Middle-thirds Cantor measure with equal weights; CLI preset
/// `cantor-classic`. Its CDF is the classical Cantor function.
pub fn classic_cantor() -> MeasureSpec {
    cantor_family(
        vec![
            AffineMap::new(1.0 / 3.0, 0.0),
            AffineMap::new(1.0 / 3.0, 2.0 / 3.0),
        ],
        vec![0.5, 0.5],
    )
    .expect("preset is valid")
}

/// Preset names accepted by [`preset`], with `P`/`Q` placeholders for the
/// parametrized family.
pub const PRESET_NAMES: [&str; 5] = [
    "lebesgue",
    "chebyshev",
    "salem:P,Q",
    "cantor-4.3",
    "cantor-classic",
];

/// Resolve a named preset: `lebesgue`, `chebyshev`, `salem:P,Q` (for example
/// `salem:0.7,0.5`), `cantor-4.3`, or `cantor-classic`.
pub fn preset(name: &str) -> Result<MeasureSpec> {
    match name {
        "lebesgue" => Ok(lebesgue()),
        "chebyshev" => Ok(chebyshev()),
        "cantor-4.3" => Ok(inhomogeneous_cantor()),
        "cantor-classic" => Ok(classic_cantor()),
        _ => {
            if let Some(rest) = name.strip_prefix("salem:") {
                let (p, q) = rest.split_once(',').ok_or_else(|| {
                    Error::validation(format!(
                        "salem preset takes two comma-separated parameters, got {rest:?}"
                    ))
                })?;
                let parse = |s: &str| {
                    s.trim().parse::<f64>().map_err(|_| {
                        Error::validation(format!("cannot parse salem parameter {s:?}"))
                    })
                };
                salem_family(parse(p)?, parse(q)?)
            } else {
                Err(Error::validation(format!(
                    "unknown preset {name:?}; available: lebesgue, chebyshev, salem:P,Q, \
                     cantor-4.3, cantor-classic"
                )))
            }
        }
    }
}

/// Largest deviation of the arcsine measure's von Neumann eigenfunction
/// `cos(pi n F)` from the signed polynomial `(-1)^n T_n` over the probes.
/// The identity is exact; the residual is pure rounding.
pub fn chebyshev_identity_residual(n: u32, probe: &[f64]) -> Result<f64> {
    let evaluator = CdfEvaluator::new(chebyshev())?;
    let pair = eigenpair(n, BoundaryCondition::VonNeumann, &evaluator)?;
    let poly = ChebyshevPolynomial::new(n);
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let residuals = exec::try_map_f64(probe, |&x| {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::domain("probe", x, "[-1, 1]"));
        }
        Ok((pair.eval(x) - sign * poly.eval(x)).abs())
    })?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Largest deviation of the analytic derivative `-pi n sin(pi n F)` of the
/// arcsine eigenfunction from the polynomial form
/// `(-1)^n pi sqrt(1 - x^2) T_n'(x)` over probes strictly inside `(-1, 1)`.
pub fn chebyshev_derivative_residual(n: u32, probe: &[f64]) -> Result<f64> {
    if n == 0 {
        return Err(Error::validation("the derivative identity needs n >= 1"));
    }
    let evaluator = CdfEvaluator::new(chebyshev())?;
    let pair = eigenpair(n, BoundaryCondition::VonNeumann, &evaluator)?;
    let grad = pair
        .eigenfunction()
        .analytic_derivative()
        .expect("eigenpairs carry analytic derivatives")
        .clone();
    let poly = ChebyshevPolynomial::new(n);
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let residuals = exec::try_map_f64(probe, |&x| {
        if !(-1.0 < x && x < 1.0) {
            return Err(Error::domain("probe", x, "(-1, 1)"));
        }
        let polynomial_form = sign * PI * (1.0 - x * x).sqrt() * poly.derivative(x);
        Ok((grad.eval(x) - polynomial_form).abs())
    })?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Largest deviation of `f_n` from `-(1/(pi n)) * grad(g_n)` over the
/// probes: the Dirichlet eigenfunctions are the (rescaled) derivatives of
/// the von Neumann ones. Checks the sign and scale wiring of the analytic
/// derivatives.
pub fn dirichlet_relation_residual(n: u32, evaluator: &CdfEvaluator, probe: &[f64]) -> Result<f64> {
    if n == 0 {
        return Err(Error::validation("the relation needs n >= 1"));
    }
    let dirichlet = eigenpair(n, BoundaryCondition::Dirichlet, evaluator)?;
    let von_neumann = eigenpair(n, BoundaryCondition::VonNeumann, evaluator)?;
    let grad = von_neumann
        .eigenfunction()
        .analytic_derivative()
        .expect("eigenpairs carry analytic derivatives")
        .clone();
    let iv = evaluator.interval();
    let scale = -1.0 / (PI * n as f64);
    let residuals = exec::try_map_f64(probe, |&x| {
        if !iv.contains(x) {
            return Err(Error::domain("probe", x, iv.bounds_string()));
        }
        Ok((dirichlet.eval(x) - scale * grad.eval(x)).abs())
    })?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Largest parity defect `|g_n(-x) - (-1)^n g_n(x)|` of the arcsine
/// eigenfunctions over the probes; the measure is symmetric, so even indices
/// give even functions and odd indices odd ones.
pub fn chebyshev_parity_residual(n: u32, probe: &[f64]) -> Result<f64> {
    let evaluator = CdfEvaluator::new(chebyshev())?;
    let pair = eigenpair(n, BoundaryCondition::VonNeumann, &evaluator)?;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let residuals = exec::try_map_f64(probe, |&x| {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::domain("probe", x, "[-1, 1]"));
        }
        Ok((pair.eval(-x) - sign * pair.eval(x)).abs())
    })?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Piecewise-linear doubling map with break point `r`: `x/r` on `[0, r]`,
/// `(x - r)/(1 - r)` above. The break point itself belongs to the left
/// branch.
pub fn branch_map(r: f64, x: f64) -> f64 {
    if x <= r {
        x / r
    } else {
        (x - r) / (1.0 - r)
    }
}

/// Sup over an even grid of the intertwining defect
/// `|S_p(F(x)) - F(S_q(x))|` that characterizes the Salem CDF.
pub fn salem_functional_residual(p: f64, q: f64, samples: usize, tol: f64) -> Result<f64> {
    if samples < 2 {
        return Err(Error::validation("need at least two sample points"));
    }
    let evaluator = CdfEvaluator::with_params(salem_family(p, q)?, tol, 4096)?;
    let xs: Vec<f64> = (0..samples)
        .map(|i| i as f64 / (samples - 1) as f64)
        .collect();
    let residuals = exec::try_map_f64(&xs, |&x| {
        Ok((branch_map(p, evaluator.cdf(x)?) - evaluator.cdf(branch_map(q, x))?).abs())
    })?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Sup over maps and an even sample grid of the self-similarity defect
/// `|F(s_i(y)) - (sum of weights left of i + w_i F(y))|`.
pub fn ifs_consistency_residual(spec: &MeasureSpec, samples: usize, tol: f64) -> Result<f64> {
    let ifs = match spec.variant() {
        MeasureVariant::SelfSimilar(ifs) => ifs,
        other => {
            return Err(Error::UnsupportedVariant {
                required: "self-similar",
                got: other.name(),
            })
        }
    };
    if samples < 2 {
        return Err(Error::validation("need at least two sample points"));
    }
    let iv = spec.interval();
    let evaluator = CdfEvaluator::with_params(spec.clone(), tol, 4096)?;
    let ys: Vec<f64> = (0..samples)
        .map(|i| iv.a() + iv.length() * i as f64 / (samples - 1) as f64)
        .collect();
    let mut worst = 0.0_f64;
    let mut prefix = 0.0;
    for (map, &weight) in ifs.maps().iter().zip(ifs.weights()) {
        let residuals = exec::try_map_f64(&ys, |&y| {
            let image = map.apply(y).clamp(iv.a(), iv.b());
            Ok((evaluator.cdf(image)? - (prefix + weight * evaluator.cdf(y)?)).abs())
        })?;
        worst = residuals.into_iter().fold(worst, f64::max);
        prefix += weight;
    }
    Ok(worst)
}

/// Summary statistics of central difference quotients of a Salem CDF,
/// recording its almost-everywhere-flat yet strictly increasing character.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SalemSlopeDiagnostic {
    /// Fraction of evenly spaced points whose quotient at `h = 1e-6`
    /// exceeds 1.
    pub steep_fraction: f64,
    /// Median quotient at `h = 1e-3` over a pseudorandom sample.
    pub median_quotient: f64,
}

/// Difference-quotient statistics for the Salem CDF with the given
/// parameters, over `samples` points with a fixed RNG seed.
///
/// For `p != q` the CDF is singular, so quotients at small `h` split into a
/// heavy-at-zero bulk and rare steep excursions; `steep_fraction` is
/// expected to stay well away from 0 and `median_quotient` to stay below 1.
/// Descriptive, not a correctness gate.
pub fn salem_slope_diagnostic(
    p: f64,
    q: f64,
    samples: usize,
    seed: u64,
) -> Result<SalemSlopeDiagnostic> {
    if samples < 2 {
        return Err(Error::validation("need at least two sample points"));
    }
    let evaluator = CdfEvaluator::new(salem_family(p, q)?)?;
    let quotient = |x: f64, h: f64| -> Result<f64> {
        Ok((evaluator.cdf(x + h)? - evaluator.cdf(x - h)?) / (2.0 * h))
    };

    let h_steep = 1e-6;
    let grid: Vec<f64> = (0..samples)
        .map(|i| {
            let x = (i as f64 + 0.5) / samples as f64;
            x.clamp(h_steep, 1.0 - h_steep)
        })
        .collect();
    let steep = exec::try_map_f64(&grid, |&x| quotient(x, h_steep))?;
    let exceed = steep.iter().filter(|&&s| s > 1.0).count();

    let h_median = 1e-3;
    let mut state = seed;
    let random: Vec<f64> = (0..samples)
        .map(|_| h_median + rng::unit_f64(&mut state) * (1.0 - 2.0 * h_median))
        .collect();
    let mut quotients = exec::try_map_f64(&random, |&x| quotient(x, h_median))?;
    quotients.sort_by(|a, b| a.total_cmp(b));
    let mid = quotients.len() / 2;
    let median = if quotients.len() % 2 == 0 {
        0.5 * (quotients[mid - 1] + quotients[mid])
    } else {
        quotients[mid]
    };

    Ok(SalemSlopeDiagnostic {
        steep_fraction: exceed as f64 / samples as f64,
        median_quotient: median,
    })
}
