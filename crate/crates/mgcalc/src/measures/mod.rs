//! Atomless probability measures on a compact interval, their distribution
//! functions, pseudoinverses, and quadrature through the distribution
//! coordinate.
//!
//! Three measure variants are supported:
//! * [`MeasureVariant::Density`]: absolutely continuous, given by a density
//!   and optionally a closed-form CDF;
//! * [`MeasureVariant::Salem`]: the singular Salem construction on `[0, 1]`
//!   with parameters `(p, q)`;
//! * [`MeasureVariant::SelfSimilar`]: a weighted iterated function system of
//!   affine contractions with pairwise disjoint images.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

mod cdf;
mod json;
mod quad;

pub use cdf::CdfEvaluator;
pub use quad::{integrate_mu, MuQuadrature, QuadratureGrid, QuadratureRule};

pub(crate) use quad::kahan_sum;

/// Shared evaluable real function. Cheap to clone.
#[derive(Clone)]
pub struct ScalarFn(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl ScalarFn {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFn(Arc::new(f))
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarFn")
    }
}

/// Closed interval `[a, b]` with `a < b`, both finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || !(a < b) {
            return Err(Error::validation(format!(
                "interval [{a}, {b}] must satisfy a < b with finite endpoints"
            )));
        }
        Ok(Interval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub(crate) fn bounds_string(&self) -> String {
        format!("[{}, {}]", self.a, self.b)
    }
}

/// Affine contraction `x -> r*x + c`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AffineMap {
    pub r: f64,
    pub c: f64,
}

impl AffineMap {
    pub fn new(r: f64, c: f64) -> Self {
        AffineMap { r, c }
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.r * x + self.c
    }

    pub fn invert(&self, y: f64) -> f64 {
        (y - self.c) / self.r
    }
}

/// Salem parameters: `p` is the mass of the left branch, `q` its length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SalemParams {
    pub p: f64,
    pub q: f64,
}

/// Density identities that have a fixed interchange representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedDensity {
    /// `1 / (pi * sqrt(1 - x^2))` on `[-1, 1]`.
    Arcsine,
}

/// Absolutely continuous measure given by a density, with an optional
/// closed-form CDF that is preferred over quadrature when present.
#[derive(Debug, Clone)]
pub struct DensityMeasure {
    density: ScalarFn,
    closed_form_cdf: Option<ScalarFn>,
    kind: Option<NamedDensity>,
    mass: f64,
}

impl DensityMeasure {
    pub fn density_at(&self, x: f64) -> f64 {
        self.density.eval(x)
    }

    pub fn closed_form_cdf(&self) -> Option<&ScalarFn> {
        self.closed_form_cdf.as_ref()
    }

    pub fn kind(&self) -> Option<NamedDensity> {
        self.kind
    }

    pub(crate) fn density_fn(&self) -> &ScalarFn {
        &self.density
    }

    pub(crate) fn mass(&self) -> f64 {
        self.mass
    }
}

/// Weighted iterated function system with ordered, pairwise disjoint images.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsMeasure {
    maps: Vec<AffineMap>,
    weights: Vec<f64>,
}

impl IfsMeasure {
    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Debug, Clone)]
pub enum MeasureVariant {
    Density(DensityMeasure),
    Salem(SalemParams),
    SelfSimilar(IfsMeasure),
}

impl MeasureVariant {
    pub fn name(&self) -> &'static str {
        match self {
            MeasureVariant::Density(_) => "density",
            MeasureVariant::Salem(_) => "salem",
            MeasureVariant::SelfSimilar(_) => "self-similar",
        }
    }
}

/// A validated atomless probability measure on an interval.
#[derive(Debug, Clone)]
pub struct MeasureSpec {
    interval: Interval,
    variant: MeasureVariant,
}

/// Relative slack for the endpoint equations `s_1(a) = a`, `s_N(b) = b`;
/// rational map parameters rarely satisfy them to the last bit.
const ENDPOINT_SLACK: f64 = 1e-15;

/// Acceptable defect of the total mass of a density.
const MASS_TOL: f64 = 1e-6;

impl MeasureSpec {
    /// Absolutely continuous measure with the given density. When a
    /// closed-form CDF is supplied it is used for evaluation; otherwise the
    /// density is integrated adaptively. The density must be nonnegative and
    /// integrate to 1 over the interval.
    pub fn density(
        interval: Interval,
        density: ScalarFn,
        closed_form_cdf: Option<ScalarFn>,
    ) -> Result<Self> {
        Self::density_impl(interval, density, closed_form_cdf, None)
    }

    pub(crate) fn density_impl(
        interval: Interval,
        density: ScalarFn,
        closed_form_cdf: Option<ScalarFn>,
        kind: Option<NamedDensity>,
    ) -> Result<Self> {
        let (a, b) = (interval.a(), interval.b());
        let samples = 129;
        for k in 0..=samples {
            let x = a + (b - a) * k as f64 / samples as f64;
            let v = density.eval(x);
            // Integrable endpoint singularities evaluate non-finite; they are
            // tolerated as long as the mass check below passes.
            if v.is_finite() && v < 0.0 {
                return Err(Error::validation(format!(
                    "density is negative at x = {x}: {v}"
                )));
            }
        }
        let mass = if let Some(cf) = &closed_form_cdf {
            let fa = cf.eval(a);
            let fb = cf.eval(b);
            if !fa.is_finite() || !fb.is_finite() || !(fb > fa) {
                return Err(Error::validation(format!(
                    "closed-form CDF must increase over the interval, got F(a) = {fa}, F(b) = {fb}"
                )));
            }
            for k in 1..samples {
                let x0 = a + (b - a) * (k - 1) as f64 / samples as f64;
                let x1 = a + (b - a) * k as f64 / samples as f64;
                if cf.eval(x1) < cf.eval(x0) {
                    return Err(Error::validation(format!(
                        "closed-form CDF decreases between {x0} and {x1}"
                    )));
                }
            }
            1.0
        } else {
            let total = cdf::integrate_density(&density, a, b, 1e-9)?;
            if (total - 1.0).abs() > MASS_TOL {
                return Err(Error::validation(format!(
                    "density integrates to {total}, expected 1 within {MASS_TOL:e}"
                )));
            }
            total
        };
        Ok(MeasureSpec {
            interval,
            variant: MeasureVariant::Density(DensityMeasure {
                density,
                closed_form_cdf,
                kind,
                mass,
            }),
        })
    }

    /// Salem measure on `[0, 1]`: the unique CDF with `F(q*y) = p*F(y)` and
    /// `F(q + (1-q)*y) = p + (1-p)*F(y)`.
    pub fn salem(p: f64, q: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q)] {
            if !v.is_finite() || !(v > 0.0 && v < 1.0) {
                return Err(Error::validation(format!(
                    "salem parameter {name} = {v} must lie strictly inside (0, 1)"
                )));
            }
        }
        Ok(MeasureSpec {
            interval: Interval::new(0.0, 1.0)?,
            variant: MeasureVariant::Salem(SalemParams { p, q }),
        })
    }

    /// Self-similar measure for an ordered system of affine contractions
    /// with strictly disjoint images spanning the interval endpoints.
    pub fn self_similar(
        interval: Interval,
        maps: Vec<AffineMap>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let (a, b) = (interval.a(), interval.b());
        if maps.is_empty() {
            return Err(Error::validation("at least one contraction is required"));
        }
        if weights.len() != maps.len() {
            return Err(Error::validation(format!(
                "{} maps but {} weights",
                maps.len(),
                weights.len()
            )));
        }
        for (i, m) in maps.iter().enumerate() {
            if !m.r.is_finite() || !m.c.is_finite() || !(m.r > 0.0 && m.r < 1.0) {
                return Err(Error::validation(format!(
                    "map {i} must have ratio in (0, 1) and finite offset, got r = {}, c = {}",
                    m.r, m.c
                )));
            }
        }
        let mut sum = 0.0;
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || !(*w > 0.0 && *w < 1.0) {
                return Err(Error::validation(format!(
                    "weight {i} = {w} must lie strictly inside (0, 1)"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!(
                "weights sum to {sum}, expected 1 within 1e-12"
            )));
        }
        for i in 1..maps.len() {
            let right = maps[i - 1].apply(b);
            let left = maps[i].apply(a);
            if !(right < left) {
                return Err(Error::validation(format!(
                    "images of maps {} and {} must be ordered and disjoint: \
                     [{}, {right}] vs [{left}, {}]",
                    i - 1,
                    i,
                    maps[i - 1].apply(a),
                    maps[i].apply(b)
                )));
            }
        }
        let scale = 1.0_f64.max(a.abs()).max(b.abs());
        let first = maps[0].apply(a);
        let last = maps[maps.len() - 1].apply(b);
        if (first - a).abs() > ENDPOINT_SLACK * scale || (last - b).abs() > ENDPOINT_SLACK * scale {
            return Err(Error::validation(format!(
                "first map must fix a and last map must fix b: s_1(a) = {first}, s_N(b) = {last}"
            )));
        }
        Ok(MeasureSpec {
            interval,
            variant: MeasureVariant::SelfSimilar(IfsMeasure { maps, weights }),
        })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn variant(&self) -> &MeasureVariant {
        &self.variant
    }
}

/// The arcsine measure on `[-1, 1]`: density `1 / (pi * sqrt(1 - x^2))`,
/// CDF `arccos(-x) / pi`.
pub(crate) fn arcsine_measure() -> MeasureSpec {
    let density = ScalarFn::new(|x: f64| 1.0 / (std::f64::consts::PI * (1.0 - x * x).sqrt()));
    let cdf = ScalarFn::new(|x: f64| (-x).acos() / std::f64::consts::PI);
    MeasureSpec::density_impl(
        Interval::new(-1.0, 1.0).expect("interval is valid"),
        density,
        Some(cdf),
        Some(NamedDensity::Arcsine),
    )
    .expect("arcsine measure is valid")
}

/// Open gaps of the depth-`depth` cell approximation of a self-similar
/// measure's support, sorted and pairwise disjoint. Gaps of shallower depths
/// are included because cells nest.
pub fn support_gaps(spec: &MeasureSpec, depth: u32) -> Result<Vec<(f64, f64)>> {
    let ifs = match spec.variant() {
        MeasureVariant::SelfSimilar(ifs) => ifs,
        other => {
            return Err(Error::UnsupportedVariant {
                required: "self-similar",
                got: other.name(),
            })
        }
    };
    if depth == 0 {
        return Err(Error::validation("gap depth must be positive"));
    }
    let n = ifs.maps().len() as u64;
    let cell_count = n.checked_pow(depth);
    if cell_count.is_none() || cell_count.unwrap() > 1 << 22 {
        return Err(Error::validation(format!(
            "depth {depth} produces too many cells for {n} maps"
        )));
    }
    let iv = spec.interval();
    let mut cells = vec![(iv.a(), iv.b())];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(cells.len() * ifs.maps().len());
        // Lexicographic order of map addresses is spatial order because the
        // images are ordered and the ratios are positive.
        for m in ifs.maps() {
            for &(lo, hi) in &cells {
                next.push((m.apply(lo), m.apply(hi)));
            }
        }
        cells = next;
    }
    let mut gaps = Vec::new();
    for w in cells.windows(2) {
        let (_, right) = w[0];
        let (left, _) = w[1];
        if left > right {
            gaps.push((right, left));
        }
    }
    Ok(gaps)
}
