//! Composite Gauss–Legendre integration on graded meshes, and grid functions
//! with their cumulative integrals.

use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("non-finite integrand value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("invalid grid function: {0}")]
    GridFunction(String),
    #[error("invalid rule: {0}")]
    Rule(String),
}

/// How panel breakpoints are distributed over an interval.
///
/// With reference coordinate u ∈ [0,1] the breakpoints are
/// `Uniform`: u, `TowardEnd(g)`: 1-(1-u)^g, `TowardBoth(g)`: symmetric
/// u^g-type clustering at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Uniform,
    TowardEnd(f64),
    TowardBoth(f64),
}

impl Grading {
    fn validate(self) -> Result<Self, QuadratureError> {
        match self {
            Grading::TowardEnd(g) | Grading::TowardBoth(g) if !(g.is_finite() && g >= 1.0) => {
                Err(QuadratureError::Partition(format!("grading exponent must be >= 1, got {g}")))
            }
            _ => Ok(self),
        }
    }

    pub fn exponent(self) -> f64 {
        match self {
            Grading::Uniform => 1.0,
            Grading::TowardEnd(g) | Grading::TowardBoth(g) => g,
        }
    }

    fn map(self, u: f64) -> f64 {
        match self {
            Grading::Uniform => u,
            Grading::TowardEnd(g) => 1.0 - (1.0 - u).powf(g),
            Grading::TowardBoth(g) => {
                if u <= 0.5 {
                    0.5 * (2.0 * u).powf(g)
                } else {
                    1.0 - 0.5 * (2.0 * (1.0 - u)).powf(g)
                }
            }
        }
    }

    /// Breakpoints on [0,1] for `panels` panels.
    pub fn breakpoints(self, panels: usize) -> Vec<f64> {
        let mut x: Vec<f64> = (0..=panels).map(|i| self.map(i as f64 / panels as f64)).collect();
        x[0] = 0.0;
        x[panels] = 1.0;
        x
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Result<Self, QuadratureError> {
        if !(1..=64).contains(&n) {
            return Err(QuadratureError::Rule(format!("points per panel must be in 1..=64, got {n}")));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A composite rule on the reference interval [0, 1], mapped affinely onto
/// any [lo, hi].
#[derive(Debug, Clone)]
pub struct CompositeRule {
    x: Vec<f64>,
    w: Vec<f64>,
    panels: usize,
    points: usize,
    grading: Grading,
}

impl CompositeRule {
    pub fn new(panels: usize, points: usize, grading: Grading) -> Result<Self, QuadratureError> {
        if panels == 0 {
            return Err(QuadratureError::Rule("panel count must be positive".into()));
        }
        let grading = grading.validate()?;
        let gl = GaussLegendre::new(points)?;
        let breaks = grading.breakpoints(panels);
        let mut x = Vec::with_capacity(panels * points);
        let mut w = Vec::with_capacity(panels * points);
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (node, weight) in gl.nodes().iter().zip(gl.weights()) {
                x.push(mid + half * node);
                w.push(half * weight);
            }
        }
        Ok(Self { x, w, panels, points, grading })
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    /// Ascending (node, weight) pairs on the reference interval [0, 1].
    pub fn reference_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.w.iter().copied())
    }

    /// Plain weighted sum, no finiteness checks.
    #[inline]
    pub fn apply<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        let len = hi - lo;
        if len == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (x, w) in self.x.iter().zip(&self.w) {
            acc += w * f(lo + len * x);
        }
        acc * len
    }

    /// Weighted sum with a fallible integrand.
    #[inline]
    pub fn try_apply<E, F: FnMut(f64) -> Result<f64, E>>(&self, lo: f64, hi: f64, mut f: F) -> Result<f64, E> {
        let len = hi - lo;
        if len == 0.0 {
            return Ok(0.0);
        }
        let mut acc = 0.0;
        for (x, w) in self.x.iter().zip(&self.w) {
            acc += w * f(lo + len * x)?;
        }
        Ok(acc * len)
    }

    /// Weighted sum that rejects non-finite samples.
    pub fn checked<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> Result<f64, QuadratureError> {
        self.try_apply(lo, hi, |x| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(QuadratureError::NonFinite { x, value: v })
            }
        })
    }
}

/// A quadrature value with its refinement error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// |I(panels) - I(panels/2)|
    pub error: f64,
}

/// Default grading for [`integrate`]: exponent 2 toward the upper limit.
pub const DEFAULT_INTEGRATE_GRADING: Grading = Grading::TowardEnd(2.0);

/// Composite Gauss–Legendre integral of `f` over [lo, hi] with panels graded
/// toward `hi`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    panels: usize,
    points_per_panel: usize,
) -> Result<Estimate, QuadratureError> {
    integrate_graded(f, lo, hi, panels, points_per_panel, DEFAULT_INTEGRATE_GRADING)
}

pub fn integrate_graded<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    panels: usize,
    points_per_panel: usize,
    grading: Grading,
) -> Result<Estimate, QuadratureError> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(QuadratureError::Rule(format!("invalid limits [{lo}, {hi}]")));
    }
    let fine = CompositeRule::new(panels, points_per_panel, grading)?.checked(lo, hi, &f)?;
    let error = if panels >= 2 {
        let coarse = CompositeRule::new(panels / 2, points_per_panel, grading)?.checked(lo, hi, &f)?;
        (fine - coarse).abs()
    } else {
        f64::INFINITY
    };
    Ok(Estimate { value: fine, error })
}

/// Strictly increasing nodes from 0 to 1 with at least four panels.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    nodes: Vec<f64>,
    grading: Option<Grading>,
}

pub const MIN_PANELS: usize = 4;

impl Partition {
    pub fn new(panels: usize, grading: Grading) -> Result<Self, QuadratureError> {
        let grading = grading.validate()?;
        if panels < MIN_PANELS {
            return Err(QuadratureError::Partition(format!("need at least {MIN_PANELS} panels, got {panels}")));
        }
        let p = Self::from_nodes(grading.breakpoints(panels))?;
        Ok(Self { grading: Some(grading), ..p })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self, QuadratureError> {
        if nodes.len() < MIN_PANELS + 1 {
            return Err(QuadratureError::Partition(format!(
                "need at least {} nodes, got {}",
                MIN_PANELS + 1,
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(QuadratureError::Partition("nodes must start at 0 and end at 1".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(QuadratureError::Partition(format!(
                "nodes not strictly increasing at index {}: {} then {}",
                i + 1,
                nodes[i],
                nodes[i + 1]
            )));
        }
        Ok(Self { nodes, grading: None })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panels(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn grading(&self) -> Option<Grading> {
        self.grading
    }

    /// The same grading with twice the panels; `None` for hand-built partitions.
    pub fn refined(&self) -> Option<Self> {
        self.grading.and_then(|g| Self::new(2 * self.panels(), g).ok())
    }

    /// Index i of the panel [x_i, x_{i+1}] containing x (clamped to [0,1]).
    #[inline]
    pub fn locate(&self, x: f64) -> usize {
        let n = self.panels();
        let i = self.nodes.partition_point(|&node| node <= x);
        i.saturating_sub(1).min(n - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    /// C¹ cubic Hermite; slopes from the local quartic, limited so the
    /// interpolant of nonnegative data stays nonnegative.
    Cubic,
}

/// Values at the nodes of a partition plus an interpolation rule.
#[derive(Debug, Clone)]
pub struct GridFunction {
    partition: Arc<Partition>,
    values: Vec<f64>,
    interpolation: Interpolation,
    // per-panel (left, right) slopes for the cubic rule
    slopes: Vec<(f64, f64)>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.partition == other.partition && self.values == other.values && self.interpolation == other.interpolation
    }
}

impl GridFunction {
    pub fn new(
        partition: Arc<Partition>,
        values: Vec<f64>,
        interpolation: Interpolation,
    ) -> Result<Self, QuadratureError> {
        if values.len() != partition.len() {
            return Err(QuadratureError::GridFunction(format!(
                "{} values for {} nodes",
                values.len(),
                partition.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(QuadratureError::GridFunction(format!(
                "non-finite value {} at node {} (t = {})",
                values[i],
                i,
                partition.nodes()[i]
            )));
        }
        let slopes = match interpolation {
            Interpolation::Linear => Vec::new(),
            Interpolation::Cubic => hermite_slopes(partition.nodes(), &values),
        };
        Ok(Self { partition, values, interpolation, slopes })
    }

    /// Samples `f` at every node.
    pub fn from_fn<F: FnMut(f64) -> f64>(
        partition: Arc<Partition>,
        interpolation: Interpolation,
        mut f: F,
    ) -> Result<Self, QuadratureError> {
        let values = partition.nodes().iter().map(|&t| f(t)).collect();
        Self::new(partition, values, interpolation)
    }

    pub fn constant(partition: Arc<Partition>, interpolation: Interpolation, c: f64) -> Result<Self, QuadratureError> {
        let n = partition.len();
        Self::new(partition, vec![c; n], interpolation)
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    pub fn nodes(&self) -> &[f64] {
        self.partition.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Same nodes and rule, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self, QuadratureError> {
        Self::new(self.partition.clone(), values, self.interpolation)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// sup-norm distance at the nodes; both functions must share node count.
    pub fn distance(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Interpolated value at x ∈ [0,1].
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.partition.locate(x);
        self.eval_in(i, x)
    }

    #[inline]
    fn eval_in(&self, i: usize, x: f64) -> f64 {
        let nodes = self.partition.nodes();
        let (x0, x1) = (nodes[i], nodes[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let h = x1 - x0;
        let u = (x - x0) / h;
        match self.interpolation {
            Interpolation::Linear => y0 + (y1 - y0) * u,
            Interpolation::Cubic => {
                let (d0, d1) = self.slopes[i];
                let u2 = u * u;
                let u3 = u2 * u;
                let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
                let h10 = u3 - 2.0 * u2 + u;
                let h01 = -2.0 * u3 + 3.0 * u2;
                let h11 = u3 - u2;
                h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
            }
        }
    }

    /// Exact integral of the interpolant over [x_i, x] within panel i.
    #[inline]
    fn partial_integral(&self, i: usize, x: f64) -> f64 {
        let x0 = self.partition.nodes()[i];
        let len = x - x0;
        if len <= 0.0 {
            return 0.0;
        }
        // two-point Gauss is exact for cubics
        const G: f64 = 0.577_350_269_189_625_8;
        let mid = x0 + 0.5 * len;
        let half = 0.5 * len;
        half * (self.eval_in(i, mid - half * G) + self.eval_in(i, mid + half * G))
    }

    /// Exact integral of the interpolant over panel i.
    #[inline]
    fn panel_integral(&self, i: usize) -> f64 {
        let nodes = self.partition.nodes();
        let h = nodes[i + 1] - nodes[i];
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        match self.interpolation {
            Interpolation::Linear => 0.5 * h * (y0 + y1),
            Interpolation::Cubic => {
                let (d0, d1) = self.slopes[i];
                0.5 * h * (y0 + y1) + h * h * (d0 - d1) / 12.0
            }
        }
    }
}

/// Slopes for C¹ Hermite interpolation: derivative at each node of the
/// quartic through the five nearest nodes (shifted inward at the ends). Per
/// panel, slopes are limited (d₀ ≥ -3y₀/h, d₁ ≤ 3y₁/h) whenever both end values
/// are nonnegative, which keeps the cubic nonnegative there.
fn hermite_slopes(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let m = x.len();
    let width = m.min(5);
    let d: Vec<f64> = (0..m)
        .map(|i| {
            let lo = i.saturating_sub(width / 2).min(m - width);
            lagrange_slope(&x[lo..lo + width], &y[lo..lo + width], i - lo)
        })
        .collect();

    (0..m - 1)
        .map(|i| {
            let h = x[i + 1] - x[i];
            let (mut d0, mut d1) = (d[i], d[i + 1]);
            if y[i] >= 0.0 && y[i + 1] >= 0.0 {
                d0 = d0.max(-3.0 * y[i] / h);
                d1 = d1.min(3.0 * y[i + 1] / h);
            }
            (d0, d1)
        })
        .collect()
}

/// Derivative at xs[i] of the polynomial interpolating (xs, ys).
fn lagrange_slope(xs: &[f64], ys: &[f64], i: usize) -> f64 {
    let xi = xs[i];
    let mut total = 0.0;
    for j in 0..xs.len() {
        let w = if j == i {
            (0..xs.len()).filter(|&k| k != i).map(|k| 1.0 / (xi - xs[k])).sum()
        } else {
            let prod: f64 =
                (0..xs.len()).filter(|&k| k != i && k != j).map(|k| (xi - xs[k]) / (xs[j] - xs[k])).product();
            prod / (xs[j] - xi)
        };
        total += w * ys[j];
    }
    total
}

/// F(x_i) = ∫₀^{x_i} g, integrating the interpolant of g exactly panel by panel.
pub fn cumulative(g: &GridFunction) -> GridFunction {
    let n = g.partition.panels();
    let mut values = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    values.push(0.0);
    for i in 0..n {
        acc += g.panel_integral(i);
        values.push(acc);
    }
    GridFunction::new(g.partition.clone(), values, g.interpolation).expect("finite partial sums of finite values")
}

/// Running integral of a grid function's interpolant, evaluable at any point.
///
/// Carries both the integrand and its node partial sums; `eval(x)` adds the
/// exact partial-panel integral, so it agrees with [`cumulative`] at nodes.
#[derive(Debug, Clone)]
pub struct Antiderivative {
    integrand: GridFunction,
    partial: Vec<f64>,
}

impl Antiderivative {
    pub fn new(integrand: GridFunction) -> Self {
        let partial = cumulative(&integrand).values;
        Self { integrand, partial }
    }

    pub fn integrand(&self) -> &GridFunction {
        &self.integrand
    }

    pub fn node_values(&self) -> &[f64] {
        &self.partial
    }

    pub fn total(&self) -> f64 {
        *self.partial.last().unwrap()
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let i = self.integrand.partition.locate(x);
        self.partial[i] + self.integrand.partial_integral(i, x)
    }
}
