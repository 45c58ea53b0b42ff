//! Integration of 0-homogeneous functions over the observer fiber `𝒪ₓ`
//! against the fiber part `dΣₓ⁺` of the canonical volume form.
//!
//! A fiber chart maps `u ∈ ℝ³` to a direction `n(u)` in the timelike cone,
//! expressed in the observer frame `{e₀, e₁, e₂, e₃}` of the model's seed:
//!
//! * rapidity: `n = cosh χ e₀ + sinh χ m̂(θ, φ)`, `χ ∈ [0, χ_max]`
//! * velocity: `n = e₀ + s m̂(θ, φ)`, `s ∈ [0, tanh χ_max]`
//!
//! where `m̂ = sin θ cos φ e₁ + sin θ sin φ e₂ + cos θ e₃`. The point on the
//! shell is `ẋ = r n` with `L(x, ẋ) = 1`, and the density is
//! `w(u) = |det g(x, ẋ)| · |det[ẋ, ∂ẋ/∂u¹, ∂ẋ/∂u², ∂ẋ/∂u³]|`.
//! Chart coordinates are ordered `(x⁰, …, x³, u¹, u², u³)`.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogError, ChartPoint, FinslerModel};
use crate::causal::{is_pointwise_timelike, observer_frame, CausalError};
use crate::geometry::{GeometryBundle, GeometryError};
use crate::jets::TruncationOrder;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("node u = {u:?} maps outside the timelike cone")]
    NodeOutsideCone { u: [f64; 3] },
    #[error("integrand is not 0-homogeneous: ẋⁱ∂̇ᵢf = {euler:e} at ẋ = {v:?}")]
    NotHomogeneous { euler: f64, v: [f64; 4] },
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Causal(#[from] CausalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T, E = QuadratureError> = std::result::Result<T, E>;

impl From<CatalogError> for QuadratureError {
    fn from(e: CatalogError) -> Self {
        QuadratureError::Geometry(e.into())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionMap {
    #[default]
    Rapidity,
    Velocity,
}

/// Quadrature configuration as it appears in run configs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadConfig {
    pub chi_max: f64,
    /// Gauss orders along `(χ or s, θ, φ)`.
    pub orders: [usize; 3],
    pub chart: DirectionMap,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            chi_max: 3.0,
            orders: [16, 12, 16],
            chart: DirectionMap::Rapidity,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.chi_max > 0.0 && self.chi_max.is_finite()) || self.orders.contains(&0) {
            return Err(QuadratureError::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn with_orders(self, orders: [usize; 3]) -> Self {
        Self { orders, ..self }
    }

    /// Tensor-product rule over the chart box.
    pub fn rule(&self) -> FiberQuadrature {
        let radial_max = match self.chart {
            DirectionMap::Rapidity => self.chi_max,
            DirectionMap::Velocity => self.chi_max.tanh(),
        };
        let lo = [0.0, 0.0, 0.0];
        let hi = [radial_max, PI, 2.0 * PI];
        let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..3)
            .map(|a| {
                let (z, w) = gauss_legendre(self.orders[a]);
                let half = 0.5 * (hi[a] - lo[a]);
                let mid = 0.5 * (hi[a] + lo[a]);
                (z.iter().map(|t| mid + half * t).collect(), w.iter().map(|w| w * half).collect())
            })
            .collect();
        let mut nodes = Vec::with_capacity(self.orders.iter().product());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for (i, &a) in axes[0].0.iter().enumerate() {
            for (j, &b) in axes[1].0.iter().enumerate() {
                for (k, &c) in axes[2].0.iter().enumerate() {
                    nodes.push([a, b, c]);
                    weights.push(axes[0].1[i] * axes[1].1[j] * axes[2].1[k]);
                }
            }
        }
        FiberQuadrature {
            chart: self.chart,
            nodes,
            weights,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberQuadrature {
    pub chart: DirectionMap,
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Chart of `𝒪ₓ` at a fixed base point.
#[derive(Clone, Debug)]
pub struct FiberChart<'m> {
    pub model: &'m FinslerModel,
    pub x: [f64; 4],
    pub frame: [[f64; 4]; 4],
    pub map: DirectionMap,
    orientation: f64,
}

/// Point of the observer shell with its chart Jacobian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellPoint {
    pub xdot: [f64; 4],
    /// `columns[a] = ∂ẋ/∂uᵃ`
    pub columns: [[f64; 4]; 3],
}

impl<'m> FiberChart<'m> {
    pub fn new(model: &'m FinslerModel, x: [f64; 4], map: DirectionMap) -> Result<Self> {
        let frame = observer_frame(model, &x)?;
        let mut chart = Self {
            model,
            x,
            frame,
            map,
            orientation: 1.0,
        };
        let reference = match map {
            DirectionMap::Rapidity => [0.5, PI / 2.0, 0.5],
            DirectionMap::Velocity => [0.5f64.tanh(), PI / 2.0, 0.5],
        };
        chart.orientation = chart.raw_weight(&reference)?.signum();
        Ok(chart)
    }

    /// Direction `n(u)` and its derivatives `∂n/∂uᵃ`.
    pub fn direction(&self, u: &[f64; 3]) -> ([f64; 4], [[f64; 4]; 3]) {
        let (r, th, ph) = (u[0], u[1], u[2]);
        let (st, ct) = th.sin_cos();
        let (sp, cp) = ph.sin_cos();
        let m = [st * cp, st * sp, ct];
        let m_th = [ct * cp, ct * sp, -st];
        let m_ph = [-st * sp, st * cp, 0.0];
        let (a, da, b, db) = match self.map {
            DirectionMap::Rapidity => (r.cosh(), r.sinh(), r.sinh(), r.cosh()),
            DirectionMap::Velocity => (1.0, 0.0, r, 1.0),
        };
        let f = &self.frame;
        let spatial = |c: &[f64; 3], i: usize| (0..3).map(|k| c[k] * f[k + 1][i]).sum::<f64>();
        let n = std::array::from_fn(|i| a * f[0][i] + b * spatial(&m, i));
        let d_r = std::array::from_fn(|i| da * f[0][i] + db * spatial(&m, i));
        let d_th = std::array::from_fn(|i| b * spatial(&m_th, i));
        let d_ph = std::array::from_fn(|i| b * spatial(&m_ph, i));
        (n, [d_r, d_th, d_ph])
    }

    /// `ẋ(u)` on `L = 1` and `∂ẋ/∂u` through the implicit scaling `r(u)`.
    pub fn observer_parametrization(&self, u: &[f64; 3]) -> Result<ShellPoint> {
        let (n, dn) = self.direction(u);
        if !is_pointwise_timelike(self.model, &self.x, &n) {
            return Err(QuadratureError::NodeOutsideCone { u: *u });
        }
        let l = self
            .model
            .lagrangian_jet(&ChartPoint::new(self.x, n), TruncationOrder::new(0, 1))
            .map_err(GeometryError::from)?;
        let l0 = l.value();
        let grad = l.v_gradient().map_err(GeometryError::from)?;
        let mut r = 1.0 / l0.sqrt();
        for _ in 0..3 {
            let xdot = n.map(|c| r * c);
            let lr = self
                .model
                .lagrangian_value(&self.x, &xdot)
                .map_err(GeometryError::from)?;
            let step = (lr - 1.0) * r / (2.0 * lr);
            r -= step;
            if step.abs() <= f64::EPSILON * r {
                break;
            }
        }
        let xdot = n.map(|c| r * c);
        // r = L(n)^{-1/2}: ∂r/∂u = −½ L^{-3/2} ∂̇ᵢL(n) ∂nⁱ/∂u
        let columns = dn.map(|d| {
            let dl: f64 = (0..4).map(|i| grad[i] * d[i]).sum();
            let dr = -0.5 * l0.powf(-1.5) * dl;
            std::array::from_fn(|i| r * d[i] + dr * n[i])
        });
        Ok(ShellPoint { xdot, columns })
    }

    fn raw_weight(&self, u: &[f64; 3]) -> Result<f64> {
        let p = self.observer_parametrization(u)?;
        let b = GeometryBundle::new(self.model, &ChartPoint::new(self.x, p.xdot), TruncationOrder::new(0, 2))?;
        let m = Matrix4::from_fn(|i, a| if a == 0 { p.xdot[i] } else { p.columns[a - 1][i] });
        Ok(b.g_value().determinant().abs() * m.determinant())
    }

    /// Density `w(u)` of `dΣₓ⁺` in this chart, oriented positive.
    pub fn fiber_weight(&self, u: &[f64; 3]) -> Result<f64> {
        let w = self.orientation * self.raw_weight(u)?;
        if w < 0.0 {
            return Err(QuadratureError::NodeOutsideCone { u: *u });
        }
        Ok(w)
    }
}

/// Compensated sum in fixed order.
fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberIntegral {
    pub values: Vec<f64>,
    /// Per component, `|I(n) − I(n/2)|` floored at round-off level.
    pub error_estimates: Vec<f64>,
    pub nodes: usize,
}

/// Relative tolerance of the 0-homogeneity gate.
pub const HOMOGENEITY_GATE_TOL: f64 = 1e-6;

/// Rejects integrands that change along rays, using a centred difference of
/// `α ↦ f(x, αẋ)` at `α = 1` on a few shell points.
pub fn homogeneity_gate<F>(chart: &FiberChart, f: &F) -> Result<()>
where
    F: Fn(&[f64; 4], &[f64; 4]) -> Result<Vec<f64>> + Sync,
{
    let probes: [[f64; 3]; 4] = [[0.3, 1.0, 0.4], [0.8, 2.0, 2.5], [0.1, 0.5, 4.0], [1.2, 1.7, 5.5]];
    let h = 1e-4;
    for u in &probes {
        let u = match chart.map {
            DirectionMap::Rapidity => *u,
            DirectionMap::Velocity => [u[0].tanh(), u[1], u[2]],
        };
        let Ok(p) = chart.observer_parametrization(&u) else {
            continue;
        };
        let plus = f(&chart.x, &p.xdot.map(|c| c * (1.0 + h)))?;
        let minus = f(&chart.x, &p.xdot.map(|c| c * (1.0 - h)))?;
        let mid = f(&chart.x, &p.xdot)?;
        for c in 0..mid.len() {
            let euler = (plus[c] - minus[c]) / (2.0 * h);
            if euler.abs() > HOMOGENEITY_GATE_TOL * mid[c].abs().max(1.0) {
                return Err(QuadratureError::NotHomogeneous { euler, v: p.xdot });
            }
        }
    }
    Ok(())
}

fn integrate_rule<F>(chart: &FiberChart, rule: &FiberQuadrature, f: &F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&[f64; 4], &[f64; 4]) -> Result<Vec<f64>> + Sync,
{
    let terms: Vec<Vec<f64>> = rule
        .nodes
        .par_iter()
        .zip(&rule.weights)
        .map(|(u, &q)| {
            let w = chart.fiber_weight(u)?;
            let p = chart.observer_parametrization(u)?;
            Ok(f(&chart.x, &p.xdot)?.into_iter().map(|v| v * w * q).collect())
        })
        .collect::<Result<_>>()?;
    let dim = terms.first().map_or(0, Vec::len);
    let sums = (0..dim).map(|c| kahan_sum(terms.iter().map(|t| t[c]))).collect();
    let abs = (0..dim).map(|c| kahan_sum(terms.iter().map(|t| t[c].abs()))).collect();
    Ok((sums, abs))
}

/// `∫ f dΣₓ⁺` over the configured sub-cone for a vector-valued 0-homogeneous `f`.
pub fn integrate_fiber<F>(model: &FinslerModel, x: &[f64; 4], cfg: &QuadConfig, f: F) -> Result<FiberIntegral>
where
    F: Fn(&[f64; 4], &[f64; 4]) -> Result<Vec<f64>> + Sync,
{
    cfg.validate()?;
    let chart = FiberChart::new(model, *x, cfg.chart)?;
    homogeneity_gate(&chart, &f)?;
    let (values, abs) = integrate_rule(&chart, &cfg.rule(), &f)?;
    let coarse_cfg = cfg.with_orders(cfg.orders.map(|n| n.div_ceil(2)));
    let (coarse, _) = integrate_rule(&chart, &coarse_cfg.rule(), &f)?;
    let error_estimates = values
        .iter()
        .zip(&coarse)
        .zip(&abs)
        .map(|((v, c), a)| (v - c).abs().max(64.0 * f64::EPSILON * a))
        .collect();
    Ok(FiberIntegral {
        values,
        error_estimates,
        nodes: cfg.orders.iter().product(),
    })
}

/// Scalar form of [`integrate_fiber`].
pub fn integrate_observer_fiber<F>(model: &FinslerModel, x: &[f64; 4], cfg: &QuadConfig, f: F) -> Result<(f64, f64)>
where
    F: Fn(&[f64; 4], &[f64; 4]) -> Result<f64> + Sync,
{
    let r = integrate_fiber(model, x, cfg, |x, v| Ok(vec![f(x, v)?]))?;
    Ok((r.values[0], r.error_estimates[0]))
}

/// `π (sinh 2χ₀ − 2χ₀)`: volume of the Minkowski rapidity cap `χ ≤ χ₀`.
pub fn minkowski_cap_volume(chi0: f64) -> f64 {
    PI * ((2.0 * chi0).sinh() - 2.0 * chi0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_model, presets};

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..12 {
            let (z, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let approx: f64 = z.iter().zip(&w).map(|(z, w)| w * z.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn minkowski_weight_is_analytic() {
        let m = build_model(&presets::minkowski()).unwrap();
        let chart = FiberChart::new(&m, [0.0; 4], DirectionMap::Rapidity).unwrap();
        for u in [[0.3, 0.4, 1.0], [1.5, 2.0, 5.0]] {
            let w = chart.fiber_weight(&u).unwrap();
            let exact = u[0].sinh().powi(2) * u[1].sin();
            assert!((w - exact).abs() < 1e-13 * exact.max(1.0));
        }
    }

    #[test]
    fn randers_shell_point() {
        let m = build_model(&presets::randers(0.3)).unwrap();
        let chart = FiberChart::new(&m, [0.0; 4], DirectionMap::Rapidity).unwrap();
        let p = chart.observer_parametrization(&[0.0, 1.0, 1.0]).unwrap();
        assert!((p.xdot[0] - 1.0 / 1.3).abs() < 1e-15);
    }

    #[test]
    fn cap_integral() {
        let m = build_model(&presets::minkowski()).unwrap();
        let cfg = QuadConfig {
            chi_max: 1.0,
            ..QuadConfig::default()
        };
        let (v, err) = integrate_observer_fiber(&m, &[0.0; 4], &cfg, |_, _| Ok(1.0)).unwrap();
        assert!((v - minkowski_cap_volume(1.0)).abs() < 1e-6 * v, "{v}");
        assert!(err < 1e-6);
    }

    #[test]
    fn gate_rejects_non_homogeneous() {
        let m = build_model(&presets::minkowski()).unwrap();
        let r = integrate_observer_fiber(&m, &[0.0; 4], &QuadConfig::default(), |_, v| Ok(v[0]));
        assert!(matches!(r, Err(QuadratureError::NotHomogeneous { .. })));
    }
}
