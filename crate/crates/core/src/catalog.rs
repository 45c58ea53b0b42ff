//! Library of Finsler Lagrangians.
//!
//! Each [`FinslerModel`] evaluates `L(x, ẋ)` twice over: as a [`Jet`] for the
//! geometry pipeline, and as a plain `f64` (see [`FinslerModel::lagrangian_value`])
//! for cheap evaluation and for the finite-difference oracle. In every case
//! `L = ε F²` with `ε` the sign of the quantity under the root.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Expr;
use crate::jets::{seed_chart_jets, Jet, JetError, TruncationOrder};

/// Relative threshold for rejecting null or non-smooth directions.
pub const EPS_DIV: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point outside the model domain: {0}")]
    OutsideDomain(String),
    #[error(transparent)]
    Jet(#[from] JetError),
}

pub type Result<T, E = CatalogError> = std::result::Result<T, E>;

/// A point of the slit tangent bundle in one chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub x: [f64; 4],
    pub v: [f64; 4],
}

impl ChartPoint {
    pub fn new(x: [f64; 4], v: [f64; 4]) -> Self {
        Self { x, v }
    }

    pub fn with_v(&self, v: [f64; 4]) -> Self {
        Self { x: self.x, v }
    }

    /// Same position, velocity scaled by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            x: self.x,
            v: self.v.map(|c| c * alpha),
        }
    }

    pub fn seeds(&self, order: TruncationOrder) -> ([Jet; 4], [Jet; 4]) {
        let s = seed_chart_jets(&self.x, &self.v, order);
        let [x0, x1, x2, x3, v0, v1, v2, v3] = s;
        ([x0, x1, x2, x3], [v0, v1, v2, v3])
    }
}

/// Axis-aligned box in chart coordinates used for random sampling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartBox {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl ChartBox {
    pub fn sample(&self, rng: &mut impl Rng) -> [f64; 4] {
        std::array::from_fn(|i| {
            if self.hi[i] > self.lo[i] {
                rng.gen_range(self.lo[i]..self.hi[i])
            } else {
                self.lo[i]
            }
        })
    }
}

/// Lorentzian background metric `a_ij(x)`; all supported kinds are diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BaseMetric {
    Minkowski,
    /// Schwarzschild coordinates `(t, r, θ, φ)`, exterior region.
    Schwarzschild { mass: f64 },
    UserDiagonal { diag: [Expr; 4] },
}

impl BaseMetric {
    pub fn validate(&self) -> Result<()> {
        match self {
            BaseMetric::Minkowski => Ok(()),
            BaseMetric::Schwarzschild { mass } => {
                if *mass > 0.0 && mass.is_finite() {
                    Ok(())
                } else {
                    Err(CatalogError::InvalidParameter(format!(
                        "Schwarzschild mass must be positive, got {mass}"
                    )))
                }
            }
            BaseMetric::UserDiagonal { diag } => diag
                .iter()
                .try_for_each(Expr::validate)
                .map_err(CatalogError::InvalidParameter),
        }
    }

    pub fn check_domain(&self, x: &[f64; 4]) -> Result<()> {
        if let BaseMetric::Schwarzschild { mass } = self {
            if !(x[1] > 2.0 * mass) {
                return Err(CatalogError::OutsideDomain(format!(
                    "r = {} is not outside the horizon r = {}",
                    x[1],
                    2.0 * mass
                )));
            }
            if !(x[2] > 0.1 && x[2] < PI - 0.1) {
                return Err(CatalogError::OutsideDomain(format!(
                    "θ = {} too close to the coordinate axis",
                    x[2]
                )));
            }
        }
        Ok(())
    }

    /// Default sampling box for this chart.
    pub fn default_box(&self) -> ChartBox {
        match self {
            BaseMetric::Schwarzschild { mass } => ChartBox {
                lo: [0.0, 3.0 * mass, 0.5, 0.0],
                hi: [1.0, 12.0 * mass, PI - 0.5, 2.0 * PI],
            },
            _ => ChartBox {
                lo: [-1.0; 4],
                hi: [1.0; 4],
            },
        }
    }

    pub fn diagonal(&self, x: &[f64; 4]) -> Result<[f64; 4]> {
        self.check_domain(x)?;
        Ok(match self {
            BaseMetric::Minkowski => [1.0, -1.0, -1.0, -1.0],
            BaseMetric::Schwarzschild { mass } => {
                let f = 1.0 - 2.0 * mass / x[1];
                let s = x[2].sin();
                [f, -1.0 / f, -x[1] * x[1], -x[1] * x[1] * s * s]
            }
            BaseMetric::UserDiagonal { diag } => {
                let mut out = [0.0; 4];
                for (o, e) in out.iter_mut().zip(diag) {
                    *o = e.eval(x)?;
                }
                out
            }
        })
    }

    /// Diagonal components as position jets (ẋ-order of `x` is irrelevant).
    pub fn diagonal_jets(&self, x: &[Jet; 4]) -> Result<[Jet; 4]> {
        let xv = x.clone().map(|j| j.value());
        self.check_domain(&xv)?;
        let order = x[0].order();
        Ok(match self {
            BaseMetric::Minkowski => [1.0, -1.0, -1.0, -1.0].map(|c| Jet::constant(c, order)),
            BaseMetric::Schwarzschild { mass } => {
                let one = Jet::constant(1.0, order);
                let inv_r = one.checked_div(&x[1], 1e-12)?;
                let f = (&one - &inv_r.scale(2.0 * mass)).truncate(order);
                let r2 = x[1].square();
                let s2 = x[2].sin().square();
                [
                    f.clone(),
                    -one.checked_div(&f, 1e-12)?,
                    -r2.clone(),
                    -r2.mul(&s2),
                ]
            }
            BaseMetric::UserDiagonal { diag } => {
                let mut out: [Jet; 4] = std::array::from_fn(|_| Jet::constant(0.0, order));
                for (o, e) in out.iter_mut().zip(diag) {
                    *o = e.eval_jet(x, order)?;
                }
                out
            }
        })
    }

    pub fn depends_on(&self, k: usize) -> bool {
        match self {
            BaseMetric::Minkowski => false,
            BaseMetric::Schwarzschild { .. } => k == 1 || k == 2,
            BaseMetric::UserDiagonal { diag } => diag.iter().any(|e| e.depends_on(k)),
        }
    }

    pub fn is_x_independent(&self) -> bool {
        match self {
            BaseMetric::Minkowski => true,
            BaseMetric::Schwarzschild { .. } => false,
            BaseMetric::UserDiagonal { diag } => diag.iter().all(|e| e.as_const().is_some()),
        }
    }
}

/// `b = b_i(x) dx^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OneForm {
    pub components: [Expr; 4],
}

impl OneForm {
    pub fn constant(b: [f64; 4]) -> Self {
        Self {
            components: b.map(Expr::c),
        }
    }

    pub fn eval(&self, x: &[f64; 4]) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (o, e) in out.iter_mut().zip(&self.components) {
            *o = e.eval(x)?;
        }
        Ok(out)
    }

    fn contract_jet(&self, x: &[Jet; 4], v: &[Jet; 4]) -> Result<Jet> {
        let order = x[0].order().min(v[0].order());
        let mut acc: Option<Jet> = None;
        for (e, vi) in self.components.iter().zip(v) {
            if e.as_const() == Some(0.0) {
                continue;
            }
            let term = e.eval_jet(x, order)?.mul(vi);
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        Ok(acc.unwrap_or_else(|| Jet::constant(0.0, order)))
    }

    fn validate(&self) -> Result<()> {
        self.components
            .iter()
            .try_for_each(Expr::validate)
            .map_err(CatalogError::InvalidParameter)
    }
}

/// One monomial `c(x) Π (ẋ^k)^{p_k}` of the m-th root polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialTerm {
    pub powers: [u32; 4],
    pub coeff: Expr,
}

/// Positive-definite Randers-type norm `F̂ = √(h_ii(x) (ẋ^i)²) + c_i(x) ẋ^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositiveRanders {
    pub diag: [Expr; 4],
    #[serde(default = "zero_form")]
    pub one_form: OneForm,
}

fn zero_form() -> OneForm {
    OneForm::constant([0.0; 4])
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    Lorentzian {
        metric: BaseMetric,
    },
    Randers {
        metric: BaseMetric,
        one_form: OneForm,
    },
    Bogoslovsky {
        metric: BaseMetric,
        one_form: OneForm,
        q: f64,
    },
    MthRoot {
        m: u32,
        terms: Vec<MonomialTerm>,
    },
    SignatureReversed {
        omega: OneForm,
        fhat: PositiveRanders,
    },
}

/// Kind tag of the descriptor format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindTag {
    Lorentzian,
    Randers,
    Bogoslovsky,
    MthRoot,
    SignatureReversed,
}

/// On-disk model description (JSON or TOML).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    pub kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_metric: Option<BaseMetric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one_form: Option<OneForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<MonomialTerm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fhat: Option<PositiveRanders>,
    /// Fiducial future timelike direction; defaults to `(1, 0, 0, 0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_box: Option<ChartBox>,
}

impl ModelDescriptor {
    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn to_toml(&self) -> std::result::Result<String, String> {
        toml::to_string(self).map_err(|e| e.to_string())
    }

    /// Reads JSON or TOML, chosen by file extension (`.toml` → TOML).
    pub fn load(path: &std::path::Path) -> std::result::Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        if path.extension().and_then(|e| e.to_str()) == Some("toml") {
            Self::from_toml(&text)
        } else {
            Self::from_json(&text)
        }
    }
}

/// A validated Finsler Lagrangian.
#[derive(Clone, Debug, PartialEq)]
pub struct FinslerModel {
    pub name: String,
    pub kind: ModelKind,
    pub seed: [f64; 4],
    pub chart_box: ChartBox,
    descriptor: ModelDescriptor,
}

fn require<T: Clone>(v: &Option<T>, what: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| CatalogError::InvalidParameter(format!("missing field `{what}`")))
}

/// Validates a descriptor and builds the model.
pub fn build_model(desc: &ModelDescriptor) -> Result<FinslerModel> {
    let kind = match desc.kind {
        KindTag::Lorentzian => ModelKind::Lorentzian {
            metric: require(&desc.base_metric, "base_metric")?,
        },
        KindTag::Randers => ModelKind::Randers {
            metric: require(&desc.base_metric, "base_metric")?,
            one_form: require(&desc.one_form, "one_form")?,
        },
        KindTag::Bogoslovsky => {
            let q = require(&desc.q, "q")?;
            if !q.is_finite() || q == 1.0 {
                return Err(CatalogError::InvalidParameter(format!(
                    "Bogoslovsky exponent q = {q} is degenerate"
                )));
            }
            ModelKind::Bogoslovsky {
                metric: require(&desc.base_metric, "base_metric")?,
                one_form: require(&desc.one_form, "one_form")?,
                q,
            }
        }
        KindTag::MthRoot => {
            let m = require(&desc.m, "m")?;
            if m < 2 {
                return Err(CatalogError::InvalidParameter(format!("m = {m} must be ≥ 2")));
            }
            let terms = require(&desc.coefficients, "coefficients")?;
            if terms.is_empty() {
                return Err(CatalogError::InvalidParameter("no m-th root coefficients".into()));
            }
            for t in &terms {
                if t.powers.iter().sum::<u32>() != m {
                    return Err(CatalogError::InvalidParameter(format!(
                        "monomial {:?} does not have degree {m}",
                        t.powers
                    )));
                }
                t.coeff.validate().map_err(CatalogError::InvalidParameter)?;
            }
            ModelKind::MthRoot { m, terms }
        }
        KindTag::SignatureReversed => ModelKind::SignatureReversed {
            omega: require(&desc.one_form, "one_form")?,
            fhat: require(&desc.fhat, "fhat")?,
        },
    };
    let default_box = match &kind {
        ModelKind::Lorentzian { metric }
        | ModelKind::Randers { metric, .. }
        | ModelKind::Bogoslovsky { metric, .. } => metric.default_box(),
        _ => ChartBox {
            lo: [-1.0; 4],
            hi: [1.0; 4],
        },
    };
    let model = FinslerModel {
        name: desc
            .name
            .clone()
            .unwrap_or_else(|| format!("{:?}", desc.kind).to_lowercase()),
        kind,
        seed: desc.seed.unwrap_or([1.0, 0.0, 0.0, 0.0]),
        chart_box: desc.chart_box.unwrap_or(default_box),
        descriptor: desc.clone(),
    };
    model.validate()?;
    Ok(model)
}

/// Number of chart samples used by the parameter checks in [`build_model`].
pub const VALIDATION_SAMPLES: usize = 100;

impl FinslerModel {
    pub fn descriptor(&self) -> &ModelDescriptor {
        &self.descriptor
    }

    pub fn base_metric(&self) -> Option<&BaseMetric> {
        match &self.kind {
            ModelKind::Lorentzian { metric }
            | ModelKind::Randers { metric, .. }
            | ModelKind::Bogoslovsky { metric, .. } => Some(metric),
            _ => None,
        }
    }

    /// Coordinates on which `L` does not depend; `½∂̇ₖL` is conserved along
    /// geodesics for each of them.
    pub fn cyclic_coordinates(&self) -> Vec<usize> {
        let form = |f: &OneForm, k| f.components.iter().any(|e| e.depends_on(k));
        (0..4)
            .filter(|&k| match &self.kind {
                ModelKind::Lorentzian { metric } => !metric.depends_on(k),
                ModelKind::Randers { metric, one_form }
                | ModelKind::Bogoslovsky { metric, one_form, .. } => {
                    !metric.depends_on(k) && !form(one_form, k)
                }
                ModelKind::MthRoot { terms, .. } => !terms.iter().any(|t| t.coeff.depends_on(k)),
                ModelKind::SignatureReversed { omega, fhat } => {
                    !form(omega, k)
                        && !form(&fhat.one_form, k)
                        && !fhat.diag.iter().any(|e| e.depends_on(k))
                }
            })
            .collect()
    }

    /// Canonical momenta `pₖ = ½∂̇ₖL`.
    pub fn momenta(&self, x: &[f64; 4], v: &[f64; 4]) -> Result<[f64; 4]> {
        let l = self.lagrangian_jet(&ChartPoint::new(*x, *v), TruncationOrder::new(0, 1))?;
        Ok(l.v_gradient()?.map(|d| 0.5 * d))
    }

    pub fn is_lorentzian(&self) -> bool {
        matches!(self.kind, ModelKind::Lorentzian { .. })
    }

    fn validate(&self) -> Result<()> {
        if let Some(metric) = self.base_metric() {
            metric.validate()?;
        }
        match &self.kind {
            ModelKind::Randers { one_form, .. } | ModelKind::Bogoslovsky { one_form, .. } => {
                one_form.validate()?
            }
            ModelKind::SignatureReversed { omega, fhat } => {
                omega.validate()?;
                fhat.one_form.validate()?;
                fhat.diag
                    .iter()
                    .try_for_each(Expr::validate)
                    .map_err(CatalogError::InvalidParameter)?;
            }
            _ => {}
        }
        if self.seed.iter().all(|&c| c == 0.0) {
            return Err(CatalogError::InvalidParameter("seed direction is zero".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..VALIDATION_SAMPLES {
            let x = self.chart_box.sample(&mut rng);
            self.check_parameters_at(&x)?;
        }
        Ok(())
    }

    fn check_parameters_at(&self, x: &[f64; 4]) -> Result<()> {
        match &self.kind {
            ModelKind::Randers { metric, one_form } => {
                let a = metric.diagonal(x)?;
                let b = one_form.eval(x)?;
                let norm: f64 = (0..4).map(|i| b[i] * b[i] / a[i]).sum();
                if !(norm > 0.0 && norm < 1.0) {
                    return Err(CatalogError::InvalidParameter(format!(
                        "Randers one-form has a^ij b_i b_j = {norm} ∉ (0, 1) at x = {x:?}"
                    )));
                }
            }
            ModelKind::SignatureReversed { omega, fhat } => {
                let h: Vec<f64> = fhat
                    .diag
                    .iter()
                    .map(|e| e.eval(x))
                    .collect::<std::result::Result<_, _>>()?;
                if h.iter().any(|&hi| !(hi > 0.0)) {
                    return Err(CatalogError::InvalidParameter(format!(
                        "F̂ metric not positive definite at x = {x:?}"
                    )));
                }
                let c = fhat.one_form.eval(x)?;
                let norm: f64 = (0..4).map(|i| c[i] * c[i] / h[i]).sum();
                if norm >= 1.0 {
                    return Err(CatalogError::InvalidParameter(format!(
                        "F̂ one-form too large ({norm}) at x = {x:?}"
                    )));
                }
                if omega.eval(x)?.iter().all(|&w| w == 0.0) {
                    return Err(CatalogError::InvalidParameter(format!(
                        "ω vanishes at x = {x:?}"
                    )));
                }
            }
            _ => {
                if let Some(metric) = self.base_metric() {
                    metric.diagonal(x)?;
                }
            }
        }
        Ok(())
    }

    /// Magnitude scale of `L` at a point, used to scale null-cone thresholds.
    pub fn magnitude_scale(&self, x: &[f64; 4], v: &[f64; 4]) -> Result<f64> {
        let quad = |a: [f64; 4]| -> f64 { (0..4).map(|i| (a[i] * v[i] * v[i]).abs()).sum() };
        Ok(match &self.kind {
            ModelKind::Lorentzian { metric } => quad(metric.diagonal(x)?),
            ModelKind::Randers { metric, one_form } | ModelKind::Bogoslovsky { metric, one_form, .. } => {
                let b = one_form.eval(x)?;
                let bv: f64 = (0..4).map(|i| b[i] * v[i]).sum();
                quad(metric.diagonal(x)?) + bv * bv
            }
            ModelKind::MthRoot { m, terms } => {
                let mut s = 0.0;
                for t in terms {
                    let mono: f64 = (0..4).map(|k| v[k].powi(t.powers[k] as i32)).product();
                    s += (t.coeff.eval(x)? * mono).abs();
                }
                s.powf(2.0 / *m as f64)
            }
            ModelKind::SignatureReversed { omega, fhat } => {
                let w = omega.eval(x)?;
                let wv: f64 = (0..4).map(|i| w[i] * v[i]).sum();
                let mut h = [0.0; 4];
                for (o, e) in h.iter_mut().zip(&fhat.diag) {
                    *o = e.eval(x)?;
                }
                wv * wv + quad(h)
            }
        })
    }

    /// `L(x, ẋ)` in plain floating point.
    pub fn lagrangian_value(&self, x: &[f64; 4], v: &[f64; 4]) -> Result<f64> {
        let thr = EPS_DIV * self.magnitude_scale(x, v)?;
        let dot = |b: &[f64; 4]| -> f64 { (0..4).map(|i| b[i] * v[i]).sum() };
        let quad = |a: &[f64; 4]| -> f64 { (0..4).map(|i| a[i] * v[i] * v[i]).sum() };
        Ok(match &self.kind {
            ModelKind::Lorentzian { metric } => quad(&metric.diagonal(x)?),
            ModelKind::Randers { metric, one_form } => {
                let q = quad(&metric.diagonal(x)?);
                if !(q.abs() > thr) {
                    return Err(null_direction(q));
                }
                let f = q.abs().sqrt() + dot(&one_form.eval(x)?);
                q.signum() * f * f
            }
            ModelKind::Bogoslovsky {
                metric,
                one_form,
                q: expo,
            } => {
                let q = quad(&metric.diagonal(x)?);
                let bv = dot(&one_form.eval(x)?);
                if !(q.abs() > thr) {
                    return Err(null_direction(q));
                }
                if !(bv > thr.sqrt()) {
                    return Err(CatalogError::OutsideDomain(format!(
                        "b(ẋ) = {bv} must be positive"
                    )));
                }
                q.signum() * q.abs().powf(1.0 - expo) * bv.powf(2.0 * expo)
            }
            ModelKind::MthRoot { m, terms } => {
                let mut p = 0.0;
                for t in terms {
                    let mono: f64 = (0..4).map(|k| v[k].powi(t.powers[k] as i32)).product();
                    p += t.coeff.eval(x)? * mono;
                }
                let thr_p = thr.powf(*m as f64 / 2.0);
                if !(p.abs() > thr_p) {
                    return Err(null_direction(p));
                }
                p.signum() * p.abs().powf(2.0 / *m as f64)
            }
            ModelKind::SignatureReversed { omega, fhat } => {
                let mut h = [0.0; 4];
                for (o, e) in h.iter_mut().zip(&fhat.diag) {
                    *o = e.eval(x)?;
                }
                let fh = quad(&h).sqrt() + dot(&fhat.one_form.eval(x)?);
                let w = dot(&omega.eval(x)?);
                w * w - fh * fh
            }
        })
    }

    /// Jet of `L` at `pt`, truncated at `order`.
    pub fn lagrangian_jet(&self, pt: &ChartPoint, order: TruncationOrder) -> Result<Jet> {
        let (x, v) = pt.seeds(order.validate()?);
        self.lagrangian_from_seeds(&x, &v)
    }

    /// Jet of `L` given already-seeded position and velocity jets.
    pub fn lagrangian_from_seeds(&self, x: &[Jet; 4], v: &[Jet; 4]) -> Result<Jet> {
        let xv = x.clone().map(|j| j.value());
        let vv = v.clone().map(|j| j.value());
        let thr = EPS_DIV * self.magnitude_scale(&xv, &vv)?;
        let order = x[0].order().min(v[0].order());
        let quad = |a: &[Jet; 4]| -> Jet {
            let mut acc = a[0].mul(&v[0].square());
            for i in 1..4 {
                acc = acc + a[i].mul(&v[i].square());
            }
            acc
        };
        Ok(match &self.kind {
            ModelKind::Lorentzian { metric } => quad(&metric.diagonal_jets(x)?),
            ModelKind::Randers { metric, one_form } => {
                let q = quad(&metric.diagonal_jets(x)?);
                let (eps, abs_q) = q.checked_signed_abs(thr).map_err(|_| null_direction(q.value()))?;
                let f = abs_q.checked_sqrt(thr)? + one_form.contract_jet(x, v)?;
                f.square().scale(eps)
            }
            ModelKind::Bogoslovsky {
                metric,
                one_form,
                q: expo,
            } => {
                let q = quad(&metric.diagonal_jets(x)?);
                let (eps, abs_q) = q.checked_signed_abs(thr).map_err(|_| null_direction(q.value()))?;
                let bv = one_form.contract_jet(x, v)?;
                if !(bv.value() > thr.sqrt()) {
                    return Err(CatalogError::OutsideDomain(format!(
                        "b(ẋ) = {} must be positive",
                        bv.value()
                    )));
                }
                let p1 = abs_q.checked_powf(1.0 - expo, 0.0)?;
                let p2 = bv.checked_powf(2.0 * expo, 0.0)?;
                p1.mul(&p2).scale(eps)
            }
            ModelKind::MthRoot { m, terms } => {
                let mut p = Jet::constant(0.0, order);
                for t in terms {
                    let mut mono = t.coeff.eval_jet(x, order)?;
                    for k in 0..4 {
                        if t.powers[k] > 0 {
                            mono = mono.mul(&v[k].powi(t.powers[k]));
                        }
                    }
                    p = p + mono;
                }
                let thr_p = thr.powf(*m as f64 / 2.0);
                let (eps, abs_p) = p.checked_signed_abs(thr_p).map_err(|_| null_direction(p.value()))?;
                abs_p.checked_powf(2.0 / *m as f64, 0.0)?.scale(eps)
            }
            ModelKind::SignatureReversed { omega, fhat } => {
                let mut h: [Jet; 4] = std::array::from_fn(|_| Jet::constant(0.0, order));
                for (o, e) in h.iter_mut().zip(&fhat.diag) {
                    *o = e.eval_jet(x, order)?;
                }
                let hq = quad(&h);
                let fh = hq.checked_sqrt(0.0)? + fhat.one_form.contract_jet(x, v)?;
                let w = omega.contract_jet(x, v)?;
                w.square() - fh.square()
            }
        })
    }

    /// Sampling box restricted by the model's chart domain.
    pub fn sample_position(&self, rng: &mut impl Rng) -> [f64; 4] {
        self.chart_box.sample(rng)
    }
}

fn null_direction(value: f64) -> CatalogError {
    CatalogError::OutsideDomain(format!(
        "direction is null or non-smooth (root argument {value:e})"
    ))
}

/// Ready-made descriptors for the catalog's reference models.
pub mod presets {
    use super::*;

    pub fn minkowski() -> ModelDescriptor {
        ModelDescriptor {
            kind: KindTag::Lorentzian,
            name: Some("minkowski".into()),
            base_metric: Some(BaseMetric::Minkowski),
            one_form: None,
            q: None,
            m: None,
            coefficients: None,
            fhat: None,
            seed: None,
            chart_box: None,
        }
    }

    pub fn schwarzschild(mass: f64) -> ModelDescriptor {
        ModelDescriptor {
            name: Some("schwarzschild".into()),
            base_metric: Some(BaseMetric::Schwarzschild { mass }),
            ..minkowski()
        }
    }

    /// Static de Sitter patch in conformal time, `a = (Hη)⁻² diag(1,−1,−1,−1)`.
    pub fn de_sitter_conformal(hubble: f64) -> ModelDescriptor {
        let conformal = Expr::div(
            Expr::c(1.0),
            Expr::powi(Expr::mul(vec![Expr::c(hubble), Expr::x(0)]), 2),
        );
        ModelDescriptor {
            name: Some("de-sitter-conformal".into()),
            base_metric: Some(BaseMetric::UserDiagonal {
                diag: [
                    conformal.clone(),
                    Expr::neg(conformal.clone()),
                    Expr::neg(conformal.clone()),
                    Expr::neg(conformal),
                ],
            }),
            chart_box: Some(ChartBox {
                lo: [-2.0, -1.0, -1.0, -1.0],
                hi: [-0.5, 1.0, 1.0, 1.0],
            }),
            ..minkowski()
        }
    }

    /// Randers over Minkowski with constant `b = (β, 0, 0, 0)`.
    pub fn randers(beta: f64) -> ModelDescriptor {
        ModelDescriptor {
            kind: KindTag::Randers,
            name: Some("randers".into()),
            one_form: Some(OneForm::constant([beta, 0.0, 0.0, 0.0])),
            ..minkowski()
        }
    }

    /// Randers over Minkowski with a non-closed one-form
    /// `b = 0.3 dx⁰ + 0.05 x² dx¹`, which bends geodesics.
    pub fn randers_magnetic() -> ModelDescriptor {
        ModelDescriptor {
            kind: KindTag::Randers,
            name: Some("randers-magnetic".into()),
            one_form: Some(OneForm {
                components: [
                    Expr::c(0.3),
                    Expr::mul(vec![Expr::c(0.05), Expr::x(2)]),
                    Expr::c(0.0),
                    Expr::c(0.0),
                ],
            }),
            ..minkowski()
        }
    }

    /// Randers over Schwarzschild with `b = β dt`.
    pub fn randers_schwarzschild(mass: f64, beta: f64) -> ModelDescriptor {
        ModelDescriptor {
            kind: KindTag::Randers,
            name: Some("randers-schwarzschild".into()),
            base_metric: Some(BaseMetric::Schwarzschild { mass }),
            one_form: Some(OneForm::constant([beta, 0.0, 0.0, 0.0])),
            ..minkowski()
        }
    }

    pub fn bogoslovsky(q: f64) -> ModelDescriptor {
        ModelDescriptor {
            kind: KindTag::Bogoslovsky,
            name: Some("bogoslovsky".into()),
            one_form: Some(OneForm::constant([1.0, 0.0, 0.0, 0.0])),
            q: Some(q),
            ..minkowski()
        }
    }

    /// Quartic root `G = (a(ẋ,ẋ))² − k Σ_α (ẋ^α)⁴` over Minkowski, with a
    /// mild x-dependence in the anisotropy: `k = 0.1 (1 + 0.2 x¹)`.
    pub fn quartic_root() -> ModelDescriptor {
        let k = Expr::mul(vec![
            Expr::c(-0.1),
            Expr::add(vec![Expr::c(1.0), Expr::mul(vec![Expr::c(0.2), Expr::x(1)])]),
        ]);
        let mut terms = vec![MonomialTerm {
            powers: [4, 0, 0, 0],
            coeff: Expr::c(1.0),
        }];
        for a in 1..4 {
            let mut p = [0; 4];
            p[0] = 2;
            p[a] = 2;
            terms.push(MonomialTerm {
                powers: p,
                coeff: Expr::c(-2.0),
            });
            let mut p = [0; 4];
            p[a] = 4;
            terms.push(MonomialTerm {
                powers: p,
                coeff: Expr::add(vec![Expr::c(1.0), k.clone()]),
            });
            for b in a + 1..4 {
                let mut p = [0; 4];
                p[a] = 2;
                p[b] = 2;
                terms.push(MonomialTerm {
                    powers: p,
                    coeff: Expr::c(2.0),
                });
            }
        }
        ModelDescriptor {
            kind: KindTag::MthRoot,
            name: Some("quartic-root".into()),
            base_metric: None,
            m: Some(4),
            coefficients: Some(terms),
            ..minkowski()
        }
    }

    /// `L = ω(ẋ)² − F̂²` with `ω = 1.5 dx⁰`, `F̂ = |ẋ|_E + 0.1 ẋ¹`.
    pub fn signature_reversed() -> ModelDescriptor {
        ModelDescriptor {
            kind: KindTag::SignatureReversed,
            name: Some("signature-reversed".into()),
            base_metric: None,
            one_form: Some(OneForm::constant([1.5, 0.0, 0.0, 0.0])),
            fhat: Some(PositiveRanders {
                diag: [Expr::c(1.0), Expr::c(1.0), Expr::c(1.0), Expr::c(1.0)],
                one_form: OneForm::constant([0.0, 0.1, 0.0, 0.0]),
            }),
            ..minkowski()
        }
    }

    /// One representative of each of the five model kinds.
    pub fn all_kinds() -> Vec<ModelDescriptor> {
        vec![
            minkowski(),
            randers(0.3),
            bogoslovsky(0.2),
            quartic_root(),
            signature_reversed(),
        ]
    }

    /// Bogoslovsky over Schwarzschild with `b = dt`.
    pub fn bogoslovsky_schwarzschild(mass: f64, q: f64) -> ModelDescriptor {
        ModelDescriptor {
            name: Some("bogoslovsky-schwarzschild".into()),
            base_metric: Some(BaseMetric::Schwarzschild { mass }),
            ..bogoslovsky(q)
        }
    }

    /// Signature-reversed model with `ω₀ = 1.5 + 0.1 sin x¹`.
    pub fn signature_reversed_modulated() -> ModelDescriptor {
        let omega0 = Expr::add(vec![Expr::c(1.5), Expr::mul(vec![Expr::c(0.1), Expr::sin(Expr::x(1))])]);
        ModelDescriptor {
            name: Some("signature-reversed-modulated".into()),
            one_form: Some(OneForm {
                components: [omega0, Expr::c(0.0), Expr::c(0.0), Expr::c(0.0)],
            }),
            ..signature_reversed()
        }
    }

    /// One position-dependent representative of each model kind.
    pub fn curved_kinds() -> Vec<ModelDescriptor> {
        vec![
            schwarzschild(1.0),
            randers_schwarzschild(1.0, 0.2),
            bogoslovsky_schwarzschild(1.0, 0.2),
            quartic_root(),
            signature_reversed_modulated(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::MultiIndex;

    fn model(d: ModelDescriptor) -> FinslerModel {
        build_model(&d).unwrap()
    }

    #[test]
    fn randers_validation() {
        assert!(build_model(&presets::randers(0.3)).is_ok());
        assert!(matches!(
            build_model(&presets::randers(1.5)),
            Err(CatalogError::InvalidParameter(_))
        ));
    }

    #[test]
    fn bogoslovsky_validation() {
        assert!(build_model(&presets::bogoslovsky(0.2)).is_ok());
        assert!(matches!(
            build_model(&presets::bogoslovsky(1.0)),
            Err(CatalogError::InvalidParameter(_))
        ));
    }

    #[test]
    fn mth_root_rejects_small_m() {
        let mut d = presets::quartic_root();
        d.m = Some(1);
        assert!(build_model(&d).is_err());
    }

    #[test]
    fn minkowski_lagrangian() {
        let m = model(presets::minkowski());
        let pt = ChartPoint::new([0.0; 4], [1.0, 0.0, 0.0, 0.0]);
        let l = m.lagrangian_jet(&pt, TruncationOrder::default()).unwrap();
        assert_eq!(l.value(), 1.0);
        assert_eq!(l.partial(&MultiIndex::from_vars(&[4, 4])).unwrap(), 2.0);
        assert_eq!(l.partial(&MultiIndex::from_vars(&[5, 5])).unwrap(), -2.0);
    }

    #[test]
    fn randers_on_axis() {
        let beta = 0.3;
        let m = model(presets::randers(beta));
        let pt = ChartPoint::new([0.0; 4], [1.0, 0.0, 0.0, 0.0]);
        let l = m.lagrangian_jet(&pt, TruncationOrder::default()).unwrap();
        assert!((l.value() - (1.0 + beta) * (1.0 + beta)).abs() < 1e-14);
        assert!((m.lagrangian_value(&pt.x, &pt.v).unwrap() - 1.69).abs() < 1e-14);
    }

    #[test]
    fn schwarzschild_domain() {
        let m = model(presets::schwarzschild(1.0));
        let inside = ChartPoint::new([0.0, 1.5, 1.0, 0.0], [1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            m.lagrangian_jet(&inside, TruncationOrder::new(1, 2)),
            Err(CatalogError::OutsideDomain(_))
        ));
    }

    #[test]
    fn jet_and_value_paths_agree() {
        let pts = [
            ChartPoint::new([0.1, 0.2, -0.3, 0.4], [1.3, 0.2, -0.1, 0.3]),
            ChartPoint::new([0.5, -0.2, 0.3, 0.0], [0.9, -0.3, 0.2, 0.1]),
        ];
        for d in presets::all_kinds() {
            let m = model(d);
            for pt in &pts {
                let j = m.lagrangian_jet(pt, TruncationOrder::new(1, 2)).unwrap();
                let v = m.lagrangian_value(&pt.x, &pt.v).unwrap();
                assert!((j.value() - v).abs() < 1e-13 * v.abs().max(1.0), "{}", m.name);
            }
        }
    }

    #[test]
    fn descriptors_roundtrip() {
        for d in presets::all_kinds()
            .into_iter()
            .chain([presets::schwarzschild(1.0), presets::de_sitter_conformal(0.5)])
        {
            let json = d.to_json();
            assert_eq!(ModelDescriptor::from_json(&json).unwrap(), d);
            let toml = d.to_toml().unwrap();
            assert_eq!(ModelDescriptor::from_toml(&toml).unwrap(), d);
        }
    }
}
