//! Verification suites: Euler-operator audits, the horizontal-derivative
//! identities, reduction to Lorentzian geometry against a classical oracle,
//! contact and divergence checks, and a finite-difference oracle for the jet
//! engine.
//!
//! Residuals of tensorial quantities are divided by `max(1, |Q|)` over the
//! components checked, so tolerances read as relative errors for large
//! components and absolute errors near zero.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{BaseMetric, CatalogError, ChartPoint, FinslerModel};
use crate::causal::{is_pointwise_timelike, observer_frame, CausalError};
use crate::dynamics::{dynamical_scalar, theta_tensor, vacuum_scalar_jet, KineticGas, THETA_ORDER};
use crate::geometry::{DTensor, GeometryBundle, GeometryError};
use crate::jets::{Jet, JetError, MultiIndex, TruncationOrder};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("model `{0}` is not Lorentzian")]
    ModelNotLorentzian(String),
    #[error("finite-difference stencil leaves the domain at {0:?}")]
    StencilLeavesDomain([f64; 8]),
    #[error("no admissible timelike point found after {0} attempts")]
    SamplerExhausted(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Causal(#[from] CausalError),
}

impl From<CatalogError> for VerifyError {
    fn from(e: CatalogError) -> Self {
        Self::Geometry(e.into())
    }
}

impl From<JetError> for VerifyError {
    fn from(e: JetError) -> Self {
        Self::Geometry(e.into())
    }
}

pub type Result<T, E = VerifyError> = std::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub model: String,
    pub max_abs_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub samples: usize,
    pub seed: u64,
}

impl CheckReport {
    pub fn new(name: &str, model: &str, residual: f64, tolerance: f64, samples: usize, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            model: model.to_string(),
            max_abs_residual: residual,
            tolerance,
            pass: residual <= tolerance,
            samples,
            seed,
        }
    }
}

/// Seeded sample of admissible timelike points: positions from the model's
/// chart box, directions within rapidity 1 of the seed observer, and a
/// random positive rescaling in `[0.5, 2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePoints {
    pub seed: u64,
    pub points: Vec<ChartPoint>,
}

const MAX_ATTEMPTS_PER_POINT: usize = 200;

pub fn sample_points(model: &FinslerModel, n: usize, seed: u64) -> Result<SamplePoints> {
    sample_points_within(model, n, seed, 1.0)
}

/// As [`sample_points`] with directions within `max_rapidity` of the seed.
pub fn sample_points_within(model: &FinslerModel, n: usize, seed: u64, max_rapidity: f64) -> Result<SamplePoints> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut attempts = 0;
    while points.len() < n {
        attempts += 1;
        if attempts > MAX_ATTEMPTS_PER_POINT * n.max(1) {
            return Err(VerifyError::SamplerExhausted(attempts));
        }
        let x = model.sample_position(&mut rng);
        let Ok(frame) = observer_frame(model, &x) else { continue };
        let chi: f64 = rng.gen_range(0.0..max_rapidity);
        let cos_t: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let sin_t = (1.0 - cos_t * cos_t).sqrt();
        let n = [sin_t * phi.cos(), sin_t * phi.sin(), cos_t];
        let alpha: f64 = rng.gen_range(0.5..2.0);
        let v: [f64; 4] = std::array::from_fn(|i| {
            alpha
                * (chi.cosh() * frame[0][i]
                    + chi.sinh() * (n[0] * frame[1][i] + n[1] * frame[2][i] + n[2] * frame[3][i]))
        });
        if is_pointwise_timelike(model, &x, &v) {
            points.push(ChartPoint::new(x, v));
        }
    }
    Ok(SamplePoints { seed, points })
}

fn par_max<F>(points: &[ChartPoint], f: F) -> Result<Vec<f64>>
where
    F: Fn(&ChartPoint) -> Result<Vec<f64>> + Sync,
{
    let per_point: Vec<Result<Vec<f64>>> = points.par_iter().map(&f).collect();
    let mut worst: Vec<f64> = Vec::new();
    for r in per_point {
        let r = r?;
        if worst.is_empty() {
            worst = vec![0.0; r.len()];
        }
        for (w, x) in worst.iter_mut().zip(r) {
            *w = w.max(x);
        }
    }
    Ok(worst)
}

/// Quantities audited by the Euler operator, with their degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Lagrangian,
    Metric,
    Cartan,
    Finsler,
    Spray,
    Connection,
    ChernRund,
    Curvature,
    RicciScalar,
    Landsberg,
    FieldScalar,
    EnergyMomentumScalar,
}

impl Quantity {
    pub const ALL: [Quantity; 12] = [
        Quantity::Lagrangian,
        Quantity::Metric,
        Quantity::Cartan,
        Quantity::Finsler,
        Quantity::Spray,
        Quantity::Connection,
        Quantity::ChernRund,
        Quantity::Curvature,
        Quantity::RicciScalar,
        Quantity::Landsberg,
        Quantity::FieldScalar,
        Quantity::EnergyMomentumScalar,
    ];

    pub fn degree(self) -> f64 {
        match self {
            Quantity::Lagrangian | Quantity::Spray => 2.0,
            Quantity::Finsler | Quantity::Connection | Quantity::Curvature => 1.0,
            Quantity::Cartan => -1.0,
            _ => 0.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Quantity::Lagrangian => "L",
            Quantity::Metric => "g",
            Quantity::Cartan => "C",
            Quantity::Finsler => "F",
            Quantity::Spray => "G",
            Quantity::Connection => "N",
            Quantity::ChernRund => "Gamma",
            Quantity::Curvature => "R",
            Quantity::RicciScalar => "R0",
            Quantity::Landsberg => "P",
            Quantity::FieldScalar => "E",
            Quantity::EnergyMomentumScalar => "T",
        }
    }

    pub fn tensor(self, b: &GeometryBundle, gas: &KineticGas) -> Result<DTensor> {
        Ok(match self {
            Quantity::Lagrangian => DTensor::scalar(b.l.clone()),
            Quantity::Metric => DTensor::matrix(&b.g, 0),
            Quantity::Cartan => b.cartan_tensor()?,
            Quantity::Finsler => DTensor::scalar(b.f.clone()),
            Quantity::Spray => b.spray_tensor()?,
            Quantity::Connection => b.connection_tensor()?,
            Quantity::ChernRund => b.gamma_tensor()?,
            Quantity::Curvature => b.curvature_tensor()?,
            Quantity::RicciScalar => DTensor::scalar(b.curvature()?.r0.clone()),
            Quantity::Landsberg => b.landsberg_tensor()?,
            Quantity::FieldScalar => DTensor::scalar(vacuum_scalar_jet(b)?),
            Quantity::EnergyMomentumScalar => DTensor::scalar(theta_tensor(b, gas)?.0),
        })
    }
}

/// Order of `L` at which every audited quantity keeps ẋ-order ≥ 1.
pub const EULER_ORDER: TruncationOrder = TruncationOrder::new(2, 7);
pub const HOMOGENEITY_TOL: f64 = 1e-8;

/// Gas used for the `𝔗` audit when none is supplied.
pub fn reference_gas() -> KineticGas {
    KineticGas::rest_bump(1.0, 1.0, 2.0)
}

fn euler_rel(t: &DTensor, v: &[f64; 4], degree: f64) -> Result<f64> {
    let (res, scale) = t.euler_residual(v, degree)?;
    Ok(res / scale.max(1.0))
}

/// `max |ẋⁱ∂̇ᵢQ − kQ| / max(1, |Q|)` for each selected quantity.
pub fn homogeneity_checks(
    model: &FinslerModel,
    quantities: &[Quantity],
    gas: &KineticGas,
    sample: &SamplePoints,
) -> Result<Vec<CheckReport>> {
    let worst = par_max(&sample.points, |pt| {
        let b = GeometryBundle::new(model, pt, EULER_ORDER)?;
        quantities
            .iter()
            .map(|q| euler_rel(&q.tensor(&b, gas)?, &pt.v, q.degree()))
            .collect()
    })?;
    Ok(quantities
        .iter()
        .zip(worst)
        .map(|(q, r)| {
            let name = format!("homogeneity/{}", q.label());
            CheckReport::new(&name, &model.name, r, HOMOGENEITY_TOL, sample.points.len(), sample.seed)
        })
        .collect())
}

pub fn homogeneity_check(
    model: &FinslerModel,
    quantity: Quantity,
    gas: &KineticGas,
    sample: &SamplePoints,
) -> Result<CheckReport> {
    Ok(homogeneity_checks(model, &[quantity], gas, sample)?.remove(0))
}

pub const IDENTITY_TOL: f64 = 1e-8;

pub const IDENTITY_NAMES: [&str; 8] = [
    "identity/delta_L",
    "identity/g_hbar",
    "identity/xdot_hbar",
    "identity/nabla_L",
    "identity/nabla_g",
    "identity/nabla_xdot",
    "identity/P_xdot",
    "identity/Ptrace_xdot",
];

fn max_rel(values: impl IntoIterator<Item = f64>, scale: f64) -> f64 {
    values.into_iter().map(f64::abs).fold(0.0, f64::max) / scale.max(1.0)
}

fn max_value(t: &DTensor) -> f64 {
    t.values().into_iter().map(f64::abs).fold(0.0, f64::max)
}

fn identity_residuals(b: &GeometryBundle) -> Result<Vec<f64>> {
    let l_scale = b.l.value().abs();
    let g = DTensor::matrix(&b.g, 0);
    let g_scale = max_value(&g);
    let xdot = DTensor::vector(&b.xdot);
    let v_scale = max_value(&xdot);
    let scalar_l = DTensor::scalar(b.l.clone());
    let delta_l: Vec<f64> = (0..4)
        .map(|k| b.delta(&b.l, k).map(|j| j.value()))
        .collect::<Result<_, _>>()?;
    let cr = b.chern_rund()?;
    let p_xdot: Vec<f64> = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| (0..4).map(|k| cr.p[i][j][k].value() * b.point.v[k]).sum())
        .collect();
    let p_trace_xdot: f64 = (0..4).map(|i| cr.p_trace[i].value() * b.point.v[i]).sum();
    Ok(vec![
        max_rel(delta_l, l_scale),
        max_rel(g.horizontal_derivative(b)?.values(), g_scale),
        max_rel(xdot.horizontal_derivative(b)?.values(), v_scale),
        max_rel(scalar_l.dynamical_derivative(b)?.values(), l_scale),
        max_rel(g.dynamical_derivative(b)?.values(), g_scale),
        max_rel(xdot.dynamical_derivative(b)?.values(), v_scale),
        max_rel(p_xdot, 1.0),
        max_rel([p_trace_xdot], 1.0),
    ])
}

/// `δᵢL = 0, g_{ij|k} = 0, ẋⁱ_{|j} = 0, ∇L = 0, ∇g_ij = 0, ∇ẋⁱ = 0,
/// Pⁱⱼₖẋᵏ = 0, Pᵢẋⁱ = 0`.
pub fn identity_suite(model: &FinslerModel, sample: &SamplePoints) -> Result<Vec<CheckReport>> {
    let worst = par_max(&sample.points, |pt| {
        identity_residuals(&GeometryBundle::new(model, pt, THETA_ORDER)?)
    })?;
    Ok(IDENTITY_NAMES
        .iter()
        .zip(worst)
        .map(|(n, r)| CheckReport::new(n, &model.name, r, IDENTITY_TOL, sample.points.len(), sample.seed))
        .collect())
}

/// Christoffel symbols and curvature of a Lorentzian metric `a_ij(x)`,
/// computed from x-jets of the metric alone.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalGeometry {
    /// `christoffels[i][j][k] = γⁱⱼₖ`
    pub christoffels: [[[f64; 4]; 4]; 4],
    /// `riemann[i][j][k][l] = rⱼⁱₖₗ`, antisymmetric in `(k, l)`.
    pub riemann: [[[[f64; 4]; 4]; 4]; 4],
    /// `ricci[j][l] = rⱼᵏₖₗ`
    pub ricci: [[f64; 4]; 4],
    pub ricci_scalar: f64,
}

impl ClassicalGeometry {
    pub fn new(metric: &BaseMetric, x: &[f64; 4]) -> Result<Self> {
        let order = TruncationOrder::new(3, 0);
        let (xs, _) = ChartPoint::new(*x, [0.0; 4]).seeds(order);
        let diag = metric.diagonal_jets(&xs)?;
        let a = |i: usize, j: usize| -> Jet {
            if i == j {
                diag[i].clone()
            } else {
                Jet::zeros(order)
            }
        };
        let inv: Vec<Jet> = diag
            .iter()
            .map(|d| d.checked_recip(0.0))
            .collect::<Result<_, _>>()?;
        let a_inv = |i: usize, j: usize| -> Jet {
            if i == j {
                inv[i].clone()
            } else {
                Jet::zeros(order)
            }
        };
        let mut da: Vec<Jet> = Vec::with_capacity(64);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    da.push(a(i, j).d_x(k)?);
                }
            }
        }
        let da = |i: usize, j: usize, k: usize| &da[16 * i + 4 * j + k];
        let mut gamma: Vec<Jet> = Vec::with_capacity(64);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let mut s = Jet::zeros(da(0, 0, 0).order());
                    for h in 0..4 {
                        let lower = da(h, k, j) + da(h, j, k) - da(j, k, h);
                        s = s + a_inv(i, h).truncate(lower.order()).mul(&lower);
                    }
                    gamma.push(s.scale(0.5));
                }
            }
        }
        let gm = |i: usize, j: usize, k: usize| &gamma[16 * i + 4 * j + k];
        let mut riemann = [[[[0.0; 4]; 4]; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let mut r = gm(i, j, l).d_x(k)?.value() - gm(i, j, k).d_x(l)?.value();
                        for m in 0..4 {
                            r += gm(i, k, m).value() * gm(m, j, l).value()
                                - gm(i, l, m).value() * gm(m, j, k).value();
                        }
                        riemann[i][j][k][l] = r;
                    }
                }
            }
        }
        let ricci: [[f64; 4]; 4] =
            std::array::from_fn(|j| std::array::from_fn(|l| (0..4).map(|k| riemann[k][j][k][l]).sum()));
        let ricci_scalar = (0..4).map(|j| inv[j].value() * ricci[j][j]).sum();
        Ok(Self {
            christoffels: std::array::from_fn(|i| {
                std::array::from_fn(|j| std::array::from_fn(|k| gm(i, j, k).value()))
            }),
            riemann,
            ricci,
            ricci_scalar,
        })
    }

    pub fn ricci_contracted(&self, v: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for j in 0..4 {
            for l in 0..4 {
                s += self.ricci[j][l] * v[j] * v[l];
            }
        }
        s
    }
}

pub const REDUCTION_CONNECTION_TOL: f64 = 1e-9;
pub const REDUCTION_CURVATURE_TOL: f64 = 1e-6;

/// Order of `L` for `(LR₀)_{·i·j}` and `E`.
pub const REDUCTION_ORDER: TruncationOrder = TruncationOrder::new(2, 6);

/// Finsler quantities of a Lorentzian model against the classical oracle:
/// `Gⁱⱼ = γⁱⱼₖẋᵏ`, `LR₀ = −rⱼₗẋʲẋˡ`, `gⁱʲ(LR₀)_{·i·j} = −2r` and
/// `E = −r + 3rⱼₗẋʲẋˡ/L`.
pub fn lorentzian_reduction(model: &FinslerModel, sample: &SamplePoints) -> Result<Vec<CheckReport>> {
    let metric = match (model.is_lorentzian(), model.base_metric()) {
        (true, Some(m)) => m.clone(),
        _ => return Err(VerifyError::ModelNotLorentzian(model.name.clone())),
    };
    let worst = par_max(&sample.points, |pt| {
        let classical = ClassicalGeometry::new(&metric, &pt.x)?;
        let b = GeometryBundle::new(model, pt, REDUCTION_ORDER)?;
        let n = &b.spray()?.n;
        let mut conn = 0.0f64;
        let mut conn_scale = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let expected: f64 = (0..4).map(|k| classical.christoffels[i][j][k] * pt.v[k]).sum();
                conn = conn.max((n[i][j].value() - expected).abs());
                conn_scale = conn_scale.max(expected.abs());
            }
        }
        let curv = b.curvature()?;
        let l = b.l.value();
        let ric_vv = classical.ricci_contracted(&pt.v);
        let r0 = (curv.r0.value() + ric_vv / l).abs();
        let mut trace = 0.0;
        for i in 0..4 {
            let di = curv.l_r0.d_v(i)?;
            for j in 0..4 {
                trace += b.g_inv[i][j].value() * di.d_v(j)?.value();
            }
        }
        let r = classical.ricci_scalar;
        let e = vacuum_scalar_jet(&b)?.value();
        Ok(vec![
            conn / conn_scale.max(1.0),
            r0,
            (trace + 2.0 * r).abs(),
            (e - (-r + 3.0 * ric_vv / l)).abs(),
        ])
    })?;
    let names = [
        ("reduction/connection", REDUCTION_CONNECTION_TOL),
        ("reduction/R0", REDUCTION_CURVATURE_TOL),
        ("reduction/ricci_scalar", REDUCTION_CURVATURE_TOL),
        ("reduction/E", REDUCTION_CURVATURE_TOL),
    ];
    Ok(names
        .iter()
        .zip(worst)
        .map(|((n, tol), r)| CheckReport::new(n, &model.name, r, *tol, sample.points.len(), sample.seed))
        .collect())
}

pub const CONTACT_TOL: f64 = 1e-9;
pub const DIVERGENCE_TOL: f64 = 1e-8;

/// 0-homogeneous test function `f = (1 + x¹/10 + (x²)²/20)(1 + ẋ¹ẋ²/(ẋ⁰)² + 3ẋ³/(10ẋ⁰))`.
pub fn divergence_test_function(x: &[Jet; 4], v: &[Jet; 4]) -> Result<Jet> {
    let h = x[1].scale(0.1) + x[2].square().scale(0.05);
    let h = h.add_scalar(1.0);
    let inv0 = v[0].checked_recip(0.0)?;
    let ratio = v[1].mul(&v[2]).mul(&inv0.square()) + v[3].mul(&inv0).scale(0.3);
    Ok(h.mul(&ratio.add_scalar(1.0)))
}

/// (a) `ωᵢlⁱ = 1`; (b) `(εg_ij − F_{·i}F_{·j})lʲ = 0`; (c) `∇f = F·div(f lⁱδᵢ)`
/// with `div(X) = Xⁱ_{|i} − PᵢXⁱ`.
pub fn contact_and_divergence_checks(model: &FinslerModel, sample: &SamplePoints) -> Result<Vec<CheckReport>> {
    let worst = par_max(&sample.points, |pt| {
        let b = GeometryBundle::new(model, pt, THETA_ORDER)?;
        let ell = b.ell.clone().map(|j| j.value());
        let omega = b.omega.clone().map(|j| j.value());
        let a = ((0..4).map(|i| omega[i] * ell[i]).sum::<f64>() - 1.0).abs();
        let g = b.g_value();
        let mut c = 0.0f64;
        for i in 0..4 {
            let s: f64 = (0..4)
                .map(|j| (b.epsilon * g[(i, j)] - omega[i] * omega[j]) * ell[j])
                .sum();
            c = c.max(s.abs());
        }
        let (xs, _) = pt.seeds(b.order);
        let f = divergence_test_function(&xs, &b.xdot)?;
        let x_field = DTensor::vector(&std::array::from_fn(|i| f.mul(&b.ell[i])));
        let h = x_field.horizontal_derivative(&b)?;
        let p = &b.chern_rund()?.p_trace;
        let div: f64 = (0..4)
            .map(|i| h.get(&[i, i]).value() - p[i].value() * x_field.get(&[i]).value())
            .sum();
        let nabla = dynamical_scalar(&b, &f)?.value();
        let d = (nabla - b.f.value() * div).abs() / nabla.abs().max(1.0);
        Ok(vec![a, c, d])
    })?;
    let names = [
        ("contact/reeb_normalization", CONTACT_TOL),
        ("contact/reeb_kernel", CONTACT_TOL),
        ("divergence/nabla", DIVERGENCE_TOL),
    ];
    Ok(names
        .iter()
        .zip(worst)
        .map(|((n, tol), r)| CheckReport::new(n, &model.name, r, *tol, sample.points.len(), sample.seed))
        .collect())
}

pub const FD_TOL: f64 = 1e-5;
/// Directions sampled for the finite-difference oracle stay this close to
/// the seed so the stencil keeps clear of the null cone.
pub const FD_MAX_RAPIDITY: f64 = 0.5;
/// Base step of the central stencils; two Richardson levels combine `h`,
/// `h/2` and `h/4`.
pub const FD_STEP: f64 = 0.04;

/// Weights of the central difference for `d^m/dz^m` at offsets `−2..=2`.
fn stencil(m: u8) -> &'static [(i8, f64)] {
    match m {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!("stencils exist up to order 4"),
    }
}

/// All multi-indices of total degree `1..=max_order` in the 8 chart variables.
pub fn multi_indices(max_order: usize) -> Vec<MultiIndex> {
    fn rec(start: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if !cur.is_empty() {
            out.push(MultiIndex::from_vars(cur));
        }
        if left == 0 {
            return;
        }
        for k in start..8 {
            cur.push(k);
            rec(k, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, max_order, &mut Vec::new(), &mut out);
    out
}

struct FdEvaluator<'m> {
    model: &'m FinslerModel,
    base: [f64; 8],
    h: [f64; 8],
    cache: HashMap<[i8; 8], f64>,
}

impl FdEvaluator<'_> {
    fn value(&mut self, offset: [i8; 8]) -> Result<f64> {
        if let Some(v) = self.cache.get(&offset) {
            return Ok(*v);
        }
        let z: [f64; 8] = std::array::from_fn(|k| self.base[k] + self.h[k] * offset[k] as f64);
        let x = [z[0], z[1], z[2], z[3]];
        let v = [z[4], z[5], z[6], z[7]];
        let l = self
            .model
            .lagrangian_value(&x, &v)
            .map_err(|_| VerifyError::StencilLeavesDomain(z))?;
        self.cache.insert(offset, l);
        Ok(l)
    }

    fn partial(&mut self, idx: &MultiIndex) -> Result<f64> {
        let mut terms: Vec<([i8; 8], f64)> = vec![([0; 8], 1.0)];
        for k in 0..8 {
            let m = idx.get(k);
            if m == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(terms.len() * 5);
            for (off, w) in &terms {
                for &(o, c) in stencil(m) {
                    let mut off = *off;
                    off[k] = o;
                    next.push((off, w * c));
                }
            }
            terms = next;
        }
        let mut s = 0.0;
        for (off, w) in terms {
            s += w * self.value(off)?;
        }
        let scale: f64 = (0..8).map(|k| self.h[k].powi(idx.get(k) as i32)).product();
        Ok(s / scale)
    }
}

/// Largest relative deviation of finite-difference partials of `L` from the
/// jet's, over all partials of order `1..=max_order` at one point. Each
/// partial is compared at the scale `max(|∂^α L|, |L| / Π uₖ^{αₖ})`, where
/// `uₖ` is the stencil unit of chart variable `k`.
pub fn fd_oracle_deviation(model: &FinslerModel, pt: &ChartPoint, max_order: usize) -> Result<f64> {
    assert!((1..=4).contains(&max_order), "finite-difference stencils exist up to order 4");
    let jet = model.lagrangian_jet(pt, TruncationOrder::new(max_order, max_order))?;
    let base: [f64; 8] = std::array::from_fn(|k| if k < 4 { pt.x[k] } else { pt.v[k - 4] });
    // ẋ-steps follow the metric, `h F/√|g_kk|`, so the stencil keeps its
    // distance from the null cone under rescaling and in stretched charts.
    let b = GeometryBundle::new(model, pt, TruncationOrder::new(0, 2))?;
    let g = b.g_value();
    let f = b.f.value();
    let v_unit: [f64; 4] = std::array::from_fn(|k| f / g[(k, k)].abs().max(f64::EPSILON).sqrt());
    let mut levels: Vec<FdEvaluator> = (0..3)
        .map(|k| FdEvaluator {
            model,
            base,
            h: std::array::from_fn(|i| {
                let unit = if i < 4 { 1.0 } else { v_unit[i - 4] };
                unit * FD_STEP / f64::from(1u32 << k)
            }),
            cache: HashMap::new(),
        })
        .collect();
    let mut worst = 0.0f64;
    for idx in multi_indices(max_order) {
        let exact = jet.partial(&idx)?;
        let units: f64 = (0..8).map(|k| levels[0].h[k].powi(idx.get(k) as i32)).product::<f64>()
            / FD_STEP.powi(idx.total_degree() as i32);
        let natural = jet.value().abs() / units;
        let d: Vec<f64> = levels.iter_mut().map(|e| e.partial(&idx)).collect::<Result<_>>()?;
        let r1 = (4.0 * d[1] - d[0]) / 3.0;
        let r2 = (4.0 * d[2] - d[1]) / 3.0;
        let fd = (16.0 * r2 - r1) / 15.0;
        worst = worst.max((fd - exact).abs() / exact.abs().max(natural));
    }
    Ok(worst)
}

pub fn fd_oracle_compare(model: &FinslerModel, sample: &SamplePoints, max_order: usize) -> Result<CheckReport> {
    let worst = par_max(&sample.points, |pt| Ok(vec![fd_oracle_deviation(model, pt, max_order)?]))?;
    let name = format!("fd_oracle/order{max_order}");
    Ok(CheckReport::new(&name, &model.name, worst[0], FD_TOL, sample.points.len(), sample.seed))
}

pub const TRUNCATION_TOL: f64 = 1e-12;

/// Relative change of `E`, `R₀` and `Θʲᵢ_{|j}` when both truncation orders
/// are raised by one.
pub fn truncation_stability(
    model: &FinslerModel,
    gas: &KineticGas,
    order: TruncationOrder,
    sample: &SamplePoints,
) -> Result<Vec<CheckReport>> {
    let eval = |pt: &ChartPoint, o: TruncationOrder| -> Result<Vec<f64>> {
        let b = GeometryBundle::new(model, pt, o)?;
        let mut out = vec![vacuum_scalar_jet(&b)?.value(), b.curvature()?.r0.value()];
        let (_, theta) = theta_tensor(&b, gas)?;
        let h = theta.horizontal_derivative(&b)?;
        out.extend((0..4).map(|i| (0..4).map(|j| h.get(&[j, i, j]).value()).sum::<f64>()));
        Ok(out)
    };
    let rel = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(1.0)).collect();
    let worst = par_max(&sample.points, |pt| {
        let lo: Vec<f64> = eval(pt, order)?;
        let hi: Vec<f64> = eval(pt, order.bumped())?;
        let d: Vec<f64> = rel(&lo, &hi);
        Ok(vec![d[0], d[1], d[2..].iter().copied().fold(0.0, f64::max)])
    })?;
    Ok(["truncation/E", "truncation/R0", "truncation/theta_div"]
        .iter()
        .zip(worst)
        .map(|(n, r)| CheckReport::new(n, &model.name, r, TRUNCATION_TOL, sample.points.len(), sample.seed))
        .collect())
}

/// Sizes of the default suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub samples: usize,
    pub fd_samples: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            fd_samples: 20,
            seed: 0,
        }
    }
}

/// Every check applicable to `model`, in a fixed order.
pub fn default_suite(model: &FinslerModel, cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let sample = sample_points(model, cfg.samples, cfg.seed)?;
    let gas = reference_gas();
    let mut reports = homogeneity_checks(model, &Quantity::ALL, &gas, &sample)?;
    reports.extend(identity_suite(model, &sample)?);
    if model.is_lorentzian() {
        reports.extend(lorentzian_reduction(model, &sample)?);
    }
    reports.extend(contact_and_divergence_checks(model, &sample)?);
    let fd_sample = sample_points_within(model, cfg.fd_samples, cfg.seed, FD_MAX_RAPIDITY)?;
    reports.push(fd_oracle_compare(model, &fd_sample, 4)?);
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_model, presets};

    #[test]
    fn multi_index_count() {
        // C(8 + 4, 4) − 1
        assert_eq!(multi_indices(4).len(), 494);
    }

    #[test]
    fn classical_de_sitter() {
        let h = 0.7;
        let metric = presets::de_sitter_conformal(h).base_metric.unwrap();
        let c = ClassicalGeometry::new(&metric, &[-1.3, 0.2, 0.1, 0.0]).unwrap();
        assert!((c.ricci_scalar + 12.0 * h * h).abs() < 1e-10, "{}", c.ricci_scalar);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    assert_eq!(c.christoffels[i][j][k], c.christoffels[i][k][j]);
                    for l in 0..4 {
                        assert!((c.riemann[i][j][k][l] + c.riemann[i][j][l][k]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn classical_schwarzschild_is_ricci_flat() {
        let metric = BaseMetric::Schwarzschild { mass: 1.0 };
        let c = ClassicalGeometry::new(&metric, &[0.0, 7.0, 1.1, 0.4]).unwrap();
        let ric = c.ricci.iter().flatten().map(|r| r.abs()).fold(0.0, f64::max);
        assert!(ric < 1e-12);
        // γ^r_tt = M(r − 2M)/r³
        assert!((c.christoffels[1][0][0] - 5.0 / 343.0).abs() < 1e-14);
    }

    #[test]
    fn randers_identities_and_fd() {
        let m = build_model(&presets::randers(0.3)).unwrap();
        let s = sample_points(&m, 4, 7).unwrap();
        for r in identity_suite(&m, &s).unwrap() {
            assert!(r.pass, "{r:?}");
        }
        for r in contact_and_divergence_checks(&m, &s).unwrap() {
            assert!(r.pass, "{r:?}");
        }
        let fd = fd_oracle_compare(&m, &SamplePoints { seed: 7, points: s.points[..1].to_vec() }, 4).unwrap();
        assert!(fd.pass, "{fd:?}");
    }

    #[test]
    fn not_lorentzian() {
        let m = build_model(&presets::randers(0.3)).unwrap();
        let s = sample_points(&m, 1, 0).unwrap();
        assert!(matches!(lorentzian_reduction(&m, &s), Err(VerifyError::ModelNotLorentzian(_))));
    }
}

