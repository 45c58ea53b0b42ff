//! Field equations and the kinetic-gas energy-momentum apparatus.
//!
//! The gas is described by a 0-homogeneous one-particle distribution `φ`.
//! With `𝔗 = ½mφ` the energy-momentum distribution is
//! `Θʲᵢ = 𝔗 ẋʲẋᵢ / L`, whose horizontal divergence satisfies the balance
//! identity `Θʲᵢ_{|j} = ẋᵢ ∇𝔗 / L`.

use serde::{Deserialize, Serialize};

use crate::catalog::{ChartPoint, FinslerModel, EPS_DIV};
use crate::expr::Expr;
use crate::geometry::{DTensor, GeometryBundle, GeometryError, Result};
use crate::jets::{Jet, TruncationOrder};
use crate::quadrature::{integrate_fiber, FiberIntegral, QuadConfig, QuadratureError};

fn sum4(f: impl Fn(usize) -> Jet) -> Jet {
    let mut acc = f(0);
    for m in 1..4 {
        acc = acc + f(m);
    }
    acc
}

/// `E = ½gⁱʲ(LR₀)_{·i·j} − 3R₀ − gⁱʲ(P_{i|j} − PᵢPⱼ + (∇Pᵢ)_{·j})` as a jet.
pub fn vacuum_scalar_jet(b: &GeometryBundle) -> Result<Jet> {
    let curv = b.curvature()?;
    let cr = b.chern_rund()?;
    let p = DTensor::covector(&cr.p_trace);
    let p_bar = p.horizontal_derivative(b)?;
    let mut first = Vec::with_capacity(16);
    let mut second = Vec::with_capacity(16);
    for i in 0..4 {
        let dl = curv.l_r0.d_v(i)?;
        let nabla_p = sum4(|j| p_bar.get(&[i, j]).mul(&b.xdot[j]));
        for j in 0..4 {
            first.push(b.g_inv[i][j].mul(&dl.d_v(j)?));
            let bracket = p_bar.get(&[i, j]) - cr.p_trace[i].mul(&cr.p_trace[j]) + nabla_p.d_v(j)?;
            second.push(b.g_inv[i][j].mul(&bracket));
        }
    }
    let first = crate::jets::sum(&first).unwrap();
    let second = crate::jets::sum(&second).unwrap();
    Ok(first.scale(0.5) - curv.r0.scale(3.0) - second)
}

/// Vacuum field scalar `E` at `pt`.
pub fn vacuum_scalar_e(model: &FinslerModel, pt: &ChartPoint, order: TruncationOrder) -> Result<f64> {
    let b = GeometryBundle::new(model, pt, order)?;
    Ok(vacuum_scalar_jet(&b)?.value())
}

/// `β(s) = exp(1 − 1/(1 − s²))` on `|s| < 1`, zero (with all derivatives)
/// outside.
pub fn bump_jet(s: &Jet) -> Result<Jet> {
    let s0 = s.value();
    if s0.abs() >= 1.0 {
        return Ok(Jet::zeros(s.order()));
    }
    let q = s.square().scale(-1.0).add_scalar(1.0);
    Ok(q.checked_recip(0.0)?.scale(-1.0).add_scalar(1.0).exp())
}

pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

fn one() -> Expr {
    Expr::c(1.0)
}

fn default_observer() -> [Expr; 4] {
    [Expr::c(1.0), Expr::c(0.0), Expr::c(0.0), Expr::c(0.0)]
}

/// Window on a conserved momentum `pₖ/F` with `pₖ = ½∂̇ₖL`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumWindow {
    pub coordinate: usize,
    pub center: f64,
    pub width: f64,
}

/// Built-in families of 1PDFs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    /// Bump in the boost factor `γ = uᵢ(x)ẋⁱ/F` relative to the observer
    /// covector `u`: `φ = A·h(x)·β((γ − cosh χ_c)/(cosh(χ_c + w) − cosh χ_c))`.
    RapidityBump {
        center_rapidity: f64,
        width: f64,
        amplitude: f64,
        #[serde(default = "one")]
        x_modulation: Expr,
        #[serde(default = "default_observer")]
        observer: [Expr; 4],
    },
    /// Product of bumps in momenta `pₖ/F` of cyclic coordinates; constant
    /// along geodesics, hence a solution of the Liouville equation.
    MomentumBump {
        amplitude: f64,
        windows: Vec<MomentumWindow>,
    },
}

fn default_kappa_sq() -> f64 {
    1.0
}

/// Kinetic gas: particle mass, coupling `κ²`, and distribution `φ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticGas {
    pub mass: f64,
    #[serde(default = "default_kappa_sq")]
    pub kappa_sq: f64,
    pub profile: Profile,
}

impl KineticGas {
    pub fn new(mass: f64, profile: Profile) -> Self {
        Self {
            mass,
            kappa_sq: 1.0,
            profile,
        }
    }

    /// Isotropic x-independent rapidity bump centred on the rest direction.
    pub fn rest_bump(mass: f64, amplitude: f64, width: f64) -> Self {
        Self::new(
            mass,
            Profile::RapidityBump {
                center_rapidity: 0.0,
                width,
                amplitude,
                x_modulation: one(),
                observer: default_observer(),
            },
        )
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.mass > 0.0) || !(self.kappa_sq > 0.0) {
            return Err(format!(
                "mass = {} and kappa_sq = {} must be positive",
                self.mass, self.kappa_sq
            ));
        }
        match &self.profile {
            Profile::Zero => Ok(()),
            Profile::RapidityBump {
                center_rapidity,
                width,
                amplitude,
                x_modulation,
                observer,
            } => {
                if !(*width > 0.0) || !(*amplitude >= 0.0) || !(*center_rapidity >= 0.0) {
                    return Err("rapidity bump needs width > 0, amplitude ≥ 0, center ≥ 0".into());
                }
                x_modulation.validate()?;
                observer.iter().try_for_each(Expr::validate)
            }
            Profile::MomentumBump { amplitude, windows } => {
                if !(*amplitude >= 0.0) || windows.is_empty() {
                    return Err("momentum bump needs amplitude ≥ 0 and at least one window".into());
                }
                for w in windows {
                    if w.coordinate >= 4 || !(w.width > 0.0) {
                        return Err(format!("bad momentum window {w:?}"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Jet of `φ` from seeded positions and the jet of `L`.
    pub fn phi_from_jets(&self, x: &[Jet; 4], xdot: &[Jet; 4], l: &Jet) -> Result<Jet> {
        let order = l.order();
        match &self.profile {
            Profile::Zero => Ok(Jet::zeros(order)),
            Profile::RapidityBump {
                center_rapidity,
                width,
                amplitude,
                x_modulation,
                observer,
            } => {
                let f = l.scale(l.value().signum()).checked_sqrt(0.0)?;
                let mut u_v = Jet::zeros(order);
                for (e, v) in observer.iter().zip(xdot) {
                    if e.as_const() != Some(0.0) {
                        u_v = u_v + e.eval_jet(x, order)?.mul(v);
                    }
                }
                let gamma = u_v.checked_div(&f, 0.0)?;
                let c0 = center_rapidity.cosh();
                let span = (center_rapidity + width).cosh() - c0;
                let s = gamma.add_scalar(-c0).scale(1.0 / span);
                let h = x_modulation.eval_jet(x, order)?;
                Ok(bump_jet(&s)?.mul(&h).scale(*amplitude))
            }
            Profile::MomentumBump { amplitude, windows } => {
                let f = l.scale(l.value().signum()).checked_sqrt(0.0)?;
                let inv_f = f.checked_recip(0.0)?;
                let mut acc: Option<Jet> = None;
                for w in windows {
                    let p = l.d_v(w.coordinate)?.scale(0.5).mul(&inv_f);
                    let b = bump_jet(&p.add_scalar(-w.center).scale(1.0 / w.width))?;
                    acc = Some(match acc {
                        None => b,
                        Some(a) => a.mul(&b),
                    });
                }
                Ok(acc.unwrap().scale(*amplitude))
            }
        }
    }

    pub fn phi_jet(&self, b: &GeometryBundle) -> Result<Jet> {
        let (x, _) = b.point.seeds(b.order);
        self.phi_from_jets(&x, &b.xdot, &b.l)
    }

    pub fn phi_value(&self, model: &FinslerModel, x: &[f64; 4], v: &[f64; 4]) -> Result<f64> {
        let pt = ChartPoint::new(*x, *v);
        let order = TruncationOrder::new(0, 1);
        let l = model.lagrangian_jet(&pt, order)?;
        let (xs, vs) = pt.seeds(order);
        Ok(self.phi_from_jets(&xs, &vs, &l)?.value())
    }
}

/// `E + κ²φ`: vanishes where `(L, φ)` solves the sourced field equation.
pub fn field_residual_kinetic(
    model: &FinslerModel,
    gas: &KineticGas,
    pt: &ChartPoint,
    order: TruncationOrder,
) -> Result<f64> {
    let b = GeometryBundle::new(model, pt, order)?;
    let e = vacuum_scalar_jet(&b)?.value();
    Ok(e + gas.kappa_sq * gas.phi_jet(&b)?.value())
}

/// Jet order of `L` sufficient for `Θʲᵢ_{|j}` and `∇φ`.
pub const THETA_ORDER: TruncationOrder = TruncationOrder::new(1, 4);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaComponents {
    /// `𝔗 = ½mφ`
    pub t_frak: f64,
    /// `theta[j][i] = Θʲᵢ`
    pub theta: [[f64; 4]; 4],
    /// `theta_div[i] = Θʲᵢ_{|j}`
    pub theta_div: [f64; 4],
}

impl ThetaComponents {
    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.theta[i][i]).sum()
    }
}

/// Jet-valued `Θ` as a (1,1) d-tensor with indices `(j, i)`.
pub fn theta_tensor(b: &GeometryBundle, gas: &KineticGas) -> Result<(Jet, DTensor)> {
    let t_frak = gas.phi_jet(b)?.scale(0.5 * gas.mass);
    let lower = b.xdot_lower();
    let coeff = t_frak.checked_div(&b.l, 0.0)?;
    let theta = DTensor::from_fn(1, 1, |idx| coeff.mul(&b.xdot[idx[0]]).mul(&lower[idx[1]]));
    Ok((t_frak, theta))
}

fn divergence(b: &GeometryBundle, theta: &DTensor) -> Result<[Jet; 4]> {
    let h = theta.horizontal_derivative(b)?;
    Ok(std::array::from_fn(|i| sum4(|j| h.get(&[j, i, j]).clone())))
}

pub fn em_scalar_and_theta_at(b: &GeometryBundle, gas: &KineticGas) -> Result<ThetaComponents> {
    let (t_frak, theta) = theta_tensor(b, gas)?;
    let div = divergence(b, &theta)?;
    Ok(ThetaComponents {
        t_frak: t_frak.value(),
        theta: std::array::from_fn(|j| std::array::from_fn(|i| theta.get(&[j, i]).value())),
        theta_div: div.map(|d| d.value()),
    })
}

pub fn em_scalar_and_theta(model: &FinslerModel, gas: &KineticGas, pt: &ChartPoint) -> Result<ThetaComponents> {
    let b = GeometryBundle::new(model, pt, THETA_ORDER)?;
    em_scalar_and_theta_at(&b, gas)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Balance {
    /// `Θʲᵢ_{|j}`
    pub theta_div: [f64; 4],
    /// `∇𝔗 = ½m∇φ`
    pub nabla_t: f64,
    /// `ẋᵢ∇𝔗/L`
    pub rhs: [f64; 4],
    /// `max |Θʲᵢ_{|j} − ẋᵢ∇𝔗/L|`
    pub residual: f64,
}

/// `∇f = ẋᵏδₖf` for a scalar jet.
pub fn dynamical_scalar(b: &GeometryBundle, f: &Jet) -> Result<Jet> {
    let mut acc = b.delta(f, 0)?.mul(&b.xdot[0]);
    for k in 1..4 {
        acc = acc + b.delta(f, k)?.mul(&b.xdot[k]);
    }
    Ok(acc)
}

pub fn balance_at(b: &GeometryBundle, gas: &KineticGas) -> Result<Balance> {
    let (_, theta) = theta_tensor(b, gas)?;
    let theta_div = divergence(b, &theta)?.map(|d| d.value());
    let phi = gas.phi_jet(b)?;
    let nabla_t = 0.5 * gas.mass * dynamical_scalar(b, &phi)?.value();
    let lower = b.xdot_lower();
    let l = b.l.value();
    let rhs: [f64; 4] = std::array::from_fn(|i| lower[i].value() * nabla_t / l);
    let residual = (0..4).map(|i| (theta_div[i] - rhs[i]).abs()).fold(0.0, f64::max);
    Ok(Balance {
        theta_div,
        nabla_t,
        rhs,
        residual,
    })
}

pub fn theta_divergence_and_balance(model: &FinslerModel, gas: &KineticGas, pt: &ChartPoint) -> Result<Balance> {
    let b = GeometryBundle::new(model, pt, THETA_ORDER)?;
    balance_at(&b, gas)
}

/// `∇φ` at `pt`; zero for a collisionless (Liouville) gas.
pub fn liouville_residual(model: &FinslerModel, gas: &KineticGas, pt: &ChartPoint) -> Result<f64> {
    let b = GeometryBundle::new(model, pt, THETA_ORDER)?;
    Ok(dynamical_scalar(&b, &gas.phi_jet(&b)?)?.value())
}

fn quad_err(e: GeometryError) -> QuadratureError {
    QuadratureError::Geometry(e)
}

/// The four fiber integrals `∫ Θʲᵢ_{|j} dΣₓ⁺`.
pub fn averaged_conservation_check(
    model: &FinslerModel,
    gas: &KineticGas,
    x: &[f64; 4],
    quad: &QuadConfig,
) -> std::result::Result<FiberIntegral, QuadratureError> {
    integrate_fiber(model, x, quad, |x, v| {
        let b = GeometryBundle::new(model, &ChartPoint::new(*x, *v), THETA_ORDER).map_err(quad_err)?;
        let (_, theta) = theta_tensor(&b, gas).map_err(quad_err)?;
        Ok(divergence(&b, &theta).map_err(quad_err)?.map(|d| d.value()).to_vec())
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmDensity {
    /// `density[i][j] = 𝒯ⁱⱼ = ∫ Θⁱⱼ dΣₓ⁺`
    pub density: [[f64; 4]; 4],
    pub error_estimates: [[f64; 4]; 4],
    /// `Tⁱⱼ = 𝒯ⁱⱼ / √|det a|` for Lorentzian models.
    pub lorentzian: Option<[[f64; 4]; 4]>,
}

pub fn em_density(
    model: &FinslerModel,
    gas: &KineticGas,
    x: &[f64; 4],
    quad: &QuadConfig,
) -> std::result::Result<EmDensity, QuadratureError> {
    let r = integrate_fiber(model, x, quad, |x, v| {
        let pt = ChartPoint::new(*x, *v);
        let b = GeometryBundle::new(model, &pt, TruncationOrder::new(0, 2)).map_err(quad_err)?;
        let phi = gas.phi_value(model, x, v).map_err(quad_err)?;
        let coeff = 0.5 * gas.mass * phi / b.l.value();
        let lower = b.xdot_lower().map(|j| j.value());
        let mut out = Vec::with_capacity(16);
        for i in 0..4 {
            for j in 0..4 {
                out.push(coeff * v[i] * lower[j]);
            }
        }
        Ok(out)
    })?;
    let grid = |v: &[f64]| -> [[f64; 4]; 4] { std::array::from_fn(|i| std::array::from_fn(|j| v[4 * i + j])) };
    let density = grid(&r.values);
    let lorentzian = match model.base_metric() {
        Some(metric) if model.is_lorentzian() => {
            let det: f64 = metric.diagonal(x).map_err(|e| quad_err(e.into()))?.iter().product();
            let root = det.abs().sqrt();
            Some(density.map(|row| row.map(|c| c / root)))
        }
        _ => None,
    };
    Ok(EmDensity {
        density,
        error_estimates: grid(&r.error_estimates),
        lorentzian,
    })
}

/// `|L|` threshold for dynamics entry points, as in the catalog.
pub fn null_threshold(model: &FinslerModel, pt: &ChartPoint) -> Result<f64> {
    Ok(EPS_DIV * model.magnitude_scale(&pt.x, &pt.v)?)
}

/// Liouville gas for the Schwarzschild chart: window in energy `p₀/F` and
/// angular momentum `p₃/F`.
pub fn schwarzschild_orbital_gas(mass: f64, energy: (f64, f64), angular: (f64, f64)) -> KineticGas {
    KineticGas::new(
        mass,
        Profile::MomentumBump {
            amplitude: 1.0,
            windows: vec![
                MomentumWindow {
                    coordinate: 0,
                    center: energy.0,
                    width: energy.1,
                },
                MomentumWindow {
                    coordinate: 3,
                    center: angular.0,
                    width: angular.1,
                },
            ],
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_model, presets};

    #[test]
    fn schwarzschild_vacuum() {
        let m = build_model(&presets::schwarzschild(1.0)).unwrap();
        let pt = ChartPoint::new([0.0, 6.0, 1.2, 0.3], [1.5, 0.1, 0.02, 0.03]);
        let e = vacuum_scalar_e(&m, &pt, TruncationOrder::default()).unwrap();
        assert!(e.abs() < 1e-6);
    }

    #[test]
    fn minkowski_theta_example() {
        let m = build_model(&presets::minkowski()).unwrap();
        // φ = 2 at the rest direction
        let gas = KineticGas::rest_bump(1.0, 2.0, 1.0);
        let t = em_scalar_and_theta(&m, &gas, &ChartPoint::new([0.0; 4], [1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(t.t_frak, 1.0);
        assert_eq!(t.theta[0][0], 1.0);
        assert_eq!(t.trace(), t.t_frak);
        assert!(t.theta_div.iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn orbital_gas_is_liouville() {
        let m = build_model(&presets::schwarzschild(1.0)).unwrap();
        let gas = schwarzschild_orbital_gas(1.0, (0.95, 0.1), (0.0, 4.0));
        let pt = ChartPoint::new([0.0, 6.0, 1.3, 0.2], [1.5, 0.3, 0.0, 0.05]);
        let b = GeometryBundle::new(&m, &pt, THETA_ORDER).unwrap();
        assert!(gas.phi_jet(&b).unwrap().value() > 0.0);
        assert!(liouville_residual(&m, &gas, &pt).unwrap().abs() < 1e-10);
        let bal = balance_at(&b, &gas).unwrap();
        assert!(bal.residual < 1e-10);
    }

    #[test]
    fn modulated_gas_balance() {
        let m = build_model(&presets::schwarzschild(1.0)).unwrap();
        let gas = KineticGas::new(
            1.0,
            Profile::RapidityBump {
                center_rapidity: 0.2,
                width: 1.0,
                amplitude: 1.0,
                x_modulation: Expr::add(vec![Expr::c(1.0), Expr::mul(vec![Expr::c(0.1), Expr::x(1)])]),
                observer: default_observer(),
            },
        );
        let pt = ChartPoint::new([0.0, 6.0, 1.3, 0.2], [1.3, 0.05, 0.01, 0.02]);
        let bal = theta_divergence_and_balance(&m, &gas, &pt).unwrap();
        assert!(bal.nabla_t.abs() > 1e-4);
        assert!(bal.residual < 1e-10, "{bal:?}");
    }
}
