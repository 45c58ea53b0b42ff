//! Integration of the geodesic equation `ẍⁱ + 2Gⁱ(x, ẋ) = 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{ChartPoint, FinslerModel, EPS_DIV};
use crate::geometry::{spray_coefficients, GeometryBundle, GeometryError};
use crate::jets::TruncationOrder;
use crate::report::{fmt_float, write_csv, CsvTable};

/// Jet depth used for `Gⁱ` inside the integrator: one x- and two
/// ẋ-derivatives of `L` are all the spray needs at value level.
pub const SPRAY_ORDER: TruncationOrder = TruncationOrder::new(1, 2);

pub const TRAJECTORY_SCHEMA: &str = "finsler-lab/trajectory/1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error("left the admissible domain at s = {}: {reason}", last.s)]
    LeftAdmissibleDomain { last: GeodesicState, reason: String },
    #[error("adaptive step underflow at s = {s}")]
    StepUnderflow { s: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = GeodesicError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub s: f64,
    pub x: [f64; 4],
    pub v: [f64; 4],
}

impl GeodesicState {
    pub fn new(x: [f64; 4], v: [f64; 4]) -> Self {
        Self { s: 0.0, x, v }
    }

    fn as_array(&self) -> [f64; 8] {
        std::array::from_fn(|i| if i < 4 { self.x[i] } else { self.v[i - 4] })
    }

    fn from_array(s: f64, y: &[f64; 8]) -> Self {
        Self {
            s,
            x: std::array::from_fn(|i| y[i]),
            v: std::array::from_fn(|i| y[i + 4]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rk45,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step for RK45.
    pub step: f64,
    /// RK45 local error tolerance.
    pub tol: f64,
    pub max_steps: usize,
    /// Stop once the parameter reaches this value.
    pub s_end: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            step: 0.01,
            tol: 1e-9,
            max_steps: 10_000,
            s_end: None,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64, max_steps: usize) -> Self {
        Self {
            step,
            max_steps,
            ..Self::default()
        }
    }

    pub fn rk45(tol: f64, s_end: f64) -> Self {
        Self {
            method: Method::Rk45,
            tol,
            s_end: Some(s_end),
            max_steps: 1_000_000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.tol > 0.0) {
            return Err(GeodesicError::InvalidConfig(format!(
                "step = {} and tol = {} must be positive",
                self.step, self.tol
            )));
        }
        Ok(())
    }
}

/// Spray coefficients `Gⁱ` at value level.
pub fn spray(model: &FinslerModel, x: &[f64; 4], v: &[f64; 4]) -> Result<[f64; 4], GeometryError> {
    let b = GeometryBundle::new(model, &ChartPoint::new(*x, *v), SPRAY_ORDER)?;
    let g = spray_coefficients(&b.l, &b.g_inv, &b.xdot)?;
    Ok(g.map(|j| j.value()))
}

fn rhs(model: &FinslerModel, y: &[f64; 8]) -> Result<[f64; 8], GeometryError> {
    let x = std::array::from_fn(|i| y[i]);
    let v = std::array::from_fn(|i| y[i + 4]);
    let g = spray(model, &x, &v)?;
    Ok(std::array::from_fn(|i| if i < 4 { y[i + 4] } else { -2.0 * g[i - 4] }))
}

fn axpy(y: &[f64; 8], h: f64, k: &[f64; 8]) -> [f64; 8] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

fn rk4_step(model: &FinslerModel, y: &[f64; 8], h: f64) -> Result<[f64; 8], GeometryError> {
    let k1 = rhs(model, y)?;
    let k2 = rhs(model, &axpy(y, h / 2.0, &k1))?;
    let k3 = rhs(model, &axpy(y, h / 2.0, &k2))?;
    let k4 = rhs(model, &axpy(y, h, &k3))?;
    Ok(std::array::from_fn(|i| {
        y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step: fifth-order solution and scaled error norm.
fn dp_step(model: &FinslerModel, y: &[f64; 8], h: f64, tol: f64) -> Result<([f64; 8], f64), GeometryError> {
    debug_assert_eq!(DP_C.len(), 7);
    let mut k = [[0.0; 8]; 7];
    for stage in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = DP_A[stage][j];
            if a != 0.0 {
                ys = axpy(&ys, h * a, kj);
            }
        }
        k[stage] = rhs(model, &ys)?;
    }
    let mut y5 = *y;
    let mut err = 0.0f64;
    for i in 0..8 {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += DP_B5[s] * k[s][i];
            d4 += DP_B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let sc = tol * (1.0 + y[i].abs().max(y5[i].abs()));
        err = err.max((h * (d5 - d4)).abs() / sc);
    }
    Ok((y5, err))
}

/// A sampled geodesic together with `L` at each state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<GeodesicState>,
    pub l_values: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &GeodesicState {
        self.states.last().expect("trajectories are nonempty")
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        let header = ["s", "x0", "x1", "x2", "x3", "v0", "v1", "v2", "v3", "L"];
        let rows = self.states.iter().zip(&self.l_values).map(|(st, l)| {
            std::iter::once(st.s)
                .chain(st.x)
                .chain(st.v)
                .chain([*l])
                .map(fmt_float)
                .collect()
        });
        write_csv(out, TRAJECTORY_SCHEMA, &header, rows)
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("ASCII output")
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let t = CsvTable::parse(text)?;
        if t.schema != TRAJECTORY_SCHEMA {
            return Err(format!("unexpected schema `{}`", t.schema));
        }
        let mut states = Vec::with_capacity(t.rows.len());
        let mut l_values = Vec::with_capacity(t.rows.len());
        for r in 0..t.rows.len() {
            let f = |n: &str| t.float(r, n);
            states.push(GeodesicState {
                s: f("s")?,
                x: [f("x0")?, f("x1")?, f("x2")?, f("x3")?],
                v: [f("v0")?, f("v1")?, f("v2")?, f("v3")?],
            });
            l_values.push(f("L")?);
        }
        Ok(Self { states, l_values })
    }
}

fn check_state(model: &FinslerModel, st: &GeodesicState) -> std::result::Result<f64, String> {
    let l = model.lagrangian_value(&st.x, &st.v).map_err(|e| e.to_string())?;
    let scale = model.magnitude_scale(&st.x, &st.v).map_err(|e| e.to_string())?;
    if !(l.abs() > EPS_DIV * scale) || !st.x.iter().chain(&st.v).all(|c| c.is_finite()) {
        return Err(format!("null or non-finite state (L = {l:e})"));
    }
    Ok(l)
}

/// Integrates from `state0` until `max_steps`, `s_end`, or a domain exit.
pub fn integrate_geodesic(
    model: &FinslerModel,
    state0: GeodesicState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let leave = |last: &GeodesicState, reason: String| GeodesicError::LeftAdmissibleDomain {
        last: *last,
        reason,
    };
    let l0 = check_state(model, &state0).map_err(|r| leave(&state0, r))?;
    let mut traj = Trajectory {
        states: vec![state0],
        l_values: vec![l0],
    };
    let mut y = state0.as_array();
    let mut s = state0.s;
    let mut h = cfg.step;
    let s_end = cfg.s_end.unwrap_or(f64::INFINITY);
    let mut steps = 0;
    while steps < cfg.max_steps && s < s_end {
        let last = *traj.last();
        let h_try = h.min(s_end - s);
        let (y_new, accepted, next_h) = match cfg.method {
            Method::Rk4 => {
                let y_new = rk4_step(model, &y, h_try).map_err(|e| leave(&last, e.to_string()))?;
                (y_new, true, h)
            }
            Method::Rk45 => {
                let (y_new, err) = dp_step(model, &y, h_try, cfg.tol).map_err(|e| leave(&last, e.to_string()))?;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                (y_new, err <= 1.0, h_try * factor)
            }
        };
        if accepted {
            let st = GeodesicState::from_array(s + h_try, &y_new);
            let l = check_state(model, &st).map_err(|r| leave(&last, r))?;
            s += h_try;
            y = y_new;
            traj.states.push(st);
            traj.l_values.push(l);
            steps += 1;
        }
        h = next_h;
        if h < 1e-14 * (1.0 + s.abs()) {
            return Err(GeodesicError::StepUnderflow { s });
        }
    }
    Ok(traj)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumDrift {
    /// Cyclic coordinate `k` whose momentum `½∂̇ₖL` is monitored.
    pub coordinate: usize,
    pub initial: f64,
    pub max_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub steps: usize,
    pub l_initial: f64,
    pub max_l_drift: f64,
    pub momenta: Vec<MomentumDrift>,
}

/// `max |L(s) − L(0)|` plus the drift of the momenta of cyclic coordinates.
pub fn geodesic_invariants(traj: &Trajectory, model: &FinslerModel) -> Result<DriftReport, GeometryError> {
    let l0 = traj.l_values[0];
    let max_l_drift = traj.l_values.iter().map(|l| (l - l0).abs()).fold(0.0, f64::max);
    let cyclic = model.cyclic_coordinates();
    let mut momenta: Vec<MomentumDrift> = Vec::new();
    let p0 = model.momenta(&traj.states[0].x, &traj.states[0].v)?;
    for &k in &cyclic {
        momenta.push(MomentumDrift {
            coordinate: k,
            initial: p0[k],
            max_drift: 0.0,
        });
    }
    for st in &traj.states[1..] {
        let p = model.momenta(&st.x, &st.v)?;
        for m in &mut momenta {
            m.max_drift = m.max_drift.max((p[m.coordinate] - m.initial).abs());
        }
    }
    Ok(DriftReport {
        steps: traj.states.len() - 1,
        l_initial: l0,
        max_l_drift,
        momenta,
    })
}

/// Initial state of the circular equatorial Schwarzschild orbit at radius
/// `r`, normalized to `L = 1`.
pub fn schwarzschild_circular_orbit(mass: f64, r: f64) -> GeodesicState {
    let root = (1.0 - 3.0 * mass / r).sqrt();
    let t_dot = 1.0 / root;
    let phi_dot = (mass / r.powi(3)).sqrt() / root;
    GeodesicState::new(
        [0.0, r, std::f64::consts::FRAC_PI_2, 0.0],
        [t_dot, 0.0, 0.0, phi_dot],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_model, presets};

    #[test]
    fn minkowski_straight_line() {
        let m = build_model(&presets::minkowski()).unwrap();
        let n = 0.91f64.sqrt();
        let v0 = [1.0 / n, 0.3 / n, 0.0, 0.0];
        let traj = integrate_geodesic(&m, GeodesicState::new([0.0; 4], v0), &IntegratorConfig::rk4(0.01, 200)).unwrap();
        let last = traj.last();
        for i in 0..4 {
            assert!((last.x[i] - last.s * v0[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn circular_orbit_stays_circular() {
        let m = build_model(&presets::schwarzschild(1.0)).unwrap();
        let st = schwarzschild_circular_orbit(1.0, 10.0);
        assert!((m.lagrangian_value(&st.x, &st.v).unwrap() - 1.0).abs() < 1e-14);
        let traj = integrate_geodesic(&m, st, &IntegratorConfig::rk4(0.05, 400)).unwrap();
        assert!((traj.last().x[1] - 10.0).abs() < 1e-8);
        let d = geodesic_invariants(&traj, &m).unwrap();
        assert_eq!(d.momenta.iter().map(|p| p.coordinate).collect::<Vec<_>>(), vec![0, 3]);
        assert!(d.max_l_drift < 1e-10);
    }

    #[test]
    fn rk45_matches_rk4() {
        let m = build_model(&presets::randers_magnetic()).unwrap();
        let st = GeodesicState::new([0.0; 4], [1.0, 0.2, 0.1, 0.0]);
        let a = integrate_geodesic(&m, st, &IntegratorConfig { s_end: Some(2.0), ..IntegratorConfig::rk4(0.01, 1000) }).unwrap();
        let b = integrate_geodesic(&m, st, &IntegratorConfig::rk45(1e-11, 2.0)).unwrap();
        assert!((a.last().s - 2.0).abs() < 1e-12 && (b.last().s - 2.0).abs() < 1e-12);
        for i in 0..4 {
            assert!((a.last().x[i] - b.last().x[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_roundtrip() {
        let m = build_model(&presets::randers(0.3)).unwrap();
        let traj = integrate_geodesic(&m, GeodesicState::new([0.0; 4], [1.0, 0.1, 0.0, 0.0]), &IntegratorConfig::rk4(0.1, 5)).unwrap();
        assert_eq!(Trajectory::from_csv(&traj.to_csv()).unwrap(), traj);
    }
}
