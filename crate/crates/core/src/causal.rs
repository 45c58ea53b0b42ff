//! Numerical probes of the causal structure: admissibility, signature,
//! timelike-cone membership, observer normalization and cone convexity.

use nalgebra::{Matrix4, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{ChartPoint, FinslerModel, EPS_DIV};
use crate::geometry::{det_tolerance, GeometryBundle, GeometryError};
use crate::jets::TruncationOrder;

/// Points sampled along the seed-to-direction segment.
pub const N_PATH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CausalError {
    #[error("seed direction {0:?} is not timelike")]
    SeedNotTimelike([f64; 4]),
    #[error("direction {0:?} is not timelike")]
    NotTimelike([f64; 4]),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T, E = CausalError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Timelike,
    /// Non-null with nondegenerate `g` but outside the timelike cone.
    SpacelikeSigned,
    NullAdjacent,
    Inadmissible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub det_g: f64,
    /// Eigenvalue signs of `g`, largest eigenvalue first.
    pub signature: [i8; 4],
    pub is_admissible: bool,
    /// `None` where `L` itself is undefined (non-smooth null set of `a`).
    pub l_value: Option<f64>,
    pub region: Region,
}

const LORENTZIAN: [i8; 4] = [1, -1, -1, -1];

/// Eigenvalue signs, sorted descending.
pub fn signature(g: &Matrix4<f64>) -> [i8; 4] {
    let mut ev: Vec<f64> = SymmetricEigen::new(*g).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    std::array::from_fn(|i| {
        if ev[i] > 0.0 {
            1
        } else if ev[i] < 0.0 {
            -1
        } else {
            0
        }
    })
}

fn metric_order() -> TruncationOrder {
    TruncationOrder::new(0, 2)
}

pub fn admissibility_report(model: &FinslerModel, pt: &ChartPoint) -> AdmissibilityReport {
    let inadmissible = |l_value: Option<f64>, region: Region| AdmissibilityReport {
        det_g: 0.0,
        signature: [0; 4],
        is_admissible: false,
        l_value,
        region,
    };
    let l_value = model.lagrangian_value(&pt.x, &pt.v).ok();
    let scale = model.magnitude_scale(&pt.x, &pt.v).unwrap_or(f64::NAN);
    if !scale.is_finite() {
        return inadmissible(l_value, Region::Inadmissible);
    }
    let l = match l_value {
        Some(l) if l.abs() > EPS_DIV * scale => l,
        _ => return inadmissible(l_value, Region::NullAdjacent),
    };
    let b = match GeometryBundle::new(model, pt, metric_order()) {
        Ok(b) => b,
        Err(GeometryError::DegenerateHessian { det, .. }) => {
            return AdmissibilityReport {
                det_g: det,
                ..inadmissible(l_value, Region::Inadmissible)
            }
        }
        Err(_) => return inadmissible(l_value, Region::NullAdjacent),
    };
    let g = b.g_value();
    let det_g = g.determinant();
    let sig = signature(&g);
    let is_admissible = det_g.abs() > det_tolerance(&g);
    let region = if !is_admissible {
        Region::Inadmissible
    } else if l > 0.0 && sig == LORENTZIAN {
        Region::Timelike
    } else {
        Region::SpacelikeSigned
    };
    AdmissibilityReport {
        det_g,
        signature: sig,
        is_admissible,
        l_value,
        region,
    }
}

/// `L > 0` with Lorentzian `g` at `(x, v)`.
pub fn is_pointwise_timelike(model: &FinslerModel, x: &[f64; 4], v: &[f64; 4]) -> bool {
    match model.lagrangian_value(x, v) {
        Ok(l) if l > 0.0 => {}
        _ => return false,
    }
    match GeometryBundle::new(model, &ChartPoint::new(*x, *v), metric_order()) {
        Ok(b) => signature(&b.g_value()) == LORENTZIAN,
        Err(_) => false,
    }
}

fn unit_rep(model: &FinslerModel, x: &[f64; 4], v: &[f64; 4]) -> Option<[f64; 4]> {
    let l = model.lagrangian_value(x, v).ok()?;
    (l > 0.0).then(|| v.map(|c| c / l.sqrt()))
}

/// Path-connectivity proxy for `v ∈ 𝒯ₓ`: the segment from the seed to `v`,
/// both scaled to `L = 1`, stays timelike at `N_PATH` sample points.
pub fn timelike_membership(model: &FinslerModel, x: &[f64; 4], v: &[f64; 4], seed: &[f64; 4]) -> Result<bool> {
    let s = unit_rep(model, x, seed)
        .filter(|s| is_pointwise_timelike(model, x, s))
        .ok_or(CausalError::SeedNotTimelike(*seed))?;
    let Some(u) = unit_rep(model, x, v) else {
        return Ok(false);
    };
    for k in 0..=N_PATH {
        let t = k as f64 / N_PATH as f64;
        let w: [f64; 4] = std::array::from_fn(|i| (1.0 - t) * s[i] + t * u[i]);
        if !is_pointwise_timelike(model, x, &w) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Representative of the ray of `v` on the observer shell `L = 1`.
pub fn normalize_observer(model: &FinslerModel, x: &[f64; 4], v: &[f64; 4]) -> Result<[f64; 4]> {
    let l = model
        .lagrangian_value(x, v)
        .map_err(|e| CausalError::Geometry(e.into()))?;
    if !(l > 0.0) || !is_pointwise_timelike(model, x, v) {
        return Err(CausalError::NotTimelike(*v));
    }
    if (l - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Ok(*v);
    }
    let mut alpha = 1.0 / l.sqrt();
    for _ in 0..4 {
        let w = v.map(|c| alpha * c);
        let lw = model
            .lagrangian_value(x, &w)
            .map_err(|e| CausalError::Geometry(e.into()))?;
        let step = (lw - 1.0) * alpha / (2.0 * lw);
        alpha -= step;
        if step.abs() <= f64::EPSILON * alpha {
            break;
        }
    }
    Ok(v.map(|c| alpha * c))
}

/// Frame `{e₀, e₁, e₂, e₃}` at `x`: `e₀` the unit seed, the others
/// `g(x, e₀)`-orthonormal with `g(e_a, e_a) = −1`.
pub fn observer_frame(model: &FinslerModel, x: &[f64; 4]) -> Result<[[f64; 4]; 4]> {
    let e0 = normalize_observer(model, x, &model.seed)
        .map_err(|_| CausalError::SeedNotTimelike(model.seed))?;
    let b = GeometryBundle::new(model, &ChartPoint::new(*x, e0), metric_order())?;
    let g = b.g_value();
    let ip = |a: &[f64; 4], c: &[f64; 4]| -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += g[(i, j)] * a[i] * c[j];
            }
        }
        s
    };
    let mut frame = vec![e0];
    for k in 0..4 {
        if frame.len() == 4 {
            break;
        }
        let mut w = [0.0; 4];
        w[k] = 1.0;
        for (n, e) in frame.iter().enumerate() {
            let sign = if n == 0 { 1.0 } else { -1.0 };
            let c = ip(&w, e) * sign;
            for i in 0..4 {
                w[i] -= c * e[i];
            }
        }
        let norm = ip(&w, &w);
        if norm < -1e-8 {
            let s = (-norm).sqrt();
            frame.push(w.map(|c| c / s));
        }
    }
    if frame.len() != 4 {
        return Err(CausalError::SeedNotTimelike(model.seed));
    }
    Ok([frame[0], frame[1], frame[2], frame[3]])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeViolation {
    pub u: [f64; 4],
    pub v: [f64; 4],
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeProbe {
    pub x: [f64; 4],
    pub seed_direction: [f64; 4],
    pub samples: usize,
    pub rng_seed: u64,
    pub failures: Vec<ConeViolation>,
}

/// Random future timelike direction with rapidity below `chi_max` in the
/// observer frame; `None` if it is not in the cone.
fn sample_direction(
    model: &FinslerModel,
    x: &[f64; 4],
    frame: &[[f64; 4]; 4],
    chi_max: f64,
    rng: &mut impl Rng,
) -> Option<[f64; 4]> {
    let chi = rng.gen_range(0.0..chi_max);
    let cos_t: f64 = rng.gen_range(-1.0..1.0);
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    let sin_t = (1.0 - cos_t * cos_t).sqrt();
    let m = [sin_t * phi.cos(), sin_t * phi.sin(), cos_t];
    let n: [f64; 4] = std::array::from_fn(|i| {
        chi.cosh() * frame[0][i] + chi.sinh() * (0..3).map(|a| m[a] * frame[a + 1][i]).sum::<f64>()
    });
    timelike_membership(model, x, &n, &model.seed)
        .ok()
        .filter(|&ok| ok)
        .map(|_| n)
}

/// Checks `(1−α)u + αv ∈ 𝒯ₓ` for `α ∈ {0.1, …, 0.9}` over random pairs.
pub fn convexity_probe(model: &FinslerModel, x: &[f64; 4], n_pairs: usize) -> Result<ConeProbe> {
    convexity_probe_seeded(model, x, n_pairs, 0)
}

pub fn convexity_probe_seeded(
    model: &FinslerModel,
    x: &[f64; 4],
    n_pairs: usize,
    rng_seed: u64,
) -> Result<ConeProbe> {
    let frame = observer_frame(model, x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut failures = Vec::new();
    let mut samples = 0;
    let mut attempts = 0;
    while samples < n_pairs && attempts < 20 * n_pairs.max(1) {
        attempts += 1;
        let Some(u) = sample_direction(model, x, &frame, 2.5, &mut rng) else {
            continue;
        };
        let Some(v) = sample_direction(model, x, &frame, 2.5, &mut rng) else {
            continue;
        };
        samples += 1;
        for k in 1..=9 {
            let alpha = k as f64 / 10.0;
            let w: [f64; 4] = std::array::from_fn(|i| (1.0 - alpha) * u[i] + alpha * v[i]);
            if !timelike_membership(model, x, &w, &model.seed)? {
                failures.push(ConeViolation { u, v, alpha });
            }
        }
    }
    Ok(ConeProbe {
        x: *x,
        seed_direction: model.seed,
        samples,
        rng_seed,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_model, presets};

    #[test]
    fn minkowski_regions() {
        let m = build_model(&presets::minkowski()).unwrap();
        let r = admissibility_report(&m, &ChartPoint::new([0.0; 4], [1.0, 0.0, 0.0, 0.0]));
        assert_eq!(r.region, Region::Timelike);
        assert_eq!(r.signature, LORENTZIAN);
        assert!((r.det_g + 1.0).abs() < 1e-15);
        let r = admissibility_report(&m, &ChartPoint::new([0.0; 4], [1.0, 1.0, 0.0, 0.0]));
        assert_eq!(r.region, Region::NullAdjacent);
    }

    #[test]
    fn randers_spacelike() {
        let m = build_model(&presets::randers(0.3)).unwrap();
        let r = admissibility_report(&m, &ChartPoint::new([0.0; 4], [0.0, 1.0, 0.0, 0.0]));
        assert!(r.l_value.unwrap() < 0.0);
        assert_eq!(r.region, Region::SpacelikeSigned);
    }

    #[test]
    fn membership_and_normalization() {
        let m = build_model(&presets::minkowski()).unwrap();
        let x = [0.0; 4];
        let seed = m.seed;
        assert!(timelike_membership(&m, &x, &[2.0, 1.0, 0.0, 0.0], &seed).unwrap());
        assert!(!timelike_membership(&m, &x, &[1.0, 2.0, 0.0, 0.0], &seed).unwrap());
        assert!(!timelike_membership(&m, &x, &[-1.0, 0.0, 0.0, 0.0], &seed).unwrap());
        assert_eq!(normalize_observer(&m, &x, &[2.0, 0.0, 0.0, 0.0]).unwrap(), [1.0, 0.0, 0.0, 0.0]);
        let n = normalize_observer(&m, &x, &[2.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((n[0] - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        let r = build_model(&presets::randers(0.3)).unwrap();
        let n = normalize_observer(&r, &x, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((n[0] - 1.0 / 1.3).abs() < 1e-15);
    }

    #[test]
    fn frame_is_orthonormal() {
        let m = build_model(&presets::randers(0.3)).unwrap();
        let f = observer_frame(&m, &[0.0; 4]).unwrap();
        let b = GeometryBundle::new(&m, &ChartPoint::new([0.0; 4], f[0]), metric_order()).unwrap();
        let g = b.g_value();
        for a in 0..4 {
            for c in 0..4 {
                let s: f64 = (0..4)
                    .flat_map(|i| (0..4).map(move |j| (i, j)))
                    .map(|(i, j)| g[(i, j)] * f[a][i] * f[c][j])
                    .sum();
                let expect = if a != c { 0.0 } else if a == 0 { 1.0 } else { -1.0 };
                assert!((s - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_convexity_probe() {
        let m = build_model(&presets::randers(0.3)).unwrap();
        let p = convexity_probe(&m, &[0.0; 4], 20).unwrap();
        assert_eq!(p.samples, 20);
        assert!(p.failures.is_empty());
    }
}
