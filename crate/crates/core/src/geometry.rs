//! The geometric tower at one chart point, built from the jet of `L`.
//!
//! Stages are computed on first use: fundamental tensors are always present,
//! the spray, curvature and Chern-Rund/Landsberg stages are filled lazily.
//! With `L` truncated at `(kx, kv)` the stages carry these orders:
//!
//! | quantity            | order           |
//! |---------------------|-----------------|
//! | `g_ij`, `gⁱʲ`       | `(kx, kv−2)`    |
//! | `C_ijk`             | `(kx, kv−3)`    |
//! | `Gⁱ`                | `(kx−1, kv−2)`  |
//! | `Gⁱⱼ`               | `(kx−1, kv−3)`  |
//! | `Rⁱⱼₖ`, `R₀`        | `(kx−2, kv−4)`  |
//! | `Γⁱⱼₖ`              | `(kx−1, kv−3)`  |
//! | `Pⁱⱼₖ`, `Pᵢ`        | `(kx−1, kv−4)`  |
//!
//! `R₀` follows the sign `R₀ = L⁻¹ Rⁱᵢₖ ẋᵏ`, opposite to Bao–Chern–Shen.

use std::sync::OnceLock;

use nalgebra::Matrix4;
use thiserror::Error;

use crate::catalog::{CatalogError, ChartPoint, FinslerModel, EPS_DIV};
use crate::jets::{det4, invert4, Jet, JetError, JetMatrix4, TruncationOrder};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("null direction: |L| = {value:e} not above {threshold:e}")]
    NullDirection { value: f64, threshold: f64 },
    #[error("degenerate Hessian: det g = {det:e} (tolerance {tol:e})")]
    DegenerateHessian { det: f64, tol: f64 },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;

pub type Rank3 = [[[Jet; 4]; 4]; 4];

/// Nondegeneracy tolerance: `1e-10` times the Hadamard bound `Π‖row‖`.
pub fn det_tolerance(g: &Matrix4<f64>) -> f64 {
    1e-10 * g.row_iter().map(|r| r.norm()).product::<f64>()
}

fn mat_from_fn(f: impl Fn(usize, usize) -> Jet) -> JetMatrix4 {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

fn rank3_from_fn(f: impl Fn(usize, usize, usize) -> Jet) -> Rank3 {
    std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| f(i, j, k))))
}

fn sum4(f: impl Fn(usize) -> Jet) -> Jet {
    let mut acc = f(0);
    for m in 1..4 {
        acc = acc + f(m);
    }
    acc
}

/// Second v-derivatives packed as a symmetric matrix, scaled by `factor`.
fn v_hessian(first: &[Jet; 4], factor: f64) -> Result<JetMatrix4> {
    let mut upper: Vec<Vec<Option<Jet>>> = vec![vec![None; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            upper[i][j] = Some(first[i].d_v(j)?.scale(factor));
        }
    }
    Ok(mat_from_fn(|i, j| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        upper[a][b].clone().unwrap()
    }))
}

/// `Gⁱ = ¼ gⁱʰ (∂̇ₕ∂ⱼL ẋʲ − ∂ₕL)`.
pub fn spray_coefficients(l: &Jet, g_inv: &JetMatrix4, xdot: &[Jet; 4]) -> Result<[Jet; 4]> {
    let dx: Vec<Jet> = (0..4).map(|j| l.d_x(j)).collect::<Result<_, _>>()?;
    let contracted = sum4(|j| dx[j].mul(&xdot[j]));
    let mut a: Vec<Jet> = Vec::with_capacity(4);
    for h in 0..4 {
        // ∂̇ₕ(ẋʲ∂ⱼL) = ẋʲ∂̇ₕ∂ⱼL + ∂ₕL
        a.push(contracted.d_v(h)? - dx[h].scale(2.0));
    }
    Ok(std::array::from_fn(|i| {
        sum4(|h| g_inv[i][h].mul(&a[h])).scale(0.25)
    }))
}

#[derive(Clone, Debug)]
pub struct Spray {
    /// `Gⁱ`
    pub g: [Jet; 4],
    /// `n[i][j] = Gⁱⱼ = ∂̇ⱼGⁱ`
    pub n: JetMatrix4,
}

#[derive(Clone, Debug)]
pub struct Curvature {
    /// `r[i][j][k] = Rⁱⱼₖ`
    pub r: Rank3,
    /// `L R₀ = Rⁱᵢₖ ẋᵏ`
    pub l_r0: Jet,
    pub r0: Jet,
}

#[derive(Clone, Debug)]
pub struct ChernRund {
    /// `gamma[i][j][k] = Γⁱⱼₖ`
    pub gamma: Rank3,
    /// `p[i][j][k] = Pⁱⱼₖ`
    pub p: Rank3,
    /// `Pᵢ = Pʲᵢⱼ`
    pub p_trace: [Jet; 4],
}

#[derive(Clone, Debug)]
pub struct Cartan {
    pub c: Rank3,
    /// `Cᵢ = gʲᵏ C_ijk`
    pub trace: [Jet; 4],
}

/// All geometric objects at one chart point.
#[derive(Debug)]
pub struct GeometryBundle {
    pub point: ChartPoint,
    /// Truncation order of `L`.
    pub order: TruncationOrder,
    /// `ε = sign L`.
    pub epsilon: f64,
    pub l: Jet,
    /// Velocity seeds `ẋⁱ` at the order of `L`.
    pub xdot: [Jet; 4],
    pub g: JetMatrix4,
    pub g_inv: JetMatrix4,
    pub g_inv_value: Matrix4<f64>,
    pub det_g: Jet,
    pub f: Jet,
    /// `ωᵢ = F_{·i}`
    pub omega: [Jet; 4],
    /// `lⁱ = ẋⁱ/F`
    pub ell: [Jet; 4],
    cartan: OnceLock<Result<Cartan>>,
    spray: OnceLock<Result<Spray>>,
    curvature: OnceLock<Result<Curvature>>,
    chern_rund: OnceLock<Result<ChernRund>>,
}

fn lazy<T>(cell: &OnceLock<Result<T>>, init: impl FnOnce() -> Result<T>) -> Result<&T> {
    cell.get_or_init(init).as_ref().map_err(Clone::clone)
}

impl GeometryBundle {
    /// Fundamental tensors at `pt`; later stages are computed on demand.
    pub fn new(model: &FinslerModel, pt: &ChartPoint, order: TruncationOrder) -> Result<Self> {
        if order.max_v_order < 2 {
            return Err(JetError::OrderExceeded("the metric needs ẋ-order ≥ 2".into()).into());
        }
        let l = model.lagrangian_jet(pt, order)?;
        let (_, xdot) = pt.seeds(order);
        let threshold = EPS_DIV * model.magnitude_scale(&pt.x, &pt.v)?;
        Self::from_lagrangian(*pt, l, xdot, threshold)
    }

    /// Builds the bundle from an already computed jet of `L`.
    pub fn from_lagrangian(
        point: ChartPoint,
        l: Jet,
        xdot: [Jet; 4],
        null_threshold: f64,
    ) -> Result<Self> {
        let order = l.order();
        let l0 = l.value();
        if !(l0.abs() > null_threshold) {
            return Err(GeometryError::NullDirection {
                value: l0,
                threshold: null_threshold,
            });
        }
        let epsilon = l0.signum();
        let dl: [Jet; 4] = std::array::from_fn(|i| l.d_v(i).expect("v-order checked"));
        let g = v_hessian(&dl, 0.5)?;
        let g0 = crate::jets::value_matrix(&g);
        let det0 = g0.determinant();
        let tol = det_tolerance(&g0);
        if !(det0.abs() > tol) {
            return Err(GeometryError::DegenerateHessian { det: det0, tol });
        }
        let g_inv = invert4(&g).map_err(|_| GeometryError::DegenerateHessian { det: det0, tol })?;
        let g_inv_value = crate::jets::value_matrix(&g_inv);
        let det_g = det4(&g);
        let f = l.scale(epsilon).checked_sqrt(null_threshold)?;
        let omega: [Jet; 4] = std::array::from_fn(|i| f.d_v(i).expect("v-order checked"));
        let inv_f = f.checked_recip(null_threshold.sqrt())?;
        let ell = std::array::from_fn(|i| xdot[i].mul(&inv_f));
        Ok(Self {
            point,
            order,
            epsilon,
            l,
            xdot,
            g,
            g_inv,
            g_inv_value,
            det_g,
            f,
            omega,
            ell,
            cartan: OnceLock::new(),
            spray: OnceLock::new(),
            curvature: OnceLock::new(),
            chern_rund: OnceLock::new(),
        })
    }

    pub fn g_value(&self) -> Matrix4<f64> {
        crate::jets::value_matrix(&self.g)
    }

    pub fn cartan(&self) -> Result<&Cartan> {
        lazy(&self.cartan, || {
            let mut c: Vec<Option<Jet>> = vec![None; 64];
            for i in 0..4 {
                for j in i..4 {
                    for k in j..4 {
                        c[i * 16 + j * 4 + k] = Some(self.g[i][j].d_v(k)?.scale(0.5));
                    }
                }
            }
            let c = rank3_from_fn(|i, j, k| {
                let mut s = [i, j, k];
                s.sort_unstable();
                c[s[0] * 16 + s[1] * 4 + s[2]].clone().unwrap()
            });
            let trace = std::array::from_fn(|i| {
                sum4(|j| sum4(|k| self.g_inv[j][k].mul(&c[i][j][k])))
            });
            Ok(Cartan { c, trace })
        })
    }

    pub fn spray(&self) -> Result<&Spray> {
        lazy(&self.spray, || {
            let g = spray_coefficients(&self.l, &self.g_inv, &self.xdot)?;
            let mut n: Vec<Vec<Jet>> = Vec::with_capacity(4);
            for gi in &g {
                n.push((0..4).map(|j| gi.d_v(j)).collect::<Result<_, _>>()?);
            }
            Ok(Spray {
                n: mat_from_fn(|i, j| n[i][j].clone()),
                g,
            })
        })
    }

    /// Horizontal derivative `δₖT = ∂ₖT − Gᵐₖ ∂̇ₘT` of a scalar jet.
    pub fn delta(&self, t: &Jet, k: usize) -> Result<Jet> {
        let n = &self.spray()?.n;
        let mut out = t.d_x(k)?;
        for m in 0..4 {
            out = out - n[m][k].mul(&t.d_v(m)?);
        }
        Ok(out)
    }

    pub fn curvature(&self) -> Result<&Curvature> {
        lazy(&self.curvature, || {
            let n = &self.spray()?.n;
            let mut dn: Vec<Jet> = Vec::with_capacity(64);
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        dn.push(self.delta(&n[i][j], k)?);
                    }
                }
            }
            let at = |i: usize, j: usize, k: usize| &dn[i * 16 + j * 4 + k];
            let r = rank3_from_fn(|i, j, k| at(i, j, k) - at(i, k, j));
            let l_r0 = sum4(|i| sum4(|k| r[i][i][k].mul(&self.xdot[k])));
            let r0 = l_r0.checked_div(&self.l, 0.0)?;
            Ok(Curvature { r, l_r0, r0 })
        })
    }

    pub fn chern_rund(&self) -> Result<&ChernRund> {
        lazy(&self.chern_rund, || {
            // dg[k][h][j] = δₖ g_hj
            let mut dg: Vec<Vec<Vec<Option<Jet>>>> = vec![vec![vec![None; 4]; 4]; 4];
            for k in 0..4 {
                for h in 0..4 {
                    for j in h..4 {
                        let d = self.delta(&self.g[h][j], k)?;
                        dg[k][j][h] = Some(d.clone());
                        dg[k][h][j] = Some(d);
                    }
                }
            }
            let dg = |k: usize, h: usize, j: usize| dg[k][h][j].as_ref().unwrap();
            let mut lower: Vec<Option<Jet>> = vec![None; 64];
            for h in 0..4 {
                for j in 0..4 {
                    for k in j..4 {
                        let v = (dg(k, h, j) + dg(j, h, k) - dg(h, j, k)).scale(0.5);
                        lower[h * 16 + k * 4 + j] = Some(v.clone());
                        lower[h * 16 + j * 4 + k] = Some(v);
                    }
                }
            }
            let mut gamma_upper: Vec<Option<Jet>> = vec![None; 64];
            for i in 0..4 {
                for j in 0..4 {
                    for k in j..4 {
                        let v = sum4(|h| self.g_inv[i][h].mul(lower[h * 16 + j * 4 + k].as_ref().unwrap()));
                        gamma_upper[i * 16 + k * 4 + j] = Some(v.clone());
                        gamma_upper[i * 16 + j * 4 + k] = Some(v);
                    }
                }
            }
            let gamma = rank3_from_fn(|i, j, k| gamma_upper[i * 16 + j * 4 + k].clone().unwrap());
            let n = &self.spray()?.n;
            let mut p_flat: Vec<Option<Jet>> = vec![None; 64];
            for i in 0..4 {
                for j in 0..4 {
                    for k in j..4 {
                        let v = n[i][j].d_v(k)? - &gamma[i][j][k];
                        p_flat[i * 16 + k * 4 + j] = Some(v.clone());
                        p_flat[i * 16 + j * 4 + k] = Some(v);
                    }
                }
            }
            let p = rank3_from_fn(|i, j, k| p_flat[i * 16 + j * 4 + k].clone().unwrap());
            let p_trace = std::array::from_fn(|i| sum4(|j| p[j][i][j].clone()));
            Ok(ChernRund { gamma, p, p_trace })
        })
    }
}

/// Component tensor with `upper` contravariant then `lower` covariant
/// indices, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DTensor {
    pub upper: usize,
    pub lower: usize,
    pub comps: Vec<Jet>,
}

fn flat(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * 4 + i)
}

fn unflat(mut p: usize, rank: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in idx.iter_mut().rev() {
        *slot = p % 4;
        p /= 4;
    }
    idx
}

impl DTensor {
    pub fn from_fn(upper: usize, lower: usize, f: impl Fn(&[usize]) -> Jet) -> Self {
        let rank = upper + lower;
        let comps = (0..4usize.pow(rank as u32))
            .map(|p| f(&unflat(p, rank)))
            .collect();
        Self { upper, lower, comps }
    }

    pub fn scalar(j: Jet) -> Self {
        Self {
            upper: 0,
            lower: 0,
            comps: vec![j],
        }
    }

    pub fn vector(v: &[Jet; 4]) -> Self {
        Self::from_fn(1, 0, |i| v[i[0]].clone())
    }

    pub fn covector(w: &[Jet; 4]) -> Self {
        Self::from_fn(0, 1, |i| w[i[0]].clone())
    }

    pub fn matrix(m: &JetMatrix4, upper: usize) -> Self {
        Self::from_fn(upper, 2 - upper, |i| m[i[0]][i[1]].clone())
    }

    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.comps[flat(idx)]
    }

    pub fn values(&self) -> Vec<f64> {
        self.comps.iter().map(Jet::value).collect()
    }

    /// `T_{…|k}`: horizontal Chern-Rund derivative, new covariant index last.
    pub fn horizontal_derivative(&self, b: &GeometryBundle) -> Result<DTensor> {
        let gamma = &b.chern_rund()?.gamma;
        let rank = self.rank();
        let mut comps = Vec::with_capacity(self.comps.len() * 4);
        for p in 0..self.comps.len() {
            let idx = unflat(p, rank);
            for k in 0..4 {
                let mut out = b.delta(&self.comps[p], k)?;
                let mut moved = idx.clone();
                for (slot, &a) in idx.iter().enumerate() {
                    for m in 0..4 {
                        moved[slot] = m;
                        let t = &self.comps[flat(&moved)];
                        if slot < self.upper {
                            out = out + gamma[a][m][k].mul(t);
                        } else {
                            out = out - gamma[m][a][k].mul(t);
                        }
                    }
                    moved[slot] = a;
                }
                comps.push(out);
            }
        }
        Ok(DTensor {
            upper: self.upper,
            lower: self.lower + 1,
            comps,
        })
    }

    /// `∇T = ẋᵏ T_{…|k}`.
    pub fn dynamical_derivative(&self, b: &GeometryBundle) -> Result<DTensor> {
        let h = self.horizontal_derivative(b)?;
        let comps = h
            .comps
            .chunks(4)
            .map(|c| sum4(|k| c[k].mul(&b.xdot[k])))
            .collect();
        Ok(DTensor {
            upper: self.upper,
            lower: self.lower,
            comps,
        })
    }

    /// Largest `|ẋⁱ∂̇ᵢQ − kQ|` over components, and the largest `|Q|`.
    pub fn euler_residual(&self, v: &[f64; 4], degree: f64) -> Result<(f64, f64)> {
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for c in &self.comps {
            let e = c.euler_value(v)?;
            worst = worst.max((e - degree * c.value()).abs());
            scale = scale.max(c.value().abs());
        }
        Ok((worst, scale))
    }
}

impl GeometryBundle {
    pub fn spray_tensor(&self) -> Result<DTensor> {
        Ok(DTensor::vector(&self.spray()?.g))
    }

    pub fn connection_tensor(&self) -> Result<DTensor> {
        Ok(DTensor::matrix(&self.spray()?.n, 1))
    }

    pub fn gamma_tensor(&self) -> Result<DTensor> {
        let g = &self.chern_rund()?.gamma;
        Ok(DTensor::from_fn(1, 2, |i| g[i[0]][i[1]][i[2]].clone()))
    }

    pub fn landsberg_tensor(&self) -> Result<DTensor> {
        let p = &self.chern_rund()?.p;
        Ok(DTensor::from_fn(1, 2, |i| p[i[0]][i[1]][i[2]].clone()))
    }

    pub fn curvature_tensor(&self) -> Result<DTensor> {
        let r = &self.curvature()?.r;
        Ok(DTensor::from_fn(1, 2, |i| r[i[0]][i[1]][i[2]].clone()))
    }

    pub fn cartan_tensor(&self) -> Result<DTensor> {
        let c = &self.cartan()?.c;
        Ok(DTensor::from_fn(0, 3, |i| c[i[0]][i[1]][i[2]].clone()))
    }

    /// `ẋᵢ = g_ij ẋʲ`
    pub fn xdot_lower(&self) -> [Jet; 4] {
        std::array::from_fn(|i| sum4(|j| self.g[i][j].mul(&self.xdot[j])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_model, presets};

    fn bundle(d: crate::catalog::ModelDescriptor, pt: ChartPoint, o: TruncationOrder) -> GeometryBundle {
        GeometryBundle::new(&build_model(&d).unwrap(), &pt, o).unwrap()
    }

    #[test]
    fn minkowski_fundamental() {
        let b = bundle(
            presets::minkowski(),
            ChartPoint::new([0.0; 4], [1.0, 0.0, 0.0, 0.0]),
            TruncationOrder::new(2, 4),
        );
        let g = b.g_value();
        assert_eq!(g, Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, -1.0, -1.0)));
        assert_eq!(b.det_g.value(), -1.0);
        assert_eq!(b.f.value(), 1.0);
        assert_eq!(b.omega[0].value(), 1.0);
        assert!(b.cartan().unwrap().c.iter().flatten().flatten().all(|c| c.value() == 0.0));
        assert!(b.curvature().unwrap().r0.value() == 0.0);
    }

    #[test]
    fn randers_spray_homogeneity() {
        let pt = ChartPoint::new([0.1, 0.2, 0.3, -0.1], [1.2, 0.3, -0.2, 0.1]);
        let b = bundle(presets::randers_magnetic(), pt, TruncationOrder::new(2, 5));
        let (res, scale) = b.spray_tensor().unwrap().euler_residual(&pt.v, 2.0).unwrap();
        assert!(res <= 1e-10 * scale.max(1.0), "{res}");
        let (res, scale) = b.connection_tensor().unwrap().euler_residual(&pt.v, 1.0).unwrap();
        assert!(res <= 1e-10 * scale.max(1.0));
        assert!(scale > 1e-3);
    }

    #[test]
    fn null_direction_rejected() {
        let m = build_model(&presets::minkowski()).unwrap();
        let pt = ChartPoint::new([0.0; 4], [1.0, 1.0, 0.0, 0.0]);
        assert!(GeometryBundle::new(&m, &pt, TruncationOrder::new(1, 3)).is_err());
    }
}
