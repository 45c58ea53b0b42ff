//! Truncated multivariate Taylor arithmetic over the eight chart variables
//! `(x⁰, x¹, x², x³, ẋ⁰, ẋ¹, ẋ², ẋ³)`.
//!
//! A [`Jet`] stores the Taylor coefficients `∂^α f / α!` of a scalar at one
//! chart point. Truncation is anisotropic: the total x-degree and the total
//! ẋ-degree of a stored multi-index are capped separately
//! ([`TruncationOrder`]). Every derivative consumed by an operation lowers the
//! corresponding cap by one, so a jet always carries exactly the orders that
//! remain valid.
//!
//! Coefficients are stored densely as an `nx × nv` row-major array, where the
//! rows enumerate x-monomials and the columns ẋ-monomials in graded order.

mod matrix;
mod tables;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use matrix::{det4, invert4, value_matrix, JetMatrix4};
pub use tables::MAX_DEGREE;

use tables::{tables, NONE};

/// Number of chart variables (4 positions, 4 velocities).
pub const NUM_VARS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("division by a jet with value {value:e} (threshold {threshold:e})")]
    DivisionNearZero { value: f64, threshold: f64 },
    #[error("square root or fractional power of {value:e} (threshold {threshold:e})")]
    SqrtDomain { value: f64, threshold: f64 },
    #[error("truncation order exceeded: {0}")]
    OrderExceeded(String),
    #[error("singular value-level matrix in jet inversion")]
    SingularMatrix,
}

pub type Result<T, E = JetError> = std::result::Result<T, E>;

/// Caps on the total x-derivative degree and total ẋ-derivative degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncationOrder {
    pub max_x_order: usize,
    pub max_v_order: usize,
}

impl Default for TruncationOrder {
    fn default() -> Self {
        Self::new(3, 6)
    }
}

impl TruncationOrder {
    pub const fn new(max_x_order: usize, max_v_order: usize) -> Self {
        Self {
            max_x_order,
            max_v_order,
        }
    }

    pub fn min(self, other: Self) -> Self {
        Self::new(
            self.max_x_order.min(other.max_x_order),
            self.max_v_order.min(other.max_v_order),
        )
    }

    /// Both caps raised by one.
    pub fn bumped(self) -> Self {
        Self::new(self.max_x_order + 1, self.max_v_order + 1)
    }

    pub fn contains(&self, idx: &MultiIndex) -> bool {
        idx.x_degree() <= self.max_x_order && idx.v_degree() <= self.max_v_order
    }

    pub fn validate(self) -> Result<Self> {
        if self.max_x_order > MAX_DEGREE || self.max_v_order > MAX_DEGREE {
            return Err(JetError::OrderExceeded(format!(
                "orders ({}, {}) exceed the supported maximum {MAX_DEGREE}",
                self.max_x_order, self.max_v_order
            )));
        }
        Ok(self)
    }

    fn dims(&self) -> (usize, usize) {
        let t = tables();
        (t.upto[self.max_x_order], t.upto[self.max_v_order])
    }
}

/// Exponents of a mixed partial derivative, split into x and ẋ parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MultiIndex {
    pub x: [u8; 4],
    pub v: [u8; 4],
}

impl MultiIndex {
    pub const fn zero() -> Self {
        Self {
            x: [0; 4],
            v: [0; 4],
        }
    }

    /// Builds the multi-index of `∂/∂z^{vars[0]} ∂/∂z^{vars[1]} …` where chart
    /// variables `0..4` are positions and `4..8` velocities.
    pub fn from_vars(vars: &[usize]) -> Self {
        let mut idx = Self::zero();
        for &k in vars {
            assert!(k < NUM_VARS, "chart variable {k} out of range");
            if k < 4 {
                idx.x[k] += 1;
            } else {
                idx.v[k - 4] += 1;
            }
        }
        idx
    }

    pub fn x_degree(&self) -> usize {
        self.x.iter().map(|&d| d as usize).sum()
    }

    pub fn v_degree(&self) -> usize {
        self.v.iter().map(|&d| d as usize).sum()
    }

    pub fn total_degree(&self) -> usize {
        self.x_degree() + self.v_degree()
    }

    /// `α! = Π αₖ!`
    pub fn factorial(&self) -> f64 {
        self.x
            .iter()
            .chain(self.v.iter())
            .map(|&d| (1..=d as u32).product::<u32>() as f64)
            .product()
    }

    /// Exponent of chart variable `k`.
    pub fn get(&self, k: usize) -> u8 {
        if k < 4 {
            self.x[k]
        } else {
            self.v[k - 4]
        }
    }
}

/// Truncated Taylor expansion of a scalar at one chart point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    order: TruncationOrder,
    nv: usize,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn zeros(order: TruncationOrder) -> Self {
        let (nx, nv) = order.dims();
        Self {
            order,
            nv,
            coeffs: vec![0.0; nx * nv],
        }
    }

    pub fn constant(value: f64, order: TruncationOrder) -> Self {
        let mut j = Self::zeros(order);
        j.coeffs[0] = value;
        j
    }

    /// Jet of the chart variable `var` (0..4 positions, 4..8 velocities)
    /// taking `value` at the base point.
    pub fn variable(var: usize, value: f64, order: TruncationOrder) -> Self {
        let mut j = Self::constant(value, order);
        let t = tables();
        if var < 4 {
            if order.max_x_order >= 1 {
                let row = t.raise[0][var] as usize;
                j.coeffs[row * j.nv] = 1.0;
            }
        } else if order.max_v_order >= 1 {
            let col = t.raise[0][var - 4] as usize;
            j.coeffs[col] = 1.0;
        }
        j
    }

    pub fn order(&self) -> TruncationOrder {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficients in storage order.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    fn nx(&self) -> usize {
        self.coeffs.len() / self.nv
    }

    fn position(&self, idx: &MultiIndex) -> Option<usize> {
        if !self.order.contains(idx) {
            return None;
        }
        let t = tables();
        let ix = t.index_of(&idx.x)?;
        let iv = t.index_of(&idx.v)?;
        Some(ix * self.nv + iv)
    }

    /// Taylor coefficient `∂^α f / α!`, `None` outside the truncation.
    pub fn coefficient(&self, idx: &MultiIndex) -> Option<f64> {
        self.position(idx).map(|p| self.coeffs[p])
    }

    pub fn set_coefficient(&mut self, idx: &MultiIndex, value: f64) -> Result<()> {
        let p = self.position(idx).ok_or_else(|| {
            JetError::OrderExceeded(format!("{idx:?} outside {:?}", self.order))
        })?;
        self.coeffs[p] = value;
        Ok(())
    }

    /// The mixed partial derivative `∂^α f` at the base point.
    pub fn partial(&self, idx: &MultiIndex) -> Result<f64> {
        self.coefficient(idx)
            .map(|c| c * idx.factorial())
            .ok_or_else(|| JetError::OrderExceeded(format!("{idx:?} outside {:?}", self.order)))
    }

    /// First ẋ-derivatives at the base point (requires ẋ-order ≥ 1).
    pub fn v_gradient(&self) -> Result<[f64; 4]> {
        if self.order.max_v_order == 0 {
            return Err(JetError::OrderExceeded("v-gradient of order-0 jet".into()));
        }
        let t = tables();
        Ok(std::array::from_fn(|k| self.coeffs[t.raise[0][k] as usize]))
    }

    /// First x-derivatives at the base point (requires x-order ≥ 1).
    pub fn x_gradient(&self) -> Result<[f64; 4]> {
        if self.order.max_x_order == 0 {
            return Err(JetError::OrderExceeded("x-gradient of order-0 jet".into()));
        }
        let t = tables();
        Ok(std::array::from_fn(|k| {
            self.coeffs[t.raise[0][k] as usize * self.nv]
        }))
    }

    /// Copy restricted to a lower (or equal) truncation order.
    pub fn truncate(&self, order: TruncationOrder) -> Jet {
        let order = order.min(self.order);
        if order == self.order {
            return self.clone();
        }
        let (nx, nv) = order.dims();
        let mut coeffs = Vec::with_capacity(nx * nv);
        for ix in 0..nx {
            coeffs.extend_from_slice(&self.coeffs[ix * self.nv..ix * self.nv + nv]);
        }
        Jet { order, nv, coeffs }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let order = self.order.min(other.order);
        let (nx, nv) = order.dims();
        let mut coeffs = Vec::with_capacity(nx * nv);
        for ix in 0..nx {
            let a = &self.coeffs[ix * self.nv..ix * self.nv + nv];
            let b = &other.coeffs[ix * other.nv..ix * other.nv + nv];
            coeffs.extend(a.iter().zip(b).map(|(&p, &q)| f(p, q)));
        }
        Jet { order, nv, coeffs }
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet {
            order: self.order,
            nv: self.nv,
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// `self += c·other` over the common truncation (keeps `self`'s order if
    /// `other` is at least as fine).
    pub fn axpy(&mut self, c: f64, other: &Jet) {
        if other.order.max_x_order < self.order.max_x_order
            || other.order.max_v_order < self.order.max_v_order
        {
            *self = self.truncate(other.order);
        }
        let nv = self.nv;
        for ix in 0..self.nx() {
            let dst = &mut self.coeffs[ix * nv..(ix + 1) * nv];
            let src = &other.coeffs[ix * other.nv..ix * other.nv + nv];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += c * s;
            }
        }
    }

    fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    fn nonzero_rows(&self) -> Vec<bool> {
        self.coeffs
            .chunks(self.nv)
            .map(|row| row.iter().any(|&c| c != 0.0))
            .collect()
    }

    fn sparse_entries(&self, limit: usize) -> Option<Vec<(usize, usize, f64)>> {
        let mut out = Vec::new();
        for (p, &c) in self.coeffs.iter().enumerate() {
            if c != 0.0 {
                if out.len() == limit {
                    return None;
                }
                out.push((p / self.nv, p % self.nv, c));
            }
        }
        Some(out)
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        if self.is_constant() {
            return other.truncate(order).scale(self.value());
        }
        if other.is_constant() {
            return self.truncate(order).scale(other.value());
        }
        if let Some(entries) = self.sparse_entries(8) {
            return sparse_mul(&entries, other, order);
        }
        if let Some(entries) = other.sparse_entries(8) {
            return sparse_mul(&entries, self, order);
        }
        let t = tables();
        let mut out = Jet::zeros(order);
        let nv = out.nv;
        let tx = t.triples_upto(order.max_x_order);
        let tv = t.triples_upto(order.max_v_order);
        let ra = self.nonzero_rows();
        let rb = other.nonzero_rows();
        for &[i, j, k] in tx {
            let (i, j, k) = (i as usize, j as usize, k as usize);
            if !ra[i] || !rb[j] {
                continue;
            }
            let a = &self.coeffs[i * self.nv..(i + 1) * self.nv];
            let b = &other.coeffs[j * other.nv..(j + 1) * other.nv];
            let c = &mut out.coeffs[k * nv..(k + 1) * nv];
            for &[p, q, r] in tv {
                c[r as usize] += a[p as usize] * b[q as usize];
            }
        }
        out
    }

    pub fn square(&self) -> Jet {
        self.mul(self)
    }

    /// `self / other`, solving `other · y = self` coefficient by coefficient.
    pub fn checked_div(&self, other: &Jet, threshold: f64) -> Result<Jet> {
        let b0 = other.value();
        if !(b0.abs() > threshold) {
            return Err(JetError::DivisionNearZero {
                value: b0,
                threshold,
            });
        }
        let order = self.order.min(other.order);
        if other.is_constant() {
            return Ok(self.truncate(order).scale(1.0 / b0));
        }
        let t = tables();
        let mut y = Jet::zeros(order);
        let (nx, nv) = order.dims();
        let tv = t.triples_upto(order.max_v_order);
        let rb = other.nonzero_rows();
        let mut acc = vec![0.0; nv];
        let b_row0 = &other.coeffs[..other.nv];
        for k in 0..nx {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for &[i, j, _] in t.group(k) {
                let (i, j) = (i as usize, j as usize);
                if i == 0 || !rb[i] {
                    continue;
                }
                let b = &other.coeffs[i * other.nv..(i + 1) * other.nv];
                let yr = &y.coeffs[j * nv..(j + 1) * nv];
                for &[p, q, r] in tv {
                    acc[r as usize] += b[p as usize] * yr[q as usize];
                }
            }
            for r in 0..nv {
                let mut s = self.coeffs[k * self.nv + r] - acc[r];
                for &[p, q, _] in t.group(r) {
                    if p == 0 {
                        continue;
                    }
                    s -= b_row0[p as usize] * y.coeffs[k * nv + q as usize];
                }
                y.coeffs[k * nv + r] = s / b0;
            }
        }
        Ok(y)
    }

    pub fn checked_recip(&self, threshold: f64) -> Result<Jet> {
        Jet::constant(1.0, self.order).checked_div(self, threshold)
    }

    /// Composition `f ∘ self` with the univariate Taylor coefficients
    /// `series[k] = f^{(k)}(value)/k!` (Horner on the nilpotent part).
    pub fn compose(&self, series: &[f64]) -> Jet {
        let h = self.add_scalar(-self.value());
        let mut acc = Jet::constant(*series.last().unwrap_or(&0.0), self.order);
        for &c in series.iter().rev().skip(1) {
            acc = h.mul(&acc).add_scalar(c);
        }
        acc
    }

    /// Highest power of the nilpotent part that can be nonzero.
    fn nilpotency(&self) -> usize {
        self.order.max_x_order + self.order.max_v_order
    }

    /// `self^p` for real `p`; requires `value > threshold`.
    pub fn checked_powf(&self, p: f64, threshold: f64) -> Result<Jet> {
        let a0 = self.value();
        if !(a0 > threshold) {
            return Err(JetError::SqrtDomain {
                value: a0,
                threshold,
            });
        }
        let n = self.nilpotency();
        let mut series = Vec::with_capacity(n + 1);
        let mut c = a0.powf(p);
        series.push(c);
        for k in 1..=n {
            c *= (p - (k as f64 - 1.0)) / (k as f64 * a0);
            series.push(c);
        }
        Ok(self.compose(&series))
    }

    pub fn checked_sqrt(&self, threshold: f64) -> Result<Jet> {
        self.checked_powf(0.5, threshold)
    }

    pub fn powi(&self, n: u32) -> Jet {
        match n {
            0 => Jet::constant(1.0, self.order),
            1 => self.clone(),
            _ => {
                let half = self.powi(n / 2);
                let sq = half.square();
                if n % 2 == 1 {
                    sq.mul(self)
                } else {
                    sq
                }
            }
        }
    }

    pub fn exp(&self) -> Jet {
        let n = self.nilpotency();
        let e = self.value().exp();
        let mut series = Vec::with_capacity(n + 1);
        let mut fact = 1.0;
        for k in 0..=n {
            if k > 0 {
                fact *= k as f64;
            }
            series.push(e / fact);
        }
        self.compose(&series)
    }

    pub fn checked_ln(&self, threshold: f64) -> Result<Jet> {
        let a0 = self.value();
        if !(a0 > threshold) {
            return Err(JetError::SqrtDomain {
                value: a0,
                threshold,
            });
        }
        let n = self.nilpotency();
        let mut series = vec![a0.ln()];
        for k in 1..=n {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sign / (k as f64 * a0.powi(k as i32)));
        }
        Ok(self.compose(&series))
    }

    fn trig(&self, phase: f64) -> Jet {
        let n = self.nilpotency();
        let a0 = self.value();
        let mut series = Vec::with_capacity(n + 1);
        let mut fact = 1.0;
        for k in 0..=n {
            if k > 0 {
                fact *= k as f64;
            }
            let d = (a0 + phase + k as f64 * std::f64::consts::FRAC_PI_2).sin();
            series.push(d / fact);
        }
        self.compose(&series)
    }

    pub fn sin(&self) -> Jet {
        self.trig(0.0)
    }

    pub fn cos(&self) -> Jet {
        self.trig(std::f64::consts::FRAC_PI_2)
    }

    /// `|self|` on a region where the sign is locally constant; returns the
    /// sign together with the jet.
    pub fn checked_signed_abs(&self, threshold: f64) -> Result<(f64, Jet)> {
        let a0 = self.value();
        if !(a0.abs() > threshold) {
            return Err(JetError::DivisionNearZero {
                value: a0,
                threshold,
            });
        }
        let s = a0.signum();
        Ok((s, self.scale(s)))
    }

    /// `∂f/∂x^var`, lowering the x-order by one.
    pub fn d_x(&self, var: usize) -> Result<Jet> {
        if self.order.max_x_order == 0 {
            return Err(JetError::OrderExceeded(format!(
                "∂/∂x{var} of a jet with x-order 0"
            )));
        }
        let t = tables();
        let order = TruncationOrder::new(self.order.max_x_order - 1, self.order.max_v_order);
        let mut out = Jet::zeros(order);
        let nv = out.nv;
        for ix in 0..out.nx() {
            let up = t.raise[ix][var];
            debug_assert_ne!(up, NONE);
            let factor = (t.monomials[ix][var] + 1) as f64;
            let src = &self.coeffs[up as usize * self.nv..up as usize * self.nv + nv];
            for (d, s) in out.coeffs[ix * nv..(ix + 1) * nv].iter_mut().zip(src) {
                *d = factor * s;
            }
        }
        Ok(out)
    }

    /// `∂f/∂ẋ^var`, lowering the ẋ-order by one.
    pub fn d_v(&self, var: usize) -> Result<Jet> {
        if self.order.max_v_order == 0 {
            return Err(JetError::OrderExceeded(format!(
                "∂/∂ẋ{var} of a jet with ẋ-order 0"
            )));
        }
        let t = tables();
        let order = TruncationOrder::new(self.order.max_x_order, self.order.max_v_order - 1);
        let mut out = Jet::zeros(order);
        let nv = out.nv;
        let cols: Vec<(usize, f64)> = (0..nv)
            .map(|iv| {
                (
                    t.raise[iv][var] as usize,
                    (t.monomials[iv][var] + 1) as f64,
                )
            })
            .collect();
        for ix in 0..out.nx() {
            let src = &self.coeffs[ix * self.nv..(ix + 1) * self.nv];
            let dst = &mut out.coeffs[ix * nv..(ix + 1) * nv];
            for (d, &(up, factor)) in dst.iter_mut().zip(&cols) {
                *d = factor * src[up];
            }
        }
        Ok(out)
    }

    /// Value of the Euler operator `ẋⁱ ∂̇ᵢ f` at the base point.
    pub fn euler_value(&self, v: &[f64; 4]) -> Result<f64> {
        let grad = self.v_gradient()?;
        Ok((0..4).map(|i| v[i] * grad[i]).sum())
    }
}

fn sparse_mul(entries: &[(usize, usize, f64)], dense: &Jet, order: TruncationOrder) -> Jet {
    let t = tables();
    let n = t.n_monomials();
    let mut out = Jet::zeros(order);
    let (nx, nv) = order.dims();
    for &(ax, av, c) in entries {
        if ax >= nx || av >= nv {
            continue;
        }
        for bx in 0..nx {
            let kx = t.sum[ax * n + bx];
            if kx == NONE || kx as usize >= nx {
                continue;
            }
            let src = &dense.coeffs[bx * dense.nv..bx * dense.nv + nv];
            let dst = &mut out.coeffs[kx as usize * nv..(kx as usize + 1) * nv];
            for (bv, &s) in src.iter().enumerate() {
                let kv = t.sum[av * n + bv];
                if kv != NONE && (kv as usize) < nv {
                    dst[kv as usize] += c * s;
                }
            }
        }
    }
    out
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl std::ops::$tr<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl std::ops::$tr<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                std::ops::$tr::$method(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                std::ops::$tr::$method(&self, rhs)
            }
        }
        impl std::ops::$tr<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                std::ops::$tr::$method(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.zip_with(b, |p, q| p + q));
forward_binop!(Sub, sub, |a, b| a.zip_with(b, |p, q| p - q));
forward_binop!(Mul, mul, |a, b| Jet::mul(a, b));

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// One jet per chart variable at `(x, v)`: positions first, then velocities.
pub fn seed_chart_jets(x: &[f64; 4], v: &[f64; 4], order: TruncationOrder) -> [Jet; NUM_VARS] {
    std::array::from_fn(|k| {
        if k < 4 {
            Jet::variable(k, x[k], order)
        } else {
            Jet::variable(k, v[k - 4], order)
        }
    })
}

/// `Σ a_k b_k` over jets.
pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut it = a.iter().zip(b).map(|(p, q)| p.mul(q));
    let first = it.next().expect("dot of empty slices");
    it.fold(first, |acc, t| acc + t)
}

/// Sum of jets; `None` for an empty iterator.
pub fn sum<'a>(items: impl IntoIterator<Item = &'a Jet>) -> Option<Jet> {
    let mut it = items.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, t| acc + t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(x: usize, v: usize) -> TruncationOrder {
        TruncationOrder::new(x, v)
    }

    #[test]
    fn seeding() {
        let o = TruncationOrder::default();
        let s = seed_chart_jets(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.0, 0.0, 0.0], o);
        assert_eq!(s[0].value(), 1.0);
        assert_eq!(s[0].partial(&MultiIndex::from_vars(&[0])).unwrap(), 1.0);
        assert_eq!(s[0].partial(&MultiIndex::from_vars(&[1])).unwrap(), 0.0);
        assert_eq!(s[0].partial(&MultiIndex::from_vars(&[0, 0])).unwrap(), 0.0);
        assert_eq!(s[5].value(), 0.0);
        assert_eq!(s[5].partial(&MultiIndex::from_vars(&[5])).unwrap(), 1.0);
        let nonzero = s[5].coefficients().iter().filter(|&&c| c != 0.0).count();
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn square_of_velocity() {
        let v = Jet::variable(4, 3.0, ord(3, 6));
        let f = v.mul(&v);
        assert_eq!(f.value(), 9.0);
        assert_eq!(f.coefficient(&MultiIndex::from_vars(&[4])).unwrap(), 6.0);
        assert_eq!(f.coefficient(&MultiIndex::from_vars(&[4, 4])).unwrap(), 1.0);
        assert_eq!(f.partial(&MultiIndex::from_vars(&[4, 4])).unwrap(), 2.0);
    }

    #[test]
    fn cube_third_derivative() {
        let v = Jet::variable(4, 0.7, ord(3, 6));
        let f = v.powi(3);
        let d3 = f.partial(&MultiIndex::from_vars(&[4, 4, 4])).unwrap();
        assert!((d3 - 6.0).abs() < 1e-14);
    }

    #[test]
    fn sqrt_of_constant() {
        let c = Jet::constant(4.0, ord(3, 6));
        let s = c.checked_sqrt(1e-10).unwrap();
        assert_eq!(s.value(), 2.0);
        assert!(s.coefficients()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn domain_errors() {
        let z = Jet::constant(0.0, ord(1, 1));
        assert!(matches!(
            z.checked_sqrt(1e-10),
            Err(JetError::SqrtDomain { .. })
        ));
        assert!(matches!(
            Jet::constant(1.0, ord(1, 1)).checked_div(&z, 1e-10),
            Err(JetError::DivisionNearZero { .. })
        ));
        assert!(matches!(
            z.checked_signed_abs(1e-10),
            Err(JetError::DivisionNearZero { .. })
        ));
    }

    #[test]
    fn order_exceeded() {
        let j = Jet::variable(0, 1.0, ord(1, 1));
        assert!(j.partial(&MultiIndex::from_vars(&[0, 0])).is_err());
        assert!(j.d_x(0).unwrap().d_x(0).is_err());
    }

    #[test]
    fn division_inverts_multiplication() {
        let o = ord(2, 3);
        let s = seed_chart_jets(&[0.3, -0.2, 0.5, 0.1], &[1.2, 0.3, -0.4, 0.2], o);
        let a = &s[0] * &s[4] + s[5].square().add_scalar(1.0);
        let b = (&s[1] + &s[6]).mul(&s[7]).add_scalar(2.0);
        let q = a.checked_div(&b, 1e-12).unwrap();
        let back = q.mul(&b);
        for (x, y) in back.coefficients().iter().zip(a.coefficients()) {
            assert!((x - y).abs() < 1e-13, "{x} vs {y}");
        }
    }

    #[test]
    fn exp_ln_roundtrip() {
        let o = ord(2, 4);
        let s = seed_chart_jets(&[0.3, -0.2, 0.5, 0.1], &[1.2, 0.3, -0.4, 0.2], o);
        let a = (&s[0] * &s[4]).add_scalar(2.0) + s[6].square();
        let back = a.checked_ln(1e-12).unwrap().exp();
        for (x, y) in back.coefficients().iter().zip(a.coefficients()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn sin_cos_pythagoras() {
        let o = ord(3, 3);
        let s = seed_chart_jets(&[0.3, -0.2, 0.5, 0.1], &[1.2, 0.3, -0.4, 0.2], o);
        let a = &s[2] * &s[5] + &s[1];
        let one = a.sin().square() + a.cos().square();
        assert!((one.value() - 1.0).abs() < 1e-14);
        assert!(one.coefficients()[1..].iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn derivative_operators() {
        let o = ord(2, 3);
        let s = seed_chart_jets(&[0.5, 1.0, 0.0, 0.0], &[2.0, 1.0, 0.0, 0.0], o);
        // f = x0^2 * v0^3
        let f = s[0].square().mul(&s[4].powi(3));
        let fx = f.d_x(0).unwrap();
        let fv = f.d_v(0).unwrap();
        assert!((fx.value() - 2.0 * 0.5 * 8.0).abs() < 1e-14);
        assert!((fv.value() - 0.25 * 3.0 * 4.0).abs() < 1e-14);
        assert_eq!(fv.order(), ord(2, 2));
        // Euler operator on a degree-3 function
        assert!((f.euler_value(&[2.0, 1.0, 0.0, 0.0]).unwrap() - 3.0 * f.value()).abs() < 1e-13);
    }
}
