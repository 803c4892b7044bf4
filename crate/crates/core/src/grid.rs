//! Rectangular parameter grids and scalar fields on them.
//!
//! Fields are stored row-major with the `u` index outermost: node `(i, j)`
//! sits at `(u_min + i*hu, v_min + j*hv)`. On the wire a field is a nested
//! array `f[i][j]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed rectangle `[u_min, u_max] x [v_min, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Domain {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Domain {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Self {
        Self { u_min, u_max, v_min, v_max }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.u_min, self.u_max, self.v_min, self.v_max].iter().all(|x| x.is_finite())
            && self.u_min < self.u_max
            && self.v_min < self.v_max;
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("empty or non-finite domain {:?}", self.to_array())))
        }
    }

    pub fn contains(&self, u: f64, v: f64, margin: f64) -> bool {
        u >= self.u_min + margin
            && u <= self.u_max - margin
            && v >= self.v_min + margin
            && v <= self.v_max - margin
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.u_min, self.u_max, self.v_min, self.v_max]
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.u_min + self.u_max), 0.5 * (self.v_min + self.v_max))
    }
}

impl From<[f64; 4]> for Domain {
    fn from(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Domain> for [f64; 4] {
    fn from(d: Domain) -> Self {
        d.to_array()
    }
}

/// Node layout of a uniform grid over a [`Domain`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub domain: Domain,
    pub nu: usize,
    pub nv: usize,
}

impl GridSpec {
    pub fn new(domain: Domain, nu: usize, nv: usize) -> Result<Self> {
        domain.validate()?;
        if nu < 2 || nv < 2 {
            return Err(Error::GridTooSmall { nu, nv, min: 2 });
        }
        Ok(Self { domain, nu, nv })
    }

    pub fn hu(&self) -> f64 {
        (self.domain.u_max - self.domain.u_min) / (self.nu - 1) as f64
    }

    pub fn hv(&self) -> f64 {
        (self.domain.v_max - self.domain.v_min) / (self.nv - 1) as f64
    }

    pub fn u(&self, i: usize) -> f64 {
        if i + 1 == self.nu {
            self.domain.u_max
        } else {
            self.domain.u_min + i as f64 * self.hu()
        }
    }

    pub fn v(&self, j: usize) -> f64 {
        if j + 1 == self.nv {
            self.domain.v_max
        } else {
            self.domain.v_min + j as f64 * self.hv()
        }
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> {
        let nv = self.nv;
        (0..self.nu).flat_map(move |i| (0..nv).map(move |j| (i, j)))
    }

    /// Index of the node at `(u, v)`, if `(u, v)` lies within `rel_tol`
    /// grid spacings of one.
    pub fn node_at(&self, u: f64, v: f64, rel_tol: f64) -> Option<(usize, usize)> {
        let fi = (u - self.domain.u_min) / self.hu();
        let fj = (v - self.domain.v_min) / self.hv();
        let (i, j) = (fi.round(), fj.round());
        if (fi - i).abs() > rel_tol || (fj - j).abs() > rel_tol {
            return None;
        }
        if i < 0.0 || j < 0.0 || i as usize >= self.nu || j as usize >= self.nv {
            return None;
        }
        Some((i as usize, j as usize))
    }

    pub fn zeros(&self) -> Field2 {
        Field2::filled(self.nu, self.nv, 0.0)
    }

    pub fn sample(&self, mut f: impl FnMut(f64, f64) -> f64) -> Field2 {
        let mut out = self.zeros();
        for (i, j) in self.nodes() {
            out.set(i, j, f(self.u(i), self.v(j)));
        }
        out
    }

    /// Like [`GridSpec::sample`] but passes node indices.
    pub fn sample_indexed(&self, f: impl FnMut(usize, usize) -> f64) -> Field2 {
        Field2::from_fn(self.nu, self.nv, f)
    }
}

/// Scalar field on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2 {
    nu: usize,
    nv: usize,
    data: Vec<f64>,
}

impl Field2 {
    pub fn filled(nu: usize, nv: usize, value: f64) -> Self {
        Self { nu, nv, data: vec![value; nu * nv] }
    }

    pub fn from_fn(nu: usize, nv: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            for j in 0..nv {
                data.push(f(i, j));
            }
        }
        Self { nu, nv, data }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nu = rows.len();
        let nv = rows.first().map_or(0, Vec::len);
        if nu == 0 || nv == 0 {
            return Err(Error::Invalid("empty field".into()));
        }
        if rows.iter().any(|r| r.len() != nv) {
            return Err(Error::Invalid("ragged field rows".into()));
        }
        Ok(Self { nu, nv, data: rows.into_iter().flatten().collect() })
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.nv).map(<[f64]>::to_vec).collect()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nu, self.nv)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.nv + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.nv + j] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field2 {
        Field2 { nu: self.nu, nv: self.nv, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn zip_map(&self, other: &Field2, f: impl Fn(f64, f64) -> f64) -> Field2 {
        assert_eq!(self.shape(), other.shape(), "field shapes differ");
        Field2 {
            nu: self.nu,
            nv: self.nv,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Largest absolute value over finite entries (NaN marks invalid nodes).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().filter(|x| x.is_finite()).fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Max minus min over finite entries.
    pub fn variation(&self) -> f64 {
        let (lo, hi) = self
            .data
            .iter()
            .filter(|x| x.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    }

    pub fn mean(&self) -> f64 {
        let finite: Vec<f64> = self.data.iter().copied().filter(|x| x.is_finite()).collect();
        finite.iter().sum::<f64>() / finite.len().max(1) as f64
    }

    /// First `u`-derivative; central inside, second-order one-sided on the edges.
    pub fn d_u(&self, i: usize, j: usize, hu: f64) -> f64 {
        first_derivative(|k| self.get(k, j), i, self.nu, hu)
    }

    pub fn d_v(&self, i: usize, j: usize, hv: f64) -> f64 {
        first_derivative(|k| self.get(i, k), j, self.nv, hv)
    }

    /// Whole-field derivative along `u` using [`Field2::d_u`].
    pub fn diff_u(&self, hu: f64) -> Field2 {
        let mut out = Field2::filled(self.nu, self.nv, 0.0);
        for i in 0..self.nu {
            for j in 0..self.nv {
                out.set(i, j, self.d_u(i, j, hu));
            }
        }
        out
    }

    pub fn diff_v(&self, hv: f64) -> Field2 {
        let mut out = Field2::filled(self.nu, self.nv, 0.0);
        for i in 0..self.nu {
            for j in 0..self.nv {
                out.set(i, j, self.d_v(i, j, hv));
            }
        }
        out
    }
}

/// Second-order first derivative of a sampled 1-D function with `n >= 3` samples.
pub(crate) fn first_derivative(f: impl Fn(usize) -> f64, k: usize, n: usize, h: f64) -> f64 {
    if n < 3 {
        return (f(1) - f(0)) / h;
    }
    if k == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if k + 1 == n {
        (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
    } else {
        (f(k + 1) - f(k - 1)) / (2.0 * h)
    }
}

impl Serialize for Field2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Field2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Field2::from_rows(rows).map_err(serde::de::Error::custom)
    }
}
