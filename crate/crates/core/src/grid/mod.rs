//! Discretized domains with their invariant measure, grid functions, and the
//! quadrature, norm and difference operators defined on them.
//!
//! Every axis uses a cell-centered uniform grid: node `i` of an axis with
//! half-width `L` and `n` nodes sits at `-L + (i + 1/2) h` with `h = 2L/n`, and
//! carries the midpoint weight of its cell. Reflection `x -> -x` maps node `i`
//! to node `n - 1 - i`, so the origin is a node exactly when `n` is odd. The
//! cylinder's angular axis is periodic with nodes at `j * 2pi / n_theta`.

mod config;
mod csv;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use self::config::DomainConfig;
pub use self::csv::{read_csv, write_csv};

pub const MIN_RESOLUTION: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Line1d,
    Plane2d,
    Cylinder,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Line1d => "line1d",
            DomainKind::Plane2d => "plane2d",
            DomainKind::Cylinder => "cylinder",
        }
    }
}

/// A truncated symmetric domain: `[-L, L]`, `[-L, L]^2`, or `[-L, L] x S^1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    kind: DomainKind,
    half_width: f64,
    shape: [usize; 2],
    dirichlet: bool,
}

impl Domain {
    pub fn line1d(half_width: f64, n: usize) -> Result<Self> {
        Self::build(DomainKind::Line1d, half_width, [n, 1])
    }

    /// Square grid with the same half-width and node count on both axes.
    pub fn plane2d(half_width: f64, n: usize) -> Result<Self> {
        Self::build(DomainKind::Plane2d, half_width, [n, n])
    }

    pub fn cylinder(half_width: f64, n_axial: usize, n_theta: usize) -> Result<Self> {
        Self::build(DomainKind::Cylinder, half_width, [n_axial, n_theta])
    }

    fn build(kind: DomainKind, half_width: f64, shape: [usize; 2]) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!("half-width must be positive, got {half_width}")));
        }
        let axes = if kind == DomainKind::Line1d { 1 } else { 2 };
        if shape[..axes].iter().any(|&n| n < MIN_RESOLUTION) {
            return Err(Error::InvalidParameter(format!(
                "resolution must be at least {MIN_RESOLUTION} per axis, got {shape:?}"
            )));
        }
        Ok(Domain { kind, half_width, shape, dirichlet: true })
    }

    /// Toggle the zero boundary layer (on by default).
    pub fn with_dirichlet(mut self, dirichlet: bool) -> Self {
        self.dirichlet = dirichlet;
        self
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Node counts per axis; the second entry is 1 on `line1d`.
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn dirichlet(&self) -> bool {
        self.dirichlet
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of geometric axes (1 or 2).
    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Line1d => 1,
            _ => 2,
        }
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.kind == DomainKind::Cylinder && axis == 1
    }

    pub fn steps(&self) -> [f64; 2] {
        let h0 = 2.0 * self.half_width / self.shape[0] as f64;
        let h1 = match self.kind {
            DomainKind::Line1d => 1.0,
            DomainKind::Plane2d => 2.0 * self.half_width / self.shape[1] as f64,
            DomainKind::Cylinder => 2.0 * PI / self.shape[1] as f64,
        };
        [h0, h1]
    }

    /// Quadrature weight of every node (uniform).
    pub fn cell_measure(&self) -> f64 {
        let [h0, h1] = self.steps();
        match self.kind {
            DomainKind::Line1d => h0,
            _ => h0 * h1,
        }
    }

    pub fn total_measure(&self) -> f64 {
        let l = 2.0 * self.half_width;
        match self.kind {
            DomainKind::Line1d => l,
            DomainKind::Plane2d => l * l,
            DomainKind::Cylinder => l * 2.0 * PI,
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.shape[1] + j
    }

    pub fn unravel(&self, idx: usize) -> (usize, usize) {
        (idx / self.shape[1], idx % self.shape[1])
    }

    /// Coordinate of node `i` along `axis`.
    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        let h = self.steps()[axis];
        if self.is_periodic(axis) {
            i as f64 * h
        } else if axis == 1 && self.kind == DomainKind::Line1d {
            0.0
        } else {
            -self.half_width + (i as f64 + 0.5) * h
        }
    }

    pub fn coord(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.unravel(idx);
        [self.axis_coord(0, i), self.axis_coord(1, j)]
    }

    /// Whether node `idx` lies on the outer (clamped) layer.
    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.unravel(idx);
        let [n0, n1] = self.shape;
        let axial = i == 0 || i + 1 == n0;
        match self.kind {
            DomainKind::Plane2d => axial || j == 0 || j + 1 == n1,
            _ => axial,
        }
    }

    /// Euclidean distance of node `idx` from the origin (line and plane only).
    pub fn radius(&self, idx: usize) -> f64 {
        let [x, y] = self.coord(idx);
        (x * x + y * y).sqrt()
    }

    /// Grid carrying all node differences `x - y`: `2n - 1` nodes per open axis
    /// with the same step (so it contains the origin), periodic axes unchanged.
    pub fn difference_domain(&self) -> Domain {
        let [h0, _] = self.steps();
        let mut shape = self.shape;
        shape[0] = 2 * self.shape[0] - 1;
        if self.kind == DomainKind::Plane2d {
            shape[1] = 2 * self.shape[1] - 1;
        }
        Domain {
            kind: self.kind,
            half_width: 0.5 * shape[0] as f64 * h0,
            shape,
            dirichlet: false,
        }
    }

    pub(crate) fn check_same(&self, other: &Domain) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DomainMismatch(format!("{} vs {}", self.describe(), other.describe())))
        }
    }

    pub fn describe(&self) -> String {
        match self.kind {
            DomainKind::Line1d => format!("line1d(L={}, n={})", self.half_width, self.shape[0]),
            DomainKind::Plane2d => format!("plane2d(L={}, n={})", self.half_width, self.shape[0]),
            DomainKind::Cylinder => format!(
                "cylinder(L={}, n={}, n_theta={})",
                self.half_width, self.shape[0], self.shape[1]
            ),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DType {
    Real,
    Complex,
}

/// Node values of a function on a [`Domain`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    domain: Domain,
    values: Vec<Complex64>,
    dtype: DType,
}

impl GridFunction {
    pub fn zeros(domain: &Domain) -> Self {
        GridFunction {
            domain: domain.clone(),
            values: vec![Complex64::new(0.0, 0.0); domain.len()],
            dtype: DType::Real,
        }
    }

    pub fn constant(domain: &Domain, c: f64) -> Self {
        Self::from_fn(domain, |_| c)
    }

    /// Samples `f` at every node; the Dirichlet layer is clamped to zero.
    pub fn from_fn(domain: &Domain, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..domain.len()).map(|i| Complex64::new(f(domain.coord(i)), 0.0)).collect();
        let mut out = GridFunction { domain: domain.clone(), values, dtype: DType::Real };
        out.clamp_boundary();
        out
    }

    /// Real function of the node's `(i, j)` index pair.
    pub fn from_fn_index(domain: &Domain, f: impl Fn(usize, usize) -> f64) -> Self {
        let values = (0..domain.len())
            .map(|idx| {
                let (i, j) = domain.unravel(idx);
                Complex64::new(f(i, j), 0.0)
            })
            .collect();
        let mut out = GridFunction { domain: domain.clone(), values, dtype: DType::Real };
        out.clamp_boundary();
        out
    }

    pub fn from_fn_complex(domain: &Domain, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..domain.len()).map(|i| f(domain.coord(i))).collect();
        let mut out = GridFunction { domain: domain.clone(), values, dtype: DType::Complex };
        out.clamp_boundary();
        out
    }

    pub fn from_real(domain: &Domain, values: Vec<f64>) -> Result<Self> {
        let values = values.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        Self::from_values(domain, values, DType::Real)
    }

    pub fn from_complex(domain: &Domain, values: Vec<Complex64>) -> Result<Self> {
        Self::from_values(domain, values, DType::Complex)
    }

    fn from_values(domain: &Domain, values: Vec<Complex64>, dtype: DType) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::DomainMismatch(format!(
                "{} values for {} nodes of {}",
                values.len(),
                domain.len(),
                domain.describe()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(format!("node {i}")));
        }
        let mut out = GridFunction { domain: domain.clone(), values, dtype };
        out.clamp_boundary();
        Ok(out)
    }

    /// Internal constructor for values already known to be finite and of the
    /// right length.
    pub(crate) fn raw(domain: &Domain, values: Vec<Complex64>, dtype: DType) -> Self {
        debug_assert_eq!(values.len(), domain.len());
        GridFunction { domain: domain.clone(), values, dtype }
    }

    pub(crate) fn raw_real(domain: &Domain, values: Vec<f64>) -> Self {
        Self::raw(domain, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), DType::Real)
    }

    fn clamp_boundary(&mut self) {
        if self.domain.dirichlet {
            for i in 0..self.values.len() {
                if self.domain.is_boundary(i) {
                    self.values[i] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    pub fn is_real(&self) -> bool {
        self.dtype == DType::Real
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Pointwise modulus `|u|` as a real function.
    pub fn modulus(&self) -> GridFunction {
        Self::raw_real(&self.domain, self.values.iter().map(|v| v.norm()).collect())
    }

    /// Node values of `|u|`.
    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Pointwise density `|u|^2`.
    pub fn density(&self) -> GridFunction {
        Self::raw_real(&self.domain, self.values.iter().map(|v| v.norm_sqr()).collect())
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        let values = self.values.iter().map(|v| v * c).collect();
        Self::raw(&self.domain, values, self.dtype)
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &GridFunction) -> Result<GridFunction> {
        self.domain.check_same(&other.domain)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b * c).collect();
        let dtype = if self.is_real() && other.is_real() { DType::Real } else { DType::Complex };
        Ok(Self::raw(&self.domain, values, dtype))
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.add_scaled(-1.0, other)
    }

    pub fn map_real(&self, f: impl Fn(Complex64) -> f64) -> GridFunction {
        Self::raw_real(&self.domain, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `∑_i w_i f_i`.
pub fn integrate(f: &GridFunction) -> Complex64 {
    let w = f.domain.cell_measure();
    f.values.iter().fold(Complex64::new(0.0, 0.0), |acc, v| acc + v) * w
}

/// Real part of [`integrate`], for real-valued functions.
pub fn integrate_re(f: &GridFunction) -> f64 {
    integrate(f).re
}

/// `(∫ |f|^p)^{1/p}` for `p >= 1`.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("norm exponent must satisfy p >= 1, got {p}")));
    }
    Ok(lp_norm_unchecked(f.domain.cell_measure(), f.values.iter().map(|v| v.norm()), p))
}

pub(crate) fn lp_norm_unchecked(w: f64, moduli: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p == 2.0 {
        (w * moduli.map(|a| a * a).sum::<f64>()).sqrt()
    } else if p == 1.0 {
        w * moduli.sum::<f64>()
    } else {
        (w * moduli.map(|a| a.powf(p)).sum::<f64>()).powf(1.0 / p)
    }
}

pub fn l2_norm(f: &GridFunction) -> f64 {
    lp_norm_unchecked(f.domain.cell_measure(), f.values.iter().map(|v| v.norm()), 2.0)
}

/// `∫ conj(f) g`.
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    f.domain.check_same(&g.domain)?;
    let s = f.values.iter().zip(&g.values).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b);
    Ok(s * f.domain.cell_measure())
}

/// Per-node gradient, one component per geometric axis.
#[derive(Clone, Debug)]
pub struct VectorField {
    domain: Domain,
    components: Vec<Vec<Complex64>>,
}

impl VectorField {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn component(&self, axis: usize) -> &[Complex64] {
        &self.components[axis]
    }

    /// Pointwise Euclidean length `|∇f|(x)`.
    pub fn magnitude(&self) -> Vec<f64> {
        (0..self.domain.len())
            .map(|i| self.components.iter().map(|c| c[i].norm_sqr()).sum::<f64>().sqrt())
            .collect()
    }
}

/// Central differences in the interior, second-order one-sided stencils at the
/// ends of open axes, and periodic wrap on the cylinder angle.
pub fn gradient(f: &GridFunction) -> Result<VectorField> {
    let d = &f.domain;
    let [n0, n1] = d.shape();
    if n0 < 3 || (d.dim() == 2 && n1 < 3) {
        return Err(Error::InvalidParameter("gradient needs at least 3 nodes per axis".into()));
    }
    let steps = d.steps();
    let mut components = Vec::with_capacity(d.dim());
    for axis in 0..d.dim() {
        let n = d.shape()[axis];
        let h = steps[axis];
        let periodic = d.is_periodic(axis);
        let at = |i: usize, j: usize| f.values[d.index(i, j)];
        let mut comp = vec![Complex64::new(0.0, 0.0); d.len()];
        for i in 0..n0 {
            for j in 0..n1 {
                let k = if axis == 0 { i } else { j };
                let get = |kk: usize| if axis == 0 { at(kk, j) } else { at(i, kk) };
                let val = if periodic {
                    (get((k + 1) % n) - get((k + n - 1) % n)) / (2.0 * h)
                } else if k == 0 {
                    (get(0) * -3.0 + get(1) * 4.0 - get(2)) / (2.0 * h)
                } else if k + 1 == n {
                    (get(n - 1) * 3.0 - get(n - 2) * 4.0 + get(n - 3)) / (2.0 * h)
                } else {
                    (get(k + 1) - get(k - 1)) / (2.0 * h)
                };
                comp[d.index(i, j)] = val;
            }
        }
        components.push(comp);
    }
    Ok(VectorField { domain: d.clone(), components })
}

/// Face-centred Dirichlet form `∑_faces w |Δu / h|^2`: second-order
/// differences between neighbouring nodes, with no spurious null modes.
pub fn dirichlet_form(f: &GridFunction) -> f64 {
    let d = &f.domain;
    let w = d.cell_measure();
    let mut total = 0.0;
    for_each_face(d, |a, b, h| {
        total += (f.values[a] - f.values[b]).norm_sqr() / (h * h);
    });
    w * total
}

/// Discrete `-Δu` whose weighted pairing reproduces the derivative of
/// [`dirichlet_form`]: `d/dt F(u + t v) = 2 Re ∫ conj(-Δu) v`.
pub fn neg_laplacian(f: &GridFunction) -> GridFunction {
    let d = &f.domain;
    let mut out = vec![Complex64::new(0.0, 0.0); d.len()];
    for_each_face(d, |a, b, h| {
        let diff = (f.values[a] - f.values[b]) / (h * h);
        out[a] += diff;
        out[b] -= diff;
    });
    GridFunction::raw(d, out, f.dtype)
}

fn for_each_face(d: &Domain, mut visit: impl FnMut(usize, usize, f64)) {
    let [n0, n1] = d.shape();
    let steps = d.steps();
    for axis in 0..d.dim() {
        let n = d.shape()[axis];
        let faces = if d.is_periodic(axis) { n } else { n - 1 };
        for i in 0..n0 {
            for j in 0..n1 {
                let k = if axis == 0 { i } else { j };
                if k >= faces {
                    continue;
                }
                let next = (k + 1) % n;
                let b = if axis == 0 { d.index(next, j) } else { d.index(i, next) };
                visit(d.index(i, j), b, steps[axis]);
            }
        }
    }
}
