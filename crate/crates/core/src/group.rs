//! Compact symmetry groups acting on discretized domains, their invariant
//! probability quadrature, and pullback `u ↦ u ∘ g`.
//!
//! An element acts on a grid in one of three ways. Grid symmetries (the
//! reflection, quarter turns of the square, angular shifts commensurate with
//! the cylinder's angular grid) are exact node permutations. Other angles are
//! interpolated, either by a nonnegative bilinear stencil or spectrally: a
//! rotation is split into a quarter-turn permutation and three Fourier shears
//! of at most 45 degrees, and an angular shift on the cylinder is a Fourier
//! phase ramp. Sources outside the truncated domain read as zero.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::signed_index;
use crate::grid::{l2_norm, Domain, DomainKind, GridFunction};

/// Guard used when normalizing deviations, so that `0/0` reads as zero.
pub const NORM_EPS: f64 = 1e-300;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Bilinear,
    #[default]
    Spectral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    /// `x ↦ -x` on `line1d`.
    ReflectionZ2,
    /// Rotations by `2πr/n` on `plane2d`.
    RotationZn {
        n: usize,
        #[serde(default)]
        interp: Interpolation,
    },
    /// `SO(2)` truncated to `m_quad` equispaced rotations on `plane2d`.
    CircleSo2 {
        m_quad: usize,
        #[serde(default)]
        interp: Interpolation,
    },
    /// Angular shifts of the cylinder at `m_quad` equispaced angles.
    CylinderShift {
        m_quad: usize,
        #[serde(default)]
        interp: Interpolation,
    },
}

impl GroupSpec {
    pub fn rotation_zn(n: usize) -> Self {
        GroupSpec::RotationZn { n, interp: Interpolation::default() }
    }

    pub fn circle_so2(m_quad: usize) -> Self {
        GroupSpec::CircleSo2 { m_quad, interp: Interpolation::default() }
    }

    pub fn cylinder_shift(m_quad: usize) -> Self {
        GroupSpec::CylinderShift { m_quad, interp: Interpolation::default() }
    }

    pub fn order(&self) -> usize {
        match *self {
            GroupSpec::ReflectionZ2 => 2,
            GroupSpec::RotationZn { n, .. } => n,
            GroupSpec::CircleSo2 { m_quad, .. } | GroupSpec::CylinderShift { m_quad, .. } => m_quad,
        }
    }

    pub fn interpolation(&self) -> Interpolation {
        match *self {
            GroupSpec::ReflectionZ2 => Interpolation::default(),
            GroupSpec::RotationZn { interp, .. }
            | GroupSpec::CircleSo2 { interp, .. }
            | GroupSpec::CylinderShift { interp, .. } => interp,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            GroupSpec::ReflectionZ2 => "reflection_z2".into(),
            GroupSpec::RotationZn { n, .. } => format!("rotation_zn({n})"),
            GroupSpec::CircleSo2 { m_quad, .. } => format!("circle_so2({m_quad})"),
            GroupSpec::CylinderShift { m_quad, .. } => format!("cylinder_shift({m_quad})"),
        }
    }

    /// Checks parameter ranges and that the group acts on `kind`.
    pub fn validate_for(&self, kind: DomainKind) -> Result<()> {
        let ok = match *self {
            GroupSpec::ReflectionZ2 => kind == DomainKind::Line1d,
            GroupSpec::RotationZn { n, .. } => {
                if n < 2 {
                    return Err(Error::InvalidParameter(format!("rotation_zn needs n >= 2, got {n}")));
                }
                kind == DomainKind::Plane2d
            }
            GroupSpec::CircleSo2 { m_quad, .. } => {
                if m_quad < 8 {
                    return Err(Error::InvalidParameter(format!("circle_so2 needs m_quad >= 8, got {m_quad}")));
                }
                kind == DomainKind::Plane2d
            }
            GroupSpec::CylinderShift { m_quad, .. } => {
                if m_quad < 8 {
                    return Err(Error::InvalidParameter(format!("cylinder_shift needs m_quad >= 8, got {m_quad}")));
                }
                kind == DomainKind::Cylinder
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("group {} does not act on {} domains", self.label(), kind.name())))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapClass {
    Exact,
    Interpolated,
}

impl MapClass {
    pub fn as_str(self) -> &'static str {
        match self {
            MapClass::Exact => "exact",
            MapClass::Interpolated => "interpolated",
        }
    }
}

/// Source node and weight; `usize::MAX` marks a source outside the domain.
pub type StencilEntry = (usize, f64);

#[derive(Clone)]
enum MapRule {
    Permutation(Vec<usize>),
    Bilinear(Vec<[StencilEntry; 4]>),
    ShearRotation { quarter: Vec<usize>, angle: f64, plan: Arc<ShearPlan> },
    AngularShift { shift: f64, plan: Arc<dyn Fft<f64>>, inverse: Arc<dyn Fft<f64>> },
}

/// How one group element pulls a function back on a specific domain.
#[derive(Clone)]
pub struct GroupElementMap {
    domain: Domain,
    /// Rotation angle or angular shift; `π` stands for the reflection.
    angle: f64,
    rule: MapRule,
}

impl std::fmt::Debug for GroupElementMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupElementMap")
            .field("domain", &self.domain.describe())
            .field("angle", &self.angle)
            .field("class", &self.class())
            .finish()
    }
}

impl GroupElementMap {
    pub fn identity(domain: &Domain) -> Self {
        GroupElementMap { domain: domain.clone(), angle: 0.0, rule: MapRule::Permutation((0..domain.len()).collect()) }
    }

    pub fn reflection(domain: &Domain) -> Result<Self> {
        if domain.kind() != DomainKind::Line1d {
            return Err(Error::Unsupported("reflection is defined on line1d".into()));
        }
        let n = domain.shape()[0];
        Ok(GroupElementMap { domain: domain.clone(), angle: PI, rule: MapRule::Permutation((0..n).rev().collect()) })
    }

    /// Rotation `x ↦ R_angle x` on a square grid.
    pub fn rotation(domain: &Domain, angle: f64, interp: Interpolation) -> Result<Self> {
        if domain.kind() != DomainKind::Plane2d {
            return Err(Error::Unsupported("rotations are defined on plane2d".into()));
        }
        if let Some(perm) = rotation_permutation(domain, angle) {
            return Ok(GroupElementMap { domain: domain.clone(), angle, rule: MapRule::Permutation(perm) });
        }
        let rule = match interp {
            Interpolation::Bilinear => MapRule::Bilinear(bilinear_rotation(domain, angle)),
            Interpolation::Spectral => {
                let quarters = (angle / (PI / 2.0)).round();
                let residual = angle - quarters * PI / 2.0;
                let quarter = rotation_permutation(domain, quarters * PI / 2.0)
                    .expect("quarter turns of a square grid are permutations");
                MapRule::ShearRotation { quarter, angle: residual, plan: Arc::new(ShearPlan::new(domain)) }
            }
        };
        Ok(GroupElementMap { domain: domain.clone(), angle, rule })
    }

    /// Angular shift `(x, θ) ↦ (x, θ + shift)` on the cylinder.
    pub fn angular_shift(domain: &Domain, shift: f64, interp: Interpolation) -> Result<Self> {
        if domain.kind() != DomainKind::Cylinder {
            return Err(Error::Unsupported("angular shifts are defined on the cylinder".into()));
        }
        let [n0, m] = domain.shape();
        let h = domain.steps()[1];
        let steps = shift / h;
        let whole = steps.round();
        if (steps - whole).abs() < 1e-9 {
            let k = (whole as i64).rem_euclid(m as i64) as usize;
            let perm = (0..n0 * m).map(|idx| (idx / m) * m + (idx % m + k) % m).collect();
            return Ok(GroupElementMap { domain: domain.clone(), angle: shift, rule: MapRule::Permutation(perm) });
        }
        let rule = match interp {
            Interpolation::Bilinear => {
                let base = steps.floor();
                let a = steps - base;
                let k = (base as i64).rem_euclid(m as i64) as usize;
                let st = (0..n0 * m)
                    .map(|idx| {
                        let (i, j) = (idx / m, idx % m);
                        [
                            (i * m + (j + k) % m, 1.0 - a),
                            (i * m + (j + k + 1) % m, a),
                            (usize::MAX, 0.0),
                            (usize::MAX, 0.0),
                        ]
                    })
                    .collect();
                MapRule::Bilinear(st)
            }
            Interpolation::Spectral => {
                let mut planner = FftPlanner::new();
                MapRule::AngularShift {
                    shift,
                    plan: planner.plan_fft_forward(m),
                    inverse: planner.plan_fft_inverse(m),
                }
            }
        };
        Ok(GroupElementMap { domain: domain.clone(), angle: shift, rule })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn class(&self) -> MapClass {
        match self.rule {
            MapRule::Permutation(_) => MapClass::Exact,
            _ => MapClass::Interpolated,
        }
    }

    /// Node permutation for exact maps: `(u ∘ g)[i] = u[perm[i]]`.
    pub fn permutation(&self) -> Option<&[usize]> {
        match &self.rule {
            MapRule::Permutation(p) => Some(p),
            _ => None,
        }
    }

    /// Per-node bilinear stencil for stencil-interpolated maps.
    pub fn stencil(&self) -> Option<&[[StencilEntry; 4]]> {
        match &self.rule {
            MapRule::Bilinear(s) => Some(s),
            _ => None,
        }
    }

    pub(crate) fn apply(&self, values: &[Complex64]) -> Vec<Complex64> {
        match &self.rule {
            MapRule::Permutation(p) => p.iter().map(|&s| values[s]).collect(),
            MapRule::Bilinear(st) => st
                .iter()
                .map(|row| {
                    row.iter()
                        .filter(|(s, _)| *s != usize::MAX)
                        .fold(Complex64::new(0.0, 0.0), |acc, &(s, w)| acc + values[s] * w)
                })
                .collect(),
            MapRule::ShearRotation { quarter, angle, plan } => {
                let turned: Vec<Complex64> = quarter.iter().map(|&s| values[s]).collect();
                plan.rotate(&turned, *angle)
            }
            MapRule::AngularShift { shift, plan, inverse } => {
                let [n0, m] = self.domain.shape();
                let mut out = values.to_vec();
                for i in 0..n0 {
                    let row = &mut out[i * m..(i + 1) * m];
                    plan.process(row);
                    for (j, c) in row.iter_mut().enumerate() {
                        *c *= shift_factor(j, m, *shift);
                    }
                    inverse.process(row);
                    for c in row.iter_mut() {
                        *c /= m as f64;
                    }
                }
                out
            }
        }
    }
}

/// `u ∘ g`.
pub fn act(g: &GroupElementMap, u: &GridFunction) -> Result<GridFunction> {
    g.domain.check_same(u.domain())?;
    Ok(act_unchecked(g, u))
}

pub(crate) fn act_unchecked(g: &GroupElementMap, u: &GridFunction) -> GridFunction {
    let mut vals = g.apply(u.values());
    if u.is_real() {
        for v in vals.iter_mut() {
            v.im = 0.0;
        }
    }
    GridFunction::raw(u.domain(), vals, u.dtype())
}

/// Finite group with uniform weights standing in for the invariant
/// probability measure `dg`.
#[derive(Clone, Debug)]
pub struct GroupQuadrature {
    spec: GroupSpec,
    domain: Domain,
    elements: Vec<GroupElementMap>,
    weights: Vec<f64>,
}

impl GroupQuadrature {
    pub fn new(domain: &Domain, spec: &GroupSpec) -> Result<Self> {
        spec.validate_for(domain.kind())?;
        let m = spec.order();
        let interp = spec.interpolation();
        let elements = (0..m)
            .map(|k| {
                let angle = 2.0 * PI * k as f64 / m as f64;
                match spec {
                    GroupSpec::ReflectionZ2 => {
                        if k == 0 {
                            Ok(GroupElementMap::identity(domain))
                        } else {
                            GroupElementMap::reflection(domain)
                        }
                    }
                    GroupSpec::RotationZn { .. } | GroupSpec::CircleSo2 { .. } => {
                        GroupElementMap::rotation(domain, angle, interp)
                    }
                    GroupSpec::CylinderShift { .. } => GroupElementMap::angular_shift(domain, angle, interp),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupQuadrature { spec: spec.clone(), domain: domain.clone(), elements, weights: vec![1.0 / m as f64; m] })
    }

    /// The same group acting on another domain of the same kind (for example
    /// the difference grid).
    pub fn on_domain(&self, domain: &Domain) -> Result<Self> {
        Self::new(domain, &self.spec)
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn elements(&self) -> &[GroupElementMap] {
        &self.elements
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn class(&self) -> MapClass {
        if self.elements.iter().all(|g| g.class() == MapClass::Exact) {
            MapClass::Exact
        } else {
            MapClass::Interpolated
        }
    }

    /// `[u ∘ g_k]_k` for every element, in element order.
    pub fn orbit(&self, u: &GridFunction) -> Result<Vec<GridFunction>> {
        self.domain.check_same(u.domain())?;
        Ok(self.elements.par_iter().map(|g| act_unchecked(g, u)).collect())
    }

    /// Closure, identity and inverses of the element set, checked on the
    /// element angles and, for exact maps, on the permutations themselves.
    pub fn check_axioms(&self) -> Result<()> {
        let m = self.len();
        let idx_of = |angle: f64| -> Option<usize> {
            let k = angle / (2.0 * PI) * m as f64;
            let r = k.round();
            ((k - r).abs() < 1e-9).then(|| (r as i64).rem_euclid(m as i64) as usize)
        };
        if self.elements[0].angle != 0.0 {
            return Err(Error::InvalidParameter("first element is not the identity".into()));
        }
        let ks: Vec<usize> = self
            .elements
            .iter()
            .map(|g| idx_of(g.angle).ok_or_else(|| Error::InvalidParameter("element off the cyclic lattice".into())))
            .collect::<Result<_>>()?;
        for (a, ga) in self.elements.iter().enumerate() {
            let inv = (m - ks[a]) % m;
            if !ks.contains(&inv) {
                return Err(Error::InvalidParameter(format!("element {a} has no inverse")));
            }
            for (b, gb) in self.elements.iter().enumerate() {
                let c = (ks[a] + ks[b]) % m;
                let pos = ks
                    .iter()
                    .position(|&k| k == c)
                    .ok_or_else(|| Error::InvalidParameter(format!("product of {a} and {b} missing")))?;
                if let (Some(pa), Some(pb), Some(pc)) =
                    (ga.permutation(), gb.permutation(), self.elements[pos].permutation())
                {
                    // u∘(g_a g_b)[i] = u[pa[pb[i]]]
                    if (0..pa.len()).any(|i| pa[pb[i]] != pc[i]) {
                        return Err(Error::InvalidParameter(format!("permutations {a},{b} do not compose")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `(max_g ‖u∘g − u‖₂ / max(‖u‖₂, ε) <= tol, deviation)`.
pub fn is_invariant(u: &GridFunction, group: &GroupQuadrature, tol: f64) -> Result<(bool, f64)> {
    let deviation = invariance_deviation(u, group)?;
    Ok((deviation <= tol, deviation))
}

pub fn invariance_deviation(u: &GridFunction, group: &GroupQuadrature) -> Result<f64> {
    let norm = l2_norm(u).max(NORM_EPS);
    let orbit = group.orbit(u)?;
    let mut worst = 0.0f64;
    for v in &orbit {
        worst = worst.max(l2_norm(&v.sub(u)?) / norm);
    }
    Ok(worst)
}

fn rotation_permutation(domain: &Domain, angle: f64) -> Option<Vec<usize>> {
    let (s, c) = angle.sin_cos();
    let n = domain.shape()[0];
    let h = domain.steps()[0];
    let l = domain.half_width();
    let mut perm = Vec::with_capacity(domain.len());
    for idx in 0..domain.len() {
        let [x, y] = domain.coord(idx);
        let (sx, sy) = (c * x - s * y, s * x + c * y);
        let fi = (sx + l) / h - 0.5;
        let fj = (sy + l) / h - 0.5;
        let (ri, rj) = (fi.round(), fj.round());
        if (fi - ri).abs() > 1e-9 || (fj - rj).abs() > 1e-9 || ri < 0.0 || rj < 0.0 || ri >= n as f64 || rj >= n as f64
        {
            return None;
        }
        perm.push(domain.index(ri as usize, rj as usize));
    }
    Some(perm)
}

fn bilinear_rotation(domain: &Domain, angle: f64) -> Vec<[StencilEntry; 4]> {
    let (s, c) = angle.sin_cos();
    let n = domain.shape()[0] as i64;
    let h = domain.steps()[0];
    let l = domain.half_width();
    (0..domain.len())
        .map(|idx| {
            let [x, y] = domain.coord(idx);
            let fi = (c * x - s * y + l) / h - 0.5;
            let fj = (s * x + c * y + l) / h - 0.5;
            let (i0, j0) = (fi.floor(), fj.floor());
            let (a, b) = (fi - i0, fj - j0);
            let (i0, j0) = (i0 as i64, j0 as i64);
            let node = |i: i64, j: i64| {
                if i < 0 || j < 0 || i >= n || j >= n {
                    usize::MAX
                } else {
                    domain.index(i as usize, j as usize)
                }
            };
            [
                (node(i0, j0), (1.0 - a) * (1.0 - b)),
                (node(i0 + 1, j0), a * (1.0 - b)),
                (node(i0, j0 + 1), (1.0 - a) * b),
                (node(i0 + 1, j0 + 1), a * b),
            ]
        })
        .collect()
}

/// Multiplier realizing `f(θ) ↦ f(θ + shift)` on frequency slot `j` of a
/// length-`m` periodic transform; the Nyquist slot uses the real-preserving
/// `cos` form.
fn shift_factor(j: usize, m: usize, shift_radians_or_len: f64) -> Complex64 {
    let k = signed_index(j, m) as f64;
    if m.is_multiple_of(2) && j == m / 2 {
        Complex64::new((k * shift_radians_or_len).cos(), 0.0)
    } else {
        Complex64::from_polar(1.0, k * shift_radians_or_len)
    }
}

/// Three-shear Fourier rotation on a zero-padded copy of a square grid.
struct ShearPlan {
    n: usize,
    pad: usize,
    size: usize,
    step: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl ShearPlan {
    fn new(domain: &Domain) -> Self {
        let n = domain.shape()[0];
        let pad = n.div_ceil(2);
        let size = n + 2 * pad;
        let mut planner = FftPlanner::new();
        ShearPlan {
            n,
            pad,
            size,
            step: domain.steps()[0],
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
        }
    }

    fn coord(&self, i: usize) -> f64 {
        (i as f64 + 0.5 - self.size as f64 / 2.0) * self.step
    }

    /// `v ↦ v ∘ R_angle` for `|angle| <= π/4`.
    fn rotate(&self, values: &[Complex64], angle: f64) -> Vec<Complex64> {
        let (n, p, pad) = (self.n, self.size, self.pad);
        let mut buf = vec![Complex64::new(0.0, 0.0); p * p];
        for i in 0..n {
            for j in 0..n {
                buf[(i + pad) * p + j + pad] = values[i * n + j];
            }
        }
        let t = (angle / 2.0).tan();
        let s = angle.sin();
        // v(S1 S2 S3 x) with S1 = S3 = shear_x(-t), S2 = shear_y(s)
        self.shear(&mut buf, 0, -t);
        self.shear(&mut buf, 1, s);
        self.shear(&mut buf, 0, -t);
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = buf[(i + pad) * p + j + pad];
            }
        }
        out
    }

    /// `axis == 0`: `f(x, y) ↦ f(x + a y, y)`; `axis == 1`: `f(x, y) ↦ f(x, y + a x)`.
    fn shear(&self, buf: &mut [Complex64], axis: usize, a: f64) {
        let p = self.size;
        let dk = 2.0 * PI / (p as f64 * self.step);
        let mut line = vec![Complex64::new(0.0, 0.0); p];
        for other in 0..p {
            let at = |k: usize| if axis == 0 { k * p + other } else { other * p + k };
            for k in 0..p {
                line[k] = buf[at(k)];
            }
            self.fwd.process(&mut line);
            let shift = a * self.coord(other);
            for (k, c) in line.iter_mut().enumerate() {
                *c *= shift_factor(k, p, dk * shift);
            }
            self.inv.process(&mut line);
            for k in 0..p {
                buf[at(k)] = line[k] / p as f64;
            }
        }
    }
}
