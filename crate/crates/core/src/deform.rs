//! Explicit comparison geometry: the radial Hopf-type barrier, and the
//! inversion (Kelvin-type) and conformal-shear deformations of
//! near-planar profiles together with their hodograph-level verifiers.
//!
//! The barrier is a closed-form radial comparison function on a sphere
//! chosen so that its boundary passes through a prescribed dip below the
//! origin and through the unit-half-width ring of the hyperplane: its
//! inward normal derivative over the lower cap stays above `1 - C r`.
//!
//! The deformations act on sampled half-plane profiles `V(x', x_n)`: an
//! inversion about a far-away center `rho e_n` composed with a
//! reflection, and the flow `exp(eps M)` of the shear generator
//! `M = p_n Id + e_n (x) p' - p' (x) e_n`.  Both are near-identity at
//! desk scale; the verifiers extract the hodograph of the deformed
//! profile by column root-finding and compare it against the original
//! hodograph plus the predicted quadratic (inversion) or linear (shear)
//! correction.  Pullbacks interpolate bicubically; the `O(h^4)` error is
//! budgeted into the verifier tolerances.

use crate::error::{CoreError, Result};
use alloc::format;
use alloc::vec::Vec;

// ---------------------------------------------------------------------------
// 2x2 matrices
// ---------------------------------------------------------------------------

/// Row-major 2x2 matrix `[a b; c d]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [f64; 4]);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([1.0, 0.0, 0.0, 1.0])
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2([self.0[0], self.0[2], self.0[1], self.0[3]])
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }

    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        Mat2([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
            self.0[3] + rhs.0[3],
        ])
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        [
            self.0[0] * x[0] + self.0[1] * x[1],
            self.0[2] * x[0] + self.0[3] * x[1],
        ]
    }

    /// Spectral operator norm, via the closed form for the largest
    /// singular value.
    pub fn operator_norm(&self) -> f64 {
        let t = self.transpose().mul(self);
        let (e, f, g) = (t.0[0], t.0[1], t.0[3]);
        let mid = 0.5 * (e + g);
        let rad = libm::sqrt(0.25 * (e - g) * (e - g) + f * f);
        libm::sqrt((mid + rad).max(0.0))
    }

    /// Matrix exponential by scaling and squaring with a Taylor kernel;
    /// accurate to about 1e-15 relative at moderate norms.
    pub fn exp(&self) -> Mat2 {
        let norm = self.operator_norm();
        let mut k = 0u32;
        let mut scaled = *self;
        if norm > 0.25 {
            k = libm::ceil(libm::log2(norm / 0.25)) as u32;
            scaled = self.scale(libm::pow(0.5, k as f64));
        }
        let mut sum = Mat2::identity();
        let mut term = Mat2::identity();
        for j in 1..=24 {
            term = term.mul(&scaled).scale(1.0 / j as f64);
            sum = sum.add(&term);
            if term.operator_norm() < 1e-18 {
                break;
            }
        }
        for _ in 0..k {
            sum = sum.mul(&sum);
        }
        sum
    }
}

/// The shear generator `M = p_n Id + e_n (x) p' - p' (x) e_n` in two
/// dimensions: `[[p_n, -p_1], [p_1, p_n]]`, assembled exactly.
pub fn shear_generator(p: [f64; 2]) -> Mat2 {
    Mat2([p[1], -p[0], p[0], p[1]])
}

// ---------------------------------------------------------------------------
// Sampled field patches and bicubic interpolation
// ---------------------------------------------------------------------------

/// Uniform rectangular sample lattice for a profile `V(x', x_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchGeometry {
    pub x0: f64,
    pub xn0: f64,
    pub hx: f64,
    pub hxn: f64,
    pub nx: usize,
    pub nxn: usize,
}

impl PatchGeometry {
    pub fn new(x0: f64, xn0: f64, hx: f64, hxn: f64, nx: usize, nxn: usize) -> Result<Self> {
        if !(hx > 0.0 && hx.is_finite() && hxn > 0.0 && hxn.is_finite())
            || !x0.is_finite()
            || !xn0.is_finite()
        {
            return Err(CoreError::Invalid {
                what: "patch geometry",
                detail: "origin and spacings must be finite, spacings positive".into(),
            });
        }
        if nx < 8 || nxn < 8 {
            return Err(CoreError::Invalid {
                what: "patch geometry",
                detail: format!("lattice {nx} x {nxn} must be at least 8 x 8"),
            });
        }
        Ok(PatchGeometry { x0, xn0, hx, hxn, nx, nxn })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    pub fn xn(&self, j: usize) -> f64 {
        self.xn0 + j as f64 * self.hxn
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Largest distance from the origin over the four corners.
    pub fn corner_radius(&self) -> f64 {
        let xs = [self.x0, self.x(self.nx - 1)];
        let ys = [self.xn0, self.xn(self.nxn - 1)];
        let mut r = 0.0f64;
        for x in xs {
            for y in ys {
                r = r.max(libm::sqrt(x * x + y * y));
            }
        }
        r
    }
}

/// Cubic Lagrange weights on the 4-node stencil `{-1, 0, 1, 2}` at the
/// normalized offset `t` inside `[0, 1]`.
fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t - 1.0) * (t + 1.0) * (t - 2.0) / 2.0,
        -t * (t + 1.0) * (t - 2.0) / 2.0,
        t * (t - 1.0) * (t + 1.0) / 6.0,
    ]
}

/// Bicubic evaluation over raw values; `None` when the 4x4 stencil does
/// not fit or touches a non-finite (masked) value.
fn bicubic(geom: &PatchGeometry, values: &[f64], x: f64, xn: f64) -> Option<f64> {
    let u = (x - geom.x0) / geom.hx;
    let w = (xn - geom.xn0) / geom.hxn;
    if !(u.is_finite() && w.is_finite()) {
        return None;
    }
    let i1 = libm::floor(u) as i64;
    let j1 = libm::floor(w) as i64;
    if i1 < 1 || i1 + 2 > geom.nx as i64 - 1 || j1 < 1 || j1 + 2 > geom.nxn as i64 - 1 {
        return None;
    }
    let wx = cubic_weights(u - i1 as f64);
    let wy = cubic_weights(w - j1 as f64);
    let mut acc = 0.0f64;
    for (dj, wyj) in wy.iter().enumerate() {
        let j = (j1 - 1) as usize + dj;
        let row = &values[j * geom.nx..(j + 1) * geom.nx];
        let mut line = 0.0f64;
        for (di, wxi) in wx.iter().enumerate() {
            line += wxi * row[(i1 - 1) as usize + di];
        }
        acc += wyj * line;
    }
    if acc.is_finite() {
        Some(acc)
    } else {
        None
    }
}

/// A fully sampled (finite-valued) profile patch.
#[derive(Debug, Clone)]
pub struct FieldPatch {
    geom: PatchGeometry,
    values: Vec<f64>,
}

impl FieldPatch {
    pub fn new(geom: PatchGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geom.nx * geom.nxn {
            return Err(CoreError::Invalid {
                what: "patch values",
                detail: format!("{} values for a {} x {} lattice", values.len(), geom.nx, geom.nxn),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::Invalid {
                what: "patch values",
                detail: "non-finite sample".into(),
            });
        }
        Ok(FieldPatch { geom, values })
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(geom: PatchGeometry, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(geom.nx * geom.nxn);
        for j in 0..geom.nxn {
            for i in 0..geom.nx {
                values.push(f(geom.x(i), geom.xn(j)));
            }
        }
        FieldPatch::new(geom, values)
    }

    pub fn geometry(&self) -> &PatchGeometry {
        &self.geom
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.geom.idx(i, j)]
    }

    /// Bicubic point evaluation; `None` outside the interpolable region.
    pub fn sample(&self, x: f64, xn: f64) -> Option<f64> {
        bicubic(&self.geom, &self.values, x, xn)
    }
}

/// A deformed profile on the same lattice as its source, with masked
/// nodes where the pullback left the sampled region.
#[derive(Debug, Clone)]
pub struct DeformedField {
    geom: PatchGeometry,
    values: Vec<f64>,
    mask: Vec<bool>,
    masked_count: usize,
    conformal: Option<Vec<f64>>,
}

impl DeformedField {
    pub fn geometry(&self) -> &PatchGeometry {
        &self.geom
    }

    /// Raw values; masked nodes hold NaN.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// True where the node is valid.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn masked_count(&self) -> usize {
        self.masked_count
    }

    /// Recorded conformal scale factor per node, when the deformation has
    /// one.
    pub fn conformal(&self) -> Option<&[f64]> {
        self.conformal.as_deref()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.geom.idx(i, j)]
    }

    /// Bicubic point evaluation; `None` when the stencil touches a
    /// masked node or leaves the patch.
    pub fn sample(&self, x: f64, xn: f64) -> Option<f64> {
        bicubic(&self.geom, &self.values, x, xn)
    }
}

// ---------------------------------------------------------------------------
// Deformation maps
// ---------------------------------------------------------------------------

/// Parameters for the near-identity deformations.
#[derive(Debug, Clone, Copy)]
pub struct DeformationParams {
    /// Inversion radius; at least 10 so the map stays near the identity.
    pub rho: f64,
    /// Shear vector `(p_1, p_n)`.
    pub shear: [f64; 2],
    pub eps: f64,
}

impl DeformationParams {
    /// Validates an inversion setup with `rho = 1/(eps b)`.
    pub fn for_inversion(b: f64, eps: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite() && eps > 0.0 && eps.is_finite()) {
            return Err(CoreError::Invalid {
                what: "inversion parameters",
                detail: format!("b = {b}, eps = {eps} must be positive and finite"),
            });
        }
        let rho = 1.0 / (eps * b);
        if rho < 10.0 - 1e-12 {
            return Err(CoreError::Invalid {
                what: "inversion radius",
                detail: format!("rho = {rho} below the near-identity floor 10"),
            });
        }
        Ok(DeformationParams { rho, shear: [0.0, 0.0], eps })
    }

    /// Validates a shear setup: `||eps M|| <= 0.2` (the generator's norm
    /// is exactly `|p|`).
    pub fn for_shear(p: [f64; 2], eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) || p.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::Invalid {
                what: "shear parameters",
                detail: "eps must be positive, p finite".into(),
            });
        }
        let norm = eps * libm::sqrt(p[0] * p[0] + p[1] * p[1]);
        if norm > 0.2 {
            return Err(CoreError::Invalid {
                what: "shear size",
                detail: format!("||eps M|| = {norm} exceeds 0.2"),
            });
        }
        Ok(DeformationParams { rho: f64::INFINITY, shear: p, eps })
    }
}

/// The inversion-reflection map: reflect across the hyperplane through
/// the center `rho e_n`, invert at radius `rho`, recenter.  Explicitly
/// `Phi(x) = rho^2 ((x', rho - x_n)) / (|x'|^2 + (x_n - rho)^2) - rho e_n`.
pub fn inversion_map(rho: f64, x: [f64; 2]) -> [f64; 2] {
    let q = x[0] * x[0] + (x[1] - rho) * (x[1] - rho);
    let s = rho * rho / q;
    [s * x[0], s * (rho - x[1]) - rho]
}

/// Closed-form inverse of [`inversion_map`]:
/// `Phi^{-1}(y) = R(I(y + rho e_n) - rho e_n)` with `R` the reflection
/// flipping the normal component and `I` the inversion at radius `rho`.
pub fn inversion_inverse(rho: f64, y: [f64; 2]) -> [f64; 2] {
    let q = y[0] * y[0] + (y[1] + rho) * (y[1] + rho);
    let s = rho * rho / q;
    [s * y[0], rho - s * (y[1] + rho)]
}

/// Kelvin-type transform of a sampled profile: for each lattice node `x`,
/// `V~(x) = (rho / |x - rho e_n|)^(dim - 2) V(Phi(x))`, with the pullback
/// interpolated bicubically and out-of-reach nodes masked.  The
/// prefactor degenerates to 1 in the plane (`dim = 2`), where the map is
/// conformal and harmonicity is preserved exactly; the recorded
/// conformal factor is the inversion scale `rho^2 / |x - rho e_n|^2`.
pub fn kelvin(field: &FieldPatch, rho: f64, dim: usize) -> Result<DeformedField> {
    if !(dim == 2 || dim == 3) {
        return Err(CoreError::Invalid {
            what: "kelvin dimension",
            detail: format!("dim = {dim} must be 2 or 3"),
        });
    }
    if !(rho >= 10.0 - 1e-12) || !rho.is_finite() {
        return Err(CoreError::Invalid {
            what: "inversion radius",
            detail: format!("rho = {rho} below the near-identity floor 10"),
        });
    }
    let geom = *field.geometry();
    let reach = geom.corner_radius();
    if reach > rho / 4.0 {
        return Err(CoreError::Invalid {
            what: "kelvin patch",
            detail: format!("patch radius {reach} exceeds rho/4 = {}", rho / 4.0),
        });
    }
    let mut values = Vec::with_capacity(geom.nx * geom.nxn);
    let mut mask = Vec::with_capacity(geom.nx * geom.nxn);
    let mut conformal = Vec::with_capacity(geom.nx * geom.nxn);
    let mut masked = 0usize;
    for j in 0..geom.nxn {
        for i in 0..geom.nx {
            let x = [geom.x(i), geom.xn(j)];
            let q = x[0] * x[0] + (x[1] - rho) * (x[1] - rho);
            conformal.push(rho * rho / q);
            let y = inversion_map(rho, x);
            let prefactor = if dim == 2 {
                1.0
            } else {
                rho / libm::sqrt(q)
            };
            match field.sample(y[0], y[1]) {
                Some(v) => {
                    values.push(prefactor * v);
                    mask.push(true);
                }
                None => {
                    values.push(f64::NAN);
                    mask.push(false);
                    masked += 1;
                }
            }
        }
    }
    Ok(DeformedField {
        geom,
        values,
        mask,
        masked_count: masked,
        conformal: Some(conformal),
    })
}

/// Conformal-shear deformation: evaluates the profile at
/// `exp(eps M) x` per lattice node, with `M` the exact shear generator,
/// so the result samples `V_p` with `V_p(exp(-eps M) x) = V(x)`.
pub fn shear(field: &FieldPatch, p: [f64; 2], eps: f64) -> Result<DeformedField> {
    DeformationParams::for_shear(p, eps)?;
    let forward = shear_generator(p).scale(eps).exp();
    let geom = *field.geometry();
    let mut values = Vec::with_capacity(geom.nx * geom.nxn);
    let mut mask = Vec::with_capacity(geom.nx * geom.nxn);
    let mut masked = 0usize;
    for j in 0..geom.nxn {
        for i in 0..geom.nx {
            let y = forward.apply([geom.x(i), geom.xn(j)]);
            match field.sample(y[0], y[1]) {
                Some(v) => {
                    values.push(v);
                    mask.push(true);
                }
                None => {
                    values.push(f64::NAN);
                    mask.push(false);
                    masked += 1;
                }
            }
        }
    }
    Ok(DeformedField {
        geom,
        values,
        mask,
        masked_count: masked,
        conformal: None,
    })
}

// ---------------------------------------------------------------------------
// Radial barrier
// ---------------------------------------------------------------------------

/// Geometry of the radial comparison barrier: the sphere of radius
/// `R = 1/(8r) + r/2` centered at `p e_n = (1/(8r) - r/2) e_n` passes
/// through the dip point `-r e_n` and the unit-half-width ring
/// `{|x'| = 1/2, x_n = 0}`.
#[derive(Debug, Clone, Copy)]
pub struct BarrierGeometry {
    pub r: f64,
    pub center: f64,
    pub radius: f64,
    pub dim: usize,
}

impl BarrierGeometry {
    /// Builds the geometry for `r` in `(0, 0.05)` and checks both sphere
    /// memberships to 1e-12.
    pub fn new(r: f64, dim: usize) -> Result<Self> {
        if !(r > 0.0 && r < 0.05) {
            return Err(CoreError::Invalid {
                what: "barrier dip",
                detail: format!("r = {r} outside (0, 0.05)"),
            });
        }
        if !(dim == 2 || dim == 3) {
            return Err(CoreError::Invalid {
                what: "barrier dimension",
                detail: format!("dim = {dim} must be 2 or 3"),
            });
        }
        let center = 1.0 / (8.0 * r) - 0.5 * r;
        let radius = 1.0 / (8.0 * r) + 0.5 * r;
        let dip = libm::fabs((center + r) - radius);
        let ring = libm::fabs(libm::sqrt(center * center + 0.25) - radius);
        if dip > 1e-12 * radius || ring > 1e-12 * radius {
            return Err(CoreError::Invalid {
                what: "barrier geometry",
                detail: format!("sphere memberships off by {dip} and {ring}"),
            });
        }
        Ok(BarrierGeometry { r, center, radius, dim })
    }

    fn f(&self, rho: f64) -> f64 {
        if self.dim == 2 {
            -libm::log(rho)
        } else {
            1.0 / rho
        }
    }

    fn f_prime(&self, rho: f64) -> f64 {
        if self.dim == 2 {
            -1.0 / rho
        } else {
            -1.0 / (rho * rho)
        }
    }

    /// Normalization making the barrier reach `1/16 - r` at radius
    /// `R - 1/16`.
    fn strength(&self) -> f64 {
        (1.0 / 16.0 - self.r) / (self.f(self.radius - 1.0 / 16.0) - self.f(self.radius))
    }

    /// The radial comparison function `U` at center-distance `rho`.
    pub fn profile(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(CoreError::Invalid {
                what: "barrier radius",
                detail: format!("rho = {rho} must be positive"),
            });
        }
        Ok(self.strength() * (self.f(rho) - self.f(self.radius)))
    }

    /// The barrier evaluated at a point `(x', x_n)` of the plane (or an
    /// axial slice in three dimensions).
    pub fn evaluate(&self, x: [f64; 2]) -> Result<f64> {
        let dx = x[1] - self.center;
        self.profile(libm::sqrt(x[0] * x[0] + dx * dx))
    }
}

/// Normal-derivative survey of the barrier over the lower spherical cap.
#[derive(Debug, Clone)]
pub struct BarrierReport {
    /// Minimum of the normal derivative over the cap lattice.
    pub minimum: f64,
    /// Direction cosine where the minimum was attained.
    pub at_omega: f64,
    /// Value at the south pole (`omega_n = -1`).
    pub south_pole: f64,
    /// Derived constant `(1 - minimum)/r`.
    pub fitted_c: f64,
    /// Number of angular lattice nodes surveyed.
    pub nodes: usize,
}

/// Evaluates the normal derivative of the barrier along the lower cap
/// `{x on the sphere, x_n <= 0}` on a fine lattice in the direction
/// cosine `omega_n = (x_n - p)/R` and returns its minimum, which the
/// geometry keeps at `1 - C r` with `C` stable across `r`.  The
/// derivative is radial: `d_n U = K f'(R) omega_n`, decreasing in
/// `|omega_n|`, so the minimum sits at the cap edge `omega_n = -p/R`.
pub fn barrier_lower_bound(geom: &BarrierGeometry, nodes: usize) -> Result<BarrierReport> {
    if nodes < 16 {
        return Err(CoreError::Invalid {
            what: "cap lattice",
            detail: format!("{nodes} nodes; need at least 16"),
        });
    }
    let k = geom.strength();
    let slope = k * libm::fabs(geom.f_prime(geom.radius));
    let edge = -geom.center / geom.radius;
    let mut minimum = f64::INFINITY;
    let mut at_omega = -1.0;
    for m in 0..nodes {
        let w = -1.0 + (1.0 + edge) * m as f64 / (nodes - 1) as f64;
        let v = slope * (-w);
        if v < minimum {
            minimum = v;
            at_omega = w;
        }
    }
    Ok(BarrierReport {
        minimum,
        at_omega,
        south_pole: slope,
        fitted_c: (1.0 - minimum) / geom.r,
        nodes,
    })
}

// ---------------------------------------------------------------------------
// Hodograph extraction and comparison verifiers
// ---------------------------------------------------------------------------

/// Solves `F(yp, z) = yn` for `z` near `yn` by bisection on a bracket of
/// half-width 0.45, for profiles increasing in the normal direction.
fn column_root<S: Fn(f64, f64) -> Option<f64>>(sampler: &S, yp: f64, yn: f64) -> Option<f64> {
    let mut lo = yn - 0.45;
    let mut hi = yn + 0.45;
    let mut flo = sampler(yp, lo)? - yn;
    let mut fhi = sampler(yp, hi)? - yn;
    if !(flo < 0.0 && fhi > 0.0) {
        return None;
    }
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        let fm = sampler(yp, mid)? - yn;
        if fm <= 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let _ = (flo, fhi);
    Some(0.5 * (lo + hi))
}

/// Hodograph values of a profile over an evaluation lattice on the unit
/// half-ball: at each `(yp, yn)` the height `z` with `F(yp, z) = yn` is
/// found and `(yn - z)/eps` recorded; unreachable nodes are masked.
fn hodograph_on<S: Fn(f64, f64) -> Option<f64>>(
    sampler: &S,
    points: &[(f64, f64)],
    eps: f64,
) -> (Vec<f64>, Vec<bool>, usize) {
    let mut values = Vec::with_capacity(points.len());
    let mut mask = Vec::with_capacity(points.len());
    let mut masked = 0usize;
    for (yp, yn) in points {
        match column_root(sampler, *yp, *yn) {
            Some(z) => {
                values.push((*yn - z) / eps);
                mask.push(true);
            }
            None => {
                values.push(f64::NAN);
                mask.push(false);
                masked += 1;
            }
        }
    }
    (values, mask, masked)
}

/// Evaluation lattice covering the closed unit half-ball.
fn half_ball_lattice(resolution: usize) -> Vec<(f64, f64)> {
    let np = resolution;
    let nn = resolution / 2 + 1;
    let mut points = Vec::new();
    for j in 0..nn {
        let yn = j as f64 / (nn - 1) as f64;
        for i in 0..np {
            let yp = -1.0 + 2.0 * i as f64 / (np - 1) as f64;
            if yp * yp + yn * yn <= 1.0 + 1e-9 {
                points.push((yp, yn));
            }
        }
    }
    points
}

/// Outcome of a deformation-comparison sweep point.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// Sup over the evaluated half-ball lattice of the discrepancy
    /// between the deformed hodograph and the corrected original.
    pub sup_discrepancy: f64,
    /// Same restricted to the flat boundary row `yn = 0`.
    pub boundary_discrepancy: f64,
    /// Number of lattice points compared.
    pub evaluated: usize,
    /// Points dropped because either hodograph was unreachable.
    pub masked: usize,
    /// Size parameter of the deformation (`eps * b` or `eps |p|`).
    pub deformation_size: f64,
}

fn comparison_guard(evaluated: usize, masked: usize) -> Result<()> {
    if evaluated * 4 < (evaluated + masked) * 3 {
        return Err(CoreError::Degenerate {
            what: "deformation comparison",
            detail: format!("only {evaluated} of {} hodograph nodes reachable", evaluated + masked),
        });
    }
    Ok(())
}

/// Compares the hodograph of the inversion-transformed profile against
/// the original hodograph plus the quadratic correction
/// `-b (|y'|^2 - (dim-1) yn^2)`: returns the sup discrepancy over the
/// unit half-ball.  The profile must increase through its zero level in
/// the normal direction over the evaluation columns.
pub fn verify_inversion_comparison(
    field: &FieldPatch,
    b: f64,
    eps: f64,
    dim: usize,
    resolution: usize,
) -> Result<ComparisonReport> {
    let params = DeformationParams::for_inversion(b, eps)?;
    if resolution < 9 {
        return Err(CoreError::Invalid {
            what: "comparison lattice",
            detail: format!("resolution {resolution}; need at least 9"),
        });
    }
    let transformed = kelvin(field, params.rho, dim)?;
    let points = half_ball_lattice(resolution);
    let base_sampler = |x: f64, z: f64| field.sample(x, z);
    let def_sampler = |x: f64, z: f64| transformed.sample(x, z);
    let (base, base_mask, base_masked) = hodograph_on(&base_sampler, &points, eps);
    let (def, def_mask, def_masked) = hodograph_on(&def_sampler, &points, eps);

    let mut sup = 0.0f64;
    let mut boundary = 0.0f64;
    let mut evaluated = 0usize;
    for (idx, (yp, yn)) in points.iter().enumerate() {
        if base_mask[idx] && def_mask[idx] {
            let correction = -b * (yp * yp - (dim as f64 - 1.0) * yn * yn);
            let d = libm::fabs(def[idx] - (base[idx] + correction));
            sup = sup.max(d);
            if *yn == 0.0 {
                boundary = boundary.max(d);
            }
            evaluated += 1;
        }
    }
    let masked = points.len() - evaluated;
    comparison_guard(evaluated, masked)?;
    let _ = (base_masked, def_masked);
    Ok(ComparisonReport {
        sup_discrepancy: sup,
        boundary_discrepancy: boundary,
        evaluated,
        masked,
        deformation_size: eps * b,
    })
}

/// Compares the hodograph of the shear-transformed profile against the
/// original hodograph plus the linear correction `p . y`: returns the
/// sup discrepancy over the unit half-ball.
pub fn verify_shear_comparison(
    field: &FieldPatch,
    p: [f64; 2],
    eps: f64,
    resolution: usize,
) -> Result<ComparisonReport> {
    DeformationParams::for_shear(p, eps)?;
    if resolution < 9 {
        return Err(CoreError::Invalid {
            what: "comparison lattice",
            detail: format!("resolution {resolution}; need at least 9"),
        });
    }
    let transformed = shear(field, p, eps)?;
    let points = half_ball_lattice(resolution);
    let base_sampler = |x: f64, z: f64| field.sample(x, z);
    let def_sampler = |x: f64, z: f64| transformed.sample(x, z);
    let (base, base_mask, _) = hodograph_on(&base_sampler, &points, eps);
    let (def, def_mask, _) = hodograph_on(&def_sampler, &points, eps);

    let mut sup = 0.0f64;
    let mut boundary = 0.0f64;
    let mut evaluated = 0usize;
    for (idx, (yp, yn)) in points.iter().enumerate() {
        if base_mask[idx] && def_mask[idx] {
            let correction = p[0] * yp + p[1] * yn;
            let d = libm::fabs(def[idx] - (base[idx] + correction));
            sup = sup.max(d);
            if *yn == 0.0 {
                boundary = boundary.max(d);
            }
            evaluated += 1;
        }
    }
    let masked = points.len() - evaluated;
    comparison_guard(evaluated, masked)?;
    Ok(ComparisonReport {
        sup_discrepancy: sup,
        boundary_discrepancy: boundary,
        evaluated,
        masked,
        deformation_size: eps * libm::sqrt(p[0] * p[0] + p[1] * p[1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fit_loglog_slope;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn default_patch() -> FieldPatch {
        // Planar profile on a patch comfortably inside rho/4 for rho >= 10.
        let geom = PatchGeometry::new(-1.7, -0.55, 3.4 / 127.0, 2.35 / 127.0, 128, 128).unwrap();
        FieldPatch::from_fn(geom, |_, xn| xn).unwrap()
    }

    #[test]
    fn matrix_exponential_matches_the_rotation_scaling_closed_form() {
        for (a, b, t) in [(0.3, 0.7, 1.0), (-0.2, 1.3, 0.5), (0.0, 2.0, 0.13), (1.1, -0.4, 0.77)]
        {
            let m = Mat2([a, -b, b, a]).scale(t);
            let e = m.exp();
            let scale = libm::exp(t * a);
            let (c, s) = (libm::cos(t * b), libm::sin(t * b));
            let exact = Mat2([scale * c, -scale * s, scale * s, scale * c]);
            for k in 0..4 {
                assert!(
                    (e.0[k] - exact.0[k]).abs() < 1e-14 * scale.max(1.0),
                    "entry {k}: {} vs {}",
                    e.0[k],
                    exact.0[k]
                );
            }
        }
    }

    #[test]
    fn shear_flow_is_conformal() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let eps: f64 = rng.gen_range(0.01..0.15);
            let inv = shear_generator(p).scale(-eps).exp();
            let prod = inv.mul(&inv.transpose());
            let expected = libm::exp(-2.0 * eps * p[1]);
            assert!((prod.0[0] - expected).abs() < 1e-12);
            assert!((prod.0[3] - expected).abs() < 1e-12);
            assert!(prod.0[1].abs() < 1e-12 && prod.0[2].abs() < 1e-12);
        }
    }

    #[test]
    fn shear_flow_matches_the_quadratic_series_at_small_size() {
        let eps = 0.01;
        let m = shear_generator([1.0, 0.0]);
        let e = m.scale(-eps).exp();
        let series = Mat2::identity()
            .add(&m.scale(-eps))
            .add(&m.mul(&m).scale(0.5 * eps * eps));
        for k in 0..4 {
            assert!((e.0[k] - series.0[k]).abs() < 2.0 * eps * eps * eps);
        }
    }

    #[test]
    fn zero_shear_is_the_identity_on_interior_nodes() {
        let patch = default_patch();
        let out = shear(&patch, [0.0, 0.0], 0.05).unwrap();
        let geom = *patch.geometry();
        let mut interior = 0usize;
        for j in 0..geom.nxn {
            for i in 0..geom.nx {
                if out.mask()[geom.idx(i, j)] {
                    interior += 1;
                    let d = (out.value(i, j) - patch.value(i, j)).abs();
                    assert!(d < 1e-13, "node ({i},{j}): drift {d}");
                }
            }
        }
        assert!(interior > geom.nx * geom.nxn / 2);
        assert_eq!(out.masked_count() + interior, geom.nx * geom.nxn);
    }

    #[test]
    fn inversion_round_trips_and_satisfies_the_defining_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1729);
        let rho = 12.0;
        for _ in 0..10_000 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            if x[0] * x[0] + x[1] * x[1] > (rho / 4.0) * (rho / 4.0) {
                continue;
            }
            let y = inversion_map(rho, x);
            let back = inversion_inverse(rho, y);
            assert!((back[0] - x[0]).abs() < 1e-10 && (back[1] - x[1]).abs() < 1e-10);
            let fwd = inversion_map(rho, inversion_inverse(rho, x));
            assert!((fwd[0] - x[0]).abs() < 1e-10 && (fwd[1] - x[1]).abs() < 1e-10);
            // |Phi(x) + rho e_n| |x - rho e_n| = rho^2.
            let a = libm::sqrt(y[0] * y[0] + (y[1] + rho) * (y[1] + rho));
            let b = libm::sqrt(x[0] * x[0] + (x[1] - rho) * (x[1] - rho));
            assert!((a * b - rho * rho).abs() < 1e-10 * rho * rho);
        }
    }

    #[test]
    fn inversion_is_near_identity_at_quadratic_order() {
        let rho = 15.0;
        for i in 0..41 {
            for j in 0..41 {
                let x = [-1.0 + i as f64 / 20.0, -1.0 + j as f64 / 20.0];
                let r2 = x[0] * x[0] + x[1] * x[1];
                if r2 > 1.0 {
                    continue;
                }
                let y = inversion_map(rho, x);
                let d = libm::sqrt((y[0] - x[0]) * (y[0] - x[0]) + (y[1] - x[1]) * (y[1] - x[1]));
                assert!(
                    d <= 3.5 * r2 / rho + 1e-12,
                    "at {x:?}: displacement {d} vs {}",
                    3.5 * r2 / rho
                );
            }
        }
    }

    #[test]
    fn kelvin_preserves_harmonicity_in_the_plane() {
        // Harmonic quartic with nonzero fourth derivatives, so both the
        // original and transformed fields carry an honest O(h^2) discrete
        // Laplacian residual to compare.
        let geom = PatchGeometry::new(-1.2, -1.2, 2.4 / 95.0, 2.4 / 95.0, 96, 96).unwrap();
        let quartic = |x: f64, y: f64| x * x * x * x - 6.0 * x * x * y * y + y * y * y * y;
        let patch = FieldPatch::from_fn(geom, quartic).unwrap();
        let rho = 20.0;
        let out = kelvin(&patch, rho, 2).unwrap();
        let h2 = geom.hx * geom.hx;
        let mut res_base = 0.0f64;
        let mut res_kelvin = 0.0f64;
        for j in 1..geom.nxn - 1 {
            for i in 1..geom.nx - 1 {
                let lap_base = (patch.value(i + 1, j)
                    + patch.value(i - 1, j)
                    + patch.value(i, j + 1)
                    + patch.value(i, j - 1)
                    - 4.0 * patch.value(i, j))
                    / h2;
                res_base = res_base.max(lap_base.abs());
                let ok = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1), (0, 0)]
                    .iter()
                    .all(|(di, dj)| {
                        out.mask()[geom.idx((i as i64 + di) as usize, (j as i64 + dj) as usize)]
                    });
                if ok {
                    let lap = (out.value(i + 1, j)
                        + out.value(i - 1, j)
                        + out.value(i, j + 1)
                        + out.value(i, j - 1)
                        - 4.0 * out.value(i, j))
                        / h2;
                    res_kelvin = res_kelvin.max(lap.abs());
                }
            }
        }
        assert!(res_base > 0.0);
        assert!(
            res_kelvin <= 10.0 * res_base,
            "transformed residual {res_kelvin} vs base {res_base}"
        );
        assert!(out.conformal().is_some());
    }

    #[test]
    fn kelvin_rejects_patches_reaching_past_a_quarter_radius() {
        let geom = PatchGeometry::new(-3.0, -3.0, 6.0 / 31.0, 6.0 / 31.0, 32, 32).unwrap();
        let patch = FieldPatch::from_fn(geom, |_, xn| xn).unwrap();
        assert!(kelvin(&patch, 12.0, 2).is_err());
    }

    #[test]
    fn barrier_geometry_holds_its_sphere_memberships() {
        for r in [0.005, 0.01, 0.02, 0.04, 0.049] {
            let g = BarrierGeometry::new(r, 2).unwrap();
            assert!(((g.center + r) - g.radius).abs() < 1e-12 * g.radius);
            assert!(
                (libm::sqrt(g.center * g.center + 0.25) - g.radius).abs() < 1e-12 * g.radius
            );
        }
        assert!(BarrierGeometry::new(0.05, 2).is_err());
        assert!(BarrierGeometry::new(0.0, 2).is_err());
        assert!(BarrierGeometry::new(0.02, 4).is_err());
    }

    #[test]
    fn barrier_minimum_approaches_one_in_the_flat_limit() {
        let g = BarrierGeometry::new(1e-3, 2).unwrap();
        let report = barrier_lower_bound(&g, 2048).unwrap();
        assert!((report.minimum - 1.0).abs() < 0.02);
        // The minimum sits at the cap edge, below the south-pole value.
        assert!(report.minimum <= report.south_pole + 1e-12);
        assert!((report.at_omega - (-g.center / g.radius)).abs() < 1e-3);
    }

    #[test]
    fn barrier_derivative_matches_a_finite_difference_of_the_profile() {
        let g = BarrierGeometry::new(0.02, 2).unwrap();
        let report = barrier_lower_bound(&g, 4096).unwrap();
        // Survey a few cap points: compare K f'(R) omega_n against a
        // central difference of U in the normal direction.
        let delta = 1e-6;
        for omega in [-1.0, -0.9, -0.5, -g.center / g.radius] {
            let s = libm::sqrt((1.0 - omega * omega).max(0.0));
            let x = [g.radius * s, g.center + g.radius * omega];
            let up = g.evaluate([x[0], x[1] + delta]).unwrap();
            let dn = g.evaluate([x[0], x[1] - delta]).unwrap();
            let fd = (up - dn) / (2.0 * delta);
            let closed = report.south_pole * (-omega);
            assert!(
                (fd - closed).abs() < 1e-7,
                "omega {omega}: fd {fd} vs closed {closed}"
            );
        }
    }

    #[test]
    fn barrier_constant_is_stable_across_dips_in_both_dimensions() {
        for dim in [2usize, 3] {
            let mut cs = Vec::new();
            for r in [0.01, 0.02, 0.04] {
                let g = BarrierGeometry::new(r, dim).unwrap();
                let report = barrier_lower_bound(&g, 2048).unwrap();
                assert!(report.minimum < 1.0);
                cs.push(report.fitted_c);
            }
            let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = cs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(
                hi / lo - 1.0 < 0.15,
                "dim {dim}: fitted constants {cs:?} spread beyond 15%"
            );
        }
    }

    #[test]
    fn shear_comparison_is_exact_for_planar_profiles() {
        // For V = x_n the transformed profile stays affine, bicubic
        // interpolation reproduces it exactly, and the extracted
        // hodograph matches the closed form
        // z = (exp(-eps p_n) yn - yp sin(eps p_1)) / cos(eps p_1).
        let patch = default_patch();
        let (p, eps) = ([0.7, 0.4], 0.05);
        let transformed = shear(&patch, p, eps).unwrap();
        let theta = eps * p[0];
        let scale = libm::exp(-eps * p[1]);
        for (yp, yn) in half_ball_lattice(21) {
            let sampler = |x: f64, z: f64| transformed.sample(x, z);
            if let Some(z) = column_root(&sampler, yp, yn) {
                let exact = (scale * yn - yp * libm::sin(theta)) / libm::cos(theta);
                assert!((z - exact).abs() < 1e-10, "root {z} vs {exact}");
            }
        }
        let report = verify_shear_comparison(&patch, p, eps, 41).unwrap();
        assert!(report.sup_discrepancy <= 0.05, "{}", report.sup_discrepancy);

        let zero = verify_shear_comparison(&patch, [0.0, 0.0], eps, 41).unwrap();
        assert!(zero.sup_discrepancy < 1e-11, "{}", zero.sup_discrepancy);
    }

    #[test]
    fn shear_comparison_discrepancy_scales_linearly() {
        let patch = default_patch();
        let p = [0.8, 0.5];
        let mut samples = Vec::new();
        for eps in [0.1, 0.03, 0.01] {
            let report = verify_shear_comparison(&patch, p, eps, 41).unwrap();
            samples.push((report.deformation_size, report.sup_discrepancy));
        }
        assert!(samples[2].1 <= 0.05, "smallest-size discrepancy {}", samples[2].1);
        let slope = fit_loglog_slope(&samples).unwrap();
        assert!(slope >= 0.8, "sweep slope {slope}");
    }

    #[test]
    fn inversion_comparison_shrinks_with_the_deformation_size() {
        let patch = default_patch();
        let b = 1.0;
        let mut samples = Vec::new();
        for eps in [0.1, 0.03, 0.01] {
            let report = verify_inversion_comparison(&patch, b, eps, 2, 41).unwrap();
            samples.push((report.deformation_size, report.sup_discrepancy));
        }
        assert!(samples[2].1 <= 0.05, "smallest-size discrepancy {}", samples[2].1);
        let slope = fit_loglog_slope(&samples).unwrap();
        assert!(slope >= 0.8, "sweep slope {slope}");
    }

    #[test]
    fn inversion_comparison_handles_a_perturbed_profile() {
        // Harmonic perturbation of the planar profile, still monotone in
        // the normal direction over the patch.
        let geom = PatchGeometry::new(-1.7, -0.55, 3.4 / 127.0, 2.35 / 127.0, 128, 128).unwrap();
        let patch = FieldPatch::from_fn(geom, |x, xn| xn + 0.05 * 2.0 * x * xn).unwrap();
        let report = verify_inversion_comparison(&patch, 1.0, 0.01, 2, 41).unwrap();
        assert!(report.sup_discrepancy <= 0.05, "{}", report.sup_discrepancy);
        // On the flat boundary row the correction reduces to -b |y'|^2.
        assert!(report.boundary_discrepancy <= report.sup_discrepancy + 1e-15);
        assert!(report.evaluated > 500);
    }
}
