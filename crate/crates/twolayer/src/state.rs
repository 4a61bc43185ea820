//! Conserved and primitive state representations.

use crate::error::ParamError;
use crate::params::Parameters;

/// Density-weighted conserved state of one grid cell.
///
/// `m1 = rho1*h1` (kg/m^2), `mu1 = rho1*h1*u1` (kg/(m s)), likewise for the
/// bottom layer. Bathymetry rides along since every interface computation
/// needs it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellState {
    pub m1: f64,
    pub mu1: f64,
    pub m2: f64,
    pub mu2: f64,
    /// Bed elevation (m), negative below the reference surface.
    pub b: f64,
}

impl CellState {
    pub const ZERO: CellState = CellState { m1: 0.0, mu1: 0.0, m2: 0.0, mu2: 0.0, b: 0.0 };

    /// The four conserved components, bathymetry excluded.
    pub fn as_array(&self) -> [f64; 4] {
        [self.m1, self.mu1, self.m2, self.mu2]
    }

    pub fn from_array(q: [f64; 4], b: f64) -> Self {
        Self { m1: q[0], mu1: q[1], m2: q[2], mu2: q[3], b }
    }

    /// Mirror image used for wall boundary ghost cells: depths kept,
    /// momenta negated.
    pub fn reflected(&self) -> Self {
        Self { m1: self.m1, mu1: -self.mu1, m2: self.m2, mu2: -self.mu2, b: self.b }
    }
}

/// Depths, limited velocities, and surface elevations of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState {
    /// Top layer depth (m).
    pub h1: f64,
    /// Top layer velocity (m/s), zero when the layer is dry.
    pub u1: f64,
    /// Bottom layer depth (m).
    pub h2: f64,
    /// Bottom layer velocity (m/s), zero when the layer is dry.
    pub u2: f64,
    /// Bed elevation (m).
    pub b: f64,
    /// Sea surface elevation (m).
    pub eta1: f64,
    /// Internal surface elevation (m); equals `b` where the bottom layer
    /// is dry.
    pub eta2: f64,
}

/// Surface elevations for given depths over bed `b`.
///
/// A layer thinner than the dry tolerance does not raise the surface: the
/// internal surface collapses onto the bed, and the sea surface sits the top
/// layer depth above whatever is below it.
pub fn surfaces(h1: f64, h2: f64, b: f64, p: &Parameters) -> (f64, f64) {
    let eta2 = if h2 >= p.dry_tolerance { b + h2 } else { b };
    let eta1 = eta2 + h1;
    (eta1, eta2)
}

/// Convert conserved to primitive state.
///
/// Velocities in layers thinner than the dry tolerance are set to zero (the
/// momentum stays in the conserved state; only the derived velocity is
/// limited). Depths are not clipped here.
pub fn to_primitive(q: &CellState, p: &Parameters) -> PrimitiveState {
    let h1 = q.m1 / p.rho1();
    let h2 = q.m2 / p.rho2();
    let u1 = if h1 >= p.dry_tolerance { q.mu1 / q.m1 } else { 0.0 };
    let u2 = if h2 >= p.dry_tolerance { q.mu2 / q.m2 } else { 0.0 };
    let (eta1, eta2) = surfaces(h1, h2, q.b, p);
    PrimitiveState { h1, u1, h2, u2, b: q.b, eta1, eta2 }
}

/// Multiply so that dividing back by `f` reproduces `x` exactly.
///
/// `fl(fl(x*f)/f)` can land one ulp off `x`; nudge the product until the
/// round trip closes. At most a couple of ulps are ever needed.
fn mul_exact_inverse(x: f64, f: f64) -> f64 {
    let mut m = x * f;
    if x == 0.0 || !m.is_finite() {
        return m;
    }
    for _ in 0..4 {
        let back = m / f;
        if back == x {
            return m;
        }
        m = if back < x { next_up(m) } else { next_down(m) };
    }
    x * f
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(if x >= 0.0 { x.to_bits() + 1 } else { x.to_bits() - 1 })
}

fn next_down(x: f64) -> f64 {
    f64::from_bits(if x > 0.0 { x.to_bits() - 1 } else { x.to_bits() + 1 })
}

/// Convert primitive depths/velocities to the conserved state.
///
/// Rejects negative depths. For wet layers the conversion is constructed so
/// that `to_primitive` recovers `h` and `u` bit-exactly whenever some
/// representable product divides back to the input, which is almost always;
/// in the remaining cases the round trip is off by one ulp. Zero velocity
/// always maps to exactly zero momentum.
pub fn from_primitive(s: &PrimitiveState, p: &Parameters) -> Result<CellState, ParamError> {
    if s.h1 < 0.0 {
        return Err(ParamError::NegativeDepth { layer: 1, depth: s.h1 });
    }
    if s.h2 < 0.0 {
        return Err(ParamError::NegativeDepth { layer: 2, depth: s.h2 });
    }
    let m1 = mul_exact_inverse(s.h1, p.rho1());
    let m2 = mul_exact_inverse(s.h2, p.rho2());
    let mu1 = if s.u1 == 0.0 { 0.0 } else { mul_exact_inverse(s.u1, m1) };
    let mu2 = if s.u2 == 0.0 { 0.0 } else { mul_exact_inverse(s.u2, m2) };
    Ok(CellState { m1, mu1, m2, mu2, b: s.b })
}
