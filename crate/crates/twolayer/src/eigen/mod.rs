//! Eigenstructure of the two-layer quasilinear system.
//!
//! Four interchangeable strategies produce the wave speeds and eigenvectors
//! used to decompose flux differences at cell interfaces:
//!
//! * velocity difference: closed-form external/internal speed estimates,
//!   valid while the shear between layers stays below the internal-wave
//!   stability threshold,
//! * linearized (static or dynamic): speeds of small perturbations to a
//!   quiescent two-layer column, evaluated either at frozen background
//!   depths or at the local depths,
//! * direct: all four roots of the characteristic quartic via an analytic
//!   factorization with Newton polish.
//!
//! Eigenvectors are columns `[1, s, a, s*a]` in the density-weighted
//! conserved variables, where `a` couples the bottom-layer response to a
//! unit top-layer perturbation.

pub(crate) mod quartic;

use crate::error::SolverError;
use crate::params::Parameters;
use crate::state::PrimitiveState;

/// Threshold below which the bottom-layer resonance denominator
/// `(s - u2)^2 - g h2` is considered singular and the top-layer form of the
/// eigenvector coupling is used instead. Scaled by the local gravity-wave
/// energy `g (h1 + h2)` with an absolute floor for very shallow states.
const ALPHA_SWITCH_TOL: f64 = 1e-8;

/// Relative threshold on |imaginary part| / spectral radius above which the
/// direct solver reports loss of hyperbolicity.
const COMPLEX_REL_TOL: f64 = 1e-8;

/// Which side of an interface has a dry bottom layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrySide {
    LeftDry,
    RightDry,
}

/// Wave speeds and matching eigenvector columns, sorted ascending by speed:
/// external-left, internal-left, internal-right, external-right.
#[derive(Debug, Clone, Copy)]
pub struct EigenBasis {
    /// Wave speeds [m/s], ascending.
    pub speeds: [f64; 4],
    /// `columns[p]` is the eigenvector of `speeds[p]` in density-weighted
    /// conserved variables, scaled so its first entry is 1.
    pub columns: [[f64; 4]; 4],
    /// Which strategy produced this basis.
    pub method: &'static str,
}

impl EigenBasis {
    /// Assemble a basis, sorting waves ascending by speed.
    pub(crate) fn sorted(mut speeds: [f64; 4], mut columns: [[f64; 4]; 4], method: &'static str) -> Self {
        let mut idx = [0usize, 1, 2, 3];
        idx.sort_by(|&a, &b| speeds[a].partial_cmp(&speeds[b]).unwrap());
        let (s0, c0) = (speeds, columns);
        for (w, &i) in idx.iter().enumerate() {
            speeds[w] = s0[i];
            columns[w] = c0[i];
        }
        Self { speeds, columns, method }
    }
}

/// Depth ratio and the roots of its coupling quadratic
/// `a^2 + (1 - gamma) a - r gamma = 0`.
///
/// `alpha_plus` belongs to the external wave pair, `alpha_minus` to the
/// internal pair. These couple raw (not density-weighted) layer depth
/// perturbations; divide by `r` for the conserved-variable eigenvector.
#[derive(Debug, Clone, Copy)]
pub struct GammaAlpha {
    /// Depth ratio h2/h1.
    pub gamma: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

/// Solve the coupling quadratic without cancellation.
///
/// The discriminant `(gamma - 1)^2 + 4 r gamma` is nonnegative for any
/// `gamma >= 0`, `r >= 0`, so both roots are real.
pub fn linearized_alpha(gamma: f64, r: f64) -> GammaAlpha {
    let b = 1.0 - gamma;
    let c = -r * gamma;
    if c == 0.0 {
        // gamma = 0 or r = 0: roots are 0 and gamma - 1.
        let other = -b;
        return GammaAlpha {
            gamma,
            alpha_plus: 0.0_f64.max(other),
            alpha_minus: 0.0_f64.min(other),
        };
    }
    let disc = b * b - 4.0 * c;
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = (q, c / q);
    GammaAlpha { gamma, alpha_plus: r1.max(r2), alpha_minus: r1.min(r2) }
}

/// Bottom/top coupling entry of the eigenvector for speed `s` at the given
/// state, in density-weighted conserved variables.
///
/// Two forms exist, equal whenever `s` is an exact characteristic root; for
/// approximate speeds the bottom-layer form `g h2 / ((s - u2)^2 - g h2)` is
/// used, switching to the top-layer form `((s - u1)^2 - g h1) / (r g h1)`
/// when its denominator degenerates (each form is regular where the other
/// is singular).
pub fn consistent_alpha(s: f64, prim: &PrimitiveState, p: &Parameters) -> f64 {
    let g = p.g;
    let den2 = (s - prim.u2) * (s - prim.u2) - g * prim.h2;
    if den2.abs() < ALPHA_SWITCH_TOL * (g * (prim.h1 + prim.h2)).max(1.0) {
        ((s - prim.u1) * (s - prim.u1) - g * prim.h1) / (p.r() * g * prim.h1)
    } else {
        g * prim.h2 / den2
    }
}

fn column(s: f64, alpha: f64) -> [f64; 4] {
    [1.0, s, alpha, s * alpha]
}

/// Quasilinear flux Jacobian at a state, in density-weighted conserved
/// variables `[r1 h1, r1 h1 u1, r2 h2, r2 h2 u2]` (r1, r2 the layer
/// densities). Row-major.
pub fn quasilinear_matrix(prim: &PrimitiveState, p: &Parameters) -> [[f64; 4]; 4] {
    let g = p.g;
    let r = p.r();
    let (h1, u1, h2, u2) = (prim.h1, prim.u1, prim.h2, prim.u2);
    [
        [0.0, 1.0, 0.0, 0.0],
        [g * h1 - u1 * u1, 2.0 * u1, r * g * h1, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [g * h2, 0.0, g * h2 - u2 * u2, 2.0 * u2],
    ]
}

/// Characteristic polynomial in factored form and its derivative:
/// `f(s) = ((s-u1)^2 - g h1) ((s-u2)^2 - g h2) - r g^2 h1 h2`.
pub(crate) fn char_poly(s: f64, prim: &PrimitiveState, p: &Parameters) -> (f64, f64) {
    let g = p.g;
    let d1 = s - prim.u1;
    let d2 = s - prim.u2;
    let f1 = d1 * d1 - g * prim.h1;
    let f2 = d2 * d2 - g * prim.h2;
    let f = f1 * f2 - p.r() * g * g * prim.h1 * prim.h2;
    let fp = 2.0 * d1 * f2 + 2.0 * d2 * f1;
    (f, fp)
}

/// Linearized basis about a quiescent column of depths `(h1, h2)`.
///
/// External speeds `+-sqrt(g h1 (1 + a+))`, internal `+-sqrt(g h1 (1 + a-))`,
/// eigenvector couplings `a+- / r`.
pub fn linearized_basis(h1: f64, h2: f64, p: &Parameters) -> Result<EigenBasis, SolverError> {
    if h1 <= 0.0 {
        return Err(SolverError::DegenerateTopLayer { h1 });
    }
    let r = p.r();
    let alpha = linearized_alpha(h2 / h1, r);
    // 1 + a- = (gamma + 1 - sqrt((gamma-1)^2 + 4 r gamma)) / 2 >= 0 whenever
    // r <= 1; clamp roundoff.
    let ext = (p.g * h1 * (1.0 + alpha.alpha_plus)).max(0.0).sqrt();
    let int = (p.g * h1 * (1.0 + alpha.alpha_minus)).max(0.0).sqrt();
    let a_ext = alpha.alpha_plus / r;
    let a_int = alpha.alpha_minus / r;
    Ok(EigenBasis::sorted(
        [-ext, -int, int, ext],
        [
            column(-ext, a_ext),
            column(-int, a_int),
            column(int, a_int),
            column(ext, a_ext),
        ],
        "linearized",
    ))
}

/// Linearized basis split across an interface: the two left-going waves use
/// the left-side depths, the two right-going waves the right-side depths.
pub(crate) fn linearized_pair(
    left: (f64, f64),
    right: (f64, f64),
    p: &Parameters,
) -> Result<EigenBasis, SolverError> {
    let bl = linearized_basis(left.0, left.1, p)?;
    let br = linearized_basis(right.0, right.1, p)?;
    Ok(EigenBasis::sorted(
        [bl.speeds[0], bl.speeds[1], br.speeds[2], br.speeds[3]],
        [bl.columns[0], bl.columns[1], br.columns[2], br.columns[3]],
        "linearized",
    ))
}

/// Closed-form speed estimates from depth-averaged convection plus
/// gravity-wave corrections. Left-going waves are evaluated at the left
/// state, right-going at the right state.
///
/// Fails when the layer shear exceeds the internal-wave threshold
/// `(u1 - u2)^2 > g' (h1 + h2)` (negative radicand), the onset of
/// shear instability for this approximation.
pub fn velocity_difference_basis(
    l: &PrimitiveState,
    r_: &PrimitiveState,
    p: &Parameters,
) -> Result<EigenBasis, SolverError> {
    let g = p.g;
    let g_red = p.reduced_gravity();
    let side = |s: &PrimitiveState| -> Result<(f64, f64, f64, f64), SolverError> {
        let h = s.h1 + s.h2;
        let conv_ext = (s.h1 * s.u1 + s.h2 * s.u2) / h;
        let c_ext = (g * h).sqrt();
        let conv_int = (s.h1 * s.u2 + s.h2 * s.u1) / h;
        let shear = s.u1 - s.u2;
        // Written as a product of finite factors so the g' -> 0 limit stays
        // well defined.
        let radicand = (s.h1 * s.h2 / h) * (g_red - shear * shear / h);
        if radicand < 0.0 {
            return Err(SolverError::HyperbolicityLoss {
                method: "velocity-difference",
                detail: "layer shear exceeds internal-wave threshold",
                value: radicand,
            });
        }
        Ok((conv_ext, c_ext, conv_int, radicand.sqrt()))
    };
    let (cel, ccl, cil, sil) = side(l)?;
    let (cer, ccr, cir, sir) = side(r_)?;
    let speeds = [cel - ccl, cil - sil, cir + sir, cer + ccr];
    let columns = [
        column(speeds[0], consistent_alpha(speeds[0], l, p)),
        column(speeds[1], consistent_alpha(speeds[1], l, p)),
        column(speeds[2], consistent_alpha(speeds[2], r_, p)),
        column(speeds[3], consistent_alpha(speeds[3], r_, p)),
    ];
    Ok(EigenBasis::sorted(speeds, columns, "velocity-difference"))
}

/// All four characteristic speeds at `prim` from the quartic
/// `((s-u1)^2 - g h1)((s-u2)^2 - g h2) = r g^2 h1 h2`, Newton-polished on
/// the factored form. Fails with the offending imaginary magnitude when the
/// spectrum leaves the real axis by more than a relative tolerance.
pub(crate) fn direct_speeds(prim: &PrimitiveState, p: &Parameters) -> Result<[f64; 4], SolverError> {
    let g = p.g;
    let (h1, u1, h2, u2) = (prim.h1, prim.u1, prim.h2, prim.u2);
    if h1 <= 0.0 {
        return Err(SolverError::DegenerateTopLayer { h1 });
    }
    // Expand ((s-u1)^2 - P)((s-u2)^2 - Q) - K into monomial coefficients.
    let pp = g * h1;
    let qq = g * h2;
    let kk = p.r() * g * g * h1 * h2;
    let e1 = u1 * u1 - pp;
    let e2 = u2 * u2 - qq;
    let a3 = -2.0 * (u1 + u2);
    let a2 = e1 + e2 + 4.0 * u1 * u2;
    let a1 = -2.0 * (u1 * e2 + u2 * e1);
    let a0 = e1 * e2 - kk;
    let (mut roots, max_imag) = quartic::quartic_roots(a3, a2, a1, a0);
    let radius = roots
        .iter()
        .fold(0.0_f64, |m, &x| m.max(x.abs()))
        .max(u1.abs().max(u2.abs()) + (g * (h1 + h2)).sqrt());
    if max_imag > COMPLEX_REL_TOL * radius {
        return Err(SolverError::HyperbolicityLoss {
            method: "direct",
            detail: "complex characteristic speeds",
            value: max_imag,
        });
    }
    // Polish on the better-conditioned factored form.
    for root in roots.iter_mut() {
        for _ in 0..20 {
            let (f, fp) = char_poly(*root, prim, p);
            if fp == 0.0 {
                break;
            }
            let step = f / fp;
            *root -= step;
            if step.abs() <= 1e-12 * root.abs().max(radius) {
                break;
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(roots)
}

/// Direct basis at an averaged interface state (the caller supplies the
/// arithmetic average of the two conserved states, in primitive form).
pub fn direct_basis(avg: &PrimitiveState, p: &Parameters) -> Result<EigenBasis, SolverError> {
    let speeds = direct_speeds(avg, p)?;
    let columns = [
        column(speeds[0], consistent_alpha(speeds[0], avg, p)),
        column(speeds[1], consistent_alpha(speeds[1], avg, p)),
        column(speeds[2], consistent_alpha(speeds[2], avg, p)),
        column(speeds[3], consistent_alpha(speeds[3], avg, p)),
    ];
    Ok(EigenBasis { speeds, columns, method: "direct" })
}

/// Speed of the bottom-layer wet/dry edge when the bottom layer floods a
/// dry cell: the internal-wave analogue of the single-layer dry-front
/// speed, `u2 +- 2 sqrt(g (1-r) h2)` evaluated at the wet state.
pub fn inundation_speeds(wet: &PrimitiveState, side: DrySide, p: &Parameters) -> f64 {
    let c = 2.0 * (p.reduced_gravity() * wet.h2).sqrt();
    match side {
        DrySide::RightDry => wet.u2 + c,
        DrySide::LeftDry => wet.u2 - c,
    }
}
