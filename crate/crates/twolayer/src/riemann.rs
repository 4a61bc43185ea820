//! Interface Riemann solver for the two-layer system.
//!
//! Each cell interface is handled in four stages: classify the wetting
//! configuration of the lower layer, assemble the flux-plus-source jump
//! `delta` in density-weighted units, decompose it onto an eigenbasis as
//! f-waves, and split the waves into left- and right-going fluctuations.
//! Walls and inundation fronts get modified jumps and bases; interfaces
//! where the lower layer is dry on both sides collapse to a single-layer
//! solve on the top layer.

use crate::eigen::{self, DrySide, EigenBasis};
use crate::error::SolverError;
use crate::params::{EigenMethod, InundationMethod, Parameters};
use crate::state::{self, CellState, PrimitiveState};
use crate::swe1l;

/// Wetting configuration of the lower layer across an interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DryConfig {
    /// Lower layer at or above the dry tolerance on both sides.
    FullyWet,
    /// Dry left cell whose bottom stands above the wet free surface.
    WallLeftDry,
    /// Dry right cell whose bottom stands above the wet free surface.
    WallRightDry,
    /// Dry left cell low enough for the wet lower layer to flood it.
    InundationLeftDry,
    /// Dry right cell low enough for the wet lower layer to flood it.
    InundationRightDry,
    /// Lower layer dry on both sides; only the top layer moves.
    BothDry,
}

impl DryConfig {
    /// True when high-order correction fluxes should be suppressed here.
    pub fn suppresses_corrections(self) -> bool {
        self != DryConfig::FullyWet
    }
}

/// Waves and fluctuations produced by one interface solve.
#[derive(Debug, Clone)]
pub struct RiemannSolution {
    /// Wave speeds (m/s), one per wave.
    pub speeds: [f64; 4],
    /// f-waves, `fwaves[p]` carrying flux-difference units per component.
    pub fwaves: [[f64; 4]; 4],
    /// Left-going fluctuation applied to the left cell.
    pub amdq: [f64; 4],
    /// Right-going fluctuation applied to the right cell.
    pub apdq: [f64; 4],
    /// Wetting configuration the solve was classified as.
    pub config: DryConfig,
}

/// Classify the interface by lower-layer wetness and bathymetry.
///
/// A dry neighbor acts as a wall when its bottom elevation meets or
/// exceeds the wet side's lower-layer surface, and as an inundation
/// front when the wet surface stands above it.
pub fn classify(l: &PrimitiveState, r: &PrimitiveState, p: &Parameters) -> DryConfig {
    let wet_l = l.h2 >= p.dry_tolerance;
    let wet_r = r.h2 >= p.dry_tolerance;
    match (wet_l, wet_r) {
        (true, true) => DryConfig::FullyWet,
        (false, false) => DryConfig::BothDry,
        (true, false) => {
            if l.h2 + l.b > r.b {
                DryConfig::InundationRightDry
            } else {
                DryConfig::WallRightDry
            }
        }
        (false, true) => {
            if r.h2 + r.b > l.b {
                DryConfig::InundationLeftDry
            } else {
                DryConfig::WallLeftDry
            }
        }
    }
}

/// Ghost state for a wall: lower layer mirrored with reversed velocity,
/// top layer and bathymetry copied from the wet side.
pub fn wall_ghost(wet: &PrimitiveState) -> PrimitiveState {
    PrimitiveState {
        u2: -wet.u2,
        ..*wet
    }
}

/// Flux-plus-bathymetry jump across the interface, density-weighted.
///
/// Every bracket is evaluated as its own right-minus-left difference
/// before the terms are summed, so quiescent states with matching
/// surfaces cancel to exactly zero in floating point. The hydrostatic
/// pressure jumps appear in the equivalent depth-averaged form
/// `g*hbar*([h] + [coupling])` rather than as `g/2*[h^2]`.
///
/// Wall configurations substitute the reflected ghost for the dry side
/// of the lower layer: the top-layer momentum jump sees the dry lower
/// surface as bare bathymetry, the lower mass jump doubles the wet
/// inflow, and the lower momentum jump vanishes identically. Inundation
/// configurations expect the caller to have already replaced the dry
/// side's lower layer per the chosen inundation method.
pub fn flux_jump(l: &PrimitiveState, r: &PrimitiveState, cfg: DryConfig, p: &Parameters) -> [f64; 4] {
    let g = p.g;
    let rho1 = p.rho1();
    let rho2 = p.rho2();
    let h1bar = 0.5 * (l.h1 + r.h1);
    let d_h1 = r.h1 - l.h1;
    let d_b = r.b - l.b;

    // Lower-layer surface as the top layer sees it: bare bathymetry on a
    // wall's dry side, bottom plus depth elsewhere.
    let (eta2_l, eta2_r) = match cfg {
        DryConfig::WallLeftDry => (l.b, r.b + r.h2),
        DryConfig::WallRightDry => (l.b + l.h2, r.b),
        DryConfig::BothDry => (l.b, r.b),
        _ => (l.b + l.h2, r.b + r.h2),
    };
    let d_eta2 = eta2_r - eta2_l;

    let delta1 = rho1 * (r.h1 * r.u1 - l.h1 * l.u1);
    let delta2 = rho1 * (r.h1 * r.u1 * r.u1 - l.h1 * l.u1 * l.u1) + g * rho1 * h1bar * (d_h1 + d_eta2);

    let (delta3, delta4) = match cfg {
        DryConfig::WallLeftDry => (2.0 * rho2 * r.h2 * r.u2, 0.0),
        DryConfig::WallRightDry => (-2.0 * rho2 * l.h2 * l.u2, 0.0),
        DryConfig::BothDry => (0.0, 0.0),
        _ => {
            let h2bar = 0.5 * (l.h2 + r.h2);
            let d_h2 = r.h2 - l.h2;
            let d3 = rho2 * (r.h2 * r.u2 - l.h2 * l.u2);
            let d4 = rho2 * (r.h2 * r.u2 * r.u2 - l.h2 * l.u2 * l.u2)
                + g * rho2 * h2bar * (d_h2 + d_b)
                + g * rho1 * h2bar * d_h1;
            (d3, d4)
        }
    };

    [delta1, delta2, delta3, delta4]
}

/// LU factorization of a 4x4 matrix with partial pivoting.
///
/// Returns the packed factors and the row permutation, or `None` when a
/// pivot underflows to zero.
fn lu4(a: &[[f64; 4]; 4]) -> Option<([[f64; 4]; 4], [usize; 4])> {
    let mut lu = *a;
    let mut perm = [0usize, 1, 2, 3];
    for k in 0..4 {
        let mut piv = k;
        let mut best = lu[k][k].abs();
        for i in (k + 1)..4 {
            if lu[i][k].abs() > best {
                best = lu[i][k].abs();
                piv = i;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != k {
            lu.swap(piv, k);
            perm.swap(piv, k);
        }
        for i in (k + 1)..4 {
            let m = lu[i][k] / lu[k][k];
            lu[i][k] = m;
            for j in (k + 1)..4 {
                lu[i][j] -= m * lu[k][j];
            }
        }
    }
    Some((lu, perm))
}

/// Solve with packed LU factors and a row permutation.
fn lu4_solve(lu: &[[f64; 4]; 4], perm: &[usize; 4], rhs: &[f64; 4]) -> [f64; 4] {
    let mut y = [0.0; 4];
    for i in 0..4 {
        let mut s = rhs[perm[i]];
        for j in 0..i {
            s -= lu[i][j] * y[j];
        }
        y[i] = s;
    }
    let mut x = [0.0; 4];
    for i in (0..4).rev() {
        let mut s = y[i];
        for j in (i + 1)..4 {
            s -= lu[i][j] * x[j];
        }
        x[i] = s / lu[i][i];
    }
    x
}

/// One-norm of a 4x4 matrix (max absolute column sum).
fn norm1(a: &[[f64; 4]; 4]) -> f64 {
    let mut best = 0.0f64;
    for j in 0..4 {
        let s: f64 = (0..4).map(|i| a[i][j].abs()).sum();
        best = best.max(s);
    }
    best
}

/// Condition number above which a basis is rejected as near singular.
const COND_LIMIT: f64 = 1e12;

/// Decompose `delta` onto the basis: solve `R beta = delta`.
///
/// The eigenvector matrix has the basis columns as its columns. After the
/// direct solve one step of iterative refinement tightens the residual.
/// A one-norm condition estimate above `1e12` (or an exactly singular
/// factorization) fails with `NearSingularBasis` so the caller can retry
/// with a different eigensolver.
pub fn project(basis: &EigenBasis, delta: &[f64; 4]) -> Result<[f64; 4], SolverError> {
    let mut rmat = [[0.0; 4]; 4];
    for (w, col) in basis.columns.iter().enumerate() {
        for i in 0..4 {
            rmat[i][w] = col[i];
        }
    }
    let (lu, perm) = match lu4(&rmat) {
        Some(f) => f,
        None => return Err(SolverError::NearSingularBasis { cond: f64::INFINITY }),
    };

    // Exact inverse via four solves; cheap at this size and gives a true
    // one-norm condition number rather than an estimate.
    let mut inv_norm = 0.0f64;
    for j in 0..4 {
        let mut e = [0.0; 4];
        e[j] = 1.0;
        let col = lu4_solve(&lu, &perm, &e);
        let s: f64 = col.iter().map(|v| v.abs()).sum();
        inv_norm = inv_norm.max(s);
    }
    let cond = norm1(&rmat) * inv_norm;
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(SolverError::NearSingularBasis { cond });
    }

    let mut beta = lu4_solve(&lu, &perm, delta);
    let mut resid = [0.0; 4];
    for i in 0..4 {
        let mut s = delta[i];
        for j in 0..4 {
            s -= rmat[i][j] * beta[j];
        }
        resid[i] = s;
    }
    let corr = lu4_solve(&lu, &perm, &resid);
    for i in 0..4 {
        beta[i] += corr[i];
    }
    Ok(beta)
}

/// Split f-waves into left- and right-going fluctuations by speed sign.
///
/// A wave with exactly zero speed is shared half and half so the
/// conservation identity `amdq + apdq = sum of waves` always holds.
pub fn fluctuations(fwaves: &[[f64; 4]; 4], speeds: &[f64; 4]) -> ([f64; 4], [f64; 4]) {
    let mut amdq = [0.0; 4];
    let mut apdq = [0.0; 4];
    for (w, z) in fwaves.iter().enumerate() {
        let s = speeds[w];
        if s < 0.0 {
            for i in 0..4 {
                amdq[i] += z[i];
            }
        } else if s > 0.0 {
            for i in 0..4 {
                apdq[i] += z[i];
            }
        } else {
            for i in 0..4 {
                amdq[i] += 0.5 * z[i];
                apdq[i] += 0.5 * z[i];
            }
        }
    }
    (amdq, apdq)
}

/// Build the eigenbasis for a fully wet interface with the configured
/// method, or with the dynamic linearized method when `force_dynamic`.
fn wet_basis(
    l: &PrimitiveState,
    r: &PrimitiveState,
    p: &Parameters,
    force_dynamic: bool,
) -> Result<EigenBasis, SolverError> {
    let method = if force_dynamic {
        EigenMethod::LinearizedDynamic
    } else {
        p.eigen_method
    };
    match method {
        EigenMethod::LinearizedDynamic => eigen::linearized_pair((l.h1, l.h2), (r.h1, r.h2), p),
        EigenMethod::LinearizedStatic => match &p.background {
            Some(bg) => {
                let dl = bg.hat_depths(l.b);
                let dr = bg.hat_depths(r.b);
                eigen::linearized_pair(dl, dr, p)
            }
            None => eigen::linearized_pair((l.h1, l.h2), (r.h1, r.h2), p),
        },
        EigenMethod::VelocityDifference => eigen::velocity_difference_basis(l, r, p),
        EigenMethod::Direct => eigen::direct_basis(&conserved_average(l, r, p), p),
    }
}

/// Primitive form of the arithmetic average of the two conserved states.
///
/// Averaging the mass and momentum components gives mean depths and
/// depth-weighted mean velocities; the velocity limiting below the dry
/// tolerance mirrors the conserved-to-primitive conversion.
fn conserved_average(l: &PrimitiveState, r: &PrimitiveState, p: &Parameters) -> PrimitiveState {
    let h1 = 0.5 * (l.h1 + r.h1);
    let h2 = 0.5 * (l.h2 + r.h2);
    let u1 = if h1 >= p.dry_tolerance {
        (l.h1 * l.u1 + r.h1 * r.u1) / (l.h1 + r.h1)
    } else {
        0.0
    };
    let u2 = if h2 >= p.dry_tolerance {
        (l.h2 * l.u2 + r.h2 * r.u2) / (l.h2 + r.h2)
    } else {
        0.0
    };
    let b = 0.5 * (l.b + r.b);
    let (eta1, eta2) = state::surfaces(h1, h2, b, p);
    PrimitiveState { h1, u1, h2, u2, b, eta1, eta2 }
}

/// Basis for an inundation front: dry-side lower layer replaced per the
/// configured method, internal wave toward the dry side replaced by the
/// analytic front speed when the dry depth is taken as zero.
fn inundation_basis(
    l: &PrimitiveState,
    r: &PrimitiveState,
    side: DrySide,
    p: &Parameters,
) -> Result<EigenBasis, SolverError> {
    match p.inundation_method {
        crate::params::InundationMethod::SmallDepthFill => {
            eigen::linearized_pair((l.h1, l.h2), (r.h1, r.h2), p)
        }
        crate::params::InundationMethod::ZeroDepthEstimate => {
            let wet = match side {
                DrySide::LeftDry => r,
                DrySide::RightDry => l,
            };
            let base = eigen::linearized_basis(wet.h1, wet.h2, p)?;
            let mut speeds = base.speeds;
            let front = eigen::inundation_speeds(wet, side, p);
            match side {
                // Internal wave running rightward into the dry cell.
                DrySide::RightDry => speeds[2] = front,
                // Internal wave running leftward into the dry cell.
                DrySide::LeftDry => speeds[1] = front,
            }
            let mut columns = [[0.0; 4]; 4];
            for (w, col) in columns.iter_mut().enumerate() {
                let s = speeds[w];
                let alpha = eigen::consistent_alpha(s, wet, p);
                *col = [1.0, s, alpha, s * alpha];
            }
            Ok(EigenBasis::sorted(speeds, columns, "inundation"))
        }
    }
}

/// Solve one interface given conserved cell states.
pub fn solve_interface(ql: &CellState, qr: &CellState, p: &Parameters) -> Result<RiemannSolution, SolverError> {
    let l = state::to_primitive(ql, p);
    let r = state::to_primitive(qr, p);
    solve_interface_prim(&l, &r, p)
}

/// Solve one interface given primitive states (depths, velocities).
pub fn solve_interface_prim(
    l: &PrimitiveState,
    r: &PrimitiveState,
    p: &Parameters,
) -> Result<RiemannSolution, SolverError> {
    let cfg = classify(l, r, p);
    match cfg {
        DryConfig::BothDry => Ok(solve_top_only(l, r, p)),
        DryConfig::FullyWet => {
            let delta = flux_jump(l, r, cfg, p);
            let basis = wet_basis(l, r, p, false)?;
            match project(&basis, &delta) {
                Ok(beta) => Ok(assemble(cfg, &basis, beta)),
                // A near-singular basis gets one retry with the dynamic
                // linearized method before the error becomes fatal.
                Err(SolverError::NearSingularBasis { .. }) => {
                    let retry = wet_basis(l, r, p, true)?;
                    let beta = project(&retry, &delta)?;
                    Ok(assemble(cfg, &retry, beta))
                }
                Err(e) => Err(e),
            }
        }
        DryConfig::WallLeftDry | DryConfig::WallRightDry => solve_wall(l, r, cfg, p),
        DryConfig::InundationLeftDry => solve_inundation(l, r, DrySide::LeftDry, p),
        DryConfig::InundationRightDry => solve_inundation(l, r, DrySide::RightDry, p),
    }
}

/// Assemble a solution from a basis and wave strengths.
fn assemble(cfg: DryConfig, basis: &EigenBasis, beta: [f64; 4]) -> RiemannSolution {
    let mut fwaves = [[0.0; 4]; 4];
    for (w, z) in fwaves.iter_mut().enumerate() {
        for i in 0..4 {
            z[i] = beta[w] * basis.columns[w][i];
        }
    }
    let (amdq, apdq) = fluctuations(&fwaves, &basis.speeds);
    RiemannSolution {
        speeds: basis.speeds,
        fwaves,
        amdq,
        apdq,
        config: cfg,
    }
}

/// Wall dry state: reflect the lower layer, then mask the fluctuations so
/// nothing enters the dry cell and the wet cell sees the exact half jump.
fn solve_wall(
    l: &PrimitiveState,
    r: &PrimitiveState,
    cfg: DryConfig,
    p: &Parameters,
) -> Result<RiemannSolution, SolverError> {
    let wet = if cfg == DryConfig::WallRightDry { l } else { r };
    let delta = flux_jump(l, r, cfg, p);
    let basis = eigen::linearized_basis(wet.h1, wet.h2, p)?;
    let beta = project(&basis, &delta)?;
    let mut sol = assemble(cfg, &basis, beta);
    // The projection couples the top-layer jump into the lower-layer
    // fluctuations; overwrite the wet side's lower mass fluctuation with
    // the exact half of the reflected jump so the wall is airtight, and
    // zero everything aimed at the dry cell.
    match cfg {
        DryConfig::WallRightDry => {
            sol.amdq[2] = -(p.rho2() * wet.h2 * wet.u2);
            sol.apdq[2] = 0.0;
            sol.apdq[3] = 0.0;
        }
        DryConfig::WallLeftDry => {
            sol.apdq[2] = p.rho2() * wet.h2 * wet.u2;
            sol.amdq[2] = 0.0;
            sol.amdq[3] = 0.0;
        }
        _ => unreachable!(),
    }
    Ok(sol)
}

/// Inundation front: replace the dry side's lower layer per the method,
/// then run the standard decomposition with the front-aware basis. The
/// dry cell may only gain lower-layer mass: when the wet side is receding
/// the decomposition can aim a net drawdown at the empty cell, and that
/// package is reflected onto the wet side instead (keeping amdq + apdq
/// equal to the flux jump), since there is nothing to withdraw.
fn solve_inundation(
    l: &PrimitiveState,
    r: &PrimitiveState,
    side: DrySide,
    p: &Parameters,
) -> Result<RiemannSolution, SolverError> {
    let fill = match p.inundation_method {
        InundationMethod::ZeroDepthEstimate => 0.0,
        InundationMethod::SmallDepthFill => p.dry_tolerance,
    };
    let mut le = *l;
    let mut re = *r;
    let cfg = match side {
        DrySide::LeftDry => {
            le.h2 = fill;
            le.u2 = 0.0;
            DryConfig::InundationLeftDry
        }
        DrySide::RightDry => {
            re.h2 = fill;
            re.u2 = 0.0;
            DryConfig::InundationRightDry
        }
    };
    let delta = flux_jump(&le, &re, cfg, p);
    let basis = inundation_basis(&le, &re, side, p)?;
    let beta = match project(&basis, &delta) {
        Ok(b) => b,
        Err(SolverError::NearSingularBasis { .. }) => {
            let retry = eigen::linearized_pair((le.h1, le.h2), (re.h1, re.h2), p)?;
            let mut sol = assemble(cfg, &retry, project(&retry, &delta)?);
            shield_dry_side(&mut sol, side);
            return Ok(sol);
        }
        Err(e) => return Err(e),
    };
    let mut sol = assemble(cfg, &basis, beta);
    shield_dry_side(&mut sol, side);
    Ok(sol)
}

/// Reflect any net lower-layer drawdown aimed at the dry cell of an
/// inundation front back onto the wet side. Positive apdq mass (for a dry
/// right cell) would withdraw from an empty layer; it is moved, together
/// with the matching momentum row, into amdq so the fluctuation sum is
/// unchanged. Genuine flooding (negative mass toward the dry cell) passes
/// through untouched.
fn shield_dry_side(sol: &mut RiemannSolution, side: DrySide) {
    match side {
        DrySide::RightDry => {
            if sol.apdq[2] > 0.0 {
                for c in [2, 3] {
                    sol.amdq[c] += sol.apdq[c];
                    sol.apdq[c] = 0.0;
                }
            }
        }
        DrySide::LeftDry => {
            if sol.amdq[2] > 0.0 {
                for c in [2, 3] {
                    sol.apdq[c] += sol.amdq[c];
                    sol.amdq[c] = 0.0;
                }
            }
        }
    }
}

/// Both lower-layer sides dry: single-layer solve on the top layer over
/// the bathymetry, scaled back to density-weighted units. Lower-layer
/// components stay identically zero.
fn solve_top_only(l: &PrimitiveState, r: &PrimitiveState, p: &Parameters) -> RiemannSolution {
    let sl = swe1l::solve_single_layer(
        l.h1,
        l.h1 * l.u1,
        l.b,
        r.h1,
        r.h1 * r.u1,
        r.b,
        p,
    );
    let rho1 = p.rho1();
    let mut fwaves = [[0.0; 4]; 4];
    for (w, slot) in [(0usize, 0usize), (1, 3)] {
        fwaves[slot][0] = rho1 * sl.fwaves[w][0];
        fwaves[slot][1] = rho1 * sl.fwaves[w][1];
    }
    let speeds = [sl.speeds[0], 0.0, 0.0, sl.speeds[1]];
    let amdq = [rho1 * sl.amdq[0], rho1 * sl.amdq[1], 0.0, 0.0];
    let apdq = [rho1 * sl.apdq[0], rho1 * sl.apdq[1], 0.0, 0.0];
    RiemannSolution {
        speeds,
        fwaves,
        amdq,
        apdq,
        config: DryConfig::BothDry,
    }
}
