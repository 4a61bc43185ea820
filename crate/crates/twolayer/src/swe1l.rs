//! Single-layer shallow water f-wave solver with bathymetry and dry states.
//!
//! Used by the two-layer interface solver when the bottom layer is dry on
//! both sides (the top layer then evolves as ordinary shallow water over
//! the bathymetry), and directly testable as a classical solver.
//!
//! Two-wave decomposition of the flux-plus-source jump with Roe-averaged
//! velocity and Einfeldt speed limiting; dry fronts get the classical
//! `u +- 2 sqrt(g h)` edge speed and walls a ghost-cell reflection.

use crate::params::Parameters;

/// Interface solution: two f-waves, their speeds, and the net fluctuations
/// carried to the left (`amdq`) and right (`apdq`) cells. Components are
/// mass and momentum flux units.
#[derive(Debug, Clone, Copy, Default)]
pub struct SingleLayerSolution {
    pub speeds: [f64; 2],
    pub fwaves: [[f64; 2]; 2],
    pub amdq: [f64; 2],
    pub apdq: [f64; 2],
}

/// f-wave decomposition with the given speeds. `h`, `hu` are the effective
/// states (dry sides already zeroed), `db` the bathymetry jump.
fn decompose(
    hl: f64,
    hul: f64,
    hr: f64,
    hur: f64,
    db: f64,
    s1: f64,
    s2: f64,
    g: f64,
) -> SingleLayerSolution {
    let ul = if hl > 0.0 { hul / hl } else { 0.0 };
    let ur = if hr > 0.0 { hur / hr } else { 0.0 };
    let hbar = 0.5 * (hl + hr);
    let d1 = hur - hul;
    // The depth and bathymetry differences are kept separate so that an
    // at-rest state (where they are exact negatives) cancels to 0.0.
    let d2 = (hur * ur - hul * ul) + g * hbar * ((hr - hl) + db);
    let denom = s2 - s1;
    if !(denom > 0.0) {
        return SingleLayerSolution::default();
    }
    let beta1 = (s2 * d1 - d2) / denom;
    let beta2 = (d2 - s1 * d1) / denom;
    let z1 = [beta1, beta1 * s1];
    let z2 = [beta2, beta2 * s2];
    let mut amdq = [0.0; 2];
    let mut apdq = [0.0; 2];
    for (s, z) in [(s1, z1), (s2, z2)] {
        if s < 0.0 {
            amdq[0] += z[0];
            amdq[1] += z[1];
        } else if s > 0.0 {
            apdq[0] += z[0];
            apdq[1] += z[1];
        } else {
            amdq[0] += 0.5 * z[0];
            amdq[1] += 0.5 * z[1];
            apdq[0] += 0.5 * z[0];
            apdq[1] += 0.5 * z[1];
        }
    }
    SingleLayerSolution { speeds: [s1, s2], fwaves: [z1, z2], amdq, apdq }
}

/// Both-wet solve with Roe-averaged, Einfeldt-limited speeds.
fn both_wet(hl: f64, hul: f64, hr: f64, hur: f64, db: f64, g: f64) -> SingleLayerSolution {
    let ul = hul / hl;
    let ur = hur / hr;
    let (rl, rr) = (hl.sqrt(), hr.sqrt());
    let u_roe = (rl * ul + rr * ur) / (rl + rr);
    let c_roe = (g * 0.5 * (hl + hr)).sqrt();
    let s1 = (ul - (g * hl).sqrt()).min(u_roe - c_roe);
    let s2 = (ur + (g * hr).sqrt()).max(u_roe + c_roe);
    decompose(hl, hul, hr, hur, db, s1, s2, g)
}

/// Solve the single-layer interface Riemann problem in f-wave form.
///
/// States are (depth [m], momentum [m^2/s], bathymetry [m]) per side. A side
/// with depth below the dry tolerance is treated as dry: if its bed is
/// higher than the wet side's surface the interface is a wall (ghost
/// reflection, nothing enters the dry cell), otherwise a dry front invades
/// it at speed `u -+ 2 sqrt(g h)`.
pub fn solve_single_layer(
    hl: f64,
    hul: f64,
    bl: f64,
    hr: f64,
    hur: f64,
    br: f64,
    p: &Parameters,
) -> SingleLayerSolution {
    let g = p.g;
    let dry = p.dry_tolerance;
    let wet_l = hl >= dry;
    let wet_r = hr >= dry;
    match (wet_l, wet_r) {
        (false, false) => SingleLayerSolution::default(),
        (true, false) => {
            if hl + bl <= br {
                // Wall: reflect the wet state into a ghost on the right.
                // The ghost problem is symmetric, so nothing may enter the
                // dry cell; its fluctuations are dropped.
                let mut sol = both_wet(hl, hul, hl, -hul, 0.0, g);
                sol.apdq = [0.0; 2];
                sol
            } else {
                let ul = hul / hl;
                let c = (g * hl).sqrt();
                decompose(hl, hul, 0.0, 0.0, br - bl, ul - c, ul + 2.0 * c, g)
            }
        }
        (false, true) => {
            if hr + br <= bl {
                let mut sol = both_wet(hr, -hur, hr, hur, 0.0, g);
                sol.amdq = [0.0; 2];
                sol
            } else {
                let ur = hur / hr;
                let c = (g * hr).sqrt();
                decompose(0.0, 0.0, hr, hur, br - bl, ur - 2.0 * c, ur + c, g)
            }
        }
        (true, true) => both_wet(hl, hul, hr, hur, br - bl, g),
    }
}
