//! Time stepping: grid, boundary conditions, CFL control, limited
//! second-order corrections, positivity enforcement, and bed friction.
//!
//! A step fills ghost cells, solves every interface, picks `dt` from the
//! wave speeds under the CFL target, applies the fluctuation update plus
//! limited correction fluxes, guards depth positivity, and finally applies
//! the implicit friction split when Manning friction is configured.

use crate::error::{ParamError, SolverError, StepError};
use crate::params::Parameters;
use crate::riemann::{self, RiemannSolution};
use crate::state::{self, CellState, PrimitiveState};

/// Uniform 1D grid with ghost cells on both ends.
#[derive(Debug, Clone)]
pub struct Grid {
    /// Left domain edge (m).
    pub x_lo: f64,
    /// Right domain edge (m).
    pub x_hi: f64,
    /// Number of interior cells.
    pub n_cells: usize,
    /// Cell width (m).
    pub dx: f64,
    /// Ghost cells per side; two are needed by the limiter stencil.
    pub n_ghost: usize,
}

impl Grid {
    /// Build a grid; at least four cells keep the limiter stencil sane.
    pub fn new(x_lo: f64, x_hi: f64, n_cells: usize) -> Result<Self, ParamError> {
        if n_cells < 4 {
            return Err(ParamError::GridTooSmall { n_cells });
        }
        let dx = (x_hi - x_lo) / n_cells as f64;
        if !(dx > 0.0) {
            return Err(ParamError::EmptyDomain { x_lo, x_hi });
        }
        Ok(Self { x_lo, x_hi, n_cells, dx, n_ghost: 2 })
    }

    /// Center coordinate (m) of interior cell `i` in `0..n_cells`.
    pub fn cell_center(&self, i: usize) -> f64 {
        self.x_lo + (i as f64 + 0.5) * self.dx
    }

    /// Total storage length including ghosts.
    pub fn total_cells(&self) -> usize {
        self.n_cells + 2 * self.n_ghost
    }

    /// Index range of the interior cells within the storage array.
    pub fn interior(&self) -> std::ops::Range<usize> {
        self.n_ghost..self.n_ghost + self.n_cells
    }
}

/// Boundary condition for one domain edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Reflecting wall: depth mirrored, momentum negated in both layers.
    Wall,
    /// Zero-order extrapolation: nearest interior cell copied outward.
    Extrapolation,
}

/// Boundary conditions for both edges.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySpec {
    pub left: Boundary,
    pub right: Boundary,
}

/// Flux limiter for the second-order correction waves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limiter {
    /// No corrections: plain first-order update.
    None,
    /// Minmod: the most dissipative TVD choice, default near dry fronts.
    Minmod,
    /// Monotonized central: sharper, still TVD.
    Mc,
}

impl Limiter {
    /// Limiter function of the upwind wave ratio.
    pub fn phi(self, theta: f64) -> f64 {
        match self {
            Limiter::None => 0.0,
            Limiter::Minmod => theta.min(1.0).max(0.0),
            Limiter::Mc => (0.5 * (1.0 + theta)).min(2.0).min(2.0 * theta).max(0.0),
        }
    }

    pub fn parse(s: &str) -> Result<Self, ParamError> {
        match s {
            "none" | "first-order" => Ok(Limiter::None),
            "minmod" => Ok(Limiter::Minmod),
            "mc" => Ok(Limiter::Mc),
            _ => Err(ParamError::UnknownLimiter(s.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Limiter::None => "none",
            Limiter::Minmod => "minmod",
            Limiter::Mc => "mc",
        }
    }
}

/// Evolving simulation state: cell array (ghosts included) plus clock.
#[derive(Debug, Clone)]
pub struct SimState {
    /// All cells, `grid.n_ghost` ghosts on each side.
    pub cells: Vec<CellState>,
    /// Current time (s).
    pub t: f64,
    /// Most recent accepted time step (s), zero before the first step.
    pub dt_last: f64,
}

impl SimState {
    /// Build a state by evaluating `init` at every interior cell center.
    /// Ghost cells start as copies of the nearest interior cell; they are
    /// refilled from the boundary conditions at the start of every step.
    pub fn from_fn(grid: &Grid, mut init: impl FnMut(f64) -> CellState) -> Self {
        let g = grid.n_ghost;
        let mut cells = vec![CellState::ZERO; grid.total_cells()];
        for i in 0..grid.n_cells {
            cells[g + i] = init(grid.cell_center(i));
        }
        for k in 0..g {
            cells[k] = cells[g];
            cells[g + grid.n_cells + k] = cells[g + grid.n_cells - 1];
        }
        Self { cells, t: 0.0, dt_last: 0.0 }
    }
}

/// Cumulative statistics over a run.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    /// Accepted steps taken.
    pub steps: u64,
    /// Steps rejected by the CFL check and retried with halved dt.
    pub rejected: u64,
    /// Largest realized CFL number over all accepted steps.
    pub max_cfl: f64,
    /// Total density-weighted mass (kg/m) removed by positivity clips.
    pub clipped_mass: f64,
}

/// Time integrator bound to a grid, parameters, and boundary conditions.
#[derive(Debug, Clone)]
pub struct Driver {
    pub grid: Grid,
    pub params: Parameters,
    pub bc: BoundarySpec,
    pub limiter: Limiter,
    /// Cap applied to every dt (s); also the dt used when no wave moves.
    pub dt_max: f64,
    /// Maximum wave speed seen in the previous step (m/s).
    last_smax: Option<f64>,
    pub stats: StepStats,
}

impl Driver {
    pub fn new(grid: Grid, params: Parameters, bc: BoundarySpec) -> Self {
        Self {
            grid,
            params,
            bc,
            limiter: Limiter::Minmod,
            dt_max: f64::INFINITY,
            last_smax: None,
            stats: StepStats::default(),
        }
    }

    /// Time step from the CFL target and the previous step's fastest wave.
    /// Before the first step the speeds of the given state are measured
    /// directly. With no moving waves the step is `dt_max`.
    pub fn compute_dt(&mut self, state: &mut SimState) -> Result<f64, StepError> {
        let smax = match self.last_smax {
            Some(s) => s,
            None => {
                fill_ghosts(&mut state.cells, &self.grid, self.bc);
                let prims = primitives(&state.cells, &self.params);
                let (_, smax) = self.solve_all(&state.cells, &prims)?;
                self.last_smax = Some(smax);
                smax
            }
        };
        let dt = if smax > 0.0 {
            (self.params.cfl * self.grid.dx / smax).min(self.dt_max)
        } else {
            self.dt_max
        };
        Ok(dt)
    }

    /// Advance one step, with `dt` additionally capped by `dt_cap` (s).
    /// Returns the accepted dt.
    pub fn step(&mut self, state: &mut SimState, dt_cap: f64) -> Result<f64, StepError> {
        let mut dt = self.compute_dt(state)?.min(dt_cap);
        fill_ghosts(&mut state.cells, &self.grid, self.bc);
        let prims = primitives(&state.cells, &self.params);
        let (sols, smax) = self.solve_all(&state.cells, &prims)?;

        // The dt candidate came from the previous step's speeds; if this
        // step's waves are faster and push the realized CFL past one, halve
        // until safe. The interface solves do not depend on dt, so retries
        // are nearly free.
        let mut realized = dt * smax / self.grid.dx;
        while realized > 1.0 {
            self.stats.rejected += 1;
            dt *= 0.5;
            realized = dt * smax / self.grid.dx;
        }
        self.stats.max_cfl = self.stats.max_cfl.max(realized);

        let mut sols = sols;
        let mut ftilde = correction_fluxes(&sols, &prims, dt, self.grid.dx, self.limiter);
        let coef = dt / self.grid.dx;
        positivity_transfer(&mut sols, &mut ftilde, &state.cells, &prims, &self.grid, &self.params, coef);
        for i in self.grid.interior() {
            // Interface i-1 sits on this cell's left edge, interface i on
            // its right edge.
            let mut q = state.cells[i].as_array();
            for c in 0..4 {
                q[c] -= coef * (sols[i - 1].apdq[c] + sols[i].amdq[c]);
                q[c] -= coef * (ftilde[i][c] - ftilde[i - 1][c]);
            }
            state.cells[i] = CellState::from_array(q, state.cells[i].b);
        }

        let clipped = positivity_guard(&mut state.cells, &self.grid, &self.params)
            .map_err(|(cell, e)| step_error(&self.grid, &state.cells, cell, e))?;
        self.stats.clipped_mass += clipped;

        if self.params.manning_n.is_some() {
            apply_friction(&mut state.cells, &self.grid, dt, &self.params);
        }

        state.t += dt;
        state.dt_last = dt;
        self.last_smax = Some(smax);
        self.stats.steps += 1;
        Ok(dt)
    }

    /// Step until `t_target` (s), landing on it exactly.
    pub fn advance_to(&mut self, state: &mut SimState, t_target: f64) -> Result<(), StepError> {
        let snap = 4.0 * f64::EPSILON * t_target.abs().max(1.0);
        while state.t < t_target {
            let cap = t_target - state.t;
            self.step(state, cap)?;
            if t_target - state.t <= snap {
                state.t = t_target;
            }
        }
        Ok(())
    }

    /// Solve every adjacent-pair interface; returns solutions and the
    /// largest absolute wave speed (m/s).
    fn solve_all(
        &self,
        cells: &[CellState],
        prims: &[PrimitiveState],
    ) -> Result<(Vec<RiemannSolution>, f64), StepError> {
        let mut sols = Vec::with_capacity(prims.len() - 1);
        let mut smax = 0.0f64;
        for k in 0..prims.len() - 1 {
            let sol = riemann::solve_interface_prim(&prims[k], &prims[k + 1], &self.params)
                .map_err(|e| step_error(&self.grid, cells, k, e))?;
            for s in sol.speeds {
                smax = smax.max(s.abs());
            }
            sols.push(sol);
        }
        Ok((sols, smax))
    }
}

/// Primitive view of every cell.
fn primitives(cells: &[CellState], p: &Parameters) -> Vec<PrimitiveState> {
    cells.iter().map(|c| state::to_primitive(c, p)).collect()
}

/// Attach grid position and the adjacent states to a solver error. For
/// cell-local failures (positivity) `k` is the cell index and both attached
/// states are that cell.
fn step_error(grid: &Grid, cells: &[CellState], k: usize, e: SolverError) -> StepError {
    let x = grid.x_lo + (k as f64 - grid.n_ghost as f64 + 1.0) * grid.dx;
    StepError {
        interface: k,
        x,
        left: cells[k],
        right: cells[(k + 1).min(cells.len() - 1)],
        source: e,
    }
}

/// Fill ghost cells from the boundary conditions.
pub fn fill_ghosts(cells: &mut [CellState], grid: &Grid, bc: BoundarySpec) {
    let g = grid.n_ghost;
    let n = grid.n_cells;
    for k in 0..g {
        cells[g - 1 - k] = match bc.left {
            Boundary::Wall => cells[g + k].reflected(),
            Boundary::Extrapolation => cells[g],
        };
        cells[g + n + k] = match bc.right {
            Boundary::Wall => cells[g + n - 1 - k].reflected(),
            Boundary::Extrapolation => cells[g + n - 1],
        };
    }
}

/// Limited second-order correction flux per interface.
///
/// Wave `p` at an interface is compared with the same-family wave at the
/// interface on its upwind side; the ratio of their inner products feeds
/// the limiter. Corrections are suppressed entirely at interfaces that are
/// not fully wet and at bathymetry jumps taller than the mean lower-layer
/// depth, so dry cells never receive correction mass. The two outermost
/// interfaces get no corrections; they only touch ghost cells.
pub fn correction_fluxes(
    sols: &[RiemannSolution],
    prims: &[PrimitiveState],
    dt: f64,
    dx: f64,
    limiter: Limiter,
) -> Vec<[f64; 4]> {
    let mut ftilde = vec![[0.0; 4]; sols.len()];
    if limiter == Limiter::None {
        return ftilde;
    }
    let nu = dt / dx;
    for k in 1..sols.len().saturating_sub(1) {
        if sols[k].config.suppresses_corrections() {
            continue;
        }
        let db = (prims[k + 1].b - prims[k].b).abs();
        let h2bar = 0.5 * (prims[k].h2 + prims[k + 1].h2);
        if db > h2bar {
            continue;
        }
        for p in 0..4 {
            let s = sols[k].speeds[p];
            if s == 0.0 {
                continue;
            }
            let z = &sols[k].fwaves[p];
            let zz: f64 = z.iter().map(|v| v * v).sum();
            if zz == 0.0 {
                continue;
            }
            let up = if s > 0.0 { k - 1 } else { k + 1 };
            let zu = &sols[up].fwaves[p];
            let dot: f64 = z.iter().zip(zu).map(|(a, b)| a * b).sum();
            let phi = limiter.phi(dot / zz);
            if phi == 0.0 {
                continue;
            }
            let w = 0.5 * s.signum() * (1.0 - nu * s.abs()) * phi;
            for c in 0..4 {
                ftilde[k][c] += w * z[c];
            }
        }
    }
    ftilde
}

/// Keep the mass update from overdrawing any layer below zero.
///
/// The linearized decomposition can assign a cell more outgoing mass in
/// one step than the cell holds, typically in thin receding films at
/// wetting fronts. For each cell whose tentative mass update would go
/// negative, the draining fluctuation components are reduced and the
/// difference moved to the opposite fluctuation of the same interface, so
/// `amdq + apdq` per interface (and hence total mass) is unchanged and
/// the donor neighbor absorbs the drawdown instead. Draining correction
/// fluxes are reduced toward zero, which is conservative by flux
/// differencing. Wall interfaces are never altered (their no-flux
/// property is exact), and transfers toward the dry side of an
/// inundation front are capped so the dry cell is never net-drained.
/// Only mass rows are adjusted; a few sweeps resolve chains of thin
/// cells, and anything left lands in the positivity guard as usual.
fn positivity_transfer(
    sols: &mut [RiemannSolution],
    ftilde: &mut [[f64; 4]],
    cells: &[CellState],
    prims: &[PrimitiveState],
    grid: &Grid,
    p: &Parameters,
    coef: f64,
) {
    use crate::riemann::DryConfig;

    // How much draining may move through an interface toward the far
    // side of component `c`, seen from the cell on side `from_left`.
    // Infinite for plain wet interfaces; zero across a wall (layer 2) or
    // where the receiving top layer is dry; for inundation fronts capped
    // at the inflow the dry cell currently receives.
    let headroom = |sol: &RiemannSolution, c: usize, to_right: bool, h1_far: f64| -> f64 {
        if c == 0 {
            return if h1_far < p.dry_tolerance { 0.0 } else { f64::INFINITY };
        }
        match sol.config {
            DryConfig::FullyWet => f64::INFINITY,
            DryConfig::WallLeftDry | DryConfig::WallRightDry | DryConfig::BothDry => 0.0,
            DryConfig::InundationRightDry => {
                if to_right {
                    (-sol.apdq[c]).max(0.0)
                } else {
                    f64::INFINITY
                }
            }
            DryConfig::InundationLeftDry => {
                if to_right {
                    f64::INFINITY
                } else {
                    (-sol.amdq[c]).max(0.0)
                }
            }
        }
    };

    for _ in 0..4 {
        let mut changed = false;
        for i in grid.interior() {
            let (li, ri) = (i - 1, i);
            for (c, m0) in [(0usize, cells[i].m1), (2, cells[i].m2)] {
                let removal =
                    sols[li].apdq[c] + sols[ri].amdq[c] + ftilde[ri][c] - ftilde[li][c];
                let mut deficit = coef * removal - m0;
                if deficit <= 0.0 {
                    continue;
                }
                // Candidates: draining fluctuation on each side, capped
                // by what may move toward that side's far cell. Spend the
                // larger one first.
                let caps = [
                    (true, sols[li].apdq[c].max(0.0).min(headroom(&sols[li], c, false, prims[li].h1))),
                    (false, sols[ri].amdq[c].max(0.0).min(headroom(&sols[ri], c, true, prims[ri + 1].h1))),
                ];
                let order = if caps[0].1 >= caps[1].1 { [0, 1] } else { [1, 0] };
                for k in order {
                    if deficit <= 0.0 {
                        break;
                    }
                    let (use_left, cap) = caps[k];
                    let d = (deficit / coef).min(cap);
                    if d > 0.0 {
                        deficit -= coef * d;
                        changed = true;
                        if use_left {
                            sols[li].apdq[c] -= d;
                            sols[li].amdq[c] += d;
                        } else {
                            sols[ri].amdq[c] -= d;
                            sols[ri].apdq[c] += d;
                        }
                    }
                }
                if deficit > 0.0 {
                    // Remaining drain from correction fluxes: shrink them
                    // toward zero, conservative by flux differencing.
                    for (k, sign) in [(ri, 1.0f64), (li, -1.0)] {
                        let avail = (sign * ftilde[k][c]).max(0.0);
                        let d2 = (deficit / coef).min(avail);
                        if d2 > 0.0 {
                            ftilde[k][c] -= sign * d2;
                            deficit -= coef * d2;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Enforce depth positivity on the interior cells.
///
/// Layers thinner than the dry tolerance have their momentum zeroed.
/// Slightly negative depths (round-off scale, magnitude under the
/// tolerance) are clipped to zero with the removed mass tallied; a
/// negative depth beyond the tolerance is a solver bug and errors out.
/// Returns the total clipped density-weighted mass (kg/m).
pub fn positivity_guard(
    cells: &mut [CellState],
    grid: &Grid,
    p: &Parameters,
) -> Result<f64, (usize, SolverError)> {
    let mut clipped = 0.0;
    for i in grid.interior() {
        let cell = &mut cells[i];
        for layer in 0..2u8 {
            let (m, mu, rho) = if layer == 0 {
                (&mut cell.m1, &mut cell.mu1, p.rho1())
            } else {
                (&mut cell.m2, &mut cell.mu2, p.rho2())
            };
            let h = *m / rho;
            if h < 0.0 {
                if -h < p.dry_tolerance {
                    clipped += m.abs() * grid.dx;
                    *m = 0.0;
                    *mu = 0.0;
                } else {
                    return Err((i, SolverError::NegativeDepth { layer: layer + 1, depth: h }));
                }
            } else if h < p.dry_tolerance {
                *mu = 0.0;
            }
        }
    }
    Ok(clipped)
}

/// Implicit Manning friction on the lowest wet layer of each cell.
///
/// Momentum is damped by `1 / (1 + dt g n^2 |u| / h^(4/3))`, which is
/// unconditionally stable for thin layers. Layers above the lowest wet
/// one feel no bed and are untouched.
pub fn apply_friction(cells: &mut [CellState], grid: &Grid, dt: f64, p: &Parameters) {
    let n = match p.manning_n {
        Some(n) if n > 0.0 => n,
        _ => return,
    };
    let gn2 = p.g * n * n;
    for i in grid.interior() {
        let cell = &mut cells[i];
        let h2 = cell.m2 / p.rho2();
        if h2 >= p.dry_tolerance {
            let u = cell.mu2 / cell.m2;
            cell.mu2 /= 1.0 + dt * gn2 * u.abs() / h2.powf(4.0 / 3.0);
        } else {
            let h1 = cell.m1 / p.rho1();
            if h1 >= p.dry_tolerance {
                let u = cell.mu1 / cell.m1;
                cell.mu1 /= 1.0 + dt * gn2 * u.abs() / h1.powf(4.0 / 3.0);
            }
        }
    }
}

/// Density-weighted mass totals (kg/m) of both layers over the interior.
pub fn mass_totals(state: &SimState, grid: &Grid, p: &Parameters) -> (f64, f64) {
    let _ = p;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for i in grid.interior() {
        m1 += state.cells[i].m1 * grid.dx;
        m2 += state.cells[i].m2 * grid.dx;
    }
    (m1, m2)
}
