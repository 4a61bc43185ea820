//! Physical and numerical parameters shared across the solver.

use crate::error::ParamError;

/// Default depth tolerance below which a layer is treated as dry (m).
pub const DEFAULT_DRY_TOLERANCE: f64 = 1e-3;

/// Default target Courant number.
pub const DEFAULT_CFL: f64 = 0.9;

/// Strategy used to build the interface eigenbasis at wet interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    /// Closed-form expansion in the velocity difference and density ratio.
    VelocityDifference,
    /// Linearization about the initial at-rest background state.
    LinearizedStatic,
    /// Linearization about the current interface state.
    LinearizedDynamic,
    /// Roots of the full characteristic quartic at the interface average.
    Direct,
}

impl EigenMethod {
    /// Parse from a config/CLI token.
    pub fn parse(s: &str) -> Result<Self, ParamError> {
        match s {
            "velocity-difference" | "veldiff" => Ok(Self::VelocityDifference),
            "linearized-static" | "static" => Ok(Self::LinearizedStatic),
            "linearized-dynamic" | "dynamic" => Ok(Self::LinearizedDynamic),
            "direct" | "lapack" => Ok(Self::Direct),
            _ => Err(ParamError::UnknownEigenMethod(s.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::VelocityDifference => "velocity-difference",
            Self::LinearizedStatic => "linearized-static",
            Self::LinearizedDynamic => "linearized-dynamic",
            Self::Direct => "direct",
        }
    }
}

/// How the eigenspace is estimated at an inundation interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InundationMethod {
    /// Treat the dry cell's bottom depth as exactly zero and use the
    /// analytic front speed for the wave entering the dry cell.
    ZeroDepthEstimate,
    /// Fill the dry cell's bottom depth with the dry tolerance and solve
    /// as a fully wet interface.
    SmallDepthFill,
}

impl InundationMethod {
    pub fn parse(s: &str) -> Result<Self, ParamError> {
        match s {
            "zero-depth" => Ok(Self::ZeroDepthEstimate),
            "small-depth-fill" | "fill" => Ok(Self::SmallDepthFill),
            _ => Err(ParamError::UnknownInundationMethod(s.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ZeroDepthEstimate => "zero-depth",
            Self::SmallDepthFill => "small-depth-fill",
        }
    }
}

/// At-rest background surfaces used by the static linearized eigensolver
/// and by scenario initialization. Both are elevations (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Background {
    /// Sea surface elevation eta1_hat (m).
    pub eta1: f64,
    /// Internal surface elevation eta2_hat (m).
    pub eta2: f64,
}

impl Background {
    /// Background layer depths over bathymetry `b`, clamped at zero where
    /// the surface sits below the bed.
    pub fn hat_depths(&self, b: f64) -> (f64, f64) {
        let h2 = (self.eta2 - b).max(0.0);
        let eta2 = if h2 > 0.0 { self.eta2 } else { b };
        let h1 = (self.eta1 - eta2).max(0.0);
        (h1, h2)
    }
}

/// Physical constants and solver knobs.
///
/// Densities are kept private so the cached ratio `r = rho1 / rho2` can
/// never go stale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    /// Gravitational acceleration (m/s^2).
    pub g: f64,
    rho1: f64,
    rho2: f64,
    r: f64,
    /// Depth below which a layer is dry (m).
    pub dry_tolerance: f64,
    /// Target Courant number for time step selection.
    pub cfl: f64,
    pub eigen_method: EigenMethod,
    pub inundation_method: InundationMethod,
    /// Manning roughness coefficient; `None` disables friction.
    pub manning_n: Option<f64>,
    /// Background surfaces for the static linearized eigensolver.
    pub background: Option<Background>,
}

impl Parameters {
    /// Build parameters with `g` and the two layer densities (kg/m^3).
    /// Requires `0 < rho1 <= rho2` for a stably stratified column.
    pub fn new(g: f64, rho1: f64, rho2: f64) -> Result<Self, ParamError> {
        if !(g > 0.0) {
            return Err(ParamError::NonPositiveGravity(g));
        }
        if !(rho1 > 0.0) || !(rho2 > 0.0) {
            return Err(ParamError::NonPositiveDensity);
        }
        if rho1 > rho2 {
            return Err(ParamError::UnstableStratification { rho1, rho2 });
        }
        Ok(Self {
            g,
            rho1,
            rho2,
            r: rho1 / rho2,
            dry_tolerance: DEFAULT_DRY_TOLERANCE,
            cfl: DEFAULT_CFL,
            eigen_method: EigenMethod::LinearizedDynamic,
            inundation_method: InundationMethod::ZeroDepthEstimate,
            manning_n: None,
            background: None,
        })
    }

    /// Top layer density (kg/m^3).
    pub fn rho1(&self) -> f64 {
        self.rho1
    }

    /// Bottom layer density (kg/m^3).
    pub fn rho2(&self) -> f64 {
        self.rho2
    }

    /// Density ratio rho1/rho2, in (0, 1].
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Replace the densities, recomputing the cached ratio.
    pub fn set_densities(&mut self, rho1: f64, rho2: f64) -> Result<(), ParamError> {
        if !(rho1 > 0.0) || !(rho2 > 0.0) {
            return Err(ParamError::NonPositiveDensity);
        }
        if rho1 > rho2 {
            return Err(ParamError::UnstableStratification { rho1, rho2 });
        }
        self.rho1 = rho1;
        self.rho2 = rho2;
        self.r = rho1 / rho2;
        Ok(())
    }

    /// Reduced gravity g' = (1 - r) g (m/s^2).
    pub fn reduced_gravity(&self) -> f64 {
        (1.0 - self.r) * self.g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_tracks_density_change() {
        let mut p = Parameters::new(9.8, 1025.0, 1045.0).unwrap();
        assert!((p.r() - 1025.0 / 1045.0).abs() < 1e-15);
        p.set_densities(0.95, 1.0).unwrap();
        assert_eq!(p.r(), 0.95);
        assert!((p.reduced_gravity() - 0.05 * 9.8).abs() < 1e-15);
    }

    #[test]
    fn rejects_unstable_stratification() {
        assert!(Parameters::new(9.8, 1045.0, 1025.0).is_err());
        assert!(Parameters::new(-9.8, 1.0, 1.0).is_err());
        assert!(Parameters::new(9.8, 0.0, 1.0).is_err());
    }

    #[test]
    fn background_depths_clamp_on_dry_bed() {
        let bg = Background { eta1: 0.0, eta2: -0.6 };
        let (h1, h2) = bg.hat_depths(-1.0);
        assert_eq!((h1, h2), (0.6, 0.4));
        // Bed above the internal surface: bottom layer absent, top layer
        // measured down to the bed.
        let (h1, h2) = bg.hat_depths(-0.2);
        assert_eq!((h1, h2), (0.2, 0.0));
    }

    #[test]
    fn method_names_round_trip() {
        for m in [
            EigenMethod::VelocityDifference,
            EigenMethod::LinearizedStatic,
            EigenMethod::LinearizedDynamic,
            EigenMethod::Direct,
        ] {
            assert_eq!(EigenMethod::parse(m.name()).unwrap(), m);
        }
        for m in [InundationMethod::ZeroDepthEstimate, InundationMethod::SmallDepthFill] {
            assert_eq!(InundationMethod::parse(m.name()).unwrap(), m);
        }
    }
}
