//! Benchmark initial data.
//!
//! Every datum vanishes on the boundary of its domain. `phi2`/`varphi2`
//! jump across `x = 1/2`; points on that line take the left branch
//! (`x ≤ 1/2`).

use core::f64::consts::PI;

use alloc::format;

use crate::math::{atan2, powf, sin, sqrt};
use crate::mesh::Domain;
use crate::{Error, Result};

/// Exponent `π/ω` of the corner singularity for the opening angle `ω = 3π/2`.
pub const SING_EXPONENT: f64 = 2.0 / 3.0;
/// Lower end `ω₁` of the angular range `(ω₁, ω₂] = (-π/2, π]`.
pub const SING_OMEGA1: f64 = -PI / 2.0;

/// Selector for one of the benchmark initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialDatum {
    Phi0,
    Phi1,
    Phi2,
    Sing,
    VarPhi0,
    VarPhi1,
    VarPhi2,
}

impl InitialDatum {
    pub const ALL: [InitialDatum; 7] = [
        InitialDatum::Phi0,
        InitialDatum::Phi1,
        InitialDatum::Phi2,
        InitialDatum::Sing,
        InitialDatum::VarPhi0,
        InitialDatum::VarPhi1,
        InitialDatum::VarPhi2,
    ];

    pub fn id(self) -> &'static str {
        match self {
            InitialDatum::Phi0 => "phi0",
            InitialDatum::Phi1 => "phi1",
            InitialDatum::Phi2 => "phi2",
            InitialDatum::Sing => "sing",
            InitialDatum::VarPhi0 => "varphi0",
            InitialDatum::VarPhi1 => "varphi1",
            InitialDatum::VarPhi2 => "varphi2",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.id() == id)
    }

    /// The domain the datum is defined on.
    pub fn domain(self) -> Domain {
        match self {
            InitialDatum::Phi0 | InitialDatum::Phi1 | InitialDatum::Phi2 => Domain::UnitSquare,
            InitialDatum::Sing => Domain::LShape,
            _ => Domain::UnitCube,
        }
    }

    pub fn dim(self) -> usize {
        self.domain().dim()
    }

    /// Evaluate at `x`, which must lie in the closed domain.
    pub fn eval(self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::param(format!("{} expects a point in R^{}", self.id(), self.dim())));
        }
        let inside = match self.domain() {
            Domain::UnitSquare | Domain::UnitCube => x.iter().all(|c| (0.0..=1.0).contains(c)),
            Domain::LShape => lshape_contains(x[0], x[1]),
        };
        if !inside {
            return Err(Error::param(format!("point {x:?} outside the domain of {}", self.id())));
        }
        Ok(match self {
            InitialDatum::Phi0 => eval_phi0(x[0], x[1]),
            InitialDatum::Phi1 => eval_phi1(x[0], x[1]),
            InitialDatum::Phi2 => eval_phi2(x[0], x[1]),
            InitialDatum::Sing => eval_sing(x[0], x[1])?,
            InitialDatum::VarPhi0 => eval_phi0(x[0], x[1]) * sin(PI * x[2]),
            InitialDatum::VarPhi1 => eval_phi1(x[0], x[1]) * sin(PI * x[2]),
            InitialDatum::VarPhi2 => eval_phi2(x[0], x[1]) * sin(PI * x[2]),
        })
    }
}

fn lshape_contains(x: f64, y: f64) -> bool {
    (-1.0..=1.0).contains(&x) && (-1.0..=1.0).contains(&y) && !(x < 0.0 && y < 0.0)
}

/// `sin(πx) sin(πy)`
pub fn eval_phi0(x: f64, y: f64) -> f64 {
    sin(PI * x) * sin(PI * y)
}

/// Continuous tent in `x` times `sin(πy)`.
pub fn eval_phi1(x: f64, y: f64) -> f64 {
    if x <= 0.5 {
        x * sin(PI * y)
    } else {
        (1.0 - x) * sin(PI * y)
    }
}

/// Like [`eval_phi1`] but with the right branch doubled, so it jumps by
/// `sin(πy)/2` across `x = 1/2`.
pub fn eval_phi2(x: f64, y: f64) -> f64 {
    if x <= 0.5 {
        x * sin(PI * y)
    } else {
        2.0 * (1.0 - x) * sin(PI * y)
    }
}

/// C² cutoff: 1 on `[0, 1/4]`, 0 on `[3/4, ∞)`, a quintic in between.
pub fn eval_cutoff(r: f64) -> f64 {
    if r <= 0.25 {
        1.0
    } else if r >= 0.75 {
        0.0
    } else {
        // Horner form of -192r⁵ + 480r⁴ - 440r³ + 180r² - 33.75r + 3.375.
        ((((-192.0 * r + 480.0) * r - 440.0) * r + 180.0) * r - 33.75) * r + 3.375
    }
}

/// Polar angle in `(-π/2, π]`, the branch on which the L-shape is a sector.
pub fn lshape_angle(x: f64, y: f64) -> f64 {
    // `+ 0.0` turns -0.0 into +0.0 so the negative x-axis maps to π, not -π.
    let theta = atan2(y + 0.0, x);
    if theta < SING_OMEGA1 {
        theta + 2.0 * PI
    } else {
        theta
    }
}

/// Corner-singular datum `χ(r) r^{2/3} sin(2/3 (θ + π/2))` on the L-shape.
pub fn eval_sing(x: f64, y: f64) -> Result<f64> {
    if !lshape_contains(x, y) {
        return Err(Error::param(format!("({x}, {y}) is outside the L-shaped domain")));
    }
    let r = sqrt(x * x + y * y);
    if r == 0.0 {
        return Ok(0.0);
    }
    let theta = lshape_angle(x, y);
    Ok(eval_cutoff(r) * powf(r, SING_EXPONENT) * sin(SING_EXPONENT * (theta - SING_OMEGA1)))
}
