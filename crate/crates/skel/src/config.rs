//! Run configuration, read from JSON. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use skel_core::assembly::AssemblyMode;
use skel_core::problem::{builtin_problem, EllipticProblem, Field};

use crate::{Result, SkelError, Stage};

/// Environment variable that overrides `seed`.
pub const SEED_ENV: &str = "SKEL_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemSpec {
    Builtin(String),
    Inline(InlineProblem),
}

/// Constant-coefficient problem `L u + c u + f = 0`, `u = g` on the
/// boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InlineProblem {
    pub a_xx: f64,
    pub a_xy: f64,
    pub a_yy: f64,
    pub b_x: f64,
    pub b_y: f64,
    pub c: f64,
    pub f: f64,
    pub g: f64,
}

impl Default for InlineProblem {
    fn default() -> Self {
        Self { a_xx: 1.0, a_xy: 0.0, a_yy: 1.0, b_x: 0.0, b_y: 0.0, c: 0.0, f: 0.0, g: 0.0 }
    }
}

impl ProblemSpec {
    pub fn build(&self) -> Result<EllipticProblem> {
        match self {
            ProblemSpec::Builtin(name) => builtin_problem(name).stage("problem"),
            ProblemSpec::Inline(p) => {
                let mut prob = EllipticProblem::new("inline")
                    .with_diffusion(Field::Const(p.a_xx), Field::Const(p.a_xy), Field::Const(p.a_yy))
                    .with_drift(Field::Const(p.b_x), Field::Const(p.b_y))
                    .with_reaction(Field::Const(p.c))
                    .with_source(Field::Const(p.f))
                    .with_boundary(Field::Const(p.g));
                // a constant solves the problem when it is consistent
                if p.f == 0.0 && p.c == 0.0 {
                    prob = prob.with_exact(Field::Const(p.g));
                }
                Ok(prob)
            }
        }
    }

    pub fn name(&self) -> &str {
        match self {
            ProblemSpec::Builtin(name) => name,
            ProblemSpec::Inline(_) => "inline",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Standard,
    Averaged,
}

impl From<Mode> for AssemblyMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Standard => AssemblyMode::Standard,
            Mode::Averaged => AssemblyMode::Averaged,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    /// `[x0, x1, y0, y1]`.
    pub domain: [f64; 4],
    pub m_per_side: usize,
    pub rho: f64,
    pub n_per_circle: usize,
    pub n_r: usize,
    /// RBF shape parameter `c^2`.
    pub c2: f64,
    /// Trajectories per perimeter knot.
    pub trajectories: usize,
    pub h: f64,
    pub seed: u64,
    pub c0: f64,
    /// RAS part count.
    pub parts: usize,
    pub gmres_tol: f64,
    pub gmres_max_iter: usize,
    pub mode: Mode,
    pub output_dir: Option<PathBuf>,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemSpec::Builtin("paper46".into()),
            domain: [-50.0, 50.0, -50.0, 50.0],
            m_per_side: 10,
            rho: 0.9,
            n_per_circle: 44,
            n_r: 22,
            c2: 1.5,
            trajectories: 5000,
            h: 0.015,
            seed: 0x5eed,
            c0: skel_core::feynmankac::DEFAULT_C0,
            parts: 16,
            gmres_tol: 1e-10,
            gmres_max_iter: 500,
            mode: Mode::Standard,
            output_dir: None,
            workers: 1,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| SkelError::Io { path: path.into(), source })?;
        Self::from_json(&text)
    }

    /// Range checks for parameters not validated by the stage that uses
    /// them.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SkelError::Config(m));
        if self.m_per_side == 0 {
            return bad("m_per_side must be at least 1".into());
        }
        if self.n_per_circle < 4 {
            return bad(format!("n_per_circle = {} must be at least 4", self.n_per_circle));
        }
        if self.n_r < 3 {
            return bad(format!("n_r = {} must be at least 3", self.n_r));
        }
        if !(self.c2 > 0.0 && self.c2.is_finite()) {
            return bad(format!("c2 = {} must be positive", self.c2));
        }
        if self.parts == 0 {
            return bad("parts must be at least 1".into());
        }
        if !(self.gmres_tol > 0.0 && self.gmres_tol < 1.0) {
            return bad(format!("gmres_tol = {} must lie in (0, 1)", self.gmres_tol));
        }
        if self.gmres_max_iter == 0 {
            return bad("gmres_max_iter must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }
}

/// Apply `SKEL_SEED` (decimal or `0x` hex) if it is set.
pub fn apply_env_overrides(cfg: &mut RunConfig) -> Result<()> {
    if let Ok(s) = std::env::var(SEED_ENV) {
        cfg.seed = parse_seed(&s).ok_or_else(|| SkelError::Config(format!("{SEED_ENV}={s:?} is not an integer")))?;
    }
    Ok(())
}

pub fn parse_seed(s: &str) -> Option<u64> {
    let s = s.trim();
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}
