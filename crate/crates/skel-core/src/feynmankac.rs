//! Monte Carlo rows for perimeter subdomains.
//!
//! The diffusion `dX = b dt + sigma dW` (with `sigma sigma^T = a`) is
//! integrated by Euler-Maruyama together with the discount `dY = c Y dt` and
//! the running source `dZ = f Y dt`, until `X` leaves the subdomain. The
//! stopping boundary is moved inward by `c0 sigma_n sqrt(h)` to compensate
//! the overshoot of the discrete path; on exit the point is projected back
//! onto the true boundary.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::cover::{AngleInterval, Subdomain};
use crate::geometry::{Edge, Point, RectDomain};
use crate::interp::InterfaceInterpolant;
use crate::problem::EllipticProblem;
use crate::runner::TaskRunner;
use crate::{Error, Result};
#[allow(unused_imports)] // unused when std is in the crate graph
use num_traits::Float as _;

/// Default boundary-shift constant (`-zeta(1/2) / sqrt(2 pi)`).
pub const DEFAULT_C0: f64 = 0.5826;

/// Trajectories accumulated per partial sum; fixed so that results do not
/// depend on how chunks are scheduled.
const CHUNK: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct McConfig {
    pub trajectories: usize,
    pub h: f64,
    pub seed: u64,
    pub c0: f64,
    /// Per-trajectory step cap; `None` derives it from the subdomain size.
    pub max_steps: Option<usize>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { trajectories: 5000, h: 0.015, seed: 0x5eed, c0: DEFAULT_C0, max_steps: None }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trajectories == 0 {
            return Err(Error::Config("trajectory count must be at least 1".into()));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Config(format!("timestep h = {} must be positive", self.h)));
        }
        if !(self.c0 >= 0.0) {
            return Err(Error::Config(format!("boundary-shift constant c0 = {} must be >= 0", self.c0)));
        }
        if self.max_steps == Some(0) {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        Ok(())
    }

    /// `100 ceil(r^2 / (lambda_min h))` unless set explicitly.
    pub fn step_cap(&self, problem: &EllipticProblem, center: Point, radius: f64) -> usize {
        if let Some(m) = self.max_steps {
            return m;
        }
        let [a, b, c] = problem.diffusion(center);
        let lambda_min = 0.5 * (a + c) - (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let t = radius * radius / (lambda_min.max(f64::MIN_POSITIVE) * self.h);
        (100.0 * t.ceil()).min(usize::MAX as f64 / 2.0) as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryTag {
    Interface,
    DomainBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExitEvent {
    pub x: Point,
    pub y: f64,
    pub z: f64,
    pub tag: BoundaryTag,
    /// Exit angle on the host circle and the arc containing it
    /// (interface exits only).
    pub theta: Option<f64>,
    pub arc: Option<usize>,
    pub steps: usize,
}

/// Stopping region `disc ∩ rectangle` with the interface arcs of the disc.
#[derive(Clone, Debug)]
pub struct ExitRegion {
    pub center: Point,
    pub radius: f64,
    pub domain: Option<RectDomain>,
    pub arcs: Vec<AngleInterval>,
}

impl ExitRegion {
    pub fn from_subdomain(sd: &Subdomain, domain: &RectDomain) -> Self {
        let cuts = Edge::ALL.iter().any(|&e| domain.edge_clearance(e, sd.center) < sd.radius);
        Self {
            center: sd.center,
            radius: sd.radius,
            domain: cuts.then_some(*domain),
            arcs: sd.arcs.iter().map(|a| a.interval).collect(),
        }
    }

    /// Whole disc, interface on the full circumference.
    pub fn disc(center: Point, radius: f64) -> Self {
        Self {
            center,
            radius,
            domain: None,
            arcs: vec![AngleInterval { start: 0.0, end: TAU }],
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.dist(self.center) < self.radius && self.domain.is_none_or(|d| d.contains_open(p))
    }

    fn arc_of(&self, theta: f64) -> Option<(usize, f64)> {
        self.arcs
            .iter()
            .enumerate()
            .find_map(|(i, iv)| iv.locate(theta, 1e-12).map(|t| (i, t)))
    }
}

/// `c0 sigma_n sqrt(h)` with `sigma_n = sqrt(n^T a(x) n)`.
pub fn gm_shift(problem: &EllipticProblem, x: Point, normal: Point, h: f64, c0: f64) -> f64 {
    shift_from(problem.diffusion(x), normal, h.sqrt(), c0)
}

#[inline]
fn shift_from([axx, axy, ayy]: [f64; 3], n: Point, sqrt_h: f64, c0: f64) -> f64 {
    let s2 = axx * n.x * n.x + 2.0 * axy * n.x * n.y + ayy * n.y * n.y;
    c0 * s2.max(0.0).sqrt() * sqrt_h
}

/// Counter-based seed of trajectory `t` of knot `knot`.
pub fn trajectory_seed(base: u64, knot: u64, t: u64) -> u64 {
    splitmix(base ^ splitmix(knot.wrapping_add(splitmix(t))))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Simulate one trajectory from `x0` until it leaves `region`.
pub fn integrate_trajectory(
    problem: &EllipticProblem,
    region: &ExitRegion,
    x0: Point,
    h: f64,
    c0: f64,
    max_steps: usize,
    seed: u64,
) -> Result<ExitEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sqrt_h = h.sqrt();
    let constant = problem.has_constant_dynamics();
    let dyn_at = |p: Point| -> Result<([f64; 3], [[f64; 2]; 2], Point)> {
        let a = problem.diffusion(p);
        Ok((a, problem.diffusion_factor(p)?, problem.drift(p)))
    };
    let (mut a, mut sigma, mut b) = dyn_at(x0)?;
    let c_const = problem.c.as_const();
    let f_const = problem.f.as_const();
    let edge_shift = |a: [f64; 3]| {
        let mut s = [0.0; 4];
        for (k, e) in Edge::ALL.iter().enumerate() {
            s[k] = shift_from(a, e.normal(), sqrt_h, c0);
        }
        s
    };
    let mut edge_s = edge_shift(a);

    let mut x = x0;
    let (mut y, mut z) = (1.0, 0.0);
    for step in 1..=max_steps {
        if !constant && step > 1 {
            (a, sigma, b) = dyn_at(x)?;
            edge_s = edge_shift(a);
        }
        let f = f_const.unwrap_or_else(|| problem.f.eval(x));
        let c = c_const.unwrap_or_else(|| problem.c.eval(x));
        z += f * y * h;
        y *= 1.0 + c * h;
        let xi0: f64 = StandardNormal.sample(&mut rng);
        let xi1: f64 = StandardNormal.sample(&mut rng);
        x = Point::new(
            x.x + b.x * h + sqrt_h * sigma[0][0] * xi0,
            x.y + b.y * h + sqrt_h * (sigma[1][0] * xi0 + sigma[1][1] * xi1),
        );

        // Circle: inward-shifted radius along the radial normal.
        let d = x - region.center;
        let rho = d.norm();
        let normal = if rho > 0.0 { d * (1.0 / rho) } else { Point::new(1.0, 0.0) };
        let circ_hit = rho >= region.radius - shift_from(a, normal, sqrt_h, c0);
        let circ_dist = (rho - region.radius).abs();

        let mut edge_hit: Option<(Edge, f64)> = None;
        if let Some(dom) = &region.domain {
            for (k, &e) in Edge::ALL.iter().enumerate() {
                let cl = dom.edge_clearance(e, x);
                if cl <= edge_s[k] && edge_hit.is_none_or(|(_, best)| cl.abs() < best) {
                    edge_hit = Some((e, cl.abs()));
                }
            }
        }
        if !circ_hit && edge_hit.is_none() {
            continue;
        }
        let boundary_exit = |e: Edge| {
            let dom = region.domain.as_ref().expect("edge exits need a domain");
            ExitEvent {
                x: dom.project_to_edge(e, x),
                y,
                z,
                tag: BoundaryTag::DomainBoundary,
                theta: None,
                arc: None,
                steps: step,
            }
        };
        match edge_hit {
            Some((e, dist)) if !circ_hit || dist <= circ_dist => return Ok(boundary_exit(e)),
            _ => {}
        }
        let theta = libm::atan2(normal.y, normal.x);
        let xp = region.center + normal * region.radius;
        if let Some((arc, t)) = region.arc_of(theta) {
            return Ok(ExitEvent {
                x: xp,
                y,
                z,
                tag: BoundaryTag::Interface,
                theta: Some(t),
                arc: Some(arc),
                steps: step,
            });
        }
        // The projection left the closed rectangle: count it as a boundary
        // exit at the nearest boundary point.
        let dom = region.domain.as_ref().ok_or_else(|| {
            Error::Geometry("circle exit outside every arc without a domain".into())
        })?;
        let q = dom.clamp(xp);
        let e = dom.nearest_edge(q);
        let mut ev = boundary_exit(e);
        ev.x = dom.project_to_edge(e, q);
        return Ok(ev);
    }
    Err(Error::Trajectory { knot: None, steps: max_steps })
}

/// Monte Carlo estimate of one row of the interfacial system.
#[derive(Clone, Debug, PartialEq)]
pub struct RowEstimate {
    pub knot: usize,
    /// `(column knot id, coefficient)` over the owner's stencil, arc by arc.
    pub coeffs: Vec<(usize, f64)>,
    pub coeff_stderr: Vec<f64>,
    pub rhs: f64,
    pub rhs_stderr: f64,
    /// Per-trajectory `sum_j coeff_j`, averaged; equals `-E[Y 1_interface]`.
    pub coeff_sum: f64,
    pub interface_exits: usize,
    pub boundary_exits: usize,
    pub mean_steps: f64,
}

#[derive(Clone, Debug)]
struct Partial {
    s: Vec<f64>,
    s2: Vec<f64>,
    rhs: f64,
    rhs2: f64,
    sum_total: f64,
    interface: usize,
    boundary: usize,
    steps: usize,
}

impl Partial {
    fn new(n: usize) -> Self {
        Self { s: vec![0.0; n], s2: vec![0.0; n], rhs: 0.0, rhs2: 0.0, sum_total: 0.0, interface: 0, boundary: 0, steps: 0 }
    }

    fn merge(&mut self, o: &Partial) {
        for (a, b) in self.s.iter_mut().zip(&o.s) {
            *a += b;
        }
        for (a, b) in self.s2.iter_mut().zip(&o.s2) {
            *a += b;
        }
        self.rhs += o.rhs;
        self.rhs2 += o.rhs2;
        self.sum_total += o.sum_total;
        self.interface += o.interface;
        self.boundary += o.boundary;
        self.steps += o.steps;
    }
}

/// Estimate the row of `knot` (at `x0`) in its perimeter owner.
///
/// `stencil[a]` lists the global knot ids of arc `a` of the owner and
/// `interps[a]` its interpolant. Every trajectory that ends on arc `a`
/// contributes `-H_j(theta) Y` to the coefficient of each knot `j` of that
/// arc; every trajectory contributes `Z`, and boundary exits add `g Y`, to
/// the right-hand side.
#[allow(clippy::too_many_arguments)]
pub fn estimate_row<R: TaskRunner + ?Sized>(
    problem: &EllipticProblem,
    region: &ExitRegion,
    stencil: &[Vec<usize>],
    interps: &[InterfaceInterpolant],
    knot: usize,
    x0: Point,
    mc: &McConfig,
    runner: &R,
) -> Result<RowEstimate> {
    mc.validate()?;
    if !region.contains(x0) {
        return Err(Error::Geometry(format!(
            "knot {knot} at ({}, {}) is not inside its owner",
            x0.x, x0.y
        )));
    }
    let offsets: Vec<usize> = stencil
        .iter()
        .scan(0, |acc, s| {
            let o = *acc;
            *acc += s.len();
            Some(o)
        })
        .collect();
    let width: usize = stencil.iter().map(|s| s.len()).sum();
    let max_steps = mc.step_cap(problem, region.center, region.radius);
    let n = mc.trajectories;
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<Result<Partial>> = runner.map(chunks, |ci| {
        let mut p = Partial::new(width);
        for t in ci * CHUNK..((ci + 1) * CHUNK).min(n) {
            let seed = trajectory_seed(mc.seed, knot as u64, t as u64);
            let ev = integrate_trajectory(problem, region, x0, mc.h, mc.c0, max_steps, seed)
                .map_err(|e| match e {
                    Error::Trajectory { steps, .. } => Error::Trajectory { knot: Some(knot), steps },
                    other => other,
                })?;
            p.steps += ev.steps;
            let mut payoff = ev.z;
            match (ev.tag, ev.arc, ev.theta) {
                (BoundaryTag::Interface, Some(arc), Some(theta)) => {
                    let h = interps[arc].cardinals(theta).map_err(|e| {
                        Error::Evaluation(format!("knot {knot}: {e}"))
                    })?;
                    let base = offsets[arc];
                    let mut total = 0.0;
                    for (j, hj) in h.iter().enumerate() {
                        let v = -hj * ev.y;
                        p.s[base + j] += v;
                        p.s2[base + j] += v * v;
                        total += v;
                    }
                    p.sum_total += total;
                    p.interface += 1;
                }
                _ => {
                    payoff += problem.g.eval(ev.x) * ev.y;
                    p.boundary += 1;
                }
            }
            p.rhs += payoff;
            p.rhs2 += payoff * payoff;
        }
        Ok(p)
    });
    let mut acc = Partial::new(width);
    for p in partials {
        acc.merge(&p?);
    }
    let nf = n as f64;
    let stderr = |s: f64, s2: f64| {
        if n < 2 {
            return 0.0;
        }
        let mean = s / nf;
        let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
        (var / nf).sqrt()
    };
    let ids = stencil.iter().flatten().copied();
    Ok(RowEstimate {
        knot,
        coeffs: ids.zip(acc.s.iter().map(|s| s / nf)).collect(),
        coeff_stderr: acc.s.iter().zip(&acc.s2).map(|(&s, &s2)| stderr(s, s2)).collect(),
        rhs: acc.rhs / nf,
        rhs_stderr: stderr(acc.rhs, acc.rhs2),
        coeff_sum: acc.sum_total / nf,
        interface_exits: acc.interface,
        boundary_exits: acc.boundary,
        mean_steps: acc.steps as f64 / nf,
    })
}

/// Sample mean and standard error of a functional of `trajectories` exits.
pub fn mean_exit_functional(
    problem: &EllipticProblem,
    region: &ExitRegion,
    x0: Point,
    mc: &McConfig,
    functional: impl Fn(&ExitEvent) -> f64,
) -> Result<(f64, f64)> {
    mc.validate()?;
    let max_steps = mc.step_cap(problem, region.center, region.radius);
    let (mut s, mut s2) = (0.0, 0.0);
    for t in 0..mc.trajectories {
        let ev = integrate_trajectory(problem, region, x0, mc.h, mc.c0, max_steps, trajectory_seed(mc.seed, 0, t as u64))?;
        let v = functional(&ev);
        s += v;
        s2 += v * v;
    }
    let n = mc.trajectories as f64;
    let mean = s / n;
    let var = if mc.trajectories > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok((mean, (var / n).sqrt()))
}
