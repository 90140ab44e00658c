//! Overlapping circle cover of the rectangle, interface arcs, knots and
//! knot ownership.
//!
//! Every circle of the cover is a subdomain `disc ∩ Ω`. A circle whose closed
//! disc lies strictly inside the rectangle is *floating* and its interface is
//! the whole circumference; otherwise it is a *perimeter* circle and its
//! interface is the set of maximal arcs of the circumference inside the
//! closed rectangle. Knots are placed on the interfaces; each knot that is
//! not on the rectangle boundary is owned by the containing subdomain in
//! which it sits deepest.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, TAU};

#[allow(unused_imports)] // unused when std is in the crate graph
use num_traits::Float as _;
use crate::geometry::{wrap_angle, Edge, Point, RectDomain};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubdomainKind {
    Floating,
    Perimeter,
}

/// Closed angle interval `[start, end]`, `end - start <= 2 pi`; `end` may
/// exceed `2 pi` for arcs that wrap through angle zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleInterval {
    pub start: f64,
    pub end: f64,
}

impl AngleInterval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_full_circle(&self) -> bool {
        (self.len() - TAU).abs() < 1e-12
    }

    /// Representative of `theta` in `[start, start + 2 pi)` if it lies in the
    /// interval (with tolerance `tol`), otherwise `None`.
    pub fn locate(&self, theta: f64, tol: f64) -> Option<f64> {
        let t = self.start + wrap_angle(theta - self.start);
        if t <= self.end + tol {
            return Some(t.min(self.end));
        }
        // Just below start, wrapped to the far end.
        if t - TAU >= self.start - tol {
            return Some(self.start);
        }
        None
    }
}

/// One connected piece of a subdomain interface and its ordered knots.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceArc {
    pub interval: AngleInterval,
    /// Knot ids in increasing angle.
    pub knots: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subdomain {
    pub id: usize,
    pub center: Point,
    pub radius: f64,
    pub kind: SubdomainKind,
    pub arcs: Vec<InterfaceArc>,
}

impl Subdomain {
    pub fn is_floating(&self) -> bool {
        self.kind == SubdomainKind::Floating
    }

    /// Interface stencil: all knots on the interface, arc by arc, each arc in
    /// increasing angle.
    pub fn stencil(&self) -> impl Iterator<Item = usize> + '_ {
        self.arcs.iter().flat_map(|a| a.knots.iter().copied())
    }

    pub fn stencil_len(&self) -> usize {
        self.arcs.iter().map(|a| a.knots.len()).sum()
    }

    /// Open-disc membership.
    pub fn disc_contains(&self, p: Point) -> bool {
        p.dist(self.center) < self.radius
    }
}

/// Where a knot sits on its host interface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KnotHost {
    pub subdomain: usize,
    pub arc: usize,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Knot {
    pub id: usize,
    pub position: Point,
    pub host: KnotHost,
    pub on_boundary: bool,
    pub owner: Option<usize>,
    /// Depth of the knot inside its owner; zero for boundary knots.
    pub owner_depth: f64,
}

#[derive(Clone, Debug)]
pub struct Cover {
    pub domain: RectDomain,
    pub m_per_side: usize,
    pub rho: f64,
    pub n_per_circle: usize,
    pub subdomains: Vec<Subdomain>,
    pub knots: Vec<Knot>,
}

/// Lattice cover: `m x m` circles at the cell centres, radius `rho` times
/// the cell size (for non-square cells, `rho` times the RMS of the two cell
/// sides, so that `rho > 1/sqrt(2)` is again the covering condition).
pub fn build_cover(domain: RectDomain, m_per_side: usize, rho: f64) -> Result<Cover> {
    if m_per_side < 2 {
        return Err(Error::Config(format!(
            "m_per_side must be at least 2, got {m_per_side}"
        )));
    }
    if !(rho > FRAC_1_SQRT_2 && rho < 1.0) {
        return Err(Error::Config(format!(
            "overlap ratio rho = {rho} outside (1/sqrt(2), 1): the lattice discs \
             do not cover the domain below 1/sqrt(2) ~ 0.7071"
        )));
    }
    let sx = domain.width() / m_per_side as f64;
    let sy = domain.height() / m_per_side as f64;
    let radius = rho * ((sx * sx + sy * sy) / 2.0).sqrt();
    let mut subdomains = Vec::with_capacity(m_per_side * m_per_side);
    for iy in 0..m_per_side {
        for ix in 0..m_per_side {
            let center = Point::new(
                domain.x0 + sx * (ix as f64 + 0.5),
                domain.y0 + sy * (iy as f64 + 0.5),
            );
            subdomains.push(Subdomain {
                id: subdomains.len(),
                center,
                radius,
                kind: SubdomainKind::Floating,
                arcs: Vec::new(),
            });
        }
    }
    Ok(Cover {
        domain,
        m_per_side,
        rho,
        n_per_circle: 0,
        subdomains,
        knots: Vec::new(),
    })
}

impl Cover {
    /// Cover from explicit circles (for tests and irregular layouts).
    pub fn from_circles(domain: RectDomain, circles: &[(Point, f64)]) -> Self {
        let subdomains = circles
            .iter()
            .enumerate()
            .map(|(id, &(center, radius))| Subdomain {
                id,
                center,
                radius,
                kind: SubdomainKind::Floating,
                arcs: Vec::new(),
            })
            .collect();
        Cover {
            domain,
            m_per_side: 0,
            rho: 0.0,
            n_per_circle: 0,
            subdomains,
            knots: Vec::new(),
        }
    }

    /// Lattice cover with arcs, knots and owners.
    pub fn build(domain: RectDomain, m_per_side: usize, rho: f64, n_per_circle: usize) -> Result<Self> {
        let mut cover = build_cover(domain, m_per_side, rho)?;
        cover.classify_and_clip()?;
        cover.place_knots(n_per_circle)?;
        cover.assign_owners()?;
        Ok(cover)
    }

    pub fn n_knots(&self) -> usize {
        self.knots.len()
    }

    pub fn floating_count(&self) -> usize {
        self.subdomains.iter().filter(|s| s.is_floating()).count()
    }

    /// Fill in kind and interface arcs of every circle.
    pub fn classify_and_clip(&mut self) -> Result<()> {
        let domain = self.domain;
        for sd in &mut self.subdomains {
            if !(sd.radius > 0.0) {
                return Err(Error::Geometry(format!("circle {} has radius {}", sd.id, sd.radius)));
            }
            if domain.boundary_distance(sd.center) > sd.radius {
                sd.kind = SubdomainKind::Floating;
                sd.arcs = vec![InterfaceArc {
                    interval: AngleInterval { start: 0.0, end: TAU },
                    knots: Vec::new(),
                }];
                continue;
            }
            sd.kind = SubdomainKind::Perimeter;
            let arcs = clip_circle(&domain, sd.center, sd.radius);
            if arcs.is_empty() {
                return Err(Error::CoverValidity(format!(
                    "circle {} (center ({}, {}), radius {}) has no circumference inside the \
                     closed domain",
                    sd.id, sd.center.x, sd.center.y, sd.radius
                )));
            }
            if arcs.iter().any(|a| a.is_full_circle()) {
                return Err(Error::Geometry(format!(
                    "circle {} is tangent to the boundary; perturb the overlap ratio",
                    sd.id
                )));
            }
            if !disc_meets_open_rect(&domain, sd.center, sd.radius) {
                return Err(Error::CoverValidity(format!(
                    "circle {} does not intersect the domain interior",
                    sd.id
                )));
            }
            sd.arcs = arcs
                .into_iter()
                .map(|interval| InterfaceArc { interval, knots: Vec::new() })
                .collect();
        }
        Ok(())
    }

    /// Place knots on every interface: `n_per_circle` equispaced on full
    /// circles, endpoint-inclusive equispaced on arcs at the same angular
    /// density (at least five per arc).
    pub fn place_knots(&mut self, n_per_circle: usize) -> Result<()> {
        if n_per_circle < 4 || n_per_circle % 2 != 0 {
            return Err(Error::Config(format!(
                "knots per circle must be even and at least 4, got {n_per_circle}"
            )));
        }
        if self.subdomains.iter().any(|s| s.arcs.is_empty()) {
            return Err(Error::Config("classify_and_clip must run before place_knots".into()));
        }
        self.n_per_circle = n_per_circle;
        let domain = self.domain;
        let mut knots = Vec::new();
        let dtheta = TAU / n_per_circle as f64;
        for sd in &mut self.subdomains {
            for (ai, arc) in sd.arcs.iter_mut().enumerate() {
                arc.knots.clear();
                let thetas: Vec<f64> = if arc.interval.is_full_circle() {
                    (0..n_per_circle).map(|j| dtheta * j as f64).collect()
                } else {
                    let len = arc.interval.len();
                    let count = (((len / dtheta).round() as usize) + 1).max(5);
                    (0..count)
                        .map(|k| {
                            if k + 1 == count {
                                arc.interval.end
                            } else {
                                arc.interval.start + len * k as f64 / (count - 1) as f64
                            }
                        })
                        .collect()
                };
                let last = thetas.len() - 1;
                let full = arc.interval.is_full_circle();
                for (k, &theta) in thetas.iter().enumerate() {
                    let on_boundary = !full && (k == 0 || k == last);
                    let mut position = sd.center.polar(sd.radius, theta);
                    if on_boundary {
                        position = snap_to_boundary(&domain, position);
                    }
                    let id = knots.len();
                    arc.knots.push(id);
                    knots.push(Knot {
                        id,
                        position,
                        host: KnotHost { subdomain: sd.id, arc: ai, theta },
                        on_boundary,
                        owner: None,
                        owner_depth: 0.0,
                    });
                }
            }
        }
        self.knots = knots;
        self.check_coincident_knots()
    }

    fn check_coincident_knots(&self) -> Result<()> {
        let rmin = self
            .subdomains
            .iter()
            .map(|s| s.radius)
            .fold(f64::INFINITY, f64::min);
        let tol = 1e-9 * rmin;
        let mut order: Vec<usize> = (0..self.knots.len()).collect();
        order.sort_by(|&a, &b| self.knots[a].position.x.total_cmp(&self.knots[b].position.x));
        for (pos, &a) in order.iter().enumerate() {
            let pa = self.knots[a].position;
            for &b in &order[pos + 1..] {
                let pb = self.knots[b].position;
                if pb.x - pa.x > tol {
                    break;
                }
                if pa.dist(pb) <= tol {
                    return Err(Error::Geometry(format!(
                        "knots {a} and {b} coincide at ({}, {}); perturb the overlap ratio",
                        pa.x, pa.y
                    )));
                }
            }
        }
        Ok(())
    }

    /// Assign every non-boundary knot to its deepest containing subdomain.
    /// Owners are filled for every knot that has one; the first orphan knot
    /// is reported as an error.
    pub fn assign_owners(&mut self) -> Result<()> {
        let mut first_orphan = None;
        for k in 0..self.knots.len() {
            let knot = &self.knots[k];
            if knot.on_boundary {
                continue;
            }
            match owner_of(&self.domain, &self.subdomains, knot.position, knot.host.subdomain) {
                Some((owner, depth)) => {
                    self.knots[k].owner = Some(owner);
                    self.knots[k].owner_depth = depth;
                }
                None => {
                    self.knots[k].owner = None;
                    first_orphan.get_or_insert(k);
                }
            }
        }
        match first_orphan {
            None => Ok(()),
            Some(k) => {
                let p = self.knots[k].position;
                Err(Error::CoverValidity(format!(
                    "knot {k} at ({}, {}) is interior to no subdomain",
                    p.x, p.y
                )))
            }
        }
    }

    /// Subdomains other than the host whose interior contains knot `k`.
    pub fn containing_subdomains(&self, k: usize) -> Vec<usize> {
        let knot = &self.knots[k];
        self.subdomains
            .iter()
            .filter(|s| s.id != knot.host.subdomain)
            .filter(|s| subdomain_depth(&self.domain, s, knot.position) > 0.0)
            .map(|s| s.id)
            .collect()
    }

    /// Check covering on a `samples x samples` grid of the closed rectangle,
    /// knot ownership, arc non-emptiness and stencil ordering.
    pub fn validate(&self, samples: usize) -> CoverReport {
        let mut report = CoverReport::default();
        let d = self.domain;
        let n = samples.max(2);
        'outer: for iy in 0..n {
            for ix in 0..n {
                let p = Point::new(
                    d.x0 + d.width() * ix as f64 / (n - 1) as f64,
                    d.y0 + d.height() * iy as f64 / (n - 1) as f64,
                );
                report.samples_checked += 1;
                if !self.subdomains.iter().any(|s| s.disc_contains(p)) {
                    report.fail(format!("sample point ({}, {}) is not covered", p.x, p.y));
                    break 'outer;
                }
            }
        }
        for s in &self.subdomains {
            if s.arcs.is_empty() || s.arcs.iter().any(|a| !(a.interval.len() > 0.0)) {
                report.fail(format!("subdomain {} has an empty interface arc", s.id));
            }
            for arc in &s.arcs {
                let th: Vec<f64> = arc.knots.iter().map(|&k| self.knots[k].host.theta).collect();
                let increasing = th.windows(2).all(|w| w[0] < w[1]);
                let inside = th
                    .iter()
                    .all(|&t| t >= arc.interval.start && t <= arc.interval.end);
                let open_end = !arc.interval.is_full_circle()
                    || th.last().is_none_or(|&t| t < arc.interval.end);
                if !(increasing && inside && open_end) {
                    report.fail(format!("stencil of subdomain {} is not ordered by angle", s.id));
                }
            }
        }
        for k in &self.knots {
            if !k.on_boundary && k.owner.is_none() {
                let p = k.position;
                report.fail(format!("knot {} at ({}, {}) has no owner", k.id, p.x, p.y));
                break;
            }
        }
        report
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoverReport {
    pub samples_checked: usize,
    pub first_violation: Option<String>,
    pub violations: usize,
}

impl CoverReport {
    fn fail(&mut self, msg: String) {
        self.violations += 1;
        self.first_violation.get_or_insert(msg);
    }
}

impl CoverReport {
    pub fn is_pass(&self) -> bool {
        self.violations == 0
    }
}

/// Depth of `p` in subdomain `s`: distance to the circle for floating
/// subdomains; for perimeter subdomains also capped by the distance to the
/// domain boundary. Positive iff `p` is interior.
pub fn subdomain_depth(domain: &RectDomain, s: &Subdomain, p: Point) -> f64 {
    let d = s.radius - p.dist(s.center);
    match s.kind {
        SubdomainKind::Floating => d,
        SubdomainKind::Perimeter => d.min(domain.boundary_distance(p)),
    }
}

/// Deepest subdomain (other than `host`) containing `p` in its interior,
/// ties to the smaller id.
pub fn owner_of(
    domain: &RectDomain,
    subdomains: &[Subdomain],
    p: Point,
    host: usize,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for s in subdomains {
        if s.id == host {
            continue;
        }
        let depth = subdomain_depth(domain, s, p);
        if depth > 0.0 && best.is_none_or(|(_, bd)| depth > bd) {
            best = Some((s.id, depth));
        }
    }
    best
}

/// Angle intervals of the circle inside the closed rectangle.
fn clip_circle(domain: &RectDomain, center: Point, radius: f64) -> Vec<AngleInterval> {
    // Angles where the circle is outside one of the edge half-planes.
    let mut outside: Vec<(f64, f64)> = Vec::new();
    for &edge in Edge::ALL.iter() {
        let d = domain.edge_clearance(edge, center);
        if d >= radius {
            continue;
        }
        if d <= -radius {
            return Vec::new();
        }
        let half = (d / radius).acos();
        let n = edge.normal();
        let dir = libm::atan2(n.y, n.x);
        let start = wrap_angle(dir - half);
        let end = start + 2.0 * half;
        if end > TAU {
            outside.push((start, TAU));
            outside.push((0.0, end - TAU));
        } else {
            outside.push((start, end));
        }
    }
    if outside.is_empty() {
        return vec![AngleInterval { start: 0.0, end: TAU }];
    }
    outside.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (s, e) in outside {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    let mut arcs = Vec::new();
    for w in merged.windows(2) {
        push_gap(&mut arcs, w[0].1, w[1].0);
    }
    let first = merged[0];
    let last = merged[merged.len() - 1];
    push_gap(&mut arcs, last.1, first.0 + TAU);
    arcs.sort_by(|a, b| a.start.total_cmp(&b.start));
    arcs
}

fn push_gap(arcs: &mut Vec<AngleInterval>, start: f64, end: f64) {
    if end - start > 1e-12 {
        let s = wrap_angle(start);
        arcs.push(AngleInterval { start: s, end: s + (end - start) });
    }
}

fn disc_meets_open_rect(domain: &RectDomain, center: Point, radius: f64) -> bool {
    let q = domain.clamp(center);
    if domain.contains_open(center) {
        return true;
    }
    q.dist(center) < radius && {
        // Nudge the closest boundary point inward to test the open rectangle.
        let mid = Point::new(
            (domain.x0 + domain.x1) / 2.0,
            (domain.y0 + domain.y1) / 2.0,
        );
        let dir = mid - q;
        let t = 1e-9 * radius / dir.norm().max(f64::MIN_POSITIVE);
        let inner = q + dir * t;
        inner.dist(center) < radius
    }
}

fn snap_to_boundary(domain: &RectDomain, p: Point) -> Point {
    let q = domain.clamp(p);
    let edge = domain.nearest_edge(q);
    match edge {
        Edge::Left | Edge::Right => Point::new(domain.edge_coord(edge), q.y),
        Edge::Bottom | Edge::Top => Point::new(q.x, domain.edge_coord(edge)),
    }
}
