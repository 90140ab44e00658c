//! Planar points and the rectangular domain.

use core::ops::{Add, Mul, Sub};

#[allow(unused_imports)] // unused when std is in the crate graph
use num_traits::Float as _;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Point on the circle of `radius` around `self` at polar angle `theta`.
    #[inline]
    pub fn polar(self, radius: f64, theta: f64) -> Point {
        Point::new(self.x + radius * theta.cos(), self.y + radius * theta.sin())
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// One of the four edges of a [`RectDomain`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    /// Outward unit normal.
    pub fn normal(self) -> Point {
        match self {
            Edge::Left => Point::new(-1.0, 0.0),
            Edge::Right => Point::new(1.0, 0.0),
            Edge::Bottom => Point::new(0.0, -1.0),
            Edge::Top => Point::new(0.0, 1.0),
        }
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectDomain {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl RectDomain {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite()) {
            return Err(Error::Config("rectangle bounds must be finite".into()));
        }
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::Config(alloc::format!(
                "empty rectangle [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    /// The square `[-half, half]^2`.
    pub fn square(half: f64) -> Result<Self> {
        Self::new(-half, half, -half, half)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    /// Coordinate of the line carrying `edge`.
    pub fn edge_coord(&self, edge: Edge) -> f64 {
        match edge {
            Edge::Left => self.x0,
            Edge::Right => self.x1,
            Edge::Bottom => self.y0,
            Edge::Top => self.y1,
        }
    }

    /// Signed distance from `p` to the line of `edge`, positive inside.
    pub fn edge_clearance(&self, edge: Edge, p: Point) -> f64 {
        match edge {
            Edge::Left => p.x - self.x0,
            Edge::Right => self.x1 - p.x,
            Edge::Bottom => p.y - self.y0,
            Edge::Top => self.y1 - p.y,
        }
    }

    /// Distance to the boundary for points inside the closed rectangle;
    /// negative outside.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        Edge::ALL
            .iter()
            .map(|&e| self.edge_clearance(e, p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains_closed(&self, p: Point, tol: f64) -> bool {
        self.boundary_distance(p) >= -tol
    }

    pub fn contains_open(&self, p: Point) -> bool {
        self.boundary_distance(p) > 0.0
    }

    /// Nearest point of the closed rectangle.
    pub fn clamp(&self, p: Point) -> Point {
        Point::new(p.x.clamp(self.x0, self.x1), p.y.clamp(self.y0, self.y1))
    }

    /// Orthogonal projection onto the line of `edge`, clamped to the edge segment.
    pub fn project_to_edge(&self, edge: Edge, p: Point) -> Point {
        let q = match edge {
            Edge::Left | Edge::Right => Point::new(self.edge_coord(edge), p.y),
            Edge::Bottom | Edge::Top => Point::new(p.x, self.edge_coord(edge)),
        };
        self.clamp(q)
    }

    /// Edge nearest to `p` (smallest clearance; ties in [`Edge::ALL`] order).
    pub fn nearest_edge(&self, p: Point) -> Edge {
        let mut best = Edge::Left;
        let mut best_d = f64::INFINITY;
        for &e in Edge::ALL.iter() {
            let d = self.edge_clearance(e, p);
            if d < best_d {
                best_d = d;
                best = e;
            }
        }
        best
    }
}

/// Angle reduced to `[0, 2 pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let tau = core::f64::consts::TAU;
    let t = theta - tau * (theta / tau).floor();
    if t >= tau {
        0.0
    } else {
        t
    }
}
