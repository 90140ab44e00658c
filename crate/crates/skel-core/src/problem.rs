//! Elliptic problem definition `L u + c u + f = 0` in the rectangle,
//! `u = g` on its boundary, with
//! `L = a_xx/2 d_xx + a_xy d_xy + a_yy/2 d_yy + b_x d_x + b_y d_y`.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::fmt;

#[allow(unused_imports)] // unused when std is in the crate graph
use num_traits::Float as _;
use crate::geometry::Point;
use crate::{Error, Result};

/// Scalar field over the plane. Constant fields are kept apart so hot loops
/// can skip the call.
#[derive(Clone)]
pub enum Field {
    Const(f64),
    Func(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

impl Field {
    pub fn func(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Field::Func(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, p: Point) -> f64 {
        match self {
            Field::Const(v) => *v,
            Field::Func(f) => f(p),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Field::Const(v) => Some(*v),
            Field::Func(_) => None,
        }
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Const(v) => write!(f, "Const({v})"),
            Field::Func(_) => f.write_str("Func(..)"),
        }
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Const(v)
    }
}

/// Lower-triangular `sigma` with `sigma sigma^T = a`, stored row-major.
pub type DiffusionFactor = [[f64; 2]; 2];

#[derive(Clone, Debug)]
pub struct EllipticProblem {
    pub name: String,
    pub a_xx: Field,
    pub a_xy: Field,
    pub a_yy: Field,
    pub b_x: Field,
    pub b_y: Field,
    /// Zeroth-order coefficient, required `<= 0`.
    pub c: Field,
    pub f: Field,
    /// Dirichlet data on the rectangle boundary.
    pub g: Field,
    pub u_exact: Option<Field>,
}

impl EllipticProblem {
    /// Identity diffusion, no drift, no reaction, no source, zero data.
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            a_xx: Field::Const(1.0),
            a_xy: Field::Const(0.0),
            a_yy: Field::Const(1.0),
            b_x: Field::Const(0.0),
            b_y: Field::Const(0.0),
            c: Field::Const(0.0),
            f: Field::Const(0.0),
            g: Field::Const(0.0),
            u_exact: None,
        }
    }

    pub fn with_diffusion(mut self, a_xx: Field, a_xy: Field, a_yy: Field) -> Self {
        self.a_xx = a_xx;
        self.a_xy = a_xy;
        self.a_yy = a_yy;
        self
    }

    pub fn with_drift(mut self, b_x: Field, b_y: Field) -> Self {
        self.b_x = b_x;
        self.b_y = b_y;
        self
    }

    pub fn with_reaction(mut self, c: Field) -> Self {
        self.c = c;
        self
    }

    pub fn with_source(mut self, f: Field) -> Self {
        self.f = f;
        self
    }

    pub fn with_boundary(mut self, g: Field) -> Self {
        self.g = g;
        self
    }

    pub fn with_exact(mut self, u: Field) -> Self {
        self.u_exact = Some(u);
        self
    }

    /// `(a_xx, a_xy, a_yy)` at `p`.
    #[inline]
    pub fn diffusion(&self, p: Point) -> [f64; 3] {
        [self.a_xx.eval(p), self.a_xy.eval(p), self.a_yy.eval(p)]
    }

    #[inline]
    pub fn drift(&self, p: Point) -> Point {
        Point::new(self.b_x.eval(p), self.b_y.eval(p))
    }

    /// True when the diffusion and drift are constant fields.
    pub fn has_constant_dynamics(&self) -> bool {
        [&self.a_xx, &self.a_xy, &self.a_yy, &self.b_x, &self.b_y]
            .iter()
            .all(|f| f.as_const().is_some())
    }

    /// Cholesky factor of the second-order coefficient matrix at `p`.
    pub fn diffusion_factor(&self, p: Point) -> Result<DiffusionFactor> {
        cholesky2(self.diffusion(p)).ok_or_else(|| Error::Coefficient {
            x: p.x,
            y: p.y,
            detail: "second-order coefficient matrix is not positive definite".to_string(),
        })
    }

    /// Checks positive definiteness and `c <= 0` at `p`.
    pub fn check_at(&self, p: Point) -> Result<()> {
        self.diffusion_factor(p)?;
        let c = self.c.eval(p);
        if !(c <= 0.0) {
            return Err(Error::Coefficient {
                x: p.x,
                y: p.y,
                detail: alloc::format!("zeroth-order coefficient c = {c} must be <= 0"),
            });
        }
        Ok(())
    }

    pub fn exact(&self, p: Point) -> Option<f64> {
        self.u_exact.as_ref().map(|u| u.eval(p))
    }
}

/// Cholesky factor of `[[a, b], [b, c]]`; `None` unless positive definite.
pub fn cholesky2([a, b, c]: [f64; 3]) -> Option<DiffusionFactor> {
    if !(a > 0.0) {
        return None;
    }
    let l11 = a.sqrt();
    let l21 = b / l11;
    let d = c - l21 * l21;
    if !(d > 0.0) {
        return None;
    }
    Some([[l11, 0.0], [l21, d.sqrt()]])
}

/// Names accepted by [`builtin_problem`].
pub const BUILTIN_NAMES: [&str; 4] = ["paper46", "constant", "harmonic_xy", "disc_exit_time"];

/// Built-in test problems.
///
/// * `paper46`: Poisson problem `lap u = F` with the smooth manufactured
///   solution [`manufactured_u`], encoded as `a = 2I`, `f = -F`.
/// * `constant`: `u = 1`, Laplace operator.
/// * `harmonic_xy`: `u = x y`, Laplace operator.
/// * `disc_exit_time`: `a = I`, `f = 1`, `g = 0` (mean exit time of Brownian
///   motion; on a disc of radius `R` the solution is `(R^2 - |x|^2) / 2`).
pub fn builtin_problem(name: &str) -> Result<EllipticProblem> {
    let two = Field::Const(2.0);
    let zero = Field::Const(0.0);
    let p = match name {
        "paper46" => EllipticProblem::new(name)
            .with_diffusion(two.clone(), zero, two)
            .with_source(Field::func(|p| -manufactured_laplacian(p)))
            .with_boundary(Field::func(manufactured_u))
            .with_exact(Field::func(manufactured_u)),
        "constant" => EllipticProblem::new(name)
            .with_diffusion(two.clone(), zero, two)
            .with_boundary(Field::Const(1.0))
            .with_exact(Field::Const(1.0)),
        "harmonic_xy" => {
            let xy = Field::func(|p: Point| p.x * p.y);
            EllipticProblem::new(name)
                .with_diffusion(two.clone(), zero, two)
                .with_boundary(xy.clone())
                .with_exact(xy)
        }
        "disc_exit_time" => EllipticProblem::new(name).with_source(Field::Const(1.0)),
        other => {
            return Err(Error::Config(alloc::format!(
                "unknown problem '{other}' (expected one of {BUILTIN_NAMES:?})"
            )))
        }
    };
    Ok(p)
}

/// `3 + sin(s)/3 + tanh(w)/3` with `s = sqrt(1 + x^2/100 + y^2/50)` and
/// `w = sin(3x/25 + y/20) + sin(x/20 - 3y/25)`.
pub fn manufactured_u(p: Point) -> f64 {
    let s = (1.0 + p.x * p.x / 100.0 + p.y * p.y / 50.0).sqrt();
    let w = (3.0 * p.x / 25.0 + p.y / 20.0).sin() + (p.x / 20.0 - 3.0 * p.y / 25.0).sin();
    3.0 + s.sin() / 3.0 + w.tanh() / 3.0
}

/// Analytic Laplacian of [`manufactured_u`].
pub fn manufactured_laplacian(p: Point) -> f64 {
    let (x, y) = (p.x, p.y);
    let s = (1.0 + x * x / 100.0 + y * y / 50.0).sqrt();
    let s_x = x / (100.0 * s);
    let s_y = y / (50.0 * s);
    let s3 = s * s * s;
    let lap_s = 1.0 / (100.0 * s) - x * x / (1.0e4 * s3) + 1.0 / (50.0 * s) - y * y / (2500.0 * s3);
    let (sin_s, cos_s) = s.sin_cos();
    let lap_sin_s = cos_s * lap_s - sin_s * (s_x * s_x + s_y * s_y);

    let alpha = 3.0 * x / 25.0 + y / 20.0;
    let beta = x / 20.0 - 3.0 * y / 25.0;
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let w = sa + sb;
    let w_x = 3.0 / 25.0 * ca + cb / 20.0;
    let w_y = ca / 20.0 - 3.0 / 25.0 * cb;
    let lap_w = -(9.0 / 625.0 + 1.0 / 400.0) * (sa + sb);
    let t = w.tanh();
    let dt = 1.0 - t * t;
    let d2t = -2.0 * t * dt;
    let lap_tanh = dt * lap_w + d2t * (w_x * w_x + w_y * w_y);

    (lap_sin_s + lap_tanh) / 3.0
}
