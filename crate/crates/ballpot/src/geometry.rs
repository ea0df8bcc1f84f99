//! Points and balls in dimension 2 or 3.
//!
//! The dimension is a runtime property so that one binary can drive both
//! planar and spatial experiments from configuration.

use crate::error::{Error, Result};
use crate::math::FloatExt;
use rand::Rng;

/// A point of `R^d`, `d` in {2, 3}. Copy-sized; the unused coordinate of a
/// planar point is kept at zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    c: [f64; 3],
    dim: u8,
}

impl Point {
    pub fn new2(x: f64, y: f64) -> Self {
        Point { c: [x, y, 0.0], dim: 2 }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        Point { c: [x, y, z], dim: 3 }
    }

    pub fn zero(dim: usize) -> Self {
        debug_assert!(dim == 2 || dim == 3);
        Point { c: [0.0; 3], dim: dim as u8 }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        match v.len() {
            2 => Point::new2(v[0], v[1]),
            3 => Point::new3(v[0], v[1], v[2]),
            _ => panic!("point dimension must be 2 or 3"),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.dim as usize]
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.c[i]
    }

    pub fn set_coord(&mut self, i: usize, v: f64) {
        self.c[i] = v;
    }

    pub fn add(&self, o: &Point) -> Point {
        debug_assert_eq!(self.dim, o.dim);
        Point {
            c: [self.c[0] + o.c[0], self.c[1] + o.c[1], self.c[2] + o.c[2]],
            dim: self.dim,
        }
    }

    pub fn sub(&self, o: &Point) -> Point {
        debug_assert_eq!(self.dim, o.dim);
        Point {
            c: [self.c[0] - o.c[0], self.c[1] - o.c[1], self.c[2] - o.c[2]],
            dim: self.dim,
        }
    }

    pub fn scale(&self, s: f64) -> Point {
        Point {
            c: [self.c[0] * s, self.c[1] * s, self.c[2] * s],
            dim: self.dim,
        }
    }

    pub fn dot(&self, o: &Point) -> f64 {
        debug_assert_eq!(self.dim, o.dim);
        self.c[0] * o.c[0] + self.c[1] * o.c[1] + self.c[2] * o.c[2]
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, o: &Point) -> f64 {
        self.sub(o).norm()
    }

    pub fn dist_sq(&self, o: &Point) -> f64 {
        self.sub(o).norm_sq()
    }

    /// Unit vector in the direction of `self`; zero vector is returned as-is.
    pub fn unit(&self) -> Point {
        let n = self.norm();
        if n == 0.0 {
            *self
        } else {
            self.scale(1.0 / n)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|v| v.is_finite())
    }

    /// Some unit vector orthogonal to `self` (deterministic choice).
    pub fn any_orthogonal(&self) -> Point {
        let u = self.unit();
        if self.dim == 2 {
            return Point::new2(-u.c[1], u.c[0]);
        }
        // pick the axis least aligned with u
        let ax = if u.c[0].abs() <= u.c[1].abs() && u.c[0].abs() <= u.c[2].abs() {
            Point::new3(1.0, 0.0, 0.0)
        } else if u.c[1].abs() <= u.c[2].abs() {
            Point::new3(0.0, 1.0, 0.0)
        } else {
            Point::new3(0.0, 0.0, 1.0)
        };
        ax.sub(&u.scale(ax.dot(&u))).unit()
    }
}

/// The computational domain `B(center, radius)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    center: Point,
    radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter("ball radius must be positive"));
        }
        if center.dim() != 2 && center.dim() != 3 {
            return Err(Error::InvalidParameter("ball dimension must be 2 or 3"));
        }
        Ok(Ball { center, radius })
    }

    /// Unit ball centered at the origin.
    pub fn unit(dim: usize) -> Self {
        Ball {
            center: Point::zero(dim),
            radius: 1.0,
        }
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Signed distance to the complement: positive inside, negative outside.
    pub fn boundary_distance(&self, p: &Point) -> f64 {
        self.radius - p.dist(&self.center)
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dist_sq(&self.center) < self.radius * self.radius
    }

    pub fn on_boundary(&self, p: &Point, tol: f64) -> bool {
        self.boundary_distance(p).abs() <= tol
    }

    /// Geometric tolerance used for "on the boundary" tests.
    pub fn boundary_tol(&self) -> f64 {
        1e-12 * self.radius
    }

    /// Inner domain `D_r`, the ball shrunk by `r`.
    pub fn inner(&self, r: f64) -> Result<Ball> {
        if r < 0.0 || r >= self.radius {
            return Err(Error::InvalidParameter("inner radius out of range"));
        }
        Ball::new(self.center, self.radius - r)
    }

    pub fn volume(&self) -> f64 {
        crate::math::unit_ball_volume(self.dim()) * self.radius.powi(self.dim() as i32)
    }

    pub fn surface_area(&self) -> f64 {
        crate::math::unit_sphere_area(self.dim()) * self.radius.powi(self.dim() as i32 - 1)
    }

    /// Radial projection onto the boundary sphere.
    pub fn project_boundary(&self, p: &Point) -> Point {
        let v = p.sub(&self.center);
        if v.norm() == 0.0 {
            // arbitrary but deterministic
            let mut e = Point::zero(self.dim());
            e.set_coord(0, 1.0);
            return self.center.add(&e.scale(self.radius));
        }
        self.center.add(&v.unit().scale(self.radius))
    }

    /// Uniform sample from the interior (rejection from the bounding cube).
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        loop {
            let mut p = Point::zero(self.dim());
            for i in 0..self.dim() {
                p.set_coord(i, rng.gen_range(-1.0..1.0));
            }
            if p.norm_sq() < 1.0 {
                return self.center.add(&p.scale(self.radius));
            }
        }
    }

    /// Uniform sample from the boundary sphere.
    pub fn sample_boundary<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        loop {
            let mut p = Point::zero(self.dim());
            for i in 0..self.dim() {
                p.set_coord(i, rng.gen_range(-1.0..1.0));
            }
            let n = p.norm();
            if n > 1e-3 && n < 1.0 {
                return self.center.add(&p.scale(self.radius / n));
            }
        }
    }
}
