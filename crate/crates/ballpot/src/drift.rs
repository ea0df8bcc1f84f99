//! Drift fields and their Kato-class moduli.
//!
//! A field is admissible when its singular-weight local integrals
//! `sup_x int_{|x-z|<eps} |b(z)| |x-z|^(alpha-1-d) dz` vanish as `eps`
//! shrinks. The supremum is approximated over a point lattice covering
//! the twice-dilated domain ball; each lattice integral is evaluated in
//! polar coordinates with a substitution that renders the radial factor
//! polynomial.

use crate::error::{Error, Result};
use crate::geometry::{Ball, Point};
use crate::kernels::StableIndex;
use crate::math::{gauss_legendre, ls_slope, unit_sphere_area, FloatExt};
use crate::par::map_indexed;
use crate::quad::AngularRule;
use alloc::string::String;
use alloc::vec::Vec;

/// Shape of a drift field.
#[derive(Clone, Debug, PartialEq)]
pub enum DriftKind {
    Zero,
    /// Constant field along a fixed unit direction.
    Constant { direction: Point },
    /// Linear field `b(x) = strength * (x - origin)`.
    OrnsteinUhlenbeck { origin: Point },
    /// `|b(z)| = strength |z - center|^(-exponent)`, radially outward.
    RadialSingular { center: Point, exponent: f64 },
    /// Smooth rotational field `strength * (-x2, x1, 0)`.
    Rotation { origin: Point },
}

/// A vector field `b` with closed-form evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftField {
    pub kind: DriftKind,
    pub strength: f64,
    pub label: String,
    /// Evaluation support; the field vanishes outside it.
    pub support: Option<Ball>,
    dim: usize,
}

impl DriftField {
    pub fn zero(dim: usize) -> Self {
        DriftField {
            kind: DriftKind::Zero,
            strength: 0.0,
            label: String::from("zero"),
            support: None,
            dim,
        }
    }

    pub fn constant(direction: Point, strength: f64) -> Self {
        let dim = direction.dim();
        DriftField {
            kind: DriftKind::Constant {
                direction: direction.unit(),
            },
            strength,
            label: String::from("constant"),
            support: None,
            dim,
        }
    }

    pub fn ornstein_uhlenbeck(origin: Point, strength: f64) -> Self {
        let dim = origin.dim();
        DriftField {
            kind: DriftKind::OrnsteinUhlenbeck { origin },
            strength,
            label: String::from("ornstein-uhlenbeck"),
            support: None,
            dim,
        }
    }

    pub fn radial_singular(center: Point, exponent: f64, strength: f64) -> Result<Self> {
        if !(exponent > 0.0) || exponent >= center.dim() as f64 {
            return Err(Error::InvalidParameter(
                "radial-singular exponent must lie in (0, d)",
            ));
        }
        let dim = center.dim();
        Ok(DriftField {
            kind: DriftKind::RadialSingular { center, exponent },
            strength,
            label: String::from("radial-singular"),
            support: None,
            dim,
        })
    }

    pub fn rotation(origin: Point, strength: f64) -> Self {
        let dim = origin.dim();
        DriftField {
            kind: DriftKind::Rotation { origin },
            strength,
            label: String::from("custom-smooth"),
            support: None,
            dim,
        }
    }

    pub fn with_support(mut self, support: Ball) -> Self {
        self.support = Some(support);
        self
    }

    pub fn with_strength(mut self, strength: f64) -> Self {
        self.strength = strength;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, DriftKind::Zero) || self.strength == 0.0
    }

    /// Declared singular point, if any.
    pub fn singular_point(&self) -> Option<Point> {
        match &self.kind {
            DriftKind::RadialSingular { center, .. } => Some(*center),
            _ => None,
        }
    }

    pub fn eval(&self, p: &Point) -> Point {
        if let Some(sup) = &self.support {
            if !sup.contains(p) {
                return Point::zero(self.dim);
            }
        }
        match &self.kind {
            DriftKind::Zero => Point::zero(self.dim),
            DriftKind::Constant { direction } => direction.scale(self.strength),
            DriftKind::OrnsteinUhlenbeck { origin } => p.sub(origin).scale(self.strength),
            DriftKind::RadialSingular { center, exponent } => {
                let v = p.sub(center);
                let r = v.norm();
                if r == 0.0 {
                    return Point::zero(self.dim);
                }
                v.unit().scale(self.strength * r.powf(-*exponent))
            }
            DriftKind::Rotation { origin } => {
                let v = p.sub(origin);
                let mut out = Point::zero(self.dim);
                out.set_coord(0, -v.coord(1));
                out.set_coord(1, v.coord(0));
                out.scale(self.strength)
            }
        }
    }

    /// Catalogue lookup by the names exposed to configuration.
    pub fn by_name(name: &str, strength: f64, dim: usize) -> Option<Self> {
        let mut e1 = Point::zero(dim);
        e1.set_coord(0, 1.0);
        match name {
            "zero" => Some(DriftField::zero(dim)),
            "constant" => Some(DriftField::constant(e1, strength)),
            "ornstein-uhlenbeck" | "ou" => {
                Some(DriftField::ornstein_uhlenbeck(Point::zero(dim), strength))
            }
            "radial-singular" => {
                DriftField::radial_singular(Point::zero(dim), 0.3, strength).ok()
            }
            "custom-smooth" | "rotation" => Some(DriftField::rotation(Point::zero(dim), strength)),
            _ => None,
        }
    }

    pub fn catalogue() -> &'static [&'static str] {
        &[
            "zero",
            "constant",
            "ornstein-uhlenbeck",
            "radial-singular",
            "custom-smooth",
        ]
    }
}

/// One sample of the Kato modulus at a given radius.
#[derive(Clone, Copy, Debug)]
pub struct KatoModulus {
    pub epsilon: f64,
    pub value: f64,
    /// lattice points per radius used for the supremum
    pub sample_density: usize,
}

/// The singular-weight local integral at one center, in polar form:
/// `int_0^eps s^(alpha-2) (int |b(x + s w)| dw) ds`, with the substitution
/// `s = eps u^kappa` making the radial factor polynomial.
fn local_integral(
    b: &DriftField,
    x: &Point,
    eps: f64,
    idx: &StableIndex,
    angular: &AngularRule,
    n_radial: usize,
    kappa: f64,
) -> f64 {
    let (gu, gw) = gauss_legendre(n_radial);
    let mut total = 0.0;
    for k in 0..n_radial {
        let u = 0.5 * (gu[k] + 1.0);
        let wu = 0.5 * gw[k];
        let s = eps * u.powf(kappa);
        let ds = eps * kappa * u.powf(kappa - 1.0) * wu;
        let mut ang = 0.0;
        for (dir, w) in angular.dirs.iter().zip(&angular.weights) {
            ang += w * b.eval(&x.add(&dir.scale(s))).norm();
        }
        total += s.powf(idx.alpha() - 2.0) * ang * ds;
    }
    total
}

fn lattice_points(domain: &Ball, per_radius: usize, extra: &[Point]) -> Vec<Point> {
    let dim = domain.dim();
    let r = 2.0 * domain.radius();
    let h = domain.radius() / per_radius as f64;
    let n = (2.0 * r / h) as i64 + 1;
    let mut pts = Vec::new();
    let mut idx = alloc::vec![0i64; dim];
    loop {
        let mut p = Point::zero(dim);
        for (i, &k) in idx.iter().enumerate() {
            p.set_coord(i, -r + k as f64 * h);
        }
        if p.dist(&domain.center().sub(&domain.center())) <= r {
            pts.push(domain.center().add(&p));
        }
        // odometer increment
        let mut i = 0;
        loop {
            idx[i] += 1;
            if idx[i] < n {
                break;
            }
            idx[i] = 0;
            i += 1;
            if i == dim {
                return finish(pts, extra);
            }
        }
    }

    fn finish(mut pts: Vec<Point>, extra: &[Point]) -> Vec<Point> {
        pts.extend_from_slice(extra);
        pts
    }
}

/// Numerical supremum of the singular-weight integral over a lattice on
/// the twice-dilated domain ball.
///
/// The lattice doubles until the supremum moves by less than 1%.
/// A supremum that keeps growing under radial refinement means the field
/// is not integrable against the weight and is reported as such.
pub fn kato_modulus(
    b: &DriftField,
    epsilon: f64,
    idx: &StableIndex,
    domain: &Ball,
) -> Result<KatoModulus> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive"));
    }
    if b.is_zero() {
        return Ok(KatoModulus {
            epsilon,
            value: 0.0,
            sample_density: 0,
        });
    }
    // base radial transform: kappa = 1/(alpha-1) linearizes the weight;
    // a singular field steepens the integrand and gets a stronger grading.
    let base_kappa = (1.0 / (idx.alpha() - 1.0)).clamp(1.0, 8.0);
    let kappa = match &b.kind {
        DriftKind::RadialSingular { exponent, .. } => {
            let margin = idx.alpha() - 1.0 - *exponent;
            if margin > 1e-9 {
                (1.0 / margin).clamp(base_kappa, 24.0)
            } else {
                base_kappa.max(8.0)
            }
        }
        _ => base_kappa,
    };
    let angular = AngularRule::new(domain.dim(), if domain.dim() == 2 { 32 } else { 8 });
    let extra: Vec<Point> = b.singular_point().into_iter().collect();

    let sup_at = |per_radius: usize, n_radial: usize| -> f64 {
        let pts = lattice_points(domain, per_radius, &extra);
        let vals = map_indexed(pts.len(), |i| {
            local_integral(b, &pts[i], epsilon, idx, &angular, n_radial, kappa)
        });
        vals.into_iter().fold(0.0f64, f64::max)
    };

    // radial-refinement divergence probe at the worst point
    let coarse = sup_at(20, 24);
    let fine = sup_at(20, 48);
    let finer = sup_at(20, 96);
    let g1 = (fine - coarse) / coarse.abs().max(1e-300);
    let g2 = (finer - fine) / fine.abs().max(1e-300);
    if g1 > 0.02 && g2 > 0.02 && finer > fine && fine > coarse {
        return Err(Error::NotInKatoClass {
            last: finer,
            previous: fine,
        });
    }

    // lattice refinement until the sup settles
    let mut density = 20usize;
    let mut value = finer;
    for _ in 0..2 {
        let refined = sup_at(density * 2, 96);
        let change = (refined - value).abs() / value.abs().max(1e-300);
        value = value.max(refined);
        density *= 2;
        if change < 0.01 {
            break;
        }
    }
    Ok(KatoModulus {
        epsilon,
        value,
        sample_density: density,
    })
}

/// Moduli along a decreasing radius grid.
pub fn kato_decay_profile(
    b: &DriftField,
    idx: &StableIndex,
    domain: &Ball,
    eps_grid: &[f64],
) -> Result<Vec<KatoModulus>> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidParameter("empty epsilon grid"));
    }
    for w in eps_grid.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidParameter(
                "epsilon grid must be strictly decreasing",
            ));
        }
    }
    if !(eps_grid[eps_grid.len() - 1] > 0.0) {
        return Err(Error::InvalidParameter("epsilon grid must be positive"));
    }
    eps_grid
        .iter()
        .map(|&e| kato_modulus(b, e, idx, domain))
        .collect()
}

/// Log-log decay slope of a profile (close to `alpha - 1` for bounded
/// fields).
pub fn profile_slope(profile: &[KatoModulus]) -> f64 {
    let xs: Vec<f64> = profile.iter().map(|m| m.epsilon.ln()).collect();
    let ys: Vec<f64> = profile.iter().map(|m| m.value.max(1e-300).ln()).collect();
    ls_slope(&xs, &ys)
}

/// Quick admissibility screen used as the solver precondition: finite
/// moduli, non-increasing toward small radii, and visible decay.
pub fn admits_kato(b: &DriftField, idx: &StableIndex, domain: &Ball) -> Result<bool> {
    if b.is_zero() {
        return Ok(true);
    }
    let r = domain.radius();
    let grid = [0.2 * r, 0.1 * r, 0.05 * r];
    let profile = kato_decay_profile(b, idx, domain, &grid)?;
    let first = profile[0].value;
    let last = profile[profile.len() - 1].value;
    if first == 0.0 {
        return Ok(true);
    }
    for w in profile.windows(2) {
        if w[1].value > w[0].value * (1.0 + 1e-9) {
            return Ok(false);
        }
    }
    Ok(last <= 0.9 * first)
}
