//! Grids and weakly singular integration on balls.
//!
//! Volume rules are tensor products of a boundary-graded radial rule
//! (two-point Gauss panels) with a uniform angular rule (circle in the
//! plane, Gauss-Legendre-by-azimuth product on the sphere). Integrable
//! point singularities are handled by a smooth cutoff: the grid sum sees
//! `f (1 - chi)` and the removed neighborhood is integrated by a graded
//! polar sub-rule centered at the singular point.

pub mod gk;

use crate::error::{Error, Result};
use crate::geometry::{Ball, Point};
use crate::math::{gauss_legendre, unit_sphere_area, FloatExt};
use alloc::vec::Vec;
use core::f64::consts::PI;

// ---------------------------------------------------------------------------
// Cutoff and polar patches

/// Smooth cutoff: 1 for `s <= h/2`, 0 for `s >= h`, cubic in between.
pub(crate) fn cutoff(s: f64, h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    let t = ((2.0 * s - h) / h).clamp(0.0, 1.0);
    1.0 - t * t * (3.0 - 2.0 * t)
}

/// Parameters of the singular-point patches.
#[derive(Clone, Copy, Debug)]
pub struct PatchParams {
    /// Patch radius as a multiple of the local node spacing.
    pub factor: f64,
    /// Radial sub-rule size.
    pub radial_nodes: usize,
    /// Angular sub-rule size in the plane.
    pub angular_nodes: usize,
    /// Polar rings of the spherical sub-rule (azimuth count is twice this).
    pub polar_nodes_3d: usize,
    /// Radial grading exponent of the sub-rule.
    pub grading: f64,
    /// Hard cap on the patch radius as a fraction of the domain radius.
    pub max_radius_frac: f64,
}

impl Default for PatchParams {
    fn default() -> Self {
        PatchParams {
            factor: 2.5,
            radial_nodes: 24,
            angular_nodes: 32,
            polar_nodes_3d: 8,
            grading: 4.0,
            max_radius_frac: 0.35,
        }
    }
}

/// A point where an integrand is singular (or too sharp for the grid).
#[derive(Clone, Copy, Debug)]
pub struct SingularPoint {
    pub location: Point,
    /// Patch radius override; `None` uses the local grid spacing.
    pub radius: Option<f64>,
}

impl SingularPoint {
    pub fn at(location: Point) -> Self {
        SingularPoint { location, radius: None }
    }
}

/// Precomputed polar sub-rule around one singular point. Weights carry the
/// `s^(d-1)` Jacobian and the cutoff, so plain `sum w f(p)` integrates
/// `f * chi` over the patch disk.
pub(crate) struct Patch {
    pub center: Point,
    pub radius: f64,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

pub(crate) fn build_patch(center: &Point, h: f64, dim: usize, params: &PatchParams) -> Patch {
    let (gu, gw) = gauss_legendre(params.radial_nodes);
    let gamma = params.grading;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let dirs: Vec<(Point, f64)> = if dim == 2 {
        let n = params.angular_nodes.max(4) & !1; // even count for symmetry
        (0..n)
            .map(|j| {
                let th = 2.0 * PI * (j as f64 + 0.5) / n as f64;
                (Point::new2(th.cos(), th.sin()), 2.0 * PI / n as f64)
            })
            .collect()
    } else {
        let npol = params.polar_nodes_3d.max(2);
        let nphi = 2 * npol;
        let (nu, wu) = gauss_legendre(npol);
        let mut v = Vec::with_capacity(npol * nphi);
        for i in 0..npol {
            let u = nu[i];
            let su = (1.0 - u * u).sqrt();
            for j in 0..nphi {
                let ph = 2.0 * PI * (j as f64 + 0.5) / nphi as f64;
                v.push((
                    Point::new3(su * ph.cos(), su * ph.sin(), u),
                    wu[i] * 2.0 * PI / nphi as f64,
                ));
            }
        }
        v
    };
    for k in 0..params.radial_nodes {
        let u = 0.5 * (gu[k] + 1.0);
        let wu = 0.5 * gw[k];
        let s = h * u.powf(gamma);
        let ds = h * gamma * u.powf(gamma - 1.0) * wu;
        let jac = ds * s.powi(dim as i32 - 1) * cutoff(s, h);
        if jac == 0.0 {
            continue;
        }
        for (dir, wa) in &dirs {
            points.push(center.add(&dir.scale(s)));
            weights.push(jac * wa);
        }
    }
    Patch {
        center: *center,
        radius: h,
        points,
        weights,
    }
}

/// Resolve patch radii: default from local spacing, capped, and shrunk
/// pairwise so patches never overlap.
pub(crate) fn resolve_patch_radii(
    sing: &[SingularPoint],
    spacing: impl Fn(&Point) -> f64,
    domain_radius: f64,
    params: &PatchParams,
) -> Vec<f64> {
    let mut radii: Vec<f64> = sing
        .iter()
        .map(|s| {
            s.radius
                .unwrap_or(params.factor * spacing(&s.location))
                .min(params.max_radius_frac * domain_radius)
        })
        .collect();
    for i in 0..sing.len() {
        for j in (i + 1)..sing.len() {
            let sep = sing[i].location.dist(&sing[j].location);
            radii[i] = radii[i].min(0.45 * sep);
            radii[j] = radii[j].min(0.45 * sep);
        }
    }
    radii
}

// ---------------------------------------------------------------------------
// Angular rule shared by the grid types

/// Quadrature directions on the unit sphere `S^(d-1)`; weights sum to the
/// unit sphere area.
#[derive(Clone, Debug)]
pub(crate) struct AngularRule {
    pub dirs: Vec<Point>,
    pub weights: Vec<f64>,
    pub resolution: usize,
    pub n_phi: usize,
    pub dim: usize,
    rings_u: Vec<f64>,
}

impl AngularRule {
    pub fn new(dim: usize, resolution: usize) -> Self {
        if dim == 2 {
            let n = resolution.max(4);
            let dirs = (0..n)
                .map(|j| {
                    let th = 2.0 * PI * (j as f64 + 0.5) / n as f64;
                    Point::new2(th.cos(), th.sin())
                })
                .collect();
            AngularRule {
                dirs,
                weights: alloc::vec![2.0 * PI / n as f64; n],
                resolution: n,
                n_phi: n,
                dim,
                rings_u: Vec::new(),
            }
        } else {
            let npol = resolution.max(2);
            let nphi = 2 * npol;
            let (nu, wu) = gauss_legendre(npol);
            let mut dirs = Vec::with_capacity(npol * nphi);
            let mut weights = Vec::with_capacity(npol * nphi);
            for i in 0..npol {
                let u = nu[i];
                let su = (1.0 - u * u).sqrt();
                for j in 0..nphi {
                    let ph = 2.0 * PI * (j as f64 + 0.5) / nphi as f64;
                    dirs.push(Point::new3(su * ph.cos(), su * ph.sin(), u));
                    weights.push(wu[i] * 2.0 * PI / nphi as f64);
                }
            }
            AngularRule {
                dirs,
                weights,
                resolution: npol,
                n_phi: nphi,
                dim,
                rings_u: nu,
            }
        }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    /// Largest angular separation between neighboring directions.
    pub fn spacing(&self) -> f64 {
        if self.dim == 2 {
            2.0 * PI / self.resolution as f64
        } else {
            (2.0 * PI / self.n_phi as f64).max(PI / self.resolution as f64)
        }
    }

    pub fn nearest(&self, dir: &Point) -> usize {
        if self.dim == 2 {
            let th = dir.coord(1).atan2(dir.coord(0));
            let mut t = th / (2.0 * PI) * self.resolution as f64 - 0.5;
            t = t.round();
            let n = self.resolution as i64;
            (((t as i64 % n) + n) % n) as usize
        } else {
            let u = dir.coord(2) / dir.norm().max(1e-300);
            let mut best = 0;
            let mut bd = f64::INFINITY;
            for (i, &ru) in self.rings_u.iter().enumerate() {
                let d = (ru - u).abs();
                if d < bd {
                    bd = d;
                    best = i;
                }
            }
            let ph = dir.coord(1).atan2(dir.coord(0));
            let mut t = (ph / (2.0 * PI) * self.n_phi as f64 - 0.5).round();
            let n = self.n_phi as i64;
            t = (((t as i64 % n) + n) % n) as f64;
            best * self.n_phi + t as usize
        }
    }

    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        if self.dim == 2 {
            for i in 0..self.resolution {
                out.push((i, (i + 1) % self.resolution));
            }
        } else {
            for ring in 0..self.resolution {
                for j in 0..self.n_phi {
                    out.push((ring * self.n_phi + j, ring * self.n_phi + (j + 1) % self.n_phi));
                    if ring + 1 < self.resolution {
                        out.push((ring * self.n_phi + j, (ring + 1) * self.n_phi + j));
                    }
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Graded radial rule

/// Composite two-point Gauss rule with graded panel edges.
struct RadialRule {
    nodes: Vec<f64>,
    /// plain d-rho weights (no Jacobian)
    weights: Vec<f64>,
    /// width of the panel owning each node
    panel_width: Vec<f64>,
    edges: Vec<f64>,
}

impl RadialRule {
    /// Panels on `[a, b]`, graded toward `b` when `toward_end` (exponent
    /// `g >= 1`), toward `a` otherwise.
    fn graded(a: f64, b: f64, n_nodes: usize, g: f64, toward_end: bool) -> Self {
        let panels = (n_nodes / 2).max(1);
        let mut edges = Vec::with_capacity(panels + 1);
        for k in 0..=panels {
            let t = k as f64 / panels as f64;
            let e = if toward_end {
                a + (b - a) * (1.0 - (1.0 - t).powf(g))
            } else {
                a + (b - a) * t.powf(g)
            };
            edges.push(e);
        }
        if !toward_end {
            // grading toward a produces increasing edges already
        }
        let gl = 1.0 / 3.0f64.sqrt();
        let mut nodes = Vec::with_capacity(2 * panels);
        let mut weights = Vec::with_capacity(2 * panels);
        let mut panel_width = Vec::with_capacity(2 * panels);
        for k in 0..panels {
            let c = 0.5 * (edges[k] + edges[k + 1]);
            let h = 0.5 * (edges[k + 1] - edges[k]);
            for s in [-gl, gl] {
                nodes.push(c + h * s);
                weights.push(h);
                panel_width.push(2.0 * h);
            }
        }
        RadialRule {
            nodes,
            weights,
            panel_width,
            edges,
        }
    }

    fn panel_width_at(&self, rho: f64) -> f64 {
        match self
            .edges
            .windows(2)
            .position(|w| rho >= w[0] && rho <= w[1])
        {
            Some(k) => self.edges[k + 1] - self.edges[k],
            None => {
                if rho < self.edges[0] {
                    self.edges[1] - self.edges[0]
                } else {
                    let n = self.edges.len();
                    self.edges[n - 1] - self.edges[n - 2]
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Volume grid

/// Quadrature nodes and weights covering the ball interior.
#[derive(Clone, Debug)]
pub struct VolumeGrid {
    ball: Ball,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    grading: f64,
    n_radial: usize,
    n_angular: usize,
    radial_nodes: Vec<f64>,
    radial_panel: Vec<f64>,
    radial_edges: Vec<f64>,
    angular: AngularRule,
}

impl VolumeGrid {
    /// `n_radial` radial nodes (graded toward the boundary with the given
    /// exponent, `2/alpha` by default in callers) times the angular rule
    /// of the stated resolution (`n_angular` circle points in the plane,
    /// `n_angular` polar rings on the sphere).
    pub fn new(ball: &Ball, n_radial: usize, n_angular: usize, grading: f64) -> Self {
        let d = ball.dim();
        let radial = RadialRule::graded(0.0, ball.radius(), n_radial.max(2), grading, true);
        let angular = AngularRule::new(d, n_angular);
        let mut nodes = Vec::with_capacity(radial.nodes.len() * angular.len());
        let mut weights = Vec::with_capacity(radial.nodes.len() * angular.len());
        for (i, &rho) in radial.nodes.iter().enumerate() {
            let wr = radial.weights[i] * rho.powi(d as i32 - 1);
            for (j, dir) in angular.dirs.iter().enumerate() {
                nodes.push(ball.center().add(&dir.scale(rho)));
                weights.push(wr * angular.weights[j]);
            }
        }
        VolumeGrid {
            ball: *ball,
            nodes,
            weights,
            grading,
            n_radial: n_radial.max(2),
            n_angular,
            radial_nodes: radial.nodes,
            radial_panel: radial.panel_width,
            radial_edges: radial.edges,
            angular,
        }
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.n_radial, self.n_angular)
    }

    /// Same ball, twice the resolution in every direction.
    pub fn doubled(&self) -> Self {
        VolumeGrid::new(&self.ball, 2 * self.n_radial, 2 * self.n_angular, self.grading)
    }

    /// Local cell extent (max of radial panel width and angular arc) near `p`.
    pub fn local_spacing(&self, p: &Point) -> f64 {
        let rho = p.dist(&self.ball.center()).min(self.ball.radius());
        let pw = self.panel_width_at(rho);
        pw.max(rho * self.angular.spacing())
    }

    fn panel_width_at(&self, rho: f64) -> f64 {
        match self
            .radial_edges
            .windows(2)
            .position(|w| rho >= w[0] && rho <= w[1])
        {
            Some(k) => self.radial_edges[k + 1] - self.radial_edges[k],
            None => self.radial_edges[1] - self.radial_edges[0],
        }
    }

    /// Index of the node nearest to `p` (structured lookup).
    pub fn nearest(&self, p: &Point) -> usize {
        let v = p.sub(&self.ball.center());
        let rho = v.norm();
        let mut best_i = 0;
        let mut bd = f64::INFINITY;
        for (i, &rn) in self.radial_nodes.iter().enumerate() {
            let d = (rn - rho).abs();
            if d < bd {
                bd = d;
                best_i = i;
            }
        }
        let j = if rho == 0.0 { 0 } else { self.angular.nearest(&v) };
        best_i * self.angular.len() + j
    }
}

// ---------------------------------------------------------------------------
// Sphere grid

/// Quadrature nodes on the boundary sphere; weights sum to the surface
/// area within round-off.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    ball: Ball,
    angular: AngularRule,
    nodes: Vec<Point>,
    weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(ball: &Ball, resolution: usize) -> Self {
        let angular = AngularRule::new(ball.dim(), resolution);
        let scale = ball.radius().powi(ball.dim() as i32 - 1);
        let nodes = angular
            .dirs
            .iter()
            .map(|d| ball.center().add(&d.scale(ball.radius())))
            .collect();
        let weights = angular.weights.iter().map(|w| w * scale).collect();
        SphereGrid {
            ball: *ball,
            angular,
            nodes,
            weights,
        }
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn resolution(&self) -> usize {
        self.angular.resolution
    }

    pub fn refined(&self) -> Self {
        SphereGrid::new(&self.ball, 2 * self.angular.resolution)
    }

    /// Largest angular gap between neighboring nodes.
    pub fn angular_spacing(&self) -> f64 {
        self.angular.spacing()
    }

    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        self.angular.adjacent_pairs()
    }

    pub fn nearest(&self, p: &Point) -> usize {
        self.angular.nearest(&p.sub(&self.ball.center()))
    }
}

// ---------------------------------------------------------------------------
// Exterior grid

/// Parameters of the exterior (complement-of-the-ball) rule.
#[derive(Clone, Copy, Debug)]
pub struct ExteriorParams {
    /// Radial nodes in the near zone `[r, 2r]`, graded toward the sphere.
    pub n_inner: usize,
    /// Radial nodes in the far zone `[2r, r_cut]`, geometrically spaced.
    pub n_outer: usize,
    pub n_angular: usize,
    /// Truncation radius as a multiple of the ball radius.
    pub r_cut_factor: f64,
    /// Grading exponent toward the sphere (`2/(2-alpha)` resolves the
    /// exit-density edge singularity).
    pub inner_grading: f64,
    /// Far-field decay exponent of the integrands (`d + alpha`); drives
    /// the analytic tail correction.
    pub decay_exponent: f64,
    pub tail_correction: bool,
}

impl ExteriorParams {
    pub fn for_alpha(alpha: f64, dim: usize) -> Self {
        ExteriorParams {
            n_inner: 32,
            n_outer: 24,
            n_angular: if dim == 2 { 64 } else { 16 },
            r_cut_factor: 10.0,
            inner_grading: 2.0 / (2.0 - alpha).max(0.05),
            decay_exponent: dim as f64 + alpha,
            tail_correction: true,
        }
    }
}

/// Radial shells times angular nodes covering `B(c, r_cut) \ closure(B)`.
#[derive(Clone, Debug)]
pub struct ExteriorGrid {
    ball: Ball,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    angular: AngularRule,
    radial_nodes: Vec<f64>,
    r_cut: f64,
    decay_exponent: f64,
    tail_correction: bool,
    max_panel: f64,
}

impl ExteriorGrid {
    pub fn new(ball: &Ball, params: &ExteriorParams) -> Self {
        let d = ball.dim();
        let r = ball.radius();
        let r_cut = params.r_cut_factor * r;
        let near = RadialRule::graded(r, (2.0 * r).min(r_cut), params.n_inner.max(2), params.inner_grading, false);
        let mut radial_nodes = near.nodes.clone();
        let mut radial_weights = near.weights.clone();
        let mut max_panel = near
            .panel_width
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        if r_cut > 2.0 * r {
            let panels = (params.n_outer / 2).max(1);
            let q = (r_cut / (2.0 * r)).powf(1.0 / panels as f64);
            let gl = 1.0 / 3.0f64.sqrt();
            let mut lo = 2.0 * r;
            for _ in 0..panels {
                let hi = lo * q;
                let c = 0.5 * (lo + hi);
                let h = 0.5 * (hi - lo);
                for s in [-gl, gl] {
                    radial_nodes.push(c + h * s);
                    radial_weights.push(h);
                }
                max_panel = max_panel.max(2.0 * h);
                lo = hi;
            }
        }
        let angular = AngularRule::new(d, params.n_angular);
        let mut nodes = Vec::with_capacity(radial_nodes.len() * angular.len());
        let mut weights = Vec::with_capacity(radial_nodes.len() * angular.len());
        for (i, &rho) in radial_nodes.iter().enumerate() {
            let wr = radial_weights[i] * rho.powi(d as i32 - 1);
            for (j, dir) in angular.dirs.iter().enumerate() {
                nodes.push(ball.center().add(&dir.scale(rho)));
                weights.push(wr * angular.weights[j]);
            }
        }
        ExteriorGrid {
            ball: *ball,
            nodes,
            weights,
            angular,
            radial_nodes,
            r_cut,
            decay_exponent: params.decay_exponent,
            tail_correction: params.tail_correction,
            max_panel,
        }
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn r_cut(&self) -> f64 {
        self.r_cut
    }

    pub fn tail_correction(&self) -> bool {
        self.tail_correction
    }

    pub fn local_spacing(&self, p: &Point) -> f64 {
        let rho = p.dist(&self.ball.center());
        self.max_panel
            .min(0.5 * self.ball.radius())
            .max(rho.min(2.0 * self.ball.radius()) * self.angular.spacing())
    }

    /// Analytic tail of `int f` beyond `r_cut`, assuming the stated decay.
    fn tail_estimate(&self, f: &dyn Fn(&Point) -> f64) -> f64 {
        let n_ang = self.angular.len();
        let n_rad = self.radial_nodes.len();
        let rho_star = self.radial_nodes[n_rad - 1];
        let mut tail = 0.0;
        for j in 0..n_ang {
            let node = &self.nodes[(n_rad - 1) * n_ang + j];
            let c = f(node) * rho_star.powf(self.decay_exponent);
            tail += self.angular.weights[j] * c;
        }
        let a = self.decay_exponent - self.ball.dim() as f64;
        tail * self.r_cut.powf(-a) / a
    }
}

// ---------------------------------------------------------------------------
// Integration drivers

fn masked_sum(
    f: &dyn Fn(&Point) -> f64,
    nodes: &[Point],
    weights: &[f64],
    patches: &[Patch],
) -> f64 {
    let mut total = 0.0;
    'outer: for (node, w) in nodes.iter().zip(weights) {
        let mut mask = 1.0;
        for p in patches {
            let s = node.dist(&p.center);
            if s < p.radius {
                let c = cutoff(s, p.radius);
                if c >= 1.0 {
                    continue 'outer;
                }
                mask *= 1.0 - c;
            }
        }
        total += w * mask * f(node);
    }
    for p in patches {
        for (pt, w) in p.points.iter().zip(&p.weights) {
            total += w * f(pt);
        }
    }
    total
}

/// Integral of `f` over the ball interior. `f` must return finite values
/// on the grid nodes away from the declared singular points and `0`
/// outside its own support.
pub fn integrate_volume(
    f: impl Fn(&Point) -> f64,
    grid: &VolumeGrid,
    sing: &[SingularPoint],
    params: &PatchParams,
) -> f64 {
    let radii = resolve_patch_radii(sing, |p| grid.local_spacing(p), grid.ball().radius(), params);
    let patches: Vec<Patch> = sing
        .iter()
        .zip(&radii)
        .map(|(s, &h)| build_patch(&s.location, h, grid.ball().dim(), params))
        .collect();
    masked_sum(&f, grid.nodes(), grid.weights(), &patches)
}

/// [`integrate_volume`] with refinement control: doubles the grid until
/// the value moves less than `rel_tol`, or reports the last two values.
pub fn integrate_volume_converged(
    f: impl Fn(&Point) -> f64,
    grid: &VolumeGrid,
    sing: &[SingularPoint],
    params: &PatchParams,
    rel_tol: f64,
    max_doublings: usize,
) -> Result<(f64, Vec<f64>)> {
    let mut g = grid.clone();
    let mut history = Vec::new();
    let mut prev = integrate_volume(&f, &g, sing, params);
    history.push(prev);
    for _ in 0..max_doublings {
        g = g.doubled();
        let next = integrate_volume(&f, &g, sing, params);
        history.push(next);
        if (next - prev).abs() <= rel_tol * next.abs().max(1e-300) {
            return Ok((next, history));
        }
        prev = next;
    }
    let n = history.len();
    Err(Error::QuadratureFailure {
        last: history[n - 1],
        previous: history[n - 2],
    })
}

/// Integral of `f` over the exterior region, with the analytic far-field
/// tail correction when the grid carries one.
pub fn integrate_exterior(
    f: impl Fn(&Point) -> f64,
    grid: &ExteriorGrid,
    sing: &[SingularPoint],
    params: &PatchParams,
) -> f64 {
    let radii = resolve_patch_radii(sing, |p| grid.local_spacing(p), grid.ball().radius(), params);
    let patches: Vec<Patch> = sing
        .iter()
        .zip(&radii)
        .map(|(s, &h)| build_patch(&s.location, h, grid.ball().dim(), params))
        .collect();
    let mut total = masked_sum(&f, grid.nodes(), grid.weights(), &patches);
    if grid.tail_correction {
        total += grid.tail_estimate(&|p| f(p));
    }
    total
}

/// Integral of `f` over the boundary sphere.
pub fn integrate_sphere(f: impl Fn(&Point) -> f64, grid: &SphereGrid) -> f64 {
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .map(|(n, w)| w * f(n))
        .sum()
}

/// Parameters of the focused boundary rule used when an integrand peaks
/// sharply at a known boundary point.
#[derive(Clone, Copy, Debug)]
pub struct CapParams {
    /// Cap half-angle as a multiple of the grid spacing.
    pub factor: f64,
    /// Graded nodes in the polar angle from the focus.
    pub radial_nodes: usize,
    /// Azimuth nodes of the spherical cap rule.
    pub angular_nodes: usize,
    pub grading: f64,
}

impl Default for CapParams {
    fn default() -> Self {
        CapParams {
            factor: 4.0,
            radial_nodes: 32,
            angular_nodes: 16,
            grading: 4.0,
        }
    }
}

/// Sphere integral with local refinement around `focus` (a boundary
/// point): the base rule sees `f (1 - chi)` and a graded cap rule around
/// the focus integrates the peak.
pub fn integrate_sphere_focused(
    f: impl Fn(&Point) -> f64,
    grid: &SphereGrid,
    focus: &Point,
    cap: &CapParams,
) -> f64 {
    let ball = grid.ball();
    let r = ball.radius();
    let nf = focus.sub(&ball.center()).unit();
    let theta_c = (cap.factor * grid.angular_spacing()).min(1.2);
    // base rule, cutoff in angle from the focus
    let mut total = 0.0;
    for (node, w) in grid.nodes().iter().zip(grid.weights()) {
        let u = node.sub(&ball.center()).unit().dot(&nf).clamp(-1.0, 1.0);
        let th = u.acos();
        total += w * (1.0 - cutoff(th, theta_c)) * f(node);
    }
    // cap rule: polar angle graded toward the focus
    let (gu, gw) = gauss_legendre(cap.radial_nodes);
    let scale = r.powi(ball.dim() as i32 - 1);
    if ball.dim() == 2 {
        let t = nf.any_orthogonal();
        for k in 0..cap.radial_nodes {
            let u = 0.5 * (gu[k] + 1.0);
            let wu = 0.5 * gw[k];
            let th = theta_c * u.powf(cap.grading);
            let dth = theta_c * cap.grading * u.powf(cap.grading - 1.0) * wu;
            let c = cutoff(th, theta_c);
            if c == 0.0 {
                continue;
            }
            for s in [-1.0, 1.0] {
                let dir = nf.scale(th.cos()).add(&t.scale(s * th.sin()));
                let node = ball.center().add(&dir.scale(r));
                total += scale * dth * c * f(&node);
            }
        }
    } else {
        let t1 = nf.any_orthogonal();
        let t2 = Point::new3(
            nf.coord(1) * t1.coord(2) - nf.coord(2) * t1.coord(1),
            nf.coord(2) * t1.coord(0) - nf.coord(0) * t1.coord(2),
            nf.coord(0) * t1.coord(1) - nf.coord(1) * t1.coord(0),
        );
        let nphi = cap.angular_nodes.max(8);
        for k in 0..cap.radial_nodes {
            let u = 0.5 * (gu[k] + 1.0);
            let wu = 0.5 * gw[k];
            let th = theta_c * u.powf(cap.grading);
            let dth = theta_c * cap.grading * u.powf(cap.grading - 1.0) * wu;
            let c = cutoff(th, theta_c);
            if c == 0.0 {
                continue;
            }
            for j in 0..nphi {
                let ph = 2.0 * PI * (j as f64 + 0.5) / nphi as f64;
                let dir = nf
                    .scale(th.cos())
                    .add(&t1.scale(th.sin() * ph.cos()))
                    .add(&t2.scale(th.sin() * ph.sin()));
                let node = ball.center().add(&dir.scale(r));
                total += scale * dth * th.sin() * (2.0 * PI / nphi as f64) * c * f(&node);
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::unit_ball_volume;

    #[test]
    fn volume_weights_sum_to_ball_volume() {
        for dim in [2usize, 3] {
            let ball = Ball::new(Point::zero(dim), 1.4).unwrap();
            let grid = VolumeGrid::new(&ball, 16, if dim == 2 { 32 } else { 8 }, 1.4);
            let total: f64 = grid.weights().iter().sum();
            let vol = unit_ball_volume(dim) * 1.4f64.powi(dim as i32);
            assert!(
                ((total - vol) / vol).abs() < 1e-12,
                "dim {dim}: {total} vs {vol}"
            );
            assert!(grid
                .nodes()
                .iter()
                .all(|n| ball.boundary_distance(n) > 0.0));
        }
    }

    #[test]
    fn sphere_weights_sum_to_surface_area() {
        for dim in [2usize, 3] {
            let ball = Ball::new(Point::zero(dim), 2.0).unwrap();
            let grid = SphereGrid::new(&ball, if dim == 2 { 64 } else { 12 });
            let total: f64 = grid.weights().iter().sum();
            let area = unit_sphere_area(dim) * 2.0f64.powi(dim as i32 - 1);
            assert!(((total - area) / area).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_integrates_to_volume_d3() {
        let ball = Ball::unit(3);
        let grid = VolumeGrid::new(&ball, 16, 8, 1.0);
        let v = integrate_volume(|_| 1.0, &grid, &[], &PatchParams::default());
        let expect = 4.0 * PI / 3.0;
        assert!(((v - expect) / expect).abs() < 1e-6);
    }

    #[test]
    fn radial_power_with_center_singularity() {
        // int_B |z|^(alpha-d) dz = sigma_{d-1}/alpha
        for (dim, n_ang) in [(2usize, 48), (3usize, 12)] {
            let alpha = 1.5;
            let ball = Ball::unit(dim);
            let grid = VolumeGrid::new(&ball, 32, n_ang, 2.0 / alpha);
            let f = move |p: &Point| {
                let r = p.norm();
                if r == 0.0 {
                    0.0
                } else {
                    r.powf(alpha - dim as f64)
                }
            };
            let v = integrate_volume(
                f,
                &grid,
                &[SingularPoint::at(Point::zero(dim))],
                &PatchParams::default(),
            );
            let expect = unit_sphere_area(dim) / alpha;
            assert!(
                ((v - expect) / expect).abs() < 1e-4,
                "dim {dim}: {v} vs {expect}"
            );
        }
    }

    #[test]
    fn nearest_node_lookup_matches_linear_scan() {
        let ball = Ball::new(Point::new2(0.5, -0.25), 2.0).unwrap();
        let grid = VolumeGrid::new(&ball, 12, 24, 1.3);
        let mut rng = <rand_chacha::ChaCha12Rng as rand::SeedableRng>::seed_from_u64(2);
        for _ in 0..200 {
            let p = ball.sample_interior(&mut rng);
            let fast = grid.nearest(&p);
            let slow = grid
                .nodes()
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    a.1.dist(&p)
                        .partial_cmp(&b.1.dist(&p))
                        .unwrap()
                })
                .unwrap()
                .0;
            let df = grid.nodes()[fast].dist(&p);
            let ds = grid.nodes()[slow].dist(&p);
            assert!(df <= ds * (1.0 + 1e-9) + 1e-12, "{df} vs {ds}");
        }
    }

    #[test]
    fn exterior_grid_covers_annulus_measure() {
        let ball = Ball::unit(2);
        let mut params = ExteriorParams::for_alpha(1.5, 2);
        params.tail_correction = false;
        let grid = ExteriorGrid::new(&ball, &params);
        // integrate 1 over the annulus [1, r_cut]
        let v = integrate_exterior(|_| 1.0, &grid, &[], &PatchParams::default());
        let expect = PI * (grid.r_cut() * grid.r_cut() - 1.0);
        assert!(((v - expect) / expect).abs() < 1e-10, "{v} vs {expect}");
    }

    #[test]
    fn focused_sphere_rule_keeps_total_mass() {
        // smooth integrand: focused and plain rules must agree
        let ball = Ball::unit(2);
        let grid = SphereGrid::new(&ball, 64);
        let f = |p: &Point| 1.0 + p.coord(0) * p.coord(0);
        let plain = integrate_sphere(f, &grid);
        let focus = Point::new2(1.0, 0.0);
        let focused = integrate_sphere_focused(f, &grid, &focus, &CapParams::default());
        assert!(((plain - focused) / plain).abs() < 1e-6);
        // exact value: int (1 + cos^2) = 2pi + pi
        assert!(((plain - 3.0 * PI) / (3.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn focused_sphere_rule_d3_smooth() {
        let ball = Ball::unit(3);
        let grid = SphereGrid::new(&ball, 12);
        let f = |p: &Point| 1.0 + p.coord(2) * p.coord(2);
        let plain = integrate_sphere(f, &grid);
        let focus = Point::new3(0.0, 0.0, 1.0);
        let focused = integrate_sphere_focused(f, &grid, &focus, &CapParams::default());
        assert!(((plain - focused) / plain).abs() < 2e-4);
        let expect = 4.0 * PI + 4.0 * PI / 3.0;
        assert!(((plain - expect) / expect).abs() < 1e-12);
    }
}
