//! Star-shaped test boundaries, incident direction sets and sampling grids.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{EsmError, Result};

/// A point or vector in the plane.
pub type Point = [f64; 2];

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[inline]
pub fn unit(angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    [c, s]
}

/// Radial profile of a boundary `x(t) = r(t) (cos t, sin t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Disk,
    /// `r(t) = 1 + 0.3 cos(4t)`
    Star,
    /// `r(t) = 0.5 sqrt(3 cos^2 t + 1)`
    Peanut,
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Disk => "disk",
            Shape::Star => "star",
            Shape::Peanut => "peanut",
        }
    }

    /// `(r(t), r'(t))` of the unit-scale profile.
    fn radial(&self, t: f64) -> (f64, f64) {
        match self {
            Shape::Disk => (1.0, 0.0),
            Shape::Star => (1.0 + 0.3 * (4.0 * t).cos(), -1.2 * (4.0 * t).sin()),
            Shape::Peanut => {
                let (s, c) = t.sin_cos();
                let g = (3.0 * c * c + 1.0).sqrt();
                (0.5 * g, -1.5 * c * s / g)
            }
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = EsmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(Shape::Disk),
            "star" => Ok(Shape::Star),
            "peanut" => Ok(Shape::Peanut),
            other => Err(EsmError::invalid(format!(
                "unknown shape {other:?} (expected disk, star or peanut)"
            ))),
        }
    }
}

/// A closed, counter-clockwise parameterized boundary `center + scale * x(t)`.
///
/// For `Shape::Disk` the scale is the disk radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub shape: Shape,
    pub scale: f64,
    pub shift: Point,
}

/// Point on a boundary together with its derivative and outward unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub point: Point,
    pub tangent: Point,
    pub normal: Point,
}

impl Boundary {
    pub fn new(shape: Shape, scale: f64, shift: Point) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(EsmError::invalid(format!("boundary scale must be positive, got {scale}")));
        }
        Ok(Boundary { shape, scale, shift })
    }

    pub fn disk(radius: f64, center: Point) -> Result<Self> {
        Self::new(Shape::Disk, radius, center)
    }

    pub fn star(shift: Point) -> Self {
        Boundary { shape: Shape::Star, scale: 1.0, shift }
    }

    pub fn peanut(shift: Point) -> Self {
        Boundary { shape: Shape::Peanut, scale: 1.0, shift }
    }

    /// Center of the parameterization; the area centroid for the symmetric shapes here.
    pub fn center(&self) -> Point {
        self.shift
    }

    pub fn with_shift(&self, shift: Point) -> Self {
        Boundary { shift, ..*self }
    }

    /// Evaluate `x(t)`, `x'(t)` and the outward normal `rot(-90) x'(t) / |x'(t)|`.
    pub fn sample(&self, t: f64) -> BoundarySample {
        let (r, dr) = self.shape.radial(t);
        let (s, c) = t.sin_cos();
        let r = self.scale * r;
        let dr = self.scale * dr;
        let point = [self.shift[0] + r * c, self.shift[1] + r * s];
        let tangent = [dr * c - r * s, dr * s + r * c];
        let len = tangent[0].hypot(tangent[1]);
        let normal = [tangent[1] / len, -tangent[0] / len];
        BoundarySample { point, tangent, normal }
    }

    /// `(point, outward normal)` at parameter `t`.
    pub fn boundary_point(&self, t: f64) -> (Point, Point) {
        let s = self.sample(t);
        (s.point, s.normal)
    }

    /// Samples at `m` equispaced parameters `2 pi j / m`.
    pub fn samples(&self, m: usize) -> Vec<BoundarySample> {
        unit_circle_angles(m).into_iter().map(|t| self.sample(t)).collect()
    }

    /// Max pairwise distance over `m` equispaced boundary samples.
    pub fn diameter(&self, m: usize) -> f64 {
        let pts: Vec<Point> = self.samples(m.max(16)).iter().map(|s| s.point).collect();
        let mut best = 0.0f64;
        for (i, &a) in pts.iter().enumerate() {
            for &b in &pts[i + 1..] {
                best = best.max(dist(a, b));
            }
        }
        best
    }

    /// The same curve pulled toward its center by `tau`.
    pub fn scaled_about_center(&self, tau: f64) -> Boundary {
        Boundary { scale: self.scale * tau, ..*self }
    }

    /// Curve moved inward along the normal by `h`.
    pub fn inward_offset(&self, m: usize, h: f64) -> Vec<Point> {
        self.samples(m)
            .iter()
            .map(|s| [s.point[0] - h * s.normal[0], s.point[1] - h * s.normal[1]])
            .collect()
    }

    /// Strict interior test; every shape here is star-shaped about its center in polar form.
    pub fn contains(&self, p: Point) -> bool {
        let d = [p[0] - self.shift[0], p[1] - self.shift[1]];
        let (r, _) = self.shape.radial(d[1].atan2(d[0]));
        d[0].hypot(d[1]) < self.scale * r
    }
}

/// `N` equispaced angles `2 pi (i - 1) / N`, starting at 0.
pub fn unit_circle_angles(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

/// Distinct incident directions given by their angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    angles: Vec<f64>,
}

impl DirectionSet {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(EsmError::invalid("direction set is empty"));
        }
        let wrapped: Vec<f64> = angles.iter().map(|a| a.rem_euclid(TAU)).collect();
        for (i, a) in wrapped.iter().enumerate() {
            if !a.is_finite() {
                return Err(EsmError::invalid("direction angle is not finite"));
            }
            for b in &wrapped[i + 1..] {
                let gap = (a - b).abs();
                if gap.min(TAU - gap) < 1e-12 {
                    return Err(EsmError::invalid(format!(
                        "incident directions must be pairwise distinct (angle {a} repeated)"
                    )));
                }
            }
        }
        Ok(DirectionSet { angles: wrapped })
    }

    /// `{pi}`
    pub fn inc1() -> Self {
        DirectionSet { angles: vec![PI] }
    }

    /// `{pi/4, 3pi/4}`
    pub fn inc2() -> Self {
        DirectionSet { angles: vec![FRAC_PI_4, 3.0 * FRAC_PI_4] }
    }

    /// `{0, pi/2, pi, 3pi/2}`
    pub fn inc4() -> Self {
        DirectionSet { angles: vec![0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2] }
    }

    pub fn named(name: &str) -> Option<Self> {
        match name {
            "inc1" => Some(Self::inc1()),
            "inc2" => Some(Self::inc2()),
            "inc4" => Some(Self::inc4()),
            _ => None,
        }
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn vectors(&self) -> Vec<Point> {
        self.angles.iter().map(|&a| unit(a)).collect()
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// Equispaced rectangular grid; node `k = iy * nx + ix` (row-major, x fastest).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingGrid {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        SamplingGrid { x_range: [-4.0, 4.0], y_range: [-4.0, 4.0], nx: 100, ny: 100 }
    }
}

impl SamplingGrid {
    pub fn new(x_range: [f64; 2], y_range: [f64; 2], nx: usize, ny: usize) -> Result<Self> {
        let g = SamplingGrid { x_range, y_range, nx, ny };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(EsmError::invalid("sampling grid needs at least 2 nodes per axis"));
        }
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[1] > r[0];
        if !ok(self.x_range) || !ok(self.y_range) {
            return Err(EsmError::invalid("sampling grid ranges must be finite with lo < hi"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis(range: [f64; 2], n: usize, i: usize) -> f64 {
        range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        Self::axis(self.x_range, self.nx, ix)
    }

    pub fn y(&self, iy: usize) -> f64 {
        Self::axis(self.y_range, self.ny, iy)
    }

    pub fn node(&self, k: usize) -> Point {
        [self.x(k % self.nx), self.y(k / self.nx)]
    }

    pub fn nodes(&self) -> Vec<Point> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    /// Index of the node closest to `p`.
    pub fn nearest(&self, p: Point) -> usize {
        let fx = (p[0] - self.x_range[0]) / (self.x_range[1] - self.x_range[0]) * (self.nx - 1) as f64;
        let fy = (p[1] - self.y_range[0]) / (self.y_range[1] - self.y_range[0]) * (self.ny - 1) as f64;
        let ix = fx.round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let iy = fy.round().clamp(0.0, (self.ny - 1) as f64) as usize;
        iy * self.nx + ix
    }
}
