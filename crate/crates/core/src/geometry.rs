//! Oriented 3D boxes in KITTI camera coordinates and exact 3D IoU.
//!
//! KITTI camera frame: `x` right, `y` down, `z` forward. A box's reference
//! point is the center of its bottom face, so the box spans `y - h ..= y`
//! vertically. Heading `theta` is a rotation about the `y` axis.
//!
//! Intersection volumes are computed by clipping the two bird's-eye-view
//! footprints (the `(x, z)` plane) against each other with Sutherland–Hodgman
//! and multiplying the shoelace area by the vertical overlap.

use std::cmp::Ordering;
use std::f64::consts::PI;

use smallvec::SmallVec;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("box field `{field}` is not finite ({value})")]
    NonFinite { field: &'static str, value: f64 },
    #[error("box dimension `{field}` must be positive, got {value}")]
    NonPositiveSize { field: &'static str, value: f64 },
    #[error("polygon is not convex")]
    NonConvex,
    #[error("polygon vertex is not finite")]
    NonFiniteVertex,
}

/// Wraps an angle into `(-π, π]`. Angles already in range are returned unchanged.
pub fn normalize_angle(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

/// A point in the bird's-eye-view plane; `u` is camera `x`, `v` is camera `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub u: f64,
    pub v: f64,
}

impl Point2 {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    fn sub(self, other: Point2) -> Point2 {
        Point2::new(self.u - other.u, self.v - other.v)
    }

    fn cross(self, other: Point2) -> f64 {
        self.u * other.v - self.v * other.u
    }

    fn total_cmp(&self, other: &Point2) -> Ordering {
        self.u
            .total_cmp(&other.u)
            .then_with(|| self.v.total_cmp(&other.v))
    }
}

type VertexBuf = SmallVec<[Point2; 16]>;

/// Convex polygon with counter-clockwise vertex order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polygon2D {
    vertices: SmallVec<[Point2; 8]>,
}

impl Polygon2D {
    /// Builds a convex polygon, reversing clockwise input so the signed area is
    /// non-negative. Fewer than three vertices yield a degenerate (zero-area)
    /// polygon, which is accepted.
    pub fn new(vertices: impl IntoIterator<Item = Point2>) -> Result<Self, GeometryError> {
        let mut vertices: SmallVec<[Point2; 8]> = vertices.into_iter().collect();
        if vertices
            .iter()
            .any(|p| !p.u.is_finite() || !p.v.is_finite())
        {
            return Err(GeometryError::NonFiniteVertex);
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        if !is_convex_ccw(&vertices) {
            return Err(GeometryError::NonConvex);
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned rectangle `[u0, u1] × [v0, v1]`.
    pub fn rectangle(u0: f64, v0: f64, u1: f64, v1: f64) -> Result<Self, GeometryError> {
        Self::new([
            Point2::new(u0, v0),
            Point2::new(u1, v0),
            Point2::new(u1, v1),
            Point2::new(u0, v1),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).max(0.0)
    }
}

fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..n {
        twice += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * twice
}

fn is_convex_ccw(vertices: &[Point2]) -> bool {
    let n = vertices.len();
    if n < 3 {
        return true;
    }
    // Allow collinear triples; reject any right turn beyond rounding noise.
    let scale = vertices
        .iter()
        .fold(1.0_f64, |m, p| m.max(p.u.abs()).max(p.v.abs()));
    let tol = 1e-12 * scale * scale;
    (0..n).all(|i| {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        b.sub(a).cross(c.sub(b)) >= -tol
    })
}

/// Clips `subject` against every edge of the convex counter-clockwise `clip`.
fn clip_convex(subject: &[Point2], clip: &[Point2]) -> VertexBuf {
    let mut output: VertexBuf = subject.iter().copied().collect();
    let mut input = VertexBuf::new();
    let m = clip.len();
    for k in 0..m {
        if output.is_empty() {
            break;
        }
        std::mem::swap(&mut input, &mut output);
        output.clear();
        let a = clip[k];
        let edge = clip[(k + 1) % m].sub(a);
        let n = input.len();
        let mut s = input[n - 1];
        let mut ds = edge.cross(s.sub(a));
        for &e in input.iter() {
            let de = edge.cross(e.sub(a));
            if de >= 0.0 {
                if ds < 0.0 {
                    output.push(intersect(s, e, ds, de));
                }
                output.push(e);
            } else if ds >= 0.0 {
                output.push(intersect(s, e, ds, de));
            }
            s = e;
            ds = de;
        }
    }
    output
}

// Exactly one of `ds`, `de` is negative, so `ds - de` is nonzero.
fn intersect(s: Point2, e: Point2, ds: f64, de: f64) -> Point2 {
    let t = ds / (ds - de);
    Point2::new(s.u + (e.u - s.u) * t, s.v + (e.v - s.v) * t)
}

fn cmp_vertex_lists(a: &[Point2], b: &[Point2]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(p, q)| p.total_cmp(q))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

fn intersection_area_slices(p: &[Point2], q: &[Point2]) -> f64 {
    if p.len() < 3 || q.len() < 3 {
        return 0.0;
    }
    // Canonical argument order makes the result bit-identical under swapping.
    let (subject, clip) = if cmp_vertex_lists(p, q) == Ordering::Greater {
        (q, p)
    } else {
        (p, q)
    };
    signed_area(&clip_convex(subject, clip)).max(0.0)
}

/// Area of the intersection of two convex counter-clockwise polygons.
pub fn convex_intersection_area(p: &Polygon2D, q: &Polygon2D) -> f64 {
    intersection_area_slices(&p.vertices, &q.vertices)
}

/// Oriented 3D bounding box in KITTI camera coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3D {
    x: f64,
    y: f64,
    z: f64,
    l: f64,
    w: f64,
    h: f64,
    theta: f64,
}

impl Box3D {
    /// Validates the box and normalizes `theta` into `(-π, π]`.
    pub fn new(
        x: f64,
        y: f64,
        z: f64,
        l: f64,
        w: f64,
        h: f64,
        theta: f64,
    ) -> Result<Self, GeometryError> {
        for (field, value) in [
            ("x", x),
            ("y", y),
            ("z", z),
            ("l", l),
            ("w", w),
            ("h", h),
            ("theta", theta),
        ] {
            if !value.is_finite() {
                return Err(GeometryError::NonFinite { field, value });
            }
        }
        for (field, value) in [("l", l), ("w", w), ("h", h)] {
            if value <= 0.0 {
                return Err(GeometryError::NonPositiveSize { field, value });
            }
        }
        Ok(Self {
            x,
            y,
            z,
            l,
            w,
            h,
            theta: normalize_angle(theta),
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }
    /// Extent along the heading direction.
    pub fn l(&self) -> f64 {
        self.l
    }
    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn volume(&self) -> f64 {
        self.l * self.w * self.h
    }

    /// Footprint corners in the `(x, z)` plane, counter-clockwise.
    pub fn bev_corners(&self) -> [Point2; 4] {
        let (s, c) = self.theta.sin_cos();
        let (hl, hw) = (0.5 * self.l, 0.5 * self.w);
        // Rotation about y: x' = c·dx + s·dz, z' = -s·dx + c·dz (det = +1).
        [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
            .map(|(dx, dz)| Point2::new(self.x + c * dx + s * dz, self.z - s * dx + c * dz))
    }

    fn field_cmp(&self, other: &Box3D) -> Ordering {
        [
            (self.x, other.x),
            (self.y, other.y),
            (self.z, other.z),
            (self.l, other.l),
            (self.w, other.w),
            (self.h, other.h),
            (self.theta, other.theta),
        ]
        .iter()
        .map(|(a, b)| a.total_cmp(b))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
    }
}

/// Footprint of `b` as a polygon.
pub fn bev_corners(b: &Box3D) -> Polygon2D {
    Polygon2D {
        vertices: b.bev_corners().into_iter().collect(),
    }
}

/// 3D intersection-over-union of two oriented boxes, in `[0, 1]`.
///
/// Boxes that only touch (zero-length vertical overlap or zero-area footprint
/// overlap) score 0. Identical boxes score exactly 1. The result is
/// bit-identical under argument swap.
pub fn iou3d(a: &Box3D, b: &Box3D) -> f64 {
    if a == b {
        return 1.0;
    }
    let (a, b) = if a.field_cmp(b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };

    let bottom = a.y.min(b.y);
    let top = (a.y - a.h).max(b.y - b.h);
    let overlap_h = bottom - top;
    if overlap_h <= 0.0 {
        return 0.0;
    }

    // Circumscribed circles apart ⇒ footprints apart.
    let (du, dv) = (a.x - b.x, a.z - b.z);
    let reach = 0.5 * (a.l.hypot(a.w) + b.l.hypot(b.w));
    if du * du + dv * dv > reach * reach {
        return 0.0;
    }

    let area = intersection_area_slices(&a.bev_corners(), &b.bev_corners());
    let inter = area * overlap_h;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.volume() + b.volume() - inter;
    (inter / union).clamp(0.0, 1.0)
}
