//! Landmark-driven face morphing.
//!
//! A morph at weight `alpha` interpolates the two landmark sets, triangulates
//! the interpolated set, warps both faces onto it with a piecewise-affine map
//! and blends the warped images pixel by pixel:
//!
//! ```text
//! I_alpha(p) = (1 - alpha) * I0(w0(p)) + alpha * I1(w1(p))
//! ```

use rayon::prelude::*;
use spade::{DelaunayTriangulation, HasPosition, Triangulation};

use crate::error::{Error, Result};
use crate::raster::{quantize_sample, LandmarkSet, Point2, Raster};

/// Morph weights used to build the reference morph database.
pub const REFERENCE_ALPHAS: [f64; 8] = [0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45];

/// Minimum triangle area (px²) kept in a mesh.
pub const MIN_TRIANGLE_AREA: f64 = 1e-9;

/// Points closer than this (px) are merged before triangulation.
pub const DEDUP_DISTANCE: f64 = 1e-6;

const INSIDE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorphSpec {
    pub alpha: f64,
    /// Blend only inside the convex hull of the face landmarks; outside it the
    /// warped first image is used alone.
    pub composite_inner_only: bool,
    /// Append frame corners and edge midpoints so the mesh covers the image.
    pub boundary_padding: bool,
    /// Permit `alpha` in `{0, 1}`; used to check the identity endpoints.
    pub allow_endpoints: bool,
}

impl MorphSpec {
    pub fn new(alpha: f64) -> Self {
        MorphSpec {
            alpha,
            composite_inner_only: false,
            boundary_padding: true,
            allow_endpoints: false,
        }
    }

    pub fn endpoint(alpha: f64) -> Self {
        MorphSpec {
            allow_endpoints: true,
            ..MorphSpec::new(alpha)
        }
    }

    pub fn inner_only(mut self, on: bool) -> Self {
        self.composite_inner_only = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.alpha;
        let ok = if self.allow_endpoints {
            (0.0..=1.0).contains(&a)
        } else {
            a > 0.0 && a < 1.0
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "alpha {a} outside {}",
                if self.allow_endpoints { "[0, 1]" } else { "(0, 1)" }
            )))
        }
    }
}

/// Rounds `alpha` onto the 2^-32 grid, where `1 - alpha` is exact and the
/// morph is bitwise symmetric under swapping the two faces.
pub fn snap_alpha(alpha: f64) -> f64 {
    const SCALE: f64 = 4_294_967_296.0;
    (alpha * SCALE).round() / SCALE
}

pub fn interpolate_landmarks(p0: &LandmarkSet, p1: &LandmarkSet, alpha: f64) -> Result<LandmarkSet> {
    if p0.len() != p1.len() {
        return Err(Error::LandmarkMismatch(format!(
            "{} vs {} points",
            p0.len(),
            p1.len()
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside [0, 1]")));
    }
    let w = 1.0 - alpha;
    let points = p0
        .points()
        .iter()
        .zip(p1.points())
        .map(|(a, b)| Point2::new(w * a.x + alpha * b.x, w * a.y + alpha * b.y))
        .collect();
    LandmarkSet::with_tags(points, p0.tags().to_vec())
}

/// The eight fixed frame anchors: corners, then edge midpoints.
pub fn frame_anchors(width: usize, height: usize) -> [Point2; 8] {
    let (r, b) = ((width - 1) as f64, (height - 1) as f64);
    let (cx, cy) = (r / 2.0, b / 2.0);
    [
        Point2::new(0.0, 0.0),
        Point2::new(r, 0.0),
        Point2::new(r, b),
        Point2::new(0.0, b),
        Point2::new(cx, 0.0),
        Point2::new(r, cy),
        Point2::new(cx, b),
        Point2::new(0.0, cy),
    ]
}

fn padded_points(set: &LandmarkSet, size: (usize, usize), padding: bool) -> Vec<Point2> {
    let mut pts = set.points().to_vec();
    if padding {
        pts.extend_from_slice(&frame_anchors(size.0, size.1));
    }
    pts
}

/// Triangle connectivity over a (possibly padded) landmark set.
///
/// Vertex indices refer to the landmark list with the frame anchors appended
/// when `padded` is set, so the same mesh indexes every geometry of a morph.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpMesh {
    triangles: Vec<[usize; 3]>,
    image_size: (usize, usize),
    padded: bool,
}

impl WarpMesh {
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn image_size(&self) -> (usize, usize) {
        self.image_size
    }

    pub fn is_padded(&self) -> bool {
        self.padded
    }

    fn vertices(&self, set: &LandmarkSet) -> Vec<Point2> {
        padded_points(set, self.image_size, self.padded)
    }
}

struct MeshVertex {
    pos: spade::Point2<f64>,
    index: usize,
}

impl HasPosition for MeshVertex {
    type Scalar = f64;

    fn position(&self) -> spade::Point2<f64> {
        self.pos
    }
}

fn signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Delaunay triangulation of `p_alpha` (plus frame anchors when `boundary_padding`).
pub fn build_mesh(
    p_alpha: &LandmarkSet,
    image_size: (usize, usize),
    boundary_padding: bool,
) -> Result<WarpMesh> {
    if image_size.0 == 0 || image_size.1 == 0 {
        return Err(Error::InvalidParameter("empty image size".into()));
    }
    let pts = padded_points(p_alpha, image_size, boundary_padding);

    let mut kept: Vec<usize> = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        if !kept.iter().any(|&k| pts[k].distance(*p) < DEDUP_DISTANCE) {
            kept.push(i);
        }
    }
    if kept.len() < 3 {
        return Err(Error::Degenerate(format!(
            "{} distinct points, need at least 3",
            kept.len()
        )));
    }

    let flush = |v: f64| if v.abs() < 1e-100 { 0.0 } else { v };
    let mut tri = DelaunayTriangulation::<MeshVertex>::new();
    for &i in &kept {
        tri.insert(MeshVertex {
            pos: spade::Point2::new(flush(pts[i].x), flush(pts[i].y)),
            index: i,
        })
        .map_err(|e| Error::Degenerate(format!("point {i}: {e:?}")))?;
    }

    let mut triangles = Vec::with_capacity(tri.num_inner_faces());
    for face in tri.inner_faces() {
        let [a, b, c] = face.vertices().map(|v| v.data().index);
        if signed_area(pts[a], pts[b], pts[c]).abs() > MIN_TRIANGLE_AREA {
            // rotate so the smallest index leads; orientation is preserved
            let t = [a, b, c];
            let k = (0..3).min_by_key(|&k| t[k]).unwrap_or(0);
            triangles.push([t[k], t[(k + 1) % 3], t[(k + 2) % 3]]);
        } else {
            log::debug!("dropping sliver triangle {a},{b},{c}");
        }
    }
    if triangles.is_empty() {
        return Err(Error::Degenerate("all points are collinear".into()));
    }
    // spade's face order depends only on insertion order; sort for a canonical mesh
    triangles.sort_unstable();
    Ok(WarpMesh {
        triangles,
        image_size,
        padded: boundary_padding,
    })
}

#[inline]
fn barycentric(a: Point2, b: Point2, c: Point2, p: Point2) -> [f64; 3] {
    let det = (b.y - c.y) * (a.x - c.x) + (c.x - b.x) * (a.y - c.y);
    let l0 = ((b.y - c.y) * (p.x - c.x) + (c.x - b.x) * (p.y - c.y)) / det;
    let l1 = ((c.y - a.y) * (p.x - c.x) + (a.x - c.x) * (p.y - c.y)) / det;
    [l0, l1, 1.0 - l0 - l1]
}

fn segment_distance(a: Point2, b: Point2, p: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.distance(Point2::new(a.x + t * dx, a.y + t * dy))
}

/// Piecewise-affine map from a destination geometry back to a source geometry.
struct PiecewiseAffine<'m> {
    triangles: &'m [[usize; 3]],
    dst: Vec<Point2>,
    /// Per-vertex displacement `src - dst`.
    shift: Vec<Point2>,
}

impl<'m> PiecewiseAffine<'m> {
    fn new(mesh: &'m WarpMesh, src: &LandmarkSet, dst: &LandmarkSet) -> Result<Self> {
        if src.len() != dst.len() {
            return Err(Error::LandmarkMismatch(format!(
                "{} source vs {} destination points",
                src.len(),
                dst.len()
            )));
        }
        let dst = mesh.vertices(dst);
        let src = mesh.vertices(src);
        if let Some(&[a, b, c]) = mesh.triangles.iter().find(|t| t.iter().any(|&i| i >= dst.len())) {
            return Err(Error::LandmarkMismatch(format!(
                "mesh references vertex {} but only {} exist",
                a.max(b).max(c),
                dst.len()
            )));
        }
        let inverted = mesh
            .triangles
            .iter()
            .filter(|&&[a, b, c]| {
                signed_area(src[a], src[b], src[c]) * signed_area(dst[a], dst[b], dst[c]) <= 0.0
            })
            .count();
        if inverted > 0 {
            log::warn!("{inverted} triangle(s) fold over in the source geometry");
        }
        let shift = src
            .iter()
            .zip(&dst)
            .map(|(s, d)| Point2::new(s.x - d.x, s.y - d.y))
            .collect();
        Ok(PiecewiseAffine {
            triangles: &mesh.triangles,
            dst,
            shift,
        })
    }

    #[inline]
    fn bary(&self, t: usize, p: Point2) -> [f64; 3] {
        let [a, b, c] = self.triangles[t];
        barycentric(self.dst[a], self.dst[b], self.dst[c], p)
    }

    fn contains(&self, t: usize, p: Point2) -> bool {
        self.bary(t, p).iter().all(|&l| l >= -INSIDE_EPS)
    }

    fn distance_to(&self, t: usize, p: Point2) -> f64 {
        if self.contains(t, p) {
            return 0.0;
        }
        let [a, b, c] = self.triangles[t].map(|i| self.dst[i]);
        segment_distance(a, b, p)
            .min(segment_distance(b, c, p))
            .min(segment_distance(c, a, p))
    }

    /// Containing triangle, or the nearest one for points outside the mesh.
    fn locate(&self, p: Point2) -> usize {
        if let Some(t) = (0..self.triangles.len()).find(|&t| self.contains(t, p)) {
            return t;
        }
        self.nearest(p)
    }

    fn nearest(&self, p: Point2) -> usize {
        let mut best = (f64::INFINITY, 0);
        for t in 0..self.triangles.len() {
            let d = self.distance_to(t, p);
            if d < best.0 {
                best = (d, t);
            }
        }
        best.1
    }

    /// Triangle index for every pixel centre of a `width` x `height` grid.
    fn pixel_lookup(&self, width: usize, height: usize) -> Vec<u32> {
        const UNSET: u32 = u32::MAX;
        let mut lookup = vec![UNSET; width * height];
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.triangles[t].map(|i| self.dst[i]);
            let x_lo = a.x.min(b.x).min(c.x).floor().max(0.0) as usize;
            let y_lo = a.y.min(b.y).min(c.y).floor().max(0.0) as usize;
            let x_hi = a.x.max(b.x).max(c.x).ceil().min((width - 1) as f64);
            let y_hi = a.y.max(b.y).max(c.y).ceil().min((height - 1) as f64);
            if x_hi < 0.0 || y_hi < 0.0 {
                continue;
            }
            for y in y_lo..=y_hi as usize {
                for x in x_lo..=x_hi as usize {
                    let slot = &mut lookup[y * width + x];
                    if *slot == UNSET && self.contains(t, Point2::new(x as f64, y as f64)) {
                        *slot = t as u32;
                    }
                }
            }
        }
        let missing: Vec<usize> = (0..lookup.len()).filter(|&i| lookup[i] == UNSET).collect();
        if !missing.is_empty() {
            log::debug!("{} pixel(s) outside the mesh, extending nearest triangle", missing.len());
            let nearest: Vec<(usize, u32)> = missing
                .par_iter()
                .map(|&i| {
                    let p = Point2::new((i % width) as f64, (i / width) as f64);
                    (i, self.nearest(p) as u32)
                })
                .collect();
            for (i, t) in nearest {
                lookup[i] = t;
            }
        }
        lookup
    }

    /// Maps `p` with the affine transform of triangle `t`.
    #[inline]
    fn map_with(&self, t: usize, p: Point2) -> Point2 {
        let [a, b, c] = self.triangles[t];
        let l = self.bary(t, p);
        let (sa, sb, sc) = (self.shift[a], self.shift[b], self.shift[c]);
        Point2::new(
            p.x + (l[0] * sa.x + l[1] * sb.x + l[2] * sc.x),
            p.y + (l[0] * sa.y + l[1] * sb.y + l[2] * sc.y),
        )
    }
}

/// Samples `img` at the source location that the mesh maps destination point `p` to.
///
/// Returns one bilinear sample per channel.
pub fn warp_sample(
    img: &Raster,
    mesh: &WarpMesh,
    src_pts: &LandmarkSet,
    dst_pts: &LandmarkSet,
    p: (f64, f64),
) -> Result<Vec<f64>> {
    let warp = PiecewiseAffine::new(mesh, src_pts, dst_pts)?;
    let p = Point2::new(p.0, p.1);
    let q = warp.map_with(warp.locate(p), p);
    Ok((0..img.channels())
        .map(|c| img.sample_bilinear(q.x, q.y, c))
        .collect())
}

fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point2, a: Point2, b: Point2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn inside_convex(hull: &[Point2], p: Point2) -> bool {
    if hull.len() < 3 {
        return false;
    }
    (0..hull.len()).all(|i| {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= -INSIDE_EPS
    })
}

/// Blends two aligned faces at weight `spec.alpha`.
pub fn morph(
    i0: &Raster,
    i1: &Raster,
    p0: &LandmarkSet,
    p1: &LandmarkSet,
    spec: &MorphSpec,
) -> Result<Raster> {
    spec.validate()?;
    if i0.dims() != i1.dims() || i0.channels() != i1.channels() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            i0.width(),
            i0.height(),
            i0.channels(),
            i1.width(),
            i1.height(),
            i1.channels()
        )));
    }
    let alpha = snap_alpha(spec.alpha);
    let p_alpha = interpolate_landmarks(p0, p1, alpha)?;
    let (width, height) = i0.dims();
    let mesh = build_mesh(&p_alpha, (width, height), spec.boundary_padding)?;
    let w0 = PiecewiseAffine::new(&mesh, p0, &p_alpha)?;
    let w1 = PiecewiseAffine::new(&mesh, p1, &p_alpha)?;
    let lookup = w0.pixel_lookup(width, height);
    let hull = spec
        .composite_inner_only
        .then(|| convex_hull(p_alpha.points()));

    let channels = i0.channels();
    let keep = 1.0 - alpha;
    let mut data = vec![0u8; width * height * channels];
    data.par_chunks_mut(width * channels)
        .enumerate()
        .for_each(|(y, row)| {
            for x in 0..width {
                let p = Point2::new(x as f64, y as f64);
                let t = lookup[y * width + x] as usize;
                let q0 = w0.map_with(t, p);
                let q1 = w1.map_with(t, p);
                let blend = hull.as_ref().is_none_or(|h| inside_convex(h, p));
                for c in 0..channels {
                    let s0 = i0.sample_bilinear(q0.x, q0.y, c);
                    let v = if blend {
                        keep * s0 + alpha * i1.sample_bilinear(q1.x, q1.y, c)
                    } else {
                        s0
                    };
                    row[x * channels + c] = quantize_sample(v);
                }
            }
        });
    Raster::new(width, height, channels, data)
}
