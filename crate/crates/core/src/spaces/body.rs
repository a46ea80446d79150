use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::norm::{norm_eval, Functional, NormTag};
use crate::error::{Error, Result};
use crate::numerics::lp::{lp_solve, LpProblem, Sense};
use crate::numerics::polytope::{extreme_points, hrep_vertices, hull_distance, vrep_facets, HRep, DEFAULT_BUDGET};

/// Default membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Largest dimension for which the vertices of an `ℓ∞` ball are listed.
const MAX_CUBE_DIM: usize = 14;

/// A closed, bounded, nonempty convex set in `ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConvexBody {
    /// `{x : ‖x‖_norm ≤ radius}`; a `dim` of 0 in JSON is filled in from the operator.
    LpBall {
        norm: NormTag,
        radius: f64,
        #[serde(default)]
        dim: usize,
    },
    #[serde(rename = "vpolytope")]
    VPolytope {
        #[serde(with = "crate::serde_util::dvec_list")]
        vertices: Vec<DVector<f64>>,
    },
    /// `{x : a x ≤ b}`.
    #[serde(rename = "hpolytope")]
    HPolytope {
        #[serde(with = "crate::serde_util::dmat")]
        a: DMatrix<f64>,
        #[serde(with = "crate::serde_util::dvec")]
        b: DVector<f64>,
    },
    /// `{x ≥ 0 : Σx ≤ 1}`.
    Simplex { dim: usize },
    Shifted {
        inner: Box<ConvexBody>,
        #[serde(with = "crate::serde_util::dvec")]
        offset: DVector<f64>,
    },
}

/// A body reduced to one of the two shapes the solvers work with.
#[derive(Debug, Clone)]
pub enum Shape {
    Polytope(Vec<DVector<f64>>),
    /// Euclidean ball.
    Ball { center: DVector<f64>, radius: f64 },
}

impl ConvexBody {
    pub fn lp_ball(norm: NormTag, radius: f64, dim: usize) -> Self {
        ConvexBody::LpBall { norm, radius, dim }
    }

    pub fn simplex(dim: usize) -> Self {
        ConvexBody::Simplex { dim }
    }

    pub fn vpolytope(vertices: Vec<DVector<f64>>) -> Self {
        ConvexBody::VPolytope { vertices }
    }

    pub fn shifted(self, offset: DVector<f64>) -> Self {
        ConvexBody::Shifted {
            inner: Box::new(self),
            offset,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::LpBall { dim, .. } => *dim,
            ConvexBody::VPolytope { vertices } => vertices.first().map_or(0, |v| v.len()),
            ConvexBody::HPolytope { a, .. } => a.ncols(),
            ConvexBody::Simplex { dim } => *dim,
            ConvexBody::Shifted { inner, .. } => inner.dim(),
        }
    }

    /// Fills in a missing ball dimension.
    pub(crate) fn with_dim(self, d: usize) -> Self {
        match self {
            ConvexBody::LpBall { norm, radius, dim: 0 } => ConvexBody::LpBall { norm, radius, dim: d },
            ConvexBody::Shifted { inner, offset } => ConvexBody::Shifted {
                inner: Box::new(inner.with_dim(d)),
                offset,
            },
            other => other,
        }
    }

    /// Checks finiteness, nonemptiness and boundedness.
    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexBody::LpBall { radius, dim, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidBody(format!("ball radius {radius} must be positive")));
                }
                if *dim == 0 {
                    return Err(Error::InvalidBody("ball dimension must be at least 1".into()));
                }
            }
            ConvexBody::VPolytope { vertices } => {
                let Some(first) = vertices.first() else {
                    return Err(Error::InvalidBody("vertex list is empty".into()));
                };
                let d = first.len();
                if d == 0 {
                    return Err(Error::InvalidBody("vertices have dimension 0".into()));
                }
                for v in vertices {
                    if v.len() != d {
                        return Err(Error::DimensionMismatch { expected: d, found: v.len() });
                    }
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::InvalidBody("non-finite vertex entry".into()));
                    }
                }
            }
            ConvexBody::HPolytope { a, b } => {
                if a.nrows() != b.len() {
                    return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.len() });
                }
                if a.ncols() == 0 {
                    return Err(Error::InvalidBody("constraint matrix has no columns".into()));
                }
                if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
                    return Err(Error::InvalidBody("non-finite constraint entry".into()));
                }
                check_bounded(a, b)?;
            }
            ConvexBody::Simplex { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidBody("simplex dimension must be at least 1".into()));
                }
            }
            ConvexBody::Shifted { inner, offset } => {
                inner.validate()?;
                if offset.len() != inner.dim() {
                    return Err(Error::DimensionMismatch { expected: inner.dim(), found: offset.len() });
                }
                if offset.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidBody("non-finite offset".into()));
                }
            }
        }
        Ok(())
    }

    pub fn membership(&self, x: &DVector<f64>, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            ConvexBody::LpBall { norm, radius, .. } => norm_eval(x, *norm) <= radius + tol,
            ConvexBody::Simplex { .. } => x.iter().all(|&v| v >= -tol) && x.sum() <= 1.0 + tol,
            ConvexBody::HPolytope { a, b } => match HRep::new(a.clone(), b.clone()) {
                Ok(h) => h.contains(x, tol),
                Err(_) => false,
            },
            ConvexBody::VPolytope { vertices } => {
                hull_distance(vertices, x).map(|t| t <= tol).unwrap_or(false)
            }
            ConvexBody::Shifted { inner, offset } => inner.membership(&(x - offset), tol),
        }
    }

    /// `sup_{x ∈ self} ⟨dir, x⟩`.
    pub fn support(&self, dir: &DVector<f64>) -> Result<f64> {
        if dir.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: dir.len() });
        }
        Ok(match self {
            ConvexBody::LpBall { norm, radius, .. } => radius * norm_eval(dir, norm.dual()),
            ConvexBody::Simplex { .. } => dir.iter().fold(0.0, |m, &v| m.max(v)),
            ConvexBody::VPolytope { vertices } => vertices
                .iter()
                .map(|v| v.dot(dir))
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexBody::HPolytope { a, b } => {
                let mut p = LpProblem::free(dir.iter().copied().collect(), Sense::Maximize);
                for i in 0..a.nrows() {
                    p.le(a.row(i).iter().copied().collect(), b[i]);
                }
                lp_solve(&p)?.value
            }
            ConvexBody::Shifted { inner, offset } => inner.support(dir)? + dir.dot(offset),
        })
    }

    /// `sup_{x ∈ self} f(x)`.
    pub fn support_value(&self, f: &Functional) -> Result<f64> {
        self.support(&f.coefficients)
    }

    /// Vertex list for polytopal bodies or centre/radius for Euclidean balls.
    pub fn shape(&self) -> Result<Shape> {
        Ok(match self {
            ConvexBody::LpBall { norm, radius, dim } => match norm {
                NormTag::L2 => Shape::Ball {
                    center: DVector::zeros(*dim),
                    radius: *radius,
                },
                NormTag::L1 => {
                    let mut v = Vec::with_capacity(2 * dim);
                    for i in 0..*dim {
                        for s in [1.0, -1.0] {
                            let mut e = DVector::zeros(*dim);
                            e[i] = s * radius;
                            v.push(e);
                        }
                    }
                    Shape::Polytope(v)
                }
                NormTag::Linf => {
                    if *dim > MAX_CUBE_DIM {
                        return Err(Error::Unsupported(format!("cube vertices in dimension {dim}")));
                    }
                    let v = (0..1usize << dim)
                        .map(|mask| {
                            DVector::from_fn(*dim, |i, _| if (mask >> i) & 1 == 1 { -radius } else { *radius })
                        })
                        .collect();
                    Shape::Polytope(v)
                }
            },
            ConvexBody::Simplex { dim } => {
                let mut v = vec![DVector::zeros(*dim)];
                for i in 0..*dim {
                    let mut e = DVector::zeros(*dim);
                    e[i] = 1.0;
                    v.push(e);
                }
                Shape::Polytope(v)
            }
            ConvexBody::VPolytope { vertices } => {
                let idx = extreme_points(vertices);
                Shape::Polytope(idx.into_iter().map(|i| vertices[i].clone()).collect())
            }
            ConvexBody::HPolytope { a, b } => {
                let h = HRep::new(a.clone(), b.clone())?;
                Shape::Polytope(hrep_vertices(&h, DEFAULT_BUDGET)?)
            }
            ConvexBody::Shifted { inner, offset } => match inner.shape()? {
                Shape::Polytope(v) => Shape::Polytope(v.into_iter().map(|x| x + offset).collect()),
                Shape::Ball { center, radius } => Shape::Ball {
                    center: center + offset,
                    radius,
                },
            },
        })
    }

    /// Vertices of a polytopal body; errors for Euclidean balls.
    pub fn vertices(&self) -> Result<Vec<DVector<f64>>> {
        match self.shape()? {
            Shape::Polytope(v) => Ok(v),
            Shape::Ball { .. } => Err(Error::Unsupported("a Euclidean ball has no vertices".into())),
        }
    }

    /// Half-space description of a polytopal body; errors for Euclidean balls.
    pub fn hrep(&self) -> Result<HRep> {
        match self {
            ConvexBody::LpBall { norm: NormTag::Linf, radius, dim } => {
                let mut a = DMatrix::zeros(2 * dim, *dim);
                for i in 0..*dim {
                    a[(2 * i, i)] = 1.0;
                    a[(2 * i + 1, i)] = -1.0;
                }
                HRep::new(a, DVector::from_element(2 * dim, *radius))
            }
            ConvexBody::Simplex { dim } => {
                let mut a = DMatrix::zeros(dim + 1, *dim);
                for i in 0..*dim {
                    a[(i, i)] = -1.0;
                    a[(*dim, i)] = 1.0;
                }
                let mut b = DVector::zeros(dim + 1);
                b[*dim] = 1.0;
                HRep::new(a, b)
            }
            ConvexBody::HPolytope { a, b } => HRep::new(a.clone(), b.clone()),
            ConvexBody::Shifted { inner, offset } => Ok(inner.hrep()?.translate(offset)),
            _ => vrep_facets(&self.vertices()?, DEFAULT_BUDGET),
        }
    }

    /// Centre of point symmetry, if the body has one.
    pub fn symmetry_center(&self) -> Result<Option<DVector<f64>>> {
        match self.shape()? {
            Shape::Ball { center, .. } => Ok(Some(center)),
            Shape::Polytope(v) => Ok(polytope_center(&v).map(|(c, _)| c)),
        }
    }

    pub fn is_symmetric(&self) -> Result<bool> {
        Ok(self.symmetry_center()?.is_some())
    }

    /// `{(f − g)/2 : f, g ∈ self}` as a centred ball or a vertex polytope.
    pub fn half_difference_body(&self) -> Result<ConvexBody> {
        let d = self.dim();
        match self.shape()? {
            Shape::Ball { radius, .. } => Ok(ConvexBody::LpBall {
                norm: NormTag::L2,
                radius,
                dim: d,
            }),
            Shape::Polytope(v) => {
                if let ConvexBody::LpBall { norm, radius, dim } = self {
                    return Ok(ConvexBody::LpBall { norm: *norm, radius: *radius, dim: *dim });
                }
                let hd = half_difference_points(&v);
                Ok(ConvexBody::VPolytope {
                    vertices: hd.points,
                })
            }
        }
    }
}

/// Vertices of a half-difference body with the pair of body vertices that
/// produced each one: point `k` equals `(v[labels[k].0] − v[labels[k].1]) / 2`.
#[derive(Debug, Clone)]
pub struct HalfDifference {
    pub points: Vec<DVector<f64>>,
    pub labels: Vec<(usize, usize)>,
}

/// Detects point symmetry of a vertex set; returns the centre and the mirror map.
pub fn polytope_center(v: &[DVector<f64>]) -> Option<(DVector<f64>, Vec<usize>)> {
    let n = v.len();
    let d = v[0].len();
    let c = v.iter().fold(DVector::zeros(d), |acc, x| acc + x) / n as f64;
    let scale = v.iter().map(|x| x.amax()).fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    let mut mirror = Vec::with_capacity(n);
    for x in v {
        let m = &c * 2.0 - x;
        mirror.push(v.iter().position(|y| (y - &m).amax() <= tol)?);
    }
    Some((c, mirror))
}

pub fn half_difference_points(v: &[DVector<f64>]) -> HalfDifference {
    if let Some((c, mirror)) = polytope_center(v) {
        return HalfDifference {
            points: v.iter().map(|x| x - &c).collect(),
            labels: (0..v.len()).map(|i| (i, mirror[i])).collect(),
        };
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for i in 0..v.len() {
        for j in 0..v.len() {
            if i != j {
                points.push((&v[i] - &v[j]) / 2.0);
                labels.push((i, j));
            }
        }
    }
    let keep = extreme_points(&points);
    HalfDifference {
        points: keep.iter().map(|&k| points[k].clone()).collect(),
        labels: keep.iter().map(|&k| labels[k]).collect(),
    }
}

fn check_bounded(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<()> {
    let d = a.ncols();
    for j in 0..d {
        for s in [1.0, -1.0] {
            let mut obj = vec![0.0; d];
            obj[j] = s;
            let mut p = LpProblem::free(obj, Sense::Maximize);
            for i in 0..a.nrows() {
                p.le(a.row(i).iter().copied().collect(), b[i]);
            }
            match lp_solve(&p) {
                Ok(_) => {}
                Err(Error::Infeasible) => return Err(Error::InvalidBody("H-polytope is empty".into())),
                Err(Error::Unbounded) => return Err(Error::InvalidBody("H-polytope is unbounded".into())),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}
