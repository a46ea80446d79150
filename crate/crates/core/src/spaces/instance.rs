use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::body::{half_difference_points, polytope_center, ConvexBody, Shape};
use super::norm::{norm_eval, NormTag};
use crate::error::{Error, Result};
use crate::numerics::polytope::{vrep_facets, HRep, DEFAULT_BUDGET};

/// A linear map `(ℝ^cols, source_norm) → (ℝ^rows, target_norm)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Operator {
    #[serde(with = "crate::serde_util::dmat")]
    pub matrix: DMatrix<f64>,
    pub source_norm: NormTag,
    pub target_norm: NormTag,
}

impl Operator {
    pub fn new(matrix: DMatrix<f64>, source_norm: NormTag, target_norm: NormTag) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::InvalidOperator("matrix must have at least one row and column".into()));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidOperator("matrix has non-finite entries".into()));
        }
        Ok(Self {
            matrix,
            source_norm,
            target_norm,
        })
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// `‖S x‖` in the target norm.
    pub fn seminorm(&self, x: &DVector<f64>) -> f64 {
        norm_eval(&self.apply(x), self.target_norm)
    }
}

/// The difference body `(F − F)/2` in solver-ready form.
#[derive(Debug, Clone)]
pub enum DiffShape {
    /// Point `k` equals `(v[labels[k].0] − v[labels[k].1]) / 2` for body vertices `v`.
    Polytope {
        points: Vec<DVector<f64>>,
        labels: Vec<(usize, usize)>,
    },
    /// Euclidean ball centred at the origin.
    Ball { radius: f64 },
}

/// Geometry derived once per instance and shared by every solver call.
#[derive(Debug)]
pub struct Prepared {
    pub body: Shape,
    pub diff: DiffShape,
    pub center: Option<DVector<f64>>,
    body_hrep: OnceLock<Result<HRep>>,
    diff_hrep: OnceLock<Result<HRep>>,
}

impl Prepared {
    fn new(body: &ConvexBody) -> Result<Self> {
        let shape = body.shape()?;
        let (diff, center) = match &shape {
            Shape::Ball { center, radius } => (DiffShape::Ball { radius: *radius }, Some(center.clone())),
            Shape::Polytope(v) => {
                let center = polytope_center(v).map(|(c, _)| c);
                let hd = half_difference_points(v);
                (
                    DiffShape::Polytope {
                        points: hd.points,
                        labels: hd.labels,
                    },
                    center,
                )
            }
        };
        Ok(Self {
            body: shape,
            diff,
            center,
            body_hrep: OnceLock::new(),
            diff_hrep: OnceLock::new(),
        })
    }

    pub fn body_vertices(&self) -> Option<&[DVector<f64>]> {
        match &self.body {
            Shape::Polytope(v) => Some(v),
            Shape::Ball { .. } => None,
        }
    }

    /// Facets of the body (polytopes only).
    pub fn body_hrep(&self, body: &ConvexBody) -> Result<&HRep> {
        self.body_hrep
            .get_or_init(|| body.hrep())
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Facets of the difference body (polytopes only).
    pub fn diff_hrep(&self) -> Result<&HRep> {
        self.diff_hrep
            .get_or_init(|| match &self.diff {
                DiffShape::Polytope { points, .. } => vrep_facets(points, DEFAULT_BUDGET),
                DiffShape::Ball { .. } => Err(Error::Unsupported("ball has no facets".into())),
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

/// The pair `(S, F)`: an operator and a convex body in its source space.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "InstanceSpec", into = "InstanceSpec")]
pub struct Instance {
    pub op: Operator,
    pub body: ConvexBody,
    prepared: Arc<OnceLock<std::result::Result<Prepared, Error>>>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.op == other.op && self.body == other.body
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceSpec {
    #[serde(with = "crate::serde_util::dmat")]
    matrix: DMatrix<f64>,
    source_norm: NormTag,
    target_norm: NormTag,
    body: ConvexBody,
}

impl TryFrom<InstanceSpec> for Instance {
    type Error = Error;

    fn try_from(s: InstanceSpec) -> Result<Self> {
        let op = Operator::new(s.matrix, s.source_norm, s.target_norm)?;
        Instance::new(op, s.body)
    }
}

impl From<Instance> for InstanceSpec {
    fn from(i: Instance) -> Self {
        InstanceSpec {
            matrix: i.op.matrix,
            source_norm: i.op.source_norm,
            target_norm: i.op.target_norm,
            body: i.body,
        }
    }
}

impl Instance {
    pub fn new(op: Operator, body: ConvexBody) -> Result<Self> {
        let body = body.with_dim(op.source_dim());
        body.validate()?;
        if body.dim() != op.source_dim() {
            return Err(Error::DimensionMismatch {
                expected: op.source_dim(),
                found: body.dim(),
            });
        }
        Ok(Self {
            op,
            body,
            prepared: Arc::new(OnceLock::new()),
        })
    }

    /// Convenience constructor from a matrix and norms.
    pub fn from_parts(matrix: DMatrix<f64>, source: NormTag, target: NormTag, body: ConvexBody) -> Result<Self> {
        Instance::new(Operator::new(matrix, source, target)?, body)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn source_dim(&self) -> usize {
        self.op.source_dim()
    }

    pub fn target_dim(&self) -> usize {
        self.op.target_dim()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.op.matrix
    }

    pub fn target_norm(&self) -> NormTag {
        self.op.target_norm
    }

    pub fn prepared(&self) -> Result<&Prepared> {
        self.prepared
            .get_or_init(|| Prepared::new(&self.body))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn is_symmetric(&self) -> Result<bool> {
        Ok(self.prepared()?.center.is_some())
    }

    /// `true` when `F = −F`.
    pub fn is_origin_symmetric(&self) -> Result<bool> {
        Ok(match &self.prepared()?.center {
            Some(c) => c.amax() <= 1e-12,
            None => false,
        })
    }

    /// `true` when `F` is a Euclidean ball.
    pub fn is_euclidean_ball(&self) -> bool {
        matches!(self.prepared().map(|p| &p.body), Ok(Shape::Ball { .. }))
    }

    /// `true` when both norms are Euclidean and `F` is a Euclidean ball centred at 0.
    pub fn is_hilbert_ball(&self) -> bool {
        self.op.source_norm == NormTag::L2
            && self.op.target_norm == NormTag::L2
            && matches!(self.prepared().map(|p| &p.body), Ok(Shape::Ball { center, .. }) if center.amax() == 0.0)
    }

    /// The same body with the operator matrix multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Result<Instance> {
        Instance::new(
            Operator::new(&self.op.matrix * t, self.op.source_norm, self.op.target_norm)?,
            self.body.clone(),
        )
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.body.membership(x, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_fills_ball_dimension() {
        let text = r#"{"matrix": [[1, 0], [0, 0.5]], "source_norm": "l2", "target_norm": "l2",
                       "body": {"type": "lp_ball", "norm": "l2", "radius": 1}}"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.body.dim(), 2);
        assert!(inst.is_hilbert_ball());
        let back = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = Instance::from_json("{\n \"matrix\": [[1]],\n \"source_norm\": \"l7\"}").unwrap_err();
        match err {
            Error::Parse(msg) => assert!(msg.contains("line 3"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let r = Instance::from_parts(DMatrix::identity(2, 2), NormTag::L2, NormTag::L2, ConvexBody::simplex(3));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
