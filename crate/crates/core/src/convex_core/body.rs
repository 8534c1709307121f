use serde_json::{json, Value};

use crate::convex_core::polytope::VPolytope;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// One summand of a direct sum: a body in `ℝ^k` embedded through the
/// `n × k` matrix whose columns are the frame vectors.
#[derive(Debug, Clone)]
pub struct DirectPart {
    pub body: BodyExpr,
    pub frame: Matrix,
}

/// Convex body built from polytopes and balls by scaling, reflection,
/// Minkowski addition, direct sums and affine maps.
#[derive(Debug, Clone)]
pub enum BodyExpr {
    Polytope(VPolytope),
    Ball { center: Vector, radius: f64 },
    Scale { coef: f64, body: Box<BodyExpr> },
    Reflect(Box<BodyExpr>),
    MinkowskiSum(Vec<BodyExpr>),
    DirectSum(Vec<DirectPart>),
    /// `x ↦ matrix · x + shift`; the matrix may be rectangular.
    Affine { matrix: Matrix, shift: Vector, body: Box<BodyExpr> },
}

/// A body of the form `P + ρB` with `B` the unit ball at the origin.
#[derive(Debug, Clone)]
pub struct PolyBall {
    pub poly: VPolytope,
    pub radius: f64,
}

impl From<VPolytope> for BodyExpr {
    fn from(p: VPolytope) -> Self {
        BodyExpr::Polytope(p)
    }
}

fn is_similarity(m: &Matrix) -> Option<f64> {
    // M Mᵀ = s² I means M maps the unit ball onto a ball of radius s.
    let g = m * m.transpose();
    let s2 = g[(0, 0)];
    let scale = g.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1e-300);
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { s2 } else { 0.0 };
            if (g[(i, j)] - target).abs() > 1e-12 * scale {
                return None;
            }
        }
    }
    Some(s2.max(0.0).sqrt())
}

impl BodyExpr {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!("ball radius must be nonnegative, got {radius}")));
        }
        Ok(BodyExpr::Ball { center, radius })
    }

    pub fn unit_ball(dim: usize) -> Self {
        BodyExpr::Ball { center: Vector::zeros(dim), radius: 1.0 }
    }

    pub fn scaled(coef: f64, body: BodyExpr) -> Result<Self> {
        if coef < 0.0 || !coef.is_finite() {
            return Err(Error::NegativeScale(coef));
        }
        Ok(BodyExpr::Scale { coef, body: Box::new(body) })
    }

    pub fn reflected(body: BodyExpr) -> Self {
        BodyExpr::Reflect(Box::new(body))
    }

    pub fn sum(terms: Vec<BodyExpr>) -> Result<Self> {
        let dim = terms.first().map(|t| t.dim()).ok_or_else(|| Error::InvalidInput("empty Minkowski sum".into()))?;
        for t in &terms {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: t.dim() });
            }
        }
        Ok(BodyExpr::MinkowskiSum(terms))
    }

    /// Direct sum of parts embedded by the given frames (`n × k_i` matrices).
    /// The frames together must form an invertible `n × n` matrix.
    pub fn direct_sum(parts: Vec<DirectPart>) -> Result<Self> {
        let n = parts.first().map(|p| p.frame.nrows()).ok_or_else(|| Error::InvalidInput("empty direct sum".into()))?;
        let mut total = 0;
        for p in &parts {
            if p.frame.nrows() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.frame.nrows() });
            }
            if p.frame.ncols() != p.body.dim() {
                return Err(Error::DimensionMismatch { expected: p.frame.ncols(), found: p.body.dim() });
            }
            total += p.frame.ncols();
        }
        if total != n {
            return Err(Error::FrameOverlap);
        }
        let joined = joined_frames(&parts);
        if joined.determinant().abs() < 1e-12 {
            return Err(Error::FrameOverlap);
        }
        Ok(BodyExpr::DirectSum(parts))
    }

    pub fn affine(matrix: Matrix, shift: Vector, body: BodyExpr) -> Result<Self> {
        if matrix.ncols() != body.dim() {
            return Err(Error::DimensionMismatch { expected: body.dim(), found: matrix.ncols() });
        }
        if shift.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: shift.len() });
        }
        Ok(BodyExpr::Affine { matrix, shift, body: Box::new(body) })
    }

    pub fn dim(&self) -> usize {
        match self {
            BodyExpr::Polytope(p) => p.dim(),
            BodyExpr::Ball { center, .. } => center.len(),
            BodyExpr::Scale { body, .. } | BodyExpr::Reflect(body) => body.dim(),
            BodyExpr::MinkowskiSum(t) => t.first().map_or(0, |b| b.dim()),
            BodyExpr::DirectSum(parts) => parts.first().map_or(0, |p| p.frame.nrows()),
            BodyExpr::Affine { matrix, .. } => matrix.nrows(),
        }
    }

    /// Support function `h(u) = max_{x ∈ B} x · u`.
    pub fn support(&self, u: &Vector) -> f64 {
        match self {
            BodyExpr::Polytope(p) => p.support(u),
            BodyExpr::Ball { center, radius } => center.dot(u) + radius * u.norm(),
            BodyExpr::Scale { coef, body } => coef * body.support(u),
            BodyExpr::Reflect(body) => body.support(&-u),
            BodyExpr::MinkowskiSum(t) => t.iter().map(|b| b.support(u)).sum(),
            BodyExpr::DirectSum(parts) => parts.iter().map(|p| p.body.support(&(p.frame.transpose() * u))).sum(),
            BodyExpr::Affine { matrix, shift, body } => body.support(&(matrix.transpose() * u)) + shift.dot(u),
        }
    }

    /// Width `h(u) + h(-u)` in direction `u`.
    pub fn width(&self, u: &Vector) -> f64 {
        self.support(u) + self.support(&-u)
    }

    pub fn scale(&self, a: f64) -> Result<Self> {
        BodyExpr::scaled(a, self.clone())
    }

    pub fn reflect(&self) -> Self {
        match self {
            BodyExpr::Polytope(p) => BodyExpr::Polytope(p.reflect()),
            BodyExpr::Ball { center, radius } => BodyExpr::Ball { center: -center, radius: *radius },
            BodyExpr::Reflect(b) => (**b).clone(),
            _ => BodyExpr::reflected(self.clone()),
        }
    }

    pub fn translate(&self, v: &Vector) -> Self {
        match self {
            BodyExpr::Polytope(p) => BodyExpr::Polytope(p.translate(v)),
            BodyExpr::Ball { center, radius } => BodyExpr::Ball { center: center + v, radius: *radius },
            BodyExpr::MinkowskiSum(terms) => {
                let mut terms = terms.clone();
                match terms.iter_mut().find(|t| matches!(t, BodyExpr::Polytope(_) | BodyExpr::Ball { .. })) {
                    Some(t) => *t = t.translate(v),
                    None => terms.push(BodyExpr::Polytope(VPolytope::point(v.clone()))),
                }
                BodyExpr::MinkowskiSum(terms)
            }
            BodyExpr::Affine { matrix, shift, body } => {
                BodyExpr::Affine { matrix: matrix.clone(), shift: shift + v, body: body.clone() }
            }
            _ => BodyExpr::MinkowskiSum(vec![self.clone(), BodyExpr::Polytope(VPolytope::point(v.clone()))]),
        }
    }

    /// Exact polytope value of the expression, when it contains no ball of
    /// positive radius.
    pub fn to_polytope(&self) -> Option<VPolytope> {
        match self.split_ball()? {
            PolyBall { poly, radius } if radius == 0.0 => Some(poly),
            _ => None,
        }
    }

    /// Rewrites the body as `P + ρB` when the expression has that form.
    pub fn split_ball(&self) -> Option<PolyBall> {
        match self {
            BodyExpr::Polytope(p) => Some(PolyBall { poly: p.clone(), radius: 0.0 }),
            BodyExpr::Ball { center, radius } => Some(PolyBall { poly: VPolytope::point(center.clone()), radius: *radius }),
            BodyExpr::Scale { coef, body } => {
                let pb = body.split_ball()?;
                Some(PolyBall { poly: pb.poly.scale(*coef).ok()?, radius: coef * pb.radius })
            }
            BodyExpr::Reflect(body) => {
                let pb = body.split_ball()?;
                Some(PolyBall { poly: pb.poly.reflect(), radius: pb.radius })
            }
            BodyExpr::MinkowskiSum(terms) => {
                let mut acc: Option<PolyBall> = None;
                for t in terms {
                    let pb = t.split_ball()?;
                    acc = Some(match acc {
                        None => pb,
                        Some(a) => PolyBall { poly: minkowski_small(&a.poly, &pb.poly)?, radius: a.radius + pb.radius },
                    });
                }
                acc
            }
            BodyExpr::DirectSum(parts) => {
                let mut acc: Option<VPolytope> = None;
                for p in parts {
                    let pb = p.body.split_ball()?;
                    if pb.radius != 0.0 {
                        return None;
                    }
                    let img = pb.poly.linear_image(&p.frame, &Vector::zeros(p.frame.nrows())).ok()?;
                    acc = Some(match acc {
                        None => img,
                        Some(a) => minkowski_small(&a, &img)?,
                    });
                }
                Some(PolyBall { poly: acc?, radius: 0.0 })
            }
            BodyExpr::Affine { matrix, shift, body } => {
                let pb = body.split_ball()?;
                let s = if pb.radius == 0.0 { 0.0 } else { is_similarity(matrix)? };
                Some(PolyBall { poly: pb.poly.linear_image(matrix, shift).ok()?, radius: s * pb.radius })
            }
        }
    }

    /// Image under the linear map `m` (`k × n`), pushed down the expression
    /// tree so polytopes stay polytopes and balls stay balls where possible.
    pub fn linear_image(&self, m: &Matrix) -> Result<BodyExpr> {
        if m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: m.ncols() });
        }
        let k = m.nrows();
        Ok(match self {
            BodyExpr::Polytope(p) => BodyExpr::Polytope(p.linear_image(m, &Vector::zeros(k))?),
            BodyExpr::Ball { center, radius } => match is_similarity(m) {
                Some(s) => BodyExpr::Ball { center: m * center, radius: s * radius },
                None => BodyExpr::affine(m.clone(), Vector::zeros(k), self.clone())?,
            },
            BodyExpr::Scale { coef, body } => BodyExpr::Scale { coef: *coef, body: Box::new(body.linear_image(m)?) },
            BodyExpr::Reflect(body) => BodyExpr::Reflect(Box::new(body.linear_image(m)?)),
            BodyExpr::MinkowskiSum(terms) => {
                BodyExpr::MinkowskiSum(terms.iter().map(|t| t.linear_image(m)).collect::<Result<_>>()?)
            }
            BodyExpr::DirectSum(parts) => BodyExpr::MinkowskiSum(
                parts.iter().map(|p| p.body.linear_image(&(m * &p.frame))).collect::<Result<_>>()?,
            ),
            BodyExpr::Affine { matrix, shift, body } => body.linear_image(&(m * matrix))?.translate(&(m * shift)),
        })
    }

    pub fn to_json(&self) -> Value {
        let vec_json = |v: &Vector| Value::from(v.iter().copied().collect::<Vec<f64>>());
        match self {
            BodyExpr::Polytope(p) => json!({
                "type": "vpolytope",
                "dim": p.dim(),
                "vertices": p.vertices().iter().map(vec_json).collect::<Vec<_>>(),
            }),
            BodyExpr::Ball { center, radius } => json!({"type": "ball", "center": vec_json(center), "radius": radius}),
            BodyExpr::Scale { coef, body } => json!({"type": "scale", "coef": coef, "body": body.to_json()}),
            BodyExpr::Reflect(body) => json!({"type": "reflect", "body": body.to_json()}),
            BodyExpr::MinkowskiSum(t) => json!({"type": "minkowski", "terms": t.iter().map(|b| b.to_json()).collect::<Vec<_>>()}),
            BodyExpr::DirectSum(parts) => json!({
                "type": "direct_sum",
                "parts": parts.iter().map(|p| json!({
                    "body": p.body.to_json(),
                    "frame": p.frame.column_iter().map(|c| c.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            }),
            BodyExpr::Affine { matrix, shift, body } => json!({
                "type": "affine",
                "matrix": matrix.row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>(),
                "shift": vec_json(shift),
                "body": body.to_json(),
            }),
        }
    }

    pub fn from_json(v: &Value) -> Result<BodyExpr> {
        let ty = v.get("type").and_then(Value::as_str).ok_or_else(|| bad("missing \"type\""))?;
        match ty {
            "vpolytope" => {
                let verts = rows_of(field(v, "vertices")?)?;
                let dim = match v.get("dim") {
                    Some(d) => d.as_u64().ok_or_else(|| bad("\"dim\" must be an integer"))? as usize,
                    None => verts.first().map_or(0, |r| r.len()),
                };
                let pts = verts.iter().map(|r| Vector::from_column_slice(r)).collect();
                Ok(BodyExpr::Polytope(VPolytope::new(dim, pts)?))
            }
            "ball" => BodyExpr::ball(Vector::from_vec(reals(field(v, "center")?)?), real(field(v, "radius")?)?),
            "scale" => BodyExpr::scaled(real(field(v, "coef")?)?, BodyExpr::from_json(field(v, "body")?)?),
            "reflect" => Ok(BodyExpr::reflected(BodyExpr::from_json(field(v, "body")?)?)),
            "minkowski" => {
                let terms = field(v, "terms")?.as_array().ok_or_else(|| bad("\"terms\" must be an array"))?;
                BodyExpr::sum(terms.iter().map(BodyExpr::from_json).collect::<Result<_>>()?)
            }
            "direct_sum" => {
                let parts = field(v, "parts")?.as_array().ok_or_else(|| bad("\"parts\" must be an array"))?;
                let mut out = vec![];
                for p in parts {
                    let body = BodyExpr::from_json(field(p, "body")?)?;
                    let cols = rows_of(field(p, "frame")?)?;
                    let n = cols.first().map_or(0, |c| c.len());
                    if cols.iter().any(|c| c.len() != n) {
                        return Err(bad("ragged frame"));
                    }
                    let frame = Matrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
                    out.push(DirectPart { body, frame });
                }
                BodyExpr::direct_sum(out)
            }
            "affine" => {
                let rows = rows_of(field(v, "matrix")?)?;
                let c = rows.first().map_or(0, |r| r.len());
                if rows.iter().any(|r| r.len() != c) {
                    return Err(bad("ragged matrix"));
                }
                let m = Matrix::from_fn(rows.len(), c, |i, j| rows[i][j]);
                let shift = Vector::from_vec(reals(field(v, "shift")?)?);
                BodyExpr::affine(m, shift, BodyExpr::from_json(field(v, "body")?)?)
            }
            other => Err(bad(&format!("unknown body type \"{other}\""))),
        }
    }
}

fn joined_frames(parts: &[DirectPart]) -> Matrix {
    let n = parts[0].frame.nrows();
    let mut m = Matrix::zeros(n, n);
    let mut col = 0;
    for p in parts {
        for c in p.frame.column_iter() {
            if col < n {
                m.set_column(col, &c);
            }
            col += 1;
        }
    }
    m
}

/// Determinant of the matrix formed by all frame columns of a direct sum.
pub fn frame_determinant(parts: &[DirectPart]) -> f64 {
    joined_frames(parts).determinant()
}

fn minkowski_small(a: &VPolytope, b: &VPolytope) -> Option<VPolytope> {
    if b.vertices().len() == 1 {
        return Some(a.translate(&b.vertices()[0]));
    }
    if a.vertices().len() == 1 {
        return Some(b.translate(&a.vertices()[0]));
    }
    a.minkowski_sum(b).ok()
}

fn bad(msg: &str) -> Error {
    Error::InvalidInput(msg.to_string())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| bad(&format!("missing \"{key}\"")))
}

fn real(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| bad("expected a number"))
}

fn reals(v: &Value) -> Result<Vec<f64>> {
    v.as_array().ok_or_else(|| bad("expected an array of numbers"))?.iter().map(real).collect()
}

fn rows_of(v: &Value) -> Result<Vec<Vec<f64>>> {
    v.as_array().ok_or_else(|| bad("expected an array of arrays"))?.iter().map(reals).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    #[test]
    fn cube_support_along_diagonal() {
        let cube = BodyExpr::Polytope(VPolytope::unit_cube(3));
        let u = vector(&[1.0, 1.0, 1.0]) / 3f64.sqrt();
        assert!((cube.support(&u) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ball_support_and_reflection() {
        let b = BodyExpr::ball(vector(&[1.0, 0.0]), 2.0).unwrap();
        let u = vector(&[0.0, 1.0]);
        assert!((b.support(&u) - 2.0).abs() < 1e-15);
        assert!((b.reflect().support(&vector(&[1.0, 0.0])) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_scale_rejected() {
        let b = BodyExpr::unit_ball(2);
        assert_eq!(b.scale(-1.0).unwrap_err(), Error::NegativeScale(-1.0));
    }

    #[test]
    fn split_ball_of_sum() {
        let sq = VPolytope::unit_cube(2);
        let k = BodyExpr::sum(vec![BodyExpr::scaled(0.5, sq.into()).unwrap(), BodyExpr::ball(vector(&[1.0, 1.0]), 0.25).unwrap()]).unwrap();
        let pb = k.split_ball().unwrap();
        assert!((pb.radius - 0.25).abs() < 1e-15);
        assert!((pb.poly.volume() - 0.25).abs() < 1e-12);
        assert!((pb.poly.centroid() - vector(&[1.25, 1.25])).norm() < 1e-12);
    }

    #[test]
    fn direct_sum_of_square_and_segment_is_box() {
        let sq = VPolytope::unit_cube(2);
        let seg = VPolytope::segment(vector(&[0.0]), vector(&[2.0])).unwrap();
        let f1 = Matrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let f2 = Matrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
        let b = BodyExpr::direct_sum(vec![DirectPart { body: sq.into(), frame: f1 }, DirectPart { body: seg.into(), frame: f2 }]).unwrap();
        let p = b.to_polytope().unwrap();
        assert_eq!(p.vertices().len(), 8);
        assert!((p.volume() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_frames_rejected() {
        let seg = || BodyExpr::from(VPolytope::segment(vector(&[0.0]), vector(&[1.0])).unwrap());
        let f = Matrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let err = BodyExpr::direct_sum(vec![DirectPart { body: seg(), frame: f.clone() }, DirectPart { body: seg(), frame: f }]);
        assert_eq!(err.unwrap_err(), Error::FrameOverlap);
    }

    #[test]
    fn json_round_trip_preserves_support() {
        let tri = VPolytope::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let shear = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let b = BodyExpr::affine(
            shear,
            vector(&[0.1, 0.2]),
            BodyExpr::sum(vec![tri.into(), BodyExpr::reflected(BodyExpr::unit_ball(2))]).unwrap(),
        )
        .unwrap();
        let back = BodyExpr::from_json(&b.to_json()).unwrap();
        for k in 0..16 {
            let a = k as f64 * 0.4;
            let u = vector(&[a.cos(), a.sin()]);
            assert!((b.support(&u) - back.support(&u)).abs() < 1e-14);
        }
    }

    #[test]
    fn unknown_type_is_an_error() {
        let v = serde_json::json!({"type": "torus"});
        assert!(matches!(BodyExpr::from_json(&v), Err(Error::InvalidInput(_))));
    }
}
