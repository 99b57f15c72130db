//! H-representation polytopes: construction, validation, vertex
//! enumeration, volume, inradius, and the absolute rank of normal families.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{complement_frame, family_rank, solve_square};
use crate::lp::{solve_lp, Constraint, LpOutcome, Sense};

/// An oriented hyperplane with unit inner normal.
///
/// The halfspace it bounds is `{x : <normal, x> - offset >= 0}`; the signed
/// distance of a point is positive on the inner side.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: DVector<f64>,
    offset: f64,
}

impl Hyperplane {
    /// Build from an already-unit normal. Fails if the norm defect exceeds
    /// `tol.unit` or the dimension is zero.
    pub fn new(normal: DVector<f64>, offset: f64, tol: &Tolerances) -> Result<Self> {
        if normal.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if (normal.norm() - 1.0).abs() > tol.unit {
            return Err(Error::InvalidInput(format!(
                "normal is not unit (|n| = {})",
                normal.norm()
            )));
        }
        Ok(Hyperplane { normal, offset })
    }

    pub fn normal(&self) -> &DVector<f64> {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// The same hyperplane set bounding the opposite halfspace.
    pub fn flipped(&self) -> Hyperplane {
        Hyperplane {
            normal: -self.normal.clone(),
            offset: -self.offset,
        }
    }

    /// A point on the hyperplane (the foot of the perpendicular from the origin).
    pub fn foot(&self) -> DVector<f64> {
        &self.normal * self.offset
    }
}

/// Inequality sense for raw halfspace input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HalfspaceSense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

/// Normalize `a . x (sense) b` into a [`Hyperplane`] with unit inner normal.
pub fn normalize_halfspace(
    a: &DVector<f64>,
    b: f64,
    sense: HalfspaceSense,
    tol: &Tolerances,
) -> Result<Hyperplane> {
    let norm = a.norm();
    if norm < tol.unit {
        return Err(Error::ZeroNormal);
    }
    // a.x <= b  <=>  (-a/|a|).x >= -b/|a|
    let (normal, offset) = match sense {
        HalfspaceSense::Le => (-a / norm, -b / norm),
        HalfspaceSense::Ge => (a / norm, b / norm),
    };
    Hyperplane::new(normal, offset, tol)
}

/// Signed distance from `q` to `h`: positive on the inner side.
pub fn signed_distance(q: &DVector<f64>, h: &Hyperplane) -> Result<f64> {
    if q.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: q.len(),
        });
    }
    Ok(h.normal.dot(q) - h.offset)
}

/// A bounded, full-dimensional polytope given by its minimal family of
/// halfspaces. Construction via [`Polytope::from_halfspaces`] certifies all
/// three properties.
#[derive(Debug, Clone)]
pub struct Polytope {
    dim: usize,
    halfspaces: Vec<Hyperplane>,
}

/// The vertices of a polytope, in the order they were discovered
/// (lexicographic over defining constraint subsets).
#[derive(Debug, Clone)]
pub struct VertexSet {
    pub vertices: Vec<DVector<f64>>,
}

impl Polytope {
    /// Validate and minimize a halfspace family; see [`remove_redundant`].
    pub fn from_halfspaces(halfspaces: Vec<Hyperplane>, tol: &Tolerances) -> Result<Polytope> {
        remove_redundant(halfspaces, tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Hyperplane] {
        &self.halfspaces
    }

    pub fn num_facets(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn normals(&self) -> Vec<DVector<f64>> {
        self.halfspaces.iter().map(|h| h.normal.clone()).collect()
    }

    /// Membership within `slack`.
    pub fn contains(&self, q: &DVector<f64>, slack: f64) -> bool {
        self.halfspaces
            .iter()
            .all(|h| h.normal.dot(q) - h.offset >= -slack)
    }

    /// min over facets of the signed distance; the distance from `q` to the
    /// boundary when `q` is inside (convexity makes the facet minimum exact).
    pub fn boundary_distance(&self, q: &DVector<f64>) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.normal.dot(q) - h.offset)
            .fold(f64::INFINITY, f64::min)
    }

    /// Axis-aligned bounding box, one LP per coordinate direction and sign.
    pub fn bounding_box(&self, tol: &Tolerances) -> Result<(DVector<f64>, DVector<f64>)> {
        let d = self.dim;
        let cs = self.feasibility_constraints();
        let mut lo = DVector::zeros(d);
        let mut hi = DVector::zeros(d);
        for k in 0..d {
            let mut obj = DVector::zeros(d);
            obj[k] = 1.0;
            let (max_k, _) = solve_lp(&obj, &cs, tol)?.optimal()?;
            obj[k] = -1.0;
            let (neg_min_k, _) = solve_lp(&obj, &cs, tol)?.optimal()?;
            lo[k] = -neg_min_k;
            hi[k] = max_k;
        }
        Ok((lo, hi))
    }

    fn feasibility_constraints(&self) -> Vec<Constraint> {
        self.halfspaces
            .iter()
            .map(|h| Constraint::new(h.normal.clone(), Sense::Ge, h.offset))
            .collect()
    }
}

/// Validate a halfspace family and drop redundant members.
///
/// Checks, in order: nonempty intersection, boundedness (one LP per
/// coordinate direction and sign), full dimensionality (inradius above
/// `tol.feas`), then drops each halfspace whose removal does not enlarge
/// the feasible set (LP test against the remaining family). The scan is
/// sequential in input order, so of two duplicates the later one survives.
pub fn remove_redundant(halfspaces: Vec<Hyperplane>, tol: &Tolerances) -> Result<Polytope> {
    if halfspaces.is_empty() {
        return Err(Error::UnboundedInput);
    }
    let dim = halfspaces[0].dim();
    for h in &halfspaces {
        if h.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: h.dim(),
            });
        }
    }
    let all: Vec<Constraint> = halfspaces
        .iter()
        .map(|h| Constraint::new(h.normal.clone(), Sense::Ge, h.offset))
        .collect();

    // Nonempty?
    let zero_obj = DVector::zeros(dim);
    if let LpOutcome::Infeasible = solve_lp(&zero_obj, &all, tol)? {
        return Err(Error::Empty);
    }
    // Bounded in every coordinate direction?
    for k in 0..dim {
        for sign in [1.0, -1.0] {
            let mut obj = DVector::zeros(dim);
            obj[k] = sign;
            if matches!(solve_lp(&obj, &all, tol)?, LpOutcome::Unbounded) {
                return Err(Error::UnboundedInput);
            }
        }
    }
    // Full-dimensional?
    let (g, _) = chebyshev_center(&halfspaces, tol)?;
    if g <= tol.feas {
        return Err(Error::LowerDimensional);
    }

    // Irredundancy scan: halfspace j is redundant when minimizing its slack
    // over the others cannot go below zero.
    let mut kept: Vec<Hyperplane> = halfspaces;
    let mut j = 0;
    while j < kept.len() {
        let others: Vec<Constraint> = kept
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, h)| Constraint::new(h.normal.clone(), Sense::Ge, h.offset))
            .collect();
        let obj = -kept[j].normal.clone();
        let redundant = match solve_lp(&obj, &others, tol)? {
            // max of -(n.x) = -(min n.x); slack min = min n.x - offset
            LpOutcome::Optimal { objective, .. } => {
                let min_dist = -objective - kept[j].offset;
                min_dist >= -tol.feas
            }
            LpOutcome::Unbounded => false,
            LpOutcome::Infeasible => {
                return Err(Error::NumericalFailure(
                    "redundancy subproblem infeasible".into(),
                ))
            }
        };
        if redundant {
            kept.remove(j);
        } else {
            j += 1;
        }
    }
    Ok(Polytope {
        dim,
        halfspaces: kept,
    })
}

fn chebyshev_center(halfspaces: &[Hyperplane], tol: &Tolerances) -> Result<(f64, DVector<f64>)> {
    let dim = halfspaces[0].dim();
    // Variables (x, g); maximize g subject to <n_j, x> - b_j >= g.
    let mut cs = Vec::with_capacity(halfspaces.len());
    for h in halfspaces {
        let mut coeffs = DVector::zeros(dim + 1);
        for k in 0..dim {
            coeffs[k] = h.normal[k];
        }
        coeffs[dim] = -1.0;
        cs.push(Constraint::new(coeffs, Sense::Ge, h.offset));
    }
    let mut obj = DVector::zeros(dim + 1);
    obj[dim] = 1.0;
    match solve_lp(&obj, &cs, tol)? {
        LpOutcome::Optimal { objective, point } => {
            let center = DVector::from_fn(dim, |i, _| point[i]);
            Ok((objective, center))
        }
        LpOutcome::Infeasible => Err(Error::Empty),
        LpOutcome::Unbounded => Err(Error::UnboundedInput),
    }
}

/// Inradius and an incenter of `p` (the Chebyshev center LP).
pub fn inradius(p: &Polytope, tol: &Tolerances) -> Result<(f64, DVector<f64>)> {
    chebyshev_center(&p.halfspaces, tol)
}

/// All vertices by brute force over d-subsets of the facet family.
///
/// Cost is O(C(m, d)) small linear solves, fine at desk scale (m <= ~40).
/// Subsets with dependent normals define no vertex and are skipped; any true
/// vertex is also cut out by some independent active subset, so nothing is
/// lost. Duplicates within `tol.vertex` are merged.
pub fn enumerate_vertices(p: &Polytope, tol: &Tolerances) -> Result<VertexSet> {
    let d = p.dim;
    let m = p.halfspaces.len();
    if m < d {
        return Err(Error::NumericalFailure(
            "fewer halfspaces than dimensions".into(),
        ));
    }
    let mut vertices: Vec<DVector<f64>> = Vec::new();
    let mut subset: Vec<usize> = (0..d).collect();
    loop {
        let a = DMatrix::from_fn(d, d, |i, j| p.halfspaces[subset[i]].normal[j]);
        let b = DVector::from_fn(d, |i, _| p.halfspaces[subset[i]].offset);
        if let Some(x) = solve_square(&a, &b, 1e-12) {
            if p.contains(&x, tol.feas) && !vertices.iter().any(|v| (v - &x).norm() <= tol.vertex) {
                vertices.push(x);
            }
        }
        // Next lexicographic d-subset of 0..m.
        let mut i = d;
        loop {
            if i == 0 {
                return finish_vertices(vertices, p, tol);
            }
            i -= 1;
            if subset[i] != i + m - d {
                subset[i] += 1;
                for k in (i + 1)..d {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn finish_vertices(
    vertices: Vec<DVector<f64>>,
    p: &Polytope,
    _tol: &Tolerances,
) -> Result<VertexSet> {
    if vertices.len() < p.dim + 1 {
        return Err(Error::NumericalFailure(format!(
            "vertex enumeration found only {} vertices in dimension {}",
            vertices.len(),
            p.dim
        )));
    }
    Ok(VertexSet { vertices })
}

/// The facet `p ∩ ∂H_j` as a (d-1)-polytope in a deterministic local frame.
///
/// Returns the local polytope together with the affine embedding
/// `global = origin + basis * local`.
pub fn facet_subpolytope(
    p: &Polytope,
    j: usize,
    tol: &Tolerances,
) -> Result<(Polytope, DVector<f64>, DMatrix<f64>)> {
    let d = p.dim;
    assert!(d >= 2, "facets of 1-d polytopes are points");
    let host = &p.halfspaces[j];
    let origin = host.foot();
    let basis = complement_frame(host.normal());
    let mut local: Vec<Hyperplane> = Vec::new();
    for (i, h) in p.halfspaces.iter().enumerate() {
        if i == j {
            continue;
        }
        let a = basis.transpose() * h.normal();
        let rhs = h.offset - h.normal().dot(&origin);
        if a.norm() <= tol.rank {
            // Parallel to the host: either vacuous on the facet plane or it
            // excludes the whole facet.
            if rhs <= tol.feas {
                continue;
            }
            return Err(Error::Empty);
        }
        local.push(normalize_halfspace(&a, rhs, HalfspaceSense::Ge, tol)?);
    }
    let facet = Polytope::from_halfspaces(local, tol)?;
    Ok((facet, origin, basis))
}

/// d-dimensional volume by recursive cone decomposition from the vertex
/// centroid over the facets; facet volumes recurse in local coordinates.
pub fn polytope_volume(p: &Polytope, tol: &Tolerances) -> Result<f64> {
    let d = p.dim;
    if d == 1 {
        let vs = enumerate_vertices(p, tol)?;
        let xs: Vec<f64> = vs.vertices.iter().map(|v| v[0]).collect();
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return Ok(hi - lo);
    }
    let vs = enumerate_vertices(p, tol)?;
    let mut centroid = DVector::zeros(d);
    for v in &vs.vertices {
        centroid += v;
    }
    centroid /= vs.vertices.len() as f64;

    let mut vol = 0.0;
    for j in 0..p.halfspaces.len() {
        let (facet, _, _) = facet_subpolytope(p, j, tol)?;
        let height = signed_distance(&centroid, &p.halfspaces[j])?;
        vol += height * polytope_volume(&facet, tol)? / d as f64;
    }
    Ok(vol)
}

/// (d-1)-volume of facet `j`. In dimension 1 the facets are points, whose
/// 0-dimensional volume is 1.
pub fn facet_volume(p: &Polytope, j: usize, tol: &Tolerances) -> Result<f64> {
    if p.dim == 1 {
        let _ = j;
        return Ok(1.0);
    }
    let (facet, _, _) = facet_subpolytope(p, j, tol)?;
    polytope_volume(&facet, tol)
}

/// Sum of all facet volumes (the surface area in dimension 3).
pub fn surface_area(p: &Polytope, tol: &Tolerances) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..p.halfspaces.len() {
        total += facet_volume(p, j, tol)?;
    }
    Ok(total)
}

/// Absolute rank of a family of vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbsoluteRank {
    /// One less than the size of the smallest linearly dependent subfamily.
    pub rank: usize,
    /// True when no subfamily is dependent (only possible for m <= d); the
    /// rank is then capped at min(m, d) by convention.
    pub saturated: bool,
}

/// Smallest-dependent-subfamily rank: returns `s - 1` where `s` is the size
/// of the smallest linearly dependent subfamily of `normals`.
///
/// An empty family has rank 0. When every subfamily is independent (m <= d
/// in general position) the defining condition is vacuous; `min(m, d)` is
/// returned with `saturated` set.
pub fn absolute_rank(normals: &[DVector<f64>], tol: &Tolerances) -> AbsoluteRank {
    let m = normals.len();
    if m == 0 {
        return AbsoluteRank {
            rank: 0,
            saturated: false,
        };
    }
    let d = normals[0].len();
    // Any d+1 vectors are dependent, so subsets of size up to min(m, d+1)
    // suffice.
    let max_s = m.min(d + 1);
    for s in 2..=max_s {
        let mut subset: Vec<usize> = (0..s).collect();
        loop {
            let family: Vec<DVector<f64>> =
                subset.iter().map(|&i| normals[i].clone()).collect();
            if family_rank(&family, tol.rank) < s {
                return AbsoluteRank {
                    rank: s - 1,
                    saturated: false,
                };
            }
            let mut i = s;
            let mut advanced = false;
            while i > 0 {
                i -= 1;
                if subset[i] != i + m - s {
                    subset[i] += 1;
                    for k in (i + 1)..s {
                        subset[k] = subset[k - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    AbsoluteRank {
        rank: m.min(d),
        saturated: true,
    }
}

// ---------------------------------------------------------------------------
// JSON schema: {"dim": d, "halfspaces": [{"a": [..], "b": x, "sense": "<="|">="}]}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct HalfspaceJson {
    a: Vec<f64>,
    b: f64,
    sense: HalfspaceSense,
}

#[derive(Serialize, Deserialize)]
struct PolytopeJson {
    dim: usize,
    halfspaces: Vec<HalfspaceJson>,
}

/// Parse the polytope JSON schema; the loader normalizes every halfspace and
/// removes redundancy, so the result is always a valid [`Polytope`].
pub fn polytope_from_json(text: &str, tol: &Tolerances) -> Result<Polytope> {
    let raw: PolytopeJson =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
    if raw.dim == 0 {
        return Err(Error::InvalidInput("dim must be positive".into()));
    }
    let mut hs = Vec::with_capacity(raw.halfspaces.len());
    for h in &raw.halfspaces {
        if h.a.len() != raw.dim {
            return Err(Error::DimensionMismatch {
                expected: raw.dim,
                got: h.a.len(),
            });
        }
        hs.push(normalize_halfspace(
            &DVector::from_vec(h.a.clone()),
            h.b,
            h.sense,
            tol,
        )?);
    }
    Polytope::from_halfspaces(hs, tol)
}

/// Emit the polytope JSON schema. Internal halfspaces are already in
/// `<n, x> >= b` form with unit normals, so they serialize as-is and
/// round-trip through the loader unchanged.
pub fn polytope_to_json(p: &Polytope) -> String {
    let raw = PolytopeJson {
        dim: p.dim,
        halfspaces: p
            .halfspaces
            .iter()
            .map(|h| HalfspaceJson {
                a: h.normal.iter().cloned().collect(),
                b: h.offset,
                sense: HalfspaceSense::Ge,
            })
            .collect(),
    };
    serde_json::to_string(&raw).expect("polytope serialization cannot fail")
}
