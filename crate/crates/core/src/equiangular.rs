//! Face-lattice construction, dihedral-angle measurement, and the
//! closed-form first-phase polynomial for dimension-wise equiangular
//! polytopes.
//!
//! The closed form expresses the erosion volume W_P near r = 0 through the
//! skeletal sums Omega_k (recursive facet sums of k-face volumes) and the
//! half-angle tangent factors gamma_k derived from the per-dimension
//! dihedral angles. A flag-count variant applies when every (k-1)-face
//! meets the same number of k-faces.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::config::Tolerances;
use crate::engine::inner_volume_function;
use crate::error::{Error, Result};
use crate::lp::{solve_lp, Constraint, LpOutcome, Sense};
use crate::piecewise::Polynomial;
use crate::polytope::{enumerate_vertices, facet_subpolytope, polytope_volume, Polytope};

/// One face of the lattice, carrying its own H-representation in a local
/// orthonormal frame plus the affine embedding into the ambient space.
#[derive(Debug, Clone)]
pub struct FaceNode {
    pub dim: usize,
    /// Local polytope; `None` for vertices.
    pub poly: Option<Polytope>,
    /// global = origin + basis * local.
    pub origin: DVector<f64>,
    pub basis: DMatrix<f64>,
    /// Vertices in ambient coordinates; the identity of the face.
    pub vertices: Vec<DVector<f64>>,
    /// Indices into the next-lower level.
    pub children: Vec<usize>,
    /// dim-dimensional volume (1 for vertices).
    pub volume: f64,
}

/// The full face lattice of a polytope, level by level.
///
/// `levels[i]` holds the faces of dimension `dim - i`; level 0 is the
/// polytope itself, the last level its vertices. Faces reached along
/// different facet chains are identified by vertex-set equality.
#[derive(Debug, Clone)]
pub struct FaceLattice {
    pub dim: usize,
    pub levels: Vec<Vec<FaceNode>>,
}

fn same_vertex_set(a: &[DVector<f64>], b: &[DVector<f64>], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|v| b.iter().any(|w| (v - w).norm() <= tol))
}

/// Build the lattice down to the vertices.
pub fn face_lattice(p: &Polytope, tol: &Tolerances) -> Result<FaceLattice> {
    let d = p.dim();
    let root_vertices = enumerate_vertices(p, tol)?.vertices;
    let root = FaceNode {
        dim: d,
        poly: Some(p.clone()),
        origin: DVector::zeros(d),
        basis: DMatrix::identity(d, d),
        vertices: root_vertices,
        children: Vec::new(),
        volume: polytope_volume(p, tol)?,
    };
    let mut levels: Vec<Vec<FaceNode>> = vec![vec![root]];
    for level in 0..d {
        let k = d - level; // dimension of the current level's faces
        let mut next: Vec<FaceNode> = Vec::new();
        let mut children_of: Vec<Vec<usize>> = vec![Vec::new(); levels[level].len()];
        for (ni, node) in levels[level].iter().enumerate() {
            let poly = node.poly.as_ref().expect("only vertices lack a polytope");
            if k >= 2 {
                for j in 0..poly.num_facets() {
                    let (fp, fo, fb) = facet_subpolytope(poly, j, tol)?;
                    let origin = &node.origin + &node.basis * &fo;
                    let basis = &node.basis * &fb;
                    let local_vertices = enumerate_vertices(&fp, tol)?.vertices;
                    let vertices: Vec<DVector<f64>> = local_vertices
                        .iter()
                        .map(|v| &origin + &basis * v)
                        .collect();
                    let idx = match next
                        .iter()
                        .position(|n| same_vertex_set(&n.vertices, &vertices, tol.vertex))
                    {
                        Some(i) => i,
                        None => {
                            let volume = polytope_volume(&fp, tol)?;
                            next.push(FaceNode {
                                dim: k - 1,
                                poly: Some(fp),
                                origin,
                                basis,
                                vertices,
                                children: Vec::new(),
                                volume,
                            });
                            next.len() - 1
                        }
                    };
                    children_of[ni].push(idx);
                }
            } else {
                // Facets of a 1-face are its two endpoint vertices.
                for h in poly.halfspaces() {
                    let x = h.normal()[0] * h.offset();
                    let point = &node.origin + &node.basis * DVector::from_vec(vec![x]);
                    let vertices = vec![point.clone()];
                    let idx = match next
                        .iter()
                        .position(|n| same_vertex_set(&n.vertices, &vertices, tol.vertex))
                    {
                        Some(i) => i,
                        None => {
                            next.push(FaceNode {
                                dim: 0,
                                poly: None,
                                origin: point,
                                basis: DMatrix::zeros(d, 0),
                                vertices,
                                children: Vec::new(),
                                volume: 1.0,
                            });
                            next.len() - 1
                        }
                    };
                    children_of[ni].push(idx);
                }
            }
        }
        for (ni, ch) in children_of.into_iter().enumerate() {
            levels[level][ni].children = ch;
        }
        levels.push(next);
    }
    Ok(FaceLattice { dim: d, levels })
}

impl FaceLattice {
    /// Number of faces per dimension, from dimension `dim` down to 0.
    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.len()).collect()
    }

    fn level_of_dim(&self, k: usize) -> usize {
        self.dim - k
    }

    /// Skeletal sum: the volume itself at level `dim`, else the sum over
    /// facets of their skeletal sums. Each k-face is counted once per
    /// descending facet chain reaching it, i.e. once per flag on it.
    pub fn skeletal_sum(&self, k: usize) -> f64 {
        assert!(k <= self.dim);
        let target = self.level_of_dim(k);
        let mut paths: Vec<Vec<f64>> = self.levels.iter().map(|l| vec![0.0; l.len()]).collect();
        paths[0][0] = 1.0;
        for level in 0..target {
            for (ni, node) in self.levels[level].iter().enumerate() {
                let weight = paths[level][ni];
                for &c in &node.children {
                    paths[level + 1][c] += weight;
                }
            }
        }
        self.levels[target]
            .iter()
            .enumerate()
            .map(|(i, n)| paths[target][i] * n.volume)
            .sum()
    }

    /// Flag counts per face at dimension `k` (chains from the root).
    pub fn flag_counts(&self, k: usize) -> Vec<f64> {
        let target = self.level_of_dim(k);
        let mut paths: Vec<Vec<f64>> = self.levels.iter().map(|l| vec![0.0; l.len()]).collect();
        paths[0][0] = 1.0;
        for level in 0..target {
            for (ni, node) in self.levels[level].iter().enumerate() {
                let weight = paths[level][ni];
                for &c in &node.children {
                    paths[level + 1][c] += weight;
                }
            }
        }
        paths[target].clone()
    }

    /// Total k-dimensional volume of the k-skeleton.
    pub fn skeleton_volume(&self, k: usize) -> f64 {
        self.levels[self.level_of_dim(k)]
            .iter()
            .map(|n| n.volume)
            .sum()
    }

    /// For each face of dimension `k`, the number of (k+1)-faces containing
    /// it.
    pub fn parent_counts(&self, k: usize) -> Vec<usize> {
        let child_level = self.level_of_dim(k);
        let mut counts = vec![0usize; self.levels[child_level].len()];
        if child_level == 0 {
            return counts;
        }
        for node in &self.levels[child_level - 1] {
            for &c in &node.children {
                counts[c] += 1;
            }
        }
        counts
    }
}

/// Skeletal sum via the recursive definition (memoized per node), the
/// independent route against the flag-count identity.
pub fn skeletal_sum_recursive(lattice: &FaceLattice, k: usize) -> f64 {
    fn rec(
        lattice: &FaceLattice,
        level: usize,
        idx: usize,
        k: usize,
        memo: &mut Vec<Vec<Option<f64>>>,
    ) -> f64 {
        if let Some(v) = memo[level][idx] {
            return v;
        }
        let node = &lattice.levels[level][idx];
        let value = if node.dim == k {
            node.volume
        } else {
            node.children
                .iter()
                .map(|&c| rec(lattice, level + 1, c, k, memo))
                .sum()
        };
        memo[level][idx] = Some(value);
        value
    }
    let mut memo: Vec<Vec<Option<f64>>> = lattice
        .levels
        .iter()
        .map(|l| vec![None; l.len()])
        .collect();
    rec(lattice, 0, 0, k, &mut memo)
}

/// Outer dihedral angle between facets `i` and `j`: `arccos<N_i, N_j>` when
/// the facets share a (d-2)-dimensional ridge, `None` otherwise.
///
/// Adjacency is certified by an LP: a point on both facet planes whose
/// slack against every other facet is strictly positive is a relative
/// interior point of the ridge.
pub fn dihedral_angle(p: &Polytope, i: usize, j: usize, tol: &Tolerances) -> Result<Option<f64>> {
    if i == j || i >= p.num_facets() || j >= p.num_facets() {
        return Err(Error::InvalidInput("facet indices out of range".into()));
    }
    let d = p.dim();
    let hi = &p.halfspaces()[i];
    let hj = &p.halfspaces()[j];
    let cosang = hi.normal().dot(hj.normal());
    if cosang.abs() >= 1.0 - 1e-12 {
        return Ok(None); // parallel planes share no ridge
    }
    // Variables (x, t): maximize t subject to x on both planes and
    // d_l(x) >= t for every other facet.
    let mut cs: Vec<Constraint> = Vec::new();
    for (l, h) in p.halfspaces().iter().enumerate() {
        let mut coeffs = DVector::zeros(d + 1);
        for m in 0..d {
            coeffs[m] = h.normal()[m];
        }
        if l == i || l == j {
            cs.push(Constraint::new(coeffs, Sense::Eq, h.offset()));
        } else {
            coeffs[d] = -1.0;
            cs.push(Constraint::new(coeffs, Sense::Ge, h.offset()));
        }
    }
    let mut obj = DVector::zeros(d + 1);
    obj[d] = 1.0;
    match solve_lp(&obj, &cs, tol)? {
        LpOutcome::Optimal { objective, .. } if objective > tol.feas => {
            Ok(Some(cosang.clamp(-1.0, 1.0).acos()))
        }
        LpOutcome::Optimal { .. } | LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::NumericalFailure("adjacency LP unbounded".into())),
    }
}

/// Per-dimension dihedral data of a dimension-wise equiangular polytope.
#[derive(Debug, Clone)]
pub struct EquiangularProfile {
    /// alpha_2 .. alpha_d (radians), indexed so `alphas[k-2]` is alpha_k.
    pub alphas: Vec<f64>,
    /// gamma_1 .. gamma_d, with gamma_d = 1 and
    /// gamma_k = tan(alpha_{k+1}/2) * ... * tan(alpha_d/2).
    pub gammas: Vec<f64>,
    /// Omega_0 .. Omega_d.
    pub omegas: Vec<f64>,
    /// mu_(1) .. mu_(d) when every (k-1)-face meets the same number of
    /// k-faces; `None` otherwise.
    pub mus: Option<Vec<usize>>,
}

/// Verify that every k-face (2 <= k <= d) is equiangular with a common
/// per-dimension angle; returns the measured profile, or a witness naming
/// the offending level and facet pair as a `NotEquiangular` error.
pub fn check_dimensionwise_equiangular(
    p: &Polytope,
    angle_tol: f64,
    tol: &Tolerances,
) -> Result<EquiangularProfile> {
    let d = p.dim();
    let lattice = face_lattice(p, tol)?;
    let mut alphas: Vec<f64> = Vec::new();
    for k in 2..=d {
        let level = lattice.level_of_dim(k);
        let mut alpha_k: Option<f64> = None;
        for (fi, node) in lattice.levels[level].iter().enumerate() {
            let poly = node.poly.as_ref().unwrap();
            for i in 0..poly.num_facets() {
                for j in (i + 1)..poly.num_facets() {
                    if let Some(angle) = dihedral_angle(poly, i, j, tol)? {
                        match alpha_k {
                            None => alpha_k = Some(angle),
                            Some(a) if (a - angle).abs() > angle_tol => {
                                return Err(Error::NotEquiangular(format!(
                                    "dimension {k}, face {fi}, facet pair ({i}, {j}): \
                                     angle {angle:.9} differs from {a:.9}"
                                )));
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        alphas.push(alpha_k.ok_or_else(|| {
            Error::NumericalFailure(format!("no adjacent facet pair at dimension {k}"))
        })?);
    }

    let mut gammas = vec![1.0; d];
    for k in (1..d).rev() {
        // gammas[k-1] = gamma_k = gamma_{k+1} * tan(alpha_{k+1}/2);
        // alphas[k-1] is alpha_{k+1}.
        gammas[k - 1] = gammas[k] * (alphas[k - 1] / 2.0).tan();
    }
    let omegas: Vec<f64> = (0..=d).map(|k| lattice.skeletal_sum(k)).collect();
    let mut mus: Option<Vec<usize>> = Some(Vec::new());
    for k in 1..=d {
        let counts = lattice.parent_counts(k - 1);
        if !counts.is_empty() && counts.windows(2).all(|w| w[0] == w[1]) {
            if let Some(m) = mus.as_mut() {
                m.push(counts[0]);
            }
        } else {
            mus = None;
            break;
        }
    }
    Ok(EquiangularProfile {
        alphas,
        gammas,
        omegas,
        mus,
    })
}

/// The closed-form first-phase polynomial of the erosion volume W_P of a
/// dimension-wise equiangular polytope, with the interval on which it
/// governs the function (up to the first breakpoint computed by the
/// gliding-arrangement engine, which is sharp).
pub struct EquiangularPolynomial {
    pub poly: Polynomial,
    pub valid_on: (f64, f64),
    pub profile: EquiangularProfile,
}

pub fn equiangular_volume_polynomial(
    p: &Polytope,
    angle_tol: f64,
    tol: &Tolerances,
) -> Result<EquiangularPolynomial> {
    let d = p.dim();
    let profile = check_dimensionwise_equiangular(p, angle_tol, tol)?;
    let poly = closed_form_polynomial(d, &profile.omegas, &profile.gammas);
    let f = inner_volume_function(p, 0.1, tol)?;
    let eps = if f.w.breakpoints().len() > 1 {
        f.w.breakpoints()[1]
    } else {
        f.g
    };
    Ok(EquiangularPolynomial {
        poly,
        valid_on: (0.0, eps),
        profile,
    })
}

/// W(r) = sum_k (-1)^{d-k} Omega_k gamma_{k+1}...gamma_d r^{d-k} / (d-k)!.
fn closed_form_polynomial(d: usize, omegas: &[f64], gammas: &[f64]) -> Polynomial {
    let mut coeffs = vec![0.0; d + 1];
    for k in 0..=d {
        let mut gamma_prod = 1.0;
        for l in (k + 1)..=d {
            gamma_prod *= gammas[l - 1];
        }
        let factorial: f64 = (1..=(d - k)).map(|i| i as f64).product::<f64>().max(1.0);
        let sign = if (d - k).is_multiple_of(2) { 1.0 } else { -1.0 };
        coeffs[d - k] = sign * omegas[k] * gamma_prod / factorial;
    }
    Polynomial::new(coeffs)
}

/// Outcome of the flag-count (uniform-multiplicity) form.
pub enum FlagCountOutcome {
    Form {
        poly: Polynomial,
        mus: Vec<usize>,
        skeleton_vols: Vec<f64>,
    },
    NotUniform {
        k: usize,
        counts: Vec<usize>,
    },
}

/// The flag-count form of the first-phase polynomial: requires every
/// (k-1)-face to meet the same number mu_(k) of k-faces; then
/// Omega_k = mu_(k+1)...mu_(d) vol_k(skeleton_k) and the polynomial agrees
/// with the skeletal-sum form coefficientwise.
pub fn flag_count_form(p: &Polytope, angle_tol: f64, tol: &Tolerances) -> Result<FlagCountOutcome> {
    let d = p.dim();
    let profile = check_dimensionwise_equiangular(p, angle_tol, tol)?;
    let lattice = face_lattice(p, tol)?;
    for k in 1..=d {
        let counts = lattice.parent_counts(k - 1);
        if !counts.windows(2).all(|w| w[0] == w[1]) {
            return Ok(FlagCountOutcome::NotUniform { k, counts });
        }
    }
    let mus: Vec<usize> = (1..=d).map(|k| lattice.parent_counts(k - 1)[0]).collect();
    let skeleton_vols: Vec<f64> = (0..=d).map(|k| lattice.skeleton_volume(k)).collect();
    let omegas: Vec<f64> = (0..=d)
        .map(|k| {
            let mu_prod: f64 = ((k + 1)..=d).map(|l| mus[l - 1] as f64).product();
            mu_prod * skeleton_vols[k]
        })
        .collect();
    let poly = closed_form_polynomial(d, &omegas, &profile.gammas);
    let skeletal = closed_form_polynomial(d, &profile.omegas, &profile.gammas);
    if !poly.approx_eq(&skeletal, tol.coeff * 100.0) {
        return Err(Error::NumericalFailure(
            "flag-count and skeletal-sum forms disagree".into(),
        ));
    }
    Ok(FlagCountOutcome::Form {
        poly,
        mus,
        skeleton_vols,
    })
}

/// Right angle, the dihedral angle of every box.
pub const RIGHT_ANGLE: f64 = PI / 2.0;
