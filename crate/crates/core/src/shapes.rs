//! Canonical constructions and closed-form fixtures: boxes, simplices, the
//! equiangular cut dodecahedron, a multi-phase pentagon with known phase
//! structure, the roof operator, and the inscribed-ball two-phase test.

use nalgebra::DVector;

use crate::config::Tolerances;
use crate::engine::inner_volume_function;
use crate::error::{Error, Result};
use crate::piecewise::{PiecewisePoly, Polynomial, Smoothness};
use crate::polytope::{
    inradius, normalize_halfspace, polytope_volume, signed_distance, HalfspaceSense, Polytope,
};

/// Golden ratio.
pub const PHI: f64 = 1.618033988749894848204586834365638118_f64;

/// Shape constructions accepted by the `gen` CLI command.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec {
    /// Axis box `|x_i| <= a_i`.
    Rectangle { half_sides: Vec<f64> },
    /// Box with all half-sides equal.
    Cube { half_sides: Vec<f64> },
    /// Right simplex `x >= 0`, `sum x <= 1`.
    Simplex { dim: usize },
    /// Regular simplex with unit circumradius, centered at the origin.
    RegularSimplex { dim: usize },
    /// Regular n-gon given by its apothem (inradius).
    RegularPolygon { sides: usize, apothem: f64 },
    /// Unit-edge regular dodecahedron with one opposite facet pair pushed
    /// inward so that all outer dihedral angles coincide.
    CutDodecahedron,
    /// A fixed pentagon whose erosion passes through two combinatorial
    /// changes before collapse.
    MultiphasePentagon,
    /// Iterated roof over an inner shape.
    RoofOf { inner: Box<ShapeSpec>, depth: usize },
}

/// Build the polytope described by `spec`.
pub fn generate(spec: &ShapeSpec, tol: &Tolerances) -> Result<Polytope> {
    match spec {
        ShapeSpec::Rectangle { half_sides } => make_rectangle(half_sides, tol),
        ShapeSpec::Cube { half_sides } => {
            if half_sides.windows(2).any(|w| (w[0] - w[1]).abs() > 1e-12) {
                return Err(Error::InvalidShapeSpec(
                    "cube half-sides must be equal".into(),
                ));
            }
            make_rectangle(half_sides, tol)
        }
        ShapeSpec::Simplex { dim } => make_right_simplex(*dim, tol),
        ShapeSpec::RegularSimplex { dim } => make_regular_simplex(*dim, tol),
        ShapeSpec::RegularPolygon { sides, apothem } => {
            make_regular_polygon(*sides, *apothem, tol)
        }
        ShapeSpec::CutDodecahedron => make_cut_dodecahedron(tol),
        ShapeSpec::MultiphasePentagon => make_multiphase_polygon(tol),
        ShapeSpec::RoofOf { inner, depth } => {
            if *depth == 0 {
                return Err(Error::InvalidShapeSpec("roof depth must be >= 1".into()));
            }
            let mut p = generate(inner, tol)?;
            for _ in 0..*depth {
                p = make_roof(&p, tol)?;
            }
            Ok(p)
        }
    }
}

/// The box `|x_i| <= a_i`, 2d facets.
pub fn make_rectangle(half_sides: &[f64], tol: &Tolerances) -> Result<Polytope> {
    if half_sides.is_empty() || half_sides.iter().any(|&a| !a.is_finite() || a <= 0.0) {
        return Err(Error::InvalidShapeSpec(
            "rectangle needs positive half-sides".into(),
        ));
    }
    let d = half_sides.len();
    let mut hs = Vec::with_capacity(2 * d);
    for (i, &a) in half_sides.iter().enumerate() {
        for sign in [1.0, -1.0] {
            let mut e = DVector::zeros(d);
            e[i] = sign;
            hs.push(normalize_halfspace(&e, a, HalfspaceSense::Le, tol)?);
        }
    }
    Polytope::from_halfspaces(hs, tol)
}

/// Closed-form V for the box with the given half-sides: two phases, the
/// polynomial `2^d prod(a_i) - 2^d prod(a_i - r)` up to the inradius
/// `min(a_i)`, then the constant volume.
pub fn rectangle_closed_form(half_sides: &[f64]) -> Result<PiecewisePoly> {
    if half_sides.is_empty() || half_sides.iter().any(|&a| !a.is_finite() || a <= 0.0) {
        return Err(Error::InvalidShapeSpec(
            "rectangle needs positive half-sides".into(),
        ));
    }
    let d = half_sides.len();
    let mut a = half_sides.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let g = a[0];
    let volume = a.iter().product::<f64>() * (2f64).powi(d as i32);
    // Expand prod (a_i - r) by convolution with (a_i - r).
    let mut prod = vec![1.0f64];
    for &ai in &a {
        let mut next = vec![0.0; prod.len() + 1];
        for (k, &c) in prod.iter().enumerate() {
            next[k] += c * ai;
            next[k + 1] -= c;
        }
        prod = next;
    }
    let scale = (2f64).powi(d as i32);
    let mut coeffs: Vec<f64> = prod.iter().map(|c| -c * scale).collect();
    coeffs[0] += volume;
    PiecewisePoly::new(
        d,
        vec![0.0, g],
        vec![Polynomial::new(coeffs)],
        None,
        Some(Polynomial::constant(volume)),
    )
}

/// Right simplex `x_i >= 0`, `sum x_i <= 1`.
pub fn make_right_simplex(d: usize, tol: &Tolerances) -> Result<Polytope> {
    if d == 0 {
        return Err(Error::InvalidShapeSpec("dimension must be positive".into()));
    }
    let mut hs = Vec::with_capacity(d + 1);
    for i in 0..d {
        let mut e = DVector::zeros(d);
        e[i] = 1.0;
        hs.push(normalize_halfspace(&e, 0.0, HalfspaceSense::Ge, tol)?);
    }
    let ones = DVector::from_element(d, 1.0);
    hs.push(normalize_halfspace(&ones, 1.0, HalfspaceSense::Le, tol)?);
    Polytope::from_halfspaces(hs, tol)
}

/// Regular d-simplex, unit circumradius, centered at the origin: the facet
/// opposite each vertex direction `u_i` is `<u_i, x> >= -1/d`, so the
/// inradius is 1/d and the insphere touches every facet.
pub fn make_regular_simplex(d: usize, tol: &Tolerances) -> Result<Polytope> {
    if d == 0 {
        return Err(Error::InvalidShapeSpec("dimension must be positive".into()));
    }
    // d+1 unit vectors in R^d with pairwise dot -1/d, from the centered
    // standard basis of R^{d+1} expressed in an orthonormal basis of the
    // sum-zero subspace.
    let n = d + 1;
    let mut span: Vec<DVector<f64>> = Vec::with_capacity(d);
    for i in 0..d {
        let mut v = DVector::from_element(n, -1.0 / n as f64);
        v[i] += 1.0;
        for c in &span {
            let proj = c.dot(&v);
            v -= c * proj;
        }
        span.push(v.normalize());
    }
    let mut hs = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = DVector::from_element(n, -1.0 / n as f64);
        e[i] += 1.0;
        let u = DVector::from_fn(d, |k, _| span[k].dot(&e));
        let u = u.normalize();
        hs.push(normalize_halfspace(&u, -1.0 / d as f64, HalfspaceSense::Ge, tol)?);
    }
    Polytope::from_halfspaces(hs, tol)
}

/// Regular n-gon with the given apothem; the incircle touches every side.
pub fn make_regular_polygon(sides: usize, apothem: f64, tol: &Tolerances) -> Result<Polytope> {
    if sides < 3 || !apothem.is_finite() || apothem <= 0.0 {
        return Err(Error::InvalidShapeSpec(
            "polygon needs >= 3 sides and positive apothem".into(),
        ));
    }
    let mut hs = Vec::with_capacity(sides);
    for k in 0..sides {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / sides as f64;
        let u = DVector::from_vec(vec![theta.cos(), theta.sin()]);
        hs.push(normalize_halfspace(&u, apothem, HalfspaceSense::Le, tol)?);
    }
    Polytope::from_halfspaces(hs, tol)
}

/// Unit-edge regular dodecahedron inradius.
fn dodecahedron_inradius() -> f64 {
    0.5 * ((25.0 + 11.0 * 5f64.sqrt()) / 10.0).sqrt()
}

/// The twelve face directions of the regular dodecahedron (unnormalized):
/// (0, +-1, +-phi) and cyclic permutations. The first two entries are the
/// opposite pair that gets cut.
fn dodecahedron_directions() -> Vec<DVector<f64>> {
    let mut dirs = Vec::with_capacity(12);
    for (a, b) in [(1.0, PHI), (1.0, -PHI), (-1.0, PHI), (-1.0, -PHI)] {
        dirs.push(DVector::from_vec(vec![0.0, a, b]));
        dirs.push(DVector::from_vec(vec![a, b, 0.0]));
        dirs.push(DVector::from_vec(vec![b, 0.0, a]));
    }
    // Put the cut pair (0, 1, phi) and (0, -1, -phi) first.
    dirs.sort_by(|x, y| {
        let key = |v: &DVector<f64>| {
            let is_cut = (v[0].abs() < 1e-12
                && (v[1].abs() - 1.0).abs() < 1e-12
                && v[1] * v[2] > 0.0) as i32;
            -is_cut
        };
        key(x).cmp(&key(y))
    });
    dirs
}

/// Unit-edge regular dodecahedron with the opposite facet pair along
/// (0, 1, phi) translated inward by `sqrt(1 - 2/sqrt(5))`.
///
/// The cut slices off two caps whose new pentagonal faces are regular of
/// side 2/phi, rotated against the removed ones; the remaining ten faces
/// become equiangular pentagons with edges 1, 1, 1/phi, 1/phi, 2/phi. All
/// outer dihedral angles of the result equal arctan 2 and the face lattice
/// keeps the dodecahedral counts (12, 30, 20).
pub fn make_cut_dodecahedron(tol: &Tolerances) -> Result<Polytope> {
    let r_in = dodecahedron_inradius();
    let delta = (1.0 - 2.0 / 5f64.sqrt()).sqrt();
    let mut hs = Vec::with_capacity(12);
    for (i, dir) in dodecahedron_directions().into_iter().enumerate() {
        let offset = if i < 2 { r_in - delta } else { r_in };
        let u = dir.normalize();
        hs.push(normalize_halfspace(&u, offset, HalfspaceSense::Le, tol)?);
    }
    Polytope::from_halfspaces(hs, tol)
}

/// The uncut unit-edge regular dodecahedron.
pub fn make_regular_dodecahedron(tol: &Tolerances) -> Result<Polytope> {
    let r_in = dodecahedron_inradius();
    let mut hs = Vec::with_capacity(12);
    for dir in dodecahedron_directions() {
        let u = dir.normalize();
        hs.push(normalize_halfspace(&u, r_in, HalfspaceSense::Le, tol)?);
    }
    Polytope::from_halfspaces(hs, tol)
}

/// Roof of `p`: the (d+1)-polytope over `p` whose height-h slice is the
/// h-interior of `p`. Halfspaces: the floor `x_{d+1} >= 0` plus one slanted
/// facet `(N_j, -1)/sqrt(2)` per facet of `p`. The implied cap
/// `x_{d+1} <= inradius` is not part of the representation.
pub fn make_roof(p: &Polytope, tol: &Tolerances) -> Result<Polytope> {
    let d = p.dim();
    let mut hs = Vec::with_capacity(p.num_facets() + 1);
    let mut floor = DVector::zeros(d + 1);
    floor[d] = 1.0;
    hs.push(normalize_halfspace(&floor, 0.0, HalfspaceSense::Ge, tol)?);
    for h in p.halfspaces() {
        let mut a = DVector::zeros(d + 1);
        for k in 0..d {
            a[k] = h.normal()[k];
        }
        a[d] = -1.0;
        hs.push(normalize_halfspace(&a, h.offset(), HalfspaceSense::Ge, tol)?);
    }
    Polytope::from_halfspaces(hs, tol)
}

/// `Gamma^depth(p)`.
pub fn iterated_roof(p: &Polytope, depth: usize, tol: &Tolerances) -> Result<Polytope> {
    let mut out = p.clone();
    for _ in 0..depth {
        out = make_roof(&out, tol)?;
    }
    Ok(out)
}

/// A polytope whose facet normals have absolute rank `k` while the inner
/// volume function is exactly of class C^{s-1}: the (k-1)-fold roof of a
/// box in dimension d-k+1 whose smallest half-side (1) has multiplicity
/// s-k+1, with remaining half-sides 2.
pub fn make_rank_class_witness(k: usize, s: usize, d: usize, tol: &Tolerances) -> Result<Polytope> {
    if !(1 <= k && k <= s && s <= d) {
        return Err(Error::InvalidShapeSpec(
            "need 1 <= k <= s <= d".into(),
        ));
    }
    let inner_dim = d - k + 1;
    let min_multiplicity = s - k + 1;
    let mut sides = vec![1.0; min_multiplicity];
    sides.resize(inner_dim, 2.0);
    let rect = make_rectangle(&sides, tol)?;
    iterated_roof(&rect, k - 1, tol)
}

/// Fixed pentagon with two combinatorial changes before collapse:
///
/// ```text
///   x >= 0,  y >= 0,  3x + 4y <= 12,  x + y <= 3.8,  y <= 2.5
/// ```
///
/// A right triangle with incircle radius 1 (legs 4 and 3), with one corner
/// chamfered at 45 degrees and the top corner cut horizontally. The chamfer
/// facet of the eroded pentagon vanishes at r = (2 + sqrt(2))/10, the top
/// facet at r = 1/2, and the remaining triangle collapses at the inradius
/// 1, so V has three polynomial phases before the constant one. See
/// [`pentagon_closed_form`] for the exact pieces.
pub fn make_multiphase_polygon(tol: &Tolerances) -> Result<Polytope> {
    let hs = vec![
        normalize_halfspace(&DVector::from_vec(vec![1.0, 0.0]), 0.0, HalfspaceSense::Ge, tol)?,
        normalize_halfspace(&DVector::from_vec(vec![0.0, 1.0]), 0.0, HalfspaceSense::Ge, tol)?,
        normalize_halfspace(&DVector::from_vec(vec![3.0, 4.0]), 12.0, HalfspaceSense::Le, tol)?,
        normalize_halfspace(&DVector::from_vec(vec![1.0, 1.0]), 3.8, HalfspaceSense::Le, tol)?,
        normalize_halfspace(&DVector::from_vec(vec![0.0, 1.0]), 2.5, HalfspaceSense::Le, tol)?,
    ];
    Polytope::from_halfspaces(hs, tol)
}

/// Hand-derived closed form for [`make_multiphase_polygon`]'s V.
///
/// The eroded pentagon is the eroded triangle (area `6(1-r)^2`) minus the
/// top corner cut (a right triangle of area `(2/3)(1/2 - r)^2` until it
/// vanishes at r = 1/2) minus the chamfer corner cut (similar triangles of
/// area `(9 - 6 sqrt(2)) (r1 - r)^2` until r1 = (2 + sqrt(2))/10). The
/// pentagon area is 433/75.
pub fn pentagon_closed_form() -> PiecewisePoly {
    let s2 = 2f64.sqrt();
    let area = 433.0 / 75.0;
    let r1 = (2.0 + s2) / 10.0;
    let chamfer = 9.0 - 6.0 * s2;
    // V3 on [1/2, 1]: area - 6(1-r)^2.
    let v3 = Polynomial::new(vec![area - 6.0, 12.0, -6.0]);
    // V2 on [r1, 1/2]: V3 + (2/3)(1/2 - r)^2.
    let v2 = Polynomial::new(vec![
        area - 6.0 + 1.0 / 6.0,
        12.0 - 2.0 / 3.0,
        -6.0 + 2.0 / 3.0,
    ]);
    // V1 on [0, r1]: V2 + chamfer * (r1 - r)^2.
    let v1 = Polynomial::new(vec![
        area - 6.0 + 1.0 / 6.0 + chamfer * r1 * r1,
        12.0 - 2.0 / 3.0 - 2.0 * chamfer * r1,
        -6.0 + 2.0 / 3.0 + chamfer,
    ]);
    PiecewisePoly::new(
        2,
        vec![0.0, r1, 0.5, 1.0],
        vec![v1, v2, v3],
        None,
        Some(Polynomial::constant(area)),
    )
    .expect("pentagon closed form is well-formed")
}

/// Report of the inscribed-ball test against the measured volume function.
#[derive(Debug, Clone)]
pub struct DiphaseReport {
    /// Every facet is tangent to the maximal inscribed ball.
    pub inscribed: bool,
    /// The engine output has exactly two phases and measured class d-1.
    pub diphase_and_smooth: bool,
    /// `kappa_i = (-1)^{d-i-1} C(d,i) vol / g^{d-i}` for i = 0..d-1, present
    /// exactly when the ball is inscribed (kappa_i multiplies r^{d-i}).
    pub kappas: Option<Vec<f64>>,
    pub phase_count: usize,
    pub measured_class: Smoothness,
    pub g: f64,
    pub volume: f64,
}

impl DiphaseReport {
    /// The two characterizations must agree for every valid polytope.
    pub fn consistent(&self) -> bool {
        self.inscribed == self.diphase_and_smooth
    }
}

/// Test whether all facets touch the maximal inscribed ball, and verify the
/// equivalence with the volume function being two-phase of maximal
/// smoothness class.
pub fn diphase_inscribed_check(p: &Polytope, tol: &Tolerances) -> Result<DiphaseReport> {
    let d = p.dim();
    let (g, center) = inradius(p, tol)?;
    let slack = tol.lp * 100.0 * (1.0 + g);
    let inscribed = p
        .halfspaces()
        .iter()
        .map(|h| signed_distance(&center, h).unwrap())
        .all(|dist| (dist - g).abs() <= slack);
    let f = inner_volume_function(p, 0.1, tol)?;
    let phase_count = f.v.phase_count();
    let measured_class = f.v.smoothness_class(tol);
    let diphase_and_smooth = phase_count == 2 && measured_class.at_least(d.saturating_sub(1));
    let kappas = if inscribed {
        let volume = polytope_volume(p, tol)?;
        let binom =
            |n: usize, k: usize| (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64);
        Some(
            (0..d)
                .map(|i| {
                    let sign = if (d - i - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
                    sign * binom(d, i) * volume / g.powi((d - i) as i32)
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(DiphaseReport {
        inscribed,
        diphase_and_smooth,
        kappas,
        phase_count,
        measured_class,
        g,
        volume: f.volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiangular::{check_dimensionwise_equiangular, dihedral_angle, face_lattice};
    use crate::polytope::{absolute_rank, enumerate_vertices, facet_volume, surface_area};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn rectangle_constructor() {
        let t = tol();
        let cube = make_rectangle(&[1.0, 1.0, 1.0], &t).unwrap();
        assert_eq!(cube.num_facets(), 6);
        let seg = make_rectangle(&[1.0], &t).unwrap();
        assert_eq!(seg.num_facets(), 2);
        assert!((polytope_volume(&seg, &t).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rectangle_closed_forms() {
        let f = rectangle_closed_form(&[1.0, 2.0, 3.0]).unwrap();
        let p = &f.pieces()[0];
        for (k, e) in [0.0, 88.0, -48.0, 8.0].iter().enumerate() {
            assert!((p.coeff(k) - e).abs() < 1e-12);
        }
        assert!((f.evaluate(5.0).unwrap() - 48.0).abs() < 1e-12);

        let f = rectangle_closed_form(&[1.0, 1.0, 2.0]).unwrap();
        let p = &f.pieces()[0];
        for (k, e) in [0.0, 40.0, -32.0, 8.0].iter().enumerate() {
            assert!((p.coeff(k) - e).abs() < 1e-12);
        }

        let g = 0.7;
        let f = rectangle_closed_form(&[g]).unwrap();
        let p = &f.pieces()[0];
        assert!((p.coeff(1) - 2.0).abs() < 1e-12);
        assert!((f.evaluate(g).unwrap() - 2.0 * g).abs() < 1e-12);
    }

    #[test]
    fn regular_simplex_has_insphere() {
        let t = tol();
        for d in [2usize, 3, 4] {
            let p = make_regular_simplex(d, &t).unwrap();
            assert_eq!(p.num_facets(), d + 1);
            let (g, center) = inradius(&p, &t).unwrap();
            assert!((g - 1.0 / d as f64).abs() < 1e-9, "d = {d}");
            for h in p.halfspaces() {
                let dist = signed_distance(&center, h).unwrap();
                assert!((dist - g).abs() < 1e-8);
            }
            let rank = absolute_rank(&p.normals(), &t);
            assert_eq!(rank.rank, d);
        }
    }

    #[test]
    fn regular_polygon_diphase() {
        let t = tol();
        let hexagon = make_regular_polygon(6, 1.0, &t).unwrap();
        assert_eq!(hexagon.num_facets(), 6);
        let (g, _) = inradius(&hexagon, &t).unwrap();
        assert!((g - 1.0).abs() < 1e-9);
    }

    #[test]
    fn polygon_rank_and_class() {
        // Odd n-gon: no two normals parallel but any three are dependent in
        // the plane, so the absolute rank is 2 and the incircle makes the
        // smoothness bound sharp (class exactly 1 = d - 1). Even n-gons
        // have parallel opposite sides, dropping the rank to 1 while the
        // measured class stays 1.
        let t = tol();
        let pentagon = make_regular_polygon(5, 1.0, &t).unwrap();
        assert_eq!(absolute_rank(&pentagon.normals(), &t).rank, 2);
        let f = inner_volume_function(&pentagon, 0.1, &t).unwrap();
        assert_eq!(f.v.smoothness_class(&t), Smoothness::Class(1));
        assert_eq!(f.v.phase_count(), 2);

        let hexagon = make_regular_polygon(6, 1.0, &t).unwrap();
        assert_eq!(absolute_rank(&hexagon.normals(), &t).rank, 1);
        let f = inner_volume_function(&hexagon, 0.1, &t).unwrap();
        assert_eq!(f.v.smoothness_class(&t), Smoothness::Class(1));
    }

    #[test]
    fn regular_dodecahedron_geometry() {
        let t = tol();
        let p = make_regular_dodecahedron(&t).unwrap();
        assert_eq!(p.num_facets(), 12);
        let lat = face_lattice(&p, &t).unwrap();
        assert_eq!(lat.counts(), vec![1, 12, 30, 20]);
        // Unit edge: volume (15 + 7 sqrt 5)/4.
        let expect = (15.0 + 7.0 * 5f64.sqrt()) / 4.0;
        assert!((polytope_volume(&p, &t).unwrap() - expect).abs() < 1e-8);
    }

    #[test]
    fn cut_dodecahedron_geometry() {
        let t = tol();
        let p = make_cut_dodecahedron(&t).unwrap();
        assert_eq!(p.num_facets(), 12);
        let lat = face_lattice(&p, &t).unwrap();
        assert_eq!(lat.counts(), vec![1, 12, 30, 20]);

        // All outer dihedral angles equal arctan 2.
        let expect = 2f64.atan();
        for i in 0..12 {
            for j in (i + 1)..12 {
                if let Some(a) = dihedral_angle(&p, i, j, &t).unwrap() {
                    assert!((a - expect).abs() < 1e-9, "pair ({i}, {j}): {a}");
                }
            }
        }

        // Facet areas: the two cut faces sqrt(15 - 5 phi), the ten others
        // half of that; total 7 sqrt(15 - 5 phi).
        let unit = (15.0 - 5.0 * PHI).sqrt();
        let mut areas: Vec<f64> = (0..12).map(|j| facet_volume(&p, j, &t).unwrap()).collect();
        areas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for a in &areas[..10] {
            assert!((a - unit / 2.0).abs() < 1e-8, "small face area {a}");
        }
        for a in &areas[10..] {
            assert!((a - unit).abs() < 1e-8, "large face area {a}");
        }
        assert!((surface_area(&p, &t).unwrap() - 7.0 * unit).abs() < 1e-8);

        // The two large (cut) faces are regular pentagons of side 2/phi:
        // a regular pentagon of side s has area s^2 sqrt(25 + 10 sqrt 5)/4.
        let s = 2.0 / PHI;
        let pentagon_area = s * s * (25.0 + 10.0 * 5f64.sqrt()).sqrt() / 4.0;
        assert!((areas[11] - pentagon_area).abs() < 1e-8);

        // Equiangular profile with the documented gamma values.
        let prof = check_dimensionwise_equiangular(&p, 1e-8, &t).unwrap();
        assert!((prof.alphas[1] - expect).abs() < 1e-9);
        assert!((prof.gammas[2] - 1.0).abs() < 1e-12);
        assert!((prof.gammas[1] - (PHI - 1.0)).abs() < 1e-9);
        assert!((prof.gammas[0] - (18.0 - 11.0 * PHI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn roof_of_segment_is_a_triangle() {
        let t = tol();
        let seg = make_rectangle(&[1.0], &t).unwrap();
        let roof = make_roof(&seg, &t).unwrap();
        assert_eq!(roof.dim(), 2);
        assert_eq!(roof.num_facets(), 3);
        let vs = enumerate_vertices(&roof, &t).unwrap();
        assert_eq!(vs.vertices.len(), 3);
        let apex = vs
            .vertices
            .iter()
            .find(|v| v[1] > 0.5)
            .expect("apex exists");
        assert!(apex[0].abs() < 1e-9 && (apex[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn roof_of_square_volume_and_inradius() {
        let t = tol();
        let square = make_rectangle(&[1.0, 1.0], &t).unwrap();
        let roof = make_roof(&square, &t).unwrap();
        assert_eq!(roof.num_facets(), 5);
        assert!((polytope_volume(&roof, &t).unwrap() - 4.0 / 3.0).abs() < 1e-9);
        let (g, _) = inradius(&roof, &t).unwrap();
        assert!((g - (2f64.sqrt() - 1.0)).abs() < 1e-8);
        // Roof raises the absolute rank by one: square has rank 1.
        assert_eq!(absolute_rank(&roof.normals(), &t).rank, 2);
    }

    #[test]
    fn rank_class_witnesses() {
        let t = tol();
        // (k, s, d) -> expected absolute rank k.
        for (k, s, d) in [(1usize, 1usize, 2usize), (1, 2, 3), (2, 2, 3), (2, 3, 4)] {
            let p = make_rank_class_witness(k, s, d, &t).unwrap();
            assert_eq!(p.dim(), d);
            let rank = absolute_rank(&p.normals(), &t);
            assert_eq!(rank.rank, k, "instance ({k},{s},{d})");
        }
        assert!(make_rank_class_witness(3, 2, 4, &t).is_err());
    }

    #[test]
    fn pentagon_fixture_and_closed_form() {
        let t = tol();
        let p = make_multiphase_polygon(&t).unwrap();
        assert_eq!(p.num_facets(), 5);
        let (g, center) = inradius(&p, &t).unwrap();
        assert!((g - 1.0).abs() < 1e-9);
        assert!((center[0] - 1.0).abs() < 1e-8 && (center[1] - 1.0).abs() < 1e-8);

        let area = polytope_volume(&p, &t).unwrap();
        assert!((area - 433.0 / 75.0).abs() < 1e-10);

        let v = pentagon_closed_form();
        assert_eq!(v.phase_count(), 4);
        assert!(v.evaluate(0.0).unwrap().abs() < 1e-12);
        assert!((v.evaluate(1.0).unwrap() - area).abs() < 1e-10);
        assert!(v.is_continuous(&t));
        // First-phase linear coefficient is the perimeter, quadratic the
        // negative sum of outer half-angle tangents.
        let perimeter = surface_area(&p, &t).unwrap();
        assert!((v.pieces()[0].coeff(1) - perimeter).abs() < 1e-9);
        // Outer angles at the five vertices: two right angles, the chamfer
        // corner at 3pi/4, the chamfer-hypotenuse corner with
        // cos(alpha) = 1.4/sqrt(2), and the hypotenuse-top corner with
        // cos(alpha) = 4/5.
        let tan_sum = 1.0
            + (1.0 + 2f64.sqrt())
            + ((1.4 / 2f64.sqrt()).acos() / 2.0).tan()
            + ((4f64 / 5.0).acos() / 2.0).tan()
            + 1.0;
        assert!(
            (v.pieces()[0].coeff(2) + tan_sum).abs() < 1e-9,
            "quadratic {} vs -{}",
            v.pieces()[0].coeff(2),
            tan_sum
        );
    }

    #[test]
    fn pentagon_closed_form_matches_engine() {
        let t = tol();
        let p = make_multiphase_polygon(&t).unwrap();
        let f = inner_volume_function(&p, 0.1, &t).unwrap();
        let expect = pentagon_closed_form();
        assert!(f.v.approx_eq(&expect, &t, 1e-9));
        assert_eq!(f.v.phase_count(), 4);
    }

    #[test]
    fn cut_dodecahedron_volume_regression() {
        // Derived once via polytope_volume and pinned; the engine's W(0),
        // the oracle, and the equiangular constant term all cross-check it.
        let t = tol();
        let p = make_cut_dodecahedron(&t).unwrap();
        assert!((polytope_volume(&p, &t).unwrap() - 6.260384316458176).abs() < 1e-9);
    }

    #[test]
    fn roof_raises_rank_and_class_by_one() {
        let t = tol();
        for half_sides in [vec![1.0], vec![1.0, 1.0], vec![1.0, 2.0]] {
            let p = make_rectangle(&half_sides, &t).unwrap();
            let roof = make_roof(&p, &t).unwrap();
            let rank_p = absolute_rank(&p.normals(), &t).rank;
            let rank_roof = absolute_rank(&roof.normals(), &t).rank;
            assert_eq!(rank_roof, rank_p + 1, "{half_sides:?}");

            let class_p = inner_volume_function(&p, 0.1, &t)
                .unwrap()
                .v
                .smoothness_class(&t);
            let class_roof = inner_volume_function(&roof, 0.1, &t)
                .unwrap()
                .v
                .smoothness_class(&t);
            match (class_p, class_roof) {
                (Smoothness::Class(a), Smoothness::Class(b)) => {
                    assert_eq!(b, a + 1, "{half_sides:?}")
                }
                other => panic!("unexpected classes {other:?}"),
            }
        }
    }

    #[test]
    fn diphase_checks() {
        let t = tol();
        let report = diphase_inscribed_check(&make_rectangle(&[1.0, 1.0, 1.0], &t).unwrap(), &t)
            .unwrap();
        assert!(report.inscribed && report.diphase_and_smooth && report.consistent());
        let k = report.kappas.unwrap();
        assert_eq!(k.len(), 3);
        assert!((k[0] - 8.0).abs() < 1e-9); // kappa_0 r^3
        assert!((k[1] + 24.0).abs() < 1e-9); // kappa_1 r^2
        assert!((k[2] - 24.0).abs() < 1e-9); // kappa_2 r

        let report = diphase_inscribed_check(&make_rectangle(&[1.0, 2.0, 3.0], &t).unwrap(), &t)
            .unwrap();
        assert!(!report.inscribed && !report.diphase_and_smooth && report.consistent());
        assert!(report.kappas.is_none());

        let report = diphase_inscribed_check(&make_regular_simplex(3, &t).unwrap(), &t).unwrap();
        assert!(report.inscribed && report.diphase_and_smooth && report.consistent());
    }

    #[test]
    fn generate_matches_constructors() {
        let t = tol();
        let spec = ShapeSpec::RoofOf {
            inner: Box::new(ShapeSpec::Rectangle {
                half_sides: vec![1.0, 1.0],
            }),
            depth: 1,
        };
        let p = generate(&spec, &t).unwrap();
        assert_eq!(p.dim(), 3);
        assert_eq!(p.num_facets(), 5);
        assert!(generate(
            &ShapeSpec::Cube {
                half_sides: vec![1.0, 2.0]
            },
            &t
        )
        .is_err());
    }
}
