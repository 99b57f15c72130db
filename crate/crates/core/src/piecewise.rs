//! Univariate polynomials and piecewise polynomials with breakpoint
//! management, anchored antidifferentiation, and smoothness measurement.
//!
//! Pieces are stored in the global monomial basis (coefficients of r^k), so
//! linear combinations across different breakpoint partitions reduce to
//! coefficient arithmetic on a merged partition.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Dense univariate polynomial; `coeffs[k]` multiplies `r^k`. The zero
/// polynomial is the empty coefficient list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim(0.0);
        p
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of r^k (0 beyond the stored degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Drop trailing coefficients at or below `threshold` in magnitude.
    pub fn trim(&mut self, threshold: f64) {
        while let Some(&c) = self.coeffs.last() {
            if c.abs() <= threshold {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * r + c;
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Polynomial {
        if self.coeffs.is_empty() {
            return Polynomial::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        for (k, &c) in self.coeffs.iter().enumerate() {
            out.push(c / (k + 1) as f64);
        }
        Polynomial::new(out)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn add_scaled(&mut self, other: &Polynomial, factor: f64) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), 0.0);
        }
        for (k, &c) in other.coeffs.iter().enumerate() {
            self.coeffs[k] += factor * c;
        }
    }

    /// Coefficientwise comparison with a threshold scaled by the larger
    /// coefficient magnitude of the pair.
    pub fn approx_eq(&self, other: &Polynomial, rel: f64) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        let scale = self.max_abs_coeff().max(other.max_abs_coeff()).max(1.0);
        (0..n).all(|k| (self.coeff(k) - other.coeff(k)).abs() <= rel * scale)
    }
}

/// Which side of a breakpoint to evaluate from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Measured differentiability class of a piecewise polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    /// Not even continuous at some breakpoint.
    NotContinuous,
    /// C^s but not C^{s+1}.
    Class(usize),
    /// All segments are the same polynomial.
    Infinite,
}

impl Smoothness {
    /// True when the class is at least `s` (Infinite counts).
    pub fn at_least(&self, s: usize) -> bool {
        match self {
            Smoothness::NotContinuous => false,
            Smoothness::Class(k) => *k >= s,
            Smoothness::Infinite => true,
        }
    }
}

/// Continuous-by-construction piecewise polynomial on an interval, with
/// optional polynomial tails extending the domain to the left and right.
///
/// Invariants enforced at construction: breakpoints strictly increasing,
/// `pieces.len() + 1 == breakpoints.len()`, and every piece degree at most
/// the declared `degree`. Continuity is a property of the producing
/// operation, not of the representation: derivatives of continuous objects
/// may legitimately be discontinuous, so it is checked by
/// [`PiecewisePoly::is_continuous`] rather than asserted here.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    degree: usize,
    breakpoints: Vec<f64>,
    pieces: Vec<Polynomial>,
    left_tail: Option<Polynomial>,
    right_tail: Option<Polynomial>,
}

impl PiecewisePoly {
    pub fn new(
        degree: usize,
        breakpoints: Vec<f64>,
        pieces: Vec<Polynomial>,
        left_tail: Option<Polynomial>,
        right_tail: Option<Polynomial>,
    ) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidInput("no breakpoints".into()));
        }
        if pieces.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidInput(format!(
                "{} pieces do not fit {} breakpoints",
                pieces.len(),
                breakpoints.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        for p in pieces
            .iter()
            .chain(left_tail.iter())
            .chain(right_tail.iter())
        {
            if !p.is_zero() && p.degree() > degree {
                return Err(Error::InvalidInput(format!(
                    "piece degree {} exceeds declared degree {}",
                    p.degree(),
                    degree
                )));
            }
        }
        Ok(PiecewisePoly {
            degree,
            breakpoints,
            pieces,
            left_tail,
            right_tail,
        })
    }

    /// The zero function on [lo, hi].
    pub fn zero_on(lo: f64, hi: f64) -> Self {
        PiecewisePoly {
            degree: 0,
            breakpoints: vec![lo, hi],
            pieces: vec![Polynomial::zero()],
            left_tail: None,
            right_tail: None,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    pub fn left_tail(&self) -> Option<&Polynomial> {
        self.left_tail.as_ref()
    }

    pub fn right_tail(&self) -> Option<&Polynomial> {
        self.right_tail.as_ref()
    }

    pub fn domain_start(&self) -> f64 {
        if self.left_tail.is_some() {
            f64::NEG_INFINITY
        } else {
            self.breakpoints[0]
        }
    }

    pub fn domain_end(&self) -> f64 {
        if self.right_tail.is_some() {
            f64::INFINITY
        } else {
            *self.breakpoints.last().unwrap()
        }
    }

    /// Number of maximal polynomial intervals, counting tails.
    pub fn phase_count(&self) -> usize {
        self.pieces.len()
            + usize::from(self.left_tail.is_some())
            + usize::from(self.right_tail.is_some())
    }

    /// The polynomial governing `r`, approached from `side` at breakpoints.
    pub fn segment_at(&self, r: f64, side: Side) -> Result<&Polynomial> {
        let first = self.breakpoints[0];
        let last = *self.breakpoints.last().unwrap();
        if r < first || (r == first && side == Side::Left) {
            return self.left_tail.as_ref().ok_or(Error::OutOfDomain(r));
        }
        if r > last || (r == last && side == Side::Right) {
            return self.right_tail.as_ref().ok_or(Error::OutOfDomain(r));
        }
        // Count of breakpoints strictly below r (or <= r when approaching
        // from the right picks the later piece).
        let idx = match side {
            Side::Right => self.breakpoints.partition_point(|&b| b <= r),
            Side::Left => self.breakpoints.partition_point(|&b| b < r),
        };
        let i = idx.clamp(1, self.pieces.len()) - 1;
        Ok(&self.pieces[i])
    }

    /// Horner evaluation of the governing piece; at breakpoints either side
    /// works because continuity is an invariant of engine outputs.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        let side = if r >= *self.breakpoints.last().unwrap() {
            Side::Left
        } else {
            Side::Right
        };
        Ok(self.segment_at(r, side)?.eval(r))
    }

    pub fn eval_one_sided(&self, r: f64, side: Side) -> Result<f64> {
        Ok(self.segment_at(r, side)?.eval(r))
    }

    /// Piecewise formal derivative. Breakpoints are preserved; the result may
    /// be discontinuous, which the caller can detect with
    /// [`PiecewisePoly::is_continuous`].
    pub fn derivative(&self) -> PiecewisePoly {
        PiecewisePoly {
            degree: self.degree.saturating_sub(1),
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(Polynomial::derivative).collect(),
            left_tail: self.left_tail.as_ref().map(Polynomial::derivative),
            right_tail: self.right_tail.as_ref().map(Polynomial::derivative),
        }
    }

    /// Piecewise antiderivative whose constants are chained so the result is
    /// continuous everywhere and equals `anchor_value` at `anchor_r`.
    pub fn antiderivative_anchored(&self, anchor_r: f64, anchor_value: f64) -> Result<PiecewisePoly> {
        if anchor_r < self.domain_start() || anchor_r > self.domain_end() {
            return Err(Error::OutOfDomain(anchor_r));
        }
        let mut pieces: Vec<Polynomial> =
            self.pieces.iter().map(Polynomial::antiderivative).collect();
        let mut left_tail = self.left_tail.as_ref().map(Polynomial::antiderivative);
        let mut right_tail = self.right_tail.as_ref().map(Polynomial::antiderivative);

        // Indices: -1 = left tail, 0..n-1 pieces, n = right tail.
        let n = pieces.len() as isize;
        let seg_value = |pieces: &Vec<Polynomial>,
                         lt: &Option<Polynomial>,
                         rt: &Option<Polynomial>,
                         idx: isize,
                         r: f64|
         -> f64 {
            if idx < 0 {
                lt.as_ref().unwrap().eval(r)
            } else if idx >= n {
                rt.as_ref().unwrap().eval(r)
            } else {
                pieces[idx as usize].eval(r)
            }
        };
        let add_const = |pieces: &mut Vec<Polynomial>,
                         lt: &mut Option<Polynomial>,
                         rt: &mut Option<Polynomial>,
                         idx: isize,
                         c: f64| {
            let target = if idx < 0 {
                lt.as_mut().unwrap()
            } else if idx >= n {
                rt.as_mut().unwrap()
            } else {
                &mut pieces[idx as usize]
            };
            target.add_scaled(&Polynomial::constant(1.0), c);
        };

        // Segment containing the anchor.
        let anchor_idx: isize = if anchor_r < self.breakpoints[0] {
            -1
        } else if anchor_r >= *self.breakpoints.last().unwrap() {
            if self.right_tail.is_some() && anchor_r > *self.breakpoints.last().unwrap() {
                n
            } else {
                n - 1
            }
        } else {
            (self.breakpoints.partition_point(|&b| b <= anchor_r) as isize - 1).max(0)
        };
        let lo_idx = if left_tail.is_some() { -1 } else { 0 };
        let hi_idx = if right_tail.is_some() { n } else { n - 1 };
        let anchor_idx = anchor_idx.clamp(lo_idx, hi_idx.max(lo_idx));

        let cur = seg_value(&pieces, &left_tail, &right_tail, anchor_idx, anchor_r);
        add_const(
            &mut pieces,
            &mut left_tail,
            &mut right_tail,
            anchor_idx,
            anchor_value - cur,
        );
        // Chain to the right.
        let mut idx = anchor_idx;
        while idx < hi_idx {
            let b = self.breakpoints[(idx + 1).clamp(0, n) as usize];
            let lv = seg_value(&pieces, &left_tail, &right_tail, idx, b);
            let rv = seg_value(&pieces, &left_tail, &right_tail, idx + 1, b);
            add_const(&mut pieces, &mut left_tail, &mut right_tail, idx + 1, lv - rv);
            idx += 1;
        }
        // Chain to the left.
        let mut idx = anchor_idx;
        while idx > lo_idx {
            let b = self.breakpoints[idx.clamp(0, n - 1) as usize];
            let rv = seg_value(&pieces, &left_tail, &right_tail, idx, b);
            let lv = seg_value(&pieces, &left_tail, &right_tail, idx - 1, b);
            add_const(&mut pieces, &mut left_tail, &mut right_tail, idx - 1, rv - lv);
            idx -= 1;
        }

        PiecewisePoly::new(
            self.degree + 1,
            self.breakpoints.clone(),
            pieces,
            left_tail,
            right_tail,
        )
    }

    /// All junctions (breakpoint, segment before, segment after), including
    /// the tail joints.
    fn junctions(&self) -> Vec<(f64, &Polynomial, &Polynomial)> {
        let mut out = Vec::new();
        if let Some(lt) = &self.left_tail {
            if let Some(first) = self.pieces.first() {
                out.push((self.breakpoints[0], lt, first));
            } else if let Some(rt) = &self.right_tail {
                out.push((self.breakpoints[0], lt, rt));
            }
        }
        for (i, w) in self.pieces.windows(2).enumerate() {
            out.push((self.breakpoints[i + 1], &w[0], &w[1]));
        }
        if let Some(rt) = &self.right_tail {
            if let Some(last) = self.pieces.last() {
                out.push((*self.breakpoints.last().unwrap(), last, rt));
            }
        }
        out
    }

    /// Maximum jump of the `order`-th derivative across all junctions,
    /// together with the magnitude scale used for thresholding it.
    pub fn max_derivative_jump(&self, order: usize) -> (f64, f64) {
        let mut worst = 0.0f64;
        let mut scale = 1.0f64;
        for (b, lp, rp) in self.junctions() {
            let mut l = lp.clone();
            let mut r = rp.clone();
            for _ in 0..order {
                l = l.derivative();
                r = r.derivative();
            }
            worst = worst.max((l.eval(b) - r.eval(b)).abs());
            scale = scale.max(l.max_abs_coeff()).max(r.max_abs_coeff());
        }
        (worst, scale)
    }

    pub fn is_continuous(&self, tol: &Tolerances) -> bool {
        let (jump, scale) = self.max_derivative_jump(0);
        jump <= tol.cont * scale
    }

    /// Largest `s` such that derivatives 0..=s agree at every junction within
    /// `tol.smooth` (scaled); `Infinite` when the normalized object has a
    /// single polynomial segment.
    pub fn smoothness_class(&self, tol: &Tolerances) -> Smoothness {
        let f = self.normalized(tol);
        if f.junctions().is_empty() {
            return Smoothness::Infinite;
        }
        let mut passed: Option<usize> = None;
        for s in 0..=(f.degree + 1) {
            let (jump, scale) = f.max_derivative_jump(s);
            if jump <= tol.smooth * scale {
                passed = Some(s);
            } else {
                break;
            }
        }
        match passed {
            None => Smoothness::NotContinuous,
            Some(s) if s > f.degree => Smoothness::Infinite,
            Some(s) => Smoothness::Class(s),
        }
    }

    /// Canonical form: trims coefficients and coalesces adjacent segments
    /// that hold the same polynomial, so breakpoints are exactly the points
    /// where the function changes polynomial.
    pub fn normalized(&self, tol: &Tolerances) -> PiecewisePoly {
        let mut pieces: Vec<Polynomial> = Vec::new();
        let mut breakpoints: Vec<f64> = Vec::new();
        let scale = self
            .pieces
            .iter()
            .chain(self.left_tail.iter())
            .chain(self.right_tail.iter())
            .fold(0.0f64, |m, p| m.max(p.max_abs_coeff()))
            .max(1.0);
        let trim_at = tol.coeff * scale;
        let clean = |p: &Polynomial| {
            let mut q = p.clone();
            q.trim(trim_at);
            q
        };
        let same = |a: &Polynomial, b: &Polynomial| a.approx_eq(b, tol.coeff);

        for (i, p) in self.pieces.iter().enumerate() {
            let p = clean(p);
            if let Some(last) = pieces.last() {
                if same(last, &p) {
                    continue; // merge: skip the breakpoint between them
                }
            }
            breakpoints.push(self.breakpoints[i]);
            pieces.push(p);
        }
        breakpoints.push(*self.breakpoints.last().unwrap());

        let mut left_tail = self.left_tail.as_ref().map(&clean);
        let mut right_tail = self.right_tail.as_ref().map(&clean);
        // Fold pieces into equal tails.
        if let Some(rt) = &right_tail {
            while pieces.last().map(|p| same(p, rt)) == Some(true) && pieces.len() > 1 {
                pieces.pop();
                breakpoints.pop();
            }
        }
        if let Some(lt) = &left_tail {
            while pieces.first().map(|p| same(p, lt)) == Some(true) && pieces.len() > 1 {
                pieces.remove(0);
                breakpoints.remove(0);
            }
        }
        if pieces.len() == 1 {
            if let (Some(lt), Some(rt)) = (&left_tail, &right_tail) {
                if same(lt, &pieces[0]) && same(rt, &pieces[0]) {
                    // Globally one polynomial.
                    let p = pieces[0].clone();
                    left_tail = Some(p.clone());
                    right_tail = Some(p.clone());
                    pieces[0] = p;
                }
            }
        }
        PiecewisePoly {
            degree: self.degree,
            breakpoints,
            pieces,
            left_tail,
            right_tail,
        }
    }

    /// Equality after normalization: same breakpoints within a scaled
    /// tolerance and coefficientwise-equal segments.
    pub fn approx_eq(&self, other: &PiecewisePoly, tol: &Tolerances, rel: f64) -> bool {
        let a = self.normalized(tol);
        let b = other.normalized(tol);
        if a.breakpoints.len() != b.breakpoints.len() {
            return false;
        }
        let span = (a.breakpoints.last().unwrap() - a.breakpoints[0]).max(1.0);
        if a.breakpoints
            .iter()
            .zip(&b.breakpoints)
            .any(|(x, y)| (x - y).abs() > rel * span)
        {
            return false;
        }
        let seg_eq = |x: &Option<Polynomial>, y: &Option<Polynomial>| match (x, y) {
            (None, None) => true,
            (Some(p), Some(q)) => p.approx_eq(q, rel),
            _ => false,
        };
        a.pieces
            .iter()
            .zip(&b.pieces)
            .all(|(p, q)| p.approx_eq(q, rel))
            && seg_eq(&a.left_tail, &b.left_tail)
            && seg_eq(&a.right_tail, &b.right_tail)
    }

    /// Pointwise linear combination of piecewise polynomials over [lo, hi].
    ///
    /// Every term must cover [lo, hi]. The result carries the merged
    /// breakpoints and no tails.
    pub fn linear_combination(
        terms: &[(f64, &PiecewisePoly)],
        lo: f64,
        hi: f64,
        degree: usize,
        merge_tol: f64,
    ) -> Result<PiecewisePoly> {
        let mut candidates = vec![lo, hi];
        for (_, f) in terms {
            for &b in &f.breakpoints {
                if b > lo + merge_tol && b < hi - merge_tol {
                    candidates.push(b);
                }
            }
        }
        let mut breakpoints = merge_breakpoints(&candidates, merge_tol);
        if breakpoints.len() < 2 {
            return Err(Error::InvalidInput("empty combination interval".into()));
        }
        // Candidates near the ends merge into them; keep the interval exact.
        breakpoints[0] = lo;
        *breakpoints.last_mut().unwrap() = hi;
        let mut pieces = Vec::with_capacity(breakpoints.len() - 1);
        for w in breakpoints.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let mut sum = Polynomial::zero();
            for (c, f) in terms {
                let seg = f.segment_at(mid, Side::Right)?;
                sum.add_scaled(seg, *c);
            }
            pieces.push(sum);
        }
        PiecewisePoly::new(degree, breakpoints, pieces, None, None)
    }

    /// Restrict to [lo, hi] and pad with explicit zero pieces out to the
    /// window [wlo, whi]; used to clamp volume functions outside their
    /// support.
    pub fn clamped_zero_outside(
        &self,
        lo: f64,
        hi: f64,
        wlo: f64,
        whi: f64,
        merge_tol: f64,
    ) -> Result<PiecewisePoly> {
        let mut candidates = vec![wlo, lo, hi, whi];
        for &b in &self.breakpoints {
            if b > lo + merge_tol && b < hi - merge_tol {
                candidates.push(b);
            }
        }
        let mut breakpoints = merge_breakpoints(&candidates, merge_tol);
        breakpoints[0] = wlo;
        *breakpoints.last_mut().unwrap() = whi;
        let mut pieces = Vec::with_capacity(breakpoints.len() - 1);
        for w in breakpoints.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if mid < lo || mid > hi {
                pieces.push(Polynomial::zero());
            } else {
                pieces.push(self.segment_at(mid, Side::Right)?.clone());
            }
        }
        PiecewisePoly::new(self.degree, breakpoints, pieces, None, None)
    }
}

/// Sort and deduplicate breakpoint candidates within `tol`.
pub fn merge_breakpoints(candidates: &[f64], tol: f64) -> Vec<f64> {
    let mut sorted: Vec<f64> = candidates.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(sorted.len());
    for x in sorted {
        match out.last() {
            Some(&last) if (x - last).abs() <= tol => {}
            _ => out.push(x),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// JSON schema:
// {"degree": d, "breakpoints": [..], "pieces": [[c0,..,cd], ..],
//  "left_tail": null | [..], "right_tail": null | [..]}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PiecewiseJson {
    degree: usize,
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<f64>>,
    left_tail: Option<Vec<f64>>,
    right_tail: Option<Vec<f64>>,
}

impl PiecewisePoly {
    pub fn to_json_value(&self) -> serde_json::Value {
        let pad = |p: &Polynomial| -> Vec<f64> {
            let mut v: Vec<f64> = p.coeffs().to_vec();
            v.resize(self.degree + 1, 0.0);
            v
        };
        serde_json::to_value(PiecewiseJson {
            degree: self.degree,
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(pad).collect(),
            left_tail: self.left_tail.as_ref().map(pad),
            right_tail: self.right_tail.as_ref().map(pad),
        })
        .expect("piecewise serialization cannot fail")
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<PiecewisePoly> {
        let raw: PiecewiseJson = serde_json::from_value(v.clone())
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        PiecewisePoly::new(
            raw.degree,
            raw.breakpoints,
            raw.pieces.into_iter().map(Polynomial::new).collect(),
            raw.left_tail.map(Polynomial::new),
            raw.right_tail.map(Polynomial::new),
        )
    }
}
