//! Newton and valuation polygons over exact rationals, and their polar duality.
//!
//! A polygon stores its corner points (ascending in `X`) and the lines carrying
//! its sides. A Newton polygon built from finitely many coefficients has one
//! segment between each pair of consecutive vertices. A valuation polygon is a
//! minimum of lines, so it also has an unbounded ray at each end. Duality swaps
//! the two descriptions: vertices become lines and lines become vertices.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::PolygonError;

pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn q_big(n: BigInt) -> Q {
    Q::from_integer(n)
}

/// Exact fraction text: `"3"` or `"-7/2"`.
pub fn q_to_string(x: &Q) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: Q,
    pub y: Q,
}

impl Point {
    pub fn new(x: Q, y: Q) -> Self {
        Point { x, y }
    }

    pub fn ints(x: i64, y: i64) -> Self {
        Point { x: q_int(x), y: q_int(y) }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", q_to_string(&self.x), q_to_string(&self.y))
    }
}

/// The line `Y = slope·X + intercept`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Line {
    pub slope: Q,
    pub intercept: Q,
}

impl Line {
    pub fn new(slope: Q, intercept: Q) -> Self {
        Line { slope, intercept }
    }

    fn through(a: &Point, b: &Point) -> Self {
        let slope = (&b.y - &a.y) / (&b.x - &a.x);
        let intercept = &a.y - &slope * &a.x;
        Line { slope, intercept }
    }

    pub fn at(&self, x: &Q) -> Q {
        &self.slope * x + &self.intercept
    }

    fn meet(&self, other: &Line) -> Point {
        let x = (&other.intercept - &self.intercept) / (&self.slope - &other.slope);
        let y = self.at(&x);
        Point { x, y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolygonKind {
    NewtonConvex,
    ValuationConcave,
}

impl PolygonKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolygonKind::NewtonConvex => "newton",
            PolygonKind::ValuationConcave => "valuation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygon {
    pub kind: PolygonKind,
    /// Corner points, ascending in `X`.
    pub vertices: Vec<Point>,
    /// Side lines, left to right. Either one segment per adjacent vertex pair
    /// (`vertices.len() - 1` lines) or additionally a ray at each end
    /// (`vertices.len() + 1` lines).
    pub sides: Vec<Line>,
}

impl Polygon {
    pub fn is_unbounded(&self) -> bool {
        self.sides.len() == self.vertices.len() + 1
    }

    /// Reflection `(X, Y) ↦ (X, −Y)`; convex and concave swap.
    pub fn negate(&self) -> Polygon {
        Polygon {
            kind: match self.kind {
                PolygonKind::NewtonConvex => PolygonKind::ValuationConcave,
                PolygonKind::ValuationConcave => PolygonKind::NewtonConvex,
            },
            vertices: self.vertices.iter().map(|v| Point::new(v.x.clone(), -&v.y)).collect(),
            sides: self.sides.iter().map(|l| Line::new(-&l.slope, -&l.intercept)).collect(),
        }
    }

    /// Vertices with `|X| < bound`.
    pub fn vertices_within(&self, bound: &Q) -> Vec<Point> {
        self.vertices.iter().filter(|v| v.x.abs() < *bound).cloned().collect()
    }

    /// Value of a valuation polygon at `x` (minimum over its lines).
    pub fn eval_min(&self, x: &Q) -> Option<Q> {
        self.sides.iter().map(|l| l.at(x)).min()
    }

    /// CSV export: header `x,y`, then one exact-fraction row per vertex.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "y"]).expect("in-memory write");
        for v in &self.vertices {
            w.write_record([q_to_string(&v.x), q_to_string(&v.y)]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind.name(),
            "vertices": self.vertices.iter()
                .map(|v| json!({"x": q_to_string(&v.x), "y": q_to_string(&v.y)}))
                .collect::<Vec<_>>(),
            "sides": self.sides.iter()
                .map(|l| json!({"slope": q_to_string(&l.slope), "intercept": q_to_string(&l.intercept)}))
                .collect::<Vec<_>>(),
        })
    }
}

fn cross(o: &Point, a: &Point, b: &Point) -> Q {
    (&a.x - &o.x) * (&b.y - &o.y) - (&a.y - &o.y) * (&b.x - &o.x)
}

/// Lower convex hull of `(−n, v(b_n))` over the finite valuations.
pub fn newton_polygon(vals: &[(usize, Option<u32>)]) -> Result<Polygon, PolygonError> {
    let mut pts: Vec<Point> = vals.iter().filter_map(|&(n, v)| v.map(|v| Point::ints(-(n as i64), v as i64))).collect();
    if pts.is_empty() {
        return Err(PolygonError::AllInfinite);
    }
    pts.sort_by(|a, b| a.x.cmp(&b.x).then(a.y.cmp(&b.y)));
    pts.dedup_by(|b, a| a.x == b.x);
    let mut hull: Vec<Point> = Vec::new();
    for p in pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &p) <= Q::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    let sides = hull.windows(2).map(|w| Line::through(&w[0], &w[1])).collect();
    Ok(Polygon { kind: PolygonKind::NewtonConvex, vertices: hull, sides })
}

/// Lower envelope of the lines `μ ↦ v(b_n) + nμ`, computed directly.
pub fn valuation_polygon(vals: &[(usize, Option<u32>)]) -> Result<Polygon, PolygonError> {
    let mut lines: Vec<Line> =
        vals.iter().filter_map(|&(n, v)| v.map(|v| Line::new(q_int(n as i64), q_int(v as i64)))).collect();
    if lines.is_empty() {
        return Err(PolygonError::AllInfinite);
    }
    // Leftmost side has the largest slope; among equal slopes keep the lowest.
    lines.sort_by(|a, b| b.slope.cmp(&a.slope).then(a.intercept.cmp(&b.intercept)));
    lines.dedup_by(|b, a| a.slope == b.slope);
    let mut env: Vec<Line> = Vec::new();
    for l in lines {
        while env.len() >= 2 {
            let a = &env[env.len() - 2];
            let b = &env[env.len() - 1];
            // b is redundant if l already undercuts a where b would take over.
            if l.meet(a).x <= b.meet(a).x {
                env.pop();
            } else {
                break;
            }
        }
        env.push(l);
    }
    let vertices = env.windows(2).map(|w| w[0].meet(&w[1])).collect();
    Ok(Polygon { kind: PolygonKind::ValuationConcave, vertices, sides: env })
}

fn geometric_sum(q: u64, i: u32) -> BigInt {
    // (q^i - 1)/(q - 1)
    (0..i).map(|k| num_traits::pow(BigInt::from(q), k as usize)).sum()
}

/// Vertices `V_i = (−q^i, i q^i − (q^i−1)/(q−1))` for `0 ≤ i ≤ i_max`, sides on
/// `Y = −iX − (q^i−1)/(q−1)`.
pub fn closed_form_newton(q: u64, i_max: u32) -> Polygon {
    let mut vertices = Vec::new();
    let mut sides = Vec::new();
    for i in (0..=i_max).rev() {
        let qi = num_traits::pow(BigInt::from(q), i as usize);
        let y = BigInt::from(i) * &qi - geometric_sum(q, i);
        vertices.push(Point::new(q_big(-qi), q_big(y)));
        if i >= 1 {
            sides.push(Line::new(q_int(-(i as i64)), q_big(-geometric_sum(q, i))));
        }
    }
    Polygon { kind: PolygonKind::NewtonConvex, vertices, sides }
}

/// Concave polygon through the origin: slope 1 for `μ > −1`, slope `q^j` on
/// `(−j−1, −j)`, vertices `(−j, −(q^j−1)/(q−1))` for `1 ≤ j ≤ j_max`.
pub fn closed_form_valuation(q: u64, j_max: u32) -> Polygon {
    let mut vertices = Vec::new();
    let mut sides = Vec::new();
    for j in (0..=j_max).rev() {
        let qj = num_traits::pow(BigInt::from(q), j as usize);
        let intercept = &qj * BigInt::from(j) - geometric_sum(q, j);
        sides.push(Line::new(q_big(qj), q_big(intercept)));
        if j >= 1 {
            vertices.push(Point::new(q_int(-(j as i64)), q_big(-geometric_sum(q, j))));
        }
    }
    Polygon { kind: PolygonKind::ValuationConcave, vertices, sides }
}

/// `σ_j(μ) = q^{j−1}(μ + j − 1) − q^{j−2} − ⋯ − 1`, the side of the valuation
/// polygon over `(−j, −j+1)`.
pub fn sigma_j(q: u64, j: u32, mu: &Q) -> Q {
    assert!(j >= 1);
    let qj1 = q_big(num_traits::pow(BigInt::from(q), (j - 1) as usize));
    qj1 * (mu + q_int(j as i64 - 1)) - q_big(geometric_sum(q, j - 1))
}

/// Polar dual: the vertex `(−i, φ)` becomes the line `Y = iX − φ`, the line
/// `Y = σX + τ` becomes the vertex `(−σ, −τ)`.
pub fn dual_polygon(poly: &Polygon) -> Polygon {
    let sides = poly.vertices.iter().map(|v| Line::new(-&v.x, -&v.y)).collect();
    let vertices = poly.sides.iter().map(|l| Point::new(-&l.slope, -&l.intercept)).collect();
    Polygon { kind: PolygonKind::ValuationConcave, vertices, sides }
}

/// `(slope, horizontal length)` per side of a Newton polygon, from the origin
/// side outwards.
pub fn zero_counts(poly: &Polygon) -> Result<Vec<(Q, Q)>, PolygonError> {
    if poly.kind != PolygonKind::NewtonConvex {
        return Err(PolygonError::WrongKind);
    }
    Ok(poly
        .vertices
        .windows(2)
        .rev()
        .map(|w| {
            let slope = (&w[1].y - &w[0].y) / (&w[1].x - &w[0].x);
            (slope, &w[1].x - &w[0].x)
        })
        .collect())
}

/// Largest `i` with `q^i` strictly below `n` (0 if none).
pub fn trusted_index(q: u64, n: usize) -> u32 {
    let mut i = 0;
    let mut qi = 1u128;
    while qi * (q as u128) < n as u128 {
        qi *= q as u128;
        i += 1;
    }
    i
}

/// Outcome of comparing a computed polygon with the closed form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolygonComparison {
    pub trusted: Vec<Point>,
    pub expected: Vec<Point>,
}

impl PolygonComparison {
    pub fn matches(&self) -> bool {
        self.trusted == self.expected
    }
}

/// Compares the computed polygon with the closed form on the vertices that
/// truncation at degree `n` cannot disturb: `|X| ≤ q^i` with `q^i < n`.
pub fn compare_newton(computed: &Polygon, q: u64, n: usize) -> PolygonComparison {
    let i_max = trusted_index(q, n);
    let expected = closed_form_newton(q, i_max).vertices;
    let bound = q_big(num_traits::pow(BigInt::from(q), i_max as usize)) + Q::one();
    PolygonComparison { trusted: computed.vertices_within(&bound), expected }
}

/// Valuation-polygon counterpart of [`compare_newton`]: the vertices at
/// `X = −j`, `j ≤ i`, are duals of trusted Newton sides.
pub fn compare_valuation(computed: &Polygon, q: u64, n: usize) -> PolygonComparison {
    let i_max = trusted_index(q, n);
    let expected = closed_form_valuation(q, i_max).vertices;
    let bound = q_int(i_max as i64 + 1);
    PolygonComparison { trusted: computed.vertices_within(&bound), expected }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i64, i64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::ints(x, y)).collect()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(
            closed_form_newton(2, 5).vertices,
            pts(&[(-32, 129), (-16, 49), (-8, 17), (-4, 5), (-2, 1), (-1, 0)])
        );
        assert_eq!(closed_form_newton(3, 4).vertices, pts(&[(-81, 284), (-27, 68), (-9, 14), (-3, 2), (-1, 0)]));
        assert_eq!(closed_form_newton(2, 0).vertices, pts(&[(-1, 0)]));
        assert_eq!(closed_form_valuation(2, 3).vertices, pts(&[(-3, -7), (-2, -3), (-1, -1)]));
        assert_eq!(closed_form_valuation(3, 2).vertices, pts(&[(-2, -4), (-1, -1)]));
        for m in [-5, -1, 0, 3] {
            assert_eq!(sigma_j(5, 1, &q_int(m)), q_int(m));
        }
    }

    #[test]
    fn zero_count_examples() {
        let z = zero_counts(&closed_form_newton(2, 3)).unwrap();
        assert_eq!(z, vec![(q_int(-1), q_int(1)), (q_int(-2), q_int(2)), (q_int(-3), q_int(4))]);
        let z = zero_counts(&closed_form_newton(3, 2)).unwrap();
        assert_eq!(z, vec![(q_int(-1), q_int(2)), (q_int(-2), q_int(6))]);
        assert!(zero_counts(&closed_form_newton(3, 0)).unwrap().is_empty());
        assert_eq!(zero_counts(&closed_form_valuation(3, 2)), Err(PolygonError::WrongKind));
    }

    #[test]
    fn duality_on_closed_forms() {
        for q in [2, 3, 4, 5] {
            for k in 0..5 {
                let nw = closed_form_newton(q, k);
                let dual = dual_polygon(&nw.negate());
                if k >= 1 {
                    assert_eq!(dual, closed_form_valuation(q, k));
                }
                assert_eq!(dual_polygon(&dual), nw.negate());
            }
        }
        let single = newton_polygon(&[(1, Some(0))]).unwrap();
        let d = dual_polygon(&single.negate());
        assert!(d.vertices.is_empty());
        assert_eq!(d.sides, vec![Line::new(q_int(1), q_int(0))]);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(newton_polygon(&[(1, None)]), Err(PolygonError::AllInfinite));
        let v = valuation_polygon(&[(0, Some(0))]).unwrap();
        assert!(v.vertices.is_empty());
        assert_eq!(v.sides, vec![Line::new(q_int(0), q_int(0))]);
    }

    #[test]
    fn csv_rows() {
        let csv = closed_form_newton(2, 1).to_csv();
        assert_eq!(csv, "x,y\n-2,1\n-1,0\n");
    }
}
