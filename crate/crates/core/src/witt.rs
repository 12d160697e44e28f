//! Finite-length Witt vectors, the addition polynomials `φ_i`, and ghost maps.
//!
//! Addition over `F_q` and `Z/p^k` runs either through cached symbolic `φ_i`
//! or by lifting to a torsion-free ring, adding ghost components, and
//! reducing back. Both routes are exposed so they can be checked against each
//! other.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::WittError;
use crate::padic::{FieldContext, ZqPoly};

/// Integer polynomial in `X_0..X_{m-1}, Y_0..Y_{m-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymPoly {
    vars: usize,
    /// Exponent vector `[X_0..X_{m-1}, Y_0..Y_{m-1}]` to coefficient; no zeros stored.
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl SymPoly {
    pub fn zero(vars: usize) -> Self {
        SymPoly { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: BigInt) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; 2 * vars], c);
        p
    }

    pub fn x(i: usize, vars: usize) -> Self {
        let mut e = vec![0; 2 * vars];
        e[i] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, BigInt::one());
        p
    }

    pub fn y(i: usize, vars: usize) -> Self {
        let mut e = vec![0; 2 * vars];
        e[vars + i] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, BigInt::one());
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c·monomial`, dropping the term if it cancels.
    pub fn add_term(&mut self, exps: Vec<u32>, c: BigInt) {
        assert_eq!(exps.len(), 2 * self.vars);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &SymPoly) -> SymPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &SymPoly) -> SymPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn mul(&self, other: &SymPoly) -> SymPoly {
        let mut out = SymPoly::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> SymPoly {
        let mut acc = SymPoly::constant(self.vars, BigInt::one());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn scale(&self, c: &BigInt) -> SymPoly {
        let mut out = SymPoly::zero(self.vars);
        for (e, a) in &self.terms {
            out.add_term(e.clone(), a * c);
        }
        out
    }

    pub fn exact_div(&self, d: &BigInt) -> Option<SymPoly> {
        let mut out = SymPoly::zero(self.vars);
        for (e, a) in &self.terms {
            let (q, r) = a.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            out.terms.insert(e.clone(), q);
        }
        Some(out)
    }

    /// Renames `X_j ↦ X_{j+1}`, `Y_j ↦ Y_{j+1}`; the top variables must be unused.
    pub fn shift_indices(&self) -> SymPoly {
        let m = self.vars;
        let mut out = SymPoly::zero(m);
        for (e, c) in &self.terms {
            assert!(e[m - 1] == 0 && e[2 * m - 1] == 0, "top variables must be free");
            let mut s = vec![0; 2 * m];
            for j in 0..m - 1 {
                s[j + 1] = e[j];
                s[m + j + 1] = e[m + j];
            }
            out.add_term(s, c.clone());
        }
        out
    }

    /// Weight of a monomial when `X_i`, `Y_i` have weight `p^i`.
    pub fn weight(&self, exps: &[u32], p: u64) -> u128 {
        let m = self.vars;
        (0..m).map(|i| (exps[i] + exps[m + i]) as u128 * (p as u128).pow(i as u32)).sum()
    }

    fn monomial_text(&self, e: &[u32]) -> String {
        let m = self.vars;
        let mut parts = Vec::new();
        for (k, &d) in e.iter().enumerate() {
            if d == 0 {
                continue;
            }
            let name = if k < m { format!("X{k}") } else { format!("Y{}", k - m) };
            parts.push(if d == 1 { name } else { format!("{name}^{d}") });
        }
        parts.join("*")
    }

    /// Terms in canonical order: total degree descending, then exponent vector descending.
    fn sorted_terms(&self) -> Vec<(&Vec<u32>, &BigInt)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        v
    }
}

impl fmt::Display for SymPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let mono = self.monomial_text(e);
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if idx == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => write!(f, "{mono}")?,
                (false, false) => write!(f, "{mag}*{mono}")?,
            }
        }
        Ok(())
    }
}

/// Arithmetic needed by the ghost recursion: a commutative ring without
/// `p`-torsion in which division by `p^k` can be tested.
trait TorsionFree {
    type E: Clone;
    fn zero(&self) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn pow(&self, a: &Self::E, e: u64) -> Self::E;
    fn mul_int(&self, a: &Self::E, c: &BigInt) -> Self::E;
    fn div_int(&self, a: &Self::E, c: &BigInt) -> Option<Self::E>;
}

struct SymRing(usize);

impl TorsionFree for SymRing {
    type E = SymPoly;
    fn zero(&self) -> SymPoly {
        SymPoly::zero(self.0)
    }
    fn add(&self, a: &SymPoly, b: &SymPoly) -> SymPoly {
        a.add(b)
    }
    fn sub(&self, a: &SymPoly, b: &SymPoly) -> SymPoly {
        a.sub(b)
    }
    fn pow(&self, a: &SymPoly, e: u64) -> SymPoly {
        a.pow(e)
    }
    fn mul_int(&self, a: &SymPoly, c: &BigInt) -> SymPoly {
        a.scale(c)
    }
    fn div_int(&self, a: &SymPoly, c: &BigInt) -> Option<SymPoly> {
        a.exact_div(c)
    }
}

/// `Z[X]/(m)` with exact integer coefficients (plain `Z` when `f = 1`).
struct LiftRing<'a>(&'a FieldContext);

impl TorsionFree for LiftRing<'_> {
    type E = ZqPoly;
    fn zero(&self) -> ZqPoly {
        self.0.zero_poly()
    }
    fn add(&self, a: &ZqPoly, b: &ZqPoly) -> ZqPoly {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }
    fn sub(&self, a: &ZqPoly, b: &ZqPoly) -> ZqPoly {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }
    fn pow(&self, a: &ZqPoly, mut e: u64) -> ZqPoly {
        let mut acc = self.0.one_poly();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.0.mul_exact(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.0.mul_exact(&base, &base);
            }
        }
        acc
    }
    fn mul_int(&self, a: &ZqPoly, c: &BigInt) -> ZqPoly {
        a.iter().map(|x| x * c).collect()
    }
    fn div_int(&self, a: &ZqPoly, c: &BigInt) -> Option<ZqPoly> {
        a.iter()
            .map(|x| {
                let (q, r) = x.div_rem(c);
                r.is_zero().then_some(q)
            })
            .collect()
    }
}

fn ghost<R: TorsionFree>(r: &R, xs: &[R::E], p: u64) -> Vec<R::E> {
    let n = xs.len();
    (0..n)
        .map(|k| {
            let mut w = r.zero();
            for (i, x) in xs.iter().enumerate().take(k + 1) {
                let term = r.pow(x, p.pow((k - i) as u32));
                w = r.add(&w, &r.mul_int(&term, &num_traits::pow(BigInt::from(p), i)));
            }
            w
        })
        .collect()
}

fn from_ghost<R: TorsionFree>(r: &R, ws: &[R::E], p: u64) -> Result<Vec<R::E>, WittError> {
    let mut out: Vec<R::E> = Vec::with_capacity(ws.len());
    for (k, w) in ws.iter().enumerate() {
        let mut rest = w.clone();
        for (i, s) in out.iter().enumerate() {
            let term = r.pow(s, p.pow((k - i) as u32));
            rest = r.sub(&rest, &r.mul_int(&term, &num_traits::pow(BigInt::from(p), i)));
        }
        let pk = num_traits::pow(BigInt::from(p), k);
        out.push(r.div_int(&rest, &pk).ok_or(WittError::NonIntegral(k))?);
    }
    Ok(out)
}

/// Witt sum over a torsion-free ring: add ghost components and invert.
fn ghost_sum<R: TorsionFree>(r: &R, xs: &[R::E], ys: &[R::E], p: u64) -> Result<Vec<R::E>, WittError> {
    let gx = ghost(r, xs, p);
    let gy = ghost(r, ys, p);
    let gs: Vec<R::E> = gx.iter().zip(&gy).map(|(a, b)| r.add(a, b)).collect();
    from_ghost(r, &gs, p)
}

/// Largest `(p, n)` for which `φ_0..φ_n` are expanded symbolically.
pub fn symbolic_supported(p: u64, n: usize) -> bool {
    (p == 2 && n <= 3) || (p == 3 && n <= 2) || n <= 1
}

type PhiCache = Mutex<HashMap<(u64, usize), Arc<Vec<SymPoly>>>>;

fn phi_cache() -> &'static PhiCache {
    static CACHE: OnceLock<PhiCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `φ_0, …, φ_n` in `Z[X_0..X_n, Y_0..Y_n]`, generated once per `(p, n)`.
pub fn phi_polynomials(p: u64, n: usize) -> Result<Arc<Vec<SymPoly>>, WittError> {
    if let Some(hit) = phi_cache().lock().expect("cache lock").get(&(p, n)) {
        return Ok(hit.clone());
    }
    let m = n + 1;
    let xs: Vec<SymPoly> = (0..m).map(|i| SymPoly::x(i, m)).collect();
    let ys: Vec<SymPoly> = (0..m).map(|i| SymPoly::y(i, m)).collect();
    let phis = Arc::new(ghost_sum(&SymRing(m), &xs, &ys, p)?);
    phi_cache().lock().expect("cache lock").insert((p, n), phis.clone());
    Ok(phis)
}

/// Every monomial of `φ_i` has weight `p^i`.
pub fn isobaric_check(phis: &[SymPoly], p: u64) -> bool {
    phis.iter().enumerate().all(|(i, phi)| {
        let target = (p as u128).pow(i as u32);
        phi.terms().all(|(e, _)| phi.weight(e, p) == target)
    })
}

/// `φ_i(X_0..X_i; Y_0..Y_i) − φ_{i−1}(X_1..X_i; Y_1..Y_i)` lies in `(X_0 Y_0)`
/// for every `i ≥ 1`.
pub fn shift_congruence_check(phis: &[SymPoly]) -> bool {
    if phis.len() < 2 {
        return false;
    }
    (1..phis.len()).all(|i| {
        let m = phis[i].vars();
        let diff = phis[i].sub(&phis[i - 1].shift_indices());
        let ok = diff.terms().all(|(e, _)| e[0] >= 1 && e[m] >= 1);
        ok
    })
}

/// Coefficient rings for Witt vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WittRing {
    /// `F_q` for the given context.
    FiniteField(Arc<FieldContext>),
    /// `Z/p^k`.
    ZMod { p: u64, k: u32 },
    /// `Z`, with Witt structure at the prime `p`.
    Integers { p: u64 },
    /// `Z[X_0..X_{m-1}, Y_0..Y_{m-1}]`.
    Symbolic { p: u64, vars: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingElem {
    /// Coefficients mod `p` in the context's monomial basis.
    Fq(Vec<BigInt>),
    Int(BigInt),
    Sym(SymPoly),
}

impl WittRing {
    pub fn finite_field(p: u64, f: u32) -> Result<Self, WittError> {
        FieldContext::new(p, f)
            .map(WittRing::FiniteField)
            .map_err(|_| WittError::UnsupportedRing("invalid finite field"))
    }

    pub fn p(&self) -> u64 {
        match self {
            WittRing::FiniteField(ctx) => ctx.p(),
            WittRing::ZMod { p, .. } | WittRing::Integers { p } | WittRing::Symbolic { p, .. } => *p,
        }
    }

    pub fn is_char_p(&self) -> bool {
        matches!(self, WittRing::FiniteField(_) | WittRing::ZMod { k: 1, .. })
    }

    fn lift_ctx(&self) -> Arc<FieldContext> {
        match self {
            WittRing::FiniteField(ctx) => ctx.clone(),
            _ => FieldContext::new(self.p(), 1).expect("prime p"),
        }
    }

    pub fn zero(&self) -> RingElem {
        self.from_int(&BigInt::zero())
    }

    pub fn one(&self) -> RingElem {
        self.from_int(&BigInt::one())
    }

    pub fn from_int(&self, n: &BigInt) -> RingElem {
        match self {
            WittRing::FiniteField(ctx) => RingElem::Fq(ctx.reduce(ctx.constant_poly(n.clone()), 1)),
            WittRing::ZMod { p, k } => RingElem::Int(n.mod_floor(&num_traits::pow(BigInt::from(*p), *k as usize))),
            WittRing::Integers { .. } => RingElem::Int(n.clone()),
            WittRing::Symbolic { vars, .. } => RingElem::Sym(SymPoly::constant(*vars, n.clone())),
        }
    }

    /// Element of `F_q` from its coefficient list (reduced mod `p`).
    pub fn fq(&self, coeffs: &[i64]) -> Result<RingElem, WittError> {
        match self {
            WittRing::FiniteField(ctx) => {
                if coeffs.len() != ctx.f() as usize {
                    return Err(WittError::LengthMismatch(ctx.f() as usize, coeffs.len()));
                }
                let v = coeffs.iter().map(|&c| BigInt::from(c)).collect();
                Ok(RingElem::Fq(ctx.reduce(v, 1)))
            }
            _ => Err(WittError::RingMismatch),
        }
    }

    /// True if `e` is a reduced element of this ring.
    pub fn contains(&self, e: &RingElem) -> bool {
        match (self, e) {
            (WittRing::FiniteField(ctx), RingElem::Fq(v)) => {
                v.len() == ctx.f() as usize && *v == ctx.reduce(v.clone(), 1)
            }
            (WittRing::ZMod { p, k }, RingElem::Int(n)) => {
                !n.is_negative() && *n < num_traits::pow(BigInt::from(*p), *k as usize)
            }
            (WittRing::Integers { .. }, RingElem::Int(_)) => true,
            (WittRing::Symbolic { vars, .. }, RingElem::Sym(s)) => s.vars() == *vars,
            _ => false,
        }
    }

    pub fn add(&self, a: &RingElem, b: &RingElem) -> RingElem {
        self.binop(a, b, |x, y| x + y, |x, y| x.add(y))
    }

    pub fn sub(&self, a: &RingElem, b: &RingElem) -> RingElem {
        self.binop(a, b, |x, y| x - y, |x, y| x.sub(y))
    }

    pub fn mul(&self, a: &RingElem, b: &RingElem) -> RingElem {
        match (self, a, b) {
            (WittRing::FiniteField(ctx), RingElem::Fq(x), RingElem::Fq(y)) => RingElem::Fq(ctx.mul_mod(x, y, 1)),
            _ => self.binop(a, b, |x, y| x * y, |x, y| x.mul(y)),
        }
    }

    pub fn pow(&self, a: &RingElem, mut e: u64) -> RingElem {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    fn binop(
        &self,
        a: &RingElem,
        b: &RingElem,
        int_op: impl Fn(&BigInt, &BigInt) -> BigInt,
        sym_op: impl Fn(&SymPoly, &SymPoly) -> SymPoly,
    ) -> RingElem {
        match (a, b) {
            (RingElem::Fq(x), RingElem::Fq(y)) => {
                let ctx = match self {
                    WittRing::FiniteField(ctx) => ctx,
                    _ => panic!("F_q element outside a finite field"),
                };
                let v = x.iter().zip(y).map(|(s, t)| int_op(s, t)).collect();
                RingElem::Fq(ctx.reduce(v, 1))
            }
            (RingElem::Int(x), RingElem::Int(y)) => self.from_int(&int_op(x, y)),
            (RingElem::Sym(x), RingElem::Sym(y)) => RingElem::Sym(sym_op(x, y)),
            _ => panic!("mixed ring elements"),
        }
    }

    fn lift(&self, e: &RingElem) -> ZqPoly {
        match e {
            RingElem::Fq(v) => v.clone(),
            RingElem::Int(n) => vec![n.clone()],
            RingElem::Sym(_) => unreachable!("symbolic elements are not lifted"),
        }
    }

    fn reduce_lift(&self, v: ZqPoly) -> RingElem {
        match self {
            WittRing::FiniteField(ctx) => RingElem::Fq(ctx.reduce(v, 1)),
            _ => self.from_int(&v[0]),
        }
    }

    /// Evaluates a symbolic polynomial at `(xs; ys)` in this ring.
    pub fn eval_sym(&self, poly: &SymPoly, xs: &[RingElem], ys: &[RingElem]) -> RingElem {
        let m = poly.vars();
        let mut acc = self.zero();
        for (e, c) in poly.terms() {
            let mut term = self.from_int(c);
            for j in 0..m {
                if e[j] > 0 {
                    term = self.mul(&term, &self.pow(&xs[j], e[j] as u64));
                }
                if e[m + j] > 0 {
                    term = self.mul(&term, &self.pow(&ys[j], e[m + j] as u64));
                }
            }
            acc = self.add(&acc, &term);
        }
        acc
    }
}

/// `(x_0, …, x_n)` over a [`WittRing`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittVector {
    pub ring: WittRing,
    pub components: Vec<RingElem>,
}

impl WittVector {
    pub fn new(ring: WittRing, components: Vec<RingElem>) -> Result<Self, WittError> {
        if components.iter().any(|c| !ring.contains(c)) {
            return Err(WittError::RingMismatch);
        }
        Ok(WittVector { ring, components })
    }

    pub fn zero(ring: &WittRing, len: usize) -> Self {
        WittVector { ring: ring.clone(), components: vec![ring.zero(); len] }
    }

    pub fn from_ints(ring: &WittRing, xs: &[i64]) -> Self {
        WittVector { ring: ring.clone(), components: xs.iter().map(|&x| ring.from_int(&BigInt::from(x))).collect() }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// How [`witt_add_with`] evaluates the sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddPath {
    /// Cached `φ_i` evaluated in the ring.
    Symbolic,
    /// Lift to a torsion-free ring, add ghost components, reduce.
    GhostLift,
}

fn check_pair(a: &WittVector, b: &WittVector) -> Result<(), WittError> {
    if a.ring != b.ring {
        return Err(WittError::RingMismatch);
    }
    if a.len() != b.len() {
        return Err(WittError::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// Witt sum; the symbolic path is used where `φ` is cached-size.
pub fn witt_add(a: &WittVector, b: &WittVector) -> Result<WittVector, WittError> {
    check_pair(a, b)?;
    let path = if a.is_empty() || symbolic_supported(a.ring.p(), a.len() - 1) {
        AddPath::Symbolic
    } else {
        AddPath::GhostLift
    };
    witt_add_with(a, b, path)
}

pub fn witt_add_with(a: &WittVector, b: &WittVector, path: AddPath) -> Result<WittVector, WittError> {
    check_pair(a, b)?;
    let ring = &a.ring;
    let p = ring.p();
    if a.is_empty() {
        return Ok(a.clone());
    }
    if let WittRing::Symbolic { vars, .. } = ring {
        let unwrap = |v: &WittVector| -> Vec<SymPoly> {
            v.components
                .iter()
                .map(|c| match c {
                    RingElem::Sym(s) => s.clone(),
                    _ => unreachable!(),
                })
                .collect()
        };
        let s = ghost_sum(&SymRing(*vars), &unwrap(a), &unwrap(b), p)?;
        return Ok(WittVector { ring: ring.clone(), components: s.into_iter().map(RingElem::Sym).collect() });
    }
    let components = match path {
        AddPath::Symbolic => {
            let phis = phi_polynomials(p, a.len() - 1)?;
            phis.iter().map(|phi| ring.eval_sym(phi, &a.components, &b.components)).collect()
        }
        AddPath::GhostLift => {
            let ctx = ring.lift_ctx();
            let lr = LiftRing(&ctx);
            let xs: Vec<ZqPoly> = a.components.iter().map(|c| ring.lift(c)).collect();
            let ys: Vec<ZqPoly> = b.components.iter().map(|c| ring.lift(c)).collect();
            ghost_sum(&lr, &xs, &ys, p)?.into_iter().map(|v| ring.reduce_lift(v)).collect()
        }
    };
    Ok(WittVector { ring: ring.clone(), components })
}

/// `x + x + ⋯ + x` (`m` summands).
pub fn witt_scalar_multiple(a: &WittVector, m: u64) -> Result<WittVector, WittError> {
    let mut acc = WittVector::zero(&a.ring, a.len());
    for _ in 0..m {
        acc = witt_add(&acc, a)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureMap {
    Verschiebung,
    Frobenius,
}

/// Verschiebung prepends a zero; Frobenius raises components to the `p`-th
/// power and needs characteristic `p`.
pub fn witt_structure_map(a: &WittVector, which: StructureMap) -> Result<WittVector, WittError> {
    match which {
        StructureMap::Verschiebung => {
            let mut components = vec![a.ring.zero()];
            components.extend(a.components.iter().cloned());
            Ok(WittVector { ring: a.ring.clone(), components })
        }
        StructureMap::Frobenius => {
            if !a.ring.is_char_p() {
                return Err(WittError::UnsupportedRing("Frobenius needs characteristic p"));
            }
            let p = a.ring.p();
            Ok(WittVector { ring: a.ring.clone(), components: a.components.iter().map(|c| a.ring.pow(c, p)).collect() })
        }
    }
}

/// Teichmüller vector `(t, 0, …, 0)` of the given length.
pub fn teichmuller_vector(ring: &WittRing, t: RingElem, len: usize) -> Result<WittVector, WittError> {
    if !ring.contains(&t) {
        return Err(WittError::RingMismatch);
    }
    let mut components = vec![ring.zero(); len.max(1)];
    components[0] = t;
    Ok(WittVector { ring: ring.clone(), components })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GhostDirection {
    ToGhost,
    FromGhost,
}

/// Ghost map `w_k = Σ_{i≤k} p^i x_i^{p^{k−i}}` and its inverse, over `Z` or
/// symbolic rings.
pub fn ghost_transform(a: &WittVector, direction: GhostDirection) -> Result<Vec<RingElem>, WittError> {
    let p = a.ring.p();
    match &a.ring {
        WittRing::Integers { .. } => {
            let ctx = a.ring.lift_ctx();
            let lr = LiftRing(&ctx);
            let xs: Vec<ZqPoly> = a.components.iter().map(|c| a.ring.lift(c)).collect();
            let out = match direction {
                GhostDirection::ToGhost => ghost(&lr, &xs, p),
                GhostDirection::FromGhost => from_ghost(&lr, &xs, p)?,
            };
            Ok(out.into_iter().map(|v| RingElem::Int(v[0].clone())).collect())
        }
        WittRing::Symbolic { vars, .. } => {
            let xs: Vec<SymPoly> = a
                .components
                .iter()
                .map(|c| match c {
                    RingElem::Sym(s) => s.clone(),
                    _ => unreachable!(),
                })
                .collect();
            let r = SymRing(*vars);
            let out = match direction {
                GhostDirection::ToGhost => ghost(&r, &xs, p),
                GhostDirection::FromGhost => from_ghost(&r, &xs, p)?,
            };
            Ok(out.into_iter().map(RingElem::Sym).collect())
        }
        _ => Err(WittError::UnsupportedRing("ghost components need a p-torsion-free ring")),
    }
}

/// `φ_n` evaluated at integer arguments by the ghost recursion, without
/// symbolic expansion.
pub fn phi_n_integers(p: u64, xs: &[BigInt], ys: &[BigInt]) -> Result<BigInt, WittError> {
    if xs.len() != ys.len() {
        return Err(WittError::LengthMismatch(xs.len(), ys.len()));
    }
    let ring = WittRing::Integers { p };
    let a = WittVector { ring: ring.clone(), components: xs.iter().cloned().map(RingElem::Int).collect() };
    let b = WittVector { ring, components: ys.iter().cloned().map(RingElem::Int).collect() };
    let s = witt_add_with(&a, &b, AddPath::GhostLift)?;
    match s.components.last() {
        Some(RingElem::Int(n)) => Ok(n.clone()),
        _ => Ok(BigInt::zero()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_examples() {
        let phis = phi_polynomials(2, 1).unwrap();
        assert_eq!(phis[0].to_string(), "X0 + Y0");
        assert_eq!(phis[1].to_string(), "-X0*Y0 + X1 + Y1");
        let phis = phi_polynomials(3, 1).unwrap();
        assert_eq!(phis[1].to_string(), "-X0^2*Y0 - X0*Y0^2 + X1 + Y1");
    }

    #[test]
    fn structure_checks() {
        for (p, n) in [(2, 3), (3, 2)] {
            let phis = phi_polynomials(p, n).unwrap();
            assert!(isobaric_check(&phis, p));
            assert!(shift_congruence_check(&phis));
        }
        let phis = phi_polynomials(2, 2).unwrap();
        let mut bad = phis.to_vec();
        let mut e = vec![0; 6];
        e[1] = 1;
        e[4] = 1;
        bad[1].add_term(e, BigInt::one());
        assert!(!isobaric_check(&bad, 2));
        let mut dropped = phis.to_vec();
        let mut e = vec![0; 6];
        e[0] = 1;
        e[3] = 1;
        dropped[1].add_term(e, BigInt::one());
        // dropping -X0*Y0 from φ_1 leaves φ_2 - φ_1(shifted) with a stray X1*Y1
        assert!(shift_congruence_check(&dropped[..2]));
        assert!(!shift_congruence_check(&dropped));
    }

    #[test]
    fn add_examples() {
        let f2 = WittRing::finite_field(2, 1).unwrap();
        let one = WittVector::from_ints(&f2, &[1, 0]);
        assert_eq!(witt_add(&one, &one).unwrap(), WittVector::from_ints(&f2, &[0, 1]));
        let f3 = WittRing::finite_field(3, 1).unwrap();
        let s = witt_add(&WittVector::from_ints(&f3, &[1, 0]), &WittVector::from_ints(&f3, &[2, 0])).unwrap();
        // [2] = -1 in Z_3, so the Teichmüller sum cancels without a carry
        assert_eq!(s, WittVector::from_ints(&f3, &[0, 0]));
        let s = witt_add(&WittVector::from_ints(&f3, &[1, 0]), &WittVector::from_ints(&f3, &[1, 0])).unwrap();
        assert_eq!(s, WittVector::from_ints(&f3, &[2, 1]));
        let x = WittVector::from_ints(&f3, &[2, 1, 2]);
        assert_eq!(witt_add(&x, &WittVector::zero(&f3, 3)).unwrap(), x);
        let z4 = WittRing::ZMod { p: 2, k: 2 };
        assert_eq!(
            witt_add(&WittVector::from_ints(&z4, &[1]), &WittVector::from_ints(&f2, &[1])),
            Err(WittError::RingMismatch)
        );
        assert_eq!(
            witt_add(&WittVector::from_ints(&z4, &[1]), &WittVector::from_ints(&z4, &[1, 0])),
            Err(WittError::LengthMismatch(1, 2))
        );
    }

    #[test]
    fn structure_maps() {
        let f2 = WittRing::finite_field(2, 1).unwrap();
        let v = witt_structure_map(&WittVector::from_ints(&f2, &[1, 1]), StructureMap::Verschiebung).unwrap();
        assert_eq!(v, WittVector::from_ints(&f2, &[0, 1, 1]));
        let z = WittRing::Integers { p: 2 };
        assert!(matches!(
            witt_structure_map(&WittVector::from_ints(&z, &[1]), StructureMap::Frobenius),
            Err(WittError::UnsupportedRing(_))
        ));
        let t = teichmuller_vector(&f2, f2.one(), 3).unwrap();
        assert_eq!(witt_add(&t, &WittVector::zero(&f2, 3)).unwrap(), WittVector::from_ints(&f2, &[1, 0, 0]));
    }

    #[test]
    fn ghost_examples() {
        let z = WittRing::Integers { p: 2 };
        let g = ghost_transform(&WittVector::from_ints(&z, &[1, 1]), GhostDirection::ToGhost).unwrap();
        assert_eq!(g, vec![RingElem::Int(1.into()), RingElem::Int(3.into())]);
        let t = WittVector::from_ints(&z, &[5, 0, 0]);
        let g = ghost_transform(&t, GhostDirection::ToGhost).unwrap();
        assert_eq!(g, vec![RingElem::Int(5.into()), RingElem::Int(25.into()), RingElem::Int(625.into())]);
        let back = ghost_transform(&WittVector { ring: z.clone(), components: g }, GhostDirection::FromGhost).unwrap();
        assert_eq!(back, t.components);
        let bad = WittVector::from_ints(&z, &[0, 1]);
        assert_eq!(ghost_transform(&bad, GhostDirection::FromGhost), Err(WittError::NonIntegral(1)));
    }

    #[test]
    fn paths_agree() {
        let f4 = WittRing::finite_field(2, 2).unwrap();
        let a = WittVector::new(f4.clone(), vec![f4.fq(&[1, 1]).unwrap(), f4.fq(&[0, 1]).unwrap(), f4.one()]).unwrap();
        let b = WittVector::new(f4.clone(), vec![f4.fq(&[1, 0]).unwrap(), f4.fq(&[1, 1]).unwrap(), f4.zero()]).unwrap();
        assert_eq!(
            witt_add_with(&a, &b, AddPath::Symbolic).unwrap(),
            witt_add_with(&a, &b, AddPath::GhostLift).unwrap()
        );
    }
}
