//! Finite-precision arithmetic in `Z_q` and `Q_q`, `q = p^f`.
//!
//! `Z_q` is modelled as `Z[X]/(m(X), p^N)` where `m` is a monic lift of an
//! irreducible polynomial over `F_p` of degree `f`. A [`PadicScalar`] is either
//! an exact zero, a zero known only modulo some `p^k`, or `p^v·u` with `u` a
//! unit known modulo `p^N` (so the element is known modulo `p^{v+N}`).

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::PadicError;

/// Working precision used when a caller does not ask for one.
pub const DEFAULT_PRECISION: u32 = 64;

/// Coefficients of an element of `Z[X]/(m)` in the monomial basis `1, X, …, X^{f-1}`.
pub type ZqPoly = Vec<BigInt>;

/// An element of the residue field `F_q`, as coefficients mod `p` in the
/// monomial basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Residue(pub Vec<u64>);

impl Residue {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Packs the residue into `0..q` as `Σ c_j p^j`.
    pub fn index(&self, p: u64) -> u64 {
        self.0.iter().rev().fold(0, |acc, &c| acc * p + c)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0[0])
        } else {
            let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

/// p-adic valuation of a value that may be zero or only known to be small.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Valuation {
    Finite(i64),
    /// The value is `≡ 0` modulo `p^k` and nothing more is known.
    AtLeast(i64),
    Infinite,
}

impl Valuation {
    /// A lower bound usable in comparisons; `None` for an exact zero.
    pub fn lower_bound(&self) -> Option<i64> {
        match *self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// True when the value is certainly divisible by `p^t`.
    pub fn at_least(&self, t: i64) -> bool {
        self.lower_bound().is_none_or(|v| v >= t)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Monic defining polynomials (low degree first) for small `(p, f)`.
fn builtin_modulus(p: u64, f: u32) -> Option<Vec<i64>> {
    let m: &[i64] = match (p, f) {
        (_, 1) => &[0, 1],
        (2, 2) => &[1, 1, 1],
        (2, 3) => &[1, 1, 0, 1],
        (2, 4) => &[1, 1, 0, 0, 1],
        (3, 2) => &[2, 2, 1],
        (3, 3) => &[1, 2, 0, 1],
        (3, 4) => &[2, 0, 0, 2, 1],
        (5, 2) => &[2, 4, 1],
        (5, 3) => &[3, 3, 0, 1],
        (5, 4) => &[2, 4, 4, 0, 1],
        (7, 2) => &[3, 6, 1],
        (7, 3) => &[4, 0, 6, 1],
        (7, 4) => &[3, 4, 5, 0, 1],
        _ => return None,
    };
    Some(m.to_vec())
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `p`, `f`, the modulus polynomial and `q = p^f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldContext {
    p: u64,
    f: u32,
    q: u64,
    modulus: Vec<BigInt>,
    p_big: BigInt,
    powers: PowCache,
}

/// Memoised `p^k`; ignored by equality.
#[derive(Default)]
struct PowCache(Mutex<HashMap<u32, Arc<Modulus>>>);

/// Cached `p^k`.
struct Modulus {
    m: BigInt,
}

impl Clone for PowCache {
    fn clone(&self) -> Self {
        PowCache(Mutex::new(self.0.lock().unwrap().clone()))
    }
}

impl std::fmt::Debug for PowCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PowCache")
    }
}

impl PartialEq for PowCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for PowCache {}

impl FieldContext {
    /// Context for `Q_q` using the built-in modulus table (or a brute-force
    /// search for the smallest irreducible when `(p, f)` is not tabulated).
    pub fn new(p: u64, f: u32) -> Result<Arc<Self>, PadicError> {
        if !is_prime(p) {
            return Err(PadicError::InvalidContext(format!("{p} is not prime")));
        }
        if f == 0 {
            return Err(PadicError::InvalidContext("f must be at least 1".into()));
        }
        let modulus = match builtin_modulus(p, f) {
            Some(m) => m,
            None => search_irreducible(p, f)?,
        };
        Self::with_modulus(p, &modulus)
    }

    /// Context with an explicit monic modulus, given low degree first.
    pub fn with_modulus(p: u64, modulus: &[i64]) -> Result<Arc<Self>, PadicError> {
        if !is_prime(p) {
            return Err(PadicError::InvalidContext(format!("{p} is not prime")));
        }
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(PadicError::InvalidContext("modulus must be monic of degree >= 1".into()));
        }
        let f = (modulus.len() - 1) as u32;
        let reduced: Vec<u64> = modulus.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
        if !is_irreducible_mod_p(&reduced, p) {
            return Err(PadicError::InvalidContext(format!("modulus {modulus:?} is reducible modulo {p}")));
        }
        let q = p.checked_pow(f).ok_or_else(|| PadicError::InvalidContext("q does not fit in 64 bits".into()))?;
        Ok(Arc::new(FieldContext {
            p,
            f,
            q,
            modulus: modulus.iter().map(|&c| BigInt::from(c)).collect(),
            p_big: BigInt::from(p),
            powers: PowCache::default(),
        }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p_big(&self) -> &BigInt {
        &self.p_big
    }

    pub fn modulus(&self) -> &[BigInt] {
        &self.modulus
    }

    pub fn p_pow(&self, k: u32) -> BigInt {
        if k < 64 {
            return num_traits::pow(self.p_big.clone(), k as usize);
        }
        self.modulus_for(k).m.clone()
    }

    fn modulus_for(&self, k: u32) -> Arc<Modulus> {
        let mut cache = self.powers.0.lock().unwrap();
        cache
            .entry(k)
            .or_insert_with(|| Arc::new(Modulus { m: num_traits::pow(self.p_big.clone(), k as usize) }))
            .clone()
    }

    /// `c mod p^k` in `[0, p^k)`.
    pub fn mod_p_pow(&self, c: &BigInt, k: u32) -> BigInt {
        c.mod_floor(&self.p_pow(k))
    }

    /// Reduces a polynomial of any degree modulo `m(X)` and `p^k`, with
    /// coefficients in `[0, p^k)`.
    pub fn reduce(&self, mut a: Vec<BigInt>, k: u32) -> ZqPoly {
        let f = self.f as usize;
        while a.len() > f {
            let lead = a.pop().unwrap();
            if lead.is_zero() {
                continue;
            }
            let shift = a.len() - f;
            for (i, m) in self.modulus[..f].iter().enumerate() {
                a[shift + i] -= &lead * m;
            }
        }
        a.resize(f, BigInt::zero());
        for c in a.iter_mut() {
            *c = self.mod_p_pow(c, k);
        }
        a
    }

    /// Exact product in `Z[X]/(m)` without reducing coefficients.
    pub fn mul_exact(&self, a: &[BigInt], b: &[BigInt]) -> ZqPoly {
        let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        let f = self.f as usize;
        while out.len() > f {
            let lead = out.pop().unwrap();
            if lead.is_zero() {
                continue;
            }
            let shift = out.len() - f;
            for (i, m) in self.modulus[..f].iter().enumerate() {
                out[shift + i] -= &lead * m;
            }
        }
        out.resize(f, BigInt::zero());
        out
    }

    pub fn mul_mod(&self, a: &[BigInt], b: &[BigInt], k: u32) -> ZqPoly {
        let prod = self.mul_exact(a, b);
        self.reduce(prod, k)
    }

    pub fn add_mod(&self, a: &[BigInt], b: &[BigInt], k: u32) -> ZqPoly {
        let sum: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(sum, k)
    }

    pub fn sub_mod(&self, a: &[BigInt], b: &[BigInt], k: u32) -> ZqPoly {
        let diff: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.reduce(diff, k)
    }

    pub fn pow_mod(&self, a: &[BigInt], e: &BigUint, k: u32) -> ZqPoly {
        let mut result = self.one_poly();
        let base = self.reduce(a.to_vec(), k);
        for i in (0..e.bits()).rev() {
            result = self.mul_mod(&result, &result, k);
            if e.bit(i) {
                result = self.mul_mod(&result, &base, k);
            }
        }
        self.reduce(result, k)
    }

    pub fn one_poly(&self) -> ZqPoly {
        let mut v = vec![BigInt::zero(); self.f as usize];
        v[0] = BigInt::one();
        v
    }

    pub fn zero_poly(&self) -> ZqPoly {
        vec![BigInt::zero(); self.f as usize]
    }

    pub fn constant_poly(&self, c: BigInt) -> ZqPoly {
        let mut v = self.zero_poly();
        v[0] = c;
        v
    }

    /// Minimum p-adic valuation of the coefficients, or `None` if all vanish.
    pub fn poly_valuation(&self, a: &[BigInt]) -> Option<u32> {
        a.iter().filter(|c| !c.is_zero()).map(|c| int_valuation(c, self.p)).min()
    }

    pub fn residue_of(&self, a: &[BigInt]) -> Residue {
        Residue(a.iter().map(|c| c.mod_floor(&self.p_big).to_u64().expect("residue fits")).collect())
    }

    pub fn residue_to_poly(&self, r: &Residue) -> ZqPoly {
        r.0.iter().map(|&c| BigInt::from(c)).collect()
    }

    /// Residue with packed index `k ∈ 0..q` (base-`p` digits of `k`).
    pub fn residue_from_index(&self, mut k: u64) -> Residue {
        let mut v = Vec::with_capacity(self.f as usize);
        for _ in 0..self.f {
            v.push(k % self.p);
            k /= self.p;
        }
        Residue(v)
    }

    /// All `q` elements of `F_q` in index order.
    pub fn residues(&self) -> impl Iterator<Item = Residue> + '_ {
        (0..self.q).map(move |k| self.residue_from_index(k))
    }

    pub fn residue_mul(&self, a: &Residue, b: &Residue) -> Residue {
        let prod = self.mul_mod(&self.residue_to_poly(a), &self.residue_to_poly(b), 1);
        self.residue_of(&prod)
    }

    pub fn residue_pow(&self, a: &Residue, e: u64) -> Residue {
        let r = self.pow_mod(&self.residue_to_poly(a), &BigUint::from(e), 1);
        self.residue_of(&r)
    }

    /// Teichmüller representative of a residue, modulo `p^k`.
    pub fn teichmuller(&self, r: &Residue, k: u32) -> ZqPoly {
        if r.is_zero() {
            return self.zero_poly();
        }
        let qm1 = BigUint::from(self.q - 1);
        let mut x = self.residue_to_poly(r);
        // Newton on X^q − X; the derivative q·X^{q−1} − 1 is ≡ −1 mod p.
        let mut prec = 1u32;
        while prec < k {
            prec = (2 * prec).min(k);
            let xq1 = self.pow_mod(&x, &qm1, prec);
            let fx = self.sub_mod(&self.mul_mod(&xq1, &x, prec), &x, prec);
            let mut dfx: Vec<BigInt> = xq1.iter().map(|c| c * self.q).collect();
            dfx[0] -= 1;
            let inv = self.inverse_unit(&dfx, prec).expect("unit derivative");
            x = self.sub_mod(&x, &self.mul_mod(&fx, &inv, prec), prec);
        }
        self.reduce(x, k)
    }

    /// Inverse of a unit of `Z_q` modulo `p^k` (Newton lifting from `F_q`).
    pub fn inverse_unit(&self, a: &[BigInt], k: u32) -> Result<ZqPoly, PadicError> {
        let r = self.residue_of(a);
        if r.is_zero() {
            return Err(PadicError::DivisionByZero);
        }
        let inv0 = self.residue_pow(&r, self.q - 2);
        let mut y = self.residue_to_poly(&inv0);
        let mut prec = 1u32;
        let two = self.constant_poly(BigInt::from(2));
        while prec < k {
            prec = (prec * 2).min(k);
            let ay = self.mul_mod(a, &y, prec);
            let corr = self.sub_mod(&two, &ay, prec);
            y = self.mul_mod(&y, &corr, prec);
        }
        Ok(self.reduce(y, k))
    }
}

/// `v_p(n)` for nonzero `n`.
pub fn int_valuation(n: &BigInt, p: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// Splits a nonzero integer as `p^v · c` with `p ∤ c`.
pub fn split_p_power(n: &BigInt, p: u64) -> (u32, BigInt) {
    let v = int_valuation(n, p);
    (v, n / num_traits::pow(BigInt::from(p), v as usize))
}

fn poly_rem_mod_p(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    // b monic
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &bc) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p * p - (lead * bc) % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Brute-force irreducibility test over `F_p`: no monic factor of degree up to half.
pub fn is_irreducible_mod_p(poly: &[u64], p: u64) -> bool {
    let deg = poly.len() - 1;
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for k in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut kk = k;
            for _ in 0..d {
                g.push(kk % p);
                kk /= p;
            }
            g.push(1);
            if poly_rem_mod_p(poly, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn search_irreducible(p: u64, f: u32) -> Result<Vec<i64>, PadicError> {
    let count = p
        .checked_pow(f)
        .filter(|&c| c <= 1 << 20)
        .ok_or_else(|| PadicError::InvalidContext(format!("q = {p}^{f} too large for search")))?;
    for k in 0..count {
        let mut g: Vec<u64> = Vec::with_capacity(f as usize + 1);
        let mut kk = k;
        for _ in 0..f {
            g.push(kk % p);
            kk /= p;
        }
        g.push(1);
        if is_irreducible_mod_p(&g, p) {
            return Ok(g.into_iter().map(|c| c as i64).collect());
        }
    }
    Err(PadicError::InvalidContext("no irreducible polynomial found".into()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    /// Zero; `abs = None` means exact, `Some(k)` means known only modulo `p^k`.
    Zero {
        abs: Option<i64>,
    },
    Nonzero {
        val: i64,
        unit: ZqPoly,
        prec: u32,
    },
}

/// Element of `Q_q` at finite precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicScalar {
    ctx: Arc<FieldContext>,
    repr: Repr,
}

impl PadicScalar {
    pub fn zero(ctx: &Arc<FieldContext>) -> Self {
        PadicScalar { ctx: ctx.clone(), repr: Repr::Zero { abs: None } }
    }

    /// Zero known only modulo `p^k`.
    pub fn approx_zero(ctx: &Arc<FieldContext>, k: i64) -> Self {
        PadicScalar { ctx: ctx.clone(), repr: Repr::Zero { abs: Some(k) } }
    }

    pub fn one(ctx: &Arc<FieldContext>, prec: u32) -> Self {
        Self::from_int(ctx, &BigInt::one(), prec)
    }

    pub fn from_int(ctx: &Arc<FieldContext>, n: &BigInt, prec: u32) -> Self {
        Self::from_poly_exact(ctx, ctx.constant_poly(n.clone()), prec)
    }

    /// `num/den ∈ Q_p ⊂ Q_q` with `prec` digits of relative precision.
    pub fn from_rational(ctx: &Arc<FieldContext>, num: &BigInt, den: &BigInt, prec: u32) -> Result<Self, PadicError> {
        if den.is_zero() {
            return Err(PadicError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self::zero(ctx));
        }
        let (vn, un) = split_p_power(num, ctx.p);
        let (vd, ud) = split_p_power(den, ctx.p);
        let pk = ctx.p_pow(prec);
        let ud_inv = ud.mod_floor(&pk).modinv(&pk).expect("unit part of the denominator is invertible");
        let unit = (un * ud_inv).mod_floor(&pk);
        Ok(PadicScalar {
            ctx: ctx.clone(),
            repr: Repr::Nonzero { val: vn as i64 - vd as i64, unit: ctx.constant_poly(unit), prec },
        })
    }

    /// An exactly known element of `Z[X]/(m)` stored with `prec` relative digits.
    pub fn from_poly_exact(ctx: &Arc<FieldContext>, a: ZqPoly, prec: u32) -> Self {
        match ctx.poly_valuation(&a) {
            None => Self::zero(ctx),
            Some(v) => {
                let pv = ctx.p_pow(v);
                let unit: Vec<BigInt> = a.iter().map(|c| c / &pv).collect();
                PadicScalar {
                    ctx: ctx.clone(),
                    repr: Repr::Nonzero { val: v as i64, unit: ctx.reduce(unit, prec), prec },
                }
            }
        }
    }

    /// `p^shift · a` where `a` is known modulo `p^k`.
    pub fn from_poly_mod(ctx: &Arc<FieldContext>, a: ZqPoly, k: u32, shift: i64) -> Self {
        let a = ctx.reduce(a, k);
        match ctx.poly_valuation(&a) {
            None => Self::approx_zero(ctx, shift + k as i64),
            Some(v) => {
                let pv = ctx.p_pow(v);
                let unit: Vec<BigInt> = a.iter().map(|c| c / &pv).collect();
                let prec = k - v;
                PadicScalar {
                    ctx: ctx.clone(),
                    repr: Repr::Nonzero { val: shift + v as i64, unit: ctx.reduce(unit, prec), prec },
                }
            }
        }
    }

    /// `Σ [d_i] p^{start+i}` built from base-`p` style digit representatives
    /// (each `d_i ∈ 0..q` packed as in [`FieldContext::residue_from_index`]).
    pub fn from_digits(ctx: &Arc<FieldContext>, start: i64, digits: &[u64], prec: u32) -> Self {
        let mut acc = ctx.zero_poly();
        let mut scale = BigInt::one();
        for &d in digits {
            let r = ctx.residue_to_poly(&ctx.residue_from_index(d));
            for (a, c) in acc.iter_mut().zip(r) {
                *a += c * &scale;
            }
            scale *= ctx.p_big();
        }
        let x = Self::from_poly_exact(ctx, acc, prec);
        x.mul_p_power(start)
    }

    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { abs: None })
    }

    /// True for exact zeros and for zeros known modulo some power of `p`.
    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// Valuation of a nonzero element, `None` for (approximate) zeros.
    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Nonzero { val, .. } => Some(*val),
            Repr::Zero { .. } => None,
        }
    }

    pub fn valuation_info(&self) -> Valuation {
        match &self.repr {
            Repr::Nonzero { val, .. } => Valuation::Finite(*val),
            Repr::Zero { abs: Some(k) } => Valuation::AtLeast(*k),
            Repr::Zero { abs: None } => Valuation::Infinite,
        }
    }

    /// Relative precision of a nonzero element.
    pub fn precision(&self) -> Option<u32> {
        match &self.repr {
            Repr::Nonzero { prec, .. } => Some(*prec),
            Repr::Zero { .. } => None,
        }
    }

    /// The element is known modulo `p^{abs_precision}`; `None` if exact zero.
    pub fn abs_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Nonzero { val, prec, .. } => Some(val + *prec as i64),
            Repr::Zero { abs } => *abs,
        }
    }

    pub fn unit(&self) -> Option<&ZqPoly> {
        match &self.repr {
            Repr::Nonzero { unit, .. } => Some(unit),
            Repr::Zero { .. } => None,
        }
    }

    /// Unit digits mod `p` of a nonzero element: the leading Teichmüller digit.
    pub fn leading_residue(&self) -> Option<Residue> {
        self.unit().map(|u| self.ctx.residue_of(u))
    }

    fn check_ctx(&self, other: &Self) -> Result<(), PadicError> {
        if Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx {
            Ok(())
        } else {
            Err(PadicError::ContextMismatch)
        }
    }

    /// Sum with standard precision propagation; full cancellation yields an
    /// approximate zero.
    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_ctx(other)?;
        let (a_abs, b_abs) = (self.abs_precision(), other.abs_precision());
        let abs = match (a_abs, b_abs) {
            (None, _) if self.is_exact_zero() => return Ok(other.clone()),
            (_, None) if other.is_exact_zero() => return Ok(self.clone()),
            (Some(a), Some(b)) => a.min(b),
            _ => unreachable!(),
        };
        let ctx = &self.ctx;
        let (va, vb) = (self.valuation(), other.valuation());
        let base = match (va, vb) {
            (Some(x), Some(y)) => x.min(y),
            (Some(x), None) => x.min(abs),
            (None, Some(y)) => y.min(abs),
            (None, None) => return Ok(Self::approx_zero(ctx, abs)),
        };
        if abs <= base {
            return Ok(Self::approx_zero(ctx, abs));
        }
        let k = (abs - base) as u32;
        let mut sum = ctx.zero_poly();
        for x in [self, other] {
            if let Repr::Nonzero { val, unit, .. } = &x.repr {
                let shift = (val - base) as u32;
                if shift >= k {
                    continue;
                }
                let s = ctx.p_pow(shift);
                for (acc, c) in sum.iter_mut().zip(unit) {
                    *acc += c * &s;
                }
            }
        }
        Ok(Self::from_poly_mod(ctx, sum, k, base))
    }

    pub fn neg(&self) -> Self {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Nonzero { val, unit, prec } => {
                let neg: Vec<BigInt> = unit.iter().map(|c| -c).collect();
                PadicScalar {
                    ctx: self.ctx.clone(),
                    repr: Repr::Nonzero { val: *val, unit: self.ctx.reduce(neg, *prec), prec: *prec },
                }
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_ctx(other)?;
        let ctx = &self.ctx;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Zero { abs: None }, _) | (_, Repr::Zero { abs: None }) => Self::zero(ctx),
            (Repr::Zero { abs: Some(a) }, Repr::Zero { abs: Some(b) }) => Self::approx_zero(ctx, a + b),
            (Repr::Zero { abs: Some(a) }, Repr::Nonzero { val, .. })
            | (Repr::Nonzero { val, .. }, Repr::Zero { abs: Some(a) }) => Self::approx_zero(ctx, a + val),
            (Repr::Nonzero { val: va, unit: ua, prec: pa }, Repr::Nonzero { val: vb, unit: ub, prec: pb }) => {
                let prec = (*pa).min(*pb);
                PadicScalar {
                    ctx: ctx.clone(),
                    repr: Repr::Nonzero { val: va + vb, unit: ctx.mul_mod(ua, ub, prec), prec },
                }
            }
        })
    }

    pub fn inv(&self) -> Result<Self, PadicError> {
        match &self.repr {
            Repr::Zero { abs: None } => Err(PadicError::DivisionByZero),
            Repr::Zero { abs: Some(k) } => {
                Err(PadicError::InsufficientPrecision(format!("cannot invert a value known only to be 0 mod p^{k}")))
            }
            Repr::Nonzero { val, unit, prec } => Ok(PadicScalar {
                ctx: self.ctx.clone(),
                repr: Repr::Nonzero { val: -val, unit: self.ctx.inverse_unit(unit, *prec)?, prec: *prec },
            }),
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, PadicError> {
        self.mul(&other.inv()?)
    }

    /// `self^e`. For a unit known modulo `p^N` the power is known modulo
    /// `p^{N + v_p(e)}`.
    pub fn pow(&self, e: &BigUint) -> Self {
        let ctx = &self.ctx;
        if e.is_zero() {
            return Self::one(ctx, self.precision().unwrap_or(DEFAULT_PRECISION));
        }
        let e_big = BigInt::from(e.clone());
        match &self.repr {
            Repr::Zero { abs: None } => self.clone(),
            Repr::Zero { abs: Some(k) } => {
                let e = e.to_i64().unwrap_or(i64::MAX);
                Self::approx_zero(ctx, k.saturating_mul(e))
            }
            Repr::Nonzero { val, unit, prec } => {
                let gain = int_valuation(&e_big, ctx.p);
                let new_prec = prec + gain;
                let e_i = e.to_i64().expect("exponent fits in i64");
                PadicScalar {
                    ctx: ctx.clone(),
                    repr: Repr::Nonzero { val: val * e_i, unit: ctx.pow_mod(unit, e, new_prec), prec: new_prec },
                }
            }
        }
    }

    pub fn pow_u64(&self, e: u64) -> Self {
        self.pow(&BigUint::from(e))
    }

    /// Multiplication by `p^k` (exact, no precision change).
    pub fn mul_p_power(&self, k: i64) -> Self {
        match &self.repr {
            Repr::Zero { abs: None } => self.clone(),
            Repr::Zero { abs: Some(a) } => Self::approx_zero(&self.ctx, a + k),
            Repr::Nonzero { val, unit, prec } => PadicScalar {
                ctx: self.ctx.clone(),
                repr: Repr::Nonzero { val: val + k, unit: unit.clone(), prec: *prec },
            },
        }
    }

    /// Drops relative precision to at most `prec` digits.
    pub fn with_precision(&self, prec: u32) -> Self {
        match &self.repr {
            Repr::Nonzero { val, unit, prec: old } if prec < *old => PadicScalar {
                ctx: self.ctx.clone(),
                repr: Repr::Nonzero { val: *val, unit: self.ctx.reduce(unit.clone(), prec), prec },
            },
            _ => self.clone(),
        }
    }

    /// Truncates to absolute precision `p^k` (the value becomes known mod `p^k`).
    pub fn with_abs_precision(&self, k: i64) -> Self {
        match &self.repr {
            Repr::Zero { abs } => match abs {
                Some(a) if *a <= k => self.clone(),
                _ => Self::approx_zero(&self.ctx, k),
            },
            Repr::Nonzero { val, .. } => {
                if k <= *val {
                    Self::approx_zero(&self.ctx, k)
                } else {
                    self.with_precision((k - val) as u32)
                }
            }
        }
    }

    /// Representative of an element of `p^{-s} Z_q` scaled by `p^s`, as an
    /// integer polynomial together with the absolute precision (relative to
    /// the scaled value). Returns `None` if the element has valuation below `-s`.
    pub fn scaled_integral_poly(&self, s: i64) -> Option<(ZqPoly, Option<i64>)> {
        let ctx = &self.ctx;
        match &self.repr {
            Repr::Zero { abs } => Some((ctx.zero_poly(), abs.map(|a| a + s))),
            Repr::Nonzero { val, unit, prec } => {
                let shifted = val + s;
                if shifted < 0 {
                    return None;
                }
                let m = ctx.p_pow(shifted as u32);
                Some((unit.iter().map(|c| c * &m).collect(), Some(shifted + *prec as i64)))
            }
        }
    }

    /// Image in `F_q` of an element of `Z_q`; errors when the element is not
    /// integral or not known modulo `p`.
    pub fn reduce_mod_p(&self) -> Result<Residue, PadicError> {
        let ctx = &self.ctx;
        match &self.repr {
            Repr::Zero { abs: None } => Ok(Residue(vec![0; ctx.f as usize])),
            Repr::Zero { abs: Some(k) } if *k >= 1 => Ok(Residue(vec![0; ctx.f as usize])),
            Repr::Zero { abs: Some(k) } => {
                Err(PadicError::InsufficientPrecision(format!("value only known modulo p^{k}")))
            }
            Repr::Nonzero { val, unit, .. } => {
                if *val > 0 {
                    Ok(Residue(vec![0; ctx.f as usize]))
                } else if *val == 0 {
                    Ok(ctx.residue_of(unit))
                } else {
                    Err(PadicError::NonUnit(*val))
                }
            }
        }
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero { abs: None } => write!(f, "0"),
            Repr::Zero { abs: Some(k) } => write!(f, "O({}^{})", self.ctx.p, k),
            Repr::Nonzero { val, unit, prec } => {
                let parts: Vec<String> = unit.iter().map(|c| c.to_string()).collect();
                let unit_str = if parts.len() == 1 { parts[0].clone() } else { format!("[{}]", parts.join(",")) };
                write!(f, "{}^{} * {} + O({}^{})", self.ctx.p, val, unit_str, self.ctx.p, val + *prec as i64)
            }
        }
    }
}

/// Binary operation selector for [`field_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    /// Inverse of the first operand; the second is ignored.
    Inv,
}

/// Strict field arithmetic: like the methods on [`PadicScalar`], but a result
/// whose known digits were all cancelled is reported as an error.
pub fn field_arith(op: FieldOp, a: &PadicScalar, b: &PadicScalar) -> Result<PadicScalar, PadicError> {
    let r = match op {
        FieldOp::Add => a.add(b)?,
        FieldOp::Sub => a.sub(b)?,
        FieldOp::Mul => a.mul(b)?,
        FieldOp::Inv => a.inv()?,
    };
    if let Repr::Zero { abs: Some(k) } = r.repr {
        return Err(PadicError::InsufficientPrecision(format!(
            "cancellation exhausted all known digits (result is O(p^{k}))"
        )));
    }
    Ok(r)
}

/// Teichmüller representative `τ` with `τ^q = τ` and `τ ≡ a (mod p)`.
pub fn teichmuller_lift(a: &PadicScalar, prec: u32) -> Result<PadicScalar, PadicError> {
    match a.valuation() {
        Some(0) => {}
        Some(v) => return Err(PadicError::NonUnit(v)),
        None => return Err(PadicError::NonUnit(i64::MAX)),
    }
    let ctx = a.ctx();
    let r = a.leading_residue().expect("nonzero");
    Ok(PadicScalar::from_poly_mod(ctx, ctx.teichmuller(&r, prec), prec, 0))
}

/// Teichmüller digits `x_v, x_{v+1}, …` of `a = Σ [x_i] p^i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Digits {
    /// Index of the first digit.
    pub start: i64,
    pub digits: Vec<Residue>,
}

impl Digits {
    /// Digit at index `i` (zero outside the stored window below `start`).
    pub fn at(&self, i: i64) -> Option<&Residue> {
        if i < self.start {
            return None;
        }
        self.digits.get((i - self.start) as usize)
    }
}

/// Teichmüller digit expansion by repeated subtraction of `[x_i] p^i`.
pub fn digit_expansion(a: &PadicScalar, count: usize) -> Result<Digits, PadicError> {
    let ctx = a.ctx().clone();
    let zero_digit = Residue(vec![0; ctx.f as usize]);
    let (val, unit, prec) = match &a.repr {
        Repr::Zero { abs } => {
            if let Some(k) = abs {
                if count as i64 > *k {
                    return Err(PadicError::InsufficientPrecision(format!("zero known modulo p^{k} only")));
                }
            }
            return Ok(Digits { start: 0, digits: vec![zero_digit; count] });
        }
        Repr::Nonzero { val, unit, prec } => (*val, unit.clone(), *prec),
    };
    if count > prec as usize {
        return Err(PadicError::InsufficientPrecision(format!("{count} digits requested but only {prec} are known")));
    }
    let mut digits = Vec::with_capacity(count);
    let mut k = (count as u32).min(prec);
    let mut cur = ctx.reduce(unit, k);
    for _ in 0..count {
        let d = ctx.residue_of(&cur);
        let tau = ctx.teichmuller(&d, k);
        let diff = ctx.sub_mod(&cur, &tau, k);
        digits.push(d);
        cur = diff.iter().map(|c| c / ctx.p_big()).collect();
        k -= 1;
        cur = ctx.reduce(cur, k);
    }
    Ok(Digits { start: val, digits })
}

/// `Σ [d_i] p^{start+i}` at relative precision `prec`.
pub fn reconstruct_from_digits(ctx: &Arc<FieldContext>, digits: &Digits, prec: u32) -> PadicScalar {
    let mut acc = ctx.zero_poly();
    let mut scale = BigInt::one();
    let k = prec.max(digits.digits.len() as u32);
    for d in &digits.digits {
        let t = ctx.teichmuller(d, k);
        for (a, c) in acc.iter_mut().zip(t) {
            *a += c * &scale;
        }
        scale *= ctx.p_big();
    }
    PadicScalar::from_poly_mod(ctx, acc, k, 0).mul_p_power(digits.start)
}

/// Parses `"num/den"`, `"num"` or a digit string `"v:d0,d1,…"` (digits
/// `0 ≤ d < q`, read as ordinary base-`p` representatives).
pub fn parse_padic(ctx: &Arc<FieldContext>, s: &str, prec: u32) -> Result<PadicScalar, PadicError> {
    let s = s.trim();
    if let Some((v, ds)) = s.split_once(':') {
        let start: i64 = v.trim().parse().map_err(|_| PadicError::Parse(s.into()))?;
        let digits = ds
            .split(',')
            .filter(|d| !d.trim().is_empty())
            .map(|d| {
                let x: u64 = d.trim().parse().map_err(|_| PadicError::Parse(s.into()))?;
                if x >= ctx.q {
                    return Err(PadicError::Parse(format!("digit {x} is not below q = {}", ctx.q)));
                }
                Ok(x)
            })
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(PadicScalar::from_digits(ctx, start, &digits, prec));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| PadicError::Parse(s.into()))?;
    let den: BigInt = den.parse().map_err(|_| PadicError::Parse(s.into()))?;
    PadicScalar::from_rational(ctx, &num, &den, prec)
}

/// Valuation of a possibly zero integer (`None` for zero).
pub fn big_valuation(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        None
    } else {
        Some(int_valuation(n, p))
    }
}

/// Convenience for `|n|` as decimal, used in reports.
pub fn abs_string(n: &BigInt) -> String {
    n.abs().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: u64, f: u32) -> Arc<FieldContext> {
        FieldContext::new(p, f).unwrap()
    }

    fn rat(ctx: &Arc<FieldContext>, n: i64, d: i64, prec: u32) -> PadicScalar {
        PadicScalar::from_rational(ctx, &BigInt::from(n), &BigInt::from(d), prec).unwrap()
    }

    #[test]
    fn builtin_moduli_are_irreducible() {
        for p in [2, 3, 5, 7] {
            for f in 1..=4 {
                let ctx = q(p, f);
                assert_eq!(ctx.q(), p.pow(f));
            }
        }
        assert!(FieldContext::with_modulus(2, &[1, 0, 1]).is_err()); // X^2+1 = (X+1)^2
        assert!(FieldContext::new(4, 1).is_err());
    }

    #[test]
    fn from_rational_examples() {
        let c2 = q(2, 1);
        let half = rat(&c2, 1, 2, 8);
        assert_eq!(half.valuation(), Some(-1));
        assert_eq!(half.unit().unwrap()[0], BigInt::from(1));

        let c3 = q(3, 1);
        let seven = rat(&c3, 7, 1, 4);
        assert_eq!(seven.valuation(), Some(0));
        let d = digit_expansion(&seven, 1).unwrap();
        assert_eq!(d.digits[0], Residue(vec![1]));
        // base-3 digits of the unit representative 7 = 1 + 2·3
        assert_eq!(seven.unit().unwrap()[0], BigInt::from(7));

        assert!(rat(&c2, 0, 5, 8).is_exact_zero());
        assert_eq!(
            PadicScalar::from_rational(&c2, &BigInt::from(1), &BigInt::zero(), 8),
            Err(PadicError::ZeroDenominator)
        );
    }

    #[test]
    fn field_arith_examples() {
        let c2 = q(2, 1);
        let half = rat(&c2, 1, 2, 8);
        let one = field_arith(FieldOp::Add, &half, &half).unwrap();
        assert_eq!(one.valuation(), Some(0));
        assert_eq!(one.unit().unwrap()[0], BigInt::from(1));

        let c3 = q(3, 1);
        let a = rat(&c3, 2, 3, 10);
        let b = rat(&c3, 3 * 5, 1, 10);
        assert_eq!(field_arith(FieldOp::Mul, &a, &b).unwrap().valuation(), Some(0));

        let two = rat(&c3, 2, 1, 3);
        let inv = field_arith(FieldOp::Inv, &two, &two).unwrap();
        assert_eq!(inv.unit().unwrap()[0], BigInt::from(14));

        let x = rat(&c3, 5, 1, 4);
        assert!(matches!(field_arith(FieldOp::Sub, &x, &x), Err(PadicError::InsufficientPrecision(_))));
        assert_eq!(field_arith(FieldOp::Inv, &PadicScalar::zero(&c3), &x), Err(PadicError::DivisionByZero));
    }

    #[test]
    fn precision_rules() {
        let c5 = q(5, 1);
        let a = rat(&c5, 1, 5, 6); // known mod 5^5
        let b = rat(&c5, 25, 1, 3); // known mod 5^5
        let s = a.add(&b).unwrap();
        assert_eq!(s.abs_precision(), Some(5));
        assert_eq!(s.valuation(), Some(-1));
        let m = a.mul(&b).unwrap();
        assert_eq!((m.valuation(), m.precision()), (Some(1), Some(3)));
    }

    #[test]
    fn teichmuller_examples() {
        let c5 = q(5, 1);
        let t = teichmuller_lift(&rat(&c5, 2, 1, 2), 2).unwrap();
        assert_eq!(t.unit().unwrap()[0], BigInt::from(7));
        let c2 = q(2, 1);
        for k in 0..10 {
            let t = teichmuller_lift(&rat(&c2, 1 + 2 * k, 1, 20), 20).unwrap();
            assert_eq!(t.unit().unwrap()[0], BigInt::from(1));
        }
        assert_eq!(teichmuller_lift(&rat(&c2, 2, 1, 20), 20), Err(PadicError::NonUnit(1)));
    }

    #[test]
    fn digit_examples() {
        let c2 = q(2, 1);
        let d = digit_expansion(&rat(&c2, 1, 2, 8), 5).unwrap();
        assert_eq!(d.start, -1);
        assert_eq!(d.digits[0], Residue(vec![1]));
        assert!(d.digits[1..].iter().all(Residue::is_zero));

        let c3 = q(3, 1);
        let d = digit_expansion(&rat(&c3, 7, 1, 10), 3).unwrap();
        // 7 - [1] = 6 = 3·2, and [2] = -1 in Z_3, so (2 - [2])/3 = 1.
        assert_eq!(d.digits, vec![Residue(vec![1]), Residue(vec![2]), Residue(vec![1])]);

        let z = digit_expansion(&PadicScalar::zero(&c3), 4).unwrap();
        assert!(z.digits.iter().all(Residue::is_zero));
    }

    #[test]
    fn parse_inputs() {
        let c2 = q(2, 1);
        let a = parse_padic(&c2, "7/8", 16).unwrap();
        assert_eq!(a.valuation(), Some(-3));
        let b = parse_padic(&c2, "-3:1,1,1", 16).unwrap();
        assert_eq!(a, b);
        assert!(parse_padic(&c2, "x/2", 16).is_err());
        assert!(parse_padic(&c2, "0:2", 16).is_err());
    }
}
