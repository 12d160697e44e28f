//! Evaluation of `Ψ_q` on `Q_q`, digit decompositions, zeros, and numerical
//! checks of the addition law and continuity.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{AnalysisError, PadicError};
use crate::padic::{digit_expansion, int_valuation, Digits, FieldContext, PadicScalar, Residue, Valuation};
use crate::psi::{PsiMeta, PsiTable};
use crate::witt::phi_n_integers;

type Result<T> = std::result::Result<T, AnalysisError>;

/// Newton-polygon lower bound for `v(b_m)`: `max_i (i·m − (q^i−1)/(q−1))`.
pub fn newton_lower_bound(q: u64, m: u64) -> i64 {
    assert!(m >= 1);
    let (mut i, mut qi, mut geo) = (0i64, 1u64, 0i64);
    while qi < m {
        geo += qi as i64;
        qi *= q;
        i += 1;
    }
    i * m as i64 - geo
}

/// Lower bound `−(q^i−1)/(q−1)` for `v(Ψ(x))` when `v(x) ≥ −i`; `v(x)` itself
/// when `v(x) ≥ 0`.
pub fn psi_valuation_lower_bound(q: u64, v: i64) -> i64 {
    if v >= 0 {
        return v;
    }
    let mut geo = 0i64;
    let mut qi = 1i64;
    for _ in 0..(-v) {
        geo = geo.saturating_add(qi);
        qi = qi.saturating_mul(q as i64);
    }
    -geo
}

/// Smallest `M ≥ 1` with `L(m) − n·m ≥ t` for every `m > M`, where `L` is the
/// closed-form Newton lower bound.
pub fn truncation_bound(meta: PsiMeta, n: i64, t: i64) -> usize {
    let q = meta.q;
    let mut last_bad = 1u64;
    let mut m = 1u64;
    let mut qi = 1u64;
    let mut i = 0i64;
    loop {
        m += 1;
        while qi < m {
            qi = qi.saturating_mul(q);
            i += 1;
        }
        let g = newton_lower_bound(q, m) - n * m as i64;
        if g < t {
            last_bad = m;
        } else if i > n {
            // slope i − n ≥ 1 from here on, so g only grows
            return last_bad as usize;
        }
    }
}

fn check_meta(psi: &PsiTable, ctx: &FieldContext) -> Result<()> {
    if psi.p() != ctx.p() || psi.q() != ctx.q() {
        return Err(PadicError::ContextMismatch.into());
    }
    Ok(())
}

/// `Σ_{m ≤ M} c_m x^m` modulo `p^t`, checking that every retained term is known
/// to that precision.
fn eval_poly(coeffs: &[BigInt], x: &PadicScalar, t: i64) -> Result<PadicScalar> {
    let ctx = x.ctx().clone();
    let p = ctx.p();
    let c0 = coeffs.first().cloned().unwrap_or_default();
    let constant = |abs: i64| -> PadicScalar {
        if c0.is_zero() {
            PadicScalar::approx_zero(&ctx, abs)
        } else {
            PadicScalar::from_int(&ctx, &c0, (abs.max(1) + 64) as u32).with_abs_precision(abs)
        }
    };
    let (v, unit, prec) = match (x.valuation(), x.unit(), x.precision()) {
        (Some(v), Some(u), Some(n)) => (v, u.clone(), n as i64),
        _ => {
            if x.is_exact_zero() {
                return Ok(if c0.is_zero() { PadicScalar::zero(&ctx) } else { constant(t) });
            }
            let k = x.abs_precision().expect("approximate zero");
            if k < 0 {
                return Err(AnalysisError::InsufficientInputPrecision(format!("argument only known modulo p^{k}")));
            }
            return Ok(constant(t.min(k)));
        }
    };
    // (m, p-free part of c_m, p-exponent of c_m·x^m)
    let mut terms = Vec::new();
    for (m, c) in coeffs.iter().enumerate().skip(1) {
        if c.is_zero() {
            continue;
        }
        let vc = int_valuation(c, p) as i64;
        let k = vc + m as i64 * v;
        if k >= t {
            continue;
        }
        let gain = int_valuation(&BigInt::from(m), p) as i64;
        if prec + gain < t - k {
            return Err(AnalysisError::InsufficientInputPrecision(format!(
                "term {m} needs {} digits of the argument, {} available",
                t - k - gain,
                prec
            )));
        }
        terms.push((m, c / num_traits::pow(BigInt::from(p), vc as usize), k));
    }
    let e = terms.iter().map(|(_, _, k)| -k).max().unwrap_or(0).max(0);
    if t + e <= 0 {
        return Ok(PadicScalar::approx_zero(&ctx, t));
    }
    let big_k = (t + e) as u32;
    let mut acc = ctx.zero_poly();
    acc[0] = c0.clone() * ctx.p_pow(e as u32);
    let mut power = ctx.one_poly();
    let mut done = 0usize;
    for (m, c, k) in terms {
        while done < m {
            power = ctx.mul_mod(&power, &unit, big_k);
            done += 1;
        }
        let scale = c * ctx.p_pow((k + e) as u32);
        for (a, b) in acc.iter_mut().zip(&power) {
            *a += &scale * b;
        }
    }
    Ok(PadicScalar::from_poly_mod(&ctx, acc, big_k, -e))
}

/// `Ψ(x)` modulo `p^t` from the series, truncated by [`truncation_bound`].
pub fn eval_psi(psi: &PsiTable, x: &PadicScalar, t: i64) -> Result<PadicScalar> {
    check_meta(psi, x.ctx())?;
    let n = x.valuation().map_or(0, |v| -v);
    let m = truncation_bound(psi.meta, n, t);
    if m > psi.trunc_degree() {
        return Err(AnalysisError::InsufficientSeriesTruncation { needed: m, available: psi.trunc_degree() });
    }
    eval_poly(&psi.series.coeffs()[..=m], x, t)
}

/// `Ψ′(x)` modulo `p^t` from the termwise derivative.
pub fn eval_psi_derivative(psi: &PsiTable, x: &PadicScalar, t: i64) -> Result<PadicScalar> {
    check_meta(psi, x.ctx())?;
    let n = x.valuation().map_or(0, |v| -v);
    // v(m b_m x^{m−1}) ≥ L(m) − m·n + n
    let m = truncation_bound(psi.meta, n, t - n);
    if m > psi.trunc_degree() {
        return Err(AnalysisError::InsufficientSeriesTruncation { needed: m, available: psi.trunc_degree() });
    }
    let d = psi.series.derivative();
    eval_poly(&d.coeffs()[..m], x, t)
}

fn series_feasible(psi: &PsiTable, n: i64, t: i64) -> bool {
    truncation_bound(psi.meta, n, t) <= psi.trunc_degree()
}

/// Evaluation plan for the recursion
/// `Ψ(p^k y) = p^k y − Σ_{j≥1} p^{−j} Ψ(p^{k+j} y)^{q^j}`.
#[derive(Clone, Debug)]
struct ChainPlan {
    n: i64,
    /// Absolute precision needed at each level.
    need: Vec<i64>,
    /// `None` for series levels, else the `j` range used.
    deps: Vec<Option<usize>>,
}

fn plan_chain(psi: &PsiTable, n: i64, t: i64) -> ChainPlan {
    let q = psi.q();
    let f = psi.meta.f as i64;
    let mut need = vec![t];
    let mut deps: Vec<Option<usize>> = Vec::new();
    let mut k = 0usize;
    while k < need.len() {
        let r = need[k];
        let s = k as i64 - n;
        if series_feasible(psi, -s, r) {
            deps.push(None);
            k += 1;
            continue;
        }
        let mut j = 1usize;
        loop {
            let sj = s + j as i64;
            let w = psi_valuation_lower_bound(q, sj);
            let qj = (q as i64).checked_pow(j as u32);
            let term_val = qj.map(|qj| (qj as i128) * (w as i128) - j as i128);
            if sj > 0 && term_val.is_none_or(|tv| tv >= r as i128) {
                break;
            }
            let qj = qj.expect("bounded by the break above") as i128;
            let req = r as i128 + j as i128 * (1 - f) as i128 - (qj - 1) * w as i128;
            // the power gains digits only from a value known to at least one digit
            let req = req.max(w as i128 + 1).min(i64::MAX as i128) as i64;
            if need.len() <= k + j {
                need.resize(k + j + 1, i64::MIN);
            }
            need[k + j] = need[k + j].max(req);
            j += 1;
        }
        deps.push(Some(j - 1));
        k += 1;
    }
    ChainPlan { n, need, deps }
}

impl ChainPlan {
    /// Relative precision the argument needs.
    fn input_precision(&self, q: u64) -> i64 {
        self.need
            .iter()
            .zip(&self.deps)
            .enumerate()
            .map(|(k, (&r, dep))| {
                let s = k as i64 - self.n;
                match dep {
                    None => series_input_precision(q, s, r),
                    Some(_) => r - s,
                }
            })
            .max()
            .unwrap_or(0)
    }
}

/// Relative precision for the series at an argument of valuation `v`.
fn series_input_precision(q: u64, v: i64, t: i64) -> i64 {
    // the most negative term b_m x^m sits at the valuation-polygon minimum
    let lb = psi_valuation_lower_bound(q, v.min(0));
    (t - lb + (-v).max(0)).max(1)
}

/// Relative input precision that [`psi_value`] needs for an argument of
/// valuation `v` at target `t`.
pub fn required_input_precision(psi: &PsiTable, v: i64, t: i64) -> u32 {
    let n = -v;
    let rel = if series_feasible(psi, n, t) {
        series_input_precision(psi.q(), v, t)
    } else {
        plan_chain(psi, n, t).input_precision(psi.q())
    };
    rel.max(1) as u32 + 1
}

/// `Ψ(x)` modulo `p^t` through the functional-equation recursion; the series
/// is only used at levels where it is short.
pub fn eval_psi_chain(psi: &PsiTable, x: &PadicScalar, t: i64) -> Result<PadicScalar> {
    check_meta(psi, x.ctx())?;
    let Some(v) = x.valuation() else {
        return eval_psi(psi, x, t);
    };
    let n = -v;
    let plan = plan_chain(psi, n, t);
    let avail = x.precision().unwrap_or(0) as i64;
    let needed = plan.input_precision(psi.q());
    if avail < needed {
        return Err(AnalysisError::InsufficientInputPrecision(format!(
            "argument needs {needed} digits, {avail} available"
        )));
    }
    let levels = plan.need.len();
    let mut vals: Vec<Option<PadicScalar>> = vec![None; levels];
    // last[m] = (j, Ψ(p^m x)^{q^j}) for the largest j used so far
    let mut last: Vec<Option<(usize, PadicScalar)>> = vec![None; levels];
    let q = BigUint::from(psi.q());
    let f = psi.meta.f as i64;
    for k in (0..levels).rev() {
        let r = plan.need[k];
        let arg = x.mul_p_power(k as i64);
        let value = match plan.deps[k] {
            None => eval_psi(psi, &arg, r)?,
            Some(jmax) => {
                let mut acc = arg.with_abs_precision(r);
                let mut qj = BigUint::one();
                for j in 1..=jmax {
                    qj *= &q;
                    let m = k + j;
                    let v = vals[m].as_ref().expect("higher levels computed first");
                    let term = match v.valuation() {
                        None => v.pow(&qj),
                        Some(w) => {
                            let ew = i128::try_from(&qj).unwrap_or(i128::MAX / 4) * w as i128;
                            if ew >= (r + j as i64) as i128 {
                                continue;
                            }
                            let g = f * j as i64;
                            // relative precision the power must carry
                            let need = ((r + j as i64) as i128 - ew).max(1) as u32;
                            let stepwise = match &last[m] {
                                Some((jl, prev)) if *jl + 1 == j => {
                                    prev.precision().is_some_and(|pp| pp as i64 >= need as i64 - f)
                                }
                                _ => false,
                            };
                            let pw = if stepwise {
                                let (_, prev) = last[m].as_ref().unwrap();
                                prev.with_precision((need as i64 - f).max(1) as u32).pow(&q)
                            } else {
                                v.with_precision((need as i64 - g).max(1) as u32).pow(&qj)
                            };
                            last[m] = Some((j, pw.clone()));
                            pw
                        }
                    };
                    acc = acc.sub(&term.mul_p_power(-(j as i64)).with_abs_precision(r))?;
                }
                acc.with_abs_precision(r)
            }
        };
        vals[k] = Some(value);
    }
    let out = vals.swap_remove(0).expect("level 0");
    if !out.abs_precision().is_none_or(|a| a >= t) {
        return Err(AnalysisError::InsufficientInputPrecision(format!(
            "result only known modulo p^{}",
            out.abs_precision().unwrap_or_default()
        )));
    }
    Ok(out.with_abs_precision(t))
}

/// `Ψ(x)` modulo `p^t` by the series when it is short enough, otherwise by the
/// recursion.
pub fn psi_value(psi: &PsiTable, x: &PadicScalar, t: i64) -> Result<PadicScalar> {
    let n = x.valuation().map_or(0, |v| -v);
    if series_feasible(psi, n, t) {
        eval_psi(psi, x, t)
    } else {
        eval_psi_chain(psi, x, t)
    }
}

/// `Ψ(p^{−i} a) mod p`.
pub fn psi_digit(psi: &PsiTable, a: &PadicScalar, i: i64) -> Result<Residue> {
    let x = a.mul_p_power(-i);
    Ok(psi_value(psi, &x, 1)?.reduce_mod_p()?)
}

/// Digits `a_{v(a)}, …` of `a` read off from `Ψ`.
pub fn witt_bivector_decompose(psi: &PsiTable, a: &PadicScalar, count: usize) -> Result<Digits> {
    let ctx = a.ctx();
    let Some(v) = a.valuation() else {
        return Ok(Digits { start: 0, digits: vec![Residue(vec![0; ctx.f() as usize]); count] });
    };
    let digits = (0..count as i64).map(|k| psi_digit(psi, a, v + k)).collect::<Result<Vec<_>>>()?;
    Ok(Digits { start: v, digits })
}

/// Builds `num/den` at the precision [`witt_bivector_decompose`] needs for
/// `count` digits.
pub fn padic_for_decomposition(
    psi: &PsiTable,
    ctx: &Arc<FieldContext>,
    num: &BigInt,
    den: &BigInt,
    count: usize,
) -> Result<PadicScalar> {
    Ok(PadicScalar::from_rational(ctx, num, den, decomposition_precision(psi, count))?)
}

/// Relative precision of `a` that [`witt_bivector_decompose`] needs for
/// `count` digits.
pub fn decomposition_precision(psi: &PsiTable, count: usize) -> u32 {
    let depth = count.saturating_sub(1) as i64;
    let prec = required_input_precision(psi, -depth, 1) as i64 + depth + 2;
    prec.max(count as i64 + 2) as u32
}

/// `a_0 = a`, `a_i = Σ_{j<i} p^{j−i}(a_j^{q^{i−j−1}} − a_j^{q^{i−j}})`, reduced mod `p`.
pub fn a_sequence_oracle(ctx: &Arc<FieldContext>, a: &PadicScalar, i_max: usize) -> Result<Vec<Residue>> {
    let w = i_max as i64 + 1;
    let base = match a.valuation_info() {
        Valuation::Infinite => return Ok(vec![Residue(vec![0; ctx.f() as usize]); i_max + 1]),
        Valuation::AtLeast(k) | Valuation::Finite(k) if k < 0 => {
            return Err(PadicError::NonUnit(k).into());
        }
        _ => {
            if a.abs_precision().is_some_and(|k| k < w) {
                return Err(
                    PadicError::InsufficientPrecision(format!("{w} digits needed for {} terms", i_max + 1)).into()
                );
            }
            let (poly, _) = a.scaled_integral_poly(0).expect("integral");
            ctx.reduce(poly, w as u32)
        }
    };
    let p = ctx.p_big().clone();
    let q = BigUint::from(ctx.q());
    let mut seq: Vec<Vec<BigInt>> = vec![base];
    for i in 1..=i_max {
        let modulus = (w - i as i64) as u32;
        let mut acc = ctx.zero_poly();
        for (j, aj) in seq.iter().enumerate() {
            let kj = (w - j as i64) as u32;
            let e1 = num_traits::pow(q.clone(), i - j - 1);
            let e2 = &e1 * &q;
            let diff = ctx.sub_mod(&ctx.pow_mod(aj, &e1, kj), &ctx.pow_mod(aj, &e2, kj), kj);
            let pd = num_traits::pow(p.clone(), i - j);
            for (s, c) in acc.iter_mut().zip(&diff) {
                let (quo, rem) = c.div_rem(&pd);
                if !rem.is_zero() {
                    return Err(PadicError::InsufficientPrecision(format!(
                        "term {j} of a_{i} is not divisible by p^{}",
                        i - j
                    ))
                    .into());
                }
                *s += quo;
            }
        }
        seq.push(ctx.reduce(acc, modulus));
    }
    Ok(seq.iter().map(|s| ctx.residue_of(s)).collect())
}

/// `Σ_{ℓ=0}^{L} p^{−ℓ} Ψ(p^ℓ a)^{q^ℓ}` modulo `p^{i+1}`, `L = −v(a) + i`.
pub fn bivector_sum(psi: &PsiTable, a: &PadicScalar, i: i64) -> Result<PadicScalar> {
    let ctx = a.ctx().clone();
    let q = psi.q();
    let f = psi.meta.f as i64;
    let v = a.valuation().unwrap_or(0);
    let top = (-v + i).max(0);
    let target = i + 1;
    let mut acc = PadicScalar::zero(&ctx);
    for l in 0..=top {
        let arg = a.mul_p_power(l);
        let w = psi_valuation_lower_bound(q, arg.valuation().unwrap_or(i64::MAX / 4).min(i64::MAX / 4));
        let ql = (q as i64).pow(l as u32);
        let need = target + l * (1 - f) - (ql - 1) * w.min(0);
        let val = psi_value(psi, &arg, need.max(1))?;
        let term = val.pow(&BigUint::from(ql as u64)).mul_p_power(-l);
        acc = acc.add(&term)?;
    }
    Ok(acc.with_abs_precision(target))
}

/// `a ≡ Σ_{ℓ=0}^{−v(a)+i} p^{−ℓ}Ψ(p^ℓ a)^{q^ℓ} (mod p^{i+1})`.
pub fn bivector_congruence_check(psi: &PsiTable, a: &PadicScalar, i: i64) -> Result<bool> {
    let rhs = bivector_sum(psi, a, i)?;
    let diff = a.sub(&rhs)?;
    Ok(diff.valuation_info().at_least(i + 1))
}

/// One zero of `Ψ` of valuation `−n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroRecord {
    pub p: u64,
    pub f: u32,
    pub n: i64,
    /// Teichmüller digits `d_0, …, d_{n−1}` of the disc centre `a·p^{−n}`.
    pub residue_class: Vec<Residue>,
    pub zero: PadicScalar,
    pub residual_valuation: Valuation,
    pub derivative_valuation: i64,
    pub iterations: usize,
}

impl ZeroRecord {
    pub fn zero_digits(&self, count: usize) -> Result<Digits> {
        Ok(digit_expansion(&self.zero, count)?)
    }

    pub fn to_json(&self, digit_count: usize) -> Result<Value> {
        let digits = self.zero_digits(digit_count)?;
        Ok(json!({
            "p": self.p,
            "f": self.f,
            "n": self.n,
            "residue_class": self.residue_class,
            "zero_valuation": self.zero.valuation(),
            "zero_digits": {"start": digits.start, "digits": digits.digits},
            "residual_valuation": self.residual_valuation,
            "derivative_valuation": self.derivative_valuation,
        }))
    }
}

/// Disc centres `a·p^{−n}`, `a = Σ [d_k] p^k` with `d_0 ≠ 0`, in lexicographic
/// order of the digit strings.
pub fn disc_centres(ctx: &Arc<FieldContext>, n: usize, prec: u32) -> Vec<(Vec<Residue>, PadicScalar)> {
    let q = ctx.q();
    let total = (q - 1) * q.pow(n as u32 - 1);
    (0..total)
        .map(|idx| {
            let mut digits = Vec::with_capacity(n);
            let mut rest = idx;
            for k in (0..n).rev() {
                let base = if k == 0 { q - 1 } else { q };
                let d = rest % base;
                rest /= base;
                digits.push(if k == 0 { d + 1 } else { d });
            }
            digits.reverse();
            let residues: Vec<Residue> = digits.iter().map(|&d| ctx.residue_from_index(d)).collect();
            let mut acc = ctx.zero_poly();
            let mut scale = BigInt::one();
            for r in &residues {
                let t = ctx.teichmuller(r, prec + n as u32);
                for (a, c) in acc.iter_mut().zip(t) {
                    *a += c * &scale;
                }
                scale *= ctx.p_big();
            }
            let a = PadicScalar::from_poly_mod(ctx, acc, prec + n as u32, 0);
            (residues, a.mul_p_power(-(n as i64)))
        })
        .collect()
}

/// All zeros of valuation `−n` by Newton iteration from each disc centre,
/// certified to `v(Ψ(z)) ≥ t`.
pub fn find_zeros(psi: &PsiTable, n: usize, t: i64) -> Result<Vec<ZeroRecord>> {
    if n == 0 {
        return Err(AnalysisError::CountMismatch { expected: 0, got: 0 });
    }
    let ctx = FieldContext::new(psi.p(), psi.meta.f)?;
    let q = psi.q();
    let ni = n as i64;
    let work = t + 4;
    let m = truncation_bound(psi.meta, ni, work);
    if m > psi.trunc_degree() {
        return Err(AnalysisError::InsufficientSeriesTruncation { needed: m, available: psi.trunc_degree() });
    }
    let depth = -psi_valuation_lower_bound(q, -ni);
    let rel = (work + depth + ni + 4) as u32;
    let mut out = Vec::new();
    for (class, centre) in disc_centres(&ctx, n, rel) {
        let mut z = centre;
        let mut best: Option<i64> = None;
        let mut stalls = 0;
        let mut iterations = 0;
        loop {
            let val = eval_psi(psi, &z, work)?;
            let res = val.valuation_info();
            if res.at_least(t) {
                let der = eval_psi_derivative(psi, &z, work)?;
                let dv = der.valuation().ok_or(AnalysisError::DerivativeNotUnit)?;
                if z.valuation() != Some(-ni) {
                    return Err(AnalysisError::NewtonStall(res.lower_bound().unwrap_or(work)));
                }
                out.push(ZeroRecord {
                    p: psi.p(),
                    f: psi.meta.f,
                    n: ni,
                    residue_class: class,
                    zero: z,
                    residual_valuation: res,
                    derivative_valuation: dv,
                    iterations,
                });
                break;
            }
            let r = res.lower_bound().expect("not an exact zero");
            if best.is_some_and(|b| r <= b) {
                stalls += 1;
                if stalls >= 3 {
                    return Err(AnalysisError::NewtonStall(r));
                }
            } else {
                stalls = 0;
                best = Some(r);
            }
            let der = eval_psi_derivative(psi, &z, work)?;
            if der.valuation().is_none() {
                return Err(AnalysisError::DerivativeNotUnit);
            }
            let step = val.div(&der)?;
            // the digits below p^{work−d} are meaningful; the new iterate is
            // taken as the exact number they spell
            let d = der.valuation().unwrap_or(0);
            z = pad_exact(&z.sub(&step)?.with_abs_precision(work - d), rel);
            iterations += 1;
            if iterations > 200 {
                return Err(AnalysisError::NewtonStall(r));
            }
        }
    }
    Ok(out)
}

/// The representative of `z` read as an exact number, stored with `rel` digits.
fn pad_exact(z: &PadicScalar, rel: u32) -> PadicScalar {
    match (z.valuation(), z.unit()) {
        (Some(v), Some(u)) => PadicScalar::from_poly_exact(z.ctx(), u.clone(), rel).mul_p_power(v),
        _ => PadicScalar::zero(z.ctx()),
    }
}

/// Coefficients of `ψ_n(x) = Π (1 − x/z_i)`, constant term first.
pub fn schnirelmann_factor(zeros: &[ZeroRecord]) -> Result<Vec<PadicScalar>> {
    let first = zeros.first().ok_or(AnalysisError::CountMismatch { expected: 1, got: 0 })?;
    let q = first.p.pow(first.f);
    let n = first.n as u32;
    let expected = (q.pow(n) - q.pow(n - 1)) as usize;
    if zeros.len() != expected {
        return Err(AnalysisError::CountMismatch { expected, got: zeros.len() });
    }
    let ctx = first.zero.ctx().clone();
    let prec = first.zero.precision().unwrap_or(32);
    let one = PadicScalar::one(&ctx, prec);
    let mut poly = vec![one];
    for z in zeros {
        let c = z.zero.inv()?.neg();
        let mut next = vec![PadicScalar::zero(&ctx); poly.len() + 1];
        for (k, a) in poly.iter().enumerate() {
            next[k] = next[k].add(a)?;
            next[k + 1] = next[k + 1].add(&a.mul(&c)?)?;
        }
        poly = next;
    }
    Ok(poly)
}

/// Coefficients of `x·ψ_1(x)⋯ψ_k(x)` from the factors, index = degree.
pub fn schnirelmann_partial_product(factors: &[Vec<PadicScalar>]) -> Result<Vec<PadicScalar>> {
    let ctx = factors
        .first()
        .and_then(|f| f.first())
        .map(|c| c.ctx().clone())
        .ok_or(AnalysisError::CountMismatch { expected: 1, got: 0 })?;
    let mut acc = vec![PadicScalar::zero(&ctx), PadicScalar::one(&ctx, 64)];
    for f in factors {
        let mut next = vec![PadicScalar::zero(&ctx); acc.len() + f.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in f.iter().enumerate() {
                next[i + j] = next[i + j].add(&a.mul(b)?)?;
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// `x·ψ_1⋯ψ_k ≡ Ψ (mod p^{k+1})` on the coefficients of degree `≤ q^k`; the
/// factors with `n > k` only move coefficients by multiples of `p^{k+1}`.
pub fn schnirelmann_partial_check(psi: &PsiTable, factors: &[Vec<PadicScalar>]) -> Result<bool> {
    let k = factors.len() as u32;
    let prod = schnirelmann_partial_product(factors)?;
    let ctx = prod[0].ctx().clone();
    let top = (psi.q().pow(k) as usize).min(psi.trunc_degree());
    for d in 1..=top {
        let b = PadicScalar::from_int(&ctx, psi.coeff(d), k + 2);
        let c = prod.get(d).cloned().unwrap_or_else(|| PadicScalar::zero(&ctx));
        if !b.sub(&c)?.valuation_info().at_least(k as i64 + 1) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `r_n = v(Ψ(x+y) − φ_n(Ψ(p^n x),…,Ψ(x); Ψ(p^n y),…,Ψ(y)))` for `n ≤ n_max`,
/// each computed modulo `p^precision`.
pub fn addition_law_check(
    psi: &PsiTable,
    x: &PadicScalar,
    y: &PadicScalar,
    n_max: usize,
    precision: i64,
) -> Result<Vec<Valuation>> {
    if psi.meta.f != 1 {
        return Err(AnalysisError::RequiresPrimeField);
    }
    let ctx = x.ctx().clone();
    let p = psi.p();
    let pt = ctx.p_pow(precision as u32);
    let lift = |s: &PadicScalar| -> Result<BigInt> {
        if s.is_exact_zero() {
            return Ok(BigInt::zero());
        }
        let (poly, _) =
            s.scaled_integral_poly(0).ok_or(AnalysisError::Padic(PadicError::NonUnit(s.valuation().unwrap_or(0))))?;
        Ok(poly[0].mod_floor(&pt))
    };
    let psi_at = |a: &PadicScalar| -> Result<PadicScalar> {
        if a.is_exact_zero() {
            Ok(PadicScalar::zero(&ctx))
        } else {
            psi_value(psi, a, precision)
        }
    };
    let sum = x.add(y)?;
    let lhs = psi_at(&sum)?;
    let xs: Vec<PadicScalar> = (0..=n_max).map(|k| psi_at(&x.mul_p_power(k as i64))).collect::<Result<_>>()?;
    let ys: Vec<PadicScalar> = (0..=n_max).map(|k| psi_at(&y.mul_p_power(k as i64))).collect::<Result<_>>()?;
    let xl: Vec<BigInt> = xs.iter().map(&lift).collect::<Result<_>>()?;
    let yl: Vec<BigInt> = ys.iter().map(&lift).collect::<Result<_>>()?;
    let exact_y = y.is_exact_zero();
    let exact_x = x.is_exact_zero();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        // X_0 = Ψ(p^n x), …, X_n = Ψ(x)
        let a: Vec<BigInt> = (0..=n).map(|i| xl[n - i].clone()).collect();
        let b: Vec<BigInt> = (0..=n).map(|i| yl[n - i].clone()).collect();
        let phi = phi_n_integers(p, &a, &b)?;
        if exact_x || exact_y {
            // φ_n(X; 0) = X_n, so the comparison is against the same computed value
            let other = if exact_y { &a[n] } else { &b[n] };
            if phi == *other {
                out.push(Valuation::Infinite);
                continue;
            }
        }
        let rhs = PadicScalar::from_int(&ctx, &phi, precision as u32).with_abs_precision(precision);
        let diff = lhs.sub(&rhs)?;
        out.push(match diff.valuation_info() {
            Valuation::Finite(v) => Valuation::Finite(v),
            _ => Valuation::AtLeast(precision),
        });
    }
    Ok(out)
}

/// `v(Ψ(x+δ) − Ψ(x)) ≥ j` for one pair, `δ` with `v(δ) ≥ j`.
pub fn continuity_pair(psi: &PsiTable, x: &PadicScalar, delta: &PadicScalar, j: i64) -> Result<bool> {
    let t = j.max(1);
    let a = psi_value(psi, &x.add(delta)?, t)?;
    let b = psi_value(psi, x, t)?;
    Ok(a.sub(&b)?.valuation_info().at_least(j))
}

/// Random rational `u/(p^k·m)` with `p ∤ m`, `k ≤ max_den_power`.
pub fn random_rational<R: Rng>(rng: &mut R, p: u64, max_den_power: u32) -> (BigInt, BigInt) {
    let k = rng.gen_range(0..=max_den_power);
    let mut m: u64 = rng.gen_range(1..=50);
    while m.is_multiple_of(p) {
        m = rng.gen_range(1..=50);
    }
    let mut num: i64 = rng.gen_range(-1_000_000..=1_000_000);
    if num == 0 {
        num = 1;
    }
    (BigInt::from(num), BigInt::from(m) * num_traits::pow(BigInt::from(p), k as usize))
}

/// Random `u/(p^k·m)` as a p-adic number with `prec` relative digits.
pub fn random_padic_rational<R: Rng>(
    rng: &mut R,
    ctx: &Arc<FieldContext>,
    max_den_power: u32,
    prec: u32,
) -> Result<(String, PadicScalar)> {
    let (num, den) = random_rational(rng, ctx.p(), max_den_power);
    let x = PadicScalar::from_rational(ctx, &num, &den, prec)?;
    Ok((format!("{num}/{den}"), x))
}

/// Random element of `Z_q` given by an integer polynomial with coefficients below `p^digits`.
pub fn random_zq<R: Rng>(rng: &mut R, ctx: &Arc<FieldContext>, digits: u32, prec: u32) -> PadicScalar {
    let bound = ctx.p_pow(digits);
    let coeffs = (0..ctx.f())
        .map(|_| {
            let bytes: Vec<u8> = (0..(bound.bits() / 8 + 2)).map(|_| rng.gen()).collect();
            BigInt::from_bytes_le(num_bigint::Sign::Plus, &bytes).mod_floor(&bound)
        })
        .collect();
    PadicScalar::from_poly_exact(ctx, coeffs, prec)
}

/// Seeded check of `Ψ(x + p^j C°) ⊂ Ψ(x) + p^j C°` on rationals with
/// denominators up to `p^3`.
pub fn uniform_continuity_check(psi: &PsiTable, samples: usize, j_max: i64, seed: u64) -> Result<bool> {
    Ok(uniform_continuity_report(psi, samples, j_max, seed)?.failures == 0)
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleReport {
    pub samples: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

pub fn uniform_continuity_report(psi: &PsiTable, samples: usize, j_max: i64, seed: u64) -> Result<SampleReport> {
    use rand::SeedableRng;
    if psi.meta.f != 1 {
        return Err(AnalysisError::RequiresPrimeField);
    }
    let ctx = FieldContext::new(psi.p(), 1)?;
    let p = psi.p();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut first_failure = None;
    let prec = required_input_precision(psi, -3, j_max.max(1)).max(128) + 8;
    for s in 0..samples {
        let (num, den) = random_rational(&mut rng, p, 3);
        let j = rng.gen_range(0..=j_max);
        let x = PadicScalar::from_rational(&ctx, &num, &den, prec)?;
        let delta = if s % 10 == 0 {
            PadicScalar::zero(&ctx)
        } else {
            let d: i64 = rng.gen_range(-10_000..=10_000);
            let extra = rng.gen_range(0..3);
            PadicScalar::from_int(&ctx, &BigInt::from(d), prec).mul_p_power(j + extra)
        };
        if !continuity_pair(psi, &x, &delta, j)? {
            failures += 1;
            first_failure.get_or_insert_with(|| format!("x = {num}/{den}, delta = {delta}, j = {j}"));
        }
    }
    Ok(SampleReport { samples, failures, first_failure })
}

/// `v(Ψ(p^i x)^{p^k} − [x_{−i}]) ≥ k+1` for `k ≤ k_max`, with the digit taken
/// from the Teichmüller expansion of `x`.
pub fn teichmuller_limit_check(psi: &PsiTable, x: &PadicScalar, i: i64, k_max: u32) -> Result<bool> {
    if psi.meta.f != 1 {
        return Err(AnalysisError::RequiresPrimeField);
    }
    let ctx = x.ctx().clone();
    let Some(v) = x.valuation() else {
        return Err(AnalysisError::ZeroDigit);
    };
    let index = -i;
    if index < v {
        return Err(AnalysisError::ZeroDigit);
    }
    let digits = digit_expansion(x, (index - v + 1) as usize)?;
    let digit = digits.at(index).expect("expanded far enough").clone();
    if digit.is_zero() {
        return Err(AnalysisError::ZeroDigit);
    }
    let prec = k_max + 2;
    let tau = PadicScalar::from_poly_mod(&ctx, ctx.teichmuller(&digit, prec), prec, 0);
    let w = psi_value(psi, &x.mul_p_power(i), prec as i64)?;
    let p = BigUint::from(psi.p());
    let mut e = BigUint::one();
    for k in 0..=k_max {
        let diff = w.pow(&e).sub(&tau)?;
        if !diff.valuation_info().at_least(k as i64 + 1) {
            return Ok(false);
        }
        e *= &p;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::solve_psi;

    fn rat(ctx: &Arc<FieldContext>, n: i64, d: i64, prec: u32) -> PadicScalar {
        PadicScalar::from_rational(ctx, &BigInt::from(n), &BigInt::from(d), prec).unwrap()
    }

    #[test]
    fn bounds() {
        let m2 = PsiMeta::new(2, 1).unwrap();
        assert_eq!(newton_lower_bound(2, 32), 129);
        assert_eq!(newton_lower_bound(3, 81), 284);
        assert_eq!(truncation_bound(m2, 0, 0), 1);
        assert_eq!(truncation_bound(m2, 0, 10), 5);
        // brute force over a window well past the bound
        for q in [2u64, 3, 4] {
            let meta = PsiMeta { p: if q == 4 { 2 } else { q }, f: if q == 4 { 2 } else { 1 }, q };
            for n in 0..4i64 {
                for t in -3..12i64 {
                    let m = truncation_bound(meta, n, t);
                    let ok = |m: u64| newton_lower_bound(q, m) - n * m as i64 >= t;
                    assert!((m as u64 + 1..2000).all(ok), "q={q} n={n} t={t}");
                    assert!(m == 1 || !ok(m as u64), "q={q} n={n} t={t}");
                }
            }
        }
    }

    #[test]
    fn eval_basics() {
        let psi = solve_psi(2, 1, 32).unwrap();
        let c2 = FieldContext::new(2, 1).unwrap();
        assert!(eval_psi(&psi, &PadicScalar::zero(&c2), 20).unwrap().is_exact_zero());
        let half = rat(&c2, 1, 2, 64);
        let y = eval_psi(&psi, &half, 20).unwrap();
        assert!(y.valuation_info().at_least(0));
        assert_eq!(y.abs_precision(), Some(20));
        let c3 = FieldContext::new(3, 1).unwrap();
        let psi3 = solve_psi(3, 1, 27).unwrap();
        let five = eval_psi(&psi3, &rat(&c3, 5, 1, 32), 1).unwrap();
        assert_eq!(five.reduce_mod_p().unwrap(), Residue(vec![2]));
    }

    #[test]
    fn chain_matches_series() {
        let psi = solve_psi(2, 1, 64).unwrap();
        let c2 = FieldContext::new(2, 1).unwrap();
        for (num, den) in [(1, 4), (3, 8), (7, 16), (5, 2), (-9, 8)] {
            let x = rat(&c2, num, den, 400);
            let a = eval_psi(&psi, &x, 12).unwrap();
            let b = eval_psi_chain(&psi, &x, 12).unwrap();
            assert_eq!(a, b, "{num}/{den}");
        }
        let psi = solve_psi(3, 1, 81).unwrap();
        let c3 = FieldContext::new(3, 1).unwrap();
        for (num, den) in [(1, 3), (2, 9), (4, 27)] {
            let x = rat(&c3, num, den, 400);
            assert_eq!(eval_psi(&psi, &x, 8).unwrap(), eval_psi_chain(&psi, &x, 8).unwrap());
        }
    }

    #[test]
    fn digit_examples() {
        let psi = solve_psi(2, 1, 32).unwrap();
        let c2 = FieldContext::new(2, 1).unwrap();
        let one = rat(&c2, 1, 1, 64);
        assert_eq!(psi_digit(&psi, &one, 0).unwrap(), Residue(vec![1]));
        let half = rat(&c2, 1, 2, 64);
        assert_eq!(psi_digit(&psi, &half, -1).unwrap(), Residue(vec![1]));
        assert_eq!(psi_digit(&psi, &half, 0).unwrap(), Residue(vec![0]));
        assert_eq!(psi_digit(&psi, &PadicScalar::zero(&c2), 3).unwrap(), Residue(vec![0]));
        let d = witt_bivector_decompose(&psi, &half, 4).unwrap();
        assert_eq!(d.start, -1);
        assert_eq!(d.digits, vec![Residue(vec![1]), Residue(vec![0]), Residue(vec![0]), Residue(vec![0])]);
    }

    #[test]
    fn a_sequence_examples() {
        let c2 = FieldContext::new(2, 1).unwrap();
        let seq = a_sequence_oracle(&c2, &rat(&c2, 1, 1, 16), 1).unwrap();
        assert_eq!(seq, vec![Residue(vec![1]), Residue(vec![0])]);
        let psi = solve_psi(2, 1, 64).unwrap();
        let three = rat(&c2, 3, 1, 200);
        let seq = a_sequence_oracle(&c2, &three, 4).unwrap();
        for (i, r) in seq.iter().enumerate() {
            assert_eq!(*r, psi_digit(&psi, &three, i as i64).unwrap());
        }
    }

    #[test]
    fn congruence_examples() {
        let psi = solve_psi(2, 1, 64).unwrap();
        let c2 = FieldContext::new(2, 1).unwrap();
        let a = rat(&c2, 3, 4, 200);
        for i in 0..3 {
            assert!(bivector_congruence_check(&psi, &a, i).unwrap());
        }
        let five = rat(&c2, 5, 1, 64);
        assert!(bivector_congruence_check(&psi, &five, 0).unwrap());
        // perturbing the left side by p^{i+1} shows up at modulus p^{i+2}
        let i = 1;
        let rhs = bivector_sum(&psi, &a, i + 1).unwrap();
        let bumped = a.add(&PadicScalar::from_int(&c2, &BigInt::from(4), 64)).unwrap();
        assert!(!bumped.sub(&rhs).unwrap().valuation_info().at_least(i + 2));
    }

    #[test]
    fn zeros_small() {
        let psi = solve_psi(2, 1, 64).unwrap();
        let z = find_zeros(&psi, 1, 20).unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z[0].zero.valuation(), Some(-1));
        let z2 = find_zeros(&psi, 2, 20).unwrap();
        assert_eq!(z2.len(), 2);
        let f = schnirelmann_factor(&z).unwrap();
        assert!(f[1].valuation_info().at_least(1));
    }

    #[test]
    fn addition_law_degenerate() {
        let psi = solve_psi(2, 1, 64).unwrap();
        let c2 = FieldContext::new(2, 1).unwrap();
        let zero = PadicScalar::zero(&c2);
        let r = addition_law_check(&psi, &zero, &zero, 3, 30).unwrap();
        assert!(r.iter().all(|v| *v == Valuation::Infinite));
        let x = rat(&c2, 5, 1, 64);
        let r = addition_law_check(&psi, &x, &zero, 3, 30).unwrap();
        assert!(r.iter().all(|v| *v == Valuation::Infinite));
    }

    #[test]
    fn continuity_and_limits() {
        let psi = solve_psi(2, 1, 64).unwrap();
        let c2 = FieldContext::new(2, 1).unwrap();
        let one = rat(&c2, 1, 1, 64);
        let four = rat(&c2, 4, 1, 64);
        assert!(continuity_pair(&psi, &one, &four, 2).unwrap());
        assert!(continuity_pair(&psi, &one, &PadicScalar::zero(&c2), 6).unwrap());
        assert!(teichmuller_limit_check(&psi, &one, 0, 8).unwrap());
        let half = rat(&c2, 1, 2, 64);
        assert!(teichmuller_limit_check(&psi, &half, 1, 8).unwrap());
        let psi3 = solve_psi(3, 1, 81).unwrap();
        let c3 = FieldContext::new(3, 1).unwrap();
        assert_eq!(teichmuller_limit_check(&psi3, &rat(&c3, 1, 3, 64), 0, 8), Err(AnalysisError::ZeroDigit));
        assert!(teichmuller_limit_check(&psi3, &rat(&c3, 1, 3, 64), 1, 8).unwrap());
    }
}
