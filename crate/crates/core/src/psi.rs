//! The series `Ψ_q`, its Candilera form `u_q` and its compositional inverse.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::PsiError;
use crate::padic::{int_valuation, is_prime};
use crate::series::ZSeries;

/// `(p, f, q)` for a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiMeta {
    pub p: u64,
    pub f: u32,
    pub q: u64,
}

impl PsiMeta {
    pub fn new(p: u64, f: u32) -> Result<Self, PsiError> {
        if !is_prime(p) {
            return Err(PsiError::InvalidParameters(format!("{p} is not prime")));
        }
        if f == 0 {
            return Err(PsiError::InvalidParameters("f must be at least 1".into()));
        }
        let q = p
            .checked_pow(f)
            .filter(|&q| q < 1 << 32)
            .ok_or_else(|| PsiError::InvalidParameters(format!("q = {p}^{f} is too large")))?;
        Ok(PsiMeta { p, f, q })
    }
}

/// `Ψ_q` modulo `T^{N+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiTable {
    pub meta: PsiMeta,
    pub series: ZSeries,
    pub iterations_used: usize,
}

impl PsiTable {
    /// Wraps an arbitrary series as a table (no checks); used for negative controls.
    pub fn from_series(meta: PsiMeta, series: ZSeries) -> Self {
        PsiTable { meta, series, iterations_used: 0 }
    }

    pub fn p(&self) -> u64 {
        self.meta.p
    }

    pub fn q(&self) -> u64 {
        self.meta.q
    }

    pub fn trunc_degree(&self) -> usize {
        self.series.trunc_degree()
    }

    pub fn coeff(&self, n: usize) -> &BigInt {
        self.series.coeff(n)
    }

    /// `(n, v_p(b_n))` for `1 ≤ n ≤ N`, `None` for vanishing coefficients.
    pub fn valuations(&self) -> Vec<(usize, Option<u32>)> {
        (1..=self.trunc_degree())
            .map(|n| {
                let c = self.coeff(n);
                (n, if c.is_zero() { None } else { Some(int_valuation(c, self.p())) })
            })
            .collect()
    }
}

fn p_pow(p: u64, k: u64) -> BigInt {
    num_traits::pow(BigInt::from(p), k as usize)
}

/// `L(φ) = T − Σ_{j≥1, q^j≤N} p^{-j} φ(p^j T)^{q^j}`.
fn contraction(meta: PsiMeta, phi: &ZSeries, n: usize) -> Result<ZSeries, PsiError> {
    let mut out = ZSeries::variable(n);
    let mut j = 1u64;
    let mut qj = meta.q;
    while qj as usize <= n {
        let pj = p_pow(meta.p, j);
        let term = phi.substitute_scaled(&pj).pow_trunc(qj, n).exact_div_scalar(&pj)?;
        for k in (qj as usize)..=term.trunc_degree().min(n) {
            let c = term.coeff(k);
            if !c.is_zero() {
                let v = out.coeff(k) - c;
                out.set_coeff(k, v);
            }
        }
        j += 1;
        match qj.checked_mul(meta.q) {
            Some(x) => qj = x,
            None => break,
        }
    }
    Ok(out)
}

/// `Ψ_q` modulo `T^{N+1}` as the fixed point of [`contraction`] started at `T`.
pub fn solve_psi(p: u64, f: u32, n: usize) -> Result<PsiTable, PsiError> {
    let meta = PsiMeta::new(p, f)?;
    if n == 0 {
        return Err(PsiError::InvalidParameters("truncation degree must be at least 1".into()));
    }
    let mut phi = ZSeries::variable(n);
    let max_iter = n + 2;
    for it in 1..=max_iter {
        let next = contraction(meta, &phi, n)?;
        if next == phi {
            return Ok(PsiTable { meta, series: phi, iterations_used: it });
        }
        phi = next;
    }
    Err(PsiError::NoConvergence(max_iter))
}

/// `u_q ∈ 1 + T Z[[T]]` modulo `T^{N+1}` with `Ψ_q(T) = T u_q(T^{q-1})`.
pub fn solve_u(p: u64, f: u32, n: usize) -> Result<ZSeries, PsiError> {
    let meta = PsiMeta::new(p, f)?;
    let q = meta.q;
    let mut phi = ZSeries::one(n);
    let max_iter = n + 2;
    for _ in 0..max_iter {
        let mut next = ZSeries::one(n);
        let mut j = 1u64;
        let mut qj = q;
        loop {
            let shift = ((qj - 1) / (q - 1)) as usize;
            if shift > n {
                break;
            }
            let scale = p_pow(p, j * (qj - 1));
            let inner = phi.substitute_scaled(&p_pow(p, j * (q - 1)));
            let powered = inner.pow_trunc(qj, n - shift);
            for k in 0..=(n - shift).min(powered.trunc_degree()) {
                let c = powered.coeff(k);
                if !c.is_zero() {
                    let v = next.coeff(k + shift) - c * &scale;
                    next.set_coeff(k + shift, v);
                }
            }
            j += 1;
            match qj.checked_mul(q) {
                Some(x) => qj = x,
                None => break,
            }
        }
        if next == phi {
            return Ok(phi);
        }
        phi = next;
    }
    Err(PsiError::NoConvergence(max_iter))
}

/// Checks `Ψ(T) = T·u(T^{q-1})` coefficientwise up to the table's truncation.
pub fn check_candilera(psi: &PsiTable, u: &ZSeries) -> Result<bool, PsiError> {
    let n = psi.trunc_degree();
    let step = (psi.q() - 1) as usize;
    let needed = (n - 1) / step;
    if u.trunc_degree() < needed {
        return Err(PsiError::TruncationMismatch(needed, u.trunc_degree()));
    }
    let zero = BigInt::zero();
    Ok((0..=n).all(|k| {
        let expected = if k >= 1 && (k - 1) % step == 0 { u.coeff((k - 1) / step) } else { &zero };
        psi.coeff(k) == expected
    }))
}

/// Outcome of recomputing the functional equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Residual {
    Clean,
    /// First degree at which `Σ_j p^{-j}Ψ(p^jT)^{q^j} − T` is nonzero.
    Degree(usize),
}

fn naive_mul(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Recomputes the functional equation over `Q` with plain convolutions,
/// independently of the solver's kernels.
pub fn functional_residual(psi: &PsiTable) -> Residual {
    let n = psi.trunc_degree();
    let (p, q) = (psi.p(), psi.q());
    let mut total = vec![BigRational::zero(); n + 1];
    let mut j = 0u64;
    let mut qj = 1u64;
    while qj as usize <= n {
        let scale = p_pow(p, j);
        let mut pw = BigInt::one();
        let scaled: Vec<BigInt> = psi
            .series
            .coeffs()
            .iter()
            .map(|c| {
                let v = c * &pw;
                pw *= &scale;
                v
            })
            .collect();
        // scaled^qj by square-and-multiply on plain vectors
        let mut acc: Vec<BigInt> = {
            let mut one = vec![BigInt::zero(); n + 1];
            one[0] = BigInt::one();
            one
        };
        let mut base = scaled;
        let mut e = qj;
        while e > 0 {
            if e & 1 == 1 {
                acc = naive_mul(&acc, &base, n);
            }
            e >>= 1;
            if e > 0 {
                base = naive_mul(&base, &base, n);
            }
        }
        for (k, c) in acc.into_iter().enumerate() {
            if !c.is_zero() {
                total[k] += BigRational::new(c, scale.clone());
            }
        }
        j += 1;
        match qj.checked_mul(q) {
            Some(x) => qj = x,
            None => break,
        }
    }
    if n >= 1 {
        total[1] -= BigRational::one();
    }
    match total.iter().position(|c| !c.is_zero()) {
        Some(k) => Residual::Degree(k),
        None => Residual::Clean,
    }
}

/// Compositional inverse `β` of `Ψ` modulo `T^{N+1}` by Lagrange inversion,
/// `[T^k]β = (1/k)[T^{k-1}](T/Ψ)^k`; each division by `k` must be exact.
pub fn inverse_series(psi: &PsiTable) -> Result<ZSeries, PsiError> {
    let n = psi.trunc_degree();
    let mut out = vec![BigInt::zero(); n + 1];
    if n == 0 {
        return Ok(ZSeries::from_coeffs(out));
    }
    // Ψ/T modulo T^n
    let quotient = ZSeries::from_coeffs(psi.series.coeffs()[1..].to_vec());
    let g = quotient.inverse_unit().ok_or_else(|| PsiError::InvalidParameters("Ψ must start with ±T".into()))?;
    let m = n - 1;
    let mut power = ZSeries::one(m);
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        power = power.mul_trunc(&g, m);
        let (quo, rem) = power.coeff(k - 1).div_rem(&BigInt::from(k));
        if !rem.is_zero() {
            return Err(PsiError::NonIntegralInverse(k));
        }
        *slot = quo;
    }
    Ok(ZSeries::from_coeffs(out))
}
