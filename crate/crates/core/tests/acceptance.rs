//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see the
//! table; the test fails if any line fails.

use std::error::Error;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psiq::analysis::{
    a_sequence_oracle, addition_law_check, bivector_congruence_check, decomposition_precision, eval_psi, find_zeros,
    psi_digit, random_padic_rational, random_zq, required_input_precision, schnirelmann_factor,
    schnirelmann_partial_check, teichmuller_limit_check, truncation_bound, uniform_continuity_report,
    witt_bivector_decompose,
};
use psiq::cli::{addition_residual_problem, suite_polygon, witt_law_check};
use psiq::error::AnalysisError;
use psiq::fixtures::{check_appendix, Appendix};
use psiq::padic::{digit_expansion, FieldContext, PadicScalar, Valuation};
use psiq::polygon::{compare_newton, newton_polygon, q_int, zero_counts};
use psiq::psi::{check_candilera, functional_residual, solve_psi, solve_u, PsiMeta, PsiTable, Residual};
use psiq::witt::{
    ghost_transform, isobaric_check, phi_polynomials, shift_congruence_check, GhostDirection, WittRing, WittVector,
};

type Outcome = Result<(bool, String), Box<dyn Error>>;
type Criterion = (&'static str, fn() -> Outcome);

const SEED: u64 = 20240611;
const COEFF_TIME_LIMIT: Duration = Duration::from_secs(10);
const ZEROS_TIME_LIMIT: Duration = Duration::from_secs(60);
const ZERO_RESIDUAL: i64 = 20;
const ADDITION_PRECISION: i64 = 100;
const ADDITION_N_MAX: usize = 4;
const CONTINUITY_J_MAX: i64 = 6;
const TEICHMULLER_K_MAX: u32 = 8;
const MAX_DECOMPOSITION_DIGITS: usize = 12;

fn c1_exact_coefficients() -> Outcome {
    let start = Instant::now();
    let psi = solve_psi(2, 1, 24)?;
    let elapsed = start.elapsed();
    let table = Appendix::bundled();
    let mut bad = Vec::new();
    for (n, b) in &table.psi2_coefficients {
        if psi.coeff(*n) != b {
            bad.push(*n);
        }
    }
    let ok = table.psi2_coefficients.len() == 24 && bad.is_empty() && elapsed < COEFF_TIME_LIMIT;
    Ok((ok, format!("{}/24 rows, {elapsed:.2?} (limit {COEFF_TIME_LIMIT:?}), mismatches {bad:?}", 24 - bad.len())))
}

fn c2_valuation_tables() -> Outcome {
    let table = Appendix::bundled();
    let mut checks = check_appendix(&table, 2);
    checks.extend(check_appendix(&table, 3));
    let checks: Vec<_> = checks.into_iter().filter(|c| c.name.contains("valuations")).collect();
    let ok = checks.len() == 2
        && checks.iter().all(|c| c.passed)
        && table.psi2_valuations.len() == 32
        && table.psi3_valuations.len() == 40;
    let detail = checks.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect::<Vec<_>>().join("; ");
    Ok((ok, detail))
}

fn c3_spot_checks() -> Outcome {
    let pow = |p: u64, e: usize| num_traits::pow(BigInt::from(p), e);
    let psi5 = solve_psi(5, 1, 13)?;
    let psi7 = solve_psi(7, 1, 13)?;
    let cases = [
        ("Psi_5 b_5", psi5.coeff(5).clone(), -pow(5, 4)),
        ("Psi_5 b_9", psi5.coeff(9).clone(), pow(5, 13)),
        ("Psi_5 b_13", psi5.coeff(13).clone(), -BigInt::from(53 * 59) * pow(5, 21)),
        ("Psi_7 b_7", psi7.coeff(7).clone(), -pow(7, 6)),
        ("Psi_7 b_13", psi7.coeff(13).clone(), pow(7, 19)),
    ];
    let bad: Vec<&str> = cases.iter().filter(|(_, got, want)| got != want).map(|c| c.0).collect();
    Ok((bad.is_empty(), format!("{}/5 exact, mismatches {bad:?}", 5 - bad.len())))
}

fn c4_functional_identity() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (p, f, n) in [(2u64, 1u32, 64usize), (3, 1, 81), (2, 2, 32), (5, 1, 30)] {
        let psi = solve_psi(p, f, n)?;
        let clean = functional_residual(&psi) == Residual::Clean;
        let cand = check_candilera(&psi, &solve_u(p, f, n)?)?;
        ok &= clean && cand;
        detail.push(format!("({p},{f},{n}) residual {} candilera {}", clean, cand));
    }
    Ok((ok, detail.join("; ")))
}

fn c5_polygons() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (p, f, n) in [(2u64, 1u32, 64usize), (3, 1, 81), (2, 2, 32), (5, 1, 50)] {
        let psi = solve_psi(p, f, n)?;
        let checks = suite_polygon(&psi)?;
        let passed = checks.iter().all(|c| c.passed);
        ok &= passed;
        detail.push(format!("q={} {}", psi.q(), if passed { "ok" } else { "mismatch" }));
    }
    Ok((ok, detail.join(", ")))
}

fn c6_zeros() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for (p, expected) in [(2u64, vec![1usize, 2, 4]), (3, vec![2, 6])] {
        let levels = expected.len();
        let meta = PsiMeta::new(p, 1)?;
        let degree = truncation_bound(meta, levels as i64, ZERO_RESIDUAL + 4) + 1;
        let psi = solve_psi(p, 1, degree)?;
        let mut factors = Vec::new();
        let mut counts = Vec::new();
        for n in 1..=levels {
            let zeros = find_zeros(&psi, n, ZERO_RESIDUAL)?;
            counts.push(zeros.len());
            ok &= zeros
                .iter()
                .all(|z| z.zero.valuation() == Some(-(n as i64)) && z.residual_valuation.at_least(ZERO_RESIDUAL));
            let factor = schnirelmann_factor(&zeros)?;
            ok &= factor.iter().skip(1).all(|c| c.valuation_info().at_least(n as i64));
            factors.push(factor);
            ok &= schnirelmann_partial_check(&psi, &factors)?;
        }
        ok &= counts == expected;
        detail.push(format!("p={p} counts {counts:?}"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < ZEROS_TIME_LIMIT;
    Ok((ok, format!("{}, {elapsed:.2?} (limit {ZEROS_TIME_LIMIT:?})", detail.join(", "))))
}

fn table_for(p: u64, f: u32) -> Result<PsiTable, Box<dyn Error>> {
    let degree = match (p, f) {
        (2, 1) => 64,
        (3, 1) => 81,
        _ => 32,
    };
    Ok(solve_psi(p, f, degree)?)
}

fn c7_digit_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = Vec::new();
    for (p, f, depth) in [(2u64, 1u32, 8usize), (3, 1, 6), (2, 2, 5)] {
        let psi = table_for(p, f)?;
        let ctx = FieldContext::new(p, f)?;
        for s in 0..100 {
            let i_max = rng.gen_range(0..=depth);
            let a = random_zq(&mut rng, &ctx, 12, decomposition_precision(&psi, i_max + 1));
            let oracle = a_sequence_oracle(&ctx, &a, i_max)?;
            for (i, want) in oracle.iter().enumerate() {
                if psi_digit(&psi, &a, i as i64)? != *want {
                    failures.push(format!("Z_{} sample {s} digit {i}", psi.q()));
                }
            }
        }
    }
    for p in [2u64, 3] {
        let psi = table_for(p, 1)?;
        let ctx = FieldContext::new(p, 1)?;
        for s in 0..100 {
            let count = rng.gen_range(1..=MAX_DECOMPOSITION_DIGITS);
            let (label, a) = random_padic_rational(&mut rng, &ctx, 3, decomposition_precision(&psi, count))?;
            if witt_bivector_decompose(&psi, &a, count)? != digit_expansion(&a, count)? {
                failures.push(format!("Q_{p} sample {s}: {label}"));
            }
        }
    }
    Ok((failures.is_empty(), format!("600 samples, failures {failures:?}")))
}

fn c8_congruences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let mut failures = Vec::new();
    let mut units = 0;
    for p in [2u64, 3] {
        let psi = table_for(p, 1)?;
        let ctx = FieldContext::new(p, 1)?;
        for s in 0..50 {
            let i = rng.gen_range(0..=3i64);
            let prec = decomposition_precision(&psi, i as usize + 4).max(64);
            let (label, a) = random_padic_rational(&mut rng, &ctx, 3, prec)?;
            if !bivector_congruence_check(&psi, &a, i)? {
                failures.push(format!("p={p} sample {s}: {label}, i={i}"));
            }
        }
        let mut taken = 0;
        while taken < 100 {
            let a = random_zq(&mut rng, &ctx, 6, 16);
            if a.valuation() != Some(0) {
                continue;
            }
            taken += 1;
            if !a.sub(&eval_psi(&psi, &a, 1)?)?.valuation_info().at_least(1) {
                failures.push(format!("p={p} unit {a}"));
            }
        }
        units += taken;
    }
    Ok((failures.is_empty(), format!("100 congruence pairs, {units} units, failures {failures:?}")))
}

fn c9_witt() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (p, n) in [(2u64, 3usize), (3, 2)] {
        let phis = phi_polynomials(p, n)?;
        let iso = isobaric_check(&phis, p);
        let shift = shift_congruence_check(&phis);
        let ring = WittRing::Integers { p };
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + p);
        let mut round = true;
        for _ in 0..50 {
            let xs: Vec<i64> = (0..=n).map(|_| rng.gen_range(-1000..1000)).collect();
            let a = WittVector::from_ints(&ring, &xs);
            let g = ghost_transform(&a, GhostDirection::ToGhost)?;
            let back = ghost_transform(&WittVector::new(ring.clone(), g)?, GhostDirection::FromGhost)?;
            round &= back == a.components;
        }
        let field = witt_law_check(&WittRing::finite_field(p, 1)?, n + 1, 200, SEED)?;
        let zmod = witt_law_check(&WittRing::ZMod { p, k: 2 }, n + 1, 200, SEED)?;
        ok &= iso && shift && round && field.passed && zmod.passed;
        detail.push(format!(
            "p={p}: isobaric {iso}, shift {shift}, ghost {round}, F_{p} {}, Z/{} {}",
            field.passed,
            p * p,
            zmod.passed
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn c10_addition_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    let mut failures = Vec::new();
    let mut worst = i64::MAX;
    for p in [2u64, 3] {
        let psi = table_for(p, 1)?;
        let ctx = FieldContext::new(p, 1)?;
        let input = required_input_precision(&psi, 0, ADDITION_PRECISION);
        for s in 0..20 {
            let x = random_zq(&mut rng, &ctx, 10, input);
            let y = random_zq(&mut rng, &ctx, 10, input);
            let r = addition_law_check(&psi, &x, &y, ADDITION_N_MAX, ADDITION_PRECISION)?;
            if let Some(Valuation::Finite(v)) = r.last() {
                worst = worst.min(*v);
            }
            if let Some(why) = addition_residual_problem(&r) {
                failures.push(format!("p={p} pair {s}: {why}"));
            }
        }
        let x = random_zq(&mut rng, &ctx, 10, input);
        let zero = PadicScalar::zero(&ctx);
        let r = addition_law_check(&psi, &x, &zero, ADDITION_N_MAX, ADDITION_PRECISION)?;
        if !r.iter().all(|v| *v == Valuation::Infinite) {
            failures.push(format!("p={p} y=0: {r:?}"));
        }
    }
    Ok((failures.is_empty(), format!("40 pairs, smallest r_4 = {worst}, failures {failures:?}")))
}

fn c11_uniform_continuity() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for p in [2u64, 3] {
        let r = uniform_continuity_report(&table_for(p, 1)?, 200, CONTINUITY_J_MAX, SEED)?;
        ok &= r.failures == 0 && r.samples == 200;
        detail.push(format!("p={p}: {}/{} pass", r.samples - r.failures, r.samples));
    }
    Ok((ok, detail.join(", ")))
}

fn c12_teichmuller_limit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 12);
    let mut failures = Vec::new();
    let mut taken = 0;
    for p in [2u64, 3] {
        let psi = table_for(p, 1)?;
        let ctx = FieldContext::new(p, 1)?;
        let prec = required_input_precision(&psi, -2, TEICHMULLER_K_MAX as i64 + 2) + 8;
        let mut n = 0;
        while n < 10 {
            let (label, x) = random_padic_rational(&mut rng, &ctx, 3, prec)?;
            let v = x.valuation().expect("nonzero");
            let i = -(v + rng.gen_range(0..=2));
            match teichmuller_limit_check(&psi, &x, i, TEICHMULLER_K_MAX) {
                Err(AnalysisError::ZeroDigit) => continue,
                Err(e) => return Err(e.into()),
                Ok(passed) => {
                    n += 1;
                    if !passed {
                        failures.push(format!("p={p} x={label} i={i}"));
                    }
                }
            }
        }
        taken += n;
    }
    Ok((failures.is_empty(), format!("{taken} samples, k <= {TEICHMULLER_K_MAX}, failures {failures:?}")))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 12] = [
        ("exact coefficients", c1_exact_coefficients),
        ("valuation tables", c2_valuation_tables),
        ("small-prime spot checks", c3_spot_checks),
        ("functional identity", c4_functional_identity),
        ("polygon agreement", c5_polygons),
        ("zeros", c6_zeros),
        ("digit oracles", c7_digit_oracles),
        ("congruences", c8_congruences),
        ("witt layer", c9_witt),
        ("addition law", c10_addition_law),
        ("uniform continuity", c11_uniform_continuity),
        ("teichmuller limit", c12_teichmuller_limit),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        println!("{} {:>2} {name}: {detail} [{:.1?}]", if ok { "PASS" } else { "FAIL" }, k + 1, start.elapsed());
        if !ok {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn polygon_slopes_match_zero_counts() {
    let psi = solve_psi(2, 1, 64).unwrap();
    let nw = newton_polygon(&psi.valuations()).unwrap();
    assert!(compare_newton(&nw, 2, 64).matches());
    let counts = zero_counts(&nw).unwrap();
    assert!(counts.contains(&(q_int(-1), q_int(1))));
    assert!(counts.contains(&(q_int(-3), q_int(4))));
}
