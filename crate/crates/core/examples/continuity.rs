//! Uniform continuity of Psi_3 and the Teichmüller limit Psi(p^i x)^(p^k) → [x_−i].

use num_bigint::BigInt;
use psiq::analysis::{required_input_precision, teichmuller_limit_check, uniform_continuity_report};
use psiq::padic::{FieldContext, PadicScalar};
use psiq::psi::solve_psi;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let psi = solve_psi(3, 1, 81)?;
    let report = uniform_continuity_report(&psi, 100, 6, 1)?;
    println!("uniform continuity: {} of {} samples fail", report.failures, report.samples);

    let ctx = FieldContext::new(3, 1)?;
    let prec = required_input_precision(&psi, -2, 10) + 8;
    let x = PadicScalar::from_rational(&ctx, &BigInt::from(41), &BigInt::from(9), prec)?;
    for i in [2, 1, 0] {
        println!("i = {i}: limit holds to k = 8: {}", teichmuller_limit_check(&psi, &x, i, 8)?);
    }
    Ok(())
}
