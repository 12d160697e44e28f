//! Evaluating Psi_2 far from the unit disc, where the series alone is too short.

use num_bigint::BigInt;
use psiq::analysis::{eval_psi, psi_value, required_input_precision};
use psiq::padic::{FieldContext, PadicScalar};
use psiq::psi::solve_psi;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let psi = solve_psi(2, 1, 64)?;
    let ctx = FieldContext::new(2, 1)?;
    let t = 8;
    for k in 0..=8u32 {
        let v = -(k as i64);
        let prec = required_input_precision(&psi, v, t);
        let x = PadicScalar::from_rational(&ctx, &BigInt::from(3), &BigInt::from(2u64.pow(k)), prec)?;
        let series = eval_psi(&psi, &x, t).map(|y| y.to_string()).unwrap_or_else(|e| format!("({e})"));
        println!("Psi(3/2^{k}) = {}   series: {series}", psi_value(&psi, &x, t)?);
    }
    Ok(())
}
