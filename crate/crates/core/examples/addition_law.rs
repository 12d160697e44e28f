//! Residuals of the Witt addition law applied to values of Psi_2.

use num_bigint::BigInt;
use psiq::analysis::{addition_law_check, required_input_precision};
use psiq::padic::{FieldContext, PadicScalar};
use psiq::psi::solve_psi;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let psi = solve_psi(2, 1, 64)?;
    let ctx = FieldContext::new(2, 1)?;
    let precision = 100;
    let prec = required_input_precision(&psi, 0, precision);
    let int = |n: i64| PadicScalar::from_int(&ctx, &BigInt::from(n), prec);
    for (x, y) in [(1, 1), (3, 5), (7, 12), (1, 0)] {
        let r = addition_law_check(&psi, &int(x), &int(y), 5, precision)?;
        println!("x = {x}, y = {y}: {r:?}");
    }
    Ok(())
}
