//! Arithmetic in Q_4 = Q_2(X)/(X^2 + X + 1) with per-element precision.

use num_bigint::BigInt;
use psiq::padic::{digit_expansion, field_arith, teichmuller_lift, FieldContext, FieldOp, PadicScalar};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = FieldContext::with_modulus(2, &[1, 1, 1])?;
    let a = PadicScalar::from_poly_exact(&ctx, vec![BigInt::from(3), BigInt::from(1)], 16);
    let b = PadicScalar::from_rational(&ctx, &BigInt::from(1), &BigInt::from(12), 16)?;
    println!("a = {a}\nb = {b}");
    println!("a·b = {}", field_arith(FieldOp::Mul, &a, &b)?);
    println!("1/a = {}", field_arith(FieldOp::Inv, &a, &a)?);

    // cancellation of every known digit is reported, not silently kept
    println!("b − b: {:?}", field_arith(FieldOp::Sub, &b, &b).map(|x| x.to_string()));

    let tau = teichmuller_lift(&a, 16)?;
    println!("[a mod 2] = {tau}, tau^4 − tau = {}", tau.pow_u64(4).sub(&tau)?);
    let digits = digit_expansion(&b, 6)?;
    let shown: Vec<String> = digits.digits.iter().map(|d| d.to_string()).collect();
    println!("digits of b from index {}: {}", digits.start, shown.join(" "));
    Ok(())
}
