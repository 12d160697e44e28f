//! Reading Teichmüller digits off Psi: Psi(p^−i a) mod p is the digit a_i.

use num_bigint::BigInt;
use psiq::analysis::{decomposition_precision, psi_digit, witt_bivector_decompose};
use psiq::padic::{digit_expansion, FieldContext, PadicScalar};
use psiq::psi::solve_psi;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let psi = solve_psi(3, 1, 81)?;
    let ctx = FieldContext::new(3, 1)?;
    let count = 8;
    let prec = decomposition_precision(&psi, count);
    for (num, den) in [(7, 1), (5, 9), (-1, 2), (22, 27)] {
        let a = PadicScalar::from_rational(&ctx, &BigInt::from(num), &BigInt::from(den), prec)?;
        let via_psi = witt_bivector_decompose(&psi, &a, count)?;
        let direct = digit_expansion(&a, count)?;
        let shown: Vec<String> = via_psi.digits.iter().map(|d| d.to_string()).collect();
        println!("{num}/{den}: from a_{} digits {} (agrees: {})", via_psi.start, shown.join(","), via_psi == direct);
    }

    // the same over Z_4
    let psi4 = solve_psi(2, 2, 32)?;
    let ctx4 = FieldContext::new(2, 2)?;
    let a = PadicScalar::from_poly_exact(&ctx4, vec![BigInt::from(5), BigInt::from(3)], 24);
    let digits: Vec<String> =
        (0..4).map(|i| psi_digit(&psi4, &a, i).map(|d| d.to_string())).collect::<Result<_, _>>()?;
    println!("5 + 3X in Z_4: {}", digits.join(","));
    Ok(())
}
