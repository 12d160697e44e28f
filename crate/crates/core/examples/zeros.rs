//! Zeros of Psi_2 of valuation −1, −2, −3 and the Schnirelmann factors they give.

use psiq::analysis::{find_zeros, schnirelmann_factor, schnirelmann_partial_check, truncation_bound};
use psiq::psi::{solve_psi, PsiMeta};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let target = 20;
    let levels = 3;
    let degree = truncation_bound(PsiMeta::new(2, 1)?, levels, target + 4) + 1;
    let psi = solve_psi(2, 1, degree)?;
    let mut factors = Vec::new();
    for n in 1..=levels as usize {
        let zeros = find_zeros(&psi, n, target)?;
        println!("valuation -{n}: {} zeros", zeros.len());
        for z in &zeros {
            let digits = z.zero_digits(8)?;
            let shown: Vec<String> = digits.digits.iter().map(|d| d.to_string()).collect();
            println!("  start {} digits {} residual {:?}", digits.start, shown.join(""), z.residual_valuation);
        }
        factors.push(schnirelmann_factor(&zeros)?);
        println!("  x·psi_1⋯psi_{n} agrees with Psi: {}", schnirelmann_partial_check(&psi, &factors)?);
    }
    Ok(())
}
