//! Exact coefficients of Psi_2 and Psi_3 with their valuations.

use psiq::padic::int_valuation;
use psiq::psi::{functional_residual, solve_psi};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let psi = solve_psi(2, 1, 24)?;
    println!("Psi_2 up to T^24 ({:?})", functional_residual(&psi));
    for n in 1..=24 {
        let b = psi.coeff(n);
        println!("b_{n:<2} v={:<3} {b}", int_valuation(b, 2));
    }

    // only n ≡ 1 mod q−1 survive
    let psi3 = solve_psi(3, 1, 15)?;
    let nonzero: Vec<_> = (1..=15).filter(|&n| !psi3.coeff(n).eq(&0.into())).collect();
    println!("Psi_3 nonzero degrees: {nonzero:?}");
    Ok(())
}
