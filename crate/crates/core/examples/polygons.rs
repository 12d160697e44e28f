//! Newton and valuation polygons of Psi_3 against their closed forms.

use psiq::polygon::{
    compare_newton, compare_valuation, dual_polygon, newton_polygon, q_to_string, valuation_polygon, zero_counts,
};
use psiq::psi::solve_psi;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (q, n) = (3, 81);
    let psi = solve_psi(3, 1, n)?;
    let vals = psi.valuations();

    let newton = newton_polygon(&vals)?;
    let cmp = compare_newton(&newton, q, n);
    println!("Newton polygon, trusted vertices:");
    for v in &cmp.trusted {
        println!("  {v}");
    }
    println!("matches closed form: {}", cmp.matches());

    let val = valuation_polygon(&vals)?;
    println!("valuation polygon matches: {}", compare_valuation(&val, q, n).matches());
    println!("dual of negated Newton polygon agrees: {}", dual_polygon(&newton.negate()) == val);

    for (slope, len) in zero_counts(&newton)? {
        println!("zeros of valuation {}: {}", q_to_string(&slope), q_to_string(&len));
    }
    Ok(())
}
