//! Witt addition polynomials and Witt vector arithmetic.

use psiq::witt::{
    ghost_transform, isobaric_check, phi_polynomials, shift_congruence_check, witt_add, witt_scalar_multiple,
    GhostDirection, WittRing, WittVector,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let phis = phi_polynomials(2, 2)?;
    for (i, phi) in phis.iter().enumerate() {
        println!("phi_{i} = {phi}");
    }
    println!("isobaric: {}, shift congruence: {}", isobaric_check(&phis, 2), shift_congruence_check(&phis));

    // W_3(F_2) is Z/8
    let f2 = WittRing::finite_field(2, 1)?;
    let one = WittVector::from_ints(&f2, &[1, 0, 0]);
    for m in 1..=8 {
        println!("{m}·1 = {:?}", witt_scalar_multiple(&one, m)?.components);
    }

    let z = WittRing::Integers { p: 3 };
    let a = WittVector::from_ints(&z, &[2, 5, 1]);
    let b = WittVector::from_ints(&z, &[4, -1, 7]);
    let s = witt_add(&a, &b)?;
    println!("over Z at p = 3: {:?} + {:?} = {:?}", a.components, b.components, s.components);
    println!("ghost components: {:?}", ghost_transform(&s, GhostDirection::ToGhost)?);
    Ok(())
}
