//! Symplectic structures in coordinates: validation, the Poisson bracket,
//! and the musical isomorphisms.
//!
//! ```sh
//! cargo run --example poisson_geometry
//! ```

use fedosov::{Jet, SymplecticStructure};

fn main() -> fedosov::Result<()> {
    let order = 8;
    let x1 = Jet::coordinate(2, order, 0)?;
    let x2 = Jet::coordinate(2, order, 1)?;

    // omega_{12} = 1 + x1: a non-constant form on the plane
    let f = Jet::one(2, order).add(&x1)?;
    let zero = Jet::zero(2, order);
    let structure =
        SymplecticStructure::validate(vec![vec![zero.clone(), f.clone()], vec![f.neg(), zero]])?;
    println!("omega_12   = {}", structure.omega_lower()[0][1]);
    println!("omega^12   = {}", structure.omega_upper()[0][1]);

    let bracket = structure.poisson_bracket(&x1, &x2)?;
    println!("{{x1, x2}}   = {bracket}");

    // Jacobi identity, exactly
    let a = x1.mul(&x1)?;
    let b = x1.mul(&x2)?;
    let c = x2.mul(&x2)?;
    let jacobi = structure
        .poisson_bracket(&structure.poisson_bracket(&a, &b)?, &c)?
        .add(&structure.poisson_bracket(&structure.poisson_bracket(&b, &c)?, &a)?)?
        .add(&structure.poisson_bracket(&structure.poisson_bracket(&c, &a)?, &b)?)?;
    println!("jacobi sum = {jacobi}");
    assert!(jacobi.is_zero());

    // musical isomorphisms invert each other
    let vector = vec![x2.clone(), x1.mul(&x2)?];
    let covector = structure.musical_flat(&vector)?;
    let back = structure.musical_sharp(&covector)?;
    println!("\nvector     = ({}, {})", vector[0], vector[1]);
    println!("flat       = ({}, {})", covector[0], covector[1]);
    println!("sharp∘flat = ({}, {})", back[0], back[1]);
    assert_eq!(back, vector);

    // a degenerate candidate is rejected with named violations
    let bad = SymplecticStructure::validate(vec![
        vec![Jet::zero(2, order), x1.clone()],
        vec![x1.neg(), Jet::zero(2, order)],
    ]);
    println!("\nx1-scaled form: {}", bad.unwrap_err());
    Ok(())
}
