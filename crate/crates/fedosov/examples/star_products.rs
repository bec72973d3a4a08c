//! Star products: the deformed multiplication of functions, on the
//! standard chart and on a curved one.
//!
//! ```sh
//! cargo run --example star_products
//! ```

use fedosov::render::{default_names, series_lines};
use fedosov::{
    moyal_reference, star_product, symplectize, CoefficientSeries, Connection, Jet,
    SymplecticStructure,
};

fn main() -> fedosov::Result<()> {
    let names = default_names(2);

    // x1 * x2 on the standard chart
    let order = 8;
    let flat = SymplecticStructure::darboux(1, order);
    let a = CoefficientSeries::from_function(Jet::coordinate(2, order, 0)?);
    let b = CoefficientSeries::from_function(Jet::coordinate(2, order, 1)?);
    let ab = star_product(&Connection::zero(&flat), &flat, &a, &b, 2)?;
    println!("x1 * x2 on the standard chart:");
    for line in series_lines(&ab, &names) {
        println!("  {line}");
    }

    // the commutator recovers the Poisson bracket at leading order
    let ba = star_product(&Connection::zero(&flat), &flat, &b, &a, 2)?;
    let bracket = ab.sub(&ba)?.times_i_over_t()?;
    println!(
        "(i/t)(x1*x2 - x2*x1) leading entry = {}",
        bracket.entry(0).re
    );

    // closed-form oracle agrees with the geometric pipeline
    let p = CoefficientSeries::from_function(Jet::coordinate(2, order, 0)?.pow(2)?);
    let q = CoefficientSeries::from_function(Jet::coordinate(2, order, 1)?.pow(2)?);
    let via_pipeline = star_product(&Connection::zero(&flat), &flat, &p, &q, 3)?;
    let via_oracle = moyal_reference(&p, &q, &flat, 3)?;
    assert_eq!(via_pipeline, via_oracle);
    println!("\nx1^2 * x2^2 matches the closed form:");
    for line in series_lines(&via_pipeline, &names) {
        println!("  {line}");
    }

    // a curved chart: omega_12 = 1 + x1
    let order = 10;
    let x1 = Jet::coordinate(2, order, 0)?;
    let f = Jet::one(2, order).add(&x1)?;
    let zero = Jet::zero(2, order);
    let structure =
        SymplecticStructure::validate(vec![vec![zero.clone(), f.clone()], vec![f.neg(), zero]])?;
    let connection = symplectize(&Connection::zero(&structure), &structure)?;
    let a = CoefficientSeries::from_function(Jet::coordinate(2, order, 0)?);
    let b = CoefficientSeries::from_function(Jet::coordinate(2, order, 1)?);
    let ab = star_product(&connection, &structure, &a, &b, 2)?;
    println!("\nx1 * x2 on the curved chart:");
    for line in series_lines(&ab, &names) {
        println!("  {line}");
    }

    // associativity through t^2
    let c = CoefficientSeries::from_function(x1.mul(&Jet::coordinate(2, order, 1)?)?);
    let left = star_product(&connection, &structure, &ab, &c, 2)?;
    let bc = star_product(&connection, &structure, &b, &c, 2)?;
    let right = star_product(&connection, &structure, &a, &bc, 2)?;
    println!(
        "\n(a*b)*c agrees with a*(b*c) through t^2: {}",
        left.agrees_with(&right)
    );
    Ok(())
}
