//! Lifting functions to flat sections of the Weyl bundle and evaluating
//! them back.
//!
//! ```sh
//! cargo run --example flat_sections
//! ```

use fedosov::{
    symplectize, CoefficientSeries, Connection, FedosovConnection, Jet, SymplecticStructure,
};

fn main() -> fedosov::Result<()> {
    // on the standard chart the lift is the fiberwise Taylor expansion
    let flat = SymplecticStructure::darboux(1, 8);
    let trivial = FedosovConnection::build(&Connection::zero(&flat), &flat, 6)?;
    let function = Jet::coordinate(2, 8, 0)?.mul(&Jet::coordinate(2, 8, 1)?)?;
    let section = trivial.quantize(&CoefficientSeries::from_function(function))?;
    println!("standard chart, a = x1*x2:");
    for degree in 0..=3 {
        println!("  A[{degree}] = {}", section.component(degree));
    }

    // curved chart: the connection corrects the higher components
    let order = 10;
    let x1 = Jet::coordinate(2, order, 0)?;
    let f = Jet::one(2, order).add(&x1)?;
    let zero = Jet::zero(2, order);
    let structure =
        SymplecticStructure::validate(vec![vec![zero.clone(), f.clone()], vec![f.neg(), zero]])?;
    let connection = symplectize(&Connection::zero(&structure), &structure)?;
    let fedosov = FedosovConnection::build(&connection, &structure, 6)?;

    let a = Jet::coordinate(2, order, 0)?.mul(&Jet::coordinate(2, order, 1)?)?;
    let section = fedosov.quantize(&CoefficientSeries::from_function(a))?;
    println!("\ncurved chart, a = x1*x2:");
    for degree in 0..=2 {
        println!("  A[{degree}] = {}", section.component(degree));
    }

    // flatness: D A = 0 through the truncation order
    let derivative = fedosov.apply_d(section.element())?;
    let flat_through_order = derivative
        .grading()
        .by_degree
        .iter()
        .all(|(degree, part)| *degree > fedosov.order() || part.is_zero());
    println!(
        "D A = 0 through order {}: {flat_through_order}",
        fedosov.order()
    );

    // evaluation at e = 0 inverts the lift, including for series input
    let series = CoefficientSeries::from_real(vec![
        Jet::coordinate(2, order, 0)?,
        Jet::coordinate(2, order, 1)?,
    ])?;
    let lifted = fedosov.quantize(&series)?;
    assert_eq!(lifted.evaluate(), series);
    println!("evaluate(quantize(a)) = a for a = x1 + t*x2");
    Ok(())
}
