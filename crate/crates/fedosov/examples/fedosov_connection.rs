//! Building the flat connection on the Weyl bundle by graded recursion,
//! with its curvature diagnostics.
//!
//! ```sh
//! cargo run --example fedosov_connection
//! ```

use fedosov::{symplectize, Connection, FedosovConnection, Jet, SymplecticStructure, WeylElement};

fn main() -> fedosov::Result<()> {
    // flat case first: the correction vanishes identically
    let flat = SymplecticStructure::darboux(1, 8);
    let trivial = FedosovConnection::build(&Connection::zero(&flat), &flat, 6)?;
    println!(
        "standard chart: rho = {} ({} components)",
        trivial.rho(),
        trivial.components().len()
    );

    // curved chart: omega_12 = 1 + x1
    let order = 10;
    let x1 = Jet::coordinate(2, order, 0)?;
    let f = Jet::one(2, order).add(&x1)?;
    let zero = Jet::zero(2, order);
    let structure =
        SymplecticStructure::validate(vec![vec![zero.clone(), f.clone()], vec![f.neg(), zero]])?;
    let connection = symplectize(&Connection::zero(&structure), &structure)?;
    let fedosov = FedosovConnection::build(&connection, &structure, 8)?;

    println!("\ncurved chart, truncation order {}:", fedosov.order());
    println!("curvature element R = {}", fedosov.curvature_element());
    for (degree, part) in fedosov.components() {
        if *degree > fedosov.order() {
            break;
        }
        println!("rho[{degree}] = {part}");
    }

    // D is flat: the element-level curvature is the symplectic form itself
    let report = fedosov.curvature_report()?;
    println!("\nflat: {}", report.is_flat());
    println!("central curvature = {}", report.omega_central);

    // D(1) = 0, D(x1) = dx1 - corrections, D² probes vanish
    let one = WeylElement::one(fedosov.context());
    println!("D(1) = {}", fedosov.apply_d(&one)?);

    // drop one component and watch the residual appear in the degree below
    let corrupted = fedosov.with_component_removed(4);
    let broken = corrupted.curvature_report()?;
    println!(
        "\nafter dropping rho[4]: flat: {}, first residual degree: {:?}",
        broken.is_flat(),
        broken.residual_degree()
    );
    Ok(())
}
