//! The graded Weyl-form algebra: generators, the Moyal product, brackets,
//! and the Koszul operators.
//!
//! ```sh
//! cargo run --example weyl_algebra
//! ```

use fedosov::jet::rational;
use fedosov::{Jet, WeylContext, WeylElement};

fn main() -> fedosov::Result<()> {
    // standard structure on R^2, jets to order 6, Weyl degrees to 8
    let ctx = WeylContext::standard(1, 6, 8);
    let e1 = WeylElement::generator(&ctx, 0)?;
    let e2 = WeylElement::generator(&ctx, 1)?;

    println!("product    e1 ∘ e2 = {}", e1.moyal(&e2)?);
    println!("product    e2 ∘ e1 = {}", e2.moyal(&e1)?);
    let bracket = e1.commutator(&e2)?;
    println!("bracket    [e1, e2] = {bracket}");
    println!("scaled     (i/t)[e1, e2] = {}", bracket.times_i_over_t()?);

    // the bracket with omega-lowered generators is an inner realization of
    // the Koszul differential
    let quadratic = e1.moyal(&e1)?.moyal(&e2)?;
    println!("\nsample     a = {quadratic}");
    println!("delta      {}", quadratic.delta());
    println!("delta*     {}", quadratic.delta().delta_star());

    // homotopy: (delta delta* + delta* delta) multiplies a monomial of
    // e-degree m and form degree n by m + n
    let monomial = quadratic.delta();
    let homotopy = monomial
        .delta()
        .delta_star()
        .add(&monomial.delta_star().delta())?;
    println!("homotopy   (dd* + d*d) a' = {homotopy}");

    // decomposition: a = delta delta_inv a + delta_inv delta a + central(a)
    let x1 = Jet::coordinate(2, 6, 0)?;
    let mixed = quadratic
        .mul_jet(&x1)?
        .add(&WeylElement::t_unit(&ctx).scale(&rational(5, 2)))?;
    let reassembled = mixed
        .delta_inv()
        .delta()
        .add(&mixed.delta().delta_inv())?
        .add(&mixed.central_part())?;
    println!("\ndecomposition input   = {mixed}");
    println!("central part          = {}", mixed.central_part());
    println!("reassembled           = {reassembled}");
    assert_eq!(reassembled, mixed);

    // grading: the Moyal product is degree-exact
    let view = mixed.grading();
    println!(
        "\ndegrees present: {:?}",
        view.by_degree.keys().collect::<Vec<_>>()
    );
    Ok(())
}
