//! Repairing a connection: any Christoffel data becomes a torsion-free
//! connection compatible with the symplectic form.
//!
//! ```sh
//! cargo run --example symplectize
//! ```

use fedosov::render::{default_names, jet_polynomial};
use fedosov::{symplectize, Connection, Jet, SymplecticStructure};

fn main() -> fedosov::Result<()> {
    let order = 8;
    let x1 = Jet::coordinate(2, order, 0)?;
    let f = Jet::one(2, order).add(&x1)?;
    let zero = Jet::zero(2, order);
    let structure =
        SymplecticStructure::validate(vec![vec![zero.clone(), f.clone()], vec![f.neg(), zero]])?;

    // start from a deliberately bad connection: torsion and no compatibility
    let mut gamma = vec![vec![vec![Jet::zero(2, order); 2]; 2]; 2];
    gamma[0][0][1] = x1.clone();
    gamma[1][1][0] = Jet::one(2, order);
    let raw = Connection::new(gamma, &structure)?;
    println!(
        "input:  torsion-free: {}, preserves omega: {}",
        raw.is_torsion_free(),
        raw.preserves_omega()
    );

    let fixed = symplectize(&raw, &structure)?;
    println!(
        "output: torsion-free: {}, preserves omega: {}",
        fixed.is_torsion_free(),
        fixed.preserves_omega()
    );

    let names = default_names(2);
    println!("\ncorrected symbols (nonzero entries):");
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let entry = &fixed.christoffel()[k][i][j];
                if !entry.is_zero() {
                    println!(
                        "  Gamma[{},{},{}] = {}",
                        k + 1,
                        i + 1,
                        j + 1,
                        jet_polynomial(entry, &names)
                    );
                }
            }
        }
    }

    // the repair is idempotent
    let again = symplectize(&fixed, &structure)?;
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                assert!(again.christoffel()[k][i][j].agrees_with(&fixed.christoffel()[k][i][j]));
            }
        }
    }
    println!("\nsymplectize(symplectize(C)) = symplectize(C)");

    // curvature of the repaired connection
    let r = fixed.curvature_tensor();
    println!(
        "curvature R^1_{{212}} = {}",
        jet_polynomial(&r[0][1][0][1], &names)
    );
    Ok(())
}
