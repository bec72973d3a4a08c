//! Shared helpers for the integration suites.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fedosov::jet::rational;
use fedosov::weyl::TermKey;
use fedosov::{
    symplectize, CoefficientSeries, Connection, FedosovConnection, Jet, SymplecticStructure,
    WeylContext, WeylElement,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `omega_{12} = 1 + x1` on the plane.
pub fn curved_structure(jet_order: u32) -> SymplecticStructure {
    let f = Jet::one(2, jet_order)
        .add(&Jet::coordinate(2, jet_order, 0).unwrap())
        .unwrap();
    let z = Jet::zero(2, jet_order);
    SymplecticStructure::validate(vec![vec![z.clone(), f.clone()], vec![f.neg(), z]]).unwrap()
}

pub fn curved_fedosov(jet_order: u32, order: u32) -> (SymplecticStructure, FedosovConnection) {
    let structure = curved_structure(jet_order);
    let connection = symplectize(&Connection::zero(&structure), &structure).unwrap();
    let fedosov = FedosovConnection::build(&connection, &structure, order).unwrap();
    (structure, fedosov)
}

pub fn darboux_fedosov(
    n: usize,
    jet_order: u32,
    order: u32,
) -> (SymplecticStructure, FedosovConnection) {
    let structure = SymplecticStructure::darboux(n, jet_order);
    let fedosov =
        FedosovConnection::build(&Connection::zero(&structure), &structure, order).unwrap();
    (structure, fedosov)
}

/// Random polynomial of bounded total degree with small rational
/// coefficients.
pub fn random_polynomial(rng: &mut ChaCha8Rng, dim: usize, jet_order: u32, max_degree: u32) -> Jet {
    let terms = (0..rng.gen_range(2..=5)).map(|_| {
        let mut exponents = vec![0u32; dim];
        let mut budget = max_degree;
        for slot in exponents.iter_mut() {
            let step = rng.gen_range(0..=budget);
            *slot = step;
            budget -= step;
        }
        (
            exponents,
            rational(rng.gen_range(-3..=3), rng.gen_range(1..=2)),
        )
    });
    Jet::from_terms(dim, jet_order, terms).unwrap()
}

pub fn random_function(
    rng: &mut ChaCha8Rng,
    dim: usize,
    jet_order: u32,
    max_degree: u32,
) -> CoefficientSeries {
    CoefficientSeries::from_function(random_polynomial(rng, dim, jet_order, max_degree))
}

/// Random element of the Weyl-form algebra with bounded term count.
pub fn random_element(
    rng: &mut ChaCha8Rng,
    ctx: &Arc<WeylContext>,
    max_terms: usize,
) -> WeylElement {
    let dim = ctx.dim();
    let mut out = WeylElement::zero(ctx);
    for _ in 0..rng.gen_range(1..=max_terms) {
        let mut form_indices: Vec<usize> = (0..dim).filter(|_| rng.gen_bool(0.3)).collect();
        form_indices.sort_unstable();
        let key = TermKey {
            t_power: rng.gen_range(0..=2u32),
            i_power: rng.gen_range(0..=1u8),
            e_exponents: (0..dim)
                .map(|_| rng.gen_range(0..=2u32))
                .collect::<Vec<_>>()
                .into(),
            form_indices,
        };
        let coeff = Jet::from_terms(
            dim,
            ctx.jet_order(),
            (0..2).map(|_| {
                let exponents: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=2u32)).collect();
                (
                    exponents,
                    rational(rng.gen_range(-3..=3), rng.gen_range(1..=2)),
                )
            }),
        )
        .unwrap();
        if let Ok(term) = WeylElement::monomial(ctx, key, coeff) {
            out = out.add(&term).unwrap();
        }
    }
    out
}

/// Random connection with polynomial symbols on the chart of `structure`.
pub fn random_connection(rng: &mut ChaCha8Rng, structure: &SymplecticStructure) -> Connection {
    let dim = structure.dim();
    let order = structure.jet_order();
    let mut gamma = vec![vec![vec![Jet::zero(dim, order); dim]; dim]; dim];
    for entry in gamma.iter_mut().flatten().flatten() {
        *entry = random_polynomial(rng, dim, order, 2);
    }
    Connection::new(gamma, structure).unwrap()
}
