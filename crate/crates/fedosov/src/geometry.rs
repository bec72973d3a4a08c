//! Symplectic structures and connections in coordinates.
//!
//! Everything lives in a single chart around the basepoint: a symplectic
//! structure is the matrix `omega_{kl} = omega(d_k, d_l)` of jets together
//! with its inverse, and a connection is its Christoffel symbols
//! `Gamma^k_{ij}` with eagerly computed torsion, `nabla omega` and curvature
//! tensors. Arbitrary connections are legal inputs; [`symplectize`] repairs
//! any of them into a torsion-free compatible one.

use std::sync::Arc;

use num::One;

use crate::jet::{integer, matrix_inverse, rational, Exponents, Jet, Rational};
use crate::weyl::{TermKey, WeylContext, WeylElement};
use crate::{Error, Result};

/// Christoffel-style tensor `T[k][i][j]` of jets.
pub type Tensor3 = Vec<Vec<Vec<Jet>>>;
/// Curvature-style tensor `T[k][l][i][j]` of jets.
pub type Tensor4 = Vec<Vec<Vec<Vec<Jet>>>>;

/// A validated symplectic form on the chart: `omega_{kl}` and its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticStructure {
    dim: usize,
    jet_order: u32,
    omega_lower: Vec<Vec<Jet>>,
    omega_upper: Vec<Vec<Jet>>,
}

impl SymplecticStructure {
    /// Validate a candidate matrix: antisymmetry, nondegeneracy at the
    /// basepoint, and closedness, reporting **all** violations at once.
    pub fn validate(omega_lower: Vec<Vec<Jet>>) -> Result<Self> {
        let dim = omega_lower.len();
        let mut failures: Vec<String> = Vec::new();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::validation(format!(
                "dimension must be even and positive, got {dim}"
            )));
        }
        for (k, row) in omega_lower.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::validation(format!(
                    "omega row {} has length {}, expected {dim}",
                    k + 1,
                    row.len()
                )));
            }
            for entry in row {
                if entry.num_vars() != dim {
                    return Err(Error::validation(
                        "omega entries must be jets in all coordinates".to_string(),
                    ));
                }
            }
        }
        let jet_order = omega_lower[0][0].order();
        if omega_lower.iter().flatten().any(|j| j.order() != jet_order) {
            return Err(Error::validation(
                "omega entries must share one jet order".to_string(),
            ));
        }

        for k in 0..dim {
            for l in k..dim {
                let sum = omega_lower[k][l].add(&omega_lower[l][k])?;
                if !sum.is_zero() {
                    failures.push(format!(
                        "omega[{}][{}] != -omega[{}][{}]",
                        k + 1,
                        l + 1,
                        l + 1,
                        k + 1
                    ));
                }
            }
        }

        // d omega = 0: cyclic sum of partials for every index triple
        for j in 0..dim {
            for k in (j + 1)..dim {
                for l in (k + 1)..dim {
                    let cyclic = omega_lower[k][l]
                        .diff(j)?
                        .add(&omega_lower[l][j].diff(k)?)?
                        .add(&omega_lower[j][k].diff(l)?)?;
                    if !cyclic.is_zero() {
                        failures.push(format!(
                            "omega is not closed at indices ({},{},{})",
                            j + 1,
                            k + 1,
                            l + 1
                        ));
                    }
                }
            }
        }

        let omega_upper = match matrix_inverse(&omega_lower) {
            Ok(upper) => Some(upper),
            Err(Error::DegenerateForm) => {
                failures.push("omega is degenerate at the basepoint".to_string());
                None
            }
            Err(other) => return Err(other),
        };

        if !failures.is_empty() {
            return Err(Error::Validation { failures });
        }
        Ok(SymplecticStructure {
            dim,
            jet_order,
            omega_lower,
            omega_upper: omega_upper.expect("inverse exists when validation passed"),
        })
    }

    /// Standard constant form on R^{2n}: `omega_{i, i+n} = 1`.
    pub fn darboux(n: usize, jet_order: u32) -> Self {
        let dim = 2 * n;
        let mut lower = vec![vec![Jet::zero(dim, jet_order); dim]; dim];
        for i in 0..n {
            lower[i][i + n] = Jet::one(dim, jet_order);
            lower[i + n][i] = Jet::constant(dim, jet_order, -Rational::one());
        }
        SymplecticStructure::validate(lower).expect("standard form is symplectic")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jet_order(&self) -> u32 {
        self.jet_order
    }

    pub fn omega_lower(&self) -> &[Vec<Jet>] {
        &self.omega_lower
    }

    pub fn omega_upper(&self) -> &[Vec<Jet>] {
        &self.omega_upper
    }

    pub fn is_constant(&self) -> bool {
        self.omega_lower.iter().flatten().all(|j| j.is_constant())
    }

    fn check_jet(&self, jet: &Jet) -> Result<()> {
        if jet.num_vars() != self.dim || jet.order() != self.jet_order {
            return Err(Error::ContextMismatch(
                "jet does not match the symplectic chart".into(),
            ));
        }
        Ok(())
    }

    /// `{a, b} = omega^{kl} (d_k a)(d_l b)`.
    pub fn poisson_bracket(&self, a: &Jet, b: &Jet) -> Result<Jet> {
        self.check_jet(a)?;
        self.check_jet(b)?;
        let mut sum = Jet::zero(self.dim, self.jet_order);
        for k in 0..self.dim {
            let da = a.diff(k)?;
            if da.is_true_zero() {
                continue;
            }
            for l in 0..self.dim {
                let w = &self.omega_upper[k][l];
                if w.is_true_zero() {
                    continue;
                }
                sum = sum.add(&w.mul(&da)?.mul(&b.diff(l)?)?)?;
            }
        }
        Ok(sum)
    }

    /// Lower an index: `(u^flat)_l = u^m omega_{ml}`.
    pub fn musical_flat(&self, vector: &[Jet]) -> Result<Vec<Jet>> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch("vector length".into()));
        }
        let mut out = Vec::with_capacity(self.dim);
        for l in 0..self.dim {
            let mut entry = Jet::zero(self.dim, self.jet_order);
            for (m, component) in vector.iter().enumerate() {
                self.check_jet(component)?;
                entry = entry.add(&component.mul(&self.omega_lower[m][l])?)?;
            }
            out.push(entry);
        }
        Ok(out)
    }

    /// Raise an index, inverse to [`Self::musical_flat`]:
    /// `(alpha^sharp)^m = alpha_l omega^{lm}`.
    pub fn musical_sharp(&self, covector: &[Jet]) -> Result<Vec<Jet>> {
        if covector.len() != self.dim {
            return Err(Error::DimensionMismatch("covector length".into()));
        }
        let mut out = Vec::with_capacity(self.dim);
        for m in 0..self.dim {
            let mut entry = Jet::zero(self.dim, self.jet_order);
            for (l, component) in covector.iter().enumerate() {
                self.check_jet(component)?;
                entry = entry.add(&component.mul(&self.omega_upper[l][m])?)?;
            }
            out.push(entry);
        }
        Ok(out)
    }

    /// Weyl-form algebra over this chart, truncated at `weyl_order`.
    pub fn weyl_context(&self, weyl_order: u32) -> Arc<WeylContext> {
        WeylContext::new(
            self.omega_lower.clone(),
            self.omega_upper.clone(),
            weyl_order,
        )
        .expect("validated structure always wraps")
    }

    /// The form itself as a central element: `sum_{k<l} omega_{kl} dx^k ^ dx^l`.
    pub fn omega_element(&self, ctx: &Arc<WeylContext>) -> WeylElement {
        let mut element = WeylElement::zero(ctx);
        for k in 0..self.dim {
            for l in (k + 1)..self.dim {
                if self.omega_lower[k][l].is_true_zero() {
                    continue;
                }
                let key = TermKey {
                    t_power: 0,
                    i_power: 0,
                    e_exponents: Exponents::zeros(self.dim),
                    form_indices: vec![k, l],
                };
                let term = WeylElement::monomial(ctx, key, self.omega_lower[k][l].clone())
                    .expect("well-formed key");
                element = element.add(&term).expect("same context");
            }
        }
        element
    }
}

/// A connection in coordinates with its derived tensors.
///
/// No predicate is imposed at construction; `is_torsion_free` and
/// `preserves_omega` report on the stored data.
#[derive(Clone, Debug)]
pub struct Connection {
    dim: usize,
    jet_order: u32,
    christoffel: Tensor3,
    gamma_lower: Tensor3,
    torsion: Tensor3,
    nabla_omega: Tensor3,
    curvature: Tensor4,
}

impl Connection {
    pub fn new(christoffel: Tensor3, structure: &SymplecticStructure) -> Result<Self> {
        let dim = structure.dim();
        let jet_order = structure.jet_order();
        if christoffel.len() != dim
            || christoffel
                .iter()
                .any(|m| m.len() != dim || m.iter().any(|r| r.len() != dim))
        {
            return Err(Error::DimensionMismatch("christoffel tensor shape".into()));
        }
        for jet in christoffel.iter().flatten().flatten() {
            if jet.num_vars() != dim || jet.order() != jet_order {
                return Err(Error::DimensionMismatch(
                    "christoffel entries must match the chart".into(),
                ));
            }
        }

        let zero = || Jet::zero(dim, jet_order);
        let mut gamma_lower = vec![vec![vec![zero(); dim]; dim]; dim];
        let mut torsion = vec![vec![vec![zero(); dim]; dim]; dim];
        let mut nabla_omega = vec![vec![vec![zero(); dim]; dim]; dim];
        let mut curvature = vec![vec![vec![vec![zero(); dim]; dim]; dim]; dim];

        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    // Gamma_{kij} = omega_{kl} Gamma^l_{ij}
                    let mut low = zero();
                    for l in 0..dim {
                        low =
                            low.add(&structure.omega_lower()[k][l].mul(&christoffel[l][i][j])?)?;
                    }
                    gamma_lower[k][i][j] = low;
                    torsion[k][i][j] = christoffel[k][i][j].sub(&christoffel[k][j][i])?;
                }
            }
        }

        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    // (nabla_i omega)_{jk}
                    let mut value = structure.omega_lower()[j][k].diff(i)?;
                    for l in 0..dim {
                        value = value
                            .sub(&christoffel[l][i][j].mul(&structure.omega_lower()[l][k])?)?;
                        value = value
                            .sub(&christoffel[l][i][k].mul(&structure.omega_lower()[j][l])?)?;
                    }
                    nabla_omega[i][j][k] = value;
                }
            }
        }

        for k in 0..dim {
            for l in 0..dim {
                for i in 0..dim {
                    for j in 0..dim {
                        // R^k_{lij} = d_i Gamma^k_{jl} - d_j Gamma^k_{il}
                        //           + Gamma^k_{im} Gamma^m_{jl} - Gamma^k_{jm} Gamma^m_{il}
                        let mut value = christoffel[k][j][l]
                            .diff(i)?
                            .sub(&christoffel[k][i][l].diff(j)?)?;
                        for m in 0..dim {
                            value = value.add(&christoffel[k][i][m].mul(&christoffel[m][j][l])?)?;
                            value = value.sub(&christoffel[k][j][m].mul(&christoffel[m][i][l])?)?;
                        }
                        curvature[k][l][i][j] = value;
                    }
                }
            }
        }

        Ok(Connection {
            dim,
            jet_order,
            christoffel,
            gamma_lower,
            torsion,
            nabla_omega,
            curvature,
        })
    }

    /// The zero connection on the chart of `structure`.
    pub fn zero(structure: &SymplecticStructure) -> Self {
        let dim = structure.dim();
        let zero = vec![vec![vec![Jet::zero(dim, structure.jet_order()); dim]; dim]; dim];
        Connection::new(zero, structure).expect("zero tensor is well formed")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jet_order(&self) -> u32 {
        self.jet_order
    }

    /// `Gamma^k_{ij}` as `christoffel()[k][i][j]`.
    pub fn christoffel(&self) -> &Tensor3 {
        &self.christoffel
    }

    /// `Gamma_{kij} = omega_{kl} Gamma^l_{ij}`.
    pub fn gamma_lower(&self) -> &Tensor3 {
        &self.gamma_lower
    }

    /// `Tor^k_{ij} = Gamma^k_{ij} - Gamma^k_{ji}`.
    pub fn torsion(&self) -> &Tensor3 {
        &self.torsion
    }

    /// `(nabla_i omega)_{jk}` as `nabla_omega()[i][j][k]`.
    pub fn nabla_omega(&self) -> &Tensor3 {
        &self.nabla_omega
    }

    /// `R^k_{lij}` as `curvature_tensor()[k][l][i][j]`.
    pub fn curvature_tensor(&self) -> &Tensor4 {
        &self.curvature
    }

    pub fn is_torsion_free(&self) -> bool {
        self.torsion.iter().flatten().flatten().all(Jet::is_zero)
    }

    pub fn preserves_omega(&self) -> bool {
        self.nabla_omega
            .iter()
            .flatten()
            .flatten()
            .all(Jet::is_zero)
    }

    pub fn is_flat(&self) -> bool {
        self.curvature
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .all(Jet::is_zero)
    }
}

/// Repair an arbitrary connection into a torsion-free one compatible with
/// `omega`: symmetrize the torsion away, then add the correction tensor `N`
/// with `omega(N(X,Y), Z) = 1/3 [(nabla_X omega)(Y,Z) + (nabla_Y omega)(X,Z)]`.
/// Idempotent on connections that already satisfy both predicates.
pub fn symplectize(connection: &Connection, structure: &SymplecticStructure) -> Result<Connection> {
    let dim = structure.dim();
    if connection.dim() != dim || connection.jet_order() != structure.jet_order() {
        return Err(Error::ContextMismatch(
            "connection does not match the symplectic chart".into(),
        ));
    }
    let zero = || Jet::zero(dim, structure.jet_order());
    let half = rational(1, 2);
    let third = rational(1, 3);

    let mut symmetric = vec![vec![vec![zero(); dim]; dim]; dim];
    for k in 0..dim {
        for i in 0..dim {
            for j in 0..dim {
                symmetric[k][i][j] = connection.christoffel()[k][i][j]
                    .add(&connection.christoffel()[k][j][i])?
                    .scale(&half);
            }
        }
    }
    let torsion_free = Connection::new(symmetric, structure)?;

    // N_{ij;k} = 1/3 [(nabla_i omega)_{jk} + (nabla_j omega)_{ik}], index raised with omega
    let nabla = torsion_free.nabla_omega();
    let mut corrected = torsion_free.christoffel().clone();
    for i in 0..dim {
        for j in 0..dim {
            for l in 0..dim {
                let mut raised = zero();
                for k in 0..dim {
                    let lowered = nabla[i][j][k].add(&nabla[j][i][k])?.scale(&third);
                    raised = raised.add(&lowered.mul(&structure.omega_upper()[k][l])?)?;
                }
                corrected[l][i][j] = corrected[l][i][j].add(&raised)?;
            }
        }
    }
    Connection::new(corrected, structure)
}

/// The lift of a torsion-free symplectic connection to the Weyl-form
/// algebra: `nabla = d + structure term`, where the structure term acts on a
/// term as `-Gamma^m_{il} e^l d_{e^m}` wedged with `dx^i` on the left.
///
/// It preserves the total Weyl degree, is a derivation of the Moyal product,
/// and anticommutes with `delta`.
#[derive(Clone, Debug)]
pub struct NablaOperator {
    context: Arc<WeylContext>,
    christoffel: Tensor3,
}

impl NablaOperator {
    pub fn new(
        connection: &Connection,
        structure: &SymplecticStructure,
        context: &Arc<WeylContext>,
    ) -> Result<Self> {
        if !connection.is_torsion_free() {
            return Err(Error::InvalidConnection(
                "connection has torsion; symplectize it first".into(),
            ));
        }
        if !connection.preserves_omega() {
            return Err(Error::InvalidConnection(
                "connection does not preserve omega; symplectize it first".into(),
            ));
        }
        if structure.dim() != context.dim() || structure.jet_order() != context.jet_order() {
            return Err(Error::ContextMismatch(
                "context does not match the symplectic chart".into(),
            ));
        }
        Ok(NablaOperator {
            context: context.clone(),
            christoffel: connection.christoffel().clone(),
        })
    }

    /// Skip the predicate checks. Exists so that the failure of the
    /// `[delta, nabla] = 0` identity on a torsioned connection can be
    /// demonstrated.
    pub fn new_unchecked(christoffel: Tensor3, context: &Arc<WeylContext>) -> Self {
        NablaOperator {
            context: context.clone(),
            christoffel,
        }
    }

    pub fn context(&self) -> &Arc<WeylContext> {
        &self.context
    }

    pub fn apply(&self, element: &WeylElement) -> Result<WeylElement> {
        if element.context() != &self.context && !Arc::ptr_eq(element.context(), &self.context) {
            return Err(Error::ContextMismatch(
                "element belongs to a different context".into(),
            ));
        }
        let dim = self.context.dim();
        let mut result = element.exterior_d();
        for (key, jet) in element.terms() {
            for m in 0..dim {
                let multiplicity = key.e_exponents.get(m);
                if multiplicity == 0 {
                    continue;
                }
                for i in 0..dim {
                    for l in 0..dim {
                        let gamma = &self.christoffel[m][i][l];
                        if gamma.is_true_zero() {
                            continue;
                        }
                        let Some((sign, form)) = prepend_form(i, &key.form_indices) else {
                            continue;
                        };
                        let new_key = TermKey {
                            t_power: key.t_power,
                            i_power: key.i_power,
                            e_exponents: key.e_exponents.lowered(m).raised(l),
                            form_indices: form,
                        };
                        let factor = integer(-(sign as i64) * multiplicity as i64);
                        let term = WeylElement::monomial(
                            &self.context,
                            new_key,
                            jet.mul(gamma)?.scale(&factor),
                        )?;
                        result = result.add(&term)?;
                    }
                }
            }
        }
        Ok(result)
    }

    /// The quadratic fiber element `1/2 omega_{jm} Gamma^m_{ik} e^j e^k dx^i`.
    ///
    /// On charts where `omega` is constant, `d + (i/t)[gamma_element, .]`
    /// reproduces [`Self::apply`]; for non-constant `omega` no fiberwise
    /// bracket can do so and the operator form is the defining one.
    pub fn gamma_element(&self, structure: &SymplecticStructure) -> Result<WeylElement> {
        let dim = self.context.dim();
        let mut element = WeylElement::zero(&self.context);
        let half = rational(1, 2);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let mut coeff = Jet::zero(dim, self.context.jet_order());
                    for m in 0..dim {
                        coeff = coeff
                            .add(&structure.omega_lower()[j][m].mul(&self.christoffel[m][i][k])?)?;
                    }
                    if coeff.is_true_zero() {
                        continue;
                    }
                    let key = TermKey {
                        t_power: 0,
                        i_power: 0,
                        e_exponents: Exponents::zeros(dim).raised(j).raised(k),
                        form_indices: vec![i],
                    };
                    let term = WeylElement::monomial(&self.context, key, coeff.scale(&half))?;
                    element = element.add(&term)?;
                }
            }
        }
        Ok(element)
    }
}

fn prepend_form(index: usize, form: &[usize]) -> Option<(i8, Vec<usize>)> {
    if form.contains(&index) {
        return None;
    }
    let smaller = form.iter().filter(|&&f| f < index).count();
    let sign = if smaller % 2 == 0 { 1 } else { -1 };
    let mut merged = form.to_vec();
    merged.push(index);
    merged.sort_unstable();
    Some((sign, merged))
}

/// The curvature of the lifted connection as a fiber element:
/// `R = 1/4 omega_{km} R^m_{lij} e^k e^l dx^i ^ dx^j`, normalized so that
/// `(i/t) [R, a] = nabla^2 a`.
pub fn weyl_curvature(
    connection: &Connection,
    structure: &SymplecticStructure,
    context: &Arc<WeylContext>,
) -> Result<WeylElement> {
    if !connection.is_torsion_free() || !connection.preserves_omega() {
        return Err(Error::InvalidConnection(
            "curvature element requires a torsion-free compatible connection".into(),
        ));
    }
    let dim = structure.dim();
    let quarter = rational(1, 4);
    let mut element = WeylElement::zero(context);
    for k in 0..dim {
        for l in 0..dim {
            // omega_{km} R^m_{lij}
            for i in 0..dim {
                for j in 0..dim {
                    if i == j {
                        continue;
                    }
                    let mut lowered = Jet::zero(dim, structure.jet_order());
                    for m in 0..dim {
                        lowered = lowered.add(
                            &structure.omega_lower()[k][m]
                                .mul(&connection.curvature_tensor()[m][l][i][j])?,
                        )?;
                    }
                    if lowered.is_true_zero() {
                        continue;
                    }
                    let (sign, form) = if i < j {
                        (1i64, vec![i, j])
                    } else {
                        (-1i64, vec![j, i])
                    };
                    let key = TermKey {
                        t_power: 0,
                        i_power: 0,
                        e_exponents: Exponents::zeros(dim).raised(k).raised(l),
                        form_indices: form,
                    };
                    let term = WeylElement::monomial(
                        context,
                        key,
                        lowered.scale(&quarter).scale(&integer(sign)),
                    )?;
                    element = element.add(&term)?;
                }
            }
        }
    }
    Ok(element)
}
