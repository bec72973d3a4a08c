//! The quantization engine: flat Fedosov connection by graded recursion,
//! flat-section lift, fiberwise multiplication, and the star product.
//!
//! The connection is `D = -delta + nabla + (i/t)[rho, .]` where `rho` is the
//! unique form-degree-1 element with `delta_star(rho) = 0` solving
//! `delta(rho) = R + nabla(rho) + (i/t) rho∘rho` degree by degree; the
//! fixed-point iteration `rho <- delta_inv(R + nabla(rho) + (i/t) rho∘rho)`
//! stabilizes one total degree per step because `delta_inv` strictly raises
//! degree. Functions lift to flat sections through the analogous fixed point
//! `A <- a + delta_inv(nabla(A) + (i/t)[rho, A])`, and the star product is
//! fiber evaluation of the Moyal product of two lifts.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigInt, One, Zero};

use crate::geometry::{weyl_curvature, Connection, NablaOperator, SymplecticStructure};
use crate::jet::{normalize_i_power, rational, Exponents, Jet, Rational};
use crate::weyl::{TermKey, WeylContext, WeylElement};
use crate::{Error, Result};

/// One star-product coefficient `re(x) + i * im(x)`.
///
/// Inputs are real; odd Moyal levels contribute imaginary parts, and both
/// can land on the same power of `t` once the inputs carry `t`-terms of
/// their own, so coefficients are complex in general.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexCoefficient {
    pub re: Jet,
    pub im: Jet,
}

impl ComplexCoefficient {
    pub fn zero(num_vars: usize, order: u32) -> Self {
        ComplexCoefficient {
            re: Jet::zero(num_vars, order),
            im: Jet::zero(num_vars, order),
        }
    }

    pub fn from_real(re: Jet) -> Self {
        let im = Jet::zero(re.num_vars(), re.order());
        ComplexCoefficient { re, im }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(ComplexCoefficient {
            re: self.re.add(&other.re)?,
            im: self.im.add(&other.im)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(ComplexCoefficient {
            re: self.re.sub(&other.re)?,
            im: self.im.sub(&other.im)?,
        })
    }

    pub fn neg(&self) -> Self {
        ComplexCoefficient {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(ComplexCoefficient {
            re: self.re.mul(&other.re)?.sub(&self.im.mul(&other.im)?)?,
            im: self.re.mul(&other.im)?.add(&self.im.mul(&other.re)?)?,
        })
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        ComplexCoefficient {
            re: self.re.scale(factor),
            im: self.im.scale(factor),
        }
    }

    /// Multiply by `i` once: `(re, im) -> (-im, re)`.
    pub fn times_i(&self) -> Self {
        ComplexCoefficient {
            re: self.im.neg(),
            im: self.re.clone(),
        }
    }

    pub fn times_i_power(&self, power: u32) -> Self {
        let (sign, residual) = normalize_i_power(power);
        let mut value = if sign < 0 { self.neg() } else { self.clone() };
        if residual == 1 {
            value = value.times_i();
        }
        value
    }

    pub fn agrees_with(&self, other: &Self) -> bool {
        self.re.agrees_with(&other.re) && self.im.agrees_with(&other.im)
    }
}

/// A truncated series `sum_k t^k c_k(x)` of complex jet coefficients.
#[derive(Clone, Debug)]
pub struct CoefficientSeries {
    dim: usize,
    jet_order: u32,
    entries: Vec<ComplexCoefficient>,
}

impl CoefficientSeries {
    pub fn zero(dim: usize, jet_order: u32) -> Self {
        CoefficientSeries {
            dim,
            jet_order,
            entries: Vec::new(),
        }
    }

    /// Series with real entries `c_0, c_1, ...`.
    pub fn from_real(entries: Vec<Jet>) -> Result<Self> {
        let complexified = entries
            .into_iter()
            .map(ComplexCoefficient::from_real)
            .collect();
        Self::from_complex(complexified)
    }

    pub fn from_complex(entries: Vec<ComplexCoefficient>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty coefficient series".into()))?;
        let dim = first.re.num_vars();
        let jet_order = first.re.order();
        for entry in &entries {
            for jet in [&entry.re, &entry.im] {
                if jet.num_vars() != dim || jet.order() != jet_order {
                    return Err(Error::DimensionMismatch(
                        "series entries must share one chart".into(),
                    ));
                }
            }
        }
        Ok(CoefficientSeries {
            dim,
            jet_order,
            entries,
        })
    }

    /// A plain function, embedded as the `t^0` entry.
    pub fn from_function(jet: Jet) -> Self {
        CoefficientSeries::from_real(vec![jet]).expect("single entry is consistent")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jet_order(&self) -> u32 {
        self.jet_order
    }

    pub fn entries(&self) -> &[ComplexCoefficient] {
        &self.entries
    }

    /// Highest stored power of `t`.
    pub fn order(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    /// Entry `k`, zero-padded beyond the stored length.
    pub fn entry(&self, k: usize) -> ComplexCoefficient {
        self.entries
            .get(k)
            .cloned()
            .unwrap_or_else(|| ComplexCoefficient::zero(self.dim, self.jet_order))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(ComplexCoefficient::is_zero)
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(ComplexCoefficient::is_real)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, ComplexCoefficient::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, ComplexCoefficient::sub)
    }

    fn zip(
        &self,
        other: &Self,
        op: impl Fn(&ComplexCoefficient, &ComplexCoefficient) -> Result<ComplexCoefficient>,
    ) -> Result<Self> {
        if self.dim != other.dim || self.jet_order != other.jet_order {
            return Err(Error::DimensionMismatch("series charts differ".into()));
        }
        let len = self.entries.len().max(other.entries.len());
        let entries = (0..len)
            .map(|k| op(&self.entry(k), &other.entry(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CoefficientSeries {
            dim: self.dim,
            jet_order: self.jet_order,
            entries,
        })
    }

    /// Divide by `t` and multiply by `i`; the `t^0` entry must vanish.
    pub fn times_i_over_t(&self) -> Result<Self> {
        if !self.entry(0).is_zero() {
            return Err(Error::MissingTFactor);
        }
        let entries = (1..self.entries.len().max(1))
            .map(|k| self.entry(k).times_i())
            .collect();
        Ok(CoefficientSeries {
            dim: self.dim,
            jet_order: self.jet_order,
            entries,
        })
    }

    /// First `order + 1` entries.
    pub fn truncated(&self, order: usize) -> Self {
        let entries = (0..=order).map(|k| self.entry(k)).collect();
        CoefficientSeries {
            dim: self.dim,
            jet_order: self.jet_order,
            entries,
        }
    }

    pub fn agrees_with(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.jet_order != other.jet_order {
            return false;
        }
        let len = self.entries.len().max(other.entries.len());
        (0..len).all(|k| self.entry(k).agrees_with(&other.entry(k)))
    }
}

/// Equality up to zero padding.
impl PartialEq for CoefficientSeries {
    fn eq(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.jet_order != other.jet_order {
            return false;
        }
        let len = self.entries.len().max(other.entries.len());
        (0..len).all(|k| self.entry(k) == other.entry(k))
    }
}

/// The flat connection `D = -delta + nabla + (i/t)[rho, .]` on the
/// truncated Weyl-form algebra of one chart.
#[derive(Clone, Debug)]
pub struct FedosovConnection {
    context: Arc<WeylContext>,
    structure: SymplecticStructure,
    nabla: NablaOperator,
    curvature: WeylElement,
    rho: WeylElement,
    components: BTreeMap<u32, WeylElement>,
    order: u32,
}

impl FedosovConnection {
    /// Build the connection at truncation `order` from a torsion-free
    /// compatible connection.
    ///
    /// The correction `rho` starts at `delta_inv(R)` in degree 3 and each
    /// fixed-point sweep stabilizes the next degree; afterwards the
    /// normalization `delta_star(rho) = 0` and the per-degree equations
    /// `delta(rho_{g+1}) = rhs_g` are re-verified, so a sign error anywhere
    /// upstream surfaces as [`Error::Cocycle`] rather than a wrong product.
    ///
    /// Internally everything runs two degrees above `order`: the equation at
    /// one degree needs the next degree to exist, so the guard band is what
    /// makes flatness hold through `order` itself.
    pub fn build(
        connection: &Connection,
        structure: &SymplecticStructure,
        order: u32,
    ) -> Result<Self> {
        if order < 3 {
            return Err(Error::OrderTooSmall {
                required: 3,
                actual: order,
            });
        }
        let internal_order = order + 2;
        let context = structure.weyl_context(internal_order);
        let nabla = NablaOperator::new(connection, structure, &context)?;
        let curvature = weyl_curvature(connection, structure, &context)?;

        // every map in the recursion is exactly graded, so the fixed point
        // can be assembled one degree at a time: the degree-g right-hand
        // side only involves components strictly below g + 1
        let half = rational(1, 2);
        let mut components: BTreeMap<u32, WeylElement> = BTreeMap::new();
        for degree in 2..internal_order {
            let mut rhs = if degree == 2 {
                curvature.clone()
            } else {
                WeylElement::zero(&context)
            };
            if let Some(part) = components.get(&degree) {
                rhs = rhs.add(&nabla.apply(part)?)?;
            }
            for a in 3..=degree.saturating_sub(1) {
                let b = degree + 2 - a;
                if b < 3 {
                    continue;
                }
                if let (Some(pa), Some(pb)) = (components.get(&a), components.get(&b)) {
                    rhs = rhs.add(&pa.ad_action(pb)?.scale(&half))?;
                }
            }
            let lifted = rhs.delta_inv();
            if !lifted.terms().is_empty() {
                components.insert(degree + 1, lifted);
            }
        }
        let mut rho = WeylElement::zero(&context);
        for part in components.values() {
            rho = rho.add(part)?;
        }

        if !rho.delta_star().is_zero() {
            return Err(Error::Internal(
                "normalization delta_star(rho) = 0 violated".into(),
            ));
        }

        // whole-element cocycle verification: delta(rho) must reproduce the
        // right-hand side in every solvable degree (this also re-derives the
        // per-degree construction from the full fixed-point equation)
        let rhs = Self::recursion_rhs(&curvature, &nabla, &rho)?;
        let residual = rhs.sub(&rho.delta())?;
        for (degree, part) in residual.grading().by_degree {
            if degree <= internal_order - 1 && !part.is_zero() {
                return Err(Error::Cocycle { degree });
            }
        }

        components.retain(|_, part| !part.is_zero());

        Ok(FedosovConnection {
            context,
            structure: structure.clone(),
            nabla,
            curvature,
            rho,
            components,
            order,
        })
    }

    fn recursion_rhs(
        curvature: &WeylElement,
        nabla: &NablaOperator,
        rho: &WeylElement,
    ) -> Result<WeylElement> {
        // (i/t) rho∘rho = (1/2) (i/t) [rho, rho] for the odd element rho
        let quadratic = rho.ad_action(rho)?.scale(&rational(1, 2));
        curvature.add(&nabla.apply(rho)?)?.add(&quadratic)
    }

    pub fn context(&self) -> &Arc<WeylContext> {
        &self.context
    }

    pub fn structure(&self) -> &SymplecticStructure {
        &self.structure
    }

    pub fn nabla(&self) -> &NablaOperator {
        &self.nabla
    }

    /// The curvature element `R` of the input connection.
    pub fn curvature_element(&self) -> &WeylElement {
        &self.curvature
    }

    /// The full correction `rho = rho_3 + rho_4 + ...`.
    pub fn rho(&self) -> &WeylElement {
        &self.rho
    }

    /// Per-degree components of `rho` (degrees `>= 3`).
    pub fn components(&self) -> &BTreeMap<u32, WeylElement> {
        &self.components
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// `D a = -delta(a) + nabla(a) + (i/t)[rho, a]`.
    pub fn apply_d(&self, element: &WeylElement) -> Result<WeylElement> {
        let bracket = self.rho.ad_action(element)?;
        self.nabla
            .apply(element)?
            .sub(&element.delta())?
            .add(&bracket)
    }

    /// Copy with one degree component of `rho` dropped — a corrupted
    /// connection for negative controls.
    pub fn with_component_removed(&self, degree: u32) -> Self {
        let mut corrupted = self.clone();
        corrupted.components.remove(&degree);
        let mut rho = WeylElement::zero(&corrupted.context);
        for part in corrupted.components.values() {
            rho = rho.add(part).expect("components share the context");
        }
        corrupted.rho = rho;
        corrupted
    }

    /// Element-level curvature diagnostics.
    ///
    /// Assembles `Omega = omega + R - delta(rho) + nabla(rho) + (i/t)rho∘rho`
    /// through the requested order, splits off the `e`-free central part,
    /// and checks `D^2` on all form-degree-0 monomials through that output
    /// degree.
    pub fn curvature_report(&self) -> Result<CurvatureReport> {
        let xi =
            Self::recursion_rhs(&self.curvature, &self.nabla, &self.rho)?.sub(&self.rho.delta())?;
        let mut noncentral = WeylElement::zero(&self.context);
        let mut central = self.structure.omega_element(&self.context);
        let mut per_degree = BTreeMap::new();
        for (degree, part) in xi.grading().by_degree {
            if degree > self.order {
                continue;
            }
            let mut central_part = WeylElement::zero(&self.context);
            let mut rest = WeylElement::zero(&self.context);
            for (key, jet) in part.terms() {
                let term = WeylElement::monomial(&self.context, key.clone(), jet.clone())?;
                if key.e_degree() == 0 {
                    central_part = central_part.add(&term)?;
                } else {
                    rest = rest.add(&term)?;
                }
            }
            central = central.add(&central_part)?;
            if !rest.is_zero() {
                per_degree.insert(degree, rest.clone());
                noncentral = noncentral.add(&rest)?;
            }
        }

        let d_squared_max_degree = self.order;
        let mut d_squared_zero = true;
        'outer: for key in self.monomial_spanning_set() {
            let probe = WeylElement::monomial(
                &self.context,
                key,
                Jet::one(self.context.dim(), self.context.jet_order()),
            )?;
            let twice = self.apply_d(&self.apply_d(&probe)?)?;
            for (degree, part) in twice.grading().by_degree {
                if degree <= d_squared_max_degree && !part.is_zero() {
                    d_squared_zero = false;
                    break 'outer;
                }
            }
        }

        Ok(CurvatureReport {
            omega_central: central,
            noncentral_residual: noncentral,
            per_degree,
            d_squared_zero,
        })
    }

    fn monomial_spanning_set(&self) -> Vec<TermKey> {
        let dim = self.context.dim();
        let order = self.order;
        let mut keys = Vec::new();
        let mut exponents = vec![0u32; dim];
        loop {
            let e_degree: u32 = exponents.iter().sum();
            if e_degree <= order {
                let max_t = (order - e_degree) / 2;
                for t_power in 0..=max_t {
                    keys.push(TermKey {
                        t_power,
                        i_power: 0,
                        e_exponents: Exponents::new(exponents.clone()),
                        form_indices: Vec::new(),
                    });
                }
            }
            // odometer over exponent vectors bounded by the order
            let mut position = 0;
            loop {
                if position == dim {
                    return keys;
                }
                exponents[position] += 1;
                if exponents.iter().sum::<u32>() <= order {
                    break;
                }
                exponents[position] = 0;
                position += 1;
            }
        }
    }

    /// Lift a coefficient series to its flat section.
    pub fn quantize(&self, series: &CoefficientSeries) -> Result<FlatSection> {
        if series.dim() != self.context.dim() || series.jet_order() != self.context.jet_order() {
            return Err(Error::ContextMismatch(
                "series does not match the connection chart".into(),
            ));
        }
        let base = embed_series(&self.context, series)?;
        // degree-by-degree assembly of the fixed point
        // A = a + delta_inv(nabla(A) + (i/t)[rho, A])
        let mut components: BTreeMap<u32, WeylElement> = BTreeMap::new();
        for (degree, part) in base.grading().by_degree {
            components.insert(degree, part);
        }
        let internal_order = self.context.weyl_order();
        for degree in 0..internal_order {
            let mut rhs = WeylElement::zero(&self.context);
            if let Some(part) = components.get(&degree) {
                rhs = rhs.add(&self.nabla.apply(part)?)?;
            }
            for (h, rho_part) in &self.components {
                if degree + 2 < *h {
                    continue;
                }
                if let Some(part) = components.get(&(degree + 2 - h)) {
                    rhs = rhs.add(&rho_part.ad_action(part)?)?;
                }
            }
            let lifted = rhs.delta_inv();
            if !lifted.terms().is_empty() {
                let slot = components
                    .entry(degree + 1)
                    .or_insert_with(|| WeylElement::zero(&self.context));
                *slot = slot.add(&lifted)?;
            }
        }
        let mut element = WeylElement::zero(&self.context);
        for part in components.values() {
            element = element.add(part)?;
        }
        Ok(FlatSection {
            element,
            source: series.clone(),
            order: self.order,
        })
    }

    /// `a * b` through `t^k`: lift both factors, multiply the lifts
    /// fiberwise, and read off the central part.
    ///
    /// Requires `order >= 2k` so every contribution to `t^k` survives the
    /// truncation, and jet order `>= 2k + 2` so the deepest derivative the
    /// locality bound permits is still resolved.
    pub fn star(
        &self,
        a: &CoefficientSeries,
        b: &CoefficientSeries,
        k: usize,
    ) -> Result<CoefficientSeries> {
        if (self.order as usize) < 2 * k {
            return Err(Error::OrderTooSmall {
                required: 2 * k as u32,
                actual: self.order,
            });
        }
        let required = 2 * k as u32 + 2;
        if self.context.jet_order() < required {
            return Err(Error::InsufficientJetOrder {
                required,
                actual: self.context.jet_order(),
            });
        }
        let lift_a = self.quantize(a)?;
        let lift_b = self.quantize(b)?;
        let product = lift_a.element().moyal(lift_b.element())?;
        Ok(evaluate_element(&product).truncated(k))
    }
}

/// Flat section `A` with `D A = 0`, `central_part(A) = a` and
/// `delta_star(A - a) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatSection {
    element: WeylElement,
    source: CoefficientSeries,
    order: u32,
}

impl FlatSection {
    pub fn element(&self) -> &WeylElement {
        &self.element
    }

    pub fn source(&self) -> &CoefficientSeries {
        &self.source
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Degree-`g` component of the section.
    pub fn component(&self, degree: u32) -> WeylElement {
        self.element.degree_component(degree)
    }

    /// Fiber evaluation at `e = 0`: the inverse of quantization.
    pub fn evaluate(&self) -> CoefficientSeries {
        evaluate_element(&self.element)
    }
}

fn embed_series(ctx: &Arc<WeylContext>, series: &CoefficientSeries) -> Result<WeylElement> {
    let mut element = WeylElement::zero(ctx);
    for (k, entry) in series.entries().iter().enumerate() {
        if 2 * k as u32 > ctx.weyl_order() && !entry.is_zero() {
            return Err(Error::OrderTooSmall {
                required: 2 * k as u32,
                actual: ctx.weyl_order(),
            });
        }
        for (i_power, jet) in [(0u8, &entry.re), (1u8, &entry.im)] {
            if jet.is_true_zero() {
                continue;
            }
            let key = TermKey {
                t_power: k as u32,
                i_power,
                e_exponents: Exponents::zeros(ctx.dim()),
                form_indices: Vec::new(),
            };
            element = element.add(&WeylElement::monomial(ctx, key, jet.clone())?)?;
        }
    }
    Ok(element)
}

fn evaluate_element(element: &WeylElement) -> CoefficientSeries {
    let ctx = element.context();
    let dim = ctx.dim();
    let jet_order = ctx.jet_order();
    let max_t = (ctx.weyl_order() / 2) as usize;
    let mut entries = vec![ComplexCoefficient::zero(dim, jet_order); max_t + 1];
    for (key, jet) in element.terms() {
        if !key.is_central() {
            continue;
        }
        let slot = &mut entries[key.t_power as usize];
        let updated = match key.i_power {
            0 => slot.re.add(jet),
            _ => slot.im.add(jet),
        }
        .expect("context jets share the chart");
        match key.i_power {
            0 => slot.re = updated,
            _ => slot.im = updated,
        }
    }
    CoefficientSeries {
        dim,
        jet_order,
        entries,
    }
}

/// Build the connection at `order = max(2k, 3)` and star-multiply.
pub fn star_product(
    connection: &Connection,
    structure: &SymplecticStructure,
    a: &CoefficientSeries,
    b: &CoefficientSeries,
    k: usize,
) -> Result<CoefficientSeries> {
    let order = (2 * k as u32).max(3);
    let fedosov = FedosovConnection::build(connection, structure, order)?;
    fedosov.star(a, b, k)
}

/// Element-level curvature diagnostics of a built connection.
#[derive(Clone, Debug)]
pub struct CurvatureReport {
    /// The `e`-free part of `omega + R - delta(rho) + nabla(rho) +
    /// (i/t) rho∘rho`; equals the symplectic form itself on success.
    pub omega_central: WeylElement,
    /// Everything else — must be zero.
    pub noncentral_residual: WeylElement,
    /// Nonzero residual components by total degree.
    pub per_degree: BTreeMap<u32, WeylElement>,
    /// `D^2` vanished on the monomial spanning set.
    pub d_squared_zero: bool,
}

impl CurvatureReport {
    pub fn is_flat(&self) -> bool {
        self.noncentral_residual.is_zero() && self.d_squared_zero
    }

    /// Lowest degree carrying a nonzero residual.
    pub fn residual_degree(&self) -> Option<u32> {
        self.per_degree.keys().next().copied()
    }
}

/// Closed-form star product for constant `omega` (and the trivial
/// connection): level `m` contracts `m` pairs of derivatives against
/// `omega^{kl}` with weight `(1/m!)(-i/2)^m`.
///
/// An oracle, independent of the Weyl-algebra machinery: it only uses jet
/// differentiation and rational arithmetic.
pub fn moyal_reference(
    a: &CoefficientSeries,
    b: &CoefficientSeries,
    structure: &SymplecticStructure,
    k: usize,
) -> Result<CoefficientSeries> {
    if !structure.is_constant() {
        return Err(Error::Unsupported(
            "closed-form product requires a constant symplectic form".into(),
        ));
    }
    if a.dim() != structure.dim() || b.dim() != structure.dim() {
        return Err(Error::ContextMismatch("series chart mismatch".into()));
    }
    let dim = structure.dim();
    let jet_order = structure.jet_order();
    let omega: Vec<Vec<Rational>> = structure
        .omega_upper()
        .iter()
        .map(|row| row.iter().map(Jet::constant_term).collect())
        .collect();

    let mut entries = vec![ComplexCoefficient::zero(dim, jet_order); k + 1];
    for j in 0..=k {
        let aj = a.entry(j);
        if aj.is_zero() {
            continue;
        }
        for l in 0..=(k - j) {
            let bl = b.entry(l);
            if bl.is_zero() {
                continue;
            }
            // state: (derivative multi-index on a, on b) -> paired omega sum;
            // dividing by m at level m accumulates the 1/m!
            let mut level: BTreeMap<(Exponents, Exponents), Rational> = BTreeMap::new();
            level.insert(
                (Exponents::zeros(dim), Exponents::zeros(dim)),
                Rational::one(),
            );
            for m in 0..=(k - j - l) as u32 {
                let mut sum = ComplexCoefficient::zero(dim, jet_order);
                for ((alpha, beta), weight) in &level {
                    let da = multi_diff(&aj, alpha)?;
                    if da.is_zero() {
                        continue;
                    }
                    let db = multi_diff(&bl, beta)?;
                    if db.is_zero() {
                        continue;
                    }
                    sum = sum.add(&da.mul(&db)?.scale(weight))?;
                }
                if !sum.is_zero() {
                    // (-1/2)^m i^m
                    let sign = if m % 2 == 0 { 1 } else { -1 };
                    let scalar = Rational::new(BigInt::from(sign), BigInt::from(2u32).pow(m));
                    let contribution = sum.scale(&scalar).times_i_power(m);
                    let target = j + l + m as usize;
                    entries[target] = entries[target].add(&contribution)?;
                }
                let mut next: BTreeMap<(Exponents, Exponents), Rational> = BTreeMap::new();
                for ((alpha, beta), weight) in &level {
                    for k_index in 0..dim {
                        for l_index in 0..dim {
                            if omega[k_index][l_index].is_zero() {
                                continue;
                            }
                            let factor = weight * &omega[k_index][l_index]
                                / Rational::from(BigInt::from(m + 1));
                            let key = (alpha.raised(k_index), beta.raised(l_index));
                            let entry = next.entry(key).or_insert_with(Rational::zero);
                            *entry += factor;
                        }
                    }
                }
                level = next;
            }
        }
    }
    Ok(CoefficientSeries {
        dim,
        jet_order,
        entries,
    })
}

fn multi_diff(value: &ComplexCoefficient, alpha: &Exponents) -> Result<ComplexCoefficient> {
    let mut out = value.clone();
    for index in 0..alpha.len() {
        for _ in 0..alpha.get(index) {
            out = ComplexCoefficient {
                re: out.re.diff(index)?,
                im: out.im.diff(index)?,
            };
        }
    }
    Ok(out)
}
