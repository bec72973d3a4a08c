//! Differential forms valued in the Weyl algebra bundle.
//!
//! An element is a finite sum of terms `coeff(x) * i^p * t^k * e-monomial *
//! dx-monomial` where `coeff` is a [`Jet`], the `e^k` are the symmetric fiber
//! generators (one per base coordinate), and the `dx` factors form a strictly
//! increasing wedge monomial. The total Weyl degree of a term is
//! `2 * t_power + (e-degree)`; every operation drops terms above the context
//! truncation order immediately.
//!
//! The imaginary unit never leaves this module as a separate number system:
//! `i^2 = -1` is folded into the rational coefficient eagerly, so each term
//! carries an `i_power` of 0 or 1 and all arithmetic stays rational. A value
//! with a genuinely mixed real/imaginary coefficient is simply stored as two
//! terms.
//!
//! The fiberwise product is the Moyal expansion
//! `a ∘ b = sum_m (1/m!) (-it/2)^m (omega^{kl} d_{e^k} ⊗ d_{e^l})^m (a ⊗ b)`,
//! contracting `e`-generators pairwise against `omega^{kl}(x)` from the
//! shared context; it preserves the total Weyl degree and terminates because
//! `m` never exceeds the smaller `e`-degree.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, One};

use crate::jet::{normalize_i_power, Exponents, Jet, Rational};
use crate::{Error, Result};

/// Shared descriptor for all elements of one Weyl-form algebra.
#[derive(Debug, PartialEq)]
pub struct WeylContext {
    dim: usize,
    jet_order: u32,
    weyl_order: u32,
    omega_lower: Vec<Vec<Jet>>,
    omega_upper: Vec<Vec<Jet>>,
}

impl WeylContext {
    /// Wrap symplectic data. `omega_upper` must be the matrix inverse of
    /// `omega_lower`; only shapes are checked here (see
    /// `geometry::SymplecticStructure` for full validation).
    pub fn new(
        omega_lower: Vec<Vec<Jet>>,
        omega_upper: Vec<Vec<Jet>>,
        weyl_order: u32,
    ) -> Result<Arc<Self>> {
        let dim = omega_lower.len();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "symplectic dimension must be even and positive, got {dim}"
            )));
        }
        let jet_order = omega_lower[0][0].order();
        for matrix in [&omega_lower, &omega_upper] {
            if matrix.len() != dim {
                return Err(Error::DimensionMismatch("omega matrix shape".into()));
            }
            for row in matrix.iter() {
                if row.len() != dim {
                    return Err(Error::DimensionMismatch("omega matrix shape".into()));
                }
                for entry in row {
                    if entry.num_vars() != dim || entry.order() != jet_order {
                        return Err(Error::DimensionMismatch(
                            "omega entries must be jets in all coordinates at one order".into(),
                        ));
                    }
                }
            }
        }
        Ok(Arc::new(WeylContext {
            dim,
            jet_order,
            weyl_order,
            omega_lower,
            omega_upper,
        }))
    }

    /// Standard constant structure on R^{2n}: `omega_{i, i+n} = 1`.
    pub fn standard(n: usize, jet_order: u32, weyl_order: u32) -> Arc<Self> {
        let dim = 2 * n;
        let mut lower = vec![vec![Jet::zero(dim, jet_order); dim]; dim];
        let mut upper = vec![vec![Jet::zero(dim, jet_order); dim]; dim];
        for i in 0..n {
            lower[i][i + n] = Jet::constant(dim, jet_order, Rational::one());
            lower[i + n][i] = Jet::constant(dim, jet_order, -Rational::one());
            upper[i][i + n] = Jet::constant(dim, jet_order, -Rational::one());
            upper[i + n][i] = Jet::constant(dim, jet_order, Rational::one());
        }
        Arc::new(WeylContext {
            dim,
            jet_order,
            weyl_order,
            omega_lower: lower,
            omega_upper: upper,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jet_order(&self) -> u32 {
        self.jet_order
    }

    pub fn weyl_order(&self) -> u32 {
        self.weyl_order
    }

    pub fn omega_lower(&self) -> &[Vec<Jet>] {
        &self.omega_lower
    }

    pub fn omega_upper(&self) -> &[Vec<Jet>] {
        &self.omega_upper
    }
}

/// Monomial part of a term: powers of `t` and `i`, symmetric `e`-exponents,
/// and the strictly increasing wedge indices.
///
/// Ordered canonically by (total Weyl degree, t-power, e-exponents graded-lex,
/// form indices lex, i-power); map iteration in this order is what makes all
/// rendering deterministic.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TermKey {
    pub t_power: u32,
    pub i_power: u8,
    pub e_exponents: Exponents,
    pub form_indices: Vec<usize>,
}

impl TermKey {
    pub fn scalar(dim: usize) -> Self {
        TermKey {
            t_power: 0,
            i_power: 0,
            e_exponents: Exponents::zeros(dim),
            form_indices: Vec::new(),
        }
    }

    pub fn total_degree(&self) -> u32 {
        2 * self.t_power + self.e_exponents.total_degree()
    }

    pub fn e_degree(&self) -> u32 {
        self.e_exponents.total_degree()
    }

    pub fn form_degree(&self) -> usize {
        self.form_indices.len()
    }

    pub fn is_central(&self) -> bool {
        self.e_degree() == 0 && self.form_indices.is_empty()
    }
}

impl Ord for TermKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.t_power.cmp(&other.t_power))
            .then_with(|| self.e_exponents.cmp(&other.e_exponents))
            .then_with(|| self.form_indices.cmp(&other.form_indices))
            .then_with(|| self.i_power.cmp(&other.i_power))
    }
}

impl PartialOrd for TermKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Merge of two strictly increasing index lists with the wedge sign, or
/// `None` when they share an index.
pub(crate) fn wedge_merge(a: &[usize], b: &[usize]) -> Option<(i8, Vec<usize>)> {
    let mut merged = Vec::with_capacity(a.len() + b.len());
    let mut sign = 1i8;
    let (mut ia, mut ib) = (0, 0);
    while ia < a.len() && ib < b.len() {
        match a[ia].cmp(&b[ib]) {
            Ordering::Less => {
                merged.push(a[ia]);
                ia += 1;
            }
            Ordering::Greater => {
                // b[ib] jumps over the remaining entries of a
                if (a.len() - ia) % 2 == 1 {
                    sign = -sign;
                }
                merged.push(b[ib]);
                ib += 1;
            }
            Ordering::Equal => return None,
        }
    }
    merged.extend_from_slice(&a[ia..]);
    merged.extend_from_slice(&b[ib..]);
    Some((sign, merged))
}

/// Prepend one index to a strictly increasing list (left wedge), or `None`
/// when already present.
fn wedge_prepend(index: usize, form: &[usize]) -> Option<(i8, Vec<usize>)> {
    if form.contains(&index) {
        return None;
    }
    let smaller = form.iter().filter(|&&f| f < index).count();
    let sign = if smaller % 2 == 0 { 1 } else { -1 };
    let mut merged: Vec<usize> = form.to_vec();
    merged.push(index);
    merged.sort_unstable();
    Some((sign, merged))
}

fn accumulate(terms: &mut BTreeMap<TermKey, Jet>, key: TermKey, jet: Jet) {
    match terms.entry(key) {
        Entry::Vacant(v) => {
            v.insert(jet);
        }
        Entry::Occupied(mut o) => {
            let sum = o.get().add(&jet).expect("jets share the context shape");
            *o.get_mut() = sum;
        }
    }
}

/// A form on the base patch with values in the Weyl bundle.
#[derive(Clone, Debug)]
pub struct WeylElement {
    context: Arc<WeylContext>,
    terms: BTreeMap<TermKey, Jet>,
}

impl WeylElement {
    pub fn zero(context: &Arc<WeylContext>) -> Self {
        WeylElement {
            context: context.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(context: &Arc<WeylContext>) -> Self {
        let jet = Jet::one(context.dim, context.jet_order);
        WeylElement::from_jet(context, &jet)
    }

    /// Central embedding of a jet (no `t`, `e` or form factors).
    pub fn from_jet(context: &Arc<WeylContext>, jet: &Jet) -> Self {
        let mut element = WeylElement::zero(context);
        element.insert(TermKey::scalar(context.dim), jet.clone());
        element
    }

    /// The fiber generator `e^k` (0-based index).
    pub fn generator(context: &Arc<WeylContext>, index: usize) -> Result<Self> {
        if index >= context.dim {
            return Err(Error::IndexOutOfRange {
                index,
                dim: context.dim,
            });
        }
        let key = TermKey {
            t_power: 0,
            i_power: 0,
            e_exponents: Exponents::unit(context.dim, index),
            form_indices: Vec::new(),
        };
        WeylElement::monomial(context, key, Jet::one(context.dim, context.jet_order))
    }

    /// The form generator `dx^k` (0-based index).
    pub fn form_generator(context: &Arc<WeylContext>, index: usize) -> Result<Self> {
        if index >= context.dim {
            return Err(Error::IndexOutOfRange {
                index,
                dim: context.dim,
            });
        }
        let key = TermKey {
            t_power: 0,
            i_power: 0,
            e_exponents: Exponents::zeros(context.dim),
            form_indices: vec![index],
        };
        WeylElement::monomial(context, key, Jet::one(context.dim, context.jet_order))
    }

    /// The central element `t`.
    pub fn t_unit(context: &Arc<WeylContext>) -> Self {
        let key = TermKey {
            t_power: 1,
            i_power: 0,
            e_exponents: Exponents::zeros(context.dim),
            form_indices: Vec::new(),
        };
        WeylElement::monomial(context, key, Jet::one(context.dim, context.jet_order)).unwrap()
    }

    /// Single term; degrees above the truncation order collapse to zero.
    pub fn monomial(context: &Arc<WeylContext>, key: TermKey, coeff: Jet) -> Result<Self> {
        if coeff.num_vars() != context.dim || coeff.order() != context.jet_order {
            return Err(Error::ContextMismatch(
                "coefficient jet does not match the context shape".into(),
            ));
        }
        if key.e_exponents.len() != context.dim
            || key.form_indices.iter().any(|&f| f >= context.dim)
            || key.form_indices.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::ContextMismatch("malformed term key".into()));
        }
        let mut element = WeylElement::zero(context);
        element.insert(key, coeff);
        Ok(element)
    }

    fn insert(&mut self, key: TermKey, jet: Jet) {
        if key.total_degree() > self.context.weyl_order {
            return;
        }
        if jet.is_true_zero() {
            return;
        }
        let mut key = key;
        let mut jet = jet;
        if key.i_power >= 2 {
            let (sign, residual) = normalize_i_power(key.i_power as u32);
            key.i_power = residual;
            if sign < 0 {
                jet = jet.neg();
            }
        }
        accumulate(&mut self.terms, key, jet);
    }

    fn normalized(mut self) -> Self {
        self.terms.retain(|_, j| !j.is_true_zero());
        self
    }

    pub fn context(&self) -> &Arc<WeylContext> {
        &self.context
    }

    pub fn terms(&self) -> &BTreeMap<TermKey, Jet> {
        &self.terms
    }

    /// All stored coefficients have empty content. Terms whose coefficient is
    /// an unknown tail (effective order below the declared order) count as
    /// zero content here.
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|j| j.is_zero())
    }

    pub fn coefficient(&self, key: &TermKey) -> Jet {
        self.terms
            .get(key)
            .cloned()
            .unwrap_or_else(|| Jet::zero(self.context.dim, self.context.jet_order))
    }

    fn check_context(&self, other: &WeylElement) -> Result<()> {
        if Arc::ptr_eq(&self.context, &other.context) || self.context == other.context {
            Ok(())
        } else {
            Err(Error::ContextMismatch(
                "elements belong to different Weyl contexts".into(),
            ))
        }
    }

    pub fn add(&self, other: &WeylElement) -> Result<WeylElement> {
        self.check_context(other)?;
        let mut result = self.clone();
        for (key, jet) in &other.terms {
            accumulate(&mut result.terms, key.clone(), jet.clone());
        }
        Ok(result.normalized())
    }

    pub fn sub(&self, other: &WeylElement) -> Result<WeylElement> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> WeylElement {
        WeylElement {
            context: self.context.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, j)| (k.clone(), j.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, factor: &Rational) -> WeylElement {
        WeylElement {
            context: self.context.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, j)| (k.clone(), j.scale(factor)))
                .collect(),
        }
        .normalized()
    }

    /// Multiply every coefficient by one jet (a central multiplication).
    pub fn mul_jet(&self, jet: &Jet) -> Result<WeylElement> {
        let mut result = WeylElement::zero(&self.context);
        for (key, coeff) in &self.terms {
            result.insert(key.clone(), coeff.mul(jet)?);
        }
        Ok(result.normalized())
    }

    /// Fiberwise Moyal product. Preserves total Weyl degree, is associative
    /// up to the context truncation, and is bilinear.
    pub fn moyal(&self, other: &WeylElement) -> Result<WeylElement> {
        self.check_context(other)?;
        let ctx = &self.context;
        let mut result = WeylElement::zero(ctx);
        for (ka, ja) in &self.terms {
            for (kb, jb) in &other.terms {
                // degree is constant across contraction levels
                if ka.total_degree() + kb.total_degree() > ctx.weyl_order {
                    continue;
                }
                let Some((wedge_sign, form)) = wedge_merge(&ka.form_indices, &kb.form_indices)
                else {
                    continue;
                };
                let mut level: BTreeMap<(Exponents, Exponents), Jet> = BTreeMap::new();
                level.insert(
                    (ka.e_exponents.clone(), kb.e_exponents.clone()),
                    ja.mul(jb)?,
                );
                let mut m: u32 = 0;
                loop {
                    let i_total = ka.i_power as u32 + kb.i_power as u32 + m;
                    let (i_sign, i_res) = normalize_i_power(i_total);
                    // (-1/2)^m from the exponential, the i-sign, the wedge sign
                    let mut scalar =
                        Rational::from(BigInt::from(i_sign as i64 * wedge_sign as i64));
                    if m > 0 {
                        let sign = if m % 2 == 0 { 1 } else { -1 };
                        scalar *= Rational::new(BigInt::from(sign), BigInt::from(2u32).pow(m));
                    }
                    for ((ea, eb), coeff) in &level {
                        let key = TermKey {
                            t_power: ka.t_power + kb.t_power + m,
                            i_power: i_res,
                            e_exponents: ea.combined(eb),
                            form_indices: form.clone(),
                        };
                        result.insert(key, coeff.scale(&scalar));
                    }
                    m += 1;
                    let mut next: BTreeMap<(Exponents, Exponents), Jet> = BTreeMap::new();
                    for ((ea, eb), coeff) in &level {
                        for k in 0..ctx.dim {
                            let mult_a = ea.get(k);
                            if mult_a == 0 {
                                continue;
                            }
                            for l in 0..ctx.dim {
                                let mult_b = eb.get(l);
                                if mult_b == 0 {
                                    continue;
                                }
                                let w = &ctx.omega_upper[k][l];
                                if w.is_true_zero() {
                                    continue;
                                }
                                // dividing by m at level m builds the 1/m!
                                let factor = Rational::new(
                                    BigInt::from(mult_a as u64 * mult_b as u64),
                                    BigInt::from(m),
                                );
                                let contrib = coeff.mul(w)?.scale(&factor);
                                let key = (ea.lowered(k), eb.lowered(l));
                                match next.entry(key) {
                                    Entry::Vacant(v) => {
                                        v.insert(contrib);
                                    }
                                    Entry::Occupied(mut o) => {
                                        let sum = o.get().add(&contrib)?;
                                        *o.get_mut() = sum;
                                    }
                                }
                            }
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    level = next;
                }
            }
        }
        Ok(result.normalized())
    }

    /// Graded commutator `a∘b - (-1)^{pq} b∘a` over form degrees `p`, `q`.
    pub fn commutator(&self, other: &WeylElement) -> Result<WeylElement> {
        self.check_context(other)?;
        let mut result = WeylElement::zero(&self.context);
        for (p, part_a) in self.form_parts() {
            for (q, part_b) in other.form_parts() {
                let ab = part_a.moyal(&part_b)?;
                let ba = part_b.moyal(&part_a)?;
                let contribution = if (p * q) % 2 == 0 {
                    ab.sub(&ba)?
                } else {
                    ab.add(&ba)?
                };
                result = result.add(&contribution)?;
            }
        }
        Ok(result)
    }

    fn form_parts(&self) -> Vec<(usize, WeylElement)> {
        let mut parts: BTreeMap<usize, WeylElement> = BTreeMap::new();
        for (key, jet) in &self.terms {
            parts
                .entry(key.form_degree())
                .or_insert_with(|| WeylElement::zero(&self.context))
                .terms
                .insert(key.clone(), jet.clone());
        }
        parts.into_iter().collect()
    }

    /// The adjoint action `(i/t)[self, other]` in one pass.
    ///
    /// Equivalent to `commutator` followed by [`Self::times_i_over_t`]
    /// whenever nothing truncates, but the degree check here applies to the
    /// final key rather than the raw bracket: brackets whose intermediate
    /// degree exceeds the truncation order by up to two are still correct.
    /// The engine uses this form; the two-step composite would lose exactly
    /// those top contributions.
    ///
    /// Per term pair only odd contraction levels survive: swapping the
    /// factors flips the wedge sign and multiplies level `m` by `(-1)^m`
    /// through the antisymmetry of `omega`, so even levels cancel and odd
    /// levels double.
    pub fn ad_action(&self, other: &WeylElement) -> Result<WeylElement> {
        self.check_context(other)?;
        let ctx = &self.context;
        let mut result = WeylElement::zero(ctx);
        for (ka, ja) in &self.terms {
            for (kb, jb) in &other.terms {
                // final total degree is (sum of degrees) - 2 at every level
                if ka.total_degree() + kb.total_degree() > ctx.weyl_order.saturating_add(2) {
                    continue;
                }
                let Some((wedge_sign, form)) = wedge_merge(&ka.form_indices, &kb.form_indices)
                else {
                    continue;
                };
                let mut level: BTreeMap<(Exponents, Exponents), Jet> = BTreeMap::new();
                level.insert(
                    (ka.e_exponents.clone(), kb.e_exponents.clone()),
                    ja.mul(jb)?,
                );
                let mut m: u32 = 0;
                loop {
                    m += 1;
                    let mut next: BTreeMap<(Exponents, Exponents), Jet> = BTreeMap::new();
                    for ((ea, eb), coeff) in &level {
                        for k in 0..ctx.dim {
                            let mult_a = ea.get(k);
                            if mult_a == 0 {
                                continue;
                            }
                            for l in 0..ctx.dim {
                                let mult_b = eb.get(l);
                                if mult_b == 0 {
                                    continue;
                                }
                                let w = &ctx.omega_upper[k][l];
                                if w.is_true_zero() {
                                    continue;
                                }
                                let factor = Rational::new(
                                    BigInt::from(mult_a as u64 * mult_b as u64),
                                    BigInt::from(m),
                                );
                                let contrib = coeff.mul(w)?.scale(&factor);
                                let key = (ea.lowered(k), eb.lowered(l));
                                match next.entry(key) {
                                    Entry::Vacant(v) => {
                                        v.insert(contrib);
                                    }
                                    Entry::Occupied(mut o) => {
                                        let sum = o.get().add(&contrib)?;
                                        *o.get_mut() = sum;
                                    }
                                }
                            }
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    if m % 2 == 1 {
                        // 2 * i * (-it/2)^m / t with i^{m+1} folded into the
                        // sign; (-1)^m = -1 on odd levels
                        let i_total = ka.i_power as u32 + kb.i_power as u32 + m + 1;
                        let (i_sign, i_res) = normalize_i_power(i_total);
                        let scalar = Rational::new(
                            BigInt::from(i_sign as i64 * wedge_sign as i64 * (-2)),
                            BigInt::from(2u32).pow(m),
                        );
                        for ((ea, eb), coeff) in &next {
                            let key = TermKey {
                                t_power: ka.t_power + kb.t_power + m - 1,
                                i_power: i_res,
                                e_exponents: ea.combined(eb),
                                form_indices: form.clone(),
                            };
                            result.insert(key, coeff.scale(&scalar));
                        }
                    }
                    level = next;
                }
            }
        }
        Ok(result.normalized())
    }

    /// Divide by `t` and multiply by `i`; drops the total degree by two.
    ///
    /// Every nonzero term must carry a `t` factor. Bracket outputs satisfy
    /// this automatically; a violation signals a sign error upstream.
    /// Zero-content tails at `t^0` are dropped: they arise from exact
    /// cancellations whose untrusted part cancels by the same algebra.
    pub fn times_i_over_t(&self) -> Result<WeylElement> {
        let mut result = WeylElement::zero(&self.context);
        for (key, jet) in &self.terms {
            if key.t_power == 0 {
                if jet.is_zero() {
                    continue;
                }
                return Err(Error::MissingTFactor);
            }
            let mut new_key = key.clone();
            new_key.t_power -= 1;
            new_key.i_power += 1;
            result.insert(new_key, jet.clone());
        }
        Ok(result.normalized())
    }

    /// Koszul differential: `delta a = dx^l ∧ ∂a/∂e^l`; degree -1, squares
    /// to zero.
    pub fn delta(&self) -> WeylElement {
        let mut result = WeylElement::zero(&self.context);
        for (key, jet) in &self.terms {
            for l in 0..self.context.dim {
                let mult = key.e_exponents.get(l);
                if mult == 0 {
                    continue;
                }
                let Some((sign, form)) = wedge_prepend(l, &key.form_indices) else {
                    continue;
                };
                let new_key = TermKey {
                    t_power: key.t_power,
                    i_power: key.i_power,
                    e_exponents: key.e_exponents.lowered(l),
                    form_indices: form,
                };
                let factor = Rational::from(BigInt::from(sign as i64 * mult as i64));
                result.insert(new_key, jet.scale(&factor));
            }
        }
        result.normalized()
    }

    /// Koszul homotopy: contract the form slots and raise `e`; degree +1,
    /// squares to zero.
    pub fn delta_star(&self) -> WeylElement {
        let mut result = WeylElement::zero(&self.context);
        for (key, jet) in &self.terms {
            for (position, &index) in key.form_indices.iter().enumerate() {
                let mut form = key.form_indices.clone();
                form.remove(position);
                let new_key = TermKey {
                    t_power: key.t_power,
                    i_power: key.i_power,
                    e_exponents: key.e_exponents.raised(index),
                    form_indices: form,
                };
                let sign = if position % 2 == 0 { 1 } else { -1 };
                result.insert(new_key, jet.scale(&Rational::from(BigInt::from(sign))));
            }
        }
        result.normalized()
    }

    /// Normalized homotopy inverse of `delta`: `delta_star / (m + n)` on a
    /// component of `e`-degree `m` and form degree `n`, zero on the center.
    pub fn delta_inv(&self) -> WeylElement {
        let mut result = WeylElement::zero(&self.context);
        for (key, jet) in &self.terms {
            let weight = key.e_degree() as i64 + key.form_degree() as i64;
            if weight == 0 {
                continue;
            }
            for (position, &index) in key.form_indices.iter().enumerate() {
                let mut form = key.form_indices.clone();
                form.remove(position);
                let new_key = TermKey {
                    t_power: key.t_power,
                    i_power: key.i_power,
                    e_exponents: key.e_exponents.raised(index),
                    form_indices: form,
                };
                let sign: i64 = if position % 2 == 0 { 1 } else { -1 };
                let factor = Rational::new(BigInt::from(sign), BigInt::from(weight));
                result.insert(new_key, jet.scale(&factor));
            }
        }
        result.normalized()
    }

    /// Terms with no `e` generators and no form part.
    pub fn central_part(&self) -> WeylElement {
        let mut result = WeylElement::zero(&self.context);
        for (key, jet) in &self.terms {
            if key.is_central() {
                result.terms.insert(key.clone(), jet.clone());
            }
        }
        result
    }

    /// Exterior derivative on coefficients: `d a = dx^l ∧ ∂a/∂x^l`.
    pub fn exterior_d(&self) -> WeylElement {
        let mut result = WeylElement::zero(&self.context);
        for (key, jet) in &self.terms {
            for l in 0..self.context.dim {
                let Some((sign, form)) = wedge_prepend(l, &key.form_indices) else {
                    continue;
                };
                let derivative = jet.diff(l).expect("index within range");
                let new_key = TermKey {
                    t_power: key.t_power,
                    i_power: key.i_power,
                    e_exponents: key.e_exponents.clone(),
                    form_indices: form,
                };
                let coeff = if sign < 0 {
                    derivative.neg()
                } else {
                    derivative
                };
                result.insert(new_key, coeff);
            }
        }
        result.normalized()
    }

    /// Partition by total Weyl degree and by form degree.
    pub fn grading(&self) -> GradingView {
        let mut by_degree: BTreeMap<u32, WeylElement> = BTreeMap::new();
        let mut by_form_degree: BTreeMap<usize, WeylElement> = BTreeMap::new();
        for (key, jet) in &self.terms {
            by_degree
                .entry(key.total_degree())
                .or_insert_with(|| WeylElement::zero(&self.context))
                .terms
                .insert(key.clone(), jet.clone());
            by_form_degree
                .entry(key.form_degree())
                .or_insert_with(|| WeylElement::zero(&self.context))
                .terms
                .insert(key.clone(), jet.clone());
        }
        GradingView {
            context: self.context.clone(),
            by_degree,
            by_form_degree,
        }
    }

    /// Sub-element of one total Weyl degree.
    pub fn degree_component(&self, degree: u32) -> WeylElement {
        let mut result = WeylElement::zero(&self.context);
        for (key, jet) in &self.terms {
            if key.total_degree() == degree {
                result.terms.insert(key.clone(), jet.clone());
            }
        }
        result
    }

    /// Sub-element of one form degree.
    pub fn form_component(&self, form_degree: usize) -> WeylElement {
        let mut result = WeylElement::zero(&self.context);
        for (key, jet) in &self.terms {
            if key.form_degree() == form_degree {
                result.terms.insert(key.clone(), jet.clone());
            }
        }
        result
    }

    /// Smallest total degree carrying nonzero content.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms
            .iter()
            .filter(|(_, j)| !j.is_zero())
            .map(|(k, _)| k.total_degree())
            .min()
    }

    /// Smallest effective order among the stored coefficients.
    pub fn min_eff(&self) -> u32 {
        self.terms
            .values()
            .map(|j| j.eff_order())
            .min()
            .unwrap_or(self.context.jet_order)
    }

    /// Truncate every coefficient to total `x`-degree `<= degree`.
    pub fn truncated_to(&self, degree: u32) -> WeylElement {
        WeylElement {
            context: self.context.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, j)| (k.clone(), j.truncated_to(degree)))
                .collect(),
        }
    }

    /// Equality of commonly-trusted truncations; the right comparison for
    /// quantities computed along routes of different derivative depth.
    pub fn agrees_with(&self, other: &WeylElement) -> bool {
        if self.context != other.context && !Arc::ptr_eq(&self.context, &other.context) {
            return false;
        }
        let d = self.min_eff().min(other.min_eff());
        content_map(&self.truncated_to(d)) == content_map(&other.truncated_to(d))
    }
}

fn content_map(element: &WeylElement) -> BTreeMap<TermKey, Jet> {
    element
        .terms
        .iter()
        .filter(|(_, j)| !j.is_zero())
        .map(|(k, j)| (k.clone(), j.clone()))
        .collect()
}

/// Equality of stored content (zero-content trust markers are ignored).
impl PartialEq for WeylElement {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.context, &other.context) || self.context == other.context)
            && content_map(self) == content_map(other)
    }
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = crate::render::default_names(self.context.dim);
        write!(f, "{}", crate::render::element_text(self, &names))
    }
}

/// Partition of an element by degree, summing back to the element.
pub struct GradingView {
    context: Arc<WeylContext>,
    pub by_degree: BTreeMap<u32, WeylElement>,
    pub by_form_degree: BTreeMap<usize, WeylElement>,
}

impl GradingView {
    /// Reassemble the element from the degree parts.
    pub fn total(&self) -> WeylElement {
        let mut sum = WeylElement::zero(&self.context);
        for part in self.by_degree.values() {
            sum = sum.add(part).expect("parts share the context");
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{integer, rational};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn darboux(weyl_order: u32) -> Arc<WeylContext> {
        WeylContext::standard(1, 6, weyl_order)
    }

    fn e(ctx: &Arc<WeylContext>, k: usize) -> WeylElement {
        WeylElement::generator(ctx, k).unwrap()
    }

    fn random_element(
        rng: &mut ChaCha8Rng,
        ctx: &Arc<WeylContext>,
        max_terms: usize,
    ) -> WeylElement {
        let dim = ctx.dim();
        let mut out = WeylElement::zero(ctx);
        for _ in 0..rng.gen_range(1..=max_terms) {
            let t_power = rng.gen_range(0..=2u32);
            let e_exponents: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=2u32)).collect();
            let mut form_indices: Vec<usize> = (0..dim).filter(|_| rng.gen_bool(0.3)).collect();
            form_indices.sort_unstable();
            let coeff = Jet::from_terms(
                dim,
                ctx.jet_order(),
                (0..2).map(|_| {
                    let expo: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=2u32)).collect();
                    (expo, rational(rng.gen_range(-3..=3), rng.gen_range(1..=2)))
                }),
            )
            .unwrap();
            let key = TermKey {
                t_power,
                i_power: rng.gen_range(0..=1u8),
                e_exponents: e_exponents.into(),
                form_indices,
            };
            if let Ok(term) = WeylElement::monomial(ctx, key, coeff) {
                out = out.add(&term).unwrap();
            }
        }
        out
    }

    /// Independent bidifferential expansion of the Moyal product on two
    /// single terms: sums over explicit contraction index tuples instead of
    /// iterating a contraction operator.
    fn brute_force_moyal(
        ctx: &Arc<WeylContext>,
        ka: &TermKey,
        ja: &Jet,
        kb: &TermKey,
        jb: &Jet,
    ) -> WeylElement {
        fn tuples(dim: usize, m: usize) -> Vec<Vec<usize>> {
            if m == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for rest in tuples(dim, m - 1) {
                for k in 0..dim {
                    let mut v = rest.clone();
                    v.push(k);
                    out.push(v);
                }
            }
            out
        }
        fn apply_derivatives(e: &Exponents, indices: &[usize]) -> Option<(i64, Exponents)> {
            let mut factor = 1i64;
            let mut current = e.clone();
            for &k in indices {
                if current.get(k) == 0 {
                    return None;
                }
                factor *= current.get(k) as i64;
                current = current.lowered(k);
            }
            Some((factor, current))
        }
        let dim = ctx.dim();
        let mut result = WeylElement::zero(ctx);
        let max_m = ka.e_degree().min(kb.e_degree());
        for m in 0..=max_m {
            let mut factorial = 1i64;
            for f in 1..=m as i64 {
                factorial *= f;
            }
            for ks in tuples(dim, m as usize) {
                for ls in tuples(dim, m as usize) {
                    let Some((fa, ea)) = apply_derivatives(&ka.e_exponents, &ks) else {
                        continue;
                    };
                    let Some((fb, eb)) = apply_derivatives(&kb.e_exponents, &ls) else {
                        continue;
                    };
                    let Some((wsign, form)) = wedge_merge(&ka.form_indices, &kb.form_indices)
                    else {
                        continue;
                    };
                    let mut coeff = ja.mul(jb).unwrap();
                    for (k, l) in ks.iter().zip(&ls) {
                        coeff = coeff.mul(&ctx.omega_upper()[*k][*l]).unwrap();
                    }
                    let (isign, ires) =
                        normalize_i_power(ka.i_power as u32 + kb.i_power as u32 + m);
                    let sign = if m % 2 == 0 { 1 } else { -1 };
                    let scalar = Rational::new(
                        BigInt::from(fa * fb * wsign as i64 * isign as i64 * sign),
                        BigInt::from(factorial) * BigInt::from(2u32).pow(m),
                    );
                    let key = TermKey {
                        t_power: ka.t_power + kb.t_power + m,
                        i_power: ires,
                        e_exponents: ea.combined(&eb),
                        form_indices: form,
                    };
                    if let Ok(term) = WeylElement::monomial(ctx, key, coeff.scale(&scalar)) {
                        result = result.add(&term).unwrap();
                    }
                }
            }
        }
        result
    }

    #[test]
    fn moyal_of_generators() {
        // e1 ∘ e2 -> e1 e2 - (it/2) omega^{12}
        let ctx = darboux(8);
        let product = e(&ctx, 0).moyal(&e(&ctx, 1)).unwrap();
        let mut expected = WeylElement::monomial(
            &ctx,
            TermKey {
                t_power: 0,
                i_power: 0,
                e_exponents: vec![1, 1].into(),
                form_indices: vec![],
            },
            Jet::one(2, 6),
        )
        .unwrap();
        // omega^{12} = -1 on the standard structure, so the m=1 term is +(1/2) i t
        expected = expected
            .add(
                &WeylElement::monomial(
                    &ctx,
                    TermKey {
                        t_power: 1,
                        i_power: 1,
                        e_exponents: vec![0, 0].into(),
                        form_indices: vec![],
                    },
                    Jet::constant(2, 6, rational(1, 2)),
                )
                .unwrap(),
            )
            .unwrap();
        assert_eq!(product, expected);
    }

    #[test]
    fn generator_relation() {
        // e^k ∘ e^l - e^l ∘ e^k = -i t omega^{kl}
        let ctx = darboux(8);
        for k in 0..2 {
            for l in 0..2 {
                let lhs = e(&ctx, k)
                    .moyal(&e(&ctx, l))
                    .unwrap()
                    .sub(&e(&ctx, l).moyal(&e(&ctx, k)).unwrap())
                    .unwrap();
                let expected = WeylElement::monomial(
                    &ctx,
                    TermKey {
                        t_power: 1,
                        i_power: 1,
                        e_exponents: vec![0, 0].into(),
                        form_indices: vec![],
                    },
                    ctx.omega_upper()[k][l].neg(),
                )
                .unwrap();
                assert_eq!(lhs, expected);
            }
        }
    }

    #[test]
    fn unit_element() {
        let ctx = darboux(8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_element(&mut rng, &ctx, 4);
            assert_eq!(WeylElement::one(&ctx).moyal(&a).unwrap(), a);
            assert_eq!(a.moyal(&WeylElement::one(&ctx)).unwrap(), a);
        }
    }

    #[test]
    fn moyal_matches_brute_force_expansion() {
        let ctx = darboux(10);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let a = random_element(&mut rng, &ctx, 2);
            let b = random_element(&mut rng, &ctx, 2);
            let fast = a.moyal(&b).unwrap();
            let mut slow = WeylElement::zero(&ctx);
            for (ka, ja) in a.terms() {
                for (kb, jb) in b.terms() {
                    slow = slow.add(&brute_force_moyal(&ctx, ka, ja, kb, jb)).unwrap();
                }
            }
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn moyal_associativity() {
        let ctx = darboux(8);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..25 {
            let a = random_element(&mut rng, &ctx, 3);
            let b = random_element(&mut rng, &ctx, 3);
            let c = random_element(&mut rng, &ctx, 3);
            let lhs = a.moyal(&b).unwrap().moyal(&c).unwrap();
            let rhs = a.moyal(&b.moyal(&c).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn grading_preserved_by_moyal() {
        let ctx = darboux(10);
        // degree 2 times degree 3 lands in degree 5
        let deg2 = e(&ctx, 0).moyal(&e(&ctx, 1)).unwrap().degree_component(2);
        let deg3 = e(&ctx, 0)
            .moyal(&e(&ctx, 0))
            .unwrap()
            .moyal(&e(&ctx, 1))
            .unwrap()
            .degree_component(3);
        let product = deg2.moyal(&deg3).unwrap();
        for (key, jet) in product.terms() {
            if !jet.is_zero() {
                assert_eq!(key.total_degree(), 5);
            }
        }
    }

    #[test]
    fn commutator_basics() {
        let ctx = darboux(8);
        // [e1, e2] = -i t omega^{12} = +i t here
        let bracket = e(&ctx, 0).commutator(&e(&ctx, 1)).unwrap();
        let expected = WeylElement::monomial(
            &ctx,
            TermKey {
                t_power: 1,
                i_power: 1,
                e_exponents: vec![0, 0].into(),
                form_indices: vec![],
            },
            Jet::one(2, 6),
        )
        .unwrap();
        assert_eq!(bracket, expected);

        // central elements commute with everything
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let t = WeylElement::t_unit(&ctx);
        for _ in 0..10 {
            let a = random_element(&mut rng, &ctx, 4);
            assert!(t.commutator(&a).unwrap().is_zero());
        }
    }

    #[test]
    fn graded_commutator_of_odd_elements() {
        // [e1 dx1, e2 dx2] picks up a plus sign between the cross terms:
        // the result is -i t omega^{12} dx1^dx2 = +i t dx1^dx2 here
        let ctx = darboux(8);
        let a = e(&ctx, 0)
            .moyal(&WeylElement::form_generator(&ctx, 0).unwrap())
            .unwrap();
        let b = e(&ctx, 1)
            .moyal(&WeylElement::form_generator(&ctx, 1).unwrap())
            .unwrap();
        let bracket = a.commutator(&b).unwrap();
        let expected = WeylElement::monomial(
            &ctx,
            TermKey {
                t_power: 1,
                i_power: 1,
                e_exponents: vec![0, 0].into(),
                form_indices: vec![0, 1],
            },
            Jet::one(2, 6),
        )
        .unwrap();
        assert_eq!(bracket, expected);
    }

    #[test]
    fn ad_action_matches_the_two_step_composite() {
        // below the truncation ceiling the fused action equals
        // commutator followed by times_i_over_t
        let ctx = darboux(14);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..40 {
            let a = random_element(&mut rng, &ctx, 3);
            let b = random_element(&mut rng, &ctx, 3);
            let fused = a.ad_action(&b).unwrap();
            let composite = a.commutator(&b).unwrap().times_i_over_t().unwrap();
            assert_eq!(fused, composite);
        }
    }

    #[test]
    fn i_over_t_examples() {
        let ctx = darboux(8);
        // (i/t) [e1, e2] recovers omega^{12}
        let bracket = e(&ctx, 0).commutator(&e(&ctx, 1)).unwrap();
        let result = bracket.times_i_over_t().unwrap();
        assert_eq!(
            result,
            WeylElement::from_jet(&ctx, &ctx.omega_upper()[0][1].clone())
        );
        // zero passes through
        assert!(WeylElement::zero(&ctx).times_i_over_t().unwrap().is_zero());
        // a bare t^0 term is rejected
        assert!(matches!(
            e(&ctx, 0).times_i_over_t(),
            Err(Error::MissingTFactor)
        ));
    }

    #[test]
    fn delta_examples() {
        let ctx = darboux(8);
        assert_eq!(
            e(&ctx, 0).delta(),
            WeylElement::form_generator(&ctx, 0).unwrap()
        );
        // delta(e1 e2) = e2 dx1 + e1 dx2
        let quadratic = WeylElement::monomial(
            &ctx,
            TermKey {
                t_power: 0,
                i_power: 0,
                e_exponents: vec![1, 1].into(),
                form_indices: vec![],
            },
            Jet::one(2, 6),
        )
        .unwrap();
        let image = quadratic.delta();
        let expected = WeylElement::monomial(
            &ctx,
            TermKey {
                t_power: 0,
                i_power: 0,
                e_exponents: vec![0, 1].into(),
                form_indices: vec![0],
            },
            Jet::one(2, 6),
        )
        .unwrap()
        .add(
            &WeylElement::monomial(
                &ctx,
                TermKey {
                    t_power: 0,
                    i_power: 0,
                    e_exponents: vec![1, 0].into(),
                    form_indices: vec![1],
                },
                Jet::one(2, 6),
            )
            .unwrap(),
        )
        .unwrap();
        assert_eq!(image, expected);
        // central t term dies
        assert!(WeylElement::t_unit(&ctx).delta().is_zero());
    }

    #[test]
    fn delta_star_examples() {
        let ctx = darboux(8);
        assert_eq!(
            WeylElement::form_generator(&ctx, 0).unwrap().delta_star(),
            e(&ctx, 0)
        );
        // delta_star(dx1 ^ dx2) = e1 dx2 - e2 dx1
        let two_form = WeylElement::monomial(
            &ctx,
            TermKey {
                t_power: 0,
                i_power: 0,
                e_exponents: vec![0, 0].into(),
                form_indices: vec![0, 1],
            },
            Jet::one(2, 6),
        )
        .unwrap();
        let image = two_form.delta_star();
        let expected = WeylElement::monomial(
            &ctx,
            TermKey {
                t_power: 0,
                i_power: 0,
                e_exponents: vec![1, 0].into(),
                form_indices: vec![1],
            },
            Jet::one(2, 6),
        )
        .unwrap()
        .sub(
            &WeylElement::monomial(
                &ctx,
                TermKey {
                    t_power: 0,
                    i_power: 0,
                    e_exponents: vec![0, 1].into(),
                    form_indices: vec![0],
                },
                Jet::one(2, 6),
            )
            .unwrap(),
        )
        .unwrap();
        assert_eq!(image, expected);
        assert!(e(&ctx, 0).delta_star().is_zero());
    }

    #[test]
    fn delta_inv_examples() {
        let ctx = darboux(8);
        assert_eq!(
            WeylElement::form_generator(&ctx, 0).unwrap().delta_inv(),
            e(&ctx, 0)
        );
        // delta_inv(e1 dx2) = (1/2) e1 e2
        let input = WeylElement::monomial(
            &ctx,
            TermKey {
                t_power: 0,
                i_power: 0,
                e_exponents: vec![1, 0].into(),
                form_indices: vec![1],
            },
            Jet::one(2, 6),
        )
        .unwrap();
        let expected = WeylElement::monomial(
            &ctx,
            TermKey {
                t_power: 0,
                i_power: 0,
                e_exponents: vec![1, 1].into(),
                form_indices: vec![],
            },
            Jet::constant(2, 6, rational(1, 2)),
        )
        .unwrap();
        assert_eq!(input.delta_inv(), expected);
        // central terms die
        let t2 = WeylElement::t_unit(&ctx)
            .moyal(&WeylElement::t_unit(&ctx))
            .unwrap();
        assert!(t2.delta_inv().is_zero());
    }

    #[test]
    fn koszul_operators_square_to_zero() {
        let ctx = darboux(8);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = random_element(&mut rng, &ctx, 5);
            assert!(a.delta().delta().is_zero());
            assert!(a.delta_star().delta_star().is_zero());
            assert!(a.delta_inv().delta_inv().is_zero());
        }
    }

    #[test]
    fn homotopy_identity_on_monomials() {
        let ctx = darboux(12);
        // all monomials with e-degree + form-degree <= 6
        for e1 in 0..=4u32 {
            for e2 in 0..=4u32 {
                for form in [vec![], vec![0], vec![1], vec![0, 1]] {
                    let m = e1 + e2;
                    let n = form.len() as u32;
                    if m + n > 6 || m + n == 0 {
                        continue;
                    }
                    let key = TermKey {
                        t_power: 1,
                        i_power: 0,
                        e_exponents: vec![e1, e2].into(),
                        form_indices: form,
                    };
                    let monomial = WeylElement::monomial(&ctx, key, Jet::one(2, 6)).unwrap();
                    let lhs = monomial
                        .delta_star()
                        .delta()
                        .add(&monomial.delta().delta_star())
                        .unwrap();
                    let rhs = monomial.scale(&integer((m + n) as i64));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn decomposition_identity() {
        // generated degrees stay below the truncation ceiling: delta_star of
        // a top-degree term legitimately leaves the truncated algebra
        let ctx = darboux(12);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let a = random_element(&mut rng, &ctx, 5);
            let reassembled = a
                .delta_inv()
                .delta()
                .add(&a.delta().delta_inv())
                .unwrap()
                .add(&a.central_part())
                .unwrap();
            assert_eq!(reassembled, a);
        }
    }

    #[test]
    fn central_part_examples() {
        let ctx = darboux(8);
        let t2 = WeylElement::t_unit(&ctx)
            .moyal(&WeylElement::t_unit(&ctx))
            .unwrap();
        let mixed = t2.add(&e(&ctx, 0)).unwrap();
        assert_eq!(mixed.central_part(), t2);
        assert!(WeylElement::form_generator(&ctx, 0)
            .unwrap()
            .central_part()
            .is_zero());
    }

    #[test]
    fn exterior_d_examples() {
        let ctx = darboux(8);
        let x1 = Jet::coordinate(2, 6, 0).unwrap();
        let x2 = Jet::coordinate(2, 6, 1).unwrap();
        assert_eq!(
            WeylElement::from_jet(&ctx, &x1).exterior_d(),
            WeylElement::form_generator(&ctx, 0)
                .unwrap()
                .mul_jet(&Jet::one(2, 6).truncated_to(5))
                .unwrap()
        );
        // d(x1 x2) = x2 dx1 + x1 dx2
        let product = WeylElement::from_jet(&ctx, &x1.mul(&x2).unwrap());
        let d = product.exterior_d();
        let expected = WeylElement::form_generator(&ctx, 0)
            .unwrap()
            .mul_jet(&x2.truncated_to(5))
            .unwrap()
            .add(
                &WeylElement::form_generator(&ctx, 1)
                    .unwrap()
                    .mul_jet(&x1.truncated_to(5))
                    .unwrap(),
            )
            .unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn exterior_d_squares_to_zero() {
        let ctx = darboux(8);
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..50 {
            let a = random_element(&mut rng, &ctx, 4);
            assert!(a.exterior_d().exterior_d().is_zero());
        }
    }

    #[test]
    fn inner_derivation_identity_for_delta() {
        // delta a = (i/t) [ -omega_{kl} e^k dx^l, a ], including jet-valued omega
        let one_plus_x1 = Jet::one(2, 6)
            .add(&Jet::coordinate(2, 6, 0).unwrap())
            .unwrap();
        let zero = Jet::zero(2, 6);
        let lower = vec![
            vec![zero.clone(), one_plus_x1.clone()],
            vec![one_plus_x1.neg(), zero.clone()],
        ];
        let upper = crate::jet::matrix_inverse(&lower).unwrap();
        for ctx in [darboux(8), WeylContext::new(lower, upper, 8).unwrap()] {
            let mut v = WeylElement::zero(&ctx);
            for k in 0..2 {
                for l in 0..2 {
                    let key = TermKey {
                        t_power: 0,
                        i_power: 0,
                        e_exponents: Exponents::unit(2, k),
                        form_indices: vec![l],
                    };
                    if let Ok(term) =
                        WeylElement::monomial(&ctx, key, ctx.omega_lower()[k][l].neg())
                    {
                        v = v.add(&term).unwrap();
                    }
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(23);
            for _ in 0..25 {
                let a = random_element(&mut rng, &ctx, 3);
                let via_bracket = v.commutator(&a).unwrap().times_i_over_t().unwrap();
                assert!(via_bracket.agrees_with(&a.delta()));
            }
        }
    }

    #[test]
    fn grading_view_examples() {
        let ctx = darboux(8);
        let mixed = e(&ctx, 0).add(&WeylElement::t_unit(&ctx)).unwrap();
        let view = mixed.grading();
        assert_eq!(view.by_degree[&1], e(&ctx, 0));
        assert_eq!(view.by_degree[&2], WeylElement::t_unit(&ctx));
        assert_eq!(view.total(), mixed);
        assert!(WeylElement::zero(&ctx).grading().by_degree.is_empty());
    }

    #[test]
    fn context_mismatch_rejected() {
        let a = WeylElement::one(&darboux(8));
        let b = WeylElement::one(&WeylContext::standard(2, 6, 8));
        assert!(a.add(&b).is_err());
        assert!(a.moyal(&b).is_err());
    }
}
