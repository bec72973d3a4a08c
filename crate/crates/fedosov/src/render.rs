//! Deterministic text and JSON rendering.
//!
//! Text output follows the canonical term orders of the underlying maps, so
//! identical values always render byte-identically. Polynomial strings
//! re-parse under the expression grammar; element strings use `i`, `t`,
//! `e1..`, `dx1..` factors with `^` both for powers and between wedge
//! factors and are display-only.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use num::{One, Signed};

use crate::jet::{parse_rational, rational_string, Jet, Rational};
use crate::quantize::CoefficientSeries;
use crate::weyl::{TermKey, WeylContext, WeylElement};
use crate::{Error, Result};

/// `x1, x2, ...`.
pub fn default_names(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

fn monomial_string(exponents: &[u32], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (index, &power) in exponents.iter().enumerate() {
        match power {
            0 => {}
            1 => parts.push(names[index].clone()),
            _ => parts.push(format!("{}^{power}", names[index])),
        }
    }
    parts.join("*")
}

/// Render a jet as a re-parseable polynomial like `1 - x1 + 3/2*x1^2`.
pub fn jet_polynomial(jet: &Jet, names: &[String]) -> String {
    if jet.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (exponents, coeff) in jet.terms() {
        let negative = coeff.is_negative();
        let magnitude = coeff.abs();
        let vars = monomial_string(exponents.as_slice(), names);
        let body = if vars.is_empty() {
            rational_string(&magnitude)
        } else if magnitude.is_one() {
            vars
        } else {
            format!("{}*{vars}", rational_string(&magnitude))
        };
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    out
}

fn coefficient_factor(jet: &Jet, names: &[String]) -> Option<String> {
    let body = jet_polynomial(jet, names);
    if body == "1" {
        return None;
    }
    let needs_parens = jet.terms().len() > 1 || body.contains('-') || body.contains('/');
    Some(if needs_parens {
        format!("({body})")
    } else {
        body
    })
}

fn term_factors(key: &TermKey, coeff: &Jet, names: &[String]) -> String {
    let mut factors: Vec<String> = Vec::new();
    if let Some(front) = coefficient_factor(coeff, names) {
        factors.push(front);
    }
    if key.i_power == 1 {
        factors.push("i".to_string());
    }
    match key.t_power {
        0 => {}
        1 => factors.push("t".to_string()),
        k => factors.push(format!("t^{k}")),
    }
    for (index, &power) in key.e_exponents.as_slice().iter().enumerate() {
        match power {
            0 => {}
            1 => factors.push(format!("e{}", index + 1)),
            _ => factors.push(format!("e{}^{power}", index + 1)),
        }
    }
    if !key.form_indices.is_empty() {
        factors.push(
            key.form_indices
                .iter()
                .map(|f| format!("dx{}", f + 1))
                .collect::<Vec<_>>()
                .join("^"),
        );
    }
    if factors.is_empty() {
        "1".to_string()
    } else {
        factors.join("*")
    }
}

/// Render an element, terms in canonical order, like
/// `(-1/2)*i*t + x1^2*e1*e2*dx1^dx2`.
pub fn element_text(element: &WeylElement, names: &[String]) -> String {
    let mut parts = Vec::new();
    for (key, coeff) in element.terms() {
        if coeff.is_zero() {
            continue;
        }
        parts.push(term_factors(key, coeff, names));
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

/// Render one complex coefficient like `x2 + (-1/2)*i`.
pub fn complex_string(re: &Jet, im: &Jet, names: &[String]) -> String {
    let imaginary = if im.is_zero() {
        None
    } else {
        let body = jet_polynomial(im, names);
        Some(if body == "1" {
            "i".to_string()
        } else if im.terms().len() > 1 || body.contains('-') || body.contains('/') {
            format!("({body})*i")
        } else {
            format!("{body}*i")
        })
    };
    match (re.is_zero(), imaginary) {
        (true, None) => "0".to_string(),
        (true, Some(imag)) => imag,
        (false, None) => jet_polynomial(re, names),
        (false, Some(imag)) => format!("{} + {imag}", jet_polynomial(re, names)),
    }
}

/// `c0 = ...` lines for a coefficient series.
pub fn series_lines(series: &CoefficientSeries, names: &[String]) -> Vec<String> {
    series
        .entries()
        .iter()
        .enumerate()
        .map(|(k, entry)| format!("c{k} = {}", complex_string(&entry.re, &entry.im, names)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetTermJson {
    pub exponents: Vec<u32>,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetJson {
    pub num_vars: usize,
    pub order: u32,
    pub terms: Vec<JetTermJson>,
}

impl From<&Jet> for JetJson {
    fn from(jet: &Jet) -> Self {
        JetJson {
            num_vars: jet.num_vars(),
            order: jet.order(),
            terms: jet
                .terms()
                .iter()
                .map(|(exponents, value)| JetTermJson {
                    exponents: exponents.as_slice().to_vec(),
                    value: rational_string(value),
                })
                .collect(),
        }
    }
}

impl JetJson {
    pub fn to_jet(&self) -> Result<Jet> {
        let terms = self
            .terms
            .iter()
            .map(|term| {
                let value = parse_rational(&term.value).ok_or_else(|| Error::Parse {
                    line: 1,
                    col: 1,
                    msg: format!("malformed rational `{}`", term.value),
                })?;
                Ok((term.exponents.clone(), value))
            })
            .collect::<Result<Vec<(Vec<u32>, Rational)>>>()?;
        Jet::from_terms(self.num_vars, self.order, terms)
    }
}

/// One element term; `form_indices` are 1-based in the interchange format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementTermJson {
    pub t_power: u32,
    pub i_power: u8,
    pub e_exponents: Vec<u32>,
    pub form_indices: Vec<usize>,
    pub coeff: JetJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    pub dim: usize,
    pub jet_order: u32,
    pub weyl_order: u32,
    pub terms: Vec<ElementTermJson>,
}

impl From<&WeylElement> for ElementJson {
    fn from(element: &WeylElement) -> Self {
        let ctx = element.context();
        ElementJson {
            dim: ctx.dim(),
            jet_order: ctx.jet_order(),
            weyl_order: ctx.weyl_order(),
            terms: element
                .terms()
                .iter()
                .filter(|(_, jet)| !jet.is_zero())
                .map(|(key, jet)| ElementTermJson {
                    t_power: key.t_power,
                    i_power: key.i_power,
                    e_exponents: key.e_exponents.as_slice().to_vec(),
                    form_indices: key.form_indices.iter().map(|f| f + 1).collect(),
                    coeff: JetJson::from(jet),
                })
                .collect(),
        }
    }
}

impl ElementJson {
    /// Rebuild against a context; shapes must match.
    pub fn to_element(&self, ctx: &Arc<WeylContext>) -> Result<WeylElement> {
        if self.dim != ctx.dim() || self.jet_order != ctx.jet_order() {
            return Err(Error::ContextMismatch(
                "serialized element does not match the context".into(),
            ));
        }
        let mut element = WeylElement::zero(ctx);
        for term in &self.terms {
            let mut form: Vec<usize> = Vec::with_capacity(term.form_indices.len());
            for &index in &term.form_indices {
                if index == 0 || index > ctx.dim() {
                    return Err(Error::IndexOutOfRange {
                        index,
                        dim: ctx.dim(),
                    });
                }
                form.push(index - 1);
            }
            let key = TermKey {
                t_power: term.t_power,
                i_power: term.i_power,
                e_exponents: term.e_exponents.clone().into(),
                form_indices: form,
            };
            element = element.add(&WeylElement::monomial(ctx, key, term.coeff.to_jet()?)?)?;
        }
        Ok(element)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntryJson {
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub order: usize,
    pub coefficients: Vec<SeriesEntryJson>,
}

/// Polynomial-string form of a series; the strings re-parse under the
/// expression grammar.
pub fn series_json(series: &CoefficientSeries, names: &[String]) -> SeriesJson {
    SeriesJson {
        order: series.order(),
        coefficients: series
            .entries()
            .iter()
            .map(|entry| SeriesEntryJson {
                re: jet_polynomial(&entry.re, names),
                im: jet_polynomial(&entry.im, names),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{integer, rational};

    #[test]
    fn polynomial_round_trip_through_grammar() {
        let names = default_names(2);
        let jet = Jet::from_terms(
            2,
            4,
            [
                (vec![0, 0], integer(1)),
                (vec![1, 0], integer(-1)),
                (vec![2, 1], rational(3, 2)),
            ],
        )
        .unwrap();
        let text = jet_polynomial(&jet, &names);
        assert_eq!(text, "1 - x1 + 3/2*x1^2*x2");
        let reparsed = crate::expr::parse_to_jet(&text, &names, 2, 4).unwrap();
        assert_eq!(reparsed, jet);
    }

    #[test]
    fn element_text_examples() {
        let ctx = WeylContext::standard(1, 4, 8);
        let names = default_names(2);
        assert_eq!(element_text(&WeylElement::zero(&ctx), &names), "0");
        assert_eq!(element_text(&WeylElement::one(&ctx), &names), "1");

        let term = WeylElement::monomial(
            &ctx,
            TermKey {
                t_power: 1,
                i_power: 1,
                e_exponents: vec![0, 0].into(),
                form_indices: vec![],
            },
            Jet::constant(2, 4, rational(-1, 2)),
        )
        .unwrap();
        let quadratic = WeylElement::monomial(
            &ctx,
            TermKey {
                t_power: 0,
                i_power: 0,
                e_exponents: vec![1, 1].into(),
                form_indices: vec![0, 1],
            },
            Jet::monomial(2, 4, vec![2, 0], integer(1)).unwrap(),
        )
        .unwrap();
        // both terms have total degree 2; the t-power breaks the tie
        let sum = term.add(&quadratic).unwrap();
        assert_eq!(
            element_text(&sum, &names),
            "x1^2*e1*e2*dx1^dx2 + (-1/2)*i*t"
        );
    }

    #[test]
    fn element_json_round_trip() {
        let ctx = WeylContext::standard(1, 4, 8);
        let element = WeylElement::monomial(
            &ctx,
            TermKey {
                t_power: 2,
                i_power: 1,
                e_exponents: vec![1, 0].into(),
                form_indices: vec![1],
            },
            Jet::from_terms(2, 4, [(vec![0, 1], rational(-5, 3))]).unwrap(),
        )
        .unwrap();
        let dto = ElementJson::from(&element);
        let text = serde_json::to_string_pretty(&dto).unwrap();
        let parsed: ElementJson = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string_pretty(&parsed).unwrap(), text);
        assert_eq!(parsed.to_element(&ctx).unwrap(), element);
    }

    #[test]
    fn complex_rendering() {
        let names = default_names(2);
        let re = Jet::coordinate(2, 4, 1).unwrap();
        let im = Jet::constant(2, 4, rational(-1, 2));
        assert_eq!(complex_string(&re, &im, &names), "x2 + (-1/2)*i");
        assert_eq!(
            complex_string(&Jet::zero(2, 4), &Jet::one(2, 4), &names),
            "i"
        );
        assert_eq!(
            complex_string(&Jet::zero(2, 4), &Jet::zero(2, 4), &names),
            "0"
        );
    }
}
