use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::{Dimension, Domain, Value};
use crate::error::Result;

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

fn categorical_mass(d: &Dimension, choices: &[String], choice: &str) -> f64 {
    let k = choices.len();
    let w = d.confidence.default_choice_weight(k);
    if k == 1 {
        1.0
    } else if Some(choice) == d.default.as_str() {
        w
    } else {
        (1.0 - w) / (k - 1) as f64
    }
}

/// Prior density of unit coordinate `u`. Categorical choices occupy bins
/// of width `1 / k`, so a choice's mass is spread evenly over its bin.
pub(crate) fn unit_density(d: &Dimension, u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    match &d.domain {
        Domain::Categorical { choices } => {
            let v = d.from_unit(u).unwrap();
            categorical_mass(d, choices, v.as_str().unwrap()) * choices.len() as f64
        }
        _ => match d.confidence.std_fraction() {
            None => 1.0,
            Some(sd) => {
                let c = d.to_unit(&d.default).unwrap();
                let mass = normal_cdf((1.0 - c) / sd) - normal_cdf(-c / sd);
                normal_pdf((u - c) / sd) / sd / mass
            }
        },
    }
}

fn unit_mass(d: &Dimension, a: f64, b: f64) -> f64 {
    match d.confidence.std_fraction() {
        None => b - a,
        Some(sd) => {
            let c = d.to_unit(&d.default).unwrap();
            let z = normal_cdf((1.0 - c) / sd) - normal_cdf(-c / sd);
            (normal_cdf((b - c) / sd) - normal_cdf((a - c) / sd)) / z
        }
    }
}

/// Prior density of `value` with respect to the dimension's search
/// measure: Lebesgue on the raw range for floats (on `ln x` when
/// log-scaled), counting measure for integers and categorical choices.
/// An integer's mass is the prior mass of its unit-coordinate bin, which is
/// exactly the probability that a rounded prior draw lands on it.
pub fn prior_density(d: &Dimension, value: &Value) -> Result<f64> {
    let v = d.check(value)?;
    Ok(match &d.domain {
        Domain::Categorical { choices } => categorical_mass(d, choices, v.as_str().unwrap()),
        Domain::Integer { .. } => {
            let (a, b) = d.integer_bin(v.as_f64().unwrap() as i64);
            unit_mass(d, a, b)
        }
        Domain::Float { .. } => unit_density(d, d.to_unit(&v)?) / d.search_width().unwrap(),
    })
}
