use super::{Constraint, Dimension, SearchSpace};
use crate::error::{Error, Result};
use crate::policy::default_catalog;

const NAMES: [&str; 5] = [
    "simsiam_aug",
    "simsiam_training",
    "group_augment",
    "randaugment",
    "smartaugment",
];

pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

/// Member counts of the default group catalog, in group order.
pub fn group_catalog_sizes() -> Vec<usize> {
    default_catalog().iter().map(|g| g.members.len()).collect()
}

pub fn builtin_space(name: &str) -> Result<SearchSpace> {
    let f = Dimension::float;
    let i = Dimension::integer;
    let dims = match name {
        "simsiam_aug" => vec![
            f("p_colorjitter", 0.0, 1.0, false, 0.8)?,
            f("p_grayscale", 0.0, 1.0, false, 0.2)?,
            f("p_horizontal_flip", 0.0, 1.0, false, 0.5)?,
            f("p_solarize", 0.0, 1.0, false, 0.2)?,
            f("brightness_strength", 0.0, 1.5, false, 0.4)?,
            f("contrast_strength", 0.0, 1.5, false, 0.4)?,
            f("saturation_strength", 0.0, 1.5, false, 0.4)?,
            f("hue_strength", 0.0, 0.5, false, 0.1)?,
            i("solarize_threshold", 0, 255, false, 127)?,
        ],
        "simsiam_training" => vec![
            f("learning_rate", 0.003, 0.3, true, 0.03)?,
            i("warmup_epochs", 0, 80, false, 0)?,
            f("warmup_multiplier", 1.0, 3.0, false, 1.0)?,
            Dimension::categorical("optimizer", &["AdamW", "SGD", "LARS"], "SGD")?,
            f("weight_decay_start", 5e-6, 5e-2, true, 5e-4)?,
            f("weight_decay_end", 5e-6, 5e-2, true, 5e-4)?,
        ],
        "group_augment" => vec![
            f("p_color_transformations", 0.0, 1.0, false, 0.5)?,
            f("p_geometric_transformations", 0.0, 1.0, false, 0.5)?,
            f("p_non_rigid_transformations", 0.0, 1.0, false, 0.0)?,
            f("p_quality_transformations", 0.0, 1.0, false, 0.0)?,
            f("p_exotic_transformations", 0.0, 1.0, false, 0.0)?,
            i("num_color_transformations", 1, 5, false, 1)?,
            i("num_geometric_transformations", 1, 2, false, 1)?,
            i("num_non_rigid_transformations", 1, 3, false, 1)?,
            i("num_quality_transformations", 1, 2, false, 1)?,
            i("num_exotic_transformations", 1, 2, false, 1)?,
            i("num_total_group_samples", 1, 5, false, 1)?,
        ],
        "randaugment" => vec![i("num_ops", 1, 15, false, 3)?, i("magnitude", 0, 30, false, 4)?],
        "smartaugment" => vec![
            i("num_col_ops", 1, 9, false, 2)?,
            i("num_geo_ops", 1, 5, false, 1)?,
            i("col_magnitude", 0, 30, false, 4)?,
            i("geo_magnitude", 0, 30, false, 4)?,
            f("p_apply_ops", 0.0, 1.0, false, 1.0)?,
        ],
        other => return Err(Error::UnknownSpace(other.to_string())),
    };
    let space = SearchSpace::new(name, dims)?;
    Ok(if name == "group_augment" {
        space.with_constraint(Constraint::GroupAugment)
    } else {
        space
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let total: usize = NAMES.iter().map(|n| builtin_space(n).unwrap().len()).sum();
        assert_eq!(total, 33);
        assert_eq!(group_catalog_sizes(), vec![5, 2, 3, 2, 2]);
        assert!(builtin_space("nope").is_err());
    }
}
