//! Labeled nonnegative quantities for one metric on one day.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub label: String,
    pub quantity: f64,
}

/// An ordered list of `(label, quantity)` pairs.
///
/// Quantities are unit-agnostic (nodes, blocks, ETH, USD). Construction
/// guarantees every quantity is finite and nonnegative, labels are unique
/// and at least one quantity is positive, so every index in
/// [`crate::indices`] is defined on any value of this type. Zero-quantity
/// entries are kept: they count towards the population size and take part
/// in divergence alignment.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ShareDistribution {
    entries: Vec<Entry>,
}

impl ShareDistribution {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let entries = entries
            .into_iter()
            .map(|(label, quantity)| Entry {
                label: label.into(),
                quantity,
            })
            .collect();
        Self::from_entries(entries)
    }

    pub fn from_entries(entries: Vec<Entry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid_distribution("no entries"));
        }
        let mut seen = HashSet::with_capacity(entries.len());
        let mut any_positive = false;
        for e in &entries {
            if !e.quantity.is_finite() || e.quantity < 0.0 {
                return Err(Error::invalid_distribution(format!(
                    "quantity for `{}` must be finite and nonnegative, got {}",
                    e.label, e.quantity
                )));
            }
            if !seen.insert(e.label.as_str()) {
                return Err(Error::invalid_distribution(format!(
                    "duplicate label `{}`",
                    e.label
                )));
            }
            any_positive |= e.quantity > 0.0;
        }
        if !any_positive {
            return Err(Error::invalid_distribution("all quantities are zero"));
        }
        Ok(Self { entries })
    }

    /// Builds a distribution with generated labels `e0`, `e1`, ... padded so
    /// that lexicographic order matches positional order.
    pub fn from_quantities(quantities: &[f64]) -> Result<Self> {
        let width = quantities.len().saturating_sub(1).to_string().len();
        Self::new(
            quantities
                .iter()
                .enumerate()
                .map(|(i, &q)| (format!("e{i:0width$}"), q)),
        )
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn quantities(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.quantity)
    }

    pub fn total(&self) -> f64 {
        self.quantities().sum()
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .map(|e| e.quantity)
    }

    /// `quantity_i / Σ quantity`, in entry order.
    pub fn proportions(&self) -> Vec<f64> {
        let total = self.total();
        self.quantities().map(|q| q / total).collect()
    }

    /// Largest single proportion.
    pub fn max_share(&self) -> f64 {
        let total = self.total();
        self.quantities().fold(0.0, f64::max) / total
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::invalid_argument(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Self::from_entries(
            self.entries
                .iter()
                .map(|e| Entry {
                    label: e.label.clone(),
                    quantity: e.quantity * factor,
                })
                .collect(),
        )
    }
}

impl<'de> Deserialize<'de> for ShareDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let entries = Vec::<Entry>::deserialize(deserializer)?;
        ShareDistribution::from_entries(entries).map_err(serde::de::Error::custom)
    }
}

/// Aligns two distributions onto the union of their labels.
///
/// Returns proportion vectors of equal length ordered lexicographically by
/// label; a label missing from one side gets proportion 0 there.
pub fn align(p: &ShareDistribution, q: &ShareDistribution) -> (Vec<f64>, Vec<f64>) {
    let mut union: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for (e, share) in p.entries.iter().zip(p.proportions()) {
        union.entry(&e.label).or_default().0 = share;
    }
    for (e, share) in q.entries.iter().zip(q.proportions()) {
        union.entry(&e.label).or_default().1 = share;
    }
    union.into_values().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(pairs: &[(&str, f64)]) -> ShareDistribution {
        ShareDistribution::new(pairs.iter().map(|&(l, q)| (l, q))).unwrap()
    }

    #[test]
    fn proportions_examples() {
        assert_eq!(dist(&[("a", 2.0), ("b", 2.0)]).proportions(), vec![0.5, 0.5]);
        assert_eq!(dist(&[("a", 3.0), ("b", 1.0)]).proportions(), vec![0.75, 0.25]);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let all_zero = ShareDistribution::new([("a", 0.0), ("b", 0.0)]);
        assert!(matches!(all_zero, Err(Error::InvalidDistribution(_))));
        assert!(ShareDistribution::new([("a", -1.0), ("b", 2.0)]).is_err());
        assert!(ShareDistribution::new([("a", 1.0), ("a", 2.0)]).is_err());
        assert!(ShareDistribution::new([("a", f64::NAN)]).is_err());
        assert!(ShareDistribution::new(Vec::<(String, f64)>::new()).is_err());
    }

    #[test]
    fn zero_entries_are_retained() {
        let d = dist(&[("a", 0.0), ("b", 5.0)]);
        assert_eq!(d.len(), 2);
        assert_eq!(d.proportions(), vec![0.0, 1.0]);
    }

    #[test]
    fn align_examples() {
        let (p, q) = align(&dist(&[("a", 1.0)]), &dist(&[("a", 1.0), ("b", 1.0)]));
        assert_eq!((p, q), (vec![1.0, 0.0], vec![0.5, 0.5]));

        let (p, q) = align(
            &dist(&[("b", 1.0), ("a", 1.0)]),
            &dist(&[("a", 1.0), ("b", 1.0)]),
        );
        assert_eq!(p, q);
        assert_eq!(p, vec![0.5, 0.5]);

        let (p, q) = align(&dist(&[("a", 1.0)]), &dist(&[("b", 1.0)]));
        assert_eq!((p, q), (vec![1.0, 0.0], vec![0.0, 1.0]));
    }

    #[test]
    fn generated_labels_sort_positionally() {
        let d = ShareDistribution::from_quantities(&[1.0; 12]).unwrap();
        let labels: Vec<_> = d.entries().iter().map(|e| e.label.as_str()).collect();
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(labels, sorted);
        assert_eq!(labels[0], "e00");
    }

    #[test]
    fn deserialize_validates() {
        let ok: ShareDistribution =
            serde_json::from_str(r#"[{"label":"a","quantity":1.5}]"#).unwrap();
        assert_eq!(ok.total(), 1.5);
        let bad = serde_json::from_str::<ShareDistribution>(r#"[{"label":"a","quantity":0}]"#);
        assert!(bad.is_err());
    }
}
