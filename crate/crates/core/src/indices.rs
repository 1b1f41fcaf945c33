//! Inequality and diversity indices over a [`ShareDistribution`].
//!
//! All logarithms are natural. Every function is pure; the distribution
//! type already guarantees nonnegative quantities with a positive total.

use std::f64::consts::LN_2;
use std::fmt;

use serde::Serialize;

use crate::distribution::{align, ShareDistribution};
use crate::error::{Error, Result};

fn sorted_quantities(d: &ShareDistribution) -> Vec<f64> {
    let mut xs: Vec<f64> = d.quantities().collect();
    xs.sort_by(f64::total_cmp);
    xs
}

/// Gini index from the empirical mean difference
/// `Σᵢ Σⱼ |xᵢ − xⱼ| / (2n²μ)`.
///
/// The double sum is evaluated in O(n log n) through the sorted-rank
/// identity `Σᵢ Σⱼ |xᵢ − xⱼ| = 2 Σₖ (2k − n − 1) x₍ₖ₎`.
pub fn gini(d: &ShareDistribution) -> f64 {
    let xs = sorted_quantities(d);
    let n = xs.len() as f64;
    let total: f64 = xs.iter().sum();
    let weighted: f64 = xs
        .iter()
        .enumerate()
        .map(|(k, x)| (2.0 * (k as f64 + 1.0) - n - 1.0) * x)
        .sum();
    (weighted / (n * total)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LorenzPoint {
    /// Cumulative fraction of entities.
    pub population: f64,
    /// Cumulative fraction of the total quantity they hold.
    pub resource: f64,
}

/// Empirical Lorenz curve: `(0,0)`, then one point per entity in ascending
/// order of quantity, ending at `(1,1)`.
pub fn lorenz_points(d: &ShareDistribution) -> Vec<LorenzPoint> {
    let xs = sorted_quantities(d);
    let n = xs.len();
    let total: f64 = xs.iter().sum();
    let mut points = Vec::with_capacity(n + 1);
    points.push(LorenzPoint {
        population: 0.0,
        resource: 0.0,
    });
    let mut cum = 0.0;
    for (k, x) in xs.iter().enumerate() {
        cum += x;
        let population = (k + 1) as f64 / n as f64;
        let resource = if k + 1 == n {
            1.0
        } else {
            (cum / total).min(population)
        };
        points.push(LorenzPoint {
            population,
            resource,
        });
    }
    points
}

/// Gini index as `1 − 2∫L(x)dx`, integrating the Lorenz polyline with the
/// trapezoid rule.
pub fn gini_from_lorenz(d: &ShareDistribution) -> f64 {
    let area: f64 = lorenz_points(d)
        .windows(2)
        .map(|w| (w[1].population - w[0].population) * (w[0].resource + w[1].resource) / 2.0)
        .sum();
    (1.0 - 2.0 * area).clamp(0.0, 1.0)
}

/// Herfindahl–Hirschman index rescaled to `(0, 1]` (the percentage-share HHI
/// divided by 10⁴), i.e. `Σ qᵢ²`.
pub fn hhi(d: &ShareDistribution) -> f64 {
    d.proportions().iter().map(|q| q * q).sum()
}

/// Market concentration bands on the unscaled HHI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HhiClass {
    /// HHI < 1,500.
    Unconcentrated,
    /// 1,500 ≤ HHI ≤ 2,500.
    ModeratelyConcentrated,
    /// HHI > 2,500.
    HighlyConcentrated,
}

impl HhiClass {
    pub fn as_str(self) -> &'static str {
        match self {
            HhiClass::Unconcentrated => "unconcentrated",
            HhiClass::ModeratelyConcentrated => "moderately-concentrated",
            HhiClass::HighlyConcentrated => "highly-concentrated",
        }
    }
}

impl fmt::Display for HhiClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies a rescaled HHI `θ ∈ (0, 1]`.
pub fn hhi_classify(theta: f64) -> Result<HhiClass> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::invalid_argument(format!(
            "rescaled HHI must lie in (0, 1], got {theta}"
        )));
    }
    let unscaled = theta * 1e4;
    Ok(if unscaled < 1500.0 {
        HhiClass::Unconcentrated
    } else if unscaled <= 2500.0 {
        HhiClass::ModeratelyConcentrated
    } else {
        HhiClass::HighlyConcentrated
    })
}

/// Shannon index `−Σ qᵢ ln qᵢ`, with `0 · ln 0 = 0`.
pub fn shannon(d: &ShareDistribution) -> f64 {
    -d.proportions()
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|q| q * q.ln())
        .sum::<f64>()
}

/// Shannon index divided by its maximum `ln n`: 1 when perfectly even,
/// 0 when one entity holds everything.
pub fn shannon_normalized(d: &ShareDistribution) -> Result<f64> {
    let n = d.len();
    if n < 2 {
        return Err(Error::invalid_argument(
            "normalized Shannon index needs at least 2 categories",
        ));
    }
    Ok((shannon(d) / (n as f64).ln()).clamp(0.0, 1.0))
}

/// Inequality aversion for the Atkinson index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtkinsonParams {
    epsilon: f64,
}

impl AtkinsonParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::invalid_argument(format!(
                "inequality aversion must be positive, got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(self) -> f64 {
        self.epsilon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtkinsonIndex {
    pub value: f64,
    /// Set when a zero quantity met `ε ≥ 1`; the index is then 1.0 by the
    /// limit of the power mean.
    pub zero_limit: bool,
}

/// Atkinson index.
///
/// `ε ≠ 1`: `1 − (mean((yᵢ/μ)^(1−ε)))^(1/(1−ε))`.
/// `ε = 1`: `1 − geomean(y)/μ`.
pub fn atkinson(d: &ShareDistribution, params: AtkinsonParams) -> AtkinsonIndex {
    let eps = params.epsilon;
    let n = d.len() as f64;
    let mean = d.total() / n;
    if eps >= 1.0 && d.quantities().any(|y| y == 0.0) {
        return AtkinsonIndex {
            value: 1.0,
            zero_limit: true,
        };
    }
    let value = if eps == 1.0 {
        let log_geomean = d.quantities().map(f64::ln).sum::<f64>() / n;
        1.0 - log_geomean.exp() / mean
    } else {
        let power = 1.0 - eps;
        let power_mean = d.quantities().map(|y| (y / mean).powf(power)).sum::<f64>() / n;
        1.0 - power_mean.powf(1.0 / power)
    };
    AtkinsonIndex {
        value: value.clamp(0.0, 1.0),
        zero_limit: false,
    }
}

/// Scales the inequality aversion down by the share `omega` of the dominant
/// entity: `base · (1 − ω)`.
pub fn adjusted_aversion(base: f64, omega: f64) -> Result<f64> {
    if !(base.is_finite() && base > 0.0) {
        return Err(Error::invalid_argument(format!(
            "base aversion must be positive, got {base}"
        )));
    }
    if !(0.0..1.0).contains(&omega) {
        return Err(Error::invalid_argument(format!(
            "weighting must lie in [0, 1), got {omega}"
        )));
    }
    Ok(base * (1.0 - omega))
}

/// Percentile by linear interpolation on rank `i = p(N+1)/100`.
///
/// Ranks below 1 or above N clamp to the smallest or largest value.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid_argument("percentile of an empty sample"));
    }
    if !(p > 0.0 && p < 100.0) {
        return Err(Error::invalid_argument(format!(
            "percentile must lie in (0, 100), got {p}"
        )));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let rank = p * (n as f64 + 1.0) / 100.0;
    if rank <= 1.0 {
        return Ok(v[0]);
    }
    if rank >= n as f64 {
        return Ok(v[n - 1]);
    }
    // 1-based rank into 0-based storage.
    let lower = rank.floor();
    let frac = rank - lower;
    let lo = v[lower as usize - 1];
    if frac == 0.0 {
        return Ok(lo);
    }
    let hi = v[lower as usize];
    Ok(lo + (hi - lo) * frac)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRatios {
    /// Top 10% of entities' holdings over the bottom 40%'s.
    pub palma: Option<f64>,
    pub p90_p10: Option<f64>,
    pub p50_p10: Option<f64>,
}

/// Sum of the first `count` values, taking a fractional share of the
/// boundary value.
fn prorated_sum(sorted: &[f64], count: f64) -> f64 {
    let whole = (count.floor() as usize).min(sorted.len());
    let mut sum: f64 = sorted[..whole].iter().sum();
    let frac = count - whole as f64;
    if frac > 0.0 && whole < sorted.len() {
        sum += frac * sorted[whole];
    }
    sum
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// Palma, P90:P10 and P50:P10 ratios. A ratio whose denominator is zero is
/// reported as `None`.
pub fn tail_ratios(d: &ShareDistribution) -> TailRatios {
    let asc = sorted_quantities(d);
    let n = asc.len() as f64;
    let desc: Vec<f64> = asc.iter().rev().copied().collect();
    let top = prorated_sum(&desc, 0.1 * n);
    let bottom = prorated_sum(&asc, 0.4 * n);
    let pct = |p| percentile(&asc, p).expect("nonempty, p in range");
    let p10 = pct(10.0);
    TailRatios {
        palma: ratio(top, bottom),
        p90_p10: ratio(pct(90.0), p10),
        p50_p10: ratio(pct(50.0), p10),
    }
}

fn check_proportions(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::invalid_argument(format!(
            "{name} must contain finite nonnegative proportions"
        )));
    }
    Ok(())
}

/// Kullback–Leibler divergence `Σ p ln(p/q)`, with `0 · ln(0/q) = 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid_argument(format!(
            "KL divergence needs equal lengths, got {} and {}",
            p.len(),
            q.len()
        )));
    }
    check_proportions("p", p)?;
    check_proportions("q", q)?;
    let mut sum = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::invalid_argument(format!(
                "q(i) = 0 where p(i) > 0 at index {i}"
            )));
        }
        sum += pi * (pi / qi).ln();
    }
    Ok(sum.max(0.0))
}

/// Jensen–Shannon divergence of two aligned proportion vectors, divided by
/// its upper bound `ln 2`.
pub fn jsd_vectors(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid_argument(format!(
            "JSD needs equal lengths, got {} and {}",
            p.len(),
            q.len()
        )));
    }
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    let raw = 0.5 * kl_divergence(p, &m)? + 0.5 * kl_divergence(q, &m)?;
    Ok((raw / LN_2).clamp(0.0, 1.0))
}

/// Normalized Jensen–Shannon divergence after aligning both distributions
/// on the union of their labels.
pub fn jsd_normalized(p: &ShareDistribution, q: &ShareDistribution) -> f64 {
    let (pv, qv) = align(p, q);
    jsd_vectors(&pv, &qv).expect("aligned proportion vectors satisfy the KL support condition")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(q: &[f64]) -> ShareDistribution {
        ShareDistribution::from_quantities(q).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Direct double sum, independent of the sorted-rank identity.
    fn gini_oracle(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let mut s = 0.0;
        for a in xs {
            for b in xs {
                s += (a - b).abs();
            }
        }
        s / (2.0 * n * n * mean)
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&d(&[1.0, 1.0, 1.0, 1.0])), 0.0);
        assert!(close(gini_oracle(&[1.0, 0.0, 0.0, 0.0]), 0.75, 1e-15));
        assert!(close(gini(&d(&[1.0, 0.0, 0.0, 0.0])), 0.75, 1e-12));
        assert!(close(gini_oracle(&[1.0, 1.0, 0.0, 0.0]), 0.5, 1e-15));
        assert!(close(gini(&d(&[1.0, 1.0, 0.0, 0.0])), 0.5, 1e-12));
    }

    #[test]
    fn gini_matches_double_sum_oracle() {
        let xs = [3.0, 0.0, 7.5, 1.25, 9.0, 9.0, 0.5];
        assert!(close(gini(&d(&xs)), gini_oracle(&xs), 1e-12));
    }

    #[test]
    fn lorenz_examples() {
        let pts = |q: &[f64]| -> Vec<(f64, f64)> {
            lorenz_points(&d(q))
                .into_iter()
                .map(|p| (p.population, p.resource))
                .collect()
        };
        assert_eq!(pts(&[1.0, 1.0]), [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]);
        assert_eq!(pts(&[1.0, 3.0]), [(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)]);
        assert_eq!(
            pts(&[1.0, 0.0, 0.0, 0.0]),
            [(0.0, 0.0), (0.25, 0.0), (0.5, 0.0), (0.75, 0.0), (1.0, 1.0)]
        );
    }

    #[test]
    fn gini_from_lorenz_examples() {
        assert!(close(gini_from_lorenz(&d(&[1.0; 4])), 0.0, 1e-12));
        assert!(close(gini_from_lorenz(&d(&[1.0, 1.0, 0.0, 0.0])), 0.5, 1e-12));
    }

    #[test]
    fn hhi_examples() {
        assert_eq!(hhi(&d(&[1.0])), 1.0);
        // 2 · 50² / 10⁴
        assert!(close(hhi(&d(&[1.0, 1.0])), 2.0 * 50.0f64.powi(2) / 1e4, 1e-15));
        assert_eq!(hhi(&d(&[1.0; 4])), 0.25);
    }

    #[test]
    fn hhi_bands() {
        use HhiClass::*;
        assert_eq!(hhi_classify(0.1).unwrap(), Unconcentrated);
        assert_eq!(hhi_classify(0.2).unwrap(), ModeratelyConcentrated);
        assert_eq!(hhi_classify(0.45).unwrap(), HighlyConcentrated);
        assert_eq!(hhi_classify(0.15).unwrap(), ModeratelyConcentrated);
        assert_eq!(hhi_classify(0.25).unwrap(), ModeratelyConcentrated);
        assert_eq!(hhi_classify(1.0).unwrap(), HighlyConcentrated);
        for bad in [0.0, -0.1, 1.01, f64::NAN] {
            assert!(hhi_classify(bad).is_err());
        }
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon(&d(&[1.0])), 0.0);
        assert!(close(shannon(&d(&[1.0; 4])), 4.0f64.ln(), 1e-12));
        assert!(close(shannon(&d(&[0.5, 0.25, 0.25])), 1.039721, 1e-6));
        assert!(close(shannon_normalized(&d(&[1.0; 4])).unwrap(), 1.0, 1e-12));
        assert_eq!(shannon_normalized(&d(&[1.0, 0.0])).unwrap(), 0.0);
        assert!(close(
            shannon_normalized(&d(&[0.5, 0.25, 0.25])).unwrap(),
            0.946395,
            1e-6
        ));
        assert!(shannon_normalized(&d(&[3.0])).is_err());
    }

    #[test]
    fn atkinson_examples() {
        let p = |e| AtkinsonParams::new(e).unwrap();
        assert_eq!(atkinson(&d(&[5.0; 4]), p(0.5)).value, 0.0);
        let a = atkinson(&d(&[2.0, 2.0, 8.0, 8.0]), p(1.0));
        assert!(close(a.value, 1.0 - 4.0 / 5.0, 1e-12));
        assert!(!a.zero_limit);
        let m = atkinson(&d(&[1.0, 0.0, 0.0, 0.0]), p(1.0));
        assert_eq!(m, AtkinsonIndex { value: 1.0, zero_limit: true });
        let m = atkinson(&d(&[1.0, 0.0, 0.0, 0.0]), p(2.0));
        assert!(m.zero_limit);
        // ε < 1 handles zeros through the power form: 1 − (¼·4^½)² = 0.75
        let m = atkinson(&d(&[1.0, 0.0, 0.0, 0.0]), p(0.5));
        assert!(close(m.value, 0.75, 1e-12));
        assert!(!m.zero_limit);
        assert!(AtkinsonParams::new(0.0).is_err());
        assert!(AtkinsonParams::new(-1.0).is_err());
    }

    #[test]
    fn atkinson_epsilon_two_closed_form() {
        // ε = 2 is one minus harmonic mean over arithmetic mean.
        let ys = [1.0, 2.0, 4.0];
        let hm = 3.0 / (1.0 + 0.5 + 0.25);
        let am = 7.0 / 3.0;
        let a = atkinson(&d(&ys), AtkinsonParams::new(2.0).unwrap());
        assert!(close(a.value, 1.0 - hm / am, 1e-12));
    }

    #[test]
    fn adjusted_aversion_examples() {
        assert!(close(adjusted_aversion(0.5, 0.3).unwrap(), 0.35, 1e-12));
        assert_eq!(adjusted_aversion(0.5, 0.0).unwrap(), 0.5);
        assert_eq!(adjusted_aversion(1.0, 0.5).unwrap(), 0.5);
        assert!(adjusted_aversion(0.5, 1.0).is_err());
        assert!(adjusted_aversion(0.0, 0.2).is_err());
    }

    #[test]
    fn percentile_examples() {
        assert_eq!(percentile(&[10.0, 20.0, 30.0, 40.0], 50.0).unwrap(), 25.0);
        assert_eq!(percentile(&[10.0, 20.0, 30.0], 50.0).unwrap(), 20.0);
        assert_eq!(percentile(&[7.0], 90.0).unwrap(), 7.0);
        assert_eq!(percentile(&[40.0, 10.0, 30.0, 20.0], 50.0).unwrap(), 25.0);
        assert_eq!(percentile(&[1.0, 2.0, 3.0], 5.0).unwrap(), 1.0);
        assert_eq!(percentile(&[1.0, 2.0, 3.0], 99.0).unwrap(), 3.0);
        assert!(percentile(&[], 50.0).is_err());
        assert!(percentile(&[1.0], 100.0).is_err());
    }

    /// Entity-by-entity accumulation with explicit fractional boundary.
    fn palma_oracle(xs: &[f64]) -> f64 {
        let mut asc = xs.to_vec();
        asc.sort_by(f64::total_cmp);
        let n = asc.len() as f64;
        let share = |vals: &[f64], count: f64| {
            let mut left = count;
            let mut s = 0.0;
            for v in vals {
                let take = left.min(1.0);
                if take <= 0.0 {
                    break;
                }
                s += take * v;
                left -= take;
            }
            s
        };
        let desc: Vec<f64> = asc.iter().rev().copied().collect();
        share(&desc, 0.1 * n) / share(&asc, 0.4 * n)
    }

    #[test]
    fn tail_ratio_examples() {
        let t = tail_ratios(&d(&[1.0; 10]));
        assert!(close(t.palma.unwrap(), 0.25, 1e-12));
        assert_eq!(t.p90_p10, Some(1.0));

        let t = tail_ratios(&d(&[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(t.p90_p10, None);
        assert_eq!(t.p50_p10, None);
        assert_eq!(t.palma, None);

        let ten: Vec<f64> = (1..=10).map(f64::from).collect();
        let t = tail_ratios(&d(&ten));
        assert!(close(t.palma.unwrap(), 10.0 / (1.0 + 2.0 + 3.0 + 4.0), 1e-12));
        assert!(close(t.palma.unwrap(), palma_oracle(&ten), 1e-12));
    }

    #[test]
    fn palma_prorates_boundary_entities() {
        let xs = [1.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0];
        let t = tail_ratios(&d(&xs));
        // top 0.7 of 21, bottom 2.8 entities: 1 + 2 + 0.8·3
        assert!(close(t.palma.unwrap(), 0.7 * 21.0 / (1.0 + 2.0 + 0.8 * 3.0), 1e-12));
        assert!(close(t.palma.unwrap(), palma_oracle(&xs), 1e-12));
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!(close(
            kl_divergence(&[1.0, 0.0], &[0.75, 0.25]).unwrap(),
            0.287682,
            1e-6
        ));
        assert!(close(
            kl_divergence(&[0.5, 0.5], &[0.75, 0.25]).unwrap(),
            0.143841,
            1e-6
        ));
        assert!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).is_err());
        assert!(kl_divergence(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn jsd_examples() {
        let p = d(&[3.0, 1.0]);
        assert_eq!(jsd_normalized(&p, &p), 0.0);
        let a = ShareDistribution::new([("a", 1.0)]).unwrap();
        let b = ShareDistribution::new([("b", 1.0)]).unwrap();
        assert!(close(jsd_normalized(&a, &b), 1.0, 1e-12));
        let hand = jsd_normalized(&d(&[1.0, 0.0]), &d(&[0.5, 0.5]));
        assert!(close(hand, 0.311278, 1e-6));
    }
}
