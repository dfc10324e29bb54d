//! Two-sample t-tests between rotation-augmented and non-augmented models.
//!
//! The p-value comes from the Student-t survival function, evaluated through
//! the regularized incomplete beta function:
//!
//! ```text
//! P(T > t) = I_x(df/2, 1/2) / 2,   x = df / (df + t^2),   t >= 0
//! ```
//!
//! `I_x` uses the classic continued fraction (modified Lentz), switching to
//! `1 - I_{1-x}(b, a)` past `x = (a + 1) / (a + b + 2)` where the fraction
//! converges slowly. `1 - x` is passed in separately so small `t` does not
//! lose digits to cancellation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{compensated_sum, Metric};
use crate::protocol::ModelAggregate;
use crate::store::ModelManifest;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestVariant {
    /// Pooled variance, `df = n1 + n2 - 2`.
    #[default]
    Student,
    /// Unpooled variance, Welch-Satterthwaite `df`.
    Welch,
}

impl FromStr for TTestVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "student" => Ok(TTestVariant::Student),
            "welch" => Ok(TTestVariant::Welch),
            _ => Err(Error::Domain(format!("unknown t-test variant {s:?}"))),
        }
    }
}

impl fmt::Display for TTestVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TTestVariant::Student => "student",
            TTestVariant::Welch => "welch",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub variant: TTestVariant,
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value_two_tailed: f64,
    pub group_sizes: (usize, usize),
    pub group_means: (f64, f64),
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)` for `z > 0`.
pub fn ln_gamma(z: f64) -> f64 {
    if z < 0.5 {
        // reflection: Γ(z) Γ(1 - z) = π / sin(π z)
        let pi = std::f64::consts::PI;
        return (pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    const MAX_ITER: usize = 10_000;

    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `I_x(a, b)` given both `x` and `y = 1 - x`.
fn incomplete_beta_split(x: f64, y: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let front = (a * x.ln() + b * y.ln() - ln_beta(a, b)).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, y) / b
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "beta parameters must be positive, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x must lie in [0, 1], got {x}")));
    }
    Ok(incomplete_beta_split(x, 1.0 - x, a, b))
}

/// One-sided survival function `P(T > t)` of Student's t with `df` degrees
/// of freedom (real-valued `df` allowed).
pub fn t_sf(t: f64, df: f64) -> Result<f64> {
    if df.is_nan() || df <= 0.0 {
        return Err(Error::Domain(format!("degrees of freedom must be positive, got {df}")));
    }
    if t.is_nan() {
        return Err(Error::Domain("t statistic is NaN".into()));
    }
    if t == 0.0 {
        return Ok(0.5);
    }
    let half = if t.is_infinite() {
        0.0
    } else {
        let t2 = t * t;
        let (x, y) = if df.is_infinite() {
            (1.0, 0.0)
        } else {
            (df / (df + t2), t2 / (df + t2))
        };
        0.5 * incomplete_beta_split(x, y, df / 2.0, 0.5)
    };
    Ok(if t > 0.0 { half } else { 1.0 - half })
}

/// Two-tailed `P(|T| > |t|)`.
pub fn t_two_tailed(t: f64, df: f64) -> Result<f64> {
    let upper = t_sf(t.abs(), df)?;
    Ok((2.0 * upper).clamp(0.0, 1.0))
}

fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values) / n;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, compensated_sum(&dev) / (n - 1.0))
}

/// Two-sample t-test of `a` against `b`; positive `t` means `a`'s mean is larger.
pub fn two_sample_ttest(a: &[f64], b: &[f64], variant: TTestVariant) -> Result<TTestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Domain(format!(
            "each group needs at least 2 values, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if let Some(v) = a.iter().chain(b).find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite sample value {v}")));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (m1, v1) = mean_var(a);
    let (m2, v2) = mean_var(b);
    let diff = m1 - m2;

    let pooled_df = n1 + n2 - 2.0;
    let (se, df) = match variant {
        TTestVariant::Student => {
            let pooled = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / pooled_df;
            ((pooled * (1.0 / n1 + 1.0 / n2)).sqrt(), pooled_df)
        }
        TTestVariant::Welch => {
            let (s1, s2) = (v1 / n1, v2 / n2);
            let se2 = s1 + s2;
            let df = if se2 > 0.0 {
                se2 * se2 / (s1 * s1 / (n1 - 1.0) + s2 * s2 / (n2 - 1.0))
            } else {
                pooled_df
            };
            (se2.sqrt(), df)
        }
    };

    let t = if se > 0.0 {
        diff / se
    } else if diff != 0.0 {
        diff.signum() * f64::INFINITY
    } else {
        return Err(Error::Degenerate(
            "both groups have zero variance and equal means".into(),
        ));
    };
    let p = t_two_tailed(t, df)?;
    Ok(TTestResult {
        variant,
        t_statistic: t,
        degrees_of_freedom: df,
        p_value_two_tailed: p,
        group_sizes: (a.len(), b.len()),
        group_means: (m1, m2),
    })
}

/// Model names and scores of one side of the comparison.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub models: Vec<String>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupSplit {
    pub augmented: Group,
    pub non_augmented: Group,
}

fn push(split: &mut GroupSplit, augmented: bool, model: &str, value: f64) {
    let g = if augmented {
        &mut split.augmented
    } else {
        &mut split.non_augmented
    };
    g.models.push(model.to_string());
    g.values.push(value);
}

fn check_nonempty(split: GroupSplit) -> Result<GroupSplit> {
    if split.augmented.values.is_empty() || split.non_augmented.values.is_empty() {
        return Err(Error::Grouping(format!(
            "need models on both sides of the augmentation split, got {} augmented and {} not",
            split.augmented.values.len(),
            split.non_augmented.values.len()
        )));
    }
    Ok(split)
}

/// Like [`split_groups`] but allows an empty side.
pub fn partition_groups(manifest: &ModelManifest, aggregates: &[ModelAggregate], metric: Metric) -> Result<GroupSplit> {
    let mut split = GroupSplit::default();
    for agg in aggregates {
        let entry = manifest
            .entry(&agg.model)
            .ok_or_else(|| Error::Grouping(format!("model {} is not in the manifest", agg.model)))?;
        push(&mut split, entry.rotation_augmented, &agg.model, metric.mean_of(agg));
    }
    Ok(split)
}

/// Partitions per-model means by the manifest's augmentation flag.
pub fn split_groups(manifest: &ModelManifest, aggregates: &[ModelAggregate], metric: Metric) -> Result<GroupSplit> {
    check_nonempty(partition_groups(manifest, aggregates, metric)?)
}

/// Partitions using the flag carried on each aggregate row; either side may be empty.
pub fn partition_by_flag(aggregates: &[ModelAggregate], metric: Metric) -> GroupSplit {
    let mut split = GroupSplit::default();
    for agg in aggregates {
        push(&mut split, agg.rotation_augmented, &agg.model, metric.mean_of(agg));
    }
    split
}

/// Summary of one group in the JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub n: usize,
    pub mean: Option<f64>,
    pub models: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupsSummary {
    pub augmented: GroupSummary,
    pub non_augmented: GroupSummary,
}

/// `{metric, variant, t, df, p, groups}`; the numeric fields are null and
/// `error` is set when the test could not be run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTestReport {
    pub metric: Metric,
    pub variant: TTestVariant,
    pub t: Option<f64>,
    pub df: Option<f64>,
    pub p: Option<f64>,
    pub groups: GroupsSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn summary(g: &Group) -> GroupSummary {
    GroupSummary {
        n: g.values.len(),
        mean: (!g.values.is_empty()).then(|| compensated_sum(&g.values) / g.values.len() as f64),
        models: g.models.clone(),
    }
}

/// Runs the test on a split, recording failure in the report instead of
/// returning it.
pub fn ttest_report(split: &GroupSplit, metric: Metric, variant: TTestVariant) -> TTestReport {
    let groups = GroupsSummary {
        augmented: summary(&split.augmented),
        non_augmented: summary(&split.non_augmented),
    };
    match two_sample_ttest(&split.augmented.values, &split.non_augmented.values, variant) {
        Ok(r) => TTestReport {
            metric,
            variant,
            t: Some(r.t_statistic),
            df: Some(r.degrees_of_freedom),
            p: Some(r.p_value_two_tailed),
            groups,
            error: None,
        },
        Err(e) => TTestReport {
            metric,
            variant,
            t: None,
            df: None,
            p: None,
            groups,
            error: Some(e.to_string()),
        },
    }
}
