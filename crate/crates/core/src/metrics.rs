//! Windowed weighted publication rates and the inequality statistics built
//! on them: Gini index, Lotka inverse-square tables and relative percentage
//! difference.
//!
//! Everything except [`rate_summary`] is generic over [`Scalar`], so the same
//! code yields exact rationals (e.g. a Gini of exactly `11/12`) or floats.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::records::{AuthorKey, AuthorProfile, Corpus};
use crate::scalar::{RealScalar, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("empty input")]
    EmptyInput,
    #[error("negative value at index {0}")]
    NegativeValue(usize),
    #[error("value at index {0} is not comparable (NaN?)")]
    NotComparable(usize),
    #[error("RPD undefined: both inputs are zero")]
    UndefinedRpd,
    #[error("invalid window spec: {0}")]
    InvalidWindow(String),
}

/// Consecutive overlapping windows `[y, y + length - 1]` for
/// `y in start_year..=end_year - length + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WindowSpec {
    pub start_year: i32,
    pub end_year: i32,
    pub length: u32,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            start_year: 2010,
            end_year: 2024,
            length: 4,
        }
    }
}

impl WindowSpec {
    pub fn new(start_year: i32, end_year: i32, length: u32) -> Result<Self, MetricsError> {
        if length == 0 {
            return Err(MetricsError::InvalidWindow("length must be >= 1".into()));
        }
        if i64::from(end_year) - i64::from(start_year) + 1 < i64::from(length) {
            return Err(MetricsError::InvalidWindow(format!(
                "{start_year}-{end_year} is shorter than one {length}-year window"
            )));
        }
        Ok(Self {
            start_year,
            end_year,
            length,
        })
    }

    pub fn count(&self) -> usize {
        (self.end_year - self.start_year + 2 - self.length as i32).max(0) as usize
    }

    /// Window start years in order.
    pub fn starts(&self) -> impl Iterator<Item = i32> {
        let last = self.end_year - self.length as i32 + 1;
        self.start_year..=last
    }

    pub fn label(&self, start: i32) -> String {
        format!("{}-{}", start, start + self.length as i32 - 1)
    }
}

/// Weighted publication rate of one window.
///
/// `T / (P + (P/2)(n - 1))` where `T` is the window's publication total and
/// `n` the longest run of consecutive publishing years inside the window;
/// zero when nothing was published. With `P = 4` this is `T / (4 + 2(n - 1))`.
pub fn window_rate<T: Scalar>(year_counts: &BTreeMap<i32, u32>, start: i32, length: u32) -> T {
    let mut total = 0u64;
    let mut run = 0u64;
    let mut longest = 0u64;
    for year in start..start + length as i32 {
        let c = year_counts.get(&year).copied().unwrap_or(0);
        total += u64::from(c);
        if c > 0 {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    if longest == 0 {
        return T::zero();
    }
    // P + (P/2)(n-1) == P(n+1)/2
    let denom = T::from_count(u64::from(length)) * T::from_count(longest + 1) / T::from_count(2);
    T::from_count(total) / denom
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowRateSeries<T> {
    pub author: AuthorKey,
    pub rates: Vec<T>,
    pub window_spec: WindowSpec,
}

pub fn rate_series<T: Scalar>(profile: &AuthorProfile, spec: &WindowSpec) -> WindowRateSeries<T> {
    WindowRateSeries {
        author: profile.key.clone(),
        rates: spec
            .starts()
            .map(|s| window_rate(&profile.year_counts, s, spec.length))
            .collect(),
        window_spec: *spec,
    }
}

fn validate<T: Scalar>(values: &[T]) -> Result<(), MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    for (i, v) in values.iter().enumerate() {
        if !v.is_comparable() {
            return Err(MetricsError::NotComparable(i));
        }
        if v.is_negative() {
            return Err(MetricsError::NegativeValue(i));
        }
    }
    Ok(())
}

/// Gini index of a non-negative sample, via the sorted form
/// `Σ (2i - m - 1) x_(i) / (m Σx)` of the mean absolute difference.
/// An all-zero sample has Gini 0.
pub fn gini<T: Scalar>(values: &[T]) -> Result<T, MetricsError> {
    validate(values)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("validated"));
    let m = sorted.len() as u64;
    let total = sorted.iter().fold(T::zero(), |acc, &x| acc + x);
    if total == T::zero() {
        return Ok(T::zero());
    }
    let mut weighted = T::zero();
    for (i, &x) in sorted.iter().enumerate() {
        // (2i - m - 1) with 1-based i; split by sign to stay in unsigned counts
        let rank = 2 * (i as u64 + 1);
        if rank > m {
            weighted = weighted + T::from_count(rank - m - 1) * x;
        } else {
            weighted = weighted - T::from_count(m + 1 - rank) * x;
        }
    }
    Ok(weighted / (T::from_count(m) * total))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GiniLevel {
    Author,
    Conference,
    Group,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GiniBasis {
    /// Every author-window rate as one sample.
    #[default]
    Pooled,
    /// One sample per author: the mean of that author's window rates.
    PerAuthorMean,
}

impl GiniBasis {
    pub fn description(&self) -> &'static str {
        match self {
            GiniBasis::Pooled => "pooled author-window R values",
            GiniBasis::PerAuthorMean => "per-author mean R values",
        }
    }
}

impl fmt::Display for GiniBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GiniBasis::Pooled => "pooled",
            GiniBasis::PerAuthorMean => "per-author-mean",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GiniResult<T> {
    pub value: T,
    pub level: GiniLevel,
    pub population_size: usize,
    pub basis: String,
}

pub fn author_gini<T: Scalar>(
    profile: &AuthorProfile,
    spec: &WindowSpec,
) -> Result<GiniResult<T>, MetricsError> {
    let series = rate_series::<T>(profile, spec);
    Ok(GiniResult {
        value: gini(&series.rates)?,
        level: GiniLevel::Author,
        population_size: series.rates.len(),
        basis: "author window R values".into(),
    })
}

/// Gini over a set of authors, shared by the conference and group levels.
pub fn profiles_gini<'a, T, I>(
    profiles: I,
    spec: &WindowSpec,
    basis: GiniBasis,
    level: GiniLevel,
) -> Result<GiniResult<T>, MetricsError>
where
    T: Scalar,
    I: IntoIterator<Item = &'a AuthorProfile>,
{
    let mut values = Vec::new();
    let mut authors = 0usize;
    for profile in profiles {
        authors += 1;
        let series = rate_series::<T>(profile, spec);
        match basis {
            GiniBasis::Pooled => values.extend(series.rates),
            GiniBasis::PerAuthorMean => {
                let sum = series.rates.iter().fold(T::zero(), |acc, &x| acc + x);
                values.push(sum / T::from_count(series.rates.len() as u64));
            }
        }
    }
    if authors == 0 {
        return Err(MetricsError::EmptyInput);
    }
    Ok(GiniResult {
        population_size: values.len(),
        value: gini(&values)?,
        level,
        basis: basis.description().into(),
    })
}

pub fn conference_gini<T: Scalar>(
    corpus: &Corpus,
    spec: &WindowSpec,
    basis: GiniBasis,
) -> Result<GiniResult<T>, MetricsError> {
    profiles_gini(corpus.authors.values(), spec, basis, GiniLevel::Conference)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SummaryMode {
    #[default]
    All,
    Nonzero,
}

impl fmt::Display for SummaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SummaryMode::All => "all",
            SummaryMode::Nonzero => "nonzero",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSummary<T> {
    pub mean: T,
    /// Population standard deviation.
    pub std_dev: T,
    pub count: usize,
}

pub fn mean_std<T: RealScalar>(values: &[T]) -> Result<RateSummary<T>, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = T::from_count(values.len() as u64);
    let mean = values.iter().fold(T::zero(), |acc, &x| acc + x) / n;
    let var = values
        .iter()
        .fold(T::zero(), |acc, &x| acc + (x - mean) * (x - mean))
        / n;
    Ok(RateSummary {
        mean,
        std_dev: var.sqrt(),
        count: values.len(),
    })
}

/// Mean and population standard deviation of the pooled author-window rates.
pub fn rate_summary<T: RealScalar>(
    corpus: &Corpus,
    spec: &WindowSpec,
    mode: SummaryMode,
) -> Result<RateSummary<T>, MetricsError> {
    let values: Vec<T> = corpus
        .authors
        .values()
        .flat_map(|p| rate_series::<T>(p, spec).rates)
        .filter(|&r| mode == SummaryMode::All || r > T::zero())
        .collect();
    mean_std(&values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LotkaRow<T> {
    pub papers: u32,
    pub observed: u64,
    pub expected: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LotkaTable<T> {
    pub year: i32,
    pub rows: Vec<LotkaRow<T>>,
}

/// Inverse-square Lotka table from per-author paper counts for one year.
/// Authors with zero papers are ignored; rows exist only for observed counts.
pub fn lotka_from_counts<T: Scalar>(
    year: i32,
    counts: impl IntoIterator<Item = u32>,
) -> LotkaTable<T> {
    let mut observed: BTreeMap<u32, u64> = BTreeMap::new();
    for c in counts.into_iter().filter(|&c| c > 0) {
        *observed.entry(c).or_default() += 1;
    }
    let singles = observed.get(&1).copied().unwrap_or(0);
    if singles == 0 {
        return LotkaTable {
            year,
            rows: Vec::new(),
        };
    }
    let c1 = T::from_count(singles);
    let rows = observed
        .into_iter()
        .map(|(k, n)| {
            let k64 = u64::from(k);
            LotkaRow {
                papers: k,
                observed: n,
                expected: c1 / T::from_count(k64 * k64),
            }
        })
        .collect();
    LotkaTable { year, rows }
}

pub fn lotka_table<T: Scalar>(corpus: &Corpus, year: i32) -> LotkaTable<T> {
    lotka_from_counts(year, corpus.authors.values().map(|p| p.count(year)))
}

/// Relative percentage difference `|a - b| / ((a + b) / 2) * 100`, in `[0, 200]`.
pub fn rpd<T: Scalar>(a: T, b: T) -> Result<T, MetricsError> {
    validate(&[a, b])?;
    let sum = a + b;
    if sum == T::zero() {
        return Err(MetricsError::UndefinedRpd);
    }
    Ok(a.abs_diff(b) * T::from_count(200) / sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::{build_corpus, ArticleRecord, AuthorEntry, CorpusOptions};
    use num_rational::Ratio;
    use proptest::prelude::*;

    type Q = Ratio<i64>;

    fn counts(pairs: &[(i32, u32)]) -> BTreeMap<i32, u32> {
        pairs.iter().copied().collect()
    }

    fn profile(pairs: &[(i32, u32)]) -> AuthorProfile {
        let mut year_counts: BTreeMap<i32, u32> = (2010..=2024).map(|y| (y, 0)).collect();
        year_counts.extend(pairs.iter().copied());
        AuthorProfile {
            key: AuthorKey {
                first: "a".into(),
                last: "b".into(),
            },
            display_name: "A B".into(),
            affiliations: vec![],
            latest_affiliation: String::new(),
            country: String::new(),
            year_counts,
            groups: Default::default(),
        }
    }

    // O(m^2) mean absolute difference
    fn gini_pairwise(xs: &[f64]) -> f64 {
        let m = xs.len() as f64;
        let total: f64 = xs.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut s = 0.0;
        for a in xs {
            for b in xs {
                s += (a - b).abs();
            }
        }
        s / (2.0 * m * m * (total / m))
    }

    #[test]
    fn window_spec_default_has_twelve() {
        let spec = WindowSpec::default();
        assert_eq!(spec.count(), 12);
        assert_eq!(spec.starts().collect::<Vec<_>>().len(), 12);
        assert_eq!(spec.label(2021), "2021-2024");
        assert!(WindowSpec::new(2010, 2012, 4).is_err());
        assert!(WindowSpec::new(2010, 2024, 0).is_err());
    }

    #[test]
    fn rate_examples() {
        assert_eq!(window_rate::<f64>(&counts(&[(2013, 1)]), 2010, 4), 0.25);
        assert_eq!(window_rate::<f64>(&counts(&[]), 2010, 4), 0.0);
        let every = counts(&[(2010, 1), (2011, 1), (2012, 1), (2013, 1)]);
        assert_eq!(window_rate::<Q>(&every, 2010, 4), Q::new(2, 5));
        assert!((window_rate::<f64>(&every, 2010, 4) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn rate_uses_longest_run() {
        // 2010, 2012, 2013 -> T=3, n=2
        let c = counts(&[(2010, 1), (2012, 1), (2013, 1)]);
        assert_eq!(window_rate::<Q>(&c, 2010, 4), Q::new(3, 6));
    }

    #[test]
    fn odd_window_length_keeps_half_step() {
        // P=3, n=3 -> 3 + 1.5*2 = 6
        let c = counts(&[(2010, 2), (2011, 2), (2012, 2)]);
        assert_eq!(window_rate::<Q>(&c, 2010, 3), Q::new(1, 1));
    }

    #[test]
    fn series_examples() {
        let spec = WindowSpec::default();
        let s = rate_series::<f64>(&profile(&[(2010, 1)]), &spec);
        assert_eq!(s.rates[0], 0.25);
        assert!(s.rates[1..].iter().all(|&r| r == 0.0));
        let s = rate_series::<f64>(&profile(&[(2013, 1)]), &spec);
        assert_eq!(s.rates.iter().filter(|&&r| r == 0.25).count(), 4);
        assert_eq!(&s.rates[..4], &[0.25; 4]);
        let s = rate_series::<f64>(&profile(&[]), &spec);
        assert!(s.rates.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.0);
        let mut v = vec![Q::from_integer(0); 12];
        v[3] = Q::new(1, 4);
        assert_eq!(gini(&v).unwrap(), Q::new(11, 12));
        assert_eq!(gini(&[0.0, 1.0]).unwrap(), 0.5);
        assert_eq!(gini(&[0.0f64, 0.0]).unwrap(), 0.0);
        assert_eq!(gini(&[5.0f32]).unwrap(), 0.0);
    }

    #[test]
    fn gini_errors() {
        assert_eq!(gini::<f64>(&[]), Err(MetricsError::EmptyInput));
        assert_eq!(gini(&[1.0, -0.5]), Err(MetricsError::NegativeValue(1)));
        assert_eq!(gini(&[f64::NAN]), Err(MetricsError::NotComparable(0)));
    }

    #[test]
    fn author_gini_cohorts_exact() {
        let spec = WindowSpec::default();
        let g = |year| {
            author_gini::<Q>(&profile(&[(year, 1)]), &spec)
                .unwrap()
                .value
        };
        assert_eq!(g(2010), Q::new(11, 12));
        assert_eq!(g(2011), Q::new(10, 12));
        assert_eq!(g(2012), Q::new(9, 12));
        for y in 2013..=2021 {
            assert_eq!(g(y), Q::new(8, 12), "year {y}");
        }
        // trailing edge mirrors the leading one
        assert_eq!(g(2024), Q::new(11, 12));
    }

    fn corpus_of(profiles: &[&[(i32, u32)]]) -> Corpus {
        let mut arts = Vec::new();
        for (i, p) in profiles.iter().enumerate() {
            for &(year, n) in p.iter() {
                for j in 0..n {
                    arts.push(ArticleRecord {
                        article_id: format!("{i}-{year}-{j}"),
                        conference: "HRI".into(),
                        year,
                        title: String::new(),
                        abstract_text: String::new(),
                        authors: vec![AuthorEntry::new(&format!("A{i}"), "X", "", "")],
                    });
                }
            }
        }
        build_corpus(arts, "HRI", &CorpusOptions::default()).unwrap()
    }

    #[test]
    fn conference_gini_pools_identical_authors() {
        let spec = WindowSpec::default();
        let single = corpus_of(&[&[(2015, 1), (2016, 2)]]);
        let triple = corpus_of(&[
            &[(2015, 1), (2016, 2)],
            &[(2015, 1), (2016, 2)],
            &[(2015, 1), (2016, 2)],
        ]);
        let a: Q = author_gini(single.authors.values().next().unwrap(), &spec)
            .unwrap()
            .value;
        let c1: GiniResult<Q> = conference_gini(&single, &spec, GiniBasis::Pooled).unwrap();
        let c3: GiniResult<Q> = conference_gini(&triple, &spec, GiniBasis::Pooled).unwrap();
        assert_eq!(c1.value, a);
        assert_eq!(c3.value, a);
        assert_eq!(c3.population_size, 36);
        assert_eq!(c3.basis, "pooled author-window R values");
        let m: GiniResult<Q> = conference_gini(&triple, &spec, GiniBasis::PerAuthorMean).unwrap();
        assert_eq!(m.value, Q::from_integer(0));
        assert_eq!(m.population_size, 3);
    }

    #[test]
    fn summary_single_paper() {
        let corpus = corpus_of(&[&[(2013, 1)]]);
        let s: RateSummary<f64> =
            rate_summary(&corpus, &WindowSpec::default(), SummaryMode::All).unwrap();
        let expected_mean: f64 = 1.0 / 12.0;
        let var = (4.0 * (0.25 - expected_mean).powi(2) + 8.0 * expected_mean.powi(2)) / 12.0;
        assert!((s.mean - expected_mean).abs() < 1e-15);
        assert!((s.std_dev - var.sqrt()).abs() < 1e-15);
        let nz: RateSummary<f64> =
            rate_summary(&corpus, &WindowSpec::default(), SummaryMode::Nonzero).unwrap();
        assert_eq!(nz.mean, 0.25);
        assert_eq!(nz.std_dev, 0.0);
        assert_eq!(nz.count, 4);
    }

    #[test]
    fn summary_of_nothing_is_error() {
        let corpus = corpus_of(&[]);
        assert_eq!(
            rate_summary::<f64>(&corpus, &WindowSpec::default(), SummaryMode::All),
            Err(MetricsError::EmptyInput)
        );
    }

    #[test]
    fn lotka_examples() {
        let t: LotkaTable<f64> =
            lotka_from_counts(2010, std::iter::repeat_n(1, 111).chain([2; 13]).chain([3]));
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[0].expected, 111.0);
        assert_eq!(t.rows[1].expected, 27.75);
        assert_eq!(t.rows[1].observed, 13);
        assert!((t.rows[2].expected - 12.333).abs() < 5e-4);

        let t: LotkaTable<Q> = lotka_from_counts(2011, std::iter::repeat_n(1, 155).chain([4, 5]));
        assert_eq!(t.rows[1].expected, Q::new(155, 16));
        assert_eq!(t.rows[2].expected, Q::new(31, 5));

        let empty: LotkaTable<f64> = lotka_from_counts(2012, [0, 2, 3]);
        assert!(empty.rows.is_empty());
    }

    #[test]
    fn rpd_examples() {
        assert_eq!(rpd(0.5, 0.5).unwrap(), 0.0);
        assert!((rpd(0.5f64, 0.4).unwrap() - 22.2222).abs() < 1e-4);
        assert_eq!(rpd(Q::new(1, 2), Q::new(2, 5)).unwrap(), Q::new(200, 9));
        assert_eq!(rpd(0.0, 0.0), Err(MetricsError::UndefinedRpd));
        assert_eq!(rpd(0.3, 0.0).unwrap(), 200.0);
        assert_eq!(rpd(-1.0, 0.0), Err(MetricsError::NegativeValue(0)));
    }

    fn year_counts_strategy() -> impl Strategy<Value = BTreeMap<i32, u32>> {
        proptest::collection::btree_map(2010i32..=2024, 0u32..4, 0..10)
    }

    proptest! {
        #[test]
        fn gini_matches_pairwise(xs in proptest::collection::vec(0.0f64..100.0, 1..50)) {
            let fast = gini(&xs).unwrap();
            prop_assert!((fast - gini_pairwise(&xs)).abs() < 1e-12);
        }

        #[test]
        fn gini_bounds(xs in proptest::collection::vec(0u32..20, 1..30)) {
            let qs: Vec<Q> = xs.iter().map(|&x| Q::from_integer(x as i64)).collect();
            let g = gini(&qs).unwrap();
            let m = qs.len() as i64;
            prop_assert!(g >= Q::from_integer(0));
            prop_assert!(g <= Q::new(m - 1, m));
            let nonzero = xs.iter().filter(|&&x| x > 0).count();
            prop_assert_eq!(g == Q::new(m - 1, m) && m > 1, nonzero == 1 && m > 1);
        }

        #[test]
        fn gini_scale_invariant(xs in proptest::collection::vec(0u32..20, 1..30), c in 1i64..50) {
            let qs: Vec<Q> = xs.iter().map(|&x| Q::from_integer(x as i64)).collect();
            let scaled: Vec<Q> = qs.iter().map(|&x| x * Q::new(c, 7)).collect();
            prop_assert_eq!(gini(&qs).unwrap(), gini(&scaled).unwrap());
        }

        #[test]
        fn gini_translation_decreases(xs in proptest::collection::vec(0u32..20, 2..30), c in 1i64..10) {
            prop_assume!(xs.iter().any(|&x| x != xs[0]));
            let qs: Vec<Q> = xs.iter().map(|&x| Q::from_integer(x as i64)).collect();
            let shifted: Vec<Q> = qs.iter().map(|&x| x + Q::from_integer(c)).collect();
            prop_assert!(gini(&shifted).unwrap() < gini(&qs).unwrap());
        }

        #[test]
        fn rate_monotone_in_total(run in 1u32..=4, extra in 1u32..5) {
            // fixed n = run, increase T by adding to the first publishing year
            let mut c: BTreeMap<i32, u32> = (0..run as i32).map(|i| (2010 + i, 1)).collect();
            let base: Q = window_rate(&c, 2010, 4);
            *c.get_mut(&2010).unwrap() += extra;
            prop_assert!(window_rate::<Q>(&c, 2010, 4) > base);
        }

        #[test]
        fn rate_decreasing_in_run(total in 4u32..20) {
            // same T spread over runs of 1..=4 consecutive years
            let mut last: Option<Q> = None;
            for run in 1..=4i32 {
                let mut c: BTreeMap<i32, u32> = (0..run).map(|i| (2010 + i, 1)).collect();
                *c.get_mut(&2010).unwrap() += total - run as u32;
                let r: Q = window_rate(&c, 2010, 4);
                if let Some(prev) = last {
                    prop_assert!(r < prev);
                }
                last = Some(r);
            }
        }

        #[test]
        fn rate_bounded(c in year_counts_strategy(), start in 2010i32..=2021) {
            let r: Q = window_rate(&c, start, 4);
            let total: u32 = (start..start + 4).map(|y| c.get(&y).copied().unwrap_or(0)).sum();
            if total == 0 {
                prop_assert_eq!(r, Q::from_integer(0));
            } else {
                prop_assert!(r > Q::from_integer(0));
                prop_assert!(r <= Q::new(total as i64, 4));
            }
        }

        #[test]
        fn series_shift_equivariant(c in proptest::collection::btree_map(2010i32..=2023, 1u32..3, 1..6)) {
            let spec = WindowSpec::default();
            let shifted: Vec<(i32, u32)> = c.iter().map(|(&y, &n)| (y + 1, n)).collect();
            let a = rate_series::<Q>(&profile(&c.into_iter().collect::<Vec<_>>()), &spec).rates;
            let b = rate_series::<Q>(&profile(&shifted), &spec).rates;
            // window w over shifted data equals window w-1 over the original
            for w in 1..a.len() {
                prop_assert_eq!(b[w], a[w - 1]);
            }
        }

        #[test]
        fn rpd_symmetric(a in 0.0f64..10.0, b in 0.0f64..10.0) {
            prop_assume!(a + b > 0.0);
            let x = rpd(a, b).unwrap();
            prop_assert_eq!(x, rpd(b, a).unwrap());
            prop_assert!((0.0..=200.0).contains(&x));
        }

        #[test]
        fn lotka_expected_times_k_squared(counts in proptest::collection::vec(0u32..8, 0..200)) {
            let t: LotkaTable<Q> = lotka_from_counts(2010, counts);
            if let Some(first) = t.rows.first() {
                prop_assert_eq!(first.papers, 1);
                prop_assert_eq!(first.expected, Q::from_integer(first.observed as i64));
                for row in &t.rows {
                    let k = row.papers as i64;
                    prop_assert_eq!(row.expected * Q::from_integer(k * k), Q::from_integer(first.observed as i64));
                }
                for pair in t.rows.windows(2) {
                    prop_assert!(pair[1].expected < pair[0].expected);
                }
            }
        }
    }
}
