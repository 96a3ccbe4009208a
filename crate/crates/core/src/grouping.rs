//! Author grouping schemes (institution type, top-10 ranking, country tiers)
//! and the group-vs-complement RPD reports.
//!
//! Mapping files are CSV with header `pattern_or_country,label,tier`.
//! Institution schemes match `pattern_or_country` as a case-insensitive
//! substring of the author's most recent affiliation; when several patterns
//! match, the longest wins (ties go to the smaller label) so the outcome does
//! not depend on row order. The country scheme compares the author's country
//! case-insensitively against `pattern_or_country`. Authors matching nothing
//! get the label [`UNKNOWN`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::metrics::{
    profiles_gini, rpd, GiniBasis, GiniLevel, GiniResult, MetricsError, WindowSpec,
};
use crate::records::{AuthorEntry, AuthorKey, AuthorProfile, Corpus};
use crate::scalar::Scalar;

pub const UNKNOWN: &str = "unknown";

#[derive(Debug, Error)]
pub enum GroupingError {
    #[error("parse error at row {row}: {message}")]
    Parse { row: u64, message: String },
    #[error("grouping file has no mapping rows")]
    EmptyMapping,
    #[error("group {0:?} has no authors")]
    EmptyGroup(String),
    #[error("label {0:?} is not part of the scheme")]
    UnknownLabel(String),
    #[error("unknown grouping scheme {0:?}")]
    UnknownScheme(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    InstitutionType,
    RankingTop10,
    Country,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [Self::InstitutionType, Self::RankingTop10, Self::Country];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::InstitutionType => "institution_type",
            Self::RankingTop10 => "ranking_top10",
            Self::Country => "country",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = GroupingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| GroupingError::UnknownScheme(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Top5,
    NonTop5,
}

impl Tier {
    pub fn as_str(&self) -> &'static str {
        match self {
            Tier::Top5 => "top5",
            Tier::NonTop5 => "non_top5",
        }
    }
}

impl FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "top5" => Ok(Tier::Top5),
            "non_top5" => Ok(Tier::NonTop5),
            other => Err(format!("unknown tier {other:?}")),
        }
    }
}

/// Research-expenditure tiers used when a country row leaves `tier` blank.
pub fn default_country_tier(country: &str) -> Option<Tier> {
    const TOP5: [&str; 8] = [
        "united states",
        "usa",
        "us",
        "china",
        "japan",
        "germany",
        "south korea",
        "korea",
    ];
    const NON_TOP5: [&str; 6] = [
        "australia",
        "canada",
        "france",
        "taiwan",
        "turkey",
        "türkiye",
    ];
    let c = country.trim().to_lowercase();
    if TOP5.contains(&c.as_str()) {
        Some(Tier::Top5)
    } else if NON_TOP5.contains(&c.as_str()) {
        Some(Tier::NonTop5)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingRule {
    pub pattern: String,
    pub label: String,
    pub tier: Option<Tier>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingRules {
    pub kind: SchemeKind,
    pub rules: Vec<GroupingRule>,
}

pub fn parse_rules<R: Read>(reader: R, kind: SchemeKind) -> Result<GroupingRules, GroupingError> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| GroupingError::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (pat, lab) = match (col("pattern_or_country"), col("label")) {
        (Some(p), Some(l)) => (p, l),
        _ => {
            return Err(GroupingError::Parse {
                row: 1,
                message: "header must contain pattern_or_country,label[,tier]".into(),
            })
        }
    };
    let tier_col = col("tier");

    let mut rules = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| GroupingError::Parse {
            row: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let pattern = record.get(pat).unwrap_or("").to_string();
        let label = record.get(lab).unwrap_or("").to_string();
        if pattern.is_empty() || label.is_empty() {
            return Err(GroupingError::Parse {
                row,
                message: "pattern_or_country and label must be non-empty".into(),
            });
        }
        let tier = match tier_col
            .and_then(|i| record.get(i))
            .filter(|t| !t.is_empty())
        {
            Some(t) => Some(
                t.parse()
                    .map_err(|message| GroupingError::Parse { row, message })?,
            ),
            None if kind == SchemeKind::Country => {
                default_country_tier(&label).or_else(|| default_country_tier(&pattern))
            }
            None => None,
        };
        rules.push(GroupingRule {
            pattern,
            label,
            tier,
        });
    }
    if rules.is_empty() {
        return Err(GroupingError::EmptyMapping);
    }
    Ok(GroupingRules { kind, rules })
}

pub fn load_rules(path: &Path, kind: SchemeKind) -> Result<GroupingRules, GroupingError> {
    parse_rules(File::open(path)?, kind)
}

fn country_or_affiliation_tail(country: &str, affiliation: &str) -> String {
    if !country.trim().is_empty() {
        return country.trim().to_string();
    }
    affiliation
        .rsplit(',')
        .next()
        .unwrap_or("")
        .trim()
        .to_string()
}

/// Country of an author: the recorded country, or failing that the last
/// comma-separated segment of the latest affiliation.
pub fn author_country(profile: &AuthorProfile) -> String {
    country_or_affiliation_tail(&profile.country, &profile.latest_affiliation)
}

/// Same rule as [`author_country`], applied to a single author record.
pub fn entry_country(entry: &AuthorEntry) -> String {
    country_or_affiliation_tail(&entry.country, &entry.affiliation)
}

impl GroupingRules {
    /// Label of a country name under a country scheme.
    pub fn country_label(&self, country: &str) -> Option<&str> {
        let country = country.trim().to_lowercase();
        self.rules
            .iter()
            .filter(|r| r.pattern.to_lowercase() == country)
            .map(|r| r.label.as_str())
            .min()
    }

    pub fn label_for(&self, profile: &AuthorProfile) -> String {
        let best = match self.kind {
            SchemeKind::Country => self.country_label(&author_country(profile)),
            SchemeKind::InstitutionType | SchemeKind::RankingTop10 => {
                let aff = profile.latest_affiliation.to_lowercase();
                self.rules
                    .iter()
                    .filter(|r| aff.contains(&r.pattern.to_lowercase()))
                    .min_by(|a, b| {
                        b.pattern
                            .chars()
                            .count()
                            .cmp(&a.pattern.chars().count())
                            .then_with(|| a.label.cmp(&b.label))
                    })
                    .map(|r| r.label.as_str())
            }
        };
        best.unwrap_or(UNKNOWN).to_string()
    }

    pub fn assign(&self, corpus: &Corpus) -> GroupingScheme {
        let membership = corpus
            .authors
            .values()
            .map(|p| (p.key.clone(), self.label_for(p)))
            .collect();
        let mut universe: BTreeSet<String> = self.rules.iter().map(|r| r.label.clone()).collect();
        universe.insert(UNKNOWN.to_string());
        let mut tier_map = BTreeMap::new();
        if self.kind == SchemeKind::Country {
            // conflicting tiers for one label resolve to the first in Tier order
            for r in &self.rules {
                if let Some(t) = r.tier {
                    let slot = tier_map.entry(r.label.clone()).or_insert(t);
                    *slot = (*slot).min(t);
                }
            }
        }
        GroupingScheme {
            name: self.kind,
            membership,
            label_universe: universe.into_iter().collect(),
            tier_map,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingScheme {
    pub name: SchemeKind,
    pub membership: BTreeMap<AuthorKey, String>,
    /// Sorted, always containing [`UNKNOWN`].
    pub label_universe: Vec<String>,
    pub tier_map: BTreeMap<String, Tier>,
}

pub fn load_grouping(
    path: &Path,
    kind: SchemeKind,
    corpus: &Corpus,
) -> Result<GroupingScheme, GroupingError> {
    Ok(load_rules(path, kind)?.assign(corpus))
}

impl GroupingScheme {
    pub fn label_of(&self, key: &AuthorKey) -> &str {
        self.membership.get(key).map_or(UNKNOWN, String::as_str)
    }

    pub fn members<'a>(
        &'a self,
        corpus: &'a Corpus,
        label: &'a str,
    ) -> impl Iterator<Item = &'a AuthorProfile> + 'a {
        corpus
            .authors
            .values()
            .filter(move |p| self.label_of(&p.key) == label)
    }

    pub fn group_sizes(&self, corpus: &Corpus) -> BTreeMap<String, usize> {
        let mut sizes: BTreeMap<String, usize> =
            self.label_universe.iter().map(|l| (l.clone(), 0)).collect();
        for p in corpus.authors.values() {
            *sizes.entry(self.label_of(&p.key).to_string()).or_default() += 1;
        }
        sizes
    }

    /// Authors a label is compared against: the rest of its tier for tiered
    /// country labels, otherwise every other author in the corpus.
    pub fn complement<'a>(
        &'a self,
        corpus: &'a Corpus,
        label: &'a str,
    ) -> impl Iterator<Item = &'a AuthorProfile> + 'a {
        let tier = self.tier_map.get(label).copied();
        corpus.authors.values().filter(move |p| {
            let other = self.label_of(&p.key);
            other != label && (tier.is_none() || self.tier_map.get(other).copied() == tier)
        })
    }

    /// Adds `scheme:label` tags to every profile's group set.
    pub fn tag(&self, corpus: &mut Corpus) {
        for (key, profile) in corpus.authors.iter_mut() {
            let label = self.membership.get(key).map_or(UNKNOWN, String::as_str);
            profile.groups.insert(format!("{}:{}", self.name, label));
        }
    }
}

pub fn group_gini<T: Scalar>(
    corpus: &Corpus,
    scheme: &GroupingScheme,
    label: &str,
    spec: &WindowSpec,
    basis: GiniBasis,
) -> Result<GiniResult<T>, GroupingError> {
    if !scheme.label_universe.iter().any(|l| l == label) {
        return Err(GroupingError::UnknownLabel(label.to_string()));
    }
    match profiles_gini(scheme.members(corpus, label), spec, basis, GiniLevel::Group) {
        Err(MetricsError::EmptyInput) => Err(GroupingError::EmptyGroup(label.to_string())),
        other => Ok(other?),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RpdRow<T> {
    pub label: String,
    pub tier: Option<Tier>,
    pub group_size: usize,
    pub complement_size: usize,
    pub group_gini: Option<T>,
    pub complement_gini: Option<T>,
    /// `None` when either side is empty or both Gini values are zero.
    pub rpd_percent: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RpdReport<T> {
    pub scheme: SchemeKind,
    pub basis: GiniBasis,
    pub rows: Vec<RpdRow<T>>,
}

fn optional_gini<'a, T: Scalar>(
    profiles: impl Iterator<Item = &'a AuthorProfile>,
    spec: &WindowSpec,
    basis: GiniBasis,
) -> Result<(usize, Option<T>), MetricsError> {
    let members: Vec<&AuthorProfile> = profiles.collect();
    if members.is_empty() {
        return Ok((0, None));
    }
    let g = profiles_gini(members.iter().copied(), spec, basis, GiniLevel::Group)?;
    Ok((members.len(), Some(g.value)))
}

/// One row per label in the scheme's universe, in label order.
pub fn rpd_report<T: Scalar>(
    corpus: &Corpus,
    scheme: &GroupingScheme,
    spec: &WindowSpec,
    basis: GiniBasis,
) -> Result<RpdReport<T>, GroupingError> {
    let mut rows = Vec::with_capacity(scheme.label_universe.len());
    for label in &scheme.label_universe {
        let (group_size, group_gini) = optional_gini(scheme.members(corpus, label), spec, basis)?;
        let (complement_size, complement_gini) =
            optional_gini(scheme.complement(corpus, label), spec, basis)?;
        let rpd_percent = match (group_gini, complement_gini) {
            (Some(a), Some(b)) => match rpd(a, b) {
                Ok(v) => Some(v),
                Err(MetricsError::UndefinedRpd) => None,
                Err(e) => return Err(e.into()),
            },
            _ => None,
        };
        rows.push(RpdRow {
            label: label.clone(),
            tier: scheme.tier_map.get(label).copied(),
            group_size,
            complement_size,
            group_gini,
            complement_gini,
            rpd_percent,
        });
    }
    Ok(RpdReport {
        scheme: scheme.name,
        basis,
        rows,
    })
}
