//! Run configuration: a JSON file merged with command-line overrides.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use biblio_core::dupscan::DupThresholds;
use biblio_core::grouping::SchemeKind;
use biblio_core::metrics::{GiniBasis, SummaryMode, WindowSpec};
use biblio_core::records::YearRange;
use biblio_core::topics::{LdaParams, DEFAULT_SEED};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaConfig {
    pub topics: usize,
    pub top_words: usize,
    /// Defaults to `50 / topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            topics: 5,
            top_words: 4,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Conference name -> CSV or JSON export.
    pub corpora: BTreeMap<String, PathBuf>,
    pub years: YearRange,
    pub window: u32,
    /// Scheme name (`institution_type`, `ranking_top10`, `country`) -> mapping file.
    pub groupings: BTreeMap<String, PathBuf>,
    pub lda: LdaConfig,
    /// `"stub"` or the base URL of an embedding service. Unset falls back to
    /// `BIBLIO_PROVIDER_URL`, then to the stub.
    pub provider: Option<String>,
    pub stub_dim: usize,
    pub tau_title: f64,
    pub tau_abstract: f64,
    pub min_author_jaccard: f64,
    pub out: PathBuf,
    pub seed: u64,
    /// Unset emits both bases where a choice exists; group RPD uses pooled.
    pub basis: Option<GiniBasis>,
    /// Unset emits both summary modes.
    pub mode: Option<SummaryMode>,
    pub stem: bool,
    pub strict: bool,
    pub stopwords: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = DupThresholds::default();
        Self {
            corpora: BTreeMap::new(),
            years: YearRange::default(),
            window: 4,
            groupings: BTreeMap::new(),
            lda: LdaConfig::default(),
            provider: None,
            stub_dim: 384,
            tau_title: t.title,
            tau_abstract: t.abstract_text,
            min_author_jaccard: 1.0,
            out: PathBuf::from("out"),
            seed: DEFAULT_SEED,
            basis: None,
            mode: None,
            stem: false,
            strict: false,
            stopwords: None,
        }
    }
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    /// Parses a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.corpora.values_mut().for_each(|p| rebase(base, p));
        cfg.groupings.values_mut().for_each(|p| rebase(base, p));
        if let Some(p) = cfg.stopwords.as_mut() {
            rebase(base, p);
        }
        Ok(cfg)
    }

    pub fn window_spec(&self) -> Result<WindowSpec> {
        Ok(WindowSpec::new(
            self.years.start,
            self.years.end,
            self.window,
        )?)
    }

    pub fn thresholds(&self) -> DupThresholds {
        DupThresholds {
            title: self.tau_title,
            abstract_text: self.tau_abstract,
        }
    }

    pub fn lda_params(&self) -> LdaParams {
        let base = LdaParams::with_topics(self.lda.topics);
        LdaParams {
            alpha: self.lda.alpha.unwrap_or(base.alpha),
            beta: self.lda.beta,
            iterations: self.lda.iterations,
            seed: self.seed,
            ..base
        }
    }

    pub fn summary_modes(&self) -> Vec<SummaryMode> {
        match self.mode {
            Some(m) => vec![m],
            None => vec![SummaryMode::All, SummaryMode::Nonzero],
        }
    }

    pub fn gini_bases(&self) -> Vec<GiniBasis> {
        match self.basis {
            Some(b) => vec![b],
            None => vec![GiniBasis::Pooled, GiniBasis::PerAuthorMean],
        }
    }

    pub fn schemes(&self) -> Result<Vec<(SchemeKind, PathBuf)>> {
        self.groupings
            .iter()
            .map(|(name, path)| Ok((name.parse::<SchemeKind>()?, path.clone())))
            .collect()
    }

    /// Checks everything that can be checked before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.corpora.is_empty() {
            bail!(
                "no corpora configured (use --input with --conference, or `corpora` in --config)"
            );
        }
        for (name, path) in &self.corpora {
            if !path.is_file() {
                bail!("corpus for {name}: {} does not exist", path.display());
            }
        }
        for (name, path) in &self.groupings {
            name.parse::<SchemeKind>()?;
            if !path.is_file() {
                bail!("grouping {name}: {} does not exist", path.display());
            }
        }
        if let Some(p) = &self.stopwords {
            if !p.is_file() {
                bail!("stopwords file {} does not exist", p.display());
            }
        }
        if !(self.min_author_jaccard > 0.0 && self.min_author_jaccard <= 1.0) {
            bail!("min_author_jaccard must be in (0, 1]");
        }
        if self.lda.topics == 0 {
            bail!("lda.topics must be >= 1");
        }
        self.window_spec()?;
        Ok(())
    }
}
