//! `biblio` command-line front end.
//!
//! Settings come from an optional JSON config (`--config`) overridden by
//! flags. The embedding provider resolves as `--provider`, then the config's
//! `provider`, then `BIBLIO_PROVIDER_URL`, then the in-process stub.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use biblio_core::grouping::SchemeKind;
use biblio_core::metrics::{GiniBasis, SummaryMode};
use biblio_core::records::{ingest_articles, InputFormat, YearRange};
use clap::{Parser, Subcommand};

use crate::commands::Loaded;
use crate::config::RunConfig;
use crate::output::OutputDir;

pub const PROVIDER_ENV: &str = "BIBLIO_PROVIDER_URL";

#[derive(Debug, Parser)]
#[command(
    name = "biblio",
    version,
    about = "Publication inequality reports for conference corpora"
)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Conference name; names the `--input` corpus (default: taken from its
    /// records) or selects one corpus from the config.
    #[arg(long, global = true, value_name = "NAME")]
    pub conference: Option<String>,
    /// Article export (.csv or .json) for a single conference.
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Embedding service base URL, or `stub`.
    #[arg(long, global = true, value_name = "URL|stub")]
    pub provider: Option<String>,
    #[arg(long, global = true, value_parser = parse_basis, value_name = "pooled|per-author-mean")]
    pub basis: Option<GiniBasis>,
    #[arg(long, global = true, value_parser = parse_mode, value_name = "all|nonzero")]
    pub mode: Option<SummaryMode>,
    /// Light suffix stemming before topic modelling.
    #[arg(long, global = true)]
    pub stem: bool,
    /// Report author keys whose records span several countries.
    #[arg(long, global = true)]
    pub strict: bool,
    #[arg(long, global = true, value_name = "X")]
    pub tau_title: Option<f64>,
    #[arg(long, global = true, value_name = "X")]
    pub tau_abstract: Option<f64>,
    /// Grouping mapping file, repeatable.
    #[arg(long, global = true, value_name = "SCHEME=PATH")]
    pub grouping: Vec<String>,
    /// Inclusive year range.
    #[arg(long, global = true, value_parser = parse_years, value_name = "START-END")]
    pub years: Option<YearRange>,
    /// Window length in years.
    #[arg(long, global = true, value_name = "P")]
    pub window: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Normalize authors and write author, dedup and warning tables.
    Ingest,
    /// Windowed publication rates and their summary.
    Rates,
    /// Per-author and conference Gini indices.
    Gini,
    /// Observed against expected author counts.
    Lotka {
        #[arg(long)]
        year: Option<i32>,
    },
    /// Group-versus-complement Gini comparison.
    Rpd {
        /// institution_type, ranking_top10 or country.
        #[arg(long)]
        scheme: Option<String>,
    },
    /// Topic model per country group.
    Lda,
    /// Country similarity of abstract embeddings.
    Topicsim,
    /// Duplicate-publication candidates.
    Dupscan,
    /// Everything above plus a checksum manifest.
    Report,
}

fn parse_basis(s: &str) -> Result<GiniBasis, String> {
    match s {
        "pooled" => Ok(GiniBasis::Pooled),
        "per-author-mean" => Ok(GiniBasis::PerAuthorMean),
        _ => Err("expected pooled or per-author-mean".into()),
    }
}

fn parse_mode(s: &str) -> Result<SummaryMode, String> {
    match s {
        "all" => Ok(SummaryMode::All),
        "nonzero" => Ok(SummaryMode::Nonzero),
        _ => Err("expected all or nonzero".into()),
    }
}

fn parse_years(s: &str) -> Result<YearRange, String> {
    let (a, b) = s.split_once('-').ok_or("expected START-END")?;
    let start = a.trim().parse().map_err(|_| format!("bad year {a:?}"))?;
    let end = b.trim().parse().map_err(|_| format!("bad year {b:?}"))?;
    if start > end {
        return Err("start year after end year".into());
    }
    Ok(YearRange::new(start, end))
}

/// Conference named by the first record of an export.
fn conference_of(input: &Path) -> Result<String> {
    let format = InputFormat::from_path(input).ok_or_else(|| {
        anyhow!(
            "records: {}: expected a .csv or .json file",
            input.display()
        )
    })?;
    if !input.is_file() {
        bail!("config: {} does not exist", input.display());
    }
    let all_years = YearRange::new(i32::MIN, i32::MAX);
    let ingested =
        ingest_articles(input, format, all_years).map_err(|e| anyhow!("records: {e}"))?;
    ingested
        .articles
        .first()
        .map(|a| a.conference.clone())
        .ok_or_else(|| {
            anyhow!(
                "records: {} has no articles; pass --conference",
                input.display()
            )
        })
}

impl Cli {
    /// Config file (or defaults) with every flag applied on top.
    pub fn resolve(&self, env_provider: Option<String>) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p).context("config")?,
            None => RunConfig::default(),
        };
        match (&self.input, &self.conference) {
            (Some(input), name) => {
                let name = match name {
                    Some(n) => n.clone(),
                    None => conference_of(input)?,
                };
                cfg.corpora = [(name, input.clone())].into();
            }
            (None, Some(name)) => {
                let path = cfg
                    .corpora
                    .remove(name)
                    .ok_or_else(|| anyhow!("config: conference {name:?} is not configured"))?;
                cfg.corpora = [(name.clone(), path)].into();
            }
            (None, None) => {}
        }
        for g in &self.grouping {
            let (scheme, path) = g
                .split_once('=')
                .ok_or_else(|| anyhow!("config: --grouping expects SCHEME=PATH, got {g:?}"))?;
            scheme.parse::<SchemeKind>().context("config")?;
            cfg.groupings
                .insert(scheme.to_string(), PathBuf::from(path));
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.provider = self
            .provider
            .clone()
            .or(cfg.provider)
            .or(env_provider.filter(|s| !s.is_empty()));
        if self.basis.is_some() {
            cfg.basis = self.basis;
        }
        if self.mode.is_some() {
            cfg.mode = self.mode;
        }
        cfg.stem |= self.stem;
        cfg.strict |= self.strict;
        if let Some(v) = self.tau_title {
            cfg.tau_title = v;
        }
        if let Some(v) = self.tau_abstract {
            cfg.tau_abstract = v;
        }
        if let Some(v) = self.years {
            cfg.years = v;
        }
        if let Some(v) = self.window {
            cfg.window = v;
        }
        cfg.validate().context("config")?;
        Ok(cfg)
    }
}

/// Resolves the configuration and runs one subcommand.
pub fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.resolve(std::env::var(PROVIDER_ENV).ok())?;
    execute(&cli.command, &cfg)
}

pub fn execute(command: &Command, cfg: &RunConfig) -> Result<()> {
    let spec = cfg.window_spec().context("config")?;
    let scheme_filter = match command {
        Command::Rpd { scheme: Some(s) } => Some(s.parse::<SchemeKind>().context("grouping")?),
        _ => None,
    };
    let loaded: Vec<Loaded> = cfg
        .corpora
        .iter()
        .map(|(name, path)| commands::load_conference(cfg, name, path))
        .collect::<Result<_>>()?;
    let needs_provider = matches!(
        command,
        Command::Topicsim | Command::Dupscan | Command::Report
    );
    let provider = if needs_provider {
        Some(commands::make_provider(cfg)?)
    } else {
        None
    };
    let mut out = OutputDir::new(&cfg.out, cfg.seed);

    for l in &loaded {
        match command {
            Command::Ingest => commands::ingest(l, &mut out)?,
            Command::Rates => commands::rates(l, cfg, &spec, &mut out)?,
            Command::Gini => commands::gini(l, cfg, &spec, &mut out)?,
            Command::Lotka { year } => commands::lotka(l, cfg, *year, &mut out)?,
            Command::Rpd { .. } => commands::rpd(l, cfg, &spec, scheme_filter, &mut out)?,
            Command::Lda => commands::lda(l, cfg, &mut out)?,
            Command::Topicsim => {
                commands::topicsim(l, provider.as_deref().expect("provider"), &mut out)?
            }
            Command::Dupscan => {
                commands::dupscan(l, cfg, provider.as_deref().expect("provider"), &mut out)?
            }
            Command::Report => {
                let p = provider.as_deref().expect("provider");
                commands::ingest(l, &mut out)?;
                commands::rates(l, cfg, &spec, &mut out)?;
                commands::gini(l, cfg, &spec, &mut out)?;
                commands::lotka(l, cfg, None, &mut out)?;
                commands::rpd(l, cfg, &spec, None, &mut out)?;
                commands::lda(l, cfg, &mut out)?;
                commands::topicsim(l, p, &mut out)?;
                commands::dupscan(l, cfg, p, &mut out)?;
            }
        }
    }
    if matches!(command, Command::Report) {
        commands::overview(&loaded, cfg, &spec, &mut out)?;
        let mut recorded = cfg.clone();
        recorded.out = PathBuf::new();
        let json = serde_json::to_string_pretty(&recorded)? + "\n";
        out.write_raw("run_config.json", json.as_bytes())?;
        out.write_manifest()?;
    }
    if out.written().is_empty() && !loaded.is_empty() && matches!(command, Command::Rpd { .. }) {
        bail!("grouping: no grouping files configured (use --grouping SCHEME=PATH)");
    }
    Ok(())
}
