//! Subcommand implementations. Every function writes its artifacts under
//! `<out>/<conference>/`.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use biblio_core::dupscan::{dup_report, report_rows, REPORT_HEADER};
use biblio_core::grouping::{
    entry_country, load_rules, rpd_report, GroupingRules, GroupingScheme, SchemeKind, Tier,
};
use biblio_core::metrics::{
    author_gini, conference_gini, lotka_table, rate_series, rate_summary, WindowSpec,
};
use biblio_core::records::{
    build_corpus, ingest_articles, Corpus, CorpusOptions, IngestWarning, InputFormat,
};
use biblio_core::table::{fixed, short3, Table};
use biblio_core::topics::{
    articles_by_label, country_embedding, group_documents, lda_fit, similarity_matrix, top_words,
    EmbeddingProvider, EmbeddingVector, HttpEmbedder, PreprocessOptions, Stopwords, StubEmbedder,
    TopicsError,
};
use biblio_core::Real;

use crate::config::RunConfig;
use crate::output::OutputDir;

/// One ingested conference with its grouping schemes applied.
pub struct Loaded {
    pub name: String,
    pub corpus: Corpus,
    pub warnings: Vec<IngestWarning>,
    pub rules: Vec<GroupingRules>,
    pub schemes: Vec<GroupingScheme>,
}

pub fn load_conference(cfg: &RunConfig, name: &str, path: &Path) -> Result<Loaded> {
    let format = InputFormat::from_path(path)
        .ok_or_else(|| anyhow!("records: {}: expected a .csv or .json file", path.display()))?;
    let ingested = ingest_articles(path, format, cfg.years).map_err(|e| anyhow!("records: {e}"))?;
    let options = CorpusOptions {
        years: cfg.years,
        strict: cfg.strict,
    };
    let mut corpus =
        build_corpus(ingested.articles, name, &options).map_err(|e| anyhow!("records: {e}"))?;
    let mut rules = Vec::new();
    let mut schemes = Vec::new();
    for (kind, path) in cfg.schemes()? {
        let r =
            load_rules(&path, kind).map_err(|e| anyhow!("grouping: {}: {e}", path.display()))?;
        let scheme = r.assign(&corpus);
        scheme.tag(&mut corpus);
        rules.push(r);
        schemes.push(scheme);
    }
    Ok(Loaded {
        name: name.to_string(),
        corpus,
        warnings: ingested.warnings,
        rules,
        schemes,
    })
}

fn rel(conf: &str, file: &str) -> String {
    format!("{conf}/{file}")
}

pub fn ingest(l: &Loaded, out: &mut OutputDir) -> Result<()> {
    let mut authors = Table::new([
        "first",
        "last",
        "display_name",
        "country",
        "latest_affiliation",
        "publications",
        "groups",
    ]);
    for p in l.corpus.authors.values() {
        authors.push([
            p.key.first.clone(),
            p.key.last.clone(),
            p.display_name.clone(),
            p.country.clone(),
            p.latest_affiliation.clone(),
            p.total_publications().to_string(),
            p.groups.iter().cloned().collect::<Vec<_>>().join(";"),
        ]);
    }
    out.write_csv(&rel(&l.name, "authors.csv"), &authors)?;

    let s = l.corpus.dedup_stats;
    let mut dedup = Table::new([
        "conference",
        "articles",
        "authors",
        "raw_name_rows",
        "merged_rows",
        "duplicate_fraction",
    ]);
    dedup.push([
        l.name.clone(),
        l.corpus.articles.len().to_string(),
        l.corpus.author_count().to_string(),
        s.raw_name_rows.to_string(),
        s.merged_rows.to_string(),
        fixed(s.duplicate_fraction, 4),
    ]);
    out.write_csv(&rel(&l.name, "dedup.csv"), &dedup)?;

    let mut warnings = Table::new(["row", "article_id", "message"]);
    for w in &l.warnings {
        warnings.push([w.row.to_string(), w.article_id.clone(), w.message.clone()]);
    }
    out.write_csv(&rel(&l.name, "ingest_warnings.csv"), &warnings)?;

    if !l.corpus.collisions.is_empty() {
        let mut t = Table::new(["first", "last", "countries"]);
        for (k, countries) in &l.corpus.collisions {
            t.push([
                k.first.clone(),
                k.last.clone(),
                countries.iter().cloned().collect::<Vec<_>>().join(";"),
            ]);
        }
        out.write_csv(&rel(&l.name, "collisions.csv"), &t)?;
    }
    Ok(())
}

pub fn rates(l: &Loaded, cfg: &RunConfig, spec: &WindowSpec, out: &mut OutputDir) -> Result<()> {
    let mut header = vec!["first".to_string(), "last".to_string()];
    header.extend(spec.starts().map(|s| spec.label(s)));
    let mut table = Table::new(header);
    for p in l.corpus.authors.values() {
        let series = rate_series::<Real>(p, spec);
        let mut row = vec![p.key.first.clone(), p.key.last.clone()];
        row.extend(series.rates.iter().map(|&r| fixed(r, 4)));
        table.push(row);
    }
    out.write_csv(&rel(&l.name, "rates.csv"), &table)?;

    let mut summary = Table::new(["mode", "count", "mean", "std_dev"]);
    for mode in cfg.summary_modes() {
        match rate_summary::<Real>(&l.corpus, spec, mode) {
            Ok(s) => summary.push([
                mode.to_string(),
                s.count.to_string(),
                fixed(s.mean, 4),
                fixed(s.std_dev, 4),
            ]),
            Err(_) => summary.push([mode.to_string(), "0".into(), "NaN".into(), "NaN".into()]),
        }
    }
    out.write_both(
        &rel(&l.name, "rate_summary"),
        &format!("{} publication rates", l.name),
        &summary,
    )?;
    Ok(())
}

pub fn gini(l: &Loaded, cfg: &RunConfig, spec: &WindowSpec, out: &mut OutputDir) -> Result<()> {
    let mut per_author = Table::new(["first", "last", "gini"]);
    for p in l.corpus.authors.values() {
        let g = author_gini::<Real>(p, spec).map_err(|e| anyhow!("metrics: {}: {e}", p.key))?;
        per_author.push([p.key.first.clone(), p.key.last.clone(), fixed(g.value, 4)]);
    }
    out.write_csv(&rel(&l.name, "author_gini.csv"), &per_author)?;

    let mut conf = Table::new(["conference", "basis", "population", "gini"]);
    for basis in cfg.gini_bases() {
        let g =
            conference_gini::<Real>(&l.corpus, spec, basis).map_err(|e| anyhow!("metrics: {e}"))?;
        conf.push([
            l.name.clone(),
            basis.to_string(),
            g.population_size.to_string(),
            fixed(g.value, 4),
        ]);
    }
    out.write_both(
        &rel(&l.name, "conference_gini"),
        &format!("{} Gini index", l.name),
        &conf,
    )?;
    Ok(())
}

/// Lotka tables for `year`, or for every year of the range.
pub fn lotka(l: &Loaded, cfg: &RunConfig, year: Option<i32>, out: &mut OutputDir) -> Result<()> {
    let years: Vec<i32> = match year {
        Some(y) if !cfg.years.contains(y) => {
            return Err(anyhow!("metrics: year {y} outside {}", cfg.years));
        }
        Some(y) => vec![y],
        None => cfg.years.years().collect(),
    };
    for y in years {
        let t = lotka_table::<Real>(&l.corpus, y);
        let mut table = Table::new(["papers", "observed", "expected"]);
        for r in &t.rows {
            table.push([
                r.papers.to_string(),
                r.observed.to_string(),
                short3(r.expected),
            ]);
        }
        out.write_both(
            &rel(&l.name, &format!("lotka_{y}")),
            &format!("{} Lotka {y}", l.name),
            &table,
        )?;
    }
    Ok(())
}

fn opt4(v: Option<Real>) -> String {
    v.map_or_else(|| "NaN".to_string(), |x| fixed(x, 4))
}

pub fn rpd(
    l: &Loaded,
    cfg: &RunConfig,
    spec: &WindowSpec,
    only: Option<SchemeKind>,
    out: &mut OutputDir,
) -> Result<()> {
    let basis = cfg.basis.unwrap_or_default();
    for scheme in l
        .schemes
        .iter()
        .filter(|s| only.is_none_or(|k| k == s.name))
    {
        let report = rpd_report::<Real>(&l.corpus, scheme, spec, basis)
            .map_err(|e| anyhow!("grouping: {e}"))?;
        let mut table = Table::new([
            "label",
            "tier",
            "group_size",
            "complement_size",
            "group_gini",
            "complement_gini",
            "rpd_percent",
        ]);
        for r in &report.rows {
            table.push([
                r.label.clone(),
                r.tier.map_or("", |t| t.as_str()).to_string(),
                r.group_size.to_string(),
                r.complement_size.to_string(),
                opt4(r.group_gini),
                opt4(r.complement_gini),
                r.rpd_percent
                    .map_or_else(|| "NaN".to_string(), |x| fixed(x, 2)),
            ]);
        }
        let title = format!("{} RPD by {} ({basis})", l.name, scheme.name);
        out.write_both(
            &rel(&l.name, &format!("rpd_{}", scheme.name)),
            &title,
            &table,
        )?;
    }
    if let Some(k) = only {
        if !l.schemes.iter().any(|s| s.name == k) {
            return Err(anyhow!(
                "grouping: no mapping file configured for scheme {k}"
            ));
        }
    }
    Ok(())
}

/// Topic groups: top-5 tier labels of the country scheme when one is
/// configured, otherwise raw author countries.
fn topic_groups(l: &Loaded) -> BTreeMap<String, Vec<&biblio_core::records::ArticleRecord>> {
    match l.rules.iter().find(|r| r.kind == SchemeKind::Country) {
        Some(rules) => {
            let top5: Vec<&str> = rules
                .rules
                .iter()
                .filter(|r| r.tier == Some(Tier::Top5))
                .map(|r| r.label.as_str())
                .collect();
            articles_by_label(&l.corpus, |e| {
                rules
                    .country_label(&entry_country(e))
                    .filter(|lab| top5.is_empty() || top5.contains(lab))
                    .map(str::to_string)
            })
        }
        None => articles_by_label(&l.corpus, |e| {
            let c = entry_country(e);
            (!c.is_empty()).then_some(c)
        }),
    }
}

pub fn preprocess_options(cfg: &RunConfig) -> Result<PreprocessOptions> {
    let stopwords = match &cfg.stopwords {
        Some(p) => Stopwords::parse(
            &std::fs::read_to_string(p)
                .with_context(|| format!("topics: reading {}", p.display()))?,
        ),
        None => Stopwords::default(),
    };
    Ok(PreprocessOptions {
        stopwords,
        stem: cfg.stem,
        ..Default::default()
    })
}

pub fn lda(l: &Loaded, cfg: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let options = preprocess_options(cfg)?;
    let params = cfg.lda_params();
    let mut table = Table::new(["group", "topic", "top_words"]);
    for (label, articles) in topic_groups(l) {
        let docs = group_documents(&label, &articles, &options);
        let model = match lda_fit(&docs, &params) {
            Ok(m) => m,
            Err(e @ (TopicsError::DegenerateVocab | TopicsError::EmptyCorpus)) => {
                eprintln!("warning: topics: skipping {label}: {e}");
                continue;
            }
            Err(e) => return Err(anyhow!("topics: {label}: {e}")),
        };
        for topic in 0..model.k {
            let words =
                top_words(&model, topic, cfg.lda.top_words).map_err(|e| anyhow!("topics: {e}"))?;
            table.push([label.clone(), (topic + 1).to_string(), words.join(", ")]);
        }
    }
    let title = format!("{} topics (K={}, seed {})", l.name, params.k, params.seed);
    out.write_both(&rel(&l.name, "lda_topics"), &title, &table)?;
    Ok(())
}

pub fn make_provider(cfg: &RunConfig) -> Result<Box<dyn EmbeddingProvider>> {
    match cfg.provider.as_deref() {
        None | Some("stub") => Ok(Box::new(StubEmbedder::new(cfg.stub_dim, cfg.seed))),
        Some(url) => Ok(Box::new(
            HttpEmbedder::connect(url).map_err(|e| anyhow!("topics: provider {url}: {e}"))?,
        )),
    }
}

pub fn topicsim(l: &Loaded, provider: &dyn EmbeddingProvider, out: &mut OutputDir) -> Result<()> {
    let mut embeddings: BTreeMap<String, EmbeddingVector> = BTreeMap::new();
    for (label, articles) in topic_groups(l) {
        match country_embedding(&articles, provider) {
            Ok(v) => {
                embeddings.insert(label, v);
            }
            Err(TopicsError::NoAbstracts) => eprintln!("warning: topics: {label} has no abstracts"),
            Err(e) => return Err(anyhow!("topics: {label}: {e}")),
        }
    }
    if embeddings.len() < 2 {
        eprintln!(
            "warning: topics: {} needs at least two groups with abstracts for a similarity matrix; skipped",
            l.name
        );
        return Ok(());
    }
    let m = similarity_matrix(&embeddings).map_err(|e| anyhow!("topics: {e}"))?;
    let mut header = vec![String::new()];
    header.extend(m.labels.iter().cloned());
    let mut table = Table::new(header);
    for (i, label) in m.labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend((0..m.size()).map(|j| fixed(m.get(i, j), 3)));
        table.push(row);
    }
    out.write_both(
        &rel(&l.name, "topic_similarity"),
        &format!("{} abstract similarity", l.name),
        &table,
    )?;
    Ok(())
}

pub fn dupscan(
    l: &Loaded,
    cfg: &RunConfig,
    provider: &dyn EmbeddingProvider,
    out: &mut OutputDir,
) -> Result<()> {
    let candidates = dup_report(
        &l.corpus,
        provider,
        &cfg.thresholds(),
        cfg.min_author_jaccard,
    )
    .map_err(|e| anyhow!("dupscan: {e}"))?;
    let mut table = Table::new(REPORT_HEADER);
    for row in report_rows(&candidates) {
        table.push(row);
    }
    out.write_csv(&rel(&l.name, "dupscan.csv"), &table)?;
    Ok(())
}

/// Cross-conference overview written by `report`.
pub fn overview(
    all: &[Loaded],
    cfg: &RunConfig,
    spec: &WindowSpec,
    out: &mut OutputDir,
) -> Result<()> {
    let mut header = vec![
        "conference".to_string(),
        "articles".into(),
        "authors".into(),
        "duplicate_fraction".into(),
    ];
    header.extend(cfg.gini_bases().iter().map(|b| format!("gini_{b}")));
    let mut table = Table::new(header);
    for l in all {
        let mut row = vec![
            l.name.clone(),
            l.corpus.articles.len().to_string(),
            l.corpus.author_count().to_string(),
            fixed(l.corpus.dedup_stats.duplicate_fraction, 4),
        ];
        for basis in cfg.gini_bases() {
            let g = conference_gini::<Real>(&l.corpus, spec, basis)
                .map_err(|e| anyhow!("metrics: {e}"))?;
            row.push(fixed(g.value, 4));
        }
        table.push(row);
    }
    out.write_both("conferences", "Conferences", &table)?;
    Ok(())
}
