//! `wntags`: import ontologies, annotate images, search, benchmark and serve.

mod error;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use wntags::evaluation::{
    emit_curve_csv, generate_synthetic_corpus, parse_judged_queries, run_benchmark,
    write_judged_queries, SyntheticSpec, TagCountDistribution,
};
use wntags::ontology::{
    load_similarity_pairs, write_simple_graph, OntologyGraph, SenseKey, SimilarityTable,
    MAX_DISTANCE_CAP,
};
use wntags::repository::{AgreementConfig, EmotionTuple, ImageId, Repository};
use wntags::retrieval::{search_with_filters, AffectFilter, Filters, SearchOptions, ValueRange};
use wntags_service::{save_atomic, AppState};

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "wntags", version, about = "Weighted sense annotation and retrieval")]
struct Cli {
    #[command(flatten)]
    config: CliConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CliConfig {
    /// WordNet database directory or SimpleGraph file.
    #[arg(long, global = true, env = "WNTAGS_ONTOLOGY")]
    ontology: Option<PathBuf>,
    /// Precomputed `lemma#pos#n<TAB>lemma#pos#n<TAB>score` pairs.
    #[arg(long, global = true)]
    sim_pairs: Option<PathBuf>,
    /// Repository file (JSON lines).
    #[arg(long, global = true, env = "WNTAGS_REPO")]
    repo: Option<PathBuf>,
    /// Neighbourhood and similarity cutoff.
    #[arg(long, global = true, default_value_t = 10,
          value_parser = clap::value_parser!(u32).range(0..=MAX_DISTANCE_CAP as i64))]
    maxd: u32,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load an ontology and print its counts.
    #[command(group = clap::ArgGroup::new("source").required(true))]
    ImportWordnet {
        #[arg(long, group = "source")]
        dir: Option<PathBuf>,
        #[arg(long, group = "source")]
        simple: Option<PathBuf>,
        /// Also write the graph as a SimpleGraph file.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Add an image record.
    AddImage {
        #[arg(long)]
        uri: String,
        #[arg(long)]
        keyword: Option<String>,
        #[arg(long, requires_all = ["ar", "dom"])]
        val: Option<f64>,
        #[arg(long, requires_all = ["val", "dom"])]
        ar: Option<f64>,
        #[arg(long, requires_all = ["val", "ar"])]
        dom: Option<f64>,
    },
    /// Rate one sense on an image.
    Annotate {
        #[arg(long)]
        image: ImageId,
        /// `lemma#pos#n`
        #[arg(long)]
        sense: String,
        #[arg(long, allow_negative_numbers = true)]
        weight: f64,
        #[arg(long)]
        by: String,
    },
    /// Make an image searchable.
    Commit {
        #[arg(long)]
        image: ImageId,
    },
    /// Rank committed images against a text query.
    Search {
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 0.0)]
        minrel: f64,
        #[arg(long)]
        val: Option<String>,
        #[arg(long)]
        ar: Option<String>,
        #[arg(long)]
        dom: Option<String>,
        #[arg(long)]
        keyword: Option<String>,
        #[arg(long)]
        limit: Option<usize>,
        /// Emit `rank,image_id,relevance` CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Run a judged-query benchmark.
    Evaluate {
        #[arg(long)]
        queries: PathBuf,
        /// Fraction of each image's tags kept.
        #[arg(long)]
        subsample: Option<f64>,
        #[arg(long, default_value_t = 0, requires = "subsample")]
        seed: u64,
        /// Curve CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API until interrupted.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
    /// Write a synthetic corpus.
    Synth {
        #[arg(long, default_value_t = 100)]
        images: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Synsets in the generated graph when no ontology is given.
        #[arg(long, default_value_t = 2000)]
        graph_size: usize,
        /// Fixed tag count instead of the reference distribution.
        #[arg(long)]
        tags: Option<usize>,
        #[arg(long, default_value_t = 40)]
        query_count: usize,
        /// Write the generated graph as a SimpleGraph file.
        #[arg(long)]
        graph_out: Option<PathBuf>,
        /// Write the planted judged queries.
        #[arg(long)]
        queries_out: Option<PathBuf>,
    },
    /// Print corpus statistics and tag agreement.
    Stats {
        #[arg(long)]
        agreement: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<OntologyGraph> {
    let graph = if path.is_dir() {
        OntologyGraph::load_wordnet_dir(path)
    } else if path.is_file() {
        OntologyGraph::load_simple_graph_file(path)
    } else {
        return Err(CliError::Input(format!("no ontology at {}", path.display())));
    };
    graph.map_err(CliError::input)
}

impl CliConfig {
    fn graph(&self) -> Result<Arc<OntologyGraph>> {
        let path = self
            .ontology
            .as_deref()
            .ok_or_else(|| CliError::input("no ontology: pass --ontology or set WNTAGS_ONTOLOGY"))?;
        load_graph(path).map(Arc::new)
    }

    fn repo_path(&self) -> Result<&Path> {
        self.repo
            .as_deref()
            .ok_or_else(|| CliError::input("no repository: pass --repo or set WNTAGS_REPO"))
    }

    /// Loads the repository; a missing file is an empty repository when
    /// `create` is set.
    fn repository(&self, create: bool) -> Result<Repository> {
        let graph = self.graph()?;
        let path = self.repo_path()?;
        if create && !path.exists() {
            return Ok(Repository::new(graph));
        }
        Repository::load(open(path)?, graph)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    fn save(&self, repo: &Repository) -> Result<()> {
        let path = self.repo_path()?;
        save_atomic(repo, path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    fn table(&self) -> Result<Option<SimilarityTable>> {
        match &self.sim_pairs {
            None => Ok(None),
            Some(p) => load_similarity_pairs(open(p)?).map(Some).map_err(CliError::input),
        }
    }
}

fn range(raw: Option<&str>) -> Result<Option<ValueRange>> {
    raw.map(|r| r.parse::<ValueRange>().map_err(CliError::domain))
        .transpose()
}

fn sense_label(graph: &OntologyGraph, sense: &wntags::ontology::Sense) -> String {
    SenseKey::for_sense(graph, sense)
        .map(|k| k.to_string())
        .unwrap_or_else(|| sense.to_string())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.config;
    let mut stdout = io::stdout().lock();
    let out_err = |e: io::Error| CliError::input(e);
    match cli.command {
        Command::ImportWordnet { dir, simple, export } => {
            let path = dir.or(simple).expect("clap requires one source");
            let start = Instant::now();
            let graph = load_graph(&path)?;
            let s = graph.summary();
            writeln!(stdout, "synsets {}", s.synsets).map_err(out_err)?;
            writeln!(stdout, "senses {}", s.senses).map_err(out_err)?;
            writeln!(stdout, "lemmas {}", s.lemmas).map_err(out_err)?;
            writeln!(stdout, "taxonomy_edges {}", s.taxonomy_edges).map_err(out_err)?;
            writeln!(stdout, "partonomy_edges {}", s.partonomy_edges).map_err(out_err)?;
            eprintln!("loaded {} in {:.2} s", path.display(), start.elapsed().as_secs_f64());
            if let Some(target) = export {
                write_simple_graph(&graph, create(&target)?).map_err(out_err)?;
            }
        }
        Command::AddImage { uri, keyword, val, ar, dom } => {
            let mut repo = cfg.repository(true)?;
            let emotion = match (val, ar, dom) {
                (Some(v), Some(a), Some(d)) => Some(EmotionTuple::new(v, a, d).map_err(CliError::domain)?),
                _ => None,
            };
            let id = repo.add_image(&uri, keyword, emotion).map_err(CliError::domain)?.id;
            cfg.save(&repo)?;
            writeln!(stdout, "image {id}").map_err(out_err)?;
        }
        Command::Annotate { image, sense, weight, by } => {
            let mut repo = cfg.repository(false)?;
            let key: SenseKey = sense
                .parse()
                .map_err(|_| CliError::Input(format!("sense {sense:?} is not lemma#pos#n")))?;
            let resolved = key.resolve(repo.ontology()).ok_or_else(|| CliError::Domain {
                code: "unknown_sense",
                message: format!("unknown sense {key}"),
            })?;
            let record = repo
                .annotate(image, resolved.clone(), weight, &by)
                .map_err(CliError::domain)?;
            let tag = record.annotation(&resolved).expect("just annotated");
            let line = format!(
                "image {image}: {key} rated {weight} by {by}; mean {:.4} over {} raters",
                tag.mean_weight(),
                tag.ratings.len()
            );
            cfg.save(&repo)?;
            writeln!(stdout, "{line}").map_err(out_err)?;
        }
        Command::Commit { image } => {
            let mut repo = cfg.repository(false)?;
            let n = repo.commit(image).map_err(CliError::domain)?.sense_count();
            cfg.save(&repo)?;
            writeln!(stdout, "image {image} committed with {n} senses").map_err(out_err)?;
        }
        Command::Search { q, minrel, val, ar, dom, keyword, limit, csv } => {
            let repo = cfg.repository(false)?;
            let table = cfg.table()?;
            let options = SearchOptions {
                max_distance: cfg.maxd,
                min_relevance: minrel,
                limit,
                ..Default::default()
            };
            let filters = Filters {
                affect: AffectFilter {
                    valence: range(val.as_deref())?,
                    arousal: range(ar.as_deref())?,
                    dominance: range(dom.as_deref())?,
                },
                keyword,
            };
            let results = search_with_filters(&q, &repo, table.as_ref(), &options, &filters)
                .map_err(CliError::domain)?;
            let graph = repo.ontology();
            if csv {
                writeln!(stdout, "rank,image_id,relevance").map_err(out_err)?;
                for (i, r) in results.iter().enumerate() {
                    writeln!(stdout, "{},{},{:.6}", i + 1, r.image_id, r.relevance).map_err(out_err)?;
                }
            } else {
                writeln!(stdout, "{:<5} {:<8} {:<10} top matches", "rank", "image", "relevance").map_err(out_err)?;
                for (i, r) in results.iter().enumerate() {
                    let mut matches: Vec<_> = r.matches.iter().filter(|m| m.contribution > 0.0).collect();
                    matches.sort_by(|a, b| b.contribution.total_cmp(&a.contribution));
                    let top: Vec<String> = matches
                        .iter()
                        .take(3)
                        .map(|m| {
                            format!(
                                "{}~{} {:.4}",
                                sense_label(graph, &m.query_sense),
                                sense_label(graph, &m.image_sense),
                                m.contribution
                            )
                        })
                        .collect();
                    writeln!(stdout, "{:<5} {:<8} {:<10.6} {}", i + 1, r.image_id.0, r.relevance, top.join(", "))
                        .map_err(out_err)?;
                }
            }
        }
        Command::Evaluate { queries, subsample, seed, out } => {
            let judged = parse_judged_queries(open(&queries)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", queries.display())))?;
            let repo = cfg.repository(false)?;
            let table = cfg.table()?;
            let options = SearchOptions {
                max_distance: cfg.maxd,
                subsample: subsample.map(|f| (f, seed)),
                ..Default::default()
            };
            let report = run_benchmark(&judged, &repo, table.as_ref(), &options).map_err(CliError::domain)?;
            let failed = report.per_query.iter().filter(|q| q.error.is_some()).count();
            writeln!(stdout, "queries {}", report.per_query.len()).map_err(out_err)?;
            writeln!(stdout, "unanswered {failed}").map_err(out_err)?;
            writeln!(stdout, "mean_precision {:.6}", report.mean_precision).map_err(out_err)?;
            writeln!(stdout, "mean_result_count {:.6}", report.mean_result_count).map_err(out_err)?;
            if let Some(path) = out {
                emit_curve_csv(&report, create(&path)?).map_err(out_err)?;
            }
        }
        Command::Serve { bind } => serve(&cfg, &bind)?,
        Command::Synth { images, seed, out, graph_size, tags, query_count, graph_out, queries_out } => {
            let spec = SyntheticSpec {
                image_count: images,
                tag_count: tags.map_or(TagCountDistribution::REFERENCE, TagCountDistribution::Constant),
                graph_size,
                seed,
                query_count,
                relevance_distance: cfg.maxd,
                ..Default::default()
            };
            let ontology = cfg.ontology.as_ref().map(|_| cfg.graph()).transpose()?;
            let (repo, judged) = generate_synthetic_corpus(&spec, ontology).map_err(CliError::domain)?;
            save_atomic(&repo, &out).map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
            if let Some(path) = graph_out {
                write_simple_graph(repo.ontology(), create(&path)?).map_err(out_err)?;
            }
            if let Some(path) = queries_out {
                write_judged_queries(&judged, create(&path)?).map_err(out_err)?;
            }
            let s = repo.corpus_stats();
            writeln!(
                stdout,
                "images {} median {} mean {:.2} sd {:.2} min {} max {} queries {}",
                s.image_count, s.tag_count_median, s.tag_count_mean, s.tag_count_sd,
                s.tag_count_min, s.tag_count_max, judged.len()
            )
            .map_err(out_err)?;
        }
        Command::Stats { agreement } => {
            let repo = cfg.repository(false)?;
            let s = repo.corpus_stats();
            if s.empty {
                writeln!(stdout, "empty repository").map_err(out_err)?;
            } else {
                writeln!(
                    stdout,
                    "images {} median {} mean {:.2} sd {:.2} min {} max {} synsets {}",
                    s.image_count, s.tag_count_median, s.tag_count_mean, s.tag_count_sd,
                    s.tag_count_min, s.tag_count_max, s.distinct_synset_count
                )
                .map_err(out_err)?;
            }
            if agreement {
                let report = repo.agreement_report(&AgreementConfig::default()).map_err(CliError::domain)?;
                match report.overall {
                    Some(k) => writeln!(stdout, "overall_kappa {k:.4}"),
                    None => writeln!(stdout, "overall_kappa n/a"),
                }
                .map_err(out_err)?;
                for t in report.tags.iter().filter(|t| t.inadequate) {
                    writeln!(stdout, "low_agreement image {} {} kappa {:.4}", t.image, sense_label(repo.ontology(), &t.sense), t.kappa)
                        .map_err(out_err)?;
                }
            }
        }
    }
    Ok(())
}

fn serve(cfg: &CliConfig, bind: &str) -> Result<()> {
    let repo = cfg.repository(true)?;
    let mut state = AppState::new(repo).with_store(cfg.repo_path()?);
    if let Some(table) = cfg.table()? {
        state = state.with_table(table);
    }
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::input)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .map_err(|e| CliError::Input(format!("cannot bind {bind}: {e}")))?;
        let addr = listener.local_addr().map_err(CliError::input)?;
        println!("listening on {addr}");
        io::stdout().flush().map_err(CliError::input)?;
        wntags_service::serve(listener, Arc::new(state), shutdown_signal())
            .await
            .map_err(CliError::input)?;
        eprintln!("repository flushed");
        Ok(())
    })
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        let mut term = signal(SignalKind::terminate()).expect("signal handler");
        tokio::select! {
            _ = tokio::signal::ctrl_c() => {}
            _ = term.recv() => {}
        }
    }
    #[cfg(not(unix))]
    {
        let _ = tokio::signal::ctrl_c().await;
    }
}
