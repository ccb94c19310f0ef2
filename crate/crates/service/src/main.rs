use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gwat_core::export::StoreImage;
use gwat_core::store::AnnotationStore;
use gwat_service::api::ExportFormat;
use gwat_service::config::Settings;
use gwat_service::{build_state, load_catalog, load_lexicon, router};

#[derive(Parser)]
#[command(name = "gwat", version, about = "Annotate GAPED pictures with WordNet synsets")]
struct Cli {
    #[command(flatten)]
    options: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Options {
    /// TOML config file; flags and environment variables take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// WordNet dict directory holding data.noun, data.verb, data.adj, data.adv [env: GWAT_DICT]
    #[arg(long, global = true)]
    dict: Option<PathBuf>,
    /// GAPED root with A, H, N, P, Sn, Sp folders [env: GWAT_GAPED]
    #[arg(long, global = true)]
    gaped: Option<PathBuf>,
    /// Picture filename manifest, one name per line [env: GWAT_MANIFEST]
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Annotation store file [env: GWAT_DB] [default: gwat.db]
    #[arg(long, global = true)]
    db: Option<PathBuf>,
    /// Listen address host:port [env: GWAT_LISTEN] [default: 127.0.0.1:8080]
    #[arg(long, global = true)]
    listen: Option<String>,
    /// Maximum synsets per search response [default: 500]
    #[arg(long, global = true)]
    search_limit: Option<usize>,
    /// Directory of built web UI assets served under /
    #[arg(long, global = true)]
    ui_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Load dictionary and pictures, then serve the HTTP API
    Serve,
    /// Validate the dictionary and picture source and print counts
    Ingest,
    /// Write the annotations as SQL, CSV or JSON
    Export {
        #[arg(long, default_value = "sql")]
        format: String,
        /// Output file; standard output when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print annotation counts
    Stats,
}

fn settings(options: &Options) -> anyhow::Result<Settings> {
    let flags = Settings {
        dict: options.dict.clone(),
        gaped: options.gaped.clone(),
        manifest: options.manifest.clone(),
        db: options.db.clone(),
        listen: options.listen.clone(),
        search_limit: options.search_limit,
        ui_dir: options.ui_dir.clone(),
    };
    let env = Settings::from_env(|key| std::env::var(key).ok());
    let file = match &options.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    Ok(Settings::layered(&[flags, env, file]))
}

async fn serve(settings: Settings) -> anyhow::Result<()> {
    let config = settings.service_config()?;
    let state = tokio::task::spawn_blocking({
        let config = config.clone();
        move || build_state(&config)
    })
    .await??;
    let app = router(state, config.ui_dir.clone());
    let listener = tokio::net::TcpListener::bind(&config.listen_address)
        .await
        .with_context(|| format!("cannot listen on {}", config.listen_address))?;
    tracing::info!(address = %listener.local_addr()?, "serving");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn ingest(settings: Settings) -> anyhow::Result<()> {
    let (lexicon, report) = load_lexicon(&settings.dict_dir()?)?;
    let catalog = load_catalog(&settings.picture_source()?)?;
    let counts = lexicon.counts();
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "synsets: {} (noun {}, verb {}, adjective {}, adverb {})",
        counts.total(),
        counts.noun,
        counts.verb,
        counts.adjective,
        counts.adverb
    )?;
    writeln!(out, "index files checked: {}", report.index_files_checked.len())?;
    writeln!(out, "index warnings: {}", report.warnings.len())?;
    writeln!(out, "pictures: {}", catalog.len())?;
    if let (Ok(first), Ok(last)) = (catalog.first(), catalog.last()) {
        writeln!(out, "first: {}", first.filename)?;
        writeln!(out, "last: {}", last.filename)?;
    }
    Ok(())
}

fn export(settings: Settings, format: &str, out: Option<PathBuf>) -> anyhow::Result<()> {
    let format = ExportFormat::parse(format)
        .with_context(|| format!("unknown export format {format:?}, expected sql, csv or json"))?;
    let (lexicon, _) = load_lexicon(&settings.dict_dir()?)?;
    let store = AnnotationStore::open(settings.store_path())?;
    let text = format.render(&StoreImage::capture(&store, &lexicon)?);
    match out {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn stats(settings: Settings) -> anyhow::Result<()> {
    let store = AnnotationStore::open(settings.store_path())?;
    let stats = store.stats()?;
    println!("annotations: {}", stats.total_annotations);
    println!("annotated pictures: {}", stats.annotated_pictures);
    println!("distinct synsets: {}", stats.distinct_synsets);
    Ok(())
}

/// Machine-readable code of the first library error in the chain.
fn error_code(err: &anyhow::Error) -> Option<&'static str> {
    use gwat_core::catalog::CatalogError;
    use gwat_core::export::ExportError;
    use gwat_core::lexicon::LexiconError;
    use gwat_core::store::StoreError;
    use gwat_service::StartupError;

    err.chain().find_map(|cause| {
        if let Some(e) = cause.downcast_ref::<StartupError>() {
            return match e {
                StartupError::Config(_) => Some("invalid_config"),
                StartupError::Lexicon(e) => Some(e.code()),
                StartupError::Catalog(e) => Some(e.code()),
                StartupError::Store(e) => Some(e.code()),
            };
        }
        cause
            .downcast_ref::<LexiconError>()
            .map(LexiconError::code)
            .or_else(|| cause.downcast_ref::<CatalogError>().map(CatalogError::code))
            .or_else(|| cause.downcast_ref::<StoreError>().map(StoreError::code))
            .or_else(|| cause.downcast_ref::<ExportError>().map(ExportError::code))
    })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = settings(&cli.options).and_then(|settings| match cli.command {
        Command::Serve => tokio::runtime::Runtime::new()?.block_on(serve(settings)),
        Command::Ingest => ingest(settings),
        Command::Export { format, out } => export(settings, &format, out),
        Command::Stats => stats(settings),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match error_code(&err) {
                Some(code) => eprintln!("error [{code}]: {err:#}"),
                None => eprintln!("error: {err:#}"),
            }
            ExitCode::FAILURE
        }
    }
}
