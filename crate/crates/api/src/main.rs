use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand};

use pkg_api::cli::{self, is_sparql, parse_pattern};
use pkg_api::{http, Config, Pkg};
use pkg_core::store::TextOutcome;

#[derive(Parser)]
#[command(name = "pkg", version, about = "Personal knowledge graph service")]
struct Args {
    /// TOML configuration file.
    #[arg(long, short, global = true, env = "PKG_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the REST API.
    Serve,
    /// Add one natural-language statement per line of FILE (- for stdin).
    Ingest {
        file: PathBuf,
        #[arg(long, default_value = "me")]
        owner: String,
    },
    /// Query an owner's statements with `s | p | o`, or run SPARQL text.
    Query {
        pattern: String,
        #[arg(long, default_value = "me")]
        owner: String,
    },
    /// Print an owner's graph as Turtle.
    Export { owner: String },
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let args = Args::parse();
    let config = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let pkg = Pkg::from_config(&config)?;
    match args.command {
        Command::Serve => serve(config, pkg),
        Command::Ingest { file, owner } => {
            let stdout = std::io::stdout().lock();
            let summary = if file.as_os_str() == "-" {
                cli::ingest(&pkg, &owner, std::io::stdin().lock(), stdout)?
            } else {
                let f = std::fs::File::open(&file).with_context(|| format!("opening {}", file.display()))?;
                cli::ingest(&pkg, &owner, BufReader::new(f), stdout)?
            };
            tracing::info!(ok = summary.ok, failed = summary.failed, "ingest finished");
            Ok(())
        }
        Command::Query { pattern, owner } => {
            let acc = pkg.local_access(&owner)?;
            let mut out = std::io::stdout().lock();
            if is_sparql(&pattern) {
                match pkg.store().execute_text(&pattern)? {
                    TextOutcome::Results(r) => write!(out, "{}", r.to_tsv())?,
                    TextOutcome::Revision(rev) => {
                        pkg.persist()?;
                        writeln!(out, "revision {rev}")?
                    }
                }
            } else {
                let found = pkg.find_statements(&acc, parse_pattern(&pattern)?)?;
                writeln!(out, "{}", serde_json::to_string_pretty(&found)?)?;
            }
            Ok(())
        }
        Command::Export { owner } => {
            let acc = pkg.local_access(&owner)?;
            print!("{}", pkg.export(&acc)?);
            Ok(())
        }
    }
}

fn serve(config: Config, pkg: Pkg) -> anyhow::Result<()> {
    if config.admin_token.is_none() {
        tracing::warn!("no admin_token configured: owners and services cannot be registered over HTTP");
    }
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(config.listen).await.with_context(|| format!("binding {}", config.listen))?;
        tracing::info!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, http::router(Arc::new(pkg)))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
