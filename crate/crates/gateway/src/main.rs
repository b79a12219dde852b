use std::io::BufRead;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use roberto_core::dialogue::Inbound;
use roberto_gateway::api::{router, AppState};
use roberto_gateway::outbound::{Console, Outbox};
use roberto_gateway::simulate::{run_script, Script};
use roberto_gateway::{bundled_engine, ChannelKind, Config, Gateway, SystemClock};
use roberto_store::Store;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "roberto", version, about = "Medication reminder chat service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the webhook, the provider API and the clock loop.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        bind: Option<SocketAddr>,
        /// Event log file; created when missing.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Talk to a local instance on the terminal. Type a number to press a
    /// button, `/tick` to run the clock loop now, `/quit` to leave.
    Chat {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "roberto-chat.log")]
        log: PathBuf,
        #[arg(long, default_value_t = 1)]
        chat_id: i64,
    },
    /// Replay a scripted conversation on a virtual clock and print the
    /// transcript.
    Simulate {
        script: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the transcript here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<Config, String> {
    path.map_or_else(|| Ok(Config::default()), |p| Config::load(p).map_err(|e| e.to_string()))
}

fn init_logging(default: &str) {
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve { config, bind, log } => {
            init_logging("info");
            serve(config.as_deref(), bind, log)
        }
        Command::Chat { config, log, chat_id } => {
            init_logging("warn");
            chat(config.as_deref(), &log, chat_id)
        }
        Command::Simulate { script, config, out } => {
            init_logging("warn");
            simulate(&script, config.as_deref(), out.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn serve(config: Option<&Path>, bind: Option<SocketAddr>, log: Option<PathBuf>) -> Result<(), String> {
    let mut config = load_config(config)?;
    if let Some(bind) = bind {
        config.bind = bind;
    }
    if let Some(log) = log {
        config.log_path = log;
    }
    let store = Arc::new(Store::open(&config.log_path).map_err(|e| e.to_string())?);
    let outbox = Arc::new(Outbox::new());
    let gateway = Arc::new(Gateway::new(
        store,
        bundled_engine(),
        Arc::new(SystemClock),
        outbox.clone(),
        config.clone(),
    ));
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async move {
        let ticker = gateway.clone();
        let interval = Duration::from_secs(config.tick_interval_secs);
        tokio::spawn(async move {
            let mut timer = tokio::time::interval(interval);
            loop {
                timer.tick().await;
                let g = ticker.clone();
                match tokio::task::spawn_blocking(move || g.tick()).await {
                    Ok(Ok(report)) => tracing::debug!(?report, "tick"),
                    Ok(Err(e)) => tracing::error!("tick failed: {e}"),
                    Err(e) => tracing::error!("tick task failed: {e}"),
                }
            }
        });
        let listener = tokio::net::TcpListener::bind(config.bind)
            .await
            .map_err(|e| format!("cannot bind {}: {e}", config.bind))?;
        tracing::info!(addr = %config.bind, log = %config.log_path.display(), "serving");
        let app = router(AppState {
            gateway,
            outbox: Some(outbox),
        });
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| e.to_string())
    })
}

fn chat(config: Option<&Path>, log: &Path, chat_id: i64) -> Result<(), String> {
    let config = load_config(config)?;
    let store = Arc::new(Store::open(log).map_err(|e| e.to_string())?);
    let gateway = Arc::new(Gateway::new(
        store,
        bundled_engine(),
        Arc::new(SystemClock),
        Arc::new(Console::stdout()),
        config.clone(),
    ));
    let ticker = gateway.clone();
    let interval = Duration::from_secs(config.tick_interval_secs);
    std::thread::spawn(move || loop {
        std::thread::sleep(interval);
        if let Err(e) = ticker.tick() {
            tracing::error!("tick failed: {e}");
        }
    });
    println!("Connected as chat {chat_id}. Say hello to start.");
    for line in std::io::stdin().lock().lines() {
        let line = line.map_err(|e| e.to_string())?;
        let line = line.trim();
        match line {
            "" => continue,
            "/quit" => break,
            "/tick" => {
                gateway.tick().map_err(|e| e.to_string())?;
                continue;
            }
            _ => {}
        }
        let inbound = match line.parse::<usize>() {
            Ok(n) => match latest_button(&gateway, chat_id, n) {
                Some(token) => Inbound::Callback(token),
                None => Inbound::Text(line.to_owned()),
            },
            Err(_) => Inbound::Text(line.to_owned()),
        };
        let update = gateway
            .normalize(ChannelKind::Console, chat_id, inbound)
            .map_err(|e| e.to_string())?;
        if let Err(e) = gateway.handle(&update) {
            eprintln!("error: {e}");
        }
    }
    Ok(())
}

/// Callback token of the `n`-th button (1-based) on the latest message with
/// buttons.
fn latest_button(gateway: &Gateway, chat_id: i64, n: usize) -> Option<String> {
    let snapshot = gateway.store().snapshot();
    let view = snapshot.patient(snapshot.patient_for_chat(chat_id)?)?;
    let last = view.deliveries.iter().rev().find(|d| !d.message.quick_replies.is_empty())?;
    let reply = last.message.quick_replies.get(n.checked_sub(1)?)?;
    Some(reply.callback_token.clone())
}

fn simulate(script: &Path, config: Option<&Path>, out: Option<&Path>) -> Result<(), String> {
    let config = load_config(config)?;
    let text = std::fs::read_to_string(script).map_err(|e| format!("{}: {e}", script.display()))?;
    let script = Script::parse(&text).map_err(|e| e.to_string())?;
    let transcript = run_script(&script, config).map_err(|e| e.to_string())?;
    match out {
        Some(path) => std::fs::write(path, transcript).map_err(|e| e.to_string()),
        None => {
            print!("{transcript}");
            Ok(())
        }
    }
}
