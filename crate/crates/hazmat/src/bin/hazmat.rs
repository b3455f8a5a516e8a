//! Command-line front end. All logic lives in the library; this binary only
//! parses arguments, moves bytes between files and picks exit codes:
//! 0 success, 1 domain error (bad card, failed check), 2 usage error.

use clap::{Args, Parser, Subcommand};
use hazmat::card::{card_from_dump, card_to_dump, decode_card, encode_card, CardBlob};
use hazmat::dispatch::{handle_connection, EventStore};
use hazmat::registry::load_registry;
use hazmat::sim::{run_from_file, write_outputs};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::{Arc, Mutex};

#[derive(Parser)]
#[command(name = "hazmat", version, about = "Hazardous-materials transport safety toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode, decode, inspect or verify 512-byte hazard card images
    Card {
        #[command(subcommand)]
        action: CardAction,
    },
    /// Resolve a card against an offline code registry (intervention sheet)
    Portable(PortableArgs),
    /// Run a scenario end to end and write all logs
    Simulate(SimulateArgs),
    /// Query a dispatch persistence log
    Query(QueryArgs),
    /// Registry maintenance
    Registry {
        #[command(subcommand)]
        action: RegistryAction,
    },
    /// Dispatch-side services
    Dispatch {
        #[command(subcommand)]
        action: DispatchAction,
    },
}

#[derive(Subcommand)]
enum CardAction {
    /// Build a card image from a field dump
    Encode {
        /// Field dump, one `field: value` line per field
        #[arg(long)]
        input: PathBuf,
        /// Output card image (512 bytes)
        #[arg(long)]
        output: PathBuf,
    },
    /// Dump the fields of a card image
    Decode {
        /// Card image (512 bytes)
        #[arg(long)]
        input: PathBuf,
        /// Output dump; stdout when omitted
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Human-oriented view: fields plus integrity status
    Inspect {
        #[arg(long)]
        input: PathBuf,
    },
    /// Check the integrity checksum; exit 1 on mismatch
    Verify {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args)]
struct PortableArgs {
    /// Card image (512 bytes)
    #[arg(long)]
    card: PathBuf,
    /// Registry root folder
    #[arg(long)]
    registry: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (JSON)
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for all run artifacts
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    /// Dispatch persistence log to replay
    #[arg(long)]
    log: PathBuf,
    #[command(subcommand)]
    what: QueryWhat,
}

#[derive(Subcommand)]
enum QueryWhat {
    /// Portal passages of one truck, time-ascending
    Track {
        #[arg(long)]
        t_id: u64,
    },
    /// All alerts, newest first
    Alerts,
    /// Summary over a half-open time range [from, to)
    Report {
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
    },
}

#[derive(Subcommand)]
enum RegistryAction {
    /// Create the folder layout with a small starter data set
    Init {
        #[arg(long)]
        root: PathBuf,
    },
}

#[derive(Subcommand)]
enum DispatchAction {
    /// Accept wire frames on a TCP socket, append to a persistence log
    Serve {
        /// Listen address, e.g. 127.0.0.1:4710
        #[arg(long)]
        listen: String,
        /// Persistence log file (loaded if present, rewritten on each frame)
        #[arg(long)]
        log: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch_command(command: Command) -> Result<(), String> {
    match command {
        Command::Card { action } => card_command(action),
        Command::Portable(args) => portable(args),
        Command::Simulate(args) => simulate(args),
        Command::Query(args) => query(args),
        Command::Registry { action } => registry_command(action),
        Command::Dispatch { action } => dispatch_serve(action),
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn card_command(action: CardAction) -> Result<(), String> {
    match action {
        CardAction::Encode { input, output } => {
            let text = std::fs::read_to_string(&input).map_err(err)?;
            let card = card_from_dump(&text).map_err(err)?;
            let blob = encode_card(&card).map_err(err)?;
            std::fs::write(&output, blob.as_bytes()).map_err(err)?;
            println!("wrote {} (512 bytes, ecc={:016X})", output.display(), blob.stored_ecc());
        }
        CardAction::Decode { input, output } => {
            let bytes = std::fs::read(&input).map_err(err)?;
            let card = decode_card(&bytes).map_err(err)?;
            let dump = card_to_dump(&card);
            match output {
                Some(path) => std::fs::write(&path, dump).map_err(err)?,
                None => print!("{dump}"),
            }
        }
        CardAction::Inspect { input } => {
            let bytes = std::fs::read(&input).map_err(err)?;
            let blob = CardBlob::from_bytes(&bytes).map_err(err)?;
            match decode_card(&bytes) {
                Ok(card) => {
                    print!("{}", card_to_dump(&card));
                    println!("ecc: {:016X} (ok)", blob.stored_ecc());
                }
                Err(e) => {
                    println!("ecc: {:016X}", blob.stored_ecc());
                    return Err(e.to_string());
                }
            }
        }
        CardAction::Verify { input } => {
            let bytes = std::fs::read(&input).map_err(err)?;
            decode_card(&bytes).map_err(err)?;
            println!("ok");
        }
    }
    Ok(())
}

fn portable(args: PortableArgs) -> Result<(), String> {
    let bytes = std::fs::read(&args.card).map_err(err)?;
    // a corrupted card must never reach the intervention crew
    let card = decode_card(&bytes).map_err(err)?;
    let registry = load_registry(&args.registry).map_err(err)?;
    for warning in &registry.warnings {
        eprintln!("warning: {warning:?}");
    }
    print!("{}", registry.resolve_card(&card).render());
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), String> {
    let out = run_from_file(&args.scenario).map_err(err)?;
    write_outputs(&out, &args.out).map_err(err)?;
    print!("{}", out.metrics.render());
    println!("artifacts in {}", args.out.display());
    Ok(())
}

fn query(args: QueryArgs) -> Result<(), String> {
    let text = std::fs::read_to_string(&args.log).map_err(err)?;
    let store = EventStore::replay(&text).map_err(err)?;
    match args.what {
        QueryWhat::Track { t_id } => {
            let rows = store.track(t_id);
            if rows.is_empty() {
                println!("no passages for truck {t_id}");
            }
            for (portal, t) in rows {
                println!("{t:10.3}  portal {portal}");
            }
        }
        QueryWhat::Alerts => {
            let alerts = store.active_alerts();
            if alerts.is_empty() {
                println!("no alerts");
            }
            for a in alerts {
                let pos = match a.position {
                    Some((lat, lon)) => format!("{lat:.6},{lon:.6}"),
                    None => "unknown position".to_string(),
                };
                println!(
                    "{:10.3}  {}  unit {} seq {}  {}  substance {}",
                    a.t, a.alarm_code, a.unit_id, a.seq_no, pos, a.card.s_id
                );
            }
        }
        QueryWhat::Report { from, to } => {
            let summary = store.report(from, to).map_err(err)?;
            print!("{}", summary.render());
        }
    }
    Ok(())
}

fn registry_command(action: RegistryAction) -> Result<(), String> {
    match action {
        RegistryAction::Init { root } => {
            hazmat::fixtures::write_registry(&root).map_err(err)?;
            println!("registry initialized at {}", root.display());
        }
    }
    Ok(())
}

fn dispatch_serve(action: DispatchAction) -> Result<(), String> {
    match action {
        DispatchAction::Serve { listen, log } => {
            let store = match std::fs::read_to_string(&log) {
                Ok(text) => EventStore::replay(&text).map_err(err)?,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => EventStore::new(),
                Err(e) => return Err(e.to_string()),
            };
            let store = Arc::new(Mutex::new(store));
            let listener = std::net::TcpListener::bind(&listen).map_err(err)?;
            eprintln!("listening on {listen}");
            for stream in listener.incoming() {
                let mut stream = stream.map_err(err)?;
                let store = Arc::clone(&store);
                let log = log.clone();
                std::thread::spawn(move || {
                    let _ = handle_connection(&mut stream, &store);
                    let guard = store.lock().expect("store poisoned");
                    let _ = std::fs::write(&log, guard.persistence_log());
                });
            }
            Ok(())
        }
    }
}
