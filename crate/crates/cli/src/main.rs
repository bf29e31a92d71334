//! `vca`: run composition scripts, serve the HTTP API, print the API document.

use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vca_dsl::{parse, print_script, render, Session, Statement};

#[derive(Parser)]
#[command(name = "vca", version, about = "View composition scripts and service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a .vca script, printing each statement's result.
    Run {
        script: PathBuf,
        /// Write the SQL of every bound view to FILE, or to stdout when no FILE is given.
        #[arg(long, value_name = "FILE", num_args = 0..=1, default_missing_value = "-")]
        emit_sql: Option<String>,
        /// Write `<name>.json` (spec and rows) for every binding into DIR.
        #[arg(long, value_name = "DIR")]
        json_out: Option<PathBuf>,
        /// Seed for randomized steps. The engine currently has none; the value is validated and echoed.
        #[arg(long, env = "VCA_SEED")]
        seed: Option<u64>,
    },
    /// Parse a script and print it in normal form.
    Fmt { script: PathBuf },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = vca_service::DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
    /// Print the OpenAPI document.
    Openapi,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            script,
            emit_sql,
            json_out,
            seed,
        } => run(&script, emit_sql.as_deref(), json_out.as_deref(), seed),
        Command::Fmt { script } => fmt(&script),
        Command::Serve { port, host } => serve(SocketAddr::new(host, port)),
        Command::Openapi => {
            println!(
                "{}",
                serde_json::to_string_pretty(&vca_service::openapi::document()).expect("serializable")
            );
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn read(script: &Path) -> Result<String, String> {
    fs::read_to_string(script).map_err(|e| format!("cannot read {}: {e}", script.display()))
}

fn fmt(script: &Path) -> Result<(), String> {
    let src = read(script)?;
    let stmts = parse(&src).map_err(|e| format!("{}:{e}", script.display()))?;
    let stmts: Vec<Statement> = stmts.into_iter().map(|l| l.stmt).collect();
    print!("{}", print_script(&stmts));
    Ok(())
}

/// File-system-safe version of a binding name.
fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Bound names in the order they were first bound.
fn bound_names(s: &Session) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for st in s.log() {
        let name = match st {
            Statement::DefView { name, .. } | Statement::Assign { name, .. } => name,
            _ => continue,
        };
        if !names.contains(name) {
            names.push(name.clone());
        }
    }
    names
}

fn run(script: &Path, emit_sql: Option<&str>, json_out: Option<&Path>, seed: Option<u64>) -> Result<(), String> {
    if let Some(seed) = seed {
        eprintln!("seed: {seed}");
    }
    let src = read(script)?;
    let shown = script.display();
    let stmts = parse(&src).map_err(|e| format!("{shown}:{e}"))?;
    let base = script
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut session = Session::new(base);
    for located in &stmts {
        let out = session.eval(located).map_err(|e| format!("{shown}:{e}"))?;
        for w in &out.warnings {
            eprintln!("warning[{}]: {}", w.code, w.message);
        }
        for n in &out.notices {
            eprintln!("note: {n}");
        }
        if !out.output.is_empty() {
            println!("{}", out.output.trim_end());
        }
    }
    let names = bound_names(&session);
    if let Some(target) = emit_sql {
        let mut text = String::new();
        for name in &names {
            let op = session.get(name).expect("bound");
            match render::sql(session.context(), op) {
                Ok(parts) => {
                    for (label, sql) in parts {
                        text.push_str(&format!("-- {name}: {label}\n{sql};\n\n"));
                    }
                }
                Err(e) => text.push_str(&format!("-- {name}: not expressible in SQL ({e})\n\n")),
            }
        }
        if target == "-" {
            print!("{text}");
            std::io::stdout().flush().map_err(|e| e.to_string())?;
        } else {
            fs::write(target, text).map_err(|e| format!("cannot write {target}: {e}"))?;
        }
    }
    if let Some(dir) = json_out {
        fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        for name in &names {
            let op = session.get(name).expect("bound");
            let json = render::operand_json(session.context(), op).map_err(|e| format!("{name}: {e}"))?;
            let path = dir.join(format!("{}.json", file_stem(name)));
            let text = serde_json::to_string_pretty(&json).expect("serializable");
            fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        }
    }
    Ok(())
}

fn serve(addr: SocketAddr) -> Result<(), String> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    eprintln!("listening on http://{addr}");
    rt.block_on(vca_service::serve(addr))
        .map_err(|e| format!("{addr}: {e}"))
}
