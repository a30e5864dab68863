//! The `lwroots` command line.
//!
//! Exit codes: 0 success; for `member` 0/1/2 mean member/not_member/
//! undecided; 64 usage error; 65 malformed number; 70 domain error; 74 I/O.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use num_complex::Complex64;

use crate::density::{self, Viewport};
use crate::dragon::{MembershipStatus, DEFAULT_NODE_BUDGET};
use crate::error::Error;
use crate::render::{self, ColorMap};
use crate::service::{self, ServiceConfig};
use crate::DragonQuery;

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(name = "lwroots", version, about = "Littlewood polynomial roots, dragons and membership certificates")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve every polynomial with N terms and write the root cache.
    Precompute {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        cache: PathBuf,
    },
    /// Render the root density of X_N to a PNG.
    Render {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = parse_complex, default_value = "0,0")]
        center: Complex64,
        #[arg(long, default_value_t = 2.05)]
        half_width: f64,
        #[arg(long, value_parser = parse_size, default_value = "1024x1024")]
        size: (u32, u32),
        #[arg(long)]
        out: PathBuf,
        /// Read/write the root cache here.
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long, default_value = "gray")]
        map: String,
        /// Also write the raw counts as plain PGM.
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Render the dragon D_q to a PNG.
    Dragon {
        #[arg(long, value_parser = parse_complex)]
        q: Complex64,
        #[arg(long, default_value_t = 20)]
        depth: u32,
        #[arg(long, default_value_t = 512)]
        size: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "gray")]
        map: String,
    },
    /// Decide 0 in D_q (equivalently q in the closure of X) and print JSON.
    Member {
        #[arg(long, value_parser = parse_complex)]
        q: Complex64,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 96)]
        max_depth: u32,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: u64,
    },
    /// X_N near q beside D_q.
    Compare {
        #[arg(long, value_parser = parse_complex)]
        q: Complex64,
        #[arg(long)]
        window: f64,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 20)]
        depth: u32,
        #[arg(long, default_value_t = 256)]
        size: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long, default_value = "gray")]
        map: String,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Parses `RE,IM`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got {s:?}"))?;
    let num = |t: &str| {
        t.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| format!("not a finite number: {t:?}"))
    };
    Ok(Complex64::new(num(re)?, num(im)?))
}

/// Parses `WxH`.
pub fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let num = |t: &str| {
        t.trim().parse::<u32>().ok().filter(|&v| v > 0).ok_or_else(|| format!("not a positive pixel count: {t:?}"))
    };
    Ok((num(w)?, num(h)?))
}

/// Runs the CLI against the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return 0;
                }
                ErrorKind::ValueValidation => EXIT_DATA,
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "lwroots: {e}");
            match e {
                Error::Io(_) | Error::Cache { .. } | Error::CacheMismatch { .. } => EXIT_IO,
                _ => EXIT_SOFTWARE,
            }
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> crate::Result<i32> {
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
        .max(1);
    match cli.command {
        Command::Precompute { n, cache } => {
            let path = density::cache_path(&cache, n);
            let buffer = density::load_or_solve(n, threads, Some(&cache))?;
            writeln!(err, "lwroots: {} roots for n={n} in {}", buffer.len(), path.display())?;
        }
        Command::Render { n, center, half_width, size, out: file, cache, map, pgm } => {
            let map = ColorMap::by_name(&map)?;
            let viewport = Viewport::new(center, half_width, size.0, size.1)?;
            let grid = density::compute_density(n, &viewport, threads, cache.as_deref())?;
            fs::write(&file, render::encode_png(&render::shade(&grid, &map))?)?;
            if let Some(pgm) = pgm {
                fs::write(pgm, render::encode_pgm(&grid))?;
            }
        }
        Command::Dragon { q, depth, size, out: file, map } => {
            let map = ColorMap::by_name(&map)?;
            let image = render::render_dragon(DragonQuery::new(q)?, depth, size, &map)?;
            fs::write(&file, render::encode_png(&image)?)?;
        }
        Command::Member { q, eps, max_depth, node_budget } => {
            let verdict = service::member_query(q, eps, max_depth, node_budget, None)?;
            writeln!(out, "{}", service::verdict_json(&verdict))?;
            return Ok(match verdict.status {
                MembershipStatus::Member => 0,
                MembershipStatus::NotMember => 1,
                MembershipStatus::Undecided => 2,
            });
        }
        Command::Compare { q, window, n, depth, size, out: file, cache, map } => {
            let map = ColorMap::by_name(&map)?;
            let roots = density::load_or_solve(n, threads, cache.as_deref())?;
            let image = render::compare_panel(q, window, &roots, depth, size, &map, threads)?;
            fs::write(&file, render::encode_png(&image)?)?;
        }
        Command::Serve { config } => {
            let mut cfg = match config {
                Some(path) => ServiceConfig::from_file(&path)?,
                None => ServiceConfig::default(),
            };
            cfg.apply_env(std::env::vars())?;
            let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            runtime.block_on(service::serve(cfg))?;
        }
    }
    Ok(0)
}
