pub mod bell;
pub mod calibrate;
pub mod histogram;
pub mod interference;
pub mod replay;

use std::path::{Path, PathBuf};

use crate::config::FileConfig;
use crate::{CliError, RunArgs};

/// Load config, apply flag overrides, and prepare the output directory.
pub fn setup(args: &RunArgs) -> Result<(FileConfig, PathBuf, usize), CliError> {
    let mut config = FileConfig::load(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(workers) = args.workers {
        config.workers = Some(workers);
    }
    let workers = config
        .workers
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8)
        })
        .max(1);
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", args.out.display())))?;
    Ok((config, args.out.clone(), workers))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {name}: {e}")))
}

pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(CliError::runtime)
}
