use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Provenance written as `#` lines at the top of every CSV.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(&format!("creating {}", dir.display()), e))
}

/// Opens `dir/name`, writes the metadata lines and returns a CSV writer.
pub fn csv_file(dir: &Path, name: &str, header: &Header) -> Result<(csv::Writer<BufWriter<File>>, PathBuf), CliError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::io(&format!("creating {}", path.display()), e))?;
    let mut w = BufWriter::new(file);
    let meta = format!(
        "# wetbench {}\n# config_sha256: {}\n# seed: {}\n",
        header.command, header.config_hash, header.seed
    );
    w.write_all(meta.as_bytes())
        .map_err(|e| CliError::io(&format!("writing {}", path.display()), e))?;
    Ok((csv::Writer::from_writer(w), path))
}

pub fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<(), CliError> {
    w.flush()
        .map_err(|e| CliError::io(&format!("writing {}", path.display()), e))
}
