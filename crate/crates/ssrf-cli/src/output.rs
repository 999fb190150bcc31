//! Table formatting and atomic file output.
//!
//! Numbers are printed with 17 significant digits (`{:.16e}`), which
//! round-trips every f64 exactly. Files are written to a temporary sibling
//! and renamed into place so readers never observe partial tables.

use std::io::Write as _;
use std::path::Path;

use crate::config::CliError;

/// 17-significant-digit scientific form, round-trip exact for f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp-write");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes to `path` atomically, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, content.as_bytes()),
        None => {
            print!("{content}");
            std::io::stdout().flush()?;
            Ok(())
        }
    }
}
