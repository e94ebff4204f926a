//! One module per subcommand plus small shared output helpers.

pub mod baseline;
pub mod digits;
pub mod eval_dqn;
pub mod play_e2e;
pub mod swipes;
pub mod train_dqn;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub fn ensure_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))
}

/// Write a file through a buffered writer, flushing before close.
pub fn write_file<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn out_path(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}

/// Every CSV opens with a schema tag so downstream diffs notice layout
/// changes; readers treat `#` lines as comments.
pub fn schema_header<W: io::Write>(w: &mut W, name: &str) -> io::Result<()> {
    writeln!(w, "# schema: {name} v1")
}
