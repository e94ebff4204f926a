//! Run manifests: every command writes one next to its outputs. The
//! manifest doubles as a config file, so feeding it back through
//! `--config` reruns the command with identical settings and outputs.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

pub fn write_manifest(out_dir: &Path, command: &str, echo: &[(String, String)]) -> Result<()> {
    let path = out_dir.join("manifest.txt");
    let mut f = fs::File::create(&path)
        .with_context(|| format!("creating manifest {}", path.display()))?;
    writeln!(f, "# swipe48 run manifest")?;
    writeln!(f, "# command: {command}")?;
    writeln!(f, "# version: {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(f, "# rerun: swipe48 {command} --config manifest.txt --out <dir>")?;
    for (key, value) in echo {
        writeln!(f, "{key} = {value}")?;
    }
    Ok(())
}
