use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::Invocation;
use crate::error::{CliError, Result};

pub const OUT_DIR_ENV: &str = "HEISLIM_OUT_DIR";

/// Where a command's CSV goes: `--out`, then `$HEISLIM_OUT_DIR/<name>.csv`,
/// then stdout. `None` means stdout.
pub fn resolve_target(out: Option<&Path>, name: &str) -> Option<PathBuf> {
    match out {
        Some(p) if p == Path::new("-") => None,
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{name}.csv"))),
    }
}

pub struct CsvSink {
    w: BufWriter<Box<dyn Write>>,
    path: Option<PathBuf>,
}

impl CsvSink {
    pub fn open(target: Option<PathBuf>) -> Result<Self> {
        let w: Box<dyn Write> = match &target {
            None => Box::new(io::stdout()),
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                        path: dir.to_path_buf(),
                        source,
                    })?;
                }
                Box::new(File::create(p).map_err(|source| CliError::Io {
                    path: p.clone(),
                    source,
                })?)
            }
        };
        Ok(Self {
            w: BufWriter::new(w),
            path: target,
        })
    }

    fn io(&self, source: io::Error) -> CliError {
        CliError::Io {
            path: self
                .path
                .clone()
                .unwrap_or_else(|| PathBuf::from("<stdout>")),
            source,
        }
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.w, "{s}").map_err(|e| self.io(e))
    }

    /// Version, config hash and seed, the echoed parameters, then the column
    /// names.
    pub fn preamble(&mut self, inv: &Invocation, columns: &[&str]) -> Result<()> {
        let seed = inv.param("seed").unwrap_or("0").to_string();
        self.line(&format!(
            "# heislim {} config={} seed={seed}",
            env!("CARGO_PKG_VERSION"),
            inv.hash
        ))?;
        self.line(&format!("# command = {}", inv.path.join(" ")))?;
        for (k, v) in &inv.params {
            self.line(&format!("# {k} = {v}"))?;
        }
        self.line(&columns.join(","))
    }

    pub fn comment(&mut self, text: &str) -> Result<()> {
        self.line(&format!("# {text}"))
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        self.line(&fields.join(","))
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush().map_err(|e| self.io(e))
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}
