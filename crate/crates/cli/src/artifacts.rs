//! Output files are built in memory and only written once a command succeeds.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::Format;

#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// `stem.csv` (one row per record) or `stem.json` (an array).
    pub fn table<T: Serialize>(&mut self, stem: &str, rows: &[T], format: Format) -> Result<(), CliError> {
        match format {
            Format::Json => self.json(&format!("{stem}.json"), rows),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in rows {
                    w.serialize(r)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Output(io::Error::other(e.to_string())))?;
                self.add(format!("{stem}.csv"), bytes);
                Ok(())
            }
        }
    }

    /// Writes every file through a temporary name, then renames them into place.
    /// On failure the temporaries are removed.
    pub fn commit(self, dir: &Path) -> Result<Vec<String>, CliError> {
        fs::create_dir_all(dir)?;
        let tmp = |name: &str| dir.join(format!(".{name}.partial"));
        let mut written = Vec::new();
        let result = (|| -> io::Result<()> {
            for (name, bytes) in &self.files {
                fs::write(tmp(name), bytes)?;
                written.push(name.clone());
            }
            for (name, _) in &self.files {
                fs::rename(tmp(name), dir.join(name))?;
            }
            Ok(())
        })();
        if let Err(e) = result {
            for name in &written {
                let _ = fs::remove_file(tmp(name));
            }
            return Err(e.into());
        }
        Ok(self.files.into_iter().map(|(n, _)| n).collect())
    }
}
