//! Report artifacts: CSV and aligned text, each under a provenance header.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// What produced an artifact: enough to re-run it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    /// Effective configuration as TOML.
    pub config: String,
    /// `(input name, sha256)` pairs.
    pub inputs: Vec<(String, String)>,
    pub fold_hashes: Vec<u64>,
}

const CONFIG_PREFIX: &str = "# | ";

impl Provenance {
    pub fn config_digest(&self) -> String {
        sha256_hex(self.config.as_bytes())
    }

    pub fn header(&self) -> String {
        let mut out = format!("# xfer {}\n", env!("CARGO_PKG_VERSION"));
        out.push_str(&format!("# command: {}\n", self.command));
        out.push_str(&format!("# seed: {}\n", self.seed));
        out.push_str(&format!("# config-sha256: {}\n", self.config_digest()));
        for (name, digest) in &self.inputs {
            out.push_str(&format!("# input {name} sha256: {digest}\n"));
        }
        for h in &self.fold_hashes {
            out.push_str(&format!("# fold-hash: {h:016x}\n"));
        }
        out.push_str("# config:\n");
        for line in self.config.lines() {
            out.push_str(CONFIG_PREFIX);
            out.push_str(line);
            out.push('\n');
        }
        out
    }

    /// Recovers the command and embedded config from an artifact's header.
    pub fn parse_header(text: &str) -> Option<(String, String)> {
        let mut command = None;
        let mut config = String::new();
        for line in text.lines() {
            if !line.starts_with('#') {
                break;
            }
            if let Some(c) = line.strip_prefix("# command: ") {
                command = Some(c.to_string());
            } else if let Some(c) = line.strip_prefix(CONFIG_PREFIX) {
                config.push_str(c);
                config.push('\n');
            } else if line == CONFIG_PREFIX.trim_end() {
                config.push('\n');
            }
        }
        command.map(|c| (c, config))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Free-text lines printed under the text table.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn to_csv(&self, prov: &Provenance) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(prov.header().into_bytes());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
    }

    pub fn to_text(&self, prov: &Provenance) -> String {
        format!("{}\n{}", prov.header(), self.body())
    }

    /// Title, aligned table and notes.
    pub fn body(&self) -> String {
        let mut out = self.title.clone();
        out.push_str("\n\n");
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].chars().count())
                    .chain([self.columns[c].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let numeric: Vec<bool> = (0..self.columns.len())
            .map(|c| !self.rows.is_empty() && self.rows.iter().all(|r| looks_numeric(&r[c])))
            .collect();
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    if numeric[c] {
                        format!("{v:>w$}", w = widths[c])
                    } else {
                        format!("{v:<w$}", w = widths[c])
                    }
                })
                .collect();
            let mut s = parts.join("  ");
            s.truncate(s.trim_end().len());
            s.push('\n');
            s
        };
        out.push_str(&line(&self.columns));
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&rule.join("  "));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
        }
        if !self.notes.is_empty() {
            out.push('\n');
            for n in &self.notes {
                out.push_str(n);
                out.push('\n');
            }
        }
        out
    }
}

fn looks_numeric(s: &str) -> bool {
    s.is_empty() || s == "-" || s.parse::<f64>().is_ok()
}

/// Six decimals, as used throughout the reports.
pub fn num(v: f64) -> String {
    crate::io::fixed(v, 6)
}

/// Scientific notation with three significant digits.
pub fn pval(p: f64) -> String {
    format!("{p:.2e}")
}

pub fn opt(v: Option<f64>, f: fn(f64) -> String) -> String {
    v.map_or_else(|| "-".to_string(), f)
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance {
            command: "screen".into(),
            seed: 7,
            config: "seed = 7\n\n[model]\nkind = \"forest\"\n".into(),
            inputs: vec![("scores".into(), "ab".into())],
            fold_hashes: vec![0xbeef],
        }
    }

    #[test]
    fn header_round_trips_command_and_config() {
        let p = prov();
        let mut t = Table::new("Screen", &["feature", "p"]);
        t.push(vec!["90A_train".into(), pval(4.39e-35)]);
        let csv = t.to_csv(&p);
        assert!(csv.contains("# seed: 7\n"));
        assert!(csv.contains("# fold-hash: 000000000000beef\n"));
        assert!(csv.ends_with("feature,p\n90A_train,4.39e-35\n"));
        let (cmd, cfg) = Provenance::parse_header(&csv).unwrap();
        assert_eq!(cmd, "screen");
        assert_eq!(cfg, p.config);
    }

    #[test]
    fn text_tables_align() {
        let mut t = Table::new("T", &["name", "v"]);
        t.push(vec!["a".into(), num(1.0)]);
        t.push(vec!["bbb".into(), num(-12.5)]);
        let text = t.to_text(&prov());
        assert!(text.contains("name           v\n----  ----------\na       1.000000\nbbb   -12.500000\n"), "{text}");
    }

    #[test]
    fn number_formats() {
        assert_eq!(num(0.1234567), "0.123457");
        assert_eq!(pval(0.000123456), "1.23e-4");
        assert_eq!(pval(1.0), "1.00e0");
    }
}
