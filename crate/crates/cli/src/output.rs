//! Self-describing output: header metadata, then one or more named tables.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use qlimit_core::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

pub struct Report {
    meta: Vec<(String, String)>,
    config_echo: String,
    blocks: Vec<(String, Table)>,
}

impl Report {
    pub fn new(command: &str, config_echo: &str, hash: &str, seed: Option<u64>) -> Self {
        let meta = vec![
            ("qlimit".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("command".to_string(), command.to_string()),
            ("config_hash".to_string(), hash.to_string()),
            ("seed".to_string(), seed.map_or_else(|| "none".to_string(), |s| s.to_string())),
        ];
        Report { meta, config_echo: config_echo.to_string(), blocks: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.blocks.push((name.to_string(), table));
    }

    pub fn write_to(&self, format: Format, out: Option<&Path>) -> io::Result<()> {
        match out {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path)?);
                self.write(format, &mut w)?;
                w.flush()
            }
            None => {
                let stdout = io::stdout();
                let mut w = BufWriter::new(stdout.lock());
                self.write(format, &mut w)?;
                w.flush()
            }
        }
    }

    pub fn write<W: Write>(&self, format: Format, w: &mut W) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Jsonl => self.write_jsonl(w),
        }
    }

    fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k} = {v}")?;
        }
        for line in self.config_echo.lines() {
            writeln!(w, "# config: {line}")?;
        }
        let tagged = self.blocks.len() > 1;
        for (i, (name, t)) in self.blocks.iter().enumerate() {
            if i > 0 {
                writeln!(w)?;
            }
            if tagged {
                writeln!(w, "# table = {name}")?;
            }
            t.write_csv(&mut *w)?;
        }
        Ok(())
    }

    fn write_jsonl<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let mut meta = serde_json::Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), serde_json::Value::String(v.clone()));
        }
        let config: Vec<serde_json::Value> =
            self.config_echo.lines().map(|l| serde_json::Value::String(l.to_string())).collect();
        meta.insert("config".to_string(), serde_json::Value::Array(config));
        let mut head = serde_json::Map::new();
        head.insert("meta".to_string(), serde_json::Value::Object(meta));
        serde_json::to_writer(&mut *w, &head)?;
        writeln!(w)?;
        for (name, t) in &self.blocks {
            t.write_jsonl_tagged(&mut *w, &[("table", Value::Text(name.clone()))])?;
        }
        Ok(())
    }
}
