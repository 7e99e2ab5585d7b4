use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::ConfigError;

pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Csv { buf: String::new() };
        c.row(header.iter().map(|s| s.to_string()));
        c
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = String>) {
        let cells: Vec<String> = cells.into_iter().collect();
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Writes to `out`, or to standard output when absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), ConfigError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| ConfigError(format!("writing {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| ConfigError(format!("writing standard output: {e}")))
        }
    }
}
