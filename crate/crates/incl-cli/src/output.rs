use crate::Format;
use serde_json::Value;
use std::io::Write;

/// Writes either the text rendering or the JSON record of each result.
pub struct Output {
    format: Format,
}

impl Output {
    pub fn new(format: Format) -> Output {
        Output { format }
    }

    pub fn emit(&mut self, text: &str, record: Value) {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        let _ = match self.format {
            Format::Text => {
                if text.ends_with('\n') {
                    write!(lock, "{}", text)
                } else {
                    writeln!(lock, "{}", text)
                }
            }
            Format::Records => writeln!(lock, "{}", record),
        };
    }
}
