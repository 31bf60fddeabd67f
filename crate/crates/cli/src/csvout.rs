//! CSV emission: schema-tagged, deterministic, round-trip-exact floats.

use std::fmt::Write as _;

/// Schema tag carried as the first comment line of every emitted file.
pub const SCHEMA: &str = "# routhe-csv v1";

/// 17 significant digits: parses back to the identical bit pattern.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new() -> Self {
        let mut c = Csv { buf: String::new() };
        c.comment_raw(SCHEMA);
        c
    }

    fn comment_raw(&mut self, line: &str) {
        let _ = writeln!(self.buf, "{line}");
    }

    pub fn comment(&mut self, text: &str) {
        self.comment_raw(&format!("# {text}"));
    }

    pub fn header(&mut self, cols: &[&str]) {
        let _ = writeln!(self.buf, "{}", cols.join(","));
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    pub fn number_row(&mut self, cells: &[f64]) {
        let rendered: Vec<String> = cells.iter().map(|&x| fmt(x)).collect();
        self.row(&rendered);
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
