use std::fmt::Display;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    Csv,
    #[default]
    Md,
}

/// Power in µW.
pub fn uw(v: f64) -> String {
    format!("{v:.4}")
}

/// Time in seconds.
pub fn secs(v: f64) -> String {
    format!("{v:.2}")
}

pub fn opt_int<T: Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// A header plus rows of pre-formatted cells.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                for line in std::iter::once(&self.header).chain(&self.rows) {
                    out.push_str(&line.join(","));
                    out.push('\n');
                }
            }
            Format::Md => {
                let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
                out.push_str(&line(&self.header));
                let rule: Vec<String> = self.header.iter().map(|_| "---".to_string()).collect();
                out.push_str(&line(&rule));
                for row in &self.rows {
                    out.push_str(&line(row));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markdown_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(
            t.render(Format::Md),
            "| a | b |\n| --- | --- |\n| 1 | 2 |\n"
        );
        assert_eq!(t.render(Format::Csv), "a,b\n1,2\n");
    }

    #[test]
    fn fixed_decimals() {
        assert_eq!(uw(5.32771), "5.3277");
        assert_eq!(secs(28.28), "28.28");
        assert_eq!(opt_int::<u32>(None), "-");
    }
}
