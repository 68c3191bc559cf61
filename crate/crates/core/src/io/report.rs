//! Plain-text reports with a stable layout.

use std::fmt;

use crate::dstates::ClassReport;
use crate::solvers::growth::GrowthRow;

/// A titled list of `key: value` lines and free-form tables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub title: String,
    pub entries: Vec<(String, String)>,
    pub blocks: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report { title: title.into(), ..Default::default() }
    }

    pub fn entry(&mut self, key: impl Into<String>, value: impl fmt::Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn block(&mut self, text: impl Into<String>) -> &mut Self {
        self.blocks.push(text.into());
        self
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {}", self.title)?;
        for (k, v) in &self.entries {
            writeln!(f, "{k}: {v}")?;
        }
        for b in &self.blocks {
            writeln!(f)?;
            f.write_str(b)?;
            if !b.ends_with('\n') {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// One line per class: index, member count, d-state size and member nodes.
pub fn class_table(report: &ClassReport, names: &[String]) -> String {
    let mut out = String::from("class  members  size  first-nodes\n");
    for (c, members) in report.classes.iter().enumerate() {
        let k = &report.dstates[members[0]];
        let first: Vec<&str> = k.nodes.iter().take(6).map(|&v| names[v].as_str()).collect();
        let more = if k.nodes.len() > 6 { " ..." } else { "" };
        out.push_str(&format!("{c:>5}  {:>7}  {:>4}  {}{more}\n", members.len(), k.len(), first.join(" ")));
    }
    out
}

pub fn growth_table(rows: &[GrowthRow]) -> String {
    let mut out = String::from("depth     nodes  dstates  max-size  classes\n");
    for r in rows {
        let classes = r.classes.map_or("-".to_string(), |c| c.to_string());
        out.push_str(&format!("{:>5}  {:>8}  {:>7}  {:>8}  {:>7}\n", r.depth, r.nodes, r.dstates, r.max_size, classes));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let mut r = Report::new("verify");
        r.entry("uniform", "yes").block("a b\n");
        assert_eq!(r.to_string(), "# verify\nuniform: yes\n\na b\n");
    }
}
