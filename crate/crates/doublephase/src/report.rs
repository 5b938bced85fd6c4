//! Key-value reports, one `path.to.key = value` per line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Shortest round-trip decimal, in exponent form outside `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Lines in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.lines.push((key.into(), value.into()));
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.text(key, fmt_f64(value));
    }

    pub fn opt_num(&mut self, key: impl Into<String>, value: Option<f64>) {
        self.text(key, value.map_or_else(|| "none".to_string(), fmt_f64));
    }

    pub fn int(&mut self, key: impl Into<String>, value: impl Into<u64>) {
        self.text(key, value.into().to_string());
    }

    pub fn count(&mut self, key: impl Into<String>, value: usize) {
        self.text(key, value.to_string());
    }

    pub fn flag(&mut self, key: impl Into<String>, value: bool) {
        self.text(key, value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// Reads rendered report text back into a map; later keys win.
pub fn parse(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_forms_round_trip() {
        for x in [0.0, 1.0, 0.2831, 1e-8, -3.5e20, 1e-4, 123456.789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1e-8), "1e-8");
        assert_eq!(fmt_f64(0.25), "0.25");
    }

    #[test]
    fn render_and_parse() {
        let mut r = Report::new();
        r.num("a.b", 0.5);
        r.flag("a.ok", true);
        r.count("a.n", 3);
        let m = parse(&r.render());
        assert_eq!(m["a.b"], "0.5");
        assert_eq!(m["a.ok"], "true");
        assert_eq!(r.get("a.n"), Some("3"));
    }
}
