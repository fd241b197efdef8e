use std::fmt;

/// Outcome label: a tuple of text tokens, written with `|` between components.
///
/// Single outcomes are one-token labels; the outcome `(x, y)` of a product
/// observable or instrument is the concatenation of the two tuples, so `"0|+"`
/// and `Label::product(&"0".into(), &"+".into())` are the same label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(Vec<String>);

impl Label {
    pub const SEPARATOR: char = '|';

    pub fn parse(s: &str) -> Self {
        Label(s.split(Self::SEPARATOR).map(str::to_owned).collect())
    }

    pub fn product(a: &Label, b: &Label) -> Label {
        Label(a.0.iter().chain(&b.0).cloned().collect())
    }

    pub fn triple(a: &Label, b: &Label, c: &Label) -> Label {
        Label::product(&Label::product(a, b), c)
    }

    pub fn parts(&self) -> &[String] {
        &self.0
    }

    /// Labels `"0"`, `"1"`, … `"n-1"`.
    pub fn range(n: usize) -> Vec<Label> {
        (0..n).map(|i| Label::from(i.to_string().as_str())).collect()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("|"))
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::parse(s)
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label::parse(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_round_trips_through_text() {
        let l = Label::product(&"0".into(), &Label::product(&"a".into(), &"b".into()));
        assert_eq!(l.to_string(), "0|a|b");
        assert_eq!(Label::parse("0|a|b"), l);
        assert_eq!(l.parts().len(), 3);
    }
}
