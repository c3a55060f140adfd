use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tokenizer {
    /// mteval-v14 international tokenization: punctuation is split off unless
    /// it sits next to a digit, symbols are always split off.
    #[default]
    Intl,
    /// Split on whitespace only.
    Whitespace,
}

impl Tokenizer {
    pub fn as_str(self) -> &'static str {
        match self {
            Tokenizer::Intl => "intl",
            Tokenizer::Whitespace => "whitespace",
        }
    }
}

impl fmt::Display for Tokenizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tokenizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "intl" => Ok(Tokenizer::Intl),
            "whitespace" | "none" => Ok(Tokenizer::Whitespace),
            other => Err(format!("unknown tokenizer {other:?} (expected intl or whitespace)")),
        }
    }
}

static NONDIGIT_PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(\P{N})(\p{P})").unwrap());
static PUNCT_NONDIGIT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(\p{P})(\P{N})").unwrap());
static SYMBOL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(\p{S})").unwrap());

fn intl(line: &str) -> String {
    let line = NONDIGIT_PUNCT.replace_all(line, "$1 $2 ");
    let line = PUNCT_NONDIGIT.replace_all(&line, " $1 $2");
    SYMBOL.replace_all(&line, " $1 ").into_owned()
}

pub fn tokenize(line: &str, tokenizer: Tokenizer, lowercase: bool) -> Vec<String> {
    let line = if lowercase {
        line.to_lowercase()
    } else {
        line.to_string()
    };
    let line = match tokenizer {
        Tokenizer::Intl => intl(&line),
        Tokenizer::Whitespace => line,
    };
    line.split_whitespace().map(str::to_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intl_tokens(s: &str) -> Vec<String> {
        tokenize(s, Tokenizer::Intl, false)
    }

    #[test]
    fn punctuation_split() {
        assert_eq!(intl_tokens("Hello, world!"), ["Hello", ",", "world", "!"]);
        assert_eq!(intl_tokens("It costs $5."), ["It", "costs", "$", "5."]);
        assert_eq!(intl_tokens("1,000.5 km"), ["1,000.5", "km"]);
        assert_eq!(intl_tokens("(Jr.) ok"), ["(", "Jr", ".", ")", "ok"]);
    }

    #[test]
    fn unicode_and_case() {
        assert_eq!(intl_tokens("Café «crème»"), ["Café", "«", "crème", "»"]);
        assert_eq!(tokenize("A B", Tokenizer::Whitespace, true), ["a", "b"]);
        assert_eq!(tokenize("  a,b ", Tokenizer::Whitespace, false), ["a,b"]);
    }
}
