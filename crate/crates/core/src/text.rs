//! Tokenization, string normalization, and lexicon-driven phrase matching.
//!
//! Everything that touches raw text funnels through this module so that
//! category documents, knowledge-base strings, and classification input are
//! segmented under one set of rules.

use std::collections::HashSet;
use std::ops::Range;
use std::sync::OnceLock;

/// A single token: its lower-cased text and the byte span in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Range<usize>,
}

/// A phrase matched by [`PhraseLexicon::segment`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseMatch {
    /// The lexicon phrase that matched (normalized form).
    pub phrase: String,
    /// Byte span in the original text, from the first to the last token.
    pub span: Range<usize>,
}

/// Splits text into lower-cased tokens.
///
/// Alphanumeric runs form tokens; apostrophes are kept only when internal
/// ("don't" is one token, "'twas" loses its leading quote). Everything else
/// separates tokens.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    let mut end = 0;

    let flush = |start: &mut Option<usize>, end: usize, tokens: &mut Vec<Token>| {
        if let Some(s) = start.take() {
            push_trimmed(text, s..end, tokens);
        }
    };

    for (i, ch) in text.char_indices() {
        if ch.is_alphanumeric() || ch == '\'' {
            if start.is_none() {
                start = Some(i);
            }
            end = i + ch.len_utf8();
        } else {
            flush(&mut start, end, &mut tokens);
        }
    }
    flush(&mut start, end, &mut tokens);
    tokens
}

// Strip leading/trailing apostrophes from a candidate token span.
fn push_trimmed(text: &str, span: Range<usize>, tokens: &mut Vec<Token>) {
    let raw = &text[span.clone()];
    let trimmed = raw.trim_matches('\'');
    if trimmed.is_empty() {
        return;
    }
    let offset = raw.len() - raw.trim_start_matches('\'').len();
    let start = span.start + offset;
    let end = start + trimmed.len();
    tokens.push(Token {
        text: trimmed.to_lowercase(),
        span: start..end,
    });
}

/// Canonical form shared by knowledge-base concepts and entities: lower-case,
/// underscores to spaces, trimmed, internal whitespace collapsed to one space.
pub fn normalize(s: &str) -> String {
    s.to_lowercase()
        .replace('_', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// A set of normalized phrases indexed for greedy longest-match scanning.
#[derive(Debug, Clone, Default)]
pub struct PhraseLexicon {
    phrases: HashSet<String>,
    max_tokens: usize,
}

impl PhraseLexicon {
    /// Builds a lexicon from already-normalized phrases.
    pub fn new<I, S>(phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = HashSet::new();
        let mut max_tokens = 0;
        for p in phrases {
            let p = p.into();
            if p.is_empty() {
                continue;
            }
            max_tokens = max_tokens.max(p.split_whitespace().count());
            set.insert(p);
        }
        PhraseLexicon {
            phrases: set,
            max_tokens,
        }
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.phrases.contains(phrase)
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Longest phrase length in tokens.
    pub fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.phrases.iter().map(String::as_str)
    }

    /// Greedy longest-match scan.
    ///
    /// At each token position the longest window of up to
    /// `min(window, self.max_tokens())` tokens that joins (space-separated)
    /// into a lexicon phrase is taken; matched spans never overlap. Unmatched
    /// tokens are skipped one at a time.
    pub fn segment(&self, text: &str, window: usize) -> Vec<PhraseMatch> {
        let tokens = tokenize(text);
        let cap = window.min(self.max_tokens);
        let mut matches = Vec::new();
        if cap == 0 {
            return matches;
        }

        let mut i = 0;
        while i < tokens.len() {
            let longest = cap.min(tokens.len() - i);
            let mut advanced = false;
            for len in (1..=longest).rev() {
                let candidate = join_tokens(&tokens[i..i + len]);
                if self.phrases.contains(&candidate) {
                    matches.push(PhraseMatch {
                        phrase: candidate,
                        span: tokens[i].span.start..tokens[i + len - 1].span.end,
                    });
                    i += len;
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                i += 1;
            }
        }
        matches
    }
}

fn join_tokens(tokens: &[Token]) -> String {
    let mut s = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&t.text);
    }
    s
}

static STOPWORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();

/// True if the (lower-cased) token is on the bundled English stopword list.
pub fn is_stopword(token: &str) -> bool {
    STOPWORDS
        .get_or_init(|| {
            include_str!("../data/stopwords.txt")
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect()
        })
        .contains(token)
}
