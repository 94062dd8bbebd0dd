//! Rule-based span canonicalization for script-graph nodes: stopword
//! removal, verb lemmatization and noun singularization.
//!
//! The rules are deliberately small. Anything they get wrong can be fixed
//! with a user lemma table (`form<TAB>lemma`), which takes precedence.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use crate::concept::normalize_text;
use crate::error::{KgError, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

pub fn default_stopwords() -> HashSet<String> {
    parse_word_list(DEFAULT_STOPWORDS)
}

fn parse_word_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(normalize_text)
        .filter(|w| !w.is_empty())
        .collect()
}

/// One word per line, `#` comments allowed.
pub fn read_stopwords<R: BufRead>(mut input: R) -> Result<HashSet<String>> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    Ok(parse_word_list(&text))
}

const IRREGULAR_VERBS: &[(&str, &str)] = &[
    ("am", "be"), ("is", "be"), ("are", "be"), ("was", "be"), ("were", "be"), ("been", "be"),
    ("has", "have"), ("had", "have"), ("does", "do"), ("did", "do"), ("done", "do"),
    ("went", "go"), ("gone", "go"), ("goes", "go"), ("bought", "buy"), ("dug", "dig"),
    ("grew", "grow"), ("grown", "grow"), ("took", "take"), ("taken", "take"), ("got", "get"),
    ("gotten", "get"), ("made", "make"), ("came", "come"), ("ate", "eat"), ("eaten", "eat"),
    ("saw", "see"), ("seen", "see"), ("found", "find"), ("gave", "give"), ("given", "give"),
    ("brought", "bring"), ("began", "begin"), ("begun", "begin"), ("left", "leave"),
    ("kept", "keep"), ("felt", "feel"), ("sat", "sit"), ("ran", "run"), ("held", "hold"),
    ("told", "tell"), ("said", "say"), ("thought", "think"), ("wore", "wear"), ("worn", "wear"),
    ("threw", "throw"), ("thrown", "throw"), ("drove", "drive"), ("driven", "drive"),
    ("wrote", "write"), ("written", "write"), ("paid", "pay"), ("laid", "lay"),
    ("spent", "spend"), ("sent", "send"), ("built", "build"), ("stood", "stand"),
    ("chose", "choose"), ("chosen", "choose"), ("woke", "wake"), ("slept", "sleep"),
    ("swept", "sweep"), ("drank", "drink"), ("swam", "swim"), ("hung", "hang"), ("fed", "feed"),
    ("met", "meet"), ("rode", "ride"), ("sold", "sell"), ("shook", "shake"), ("knew", "know"),
    ("flew", "fly"), ("fell", "fall"), ("fallen", "fall"), ("broke", "break"),
    ("broken", "break"), ("forgot", "forget"), ("hid", "hide"), ("won", "win"),
    ("blew", "blow"), ("drew", "draw"), ("froze", "freeze"), ("caught", "catch"),
    ("taught", "teach"), ("fought", "fight"), ("became", "become"), ("sang", "sing"),
    ("died", "die"), ("lied", "lie"), ("tied", "tie"), ("used", "use"), ("lying", "lie"),
    ("dying", "die"), ("tying", "tie"),
];

const IRREGULAR_NOUNS: &[(&str, &str)] = &[
    ("children", "child"), ("people", "person"), ("men", "man"), ("women", "woman"),
    ("feet", "foot"), ("teeth", "tooth"), ("mice", "mouse"), ("geese", "goose"),
    ("leaves", "leaf"), ("knives", "knife"), ("lives", "life"), ("wives", "wife"),
    ("shelves", "shelf"), ("loaves", "loaf"), ("halves", "half"), ("shoes", "shoe"),
    ("toes", "toe"), ("clothes", "clothes"), ("news", "news"), ("series", "series"),
    ("species", "species"), ("dishes", "dish"), ("scissors", "scissors"),
];

fn is_vowel(word: &[u8], i: usize) -> bool {
    match word[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => true,
        b'y' => i > 0 && !is_vowel(word, i - 1),
        _ => false,
    }
}

/// Number of vowel-consonant sequences.
fn measure(word: &[u8]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..word.len() {
        let v = is_vowel(word, i);
        if prev_vowel && !v {
            m += 1;
        }
        prev_vowel = v;
    }
    m
}

fn has_vowel(word: &[u8]) -> bool {
    (0..word.len()).any(|i| is_vowel(word, i))
}

fn ends_cvc(word: &[u8]) -> bool {
    let n = word.len();
    n >= 3
        && !is_vowel(word, n - 3)
        && is_vowel(word, n - 2)
        && !is_vowel(word, n - 1)
        && !matches!(word[n - 1], b'w' | b'x' | b'y')
}

fn restore_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz") {
        return format!("{stem}e");
    }
    if n >= 2 && b[n - 1] == b[n - 2] && !is_vowel(b, n - 1) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_owned();
    }
    if measure(b) == 1 && ends_cvc(b) {
        return format!("{stem}e");
    }
    stem.to_owned()
}

#[derive(Debug, Clone)]
pub struct Lemmatizer {
    overrides: HashMap<String, String>,
    verbs: HashMap<&'static str, &'static str>,
    nouns: HashMap<&'static str, &'static str>,
}

impl Default for Lemmatizer {
    fn default() -> Self {
        Self::new()
    }
}

impl Lemmatizer {
    pub fn new() -> Self {
        Lemmatizer {
            overrides: HashMap::new(),
            verbs: IRREGULAR_VERBS.iter().copied().collect(),
            nouns: IRREGULAR_NOUNS.iter().copied().collect(),
        }
    }

    pub fn with_overrides(mut self, table: HashMap<String, String>) -> Self {
        self.overrides.extend(table);
        self
    }

    /// Reads a `form<TAB>lemma` table.
    pub fn read_overrides<R: BufRead>(input: R) -> Result<HashMap<String, String>> {
        let mut out = HashMap::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (form, lemma) = line.split_once('\t').ok_or_else(|| KgError::MalformedRow {
                line: i + 1,
                reason: "expected form<TAB>lemma".into(),
            })?;
            out.insert(normalize_text(form), normalize_text(lemma));
        }
        Ok(out)
    }

    pub fn verb(&self, word: &str) -> String {
        if let Some(l) = self.overrides.get(word) {
            return l.clone();
        }
        if let Some(l) = self.verbs.get(word) {
            return (*l).to_owned();
        }
        let n = word.len();
        if n <= 3 || !word.is_ascii() {
            return word.to_owned();
        }
        if let Some(stem) = word.strip_suffix("ies") {
            return format!("{stem}y");
        }
        if let Some(stem) = word.strip_suffix("ied") {
            return format!("{stem}y");
        }
        if let Some(stem) = word.strip_suffix("eed") {
            return if measure(stem.as_bytes()) > 0 { format!("{stem}ee") } else { word.to_owned() };
        }
        for suffix in ["ed", "ing"] {
            if let Some(stem) = word.strip_suffix(suffix) {
                if has_vowel(stem.as_bytes()) {
                    return restore_stem(stem);
                }
                return word.to_owned();
            }
        }
        if let Some(stem) = word.strip_suffix("es") {
            if ["s", "x", "z", "ch", "sh", "o"].iter().any(|s| stem.ends_with(s)) {
                return stem.to_owned();
            }
            return word[..n - 1].to_owned();
        }
        if word.ends_with('s') && !["ss", "us", "is"].iter().any(|s| word.ends_with(s)) {
            return word[..n - 1].to_owned();
        }
        word.to_owned()
    }

    pub fn noun(&self, word: &str) -> String {
        if let Some(l) = self.overrides.get(word) {
            return l.clone();
        }
        if let Some(l) = self.nouns.get(word) {
            return (*l).to_owned();
        }
        let n = word.len();
        if n <= 3 || !word.is_ascii() || ["ss", "us", "is"].iter().any(|s| word.ends_with(s)) {
            return word.to_owned();
        }
        if let Some(stem) = word.strip_suffix("ies") {
            return format!("{stem}y");
        }
        if let Some(stem) = word.strip_suffix("es") {
            if ["ss", "x", "z", "ch", "sh", "o"].iter().any(|s| stem.ends_with(s)) {
                return stem.to_owned();
            }
        }
        match word.strip_suffix('s') {
            Some(stem) => stem.to_owned(),
            None => word.to_owned(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanRole {
    Predicate,
    Argument,
}

/// Canonical node text for an SRL span, or `None` when nothing survives
/// stopword removal.
pub fn canonical_span(
    span: &str,
    role: SpanRole,
    stopwords: &HashSet<String>,
    lemmatizer: &Lemmatizer,
) -> Option<String> {
    let text = normalize_text(span);
    let mut tokens: Vec<String> = text
        .split(' ')
        .filter(|t| !t.is_empty() && !stopwords.contains(*t))
        .map(str::to_owned)
        .collect();
    if tokens.is_empty() {
        return None;
    }
    match role {
        SpanRole::Predicate => tokens[0] = lemmatizer.verb(&tokens[0]),
        SpanRole::Argument => {
            let last = tokens.len() - 1;
            tokens[last] = lemmatizer.noun(&tokens[last]);
        }
    }
    let joined = normalize_text(&tokens.join(" "));
    (!joined.is_empty()).then_some(joined)
}
