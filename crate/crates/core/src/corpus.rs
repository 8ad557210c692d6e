//! Labeled corpus ingestion and preprocessing.
//!
//! Input files are UTF-8 JSON lines, one document per line:
//!
//! ```text
//! {"id": "d1", "text": "...", "label": "sports", "split": "train"}
//! ```
//!
//! Two token units are supported. `char` splits the text into Unicode
//! scalar values and drops whitespace; `word` expects text that has
//! already been segmented and splits on single spaces.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CANONICAL_FORMAT: &str = "textgat-corpus";
const CANONICAL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(other.to_string()),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Token unit used when splitting raw text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenMode {
    Char,
    Word,
}

impl TokenMode {
    pub fn tokenize(self, text: &str) -> Vec<String> {
        match self {
            TokenMode::Char => text
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(String::from)
                .collect(),
            TokenMode::Word => text
                .split(' ')
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect(),
        }
    }
}

impl FromStr for TokenMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "char" => Ok(TokenMode::Char),
            "word" => Ok(TokenMode::Word),
            other => Err(format!(
                "unknown token mode `{other}` (expected char or word)"
            )),
        }
    }
}

impl fmt::Display for TokenMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TokenMode::Char => "char",
            TokenMode::Word => "word",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(rename = "text")]
    pub raw_text: String,
    pub label: String,
    pub split: Split,
    pub tokens: Vec<String>,
}

/// An ordered collection of labeled documents sharing one token mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    mode: TokenMode,
    documents: Vec<Document>,
    labels: Vec<String>,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    text: String,
    label: String,
    split: String,
}

#[derive(Serialize, Deserialize)]
struct CanonicalHeader {
    format: String,
    version: u32,
    mode: TokenMode,
}

impl Corpus {
    /// Builds a corpus from already tokenized documents. The label set is
    /// the sorted set of distinct labels.
    pub fn new(mode: TokenMode, documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, doc) in documents.iter().enumerate() {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId {
                    line: i + 1,
                    id: doc.id.clone(),
                });
            }
        }
        let labels: Vec<String> = documents
            .iter()
            .map(|d| d.label.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(Self {
            mode,
            documents,
            labels,
        })
    }

    pub fn mode(&self) -> TokenMode {
        self.mode
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Sorted distinct class names. Class index `c` is `labels()[c]`.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    /// Writes the canonical JSON-lines form: a header line followed by one
    /// record per document including its tokens.
    pub fn write_canonical<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header = CanonicalHeader {
            format: CANONICAL_FORMAT.to_string(),
            version: CANONICAL_VERSION,
            mode: self.mode,
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for doc in &self.documents {
            serde_json::to_writer(&mut out, doc)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save_canonical(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_canonical(&mut buf).expect("write to Vec");
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn read_canonical<R: Read>(reader: R) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header_line = match lines.next() {
            Some(line) => line.map_err(|e| Error::format("corpus", e.to_string()))?,
            None => return Err(Error::EmptyCorpus),
        };
        let header: CanonicalHeader =
            serde_json::from_str(&header_line).map_err(|e| Error::MalformedLine {
                line: 1,
                message: format!("bad canonical corpus header: {e}"),
            })?;
        if header.format != CANONICAL_FORMAT || header.version != CANONICAL_VERSION {
            return Err(Error::format(
                "corpus",
                format!("unsupported format {} v{}", header.format, header.version),
            ));
        }
        let mut documents = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::format("corpus", e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let doc: Document = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
                line: i + 2,
                message: e.to_string(),
            })?;
            documents.push(doc);
        }
        Corpus::new(header.mode, documents)
    }

    pub fn load_canonical(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_canonical(file)
    }
}

/// Parses a raw corpus file and tokenizes every document.
pub fn ingest(path: impl AsRef<Path>, mode: TokenMode) -> Result<Corpus> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, mode)
}

pub fn ingest_reader<R: Read>(reader: R, mode: TokenMode) -> Result<Corpus> {
    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        let split = raw
            .split
            .parse::<Split>()
            .map_err(|value| Error::UnknownSplit {
                line: line_no,
                value,
            })?;
        if !seen.insert(raw.id.clone()) {
            return Err(Error::DuplicateId {
                line: line_no,
                id: raw.id,
            });
        }
        let tokens = mode.tokenize(&raw.text);
        documents.push(Document {
            id: raw.id,
            raw_text: raw.text,
            label: raw.label,
            split,
            tokens,
        });
    }
    Corpus::new(mode, documents)
}

/// Loads a stoplist: one term per line, surrounding whitespace trimmed.
pub fn load_stoplist(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect())
}

fn filter_tokens(corpus: &Corpus, keep: impl Fn(&str) -> bool) -> Result<Corpus> {
    let mut emptied = Vec::new();
    let documents: Vec<Document> = corpus
        .documents
        .iter()
        .map(|doc| {
            let tokens: Vec<String> = doc.tokens.iter().filter(|t| keep(t)).cloned().collect();
            if tokens.is_empty() {
                emptied.push(doc.id.clone());
            }
            Document {
                tokens,
                ..doc.clone()
            }
        })
        .collect();
    if !emptied.is_empty() {
        return Err(Error::EmptyDocuments(emptied));
    }
    Ok(Corpus {
        mode: corpus.mode,
        documents,
        labels: corpus.labels.clone(),
    })
}

/// Deletes every stoplisted token. Documents left without tokens are an
/// error listing their ids.
pub fn remove_stopwords(corpus: &Corpus, stoplist: &HashSet<String>) -> Result<Corpus> {
    filter_tokens(corpus, |t| !stoplist.contains(t))
}

/// Keeps only tokens with at least one letter, ideograph or digit.
pub fn strip_special_tokens(corpus: &Corpus) -> Result<Corpus> {
    filter_tokens(corpus, |t| t.chars().any(char::is_alphanumeric))
}

/// Stopword removal followed by special-token stripping.
pub fn preprocess(corpus: &Corpus, stoplist: &HashSet<String>) -> Result<Corpus> {
    strip_special_tokens(&remove_stopwords(corpus, stoplist)?)
}

/// Term index over all documents of every split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    index: HashMap<String, usize>,
    terms: Vec<String>,
    document_frequency: Vec<usize>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Number of documents containing the term with this index.
    pub fn document_frequency(&self, index: usize) -> usize {
        self.document_frequency[index]
    }
}

/// Indexes terms in order of first appearance.
pub fn build_vocabulary(corpus: &Corpus) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut index = HashMap::new();
    let mut terms = Vec::new();
    let mut document_frequency = Vec::new();
    let mut last_doc: Vec<usize> = Vec::new();
    for (d, doc) in corpus.documents.iter().enumerate() {
        for tok in &doc.tokens {
            let t = *index.entry(tok.clone()).or_insert_with(|| {
                terms.push(tok.clone());
                document_frequency.push(0);
                last_doc.push(usize::MAX);
                terms.len() - 1
            });
            if last_doc[t] != d {
                last_doc[t] = d;
                document_frequency[t] += 1;
            }
        }
    }
    Ok(Vocabulary {
        index,
        terms,
        document_frequency,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub mean_len: f64,
    pub class_counts: BTreeMap<String, usize>,
    pub split_counts: BTreeMap<String, usize>,
}

pub fn corpus_stats(corpus: &Corpus) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let lens = corpus.documents.iter().map(|d| d.tokens.len());
    let min_len = lens.clone().min().unwrap_or(0);
    let max_len = lens.clone().max().unwrap_or(0);
    let total: usize = lens.sum();
    let mut class_counts = BTreeMap::new();
    let mut split_counts = BTreeMap::new();
    for doc in &corpus.documents {
        *class_counts.entry(doc.label.clone()).or_insert(0) += 1;
        *split_counts.entry(doc.split.to_string()).or_insert(0) += 1;
    }
    Ok(CorpusStats {
        documents: corpus.len(),
        min_len,
        max_len,
        mean_len: total as f64 / corpus.len() as f64,
        class_counts,
        split_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, text: &str, label: &str, split: &str) -> String {
        serde_json::json!({"id": id, "text": text, "label": label, "split": split}).to_string()
    }

    fn doc(id: &str, tokens: &[&str]) -> Document {
        Document {
            id: id.into(),
            raw_text: tokens.join(" "),
            label: "x".into(),
            split: Split::Train,
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
        }
    }

    #[test]
    fn char_and_word_modes() {
        let src = line("d", "ab cd", "x", "train");
        let c = ingest_reader(src.as_bytes(), TokenMode::Char).unwrap();
        assert_eq!(c.documents()[0].tokens, ["a", "b", "c", "d"]);
        let w = ingest_reader(src.as_bytes(), TokenMode::Word).unwrap();
        assert_eq!(w.documents()[0].tokens, ["ab", "cd"]);
    }

    #[test]
    fn three_splits_in_order() {
        let src = [
            line("a", "x y", "p", "train"),
            line("b", "y z", "q", "val"),
            line("c", "z", "p", "test"),
        ]
        .join("\n");
        let c = ingest_reader(src.as_bytes(), TokenMode::Word).unwrap();
        let got: Vec<_> = c
            .documents()
            .iter()
            .map(|d| (d.id.as_str(), d.split))
            .collect();
        assert_eq!(
            got,
            [("a", Split::Train), ("b", Split::Val), ("c", Split::Test)]
        );
        assert_eq!(c.labels(), ["p", "q"]);
    }

    #[test]
    fn ingest_errors() {
        let bad = format!("{}\n{{not json", line("a", "x", "p", "train"));
        match ingest_reader(bad.as_bytes(), TokenMode::Word) {
            Err(Error::MalformedLine { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let dup = [line("a", "x", "p", "train"), line("a", "y", "p", "test")].join("\n");
        assert!(matches!(
            ingest_reader(dup.as_bytes(), TokenMode::Word),
            Err(Error::DuplicateId { line: 2, .. })
        ));
        let split = line("a", "x", "p", "dev");
        assert!(matches!(
            ingest_reader(split.as_bytes(), TokenMode::Word),
            Err(Error::UnknownSplit { line: 1, .. })
        ));
    }

    #[test]
    fn stopwords() {
        let c = Corpus::new(TokenMode::Word, vec![doc("d", &["a", "the", "b"])]).unwrap();
        let stop: HashSet<String> = ["the".to_string()].into();
        assert_eq!(
            remove_stopwords(&c, &stop).unwrap().documents()[0].tokens,
            ["a", "b"]
        );
        assert_eq!(remove_stopwords(&c, &HashSet::new()).unwrap(), c);

        let only = Corpus::new(TokenMode::Word, vec![doc("gone", &["the"])]).unwrap();
        match remove_stopwords(&only, &stop) {
            Err(Error::EmptyDocuments(ids)) => assert_eq!(ids, ["gone"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn special_tokens_dropped() {
        let c = Corpus::new(TokenMode::Word, vec![doc("d", &["a1", "!!", "——", "地"])]).unwrap();
        assert_eq!(
            strip_special_tokens(&c).unwrap().documents()[0].tokens,
            ["a1", "地"]
        );
    }

    #[test]
    fn vocabulary_counts() {
        let c = Corpus::new(
            TokenMode::Word,
            vec![doc("1", &["a", "b"]), doc("2", &["b", "c"])],
        )
        .unwrap();
        let v = build_vocabulary(&c).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.document_frequency(v.get("b").unwrap()), 2);

        let c = Corpus::new(TokenMode::Word, vec![doc("1", &["a", "a", "a"])]).unwrap();
        let v = build_vocabulary(&c).unwrap();
        assert_eq!((v.len(), v.document_frequency(0)), (1, 1));

        let empty = Corpus::new(TokenMode::Word, vec![]).unwrap();
        assert!(matches!(build_vocabulary(&empty), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn stats() {
        let c = Corpus::new(
            TokenMode::Word,
            vec![doc("1", &["a"; 4]), doc("2", &["b"; 6])],
        )
        .unwrap();
        let s = corpus_stats(&c).unwrap();
        assert_eq!((s.min_len, s.max_len, s.mean_len), (4, 6, 5.0));
        assert_eq!(s.class_counts["x"], 2);

        let c = Corpus::new(TokenMode::Word, vec![doc("1", &["a"; 7])]).unwrap();
        let s = corpus_stats(&c).unwrap();
        assert_eq!((s.min_len, s.max_len, s.mean_len), (7, 7, 7.0));
    }

    #[test]
    fn canonical_round_trip() {
        let c = Corpus::new(
            TokenMode::Word,
            vec![doc("1", &["a", "b"]), doc("2", &["c"])],
        )
        .unwrap();
        let mut buf = Vec::new();
        c.write_canonical(&mut buf).unwrap();
        assert_eq!(Corpus::read_canonical(&buf[..]).unwrap(), c);
    }
}
