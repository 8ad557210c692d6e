//! Seeded synthetic corpora for desk-scale experiments.
//!
//! Every class owns a private alphabet of CJK ideographs and a vocabulary
//! of two-character words over it. An overlap pool, built the same way from
//! its own alphabet, is shared by all classes. Documents are space-joined
//! words, so word mode sees the words and char mode sees the ideographs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{ingest_reader, Corpus, Split, TokenMode};
use crate::error::{Error, Result};
use crate::numcore::Rng;

const FIRST_IDEOGRAPH: u32 = 0x4E00;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub classes: usize,
    pub docs_per_class: usize,
    pub vocab_per_class: usize,
    /// Size of the shared overlap vocabulary; 0 makes classes token-disjoint.
    pub overlap: usize,
    /// Probability that a token is drawn from the overlap vocabulary.
    pub overlap_rate: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            classes: 5,
            docs_per_class: 200,
            vocab_per_class: 40,
            overlap: 20,
            overlap_rate: 0.3,
            min_len: 12,
            max_len: 24,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthRecord {
    pub id: String,
    pub text: String,
    pub label: String,
    pub split: Split,
}

/// Smallest alphabet whose two-letter words cover `words`.
fn alphabet_size(words: usize) -> usize {
    let mut k = 1;
    while k * k < words {
        k += 1;
    }
    k
}

/// `count` distinct two-letter words over an alphabet starting at `base`.
fn draw_words(base: u32, count: usize, rng: &mut Rng) -> (Vec<String>, u32) {
    let k = alphabet_size(count) as u32;
    let mut all: Vec<String> = (0..k * k)
        .map(|w| {
            let a = char::from_u32(base + w / k).expect("ideograph");
            let b = char::from_u32(base + w % k).expect("ideograph");
            [a, b].iter().collect()
        })
        .collect();
    rng.shuffle(&mut all);
    all.truncate(count);
    (all, base + k)
}

pub fn class_label(class: usize) -> String {
    format!("class{class}")
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.classes == 0 || self.docs_per_class == 0 || self.vocab_per_class == 0 {
            return bad("classes, docs_per_class and vocab_per_class must be positive");
        }
        if !(0.0..=1.0).contains(&self.overlap_rate)
            || (self.overlap > 0 && self.overlap_rate == 1.0)
        {
            return bad("overlap_rate must lie in [0, 1)");
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return bad("document lengths need 0 < min_len <= max_len");
        }
        Ok(())
    }

    /// Generates the records. Splits are stratified 80/10/10 per class and
    /// the output order is shuffled.
    pub fn generate(&self) -> Result<Vec<SynthRecord>> {
        self.validate()?;
        let mut rng = Rng::new(self.seed);
        let mut base = FIRST_IDEOGRAPH;
        let mut class_words = Vec::with_capacity(self.classes);
        for _ in 0..self.classes {
            let (words, next) = draw_words(base, self.vocab_per_class, &mut rng);
            class_words.push(words);
            base = next;
        }
        let overlap_words = if self.overlap > 0 {
            draw_words(base, self.overlap, &mut rng).0
        } else {
            Vec::new()
        };

        let width = (self.classes * self.docs_per_class).to_string().len();
        let n_train = (0.8 * self.docs_per_class as f64).round() as usize;
        let n_val = (0.1 * self.docs_per_class as f64).round() as usize;
        let mut records = Vec::with_capacity(self.classes * self.docs_per_class);
        for (class, words) in class_words.iter().enumerate() {
            let mut splits: Vec<Split> = (0..self.docs_per_class)
                .map(|i| match i {
                    i if i < n_train => Split::Train,
                    i if i < n_train + n_val => Split::Val,
                    _ => Split::Test,
                })
                .collect();
            rng.shuffle(&mut splits);
            for split in splits {
                let len = self.min_len + rng.below(self.max_len - self.min_len + 1);
                let mut text = String::new();
                for t in 0..len {
                    let pool = if !overlap_words.is_empty() && rng.uniform() < self.overlap_rate {
                        &overlap_words
                    } else {
                        words
                    };
                    if t > 0 {
                        text.push(' ');
                    }
                    text.push_str(&pool[rng.below(pool.len())]);
                }
                records.push(SynthRecord {
                    id: String::new(),
                    text,
                    label: class_label(class),
                    split,
                });
            }
        }
        rng.shuffle(&mut records);
        for (i, r) in records.iter_mut().enumerate() {
            r.id = format!("d{i:0width$}");
        }
        Ok(records)
    }

    /// The records as JSON lines, the raw input format of ingestion.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in self.generate()? {
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string(&r).expect("record serializes")
            );
        }
        Ok(out)
    }

    pub fn corpus(&self, mode: TokenMode) -> Result<Corpus> {
        ingest_reader(self.to_jsonl()?.as_bytes(), mode)
    }
}
