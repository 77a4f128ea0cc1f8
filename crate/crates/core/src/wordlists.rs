//! Built-in target and attribute word lists.
//!
//! The `PRINTED_*` tables reproduce the published lists entry for entry.
//! [`builtin`] serves the cleaned form: lowercased, with repeated entries
//! removed (see [`dedup_manifest`]).

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::weat::{SetLabels, WordSets};

pub const PRINTED_FEMALE_NAMES: &[&str] = &["joan", "lisa", "sarah", "diana", "kate", "ann", "amy", "donna"];

pub const PRINTED_MALE_NAMES: &[&str] = &["john", "paul", "mike", "kevin", "steve", "greg", "jeff", "bill"];

pub const PRINTED_CAREER_WORDS: &[&str] = &[
    "executive",
    "management",
    "professional",
    "corporation",
    "salary",
    "office",
    "business",
    "career",
];

pub const PRINTED_FAMILY_WORDS: &[&str] = &[
    "home", "parents", "children", "family", "cousins", "marriage", "wedding", "relatives",
];

pub const PRINTED_FEMALE_WORDS: &[&str] = &[
    "she", "hers", "her", "woman", "female", "herself", "women", "females", "gal", "girl",
];

pub const PRINTED_MALE_WORDS: &[&str] = &[
    "he", "his", "him", "man", "male", "himself", "men", "males", "guy", "boy",
];

pub const PRINTED_POSITIVE_ATTRIBUTES: &[&str] = &[
    "Honest",
    "reasonable",
    "independent",
    "thorough",
    "dependable",
    "rational",
    "relaxed",
    "loyal",
    "reliable",
    "disciplined",
    "patience",
    "creative",
    "innovative",
    "planned",
    "resolute",
    "resisted",
    "industrious",
    "creative",
    "determined",
    "wise",
    "tough",
    "jolly",
    "civilized",
    "strong",
    "enterprising",
    "quick",
    "logical",
    "original",
    "methodical",
    "kind",
];

pub const PRINTED_NEGATIVE_ATTRIBUTES: &[&str] = &[
    "unfriendly",
    "unkind",
    "rigid",
    "moody",
    "intolerant",
    "hedonistic",
    "tempted",
    "fragile",
    "indulgent",
    "irresponsible",
    "instinctive",
    "dissatisfied",
    "conformist",
    "impulsive",
    "fickle",
    "unreliable",
    "emotional",
    "conformist",
    "vain",
    "lazy",
    "submissive",
    "irritable",
    "frivolous",
    "inhibited",
    "sensitive",
    "vindictive",
    "complicated",
    "changeable",
    "sarcastic",
];

pub const PRINTED_FLOWERS: &[&str] = &[
    "aster",
    "clover",
    "hyacinth",
    "marigold",
    "poppy",
    "iris",
    "orchid",
    "rose",
    "daffodil",
    "lilac",
    "pansy",
    "tulip",
    "buttercup",
    "daisy",
    "lily",
    "peony",
    "violet",
    "carnation",
    "magnolia",
    "petunia",
    "bluebell",
];

pub const PRINTED_INSECTS: &[&str] = &[
    "caterpillar",
    "flea",
    "locust",
    "bedbug",
    "centipede",
    "fly",
    "maggot",
    "tarantula",
    "bee",
    "cockroach",
    "gnat",
    "mosquito",
    "termite",
    "beetle",
    "cricket",
    "hornet",
    "moth",
    "dragonfly",
    "roach",
];

pub const PRINTED_VALIDATION_POSITIVE: &[&str] = &[
    "caress", "freedom", "love", "peace", "cheer", "friend", "heaven", "loyal", "pleasure", "diamond",
    "gentle", "honest", "lucky", "rainbow", "diploma", "gift", "honor", "miracle", "sunrise", "happy",
    "laughter", "paradise", "vacation",
];

pub const PRINTED_VALIDATION_NEGATIVE: &[&str] = &[
    "abuse", "crash", "filth", "murder", "sickness", "accident", "death", "grief", "poison", "stink",
    "assault", "disaster", "hatred", "pollute", "tragedy", "bomb", "divorce", "jail", "poverty", "ugly",
    "cancer", "evil", "kill", "rotten", "vomit",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ListId {
    FemaleNames,
    MaleNames,
    CareerWords,
    FamilyWords,
    FemaleWords,
    MaleWords,
    PositiveAttributes,
    NegativeAttributes,
    Flowers,
    Insects,
    ValidationPositive,
    ValidationNegative,
}

impl ListId {
    pub const ALL: [ListId; 12] = [
        ListId::FemaleNames,
        ListId::MaleNames,
        ListId::CareerWords,
        ListId::FamilyWords,
        ListId::FemaleWords,
        ListId::MaleWords,
        ListId::PositiveAttributes,
        ListId::NegativeAttributes,
        ListId::Flowers,
        ListId::Insects,
        ListId::ValidationPositive,
        ListId::ValidationNegative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ListId::FemaleNames => "female_names",
            ListId::MaleNames => "male_names",
            ListId::CareerWords => "career_words",
            ListId::FamilyWords => "family_words",
            ListId::FemaleWords => "female_words",
            ListId::MaleWords => "male_words",
            ListId::PositiveAttributes => "positive_attributes",
            ListId::NegativeAttributes => "negative_attributes",
            ListId::Flowers => "flowers",
            ListId::Insects => "insects",
            ListId::ValidationPositive => "validation_positive",
            ListId::ValidationNegative => "validation_negative",
        }
    }

    /// Human-readable name for report sentences.
    pub fn label(self) -> &'static str {
        match self {
            ListId::FemaleNames => "female names",
            ListId::MaleNames => "male names",
            ListId::CareerWords => "career words",
            ListId::FamilyWords => "family words",
            ListId::FemaleWords => "female words",
            ListId::MaleWords => "male words",
            ListId::PositiveAttributes => "positive attributes",
            ListId::NegativeAttributes => "negative attributes",
            ListId::Flowers => "flowers",
            ListId::Insects => "insects",
            ListId::ValidationPositive => "pleasant words",
            ListId::ValidationNegative => "unpleasant words",
        }
    }

    /// The list exactly as published.
    pub fn printed(self) -> &'static [&'static str] {
        match self {
            ListId::FemaleNames => PRINTED_FEMALE_NAMES,
            ListId::MaleNames => PRINTED_MALE_NAMES,
            ListId::CareerWords => PRINTED_CAREER_WORDS,
            ListId::FamilyWords => PRINTED_FAMILY_WORDS,
            ListId::FemaleWords => PRINTED_FEMALE_WORDS,
            ListId::MaleWords => PRINTED_MALE_WORDS,
            ListId::PositiveAttributes => PRINTED_POSITIVE_ATTRIBUTES,
            ListId::NegativeAttributes => PRINTED_NEGATIVE_ATTRIBUTES,
            ListId::Flowers => PRINTED_FLOWERS,
            ListId::Insects => PRINTED_INSECTS,
            ListId::ValidationPositive => PRINTED_VALIDATION_POSITIVE,
            ListId::ValidationNegative => PRINTED_VALIDATION_NEGATIVE,
        }
    }
}

impl fmt::Display for ListId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ListId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ListId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownList {
                name: s.to_string(),
                valid: ListId::ALL.iter().map(|id| id.as_str().to_string()).collect(),
            })
    }
}

/// A word removed while cleaning a printed list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Removal {
    pub list: &'static str,
    pub word: String,
    /// How many times the word was printed.
    pub printed_count: usize,
}

struct Cleaned {
    lists: Vec<Vec<String>>,
    removals: Vec<Removal>,
}

static CLEANED: LazyLock<Cleaned> = LazyLock::new(|| {
    let mut lists = Vec::new();
    let mut removals = Vec::new();
    for id in ListId::ALL {
        let mut out: Vec<String> = Vec::new();
        for raw in id.printed() {
            let w = raw.to_lowercase();
            if out.contains(&w) {
                if let Some(r) = removals.iter_mut().find(|r: &&mut Removal| r.list == id.as_str() && r.word == w) {
                    r.printed_count += 1;
                } else {
                    removals.push(Removal {
                        list: id.as_str(),
                        word: w,
                        printed_count: 2,
                    });
                }
            } else {
                out.push(w);
            }
        }
        lists.push(out);
    }
    Cleaned { lists, removals }
});

/// The cleaned built-in list.
pub fn builtin(id: ListId) -> &'static [String] {
    let idx = ListId::ALL.iter().position(|&x| x == id).expect("listed id");
    &CLEANED.lists[idx]
}

/// Look up a built-in list by its string id.
pub fn builtin_by_name(name: &str) -> Result<&'static [String]> {
    name.parse().map(builtin)
}

/// Entries removed as repeats during cleaning.
pub fn dedup_manifest() -> &'static [Removal] {
    &CLEANED.removals
}

fn sets(name: &str, x: ListId, y: ListId, a: ListId, b: ListId) -> WordSets {
    WordSets {
        name: name.to_string(),
        x: builtin(x).to_vec(),
        y: builtin(y).to_vec(),
        a: builtin(a).to_vec(),
        b: builtin(b).to_vec(),
        labels: Some(SetLabels {
            x: x.label().into(),
            y: y.label().into(),
            a: a.label().into(),
            b: b.label().into(),
        }),
    }
}

/// The four gender comparisons run per corpus: male (X) versus female (Y)
/// names and words, against career (A) / family (B) and positive (A) /
/// negative (B) attributes.
pub fn standard_audits() -> Vec<WordSets> {
    use ListId::*;
    vec![
        sets("names-career-family", MaleNames, FemaleNames, CareerWords, FamilyWords),
        sets("names-positive-negative", MaleNames, FemaleNames, PositiveAttributes, NegativeAttributes),
        sets("words-career-family", MaleWords, FemaleWords, CareerWords, FamilyWords),
        sets("words-positive-negative", MaleWords, FemaleWords, PositiveAttributes, NegativeAttributes),
    ]
}

/// Flowers (X) versus insects (Y) against pleasant (A) / unpleasant (B).
pub fn validation_sets() -> WordSets {
    use ListId::*;
    sets("validation-flowers-insects", Flowers, Insects, ValidationPositive, ValidationNegative)
}

/// Every built-in configuration, validation first.
pub fn all_sets() -> Vec<WordSets> {
    let mut all = vec![validation_sets()];
    all.extend(standard_audits());
    all
}

/// All built-in configurations as a JSON array of word-set objects.
pub fn export_json() -> Result<String> {
    Ok(serde_json::to_string_pretty(&all_sets())?)
}
