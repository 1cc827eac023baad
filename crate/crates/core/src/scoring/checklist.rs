//! Checklist engine: data-driven keyword/pattern matchers.
//!
//! Each checklist is shipped as a TOML asset listing items with weights and
//! trigger patterns, so the exact matching inventory is auditable and
//! versioned. Weights are converted to integer hundredths at load time;
//! sub-scores are therefore exact decimals and the 1.0 cap is exact.

use crate::casegen::Case;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChecklistError {
    #[error("failed to parse checklist: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("checklist item {id}: {problem}")]
    BadItem { id: String, problem: String },
}

/// How one checklist item decides whether it matches.
#[derive(Debug, Clone)]
pub enum ItemKind {
    /// Any listed pattern appears (token-boundary prefix match).
    Any { patterns: Vec<String> },
    /// Every pattern of at least one group appears.
    Cooccur { groups: Vec<Vec<String>> },
    /// Text contains a digit (numeric values, including decimals/currency).
    Numeric,
    /// Strictly more than `threshold` whitespace-delimited words.
    MinWords { threshold: usize },
    /// Names a regulatory flag actually present on the case.
    CaseFlag,
    /// Names a case-specific detail: listed keywords or the case's own
    /// jurisdiction label (exact token).
    CaseDetail { patterns: Vec<String> },
}

/// One weighted checklist item.
#[derive(Debug, Clone)]
pub struct ChecklistItem {
    pub id: String,
    /// Weight in hundredths (0.15 -> 15), kept integral for exact sums.
    pub weight_hundredths: u32,
    pub kind: ItemKind,
}

/// Match outcome for a single item, emitted in score dumps.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ItemMatch {
    pub id: String,
    pub weight: f64,
    pub matched: bool,
}

#[derive(Debug, Deserialize)]
struct RawItem {
    id: String,
    weight: f64,
    kind: String,
    #[serde(default)]
    patterns: Vec<String>,
    #[serde(default)]
    groups: Vec<Vec<String>>,
    #[serde(default)]
    threshold: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct RawChecklist {
    name: String,
    #[serde(rename = "item")]
    items: Vec<RawItem>,
}

/// A named, ordered list of weighted items.
#[derive(Debug, Clone)]
pub struct Checklist {
    pub name: String,
    pub items: Vec<ChecklistItem>,
}

impl Checklist {
    pub fn from_toml(text: &str) -> Result<Checklist, ChecklistError> {
        let raw: RawChecklist = toml::from_str(text)?;
        let mut items = Vec::with_capacity(raw.items.len());
        for item in raw.items {
            let hundredths = (item.weight * 100.0).round();
            if !(0.0..=100.0).contains(&hundredths) || (item.weight * 100.0 - hundredths).abs() > 1e-9 {
                return Err(ChecklistError::BadItem {
                    id: item.id,
                    problem: format!("weight {} is not a whole number of hundredths", item.weight),
                });
            }
            let kind = match item.kind.as_str() {
                "any" => ItemKind::Any { patterns: lowercase_all(item.patterns) },
                "cooccur" => ItemKind::Cooccur {
                    groups: item.groups.into_iter().map(lowercase_all).collect(),
                },
                "numeric" => ItemKind::Numeric,
                "min_words" => ItemKind::MinWords {
                    threshold: item.threshold.ok_or_else(|| ChecklistError::BadItem {
                        id: item.id.clone(),
                        problem: "min_words requires a threshold".to_string(),
                    })?,
                },
                "case_flag" => ItemKind::CaseFlag,
                "case_detail" => ItemKind::CaseDetail { patterns: lowercase_all(item.patterns) },
                other => {
                    return Err(ChecklistError::BadItem {
                        id: item.id,
                        problem: format!("unknown kind {other:?}"),
                    })
                }
            };
            items.push(ChecklistItem { id: item.id, weight_hundredths: hundredths as u32, kind });
        }
        Ok(Checklist { name: raw.name, items })
    }

    /// Score text against every item; the sub-score is the capped weight sum.
    ///
    /// `case` feeds the case-aware items; checklists without such items can
    /// pass `None`.
    pub fn score(&self, text: &str, case: Option<&Case>) -> (f64, Vec<ItemMatch>) {
        let lower = text.to_lowercase();
        let words = text.split_whitespace().count();
        let mut sum: u32 = 0;
        let mut matches = Vec::with_capacity(self.items.len());
        for item in &self.items {
            let matched = match &item.kind {
                ItemKind::Any { patterns } => patterns.iter().any(|p| token_prefix_match(&lower, p)),
                ItemKind::Cooccur { groups } => groups
                    .iter()
                    .any(|group| group.iter().all(|p| token_prefix_match(&lower, p))),
                ItemKind::Numeric => lower.chars().any(|c| c.is_ascii_digit()),
                ItemKind::MinWords { threshold } => words > *threshold,
                ItemKind::CaseFlag => case.map_or(false, |c| {
                    c.flags.iter().any(|f| token_prefix_match(&lower, &f.as_str().to_lowercase()))
                }),
                ItemKind::CaseDetail { patterns } => {
                    patterns.iter().any(|p| token_prefix_match(&lower, p))
                        || case.map_or(false, |c| {
                            let label = c.jurisdiction.to_lowercase();
                            tokens(&lower).any(|t| t == label)
                        })
                }
            };
            if matched {
                sum += item.weight_hundredths;
            }
            matches.push(ItemMatch {
                id: item.id.clone(),
                weight: item.weight_hundredths as f64 / 100.0,
                matched,
            });
        }
        (sum.min(100) as f64 / 100.0, matches)
    }
}

fn lowercase_all(patterns: Vec<String>) -> Vec<String> {
    patterns.into_iter().map(|p| p.to_lowercase()).collect()
}

fn tokens(lower: &str) -> impl Iterator<Item = &str> {
    lower.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty())
}

/// Case-insensitive containment with the pattern anchored at a word
/// boundary; the matched word may extend past the pattern ("need" matches
/// "needed", "investigate" does not match "gate").
fn token_prefix_match(lower_text: &str, lower_pattern: &str) -> bool {
    lower_text.match_indices(lower_pattern).any(|(idx, _)| {
        idx == 0
            || lower_text[..idx]
                .chars()
                .next_back()
                .map_or(true, |c| !c.is_alphanumeric())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_match_respects_word_boundaries() {
        assert!(token_prefix_match("the risk is high", "risk"));
        assert!(token_prefix_match("risky business", "risk"));
        assert!(token_prefix_match("documentation needed", "need"));
        assert!(!token_prefix_match("we must investigate", "gate"));
        assert!(!token_prefix_match("asterisk", "risk"));
        assert!(token_prefix_match("(0.112) falls", "0.112"));
    }

    #[test]
    fn weights_must_be_hundredths() {
        let text = r#"
            name = "t"
            [[item]]
            id = "x"
            weight = 0.123
            kind = "numeric"
        "#;
        assert!(matches!(Checklist::from_toml(text), Err(ChecklistError::BadItem { .. })));
    }

    #[test]
    fn score_caps_at_one() {
        let text = r#"
            name = "t"
            [[item]]
            id = "a"
            weight = 0.60
            kind = "any"
            patterns = ["alpha"]
            [[item]]
            id = "b"
            weight = 0.60
            kind = "any"
            patterns = ["beta"]
        "#;
        let list = Checklist::from_toml(text).unwrap();
        let (score, matches) = list.score("alpha beta", None);
        assert_eq!(score, 1.0);
        assert!(matches.iter().all(|m| m.matched));
    }

    #[test]
    fn exact_decimal_sums() {
        let text = r#"
            name = "t"
            [[item]]
            id = "a"
            weight = 0.15
            kind = "any"
            patterns = ["alpha"]
            [[item]]
            id = "b"
            weight = 0.10
            kind = "any"
            patterns = ["beta"]
        "#;
        let list = Checklist::from_toml(text).unwrap();
        let (score, _) = list.score("alpha beta", None);
        assert_eq!(score, 0.25);
    }
}
