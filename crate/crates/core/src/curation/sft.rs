use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::extract_answer;
use crate::model::{Label, McqPair};

pub const ANSWER_INSTRUCTION: &str = "Answer with the letter of the correct option.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SftStyle {
    /// Rephrase, contrastive analysis, then the answer.
    Rac,
    /// Answer line only.
    Plain,
}

impl FromStr for SftStyle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rac" => Ok(SftStyle::Rac),
            "plain" => Ok(SftStyle::Plain),
            other => Err(Error::Config(format!("unknown SFT style {other:?}, expected rac or plain"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftMeta {
    pub id: String,
    pub answer: Label,
    pub subdomain: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftRecord {
    pub prompt: String,
    pub response: String,
    pub meta: SftMeta,
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Question, the four labeled options (one per line), and the answer
/// instruction. Shared by SFT prompts and evaluation prompts.
pub fn format_question_block(pair: &McqPair) -> String {
    let mut out = String::new();
    out.push_str(pair.question.trim());
    out.push_str("\n\n");
    for (label, text) in pair.choices.iter() {
        out.push_str(&format!("{label}. {}\n", one_line(text)));
    }
    out.push('\n');
    out.push_str(ANSWER_INSTRUCTION);
    out
}

fn rac_response(pair: &McqPair) -> String {
    let expl = pair.explanations.as_ref().expect("checked RaC-complete");
    let mut out = format!(
        "Rephrase: {}\nAnalysis:\n",
        one_line(pair.rephrase.as_deref().expect("checked RaC-complete"))
    );
    out.push_str(&format!("{}. {}\n", pair.answer, one_line(&expl[&pair.answer])));
    for label in Label::ALL.iter().filter(|&&l| l != pair.answer) {
        out.push_str(&format!("{label}. {}\n", one_line(&expl[label])));
    }
    out.push_str(&format!("Answer: {}", pair.answer));
    out
}

/// One prompt/response record per pair.
pub fn export_sft(pairs: &[McqPair], style: SftStyle) -> Result<Vec<SftRecord>> {
    if style == SftStyle::Rac {
        let incomplete: Vec<&str> = pairs
            .iter()
            .filter(|p| !p.is_rac_complete())
            .map(|p| p.id.as_str())
            .collect();
        if !incomplete.is_empty() {
            return Err(Error::Validation(format!(
                "{} pair(s) are not RaC-complete: {}",
                incomplete.len(),
                incomplete.join(", ")
            )));
        }
    }
    Ok(pairs
        .iter()
        .map(|p| SftRecord {
            prompt: format_question_block(p),
            response: match style {
                SftStyle::Rac => rac_response(p),
                SftStyle::Plain => format!("Answer: {}", p.answer),
            },
            meta: SftMeta {
                id: p.id.clone(),
                answer: p.answer,
                subdomain: p.subdomain.clone(),
            },
        })
        .collect())
}

/// The label stated on the final line of an exported response.
pub fn sft_answer(response: &str) -> Option<Label> {
    response.lines().last().and_then(extract_answer)
}
