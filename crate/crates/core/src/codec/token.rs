use std::fmt;

use serde::Serialize;

use super::{is_valid_name, Vocab};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "value")]
pub enum TokenItem {
    FieldStart(String),
    FieldEnd(String),
    ClassToken(String),
    PromptToken(String),
    Text(String),
}

impl TokenItem {
    pub fn is_special(&self) -> bool {
        !matches!(self, TokenItem::Text(_))
    }
}

impl fmt::Display for TokenItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenItem::FieldStart(n) => write!(f, "[START_{n}]"),
            TokenItem::FieldEnd(n) => write!(f, "[END_{n}]"),
            TokenItem::ClassToken(n) | TokenItem::PromptToken(n) => write!(f, "[{n}]"),
            TokenItem::Text(t) => {
                for c in t.chars() {
                    match c {
                        '[' => f.write_str("\\[")?,
                        ']' => f.write_str("\\]")?,
                        c => write!(f, "{c}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct TokenSeq(pub Vec<TokenItem>);

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn items(&self) -> &[TokenItem] {
        &self.0
    }

    pub fn starts_with(&self, prefix: &TokenSeq) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// One-line surface form. A text span is separated from a neighbouring
    /// special token by exactly one space.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut prev: Option<&TokenItem> = None;
        for item in &self.0 {
            if let Some(p) = prev {
                if !(p.is_special() && item.is_special()) {
                    f.write_str(" ")?;
                }
            }
            write!(f, "{item}")?;
            prev = Some(item);
        }
        Ok(())
    }
}

impl From<Vec<TokenItem>> for TokenSeq {
    fn from(items: Vec<TokenItem>) -> Self {
        TokenSeq(items)
    }
}

impl FromIterator<TokenItem> for TokenSeq {
    fn from_iter<I: IntoIterator<Item = TokenItem>>(iter: I) -> Self {
        TokenSeq(iter.into_iter().collect())
    }
}

/// Parses the one-line surface form. Never fails: bracketed text that is not
/// a recognizable special token is kept as literal text.
///
/// `[START_x]` / `[END_x]` are field tokens for any valid name `x`; other
/// `[name]` tokens must be a registered class or task token.
pub fn parse_surface(line: &str, vocab: &Vocab) -> TokenSeq {
    let mut items = Vec::new();
    let mut span = String::new();
    let mut after_special = false;
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\\' && matches!(chars.get(i + 1), Some('[') | Some(']')) {
            span.push(chars[i + 1]);
            i += 2;
            continue;
        }
        if c == '[' {
            if let Some(len) = chars[i + 1..].iter().position(|&c| c == ']' || c == '[') {
                if chars[i + 1 + len] == ']' {
                    let name: String = chars[i + 1..i + 1 + len].iter().collect();
                    if let Some(token) = special_token(&name, vocab) {
                        flush_span(&mut items, &mut span, after_special, true);
                        items.push(token);
                        after_special = true;
                        i += len + 2;
                        continue;
                    }
                }
            }
        }
        span.push(c);
        i += 1;
    }
    flush_span(&mut items, &mut span, after_special, false);
    TokenSeq(items)
}

fn special_token(name: &str, vocab: &Vocab) -> Option<TokenItem> {
    if let Some(field) = name.strip_prefix("START_") {
        return is_valid_name(field).then(|| TokenItem::FieldStart(field.to_string()));
    }
    if let Some(field) = name.strip_prefix("END_") {
        return is_valid_name(field).then(|| TokenItem::FieldEnd(field.to_string()));
    }
    if vocab.has_class(name) {
        Some(TokenItem::ClassToken(name.to_string()))
    } else if vocab.has_prompt_token(name) {
        Some(TokenItem::PromptToken(name.to_string()))
    } else {
        None
    }
}

fn flush_span(items: &mut Vec<TokenItem>, span: &mut String, trim_lead: bool, trim_trail: bool) {
    let mut text = std::mem::take(span);
    if trim_trail && text.ends_with(' ') {
        text.pop();
    }
    if trim_lead && text.starts_with(' ') {
        text.remove(0);
    }
    if !text.is_empty() {
        items.push(TokenItem::Text(text));
    }
}
