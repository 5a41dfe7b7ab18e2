//! Word tokenization shared by term matching, embedding training and the
//! word-level classifier.

/// Lowercases, splits on whitespace and trims punctuation from both ends of
/// each token. A leading `#` or `@` survives so hashtags and handles stay
/// distinct terms. Tokens that are pure punctuation disappear.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().filter_map(clean_token).collect()
}

/// Cleans one whitespace-delimited token; `None` if nothing word-like is left.
pub fn clean_token(raw: &str) -> Option<String> {
    let lower = raw.to_lowercase();
    if is_url(&lower) {
        return Some(lower);
    }
    let trimmed = lower.trim_end_matches(|c: char| !c.is_alphanumeric());
    let body_start = trimmed.find(char::is_alphanumeric)?;
    let body = &trimmed[body_start..];
    match trimmed[..body_start].chars().last() {
        Some(sigil @ ('#' | '@')) => Some(format!("{sigil}{body}")),
        _ => Some(body.to_string()),
    }
}

pub fn is_url(token: &str) -> bool {
    let t = token.to_ascii_lowercase();
    t.starts_with("http://") || t.starts_with("https://") || t.starts_with("www.")
}
