//! Word-boundary string scanning and replacement helpers shared by the
//! perturbation, corpus, and evaluation stages.

/// True if `c` belongs to a word (so a boundary is anything else).
fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

/// Byte offset of the first whole-word occurrence of `needle` in `haystack`
/// at or after `from`. A match counts only when the characters immediately
/// before and after it are not word characters.
pub fn find_word(haystack: &str, needle: &str, from: usize) -> Option<usize> {
    if needle.is_empty() {
        return None;
    }
    let mut start = from;
    while let Some(rel) = haystack[start..].find(needle) {
        let at = start + rel;
        let end = at + needle.len();
        let ok_before = haystack[..at]
            .chars()
            .next_back()
            .map_or(true, |c| !is_word_char(c));
        let ok_after = haystack[end..].chars().next().map_or(true, |c| !is_word_char(c));
        if ok_before && ok_after {
            return Some(at);
        }
        start = at + needle.len().max(1);
    }
    None
}

/// Whether `needle` occurs in `haystack` as a whole word.
pub fn contains_word(haystack: &str, needle: &str) -> bool {
    find_word(haystack, needle, 0).is_some()
}

/// Replace every whole-word occurrence of the mapped keys in `text`.
///
/// Keys are applied longest-first so that "Vancouver Canucks" wins over
/// "Vancouver"; replaced spans are never rescanned, so a replacement value
/// that happens to contain another key is left alone.
pub fn replace_words(text: &str, mapping: &[(String, String)]) -> String {
    let mut keys: Vec<&(String, String)> = mapping.iter().filter(|(k, _)| !k.is_empty()).collect();
    keys.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));

    // Collect non-overlapping match spans over the original text.
    let mut spans: Vec<(usize, usize, &str)> = Vec::new();
    for (key, value) in keys {
        let mut from = 0;
        while let Some(at) = find_word(text, key, from) {
            let end = at + key.len();
            if !spans.iter().any(|&(s, e, _)| at < e && s < end) {
                spans.push((at, end, value.as_str()));
            }
            from = end;
        }
    }
    spans.sort_by_key(|&(s, _, _)| s);

    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for (start, end, value) in spans {
        out.push_str(&text[cursor..start]);
        out.push_str(value);
        cursor = end;
    }
    out.push_str(&text[cursor..]);
    out
}

/// Whether `part` occurs in `whole` as a contiguous run of whole words
/// ("Silverberg" within "Robert Silverberg", but not "ilverb").
pub fn is_word_subsequence(part: &str, whole: &str) -> bool {
    !part.is_empty() && contains_word(whole, part)
}
