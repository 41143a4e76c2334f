//! Label normalization used everywhere two names are compared: rule labels
//! against model labels, extracted artifacts against ground truth.

/// Normalizes a label into a matching key: lowercase, inner whitespace runs
/// collapsed to single spaces, leading and trailing punctuation stripped.
///
/// Idempotent: `normalize_label(normalize_label(x)) == normalize_label(x)`.
pub fn normalize_label(text: &str) -> String {
    let lowered = text.to_lowercase();
    let collapsed: Vec<&str> = lowered.split_whitespace().collect();
    let joined = collapsed.join(" ");
    joined
        .trim_matches(|c: char| c.is_ascii_punctuation())
        .trim()
        .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapses_whitespace_and_case() {
        assert_eq!(
            normalize_label("  Develop   CPU Core IP "),
            "develop cpu core ip"
        );
        assert_eq!(normalize_label("TSMC"), "tsmc");
    }

    #[test]
    fn strips_edge_punctuation() {
        assert_eq!(
            normalize_label("Compliance Verified?"),
            "compliance verified"
        );
        assert_eq!(normalize_label("\"quoted\""), "quoted");
        // Inner punctuation is preserved.
        assert_eq!(normalize_label("System-on-Chip"), "system-on-chip");
    }

    #[test]
    fn idempotent() {
        for s in ["  A  b ", "X?", "..y..", "I/O Interface"] {
            let once = normalize_label(s);
            assert_eq!(normalize_label(&once), once);
        }
    }
}
