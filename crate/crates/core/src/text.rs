/// Canonical form for knowledge-base keys and queries: lowercase, punctuation
/// other than hyphens and underscores removed, whitespace collapsed.
pub fn normalize(text: &str) -> String {
    let cleaned: String = text
        .chars()
        .filter(|&c| c != '\'')
        .map(|c| {
            if c.is_alphanumeric() || c == '-' || c == '_' {
                c.to_lowercase().next().unwrap_or(c)
            } else {
                ' '
            }
        })
        .collect();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strips_punctuation_keeps_hyphens() {
        assert_eq!(normalize("  Put beverage in   the fridge. "), "put beverage in the fridge");
        assert_eq!(normalize("Open the fridge-door!"), "open the fridge-door");
        assert_eq!(normalize("don't"), "dont");
        assert_eq!(normalize(""), "");
    }

    proptest! {
        #[test]
        fn idempotent(s in "\\PC{0,40}") {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once.clone());
        }
    }
}
