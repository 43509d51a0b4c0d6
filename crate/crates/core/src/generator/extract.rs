/// First `<svg ...>...</svg>` span in `text` that is well-formed XML.
pub fn extract_svg(text: &str) -> Option<&str> {
    const CLOSE: &str = "</svg>";
    let mut search = 0;
    while let Some(rel) = text[search..].find("<svg") {
        let start = search + rel;
        let after = text[start + 4..].chars().next();
        if matches!(after, Some(c) if c.is_whitespace() || c == '>' || c == '/') {
            let mut end_search = start;
            while let Some(end_rel) = text[end_search..].find(CLOSE) {
                let end = end_search + end_rel + CLOSE.len();
                let candidate = &text[start..end];
                if roxmltree::Document::parse(candidate).is_ok() {
                    return Some(candidate);
                }
                end_search = end;
            }
        }
        search = start + 4;
    }
    None
}
