//! Parsing of width-index ranges such as `0..3`, `2..=5`, `4` or `1,3,5`.

use anyhow::{bail, Context, Result};

/// Parses an index set. `a..b` includes `b`, as does `a..=b`.
pub fn parse_indices(text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if let Some((lo, hi)) = part.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let lo: usize = lo.trim().parse().with_context(|| format!("bad range start in '{part}'"))?;
            let hi: usize = hi.trim().parse().with_context(|| format!("bad range end in '{part}'"))?;
            if hi < lo {
                bail!("empty range '{part}'");
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().with_context(|| format!("bad index '{part}'"))?);
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        bail!("index range '{text}' is empty");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_indices("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_indices("2..=4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_indices("5").unwrap(), vec![5]);
        assert_eq!(parse_indices("3,1,3").unwrap(), vec![1, 3]);
        assert!(parse_indices("4..2").is_err());
        assert!(parse_indices("a").is_err());
        assert!(parse_indices("").is_err());
    }
}
