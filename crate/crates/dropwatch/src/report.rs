//! Evaluation reports as JSON. The console table is the `Display` of
//! [`Summary`].

use std::path::Path;

use dropwatch_core::evaluation::Summary;

use crate::error::{read_text, write_file, Result};

pub fn to_json(summary: &Summary) -> Result<String> {
    let mut s = serde_json::to_string_pretty(summary)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<Summary> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_report(path: &Path, summary: &Summary) -> Result<()> {
    write_file(path, to_json(summary)?)
}

pub fn read_report(path: &Path) -> Result<Summary> {
    from_json(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dropwatch_core::evaluation::{summarize, LabeledRegions, MseSummary, Rule, ScoredRange};

    #[test]
    fn json_round_trip() {
        let flags = [false, true, true, false];
        let labels = LabeledRegions::new(vec![(1, 1)]).unwrap();
        let s = summarize(
            &[(Rule::Accumulator, &flags), (Rule::Intersection, &flags)],
            &labels,
            &ScoredRange::new(0..4),
            MseSummary {
                train: Some(0.25),
                validation: None,
            },
        )
        .unwrap();
        let json = to_json(&s).unwrap();
        assert!(json.contains("\"false_positives\": 1"));
        assert_eq!(from_json(&json).unwrap(), s);
    }
}
