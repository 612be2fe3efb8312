use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{StoryCategory, StoryMetrics};
use crate::numeric::Scalar;

/// A stored story's id with its metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct StoryPoint<S> {
    pub story_id: String,
    pub metrics: StoryMetrics<S>,
}

/// One point of the propagation-versus-skepticism plot. Rows whose
/// skepticism is the infinite sentinel carry no value and are flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow<S> {
    pub story_id: String,
    pub propagation_h: u64,
    pub skepticism: Option<S>,
    pub skepticism_infinite: bool,
    pub category: StoryCategory,
}

pub fn scatter_export<S: Scalar>(stories: &[StoryPoint<S>]) -> Vec<ScatterRow<S>> {
    let mut rows: Vec<ScatterRow<S>> = stories
        .iter()
        .map(|s| ScatterRow {
            story_id: s.story_id.clone(),
            propagation_h: s.metrics.propagation_h,
            skepticism: s.metrics.skepticism.finite(),
            skepticism_infinite: s.metrics.skepticism.is_infinite(),
            category: s.metrics.category,
        })
        .collect();
    rows.sort_by(|a, b| a.story_id.cmp(&b.story_id));
    rows
}

/// Comma-separated with a header row; the skepticism cell is empty for
/// flagged rows.
pub fn write_scatter_csv<S: Scalar, W: Write>(rows: &[ScatterRow<S>], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record([
            "story_id",
            "propagation_h",
            "skepticism",
            "skepticism_infinite",
            "category",
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(id: &str, neg: u64, non: u64) -> StoryPoint<f64> {
        StoryPoint {
            story_id: id.into(),
            metrics: StoryMetrics::from_h(non.max(neg), neg, non),
        }
    }

    #[test]
    fn empty_export() {
        assert!(scatter_export::<f64>(&[]).is_empty());
        let mut buf = Vec::new();
        write_scatter_csv::<f64, _>(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "story_id,propagation_h,skepticism,skepticism_infinite,category\n"
        );
    }

    #[test]
    fn ordered_and_flagged() {
        let rows = scatter_export(&[point("c", 8, 4), point("a", 3, 0), point("b", 0, 7)]);
        let ids: Vec<&str> = rows.iter().map(|r| r.story_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!(rows[0].skepticism_infinite);
        assert_eq!(rows[0].skepticism, None);
        assert_eq!(rows[2].skepticism, Some(2.0));
        let mut buf = Vec::new();
        write_scatter_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "story_id,propagation_h,skepticism,skepticism_infinite,category"
        );
        assert_eq!(lines[1], "a,3,,true,other");
        assert_eq!(lines[3], "c,8,2.0,false,other");
    }
}
