//! Downstream frame observations and their JSON Lines format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSample {
    pub stream_id: String,
    pub frame_index: u64,
    pub features: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {source}")]
    Malformed { line: usize, source: serde_json::Error },
    #[error("dataset is empty")]
    Empty,
    #[error("frame ({stream}, {index}) appears twice")]
    DuplicateFrame { stream: String, index: u64 },
    #[error("frames of stream {0:?} do not form a contiguous index range")]
    NonContiguous(String),
    #[error("frame ({stream}, {index}) has {found} features, expected {expected}")]
    FeatureLength { stream: String, index: u64, expected: usize, found: usize },
    #[error("frame ({stream}, {index}) has non-finite features")]
    NonFinite { stream: String, index: u64 },
}

/// A validated set of frames grouped into streams.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    frames: Vec<FrameSample>,
}

impl Dataset {
    /// Validates the frames and stores them sorted by `(stream_id, frame_index)`.
    pub fn new(mut frames: Vec<FrameSample>) -> Result<Self, DataError> {
        let Some(first) = frames.first() else {
            return Err(DataError::Empty);
        };
        let m = first.features.len();
        for f in &frames {
            if f.features.len() != m {
                return Err(DataError::FeatureLength {
                    stream: f.stream_id.clone(),
                    index: f.frame_index,
                    expected: m,
                    found: f.features.len(),
                });
            }
            if f.features.iter().any(|v| !v.is_finite()) {
                return Err(DataError::NonFinite {
                    stream: f.stream_id.clone(),
                    index: f.frame_index,
                });
            }
        }
        frames.sort_by(|a, b| (&a.stream_id, a.frame_index).cmp(&(&b.stream_id, b.frame_index)));
        for pair in frames.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.stream_id == b.stream_id {
                if a.frame_index == b.frame_index {
                    return Err(DataError::DuplicateFrame {
                        stream: a.stream_id.clone(),
                        index: a.frame_index,
                    });
                }
                if b.frame_index != a.frame_index + 1 {
                    return Err(DataError::NonContiguous(a.stream_id.clone()));
                }
            }
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[FrameSample] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.frames[0].features.len()
    }

    /// Smallest class count covering every label.
    pub fn num_classes(&self) -> usize {
        self.frames.iter().map(|f| f.label).max().unwrap_or(0) + 1
    }

    pub fn labels(&self) -> Vec<usize> {
        self.frames.iter().map(|f| f.label).collect()
    }

    /// Streams in id order; each slice is ordered by frame index.
    pub fn streams(&self) -> Vec<&[FrameSample]> {
        let mut bounds: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for (i, f) in self.frames.iter().enumerate() {
            bounds
                .entry(f.stream_id.as_str())
                .and_modify(|b| b.1 = i + 1)
                .or_insert((i, i + 1));
        }
        bounds.values().map(|&(a, b)| &self.frames[a..b]).collect()
    }
}

pub fn load_jsonl(text: &str) -> Result<Dataset, DataError> {
    let mut frames = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let frame: FrameSample =
            serde_json::from_str(line).map_err(|source| DataError::Malformed { line: i + 1, source })?;
        frames.push(frame);
    }
    Dataset::new(frames)
}

pub fn save_jsonl(data: &Dataset) -> String {
    let mut out = String::new();
    for f in data.frames() {
        out.push_str(&serde_json::to_string(f).expect("frame serialization is infallible"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(stream: &str, index: u64, label: usize) -> FrameSample {
        FrameSample {
            stream_id: stream.into(),
            frame_index: index,
            features: vec![index as f64, 1.0],
            label,
        }
    }

    #[test]
    fn streams_are_grouped_and_ordered() {
        let d = Dataset::new(vec![frame("b", 1, 0), frame("a", 0, 1), frame("b", 0, 0)]).unwrap();
        let streams = d.streams();
        assert_eq!(streams.len(), 2);
        assert_eq!(streams[0][0].stream_id, "a");
        assert_eq!(streams[1].iter().map(|f| f.frame_index).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(d.num_classes(), 2);
    }

    #[test]
    fn rejects_bad_frames() {
        assert!(matches!(Dataset::new(vec![]), Err(DataError::Empty)));
        assert!(matches!(
            Dataset::new(vec![frame("a", 0, 0), frame("a", 0, 0)]),
            Err(DataError::DuplicateFrame { .. })
        ));
        assert!(matches!(
            Dataset::new(vec![frame("a", 0, 0), frame("a", 2, 0)]),
            Err(DataError::NonContiguous(_))
        ));
        let mut short = frame("a", 1, 0);
        short.features.pop();
        assert!(matches!(
            Dataset::new(vec![frame("a", 0, 0), short]),
            Err(DataError::FeatureLength { .. })
        ));
    }

    #[test]
    fn jsonl_roundtrip() {
        let d = Dataset::new(vec![frame("s", 0, 0), frame("s", 1, 2)]).unwrap();
        let text = save_jsonl(&d);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(load_jsonl(&text).unwrap(), d);
        assert!(matches!(load_jsonl("{\"stream_id\": 1}"), Err(DataError::Malformed { line: 1, .. })));
    }
}
