use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub src: String,
    pub dst: String,
    pub score: f64,
}

/// Scores of every candidate edge between layer `i` and layer `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerPairScores {
    pub i: usize,
    pub entries: Vec<ScoreEntry>,
}

impl LayerPairScores {
    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|e| e.score).sum()
    }

    pub fn max_score(&self) -> f64 {
        self.entries.iter().map(|e| e.score).fold(0.0, f64::max)
    }
}

/// Edge-contribution scores for all adjacent layer pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EdgeScoreTable {
    pub layer_pairs: Vec<LayerPairScores>,
}

impl EdgeScoreTable {
    pub fn get(&self, src: &str, dst: &str) -> Option<f64> {
        self.entries().find(|e| e.src == src && e.dst == dst).map(|e| e.score)
    }

    pub fn entries(&self) -> impl Iterator<Item = &ScoreEntry> {
        self.layer_pairs.iter().flat_map(|p| p.entries.iter())
    }

    pub fn max_score(&self) -> f64 {
        self.layer_pairs.iter().map(LayerPairScores::max_score).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("score serialization is infallible");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_layout_and_roundtrip() {
        let t = EdgeScoreTable {
            layer_pairs: vec![LayerPairScores {
                i: 1,
                entries: vec![
                    ScoreEntry { src: "a".into(), dst: "b".into(), score: 0.25 },
                    ScoreEntry { src: "a".into(), dst: "c".into(), score: 0.75 },
                ],
            }],
        };
        let v: serde_json::Value = serde_json::from_slice(&t.to_json()).unwrap();
        assert_eq!(v["layer_pairs"][0]["i"], 1);
        assert_eq!(v["layer_pairs"][0]["entries"][1]["dst"], "c");
        assert_eq!(EdgeScoreTable::from_json(&t.to_json()).unwrap(), t);
        assert_eq!(t.get("a", "c"), Some(0.75));
        assert_eq!(t.get("c", "a"), None);
        assert_eq!(t.max_score(), 0.75);
    }
}
