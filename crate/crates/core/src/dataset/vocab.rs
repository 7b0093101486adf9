use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    Basic,
    Combined,
}

/// One motion class. Basic labels list themselves as their only constituent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionLabel {
    pub id: usize,
    pub name: String,
    pub kind: MotionKind,
    pub constituents: Vec<usize>,
}

impl MotionLabel {
    pub fn is_basic(&self) -> bool {
        self.kind == MotionKind::Basic
    }
}

/// Name-level description of a vocabulary, used in manifests and configs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyDef {
    pub basics: Vec<String>,
    pub combineds: Vec<super::CombinedDef>,
}

/// Basic classes occupy ids `0..n_basic`, combined classes follow densely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionVocabulary {
    labels: Vec<MotionLabel>,
    n_basic: usize,
    by_name: HashMap<String, usize>,
}

impl MotionVocabulary {
    pub fn build<S: AsRef<str>>(basic_names: &[S], combined_defs: &[(S, Vec<S>)]) -> Result<Self> {
        let mut labels = Vec::with_capacity(basic_names.len() + combined_defs.len());
        let mut by_name = HashMap::new();

        for (id, name) in basic_names.iter().enumerate() {
            let name = name.as_ref();
            if by_name.insert(name.to_string(), id).is_some() {
                return Err(Error::Vocabulary(format!("duplicate motion name `{name}`")));
            }
            labels.push(MotionLabel {
                id,
                name: name.to_string(),
                kind: MotionKind::Basic,
                constituents: vec![id],
            });
        }

        let n_basic = labels.len();
        for (offset, (name, parts)) in combined_defs.iter().enumerate() {
            let name = name.as_ref();
            let id = n_basic + offset;
            let mut constituents = Vec::with_capacity(parts.len());
            for part in parts {
                let part = part.as_ref();
                match by_name.get(part) {
                    Some(&b) if b < n_basic => {
                        if constituents.contains(&b) {
                            return Err(Error::Vocabulary(format!(
                                "combined motion `{name}` lists constituent `{part}` twice"
                            )));
                        }
                        constituents.push(b);
                    }
                    _ => {
                        return Err(Error::Vocabulary(format!(
                            "combined motion `{name}` references unknown basic motion `{part}`"
                        )))
                    }
                }
            }
            if constituents.len() < 2 {
                return Err(Error::Vocabulary(format!(
                    "combined motion `{name}` needs at least 2 distinct constituents"
                )));
            }
            if by_name.insert(name.to_string(), id).is_some() {
                return Err(Error::Vocabulary(format!("duplicate motion name `{name}`")));
            }
            labels.push(MotionLabel {
                id,
                name: name.to_string(),
                kind: MotionKind::Combined,
                constituents,
            });
        }

        Ok(Self {
            labels,
            n_basic,
            by_name,
        })
    }

    /// Six wrist/hand basics and their twelve pairwise combinations.
    pub fn upper_limb() -> Self {
        let basics = ["S1", "S2", "S3", "S4", "S5", "S6"];
        let pairs: [(&str, [&str; 2]); 12] = [
            ("C1", ["S1", "S5"]),
            ("C2", ["S2", "S5"]),
            ("C3", ["S3", "S5"]),
            ("C4", ["S4", "S5"]),
            ("C5", ["S1", "S6"]),
            ("C6", ["S2", "S6"]),
            ("C7", ["S3", "S6"]),
            ("C8", ["S4", "S6"]),
            ("C9", ["S1", "S3"]),
            ("C10", ["S2", "S3"]),
            ("C11", ["S1", "S4"]),
            ("C12", ["S2", "S4"]),
        ];
        let combined: Vec<(&str, Vec<&str>)> =
            pairs.iter().map(|(n, p)| (*n, p.to_vec())).collect();
        Self::build(&basics, &combined).expect("built-in vocabulary is valid")
    }

    pub fn from_def(def: &VocabularyDef) -> Result<Self> {
        let combined: Vec<(&str, Vec<&str>)> = def
            .combineds
            .iter()
            .map(|c| {
                (
                    c.name.as_str(),
                    c.constituents.iter().map(String::as_str).collect(),
                )
            })
            .collect();
        let basics: Vec<&str> = def.basics.iter().map(String::as_str).collect();
        Self::build(&basics, &combined)
    }

    pub fn to_def(&self) -> VocabularyDef {
        VocabularyDef {
            basics: self.basics().iter().map(|l| l.name.clone()).collect(),
            combineds: self
                .combineds()
                .iter()
                .map(|l| super::CombinedDef {
                    name: l.name.clone(),
                    constituents: l
                        .constituents
                        .iter()
                        .map(|&b| self.labels[b].name.clone())
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn n_basic(&self) -> usize {
        self.n_basic
    }

    pub fn n_combined(&self) -> usize {
        self.labels.len() - self.n_basic
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[MotionLabel] {
        &self.labels
    }

    pub fn basics(&self) -> &[MotionLabel] {
        &self.labels[..self.n_basic]
    }

    pub fn combineds(&self) -> &[MotionLabel] {
        &self.labels[self.n_basic..]
    }

    pub fn label(&self, id: usize) -> Option<&MotionLabel> {
        self.labels.get(id)
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn is_basic(&self, id: usize) -> bool {
        id < self.n_basic
    }

    pub fn name(&self, id: usize) -> &str {
        &self.labels[id].name
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_limb_vocabulary_shape() {
        let v = MotionVocabulary::upper_limb();
        assert_eq!(v.n_basic(), 6);
        assert_eq!(v.n_combined(), 12);
        assert!(v.combineds().iter().all(|c| c.constituents.len() == 2));
        // C1 = opening (S1) + pronation (S5)
        let c1 = v.label(v.id("C1").unwrap()).unwrap();
        assert_eq!(c1.id, 6);
        assert_eq!(c1.constituents, vec![0, 4]);
        let c12 = v.label(v.id("C12").unwrap()).unwrap();
        assert_eq!(c12.constituents, vec![1, 3]);
        for b in v.basics() {
            assert_eq!(b.constituents, vec![b.id]);
        }
    }

    #[test]
    fn degenerate_single_basic() {
        let v = MotionVocabulary::build::<&str>(&["A"], &[]).unwrap();
        assert_eq!((v.n_basic(), v.n_combined()), (1, 0));
    }

    #[test]
    fn rejects_bad_definitions() {
        let dup = MotionVocabulary::build(&["A", "B"], &[("CX", vec!["A", "A"])]);
        assert!(matches!(dup, Err(Error::Vocabulary(_))));
        let unknown = MotionVocabulary::build(&["A", "B"], &[("CX", vec!["A", "Z"])]);
        assert!(unknown.is_err());
        let single = MotionVocabulary::build(&["A", "B"], &[("CX", vec!["A"])]);
        assert!(single.is_err());
        let dup_name = MotionVocabulary::build::<&str>(&["A", "A"], &[]);
        assert!(dup_name.is_err());
        let clash = MotionVocabulary::build(&["A", "B"], &[("A", vec!["A", "B"])]);
        assert!(clash.is_err());
        // a combined cannot be a constituent
        let nested =
            MotionVocabulary::build(&["A", "B"], &[("C", vec!["A", "B"]), ("D", vec!["A", "C"])]);
        assert!(nested.is_err());
    }

    #[test]
    fn def_round_trip() {
        let v = MotionVocabulary::upper_limb();
        let back = MotionVocabulary::from_def(&v.to_def()).unwrap();
        assert_eq!(v, back);
    }
}
