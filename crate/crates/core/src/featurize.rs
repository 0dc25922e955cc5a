//! Token sequences for the classifier: every subplan becomes the token of its
//! table set, listed in true order, then a separator, then estimated order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::l1error::PositionVectorPair;
use crate::planspace::{TableSet, MAX_TABLES};

pub const BOS: u32 = 0;
pub const SEP: u32 = 1;
pub const EOS: u32 = 2;
pub const PAD: u32 = 3;
const SPECIALS: u32 = 4;

/// Largest schema that gets a token for every possible subset.
pub const FULL_VOCAB_MAX_TABLES: usize = 12;

/// Token ids for table sets. Small schemas enumerate every nonempty subset
/// (id = bitmask + 3, so the first subset follows the four specials); larger
/// ones only know the subsets they were built from plus an unknown token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    table_count: usize,
    /// Sorted by bitmask; `None` for the full enumeration.
    observed: Option<Vec<TableSet>>,
}

pub fn build_vocab(table_count: usize, observed: impl IntoIterator<Item = TableSet>) -> Result<Vocabulary> {
    if table_count > MAX_TABLES {
        return Err(Error::Unsupported(format!(
            "{table_count} tables (at most {MAX_TABLES} supported)"
        )));
    }
    if table_count < 2 {
        return Err(Error::Unsupported(format!("{table_count} tables (need at least 2)")));
    }
    if table_count <= FULL_VOCAB_MAX_TABLES {
        return Ok(Vocabulary {
            table_count,
            observed: None,
        });
    }
    let mut sets: Vec<TableSet> = observed.into_iter().filter(|s| !s.is_empty()).collect();
    sets.sort_by_key(|s| s.bits());
    sets.dedup();
    Ok(Vocabulary {
        table_count,
        observed: Some(sets),
    })
}

impl Vocabulary {
    pub fn table_count(&self) -> usize {
        self.table_count
    }

    pub fn size(&self) -> usize {
        match &self.observed {
            None => (1usize << self.table_count) - 1 + SPECIALS as usize,
            Some(sets) => sets.len() + 1 + SPECIALS as usize,
        }
    }

    /// Reserved id for subsets missing from a sparse vocabulary.
    pub fn unknown(&self) -> Option<u32> {
        self.observed.as_ref().map(|_| SPECIALS)
    }

    fn check(&self, set: TableSet) -> Result<()> {
        if set.is_empty() || set.bits() >> self.table_count != 0 {
            return Err(Error::Reference(format!(
                "table set {set:?} outside a {}-table schema",
                self.table_count
            )));
        }
        Ok(())
    }

    pub fn token(&self, set: TableSet) -> Result<u32> {
        self.check(set)?;
        Ok(match &self.observed {
            None => set.bits() + SPECIALS - 1,
            Some(sets) => match sets.binary_search_by_key(&set.bits(), |s| s.bits()) {
                Ok(i) => SPECIALS + 1 + i as u32,
                Err(_) => SPECIALS,
            },
        })
    }

    /// The table set behind a subset token.
    pub fn subset(&self, token: u32) -> Option<TableSet> {
        match &self.observed {
            None => {
                let bits = token.checked_sub(SPECIALS - 1)?;
                (bits >= 1 && (bits as usize) < (1usize << self.table_count)).then(|| TableSet::from_bits(bits))
            }
            Some(sets) => {
                let i = token.checked_sub(SPECIALS + 1)? as usize;
                sets.get(i).copied()
            }
        }
    }
}

/// Participation vector: entry `i` is 1 iff table `i` is in the subplan.
pub fn one_hot(set: TableSet, vocab: &Vocabulary) -> Result<Vec<u8>> {
    vocab.check(set)?;
    Ok((0..vocab.table_count).map(|i| u8::from(set.contains(i))).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub tokens: Vec<u32>,
    pub attention_mask: Vec<u8>,
    pub true_length: usize,
}

/// `2N + 3`: both orderings plus bos, sep and eos.
pub fn required_len(subplans: usize) -> usize {
    2 * subplans + 3
}

impl TokenSequence {
    pub fn capacity(&self) -> usize {
        self.tokens.len()
    }

    /// Same content padded (or trimmed of padding) to `max_len`.
    pub fn repad(&self, max_len: usize) -> Result<Self> {
        if max_len < self.true_length {
            return Err(Error::Capacity {
                required: self.true_length,
                capacity: max_len,
            });
        }
        let mut tokens = self.tokens[..self.true_length].to_vec();
        tokens.resize(max_len, PAD);
        let mut attention_mask = vec![1; self.true_length];
        attention_mask.resize(max_len, 0);
        Ok(Self {
            tokens,
            attention_mask,
            true_length: self.true_length,
        })
    }

    /// Checks the framing invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.true_length;
        let bad = |reason: &str| Err(Error::format("token sequence", reason));
        if self.attention_mask.len() != self.tokens.len() || n > self.tokens.len() || n < 3 {
            return bad("inconsistent lengths");
        }
        if self.tokens[0] != BOS || self.tokens[n - 1] != EOS {
            return bad("missing bos or eos");
        }
        if self.tokens[..n].iter().filter(|&&t| t == SEP).count() != 1 {
            return bad("expected exactly one sep");
        }
        if self.tokens[n..].iter().any(|&t| t != PAD) {
            return bad("non-pad token after eos");
        }
        if self.attention_mask.iter().enumerate().any(|(i, &m)| (m == 1) != (i < n)) {
            return bad("mask disagrees with true length");
        }
        Ok(())
    }
}

/// `[bos] true order [sep] estimated order [eos] pad…`, each side walking
/// join sizes ascending and positions ascending within a size.
pub fn encode_sequence(pairs: &[PositionVectorPair], vocab: &Vocabulary, max_len: usize) -> Result<TokenSequence> {
    let mut pairs: Vec<&PositionVectorPair> = pairs.iter().collect();
    pairs.sort_by_key(|p| p.k);
    let n: usize = pairs.iter().map(|p| p.len()).sum();
    let true_length = required_len(n);
    if true_length > max_len {
        return Err(Error::Capacity {
            required: true_length,
            capacity: max_len,
        });
    }
    let mut tokens = Vec::with_capacity(max_len);
    tokens.push(BOS);
    for p in &pairs {
        for set in p.true_order() {
            tokens.push(vocab.token(set)?);
        }
    }
    tokens.push(SEP);
    for p in &pairs {
        for set in p.est_order() {
            tokens.push(vocab.token(set)?);
        }
    }
    tokens.push(EOS);
    tokens.resize(max_len, PAD);
    let mut attention_mask = vec![1u8; true_length];
    attention_mask.resize(max_len, 0);
    Ok(TokenSequence {
        tokens,
        attention_mask,
        true_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::l1error::position_vectors;
    use crate::planspace::{CardinalityAssignment, Provenance};

    #[test]
    fn vocabulary_sizes() {
        assert_eq!(build_vocab(6, []).unwrap().size(), 67);
        assert_eq!(build_vocab(3, []).unwrap().size(), 11);
        let observed: Vec<TableSet> = (1..=40u32).map(|i| TableSet::from_bits(i * 3)).collect();
        let v = build_vocab(13, observed.clone()).unwrap();
        assert_eq!(v.size(), 45);
        for s in &observed {
            assert_eq!(v.subset(v.token(*s).unwrap()), Some(*s));
        }
        assert_eq!(v.token(TableSet::from_bits(1)).unwrap(), v.unknown().unwrap());
        assert!(matches!(build_vocab(31, []), Err(Error::Unsupported(_))));
    }

    #[test]
    fn full_vocabulary_round_trips() {
        let v = build_vocab(6, []).unwrap();
        let mut seen = std::collections::HashSet::new();
        for bits in 1u32..64 {
            let t = v.token(TableSet::from_bits(bits)).unwrap();
            assert!(t >= 4 && (t as usize) < v.size());
            assert!(seen.insert(t));
            assert_eq!(v.subset(t), Some(TableSet::from_bits(bits)));
        }
        for special in [BOS, SEP, EOS, PAD] {
            assert_eq!(v.subset(special), None);
        }
        assert!(v.token(TableSet::singleton(6)).is_err());
    }

    #[test]
    fn one_hot_matches_schema_order() {
        let schema = fixtures::job_schema();
        let v = build_vocab(schema.table_count(), []).unwrap();
        let mk = schema.table_id("mk").unwrap();
        let t = schema.table_id("t").unwrap();
        assert_eq!(one_hot(TableSet::singleton(mk), &v).unwrap(), vec![0, 1, 0, 0, 0, 0]);
        assert_eq!(one_hot(TableSet::from_ids([mk, t]), &v).unwrap(), vec![0, 1, 1, 0, 0, 0]);
        let four = TableSet::from_ids([0, 2, 3, 5]);
        assert_eq!(one_hot(four, &v).unwrap().iter().map(|&b| b as usize).sum::<usize>(), 4);
    }

    fn s3_pairs() -> Vec<PositionVectorPair> {
        let ab = TableSet::from_ids([0, 1]);
        let ac = TableSet::from_ids([0, 2]);
        let bc = TableSet::from_ids([1, 2]);
        let abc = TableSet::from_ids([0, 1, 2]);
        let truth = CardinalityAssignment::from_values(Provenance::True, [(ab, 10.0), (ac, 50.0), (bc, 5.0), (abc, 1.0)]);
        let est = CardinalityAssignment::from_values(Provenance::True, [(ab, 20.0), (ac, 5.0), (bc, 30.0), (abc, 1.0)]);
        vec![
            position_vectors(&[ab, ac, bc], &truth, &est).unwrap(),
            position_vectors(&[abc], &truth, &est).unwrap(),
        ]
    }

    #[test]
    fn s3_sequence() {
        let v = build_vocab(3, []).unwrap();
        let seq = encode_sequence(&s3_pairs(), &v, 11).unwrap();
        // AB=3+3, AC=5+3, BC=6+3, ABC=7+3
        assert_eq!(seq.tokens, vec![BOS, 9, 6, 8, 10, SEP, 8, 6, 9, 10, EOS]);
        assert_eq!(seq.true_length, 11);
        assert!(seq.attention_mask.iter().all(|&m| m == 1));
        seq.validate().unwrap();

        let padded = encode_sequence(&s3_pairs(), &v, 16).unwrap();
        assert_eq!(padded, seq.repad(16).unwrap());
        padded.validate().unwrap();
        assert!(matches!(
            encode_sequence(&s3_pairs(), &v, 10),
            Err(Error::Capacity { required: 11, capacity: 10 })
        ));
    }

    #[test]
    fn preset_lengths() {
        assert_eq!(required_len(10), 23);
        assert_eq!(required_len(12), 27);
    }
}
