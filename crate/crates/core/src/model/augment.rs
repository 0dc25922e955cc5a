use rand::seq::SliceRandom;

use super::LabeledExample;
use crate::error::Result;
use crate::featurize::{encode_sequence, Vocabulary};
use crate::l1error::{l1_report, L1Weights, PositionVectorPair};
use crate::seed::StableHasher;

/// Leading true-order positions that permutation leaves in place: `⌈n/2⌉`.
pub fn fixed_prefix(n: usize) -> usize {
    n.div_ceil(2)
}

fn permute(pair: &PositionVectorPair, rng: &mut impl rand::Rng) -> PositionVectorPair {
    let mut order = pair.true_order();
    let keep = fixed_prefix(order.len());
    order[keep..].shuffle(rng);
    let rho = pair
        .subplans
        .iter()
        .map(|s| order.iter().position(|o| o == s).expect("same subplans") + 1)
        .collect();
    PositionVectorPair {
        rho,
        ..pair.clone()
    }
}

/// The original example followed by `r` copies in which, per join size, the
/// true ranks after the fixed prefix are shuffled. The estimated ordering
/// and the label are left alone; the L1 features are recomputed.
pub fn augment_permute(
    example: &LabeledExample,
    pairs: &[PositionVectorPair],
    vocab: &Vocabulary,
    weights: &L1Weights,
    r: usize,
    seed: u64,
) -> Result<Vec<LabeledExample>> {
    let mut out = Vec::with_capacity(r + 1);
    out.push(LabeledExample {
        replica_id: 0,
        ..example.clone()
    });
    for replica in 1..=r {
        let mut rng = StableHasher::new(seed)
            .str(&example.query_id)
            .u64(replica as u64)
            .rng();
        let permuted: Vec<PositionVectorPair> = pairs.iter().map(|p| permute(p, &mut rng)).collect();
        let report = l1_report(&permuted, weights);
        out.push(LabeledExample {
            query_id: example.query_id.clone(),
            replica_id: replica,
            sequence: encode_sequence(&permuted, vocab, example.sequence.capacity())?,
            l1_aggregate: report.aggregate,
            l1_max: report.max_aggregate(),
            label: example.label,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::build_vocab;
    use crate::planspace::{PlanLabel, TableSet};

    fn four() -> PositionVectorPair {
        PositionVectorPair {
            k: 2,
            subplans: [[0, 1], [0, 2], [1, 2], [2, 3]]
                .iter()
                .map(|ids| TableSet::from_ids(ids.iter().copied()))
                .collect(),
            rho: vec![1, 2, 3, 4],
            rho_hat: vec![2, 1, 4, 3],
        }
    }

    #[test]
    fn prefix_is_fixed_and_rest_permuted() {
        let vocab = build_vocab(4, []).unwrap();
        let pairs = vec![four()];
        let base = LabeledExample::from_pairs("q", &pairs, &vocab, 11, &L1Weights::default(), PlanLabel::SubOptimal).unwrap();
        let reps = augment_permute(&base, &pairs, &vocab, &L1Weights::default(), 3, 1).unwrap();
        assert_eq!(reps.len(), 4);
        assert_eq!(reps[0], base);
        let mut seen_swap = false;
        for (i, rep) in reps.iter().enumerate() {
            assert_eq!(rep.replica_id, i);
            assert_eq!(rep.label, PlanLabel::SubOptimal);
            // true side: positions 1..=2 stay, 3..=4 hold the other two
            assert_eq!(rep.sequence.tokens[1..3], base.sequence.tokens[1..3]);
            let mut tail = rep.sequence.tokens[3..5].to_vec();
            tail.sort();
            let mut base_tail = base.sequence.tokens[3..5].to_vec();
            base_tail.sort();
            assert_eq!(tail, base_tail);
            seen_swap |= rep.sequence.tokens[3..5] != base.sequence.tokens[3..5];
            // estimated side untouched
            assert_eq!(rep.sequence.tokens[5..], base.sequence.tokens[5..]);
        }
        assert!(seen_swap);
    }

    #[test]
    fn singleton_groups_do_not_change() {
        let single = PositionVectorPair {
            k: 3,
            subplans: vec![TableSet::from_ids([0, 1, 2])],
            rho: vec![1],
            rho_hat: vec![1],
        };
        let mut rng = StableHasher::new(0).rng();
        assert_eq!(permute(&single, &mut rng), single);
        assert_eq!(fixed_prefix(1), 1);
        assert_eq!(fixed_prefix(5), 3);
    }
}
