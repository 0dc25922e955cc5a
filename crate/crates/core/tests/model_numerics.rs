use planwatch_core::featurize::{TokenSequence, BOS, EOS, SEP};
use planwatch_core::model::{
    forward, init_model, layout, loss_and_gradients, read_checkpoint, write_checkpoint, Checkpoint, Init,
    LabeledExample, ModelConfig, ModelInput, ModelParams,
};
use planwatch_core::planspace::PlanLabel;
use planwatch_core::{featurize::build_vocab, l1error::L1Weights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tiny() -> ModelConfig {
    ModelConfig {
        layers: 2,
        heads: 2,
        embed_dim: 8,
        max_len: 12,
        vocab_size: 11,
        mlp_hidden: 8,
        dropout_rate: 0.0,
        seed: 3,
    }
}

/// Parameters far from initialization so every nonlinearity is exercised.
fn rough_params(cfg: &ModelConfig, seed: u64) -> ModelParams<f64> {
    let mut p = init_model::<f64>(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (spec, t) in layout(cfg).iter().zip(p.tensors.iter_mut()) {
        for v in t.iter_mut() {
            *v = match spec.init {
                Init::Ones => 1.0 + rng.random_range(-0.3..0.3),
                _ => rng.random_range(-0.5..0.5),
            };
        }
    }
    p
}

fn example(tokens: &[u32], cap: usize, l1: f64, label: PlanLabel) -> LabeledExample {
    let mut t = tokens.to_vec();
    let n = t.len();
    t.resize(cap, 3);
    let mut mask = vec![1u8; n];
    mask.resize(cap, 0);
    LabeledExample::new(
        "q",
        0,
        TokenSequence {
            tokens: t,
            attention_mask: mask,
            true_length: n,
        },
        l1,
        4.0,
        label,
    )
}

fn batch() -> Vec<LabeledExample> {
    vec![
        example(&[BOS, 6, 9, 8, SEP, 8, 6, 9, EOS], 12, 2.0, PlanLabel::SubOptimal),
        example(&[BOS, 5, 7, SEP, 5, 7, EOS], 12, 0.0, PlanLabel::Optimal),
        example(&[BOS, 10, 4, SEP, 4, 10, EOS], 12, 1.0, PlanLabel::SubOptimal),
    ]
}

#[test]
fn gradients_match_finite_differences() {
    let cfg = tiny();
    let params = rough_params(&cfg, 11);
    let data = batch();
    let refs: Vec<&LabeledExample> = data.iter().collect();
    let (_, grads) = loss_and_gradients(&params, &refs).unwrap();
    let h = 1e-3;
    for (ti, spec) in layout(&cfg).iter().enumerate() {
        let mut diff2 = 0.0;
        let mut a2 = 0.0;
        let mut n2 = 0.0;
        for i in 0..spec.numel() {
            let mut plus = params.clone();
            plus.tensors[ti][i] += h;
            let mut minus = params.clone();
            minus.tensors[ti][i] -= h;
            let lp = loss_and_gradients(&plus, &refs).unwrap().0;
            let lm = loss_and_gradients(&minus, &refs).unwrap().0;
            let numeric = (lp - lm) / (2.0 * h);
            let analytic = grads[ti][i];
            diff2 += (numeric - analytic).powi(2);
            a2 += analytic * analytic;
            n2 += numeric * numeric;
        }
        let scale = a2.sqrt().max(n2.sqrt());
        let rel = if scale < 1e-12 { diff2.sqrt() } else { diff2.sqrt() / scale };
        assert!(rel < 1e-4, "{}: relative error {rel:e}", spec.name);
    }
}

#[test]
fn duplicated_batch_has_the_same_loss() {
    let params = rough_params(&tiny(), 5);
    let data = batch();
    let once: Vec<&LabeledExample> = data.iter().collect();
    let twice: Vec<&LabeledExample> = data.iter().chain(data.iter()).collect();
    let a = loss_and_gradients(&params, &once).unwrap().0;
    let b = loss_and_gradients(&params, &twice).unwrap().0;
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn padding_and_pad_content_do_not_matter() {
    let cfg = ModelConfig { max_len: 40, ..tiny() };
    let params = init_model::<f32>(&cfg).unwrap();
    let short = example(&[BOS, 6, 9, 8, SEP, 8, 6, 9, EOS], 9, 0.3, PlanLabel::Optimal);
    let long = example(&[BOS, 6, 9, 8, SEP, 8, 6, 9, EOS], 40, 0.3, PlanLabel::Optimal);
    let mut garbage = long.clone();
    for t in garbage.sequence.tokens[9..].iter_mut() {
        *t = 7;
    }
    let a = forward(&params, ModelInput::from(&short)).unwrap();
    let b = forward(&params, ModelInput::from(&long)).unwrap();
    let c = forward(&params, ModelInput::from(&garbage)).unwrap();
    for i in 0..2 {
        assert!((a[i] - b[i]).abs() <= 1e-6);
        assert!((a[i] - c[i]).abs() <= 1e-6);
    }
}

#[test]
fn checkpoint_forward_is_bit_identical() {
    let cfg = tiny();
    let params = rough_params(&cfg, 2).cast::<f32>();
    let ckpt = Checkpoint {
        params,
        vocab: build_vocab(3, []).unwrap(),
        l1_weights: L1Weights::default(),
    };
    let back = read_checkpoint(&write_checkpoint(&ckpt)).unwrap();
    for e in batch() {
        let a = forward(&ckpt.params, ModelInput::from(&e)).unwrap();
        let b = forward(&back.params, ModelInput::from(&e)).unwrap();
        assert_eq!(a.map(f32::to_bits), b.map(f32::to_bits));
    }
}

#[test]
fn init_contract() {
    let cfg = tiny();
    assert_eq!(init_model::<f32>(&cfg).unwrap(), init_model::<f32>(&cfg).unwrap());
    let job = ModelConfig::job_preset(67);
    assert_eq!(job.head_dim(), 8);
    assert!(init_model::<f32>(&ModelConfig { embed_dim: 65, ..job }).is_err());
}
