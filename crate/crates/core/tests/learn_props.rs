mod common;

use common::random_network;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reconv::learn::{
    choose_action, generate_dataset, mlp_train, q_target, run_episode, select_strategy, update_q, Action, Dataset,
    EpisodeParams, MlpModel, MlpParams, QTable, Selector, Transition,
};
use reconv::pass::{Engines, PassOptions};
use reconv::FeatureVector;

fn fv(a: [u32; 7]) -> FeatureVector {
    FeatureVector::from_array(a)
}

/// Independent reading of the update rule on plain numbers.
fn reference_update(q_sa: f64, r: f64, alpha: f64, gamma: f64, next_row: Option<[f64; 3]>) -> f64 {
    let best_next = match next_row {
        None => 0.0,
        Some(row) => row.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    };
    q_sa + alpha * (r + gamma * best_next - q_sa)
}

proptest! {
    #[test]
    fn q_update_matches_reference(
        alpha in 0.0f64..=1.0,
        gamma in 0.0f64..=1.0,
        r in -20.0f64..20.0,
        q0 in -5.0f64..5.0,
        next in prop::option::of(prop::array::uniform3(-5.0f64..5.0)),
        a in 0usize..3,
    ) {
        let s = fv([0, 3, 2, 1, 2, 0, 1]);
        let s2 = fv([1, 4, 3, 1, 2, 1, 2]);
        let action = Action::from_code(a).unwrap();
        let mut q = QTable::new(alpha, gamma);
        q.set(s, action, q0);
        if let Some(row) = next {
            for (i, v) in row.iter().enumerate() {
                q.set(s2, Action::from_code(i).unwrap(), *v);
            }
        }
        let tr = Transition { state: s, action, reward: r, next_state: next.map(|_| s2) };
        let want = reference_update(q0, r, alpha, gamma, next);
        prop_assert!((q_target(&q, &tr) - want).abs() < 1e-9);
        let untouched: Vec<f64> = Action::ALL.iter().filter(|&&b| b != action).map(|&b| q.get(&s, b)).collect();
        update_q(&mut q, &tr);
        prop_assert!((q.get(&s, action) - want).abs() < 1e-9);
        let after: Vec<f64> = Action::ALL.iter().filter(|&&b| b != action).map(|&b| q.get(&s, b)).collect();
        prop_assert_eq!(after, untouched);
    }

    #[test]
    fn zero_alpha_is_inert(r in -10.0f64..10.0, q0 in -3.0f64..3.0) {
        let s = fv([0, 2, 2, 0, 2, 0, 1]);
        let mut q = QTable::new(0.0, 0.9);
        q.set(s, Action::Npn, q0);
        update_q(&mut q, &Transition { state: s, action: Action::Npn, reward: r, next_state: Some(s) });
        prop_assert_eq!(q.get(&s, Action::Npn), q0);
    }
}

#[test]
fn full_exploration_is_uniform() {
    let q: QTable<f64> = QTable::new(0.1, 0.9);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let s = fv([0, 5, 4, 2, 3, 1, 2]);
    let allowed = [Action::Isop, Action::Exact];
    let n = 10_000;
    let isop = (0..n).filter(|_| choose_action(&q, &s, &allowed, 1.0, &mut rng) == Action::Isop).count();
    let sigma = (n as f64 * 0.25).sqrt();
    assert!((isop as f64 - n as f64 / 2.0).abs() <= 3.0 * sigma, "{isop} of {n}");
}

fn random_batch(rng: &mut ChaCha8Rng, k: usize) -> (Vec<[f64; 7]>, Vec<usize>) {
    let xs = (0..k).map(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0))).collect();
    let ys = (0..k).map(|_| rng.gen_range(0..3)).collect();
    (xs, ys)
}

#[test]
fn backprop_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut m: MlpModel<f64> = MlpModel::new(&mut rng);
    // nonzero biases so every parameter block is exercised
    let mut p = m.params();
    for v in p.iter_mut() {
        *v += rng.gen_range(-0.05..0.05);
    }
    m.set_params(&p);
    let (xs, ys) = random_batch(&mut rng, 10);
    let (_, grad) = m.loss_and_grad::<ChaCha8Rng>(&xs, &ys, None);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..p.len() {
        let mut q = p.clone();
        q[i] = p[i] + h;
        m.set_params(&q);
        let up = m.loss_and_grad::<ChaCha8Rng>(&xs, &ys, None).0;
        q[i] = p[i] - h;
        m.set_params(&q);
        let down = m.loss_and_grad::<ChaCha8Rng>(&xs, &ys, None).0;
        let numeric = (up - down) / (2.0 * h);
        // gradients below 1e-6 are compared absolutely
        let rel = (numeric - grad[i]).abs() / numeric.abs().max(grad[i].abs()).max(1e-6);
        worst = worst.max(rel);
    }
    assert!(worst < 1e-4, "max relative error {worst:e}");
}

#[test]
fn inference_is_deterministic_and_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m: MlpModel<f32> = MlpModel::new(&mut rng);
    let f = fv([1, 6, 9, 12, 10, 4, 5]);
    let p = m.predict(&f);
    assert_eq!(p, m.predict(&f));
    assert!((p.iter().sum::<f32>() - 1.0).abs() < 1e-6);
}

/// Three clusters split along `input_size`.
fn separable(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|i| {
            let c = i % 3;
            let k = [3, 6, 9][c] + rng.gen_range(0..2);
            let f = fv([rng.gen_range(0..2), k, rng.gen_range(2..16), rng.gen_range(0..30), 4, 3, rng.gen_range(1..6)]);
            (f, Action::from_code(c).unwrap())
        })
        .collect();
    Dataset { rows }
}

#[test]
fn separable_data_is_learned() {
    let data = separable(300, 1);
    let params = MlpParams { epochs: 60, lr: 3e-3, seed: 2, ..Default::default() };
    let (model, acc) = mlp_train(&data, &params).unwrap();
    assert!(acc >= 0.95, "accuracy {acc}");
    let sel = Selector::Model(model);
    assert_eq!(select_strategy(&sel, &fv([0, 8, 5, 3, 4, 3, 3])), Action::Isop);
}

#[test]
fn single_precision_training() {
    let data = separable(150, 3);
    let params = MlpParams::<f32> { epochs: 40, lr: 3e-3, seed: 1, ..Default::default() };
    let (_, acc) = mlp_train(&data, &params).unwrap();
    assert!(acc >= 0.9, "accuracy {acc}");
}

#[test]
fn episodes_are_deterministic() {
    let net = random_network(77, 6, 60, 4);
    let mut eng = Engines::new();
    let run = |eng: &mut Engines| {
        let mut q = QTable::new(0.1, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let r = run_episode(&net, eng, &mut q, &EpisodeParams::default(), &PassOptions::default(), &mut rng);
        (r.transitions, q)
    };
    let (t1, q1) = run(&mut eng);
    let (t2, q2) = run(&mut eng);
    assert!(!t1.is_empty());
    assert_eq!(t1, t2);
    assert_eq!(q1, q2);
    assert!(t1.last().unwrap().next_state.is_none());
    assert!(t1[..t1.len() - 1].iter().all(|t| t.next_state.is_some()));
    let d = generate_dataset(&q1).unwrap();
    assert_eq!(d.len(), q1.len());
}

#[test]
fn zero_alpha_episode_leaves_zeros() {
    let net = random_network(78, 6, 60, 4);
    let mut eng = Engines::new();
    let mut q = QTable::new(0.0, 0.9);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    run_episode(&net, &mut eng, &mut q, &EpisodeParams::default(), &PassOptions::default(), &mut rng);
    assert!(q.states().all(|(_, r)| r.iter().all(|&v| v == 0.0)));
}
