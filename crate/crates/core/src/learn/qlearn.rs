use std::collections::BTreeMap;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{possible_actions, Action, Dataset};
use crate::aig::AigNetwork;
use crate::cone::FeatureVector;
use crate::pass::{run_pass, Engines, PassOptions, Policy};

#[derive(Debug, Error)]
pub enum QError {
    #[error("the Q-table has no visited states")]
    EmptyTable,
    #[error("Q-table line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Action values per visited state; unvisited states read as all zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable<F: Float = f64> {
    rows: BTreeMap<FeatureVector, [F; 3]>,
    pub alpha: F,
    pub gamma: F,
}

impl<F: Float> QTable<F> {
    pub fn new(alpha: F, gamma: F) -> Self {
        QTable { rows: BTreeMap::new(), alpha, gamma }
    }

    pub fn row(&self, s: &FeatureVector) -> [F; 3] {
        self.rows.get(s).copied().unwrap_or([F::zero(); 3])
    }

    pub fn get(&self, s: &FeatureVector, a: Action) -> F {
        self.row(s)[a.code()]
    }

    pub fn set(&mut self, s: FeatureVector, a: Action, v: F) {
        self.rows.entry(s).or_insert([F::zero(); 3])[a.code()] = v;
    }

    pub fn max_value(&self, s: &FeatureVector) -> F {
        let r = self.row(s);
        r[0].max(r[1]).max(r[2])
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = (&FeatureVector, &[F; 3])> {
        self.rows.iter()
    }

    /// One `f1,...,f7: q0 q1 q2` line per state.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (fv, r) in &self.rows {
            let q: Vec<String> = r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN).to_string()).collect();
            s += &format!("{fv}: {}\n", q.join(" "));
        }
        s
    }

    pub fn parse(text: &str, alpha: F, gamma: F) -> Result<Self, QError> {
        let mut q = QTable::new(alpha, gamma);
        for (i, line) in text.lines().enumerate() {
            let bad = |msg: String| QError::Parse { line: i + 1, msg };
            if line.trim().is_empty() {
                continue;
            }
            let (key, vals) = line.split_once(':').ok_or_else(|| bad("missing ':'".into()))?;
            let fv: FeatureVector = key.parse().map_err(bad)?;
            let v: Vec<F> = vals
                .split_whitespace()
                .map(|t| t.parse::<f64>().ok().and_then(F::from).ok_or_else(|| bad(format!("value {t:?}"))))
                .collect::<Result<_, _>>()?;
            let row: [F; 3] = v.try_into().map_err(|_| bad("expected 3 values".into()))?;
            q.rows.insert(fv, row);
        }
        Ok(q)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition<F: Float = f64> {
    pub state: FeatureVector,
    pub action: Action,
    pub reward: F,
    /// `None` on the last step of an episode.
    pub next_state: Option<FeatureVector>,
}

/// The value `update_q` writes into `Q(state, action)`.
pub fn q_target<F: Float>(q: &QTable<F>, tr: &Transition<F>) -> F {
    let future = tr.next_state.map_or(F::zero(), |s| q.max_value(&s));
    (F::one() - q.alpha) * q.get(&tr.state, tr.action) + q.alpha * (tr.reward + q.gamma * future)
}

pub fn update_q<F: Float>(q: &mut QTable<F>, tr: &Transition<F>) {
    let v = q_target(q, tr);
    q.set(tr.state, tr.action, v);
}

/// Epsilon-greedy over `allowed`; greedy ties go to the lowest code.
pub fn choose_action<F: Float, R: Rng + ?Sized>(
    q: &QTable<F>,
    s: &FeatureVector,
    allowed: &[Action],
    epsilon: F,
    rng: &mut R,
) -> Action {
    assert!(!allowed.is_empty());
    if rng.gen::<f64>() < epsilon.to_f64().unwrap_or(0.0) {
        return allowed[rng.gen_range(0..allowed.len())];
    }
    let row = q.row(s);
    let mut best = allowed[0];
    for &a in &allowed[1..] {
        if row[a.code()] > row[best.code()] {
            best = a;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeParams<F: Float = f64> {
    pub epsilon: F,
    /// Multiplies epsilon after every step.
    pub decay: F,
}

impl<F: Float> Default for EpisodeParams<F> {
    fn default() -> Self {
        EpisodeParams { epsilon: F::one(), decay: F::from(0.995).unwrap() }
    }
}

#[derive(Clone, Debug)]
pub struct EpisodeResult<F: Float = f64> {
    /// Final network size.
    pub cost: usize,
    pub transitions: Vec<Transition<F>>,
    /// Epsilon after the last step, to continue the schedule.
    pub epsilon: F,
}

struct QPolicy<'a, F: Float, R: Rng> {
    q: &'a mut QTable<F>,
    epsilon: F,
    decay: F,
    rng: &'a mut R,
    pending: Option<(FeatureVector, Action, F)>,
    log: Vec<Transition<F>>,
}

impl<F: Float, R: Rng> QPolicy<'_, F, R> {
    fn commit(&mut self, next_state: Option<FeatureVector>, bonus: F) {
        if let Some((state, action, reward)) = self.pending.take() {
            let tr = Transition { state, action, reward: reward + bonus, next_state };
            update_q(self.q, &tr);
            self.log.push(tr);
        }
    }
}

impl<F: Float, R: Rng> Policy for QPolicy<'_, F, R> {
    fn choose(&mut self, fv: &FeatureVector, allowed: &[Action]) -> Action {
        self.commit(Some(*fv), F::zero());
        let a = choose_action(self.q, fv, allowed, self.epsilon, self.rng);
        self.epsilon = self.epsilon * self.decay;
        self.pending = Some((*fv, a, F::zero()));
        a
    }

    fn reward(&mut self, gain: i32) {
        if let Some(p) = self.pending.as_mut() {
            p.2 = F::from(gain).unwrap();
        }
    }
}

/// One pass over a copy of `template`, choosing actions from `q` and
/// updating it after every step. The total size gain is added to the last
/// reward.
pub fn run_episode<F: Float, R: Rng>(
    template: &AigNetwork,
    engines: &mut Engines,
    q: &mut QTable<F>,
    params: &EpisodeParams<F>,
    opts: &PassOptions,
    rng: &mut R,
) -> EpisodeResult<F> {
    let mut net = template.clone();
    let mut policy =
        QPolicy { q, epsilon: params.epsilon, decay: params.decay, rng, pending: None, log: Vec::new() };
    let report = run_pass(&mut net, engines, &mut policy, opts);
    let total = report.size_before as i64 - report.size_after as i64;
    policy.commit(None, F::from(total).unwrap());
    EpisodeResult { cost: report.size_after, transitions: policy.log, epsilon: policy.epsilon }
}

/// Runs `episodes` episodes with one seeded generator, carrying epsilon
/// across episodes. Returns the per-episode costs.
pub fn train_q<F: Float>(
    template: &AigNetwork,
    engines: &mut Engines,
    q: &mut QTable<F>,
    episodes: usize,
    params: EpisodeParams<F>,
    opts: &PassOptions,
    seed: u64,
) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = params;
    let mut costs = Vec::with_capacity(episodes);
    for e in 0..episodes {
        let r = run_episode(template, engines, q, &p, opts, &mut rng);
        log::info!("episode {} cost {} epsilon {:.4}", e + 1, r.cost, r.epsilon.to_f64().unwrap_or(0.0));
        costs.push(r.cost);
        p.epsilon = r.epsilon;
    }
    costs
}

/// One row per visited state, labelled with its best allowed action.
pub fn generate_dataset<F: Float>(q: &QTable<F>) -> Result<Dataset, QError> {
    if q.is_empty() {
        return Err(QError::EmptyTable);
    }
    let rows = q
        .states()
        .map(|(fv, r)| {
            let allowed = possible_actions(fv);
            let mut best = allowed[0];
            for &a in &allowed[1..] {
                if r[a.code()] > r[best.code()] {
                    best = a;
                }
            }
            (*fv, best)
        })
        .collect();
    Ok(Dataset { rows })
}
