//! One rewriting pass over the network in topological order, with a
//! pluggable per-cone engine choice.

use std::collections::VecDeque;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aig::AigNetwork;
use crate::cone::{extract_features, reconvergence_driven_cut, Cone, FeatureVector, DEFAULT_MAX_LEAVES};
use crate::exact::{exact_rewrite_candidate, ExactCache, MAX_EXACT_VARS};
use crate::isop::isop_rewrite_candidate;
use crate::learn::{possible_actions, select_strategy, Action, Selector};
use crate::npn::{npn_rewrite_candidate, NpnDatabase, MAX_NPN_VARS};
use crate::replace::{compute_timing, evaluate, replace, Decision, EvalOptions, RejectReason, RewriteCandidate};

/// Shared state of the three rewriting engines.
pub struct Engines {
    pub npn: NpnDatabase,
    pub exact: ExactCache,
}

impl Engines {
    /// Built-in NPN database; exact cache seeded from it.
    pub fn new() -> Self {
        Self::with_cache(ExactCache::new())
    }

    pub fn with_cache(mut exact: ExactCache) -> Self {
        let npn = NpnDatabase::builtin();
        exact.seed_from(&npn);
        Engines { npn, exact }
    }

    /// Candidate of `action` for `cone`, or `None` when the engine has none.
    pub fn candidate(&mut self, net: &AigNetwork, cone: &Cone, action: Action) -> Option<RewriteCandidate> {
        assert!(
            action.input_range().contains(&cone.input_size()),
            "{action} dispatched on a {}-input cone",
            cone.input_size()
        );
        match action {
            Action::Isop => isop_rewrite_candidate(net, cone),
            Action::Npn => npn_rewrite_candidate(net, cone, &self.npn),
            Action::Exact => exact_rewrite_candidate(net, cone, &mut self.exact).unwrap_or_else(|e| {
                log::warn!("exact synthesis: {e}");
                None
            }),
        }
    }
}

impl Default for Engines {
    fn default() -> Self {
        Self::new()
    }
}

/// Per-cone engine choice. `reward` reports the realized gain of the last
/// choice (0 when nothing was committed).
pub trait Policy {
    fn choose(&mut self, fv: &FeatureVector, allowed: &[Action]) -> Action;
    fn reward(&mut self, _gain: i32) {}
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PassOptions {
    pub preserve_depth: bool,
    pub zero_gain: bool,
    /// Also visit nodes created during the pass.
    pub revisit_new: bool,
    pub max_leaves: usize,
    /// Full required-time refresh period, in accepted replacements.
    pub refresh_interval: usize,
}

impl Default for PassOptions {
    fn default() -> Self {
        PassOptions {
            preserve_depth: false,
            zero_gain: false,
            revisit_new: false,
            max_leaves: DEFAULT_MAX_LEAVES,
            refresh_interval: 50,
        }
    }
}

/// Counters indexed by action code.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActionStats {
    pub invoked: [usize; 3],
    pub produced: [usize; 3],
    pub accepted: [usize; 3],
    pub gain: [i64; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PassReport {
    pub size_before: usize,
    pub size_after: usize,
    pub depth_before: u32,
    pub depth_after: u32,
    pub visited: usize,
    pub rewritable: usize,
    pub actions: ActionStats,
    /// Rejections by reason: no gain, depth, unverified, cycle.
    pub rejected: [usize; 4],
    /// Accepted rewrites whose realized gain differed from the estimate.
    pub estimate_misses: usize,
}

fn reason_index(r: RejectReason) -> usize {
    match r {
        RejectReason::NoGain => 0,
        RejectReason::DepthViolation => 1,
        RejectReason::Unverified => 2,
        RejectReason::WouldCycle => 3,
    }
}

/// Visits every And node of the initial topological order once, rewriting
/// its cone with the engine `policy` picks when the rewrite pays off.
pub fn run_pass(net: &mut AigNetwork, engines: &mut Engines, policy: &mut dyn Policy, opts: &PassOptions) -> PassReport {
    net.remove_dead_nodes();
    let mut rep = PassReport { size_before: net.num_live_ands(), depth_before: net.depth(), ..Default::default() };
    let critical = net.mark_critical_path();
    let mut timing = opts.preserve_depth.then(|| compute_timing(net));
    let mut depth = rep.depth_before;
    let mut since_refresh = 0;
    let eval_opts = EvalOptions { preserve_depth: opts.preserve_depth, allow_zero_gain: opts.zero_gain };

    let order = net.topological_order();
    let visit_cap = order.len() * 4;
    let mut queue: VecDeque<usize> = order.into_iter().filter(|&n| net.is_and(n)).collect();
    while let Some(node) = queue.pop_front() {
        if !net.is_live_and(node) {
            continue;
        }
        rep.visited += 1;
        let cone = reconvergence_driven_cut(net, node, opts.max_leaves);
        if !(2..=10).contains(&cone.input_size()) {
            continue;
        }
        rep.rewritable += 1;
        let fv = extract_features(net, &cone, &critical);
        let allowed = possible_actions(&fv);
        let action = policy.choose(&fv, allowed);
        assert!(allowed.contains(&action), "policy chose {action} outside {allowed:?}");
        let a = action.code();
        rep.actions.invoked[a] += 1;
        let Some(mut cand) = engines.candidate(net, &cone, action) else {
            policy.reward(0);
            continue;
        };
        rep.actions.produced[a] += 1;
        match evaluate(net, &cone, &mut cand, timing.as_ref(), eval_opts) {
            Decision::Reject(r) => {
                rep.rejected[reason_index(r)] += 1;
                policy.reward(0);
            }
            Decision::Accept(est) => {
                let first_new = net.num_nodes();
                let r = replace(net, &cone, &cand);
                debug_assert!(r.realized_gain >= 0 || opts.zero_gain);
                if r.realized_gain != est {
                    rep.estimate_misses += 1;
                    log::debug!("node {node}: estimated {est}, realized {}", r.realized_gain);
                }
                rep.actions.accepted[a] += 1;
                rep.actions.gain[a] += r.realized_gain as i64;
                policy.reward(r.realized_gain);
                if let Some(t) = timing.as_mut() {
                    since_refresh += 1;
                    let d = net.depth();
                    if d < depth || since_refresh >= opts.refresh_interval {
                        *t = compute_timing(net);
                        depth = d;
                        since_refresh = 0;
                    } else {
                        t.tighten(net, &r.touched);
                    }
                }
                if opts.revisit_new && rep.visited < visit_cap {
                    queue.extend(r.touched.iter().copied().filter(|&t| t >= first_new));
                }
            }
        }
    }
    rep.size_after = net.num_live_ands();
    rep.depth_after = net.depth();
    rep
}

/// Engine choice of a whole run.
#[derive(Clone, Debug)]
pub enum Strategy {
    Fixed(Action),
    /// Uniform over the allowed actions of each cone.
    Random(u64),
    Adaptive(Selector),
}

impl Strategy {
    /// Cut size limit: the largest cone the fixed engine can take.
    pub fn max_leaves(&self) -> usize {
        match self {
            Strategy::Fixed(Action::Exact) => MAX_EXACT_VARS,
            Strategy::Fixed(Action::Npn) => MAX_NPN_VARS,
            _ => DEFAULT_MAX_LEAVES,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Fixed(a) => a.name(),
            Strategy::Random(_) => "random",
            Strategy::Adaptive(_) => "adaptive",
        }
    }
}

struct FixedPolicy(Action);

impl Policy for FixedPolicy {
    fn choose(&mut self, _: &FeatureVector, allowed: &[Action]) -> Action {
        if allowed.contains(&self.0) {
            self.0
        } else {
            allowed[0]
        }
    }
}

pub struct RandomPolicy<R: Rng>(pub R);

impl<R: Rng> Policy for RandomPolicy<R> {
    fn choose(&mut self, _: &FeatureVector, allowed: &[Action]) -> Action {
        allowed[self.0.gen_range(0..allowed.len())]
    }
}

struct SelectorPolicy<'a>(&'a Selector);

impl Policy for SelectorPolicy<'_> {
    fn choose(&mut self, fv: &FeatureVector, _: &[Action]) -> Action {
        select_strategy(self.0, fv)
    }
}

/// One pass of `strategy`; `opts.max_leaves` is overridden by the strategy.
pub fn optimize(net: &mut AigNetwork, engines: &mut Engines, strategy: &Strategy, opts: &PassOptions) -> PassReport {
    let opts = PassOptions { max_leaves: strategy.max_leaves(), ..opts.clone() };
    match strategy {
        Strategy::Fixed(a) => run_pass(net, engines, &mut FixedPolicy(*a), &opts),
        Strategy::Random(seed) => run_pass(net, engines, &mut RandomPolicy(ChaCha8Rng::seed_from_u64(*seed)), &opts),
        Strategy::Adaptive(sel) => run_pass(net, engines, &mut SelectorPolicy(sel), &opts),
    }
}

/// Per-circuit summary of an optimization run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub circuit: String,
    pub strategy: String,
    pub pass: PassReport,
    pub wall_time: Duration,
}

impl RunReport {
    pub fn size_improvement(&self) -> f64 {
        improvement(self.pass.size_before as f64, self.pass.size_after as f64)
    }

    pub fn depth_improvement(&self) -> f64 {
        improvement(self.pass.depth_before as f64, self.pass.depth_after as f64)
    }

    pub fn result_line(&self) -> String {
        let p = &self.pass;
        format!(
            "RESULT circuit={} size0={} size1={} depth0={} depth1={}",
            self.circuit, p.size_before, p.size_after, p.depth_before, p.depth_after
        )
    }
}

/// `(before - after) / before * 100`, 0 for an empty circuit.
pub fn improvement(before: f64, after: f64) -> f64 {
    if before == 0.0 {
        0.0
    } else {
        (before - after) / before * 100.0
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.pass;
        writeln!(f, "circuit   {} ({})", self.circuit, self.strategy)?;
        writeln!(f, "size      {:>7} -> {:>7}  {:6.2}%", p.size_before, p.size_after, self.size_improvement())?;
        writeln!(f, "depth     {:>7} -> {:>7}  {:6.2}%", p.depth_before, p.depth_after, self.depth_improvement())?;
        writeln!(f, "action    invoked produced accepted gain")?;
        for a in Action::ALL {
            let i = a.code();
            let s = &p.actions;
            writeln!(f, "{:<9} {:>7} {:>8} {:>8} {:>4}", a.name(), s.invoked[i], s.produced[i], s.accepted[i], s.gain[i])?;
        }
        write!(f, "time      {:.3}s", self.wall_time.as_secs_f64())
    }
}

/// Timed [`optimize`] on a copy; returns the optimized network too.
pub fn run(
    circuit: &str,
    net: &AigNetwork,
    engines: &mut Engines,
    strategy: &Strategy,
    opts: &PassOptions,
) -> (AigNetwork, RunReport) {
    let t0 = Instant::now();
    let mut out = net.clone();
    let pass = optimize(&mut out, engines, strategy, opts);
    let report =
        RunReport { circuit: circuit.to_string(), strategy: strategy.name().to_string(), pass, wall_time: t0.elapsed() };
    (out, report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DseRow {
    pub run: usize,
    pub size: usize,
    pub depth: u32,
}

/// `runs` random-strategy passes, run `i` seeded from `seed + i`.
pub fn dse(net: &AigNetwork, engines: &mut Engines, runs: usize, seed: u64, opts: &PassOptions) -> Vec<DseRow> {
    (0..runs)
        .map(|run| {
            let mut n = net.clone();
            let r = optimize(&mut n, engines, &Strategy::Random(seed.wrapping_add(run as u64)), opts);
            DseRow { run, size: r.size_after, depth: r.depth_after }
        })
        .collect()
}
