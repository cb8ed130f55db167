//! Q-learning bit-allocation solver: the state is the allocation vector,
//! actions bump one converter group by ±1 bit, and a small two-hidden-layer
//! network with experience replay and a periodically synced target copy
//! approximates the action values.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::quantizer::{BitAllocation, B_MAX_DEFAULT};
use crate::scenario::SystemConfig;

use super::evaluate::{Constraints, Evaluator, Individual};
use super::net::{Mlp, TrainSample};

/// Training hyperparameters with the reference defaults.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct DqnConfig {
    pub iterations: usize,
    pub batch: usize,
    pub lr: f64,
    pub gamma: f64,
    /// Probability of taking a random exploratory action.
    pub epsilon: f64,
    pub memory: usize,
    pub hidden: (usize, usize),
    /// Gradient steps between target-network synchronizations.
    pub target_sync: usize,
    pub b_max: u8,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            batch: 32,
            lr: 0.01,
            gamma: 0.9,
            epsilon: 0.9,
            memory: 2000,
            hidden: (64, 64),
            target_sync: 50,
            b_max: B_MAX_DEFAULT,
        }
    }
}

/// One training-trace row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub reward: f64,
    pub loss: f64,
    pub epsilon: f64,
    pub best_reward: f64,
}

/// Best visited solution plus the per-iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DqnOutcome {
    pub best: Individual,
    pub best_reward: f64,
    pub trace: Vec<TraceRow>,
}

/// CSV export of the training trace.
pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("iter,reward,loss,epsilon,best_reward_so_far\n");
    for r in trace {
        out.push_str(&format!(
            "{},{:.6e},{:.6e},{:.6e},{:.6e}\n",
            r.iter, r.reward, r.loss, r.epsilon, r.best_reward
        ));
    }
    out
}

/// Normalization anchors for the reward: objective spans between the
/// all-ones and full-resolution uniform corners, computed once per run.
#[derive(Debug, Clone, Copy, PartialEq)]
struct RewardScale {
    f1_min: f64,
    f1_span: f64,
    f2_min: f64,
    f2_span: f64,
}

/// Offset subtracted from the two normalized objective terms, centering the
/// feasible reward in [-1, 1].
const R_TILDE: f64 = 1.0;
/// Reward assigned to constraint-violating states, strictly below the
/// feasible minimum of -R_TILDE.
const INFEASIBLE_REWARD: f64 = -2.0;

fn reward_scale(ev: &Evaluator, b_max: u8) -> Result<RewardScale> {
    let cfg = ev.cfg;
    let lo = ev.evaluate(&BitAllocation::uniform(cfg.n_ul, cfg.n_dl, cfg.k_dl, 1))?;
    let hi = ev.evaluate(&BitAllocation::uniform(cfg.n_ul, cfg.n_dl, cfg.k_dl, b_max))?;
    let (f1_min, f1_max) = minmax(lo.objectives.f1_se, hi.objectives.f1_se);
    let (f2_min, f2_max) = minmax(lo.objectives.f2_ee, hi.objectives.f2_ee);
    Ok(RewardScale {
        f1_min,
        f1_span: f1_max - f1_min,
        f2_min,
        f2_span: f2_max - f2_min,
    })
}

fn minmax(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn reward(ind: &Individual, scale: &RewardScale) -> f64 {
    if !ind.feasible {
        return INFEASIBLE_REWARD;
    }
    let norm = |v: f64, min: f64, span: f64| if span > 0.0 { (v - min) / span } else { 0.0 };
    norm(ind.objectives.f1_se, scale.f1_min, scale.f1_span)
        + norm(ind.objectives.f2_ee, scale.f2_min, scale.f2_span)
        - R_TILDE
}

fn state_input(genes: &[u8], b_max: u8) -> DVector<f64> {
    DVector::from_iterator(genes.len(), genes.iter().map(|&b| b as f64 / b_max as f64))
}

/// Applies action `a` (index < len: +1 on that gene; otherwise −1 on
/// `a - len`), clipped to the valid bit range.
fn apply_action(genes: &[u8], action: usize, b_max: u8) -> Vec<u8> {
    let len = genes.len();
    let (idx, step) = if action < len {
        (action, 1i16)
    } else {
        (action - len, -1i16)
    };
    let mut next = genes.to_vec();
    next[idx] = (next[idx] as i16 + step).clamp(1, b_max as i16) as u8;
    next
}

struct Transition {
    state: Vec<u8>,
    action: usize,
    reward: f64,
    next: Vec<u8>,
}

fn greedy_action(net: &Mlp, input: &DVector<f64>) -> usize {
    let q = net.forward(input);
    let mut best = 0;
    for i in 1..q.len() {
        if q[i] > q[best] {
            best = i;
        }
    }
    best
}

fn alloc_of(genes: &[u8], cfg: &SystemConfig) -> BitAllocation {
    BitAllocation::from_flat(genes, cfg.n_ul, cfg.n_dl, cfg.k_dl)
}

/// Runs the training loop and returns the visited state with the highest
/// reward (preferring feasible states) together with the trace.
pub fn dqn_run(
    evaluator: &Evaluator,
    constraints: &Constraints,
    dqn: &DqnConfig,
    seed: u64,
) -> Result<DqnOutcome> {
    let cfg = evaluator.cfg;
    let len = cfg.n_total() + cfg.k_dl;
    let n_actions = 2 * len;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = reward_scale(evaluator, dqn.b_max)?;

    let sizes = [len, dqn.hidden.0, dqn.hidden.1, n_actions];
    let mut net = if dqn.epsilon == 0.0 {
        // zero initialization keeps the greedy path fully reproducible
        Mlp::zeros(&sizes)
    } else {
        Mlp::new(&sizes, &mut rng)
    };
    let mut target = net.clone();

    let mut state: Vec<u8> = (0..len).map(|_| rng.gen_range(1..=dqn.b_max)).collect();
    let mut best = evaluator.individual(alloc_of(&state, cfg), constraints)?;
    let mut best_reward = reward(&best, &scale);

    let mut memory: Vec<Transition> = Vec::with_capacity(dqn.memory);
    let mut mem_next = 0usize;
    let mut trace = Vec::with_capacity(dqn.iterations);
    let mut grad_steps = 0usize;

    for t in 1..=dqn.iterations {
        let action = if rng.gen_bool(dqn.epsilon) {
            rng.gen_range(0..n_actions)
        } else {
            greedy_action(&net, &state_input(&state, dqn.b_max))
        };
        let next = apply_action(&state, action, dqn.b_max);
        let ind = evaluator.individual(alloc_of(&next, cfg), constraints)?;
        let r = reward(&ind, &scale);
        let is_better = (ind.feasible && !best.feasible)
            || (ind.feasible == best.feasible && r > best_reward);
        if is_better {
            best = ind;
            best_reward = r;
        }

        let transition = Transition {
            state: state.clone(),
            action,
            reward: r,
            next: next.clone(),
        };
        if memory.len() < dqn.memory {
            memory.push(transition);
        } else {
            memory[mem_next] = transition;
            mem_next = (mem_next + 1) % dqn.memory;
        }
        state = next;

        let mut loss = 0.0;
        if memory.len() >= dqn.batch {
            let batch: Vec<TrainSample> = (0..dqn.batch)
                .map(|_| {
                    let tr = &memory[rng.gen_range(0..memory.len())];
                    let next_q = target.forward(&state_input(&tr.next, dqn.b_max));
                    let max_next = next_q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    TrainSample {
                        input: state_input(&tr.state, dqn.b_max),
                        output_index: tr.action,
                        target: tr.reward + dqn.gamma * max_next,
                    }
                })
                .collect();
            loss = net.sgd_step(&batch, dqn.lr);
            grad_steps += 1;
            if dqn.target_sync > 0 && grad_steps % dqn.target_sync == 0 {
                target = net.clone();
            }
        }

        trace.push(TraceRow {
            iter: t,
            reward: r,
            loss,
            epsilon: dqn.epsilon,
            best_reward,
        });
    }

    Ok(DqnOutcome {
        best,
        best_reward,
        trace,
    })
}
