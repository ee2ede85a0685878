//! Belief-space PO-UCT planner.
//!
//! Each decision runs a fixed budget of select→expand→sample→rollout→backup
//! iterations over a tree of belief states. Free robots are assigned one at
//! a time through partial-assignment nodes, so branching stays |A| per level
//! instead of |A|^N per joint decision; once every robot holds an action the
//! edge becomes a chance point that samples the team's next freeing event.
//! Edge values estimate the expected remaining time of Bellman's recursion
//! over those freeing events, and the returned joint action follows the
//! minimum-mean-cost edges from the root.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::plan_learned_myopic;
use crate::belief::{BeliefError, BeliefState, FreeBranch, FreeDistribution, JointAction, SingleAction};
use crate::likelihood::LikelihoodModel;

/// Stand-in cost for beliefs with no way forward: everything relevant
/// resolved absent. The probability of ending up there is fixed by the
/// likelihoods alone — no visiting order changes the product of misses —
/// so the constant shifts every action's value by the same mass and the
/// argmin is unaffected. It is kept at roughly twice a bad makespan:
/// large enough that live branches always look better, small enough that
/// the dead-end coin flip does not drown the travel-time signal in
/// sampled means.
pub const DEAD_END: f64 = 300.0;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("no action can make progress from this belief")]
    Unsatisfiable,
    #[error("invalid planner configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

fn default_samples() -> usize {
    100_000
}
fn default_c() -> f64 {
    std::f64::consts::SQRT_2
}
fn default_depth() -> usize {
    30
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Rollouts per decision.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Exploration constant on the normalized-cost UCB rule.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Maximum joint decisions per rollout before the heuristic cut.
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            samples: default_samples(),
            c: default_c(),
            depth: default_depth(),
            seed: 0,
        }
    }
}

impl PlannerConfig {
    fn validate(&self) -> Result<(), PlannerError> {
        if self.samples == 0 {
            return Err(PlannerError::Config("sample budget must be ≥ 1".into()));
        }
        if !(self.c >= 0.0) {
            return Err(PlannerError::Config(format!(
                "exploration constant must be ≥ 0, got {}",
                self.c
            )));
        }
        if self.depth == 0 {
            return Err(PlannerError::Config("rollout depth must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// One row of a node's rollout history: an action with its visit count and
/// running mean cost-to-go.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionStat {
    pub action: SingleAction,
    pub n: u64,
    pub q: f64,
}

enum Edge {
    Fresh,
    /// Partial-assignment edge: the joint action is still incomplete.
    Partial(usize),
    /// Completed joint action: its freeing-event distribution, with one
    /// lazily created child per branch.
    Chance {
        dist: FreeDistribution,
        kids: Vec<Option<usize>>,
    },
}

struct SearchNode {
    belief: BeliefState,
    /// Free robots not yet assigned in this node's partial joint action;
    /// the menu belongs to the first of them.
    pending: Vec<usize>,
    menu: Vec<SingleAction>,
    stats: Vec<ActionStat>,
    edges: Vec<Edge>,
    visits: u64,
}

impl SearchNode {
    fn build(belief: BeliefState, pending: Vec<usize>) -> Result<SearchNode, PlannerError> {
        let menu = match pending.first() {
            Some(&r) if !belief.is_accepting() => belief.available_actions(r)?,
            _ => Vec::new(),
        };
        let stats = menu
            .iter()
            .map(|a| ActionStat {
                action: a.clone(),
                n: 0,
                q: 0.0,
            })
            .collect();
        let edges = menu.iter().map(|_| Edge::Fresh).collect();
        Ok(SearchNode {
            belief,
            pending,
            menu,
            stats,
            edges,
            visits: 0,
        })
    }
}

/// Untried actions first, in menu order; otherwise the argmin of
/// `Q̂ − c·√(ln visits / n)` with Q̂ the mean cost divided by `cost_scale`
/// (the running maximum rollout cost seen at the root).
pub fn ucb_select(stats: &[ActionStat], visits: u64, c: f64, cost_scale: f64) -> usize {
    if let Some(i) = stats.iter().position(|s| s.n == 0) {
        return i;
    }
    let ln_v = (visits.max(1) as f64).ln();
    let mut best = 0;
    let mut best_value = f64::INFINITY;
    for (i, s) in stats.iter().enumerate() {
        let value = s.q / cost_scale - c * (ln_v / s.n as f64).sqrt();
        if value < best_value {
            best_value = value;
            best = i;
        }
    }
    best
}

/// Categorical draw from a freeing-event distribution by CDF inversion;
/// `u` is uniform on [0, 1).
pub fn sample_transition(dist: &FreeDistribution, u: f64) -> &FreeBranch {
    debug_assert!(!dist.branches.is_empty());
    let mut acc = 0.0;
    for branch in &dist.branches {
        acc += branch.probability;
        if u < acc {
            return branch;
        }
    }
    dist.branches.last().expect("non-empty distribution")
}

fn branch_index(dist: &FreeDistribution, u: f64) -> usize {
    let picked = sample_transition(dist, u) as *const FreeBranch;
    dist.branches
        .iter()
        .position(|b| std::ptr::eq(b, picked))
        .expect("branch from this distribution")
}

/// Optimistic remaining time: the closest any robot stands to any container
/// still possibly holding a relevant object, plus one minimum-duration
/// interaction per outstanding DFA step. Zero at acceptance; the dead-end
/// penalty when nothing viable remains.
pub fn heuristic_cost_to_go(b: &BeliefState) -> f64 {
    if b.is_accepting() {
        return 0.0;
    }
    let words = b.words();
    let steps = b
        .dfa()
        .distance_to_accept(b.dfa_state())
        .expect("live DFA states reach acceptance") as f64;
    let min_interact = b.env().skills().min_interact_duration();
    let mut nearest = f64::INFINITY;
    for c in b.env().containers() {
        if !words
            .iter()
            .any(|w| b.known_contents().resolved(c.id, w.object()) != Some(false))
        {
            continue;
        }
        for r in 0..b.num_robots() {
            if let Ok(t) = b.env().travel_time(b.robot_cell(r), c.id) {
                nearest = nearest.min(t);
            }
        }
    }
    if nearest.is_finite() {
        nearest + steps * min_interact
    } else {
        DEAD_END
    }
}

fn rollout(
    model: &dyn LikelihoodModel,
    mut b: BeliefState,
    depth_left: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut cost = 0.0;
    for _ in 0..depth_left {
        if b.is_accepting() {
            return cost;
        }
        let Ok(joint) = plan_learned_myopic(&b, model) else {
            return cost + DEAD_END;
        };
        let Ok(assigned) = b.with_assignment(&joint) else {
            return cost + DEAD_END;
        };
        let Ok(dist) = assigned.advance_until_free(model) else {
            return cost + DEAD_END;
        };
        let branch = sample_transition(&dist, rng.random());
        cost += branch.elapsed;
        b = branch.belief.clone();
    }
    if b.is_accepting() {
        cost
    } else {
        cost + heuristic_cost_to_go(&b)
    }
}

struct Search<'m> {
    arena: Vec<SearchNode>,
    model: &'m dyn LikelihoodModel,
    c: f64,
    depth: usize,
    max_cost: f64,
    rng: ChaCha8Rng,
}

impl Search<'_> {
    fn push_node(&mut self, belief: BeliefState) -> Result<usize, PlannerError> {
        let pending = (0..belief.num_robots()).filter(|&r| belief.is_free(r)).collect();
        self.push_node_with_pending(belief, pending)
    }

    fn push_node_with_pending(
        &mut self,
        belief: BeliefState,
        pending: Vec<usize>,
    ) -> Result<usize, PlannerError> {
        self.arena.push(SearchNode::build(belief, pending)?);
        Ok(self.arena.len() - 1)
    }

    /// One select→expand→sample→rollout→backup pass; returns the total cost
    /// observed from the root.
    fn iterate(&mut self) -> Result<f64, PlannerError> {
        let mut path: Vec<(usize, usize, f64)> = Vec::new();
        let mut node_id = 0usize;
        let mut depth_used = 0usize;
        let tail: f64;
        loop {
            {
                let node = &self.arena[node_id];
                if node.belief.is_accepting() {
                    tail = 0.0;
                    break;
                }
                if node.menu.is_empty() {
                    tail = DEAD_END;
                    break;
                }
            }
            if depth_used >= self.depth {
                tail = heuristic_cost_to_go(&self.arena[node_id].belief);
                break;
            }
            let a = {
                let node = &self.arena[node_id];
                ucb_select(&node.stats, node.visits, self.c, self.max_cost)
            };
            match &self.arena[node_id].edges[a] {
                Edge::Fresh => {
                    let (robot, action, last) = {
                        let node = &self.arena[node_id];
                        (node.pending[0], node.menu[a].clone(), node.pending.len() == 1)
                    };
                    let assigned = self.arena[node_id].belief.assign(robot, action)?;
                    if last {
                        let dist = assigned.advance_until_free(self.model)?;
                        let u: f64 = self.rng.random();
                        let idx = branch_index(&dist, u);
                        let elapsed = dist.branches[idx].elapsed;
                        let child = self.push_node(dist.branches[idx].belief.clone())?;
                        let mut kids = vec![None; dist.branches.len()];
                        kids[idx] = Some(child);
                        self.arena[node_id].edges[a] = Edge::Chance { dist, kids };
                        depth_used += 1;
                        path.push((node_id, a, elapsed));
                        let start = self.arena[child].belief.clone();
                        tail = rollout(self.model, start, self.depth - depth_used, &mut self.rng);
                    } else {
                        let rest = self.arena[node_id].pending[1..].to_vec();
                        let child = self.push_node_with_pending(assigned, rest)?;
                        self.arena[node_id].edges[a] = Edge::Partial(child);
                        path.push((node_id, a, 0.0));
                        let start = self.arena[child].belief.clone();
                        tail = rollout(self.model, start, self.depth - depth_used, &mut self.rng);
                    }
                    break;
                }
                Edge::Partial(id) => {
                    let id = *id;
                    path.push((node_id, a, 0.0));
                    node_id = id;
                }
                Edge::Chance { .. } => {
                    let u: f64 = self.rng.random();
                    let (idx, elapsed, kid, branch_belief) = {
                        let Edge::Chance { dist, kids } = &self.arena[node_id].edges[a] else {
                            unreachable!()
                        };
                        let idx = branch_index(dist, u);
                        (
                            idx,
                            dist.branches[idx].elapsed,
                            kids[idx],
                            dist.branches[idx].belief.clone(),
                        )
                    };
                    depth_used += 1;
                    path.push((node_id, a, elapsed));
                    match kid {
                        Some(id) => node_id = id,
                        None => {
                            let child = self.push_node(branch_belief)?;
                            let Edge::Chance { kids, .. } = &mut self.arena[node_id].edges[a] else {
                                unreachable!()
                            };
                            kids[idx] = Some(child);
                            let start = self.arena[child].belief.clone();
                            tail =
                                rollout(self.model, start, self.depth - depth_used, &mut self.rng);
                            break;
                        }
                    }
                }
            }
        }

        let mut running = tail;
        for &(nid, a, elapsed) in path.iter().rev() {
            running += elapsed;
            let node = &mut self.arena[nid];
            node.visits += 1;
            let stat = &mut node.stats[a];
            stat.n += 1;
            stat.q += (running - stat.q) / stat.n as f64;
        }
        Ok(running)
    }
}

/// Plan the team's next joint action and return the root's rollout history
/// alongside it.
pub fn plan_with_stats(
    b: &BeliefState,
    model: &dyn LikelihoodModel,
    config: &PlannerConfig,
) -> Result<(JointAction, Vec<ActionStat>), PlannerError> {
    config.validate()?;
    assert!(!b.is_accepting(), "planning from an accepting state");
    let pending: Vec<usize> = (0..b.num_robots()).filter(|&r| b.is_free(r)).collect();
    assert!(!pending.is_empty(), "planning with no free robot");

    let root = SearchNode::build(b.clone(), pending)?;
    if root.menu.is_empty() {
        return Err(PlannerError::Unsatisfiable);
    }
    let mut search = Search {
        arena: vec![root],
        model,
        c: config.c,
        depth: config.depth,
        max_cost: 1.0,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
    };
    for _ in 0..config.samples {
        let total = search.iterate()?;
        search.max_cost = search.max_cost.max(total);
    }

    // Follow minimum-mean-cost edges through the assignment levels; any
    // level the search never settled falls back to the first menu entry.
    let mut refined = b.clone();
    let mut node_id = Some(0usize);
    while let Some(nid) = node_id {
        let node = &search.arena[nid];
        if node.pending.is_empty() {
            break;
        }
        let mut pick: Option<(f64, usize)> = None;
        for (i, s) in node.stats.iter().enumerate() {
            if s.n > 0 && pick.as_ref().is_none_or(|(q, _)| s.q < *q) {
                pick = Some((s.q, i));
            }
        }
        let i = pick.map(|(_, i)| i).unwrap_or(0);
        refined = refined.assign(node.pending[0], node.menu[i].clone())?;
        node_id = match &node.edges[i] {
            Edge::Partial(id) => Some(*id),
            _ => None,
        };
    }
    // Cover any robots left unassigned by an unexpanded branch.
    for r in 0..refined.num_robots() {
        if refined.is_free(r) {
            let menu = refined.available_actions(r)?;
            let first = menu.into_iter().next().ok_or(PlannerError::Unsatisfiable)?;
            refined = refined.assign(r, first)?;
        }
    }
    let joint: JointAction = (0..refined.num_robots())
        .map(|r| refined.assignment_of(r).cloned().expect("fully assigned"))
        .collect();
    let stats = search.arena[0].stats.clone();
    Ok((joint, stats))
}

/// Plan the team's next joint action by PO-UCT tree search.
pub fn plan(
    b: &BeliefState,
    model: &dyn LikelihoodModel,
    config: &PlannerConfig,
) -> Result<JointAction, PlannerError> {
    plan_with_stats(b, model, config).map(|(joint, _)| joint)
}
