//! Multi-robot belief states and their advancement.
//!
//! A belief bundles everything the team knows: the world model, robot poses
//! and commitments, the task automaton state, and the search history. The
//! core operation walks a fully assigned belief forward to the distribution
//! of successor beliefs in which at least one robot is free again — the
//! chance node of the tree search. Its execution-side twin applies one
//! ground-truth outcome instead of enumerating possibilities.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::likelihood::LikelihoodModel;
use crate::scltl::{Dfa, DfaState, Word};
use crate::world::{Cell, ContainerId, Environment, SkillProfile, WorldError};

#[derive(Debug, Error)]
pub enum BeliefError {
    #[error("robot index {0} out of range for team of {1}")]
    RobotIndex(usize, usize),
    #[error("team size {0} unsupported: environment provides {1} start poses")]
    TeamSize(usize, usize),
    #[error("robot {0} already has an assignment")]
    RobotBusy(usize),
    #[error("robot {0} has no assignment")]
    RobotFree(usize),
    #[error("word {0} does not advance the automaton from the current state")]
    IrrelevantWord(Word),
    #[error("two robots share the assignment {0}")]
    DuplicateAssignment(SingleAction),
    #[error("wait requires another robot holding a container assignment")]
    BareWait,
    #[error("no robot holds a container assignment")]
    AllWait,
    #[error("joint action lists {0} robots, team has {1}")]
    LengthMismatch(usize, usize),
    #[error("joint action changes busy robot {0}'s commitment")]
    AssignmentMismatch(usize),
    #[error("the task is already satisfied")]
    Accepting,
    #[error("outcome event inconsistent: {0}")]
    InconsistentOutcome(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// One robot's commitment: search a container for a word's object (then
/// perform the word's skill), or idle until the next team event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SingleAction {
    Wait,
    Search { container: ContainerId, word: Word },
}

impl fmt::Display for SingleAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingleAction::Wait => f.write_str("wait"),
            SingleAction::Search { container, word } => write!(f, "{word}@{container}"),
        }
    }
}

/// Per-robot actions, one entry per team member.
pub type JointAction = Vec<SingleAction>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    ObjectFound,
    ObjectNotFound,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::ObjectFound => "found",
            Outcome::ObjectNotFound => "not-found",
        })
    }
}

/// One resolved search: which action, what came of it, and when the team
/// learned it.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub action: SingleAction,
    pub outcome: Outcome,
    pub time: f64,
}

/// Object knowledge distilled from the history: per-object resolutions from
/// planned search outcomes, and whole-container reveals from execution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnownContents {
    full: BTreeMap<ContainerId, BTreeSet<String>>,
    pairs: BTreeMap<ContainerId, BTreeMap<String, bool>>,
}

impl KnownContents {
    /// Whether `object`'s presence at `container` is settled, and how.
    pub fn resolved(&self, container: ContainerId, object: &str) -> Option<bool> {
        if let Some(objs) = self.full.get(&container) {
            return Some(objs.contains(object));
        }
        self.pairs
            .get(&container)
            .and_then(|m| m.get(object))
            .copied()
    }

    fn record_pair(&mut self, container: ContainerId, object: &str, present: bool) {
        if self.full.contains_key(&container) {
            return;
        }
        self.pairs
            .entry(container)
            .or_default()
            .insert(object.to_string(), present);
    }

    fn record_full(&mut self, container: ContainerId, objects: BTreeSet<String>) {
        self.full.insert(container, objects);
        self.pairs.remove(&container);
    }
}

/// Where a robot is and what path it has committed to. `progress` counts
/// time since the assignment started: first travel, then dwell at the goal.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotPose {
    path: Vec<Cell>,
    progress: f64,
}

impl RobotPose {
    fn idle(cell: Cell) -> RobotPose {
        RobotPose {
            path: vec![cell],
            progress: 0.0,
        }
    }

    pub fn cell(&self, skills: &SkillProfile) -> Cell {
        let steps = (self.progress * skills.speed).floor() as usize;
        self.path[steps.min(self.path.len() - 1)]
    }

    pub fn path(&self) -> &[Cell] {
        &self.path
    }

    pub fn progress(&self) -> f64 {
        self.progress
    }

    fn travel_time(&self, skills: &SkillProfile) -> f64 {
        (self.path.len() - 1) as f64 / skills.speed
    }
}

/// The team's knowledge at one instant. Values are immutable snapshots;
/// every operation builds a successor instead of mutating.
#[derive(Debug, Clone)]
pub struct BeliefState {
    env: Arc<Environment>,
    dfa: Arc<Dfa>,
    time: f64,
    poses: Vec<RobotPose>,
    assignment: Vec<Option<SingleAction>>,
    dfa_state: DfaState,
    history: Vec<Observation>,
    known: KnownContents,
}

impl PartialEq for BeliefState {
    fn eq(&self, other: &BeliefState) -> bool {
        Arc::ptr_eq(&self.env, &other.env)
            && Arc::ptr_eq(&self.dfa, &other.dfa)
            && self.time == other.time
            && self.poses == other.poses
            && self.assignment == other.assignment
            && self.dfa_state == other.dfa_state
            && self.history == other.history
            && self.known == other.known
    }
}

/// One successor of `advance_until_free`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeBranch {
    pub belief: BeliefState,
    pub probability: f64,
    pub elapsed: f64,
}

/// Weighted successor beliefs in which at least one robot is free, ordered
/// by nondecreasing elapsed time.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeDistribution {
    pub branches: Vec<FreeBranch>,
    /// Probability mass before normalization; 1 for fresh assignments, less
    /// once settled knowledge zeroes out impossible branches.
    pub raw_mass: f64,
}

/// A ground-truth resolution of one busy robot's search, produced by the
/// simulator from the sealed contents.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeEvent {
    pub robot: usize,
    /// Time from the belief's clock to this completion.
    pub elapsed: f64,
    pub outcome: Outcome,
    /// Everything the robot saw inside the container on arrival.
    pub revealed: BTreeSet<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    Fail,
    Succeed,
}

impl BeliefState {
    pub fn new(
        env: Arc<Environment>,
        dfa: Arc<Dfa>,
        robots: usize,
    ) -> Result<BeliefState, BeliefError> {
        let starts = env.robot_starts();
        if robots == 0 || robots > starts.len() {
            return Err(BeliefError::TeamSize(robots, starts.len()));
        }
        let poses = starts[..robots].iter().map(|&c| RobotPose::idle(c)).collect();
        Ok(BeliefState {
            dfa_state: dfa.initial(),
            env,
            dfa,
            time: 0.0,
            poses,
            assignment: vec![None; robots],
            history: Vec::new(),
            known: KnownContents::default(),
        })
    }

    pub fn env(&self) -> &Arc<Environment> {
        &self.env
    }

    pub fn dfa(&self) -> &Arc<Dfa> {
        &self.dfa
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn num_robots(&self) -> usize {
        self.poses.len()
    }

    pub fn dfa_state(&self) -> DfaState {
        self.dfa_state
    }

    pub fn is_accepting(&self) -> bool {
        self.dfa.is_accepting(self.dfa_state)
    }

    pub fn history(&self) -> &[Observation] {
        &self.history
    }

    pub fn known_contents(&self) -> &KnownContents {
        &self.known
    }

    pub fn pose(&self, robot: usize) -> &RobotPose {
        &self.poses[robot]
    }

    pub fn robot_cell(&self, robot: usize) -> Cell {
        self.poses[robot].cell(self.env.skills())
    }

    pub fn assignment_of(&self, robot: usize) -> Option<&SingleAction> {
        self.assignment[robot].as_ref()
    }

    pub fn is_free(&self, robot: usize) -> bool {
        self.assignment[robot].is_none()
    }

    /// Words that still make progress from the current automaton state.
    pub fn words(&self) -> BTreeSet<Word> {
        self.dfa.relevant_words(self.dfa_state)
    }

    fn check_robot(&self, robot: usize) -> Result<(), BeliefError> {
        if robot >= self.poses.len() {
            return Err(BeliefError::RobotIndex(robot, self.poses.len()));
        }
        Ok(())
    }

    /// Choices for a free robot: every (container, relevant word) pair not
    /// settled as absent and not already claimed by a teammate, plus `wait`
    /// whenever some teammate holds a container assignment. Enumeration
    /// order is fixed: containers as declared, words alphabetically, wait
    /// last.
    pub fn available_actions(&self, robot: usize) -> Result<Vec<SingleAction>, BeliefError> {
        self.check_robot(robot)?;
        if self.assignment[robot].is_some() {
            return Err(BeliefError::RobotBusy(robot));
        }
        if self.is_accepting() {
            return Ok(Vec::new());
        }
        let words = self.words();
        let mut actions = Vec::new();
        for c in self.env.containers() {
            for w in &words {
                if self.known.resolved(c.id, w.object()) == Some(false) {
                    continue;
                }
                let candidate = SingleAction::Search {
                    container: c.id,
                    word: w.clone(),
                };
                let taken = self
                    .assignment
                    .iter()
                    .enumerate()
                    .any(|(j, a)| j != robot && a.as_ref() == Some(&candidate));
                if !taken {
                    actions.push(candidate);
                }
            }
        }
        let teammate_active = self.assignment.iter().enumerate().any(|(j, a)| {
            j != robot && matches!(a, Some(SingleAction::Search { .. }))
        });
        if teammate_active {
            actions.push(SingleAction::Wait);
        }
        Ok(actions)
    }

    /// Commit one free robot to an action, locking in its path.
    pub fn assign(&self, robot: usize, action: SingleAction) -> Result<BeliefState, BeliefError> {
        self.check_robot(robot)?;
        if self.assignment[robot].is_some() {
            return Err(BeliefError::RobotBusy(robot));
        }
        if self.is_accepting() {
            return Err(BeliefError::Accepting);
        }
        let mut next = self.clone();
        match &action {
            SingleAction::Wait => {
                let active = self.assignment.iter().enumerate().any(|(j, a)| {
                    j != robot && matches!(a, Some(SingleAction::Search { .. }))
                });
                if !active {
                    return Err(BeliefError::BareWait);
                }
            }
            SingleAction::Search { container, word } => {
                if !self.words().contains(word) {
                    return Err(BeliefError::IrrelevantWord(word.clone()));
                }
                let duplicate = self
                    .assignment
                    .iter()
                    .any(|a| a.as_ref() == Some(&action));
                if duplicate {
                    return Err(BeliefError::DuplicateAssignment(action.clone()));
                }
                let path = self.env.approach_path(self.robot_cell(robot), *container)?;
                next.poses[robot] = RobotPose { path, progress: 0.0 };
            }
        }
        next.assignment[robot] = Some(action);
        Ok(next)
    }

    /// Apply a full joint action: free robots get their entries, busy robots
    /// must be handed back their existing commitments.
    pub fn with_assignment(&self, joint: &JointAction) -> Result<BeliefState, BeliefError> {
        if joint.len() != self.poses.len() {
            return Err(BeliefError::LengthMismatch(joint.len(), self.poses.len()));
        }
        let mut next = self.clone();
        for (robot, action) in joint.iter().enumerate() {
            match &self.assignment[robot] {
                Some(current) => {
                    if current != action {
                        return Err(BeliefError::AssignmentMismatch(robot));
                    }
                }
                None => next = next.assign(robot, action.clone())?,
            }
        }
        Ok(next)
    }

    /// Pure pose extrapolation: busy robots advance along their committed
    /// paths (then dwell at the goal), everyone else stands still.
    pub fn forward_simulate(&self, t: f64) -> Vec<RobotPose> {
        debug_assert!(t >= 0.0);
        self.poses
            .iter()
            .zip(&self.assignment)
            .map(|(pose, action)| match action {
                Some(SingleAction::Search { .. }) => RobotPose {
                    path: pose.path.clone(),
                    progress: pose.progress + t,
                },
                _ => pose.clone(),
            })
            .collect()
    }

    /// Probability of a run of search outcomes: found contributes the
    /// model's likelihood, not-found its complement; outcomes already
    /// settled by the belief's knowledge contribute 1 (or 0 on
    /// contradiction).
    pub fn probability_from_history(
        &self,
        delta: &[Observation],
        model: &dyn LikelihoodModel,
    ) -> f64 {
        let mut p = 1.0;
        for obs in delta {
            let SingleAction::Search { container, word } = &obs.action else {
                continue;
            };
            let object = word.object();
            let found = obs.outcome == Outcome::ObjectFound;
            let factor = match self.known.resolved(*container, object) {
                Some(present) => {
                    if present == found {
                        1.0
                    } else {
                        0.0
                    }
                }
                None => {
                    let c = self.env.container(*container).expect("container ids valid");
                    let ps = model.estimate(object, c);
                    if found {
                        ps
                    } else {
                        1.0 - ps
                    }
                }
            };
            p *= factor;
        }
        p
    }

    /// Remaining (failure, success) completion times for a busy robot:
    /// failure frees it after travel plus search, success additionally after
    /// the word's interaction.
    pub(crate) fn event_times(&self, robot: usize) -> Option<(f64, f64)> {
        let Some(SingleAction::Search { word, .. }) = &self.assignment[robot] else {
            return None;
        };
        let skills = self.env.skills();
        let pose = &self.poses[robot];
        let resolve = pose.travel_time(skills) + skills.search_duration;
        let fail = (resolve - pose.progress).max(0.0);
        let succeed =
            (resolve + skills.interact_duration(word.skill()) - pose.progress).max(fail);
        Some((fail, succeed))
    }

    /// Walk a fully assigned belief to the next point where a robot frees
    /// up, enumerating every way that can happen. Failure completions each
    /// emit a branch and the walk presses on assuming the search succeeded;
    /// the first success completion emits the final branch with the
    /// automaton advanced. Probabilities multiply along each branch's
    /// outcome run, then normalize.
    pub fn advance_until_free(
        &self,
        model: &dyn LikelihoodModel,
    ) -> Result<FreeDistribution, BeliefError> {
        if self.is_accepting() {
            return Err(BeliefError::Accepting);
        }
        let mut events = Vec::new();
        for robot in 0..self.poses.len() {
            match &self.assignment[robot] {
                None => return Err(BeliefError::RobotFree(robot)),
                Some(SingleAction::Wait) => {}
                Some(SingleAction::Search { .. }) => {
                    let (fail, succeed) = self.event_times(robot).expect("busy robot");
                    events.push((fail, robot, EventKind::Fail));
                    events.push((succeed, robot, EventKind::Succeed));
                }
            }
        }
        if events.is_empty() {
            return Err(BeliefError::AllWait);
        }
        events.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });

        let mut working: Vec<Observation> = Vec::new();
        let mut branches: Vec<FreeBranch> = Vec::new();
        for (at, robot, kind) in events {
            let action = self.assignment[robot].clone().expect("event robot is busy");
            match kind {
                EventKind::Fail => {
                    let mut delta = working.clone();
                    delta.push(Observation {
                        action: action.clone(),
                        outcome: Outcome::ObjectNotFound,
                        time: self.time + at,
                    });
                    let probability = self.probability_from_history(&delta, model);
                    branches.push(FreeBranch {
                        belief: self.branch_child(at, robot, &delta, self.dfa_state),
                        probability,
                        elapsed: at,
                    });
                    // The walk continues as if this search had succeeded.
                    working.push(Observation {
                        action,
                        outcome: Outcome::ObjectFound,
                        time: self.time + at,
                    });
                }
                EventKind::Succeed => {
                    let SingleAction::Search { ref word, .. } = action else {
                        unreachable!("wait actions emit no events")
                    };
                    let probability = self.probability_from_history(&working, model);
                    let next_state = self
                        .dfa
                        .advance(self.dfa_state, word)
                        .expect("assigned words come from the task alphabet");
                    assert!(
                        !self.dfa.is_sink(next_state),
                        "completing {word} would violate the task"
                    );
                    branches.push(FreeBranch {
                        belief: self.branch_child(at, robot, &working, next_state),
                        probability,
                        elapsed: at,
                    });
                    break;
                }
            }
        }

        branches.retain(|b| b.probability > 0.0);
        let raw_mass: f64 = branches.iter().map(|b| b.probability).sum();
        debug_assert!(raw_mass > 0.0, "every outcome ruled out");
        for b in &mut branches {
            b.probability /= raw_mass;
        }
        Ok(FreeDistribution { branches, raw_mass })
    }

    /// Successor snapshot at one walk event: time advances, the event robot
    /// and any waiters come free, the branch's outcome run joins the
    /// history.
    fn branch_child(
        &self,
        elapsed: f64,
        freed: usize,
        delta: &[Observation],
        dfa_state: DfaState,
    ) -> BeliefState {
        let skills = self.env.skills();
        let mut poses = self.forward_simulate(elapsed);
        let mut assignment = self.assignment.clone();
        for robot in 0..assignment.len() {
            let release =
                robot == freed || matches!(assignment[robot], Some(SingleAction::Wait));
            if release {
                poses[robot] = RobotPose::idle(poses[robot].cell(skills));
                assignment[robot] = None;
            }
        }
        let mut history = self.history.clone();
        history.extend_from_slice(delta);
        let mut known = self.known.clone();
        for obs in delta {
            if let SingleAction::Search { container, word } = &obs.action {
                known.record_pair(
                    *container,
                    word.object(),
                    obs.outcome == Outcome::ObjectFound,
                );
            }
        }
        BeliefState {
            env: Arc::clone(&self.env),
            dfa: Arc::clone(&self.dfa),
            time: self.time + elapsed,
            poses,
            assignment,
            dfa_state,
            history,
            known,
        }
    }

    /// Execution-side twin of the walk: apply what actually happened. The
    /// whole revealed container is recorded, the acting robot (and any
    /// waiters) come free, and a found object's word advances the task.
    pub fn apply_outcome(&self, event: &OutcomeEvent) -> Result<BeliefState, BeliefError> {
        self.check_robot(event.robot)?;
        if self.is_accepting() {
            return Err(BeliefError::Accepting);
        }
        let Some(SingleAction::Search { container, word }) =
            self.assignment[event.robot].clone()
        else {
            return Err(BeliefError::RobotFree(event.robot));
        };
        let present = event.revealed.contains(word.object());
        let found = event.outcome == Outcome::ObjectFound;
        if present != found {
            return Err(BeliefError::InconsistentOutcome(format!(
                "robot {} reported {} for {} but revealed contents say otherwise",
                event.robot, event.outcome, word
            )));
        }
        let (fail_at, succeed_at) = self.event_times(event.robot).expect("robot is busy");
        let expected = if found { succeed_at } else { fail_at };
        if (event.elapsed - expected).abs() > 1e-6 {
            return Err(BeliefError::InconsistentOutcome(format!(
                "robot {} completion at {} but timing implies {}",
                event.robot, event.elapsed, expected
            )));
        }

        // The search itself resolved on arrival, before any interaction.
        let observed_at = self.time + fail_at.min(event.elapsed);
        let obs = Observation {
            action: SingleAction::Search { container, word: word.clone() },
            outcome: event.outcome,
            time: observed_at,
        };
        let dfa_state = if found {
            let next = self
                .dfa
                .advance(self.dfa_state, &word)
                .expect("assigned words come from the task alphabet");
            assert!(
                !self.dfa.is_sink(next),
                "completing {word} would violate the task"
            );
            next
        } else {
            self.dfa_state
        };
        let mut child = self.branch_child(event.elapsed, event.robot, &[obs], dfa_state);
        child.known.record_full(container, event.revealed.clone());
        Ok(child)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::FrequencyModel;
    use crate::scltl::Formula;
    use crate::world::{Container, GridMap};

    fn words(names: &[&str]) -> Vec<Word> {
        names.iter().map(|w| Word::new(w).unwrap()).collect()
    }

    /// 12×3 open room: a bed 5 moves from robot 0's start, a couch 8 moves
    /// from robot 1's. Picks take 10 time-units, flips 2.
    fn lab_env() -> Arc<Environment> {
        let map = GridMap::new(12, 3, 0.25).unwrap();
        let containers = vec![
            Container {
                id: ContainerId(0),
                kind: "bed".into(),
                room: "bedroom".into(),
                cell: Cell(6, 0),
            },
            Container {
                id: ContainerId(1),
                kind: "couch".into(),
                room: "livingroom".into(),
                cell: Cell(9, 2),
            },
        ];
        let mut skills = SkillProfile::default();
        skills.interact.insert("pick".into(), 10.0);
        skills.interact.insert("flip".into(), 2.0);
        let mut contents = BTreeMap::new();
        contents.insert(ContainerId(0), ["block".to_string()].into_iter().collect());
        contents.insert(
            ContainerId(1),
            ["switch".to_string(), "remote".to_string()].into_iter().collect(),
        );
        Arc::new(
            Environment::new(map, containers, vec![Cell(0, 0), Cell(0, 2)], skills, contents)
                .unwrap(),
        )
    }

    fn lab_dfa() -> Arc<Dfa> {
        let alphabet = words(&["pick-block", "flip-switch"]);
        let f = Formula::parse("F pick-block && F flip-switch").unwrap();
        Arc::new(Dfa::compile(&f, &alphabet).unwrap())
    }

    fn search(container: u32, word: &str) -> SingleAction {
        SingleAction::Search {
            container: ContainerId(container),
            word: Word::new(word).unwrap(),
        }
    }

    /// Model giving P = 0.7 for block-in-bed via 6-of-8 sightings.
    fn model_block_07() -> FrequencyModel {
        let mut m = FrequencyModel::new(1.0, 0.01);
        for i in 0..8 {
            let contents = if i < 6 {
                ["block".to_string()].into_iter().collect()
            } else {
                BTreeSet::new()
            };
            m.observe("bed", "bedroom", &contents);
        }
        m
    }

    /// Model giving P = 0.4 for switch-in-couch (3 of 8) and leaving the
    /// bed pair unseen (P = 0.5).
    fn model_switch_04() -> FrequencyModel {
        let mut m = FrequencyModel::new(1.0, 0.01);
        for i in 0..8 {
            let contents = if i < 3 {
                ["switch".to_string()].into_iter().collect()
            } else {
                BTreeSet::new()
            };
            m.observe("couch", "livingroom", &contents);
        }
        m
    }

    #[test]
    fn single_robot_walk_matches_hand_computation() {
        let b = BeliefState::new(lab_env(), lab_dfa(), 1).unwrap();
        let b = b.assign(0, search(0, "pick-block")).unwrap();
        let dist = b.advance_until_free(&model_block_07()).unwrap();

        assert_eq!(dist.branches.len(), 2);
        assert!((dist.raw_mass - 1.0).abs() < 1e-9);
        let fail = &dist.branches[0];
        assert!((fail.probability - 0.3).abs() < 1e-9);
        assert_eq!(fail.elapsed, 5.0);
        assert_eq!(fail.belief.dfa_state(), b.dfa_state());
        assert!(fail.belief.is_free(0));
        assert_eq!(
            fail.belief.known_contents().resolved(ContainerId(0), "block"),
            Some(false)
        );

        let succeed = &dist.branches[1];
        assert!((succeed.probability - 0.7).abs() < 1e-9);
        assert_eq!(succeed.elapsed, 15.0);
        assert_ne!(succeed.belief.dfa_state(), b.dfa_state());
        assert!(succeed.belief.is_free(0));
        assert_eq!(succeed.belief.time(), 15.0);
        // The search itself resolved on arrival.
        assert_eq!(succeed.belief.history().last().unwrap().time, 5.0);
    }

    #[test]
    fn two_robot_walk_interleaves_events() {
        let b = BeliefState::new(lab_env(), lab_dfa(), 2).unwrap();
        let b = b
            .with_assignment(&vec![search(0, "pick-block"), search(1, "flip-switch")])
            .unwrap();
        let model = model_switch_04();
        let dist = b.advance_until_free(&model).unwrap();

        // Events: robot 0 fails at 5, robot 1 fails at 8, robot 1 succeeds
        // at 10 (its flip only takes 2); robot 0's success at 15 is cut off.
        assert_eq!(dist.branches.len(), 3);
        assert!((dist.raw_mass - 1.0).abs() < 1e-9);
        let probs: Vec<f64> = dist.branches.iter().map(|br| br.probability).collect();
        assert!((probs[0] - 0.5).abs() < 1e-9, "{probs:?}");
        assert!((probs[1] - 0.3).abs() < 1e-9, "{probs:?}");
        assert!((probs[2] - 0.2).abs() < 1e-9, "{probs:?}");
        let elapsed: Vec<f64> = dist.branches.iter().map(|br| br.elapsed).collect();
        assert_eq!(elapsed, vec![5.0, 8.0, 10.0]);

        // Only the final branch advances the automaton, and only robot 1's
        // word fired.
        assert_eq!(dist.branches[0].belief.dfa_state(), b.dfa_state());
        assert_eq!(dist.branches[1].belief.dfa_state(), b.dfa_state());
        let fired = &dist.branches[2].belief;
        assert_ne!(fired.dfa_state(), b.dfa_state());
        assert!(fired.words().contains(&Word::new("pick-block").unwrap()));

        // Middle branch: robot 0 is assumed mid-interaction with its find
        // on record; robot 1 is free after its miss.
        let mid = &dist.branches[1].belief;
        assert!(!mid.is_free(0));
        assert!(mid.is_free(1));
        assert_eq!(
            mid.known_contents().resolved(ContainerId(0), "block"),
            Some(true)
        );
        assert_eq!(
            mid.known_contents().resolved(ContainerId(1), "switch"),
            Some(false)
        );
        assert_eq!(mid.history().len(), 2);
    }

    #[test]
    fn waiting_robot_emits_no_events_and_comes_free() {
        let b = BeliefState::new(lab_env(), lab_dfa(), 2).unwrap();
        let b = b
            .with_assignment(&vec![search(0, "pick-block"), SingleAction::Wait])
            .unwrap();
        let dist = b.advance_until_free(&model_block_07()).unwrap();
        assert_eq!(dist.branches.len(), 2);
        for branch in &dist.branches {
            assert!(branch.belief.is_free(0));
            assert!(branch.belief.is_free(1));
            assert_eq!(branch.belief.robot_cell(1), Cell(0, 2));
        }
    }

    #[test]
    fn advance_is_pure_and_repeatable() {
        let b = BeliefState::new(lab_env(), lab_dfa(), 2).unwrap();
        let b = b
            .with_assignment(&vec![search(0, "pick-block"), search(1, "flip-switch")])
            .unwrap();
        let model = model_switch_04();
        let before = b.clone();
        let first = b.advance_until_free(&model).unwrap();
        let second = b.advance_until_free(&model).unwrap();
        assert_eq!(b, before);
        assert_eq!(first, second);
    }

    #[test]
    fn known_certainty_drops_impossible_branches() {
        // Search the couch for the block first: the miss reveals the whole
        // couch, settling the switch as present.
        let b = BeliefState::new(lab_env(), lab_dfa(), 1).unwrap();
        let b = b.assign(0, search(1, "pick-block")).unwrap();
        let (fail_at, _) = b.event_times(0).unwrap();
        let event = OutcomeEvent {
            robot: 0,
            elapsed: fail_at,
            outcome: Outcome::ObjectNotFound,
            revealed: ["switch".to_string(), "remote".to_string()].into_iter().collect(),
        };
        let after = b.apply_outcome(&event).unwrap();
        let actions = after.available_actions(0).unwrap();
        assert!(!actions.contains(&search(1, "pick-block")));
        assert!(actions.contains(&search(1, "flip-switch")));

        // Searching for the settled switch cannot fail: the failure branch
        // zeroes out and only the certain success remains.
        let b2 = after.assign(0, search(1, "flip-switch")).unwrap();
        let dist = b2.advance_until_free(&model_switch_04()).unwrap();
        assert_eq!(dist.branches.len(), 1);
        assert!((dist.branches[0].probability - 1.0).abs() < 1e-12);
        assert!((dist.raw_mass - 1.0).abs() < 1e-9);
        assert_ne!(dist.branches[0].belief.dfa_state(), b2.dfa_state());
    }

    #[test]
    fn available_actions_products_and_filters() {
        let b = BeliefState::new(lab_env(), lab_dfa(), 2).unwrap();
        // Both free: 2 containers × 2 words, no wait for the first chooser.
        let a0 = b.available_actions(0).unwrap();
        assert_eq!(a0.len(), 4);
        assert!(!a0.contains(&SingleAction::Wait));

        // After robot 0 claims a pair, robot 1 loses that pair, gains wait.
        let b = b.assign(0, search(0, "pick-block")).unwrap();
        let a1 = b.available_actions(1).unwrap();
        assert_eq!(a1.len(), 4); // 4 pairs − 1 duplicate + wait
        assert!(!a1.contains(&search(0, "pick-block")));
        assert_eq!(a1.last(), Some(&SingleAction::Wait));

        assert!(matches!(
            b.available_actions(0),
            Err(BeliefError::RobotBusy(0))
        ));
    }

    #[test]
    fn stale_commitments_leave_the_action_menu_untouched() {
        // Both robots go for the same word at different containers; the
        // winner's advance makes the loser's commitment stale, and the free
        // robot's menu is the full product of the remaining task.
        let env = lab_env();
        let alphabet = words(&["pick-block", "flip-switch", "pick-remote"]);
        let f = Formula::parse("F pick-block && F pick-remote").unwrap();
        let dfa = Arc::new(Dfa::compile(&f, &alphabet).unwrap());
        let b = BeliefState::new(env, dfa, 2).unwrap();
        let b = b
            .with_assignment(&vec![search(0, "pick-block"), search(1, "pick-block")])
            .unwrap();
        // Robot 0 completes first (travel 5 + pick 10).
        let event = OutcomeEvent {
            robot: 0,
            elapsed: 15.0,
            outcome: Outcome::ObjectFound,
            revealed: ["block".to_string()].into_iter().collect(),
        };
        let after = b.apply_outcome(&event).unwrap();
        assert!(after.is_free(0));
        assert!(!after.is_free(1));
        assert_eq!(after.words().len(), 1); // only pick-remote left
        let menu = after.available_actions(0).unwrap();
        // The bed's reveal settled the remote as absent there, leaving the
        // couch pair plus wait (robot 1 is still traveling); robot 1's stale
        // claim blocks nothing.
        assert_eq!(menu.len(), 2);
        assert!(menu.contains(&search(1, "pick-remote")));
        assert!(menu.contains(&SingleAction::Wait));

        // Robot 1's eventual stale completion must not advance the task.
        let b2 = after.assign(0, SingleAction::Wait).unwrap();
        let stale = OutcomeEvent {
            robot: 1,
            // Travel 8 + flip... pick takes 10: completes at 18, minus the
            // 15 already elapsed.
            elapsed: 3.0,
            outcome: Outcome::ObjectNotFound,
            revealed: ["switch".to_string(), "remote".to_string()].into_iter().collect(),
        };
        let done = b2.apply_outcome(&stale);
        // Block is not in the couch: the search fails at arrival (8 − 15 <
        // 0 already passed? travel was 8, so failure resolved at 8; our
        // event claims 3 more units past 15 = 18, which is wrong).
        assert!(done.is_err());
        let stale = OutcomeEvent {
            robot: 1,
            elapsed: 0.0, // failure resolved at arrival, already reached
            outcome: Outcome::ObjectNotFound,
            revealed: ["switch".to_string(), "remote".to_string()].into_iter().collect(),
        };
        let done = b2.apply_outcome(&stale).unwrap();
        assert_eq!(done.dfa_state(), after.dfa_state());
        assert!(done.is_free(1));
    }

    #[test]
    fn accepting_state_offers_nothing() {
        let b = BeliefState::new(lab_env(), lab_dfa(), 1).unwrap();
        let b = b.assign(0, search(0, "pick-block")).unwrap();
        let found = OutcomeEvent {
            robot: 0,
            elapsed: 15.0,
            outcome: Outcome::ObjectFound,
            revealed: ["block".to_string()].into_iter().collect(),
        };
        let b = b.apply_outcome(&found).unwrap();
        let b = b.assign(0, search(1, "flip-switch")).unwrap();
        let found = OutcomeEvent {
            robot: 0,
            // From the bed's approach cell to the couch's: recompute below.
            elapsed: b.event_times(0).unwrap().1,
            outcome: Outcome::ObjectFound,
            revealed: ["switch".to_string(), "remote".to_string()].into_iter().collect(),
        };
        let b = b.apply_outcome(&found).unwrap();
        assert!(b.is_accepting());
        assert!(b.available_actions(0).unwrap().is_empty());
        assert!(matches!(
            b.assign(0, search(0, "pick-block")),
            Err(BeliefError::Accepting)
        ));
        assert!(matches!(
            b.advance_until_free(&model_block_07()),
            Err(BeliefError::Accepting)
        ));
    }

    #[test]
    fn forward_simulate_saturates_and_interpolates() {
        let env = lab_env();
        let skills = env.skills().clone();
        let b = BeliefState::new(env, lab_dfa(), 2).unwrap();
        let b = b
            .with_assignment(&vec![search(0, "pick-block"), search(1, "flip-switch")])
            .unwrap();

        let unmoved = b.forward_simulate(0.0);
        assert_eq!(unmoved[0].cell(&skills), Cell(0, 0));
        assert_eq!(unmoved[1].cell(&skills), Cell(0, 2));

        // Past its 5-cell travel, robot 0 parks at the approach cell.
        let later = b.forward_simulate(9.0);
        let goal = *b.pose(0).path().last().unwrap();
        assert_eq!(later[0].cell(&skills), goal);

        // Whole-step jumps agree with unit-step simulation for both robots.
        for t in 0..12 {
            let jump = b.forward_simulate(f64::from(t));
            let mut step = b.clone();
            for _ in 0..t {
                step.poses = step.forward_simulate(1.0);
            }
            for r in 0..2 {
                assert_eq!(
                    jump[r].cell(&skills),
                    step.poses[r].cell(&skills),
                    "robot {r} at t={t}"
                );
            }
        }
    }

    #[test]
    fn probability_of_outcome_runs() {
        let b = BeliefState::new(lab_env(), lab_dfa(), 2).unwrap();
        let model = model_switch_04();
        assert_eq!(b.probability_from_history(&[], &model), 1.0);

        let found = |c: u32, w: &str| Observation {
            action: search(c, w),
            outcome: Outcome::ObjectFound,
            time: 0.0,
        };
        let missed = |c: u32, w: &str| Observation {
            action: search(c, w),
            outcome: Outcome::ObjectNotFound,
            time: 0.0,
        };
        // Unseen bed pair: 0.5. Trained couch pair: 0.4.
        let p = b.probability_from_history(&[found(0, "pick-block")], &model);
        assert!((p - 0.5).abs() < 1e-12);
        let p = b.probability_from_history(
            &[found(0, "pick-block"), missed(1, "flip-switch")],
            &model,
        );
        assert!((p - 0.3).abs() < 1e-12);
    }

    #[test]
    fn outcome_events_are_validated() {
        let b = BeliefState::new(lab_env(), lab_dfa(), 1).unwrap();
        let b = b.assign(0, search(0, "pick-block")).unwrap();
        // Claimed found, but the revealed contents lack the object.
        let bad = OutcomeEvent {
            robot: 0,
            elapsed: 15.0,
            outcome: Outcome::ObjectFound,
            revealed: BTreeSet::new(),
        };
        assert!(matches!(
            b.apply_outcome(&bad),
            Err(BeliefError::InconsistentOutcome(_))
        ));
        // Right outcome, wrong completion time.
        let bad = OutcomeEvent {
            robot: 0,
            elapsed: 4.0,
            outcome: Outcome::ObjectNotFound,
            revealed: BTreeSet::new(),
        };
        assert!(matches!(
            b.apply_outcome(&bad),
            Err(BeliefError::InconsistentOutcome(_))
        ));
    }

    #[test]
    fn failure_reveals_everything_seen() {
        let b = BeliefState::new(lab_env(), lab_dfa(), 1).unwrap();
        let b = b.assign(0, search(1, "pick-block")).unwrap();
        let (fail_at, _) = b.event_times(0).unwrap();
        let event = OutcomeEvent {
            robot: 0,
            elapsed: fail_at,
            outcome: Outcome::ObjectNotFound,
            revealed: ["switch".to_string(), "remote".to_string()].into_iter().collect(),
        };
        let after = b.apply_outcome(&event).unwrap();
        let known = after.known_contents();
        assert_eq!(known.resolved(ContainerId(1), "block"), Some(false));
        assert_eq!(known.resolved(ContainerId(1), "switch"), Some(true));
        assert_eq!(known.resolved(ContainerId(1), "remote"), Some(true));
        assert_eq!(known.resolved(ContainerId(0), "block"), None);
        assert_eq!(after.time(), fail_at);
        assert_eq!(after.dfa_state(), b.dfa_state());
    }

    #[test]
    fn wait_needs_an_active_teammate() {
        let b = BeliefState::new(lab_env(), lab_dfa(), 2).unwrap();
        assert!(matches!(
            b.assign(0, SingleAction::Wait),
            Err(BeliefError::BareWait)
        ));
        let b = b.assign(0, search(0, "pick-block")).unwrap();
        let b = b.assign(1, SingleAction::Wait).unwrap();
        assert!(matches!(
            b.advance_until_free(&model_block_07()),
            Ok(dist) if dist.branches.len() == 2
        ));
    }
}
