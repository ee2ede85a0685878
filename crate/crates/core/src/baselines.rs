//! Myopic comparison planners.
//!
//! Both share the tree-search planner's interface — hand in a belief, get a
//! full joint action back — but decide greedily: one from distance alone,
//! one from summed object likelihoods with a min-travel pairing. Neither
//! looks past its next search, and neither ever waits (they replan on every
//! outcome instead).

use thiserror::Error;

use crate::belief::{BeliefState, JointAction, SingleAction};
use crate::likelihood::LikelihoodModel;
use crate::scltl::Word;
use crate::world::{Container, ContainerId};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("no viable container remains for the task")]
    Unsatisfiable,
}

/// A container's summed likelihood over the still-relevant words, with
/// settled outcomes counted as 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainerWeight {
    pub container: ContainerId,
    pub weight: f64,
}

fn effective_likelihood(
    b: &BeliefState,
    model: &dyn LikelihoodModel,
    container: &Container,
    word: &Word,
) -> f64 {
    match b.known_contents().resolved(container.id, word.object()) {
        Some(true) => 1.0,
        Some(false) => 0.0,
        None => model.estimate(word.object(), container),
    }
}

/// P(σ) per container: the sum of effective likelihoods over the relevant
/// words. Settled-absent pairs contribute nothing, so a fully searched-out
/// container weighs 0.
pub fn container_weights(
    b: &BeliefState,
    model: &dyn LikelihoodModel,
) -> Vec<ContainerWeight> {
    let words = b.words();
    b.env()
        .containers()
        .iter()
        .map(|c| ContainerWeight {
            container: c.id,
            weight: words
                .iter()
                .map(|w| effective_likelihood(b, model, c, w))
                .sum(),
        })
        .collect()
}

fn free_robots(b: &BeliefState) -> Vec<usize> {
    (0..b.num_robots()).filter(|&r| b.is_free(r)).collect()
}

fn taken_containers(joint: &[Option<SingleAction>]) -> Vec<ContainerId> {
    joint
        .iter()
        .filter_map(|a| match a {
            Some(SingleAction::Search { container, .. }) => Some(*container),
            _ => None,
        })
        .collect()
}

/// Words still open at `container`, in alphabetical order.
fn open_words<'a>(
    b: &BeliefState,
    words: &'a [Word],
    container: ContainerId,
) -> impl Iterator<Item = &'a Word> + 'a {
    let resolved: Vec<bool> = words
        .iter()
        .map(|w| b.known_contents().resolved(container, w.object()) == Some(false))
        .collect();
    words
        .iter()
        .zip(resolved)
        .filter_map(|(w, gone)| (!gone).then_some(w))
}

/// When a robot cannot get a fresh container, double up on one with a word
/// no teammate holds; failing that, wait (legal only beside an active
/// teammate).
fn crowded_fallback(
    b: &BeliefState,
    words: &[Word],
    joint: &[Option<SingleAction>],
    robot: usize,
) -> Option<SingleAction> {
    let from = b.robot_cell(robot);
    let mut best: Option<(f64, SingleAction)> = None;
    for c in b.env().containers() {
        for w in open_words(b, words, c.id) {
            let action = SingleAction::Search {
                container: c.id,
                word: w.clone(),
            };
            if joint.iter().any(|a| a.as_ref() == Some(&action)) {
                continue;
            }
            let Ok(t) = b.env().travel_time(from, c.id) else {
                continue;
            };
            if best.as_ref().is_none_or(|(bt, _)| t < *bt) {
                best = Some((t, action));
            }
        }
    }
    if let Some((_, action)) = best {
        return Some(action);
    }
    let teammate_active = joint
        .iter()
        .enumerate()
        .any(|(j, a)| j != robot && matches!(a, Some(SingleAction::Search { .. })));
    teammate_active.then_some(SingleAction::Wait)
}

/// Greedy distance-only planner: each free robot, in index order, heads to
/// the nearest container that still has an open relevant word and that no
/// teammate has claimed, taking the alphabetically first open word there.
pub fn plan_nonlearned_myopic(b: &BeliefState) -> Result<JointAction, BaselineError> {
    let words: Vec<Word> = b.words().into_iter().collect();
    let mut joint: Vec<Option<SingleAction>> =
        (0..b.num_robots()).map(|r| b.assignment_of(r).cloned()).collect();

    for robot in free_robots(b) {
        let from = b.robot_cell(robot);
        let taken = taken_containers(&joint);
        let mut best: Option<(f64, ContainerId, Word)> = None;
        for c in b.env().containers() {
            if taken.contains(&c.id) {
                continue;
            }
            let Some(w) = open_words(b, &words, c.id).next() else {
                continue;
            };
            let Ok(t) = b.env().travel_time(from, c.id) else {
                continue;
            };
            if best.as_ref().is_none_or(|(bt, _, _)| t < *bt) {
                best = Some((t, c.id, w.clone()));
            }
        }
        joint[robot] = match best {
            Some((_, container, word)) => Some(SingleAction::Search { container, word }),
            None => Some(
                crowded_fallback(b, &words, &joint, robot)
                    .ok_or(BaselineError::Unsatisfiable)?,
            ),
        };
    }
    Ok(joint.into_iter().map(|a| a.expect("all assigned")).collect())
}

/// Likelihood-guided planner: rank containers by summed likelihood, send
/// the free robots to the top-k with the total-travel-minimizing pairing,
/// and pair each with its container's most likely word.
pub fn plan_learned_myopic(
    b: &BeliefState,
    model: &dyn LikelihoodModel,
) -> Result<JointAction, BaselineError> {
    let words: Vec<Word> = b.words().into_iter().collect();
    let mut joint: Vec<Option<SingleAction>> =
        (0..b.num_robots()).map(|r| b.assignment_of(r).cloned()).collect();
    let free = free_robots(b);
    if free.is_empty() {
        return Ok(joint.into_iter().map(|a| a.expect("no robot free")).collect());
    }

    let taken = taken_containers(&joint);
    let mut candidates: Vec<ContainerWeight> = container_weights(b, model)
        .into_iter()
        .filter(|cw| cw.weight > 0.0 && !taken.contains(&cw.container))
        .collect();
    candidates.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .unwrap()
            .then(a.container.cmp(&b.container))
    });
    let k = free.len().min(candidates.len());
    let top: Vec<ContainerId> = candidates[..k].iter().map(|cw| cw.container).collect();

    // Exact min-total-travel pairing of the first k free robots by
    // permutation enumeration (teams are small).
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut perm: Vec<usize> = (0..k).collect();
    permute(&mut perm, 0, &mut |p| {
        let mut total = 0.0;
        for (slot, &ci) in p.iter().enumerate() {
            let from = b.robot_cell(free[slot]);
            match b.env().travel_time(from, top[ci]) {
                Ok(t) => total += t,
                Err(_) => return,
            }
        }
        if best.as_ref().is_none_or(|(bt, _)| total < *bt) {
            best = Some((total, p.to_vec()));
        }
    });

    if let Some((_, pairing)) = best {
        for (slot, &ci) in pairing.iter().enumerate() {
            let robot = free[slot];
            let container = top[ci];
            let c = b.env().container(container).expect("weighted containers exist");
            let mut word: Option<(f64, &Word)> = None;
            for w in open_words(b, &words, container) {
                let p = effective_likelihood(b, model, c, w);
                if word.as_ref().is_none_or(|(bp, _)| p > *bp) {
                    word = Some((p, w));
                }
            }
            let (_, w) = word.expect("positive weight implies an open word");
            joint[robot] = Some(SingleAction::Search {
                container,
                word: w.clone(),
            });
        }
    }

    // Robots beyond the k ranked containers double up or wait.
    for &robot in &free[k..] {
        joint[robot] = Some(
            crowded_fallback(b, &words, &joint, robot)
                .ok_or(BaselineError::Unsatisfiable)?,
        );
    }
    Ok(joint.into_iter().map(|a| a.expect("all assigned")).collect())
}

/// Visit every permutation of `items[at..]` in lexicographic-ish order.
fn permute(items: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == items.len() {
        visit(items);
        return;
    }
    for i in at..items.len() {
        items.swap(at, i);
        permute(items, at + 1, visit);
        items.swap(at, i);
    }
}
