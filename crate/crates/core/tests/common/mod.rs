//! Shared oracles for integration tests.

// Each integration target pulls in this module but uses only a subset.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use taskweave::belief::{BeliefState, SingleAction};
use taskweave::likelihood::{FrequencyModel, LikelihoodModel};
use taskweave::scltl::{Dfa, DfaState, Formula, Word};
use taskweave::world::{Cell, Container, ContainerId, Environment, GridMap, SkillProfile};

/// Direct finite-trace semantics, independent of the progression/DFA
/// machinery under test: recursion over trace positions, where temporal
/// obligations must be discharged within the trace itself.
pub fn eval_trace(f: &Formula, trace: &[Word]) -> bool {
    eval_at(f, trace, 0)
}

fn eval_at(f: &Formula, trace: &[Word], i: usize) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => i < trace.len() && trace[i] == *a,
        Formula::Not(a) => i < trace.len() && trace[i] != *a,
        Formula::And(cs) => cs.iter().all(|c| eval_at(c, trace, i)),
        Formula::Or(cs) => cs.iter().any(|c| eval_at(c, trace, i)),
        Formula::Eventually(g) => (i..trace.len()).any(|j| eval_at(g, trace, j)),
        Formula::Until(g, h) => (i..trace.len())
            .any(|j| eval_at(h, trace, j) && (i..j).all(|k| eval_at(g, trace, k))),
    }
}

/// All word sequences over `alphabet` with length `0..=max_len`, in
/// lexicographic order.
pub fn all_sequences(alphabet: &[Word], max_len: usize) -> Vec<Vec<Word>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for seq in &frontier {
            for w in alphabet {
                let mut longer = seq.clone();
                longer.push(w.clone());
                next.push(longer);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// One aggregated outcome of "run every search to resolution and see who
/// frees up first", produced by brute force rather than the event walk.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleBranch {
    pub robot: usize,
    pub found: bool,
    pub elapsed: f64,
    pub probability: f64,
    pub dfa_state: DfaState,
}

/// Exhaustively enumerates all 2^k search-outcome combinations of the busy
/// robots and projects each onto the first robot to become free (ties:
/// lower robot index, failure before success). Probabilities aggregate per
/// projected branch and normalize over the possible ones.
pub fn exhaustive_free_distribution(
    b: &BeliefState,
    model: &dyn LikelihoodModel,
) -> Vec<OracleBranch> {
    let skills = b.env().skills();
    struct Busy {
        robot: usize,
        word: Word,
        p_found: f64,
        t_fail: f64,
        t_succeed: f64,
    }
    let mut busy = Vec::new();
    for robot in 0..b.num_robots() {
        let Some(SingleAction::Search { container, word }) = b.assignment_of(robot) else {
            continue;
        };
        let pose = b.pose(robot);
        let travel = (pose.path().len() - 1) as f64 / skills.speed;
        let resolve = travel + skills.search_duration;
        let t_fail = (resolve - pose.progress()).max(0.0);
        let t_succeed =
            (resolve + skills.interact_duration(word.skill()) - pose.progress()).max(t_fail);
        let p_found = match b.known_contents().resolved(*container, word.object()) {
            Some(true) => 1.0,
            Some(false) => 0.0,
            None => {
                let c = b.env().container(*container).unwrap();
                model.estimate(word.object(), c)
            }
        };
        busy.push(Busy {
            robot,
            word: word.clone(),
            p_found,
            t_fail,
            t_succeed,
        });
    }

    let mut aggregated: Vec<OracleBranch> = Vec::new();
    for combo in 0..(1u32 << busy.len()) {
        let mut probability = 1.0;
        // (time, robot, kind) of each robot's freeing moment; kind 0 = fail.
        let mut first: Option<(f64, usize, u8)> = None;
        for (i, r) in busy.iter().enumerate() {
            let found = combo & (1 << i) != 0;
            probability *= if found { r.p_found } else { 1.0 - r.p_found };
            let key = if found {
                (r.t_succeed, r.robot, 1u8)
            } else {
                (r.t_fail, r.robot, 0u8)
            };
            let earlier = match &first {
                None => true,
                Some(best) => key < *best,
            };
            if earlier {
                first = Some(key);
            }
        }
        if probability <= 0.0 {
            continue;
        }
        let (elapsed, robot, kind) = first.expect("at least one busy robot");
        let found = kind == 1;
        let dfa_state = if found {
            let r = busy.iter().find(|r| r.robot == robot).unwrap();
            b.dfa().advance(b.dfa_state(), &r.word).unwrap()
        } else {
            b.dfa_state()
        };
        match aggregated
            .iter_mut()
            .find(|br| br.robot == robot && br.found == found)
        {
            Some(br) => br.probability += probability,
            None => aggregated.push(OracleBranch {
                robot,
                found,
                elapsed,
                probability,
                dfa_state,
            }),
        }
    }
    let total: f64 = aggregated.iter().map(|br| br.probability).sum();
    for br in &mut aggregated {
        br.probability /= total;
    }
    aggregated.sort_by(|a, b| {
        a.elapsed
            .total_cmp(&b.elapsed)
            .then(a.robot.cmp(&b.robot))
            .then(a.found.cmp(&b.found))
    });
    aggregated
}

/// A randomized fully assigned belief over an open grid, paired with a
/// randomly trained likelihood model. Deterministic in `seed`.
pub fn random_instance(seed: u64, robots: usize) -> (BeliefState, FrequencyModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = rng.random_range(8..14);
    let height = rng.random_range(8..14);
    let map = GridMap::new(width, height, 0.25).unwrap();

    let kinds = ["bed", "couch", "shelf"];
    let rooms = ["bedroom", "livingroom"];
    let objects = ["blocka", "blockb", "blockc"];

    let n_containers = rng.random_range(robots + 1..=5);
    let mut cells = BTreeSet::new();
    while cells.len() < n_containers + robots {
        cells.insert(Cell(
            rng.random_range(0..width),
            rng.random_range(0..height),
        ));
    }
    let cells: Vec<Cell> = cells.into_iter().collect();
    let containers: Vec<Container> = (0..n_containers)
        .map(|i| Container {
            id: ContainerId(i as u32),
            kind: kinds[rng.random_range(0..kinds.len())].into(),
            room: rooms[rng.random_range(0..rooms.len())].into(),
            cell: cells[i],
        })
        .collect();
    let starts: Vec<Cell> = cells[n_containers..].to_vec();

    let mut skills = SkillProfile {
        speed: 1.0,
        search_duration: f64::from(rng.random_range(0..2)),
        interact: BTreeMap::new(),
    };
    skills
        .interact
        .insert("pick".into(), f64::from(rng.random_range(2..12)));
    skills
        .interact
        .insert("flip".into(), f64::from(rng.random_range(1..6)));

    let env = Arc::new(
        Environment::new(map, containers, starts, skills, BTreeMap::new()).unwrap(),
    );

    let mut model = FrequencyModel::new(1.0, 0.01);
    for kind in kinds {
        for room in rooms {
            for _ in 0..rng.random_range(0..10u32) {
                let contents: BTreeSet<String> = objects
                    .iter()
                    .filter(|_| rng.random_range(0..3u32) == 0)
                    .map(|o| o.to_string())
                    .collect();
                model.observe(kind, room, &contents);
            }
        }
    }

    let words: Vec<Word> = ["pick-blocka", "flip-blockb", "pick-blockc"]
        .iter()
        .map(|w| Word::new(w).unwrap())
        .collect();
    let formula =
        Formula::parse("F pick-blocka && F flip-blockb && F pick-blockc").unwrap();
    let dfa = Arc::new(Dfa::compile(&formula, &words).unwrap());

    let mut belief = BeliefState::new(env, dfa, robots).unwrap();
    for robot in 0..robots {
        let menu: Vec<SingleAction> = belief
            .available_actions(robot)
            .unwrap()
            .into_iter()
            .filter(|a| matches!(a, SingleAction::Search { .. }))
            .collect();
        let choice = menu[rng.random_range(0..menu.len())].clone();
        belief = belief.assign(robot, choice).unwrap();
    }
    (belief, model)
}
