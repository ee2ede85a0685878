//! Episode driver and benchmark campaigns.
//!
//! Everything that touches ground truth lives here: task generation samples
//! objects actually present in the home, and the plan–execute–replan loop
//! resolves searches against the sealed contents. Planners only ever see
//! beliefs and likelihoods.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{plan_learned_myopic, plan_nonlearned_myopic, BaselineError};
use crate::belief::{BeliefError, BeliefState, Outcome, OutcomeEvent, SingleAction};
use crate::likelihood::LikelihoodModel;
use crate::planner::{plan, PlannerConfig, PlannerError};
use crate::scltl::{Dfa, DfaState, Formula, ScltlError};
use crate::world::{generate, Catalog, Environment, SizeClass, WorldError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("home offers {found} distinct objects, template needs {need}")]
    TooFewObjects { need: usize, found: usize },
    #[error("unknown planner {0:?}")]
    UnknownPlanner(String),
    #[error("invalid benchmark configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Scltl(#[from] ScltlError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
}

/// One of the six task shapes; slots are filled with objects sampled from
/// the home.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskTemplate {
    pub id: u8,
    pub arity: usize,
}

pub const TEMPLATES: [TaskTemplate; 6] = [
    TaskTemplate { id: 1, arity: 2 },
    TaskTemplate { id: 2, arity: 3 },
    TaskTemplate { id: 3, arity: 3 },
    TaskTemplate { id: 4, arity: 2 },
    TaskTemplate { id: 5, arity: 3 },
    TaskTemplate { id: 6, arity: 4 },
];

impl TaskTemplate {
    pub fn render(&self, slots: &[&str]) -> String {
        assert_eq!(slots.len(), self.arity, "template {} takes {} slots", self.id, self.arity);
        let s = slots;
        match self.id {
            1 => format!("F i-{} && F i-{}", s[0], s[1]),
            2 => format!("F i-{} && F i-{} && F i-{}", s[0], s[1], s[2]),
            3 => format!("F i-{} && (F i-{} || F i-{})", s[0], s[1], s[2]),
            4 => format!("(!i-{1} U i-{0}) && F i-{1}", s[0], s[1]),
            5 => format!(
                "((!i-{2} && !i-{1}) U i-{0}) && (!i-{2} U i-{1}) && F i-{2}",
                s[0], s[1], s[2]
            ),
            6 => format!(
                "((!i-{2} && !i-{3}) U i-{0} || (!i-{2} && !i-{3}) U i-{1}) && (!i-{3} U i-{2}) && F i-{3}",
                s[0], s[1], s[2], s[3]
            ),
            other => panic!("no template {other}"),
        }
    }
}

/// Pick a template uniformly and fill its slots with distinct objects that
/// really sit in the home's containers.
pub fn generate_task(env: &Environment, seed: u64) -> Result<String, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template = TEMPLATES[rng.random_range(0..TEMPLATES.len())];
    let mut objects: Vec<String> = env.all_objects().into_iter().collect();
    if objects.len() < template.arity {
        return Err(HarnessError::TooFewObjects {
            need: template.arity,
            found: objects.len(),
        });
    }
    for i in 0..template.arity {
        let j = rng.random_range(i..objects.len());
        objects.swap(i, j);
    }
    let slots: Vec<&str> = objects[..template.arity].iter().map(String::as_str).collect();
    Ok(template.render(&slots))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerKind {
    NonlearnedMyopic,
    LearnedMyopic,
    MrPouct,
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlannerKind::NonlearnedMyopic => "nonlearned-myopic",
            PlannerKind::LearnedMyopic => "learned-myopic",
            PlannerKind::MrPouct => "mr-pouct",
        })
    }
}

impl FromStr for PlannerKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<PlannerKind, HarnessError> {
        match s {
            "nonlearned-myopic" => Ok(PlannerKind::NonlearnedMyopic),
            "learned-myopic" => Ok(PlannerKind::LearnedMyopic),
            "mr-pouct" => Ok(PlannerKind::MrPouct),
            other => Err(HarnessError::UnknownPlanner(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpisodeOutcome {
    Completed,
    Unsatisfiable,
    BudgetExceeded,
}

impl fmt::Display for EpisodeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EpisodeOutcome::Completed => "completed",
            EpisodeOutcome::Unsatisfiable => "unsatisfiable",
            EpisodeOutcome::BudgetExceeded => "budget-exceeded",
        })
    }
}

/// One resolved ground-truth search completion.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub robot: usize,
    pub action: SingleAction,
    pub outcome: Outcome,
    pub dfa_state: DfaState,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={:.6} robot={} action={} outcome={} dfa={}",
            self.time, self.robot, self.action, self.outcome, self.dfa_state
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub planner: PlannerKind,
    pub makespan: f64,
    /// Cells traveled, one entry per robot.
    pub distance: Vec<f64>,
    pub outcome: EpisodeOutcome,
    pub trace: Vec<TraceEvent>,
    pub seed: u64,
    pub replans: usize,
}

impl EpisodeResult {
    pub fn total_distance(&self) -> f64 {
        self.distance.iter().sum()
    }

    /// Structured-text event log; identical inputs render identical bytes.
    pub fn render_trace(&self, task: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("# task: {task}\n"));
        out.push_str(&format!(
            "# planner: {} robots: {} seed: {}\n",
            self.planner,
            self.distance.len(),
            self.seed
        ));
        out.push_str(&format!(
            "# outcome: {} makespan: {:.6} distance: {:.6} replans: {}\n",
            self.outcome,
            self.makespan,
            self.total_distance(),
            self.replans
        ));
        for ev in &self.trace {
            out.push_str(&format!("{ev}\n"));
        }
        out
    }
}

fn path_index(progress: f64, speed: f64, len: usize) -> usize {
    ((progress * speed).floor() as usize).min(len - 1)
}

/// Drive one episode: plan for the free robots, commit, resolve the
/// earliest true outcome, and replan, until the automaton accepts or the
/// replan budget (default 10 × containers) runs out.
pub fn run_episode(
    env: &Arc<Environment>,
    task: &str,
    planner: PlannerKind,
    robots: usize,
    model: &dyn LikelihoodModel,
    planner_config: &PlannerConfig,
    budget: Option<usize>,
) -> Result<EpisodeResult, HarnessError> {
    let formula = Formula::parse(task)?;
    let alphabet: Vec<_> = formula.atoms().into_iter().collect();
    let dfa = Arc::new(Dfa::compile(&formula, &alphabet)?);
    let mut b = BeliefState::new(env.clone(), dfa, robots)?;
    let budget = budget.unwrap_or(10 * env.containers().len());

    let mut trace = Vec::new();
    let mut distance = vec![0.0; robots];
    let mut replans = 0usize;
    let outcome = loop {
        if b.is_accepting() {
            break EpisodeOutcome::Completed;
        }
        if replans >= budget {
            break EpisodeOutcome::BudgetExceeded;
        }
        replans += 1;
        let decision = PlannerConfig {
            seed: planner_config.seed.wrapping_add(replans as u64),
            ..planner_config.clone()
        };
        let joint = match planner {
            PlannerKind::NonlearnedMyopic => match plan_nonlearned_myopic(&b) {
                Ok(j) => j,
                Err(BaselineError::Unsatisfiable) => break EpisodeOutcome::Unsatisfiable,
            },
            PlannerKind::LearnedMyopic => match plan_learned_myopic(&b, model) {
                Ok(j) => j,
                Err(BaselineError::Unsatisfiable) => break EpisodeOutcome::Unsatisfiable,
            },
            PlannerKind::MrPouct => match plan(&b, model, &decision) {
                Ok(j) => j,
                Err(PlannerError::Unsatisfiable) => break EpisodeOutcome::Unsatisfiable,
                Err(e) => return Err(e.into()),
            },
        };
        let assigned = b.with_assignment(&joint)?;

        // The earliest completion under the sealed contents; ties go to the
        // lower robot index, mirroring the belief walk.
        let mut next: Option<(f64, usize, bool)> = None;
        for r in 0..robots {
            let Some(SingleAction::Search { container, word }) = assigned.assignment_of(r) else {
                continue;
            };
            let found = env.true_contents(*container).contains(word.object());
            let (fail_at, succeed_at) = assigned.event_times(r).expect("searching robot");
            let elapsed = if found { succeed_at } else { fail_at };
            if next.is_none_or(|(t, _, _)| elapsed < t) {
                next = Some((elapsed, r, found));
            }
        }
        let (elapsed, robot, found) = next.expect("a committed team is searching somewhere");

        let skills = env.skills();
        for r in 0..robots {
            if matches!(assigned.assignment_of(r), Some(SingleAction::Search { .. })) {
                let pose = assigned.pose(r);
                let before = path_index(pose.progress(), skills.speed, pose.path().len());
                let after = path_index(pose.progress() + elapsed, skills.speed, pose.path().len());
                distance[r] += (after - before) as f64;
            }
        }

        let action = assigned.assignment_of(robot).cloned().expect("searching robot");
        let SingleAction::Search { container, .. } = &action else {
            unreachable!("the freeing event is a search completion")
        };
        let event = OutcomeEvent {
            robot,
            elapsed,
            outcome: if found { Outcome::ObjectFound } else { Outcome::ObjectNotFound },
            revealed: env.true_contents(*container).clone(),
        };
        b = assigned.apply_outcome(&event)?;
        trace.push(TraceEvent {
            time: b.time(),
            robot,
            action,
            outcome: event.outcome,
            dfa_state: b.dfa_state(),
        });
    };

    Ok(EpisodeResult {
        planner,
        makespan: b.time(),
        distance,
        outcome,
        trace,
        seed: planner_config.seed,
        replans,
    })
}

/// 64-bit FNV-1a, used to fingerprint environments in trial records.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn env_checksum(env: &Environment) -> String {
    format!("{:016x}", fnv1a(env.save().as_bytes()))
}

fn default_team_sizes() -> Vec<usize> {
    vec![2]
}
fn default_sizes() -> Vec<SizeClass> {
    vec![SizeClass::Medium]
}
fn default_trials() -> usize {
    50
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub planners: Vec<PlannerKind>,
    #[serde(default = "default_team_sizes")]
    pub team_sizes: Vec<usize>,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<SizeClass>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub planner: PlannerConfig,
    /// Replan budget override; None keeps 10 × containers.
    #[serde(default)]
    pub budget: Option<usize>,
    /// Likelihood-model file for the CLI to load; campaigns themselves take
    /// the model as an argument.
    #[serde(default)]
    pub model: Option<String>,
}

impl BenchmarkConfig {
    fn validate(&self) -> Result<(), HarnessError> {
        if self.planners.is_empty() {
            return Err(HarnessError::Config("planner list is empty".into()));
        }
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be ≥ 1".into()));
        }
        if self.team_sizes.iter().any(|&n| n == 0) {
            return Err(HarnessError::Config("team sizes must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub size: SizeClass,
    pub robots: usize,
    pub planner: PlannerKind,
    pub time: f64,
    pub distance: f64,
    pub outcome: EpisodeOutcome,
    pub env_checksum: String,
    pub task: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub size: SizeClass,
    pub robots: usize,
    pub planner: PlannerKind,
    pub trials: usize,
    pub completed: usize,
    pub mean_time: f64,
    pub mean_distance: f64,
    /// (baseline − ours) / baseline × 100 against nonlearned-myopic means.
    pub improvement: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
    pub failures: Vec<String>,
}

impl BenchmarkReport {
    pub fn trials_csv(&self) -> String {
        let mut out = String::from("trial,size,robots,planner,time,distance,outcome,env_checksum,task\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.6},{:.6},{},{},\"{}\"\n",
                r.trial, r.size, r.robots, r.planner, r.time, r.distance, r.outcome,
                r.env_checksum, r.task
            ));
        }
        out
    }

    pub fn aggregate_csv(&self) -> String {
        let mut out =
            String::from("size,robots,planner,trials,completed,mean_time,mean_distance,improvement\n");
        for a in &self.aggregates {
            let imp = a.improvement.map(|v| format!("{v:.2}%")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{:.2},{:.2},{}\n",
                a.size, a.robots, a.planner, a.trials, a.completed, a.mean_time,
                a.mean_distance, imp
            ));
        }
        out
    }

    pub fn aggregate_table(&self) -> String {
        let mut out = format!(
            "{:<8} {:>6} {:<18} {:>7} {:>9} {:>11} {:>13} {:>12}\n",
            "size", "robots", "planner", "trials", "completed", "mean time", "mean distance", "improvement"
        );
        for a in &self.aggregates {
            let imp = a.improvement.map(|v| format!("{v:.2}%")).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:<8} {:>6} {:<18} {:>7} {:>9} {:>11.2} {:>13.2} {:>12}\n",
                a.size.to_string(),
                a.robots,
                a.planner.to_string(),
                a.trials,
                a.completed,
                a.mean_time,
                a.mean_distance,
                imp
            ));
        }
        out
    }
}

fn mix_seed(parts: &[u64]) -> u64 {
    let mut bytes = Vec::with_capacity(parts.len() * 8);
    for p in parts {
        bytes.extend_from_slice(&p.to_le_bytes());
    }
    fnv1a(&bytes)
}

/// Run the full campaign: per (size, team, trial), generate one home and
/// task, then run every configured planner on that identical instance.
pub fn run_benchmark(
    config: &BenchmarkConfig,
    model: &dyn LikelihoodModel,
    catalog: &Catalog,
    mut progress: Option<&mut dyn FnMut(&TrialRow)>,
) -> Result<BenchmarkReport, HarnessError> {
    config.validate()?;
    let mut report = BenchmarkReport::default();
    for (si, &size) in config.sizes.iter().enumerate() {
        for &team in &config.team_sizes {
            for trial in 0..config.trials {
                let env_seed = mix_seed(&[config.seed, si as u64, team as u64, trial as u64, 0]);
                let env = match generate(env_seed, size, catalog) {
                    Ok(env) => Arc::new(env),
                    Err(e) => {
                        report.failures.push(format!(
                            "size={size} robots={team} trial={trial}: generation seed {env_seed}: {e}"
                        ));
                        continue;
                    }
                };
                let checksum = env_checksum(&env);
                let task_seed = mix_seed(&[config.seed, si as u64, team as u64, trial as u64, 1]);
                let task = match generate_task(&env, task_seed) {
                    Ok(t) => t,
                    Err(e) => {
                        report.failures.push(format!(
                            "size={size} robots={team} trial={trial}: task seed {task_seed}: {e}"
                        ));
                        continue;
                    }
                };
                let episode_seed =
                    mix_seed(&[config.seed, si as u64, team as u64, trial as u64, 2]);
                for &planner in &config.planners {
                    let pc = PlannerConfig {
                        seed: episode_seed,
                        ..config.planner.clone()
                    };
                    match run_episode(&env, &task, planner, team, model, &pc, config.budget) {
                        Ok(res) => {
                            let row = TrialRow {
                                trial,
                                size,
                                robots: team,
                                planner,
                                time: res.makespan,
                                distance: res.total_distance(),
                                outcome: res.outcome,
                                env_checksum: checksum.clone(),
                                task: task.clone(),
                            };
                            if let Some(cb) = progress.as_deref_mut() {
                                cb(&row);
                            }
                            report.rows.push(row);
                        }
                        Err(e) => report.failures.push(format!(
                            "size={size} robots={team} trial={trial} planner={planner}: {e}"
                        )),
                    }
                }
            }
        }
    }
    report.aggregates = aggregate(&report.rows);
    Ok(report)
}

/// Mean makespan and distance over completed trials per campaign cell, with
/// each planner's improvement against the nonlearned baseline's mean.
pub fn aggregate(rows: &[TrialRow]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<(SizeClass, usize, PlannerKind), Vec<&TrialRow>> = BTreeMap::new();
    for row in rows {
        cells.entry((row.size, row.robots, row.planner)).or_default().push(row);
    }
    let mut aggregates = Vec::new();
    for (&(size, robots, planner), cell) in &cells {
        let completed: Vec<&&TrialRow> = cell
            .iter()
            .filter(|r| r.outcome == EpisodeOutcome::Completed)
            .collect();
        let n = completed.len().max(1) as f64;
        let mean_time = completed.iter().map(|r| r.time).sum::<f64>() / n;
        let mean_distance = completed.iter().map(|r| r.distance).sum::<f64>() / n;
        let improvement = cells
            .get(&(size, robots, PlannerKind::NonlearnedMyopic))
            .filter(|_| planner != PlannerKind::NonlearnedMyopic)
            .map(|base| {
                let done: Vec<f64> = base
                    .iter()
                    .filter(|r| r.outcome == EpisodeOutcome::Completed)
                    .map(|r| r.time)
                    .collect();
                let base_mean = done.iter().sum::<f64>() / done.len().max(1) as f64;
                (base_mean - mean_time) / base_mean * 100.0
            });
        aggregates.push(AggregateRow {
            size,
            robots,
            planner,
            trials: cell.len(),
            completed: completed.len(),
            mean_time,
            mean_distance,
            improvement,
        });
    }
    aggregates
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    use crate::likelihood::FrequencyModel;
    use crate::world::{Cell, Container, ContainerId, GridMap, SkillProfile};

    fn env_one_container() -> Arc<Environment> {
        let map = GridMap::new(8, 3, 0.25).unwrap();
        let containers = vec![Container {
            id: ContainerId(0),
            kind: "bed".into(),
            room: "bedroom".into(),
            cell: Cell(4, 0),
        }];
        let contents: BTreeMap<ContainerId, BTreeSet<String>> =
            [(ContainerId(0), ["block".to_string()].into_iter().collect())]
                .into_iter()
                .collect();
        Arc::new(
            Environment::new(
                map,
                containers,
                vec![Cell(0, 0), Cell(0, 2)],
                SkillProfile::default(),
                contents,
            )
            .unwrap(),
        )
    }

    #[test]
    fn templates_render_the_six_task_shapes() {
        assert_eq!(
            TEMPLATES[0].render(&["pillow", "remote"]),
            "F i-pillow && F i-remote"
        );
        assert_eq!(TEMPLATES[3].render(&["a", "b"]), "(!i-b U i-a) && F i-b");
        assert_eq!(
            TEMPLATES[5].render(&["a", "b", "c", "d"]),
            "((!i-c && !i-d) U i-a || (!i-c && !i-d) U i-b) && (!i-d U i-c) && F i-d"
        );
        for t in &TEMPLATES {
            let names = ["a", "b", "c", "d"];
            let rendered = t.render(&names[..t.arity]);
            let formula = Formula::parse(&rendered).unwrap();
            assert_eq!(formula.atoms().len(), t.arity, "template {}", t.id);
        }
    }

    #[test]
    fn task_generation_is_seeded_and_guarded() {
        let env = env_one_container();
        // One distinct object can fill no template.
        assert!(matches!(
            generate_task(&env, 5),
            Err(HarnessError::TooFewObjects { found: 1, .. })
        ));

        let map = GridMap::new(10, 4, 0.25).unwrap();
        let containers: Vec<Container> = (0..2)
            .map(|i| Container {
                id: ContainerId(i),
                kind: "bed".into(),
                room: "bedroom".into(),
                cell: Cell(3 + 3 * i as i32, 1),
            })
            .collect();
        let contents: BTreeMap<ContainerId, BTreeSet<String>> = [
            (
                ContainerId(0),
                ["pillow", "remote", "book"].iter().map(|s| s.to_string()).collect(),
            ),
            (
                ContainerId(1),
                ["fork", "plate"].iter().map(|s| s.to_string()).collect(),
            ),
        ]
        .into_iter()
        .collect();
        let env = Arc::new(
            Environment::new(map, containers, vec![Cell(0, 0)], SkillProfile::default(), contents)
                .unwrap(),
        );
        let task = generate_task(&env, 42).unwrap();
        assert_eq!(task, generate_task(&env, 42).unwrap());
        let formula = Formula::parse(&task).unwrap();
        for atom in formula.atoms() {
            assert_eq!(atom.skill(), "i");
            assert!(env.all_objects().contains(atom.object()));
        }
    }

    #[test]
    fn forced_trajectory_times_add_up() {
        // Approach at 3 moves, search 0, interact 5 → makespan 8.
        let env = env_one_container();
        let model = FrequencyModel::new(1.0, 0.01);
        let res = run_episode(
            &env,
            "F i-block",
            PlannerKind::NonlearnedMyopic,
            1,
            &model,
            &PlannerConfig::default(),
            None,
        )
        .unwrap();
        assert_eq!(res.outcome, EpisodeOutcome::Completed);
        assert!((res.makespan - 8.0).abs() < 1e-9);
        assert_eq!(res.distance, vec![3.0]);
        assert_eq!(res.trace.len(), 1);
        assert_eq!(res.replans, 1);
        assert!(res.trace[0].to_string().starts_with("t=8.000000 robot=0"));
    }

    #[test]
    fn impossible_tasks_surface_as_unsatisfiable() {
        let env = env_one_container();
        let model = FrequencyModel::new(1.0, 0.01);
        let res = run_episode(
            &env,
            "F i-ghost",
            PlannerKind::NonlearnedMyopic,
            1,
            &model,
            &PlannerConfig::default(),
            None,
        )
        .unwrap();
        assert_eq!(res.outcome, EpisodeOutcome::Unsatisfiable);
        assert_eq!(res.trace.len(), 1, "one failed search resolves the home");
    }

    #[test]
    fn identical_seeds_render_identical_traces() {
        let env = env_one_container();
        let model = FrequencyModel::new(1.0, 0.01);
        let config = PlannerConfig {
            samples: 128,
            seed: 9,
            ..PlannerConfig::default()
        };
        let task = "F i-block";
        let one = run_episode(&env, task, PlannerKind::MrPouct, 2, &model, &config, None).unwrap();
        let two = run_episode(&env, task, PlannerKind::MrPouct, 2, &model, &config, None).unwrap();
        assert_eq!(one.render_trace(task), two.render_trace(task));
    }

    #[test]
    fn fnv1a_matches_reference_vectors() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn benchmark_pairs_planners_on_identical_instances() {
        let config = BenchmarkConfig {
            planners: vec![PlannerKind::NonlearnedMyopic, PlannerKind::LearnedMyopic],
            team_sizes: vec![2],
            sizes: vec![SizeClass::Small],
            trials: 2,
            seed: 71,
            planner: PlannerConfig::default(),
            budget: None,
            model: None,
        };
        let catalog = Catalog::bundled();
        let model = FrequencyModel::new(1.0, 0.01);
        let report = run_benchmark(&config, &model, &catalog, None).unwrap();
        assert!(report.failures.is_empty(), "failures: {:?}", report.failures);
        assert_eq!(report.rows.len(), 4);
        for trial in 0..2 {
            let pair: Vec<&TrialRow> =
                report.rows.iter().filter(|r| r.trial == trial).collect();
            assert_eq!(pair.len(), 2);
            assert_eq!(pair[0].env_checksum, pair[1].env_checksum);
            assert_eq!(pair[0].task, pair[1].task);
        }
        assert_eq!(report.aggregates.len(), 2);
        let csv = report.trials_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("trial,size,robots,planner,"));
        let imp = report
            .aggregates
            .iter()
            .find(|a| a.planner == PlannerKind::LearnedMyopic)
            .unwrap()
            .improvement;
        assert!(imp.is_some());
    }
}
