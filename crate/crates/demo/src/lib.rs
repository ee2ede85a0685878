//! JSON facade over the engine for the browser demo.
//!
//! Three operations back the static page in `www/`: compile a task formula
//! and inspect the automaton, generate a home to draw, and run a full
//! episode to replay. Each returns a JSON string so the JavaScript side
//! stays a thin canvas renderer. The same functions are plain Rust here and
//! are exported one-to-one under `wasm32` via `wasm-bindgen`.

use std::str::FromStr;
use std::sync::Arc;

use serde_json::{json, Value};

use taskweave::harness::{env_checksum, generate_task, run_episode, PlannerKind};
use taskweave::likelihood::FrequencyModel;
use taskweave::planner::PlannerConfig;
use taskweave::scltl::{Dfa, Formula};
use taskweave::world::{generate, Catalog, Environment, SizeClass};

/// Compile a task formula and describe the automaton: states with labels,
/// acceptance, per-state relevant words and distance to acceptance, the
/// full transition table, and Graphviz source.
pub fn dfa_json(formula: &str) -> Result<String, String> {
    let parsed = Formula::parse(formula).map_err(|e| e.to_string())?;
    let alphabet: Vec<_> = parsed.atoms().into_iter().collect();
    let dfa = Dfa::compile(&parsed, &alphabet).map_err(|e| e.to_string())?;

    let states: Vec<Value> = (0..dfa.num_states())
        .map(|z| {
            let relevant: Vec<String> =
                dfa.relevant_words(z).iter().map(|w| w.to_string()).collect();
            let transitions: Vec<Value> = dfa
                .transitions_from(z)
                .map(|(w, to)| json!({ "word": w.to_string(), "to": to }))
                .collect();
            json!({
                "id": z,
                "label": dfa.label(z),
                "accepting": dfa.is_accepting(z),
                "sink": dfa.is_sink(z),
                "relevant": relevant,
                "distance_to_accept": dfa.distance_to_accept(z).ok(),
                "transitions": transitions,
            })
        })
        .collect();

    let out = json!({
        "formula": formula,
        "alphabet": alphabet.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "initial": dfa.initial(),
        "num_states": dfa.num_states(),
        "live_states": dfa.num_states() - usize::from(dfa.sink().is_some()),
        "states": states,
        "dot": dfa.to_dot(),
    });
    Ok(out.to_string())
}

fn parse_size(size: &str) -> Result<SizeClass, String> {
    SizeClass::from_str(size).map_err(|e| e.to_string())
}

fn make_env(seed: u64, size: SizeClass) -> Result<Environment, String> {
    generate(seed, size, &Catalog::bundled()).map_err(|e| e.to_string())
}

/// What the page may know about a home before anyone searches it: geometry,
/// containers, and robot starts — never the hidden contents.
fn env_view(env: &Environment) -> Value {
    let map = env.map();
    let blocked: Vec<[i32; 2]> = map.blocked_cells().iter().map(|c| [c.x(), c.y()]).collect();
    let containers: Vec<Value> = env
        .containers()
        .iter()
        .map(|c| {
            json!({
                "id": c.id.0,
                "kind": c.kind,
                "room": c.room,
                "cell": [c.cell.x(), c.cell.y()],
            })
        })
        .collect();
    let starts: Vec<[i32; 2]> = env.robot_starts().iter().map(|c| [c.x(), c.y()]).collect();
    json!({
        "width": map.width(),
        "height": map.height(),
        "cell_size": map.cell_size(),
        "area_m2": map.area_m2(),
        "size_class": env.size_class().to_string(),
        "blocked": blocked,
        "containers": containers,
        "robot_starts": starts,
        "checksum": env_checksum(env),
    })
}

/// Generate a home and return its drawable view.
pub fn home_json(seed: u64, size: &str) -> Result<String, String> {
    let env = make_env(seed, parse_size(size)?)?;
    Ok(env_view(&env).to_string())
}

/// Generate a home, draw a task for it, train the presence-frequency model
/// on forty other homes of the same size, run one episode, and return the
/// view plus the resolved trace for replay.
pub fn episode_json(
    env_seed: u64,
    size: &str,
    task_seed: u64,
    planner: &str,
    robots: usize,
    seed: u64,
    samples: usize,
) -> Result<String, String> {
    let size = parse_size(size)?;
    let planner = PlannerKind::from_str(planner).map_err(|e| e.to_string())?;
    if robots == 0 || robots > 4 {
        return Err("robots must be between 1 and 4".into());
    }
    if samples == 0 || samples > 200_000 {
        return Err("samples must be between 1 and 200000".into());
    }

    let env = Arc::new(make_env(env_seed, size)?);
    let task = generate_task(&env, task_seed).map_err(|e| e.to_string())?;

    let training: Result<Vec<Environment>, String> =
        (100..140).map(|s| make_env(s, size)).collect();
    let model = FrequencyModel::train(&training?);

    let config = PlannerConfig {
        samples,
        c: 0.5,
        depth: 30,
        seed,
    };
    let episode = run_episode(&env, &task, planner, robots, &model, &config, None)
        .map_err(|e| e.to_string())?;

    let events: Vec<Value> = episode
        .trace
        .iter()
        .map(|ev| {
            let (container, word) = match &ev.action {
                taskweave::belief::SingleAction::Search { container, word } => {
                    let cell = env
                        .containers()
                        .iter()
                        .find(|c| c.id == *container)
                        .map(|c| [c.cell.x(), c.cell.y()]);
                    (
                        json!({ "id": container.0, "cell": cell }),
                        Value::String(word.to_string()),
                    )
                }
                taskweave::belief::SingleAction::Wait => (Value::Null, Value::Null),
            };
            json!({
                "time": ev.time,
                "robot": ev.robot,
                "action": ev.action.to_string(),
                "container": container,
                "word": word,
                "outcome": ev.outcome.to_string(),
                "dfa_state": ev.dfa_state,
            })
        })
        .collect();

    let out = json!({
        "env": env_view(&env),
        "task": task,
        "planner": episode.planner.to_string(),
        "robots": robots,
        "seed": episode.seed,
        "outcome": episode.outcome.to_string(),
        "makespan": episode.makespan,
        "distance": episode.distance,
        "total_distance": episode.total_distance(),
        "replans": episode.replans,
        "events": events,
        "trace_text": episode.render_trace(&task),
    });
    Ok(out.to_string())
}

#[cfg(target_arch = "wasm32")]
mod wasm {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen]
    pub fn dfa_json(formula: &str) -> Result<String, JsError> {
        super::dfa_json(formula).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen]
    pub fn home_json(seed: u64, size: &str) -> Result<String, JsError> {
        super::home_json(seed, size).map_err(|e| JsError::new(&e))
    }

    #[allow(clippy::too_many_arguments)]
    #[wasm_bindgen]
    pub fn episode_json(
        env_seed: u64,
        size: &str,
        task_seed: u64,
        planner: &str,
        robots: usize,
        seed: u64,
        samples: usize,
    ) -> Result<String, JsError> {
        super::episode_json(env_seed, size, task_seed, planner, robots, seed, samples)
            .map_err(|e| JsError::new(&e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dfa_json_describes_the_two_errand_conjunction() {
        let text = dfa_json("F pick-remote && F pick-pillow").unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["live_states"], 4);
        assert_eq!(v["alphabet"].as_array().unwrap().len(), 2);
        let states = v["states"].as_array().unwrap();
        assert_eq!(
            states.iter().filter(|s| s["accepting"] == true).count(),
            1
        );
        assert!(v["dot"].as_str().unwrap().starts_with("digraph"));
    }

    #[test]
    fn dfa_json_rejects_garbage() {
        assert!(dfa_json("F &&").is_err());
        assert!(dfa_json("").is_err());
    }

    #[test]
    fn home_json_is_deterministic_and_seals_contents() {
        let a = home_json(3, "small").unwrap();
        let b = home_json(3, "small").unwrap();
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["size_class"], "small");
        assert_eq!(v["containers"].as_array().unwrap().len(), 4);
        assert!(v["checksum"].as_str().unwrap().len() == 16);
        // The pre-search view must not leak what is inside any container.
        assert!(!a.contains("contents"));
        assert!(home_json(3, "gigantic").is_err());
    }

    #[test]
    fn episode_json_replays_a_full_run() {
        let text = episode_json(3, "small", 5, "learned-myopic", 2, 9, 64).unwrap();
        let again = episode_json(3, "small", 5, "learned-myopic", 2, 9, 64).unwrap();
        assert_eq!(text, again);

        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["planner"], "learned-myopic");
        assert!(!v["events"].as_array().unwrap().is_empty());
        assert!(v["makespan"].as_f64().unwrap() > 0.0);
        assert!(v["trace_text"].as_str().unwrap().starts_with("# task: "));
        for ev in v["events"].as_array().unwrap() {
            if ev["action"] != "wait" {
                assert!(ev["container"]["cell"].is_array());
            }
        }

        assert!(episode_json(3, "small", 5, "psychic", 2, 9, 64).is_err());
        assert!(episode_json(3, "small", 5, "mr-pouct", 0, 9, 64).is_err());
    }
}
