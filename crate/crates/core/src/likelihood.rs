//! Object-location likelihoods.
//!
//! Planners never see ground-truth contents; they query a model for
//! P(object present in container). The trained [`FrequencyModel`] pools
//! observations by (container kind, room type); the [`OracleModel`] wraps
//! ground truth (optionally blurred) for upper-bound comparisons.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{Container, Environment};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model schema error: {0}")]
    Schema(String),
}

pub trait LikelihoodModel {
    /// P(`object` is inside `container`), in (0, 1) unless ground truth is
    /// certain.
    fn estimate(&self, object: &str, container: &Container) -> f64;

    /// Objects the model has evidence about; task words should draw from
    /// this set.
    fn vocabulary(&self) -> &BTreeSet<String>;
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct PairCounts {
    /// Containers of this (kind, room) observed.
    total: u32,
    /// Per-object presence counts; absent object means zero.
    objects: BTreeMap<String, u32>,
}

/// Add-one-smoothed presence frequencies keyed by (kind, room).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyModel {
    alpha: f64,
    epsilon: f64,
    counts: BTreeMap<String, BTreeMap<String, PairCounts>>,
    vocabulary: BTreeSet<String>,
}

impl FrequencyModel {
    pub const DEFAULT_ALPHA: f64 = 1.0;
    pub const DEFAULT_EPSILON: f64 = 0.01;

    pub fn new(alpha: f64, epsilon: f64) -> FrequencyModel {
        assert!(alpha > 0.0, "smoothing must be positive");
        assert!((0.0..0.5).contains(&epsilon), "clamp must sit below 1/2");
        FrequencyModel {
            alpha,
            epsilon,
            counts: BTreeMap::new(),
            vocabulary: BTreeSet::new(),
        }
    }

    /// Record one opened container of `kind` in `room` holding `contents`.
    pub fn observe(&mut self, kind: &str, room: &str, contents: &BTreeSet<String>) {
        let pair = self
            .counts
            .entry(kind.to_string())
            .or_default()
            .entry(room.to_string())
            .or_default();
        pair.total += 1;
        for obj in contents {
            *pair.objects.entry(obj.clone()).or_insert(0) += 1;
            self.vocabulary.insert(obj.clone());
        }
    }

    /// Train from fully known homes (every container counts as observed).
    pub fn train(envs: &[Environment]) -> FrequencyModel {
        let mut model = FrequencyModel::new(Self::DEFAULT_ALPHA, Self::DEFAULT_EPSILON);
        for env in envs {
            for c in env.containers() {
                model.observe(&c.kind, &c.room, env.true_contents(c.id));
            }
        }
        model
    }

    fn raw(&self, object: &str, kind: &str, room: &str) -> f64 {
        let (present, total) = self
            .counts
            .get(kind)
            .and_then(|rooms| rooms.get(room))
            .map(|pc| (pc.objects.get(object).copied().unwrap_or(0), pc.total))
            .unwrap_or((0, 0));
        (f64::from(present) + self.alpha) / (f64::from(total) + 2.0 * self.alpha)
    }

    pub fn save(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn load(text: &str) -> Result<FrequencyModel, ModelError> {
        let model: FrequencyModel =
            serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
        if !(model.alpha > 0.0) || !(0.0..0.5).contains(&model.epsilon) {
            return Err(ModelError::Schema(format!(
                "bad hyperparameters alpha={} epsilon={}",
                model.alpha, model.epsilon
            )));
        }
        Ok(model)
    }
}

impl LikelihoodModel for FrequencyModel {
    fn estimate(&self, object: &str, container: &Container) -> f64 {
        self.raw(object, &container.kind, &container.room)
            .clamp(self.epsilon, 1.0 - self.epsilon)
    }

    fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }
}

/// Ground-truth likelihoods for one specific home, blurred toward a coin
/// flip by `noise` (0 = perfect knowledge, 1 = uninformative).
#[derive(Debug, Clone)]
pub struct OracleModel {
    contents: BTreeMap<crate::world::ContainerId, BTreeSet<String>>,
    vocabulary: BTreeSet<String>,
    noise: f64,
}

impl OracleModel {
    pub fn from_env(env: &Environment, noise: f64) -> OracleModel {
        assert!((0.0..=1.0).contains(&noise));
        let contents: BTreeMap<_, _> = env
            .containers()
            .iter()
            .map(|c| (c.id, env.true_contents(c.id).clone()))
            .collect();
        OracleModel {
            vocabulary: contents.values().flatten().cloned().collect(),
            contents,
            noise,
        }
    }
}

impl LikelihoodModel for OracleModel {
    fn estimate(&self, object: &str, container: &Container) -> f64 {
        let present = self
            .contents
            .get(&container.id)
            .is_some_and(|objs| objs.contains(object));
        let p = if present { 1.0 } else { 0.0 };
        (1.0 - self.noise) * p + self.noise * 0.5
    }

    fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }
}
