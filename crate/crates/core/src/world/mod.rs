//! The known world: occupancy map, containers, robots, and skill timings.
//!
//! Ground-truth container contents are carried by the [`Environment`] but
//! sealed off from planners: only the crate's execution/training code reads
//! them, planners see likelihoods and search history exclusively. Documents
//! produced by [`Environment::save`] do include contents (they are the
//! on-disk ground truth).

mod generate;
mod grid;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate, Catalog, PriorEntry};
pub use grid::{Cell, GridMap, DIRECTIONS};

use grid::DistField;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("endpoint {0:?} is blocked or out of bounds")]
    BlockedEndpoint(Cell),
    #[error("no path from {from:?} to {to:?}")]
    Unreachable { from: Cell, to: Cell },
    #[error("unknown container id {0}")]
    UnknownContainer(ContainerId),
    #[error("container {0} is unreachable from {1:?}")]
    UnreachableContainer(ContainerId, Cell),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("environment generation failed for seed {seed} after {attempts} attempts")]
    GenerationFailed { seed: u64, attempts: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContainerId(pub u32);

impl fmt::Display for ContainerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeClass {
    Small,
    Medium,
    Large,
}

impl SizeClass {
    pub const ALL: [SizeClass; 3] = [SizeClass::Small, SizeClass::Medium, SizeClass::Large];
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SizeClass::Small => "small",
            SizeClass::Medium => "medium",
            SizeClass::Large => "large",
        })
    }
}

impl std::str::FromStr for SizeClass {
    type Err = WorldError;
    fn from_str(s: &str) -> Result<SizeClass, WorldError> {
        match s {
            "small" => Ok(SizeClass::Small),
            "medium" => Ok(SizeClass::Medium),
            "large" => Ok(SizeClass::Large),
            other => Err(WorldError::Schema(format!(
                "unknown size class {other:?} (expected small|medium|large)"
            ))),
        }
    }
}

/// Floor-area thresholds: under 60 m² small, 60–110 m² medium, above large.
pub fn classify_size(area_m2: f64) -> SizeClass {
    if area_m2 < 60.0 {
        SizeClass::Small
    } else if area_m2 <= 110.0 {
        SizeClass::Medium
    } else {
        SizeClass::Large
    }
}

/// A known furniture location that may hold objects. The cell itself is free
/// floor; robots interact from an adjacent free cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub id: ContainerId,
    pub kind: String,
    pub room: String,
    pub cell: Cell,
}

/// Robot motion/interaction timing. Durations are in simulation time-units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillProfile {
    /// Cells traversed per time-unit.
    pub speed: f64,
    /// Time to search a container on arrival (the failure branch frees the
    /// robot after travel plus this).
    pub search_duration: f64,
    /// Per-skill interaction durations; skills not listed take
    /// [`SkillProfile::DEFAULT_INTERACT`].
    pub interact: BTreeMap<String, f64>,
}

impl SkillProfile {
    pub const DEFAULT_INTERACT: f64 = 5.0;

    pub fn interact_duration(&self, skill: &str) -> f64 {
        self.interact
            .get(skill)
            .copied()
            .unwrap_or(Self::DEFAULT_INTERACT)
    }

    /// Lower bound over every possible skill (listed or defaulted).
    pub fn min_interact_duration(&self) -> f64 {
        self.interact
            .values()
            .fold(Self::DEFAULT_INTERACT, |acc, &d| acc.min(d))
    }

    fn validate(&self) -> Result<(), WorldError> {
        if !(self.speed > 0.0) {
            return Err(WorldError::Invariant(format!(
                "speed must be positive, got {}",
                self.speed
            )));
        }
        if !(self.search_duration >= 0.0) {
            return Err(WorldError::Invariant("search_duration must be >= 0".into()));
        }
        if let Some((skill, &d)) = self.interact.iter().find(|(_, &d)| !(d >= 0.0)) {
            return Err(WorldError::Invariant(format!(
                "interact duration for `{skill}` must be >= 0, got {d}"
            )));
        }
        Ok(())
    }
}

impl Default for SkillProfile {
    fn default() -> SkillProfile {
        SkillProfile {
            speed: 1.0,
            search_duration: 0.0,
            interact: BTreeMap::new(),
        }
    }
}

/// Immutable world model shared by the simulator and all planners.
#[derive(Debug, Clone)]
pub struct Environment {
    map: GridMap,
    containers: Vec<Container>,
    robot_starts: Vec<Cell>,
    skills: SkillProfile,
    /// Ground truth, sealed: in-crate execution/training code only.
    contents: BTreeMap<ContainerId, BTreeSet<String>>,
    /// Per-container BFS field from its approach cells (index-aligned with
    /// `containers`), giving O(1) travel queries from any free cell.
    nav: Vec<DistField>,
    index_of: BTreeMap<ContainerId, usize>,
}

impl Environment {
    pub fn new(
        map: GridMap,
        containers: Vec<Container>,
        robot_starts: Vec<Cell>,
        skills: SkillProfile,
        contents: BTreeMap<ContainerId, BTreeSet<String>>,
    ) -> Result<Environment, WorldError> {
        skills.validate()?;
        if robot_starts.is_empty() {
            return Err(WorldError::Invariant("at least one robot start required".into()));
        }
        for &s in &robot_starts {
            if !map.is_free(s) {
                return Err(WorldError::Invariant(format!(
                    "robot start {s:?} is blocked or out of bounds"
                )));
            }
        }
        let mut index_of = BTreeMap::new();
        for (i, c) in containers.iter().enumerate() {
            if index_of.insert(c.id, i).is_some() {
                return Err(WorldError::Invariant(format!(
                    "duplicate container id {}",
                    c.id
                )));
            }
            if !map.in_bounds(c.cell) {
                return Err(WorldError::Invariant(format!(
                    "container {} at {:?} is out of bounds",
                    c.id, c.cell
                )));
            }
            if !map.is_free(c.cell) {
                return Err(WorldError::Invariant(format!(
                    "container {} sits on blocked cell {:?}",
                    c.id, c.cell
                )));
            }
        }
        for id in contents.keys() {
            if !index_of.contains_key(id) {
                return Err(WorldError::Invariant(format!(
                    "contents listed for unknown container id {id}"
                )));
            }
        }
        let nav: Vec<DistField> = containers
            .iter()
            .map(|c| map.bfs_field(&approach_cells(&map, c.cell)))
            .collect();
        for (i, c) in containers.iter().enumerate() {
            if approach_cells(&map, c.cell).is_empty() {
                return Err(WorldError::Invariant(format!(
                    "container {} at {:?} has no adjacent free cell",
                    c.id, c.cell
                )));
            }
            for &s in &robot_starts {
                if nav[i].distance(&map, s).is_none() {
                    return Err(WorldError::Invariant(format!(
                        "container {} is not reachable from robot start {s:?}",
                        c.id
                    )));
                }
            }
        }
        let mut contents = contents;
        for c in &containers {
            contents.entry(c.id).or_default();
        }
        Ok(Environment {
            map,
            containers,
            robot_starts,
            skills,
            contents,
            nav,
            index_of,
        })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn containers(&self) -> &[Container] {
        &self.containers
    }

    pub fn container(&self, id: ContainerId) -> Result<&Container, WorldError> {
        self.index_of
            .get(&id)
            .map(|&i| &self.containers[i])
            .ok_or(WorldError::UnknownContainer(id))
    }

    pub fn robot_starts(&self) -> &[Cell] {
        &self.robot_starts
    }

    pub fn skills(&self) -> &SkillProfile {
        &self.skills
    }

    pub fn size_class(&self) -> SizeClass {
        classify_size(self.map.area_m2())
    }

    /// Travel time from `from` to the nearest approach cell of `id`.
    pub fn travel_time(&self, from: Cell, id: ContainerId) -> Result<f64, WorldError> {
        let i = *self
            .index_of
            .get(&id)
            .ok_or(WorldError::UnknownContainer(id))?;
        let d = self.nav[i]
            .distance(&self.map, from)
            .ok_or(WorldError::UnreachableContainer(id, from))?;
        Ok(f64::from(d) / self.skills.speed)
    }

    /// Committed shortest path from `from` to the nearest approach cell of
    /// `id` (both ends included; a single cell when already adjacent).
    pub fn approach_path(&self, from: Cell, id: ContainerId) -> Result<Vec<Cell>, WorldError> {
        let i = *self
            .index_of
            .get(&id)
            .ok_or(WorldError::UnknownContainer(id))?;
        self.nav[i]
            .path_from(&self.map, from)
            .ok_or(WorldError::UnreachableContainer(id, from))
    }

    /// Ground-truth contents. Sealed: callable only inside the crate, by the
    /// harness's outcome resolver, the likelihood trainer, and the generator.
    pub(crate) fn true_contents(&self, id: ContainerId) -> &BTreeSet<String> {
        &self.contents[&id]
    }

    /// Distinct object tokens present anywhere (ground truth; sealed).
    pub(crate) fn all_objects(&self) -> BTreeSet<String> {
        self.contents.values().flatten().cloned().collect()
    }

    pub fn save(&self) -> String {
        let doc = EnvDoc {
            map: MapDoc {
                width: self.map.width(),
                height: self.map.height(),
                cell_size: self.map.cell_size(),
                blocked: self.map.blocked_cells(),
            },
            containers: self
                .containers
                .iter()
                .map(|c| ContainerDoc {
                    id: c.id,
                    kind: c.kind.clone(),
                    room: c.room.clone(),
                    cell: c.cell,
                    contents: self.contents[&c.id].iter().cloned().collect(),
                })
                .collect(),
            robot_starts: self.robot_starts.clone(),
            skills: self.skills.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("environment document serializes")
    }

    pub fn load(text: &str) -> Result<Environment, WorldError> {
        let doc: EnvDoc =
            serde_json::from_str(text).map_err(|e| WorldError::Schema(e.to_string()))?;
        let mut map = GridMap::new(doc.map.width, doc.map.height, doc.map.cell_size)?;
        for b in doc.map.blocked {
            if !map.in_bounds(b) {
                return Err(WorldError::Invariant(format!(
                    "blocked cell {b:?} is out of bounds"
                )));
            }
            map.set_blocked(b, true);
        }
        let mut containers = Vec::new();
        let mut contents = BTreeMap::new();
        for c in doc.containers {
            containers.push(Container {
                id: c.id,
                kind: c.kind,
                room: c.room,
                cell: c.cell,
            });
            contents.insert(c.id, c.contents.into_iter().collect());
        }
        Environment::new(map, containers, doc.robot_starts, doc.skills, contents)
    }
}

impl PartialEq for Environment {
    fn eq(&self, other: &Environment) -> bool {
        self.map == other.map
            && self.containers == other.containers
            && self.robot_starts == other.robot_starts
            && self.skills == other.skills
            && self.contents == other.contents
    }
}

/// Free cells from which a container at `cell` can be searched: its free
/// 4-neighbors, in fixed direction order.
pub fn approach_cells(map: &GridMap, cell: Cell) -> Vec<Cell> {
    DIRECTIONS
        .iter()
        .map(|(dx, dy)| Cell(cell.0 + dx, cell.1 + dy))
        .filter(|&c| map.is_free(c))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct EnvDoc {
    map: MapDoc,
    containers: Vec<ContainerDoc>,
    robot_starts: Vec<Cell>,
    skills: SkillProfile,
}

#[derive(Serialize, Deserialize)]
struct MapDoc {
    width: i32,
    height: i32,
    cell_size: f64,
    blocked: Vec<Cell>,
}

#[derive(Serialize, Deserialize)]
struct ContainerDoc {
    id: ContainerId,
    kind: String,
    room: String,
    cell: Cell,
    contents: Vec<String>,
}
