//! Procedural home generation: BSP room splits, furniture placement, and
//! object seeding from a prior catalog.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    approach_cells, Cell, Container, ContainerId, Environment, GridMap, SizeClass, SkillProfile,
    WorldError,
};

/// One row of placement knowledge: how likely `object` is to be found in a
/// container of `kind` standing in a room of type `room`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorEntry {
    pub object: String,
    pub kind: String,
    pub room: String,
    pub weight: f64,
}

/// Placement priors used both to seed generated homes and as the universe of
/// container kinds and room types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub priors: Vec<PriorEntry>,
}

impl Catalog {
    pub fn parse(text: &str) -> Result<Catalog, WorldError> {
        let catalog: Catalog =
            serde_json::from_str(text).map_err(|e| WorldError::Schema(e.to_string()))?;
        catalog.validate()?;
        Ok(catalog)
    }

    /// The catalog bundled with the binary.
    pub fn bundled() -> Catalog {
        Catalog::parse(include_str!("../../assets/default_catalog.json"))
            .expect("bundled catalog is valid")
    }

    fn validate(&self) -> Result<(), WorldError> {
        if self.priors.is_empty() {
            return Err(WorldError::Schema("catalog has no prior entries".into()));
        }
        let mut seen = BTreeSet::new();
        for p in &self.priors {
            for (field, value) in [("object", &p.object), ("kind", &p.kind), ("room", &p.room)] {
                let mut chars = value.chars();
                let ok = chars.next().is_some_and(|c| c.is_ascii_lowercase())
                    && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit());
                if !ok {
                    return Err(WorldError::Schema(format!(
                        "catalog {field} {value:?} must be lowercase alphanumeric"
                    )));
                }
            }
            if !(0.0..=1.0).contains(&p.weight) {
                return Err(WorldError::Schema(format!(
                    "weight {} for {}/{}/{} outside [0, 1]",
                    p.weight, p.object, p.kind, p.room
                )));
            }
            if !seen.insert((&p.object, &p.kind, &p.room)) {
                return Err(WorldError::Schema(format!(
                    "duplicate catalog entry {}/{}/{}",
                    p.object, p.kind, p.room
                )));
            }
        }
        Ok(())
    }

    /// Container kinds that may stand in a room of the given type, sorted.
    pub fn kinds_in_room(&self, room: &str) -> Vec<&str> {
        let set: BTreeSet<&str> = self
            .priors
            .iter()
            .filter(|p| p.room == room)
            .map(|p| p.kind.as_str())
            .collect();
        set.into_iter().collect()
    }

    /// All room types mentioned anywhere, sorted.
    pub fn rooms(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.priors.iter().map(|p| p.room.as_str()).collect();
        set.into_iter().collect()
    }

    fn entries_for<'a>(&'a self, kind: &'a str, room: &'a str) -> impl Iterator<Item = &'a PriorEntry> {
        self.priors
            .iter()
            .filter(move |p| p.kind == kind && p.room == room)
    }
}

const MIN_ROOM_SIDE: i32 = 6;
const DOOR_WIDTH: i32 = 2;
const ROBOT_STARTS: usize = 3;
const MIN_START_SEPARATION: i32 = 4;
const MIN_DISTINCT_OBJECTS: usize = 6;
const MAX_ATTEMPTS: u32 = 32;

/// Per size class: (side length range, room count, container count).
fn class_params(size: SizeClass) -> (std::ops::RangeInclusive<i32>, usize, usize) {
    match size {
        SizeClass::Small => (26..=30, 2, 4),
        SizeClass::Medium => (38..=41, 4, 8),
        SizeClass::Large => (44..=50, 6, 14),
    }
}

fn room_types(size: SizeClass) -> Vec<&'static str> {
    match size {
        SizeClass::Small => vec!["bedroom", "livingroom"],
        SizeClass::Medium => vec!["bedroom", "livingroom", "kitchen", "bathroom"],
        SizeClass::Large => vec![
            "bedroom",
            "livingroom",
            "kitchen",
            "bathroom",
            "office",
            "bedroom",
        ],
    }
}

/// Axis-aligned interior region, inclusive on both corners.
#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: i32,
    y0: i32,
    x1: i32,
    y1: i32,
}

impl Rect {
    fn width(&self) -> i32 {
        self.x1 - self.x0 + 1
    }
    fn height(&self) -> i32 {
        self.y1 - self.y0 + 1
    }
    fn area(&self) -> i64 {
        i64::from(self.width()) * i64::from(self.height())
    }
    fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.y0..=self.y1).flat_map(|y| (self.x0..=self.x1).map(move |x| Cell(x, y)))
    }
}

/// Builds a home of the requested size. Deterministic in `seed`; retries
/// internally (with derived sub-seeds) when a sampled layout cannot satisfy
/// the invariants, so equal seeds always yield byte-identical environments.
pub fn generate(seed: u64, size: SizeClass, catalog: &Catalog) -> Result<Environment, WorldError> {
    catalog.validate()?;
    for attempt in 0..MAX_ATTEMPTS {
        let sub = seed.wrapping_add(u64::from(attempt).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(sub);
        if let Some(env) = try_generate(&mut rng, size, catalog) {
            return Ok(env);
        }
    }
    Err(WorldError::GenerationFailed {
        seed,
        attempts: MAX_ATTEMPTS,
    })
}

fn try_generate(rng: &mut ChaCha8Rng, size: SizeClass, catalog: &Catalog) -> Option<Environment> {
    let (side_range, room_count, container_count) = class_params(size);
    let width = rng.random_range(side_range.clone());
    let height = rng.random_range(side_range);
    let mut map = GridMap::new(width, height, 0.25).expect("positive dimensions");

    let rooms = split_rooms(
        rng,
        &mut map,
        Rect {
            x0: 0,
            y0: 0,
            x1: width - 1,
            y1: height - 1,
        },
        room_count,
    )?;

    let mut types = room_types(size);
    shuffle(rng, &mut types);

    let mut containers: Vec<Container> = Vec::new();
    let mut used_cells: BTreeSet<Cell> = BTreeSet::new();
    for i in 0..container_count {
        let room_idx = i % rooms.len();
        let room = types[room_idx];
        let kinds = catalog.kinds_in_room(room);
        if kinds.is_empty() {
            return None;
        }
        let taken: BTreeSet<&str> = containers
            .iter()
            .filter(|c| c.room == room)
            .map(|c| c.kind.as_str())
            .collect();
        let fresh: Vec<&str> = kinds.iter().copied().filter(|k| !taken.contains(k)).collect();
        let pool = if fresh.is_empty() { &kinds } else { &fresh };
        let kind = pool[rng.random_range(0..pool.len())];

        let candidates: Vec<Cell> = rooms[room_idx]
            .cells()
            .filter(|&c| map.is_free(c) && !used_cells.contains(&c))
            .filter(|&c| !approach_cells(&map, c).is_empty())
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let cell = candidates[rng.random_range(0..candidates.len())];
        used_cells.insert(cell);
        containers.push(Container {
            id: ContainerId(i as u32),
            kind: kind.to_string(),
            room: room.to_string(),
            cell,
        });
    }

    let starts = place_starts(rng, &map, &used_cells)?;
    let contents = seed_contents(rng, catalog, &containers)?;

    Environment::new(map, containers, starts, SkillProfile::default(), contents).ok()
}

/// Recursively partitions `full` into `target` rooms, drawing one-cell walls
/// with two-cell doorways. Free space stays connected: every wall gets a
/// door, and walls never cross an existing door because each split stays
/// inside a single sub-rectangle.
fn split_rooms(
    rng: &mut ChaCha8Rng,
    map: &mut GridMap,
    full: Rect,
    target: usize,
) -> Option<Vec<Rect>> {
    let mut rects = vec![full];
    while rects.len() < target {
        // Split the largest splittable rect.
        let mut order: Vec<usize> = (0..rects.len()).collect();
        order.sort_by_key(|&i| (-rects[i].area(), rects[i].y0, rects[i].x0));
        let idx = *order.iter().find(|&&i| splittable(rects[i]))?;
        let r = rects.remove(idx);
        let vertical = if r.width() != r.height() {
            r.width() > r.height()
        } else {
            rng.random()
        };
        if vertical {
            let wx = rng.random_range(r.x0 + MIN_ROOM_SIDE..=r.x1 - MIN_ROOM_SIDE);
            for y in r.y0..=r.y1 {
                map.set_blocked(Cell(wx, y), true);
            }
            let dy = rng.random_range(r.y0..=r.y1 - (DOOR_WIDTH - 1));
            for d in 0..DOOR_WIDTH {
                map.set_blocked(Cell(wx, dy + d), false);
            }
            rects.push(Rect { x1: wx - 1, ..r });
            rects.push(Rect { x0: wx + 1, ..r });
        } else {
            let wy = rng.random_range(r.y0 + MIN_ROOM_SIDE..=r.y1 - MIN_ROOM_SIDE);
            for x in r.x0..=r.x1 {
                map.set_blocked(Cell(x, wy), true);
            }
            let dx = rng.random_range(r.x0..=r.x1 - (DOOR_WIDTH - 1));
            for d in 0..DOOR_WIDTH {
                map.set_blocked(Cell(dx + d, wy), false);
            }
            rects.push(Rect { y1: wy - 1, ..r });
            rects.push(Rect { y0: wy + 1, ..r });
        }
    }
    // Stable room order regardless of split history.
    rects.sort_by_key(|r| (r.y0, r.x0));
    Some(rects)
}

fn splittable(r: Rect) -> bool {
    r.width().max(r.height()) >= 2 * MIN_ROOM_SIDE + 1
}

fn place_starts(
    rng: &mut ChaCha8Rng,
    map: &GridMap,
    used: &BTreeSet<Cell>,
) -> Option<Vec<Cell>> {
    let free: Vec<Cell> = map.free_cells().filter(|c| !used.contains(c)).collect();
    if free.is_empty() {
        return None;
    }
    let mut starts: Vec<Cell> = Vec::new();
    'outer: for _ in 0..ROBOT_STARTS {
        for _ in 0..200 {
            let c = free[rng.random_range(0..free.len())];
            let spread = starts
                .iter()
                .all(|s| (s.0 - c.0).abs() + (s.1 - c.1).abs() >= MIN_START_SEPARATION);
            if spread && !starts.contains(&c) {
                starts.push(c);
                continue 'outer;
            }
        }
        return None;
    }
    Some(starts)
}

fn seed_contents(
    rng: &mut ChaCha8Rng,
    catalog: &Catalog,
    containers: &[Container],
) -> Option<BTreeMap<ContainerId, BTreeSet<String>>> {
    let mut contents: BTreeMap<ContainerId, BTreeSet<String>> = BTreeMap::new();
    for c in containers {
        let inside: BTreeSet<String> = catalog
            .entries_for(&c.kind, &c.room)
            .filter(|p| rng.random_bool(p.weight))
            .map(|p| p.object.clone())
            .collect();
        contents.insert(c.id, inside);
    }
    // Guarantee enough distinct objects to render interesting tasks: top up
    // from the highest-weight priors still plausible for placed furniture.
    let mut distinct: BTreeSet<String> = contents.values().flatten().cloned().collect();
    if distinct.len() < MIN_DISTINCT_OBJECTS {
        let mut options: Vec<(&PriorEntry, ContainerId)> = containers
            .iter()
            .flat_map(|c| catalog.entries_for(&c.kind, &c.room).map(move |p| (p, c.id)))
            .filter(|(p, _)| !distinct.contains(&p.object))
            .collect();
        options.sort_by(|a, b| {
            b.0.weight
                .partial_cmp(&a.0.weight)
                .unwrap()
                .then_with(|| a.0.object.cmp(&b.0.object))
                .then_with(|| a.1.cmp(&b.1))
        });
        for (p, id) in options {
            if distinct.len() >= MIN_DISTINCT_OBJECTS {
                break;
            }
            if distinct.insert(p.object.clone()) {
                contents.get_mut(&id).unwrap().insert(p.object.clone());
            }
        }
        if distinct.len() < MIN_DISTINCT_OBJECTS {
            return None;
        }
    }
    Some(contents)
}

fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}
