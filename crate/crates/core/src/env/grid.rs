//! Seedable gridworld environments with Minigrid-convention dynamics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::obs::{ObjChannel, Observation, STATE_CARRYING, STATE_DOOR_LOCKED, STATE_DOOR_OPEN, VIEW_SIZE};
use super::EnvError;

/// The seven discrete actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Left = 0,
    Right = 1,
    Forward = 2,
    Pickup = 3,
    Drop = 4,
    Toggle = 5,
    Done = 6,
}

/// Size of the action space.
pub const ACTION_COUNT: usize = 7;

impl Action {
    pub fn from_index(i: usize) -> Option<Action> {
        match i {
            0 => Some(Action::Left),
            1 => Some(Action::Right),
            2 => Some(Action::Forward),
            3 => Some(Action::Pickup),
            4 => Some(Action::Drop),
            5 => Some(Action::Toggle),
            6 => Some(Action::Done),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Agent heading. Grid coordinates have x growing right and y growing
/// down, so East is `(1, 0)` and South is `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    North,
    East,
    South,
    West,
}

impl Dir {
    pub fn vec(self) -> (i64, i64) {
        match self {
            Dir::North => (0, -1),
            Dir::East => (1, 0),
            Dir::South => (0, 1),
            Dir::West => (-1, 0),
        }
    }

    /// Unit vector to the agent's right.
    pub fn right_vec(self) -> (i64, i64) {
        let (dx, dy) = self.vec();
        (-dy, dx)
    }

    pub fn rotate_left(self) -> Dir {
        match self {
            Dir::North => Dir::West,
            Dir::West => Dir::South,
            Dir::South => Dir::East,
            Dir::East => Dir::North,
        }
    }

    pub fn rotate_right(self) -> Dir {
        match self {
            Dir::North => Dir::East,
            Dir::East => Dir::South,
            Dir::South => Dir::West,
            Dir::West => Dir::North,
        }
    }

    fn from_index(i: usize) -> Dir {
        match i % 4 {
            0 => Dir::North,
            1 => Dir::East,
            2 => Dir::South,
            _ => Dir::West,
        }
    }
}

/// Static cell contents. Moving obstacles live in a separate list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Floor,
    Wall,
    Goal,
    Door { open: bool, locked: bool },
    Key,
}

/// Result of one environment step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
}

/// The implemented environment family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    Empty,
    DoorKey,
    DynamicObstacles,
}

/// Named environment configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvId {
    Empty8,
    Empty16,
    DoorKey8,
    DoorKey16,
    DynObs8,
    DynObs16,
}

impl EnvId {
    pub fn parse(s: &str) -> Option<EnvId> {
        match s {
            "empty8" => Some(EnvId::Empty8),
            "empty16" => Some(EnvId::Empty16),
            "doorkey8" => Some(EnvId::DoorKey8),
            "doorkey16" => Some(EnvId::DoorKey16),
            "dynobs8" => Some(EnvId::DynObs8),
            "dynobs16" => Some(EnvId::DynObs16),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvId::Empty8 => "empty8",
            EnvId::Empty16 => "empty16",
            EnvId::DoorKey8 => "doorkey8",
            EnvId::DoorKey16 => "doorkey16",
            EnvId::DynObs8 => "dynobs8",
            EnvId::DynObs16 => "dynobs16",
        }
    }

    pub fn kind(self) -> EnvKind {
        match self {
            EnvId::Empty8 | EnvId::Empty16 => EnvKind::Empty,
            EnvId::DoorKey8 | EnvId::DoorKey16 => EnvKind::DoorKey,
            EnvId::DynObs8 | EnvId::DynObs16 => EnvKind::DynamicObstacles,
        }
    }

    pub fn size(self) -> usize {
        match self {
            EnvId::Empty8 | EnvId::DoorKey8 | EnvId::DynObs8 => 8,
            EnvId::Empty16 | EnvId::DoorKey16 | EnvId::DynObs16 => 16,
        }
    }
}

/// Common interface over raw gridworlds and their wrappers.
pub trait Env {
    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError>;
    fn step(&mut self, action: Action) -> Result<StepResult, EnvError>;
    fn agent_pos(&self) -> (usize, usize);
    fn size(&self) -> (usize, usize);
}

impl Env for Box<dyn Env> {
    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        (**self).reset(seed)
    }
    fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        (**self).step(action)
    }
    fn agent_pos(&self) -> (usize, usize) {
        (**self).agent_pos()
    }
    fn size(&self) -> (usize, usize) {
        (**self).size()
    }
}

/// Partially observable gridworld with deterministic seeded layouts.
pub struct GridWorld {
    kind: EnvKind,
    width: usize,
    height: usize,
    grid: Vec<Cell>,
    agent_pos: (i64, i64),
    agent_dir: Dir,
    carrying: bool,
    obstacles: Vec<(i64, i64)>,
    step_count: usize,
    max_steps: usize,
    rng: ChaCha8Rng,
    episode_over: bool,
}

const PLACEMENT_ATTEMPTS: usize = 1000;

impl GridWorld {
    pub fn new(id: EnvId) -> Self {
        let n = id.size();
        let max_steps = match id.kind() {
            EnvKind::Empty | EnvKind::DynamicObstacles => 4 * n * n,
            EnvKind::DoorKey => 10 * n * n,
        };
        GridWorld {
            kind: id.kind(),
            width: n,
            height: n,
            grid: vec![Cell::Floor; n * n],
            agent_pos: (1, 1),
            agent_dir: Dir::East,
            carrying: false,
            obstacles: Vec::new(),
            step_count: 0,
            max_steps,
            rng: ChaCha8Rng::seed_from_u64(0),
            episode_over: true,
        }
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn agent_dir(&self) -> Dir {
        self.agent_dir
    }

    pub fn carrying(&self) -> bool {
        self.carrying
    }

    pub fn cell(&self, x: i64, y: i64) -> Option<Cell> {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return None;
        }
        Some(self.grid[y as usize * self.width + x as usize])
    }

    pub fn obstacles(&self) -> &[(i64, i64)] {
        &self.obstacles
    }

    fn set_cell(&mut self, x: i64, y: i64, c: Cell) {
        self.grid[y as usize * self.width + x as usize] = c;
    }

    fn obstacle_at(&self, x: i64, y: i64) -> bool {
        self.obstacles.contains(&(x, y))
    }

    fn gen_layout(&mut self) -> Result<(), EnvError> {
        let (w, h) = (self.width as i64, self.height as i64);
        self.grid.fill(Cell::Floor);
        self.obstacles.clear();
        self.carrying = false;
        for x in 0..w {
            self.set_cell(x, 0, Cell::Wall);
            self.set_cell(x, h - 1, Cell::Wall);
        }
        for y in 0..h {
            self.set_cell(0, y, Cell::Wall);
            self.set_cell(w - 1, y, Cell::Wall);
        }
        self.set_cell(w - 2, h - 2, Cell::Goal);

        match self.kind {
            EnvKind::Empty => {
                self.agent_pos = (1, 1);
                self.agent_dir = Dir::East;
            }
            EnvKind::DynamicObstacles => {
                self.agent_pos = (1, 1);
                self.agent_dir = Dir::East;
                let count = if self.width >= 16 { 8 } else { 4 };
                for _ in 0..count {
                    let pos = self.place_free(|env, x, y| {
                        env.cell(x, y) == Some(Cell::Floor)
                            && !env.obstacle_at(x, y)
                            && (x, y) != env.agent_pos
                    })?;
                    self.obstacles.push(pos);
                }
            }
            EnvKind::DoorKey => {
                // Vertical wall with a locked door; agent and key on the left.
                let split = self.rng.gen_range(2..w - 2);
                for y in 0..h {
                    self.set_cell(split, y, Cell::Wall);
                }
                let door_row = self.rng.gen_range(1..h - 2);
                self.set_cell(split, door_row, Cell::Door { open: false, locked: true });

                let agent = self.place_free(|env, x, y| {
                    x < split && env.cell(x, y) == Some(Cell::Floor)
                })?;
                self.agent_pos = agent;
                self.agent_dir = Dir::from_index(self.rng.gen_range(0..4));
                let key = self.place_free(|env, x, y| {
                    x < split && env.cell(x, y) == Some(Cell::Floor) && (x, y) != env.agent_pos
                })?;
                self.set_cell(key.0, key.1, Cell::Key);
            }
        }
        Ok(())
    }

    fn place_free(
        &mut self,
        ok: impl Fn(&GridWorld, i64, i64) -> bool,
    ) -> Result<(i64, i64), EnvError> {
        for _ in 0..PLACEMENT_ATTEMPTS {
            let x = self.rng.gen_range(1..self.width as i64 - 1);
            let y = self.rng.gen_range(1..self.height as i64 - 1);
            if ok(self, x, y) {
                return Ok((x, y));
            }
        }
        Err(EnvError::Generation)
    }

    fn front_pos(&self) -> (i64, i64) {
        let (dx, dy) = self.agent_dir.vec();
        (self.agent_pos.0 + dx, self.agent_pos.1 + dy)
    }

    fn move_obstacles(&mut self) {
        for i in 0..self.obstacles.len() {
            let (ox, oy) = self.obstacles[i];
            let mut options: Vec<(i64, i64)> = Vec::with_capacity(4);
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let (nx, ny) = (ox + dx, oy + dy);
                if self.cell(nx, ny) == Some(Cell::Floor)
                    && !self.obstacle_at(nx, ny)
                    && (nx, ny) != self.agent_pos
                {
                    options.push((nx, ny));
                }
            }
            if !options.is_empty() {
                let pick = self.rng.gen_range(0..options.len());
                self.obstacles[i] = options[pick];
            }
        }
    }

    /// Render the egocentric observation with occlusion masking.
    pub fn observe(&self) -> Observation {
        let fwd = self.agent_dir.vec();
        let right = self.agent_dir.right_vec();
        let world_of = |vx: usize, vy: usize| -> (i64, i64) {
            let f = (VIEW_SIZE - 1 - vy) as i64;
            let r = vx as i64 - (VIEW_SIZE as i64 / 2);
            (
                self.agent_pos.0 + fwd.0 * f + right.0 * r,
                self.agent_pos.1 + fwd.1 * f + right.1 * r,
            )
        };

        let see_through = |vx: usize, vy: usize| -> bool {
            let (x, y) = world_of(vx, vy);
            match self.cell(x, y) {
                None | Some(Cell::Wall) => false,
                Some(Cell::Door { open, .. }) => open,
                Some(_) => true,
            }
        };

        // Minigrid-style shadow flood from the agent cell upward.
        let mut mask = [[false; VIEW_SIZE]; VIEW_SIZE];
        mask[VIEW_SIZE / 2][VIEW_SIZE - 1] = true;
        for vy in (0..VIEW_SIZE).rev() {
            for vx in 0..VIEW_SIZE - 1 {
                if !mask[vx][vy] || !see_through(vx, vy) {
                    continue;
                }
                mask[vx + 1][vy] = true;
                if vy > 0 {
                    mask[vx + 1][vy - 1] = true;
                    mask[vx][vy - 1] = true;
                }
            }
            for vx in (1..VIEW_SIZE).rev() {
                if !mask[vx][vy] || !see_through(vx, vy) {
                    continue;
                }
                mask[vx - 1][vy] = true;
                if vy > 0 {
                    mask[vx - 1][vy - 1] = true;
                    mask[vx][vy - 1] = true;
                }
            }
        }

        let mut obs = Observation::empty();
        for vy in 0..VIEW_SIZE {
            for vx in 0..VIEW_SIZE {
                if !mask[vx][vy] {
                    obs.set_object(vx, vy, ObjChannel::Unseen);
                    continue;
                }
                let (x, y) = world_of(vx, vy);
                if vx == VIEW_SIZE / 2 && vy == VIEW_SIZE - 1 {
                    // The agent's own cell shows the carried item.
                    if self.carrying {
                        obs.set_object(vx, vy, ObjChannel::Key);
                        obs.set_state(vx, vy, STATE_CARRYING, true);
                    } else {
                        obs.set_object(vx, vy, ObjChannel::Floor);
                    }
                    continue;
                }
                if self.obstacle_at(x, y) {
                    obs.set_object(vx, vy, ObjChannel::Obstacle);
                    continue;
                }
                match self.cell(x, y) {
                    None => obs.set_object(vx, vy, ObjChannel::Unseen),
                    Some(Cell::Floor) => obs.set_object(vx, vy, ObjChannel::Floor),
                    Some(Cell::Wall) => obs.set_object(vx, vy, ObjChannel::Wall),
                    Some(Cell::Goal) => obs.set_object(vx, vy, ObjChannel::Goal),
                    Some(Cell::Key) => obs.set_object(vx, vy, ObjChannel::Key),
                    Some(Cell::Door { open, locked }) => {
                        obs.set_object(vx, vy, ObjChannel::Door);
                        obs.set_state(vx, vy, STATE_DOOR_OPEN, open);
                        obs.set_state(vx, vy, STATE_DOOR_LOCKED, locked);
                    }
                }
            }
        }
        obs
    }
}

impl Env for GridWorld {
    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.step_count = 0;
        self.episode_over = false;
        self.gen_layout()?;
        Ok(self.observe())
    }

    fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        if self.episode_over {
            return Err(EnvError::EpisodeOver);
        }
        self.step_count += 1;
        let mut reward = 0.0;
        let mut terminated = false;

        match action {
            Action::Left => self.agent_dir = self.agent_dir.rotate_left(),
            Action::Right => self.agent_dir = self.agent_dir.rotate_right(),
            Action::Forward => {
                let (fx, fy) = self.front_pos();
                if self.obstacle_at(fx, fy) {
                    terminated = true;
                    reward = -1.0;
                } else {
                    match self.cell(fx, fy) {
                        Some(Cell::Goal) => {
                            self.agent_pos = (fx, fy);
                            terminated = true;
                            reward = 1.0 - 0.9 * (self.step_count as f64 / self.max_steps as f64);
                        }
                        Some(Cell::Floor) | Some(Cell::Door { open: true, .. }) => {
                            self.agent_pos = (fx, fy);
                        }
                        _ => {} // blocked
                    }
                }
            }
            Action::Pickup => {
                let (fx, fy) = self.front_pos();
                if self.cell(fx, fy) == Some(Cell::Key) && !self.carrying {
                    self.set_cell(fx, fy, Cell::Floor);
                    self.carrying = true;
                }
            }
            Action::Drop => {
                let (fx, fy) = self.front_pos();
                if self.carrying && self.cell(fx, fy) == Some(Cell::Floor) && !self.obstacle_at(fx, fy) {
                    self.set_cell(fx, fy, Cell::Key);
                    self.carrying = false;
                }
            }
            Action::Toggle => {
                let (fx, fy) = self.front_pos();
                if let Some(Cell::Door { open, locked }) = self.cell(fx, fy) {
                    if locked {
                        if self.carrying {
                            self.set_cell(fx, fy, Cell::Door { open: true, locked: false });
                        }
                    } else {
                        self.set_cell(fx, fy, Cell::Door { open: !open, locked: false });
                    }
                }
            }
            Action::Done => {} // no-op in the base environment
        }

        if self.kind == EnvKind::DynamicObstacles && !terminated {
            self.move_obstacles();
        }

        let truncated = self.step_count >= self.max_steps;
        self.episode_over = terminated || truncated;
        Ok(StepResult { observation: self.observe(), reward, terminated, truncated })
    }

    fn agent_pos(&self) -> (usize, usize) {
        (self.agent_pos.0 as usize, self.agent_pos.1 as usize)
    }

    fn size(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_layout_is_fixed() {
        let mut env = GridWorld::new(EnvId::Empty8);
        for seed in [0u64, 7, 123] {
            env.reset(seed).unwrap();
            assert_eq!(env.agent_pos, (1, 1));
            assert_eq!(env.agent_dir, Dir::East);
            assert_eq!(env.cell(6, 6), Some(Cell::Goal));
        }
        assert_eq!(env.max_steps(), 256);
    }

    #[test]
    fn same_seed_same_grid() {
        let mut a = GridWorld::new(EnvId::DoorKey8);
        let mut b = GridWorld::new(EnvId::DoorKey8);
        let oa = a.reset(42).unwrap();
        let ob = b.reset(42).unwrap();
        assert_eq!(a.grid, b.grid);
        assert_eq!(a.agent_pos, b.agent_pos);
        assert_eq!(a.agent_dir, b.agent_dir);
        assert_eq!(oa, ob);
    }

    /// Exhaustive layout validation over 100 seeds: exactly one key,
    /// one locked door, one goal, and key/agent on the same side.
    #[test]
    fn doorkey_layouts_are_well_formed() {
        let mut env = GridWorld::new(EnvId::DoorKey8);
        for seed in 0..100u64 {
            env.reset(seed).unwrap();
            let mut keys = Vec::new();
            let mut doors = Vec::new();
            let mut goals = Vec::new();
            let mut wall_col = None;
            for y in 0..8i64 {
                for x in 0..8i64 {
                    match env.cell(x, y).unwrap() {
                        Cell::Key => keys.push((x, y)),
                        Cell::Door { locked, open } => {
                            assert!(locked && !open, "door must start locked");
                            doors.push((x, y));
                            wall_col = Some(x);
                        }
                        Cell::Goal => goals.push((x, y)),
                        _ => {}
                    }
                }
            }
            assert_eq!(keys.len(), 1, "seed {seed}");
            assert_eq!(doors.len(), 1, "seed {seed}");
            assert_eq!(goals.len(), 1, "seed {seed}");
            let split = wall_col.unwrap();
            assert!(keys[0].0 < split, "key left of the wall (seed {seed})");
            assert!(env.agent_pos.0 < split, "agent left of the wall (seed {seed})");
            assert!(goals[0].0 > split, "goal right of the wall (seed {seed})");
            // The dividing wall is complete apart from the door.
            for y in 0..8i64 {
                let c = env.cell(split, y).unwrap();
                assert!(matches!(c, Cell::Wall | Cell::Door { .. }));
            }
        }
        assert_eq!(env.max_steps(), 640);
    }

    #[test]
    fn forward_into_wall_is_blocked() {
        let mut env = GridWorld::new(EnvId::Empty8);
        env.reset(1).unwrap();
        // Face north into the top wall.
        env.step(Action::Left).unwrap();
        let r = env.step(Action::Forward).unwrap();
        assert_eq!(env.agent_pos, (1, 1));
        assert_eq!(r.reward, 0.0);
        assert!(!r.terminated);
    }

    #[test]
    fn done_is_a_no_op() {
        let mut env = GridWorld::new(EnvId::Empty8);
        let before = env.reset(1).unwrap();
        let r = env.step(Action::Done).unwrap();
        assert_eq!(r.reward, 0.0);
        assert!(!r.terminated);
        assert_eq!(r.observation, before);
        assert_eq!(env.agent_pos, (1, 1));
    }

    /// Hand-simulated optimal trajectory: 5 forward, turn right,
    /// 5 forward, reaching the goal on step 11 of 256.
    #[test]
    fn scripted_optimal_path_reward() {
        let mut env = GridWorld::new(EnvId::Empty8);
        env.reset(0).unwrap();
        for _ in 0..5 {
            env.step(Action::Forward).unwrap();
        }
        env.step(Action::Right).unwrap();
        for _ in 0..4 {
            env.step(Action::Forward).unwrap();
        }
        let r = env.step(Action::Forward).unwrap();
        assert!(r.terminated);
        let expect = 1.0 - 0.9 * 11.0 / 256.0;
        assert!((r.reward - expect).abs() < 1e-12, "reward {} vs {}", r.reward, expect);
        assert!((r.reward - 0.9613).abs() < 1e-3);
    }

    #[test]
    fn step_after_end_is_an_error() {
        let mut env = GridWorld::new(EnvId::Empty8);
        env.reset(0).unwrap();
        for _ in 0..5 {
            env.step(Action::Forward).unwrap();
        }
        env.step(Action::Right).unwrap();
        for _ in 0..5 {
            env.step(Action::Forward).unwrap();
        }
        assert!(matches!(env.step(Action::Forward), Err(EnvError::EpisodeOver)));
    }

    #[test]
    fn truncation_at_max_steps() {
        let mut env = GridWorld::new(EnvId::Empty8);
        env.reset(0).unwrap();
        for i in 0..256 {
            // Spin in place; never reaches the goal.
            let r = env.step(Action::Left).unwrap();
            if i < 255 {
                assert!(!r.truncated && !r.terminated);
            } else {
                assert!(r.truncated);
                assert!(!r.terminated);
            }
        }
        assert!(matches!(env.step(Action::Left), Err(EnvError::EpisodeOver)));
    }

    #[test]
    fn doorkey_is_solvable_with_script() {
        // Brute-force BFS over (pos, dir, carrying, door-open) states to
        // prove the layout is solvable through the public API.
        assert!(solvable(3), "doorkey seed 3 should be solvable");
    }

    fn solvable(seed: u64) -> bool {
        use std::collections::{HashSet, VecDeque};
        // BFS over action sequences, bounded; clones the env each expansion.
        let mut start = GridWorld::new(EnvId::DoorKey8);
        start.reset(seed).unwrap();
        let sig = |e: &GridWorld| (e.agent_pos, e.agent_dir as u8, e.carrying, e.grid.clone());
        let mut seen = HashSet::new();
        let mut q = VecDeque::new();
        seen.insert(sig(&start));
        q.push_back(start);
        while let Some(state) = q.pop_front() {
            for a in [Action::Left, Action::Right, Action::Forward, Action::Pickup, Action::Toggle] {
                let mut next = clone_world(&state);
                if let Ok(r) = next.step(a) {
                    if r.terminated && r.reward > 0.0 {
                        return true;
                    }
                    if !r.terminated && !r.truncated && seen.insert(sig(&next)) {
                        q.push_back(next);
                    }
                }
            }
        }
        false
    }

    fn clone_world(w: &GridWorld) -> GridWorld {
        GridWorld {
            kind: w.kind,
            width: w.width,
            height: w.height,
            grid: w.grid.clone(),
            agent_pos: w.agent_pos,
            agent_dir: w.agent_dir,
            carrying: w.carrying,
            obstacles: w.obstacles.clone(),
            step_count: w.step_count,
            max_steps: w.max_steps,
            rng: w.rng.clone(),
            episode_over: w.episode_over,
        }
    }

    #[test]
    fn dynobs_collision_gives_minus_one() {
        // Drive forward until an obstacle collision or goal; over many
        // seeds at least one collision must occur, and rewards stay in
        // the documented set.
        let mut hit = false;
        for seed in 0..60u64 {
            let mut env = GridWorld::new(EnvId::DynObs8);
            env.reset(seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            loop {
                let a = match rng.gen_range(0..3) {
                    0 => Action::Left,
                    1 => Action::Right,
                    _ => Action::Forward,
                };
                let r = env.step(a).unwrap();
                assert!(r.reward == 0.0 || r.reward == -1.0 || r.reward > 0.1);
                if r.terminated && r.reward == -1.0 {
                    hit = true;
                }
                if r.terminated || r.truncated {
                    break;
                }
            }
            if hit {
                break;
            }
        }
        assert!(hit, "no collision observed across seeds");
    }

    #[test]
    fn observation_one_hot_valid_through_play() {
        for id in [EnvId::Empty8, EnvId::DoorKey8, EnvId::DynObs8] {
            let mut env = GridWorld::new(id);
            let obs = env.reset(11).unwrap();
            assert!(obs.one_hot_valid());
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..200 {
                let a = Action::from_index(rng.gen_range(0..ACTION_COUNT)).unwrap();
                match env.step(a) {
                    Ok(r) => {
                        assert!(r.observation.one_hot_valid());
                        if r.terminated || r.truncated {
                            env.reset(12).unwrap();
                        }
                    }
                    Err(_) => {
                        env.reset(12).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn carried_key_shows_on_agent_cell() {
        let mut env = GridWorld::new(EnvId::DoorKey8);
        // Find a seed/state where pickup works by BFS-ing to the key.
        env.reset(3).unwrap();
        // Walk randomly until the key is picked up.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut picked = false;
        for _ in 0..20000 {
            let a = Action::from_index(rng.gen_range(0..4).min(3)).unwrap();
            match env.step(a) {
                Ok(r) => {
                    if env.carrying() {
                        picked = true;
                        let center = r.observation.object_at(3, 6);
                        assert_eq!(center, ObjChannel::Key as usize);
                        break;
                    }
                    if r.terminated || r.truncated {
                        env.reset(3).unwrap();
                    }
                }
                Err(_) => {
                    env.reset(3).unwrap();
                }
            }
        }
        assert!(picked, "never picked up the key in random play");
    }
}
