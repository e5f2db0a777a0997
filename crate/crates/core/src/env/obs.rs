//! Egocentric one-hot observations.
//!
//! The agent sees a 7x7 window in front of itself. Each visible cell is
//! encoded over 11 object-type channels plus 3 state channels (door
//! open, door locked, carried item), giving a flat {0,1} vector of
//! 7 * 7 * 14 = 686 values. Cells hidden behind walls use the
//! `Unseen` channel.

use rand::Rng;

/// Side length of the egocentric view.
pub const VIEW_SIZE: usize = 7;
/// Number of object-type channels.
pub const OBJ_CHANNELS: usize = 11;
/// Number of state channels.
pub const STATE_CHANNELS: usize = 3;
/// Channels per cell.
pub const CELL_CHANNELS: usize = OBJ_CHANNELS + STATE_CHANNELS;
/// Flattened observation length.
pub const OBS_DIM: usize = VIEW_SIZE * VIEW_SIZE * CELL_CHANNELS;

/// Object-type channel indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjChannel {
    Unseen = 0,
    Floor = 1,
    Wall = 2,
    Door = 3,
    Key = 4,
    Obstacle = 5,
    Goal = 6,
    Lava = 7,
    Box_ = 8,
    Ball = 9,
    Agent = 10,
}

/// State channel indices (offsets after the object channels).
pub const STATE_DOOR_OPEN: usize = 0;
pub const STATE_DOOR_LOCKED: usize = 1;
pub const STATE_CARRYING: usize = 2;

/// Flat one-hot observation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    data: Vec<f64>,
}

impl Observation {
    pub fn empty() -> Self {
        Observation { data: vec![0.0; OBS_DIM] }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Set a cell's object channel (exactly one per cell).
    pub fn set_object(&mut self, vx: usize, vy: usize, obj: ObjChannel) {
        let base = (vy * VIEW_SIZE + vx) * CELL_CHANNELS;
        for c in 0..OBJ_CHANNELS {
            self.data[base + c] = 0.0;
        }
        self.data[base + obj as usize] = 1.0;
    }

    pub fn set_state(&mut self, vx: usize, vy: usize, state: usize, on: bool) {
        let base = (vy * VIEW_SIZE + vx) * CELL_CHANNELS + OBJ_CHANNELS;
        self.data[base + state] = if on { 1.0 } else { 0.0 };
    }

    pub fn object_at(&self, vx: usize, vy: usize) -> usize {
        let base = (vy * VIEW_SIZE + vx) * CELL_CHANNELS;
        (0..OBJ_CHANNELS)
            .find(|&c| self.data[base + c] == 1.0)
            .expect("no object channel set")
    }

    /// Exactly one object-type channel active per cell, all entries 0/1.
    pub fn one_hot_valid(&self) -> bool {
        if !self.data.iter().all(|&v| v == 0.0 || v == 1.0) {
            return false;
        }
        for cell in 0..VIEW_SIZE * VIEW_SIZE {
            let base = cell * CELL_CHANNELS;
            let active: f64 = self.data[base..base + OBJ_CHANNELS].iter().sum();
            if active != 1.0 {
                return false;
            }
        }
        true
    }

    /// A fresh uniform-random valid one-hot pattern (the Noisy-TV
    /// payload): every cell gets a random object type, doors get a
    /// random door state.
    pub fn random_noise<R: Rng>(rng: &mut R) -> Self {
        let mut obs = Observation::empty();
        for vy in 0..VIEW_SIZE {
            for vx in 0..VIEW_SIZE {
                let obj = rng.gen_range(0..OBJ_CHANNELS);
                let channel = match obj {
                    0 => ObjChannel::Unseen,
                    1 => ObjChannel::Floor,
                    2 => ObjChannel::Wall,
                    3 => ObjChannel::Door,
                    4 => ObjChannel::Key,
                    5 => ObjChannel::Obstacle,
                    6 => ObjChannel::Goal,
                    7 => ObjChannel::Lava,
                    8 => ObjChannel::Box_,
                    9 => ObjChannel::Ball,
                    _ => ObjChannel::Agent,
                };
                obs.set_object(vx, vy, channel);
                if channel == ObjChannel::Door {
                    match rng.gen_range(0..3) {
                        0 => obs.set_state(vx, vy, STATE_DOOR_OPEN, true),
                        1 => obs.set_state(vx, vy, STATE_DOOR_LOCKED, true),
                        _ => {}
                    }
                }
            }
        }
        obs
    }
}
