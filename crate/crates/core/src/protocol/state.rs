use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Sub};

use super::Params;
use crate::hash::Fnv64;

/// Clocks packed three bits each (two for the tick, one for the arrow).
pub(crate) const MAX_CLOCKS: usize = 42;

/// Element of Z/4Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Tick(u8);

impl Tick {
    pub const ZERO: Tick = Tick(0);

    pub fn new(v: u8) -> Tick {
        Tick(v & 3)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// True when the two ticks are two apart, the only self-inverse gap.
    pub fn opposite(self, other: Tick) -> bool {
        self - other == Tick(2)
    }
}

impl Add<u8> for Tick {
    type Output = Tick;
    fn add(self, rhs: u8) -> Tick {
        Tick::new(self.0.wrapping_add(rhs))
    }
}

impl Sub<u8> for Tick {
    type Output = Tick;
    fn sub(self, rhs: u8) -> Tick {
        Tick::new(self.0.wrapping_sub(rhs))
    }
}

impl Sub for Tick {
    type Output = Tick;
    fn sub(self, rhs: Tick) -> Tick {
        self - rhs.0
    }
}

impl fmt::Display for Tick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arrow {
    Down,
    Up,
}

impl Arrow {
    pub fn as_str(self) -> &'static str {
        match self {
            Arrow::Up => "up",
            Arrow::Down => "down",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Clock {
    pub c: Tick,
    pub b: Arrow,
}

impl Clock {
    pub fn new(c: u8, b: Arrow) -> Clock {
        Clock { c: Tick::new(c), b }
    }

    pub const fn down0() -> Clock {
        Clock { c: Tick::ZERO, b: Arrow::Down }
    }

    fn bits(self) -> u128 {
        (self.c.0 as u128) | ((matches!(self.b, Arrow::Up) as u128) << 2)
    }

    fn from_bits(bits: u128) -> Clock {
        Clock {
            c: Tick((bits & 3) as u8),
            b: if bits & 4 != 0 { Arrow::Up } else { Arrow::Down },
        }
    }

    /// Index in `0..8` used by the model checker's dense encoding.
    pub fn code(self) -> u8 {
        self.bits() as u8
    }

    pub fn from_code(code: u8) -> Clock {
        Clock::from_bits(code as u128 & 7)
    }
}

/// Clock vector, indexed `1..=len` to match the protocol's clock indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Clocks {
    bits: u128,
    len: u8,
}

impl Clocks {
    /// `len` clocks, all `(0, Down)`.
    pub fn new(len: usize) -> Clocks {
        assert!(len <= MAX_CLOCKS, "at most {MAX_CLOCKS} clocks are supported");
        Clocks { bits: 0, len: len as u8 }
    }

    pub fn filled(len: usize, clock: Clock) -> Clocks {
        let mut c = Clocks::new(len);
        for i in 1..=len {
            c.set(i, clock);
        }
        c
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Clock `i`, with `1 <= i <= len`.
    pub fn get(&self, i: usize) -> Clock {
        debug_assert!(i >= 1 && i <= self.len(), "clock index {i} out of 1..={}", self.len);
        Clock::from_bits(self.bits >> (3 * (i - 1)))
    }

    pub fn set(&mut self, i: usize, clock: Clock) {
        debug_assert!(i >= 1 && i <= self.len(), "clock index {i} out of 1..={}", self.len);
        let shift = 3 * (i - 1);
        self.bits = (self.bits & !(7u128 << shift)) | (clock.bits() << shift);
    }

    pub fn iter(&self) -> impl Iterator<Item = Clock> + '_ {
        (1..=self.len()).map(move |i| self.get(i))
    }
}

impl fmt::Debug for Clocks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter().map(|c| (c.c.0, c.b))).finish()
    }
}

impl FromIterator<Clock> for Clocks {
    fn from_iter<I: IntoIterator<Item = Clock>>(iter: I) -> Self {
        let v: Vec<Clock> = iter.into_iter().collect();
        let mut c = Clocks::new(v.len());
        for (i, clock) in v.into_iter().enumerate() {
            c.set(i + 1, clock);
        }
        c
    }
}

/// Local variables of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeState {
    pub d: u32,
    pub err: bool,
    pub clocks: Clocks,
}

impl NodeState {
    pub fn new(params: Params, d: u32) -> NodeState {
        NodeState { d, err: false, clocks: Clocks::new(params.clock_count()) }
    }

    pub fn clock(&self, i: usize) -> Clock {
        self.clocks.get(i)
    }

    pub fn is_valid(&self, params: Params) -> bool {
        self.d < params.k() && self.clocks.len() == params.clock_count()
    }

    /// Dense index in `0..params.states_per_node()`.
    pub fn code(&self) -> u64 {
        let mut idx = self.d as u64 * 2 + self.err as u64;
        for c in self.clocks.iter() {
            idx = idx * 8 + c.code() as u64;
        }
        idx
    }

    pub fn from_code(params: Params, mut code: u64) -> NodeState {
        let n = params.clock_count();
        let mut clocks = Clocks::new(n);
        for i in (1..=n).rev() {
            clocks.set(i, Clock::from_code((code % 8) as u8));
            code /= 8;
        }
        NodeState { d: (code / 2) as u32, err: code % 2 == 1, clocks }
    }

    pub(crate) fn hash_into(&self, h: &mut Fnv64) {
        h.write_u32(self.d);
        h.write_u8(self.err as u8);
        for c in self.clocks.iter() {
            h.write_u8(c.c.0);
            h.write_u8(matches!(c.b, Arrow::Up) as u8);
        }
    }
}

/// Global snapshot: one state per node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub params: Params,
    pub states: Vec<NodeState>,
}

impl Configuration {
    /// Every node at `d = k-1`, no error, clocks `(0, Down)`.
    pub fn uniform(params: Params, n: usize) -> Configuration {
        Configuration { params, states: alloc::vec![NodeState::new(params, params.k() - 1); n] }
    }

    /// States with the given `d`-values, no errors and `(0, Down)` clocks.
    pub fn from_distances(params: Params, d: &[u32]) -> Configuration {
        Configuration { params, states: d.iter().map(|&d| NodeState::new(params, d)).collect() }
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn distances(&self) -> Vec<u32> {
        self.states.iter().map(|s| s.d).collect()
    }

    pub fn is_valid(&self) -> bool {
        self.states.iter().all(|s| s.is_valid(self.params))
    }

    /// Canonical 64-bit FNV-1a hash: `k` and `n` as little-endian `u32`,
    /// then per node `d` (`u32` LE), `err` (byte), and per clock `c` and `b`
    /// (one byte each, `Up` = 1).
    pub fn hash64(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write_u32(self.params.k());
        h.write_u32(self.states.len() as u32);
        for s in &self.states {
            s.hash_into(&mut h);
        }
        h.finish()
    }
}
