//! Predicates, guards and commands. Everything here reads the state of one
//! node `u` and of its neighbors, never anything else, and never a handle
//! except to pick the parent whose clocks Update Distance copies.

use alloc::format;

use super::state::{Arrow, Clock, NodeState, MAX_CLOCKS};
use super::{Params, Protocol, RuleId, RuleSet, StateTable};
use crate::automaton::EngineFault;
use crate::graph::{Graph, NodeId};

/// The closed neighborhood of `u` as seen by one ruling-set instance.
///
/// `earlier_leader` is only set by the layered coloring: it records that `u`
/// is a leader in some earlier layer, which forbids becoming a leader here
/// and relaxes `well_defined` at distance `k-1`.
pub struct Local<'a, T: StateTable + ?Sized> {
    pub params: Params,
    pub g: &'a Graph,
    pub t: &'a T,
    pub u: NodeId,
    pub earlier_leader: bool,
}

impl<'a, T: StateTable + ?Sized> Local<'a, T> {
    pub fn new(params: Params, g: &'a Graph, t: &'a T, u: NodeId, earlier_leader: bool) -> Self {
        Local { params, g, t, u, earlier_leader }
    }

    fn me(&self) -> &NodeState {
        self.t.state(self.u)
    }

    fn nbrs(&self) -> impl Iterator<Item = &NodeState> + '_ {
        self.g.neighbors(self.u).iter().map(move |&v| self.t.state(v))
    }

    fn parents(&self) -> impl Iterator<Item = &NodeState> + '_ {
        let d = self.me().d;
        self.nbrs().filter(move |s| s.d + 1 == d)
    }

    fn children(&self) -> impl Iterator<Item = &NodeState> + '_ {
        let d = self.me().d;
        self.nbrs().filter(move |s| s.d == d + 1)
    }

    fn half(&self) -> u32 {
        self.params.half()
    }

    pub fn well_defined(&self) -> bool {
        let me = self.me();
        if me.err || self.nbrs().any(|s| s.d.abs_diff(me.d) > 1) {
            return false;
        }
        let needs_parent = me.d > 0 && (!self.earlier_leader || me.d < self.params.k() - 1);
        if needs_parent && self.parents().next().is_none() {
            return false;
        }
        !(me.d == 0 && self.earlier_leader)
    }

    pub fn leader_down(&self) -> bool {
        let me = self.me();
        me.d != 0 || me.clocks.iter().all(|c| c.b == Arrow::Down)
    }

    /// Clock `i` of `u` against every parent.
    pub fn branch_coherence_up(&self, i: usize) -> bool {
        let cu = self.me().clock(i);
        self.parents().all(|p| {
            let cv = p.clock(i);
            match (cu.b, cv.b) {
                (Arrow::Up, Arrow::Up) | (Arrow::Down, Arrow::Down) => cv.c == cu.c,
                (Arrow::Up, Arrow::Down) => cv.c == cu.c || cv.c == cu.c + 1,
                (Arrow::Down, Arrow::Up) => false,
            }
        })
    }

    /// Clock `i` of `u` against every child.
    pub fn branch_coherence_down(&self, i: usize) -> bool {
        let cu = self.me().clock(i);
        self.children().all(|ch| {
            let cv = ch.clock(i);
            match (cu.b, cv.b) {
                (Arrow::Up, Arrow::Up) | (Arrow::Down, Arrow::Down) => cv.c == cu.c,
                (Arrow::Down, Arrow::Up) => cv.c == cu.c || cv.c == cu.c - 1,
                (Arrow::Up, Arrow::Down) => false,
            }
        })
    }

    pub fn branch_coherence(&self) -> bool {
        let d = self.me().d;
        let h = self.half();
        if d >= h {
            return true;
        }
        if d >= 1 && !self.branch_coherence_up(d as usize) {
            return false;
        }
        ((d + 1) as usize..h as usize).all(|i| self.branch_coherence_up(i) && self.branch_coherence_down(i))
    }

    /// `min(min{d_v} + 1, k - 1)`, or `k - 1` without neighbors.
    fn target_distance(&self) -> u32 {
        let k1 = self.params.k() - 1;
        self.nbrs().map(|s| s.d + 1).min().map_or(k1, |t| t.min(k1))
    }

    fn remote_collision(&self) -> bool {
        let me = self.me();
        let h = self.half();
        if me.err || 2 * me.d > self.params.k() - 1 {
            return false;
        }
        let closed = || core::iter::once(me).chain(self.nbrs());
        for (a, x) in closed().enumerate() {
            if x.d == 0 || x.d >= h {
                continue;
            }
            let i = x.d as usize;
            if closed().skip(a + 1).any(|y| y.d == x.d && x.clock(i).c.opposite(y.clock(i).c)) {
                return true;
            }
        }
        false
    }

    /// Indices `i` for which Incr Leader's condition holds.
    fn incr_leader_mask(&self, requires_up: bool) -> u64 {
        let me = self.me();
        let mut mask = 0;
        for i in 1..=me.clocks.len() {
            let c = me.clock(i).c;
            if self.nbrs().all(|s| s.d == 1 && s.clock(i).c == c && (!requires_up || s.clock(i).b == Arrow::Up)) {
                mask |= 1 << i;
            }
        }
        mask
    }

    /// The unique leader neighbor of a node at distance 1, if there is one.
    fn sole_leader(&self) -> Option<&NodeState> {
        let mut it = self.nbrs().filter(|s| s.d == 0);
        let first = it.next()?;
        it.next().is_none().then_some(first)
    }

    fn sync1_down_mask(&self) -> u64 {
        let me = self.me();
        let Some(p) = self.sole_leader() else { return 0 };
        let mut mask = 0;
        for i in 1..=me.clocks.len() {
            let ci = me.clock(i);
            if ci.b == Arrow::Up && ci.c == p.clock(i).c - 1 {
                mask |= 1 << i;
            }
        }
        mask
    }

    fn sync2_down_mask(&self) -> u64 {
        let me = self.me();
        let mut mask = 0;
        for i in me.d as usize..=me.clocks.len() {
            let ci = me.clock(i);
            if ci.b == Arrow::Up && self.parents().all(|p| p.clock(i) == Clock { c: ci.c + 1, b: Arrow::Down }) {
                mask |= 1 << i;
            }
        }
        mask
    }

    fn sync_up_mask(&self) -> u64 {
        let me = self.me();
        let mut mask = 0;
        for i in (me.d + 1) as usize..=me.clocks.len() {
            let ci = me.clock(i);
            if ci.b == Arrow::Down && self.children().all(|ch| ch.clock(i) == Clock { c: ci.c, b: Arrow::Up }) {
                mask |= 1 << i;
            }
        }
        mask
    }

    fn end_of_chain(&self) -> bool {
        let me = self.me();
        let i = me.d as usize;
        let ci = me.clock(i);
        ci.b == Arrow::Down && self.parents().all(|p| p.clock(i) == ci)
    }
}

/// Accumulates the writes of all commands fired in one activation and
/// rejects two different values written to the same variable.
struct Writes {
    node: NodeId,
    out: NodeState,
    d_by: Option<RuleId>,
    err_by: Option<RuleId>,
    c_by: [Option<RuleId>; MAX_CLOCKS + 1],
    b_by: [Option<RuleId>; MAX_CLOCKS + 1],
}

fn conflict(node: NodeId, var: alloc::string::String, first: RuleId, second: RuleId) -> EngineFault {
    EngineFault::WriteConflict { node, var, first: first.name(), second: second.name() }
}

impl Writes {
    fn new(node: NodeId, base: NodeState) -> Self {
        Writes { node, out: base, d_by: None, err_by: None, c_by: [None; MAX_CLOCKS + 1], b_by: [None; MAX_CLOCKS + 1] }
    }

    fn d(&mut self, r: RuleId, v: u32) -> Result<(), EngineFault> {
        match self.d_by {
            Some(prev) if self.out.d != v => Err(conflict(self.node, "d".into(), prev, r)),
            Some(_) => Ok(()),
            None => {
                self.out.d = v;
                self.d_by = Some(r);
                Ok(())
            }
        }
    }

    fn err(&mut self, r: RuleId, v: bool) -> Result<(), EngineFault> {
        match self.err_by {
            Some(prev) if self.out.err != v => Err(conflict(self.node, "err".into(), prev, r)),
            Some(_) => Ok(()),
            None => {
                self.out.err = v;
                self.err_by = Some(r);
                Ok(())
            }
        }
    }

    fn c(&mut self, r: RuleId, i: usize, v: super::Tick) -> Result<(), EngineFault> {
        let mut clock = self.out.clock(i);
        match self.c_by[i] {
            Some(prev) if clock.c != v => Err(conflict(self.node, format!("c[{i}]"), prev, r)),
            Some(_) => Ok(()),
            None => {
                clock.c = v;
                self.out.clocks.set(i, clock);
                self.c_by[i] = Some(r);
                Ok(())
            }
        }
    }

    fn b(&mut self, r: RuleId, i: usize, v: Arrow) -> Result<(), EngineFault> {
        let mut clock = self.out.clock(i);
        match self.b_by[i] {
            Some(prev) if clock.b != v => Err(conflict(self.node, format!("b[{i}]"), prev, r)),
            Some(_) => Ok(()),
            None => {
                clock.b = v;
                self.out.clocks.set(i, clock);
                self.b_by[i] = Some(r);
                Ok(())
            }
        }
    }

    fn clock(&mut self, r: RuleId, i: usize, v: Clock) -> Result<(), EngineFault> {
        self.c(r, i, v.c)?;
        self.b(r, i, v.b)
    }
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (1..64).filter(move |i| mask & (1 << i) != 0)
}

/// Evaluates every guard at `u`, keeps the activable rules of minimum
/// priority number, and executes all of them against the current snapshot.
/// Returns `None` when no rule is activable.
pub fn fire_at<T: StateTable + ?Sized>(
    proto: &Protocol,
    l: &Local<'_, T>,
) -> Result<Option<(NodeState, RuleSet)>, EngineFault> {
    use RuleId::*;
    let me = *l.me();
    let k1 = l.params.k() - 1;
    let h = l.half();

    // Priority 0.
    let mut eligible = RuleSet::EMPTY;
    let target = l.target_distance();
    if me.d != 0 && me.d != target {
        eligible.insert(UpdateDistance);
    }
    if me.d == 0 && l.earlier_leader {
        eligible.insert(BelongToTwoRulingSets);
    }

    let mut incr = 0;
    let mut s1down = 0;
    let mut s2down = 0;
    let mut sup = 0;

    if eligible.is_empty() {
        // Priority 1.
        let wd = l.well_defined();
        if wd && me.d == 0 && me.clocks.iter().any(|c| c.b == Arrow::Up) {
            eligible.insert(LeaderDown);
        }
        if !me.err {
            let leaders = (me.d == 0) as usize + l.nbrs().filter(|s| s.d == 0).count();
            if leaders >= 2 {
                eligible.insert(TwoHeads);
            }
            if !l.branch_coherence() {
                eligible.insert(BranchIncoherence);
            }
            if l.remote_collision() {
                eligible.insert(RemoteCollision);
            }
        }

        if eligible.is_empty() {
            // Priority 2.
            if wd && me.d == 0 {
                incr = l.incr_leader_mask(proto.incr_leader_requires_up);
                if incr != 0 {
                    eligible.insert(IncrLeader);
                }
            }
            if wd && me.d == 1 {
                s1down = l.sync1_down_mask();
                if s1down != 0 {
                    eligible.insert(Sync1Down);
                }
            }
            if wd && me.d > 1 && me.d < h {
                s2down = l.sync2_down_mask();
                if s2down != 0 {
                    eligible.insert(Sync2PlusDown);
                }
            }
            if wd && me.d > 0 && me.d < h {
                sup = l.sync_up_mask();
                if sup != 0 {
                    eligible.insert(Sync1PlusUp);
                }
                if l.end_of_chain() {
                    eligible.insert(SyncEndOfChain);
                }
            }
            if !me.err && !l.earlier_leader && me.d == k1 && l.nbrs().all(|s| s.d == k1) {
                eligible.insert(BecomeLeader);
            }
            if !me.err && me.d < h && l.nbrs().any(|s| s.err && me.d < s.d) {
                eligible.insert(ErrorSpread);
            }
            if me.err && (me.d > h || l.nbrs().all(|s| s.d >= me.d || s.err)) {
                eligible.insert(ResetError);
            }
        }
    }

    if eligible.is_empty() {
        return Ok(None);
    }

    let mut w = Writes::new(l.u, me);
    let nclk = me.clocks.len();
    for r in eligible.iter() {
        match r {
            UpdateDistance => {
                w.d(r, target)?;
                if target < h {
                    // Lowest-handle neighbor at distance target - 1; it exists
                    // because target is then min{d_v} + 1.
                    let src = l
                        .g
                        .neighbors(l.u)
                        .iter()
                        .map(|&v| l.t.state(v))
                        .find(|s| s.d + 1 == target)
                        .copied()
                        .expect("a neighbor realizes the minimum distance");
                    for i in target as usize..=nclk {
                        w.clock(r, i, src.clock(i))?;
                    }
                }
            }
            BelongToTwoRulingSets => w.d(r, 1)?,
            LeaderDown => {
                for i in 1..=nclk {
                    w.b(r, i, Arrow::Down)?;
                }
            }
            TwoHeads | BranchIncoherence | RemoteCollision | ErrorSpread => w.err(r, true)?,
            IncrLeader => {
                for i in bits(incr) {
                    w.c(r, i, me.clock(i).c + 1)?;
                }
            }
            Sync1Down => {
                let p = *l.sole_leader().expect("guard checked a unique leader");
                for i in bits(s1down) {
                    w.clock(r, i, Clock { c: p.clock(i).c, b: Arrow::Down })?;
                }
            }
            Sync2PlusDown => {
                for i in bits(s2down) {
                    w.clock(r, i, Clock { c: me.clock(i).c + 1, b: Arrow::Down })?;
                }
            }
            Sync1PlusUp => {
                for i in bits(sup) {
                    w.b(r, i, Arrow::Up)?;
                }
            }
            SyncEndOfChain => w.b(r, me.d as usize, Arrow::Up)?,
            BecomeLeader => {
                w.d(r, 0)?;
                for i in 1..=nclk {
                    w.clock(r, i, Clock::down0())?;
                }
            }
            ResetError => {
                w.err(r, false)?;
                if me.d == 0 {
                    w.d(r, 1)?;
                }
                for i in 1..=nclk {
                    w.clock(r, i, Clock { c: super::Tick::ZERO, b: Arrow::Up })?;
                }
            }
        }
    }
    Ok(Some((w.out, eligible)))
}
