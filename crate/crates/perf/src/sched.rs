//! Resource-constrained list scheduling of operation DAGs on pipelined
//! units: `lanes` issues per cycle, results usable `latency` cycles later.

/// An operation with up to two predecessors, given by index into the same
/// program. Programs are in topological order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Op {
    pub deps: [Option<u32>; 2],
}

impl Op {
    pub fn root() -> Self {
        Self { deps: [None, None] }
    }

    pub fn after(a: u32) -> Self {
        Self { deps: [Some(a), None] }
    }

    pub fn join(a: u32, b: u32) -> Self {
        Self {
            deps: [Some(a), Some(b)],
        }
    }
}

/// Tracks occupied issue slots; finds the first cycle with a free lane at or
/// after a given cycle using path-compressed skip pointers.
struct Slots {
    lanes: u32,
    used: Vec<u32>,
    next: Vec<u32>,
}

impl Slots {
    fn new(lanes: u32) -> Self {
        Self {
            lanes,
            used: Vec::new(),
            next: Vec::new(),
        }
    }

    fn grow(&mut self, c: usize) {
        while self.used.len() <= c {
            let i = self.used.len() as u32;
            self.used.push(0);
            self.next.push(i);
        }
    }

    fn find(&mut self, c: usize) -> usize {
        self.grow(c);
        let mut r = c;
        while self.next[r] as usize != r {
            r = self.next[r] as usize;
            self.grow(r);
        }
        let mut x = c;
        while self.next[x] as usize != r {
            let n = self.next[x] as usize;
            self.next[x] = r as u32;
            x = n;
        }
        r
    }

    fn take(&mut self, ready: u64) -> u64 {
        let c = self.find(ready as usize);
        self.used[c] += 1;
        if self.used[c] == self.lanes {
            self.grow(c + 1);
            self.next[c] = (c + 1) as u32;
        }
        c as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Schedule {
    /// Cycle at which the last result becomes available.
    pub makespan: u64,
    pub ops: u64,
    /// Longest dependency chain, in operations.
    pub depth: u64,
}

/// Schedules several independent programs on one shared unit. Each op issues
/// at the first free slot at or after its operands are ready.
pub fn list_schedule(programs: &[&[Op]], lanes: u32, latency: u64) -> Schedule {
    let mut slots = Slots::new(lanes.max(1));
    let mut out = Schedule::default();
    // Interleave programs op by op so none is starved by program order.
    let mut finish: Vec<Vec<u64>> = programs.iter().map(|p| Vec::with_capacity(p.len())).collect();
    let mut level: Vec<Vec<u64>> = programs.iter().map(|p| Vec::with_capacity(p.len())).collect();
    let longest = programs.iter().map(|p| p.len()).max().unwrap_or(0);
    for i in 0..longest {
        for (k, prog) in programs.iter().enumerate() {
            let Some(op) = prog.get(i) else { continue };
            let mut ready = 0;
            let mut lvl = 0;
            for d in op.deps.iter().flatten() {
                ready = ready.max(finish[k][*d as usize]);
                lvl = lvl.max(level[k][*d as usize]);
            }
            let issue = slots.take(ready);
            let done = issue + latency;
            finish[k].push(done);
            level[k].push(lvl + 1);
            out.makespan = out.makespan.max(done);
            out.depth = out.depth.max(lvl + 1);
            out.ops += 1;
        }
    }
    out
}

/// Pairwise reduction of `n` values; node `i` of each level combines nodes
/// `2i, 2i+1` of the level below.
pub fn tree_program(n: usize) -> Vec<Op> {
    let mut prog = Vec::new();
    let mut level: Vec<Option<u32>> = vec![None; n];
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            if pair.len() == 2 {
                let op = match (pair[0], pair[1]) {
                    (Some(a), Some(b)) => Op::join(a, b),
                    (Some(a), None) | (None, Some(a)) => Op::after(a),
                    (None, None) => Op::root(),
                };
                prog.push(op);
                next.push(Some(prog.len() as u32 - 1));
            } else {
                next.push(pair[0]);
            }
        }
        level = next;
    }
    prog
}
