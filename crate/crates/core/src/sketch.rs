//! HyperLogLog counters and r-hop ball size estimates over the positive
//! layer.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{NodeId, SignedGraph};

pub const DEFAULT_HLL_BITS: u8 = 7;
pub const DEFAULT_HASH_SEED: u64 = 0x5EED_C0DE_2B1F_7A11;
pub const MIN_HLL_BITS: u8 = 4;
pub const MAX_HLL_BITS: u8 = 16;

/// 64-bit finaliser (splitmix64) applied to `item ^ seed`.
#[inline]
pub fn hash64(item: u64, seed: u64) -> u64 {
    let mut z = (item ^ seed).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_bits(b: u8) -> Result<()> {
    if (MIN_HLL_BITS..=MAX_HLL_BITS).contains(&b) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "hll bits must be in {MIN_HLL_BITS}..={MAX_HLL_BITS}, got {b}"
        )))
    }
}

#[inline]
fn register_update(regs: &mut [u8], b: u8, h: u64) {
    let idx = (h >> (64 - b)) as usize;
    let rest = h << b;
    let cap = 64 - b as u32 + 1;
    let rank = (rest.leading_zeros() + 1).min(cap) as u8;
    if regs[idx] < rank {
        regs[idx] = rank;
    }
}

fn alpha(m: usize) -> f64 {
    match m {
        16 => 0.673,
        32 => 0.697,
        64 => 0.709,
        _ => 0.7213 / (1.0 + 1.079 / m as f64),
    }
}

fn estimate_registers(regs: &[u8]) -> f64 {
    let m = regs.len() as f64;
    let mut sum = 0.0;
    let mut zeros = 0usize;
    for &r in regs {
        sum += 2f64.powi(-(r as i32));
        if r == 0 {
            zeros += 1;
        }
    }
    let raw = alpha(regs.len()) * m * m / sum;
    if raw <= 2.5 * m {
        if zeros > 0 {
            return m * (m / zeros as f64).ln();
        }
        return raw;
    }
    let two64 = 2f64.powi(64);
    if raw > two64 / 30.0 {
        return -two64 * (1.0 - raw / two64).ln();
    }
    raw
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HllCounter {
    b: u8,
    seed: u64,
    registers: Vec<u8>,
}

impl HllCounter {
    pub fn new(b: u8, seed: u64) -> Result<Self> {
        check_bits(b)?;
        Ok(HllCounter {
            b,
            seed,
            registers: vec![0; 1 << b],
        })
    }

    pub fn bits(&self) -> u8 {
        self.b
    }

    pub fn registers(&self) -> &[u8] {
        &self.registers
    }

    pub fn insert(&mut self, item: u64) {
        register_update(&mut self.registers, self.b, hash64(item, self.seed));
    }

    /// Register-wise maximum of the two counters.
    pub fn union(&self, other: &HllCounter) -> Result<HllCounter> {
        let mut out = self.clone();
        out.merge(other)?;
        Ok(out)
    }

    pub fn merge(&mut self, other: &HllCounter) -> Result<()> {
        if self.b != other.b || self.seed != other.seed {
            return Err(Error::SketchMismatch(format!(
                "bits {} vs {}, seed {:#x} vs {:#x}",
                self.b, other.b, self.seed, other.seed
            )));
        }
        for (a, &b) in self.registers.iter_mut().zip(&other.registers) {
            if *a < b {
                *a = b;
            }
        }
        Ok(())
    }

    pub fn estimate(&self) -> f64 {
        estimate_registers(&self.registers)
    }
}

/// Estimated number of nodes within `radius` positive hops of each node,
/// the node itself included. Dead nodes carry 0.
#[derive(Clone, Debug, PartialEq)]
pub struct BallEstimates {
    pub radius: u32,
    pub est: Vec<f64>,
}

impl BallEstimates {
    pub fn get(&self, v: NodeId) -> f64 {
        self.est[v.index()]
    }
}

/// Synchronous HyperANF: every alive node starts with a counter holding
/// itself, and each of `r` rounds replaces a counter by its union with the
/// previous-round counters of its positive neighbours.
pub fn hyperanf_balls(g: &SignedGraph, r: u32, b: u8, seed: u64) -> Result<BallEstimates> {
    if r == 0 {
        return Err(Error::InvalidConfig("radius must be at least 1".into()));
    }
    check_bits(b)?;
    let m = 1usize << b;
    let n = g.node_count();
    let mut cur = vec![0u8; n * m];
    cur.par_chunks_mut(m).enumerate().for_each(|(i, regs)| {
        if g.is_alive(NodeId::new(i)) {
            register_update(regs, b, hash64(i as u64, seed));
        }
    });
    let mut next = cur.clone();
    for _ in 0..r {
        next.par_chunks_mut(m).enumerate().for_each(|(i, regs)| {
            let v = NodeId::new(i);
            if !g.is_alive(v) {
                return;
            }
            regs.copy_from_slice(&cur[i * m..(i + 1) * m]);
            for w in g.pos_neighbors(v) {
                let src = &cur[w.index() * m..(w.index() + 1) * m];
                for (a, &s) in regs.iter_mut().zip(src) {
                    if *a < s {
                        *a = s;
                    }
                }
            }
        });
        std::mem::swap(&mut cur, &mut next);
    }
    let est = cur
        .par_chunks(m)
        .enumerate()
        .map(|(i, regs)| {
            if g.is_alive(NodeId::new(i)) {
                estimate_registers(regs).max(1.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(BallEstimates { radius: r, est })
}

/// Reusable breadth-first ball counter with epoch-stamped visit marks.
#[derive(Clone, Debug, Default)]
pub struct BallCounter {
    mark: Vec<u32>,
    epoch: u32,
    queue: VecDeque<(NodeId, u32)>,
}

impl BallCounter {
    pub fn new(n: usize) -> Self {
        BallCounter {
            mark: vec![0; n],
            epoch: 0,
            queue: VecDeque::new(),
        }
    }

    fn next_epoch(&mut self, n: usize) {
        if self.mark.len() < n {
            self.mark.resize(n, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
    }

    /// Calls `visit` on every alive node within `r` positive hops of `v`
    /// (including `v`) and returns how many there were.
    pub fn for_each_in_ball(
        &mut self,
        g: &SignedGraph,
        v: NodeId,
        r: u32,
        mut visit: impl FnMut(NodeId),
    ) -> usize {
        self.next_epoch(g.node_count());
        self.queue.clear();
        self.mark[v.index()] = self.epoch;
        self.queue.push_back((v, 0));
        let mut count = 0;
        while let Some((u, d)) = self.queue.pop_front() {
            count += 1;
            visit(u);
            if d == r {
                continue;
            }
            for w in g.pos_neighbors(u) {
                if self.mark[w.index()] != self.epoch {
                    self.mark[w.index()] = self.epoch;
                    self.queue.push_back((w, d + 1));
                }
            }
        }
        count
    }

    pub fn count(&mut self, g: &SignedGraph, v: NodeId, r: u32) -> usize {
        self.for_each_in_ball(g, v, r, |_| {})
    }
}

/// Exact `|{u : dist⁺(v, u) ≤ r}|`.
pub fn exact_ball(g: &SignedGraph, v: NodeId, r: u32) -> Result<usize> {
    if !g.is_alive(v) {
        return Err(if v.index() < g.node_count() {
            Error::DeadNode(v)
        } else {
            Error::NodeOutOfRange(v)
        });
    }
    Ok(BallCounter::new(g.node_count()).count(g, v, r))
}
