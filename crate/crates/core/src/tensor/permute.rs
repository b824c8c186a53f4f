//! Index permutation: a naive strided reference and the cache-efficient
//! kernel built from left (L) and right (R) moves over binary indexes.
//!
//! Every index of dimension `2^b` is viewed as `b` binary indexes, so a
//! tensor of `2^r` entries has `r` binary positions, position 0 being the
//! slowest. For a boundary `gamma`:
//! * an `L` move permutes the first `r - gamma` positions and relocates whole
//!   contiguous blocks of `2^gamma` entries;
//! * an `R` move permutes the last `gamma` positions, reordering entries only
//!   inside each contiguous block of `2^gamma` entries.
//!
//! Any permutation decomposes into `L(mu) R(nu) L(mu)` provided the middle
//! group (`nu - mu` positions) can hold the letters that must end up in the
//! rightmost group; shorter decompositions are used whenever they suffice.

use super::{Scalar, Tensor};
use crate::error::{invalid, Result};
use parking_lot::RwLock;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

pub const DEFAULT_MU: usize = 5;
pub const DEFAULT_NU: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveKind {
    L,
    R,
}

/// One move. `sub[j] = k` means the binary index at relative position `k`
/// of the affected group lands at relative position `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub kind: MoveKind,
    pub gamma: usize,
    pub sub: Vec<usize>,
}

impl Move {
    /// Size of the contiguous blocks this move works with.
    pub fn d_gamma(&self) -> usize {
        1usize << self.gamma
    }

    fn apply_to(&self, arrangement: &mut [usize]) {
        let r = arrangement.len();
        let lo = match self.kind {
            MoveKind::L => 0,
            MoveKind::R => r - self.gamma,
        };
        let old: Vec<usize> = arrangement[lo..lo + self.sub.len()].to_vec();
        for (j, &k) in self.sub.iter().enumerate() {
            arrangement[lo + j] = old[k];
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutePlan {
    /// Output index `j` takes input index `permutation[j]`.
    pub permutation: Vec<usize>,
    pub dims: Vec<usize>,
    /// The permutation expanded to binary positions.
    pub binary: Vec<usize>,
    pub moves: Vec<Move>,
    pub mu: usize,
    pub nu: usize,
    /// Set when no template applies and the naive kernel is used instead.
    pub fallback: Option<String>,
}

impl PermutePlan {
    pub fn binary_rank(&self) -> usize {
        self.binary.len()
    }

    /// Arrangement of the original binary positions after each move.
    pub fn stages(&self) -> Vec<Vec<usize>> {
        let mut cur: Vec<usize> = (0..self.binary.len()).collect();
        self.moves
            .iter()
            .map(|m| {
                m.apply_to(&mut cur);
                cur.clone()
            })
            .collect()
    }

    /// Human-readable decomposition, e.g. `L2 R4 L2`.
    pub fn describe(&self) -> String {
        if let Some(why) = &self.fallback {
            return format!("naive ({why})");
        }
        self.moves
            .iter()
            .map(|m| format!("{:?}{}", m.kind, m.gamma))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn check_perm(n: usize, perm: &[usize]) -> Result<()> {
    if perm.len() != n {
        return invalid(format!("permutation has {} entries, tensor rank {}", perm.len(), n));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return invalid("permutation is not a bijection");
        }
        seen[p] = true;
    }
    Ok(())
}

/// Reference permutation by strided gathering.
pub fn permute_naive<T: Scalar>(t: &Tensor<T>, perm: &[usize]) -> Result<Tensor<T>> {
    let r = t.rank();
    check_perm(r, perm)?;
    let labels: Vec<_> = perm.iter().map(|&p| t.labels()[p]).collect();
    let dims: Vec<_> = perm.iter().map(|&p| t.dims()[p]).collect();
    if r == 0 {
        return Tensor::new(labels, dims, t.data().to_vec());
    }
    let mut in_stride = vec![1usize; r];
    for i in (0..r - 1).rev() {
        in_stride[i] = in_stride[i + 1] * t.dims()[i + 1];
    }
    let ostride: Vec<usize> = perm.iter().map(|&p| in_stride[p]).collect();
    let src = t.data();
    let inner = dims[r - 1];
    let inner_s = ostride[r - 1];
    let mut out = vec![T::ZERO; src.len()];
    let mut idx = vec![0usize; r - 1];
    let mut base = 0usize;
    for row in out.chunks_mut(inner) {
        for (k, o) in row.iter_mut().enumerate() {
            *o = src[base + k * inner_s];
        }
        for a in (0..r - 1).rev() {
            idx[a] += 1;
            base += ostride[a];
            if idx[a] < dims[a] {
                break;
            }
            base -= ostride[a] * dims[a];
            idx[a] = 0;
        }
    }
    Tensor::new(labels, dims, out)
}

fn binary_expansion(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    let mut offs = Vec::with_capacity(dims.len());
    let mut acc = 0;
    for &d in dims {
        if !d.is_power_of_two() {
            return invalid(format!("dimension {d} is not a power of two"));
        }
        offs.push(acc);
        acc += d.trailing_zeros() as usize;
    }
    let mut bin = Vec::with_capacity(acc);
    for &p in perm {
        let b = dims[p].trailing_zeros() as usize;
        bin.extend(offs[p]..offs[p] + b);
    }
    Ok(bin)
}

/// Builds the shortest move decomposition of `perm` over `dims`.
pub fn plan_permutation(dims: &[usize], perm: &[usize], mu: usize, nu: usize) -> Result<PermutePlan> {
    check_perm(dims.len(), perm)?;
    if mu == 0 || nu <= mu {
        return invalid("need 0 < mu < nu");
    }
    let binary = binary_expansion(dims, perm)?;
    let mut plan = PermutePlan {
        permutation: perm.to_vec(),
        dims: dims.to_vec(),
        binary: binary.clone(),
        moves: vec![],
        mu,
        nu,
        fallback: None,
    };
    let r = binary.len();
    if binary.iter().enumerate().all(|(i, &p)| i == p) {
        return Ok(plan);
    }
    let mut tpos = vec![0; r];
    for (j, &p) in binary.iter().enumerate() {
        tpos[p] = j;
    }
    let candidates = [
        one_move(&binary, mu, nu),
        (r > nu).then(|| right_then_left(r, &tpos, mu, nu)).flatten(),
        (r > nu).then(|| left_then_right(r, &tpos, mu, nu)).flatten(),
        (r > nu).then(|| three_moves(r, &tpos, mu, nu)).flatten(),
    ];
    for moves in candidates.into_iter().flatten() {
        let mut cur: Vec<usize> = (0..r).collect();
        for m in &moves {
            m.apply_to(&mut cur);
        }
        if cur == binary {
            plan.moves = moves;
            return Ok(plan);
        }
    }
    plan.fallback = Some(format!(
        "permutation needs more than {} middle positions for L{mu}-R{nu}-L{mu}",
        nu - mu
    ));
    Ok(plan)
}

fn one_move(binary: &[usize], mu: usize, nu: usize) -> Option<Vec<Move>> {
    let r = binary.len();
    let first = binary.iter().enumerate().position(|(i, &p)| i != p)?;
    let gamma = r - first;
    if gamma <= nu {
        let sub = binary[first..].iter().map(|p| p - first).collect();
        return Some(vec![Move { kind: MoveKind::R, gamma, sub }]);
    }
    let last = binary.iter().enumerate().rposition(|(i, &p)| i != p)?;
    let gamma = r - 1 - last;
    if gamma >= mu {
        let sub = binary[..r - gamma].to_vec();
        return Some(vec![Move { kind: MoveKind::L, gamma, sub }]);
    }
    None
}

/// Move that turns `cur[lo..hi]` into `new` (same letters).
fn make_move(kind: MoveKind, gamma: usize, cur: &[usize], lo: usize, new: &[usize]) -> Move {
    let sub = new
        .iter()
        .map(|l| cur[lo..].iter().position(|c| c == l).unwrap())
        .collect();
    Move { kind, gamma, sub }
}

/// Fills the free slots of `slots` with `rest`, in order.
fn fill(slots: &mut [Option<usize>], rest: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut rest = rest.into_iter();
    slots
        .iter_mut()
        .map(|s| *s.get_or_insert_with(|| rest.next().unwrap()))
        .collect()
}

/// First L move of the three-move template: letters destined for the
/// rightmost `mu` positions are gathered into the middle group, other
/// letters go to their target slot where possible (rightmost targets first).
fn gather_left(r: usize, cur: &[usize], tpos: &[usize], mu: usize, nu: usize) -> Option<Move> {
    let hi = r - mu;
    let mid = r - nu;
    let letters = &cur[..hi];
    let forced: Vec<usize> = letters.iter().copied().filter(|&l| tpos[l] >= hi).collect();
    if forced.len() > nu - mu {
        return None;
    }
    let mut cap = nu - mu - forced.len();
    let mut slots: Vec<Option<usize>> = vec![None; hi];
    let mut placed = vec![false; r];
    let mut others: Vec<usize> = letters.iter().copied().filter(|&l| tpos[l] < hi).collect();
    others.sort_by(|a, b| tpos[*b].cmp(&tpos[*a]));
    for &l in &others {
        let t = tpos[l];
        if slots[t].is_some() {
            continue;
        }
        if t >= mid {
            if cap == 0 {
                continue;
            }
            cap -= 1;
        }
        slots[t] = Some(l);
        placed[l] = true;
    }
    let mut forced = forced;
    forced.sort_by_key(|&l| tpos[l]);
    let free_mid: Vec<usize> = (mid..hi).filter(|&s| slots[s].is_none()).collect();
    for (&l, &s) in forced.iter().zip(&free_mid) {
        slots[s] = Some(l);
        placed[l] = true;
    }
    let rest: Vec<usize> = letters.iter().copied().filter(|&l| !placed[l]).collect();
    let new = fill(&mut slots, rest);
    Some(make_move(MoveKind::L, mu, cur, 0, &new))
}

/// R move over the last `nu` positions that puts the final `mu` letters in
/// place and, where possible, other letters at their target slots.
fn settle_right(r: usize, cur: &[usize], tpos: &[usize], mu: usize, nu: usize) -> Option<Move> {
    let lo = r - nu;
    let letters = &cur[lo..];
    let mut slots: Vec<Option<usize>> = vec![None; nu];
    let mut placed = vec![false; r];
    for &l in letters {
        if tpos[l] >= r - mu {
            slots[tpos[l] - lo] = Some(l);
            placed[l] = true;
        }
    }
    if (r - mu..r).any(|s| slots[s - lo].is_none()) {
        return None;
    }
    let mut others: Vec<usize> = letters.iter().copied().filter(|&l| !placed[l]).collect();
    others.sort_by(|a, b| tpos[*b].cmp(&tpos[*a]));
    for &l in &others {
        let t = tpos[l];
        if t >= lo && slots[t - lo].is_none() {
            slots[t - lo] = Some(l);
            placed[l] = true;
        }
    }
    let rest: Vec<usize> = letters.iter().copied().filter(|&l| !placed[l]).collect();
    let new = fill(&mut slots, rest);
    Some(make_move(MoveKind::R, nu, cur, lo, &new))
}

/// Move over `[lo, hi)` that sends every letter to its target slot.
fn finish(kind: MoveKind, gamma: usize, lo: usize, hi: usize, cur: &[usize], tpos: &[usize]) -> Option<Move> {
    let mut new = vec![usize::MAX; hi - lo];
    for &l in &cur[lo..hi] {
        let t = tpos[l];
        if t < lo || t >= hi {
            return None;
        }
        new[t - lo] = l;
    }
    Some(make_move(kind, gamma, cur, lo, &new))
}

fn right_then_left(r: usize, tpos: &[usize], mu: usize, nu: usize) -> Option<Vec<Move>> {
    let mut cur: Vec<usize> = (0..r).collect();
    let m1 = settle_right(r, &cur, tpos, mu, nu)?;
    m1.apply_to(&mut cur);
    let m2 = finish(MoveKind::L, mu, 0, r - mu, &cur, tpos)?;
    Some(vec![m1, m2])
}

fn left_then_right(r: usize, tpos: &[usize], mu: usize, nu: usize) -> Option<Vec<Move>> {
    let mut cur: Vec<usize> = (0..r).collect();
    // every letter bound for the first r - nu slots must be movable by L
    let hi = r - mu;
    let lo = r - nu;
    let mut slots: Vec<Option<usize>> = vec![None; hi];
    let mut placed = vec![false; r];
    for &l in &cur[..hi] {
        if tpos[l] < lo {
            slots[tpos[l]] = Some(l);
            placed[l] = true;
        }
    }
    if (0..lo).any(|s| slots[s].is_none()) {
        return None;
    }
    let mut others: Vec<usize> = cur[..hi].iter().copied().filter(|&l| !placed[l]).collect();
    others.sort_by(|a, b| tpos[*b].cmp(&tpos[*a]));
    for &l in &others {
        let t = tpos[l];
        if t < hi && slots[t].is_none() {
            slots[t] = Some(l);
            placed[l] = true;
        }
    }
    let rest: Vec<usize> = cur[..hi].iter().copied().filter(|&l| !placed[l]).collect();
    let new = fill(&mut slots, rest);
    let m1 = make_move(MoveKind::L, mu, &cur, 0, &new);
    m1.apply_to(&mut cur);
    let m2 = finish(MoveKind::R, nu, lo, r, &cur, tpos)?;
    Some(vec![m1, m2])
}

fn three_moves(r: usize, tpos: &[usize], mu: usize, nu: usize) -> Option<Vec<Move>> {
    let mut cur: Vec<usize> = (0..r).collect();
    let m1 = gather_left(r, &cur, tpos, mu, nu)?;
    m1.apply_to(&mut cur);
    let m2 = settle_right(r, &cur, tpos, mu, nu)?;
    m2.apply_to(&mut cur);
    let m3 = finish(MoveKind::L, mu, 0, r - mu, &cur, tpos)?;
    Some(vec![m1, m2, m3])
}

/// Relocation map of a move: output block (L) or in-block offset (R) to
/// the corresponding input one.
fn build_map(sub: &[usize]) -> Vec<u32> {
    let m = sub.len();
    assert!(m < 32, "move maps are limited to 31 binary indexes");
    let w: Vec<u32> = sub.iter().map(|&k| 1u32 << (m - 1 - k)).collect();
    let mut map = vec![0u32; 1 << m];
    for o in 1..map.len() {
        let b = usize::BITS - 1 - o.leading_zeros();
        map[o] = map[o ^ (1 << b)] + w[m - 1 - b as usize];
    }
    map
}

type MapKey = (MoveKind, Vec<usize>);

struct MapEntry {
    map: Arc<Vec<u32>>,
    last_used: AtomicU64,
}

/// Memoized move maps, shared between threads. Optional entry cap with
/// least-recently-used eviction.
pub struct MoveMapCache {
    entries: RwLock<HashMap<MapKey, MapEntry>>,
    cap: Option<usize>,
    clock: AtomicU64,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl MoveMapCache {
    pub fn new(cap: Option<usize>) -> Self {
        MoveMapCache {
            entries: RwLock::new(HashMap::new()),
            cap,
            clock: AtomicU64::new(0),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    /// Process-wide unbounded cache used by `permute_fast`.
    pub fn global() -> &'static MoveMapCache {
        static GLOBAL: OnceLock<MoveMapCache> = OnceLock::new();
        GLOBAL.get_or_init(|| MoveMapCache::new(None))
    }

    pub fn get(&self, kind: MoveKind, sub: &[usize]) -> Arc<Vec<u32>> {
        let now = self.clock.fetch_add(1, Ordering::Relaxed);
        let key = (kind, sub.to_vec());
        if let Some(e) = self.entries.read().get(&key) {
            e.last_used.store(now, Ordering::Relaxed);
            self.hits.fetch_add(1, Ordering::Relaxed);
            return e.map.clone();
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let map = Arc::new(build_map(sub));
        let mut entries = self.entries.write();
        if let Some(cap) = self.cap {
            while entries.len() >= cap.max(1) {
                let oldest = entries
                    .iter()
                    .min_by_key(|(_, e)| e.last_used.load(Ordering::Relaxed))
                    .map(|(k, _)| k.clone());
                match oldest {
                    Some(k) => entries.remove(&k),
                    None => break,
                };
            }
        }
        entries
            .entry(key)
            .or_insert_with(|| MapEntry {
                map: map.clone(),
                last_used: AtomicU64::new(now),
            })
            .map
            .clone()
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (hits, misses) since creation.
    pub fn stats(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    pub fn clear(&self) {
        self.entries.write().clear();
    }
}

/// Applies `plan` with the global move-map cache.
pub fn permute_fast<T: Scalar>(t: &Tensor<T>, plan: &PermutePlan, threads: usize) -> Result<Tensor<T>> {
    permute_fast_with(t, plan, threads, Some(MoveMapCache::global()))
}

/// Applies `plan`; with `cache = None` every move map is rebuilt.
pub fn permute_fast_with<T: Scalar>(
    t: &Tensor<T>,
    plan: &PermutePlan,
    threads: usize,
    cache: Option<&MoveMapCache>,
) -> Result<Tensor<T>> {
    if plan.dims != t.dims() {
        return invalid("plan was built for different dimensions");
    }
    if plan.fallback.is_some() {
        return permute_naive(t, &plan.permutation);
    }
    let labels: Vec<_> = plan.permutation.iter().map(|&p| t.labels()[p]).collect();
    let dims: Vec<_> = plan.permutation.iter().map(|&p| t.dims()[p]).collect();
    if plan.moves.is_empty() {
        return Tensor::new(labels, dims, t.data().to_vec());
    }
    let threads = threads.max(1);
    let mut bufs: [Vec<T>; 2] = [vec![T::ZERO; t.len()], Vec::new()];
    for (i, m) in plan.moves.iter().enumerate() {
        let map = match cache {
            Some(c) => c.get(m.kind, &m.sub),
            None => Arc::new(build_map(&m.sub)),
        };
        if i == 1 {
            bufs[1] = vec![T::ZERO; t.len()];
        }
        let (a, b) = bufs.split_at_mut(1);
        let (src, dst): (&[T], &mut [T]) = match i {
            0 => (t.data(), a[0].as_mut_slice()),
            _ if i % 2 == 1 => (a[0].as_slice(), b[0].as_mut_slice()),
            _ => (b[0].as_slice(), a[0].as_mut_slice()),
        };
        apply_move(src, dst, m.kind, m.gamma, &map, threads);
    }
    let out = std::mem::take(&mut bufs[(plan.moves.len() - 1) % 2]);
    Tensor::new(labels, dims, out)
}

/// Entries below which a move runs on the calling thread only.
const PARALLEL_MIN: usize = 1 << 14;

fn apply_move<T: Scalar>(src: &[T], dst: &mut [T], kind: MoveKind, gamma: usize, map: &[u32], threads: usize) {
    let len = dst.len();
    if threads == 1 || len < PARALLEL_MIN {
        move_kernel(src, dst, 0, kind, gamma, map);
        return;
    }
    let chunk = len.div_ceil(threads);
    std::thread::scope(|s| {
        for (ci, out) in dst.chunks_mut(chunk).enumerate() {
            s.spawn(move || move_kernel(src, out, ci * chunk, kind, gamma, map));
        }
    });
}

/// Writes output entries `start..start + out.len()` of one move.
fn move_kernel<T: Scalar>(src: &[T], out: &mut [T], start: usize, kind: MoveKind, gamma: usize, map: &[u32]) {
    let bsize = 1usize << gamma;
    let mask = bsize - 1;
    let mut e = start;
    let end = start + out.len();
    match kind {
        MoveKind::L => {
            while e < end {
                let off = e & mask;
                let n = (bsize - off).min(end - e);
                let from = ((map[e >> gamma] as usize) << gamma) + off;
                out[e - start..e - start + n].copy_from_slice(&src[from..from + n]);
                e += n;
            }
        }
        MoveKind::R => {
            while e < end {
                let block = e & !mask;
                let off = e & mask;
                let n = (bsize - off).min(end - e);
                let dst = &mut out[e - start..e - start + n];
                for (k, o) in dst.iter_mut().enumerate() {
                    *o = src[block + map[off + k] as usize];
                }
                e += n;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn letters(arr: &[usize]) -> String {
        arr.iter().map(|&i| (b'a' + i as u8) as char).collect()
    }

    #[test]
    fn worked_example_decomposition() {
        // abcdefg -> cfeadgb
        let target = "cfeadgb";
        let perm: Vec<usize> = target.bytes().map(|b| (b - b'a') as usize).collect();
        let plan = plan_permutation(&[2; 7], &perm, 2, 4).unwrap();
        assert_eq!(plan.describe(), "L2 R4 L2");
        let st: Vec<String> = plan.stages().iter().map(|s| letters(s)).collect();
        assert_eq!(st, vec!["caebdfg", "caefdgb", "cfeadgb"]);
    }

    #[test]
    fn right_only_perm_is_single_r_move() {
        let perm = vec![0, 1, 2, 3, 4, 5, 7, 6, 9, 8];
        let plan = plan_permutation(&[2; 10], &perm, 2, 4).unwrap();
        assert_eq!(plan.moves.len(), 1);
        assert_eq!(plan.moves[0].kind, MoveKind::R);
        assert_eq!(plan.moves[0].gamma, 4);
    }

    #[test]
    fn left_only_perm_is_single_l_move() {
        let mut perm: Vec<usize> = (0..16).collect();
        perm.swap(0, 9);
        let plan = plan_permutation(&[2; 16], &perm, 5, 10).unwrap();
        assert_eq!(plan.describe(), "L6");
    }

    #[test]
    fn map_matches_bit_definition() {
        let sub = vec![2, 0, 3, 1];
        let map = build_map(&sub);
        for o in 0..16u32 {
            let mut i = 0;
            for (j, &k) in sub.iter().enumerate() {
                let bit = (o >> (3 - j)) & 1;
                i |= bit << (3 - k);
            }
            assert_eq!(map[o as usize], i);
        }
    }

    #[test]
    fn lru_cap_is_respected() {
        let cache = MoveMapCache::new(Some(2));
        cache.get(MoveKind::L, &[1, 0]);
        cache.get(MoveKind::L, &[0, 2, 1]);
        cache.get(MoveKind::R, &[1, 0]);
        assert_eq!(cache.len(), 2);
    }

    fn random_tensor(dims: &[usize], seed: u64) -> Tensor<Complex64> {
        let n: usize = dims.iter().product();
        let data = (0..n)
            .map(|i| Complex64::new((i as f64 + seed as f64).sin(), (i as f64 * 0.37).cos()))
            .collect();
        Tensor::new((0..dims.len() as u64).collect(), dims.to_vec(), data).unwrap()
    }

    proptest! {
        #[test]
        fn fast_equals_naive(bits in prop::collection::vec(0usize..3, 1..12), seed in any::<u64>(), threads in 1usize..5) {
            let dims: Vec<usize> = bits.iter().map(|b| 1 << b).collect();
            let mut perm: Vec<usize> = (0..dims.len()).collect();
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let t = random_tensor(&dims, seed);
            let plan = plan_permutation(&dims, &perm, 2, 5).unwrap();
            let fast = permute_fast(&t, &plan, threads).unwrap();
            let slow = permute_naive(&t, &perm).unwrap();
            prop_assert_eq!(fast, slow);
        }
    }
}
