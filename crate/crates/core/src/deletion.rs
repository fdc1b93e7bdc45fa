//! Deletion schedules `k*(m)` and per-time deleted index sets.
//!
//! Time grid is `t_g = g / grid_size`, `g = 0..=grid_size`, with prefix
//! length `m_g = ⌊n g / grid_size⌋` computed in integer arithmetic. Indices
//! in a plan are 1-based, matching `J_m = {1, ..., m}`.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::SeededStream;

/// How many indices are deleted from a prefix of length `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeletionSchedule {
    None,
    /// `k*(m) = min(k, m - 1)`.
    FixedK { k: usize },
    /// `k*(m) = min(⌊m^r⌋, m - 1)` with `0 < r < 1`.
    PowerLaw { r: f64 },
}

impl DeletionSchedule {
    pub fn power_law(r: f64) -> Result<Self> {
        let s = DeletionSchedule::PowerLaw { r };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DeletionSchedule::PowerLaw { r } if !(r > 0.0 && r < 1.0) => {
                Err(Error::config(format!("power_law exponent must lie in (0, 1), got {r}")))
            }
            _ => Ok(()),
        }
    }

    /// Number of deleted indices from `J_m`; always `< m` (and 0 for `m = 0`).
    pub fn k_star(&self, m: usize) -> usize {
        if m == 0 {
            return 0;
        }
        let raw = match *self {
            DeletionSchedule::None => 0,
            DeletionSchedule::FixedK { k } => k,
            DeletionSchedule::PowerLaw { r } => {
                // Nudge so exact powers like 10000^0.5 don't floor to 99.
                ((m as f64).powf(r) * (1.0 + 1e-12)).floor() as usize
            }
        };
        raw.min(m - 1)
    }

    pub fn name(&self) -> &'static str {
        match self {
            DeletionSchedule::None => "none",
            DeletionSchedule::FixedK { .. } => "fixed_k",
            DeletionSchedule::PowerLaw { .. } => "power_law",
        }
    }
}

/// `k*(n) / n`; tends to 0 under the negligibility condition.
pub fn negligibility_ratio(schedule: &DeletionSchedule, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    schedule.k_star(n) as f64 / n as f64
}

/// Rule used to pick which indices of `J_{m_g}` are deleted at each grid time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// The first `k*` indices.
    Prefix,
    /// The last `k*` indices of the prefix.
    Suffix,
    /// A fresh uniform `k*`-subset at every grid time.
    RandomPerTime,
    /// One uniform subset `D` of `J_n` of size `k*(n)`, restricted to each prefix.
    StaticRandom,
}

impl Selection {
    pub const ALL: [Selection; 4] =
        [Selection::Prefix, Selection::Suffix, Selection::RandomPerTime, Selection::StaticRandom];

    pub fn as_str(self) -> &'static str {
        match self {
            Selection::Prefix => "prefix",
            Selection::Suffix => "suffix",
            Selection::RandomPerTime => "random_per_time",
            Selection::StaticRandom => "static_random",
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Selection::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown selection `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum DeletedSets {
    /// `deleted(g) = {1..ks[g]}`.
    Prefix { ks: Vec<usize> },
    /// `deleted(g) = {m_g - ks[g] + 1 .. m_g}`.
    Suffix { ks: Vec<usize> },
    /// `deleted(g) = D ∩ {1..m_g}`, `D` sorted.
    Static { set: Vec<usize> },
    /// Explicit sorted sets, flattened; row `g` is `indices[offsets[g]..offsets[g+1]]`.
    Explicit { offsets: Vec<usize>, indices: Vec<u32> },
}

/// Deleted index sets for every grid time of one replication.
///
/// Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DeletionPlan {
    n: usize,
    grid_size: usize,
    selection: Selection,
    sets: DeletedSets,
    warnings: Vec<String>,
}

impl DeletionPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn selection(&self) -> Selection {
        self.selection
    }

    /// Non-fatal notes raised while building, e.g. a clamped `k`.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Prefix length `m_g = ⌊n g / grid_size⌋`.
    pub fn m(&self, g: usize) -> usize {
        prefix_len(self.n, g, self.grid_size)
    }

    /// Number of indices deleted at grid time `g`.
    pub fn deleted_len(&self, g: usize) -> usize {
        match &self.sets {
            DeletedSets::Prefix { ks } | DeletedSets::Suffix { ks } => ks[g],
            DeletedSets::Static { set } => set.partition_point(|&i| i <= self.m(g)),
            DeletedSets::Explicit { offsets, .. } => offsets[g + 1] - offsets[g],
        }
    }

    /// Sorted 1-based deleted indices at grid time `g`.
    pub fn deleted(&self, g: usize) -> Vec<usize> {
        assert!(g <= self.grid_size, "grid index {g} out of range");
        match &self.sets {
            DeletedSets::Prefix { ks } => (1..=ks[g]).collect(),
            DeletedSets::Suffix { ks } => {
                let m = self.m(g);
                (m - ks[g] + 1..=m).collect()
            }
            DeletedSets::Static { set } => set[..self.deleted_len(g)].to_vec(),
            DeletedSets::Explicit { offsets, indices } => {
                indices[offsets[g]..offsets[g + 1]].iter().map(|&i| i as usize).collect()
            }
        }
    }

    /// `Σ_{i ∈ deleted(g)} w_i` for every grid time, where `w` is indexed from 0.
    ///
    /// `prefix` must be the running sums of `w` (`prefix[0] = 0`, length `n + 1`).
    pub(crate) fn deleted_sums(&self, weights: &[f64], prefix: &[f64]) -> Vec<f64> {
        debug_assert_eq!(weights.len(), self.n);
        debug_assert_eq!(prefix.len(), self.n + 1);
        let grid = 0..=self.grid_size;
        match &self.sets {
            DeletedSets::Prefix { ks } => grid.map(|g| prefix[ks[g]]).collect(),
            DeletedSets::Suffix { ks } => grid
                .map(|g| {
                    let m = self.m(g);
                    if ks[g] == 0 {
                        0.0
                    } else {
                        prefix[m] - prefix[m - ks[g]]
                    }
                })
                .collect(),
            DeletedSets::Static { set } => {
                let mut running = Vec::with_capacity(set.len() + 1);
                running.push(0.0);
                let mut acc = 0.0;
                for &i in set {
                    acc += weights[i - 1];
                    running.push(acc);
                }
                grid.map(|g| running[self.deleted_len(g)]).collect()
            }
            DeletedSets::Explicit { offsets, indices } => grid
                .map(|g| {
                    indices[offsets[g]..offsets[g + 1]]
                        .iter()
                        .map(|&i| weights[i as usize - 1])
                        .sum()
                })
                .collect(),
        }
    }

    /// Checks the structural invariants: sorted, unique, inside `{1..m_g}`.
    pub fn validate(&self) -> Result<()> {
        for g in 0..=self.grid_size {
            let m = self.m(g);
            let set = self.deleted(g);
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::domain(format!("deleted({g}) is not strictly increasing")));
            }
            if set.iter().any(|&i| i == 0 || i > m) {
                return Err(Error::domain(format!("deleted({g}) escapes {{1..{m}}}")));
            }
            // A static set D only has to leave something of J_n; its trace
            // on a short prefix may cover the whole prefix.
            let static_prefix = self.selection == Selection::StaticRandom && g < self.grid_size;
            if m > 0 && set.len() >= m && !static_prefix {
                return Err(Error::domain(format!("deleted({g}) removes all {m} indices")));
            }
        }
        Ok(())
    }

    /// Serializes as `{"n":…,"grid":…,"selection":…,"deleted":[[…],…]}`.
    pub fn to_json(&self) -> Result<String> {
        let wire = PlanWire {
            n: self.n,
            grid: self.grid_size,
            selection: self.selection,
            deleted: (0..=self.grid_size).map(|g| self.deleted(g)).collect(),
        };
        Ok(serde_json::to_string(&wire)?)
    }

    /// Rebuilds a plan from [`DeletionPlan::to_json`] output.
    pub fn from_json(text: &str) -> Result<Self> {
        let wire: PlanWire = serde_json::from_str(text)?;
        if wire.n == 0 || wire.grid == 0 {
            return Err(Error::domain("plan n and grid must be positive"));
        }
        if wire.deleted.len() != wire.grid + 1 {
            return Err(Error::domain(format!(
                "plan has {} rows, expected grid + 1 = {}",
                wire.deleted.len(),
                wire.grid + 1
            )));
        }
        let plan = DeletionPlan {
            n: wire.n,
            grid_size: wire.grid,
            selection: wire.selection,
            sets: explicit(wire.deleted.into_iter().map(|row| {
                row.into_iter().map(|i| u32::try_from(i).unwrap_or(u32::MAX)).collect()
            })),
            warnings: Vec::new(),
        };
        plan.validate()?;
        Ok(plan)
    }

    /// A plan that deletes nothing.
    pub fn empty(n: usize, grid_size: usize) -> Result<Self> {
        check_sizes(n, grid_size)?;
        Ok(DeletionPlan {
            n,
            grid_size,
            selection: Selection::Prefix,
            sets: DeletedSets::Prefix { ks: vec![0; grid_size + 1] },
            warnings: Vec::new(),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct PlanWire {
    n: usize,
    grid: usize,
    selection: Selection,
    deleted: Vec<Vec<usize>>,
}

fn explicit(rows: impl Iterator<Item = Vec<u32>>) -> DeletedSets {
    let mut offsets = vec![0];
    let mut indices = Vec::new();
    for row in rows {
        indices.extend(row);
        offsets.push(indices.len());
    }
    DeletedSets::Explicit { offsets, indices }
}

pub(crate) fn prefix_len(n: usize, g: usize, grid_size: usize) -> usize {
    ((n as u128 * g as u128) / grid_size as u128) as usize
}

fn check_sizes(n: usize, grid_size: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if grid_size == 0 {
        return Err(Error::domain("grid_size must be at least 1"));
    }
    Ok(())
}

fn clamp_warnings(schedule: &DeletionSchedule, n: usize) -> Vec<String> {
    match *schedule {
        DeletionSchedule::FixedK { k } if k >= n => {
            vec![format!("fixed_k k={k} >= n={n}; clamped to k*(m) = m - 1")]
        }
        _ => Vec::new(),
    }
}

/// Uniform `k`-subset of `{1..m}`, sorted.
fn random_subset<R: Rng + ?Sized>(rng: &mut R, m: usize, k: usize) -> Vec<u32> {
    let mut picked: Vec<u32> =
        index::sample(rng, m, k).into_iter().map(|i| (i + 1) as u32).collect();
    picked.sort_unstable();
    picked
}

/// Probability that index `i` is retained at both prefix lengths
/// `m_s <= m_t`, for plans built by [`make_plan`].
///
/// `random_per_time` sets at different prefix lengths are independent draws;
/// equal lengths are treated as the same draw.
pub fn retention_probability(
    schedule: &DeletionSchedule,
    selection: Selection,
    n: usize,
    i: usize,
    m_s: usize,
    m_t: usize,
) -> f64 {
    if i == 0 || i > m_s.min(m_t) {
        return 0.0;
    }
    let (ks, kt) = (schedule.k_star(m_s), schedule.k_star(m_t));
    match selection {
        Selection::Prefix => f64::from(u8::from(i > ks && i > kt)),
        Selection::Suffix => f64::from(u8::from(i + ks <= m_s && i + kt <= m_t)),
        Selection::StaticRandom => 1.0 - schedule.k_star(n) as f64 / n as f64,
        Selection::RandomPerTime => {
            let ps = 1.0 - ks as f64 / m_s as f64;
            if m_s == m_t {
                ps
            } else {
                ps * (1.0 - kt as f64 / m_t as f64)
            }
        }
    }
}

/// Builds the deleted sets for every grid time under `selection`.
pub fn make_plan(
    schedule: &DeletionSchedule,
    selection: Selection,
    n: usize,
    grid_size: usize,
    stream: SeededStream,
) -> Result<DeletionPlan> {
    schedule.validate()?;
    check_sizes(n, grid_size)?;
    if n > u32::MAX as usize {
        return Err(Error::domain("n exceeds the supported index range"));
    }
    let ks: Vec<usize> =
        (0..=grid_size).map(|g| schedule.k_star(prefix_len(n, g, grid_size))).collect();
    let sets = match selection {
        Selection::Prefix => DeletedSets::Prefix { ks },
        Selection::Suffix => DeletedSets::Suffix { ks },
        Selection::StaticRandom => {
            let mut rng = stream.rng();
            let set = random_subset(&mut rng, n, schedule.k_star(n))
                .into_iter()
                .map(|i| i as usize)
                .collect();
            DeletedSets::Static { set }
        }
        Selection::RandomPerTime => {
            let mut rng = stream.rng();
            explicit((0..=grid_size).map(|g| {
                random_subset(&mut rng, prefix_len(n, g, grid_size), ks[g])
            }))
        }
    };
    Ok(DeletionPlan { n, grid_size, selection, sets, warnings: clamp_warnings(schedule, n) })
}

/// A `random_per_time` plan whose consecutive deleted sets share indices.
///
/// At each grid time `g` the plan keeps `min(⌈overlap_fraction · k*(m_g)⌉,
/// |deleted(g-1)|)` indices of the previous set (chosen uniformly) and fills
/// the rest uniformly from the remaining indices of `{1..m_g}`. With
/// `overlap_fraction = 1` the sets are nested whenever sizes allow.
pub fn make_overlapping_pair(
    schedule: &DeletionSchedule,
    n: usize,
    grid_size: usize,
    overlap_fraction: f64,
    stream: SeededStream,
) -> Result<DeletionPlan> {
    schedule.validate()?;
    check_sizes(n, grid_size)?;
    if !(overlap_fraction > 0.0 && overlap_fraction <= 1.0) {
        return Err(Error::config(format!(
            "overlap_fraction must lie in (0, 1], got {overlap_fraction}"
        )));
    }
    if schedule.k_star(n) == 0 {
        return Err(Error::domain("overlap is impossible when k*(n) = 0"));
    }
    let mut rng = stream.rng();
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(grid_size + 1);
    let mut prev: Vec<u32> = Vec::new();
    for g in 0..=grid_size {
        let m = prefix_len(n, g, grid_size);
        let k = schedule.k_star(m);
        let want = (overlap_fraction * k as f64).ceil() as usize;
        let keep = want.min(prev.len()).min(k);
        let mut chosen: Vec<u32> =
            index::sample(&mut rng, prev.len(), keep).into_iter().map(|i| prev[i]).collect();
        chosen.sort_unstable();
        let fill = k - keep;
        if fill > 0 {
            let candidates: Vec<u32> =
                (1..=m as u32).filter(|i| chosen.binary_search(i).is_err()).collect();
            chosen.extend(index::sample(&mut rng, candidates.len(), fill).into_iter().map(|i| candidates[i]));
            chosen.sort_unstable();
        }
        rows.push(chosen.clone());
        prev = chosen;
    }
    Ok(DeletionPlan {
        n,
        grid_size,
        selection: Selection::RandomPerTime,
        sets: explicit(rows.into_iter()),
        warnings: clamp_warnings(schedule, n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stream() -> SeededStream {
        SeededStream::new(42, 0)
    }

    #[test]
    fn zero_deletion_everywhere() {
        for sel in Selection::ALL {
            let plan = make_plan(&DeletionSchedule::FixedK { k: 0 }, sel, 10, 10, stream()).unwrap();
            for g in 0..=10 {
                assert!(plan.deleted(g).is_empty(), "{sel} g={g}");
            }
        }
    }

    #[test]
    fn prefix_rule_small() {
        let plan =
            make_plan(&DeletionSchedule::FixedK { k: 1 }, Selection::Prefix, 4, 4, stream()).unwrap();
        let sets: Vec<Vec<usize>> = (1..=4).map(|g| plan.deleted(g)).collect();
        assert_eq!(sets, vec![vec![], vec![1], vec![1], vec![1]]);
        assert!(plan.deleted(0).is_empty());
    }

    #[test]
    fn suffix_rule_small() {
        let plan =
            make_plan(&DeletionSchedule::FixedK { k: 2 }, Selection::Suffix, 6, 3, stream()).unwrap();
        assert_eq!(plan.deleted(1), vec![2]);
        assert_eq!(plan.deleted(2), vec![3, 4]);
        assert_eq!(plan.deleted(3), vec![5, 6]);
    }

    #[test]
    fn power_law_sqrt() {
        let s = DeletionSchedule::power_law(0.5).unwrap();
        assert_eq!(s.k_star(10_000), 100);
        assert_eq!(negligibility_ratio(&s, 10_000), 0.01);
        assert_eq!(negligibility_ratio(&s, 100), 0.1);
        assert_eq!(negligibility_ratio(&DeletionSchedule::FixedK { k: 5 }, 1000), 0.005);
        assert!(DeletionSchedule::power_law(1.0).is_err());
        assert!(DeletionSchedule::power_law(0.0).is_err());
        assert!(make_plan(
            &DeletionSchedule::PowerLaw { r: 1.5 },
            Selection::Prefix,
            10,
            10,
            stream()
        )
        .is_err());
    }

    #[test]
    fn power_law_ratio_decays_on_doubling_sequence() {
        let s = DeletionSchedule::power_law(0.9).unwrap();
        let ratios: Vec<f64> = (10..=20).map(|p| negligibility_ratio(&s, 1 << p)).collect();
        // Reference: ⌊2^{0.9p}⌋ / 2^p evaluated directly.
        for (p, &r) in (10..=20).zip(&ratios) {
            let direct = (2f64.powf(0.9 * p as f64)).floor() / 2f64.powi(p);
            assert!((r - direct).abs() < 1e-12);
        }
        assert!(ratios.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn clamp_emits_warning() {
        let plan =
            make_plan(&DeletionSchedule::FixedK { k: 10 }, Selection::Prefix, 5, 5, stream()).unwrap();
        assert_eq!(plan.warnings().len(), 1);
        assert_eq!(plan.deleted(5), vec![1, 2, 3, 4]);
        plan.validate().unwrap();
    }

    #[test]
    fn full_overlap_is_nested() {
        let s = DeletionSchedule::FixedK { k: 3 };
        let plan = make_overlapping_pair(&s, 40, 20, 1.0, stream()).unwrap();
        plan.validate().unwrap();
        for g in 0..20 {
            let (a, b) = (plan.deleted(g), plan.deleted(g + 1));
            if plan.m(g + 1) > plan.m(g) && plan.m(g) >= 3 {
                assert!(a.iter().all(|i| b.contains(i)), "g={g}: {a:?} ⊄ {b:?}");
            }
        }
    }

    #[test]
    fn half_overlap_meets_minimum() {
        let s = DeletionSchedule::FixedK { k: 4 };
        let plan = make_overlapping_pair(&s, 200, 50, 0.5, SeededStream::new(5, 9)).unwrap();
        // Brute-force intersection of every consecutive pair.
        for g in 1..50 {
            let (a, b) = (plan.deleted(g), plan.deleted(g + 1));
            let shared = a.iter().filter(|i| b.contains(i)).count();
            if plan.m(g) > 4 {
                assert!(shared >= 2, "g={g}: shared {shared}");
            }
            assert_eq!(b.len(), s.k_star(plan.m(g + 1)));
        }
    }

    #[test]
    fn retention_matches_plans() {
        let s = DeletionSchedule::FixedK { k: 3 };
        let (n, grid, gs, gt) = (12, 4, 2, 3);
        for sel in Selection::ALL {
            let reps = 4000;
            let mut hits = vec![0usize; n + 1];
            for r in 0..reps {
                let plan = make_plan(&s, sel, n, grid, SeededStream::new(9, r)).unwrap();
                let (ds, dt) = (plan.deleted(gs), plan.deleted(gt));
                for i in 1..=plan.m(gs) {
                    if !ds.contains(&i) && !dt.contains(&i) {
                        hits[i] += 1;
                    }
                }
            }
            for (i, &h) in hits.iter().enumerate().skip(1) {
                let p = retention_probability(&s, sel, n, i, 6, 9);
                let freq = h as f64 / reps as f64;
                assert!((freq - p).abs() < 0.04, "{sel} i={i}: {freq} vs {p}");
            }
        }
    }

    #[test]
    fn overlap_errors() {
        assert!(matches!(
            make_overlapping_pair(&DeletionSchedule::None, 10, 10, 1.0, stream()),
            Err(Error::Domain(_))
        ));
        assert!(make_overlapping_pair(&DeletionSchedule::FixedK { k: 2 }, 10, 10, 0.0, stream())
            .is_err());
    }

    #[test]
    fn json_round_trip_and_shape() {
        let plan = make_plan(
            &DeletionSchedule::FixedK { k: 2 },
            Selection::RandomPerTime,
            12,
            4,
            stream(),
        )
        .unwrap();
        let text = plan.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n"], 12);
        assert_eq!(v["grid"], 4);
        assert_eq!(v["selection"], "random_per_time");
        assert_eq!(v["deleted"].as_array().unwrap().len(), 5);
        let back = DeletionPlan::from_json(&text).unwrap();
        for g in 0..=4 {
            assert_eq!(back.deleted(g), plan.deleted(g));
        }
        assert!(DeletionPlan::from_json(r#"{"n":3,"grid":1,"selection":"prefix","deleted":[[],[4]]}"#)
            .is_err());
    }

    fn schedules() -> impl Strategy<Value = DeletionSchedule> {
        prop_oneof![
            Just(DeletionSchedule::None),
            (0usize..80).prop_map(|k| DeletionSchedule::FixedK { k }),
            (0.05f64..0.95).prop_map(|r| DeletionSchedule::PowerLaw { r }),
        ]
    }

    proptest! {
        #[test]
        fn plan_invariants(
            schedule in schedules(),
            sel in prop::sample::select(Selection::ALL.to_vec()),
            n in 1usize..=64,
            grid in 1usize..=70,
            seed in any::<u64>(),
        ) {
            let plan = make_plan(&schedule, sel, n, grid, SeededStream::new(seed, 1)).unwrap();
            plan.validate().unwrap();
            for g in 0..=grid {
                let m = plan.m(g);
                let set = plan.deleted(g);
                prop_assert!(set.iter().all(|&i| (1..=m).contains(&i)));
                if sel == Selection::StaticRandom {
                    let full = plan.deleted(grid);
                    let expect: Vec<usize> = full.into_iter().filter(|&i| i <= m).collect();
                    prop_assert_eq!(&set, &expect);
                    if g < grid {
                        let next = plan.deleted(g + 1);
                        prop_assert!(set.iter().all(|i| next.contains(i)));
                    }
                } else {
                    prop_assert_eq!(set.len(), schedule.k_star(m));
                }
            }
        }

        #[test]
        fn power_law_ratio_bound(r in 0.01f64..0.99, n in 1usize..200_000) {
            let s = DeletionSchedule::PowerLaw { r };
            let bound = (n as f64).powf(r - 1.0) + 1.0 / n as f64;
            prop_assert!(negligibility_ratio(&s, n) <= bound);
        }

        #[test]
        fn deleted_sums_match_materialized(
            schedule in schedules(),
            sel in prop::sample::select(Selection::ALL.to_vec()),
            n in 1usize..=64,
            grid in 1usize..=20,
            seed in any::<u64>(),
        ) {
            let plan = make_plan(&schedule, sel, n, grid, SeededStream::new(seed, 2)).unwrap();
            let w: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let mut prefix = vec![0.0];
            for &x in &w { prefix.push(prefix.last().unwrap() + x); }
            let fast = plan.deleted_sums(&w, &prefix);
            for g in 0..=grid {
                let slow: f64 = plan.deleted(g).iter().map(|&i| w[i - 1]).sum();
                prop_assert!((fast[g] - slow).abs() < 1e-12);
            }
        }
    }
}
