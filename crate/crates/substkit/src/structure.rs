//! Structural invariants of a substitution: column family trace, column
//! number, synchronizing sets, height with a coloring certificate, pure
//! base, classification flags, and the periodic-approximation profile.

use crate::error::{Error, Result};
use crate::subst::{FixedPointHandle, Substitution, Symbol, Word};
use std::collections::HashMap;

/// Structure analysis tracks letter subsets as bitmasks.
pub const MAX_STRUCT_ALPHABET: usize = 128;

/// A subset of the alphabet, at most 128 letters.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LetterSet(pub u128);

impl LetterSet {
    pub fn empty() -> Self {
        LetterSet(0)
    }

    pub fn singleton(a: Symbol) -> Self {
        LetterSet(1u128 << a.index())
    }

    pub fn insert(&mut self, a: Symbol) {
        self.0 |= 1u128 << a.index();
    }

    pub fn contains(&self, a: Symbol) -> bool {
        self.0 >> a.index() & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn min_member(&self) -> Option<Symbol> {
        if self.0 == 0 {
            None
        } else {
            Some(Symbol(self.0.trailing_zeros()))
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..128u32).filter(|i| self.0 >> i & 1 == 1).map(Symbol)
    }

    pub fn union(self, other: LetterSet) -> LetterSet {
        LetterSet(self.0 | other.0)
    }

    pub fn intersect(self, other: LetterSet) -> LetterSet {
        LetterSet(self.0 & other.0)
    }

    /// Display form `{a,b}` using the substitution's letter names.
    pub fn name(&self, sub: &Substitution) -> String {
        let mut out = String::from("{");
        for (i, a) in self.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(sub.name(a));
        }
        out.push('}');
        out
    }
}

fn check_alphabet_size(sub: &Substitution) -> Result<()> {
    if sub.alphabet_len() > MAX_STRUCT_ALPHABET {
        return Err(Error::AlphabetTooLarge {
            len: sub.alphabet_len(),
            max: MAX_STRUCT_ALPHABET,
        });
    }
    Ok(())
}

/// Image of a letter set under one column step: `{rule(a)[j] : a in set}`.
pub fn column_step(sub: &Substitution, set: LetterSet, j: usize) -> LetterSet {
    let mut out = LetterSet::empty();
    for a in set.iter() {
        out.insert(sub.apply_digit(a, j));
    }
    out
}

/// The set of letters in column `j` of the substitution itself.
pub fn column_set(sub: &Substitution, j: usize) -> LetterSet {
    let mut out = LetterSet::empty();
    for a in sub.symbols() {
        out.insert(sub.apply_digit(a, j));
    }
    out
}

/// One level of the column family trace: the distinct column sets of the
/// k-th iterate, each with the smallest column index realizing it.
pub type Family = Vec<(LetterSet, u128)>;

/// The evolving family `F_k` of column sets, with cycle detection.
///
/// `families[k-1]` holds `F_k`; the sequence satisfies
/// `F_{s+period} = F_s` where `s = first_cycle_level`.
#[derive(Clone, Debug)]
pub struct ColumnFamilyTrace {
    pub families: Vec<Family>,
    pub first_cycle_level: usize,
    pub period: usize,
}

impl ColumnFamilyTrace {
    /// Levels that occur before the recurrent cycle starts.
    pub fn preperiod(&self) -> usize {
        self.first_cycle_level - 1
    }

    pub fn family(&self, k: usize) -> &Family {
        &self.families[k - 1]
    }

    /// Families of the recurrent cycle.
    pub fn cycle_families(&self) -> &[Family] {
        &self.families[self.first_cycle_level - 1..]
    }

    pub fn min_cardinality(&self) -> usize {
        self.families
            .iter()
            .flat_map(|f| f.iter().map(|(m, _)| m.len()))
            .min()
            .unwrap_or(0)
    }

    pub fn min_cardinality_at(&self, k: usize) -> usize {
        self.family(k).iter().map(|(m, _)| m.len()).min().unwrap_or(0)
    }
}

const MAX_TRACE_LEVELS: usize = 4096;

/// Iterates `F_{k+1} = { step(M, j) : M in F_k, j < lambda }` from the
/// columns of the substitution until the family repeats.
pub fn column_trace(sub: &Substitution) -> Result<ColumnFamilyTrace> {
    check_alphabet_size(sub)?;
    let lambda = sub.lambda();
    let mut families: Vec<Family> = Vec::new();
    let mut seen: HashMap<Vec<u128>, usize> = HashMap::new();

    let mut first: HashMap<LetterSet, u128> = HashMap::new();
    for j in 0..lambda {
        let m = column_set(sub, j);
        first.entry(m).or_insert(j as u128);
    }
    let mut cur: Family = {
        let mut v: Family = first.into_iter().collect();
        v.sort();
        v
    };

    loop {
        let key: Vec<u128> = cur.iter().map(|(m, _)| m.0).collect();
        if let Some(&level) = seen.get(&key) {
            return Ok(ColumnFamilyTrace {
                period: families.len() + 1 - level,
                families,
                first_cycle_level: level,
            });
        }
        seen.insert(key, families.len() + 1);
        families.push(cur.clone());
        if families.len() > MAX_TRACE_LEVELS {
            return Err(Error::InternalInvariantViolation(
                "column family trace exceeded level cap".into(),
            ));
        }
        let mut next: HashMap<LetterSet, u128> = HashMap::new();
        for &(m, wit) in &cur {
            for j in 0..lambda {
                let img = column_step(sub, m, j);
                let w = wit
                    .checked_mul(lambda as u128)
                    .and_then(|x| x.checked_add(j as u128))
                    .ok_or_else(|| {
                        Error::InternalInvariantViolation("column witness overflow".into())
                    })?;
                let e = next.entry(img).or_insert(w);
                if w < *e {
                    *e = w;
                }
            }
        }
        let mut v: Family = next.into_iter().collect();
        v.sort();
        cur = v;
    }
}

/// The column number: minimal cardinality of a column set over all iterates.
pub fn column_number(sub: &Substitution) -> Result<usize> {
    Ok(column_trace(sub)?.min_cardinality())
}

/// The family of letter sets realizing the column number, with witnesses
/// `(k, j)` at one common level k.
#[derive(Clone, Debug)]
pub struct SyncFamily {
    /// Sets in canonical order: by smallest member, then by bitmask.
    pub sets: Vec<LetterSet>,
    pub c: usize,
    /// Common witness level: every set equals a column of the k-th iterate.
    pub witness_k: usize,
    /// Witness column index per set, aligned with `sets`.
    pub witness_j: Vec<u128>,
    pub covers_alphabet: bool,
    pub is_partition: bool,
}

impl SyncFamily {
    pub fn index_of(&self, set: LetterSet) -> Option<usize> {
        self.sets.iter().position(|&m| m == set)
    }
}

pub fn sync_family(sub: &Substitution) -> Result<SyncFamily> {
    let trace = column_trace(sub)?;
    sync_family_from_trace(sub, &trace)
}

pub fn sync_family_from_trace(sub: &Substitution, trace: &ColumnFamilyTrace) -> Result<SyncFamily> {
    let c = trace.min_cardinality();
    let mut sets: Vec<LetterSet> = trace
        .families
        .iter()
        .flat_map(|f| f.iter().filter(|(m, _)| m.len() == c).map(|(m, _)| *m))
        .collect();
    sets.sort_by_key(|m| (m.min_member().map(|s| s.index()).unwrap_or(0), m.0));
    sets.dedup();

    // Every minimal set recurs in every cycle family, so a common witness
    // level always exists among the stored families.
    let mut witness = None;
    for k in 1..=trace.families.len() {
        let fam = trace.family(k);
        let js: Option<Vec<u128>> = sets
            .iter()
            .map(|m| fam.iter().find(|(fm, _)| fm == m).map(|(_, j)| *j))
            .collect();
        if let Some(js) = js {
            witness = Some((k, js));
            break;
        }
    }
    let (witness_k, witness_j) = witness.ok_or_else(|| {
        Error::InternalInvariantViolation("no common witness level for the sync family".into())
    })?;

    let union = sets.iter().fold(LetterSet::empty(), |acc, m| acc.union(*m));
    let covers = union.len() == sub.alphabet_len();
    let disjoint = {
        let total: usize = sets.iter().map(|m| m.len()).sum();
        total == union.len()
    };
    // Closure under single-step column maps, with constant cardinality.
    for m in &sets {
        for j in 0..sub.lambda() {
            let img = column_step(sub, *m, j);
            if img.len() != c || !sets.contains(&img) {
                return Err(Error::InternalInvariantViolation(format!(
                    "sync family not closed at {} column {}",
                    m.name(sub),
                    j
                )));
            }
        }
    }
    if sub.is_primitive() && !covers {
        return Err(Error::InternalInvariantViolation(
            "sync family union does not cover a primitive alphabet".into(),
        ));
    }
    Ok(SyncFamily {
        sets,
        c,
        witness_k,
        witness_j,
        covers_alphabet: covers,
        is_partition: covers && disjoint,
    })
}

/// The substitution induced on the synchronizing family.
#[derive(Clone, Debug)]
pub struct SyncSubstitution {
    pub sub: Substitution,
    pub sets: Vec<LetterSet>,
    pub family: SyncFamily,
}

/// Builds the induced substitution on the synchronizing sets and enforces
/// its theorem-backed properties (column number 1, height 1, primitive).
pub fn synchronizing_part(sub: &Substitution) -> Result<SyncSubstitution> {
    let family = sync_family(sub)?;
    let names: Vec<String> = family.sets.iter().map(|m| m.name(sub)).collect();
    let rules: Vec<Vec<u32>> = family
        .sets
        .iter()
        .map(|m| {
            (0..sub.lambda())
                .map(|j| {
                    let img = column_step(sub, *m, j);
                    family
                        .index_of(img)
                        .map(|i| i as u32)
                        .ok_or_else(|| {
                            Error::InternalInvariantViolation(
                                "sync image set missing from family".into(),
                            )
                        })
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let tilde = Substitution::new(names, sub.lambda(), rules)
        .map_err(|e| Error::InternalInvariantViolation(format!("sync substitution: {e}")))?;

    if column_number(&tilde)? != 1 {
        return Err(Error::InternalInvariantViolation(
            "synchronizing part must have column number 1".into(),
        ));
    }
    if !tilde.is_primitive() {
        return Err(Error::InternalInvariantViolation(
            "synchronizing part must be primitive".into(),
        ));
    }
    if height(&tilde)?.h != 1 {
        return Err(Error::InternalInvariantViolation(
            "synchronizing part must have height 1".into(),
        ));
    }
    Ok(SyncSubstitution {
        sub: tilde,
        sets: family.sets.clone(),
        family,
    })
}

/// Height of the substitution, with the letter coloring that certifies it.
#[derive(Clone, Debug)]
pub struct HeightResult {
    pub h: usize,
    /// gcd of the return times of `u[0]` observed on a finite prefix
    /// (0 when the seed letter never returns there).
    pub observed_gcd: u64,
    /// Certified residue class mod `h` per letter; letters not reachable
    /// from the seed keep 0.
    pub coloring: Vec<usize>,
    pub reachable: Vec<bool>,
    pub certified: bool,
}

/// Largest `h` coprime to lambda dividing all return times of `u[0]`.
///
/// A candidate `m` is accepted exactly when the coloring
/// `f(seed) = 0`, `f(rule(a)[j]) = lambda*f(a) + j  (mod m)` closes
/// consistently over all letters reachable from the seed; consistency makes
/// `f(u[n]) = n mod m` hold for every n, so the largest consistent
/// candidate equals the height.
pub fn height(sub: &Substitution) -> Result<HeightResult> {
    let handle = sub.find_fixed_seed()?;
    height_of_handle(&handle)
}

pub fn height_of_handle(handle: &FixedPointHandle) -> Result<HeightResult> {
    let base = handle.base();
    let lambda = base.lambda() as u64;
    let n = base.alphabet_len();

    let prefix_len = (lambda.saturating_mul(lambda).saturating_mul(lambda) as usize)
        .clamp(10_000, 1_000_000);
    let prefix = handle.prefix(prefix_len)?;
    let seed = handle.seed();
    let mut g: u64 = 0;
    for (pos, &a) in prefix.iter().enumerate().skip(1) {
        if a == seed {
            g = gcd(g, pos as u64);
            if g == 1 {
                break;
            }
        }
    }

    let stripped = strip_common_factors(g, lambda);
    let candidates: Vec<u64> = if stripped >= 1 {
        let mut d = divisors(stripped);
        d.sort_unstable_by(|a, b| b.cmp(a));
        d
    } else {
        (1..=n as u64)
            .rev()
            .filter(|m| gcd(*m, lambda) == 1)
            .collect()
    };

    for m in candidates {
        if let Some((coloring, reachable)) = try_coloring(base, seed, m as usize) {
            return Ok(HeightResult {
                h: m as usize,
                observed_gcd: g,
                coloring,
                reachable,
                certified: true,
            });
        }
    }
    Err(Error::CertificationFailed)
}

/// BFS closure of the coloring law from the seed; `None` on conflict.
fn try_coloring(base: &Substitution, seed: Symbol, m: usize) -> Option<(Vec<usize>, Vec<bool>)> {
    let n = base.alphabet_len();
    let lambda = base.lambda();
    let mut color = vec![0usize; n];
    let mut known = vec![false; n];
    color[seed.index()] = 0;
    known[seed.index()] = true;
    let mut queue = vec![seed];
    while let Some(a) = queue.pop() {
        let ca = color[a.index()];
        for (j, &b) in base.rule(a).iter().enumerate() {
            let cb = (lambda * ca + j) % m;
            if known[b.index()] {
                if color[b.index()] != cb {
                    return None;
                }
            } else {
                color[b.index()] = cb;
                known[b.index()] = true;
                queue.push(b);
            }
        }
    }
    Some((color, known))
}

/// Checks the coloring law `f(rule(a)[j]) = lambda*f(a) + j (mod h)` on a
/// given substitution, restricted to reachable letters.
pub fn coloring_law_holds(sub: &Substitution, hr: &HeightResult) -> bool {
    for a in sub.symbols() {
        if !hr.reachable[a.index()] {
            continue;
        }
        for (j, &b) in sub.rule(a).iter().enumerate() {
            if !hr.reachable[b.index()] {
                return false;
            }
            if hr.coloring[b.index()] != (sub.lambda() * hr.coloring[a.index()] + j) % hr.h {
                return false;
            }
        }
    }
    true
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn strip_common_factors(mut g: u64, lambda: u64) -> u64 {
    if g == 0 {
        return 0;
    }
    loop {
        let d = gcd(g, lambda);
        if d == 1 {
            return g;
        }
        g /= d;
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out
}

/// The substitution induced on consecutive height-blocks of the fixed point.
#[derive(Clone, Debug)]
pub struct PureBase {
    pub sub: Substitution,
    /// Block contents per pure-base letter (each of length h).
    pub blocks: Vec<Word>,
    pub h: usize,
}

const MAX_PURE_BLOCKS: usize = 4096;

/// Rewrites the substitution on h-blocks `u[mh..(m+1)h)`; for height 1 the
/// substitution is returned unchanged.
pub fn pure_base(sub: &Substitution) -> Result<PureBase> {
    let handle = sub.find_fixed_seed()?;
    let hr = height_of_handle(&handle)?;
    pure_base_with_height(sub, &handle, hr.h)
}

pub fn pure_base_with_height(
    sub: &Substitution,
    handle: &FixedPointHandle,
    h: usize,
) -> Result<PureBase> {
    if h == 1 {
        return Ok(PureBase {
            sub: sub.clone(),
            blocks: sub.symbols().map(|a| Word(vec![a])).collect(),
            h: 1,
        });
    }
    let base = handle.base();
    let lambda = base.lambda();
    let seed_block = Word(handle.prefix(h)?.0);

    let mut blocks: Vec<Word> = vec![seed_block.clone()];
    let mut index: HashMap<Word, usize> = HashMap::new();
    index.insert(seed_block, 0);
    let mut rules: Vec<Vec<u32>> = Vec::new();
    let mut next = 0usize;
    while next < blocks.len() {
        let img = base.apply_word(&blocks[next]);
        let mut rule = Vec::with_capacity(lambda);
        for j in 0..lambda {
            let piece = Word(img[j * h..(j + 1) * h].to_vec());
            let id = match index.get(&piece) {
                Some(&id) => id,
                None => {
                    let id = blocks.len();
                    if id >= MAX_PURE_BLOCKS {
                        return Err(Error::InternalInvariantViolation(
                            "pure base block closure exceeded cap".into(),
                        ));
                    }
                    index.insert(piece.clone(), id);
                    blocks.push(piece);
                    id
                }
            };
            rule.push(id as u32);
        }
        rules.push(rule);
        next += 1;
    }
    let names: Vec<String> = blocks.iter().map(|w| base.word_string(w)).collect();
    let pure = Substitution::new(names, lambda, rules)
        .map_err(|e| Error::InternalInvariantViolation(format!("pure base: {e}")))?;
    if height(&pure)?.h != 1 {
        return Err(Error::InternalInvariantViolation(
            "pure base must have height 1".into(),
        ));
    }
    if sub.is_primitive() && !pure.is_primitive() {
        return Err(Error::InternalInvariantViolation(
            "pure base of a primitive substitution must be primitive".into(),
        ));
    }
    Ok(PureBase {
        sub: pure,
        blocks,
        h,
    })
}

/// Classification flags with the three structural numbers they derive from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub bijective: bool,
    pub quasi_bijective: bool,
    /// Column number equals height (discrete-spectrum regime).
    pub synchronizing_case: bool,
    pub c: usize,
    pub h: usize,
    pub c_pure: usize,
}

pub fn classify(sub: &Substitution) -> Result<Classification> {
    let trace = column_trace(sub)?;
    let c = trace.min_cardinality();
    let bijective = c == sub.alphabet_len();
    let quasi_bijective = trace
        .cycle_families()
        .iter()
        .all(|f| f.iter().all(|(m, _)| m.len() == c));
    let h = height(sub)?.h;
    let c_pure = column_number(&pure_base(sub)?.sub)?;
    Ok(Classification {
        bijective,
        quasi_bijective,
        synchronizing_case: c == h,
        c,
        h,
        c_pure,
    })
}

/// The three numbers of the factorization `c = h * c(pure base)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChIdentity {
    pub c: usize,
    pub h: usize,
    pub c_pure: usize,
}

/// Computes column number, height and the pure base's column number
/// independently and checks the factorization identity.
pub fn check_ch_identity(sub: &Substitution) -> Result<ChIdentity> {
    let c = column_number(sub)?;
    let h = height(sub)?.h;
    let c_pure = column_number(&pure_base(sub)?.sub)?;
    if c != h * c_pure {
        return Err(Error::IdentityViolation { c, h, c_pure });
    }
    Ok(ChIdentity { c, h, c_pure })
}

/// Counts of constant columns per iterate and their densities.
#[derive(Clone, Debug)]
pub struct WrapProfile {
    pub lambda: usize,
    /// `counts[k-1]` = number of positions `j < lambda^k` whose column of
    /// the k-th iterate is a single letter.
    pub counts: Vec<u128>,
    pub ratios: Vec<f64>,
    /// False when the column number exceeds 1; ratios then converge
    /// strictly below 1.
    pub c_is_one: bool,
}

/// Counts constant columns level by level. Positions are tracked as a
/// multiset of column sets, which agrees with a direct scan of the
/// materialized iterate but has no word-size limit.
pub fn wrap_profile(sub: &Substitution, k_max: usize) -> Result<WrapProfile> {
    check_alphabet_size(sub)?;
    assert!(k_max >= 1);
    let lambda = sub.lambda();
    let c_is_one = column_number(sub)? == 1;
    let mut counts = Vec::with_capacity(k_max);
    let mut ratios = Vec::with_capacity(k_max);
    let mut multiset: HashMap<LetterSet, u128> = HashMap::new();
    for j in 0..lambda {
        *multiset.entry(column_set(sub, j)).or_insert(0) += 1;
    }
    let mut denom = lambda as f64;
    for _k in 1..=k_max {
        let singles: u128 = multiset
            .iter()
            .filter(|(m, _)| m.len() == 1)
            .map(|(_, c)| *c)
            .sum();
        counts.push(singles);
        ratios.push(singles as f64 / denom);
        denom *= lambda as f64;
        let mut next: HashMap<LetterSet, u128> = HashMap::new();
        for (&m, &cnt) in &multiset {
            if m.len() == 1 {
                // Constant columns only spawn constant columns.
                let a = m.min_member().unwrap();
                for j in 0..lambda {
                    *next
                        .entry(LetterSet::singleton(sub.apply_digit(a, j)))
                        .or_insert(0) += cnt;
                }
            } else {
                for j in 0..lambda {
                    *next.entry(column_step(sub, m, j)).or_insert(0) += cnt;
                }
            }
        }
        multiset = next;
    }
    Ok(WrapProfile {
        lambda,
        counts,
        ratios,
        c_is_one,
    })
}

/// Finite-horizon upper estimate of the Weyl pseudo-metric: the worst
/// mismatch density over all windows of the given length.
pub fn dw_estimate(a: &[Symbol], b: &[Symbol], window: usize) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if window == 0 || a.len() < 2 * window {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: 2 * window,
        });
    }
    let mut mismatches = 0usize;
    for i in 0..window {
        if a[i] != b[i] {
            mismatches += 1;
        }
    }
    let mut worst = mismatches;
    for m in 1..=a.len() - window {
        if a[m - 1] != b[m - 1] {
            mismatches -= 1;
        }
        if a[m + window - 1] != b[m + window - 1] {
            mismatches += 1;
        }
        worst = worst.max(mismatches);
    }
    Ok(worst as f64 / window as f64)
}
