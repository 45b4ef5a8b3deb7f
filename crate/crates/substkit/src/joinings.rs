//! The joining tower over a substitution: generic substitution joinings,
//! the join with the synchronizing part, its ordered renaming on
//! `{0..c-1} x X`, the permutation-group extension on `G x X`, and the
//! synchronizing sliding-block factor together with its periodic join.

use crate::error::{Error, Result};
use crate::structure::{
    column_number, height, height_of_handle, synchronizing_part, HeightResult, LetterSet,
    SyncSubstitution,
};
use crate::subst::{FixedPointHandle, Substitution, Symbol, DEFAULT_WORD_LIMIT};
use std::collections::HashMap;

/// A permutation of `{0..degree-1}`, stored as its image table.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Permutation(Vec<u32>);

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation((0..degree as u32).collect())
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i as usize >= n || seen[i as usize] {
                return Err(Error::InternalInvariantViolation(
                    "image table is not a bijection".into(),
                ));
            }
            seen[i as usize] = true;
        }
        Ok(Permutation(images))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.0[x] as usize
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    /// `self . other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&x| self.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(x, &y)| x as u32 == y)
    }

    pub fn order(&self) -> usize {
        let mut p = self.clone();
        let mut k = 1;
        while !p.is_identity() {
            p = self.compose(&p);
            k += 1;
        }
        k
    }

    pub fn sign(&self) -> i32 {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut transpositions = 0usize;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.apply(x);
                len += 1;
            }
            transpositions += len - 1;
        }
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Cycle notation with fixed points omitted; the identity prints "id".
    pub fn cycle_notation(&self) -> String {
        let n = self.0.len();
        let wide = n > 10;
        let mut seen = vec![false; n];
        let mut out = String::new();
        for start in 0..n {
            if seen[start] || self.apply(start) == start {
                seen[start] = true;
                continue;
            }
            out.push('(');
            let mut x = start;
            let mut first = true;
            while !seen[x] {
                seen[x] = true;
                if wide && !first {
                    out.push(' ');
                }
                out.push_str(&x.to_string());
                first = false;
                x = self.apply(x);
            }
            out.push(')');
        }
        if out.is_empty() {
            "id".into()
        } else {
            out
        }
    }
}

/// A substitution over a closed subset of a product alphabet, acting
/// coordinatewise.
#[derive(Clone, Debug)]
pub struct JoinResult {
    pub sub: Substitution,
    /// Decoded pair per joined letter.
    pub pairs: Vec<(Symbol, Symbol)>,
    pub left_onto: bool,
    pub right_onto: bool,
    pub primitivity_witness: Option<u32>,
}

/// Joins two substitutions of equal length over the pair closure of the
/// given seeds. Projection surjectivity and primitivity are reported, not
/// assumed: generic joinings may fail both.
pub fn join(
    theta: &Substitution,
    zeta: &Substitution,
    seeds: &[(Symbol, Symbol)],
) -> Result<JoinResult> {
    if theta.lambda() != zeta.lambda() {
        return Err(Error::LengthMismatch {
            left: theta.lambda(),
            right: zeta.lambda(),
        });
    }
    if seeds.is_empty() {
        return Err(Error::EmptySeeds);
    }
    let lambda = theta.lambda();
    let mut pairs: Vec<(Symbol, Symbol)> = Vec::new();
    let mut index: HashMap<(Symbol, Symbol), usize> = HashMap::new();
    for &p in seeds {
        if p.0.index() >= theta.alphabet_len() || p.1.index() >= zeta.alphabet_len() {
            return Err(Error::IndexOutOfRange {
                index: p.0.index().max(p.1.index()),
                len: theta.alphabet_len().max(zeta.alphabet_len()),
            });
        }
        index.entry(p).or_insert_with(|| {
            pairs.push(p);
            pairs.len() - 1
        });
    }
    let mut rules: Vec<Vec<u32>> = Vec::new();
    let mut next = 0;
    while next < pairs.len() {
        let (a, b) = pairs[next];
        let mut rule = Vec::with_capacity(lambda);
        for j in 0..lambda {
            let child = (theta.apply_digit(a, j), zeta.apply_digit(b, j));
            let id = *index.entry(child).or_insert_with(|| {
                pairs.push(child);
                pairs.len() - 1
            });
            rule.push(id as u32);
        }
        rules.push(rule);
        next += 1;
    }
    let names: Vec<String> = pairs
        .iter()
        .map(|(a, b)| format!("({},{})", theta.name(*a), zeta.name(*b)))
        .collect();
    let sub = Substitution::new(names, lambda, rules)?;
    let mut left = vec![false; theta.alphabet_len()];
    let mut right = vec![false; zeta.alphabet_len()];
    for (a, b) in &pairs {
        left[a.index()] = true;
        right[b.index()] = true;
    }
    Ok(JoinResult {
        primitivity_witness: sub.primitivity_witness(),
        sub,
        pairs,
        left_onto: left.iter().all(|&x| x),
        right_onto: right.iter().all(|&x| x),
    })
}

/// Column-number and height bounds satisfied by every primitive joining.
#[derive(Clone, Debug)]
pub struct JoinBounds {
    pub c_left: usize,
    pub c_right: usize,
    pub c_join: usize,
    pub h_left: usize,
    pub h_right: usize,
    pub h_join: usize,
}

fn gcd64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd64(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd64(a, b) * b
}

/// Verifies `max(c,c') <= c(join) <= c*c'` and `lcm(h,h') | h(join)`.
pub fn join_bounds_check(
    theta: &Substitution,
    zeta: &Substitution,
    joined: &Substitution,
) -> Result<JoinBounds> {
    let b = JoinBounds {
        c_left: column_number(theta)?,
        c_right: column_number(zeta)?,
        c_join: column_number(joined)?,
        h_left: height(theta)?.h,
        h_right: height(zeta)?.h,
        h_join: height(joined)?.h,
    };
    if b.c_join < b.c_left.max(b.c_right) || b.c_join > b.c_left * b.c_right {
        return Err(Error::BoundViolation(format!(
            "column number {} outside [{}, {}]",
            b.c_join,
            b.c_left.max(b.c_right),
            b.c_left * b.c_right
        )));
    }
    if b.h_join as u64 % lcm(b.h_left as u64, b.h_right as u64) != 0 {
        return Err(Error::BoundViolation(format!(
            "height {} not divisible by lcm({}, {})",
            b.h_join, b.h_left, b.h_right
        )));
    }
    Ok(b)
}

/// The join of a substitution with its synchronizing part, over the pairs
/// `(a, M)` with `a` a member of `M`, normalized by the smallest power
/// whose rule for some pair starts with that pair.
#[derive(Clone, Debug)]
pub struct ThetaSyncJoin {
    /// The normalized joined substitution (length `lambda^power`).
    pub sub: Substitution,
    /// The matching power of the input substitution.
    pub base: Substitution,
    /// The matching power of the synchronizing part.
    pub sync_pow: Substitution,
    pub sync: SyncSubstitution,
    /// Decoded `(letter, set index)` per joined letter.
    pub pairs: Vec<(Symbol, usize)>,
    pub power: u32,
    /// Index of the seed pair `(a0, M0)` in `pairs`.
    pub seed: Symbol,
    pub seed_letter: Symbol,
    pub seed_set: usize,
}

impl ThetaSyncJoin {
    pub fn pair_index(&self, letter: Symbol, set: usize) -> Option<Symbol> {
        self.pairs
            .iter()
            .position(|&(a, m)| a == letter && m == set)
            .map(|i| Symbol(i as u32))
    }
}

pub fn theta_sync_join(sub: &Substitution) -> Result<ThetaSyncJoin> {
    let sync = synchronizing_part(sub)?;
    let pairs: Vec<(Symbol, usize)> = sync
        .sets
        .iter()
        .enumerate()
        .flat_map(|(m, set)| set.iter().map(move |a| (a, m)).collect::<Vec<_>>())
        .collect();
    let index: HashMap<(Symbol, usize), usize> =
        pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let lambda = sub.lambda();
    let names: Vec<String> = pairs
        .iter()
        .map(|(a, m)| format!("({},{})", sub.name(*a), sync.sets[*m].name(sub)))
        .collect();
    let rules: Vec<Vec<u32>> = pairs
        .iter()
        .map(|&(a, m)| {
            (0..lambda)
                .map(|j| {
                    let child = (
                        sub.apply_digit(a, j),
                        sync.sub.apply_digit(Symbol(m as u32), j).index(),
                    );
                    index.get(&child).map(|&i| i as u32).ok_or_else(|| {
                        Error::InternalInvariantViolation(
                            "pair alphabet not closed under column steps".into(),
                        )
                    })
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let joined = Substitution::new(names, lambda, rules)?;

    let handle = joined.find_fixed_seed()?;
    let power = handle.power_taken();
    let normalized = handle.base().clone();
    let base = sub.power(power)?;
    let sync_pow = sync.sub.power(power)?;
    let (seed_letter, seed_set) = pairs[handle.seed().index()];

    // Theorem checks: the joined substitution preserves height and column
    // number of the input.
    let h_in = height(sub)?.h;
    let h_join = height(&normalized)?.h;
    if h_join != h_in {
        return Err(Error::InternalInvariantViolation(format!(
            "sync join height {h_join} differs from input height {h_in}"
        )));
    }
    let c_in = column_number(sub)?;
    let c_join = column_number(&normalized)?;
    if c_join != c_in {
        return Err(Error::InternalInvariantViolation(format!(
            "sync join column number {c_join} differs from input {c_in}"
        )));
    }

    Ok(ThetaSyncJoin {
        sub: normalized,
        base,
        sync_pow,
        sync,
        pairs,
        power,
        seed: handle.seed(),
        seed_letter,
        seed_set,
    })
}

/// The renamed join over `{0..c-1} x X`, with the canonical ordering that
/// makes one iterated column restore the first coordinate.
#[derive(Clone, Debug)]
pub struct OrderedJoin {
    pub join: ThetaSyncJoin,
    /// The renamed substitution; letter `set*c + i` encodes `(i, set)`.
    pub sub: Substitution,
    pub c: usize,
    pub sets: Vec<LetterSet>,
    /// Index of the distinguished set containing the seed letter.
    pub m0: usize,
    /// Letters of each set sorted by rank: `members_by_rank[m][i]`.
    pub members_by_rank: Vec<Vec<Symbol>>,
    /// Rank of each base letter under the pullback order (letters outside
    /// the union of the sets, possible only without primitivity, get None).
    pub rank: Vec<Option<usize>>,
    /// Level of the synchronizing column (in powers of the join's length).
    pub k0: usize,
    /// Column index of the synchronizing column.
    pub j0: u128,
    /// Base-lambda digits of `j0`, most significant first.
    pub path0: Vec<usize>,
}

impl OrderedJoin {
    pub fn lambda(&self) -> usize {
        self.join.base.lambda()
    }

    #[inline]
    pub fn letter(&self, i: usize, m: usize) -> Symbol {
        Symbol((m * self.c + i) as u32)
    }

    #[inline]
    pub fn decode(&self, s: Symbol) -> (usize, usize) {
        (s.index() % self.c, s.index() / self.c)
    }

    /// Fixed point handle starting at `(0, M0)`.
    pub fn fixed_point_handle(&self) -> Result<FixedPointHandle> {
        FixedPointHandle::with_seed(&self.sub, self.letter(0, self.m0))
    }

    /// The inverse of the forward column bijection at `(M, j)`:
    /// `sigma(m) = n` exactly when the rule of `(n, M)` has first
    /// coordinate `m` at position `j`.
    pub fn column_permutation(&self, m: usize, j: usize) -> Permutation {
        let forward: Vec<u32> = (0..self.c)
            .map(|i| self.decode(self.sub.apply_digit(self.letter(i, m), j)).0 as u32)
            .collect();
        Permutation::from_images(forward)
            .expect("relative bijectivity of ordered join columns")
            .inverse()
    }

    /// Column permutation of the k-th iterate at column j, by digitwise
    /// composition along the synchronizing part's trajectory.
    pub fn sigma_k(&self, m: usize, k: usize, j: u128) -> Permutation {
        let lambda = self.lambda() as u128;
        let mut digits = vec![0usize; k];
        let mut x = j;
        for slot in (0..k).rev() {
            digits[slot] = (x % lambda) as usize;
            x /= lambda;
        }
        assert_eq!(x, 0, "column index must be below lambda^k");
        self.sigma_path(m, &digits)
    }

    pub fn sigma_path(&self, m: usize, digits: &[usize]) -> Permutation {
        let mut acc = Permutation::identity(self.c);
        let mut cur = m;
        for &d in digits {
            acc = acc.compose(&self.column_permutation(cur, d));
            cur = self.join.sync_pow.apply_digit(Symbol(cur as u32), d).index();
        }
        acc
    }

    /// Maps a sequence over the renamed alphabet back to base letters:
    /// `(i, M)` becomes the `(i+1)`-th smallest letter of `M`.
    pub fn project_to_theta(&self, seq: &[Symbol]) -> Result<Vec<Symbol>> {
        seq.iter()
            .map(|&s| {
                if s.index() >= self.sub.alphabet_len() {
                    return Err(Error::IndexOutOfRange {
                        index: s.index(),
                        len: self.sub.alphabet_len(),
                    });
                }
                let (i, m) = self.decode(s);
                Ok(self.members_by_rank[m][i])
            })
            .collect()
    }
}

/// Builds the ordered renaming. The synchronizing column `(k0, j0)` is the
/// first constant column of the synchronizing part, iterated to the power
/// that fixes the distinguished set pointwise; ranks are pulled back
/// through that column map, seed letter first, ties by letter index.
pub fn order_and_rename(sub: &Substitution) -> Result<OrderedJoin> {
    let join = theta_sync_join(sub)?;
    let base = &join.base;
    let sync_pow = &join.sync_pow;
    let c = join.sync.family.c;
    let sets = join.sync.sets.clone();
    let s = sets.len();
    let m0 = join.seed_set;
    let a0 = join.seed_letter;

    // Search for the first digit path making the set-to-set column map
    // constantly m0: breadth-first over the functions X -> X, digits in
    // ascending order so the first hit has the smallest (k, j).
    let lambda = base.lambda();
    let start: Vec<usize> = (0..s).collect();
    let constant_m0: Vec<usize> = vec![m0; s];
    let mut seen: HashMap<Vec<usize>, ()> = HashMap::new();
    let mut frontier: Vec<(Vec<usize>, Vec<usize>)> = vec![(start.clone(), Vec::new())];
    seen.insert(start, ());
    let mut found: Option<Vec<usize>> = None;
    'bfs: while !frontier.is_empty() {
        let mut next_frontier = Vec::new();
        for (profile, path) in &frontier {
            for d in 0..lambda {
                let img: Vec<usize> = profile
                    .iter()
                    .map(|&m| sync_pow.apply_digit(Symbol(m as u32), d).index())
                    .collect();
                let mut p = path.clone();
                p.push(d);
                if img == constant_m0 {
                    found = Some(p);
                    break 'bfs;
                }
                if !seen.contains_key(&img) {
                    seen.insert(img.clone(), ());
                    next_frontier.push((img, p));
                }
            }
        }
        frontier = next_frontier;
    }
    let path = found.ok_or_else(|| {
        Error::InternalInvariantViolation("no constant synchronizing column found".into())
    })?;

    // Iterate the column map to the order of its restriction to M0 so it
    // fixes M0 pointwise.
    let members: Vec<Symbol> = sets[m0].iter().collect();
    let pi = Permutation::from_images(
        members
            .iter()
            .map(|&a| {
                let y = base.apply_digits(a, &path);
                members
                    .iter()
                    .position(|&x| x == y)
                    .expect("constant column maps M0 into itself") as u32
            })
            .collect(),
    )?;
    let reps = pi.order();
    let mut path0 = Vec::with_capacity(path.len() * reps);
    for _ in 0..reps {
        path0.extend_from_slice(&path);
    }
    let k0 = path0.len();
    let mut j0: u128 = 0;
    for &d in &path0 {
        j0 = j0
            .checked_mul(lambda as u128)
            .and_then(|x| x.checked_add(d as u128))
            .ok_or_else(|| {
                Error::InternalInvariantViolation("synchronizing column index overflow".into())
            })?;
    }

    // Order on M0: seed letter first, the rest by letter index.
    let mut m0_order: Vec<Symbol> = vec![a0];
    m0_order.extend(sets[m0].iter().filter(|&a| a != a0));
    // Pullback rank through the pointwise-fixing column map.
    let mut rank: Vec<Option<usize>> = vec![None; base.alphabet_len()];
    let union = sets.iter().fold(LetterSet::empty(), |acc, m| acc.union(*m));
    for x in union.iter() {
        let y = base.apply_digits(x, &path0);
        let pos = m0_order.iter().position(|&z| z == y).ok_or_else(|| {
            Error::InternalInvariantViolation("order pullback left the distinguished set".into())
        })?;
        rank[x.index()] = Some(pos);
    }
    let mut members_by_rank: Vec<Vec<Symbol>> = Vec::with_capacity(s);
    for set in &sets {
        let mut v: Vec<Symbol> = set.iter().collect();
        v.sort_by_key(|a| rank[a.index()].expect("set members are ranked"));
        let distinct: std::collections::HashSet<usize> =
            v.iter().map(|a| rank[a.index()].unwrap()).collect();
        if distinct.len() != c {
            return Err(Error::InternalInvariantViolation(
                "rank is not complete on a synchronizing set".into(),
            ));
        }
        members_by_rank.push(v);
    }

    // Renamed rules.
    let names: Vec<String> = (0..s)
        .flat_map(|m| {
            let set_name = sets[m].name(sub);
            (0..c).map(move |i| format!("({i},{set_name})")).collect::<Vec<_>>()
        })
        .collect();
    let mut rules: Vec<Vec<u32>> = Vec::with_capacity(s * c);
    for m in 0..s {
        for i in 0..c {
            let x = members_by_rank[m][i];
            let rule: Vec<u32> = (0..base.lambda())
                .map(|j| {
                    let y = base.apply_digit(x, j);
                    let m2 = sync_pow.apply_digit(Symbol(m as u32), j).index();
                    let i2 = rank[y.index()].expect("image letter is ranked");
                    (m2 * c + i2) as u32
                })
                .collect();
            rules.push(rule);
        }
    }
    let renamed = Substitution::new(names, base.lambda(), rules)?;

    let oj = OrderedJoin {
        join,
        sub: renamed,
        c,
        sets,
        m0,
        members_by_rank,
        rank,
        k0,
        j0,
        path0,
    };

    // The synchronizing column must restore the first coordinate:
    // iterating the renamed substitution along path0 sends (i, M) to (i, M0).
    for m in 0..s {
        for i in 0..c {
            let got = oj.sub.apply_digits(oj.letter(i, m), &oj.path0);
            if got != oj.letter(i, m0) {
                return Err(Error::InternalInvariantViolation(
                    "synchronizing column does not restore the first coordinate".into(),
                ));
            }
        }
    }
    Ok(oj)
}

/// The permutation group generated by the column permutations, closed and
/// canonically ordered, with composition and inverse tables.
#[derive(Clone, Debug)]
pub struct GroupClosure {
    pub degree: usize,
    /// Elements sorted by image table; the identity is element 0.
    pub elements: Vec<Permutation>,
    /// Generator labels `(set, column, element index)`.
    pub generators: Vec<(usize, usize, usize)>,
    index: HashMap<Vec<u32>, usize>,
    compose: Vec<usize>,
    inverse: Vec<usize>,
}

impl GroupClosure {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn identity_index(&self) -> usize {
        self.index[Permutation::identity(self.degree).images()]
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(p.images()).copied()
    }

    #[inline]
    pub fn compose_idx(&self, a: usize, b: usize) -> usize {
        self.compose[a * self.elements.len() + b]
    }

    #[inline]
    pub fn inverse_idx(&self, a: usize) -> usize {
        self.inverse[a]
    }
}

fn factorial_capped(n: usize) -> u128 {
    let mut f: u128 = 1;
    for i in 2..=n as u128 {
        f = f.saturating_mul(i);
    }
    f
}

pub fn group_closure(oj: &OrderedJoin) -> Result<GroupClosure> {
    let degree = oj.c;
    let max = factorial_capped(degree);
    let mut gens: Vec<(usize, usize, Permutation)> = Vec::new();
    for m in 0..oj.sets.len() {
        for j in 0..oj.lambda() {
            gens.push((m, j, oj.column_permutation(m, j)));
        }
    }
    let mut elements = vec![Permutation::identity(degree)];
    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    index.insert(elements[0].images().to_vec(), 0);
    let mut next = 0;
    while next < elements.len() {
        let cur = elements[next].clone();
        for (_, _, g) in &gens {
            let prod = cur.compose(g);
            if !index.contains_key(prod.images()) {
                if elements.len() as u128 >= max {
                    return Err(Error::GroupTooLarge {
                        size: elements.len() + 1,
                        max,
                    });
                }
                index.insert(prod.images().to_vec(), elements.len());
                elements.push(prod);
            }
        }
        next += 1;
    }
    elements.sort_by(|a, b| a.images().cmp(b.images()));
    let index: HashMap<Vec<u32>, usize> = elements
        .iter()
        .enumerate()
        .map(|(i, p)| (p.images().to_vec(), i))
        .collect();
    let n = elements.len();
    let mut compose = vec![0usize; n * n];
    for a in 0..n {
        for b in 0..n {
            compose[a * n + b] = index[elements[a].compose(&elements[b]).images()];
        }
    }
    let inverse: Vec<usize> = elements.iter().map(|p| index[p.inverse().images()]).collect();
    let generators = gens
        .into_iter()
        .map(|(m, j, p)| (m, j, index[p.images()]))
        .collect();
    Ok(GroupClosure {
        degree,
        elements,
        generators,
        index,
        compose,
        inverse,
    })
}

/// The group extension over `G x X`, normalized so every rule for a pair
/// `(g, M0)` starts with that pair, with its height data: the residue
/// homomorphism on G and its kernel.
#[derive(Clone, Debug)]
pub struct GroupExtension {
    pub oj: OrderedJoin,
    pub group: GroupClosure,
    /// The normalized extension; letter `g*|X| + m` encodes `(g, m)`.
    pub sub: Substitution,
    /// Power of the ordered join taken for normalization.
    pub power: usize,
    pub lambda_hat: usize,
    /// Column permutations of the normalized extension, as group element
    /// indices: `sigma[m][j]`.
    pub sigma: Vec<Vec<usize>>,
    /// The synchronizing part matching `lambda_hat`.
    pub sync_hat: Substitution,
    pub h_hat: usize,
    /// Residue class per group element; a homomorphism onto Z/h_hat.
    pub f: Vec<usize>,
    /// Kernel of `f`, as sorted element indices.
    pub g0: Vec<usize>,
    pub height: HeightResult,
    pub seed: Symbol,
}

impl GroupExtension {
    pub fn set_count(&self) -> usize {
        self.oj.sets.len()
    }

    #[inline]
    pub fn letter(&self, g: usize, m: usize) -> Symbol {
        Symbol((g * self.set_count() + m) as u32)
    }

    #[inline]
    pub fn decode(&self, s: Symbol) -> (usize, usize) {
        (s.index() / self.set_count(), s.index() % self.set_count())
    }

    pub fn fixed_point_handle(&self) -> Result<FixedPointHandle> {
        FixedPointHandle::with_seed(&self.sub, self.seed)
    }

    /// The letterwise group translation `(g, M) -> (tau g, M)`.
    pub fn v_tau(&self, tau: &Permutation, seq: &[Symbol]) -> Result<Vec<Symbol>> {
        let t = self
            .group
            .index_of(tau)
            .ok_or_else(|| Error::NotInGroup(tau.cycle_notation()))?;
        seq.iter()
            .map(|&s| {
                if s.index() >= self.sub.alphabet_len() {
                    return Err(Error::IndexOutOfRange {
                        index: s.index(),
                        len: self.sub.alphabet_len(),
                    });
                }
                let (g, m) = self.decode(s);
                Ok(self.letter(self.group.compose_idx(t, g), m))
            })
            .collect()
    }
}

pub fn group_extension(oj: &OrderedJoin) -> Result<GroupExtension> {
    let group = group_closure(oj)?;
    let s = oj.sets.len();
    let lambda = oj.lambda();

    // Normalize by the order of the column permutation at (M0, 0) so the
    // rules at (g, M0) become prolongable.
    let t = oj.column_permutation(oj.m0, 0).order();
    let lambda_hat_u128 = (lambda as u128).checked_pow(t as u32).unwrap_or(u128::MAX);
    if lambda_hat_u128 > DEFAULT_WORD_LIMIT as u128 {
        return Err(Error::Overflow {
            needed: lambda_hat_u128,
            limit: DEFAULT_WORD_LIMIT,
        });
    }
    let lambda_hat = lambda_hat_u128 as usize;

    // Column permutations of increasing powers: the next level composes
    // the current table with the level-1 permutation at the reached set.
    let mut sigma: Vec<Vec<usize>> = Vec::with_capacity(s);
    let mut reached: Vec<Vec<usize>> = Vec::with_capacity(s);
    for m in 0..s {
        sigma.push(
            (0..lambda)
                .map(|j| {
                    group
                        .index_of(&oj.column_permutation(m, j))
                        .expect("generators lie in the closure")
                })
                .collect(),
        );
        reached.push(
            (0..lambda)
                .map(|j| oj.join.sync_pow.apply_digit(Symbol(m as u32), j).index())
                .collect(),
        );
    }
    let (sigma1, reached1) = (sigma.clone(), reached.clone());
    for _ in 1..t {
        let mut nsigma = Vec::with_capacity(s);
        let mut nreached = Vec::with_capacity(s);
        for m in 0..s {
            let mut row = Vec::with_capacity(sigma[m].len() * lambda);
            let mut sets_row = Vec::with_capacity(sigma[m].len() * lambda);
            for j in 0..sigma[m].len() {
                let mid = reached[m][j];
                for d in 0..lambda {
                    row.push(group.compose_idx(sigma[m][j], sigma1[mid][d]));
                    sets_row.push(reached1[mid][d]);
                }
            }
            nsigma.push(row);
            nreached.push(sets_row);
        }
        sigma = nsigma;
        reached = nreached;
    }

    let sync_hat = oj.join.sync_pow.power(t as u32)?;
    if sigma[oj.m0][0] != group.identity_index() {
        return Err(Error::InternalInvariantViolation(
            "normalization did not make the (M0, 0) column trivial".into(),
        ));
    }

    let base_sub = &oj.join.base;
    let names: Vec<String> = (0..group.len() * s)
        .map(|idx| {
            let g = idx / s;
            let m = idx % s;
            format!(
                "({},{})",
                group.elements[g].cycle_notation(),
                oj.sets[m].name(base_sub)
            )
        })
        .collect();
    let mut rules: Vec<Vec<u32>> = Vec::with_capacity(group.len() * s);
    for g in 0..group.len() {
        for m in 0..s {
            let rule: Vec<u32> = (0..lambda_hat)
                .map(|j| {
                    let g2 = group.compose_idx(g, sigma[m][j]);
                    let m2 = reached[m][j];
                    (g2 * s + m2) as u32
                })
                .collect();
            rules.push(rule);
        }
    }
    let hat = Substitution::new(names, lambda_hat, rules)?;
    let seed = Symbol((group.identity_index() * s + oj.m0) as u32);

    if !hat.is_primitive() {
        return Err(Error::InternalInvariantViolation(
            "group extension must be primitive".into(),
        ));
    }
    let c_hat = column_number(&hat)?;
    if c_hat != group.len() {
        return Err(Error::InternalInvariantViolation(format!(
            "group extension column number {} differs from |G| = {}",
            c_hat,
            group.len()
        )));
    }

    let handle = FixedPointHandle::with_seed(&hat, seed)?;
    let hr = height_of_handle(&handle)?;
    let h_hat = hr.h;
    // The coloring is constant in the set coordinate; read f off at M0.
    let mut f = vec![0usize; group.len()];
    for g in 0..group.len() {
        let c0 = hr.coloring[g * s + oj.m0];
        for m in 0..s {
            if hr.coloring[g * s + m] != c0 {
                return Err(Error::InternalInvariantViolation(
                    "height coloring depends on the set coordinate".into(),
                ));
            }
        }
        f[g] = c0;
    }
    for g1 in 0..group.len() {
        for g2 in 0..group.len() {
            if f[group.compose_idx(g1, g2)] != (f[g1] + f[g2]) % h_hat {
                return Err(Error::InternalInvariantViolation(
                    "height residue map is not a homomorphism".into(),
                ));
            }
        }
    }
    let g0: Vec<usize> = (0..group.len()).filter(|&g| f[g] == 0).collect();
    if g0.len() * h_hat != group.len() {
        return Err(Error::InternalInvariantViolation(
            "kernel index does not match the extension height".into(),
        ));
    }

    Ok(GroupExtension {
        oj: oj.clone(),
        group,
        sub: hat,
        power: t,
        lambda_hat,
        sigma,
        sync_hat,
        h_hat,
        f,
        g0,
        height: hr,
        seed,
    })
}

/// Searches for a column of some iterate of the extension that maps every
/// `(g, M0)` to `(g, M)`: breadth-first over `(group, set)` states.
/// Returns the level and its digit path.
pub fn find_kaem_witness(ge: &GroupExtension, m: usize) -> Result<(usize, Vec<usize>)> {
    let s = ge.set_count();
    let id = ge.group.identity_index();
    let target = (id, m);
    let n_letters = ge.group.len() * s;
    let bound = (n_letters * n_letters).saturating_sub(2 * n_letters) + 2;
    let mut frontier: Vec<((usize, usize), Vec<usize>)> = vec![((id, ge.oj.m0), Vec::new())];
    for _level in 1..=bound {
        let mut next: Vec<((usize, usize), Vec<usize>)> = Vec::new();
        let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
        for ((g, mm), path) in &frontier {
            for d in 0..ge.lambda_hat {
                let child = (
                    ge.group.compose_idx(*g, ge.sigma[*mm][d]),
                    ge.sync_hat.apply_digit(Symbol(*mm as u32), d).index(),
                );
                if seen.contains_key(&child) {
                    continue;
                }
                let mut p = path.clone();
                p.push(d);
                if child == target {
                    return Ok((p.len(), p));
                }
                seen.insert(child, ());
                next.push((child, p));
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Err(Error::InternalInvariantViolation(format!(
        "no synchronized return column found for set {m}"
    )))
}

/// The synchronizing sliding-block factor of the group extension, over the
/// alphabet of two-letter windows of its fixed point.
#[derive(Clone, Debug)]
pub struct EtaSubstitution {
    pub sub: Substitution,
    /// Decoded `(group element, set, next set)` per letter.
    pub letters: Vec<(usize, usize, usize)>,
    pub seed: Symbol,
    index: HashMap<(usize, usize, usize), usize>,
}

impl EtaSubstitution {
    pub fn fixed_point_handle(&self) -> Result<FixedPointHandle> {
        FixedPointHandle::with_seed(&self.sub, self.seed)
    }

    /// Applies the radius-1 sliding code to a sequence over the extension's
    /// alphabet; the output is one letter shorter.
    pub fn g_code(&self, ge: &GroupExtension, seq: &[Symbol]) -> Result<Vec<Symbol>> {
        let mut out = Vec::with_capacity(seq.len().saturating_sub(1));
        for w in seq.windows(2) {
            let (g_n, m_n) = ge.decode(w[0]);
            let (g_n1, m_n1) = ge.decode(w[1]);
            let g = ge.group.compose_idx(ge.group.inverse_idx(g_n1), g_n);
            let letter = self.index.get(&(g, m_n, m_n1)).ok_or_else(|| {
                Error::InternalInvariantViolation("window outside the factor alphabet".into())
            })?;
            out.push(Symbol(*letter as u32));
        }
        Ok(out)
    }
}

fn eta_rule_letter(
    ge: &GroupExtension,
    (g, m, m2): (usize, usize, usize),
    j: usize,
) -> (usize, usize, usize) {
    let group = &ge.group;
    let lam = ge.lambda_hat;
    let step = |m: usize, j: usize| ge.sync_hat.apply_digit(Symbol(m as u32), j).index();
    if j < lam - 1 {
        (
            group.compose_idx(group.inverse_idx(ge.sigma[m][j + 1]), ge.sigma[m][j]),
            step(m, j),
            step(m, j + 1),
        )
    } else {
        let a = group.compose_idx(group.inverse_idx(ge.sigma[m2][0]), g);
        (
            group.compose_idx(a, ge.sigma[m][lam - 1]),
            step(m, lam - 1),
            step(m2, 0),
        )
    }
}

/// Builds the factor substitution on the closure of the fixed point's seed
/// window and checks it is synchronizing and primitive.
pub fn eta(ge: &GroupExtension) -> Result<EtaSubstitution> {
    let group = &ge.group;
    // seed window: letters 0 and 1 of the extension's fixed point
    let seed_letter = (
        group.inverse_idx(ge.sigma[ge.oj.m0][1]),
        ge.oj.m0,
        ge.sync_hat.apply_digit(Symbol(ge.oj.m0 as u32), 1).index(),
    );
    let mut letters = vec![seed_letter];
    let mut index: HashMap<(usize, usize, usize), usize> = HashMap::new();
    index.insert(seed_letter, 0);
    let mut rules: Vec<Vec<u32>> = Vec::new();
    let mut next = 0;
    while next < letters.len() {
        let cur = letters[next];
        let mut rule = Vec::with_capacity(ge.lambda_hat);
        for j in 0..ge.lambda_hat {
            let child = eta_rule_letter(ge, cur, j);
            let id = *index.entry(child).or_insert_with(|| {
                letters.push(child);
                letters.len() - 1
            });
            rule.push(id as u32);
        }
        rules.push(rule);
        next += 1;
    }
    let base_sub = &ge.oj.join.base;
    let names: Vec<String> = letters
        .iter()
        .map(|&(g, m, m2)| {
            format!(
                "({},{},{})",
                group.elements[g].cycle_notation(),
                ge.oj.sets[m].name(base_sub),
                ge.oj.sets[m2].name(base_sub)
            )
        })
        .collect();
    let sub = Substitution::new(names, ge.lambda_hat, rules)?;
    if sub.apply_digit(Symbol(0), 0) != Symbol(0) {
        return Err(Error::InternalInvariantViolation(
            "factor seed rule does not start with itself".into(),
        ));
    }
    if column_number(&sub)? != 1 {
        return Err(Error::InternalInvariantViolation(
            "sliding-block factor must have column number 1".into(),
        ));
    }
    if !sub.is_primitive() {
        return Err(Error::InternalInvariantViolation(
            "sliding-block factor must be primitive".into(),
        ));
    }
    Ok(EtaSubstitution {
        sub,
        letters,
        seed: Symbol(0),
        index,
    })
}

/// The factor joined with the mod-h rotation when the extension height
/// exceeds 1; for height 1 this is the factor itself.
#[derive(Clone, Debug)]
pub struct EtaH {
    pub sub: Substitution,
    pub h_hat: usize,
    /// True when the periodic component was joined in.
    pub joined: bool,
}

/// The rotation-by-digits substitution `p(i)_j = lambda*i + j mod h`.
pub fn periodic_component(lambda: usize, h: usize) -> Result<Substitution> {
    let names: Vec<String> = (0..h).map(|i| i.to_string()).collect();
    let rules: Vec<Vec<u32>> = (0..h)
        .map(|i| (0..lambda).map(|j| ((lambda * i + j) % h) as u32).collect())
        .collect();
    Substitution::new(names, lambda, rules)
}

pub fn eta_h(ge: &GroupExtension, eta_sub: &EtaSubstitution) -> Result<EtaH> {
    if ge.h_hat == 1 {
        return Ok(EtaH {
            sub: eta_sub.sub.clone(),
            h_hat: 1,
            joined: false,
        });
    }
    let p = periodic_component(ge.lambda_hat, ge.h_hat)?;
    let joined = join(&eta_sub.sub, &p, &[(eta_sub.seed, Symbol(0))])?;
    let c = column_number(&joined.sub)?;
    let h = height(&joined.sub)?.h;
    if c != ge.h_hat || h != ge.h_hat {
        return Err(Error::InternalInvariantViolation(format!(
            "periodic join must have column number and height {}; got c={c}, h={h}",
            ge.h_hat
        )));
    }
    Ok(EtaH {
        sub: joined.sub,
        h_hat: ge.h_hat,
        joined: true,
    })
}

/// All stages of the construction tower for one substitution.
#[derive(Clone, Debug)]
pub struct Tower {
    pub input: Substitution,
    pub sync: SyncSubstitution,
    pub ordered: OrderedJoin,
    pub extension: GroupExtension,
    pub eta: EtaSubstitution,
    pub eta_h: EtaH,
}

pub fn build_tower(sub: &Substitution) -> Result<Tower> {
    let ordered = order_and_rename(sub)?;
    let extension = group_extension(&ordered)?;
    let eta_sub = eta(&extension)?;
    let eta_h_sub = eta_h(&extension, &eta_sub)?;
    Ok(Tower {
        input: sub.clone(),
        sync: ordered.join.sync.clone(),
        ordered,
        extension,
        eta: eta_sub,
        eta_h: eta_h_sub,
    })
}
