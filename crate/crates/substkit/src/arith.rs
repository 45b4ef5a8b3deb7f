//! Multiplicative arithmetic functions (sieved and periodic) and the
//! streaming correlation estimators used by the orthogonality experiments:
//! Cesaro partial means, prime-scaled cross-correlations, and averaged
//! short-interval sums.
//!
//! All estimators reduce in a fixed block order with compensated
//! summation, so results are bit-identical across worker counts.

use crate::error::{Error, Result};
use crate::subst::{FixedPointHandle, FixedPointStream, Symbol};
use num_complex::Complex64;
use std::collections::HashMap;
use std::time::{Duration, Instant};

/// Default cap on sieve table length.
pub const DEFAULT_SIEVE_LIMIT: usize = 100_000_000;

/// Primes up to n by a plain sieve of Eratosthenes.
pub fn primes_up_to(n: usize) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut is_comp = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !is_comp[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m <= n {
                is_comp[m] = true;
                m += p;
            }
        }
    }
    primes
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

const SEGMENT: usize = 1 << 20;

/// Squarefree sign table: `table[n]` is 0 on non-squarefree n, otherwise
/// the parity sign of the number of prime factors. Segmented; ~1 byte/n.
pub fn moebius_sieve(n_max: usize) -> Result<Vec<i8>> {
    sieve_with_limit(n_max, DEFAULT_SIEVE_LIMIT, false)
}

/// Completely multiplicative parity sign `(-1)^Omega(n)`.
pub fn liouville_sieve(n_max: usize) -> Result<Vec<i8>> {
    sieve_with_limit(n_max, DEFAULT_SIEVE_LIMIT, true)
}

fn sieve_with_limit(n_max: usize, limit: usize, with_multiplicity: bool) -> Result<Vec<i8>> {
    if n_max > limit {
        return Err(Error::Overflow {
            needed: n_max as u128,
            limit,
        });
    }
    let mut table = vec![0i8; n_max + 1];
    if n_max >= 1 {
        table[1] = 1;
    }
    let root = (n_max as f64).sqrt() as usize + 1;
    let primes = primes_up_to(root);
    let mut rem: Vec<u64> = Vec::new();
    let mut lo = 2usize;
    while lo <= n_max {
        let hi = (lo + SEGMENT - 1).min(n_max);
        rem.clear();
        rem.extend((lo..=hi).map(|n| n as u64));
        let sign = &mut table[lo..=hi];
        for s in sign.iter_mut() {
            *s = 1;
        }
        for &p in &primes {
            let p = p as usize;
            if p * p > hi {
                break;
            }
            let mut m = lo.div_ceil(p) * p;
            if with_multiplicity {
                while m <= hi {
                    let i = m - lo;
                    while rem[i] % p as u64 == 0 {
                        rem[i] /= p as u64;
                        sign[i] = -sign[i];
                    }
                    m += p;
                }
            } else {
                while m <= hi {
                    let i = m - lo;
                    sign[i] = -sign[i];
                    rem[i] /= p as u64;
                    m += p;
                }
                let p2 = p * p;
                let mut m = lo.div_ceil(p2) * p2;
                while m <= hi {
                    sign[m - lo] = 0;
                    m += p2;
                }
            }
        }
        // a single prime factor above the segment root may remain
        for (i, s) in sign.iter_mut().enumerate() {
            if rem[i] > 1 && *s != 0 {
                *s = -*s;
            }
        }
        lo = hi + 1;
    }
    Ok(table)
}

/// A bounded multiplicative (or periodic) arithmetic function with table
/// or closed-form evaluation.
#[derive(Clone, Debug)]
pub enum ArithmeticFunction {
    Moebius(Vec<i8>),
    Liouville(Vec<i8>),
    /// q-periodic table, zero off the units mod q.
    Dirichlet {
        q: u64,
        index: u64,
        table: Vec<Complex64>,
    },
    /// `n -> (-1)^(n+1)`.
    AlternatingUnit,
    /// Arbitrary value table indexed from 0; `table[n]` is the value at n.
    Table(Vec<Complex64>),
}

impl ArithmeticFunction {
    pub fn moebius(n_max: usize) -> Result<Self> {
        Ok(ArithmeticFunction::Moebius(moebius_sieve(n_max)?))
    }

    pub fn liouville(n_max: usize) -> Result<Self> {
        Ok(ArithmeticFunction::Liouville(liouville_sieve(n_max)?))
    }

    pub fn alternating_unit() -> Self {
        ArithmeticFunction::AlternatingUnit
    }

    /// Builds the Dirichlet character table from the cyclic decomposition
    /// of the units mod q: odd prime powers get a primitive root, 8 and
    /// higher two-powers split off a sign factor. The index enumerates
    /// characters in mixed radix over the factor orders; index 0 is the
    /// principal character.
    pub fn dirichlet(q: u64, index: u64) -> Result<Self> {
        if q == 0 || q > 100 {
            return Err(Error::BadModulus(q));
        }
        let comps = unit_group_components(q);
        let orders: Vec<u64> = comps.iter().map(|c| c.order).collect();
        let total: u64 = orders.iter().product::<u64>().max(1);
        let mut digits = Vec::with_capacity(orders.len());
        let mut x = index % total;
        for &d in &orders {
            digits.push(x % d);
            x /= d;
        }
        // Enumerate the unit group as the internal direct product of the
        // lifted generators; every unit residue is hit exactly once.
        let mut table = vec![Complex64::new(0.0, 0.0); q as usize];
        let mut exps = vec![0u64; comps.len()];
        loop {
            let mut residue = 1 % q;
            let mut phase = 0.0f64;
            for ((c, &e), &x) in comps.iter().zip(&digits).zip(&exps) {
                residue = residue * pow_mod(c.generator, x, q) % q;
                phase += e as f64 * x as f64 / c.order as f64;
            }
            let angle = 2.0 * std::f64::consts::PI * phase;
            table[residue as usize] = Complex64::new(angle.cos(), angle.sin());
            // mixed-radix increment
            let mut i = 0;
            loop {
                if i == comps.len() {
                    break;
                }
                exps[i] += 1;
                if exps[i] < orders[i] {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
            if i == comps.len() {
                break;
            }
        }
        if q == 1 {
            // no unit residues below q; the function is constantly 1
            return Ok(ArithmeticFunction::Dirichlet {
                q,
                index,
                table: vec![Complex64::new(1.0, 0.0)],
            });
        }
        Ok(ArithmeticFunction::Dirichlet { q, index, table })
    }

    pub fn zero_table(n_max: usize) -> Self {
        ArithmeticFunction::Table(vec![Complex64::new(0.0, 0.0); n_max + 1])
    }

    /// Largest argument with a defined value, None for periodic kinds.
    pub fn n_max(&self) -> Option<u64> {
        match self {
            ArithmeticFunction::Moebius(t) | ArithmeticFunction::Liouville(t) => {
                Some(t.len() as u64 - 1)
            }
            ArithmeticFunction::Table(t) => Some(t.len() as u64 - 1),
            _ => None,
        }
    }

    #[inline]
    pub fn value(&self, n: u64) -> Complex64 {
        match self {
            ArithmeticFunction::Moebius(t) | ArithmeticFunction::Liouville(t) => {
                Complex64::new(t[n as usize] as f64, 0.0)
            }
            ArithmeticFunction::Dirichlet { q, table, .. } => table[(n % q) as usize],
            ArithmeticFunction::AlternatingUnit => {
                if n % 2 == 1 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(-1.0, 0.0)
                }
            }
            ArithmeticFunction::Table(t) => t[n as usize],
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            ArithmeticFunction::Table(t) => t.iter().map(|z| z.norm()).fold(0.0, f64::max),
            _ => 1.0,
        }
    }

    pub fn kind_name(&self) -> String {
        match self {
            ArithmeticFunction::Moebius(_) => "moebius".into(),
            ArithmeticFunction::Liouville(_) => "liouville".into(),
            ArithmeticFunction::Dirichlet { q, index, .. } => format!("dirichlet:{q}:{index}"),
            ArithmeticFunction::AlternatingUnit => "alt1".into(),
            ArithmeticFunction::Table(_) => "table".into(),
        }
    }
}

struct UnitComponent {
    /// generator of the cyclic factor, lifted to a residue mod q
    generator: u64,
    order: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn unit_group_components(q: u64) -> Vec<UnitComponent> {
    // CRT: components per prime power of q, with generators lifted to
    // residues mod q that are 1 in the other components
    let mut comps = Vec::new();
    let mut rest = q;
    let mut p = 2u64;
    let mut prime_powers = Vec::new();
    while p * p <= rest {
        if rest % p == 0 {
            let mut pk = 1;
            while rest % p == 0 {
                rest /= p;
                pk *= p;
            }
            prime_powers.push((p, pk));
        }
        p += 1;
    }
    if rest > 1 {
        prime_powers.push((rest, rest));
    }
    for &(p, pk) in &prime_powers {
        if p == 2 {
            if pk == 2 {
                continue; // trivial unit group
            }
            if pk == 4 {
                comps.push(crt_component(q, pk, 3, 2));
            } else {
                comps.push(crt_component(q, pk, pk - 1, 2));
                comps.push(crt_component(q, pk, 5, pk / 4));
            }
        } else {
            let phi = pk / p * (p - 1);
            let g = primitive_root(pk, phi);
            comps.push(crt_component(q, pk, g, phi));
        }
    }
    comps
}

/// Lifts a generator mod pk to a residue mod q that is 1 mod q/pk.
fn crt_component(q: u64, pk: u64, g: u64, order: u64) -> UnitComponent {
    let other = q / pk;
    let mut lifted = g % q;
    for x in 0..q {
        if x % pk == g % pk && (other == 1 || x % other == 1 % other) {
            lifted = x;
            break;
        }
    }
    UnitComponent {
        generator: lifted,
        order,
    }
}

fn primitive_root(pk: u64, phi: u64) -> u64 {
    'outer: for g in 2..pk {
        if gcd(g, pk) != 1 {
            continue;
        }
        let mut f = phi;
        let mut r = 2;
        let mut prime_factors = Vec::new();
        while r * r <= f {
            if f % r == 0 {
                prime_factors.push(r);
                while f % r == 0 {
                    f /= r;
                }
            }
            r += 1;
        }
        if f > 1 {
            prime_factors.push(f);
        }
        for &r in &prime_factors {
            if pow_mod(g, phi / r, pk) == 1 {
                continue 'outer;
            }
        }
        return g;
    }
    1
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// A bounded sliding-window observable over a fixed point, with an optional
/// subtracted mean so it averages to zero.
#[derive(Clone)]
pub struct Observable {
    handle: FixedPointHandle,
    radius: usize,
    /// Dense letter table for radius 0.
    code1: Option<Vec<Complex64>>,
    /// Window table for radius >= 1; the window at n covers n..n+2r.
    windows: HashMap<Vec<Symbol>, Complex64>,
    mean_offset: Complex64,
}

impl Observable {
    /// A 1-code: one value per letter of the handle's alphabet.
    pub fn code1(handle: FixedPointHandle, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != handle.base().alphabet_len() {
            return Err(Error::BadObservable(format!(
                "code table has {} entries for {} letters",
                values.len(),
                handle.base().alphabet_len()
            )));
        }
        Ok(Observable {
            handle,
            radius: 0,
            code1: Some(values),
            windows: HashMap::new(),
            mean_offset: Complex64::new(0.0, 0.0),
        })
    }

    /// A windowed code of the given radius; the window at position n reads
    /// letters n..n+2r. Windows missing from the table evaluate to 0.
    pub fn windowed(
        handle: FixedPointHandle,
        radius: usize,
        windows: HashMap<Vec<Symbol>, Complex64>,
    ) -> Result<Self> {
        if radius == 0 || radius > 8 {
            return Err(Error::BadObservable(format!("radius {radius} out of range")));
        }
        for w in windows.keys() {
            if w.len() != 2 * radius + 1 {
                return Err(Error::BadObservable(
                    "window length must be 2*radius + 1".into(),
                ));
            }
        }
        Ok(Observable {
            handle,
            radius,
            code1: None,
            windows,
            mean_offset: Complex64::new(0.0, 0.0),
        })
    }

    pub fn handle(&self) -> &FixedPointHandle {
        &self.handle
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn mean_offset(&self) -> Complex64 {
        self.mean_offset
    }

    /// Subtracts the mean: exact letter densities for 1-codes over a
    /// primitive substitution, otherwise the empirical mean of a prefix of
    /// the given length (window frequencies are not derived from letter
    /// densities here, and primitivity can fail).
    pub fn into_mean_zero(mut self, empirical_len: usize) -> Result<Self> {
        self.mean_offset = Complex64::new(0.0, 0.0);
        let mean = match (&self.code1, self.handle.base().is_primitive()) {
            (Some(values), true) => {
                let d = self.handle.base().densities()?;
                values.iter().zip(&d).map(|(v, &w)| v * w).sum::<Complex64>()
            }
            _ => {
                let len = empirical_len.max(1 << 16);
                let stream = self.handle.stream();
                let mut sum = Kahan::default();
                let mut buf = Vec::new();
                let chunk = 1usize << 16;
                let mut pos = 0usize;
                while pos < len {
                    let hi = (pos + chunk).min(len);
                    buf.clear();
                    stream.extend_slice(pos as u64, (hi + 2 * self.radius) as u64, &mut buf);
                    for at in 0..hi - pos {
                        sum.add(self.raw_value_in(&buf, at));
                    }
                    pos = hi;
                }
                sum.total() / len as f64
            }
        };
        self.mean_offset = mean;
        Ok(self)
    }

    #[inline]
    fn raw_value_in(&self, buf: &[Symbol], at: usize) -> Complex64 {
        match &self.code1 {
            Some(values) => values[buf[at].index()],
            None => {
                let w = &buf[at..at + 2 * self.radius + 1];
                self.windows
                    .get(w)
                    .copied()
                    .unwrap_or_else(|| Complex64::new(0.0, 0.0))
            }
        }
    }

    /// Value at one position, via digit-indexed random access.
    pub fn value_at(&self, n: u64) -> Complex64 {
        match &self.code1 {
            Some(values) => values[self.handle.letter_at(n).index()] - self.mean_offset,
            None => {
                let w: Vec<Symbol> = (0..2 * self.radius as u64 + 1)
                    .map(|k| self.handle.letter_at(n + k))
                    .collect();
                self.windows
                    .get(&w)
                    .copied()
                    .unwrap_or_else(|| Complex64::new(0.0, 0.0))
                    - self.mean_offset
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        let raw = match &self.code1 {
            Some(values) => values.iter().map(|z| z.norm()).fold(0.0, f64::max),
            None => self.windows.values().map(|z| z.norm()).fold(0.0, f64::max),
        };
        raw + self.mean_offset.norm()
    }

    /// Streams values over `lo..hi` into `out`, using block expansion of
    /// the fixed point.
    pub fn stream_into(
        &self,
        stream: &FixedPointStream,
        lo: u64,
        hi: u64,
        out: &mut Vec<Complex64>,
    ) {
        let mut letters = Vec::with_capacity((hi - lo) as usize + 2 * self.radius);
        stream.extend_slice(lo, hi + 2 * self.radius as u64, &mut letters);
        out.clear();
        out.reserve((hi - lo) as usize);
        for at in 0..(hi - lo) as usize {
            out.push(self.raw_value_in(&letters, at) - self.mean_offset);
        }
    }

    pub fn stream(&self) -> FixedPointStream {
        self.handle.stream()
    }
}

/// Compensated (Neumaier) accumulator for complex values.
#[derive(Clone, Copy, Default)]
struct Kahan {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, z: Complex64) {
        let t = self.re + z.re;
        if self.re.abs() >= z.re.abs() {
            self.re_c += (self.re - t) + z.re;
        } else {
            self.re_c += (z.re - t) + self.re;
        }
        self.re = t;
        let t = self.im + z.im;
        if self.im.abs() >= z.im.abs() {
            self.im_c += (self.im - t) + z.im;
        } else {
            self.im_c += (z.im - t) + self.im;
        }
        self.im = t;
    }

    fn total(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

/// Checkpointed partial means of a correlation sum.
#[derive(Clone, Debug)]
pub struct CorrelationReport {
    pub checkpoints: Vec<u64>,
    pub means: Vec<Complex64>,
    pub n: u64,
    pub workers: usize,
    pub elapsed: Duration,
}

impl CorrelationReport {
    pub fn final_mean(&self) -> Complex64 {
        *self.means.last().unwrap()
    }
}

/// Decade checkpoints `10, 100, ..., <= n`, with n itself included.
pub fn log10_checkpoints(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut c = 10u64;
    while c < n {
        out.push(c);
        c = c.saturating_mul(10);
    }
    out.push(n);
    out
}

const BLOCK: u64 = 1 << 16;

/// Per-block sums over `[1, n]`, computed in parallel over contiguous
/// block ranges; block boundaries and per-block summation order do not
/// depend on the worker count.
fn block_sums<F>(n: u64, workers: usize, eval: F) -> Vec<Complex64>
where
    F: Fn(u64, u64, &mut Vec<Complex64>) + Sync,
{
    let n_blocks = n.div_ceil(BLOCK) as usize;
    let workers = workers.max(1).min(n_blocks.max(1));
    let mut sums = vec![Complex64::new(0.0, 0.0); n_blocks];
    std::thread::scope(|scope| {
        let eval = &eval;
        let mut rest: &mut [Complex64] = &mut sums;
        let per = n_blocks.div_ceil(workers);
        let mut start_block = 0usize;
        for _ in 0..workers {
            let take = per.min(rest.len());
            if take == 0 {
                break;
            }
            let (mine, tail) = rest.split_at_mut(take);
            rest = tail;
            let first = start_block;
            start_block += take;
            scope.spawn(move || {
                let mut values = Vec::new();
                for (i, slot) in mine.iter_mut().enumerate() {
                    let b = (first + i) as u64;
                    let lo = b * BLOCK + 1;
                    let hi = ((b + 1) * BLOCK).min(n);
                    eval(lo, hi, &mut values);
                    let mut acc = Kahan::default();
                    for &v in values.iter() {
                        acc.add(v);
                    }
                    *slot = acc.total();
                }
            });
        }
    });
    sums
}

/// Sequentially folds block sums, recomputing the partial block at each
/// checkpoint; the fold path is identical for every worker count.
fn fold_checkpoints<F>(n: u64, sums: &[Complex64], checkpoints: &[u64], eval: F) -> Vec<Complex64>
where
    F: Fn(u64, u64, &mut Vec<Complex64>),
{
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut acc = Kahan::default();
    let mut cp = checkpoints.iter().peekable();
    let mut values = Vec::new();
    for (b, &sum) in sums.iter().enumerate() {
        let lo = b as u64 * BLOCK + 1;
        let hi = ((b as u64 + 1) * BLOCK).min(n);
        while let Some(&&c) = cp.peek() {
            if c > hi {
                break;
            }
            let mut partial = acc;
            if c >= lo {
                eval(lo, c, &mut values);
                for &v in values.iter() {
                    partial.add(v);
                }
            }
            out.push(partial.total() / c as f64);
            cp.next();
        }
        acc.add(sum);
    }
    for &c in cp {
        out.push(acc.total() / c as f64);
    }
    out
}

fn validated_checkpoints(n: u64, checkpoints: &[u64]) -> Vec<u64> {
    let mut cps: Vec<u64> = checkpoints
        .iter()
        .copied()
        .filter(|&c| c >= 1 && c <= n)
        .collect();
    cps.push(n);
    cps.sort_unstable();
    cps.dedup();
    cps
}

/// Streaming partial means of `(1/N) sum a(n) u(n)`, n from 1 to N.
pub fn correlate(
    obs: &Observable,
    func: &ArithmeticFunction,
    n: u64,
    checkpoints: &[u64],
    workers: usize,
) -> Result<CorrelationReport> {
    if let Some(max) = func.n_max() {
        if n > max {
            return Err(Error::Overflow {
                needed: n as u128,
                limit: max as usize,
            });
        }
    }
    let start = Instant::now();
    let cps = validated_checkpoints(n, checkpoints);
    let stream = obs.stream();
    let eval = |lo: u64, hi: u64, out: &mut Vec<Complex64>| {
        let mut a = Vec::new();
        obs.stream_into(&stream, lo, hi + 1, &mut a);
        out.clear();
        out.reserve(a.len());
        for (i, &av) in a.iter().enumerate() {
            out.push(av * func.value(lo + i as u64));
        }
    };
    let sums = block_sums(n, workers, &eval);
    let means = fold_checkpoints(n, &sums, &cps, &eval);
    Ok(CorrelationReport {
        checkpoints: cps,
        means,
        n,
        workers,
        elapsed: start.elapsed(),
    })
}

/// Partial means of `(1/N) sum a(p n) conj(a(q n))` for distinct primes.
pub fn kbsz_cross(
    obs: &Observable,
    p: u64,
    q: u64,
    n: u64,
    checkpoints: &[u64],
    workers: usize,
) -> Result<CorrelationReport> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if p == q {
        return Err(Error::EqualPrimes(p));
    }
    let start = Instant::now();
    let cps = validated_checkpoints(n, checkpoints);
    let eval = |lo: u64, hi: u64, out: &mut Vec<Complex64>| {
        out.clear();
        out.reserve((hi - lo) as usize + 1);
        for m in lo..=hi {
            out.push(obs.value_at(p * m) * obs.value_at(q * m).conj());
        }
    };
    let sums = block_sums(n, workers, &eval);
    let means = fold_checkpoints(n, &sums, &cps, &eval);
    Ok(CorrelationReport {
        checkpoints: cps,
        means,
        n,
        workers,
        elapsed: start.elapsed(),
    })
}

/// Table of progression means for small progressions.
#[derive(Clone, Debug)]
pub struct ProgressionMeans {
    pub rows: Vec<ProgressionRow>,
}

#[derive(Clone, Debug)]
pub struct ProgressionRow {
    pub a: u64,
    pub b: u64,
    pub count: u64,
    pub mean: Complex64,
}

/// Empirical aperiodicity report: the mean of the function along every
/// progression `a n + b` with `a <= a_max`, `b < a`, over `a n + b <= N`.
pub fn progression_means(
    func: &ArithmeticFunction,
    a_max: u64,
    n: u64,
) -> Result<ProgressionMeans> {
    if let Some(max) = func.n_max() {
        if n > max {
            return Err(Error::Overflow {
                needed: n as u128,
                limit: max as usize,
            });
        }
    }
    let mut rows = Vec::new();
    for a in 1..=a_max {
        for b in 0..a {
            let count = if n >= b { (n - b) / a } else { 0 };
            let mut acc = Kahan::default();
            for k in 1..=count {
                acc.add(func.value(a * k + b));
            }
            rows.push(ProgressionRow {
                a,
                b,
                count,
                mean: if count > 0 {
                    acc.total() / count as f64
                } else {
                    Complex64::new(0.0, 0.0)
                },
            });
        }
    }
    Ok(ProgressionMeans { rows })
}

/// Block layouts for the short-interval estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockSpec {
    /// `b_k = k^2`: gaps `2k+1` grow without bound.
    Squares,
}

impl BlockSpec {
    pub fn boundary(&self, k: u64) -> u64 {
        match self {
            BlockSpec::Squares => k * k,
        }
    }
}

/// Result of the averaged short-interval estimator.
#[derive(Clone, Debug)]
pub struct MomoReport {
    pub value: f64,
    pub blocks: usize,
    pub b_last: u64,
    pub elapsed: Duration,
}

/// `sum_k |sum_{b_k <= n < b_{k+1}} f(S^n y_k) u(n)|` over the covered
/// range `[b_1, b_K)`, normalized by its length. Each block is evaluated
/// at its own phase point `y_k`, derived from the block index; a missing
/// observable means the constant-1 code, for which the normalization
/// makes a constant-1 function score exactly 1.
pub fn momo_short_intervals(
    obs: Option<&Observable>,
    func: &ArithmeticFunction,
    spec: BlockSpec,
    b_max: u64,
    workers: usize,
) -> Result<MomoReport> {
    if b_max < 4 {
        return Err(Error::BadBlocks("need at least one full block".into()));
    }
    if let Some(max) = func.n_max() {
        if b_max > max + 1 {
            return Err(Error::Overflow {
                needed: b_max as u128,
                limit: max as usize,
            });
        }
    }
    let start = Instant::now();
    let big_k = (1u64..).find(|&k| spec.boundary(k + 1) > b_max).unwrap();
    if big_k < 2 {
        return Err(Error::BadBlocks("need at least one full block".into()));
    }
    // blocks k = 1 .. K-1 cover [b_1, b_K)
    let blocks: Vec<u64> = (1..big_k).collect();
    let workers = workers.max(1).min(blocks.len());
    let mut abs_sums = vec![0.0f64; blocks.len()];
    std::thread::scope(|scope| {
        let mut rest: &mut [f64] = &mut abs_sums;
        let per = blocks.len().div_ceil(workers);
        let mut offset = 0usize;
        let blocks = &blocks;
        for _ in 0..workers {
            let take = per.min(rest.len());
            if take == 0 {
                break;
            }
            let (mine, tail) = rest.split_at_mut(take);
            rest = tail;
            let first = offset;
            offset += take;
            scope.spawn(move || {
                let stream = obs.map(|o| o.stream());
                let mut values = Vec::new();
                for (i, slot) in mine.iter_mut().enumerate() {
                    let k = blocks[first + i];
                    let lo = spec.boundary(k);
                    let hi = spec.boundary(k + 1);
                    let phase = splitmix64(k) & 0xffff_ffff_ffff; // 48-bit offset
                    let mut acc = Kahan::default();
                    match (obs, &stream) {
                        (Some(o), Some(st)) => {
                            o.stream_into(st, phase + lo, phase + hi, &mut values);
                            for (n, &v) in values.iter().enumerate() {
                                acc.add(v * func.value(lo + n as u64));
                            }
                        }
                        _ => {
                            for n in lo..hi {
                                acc.add(func.value(n));
                            }
                        }
                    }
                    *slot = acc.total().norm();
                }
            });
        }
    });
    let covered = spec.boundary(big_k) - spec.boundary(1);
    let mut total = 0.0;
    for &s in &abs_sums {
        total += s;
    }
    Ok(MomoReport {
        value: total / covered as f64,
        blocks: blocks.len(),
        b_last: spec.boundary(big_k),
        elapsed: start.elapsed(),
    })
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Builds a real-valued code from one value per letter.
pub fn sign_code(handle: &FixedPointHandle, signs: &[i8]) -> Result<Observable> {
    let values: Vec<Complex64> = signs
        .iter()
        .map(|&s| Complex64::new(s as f64, 0.0))
        .collect();
    Observable::code1(handle.clone(), values)
}
