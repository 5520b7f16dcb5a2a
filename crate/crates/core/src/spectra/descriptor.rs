use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Which half of the integers a progression union is restricted to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HalfLine {
    /// `Z₊ = {0, 1, 2, ...}`
    NonNegative,
    /// `Z₋ = {..., -2, -1}`
    Negative,
}

impl HalfLine {
    pub fn contains(self, k: i64) -> bool {
        match self {
            HalfLine::NonNegative => k >= 0,
            HalfLine::Negative => k < 0,
        }
    }
}

/// Reference set for a cofinite complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Universe {
    Integers,
    NonNegative,
}

impl Universe {
    pub fn contains(self, k: i64) -> bool {
        match self {
            Universe::Integers => true,
            Universe::NonNegative => k >= 0,
        }
    }
}

/// The arithmetic progression `{k : k ≡ residue (mod modulus)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Progression {
    modulus: u64,
    residue: u64,
}

impl Progression {
    /// `modulus` must be at least 1; the residue is reduced into `[0, modulus)`.
    pub fn new(modulus: u64, residue: i64) -> Option<Self> {
        if modulus == 0 {
            return None;
        }
        let residue = residue.rem_euclid(modulus as i64) as u64;
        Some(Progression { modulus, residue })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn contains(&self, k: i64) -> bool {
        k.rem_euclid(self.modulus as i64) as u64 == self.residue
    }
}

/// Sparse infinite families used as negative-frequency perturbations of `Z₊`,
/// plus the positive powers used as gap sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `{-b^k : k ≥ 1}`
    NegPowers(u64),
    /// `{b^k : k ≥ 0}`
    Powers(u64),
    /// `{-k² : k ≥ 1}`
    NegSquares,
    /// `{-p : p prime}`
    NegPrimes,
}

impl Family {
    pub fn contains(self, k: i64) -> bool {
        match self {
            Family::NegPowers(base) => k < 0 && is_power_of(k.unsigned_abs(), base, false),
            Family::Powers(base) => k > 0 && is_power_of(k as u64, base, true),
            Family::NegSquares => {
                if k >= 0 {
                    return false;
                }
                let m = k.unsigned_abs();
                let r = isqrt(m);
                r * r == m
            }
            Family::NegPrimes => k < 0 && is_prime(k.unsigned_abs()),
        }
    }

    /// Members in `[lo, hi]`, ascending. Primes come from a sieve over the band.
    pub fn members_in(self, lo: i64, hi: i64) -> Vec<i64> {
        if lo > hi {
            return Vec::new();
        }
        match self {
            Family::NegPrimes => {
                if lo >= -1 {
                    return Vec::new();
                }
                let top = lo.unsigned_abs() as usize;
                let sieve = prime_sieve(top);
                let mut out: Vec<i64> = (2..=top)
                    .filter(|&p| sieve[p])
                    .map(|p| -(p as i64))
                    .filter(|&k| k <= hi)
                    .collect();
                out.sort_unstable();
                out
            }
            _ => (lo..=hi).filter(|&k| self.contains(k)).collect(),
        }
    }
}

fn is_power_of(mut m: u64, base: u64, allow_zero_exponent: bool) -> bool {
    if base < 2 {
        return false;
    }
    if m == 1 {
        return allow_zero_exponent;
    }
    while m > 1 && m % base == 0 {
        m /= base;
    }
    m == 1
}

fn isqrt(m: u64) -> u64 {
    let mut r = (m as f64).sqrt() as u64;
    while r * r > m {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= m {
        r += 1;
    }
    r
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn prime_sieve(n: usize) -> Vec<bool> {
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    if n >= 1 {
        sieve[1] = false;
    }
    let mut p = 2;
    while p * p <= n {
        if sieve[p] {
            for m in (p * p..=n).step_by(p) {
                sieve[m] = false;
            }
        }
        p += 1;
    }
    sieve
}

/// Finite description of a subset of `Z`.
///
/// Values should be built through the smart constructors (`union`, `difference`,
/// `intersection`, `shift`, `negation`, ...) which keep the tree in a normal form;
/// the canonical text form round-trips through the parser only for normalized trees.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Descriptor {
    Explicit(BTreeSet<i64>),
    /// Closed integer interval `[lo, hi]`; used for band intersections.
    Interval(i64, i64),
    Cofinite {
        excluded: BTreeSet<i64>,
        universe: Universe,
    },
    ApUnion {
        progressions: Vec<Progression>,
        half: Option<HalfLine>,
    },
    Family(Family),
    Union(Box<Descriptor>, Box<Descriptor>),
    Difference(Box<Descriptor>, Box<Descriptor>),
    Intersection(Box<Descriptor>, Box<Descriptor>),
    Shift(Box<Descriptor>, i64),
    Negation(Box<Descriptor>),
}

const MAX_PERIODIC_MODULUS: u64 = 1 << 20;

impl Descriptor {
    pub fn integers() -> Self {
        Descriptor::Cofinite {
            excluded: BTreeSet::new(),
            universe: Universe::Integers,
        }
    }

    pub fn nonnegative() -> Self {
        Descriptor::Cofinite {
            excluded: BTreeSet::new(),
            universe: Universe::NonNegative,
        }
    }

    pub fn negative() -> Self {
        Descriptor::ApUnion {
            progressions: vec![Progression::new(1, 0).unwrap()],
            half: Some(HalfLine::Negative),
        }
    }

    pub fn explicit<I: IntoIterator<Item = i64>>(items: I) -> Self {
        Descriptor::Explicit(items.into_iter().collect())
    }

    pub fn cofinite<I: IntoIterator<Item = i64>>(excluded: I, universe: Universe) -> Self {
        let excluded = excluded.into_iter().filter(|&k| universe.contains(k)).collect();
        Descriptor::Cofinite { excluded, universe }
    }

    pub fn interval(lo: i64, hi: i64) -> Self {
        Descriptor::Interval(lo, hi)
    }

    pub fn progressions<I: IntoIterator<Item = Progression>>(items: I, half: Option<HalfLine>) -> Self {
        let set: BTreeSet<Progression> = items.into_iter().collect();
        Descriptor::ApUnion {
            progressions: set.into_iter().collect(),
            half,
        }
    }

    pub fn family(family: Family) -> Self {
        Descriptor::Family(family)
    }

    pub fn union(a: Self, b: Self) -> Self {
        use Descriptor::*;
        match (a, b) {
            (Explicit(x), Explicit(y)) => Explicit(x.union(&y).copied().collect()),
            (Cofinite { excluded, universe }, Explicit(s))
            | (Explicit(s), Cofinite { excluded, universe })
                if s.iter().all(|&k| universe.contains(k)) =>
            {
                Cofinite {
                    excluded: excluded.difference(&s).copied().collect(),
                    universe,
                }
            }
            (
                Cofinite {
                    excluded: e1,
                    universe: u1,
                },
                Cofinite {
                    excluded: e2,
                    universe: u2,
                },
            ) if u1 == u2 => Cofinite {
                excluded: e1.intersection(&e2).copied().collect(),
                universe: u1,
            },
            (
                ApUnion {
                    progressions: p1,
                    half: h1,
                },
                ApUnion {
                    progressions: p2,
                    half: h2,
                },
            ) if h1 == h2 => Descriptor::progressions(p1.into_iter().chain(p2), h1),
            (a, b) => Union(Box::new(a), Box::new(b)),
        }
    }

    pub fn difference(a: Self, b: Self) -> Self {
        use Descriptor::*;
        match (a, b) {
            (Explicit(s), b) => Explicit(s.into_iter().filter(|&k| !b.contains(k)).collect()),
            (Cofinite { excluded, universe }, Explicit(s)) => Cofinite {
                excluded: excluded
                    .into_iter()
                    .chain(s.into_iter().filter(|&k| universe.contains(k)))
                    .collect(),
                universe,
            },
            (a, b) => Difference(Box::new(a), Box::new(b)),
        }
    }

    pub fn intersection(a: Self, b: Self) -> Self {
        use Descriptor::*;
        match (a, b) {
            (Explicit(s), b) | (b, Explicit(s)) => {
                Explicit(s.into_iter().filter(|&k| b.contains(k)).collect())
            }
            (ApUnion { progressions, half: None }, other) | (other, ApUnion { progressions, half: None })
                if other.as_half_line().is_some() =>
            {
                ApUnion {
                    progressions,
                    half: other.as_half_line(),
                }
            }
            (a, b) => Intersection(Box::new(a), Box::new(b)),
        }
    }

    pub fn shift(a: Self, n: i64) -> Self {
        use Descriptor::*;
        if n == 0 {
            return a;
        }
        match a {
            Explicit(s) => Explicit(s.into_iter().map(|k| k + n).collect()),
            Cofinite {
                excluded,
                universe: Universe::Integers,
            } => Cofinite {
                excluded: excluded.into_iter().map(|k| k + n).collect(),
                universe: Universe::Integers,
            },
            ApUnion {
                progressions,
                half: None,
            } => Descriptor::progressions(
                progressions
                    .into_iter()
                    .map(|p| Progression::new(p.modulus, p.residue as i64 + n).unwrap()),
                None,
            ),
            a => Shift(Box::new(a), n),
        }
    }

    pub fn negation(a: Self) -> Self {
        use Descriptor::*;
        match a {
            Explicit(s) => Explicit(s.into_iter().map(|k| -k).collect()),
            Cofinite {
                excluded,
                universe: Universe::Integers,
            } => Cofinite {
                excluded: excluded.into_iter().map(|k| -k).collect(),
                universe: Universe::Integers,
            },
            ApUnion {
                progressions,
                half: None,
            } => Descriptor::progressions(
                progressions
                    .into_iter()
                    .map(|p| Progression::new(p.modulus, -(p.residue as i64)).unwrap()),
                None,
            ),
            a => Negation(Box::new(a)),
        }
    }

    fn as_half_line(&self) -> Option<HalfLine> {
        match self {
            Descriptor::Cofinite {
                excluded,
                universe: Universe::NonNegative,
            } if excluded.is_empty() => Some(HalfLine::NonNegative),
            Descriptor::ApUnion {
                progressions,
                half: Some(h),
            } if progressions.len() == 1 && progressions[0].modulus == 1 => Some(*h),
            _ => None,
        }
    }

    pub fn contains(&self, k: i64) -> bool {
        use Descriptor::*;
        match self {
            Explicit(s) => s.contains(&k),
            Interval(lo, hi) => *lo <= k && k <= *hi,
            Cofinite { excluded, universe } => universe.contains(k) && !excluded.contains(&k),
            ApUnion { progressions, half } => {
                half.map_or(true, |h| h.contains(k)) && progressions.iter().any(|p| p.contains(k))
            }
            Family(f) => f.contains(k),
            Union(a, b) => a.contains(k) || b.contains(k),
            Difference(a, b) => a.contains(k) && !b.contains(k),
            Intersection(a, b) => a.contains(k) && b.contains(k),
            Shift(a, n) => k.checked_sub(*n).is_some_and(|j| a.contains(j)),
            Negation(a) => k.checked_neg().is_some_and(|j| a.contains(j)),
        }
    }

    /// Exact residue table `(L, member[r])` when the set is invariant under `+L`.
    pub(crate) fn residue_table(&self) -> Option<(u64, Vec<bool>)> {
        use Descriptor::*;
        match self {
            Explicit(s) if s.is_empty() => Some((1, vec![false])),
            Cofinite {
                excluded,
                universe: Universe::Integers,
            } if excluded.is_empty() => Some((1, vec![true])),
            ApUnion {
                progressions,
                half: None,
            } => {
                let l = progressions.iter().try_fold(1u64, |acc, p| {
                    let l = lcm(acc, p.modulus);
                    (l <= MAX_PERIODIC_MODULUS).then_some(l)
                })?;
                let table = (0..l)
                    .map(|r| progressions.iter().any(|p| p.contains(r as i64)))
                    .collect();
                Some((l, table))
            }
            Union(a, b) => combine(a, b, |x, y| x || y),
            Intersection(a, b) => combine(a, b, |x, y| x && y),
            Difference(a, b) => combine(a, b, |x, y| x && !y),
            Shift(a, n) => {
                let (l, t) = a.residue_table()?;
                let table = (0..l)
                    .map(|r| t[(r as i64 - n).rem_euclid(l as i64) as usize])
                    .collect();
                Some((l, table))
            }
            Negation(a) => {
                let (l, t) = a.residue_table()?;
                let table = (0..l)
                    .map(|r| t[(-(r as i64)).rem_euclid(l as i64) as usize])
                    .collect();
                Some((l, table))
            }
            _ => None,
        }
    }

    /// Coarse structural shape used for cofiniteness tests.
    pub(crate) fn shape(&self) -> Shape {
        use Descriptor::*;
        match self {
            Explicit(s) => Shape::Finite(s.clone()),
            Interval(lo, hi) => Shape::Finite((*lo..=*hi).collect()),
            Cofinite {
                excluded,
                universe: Universe::Integers,
            } => Shape::CofiniteZ(excluded.clone()),
            Cofinite {
                excluded,
                universe: Universe::NonNegative,
            } => Shape::CofiniteZplus(excluded.clone()),
            ApUnion { progressions, half } => {
                let unrestricted = Descriptor::ApUnion {
                    progressions: progressions.clone(),
                    half: None,
                };
                let full = unrestricted
                    .residue_table()
                    .is_some_and(|(_, t)| t.iter().all(|&m| m));
                match (full, half) {
                    (true, None) => Shape::CofiniteZ(BTreeSet::new()),
                    (true, Some(HalfLine::NonNegative)) => Shape::CofiniteZplus(BTreeSet::new()),
                    _ => Shape::Other,
                }
            }
            Family(_) => Shape::Other,
            Union(a, b) => match (a.shape(), b.shape()) {
                (Shape::CofiniteZ(e), _) => Shape::CofiniteZ(e.into_iter().filter(|&k| !b.contains(k)).collect()),
                (_, Shape::CofiniteZ(e)) => Shape::CofiniteZ(e.into_iter().filter(|&k| !a.contains(k)).collect()),
                (Shape::Finite(x), Shape::Finite(y)) => Shape::Finite(x.union(&y).copied().collect()),
                (Shape::CofiniteZplus(e), Shape::CofiniteZplus(f)) => {
                    Shape::CofiniteZplus(e.intersection(&f).copied().collect())
                }
                (Shape::CofiniteZplus(e), Shape::Finite(s)) | (Shape::Finite(s), Shape::CofiniteZplus(e))
                    if s.iter().all(|&k| k >= 0) =>
                {
                    Shape::CofiniteZplus(e.difference(&s).copied().collect())
                }
                _ => Shape::Other,
            },
            Difference(a, b) => match (a.shape(), b.shape()) {
                (Shape::Finite(s), _) => Shape::Finite(s.into_iter().filter(|&k| !b.contains(k)).collect()),
                (Shape::CofiniteZ(e), Shape::Finite(s)) => Shape::CofiniteZ(e.union(&s).copied().collect()),
                (Shape::CofiniteZ(e), Shape::CofiniteZ(f)) => {
                    Shape::Finite(f.difference(&e).copied().collect())
                }
                (Shape::CofiniteZplus(e), Shape::Finite(s)) => {
                    Shape::CofiniteZplus(e.into_iter().chain(s.into_iter().filter(|&k| k >= 0)).collect())
                }
                _ => Shape::Other,
            },
            Intersection(a, b) => match (a.shape(), b.shape()) {
                (Shape::Finite(s), _) => Shape::Finite(s.into_iter().filter(|&k| b.contains(k)).collect()),
                (_, Shape::Finite(s)) => Shape::Finite(s.into_iter().filter(|&k| a.contains(k)).collect()),
                (Shape::CofiniteZ(e), Shape::CofiniteZ(f)) => Shape::CofiniteZ(e.union(&f).copied().collect()),
                (Shape::CofiniteZ(e), Shape::CofiniteZplus(f)) | (Shape::CofiniteZplus(f), Shape::CofiniteZ(e)) => {
                    Shape::CofiniteZplus(f.into_iter().chain(e.into_iter().filter(|&k| k >= 0)).collect())
                }
                (Shape::CofiniteZplus(e), Shape::CofiniteZplus(f)) => {
                    Shape::CofiniteZplus(e.union(&f).copied().collect())
                }
                _ => Shape::Other,
            },
            Shift(a, n) => match a.shape() {
                Shape::Finite(s) => Shape::Finite(s.into_iter().map(|k| k + n).collect()),
                Shape::CofiniteZ(e) => Shape::CofiniteZ(e.into_iter().map(|k| k + n).collect()),
                _ => Shape::Other,
            },
            Negation(a) => match a.shape() {
                Shape::Finite(s) => Shape::Finite(s.into_iter().map(|k| -k).collect()),
                Shape::CofiniteZ(e) => Shape::CofiniteZ(e.into_iter().map(|k| -k).collect()),
                _ => Shape::Other,
            },
        }
    }

    /// A cited superset `E ∪ Z₊` containing the set, if one is structurally evident.
    /// `Some(None)` means the set lies inside `Z₊`.
    pub(crate) fn cited_superset(&self) -> Option<Option<Family>> {
        use Descriptor::*;
        match self {
            Explicit(s) => s.iter().all(|&k| k >= 0).then_some(None),
            Interval(lo, hi) => (*lo >= 0 || lo > hi).then_some(None),
            Cofinite {
                universe: Universe::NonNegative,
                ..
            } => Some(None),
            ApUnion {
                half: Some(HalfLine::NonNegative),
                ..
            } => Some(None),
            Family(self::Family::Powers(_)) => Some(None),
            Family(f) => Some(Some(*f)),
            Union(a, b) => match (a.cited_superset()?, b.cited_superset()?) {
                (None, x) | (x, None) => Some(x),
                (Some(x), Some(y)) if x == y => Some(Some(x)),
                _ => None,
            },
            Intersection(a, b) => match (a.cited_superset(), b.cited_superset()) {
                (Some(None), _) | (_, Some(None)) => Some(None),
                (Some(x), _) | (_, Some(x)) => Some(x),
                _ => None,
            },
            Difference(a, _) => a.cited_superset(),
            _ => None,
        }
    }

    fn precedence(&self) -> u8 {
        use Descriptor::*;
        match self {
            Union(..) => 0,
            ApUnion { progressions, half } if progressions.len() > 1 && half.is_none() => 0,
            ApUnion { half: Some(_), .. } => match self.as_half_line() {
                Some(HalfLine::Negative) => 2,
                _ => 1,
            },
            Difference(..) | Intersection(..) => 1,
            Cofinite { excluded, .. } if !excluded.is_empty() => 1,
            _ => 2,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        use Descriptor::*;
        match self {
            Explicit(s) => write_set(f, s),
            Interval(lo, hi) => write!(f, "[{lo},{hi}]"),
            Cofinite { excluded, universe } => {
                let name = match universe {
                    Universe::Integers => "Z",
                    Universe::NonNegative => "Zplus",
                };
                write!(f, "{name}")?;
                if !excluded.is_empty() {
                    write!(f, " \\ ")?;
                    write_set(f, excluded)?;
                }
                Ok(())
            }
            ApUnion { progressions, half } => {
                if let Some(HalfLine::Negative) = self.as_half_line() {
                    return write!(f, "Zminus");
                }
                let needs_group = half.is_some() && progressions.len() > 1;
                if needs_group {
                    write!(f, "(")?;
                }
                for (i, p) in progressions.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    write!(f, "AP({},{})", p.modulus, p.residue)?;
                }
                if needs_group {
                    write!(f, ")")?;
                }
                match half {
                    Some(HalfLine::NonNegative) => write!(f, " & Zplus"),
                    Some(HalfLine::Negative) => write!(f, " & Zminus"),
                    None => Ok(()),
                }
            }
            Family(fam) => match fam {
                self::Family::NegPowers(b) => write!(f, "negpow({b})"),
                self::Family::Powers(b) => write!(f, "pow({b})"),
                self::Family::NegSquares => write!(f, "negsq"),
                self::Family::NegPrimes => write!(f, "negprimes"),
            },
            Union(a, b) => {
                a.fmt_at(f, 0)?;
                write!(f, " | ")?;
                b.fmt_at(f, 1)
            }
            Difference(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " \\ ")?;
                b.fmt_at(f, 2)
            }
            Intersection(a, b) => {
                a.fmt_at(f, 1)?;
                write!(f, " & ")?;
                b.fmt_at(f, 2)
            }
            Shift(a, n) => {
                write!(f, "shift(")?;
                a.fmt_at(f, 0)?;
                write!(f, ", {n})")
            }
            Negation(a) => {
                write!(f, "neg(")?;
                a.fmt_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

fn write_set(f: &mut fmt::Formatter<'_>, s: &BTreeSet<i64>) -> fmt::Result {
    write!(f, "{{")?;
    for (i, k) in s.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{k}")?;
    }
    write!(f, "}}")
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Shape {
    Finite(BTreeSet<i64>),
    /// `Z` minus the listed integers.
    CofiniteZ(BTreeSet<i64>),
    /// `Z₊` minus the listed nonnegative integers.
    CofiniteZplus(BTreeSet<i64>),
    Other,
}

fn combine(a: &Descriptor, b: &Descriptor, op: impl Fn(bool, bool) -> bool) -> Option<(u64, Vec<bool>)> {
    let (la, ta) = a.residue_table()?;
    let (lb, tb) = b.residue_table()?;
    let l = lcm(la, lb);
    if l > MAX_PERIODIC_MODULUS {
        return None;
    }
    let table = (0..l as usize)
        .map(|r| op(ta[r % la as usize], tb[r % lb as usize]))
        .collect();
    Some((l, table))
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}
