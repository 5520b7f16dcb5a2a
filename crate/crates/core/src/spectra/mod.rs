//! Spectral sets `Λ ⊂ Z`: finitely described, queried by membership, and
//! enumerated only inside finite bands.

mod descriptor;
mod parse;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use descriptor::{Descriptor, Family, HalfLine, Progression, Universe};
pub(crate) use descriptor::Shape;

use crate::error::{Error, Result};

/// Default half-width of the enumeration band `[-B, B]`.
pub const DEFAULT_BAND: i64 = 64;

/// A spectral set together with the band used when enumeration is requested
/// without an explicit one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpectralSet {
    descriptor: Descriptor,
    band: i64,
}

/// Result of a period search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub n: u64,
    /// `true` when derived from residue arithmetic; `false` when only checked on the default band.
    pub exact: bool,
}

/// Literature and structural tags attached to a set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    RieszByCitation,
    DsetByCitation,
    Periodic,
    CofiniteInZ,
    #[serde(rename = "cofinite-in-Zplus")]
    CofiniteInZplus,
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyTag::RieszByCitation => "riesz-by-citation",
            FamilyTag::DsetByCitation => "dset-by-citation",
            FamilyTag::Periodic => "periodic",
            FamilyTag::CofiniteInZ => "cofinite-in-Z",
            FamilyTag::CofiniteInZplus => "cofinite-in-Zplus",
        };
        f.write_str(s)
    }
}

impl SpectralSet {
    pub fn new(descriptor: Descriptor) -> Self {
        SpectralSet {
            descriptor,
            band: DEFAULT_BAND,
        }
    }

    pub fn with_band(mut self, band: i64) -> Self {
        self.band = band.max(0);
        self
    }

    pub fn integers() -> Self {
        Self::new(Descriptor::integers())
    }

    pub fn nonnegative() -> Self {
        Self::new(Descriptor::nonnegative())
    }

    /// `Z` with the listed frequencies removed.
    pub fn integers_without<I: IntoIterator<Item = i64>>(excluded: I) -> Self {
        Self::new(Descriptor::cofinite(excluded, Universe::Integers))
    }

    /// `Z₊` with the listed frequencies removed.
    pub fn nonnegative_without<I: IntoIterator<Item = i64>>(excluded: I) -> Self {
        Self::new(Descriptor::cofinite(excluded, Universe::NonNegative))
    }

    /// The single progression `n·Z + r`.
    pub fn progression(n: u64, r: i64) -> Self {
        Self::new(Descriptor::progressions(Progression::new(n, r), None))
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    pub fn band(&self) -> i64 {
        self.band
    }

    pub fn contains(&self, k: i64) -> bool {
        self.descriptor.contains(k)
    }

    /// Minimal `n ≤ max_period` with `Λ + n = Λ`.
    pub fn period_of(&self, max_period: u64) -> Result<Option<Period>> {
        if max_period < 1 {
            return Err(Error::pre("max_period must be at least 1"));
        }
        if let Some((l, table)) = self.descriptor.residue_table() {
            let period = (1..=l)
                .filter(|d| l % d == 0)
                .find(|&d| (0..l).all(|r| table[r as usize] == table[((r + d) % l) as usize]))
                .expect("L itself is a period");
            return Ok((period <= max_period).then_some(Period { n: period, exact: true }));
        }
        let b = self.band;
        let found = (1..=max_period).find(|&n| {
            let n = n as i64;
            (-b..=b - n).all(|k| self.contains(k) == self.contains(k + n))
        });
        Ok(found.map(|n| Period { n, exact: false }))
    }

    /// Sorted integers of `[lo, hi]` that are not in the set.
    pub fn complement_in_band(&self, lo: i64, hi: i64) -> Vec<i64> {
        (lo..=hi).filter(|&k| !self.contains(k)).collect()
    }

    /// Sorted members of `[lo, hi]`.
    pub fn members_in_band(&self, lo: i64, hi: i64) -> Vec<i64> {
        match &self.descriptor {
            Descriptor::Family(f) => f.members_in(lo, hi),
            _ => (lo..=hi).filter(|&k| self.contains(k)).collect(),
        }
    }

    /// `Z \ Λ` when it is finite and structurally evident.
    pub fn finite_complement(&self) -> Option<Vec<i64>> {
        match self.descriptor.shape() {
            Shape::CofiniteZ(e) => Some(e.into_iter().collect()),
            _ => None,
        }
    }

    /// `Z₊ \ Λ` when `Λ ⊂ Z₊` and the difference is finite.
    pub fn finite_gaps_in_nonnegative(&self) -> Option<Vec<i64>> {
        match self.descriptor.shape() {
            Shape::CofiniteZplus(e) => Some(e.into_iter().collect()),
            _ => None,
        }
    }

    /// True when the set is exactly the even nonnegative integers.
    pub fn is_even_nonnegative(&self) -> bool {
        match &self.descriptor {
            Descriptor::ApUnion {
                progressions,
                half: Some(HalfLine::NonNegative),
            } => {
                let unrestricted = SpectralSet::new(Descriptor::ApUnion {
                    progressions: progressions.clone(),
                    half: None,
                });
                match unrestricted.descriptor.residue_table() {
                    Some((l, table)) => {
                        l % 2 == 0 && table.iter().enumerate().all(|(r, &m)| m == (r % 2 == 0))
                    }
                    None => false,
                }
            }
            _ => false,
        }
    }

    /// Tags applicable to the descriptor. The `*-by-citation` tags record
    /// literature facts (and their inheritance by subsets); they are not proofs.
    pub fn classify_families(&self) -> Vec<FamilyTag> {
        let mut tags = Vec::new();
        if let Some(sup) = self.descriptor.cited_superset() {
            let riesz = matches!(
                sup,
                None | Some(Family::NegPowers(2)) | Some(Family::NegSquares) | Some(Family::NegPrimes)
            );
            let dset = matches!(sup, None | Some(Family::NegPowers(_)));
            if riesz {
                tags.push(FamilyTag::RieszByCitation);
            }
            if dset {
                tags.push(FamilyTag::DsetByCitation);
            }
        }
        if matches!(self.period_of(DEFAULT_BAND as u64), Ok(Some(Period { exact: true, .. }))) {
            tags.push(FamilyTag::Periodic);
        }
        match self.descriptor.shape() {
            Shape::CofiniteZ(_) => tags.push(FamilyTag::CofiniteInZ),
            Shape::CofiniteZplus(_) => tags.push(FamilyTag::CofiniteInZplus),
            _ => {}
        }
        tags
    }

    pub fn has_tag(&self, tag: FamilyTag) -> bool {
        self.classify_families().contains(&tag)
    }

    /// Canonical text form; parses back to an equal set.
    pub fn canonical(&self) -> String {
        self.descriptor.to_string()
    }
}

impl fmt::Display for SpectralSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.descriptor.fmt(f)
    }
}

impl FromStr for SpectralSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse::Parser::parse(s).map(SpectralSet::new)
    }
}

impl Serialize for SpectralSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.canonical())
    }
}

impl<'de> Deserialize<'de> for SpectralSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(s: &str) -> SpectralSet {
        s.parse().unwrap()
    }

    #[test]
    fn membership_examples() {
        let zplus = set("AP(1,0) & Zplus");
        assert!(!zplus.contains(-1));
        assert!(zplus.contains(0));

        let punctured = set("Z \\ {0}");
        assert!(!punctured.contains(0));
        assert!(punctured.contains(7));

        let riesz = set("negpow(2)+Zplus");
        assert!(riesz.contains(-8));
        assert!(!riesz.contains(-6));
        assert!(!riesz.contains(-1));
    }

    #[test]
    fn period_examples() {
        assert_eq!(set("AP(2,0)").period_of(10).unwrap(), Some(Period { n: 2, exact: true }));
        assert_eq!(set("Zplus").period_of(10).unwrap(), None);
        assert_eq!(set("AP(3,0)|AP(3,1)").period_of(10).unwrap(), Some(Period { n: 3, exact: true }));
        // {0,2} mod 4 has period 2, and 6Z ∪ (6Z+3) has period 3
        assert_eq!(set("AP(4,0)|AP(4,2)").period_of(10).unwrap().unwrap().n, 2);
        assert_eq!(set("AP(6,0)|AP(6,3)").period_of(10).unwrap().unwrap().n, 3);
        assert_eq!(set("AP(7,1)").period_of(5).unwrap(), None);
        assert!(set("Z").period_of(0).is_err());
    }

    #[test]
    fn period_band_verified_for_opaque_descriptors() {
        let p = set("AP(2,0) | negpow(2)").period_of(8).unwrap();
        assert_eq!(p, Some(Period { n: 2, exact: false }));
        assert_eq!(set("Zplus \\ pow2").period_of(8).unwrap(), None);
    }

    #[test]
    fn complement_examples() {
        assert_eq!(set("Z \\ {0,5}").complement_in_band(-3, 7), vec![0, 5]);
        assert_eq!(set("Zplus").complement_in_band(-2, 2), vec![-2, -1]);
        assert_eq!(set("Zplus \\ pow2").complement_in_band(0, 9), vec![1, 2, 4, 8]);
    }

    #[test]
    fn family_tags() {
        let mut t = set("negpow(2)+Zplus").classify_families();
        t.sort();
        assert_eq!(t, vec![FamilyTag::RieszByCitation, FamilyTag::DsetByCitation]);
        assert_eq!(set("AP(2,0)").classify_families(), vec![FamilyTag::Periodic]);
        assert_eq!(set("Z \\ {3,7}").classify_families(), vec![FamilyTag::CofiniteInZ]);
        // D-set but not cited as Riesz
        assert_eq!(set("negpow(3) | Zplus").classify_families(), vec![FamilyTag::DsetByCitation]);
        assert_eq!(set("negsq | Zplus").classify_families(), vec![FamilyTag::RieszByCitation]);
        assert!(set("Zplus \\ {2}").has_tag(FamilyTag::CofiniteInZplus));
        assert!(!set("Z").has_tag(FamilyTag::DsetByCitation));
    }

    #[test]
    fn cofinite_detection() {
        assert_eq!(set("Z \\ {0,4}").finite_complement(), Some(vec![0, 4]));
        assert_eq!(set("shift(Z \\ {0}, 3)").finite_complement(), Some(vec![3]));
        assert_eq!(set("(Z \\ {1,2}) | {2}").finite_complement(), Some(vec![1]));
        assert_eq!(set("AP(2,0) | AP(2,1)").finite_complement(), Some(vec![]));
        assert_eq!(set("Zplus").finite_complement(), None);
        assert_eq!(set("Zplus \\ {1,3}").finite_gaps_in_nonnegative(), Some(vec![1, 3]));
        assert_eq!(set("Zplus \\ pow2").finite_gaps_in_nonnegative(), None);
    }

    #[test]
    fn even_nonnegative_detection() {
        assert!(set("AP(2,0) & Zplus").is_even_nonnegative());
        assert!(set("(AP(4,0)|AP(4,2)) & Zplus").is_even_nonnegative());
        assert!(!set("AP(2,0)").is_even_nonnegative());
        assert!(!set("AP(2,1) & Zplus").is_even_nonnegative());
    }

    #[test]
    fn canonical_forms() {
        for (src, canon) in [
            ("Zplus", "Zplus"),
            ("Z \\ {5,0}", "Z \\ {0,5}"),
            ("AP(3,1)|AP(3,0)", "AP(3,0) | AP(3,1)"),
            ("negpow(2)+Zplus", "negpow(2) | Zplus"),
            ("Zplus \\ pow2", "Zplus \\ pow(2)"),
            ("AP(2,0) & Zplus", "AP(2,0) & Zplus"),
            ("(AP(3,0)|AP(3,1)) & Zplus", "(AP(3,0) | AP(3,1)) & Zplus"),
            ("AP(1,0) & Zminus", "Zminus"),
            ("shift(Zplus, -2)", "shift(Zplus, -2)"),
            ("negsq | (Zplus \\ {1})", "negsq | Zplus \\ {1}"),
        ] {
            let s = set(src);
            assert_eq!(s.canonical(), canon, "{src}");
            assert_eq!(set(canon), s, "{src}");
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        match "Z \\ {0,".parse::<SpectralSet>() {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 7),
            other => panic!("{other:?}"),
        }
        match "AP(0,1)".parse::<SpectralSet>() {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 3),
            other => panic!("{other:?}"),
        }
        assert!("Zplux".parse::<SpectralSet>().is_err());
        assert!("".parse::<SpectralSet>().is_err());
        assert!("Z Z".parse::<SpectralSet>().is_err());
    }

    #[test]
    fn prime_family_enumeration_uses_sieve() {
        let s = set("negprimes");
        assert_eq!(s.members_in_band(-20, 0), vec![-19, -17, -13, -11, -7, -5, -3, -2]);
        assert!(s.contains(-97));
        assert!(!s.contains(-91));
    }
}
