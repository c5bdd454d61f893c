//! Ultimately periodic subsets of ℕ.
//!
//! An [`UpSet`] is `prefix ∪ { i ≥ t : i mod p ∈ residues }`. Values are kept
//! canonical (minimal period, then minimal threshold), so `==` is set equality.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UpSet {
    prefix: Vec<u64>,
    t: u64,
    p: u64,
    residues: Vec<u64>,
}

impl UpSet {
    pub fn empty() -> Self {
        UpSet { prefix: Vec::new(), t: 0, p: 1, residues: Vec::new() }
    }

    pub fn all() -> Self {
        UpSet { prefix: Vec::new(), t: 0, p: 1, residues: vec![0] }
    }

    /// `{ i : i ≥ start }`
    pub fn from(start: u64) -> Self {
        Self::from_fn(start, 1, |i| i >= start)
    }

    /// `{ i : i mod p == r }`
    pub fn progression(p: u64, r: u64) -> Self {
        assert!(p >= 1, "period must be positive");
        let r = r % p;
        Self::from_fn(0, p, |i| i % p == r)
    }

    pub fn evens() -> Self {
        Self::progression(2, 0)
    }

    pub fn odds() -> Self {
        Self::progression(2, 1)
    }

    pub fn finite<I: IntoIterator<Item = u64>>(items: I) -> Self {
        let set: BTreeSet<u64> = items.into_iter().collect();
        let t = set.iter().next_back().map_or(0, |m| m + 1);
        Self::from_fn(t, 1, |i| set.contains(&i))
    }

    pub fn singleton(i: u64) -> Self {
        Self::finite([i])
    }

    /// `{ i : lo ≤ i ≤ hi }`
    pub fn range(lo: u64, hi: u64) -> Self {
        if hi < lo {
            return Self::empty();
        }
        Self::from_fn(hi + 1, 1, |i| i >= lo && i <= hi)
    }

    /// Raw constructor; the result is canonicalized. Prefix elements at or
    /// beyond `t` are allowed and folded in.
    pub fn new(prefix: impl IntoIterator<Item = u64>, t: u64, p: u64, residues: impl IntoIterator<Item = u64>) -> Self {
        assert!(p >= 1, "period must be positive");
        let prefix: BTreeSet<u64> = prefix.into_iter().collect();
        let residues: BTreeSet<u64> = residues.into_iter().map(|r| r % p).collect();
        let t2 = prefix.iter().next_back().map_or(t, |m| t.max(m + 1));
        Self::from_fn(t2, p, |i| prefix.contains(&i) || (i >= t && residues.contains(&(i % p))))
    }

    /// Builds the set whose membership is `f`, given that `f(i)` depends only
    /// on `i mod p` once `i ≥ t`.
    pub fn from_fn(t: u64, p: u64, f: impl Fn(u64) -> bool) -> Self {
        assert!(p >= 1, "period must be positive");
        let mut word = vec![false; p as usize];
        for (k, slot) in word.iter_mut().enumerate() {
            *slot = f(t + k as u64);
        }
        // word[k] is membership of t + k; re-key by absolute residue.
        let mut res = vec![false; p as usize];
        for (k, &b) in word.iter().enumerate() {
            res[((t + k as u64) % p) as usize] = b;
        }
        let prefix_bits: Vec<bool> = (0..t).map(&f).collect();
        Self::canonical(prefix_bits, p, res)
    }

    fn canonical(mut prefix_bits: Vec<bool>, p: u64, res: Vec<bool>) -> Self {
        let mut period = p;
        for d in 1..=p {
            if p % d == 0 && (0..p as usize).all(|r| res[r] == res[r % d as usize]) {
                period = d;
                break;
            }
        }
        let res: Vec<bool> = res[..period as usize].to_vec();
        let mut t = prefix_bits.len() as u64;
        while t > 0 && prefix_bits[(t - 1) as usize] == res[((t - 1) % period) as usize] {
            t -= 1;
        }
        prefix_bits.truncate(t as usize);
        UpSet {
            prefix: (0..t).filter(|&i| prefix_bits[i as usize]).collect(),
            t,
            p: period,
            residues: (0..period).filter(|&r| res[r as usize]).collect(),
        }
    }

    pub fn prefix(&self) -> &[u64] {
        &self.prefix
    }

    pub fn threshold(&self) -> u64 {
        self.t
    }

    pub fn period(&self) -> u64 {
        self.p
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn contains(&self, i: u64) -> bool {
        if i < self.t {
            self.prefix.binary_search(&i).is_ok()
        } else {
            self.residues.binary_search(&(i % self.p)).is_ok()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.residues.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn is_all(&self) -> bool {
        self.t == 0 && self.p == 1 && self.residues == [0]
    }

    /// Number of elements of a finite set.
    pub fn len(&self) -> Option<usize> {
        self.is_finite().then_some(self.prefix.len())
    }

    pub fn first(&self) -> Option<u64> {
        if let Some(&m) = self.prefix.first() {
            return Some(m);
        }
        (self.t..self.t + self.p).find(|&i| self.contains(i))
    }

    /// Largest element of a finite nonempty set.
    pub fn last(&self) -> Option<u64> {
        if self.is_finite() {
            self.prefix.last().copied()
        } else {
            None
        }
    }

    /// Members `≤ bound`, ascending.
    pub fn enumerate(&self, bound: u64) -> Vec<u64> {
        let mut out: Vec<u64> = self.prefix.iter().copied().filter(|&i| i <= bound).collect();
        if !self.residues.is_empty() {
            out.extend((self.t..=bound).filter(|&i| self.residues.binary_search(&(i % self.p)).is_ok()));
        }
        out
    }

    /// Elements of a finite set.
    pub fn elements(&self) -> Option<&[u64]> {
        self.is_finite().then_some(&self.prefix[..])
    }

    /// The `n` smallest members (fewer if the set is finite and small).
    pub fn first_n(&self, n: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(n);
        for &i in &self.prefix {
            if out.len() == n {
                return out;
            }
            out.push(i);
        }
        if self.residues.is_empty() {
            return out;
        }
        let mut i = self.t;
        while out.len() < n {
            if self.contains(i) {
                out.push(i);
            }
            i += 1;
        }
        out
    }

    fn combine(&self, other: &UpSet, op: impl Fn(bool, bool) -> bool) -> UpSet {
        let t = self.t.max(other.t);
        let p = self.p.lcm(&other.p);
        UpSet::from_fn(t, p, |i| op(self.contains(i), other.contains(i)))
    }

    pub fn union(&self, other: &UpSet) -> UpSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &UpSet) -> UpSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &UpSet) -> UpSet {
        self.combine(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> UpSet {
        UpSet::from_fn(self.t, self.p, |i| !self.contains(i))
    }

    pub fn is_subset(&self, other: &UpSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &UpSet) -> bool {
        self.intersect(other).is_empty()
    }

    /// `{ i + k : i ∈ self, i + k ≥ 0 }`
    pub fn shift(&self, k: i64) -> UpSet {
        let t = (self.t as i64 + k).max(0) as u64;
        UpSet::from_fn(t, self.p, |i| {
            let j = i as i64 - k;
            j >= 0 && self.contains(j as u64)
        })
    }

    /// `{ a·i + b : i ∈ self, a·i + b ≥ 0 }`, `a ≥ 1`.
    pub fn affine_image(&self, a: u64, b: i64) -> UpSet {
        assert!(a >= 1, "affine image needs slope ≥ 1");
        let t = (a as i64 * self.t as i64 + b).max(0) as u64;
        UpSet::from_fn(t, a * self.p, |x| {
            let d = x as i64 - b;
            d >= 0 && d % a as i64 == 0 && self.contains((d / a as i64) as u64)
        })
    }

    /// `{ i : a·i + b ≥ 0, a·i + b ∈ self }`; `a = 0` gives ℕ or ∅.
    pub fn affine_preimage(&self, a: u64, b: i64) -> UpSet {
        if a == 0 {
            return if b >= 0 && self.contains(b as u64) { UpSet::all() } else { UpSet::empty() };
        }
        let need = self.t as i64 - b;
        let t = if need <= 0 { 0 } else { (need as u64).div_ceil(a) };
        UpSet::from_fn(t, self.p, |i| {
            let v = a as i64 * i as i64 + b;
            v >= 0 && self.contains(v as u64)
        })
    }

    /// Largest distance from a member of `self` to the nearest member of
    /// `target`, or `None` if unbounded (or `target` empty while `self` is not).
    pub fn max_distance_to(&self, target: &UpSet) -> Option<u64> {
        if self.is_empty() {
            return Some(0);
        }
        if target.is_empty() || (!self.is_finite() && target.is_finite()) {
            return None;
        }
        let hi = self.t.max(target.t) + 2 * self.p.lcm(&target.p);
        let horizon = hi + 2 * target.p + target.t;
        let mut worst = 0;
        let pts: Vec<u64> = if self.is_finite() { self.prefix.clone() } else { self.enumerate(hi) };
        for i in pts {
            let mut best = None;
            for d in 0..=(i + horizon) {
                if (i >= d && target.contains(i - d)) || target.contains(i + d) {
                    best = Some(d);
                    break;
                }
            }
            worst = worst.max(best?);
        }
        Some(worst)
    }
}

impl fmt::Debug for UpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for UpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_all() {
            return write!(f, "all");
        }
        if self.is_empty() {
            return write!(f, "∅");
        }
        if self.is_finite() {
            return write!(f, "{:?}", self.prefix);
        }
        write!(f, "{:?}∪{{i≥{} : i mod {} ∈ {:?}}}", self.prefix, self.t, self.p, self.residues)
    }
}

#[derive(Serialize, Deserialize)]
struct UpSetRepr {
    #[serde(default)]
    prefix: Vec<u64>,
    #[serde(default)]
    t: u64,
    #[serde(default = "one")]
    p: u64,
    #[serde(default)]
    residues: Vec<u64>,
}

fn one() -> u64 {
    1
}

impl Serialize for UpSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        UpSetRepr { prefix: self.prefix.clone(), t: self.t, p: self.p, residues: self.residues.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UpSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Either {
            Short(String),
            Full(UpSetRepr),
        }
        match Either::deserialize(d)? {
            Either::Short(s) => s.parse().map_err(serde::de::Error::custom),
            Either::Full(r) => {
                if r.p == 0 {
                    return Err(serde::de::Error::custom("period must be positive"));
                }
                if let Some(&r0) = r.residues.iter().find(|&&x| x >= r.p) {
                    return Err(serde::de::Error::custom(format!("residue {r0} out of range for period {}", r.p)));
                }
                if let Some(&x) = r.prefix.iter().find(|&&x| x >= r.t) {
                    return Err(serde::de::Error::custom(format!("prefix element {x} not below threshold {}", r.t)));
                }
                Ok(UpSet::new(r.prefix, r.t, r.p, r.residues))
            }
        }
    }
}

impl std::str::FromStr for UpSet {
    type Err = String;

    /// Accepts `all`, `empty`, `even`, `odd`, `finite:[1,2,3]`, `from:k`,
    /// and `mod:p:r1,r2`.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        match s {
            "all" => return Ok(UpSet::all()),
            "empty" | "none" => return Ok(UpSet::empty()),
            "even" | "evens" => return Ok(UpSet::evens()),
            "odd" | "odds" => return Ok(UpSet::odds()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("finite:") {
            let items: Vec<u64> = serde_json::from_str(rest).map_err(|e| format!("bad finite list `{rest}`: {e}"))?;
            return Ok(UpSet::finite(items));
        }
        if let Some(rest) = s.strip_prefix("from:") {
            let k: u64 = rest.parse().map_err(|_| format!("bad start `{rest}`"))?;
            return Ok(UpSet::from(k));
        }
        if let Some(rest) = s.strip_prefix("mod:") {
            let (p, rs) = rest.split_once(':').ok_or_else(|| format!("expected mod:p:r,... in `{s}`"))?;
            let p: u64 = p.parse().map_err(|_| format!("bad period `{p}`"))?;
            if p == 0 {
                return Err("period must be positive".into());
            }
            let rs: Result<Vec<u64>, _> = rs.split(',').filter(|x| !x.is_empty()).map(|x| x.trim().parse::<u64>()).collect();
            let rs = rs.map_err(|_| format!("bad residues in `{s}`"))?;
            return Ok(UpSet::new([], 0, p, rs));
        }
        Err(format!("unknown set shorthand `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Period-unroll oracle: explicit membership vectors over a window.
    fn bits(a: &UpSet, n: u64) -> Vec<bool> {
        (0..n).map(|i| a.contains(i)).collect()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(UpSet::new([], 0, 4, [0, 2]), UpSet::evens());
        assert_eq!(UpSet::new([0, 2, 4], 6, 2, [0]), UpSet::evens());
        assert_eq!(UpSet::evens().threshold(), 0);
        assert_eq!(UpSet::finite([3, 1]).threshold(), 4);
        assert_eq!(UpSet::new([1, 2, 3], 3, 1, [0]), UpSet::from(1));
        assert_eq!(UpSet::from(1).prefix(), &[] as &[u64]);
        assert_eq!(UpSet::from(1).threshold(), 1);
    }

    #[test]
    fn boolean_examples() {
        assert_eq!(UpSet::empty().union(&UpSet::evens()), UpSet::evens());
        assert_eq!(UpSet::evens().intersect(&UpSet::progression(3, 0)), UpSet::progression(6, 0));
        assert_eq!(UpSet::evens().complement(), UpSet::odds());
        assert_eq!(UpSet::all().difference(&UpSet::odds()), UpSet::evens());
    }

    #[test]
    fn shift_examples() {
        assert_eq!(UpSet::all().shift(3), UpSet::from(3));
        assert_eq!(UpSet::finite([0, 1, 2]).shift(-1), UpSet::finite([0, 1]));
        assert_eq!(UpSet::evens().shift(1), UpSet::odds());
        assert_eq!(UpSet::all().shift(-3), UpSet::all());
    }

    #[test]
    fn affine_examples() {
        assert_eq!(UpSet::all().affine_image(2, 0), UpSet::evens());
        assert_eq!(UpSet::evens().affine_preimage(2, 1), UpSet::empty());
        // Frozen from the unroll oracle: 3·{1,3,5,…}+1 = {4,10,16,…}.
        let img = UpSet::odds().affine_image(3, 1);
        assert_eq!(img.enumerate(30), vec![4, 10, 16, 22, 28]);
        assert_eq!(img, UpSet::new([], 4, 6, [4]));
        assert_eq!(UpSet::all().affine_image(1, -5), UpSet::all());
        assert_eq!(UpSet::finite([0, 1, 7]).affine_image(2, -3), UpSet::finite([11]));
        assert_eq!(UpSet::from(4).affine_preimage(3, -2), UpSet::from(2));
        assert_eq!(UpSet::finite([5]).affine_preimage(0, 5), UpSet::all());
    }

    #[test]
    fn enumerate_and_finiteness() {
        assert!(UpSet::finite([0, 1, 2]).is_finite());
        assert!(!UpSet::evens().is_finite());
        assert_eq!(UpSet::evens().enumerate(5), vec![0, 2, 4]);
        assert_eq!(UpSet::evens().first_n(3), vec![0, 2, 4]);
        assert_eq!(UpSet::odds().first(), Some(1));
        assert_eq!(UpSet::empty().first(), None);
    }

    #[test]
    fn distance_bounds() {
        assert_eq!(UpSet::evens().max_distance_to(&UpSet::odds()), Some(1));
        assert_eq!(UpSet::all().max_distance_to(&UpSet::singleton(0)), None);
        assert_eq!(UpSet::finite([9]).max_distance_to(&UpSet::singleton(0)), Some(9));
        assert_eq!(UpSet::all().max_distance_to(&UpSet::progression(5, 2)), Some(2));
        assert_eq!(UpSet::empty().max_distance_to(&UpSet::empty()), Some(0));
    }

    #[test]
    fn parse_shorthand_and_json() {
        assert_eq!("all".parse::<UpSet>().unwrap(), UpSet::all());
        assert_eq!("even".parse::<UpSet>().unwrap(), UpSet::evens());
        assert_eq!("odd".parse::<UpSet>().unwrap(), UpSet::odds());
        assert_eq!("finite:[3,1]".parse::<UpSet>().unwrap(), UpSet::finite([1, 3]));
        assert_eq!("mod:3:0".parse::<UpSet>().unwrap(), UpSet::progression(3, 0));
        let j: UpSet = serde_json::from_str(r#"{"prefix":[1],"t":2,"p":2,"residues":[0]}"#).unwrap();
        assert_eq!(j, UpSet::new([1], 2, 2, [0]));
        let s: UpSet = serde_json::from_str(r#""even""#).unwrap();
        assert_eq!(s, UpSet::evens());
        assert!(serde_json::from_str::<UpSet>(r#"{"prefix":[5],"t":2,"p":1,"residues":[]}"#).is_err());
        let back: UpSet = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        assert_eq!(back, j);
    }

    fn arb_upset() -> impl Strategy<Value = UpSet> {
        (
            proptest::collection::vec(0u64..12, 0..5),
            0u64..12,
            1u64..=6,
            proptest::collection::vec(0u64..6, 0..4),
        )
            .prop_map(|(pre, t, p, res)| UpSet::new(pre.into_iter().filter(|&x| x < t), t, p, res))
    }

    proptest! {
        #[test]
        fn boolean_ops_match_unroll(a in arb_upset(), b in arb_upset()) {
            let n = a.threshold() + b.threshold() + 2 * a.period().lcm(&b.period()) + 1;
            let (x, y) = (bits(&a, n), bits(&b, n));
            let u = bits(&a.union(&b), n);
            let i = bits(&a.intersect(&b), n);
            let d = bits(&a.difference(&b), n);
            for k in 0..n as usize {
                prop_assert_eq!(u[k], x[k] || y[k]);
                prop_assert_eq!(i[k], x[k] && y[k]);
                prop_assert_eq!(d[k], x[k] && !y[k]);
            }
        }

        #[test]
        fn canonical_is_semantic(a in arb_upset(), b in arb_upset()) {
            let n = a.threshold() + b.threshold() + 2 * a.period().lcm(&b.period()) + 1;
            prop_assert_eq!(a == b, bits(&a, n) == bits(&b, n));
            let again = UpSet::new(a.prefix().iter().copied(), a.threshold(), a.period(), a.residues().iter().copied());
            prop_assert_eq!(again, a);
        }

        #[test]
        fn shift_roundtrip(a in arb_upset(), k in -10i64..10) {
            let back = a.shift(k).shift(-k);
            prop_assert!(back.is_subset(&a));
            if k >= 0 { prop_assert_eq!(back, a.clone()); }
            let n = a.threshold() + 2 * a.period() + 12;
            let s = a.shift(k);
            for i in 0..n {
                let j = i as i64 - k;
                prop_assert_eq!(s.contains(i), j >= 0 && a.contains(j as u64));
            }
        }

        #[test]
        fn affine_matches_unroll(a in arb_upset(), m in 1u64..4, b in -8i64..8) {
            let img = a.affine_image(m, b);
            let pre = a.affine_preimage(m, b);
            let n = (a.threshold() + 2 * a.period()) * m + 20;
            for x in 0..n {
                let hit = (0..n + 16).any(|i| a.contains(i) && m as i64 * i as i64 + b == x as i64);
                prop_assert_eq!(img.contains(x), hit);
                let v = m as i64 * x as i64 + b;
                prop_assert_eq!(pre.contains(x), v >= 0 && a.contains(v as u64));
            }
        }
    }
}
