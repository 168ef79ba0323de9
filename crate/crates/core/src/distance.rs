//! Edit distance over Unicode scalar values and its thresholded normalization.

use std::fmt;

/// Threshold above which a normalized distance is clamped to 1. Lies in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Tau(f64);

impl Tau {
    pub const DEFAULT: Tau = Tau(0.5);

    pub fn new(value: f64) -> Option<Tau> {
        (value > 0.0 && value <= 1.0).then_some(Tau(value))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for Tau {
    fn default() -> Self {
        Tau::DEFAULT
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Minimum number of single-character insertions, deletions and substitutions
/// turning `a` into `b`.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(ca != cb);
            curr[j + 1] = substitution.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Normalized Levenshtein distance clamped to 1 above `tau`. Two empty strings
/// are at distance 0. Case-sensitive.
pub fn nl_tau(a: &str, b: &str, tau: Tau) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    let d = levenshtein_chars(&a, &b) as f64 / longest as f64;
    if d > tau.get() {
        1.0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Full-matrix recurrence, kept separate from the two-row production loop.
    fn oracle(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut m = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in m.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in m[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
                m[i][j] = (m[i - 1][j] + 1).min(m[i][j - 1] + 1).min(m[i - 1][j - 1] + cost);
            }
        }
        m[a.len()][b.len()]
    }

    #[test]
    fn classic_pairs() {
        assert_eq!(oracle("kitten", "sitting"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("flaw", "lawn"), 2);
    }

    #[test]
    fn counts_scalar_values_not_bytes() {
        assert_eq!(levenshtein("é", "e"), 1);
        assert_eq!(levenshtein("Zürich", "Zurich"), 1);
        assert_eq!(nl_tau("ü", "u", Tau::new(1.0).unwrap()), 1.0);
    }

    #[test]
    fn normalized_values() {
        let d = nl_tau("kitten", "sitting", Tau::new(0.5).unwrap());
        assert!((d - 3.0 / 7.0).abs() < 1e-15);
        assert_eq!(nl_tau("kitten", "sitting", Tau::new(0.4).unwrap()), 1.0);
        assert_eq!(nl_tau("x", "x", Tau::new(0.1).unwrap()), 0.0);
        assert_eq!(nl_tau("", "", Tau::DEFAULT), 0.0);
        assert_eq!(nl_tau("", "a", Tau::new(1.0).unwrap()), 1.0);
    }

    #[test]
    fn case_sensitive() {
        assert!(nl_tau("A", "a", Tau::new(1.0).unwrap()) > 0.0);
    }

    #[test]
    fn tau_bounds() {
        assert!(Tau::new(0.0).is_none());
        assert!(Tau::new(1.0001).is_none());
        assert!(Tau::new(f64::NAN).is_none());
        assert_eq!(Tau::new(1.0).unwrap().get(), 1.0);
    }

    proptest! {
        #[test]
        fn matches_oracle(a in "[abc é]{0,12}", b in "[abc é]{0,12}") {
            prop_assert_eq!(levenshtein(&a, &b), oracle(&a, &b));
        }

        #[test]
        fn symmetric(a in "\\PC{0,10}", b in "\\PC{0,10}", t in 0.01f64..=1.0) {
            let tau = Tau::new(t).unwrap();
            prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
            prop_assert_eq!(nl_tau(&a, &b, tau), nl_tau(&b, &a, tau));
            prop_assert_eq!(levenshtein(&a, &a), 0);
        }

        #[test]
        fn triangle_inequality(a in "[ab]{0,8}", b in "[ab]{0,8}", c in "[ab]{0,8}") {
            prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        }

        #[test]
        fn clamped_range(a in "[abcd]{0,8}", b in "[abcd]{0,8}", t in 0.01f64..=1.0) {
            let d = nl_tau(&a, &b, Tau::new(t).unwrap());
            prop_assert!(d == 1.0 || (d >= 0.0 && d <= t));
        }
    }
}
