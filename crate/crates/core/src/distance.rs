//! Plaintext shared-length algorithms. These are the reference results the
//! privacy-preserving variants in [`crate::matcher`] must reproduce exactly.

use thiserror::Error;

use crate::haplotype::{Haplotype, Letter};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistanceError {
    #[error("please input equal length segments ({left} != {right})")]
    LengthMismatch { left: usize, right: usize },
}

/// Length of the longest common subsequence.
pub fn lcs_len(x: &Haplotype, y: &Haplotype) -> usize {
    let (x, y) = (x.letters(), y.letters());
    let (t, m) = (x.len(), y.len());
    let mut w = vec![vec![0usize; m + 1]; t + 1];
    for i in 1..=t {
        for j in 1..=m {
            w[i][j] = if x[i - 1] == y[j - 1] {
                1 + w[i - 1][j - 1]
            } else if w[i - 1][j] >= w[i][j - 1] {
                w[i - 1][j]
            } else {
                w[i][j - 1]
            };
        }
    }
    w[t][m]
}

/// One longest common subsequence, recovered from a suffix table. This is
/// the full-output form the length-only variants were cut down from, and
/// the plaintext LCS baseline in the benchmark.
pub fn lcs_sequence(x: &Haplotype, y: &Haplotype) -> Vec<Letter> {
    let (x, y) = (x.letters(), y.letters());
    let (m, n) = (x.len(), y.len());
    let mut opt = vec![vec![0usize; n + 1]; m + 1];
    for i in (0..m).rev() {
        for j in (0..n).rev() {
            opt[i][j] = if x[i] == y[j] {
                opt[i + 1][j + 1] + 1
            } else {
                opt[i + 1][j].max(opt[i][j + 1])
            };
        }
    }
    let mut out = Vec::with_capacity(opt[0][0]);
    let (mut i, mut j) = (0, 0);
    while i < m && j < n {
        if x[i] == y[j] {
            out.push(x[i]);
            i += 1;
            j += 1;
        } else if opt[i + 1][j] >= opt[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Number of positions holding the same letter. Lengths must agree.
pub fn hamming_shared(x: &Haplotype, y: &Haplotype) -> Result<usize, DistanceError> {
    if x.len() != y.len() {
        return Err(DistanceError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(x.letters()
        .iter()
        .zip(y.letters())
        .filter(|(a, b)| a == b)
        .count())
}

/// `max(|x|, |y|)` minus the Levenshtein distance.
pub fn edit_shared(x: &Haplotype, y: &Haplotype) -> usize {
    max_len(x, y) - edit_distance(x, y)
}

/// Unit-cost Levenshtein distance; `x` plays the row role.
pub fn edit_distance(x: &Haplotype, y: &Haplotype) -> usize {
    let (x, y) = (x.letters(), y.letters());
    let (len1, len2) = (x.len(), y.len());
    let mut dp = vec![vec![0usize; len2 + 1]; len1 + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in dp[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 0..len1 {
        for j in 0..len2 {
            dp[i + 1][j + 1] = if x[i] == y[j] {
                dp[i][j]
            } else {
                let replace = dp[i][j] + 1;
                let insert = dp[i][j + 1] + 1;
                let delete = dp[i + 1][j] + 1;
                let min = if replace > insert { insert } else { replace };
                if delete > min {
                    min
                } else {
                    delete
                }
            };
        }
    }
    dp[len1][len2]
}

fn max_len(x: &Haplotype, y: &Haplotype) -> usize {
    x.len().max(y.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haplotype::parse_haplotype;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn h(s: &str) -> Haplotype {
        parse_haplotype(s).unwrap()
    }

    /// Longest common subsequence by enumerating every subsequence of `x`.
    fn brute_lcs(x: &[Letter], y: &[Letter]) -> usize {
        let is_subseq = |sub: &[Letter]| {
            let mut it = y.iter();
            sub.iter().all(|c| it.any(|d| d == c))
        };
        (0u32..1 << x.len())
            .filter_map(|mask| {
                let sub: Vec<Letter> = (0..x.len())
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| x[i])
                    .collect();
                is_subseq(&sub).then_some(sub.len())
            })
            .max()
            .unwrap()
    }

    /// Levenshtein distance by memoised recursion on suffixes.
    fn levenshtein(x: &[Letter], y: &[Letter]) -> usize {
        fn go(x: &[Letter], y: &[Letter], memo: &mut HashMap<(usize, usize), usize>) -> usize {
            if x.is_empty() {
                return y.len();
            }
            if y.is_empty() {
                return x.len();
            }
            if let Some(&v) = memo.get(&(x.len(), y.len())) {
                return v;
            }
            let sub = go(&x[1..], &y[1..], memo) + usize::from(x[0] != y[0]);
            let del = go(&x[1..], y, memo) + 1;
            let ins = go(x, &y[1..], memo) + 1;
            let v = sub.min(del).min(ins);
            memo.insert((x.len(), y.len()), v);
            v
        }
        go(x, y, &mut HashMap::new())
    }

    fn is_subsequence(sub: &[Letter], of: &[Letter]) -> bool {
        let mut it = of.iter();
        sub.iter().all(|c| it.any(|d| d == c))
    }

    #[test]
    fn lcs_sequence_examples() {
        assert_eq!(lcs_sequence(&h("AGGCA"), &h("AGCA")), h("AGCA").letters());
        assert!(lcs_sequence(&h("A"), &h("G")).is_empty());
    }

    #[test]
    fn lcs_examples() {
        assert_eq!(lcs_len(&h("AGCT"), &h("AGCT")), 4);
        assert_eq!(lcs_len(&h("AGGCA"), &h("AGCA")), 4);
        assert_eq!(brute_lcs(h("AGGCA").letters(), h("AGCA").letters()), 4);
        assert_eq!(lcs_len(&h("A"), &h("G")), 0);
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_shared(&h("AG"), &h("AC")), Ok(1));
        assert_eq!(hamming_shared(&h("AGCT*"), &h("AGCT*")), Ok(5));
        assert_eq!(hamming_shared(&h("AGCT*"), &h("TCGA*")), Ok(1));
        assert_eq!(
            hamming_shared(&h("AG"), &h("AGC")),
            Err(DistanceError::LengthMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn edit_examples() {
        assert_eq!(edit_shared(&h("AG"), &h("AG")), 2);
        assert_eq!(edit_shared(&h("A"), &h("G")), 0);
        assert_eq!(levenshtein(h("AGC").letters(), h("AC").letters()), 1);
        assert_eq!(edit_shared(&h("AGC"), &h("AC")), 2);
    }

    #[test]
    fn lcs_exhaustive_two_letter_alphabet() {
        let all_strings = |len: usize| {
            (0u32..1 << len).map(move |bits| {
                (0..len)
                    .map(|i| if bits & (1 << i) != 0 { Letter::G } else { Letter::A })
                    .collect::<Vec<_>>()
            })
        };
        for lx in 1..=8 {
            for ly in 1..=8 {
                for x in all_strings(lx) {
                    let hx = Haplotype::new(x.clone()).unwrap();
                    for y in all_strings(ly) {
                        let hy = Haplotype::new(y.clone()).unwrap();
                        assert_eq!(lcs_len(&hx, &hy), brute_lcs(&x, &y), "{hx} vs {hy}");
                    }
                }
            }
        }
    }

    fn arb_haplotype(max: usize) -> impl Strategy<Value = Haplotype> {
        prop::collection::vec(prop::sample::select(Letter::ALPHABET.to_vec()), 1..=max)
            .prop_map(|v| Haplotype::new(v).unwrap())
    }

    fn arb_equal_pair(max: usize) -> impl Strategy<Value = (Haplotype, Haplotype)> {
        (1..=max).prop_flat_map(|len| {
            let v = prop::collection::vec(prop::sample::select(Letter::ALPHABET.to_vec()), len);
            (v.clone(), v).prop_map(|(a, b)| (Haplotype::new(a).unwrap(), Haplotype::new(b).unwrap()))
        })
    }

    proptest! {
        #[test]
        fn lcs_sequence_is_a_longest_common_subsequence(
            x in prop::collection::vec(0usize..5, 1..24),
            y in prop::collection::vec(0usize..5, 1..24),
        ) {
            let x = Haplotype::new(x.into_iter().map(|i| Letter::ALPHABET[i]).collect()).unwrap();
            let y = Haplotype::new(y.into_iter().map(|i| Letter::ALPHABET[i]).collect()).unwrap();
            let seq = lcs_sequence(&x, &y);
            prop_assert_eq!(seq.len(), lcs_len(&x, &y));
            prop_assert!(is_subsequence(&seq, x.letters()));
            prop_assert!(is_subsequence(&seq, y.letters()));
        }

        #[test]
        fn lcs_properties(x in arb_haplotype(40), y in arb_haplotype(40)) {
            let l = lcs_len(&x, &y);
            prop_assert_eq!(l, lcs_len(&y, &x));
            prop_assert!(l <= x.len().min(y.len()));
            prop_assert_eq!(lcs_len(&x, &x), x.len());
        }

        #[test]
        fn hamming_properties((x, y) in arb_equal_pair(64)) {
            let shared = hamming_shared(&x, &y).unwrap();
            prop_assert_eq!(shared, hamming_shared(&y, &x).unwrap());
            prop_assert_eq!(hamming_shared(&x, &x).unwrap(), x.len());
            let distance = x.letters().iter().zip(y.letters()).filter(|(a, b)| a != b).count();
            prop_assert_eq!(shared + distance, x.len());
            prop_assert!(edit_distance(&x, &y) <= distance);
        }

        #[test]
        fn edit_matches_levenshtein(x in arb_haplotype(24), y in arb_haplotype(24)) {
            prop_assert_eq!(edit_distance(&x, &y), levenshtein(x.letters(), y.letters()));
            let shared = edit_shared(&x, &y);
            prop_assert!(shared <= x.len().max(y.len()));
            prop_assert_eq!(edit_shared(&x, &x), x.len());
        }
    }
}
