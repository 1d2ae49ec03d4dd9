//! Caption metrics: a consensus-based n-gram score (CIDEr-style) and a
//! lightweight alignment score (METEOR-style).
//!
//! Both metrics are pinned, self-contained definitions — tokenization, the
//! suffix stemmer, and every constant live here so scores are reproducible
//! without external data files.

use std::collections::BTreeMap;

use super::MetricsError;

/// Lowercases, strips punctuation, and splits on whitespace. Any character
/// that is not alphanumeric acts as a separator.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// Tiny suffix stemmer used by the second METEOR matching stage.
///
/// Rules, applied first-match (lengths in bytes):
/// `-ies -> -y` (len > 4), `-ing` dropped (len > 5), `-ed` dropped
/// (len > 4), `-es` dropped (len > 4), `-s` dropped (len > 3 unless `-ss`).
pub fn stem(word: &str) -> String {
    let n = word.len();
    if n > 4 && word.ends_with("ies") {
        return format!("{}y", &word[..n - 3]);
    }
    if n > 5 && word.ends_with("ing") {
        return word[..n - 3].to_string();
    }
    if n > 4 && word.ends_with("ed") {
        return word[..n - 2].to_string();
    }
    if n > 4 && word.ends_with("es") {
        return word[..n - 2].to_string();
    }
    if n > 3 && word.ends_with('s') && !word.ends_with("ss") {
        return word[..n - 1].to_string();
    }
    word.to_string()
}

/// Greedy leftmost unigram alignment between candidate and reference tokens.
/// Returns matched (candidate index, reference index) pairs ordered by
/// candidate position.
fn align(cand: &[String], reference: &[String]) -> Vec<(usize, usize)> {
    let cand_stems: Vec<String> = cand.iter().map(|w| stem(w)).collect();
    let ref_stems: Vec<String> = reference.iter().map(|w| stem(w)).collect();
    let mut cand_used = vec![false; cand.len()];
    let mut ref_used = vec![false; reference.len()];
    let mut pairs = Vec::new();
    // stage 1: exact surface forms; stage 2: stems over the leftovers
    for exact in [true, false] {
        for (ci, cw) in cand.iter().enumerate() {
            if cand_used[ci] {
                continue;
            }
            let needle = if exact { cw } else { &cand_stems[ci] };
            let hit = (0..reference.len()).find(|&ri| {
                !ref_used[ri] && needle == if exact { &reference[ri] } else { &ref_stems[ri] }
            });
            if let Some(ri) = hit {
                cand_used[ci] = true;
                ref_used[ri] = true;
                pairs.push((ci, ri));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Number of maximal runs of matches that are contiguous in both sentences.
fn chunk_count(pairs: &[(usize, usize)]) -> usize {
    let mut chunks = 0;
    let mut prev: Option<(usize, usize)> = None;
    for &(ci, ri) in pairs {
        let contiguous = prev.map_or(false, |(pc, pr)| ci == pc + 1 && ri == pr + 1);
        if !contiguous {
            chunks += 1;
        }
        prev = Some((ci, ri));
    }
    chunks
}

/// METEOR-style alignment score of one candidate against its references;
/// the score is the best over references.
///
/// Per reference: matches `m` come from two-stage greedy leftmost alignment
/// (exact, then stemmed), precision and recall are `m` over the candidate and
/// reference lengths, `Fmean = 10PR / (R + 9P)`, and the fragmentation
/// penalty is `0.5 (chunks / m)^3`. An empty candidate (or one with no
/// matches) scores 0.
pub fn meteor_lite(candidate: &str, references: &[String]) -> Result<f64, MetricsError> {
    if references.is_empty() {
        return Err(MetricsError::EmptyReferences { index: 0 });
    }
    let cand = tokenize(candidate);
    let mut best = 0.0f64;
    for reference in references {
        let reference = tokenize(reference);
        if cand.is_empty() || reference.is_empty() {
            continue;
        }
        let pairs = align(&cand, &reference);
        let m = pairs.len() as f64;
        if m == 0.0 {
            continue;
        }
        let p = m / cand.len() as f64;
        let r = m / reference.len() as f64;
        let fmean = 10.0 * p * r / (r + 9.0 * p);
        let penalty = 0.5 * (chunk_count(&pairs) as f64 / m).powi(3);
        best = best.max(fmean * (1.0 - penalty));
    }
    Ok(best)
}

/// Largest n-gram order used by the consensus metric.
const NGRAM_ORDERS: usize = 4;
/// Gaussian length-penalty width.
const LENGTH_SIGMA: f64 = 6.0;

type NgramCounts = BTreeMap<Vec<String>, f64>;

/// Raw n-gram counts of orders 1..=4. Index 0 holds unigrams.
fn ngram_counts(tokens: &[String]) -> [NgramCounts; NGRAM_ORDERS] {
    let mut counts: [NgramCounts; NGRAM_ORDERS] = Default::default();
    for (order, slot) in counts.iter_mut().enumerate() {
        let n = order + 1;
        if tokens.len() >= n {
            for window in tokens.windows(n) {
                *slot.entry(window.to_vec()).or_insert(0.0) += 1.0;
            }
        }
    }
    counts
}

/// Per-item scores of the consensus n-gram metric over a corpus.
///
/// For each order n in 1..=4, candidate and reference n-gram counts are
/// weighted by `idf = ln(corpus size) - ln(max(1, document frequency))`,
/// where the document frequency counts the reference *sets* containing the
/// n-gram. Similarity against one reference is the count-clipped dot product
/// divided by the vector norms, damped by a Gaussian penalty on the token
/// length difference. Scores are summed over references, averaged over
/// orders, divided by the reference count, and scaled by 10.
pub fn cider_scores(
    candidates: &[String],
    references: &[Vec<String>],
) -> Result<Vec<f64>, MetricsError> {
    if candidates.len() != references.len() {
        return Err(MetricsError::MismatchedLengths {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    if let Some(index) = references.iter().position(|refs| refs.is_empty()) {
        return Err(MetricsError::EmptyReferences { index });
    }

    let cand_tokens: Vec<Vec<String>> = candidates.iter().map(|c| tokenize(c)).collect();
    let ref_tokens: Vec<Vec<Vec<String>>> = references
        .iter()
        .map(|refs| refs.iter().map(|r| tokenize(r)).collect())
        .collect();

    // document frequency: how many items' reference sets contain each n-gram
    let mut df: [NgramCounts; NGRAM_ORDERS] = Default::default();
    for refs in &ref_tokens {
        let mut seen: [NgramCounts; NGRAM_ORDERS] = Default::default();
        for r in refs {
            for (order, counts) in ngram_counts(r).into_iter().enumerate() {
                for gram in counts.into_keys() {
                    seen[order].insert(gram, 1.0);
                }
            }
        }
        for (order, grams) in seen.into_iter().enumerate() {
            for gram in grams.into_keys() {
                *df[order].entry(gram).or_insert(0.0) += 1.0;
            }
        }
    }
    let log_corpus = (candidates.len() as f64).ln();
    let idf = |order: usize, gram: &Vec<String>| -> f64 {
        let freq = df[order].get(gram).copied().unwrap_or(0.0);
        log_corpus - freq.max(1.0).ln()
    };
    let weighted = |tokens: &[String]| -> ([NgramCounts; NGRAM_ORDERS], [f64; NGRAM_ORDERS]) {
        let mut vecs = ngram_counts(tokens);
        let mut norms = [0.0; NGRAM_ORDERS];
        for (order, vec) in vecs.iter_mut().enumerate() {
            for (gram, count) in vec.iter_mut() {
                *count *= idf(order, gram);
                norms[order] += *count * *count;
            }
            norms[order] = norms[order].sqrt();
        }
        (vecs, norms)
    };

    let mut scores = Vec::with_capacity(candidates.len());
    for (cand, refs) in cand_tokens.iter().zip(&ref_tokens) {
        let (cand_vec, cand_norm) = weighted(cand);
        let mut per_order = [0.0f64; NGRAM_ORDERS];
        for r in refs {
            let (ref_vec, ref_norm) = weighted(r);
            let delta = cand.len() as f64 - r.len() as f64;
            let length_penalty = (-delta * delta / (2.0 * LENGTH_SIGMA * LENGTH_SIGMA)).exp();
            for order in 0..NGRAM_ORDERS {
                if cand_norm[order] == 0.0 || ref_norm[order] == 0.0 {
                    continue;
                }
                let mut dot = 0.0;
                for (gram, cw) in &cand_vec[order] {
                    if let Some(rw) = ref_vec[order].get(gram) {
                        dot += cw.min(*rw) * rw;
                    }
                }
                per_order[order] += dot / (cand_norm[order] * ref_norm[order]) * length_penalty;
            }
        }
        let mean_over_orders = per_order.iter().sum::<f64>() / NGRAM_ORDERS as f64;
        scores.push(mean_over_orders / refs.len() as f64 * 10.0);
    }
    Ok(scores)
}

/// Corpus-level consensus score: the mean of [`cider_scores`].
pub fn cider(candidates: &[String], references: &[Vec<String>]) -> Result<f64, MetricsError> {
    let scores = cider_scores(candidates, references)?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn tokenize_strips_case_and_punctuation() {
        assert_eq!(
            tokenize("The quick, brown fox -- jumps!"),
            s(&["the", "quick", "brown", "fox", "jumps"])
        );
        assert_eq!(tokenize("it's 2 dogs"), s(&["it", "s", "2", "dogs"]));
        assert!(tokenize("  ...  ").is_empty());
    }

    #[test]
    fn stemmer_applies_pinned_rules() {
        for (word, expect) in [
            ("puppies", "puppy"),
            ("running", "runn"),
            ("jumped", "jump"),
            ("boxes", "box"),
            ("dogs", "dog"),
            ("glass", "glass"),
            ("ties", "tie"),  // too short for the -ies rule, caught by -s
            ("sing", "sing"), // too short for the -ing rule
            ("red", "red"),
            ("bus", "bus"), // too short for the -s rule
        ] {
            assert_eq!(stem(word), expect, "stem({word})");
        }
    }

    #[test]
    fn meteor_matches_hand_computed_example() {
        // matches: brown, dog -> m=2, one chunk
        // P = 2/3, R = 2/4, Fmean = (10 * 1/3) / 6.5, penalty = 0.5 * (1/2)^3
        let score = meteor_lite("a brown dog", &s(&["the brown dog runs"])).unwrap();
        let fmean: f64 = (10.0 / 3.0) / 6.5;
        assert!((score - fmean * (1.0 - 0.0625)).abs() < 1e-12);
    }

    #[test]
    fn meteor_uses_stem_stage_and_chunking() {
        // "dogs" matches "dog" only through the stemmer
        let score = meteor_lite("dogs run", &s(&["dog run"])).unwrap();
        assert!(score > 0.9, "got {score}");
        // scrambled word order costs fragmentation penalty
        let ordered = meteor_lite("a b c d", &s(&["a b c d"])).unwrap();
        let scrambled = meteor_lite("d c b a", &s(&["a b c d"])).unwrap();
        assert!(scrambled < ordered);
        assert!((ordered - (1.0 - 0.5 / 64.0)).abs() < 1e-12);
    }

    #[test]
    fn meteor_takes_best_reference_and_handles_empties() {
        let refs = s(&["completely unrelated words", "a red car parked"]);
        let one = meteor_lite("a red car parked", &refs).unwrap();
        assert!((one - (1.0 - 0.5 / 64.0)).abs() < 1e-12);
        assert_eq!(meteor_lite("", &refs).unwrap(), 0.0);
        assert_eq!(meteor_lite("zebra", &refs).unwrap(), 0.0);
        assert!(meteor_lite("a", &[]).is_err());
    }

    #[test]
    fn cider_is_zero_for_single_item_corpus() {
        // with one item every idf is ln(1) - ln(1) = 0
        let score = cider(&s(&["a red car"]), &[s(&["a red car"])]).unwrap();
        assert_eq!(score, 0.0);
    }

    #[test]
    fn cider_matches_hand_computed_two_item_corpus() {
        // "a" appears in both reference sets so its idf is 0; every other
        // n-gram is unique to its item. Each candidate equals its reference,
        // so orders 1..3 give similarity 1 and order 4 has no n-grams:
        // score = 10 * (3/4) = 7.5 for both items.
        let cands = s(&["a red car", "a blue bird"]);
        let refs = vec![s(&["a red car"]), s(&["a blue bird"])];
        let scores = cider_scores(&cands, &refs).unwrap();
        for score in scores {
            assert!((score - 7.5).abs() < 1e-12, "got {score}");
        }
    }

    #[test]
    fn cider_rewards_consensus_ngrams() {
        let refs = vec![
            s(&["a man rides a brown horse", "a person on a horse"]),
            s(&["two dogs play in the park", "dogs playing on grass"]),
            s(&["a man walks a small dog", "a person walking a dog"]),
        ];
        let good = s(&["a man rides a brown horse", "two dogs play in the park", "a man walks a small dog"]);
        let weak = s(&["a brown horse", "dogs", "a man"]);
        let g = cider_scores(&good, &refs).unwrap();
        let w = cider_scores(&weak, &refs).unwrap();
        for (gs, ws) in g.iter().zip(&w) {
            assert!(gs > ws, "{gs} vs {ws}");
        }
    }

    #[test]
    fn cider_validates_corpus_shape() {
        assert!(matches!(
            cider(&s(&["a"]), &[]),
            Err(MetricsError::MismatchedLengths { .. })
        ));
        assert!(matches!(cider(&[], &[]), Err(MetricsError::EmptyCorpus)));
        assert!(matches!(
            cider(&s(&["a"]), &[vec![]]),
            Err(MetricsError::EmptyReferences { index: 0 })
        ));
    }

    #[test]
    fn scores_are_case_and_punctuation_insensitive() {
        let a = meteor_lite("A Brown Dog!", &s(&["the brown dog runs"])).unwrap();
        let b = meteor_lite("a brown dog", &s(&["The Brown Dog runs."])).unwrap();
        assert_eq!(a, b);
        let c1 = cider(&s(&["A Red Car.", "a blue bird"]), &[s(&["a red car"]), s(&["a BLUE bird"])]).unwrap();
        let c2 = cider(&s(&["a red car", "a blue bird"]), &[s(&["a red car"]), s(&["a blue bird"])]).unwrap();
        assert!((c1 - c2).abs() < 1e-15);
    }
}
