use super::MetricError;

/// Unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn normalize(s: &str) -> Vec<char> {
    s.trim().to_lowercase().chars().collect()
}

/// Normalized Levenshtein similarity of lowercased, trimmed strings; 1.0 when
/// both are empty.
pub fn nls(pred: &str, gold: &str) -> f64 {
    let p = normalize(pred);
    let g = normalize(gold);
    let longest = p.len().max(g.len());
    if longest == 0 {
        return 1.0;
    }
    let d = levenshtein_chars(&p, &g);
    (longest - d) as f64 / longest as f64
}

/// Per-sample ANLS: best thresholded similarity against any gold answer.
pub fn anls<S: AsRef<str>>(pred: &str, golds: &[S], tau: f64) -> Result<f64, MetricError> {
    if golds.is_empty() {
        return Err(MetricError::NoGoldAnswers);
    }
    Ok(golds
        .iter()
        .map(|g| {
            let s = nls(pred, g.as_ref());
            if s >= tau {
                s
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max))
}
