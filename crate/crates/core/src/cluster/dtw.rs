//! Dynamic time warping with unit-weight diagonal, up and left steps.

use crate::error::{Error, Result};

/// Square root of the minimal cumulative squared cost over monotone alignments.
///
/// `window` is a Sakoe-Chiba half-width on the index difference `|i - j|`.
pub fn dtw_distance(a: &[f64], b: &[f64], window: Option<usize>) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("DTW needs nonempty sequences".into()));
    }
    let (n, m) = (a.len(), b.len());
    let w = match window {
        Some(w) if w < n.abs_diff(m) => {
            return Err(Error::InvalidParameter(format!(
                "window {w} cannot align sequences of lengths {n} and {m}"
            )))
        }
        Some(w) => w,
        None => n.max(m),
    };
    let inf = f64::INFINITY;
    let mut prev = vec![inf; m + 1];
    let mut cur = vec![inf; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        cur.fill(inf);
        let lo = i.saturating_sub(w).max(1);
        let hi = (i + w).min(m);
        for j in lo..=hi {
            let c = (a[i - 1] - b[j - 1]).powi(2);
            cur[j] = c + prev[j - 1].min(prev[j]).min(cur[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m].sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Minimum over every monotone path, by recursion over the three steps.
    fn brute(a: &[f64], b: &[f64], i: usize, j: usize, window: usize) -> f64 {
        if i.abs_diff(j) > window {
            return f64::INFINITY;
        }
        let c = (a[i] - b[j]).powi(2);
        if i == 0 && j == 0 {
            return c;
        }
        let mut best = f64::INFINITY;
        if i > 0 && j > 0 {
            best = best.min(brute(a, b, i - 1, j - 1, window));
        }
        if i > 0 {
            best = best.min(brute(a, b, i - 1, j, window));
        }
        if j > 0 {
            best = best.min(brute(a, b, i, j - 1, window));
        }
        c + best
    }

    fn oracle(a: &[f64], b: &[f64], window: Option<usize>) -> f64 {
        brute(a, b, a.len() - 1, b.len() - 1, window.unwrap_or(usize::MAX)).sqrt()
    }

    #[test]
    fn identical_sequences() {
        let a = [0.3, 1.0, -2.0, 4.0];
        assert_eq!(dtw_distance(&a, &a, None).unwrap(), 0.0);
    }

    #[test]
    fn shifted_spike() {
        let a = [0.0, 0.0, 1.0, 0.0];
        let b = [0.0, 1.0, 0.0, 0.0];
        let d = dtw_distance(&a, &b, None).unwrap();
        assert_eq!(d, oracle(&a, &b, None));
        assert_eq!(d, 0.0);
        // a band of width 0 forces the lockstep alignment
        assert_eq!(dtw_distance(&a, &b, Some(0)).unwrap(), 2f64.sqrt());
    }

    #[test]
    fn errors() {
        assert!(dtw_distance(&[], &[1.0], None).is_err());
        assert!(dtw_distance(&[1.0, 2.0, 3.0], &[1.0], Some(1)).is_err());
        assert!(dtw_distance(&[1.0, 2.0, 3.0], &[1.0], Some(2)).is_ok());
    }

    fn seq() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, 1..=5)
    }

    proptest! {
        #[test]
        fn matches_exhaustive_search(a in seq(), b in seq(), extra in 0usize..3, banded in any::<bool>()) {
            let window = banded.then(|| a.len().abs_diff(b.len()) + extra);
            let got = dtw_distance(&a, &b, window).unwrap();
            let want = oracle(&a, &b, window);
            prop_assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }

        #[test]
        fn symmetric(a in seq(), b in seq()) {
            prop_assert_eq!(dtw_distance(&a, &b, None).unwrap(), dtw_distance(&b, &a, None).unwrap());
        }
    }
}
