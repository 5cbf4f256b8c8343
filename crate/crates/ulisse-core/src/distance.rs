//! True distances — Euclidean and Sakoe-Chiba-constrained DTW — with early
//! abandoning, plus the DTW query envelope used by LB_Keogh.

use crate::error::{Error, Result};

/// Sakoe-Chiba band half-width in points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WarpingWindow {
    pub r: usize,
}

impl WarpingWindow {
    pub fn absolute(r: usize) -> Self {
        WarpingWindow { r }
    }

    /// `r = ceil(fraction * len)`.
    pub fn from_fraction(fraction: f64, len: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::Argument(format!(
                "warping fraction {fraction} outside [0, 1)"
            )));
        }
        Ok(WarpingWindow {
            r: (fraction * len as f64).ceil() as usize,
        })
    }

    fn check(&self, len: usize) -> Result<()> {
        if self.r >= len {
            return Err(Error::Argument(format!(
                "warping window {} not below series length {len}",
                self.r
            )));
        }
        Ok(())
    }
}

/// Per-position `[min, max]` of a series over a `±r` window; the space all
/// banded warping alignments can reach.
#[derive(Debug, Clone, PartialEq)]
pub struct DtwEnvelope {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub r: WarpingWindow,
}

impl DtwEnvelope {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }
}

fn check_equal_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Argument(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Euclidean distance; returns `None` once the running squared sum exceeds
/// `abandon_at²` (the true distance is then guaranteed `> abandon_at`).
/// Also reports how many points were examined before returning.
pub fn euclidean_counted(
    a: &[f64],
    b: &[f64],
    abandon_at: Option<f64>,
) -> Result<(Option<f64>, u64)> {
    check_equal_len(a, b)?;
    let thr = abandon_at.map(|t| t * t);
    let mut sum = 0.0;
    for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
        let d = x - y;
        sum += d * d;
        if let Some(t) = thr {
            if sum > t {
                return Ok((None, i as u64 + 1));
            }
        }
    }
    Ok((Some(sum.sqrt()), a.len() as u64))
}

pub fn euclidean(a: &[f64], b: &[f64], abandon_at: Option<f64>) -> Result<Option<f64>> {
    euclidean_counted(a, b, abandon_at).map(|(d, _)| d)
}

/// Banded DTW via dynamic programming over two rolling rows of width
/// `2r + 1`. Abandons (returns `None`) when every cell of a row exceeds
/// `abandon_at²`; the reported count is the number of rows processed.
#[allow(clippy::needless_range_loop)] // DP over (i, j) index pairs
pub fn dtw_counted(
    a: &[f64],
    b: &[f64],
    r: WarpingWindow,
    abandon_at: Option<f64>,
) -> Result<(Option<f64>, u64)> {
    check_equal_len(a, b)?;
    r.check(a.len())?;
    let n = a.len();
    let r = r.r;
    let thr = abandon_at.map(|t| t * t);
    let width = 2 * r + 1;
    // prev[c] holds cost(i-1, j) for j = (i-1) - r + c; shifting the window
    // by one per row keeps the same column offset layout between rows.
    let mut prev = vec![f64::INFINITY; width];
    let mut cur = vec![f64::INFINITY; width];
    for i in 0..n {
        let lo = i.saturating_sub(r);
        let hi = (i + r).min(n - 1);
        cur.fill(f64::INFINITY);
        let mut row_min = f64::INFINITY;
        for j in lo..=hi {
            let c = j + r - i; // window-local column
            let d = a[i] - b[j];
            let step = d * d;
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                // prev row is shifted one column right in local coordinates.
                let up = if i > 0 && c + 1 < width { prev[c + 1] } else { f64::INFINITY };
                let diag = if i > 0 { prev[c] } else { f64::INFINITY };
                let left = if c > 0 { cur[c - 1] } else { f64::INFINITY };
                up.min(diag).min(left)
            };
            cur[c] = step + best;
            if cur[c] < row_min {
                row_min = cur[c];
            }
        }
        if let Some(t) = thr {
            if row_min > t {
                return Ok((None, i as u64 + 1));
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok((Some(prev[r].sqrt()), n as u64))
}

pub fn dtw(a: &[f64], b: &[f64], r: WarpingWindow, abandon_at: Option<f64>) -> Result<Option<f64>> {
    dtw_counted(a, b, r, abandon_at).map(|(d, _)| d)
}

/// `U_i = max`, `L_i = min` of `q` over indices `i-r ..= i+r`, clipped at
/// the boundaries.
pub fn build_dtw_envelope(q: &[f64], r: WarpingWindow) -> DtwEnvelope {
    let n = q.len();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(r.r);
        let hi = (i + r.r).min(n - 1);
        let win = &q[lo..=hi];
        lower.push(win.iter().cloned().fold(f64::INFINITY, f64::min));
        upper.push(win.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }
    DtwEnvelope { lower, upper, r }
}

/// LB_Keogh: per-point penalty of `c` against the DTW envelope of the query.
/// Always `<=` the banded DTW between the envelope's source and `c`.
pub fn lb_keogh_counted(
    env: &DtwEnvelope,
    c: &[f64],
    abandon_at: Option<f64>,
) -> Result<(Option<f64>, u64)> {
    check_equal_len(&env.lower, c)?;
    let thr = abandon_at.map(|t| t * t);
    let mut sum = 0.0;
    for (i, &v) in c.iter().enumerate() {
        let d = if v > env.upper[i] {
            v - env.upper[i]
        } else if v < env.lower[i] {
            env.lower[i] - v
        } else {
            0.0
        };
        sum += d * d;
        if let Some(t) = thr {
            if sum > t {
                return Ok((None, i as u64 + 1));
            }
        }
    }
    Ok((Some(sum.sqrt()), c.len() as u64))
}

pub fn lb_keogh(env: &DtwEnvelope, c: &[f64], abandon_at: Option<f64>) -> Result<Option<f64>> {
    lb_keogh_counted(env, c, abandon_at).map(|(d, _)| d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
        let a = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let b = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        (a, b)
    }

    /// Full O(n²) DTW dynamic program restricted to the band.
    fn dtw_dp_oracle(a: &[f64], b: &[f64], r: usize) -> f64 {
        let n = a.len();
        let mut cost = vec![vec![f64::INFINITY; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > r {
                    continue;
                }
                let d = (a[i] - b[j]) * (a[i] - b[j]);
                let best = if i == 0 && j == 0 {
                    0.0
                } else {
                    let up = if i > 0 { cost[i - 1][j] } else { f64::INFINITY };
                    let left = if j > 0 { cost[i][j - 1] } else { f64::INFINITY };
                    let diag = if i > 0 && j > 0 {
                        cost[i - 1][j - 1]
                    } else {
                        f64::INFINITY
                    };
                    up.min(left).min(diag)
                };
                cost[i][j] = d + best;
            }
        }
        cost[n - 1][n - 1].sqrt()
    }

    #[test]
    fn euclidean_identity_is_zero() {
        let x = vec![1.0, -2.0, 3.5];
        assert_eq!(euclidean(&x, &x, None).unwrap(), Some(0.0));
    }

    #[test]
    fn euclidean_three_four_five() {
        assert_eq!(
            euclidean(&[0.0, 0.0], &[3.0, 4.0], None).unwrap(),
            Some(5.0)
        );
    }

    #[test]
    fn euclidean_length_mismatch_is_error() {
        assert!(euclidean(&[1.0], &[1.0, 2.0], None).is_err());
    }

    #[test]
    fn euclidean_abandon_agrees_when_returned() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let (a, b) = random_pair(&mut rng, 32);
            let full = euclidean(&a, &b, None).unwrap().unwrap();
            let thr = rng.random_range(0.0..12.0);
            match euclidean(&a, &b, Some(thr)).unwrap() {
                Some(d) => assert_eq!(d, full),
                None => assert!(full > thr, "abandoned although {full} <= {thr}"),
            }
        }
    }

    #[test]
    fn dtw_r0_equals_euclidean() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let (a, b) = random_pair(&mut rng, 24);
            let ed = euclidean(&a, &b, None).unwrap().unwrap();
            let d = dtw(&a, &b, WarpingWindow::absolute(0), None)
                .unwrap()
                .unwrap();
            assert!((d - ed).abs() < 1e-9);
        }
    }

    #[test]
    fn dtw_identity_is_zero() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        for r in [0, 3, 10] {
            let d = dtw(&x, &x, WarpingWindow::absolute(r), None)
                .unwrap()
                .unwrap();
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn dtw_matches_dp_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let (a, b) = random_pair(&mut rng, 64);
            for r in [0, 1, 5, 16, 63] {
                let got = dtw(&a, &b, WarpingWindow::absolute(r), None)
                    .unwrap()
                    .unwrap();
                let want = dtw_dp_oracle(&a, &b, r);
                assert!((got - want).abs() < 1e-9, "r={r}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn dtw_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let (a, b) = random_pair(&mut rng, 48);
        let w = WarpingWindow::absolute(6);
        let ab = dtw(&a, &b, w, None).unwrap().unwrap();
        let ba = dtw(&b, &a, w, None).unwrap().unwrap();
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn dtw_non_increasing_in_r_and_below_ed() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..50 {
            let (a, b) = random_pair(&mut rng, 32);
            let ed = euclidean(&a, &b, None).unwrap().unwrap();
            let mut last = f64::INFINITY;
            for r in 0..10 {
                let d = dtw(&a, &b, WarpingWindow::absolute(r), None)
                    .unwrap()
                    .unwrap();
                assert!(d <= ed + 1e-12);
                assert!(d <= last + 1e-12);
                last = d;
            }
        }
    }

    #[test]
    fn dtw_abandon_agrees_when_returned() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..300 {
            let (a, b) = random_pair(&mut rng, 32);
            let w = WarpingWindow::absolute(4);
            let full = dtw(&a, &b, w, None).unwrap().unwrap();
            let thr = rng.random_range(0.0..10.0);
            match dtw(&a, &b, w, Some(thr)).unwrap() {
                Some(d) => assert!((d - full).abs() < 1e-12),
                None => assert!(full > thr),
            }
        }
    }

    #[test]
    fn envelope_r0_is_identity() {
        let q = vec![3.0, -1.0, 2.0];
        let env = build_dtw_envelope(&q, WarpingWindow::absolute(0));
        assert_eq!(env.lower, q);
        assert_eq!(env.upper, q);
    }

    #[test]
    fn envelope_of_monotone_series() {
        let q: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let r = 3;
        let env = build_dtw_envelope(&q, WarpingWindow::absolute(r));
        for i in 0..q.len() {
            assert_eq!(env.lower[i], q[i.saturating_sub(r)]);
            assert_eq!(env.upper[i], q[(i + r).min(q.len() - 1)]);
        }
    }

    #[test]
    fn envelope_contains_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (q, _) = random_pair(&mut rng, 64);
        for r in [0, 2, 9] {
            let env = build_dtw_envelope(&q, WarpingWindow::absolute(r));
            for (i, &v) in q.iter().enumerate() {
                assert!(env.lower[i] <= v && v <= env.upper[i]);
            }
        }
    }

    #[test]
    fn lb_keogh_zero_inside_envelope() {
        let q: Vec<f64> = (0..16).map(|i| (i as f64 * 0.3).cos()).collect();
        let env = build_dtw_envelope(&q, WarpingWindow::absolute(3));
        // A candidate clamped into the envelope scores zero.
        let c: Vec<f64> = (0..16)
            .map(|i| (env.lower[i] + env.upper[i]) / 2.0)
            .collect();
        assert_eq!(lb_keogh(&env, &c, None).unwrap(), Some(0.0));
    }

    #[test]
    fn lb_keogh_r0_is_euclidean() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let (q, c) = random_pair(&mut rng, 32);
        let env = build_dtw_envelope(&q, WarpingWindow::absolute(0));
        let lb = lb_keogh(&env, &c, None).unwrap().unwrap();
        let ed = euclidean(&q, &c, None).unwrap().unwrap();
        assert!((lb - ed).abs() < 1e-12);
    }

    #[test]
    fn lb_keogh_never_exceeds_dtw() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10_000 {
            let n = 24;
            let (q, c) = random_pair(&mut rng, n);
            let r = rng.random_range(0..n / 2);
            let w = WarpingWindow::absolute(r);
            let env = build_dtw_envelope(&q, w);
            let lb = lb_keogh(&env, &c, None).unwrap().unwrap();
            let d = dtw(&q, &c, w, None).unwrap().unwrap();
            assert!(lb <= d + 1e-9, "r={r}: LB {lb} > DTW {d}");
        }
    }

    #[test]
    fn warping_fraction_rounds_up() {
        assert_eq!(WarpingWindow::from_fraction(0.05, 160).unwrap().r, 8);
        assert_eq!(WarpingWindow::from_fraction(0.10, 161).unwrap().r, 17);
        assert_eq!(WarpingWindow::from_fraction(0.0, 100).unwrap().r, 0);
    }
}
