//! Normalized element-wise mutual information.
//!
//! `nemi = (h(x) + h(y) - h(x,y)) / h(x,y)` with `h = -ln p`, i.e. the
//! normalized PMI of two events. Used for both the explicit (element to
//! element) and implicit (item to link itemset) variants.

/// NEMI from marginal and joint probabilities, in `[-1, 1]`.
///
/// Boundary conventions:
/// * `p(x) = p(y) = p(x,y) = 1` gives `+1`;
/// * any marginal equal to 0 or 1 gives `0` (no information);
/// * `p(x,y) = 0` with interior marginals gives the limit `-1`.
pub fn nemi(p_x: f64, p_y: f64, p_xy: f64) -> f64 {
    if p_x >= 1.0 && p_y >= 1.0 && p_xy >= 1.0 {
        return 1.0;
    }
    let interior = |p: f64| p > 0.0 && p < 1.0;
    if !interior(p_x) || !interior(p_y) {
        return 0.0;
    }
    if p_xy <= 0.0 {
        return -1.0;
    }
    let h_xy = -p_xy.ln();
    let value = (-p_x.ln() - p_y.ln() + p_xy.ln()) / h_xy;
    value.clamp(-1.0, 1.0)
}

/// NEMI from event counts over `n` observations.
pub fn nemi_counts(c_x: usize, c_y: usize, c_xy: usize, n: usize) -> f64 {
    let n = n as f64;
    nemi(c_x as f64 / n, c_y as f64 / n, c_xy as f64 / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_values() {
        assert_eq!(nemi(0.5, 0.5, 0.5), 1.0);
        assert!(nemi(0.5, 0.5, 0.25).abs() < 1e-12);
        assert_eq!(nemi(0.5, 0.5, 0.0), -1.0);
    }

    #[test]
    fn degenerate_marginals() {
        assert_eq!(nemi(1.0, 1.0, 1.0), 1.0);
        assert_eq!(nemi(1.0, 0.5, 0.5), 0.0);
        assert_eq!(nemi(0.0, 0.5, 0.0), 0.0);
    }

    #[test]
    fn symmetric_and_bounded() {
        for &(a, b, j) in &[(0.3, 0.6, 0.1), (0.9, 0.2, 0.19), (0.01, 0.02, 0.005)] {
            let v = nemi(a, b, j);
            assert_eq!(v, nemi(b, a, j));
            assert!((-1.0..=1.0).contains(&v));
        }
    }
}
