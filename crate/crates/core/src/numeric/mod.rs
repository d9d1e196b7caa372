//! Numerical building blocks shared by the estimators and exceedance laws.

pub mod dd;
pub mod quadrature;

pub use statrs::function::factorial::ln_binomial;
pub use statrs::function::gamma::ln_gamma;

/// Stirling numbers of the second kind S(order, i) for i = 0..=order.
pub fn stirling2_row(order: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for m in 1..=order {
        let mut next = vec![0.0; m + 1];
        for i in 1..=m {
            let carry = if i < m { i as f64 * row[i] } else { 0.0 };
            next[i] = carry + row[i - 1];
        }
        row = next;
    }
    row
}

/// Falling power N(N-1)...(N-i+1).
pub fn falling_power(n: u64, i: usize) -> f64 {
    (0..i as u64).map(|j| n as f64 - j as f64).product()
}

/// Binomial coefficient as a double; exact while the value fits in 53 bits.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    // intermediate quotients are exact integers; rounding removes drift
    if acc < 9.0e15 {
        acc.round()
    } else {
        acc
    }
}

/// Pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Finds `x` in [lo, hi] with `f(x) = target` for nondecreasing `f` by bisection.
pub fn invert_monotone<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stirling_rows() {
        assert_eq!(stirling2_row(0), vec![1.0]);
        assert_eq!(stirling2_row(2), vec![0.0, 1.0, 1.0]);
        assert_eq!(stirling2_row(4), vec![0.0, 1.0, 7.0, 6.0, 1.0]);
        // Bell number B8 = 4140
        assert_eq!(stirling2_row(8).iter().sum::<f64>(), 4140.0);
    }

    #[test]
    fn binomials_are_exact_when_small() {
        assert_eq!(binomial(40, 20), 137_846_528_820.0);
        assert_eq!(binomial(5, 7), 0.0);
        assert_eq!(falling_power(10, 3), 720.0);
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|x| x as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }
}
