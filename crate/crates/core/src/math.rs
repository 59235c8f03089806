//! Small combinatorial helpers shared by the modules.

/// `n!` as a float. Exact up to `n = 22`, correctly rounded beyond.
pub fn factorial(n: u32) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        // stays integral at every step
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Smallest power of two `>= n`.
pub fn next_power_of_two(n: usize) -> usize {
    n.max(1).next_power_of_two()
}
