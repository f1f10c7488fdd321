//! Special functions: digamma and friends, log-gamma, Bernoulli numbers.

/// Euler-Mascheroni constant.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Natural logarithm of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Digamma function for `x > 0`: recurrence up to `x >= 6`, then the
/// asymptotic series.
pub fn digamma(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NAN;
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 6.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    // B_2k / (2k) for k = 1..8
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0
                    - r * (1.0 / 240.0
                        - r * (1.0 / 132.0 - r * (691.0 / 32760.0 - r * (1.0 / 12.0 - r * 3617.0 / 8160.0)))))));
    acc + x.ln() - 0.5 / x - series
}

/// Trigamma function for `x > 0`.
pub fn trigamma(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NAN;
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 6.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    // B_2k / x^(2k+1) terms
    let series = r
        * (1.0 / 6.0
            - r * (1.0 / 30.0
                - r * (1.0 / 42.0 - r * (1.0 / 30.0 - r * (5.0 / 66.0 - r * (691.0 / 2730.0 - r * 7.0 / 6.0))))));
    acc + 1.0 / x + 0.5 * r + series / x
}

/// Solves `digamma(x) = y` for `x > 0` by Newton iteration.
pub fn inv_digamma(y: f64) -> f64 {
    let mut x = if y >= -2.22 {
        y.exp() + 0.5
    } else {
        -1.0 / (y + EULER_MASCHERONI)
    };
    for _ in 0..50 {
        let step = (digamma(x) - y) / trigamma(x);
        let mut next = x - step;
        if next <= 0.0 {
            next = x / 2.0;
        }
        if (next - x).abs() <= 1e-15 * x {
            return next;
        }
        x = next;
    }
    x
}

/// Bernoulli numbers `B_0 ..= B_max` (with `B_1 = -1/2`) from the
/// recursion `B_r = -sum_{k<r} r! B_k / (k! (r+1-k)!)`.
pub fn bernoulli_numbers(max: usize) -> Vec<f64> {
    let mut b = Vec::with_capacity(max + 1);
    b.push(1.0);
    for r in 1..=max {
        let mut sum = 0.0;
        for (k, bk) in b.iter().enumerate() {
            // r! / (k! (r+1-k)!) = C(r+1, k) / (r+1)
            sum += binomial(r + 1, k) / (r + 1) as f64 * bk;
        }
        // odd indices above 1 vanish; pin them against rounding residue
        b.push(if r > 1 && r % 2 == 1 { 0.0 } else { -sum });
    }
    b
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
