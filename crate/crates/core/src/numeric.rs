//! Small numeric helpers shared across modules.

/// Correctly rounded sum of `xs` (Shewchuk's exact partials, with the
/// half-even final rounding). The result does not depend on summation
/// order. Falls back to a plain sum when any input is non-finite.
pub fn exact_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    let mut special = 0.0;
    let mut has_special = false;
    for mut x in xs {
        if !x.is_finite() {
            has_special = true;
            special += x;
            continue;
        }
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    if has_special {
        return special;
    }

    let mut n = partials.len();
    let mut hi = 0.0;
    let mut lo = 0.0;
    while n > 0 {
        n -= 1;
        let x = hi;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

pub fn exact_mean(xs: &[f64]) -> f64 {
    exact_sum(xs.iter().copied()) / xs.len() as f64
}

/// Compensated sum taken over the mirrored pairs `(x[k], x[len-1-k])`.
/// Reversing `xs` leaves every pair, and hence the result, bit-identical.
pub fn mirrored_sum(xs: &[f64]) -> f64 {
    let k = xs.len();
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut add = |x: f64| {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    };
    for i in 0..k / 2 {
        let (a, b) = (xs[i], xs[k - 1 - i]);
        let s = a + b;
        let bb = s - a;
        add(s);
        add((a - (s - bb)) + (b - bb));
    }
    if k % 2 == 1 {
        add(xs[k / 2]);
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mirrored_sum_is_reversal_exact_and_accurate() {
        let xs: Vec<f64> = (0..1001).map(|i| ((i * 7919) % 1000) as f64 * 1e-3 + 1e-9 * i as f64).collect();
        let mut rev = xs.clone();
        rev.reverse();
        assert_eq!(mirrored_sum(&xs).to_bits(), mirrored_sum(&rev).to_bits());
        assert!((mirrored_sum(&xs) - exact_sum(xs.iter().copied())).abs() <= 1e-15 * exact_sum(xs.iter().copied()));
        assert_eq!(mirrored_sum(&[]), 0.0);
        assert_eq!(mirrored_sum(&[1e100, 1.0, -1e100]), 1.0);
    }

    #[test]
    fn cancellation() {
        assert_eq!(exact_sum([1e100, 1.0, -1e100]), 1.0);
        assert_eq!(exact_sum([0.1; 10]), 1.0);
        assert_eq!(exact_sum(std::iter::empty()), 0.0);
    }

    proptest! {
        #[test]
        fn order_independent(mut xs in prop::collection::vec(-1e6f64..1e6, 0..300), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let a = exact_sum(xs.iter().copied());
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            xs.shuffle(&mut rng);
            prop_assert_eq!(a.to_bits(), exact_sum(xs.iter().copied()).to_bits());
            xs.reverse();
            prop_assert_eq!(a.to_bits(), exact_sum(xs.iter().copied()).to_bits());
        }
    }
}
