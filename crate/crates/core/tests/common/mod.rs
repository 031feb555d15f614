#![allow(dead_code)]

use kscert::shiftspace::MeasureKind;
use kscert::{BigRational, Scalar, ShiftMeasure};
use rand::Rng;

pub fn q(n: i64, d: i64) -> BigRational {
    <BigRational as Scalar>::from_ratio(n, d)
}

/// Row with entries `n_i / sum`, `n_i` drawn from `0..=max`; at least one
/// entry positive.
pub fn rational_row<R: Rng>(rng: &mut R, k: usize, max: i64, zeros: bool) -> Vec<BigRational> {
    loop {
        let lo = if zeros { 0 } else { 1 };
        let nums: Vec<i64> = (0..k).map(|_| rng.gen_range(lo..=max)).collect();
        let total: i64 = nums.iter().sum();
        if total > 0 {
            return nums.into_iter().map(|n| q(n, total)).collect();
        }
    }
}

/// Irreducible Markov measure with small-denominator rational transitions.
pub fn rational_markov<R: Rng>(rng: &mut R, k: usize, zeros: bool) -> ShiftMeasure<BigRational> {
    loop {
        let rows = (0..k).map(|_| rational_row(rng, k, 6, zeros)).collect();
        if let Ok(mu) = ShiftMeasure::markov(rows, None) {
            return mu;
        }
    }
}

pub fn float_markov<R: Rng>(rng: &mut R, k: usize) -> ShiftMeasure<f64> {
    loop {
        let rows = (0..k)
            .map(|_| {
                let raw: Vec<f64> = (0..k)
                    .map(|_| {
                        if rng.gen_bool(0.2) {
                            0.0
                        } else {
                            rng.gen_range(0.01..1.0)
                        }
                    })
                    .collect();
                let total: f64 = raw.iter().sum::<f64>().max(f64::MIN_POSITIVE);
                raw.into_iter().map(|x| x / total).collect()
            })
            .collect();
        if let Ok(mu) = ShiftMeasure::markov(rows, None) {
            return mu;
        }
    }
}

/// `-sum mu(w) ln mu(w)` over all words of length `len`, evaluating each
/// cylinder separately.
pub fn entropy_by_enumeration<F: Scalar>(mu: &ShiftMeasure<F>, len: usize) -> f64 {
    let k = mu.symbols();
    let mut word = vec![0usize; len];
    let mut total = 0.0;
    loop {
        let m = mu
            .cylinder_measure(&kscert::CylinderWord::new(word.clone()))
            .unwrap()
            .to_f64();
        if m > 0.0 {
            total -= m * m.ln();
        }
        let mut i = len;
        loop {
            if i == 0 {
                return total;
            }
            i -= 1;
            word[i] += 1;
            if word[i] < k {
                break;
            }
            word[i] = 0;
        }
    }
}

pub fn is_chain<F: Scalar>(mu: &ShiftMeasure<F>) -> bool {
    !matches!(mu.kind(), MeasureKind::Lumped(_))
}
