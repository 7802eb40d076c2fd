//! Bessel functions J0, J1 and a shared cache of the positive zeros of J0.

use std::f64::consts::PI;
use std::sync::RwLock;

const SERIES_LIMIT: f64 = 12.0;

fn power_series(nu: u32, x: f64) -> f64 {
    // J_ν(x) = Σ (−1)^k (x/2)^{2k+ν} / (k! (k+ν)!)
    let q = -0.25 * x * x;
    let mut term = (0.5 * x).powi(nu as i32);
    for k in 1..=nu {
        term /= k as f64;
    }
    let mut sum = term;
    for k in 1..200u32 {
        term *= q / (k as f64 * (k + nu) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > 4 {
            break;
        }
    }
    sum
}

fn hankel_asymptotic(nu: u32, x: f64) -> f64 {
    // J_ν(x) ≈ √(2/(πx)) (P cos χ − Q sin χ), χ = x − (ν/2 + 1/4)π,
    // with a_k(ν) = Π_{j=1..k} (4ν² − (2j−1)²) / (k! 8^k).
    let mu = 4.0 * (nu * nu) as f64;
    let (mut p, mut q) = (1.0, 0.0);
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..40 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn bessel_j(nu: u32, x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT { power_series(nu, ax) } else { hankel_asymptotic(nu, ax) };
    if x < 0.0 && nu % 2 == 1 {
        -v
    } else {
        v
    }
}

pub fn j0(x: f64) -> f64 {
    bessel_j(0, x)
}

pub fn j1(x: f64) -> f64 {
    bessel_j(1, x)
}

/// n-th positive zero of J0 (n ≥ 1), from the asymptotic guess (n − ¼)π
/// refined by Newton iteration with J0' = −J1.
fn compute_zero(n: usize) -> f64 {
    let beta = (n as f64 - 0.25) * PI;
    let b8 = 8.0 * beta;
    let mut x = beta + 1.0 / b8 - 124.0 / (3.0 * b8.powi(3));
    for _ in 0..50 {
        let dx = j0(x) / j1(x);
        x += dx;
        if dx.abs() < 1e-15 * x {
            break;
        }
    }
    x
}

static ZEROS: RwLock<Vec<f64>> = RwLock::new(Vec::new());

/// Make sure at least `n` zeros are cached. Call before entering parallel
/// sections so that workers only ever take the read lock.
pub fn prepare_j0_zeros(n: usize) {
    if ZEROS.read().expect("zero cache poisoned").len() >= n {
        return;
    }
    let mut w = ZEROS.write().expect("zero cache poisoned");
    let start = w.len();
    for k in start..n {
        w.push(compute_zero(k + 1));
    }
}

/// First `n` positive zeros of J0.
pub fn j0_zeros(n: usize) -> Vec<f64> {
    prepare_j0_zeros(n);
    ZEROS.read().expect("zero cache poisoned")[..n].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun table 9.1.
        assert!((j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((j0(10.0) - (-0.245_935_764_451_348_3)).abs() < 1e-13);
        assert!((j1(10.0) - 0.043_472_746_168_861_44).abs() < 1e-13);
        assert!((j0(20.0) - 0.167_024_664_340_583_1).abs() < 1e-14);
    }

    #[test]
    fn branches_agree_at_switch() {
        for nu in 0..2 {
            let a = power_series(nu, SERIES_LIMIT);
            let b = hankel_asymptotic(nu, SERIES_LIMIT);
            // Both branches are good to ~1e-12 absolute where they meet.
            assert!((a - b).abs() < 2e-12, "nu={nu}: {a} vs {b}");
        }
    }

    #[test]
    fn first_zeros() {
        let z = j0_zeros(5);
        let expect = [2.404_825_557_695_773, 5.520_078_110_286_311, 8.653_727_912_911_013, 11.791_534_439_014_28, 14.930_917_708_487_79];
        for (a, b) in z.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn large_zeros_are_zeros_and_spaced_by_pi() {
        let z = j0_zeros(3000);
        for w in z.windows(2).skip(100) {
            assert!((w[1] - w[0] - PI).abs() < 1e-4);
        }
        for &x in z.iter().step_by(97) {
            assert!(j0(x).abs() < 1e-13);
        }
    }
}
