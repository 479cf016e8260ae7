//! Test-only oracles. Nothing here calls into the library's math, so the
//! integration tests compare the crate against independent arithmetic.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const TAU: f64 = 2.0 * PI;

pub fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `(1/(mN)) Σ e^{imθ}` as `(re, im)`, summed term by term.
pub fn harmonic(headings: &[f64], m: u32) -> (f64, f64) {
    let scale = 1.0 / (m as f64 * headings.len() as f64);
    let re: f64 = headings.iter().map(|t| (m as f64 * t).cos()).sum();
    let im: f64 = headings.iter().map(|t| (m as f64 * t).sin()).sum();
    (re * scale, im * scale)
}

pub fn p_mag(headings: &[f64]) -> f64 {
    let (re, im) = harmonic(headings, 1);
    re.hypot(im)
}

/// `U` via the pairwise form `(1/2N) Σ_j Σ_k cos(θ_j − θ_k)`.
pub fn potential_u(headings: &[f64]) -> f64 {
    let n = headings.len() as f64;
    let mut s = 0.0;
    for a in headings {
        for b in headings {
            s += (a - b).cos();
        }
    }
    s / (2.0 * n)
}

/// `W = Σ_m (1/(2N m²)) Σ_j Σ_k cos(m(θ_j − θ_k))`.
pub fn potential_w(headings: &[f64]) -> f64 {
    let n = headings.len();
    let mut total = 0.0;
    for m in 1..=(n / 2) {
        let mf = m as f64;
        let mut s = 0.0;
        for a in headings {
            for b in headings {
                s += (mf * (a - b)).cos();
            }
        }
        total += s / (2.0 * n as f64 * mf * mf);
    }
    total
}

pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|k| {
            xp[k] = x[k] + h;
            let fp = f(&xp);
            xp[k] = x[k] - h;
            let fm = f(&xp);
            xp[k] = x[k];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

pub fn fd_hessian(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut out = vec![vec![0.0; n]; n];
    let mut xp = x.to_vec();
    for i in 0..n {
        for j in 0..n {
            let mut eval = |di: f64, dj: f64| {
                xp[i] += di;
                xp[j] += dj;
                let v = f(&xp);
                xp[i] -= di;
                xp[j] -= dj;
                v
            };
            out[i][j] = (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h);
        }
    }
    out
}

/// `θ_f = Σ(θ̃_k/K_k) / Σ(1/K_k)` with `θ̃_k = θ_k − 2(k−1)π/N`.
pub fn theta_f(theta0: &[f64], gains: &[f64]) -> f64 {
    let n = theta0.len() as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for (k, (&t, &g)) in theta0.iter().zip(gains).enumerate() {
        num += (t - TAU * k as f64 / n) / g;
        den += 1.0 / g;
    }
    num / den
}

pub fn shifted(theta0: &[f64]) -> Vec<f64> {
    let n = theta0.len() as f64;
    theta0
        .iter()
        .enumerate()
        .map(|(k, t)| t - TAU * k as f64 / n)
        .collect()
}

/// Sorted-by-angle agent indices of the wrapped headings, rotated so agent 0
/// comes first.
pub fn cyclic_order(headings: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..headings.len()).collect();
    idx.sort_by(|&a, &b| wrap(headings[a]).total_cmp(&wrap(headings[b])));
    let start = idx.iter().position(|&i| i == 0).unwrap();
    idx.rotate_left(start);
    idx
}

/// Sorted headings in `(−π, π)` with a minimum gap and a clearly nonzero
/// order parameter.
pub fn random_headings(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let mut th: Vec<f64> = (0..n).map(|_| rng.random_range(-PI + 0.05..PI - 0.05)).collect();
        th.sort_by(f64::total_cmp);
        let gap_ok = th.windows(2).all(|w| w[1] - w[0] > 0.05);
        if gap_ok && p_mag(&th) > 0.05 {
            return th;
        }
    }
}

/// Positive gains that are non-decreasing with distance from the initial
/// order-parameter axis within each side of it.
pub fn ordered_gains(rng: &mut ChaCha8Rng, theta0: &[f64]) -> Vec<f64> {
    let (re, im) = harmonic(theta0, 1);
    let psi = im.atan2(re);
    let offsets: Vec<f64> = theta0.iter().map(|t| wrap(psi - t)).collect();
    let mut gains: Vec<f64> = (0..theta0.len()).map(|_| rng.random_range(0.5..4.0)).collect();
    for side in [1.0, -1.0] {
        let mut members: Vec<usize> = (0..theta0.len())
            .filter(|&k| offsets[k] * side > 1e-9 && offsets[k].abs() < PI - 1e-9)
            .collect();
        members.sort_by(|&a, &b| offsets[a].abs().total_cmp(&offsets[b].abs()));
        let mut vals: Vec<f64> = members.iter().map(|&k| gains[k]).collect();
        vals.sort_by(f64::total_cmp);
        for (k, v) in members.into_iter().zip(vals) {
            gains[k] = v;
        }
    }
    gains
}
