//! Term-circuit oracles: each term circuit against the exact exponential of
//! its operator over random registers and angles. Each function returns the
//! worst entrywise deviation over all trials.

use super::*;
use nalgebra::DMatrix;
use phonon_qsim::circuits::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TRIALS: usize = 100;

fn centred(x: usize, n_x: usize) -> f64 {
    x as f64 - (1usize << (n_x - 1)) as f64
}

fn angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-2.0..2.0)
}

pub fn phase_x2_matches_diagonal_exponential(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..TRIALS {
        let n_x = rng.random_range(1..=3);
        let theta = angle(&mut rng);
        let reg: Vec<usize> = (0..n_x).collect();
        let u = phase_x2(&reg, theta).unwrap().unitary_with_phase();
        let want = diagonal(n_x, |k| -theta * centred(k, n_x).powi(2));
        worst = worst.max(max_diff(&u, &want));
    }
    worst
}

pub fn phase_p2_matches_momentum_exponential(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..TRIALS {
        let n_x = rng.random_range(1..=3);
        let theta = angle(&mut rng);
        let reg: Vec<usize> = (0..n_x).collect();
        let n = 1usize << n_x;
        let f = fourier_on(n_x, &reg);
        let p = diagonal(n_x, |m| {
            let mt = ((m + n / 2) % n) as f64 - (n / 2) as f64;
            -theta * mt * mt
        });
        let want = f.adjoint() * p * f;
        let u = phase_p2(&reg, theta).unwrap().unitary_with_phase();
        worst = worst.max(max_diff(&u, &want));
    }
    worst
}

pub fn phase_xx_matches_bilinear_exponential(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..TRIALS {
        let n_x = rng.random_range(1..=3);
        let theta = angle(&mut rng);
        // Interleave the registers to exercise arbitrary qubit placement.
        let a: Vec<usize> = (0..n_x).map(|k| 2 * k + 1).collect();
        let b: Vec<usize> = (0..n_x).map(|k| 2 * k).collect();
        let nq = 2 * n_x;
        let u = phase_xx(&a, &b, theta).unwrap().unitary_with_phase();
        let want = diagonal(nq, |k| -theta * centred(reg_value(k, &a), n_x) * centred(reg_value(k, &b), n_x));
        worst = worst.max(max_diff(&u, &want));
    }
    worst
}

pub fn density_coupling_matches_exponential(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..TRIALS {
        let n_x = rng.random_range(1..=3);
        let theta = angle(&mut rng);
        let e = rng.random_range(0..=n_x);
        let reg: Vec<usize> = (0..=n_x).filter(|&q| q != e).collect();
        let u = ep_density_coupling(e, &reg, theta).unwrap().unitary_with_phase();
        let want = diagonal(n_x + 1, |k| -theta * ((k >> e) & 1) as f64 * centred(reg_value(k, &reg), n_x));
        worst = worst.max(max_diff(&u, &want));
    }
    worst
}

pub fn jw_hopping_matches_exponential(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..TRIALS {
        let nq = rng.random_range(2..=5);
        let i = rng.random_range(0..nq);
        let mut j = rng.random_range(0..nq);
        while j == i {
            j = rng.random_range(0..nq);
        }
        let theta = angle(&mut rng);
        let circ = jw_hopping(i, j, theta).unwrap().widened(nq);
        let want = expm_i(&hopping_matrix(nq, i, j), theta);
        worst = worst.max(max_diff(&circ.unitary_with_phase(), &want));
    }
    worst
}

pub fn hopping_with_phonons_matches_exponential(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..TRIALS {
        let n_x = rng.random_range(1..=3);
        let span = rng.random_range(1..=2);
        let n_regs = rng.random_range(1..=2usize);
        let (i, j) = (0, span);
        let mut next = span + 1;
        let mut regs = Vec::new();
        for _ in 0..n_regs {
            regs.push(((next..next + n_x).collect::<Vec<usize>>(), angle(&mut rng)));
            next += n_x;
        }
        let nq = next;
        let theta0 = angle(&mut rng);
        let refs: Vec<(&[usize], f64)> = regs.iter().map(|(r, t)| (r.as_slice(), *t)).collect();
        let (a, b) = if rng.random_bool(0.5) { (i, j) } else { (j, i) };
        let circ = hopping_with_phonons(a, b, theta0, &refs).unwrap();
        // The phonon operators are diagonal and commute with the hopping, so
        // each phonon configuration evolves the electrons under
        // (θ₀ + Σ θ_n (x_n − h))·K on its own.
        let ne = span + 1;
        let k = hopping_matrix(ne, i, j);
        let emask = (1usize << ne) - 1;
        let dim = 1usize << nq;
        let mut want = DMatrix::zeros(dim, dim);
        for ph in (0..dim).step_by(1 << ne) {
            let a: f64 = theta0 + regs.iter().map(|(reg, t)| t * centred(reg_value(ph, reg), n_x)).sum::<f64>();
            let block = expm_i(&k, a);
            for r in 0..=emask {
                for col in 0..=emask {
                    want[(ph | r, ph | col)] = block[(r, col)];
                }
            }
        }
        worst = worst.max(max_diff(&circ.unitary_with_phase(), &want));
    }
    worst
}
