//! Joint moments of phasor sums under independent phase noise.
//!
//! For independent ω_n = e^{jθ̃_n} with circular moments E{ω^d} = m_|d|,
//!
//! ```text
//! E{ Π_j Σ_n A_j(n) ω_n^{c_j} } = Σ_π Π_{B∈π} κ(c_B) · Σ_n Π_{j∈B} A_j(n)
//! ```
//!
//! where π runs over set partitions of the factors, c_j = ±1 marks a
//! conjugated factor (whose A_j is conjugated too) and κ(c_B) is the joint
//! cumulant of a single ω raised to the powers in block B. Cumulants of
//! independent variables vanish unless all indices coincide, which is what
//! collapses every block to one index sum. Four factors (fifteen partitions)
//! cover every expectation the leakage term needs.

use crate::stats::PhaseNoiseChar;
use crate::C64;

/// Largest supported number of factors.
pub const MAX_FACTORS: usize = 4;

/// One factor Σ_n A(n) ω_n, or its conjugate when `conj` is set.
#[derive(Debug, Clone, Copy)]
pub struct Factor<'a> {
    pub weights: &'a [C64],
    pub conj: bool,
}

impl<'a> Factor<'a> {
    pub fn plain(weights: &'a [C64]) -> Self {
        Self { weights, conj: false }
    }

    pub fn conj(weights: &'a [C64]) -> Self {
        Self { weights, conj: true }
    }
}

/// Visits every set partition of the bits of `mask`, as a list of block masks.
fn for_each_partition(mask: u32, blocks: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32])) {
    if mask == 0 {
        visit(blocks);
        return;
    }
    let lowest = mask & mask.wrapping_neg();
    let rest = mask ^ lowest;
    // Every subset of `rest`, joined with the lowest element, forms the block containing it.
    let mut sub = rest;
    loop {
        blocks.push(lowest | sub);
        for_each_partition(rest ^ sub, blocks, visit);
        blocks.pop();
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
}

/// Joint cumulants κ(S) for every nonempty subset S of the factors.
fn cumulants(pn: &PhaseNoiseChar, conj: &[bool]) -> [f64; 1 << MAX_FACTORS] {
    let n = conj.len();
    let mut kappa = [0.0; 1 << MAX_FACTORS];
    let mut masks: Vec<u32> = (1..(1u32 << n)).collect();
    masks.sort_by_key(|m| m.count_ones());
    for mask in masks {
        let d: i32 = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| if conj[j] { -1 } else { 1 }).sum();
        let mut proper = 0.0;
        let mut blocks = Vec::new();
        for_each_partition(mask, &mut blocks, &mut |p| {
            if p.len() > 1 {
                proper += p.iter().map(|&b| kappa[b as usize]).product::<f64>();
            }
        });
        kappa[mask as usize] = pn.moment(d) - proper;
    }
    kappa
}

/// E{Π_j factor_j} over the phase noise.
///
/// # Panics
///
/// If more than [`MAX_FACTORS`] factors are given or their lengths differ.
pub fn phase_moment(pn: &PhaseNoiseChar, factors: &[Factor<'_>]) -> C64 {
    let n = factors.len();
    assert!(n <= MAX_FACTORS, "at most {MAX_FACTORS} factors are supported");
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    let len = factors[0].weights.len();
    assert!(factors.iter().all(|f| f.weights.len() == len), "factor lengths differ");

    let conj: Vec<bool> = factors.iter().map(|f| f.conj).collect();
    let kappa = cumulants(pn, &conj);

    let mut sums = [C64::new(0.0, 0.0); 1 << MAX_FACTORS];
    for (mask, slot) in sums.iter_mut().enumerate().take(1 << n).skip(1) {
        *slot = (0..len)
            .map(|e| {
                (0..n)
                    .filter(|j| mask >> j & 1 == 1)
                    .map(|j| {
                        let w = factors[j].weights[e];
                        if factors[j].conj {
                            w.conj()
                        } else {
                            w
                        }
                    })
                    .product::<C64>()
            })
            .sum();
    }

    let mut total = C64::new(0.0, 0.0);
    let mut blocks = Vec::new();
    for_each_partition((1u32 << n) - 1, &mut blocks, &mut |p| {
        total += p.iter().map(|&b| kappa[b as usize] * sums[b as usize]).product::<C64>();
    });
    total
}
