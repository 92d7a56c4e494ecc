//! Exactly uniform Clifford sampling via the symplectic-transvection construction.
//!
//! A symplectic matrix on `m` qubits is built from a nonzero vector `k` in `[1, 4^m)` and
//! `2m - 1` free bits, then recursing on `m - 1` qubits. Each choice tuple gives a distinct
//! matrix, so drawing the tuple uniformly gives a uniform symplectic matrix. Uniform sign
//! bits complete a uniform Clifford element modulo global phase.
//!
//! Vectors use the interleaved layout: bit `2q` is the X part of qubit `q`, bit `2q + 1` the Z
//! part.

use rand::Rng;

use super::CliffordElement;
use crate::quantum::{qubit_bit, MAX_QUBITS};

type Vector = u32;

fn inner(v: Vector, w: Vector) -> u32 {
    const EVEN: u32 = 0x5555_5555;
    ((((v & EVEN) << 1) & w).count_ones() + (((w & EVEN) << 1) & v).count_ones()) % 2
}

fn transvect(k: Vector, v: Vector) -> Vector {
    if inner(k, v) == 1 {
        v ^ k
    } else {
        v
    }
}

/// Finds `(h1, h2)` with `y = T_h2 T_h1 x`; zero vectors act as the identity.
fn find_transvection(x: Vector, y: Vector, pairs: usize) -> (Vector, Vector) {
    if x == y {
        return (0, 0);
    }
    if inner(x, y) == 1 {
        return (x ^ y, 0);
    }
    let pair = |v: Vector, i: usize| (v >> (2 * i)) & 3;
    for i in 0..pairs {
        let (xp, yp) = (pair(x, i), pair(y, i));
        if xp != 0 && yp != 0 {
            let mut zp = xp ^ yp;
            if zp == 0 {
                zp = 2;
                if (xp & 1) != (xp >> 1) {
                    zp |= 1;
                }
            }
            let z = zp << (2 * i);
            return (x ^ z, y ^ z);
        }
    }
    // Swap the two halves of a pair: (a, b) -> (b, a), or 01 when they agree.
    let partner = |p: u32| if (p & 1) == (p >> 1) { 2 } else { ((p & 1) << 1) | (p >> 1) };
    let mut z = 0;
    for i in 0..pairs {
        let (xp, yp) = (pair(x, i), pair(y, i));
        if xp != 0 && yp == 0 {
            z |= partner(xp) << (2 * i);
            break;
        }
    }
    for i in 0..pairs {
        let (xp, yp) = (pair(x, i), pair(y, i));
        if xp == 0 && yp != 0 {
            z |= partner(yp) << (2 * i);
            break;
        }
    }
    (x ^ z, y ^ z)
}

/// Rows of the `2m x 2m` symplectic matrix selected by `digits[level] = (k, bits)`.
fn symplectic(m: usize, digits: &[(u64, u64)]) -> Vec<Vector> {
    let nn = 2 * m;
    let (k, bits) = digits[0];
    debug_assert!(k >= 1 && k < (1 << nn) && bits < (1 << (nn - 1)));
    let mut f1 = k as Vector;
    let e1: Vector = 1;
    let (t0, t1) = find_transvection(e1, f1, m);
    let mut eprime = e1;
    for j in 2..nn {
        if (bits >> (j - 1)) & 1 == 1 {
            eprime |= 1 << j;
        }
    }
    let h0 = transvect(t1, transvect(t0, eprime));
    if bits & 1 == 1 {
        f1 = 0;
    }
    let mut g: Vec<Vector> = vec![1, 2];
    if m > 1 {
        g.extend(symplectic(m - 1, &digits[1..]).into_iter().map(|r| r << 2));
    }
    for row in g.iter_mut() {
        *row = transvect(f1, transvect(h0, transvect(t1, transvect(t0, *row))));
    }
    g
}

/// Radices `(4^m - 1, 2^(2m - 1))` for levels `m = n, ..., 1`.
fn radices(n: usize) -> Vec<(u64, u64)> {
    (1..=n).rev().map(|m| ((1u64 << (2 * m)) - 1, 1u64 << (2 * m - 1))).collect()
}

fn element(n: usize, digits: &[(u64, u64)], signs: u64) -> CliffordElement {
    let rows = symplectic(n, digits);
    let mut x = vec![0u64; 2 * n];
    let mut z = vec![0u64; 2 * n];
    for (i, &r) in rows.iter().enumerate() {
        for q in 0..n {
            let b = qubit_bit(q, n);
            x[i] |= (((r >> (2 * q)) & 1) as u64) << b;
            z[i] |= (((r >> (2 * q + 1)) & 1) as u64) << b;
        }
    }
    CliffordElement { n, x, z, signs }
}

/// Number of `2n x 2n` symplectic matrices over GF(2), if it fits in a `u128`.
pub fn symplectic_count(n: usize) -> Option<u128> {
    radices(n)
        .into_iter()
        .try_fold(1u128, |acc, (a, b)| acc.checked_mul(a as u128)?.checked_mul(b as u128))
}

/// Size of the Clifford group modulo global phase, if it fits in a `u128`.
pub fn group_order(n: usize) -> Option<u128> {
    symplectic_count(n)?.checked_mul(1u128 << (2 * n))
}

pub fn sample_uniform_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliffordElement {
    assert!((1..=MAX_QUBITS).contains(&n), "qubit count {n} out of range");
    let digits: Vec<(u64, u64)> = radices(n)
        .into_iter()
        .map(|(a, b)| (rng.gen_range(1..=a), rng.gen_range(0..b)))
        .collect();
    let signs = rng.gen_range(0..1u64 << (2 * n));
    element(n, &digits, signs)
}

/// The element with mixed-radix index `index < group_order(n)`: sign bits are the low `2n`
/// bits, followed by the per-level choices for `m = n, ..., 1`.
pub fn clifford_from_index(n: usize, index: u128) -> Option<CliffordElement> {
    if !(1..=MAX_QUBITS).contains(&n) || index >= group_order(n)? {
        return None;
    }
    let signs = (index & ((1u128 << (2 * n)) - 1)) as u64;
    let mut rest = index >> (2 * n);
    let mut digits = Vec::with_capacity(n);
    for (a, b) in radices(n) {
        let k = (rest % a as u128) as u64 + 1;
        rest /= a as u128;
        let bits = (rest % b as u128) as u64;
        rest /= b as u128;
        digits.push((k, bits));
    }
    Some(element(n, &digits, signs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashMap, HashSet};

    #[test]
    fn group_orders() {
        assert_eq!(group_order(1), Some(24));
        assert_eq!(group_order(2), Some(11_520));
        assert_eq!(symplectic_count(3), Some(1_451_520));
        assert!(symplectic_count(6).is_some());
        assert!(symplectic_count(12).is_none());
    }

    #[test]
    fn transvection_pair_maps_x_to_y() {
        for pairs in 1..=3 {
            let top = 1u32 << (2 * pairs);
            for x in 1..top {
                for y in 1..top {
                    let (h1, h2) = find_transvection(x, y, pairs);
                    assert_eq!(transvect(h2, transvect(h1, x)), y, "x={x:b} y={y:b}");
                }
            }
        }
    }

    #[test]
    fn enumeration_is_exhaustive_and_distinct() {
        for n in 1..=2 {
            let order = group_order(n).unwrap();
            let all: HashSet<CliffordElement> =
                (0..order).map(|i| clifford_from_index(n, i).unwrap()).collect();
            assert_eq!(all.len() as u128, order);
            assert!(all.iter().all(|c| c.is_symplectic()));
            assert!(clifford_from_index(n, order).is_none());
        }
    }

    #[test]
    fn samples_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=MAX_QUBITS {
            for _ in 0..20 {
                assert!(sample_uniform_clifford(n, &mut rng).is_symplectic());
            }
        }
    }

    #[test]
    fn single_qubit_uniformity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 24_000;
        let mut counts: HashMap<CliffordElement, usize> = HashMap::new();
        for _ in 0..draws {
            *counts.entry(sample_uniform_clifford(1, &mut rng)).or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        let expected = draws as f64 / 24.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 23 degrees of freedom; 0.999 quantile is about 49.7.
        assert!(chi2 < 49.7, "chi2 = {chi2}");
    }
}
