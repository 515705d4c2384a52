//! Banded LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` layout: column-major band of height
//! `2·kl + ku + 1`, with `kl` extra rows above the band to absorb fill-in
//! produced by row interchanges.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// `ldab × n`, element `(i, j)` at `data[j * ldab + kv + i - j]`.
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; ldab * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn kv(&self) -> usize {
        self.kl + self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab() + self.kv() + i - j
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i <= j + self.kl && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` to entry `(i, j)`. Panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band (kl = {}, ku = {})",
            self.kl,
            self.ku
        );
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Factors in place; reports the first zero pivot.
    pub fn factor(self) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku, kv) = (self.kl, self.ku, self.kv());
        let ldab = self.ldab();
        let mut ab = self.data;
        let at = |i: usize, j: usize| j * ldab + kv + i - j;
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0;
            let mut best = ab[at(j, j)].abs();
            for i in 1..=km {
                let v = ab[at(j + i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            ipiv[j] = j + p;
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular { pivot: j });
            }
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    ab.swap(at(j, c), at(j + p, c));
                }
            }
            if km > 0 {
                let pivot = ab[at(j, j)];
                for i in 1..=km {
                    ab[at(j + i, j)] /= pivot;
                }
                for c in (j + 1)..=ju {
                    let u = ab[at(j, c)];
                    if u != 0.0 {
                        for i in 1..=km {
                            let l = ab[at(j + i, j)];
                            ab[at(j + i, c)] -= l * u;
                        }
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            ku,
            data: ab,
            ipiv,
        })
    }
}

/// Factors `P·M = L·U` of a banded matrix.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn kv(&self) -> usize {
        self.kl + self.ku
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.ldab() + self.kv() + i - j]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `M x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        for j in 0..n {
            let l = self.ipiv[j];
            if l != j {
                b.swap(j, l);
            }
            let bj = b[j];
            if bj != 0.0 {
                for i in 1..=self.kl.min(n - 1 - j) {
                    b[j + i] -= self.at(j + i, j) * bj;
                }
            }
        }
        let kv = self.kv();
        for j in (0..n).rev() {
            b[j] /= self.at(j, j);
            let bj = b[j];
            if bj != 0.0 {
                let lo = j.saturating_sub(kv);
                for (i, bi) in b[lo..j].iter_mut().enumerate() {
                    *bi -= self.at(lo + i, j) * bj;
                }
            }
        }
    }

    /// Rebuilds the original matrix from the stored factors as a dense array.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let kv = self.kv();
        let mut x = vec![vec![0.0; n]; n];
        for (i, row) in x.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate().skip(i).take(kv + 1) {
                *v = self.at(i, j);
            }
        }
        for j in (0..n).rev() {
            for i in 1..=self.kl.min(n - 1 - j) {
                let l = self.at(j + i, j);
                if l != 0.0 {
                    let (top, bottom) = x.split_at_mut(j + i);
                    for (dst, src) in bottom[0].iter_mut().zip(&top[j]) {
                        *dst += l * src;
                    }
                }
            }
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, kl: usize, ku: usize) -> BandedMatrix {
        let mut m = BandedMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // deterministic, not diagonally dominant, forces pivoting
                let v = ((i * 7 + j * 13) % 11) as f64 - 5.0 + if i == j { 0.5 } else { 0.0 };
                m.add(i, j, v);
            }
        }
        m
    }

    #[test]
    fn solve_matches_product() {
        for (n, kl, ku) in [(1, 0, 0), (5, 1, 1), (20, 3, 2), (40, 7, 7), (9, 0, 3)] {
            let m = sample(n, kl, ku);
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() + 1.0).collect();
            let mut b = m.mul_vec(&x);
            let lu = m.clone().factor().unwrap();
            lu.solve_in_place(&mut b);
            for (a, e) in b.iter().zip(&x) {
                assert!((a - e).abs() < 1e-9 * (1.0 + e.abs()), "{n} {kl} {ku}");
            }
        }
    }

    #[test]
    fn reconstruction() {
        let m = sample(30, 4, 5);
        let dense = m.to_dense();
        let lu = m.clone().factor().unwrap();
        let r = lu.reconstruct();
        let mut worst: f64 = 0.0;
        for (ra, rb) in r.iter().zip(&dense) {
            worst = worst.max(ra.iter().zip(rb).map(|(a, b)| (a - b).abs()).sum());
        }
        assert!(worst / m.norm_inf() < 1e-13);
    }

    #[test]
    fn singular_reports_pivot() {
        let mut m = BandedMatrix::zeros(3, 1, 1);
        m.add(0, 0, 1.0);
        m.add(1, 0, 0.0);
        m.add(2, 2, 1.0);
        assert_eq!(m.factor().unwrap_err(), Error::Singular { pivot: 1 });
    }

    #[test]
    #[should_panic]
    fn out_of_band_panics() {
        BandedMatrix::zeros(5, 1, 1).add(0, 3, 1.0);
    }
}
