//! Symmetric banded matrices and the factorizations used throughout the
//! solver: unpivoted LDLᵀ for inertia counts (Sturm-style spectrum slicing),
//! banded LU with partial pivoting for linear solves and inverse iteration,
//! and orthogonal parity reductions onto the even/odd half grids.

use crate::error::{CoreError, Result};

/// Symmetric banded matrix, stored as the main diagonal plus `bw`
/// super-diagonals. `off[k][i] = A[i, i+k+1]`.
#[derive(Debug, Clone)]
pub struct BandedSym {
    n: usize,
    bw: usize,
    diag: Vec<f64>,
    off: Vec<Vec<f64>>,
}

impl BandedSym {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let off = (0..bw).map(|k| vec![0.0; n.saturating_sub(k + 1)]).collect();
        Self { n, bw, diag: vec![0.0; n], off }
    }

    pub fn from_bands(diag: Vec<f64>, off: Vec<Vec<f64>>) -> Self {
        let n = diag.len();
        for (k, o) in off.iter().enumerate() {
            assert_eq!(o.len(), n - k - 1, "off-diagonal {k} has wrong length");
        }
        Self { n, bw: off.len(), diag, off }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Entry accessor; zero outside the band. Symmetric by construction.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k == 0 {
            self.diag[lo]
        } else if k <= self.bw {
            self.off[k - 1][lo]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k == 0 {
            self.diag[lo] = v;
        } else if k <= self.bw {
            self.off[k - 1][lo] = v;
        } else if v != 0.0 {
            panic!("set outside band: ({i},{j}) with bw {}", self.bw);
        }
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn add_to_diag(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.n);
        for (d, v) in self.diag.iter_mut().zip(values) {
            *d += v;
        }
    }

    pub fn shift_diag(&mut self, c: f64) {
        for d in self.diag.iter_mut() {
            *d += c;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for d in self.diag.iter_mut() {
            *d *= c;
        }
        for band in self.off.iter_mut() {
            for v in band.iter_mut() {
                *v *= c;
            }
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let mut out: Vec<f64> = self.diag.iter().zip(v).map(|(d, x)| d * x).collect();
        for (k, band) in self.off.iter().enumerate() {
            let s = k + 1;
            for (i, &b) in band.iter().enumerate() {
                out[i] += b * v[i + s];
                out[i + s] += b * v[i];
            }
        }
        out
    }

    /// Infinity norm (max absolute row sum).
    pub fn inf_norm(&self) -> f64 {
        let mut sums = vec![0.0f64; self.n];
        for (i, d) in self.diag.iter().enumerate() {
            sums[i] += d.abs();
        }
        for (k, band) in self.off.iter().enumerate() {
            let s = k + 1;
            for (i, &b) in band.iter().enumerate() {
                sums[i] += b.abs();
                sums[i + s] += b.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let mut r = 0.0;
            for k in 1..=self.bw {
                if i + k < self.n {
                    r += self.get(i, i + k).abs();
                }
                if i >= k {
                    r += self.get(i, i - k).abs();
                }
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `mu`, via the inertia of the
    /// unpivoted LDLᵀ factorization of `A - mu I` (Sylvester's law).
    /// Near-zero pivots are nudged by a guard proportional to the matrix
    /// scale, the standard spectrum-slicing safeguard.
    pub fn count_below(&self, mu: f64) -> usize {
        let n = self.n;
        let b = self.bw;
        if n == 0 {
            return 0;
        }
        let guard = (f64::EPSILON * (self.inf_norm() + mu.abs())).max(f64::MIN_POSITIVE);
        let mut count = 0usize;
        let mut d = vec![0.0f64; n];
        // lwin[c % b][r - c - 1] holds L[r][c] for the last b columns.
        let bb = b.max(1);
        let mut lwin = vec![vec![0.0f64; bb]; bb];
        for i in 0..n {
            let mut di = self.diag[i] - mu;
            for k in i.saturating_sub(b)..i {
                let l = lwin[k % bb][i - k - 1];
                di -= l * l * d[k];
            }
            if di.abs() < guard {
                di = if di >= 0.0 { guard } else { -guard };
            }
            d[i] = di;
            if di < 0.0 {
                count += 1;
            }
            for j in i + 1..(i + b + 1).min(n) {
                let mut v = self.get(j, i);
                for k in j.saturating_sub(b)..i {
                    let ljk = lwin[k % bb][j - k - 1];
                    let lik = lwin[k % bb][i - k - 1];
                    v -= ljk * lik * d[k];
                }
                lwin[i % bb][j - i - 1] = v / di;
            }
        }
        count
    }

    /// The `k` algebraically smallest eigenvalues by bisection on inertia
    /// counts, each resolved to absolute tolerance `atol`.
    pub fn lowest_eigenvalues(&self, k: usize, atol: f64) -> Vec<f64> {
        let (glo, ghi) = self.gershgorin();
        let mut out = Vec::with_capacity(k);
        let mut lo_floor = glo;
        for j in 0..k {
            let mut lo = lo_floor;
            let mut hi = ghi;
            // smallest x with count_below(x) >= j+1
            while hi - lo > atol + f64::EPSILON * lo.abs().max(hi.abs()) {
                let mid = 0.5 * (lo + hi);
                if self.count_below(mid) >= j + 1 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let v = 0.5 * (lo + hi);
            lo_floor = lo; // the (j+1)-th eigenvalue cannot lie below this
            out.push(v);
        }
        out
    }

    /// Eigenvector for an eigenvalue estimate `lambda` by shifted inverse
    /// iteration. Returns the 2-norm-normalized vector with a refined
    /// Rayleigh-quotient eigenvalue.
    pub fn eigenvector(&self, lambda: f64) -> Result<(f64, Vec<f64>)> {
        let n = self.n;
        let scale = self.inf_norm().max(1.0);
        // Offset the shift slightly so the factorization never sits exactly
        // on the eigenvalue.
        let mut mu = lambda + 1e-10 * scale.max(lambda.abs());
        let mut v = pseudo_random_unit(n, 0x9e3779b97f4a7c15);
        let mut lam = lambda;
        for attempt in 0..3 {
            let shifted = self.shifted(-mu);
            let lu = match BandedLu::factor(&shifted) {
                Ok(lu) => lu,
                Err(_) => {
                    mu += 1e-8 * scale * (attempt + 1) as f64;
                    continue;
                }
            };
            for _ in 0..6 {
                let w = lu.solve(&v);
                let nw = norm2(&w);
                if !nw.is_finite() || nw == 0.0 {
                    break;
                }
                for (vi, wi) in v.iter_mut().zip(&w) {
                    *vi = wi / nw;
                }
                let av = self.apply(&v);
                lam = dot(&v, &av);
                let res: f64 = av
                    .iter()
                    .zip(&v)
                    .map(|(a, x)| (a - lam * x) * (a - lam * x))
                    .sum::<f64>()
                    .sqrt();
                if res <= 1e-11 * scale {
                    fix_sign(&mut v);
                    return Ok((lam, v));
                }
            }
            // Rayleigh-shift retry.
            mu = lam + 1e-11 * scale;
        }
        let av = self.apply(&v);
        lam = dot(&v, &av);
        let res: f64 = av
            .iter()
            .zip(&v)
            .map(|(a, x)| (a - lam * x) * (a - lam * x))
            .sum::<f64>()
            .sqrt();
        if res <= 1e-8 * scale {
            fix_sign(&mut v);
            Ok((lam, v))
        } else {
            Err(CoreError::EigenFailure(format!(
                "inverse iteration stalled at residual {res:.3e} (shift {lambda:.6e})"
            )))
        }
    }

    fn shifted(&self, c: f64) -> BandedSym {
        let mut m = self.clone();
        m.shift_diag(c);
        m
    }

    /// Dense copy, for oracles and small-problem tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..(i + self.bw + 1).min(self.n) {
                a[i][j] = self.get(i, j);
            }
        }
        a
    }
}

/// Deterministic sign convention: the entry of largest magnitude is positive
/// (first such index wins), so eigenvectors and branch-switch directions are
/// reproducible.
pub fn fix_sign(v: &mut [f64]) {
    let mut imax = 0;
    let mut vmax = 0.0;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > vmax {
            vmax = x.abs();
            imax = i;
        }
    }
    if v[imax] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn pseudo_random_unit(n: usize, seed: u64) -> Vec<f64> {
    // splitmix64; deterministic start vector for inverse iteration.
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    let mut v: Vec<f64> = (0..n).map(|_| (next() >> 11) as f64 / (1u64 << 53) as f64 - 0.5).collect();
    let nv = norm2(&v);
    for x in v.iter_mut() {
        *x /= nv;
    }
    v
}

/// Banded LU factorization with partial pivoting (general, not symmetric),
/// for `kl = ku = bw`. Compact storage in the style of the classic band
/// solvers: `rows[i]` holds the active entries of row `i` starting at its
/// first in-band column.
#[derive(Debug)]
pub struct BandedLu {
    n: usize,
    m1: usize, // sub-diagonals
    m2: usize, // super-diagonals
    a: Vec<f64>,   // n x (m1+m2+1), upper factor after elimination
    al: Vec<f64>,  // n x m1, multipliers
    indx: Vec<usize>,
}

impl BandedLu {
    /// Factor a symmetric banded matrix (treated as general banded).
    pub fn factor(m: &BandedSym) -> Result<Self> {
        let n = m.n();
        let b = m.bandwidth();
        let mm = 2 * b + 1;
        let mut a = vec![0.0f64; n * mm];
        for i in 0..n {
            for (jj, item) in a[i * mm..(i + 1) * mm].iter_mut().enumerate() {
                let j = (i + jj).wrapping_sub(b);
                if j < n && i.abs_diff(j) <= b {
                    *item = m.get(i, j);
                }
            }
        }
        Self::factor_compact(n, b, b, a)
    }

    fn factor_compact(n: usize, m1: usize, m2: usize, mut a: Vec<f64>) -> Result<Self> {
        let mm = m1 + m2 + 1;
        let mut al = vec![0.0f64; n * m1];
        let mut indx = vec![0usize; n];
        // Shift the top m1 rows left so row k starts at column 0 of storage.
        let mut l = m1;
        for i in 0..m1 {
            for j in (m1 - i)..mm {
                a[i * mm + j - l] = a[i * mm + j];
            }
            l -= 1;
            for j in (mm - l - 1)..mm {
                a[i * mm + j] = 0.0;
            }
        }
        let mut l = m1;
        for k in 0..n {
            let mut dum = a[k * mm];
            let mut i_piv = k;
            if l < n {
                l += 1;
            }
            for j in (k + 1)..l {
                if a[j * mm].abs() > dum.abs() {
                    dum = a[j * mm];
                    i_piv = j;
                }
            }
            indx[k] = i_piv;
            if dum == 0.0 {
                return Err(CoreError::SolveFailure(format!("exactly singular at pivot {k}")));
            }
            if i_piv != k {
                for j in 0..mm {
                    a.swap(k * mm + j, i_piv * mm + j);
                }
            }
            for i in (k + 1)..l {
                let mult = a[i * mm] / a[k * mm];
                al[k * m1 + (i - k - 1)] = mult;
                for j in 1..mm {
                    a[i * mm + j - 1] = a[i * mm + j] - mult * a[k * mm + j];
                }
                a[i * mm + mm - 1] = 0.0;
            }
        }
        Ok(Self { n, m1, m2, a, al, indx })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let mm = self.m1 + self.m2 + 1;
        let mut x = rhs.to_vec();
        let mut l = self.m1;
        for k in 0..self.n {
            let j = self.indx[k];
            if j != k {
                x.swap(k, j);
            }
            if l < self.n {
                l += 1;
            }
            for j in (k + 1)..l {
                x[j] -= self.al[k * self.m1 + (j - k - 1)] * x[k];
            }
        }
        let mut l = 1;
        for i in (0..self.n).rev() {
            let mut dum = x[i];
            for k in 1..l {
                dum -= self.a[i * mm + k] * x[k + i];
            }
            x[i] = dum / self.a[i * mm];
            if l < mm {
                l += 1;
            }
        }
        x
    }
}

/// Orthonormal reduction of a symmetric banded operator (on a grid whose
/// interior has odd length, center index `c`) onto the even-parity subspace.
/// Row 0 of the reduced operator is the center node; row `j` is the
/// normalized pair `(e_{c+j} + e_{c-j})/sqrt(2)`.
pub fn even_reduction(a: &BandedSym, c: usize) -> BandedSym {
    let b = a.bandwidth();
    let m = c + 1;
    let mut r = BandedSym::zeros(m, b);
    let s2 = std::f64::consts::SQRT_2;
    for i in 0..m {
        for j in i..(i + b + 1).min(m) {
            let v = if i == 0 && j == 0 {
                a.get(c, c)
            } else if i == 0 {
                (a.get(c, c + j) + a.get(c, c - j)) / s2
            } else {
                0.5 * (a.get(c + i, c + j)
                    + a.get(c + i, c - j)
                    + a.get(c - i, c + j)
                    + a.get(c - i, c - j))
            };
            r.set(i, j, v);
        }
    }
    r
}

/// Odd-parity counterpart of [`even_reduction`]: row `j-1` is
/// `(e_{c+j} - e_{c-j})/sqrt(2)`, `j = 1..=c` (the center node is zero).
pub fn odd_reduction(a: &BandedSym, c: usize) -> BandedSym {
    let b = a.bandwidth();
    let m = c;
    let mut r = BandedSym::zeros(m, b);
    for i in 1..=m {
        for j in i..(i + b + 1).min(m + 1) {
            let v = 0.5
                * (a.get(c + i, c + j) - a.get(c + i, c - j) - a.get(c - i, c + j)
                    + a.get(c - i, c - j));
            r.set(i - 1, j - 1, v);
        }
    }
    r
}

/// Embed an even-reduced vector back onto the full interior grid.
pub fn embed_even(v: &[f64], c: usize) -> Vec<f64> {
    let n = 2 * c + 1;
    let mut u = vec![0.0; n];
    u[c] = v[0];
    let s2 = std::f64::consts::SQRT_2;
    for j in 1..=c {
        u[c + j] = v[j] / s2;
        u[c - j] = v[j] / s2;
    }
    u
}

/// Embed an odd-reduced vector back onto the full interior grid.
pub fn embed_odd(v: &[f64], c: usize) -> Vec<f64> {
    let n = 2 * c + 1;
    let mut u = vec![0.0; n];
    let s2 = std::f64::consts::SQRT_2;
    for j in 1..=c {
        u[c + j] = v[j - 1] / s2;
        u[c - j] = -v[j - 1] / s2;
    }
    u
}

/// Restrict a full interior vector to its even-reduced coordinates.
pub fn restrict_even(u: &[f64], c: usize) -> Vec<f64> {
    let s2 = std::f64::consts::SQRT_2;
    let mut v = vec![0.0; c + 1];
    v[0] = u[c];
    for j in 1..=c {
        v[j] = (u[c + j] + u[c - j]) / s2;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense Jacobi eigenvalue oracle, independent of the banded path.
    fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[i][j] * a[i][j];
                }
            }
            if off.sqrt() < 1e-14 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    fn random_banded(n: usize, bw: usize, seed: u64) -> BandedSym {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut m = BandedSym::zeros(n, bw);
        for i in 0..n {
            m.set(i, i, 4.0 + next());
            for k in 1..=bw {
                if i + k < n {
                    m.set(i, i + k, next());
                }
            }
        }
        m
    }

    #[test]
    fn bisection_matches_jacobi_oracle_tridiagonal() {
        let m = random_banded(60, 1, 7);
        let ours = m.lowest_eigenvalues(5, 1e-12);
        let oracle = jacobi_eigenvalues(m.to_dense());
        for (a, b) in ours.iter().zip(oracle.iter()) {
            assert!((a - b).abs() < 1e-10, "banded {a} vs dense {b}");
        }
    }

    #[test]
    fn bisection_matches_jacobi_oracle_pentadiagonal() {
        let m = random_banded(50, 2, 99);
        let ours = m.lowest_eigenvalues(4, 1e-12);
        let oracle = jacobi_eigenvalues(m.to_dense());
        for (a, b) in ours.iter().zip(oracle.iter()) {
            assert!((a - b).abs() < 1e-10, "banded {a} vs dense {b}");
        }
    }

    #[test]
    fn count_below_consistent_with_eigenvalues() {
        let m = random_banded(40, 2, 3);
        let all = jacobi_eigenvalues(m.to_dense());
        for probe in [2.0, 3.5, 4.0, 4.5, 6.0] {
            let expected = all.iter().filter(|&&x| x < probe).count();
            assert_eq!(m.count_below(probe), expected, "probe {probe}");
        }
    }

    #[test]
    fn banded_lu_solves_against_apply() {
        for bw in [1usize, 2] {
            let m = random_banded(80, bw, 11 + bw as u64);
            let x_true: Vec<f64> = (0..80).map(|i| (i as f64 * 0.37).sin()).collect();
            let rhs = m.apply(&x_true);
            let lu = BandedLu::factor(&m).unwrap();
            let x = lu.solve(&rhs);
            for (a, b) in x.iter().zip(&x_true) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eigenvector_residual_small() {
        let m = random_banded(70, 2, 17);
        let vals = m.lowest_eigenvalues(2, 1e-12);
        for &lam in &vals {
            let (l2, v) = m.eigenvector(lam).unwrap();
            let av = m.apply(&v);
            let res: f64 = av.iter().zip(&v).map(|(a, x)| (a - l2 * x).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-9, "residual {res}");
            assert!((l2 - lam).abs() < 1e-9);
        }
    }

    #[test]
    fn parity_reduction_splits_spectrum() {
        // Build a reflection-symmetric pentadiagonal operator and check that
        // the union of the even/odd reduced spectra equals the full spectrum.
        let n = 41; // interior length, odd
        let c = (n - 1) / 2;
        let mut m = BandedSym::zeros(n, 2);
        for i in 0..n {
            let x = (i as f64 - c as f64) * 0.3;
            m.set(i, i, 4.0 + x * x * 0.1);
            if i + 1 < n {
                m.set(i, i + 1, -1.2);
            }
            if i + 2 < n {
                m.set(i, i + 2, 0.15);
            }
        }
        let full = jacobi_eigenvalues(m.to_dense());
        let ev = even_reduction(&m, c);
        let od = odd_reduction(&m, c);
        let mut both = jacobi_eigenvalues(ev.to_dense());
        both.extend(jacobi_eigenvalues(od.to_dense()));
        both.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in both.iter().zip(full.iter()) {
            assert!((a - b).abs() < 1e-9, "union {a} vs full {b}");
        }
    }

    #[test]
    fn embeddings_are_isometric_and_parity_definite() {
        let c = 12;
        let v: Vec<f64> = (0..=c).map(|i| (i as f64 + 1.0).sin()).collect();
        let u = embed_even(&v, c);
        assert!((norm2(&u) - norm2(&v)).abs() < 1e-14);
        for j in 0..=c {
            assert_eq!(u[c + j], u[c - j]);
        }
        let w: Vec<f64> = (0..c).map(|i| (i as f64 + 0.5).cos()).collect();
        let uo = embed_odd(&w, c);
        assert!((norm2(&uo) - norm2(&w)).abs() < 1e-14);
        assert_eq!(uo[c], 0.0);
        for j in 1..=c {
            assert_eq!(uo[c + j], -uo[c - j]);
        }
        let vr = restrict_even(&u, c);
        for (a, b) in vr.iter().zip(&v) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
