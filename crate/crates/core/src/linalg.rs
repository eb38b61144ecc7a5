//! Symmetric positive definite block-tridiagonal systems with equal block
//! sizes.
//!
//! Only the lower half is stored: diagonal blocks `D_i` (row-major, of which
//! only the lower triangle is read) and
//! sub-diagonal blocks `C_i` coupling block `i` (rows) to block `i - 1`
//! (columns). The factorization is the block Cholesky `H = L L^T` with `L`
//! block lower bidiagonal.

#[derive(Clone, Debug, Default)]
pub(crate) struct BlockTridiag {
    n: usize,
    nb: usize,
    diag: Vec<f64>,
    sub: Vec<f64>,
    chol: Vec<f64>,
    w: Vec<f64>,
}

/// Calls `$f(n, ...)` with `n` a literal for small sizes, so the kernels
/// are inlined with constant loop bounds.
macro_rules! by_size {
    ($n:expr, $f:ident($($arg:expr),*)) => {
        match $n {
            1 => $f(1, $($arg),*),
            2 => $f(2, $($arg),*),
            3 => $f(3, $($arg),*),
            4 => $f(4, $($arg),*),
            5 => $f(5, $($arg),*),
            6 => $f(6, $($arg),*),
            n => $f(n, $($arg),*),
        }
    };
}

impl BlockTridiag {
    /// `nb` blocks of size `n`.
    pub fn new(n: usize, nb: usize) -> Self {
        let len = n * n * nb;
        BlockTridiag { n, nb, diag: vec![0.0; len], sub: vec![0.0; len], chol: vec![0.0; len], w: vec![0.0; len] }
    }

    pub fn dim(&self) -> usize {
        self.n * self.nb
    }

    pub fn clear(&mut self) {
        self.diag.iter_mut().for_each(|v| *v = 0.0);
        self.sub.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Adds `v` at `(r, c)` of diagonal block `i`.
    #[cfg(test)]
    pub fn add_diag(&mut self, i: usize, r: usize, c: usize, v: f64) {
        let n = self.n;
        self.diag[(i * n + r) * n + c] += v;
    }

    /// Adds `v` at `(r, c)` of sub-diagonal block `i` (row in block `i`,
    /// column in block `i - 1`).
    #[cfg(test)]
    pub fn add_sub(&mut self, i: usize, r: usize, c: usize, v: f64) {
        let n = self.n;
        self.sub[(i * n + r) * n + c] += v;
    }

    /// Diagonal block `i`, row-major. Only its lower triangle is read.
    #[inline]
    pub fn diag_block_mut(&mut self, i: usize) -> &mut [f64] {
        let nn = self.n * self.n;
        &mut self.diag[i * nn..(i + 1) * nn]
    }

    /// Sub-diagonal block `i` (rows in block `i`, columns in block `i - 1`).
    #[inline]
    pub fn sub_block_mut(&mut self, i: usize) -> &mut [f64] {
        let nn = self.n * self.n;
        &mut self.sub[i * nn..(i + 1) * nn]
    }

    /// Factorizes `H + shift * diag(|H_ii|)`, leaving `H` itself intact;
    /// returns `false` if a pivot is not positive.
    pub fn factor_shifted(&mut self, shift: f64) -> bool {
        by_size!(self.n, factor_kernel(self, shift))
    }

    /// Solves `H x = b` in place using the last successful factorization.
    pub fn solve(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.dim());
        by_size!(self.n, solve_kernel(self, b))
    }
}

#[inline(always)]
fn factor_kernel(n: usize, h: &mut BlockTridiag, shift: f64) -> bool {
    let nn = n * n;
    for i in 0..h.nb {
        let (done, rest) = h.chol.split_at_mut(i * nn);
        let block = &mut rest[..nn];
        block.copy_from_slice(&h.diag[i * nn..(i + 1) * nn]);
        if shift > 0.0 {
            for r in 0..n {
                let e = &mut block[r * n + r];
                *e += shift * e.abs().max(1e-300);
            }
        }
        if i > 0 {
            let prev = &done[(i - 1) * nn..];
            let w = &mut h.w[i * nn..(i + 1) * nn];
            w.copy_from_slice(&h.sub[i * nn..(i + 1) * nn]);
            // W_i = C_i L_{i-1}^{-T}: each row solves L_{i-1} w = c.
            for r in 0..n {
                forward(n, prev, &mut w[r * n..(r + 1) * n]);
            }
            // D'_i = D_i - W_i W_i^T (lower triangle suffices)
            for r in 0..n {
                for c in 0..=r {
                    let mut v = 0.0;
                    for k in 0..n {
                        v += w[r * n + k] * w[c * n + k];
                    }
                    block[r * n + c] -= v;
                }
            }
        }
        if !cholesky(n, block) {
            return false;
        }
    }
    true
}

#[inline(always)]
fn solve_kernel(n: usize, h: &BlockTridiag, b: &mut [f64]) {
    let nn = n * n;
    for i in 0..h.nb {
        let (done, rest) = b.split_at_mut(i * n);
        let cur = &mut rest[..n];
        if i > 0 {
            let y = &done[(i - 1) * n..];
            let w = &h.w[i * nn..(i + 1) * nn];
            for r in 0..n {
                let mut v = 0.0;
                for k in 0..n {
                    v += w[r * n + k] * y[k];
                }
                cur[r] -= v;
            }
        }
        forward(n, &h.chol[i * nn..(i + 1) * nn], cur);
    }
    for i in (0..h.nb).rev() {
        let (head, later) = b.split_at_mut((i + 1) * n);
        let cur = &mut head[i * n..];
        if i + 1 < h.nb {
            let w = &h.w[(i + 1) * nn..(i + 2) * nn];
            for r in 0..n {
                let x = later[r];
                for c in 0..n {
                    cur[c] -= w[r * n + c] * x;
                }
            }
        }
        backward(n, &h.chol[i * nn..(i + 1) * nn], cur);
    }
}

/// In-place lower Cholesky of a row-major `n x n` block; upper part is zeroed.
#[inline(always)]
fn cholesky(n: usize, a: &mut [f64]) -> bool {
    let a = &mut a[..n * n];
    for j in 0..n {
        let mut dj = a[j * n + j];
        for k in 0..j {
            dj -= a[j * n + k] * a[j * n + k];
        }
        if !(dj > 0.0) || !dj.is_finite() {
            return false;
        }
        let dj = dj.sqrt();
        a[j * n + j] = dj;
        for c in j + 1..n {
            a[j * n + c] = 0.0;
        }
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / dj;
        }
    }
    true
}

/// Solves `L y = b` in place.
#[inline(always)]
fn forward(n: usize, l: &[f64], b: &mut [f64]) {
    let (l, b) = (&l[..n * n], &mut b[..n]);
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[i * n + k] * b[k];
        }
        b[i] = v / l[i * n + i];
    }
}

/// Solves `L^T x = y` in place.
#[inline(always)]
fn backward(n: usize, l: &[f64], b: &mut [f64]) {
    let (l, b) = (&l[..n * n], &mut b[..n]);
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in i + 1..n {
            v -= l[k * n + i] * b[k];
        }
        b[i] = v / l[i * n + i];
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense reference: assemble the full matrix and solve by Gaussian elimination.
    fn dense_solve(m: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut a: Vec<Vec<f64>> = m.to_vec();
        let mut x = b.to_vec();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            x.swap(c, p);
            for r in c + 1..n {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                x[r] -= f * x[c];
            }
        }
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
            x[r] = (x[r] - s) / a[r][r];
        }
        x
    }

    #[test]
    fn matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sizes = [3usize; 5];
        let n: usize = sizes.iter().sum();
        let offs: Vec<usize> = sizes.iter().scan(0, |a, &s| { let o = *a; *a += s; Some(o) }).collect();
        // Random symmetric block-tridiagonal matrix made SPD by diagonal dominance.
        let mut full = vec![vec![0.0; n]; n];
        let mut bt = BlockTridiag::new(3, sizes.len());
        for i in 0..sizes.len() {
            for r in 0..sizes[i] {
                for c in 0..=r {
                    let v: f64 = if r == c { 0.0 } else { rng.random_range(-1.0..1.0) };
                    full[offs[i] + r][offs[i] + c] += v;
                    if r != c {
                        full[offs[i] + c][offs[i] + r] += v;
                    }
                }
            }
            if i > 0 {
                for r in 0..sizes[i] {
                    for c in 0..sizes[i - 1] {
                        let v: f64 = rng.random_range(-1.0..1.0);
                        full[offs[i] + r][offs[i - 1] + c] = v;
                        full[offs[i - 1] + c][offs[i] + r] = v;
                    }
                }
            }
        }
        for r in 0..n {
            let rowsum: f64 = full[r].iter().map(|v| v.abs()).sum();
            full[r][r] = rowsum + 1.0;
        }
        for i in 0..sizes.len() {
            for r in 0..sizes[i] {
                for c in 0..sizes[i] {
                    bt.add_diag(i, r, c, full[offs[i] + r][offs[i] + c]);
                }
                if i > 0 {
                    for c in 0..sizes[i - 1] {
                        bt.add_sub(i, r, c, full[offs[i] + r][offs[i - 1] + c]);
                    }
                }
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let expected = dense_solve(&full, &b);
        assert!(bt.factor_shifted(0.0));
        let mut x = b.clone();
        bt.solve(&mut x);
        for (u, v) in x.iter().zip(&expected) {
            assert!((u - v).abs() < 1e-10, "{u} vs {v}");
        }
    }

    #[test]
    fn every_block_size_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..=8 {
            let nb = 4;
            let dim = n * nb;
            let mut full = vec![vec![0.0; dim]; dim];
            for r in 0..dim {
                for c in 0..r {
                    if r / n == c / n || r / n == c / n + 1 {
                        let v: f64 = rng.random_range(-1.0..1.0);
                        full[r][c] = v;
                        full[c][r] = v;
                    }
                }
            }
            for r in 0..dim {
                full[r][r] = full[r].iter().map(|v| v.abs()).sum::<f64>() + 0.5;
            }
            let mut bt = BlockTridiag::new(n, nb);
            for r in 0..dim {
                for c in 0..dim {
                    let (bi, bj) = (r / n, c / n);
                    if bi == bj {
                        bt.add_diag(bi, r % n, c % n, full[r][c]);
                    } else if bi == bj + 1 {
                        bt.add_sub(bi, r % n, c % n, full[r][c]);
                    }
                }
            }
            assert!(bt.factor_shifted(0.0));
            let b: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let expected = dense_solve(&full, &b);
            let mut x = b.clone();
            bt.solve(&mut x);
            for (u, v) in x.iter().zip(&expected) {
                assert!((u - v).abs() < 1e-10, "n={n}: {u} vs {v}");
            }
        }
    }

    #[test]
    fn rejects_indefinite() {
        let mut bt = BlockTridiag::new(2, 1);
        bt.add_diag(0, 0, 0, 1.0);
        bt.add_diag(0, 1, 1, -1.0);
        assert!(!bt.factor_shifted(0.0));
    }
}
