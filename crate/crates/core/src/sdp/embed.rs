//! Real coordinates for Hermitian matrices and their symmetric embeddings.
//!
//! Three coordinate systems, all isometric up to stated factors:
//! - `hvec`: Herm(d) -> R^{d^2}, diagonal entries first, then (sqrt2*Re, sqrt2*Im)
//!   per strict-upper pair in row-major order. Exact isometry.
//! - `svec`: Sym(k) -> R^{k(k+1)/2}, diagonal first, then sqrt2-scaled strict-upper
//!   entries in row-major order. Exact isometry.
//! - `emb`: Herm(d) -> Sym(2d), H -> [[Re H, -Im H], [Im H, Re H]]. Doubles inner
//!   products: <emb A, emb B> = 2 <A, B>, and doubles eigenvalue multiplicities.

use nalgebra::{DMatrix, DVector};

use crate::operator::{CMatrix, Cx};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

pub fn hvec_len(d: usize) -> usize {
    d * d
}

pub fn svec_len(k: usize) -> usize {
    k * (k + 1) / 2
}

/// Index of the strict-upper pair (i, j), i < j, in row-major pair order.
fn pair_idx(k: usize, i: usize, j: usize) -> usize {
    i * k - i * (i + 1) / 2 + (j - i - 1)
}

pub fn hvec(h: &CMatrix) -> DVector<f64> {
    let d = h.rows();
    let mut v = DVector::zeros(hvec_len(d));
    for i in 0..d {
        v[i] = h.entry(i, i).re;
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let p = pair_idx(d, i, j);
            let e = h.entry(i, j);
            v[d + 2 * p] = SQRT2 * e.re;
            v[d + 2 * p + 1] = SQRT2 * e.im;
        }
    }
    v
}

pub fn unhvec(v: &DVector<f64>, d: usize) -> CMatrix {
    assert_eq!(v.len(), hvec_len(d), "hvec length mismatch");
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m.set(i, i, Cx::new(v[i], 0.0));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let p = pair_idx(d, i, j);
            let e = Cx::new(v[d + 2 * p] / SQRT2, v[d + 2 * p + 1] / SQRT2);
            m.set(i, j, e);
            m.set(j, i, e.conj());
        }
    }
    m
}

pub fn svec(s: &DMatrix<f64>) -> DVector<f64> {
    let k = s.nrows();
    let mut v = DVector::zeros(svec_len(k));
    for i in 0..k {
        v[i] = s[(i, i)];
    }
    for i in 0..k {
        for j in (i + 1)..k {
            v[k + pair_idx(k, i, j)] = SQRT2 * s[(i, j)];
        }
    }
    v
}

pub fn unsvec(v: &DVector<f64>, k: usize) -> DMatrix<f64> {
    assert_eq!(v.len(), svec_len(k), "svec length mismatch");
    let mut s = DMatrix::zeros(k, k);
    for i in 0..k {
        s[(i, i)] = v[i];
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let e = v[k + pair_idx(k, i, j)] / SQRT2;
            s[(i, j)] = e;
            s[(j, i)] = e;
        }
    }
    s
}

pub fn emb(h: &CMatrix) -> DMatrix<f64> {
    let d = h.rows();
    let mut s = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let e = h.entry(i, j);
            s[(i, j)] = e.re;
            s[(i, j + d)] = -e.im;
            s[(i + d, j)] = e.im;
            s[(i + d, j + d)] = e.re;
        }
    }
    s
}

/// Inverse of `emb` extended to all of Sym(2d) by orthogonal projection onto the
/// embedded subalgebra; exact on embedded matrices.
pub fn unemb(s: &DMatrix<f64>) -> CMatrix {
    let k = s.nrows();
    assert_eq!(k % 2, 0, "embedded matrix has even dimension");
    let d = k / 2;
    CMatrix::from_fn(d, d, |i, j| {
        let re = 0.5 * (s[(i, j)] + s[(i + d, j + d)]);
        let im = 0.5 * (s[(i + d, j)] - s[(i, j + d)]);
        Cx::new(re, im)
    })
}

/// The svec-coordinates matrix of hvec -> svec(emb(.)): a (svec_len(2d) x d^2)
/// matrix Phi with Phi^T Phi = 2 I, so Phi^T svec(emb(M)) = 2 hvec(M).
pub fn phi(d: usize) -> DMatrix<f64> {
    let rows = svec_len(2 * d);
    let cols = hvec_len(d);
    let mut out = DMatrix::zeros(rows, cols);
    for c in 0..cols {
        let mut e = DVector::zeros(cols);
        e[c] = 1.0;
        let col = svec(&emb(&unhvec(&e, d)));
        out.set_column(c, &col);
    }
    out
}

/// svec-coordinates matrix of the congruence X -> G X G for symmetric G.
pub fn symkron(g: &DMatrix<f64>) -> DMatrix<f64> {
    let k = g.nrows();
    let n = svec_len(k);
    let mut h = DMatrix::zeros(n, n);
    let idx = |i: usize, j: usize| -> usize {
        if i == j {
            i
        } else {
            k + pair_idx(k, i.min(j), i.max(j))
        }
    };
    for a in 0..k {
        for b in a..k {
            let r = idx(a, b);
            for c in 0..k {
                for d in c..k {
                    let col = idx(c, d);
                    let val = if a == b && c == d {
                        g[(a, c)] * g[(a, c)]
                    } else if a == b {
                        SQRT2 * g[(a, c)] * g[(a, d)]
                    } else if c == d {
                        SQRT2 * g[(a, c)] * g[(b, c)]
                    } else {
                        g[(a, c)] * g[(b, d)] + g[(a, d)] * g[(b, c)]
                    };
                    h[(r, col)] = val;
                }
            }
        }
    }
    h
}
