//! Matrix-free block Krylov eigensolver for the lowest eigenpairs.
//!
//! The iteration keeps a fully reorthogonalized orthonormal basis, performs
//! Rayleigh-Ritz on the whole stored subspace at every block step, and does a
//! thick restart (collapsing onto the best Ritz vectors) when the basis hits
//! its cap. Full reorthogonalization costs memory and flops but keeps tiny
//! gaps between near-degenerate Ritz pairs resolvable, which is exactly the
//! regime anticrossings live in.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::InterpolatedHamiltonian;

/// Largest `k` a caller may request.
pub const MAX_EIGENPAIRS: usize = 8;

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Convergence: every requested residual norm must drop below
    /// `tol_factor * spectral_scale`.
    pub tol_factor: f64,
    /// Matvec budget before giving up with a solver error.
    pub max_matvecs: usize,
    /// Stored-basis cap before a thick restart; 0 picks a default from `k`.
    pub basis_cap: usize,
    /// Seed for the deterministic start block.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol_factor: 1e-12,
            max_matvecs: 200_000,
            basis_cap: 0,
            seed: 0,
        }
    }
}

/// Converged lowest eigenpairs, ascending.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// Unit-norm, mutually orthogonal, sign-fixed (first significant
    /// component positive).
    pub eigenvectors: Vec<Vec<f64>>,
    pub residual_norms: Vec<f64>,
}

impl EigenResult {
    /// `E_1 - E_0`; requires at least two pairs.
    pub fn gap(&self) -> Option<f64> {
        (self.eigenvalues.len() >= 2).then(|| self.eigenvalues[1] - self.eigenvalues[0])
    }
}

/// Lowest `k` eigenpairs from a seeded random start block.
pub fn lowest_eigenpairs(
    h: &InterpolatedHamiltonian<'_>,
    k: usize,
    opts: &LanczosOptions,
) -> Result<EigenResult> {
    lowest_eigenpairs_warm(h, k, opts, &[])
}

/// Same, but seeds the start block with `warm` vectors (typically the
/// eigenvectors from a nearby interpolation point).
pub fn lowest_eigenpairs_warm(
    h: &InterpolatedHamiltonian<'_>,
    k: usize,
    opts: &LanczosOptions,
    warm: &[Vec<f64>],
) -> Result<EigenResult> {
    let dim = h.dim();
    if k == 0 || k > MAX_EIGENPAIRS {
        return Err(Error::input(format!(
            "k must be in 1..={MAX_EIGENPAIRS}, got {k}"
        )));
    }
    if k > dim {
        return Err(Error::input(format!(
            "cannot extract {k} eigenpairs from a dimension-{dim} space"
        )));
    }

    let block = k.max(2).min(dim);
    let basis_cap = if opts.basis_cap == 0 {
        (12 * k).max(48).min(dim)
    } else {
        opts.basis_cap.clamp(block + k, dim)
    };
    let scale = h.spectral_scale().max(f64::MIN_POSITIVE);
    let tol = opts.tol_factor * scale;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut ws = Workspace {
        h,
        dim,
        basis: Vec::new(),
        images: Vec::new(),
        proj: Vec::new(),
        matvecs: 0,
    };

    // Start block: warm vectors first, random fill after.
    for w in warm.iter().take(block) {
        if w.len() == dim {
            ws.push_direction(w.clone());
        }
    }
    while ws.basis.len() < block {
        ws.push_direction(random_vector(dim, &mut rng));
    }

    loop {
        let g = ws.basis.len();
        let (theta, y) = ws.rayleigh_ritz();

        // Ritz vectors and residuals for the k requested pairs.
        let m = k.min(g);
        let mut ritz = Vec::with_capacity(m);
        let mut ritz_images = Vec::with_capacity(m);
        let mut residuals = Vec::with_capacity(m);
        for i in 0..m {
            let x = combine(&ws.basis, y.column(i).as_slice());
            let hx = combine(&ws.images, y.column(i).as_slice());
            let mut r2 = 0.0;
            for (a, b) in hx.iter().zip(&x) {
                let d = a - theta[i] * b;
                r2 += d * d;
            }
            residuals.push(r2.sqrt());
            ritz.push(x);
            ritz_images.push(hx);
        }

        let converged = m == k && residuals.iter().all(|&r| r <= tol);
        // A basis spanning the whole space makes Rayleigh-Ritz exact; the
        // residuals are then pure round-off and cannot improve further.
        if converged || g == dim {
            let mut vectors = ritz;
            for v in &mut vectors {
                fix_sign(v);
            }
            return Ok(EigenResult {
                eigenvalues: theta[..m].to_vec(),
                eigenvectors: vectors,
                residual_norms: residuals,
            });
        }

        if ws.matvecs >= opts.max_matvecs {
            return Err(Error::Solver {
                matvecs: ws.matvecs,
                residuals,
                lambda: None,
            });
        }

        if g + block > basis_cap {
            // Thick restart: keep the lowest Ritz vectors, which stay
            // orthonormal, and rebuild the projected matrix as diag(theta).
            let keep = (2 * k).max(block + k).min(g);
            let mut new_basis = Vec::with_capacity(keep);
            let mut new_images = Vec::with_capacity(keep);
            for i in 0..keep {
                if i < m {
                    new_basis.push(ritz[i].clone());
                    new_images.push(ritz_images[i].clone());
                } else {
                    new_basis.push(combine(&ws.basis, y.column(i).as_slice()));
                    new_images.push(combine(&ws.images, y.column(i).as_slice()));
                }
            }
            ws.basis = new_basis;
            ws.images = new_images;
            ws.proj = (0..keep)
                .map(|i| {
                    let mut row = vec![0.0; i + 1];
                    row[i] = theta[i];
                    row
                })
                .collect();
        }

        // Expand with the residual directions of the lowest `block` Ritz
        // pairs; converged or rank-deficient directions fall back to seeded
        // random vectors so the block never collapses.
        let want = block.min(ws.dim - ws.basis.len());
        for i in 0..want {
            let dir = if i < m {
                let mut r = ritz_images[i].clone();
                for (a, b) in r.iter_mut().zip(&ritz[i]) {
                    *a -= theta[i] * b;
                }
                r
            } else {
                combine(&ws.images, y.column(i.min(g - 1)).as_slice())
            };
            if !ws.push_direction(dir) {
                while ws.basis.len() < ws.dim && !ws.push_direction(random_vector(dim, &mut rng)) {}
            }
            if ws.basis.len() == ws.dim {
                break;
            }
        }
    }
}

struct Workspace<'a, 'b> {
    h: &'a InterpolatedHamiltonian<'b>,
    dim: usize,
    basis: Vec<Vec<f64>>,
    images: Vec<Vec<f64>>,
    /// Lower-triangular rows of the projected matrix `V^T H V`.
    proj: Vec<Vec<f64>>,
    matvecs: usize,
}

impl Workspace<'_, '_> {
    /// Orthonormalize `v` against the basis (two passes) and append it
    /// together with its image under H. Returns false when `v` is numerically
    /// inside the current span.
    fn push_direction(&mut self, mut v: Vec<f64>) -> bool {
        debug_assert_eq!(v.len(), self.dim);
        let before = norm(&v);
        if !(before > 0.0) || !before.is_finite() {
            return false;
        }
        for _ in 0..2 {
            for b in &self.basis {
                let c = dot(b, &v);
                axpy(-c, b, &mut v);
            }
        }
        let after = norm(&v);
        if after <= 1e-10 * before.max(1.0) {
            return false;
        }
        let inv = 1.0 / after;
        for x in &mut v {
            *x *= inv;
        }
        let mut hv = vec![0.0; self.dim];
        self.h.apply_into(&v, &mut hv);
        self.matvecs += 1;

        let mut row = Vec::with_capacity(self.basis.len() + 1);
        for b in &self.basis {
            row.push(dot(b, &hv));
        }
        row.push(dot(&v, &hv));
        self.basis.push(v);
        self.images.push(hv);
        self.proj.push(row);
        true
    }

    /// Eigen-decomposition of the projected matrix, ascending.
    fn rayleigh_ritz(&self) -> (Vec<f64>, DMatrix<f64>) {
        let g = self.basis.len();
        let mut t = DMatrix::zeros(g, g);
        for (i, row) in self.proj.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                t[(i, j)] = v;
                t[(j, i)] = v;
            }
        }
        let eig = t.symmetric_eigen();
        let mut order: Vec<usize> = (0..g).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut y = DMatrix::zeros(g, g);
        for (col, &i) in order.iter().enumerate() {
            y.set_column(col, &eig.eigenvectors.column(i));
        }
        (theta, y)
    }
}

fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn combine(vectors: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let dim = vectors[0].len();
    let mut out = vec![0.0; dim];
    for (v, &c) in vectors.iter().zip(coeffs) {
        axpy(c, v, &mut out);
    }
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

/// Make the first component above the noise floor positive, so repeated runs
/// and warm starts yield the same vector, not its negative.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let max_abs = v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if max_abs == 0.0 {
        return;
    }
    let lead = v.iter().find(|x| x.abs() > 1e-9 * max_abs);
    if let Some(&x) = lead {
        if x < 0.0 {
            for y in v.iter_mut() {
                *y = -*y;
            }
        }
    }
}
