//! Quantum side: the interpolated Hamiltonian
//! `H(lambda) = (1-lambda) * Delta * sum_i sigma^x_i + lambda * H_P`
//! applied matrix-free in the computational basis, lowest eigenpairs, lambda
//! sweeps, minimum-gap refinement, and the ground-state order parameters.

mod lanczos;

pub use lanczos::{
    lowest_eigenpairs, lowest_eigenpairs_warm, EigenResult, LanczosOptions, MAX_EIGENPAIRS,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::ising::IsingProblem;

/// Dense diagonalization is capped here; beyond it the matrix-free path is
/// the only one.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Classical energies of every basis state, shared by all interpolation
/// points of one problem.
#[derive(Clone, Debug)]
pub struct SpinBasis {
    n_qubits: usize,
    delta: f64,
    energies: Vec<f64>,
    max_abs_energy: f64,
}

impl SpinBasis {
    pub fn new(problem: &IsingProblem) -> SpinBasis {
        let n = problem.n_qubits();
        let dim = 1usize << n;
        let mut energies = vec![0.0; dim];
        energies[0] = problem.classical_energy_bits(0);
        // Fill by single flips from an already-known state: bits with their
        // top set bit cleared always precede them in the scan.
        for bits in 1..dim as u32 {
            let top = 31 - bits.leading_zeros();
            let parent = bits & !(1 << top);
            energies[bits as usize] =
                energies[parent as usize] + problem.flip_delta_bits(parent, top as usize);
        }
        let max_abs_energy = energies.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
        SpinBasis {
            n_qubits: n,
            delta: problem.delta(),
            energies,
            max_abs_energy,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Classical energy of basis state `n`.
    pub fn classical_energy(&self, n: usize) -> f64 {
        self.energies[n]
    }

    pub fn classical_energies(&self) -> &[f64] {
        &self.energies
    }
}

/// `H(lambda)` for one interpolation point, applied without ever forming a
/// dense matrix: the diagonal is `lambda * E_n`, and states at Hamming
/// distance one couple with `(1-lambda) * Delta`.
#[derive(Clone, Copy, Debug)]
pub struct InterpolatedHamiltonian<'a> {
    basis: &'a SpinBasis,
    lambda: f64,
}

impl<'a> InterpolatedHamiltonian<'a> {
    pub fn new(basis: &'a SpinBasis, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::input(format!(
                "lambda must lie in [0,1], got {lambda}"
            )));
        }
        Ok(InterpolatedHamiltonian { basis, lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn n_qubits(&self) -> usize {
        self.basis.n_qubits()
    }

    pub fn basis(&self) -> &SpinBasis {
        self.basis
    }

    /// Matrix-vector product `H v` in O(N 2^N).
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::input(format!(
                "vector length {} does not match dimension {}",
                v.len(),
                self.dim()
            )));
        }
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let dim = self.dim();
        let diag_scale = self.lambda;
        for n in 0..dim {
            out[n] = diag_scale * self.basis.energies[n] * v[n];
        }
        let offdiag = (1.0 - self.lambda) * self.basis.delta;
        if offdiag != 0.0 {
            for i in 0..self.n_qubits() {
                let bit = 1usize << i;
                let mut base = 0;
                while base < dim {
                    for lo in base..base + bit {
                        let hi = lo + bit;
                        out[lo] += offdiag * v[hi];
                        out[hi] += offdiag * v[lo];
                    }
                    base += bit << 1;
                }
            }
        }
    }

    /// Cheap rigorous bound on the spectral radius:
    /// `lambda * max|E_n| + N (1-lambda) Delta`.
    pub fn spectral_scale(&self) -> f64 {
        self.lambda * self.basis.max_abs_energy
            + self.n_qubits() as f64 * (1.0 - self.lambda) * self.basis.delta
    }
}

/// Full ascending spectrum by dense symmetric diagonalization. Test oracle
/// and small-system path; capped at `MAX_DENSE_QUBITS`.
pub fn dense_spectrum(h: &InterpolatedHamiltonian<'_>) -> Result<Vec<f64>> {
    if h.n_qubits() > MAX_DENSE_QUBITS {
        return Err(Error::Capacity(format!(
            "dense spectrum is limited to {MAX_DENSE_QUBITS} qubits, got {}",
            h.n_qubits()
        )));
    }
    let dim = h.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        m[(n, n)] = h.lambda * h.basis.energies[n];
    }
    let offdiag = (1.0 - h.lambda) * h.basis.delta;
    for n in 0..dim {
        for i in 0..h.n_qubits() {
            let p = n ^ (1 << i);
            if p > n {
                m[(n, p)] = offdiag;
                m[(p, n)] = offdiag;
            }
        }
    }
    let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// How the characteristic scale of the problem Hamiltonian is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScaleRule {
    UserSupplied(f64),
    /// `max_i (|h_i| + sum_j |J_ij|)`.
    MaxLocalScale,
}

/// Characteristic problem scale and the order-disorder estimate
/// `lambda_c = Delta / (Delta + scale)`.
#[derive(Clone, Copy, Debug)]
pub struct ScaleEstimate {
    pub cal_e: f64,
    pub rule: ScaleRule,
    pub lambda_c: f64,
}

/// Evaluate the problem scale and the dominance ratio
/// `zeta = (1-lambda) Delta / (lambda * scale)`. At `lambda = 0` zeta is
/// reported as the `+inf` sentinel.
pub fn scale_and_zeta(
    problem: &IsingProblem,
    lambda: f64,
    rule: ScaleRule,
) -> Result<(ScaleEstimate, f64)> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::input(format!(
            "lambda must lie in [0,1], got {lambda}"
        )));
    }
    let cal_e = match rule {
        ScaleRule::UserSupplied(e) => e,
        ScaleRule::MaxLocalScale => problem.max_local_scale(),
    };
    if !(cal_e > 0.0) {
        return Err(Error::input(format!(
            "problem scale must be positive, got {cal_e}"
        )));
    }
    let delta = problem.delta();
    let estimate = ScaleEstimate {
        cal_e,
        rule,
        lambda_c: delta / (delta + cal_e),
    };
    let zeta = if lambda == 0.0 {
        f64::INFINITY
    } else {
        (1.0 - lambda) * delta / (lambda * cal_e)
    };
    Ok((estimate, zeta))
}

/// Ground-state order parameters of a unit-norm vector in the computational
/// basis: the spread `S = 2^-N (sum_n |v_n|)^2` and the normalized
/// magnetization `M = N^-1 sum_n v_n^2 (2 popcount(n) - N)`.
pub fn order_parameters(v: &[f64]) -> Result<(f64, f64)> {
    let dim = v.len();
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::input(format!(
            "vector length {dim} is not a power of two"
        )));
    }
    let n = dim.trailing_zeros() as f64;
    let norm = lanczos::norm(v);
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::input(format!(
            "vector is not normalized (norm {norm})"
        )));
    }
    let mut abs_sum = 0.0;
    let mut mag = 0.0;
    for (state, &x) in v.iter().enumerate() {
        abs_sum += x.abs();
        mag += x * x * (2.0 * state.count_ones() as f64 - n);
    }
    Ok((abs_sum * abs_sum / dim as f64, mag / n))
}

/// One record of a lambda sweep.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub lambda: f64,
    /// `E_0..E_{k-1}`, ascending.
    pub energies: Vec<f64>,
    /// `E_1 - E_0` when at least two pairs were requested.
    pub gap: Option<f64>,
    pub s: f64,
    pub m: f64,
}

/// Sweep output plus the identifying parameters.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub problem_fingerprint: u64,
    pub k: usize,
}

impl SweepResult {
    /// Indices of strict interior local minima of the gap curve.
    pub fn gap_minima(&self) -> Vec<usize> {
        let gaps: Vec<f64> = self
            .rows
            .iter()
            .map(|r| r.gap.unwrap_or(f64::NAN))
            .collect();
        let mut out = Vec::new();
        for i in 1..gaps.len().saturating_sub(1) {
            if gaps[i].is_finite() && gaps[i] < gaps[i - 1] && gaps[i] < gaps[i + 1] {
                out.push(i);
            }
        }
        out
    }
}

/// Sweep the grid in ascending lambda order, warm-starting every solve from
/// the previous point's eigenvectors.
pub fn sweep(
    problem: &IsingProblem,
    grid: &[f64],
    k: usize,
    opts: &LanczosOptions,
) -> Result<SweepResult> {
    sweep_directed(problem, grid, k, opts, false)
}

/// Sweep traversing the grid backwards (for warm-start independence checks);
/// rows still come back in ascending lambda order.
pub fn sweep_directed(
    problem: &IsingProblem,
    grid: &[f64],
    k: usize,
    opts: &LanczosOptions,
    backward: bool,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::input("empty lambda grid"));
    }
    for w in grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::input(format!(
                "grid must be strictly increasing, got {} before {}",
                w[0], w[1]
            )));
        }
    }
    if !(0.0..=1.0).contains(&grid[0]) || !(0.0..=1.0).contains(grid.last().unwrap()) {
        return Err(Error::input("grid must lie within [0,1]"));
    }

    let basis = SpinBasis::new(problem);
    let mut warm: Vec<Vec<f64>> = Vec::new();
    let mut rows: Vec<SweepRow> = Vec::with_capacity(grid.len());

    let order: Vec<usize> = if backward {
        (0..grid.len()).rev().collect()
    } else {
        (0..grid.len()).collect()
    };
    for &idx in &order {
        let lambda = grid[idx];
        let h = InterpolatedHamiltonian::new(&basis, lambda)?;
        let eig = lowest_eigenpairs_warm(&h, k, opts, &warm)
            .map_err(|e| e.tag_lambda(lambda))?;
        let (s, m) = order_parameters(&eig.eigenvectors[0])?;
        rows.push(SweepRow {
            lambda,
            gap: eig.gap(),
            energies: eig.eigenvalues.clone(),
            s,
            m,
        });
        warm = eig.eigenvectors;
    }
    if backward {
        rows.reverse();
    }

    Ok(SweepResult {
        rows,
        problem_fingerprint: problem.fingerprint(),
        k,
    })
}

/// Result of refining the minimum of the gap inside a bracket.
#[derive(Clone, Copy, Debug)]
pub struct AnticrossingReport {
    pub lambda_star: f64,
    pub g_min: f64,
    pub bracket: (f64, f64),
    pub evaluations: usize,
}

/// Reusable gap evaluator that warm-starts each solve from the previous one.
pub struct GapEvaluator<'a> {
    basis: &'a SpinBasis,
    opts: LanczosOptions,
    k: usize,
    warm: Vec<Vec<f64>>,
    pub evaluations: usize,
}

impl<'a> GapEvaluator<'a> {
    pub fn new(basis: &'a SpinBasis, k: usize, opts: &LanczosOptions) -> Result<Self> {
        if k < 2 {
            return Err(Error::input("gap evaluation needs k >= 2"));
        }
        Ok(GapEvaluator {
            basis,
            opts: opts.clone(),
            k,
            warm: Vec::new(),
            evaluations: 0,
        })
    }

    pub fn eigenpairs(&mut self, lambda: f64) -> Result<EigenResult> {
        let h = InterpolatedHamiltonian::new(self.basis, lambda)?;
        let eig = lowest_eigenpairs_warm(&h, self.k, &self.opts, &self.warm)
            .map_err(|e| e.tag_lambda(lambda))?;
        self.evaluations += 1;
        self.warm = eig.eigenvectors.clone();
        Ok(eig)
    }

    pub fn gap(&mut self, lambda: f64) -> Result<f64> {
        Ok(self.eigenpairs(lambda)?.gap().unwrap())
    }
}

/// Width below which golden-section refinement stops.
pub const REFINEMENT_INTERVAL: f64 = 1e-10;

/// Golden-section minimization of `lambda -> E_1 - E_0` on a bracket that
/// contains an interior minimum.
pub fn refine_minimum_gap(
    problem: &IsingProblem,
    bracket: (f64, f64),
    opts: &LanczosOptions,
) -> Result<AnticrossingReport> {
    let basis = SpinBasis::new(problem);
    refine_minimum_gap_in(&basis, bracket, 2, opts)
}

/// Same as [`refine_minimum_gap`] but reusing a prebuilt basis and a chosen
/// pair count (k >= 2).
pub fn refine_minimum_gap_in(
    basis: &SpinBasis,
    bracket: (f64, f64),
    k: usize,
    opts: &LanczosOptions,
) -> Result<AnticrossingReport> {
    let (mut lo, mut hi) = bracket;
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || !(lo < hi) {
        return Err(Error::input(format!(
            "invalid bracket ({lo}, {hi}); need 0 <= lo < hi <= 1"
        )));
    }
    let mut eval = GapEvaluator::new(basis, k, opts)?;

    // Probe the bracket before committing to golden-section: a bracket whose
    // interior never drops below both ends has no minimum to refine.
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let f_lo = eval.gap(lo)?;
    let f_hi = eval.gap(hi)?;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = eval.gap(x1)?;
    let mut f2 = eval.gap(x2)?;
    let mid = 0.5 * (lo + hi);
    let f_mid = eval.gap(mid)?;
    let interior_best = f1.min(f2).min(f_mid);
    if interior_best >= f_lo.min(f_hi) {
        return Err(Error::input(format!(
            "bracket ({lo}, {hi}) has no interior gap minimum"
        )));
    }

    let mut best = (mid, f_mid);
    if f1 < best.1 {
        best = (x1, f1);
    }
    if f2 < best.1 {
        best = (x2, f2);
    }

    while hi - lo > REFINEMENT_INTERVAL {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = eval.gap(x1)?;
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = eval.gap(x2)?;
            if f2 < best.1 {
                best = (x2, f2);
            }
        }
    }

    Ok(AnticrossingReport {
        lambda_star: best.0,
        g_min: best.1,
        bracket,
        evaluations: eval.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_problem(rng: &mut ChaCha8Rng, n: usize) -> IsingProblem {
        let h: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        let mut couplings = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(0.6) {
                    couplings.push((i, j, rng.random_range(-1.5..1.5)));
                }
            }
        }
        IsingProblem::new(n, h, couplings, rng.random_range(0.3..2.0)).unwrap()
    }

    #[test]
    fn apply_matches_dense_matrix_on_small_problems() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.random_range(1..=4);
            let p = random_problem(&mut rng, n);
            let basis = SpinBasis::new(&p);
            let lambda = rng.random_range(0.0..=1.0);
            let h = InterpolatedHamiltonian::new(&basis, lambda).unwrap();
            let dim = h.dim();
            // Dense reference built independently from problem data.
            let mut dense = vec![vec![0.0; dim]; dim];
            for (row, row_data) in dense.iter_mut().enumerate() {
                let c = crate::ising::SpinConfiguration::new(row as u32, n).unwrap();
                row_data[row] = lambda * p.classical_energy(&c).unwrap();
                for i in 0..n {
                    row_data[row ^ (1 << i)] += (1.0 - lambda) * p.delta();
                }
            }
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let hv = h.apply(&v).unwrap();
            for row in 0..dim {
                let want: f64 = dense[row].iter().zip(&v).map(|(a, b)| a * b).sum();
                assert!((hv[row] - want).abs() < 1e-14 * h.spectral_scale().max(1.0));
            }
        }
    }

    #[test]
    fn diagonal_limit_applies_classical_energy() {
        let p = IsingProblem::new(2, vec![0.4, -0.9], vec![(0, 1, 0.7)], 1.3).unwrap();
        let basis = SpinBasis::new(&p);
        let h = InterpolatedHamiltonian::new(&basis, 1.0).unwrap();
        for state in 0..4usize {
            let mut e = vec![0.0; 4];
            e[state] = 1.0;
            let he = h.apply(&e).unwrap();
            let c = crate::ising::SpinConfiguration::new(state as u32, 2).unwrap();
            let want = p.classical_energy(&c).unwrap();
            for (i, &x) in he.iter().enumerate() {
                let expect = if i == state { want } else { 0.0 };
                assert!((x - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pure_transverse_field_flips_a_single_qubit() {
        let p = IsingProblem::new(1, vec![0.0], vec![], 1.0).unwrap();
        let basis = SpinBasis::new(&p);
        let h = InterpolatedHamiltonian::new(&basis, 0.0).unwrap();
        let hv = h.apply(&[1.0, 0.0]).unwrap();
        assert_eq!(hv, vec![0.0, 1.0]);
    }

    #[test]
    fn dense_spectrum_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_problem(&mut rng, 4);
        let basis = SpinBasis::new(&p);

        // lambda = 0: Delta * (2m - N) with binomial multiplicities.
        let h0 = InterpolatedHamiltonian::new(&basis, 0.0).unwrap();
        let spec0 = dense_spectrum(&h0).unwrap();
        let mut expected: Vec<f64> = (0..16u32)
            .map(|m| p.delta() * (2.0 * m.count_ones() as f64 - 4.0))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in spec0.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10);
        }

        // lambda = 1: sorted classical energies.
        let h1 = InterpolatedHamiltonian::new(&basis, 1.0).unwrap();
        let spec1 = dense_spectrum(&h1).unwrap();
        let mut classical: Vec<f64> = (0..16u32).map(|b| p.classical_energy_bits(b)).collect();
        classical.sort_by(f64::total_cmp);
        for (a, b) in spec1.iter().zip(&classical) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn single_qubit_closed_form() {
        let p = IsingProblem::new(1, vec![1.0], vec![], 1.0).unwrap();
        let basis = SpinBasis::new(&p);
        let h = InterpolatedHamiltonian::new(&basis, 0.5).unwrap();
        let spec = dense_spectrum(&h).unwrap();
        let want = (0.25f64 + 0.25).sqrt();
        assert!((spec[0] + want).abs() < 1e-14);
        assert!((spec[1] - want).abs() < 1e-14);
    }

    #[test]
    fn lanczos_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let opts = LanczosOptions::default();
        for trial in 0..25 {
            let n = rng.random_range(2..=7);
            let p = random_problem(&mut rng, n);
            let basis = SpinBasis::new(&p);
            let lambda = rng.random_range(0.0..=1.0);
            let h = InterpolatedHamiltonian::new(&basis, lambda).unwrap();
            let k = rng.random_range(1..=4.min(h.dim()));
            let eig = lowest_eigenpairs(&h, k, &opts).unwrap();
            let spec = dense_spectrum(&h).unwrap();
            for i in 0..k {
                assert!(
                    (eig.eigenvalues[i] - spec[i]).abs() < 1e-10,
                    "trial {trial}: pair {i}: {} vs {}",
                    eig.eigenvalues[i],
                    spec[i]
                );
            }
            // Orthonormality.
            for i in 0..k {
                for j in 0..=i {
                    let d = super::lanczos::dot(&eig.eigenvectors[i], &eig.eigenvectors[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((d - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn transverse_limit_has_gap_two_delta() {
        for n in [1usize, 3, 6] {
            let p = IsingProblem::new(n, vec![0.25; n], vec![], 0.8).unwrap();
            let basis = SpinBasis::new(&p);
            let h = InterpolatedHamiltonian::new(&basis, 0.0).unwrap();
            let k = 2.min(h.dim());
            let eig = lowest_eigenpairs(&h, k, &LanczosOptions::default()).unwrap();
            assert!((eig.eigenvalues[0] + p.delta() * n as f64).abs() < 1e-10);
            if k == 2 {
                assert!((eig.gap().unwrap() - 2.0 * p.delta()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_k() {
        let p = IsingProblem::new(2, vec![0.1, 0.2], vec![], 1.0).unwrap();
        let basis = SpinBasis::new(&p);
        let h = InterpolatedHamiltonian::new(&basis, 0.5).unwrap();
        assert!(lowest_eigenpairs(&h, 0, &LanczosOptions::default()).is_err());
        assert!(lowest_eigenpairs(&h, 5, &LanczosOptions::default()).is_err());
    }

    #[test]
    fn order_parameter_limits() {
        let dim = 16;
        let uniform: Vec<f64> = vec![1.0 / (dim as f64).sqrt(); dim];
        let (s, _m) = order_parameters(&uniform).unwrap();
        assert!((s - 1.0).abs() < 1e-12);

        let mut basis_state = vec![0.0; dim];
        basis_state[0b1010] = 1.0;
        let (s, m) = order_parameters(&basis_state).unwrap();
        assert!((s - 1.0 / dim as f64).abs() < 1e-15);
        assert!((m - 0.0).abs() < 1e-15); // two up, two down

        let mut all_up = vec![0.0; dim];
        all_up[0b1111] = 1.0;
        let (_, m) = order_parameters(&all_up).unwrap();
        assert!((m - 1.0).abs() < 1e-15);

        let not_normalized = vec![0.5; dim];
        assert!(order_parameters(&not_normalized).is_err());
    }

    #[test]
    fn zeta_definition_points() {
        let p = IsingProblem::new(2, vec![1.0, 0.0], vec![(0, 1, 0.5)], 1.0).unwrap();
        // MaxLocalScale: qubit 0 has |1.0| + |0.5| = 1.5.
        let (est, zeta) = scale_and_zeta(&p, 1.0, ScaleRule::MaxLocalScale).unwrap();
        assert!((est.cal_e - 1.5).abs() < 1e-15);
        assert_eq!(zeta, 0.0);
        assert!((est.lambda_c - 1.0 / 2.5).abs() < 1e-15);

        // Balance point: (1-l) Delta = l * E.
        let l = 1.0 / 2.5;
        let (_, zeta) = scale_and_zeta(&p, l, ScaleRule::MaxLocalScale).unwrap();
        assert!((zeta - 1.0).abs() < 1e-12);

        let (_, zeta) = scale_and_zeta(&p, 0.0, ScaleRule::MaxLocalScale).unwrap();
        assert!(zeta.is_infinite());
    }

    #[test]
    fn single_qubit_sweep_matches_closed_form() {
        let hfield = -0.7;
        let p = IsingProblem::new(1, vec![hfield], vec![], 1.0).unwrap();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let result = sweep(&p, &grid, 1, &LanczosOptions::default()).unwrap();
        for row in &result.rows {
            let l = row.lambda;
            let want = -((l * hfield).powi(2) + ((1.0 - l) * p.delta()).powi(2)).sqrt();
            assert!(
                (row.energies[0] - want).abs() < 1e-10,
                "lambda {l}: {} vs {want}",
                row.energies[0]
            );
            assert!(row.gap.is_none());
        }
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let p = IsingProblem::new(1, vec![1.0], vec![], 1.0).unwrap();
        let opts = LanczosOptions::default();
        assert!(sweep(&p, &[], 1, &opts).is_err());
        assert!(sweep(&p, &[0.2, 0.2], 1, &opts).is_err());
        assert!(sweep(&p, &[0.5, 0.1], 1, &opts).is_err());
        assert!(sweep(&p, &[-0.1, 0.5], 1, &opts).is_err());
    }

    #[test]
    fn forward_and_backward_sweeps_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = random_problem(&mut rng, 5);
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let opts = LanczosOptions::default();
        let fwd = sweep_directed(&p, &grid, 2, &opts, false).unwrap();
        let bwd = sweep_directed(&p, &grid, 2, &opts, true).unwrap();
        for (a, b) in fwd.rows.iter().zip(&bwd.rows) {
            assert_eq!(a.lambda, b.lambda);
            for (x, y) in a.energies.iter().zip(&b.energies) {
                assert!((x - y).abs() < 1e-9, "{x} vs {y} at lambda {}", a.lambda);
            }
        }
    }

    #[test]
    fn refine_finds_symmetric_single_qubit_minimum() {
        // h = Delta = 1: gap(lambda) = 2 sqrt(lambda^2 h^2 + (1-lambda)^2),
        // minimized at lambda = 1/2 with value sqrt(2).
        let p = IsingProblem::new(1, vec![1.0], vec![], 1.0).unwrap();
        let report =
            refine_minimum_gap(&p, (0.2, 0.9), &LanczosOptions::default()).unwrap();
        assert!((report.lambda_star - 0.5).abs() < 1e-7);
        assert!((report.g_min - std::f64::consts::SQRT_2).abs() < 1e-10);
        assert!(report.bracket.0 < report.lambda_star && report.lambda_star < report.bracket.1);
    }

    #[test]
    fn refine_rejects_monotone_interval() {
        // Same problem: gap is monotone on [0.6, 0.95].
        let p = IsingProblem::new(1, vec![1.0], vec![], 1.0).unwrap();
        let err = refine_minimum_gap(&p, (0.6, 0.95), &LanczosOptions::default());
        assert!(matches!(err, Err(Error::Input(_))));
    }
}
