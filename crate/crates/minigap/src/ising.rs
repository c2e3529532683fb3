//! Classical side of the problem: spin configurations, Ising energies, flip
//! costs, and exhaustive enumeration of the energy landscape's strict local
//! minima.
//!
//! Convention used everywhere in this crate: bit `i` of a configuration word
//! encodes spin `i` through `s_i = 2*bit_i - 1`, so a set bit is spin `+1`.
//! Bit 0 is qubit 0.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Hard cap for anything that walks all `2^N` basis states.
pub const MAX_QUBITS: usize = 24;

/// Relative tolerance deciding when two classical energies count as
/// degenerate. Inputs are small rational-like reals, so this separates
/// genuine degeneracy from round-off without merging distinct levels.
pub const DEGENERACY_RTOL: f64 = 1e-9;

/// True when `e` is degenerate with the reference energy `e_ref`.
pub fn energies_degenerate(e_ref: f64, e: f64) -> bool {
    (e - e_ref).abs() <= DEGENERACY_RTOL * e_ref.abs().max(1.0)
}

/// One classical state of `n_qubits` spins, bit-encoded.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfiguration {
    bits: u32,
    n_qubits: u8,
}

impl SpinConfiguration {
    pub fn new(bits: u32, n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::input(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        if n_qubits < 32 && bits >> n_qubits != 0 {
            return Err(Error::input(format!(
                "state {bits:#b} does not fit in {n_qubits} qubits"
            )));
        }
        Ok(SpinConfiguration {
            bits,
            n_qubits: n_qubits as u8,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    /// Spin value `s_i = 2*bit_i - 1`, i.e. `+1.0` or `-1.0`.
    pub fn spin(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_qubits());
        if self.bits >> i & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// The configuration with qubit `k` flipped.
    pub fn flipped(&self, k: usize) -> SpinConfiguration {
        debug_assert!(k < self.n_qubits());
        SpinConfiguration {
            bits: self.bits ^ (1 << k),
            n_qubits: self.n_qubits,
        }
    }

    /// Number of differing spins between two configurations.
    pub fn hamming_distance(&self, other: &SpinConfiguration) -> Result<u32> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::input(format!(
                "hamming distance between {}-qubit and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok((self.bits ^ other.bits).count_ones())
    }
}

impl fmt::Debug for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SpinConfiguration {
    /// Prints qubit 0 leftmost, `+` for spin up.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n_qubits() {
            write!(f, "{}", if self.bits >> i & 1 == 1 { '+' } else { '-' })?;
        }
        Ok(())
    }
}

/// Ising problem data: local fields `h_i`, symmetric couplings `J_ij`, and
/// the transverse-field amplitude.
#[derive(Clone, Debug)]
pub struct IsingProblem {
    n_qubits: usize,
    h: Vec<f64>,
    /// `(i, j, J_ij)` with `i < j`, sorted, each unordered pair unique.
    couplings: Vec<(usize, usize, f64)>,
    delta: f64,
    /// Per-qubit neighbor list for O(degree) flip costs.
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl IsingProblem {
    pub fn new(
        n_qubits: usize,
        h: Vec<f64>,
        couplings: Vec<(usize, usize, f64)>,
        delta: f64,
    ) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::input(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        if h.len() != n_qubits {
            return Err(Error::input(format!(
                "expected {} local fields, got {}",
                n_qubits,
                h.len()
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::input(format!(
                "transverse amplitude must be positive, got {delta}"
            )));
        }
        let mut normalized = Vec::with_capacity(couplings.len());
        for &(i, j, value) in &couplings {
            if i == j {
                return Err(Error::input(format!("self-coupling on qubit {i}")));
            }
            if i >= n_qubits || j >= n_qubits {
                return Err(Error::input(format!(
                    "coupling ({i},{j}) out of range for {n_qubits} qubits"
                )));
            }
            if !value.is_finite() {
                return Err(Error::input(format!("non-finite coupling on ({i},{j})")));
            }
            normalized.push((i.min(j), i.max(j), value));
        }
        normalized.sort_by_key(|&(i, j, _)| (i, j));
        if let Some(w) = normalized.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::input(format!(
                "duplicate coupling ({},{})",
                w[0].0, w[0].1
            )));
        }
        if let Some(bad) = h.iter().find(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite local field {bad}")));
        }

        let mut adjacency = vec![Vec::new(); n_qubits];
        for &(i, j, value) in &normalized {
            adjacency[i].push((j, value));
            adjacency[j].push((i, value));
        }

        Ok(IsingProblem {
            n_qubits,
            h,
            couplings: normalized,
            delta,
            adjacency,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn local_fields(&self) -> &[f64] {
        &self.h
    }

    pub fn couplings(&self) -> &[(usize, usize, f64)] {
        &self.couplings
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Classical energy `sum_i h_i s_i + sum_(i<j) J_ij s_i s_j`, summed in
    /// deterministic index order.
    pub fn classical_energy(&self, config: &SpinConfiguration) -> Result<f64> {
        if config.n_qubits() != self.n_qubits {
            return Err(Error::input(format!(
                "configuration has {} qubits, problem has {}",
                config.n_qubits(),
                self.n_qubits
            )));
        }
        Ok(self.classical_energy_bits(config.bits()))
    }

    pub(crate) fn classical_energy_bits(&self, bits: u32) -> f64 {
        let spin = |i: usize| -> f64 {
            if bits >> i & 1 == 1 {
                1.0
            } else {
                -1.0
            }
        };
        let mut e = 0.0;
        for (i, &hi) in self.h.iter().enumerate() {
            e += hi * spin(i);
        }
        for &(i, j, value) in &self.couplings {
            e += value * spin(i) * spin(j);
        }
        e
    }

    /// Energy change from flipping qubit `k`, in O(degree of k):
    /// `-2 s_k (h_k + sum_j J_kj s_j)`.
    pub fn single_flip_delta(&self, config: &SpinConfiguration, k: usize) -> Result<f64> {
        if config.n_qubits() != self.n_qubits {
            return Err(Error::input(format!(
                "configuration has {} qubits, problem has {}",
                config.n_qubits(),
                self.n_qubits
            )));
        }
        if k >= self.n_qubits {
            return Err(Error::input(format!(
                "flip index {k} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(self.flip_delta_bits(config.bits(), k))
    }

    pub(crate) fn flip_delta_bits(&self, bits: u32, k: usize) -> f64 {
        let spin = |i: usize| -> f64 {
            if bits >> i & 1 == 1 {
                1.0
            } else {
                -1.0
            }
        };
        let mut field = self.h[k];
        for &(j, value) in &self.adjacency[k] {
            field += value * spin(j);
        }
        -2.0 * spin(k) * field
    }

    /// The energy scale `max_i (|h_i| + sum_j |J_ij|)` used as the default
    /// characteristic scale of the problem Hamiltonian.
    pub fn max_local_scale(&self) -> f64 {
        (0..self.n_qubits)
            .map(|i| {
                self.h[i].abs()
                    + self.adjacency[i]
                        .iter()
                        .map(|&(_, v)| v.abs())
                        .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Deterministic FNV-1a fingerprint of the problem data, stable across
    /// runs; recorded in sweep outputs.
    pub fn fingerprint(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                hash ^= b as u64;
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(&(self.n_qubits as u64).to_le_bytes());
        for v in &self.h {
            eat(&v.to_bits().to_le_bytes());
        }
        for &(i, j, v) in &self.couplings {
            eat(&(i as u64).to_le_bytes());
            eat(&(j as u64).to_le_bytes());
            eat(&v.to_bits().to_le_bytes());
        }
        eat(&self.delta.to_bits().to_le_bytes());
        hash
    }

    /// Scan all `2^N` configurations and cluster the strict local minima by
    /// energy degeneracy. Clusters come back sorted by ascending energy with
    /// the first one marked global.
    pub fn enumerate_minima(&self) -> Result<Vec<MinimaCluster>> {
        let n = self.n_qubits;
        let dim: u64 = 1 << n;

        let mut survivors: Vec<(u32, f64)> = Vec::new();
        'states: for bits in 0..dim {
            let bits = bits as u32;
            for k in 0..n {
                if self.flip_delta_bits(bits, k) <= 0.0 {
                    continue 'states;
                }
            }
            survivors.push((bits, self.classical_energy_bits(bits)));
        }
        if survivors.is_empty() {
            return Err(Error::Diagnostic(
                "no strict local minima: the landscape is fully degenerate".into(),
            ));
        }

        survivors.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

        let mut clusters: Vec<MinimaCluster> = Vec::new();
        for (bits, energy) in survivors {
            let config = SpinConfiguration {
                bits,
                n_qubits: n as u8,
            };
            match clusters.last_mut() {
                Some(cluster) if energies_degenerate(cluster.energy, energy) => {
                    cluster.members.push(config);
                }
                _ => clusters.push(MinimaCluster {
                    members: vec![config],
                    energy,
                    is_global: clusters.is_empty(),
                    distance_to_global: 0,
                }),
            }
        }

        let global_members = clusters[0].members.clone();
        for cluster in clusters.iter_mut().skip(1) {
            cluster.distance_to_global = cluster
                .members
                .iter()
                .flat_map(|m| global_members.iter().map(move |g| (m.bits ^ g.bits).count_ones()))
                .min()
                .unwrap();
        }
        Ok(clusters)
    }

    /// Parse an instance from its text format. See the crate docs for the
    /// directive grammar (`n`, `delta`, `h`, `J`, `#` comments).
    pub fn parse(text: &str) -> Result<Self> {
        let mut n_qubits: Option<usize> = None;
        let mut delta: Option<f64> = None;
        let mut h_entries: Vec<(usize, f64, usize)> = Vec::new();
        let mut couplings: Vec<(usize, usize, f64)> = Vec::new();
        let mut coupling_lines: Vec<(usize, usize, usize)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_index = |s: &str| -> Result<usize> {
                s.parse::<usize>()
                    .map_err(|_| Error::parse(lineno, format!("bad qubit index '{s}'")))
            };
            let parse_float = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("bad float '{s}'")))
            };
            match fields[0] {
                "n" => {
                    if n_qubits.is_some() {
                        return Err(Error::parse(lineno, "duplicate 'n' directive"));
                    }
                    if fields.len() != 2 {
                        return Err(Error::parse(lineno, "expected 'n <N>'"));
                    }
                    n_qubits = Some(parse_index(fields[1])?);
                }
                "delta" => {
                    if delta.is_some() {
                        return Err(Error::parse(lineno, "duplicate 'delta' directive"));
                    }
                    if fields.len() != 2 {
                        return Err(Error::parse(lineno, "expected 'delta <float>'"));
                    }
                    let value = parse_float(fields[1])?;
                    if !(value > 0.0) {
                        return Err(Error::parse(
                            lineno,
                            format!("delta must be positive, got {value}"),
                        ));
                    }
                    delta = Some(value);
                }
                "h" => {
                    if fields.len() != 3 {
                        return Err(Error::parse(lineno, "expected 'h <i> <float>'"));
                    }
                    h_entries.push((parse_index(fields[1])?, parse_float(fields[2])?, lineno));
                }
                "J" => {
                    if fields.len() != 4 {
                        return Err(Error::parse(lineno, "expected 'J <i> <j> <float>'"));
                    }
                    let i = parse_index(fields[1])?;
                    let j = parse_index(fields[2])?;
                    if i == j {
                        return Err(Error::parse(lineno, format!("self-coupling on qubit {i}")));
                    }
                    couplings.push((i, j, parse_float(fields[3])?));
                    coupling_lines.push((i.min(j), i.max(j), lineno));
                }
                other => {
                    return Err(Error::parse(lineno, format!("unknown directive '{other}'")));
                }
            }
            if n_qubits.is_none() {
                return Err(Error::parse(
                    lineno,
                    "'n <N>' must be the first non-comment directive",
                ));
            }
        }

        let n = n_qubits.ok_or_else(|| Error::parse(0, "missing 'n' directive"))?;
        let delta =
            delta.ok_or_else(|| Error::parse(0, "missing 'delta' directive"))?;

        let mut h = vec![0.0; n];
        let mut seen = vec![false; n];
        for (i, value, lineno) in h_entries {
            if i >= n {
                return Err(Error::parse(
                    lineno,
                    format!("field index {i} out of range for n={n}"),
                ));
            }
            if seen[i] {
                return Err(Error::parse(lineno, format!("duplicate field for qubit {i}")));
            }
            seen[i] = true;
            h[i] = value;
        }

        coupling_lines.sort();
        if let Some(w) = coupling_lines.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::parse(
                w[1].2,
                format!("duplicate coupling ({},{})", w[0].0, w[0].1),
            ));
        }

        // Re-check ranges here so the error carries a line number.
        for (idx, &(i, j, _)) in couplings.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::parse(
                    coupling_lines
                        .iter()
                        .find(|&&(a, b, _)| (a, b) == (i.min(j), i.max(j)))
                        .map(|&(_, _, l)| l)
                        .unwrap_or(idx),
                    format!("coupling ({i},{j}) out of range for n={n}"),
                ));
            }
        }

        IsingProblem::new(n, h, couplings, delta)
    }

    pub fn load_instance(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        IsingProblem::parse(&text)
    }
}

/// A set of degenerate strict local minima with shared classical energy.
#[derive(Clone, Debug)]
pub struct MinimaCluster {
    /// Distinct member configurations, ascending by bit pattern.
    pub members: Vec<SpinConfiguration>,
    /// Shared classical energy (the lowest member's, representative for the
    /// degeneracy tolerance).
    pub energy: f64,
    pub is_global: bool,
    /// Minimum Hamming distance from any member to the global cluster.
    pub distance_to_global: u32,
}

impl MinimaCluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// Cheapest single-flip move out of the cluster: the minimum over all
    /// members and flips of the (positive) flip cost.
    pub fn lowest_escape_cost(&self, problem: &IsingProblem) -> Result<f64> {
        let mut best = f64::INFINITY;
        for member in &self.members {
            for k in 0..problem.n_qubits() {
                best = best.min(problem.single_flip_delta(member, k)?);
            }
        }
        Ok(best)
    }
}
