//! Perturbative machinery around `lambda ~ 1`: the second-order level
//! curvatures `chi`, the predicted crossing point of a local-minimum level
//! with the global one, and the tunneling amplitude between the two clusters
//! summed over shortest flip sequences.
//!
//! Treating `lambda H_P` as the unperturbed Hamiltonian and
//! `(1-lambda) H_B` as the perturbation, a cluster of `N_a` degenerate
//! minima enters as the uniform superposition over its members. Its energy
//! to second order is `E_a(lambda) = lambda E_a^P - chi_a (1-lambda)^2 / lambda`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ising::{energies_degenerate, IsingProblem, MinimaCluster};
use crate::spectral::ScaleEstimate;

/// A minima cluster dressed with its second-order curvature coefficient.
#[derive(Clone, Debug)]
pub struct PerturbativeLevel {
    pub cluster: MinimaCluster,
    /// `chi_a = sum_n |<a|H_B|n>|^2 / (E_n^P - E_a^P)` over basis states `n`
    /// outside the cluster. Positive for the global cluster (all
    /// denominators are positive there); either sign otherwise.
    pub chi: f64,
    /// Number of degenerate members in the superposition.
    pub superposition_norm: usize,
}

/// Second-order curvature coefficient of a cluster's uniform superposition.
///
/// Only basis states one flip away from a member couple to the cluster;
/// a state reachable from `c` members picks up the collective matrix element
/// `Delta * c / sqrt(N_a)`.
pub fn chi(problem: &IsingProblem, cluster: &MinimaCluster) -> Result<PerturbativeLevel> {
    let n = problem.n_qubits();
    let n_members = cluster.members.len();
    if n_members == 0 {
        return Err(Error::input("cluster has no members"));
    }
    let member_bits: Vec<u32> = cluster.members.iter().map(|m| m.bits()).collect();

    // c_n = number of members adjacent to each outside state n.
    let mut fan_in: BTreeMap<u32, u32> = BTreeMap::new();
    for &bits in &member_bits {
        for k in 0..n {
            let neighbor = bits ^ (1 << k);
            if member_bits.binary_search(&neighbor).is_err() {
                *fan_in.entry(neighbor).or_insert(0) += 1;
            }
        }
    }

    let delta_sq = problem.delta() * problem.delta();
    let e_cluster = cluster.energy;
    let mut total = 0.0;
    for (&state, &count) in &fan_in {
        let e_state = problem.classical_energy_bits(state);
        if energies_degenerate(e_cluster, e_state) {
            return Err(Error::Degeneracy(format!(
                "state {state:#b} at distance 1 is degenerate with the cluster at energy {e_cluster}"
            )));
        }
        let c = count as f64;
        total += c * c / (e_state - e_cluster);
    }
    Ok(PerturbativeLevel {
        cluster: cluster.clone(),
        chi: delta_sq * total / n_members as f64,
        superposition_norm: n_members,
    })
}

/// Second-order energy of a dressed level:
/// `lambda E^P - chi (1-lambda)^2 / lambda`.
pub fn perturbed_energy(level: &PerturbativeLevel, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Domain(format!(
            "perturbed energy needs lambda in (0,1], got {lambda}"
        )));
    }
    let one_minus = 1.0 - lambda;
    Ok(lambda * level.cluster.energy - level.chi * one_minus * one_minus / lambda)
}

/// Why a crossing prediction carries `valid = false`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossingGate {
    /// Prediction stands.
    None,
    /// `chi_L <= chi_G`: the local level bends less than the global one and
    /// never crosses it at this order.
    NoRealSolution,
    /// The crossing lands at or below `lambda_c`, where the expansion around
    /// the computational basis has already broken down.
    BelowLambdaC,
}

impl CrossingGate {
    pub fn as_str(&self) -> &'static str {
        match self {
            CrossingGate::None => "none",
            CrossingGate::NoRealSolution => "no_real_solution",
            CrossingGate::BelowLambdaC => "below_lambda_c",
        }
    }
}

/// Predicted level crossing between a local cluster and the global one.
#[derive(Clone, Copy, Debug)]
pub struct CrossingPrediction {
    /// `(1 + sqrt((E_L^P - E_G^P)/(chi_L - chi_G)))^-1`; absent when the
    /// square root has no real argument.
    pub lambda_star: Option<f64>,
    /// Minimal Hamming distance between the clusters; the perturbative order
    /// of the tunneling amplitude.
    pub f: u32,
    /// Signed effective couplings at the evaluation point, filled only for
    /// valid predictions.
    pub coupling_lg: Option<f64>,
    pub coupling_gl: Option<f64>,
    /// `2 sqrt(|H_LG| |H_GL|)`.
    pub g_min_predicted: Option<f64>,
    pub valid: bool,
    pub reason: CrossingGate,
}

/// Predict where the local level crosses the global one and, if the crossing
/// survives the validity gates, the tunneling gap there.
///
/// `prefactor_lambda` overrides the evaluation point of the coupling
/// prefactor (e.g. with the exact crossing extracted from diagonalization);
/// `None` evaluates at the perturbative crossing itself.
pub fn predict_crossing(
    problem: &IsingProblem,
    global: &PerturbativeLevel,
    local: &PerturbativeLevel,
    scale: &ScaleEstimate,
    prefactor_lambda: Option<f64>,
) -> Result<CrossingPrediction> {
    let e_gap = local.cluster.energy - global.cluster.energy;
    if e_gap <= 0.0 || energies_degenerate(global.cluster.energy, local.cluster.energy) {
        return Err(Error::input(format!(
            "not a local/global pair: local energy {} vs global {}",
            local.cluster.energy, global.cluster.energy
        )));
    }
    let f = min_pair_distance(&global.cluster, &local.cluster)?;

    let d_chi = local.chi - global.chi;
    if d_chi <= 0.0 {
        return Ok(CrossingPrediction {
            lambda_star: None,
            f,
            coupling_lg: None,
            coupling_gl: None,
            g_min_predicted: None,
            valid: false,
            reason: CrossingGate::NoRealSolution,
        });
    }

    let lambda_star = 1.0 / (1.0 + (e_gap / d_chi).sqrt());
    if lambda_star <= scale.lambda_c {
        return Ok(CrossingPrediction {
            lambda_star: Some(lambda_star),
            f,
            coupling_lg: None,
            coupling_gl: None,
            g_min_predicted: None,
            valid: false,
            reason: CrossingGate::BelowLambdaC,
        });
    }

    let eval_at = prefactor_lambda.unwrap_or(lambda_star);
    let (lg, gl) = effective_coupling(problem, &global.cluster, &local.cluster, eval_at)?;
    Ok(CrossingPrediction {
        lambda_star: Some(lambda_star),
        f,
        coupling_lg: Some(lg),
        coupling_gl: Some(gl),
        g_min_predicted: Some(predicted_min_gap(lg, gl)),
        valid: true,
        reason: CrossingGate::None,
    })
}

/// Effective tunneling couplings `(H_LG, H_GL)` between two clusters at the
/// crossing point, to lowest (f-th) order.
///
/// For every member pair at the minimal Hamming distance `f`, the amplitude
/// sums over all orderings of the `f` differing flips. Each sequence
/// contributes `Delta^f` over the product of `E_ref^P - E_s^P` across its
/// `f-1` intermediate states, where `E_ref` is the destination cluster's
/// energy (`E_G^P` for `H_LG`, `E_L^P` for `H_GL`). Sequences through a state
/// of either cluster are excluded, and the uniform superpositions contribute
/// the `1/sqrt(N_L N_G)` normalization. Pairs farther apart than `f` are
/// higher order and dropped.
pub fn effective_coupling(
    problem: &IsingProblem,
    global: &MinimaCluster,
    local: &MinimaCluster,
    lambda_star: f64,
) -> Result<(f64, f64)> {
    if !(lambda_star > 0.0 && lambda_star < 1.0) {
        return Err(Error::input(format!(
            "coupling prefactor needs lambda in (0,1), got {lambda_star}"
        )));
    }
    let f = min_pair_distance(global, local)?;

    let mut excluded: Vec<u32> = global
        .members
        .iter()
        .chain(&local.members)
        .map(|m| m.bits())
        .collect();
    excluded.sort_unstable();

    let mut sum_lg = 0.0; // destination G, reference energy E_G
    let mut sum_gl = 0.0; // destination L, reference energy E_L
    for l_member in &local.members {
        for g_member in &global.members {
            if (l_member.bits() ^ g_member.bits()).count_ones() != f {
                continue;
            }
            sum_lg += path_sum(
                problem,
                l_member.bits(),
                g_member.bits(),
                global.energy,
                &excluded,
            )?;
            sum_gl += path_sum(
                problem,
                g_member.bits(),
                l_member.bits(),
                local.energy,
                &excluded,
            )?;
        }
    }

    let prefactor =
        (1.0 - lambda_star).powi(f as i32) / lambda_star.powi(f as i32 - 1);
    let amplitude = problem.delta().powi(f as i32);
    let norm = 1.0 / ((local.members.len() * global.members.len()) as f64).sqrt();
    Ok((
        prefactor * amplitude * sum_lg * norm,
        prefactor * amplitude * sum_gl * norm,
    ))
}

/// `g_min = 2 sqrt(H_LG H_GL)`, taking magnitudes: individual sequence terms
/// are signed, but the overall phase of the two-level splitting is not
/// observable.
pub fn predicted_min_gap(coupling_lg: f64, coupling_gl: f64) -> f64 {
    2.0 * (coupling_lg.abs() * coupling_gl.abs()).sqrt()
}

/// Minimal Hamming distance over all member pairs of two disjoint clusters.
pub fn min_pair_distance(a: &MinimaCluster, b: &MinimaCluster) -> Result<u32> {
    let mut f = u32::MAX;
    for x in &a.members {
        for y in &b.members {
            f = f.min(x.hamming_distance(y)?);
        }
    }
    if f == 0 {
        return Err(Error::input(
            "clusters share a configuration; need disjoint clusters",
        ));
    }
    Ok(f)
}

/// Sum over all orderings of the differing flips between `from` and `to` of
/// `prod_s 1/(e_ref - E(state_s))` across the `f-1` intermediate states.
///
/// Dynamic programming over subsets of the differing bits: an intermediate's
/// energy depends only on which bits have flipped, not on their order, so
/// `A(T) = sum_{b in T} A(T \ b) / (e_ref - E(from ^ T))` accumulates every
/// ordering in `O(2^f f)` instead of `O(f!)`. States listed in `excluded`
/// (the two clusters) terminate a path.
fn path_sum(
    problem: &IsingProblem,
    from: u32,
    to: u32,
    e_ref: f64,
    excluded: &[u32],
) -> Result<f64> {
    let differing = from ^ to;
    let f = differing.count_ones() as usize;
    debug_assert!(f >= 1);
    let bit_positions: Vec<u32> = (0..32).filter(|i| differing >> i & 1 == 1).collect();

    if f == 1 {
        // One flip, no intermediates, single ordering.
        return Ok(1.0);
    }

    let full: usize = (1 << f) - 1;
    // Energies of `from ^ subset`, built incrementally one flip at a time.
    let mut energy = vec![0.0; full + 1];
    energy[0] = problem.classical_energy_bits(from);
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        let parent = mask & (mask - 1);
        let parent_state = expand(from, parent, &bit_positions);
        energy[mask] = energy[parent]
            + problem.flip_delta_bits(parent_state, bit_positions[low] as usize);
    }

    let mut weight = vec![0.0; full + 1];
    weight[0] = 1.0;
    for mask in 1..full {
        let state = expand(from, mask, &bit_positions);
        if excluded.binary_search(&state).is_ok() {
            continue; // path may not pass through a cluster state
        }
        let denom = e_ref - energy[mask];
        if energies_degenerate(e_ref, energy[mask]) {
            return Err(Error::Degeneracy(format!(
                "intermediate state {state:#b} is degenerate with the destination level at {e_ref}"
            )));
        }
        let mut incoming = 0.0;
        let mut rest = mask;
        while rest != 0 {
            let b = rest & rest.wrapping_neg();
            incoming += weight[mask & !b];
            rest &= rest - 1;
        }
        weight[mask] = incoming / denom;
    }

    // Final state: no denominator of its own, just gather the orderings.
    let mut total = 0.0;
    let mut rest = full;
    while rest != 0 {
        let b = rest & rest.wrapping_neg();
        total += weight[full & !b];
        rest &= rest - 1;
    }
    Ok(total)
}

/// Apply a subset mask over `bit_positions` to `base`.
fn expand(base: u32, mask: usize, bit_positions: &[u32]) -> u32 {
    let mut state = base;
    let mut rest = mask;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        state ^= 1 << bit_positions[i];
        rest &= rest - 1;
    }
    state
}
