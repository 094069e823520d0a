//! Single-reference coupled cluster at arbitrary excitation rank.
//!
//! Amplitude equations are the projections <mu| exp(-T) H exp(T) |ref> = 0,
//! evaluated exactly: exp(+-T) is applied to sector vectors through the
//! terminating power series of the nilpotent cluster matrix, so no
//! commutator expansion is involved.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use nalgebra::DVector;

use crate::fockspace::{
    exp_nilpotent_apply, BitIter, ExcitationPattern, Ladder, SectorBasis, SectorMatrix,
    SparseOperator,
};
use crate::linalg::{self, Diis};
use crate::math;
use crate::{Error, Result};

/// Holes and particles of an excitation, as ascending spin-orbital indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExcitationSignature {
    holes: Vec<usize>,
    particles: Vec<usize>,
}

impl ExcitationSignature {
    /// Validates ordering, disjointness and spin conservation.
    pub fn new(mut holes: Vec<usize>, mut particles: Vec<usize>) -> Result<Self> {
        holes.sort_unstable();
        particles.sort_unstable();
        if holes.len() != particles.len() || holes.is_empty() {
            return Err(Error::invalid(
                "an excitation needs equal, non-zero hole and particle counts",
            ));
        }
        if holes.windows(2).any(|w| w[0] == w[1]) || particles.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("repeated orbital in excitation"));
        }
        if holes.iter().any(|h| particles.contains(h)) {
            return Err(Error::invalid("orbital appears as both hole and particle"));
        }
        if holes.iter().chain(&particles).any(|&p| p >= 64) {
            return Err(Error::invalid("spin-orbital index out of range"));
        }
        let alpha = |v: &[usize]| v.iter().filter(|&&p| p % 2 == 0).count();
        if alpha(&holes) != alpha(&particles) {
            return Err(Error::invalid("excitation does not conserve S_z"));
        }
        Ok(ExcitationSignature { holes, particles })
    }

    fn from_masks(holes: u64, particles: u64) -> Self {
        ExcitationSignature {
            holes: BitIter(holes).collect(),
            particles: BitIter(particles).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.holes.len()
    }

    pub fn holes(&self) -> &[usize] {
        &self.holes
    }

    pub fn particles(&self) -> &[usize] {
        &self.particles
    }

    pub fn hole_mask(&self) -> u64 {
        self.holes.iter().fold(0, |m, &p| m | 1 << p)
    }

    pub fn particle_mask(&self) -> u64 {
        self.particles.iter().fold(0, |m, &p| m | 1 << p)
    }

    /// a+_{p1} ... a+_{pk} a_{hk} ... a_{h1}
    pub fn ladder_string(&self) -> Vec<Ladder> {
        self.particles
            .iter()
            .map(|&p| Ladder::Create(p))
            .chain(self.holes.iter().rev().map(|&h| Ladder::Annihilate(h)))
            .collect()
    }

    /// Whether any hole or particle lies in `mask`.
    pub fn touches(&self, mask: u64) -> bool {
        (self.hole_mask() | self.particle_mask()) & mask != 0
    }
}

impl Ord for ExcitationSignature {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank()
            .cmp(&other.rank())
            .then_with(|| self.holes.cmp(&other.holes))
            .then_with(|| self.particles.cmp(&other.particles))
    }
}

impl PartialOrd for ExcitationSignature {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExcitationSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| {
            v.iter()
                .map(|p| format!("{p}"))
                .collect::<Vec<String>>()
                .join(",")
        };
        write!(f, "{}->{}", join(&self.holes), join(&self.particles))
    }
}

/// Cluster amplitudes keyed by excitation, in deterministic order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusterOperator {
    amplitudes: BTreeMap<ExcitationSignature, f64>,
    max_rank: usize,
}

impl ClusterOperator {
    pub fn new(max_rank: usize) -> Self {
        ClusterOperator {
            amplitudes: BTreeMap::new(),
            max_rank,
        }
    }

    pub fn max_rank(&self) -> usize {
        self.max_rank
    }

    pub fn insert(&mut self, sig: ExcitationSignature, amplitude: f64) -> Result<()> {
        if sig.rank() > self.max_rank {
            return Err(Error::invalid(format!(
                "excitation {sig} exceeds the maximum rank {}",
                self.max_rank
            )));
        }
        if !amplitude.is_finite() {
            return Err(Error::invalid(format!("non-finite amplitude for {sig}")));
        }
        self.amplitudes.insert(sig, amplitude);
        Ok(())
    }

    pub fn get(&self, sig: &ExcitationSignature) -> Option<f64> {
        self.amplitudes.get(sig).copied()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ExcitationSignature, &f64)> {
        self.amplitudes.iter()
    }

    pub fn signatures(&self) -> Vec<ExcitationSignature> {
        self.amplitudes.keys().cloned().collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.amplitudes.values().copied().collect()
    }
}

/// Set of active spatial orbitals (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActiveSpace {
    orbitals: Vec<usize>,
}

impl ActiveSpace {
    /// Sorts and deduplicates `orbitals`; each must be below `n_spatial`.
    pub fn new(orbitals: &[usize], n_spatial: usize) -> Result<Self> {
        if orbitals.is_empty() {
            return Err(Error::invalid(
                "active space must contain at least one orbital",
            ));
        }
        let mut v = orbitals.to_vec();
        v.sort_unstable();
        v.dedup();
        if let Some(&bad) = v.iter().find(|&&k| k >= n_spatial) {
            return Err(Error::invalid(format!(
                "active orbital {} outside 1..={n_spatial}",
                bad + 1
            )));
        }
        Ok(ActiveSpace { orbitals: v })
    }

    /// Same as [`ActiveSpace::new`] with 1-based orbital labels.
    pub fn from_one_based(orbitals: &[usize], n_spatial: usize) -> Result<Self> {
        if let Some(&bad) = orbitals.iter().find(|&&k| k == 0 || k > n_spatial) {
            return Err(Error::invalid(format!(
                "active orbital {bad} outside 1..={n_spatial}"
            )));
        }
        let zero: Vec<usize> = orbitals.iter().map(|&k| k - 1).collect();
        Self::new(&zero, n_spatial)
    }

    /// 0-based spatial orbital indices, ascending.
    pub fn orbitals(&self) -> &[usize] {
        &self.orbitals
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.orbitals.iter().map(|k| k + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.orbitals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbitals.is_empty()
    }

    /// Spin-orbital mask of the active orbitals.
    pub fn active_mask(&self) -> u64 {
        self.orbitals.iter().fold(0, |m, &k| m | 0b11 << (2 * k))
    }

    /// Spin-orbital mask of orbitals outside the active space.
    pub fn inactive_mask(&self, n_spatial: usize) -> u64 {
        let full = if n_spatial == 32 {
            u64::MAX
        } else {
            (1u64 << (2 * n_spatial)) - 1
        };
        full & !self.active_mask()
    }

    /// Active orbitals doubly occupied in a closed-shell reference with
    /// `n_occ` occupied spatial orbitals.
    pub fn active_occupied(&self, n_occ: usize) -> Vec<usize> {
        self.orbitals
            .iter()
            .copied()
            .filter(|&k| k < n_occ)
            .collect()
    }

    pub fn active_virtual(&self, n_occ: usize) -> Vec<usize> {
        self.orbitals
            .iter()
            .copied()
            .filter(|&k| k >= n_occ)
            .collect()
    }
}

impl fmt::Display for ActiveSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.one_based().iter().map(|k| format!("{k}")).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

/// All excitations of rank 1..=max_rank out of the sector reference,
/// ordered by rank, then holes, then particles.
pub fn enumerate_manifold(basis: &SectorBasis, max_rank: usize) -> Vec<ExcitationSignature> {
    let reference = basis.reference().bits();
    let mut sigs: Vec<ExcitationSignature> = basis
        .dets()
        .iter()
        .skip(1)
        .filter_map(|d| {
            let holes = reference & !d.bits();
            let rank = holes.count_ones() as usize;
            (rank <= max_rank)
                .then(|| ExcitationSignature::from_masks(holes, d.bits() & !reference))
        })
        .collect();
    sigs.sort();
    sigs
}

/// Splits `t` into amplitudes with only active labels (internal) and
/// those touching at least one inactive spin orbital (external).
pub fn partition_amplitudes(
    t: &ClusterOperator,
    act: &ActiveSpace,
    n_spatial: usize,
) -> (ClusterOperator, ClusterOperator) {
    let inactive = act.inactive_mask(n_spatial);
    let mut internal = ClusterOperator::new(t.max_rank());
    let mut external = ClusterOperator::new(t.max_rank());
    for (sig, &amp) in t.iter() {
        let target = if sig.touches(inactive) {
            &mut external
        } else {
            &mut internal
        };
        target.amplitudes.insert(sig.clone(), amp);
    }
    (internal, external)
}

/// Solver controls for [`solve_cc`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcOptions {
    /// Convergence threshold on max |r_mu|.
    pub conv: f64,
    pub max_iter: usize,
    pub diis_depth: usize,
    /// Smallest allowed |D_mu| in the Jacobi update, in Hartree.
    pub denominator_floor: f64,
    /// Newton-Krylov iterations allowed once the Jacobi/DIIS phase stalls.
    pub newton_max_iter: usize,
}

impl Default for CcOptions {
    fn default() -> Self {
        CcOptions {
            conv: 1e-9,
            max_iter: 500,
            diis_depth: 8,
            denominator_floor: 0.05,
            newton_max_iter: 60,
        }
    }
}

/// Converged coupled-cluster state.
#[derive(Debug, Clone)]
pub struct CcSolution {
    pub amplitudes: ClusterOperator,
    /// <ref| exp(-T) H exp(T) |ref>, including nuclear repulsion.
    pub energy: f64,
    /// `energy` minus the reference expectation value.
    pub correlation_energy: f64,
    pub iterations: usize,
    pub max_residual: f64,
}

/// Amplitude equations over the excitation manifold of one rank cap.
pub struct CcProblem<'a> {
    hamiltonian: &'a SectorMatrix,
    sparse_h: SparseOperator,
    pattern: ExcitationPattern,
    denominators: Vec<f64>,
    max_rank: usize,
}

impl<'a> CcProblem<'a> {
    /// `orbital_energies` are spatial RHF orbital energies used for the
    /// Moller-Plesset denominators.
    pub fn new(
        hamiltonian: &'a SectorMatrix,
        orbital_energies: &[f64],
        max_rank: usize,
        floor: f64,
    ) -> Result<Self> {
        let basis = &hamiltonian.basis;
        if orbital_energies.len() != basis.n_spatial() {
            return Err(Error::invalid(format!(
                "{} orbital energies for {} spatial orbitals",
                orbital_energies.len(),
                basis.n_spatial()
            )));
        }
        let sigs = enumerate_manifold(basis, max_rank);
        let denominators = sigs
            .iter()
            .map(|s| {
                let d: f64 = s
                    .holes()
                    .iter()
                    .map(|&h| orbital_energies[h / 2])
                    .sum::<f64>()
                    - s.particles()
                        .iter()
                        .map(|&p| orbital_energies[p / 2])
                        .sum::<f64>();
                if d.abs() < floor {
                    // Level shift away from zero, keeping the usual negative sign.
                    if d > 0.0 {
                        floor
                    } else {
                        -floor
                    }
                } else {
                    d
                }
            })
            .collect();
        let pattern = ExcitationPattern::new(basis, sigs)?;
        Ok(CcProblem {
            hamiltonian,
            sparse_h: SparseOperator::from_dense(&hamiltonian.data),
            pattern,
            denominators,
            max_rank,
        })
    }

    pub fn n_amplitudes(&self) -> usize {
        self.pattern.len()
    }

    pub fn signatures(&self) -> &[ExcitationSignature] {
        self.pattern.signatures()
    }

    /// Energy and residual vector for amplitudes `t`, in manifold order.
    pub fn residuals(&self, t: &[f64]) -> Result<(f64, Vec<f64>)> {
        let state = self.evaluate(t)?;
        Ok((state.energy, state.residual))
    }

    fn evaluate(&self, t: &[f64]) -> Result<Evaluation> {
        let dim = self.hamiltonian.dim();
        let cluster = self.pattern.assemble(t);
        let mut reference = DVector::zeros(dim);
        reference[0] = 1.0;
        let psi = exp_nilpotent_apply(&cluster, 1.0, &reference)?;
        let h_psi = self.sparse_h.apply(&psi);
        let projected = exp_nilpotent_apply(&cluster, -1.0, &h_psi)?;
        let residual = self.project(&projected);
        Ok(Evaluation {
            energy: projected[0],
            residual,
            cluster,
            transformed: projected,
        })
    }

    fn project(&self, v: &DVector<f64>) -> Vec<f64> {
        (0..self.pattern.len())
            .map(|mu| {
                let (row, sign) = self.pattern.target(mu);
                f64::from(sign) * v[row]
            })
            .collect()
    }

    /// Jacobian of the residual at the evaluated point applied to `delta`.
    ///
    /// Excitation operators commute, so the derivative along D is the
    /// projection of exp(-T) H exp(T) D|ref> - D exp(-T) H exp(T)|ref>.
    fn jacobian_apply(&self, at: &Evaluation, delta: &[f64]) -> Result<Vec<f64>> {
        let dim = self.hamiltonian.dim();
        let d = self.pattern.assemble(delta);
        let mut reference = DVector::zeros(dim);
        reference[0] = 1.0;
        let excited = d.apply(&reference);
        let psi = exp_nilpotent_apply(&at.cluster, 1.0, &excited)?;
        let h_psi = self.sparse_h.apply(&psi);
        let mut out = exp_nilpotent_apply(&at.cluster, -1.0, &h_psi)?;
        out -= d.apply(&at.transformed);
        Ok(self.project(&out))
    }

    /// First-order guess for doubles, zero elsewhere.
    pub fn initial_guess(&self) -> Vec<f64> {
        let h = &self.hamiltonian.data;
        (0..self.pattern.len())
            .map(|mu| {
                if self.pattern.signatures()[mu].rank() == 2 {
                    let (row, sign) = self.pattern.target(mu);
                    f64::from(sign) * h[(row, 0)] / self.denominators[mu]
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn to_operator(&self, t: &[f64]) -> ClusterOperator {
        let mut op = ClusterOperator::new(self.max_rank);
        for (sig, &amp) in self.pattern.signatures().iter().zip(t) {
            op.amplitudes.insert(sig.clone(), amp);
        }
        op
    }

    /// Amplitude vector in manifold order from an operator; missing
    /// signatures are zero.
    pub fn from_operator(&self, op: &ClusterOperator) -> Vec<f64> {
        self.pattern
            .signatures()
            .iter()
            .map(|s| op.get(s).unwrap_or(0.0))
            .collect()
    }

    /// Jacobi steps with DIIS extrapolation from `start` (or the
    /// first-order guess). If that stalls, Newton-Krylov iterations take
    /// over from the best point found.
    pub fn solve(&self, opts: &CcOptions, start: Option<&[f64]>) -> Result<CcSolution> {
        let n = self.pattern.len();
        let e_ref = self.hamiltonian.data[(0, 0)];
        if n == 0 {
            return Ok(CcSolution {
                amplitudes: ClusterOperator::new(self.max_rank),
                energy: e_ref,
                correlation_energy: 0.0,
                iterations: 0,
                max_residual: 0.0,
            });
        }
        let mut t = match start {
            Some(s) if s.len() == n => s.to_vec(),
            Some(_) => {
                return Err(Error::invalid(
                    "starting amplitudes do not match the manifold",
                ))
            }
            None => self.initial_guess(),
        };
        let mut diis = Diis::new(opts.diis_depth.max(1));
        let mut best = (f64::INFINITY, t.clone(), 0usize);
        let mut iterations = 0;
        for iter in 0..=opts.max_iter {
            iterations = iter;
            let (energy, r) = self.residuals(&t)?;
            let max_res = max_abs(&r);
            if !max_res.is_finite() || max_res > 1e6 {
                break;
            }
            if max_res < opts.conv {
                return Ok(self.finish(&t, energy, e_ref, iter, max_res));
            }
            if max_res < 0.5 * best.0 {
                best = (max_res, t.clone(), iter);
            } else if iter - best.2 >= STALL_WINDOW {
                break;
            }
            let step: Vec<f64> = r
                .iter()
                .zip(&self.denominators)
                .map(|(ri, di)| -ri / di)
                .collect();
            let next = DVector::from_iterator(n, t.iter().zip(&step).map(|(a, b)| a + b));
            t = if opts.diis_depth > 0 {
                diis.extrapolate(next, DVector::from_vec(step))
                    .iter()
                    .copied()
                    .collect()
            } else {
                next.iter().copied().collect()
            };
        }
        if opts.newton_max_iter == 0 || !best.0.is_finite() {
            return Err(Error::ConvergenceFailure {
                stage: "coupled cluster",
                iterations,
                last: best.0,
            });
        }
        self.newton(opts, best.1, iterations, e_ref)
    }

    fn newton(
        &self,
        opts: &CcOptions,
        mut t: Vec<f64>,
        offset: usize,
        e_ref: f64,
    ) -> Result<CcSolution> {
        let n = t.len();
        let mut state = self.evaluate(&t)?;
        let mut norm = l2(&state.residual);
        for iter in 0..opts.newton_max_iter {
            let max_res = max_abs(&state.residual);
            if max_res < opts.conv {
                return Ok(self.finish(&t, state.energy, e_ref, offset + iter, max_res));
            }
            let rhs = DVector::from_iterator(n, state.residual.iter().map(|x| -x));
            let forcing = (0.1 * norm).clamp(1e-8, 1e-2);
            let step = linalg::gmres(
                |v| {
                    Ok(DVector::from_vec(
                        self.jacobian_apply(&state, v.as_slice())?,
                    ))
                },
                |v| {
                    DVector::from_iterator(n, v.iter().zip(&self.denominators).map(|(x, d)| -x / d))
                },
                &rhs,
                forcing,
                50,
                600,
            )?;
            // Backtracking on the residual 2-norm.
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..8 {
                let trial: Vec<f64> = t
                    .iter()
                    .zip(step.iter())
                    .map(|(a, s)| a + alpha * s)
                    .collect();
                let trial_state = self.evaluate(&trial)?;
                let trial_norm = l2(&trial_state.residual);
                if trial_norm.is_finite() && trial_norm < (1.0 - 1e-4 * alpha) * norm {
                    accepted = Some((trial, trial_state, trial_norm));
                    break;
                }
                alpha *= 0.5;
            }
            match accepted {
                Some((trial, trial_state, trial_norm)) => {
                    t = trial;
                    state = trial_state;
                    norm = trial_norm;
                }
                None => break,
            }
        }
        let max_res = max_abs(&state.residual);
        if max_res < opts.conv {
            return Ok(self.finish(
                &t,
                state.energy,
                e_ref,
                offset + opts.newton_max_iter,
                max_res,
            ));
        }
        Err(Error::ConvergenceFailure {
            stage: "coupled cluster",
            iterations: offset + opts.newton_max_iter,
            last: max_res,
        })
    }

    fn finish(
        &self,
        t: &[f64],
        energy: f64,
        e_ref: f64,
        iterations: usize,
        max_residual: f64,
    ) -> CcSolution {
        CcSolution {
            amplitudes: self.to_operator(t),
            energy,
            correlation_energy: energy - e_ref,
            iterations,
            max_residual,
        }
    }
}

/// Jacobi/DIIS iterations without halving the best residual before the
/// Newton stage takes over.
const STALL_WINDOW: usize = 40;

struct Evaluation {
    energy: f64,
    residual: Vec<f64>,
    cluster: SparseOperator,
    /// exp(-T) H exp(T)|ref> over the whole sector.
    transformed: DVector<f64>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn l2(v: &[f64]) -> f64 {
    math::sqrt(v.iter().map(|x| x * x).sum())
}

/// Solves the CC equations with excitations up to `max_rank` out of the
/// sector reference (basis index 0).
pub fn solve_cc(
    h: &SectorMatrix,
    orbital_energies: &[f64],
    max_rank: usize,
    opts: &CcOptions,
) -> Result<CcSolution> {
    CcProblem::new(h, orbital_energies, max_rank, opts.denominator_floor)?.solve(opts, None)
}

/// Sector indices of determinants reachable from the reference by at most
/// `max_rank` excitations; a brute-force count for tests.
pub fn count_excited_determinants(basis: &SectorBasis, max_rank: usize) -> usize {
    let reference = basis.reference().bits();
    basis
        .dets()
        .iter()
        .filter(|d| {
            let level = (reference ^ d.bits()).count_ones() as usize / 2;
            (1..=max_rank).contains(&level)
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::enumerate_sector;
    use alloc::vec;

    #[test]
    fn signature_validation() {
        assert!(ExcitationSignature::new(vec![0], vec![2]).is_ok());
        assert!(ExcitationSignature::new(vec![0], vec![3]).is_err()); // spin flip
        assert!(ExcitationSignature::new(vec![0, 0], vec![2, 4]).is_err());
        assert!(ExcitationSignature::new(vec![0], vec![0]).is_err());
        assert!(ExcitationSignature::new(vec![], vec![]).is_err());
        let s = ExcitationSignature::new(vec![1, 0], vec![3, 2]).unwrap();
        assert_eq!(s.holes(), &[0, 1]);
        assert_eq!(
            s.ladder_string(),
            vec![
                Ladder::Create(2),
                Ladder::Create(3),
                Ladder::Annihilate(1),
                Ladder::Annihilate(0)
            ]
        );
    }

    #[test]
    fn manifold_counts() {
        let b = enumerate_sector(12, 3, 3).unwrap();
        assert!(enumerate_manifold(&b, 0).is_empty());
        for rank in 1..=6 {
            assert_eq!(
                enumerate_manifold(&b, rank).len(),
                count_excited_determinants(&b, rank)
            );
        }
        // singles: 2 * 3 * 3; doubles: 2 * C(3,2)^2 + 3^4
        assert_eq!(enumerate_manifold(&b, 1).len(), 18);
        assert_eq!(enumerate_manifold(&b, 2).len(), 18 + 18 + 81);
        assert_eq!(enumerate_manifold(&b, 6).len(), b.len() - 1);
        let m = enumerate_manifold(&b, 3);
        for w in m.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn partition_by_active_labels() {
        // H6, CAS {2,3,4,5} (1-based).
        let act = ActiveSpace::from_one_based(&[2, 3, 4, 5], 6).unwrap();
        let mut t = ClusterOperator::new(2);
        // 1 -> 6 double (alpha+beta), both labels inactive.
        let outer = ExcitationSignature::new(vec![0, 1], vec![10, 11]).unwrap();
        // 2,3 -> 4,5 (alpha 2 -> 4, alpha 3 -> 5).
        let inner = ExcitationSignature::new(vec![2, 4], vec![6, 8]).unwrap();
        t.insert(outer.clone(), 0.1).unwrap();
        t.insert(inner.clone(), 0.2).unwrap();
        let (t_int, t_ext) = partition_amplitudes(&t, &act, 6);
        assert_eq!(t_ext.get(&outer), Some(0.1));
        assert_eq!(t_int.get(&inner), Some(0.2));
        assert_eq!(t_int.len() + t_ext.len(), t.len());

        let all = ActiveSpace::new(&[0, 1, 2, 3, 4, 5], 6).unwrap();
        let (t_int, t_ext) = partition_amplitudes(&t, &all, 6);
        assert!(t_ext.is_empty());
        assert_eq!(t_int, t);

        assert!(ActiveSpace::new(&[], 6).is_err());
        assert!(ActiveSpace::from_one_based(&[9], 6).is_err());
    }

    #[test]
    fn cluster_rank_cap() {
        let mut t = ClusterOperator::new(1);
        let d = ExcitationSignature::new(vec![0, 1], vec![2, 3]).unwrap();
        assert!(t.insert(d, 0.1).is_err());
    }
}
