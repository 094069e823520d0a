//! Quick invariant checks on H2 and H4, run by `ducc selftest`.

use std::sync::Arc;

use ducc_core::ccsolver::{partition_amplitudes, solve_cc, ActiveSpace, CcOptions};
use ducc_core::downfold::{
    build_sigma_ext, build_sigma_ext_sparse, downfold_bch, downfold_exact, ground_state,
    transform_exact,
};
use ducc_core::fockspace::full_space::string_matrix;
use ducc_core::fockspace::{
    enumerate_sector, exp_antisymmetric, lower_hamiltonian, Ladder, EXP_TOL,
};
use ducc_core::linalg::{self, lowest_eigenpair};
use ducc_core::molint::{build_chain, compute_integrals, sto3g_basis};
use ducc_core::pds::{compute_moments_dense, pds_energy};
use ducc_core::scf::{run_rhf, to_spin_orbitals, ScfOptions};
use ducc_core::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, deviation: f64, tol: f64) -> Check {
    Check {
        name: name.into(),
        passed: deviation.is_finite() && deviation <= tol,
        detail: format!("deviation {deviation:.2e} (tol {tol:.0e})"),
    }
}

fn failure(name: impl Into<String>, err: impl std::fmt::Display) -> Check {
    Check {
        name: name.into(),
        passed: false,
        detail: err.to_string(),
    }
}

/// Runs all checks; none of them panics.
pub fn run_selftest() -> Vec<Check> {
    let mut out = vec![anticommutation_check()];
    for (n, r) in [(2usize, 1.4), (4, 2.0), (4, 3.0)] {
        match chain_checks(n, r) {
            Ok(mut checks) => out.append(&mut checks),
            Err(e) => out.push(failure(format!("H{n} R={r:.1} setup"), e)),
        }
    }
    out.push(pds_shift_check());
    out
}

fn chain_checks(n: usize, r: f64) -> ducc_core::Result<Vec<Check>> {
    let tag = format!("H{n} R={r:.1}");
    let geom = build_chain(n, r)?;
    let ints = compute_integrals(&geom, &sto3g_basis(&geom))?;
    let mos = run_rhf(&ints, n, &ScfOptions::default())?;
    let ham = to_spin_orbitals(&ints, &mos)?;
    let basis = Arc::new(enumerate_sector(2 * n, n / 2, n / 2)?);
    let h = lower_hamiltonian(&ham, &basis)?;
    let (e_fci, _) = lowest_eigenpair(&h.data, 1e-10, 1000)?;
    let mut out = Vec::new();

    out.push(check(
        format!("{tag} reference energy equals RHF"),
        (h.data[(0, 0)] - mos.total_energy).abs(),
        1e-9,
    ));

    let opts = CcOptions::default();
    let full = solve_cc(&h, &ham.orbital_energies, n.min(4), &opts)?;
    out.push(check(
        format!("{tag} full-rank CC equals FCI"),
        (full.energy - e_fci).abs(),
        1e-9,
    ));

    let act = ActiveSpace::from_one_based(&[n / 2, n / 2 + 1], n)?;
    let cc = solve_cc(&h, &ham.orbital_energies, 2, &opts)?;
    let (_, t_ext) = partition_amplitudes(&cc.amplitudes, &act, n);
    let sigma = build_sigma_ext(&t_ext, &basis, &act)?;
    let u = exp_antisymmetric(&sigma, EXP_TOL)?;
    let id = DMatrix::identity(basis.len(), basis.len());
    out.push(check(
        format!("{tag} exp(sigma) orthogonal"),
        linalg::max_abs(&(u.data.transpose() * &u.data - id)),
        1e-10,
    ));
    let hbar = transform_exact(&h, &sigma)?;
    let before = linalg::symmetric_eigenvalues(&h.data);
    let after = linalg::symmetric_eigenvalues(&hbar.data);
    let spread = before
        .iter()
        .zip(&after)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    out.push(check(format!("{tag} transform isospectral"), spread, 1e-9));

    let sparse = build_sigma_ext_sparse(&t_ext, &basis, &act)?;
    let exact = ground_state(&downfold_exact(&h, &sparse, &act)?).energy;
    out.push(check(
        format!("{tag} downfolded energy above FCI"),
        (e_fci - exact).max(0.0),
        1e-10,
    ));
    let series = downfold_bch(&h, &sparse, &act, &[30])?;
    out.push(check(
        format!("{tag} long commutator series matches exact"),
        (ground_state(&series[0]).energy - exact).abs(),
        1e-8,
    ));
    Ok(out)
}

/// {a_p, a+_q} = delta_pq and {a_p, a_q} = 0 on the full Fock space, M <= 6.
fn anticommutation_check() -> Check {
    let mut worst: f64 = 0.0;
    for m in 1..=6 {
        let dim = 1 << m;
        let create: Vec<_> = (0..m)
            .map(|p| string_matrix(m, &[Ladder::Create(p)]))
            .collect();
        let annihilate: Vec<_> = (0..m)
            .map(|p| string_matrix(m, &[Ladder::Annihilate(p)]))
            .collect();
        for p in 0..m {
            for q in 0..m {
                let delta = if p == q { 1.0 } else { 0.0 };
                let mixed = &annihilate[p] * &create[q] + &create[q] * &annihilate[p]
                    - DMatrix::identity(dim, dim) * delta;
                let pair = &annihilate[p] * &annihilate[q] + &annihilate[q] * &annihilate[p];
                worst = worst
                    .max(linalg::max_abs(&mixed))
                    .max(linalg::max_abs(&pair));
            }
        }
    }
    check("canonical anticommutation, M <= 6", worst, 0.0)
}

fn pds_shift_check() -> Check {
    let name = "PDS shift covariance";
    let h = DMatrix::from_fn(8, 8, |i, j| {
        if i == j {
            -1.0 + 0.3 * i as f64
        } else {
            0.04 / (1.0 + (i as f64 - j as f64).abs())
        }
    });
    let phi = DVector::from_fn(8, |i, _| 1.0 / (1.0 + i as f64)).normalize();
    let shifted = &h + DMatrix::identity(8, 8) * 1.25;
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        let a = compute_moments_dense(&h, &phi, k).and_then(|m| pds_energy(&m));
        let b = compute_moments_dense(&shifted, &phi, k).and_then(|m| pds_energy(&m));
        match (a, b) {
            (Ok(a), Ok(b)) => worst = worst.max((b.energy - a.energy - 1.25).abs()),
            (Err(e), _) | (_, Err(e)) => return failure(name, e),
        }
    }
    check(name, worst, 1e-9)
}
