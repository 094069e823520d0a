//! Hydrogen-chain geometries and STO-3G integrals over s-type Gaussians.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::math::{self, PI};
use crate::{Error, Result};

/// STO-3G exponents for hydrogen (zeta = 1.24).
pub const STO3G_H_EXPONENTS: [f64; 3] = [3.425_250_91, 0.623_913_73, 0.168_855_40];
/// STO-3G contraction weights for normalized hydrogen s-primitives.
pub const STO3G_H_COEFFICIENTS: [f64; 3] = [0.154_328_97, 0.535_328_14, 0.444_634_54];

/// Nuclear framework in Bohr.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub centers: Vec<[f64; 3]>,
    pub charges: Vec<f64>,
}

impl Geometry {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Copy of the geometry shifted rigidly by `shift`.
    pub fn translated(&self, shift: [f64; 3]) -> Geometry {
        Geometry {
            centers: self
                .centers
                .iter()
                .map(|c| [c[0] + shift[0], c[1] + shift[1], c[2] + shift[2]])
                .collect(),
            charges: self.charges.clone(),
        }
    }

    /// Nuclear repulsion energy, sum over pairs of Z_a Z_b / r_ab.
    pub fn nuclear_repulsion(&self) -> Result<f64> {
        let mut e = 0.0;
        for a in 0..self.len() {
            for b in 0..a {
                let r = math::sqrt(dist2(&self.centers[a], &self.centers[b]));
                if r < 1e-10 {
                    return Err(Error::invalid(format!("centers {b} and {a} coincide")));
                }
                e += self.charges[a] * self.charges[b] / r;
            }
        }
        Ok(e)
    }
}

/// `n_atoms` hydrogens on the z axis at z = k * spacing.
pub fn build_chain(n_atoms: usize, spacing: f64) -> Result<Geometry> {
    if n_atoms < 2 {
        return Err(Error::invalid(format!(
            "a chain needs at least two atoms, got {n_atoms}"
        )));
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::invalid(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    Ok(Geometry {
        centers: (0..n_atoms)
            .map(|k| [0.0, 0.0, k as f64 * spacing])
            .collect(),
        charges: vec![1.0; n_atoms],
    })
}

/// Contracted s-type Gaussian. Coefficients multiply individually
/// normalized primitives; the contraction is renormalized to unit
/// self-overlap when integrals are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedGaussian {
    pub center: [f64; 3],
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
}

impl ContractedGaussian {
    pub fn new(center: [f64; 3], exponents: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if exponents.len() != coefficients.len() || exponents.is_empty() {
            return Err(Error::invalid(
                "exponent and coefficient lists must be non-empty and of equal length",
            ));
        }
        if exponents.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::invalid("Gaussian exponents must be positive"));
        }
        Ok(ContractedGaussian {
            center,
            exponents,
            coefficients,
        })
    }

    /// Hydrogen STO-3G function at `center`.
    pub fn sto3g_hydrogen(center: [f64; 3]) -> Self {
        ContractedGaussian {
            center,
            exponents: STO3G_H_EXPONENTS.to_vec(),
            coefficients: STO3G_H_COEFFICIENTS.to_vec(),
        }
    }

    /// Primitive list as (exponent, effective weight) with primitive and
    /// contraction normalization folded in.
    fn primitives(&self) -> Vec<(f64, f64)> {
        let raw: Vec<(f64, f64)> = self
            .exponents
            .iter()
            .zip(&self.coefficients)
            .map(|(&a, &c)| (a, c * primitive_norm(a)))
            .collect();
        let mut self_overlap = 0.0;
        for &(a, ca) in &raw {
            for &(b, cb) in &raw {
                self_overlap += ca * cb * math::sqrt(math::powi(PI / (a + b), 3));
            }
        }
        let scale = 1.0 / math::sqrt(self_overlap);
        raw.into_iter().map(|(a, c)| (a, c * scale)).collect()
    }
}

/// STO-3G basis for every center of `geom`.
pub fn sto3g_basis(geom: &Geometry) -> Vec<ContractedGaussian> {
    geom.centers
        .iter()
        .map(|&c| ContractedGaussian::sto3g_hydrogen(c))
        .collect()
}

fn primitive_norm(a: f64) -> f64 {
    // (2a/pi)^{3/4}
    let base = 2.0 * a / PI;
    math::sqrt(base * math::sqrt(base))
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Boys function F_m(x) = \int_0^1 t^{2m} exp(-x t^2) dt.
///
/// Uses the convergent series below x = 35 and the large-x asymptote
/// above it, where the neglected term is O(exp(-x)).
pub fn boys(m: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::invalid(format!(
            "Boys argument must be non-negative, got {x}"
        )));
    }
    Ok(boys_unchecked(m, x))
}

/// F_0..=F_{m_max} at the same argument, filled by downward recursion
/// from the top order.
pub fn boys_table(m_max: u32, x: f64) -> Result<Vec<f64>> {
    let top = boys(m_max, x)?;
    let mut out = vec![0.0; m_max as usize + 1];
    out[m_max as usize] = top;
    let ex = math::exp(-x);
    for m in (0..m_max).rev() {
        out[m as usize] = (2.0 * x * out[m as usize + 1] + ex) / (2 * m + 1) as f64;
    }
    Ok(out)
}

fn boys_unchecked(m: u32, x: f64) -> f64 {
    if x < 35.0 {
        // F_m(x) = exp(-x) * sum_k (2x)^k / ((2m+1)(2m+3)...(2m+2k+1))
        let mut term = 1.0 / (2 * m + 1) as f64;
        let mut sum = term;
        let mut k = 1u32;
        loop {
            term *= 2.0 * x / (2 * m + 2 * k + 1) as f64;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1;
        }
        math::exp(-x) * sum
    } else {
        // (2m-1)!! / 2^{m+1} * sqrt(pi / x^{2m+1})
        let mut dfact = 1.0;
        let mut k = 2 * m as i64 - 1;
        while k > 1 {
            dfact *= k as f64;
            k -= 2;
        }
        dfact / math::powi(2.0, m as i32 + 1) * math::sqrt(PI / math::powi(x, 2 * m as i32 + 1))
    }
}

/// One- and two-electron integrals over the AO basis.
#[derive(Debug, Clone)]
pub struct IntegralTables {
    pub overlap: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    pub nuclear: DMatrix<f64>,
    /// Chemists' notation (pq|rs), flattened as ((p*n + q)*n + r)*n + s.
    pub eri: Vec<f64>,
    pub nuclear_repulsion: f64,
}

impl IntegralTables {
    pub fn n_basis(&self) -> usize {
        self.overlap.nrows()
    }

    #[inline]
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_basis();
        self.eri[((p * n + q) * n + r) * n + s]
    }

    /// Core Hamiltonian T + V.
    pub fn core_hamiltonian(&self) -> DMatrix<f64> {
        &self.kinetic + &self.nuclear
    }
}

/// Overlap, kinetic, nuclear-attraction and repulsion integrals for an
/// s-only basis on `geom`.
pub fn compute_integrals(geom: &Geometry, basis: &[ContractedGaussian]) -> Result<IntegralTables> {
    let e_nn = geom.nuclear_repulsion()?;
    let n = basis.len();
    let prims: Vec<Vec<(f64, f64)>> = basis.iter().map(|b| b.primitives()).collect();

    let mut overlap = DMatrix::zeros(n, n);
    let mut kinetic = DMatrix::zeros(n, n);
    let mut nuclear = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let (s, t, v) = one_electron(
                &basis[i].center,
                &prims[i],
                &basis[j].center,
                &prims[j],
                geom,
            );
            overlap[(i, j)] = s;
            overlap[(j, i)] = s;
            kinetic[(i, j)] = t;
            kinetic[(j, i)] = t;
            nuclear[(i, j)] = v;
            nuclear[(j, i)] = v;
        }
    }

    let mut eri = vec![0.0; n * n * n * n];
    let idx = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if p * (p + 1) / 2 + q < r * (r + 1) / 2 + s {
                        continue;
                    }
                    let val = two_electron(
                        (&basis[p].center, &prims[p]),
                        (&basis[q].center, &prims[q]),
                        (&basis[r].center, &prims[r]),
                        (&basis[s].center, &prims[s]),
                    );
                    for &(a, b, c, d) in &[
                        (p, q, r, s),
                        (q, p, r, s),
                        (p, q, s, r),
                        (q, p, s, r),
                        (r, s, p, q),
                        (s, r, p, q),
                        (r, s, q, p),
                        (s, r, q, p),
                    ] {
                        eri[idx(a, b, c, d)] = val;
                    }
                }
            }
        }
    }

    Ok(IntegralTables {
        overlap,
        kinetic,
        nuclear,
        eri,
        nuclear_repulsion: e_nn,
    })
}

fn one_electron(
    ca: &[f64; 3],
    pa: &[(f64, f64)],
    cb: &[f64; 3],
    pb: &[(f64, f64)],
    geom: &Geometry,
) -> (f64, f64, f64) {
    let ab2 = dist2(ca, cb);
    let (mut s, mut t, mut v) = (0.0, 0.0, 0.0);
    for &(a, wa) in pa {
        for &(b, wb) in pb {
            let p = a + b;
            let mu = a * b / p;
            let k = math::exp(-mu * ab2);
            let s_ab = math::sqrt(math::powi(PI / p, 3)) * k;
            let w = wa * wb;
            s += w * s_ab;
            t += w * mu * (3.0 - 2.0 * mu * ab2) * s_ab;
            let centre = gaussian_product(a, ca, b, cb);
            let mut vn = 0.0;
            for (c, &z) in geom.centers.iter().zip(&geom.charges) {
                vn -= z * boys_unchecked(0, p * dist2(&centre, c));
            }
            v += w * 2.0 * PI / p * k * vn;
        }
    }
    (s, t, v)
}

fn two_electron(
    (ca, pa): (&[f64; 3], &[(f64, f64)]),
    (cb, pb): (&[f64; 3], &[(f64, f64)]),
    (cc, pc): (&[f64; 3], &[(f64, f64)]),
    (cd, pd): (&[f64; 3], &[(f64, f64)]),
) -> f64 {
    let ab2 = dist2(ca, cb);
    let cd2 = dist2(cc, cd);
    let mut total = 0.0;
    for &(a, wa) in pa {
        for &(b, wb) in pb {
            let p = a + b;
            let kab = math::exp(-a * b / p * ab2);
            let pp = gaussian_product(a, ca, b, cb);
            for &(c, wc) in pc {
                for &(d, wd) in pd {
                    let q = c + d;
                    let kcd = math::exp(-c * d / q * cd2);
                    let qq = gaussian_product(c, cc, d, cd);
                    let rho = p * q / (p + q);
                    let pref =
                        2.0 * math::powi(PI, 2) * math::sqrt(PI) / (p * q * math::sqrt(p + q));
                    total += wa
                        * wb
                        * wc
                        * wd
                        * pref
                        * kab
                        * kcd
                        * boys_unchecked(0, rho * dist2(&pp, &qq));
                }
            }
        }
    }
    total
}

fn gaussian_product(a: f64, ca: &[f64; 3], b: f64, cb: &[f64; 3]) -> [f64; 3] {
    let p = a + b;
    [
        (a * ca[0] + b * cb[0]) / p,
        (a * ca[1] + b * cb[1]) / p,
        (a * ca[2] + b * cb[2]) / p,
    ]
}

/// erf-based closed form of F_0, used by tests as a cross-check.
pub fn boys0_closed_form(x: f64) -> f64 {
    if x < 1e-12 {
        return 1.0 - x / 3.0;
    }
    0.5 * math::sqrt(PI / x) * math::erf(math::sqrt(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Composite Simpson quadrature of the defining Boys integral.
    fn boys_quadrature(m: u32, x: f64) -> f64 {
        let n = 20_000;
        let h = 1.0 / n as f64;
        let f = |t: f64| t.powi(2 * m as i32) * (-x * t * t).exp();
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            let t = i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t);
        }
        s * h / 3.0
    }

    #[test]
    fn chain_positions() {
        let g = build_chain(6, 2.0).unwrap();
        let z: Vec<f64> = g.centers.iter().map(|c| c[2]).collect();
        assert_eq!(z, vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        let g = build_chain(8, 3.0).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.centers[7][2], 21.0);
        assert!(build_chain(4, 0.0).is_err());
        assert!(build_chain(4, -1.0).is_err());
        assert!(build_chain(1, 1.0).is_err());
    }

    #[test]
    fn boys_values() {
        assert_eq!(boys(0, 0.0).unwrap(), 1.0);
        for m in 0..8 {
            assert_abs_diff_eq!(
                boys(m, 0.0).unwrap(),
                1.0 / (2 * m + 1) as f64,
                epsilon = 1e-15
            );
        }
        let closed = 0.5 * PI.sqrt() * libm::erf(1.0);
        assert_abs_diff_eq!(boys(0, 1.0).unwrap(), closed, epsilon = 1e-14);
        for &x in &[1e-6, 0.3, 1.0, 4.7, 12.0, 30.0, 34.9, 35.1, 60.0] {
            for m in 0..5 {
                let q = boys_quadrature(m, x);
                assert_abs_diff_eq!(boys(m, x).unwrap(), q, epsilon = 1e-12);
            }
            assert_abs_diff_eq!(boys(0, x).unwrap(), boys0_closed_form(x), epsilon = 1e-13);
        }
        assert!(boys(0, -0.1).is_err());
    }

    #[test]
    fn boys_recursion_matches_direct() {
        for &x in &[0.0, 0.5, 7.0, 33.0, 50.0] {
            let table = boys_table(6, x).unwrap();
            for (m, v) in table.iter().enumerate() {
                assert_abs_diff_eq!(*v, boys(m as u32, x).unwrap(), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn coincident_centers_rejected() {
        let g = Geometry {
            centers: vec![[0.0; 3], [0.0; 3]],
            charges: vec![1.0, 1.0],
        };
        let basis = sto3g_basis(&g);
        assert!(matches!(
            compute_integrals(&g, &basis),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn contraction_validation() {
        assert!(ContractedGaussian::new([0.0; 3], vec![1.0, -2.0], vec![0.5, 0.5]).is_err());
        assert!(ContractedGaussian::new([0.0; 3], vec![1.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn h2_reference_integrals() {
        // Szabo & Ostlund, Table 3.5 / Appendix B (STO-3G H2, R = 1.4 bohr).
        let g = build_chain(2, 1.4).unwrap();
        let ints = compute_integrals(&g, &sto3g_basis(&g)).unwrap();
        assert_abs_diff_eq!(ints.overlap[(0, 1)], 0.6593, epsilon = 1e-4);
        assert_abs_diff_eq!(ints.kinetic[(0, 0)], 0.7600, epsilon = 1e-4);
        assert_abs_diff_eq!(ints.kinetic[(0, 1)], 0.2365, epsilon = 1e-4);
        let hcore = ints.core_hamiltonian();
        assert_abs_diff_eq!(hcore[(0, 0)], -1.1204, epsilon = 1e-4);
        assert_abs_diff_eq!(hcore[(0, 1)], -0.9584, epsilon = 1e-4);
        assert_abs_diff_eq!(ints.eri(0, 0, 0, 0), 0.7746, epsilon = 1e-4);
        assert_abs_diff_eq!(ints.eri(0, 0, 1, 1), 0.5697, epsilon = 1e-4);
        assert_abs_diff_eq!(ints.eri(1, 0, 0, 0), 0.4441, epsilon = 1e-4);
        assert_abs_diff_eq!(ints.eri(1, 0, 1, 0), 0.2970, epsilon = 1e-4);
        assert_abs_diff_eq!(ints.nuclear_repulsion, 1.0 / 1.4, epsilon = 1e-15);
    }
}
