//! Occupation-number strings and ladder-operator action.

use core::fmt;

/// Slater determinant as an occupation bitstring: bit `p` is the occupation
/// of spin orbital `p` (0-based). Spin orbital `p = 2k + s` belongs to
/// spatial orbital `k` with spin `s` (0 = alpha, 1 = beta).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Determinant(pub u64);

impl Determinant {
    pub const VACUUM: Determinant = Determinant(0);

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_occupied(self, p: usize) -> bool {
        self.0 >> p & 1 == 1
    }

    #[inline]
    pub fn n_electrons(self) -> u32 {
        self.0.count_ones()
    }

    /// Number of occupied spin orbitals strictly below `p`.
    #[inline]
    pub fn occupied_below(self, p: usize) -> u32 {
        (self.0 & ((1u64 << p) - 1)).count_ones()
    }

    /// Alpha occupations packed as a spatial-orbital bitmask.
    pub fn alpha_string(self, n_spatial: usize) -> u64 {
        deinterleave(self.0, 0, n_spatial)
    }

    /// Beta occupations packed as a spatial-orbital bitmask.
    pub fn beta_string(self, n_spatial: usize) -> u64 {
        deinterleave(self.0, 1, n_spatial)
    }

    /// Determinant with the given alpha and beta spatial strings.
    pub fn from_strings(alpha: u64, beta: u64, n_spatial: usize) -> Determinant {
        let mut bits = 0u64;
        for k in 0..n_spatial {
            bits |= (alpha >> k & 1) << (2 * k);
            bits |= (beta >> k & 1) << (2 * k + 1);
        }
        Determinant(bits)
    }

    /// Indices of occupied spin orbitals, ascending.
    pub fn occupied(self) -> impl Iterator<Item = usize> {
        BitIter(self.0)
    }

    /// Occupation string printed as n_M ... n_1, highest orbital first.
    pub fn to_string_width(self, m: usize) -> alloc::string::String {
        (0..m)
            .rev()
            .map(|p| if self.is_occupied(p) { '1' } else { '0' })
            .collect()
    }
}

fn deinterleave(bits: u64, spin: usize, n_spatial: usize) -> u64 {
    let mut out = 0u64;
    for k in 0..n_spatial {
        out |= (bits >> (2 * k + spin) & 1) << k;
    }
    out
}

/// Iterator over set bit positions.
#[derive(Debug, Clone)]
pub struct BitIter(pub u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let p = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(p)
    }
}

impl fmt::Display for Determinant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{:b}>", self.0)
    }
}

/// Elementary fermionic operator on spin orbital `p` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

/// Applies a product of ladder operators, written left to right, to `det`.
///
/// Operators act right to left. Each step contributes the sign
/// (-1)^(number of occupied orbitals below the target). Returns `None`
/// when a step annihilates an empty orbital or creates on an occupied one.
pub fn apply_string(det: Determinant, ops: &[Ladder]) -> Option<(Determinant, i8)> {
    let mut bits = det.0;
    let mut parity = 0u32;
    for op in ops.iter().rev() {
        match *op {
            Ladder::Create(p) => {
                let mask = 1u64 << p;
                if bits & mask != 0 {
                    return None;
                }
                parity += (bits & (mask - 1)).count_ones();
                bits |= mask;
            }
            Ladder::Annihilate(p) => {
                let mask = 1u64 << p;
                if bits & mask == 0 {
                    return None;
                }
                parity += (bits & (mask - 1)).count_ones();
                bits &= !mask;
            }
        }
    }
    Some((
        Determinant(bits),
        if parity.is_multiple_of(2) { 1 } else { -1 },
    ))
}
