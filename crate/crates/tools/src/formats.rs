//! On-disk formats.
//!
//! Matrix binary (`.bin`, `.heff`), all little-endian:
//!
//! | offset | type        | field                         |
//! |--------|-------------|-------------------------------|
//! | 0      | u64         | spin orbitals M               |
//! | 8      | u64         | alpha electrons               |
//! | 16     | u64         | beta electrons                |
//! | 24     | u64         | dimension d                   |
//! | 32     | f64 x d*d   | matrix, row-major             |
//!
//! Effective Hamiltonians add a text sidecar (`<file>.txt`) with the active
//! orbitals and one determinant bitstring per row, highest spin orbital
//! first.
//!
//! Cluster amplitudes are text, one excitation per line:
//! `rank h1..hk p1..pk amplitude`, 0-based spin orbitals, amplitude with 17
//! significant digits.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use ducc_core::ccsolver::{ActiveSpace, ClusterOperator, ExcitationSignature};
use ducc_core::downfold::EffectiveHamiltonian;
use ducc_core::fockspace::{Determinant, SectorMatrix};
use ducc_core::DMatrix;
use thiserror::Error;

pub const HEADER_BYTES: usize = 32;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn malformed(path: &Path, message: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        path: path.display().to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixHeader {
    pub n_spin_orbitals: u64,
    pub n_alpha: u64,
    pub n_beta: u64,
    pub dim: u64,
}

pub fn encode_matrix(header: MatrixHeader, matrix: &DMatrix<f64>) -> Vec<u8> {
    let d = header.dim as usize;
    assert_eq!(
        (matrix.nrows(), matrix.ncols()),
        (d, d),
        "header dimension does not match the matrix"
    );
    let mut out = Vec::with_capacity(HEADER_BYTES + 8 * d * d);
    for field in [
        header.n_spin_orbitals,
        header.n_alpha,
        header.n_beta,
        header.dim,
    ] {
        out.extend_from_slice(&field.to_le_bytes());
    }
    for i in 0..d {
        for j in 0..d {
            out.extend_from_slice(&matrix[(i, j)].to_le_bytes());
        }
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<(MatrixHeader, DMatrix<f64>), String> {
    if bytes.len() < HEADER_BYTES {
        return Err(format!("{} bytes is shorter than the header", bytes.len()));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap());
    let header = MatrixHeader {
        n_spin_orbitals: word(0),
        n_alpha: word(1),
        n_beta: word(2),
        dim: word(3),
    };
    let d = usize::try_from(header.dim).map_err(|_| "dimension overflows")?;
    let expected = d
        .checked_mul(d)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER_BYTES))
        .ok_or("dimension overflows")?;
    if bytes.len() != expected {
        return Err(format!(
            "expected {expected} bytes for dimension {d}, found {}",
            bytes.len()
        ));
    }
    let payload = &bytes[HEADER_BYTES..];
    let matrix = DMatrix::from_fn(d, d, |i, j| {
        let k = 8 * (i * d + j);
        f64::from_le_bytes(payload[k..k + 8].try_into().unwrap())
    });
    Ok((header, matrix))
}

pub fn write_sector_matrix(m: &SectorMatrix, path: &Path) -> Result<(), FormatError> {
    let b = &m.basis;
    let header = MatrixHeader {
        n_spin_orbitals: b.n_spin_orbitals() as u64,
        n_alpha: b.n_alpha() as u64,
        n_beta: b.n_beta() as u64,
        dim: m.dim() as u64,
    };
    fs::write(path, encode_matrix(header, &m.data)).map_err(io_err(path))
}

pub fn read_matrix(path: &Path) -> Result<(MatrixHeader, DMatrix<f64>), FormatError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_matrix(&bytes).map_err(|m| malformed(path, m))
}

/// A reloaded effective Hamiltonian export.
#[derive(Debug, Clone)]
pub struct HeffFile {
    pub header: MatrixHeader,
    /// 1-based active orbitals.
    pub active: Vec<usize>,
    pub dets: Vec<Determinant>,
    pub matrix: DMatrix<f64>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".txt");
    PathBuf::from(name)
}

/// Writes the matrix to `path` and the sidecar next to it.
pub fn export_heff(
    heff: &EffectiveHamiltonian,
    n_alpha: usize,
    n_beta: usize,
    path: &Path,
) -> Result<(), FormatError> {
    let header = MatrixHeader {
        n_spin_orbitals: heff.n_spin_orbitals as u64,
        n_alpha: n_alpha as u64,
        n_beta: n_beta as u64,
        dim: heff.dim() as u64,
    };
    fs::write(path, encode_matrix(header, &heff.matrix)).map_err(io_err(path))?;
    let mut text = String::new();
    let active: Vec<String> = heff
        .active
        .one_based()
        .iter()
        .map(|k| k.to_string())
        .collect();
    writeln!(text, "active = {{{}}}", active.join(",")).unwrap();
    writeln!(text, "dim = {}", heff.dim()).unwrap();
    for det in &heff.cas_dets {
        writeln!(text, "{}", det.to_string_width(heff.n_spin_orbitals)).unwrap();
    }
    let side = sidecar_path(path);
    fs::write(&side, text).map_err(io_err(&side))
}

pub fn read_heff(path: &Path) -> Result<HeffFile, FormatError> {
    let (header, matrix) = read_matrix(path)?;
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(io_err(&side))?;
    let mut lines = text.lines();
    let active_line = lines
        .next()
        .ok_or_else(|| malformed(&side, "empty sidecar"))?;
    let active = active_line
        .strip_prefix("active = {")
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| malformed(&side, "first line must be `active = {...}`"))?
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| malformed(&side, format!("active orbitals: {e}")))?;
    let dim: u64 = lines
        .next()
        .and_then(|l| l.strip_prefix("dim = "))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| malformed(&side, "second line must be `dim = N`"))?;
    if dim != header.dim {
        return Err(malformed(
            &side,
            format!("sidecar dimension {dim} differs from matrix {}", header.dim),
        ));
    }
    let dets = lines
        .map(|l| {
            if l.len() != header.n_spin_orbitals as usize {
                return Err(malformed(
                    &side,
                    format!("bitstring `{l}` has the wrong width"),
                ));
            }
            u64::from_str_radix(l, 2)
                .map(Determinant)
                .map_err(|e| malformed(&side, format!("bitstring `{l}`: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if dets.len() as u64 != header.dim {
        return Err(malformed(
            &side,
            format!("{} determinants for dimension {}", dets.len(), header.dim),
        ));
    }
    Ok(HeffFile {
        header,
        active,
        dets,
        matrix,
    })
}

/// Reconstructs the active space of an export.
pub fn heff_active_space(file: &HeffFile) -> Result<ActiveSpace, ducc_core::Error> {
    ActiveSpace::from_one_based(&file.active, file.header.n_spin_orbitals as usize / 2)
}

pub fn format_cluster(t: &ClusterOperator) -> String {
    let mut out = String::new();
    writeln!(out, "# max_rank {}", t.max_rank()).unwrap();
    for (sig, amp) in t.iter() {
        write!(out, "{}", sig.rank()).unwrap();
        for i in sig.holes().iter().chain(sig.particles()) {
            write!(out, " {i}").unwrap();
        }
        writeln!(out, " {amp:.16e}").unwrap();
    }
    out
}

pub fn parse_cluster(text: &str) -> Result<ClusterOperator, String> {
    let mut lines = text.lines().enumerate();
    let max_rank = lines
        .next()
        .and_then(|(_, l)| l.strip_prefix("# max_rank "))
        .and_then(|v| v.trim().parse().ok())
        .ok_or("first line must be `# max_rank N`")?;
    let mut t = ClusterOperator::new(max_rank);
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let rank: usize = fields[0]
            .parse()
            .map_err(|_| format!("line {line_no}: bad rank"))?;
        if fields.len() != 2 * rank + 2 {
            return Err(format!(
                "line {line_no}: expected {} fields for rank {rank}",
                2 * rank + 2
            ));
        }
        let idx: Vec<usize> = fields[1..=2 * rank]
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("line {line_no}: bad orbital index"))?;
        let amp: f64 = fields[2 * rank + 1]
            .parse()
            .map_err(|_| format!("line {line_no}: bad amplitude"))?;
        let sig = ExcitationSignature::new(idx[..rank].to_vec(), idx[rank..].to_vec())
            .map_err(|e| format!("line {line_no}: {e}"))?;
        t.insert(sig, amp)
            .map_err(|e| format!("line {line_no}: {e}"))?;
    }
    Ok(t)
}

pub fn write_cluster(t: &ClusterOperator, path: &Path) -> Result<(), FormatError> {
    fs::write(path, format_cluster(t)).map_err(io_err(path))
}

pub fn read_cluster(path: &Path) -> Result<ClusterOperator, FormatError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_cluster(&text).map_err(|m| malformed(path, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let m = DMatrix::from_fn(5, 5, |i, j| (i as f64 + 0.1) / (j as f64 + 0.7) - 1e-300);
        let header = MatrixHeader {
            n_spin_orbitals: 12,
            n_alpha: 3,
            n_beta: 3,
            dim: 5,
        };
        let bytes = encode_matrix(header, &m);
        assert_eq!(bytes.len(), HEADER_BYTES + 25 * 8);
        // Row-major: the second stored value is (0, 1).
        assert_eq!(&bytes[40..48], &m[(0, 1)].to_le_bytes());
        let (h, back) = decode_matrix(&bytes).unwrap();
        assert_eq!(h, header);
        assert_eq!(back, m);
        assert!(decode_matrix(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_matrix(&bytes[..10]).is_err());
    }

    #[test]
    fn cluster_text_round_trip() {
        let mut t = ClusterOperator::new(4);
        t.insert(
            ExcitationSignature::new(vec![2], vec![6]).unwrap(),
            -1.234_567_890_123_456_7e-3,
        )
        .unwrap();
        t.insert(
            ExcitationSignature::new(vec![0, 5], vec![7, 8]).unwrap(),
            0.1 + 0.2,
        )
        .unwrap();
        t.insert(
            ExcitationSignature::new(vec![0, 1, 4, 5], vec![6, 7, 10, 11]).unwrap(),
            f64::MIN_POSITIVE,
        )
        .unwrap();
        let text = format_cluster(&t);
        assert!(text.contains("2 0 5 7 8 3.0000000000000004e-1"), "{text}");
        let back = parse_cluster(&text).unwrap();
        assert_eq!(back.max_rank(), 4);
        for (sig, amp) in t.iter() {
            assert_eq!(back.get(sig).unwrap().to_bits(), amp.to_bits());
        }
        assert_eq!(back.len(), t.len());
    }

    #[test]
    fn cluster_text_rejects_bad_lines() {
        assert!(parse_cluster("2 0 1 4 5 0.1\n").is_err());
        assert!(parse_cluster("# max_rank 2\n2 0 1 4 0.1\n").is_err());
        assert!(parse_cluster("# max_rank 2\n1 0 3 0.1\n").is_err());
        assert!(parse_cluster("# max_rank 1\n2 0 1 4 5 0.1\n").is_err());
    }
}
