//! Occupation-number bases for truncated Fock spaces.
//!
//! A basis is indexed by all occupation tuples `(n_1, ..., n_d)` with total
//! at most `n_max` (and `n_i <= 1` for fermions). Enumeration is sector
//! major: all states of total 0, then total 1, and so on, with the vacuum at
//! index 0. Within a sector, states are ordered by occupation tuple with the
//! largest tuple first under lexicographic comparison, so `(2,0)` precedes
//! `(1,1)` precedes `(0,2)`. The enumeration is pure combinatorics and is
//! identical on every run.

use crate::error::{FockError, Result};
use crate::operators::{FockOperator, SectorShift};
use crate::{C64, CMatrix, CVector};
use std::collections::HashMap;

/// Exchange statistics of the particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Boson,
    Fermion,
}

/// A single occupation-number basis state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationState {
    pub occupations: Vec<u32>,
    pub total: u32,
}

/// Cheap identity token for a basis; operators carry one so that mixing
/// operators from different bases is caught instead of silently computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSignature {
    pub statistics: Statistics,
    pub d: usize,
    pub n_max: usize,
    pub dim: usize,
}

/// Truncated Fock space basis over `d` modes with total occupation at most
/// `n_max`.
#[derive(Debug, Clone)]
pub struct FockBasis {
    pub statistics: Statistics,
    pub d: usize,
    pub n_max: usize,
    pub states: Vec<OccupationState>,
    /// `sector_offsets[n]..sector_offsets[n+1]` indexes sector `n`;
    /// the vector has length `n_max + 2`.
    pub sector_offsets: Vec<usize>,
    index: HashMap<Vec<u32>, usize>,
}

/// Binomial coefficient as usize; saturates only far beyond any dimension
/// this crate can allocate.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

fn enumerate_sector(d: usize, n: u32, statistics: Statistics) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; d];
    fn rec(
        mode: usize,
        remaining: u32,
        d: usize,
        statistics: Statistics,
        current: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if mode == d {
            if remaining == 0 {
                out.push(current.clone());
            }
            return;
        }
        let cap = match statistics {
            Statistics::Boson => remaining,
            Statistics::Fermion => remaining.min(1),
        };
        // Largest occupation first gives the sector its descending
        // lexicographic order.
        for k in (0..=cap).rev() {
            current[mode] = k;
            rec(mode + 1, remaining - k, d, statistics, current, out);
        }
        current[mode] = 0;
    }
    rec(0, n, d, statistics, &mut current, &mut out);
    out
}

/// Number of states in sector `n`.
pub fn sector_dimension(d: usize, n: usize, statistics: Statistics) -> usize {
    match statistics {
        Statistics::Boson => binomial(n + d - 1, d - 1),
        Statistics::Fermion => binomial(d, n),
    }
}

/// Build the occupation basis. Rejects `d = 0` and fermionic cutoffs above
/// the mode count (those sectors would be empty anyway and every caller
/// that asks for them has a bug).
pub fn build_basis(d: usize, n_max: usize, statistics: Statistics) -> Result<FockBasis> {
    if d == 0 {
        return Err(FockError::ZeroModes);
    }
    if statistics == Statistics::Fermion && n_max > d {
        return Err(FockError::FermionCutoffExceedsModes { n_max, d });
    }
    let mut states = Vec::new();
    let mut sector_offsets = Vec::with_capacity(n_max + 2);
    for n in 0..=n_max {
        sector_offsets.push(states.len());
        for occ in enumerate_sector(d, n as u32, statistics) {
            states.push(OccupationState {
                total: occ.iter().sum(),
                occupations: occ,
            });
        }
    }
    sector_offsets.push(states.len());
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.occupations.clone(), i))
        .collect();
    Ok(FockBasis {
        statistics,
        d,
        n_max,
        states,
        sector_offsets,
        index,
    })
}

impl FockBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn signature(&self) -> BasisSignature {
        BasisSignature {
            statistics: self.statistics,
            d: self.d,
            n_max: self.n_max,
            dim: self.dim(),
        }
    }

    pub fn sector_range(&self, n: usize) -> Result<std::ops::Range<usize>> {
        if n > self.n_max {
            return Err(FockError::SectorOutOfRange {
                sector: n,
                n_max: self.n_max,
            });
        }
        Ok(self.sector_offsets[n]..self.sector_offsets[n + 1])
    }

    pub fn sector_dim(&self, n: usize) -> Result<usize> {
        Ok(self.sector_range(n)?.len())
    }

    /// Index of the state with the given occupations. Errors identify the
    /// offending mode where one exists.
    pub fn state_index(&self, occupations: &[u32]) -> Result<usize> {
        if occupations.len() != self.d {
            return Err(FockError::WrongLength {
                expected: self.d,
                got: occupations.len(),
            });
        }
        if self.statistics == Statistics::Fermion {
            if let Some(mode) = occupations.iter().position(|&n| n > 1) {
                return Err(FockError::FermionDoubleOccupancy { mode });
            }
        }
        let total: u32 = occupations.iter().sum();
        if total as usize > self.n_max {
            return Err(FockError::TotalExceedsCutoff {
                total,
                n_max: self.n_max,
            });
        }
        Ok(*self
            .index
            .get(occupations)
            .expect("validated occupation tuple must be enumerated"))
    }

    pub fn index_state(&self, index: usize) -> Result<&OccupationState> {
        self.states.get(index).ok_or(FockError::IndexOutOfRange {
            index,
            dim: self.dim(),
        })
    }

    /// The vacuum unit vector.
    pub fn vacuum_vector(&self) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[0] = C64::new(1.0, 0.0);
        v
    }
}

/// Which sector projector to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorKind {
    /// `1^n`: the states of total exactly `n`.
    Single(usize),
    /// `1_n`: the states of total at most `n`.
    Cumulative(usize),
}

/// Diagonal 0/1 projector onto a single sector or an initial run of sectors.
pub fn sector_projector(basis: &FockBasis, kind: SectorKind) -> Result<FockOperator> {
    let sector = match kind {
        SectorKind::Single(n) | SectorKind::Cumulative(n) => n,
    };
    if sector > basis.n_max {
        return Err(FockError::SectorOutOfRange {
            sector,
            n_max: basis.n_max,
        });
    }
    let mut m = CMatrix::zeros(basis.dim(), basis.dim());
    for (i, st) in basis.states.iter().enumerate() {
        let keep = match kind {
            SectorKind::Single(n) => st.total as usize == n,
            SectorKind::Cumulative(n) => st.total as usize <= n,
        };
        if keep {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
    }
    Ok(FockOperator {
        matrix: m,
        hermitian: true,
        sector_shift: SectorShift::Shift(0),
        signature: basis.signature(),
    })
}
