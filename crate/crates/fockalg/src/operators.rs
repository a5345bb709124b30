//! Second-quantized operators on a truncated Fock basis.
//!
//! Every constructor returns a dense matrix over the given basis together
//! with two pieces of metadata: whether the operator is Hermitian and how it
//! moves sectors (`Shift(k)` maps total `n` into total `n + k` exactly,
//! `Mixed` means several shifts occur). Creation rows that would land above
//! the cutoff are truncated to zero, which is the uniform compression
//! semantics of the crate.
//!
//! Fermionic ladder operators use the ordering convention in which the sign
//! of mode `m` counts occupied modes strictly below `m`, so an ascending
//! product of creators applied to the vacuum carries coefficient `+1`.

use crate::error::{FockError, Result};
use crate::fock_core::{build_basis, BasisSignature, FockBasis, Statistics};
use crate::spectral::exp_hermitian;
use crate::{hermiticity_defect, max_abs, op_norm, C64, CMatrix, CVector};

const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// A vector in the one-particle space, as amplitudes over the modes.
pub type OneParticleVector = CVector;

/// A matrix on the one-particle space with verified structural flags.
/// The flags are claims checked at construction, not hints.
#[derive(Debug, Clone)]
pub struct OneParticleOperator {
    pub matrix: CMatrix,
    pub hermitian: bool,
    pub positive: bool,
    pub contraction: bool,
}

impl OneParticleOperator {
    /// Wrap a matrix with no structural claims.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(FockError::DimensionMismatch {
                rows: matrix.nrows(),
                cols: matrix.nrows(),
                got_rows: matrix.nrows(),
                got_cols: matrix.ncols(),
            });
        }
        Ok(Self {
            matrix,
            hermitian: false,
            positive: false,
            contraction: false,
        })
    }

    /// Wrap a matrix, verifying Hermiticity.
    pub fn hermitian(matrix: CMatrix) -> Result<Self> {
        let mut op = Self::from_matrix(matrix)?;
        let scale = max_abs(&op.matrix).max(1.0);
        let defect = hermiticity_defect(&op.matrix);
        if defect > 1e-12 * scale {
            return Err(FockError::NotHermitian { defect });
        }
        op.hermitian = true;
        Ok(op)
    }

    /// Wrap a Hermitian matrix, verifying positive semidefiniteness.
    pub fn positive(matrix: CMatrix) -> Result<Self> {
        let mut op = Self::hermitian(matrix)?;
        let eig = crate::spectral::eigh(&op.matrix)?;
        let min = eig.eigenvalues[0];
        let scale = op_norm(&op.matrix).max(1.0);
        if min < -1e-12 * scale {
            return Err(FockError::NotPositive {
                min_eigenvalue: min,
            });
        }
        op.positive = true;
        Ok(op)
    }

    /// Wrap a matrix, verifying it is a strict contraction.
    pub fn contraction(matrix: CMatrix) -> Result<Self> {
        let mut op = Self::from_matrix(matrix)?;
        let norm = op_norm(&op.matrix);
        if norm >= 1.0 {
            return Err(FockError::NotContraction { norm });
        }
        op.contraction = true;
        op.hermitian = hermiticity_defect(&op.matrix) <= 1e-12 * max_abs(&op.matrix).max(1.0);
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// How an operator moves occupation sectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorShift {
    /// Maps sector `n` into sector `n + k` exactly; all other blocks vanish.
    Shift(i64),
    /// A combination of several shifts.
    Mixed,
}

/// A dense operator over a truncated Fock basis.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub matrix: CMatrix,
    pub hermitian: bool,
    pub sector_shift: SectorShift,
    pub signature: BasisSignature,
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> FockOperator {
        let shift = match self.sector_shift {
            SectorShift::Shift(k) => SectorShift::Shift(-k),
            SectorShift::Mixed => SectorShift::Mixed,
        };
        FockOperator {
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
            sector_shift: shift,
            signature: self.signature,
        }
    }

    /// Operator product; the sector shifts add.
    pub fn compose(&self, other: &FockOperator) -> Result<FockOperator> {
        if self.signature != other.signature {
            return Err(FockError::BasisMismatch);
        }
        let shift = match (self.sector_shift, other.sector_shift) {
            (SectorShift::Shift(a), SectorShift::Shift(b)) => SectorShift::Shift(a + b),
            _ => SectorShift::Mixed,
        };
        Ok(FockOperator {
            matrix: &self.matrix * &other.matrix,
            hermitian: false,
            sector_shift: shift,
            signature: self.signature,
        })
    }
}

/// Check that the nonzero entries of `op` respect its declared sector shift.
pub fn sector_shift_is_exact(op: &FockOperator, basis: &FockBasis) -> bool {
    let k = match op.sector_shift {
        SectorShift::Shift(k) => k,
        SectorShift::Mixed => return true,
    };
    for (j, src) in basis.states.iter().enumerate() {
        for (i, dst) in basis.states.iter().enumerate() {
            if op.matrix[(i, j)].norm() != 0.0 && dst.total as i64 - src.total as i64 != k {
                return false;
            }
        }
    }
    true
}

fn check_vector(basis: &FockBasis, u: &OneParticleVector) -> Result<()> {
    if u.len() != basis.d {
        return Err(FockError::WrongLength {
            expected: basis.d,
            got: u.len(),
        });
    }
    Ok(())
}

fn check_one_particle(basis: &FockBasis, a: &CMatrix) -> Result<()> {
    if a.nrows() != basis.d || a.ncols() != basis.d {
        return Err(FockError::DimensionMismatch {
            rows: basis.d,
            cols: basis.d,
            got_rows: a.nrows(),
            got_cols: a.ncols(),
        });
    }
    Ok(())
}

/// Sign `(-1)^{n_1 + ... + n_{m-1}}` of the fermionic ladder convention.
fn jw_sign(occ: &[u32], mode: usize) -> f64 {
    let below: u32 = occ[..mode].iter().sum();
    if below % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Act with one creator on an occupation tuple. Returns the new tuple and
/// the real amplitude, or None when the Pauli principle forbids it.
/// The caller enforces the cutoff.
pub(crate) fn create_occ(
    statistics: Statistics,
    occ: &[u32],
    mode: usize,
) -> Option<(Vec<u32>, f64)> {
    match statistics {
        Statistics::Boson => {
            let mut next = occ.to_vec();
            next[mode] += 1;
            let amp = (next[mode] as f64).sqrt();
            Some((next, amp))
        }
        Statistics::Fermion => {
            if occ[mode] == 1 {
                return None;
            }
            let mut next = occ.to_vec();
            next[mode] = 1;
            Some((next, jw_sign(occ, mode)))
        }
    }
}

/// Act with one annihilator on an occupation tuple.
pub(crate) fn annihilate_occ(
    statistics: Statistics,
    occ: &[u32],
    mode: usize,
) -> Option<(Vec<u32>, f64)> {
    if occ[mode] == 0 {
        return None;
    }
    let mut next = occ.to_vec();
    next[mode] -= 1;
    let amp = match statistics {
        Statistics::Boson => (occ[mode] as f64).sqrt(),
        Statistics::Fermion => jw_sign(occ, mode),
    };
    Some((next, amp))
}

/// Creation operator `a*(u) = sum_m u_m a*(e_m)`, linear in `u`.
/// Rows above the cutoff are truncated to zero.
pub fn creation(basis: &FockBasis, u: &OneParticleVector) -> Result<FockOperator> {
    check_vector(basis, u)?;
    let dim = basis.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for (j, st) in basis.states.iter().enumerate() {
        if st.total as usize >= basis.n_max {
            continue;
        }
        for mode in 0..basis.d {
            if u[mode] == C64::new(0.0, 0.0) {
                continue;
            }
            if let Some((next, amp)) = create_occ(basis.statistics, &st.occupations, mode) {
                let i = basis
                    .state_index(&next)
                    .expect("creation target below cutoff is in the basis");
                m[(i, j)] += u[mode] * C64::new(amp, 0.0);
            }
        }
    }
    Ok(FockOperator {
        matrix: m,
        hermitian: false,
        sector_shift: SectorShift::Shift(1),
        signature: basis.signature(),
    })
}

/// Annihilation operator `a(u) = a*(u)^*`, antilinear in `u`.
pub fn annihilation(basis: &FockBasis, u: &OneParticleVector) -> Result<FockOperator> {
    Ok(creation(basis, u)?.adjoint())
}

/// Field operator `phi(u) = a(u) + a*(u)`; real linear in `u`, Hermitian.
pub fn field(basis: &FockBasis, u: &OneParticleVector) -> Result<FockOperator> {
    let c = creation(basis, u)?;
    let matrix = &c.matrix + c.matrix.adjoint();
    Ok(FockOperator {
        matrix,
        hermitian: true,
        sector_shift: SectorShift::Mixed,
        signature: basis.signature(),
    })
}

/// Conjugate field `pi(u) = phi(iu)`.
pub fn momentum(basis: &FockBasis, u: &OneParticleVector) -> Result<FockOperator> {
    field(basis, &(u * I))
}

/// The number operator, diagonal with the sector totals.
pub fn number_operator(basis: &FockBasis) -> FockOperator {
    let dim = basis.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for (i, st) in basis.states.iter().enumerate() {
        m[(i, i)] = C64::new(st.total as f64, 0.0);
    }
    FockOperator {
        matrix: m,
        hermitian: true,
        sector_shift: SectorShift::Shift(0),
        signature: basis.signature(),
    }
}

/// `theta(N)` for a sampled function: state of total `n` is scaled by
/// `samples[n]`. Needs at least `n_max + 1` samples.
pub fn number_function(basis: &FockBasis, samples: &[C64]) -> Result<FockOperator> {
    if samples.len() < basis.n_max + 1 {
        return Err(FockError::NotEnoughSamples {
            expected: basis.n_max + 1,
            got: samples.len(),
        });
    }
    let dim = basis.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for (i, st) in basis.states.iter().enumerate() {
        m[(i, i)] = samples[st.total as usize];
    }
    let hermitian = samples[..=basis.n_max].iter().all(|z| z.im == 0.0);
    Ok(FockOperator {
        matrix: m,
        hermitian,
        sector_shift: SectorShift::Shift(0),
        signature: basis.signature(),
    })
}

/// Parity operator `(-1)^N`.
pub fn parity(basis: &FockBasis) -> FockOperator {
    let samples: Vec<C64> = (0..=basis.n_max)
        .map(|n| C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    number_function(basis, &samples).expect("sample count matches cutoff")
}

/// Second quantization `Gamma(A)`: block diagonal, sector `n` carries the
/// restriction of the n-fold tensor power of `A` to the (anti)symmetric
/// subspace. Built by intertwining creators through the vacuum column by
/// column, which realizes exactly that restriction at every cutoff.
pub fn gamma(basis: &FockBasis, a: &CMatrix) -> Result<FockOperator> {
    check_one_particle(basis, a)?;
    let dim = basis.dim();
    // Creator of the image of each mode under A.
    let mut image_creators: Vec<Option<CMatrix>> = vec![None; basis.d];
    let mut m = CMatrix::zeros(dim, dim);
    for (j, st) in basis.states.iter().enumerate() {
        let mut v = basis.vacuum_vector();
        let mut norm2 = 1.0f64;
        // Ascending creator product applied to the vacuum, rightmost factor
        // first, so iterate the modes downward.
        for mode in (0..basis.d).rev() {
            let reps = st.occupations[mode];
            if reps == 0 {
                continue;
            }
            for k in 1..=reps {
                norm2 *= k as f64;
            }
            let cre = match &image_creators[mode] {
                Some(c) => c,
                None => {
                    let col = a.column(mode).into_owned();
                    image_creators[mode] = Some(creation(basis, &col)?.matrix);
                    image_creators[mode].as_ref().unwrap()
                }
            };
            for _ in 0..reps {
                v = cre * v;
            }
        }
        let scale = C64::new(1.0 / norm2.sqrt(), 0.0);
        m.set_column(j, &(v * scale));
    }
    let hermitian = hermiticity_defect(&m) <= 1e-12 * max_abs(&m).max(1.0);
    Ok(FockOperator {
        matrix: m,
        hermitian,
        sector_shift: SectorShift::Shift(0),
        signature: basis.signature(),
    })
}

/// Derivation lift `dGamma(A) = sum_{p,q} A_{pq} a*(e_p) a(e_q)`,
/// number conserving and exact at every cutoff.
pub fn dgamma(basis: &FockBasis, a: &CMatrix) -> Result<FockOperator> {
    check_one_particle(basis, a)?;
    let dim = basis.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for (j, st) in basis.states.iter().enumerate() {
        for q in 0..basis.d {
            let Some((mid, amp_q)) = annihilate_occ(basis.statistics, &st.occupations, q) else {
                continue;
            };
            for p in 0..basis.d {
                if a[(p, q)] == C64::new(0.0, 0.0) {
                    continue;
                }
                let Some((next, amp_p)) = create_occ(basis.statistics, &mid, p) else {
                    continue;
                };
                let i = basis
                    .state_index(&next)
                    .expect("number-conserving move stays in the basis");
                m[(i, j)] += a[(p, q)] * C64::new(amp_q * amp_p, 0.0);
            }
        }
    }
    let hermitian = hermiticity_defect(&m) <= 1e-12 * max_abs(&m).max(1.0);
    Ok(FockOperator {
        matrix: m,
        hermitian,
        sector_shift: SectorShift::Shift(0),
        signature: basis.signature(),
    })
}

/// Isometry from sector `n` of the occupation basis into the full n-fold
/// tensor power, with columns the normalized (anti)symmetrized monomials.
pub fn sector_tensor_isometry(basis: &FockBasis, n: usize) -> Result<CMatrix> {
    let range = basis.sector_range(n)?;
    let tensor_dim = basis.d.checked_pow(n as u32).filter(|&t| t <= 1 << 20).ok_or(
        FockError::InvalidParameter("tensor power dimension too large".into()),
    )?;
    if n == 0 {
        return Ok(CMatrix::identity(1, 1));
    }
    let mut iso = CMatrix::zeros(tensor_dim, range.len());
    for (col, idx) in range.clone().enumerate() {
        let st = &basis.states[idx];
        // Ascending mode word with multiplicities.
        let mut word = Vec::with_capacity(n);
        let mut mult_factorial = 1.0f64;
        for (mode, &occ) in st.occupations.iter().enumerate() {
            for k in 1..=occ {
                mult_factorial *= k as f64;
                word.push(mode);
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut acc = vec![C64::new(0.0, 0.0); tensor_dim];
        let fermion = basis.statistics == Statistics::Fermion;
        // Heap's algorithm over all n! index permutations, tracking parity.
        let mut c = vec![0usize; n];
        let mut sign = 1.0f64;
        let mut emit = |perm: &[usize], sign: f64| {
            let mut t = 0usize;
            for &slot in perm {
                t = t * basis.d + word[slot];
            }
            acc[t] += C64::new(if fermion { sign } else { 1.0 }, 0.0);
        };
        emit(&perm, sign);
        let mut i = 1;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                sign = -sign;
                emit(&perm, sign);
                c[i] += 1;
                i = 1;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        let factorial_n: f64 = (1..=n).map(|k| k as f64).product();
        let norm = (factorial_n * mult_factorial).sqrt();
        for (t, z) in acc.iter().enumerate() {
            iso[(t, col)] = z / C64::new(norm, 0.0);
        }
    }
    Ok(iso)
}

fn product_on_sector(basis: &FockBasis, factors: &[&CMatrix]) -> Result<FockOperator> {
    let n = factors.len();
    if n == 0 {
        return Err(FockError::EmptyInput("product needs at least one factor"));
    }
    for f in factors {
        check_one_particle(basis, f)?;
    }
    if n > basis.n_max {
        return Err(FockError::SectorOutOfRange {
            sector: n,
            n_max: basis.n_max,
        });
    }
    let iso = sector_tensor_isometry(basis, n)?;
    let mut tensor = factors[0].clone();
    for f in &factors[1..] {
        tensor = tensor.kronecker(f);
    }
    let block = iso.adjoint() * tensor * &iso;
    let dim = basis.dim();
    let range = basis.sector_range(n)?;
    let mut m = CMatrix::zeros(dim, dim);
    for (bi, i) in range.clone().enumerate() {
        for (bj, j) in range.clone().enumerate() {
            m[(i, j)] = block[(bi, bj)];
        }
    }
    let hermitian = hermiticity_defect(&m) <= 1e-12 * max_abs(&m).max(1.0);
    Ok(FockOperator {
        matrix: m,
        hermitian,
        sector_shift: SectorShift::Shift(0),
        signature: basis.signature(),
    })
}

/// Symmetrized operator product `A_1 v ... v A_n`, supported on sector `n`
/// of a bosonic basis: the compression of the tensor product of the factors
/// to the symmetric subspace.
pub fn vee_product(basis: &FockBasis, factors: &[&CMatrix]) -> Result<FockOperator> {
    if basis.statistics != Statistics::Boson {
        return Err(FockError::InvalidParameter(
            "vee_product needs a bosonic basis".into(),
        ));
    }
    product_on_sector(basis, factors)
}

/// Antisymmetrized operator product on sector `n` of a fermionic basis.
pub fn wedge_product(basis: &FockBasis, factors: &[&CMatrix]) -> Result<FockOperator> {
    if basis.statistics != Statistics::Fermion {
        return Err(FockError::InvalidParameter(
            "wedge_product needs a fermionic basis".into(),
        ));
    }
    product_on_sector(basis, factors)
}

/// Weyl operator `W(u) = exp(i phi(u))`, bosonic only. Exactly unitary for
/// the truncated field because the exponent is Hermitian.
pub fn weyl(basis: &FockBasis, u: &OneParticleVector) -> Result<FockOperator> {
    if basis.statistics != Statistics::Boson {
        return Err(FockError::WeylRequiresBosons);
    }
    let f = field(basis, u)?;
    let matrix = exp_hermitian(&f.matrix, I)?;
    Ok(FockOperator {
        matrix,
        hermitian: false,
        sector_shift: SectorShift::Mixed,
        signature: basis.signature(),
    })
}

/// The monomial vector `a*(u_1) ... a*(u_n) applied to the vacuum`.
pub fn monomial_vector(basis: &FockBasis, factors: &[&OneParticleVector]) -> Result<CVector> {
    let mut v = basis.vacuum_vector();
    for u in factors.iter().rev() {
        v = creation(basis, u)?.matrix * v;
    }
    Ok(v)
}

/// Unitary identification of the cutoff Fock space over all modes with the
/// admissible part of the tensor product of the Fock spaces over a mode
/// subset and its complement.
#[derive(Debug, Clone)]
pub struct TensorSplit {
    /// Isometry from the full basis into `basis_k ⊗ basis_kc`
    /// (Kronecker index `i_k * dim_kc + i_kc`).
    pub isometry: CMatrix,
    pub basis_k: FockBasis,
    pub basis_kc: FockBasis,
    pub modes_k: Vec<usize>,
    pub modes_kc: Vec<usize>,
}

impl TensorSplit {
    /// Projector onto the admissible pairs, `U U*`.
    pub fn image_projector(&self) -> CMatrix {
        &self.isometry * self.isometry.adjoint()
    }

    /// Conjugate a full-space operator into the split picture, `U M U*`.
    pub fn conjugate(&self, m: &CMatrix) -> CMatrix {
        &self.isometry * m * self.isometry.adjoint()
    }

    /// Restrict a one-particle vector to the coordinates of a mode list.
    pub fn restrict_vector(u: &OneParticleVector, modes: &[usize]) -> OneParticleVector {
        CVector::from_iterator(modes.len(), modes.iter().map(|&m| u[m]))
    }
}

/// Split the basis along a set of modes. The isometry maps each occupation
/// state to the pair of its restrictions; for fermions it carries the sign
/// of stably reordering the occupied modes into (subset, complement) order.
pub fn tensor_split(basis: &FockBasis, modes_k: &[usize]) -> Result<TensorSplit> {
    if modes_k.is_empty() {
        return Err(FockError::EmptyInput("mode subset must be nonempty"));
    }
    let mut k: Vec<usize> = modes_k.to_vec();
    k.sort_unstable();
    k.dedup();
    if k.len() != modes_k.len() {
        return Err(FockError::InvalidParameter(
            "mode subset contains duplicates".into(),
        ));
    }
    if let Some(&max) = k.last() {
        if max >= basis.d {
            return Err(FockError::ModeOutOfRange {
                mode: max,
                d: basis.d,
            });
        }
    }
    let kc: Vec<usize> = (0..basis.d).filter(|m| !k.contains(m)).collect();
    if kc.is_empty() {
        return Err(FockError::InvalidParameter(
            "mode subset complement must be nonempty".into(),
        ));
    }
    let cap = |len: usize| match basis.statistics {
        Statistics::Boson => basis.n_max,
        Statistics::Fermion => basis.n_max.min(len),
    };
    let basis_k = build_basis(k.len(), cap(k.len()), basis.statistics)?;
    let basis_kc = build_basis(kc.len(), cap(kc.len()), basis.statistics)?;
    let dim_kc = basis_kc.dim();
    let mut iso = CMatrix::zeros(basis_k.dim() * dim_kc, basis.dim());
    for (j, st) in basis.states.iter().enumerate() {
        let occ_k: Vec<u32> = k.iter().map(|&m| st.occupations[m]).collect();
        let occ_kc: Vec<u32> = kc.iter().map(|&m| st.occupations[m]).collect();
        let i_k = basis_k.state_index(&occ_k)?;
        let i_kc = basis_kc.state_index(&occ_kc)?;
        let sign = if basis.statistics == Statistics::Fermion {
            // Count occupied pairs (a in subset, b in complement) that the
            // stable reorder must move past each other.
            let mut inversions = 0u32;
            for &a in &k {
                if st.occupations[a] == 0 {
                    continue;
                }
                for &b in &kc {
                    if st.occupations[b] == 1 && b < a {
                        inversions += 1;
                    }
                }
            }
            if inversions % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        } else {
            1.0
        };
        iso[(i_k * dim_kc + i_kc, j)] = C64::new(sign, 0.0);
    }
    Ok(TensorSplit {
        isometry: iso,
        basis_k,
        basis_kc,
        modes_k: k,
        modes_kc: kc,
    })
}

/// The fermionic grading word, the product over all modes of
/// `phi(e_m) phi(i e_m)`. It exists as stated only on the untruncated space
/// (`n_max = d`); on a truncated space the compressed factors corrupt the
/// top sector, so that case is rejected.
pub fn grading(basis: &FockBasis) -> Result<FockOperator> {
    if basis.statistics != Statistics::Fermion {
        return Err(FockError::GradingRequiresFermions);
    }
    if basis.n_max < basis.d {
        return Err(FockError::GradingRequiresFullSpace {
            n_max: basis.n_max,
            d: basis.d,
        });
    }
    let dim = basis.dim();
    let mut w = CMatrix::identity(dim, dim);
    for mode in 0..basis.d {
        let mut e = CVector::zeros(basis.d);
        e[mode] = ONE;
        let f1 = field(basis, &e)?;
        let f2 = field(basis, &(e * I))?;
        w = w * f1.matrix * f2.matrix;
    }
    Ok(FockOperator {
        matrix: w,
        hermitian: false,
        sector_shift: SectorShift::Shift(0),
        signature: basis.signature(),
    })
}
