//! Hermitian diagonalization, spectrum-set arithmetic, and the operational
//! essential-spectrum computations for cutoff field Hamiltonians.
//!
//! A finite matrix has no essential spectrum, so the essential spectrum is
//! computed operationally: it is the spectrum of the descended model, the
//! Minkowski sum of the one-particle spectrum with the spectrum one cutoff
//! level down. The direct-diagonalization side enters only through the
//! invariant-subspace witness of `morphism_spectrum_check`.

use crate::error::{FockError, Result};
use crate::fock_core::{build_basis, Statistics};
use crate::hamiltonians::{build_qfh, descend, InteractionSpec, QfhSpec};
use crate::operators::FockOperator;
use crate::{hermiticity_defect, max_abs, C64, CMatrix};

/// Eigendecomposition of a Hermitian matrix with verified quality bounds.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvector columns, aligned with `eigenvalues`; each
    /// column's largest-modulus entry is rotated to the positive real axis
    /// so repeated runs produce identical output.
    pub eigenvectors: CMatrix,
    /// Largest residual norm `max_k |H v_k - lambda_k v_k|`.
    pub residual: f64,
}

/// Diagonalize a Hermitian matrix. The input is verified Hermitian, the
/// output is verified against residual and orthonormality bounds.
pub fn eigh(m: &CMatrix) -> Result<SpectralDecomposition> {
    if m.nrows() != m.ncols() {
        return Err(FockError::DimensionMismatch {
            rows: m.nrows(),
            cols: m.nrows(),
            got_rows: m.nrows(),
            got_cols: m.ncols(),
        });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
            residual: 0.0,
        });
    }
    let scale = max_abs(m).max(1.0);
    let defect = hermiticity_defect(m);
    if defect > 1e-10 * scale {
        return Err(FockError::NotHermitian { defect });
    }
    // Symmetrize away floating-point noise so the solver sees an exactly
    // Hermitian matrix.
    let hm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    // Fast path: the dense symmetric QR solver. Its iteration can stall or
    // converge sloppily on some matrices (large degenerate clusters, and
    // occasionally generic dense input around dimension 100), so the result
    // is packaged and quality-checked, and on failure the solve is redone
    // with cyclic Jacobi rotations, which converge unconditionally. Both
    // paths are deterministic.
    let eig = nalgebra::linalg::SymmetricEigen::new(hm.clone());
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if let Ok(dec) = package(&hm, values, eig.eigenvectors) {
        return Ok(dec);
    }
    let (values, vectors) = jacobi_hermitian(&hm);
    package(&hm, values, vectors)
}

/// Sort an eigensystem, fix column phases deterministically, and verify it
/// against the matrix it claims to diagonalize.
fn package(
    hm: &CMatrix,
    raw_values: Vec<f64>,
    raw_vectors: CMatrix,
) -> Result<SpectralDecomposition> {
    let n = hm.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        raw_values[a]
            .partial_cmp(&raw_values[b])
            .expect("finite eigenvalues")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| raw_values[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &raw_vectors.column(src));
    }
    for k in 0..n {
        let mut col = eigenvectors.column(k).into_owned();
        // Deterministic phase: rotate the first largest-modulus entry onto
        // the positive real axis.
        let mut best = 0usize;
        let mut best_mod = 0.0f64;
        for (i, z) in col.iter().enumerate() {
            let m = z.norm();
            if m > best_mod {
                best_mod = m;
                best = i;
            }
        }
        if best_mod > 0.0 {
            let z = col[best];
            col *= z.conj() / C64::new(z.norm(), 0.0);
        }
        eigenvectors.set_column(k, &col);
    }
    let spread = eigenvalues
        .first()
        .map(|lo| lo.abs().max(eigenvalues.last().unwrap().abs()))
        .unwrap_or(0.0);
    let mut diag = CMatrix::zeros(n, n);
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        diag[(k, k)] = C64::new(lambda, 0.0);
    }
    let residual_matrix = hm * &eigenvectors - &eigenvectors * diag;
    let residual = (0..n)
        .map(|k| residual_matrix.column(k).norm())
        .fold(0.0f64, f64::max);
    let bound = 1e-9 * spread.max(1.0);
    if residual > bound {
        return Err(FockError::EigenFailure { residual, bound });
    }
    let gram_defect =
        max_abs(&(eigenvectors.adjoint() * &eigenvectors - CMatrix::identity(n, n)));
    if gram_defect > 1e-10 {
        return Err(FockError::EigenFailure {
            residual: gram_defect,
            bound: 1e-10,
        });
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        residual,
    })
}

/// Cyclic Jacobi eigensolver for a Hermitian matrix. Each rotation zeroes
/// one off-diagonal pair exactly; the off-diagonal mass is monotonically
/// nonincreasing, so the sweep loop always terminates with the matrix
/// numerically diagonal. Slower than the QR path but unconditionally
/// convergent, it serves as the verified fallback.
fn jacobi_hermitian(hm: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = hm.nrows();
    let mut a = hm.clone();
    let mut v = CMatrix::identity(n, n);
    let fro = a
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let target = 1e-15 * fro;
    let skip = 1e-18 * fro;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let abs_b = b.norm();
                if abs_b <= skip {
                    continue;
                }
                // Unitary U on the (p, q) plane: a diagonal phase absorbing
                // arg(b) followed by the classical rotation with the stable
                // (smaller) tangent root.
                let w = b.conj() / C64::new(abs_b, 0.0);
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * abs_b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u00 = C64::new(c, 0.0);
                let u01 = C64::new(s, 0.0);
                let u10 = -C64::new(s, 0.0) * w;
                let u11 = C64::new(c, 0.0) * w;
                for i in 0..n {
                    let tp = a[(i, p)];
                    let tq = a[(i, q)];
                    a[(i, p)] = tp * u00 + tq * u10;
                    a[(i, q)] = tp * u01 + tq * u11;
                }
                for i in 0..n {
                    let tp = a[(p, i)];
                    let tq = a[(q, i)];
                    a[(p, i)] = u00.conj() * tp + u10.conj() * tq;
                    a[(q, i)] = u01.conj() * tp + u11.conj() * tq;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for i in 0..n {
                    let tp = v[(i, p)];
                    let tq = v[(i, q)];
                    v[(i, p)] = tp * u00 + tq * u10;
                    v[(i, q)] = tp * u01 + tq * u11;
                }
            }
        }
    }
    let values = (0..n).map(|k| a[(k, k)].re).collect();
    (values, v)
}

/// Diagonalize an operator whose Hermitian flag is set.
pub fn eigh_operator(op: &FockOperator) -> Result<SpectralDecomposition> {
    if !op.hermitian {
        return Err(FockError::NotHermitian {
            defect: hermiticity_defect(&op.matrix),
        });
    }
    eigh(&op.matrix)
}

/// Apply a scalar function to a Hermitian matrix through its
/// eigendecomposition.
pub fn func_hermitian(m: &CMatrix, f: impl Fn(f64) -> C64) -> Result<CMatrix> {
    let dec = eigh(m)?;
    let n = m.nrows();
    let mut diag = CMatrix::zeros(n, n);
    for (k, &lambda) in dec.eigenvalues.iter().enumerate() {
        diag[(k, k)] = f(lambda);
    }
    Ok(&dec.eigenvectors * diag * dec.eigenvectors.adjoint())
}

/// `exp(z M)` for Hermitian `M`, exactly normal by construction.
pub fn exp_hermitian(m: &CMatrix, z: C64) -> Result<CMatrix> {
    func_hermitian(m, |lambda| (z * C64::new(lambda, 0.0)).exp())
}

/// A finite set of spectral points with multiplicities, deduplicated at a
/// fixed tolerance. Consecutive points always differ by more than
/// `dedup_tol`: each point is the multiplicity-weighted mean of one cluster
/// of raw values, and cluster representatives inherit the cluster gaps.
#[derive(Debug, Clone)]
pub struct SpectrumSet {
    pub points: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub dedup_tol: f64,
}

impl SpectrumSet {
    /// Cluster raw values (each of multiplicity one).
    pub fn from_values(values: &[f64], dedup_tol: f64) -> SpectrumSet {
        let weighted: Vec<(f64, usize)> = values.iter().map(|&v| (v, 1)).collect();
        Self::from_weighted(weighted, dedup_tol)
    }

    /// Cluster eigenvalues with the default tolerance scaled to the
    /// spectral diameter.
    pub fn from_eigenvalues(values: &[f64]) -> SpectrumSet {
        Self::from_values(values, default_dedup_tol(values))
    }

    fn from_weighted(mut weighted: Vec<(f64, usize)>, dedup_tol: f64) -> SpectrumSet {
        weighted.retain(|&(_, m)| m > 0);
        weighted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite spectral points"));
        let mut points = Vec::new();
        let mut multiplicities = Vec::new();
        let mut iter = weighted.into_iter();
        if let Some((first, m0)) = iter.next() {
            let mut cluster_sum = first * m0 as f64;
            let mut cluster_count = m0;
            let mut cluster_last = first;
            for (v, mv) in iter {
                if v - cluster_last <= dedup_tol {
                    cluster_sum += v * mv as f64;
                    cluster_count += mv;
                    cluster_last = v;
                } else {
                    points.push(cluster_sum / cluster_count as f64);
                    multiplicities.push(cluster_count);
                    cluster_sum = v * mv as f64;
                    cluster_count = mv;
                    cluster_last = v;
                }
            }
            points.push(cluster_sum / cluster_count as f64);
            multiplicities.push(cluster_count);
        }
        SpectrumSet {
            points,
            multiplicities,
            dedup_tol,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min(&self) -> Option<f64> {
        self.points.first().copied()
    }

    /// Whether some point lies within `tol` of `x`.
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        let i = self.points.partition_point(|&p| p < x);
        let near_left = i > 0 && (x - self.points[i - 1]).abs() <= tol;
        let near_right = i < self.points.len() && (self.points[i] - x).abs() <= tol;
        near_left || near_right
    }

    /// Largest distance from any point of `self` to the other set; zero
    /// when `self` is covered by `other` at the returned resolution.
    pub fn directed_distance(&self, other: &SpectrumSet) -> f64 {
        self.points
            .iter()
            .map(|&p| {
                other
                    .points
                    .iter()
                    .map(|&q| (p - q).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    pub fn union(&self, other: &SpectrumSet, dedup_tol: f64) -> SpectrumSet {
        let mut weighted: Vec<(f64, usize)> = self
            .points
            .iter()
            .zip(&self.multiplicities)
            .map(|(&p, &m)| (p, m))
            .collect();
        weighted.extend(
            other
                .points
                .iter()
                .zip(&other.multiplicities)
                .map(|(&p, &m)| (p, m)),
        );
        Self::from_weighted(weighted, dedup_tol)
    }
}

/// Default deduplication tolerance: 1e-8 of the spectral diameter, with a
/// floor commensurate with solver noise.
pub fn default_dedup_tol(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        (1e-8 * (hi - lo)).max(1e-12)
    } else {
        1e-12
    }
}

/// All pairwise sums of two spectrum sets, deduplicated at `tol`.
pub fn minkowski_sum(s1: &SpectrumSet, s2: &SpectrumSet, tol: f64) -> SpectrumSet {
    let mut weighted = Vec::with_capacity(s1.len() * s2.len());
    for (&p, &mp) in s1.points.iter().zip(&s1.multiplicities) {
        for (&q, &mq) in s2.points.iter().zip(&s2.multiplicities) {
            weighted.push((p + q, mp * mq));
        }
    }
    SpectrumSet::from_weighted(weighted, tol)
}

/// k-fold Minkowski power `S + S + ... + S`.
pub fn minkowski_power(s: &SpectrumSet, k: usize, tol: f64) -> SpectrumSet {
    assert!(k >= 1, "Minkowski power needs at least one factor");
    let mut acc = s.clone();
    for _ in 1..k {
        acc = minkowski_sum(&acc, s, tol);
    }
    acc
}

/// A closed interval; `hi` may be infinite for half-lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// A finite union of closed intervals, kept sorted and merged.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    pub intervals: Vec<Interval>,
}

impl IntervalUnion {
    pub fn new(mut intervals: Vec<Interval>) -> IntervalUnion {
        intervals.retain(|iv| iv.lo <= iv.hi);
        intervals.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite interval bounds"));
        let mut merged: Vec<Interval> = Vec::new();
        for iv in intervals {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        IntervalUnion { intervals: merged }
    }

    /// Widen each point into a closed ball of the given radius; adjacent
    /// balls merge, so a fine grid fills an interval.
    pub fn from_points(points: &[f64], radius: f64) -> IntervalUnion {
        Self::new(
            points
                .iter()
                .map(|&p| Interval {
                    lo: p - radius,
                    hi: p + radius,
                })
                .collect(),
        )
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.lo <= x && x <= iv.hi)
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        Self::new(all)
    }

    /// Interval Minkowski sum: the sum of two unions is the union of the
    /// pairwise interval sums.
    pub fn minkowski_sum(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut sums = Vec::with_capacity(self.intervals.len() * other.intervals.len());
        for a in &self.intervals {
            for b in &other.intervals {
                sums.push(Interval {
                    lo: a.lo + b.lo,
                    hi: a.hi + b.hi,
                });
            }
        }
        Self::new(sums)
    }
}

/// Which route produced an essential-spectrum report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EssMethod {
    /// Minkowski sum of the one-particle spectrum with the descended model.
    HvzRecursion,
    /// Union of per-grid-point recursions for a fibered family.
    FiberedUnion,
    /// Restriction of the full Hamiltonian to the probe-excited subspace.
    DirectWitness,
}

#[derive(Debug, Clone)]
pub struct EssSpectrumReport {
    pub method: EssMethod,
    pub result: SpectrumSet,
    /// Human-readable description of the ingredient spectra.
    pub provenance: Vec<String>,
}

/// Essential spectrum of a cutoff Hamiltonian by descent: the Minkowski sum
/// of the one-particle spectrum with the spectrum at cutoff `N_max - 1`.
pub fn hvz_essential_spectrum(spec: &QfhSpec) -> Result<EssSpectrumReport> {
    if spec.n_max < 1 {
        return Err(FockError::CutoffTooSmall {
            needed: 1,
            n_max: spec.n_max,
        });
    }
    let h_dec = eigh(&spec.h.matrix)?;
    let lower = build_qfh(&descend(spec)?)?;
    let lower_dec = eigh_operator(&lower)?;
    let mut all = h_dec.eigenvalues.clone();
    all.extend_from_slice(&lower_dec.eigenvalues);
    let tol = default_dedup_tol(&all);
    let sigma_h = SpectrumSet::from_values(&h_dec.eigenvalues, tol);
    let sigma_lower = SpectrumSet::from_values(&lower_dec.eigenvalues, tol);
    let result = minkowski_sum(&sigma_h, &sigma_lower, tol);
    let provenance = vec![
        format!("one-particle spectrum: {} distinct points", sigma_h.len()),
        format!(
            "descended Hamiltonian at cutoff {}: {} distinct points",
            spec.n_max - 1,
            sigma_lower.len()
        ),
        format!("dedup tolerance: {:.16e}", tol),
    ];
    Ok(EssSpectrumReport {
        method: EssMethod::HvzRecursion,
        result,
        provenance,
    })
}

/// Finite witness of the descent formula. The last mode must be a probe:
/// an eigenvector of `h` with eigenvalue `lambda_e`, not touched by the
/// interaction. Then the probe-excited subspace is invariant under the full
/// Hamiltonian and carries exactly the spectrum `lambda_e + spectrum at
/// cutoff N_max - 1`. Returns the largest eigenvalue-matching defect.
pub fn morphism_spectrum_check(spec: &QfhSpec, lambda_e: f64) -> Result<f64> {
    if spec.statistics != Statistics::Boson {
        return Err(FockError::InvalidParameter(
            "the probe-excited subspace witness needs a bosonic basis \
             (a fermionic probe saturates at occupation one)"
                .into(),
        ));
    }
    if spec.n_max < 1 {
        return Err(FockError::CutoffTooSmall {
            needed: 1,
            n_max: spec.n_max,
        });
    }
    let probe = spec.d - 1;
    let h = &spec.h.matrix;
    let scale = max_abs(h).max(1.0);
    for j in 0..spec.d {
        if j != probe {
            let coupling = h[(j, probe)].norm().max(h[(probe, j)].norm());
            if coupling > 1e-12 * scale {
                return Err(FockError::ProbeCoupled(format!(
                    "one-particle operator couples probe mode {} to mode {}",
                    probe, j
                )));
            }
        }
    }
    if (h[(probe, probe)] - C64::new(lambda_e, 0.0)).norm() > 1e-12 * scale.max(lambda_e.abs()) {
        return Err(FockError::ProbeCoupled(format!(
            "probe eigenvalue mismatch: diagonal entry {:.16e} vs requested {:.16e}",
            h[(probe, probe)].re,
            lambda_e
        )));
    }
    if !spec.interaction.avoids_mode(probe) {
        return Err(FockError::ProbeCoupled(format!(
            "interaction touches probe mode {}",
            probe
        )));
    }

    let full = build_qfh(spec)?;
    let basis = build_basis(spec.d, spec.n_max, spec.statistics)?;
    let excited: Vec<usize> = basis
        .states
        .iter()
        .enumerate()
        .filter(|(_, st)| st.occupations[probe] >= 1)
        .map(|(i, _)| i)
        .collect();
    let restricted = crate::compress(&full.matrix, &excited, &excited);
    let restricted_dec = eigh(&restricted)?;

    let lower = build_qfh(&descend(spec)?)?;
    let lower_dec = eigh_operator(&lower)?;
    if restricted_dec.eigenvalues.len() != lower_dec.eigenvalues.len() {
        return Err(FockError::BasisMismatch);
    }
    let defect = restricted_dec
        .eigenvalues
        .iter()
        .zip(&lower_dec.eigenvalues)
        .map(|(&a, &b)| (a - (lambda_e + b)).abs())
        .fold(0.0f64, f64::max);
    Ok(defect)
}

/// Union over a grid of one-particle operators of the per-point descent
/// formula. The result is a grid approximation of the closed union.
pub fn fibered_union(
    h_family: &[CMatrix],
    statistics: Statistics,
    n_max: usize,
    interaction: &InteractionSpec,
    dedup_tol: f64,
) -> Result<EssSpectrumReport> {
    if h_family.is_empty() {
        return Err(FockError::EmptyInput("fibered family needs a nonempty grid"));
    }
    let mut acc: Option<SpectrumSet> = None;
    for h in h_family {
        let spec = QfhSpec::new(
            statistics,
            h.nrows(),
            n_max,
            crate::operators::OneParticleOperator::hermitian(h.clone())?,
            interaction.clone(),
            None,
        )?;
        let report = hvz_essential_spectrum(&spec)?;
        acc = Some(match acc {
            Some(prev) => prev.union(&report.result, dedup_tol),
            None => report.result,
        });
    }
    let result = acc.expect("grid verified nonempty");
    let provenance = vec![
        format!("fibered union over {} grid points", h_family.len()),
        "grid approximation of the closed union".to_string(),
        format!("dedup tolerance: {:.16e}", dedup_tol),
    ];
    Ok(EssSpectrumReport {
        method: EssMethod::FiberedUnion,
        result,
        provenance,
    })
}

/// Ground-state energy, its degeneracy, and the gap to a given essential
/// spectrum.
#[derive(Debug, Clone)]
pub struct GroundStateReport {
    pub ground_energy: f64,
    pub multiplicity: usize,
    /// `min(essential spectrum) - ground energy`; positive iff the ground
    /// state is isolated below the essential spectrum.
    pub gap_to_essential: f64,
}

pub fn ground_state_report(
    h: &FockOperator,
    ess: &SpectrumSet,
    degeneracy_tol: f64,
) -> Result<GroundStateReport> {
    if ess.is_empty() {
        return Err(FockError::EmptyInput("essential spectrum set is empty"));
    }
    let dec = eigh_operator(h)?;
    let ground = *dec
        .eigenvalues
        .first()
        .ok_or(FockError::EmptyInput("Hamiltonian has dimension zero"))?;
    let multiplicity = dec
        .eigenvalues
        .iter()
        .take_while(|&&e| e - ground <= degeneracy_tol)
        .count();
    Ok(GroundStateReport {
        ground_energy: ground,
        multiplicity,
        gap_to_essential: ess.min().expect("nonempty") - ground,
    })
}
