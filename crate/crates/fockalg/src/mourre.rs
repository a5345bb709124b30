//! Commutator positivity: windowed infima of `[H, iA]`, threshold sets,
//! and their finite-cutoff recursions.
//!
//! For hermitian `H` and `A`, `rho(lambda, epsilon)` is the smallest
//! eigenvalue of `[H, iA]` compressed to the span of eigenvectors of `H`
//! with eigenvalue within `epsilon` of `lambda` (and `+inf` over an empty
//! window). At finite dimension every eigenvector makes the commutator's
//! expectation vanish, so the sub-threshold set computed from a profile is
//! the union of thresholds and point spectrum, never the threshold set
//! alone; callers compare against that union.

use crate::error::{FockError, Result};
use crate::operators::FockOperator;
use crate::spectral::{eigh, minkowski_power, SpectrumSet};
use crate::{hermiticity_defect, max_abs, C64, CMatrix};

/// `[H, iA] = i(HA - AH)` over a shared basis.
pub fn commutator(h: &FockOperator, a: &FockOperator) -> Result<FockOperator> {
    if h.signature != a.signature {
        return Err(FockError::BasisMismatch);
    }
    let m = commutator_matrix(&h.matrix, &a.matrix);
    let hermitian = hermiticity_defect(&m) <= 1e-12 * max_abs(&m).max(1.0);
    Ok(FockOperator {
        matrix: m,
        hermitian,
        sector_shift: h.sector_shift,
        signature: h.signature,
    })
}

fn commutator_matrix(h: &CMatrix, a: &CMatrix) -> CMatrix {
    (h * a - a * h) * C64::new(0.0, 1.0)
}

/// Smallest eigenvalue of `[H, iA]` on the eigenvector span of `H` within
/// `epsilon` of `lambda`; `+inf` when the window is empty. Window
/// membership uses a fixed boundary tolerance so eigenvalues sitting on the
/// edge are included.
pub fn rho_matrix(h: &CMatrix, a: &CMatrix, lambda: f64, epsilon: f64) -> Result<f64> {
    if epsilon < 0.0 {
        return Err(FockError::InvalidParameter(format!(
            "window half width must be nonnegative, got {epsilon}"
        )));
    }
    let decomposition = eigh(h)?;
    let selected: Vec<usize> = decomposition
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, ev)| (*ev - lambda).abs() <= epsilon + 1e-12)
        .map(|(i, _)| i)
        .collect();
    if selected.is_empty() {
        return Ok(f64::INFINITY);
    }
    let b = commutator_matrix(h, a);
    let window = decomposition.eigenvectors.select_columns(selected.iter());
    let compressed = window.adjoint() * b * window;
    let inner = eigh(&compressed)?;
    Ok(inner.eigenvalues[0])
}

/// `rho_matrix` over operators with a shared basis.
pub fn rho(h: &FockOperator, a: &FockOperator, lambda: f64, epsilon: f64) -> Result<f64> {
    if h.signature != a.signature {
        return Err(FockError::BasisMismatch);
    }
    rho_matrix(&h.matrix, &a.matrix, lambda, epsilon)
}

/// The windowed infimum sampled over a grid of energies.
#[derive(Debug, Clone)]
pub struct RhoProfile {
    pub grid: Vec<f64>,
    pub epsilon: f64,
    pub values: Vec<f64>,
}

pub fn rho_profile(
    h: &FockOperator,
    a: &FockOperator,
    grid: &[f64],
    epsilon: f64,
) -> Result<RhoProfile> {
    if grid.is_empty() {
        return Err(FockError::EmptyInput("energy grid"));
    }
    let mut values = Vec::with_capacity(grid.len());
    for &lambda in grid {
        values.push(rho(h, a, lambda, epsilon)?);
    }
    Ok(RhoProfile {
        grid: grid.to_vec(),
        epsilon,
        values,
    })
}

/// How a threshold set was produced, kept for reporting.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdConstruction {
    /// Grid points where the profile value is finite and at most `delta`.
    Numeric { delta: f64 },
    /// Assembled from one-particle thresholds and point spectra.
    Theoretical,
}

#[derive(Debug, Clone)]
pub struct ThresholdSet {
    pub points: SpectrumSet,
    pub construction: ThresholdConstruction,
}

/// Grid points whose profile value is finite and at most `delta`. At
/// finite dimension this recovers thresholds together with the point
/// spectrum (the expectation of the commutator vanishes in every
/// eigenvector), so the natural comparison set is their union.
pub fn thresholds_numeric(profile: &RhoProfile, delta: f64, dedup_tol: f64) -> ThresholdSet {
    let selected: Vec<f64> = profile
        .grid
        .iter()
        .zip(&profile.values)
        .filter(|(_, v)| v.is_finite() && **v <= delta)
        .map(|(g, _)| *g)
        .collect();
    ThresholdSet {
        points: SpectrumSet::from_values(&selected, dedup_tol),
        construction: ThresholdConstruction::Numeric { delta },
    }
}

/// Threshold set with a stationary point spectrum: the union over
/// `k = 1..=n_terms` of the `k`-fold sums of one-particle thresholds,
/// shifted by the point spectrum.
pub fn thresholds_theoretical(
    tau_h: &SpectrumSet,
    sigma_p: &SpectrumSet,
    n_terms: usize,
    tol: f64,
) -> Result<ThresholdSet> {
    if n_terms == 0 {
        return Err(FockError::EmptyInput("threshold sum order"));
    }
    if tau_h.is_empty() {
        return Err(FockError::EmptyInput("one-particle threshold set"));
    }
    let mut points = SpectrumSet::from_values(&[], tol);
    for k in 1..=n_terms {
        let power = minkowski_power(tau_h, k, tol);
        points = points.union(&crate::spectral::minkowski_sum(&power, sigma_p, tol), tol);
    }
    Ok(ThresholdSet {
        points,
        construction: ThresholdConstruction::Theoretical,
    })
}

/// Finite-cutoff threshold recursion. `levels[j]` is the point spectrum at
/// cutoff `j`; with `n = levels.len()` the thresholds at cutoff `n` are the
/// union over `k = 1..=n` of the `k`-fold one-particle threshold sums
/// shifted by the point spectrum at cutoff `n - k`.
pub fn thresholds_cutoff(
    tau_h: &SpectrumSet,
    levels: &[SpectrumSet],
    tol: f64,
) -> Result<ThresholdSet> {
    if levels.is_empty() {
        return Err(FockError::EmptyInput("point spectrum levels"));
    }
    if tau_h.is_empty() {
        return Err(FockError::EmptyInput("one-particle threshold set"));
    }
    let n = levels.len();
    let mut points = SpectrumSet::from_values(&[], tol);
    for k in 1..=n {
        let power = minkowski_power(tau_h, k, tol);
        let shifted = crate::spectral::minkowski_sum(&power, &levels[n - k], tol);
        points = points.union(&shifted, tol);
    }
    Ok(ThresholdSet {
        points,
        construction: ThresholdConstruction::Theoretical,
    })
}

/// Largest commutator expectation over the eigenvectors of `H`. The virial
/// identity makes every such expectation vanish, so this measures solver
/// noise; a strictly positive commutator estimate on an eigenspace is
/// impossible at finite dimension.
pub fn virial_check(h: &FockOperator, a: &FockOperator) -> Result<f64> {
    if h.signature != a.signature {
        return Err(FockError::BasisMismatch);
    }
    let decomposition = eigh(&h.matrix)?;
    let b = commutator_matrix(&h.matrix, &a.matrix);
    let mut worst: f64 = 0.0;
    for i in 0..decomposition.eigenvalues.len() {
        let psi = decomposition.eigenvectors.column(i);
        let expectation = (psi.adjoint() * &b * psi)[(0, 0)];
        worst = worst.max(expectation.norm());
    }
    Ok(worst)
}

/// Default sub-threshold tolerance: a small multiple of the commutator's
/// scale, floored away from zero.
pub fn default_threshold_delta(h: &FockOperator, a: &FockOperator) -> Result<f64> {
    let c = commutator(h, a)?;
    Ok((1e-6 * crate::op_norm(&c.matrix)).max(1e-12))
}

/// Consistency of `rho` across tensor sums: assemble the windowed
/// commutator of `h1 (x) 1 + 1 (x) h2` from the per-factor commutators in
/// their eigenbases and compare its smallest eigenvalue with the direct
/// computation on the assembled matrices. Returns the absolute difference
/// (both-empty windows count as zero).
pub fn tensor_rho_check(
    h1: &CMatrix,
    a1: &CMatrix,
    h2: &CMatrix,
    a2: &CMatrix,
    lambda: f64,
    epsilon: f64,
) -> Result<f64> {
    let d1 = eigh(h1)?;
    let d2 = eigh(h2)?;
    let m1 = d1.eigenvectors.adjoint() * commutator_matrix(h1, a1) * &d1.eigenvectors;
    let m2 = d2.eigenvectors.adjoint() * commutator_matrix(h2, a2) * &d2.eigenvectors;
    let mut pairs = Vec::new();
    for (i, mu) in d1.eigenvalues.iter().enumerate() {
        for (j, nu) in d2.eigenvalues.iter().enumerate() {
            if (mu + nu - lambda).abs() <= epsilon + 1e-12 {
                pairs.push((i, j));
            }
        }
    }
    let assembled = if pairs.is_empty() {
        f64::INFINITY
    } else {
        let b = CMatrix::from_fn(pairs.len(), pairs.len(), |p, q| {
            let (i, j) = pairs[p];
            let (ip, jp) = pairs[q];
            let mut entry = C64::new(0.0, 0.0);
            if j == jp {
                entry += m1[(i, ip)];
            }
            if i == ip {
                entry += m2[(j, jp)];
            }
            entry
        });
        eigh(&b)?.eigenvalues[0]
    };
    let n1 = h1.nrows();
    let n2 = h2.nrows();
    let id1 = CMatrix::identity(n1, n1);
    let id2 = CMatrix::identity(n2, n2);
    let h = h1.kronecker(&id2) + id1.kronecker(h2);
    let a = a1.kronecker(&id2) + id1.kronecker(a2);
    let direct = rho_matrix(&h, &a, lambda, epsilon)?;
    if assembled.is_infinite() && direct.is_infinite() {
        return Ok(0.0);
    }
    Ok((assembled - direct).abs())
}
