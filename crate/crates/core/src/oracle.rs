//! Truncated Fock-space reference for single-mode displaced thermal states.
//!
//! Dense matrices on span{|0⟩, …, |N⟩}; intended for N up to a few hundred.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Tail probability above which a thermal truncation is refused.
pub const THERMAL_TAIL_LIMIT: f64 = 1e-6;
/// Tail probability above which a thermal truncation is accepted with a warning.
pub const THERMAL_TAIL_WARN: f64 = 1e-12;
/// Eigenvalues in [−this, 0) are treated as roundoff and clamped.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub matrix: DMatrix<Complex64>,
}

impl FockOperator {
    /// Truncation N; the space has dimension N + 1.
    pub fn truncation(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// tr(ρ²) for a Hermitian operator.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    pub fn element(&self, m: usize, n: usize) -> Complex64 {
        self.matrix[(m, n)]
    }

    /// U ρ U†
    pub fn conjugated_by(&self, u: &FockOperator) -> Result<Self> {
        check_dims(self, u)?;
        Ok(Self {
            matrix: &u.matrix * &self.matrix * u.matrix.adjoint(),
        })
    }

    pub fn mul(&self, other: &FockOperator) -> Result<Self> {
        check_dims(self, other)?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }
}

fn check_dims(a: &FockOperator, b: &FockOperator) -> Result<()> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch(a.dimension(), b.dimension()));
    }
    Ok(())
}

/// Smallest N with (n̄/(1+n̄))^{N+1} below `tail`.
fn thermal_truncation_for(nbar: f64, tail: f64) -> usize {
    let q = nbar / (1.0 + nbar);
    if q <= 0.0 {
        return 1;
    }
    ((tail.ln() / q.ln()).ceil() as usize).max(2) - 1
}

/// Geometric populations n̄ⁿ/(1+n̄)^{n+1}, renormalized on the truncated space.
pub fn thermal_state(nbar: f64, truncation: usize) -> Result<FockOperator> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidParameter(format!("mean occupation must be finite and >= 0, got {nbar}")));
    }
    if truncation < 1 {
        return Err(Error::TruncationTooSmall {
            truncation,
            suggested: thermal_truncation_for(nbar, THERMAL_TAIL_WARN).max(1),
        });
    }
    let q = nbar / (1.0 + nbar);
    let tail = q.powi(truncation as i32 + 1);
    if tail > THERMAL_TAIL_LIMIT {
        return Err(Error::TruncationTooSmall {
            truncation,
            suggested: thermal_truncation_for(nbar, THERMAL_TAIL_WARN),
        });
    }
    if tail > THERMAL_TAIL_WARN {
        log::warn!("thermal tail {tail:e} beyond N = {truncation} dropped before renormalization");
    }
    let pops: Vec<f64> = (0..=truncation).map(|n| q.powi(n as i32)).collect();
    let z: f64 = pops.iter().sum();
    let diag = DVector::from_iterator(truncation + 1, pops.iter().map(|p| Complex64::new(p / z, 0.0)));
    Ok(FockOperator {
        matrix: DMatrix::from_diagonal(&diag),
    })
}

/// |n⟩⟨n| on the truncated space.
pub fn number_projector(n: usize, truncation: usize) -> Result<FockOperator> {
    if n > truncation {
        return Err(Error::TruncationTooSmall {
            truncation,
            suggested: n,
        });
    }
    let mut m = DMatrix::zeros(truncation + 1, truncation + 1);
    m[(n, n)] = Complex64::new(1.0, 0.0);
    Ok(FockOperator { matrix: m })
}

/// exp(βa† − β*a), exponentiated exactly on the truncated space through the
/// Hermitian generator H = −i(βa† − β*a).
pub fn displacement(beta: Complex64, truncation: usize) -> Result<FockOperator> {
    let dim = truncation + 1;
    if truncation < 1 || beta.norm_sqr() > truncation as f64 / 4.0 {
        return Err(Error::TruncationTooSmall {
            truncation,
            suggested: (4.0 * beta.norm_sqr()).ceil().max(1.0) as usize,
        });
    }
    let i = Complex64::new(0.0, 1.0);
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for n in 0..truncation {
        // ⟨n+1|a†|n⟩ = √(n+1)
        let g = beta * ((n + 1) as f64).sqrt();
        h[(n + 1, n)] = -i * g;
        h[(n, n + 1)] = (-i * g).conj();
    }
    let eig = SymmetricEigen::new(h);
    let phases = DVector::from_iterator(dim, eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)));
    let v = &eig.eigenvectors;
    Ok(FockOperator {
        matrix: v * DMatrix::from_diagonal(&phases) * v.adjoint(),
    })
}

/// D(β) ρ_th(n̄) D(β)†
pub fn displaced_thermal_state(nbar: f64, beta: Complex64, truncation: usize) -> Result<FockOperator> {
    thermal_state(nbar, truncation)?.conjugated_by(&displacement(beta, truncation)?)
}

/// Eigendecomposition of a Hermitian PSD matrix. Eigenvalues in
/// [−NEGATIVITY_TOLERANCE, 0) and those below the roundoff floor of the
/// decomposition are clamped to zero.
fn psd_eigen(m: &DMatrix<Complex64>) -> Result<SymmetricEigen<Complex64, nalgebra::Dyn>> {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut eig = SymmetricEigen::new(herm);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l));
    let floor = m.nrows() as f64 * f64::EPSILON * top;
    for l in eig.eigenvalues.iter_mut() {
        if *l < -NEGATIVITY_TOLERANCE {
            return Err(Error::NumericalIndefiniteness(*l));
        }
        if *l < floor {
            *l = 0.0;
        }
    }
    Ok(eig)
}

fn psd_sqrt(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let e = psd_eigen(m)?;
    let roots = DVector::from_iterator(m.nrows(), e.eigenvalues.iter().map(|l| Complex64::new(l.sqrt(), 0.0)));
    Ok(&e.eigenvectors * DMatrix::from_diagonal(&roots) * e.eigenvectors.adjoint())
}

/// tr√(√ρ σ √ρ), evaluated as the trace norm of √ρ√σ.
pub fn uhlmann_fidelity(rho: &FockOperator, sigma: &FockOperator) -> Result<f64> {
    check_dims(rho, sigma)?;
    let product = psd_sqrt(&rho.matrix)? * psd_sqrt(&sigma.matrix)?;
    Ok(product.singular_values().iter().sum::<f64>().min(1.0))
}

/// tr[D(β1) ρ_th D(β2)†]
pub fn displacement_overlap_trace(nbar: f64, beta1: Complex64, beta2: Complex64, truncation: usize) -> Result<Complex64> {
    let rho = thermal_state(nbar, truncation)?;
    let d1 = displacement(beta1, truncation)?;
    let d2 = displacement(beta2, truncation)?;
    Ok((&d1.matrix * &rho.matrix * d2.matrix.adjoint()).trace())
}

/// exp(−|Δβ|² tanh(θ/2)/2) with tanh(θ/2) = 1/(2n̄ + 1).
pub fn gaussian_fidelity(nbar: f64, delta_beta: Complex64) -> f64 {
    (-0.5 * delta_beta.norm_sqr() / (2.0 * nbar + 1.0)).exp()
}

/// exp(−|Δβ|² coth(θ/2)/2) with coth(θ/2) = 2n̄ + 1.
pub fn gaussian_overlap_modulus(nbar: f64, delta_beta: Complex64) -> f64 {
    (-0.5 * delta_beta.norm_sqr() * (2.0 * nbar + 1.0)).exp()
}
