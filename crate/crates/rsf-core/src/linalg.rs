//! Dense complex linear algebra for small Hermitian matrices.
//!
//! Field-mode problems live in dimensions n ≲ 64, where full dense storage
//! and a cyclic Jacobi eigensolver are simple, dependency-free, and accurate
//! to near machine precision. Everything downstream (state validation,
//! entropy functionals, propagators, the number-basis cross-check) leans on
//! this module, so its tolerances are fixed here in one place:
//!
//! * construction gate: ‖M − M†‖_F ≤ 1e-10 · max(1, ‖M‖_F)
//! * eigensolver target: off-diagonal norm ≤ 1e-13 · max(1, ‖M‖_F)
//! * reconstruction: ‖V Λ V† − M‖_F ≤ 1e-10 · max(1, ‖M‖_F)

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermiticity gate applied by [`HermitianMatrix::new`], relative to
/// max(1, ‖M‖_F).
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Unitarity gate, applied to ‖u†u − I‖_F.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius norm the Jacobi sweep drives the matrix to,
/// relative to max(1, ‖M‖_F).
pub const JACOBI_OFF_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Conjugate transpose.
pub fn dagger(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().map(|z| z.conj())
}

/// Frobenius norm of a complex matrix.
pub fn frobenius(m: &Array2<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean norm squared of a complex vector, ‖v‖² = Σ |v_k|².
pub fn norm_sqr(v: &Array1<Complex64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Outer product |a⟩⟨b|, entry (i, j) = a_i · conj(b_j).
pub fn outer(a: &Array1<Complex64>, b: &Array1<Complex64>) -> Array2<Complex64> {
    let (n, m) = (a.len(), b.len());
    Array2::from_shape_fn((n, m), |(i, j)| a[i] * b[j].conj())
}

/// Identity matrix.
pub fn identity(n: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { ONE } else { ZERO })
}

/// ‖u†u − I‖_F, the unitarity deviation.
pub fn unitarity_deviation(u: &Array2<Complex64>) -> f64 {
    let gram = dagger(u).dot(u);
    frobenius(&(&gram - &identity(u.nrows())))
}

/// Square complex matrix with exactly Hermitian storage: the constructor
/// symmetrizes, so `m[(i, j)] == m[(j, i)].conj()` holds bit-for-bit and
/// the diagonal is exactly real.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    data: Array2<Complex64>,
}

impl HermitianMatrix {
    /// Validate Hermiticity within [`HERMITICITY_TOL`] and store the exactly
    /// symmetrized matrix (M + M†)/2.
    pub fn new(m: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = (m.nrows(), m.ncols());
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::Domain("matrix dimension must be at least 1".into()));
        }
        let deviation = frobenius(&(&m - &dagger(&m)));
        let tol = HERMITICITY_TOL * frobenius(&m).max(1.0);
        if deviation > tol {
            return Err(Error::NotHermitian { deviation, tol });
        }
        Ok(hermitize(&m))
    }

    /// Zero matrix of dimension n ≥ 1.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        Self {
            data: Array2::from_elem((n, n), ZERO),
        }
    }

    /// Real diagonal matrix.
    pub fn from_diag_real(d: &[f64]) -> Self {
        assert!(!d.is_empty(), "dimension must be at least 1");
        let n = d.len();
        Self {
            data: Array2::from_shape_fn((n, n), |(i, j)| {
                if i == j {
                    Complex64::new(d[i], 0.0)
                } else {
                    ZERO
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn raw(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn into_raw(self) -> Array2<Complex64> {
        self.data
    }

    /// Σ_k m_kk; exactly real for Hermitian storage.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.data[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.data)
    }

    /// Real diagonal as a vector.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }
}

/// Exact symmetrization (M + M†)/2 of a square matrix.
///
/// Both storage positions of each pair are computed from the same two
/// addends, so the result is Hermitian to the last bit; the diagonal comes
/// out exactly real.
pub fn hermitize(m: &Array2<Complex64>) -> HermitianMatrix {
    assert_eq!(m.nrows(), m.ncols(), "hermitize requires a square matrix");
    let n = m.nrows();
    let mut out = Array2::from_elem((n, n), ZERO);
    for i in 0..n {
        out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    HermitianMatrix { data: out }
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues in ascending
/// order, matching unitary eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Column k is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: Array2<Complex64>,
}

impl EigenSystem {
    /// Rebuild Σ_k f(λ_k) |v_k⟩⟨v_k| for a complex-valued spectral map.
    fn assemble(&self, fvals: &[Complex64]) -> Array2<Complex64> {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        Array2::from_shape_fn((n, n), |(i, j)| {
            (0..n).map(|k| fvals[k] * v[(i, k)] * v[(j, k)].conj()).sum()
        })
    }
}

fn off_diagonal_norm(m: &Array2<Complex64>) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation zeroes one off-diagonal pair (p, q) by a plane rotation
/// with the phase of m_pq absorbed into the p-th column; sweeps repeat until
/// the off-diagonal norm falls below [`JACOBI_OFF_TOL`] · max(1, ‖M‖_F).
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<EigenSystem> {
    let n = h.dim();
    let mut a = h.raw().clone();
    let mut v = identity(n);
    let scale = frobenius(&a).max(1.0);
    let target = JACOBI_OFF_TOL * scale;

    if n > 1 {
        let mut converged = false;
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_norm(&a) <= target {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let m = apq.norm();
                    if m == 0.0 {
                        continue;
                    }
                    // Phase e^{iθ} of the pivot, then a real Jacobi rotation
                    // on the phase-stripped 2x2 block.
                    let ph = apq / m;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (app - aqq) / (2.0 * m);
                    let t = if tau == 0.0 {
                        1.0
                    } else {
                        tau.signum() / (tau.abs() + tau.hypot(1.0))
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let cp = ph * c; // U[p][p]
                    let sp = ph * s; // -U[p][q] = s·e^{iθ}

                    // A <- A·U  (columns p, q)
                    for i in 0..n {
                        let tp = a[(i, p)];
                        let tq = a[(i, q)];
                        a[(i, p)] = tp * cp + tq * s;
                        a[(i, q)] = tq * c - tp * sp;
                    }
                    // A <- U†·A  (rows p, q)
                    for j in 0..n {
                        let tp = a[(p, j)];
                        let tq = a[(q, j)];
                        a[(p, j)] = tp * cp.conj() + tq * s;
                        a[(q, j)] = tq * c - tp * sp.conj();
                    }
                    // V <- V·U
                    for i in 0..n {
                        let tp = v[(i, p)];
                        let tq = v[(i, q)];
                        v[(i, p)] = tp * cp + tq * s;
                        v[(i, q)] = tq * c - tp * sp;
                    }
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                }
            }
        }
        if !converged && off_diagonal_norm(&a) > target {
            return Err(Error::EigenConvergence {
                sweeps: JACOBI_MAX_SWEEPS,
                off_norm: off_diagonal_norm(&a),
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = Array2::from_shape_fn((n, n), |(i, k)| v[(i, order[k])]);
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &HermitianMatrix) -> Result<f64> {
    Ok(eig_hermitian(h)?.eigenvalues[0])
}

/// Spectral map f(M) = Σ_k f(λ_k) |v_k⟩⟨v_k| for a real-valued f.
///
/// Fails with the offending eigenvalue if f returns a non-finite value;
/// limits (such as x·ln x → 0 at x = 0) are the caller's concern.
pub fn matrix_function(
    h: &HermitianMatrix,
    f: impl Fn(f64) -> f64,
) -> Result<HermitianMatrix> {
    let eig = eig_hermitian(h)?;
    let mut fvals = Vec::with_capacity(eig.eigenvalues.len());
    for &lambda in &eig.eigenvalues {
        let y = f(lambda);
        if !y.is_finite() {
            return Err(Error::FunctionDomain { eigenvalue: lambda });
        }
        fvals.push(Complex64::new(y, 0.0));
    }
    Ok(hermitize(&eig.assemble(&fvals)))
}

/// Spectral map with a complex-valued f; the result is normal rather than
/// Hermitian (e.g. f(x) = e^{ix} yields a unitary).
pub fn matrix_function_complex(
    h: &HermitianMatrix,
    f: impl Fn(f64) -> Complex64,
) -> Result<Array2<Complex64>> {
    let eig = eig_hermitian(h)?;
    let mut fvals = Vec::with_capacity(eig.eigenvalues.len());
    for &lambda in &eig.eigenvalues {
        let y = f(lambda);
        if !y.re.is_finite() || !y.im.is_finite() {
            return Err(Error::FunctionDomain { eigenvalue: lambda });
        }
        fvals.push(y);
    }
    Ok(eig.assemble(&fvals))
}

/// e^{iB} for Hermitian B — always unitary.
pub fn unitary_exp_i(b: &HermitianMatrix) -> Result<Array2<Complex64>> {
    matrix_function_complex(b, |x| Complex64::new(x.cos(), x.sin()))
}

/// Principal Hermitian logarithm of a unitary: b with u = e^{ib} and the
/// eigenvalues of b in (−π, π].
///
/// u is normal, so u = W e^{iθ} W†. W is recovered by simultaneously
/// diagonalizing the commuting Hermitian pair cos b = (u + u†)/2 and
/// sin b = (u − u†)/(2i): eigenvectors of cos b fix the subspaces, and the
/// restriction of sin b to each degenerate cos-subspace separates ±θ.
/// θ = atan2(sin, cos) lands on the principal branch, and a round-trip
/// check guards the reassembly.
pub fn unitary_log(u: &Array2<Complex64>) -> Result<HermitianMatrix> {
    let n = u.nrows();
    if n != u.ncols() {
        return Err(Error::NotSquare {
            rows: n,
            cols: u.ncols(),
        });
    }
    let deviation = unitarity_deviation(u);
    if deviation > UNITARITY_TOL {
        return Err(Error::NotUnitary {
            deviation,
            tol: UNITARITY_TOL,
        });
    }

    let ud = dagger(u);
    let cos_b = hermitize(&(u + &ud).mapv(|z| 0.5 * z));
    let sin_b = hermitize(&(u - &ud).mapv(|z| z * Complex64::new(0.0, -0.5)));

    let cos_eig = eig_hermitian(&cos_b)?;
    let mut vectors = cos_eig.eigenvectors.clone();
    let cos_vals = cos_eig.eigenvalues.clone();

    // sin b in the cos-eigenbasis is block diagonal over degenerate groups.
    let s_rot = dagger(&vectors).dot(sin_b.raw()).dot(&vectors);

    let mut angles = vec![0.0f64; n];
    let group_tol = 1e-7;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (cos_vals[end] - cos_vals[end - 1]).abs() <= group_tol {
            end += 1;
        }
        let size = end - start;
        if size == 1 {
            angles[start] = f64::atan2(s_rot[(start, start)].re, cos_vals[start]);
        } else {
            let block = Array2::from_shape_fn((size, size), |(i, j)| {
                s_rot[(start + i, start + j)]
            });
            let block_eig = eig_hermitian(&hermitize(&block))?;
            // Rotate the group's columns into the joint eigenbasis.
            let cols: Vec<Array1<Complex64>> = (0..size)
                .map(|k| {
                    Array1::from_shape_fn(n, |i| {
                        (0..size)
                            .map(|m| vectors[(i, start + m)] * block_eig.eigenvectors[(m, k)])
                            .sum()
                    })
                })
                .collect();
            for (k, col) in cols.iter().enumerate() {
                for i in 0..n {
                    vectors[(i, start + k)] = col[i];
                }
                angles[start + k] =
                    f64::atan2(block_eig.eigenvalues[k], cos_vals[start + k]);
            }
        }
        start = end;
    }

    let joint = EigenSystem {
        eigenvalues: angles.clone(),
        eigenvectors: vectors,
    };
    let theta: Vec<Complex64> = angles
        .iter()
        .map(|&t| Complex64::new(t, 0.0))
        .collect();
    let b = hermitize(&joint.assemble(&theta));

    // Round-trip guard: reassembly must reproduce u.
    let back = unitary_exp_i(&b)?;
    let rt = frobenius(&(&back - u));
    if rt > 1e-8 * frobenius(u).max(1.0) {
        return Err(Error::LogBranch { deviation: rt });
    }
    Ok(b)
}
