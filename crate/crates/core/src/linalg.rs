//! Small dense complex linear algebra used throughout the crate.

use nalgebra::{Matrix2, Matrix4, SMatrix, SVector, SymmetricEigen, Vector4};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Vec4 = Vector4<C64>;
/// Superoperator acting on column-stacked 4×4 matrices.
pub type Super = SMatrix<C64, 16, 16>;
pub type Vec16 = SVector<C64, 16>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn frobenius4(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius2(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ‖M − M†‖_F
pub fn hermiticity_error(m: &Mat4) -> f64 {
    frobenius4(&(m - m.adjoint()))
}

/// Eigen-decomposition of a Hermitian 4×4 matrix with eigenvalues sorted
/// ascending. Columns of the returned matrix are the eigenvectors.
pub fn eigh4(m: &Mat4) -> (Vector4<f64>, Mat4) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vals = Vector4::zeros();
    let mut vecs = Mat4::zeros();
    for (k, &j) in order.iter().enumerate() {
        vals[k] = eig.eigenvalues[j];
        vecs.set_column(k, &eig.eigenvectors.column(j));
    }
    (vals, vecs)
}

pub fn min_eigenvalue(m: &Mat4) -> f64 {
    eigh4(m).0[0]
}

/// exp(−i·s·H) for Hermitian H, built from the spectral decomposition so the
/// result is unitary to rounding.
pub fn expm_hermitian(h: &Mat4, s: f64) -> Mat4 {
    let (vals, vecs) = eigh4(h);
    let phases = Mat4::from_diagonal(&Vector4::from_fn(|k, _| (-I * s * vals[k]).exp()));
    vecs * phases * vecs.adjoint()
}

/// Column-stacking vectorisation.
pub fn vec_of(m: &Mat4) -> Vec16 {
    Vec16::from_iterator(m.iter().copied())
}

pub fn mat_of(v: &Vec16) -> Mat4 {
    Mat4::from_iterator(v.iter().copied())
}

/// Superoperator of ρ ↦ L·ρ·R, i.e. Rᵀ ⊗ L in column-stacking convention.
pub fn sandwich(l: &Mat4, r: &Mat4) -> Super {
    let mut s = Super::zeros();
    for b in 0..4 {
        for a in 0..4 {
            let rab = r[(a, b)];
            if rab == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..4 {
                for i in 0..4 {
                    s[(b * 4 + i, a * 4 + j)] += rab * l[(i, j)];
                }
            }
        }
    }
    s
}

/// Projector |v⟩⟨v|.
pub fn outer(v: &Vec4) -> Mat4 {
    v * v.adjoint()
}

pub fn trace4(m: &Mat4) -> C64 {
    m.trace()
}

/// Unitary polar factor of a 2×2 matrix (closest unitary in Frobenius norm).
pub fn polar_unitary2(m: &Mat2) -> Mat2 {
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    u * v_t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Mat4 {
        Mat4::from_fn(|i, j| c((i * 4 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.3))
    }

    #[test]
    fn sandwich_matches_direct_product() {
        let a = sample();
        let b = sample().adjoint() * c(0.5, -0.2);
        let rho = Mat4::from_fn(|i, j| c(i as f64 + 1.0, j as f64 - 2.0));
        let direct = a * rho * b;
        let via = mat_of(&(sandwich(&a, &b) * vec_of(&rho)));
        assert!(frobenius4(&(direct - via)) < 1e-12);
    }

    #[test]
    fn hermitian_exponential_is_unitary() {
        let h = sample() + sample().adjoint();
        let u = expm_hermitian(&h, 0.7);
        assert!(frobenius4(&(u.adjoint() * u - Mat4::identity())) < 1e-12);
    }
}
