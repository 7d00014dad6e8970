//! Gauss-Hermite and Gauss-Legendre nodes/weights via Golub-Welsch
//! (eigenvalues of the Jacobi matrix of the orthogonal-polynomial
//! recurrence).

use nalgebra::DMatrix;

/// Nodes and weights for integrals of the form
/// int f(x) exp(-x^2) dx ~ sum w_i f(x_i). Nodes ascending.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    // Jacobi matrix: off-diagonal sqrt(k/2), mu0 = sqrt(pi)
    let mut j = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let b = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    golub_welsch(j, std::f64::consts::PI.sqrt())
}

/// Nodes and weights for int_{-1}^{1} f(x) dx ~ sum w_i f(x_i). Ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut j = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    golub_welsch(j, 2.0)
}

fn golub_welsch(j: DMatrix<f64>, mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let eig = nalgebra::SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let q0 = eig.eigenvectors[(0, i)];
            (x, mu0 * q0 * q0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_integrates_polynomials() {
        let (x, w) = gauss_hermite(8);
        assert_eq!(x.len(), 8);
        // int exp(-x^2) dx = sqrt(pi)
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, std::f64::consts::PI.sqrt(), max_relative = 1e-12);
        // int x^2 exp(-x^2) dx = sqrt(pi)/2
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert_relative_eq!(m2, std::f64::consts::PI.sqrt() / 2.0, max_relative = 1e-12);
        // odd moments vanish
        let m3: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x * x).sum();
        assert!(m3.abs() < 1e-12);
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-12);
        // int_{-1}^{1} x^4 dx = 2/5
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert_relative_eq!(m4, 0.4, max_relative = 1e-12);
    }

    #[test]
    fn hermite_converges_on_a_gaussian() {
        // int exp(-x^2) cos(a x) dx = sqrt(pi) exp(-a^2/4)
        let a = 1.7_f64;
        let exact = std::f64::consts::PI.sqrt() * (-a * a / 4.0).exp();
        let (x, w) = gauss_hermite(24);
        let approx_val: f64 = x.iter().zip(&w).map(|(x, w)| w * (a * x).cos()).sum();
        assert_relative_eq!(approx_val, exact, max_relative = 1e-12);
    }

    #[test]
    fn high_order_nodes_stay_finite_and_sorted() {
        for order in [64, 256, 512] {
            let (x, w) = gauss_hermite(order);
            assert!(x.windows(2).all(|p| p[1] > p[0]));
            assert!(w.iter().all(|&wi| wi.is_finite() && wi > 0.0));
            let total: f64 = w.iter().sum();
            assert_relative_eq!(total, std::f64::consts::PI.sqrt(), max_relative = 1e-10);
        }
    }
}
