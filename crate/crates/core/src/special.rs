//! Trigonometric functions of `sqrt(lambda)` evaluated as entire functions of
//! `lambda`, so that no square-root branch choice can leak into results.

use num_complex::Complex64;

/// cos(sqrt(z)), entire in z.
pub fn cos_sqrt_z(z: Complex64) -> Complex64 {
    if z.norm() < 0.25 {
        // cos(sqrt(z)) = sum (-z)^n / (2n)!
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..=12 {
            term *= -z / ((2 * n - 1) as f64 * (2 * n) as f64);
            sum += term;
        }
        sum
    } else {
        z.sqrt().cos()
    }
}

/// sin(sqrt(z)) / sqrt(z), entire in z.
pub fn sinc_sqrt_z(z: Complex64) -> Complex64 {
    if z.norm() < 0.25 {
        // sum (-z)^n / (2n+1)!
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..=12 {
            term *= -z / ((2 * n) as f64 * (2 * n + 1) as f64);
            sum += term;
        }
        sum
    } else {
        let w = z.sqrt();
        w.sin() / w
    }
}

/// cos(a * sqrt(lambda)).
pub fn cos_sqrt(lambda: Complex64, a: f64) -> Complex64 {
    cos_sqrt_z(lambda * a * a)
}

/// sin(a * sqrt(lambda)) / sqrt(lambda); at lambda = 0 this is `a`.
pub fn sinc_sqrt(lambda: Complex64, a: f64) -> Complex64 {
    a * sinc_sqrt_z(lambda * a * a)
}

/// sin(z) / z for complex z, stable near the origin.
pub fn sinc(z: Complex64) -> Complex64 {
    sinc_sqrt_z(z * z)
}

/// (sin(z) - z cos(z)) / z^2, odd entire function; used by the oscillatory
/// cell quadrature for linear interpolants.
pub fn sin_minus_zcos_over_z2(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        // z/3 - z^3/30 + z^5/840 - ... = sum_{n>=1} (-1)^{n+1} 2n z^{2n-1} / (2n+1)!
        let z2 = z * z;
        let mut term = z / 3.0;
        let mut sum = term;
        for n in 2..=12 {
            let k = 2.0 * n as f64;
            term *= -z2 / ((k - 2.0) * (k + 1.0));
            sum += term;
        }
        sum
    } else {
        (z.sin() - z * z.cos()) / (z * z)
    }
}
