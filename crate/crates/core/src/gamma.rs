//! Complex Gamma function (Lanczos, g = 7, nine terms) with reflection.

use crate::linalg::C64;
use std::f64::consts::PI;

const G: f64 = 7.0;
const COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

pub fn gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        // Γ(z) Γ(1 - z) = π / sin(πz)
        let s = (z * PI).sin();
        return C64::new(PI, 0.0) / (s * gamma(C64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut x = C64::new(COEF[0], 0.0);
    for (i, &ci) in COEF.iter().enumerate().skip(1) {
        x += ci / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        let mut f = 1.0;
        for n in 1..15 {
            let g = gamma(C64::new(n as f64, 0.0));
            assert!((g.re - f).abs() / f < 1e-13, "n={n}");
            f *= n as f64;
        }
        let h = gamma(C64::new(0.5, 0.0));
        assert!((h.re - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn modulus_identity_on_imaginary_axis() {
        for &nu in &[0.01, 0.1, 0.5, 1.0, 3.0] {
            let g = gamma(C64::new(0.0, nu));
            let want = PI / (nu * (PI * nu).sinh());
            assert!((g.norm_sqr() - want).abs() / want < 1e-12, "nu={nu}");
        }
    }

    #[test]
    fn recurrence_off_axis() {
        let z = C64::new(0.3, 1.7);
        let lhs = gamma(z + 1.0);
        let rhs = z * gamma(z);
        assert!((lhs - rhs).norm() / lhs.norm() < 1e-13);
    }
}
