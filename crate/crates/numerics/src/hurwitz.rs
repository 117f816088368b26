//! Hurwitz zeta function ζ(n, z) = Σ_{k≥0} (z + k)^{−n} for integer n ≥ 2 and complex z.

use num_complex::Complex64;
use std::f64::consts::PI;

const BERNOULLI_2J: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

const SHIFT_TARGET: f64 = 12.0;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn euler_maclaurin(n: u32, z: Complex64) -> Complex64 {
    let shift = (SHIFT_TARGET - z.re).ceil().max(0.0) as usize;
    let nf = n as i32;
    let mut direct = Complex64::new(0.0, 0.0);
    for k in 0..shift {
        direct += (z + k as f64).powi(-nf);
    }
    let w = z + shift as f64;
    let winv = w.inv();
    let wn = winv.powi(nf);
    let mut tail = w * wn / f64::from(n - 1) + 0.5 * wn;
    // rising factorial (n)_{2j-1} / (2j)! times w^{-n-2j+1}
    let mut rising = f64::from(n);
    let mut wpow = wn * winv;
    let mut fact = 2.0;
    let winv2 = winv * winv;
    for (j, b) in BERNOULLI_2J.iter().enumerate() {
        if j > 0 {
            let k = 2 * j as u32;
            rising *= f64::from(n + k - 1) * f64::from(n + k);
            fact *= f64::from(k + 1) * f64::from(k + 2);
            wpow *= winv2;
        }
        tail += wpow * (b * rising / fact);
    }
    direct + tail
}

/// Derivative `d^m/dz^m cot(πz)` for m = 1, 2, 3.
fn cot_derivative(m: u32, z: Complex64) -> Complex64 {
    let pz = PI * z;
    if pz.im.abs() > 300.0 {
        return Complex64::new(0.0, 0.0);
    }
    let sin = pz.sin();
    let csc2 = (sin * sin).inv();
    let cot = pz.cos() / sin;
    match m {
        1 => -PI * csc2,
        2 => 2.0 * PI * PI * csc2 * cot,
        3 => -2.0 * PI.powi(3) * csc2 * (csc2 + 2.0 * cot * cot),
        _ => unreachable!("only orders 2..=4 of the zeta function are supported"),
    }
}

/// Hurwitz zeta ζ(n, z) for n ∈ {2, 3, 4} and any complex z away from the poles z ∈ {0, −1, −2, …}.
///
/// The right half plane is handled by Euler–Maclaurin summation after shifting
/// `z` far enough right; the left half plane uses the polygamma reflection formula.
pub fn hurwitz_zeta(n: u32, z: Complex64) -> Complex64 {
    assert!((2..=4).contains(&n), "hurwitz_zeta supports n = 2, 3, 4");
    if z.re >= 0.5 {
        return euler_maclaurin(n, z);
    }
    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
    let reflected = sign * euler_maclaurin(n, 1.0 - z);
    reflected + sign * PI / factorial(n - 1) * cot_derivative(n - 1, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(n: u32, z: Complex64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        let terms = 200_000;
        for k in 0..terms {
            s += (z + k as f64).powi(-(n as i32));
        }
        // integral tail correction
        let w = z + terms as f64;
        s + w.powi(1 - n as i32) / f64::from(n - 1) + 0.5 * w.powi(-(n as i32))
    }

    #[test]
    fn riemann_values() {
        let z2 = hurwitz_zeta(2, Complex64::new(1.0, 0.0));
        assert!((z2.re - PI * PI / 6.0).abs() < 1e-14);
        let z4 = hurwitz_zeta(4, Complex64::new(1.0, 0.0));
        assert!((z4.re - PI.powi(4) / 90.0).abs() < 1e-14);
        let z3 = hurwitz_zeta(3, Complex64::new(1.0, 0.0));
        assert!((z3.re - 1.202_056_903_159_594_2).abs() < 1e-14);
    }

    #[test]
    fn complex_argument_matches_brute_force() {
        for &(re, im) in &[(0.6, 2.3), (0.2, -1.7), (3.5, 10.0), (-4.3, 1.2), (-40.5, -6.0)] {
            let z = Complex64::new(re, im);
            for n in 2..=4 {
                let a = hurwitz_zeta(n, z);
                let b = if re > 0.0 {
                    brute(n, z)
                } else {
                    let shift = (-re).ceil() as usize + 1;
                    let mut s = Complex64::new(0.0, 0.0);
                    for k in 0..shift {
                        s += (z + k as f64).powi(-(n as i32));
                    }
                    s + brute(n, z + shift as f64)
                };
                assert!((a - b).norm() < 1e-11 * (1.0 + b.norm()), "n={n} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn recurrence_holds() {
        let z = Complex64::new(-0.3, 0.8);
        for n in 2..=4 {
            let lhs = hurwitz_zeta(n, z) - hurwitz_zeta(n, z + 1.0);
            let rhs = z.powi(-(n as i32));
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
        }
    }
}
