//! Self-contained special functions: complete elliptic integrals K, E, Pi,
//! the Jacobi cn function, and the helpers they need.
//!
//! K and E use the arithmetic-geometric mean iteration; Pi uses Carlson
//! symmetric forms (RF, RC, RJ) with the duplication theorem. Everything is
//! generic over the float type; accuracy contracts (<= 1e-12 relative for
//! K/E, <= 1e-10 for Pi) hold at f64.

use crate::{Error, Result};
use num_traits::Float;

fn lit<F: Float>(x: f64) -> F {
    F::from(x).expect("literal conversion")
}

/// Elliptic parameter `m` restricted to `[0, 1)`.
///
/// Callers needing the m -> 1 asymptotics work with the complementary
/// parameter explicitly instead of pushing `m` against 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(m: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&m) {
            return Err(Error::domain("EllipticModulus", format!("m = {m} not in [0, 1)")));
        }
        Ok(EllipticModulus(m))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// m' = 1 - m
    pub fn complement(self) -> f64 {
        1.0 - self.0
    }
}

/// Complete elliptic integral of the first kind, parameter convention:
/// K(m) = ∫₀^{π/2} dθ / sqrt(1 - m sin²θ).
pub fn ellip_k<F: Float>(m: F) -> Result<F> {
    if m < F::zero() || m >= F::one() {
        return Err(Error::domain("ellip_k", "m must be in [0, 1)"));
    }
    let mut a = F::one();
    let mut b = (F::one() - m).sqrt();
    let eps = F::epsilon();
    for _ in 0..64 {
        if (a - b).abs() <= eps * a {
            break;
        }
        let an = (a + b) * lit(0.5);
        b = (a * b).sqrt();
        a = an;
    }
    Ok(lit::<F>(std::f64::consts::PI) / (a + a))
}

/// Complete elliptic integral of the second kind,
/// E(m) = ∫₀^{π/2} sqrt(1 - m sin²θ) dθ, for m in [0, 1].
pub fn ellip_e<F: Float>(m: F) -> Result<F> {
    if m < F::zero() || m > F::one() {
        return Err(Error::domain("ellip_e", "m must be in [0, 1]"));
    }
    if m == F::one() {
        return Ok(F::one());
    }
    let mut a = F::one();
    let mut b = (F::one() - m).sqrt();
    let mut c2_sum = m * lit(0.5); // 2^{-1} c_0^2
    let mut pow2 = F::one();
    let eps = F::epsilon();
    for _ in 0..64 {
        let c = (a - b) * lit(0.5);
        let an = (a + b) * lit(0.5);
        b = (a * b).sqrt();
        a = an;
        pow2 = pow2 + pow2;
        c2_sum = c2_sum + pow2 * lit::<F>(0.5) * c * c;
        if c.abs() <= eps * a {
            break;
        }
    }
    let k = lit::<F>(std::f64::consts::PI) / (a + a);
    Ok(k * (F::one() - c2_sum))
}

/// Complete elliptic integral of the third kind,
/// Π(n, m) = ∫₀^{π/2} dθ / ((1 - n sin²θ) sqrt(1 - m sin²θ)),
/// for 0 <= n < 1, 0 <= m < 1.
pub fn ellip_pi<F: Float>(n: F, m: F) -> Result<F> {
    if n < F::zero() || n >= F::one() {
        return Err(Error::domain("ellip_pi", "n must be in [0, 1)"));
    }
    if m < F::zero() || m >= F::one() {
        return Err(Error::domain("ellip_pi", "m must be in [0, 1)"));
    }
    if n == F::zero() {
        return ellip_k(m);
    }
    let mc = F::one() - m;
    let rf = carlson_rf(F::zero(), mc, F::one());
    let rj = carlson_rj(F::zero(), mc, F::one(), F::one() - n);
    Ok(rf + n * rj / lit(3.0))
}

/// Carlson symmetric integral R_F(x, y, z), duplication algorithm.
pub fn carlson_rf<F: Float>(mut x: F, mut y: F, mut z: F) -> F {
    let errtol: F = lit(0.0015);
    let third: F = lit(1.0 / 3.0);
    let (mut mu, mut dx, mut dy, mut dz);
    loop {
        let sx = x.sqrt();
        let sy = y.sqrt();
        let sz = z.sqrt();
        let lam = sx * (sy + sz) + sy * sz;
        x = (x + lam) * lit(0.25);
        y = (y + lam) * lit(0.25);
        z = (z + lam) * lit(0.25);
        mu = (x + y + z) * third;
        dx = (mu - x) / mu;
        dy = (mu - y) / mu;
        dz = (mu - z) / mu;
        if dx.abs().max(dy.abs()).max(dz.abs()) < errtol {
            break;
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    let c1: F = lit(1.0 / 24.0);
    let c2: F = lit(0.1);
    let c3: F = lit(3.0 / 44.0);
    let c4: F = lit(1.0 / 14.0);
    (F::one() + (c1 * e2 - c2 - c3 * e3) * e2 + c4 * e3) / mu.sqrt()
}

/// Carlson degenerate integral R_C(x, y) for y > 0.
pub fn carlson_rc<F: Float>(mut x: F, mut y: F) -> F {
    let errtol: F = lit(0.001);
    let third: F = lit(1.0 / 3.0);
    let (mut mu, mut s);
    loop {
        let lam = lit::<F>(2.0) * x.sqrt() * y.sqrt() + y;
        x = (x + lam) * lit(0.25);
        y = (y + lam) * lit(0.25);
        mu = (x + y + y) * third;
        s = (y - mu) / mu;
        if s.abs() < errtol {
            break;
        }
    }
    let c1: F = lit(0.3);
    let c2: F = lit(1.0 / 7.0);
    let c3: F = lit(0.375);
    let c4: F = lit(9.0 / 22.0);
    (F::one() + s * s * (c1 + s * (c2 + s * (c3 + s * c4)))) / mu.sqrt()
}

/// Carlson symmetric integral R_J(x, y, z, p) for p > 0.
pub fn carlson_rj<F: Float>(mut x: F, mut y: F, mut z: F, mut p: F) -> F {
    let errtol: F = lit(0.0015);
    let mut sum = F::zero();
    let mut fac = F::one();
    let (mut ave, mut dx, mut dy, mut dz, mut dp);
    loop {
        let sx = x.sqrt();
        let sy = y.sqrt();
        let sz = z.sqrt();
        let lam = sx * (sy + sz) + sy * sz;
        let alpha = p * (sx + sy + sz) + sx * sy * sz;
        let alpha = alpha * alpha;
        let beta = p * (p + lam) * (p + lam);
        sum = sum + fac * carlson_rc(alpha, beta);
        fac = fac * lit(0.25);
        x = (x + lam) * lit(0.25);
        y = (y + lam) * lit(0.25);
        z = (z + lam) * lit(0.25);
        p = (p + lam) * lit(0.25);
        ave = (x + y + z + p + p) * lit(0.2);
        dx = (ave - x) / ave;
        dy = (ave - y) / ave;
        dz = (ave - z) / ave;
        dp = (ave - p) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()).max(dp.abs()) < errtol {
            break;
        }
    }
    let ea = dx * (dy + dz) + dy * dz;
    let eb = dx * dy * dz;
    let ec = dp * dp;
    let ed = ea - ec * lit(3.0);
    let ee = eb + lit::<F>(2.0) * dp * (ea - ec);
    let c1: F = lit(3.0 / 14.0);
    let c2: F = lit(1.0 / 3.0);
    let c3: F = lit(3.0 / 22.0);
    let c4: F = lit(3.0 / 26.0);
    let c5: F = lit(0.75 * 3.0 / 22.0);
    let c6: F = lit(1.5 * 3.0 / 26.0);
    let c7: F = lit(0.5 / 3.0);
    let c8: F = lit(2.0 * 3.0 / 22.0);
    let poly = F::one()
        + ed * (-c1 + c5 * ed - c6 * ee)
        + eb * (c7 + dp * (-c8 + dp * c4))
        + dp * ea * (c2 - dp * c3)
        - c2 * dp * ec;
    sum * lit(3.0) + fac * poly / (ave * ave.sqrt())
}

/// Jacobi elliptic functions (sn, cn, dn) at parameter m in [0, 1].
///
/// Uses the AGM descending-phase recursion; for m within 1e-8 of 1 the
/// sech/tanh limit forms are used directly (the cnoidal machinery routes
/// there anyway, this is the backstop).
pub fn jacobi_sn_cn_dn<F: Float>(x: F, m: F) -> Result<(F, F, F)> {
    if m < F::zero() || m > F::one() {
        return Err(Error::domain("jacobi_cn", "m must be in [0, 1]"));
    }
    if m == F::zero() {
        return Ok((x.sin(), x.cos(), F::one()));
    }
    if m > F::one() - lit(1e-8) {
        let sech = F::one() / x.cosh();
        return Ok((x.tanh(), sech, sech));
    }
    // reduce by periodicity to keep the phase recursion well conditioned
    let k = ellip_k(m)?;
    let period = k * lit(4.0);
    let x = x - (x / period).round() * period;

    let mut a = [F::zero(); 64];
    let mut c = [F::zero(); 64];
    a[0] = F::one();
    let mut b = (F::one() - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while c[n].abs() > F::epsilon() * a[n] && n < 62 {
        let an = (a[n] + b) * lit(0.5);
        let cn = (a[n] - b) * lit(0.5);
        b = (a[n] * b).sqrt();
        n += 1;
        a[n] = an;
        c[n] = cn;
    }
    let mut phi = lit::<F>((1u64 << n) as f64) * a[n] * x;
    for i in (1..=n).rev() {
        let s = (c[i] / a[i] * phi.sin()).asin();
        phi = (phi + s) * lit(0.5);
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (F::one() - m * sn * sn).sqrt();
    Ok((sn, cn, dn))
}

/// Jacobi cosine amplitude cn(x, m); cn(x, 1) = sech(x).
pub fn jacobi_cn<F: Float>(x: F, m: F) -> Result<F> {
    jacobi_sn_cn_dn(x, m).map(|(_, cn, _)| cn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Frozen high-precision reference values (40-digit multiprecision
    // evaluation of the defining integrals / functions).
    const K_HALF: f64 = 1.854074677301371918433850347195260046218;
    const E_07: f64 = 1.24167056794582275087151132517238442722;
    const PI_03_06: f64 = 2.377858827830846927180222683742334095131;
    const CN_13_05: f64 = 0.3908686328094734899200532206705214874254;

    #[test]
    fn k_trivial_and_reference() {
        assert!((ellip_k(0.0f64).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((ellip_k(0.5f64).unwrap() - K_HALF).abs() < 1e-13 * K_HALF);
    }

    #[test]
    fn k_log_asymptote() {
        let mp = 1e-6f64;
        let k = ellip_k(1.0 - mp).unwrap();
        let asym = 0.5 * (16.0 / mp).ln();
        assert!((k - asym).abs() / asym < 1e-5);
    }

    #[test]
    fn e_trivial_and_reference() {
        assert!((ellip_e(0.0f64).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((ellip_e(1.0f64).unwrap() - 1.0).abs() < 1e-15);
        assert!((ellip_e(0.7f64).unwrap() - E_07).abs() < 1e-13 * E_07);
    }

    #[test]
    fn pi_reduces_to_k_and_reference() {
        for m in [0.0, 0.3, 0.9] {
            let p = ellip_pi(0.0f64, m).unwrap();
            let k = ellip_k(m).unwrap();
            assert!((p - k).abs() < 1e-12 * k);
        }
        assert!((ellip_pi(0.3f64, 0.6).unwrap() - PI_03_06).abs() < 1e-11 * PI_03_06);
    }

    #[test]
    fn pi_identity_n_eq_m() {
        // Pi(m, m) = E(m) / (1 - m)
        for m in [0.2f64, 0.6, 0.85] {
            let p = ellip_pi(m, m).unwrap();
            let e = ellip_e(m).unwrap() / (1.0 - m);
            assert!((p - e).abs() < 1e-11 * e, "m = {m}: {p} vs {e}");
        }
    }

    #[test]
    fn k_e_monotonicity_and_ordering() {
        let mut prev_k = ellip_k(0.0f64).unwrap();
        let mut prev_e = ellip_e(0.0f64).unwrap();
        for i in 1..100 {
            let m = i as f64 / 100.0;
            let k = ellip_k(m).unwrap();
            let e = ellip_e(m).unwrap();
            assert!(k > prev_k && e < prev_e);
            assert!(e <= k);
            prev_k = k;
            prev_e = e;
        }
    }

    #[test]
    fn cn_trivial_and_reference() {
        for m in [0.0f64, 0.3, 0.8] {
            assert!((jacobi_cn(0.0, m).unwrap() - 1.0).abs() < 1e-15);
        }
        let sech2 = 1.0 / 2.0f64.cosh();
        assert!((jacobi_cn(2.0f64, 1.0).unwrap() - sech2).abs() < 1e-14);
        assert!((jacobi_cn(1.3f64, 0.5).unwrap() - CN_13_05).abs() < 1e-12);
    }

    #[test]
    fn sn_cn_pythagorean() {
        for m in [0.1f64, 0.5, 0.95] {
            for i in 0..40 {
                let x = -4.0 + 0.2 * i as f64;
                let (sn, cn, _) = jacobi_sn_cn_dn(x, m).unwrap();
                assert!((sn * sn + cn * cn - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cn_periodicity() {
        for m in [0.2f64, 0.7, 0.99] {
            let k4 = 4.0 * ellip_k(m).unwrap();
            for x in [0.3f64, 1.7, -2.4] {
                let d = (jacobi_cn(x + k4, m).unwrap() - jacobi_cn(x, m).unwrap()).abs();
                assert!(d < 1e-9, "m={m} x={x} d={d:e}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(ellip_k(1.0f64).is_err());
        assert!(ellip_k(-0.1f64).is_err());
        assert!(ellip_e(1.1f64).is_err());
        assert!(ellip_pi(1.0f64, 0.5).is_err());
        assert!(ellip_pi(0.5f64, 1.0).is_err());
        assert!(EllipticModulus::new(1.0).is_err());
        assert!(EllipticModulus::new(0.999).is_ok());
    }

    #[test]
    fn works_at_f32() {
        let k = ellip_k(0.5f32).unwrap();
        assert!((k - K_HALF as f32).abs() < 1e-5);
    }
}
