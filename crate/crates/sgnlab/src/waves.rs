//! Periodic (cnoidal) and solitary travelling-wave families of the SGN
//! equations, their physical observables, and the linear dispersion
//! relation.

use crate::specfun::{ellip_e, ellip_k, ellip_pi, jacobi_cn};
use crate::{quad, Error, Real, Result};

/// Parameter `m` above which the cnoidal machinery refuses to evaluate and
/// callers are routed to the sech (solitary) forms.
pub const M_DEGENERATE: Real = 1.0 - 1e-8;

/// The four-parameter cnoidal wave family: roots `h1 <= h2 < h3` of the
/// cubic `P(h) = (h - h1)(h - h2)(h3 - h)`, phase speed `c`, and branch
/// `sigma` (+1 fast, -1 slow). Depth oscillates in `[h2, h3]`.
#[derive(Debug, Clone, Copy)]
pub struct CnoidalParams {
    pub h1: Real,
    pub h2: Real,
    pub h3: Real,
    pub c: Real,
    pub sigma: i8,
}

impl CnoidalParams {
    pub fn new(h1: Real, h2: Real, h3: Real, c: Real, sigma: i8) -> Result<Self> {
        if !(h1 > 0.0 && h1 <= h2 && h2 < h3) {
            return Err(Error::domain(
                "CnoidalParams",
                format!("need 0 < h1 <= h2 < h3, got ({h1}, {h2}, {h3})"),
            ));
        }
        if sigma != 1 && sigma != -1 {
            return Err(Error::domain("CnoidalParams", "sigma must be +1 or -1"));
        }
        Ok(CnoidalParams { h1, h2, h3, c, sigma })
    }

    /// Elliptic parameter m = (h3 - h2) / (h3 - h1).
    pub fn m(&self) -> Real {
        (self.h3 - self.h2) / (self.h3 - self.h1)
    }

    /// n = (h3 - h2) / h3 = 1 - h2/h3.
    pub fn n(&self) -> Real {
        1.0 - self.h2 / self.h3
    }

    pub fn amplitude(&self) -> Real {
        self.h3 - self.h2
    }

    /// sqrt(h1 h2 h3); the mass flux in the wave frame is -sigma times this.
    pub fn flux_root(&self) -> Real {
        (self.h1 * self.h2 * self.h3).sqrt()
    }

    /// P(h) = (h - h1)(h - h2)(h3 - h).
    pub fn cubic(&self, h: Real) -> Real {
        (h - self.h1) * (h - self.h2) * (self.h3 - h)
    }
}

/// Solitary wave riding on a uniform background `(hbar, ubar)`.
///
/// The depth profile is `hbar + a sech^2(...)`, speed
/// `c = ubar + sigma sqrt(hbar + a)`.
#[derive(Debug, Clone, Copy)]
pub struct SolitaryWave {
    pub hbar: Real,
    pub ubar: Real,
    pub a: Real,
    pub sigma: i8,
    pub x0: Real,
}

impl SolitaryWave {
    pub fn new(hbar: Real, ubar: Real, a: Real, sigma: i8, x0: Real) -> Result<Self> {
        if hbar <= 0.0 || a < 0.0 {
            return Err(Error::domain(
                "SolitaryWave",
                format!("need hbar > 0, a >= 0, got ({hbar}, {a})"),
            ));
        }
        if sigma != 1 && sigma != -1 {
            return Err(Error::domain("SolitaryWave", "sigma must be +1 or -1"));
        }
        Ok(SolitaryWave { hbar, ubar, a, sigma, x0 })
    }

    /// Normalized amplitude z = sqrt(a / hbar).
    pub fn z(&self) -> Real {
        (self.a / self.hbar).sqrt()
    }

    /// Speed from the speed-amplitude relation.
    pub fn speed(&self) -> Real {
        self.ubar + self.sigma as Real * (self.hbar + self.a).sqrt()
    }

    /// Characteristic width 2 hbar sqrt(hbar + a) / sqrt(3 a), the
    /// inverse of the sech^2 decay rate; infinite at a = 0.
    pub fn width(&self) -> Real {
        if self.a == 0.0 {
            Real::INFINITY
        } else {
            2.0 * self.hbar * (self.hbar + self.a).sqrt() / (3.0 * self.a).sqrt()
        }
    }

    /// SGN solitary waves above a/hbar ~ 0.8 are outside the model's
    /// physical-validity range; predictions still compute but are flagged.
    pub fn physically_valid(&self) -> bool {
        self.a / self.hbar <= 0.8
    }
}

/// Physical parameters of a cnoidal family: amplitude, wavenumber, period
/// means of depth and velocity, and the wave-frame mass flux mean.
#[derive(Debug, Clone, Copy)]
pub struct WaveObservables {
    pub a: Real,
    pub k: Real,
    pub hbar: Real,
    pub ubar: Real,
    /// mean of h (u - c) = -sigma sqrt(h1 h2 h3)
    pub hu_rel_mean: Real,
}

impl WaveObservables {
    pub fn wavelength(&self) -> Real {
        2.0 * std::f64::consts::PI / self.k
    }
}

/// Depth and velocity of the cnoidal wave at phase coordinate `xi = x - ct`:
/// `h = h2 + (h3 - h2) cn^2(theta, m)`, `u = c - sigma sqrt(h1 h2 h3) / h`.
pub fn cnoidal_profile(p: &CnoidalParams, xi: Real) -> Result<(Real, Real)> {
    let m = p.m();
    if m >= M_DEGENERATE {
        return Err(Error::domain(
            "cnoidal_profile",
            format!("m = {m} is degenerate; use solitary_profile"),
        ));
    }
    let arg = 0.5 * (3.0 * (p.h3 - p.h1) / (p.h1 * p.h2 * p.h3)).sqrt() * xi;
    let cn = jacobi_cn(arg, m)?;
    let h = p.h2 + (p.h3 - p.h2) * cn * cn;
    let u = p.c - p.sigma as Real * p.flux_root() / h;
    Ok((h, u))
}

/// Depth and velocity of the solitary wave at `(x, t)`.
pub fn solitary_profile(w: &SolitaryWave, x: Real, t: Real) -> (Real, Real) {
    if w.a == 0.0 {
        return (w.hbar, w.ubar);
    }
    // the half in the argument follows from the m -> 1 limit of the
    // cnoidal solution and is required for the wave to be an exact
    // steady SGN solution (checked against the momentum balance)
    let arg =
        0.5 * (3.0 * w.a).sqrt() / (w.hbar * (w.hbar + w.a).sqrt()) * (x - w.x0 - w.speed() * t);
    let sech = 1.0 / arg.cosh();
    let h = w.hbar + w.a * sech * sech;
    let u = w.ubar + w.sigma as Real * (w.hbar + w.a).sqrt() * (1.0 - w.hbar / h);
    (h, u)
}

/// Amplitude, wavenumber and period means of the cnoidal family in terms
/// of the complete elliptic integrals.
pub fn observables(p: &CnoidalParams) -> Result<WaveObservables> {
    let m = p.m();
    if m >= 1.0 {
        return Err(Error::domain("observables", "degenerate family m = 1"));
    }
    let k_ell = ellip_k(m)?;
    let e_ell = ellip_e(m)?;
    let n = p.n();
    let root = p.flux_root();
    let k = (3.0 * (p.h3 - p.h1) / (p.h1 * p.h2 * p.h3)).sqrt() * std::f64::consts::PI
        / (2.0 * k_ell);
    let hbar = p.h1 + (p.h3 - p.h1) * e_ell / k_ell;
    let ubar = if n == 0.0 {
        p.c - p.sigma as Real * root / p.h3
    } else {
        p.c - p.sigma as Real * root * ellip_pi(n, m)? / (p.h3 * k_ell)
    };
    Ok(WaveObservables {
        a: p.amplitude(),
        k,
        hbar,
        ubar,
        hu_rel_mean: -(p.sigma as Real) * root,
    })
}

/// Linear dispersion relation on a uniform background:
/// `omega = k ubar + sigma k sqrt(hbar / (1 + hbar^2 k^2 / 3))`.
pub fn dispersion(k: Real, hbar: Real, ubar: Real, sigma: i8) -> Real {
    k * ubar + sigma as Real * k * (hbar / (1.0 + hbar * hbar * k * k / 3.0)).sqrt()
}

/// Period average of `f(h)` over the cnoidal family:
/// weighted by 1/sqrt(P(h)) over [h2, h3]. The substitution
/// `h = h2 + (h3 - h2) sin^2(phi)` removes both endpoint square-root
/// singularities, leaving smooth integrands in phi.
pub fn period_average<F: Fn(Real) -> Real>(p: &CnoidalParams, f: F) -> Result<Real> {
    if p.m() >= 1.0 {
        return Err(Error::domain("period_average", "degenerate family m = 1"));
    }
    let span = p.h3 - p.h2;
    let h_of = |phi: Real| {
        let s = phi.sin();
        p.h2 + span * s * s
    };
    let half_pi = 0.5 * std::f64::consts::PI;
    let num = quad::integrate(|phi| f(h_of(phi)) / (h_of(phi) - p.h1).sqrt(), 0.0, half_pi, 1e-12)?;
    let den = quad::integrate(|phi| 1.0 / (h_of(phi) - p.h1).sqrt(), 0.0, half_pi, 1e-12)?;
    Ok(num / den)
}
