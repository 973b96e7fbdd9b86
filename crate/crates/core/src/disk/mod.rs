//! Semi-analytic spectra of the unit ball with constant weights.
//!
//! Separation in polar modes e^{i k theta} reduces the eigenvalue problem to
//! one transcendental secular equation per mode:
//!
//! * Euclidean: F(lambda) = gamma sqrt(lambda) J_k'(sqrt(lambda))
//!   - (lambda - delta k^2) J_k(sqrt(lambda)), whose positive roots are the
//!   mode-k eigenvalues;
//! * hyperbolic: the radial solution comes from shooting (see
//!   [`shooting`]), and the boundary condition reads
//!   gamma R'(1) = (lambda - delta k^2 / sinh^2(1)) R(1); the tangential
//!   scale 1/sinh^2(1) is the first eigenvalue scale of the boundary circle
//!   of intrinsic circumference 2 pi sinh(1).
//!
//! With weights alpha = abar/|Omega| and beta = (1-abar)/|dOmega| the ratio
//! alpha/beta equals gamma = abar/(1-abar) |dOmega|/|Omega| in both
//! geometries, which is what enters the secular equations.
//!
//! The spectral gap is the smallest first positive root over modes
//! k = 0..=12. First roots grow with k (checked per run for k >= 1), so the
//! cutoff is safe; the run fails loudly if the check is ever violated.

pub mod bessel;
pub mod shooting;

use crate::mesh::Geometry;
use crate::scalar::{cast, cast_usize, Real};
use bessel::{bessel_j_array, BesselError};
use shooting::hyperbolic_radial;

/// Mode cutoff for gap searches.
pub const MODE_CUTOFF: usize = 12;

/// Bisection tolerance on eigenvalue roots.
pub const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum DiskError {
    #[error("alpha_bar must lie in (0,1), got {0}")]
    BadAlphaBar(f64),
    #[error("delta must be nonnegative, got {0}")]
    BadDelta(f64),
    #[error("candidate eigenvalue must be positive, got {0}")]
    BadCandidate(f64),
    #[error("bessel: {0}")]
    Bessel(#[from] BesselError),
    #[error("no sign change for mode {mode} while scanning up to lambda = {hi}")]
    NoBracket { mode: usize, hi: f64 },
    #[error(
        "mode cutoff check failed: first root {root} of mode {mode} does not exceed the \
         current minimum {minimum}"
    )]
    ModeCutoff { mode: usize, root: f64, minimum: f64 },
}

/// Constant-weight unit-ball model: geometry, bulk fraction abar in (0,1)
/// and boundary diffusion speed delta >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskModel<T> {
    pub geometry: Geometry,
    pub alpha_bar: T,
    pub delta: T,
}

impl<T: Real> DiskModel<T> {
    pub fn new(geometry: Geometry, alpha_bar: T, delta: T) -> Result<Self, DiskError> {
        if !(alpha_bar > T::zero() && alpha_bar < T::one()) {
            return Err(DiskError::BadAlphaBar(alpha_bar.to_f64().unwrap_or(f64::NAN)));
        }
        if !(delta >= T::zero()) {
            return Err(DiskError::BadDelta(delta.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(DiskModel { geometry, alpha_bar, delta })
    }

    /// |Omega| of the continuum ball.
    pub fn domain_area(&self) -> T {
        match self.geometry {
            Geometry::Euclidean => T::PI(),
            Geometry::Hyperbolic => {
                cast::<T>(2.0) * T::PI() * (cast::<T>(1.0f64.cosh()) - T::one())
            }
        }
    }

    /// |dOmega| of the continuum ball.
    pub fn domain_perimeter(&self) -> T {
        match self.geometry {
            Geometry::Euclidean => cast::<T>(2.0) * T::PI(),
            Geometry::Hyperbolic => cast::<T>(2.0) * T::PI() * cast::<T>(1.0f64.sinh()),
        }
    }

    /// gamma = abar/(1-abar) * |dOmega|/|Omega|; the reflection strength of
    /// the constant-weight generator.
    pub fn gamma(&self) -> T {
        self.alpha_bar / (T::one() - self.alpha_bar) * self.domain_perimeter()
            / self.domain_area()
    }

    /// Tangential second-order scale of the boundary circle: k^2 eigenvalues
    /// for the Euclidean unit circle, k^2/sinh^2(1) for the hyperbolic one.
    fn tangential_scale(&self) -> T {
        match self.geometry {
            Geometry::Euclidean => T::one(),
            Geometry::Hyperbolic => {
                let sh = cast::<T>(1.0f64.sinh());
                T::one() / (sh * sh)
            }
        }
    }
}

/// Value of the mode-k secular function at the candidate eigenvalue. Roots
/// in lambda are the mode-k eigenvalues of the model.
pub fn secular_value<T: Real>(
    model: &DiskModel<T>,
    mode: usize,
    candidate: T,
) -> Result<T, DiskError> {
    if !(candidate > T::zero()) {
        return Err(DiskError::BadCandidate(candidate.to_f64().unwrap_or(f64::NAN)));
    }
    let gamma = model.gamma();
    let k2 = cast_usize::<T>(mode * mode);
    let tangential = model.delta * k2 * model.tangential_scale();
    match model.geometry {
        Geometry::Euclidean => {
            let x = candidate.sqrt();
            let j = bessel_j_array(mode + 1, x)?;
            let jk = j[mode];
            let jkp = if mode == 0 { -j[1] } else { (j[mode - 1] - j[mode + 1]) / cast::<T>(2.0) };
            Ok(gamma * x * jkp - (candidate - tangential) * jk)
        }
        Geometry::Hyperbolic => {
            let (r, rp) = hyperbolic_radial(mode, candidate);
            Ok(gamma * rp - (candidate - tangential) * r)
        }
    }
}

/// First positive root of a function via expanding scan plus bisection.
fn first_positive_root<T: Real>(
    f: &dyn Fn(T) -> Result<T, DiskError>,
    mode: usize,
    initial_hi: T,
) -> Result<T, DiskError> {
    let lo_start = cast::<T>(1e-6);
    let mut hi = initial_hi;
    let max_hi = cast::<T>(2e4);
    loop {
        // scan for the first sign change
        let steps = 600;
        let mut prev_x = lo_start;
        let mut prev_f = f(prev_x)?;
        let mut bracket = None;
        for i in 1..=steps {
            let x = lo_start + (hi - lo_start) * cast_usize::<T>(i) / cast_usize::<T>(steps);
            let fx = f(x)?;
            if prev_f * fx <= T::zero() && fx != prev_f {
                bracket = Some((prev_x, x));
                break;
            }
            prev_x = x;
            prev_f = fx;
        }
        match bracket {
            Some((mut lo, mut hi_b)) => {
                let mut flo = f(lo)?;
                let tol = cast::<T>(ROOT_TOL);
                while hi_b - lo > tol {
                    let mid = (lo + hi_b) / cast::<T>(2.0);
                    let fmid = f(mid)?;
                    if flo * fmid <= T::zero() {
                        hi_b = mid;
                    } else {
                        lo = mid;
                        flo = fmid;
                    }
                }
                return Ok((lo + hi_b) / cast::<T>(2.0));
            }
            None => {
                hi = hi * cast::<T>(2.0);
                if hi > max_hi {
                    return Err(DiskError::NoBracket {
                        mode,
                        hi: hi.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
    }
}

/// First positive eigenvalue of a single polar mode.
pub fn mode_first_root<T: Real>(model: &DiskModel<T>, mode: usize) -> Result<T, DiskError> {
    let guess = {
        let k = mode as f64;
        let d = model.delta.to_f64().unwrap_or(0.0);
        cast::<T>((k + 4.0) * (k + 4.0) + d * k * k + 20.0)
    };
    first_positive_root(&|lam| secular_value(model, mode, lam), mode, guess)
}

/// The spectral gap: smallest first root over modes 0..=[`MODE_CUTOFF`],
/// excluding the trivial constant mode at lambda = 0.
pub fn disk_gap<T: Real>(model: &DiskModel<T>) -> Result<T, DiskError> {
    let mut minimum = T::infinity();
    let mut roots = Vec::with_capacity(MODE_CUTOFF + 1);
    for k in 0..=MODE_CUTOFF {
        let root = mode_first_root(model, k)?;
        if root < minimum {
            minimum = root;
        }
        roots.push(root);
    }
    // cutoff check: first roots grow with the mode for k >= 1, and the last
    // mode must already exceed the minimum
    for k in 2..=MODE_CUTOFF {
        if roots[k] < roots[k - 1] - cast::<T>(1e-6) {
            return Err(DiskError::ModeCutoff {
                mode: k,
                root: roots[k].to_f64().unwrap_or(f64::NAN),
                minimum: roots[k - 1].to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    if roots[MODE_CUTOFF] <= minimum {
        return Err(DiskError::ModeCutoff {
            mode: MODE_CUTOFF,
            root: roots[MODE_CUTOFF].to_f64().unwrap_or(f64::NAN),
            minimum: minimum.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(minimum)
}

/// The half-circle witness bound from the constant-weight example:
/// 4 abar / pi^2 (Euclidean), abar / (pi^2 (cosh 1 - 1)^2) (hyperbolic).
pub fn bound_curve<T: Real>(model: &DiskModel<T>) -> T {
    let pi2 = T::PI() * T::PI();
    match model.geometry {
        Geometry::Euclidean => cast::<T>(4.0) * model.alpha_bar / pi2,
        Geometry::Hyperbolic => {
            let c = cast::<T>(1.0f64.cosh()) - T::one();
            model.alpha_bar / (pi2 * c * c)
        }
    }
}

/// Neumann spectral gap of the unit ball: pure reflection, the gamma -> inf
/// limit of the sticky models.
pub fn neumann_gap<T: Real>(geometry: Geometry) -> Result<T, DiskError> {
    let mut minimum = T::infinity();
    for k in 0..=MODE_CUTOFF {
        let f: Box<dyn Fn(T) -> Result<T, DiskError>> = match geometry {
            Geometry::Euclidean => Box::new(move |lam: T| {
                let x = lam.sqrt();
                let j = bessel_j_array(k + 1, x)?;
                Ok(if k == 0 { -j[1] } else { (j[k - 1] - j[k + 1]) / cast::<T>(2.0) })
            }),
            Geometry::Hyperbolic => {
                Box::new(move |lam: T| Ok(hyperbolic_radial(k, lam).1))
            }
        };
        let guess = cast::<T>(((k + 4) * (k + 4) + 20) as f64);
        let root = first_positive_root(&f, k, guess)?;
        if root < minimum {
            minimum = root;
        }
    }
    Ok(minimum)
}
