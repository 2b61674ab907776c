//! Benchmark target functions on the unit interval.

use crate::coeff::FrameSlot;
use crate::error::{Error, Result};

/// A function to be approximated. Implementations may provide closed-form
/// loads against frame elements; otherwise callers fall back to quadrature.
pub trait TargetFunction {
    fn eval(&self, x: f64) -> f64;

    /// Exact inner product with the unweighted frame element at `slot`, when
    /// a closed form is available.
    fn load_value(&self, _slot: &FrameSlot) -> Option<f64> {
        None
    }

    /// Locations of algebraic singularities; quadrature grids are graded
    /// toward these points.
    fn singular_points(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// The four benchmark targets: an edge singularity, its reflection, a
/// boundary layer and a narrow spike.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    /// `x^alpha`, singular derivative at `x = 0`; requires `alpha > 1/2`.
    Singularity { alpha: f64 },
    /// `(1-x)^alpha`, singular derivative at `x = 1`; requires `alpha > 1/2`.
    Reflected { alpha: f64 },
    /// `4 s(x)(1 - s(x))` with `s(x) = (e^{ax}-1)/(e^a-1)`; steep at `x = 1`.
    BoundaryLayer { a: f64 },
    /// `x(1-x) / (1 + 10^4 (x - 1/3)^2)`.
    Spike,
}

impl TestFunction {
    pub fn singularity(alpha: f64) -> Result<Self> {
        if alpha <= 0.5 {
            return Err(Error::DimensionMismatch(format!(
                "singularity exponent must exceed 1/2, got {alpha}"
            )));
        }
        Ok(TestFunction::Singularity { alpha })
    }

    pub fn reflected(alpha: f64) -> Result<Self> {
        if alpha <= 0.5 {
            return Err(Error::DimensionMismatch(format!(
                "singularity exponent must exceed 1/2, got {alpha}"
            )));
        }
        Ok(TestFunction::Reflected { alpha })
    }

    /// Default parameters: `alpha = 3/4`, `a = 5`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "singularity" => Ok(TestFunction::Singularity { alpha: 0.75 }),
            "reflected" => Ok(TestFunction::Reflected { alpha: 0.75 }),
            "boundary_layer" => Ok(TestFunction::BoundaryLayer { a: 5.0 }),
            "spike" => Ok(TestFunction::Spike),
            other => Err(Error::DimensionMismatch(format!(
                "unknown test function `{other}` (expected singularity, reflected, boundary_layer or spike)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Singularity { .. } => "singularity",
            TestFunction::Reflected { .. } => "reflected",
            TestFunction::BoundaryLayer { .. } => "boundary_layer",
            TestFunction::Spike => "spike",
        }
    }
}

impl TargetFunction for TestFunction {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Singularity { alpha } => x.powf(alpha),
            TestFunction::Reflected { alpha } => (1.0 - x).powf(alpha),
            TestFunction::BoundaryLayer { a } => {
                let s = ((a * x).exp() - 1.0) / (a.exp() - 1.0);
                4.0 * s * (1.0 - s)
            }
            TestFunction::Spike => {
                let d = x - 1.0 / 3.0;
                x * (1.0 - x) / (1.0 + 1.0e4 * d * d)
            }
        }
    }

    fn load_value(&self, slot: &FrameSlot) -> Option<f64> {
        match *self {
            TestFunction::Singularity { alpha } => Some(monomial_load(alpha, slot)),
            TestFunction::Reflected { alpha } => Some(reflected_load(alpha, slot)),
            _ => None,
        }
    }

    fn singular_points(&self) -> Vec<f64> {
        match self {
            TestFunction::Singularity { .. } => vec![0.0],
            TestFunction::Reflected { .. } => vec![1.0],
            _ => Vec::new(),
        }
    }
}

/// `int_0^1 x^alpha psi_slot(x) dx` in closed form.
fn monomial_load(alpha: f64, slot: &FrameSlot) -> f64 {
    match slot {
        FrameSlot::Generator { degree } => 1.0 / (alpha + *degree as f64 + 1.0),
        FrameSlot::Quarklet(qi) => {
            let p = qi.degree();
            let j = qi.wavelet().level() as i32;
            let k = qi.wavelet().translation();
            let scale = 0.5f64.powi(j).powf(alpha) * (0.5f64.powi(j)).sqrt();
            scale
                * 0.5f64.powf(1.0 + alpha)
                * (shifted_monomial_integral(p, alpha, 2 * k)
                    - shifted_monomial_integral(p, alpha, 2 * k + 1))
        }
    }
}

/// `int_0^1 (1-x)^alpha psi_slot(x) dx` in closed form, by reflecting the
/// frame element.
fn reflected_load(alpha: f64, slot: &FrameSlot) -> f64 {
    match slot {
        FrameSlot::Generator { degree } => beta_integer(*degree, alpha),
        FrameSlot::Quarklet(qi) => {
            let p = qi.degree();
            let j = qi.wavelet().level() as i32;
            let k = qi.wavelet().translation();
            let mirrored = (1u64 << j) - 1 - k;
            let scale = 0.5f64.powi(j).powf(alpha) * (0.5f64.powi(j)).sqrt();
            scale
                * 0.5f64.powf(1.0 + alpha)
                * (deficient_monomial_integral(p, alpha, 2 * mirrored + 2)
                    - deficient_monomial_integral(p, alpha, 2 * mirrored + 1))
        }
    }
}

/// `J(p, alpha; m) = int_0^1 (t+m)^alpha t^p dt`.
///
/// For `m = 0` the integral is elementary. Otherwise the integrand is
/// expanded around `m+1`, giving a series with ratio `1/(m+1) <= 1/2` whose
/// terms carry beta-function factors; convergence is geometric and free of
/// cancellation.
pub(crate) fn shifted_monomial_integral(p: u32, alpha: f64, m: u64) -> f64 {
    if m == 0 {
        return 1.0 / (alpha + p as f64 + 1.0);
    }
    let z = 1.0 / (m as f64 + 1.0);
    let mut total = 0.0;
    let mut coeff = 1.0; // C(alpha, s) (-1)^s z^s
    for s in 0..512 {
        let term = coeff * beta_integer_pair(p, s);
        total += term;
        if term.abs() <= 1e-18 * total.abs() && s > 2 {
            break;
        }
        coeff *= -(alpha - s as f64) * z / (s as f64 + 1.0);
    }
    (m as f64 + 1.0).powf(alpha) * total
}

/// `K(p, alpha; m) = int_0^1 (m-t)^alpha t^p dt` for `m >= 1`.
pub(crate) fn deficient_monomial_integral(p: u32, alpha: f64, m: u64) -> f64 {
    if m == 1 {
        return beta_integer(p, alpha);
    }
    let z = 1.0 / m as f64;
    let mut total = 0.0;
    let mut coeff = 1.0;
    for s in 0..512 {
        let term = coeff / (p as f64 + s as f64 + 1.0);
        total += term;
        if term.abs() <= 1e-18 * total.abs() && s > 2 {
            break;
        }
        coeff *= -(alpha - s as f64) * z / (s as f64 + 1.0);
    }
    (m as f64).powf(alpha) * total
}

/// `B(p+1, alpha+1) = int_0^1 t^p (1-t)^alpha dt` for integer `p`.
fn beta_integer(p: u32, alpha: f64) -> f64 {
    let mut value = 1.0 / (alpha + 1.0);
    for i in 1..=p {
        value *= i as f64 / (alpha + 1.0 + i as f64);
    }
    value
}

/// `B(p+1, s+1) = p! s! / (p+s+1)!` for integer arguments.
fn beta_integer_pair(p: u32, s: u32) -> f64 {
    // descending product keeps everything in range for the small p used here
    let mut value = 1.0 / (p as f64 + s as f64 + 1.0);
    for i in 1..=s {
        value *= i as f64 / (p as f64 + i as f64);
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::FrameSlot;
    use crate::index::WaveletIndex;
    use crate::quad::integrate_adaptive;
    use approx::assert_relative_eq;

    #[test]
    fn formula_values_at_reference_points() {
        let f = TestFunction::from_name("singularity").unwrap();
        assert_eq!(f.eval(1.0), 1.0);
        let u = TestFunction::from_name("boundary_layer").unwrap();
        assert_eq!(u.eval(0.0), 0.0);
        assert_relative_eq!(u.eval(1.0), 0.0, epsilon = 1e-15);
        let v = TestFunction::from_name("spike").unwrap();
        assert_relative_eq!(v.eval(1.0 / 3.0), 2.0 / 9.0, max_relative = 1e-14);
        let g = TestFunction::from_name("reflected").unwrap();
        assert_eq!(g.eval(0.0), 1.0);
    }

    #[test]
    fn exponent_validation() {
        assert!(TestFunction::singularity(0.5).is_err());
        assert!(TestFunction::singularity(0.75).is_ok());
        assert!(TestFunction::reflected(0.4).is_err());
        assert!(TestFunction::from_name("sawtooth").is_err());
    }

    #[test]
    fn singularity_load_against_hand_value() {
        // the Haar load of x^{3/4}: (4/7)(2^{-3/4} - 1)
        let f = TestFunction::singularity(0.75).unwrap();
        let slot = FrameSlot::quarklet(0, crate::index::ROOT);
        let expected = 4.0 / 7.0 * (0.5f64.powf(0.75) - 1.0);
        assert_relative_eq!(
            f.load_value(&slot).unwrap(),
            expected,
            max_relative = 1e-14
        );
    }

    fn quad_load(target: &dyn TargetFunction, p: u32, j: u32, k: u64) -> f64 {
        let scale = 2.0f64.powf(j as f64 / 2.0);
        let width = 0.5f64.powi(j as i32);
        let lo = k as f64 * width;
        let mid = lo + 0.5 * width;
        let hi = lo + width;
        let piece = |a: f64, b: f64, sgn: f64, shift: f64| {
            integrate_adaptive(
                &|x: f64| {
                    let t = 2.0 * (2.0f64.powi(j as i32) * x - k as f64) - shift;
                    target.eval(x) * sgn * scale * t.powi(p as i32)
                },
                a,
                b,
                1e-13,
                1e-16,
                None,
            )
            .unwrap()
        };
        piece(lo, mid, 1.0, 0.0) + piece(mid, hi, -1.0, 1.0)
    }

    #[test]
    fn closed_form_loads_match_quadrature() {
        let f = TestFunction::singularity(0.75).unwrap();
        let g = TestFunction::reflected(0.75).unwrap();
        for (p, j, k) in [
            (0u32, 0u32, 0u64),
            (1, 3, 5),
            (4, 6, 33),
            (5, 9, 300),
            (2, 5, 31),
            (3, 4, 0),
        ] {
            let slot = FrameSlot::quarklet(p, WaveletIndex::new(j, k).unwrap());
            let ref_f = quad_load(&f, p, j, k);
            let got_f = f.load_value(&slot).unwrap();
            assert_relative_eq!(got_f, ref_f, max_relative = 1e-9, epsilon = 1e-15);
            // keep the reflected reference quadrature away from the x = 1
            // singularity: skip cells touching the right edge
            if k + 1 != 1 << j {
                let ref_g = quad_load(&g, p, j, k);
                let got_g = g.load_value(&slot).unwrap();
                assert_relative_eq!(got_g, ref_g, max_relative = 1e-8, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn reflected_load_mirrors_singularity_load() {
        // <(1-x)^a, psi_{p,j,k}(x)> = <x^a, psi_{p,j,k}(1-x)> and the mirror
        // of a Haar quarklet is -1 times a quarklet with reversed pieces;
        // for p = 0 the relation is exact: g-load(j,k) = -f-load(j, mirror k)
        let f = TestFunction::singularity(0.75).unwrap();
        let g = TestFunction::reflected(0.75).unwrap();
        for (j, k) in [(0u32, 0u64), (2, 1), (4, 7), (6, 63)] {
            let mirrored = (1u64 << j) - 1 - k;
            let a = g
                .load_value(&FrameSlot::quarklet(0, WaveletIndex::new(j, k).unwrap()))
                .unwrap();
            let b = f
                .load_value(&FrameSlot::quarklet(
                    0,
                    WaveletIndex::new(j, mirrored).unwrap(),
                ))
                .unwrap();
            assert_relative_eq!(a, -b, max_relative = 1e-12);
        }
    }

    #[test]
    fn generator_loads() {
        let f = TestFunction::singularity(0.75).unwrap();
        assert_relative_eq!(
            f.load_value(&FrameSlot::generator(2)).unwrap(),
            1.0 / 3.75,
            max_relative = 1e-15
        );
        let g = TestFunction::reflected(0.75).unwrap();
        // B(3, 7/4) = 2 / (1.75 * 2.75 * 3.75)
        assert_relative_eq!(
            g.load_value(&FrameSlot::generator(2)).unwrap(),
            2.0 / (1.75 * 2.75 * 3.75),
            max_relative = 1e-14
        );
    }
}
