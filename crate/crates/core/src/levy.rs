//! Truncated LePage-series model of an isotropic complex α-stable Lévy
//! motion on `[-M, M]`, with pathwise single and double integration.
//!
//! A [`JumpMeasure`] is a finite set of atoms `(location, value)` sorted by
//! location. Against it, `int f dL` is the atomic sum `sum_i f(s_i) z_i` and the
//! ordered double integral `iint f(s,u) dconj(L)_u dL_s` over `{u < s}` is
//! `sum_{k<i} f(s_i, s_k) conj(z_k) z_i`.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{param, Error, Result};
use crate::quadrature::{integrate_line, integrate_lower_triangle, QuadratureSpec};
use crate::rng::{poisson_arrivals, uniform_angle, RngStream};

/// A single jump of the driving motion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub value: Complex64,
}

/// Finite atomic representation of the driving Lévy motion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpMeasure {
    half_width: f64,
    alpha: f64,
    calibration: f64,
    atoms: Vec<Atom>,
}

/// `C_alpha = (int_0^inf x^{-alpha} sin x dx)^{-1}`, the LePage normalising
/// constant for real symmetric series.
fn lepage_c(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        2.0 / std::f64::consts::PI
    } else {
        (1.0 - alpha) / (gamma(2.0 - alpha) * (std::f64::consts::FRAC_PI_2 * alpha).cos())
    }
}

/// `E|cos(theta)|^alpha` for `theta` uniform on the circle.
fn abs_cos_moment(alpha: f64) -> f64 {
    gamma(0.5 * (alpha + 1.0)) / (std::f64::consts::PI.sqrt() * gamma(0.5 * alpha + 1.0))
}

/// Series scale constant for an isotropic complex LePage sum over a window of
/// unit length, so that `k * sum_i Γ_i^{-1/alpha} e^{iθ_i} f(U_i)` has the law of
/// `int f dL` with `L` of unit scale.
pub fn series_constant(alpha: f64) -> f64 {
    (lepage_c(alpha) / abs_cos_moment(alpha)).powf(1.0 / alpha)
}

fn check_model_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(param("alpha", alpha, "must lie in (0, 2)"));
    }
    Ok(())
}

impl JumpMeasure {
    /// Draw a LePage-series measure with `n_terms` atoms on `[-half_width, half_width]`.
    pub fn build(alpha: f64, half_width: f64, n_terms: usize, rng: &mut RngStream) -> Result<Self> {
        check_model_alpha(alpha)?;
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(param("half_width", half_width, "must be positive and finite"));
        }
        if n_terms == 0 {
            return Err(param("n_terms", 0.0, "must be at least 1"));
        }
        let calibration = (2.0 * half_width).powf(1.0 / alpha) * series_constant(alpha);
        let arrivals = poisson_arrivals(n_terms, rng)?;
        let mut atoms: Vec<Atom> = arrivals
            .iter()
            .map(|&g| {
                let theta = uniform_angle(rng);
                let location = half_width * (2.0 * rng.uniform() - 1.0);
                Atom {
                    location,
                    value: Complex64::from_polar(calibration * g.powf(-1.0 / alpha), theta),
                }
            })
            .collect();
        sort_atoms(&mut atoms);
        while let Some(i) = first_tie(&atoms) {
            let old = atoms[i].location;
            atoms[i].location = half_width * (2.0 * rng.uniform() - 1.0);
            log::warn!(
                "jump locations tied at {old:e} (stream {}:{}); resampled to {:e}",
                rng.master_seed(),
                rng.stream_index(),
                atoms[i].location
            );
            sort_atoms(&mut atoms);
        }
        Ok(Self {
            half_width,
            alpha,
            calibration,
            atoms,
        })
    }

    /// Measure from explicit atoms (diagnostics and synthetic tests).
    ///
    /// Atoms are sorted by location; tied or out-of-window locations are rejected.
    pub fn from_atoms(alpha: f64, half_width: f64, mut atoms: Vec<Atom>) -> Result<Self> {
        check_model_alpha(alpha)?;
        if !(half_width > 0.0) {
            return Err(param("half_width", half_width, "must be positive"));
        }
        if let Some(a) = atoms
            .iter()
            .find(|a| !(a.location.abs() <= half_width) || !a.value.re.is_finite() || !a.value.im.is_finite())
        {
            return Err(param("location", a.location, "atom outside the window or non-finite"));
        }
        sort_atoms(&mut atoms);
        if let Some(i) = first_tie(&atoms) {
            return Err(param("location", atoms[i].location, "tied atom locations"));
        }
        let calibration = (2.0 * half_width).powf(1.0 / alpha) * series_constant(alpha);
        Ok(Self {
            half_width,
            alpha,
            calibration,
            atoms,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn calibration(&self) -> f64 {
        self.calibration
    }

    pub fn n_terms(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Push-forward under `s -> s / a` together with `z -> a^{-1/alpha} z`,
    /// i.e. the atoms of `(L_{t a})` rescaled to unit scale again.
    pub fn rescaled(&self, a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(param("a", a, "must be positive"));
        }
        let factor = a.powf(-1.0 / self.alpha);
        let atoms = self
            .atoms
            .iter()
            .map(|at| Atom {
                location: at.location / a,
                value: at.value * factor,
            })
            .collect();
        Ok(Self {
            half_width: self.half_width / a,
            alpha: self.alpha,
            calibration: self.calibration * factor,
            atoms,
        })
    }

    /// CSV with columns `location,re,im`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "location,re,im")?;
        for a in &self.atoms {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", a.location, a.value.re, a.value.im)?;
        }
        Ok(())
    }

    /// Inverse of [`JumpMeasure::write_csv`].
    pub fn read_csv<R: BufRead>(alpha: f64, half_width: f64, input: R) -> Result<Self> {
        let mut atoms = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if fields.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 columns", lineno + 1)));
            }
            atoms.push(Atom {
                location: fields[0],
                value: Complex64::new(fields[1], fields[2]),
            });
        }
        Self::from_atoms(alpha, half_width, atoms)
    }
}

fn sort_atoms(atoms: &mut [Atom]) {
    atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
}

fn first_tie(atoms: &[Atom]) -> Option<usize> {
    atoms
        .windows(2)
        .position(|w| w[0].location == w[1].location)
        .map(|i| i + 1)
}

/// Univariate kernel with singularity metadata.
pub struct UnaryKernel<F> {
    eval: F,
    pub singular_points: Vec<f64>,
}

impl<F> UnaryKernel<F>
where
    F: Fn(f64) -> Result<Complex64>,
{
    pub fn new(eval: F) -> Self {
        Self {
            eval,
            singular_points: Vec::new(),
        }
    }

    pub fn with_singular_points(mut self, points: Vec<f64>) -> Self {
        self.singular_points = points;
        self
    }

    pub fn eval(&self, s: f64) -> Result<Complex64> {
        (self.eval)(s)
    }
}

/// Where a bivariate kernel may blow up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Singularity {
    /// The line `s = x`.
    SAxis(f64),
    /// The line `u = x`.
    UAxis(f64),
    /// The line `s - u = x`.
    Diagonal(f64),
}

/// Bivariate kernel `f(s, u)` supported on the strict lower triangle `{u < s}`.
pub struct PairKernel<F> {
    eval: F,
    pub singularities: Vec<Singularity>,
    /// Lines across which the kernel is continuous but not smooth.
    pub kinks: Vec<Singularity>,
}

impl<F> PairKernel<F>
where
    F: Fn(f64, f64) -> Result<Complex64>,
{
    pub fn new(eval: F) -> Self {
        Self {
            eval,
            singularities: Vec::new(),
            kinks: Vec::new(),
        }
    }

    pub fn with_singularities(mut self, s: Vec<Singularity>) -> Self {
        self.singularities = s;
        self
    }

    pub fn with_kinks(mut self, k: Vec<Singularity>) -> Self {
        self.kinks = k;
        self
    }

    /// Kernel value; zero outside `{u < s}`.
    pub fn eval(&self, s: f64, u: f64) -> Result<Complex64> {
        if u >= s {
            return Ok(Complex64::new(0.0, 0.0));
        }
        (self.eval)(s, u)
    }
}

fn finite_at<T>(v: Result<T>, location: f64) -> Result<T> {
    v.map_err(|e| match e {
        Error::Singular { .. } | Error::SingularPair { .. } => Error::Singular { location },
        other => other,
    })
}

/// `int f dL = sum_i f(s_i) z_i`.
pub fn integrate<F>(jm: &JumpMeasure, f: F) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    jm.atoms.iter().try_fold(Complex64::new(0.0, 0.0), |acc, a| {
        let v = finite_at(f(a.location), a.location)?;
        Ok(acc + v * a.value)
    })
}

/// The four real stochastic integrals of `Re f` and `Im f` against the real
/// and imaginary parts `L1`, `L2` of the driving motion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealParts {
    pub re_f_dl1: f64,
    pub im_f_dl2: f64,
    pub re_f_dl2: f64,
    pub im_f_dl1: f64,
}

impl RealParts {
    /// `(int Re f dL1 - int Im f dL2) + i (int Re f dL2 + int Im f dL1)`.
    pub fn combine(&self) -> Complex64 {
        Complex64::new(self.re_f_dl1 - self.im_f_dl2, self.re_f_dl2 + self.im_f_dl1)
    }
}

pub fn integrate_real_parts<F>(jm: &JumpMeasure, f: F) -> Result<RealParts>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let mut parts = RealParts {
        re_f_dl1: 0.0,
        im_f_dl2: 0.0,
        re_f_dl2: 0.0,
        im_f_dl1: 0.0,
    };
    for a in &jm.atoms {
        let v = finite_at(f(a.location), a.location)?;
        parts.re_f_dl1 += v.re * a.value.re;
        parts.im_f_dl2 += v.im * a.value.im;
        parts.re_f_dl2 += v.re * a.value.im;
        parts.im_f_dl1 += v.im * a.value.re;
    }
    Ok(parts)
}

/// `int phi d([L1] + [L2]) = sum_i phi(s_i) |z_i|^2`.
pub fn integrate_qv<F>(jm: &JumpMeasure, phi: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    jm.atoms.iter().try_fold(0.0, |acc, a| {
        let w = finite_at(phi(a.location), a.location)?;
        Ok(acc + w * a.value.norm_sqr())
    })
}

/// Total quadratic variation `[L1] + [L2]` of the measure.
pub fn quadratic_variation(jm: &JumpMeasure) -> f64 {
    jm.atoms.iter().map(|a| a.value.norm_sqr()).sum()
}

/// `iint_{u<s} f(s,u) dconj(L)_u dL_s = sum_{k<i} f(s_i, s_k) conj(z_k) z_i`.
///
/// Quadratic in the number of atoms.
pub fn double_integrate<F>(jm: &JumpMeasure, f: F) -> Result<Complex64>
where
    F: Fn(f64, f64) -> Result<Complex64>,
{
    let atoms = &jm.atoms;
    double_integrate_indexed(jm, |i, k| f(atoms[i].location, atoms[k].location))
}

/// [`double_integrate`] with the kernel addressed by atom index `(i, k)`,
/// `k < i`, so that per-atom factors can be precomputed.
pub fn double_integrate_indexed<F>(jm: &JumpMeasure, f: F) -> Result<Complex64>
where
    F: Fn(usize, usize) -> Result<Complex64>,
{
    let atoms = &jm.atoms;
    let mut total = Complex64::new(0.0, 0.0);
    for (i, outer) in atoms.iter().enumerate() {
        let mut row = Complex64::new(0.0, 0.0);
        for (k, inner) in atoms[..i].iter().enumerate() {
            let v = f(i, k).map_err(|e| match e {
                Error::Singular { .. } | Error::SingularPair { .. } => Error::SingularPair {
                    s: outer.location,
                    u: inner.location,
                },
                other => other,
            })?;
            row += v * inner.value.conj();
        }
        total += row * outer.value;
    }
    Ok(total)
}

/// Graded-quadrature estimate of
/// `iint_{u<s} |f|^alpha [1 + log+(|f| / (psi(s) psi(u)))] ds du`
/// over `[-Λ, Λ]^2`, the existence condition for the double integral of `f`.
///
/// Cells are graded toward the kernel's declared singularities and kinks and
/// toward the kink of `psi` at `±1`. `psi` must satisfy `int psi^alpha = 1`,
/// which is checked to 1%.
pub fn condition_value<F, P>(f: &PairKernel<F>, alpha: f64, psi: P, quad: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<Complex64>,
    P: Fn(f64) -> f64,
{
    check_model_alpha(alpha)?;
    let mass = psi_alpha_mass(&psi, alpha)?;
    if (mass - 1.0).abs() > 0.01 {
        return Err(param("psi", mass, "int psi^alpha must equal 1 within 1%"));
    }
    let mut lines: Vec<Singularity> = f.singularities.iter().chain(&f.kinks).copied().collect();
    lines.extend([
        Singularity::SAxis(-1.0),
        Singularity::SAxis(1.0),
        Singularity::UAxis(-1.0),
        Singularity::UAxis(1.0),
    ]);
    integrate_lower_triangle(
        |s, u| {
            let Ok(v) = f.eval(s, u) else {
                return f64::NAN;
            };
            let m = v.norm();
            if m == 0.0 {
                return 0.0;
            }
            let ratio = m / (psi(s) * psi(u));
            m.powf(alpha) * (1.0 + ratio.ln().max(0.0))
        },
        quad,
        &lines,
    )
}

/// `int psi^alpha` over the whole line using purely geometric cells.
pub fn psi_alpha_mass<P: Fn(f64) -> f64>(psi: P, alpha: f64) -> Result<f64> {
    integrate_line(
        |s| psi(s).powf(alpha),
        -1e300,
        1e300,
        &[-1.0, 1.0],
        1e-12,
        32,
        f64::INFINITY,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kernel_r, ModelParams};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: f64, b: f64, scale: f64) -> f64 {
        (a - b).abs() / scale.max(f64::MIN_POSITIVE)
    }

    #[test]
    fn build_validates_parameters() {
        let mut rng = RngStream::new(1, 0);
        assert!(JumpMeasure::build(2.0, 1.0, 10, &mut rng).is_err());
        assert!(JumpMeasure::build(1.0, 0.0, 10, &mut rng).is_err());
        assert!(JumpMeasure::build(1.0, 1.0, 0, &mut rng).is_err());
    }

    #[test]
    fn built_measure_invariants() {
        let mut rng = RngStream::new(2, 3);
        let jm = JumpMeasure::build(1.2, 10.0, 5000, &mut rng).unwrap();
        assert_eq!(jm.n_terms(), 5000);
        assert!(jm.atoms().windows(2).all(|w| w[0].location < w[1].location));
        assert!(jm.atoms().iter().all(|a| a.location.abs() <= 10.0));
        let qv = quadratic_variation(&jm);
        assert!(qv.is_finite() && qv > 0.0);
    }

    #[test]
    fn single_atom_integral() {
        let mut rng = RngStream::new(9, 0);
        let jm = JumpMeasure::build(0.9, 3.0, 1, &mut rng).unwrap();
        let a = jm.atoms()[0];
        let f = |s: f64| Ok(c(s.cos(), 2.0));
        assert_eq!(integrate(&jm, f).unwrap(), f(a.location).unwrap() * a.value);
        assert_eq!(integrate(&jm, |_| Ok(c(1.0, 0.0))).unwrap(), a.value);
        assert_eq!(double_integrate(&jm, |_, _| Ok(c(1.0, 1.0))).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn two_atom_double_integral() {
        let jm = JumpMeasure::from_atoms(
            1.0,
            5.0,
            vec![
                Atom { location: 2.0, value: c(0.5, -1.0) },
                Atom { location: -1.0, value: c(2.0, 3.0) },
            ],
        )
        .unwrap();
        let f = |s: f64, u: f64| Ok(c(s, u * u));
        let expected = f(2.0, -1.0).unwrap() * c(2.0, 3.0).conj() * c(0.5, -1.0);
        assert_eq!(double_integrate(&jm, f).unwrap(), expected);
    }

    #[test]
    fn quadratic_variation_values() {
        let empty = JumpMeasure::from_atoms(1.0, 1.0, vec![]).unwrap();
        assert_eq!(quadratic_variation(&empty), 0.0);
        let one = JumpMeasure::from_atoms(1.0, 1.0, vec![Atom { location: 0.1, value: c(3.0, 4.0) }]).unwrap();
        assert_eq!(quadratic_variation(&one), 25.0);
        assert_eq!(integrate_qv(&one, |_| Ok(1.0)).unwrap(), 25.0);
    }

    #[test]
    fn qv_matches_integrate_qv_and_is_additive() {
        let mut rng = RngStream::new(4, 4);
        let jm = JumpMeasure::build(1.5, 2.0, 300, &mut rng).unwrap();
        assert_eq!(quadratic_variation(&jm), integrate_qv(&jm, |_| Ok(1.0)).unwrap());
        let (left, right): (Vec<Atom>, Vec<Atom>) = jm.atoms().iter().partition(|a| a.location < 0.0);
        let phi = |s: f64| Ok(1.0 + s * s);
        let l = integrate_qv(&JumpMeasure::from_atoms(1.5, 2.0, left).unwrap(), phi).unwrap();
        let r = integrate_qv(&JumpMeasure::from_atoms(1.5, 2.0, right).unwrap(), phi).unwrap();
        let all = integrate_qv(&jm, phi).unwrap();
        assert!(rel(l + r, all, all) < 1e-12);
    }

    #[test]
    fn singular_evaluation_names_location() {
        let p = ModelParams::new(1.2, 0.75).unwrap();
        let jm = JumpMeasure::from_atoms(1.2, 1.0, vec![
            Atom { location: 0.0, value: c(1.0, 0.0) },
            Atom { location: 0.5, value: c(1.0, 0.0) },
        ])
        .unwrap();
        assert_eq!(
            integrate(&jm, |s| kernel_r(s, &p)),
            Err(Error::Singular { location: 0.0 })
        );
        let err = double_integrate(&jm, |s, u| Ok(kernel_r(s, &p)? * kernel_r(u, &p)?));
        assert_eq!(err, Err(Error::SingularPair { s: 0.5, u: 0.0 }));
    }

    #[test]
    fn from_atoms_rejects_ties_and_outliers() {
        let a = Atom { location: 0.25, value: c(1.0, 0.0) };
        assert!(JumpMeasure::from_atoms(1.0, 1.0, vec![a, a]).is_err());
        let far = Atom { location: 2.0, value: c(1.0, 0.0) };
        assert!(JumpMeasure::from_atoms(1.0, 1.0, vec![far]).is_err());
    }

    #[test]
    fn linearity() {
        let mut rng = RngStream::new(10, 1);
        let jm = JumpMeasure::build(1.1, 4.0, 500, &mut rng).unwrap();
        let f = |s: f64| Ok(Complex64::from_polar(1.0 + s.abs(), s));
        let g = |s: f64| Ok(c(s.sin(), 0.3));
        let (a, b) = (c(0.7, -2.0), c(-1.5, 0.25));
        let lhs = integrate(&jm, |s| Ok(a * f(s)? + b * g(s)?)).unwrap();
        let rhs = a * integrate(&jm, f).unwrap() + b * integrate(&jm, g).unwrap();
        let scale: f64 = jm.atoms().iter().map(|x| x.value.norm() * (1.0 + x.location.abs())).sum();
        assert!((lhs - rhs).norm() <= 1e-12 * scale * 3.0);
    }

    #[test]
    fn four_real_integrals_recombine() {
        let p = ModelParams::new(1.2, 0.75).unwrap();
        for stream in 0..20 {
            let mut rng = RngStream::new(31, stream);
            let jm = JumpMeasure::build(1.2, 10.0, 1000, &mut rng).unwrap();
            let f = |s: f64| kernel_r(s, &p);
            let direct = integrate(&jm, f).unwrap();
            let parts = integrate_real_parts(&jm, f).unwrap().combine();
            let scale: f64 = jm.atoms().iter().map(|a| kernel_r(a.location, &p).unwrap().norm() * a.value.norm()).sum();
            assert!((direct - parts).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn rescaling_maps_window_and_values() {
        let mut rng = RngStream::new(12, 0);
        let jm = JumpMeasure::build(1.2, 10.0, 50, &mut rng).unwrap();
        let half = jm.rescaled(2.0).unwrap();
        assert_eq!(half.half_width(), 5.0);
        let f = 2f64.powf(-1.0 / 1.2);
        for (a, b) in jm.atoms().iter().zip(half.atoms()) {
            assert_eq!(b.location, a.location / 2.0);
            assert_eq!(b.value, a.value * f);
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = RngStream::new(13, 0);
        let jm = JumpMeasure::build(0.8, 3.0, 64, &mut rng).unwrap();
        let mut buf = Vec::new();
        jm.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("location,re,im\n"));
        let back = JumpMeasure::read_csv(0.8, 3.0, buf.as_slice()).unwrap();
        assert_eq!(back.atoms(), jm.atoms());
    }

    #[test]
    fn series_constant_at_alpha_one() {
        // alpha = 1: C = 2/pi, E|cos| = 2/pi, so the constant is 1.
        assert!((series_constant(1.0) - 1.0).abs() < 1e-12);
    }

    fn h_kernel(p: ModelParams) -> PairKernel<impl Fn(f64, f64) -> Result<Complex64>> {
        PairKernel::new(move |s, u| crate::kernels::kernel_h(s, u, &p))
            .with_singularities(vec![Singularity::SAxis(0.0), Singularity::UAxis(0.0)])
    }

    #[test]
    fn psi_mass_is_one() {
        for (r_exp, alpha) in [(1.0, 1.2), (1.0, 1.5), (2.0, 0.8)] {
            let m = psi_alpha_mass(|s| crate::kernels::psi(s, r_exp, alpha).unwrap(), alpha).unwrap();
            assert!((m - 1.0).abs() < 0.01, "r = {r_exp}, alpha = {alpha}: {m}");
        }
    }

    #[test]
    fn condition_value_of_zero_kernel() {
        let quad = QuadratureSpec::new(5.0, 1e-4, 8).unwrap();
        let zero = PairKernel::new(|_, _| Ok(Complex64::new(0.0, 0.0)));
        let v = condition_value(&zero, 1.2, |s| crate::kernels::psi(s, 1.0, 1.2).unwrap(), &quad).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn condition_value_rejects_unnormalised_psi() {
        let quad = QuadratureSpec::new(5.0, 1e-4, 8).unwrap();
        let zero = PairKernel::new(|_, _| Ok(Complex64::new(0.0, 0.0)));
        assert!(condition_value(&zero, 1.2, |s| 2.0 * crate::kernels::psi(s, 1.0, 1.2).unwrap(), &quad).is_err());
    }

    #[test]
    fn condition_value_grows_with_domain_and_refinement() {
        let p = ModelParams::new(1.2, 0.75).unwrap();
        let f = h_kernel(p);
        let psi = |s| crate::kernels::psi(s, 1.0, 1.2).unwrap();
        let quad = QuadratureSpec::new(4.0, 1e-4, 8).unwrap();
        let base = condition_value(&f, 1.2, psi, &quad).unwrap();
        let wider = condition_value(&f, 1.2, psi, &quad.with_outer_cutoff(8.0).unwrap()).unwrap();
        let finer = condition_value(&f, 1.2, psi, &quad.with_inner_cutoff(1e-6).unwrap()).unwrap();
        assert!(base > 0.0 && base.is_finite());
        assert!(wider >= base, "{wider} < {base}");
        assert!(finer >= base, "{finer} < {base}");
    }

    #[test]
    fn condition_value_reports_failing_cell() {
        let quad = QuadratureSpec::new(3.0, 1e-4, 8).unwrap();
        let bad = PairKernel::new(|s, u| {
            if s > 1.5 {
                Err(Error::SingularPair { s, u })
            } else {
                Ok(Complex64::new(1.0, 0.0))
            }
        });
        let err = condition_value(&bad, 1.2, |s| crate::kernels::psi(s, 1.0, 1.2).unwrap(), &quad);
        assert!(matches!(err, Err(Error::Quadrature { s, .. }) if s > 1.5));
    }
}
