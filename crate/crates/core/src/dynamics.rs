//! Flows of `dp/dt = F(p)`, discrete iteration and sampled spectra.
//!
//! Everything here is floating point. The one exception is the deviation
//! from a target eigenvalue, which is bounded from the exact characteristic
//! polynomial when the Jacobian can be evaluated exactly: the float QR
//! eigenvalues of a defective matrix are only accurate to about
//! `eps^(1/k)` for a Jordan block of size `k`.

use std::fmt::Write as _;

use num_traits::ToPrimitive;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::expr::{ExprMap, Rational};
use crate::matrix::Matrix;
use crate::numeric::{self, distance, norm};

#[derive(Clone, Debug, PartialEq)]
pub enum OrbitMode {
    /// Sample times, strictly increasing, one per point.
    Continuous { times: Vec<f64> },
    /// Point `k` is the `k`-th iterate.
    Discrete,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub mode: OrbitMode,
    pub points: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    /// Set when the norm passed the divergence threshold or a value
    /// stopped being finite; the orbit ends at that point.
    pub diverged: bool,
    pub period: Option<usize>,
}

impl Orbit {
    fn start(mode: OrbitMode, p0: &[f64]) -> Self {
        Orbit {
            mode,
            points: vec![p0.to_vec()],
            norms: vec![norm(p0)],
            diverged: false,
            period: None,
        }
    }

    fn push(&mut self, p: Vec<f64>) {
        self.norms.push(norm(&p));
        self.points.push(p);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn last(&self) -> &[f64] {
        self.points.last().expect("orbits are nonempty")
    }

    /// Time (continuous) or index (discrete) of point `k`.
    pub fn stamp(&self, k: usize) -> f64 {
        match &self.mode {
            OrbitMode::Continuous { times } => times[k],
            OrbitMode::Discrete => k as f64,
        }
    }

    /// The point recorded nearest to time `t` (continuous orbits).
    pub fn at_time(&self, t: f64) -> Option<&[f64]> {
        let OrbitMode::Continuous { times } = &self.mode else {
            return None;
        };
        let k = times.partition_point(|&s| s < t);
        let k = match (k.checked_sub(1), times.get(k)) {
            (Some(j), Some(s)) if (t - times[j]).abs() < (s - t).abs() => j,
            (Some(j), None) => j,
            _ => k,
        };
        Some(&self.points[k])
    }

    /// `t,x1,...,xn,norm` with one row per point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 1..=self.dim() {
            let _ = write!(out, ",x{i}");
        }
        out.push_str(",norm\n");
        for (k, (p, r)) in self.points.iter().zip(&self.norms).enumerate() {
            let _ = write!(out, "{}", self.stamp(k));
            for x in p {
                // `+ 0.0` prints negative zero as `0`.
                let _ = write!(out, ",{}", x + 0.0);
            }
            let _ = writeln!(out, ",{r}");
        }
        out
    }
}

fn escaped(p: &[f64], threshold: f64) -> bool {
    p.iter().any(|x| !x.is_finite()) || norm(p) > threshold
}

fn axpy(p: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    p.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// Classical fixed-step RK4 for `dp/dt = field(p)` on `[t0, t1]`.
pub fn integrate_flow(field: &ExprMap, p0: &[f64], t0: f64, t1: f64, steps: usize, cfg: &RunConfig) -> Result<Orbit> {
    if steps == 0 {
        return Err(Error::Precondition("at least one integration step is required".into()));
    }
    if !(t1 > t0) {
        return Err(Error::Precondition(format!("empty time interval [{t0}, {t1}]")));
    }
    if p0.len() != field.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), found: p0.len() });
    }
    let h = (t1 - t0) / steps as f64;
    let mut times = vec![t0];
    let mut orbit = Orbit::start(OrbitMode::Continuous { times: Vec::new() }, p0);
    let mut p = p0.to_vec();
    for s in 1..=steps {
        let k1 = field.evaluate(&p)?;
        let k2 = field.evaluate(&axpy(&p, h / 2.0, &k1))?;
        let k3 = field.evaluate(&axpy(&p, h / 2.0, &k2))?;
        let k4 = field.evaluate(&axpy(&p, h, &k3))?;
        let next: Vec<f64> = (0..p.len())
            .map(|i| p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        if next.iter().any(|x| !x.is_finite()) {
            orbit.diverged = true;
            break;
        }
        times.push(t0 + s as f64 * h);
        orbit.push(next.clone());
        if escaped(&next, cfg.divergence_threshold) {
            orbit.diverged = true;
            break;
        }
        p = next;
    }
    orbit.mode = OrbitMode::Continuous { times };
    Ok(orbit)
}

/// `max_t |p'(t) + f(p(t))|` over the sample times, for a candidate
/// solution `p` of `dp/dt = -f(p)` with derivative `dp`.
pub fn verify_analytic_orbit(
    f: &ExprMap,
    p: &dyn Fn(f64) -> Vec<f64>,
    dp: &dyn Fn(f64) -> Vec<f64>,
    samples: &[f64],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in samples {
        let x = p(t);
        let fx = f.evaluate(&x)?;
        let r: Vec<f64> = dp(t).iter().zip(&fx).map(|(a, b)| a + b).collect();
        worst = worst.max(norm(&r));
    }
    Ok(worst)
}

/// `x_0 = p0, x_{i+1} = h(x_i)` for `k` steps, with the period filled in
/// from `cfg.period_tol`.
pub fn iterate_map(h: &ExprMap, p0: &[f64], k: usize, cfg: &RunConfig) -> Result<Orbit> {
    if k == 0 {
        return Err(Error::Precondition("at least one iteration is required".into()));
    }
    if p0.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: p0.len() });
    }
    let mut orbit = Orbit::start(OrbitMode::Discrete, p0);
    for _ in 0..k {
        let next = h.evaluate(orbit.last())?;
        if next.iter().any(|x| !x.is_finite()) {
            orbit.diverged = true;
            break;
        }
        let stop = escaped(&next, cfg.divergence_threshold);
        orbit.push(next);
        if stop {
            orbit.diverged = true;
            break;
        }
    }
    orbit.period = detect_period(&orbit, cfg.period_tol);
    Ok(orbit)
}

/// Smallest `p` with `|x_{i+p} - x_i| < tol` for every recorded `i` past
/// the burn-in (the first half of the orbit). Diverged and continuous
/// orbits have no period.
pub fn detect_period(orbit: &Orbit, tol: f64) -> Option<usize> {
    if orbit.diverged || orbit.mode != OrbitMode::Discrete {
        return None;
    }
    let k = orbit.len() - 1;
    let burn = k / 2;
    let pts = &orbit.points;
    (1..=k - burn).find(|&p| (burn..=k - p).all(|i| distance(&pts[i + p], &pts[i]) < tol))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub samples: usize,
    /// Points where the eigenvalue solver failed.
    pub skipped: usize,
    pub min_real_part: f64,
    pub max_modulus: f64,
    /// Largest distance of an eigenvalue from the target.
    pub max_deviation: Option<f64>,
    pub target: Option<f64>,
    pub seed: u64,
}

impl SpectralReport {
    pub fn within(&self, tol: f64) -> bool {
        self.skipped < self.samples && self.max_deviation.is_some_and(|d| d <= tol)
    }
}

/// Upper bound on `|lambda - target|` over the eigenvalues of `j`, from the
/// exact characteristic polynomial of `j - target I`.
fn exact_deviation_bound(j: &Matrix<Rational>, target: &Rational) -> f64 {
    let n = j.rows();
    let shifted = j.sub(&Matrix::identity(n).scale(target));
    let coeffs: Vec<f64> = shifted
        .char_poly_coeffs()
        .iter()
        .map(|c| c.to_f64().unwrap_or(f64::INFINITY))
        .collect();
    numeric::fujiwara_bound(&coeffs)
}

/// Eigenvalues of `J(m)` at `samples` seeded points of `bounds^n`.
///
/// The deviation at a point is the smaller of the QR estimate and, when the
/// Jacobian evaluates exactly at the (binary-exact) sample, the root bound of
/// the shifted characteristic polynomial.
pub fn spectral_report(
    m: &ExprMap,
    samples: usize,
    bounds: (f64, f64),
    target: Option<f64>,
    cfg: &RunConfig,
) -> Result<SpectralReport> {
    if samples == 0 {
        return Err(Error::Precondition("at least one sample is required".into()));
    }
    let exact_target = match target {
        Some(t) => Some(
            numeric::rational_from_f64(t)
                .ok_or_else(|| Error::Precondition(format!("target {t} is not finite")))?,
        ),
        None => None,
    };
    let n = m.dim();
    let jac = m.jacobian();
    let mut rng = numeric::seeded_rng(cfg.seed);
    let mut report = SpectralReport {
        samples,
        skipped: 0,
        min_real_part: f64::INFINITY,
        max_modulus: 0.0,
        max_deviation: target.map(|_| 0.0),
        target,
        seed: cfg.seed,
    };
    for _ in 0..samples {
        let x = numeric::uniform_point(&mut rng, n, bounds.0, bounds.1);
        let jf = crate::expr::eval_matrix(&jac, &x, m.phi())?;
        let Some(ev) = numeric::eigenvalues(&jf) else {
            report.skipped += 1;
            continue;
        };
        for z in &ev {
            report.min_real_part = report.min_real_part.min(z.re);
            report.max_modulus = report.max_modulus.max(z.norm());
        }
        if let (Some(t), Some(et)) = (target, &exact_target) {
            let mut dev = ev.iter().map(|z| (z - t).norm()).fold(0.0, f64::max);
            let xq: Option<Vec<Rational>> = x.iter().map(|&v| numeric::rational_from_f64(v)).collect();
            if let Some(Ok(jq)) = xq.map(|xq| crate::expr::eval_matrix::<Rational>(&jac, &xq, m.phi())) {
                dev = dev.min(exact_deviation_bound(&jq, et));
            }
            let worst = report.max_deviation.get_or_insert(0.0);
            *worst = worst.max(dev);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;
    use crate::fixtures::{example3, example3_orbit, example3_orbit_derivative, example5_h, example5_orbit};
    use proptest::prelude::*;

    fn cfg() -> RunConfig {
        RunConfig::default()
    }

    #[test]
    fn defaults_are_pinned() {
        let c = cfg();
        assert_eq!(c.divergence_threshold, 1e12);
        assert_eq!(c.period_tol, 1e-8);
        assert_eq!(c.spectral_samples, 200);
    }

    #[test]
    fn escaping_orbit_tracks_closed_form() {
        let field = example3("-t^2").negated();
        let orbit = integrate_flow(&field, &[18.0, -12.0, 1.0], 0.0, 2.0, 20000, &cfg()).unwrap();
        assert!(!orbit.diverged);
        assert_eq!(orbit.len(), 20001);
        let got = orbit.at_time(1.0).unwrap();
        let want = example3_orbit(1.0);
        assert!(distance(got, &want) / norm(&want) < 1e-6);

        let OrbitMode::Continuous { times } = &orbit.mode else { unreachable!() };
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        let from = times.partition_point(|&t| t < 0.5);
        assert!(orbit.norms[from..].windows(2).all(|w| w[0] < w[1]));
        assert!(*orbit.norms.last().unwrap() > 10.0 * orbit.norms[0]);
    }

    #[test]
    fn trivial_flows() {
        let decay = ExprMap::identity(3).negated();
        let orbit = integrate_flow(&decay, &[1.0; 3], 0.0, 20.0, 2000, &cfg()).unwrap();
        assert!(norm(orbit.last()) < 1e-6);

        let still = parse_map("dim 2; f1 = 0; f2 = 0;").unwrap();
        let orbit = integrate_flow(&still, &[3.0, -4.0], 0.0, 1.0, 10, &cfg()).unwrap();
        assert!(orbit.points.iter().all(|p| p == &[3.0, -4.0]));
        assert!(orbit.norms.iter().all(|&r| r == 5.0));

        assert!(integrate_flow(&still, &[0.0, 0.0], 0.0, 1.0, 0, &cfg()).is_err());
        assert!(integrate_flow(&still, &[0.0, 0.0], 1.0, 1.0, 5, &cfg()).is_err());
    }

    #[test]
    fn blow_up_is_truncated() {
        // x' = x^2 from x = 1 blows up at t = 1.
        let field = parse_map("dim 1; f1 = x1^2;").unwrap();
        let orbit = integrate_flow(&field, &[1.0], 0.0, 2.0, 20000, &cfg()).unwrap();
        assert!(orbit.diverged);
        assert!(orbit.len() < 20001);
        let OrbitMode::Continuous { times } = &orbit.mode else { unreachable!() };
        assert!(*times.last().unwrap() < 1.01);
        assert_eq!(times.len(), orbit.len());
    }

    #[test]
    fn rk4_is_fourth_order() {
        let decay = ExprMap::identity(1).negated();
        let errs: Vec<f64> = [10, 20, 40, 80]
            .iter()
            .map(|&s| {
                let o = integrate_flow(&decay, &[1.0], 0.0, 1.0, s, &cfg()).unwrap();
                (o.last()[0] - (-1f64).exp()).abs()
            })
            .collect();
        for w in errs.windows(2) {
            assert!(w[0] / w[1] >= 8.0, "{errs:?}");
        }
    }

    #[test]
    fn analytic_orbit_residual() {
        let f = example3("-t^2");
        let p = |t: f64| example3_orbit(t).to_vec();
        let dp = |t: f64| example3_orbit_derivative(t).to_vec();
        assert!(verify_analytic_orbit(&f, &p, &dp, &[0.0, 0.5, 1.0]).unwrap() < 1e-9);
        // At t = 0: f(18, -12, 1) = (-18, 24, 1) cancels (18, -24, -1).
        assert_eq!(f.evaluate(&[18.0, -12.0, 1.0]).unwrap(), vec![-18.0, 24.0, 1.0]);
        for c in [0.5, 1.001, 2.0] {
            let scaled = |t: f64| example3_orbit(t).iter().map(|x| c * x).collect();
            let dscaled = |t: f64| example3_orbit_derivative(t).iter().map(|x| c * x).collect();
            assert!(verify_analytic_orbit(&f, &scaled, &dscaled, &[0.0, 0.5, 1.0]).unwrap() > 1e-3);
        }
    }

    #[test]
    fn period_three_orbit() {
        let h = example5_h("t");
        let cycle = example5_orbit().map(|p| p.map(|x| x as f64));
        let orbit = iterate_map(&h, &cycle[0], 30, &cfg()).unwrap();
        assert_eq!(orbit.period, Some(3));
        for (k, p) in orbit.points.iter().enumerate() {
            assert_eq!(p.as_slice(), cycle[k % 3].as_slice());
        }
        for p in &cycle {
            assert_eq!(iterate_map(&h, p, 30, &cfg()).unwrap().period, Some(3));
        }
        assert_eq!(iterate_map(&h, &[0.0; 3], 30, &cfg()).unwrap().period, Some(1));
        assert_eq!(iterate_map(&ExprMap::identity(3), &[0.3, -2.0, 7.0], 5, &cfg()).unwrap().period, Some(1));
    }

    #[test]
    fn aperiodic_and_divergent_iteration() {
        let shift = parse_map("dim 1; f1 = x1 + 1;").unwrap();
        assert_eq!(iterate_map(&shift, &[0.0], 20, &cfg()).unwrap().period, None);
        let square = parse_map("dim 1; f1 = x1^2;").unwrap();
        let orbit = iterate_map(&square, &[2.0], 50, &cfg()).unwrap();
        assert!(orbit.diverged);
        assert_eq!(orbit.period, None);
    }

    #[test]
    fn csv_layout() {
        let h = example5_h("t");
        let orbit = iterate_map(&h, &[-1.0, 1.0, -1.0], 2, &cfg()).unwrap();
        let csv = orbit.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,x3,norm");
        assert_eq!(lines[2], "1,0,-1,0,1");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn spectra() {
        let c = cfg();
        let neg = example3("-t^2").negated();
        let r = spectral_report(&neg, 200, c.sample_box, Some(-1.0), &c).unwrap();
        assert_eq!(r.skipped, 0);
        assert!(r.within(1e-8), "{r:?}");
        assert!(r.min_real_part < -0.99);

        let r = spectral_report(&ExprMap::identity(4), 20, c.sample_box, Some(1.0), &c).unwrap();
        assert_eq!(r.max_deviation, Some(0.0));
        assert_eq!(r.max_modulus, 1.0);

        let r = spectral_report(&example5_h("t"), 200, c.sample_box, Some(0.0), &c).unwrap();
        assert!(r.within(1e-8), "{r:?}");

        // A rotation has eigenvalues +-i: far from any real target.
        let rot = parse_map("dim 2; f1 = -x2; f2 = x1;").unwrap();
        let r = spectral_report(&rot, 10, c.sample_box, Some(0.0), &c).unwrap();
        assert!((r.max_deviation.unwrap() - 1.0).abs() < 1e-12);
        assert!(!r.within(1e-8));
    }

    #[test]
    fn bounded_image_map_has_a_fixed_point() {
        let f = crate::fixtures::bounded_example();
        let report = crate::infinity::bounded_image_fixed_points(&f, &cfg()).unwrap();
        assert!(!report.points.is_empty());
        for p in &report.points {
            assert!(distance(&f.evaluate(p).unwrap(), p) < 1e-8);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // Cyclic coordinate shifts have every orbit periodic; the detected
        // period must not depend on which cycle point the orbit starts from.
        #[test]
        fn period_is_shift_invariant(start in prop::collection::vec(-3i32..=3, 2..=5)) {
            let n = start.len();
            let comps: Vec<String> = (0..n).map(|i| format!("f{} = x{};", i + 1, (i + 1) % n + 1)).collect();
            let h = parse_map(&format!("dim {n}; {}", comps.join(" "))).unwrap();
            let p0: Vec<f64> = start.iter().map(|&x| x as f64).collect();
            let orbit = iterate_map(&h, &p0, 4 * n, &cfg()).unwrap();
            let p = orbit.period.expect("permutation orbits are periodic");
            prop_assert!(n % p == 0);
            for q in &orbit.points[..p] {
                prop_assert_eq!(iterate_map(&h, q, 4 * n, &cfg()).unwrap().period, Some(p));
            }
        }
    }
}
