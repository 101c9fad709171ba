//! Floating-point helpers: seeded sampling, linear solves, damped Newton,
//! eigenvalues and root bounds. Nothing here certifies anything.

use nalgebra::{Complex, DMatrix, DVector, Schur};
use num_traits::{FromPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::expr::{Poly, Rational};
use crate::matrix::Matrix;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_point(rng: &mut SeededRng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// A random rational `p/q` with `|p| <= num_bound` and `1 <= q <= den_bound`.
pub fn random_rational(rng: &mut SeededRng, num_bound: i64, den_bound: i64) -> Rational {
    let p = rng.gen_range(-num_bound..=num_bound);
    let q = rng.gen_range(1..=den_bound);
    Rational::new(p.into(), q.into())
}

pub fn random_rational_point(rng: &mut SeededRng, n: usize, num_bound: i64, den_bound: i64) -> Vec<Rational> {
    (0..n).map(|_| random_rational(rng, num_bound, den_bound)).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Exact binary value of a finite float.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_f64(x)
}

fn to_dmatrix(m: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| *m.get(i, j))
}

pub fn solve(m: &Matrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let lu = to_dmatrix(m).lu();
    lu.solve(&DVector::from_column_slice(b))
        .map(|x| x.iter().copied().collect())
}

pub fn eigenvalues(m: &Matrix<f64>) -> Option<Vec<Complex<f64>>> {
    if m.entries().any(|x| !x.is_finite()) {
        return None;
    }
    let n = m.rows();
    let (_, t) = Schur::try_new(to_dmatrix(m), f64::EPSILON, 10_000 * n.max(1))?.unpack();
    // Read the quasi-triangular blocks directly: nalgebra's own extraction
    // assumes every 2x2 block has a complex pair and returns NaN when a
    // nearly defective block has two real eigenvalues.
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        if k + 1 == n || t[(k + 1, k)] == 0.0 {
            out.push(Complex::new(t[(k, k)], 0.0));
            k += 1;
            continue;
        }
        let half_tr = 0.5 * (t[(k, k)] + t[(k + 1, k + 1)]);
        let half_diff = 0.5 * (t[(k, k)] - t[(k + 1, k + 1)]);
        let discr = half_diff * half_diff + t[(k + 1, k)] * t[(k, k + 1)];
        let root = if discr >= 0.0 {
            Complex::new(discr.sqrt(), 0.0)
        } else {
            Complex::new(0.0, (-discr).sqrt())
        };
        out.push(Complex::new(half_tr, 0.0) + root);
        out.push(Complex::new(half_tr, 0.0) - root);
        k += 2;
    }
    out.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(out)
}

/// Fujiwara's bound on the moduli of the roots of the monic polynomial
/// `t^n + c[0] t^{n-1} + ... + c[n-1]`.
pub fn fujiwara_bound(coeffs: &[f64]) -> f64 {
    let n = coeffs.len();
    let mut best: f64 = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        let mut c = c.abs();
        if k + 1 == n {
            c /= 2.0;
        }
        best = best.max(c.powf(1.0 / (k + 1) as f64));
    }
    2.0 * best
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOutcome {
    pub point: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Damped Newton for `g(x) = 0`: full steps are halved until the residual
/// norm decreases. Returns `None` when the Jacobian is singular, the step
/// stalls, or the iteration budget runs out.
pub fn damped_newton(
    g: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    jac: &dyn Fn(&[f64]) -> Result<Matrix<f64>>,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Option<NewtonOutcome> {
    let mut x = start.to_vec();
    let mut gx = g(&x).ok()?;
    let mut r = norm(&gx);
    for it in 0..max_iter {
        if r < tol {
            return Some(NewtonOutcome { point: x, residual: r, iterations: it });
        }
        let step = solve(&jac(&x).ok()?, &gx)?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - lambda * s).collect();
            if let Ok(gt) = g(&trial) {
                let rt = norm(&gt);
                if rt.is_finite() && rt < r {
                    x = trial;
                    gx = gt;
                    r = rt;
                    break;
                }
            }
            lambda /= 2.0;
            if lambda < 1e-10 {
                return (r < tol).then(|| NewtonOutcome { point: x.clone(), residual: r, iterations: it });
            }
        }
    }
    (r < tol).then_some(NewtonOutcome { point: x, residual: r, iterations: max_iter })
}

/// Full Newton steps from an already converged `x` until the step drops
/// below `step_tol`, stopping early if the residual grows. At a degenerate
/// root a small residual pins the point only loosely (a residual of `r` at a
/// cubic zero leaves an error near `r^(1/3)`); polishing tightens that.
pub fn polish_newton(
    g: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    jac: &dyn Fn(&[f64]) -> Result<Matrix<f64>>,
    x: Vec<f64>,
    step_tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let mut x = x;
    let Ok(gx) = g(&x) else { return x };
    let mut r = norm(&gx);
    let mut gx = gx;
    for _ in 0..max_iter {
        let Some(step) = jac(&x).ok().and_then(|j| solve(&j, &gx)) else { break };
        let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - s).collect();
        let Ok(gt) = g(&trial) else { break };
        let rt = norm(&gt);
        if !(rt <= r) || trial.iter().any(|v| !v.is_finite()) {
            break;
        }
        x = trial;
        gx = gt;
        r = rt;
        if norm(&step) < step_tol {
            break;
        }
    }
    x
}

/// Integer points of `Z^n` in shells of increasing max-norm; inside a shell,
/// coordinates run through `0, 1, -1, 2, -2, ...` in odometer order.
pub struct IntegerGrid {
    n: usize,
    radius: i64,
    digits: Vec<usize>,
    done_shell: bool,
}

impl IntegerGrid {
    pub fn new(n: usize) -> Self {
        IntegerGrid { n, radius: 0, digits: vec![0; n], done_shell: false }
    }

    fn value(d: usize) -> i64 {
        let k = d.div_ceil(2) as i64;
        if d % 2 == 1 {
            k
        } else {
            -k
        }
    }

    fn advance(&mut self) {
        let limit = 2 * self.radius as usize;
        for d in self.digits.iter_mut() {
            if *d < limit {
                *d += 1;
                return;
            }
            *d = 0;
        }
        self.done_shell = true;
    }
}

impl Iterator for IntegerGrid {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        loop {
            if self.done_shell {
                self.radius += 1;
                self.digits = vec![0; self.n];
                self.done_shell = false;
            }
            let point: Vec<i64> = self.digits.iter().map(|&d| Self::value(d)).collect();
            let on_shell = point.iter().any(|v| v.abs() == self.radius);
            if self.n == 0 {
                self.done_shell = true;
                if self.radius > 0 {
                    return None;
                }
                return Some(point);
            }
            self.advance();
            if on_shell {
                return Some(point);
            }
        }
    }
}

/// An integer point where `p` does not vanish, or `None` if `p` is zero.
///
/// A nonzero polynomial of degree `d` is nonzero somewhere on `{0..d}^n`, so
/// the shell search terminates by radius `d`. When that box is too large to
/// enumerate, seeded random integer points are tried instead.
pub fn nonzero_witness(p: &Poly, n: usize) -> Option<Vec<Rational>> {
    if p.is_zero() {
        return None;
    }
    let n = n.max(p.arity());
    let d = p.degree().unwrap_or(0) as usize;
    let eval = |pt: &[i64]| -> Option<Vec<Rational>> {
        let r: Vec<Rational> = pt.iter().map(|&v| Rational::from_integer(v.into())).collect();
        let v = p.eval(&r).ok()?;
        (!v.is_zero()).then_some(r)
    };
    let box_size = (2 * d + 1) as f64;
    if box_size.powi(n as i32) <= 2e5 {
        return IntegerGrid::new(n).find_map(|pt| eval(&pt));
    }
    let mut rng = seeded_rng(0x5eed);
    let bound = 8 * (d as i64 + 1);
    loop {
        let pt: Vec<i64> = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
        if let Some(r) = eval(&pt) {
            return Some(r);
        }
    }
}
