//! Small dense matrices over commutative Q-algebras (rationals, polynomials,
//! expressions, floats) plus exact rational linear algebra.

use std::fmt;

use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::expr::{rat, Expr, Poly, Rational};

/// Commutative ring containing the rationals, so division by a nonzero
/// integer is available.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn ring_zero() -> Self;
    fn ring_one() -> Self;
    fn is_ring_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn from_i64(n: i64) -> Self;
    fn div_i64(&self, n: i64) -> Self;

    fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }
}

impl Ring for Rational {
    fn ring_zero() -> Self {
        Zero::zero()
    }
    fn ring_one() -> Self {
        One::one()
    }
    fn is_ring_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn from_i64(n: i64) -> Self {
        rat(n)
    }
    fn div_i64(&self, n: i64) -> Self {
        self / rat(n)
    }
}

impl Ring for Poly {
    fn ring_zero() -> Self {
        Poly::zero()
    }
    fn ring_one() -> Self {
        Poly::one()
    }
    fn is_ring_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn from_i64(n: i64) -> Self {
        Poly::constant(rat(n))
    }
    fn div_i64(&self, n: i64) -> Self {
        self.scale(&(Rational::one() / rat(n)))
    }
}

impl Ring for f64 {
    fn ring_zero() -> Self {
        0.0
    }
    fn ring_one() -> Self {
        1.0
    }
    fn is_ring_zero(&self) -> bool {
        *self == 0.0
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn div_i64(&self, n: i64) -> Self {
        self / n as f64
    }
}

/// Expressions form a ring only up to the folding constructors; `is_ring_zero`
/// is structural, so it may miss zeros that need algebra to see.
impl Ring for Expr {
    fn ring_zero() -> Self {
        Expr::zero()
    }
    fn ring_one() -> Self {
        Expr::one()
    }
    fn is_ring_zero(&self) -> bool {
        Expr::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        Expr::add(self.clone(), o.clone())
    }
    fn times(&self, o: &Self) -> Self {
        Expr::mul(self.clone(), o.clone())
    }
    fn negated(&self) -> Self {
        Expr::negate(self.clone())
    }
    fn from_i64(n: i64) -> Self {
        Expr::int(n)
    }
    fn div_i64(&self, n: i64) -> Self {
        Expr::mul(Expr::Const(Rational::new(1.into(), n.into())), self.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<U: Clone, E>(&self, f: impl FnMut(&T) -> Result<U, E>) -> Result<Matrix<U>, E> {
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<_, E>>()?,
        })
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn leading_principal(&self, k: usize) -> Self {
        let idx: Vec<usize> = (0..k).collect();
        self.submatrix(&idx, &idx)
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> Self {
        let rows: Vec<usize> = (0..self.rows).filter(|&i| i != skip_row).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&j| j != skip_col).collect();
        self.submatrix(&rows, &cols)
    }
}

impl<T: Ring> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| T::ring_zero())
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::ring_one() } else { T::ring_zero() })
    }

    pub fn mul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        Matrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = T::ring_zero();
            for k in 0..self.cols {
                let a = self.get(i, k);
                let b = other.get(k, j);
                if a.is_ring_zero() || b.is_ring_zero() {
                    continue;
                }
                acc = acc.plus(&a.times(b));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = T::ring_zero();
                for (a, x) in self.row(i).iter().zip(v) {
                    acc = acc.plus(&a.times(x));
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).plus(other.get(i, j)))
    }

    pub fn sub(&self, other: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).minus(other.get(i, j)))
    }

    pub fn scale(&self, c: &T) -> Matrix<T> {
        self.map(|x| x.times(c))
    }

    pub fn trace(&self) -> T {
        let mut acc = T::ring_zero();
        for i in 0..self.rows.min(self.cols) {
            acc = acc.plus(self.get(i, i));
        }
        acc
    }

    pub fn pow(&self, k: u32) -> Matrix<T> {
        let mut acc = Matrix::identity(self.rows);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(T::is_ring_zero)
    }

    pub fn is_strictly_upper(&self) -> bool {
        (0..self.rows).all(|i| (0..=i.min(self.cols.saturating_sub(1))).all(|j| self.get(i, j).is_ring_zero()))
    }

    /// Laplace expansion along the first row, skipping zero entries.
    pub fn det(&self) -> T {
        assert!(self.is_square(), "determinant of a non-square matrix");
        match self.rows {
            0 => T::ring_one(),
            1 => self.get(0, 0).clone(),
            2 => self
                .get(0, 0)
                .times(self.get(1, 1))
                .minus(&self.get(0, 1).times(self.get(1, 0))),
            n => {
                let mut acc = T::ring_zero();
                for j in 0..n {
                    let a = self.get(0, j);
                    if a.is_ring_zero() {
                        continue;
                    }
                    let term = a.times(&self.minor(0, j).det());
                    acc = if j % 2 == 0 { acc.plus(&term) } else { acc.minus(&term) };
                }
                acc
            }
        }
    }

    /// Transposed cofactor matrix; satisfies `M * adj(M) = det(M) * I`.
    /// A 1x1 matrix has adjoint `[1]`.
    pub fn classical_adjoint(&self) -> Matrix<T> {
        assert!(self.is_square(), "adjoint of a non-square matrix");
        let n = self.rows;
        Matrix::from_fn(n, n, |i, j| {
            let c = self.minor(j, i).det();
            if (i + j) % 2 == 0 {
                c
            } else {
                c.negated()
            }
        })
    }

    /// Coefficients `[c_{n-1}, ..., c_0]` of `det(lambda I - M) = lambda^n +
    /// c_{n-1} lambda^{n-1} + ... + c_0`, by Faddeev-LeVerrier.
    pub fn char_poly_coeffs(&self) -> Vec<T> {
        assert!(self.is_square(), "characteristic polynomial of a non-square matrix");
        let n = self.rows;
        let mut coeffs = Vec::with_capacity(n);
        let mut am = Matrix::<T>::zeros(n, n); // A * M_{k-1}
        let mut c_prev = T::ring_one();
        for k in 1..=n {
            let mut m = am;
            for i in 0..n {
                let d = m.get(i, i).plus(&c_prev);
                m.set(i, i, d);
            }
            am = self.mul(&m);
            let c = am.trace().div_i64(k as i64).negated();
            coeffs.push(c.clone());
            c_prev = c;
        }
        coeffs
    }
}

impl Matrix<Rational> {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect())
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Matrix<Rational>, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !Zero::is_zero(m.get(i, c))) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = Rational::one() / m.get(r, c);
            for j in 0..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || Zero::is_zero(m.get(i, c)) {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in 0..m.cols {
                    let v = m.get(i, j) - &f * m.get(r, j);
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space read off the reduced echelon form, one vector
    /// per free column in increasing column order.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Rational::zero(); self.cols];
            v[free] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(row, free).clone();
            }
            basis.push(v);
        }
        basis
    }

    pub fn inverse(&self) -> Result<Matrix<Rational>> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = Matrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                Rational::one()
            } else {
                Rational::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        Ok(Matrix::from_fn(n, n, |i, j| r.get(i, j + n).clone()))
    }

    pub fn det_gauss(&self) -> Rational {
        assert!(self.is_square());
        let mut m = self.clone();
        let n = m.rows;
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !Zero::is_zero(m.get(i, c))) else {
                return Rational::zero();
            };
            if p != c {
                for j in 0..n {
                    m.data.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det *= &piv;
            for i in c + 1..n {
                if Zero::is_zero(m.get(i, c)) {
                    continue;
                }
                let f = m.get(i, c) / &piv;
                for j in c..n {
                    let v = m.get(i, j) - &f * m.get(c, j);
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|x| x.to_f64().unwrap_or(f64::NAN))
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ratio;

    #[test]
    fn two_by_two_adjoint_is_the_textbook_formula() {
        let (a, b, c, d) = (Expr::Var(0), Expr::Var(1), Expr::Var(2), Expr::Var(3));
        let m = Matrix::from_rows(vec![vec![a.clone(), b.clone()], vec![c.clone(), d.clone()]]);
        let adj = m.classical_adjoint();
        assert_eq!(
            adj,
            Matrix::from_rows(vec![
                vec![d, Expr::negate(b)],
                vec![Expr::negate(c), a]
            ])
        );
        let one = Matrix::from_rows(vec![vec![Expr::Var(5)]]);
        assert_eq!(one.classical_adjoint(), Matrix::from_rows(vec![vec![Expr::one()]]));
    }

    #[test]
    fn char_poly_of_companion_like_matrix() {
        // [[2,1],[0,3]]: lambda^2 - 5 lambda + 6
        let m = Matrix::from_i64_rows(&[&[2, 1], &[0, 3]]);
        assert_eq!(m.char_poly_coeffs(), vec![rat(-5), rat(6)]);
        let m = Matrix::from_i64_rows(&[&[0, 1, 4], &[0, 0, 7], &[0, 0, 0]]);
        assert!(m.char_poly_coeffs().iter().all(Zero::is_zero));
    }

    #[test]
    fn rational_inverse_and_kernel() {
        let m = Matrix::from_i64_rows(&[&[2, 1], &[1, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
        assert_eq!(m.det_gauss(), rat(1));
        let s = Matrix::from_i64_rows(&[&[1, 2, 3], &[2, 4, 6]]);
        let k = s.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(s.mul_vec(v).iter().all(Zero::is_zero));
        }
        assert_eq!(k[0], vec![rat(-2), rat(1), rat(0)]);
        assert!(Matrix::from_i64_rows(&[&[1, 2], &[2, 4]]).inverse().is_err());
        assert_eq!(Matrix::from_rows(vec![vec![ratio(1, 2)]]).det(), ratio(1, 2));
    }
}
