use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, ToPrimitive, Zero};

use super::Rational;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Transcendental {
    Sin,
    Cos,
    Exp,
}

impl Transcendental {
    pub fn name(self) -> &'static str {
        match self {
            Transcendental::Sin => "sin",
            Transcendental::Cos => "cos",
            Transcendental::Exp => "exp",
        }
    }
}

/// Number type an expression can be evaluated in. Exact rationals refuse
/// transcendental nodes, floats accept everything.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_rational(r: &Rational) -> Self;
    fn transcendental(func: Transcendental, x: &Self) -> Result<Self>;

    fn powu(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    fn approx_f64(&self) -> f64;

    /// The exact value, when the scalar type carries one.
    fn as_rational(&self) -> Option<Rational> {
        None
    }
}

impl Scalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn transcendental(func: Transcendental, x: &Self) -> Result<Self> {
        Ok(match func {
            Transcendental::Sin => x.sin(),
            Transcendental::Cos => x.cos(),
            Transcendental::Exp => x.exp(),
        })
    }
    fn powu(&self, e: u32) -> Self {
        self.powi(e as i32)
    }
    fn approx_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn transcendental(func: Transcendental, _x: &Self) -> Result<Self> {
        Err(Error::InexactRequired(func.name().to_string()))
    }
    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn as_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}
