//! Dense univariate polynomials in the power basis.

use std::ops::{Add, Mul, Neg, Sub};

use serde_json::{json, Value};

use crate::error::PolyError;
use crate::scalar::Scalar;

/// `coeffs[k]` multiplies `x^k`. Trailing coefficients that are zero (or
/// negligible relative to the largest one) are removed, so the zero
/// polynomial has no coefficients and degree -1.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> UniPoly<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        let mut p = UniPoly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `c·x^k`.
    pub fn monomial(c: T, k: usize) -> Self {
        let mut v = vec![c.zero_like(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    /// The identity polynomial `x`, with constants shaped like `like`.
    pub fn x(like: &T) -> Self {
        Self::monomial(like.one_like(), 1)
    }

    fn trim(&mut self) {
        let Some(scale) = self.max_abs_coeff() else {
            return;
        };
        while let Some(last) = self.coeffs.last() {
            if last.is_zero() || last.is_negligible(&scale) {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn max_abs_coeff(&self) -> Option<T> {
        let mut it = self.coeffs.iter();
        let mut m = it.next()?.abs();
        for c in it {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        Some(m)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Option<&T> {
        self.coeffs.get(k)
    }

    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        let mut acc = x.zero_like();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c).collect())
    }

    /// `self^n`. The zero polynomial raised to the power 0 is 0, since it
    /// carries no scalar to build a one from.
    pub fn pow(&self, n: u32) -> Self {
        let Some(first) = self.coeffs.first() else {
            return Self::zero();
        };
        let mut result = Self::constant(first.one_like());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * &c.from_i64_like(k as i64))
                .collect(),
        )
    }

    /// `self(inner(x))`.
    pub fn compose(&self, inner: &Self) -> Self {
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * inner) + &Self::constant(c.clone());
        }
        acc
    }

    /// `self(-x)`.
    pub fn reflect(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c.clone() } else { c.clone() })
                .collect(),
        )
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> UniPoly<U> {
        UniPoly::new(self.coeffs.iter().map(f).collect())
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dl = d.leading().expect("division by the zero polynomial").clone();
        let dd = d.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let zero = dl.zero_like();
        let mut quot = vec![zero.clone(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd].clone() / &dl;
            for (j, dc) in d.coeffs.iter().enumerate() {
                let t = rem[k + j].clone() - &(q.clone() * dc);
                rem[k + j] = t;
            }
            rem[k + dd] = zero.clone();
            quot[k] = q;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Divides by `x^k` when the `k` lowest coefficients are zero.
    pub fn div_x_pow(&self, k: usize) -> Option<Self> {
        if self.coeffs.len() <= k {
            return if self.coeffs.iter().all(|c| c.is_zero()) {
                Some(Self::zero())
            } else {
                None
            };
        }
        if self.coeffs[..k].iter().all(|c| c.is_zero()) {
            Some(Self::new(self.coeffs[k..].to_vec()))
        } else {
            None
        }
    }

    /// `x^k · self`.
    pub fn mul_x_pow(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let zero = self.coeffs[0].zero_like();
        let mut v = vec![zero; k];
        v.extend(self.coeffs.iter().cloned());
        Self::new(v)
    }

    /// Largest coefficient magnitude as an `f64`; 0 for the zero polynomial.
    pub fn max_abs_f64(&self) -> f64 {
        self.coeffs.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// `{"basis":"power","coeffs":[...]}` with lossless scalar strings.
    pub fn to_json(&self) -> Value {
        json!({
            "basis": "power",
            "coeffs": self.coeffs.iter().map(|c| c.to_exact_string()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(
        v: &Value,
        parse: impl Fn(&str) -> Result<T, crate::error::ScalarError>,
    ) -> Result<Self, PolyError> {
        let basis = v.get("basis").and_then(Value::as_str).unwrap_or("power");
        if basis != "power" {
            return Err(PolyError::Format(format!("unsupported basis {basis:?}")));
        }
        let arr = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| PolyError::Format("missing coeffs array".into()))?;
        let mut coeffs = Vec::with_capacity(arr.len());
        for c in arr {
            let s = match c {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                other => return Err(PolyError::Format(format!("bad coefficient {other}"))),
            };
            coeffs.push(parse(&s)?);
        }
        Ok(Self::new(coeffs))
    }
}

/// Power-basis coefficients of the Chebyshev polynomials `T_0..=T_n`:
/// row `k` holds the coefficients of `T_k`.
pub fn chebyshev_power_matrix<T: Scalar>(n: usize, like: &T) -> Vec<Vec<T>> {
    let zero = like.zero_like();
    let one = like.one_like();
    let two = like.from_i64_like(2);
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut row = vec![zero.clone(); n + 1];
        match k {
            0 => row[0] = one.clone(),
            1 => row[1] = one.clone(),
            _ => {
                for j in 0..=n {
                    let mut v = zero.clone() - &rows[k - 2][j];
                    if j > 0 {
                        v = v + &(two.clone() * &rows[k - 1][j - 1]);
                    }
                    row[j] = v;
                }
            }
        }
        rows.push(row);
    }
    rows
}

impl<T: Scalar> UniPoly<T> {
    /// Builds `Σ c_k T_k(x)` in the power basis.
    pub fn from_chebyshev(cheb: &[T]) -> Self {
        let Some(first) = cheb.first() else {
            return Self::zero();
        };
        let n = cheb.len() - 1;
        let m = chebyshev_power_matrix(n, first);
        let mut out = vec![first.zero_like(); n + 1];
        for (k, ck) in cheb.iter().enumerate() {
            for (j, t) in m[k].iter().enumerate() {
                out[j] = out[j].clone() + &(ck.clone() * t);
            }
        }
        Self::new(out)
    }

    /// Chebyshev coefficients `c` with `self = Σ c_k T_k`.
    pub fn to_chebyshev(&self) -> Vec<T> {
        let Some(first) = self.coeffs.first() else {
            return Vec::new();
        };
        let n = self.coeffs.len() - 1;
        let m = chebyshev_power_matrix(n, first);
        // Upper-triangular back substitution on the leading power coefficient.
        let mut rest = self.coeffs.clone();
        let mut out = vec![first.zero_like(); n + 1];
        for k in (0..=n).rev() {
            let c = rest[k].clone() / &m[k][k];
            for j in 0..=k {
                rest[j] = rest[j].clone() - &(c.clone() * &m[k][j]);
            }
            out[k] = c;
        }
        out
    }
}

impl<T: Scalar> Add for &UniPoly<T> {
    type Output = UniPoly<T>;
    fn add(self, rhs: &UniPoly<T>) -> UniPoly<T> {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut v = long.coeffs.clone();
        for (k, c) in short.coeffs.iter().enumerate() {
            v[k] = v[k].clone() + c;
        }
        UniPoly::new(v)
    }
}

impl<T: Scalar> Sub for &UniPoly<T> {
    type Output = UniPoly<T>;
    fn sub(self, rhs: &UniPoly<T>) -> UniPoly<T> {
        self + &(-rhs)
    }
}

impl<T: Scalar> Neg for &UniPoly<T> {
    type Output = UniPoly<T>;
    fn neg(self) -> UniPoly<T> {
        UniPoly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

impl<T: Scalar> Mul for &UniPoly<T> {
    type Output = UniPoly<T>;
    fn mul(self, rhs: &UniPoly<T>) -> UniPoly<T> {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let zero = self.coeffs[0].zero_like();
        let mut v = vec![zero; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].clone() + &(a.clone() * b);
            }
        }
        UniPoly::new(v)
    }
}
