//! Double-double ("compensated") arithmetic for transfer-matrix accumulation.
//!
//! Long products of 2x2 cell matrices occasionally pass through a quasi-bound
//! resonance where the running product partially cancels; plain f64
//! accumulation then leaves a relative error large enough to break the flux
//! check. These helpers keep an unevaluated hi+lo pair per real component so
//! the product carries roughly twice the mantissa. Splitting follows Dekker;
//! no FMA is required, which keeps results identical across targets.

use num_complex::Complex64;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        quick_two_sum(s, e + self.lo + other.lo)
    }

    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd { hi: -other.hi, lo: -other.lo })
    }

    pub fn mul_f64(self, s: f64) -> Dd {
        let (p, e) = two_prod(self.hi, s);
        quick_two_sum(p, e + self.lo * s)
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.value() / other.hi;
        quick_two_sum(q1, q2)
    }
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Error-free product via Dekker splitting (valid while |a*b| < ~1e300).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    const SPLIT: f64 = 134_217_729.0; // 2^27 + 1
    let p = a * b;
    let ca = SPLIT * a;
    let a_hi = ca - (ca - a);
    let a_lo = a - a_hi;
    let cb = SPLIT * b;
    let b_hi = cb - (cb - b);
    let b_lo = b - b_hi;
    let err = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo;
    (p, err)
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub fn from_c64(z: Complex64) -> Self {
        DdComplex { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    pub fn value(self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    pub fn add(self, other: DdComplex) -> DdComplex {
        DdComplex { re: self.re.add(other.re), im: self.im.add(other.im) }
    }

    /// Product with a plain complex scalar on the left: `c * self`.
    pub fn mul_c64(self, c: Complex64) -> DdComplex {
        let re = self.re.mul_f64(c.re).sub(self.im.mul_f64(c.im));
        let im = self.re.mul_f64(c.im).add(self.im.mul_f64(c.re));
        DdComplex { re, im }
    }

    pub fn norm_sqr(self) -> Dd {
        // |z|^2 from squares of the hi parts plus the cross terms; the lo
        // parts contribute below double-double precision here.
        let (p1, e1) = two_prod(self.re.hi, self.re.hi);
        let (p2, e2) = two_prod(self.im.hi, self.im.hi);
        let cross = 2.0 * (self.re.hi * self.re.lo + self.im.hi * self.im.lo);
        Dd { hi: p1, lo: e1 }.add(Dd { hi: p2, lo: e2 }).add(Dd::from_f64(cross))
    }

    /// self / other in double-double precision.
    ///
    /// (a+ib)/(c+id) = [(ac + bd) + i(bc - ad)] / (c^2 + d^2)
    pub fn div(self, other: DdComplex) -> DdComplex {
        let den = other.norm_sqr();
        let a = self.re;
        let b = self.im;
        let c = other.re.value();
        let d = other.im.value();
        let num_re = a.mul_f64(c).add(b.mul_f64(d));
        let num_im = b.mul_f64(c).sub(a.mul_f64(d));
        DdComplex { re: num_re.div(den), im: num_im.div(den) }
    }
}

/// 2x2 complex matrix with double-double real components, used as the running
/// product in the refined accumulation path.
#[derive(Clone, Copy, Debug)]
pub(crate) struct DdMat2 {
    pub a11: DdComplex,
    pub a12: DdComplex,
    pub a21: DdComplex,
    pub a22: DdComplex,
}

impl DdMat2 {
    pub fn identity() -> Self {
        let one = DdComplex::from_c64(Complex64::new(1.0, 0.0));
        let zero = DdComplex::from_c64(Complex64::new(0.0, 0.0));
        DdMat2 { a11: one, a12: zero, a21: zero, a22: one }
    }

    /// Replace self with `cell * self`, `cell` a plain f64 matrix (c11..c22).
    pub fn premul(&mut self, c11: Complex64, c12: Complex64, c21: Complex64, c22: Complex64) {
        let r11 = self.a11.mul_c64(c11).add(self.a21.mul_c64(c12));
        let r12 = self.a12.mul_c64(c11).add(self.a22.mul_c64(c12));
        let r21 = self.a11.mul_c64(c21).add(self.a21.mul_c64(c22));
        let r22 = self.a12.mul_c64(c21).add(self.a22.mul_c64(c22));
        self.a11 = r11;
        self.a12 = r12;
        self.a21 = r21;
        self.a22 = r22;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_prod_is_error_free() {
        let (p, e) = two_prod(1.0 + 2f64.powi(-30), 1.0 + 2f64.powi(-30));
        // exact square is 1 + 2^-29 + 2^-60; p+e must reproduce it
        assert_eq!(p, 1.0 + 2f64.powi(-29));
        assert_eq!(e, 2f64.powi(-60));
    }

    #[test]
    fn dd_div_reconstructs_quotient() {
        let a = Dd::from_f64(1.0).add(Dd::from_f64(2f64.powi(-53)));
        let b = Dd::from_f64(3.0);
        let q = a.div(b);
        let back = q.mul_f64(3.0);
        assert!((back.value() - a.value()).abs() < 1e-30);
    }

    #[test]
    fn complex_div_matches_f64_for_benign_inputs() {
        let x = DdComplex::from_c64(Complex64::new(3.0, -4.0));
        let y = DdComplex::from_c64(Complex64::new(1.0, 2.0));
        let q = x.div(y).value();
        let expect = Complex64::new(3.0, -4.0) / Complex64::new(1.0, 2.0);
        assert!((q - expect).norm() < 1e-15);
    }
}
