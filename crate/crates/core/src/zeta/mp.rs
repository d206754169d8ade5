//! Thin multiple-precision helpers over `astro-float`.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

pub(crate) const RM: RoundingMode = RoundingMode::ToEven;

pub(crate) struct Mp {
    pub p: usize,
    cc: RefCell<Consts>,
}

impl Mp {
    pub fn new(p: usize) -> Self {
        Self {
            p,
            cc: RefCell::new(Consts::new().expect("astro-float constant cache")),
        }
    }

    pub fn f(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    pub fn u(&self, x: u64) -> BigFloat {
        BigFloat::from_u64(x, self.p)
    }

    pub fn pi(&self) -> BigFloat {
        self.cc.borrow_mut().pi(self.p, RM)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }

    pub fn ln(&self, a: &BigFloat) -> BigFloat {
        a.ln(self.p, RM, &mut self.cc.borrow_mut())
    }

    pub fn exp(&self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, RM, &mut self.cc.borrow_mut())
    }

    pub fn sin(&self, a: &BigFloat) -> BigFloat {
        a.sin(self.p, RM, &mut self.cc.borrow_mut())
    }

    pub fn cos(&self, a: &BigFloat) -> BigFloat {
        a.cos(self.p, RM, &mut self.cc.borrow_mut())
    }

    pub fn atan(&self, a: &BigFloat) -> BigFloat {
        a.atan(self.p, RM, &mut self.cc.borrow_mut())
    }

    /// `a − 2π·round(a/2π)`.
    pub fn reduce_two_pi(&self, a: &BigFloat) -> BigFloat {
        let two_pi = self.mul(&self.u(2), &self.pi());
        let k = to_f64(&self.div(a, &two_pi)).round();
        self.sub(a, &self.mul(&self.f(k), &two_pi))
    }
}

/// Nearest-double conversion (correct up to the rounding of the top 128 bits).
pub(crate) fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _, sign, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = words.len() - 1;
    let hi = words[top] as f64;
    let lo = if top > 0 { words[top - 1] as f64 } else { 0.0 };
    let mag = (hi + lo * 2f64.powi(-64)) * 2f64.powi(exp - 64);
    match sign {
        Sign::Neg => -mag,
        Sign::Pos => mag,
    }
}

/// Complex number with `BigFloat` parts.
#[derive(Clone, Debug)]
pub(crate) struct Cx {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Cx {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        Self { re, im }
    }

    pub fn add(&self, o: &Cx, m: &Mp) -> Cx {
        Cx::new(m.add(&self.re, &o.re), m.add(&self.im, &o.im))
    }

    pub fn mul(&self, o: &Cx, m: &Mp) -> Cx {
        let re = m.sub(&m.mul(&self.re, &o.re), &m.mul(&self.im, &o.im));
        let im = m.add(&m.mul(&self.re, &o.im), &m.mul(&self.im, &o.re));
        Cx::new(re, im)
    }

    pub fn scale(&self, s: &BigFloat, m: &Mp) -> Cx {
        Cx::new(m.mul(&self.re, s), m.mul(&self.im, s))
    }

    pub fn div(&self, o: &Cx, m: &Mp) -> Cx {
        let den = m.add(&m.mul(&o.re, &o.re), &m.mul(&o.im, &o.im));
        let re = m.add(&m.mul(&self.re, &o.re), &m.mul(&self.im, &o.im));
        let im = m.sub(&m.mul(&self.im, &o.re), &m.mul(&self.re, &o.im));
        Cx::new(m.div(&re, &den), m.div(&im, &den))
    }

    pub fn abs_f64(&self) -> f64 {
        to_f64(&self.re).hypot(to_f64(&self.im))
    }
}
