use serde::{Deserialize, Serialize};

use super::FuzzyError;

/// Trapezoidal membership function with breakpoints `a <= b <= c <= d`.
///
/// Zero outside `[a, d]`, one on `[b, c]`, linear in between. `b == c`
/// gives a triangle; `a == b` or `c == d` gives a shoulder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trapezoid {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Trapezoid {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuzzyError> {
        let ok = [a, b, c, d].iter().all(|v| v.is_finite()) && a <= b && b <= c && c <= d;
        if !ok {
            return Err(FuzzyError::InvalidMembership(format!(
                "breakpoints must satisfy a <= b <= c <= d, got ({a}, {b}, {c}, {d})"
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn triangle(a: f64, peak: f64, d: f64) -> Result<Self, FuzzyError> {
        Self::new(a, peak, peak, d)
    }

    pub fn degree(&self, x: f64) -> f64 {
        membership(self, x)
    }

    pub fn breakpoints(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Whether the shape is mirror-symmetric about `(b + c) / 2`.
    pub fn is_symmetric(&self) -> bool {
        ((self.b - self.a) - (self.d - self.c)).abs() < 1e-12
    }
}

/// Degree of membership of `x`, in `[0, 1]`.
pub fn membership(mf: &Trapezoid, x: f64) -> f64 {
    if x.is_nan() || x < mf.a || x > mf.d {
        0.0
    } else if x >= mf.b && x <= mf.c {
        1.0
    } else if x < mf.b {
        (x - mf.a) / (mf.b - mf.a)
    } else {
        (mf.d - x) / (mf.d - mf.c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t() -> Trapezoid {
        Trapezoid::new(15.0, 18.0, 22.0, 25.0).unwrap()
    }

    #[test]
    fn plateau_ramp_outside() {
        assert_eq!(membership(&t(), 20.0), 1.0);
        assert_eq!(membership(&t(), 16.5), 0.5);
        assert_eq!(membership(&t(), 30.0), 0.0);
        assert_eq!(membership(&t(), 23.5), 0.5);
    }

    #[test]
    fn shoulders_are_full_at_the_edge() {
        let left = Trapezoid::new(10.0, 10.0, 22.5, 25.0).unwrap();
        assert_eq!(left.degree(10.0), 1.0);
        assert_eq!(left.degree(9.99), 0.0);
        let right = Trapezoid::new(60.0, 80.0, 100.0, 100.0).unwrap();
        assert_eq!(right.degree(100.0), 1.0);
    }

    #[test]
    fn unordered_breakpoints_rejected() {
        assert!(Trapezoid::new(1.0, 0.0, 2.0, 3.0).is_err());
        assert!(Trapezoid::new(0.0, 1.0, 2.0, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn degree_in_unit_interval(
            mut pts in proptest::array::uniform4(-100.0f64..100.0),
            x in -200.0f64..200.0,
        ) {
            pts.sort_by(f64::total_cmp);
            let mf = Trapezoid::new(pts[0], pts[1], pts[2], pts[3]).unwrap();
            let m = mf.degree(x);
            prop_assert!((0.0..=1.0).contains(&m));
        }
    }
}
