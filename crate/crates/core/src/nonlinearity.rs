//! p-homogeneous couplings `F(u, v)` with gradient, Hessian and the sphere
//! constants that control them.

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use serde::{Deserialize, Serialize};

/// Concrete family of the coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `F(u,v) = (a1|u|^p + a2|v|^p) / p`.
    PurePower { a1: f64, a2: f64 },
    /// `F(u,v) = (a1 u⁴ + a2 v⁴)/4 + b u²v²/2`, with `p = 4`.
    QuarticCoupled { a1: f64, a2: f64, b: f64 },
}

/// A positive, `p`-homogeneous `C²` nonlinearity with `p > 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NonlinearitySpec", into = "NonlinearitySpec")]
pub struct Nonlinearity {
    p: f64,
    family: Family,
}

/// Flat serialized form `{family, p, a1, a2, b}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub family: String,
    pub p: f64,
    pub a1: f64,
    pub a2: f64,
    #[serde(default)]
    pub b: f64,
}

impl TryFrom<NonlinearitySpec> for Nonlinearity {
    type Error = Error;

    fn try_from(s: NonlinearitySpec) -> Result<Self> {
        match s.family.as_str() {
            "pure_power" | "PurePower" => Nonlinearity::pure_power(s.p, s.a1, s.a2),
            "quartic_coupled" | "QuarticCoupled" => {
                if (s.p - 4.0).abs() > 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "quartic_coupled requires p = 4, got {}",
                        s.p
                    )));
                }
                Nonlinearity::quartic_coupled(s.a1, s.a2, s.b)
            }
            other => Err(Error::InvalidInput(format!("unknown family `{other}`"))),
        }
    }
}

impl From<Nonlinearity> for NonlinearitySpec {
    fn from(f: Nonlinearity) -> Self {
        match f.family {
            Family::PurePower { a1, a2 } => NonlinearitySpec {
                family: "pure_power".into(),
                p: f.p,
                a1,
                a2,
                b: 0.0,
            },
            Family::QuarticCoupled { a1, a2, b } => NonlinearitySpec {
                family: "quartic_coupled".into(),
                p: 4.0,
                a1,
                a2,
                b,
            },
        }
    }
}

/// `|x|^q` with the convention `0^q = 0` for `q > 0`.
#[inline]
fn apow(x: f64, q: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(q)
    }
}

const GOLDEN_TOL: f64 = 1e-12;

impl Nonlinearity {
    pub fn pure_power(p: f64, a1: f64, a2: f64) -> Result<Self> {
        if !(p > 2.0 && p.is_finite()) {
            return Err(Error::InvalidInput(format!("exponent p must exceed 2, got {p}")));
        }
        if !(a1 > 0.0 && a2 > 0.0) {
            return Err(Error::InvalidInput("coefficients a1, a2 must be positive".into()));
        }
        Ok(Self {
            p,
            family: Family::PurePower { a1, a2 },
        })
    }

    pub fn quartic_coupled(a1: f64, a2: f64, b: f64) -> Result<Self> {
        if !(a1 > 0.0 && a2 > 0.0) {
            return Err(Error::InvalidInput("coefficients a1, a2 must be positive".into()));
        }
        if !(b >= 0.0) {
            return Err(Error::InvalidInput("coupling b must be nonnegative".into()));
        }
        Ok(Self {
            p: 4.0,
            family: Family::QuarticCoupled { a1, a2, b },
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// True when `F(u, v) = F(v, u)`, so the diagonal `u = v` is invariant.
    pub fn is_symmetric(&self) -> bool {
        match self.family {
            Family::PurePower { a1, a2 } | Family::QuarticCoupled { a1, a2, .. } => a1 == a2,
        }
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match self.family {
            Family::PurePower { a1, a2 } => (a1 * apow(u, self.p) + a2 * apow(v, self.p)) / self.p,
            Family::QuarticCoupled { a1, a2, b } => {
                let (u2, v2) = (u * u, v * v);
                (a1 * u2 * u2 + a2 * v2 * v2) / 4.0 + b * u2 * v2 / 2.0
            }
        }
    }

    pub fn grad(&self, u: f64, v: f64) -> (f64, f64) {
        match self.family {
            Family::PurePower { a1, a2 } => {
                let q = self.p - 2.0;
                (a1 * apow(u, q) * u, a2 * apow(v, q) * v)
            }
            Family::QuarticCoupled { a1, a2, b } => {
                let (u2, v2) = (u * u, v * v);
                (a1 * u2 * u + b * u * v2, a2 * v2 * v + b * u2 * v)
            }
        }
    }

    pub fn hess(&self, u: f64, v: f64) -> Mat2 {
        match self.family {
            Family::PurePower { a1, a2 } => {
                let q = self.p - 2.0;
                let c = self.p - 1.0;
                Mat2::new(c * a1 * apow(u, q), 0.0, 0.0, c * a2 * apow(v, q))
            }
            Family::QuarticCoupled { a1, a2, b } => {
                let (u2, v2) = (u * u, v * v);
                let off = 2.0 * b * u * v;
                Mat2::new(3.0 * a1 * u2 + b * v2, off, off, 3.0 * a2 * v2 + b * u2)
            }
        }
    }

    /// `min { F(u,v) : |u|^p + |v|^p = 1 }`.
    pub fn c_f(&self) -> f64 {
        match self.family {
            Family::PurePower { a1, a2 } => a1.min(a2) / self.p,
            Family::QuarticCoupled { .. } => {
                let g = |th: f64| {
                    let (c, s) = (th.cos(), th.sin());
                    self.eval(c, s) / (apow(c, self.p) + apow(s, self.p))
                };
                extremum_on_quarter(g, false)
            }
        }
    }

    /// Smallest `C` with `F(u,v) ≤ C (u² + v²)^{p/2}`, i.e. the maximum of `F`
    /// on the Euclidean unit circle.
    pub fn big_c_f(&self) -> f64 {
        match self.family {
            Family::PurePower { a1, a2 } => a1.max(a2) / self.p,
            Family::QuarticCoupled { .. } => {
                extremum_on_quarter(|th: f64| self.eval(th.cos(), th.sin()), true)
            }
        }
    }
}

/// Extremum of `g` over `θ ∈ [0, π/2]` (both families are even in `u` and in
/// `v`): a coarse scan picks the best cell, golden-section search refines it.
fn extremum_on_quarter<G: Fn(f64) -> f64>(g: G, maximize: bool) -> f64 {
    let sign = if maximize { -1.0 } else { 1.0 };
    let obj = |t: f64| sign * g(t);
    let n = 512;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let step = half_pi / n as f64;
    let (mut best_i, mut best) = (0usize, f64::INFINITY);
    for i in 0..=n {
        let val = obj(i as f64 * step);
        if val < best {
            best = val;
            best_i = i;
        }
    }
    let mut a = (best_i as f64 - 1.0).max(0.0) * step;
    let mut b = ((best_i as f64 + 1.0) * step).min(half_pi);
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (obj(c), obj(d));
    while (b - a).abs() > GOLDEN_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = obj(d);
        }
    }
    let refined = obj(0.5 * (a + b)).min(fc).min(fd).min(best);
    sign * refined
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn families() -> Vec<Nonlinearity> {
        vec![
            Nonlinearity::pure_power(2.5, 1.0, 2.0).unwrap(),
            Nonlinearity::pure_power(3.0, 1.0, 1.0).unwrap(),
            Nonlinearity::pure_power(4.0, 0.5, 1.5).unwrap(),
            Nonlinearity::pure_power(6.0, 1.0, 1.0).unwrap(),
            Nonlinearity::quartic_coupled(1.0, 1.0, 0.0).unwrap(),
            Nonlinearity::quartic_coupled(1.0, 2.0, 1.0).unwrap(),
            Nonlinearity::quartic_coupled(1.0, 1.0, 2.0).unwrap(),
        ]
    }

    #[test]
    fn eval_examples() {
        let f = Nonlinearity::pure_power(4.0, 1.0, 1.0).unwrap();
        assert_eq!(f.eval(1.0, 1.0), 0.5);
        let q = Nonlinearity::quartic_coupled(1.0, 1.0, 0.0).unwrap();
        assert_eq!(q.eval(1.0, 0.0), 0.25);
        for f in families() {
            assert_eq!(f.eval(0.0, 0.0), 0.0);
        }
    }

    #[test]
    fn grad_examples() {
        let q = Nonlinearity::quartic_coupled(1.0, 1.0, 0.0).unwrap();
        assert_eq!(q.grad(1.0, 0.0), (1.0, 0.0));
        let f = Nonlinearity::pure_power(3.0, 1.0, 1.0).unwrap();
        assert_eq!(f.grad(2.0, 0.0), (4.0, 0.0));
    }

    #[test]
    fn hess_quartic_closed_form() {
        for b in [0.0, 0.5, 3.0] {
            let q = Nonlinearity::quartic_coupled(1.0, 1.0, b).unwrap();
            let h = q.hess(1.0, 1.0);
            assert_eq!(h, Mat2::new(3.0 + b, 2.0 * b, 2.0 * b, 3.0 + b));
        }
    }

    #[test]
    fn hess_matches_central_differences_of_grad() {
        let step = 1e-5;
        for f in families() {
            for &(u, v) in &[(0.7, -1.3), (1.9, 0.4), (-0.5, -0.8)] {
                let h = f.hess(u, v);
                let (gu_p, gv_p) = f.grad(u + step, v);
                let (gu_m, gv_m) = f.grad(u - step, v);
                let (gu_q, gv_q) = f.grad(u, v + step);
                let (gu_r, gv_r) = f.grad(u, v - step);
                let fd = Mat2::new(
                    (gu_p - gu_m) / (2.0 * step),
                    (gu_q - gu_r) / (2.0 * step),
                    (gv_p - gv_m) / (2.0 * step),
                    (gv_q - gv_r) / (2.0 * step),
                );
                assert!((h - fd).amax() < 1e-5, "{f:?} at ({u},{v})");
            }
        }
    }

    #[test]
    fn c_f_closed_forms_and_sampling() {
        let f = Nonlinearity::pure_power(4.0, 1.0, 1.0).unwrap();
        assert_eq!(f.c_f(), 0.25);
        let f = Nonlinearity::pure_power(3.0, 2.0, 5.0).unwrap();
        assert!((f.c_f() - 2.0 / 3.0).abs() < 1e-15);
        for f in families() {
            // dense sampling of the l^p sphere never goes below c_F
            let p = f.p();
            let mut sampled_min = f64::INFINITY;
            for k in 0..10_000 {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 10_000.0;
                let (c, s) = (th.cos(), th.sin());
                let norm = (c.abs().powf(p) + s.abs().powf(p)).powf(1.0 / p);
                sampled_min = sampled_min.min(f.eval(c / norm, s / norm));
            }
            assert!(f.c_f() <= sampled_min + 1e-12, "{f:?}");
            assert!(sampled_min - f.c_f() < 1e-6, "{f:?}");
        }
        let coupled = Nonlinearity::quartic_coupled(1.0, 1.0, 1.0).unwrap();
        assert!(coupled.c_f() >= 0.25 - 1e-12);
    }

    #[test]
    fn big_c_f_examples() {
        let f = Nonlinearity::pure_power(4.0, 1.0, 1.0).unwrap();
        assert_eq!(f.big_c_f(), 0.25);
        let q = Nonlinearity::quartic_coupled(1.0, 1.0, 2.0).unwrap();
        assert!((q.big_c_f() - 0.375).abs() < 1e-12);
    }

    #[test]
    fn constructor_rejects_invalid_data() {
        assert!(Nonlinearity::pure_power(2.0, 1.0, 1.0).is_err());
        assert!(Nonlinearity::pure_power(3.0, 0.0, 1.0).is_err());
        assert!(Nonlinearity::quartic_coupled(1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn serde_flat_form() {
        let q = Nonlinearity::quartic_coupled(1.0, 2.0, 0.5).unwrap();
        let js = serde_json::to_string(&q).unwrap();
        assert!(js.contains("\"family\":\"quartic_coupled\""));
        let back: Nonlinearity = serde_json::from_str(&js).unwrap();
        assert_eq!(back, q);
        let bad = r#"{"family":"quartic_coupled","p":3.0,"a1":1,"a2":1,"b":0}"#;
        assert!(serde_json::from_str::<Nonlinearity>(bad).is_err());
    }

    fn any_family() -> impl Strategy<Value = Nonlinearity> {
        prop_oneof![
            (2.05f64..8.0, 0.1f64..3.0, 0.1f64..3.0)
                .prop_map(|(p, a1, a2)| Nonlinearity::pure_power(p, a1, a2).unwrap()),
            (0.1f64..3.0, 0.1f64..3.0, 0.0f64..4.0)
                .prop_map(|(a1, a2, b)| Nonlinearity::quartic_coupled(a1, a2, b).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn homogeneity_and_euler(f in any_family(), u in -5.0f64..5.0, v in -5.0f64..5.0, t in 0.1f64..10.0) {
            let p = f.p();
            let base = f.eval(u, v);
            prop_assert!((f.eval(t * u, t * v) - t.powf(p) * base).abs() <= 1e-10 * (1.0 + t.powf(p) * base));
            let (gu, gv) = f.grad(u, v);
            prop_assert!((p * base - u * gu - v * gv).abs() <= 1e-12 * (1.0 + (p * base).abs()));
            let (tu, tv) = f.grad(t * u, t * v);
            let s = t.powf(p - 1.0);
            prop_assert!((tu - s * gu).abs() <= 1e-10 * (1.0 + (s * gu).abs()));
            prop_assert!((tv - s * gv).abs() <= 1e-10 * (1.0 + (s * gv).abs()));
            let h = f.hess(u, v);
            let ht = f.hess(t * u, t * v);
            let s2 = t.powf(p - 2.0);
            prop_assert!((ht - h * s2).amax() <= 1e-10 * (1.0 + (h * s2).amax()));
        }

        #[test]
        fn positivity_off_origin(f in any_family(), u in -5.0f64..5.0, v in -5.0f64..5.0) {
            prop_assume!(u != 0.0 || v != 0.0);
            prop_assert!(f.eval(u, v) > 0.0);
        }
    }
}
