//! The Carlitz module and Drinfeld modules of higher rank: the factorial
//! sequences D_i and l_i, the b_m products, twisted operator polynomials,
//! exponential/logarithm coefficients, and the module action on A.
//!
//! Conventions, fixed once:
//!   D_0 = 1,  D_i = (T^{q^i} - T) D_{i-1}^q            (monic),
//!   l_0 = 1,  l_n = (T - T^{q^n}) l_{n-1}              (lead (-1)^n),
//!   b_m(t)  = prod_{j<m} (t - T^{q^j}),
//!   g_r     = T^{q^r} - T.
//! The Carlitz exponential has coefficients 1/D_i, its logarithm 1/l_i, and
//! every one of these is a monomial in the g_r basis up to sign.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::field::FF;
use crate::mpoly::MPoly;
use crate::poly::{Poly, RatPoly, Ring};
use crate::series::Window;
use crate::{Error, Result};

/// g_r = T^{q^r} - T.
pub fn gbasis(ff: &Arc<FF>, r: u32) -> Poly {
    let e = (ff.size as u64).pow(r);
    Poly::xpow(ff, e as usize).sub(&Poly::theta(ff))
}

type PolyCache = Mutex<HashMap<(u32, u32, u32, u32), Poly>>;

fn cache_get(cache: &PolyCache, ff: &Arc<FF>, i: u32, build: impl FnOnce() -> Poly) -> Poly {
    let key = (ff.p, ff.e, ff.d, i);
    if let Some(p) = cache.lock().unwrap().get(&key) {
        return p.clone();
    }
    let p = build();
    cache.lock().unwrap().insert(key, p.clone());
    p
}

/// D_i, cached per field.
pub fn dfac(ff: &Arc<FF>, i: u32) -> Poly {
    static CACHE: OnceLock<PolyCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if i == 0 {
        return Poly::one(ff);
    }
    cache_get(cache, ff, i, || {
        let prev = dfac(ff, i - 1);
        gbasis(ff, i).mul(&twist(&prev, 1))
    })
}

/// l_n (the denominator sequence of the Carlitz logarithm), cached.
pub fn lfac(ff: &Arc<FF>, n: u32) -> Poly {
    static CACHE: OnceLock<PolyCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if n == 0 {
        return Poly::one(ff);
    }
    cache_get(cache, ff, n, || {
        let prev = lfac(ff, n - 1);
        gbasis(ff, n).neg().mul(&prev)
    })
}

/// tau^k applied to a polynomial in T: coefficients to the q^k, exponents
/// scaled by q^k. Agrees with the ring power a^{q^k} (Frobenius is a ring
/// map), but costs O(deg) instead.
pub fn twist(a: &Poly, k: u32) -> Poly {
    if k == 0 || a.is_zero() {
        return a.clone();
    }
    let f = &a.ff;
    let q = f.q as u64;
    let scale = q.pow(k) as usize;
    let mut c = vec![0; (a.deg() as usize) * scale + 1];
    let n = q.pow(k);
    for (i, &v) in a.c.iter().enumerate() {
        if v != 0 {
            c[i * scale] = f.pow_u64(v, n);
        }
    }
    Poly::new(f.clone(), c)
}

/// b_m evaluated at t = T^{q^i}: zero for i < m, otherwise the exact product
/// prod_{j<m} (T^{q^i} - T^{q^j}) assembled from twisted g factors.
pub fn b_at_theta_power(ff: &Arc<FF>, m: u32, i: u32) -> Poly {
    if i < m {
        return Poly::zero(ff);
    }
    let mut acc = Poly::one(ff);
    for j in 0..m {
        acc = acc.mul(&twist(&gbasis(ff, i - j), j));
    }
    acc
}

/// b_m(t) as a polynomial in T and the variable in lane `tlane`.
pub fn bpoly(ff: &Arc<FF>, vars: &Arc<Vec<String>>, tlane: usize, m: u32) -> MPoly {
    let mut acc = MPoly::one(ff, vars);
    for j in 0..m {
        let e = (ff.size as u64).pow(j);
        assert!(e <= 255, "b_{m} exponent {e} exceeds the packed-lane cap");
        let t = MPoly::var(ff, vars, tlane);
        let theta_pow = MPoly::var_pow(ff, vars, 0, e as u8);
        acc = acc.mul(&t.sub(&theta_pow));
    }
    acc
}

/// Rings that carry the Frobenius twist tau (T-coefficients to the q, any
/// deformation variables fixed).
pub trait TwRing: Ring {
    fn twist(&self, k: u32) -> Self;
}

impl TwRing for Poly {
    fn twist(&self, k: u32) -> Self {
        twist(self, k)
    }
}

impl Ring for RatPoly {
    fn rzero(&self) -> Self {
        RatPoly::zero(&self.num.ff)
    }
    fn rone(&self) -> Self {
        RatPoly::one(&self.num.ff)
    }
    fn radd(&self, o: &Self) -> Self {
        self.add(o).expect("fraction arithmetic on reduced inputs")
    }
    fn rmul(&self, o: &Self) -> Self {
        self.mul(o).expect("fraction arithmetic on reduced inputs")
    }
    fn rneg(&self) -> Self {
        self.neg()
    }
    fn is_zero(&self) -> bool {
        RatPoly::is_zero(self)
    }
}

impl TwRing for RatPoly {
    fn twist(&self, k: u32) -> Self {
        RatPoly { num: twist(&self.num, k), den: twist(&self.den, k) }
    }
}

impl TwRing for MPoly {
    /// Lane 0 is T by convention; deformation variables stay fixed.
    fn twist(&self, k: u32) -> Self {
        let q = self.ff.q;
        let mut m = self.coeff_pow_q(k);
        for _ in 0..k {
            m = m.scale_var_exp(0, q);
        }
        m
    }
}

impl Ring for Window {
    fn rzero(&self) -> Self {
        Window::exact_zero(&self.ff)
    }
    fn rone(&self) -> Self {
        Window::one(&self.ff)
    }
    fn radd(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn rmul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn is_zero(&self) -> bool {
        self.is_exact() && self.is_zero_window()
    }
    fn rneg(&self) -> Self {
        self.neg()
    }
}

impl TwRing for Window {
    fn twist(&self, k: u32) -> Self {
        self.qpow_iter(k)
    }
}

/// Twisted polynomial sum_i c_i tau^i with the rule tau x = x^q tau.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TauPoly<R: TwRing> {
    pub c: Vec<R>,
}

impl<R: TwRing> TauPoly<R> {
    pub fn new(mut c: Vec<R>) -> TauPoly<R> {
        while c.len() > 1 && c.last().map(|x| x.is_zero()).unwrap_or(false) {
            c.pop();
        }
        assert!(!c.is_empty(), "operator needs at least one coefficient");
        TauPoly { c }
    }

    pub fn deg_tau(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeff(&self, i: usize) -> R {
        self.c.get(i).cloned().unwrap_or_else(|| self.c[0].rzero())
    }

    pub fn add(&self, o: &TauPoly<R>) -> TauPoly<R> {
        let n = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(self.coeff(i).radd(&o.coeff(i)));
        }
        TauPoly::new(c)
    }

    /// Operator composition: (a tau^i)(b tau^j) = a tau^i(b) tau^{i+j}.
    pub fn mul(&self, o: &TauPoly<R>) -> TauPoly<R> {
        let zero = self.c[0].rzero();
        let mut c = vec![zero; self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let t = a.rmul(&b.twist(i as u32));
                c[i + j] = c[i + j].radd(&t);
            }
        }
        TauPoly::new(c)
    }

    pub fn mul_left_scalar(&self, s: &R) -> TauPoly<R> {
        TauPoly::new(self.c.iter().map(|x| s.rmul(x)).collect())
    }

    /// Apply the operator to a ring element.
    pub fn apply(&self, x: &R) -> R {
        let mut acc = self.c[0].rzero();
        for (i, a) in self.c.iter().enumerate() {
            if !a.is_zero() {
                acc = acc.radd(&a.rmul(&x.twist(i as u32)));
            }
        }
        acc
    }
}

/// A Drinfeld module over A = F_q[T]: phi_T = sum alpha_j tau^j with
/// alpha_0 = T and alpha_r nonzero.
#[derive(Clone)]
pub struct DrinfeldModule {
    pub ff: Arc<FF>,
    /// alpha[j], j = 0..=r; alpha[0] = T.
    pub alpha: Vec<Poly>,
}

impl DrinfeldModule {
    pub fn new(ff: Arc<FF>, alpha: Vec<Poly>) -> Result<DrinfeldModule> {
        if alpha.len() < 2 || alpha[0] != Poly::theta(&ff) {
            return Err(Error::Usage(
                "a Drinfeld module needs alpha_0 = T and positive rank".into(),
            ));
        }
        if alpha.last().unwrap().is_zero() {
            return Err(Error::Usage("the top coefficient alpha_r must be nonzero".into()));
        }
        Ok(DrinfeldModule { ff, alpha })
    }

    /// The Carlitz module phi_T = T + tau.
    pub fn carlitz(ff: &Arc<FF>) -> DrinfeldModule {
        DrinfeldModule { ff: ff.clone(), alpha: vec![Poly::theta(ff), Poly::one(ff)] }
    }

    pub fn rank(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn phi_theta(&self) -> TauPoly<Poly> {
        TauPoly::new(self.alpha.clone())
    }

    /// phi_a for arbitrary a, by Horner in phi_T.
    pub fn phi(&self, a: &Poly) -> TauPoly<Poly> {
        let ff = &self.ff;
        let mut acc = TauPoly::new(vec![Poly::zero(ff)]);
        let pt = self.phi_theta();
        for &ai in a.c.iter().rev() {
            acc = acc.mul(&pt);
            acc = acc.add(&TauPoly::new(vec![Poly::scalar(ff, ai)]));
        }
        acc
    }

    /// Exponential coefficients e_0..e_n:
    /// e_i (T^{q^i} - T) = sum_{j=1..min(r,i)} alpha_j tau^j(e_{i-j}).
    pub fn exp_coeffs(&self, n: usize) -> Result<Vec<RatPoly>> {
        let ff = &self.ff;
        let mut e = vec![RatPoly::one(ff)];
        for i in 1..=n {
            let mut s = RatPoly::zero(ff);
            for j in 1..=self.rank().min(i) {
                let t = RatPoly::from_poly(self.alpha[j].clone()).mul(&e[i - j].twist(j as u32))?;
                s = s.add(&t)?;
            }
            let den = RatPoly::from_poly(gbasis(ff, i as u32));
            e.push(s.div(&den)?);
        }
        Ok(e)
    }

    /// Logarithm coefficients l_0..l_n:
    /// l_n (T - T^{q^n}) = sum_{j=1..min(r,n)} l_{n-j} tau^{n-j}(alpha_j).
    pub fn log_coeffs(&self, n: usize) -> Result<Vec<RatPoly>> {
        let ff = &self.ff;
        let mut l = vec![RatPoly::one(ff)];
        for i in 1..=n {
            let mut s = RatPoly::zero(ff);
            for j in 1..=self.rank().min(i) {
                let t = l[i - j].mul_poly(&twist(&self.alpha[j], (i - j) as u32))?;
                s = s.add(&t)?;
            }
            let den = RatPoly::from_poly(gbasis(ff, i as u32).neg());
            l.push(s.div(&den)?);
        }
        Ok(l)
    }
}

/// Coefficient of X^{q^l} in the Carlitz action C_a(X), by the closed form
/// c_l(a) = sum_{i+j=l} tau^i(a / l_j) / D_i; always integral, and checked.
pub fn carlitz_coeff(ff: &Arc<FF>, a: &Poly, l: u32) -> Result<Poly> {
    let mut s = RatPoly::zero(ff);
    for i in 0..=l {
        let j = l - i;
        let base = RatPoly::new(a.clone(), lfac(ff, j))?;
        let term = base.twist(i).div(&RatPoly::from_poly(dfac(ff, i)))?;
        s = s.add(&term)?;
    }
    if !s.is_polynomial() {
        return Err(Error::IntegralityViolation(format!(
            "Carlitz action coefficient c_{l}({a}) is not integral: {s}"
        )));
    }
    Ok(s.num)
}

/// All coefficients c_0(a)..c_{deg a}(a) of C_a(X).
pub fn carlitz_coeffs(ff: &Arc<FF>, a: &Poly) -> Result<Vec<Poly>> {
    let d = a.deg().max(0) as u32;
    (0..=d).map(|l| carlitz_coeff(ff, a, l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::irreducibles;

    fn f(q: u32) -> Arc<FF> {
        FF::get(q, 1, 1).unwrap()
    }

    #[test]
    fn dfac_pins_and_degree() {
        let f3 = f(3);
        // D_2 = (T^9 - T)(T^3 - T)^3
        let d2 = gbasis(&f3, 2).mul(&gbasis(&f3, 1).pow(3));
        assert_eq!(dfac(&f3, 2), d2);
        for q in [2, 3, 5] {
            let ff = f(q);
            for i in 0..=4u32 {
                let d = dfac(&ff, i);
                assert!(d.is_monic());
                assert_eq!(d.deg() as u64, i as u64 * (q as u64).pow(i));
            }
        }
    }

    #[test]
    fn dfac_equals_b_at_own_theta_power() {
        for q in [2, 3] {
            let ff = f(q);
            for j in 0..=3u32 {
                assert_eq!(dfac(&ff, j), b_at_theta_power(&ff, j, j));
            }
            // Frobenius vanishing below the diagonal
            assert!(b_at_theta_power(&ff, 2, 1).is_zero());
            assert!(b_at_theta_power(&ff, 3, 0).is_zero());
        }
    }

    #[test]
    fn lfac_degree_sign_and_prime_factorization() {
        let f3 = f(3);
        for n in 0..=3u32 {
            let l = lfac(&f3, n);
            assert_eq!(l.deg() as u64, 3 * (3u64.pow(n) - 1) / 2);
            let sign = if n % 2 == 0 { 1 } else { f3.neg(1) };
            assert_eq!(l.lead(), sign);
        }
        // l_2 = prod of every monic prime of degree <= 2 to the floor(2/d)
        let mut prod = Poly::one(&f3);
        for d in 1..=2 {
            for p in irreducibles(&f3, d).iter() {
                prod = prod.mul(&p.pow((2 / d) as u64));
            }
        }
        assert_eq!(lfac(&f3, 2), prod); // n even: lead +1, exactly monic
        // valuations: v_P(l_n) = floor(n/deg P)
        let l5 = RatPoly::from_poly(lfac(&f3, 5));
        for d in 1..=3u32 {
            let p = irreducibles(&f3, d)[0].clone();
            assert_eq!(l5.ord_at(&p).unwrap(), (5 / d) as i64);
        }
    }

    #[test]
    fn carlitz_exp_and_log_coefficients() {
        for q in [2, 3] {
            let ff = f(q);
            let c = DrinfeldModule::carlitz(&ff);
            let e = c.exp_coeffs(4).unwrap();
            let l = c.log_coeffs(4).unwrap();
            for i in 0..=4u32 {
                assert_eq!(e[i as usize], RatPoly::new(Poly::one(&ff), dfac(&ff, i)).unwrap());
                assert_eq!(l[i as usize], RatPoly::new(Poly::one(&ff), lfac(&ff, i)).unwrap());
            }
        }
    }

    #[test]
    fn exp_compose_log_is_identity() {
        // sum_{i+j=k} tau^i(l_j)/D_i = 0 for k >= 1 (and =1 for k=0)
        for q in [2, 3] {
            let ff = f(q);
            for k in 0..=4u32 {
                let mut s = RatPoly::zero(&ff);
                for i in 0..=k {
                    let j = k - i;
                    let term = RatPoly::new(Poly::one(&ff), lfac(&ff, j))
                        .unwrap()
                        .twist(i)
                        .div(&RatPoly::from_poly(dfac(&ff, i)))
                        .unwrap();
                    s = s.add(&term).unwrap();
                }
                if k == 0 {
                    assert!(s.num.is_one() && s.den.is_one());
                } else {
                    assert!(s.is_zero(), "k={k}");
                }
            }
        }
    }

    #[test]
    fn rank2_exp_coefficient_pin() {
        // phi_T = T + tau + tau^2 over F_2: e_1 = 1/(T^2+T)
        let ff = f(2);
        let m = DrinfeldModule::new(
            ff.clone(),
            vec![Poly::theta(&ff), Poly::one(&ff), Poly::one(&ff)],
        )
        .unwrap();
        let e = m.exp_coeffs(2).unwrap();
        assert_eq!(
            e[1],
            RatPoly::new(Poly::one(&ff), Poly::parse(&ff, "T^2+T", "T").unwrap()).unwrap()
        );
        // e_2 (T^4+T) = alpha_1 tau(e_1) + alpha_2 tau^2(e_0)
        let rhs = e[1].twist(1).add(&RatPoly::one(&ff)).unwrap();
        let lhs = e[2].mul_poly(&gbasis(&ff, 2)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn carlitz_action_closed_form_matches_operator_route() {
        for q in [2, 3] {
            let ff = f(q);
            let c = DrinfeldModule::carlitz(&ff);
            for d in 0..=3u32 {
                for a in Poly::monics(&ff, d).take(12) {
                    let op = c.phi(&a);
                    let closed = carlitz_coeffs(&ff, &a).unwrap();
                    assert_eq!(op.c.len(), closed.len());
                    for (x, y) in op.c.iter().zip(closed.iter()) {
                        assert_eq!(x, y);
                    }
                    // anchors: c_0(a) = a, c_deg(a) = 1 for monic a
                    assert_eq!(closed[0], a);
                    assert_eq!(closed[d as usize], Poly::one(&ff));
                }
            }
        }
    }

    #[test]
    fn phi_is_a_ring_homomorphism() {
        let ff = f(3);
        let c = DrinfeldModule::carlitz(&ff);
        let a = Poly::parse(&ff, "T^2+2*T+1", "T").unwrap();
        let b = Poly::parse(&ff, "T+2", "T").unwrap();
        assert_eq!(c.phi(&a.mul(&b)), c.phi(&a).mul(&c.phi(&b)));
        assert_eq!(c.phi(&a.add(&b)), c.phi(&a).add(&c.phi(&b)));
        // and phi_a(x) for x in A equals the operator application
        let x = Poly::parse(&ff, "T^3+T", "T").unwrap();
        let applied = c.phi(&a).apply(&x);
        let mut direct = Poly::zero(&ff);
        for (l, cl) in carlitz_coeffs(&ff, &a).unwrap().into_iter().enumerate() {
            direct = direct.add(&cl.mul(&twist(&x, l as u32)));
        }
        assert_eq!(applied, direct);
    }

    #[test]
    fn bpoly_matches_pointwise_product() {
        let ff = f(3);
        let vars = crate::mpoly::tz_vars(1);
        let b2 = bpoly(&ff, &vars, 1, 2);
        // b_2(t) = (t - T)(t - T^3)
        let t = MPoly::var(&ff, &vars, 1);
        let exp = t
            .sub(&MPoly::var_pow(&ff, &vars, 0, 1))
            .mul(&t.sub(&MPoly::var_pow(&ff, &vars, 0, 3)));
        assert_eq!(b2, exp);
        // evaluating t at T^{q^i} matches b_at_theta_power
        for i in 0..=3u32 {
            let mut acc = Poly::zero(&ff);
            for (e, c) in b2.coeff_split(1) {
                let tp = Poly::xpow(&ff, 3usize.pow(i)).pow(e as u64);
                acc = acc.add(&c.to_poly(0).unwrap().mul(&tp));
            }
            assert_eq!(acc, b_at_theta_power(&ff, 2, i));
        }
    }
}
