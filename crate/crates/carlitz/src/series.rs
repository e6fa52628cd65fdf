//! Truncated Laurent expansions at the infinite place of F_q(T).
//!
//! A `Window` is a finite piece of an element of F_q((1/T)): the stored key v
//! holds the coefficient of T^{-v}, every key >= `prec` is unknown, and all
//! arithmetic tracks the absolute precision honestly. Exact elements (images
//! of polynomials) carry an effectively infinite precision so they never
//! degrade a computation.
//!
//! The precision rule for products is the sharp one,
//! prec(xy) = min(prec(x) + v(y), prec(y) + v(x)),
//! with the valuation of an (apparently) zero window read as its precision.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::field::{El, FF};
use crate::poly::Poly;
use crate::{Error, Result};

/// Sentinel precision for exact values; far from overflow under addition of
/// realistic valuations.
pub const EXACT: i64 = i64::MAX / 4;

#[derive(Clone)]
pub struct Window {
    pub ff: Arc<FF>,
    /// Coefficient of T^{-v} per key v; keys < prec, values nonzero.
    pub terms: BTreeMap<i64, El>,
    pub prec: i64,
}

impl PartialEq for Window {
    fn eq(&self, o: &Self) -> bool {
        self.ff.size == o.ff.size && self.prec == o.prec && self.terms == o.terms
    }
}
impl Eq for Window {}

fn cap(p: i64) -> i64 {
    p.min(EXACT)
}

impl Window {
    pub fn new(ff: Arc<FF>, mut terms: BTreeMap<i64, El>, prec: i64) -> Window {
        let prec = cap(prec);
        terms.retain(|&k, v| *v != 0 && k < prec);
        Window { ff, terms, prec }
    }

    pub fn zero(ff: &Arc<FF>, prec: i64) -> Window {
        Window { ff: ff.clone(), terms: BTreeMap::new(), prec: cap(prec) }
    }

    pub fn exact_zero(ff: &Arc<FF>) -> Window {
        Window::zero(ff, EXACT)
    }

    pub fn one(ff: &Arc<FF>) -> Window {
        Window::from_poly(&Poly::one(ff))
    }

    /// Exact image of a polynomial in T.
    pub fn from_poly(p: &Poly) -> Window {
        let mut terms = BTreeMap::new();
        for (i, &a) in p.c.iter().enumerate() {
            if a != 0 {
                terms.insert(-(i as i64), a);
            }
        }
        Window { ff: p.ff.clone(), terms, prec: EXACT }
    }

    /// c * T^{-v} exactly.
    pub fn monomial(ff: &Arc<FF>, c: El, v: i64) -> Window {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(v, c);
        }
        Window { ff: ff.clone(), terms, prec: EXACT }
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    /// No known nonzero coefficient (could still be nonzero beyond prec).
    pub fn is_zero_window(&self) -> bool {
        self.terms.is_empty()
    }

    /// Valuation: smallest key with a nonzero coefficient, or the precision
    /// itself for a zero window (best available lower bound).
    pub fn val(&self) -> i64 {
        self.terms.keys().next().copied().unwrap_or(self.prec)
    }

    pub fn coeff(&self, v: i64) -> Result<El> {
        if v >= self.prec {
            return Err(Error::PrecisionExhausted(format!(
                "coefficient of T^-{v} requested at precision O(T^-{})",
                self.prec
            )));
        }
        Ok(*self.terms.get(&v).unwrap_or(&0))
    }

    pub fn add(&self, o: &Window) -> Window {
        let f = &self.ff;
        let prec = self.prec.min(o.prec);
        let mut terms = self.terms.clone();
        for (&k, &v) in &o.terms {
            let nv = f.add(*terms.get(&k).unwrap_or(&0), v);
            if nv == 0 {
                terms.remove(&k);
            } else {
                terms.insert(k, nv);
            }
        }
        Window::new(f.clone(), terms, prec)
    }

    pub fn neg(&self) -> Window {
        let f = &self.ff;
        let terms = self.terms.iter().map(|(&k, &v)| (k, f.neg(v))).collect();
        Window { ff: f.clone(), terms, prec: self.prec }
    }

    pub fn sub(&self, o: &Window) -> Window {
        self.add(&o.neg())
    }

    pub fn mul_scalar(&self, a: El) -> Window {
        if a == 0 {
            return Window::zero(&self.ff, self.prec);
        }
        let f = &self.ff;
        let terms = self.terms.iter().map(|(&k, &v)| (k, f.mul(v, a))).collect();
        Window { ff: f.clone(), terms, prec: self.prec }
    }

    pub fn mul(&self, o: &Window) -> Window {
        let f = &self.ff;
        let prec = cap(self.prec.saturating_add(o.val()).min(o.prec.saturating_add(self.val())));
        let mut terms: BTreeMap<i64, El> = BTreeMap::new();
        for (&ka, &va) in &self.terms {
            for (&kb, &vb) in &o.terms {
                let k = ka + kb;
                if k >= prec {
                    continue;
                }
                let p = f.mul(va, vb);
                let cur = f.add(*terms.get(&k).unwrap_or(&0), p);
                if cur == 0 {
                    terms.remove(&k);
                } else {
                    terms.insert(k, cur);
                }
            }
        }
        Window { ff: f.clone(), terms, prec }
    }

    /// Multiply by T^k exactly.
    pub fn shift(&self, k: i64) -> Window {
        let terms = self.terms.iter().map(|(&v, &c)| (v - k, c)).collect();
        let prec = if self.is_exact() { EXACT } else { self.prec - k };
        Window { ff: self.ff.clone(), terms, prec: cap(prec) }
    }

    pub fn truncate(&self, prec: i64) -> Window {
        Window::new(self.ff.clone(), self.terms.clone(), self.prec.min(prec))
    }

    /// Inverse; requires a known leading coefficient. Absolute precision of
    /// the result is prec - 2*val.
    pub fn inv(&self) -> Result<Window> {
        if self.terms.is_empty() {
            return Err(Error::NotAUnit(format!(
                "cannot invert a window with no known coefficients (O(T^-{}))",
                self.prec
            )));
        }
        let f = &self.ff;
        let v = self.val();
        let c = self.terms[&v];
        let ci = f.inv(c)?;
        let rel = if self.is_exact() { DEFAULT_INV_REL } else { self.prec - v };
        // y = 1/x with keys in [-v, -v + rel); solve triangularly
        let mut y: BTreeMap<i64, El> = BTreeMap::new();
        y.insert(-v, ci);
        for k in 1..rel {
            // coefficient of T^{-(k)} in x*y (shifted so k=0 is the lead): sum must vanish
            let mut s: El = 0;
            for (&vx, &cx) in self.terms.range(v + 1..=v + k) {
                if let Some(&cy) = y.get(&(k - (vx - v) - v)) {
                    s = f.add(s, f.mul(cx, cy));
                }
            }
            if s != 0 {
                y.insert(k - v, f.mul(f.neg(s), ci));
            }
        }
        let prec = if self.is_exact() {
            DEFAULT_INV_REL - v
        } else {
            self.prec - 2 * v
        };
        Ok(Window::new(f.clone(), y, prec))
    }

    /// q-power Frobenius: keys scale by q, coefficients to the q, precision
    /// scales exactly (additive characteristic-p expansion).
    pub fn qpow(&self) -> Window {
        let f = &self.ff;
        let q = f.q as u64;
        let terms = self
            .terms
            .iter()
            .map(|(&k, &c)| (k * q as i64, f.pow_u64(c, q)))
            .collect();
        let prec = if self.is_exact() { EXACT } else { self.prec.saturating_mul(q as i64) };
        Window { ff: f.clone(), terms, prec: cap(prec) }
    }

    pub fn qpow_iter(&self, k: u32) -> Window {
        let mut w = self.clone();
        for _ in 0..k {
            w = w.qpow();
        }
        w
    }

    /// Extract a polynomial in T: every known coefficient with v > 0 must
    /// vanish and the window must actually certify something below T^0.
    pub fn extract_poly(&self) -> Result<Poly> {
        if self.prec <= 0 {
            return Err(Error::NotPolynomialAtPrecision(format!(
                "window O(T^-{}) sees no tail at all",
                self.prec
            )));
        }
        if let Some((&k, _)) = self.terms.range(1..).next() {
            return Err(Error::NotPolynomialAtPrecision(format!(
                "nonzero coefficient at T^-{k}"
            )));
        }
        let deg = (-self.val()).max(0) as usize;
        let mut c = vec![0 as El; deg + 1];
        for (&v, &a) in self.terms.range(..=0) {
            c[(-v) as usize] = a;
        }
        Ok(Poly::new(self.ff.clone(), c))
    }

    pub fn fmt_str(&self) -> String {
        let mut parts: Vec<String> = vec![];
        let f = &self.ff;
        for (&v, &c) in &self.terms {
            let cs = if (c as u32) < f.p {
                format!("{c}")
            } else {
                format!("({})", f.fmt_el(c))
            };
            let e = -v;
            let s = match e {
                0 => cs,
                1 if c == 1 => "T".into(),
                1 => format!("{cs}*T"),
                _ if c == 1 => format!("T^{e}"),
                _ => format!("{cs}*T^{e}"),
            };
            parts.push(s);
        }
        let mut out = parts.join("+");
        if out.is_empty() {
            out = "0".into();
        }
        if !self.is_exact() {
            out = format!("{out}+O(T^-{})", self.prec);
            if self.terms.is_empty() {
                out = format!("O(T^-{})", self.prec);
            }
        }
        out
    }

    pub fn parse(ff: &Arc<FF>, s: &str) -> Result<Window> {
        let s = s.trim();
        let mut terms = BTreeMap::new();
        let mut prec = EXACT;
        for term in s.split('+') {
            let term = term.trim();
            if term == "0" {
                continue;
            }
            if let Some(inner) = term.strip_prefix("O(").and_then(|t| t.strip_suffix(')')) {
                let inner = inner.trim();
                let e: i64 = if let Some(r) = inner.strip_prefix("T^") {
                    r.parse().map_err(|_| Error::Parse(format!("bad O-term {term}")))?
                } else if inner == "T" {
                    1
                } else {
                    return Err(Error::Parse(format!("bad O-term {term}")));
                };
                prec = prec.min(-e);
                continue;
            }
            let (cs, rest) = if let Some(inner) = term.strip_prefix('(') {
                let close = inner
                    .find(')')
                    .ok_or_else(|| Error::Parse(format!("unbalanced parens in {term}")))?;
                let el = ff.parse_el(&inner[..close])?;
                let mut r = inner[close + 1..].trim();
                r = r.strip_prefix('*').map(str::trim).unwrap_or(r);
                (el, r)
            } else if term.starts_with(|c: char| c.is_ascii_digit()) {
                let split = term.find(|c: char| !c.is_ascii_digit()).unwrap_or(term.len());
                let d: u64 = term[..split]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad coefficient in {term}")))?;
                if d >= ff.size as u64 {
                    return Err(Error::Parse(format!("coefficient {d} out of range")));
                }
                let mut r = term[split..].trim();
                r = r.strip_prefix('*').map(str::trim).unwrap_or(r);
                (d as El, r)
            } else {
                (1 as El, term)
            };
            let e: i64 = if rest.is_empty() {
                0
            } else if rest == "T" {
                1
            } else if let Some(r) = rest.strip_prefix("T^") {
                r.parse().map_err(|_| Error::Parse(format!("bad exponent in {term}")))?
            } else {
                return Err(Error::Parse(format!("unrecognized term {term}")));
            };
            if cs != 0 {
                let k = -e;
                terms.insert(k, cs);
            }
        }
        Ok(Window::new(ff.clone(), terms, prec))
    }
}

/// Relative precision used when inverting an exact element; generous for
/// every consumer in this crate, and consumers that need more multiply
/// truncated exact inputs instead.
pub const DEFAULT_INV_REL: i64 = 220;

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.fmt_str())
    }
}

impl std::fmt::Debug for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.fmt_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ff3() -> Arc<FF> {
        FF::get(3, 1, 1).unwrap()
    }

    fn w(s: &str) -> Window {
        Window::parse(&ff3(), s).unwrap()
    }

    #[test]
    fn print_parse_roundtrip() {
        for s in [
            "T^2+2+T^-1+O(T^-5)",
            "O(T^-3)",
            "1",
            "2*T^-4",
            "T+2*T^-1+O(T^-9)",
        ] {
            assert_eq!(w(s).fmt_str(), *s);
        }
    }

    #[test]
    fn product_precision_rule() {
        // (T^-1 + O(T^-5)) * (T^-2 + O(T^-4)): min(5+2, 4+1) = 5
        let a = w("T^-1+O(T^-5)");
        let b = w("T^-2+O(T^-4)");
        let p = a.mul(&b);
        assert_eq!(p.prec, 5);
        assert_eq!(p.fmt_str(), "T^-3+O(T^-5)");
        // zero window uses its precision as valuation bound
        let z = w("O(T^-7)");
        let p2 = a.mul(&z);
        assert_eq!(p2.prec, 8);
        assert!(p2.is_zero_window());
    }

    #[test]
    fn inversion_roundtrip() {
        let x = w("1+2*T^-1+T^-3+O(T^-12)");
        let y = x.inv().unwrap();
        assert_eq!(y.prec, 12);
        let p = x.mul(&y);
        assert_eq!(p.val(), 0);
        assert_eq!(p.coeff(0).unwrap(), 1);
        for v in 1..p.prec {
            assert_eq!(p.coeff(v).unwrap(), 0);
        }
        // geometric series: 1/(1 - T^-1) = 1 + T^-1 + T^-2 + ...
        let g = w("1+2*T^-1").inv().unwrap();
        for v in 0..20 {
            assert_eq!(g.coeff(v).unwrap(), 1);
        }
        // with a shift: 1/(T^2+1) has valuation 2 and precision p-2*(-2)... exact input
        let e = Window::from_poly(&Poly::parse(&ff3(), "T^2+1", "T").unwrap());
        let i = e.inv().unwrap();
        assert_eq!(i.val(), 2);
        let back = e.mul(&i);
        assert_eq!(back.coeff(0).unwrap(), 1);
    }

    #[test]
    fn qpow_is_frobenius() {
        let x = w("T^-1+T^-2+O(T^-7)");
        let y = x.qpow();
        assert_eq!(y.fmt_str(), "T^-3+T^-6+O(T^-21)");
        // (a+b)^q = a^q + b^q check via mul
        let cube = x.mul(&x).mul(&x);
        assert_eq!(cube.terms, y.truncate(cube.prec).terms);
    }

    #[test]
    fn polynomial_extraction() {
        let p = Poly::parse(&ff3(), "2*T^3+T+1", "T").unwrap();
        let x = Window::from_poly(&p);
        assert_eq!(x.extract_poly().unwrap(), p);
        let y = x.add(&w("O(T^-4)"));
        assert_eq!(y.extract_poly().unwrap(), p);
        let bad = x.add(&w("T^-2"));
        assert!(matches!(bad.extract_poly(), Err(Error::NotPolynomialAtPrecision(_))));
        let blind = w("O(T^0)");
        assert!(matches!(blind.extract_poly(), Err(Error::NotPolynomialAtPrecision(_))));
    }

    #[test]
    fn shift_and_coeff_bounds() {
        let x = w("1+O(T^-3)");
        let s = x.shift(2);
        assert_eq!(s.fmt_str(), "T^2+O(T^-1)");
        assert!(matches!(x.coeff(3), Err(Error::PrecisionExhausted(_))));
        assert_eq!(x.coeff(2).unwrap(), 0);
    }
}
