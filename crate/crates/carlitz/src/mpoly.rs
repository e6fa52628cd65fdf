//! Sparse multivariate polynomials over a finite field, used for elements of
//! A[t_1,...,t_n, z] with moderate exponents.
//!
//! Exponent vectors are packed into a u128, 16 lanes of 8 bits (lane i =
//! variable i), so per-variable exponents are capped at 255; arithmetic
//! asserts the cap rather than wrapping. Terms print in graded
//! lexicographic order, highest first, with variable 0 biggest.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::field::{El, FF};
use crate::poly::{Poly, Ring};
use crate::{Error, Result};

pub const MAX_VARS: usize = 16;

#[derive(Clone)]
pub struct MPoly {
    pub ff: Arc<FF>,
    pub vars: Arc<Vec<String>>,
    pub terms: BTreeMap<u128, El>,
}

#[inline]
pub fn pack(exps: &[u8]) -> u128 {
    let mut k = 0u128;
    for (i, &e) in exps.iter().enumerate() {
        k |= (e as u128) << (8 * i);
    }
    k
}

#[inline]
pub fn unpack(key: u128) -> [u8; MAX_VARS] {
    let mut out = [0u8; MAX_VARS];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = ((key >> (8 * i)) & 0xff) as u8;
    }
    out
}

#[inline]
fn key_add(a: u128, b: u128, nvars: usize) -> u128 {
    let mut out = 0u128;
    for i in 0..nvars {
        let s = ((a >> (8 * i)) & 0xff) + ((b >> (8 * i)) & 0xff);
        assert!(s <= 255, "exponent overflow in variable lane {i}");
        out |= s << (8 * i);
    }
    out
}

impl PartialEq for MPoly {
    fn eq(&self, o: &Self) -> bool {
        self.ff.size == o.ff.size && self.terms == o.terms
    }
}
impl Eq for MPoly {}

impl MPoly {
    pub fn new(ff: Arc<FF>, vars: Arc<Vec<String>>, mut terms: BTreeMap<u128, El>) -> MPoly {
        assert!(vars.len() <= MAX_VARS);
        terms.retain(|_, v| *v != 0);
        MPoly { ff, vars, terms }
    }

    pub fn zero(ff: &Arc<FF>, vars: &Arc<Vec<String>>) -> MPoly {
        MPoly { ff: ff.clone(), vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ff: &Arc<FF>, vars: &Arc<Vec<String>>, a: El) -> MPoly {
        let mut terms = BTreeMap::new();
        if a != 0 {
            terms.insert(0, a);
        }
        MPoly { ff: ff.clone(), vars: vars.clone(), terms }
    }

    pub fn one(ff: &Arc<FF>, vars: &Arc<Vec<String>>) -> MPoly {
        MPoly::constant(ff, vars, 1)
    }

    pub fn var(ff: &Arc<FF>, vars: &Arc<Vec<String>>, lane: usize) -> MPoly {
        MPoly::var_pow(ff, vars, lane, 1)
    }

    pub fn var_pow(ff: &Arc<FF>, vars: &Arc<Vec<String>>, lane: usize, e: u8) -> MPoly {
        assert!(lane < vars.len());
        let mut terms = BTreeMap::new();
        terms.insert((e as u128) << (8 * lane), 1);
        MPoly { ff: ff.clone(), vars: vars.clone(), terms }
    }

    /// Lift a univariate polynomial into the given lane.
    pub fn from_poly(p: &Poly, vars: &Arc<Vec<String>>, lane: usize) -> MPoly {
        let mut terms = BTreeMap::new();
        for (i, &a) in p.c.iter().enumerate() {
            if a != 0 {
                assert!(i <= 255, "exponent overflow lifting into lane {lane}");
                terms.insert((i as u128) << (8 * lane), a);
            }
        }
        MPoly { ff: p.ff.clone(), vars: vars.clone(), terms }
    }

    /// Collapse to a univariate polynomial in the given lane; the other
    /// lanes must be absent.
    pub fn to_poly(&self, lane: usize) -> Result<Poly> {
        let mask = !(0xffu128 << (8 * lane));
        let mut c = vec![];
        for (&k, &v) in &self.terms {
            if k & mask != 0 {
                return Err(Error::Usage(format!(
                    "polynomial {self} involves more than the requested variable"
                )));
            }
            let e = ((k >> (8 * lane)) & 0xff) as usize;
            if c.len() <= e {
                c.resize(e + 1, 0);
            }
            c[e] = v;
        }
        Ok(Poly::new(self.ff.clone(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&k| k == 0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        let f = &self.ff;
        let mut terms = self.terms.clone();
        for (&k, &v) in &o.terms {
            let nv = f.add(*terms.get(&k).unwrap_or(&0), v);
            if nv == 0 {
                terms.remove(&k);
            } else {
                terms.insert(k, nv);
            }
        }
        MPoly { ff: f.clone(), vars: self.vars.clone(), terms }
    }

    pub fn neg(&self) -> MPoly {
        let f = &self.ff;
        let terms = self.terms.iter().map(|(&k, &v)| (k, f.neg(v))).collect();
        MPoly { ff: f.clone(), vars: self.vars.clone(), terms }
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &MPoly) -> MPoly {
        let f = &self.ff;
        let nv = self.vars.len();
        let mut terms: BTreeMap<u128, El> = BTreeMap::new();
        for (&ka, &va) in &self.terms {
            for (&kb, &vb) in &o.terms {
                let k = key_add(ka, kb, nv);
                let prod = f.mul(va, vb);
                let cur = f.add(*terms.get(&k).unwrap_or(&0), prod);
                if cur == 0 {
                    terms.remove(&k);
                } else {
                    terms.insert(k, cur);
                }
            }
        }
        MPoly { ff: f.clone(), vars: self.vars.clone(), terms }
    }

    pub fn mul_scalar(&self, a: El) -> MPoly {
        let f = &self.ff;
        let mut terms = BTreeMap::new();
        for (&k, &v) in &self.terms {
            let nv = f.mul(v, a);
            if nv != 0 {
                terms.insert(k, nv);
            }
        }
        MPoly { ff: f.clone(), vars: self.vars.clone(), terms }
    }

    pub fn pow(&self, mut n: u64) -> MPoly {
        let mut acc = MPoly::one(&self.ff, &self.vars);
        let mut b = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&b);
            }
            n >>= 1;
            if n > 0 {
                b = b.mul(&b);
            }
        }
        acc
    }

    pub fn deg_var(&self, lane: usize) -> i64 {
        self.terms
            .keys()
            .map(|&k| ((k >> (8 * lane)) & 0xff) as i64)
            .max()
            .unwrap_or(-1)
    }

    pub fn total_deg(&self) -> i64 {
        self.terms
            .keys()
            .map(|&k| unpack(k).iter().map(|&e| e as i64).sum())
            .max()
            .unwrap_or(-1)
    }

    /// Coefficients of lane^e for e = 0.., with the lane cleared.
    pub fn coeff_split(&self, lane: usize) -> BTreeMap<u8, MPoly> {
        let mut out: BTreeMap<u8, MPoly> = BTreeMap::new();
        let clear = !(0xffu128 << (8 * lane));
        for (&k, &v) in &self.terms {
            let e = ((k >> (8 * lane)) & 0xff) as u8;
            out.entry(e)
                .or_insert_with(|| MPoly::zero(&self.ff, &self.vars))
                .terms
                .insert(k & clear, v);
        }
        out
    }

    /// The coefficient of lane^e as a polynomial with that lane cleared.
    pub fn coeff_of(&self, lane: usize, e: u8) -> MPoly {
        let clear = !(0xffu128 << (8 * lane));
        let mut out = MPoly::zero(&self.ff, &self.vars);
        for (&k, &v) in &self.terms {
            if ((k >> (8 * lane)) & 0xff) as u8 == e {
                out.terms.insert(k & clear, v);
            }
        }
        out
    }

    /// Substitute a field element for one variable.
    pub fn eval_var(&self, lane: usize, x: El) -> MPoly {
        let f = &self.ff;
        let clear = !(0xffu128 << (8 * lane));
        let mut terms: BTreeMap<u128, El> = BTreeMap::new();
        for (&k, &v) in &self.terms {
            let e = ((k >> (8 * lane)) & 0xff) as u32;
            let scaled = f.mul(v, f.pow_u64(x, e as u64));
            if scaled == 0 {
                continue;
            }
            let nk = k & clear;
            let cur = f.add(*terms.get(&nk).unwrap_or(&0), scaled);
            if cur == 0 {
                terms.remove(&nk);
            } else {
                terms.insert(nk, cur);
            }
        }
        MPoly { ff: f.clone(), vars: self.vars.clone(), terms }
    }

    /// Reinterpret over a larger field whose coefficient subfield contains
    /// this one (indices embed unchanged).
    pub fn map_field(&self, ff2: &Arc<FF>) -> Result<MPoly> {
        if ff2.p != self.ff.p || (self.ff.size > ff2.q && self.ff.size != ff2.size) {
            return Err(Error::Usage(format!(
                "cannot embed coefficients of size {} into field of size {} with q={}",
                self.ff.size, ff2.size, ff2.q
            )));
        }
        Ok(MPoly { ff: ff2.clone(), vars: self.vars.clone(), terms: self.terms.clone() })
    }

    /// Apply x -> x^{q^k} to every coefficient (identity over F_q itself).
    pub fn coeff_pow_q(&self, k: u32) -> MPoly {
        let f = &self.ff;
        let n = (f.q as u64).pow(k % (f.d.max(1) * 32).min(u32::MAX)); // safe: k small in practice
        let terms = self.terms.iter().map(|(&key, &v)| (key, f.pow_u64(v, n))).collect();
        MPoly { ff: f.clone(), vars: self.vars.clone(), terms }
    }

    /// Multiply the exponent of one lane by m (θ -> θ^{q} style twists).
    pub fn scale_var_exp(&self, lane: usize, m: u32) -> MPoly {
        let mut terms = BTreeMap::new();
        let clear = !(0xffu128 << (8 * lane));
        for (&k, &v) in &self.terms {
            let e = ((k >> (8 * lane)) & 0xff) as u32 * m;
            assert!(e <= 255, "exponent overflow scaling lane {lane} by {m}");
            terms.insert((k & clear) | ((e as u128) << (8 * lane)), v);
        }
        MPoly { ff: self.ff.clone(), vars: self.vars.clone(), terms }
    }

    /// Exchange two variable lanes.
    pub fn swap_vars(&self, a: usize, b: usize) -> MPoly {
        if a == b {
            return self.clone();
        }
        let mut terms = BTreeMap::new();
        for (&k, &v) in &self.terms {
            let ea = (k >> (8 * a)) & 0xff;
            let eb = (k >> (8 * b)) & 0xff;
            let nk = (k & !(0xffu128 << (8 * a)) & !(0xffu128 << (8 * b)))
                | (eb << (8 * a))
                | (ea << (8 * b));
            terms.insert(nk, v);
        }
        MPoly { ff: self.ff.clone(), vars: self.vars.clone(), terms }
    }

    /// Invariance under every permutation of the given lanes (checked on
    /// adjacent transpositions, which generate).
    pub fn is_symmetric_in(&self, lanes: &[usize]) -> bool {
        lanes
            .windows(2)
            .all(|w| self.swap_vars(w[0], w[1]) == *self)
    }

    fn graded_lex_key(k: u128, nvars: usize) -> (i64, Vec<i64>) {
        let e = unpack(k);
        let total: i64 = e[..nvars].iter().map(|&x| x as i64).sum();
        (total, e[..nvars].iter().map(|&x| x as i64).collect())
    }

    pub fn fmt_str(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let nv = self.vars.len();
        let mut keys: Vec<u128> = self.terms.keys().copied().collect();
        keys.sort_by(|&a, &b| {
            MPoly::graded_lex_key(b, nv).cmp(&MPoly::graded_lex_key(a, nv))
        });
        let f = &self.ff;
        let mut parts = vec![];
        for k in keys {
            let v = self.terms[&k];
            let e = unpack(k);
            let mut factors: Vec<String> = vec![];
            if v != 1 || k == 0 {
                if (v as u32) < f.p {
                    factors.push(format!("{v}"));
                } else {
                    factors.push(format!("({})", f.fmt_el(v)));
                }
            }
            for (i, name) in self.vars.iter().enumerate() {
                match e[i] {
                    0 => {}
                    1 => factors.push(name.clone()),
                    n => factors.push(format!("{name}^{n}")),
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join("+")
    }

    pub fn parse(ff: &Arc<FF>, vars: &Arc<Vec<String>>, s: &str) -> Result<MPoly> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        if s == "0" {
            return Ok(MPoly::zero(ff, vars));
        }
        let mut acc = MPoly::zero(ff, vars);
        let bytes = s.as_bytes();
        let (mut depth, mut start) = (0, 0);
        let mut terms = vec![];
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' if depth == 0 => {
                    terms.push(&s[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        terms.push(&s[start..]);
        for term in terms {
            let mut coef: El = 1;
            let mut exps = [0u8; MAX_VARS];
            for factor in term.trim().split('*') {
                let factor = factor.trim();
                if factor.is_empty() {
                    return Err(Error::Parse(format!("empty factor in {term}")));
                }
                if let Some(inner) = factor.strip_prefix('(') {
                    let inner = inner
                        .strip_suffix(')')
                        .ok_or_else(|| Error::Parse(format!("unbalanced parens in {factor}")))?;
                    coef = ff.mul(coef, ff.parse_el(inner)?);
                } else if factor.chars().all(|c| c.is_ascii_digit()) {
                    let d: u64 = factor
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad number {factor}")))?;
                    if d >= ff.size as u64 {
                        return Err(Error::Parse(format!("coefficient {d} out of range")));
                    }
                    coef = ff.mul(coef, d as El);
                } else {
                    let (name, exp) = match factor.split_once('^') {
                        Some((n, e)) => (
                            n.trim(),
                            e.trim()
                                .parse::<u32>()
                                .map_err(|_| Error::Parse(format!("bad exponent in {factor}")))?,
                        ),
                        None => (factor, 1),
                    };
                    let lane = vars
                        .iter()
                        .position(|v| v == name)
                        .ok_or_else(|| Error::Parse(format!("unknown variable {name}")))?;
                    let ne = exps[lane] as u32 + exp;
                    if ne > 255 {
                        return Err(Error::Parse(format!("exponent too large in {factor}")));
                    }
                    exps[lane] = ne as u8;
                }
            }
            let mono = MPoly::new(ff.clone(), vars.clone(), {
                let mut t = BTreeMap::new();
                t.insert(pack(&exps), coef);
                t
            });
            acc = acc.add(&mono);
        }
        Ok(acc)
    }
}

impl std::fmt::Display for MPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.fmt_str())
    }
}

impl std::fmt::Debug for MPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.fmt_str())
    }
}

impl Ring for MPoly {
    fn rzero(&self) -> Self {
        MPoly::zero(&self.ff, &self.vars)
    }
    fn rone(&self) -> Self {
        MPoly::one(&self.ff, &self.vars)
    }
    fn radd(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn rmul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn rneg(&self) -> Self {
        self.neg()
    }
    fn is_zero(&self) -> bool {
        MPoly::is_zero(self)
    }
}

/// Standard variable list T, t1..tn, z.
pub fn tz_vars(n: usize) -> Arc<Vec<String>> {
    let mut v = vec!["T".to_string()];
    for i in 1..=n {
        v.push(format!("t{i}"));
    }
    v.push("z".to_string());
    Arc::new(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ff3() -> Arc<FF> {
        FF::get(3, 1, 1).unwrap()
    }

    #[test]
    fn graded_lex_print_order() {
        let ff = ff3();
        let vars = tz_vars(1); // T, t1, z
        let p = MPoly::parse(&ff, &vars, "T^2+T*t1+t1^2*z").unwrap();
        assert_eq!(p.fmt_str(), "t1^2*z+T^2+T*t1");
    }

    #[test]
    fn parse_print_roundtrip() {
        let ff = ff3();
        let vars = tz_vars(2);
        for s in ["0", "1", "2", "T^2*t1+2*z", "t1*t2+2*t1+2*t2+1", "2*T^30*z^3"] {
            let p = MPoly::parse(&ff, &vars, s).unwrap();
            assert_eq!(MPoly::parse(&ff, &vars, &p.fmt_str()).unwrap(), p);
        }
        // canonical form pin
        let p = MPoly::parse(&ff, &vars, "z*t1+T+1+2*T").unwrap();
        assert_eq!(p.fmt_str(), "t1*z+1");
    }

    #[test]
    fn arithmetic_and_split() {
        let ff = ff3();
        let vars = tz_vars(1);
        let a = MPoly::parse(&ff, &vars, "T+t1+z").unwrap();
        let b = MPoly::parse(&ff, &vars, "T+2*t1").unwrap();
        let prod = a.mul(&b);
        assert_eq!(
            prod,
            MPoly::parse(&ff, &vars, "T^2+2*t1^2+T*z+2*t1*z+T*t1+2*T*t1").unwrap()
        );
        // reassemble from z-split
        let zlane = 2;
        let split = prod.coeff_split(zlane);
        let mut back = MPoly::zero(&ff, &vars);
        for (e, c) in split {
            back = back.add(&c.mul(&MPoly::var_pow(&ff, &vars, zlane, e)));
        }
        assert_eq!(back, prod);
    }

    #[test]
    fn eval_and_symmetry() {
        let ff = ff3();
        let vars = tz_vars(2);
        let sym = MPoly::parse(&ff, &vars, "t1*t2+t1+t2").unwrap();
        assert!(sym.is_symmetric_in(&[1, 2]));
        let asym = MPoly::parse(&ff, &vars, "t1^2*t2").unwrap();
        assert!(!asym.is_symmetric_in(&[1, 2]));
        // eval t1 = 2: t2*2 + 2 + t2 = 3t2+2 = 2
        let e = sym.eval_var(1, 2);
        assert_eq!(e, MPoly::parse(&ff, &vars, "2").unwrap());
    }

    #[test]
    fn poly_conversions_and_twist() {
        let ff = ff3();
        let vars = tz_vars(1);
        let p = Poly::parse(&ff, "T^3+2*T+1", "T").unwrap();
        let m = MPoly::from_poly(&p, &vars, 0);
        assert_eq!(m.to_poly(0).unwrap(), p);
        // tau on A: exponents scale by q, F_q coefficients fixed
        let tw = m.scale_var_exp(0, 3);
        assert_eq!(tw.to_poly(0).unwrap(), Poly::parse(&ff, "T^9+2*T^3+1", "T").unwrap());
        assert_eq!(tw.to_poly(0).unwrap(), p.pow(3));
    }

    #[test]
    #[should_panic(expected = "exponent overflow")]
    fn overflow_is_loud() {
        let ff = ff3();
        let vars = tz_vars(0);
        let p = MPoly::var_pow(&ff, &vars, 0, 200);
        let _ = p.mul(&p);
    }

    #[test]
    fn map_field_embeds_by_index() {
        let ff = ff3();
        let f9 = FF::get(3, 1, 2).unwrap();
        let vars = tz_vars(1);
        let p = MPoly::parse(&ff, &vars, "2*t1+1").unwrap();
        let up = p.map_field(&f9).unwrap();
        // evaluating t1 at an F_9 element now works
        let v = up.eval_var(1, 5);
        assert!(v.is_constant());
    }
}
