//! Concrete ambient groups.
//!
//! Elements are flat coordinate vectors. Unitriangular matrices store their
//! strictly upper entries row by row, so the 3x3 Heisenberg element with
//! entries `x = a12`, `z = a13`, `y = a23` is stored as `[x, z, y]`.

use crate::error::{Error, Result};
use serde_json::{json, Value};
use smallvec::SmallVec;
use std::fmt;

pub type Elem = SmallVec<[i64; 4]>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    Int,
    Mod(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    Cyclic { modulus: u64 },
    Lattice { rank: usize },
    Unitriangular { dim: usize, ring: Ring },
    MatMod { dim: usize, p: u64 },
    Product(Box<Group>, Box<Group>),
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

fn modp(x: i128, p: u64) -> i64 {
    x.rem_euclid(p as i128) as i64
}

impl Group {
    pub fn cyclic(modulus: u64) -> Result<Self> {
        if modulus == 0 || modulus > (i64::MAX as u64) / 2 {
            return Err(Error::InvalidGroup(format!("modulus {modulus} out of range")));
        }
        Ok(Group::Cyclic { modulus })
    }

    pub fn lattice(rank: usize) -> Result<Self> {
        if rank == 0 || rank > 16 {
            return Err(Error::InvalidGroup(format!("lattice rank {rank} out of range 1..16")));
        }
        Ok(Group::Lattice { rank })
    }

    pub fn unitriangular(dim: usize, ring: Ring) -> Result<Self> {
        if !(2..=4).contains(&dim) {
            return Err(Error::InvalidGroup(format!("dim {dim} outside 2..4")));
        }
        if let Ring::Mod(p) = ring {
            if !is_prime(p) {
                return Err(Error::InvalidGroup(format!("{p} is not prime")));
            }
        }
        Ok(Group::Unitriangular { dim, ring })
    }

    pub fn heisenberg() -> Self {
        Group::Unitriangular { dim: 3, ring: Ring::Int }
    }

    pub fn matmod(dim: usize, p: u64) -> Result<Self> {
        if !(2..=4).contains(&dim) {
            return Err(Error::InvalidGroup(format!("dim {dim} outside 2..4")));
        }
        if !is_prime(p) || p > 1 << 31 {
            return Err(Error::InvalidGroup(format!("{p} is not a usable prime")));
        }
        Ok(Group::MatMod { dim, p })
    }

    pub fn product(left: Group, right: Group) -> Self {
        Group::Product(Box::new(left), Box::new(right))
    }

    /// Number of integer coordinates in an element.
    pub fn width(&self) -> usize {
        match self {
            Group::Cyclic { .. } => 1,
            Group::Lattice { rank } => *rank,
            Group::Unitriangular { dim, .. } => dim * (dim - 1) / 2,
            Group::MatMod { dim, .. } => dim * dim,
            Group::Product(l, r) => l.width() + r.width(),
        }
    }

    pub fn identity(&self) -> Elem {
        match self {
            Group::MatMod { dim, .. } => {
                let mut e: Elem = SmallVec::from_elem(0, dim * dim);
                for i in 0..*dim {
                    e[i * dim + i] = 1;
                }
                e
            }
            Group::Product(l, r) => {
                let mut e = l.identity();
                e.extend(r.identity());
                e
            }
            _ => SmallVec::from_elem(0, self.width()),
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            Group::Cyclic { .. } | Group::Lattice { .. } => true,
            Group::Unitriangular { dim, .. } => *dim == 2,
            Group::MatMod { .. } => false,
            Group::Product(l, r) => l.is_abelian() && r.is_abelian(),
        }
    }

    /// Group order when finite.
    pub fn order(&self) -> Option<u128> {
        match self {
            Group::Cyclic { modulus } => Some(*modulus as u128),
            Group::Lattice { .. } => None,
            Group::Unitriangular { ring: Ring::Int, .. } => None,
            Group::Unitriangular { dim, ring: Ring::Mod(p) } => {
                (*p as u128).checked_pow((dim * (dim - 1) / 2) as u32)
            }
            Group::MatMod { dim, p } => {
                let q = *p as u128;
                let qn = q.checked_pow(*dim as u32)?;
                let mut ord: u128 = 1;
                let mut qi: u128 = 1;
                for _ in 0..*dim {
                    ord = ord.checked_mul(qn - qi)?;
                    qi *= q;
                }
                Some(ord)
            }
            Group::Product(l, r) => l.order()?.checked_mul(r.order()?),
        }
    }

    /// Invariant factors when the group is a finite product of cyclic groups.
    pub fn cyclic_moduli(&self) -> Option<Vec<u64>> {
        match self {
            Group::Cyclic { modulus } => Some(vec![*modulus]),
            Group::Unitriangular { dim: 2, ring: Ring::Mod(p) } => Some(vec![*p]),
            Group::Product(l, r) => {
                let mut v = l.cyclic_moduli()?;
                v.extend(r.cyclic_moduli()?);
                Some(v)
            }
            _ => None,
        }
    }

    pub fn validate(&self, a: &[i64]) -> Result<()> {
        let bad = || Error::ContextMismatch(format!("{a:?}"));
        if a.len() != self.width() {
            return Err(bad());
        }
        match self {
            Group::Cyclic { modulus } => {
                if a[0] < 0 || a[0] as u64 >= *modulus {
                    return Err(bad());
                }
            }
            Group::Lattice { .. } | Group::Unitriangular { ring: Ring::Int, .. } => {}
            Group::Unitriangular { ring: Ring::Mod(p), .. } => {
                if a.iter().any(|&x| x < 0 || x as u64 >= *p) {
                    return Err(bad());
                }
            }
            Group::MatMod { dim, p } => {
                if a.iter().any(|&x| x < 0 || x as u64 >= *p) {
                    return Err(bad());
                }
                if det_mod(a, *dim, *p) == 0 {
                    return Err(bad());
                }
            }
            Group::Product(l, r) => {
                let w = l.width();
                l.validate(&a[..w])?;
                r.validate(&a[w..])?;
            }
        }
        Ok(())
    }

    /// Reduce raw integers into canonical coordinates (residues for modular kinds).
    pub fn reduce(&self, raw: &[i64]) -> Result<Elem> {
        if raw.len() != self.width() {
            return Err(Error::ContextMismatch(format!("{raw:?}")));
        }
        let e: Elem = match self {
            Group::Cyclic { modulus } => SmallVec::from_slice(&[modp(raw[0] as i128, *modulus)]),
            Group::Unitriangular { ring: Ring::Mod(p), .. } | Group::MatMod { p, .. } => {
                raw.iter().map(|&x| modp(x as i128, *p)).collect()
            }
            Group::Product(l, r) => {
                let w = l.width();
                let mut e = l.reduce(&raw[..w])?;
                e.extend(r.reduce(&raw[w..])?);
                e
            }
            _ => SmallVec::from_slice(raw),
        };
        self.validate(&e)?;
        Ok(e)
    }

    pub fn mul(&self, a: &[i64], b: &[i64]) -> Result<Elem> {
        match self {
            Group::Cyclic { modulus } => {
                let m = *modulus as i64;
                let s = a[0] + b[0];
                Ok(SmallVec::from_slice(&[if s >= m { s - m } else { s }]))
            }
            Group::Lattice { .. } => a
                .iter()
                .zip(b)
                .map(|(x, y)| x.checked_add(*y).ok_or(Error::Overflow("lattice product")))
                .collect(),
            Group::Unitriangular { dim, ring } => unitri_mul(a, b, *dim, *ring),
            Group::MatMod { dim, p } => Ok(matmod_mul(a, b, *dim, *p)),
            Group::Product(l, r) => {
                let w = l.width();
                let mut e = l.mul(&a[..w], &b[..w])?;
                e.extend(r.mul(&a[w..], &b[w..])?);
                Ok(e)
            }
        }
    }

    pub fn inv(&self, a: &[i64]) -> Result<Elem> {
        match self {
            Group::Cyclic { modulus } => {
                let m = *modulus as i64;
                Ok(SmallVec::from_slice(&[if a[0] == 0 { 0 } else { m - a[0] }]))
            }
            Group::Lattice { .. } => a
                .iter()
                .map(|x| x.checked_neg().ok_or(Error::Overflow("lattice inverse")))
                .collect(),
            Group::Unitriangular { dim, ring } => unitri_inv(a, *dim, *ring),
            Group::MatMod { dim, p } => matmod_inv(a, *dim, *p),
            Group::Product(l, r) => {
                let w = l.width();
                let mut e = l.inv(&a[..w])?;
                e.extend(r.inv(&a[w..])?);
                Ok(e)
            }
        }
    }

    pub fn is_identity(&self, a: &[i64]) -> bool {
        a == self.identity().as_slice()
    }

    pub fn pow(&self, a: &[i64], n: i64) -> Result<Elem> {
        let base = if n < 0 { self.inv(a)? } else { SmallVec::from_slice(a) };
        let mut k = n.unsigned_abs();
        let mut acc = self.identity();
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &sq)?;
            }
            k >>= 1;
            if k > 0 {
                sq = self.mul(&sq, &sq)?;
            }
        }
        Ok(acc)
    }

    /// `[a, b] = a^-1 b^-1 a b`.
    pub fn commutator(&self, a: &[i64], b: &[i64]) -> Result<Elem> {
        let ai = self.inv(a)?;
        let bi = self.inv(b)?;
        let x = self.mul(&ai, &bi)?;
        let x = self.mul(&x, a)?;
        self.mul(&x, b)
    }

    /// `a^b = b^-1 a b`.
    pub fn conj(&self, a: &[i64], b: &[i64]) -> Result<Elem> {
        let bi = self.inv(b)?;
        let x = self.mul(&bi, a)?;
        self.mul(&x, b)
    }

    /// Enumerate a finite group in canonical order.
    pub fn elements(&self, limit: usize) -> Result<Vec<Elem>> {
        let ord = self
            .order()
            .ok_or_else(|| Error::Budget("cannot enumerate an infinite group".into()))?;
        if ord > limit as u128 {
            return Err(Error::Budget(format!("group order {ord} exceeds limit {limit}")));
        }
        let out = match self {
            Group::Cyclic { modulus } => (0..*modulus as i64).map(|x| SmallVec::from_slice(&[x])).collect(),
            Group::Unitriangular { dim, ring: Ring::Mod(p) } => {
                cartesian(&vec![*p as i64; dim * (dim - 1) / 2])
            }
            Group::MatMod { dim, p } => cartesian(&vec![*p as i64; dim * dim])
                .into_iter()
                .filter(|m| det_mod(m, *dim, *p) != 0)
                .collect(),
            Group::Product(l, r) => {
                let le = l.elements(limit)?;
                let re = r.elements(limit)?;
                let mut v = Vec::with_capacity(le.len() * re.len());
                for x in &le {
                    for y in &re {
                        let mut e = x.clone();
                        e.extend(y.iter().copied());
                        v.push(e);
                    }
                }
                v
            }
            _ => unreachable!(),
        };
        Ok(out)
    }

    /// Order-preserving, injective byte encoding.
    pub fn encode(&self, a: &[i64]) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * a.len());
        for &x in a {
            out.extend_from_slice(&((x as u64) ^ (1 << 63)).to_be_bytes());
        }
        out
    }

    pub fn decode(&self, bytes: &[u8]) -> Result<Elem> {
        if bytes.len() != 8 * self.width() {
            return Err(Error::ContextMismatch(hex::encode(bytes)));
        }
        let e: Elem = bytes
            .chunks_exact(8)
            .map(|c| (u64::from_be_bytes(c.try_into().unwrap()) ^ (1 << 63)) as i64)
            .collect();
        self.validate(&e)?;
        Ok(e)
    }

    pub fn elem_to_json(&self, a: &[i64]) -> Value {
        if a.len() == 1 {
            json!(a[0])
        } else {
            json!(a)
        }
    }

    pub fn elem_from_json(&self, v: &Value) -> Result<Elem> {
        let raw: Vec<i64> = match v {
            Value::Number(n) => vec![n.as_i64().ok_or_else(|| Error::ContextMismatch(v.to_string()))?],
            Value::Array(xs) => xs
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| Error::ContextMismatch(v.to_string())))
                .collect::<Result<_>>()?,
            _ => return Err(Error::ContextMismatch(v.to_string())),
        };
        self.reduce(&raw)
    }

    pub fn to_json(&self) -> Value {
        match self {
            Group::Cyclic { modulus } => json!({"kind": "cyclic", "modulus": modulus}),
            Group::Lattice { rank } => json!({"kind": "lattice", "rank": rank}),
            Group::Unitriangular { dim, ring } => {
                let r = match ring {
                    Ring::Int => json!("int"),
                    Ring::Mod(p) => json!({"mod": p}),
                };
                json!({"kind": "unitriangular", "dim": dim, "ring": r})
            }
            Group::MatMod { dim, p } => json!({"kind": "matmod", "dim": dim, "p": p}),
            Group::Product(l, r) => json!({"kind": "product", "left": l.to_json(), "right": r.to_json()}),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Cyclic { modulus } => write!(f, "cyclic:{modulus}"),
            Group::Lattice { rank } => write!(f, "lattice:{rank}"),
            Group::Unitriangular { dim, ring: Ring::Int } => write!(f, "unitriangular:{dim}:int"),
            Group::Unitriangular { dim, ring: Ring::Mod(p) } => write!(f, "unitriangular:{dim}:{p}"),
            Group::MatMod { dim, p } => write!(f, "matmod:{dim}:{p}"),
            Group::Product(l, r) => write!(f, "({l})*({r})"),
        }
    }
}

/// Heisenberg element with `x = a12`, `y = a23`, `z = a13`.
pub fn heis(x: i64, y: i64, z: i64) -> Elem {
    SmallVec::from_slice(&[x, z, y])
}

/// Inverse of [`heis`]: returns `(x, y, z)`.
pub fn heis_coords(e: &[i64]) -> (i64, i64, i64) {
    (e[0], e[2], e[1])
}

fn cartesian(sizes: &[i64]) -> Vec<Elem> {
    let mut out: Vec<Elem> = vec![SmallVec::new()];
    for &s in sizes {
        let mut next = Vec::with_capacity(out.len() * s as usize);
        for e in &out {
            for v in 0..s {
                let mut e2 = e.clone();
                e2.push(v);
                next.push(e2);
            }
        }
        out = next;
    }
    out
}

fn unitri_mul(a: &[i64], b: &[i64], n: usize, ring: Ring) -> Result<Elem> {
    let mut c: Elem = SmallVec::from_elem(0, a.len());
    for i in 0..n {
        for j in i + 1..n {
            let idx = upper_index(n, i, j);
            match ring {
                Ring::Int => {
                    let mut s = a[idx].checked_add(b[idx]).ok_or(Error::Overflow("unitriangular product"))?;
                    for k in i + 1..j {
                        let t = a[upper_index(n, i, k)]
                            .checked_mul(b[upper_index(n, k, j)])
                            .ok_or(Error::Overflow("unitriangular product"))?;
                        s = s.checked_add(t).ok_or(Error::Overflow("unitriangular product"))?;
                    }
                    c[idx] = s;
                }
                Ring::Mod(p) => {
                    let mut s = a[idx] as i128 + b[idx] as i128;
                    for k in i + 1..j {
                        s += a[upper_index(n, i, k)] as i128 * b[upper_index(n, k, j)] as i128;
                    }
                    c[idx] = modp(s, p);
                }
            }
        }
    }
    Ok(c)
}

fn unitri_inv(a: &[i64], n: usize, ring: Ring) -> Result<Elem> {
    let mut x: Elem = SmallVec::from_elem(0, a.len());
    for i in (0..n).rev() {
        for j in i + 1..n {
            let idx = upper_index(n, i, j);
            match ring {
                Ring::Int => {
                    let mut s = a[idx].checked_neg().ok_or(Error::Overflow("unitriangular inverse"))?;
                    for k in i + 1..j {
                        let t = a[upper_index(n, i, k)]
                            .checked_mul(x[upper_index(n, k, j)])
                            .ok_or(Error::Overflow("unitriangular inverse"))?;
                        s = s.checked_sub(t).ok_or(Error::Overflow("unitriangular inverse"))?;
                    }
                    x[idx] = s;
                }
                Ring::Mod(p) => {
                    let mut s = -(a[idx] as i128);
                    for k in i + 1..j {
                        s -= a[upper_index(n, i, k)] as i128 * x[upper_index(n, k, j)] as i128;
                    }
                    x[idx] = modp(s, p);
                }
            }
        }
    }
    Ok(x)
}

fn matmod_mul(a: &[i64], b: &[i64], n: usize, p: u64) -> Elem {
    let mut c: Elem = SmallVec::from_elem(0, n * n);
    for i in 0..n {
        for j in 0..n {
            let mut s: u64 = 0;
            for k in 0..n {
                s += (a[i * n + k] as u64) * (b[k * n + j] as u64) % p;
            }
            c[i * n + j] = (s % p) as i64;
        }
    }
    c
}

fn inv_mod(a: i64, p: u64) -> i64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, (a as i128).rem_euclid(p as i128));
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    modp(t, p)
}

fn det_mod(a: &[i64], n: usize, p: u64) -> i64 {
    let mut m: Vec<i64> = a.to_vec();
    let mut det: i128 = 1;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| m[r * n + col] != 0) else {
            return 0;
        };
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            det = -det;
        }
        let pv = m[col * n + col];
        det = (det * pv as i128).rem_euclid(p as i128);
        let pinv = inv_mod(pv, p);
        for r in col + 1..n {
            let f = (m[r * n + col] as i128 * pinv as i128).rem_euclid(p as i128);
            for k in col..n {
                m[r * n + k] = modp(m[r * n + k] as i128 - f * m[col * n + k] as i128, p);
            }
        }
    }
    modp(det, p)
}

fn matmod_inv(a: &[i64], n: usize, p: u64) -> Result<Elem> {
    let mut m: Vec<i64> = a.to_vec();
    let mut inv: Vec<i64> = vec![0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1;
    }
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| m[r * n + col] != 0)
            .ok_or_else(|| Error::ContextMismatch("singular matrix".into()))?;
        for k in 0..n {
            m.swap(piv * n + k, col * n + k);
            inv.swap(piv * n + k, col * n + k);
        }
        let pinv = inv_mod(m[col * n + col], p) as i128;
        for k in 0..n {
            m[col * n + k] = modp(m[col * n + k] as i128 * pinv, p);
            inv[col * n + k] = modp(inv[col * n + k] as i128 * pinv, p);
        }
        for r in 0..n {
            if r != col && m[r * n + col] != 0 {
                let f = m[r * n + col] as i128;
                for k in 0..n {
                    m[r * n + k] = modp(m[r * n + k] as i128 - f * m[col * n + k] as i128, p);
                    inv[r * n + k] = modp(inv[r * n + k] as i128 - f * inv[col * n + k] as i128, p);
                }
            }
        }
    }
    Ok(SmallVec::from_vec(inv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_examples() {
        let g = Group::cyclic(20).unwrap();
        assert_eq!(g.mul(&[13], &[9]).unwrap().as_slice(), &[2]);
        assert_eq!(g.inv(&[13]).unwrap().as_slice(), &[7]);
    }

    #[test]
    fn heisenberg_commutator_is_central_unit() {
        let g = Group::heisenberg();
        let u1 = heis(1, 0, 0);
        let u2 = heis(0, 1, 0);
        let c = g.commutator(&u1, &u2).unwrap();
        assert_eq!(heis_coords(&c), (0, 0, 1));
        assert_eq!(heis_coords(&g.inv(&u1).unwrap()), (-1, 0, 0));
    }

    #[test]
    fn matmod_inverse_round_trip() {
        let g = Group::matmod(3, 7).unwrap();
        let a: Elem = SmallVec::from_slice(&[3, 1, 4, 0, 3, 5, 0, 0, 4]);
        let ai = g.inv(&a).unwrap();
        assert!(g.is_identity(&g.mul(&a, &ai).unwrap()));
        assert!(g.is_identity(&g.mul(&ai, &a).unwrap()));
    }

    #[test]
    fn orders() {
        assert_eq!(Group::matmod(2, 3).unwrap().order(), Some(48));
        assert_eq!(Group::unitriangular(3, Ring::Mod(5)).unwrap().order(), Some(125));
        assert!(Group::matmod(3, 8).is_err());
        assert!(Group::unitriangular(5, Ring::Int).is_err());
    }

    #[test]
    fn encoding_preserves_order() {
        let g = Group::lattice(2).unwrap();
        let a: Elem = SmallVec::from_slice(&[-3, 7]);
        let b: Elem = SmallVec::from_slice(&[2, -9]);
        assert!(g.encode(&a) < g.encode(&b));
        assert_eq!(g.decode(&g.encode(&a)).unwrap(), a);
    }
}
