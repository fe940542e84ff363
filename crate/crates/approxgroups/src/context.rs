use crate::error::{Error, Result};
use crate::group::{Elem, Group};
use crate::set::ElementSet;
use std::sync::Arc;

pub const DEFAULT_MAX_SET: usize = 4_000_000;

/// An ambient group, optionally restricted to a symmetric domain.
///
/// In a restricted context the product `a*b` is defined iff `a`, `b` and
/// `ab` all lie in the domain.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub group: Group,
    pub domain: Option<Arc<ElementSet>>,
    pub max_set: usize,
}

impl Ctx {
    pub fn global(group: Group) -> Self {
        Ctx { group, domain: None, max_set: DEFAULT_MAX_SET }
    }

    pub fn restrict(group: Group, domain: ElementSet) -> Result<Self> {
        let id = group.identity();
        if !domain.contains(&id) {
            return Err(Error::MissingIdentity);
        }
        for e in domain.iter() {
            group.validate(e)?;
            if !domain.contains(&group.inv(e)?) {
                return Err(Error::NotSymmetric);
            }
        }
        Ok(Ctx { group, domain: Some(Arc::new(domain)), max_set: DEFAULT_MAX_SET })
    }

    pub fn with_max_set(mut self, max_set: usize) -> Self {
        self.max_set = max_set;
        self
    }

    pub fn is_local(&self) -> bool {
        self.domain.is_some()
    }

    pub fn identity(&self) -> Elem {
        self.group.identity()
    }

    pub fn in_domain(&self, a: &[i64]) -> bool {
        self.domain.as_ref().is_none_or(|d| d.contains(a))
    }

    /// Partial product: `Ok(None)` when undefined in the local domain.
    pub fn try_mul(&self, a: &[i64], b: &[i64]) -> Result<Option<Elem>> {
        if let Some(d) = &self.domain {
            if !d.contains(a) || !d.contains(b) {
                return Ok(None);
            }
            let c = self.group.mul(a, b)?;
            return Ok(d.contains(&c).then_some(c));
        }
        self.group.mul(a, b).map(Some)
    }

    pub fn mul(&self, a: &[i64], b: &[i64]) -> Result<Elem> {
        self.try_mul(a, b)?
            .ok_or_else(|| Error::Undefined(format!("{a:?} * {b:?}")))
    }

    pub fn inv(&self, a: &[i64]) -> Result<Elem> {
        self.group.inv(a)
    }

    pub fn check_size(&self, n: usize, what: &str) -> Result<()> {
        if n > self.max_set {
            return Err(Error::Budget(format!("{what} has {n} elements, limit {}", self.max_set)));
        }
        Ok(())
    }
}
