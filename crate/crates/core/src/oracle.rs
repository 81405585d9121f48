//! Subgroups of the group given by membership tests.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::boundary::{in_neighborhood_stabilizer, in_stabilizer, EvPeriodicWord};
use crate::error::{Error, Result};
use crate::group::GroupElement;

type Membership = dyn Fn(&GroupElement) -> bool + Send + Sync;

/// A named membership oracle. Cheap to clone.
#[derive(Clone)]
pub struct SubgroupOracle {
    name: String,
    test: Arc<Membership>,
}

impl SubgroupOracle {
    pub fn new<F>(name: impl Into<String>, test: F) -> Self
    where
        F: Fn(&GroupElement) -> bool + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            test: Arc::new(test),
        }
    }

    /// `St(xi)`.
    pub fn stabilizer(xi: &EvPeriodicWord) -> Self {
        let xi = xi.clone();
        Self::new(format!("stab:{xi}"), move |g| in_stabilizer(g, &xi))
    }

    /// `St°(xi)`: elements fixing a neighborhood of `xi` pointwise.
    pub fn neighborhood_stabilizer(xi: &EvPeriodicWord) -> Self {
        let xi = xi.clone();
        Self::new(format!("stab-o:{xi}"), move |g| {
            in_neighborhood_stabilizer(g, &xi)
        })
    }

    pub fn whole_group() -> Self {
        Self::new("whole", |_| true)
    }

    pub fn trivial() -> Self {
        Self::new("trivial", GroupElement::is_trivial)
    }

    /// `g H g^-1`: `x` is a member iff `g^-1 x g` lies in `H`.
    pub fn conjugate(&self, g: &GroupElement) -> Self {
        let inner = self.test.clone();
        let g = g.clone();
        let g_inv = g.inverse();
        Self::new(format!("({g})[{}]", self.name), move |x| {
            inner(&g_inv.mul(x).mul(&g))
        })
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        (self.test)(g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for SubgroupOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubgroupOracle")
            .field("name", &self.name)
            .finish()
    }
}

impl fmt::Display for SubgroupOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Accepts `stab:<word>`, `stab-o:<word>`, `whole` and `trivial`.
impl FromStr for SubgroupOracle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(w) = s.strip_prefix("stab-o:") {
            return Ok(Self::neighborhood_stabilizer(&w.parse()?));
        }
        if let Some(w) = s.strip_prefix("stab:") {
            return Ok(Self::stabilizer(&w.parse()?));
        }
        match s {
            "whole" => Ok(Self::whole_group()),
            "trivial" => Ok(Self::trivial()),
            _ => Err(Error::Parse(format!(
                "unknown subgroup {s:?}; expected stab:<word>, stab-o:<word>, whole or trivial"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GroupElement {
        s.parse().unwrap()
    }

    #[test]
    fn named_oracles() {
        let xi0 = EvPeriodicWord::ones();
        let st = SubgroupOracle::stabilizer(&xi0);
        let st_o = SubgroupOracle::neighborhood_stabilizer(&xi0);
        assert!(st.contains(&g("b")) && !st_o.contains(&g("b")));
        assert!(!st.contains(&g("a")));
        assert!(SubgroupOracle::whole_group().contains(&g("abc")));
        assert!(SubgroupOracle::trivial().contains(&g("bcd")));
        assert!(!SubgroupOracle::trivial().contains(&g("ab")));
    }

    #[test]
    fn parse_names() {
        let o: SubgroupOracle = "stab:(1)^w".parse().unwrap();
        assert_eq!(o.name(), "stab:(1)^w");
        assert!("stab-o:0(1)^w".parse::<SubgroupOracle>().is_ok());
        assert!("normal".parse::<SubgroupOracle>().is_err());
    }

    #[test]
    fn conjugate_of_stabilizer_is_stabilizer_of_image() {
        let xi: EvPeriodicWord = "0(1)^w".parse().unwrap();
        let h = g("ab");
        let moved = crate::boundary::act_beta(&h, &xi);
        let conj = SubgroupOracle::stabilizer(&xi).conjugate(&h);
        let direct = SubgroupOracle::stabilizer(&moved);
        for x in crate::group::reduced_words(5) {
            assert_eq!(conj.contains(&x), direct.contains(&x), "{x}");
        }
    }
}
