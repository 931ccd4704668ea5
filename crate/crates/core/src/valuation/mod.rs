//! Strictly monotone valuation functions on bounded integer domains.
//!
//! A [`ValuationFn`] is either an arithmetic expression in `z` or an
//! explicit table. Every function is evaluated once over its whole domain
//! at construction time; that scan both validates strict monotonicity and
//! fills a lookup table, so [`ValuationFn::eval`] is a bounds check and an
//! index.
//!
//! Worker valuations are increasing in salary. Firm valuations are entered
//! as functions of the salary they pay and are therefore decreasing.

mod expr;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use expr::{Expr, SyntaxError};

/// Largest number of integer points a single domain may span.
pub const MAX_DOMAIN_POINTS: i64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Increasing => f.write_str("increasing"),
            Direction::Decreasing => f.write_str("decreasing"),
        }
    }
}

/// Closed integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Domain {
    pub lo: i64,
    pub hi: i64,
}

impl Domain {
    pub fn new(lo: i64, hi: i64) -> Self {
        Domain { lo, hi }
    }

    pub fn contains(&self, z: i64) -> bool {
        self.lo <= z && z <= self.hi
    }

    pub fn len(&self) -> i64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValuationError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("empty domain {0}")]
    EmptyDomain(Domain),
    #[error("domain {domain} spans more than {max} points", max = MAX_DOMAIN_POINTS)]
    DomainTooLarge { domain: Domain },
    #[error("not strictly {direction} at z = {z}: f({z}) = {at}, f({next}) = {after}", next = z + 1)]
    NotMonotone {
        direction: Direction,
        z: i64,
        at: f64,
        after: f64,
    },
    #[error("value at z = {z} is not finite ({value})")]
    NonFinite { z: i64, value: f64 },
    #[error("table has no entry for z = {z}")]
    MissingTableEntry { z: i64 },
    #[error("table entry z = {z} lies outside domain {domain}")]
    ExtraTableEntry { z: i64, domain: Domain },
    #[error("z = {z} is outside domain {domain}")]
    OutOfDomain { z: i64, domain: Domain },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Expr(Expr),
    Table(BTreeMap<i64, f64>),
}

/// A strictly monotone map from the integers of a bounded domain to reals.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationFn {
    body: Body,
    domain: Domain,
    direction: Direction,
    values: Vec<f64>,
}

impl ValuationFn {
    pub fn parse(text: &str, domain: Domain, direction: Direction) -> Result<Self, ValuationError> {
        let expr = Expr::parse(text)?;
        Self::from_expr(expr, domain, direction)
    }

    pub fn from_expr(expr: Expr, domain: Domain, direction: Direction) -> Result<Self, ValuationError> {
        check_domain(domain)?;
        let values = (domain.lo..=domain.hi).map(|z| expr.eval(z as f64)).collect();
        Self::build(Body::Expr(expr), domain, direction, values)
    }

    pub fn from_table(table: BTreeMap<i64, f64>, domain: Domain, direction: Direction) -> Result<Self, ValuationError> {
        check_domain(domain)?;
        if let Some((&z, _)) = table.iter().find(|(z, _)| !domain.contains(**z)) {
            return Err(ValuationError::ExtraTableEntry { z, domain });
        }
        let values = (domain.lo..=domain.hi)
            .map(|z| table.get(&z).copied().ok_or(ValuationError::MissingTableEntry { z }))
            .collect::<Result<Vec<_>, _>>()?;
        Self::build(Body::Table(table), domain, direction, values)
    }

    fn build(body: Body, domain: Domain, direction: Direction, values: Vec<f64>) -> Result<Self, ValuationError> {
        // -0.0 becomes 0.0
        let values: Vec<f64> = values.into_iter().map(|v| v + 0.0).collect();
        for (k, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(ValuationError::NonFinite {
                    z: domain.lo + k as i64,
                    value,
                });
            }
        }
        for (k, w) in values.windows(2).enumerate() {
            let ok = match direction {
                Direction::Increasing => w[1] > w[0],
                Direction::Decreasing => w[1] < w[0],
            };
            if !ok {
                return Err(ValuationError::NotMonotone {
                    direction,
                    z: domain.lo + k as i64,
                    at: w[0],
                    after: w[1],
                });
            }
        }
        Ok(ValuationFn {
            body,
            domain,
            direction,
            values,
        })
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn eval(&self, z: i64) -> Result<f64, ValuationError> {
        if self.domain.contains(z) {
            Ok(self.values[(z - self.domain.lo) as usize])
        } else {
            Err(ValuationError::OutOfDomain { z, domain: self.domain })
        }
    }

    /// Evaluation for callers that have already established `z` is in the
    /// domain. Panics otherwise.
    pub fn at(&self, z: i64) -> f64 {
        assert!(
            self.domain.contains(z),
            "z = {z} outside valuation domain {}",
            self.domain
        );
        self.values[(z - self.domain.lo) as usize]
    }

    /// Smallest `z` with `f(z) >= target` for an increasing function.
    pub fn least_arg_reaching(&self, target: f64) -> Option<i64> {
        debug_assert_eq!(self.direction, Direction::Increasing);
        // values ascending: first index with value >= target
        let k = self.values.partition_point(|&v| v < target);
        (k < self.values.len()).then(|| self.domain.lo + k as i64)
    }

    /// Largest `z` with `g(z) >= target` for a decreasing function.
    pub fn greatest_arg_reaching(&self, target: f64) -> Option<i64> {
        debug_assert_eq!(self.direction, Direction::Decreasing);
        // values descending: count of leading entries with value >= target
        let k = self.values.partition_point(|&v| v >= target);
        (k > 0).then(|| self.domain.lo + k as i64 - 1)
    }

    /// Smallest `z` with `f(z) > target` for an increasing function.
    pub fn least_arg_exceeding(&self, target: f64) -> Option<i64> {
        debug_assert_eq!(self.direction, Direction::Increasing);
        let k = self.values.partition_point(|&v| v <= target);
        (k < self.values.len()).then(|| self.domain.lo + k as i64)
    }

    /// Largest `z` with `g(z) > target` for a decreasing function.
    pub fn greatest_arg_exceeding(&self, target: f64) -> Option<i64> {
        debug_assert_eq!(self.direction, Direction::Decreasing);
        let k = self.values.partition_point(|&v| v > target);
        (k > 0).then(|| self.domain.lo + k as i64 - 1)
    }
}

impl fmt::Display for ValuationFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            Body::Expr(e) => write!(f, "{e}"),
            Body::Table(t) => {
                f.write_str("{")?;
                for (k, (z, v)) in t.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{z}: {v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

fn check_domain(domain: Domain) -> Result<(), ValuationError> {
    if domain.is_empty() {
        return Err(ValuationError::EmptyDomain(domain));
    }
    if domain.hi.checked_sub(domain.lo).is_none_or(|d| d >= MAX_DOMAIN_POINTS) {
        return Err(ValuationError::DomainTooLarge { domain });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inc(text: &str, lo: i64, hi: i64) -> ValuationFn {
        ValuationFn::parse(text, Domain::new(lo, hi), Direction::Increasing).unwrap()
    }

    fn dec(text: &str, lo: i64, hi: i64) -> ValuationFn {
        ValuationFn::parse(text, Domain::new(lo, hi), Direction::Decreasing).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(inc("2*z + 3", 0, 5).eval(1).unwrap(), 5.0);
        assert_eq!(inc("z^3 - 4", 0, 4).eval(2).unwrap(), 4.0);
        let err = ValuationFn::parse("1 - z", Domain::new(0, 5), Direction::Increasing).unwrap_err();
        assert!(matches!(err, ValuationError::NotMonotone { z: 0, .. }), "{err}");
    }

    #[test]
    fn non_strict_is_rejected() {
        let err = ValuationFn::parse("(z - 2)^2", Domain::new(0, 4), Direction::Increasing).unwrap_err();
        assert!(matches!(err, ValuationError::NotMonotone { z: 0, .. }));
        let err = ValuationFn::parse("3", Domain::new(0, 1), Direction::Decreasing).unwrap_err();
        assert!(matches!(err, ValuationError::NotMonotone { z: 0, .. }));
        // one point is trivially monotone
        assert!(ValuationFn::parse("3", Domain::new(7, 7), Direction::Decreasing).is_ok());
    }

    #[test]
    fn non_finite_values() {
        let err = ValuationFn::parse("z^400 * 10^400", Domain::new(1, 2), Direction::Increasing).unwrap_err();
        assert!(matches!(err, ValuationError::NonFinite { z: 1, .. }), "{err}");
    }

    #[test]
    fn eval_examples() {
        assert_eq!(dec("3 - z", 0, 3).eval(3).unwrap(), 0.0);
        let table = BTreeMap::from([(0, -2.0), (1, 0.0), (2, 3.0)]);
        let f = ValuationFn::from_table(table, Domain::new(0, 2), Direction::Increasing).unwrap();
        assert_eq!(f.eval(1).unwrap(), 0.0);
        let err = inc("2*z + 3", 0, 5).eval(-1).unwrap_err();
        assert!(matches!(err, ValuationError::OutOfDomain { z: -1, .. }));
    }

    #[test]
    fn table_coverage() {
        let d = Domain::new(0, 2);
        let err = ValuationFn::from_table(BTreeMap::from([(0, 1.0), (2, 3.0)]), d, Direction::Increasing).unwrap_err();
        assert_eq!(err, ValuationError::MissingTableEntry { z: 1 });
        let err = ValuationFn::from_table(
            BTreeMap::from([(0, 1.0), (1, 2.0), (2, 3.0), (3, 4.0)]),
            d,
            Direction::Increasing,
        )
        .unwrap_err();
        assert!(matches!(err, ValuationError::ExtraTableEntry { z: 3, .. }));
    }

    #[test]
    fn domain_checks() {
        assert!(matches!(
            ValuationFn::parse("z", Domain::new(3, 2), Direction::Increasing),
            Err(ValuationError::EmptyDomain(_))
        ));
        assert!(matches!(
            ValuationFn::parse("z", Domain::new(0, MAX_DOMAIN_POINTS), Direction::Increasing),
            Err(ValuationError::DomainTooLarge { .. })
        ));
    }

    #[test]
    fn least_arg_examples() {
        assert_eq!(inc("z", 0, 5).least_arg_reaching(3.0), Some(3));
        assert_eq!(inc("z^2", 0, 5).least_arg_reaching(10.0), Some(4));
        assert_eq!(inc("z", 0, 5).least_arg_reaching(9.0), None);
        assert_eq!(inc("z", 0, 5).least_arg_reaching(-100.0), Some(0));
    }

    #[test]
    fn greatest_arg_examples() {
        assert_eq!(dec("4 - z", 0, 5).greatest_arg_reaching(0.0), Some(4));
        assert_eq!(dec("10 - z", 0, 5).greatest_arg_reaching(0.0), Some(5));
        assert_eq!(dec("-1 - z", 0, 5).greatest_arg_reaching(0.0), None);
    }

    /// Random strictly increasing table on a random small domain.
    fn arb_increasing() -> impl Strategy<Value = ValuationFn> {
        (-20i64..20, prop::collection::vec(1u8..6, 0..15), -30i32..30).prop_map(|(lo, steps, start)| {
            let mut v = start as f64;
            let mut table = BTreeMap::from([(lo, v)]);
            for (k, s) in steps.iter().enumerate() {
                v += *s as f64 * 0.5;
                table.insert(lo + k as i64 + 1, v);
            }
            let hi = lo + steps.len() as i64;
            ValuationFn::from_table(table, Domain::new(lo, hi), Direction::Increasing).unwrap()
        })
    }

    proptest! {
        #[test]
        fn increasing_is_strict_everywhere(f in arb_increasing()) {
            let d = f.domain();
            for a in d.lo..=d.hi {
                for b in a + 1..=d.hi {
                    prop_assert!(f.at(a) < f.at(b));
                }
            }
        }

        #[test]
        fn least_arg_matches_scan(f in arb_increasing(), target in -40.0f64..40.0) {
            let d = f.domain();
            let scan = (d.lo..=d.hi).find(|&z| f.at(z) >= target);
            prop_assert_eq!(f.least_arg_reaching(target), scan);
            // hitting values exactly
            for z in d.lo..=d.hi {
                prop_assert_eq!(f.least_arg_reaching(f.at(z)), Some(z));
            }
        }

        #[test]
        fn greatest_arg_matches_scan(f in arb_increasing(), target in -40.0f64..40.0) {
            // mirror into a decreasing table g(z) = -f(z)
            let d = f.domain();
            let table: BTreeMap<i64, f64> = (d.lo..=d.hi).map(|z| (z, -f.at(z))).collect();
            let g = ValuationFn::from_table(table, d, Direction::Decreasing).unwrap();
            let scan = (d.lo..=d.hi).rev().find(|&z| g.at(z) >= target);
            prop_assert_eq!(g.greatest_arg_reaching(target), scan);
            for z in d.lo..=d.hi {
                prop_assert_eq!(g.greatest_arg_reaching(g.at(z)), Some(z));
            }
        }

        #[test]
        fn print_parse_roundtrip(a in -9i32..9, b in 1i32..9, c in 0u32..4, lo in -6i64..0) {
            let text = format!("{a} + {b}*(z - {lo})^{c} * 0.5 + {b}*z", );
            let d = Domain::new(lo, lo + 6);
            let f = ValuationFn::parse(&text, d, Direction::Increasing).unwrap();
            let g = ValuationFn::parse(&f.to_string(), d, Direction::Increasing).unwrap();
            for z in d.lo..=d.hi {
                prop_assert_eq!(f.at(z), g.at(z));
            }
        }
    }
}
