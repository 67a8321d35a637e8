use std::fmt;

use crate::error::{check_dim, Error, Result};

/// An action is the incidence vector of a subset of the `d` loss components.
///
/// The derived `Ord` compares bit vectors lexicographically from component 0,
/// with `false < true`; every tie between equal-cost actions in this crate is
/// broken toward the lexicographically smallest incidence vector under this
/// order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    bits: Vec<bool>,
}

impl Action {
    pub fn new(bits: Vec<bool>) -> Self {
        Action { bits }
    }

    /// Builds the action with the given support over `d` components.
    ///
    /// Indices may be unsorted; duplicates are idempotent. Errors if an index
    /// is out of range.
    pub fn from_support(d: usize, support: &[usize]) -> Result<Self> {
        let mut bits = vec![false; d];
        for &i in support {
            if i >= d {
                return Err(Error::InvalidParameter(format!(
                    "support index {i} out of range for dimension {d}"
                )));
            }
            bits[i] = true;
        }
        Ok(Action { bits })
    }

    pub fn dim(&self) -> usize {
        self.bits.len()
    }

    /// Number of components played (the action's weight).
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Indices of the played components, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    /// Inner product with a cost vector, accumulated in ascending component
    /// order. All code in this crate evaluates action values through this
    /// method so that exact float comparisons between equal-cost actions are
    /// meaningful.
    pub fn dot(&self, costs: &[f64]) -> Result<f64> {
        check_dim(costs, self.bits.len())?;
        Ok(self
            .support()
            .fold(0.0, |acc, i| acc + costs[i]))
    }

    /// Renders the action as a bit string, e.g. `0110`.
    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    /// Parses a bit string produced by [`Action::to_bit_string`].
    pub fn from_bit_string(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "invalid character {other:?} in action bit string"
                    )))
                }
            }
        }
        Ok(Action { bits })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_round_trip() {
        let a = Action::from_support(5, &[3, 1]).unwrap();
        assert_eq!(a.to_bit_string(), "01010");
        assert_eq!(a.weight(), 2);
        assert_eq!(a.support().collect::<Vec<_>>(), vec![1, 3]);
        let b = Action::from_bit_string("01010").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn out_of_range_support_rejected() {
        assert!(Action::from_support(3, &[3]).is_err());
    }

    #[test]
    fn dot_is_ascending_index_sum() {
        let a = Action::from_support(4, &[0, 2]).unwrap();
        assert_eq!(a.dot(&[0.5, 9.0, 0.25, 9.0]).unwrap(), 0.5 + 0.25);
        assert!(a.dot(&[1.0]).is_err());
    }

    #[test]
    fn lexicographic_order_prefers_earlier_zero() {
        // 011 < 101 < 110: smaller bit vectors sort first.
        let a = Action::from_bit_string("011").unwrap();
        let b = Action::from_bit_string("101").unwrap();
        let c = Action::from_bit_string("110").unwrap();
        assert!(a < b && b < c);
        // For single arms this means the larger index wins a tie.
        let e1 = Action::from_support(3, &[1]).unwrap();
        let e2 = Action::from_support(3, &[2]).unwrap();
        assert!(e2 < e1);
    }
}
