//! Half-integer angular momentum quantum numbers, stored as twice their value.

use std::fmt;

use num::rational::Ratio;

/// A half-integer stored as `2 * value`, so that e.g. `Half(3)` is 3/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Half(pub i32);

impl Half {
    pub fn new_half(twice: i32) -> Self {
        Half(twice)
    }

    /// From an integer quantum number.
    pub fn from_int(n: i32) -> Self {
        Half(2 * n)
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn to_ratio(self) -> Ratio<i64> {
        Ratio::new(i64::from(self.0), 2)
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn abs(self) -> Self {
        Half(self.0.abs())
    }
}

impl std::ops::Neg for Half {
    type Output = Half;
    fn neg(self) -> Half {
        Half(-self.0)
    }
}

impl std::ops::Add for Half {
    type Output = Half;
    fn add(self, rhs: Half) -> Half {
        Half(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Half {
    type Output = Half;
    fn sub(self, rhs: Half) -> Half {
        Half(self.0 - rhs.0)
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_arithmetic() {
        assert_eq!(Half(3).to_string(), "3/2");
        assert_eq!(Half(-5).to_string(), "-5/2");
        assert_eq!(Half::from_int(2).to_string(), "2");
        assert_eq!((Half(3) + Half(-1)).to_f64(), 1.0);
        assert_eq!(Half(5).to_ratio(), Ratio::new(5, 2));
    }
}
