//! Loop counting and divergence structure for a `φ^l` interaction.
//!
//! For a connected diagram with `p` vertices and `n` external points the
//! propagator count is `r = (n + l·p)/2`, the internal count is
//! `r_I = l·p/2 − n/2`, and the loop count is
//!
//! `L(l, p, n) = p(l−2)/2 − n/2 + 1 = r_I − p + 1`.
//!
//! Each loop contributes one `1/ε` pole under dimensional regularization, so
//! an `L`-loop diagram carries pole slots `1/ε^L … 1/ε` plus a finite slot.
//! The inner coefficients are left as named placeholders here; the `φ⁴` and
//! `φ⁶` pipelines fill them.

use serde::{Deserialize, Serialize};

/// Errors from divergence counting.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CountingError {
    #[error("interaction power must be at least 3, got {0}")]
    InteractionPowerTooSmall(u32),
    #[error("n + l·p = {sum} is odd: every contraction pairs two fields, the correlator vanishes")]
    ParityViolation { sum: u32 },
    #[error("{externals} external points exceed the {fields} internal fields available for contraction")]
    TooManyExternalPoints { externals: u32, fields: u32 },
    #[error("no connected diagram: loop count would be {0}")]
    NegativeLoopCount(i64),
}

/// Shape data of a `φ^l` correlator contribution: interaction power `l`,
/// vertex count `p`, external point count `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramShape {
    pub interaction_power: u32,
    pub vertices: u32,
    pub external_points: u32,
}

impl DiagramShape {
    pub fn new(l: u32, p: u32, n: u32) -> Result<Self, CountingError> {
        if l < 3 {
            return Err(CountingError::InteractionPowerTooSmall(l));
        }
        Ok(DiagramShape {
            interaction_power: l,
            vertices: p,
            external_points: n,
        })
    }

    fn check_parity(&self) -> Result<(), CountingError> {
        let sum = self.external_points + self.interaction_power * self.vertices;
        if sum % 2 != 0 {
            Err(CountingError::ParityViolation { sum })
        } else {
            Ok(())
        }
    }

    /// Total propagator count `r = (n + l·p)/2`.
    pub fn total_propagators(&self) -> Result<u32, CountingError> {
        self.check_parity()?;
        Ok((self.external_points + self.interaction_power * self.vertices) / 2)
    }

    /// Internal propagator count `r_I = l·p/2 − n/2`.
    pub fn internal_propagators(&self) -> Result<u32, CountingError> {
        let r = self.total_propagators()?;
        if r < self.external_points {
            return Err(CountingError::TooManyExternalPoints {
                externals: self.external_points,
                fields: self.interaction_power * self.vertices,
            });
        }
        Ok(r - self.external_points)
    }

    /// Loop count `L = p(l−2)/2 − n/2 + 1`. The free theory (`p = 0`) is
    /// loopless by convention.
    pub fn loop_count(&self) -> Result<u32, CountingError> {
        if self.vertices == 0 {
            return Ok(0);
        }
        self.check_parity()?;
        let l = i64::from(self.interaction_power);
        let p = i64::from(self.vertices);
        let n = i64::from(self.external_points);
        let loops = (p * (l - 2) - n) / 2 + 1;
        if loops < 0 {
            return Err(CountingError::NegativeLoopCount(loops));
        }
        Ok(loops as u32)
    }

    /// The divergence template `Ω = β_L/ε^L + … + β_1/ε + β_0`: one slot per
    /// pole order plus the finite slot, coefficients symbolic.
    pub fn divergence_profile(&self) -> Result<DivergenceProfile, CountingError> {
        let loops = self.loop_count()?;
        let slots = (0..=loops)
            .rev()
            .map(|j| ProfileSlot {
                order: -(j as i32),
                label: format!("beta_{j}"),
            })
            .collect();
        Ok(DivergenceProfile {
            shape: *self,
            loop_count: loops,
            slots,
        })
    }
}

/// One symbolic slot of a divergence template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSlot {
    /// Power of ε (`−j` for the `1/ε^j` pole, 0 for the finite slot).
    pub order: i32,
    /// Placeholder name, `beta_j`.
    pub label: String,
}

/// Pole-slot template for a diagram shape, mirroring the `β_j/ε^j` sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceProfile {
    pub shape: DiagramShape,
    pub loop_count: u32,
    /// Slots ordered from the deepest pole down to the finite part.
    pub slots: Vec<ProfileSlot>,
}

impl DivergenceProfile {
    /// Maximum pole order of the template (equals the loop count).
    pub fn max_pole_order(&self) -> u32 {
        self.loop_count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(l: u32, p: u32, n: u32) -> DiagramShape {
        DiagramShape::new(l, p, n).unwrap()
    }

    #[test]
    fn tadpole_counts() {
        let s = shape(4, 1, 2);
        assert_eq!(s.total_propagators().unwrap(), 3);
        assert_eq!(s.internal_propagators().unwrap(), 1);
        assert_eq!(s.loop_count().unwrap(), 1);
    }

    #[test]
    fn free_propagator_counts() {
        let s = shape(4, 0, 2);
        assert_eq!(s.total_propagators().unwrap(), 1);
        // no vertices: nothing to contract internally
        assert!(matches!(
            s.internal_propagators(),
            Err(CountingError::TooManyExternalPoints { .. })
        ));
        assert_eq!(s.loop_count().unwrap(), 0);
    }

    #[test]
    fn phi6_first_order_counts() {
        let s = shape(6, 1, 2);
        assert_eq!(s.total_propagators().unwrap(), 4);
        assert_eq!(s.internal_propagators().unwrap(), 2);
        assert_eq!(s.loop_count().unwrap(), 2);
    }

    #[test]
    fn phi4_two_point_loops_grow_with_order() {
        for p in 1..=10 {
            assert_eq!(shape(4, p, 2).loop_count().unwrap(), p);
        }
    }

    #[test]
    fn parity_violation_is_rejected() {
        let s = shape(4, 1, 3);
        assert!(matches!(
            s.total_propagators(),
            Err(CountingError::ParityViolation { sum: 7 })
        ));
        assert!(s.loop_count().is_err());
    }

    #[test]
    fn profiles_list_pole_slots_down_to_finite() {
        let p2 = shape(4, 2, 2).divergence_profile().unwrap();
        assert_eq!(p2.max_pole_order(), 2);
        let orders: Vec<i32> = p2.slots.iter().map(|s| s.order).collect();
        assert_eq!(orders, vec![-2, -1, 0]);
        assert_eq!(p2.slots[0].label, "beta_2");

        let p1 = shape(4, 1, 2).divergence_profile().unwrap();
        assert_eq!(
            p1.slots.iter().map(|s| s.order).collect::<Vec<_>>(),
            vec![-1, 0]
        );

        let p6 = shape(6, 1, 2).divergence_profile().unwrap();
        assert_eq!(
            p6.slots.iter().map(|s| s.order).collect::<Vec<_>>(),
            vec![-2, -1, 0]
        );
    }

    #[test]
    fn closed_form_equals_internal_propagator_route() {
        for l in 3..=8u32 {
            for p in 1..=10u32 {
                for n in [2u32, 4, 6] {
                    let s = shape(l, p, n);
                    let Ok(ri) = s.internal_propagators() else {
                        continue;
                    };
                    let via_co1 = i64::from(ri) - i64::from(p) + 1;
                    match s.loop_count() {
                        Ok(loops) => assert_eq!(i64::from(loops), via_co1, "l={l} p={p} n={n}"),
                        Err(CountingError::NegativeLoopCount(v)) => {
                            assert_eq!(v, via_co1, "l={l} p={p} n={n}")
                        }
                        Err(e) => panic!("unexpected error for l={l} p={p} n={n}: {e}"),
                    }
                }
            }
        }
    }

    #[test]
    fn interaction_power_below_cubic_is_rejected() {
        assert!(DiagramShape::new(2, 1, 2).is_err());
    }
}
