//! Normal cones and second-order subdifferentials of the indicator of
//! `Ω = {z : z_i ≤ 0 (i < s), z_i = 0 (s ≤ i < m)}`.
//!
//! Indices are 0-based: components `0..s` are inequalities, `s..m`
//! equalities.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;

/// Relative activity band: `z_i` counts as zero when `|z_i| ≤ ACTIVITY_TOL (1 + ‖z‖)`.
pub const ACTIVITY_TOL: f64 = 1e-9;
/// A multiplier counts as positive above this threshold.
pub const POSITIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolyhedralSignature {
    s: usize,
    m: usize,
}

impl PolyhedralSignature {
    pub fn new(s: usize, m: usize) -> Result<Self> {
        if s > m {
            return Err(Error::InvalidArgument("signature needs s <= m".to_string()));
        }
        Ok(PolyhedralSignature { s, m })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_inequality(&self, i: usize) -> bool {
        i < self.s
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.m {
            return Err(Error::DimMismatch { expected: self.m, found: v.len() });
        }
        Ok(())
    }
}

/// Position of `(z_i, y_i)` in the graph of the normal-cone mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphCell {
    /// Inequality with `z_i < 0`, `y_i = 0`.
    Inactive,
    /// Inequality with `z_i = 0`, `y_i = 0`.
    ActiveZero,
    /// Inequality with `z_i = 0`, `y_i > 0`.
    ActivePlus,
    /// Equality component.
    Equality,
}

fn band(z: &[f64]) -> f64 {
    ACTIVITY_TOL * (1.0 + linalg::norm(z))
}

/// Membership in `Ω` with the activity band.
pub fn in_omega(sig: &PolyhedralSignature, z: &[f64]) -> Result<bool> {
    sig.check(z)?;
    let tol = band(z);
    Ok(z.iter().enumerate().all(|(i, zi)| if sig.is_inequality(i) { *zi <= tol } else { zi.abs() <= tol }))
}

/// `y ∈ N_Ω(z)` (which is also the limiting and the singular subdifferential
/// of `δ_Ω` at `z`).
pub fn normal_cone_membership(sig: &PolyhedralSignature, z: &[f64], y: &[f64]) -> Result<bool> {
    sig.check(y)?;
    if !in_omega(sig, z)? {
        return Err(Error::NotInOmega);
    }
    let tol = band(z);
    Ok((0..sig.m).all(|i| {
        if !sig.is_inequality(i) {
            true
        } else if z[i].abs() <= tol {
            y[i] >= -POSITIVE_TOL
        } else {
            y[i].abs() <= POSITIVE_TOL
        }
    }))
}

/// Singular subdifferential of `δ_Ω`; it coincides with the normal cone.
pub fn singular_membership(sig: &PolyhedralSignature, z: &[f64], y: &[f64]) -> Result<bool> {
    normal_cone_membership(sig, z, y)
}

/// Cell of every component; `(z, y)` must lie in the normal-cone graph.
pub fn classify(sig: &PolyhedralSignature, z: &[f64], y: &[f64]) -> Result<Vec<GraphCell>> {
    sig.check(z)?;
    sig.check(y)?;
    if !in_omega(sig, z)? || !normal_cone_membership(sig, z, y)? {
        return Err(Error::NotInGraph);
    }
    let tol = band(z);
    Ok((0..sig.m)
        .map(|i| {
            if !sig.is_inequality(i) {
                GraphCell::Equality
            } else if z[i].abs() > tol {
                GraphCell::Inactive
            } else if y[i] > POSITIVE_TOL {
                GraphCell::ActivePlus
            } else {
                GraphCell::ActiveZero
            }
        })
        .collect())
}

/// Componentwise test of `(u_i, −v_i)` against the cell of `(z_i, y_i)`.
pub fn cell_admits(cell: GraphCell, v: f64, u: f64, tol: f64) -> bool {
    match cell {
        // (ℝ₊ × ℝ₋) ∪ (ℝ × {0}) ∪ ({0} × ℝ), inclusive
        GraphCell::ActiveZero => (u >= -tol && v >= -tol) || v.abs() <= tol || u.abs() <= tol,
        GraphCell::ActivePlus | GraphCell::Equality => v.abs() <= tol,
        GraphCell::Inactive => u.abs() <= tol,
    }
}

/// `u ∈ ∂²δ_Ω(z, y)(v)`.
pub fn second_order_membership(sig: &PolyhedralSignature, z: &[f64], y: &[f64], v: &[f64], u: &[f64]) -> Result<bool> {
    sig.check(v)?;
    sig.check(u)?;
    let cells = classify(sig, z, y)?;
    let tol = POSITIVE_TOL;
    Ok(cells.iter().enumerate().all(|(i, c)| cell_admits(*c, v[i], u[i], tol)))
}

/// The NLP form of the second-order condition: `u_i = 0` off `I`,
/// `⟨∇φ_i, w⟩ = 0` on `I₊` and equalities, `⟨∇φ_i, w⟩ ≥ 0` and `u_i ≥ 0` on
/// `I ∖ I₊`. Index sets hold 0-based constraint indices.
///
/// On `I ∖ I₊` this is stricter than [`second_order_membership`], which also
/// admits `u_i = 0` or `⟨∇φ_i, w⟩ = 0` with the other entry of any sign;
/// both agree whenever those entries are nonzero.
pub fn nlp_membership_condition(
    sig: &PolyhedralSignature,
    active: &[usize],
    active_plus: &[usize],
    grads: &[Vec<f64>],
    w: &[f64],
    u: &[f64],
) -> Result<bool> {
    sig.check(u)?;
    if grads.len() != sig.m {
        return Err(Error::DimMismatch { expected: sig.m, found: grads.len() });
    }
    if active.iter().any(|&i| i >= sig.s) || active_plus.iter().any(|i| !active.contains(i)) {
        return Err(Error::InconsistentIndexSets);
    }
    let tol = POSITIVE_TOL;
    for i in 0..sig.m {
        let gw = linalg::dot(&grads[i], w);
        let gw_tol = tol * (1.0 + linalg::norm(&grads[i]) * linalg::norm(w));
        let ok = if !sig.is_inequality(i) || active_plus.contains(&i) {
            gw.abs() <= gw_tol
        } else if active.contains(&i) {
            gw >= -gw_tol && u[i] >= -tol
        } else {
            u[i].abs() <= tol
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sig(s: usize, m: usize) -> PolyhedralSignature {
        PolyhedralSignature::new(s, m).unwrap()
    }

    #[test]
    fn omega_membership() {
        assert!(in_omega(&sig(1, 2), &[-1.0, 0.0]).unwrap());
        assert!(!in_omega(&sig(1, 2), &[0.1, 0.0]).unwrap());
        assert!(in_omega(&sig(1, 2), &[0.0, 1e-12]).unwrap());
        assert!(matches!(in_omega(&sig(1, 2), &[0.0]), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn normal_cone_examples() {
        assert!(normal_cone_membership(&sig(1, 1), &[0.0], &[3.0]).unwrap());
        assert!(!normal_cone_membership(&sig(1, 1), &[-1.0], &[0.1]).unwrap());
        assert!(normal_cone_membership(&sig(0, 1), &[0.0], &[-7.0]).unwrap());
        assert_eq!(normal_cone_membership(&sig(1, 1), &[1.0], &[0.0]).unwrap_err(), Error::NotInOmega);
    }

    #[test]
    fn second_order_examples() {
        let s = sig(1, 1);
        assert!(second_order_membership(&s, &[0.0], &[2.0], &[0.0], &[5.0]).unwrap());
        assert!(!second_order_membership(&s, &[0.0], &[2.0], &[0.1], &[5.0]).unwrap());
        assert!(second_order_membership(&s, &[-1.0], &[0.0], &[-4.0], &[0.0]).unwrap());
        assert!(!second_order_membership(&s, &[-1.0], &[0.0], &[-4.0], &[0.1]).unwrap());
        // (u, -v) = (1, -1) and (-1, -1)
        assert!(second_order_membership(&s, &[0.0], &[0.0], &[1.0], &[1.0]).unwrap());
        assert!(!second_order_membership(&s, &[0.0], &[0.0], &[1.0], &[-1.0]).unwrap());
        assert_eq!(second_order_membership(&s, &[0.0], &[-1.0], &[0.0], &[0.0]).unwrap_err(), Error::NotInGraph);
    }

    #[test]
    fn nlp_condition_examples() {
        let s = sig(2, 2);
        let grads = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        // constraint 1 inactive: u_1 must vanish
        assert!(nlp_membership_condition(&s, &[0], &[0], &grads, &[0.0, 1.0], &[3.0, 0.0]).unwrap());
        assert!(!nlp_membership_condition(&s, &[0], &[0], &grads, &[0.0, 1.0], &[3.0, 0.2]).unwrap());
        // I₊ forces <∇φ, w> = 0
        assert!(!nlp_membership_condition(&s, &[0], &[0], &grads, &[1.0, 1.0], &[0.0, 0.0]).unwrap());
        // I \ I₊ with <∇φ, w> = -0.1 and u = 1
        assert!(!nlp_membership_condition(&s, &[0], &[], &grads, &[-0.1, 0.0], &[1.0, 0.0]).unwrap());
        assert_eq!(
            nlp_membership_condition(&s, &[0], &[1], &grads, &[0.0, 0.0], &[0.0, 0.0]).unwrap_err(),
            Error::InconsistentIndexSets
        );
    }
}
