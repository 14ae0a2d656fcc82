//! Moment multi-indices, numeric state snapshots and the uncertainty predicate.
//!
//! A moment `G^{a_1,b_1,...,a_k,b_k}` is stored as the flat index vector
//! `[a_1, b_1, ..., a_k, b_k]`. Orders 0 and 1 are the constants 1 and 0 and
//! never appear as stored state.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MomentIndex(Vec<u32>);

impl MomentIndex {
    /// Builds an index from the flat `[a_1, b_1, ..., a_k, b_k]` layout.
    ///
    /// Panics if the slice is empty or has odd length.
    pub fn new(flat: &[u32]) -> Self {
        assert!(
            !flat.is_empty() && flat.len() % 2 == 0,
            "moment index needs one (a, b) pair per degree of freedom"
        );
        MomentIndex(flat.to_vec())
    }

    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        assert!(!pairs.is_empty());
        MomentIndex(pairs.iter().flat_map(|&(a, b)| [a, b]).collect())
    }

    /// The unit moment `G^{0,...,0}` over `dofs` pairs.
    pub fn zero(dofs: usize) -> Self {
        MomentIndex(vec![0; 2 * dofs])
    }

    pub fn dofs(&self) -> usize {
        self.0.len() / 2
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn a(&self, dof: usize) -> u32 {
        self.0[2 * dof]
    }

    pub fn b(&self, dof: usize) -> u32 {
        self.0[2 * dof + 1]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn pair(&self, dof: usize) -> (u32, u32) {
        (self.a(dof), self.b(dof))
    }

    /// Copy with the exponent at flat `slot` lowered by one; `None` if it is zero.
    pub fn lowered(&self, slot: usize) -> Option<MomentIndex> {
        let mut v = self.0.clone();
        if v[slot] == 0 {
            return None;
        }
        v[slot] -= 1;
        Some(MomentIndex(v))
    }

    /// Name used for CSV columns and equation files, e.g. `G_2_0_0_1`.
    pub fn column_name(&self) -> String {
        let mut s = String::from("G");
        for x in &self.0 {
            s.push('_');
            s.push_str(&x.to_string());
        }
        s
    }

    pub fn parse_column_name(name: &str) -> Option<MomentIndex> {
        let rest = name.strip_prefix("G_")?;
        let flat: Option<Vec<u32>> = rest.split('_').map(|p| p.parse().ok()).collect();
        let flat = flat?;
        if flat.is_empty() || flat.len() % 2 != 0 {
            return None;
        }
        Some(MomentIndex(flat))
    }

    /// True when every exponent outside the given dof is zero.
    pub fn only_in_dof(&self, dof: usize) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(slot, &x)| slot / 2 == dof || x == 0)
    }
}

/// Graded ordering: by total order, then lexicographically descending on
/// `(a_1, b_1, ...)`, so `G^{2,0}` precedes `G^{1,1}` precedes `G^{0,2}`.
impl Ord for MomentIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.order().cmp(&other.order()))
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MomentIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MomentIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for MomentIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// All moment indices over `dofs` canonical pairs with `2 <= order <= max_order`,
/// in the canonical graded order.
pub fn enumerate_moments(dofs: usize, max_order: u32) -> Result<Vec<MomentIndex>> {
    if dofs == 0 {
        return Err(Error::InvalidDofCount(dofs));
    }
    if max_order < 2 {
        return Err(Error::InvalidTruncation(max_order));
    }
    let slots = 2 * dofs;
    let mut out = Vec::new();
    for order in 2..=max_order {
        let mut current = vec![0u32; slots];
        compositions(order, 0, &mut current, &mut out);
    }
    Ok(out)
}

// Emits compositions of `remaining` over the slots from `slot` on, largest
// leading exponent first, which is exactly the descending-lex order.
fn compositions(remaining: u32, slot: usize, current: &mut Vec<u32>, out: &mut Vec<MomentIndex>) {
    if slot + 1 == current.len() {
        current[slot] = remaining;
        out.push(MomentIndex(current.clone()));
        current[slot] = 0;
        return;
    }
    for x in (0..=remaining).rev() {
        current[slot] = x;
        compositions(remaining - x, slot + 1, current, out);
    }
    current[slot] = 0;
}

/// Numeric snapshot: time, classical expectation values `(q_1, p_1, ..., q_k, p_k)`,
/// and tracked moments up to the truncation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub t: f64,
    pub classical: Vec<f64>,
    pub moments: BTreeMap<MomentIndex, f64>,
    pub order: u32,
}

impl SystemState {
    pub fn new(t: f64, classical: Vec<f64>, order: u32) -> Self {
        SystemState {
            t,
            classical,
            moments: BTreeMap::new(),
            order,
        }
    }

    /// State with every moment up to `order` present and set to zero.
    pub fn with_zero_moments(t: f64, classical: Vec<f64>, order: u32) -> Result<Self> {
        let dofs = classical.len() / 2;
        let moments = enumerate_moments(dofs, order)?
            .into_iter()
            .map(|m| (m, 0.0))
            .collect();
        Ok(SystemState {
            t,
            classical,
            moments,
            order,
        })
    }

    pub fn dofs(&self) -> usize {
        self.classical.len() / 2
    }

    pub fn set(&mut self, index: MomentIndex, value: f64) {
        self.moments.insert(index, value);
    }

    /// Value of a moment. Orders 0 and 1 are the constants 1 and 0, orders
    /// above the truncation are zero, and a missing in-range moment is an error.
    pub fn moment(&self, index: &MomentIndex) -> Result<f64> {
        match index.order() {
            0 => Ok(1.0),
            1 => Ok(0.0),
            o if o > self.order => Ok(0.0),
            _ => self
                .moments
                .get(index)
                .copied()
                .ok_or_else(|| Error::IncompleteState(format!("missing moment {index}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyCheck {
    pub satisfied: bool,
    /// `G^{2,0} G^{0,2} - (G^{1,1})^2 - hbar^2 / 4` for the pair.
    pub margin: f64,
}

/// Checks `G^{2,0} G^{0,2} - (G^{1,1})^2 >= hbar^2 / 4` for one canonical pair.
pub fn uncertainty_ok(state: &SystemState, dof: usize, hbar: f64) -> Result<UncertaintyCheck> {
    let dofs = state.dofs();
    if dof >= dofs {
        return Err(Error::IncompleteState(format!(
            "state has {dofs} canonical pairs, asked for pair {dof}"
        )));
    }
    let get = |a: u32, b: u32| -> Result<f64> {
        let mut flat = vec![0u32; 2 * dofs];
        flat[2 * dof] = a;
        flat[2 * dof + 1] = b;
        let idx = MomentIndex(flat);
        state
            .moments
            .get(&idx)
            .copied()
            .ok_or_else(|| Error::IncompleteState(format!("missing moment {idx}")))
    };
    let xx = get(2, 0)?;
    let pp = get(0, 2)?;
    let xp = get(1, 1)?;
    let margin = xx * pp - xp * xp - hbar * hbar / 4.0;
    Ok(UncertaintyCheck {
        satisfied: margin >= 0.0,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_state(xx: f64, pp: f64, xp: f64) -> SystemState {
        let mut s = SystemState::new(0.0, vec![0.0, 0.0], 2);
        s.set(MomentIndex::new(&[2, 0]), xx);
        s.set(MomentIndex::new(&[0, 2]), pp);
        s.set(MomentIndex::new(&[1, 1]), xp);
        s
    }

    #[test]
    fn one_dof_second_order() {
        let m = enumerate_moments(1, 2).unwrap();
        assert_eq!(
            m,
            vec![
                MomentIndex::new(&[2, 0]),
                MomentIndex::new(&[1, 1]),
                MomentIndex::new(&[0, 2])
            ]
        );
    }

    #[test]
    fn two_dof_counts() {
        assert_eq!(enumerate_moments(2, 2).unwrap().len(), 10);
        assert_eq!(enumerate_moments(2, 3).unwrap().len(), 30);
        assert_eq!(enumerate_moments(2, 4).unwrap().len(), 65);
    }

    #[test]
    fn rejects_low_truncation() {
        assert_eq!(enumerate_moments(2, 1), Err(Error::InvalidTruncation(1)));
        assert_eq!(enumerate_moments(0, 2), Err(Error::InvalidDofCount(0)));
    }

    #[test]
    fn enumeration_is_sorted_and_unique() {
        let m = enumerate_moments(2, 4).unwrap();
        assert!(m.windows(2).all(|w| w[0] < w[1]));
        assert!(m.iter().all(|g| (2..=4).contains(&g.order())));
    }

    #[test]
    fn saturated_pair_has_zero_margin() {
        let sigma = 0.5;
        let hbar = 1.0;
        let check = uncertainty_ok(&pair_state(sigma, hbar * hbar / (4.0 * sigma), 0.0), 0, hbar).unwrap();
        assert!(check.satisfied);
        assert_eq!(check.margin, 0.0);
    }

    #[test]
    fn small_dispersions_margin() {
        let check = uncertainty_ok(&pair_state(0.01, 0.01, 0.0), 0, 0.01).unwrap();
        assert!(check.satisfied);
        assert!((check.margin - 7.5e-5).abs() < 1e-18);
    }

    #[test]
    fn larger_hbar_violates_small_dispersions() {
        let check = uncertainty_ok(&pair_state(0.01, 0.01, 0.0), 0, 0.1).unwrap();
        assert!(!check.satisfied);
        assert!((check.margin + 0.0024).abs() < 1e-15);
    }

    #[test]
    fn classical_point_violates() {
        let check = uncertainty_ok(&pair_state(0.0, 0.0, 0.0), 0, 1.0).unwrap();
        assert!(!check.satisfied);
        assert_eq!(check.margin, -0.25);
    }

    #[test]
    fn missing_moment_is_incomplete() {
        let mut s = SystemState::new(0.0, vec![0.0, 0.0], 2);
        s.set(MomentIndex::new(&[2, 0]), 1.0);
        assert!(matches!(
            uncertainty_ok(&s, 0, 1.0),
            Err(Error::IncompleteState(_))
        ));
    }

    #[test]
    fn constant_low_orders() {
        let s = SystemState::new(0.0, vec![0.0, 0.0], 2);
        assert_eq!(s.moment(&MomentIndex::new(&[0, 0])).unwrap(), 1.0);
        assert_eq!(s.moment(&MomentIndex::new(&[1, 0])).unwrap(), 0.0);
        assert_eq!(s.moment(&MomentIndex::new(&[3, 0])).unwrap(), 0.0);
        assert!(s.moment(&MomentIndex::new(&[2, 0])).is_err());
    }

    #[test]
    fn column_names_round_trip() {
        for m in enumerate_moments(2, 3).unwrap() {
            assert_eq!(MomentIndex::parse_column_name(&m.column_name()), Some(m));
        }
    }
}
