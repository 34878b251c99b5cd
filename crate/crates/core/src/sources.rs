//! Standard bipartite sources on `A ⊗ R`.

use crate::error::Result;
use crate::space::TensorSpace;
use crate::state::{DensityMatrix, PureState};

/// `½(|00⟩⟨00| + |11⟩⟨11|)`: a uniform classical bit shared with the reference.
pub fn classical_bit_pair() -> DensityMatrix {
    let space = TensorSpace::new([("A", 2), ("R", 2)]).expect("distinct labels");
    DensityMatrix::diagonal(space, &[0.5, 0.0, 0.0, 0.5]).expect("valid distribution")
}

/// Maximally entangled pair of dimension `d`.
pub fn maximally_entangled_pair(d: usize) -> Result<DensityMatrix> {
    Ok(PureState::maximally_entangled("A", "R", d)?.density())
}

pub fn bell_pair() -> DensityMatrix {
    maximally_entangled_pair(2).expect("d = 2 is valid")
}

/// A classical bit next to an ebit, with `A` and `R` each holding one half
/// of both (dimension 4 each).
pub fn bit_and_ebit() -> DensityMatrix {
    let bit = classical_bit_pair().relabel(&["A1", "R1"]).expect("two labels");
    let ebit = bell_pair().relabel(&["A2", "R2"]).expect("two labels");
    bit.tensor(&ebit)
        .and_then(|s| s.merge(&[("A", &["A1", "A2"]), ("R", &["R1", "R2"])]))
        .expect("disjoint labels")
}
