use thiserror::Error;

use crate::lattice::VariableSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("correlation submatrix on {subset} is not positive definite")]
    NotPositiveDefinite { subset: VariableSet },

    #[error("sets {0} and {1} must be disjoint")]
    OverlappingSets(VariableSet, VariableSet),

    #[error("no stored value for subset {subset}")]
    MissingSubset { subset: VariableSet },

    #[error("universe of {size} variables exceeds the enumeration limit of {limit}")]
    UniverseTooLarge { size: usize, limit: usize },

    #[error("variable {index} is outside the oracle's {dim} variables")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("triple {0} is not a synergy")]
    NotASynergy(VariableSet),

    #[error("alpha = {0} lies outside (0, 1/4)")]
    AlphaOutOfRange(f64),

    #[error("directed graph contains a cycle through node {0}")]
    CyclicGraph(usize),

    #[error("{separator} does not separate {a} from {b} in the graph")]
    NotSeparated {
        a: VariableSet,
        b: VariableSet,
        separator: VariableSet,
    },

    #[error("column {0} is constant")]
    DegenerateColumn(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Numeric failures (as opposed to malformed input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. } | Error::NotASynergy(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
