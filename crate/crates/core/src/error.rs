use core::fmt;

pub type Result<T, E = GraspError> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraspError {
    #[error("{what} = {value} is outside the valid interval [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("target opening {target} mm is not reachable; achievable openings are [{min}, {max}] mm")]
    OpeningUnreachable { target: f64, min: f64, max: f64 },
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: &'static str },
    #[error("form closure is only defined for v-enveloping grasps")]
    ParallelFormClosure,
    #[error("contact set is empty")]
    EmptyContacts,
    #[error("at least two wrench primitives are required, got {0}")]
    TooFewPrimitives(usize),
    #[error("lift grid is empty")]
    EmptyLiftGrid,
    #[error("no non-negative friction coefficient reaches {target} N (frictionless capacity is already {floor} N)")]
    CalibrationUnreachable { target: f64, floor: f64 },
    #[error("no {what} in the search range gives a {target} % reduction")]
    LayoutUnreachable { what: &'static str, target: f64 },
    #[error("plan is infeasible: {0}")]
    Infeasible(Infeasibility),
}

impl GraspError {
    pub(crate) fn invalid(field: &'static str, reason: &'static str) -> Self {
        GraspError::Invalid { field, reason }
    }
}

/// Why a stacked scene admits no selective-release plan.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "constraint", rename_all = "snake_case"))]
pub enum Infeasibility {
    /// The lower object must be narrower than the upper one.
    SizeOrdering {
        top_width: f64,
        bottom_width: f64,
    },
    TopNotHoldable,
    BottomNotHoldable,
    EmptyGraspIntersection,
    EmptyReleaseGap,
    TopReleaseUnreachable,
    /// The synthesized angles did not reproduce the expected stage states.
    SimulationMismatch {
        stage: usize,
    },
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::SizeOrdering {
                top_width,
                bottom_width,
            } => write!(
                f,
                "size ordering violated: bottom object ({bottom_width} mm) must be smaller than top object ({top_width} mm)"
            ),
            Infeasibility::TopNotHoldable => f.write_str("top object has no hold window"),
            Infeasibility::BottomNotHoldable => f.write_str("bottom object has no hold window"),
            Infeasibility::EmptyGraspIntersection => {
                f.write_str("hold windows of top and bottom objects do not intersect")
            }
            Infeasibility::EmptyReleaseGap => f.write_str(
                "no servo angle holds the top object while releasing the bottom object",
            ),
            Infeasibility::TopReleaseUnreachable => {
                f.write_str("no reachable servo angle releases the top object")
            }
            Infeasibility::SimulationMismatch { stage } => {
                write!(f, "stage {stage} does not reproduce the expected hold states")
            }
        }
    }
}
