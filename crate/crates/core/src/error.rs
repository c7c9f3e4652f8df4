use core::fmt;

/// Errors shared across the crate. Variants mirror the failure modes of the
/// individual modules; the CLI maps them onto exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    // lattice
    NotSymmetric,
    NotEven,
    Singular,
    IndefiniteWithoutMajorant,
    BoundTooLarge { estimated: u64, cap: u64 },
    NotNegativeDefinite,
    WrongDimension { expected: usize, got: usize },
    Overflow,

    // weilrep
    NotUnimodular,
    DimensionMismatch { expected: usize, got: usize },
    WeightParityMismatch,
    EvaluationFailure,

    // maass
    NonPositiveArgument,
    NonPositiveX,
    BadParameter,
    ConvergenceFailure,
    UnboundedPrincipalPart,
    RepMismatch,
    DependentBasis,

    // series
    MissingMajorant,
    CutoffInsufficient,
    NotDefinite,
    NotIsotropic,
    NotPrimitive,
    NonNegativeWeight,
    BadIndex,
    OutsideConvergence,

    // reglift
    WeightMismatch,
    UndeclaredTail { residual: f64 },
    QuadratureFailure,
    OnSingularLocus,
    UnsupportedProfile,

    // lsharp
    StencilFailure,
    BadWeight,
    MissingConstantProfile,
    MissingBasisData,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotSymmetric => write!(f, "gram matrix is not symmetric"),
            Error::NotEven => write!(f, "gram matrix has an odd diagonal entry"),
            Error::Singular => write!(f, "gram matrix is singular"),
            Error::IndefiniteWithoutMajorant => {
                write!(f, "indefinite lattice requires a majorant point")
            }
            Error::BoundTooLarge { estimated, cap } => write!(
                f,
                "enumeration estimate {estimated} exceeds cap {cap}; lower the precision target"
            ),
            Error::NotNegativeDefinite => {
                write!(f, "basis does not span a negative-definite subspace")
            }
            Error::WrongDimension { expected, got } => {
                write!(f, "expected dimension {expected}, got {got}")
            }
            Error::Overflow => write!(f, "integer overflow in exact arithmetic"),
            Error::NotUnimodular => write!(f, "matrix determinant is not 1"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "vector dimension {got} does not match representation {expected}")
            }
            Error::WeightParityMismatch => {
                write!(f, "2k incompatible with signature mod 2: Z^2 acts by -1")
            }
            Error::EvaluationFailure => write!(f, "function handle evaluation failed"),
            Error::NonPositiveArgument => write!(f, "argument must be positive"),
            Error::NonPositiveX => write!(f, "x must be positive"),
            Error::BadParameter => write!(f, "parameter outside supported range"),
            Error::ConvergenceFailure => write!(f, "series or continued fraction did not converge"),
            Error::UnboundedPrincipalPart => {
                write!(f, "infinitely many negative-index constant terms")
            }
            Error::RepMismatch => write!(f, "weight or representation mismatch in pairing"),
            Error::DependentBasis => write!(f, "supplied basis functionals are dependent"),
            Error::MissingMajorant => write!(f, "series on indefinite lattice needs a majorant"),
            Error::CutoffInsufficient => write!(f, "cutoff too small for requested accuracy"),
            Error::NotDefinite => write!(f, "lattice is not positive definite"),
            Error::NotIsotropic => write!(f, "vector is not isotropic"),
            Error::NotPrimitive => write!(f, "vector is not primitive"),
            Error::NonNegativeWeight => write!(f, "series only converges for negative weight"),
            Error::BadIndex => write!(f, "index m outside supported range"),
            Error::OutsideConvergence => write!(f, "Re(s) <= 1: outside direct convergence"),
            Error::WeightMismatch => write!(f, "pairing requires opposite weights and dual reps"),
            Error::UndeclaredTail { residual } => {
                write!(f, "non-decaying residue {residual:e} beyond declared profile")
            }
            Error::QuadratureFailure => write!(f, "adaptive quadrature did not reach tolerance"),
            Error::OnSingularLocus => write!(f, "point lies on the singular locus Z(m, phi)"),
            Error::UnsupportedProfile => write!(f, "profile combination has no closed-form tail"),
            Error::StencilFailure => write!(f, "finite-difference stencil evaluation failed"),
            Error::BadWeight => write!(f, "weight outside supported range for this operator"),
            Error::MissingConstantProfile => {
                write!(f, "input handle does not declare its constant-term profile")
            }
            Error::MissingBasisData => {
                write!(f, "weight <= 2 requires supplied basis data or an empty declaration")
            }
        }
    }
}
