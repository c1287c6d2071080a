"""Thermodynamic formalism for affine iterated function systems.

Core quantities (singular value function, subadditive pressure, affinity
dimension, Gibbs/equilibrium-state approximants, Lyapunov spectra) plus
mechanical checkers for the structural hypotheses (irreducibility,
proximality, triangularizability, similitude structure) that the theory's
separation and counting results rest on.
"""

__version__ = "0.1.0"

from .errors import AffpressError, BudgetError, DegenerateError, InputError
from .linalg import (
    LogSVResult,
    MatrixTuple,
    eigen_moduli,
    exterior_power,
    rotation,
    singular_values,
    spectral_radius,
    word_product,
    word_product_logsv,
)
from .potentials import (
    SVF,
    DualityTransformResult,
    MaxOf,
    NormPower,
    PotentialSpec,
    ScaledSVF,
    WeightedProduct,
    dualize,
    eval_potential,
    log_rho_form,
    svf,
    svf_via_exterior,
)
from .pressure import (
    AffineIFS,
    AffinityInterval,
    BernoulliMeasure,
    GibbsApprox,
    LyapunovSpectrum,
    PressureBracket,
    QuasimultReport,
    affinity_dimension,
    gibbs_approx,
    gibbs_lyapunov_spectrum,
    lyapunov_spectrum,
    pressure_bracket,
    pressure_lower,
    pressure_upper,
    quasimult_diagnostic,
    sample_self_affine,
)
from .structure import (
    IrreducibilityVerdict,
    ProximalityResult,
    StrongIrreducibilityVerdict,
    StructureReport,
    Subspace,
    TriangularizabilityResult,
    block_reduce,
    common_eigenvectors,
    invariance_residual,
    invariant_subspaces,
    irreducibility_report,
    proximality,
    strong_irreducibility_heuristic,
    structure_report,
    triangularizability,
)
from .analysis import (
    BlockSplitReport,
    RhoFormConstancyReport,
    RhoMultReport,
    SeparationVerdict,
    SimilitudeCertificate,
    block_split_residual,
    check_separation,
    detect_similitude_structure,
    rho_form,
    rho_form_constancy,
    rho_form_normalize,
    spectral_radius_multiplicativity,
)
from .words import Word

__all__ = [name for name in dir() if not name.startswith("_")]
