"""Hardy-space spectral laboratory for the Calogero-Moser derivative NLS."""

from .grid import (
    ComplexField,
    CoefficientVector,
    HardyField,
    SpectralGrid,
    analyze,
    chirality_defect,
    finite_fourier,
    hardy_coefficients,
    hardy_synth,
    inner,
    line_mass,
    synth,
    szego_project,
)
from .operators import (
    DEFOCUSING,
    FOCUSING,
    OperatorMatrix,
    iplus,
    lax_apply,
    lax_matrix,
    spectral_derivative,
    toeplitz_apply,
    xstar_apply,
    xstar_matrix,
)
from .eigenfunctions import (
    EigenfunctionFamily,
    EigenfunctionSolution,
    dlambda_eigenfunction,
    eigenfunction_family,
    k_lambda_matrix,
    lambda_zero_probe,
    solve_eigenfunction,
)
from .distorted import (
    DistortedSpectrum,
    LambdaGrid,
    bop_apply,
    default_lambda_max,
    dft_forward,
    dft_inverse,
    halfline_hilbert,
    inner_product_defect,
    jplus,
    plancherel_defect,
    xstar_identity_defect,
)
from . import potentials

__version__ = "0.1.0"
