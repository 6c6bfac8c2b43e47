"""ergostab: stability of long-time averages of measure-preserving maps.

A numerical toolkit around one question: how do infinite-time,
ensemble-averaged observations of a volume-preserving map respond to weak
perturbations of the map?  It provides

* phase-space geometry (torus/cylinder points, regions, grid partitions,
  seeded ensembles),
* measure-preserving map families (rotations, standard maps on torus and
  cylinder, quasiperiodically driven skew products) and rational
  approximants of rotation numbers,
* trajectory estimators of time and double averages, visit-set coverage,
  and trap-occupancy decay,
* finite Koopman operators and invariant projectors in Fourier and Ulam
  bases, weak/strong operator distances, the continuity functional of the
  projected pairing, and the coboundary least-squares solve,
* scripted experiments with seeded, byte-reproducible CSV/JSON outputs and
  a small CLI (``ergostab --help``).
"""

from .averaging import (
    birkhoff_average,
    birkhoff_averages_array,
    coverage,
    coverage_detail,
    eta_trajectory,
    fit_power_law,
    itea,
    occupancy_decay,
    pairing_estimate,
    pairing_samples,
    visit_fraction,
)
from .geometry import (
    CYLINDER_2D,
    DEFAULT_CYLINDER_WINDOW,
    PERIODIC,
    REAL,
    TORUS_2D,
    Box,
    CellSet,
    Disk,
    EnsembleSpec,
    GeometryError,
    GridPartition,
    PhasePoint,
    cell_index,
    indicator,
    sample_array,
    sample_ensemble,
    wrap,
)
from .maps import (
    Composite,
    MapError,
    RationalApproximant,
    SinusoidalKick,
    SkewProduct,
    StandardMapCylinder,
    StandardMapTorus,
    TorusRotation,
    amplitude_sweep_family,
    convergents,
    iterate,
    k_sweep_family,
    perturbed_family,
    rotation_convergent_family,
    step,
)
from .observables import (
    ConstantObservable,
    ExpNeg,
    FourierMode,
    FourierPolynomial,
    GridFunction,
    HamiltonianObservable,
    IndicatorObservable,
    KineticEnergy,
    LinearCombination,
    PendulumEnergy,
    Polynomial,
    ScaledEnergy,
    ShiftedEnergy,
)
from .operators import (
    CoboundaryResult,
    FourierBasis,
    HamiltonianPerturbation,
    InvariantProjector,
    KoopmanOperator,
    UlamBasis,
    apply_projector,
    cesaro_projector,
    coboundary_solve,
    default_probe,
    eta,
    fourier_koopman_rotation,
    fourier_projector_rotation,
    hamiltonian_ratio_bound,
    inner,
    load_operator,
    save_operator,
    to_coefficients,
    ulam_matrix,
    vec_norm,
    weak_distance,
)
from .results import AverageResult, ContinuityCurve, CurveRow

__version__ = "0.1.0"
