"""Exact-arithmetic laboratory for torus flows, skew products and nilflows.

Points on the circle live on a 2^128 grid and the group operations are exact,
so orbit identities can be checked bit for bit; the floating-point layer on
top (observables, averages, discrepancies) carries compensated summation and
explicit truncation budgets.
"""

from .diagnostics import (
    Character,
    DiagnosticReport,
    ThetaObservable,
    birkhoff_average,
    box_discrepancy,
    default_deviation_starts,
    eigen_correlation,
    eigen_scan,
    geometric_mean_bound,
    orbit_cardinality,
    report_to_csv,
    report_to_json,
    star_discrepancy_1d,
    twisted_prefix_sums,
    uniform_deviation,
    uniform_deviation_report,
)
from .errors import ConfigError, ResourceLimitError
from .flows import (
    Anzai,
    CocycleSkew,
    Heisenberg,
    Product,
    Rotation,
    SFlow,
    WeylSystem,
    anzai_closed_form,
    flow_dimension,
    flow_from_json,
    flow_to_json,
    make_flow,
    orbit,
    orbit_blocks,
    step,
    weyl_affine_step,
    weyl_closed_form,
)
from .joinings import (
    FiberMode,
    JoinSpec,
    PairOrbitPoint,
    anzai_joining_factor,
    join_from_json,
    join_orbit,
    join_to_json,
    m_joining_demo,
    minimality_probe,
)
from .lacunary import (
    H_eval,
    LacunaryParams,
    LacunarySeq,
    Weights,
    furstenberg_sequence,
    h_eval,
    j_map,
    phi_as_frac,
    phi_eval,
    small_divisor_gap,
)
from .nilflow import (
    HeisPoint,
    NilParams,
    heis_identity,
    heis_inv,
    heis_mul,
    nil_function,
    nil_step,
    reduce_mod_lattice,
    theta_eval,
    translation_element,
)
from .torus import (
    Frac,
    TorusPoint,
    add,
    dist,
    frac_from_decimal,
    frac_from_float,
    frac_from_json,
    frac_from_rational,
    frac_to_json,
    int_mul,
    neg,
    sub,
    to_real,
    zero_point,
)

__version__ = "0.1.0"
