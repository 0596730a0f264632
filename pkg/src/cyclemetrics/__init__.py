"""Cycle statistics of random mappings with restricted indegrees.

Submodules:

* :mod:`cyclemetrics.fungraph`: mapping tables, cycle structure, factored T and B, text I/O
* :mod:`cyclemetrics.sampler`: uniform {0,k}-mappings and exhaustive enumeration
* :mod:`cyclemetrics.cyclestats`: exact and asymptotic laws for Z, T and B
* :mod:`cyclemetrics.ffpoly`: functional graphs of ``x^d + a`` over prime fields
* :mod:`cyclemetrics.experiments`: Monte Carlo and deterministic studies
* :mod:`cyclemetrics.cli`: the ``cyclemetrics`` command
"""

__version__ = "0.1.0"

from .fungraph import (  # noqa: E402
    CycleStructure,
    FactoredInteger,
    MappingFormatError,
    MappingTable,
    cycle_structure,
    indegree_profile,
    read_mapping,
    read_mappings,
    write_mapping,
)
from .sampler import (  # noqa: E402
    SamplerConfig,
    count_0k_mappings,
    enumerate_0k_mappings,
    sample_0k_core,
    sample_0k_mapping,
)
from .cyclestats import (  # noqa: E402
    constants,
    exact_expected_B,
    exact_expected_T,
    exact_mu,
    exact_prob_Z,
    lognormal_params,
    mode_and_concentration,
    predictor_logEB,
    predictor_logET,
    z_distribution,
)
from .ffpoly import PolySpec, poly_mapping, primes_congruent, verify_indegree_law  # noqa: E402
from .experiments import (  # noqa: E402
    FirstHitConfig,
    estimate_first_hit,
    run_lognormality,
    run_table1,
    sample_concentration,
)
