"""Two-stage estimation and robust inference for multi-horizon projections.

The package is organised bottom-up:

- :mod:`mhproj.model`: exact VAR algebra, GIR recursion, closed-form moments
- :mod:`mhproj.simulate`: seeded random streams, VAR paths, resampling
- :mod:`mhproj.estimate`: LS-VAR, LS projection, recursive VAR and two-stage estimators
- :mod:`mhproj.infer`: Wald tests, z / bootstrap / sup-t intervals, LMC and MMC tests
- :mod:`mhproj.experiments`: Monte Carlo harness and efficiency grid
- :mod:`mhproj.files`, :mod:`mhproj.empirical`, :mod:`mhproj.cli`: I/O and the command line
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (  # noqa: F401
    DgpSpec,
    GirSet,
    PopulationMoments,
    VarParams,
    companion,
    dgp_from_roots,
    gir_recursion,
    impulse_responses,
    named_dgp,
    omega_beta_closed,
    omega_ls_closed,
    omega_s_closed,
    persistence_class,
    population_autocov,
    population_moments,
    sigma_zx_closed,
)
from .simulate import (  # noqa: F401
    RngStream,
    SeriesPanel,
    bootstrap_initial_block,
    mc_gaussian_residuals,
    projection_residuals_from_irf,
    simulate_var,
    wild_bootstrap_residuals,
)
from .estimate import (  # noqa: F401
    EstimatorSpec,
    ProjectionFit,
    ScorePanel,
    VarFit,
    fit_var_ls,
    hac_lrv,
    ls_projection,
    pope_bias_correct,
    rc_var_gir,
    reordered_score,
    robust_cov,
    two_stage,
)
from .infer import (  # noqa: F401
    CiResult,
    LinearRestriction,
    WaldResult,
    bootstrap_ti,
    causality_restriction,
    ci_by_test_inversion,
    coefficient_restriction,
    lmc_test,
    mc_pvalue,
    mmc_test,
    supt_band,
    wald_causality,
    z_interval,
)
from .experiments import McConfig, McSummary, EfficiencyCell, efficiency_grid, run_mc  # noqa: F401
from .files import ResultDocument, load_csv, write_csv  # noqa: F401
from .empirical import CausalityMap, empirical_causality  # noqa: F401
