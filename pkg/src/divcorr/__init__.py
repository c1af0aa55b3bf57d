"""Numerical laboratory for shifted divisor correlations in short intervals."""
from .arith import (
    DivisorVector,
    FactorTable,
    SieveInfeasible,
    big_omega,
    count_prime_factors_in_range,
    divisor_k,
    divisor_k_window,
    factorize,
    primes_up_to,
    sieve_window,
)
from .characters import (
    DirichletCharacter,
    characters_mod,
    gauss_type_sum,
    orthogonality_check,
    ramanujan_sum,
)
from .correlation import CorrelationReport, brute_force_oracle, correlate_window, run_experiment
from .estimators import DivisorFunction, RestrictedDivisorFunction, ShortIntervalCorrelation
from .majorarc import (
    ArcDissection,
    PhaseSum,
    autocorr_identity,
    b_decomposition_check,
    dissect,
    exp_sum,
    i_q_integral,
    nonprincipal_long_average,
    phase_sum_v,
    prime_dirichlet_poly,
    upsilon,
)
from .singular import (
    SingularSeriesValue,
    a_coeff,
    arc_weight,
    m_weight,
    main_term,
    p_poly_leading,
    singular_series,
)
from .skfilter import SkParams, canonical_params, desk_params, discrepancy_stats, f_k_window, is_member, scaled_params

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
