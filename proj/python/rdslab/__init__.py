"""Exact and Monte Carlo calculus for skew products over mixing driving chains.

The heavy lifting lives in the compiled extension ``_rdslab``; this package
re-exports its surface.
"""

from _rdslab import (  # noqa: F401
    AnnealedSystem,
    Cocycle,
    PiecewiseMap,
    RdslabError,
    SymbolChain,
    __version__,
    build_chain,
    build_map,
    bv_norm,
    coboundary_observable,
    dkw_radius,
    doubling_map,
    k_apply,
    k_decay_sup_norms,
    ks_distance_vs_normal,
    m3_example_map,
    martingale_decomposition,
    mixing_alpha,
    mixing_phi_reverse,
    mixing_psi,
    path_density,
    push,
    run_from_config,
    sample_Sn,
    sample_path,
    tripling_map,
)

__all__ = [
    "AnnealedSystem",
    "Cocycle",
    "PiecewiseMap",
    "RdslabError",
    "SymbolChain",
    "__version__",
    "build_chain",
    "build_map",
    "bv_norm",
    "coboundary_observable",
    "dkw_radius",
    "doubling_map",
    "k_apply",
    "k_decay_sup_norms",
    "ks_distance_vs_normal",
    "m3_example_map",
    "martingale_decomposition",
    "mixing_alpha",
    "mixing_phi_reverse",
    "mixing_psi",
    "path_density",
    "push",
    "run_from_config",
    "sample_Sn",
    "sample_path",
    "tripling_map",
]
