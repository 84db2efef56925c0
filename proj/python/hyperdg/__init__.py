"""Matrix-free discontinuous Galerkin advection in phase space."""

from ._hyperdg import (
    ProtocolError,
    apply_operator,
    bench,
    config_keys,
    default_config,
    dump_config,
    even_odd_flops_model,
    landau_root,
    mapping_memory_per_dof,
    normalize_config,
    quadrature,
    random_vector,
    run_advection,
    run_landau,
    split_dimension,
    total_ghost_lower_bound,
    verify,
)


def config(**settings):
    """Settings dict with every value converted to its textual form."""
    out = {}
    for key, value in settings.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        out[key] = str(value)
    return out


__all__ = [
    "ProtocolError",
    "apply_operator",
    "bench",
    "config",
    "config_keys",
    "default_config",
    "dump_config",
    "even_odd_flops_model",
    "landau_root",
    "mapping_memory_per_dof",
    "normalize_config",
    "quadrature",
    "random_vector",
    "run_advection",
    "run_landau",
    "split_dimension",
    "total_ghost_lower_bound",
    "verify",
]
