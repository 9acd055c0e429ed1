"""Interacting particle systems and Wright-Fisher renormalization toolkit."""

from ._core import (
    IpslabError,
    beta_moment,
    binsplit,
    cauchy,
    contact_duality_gap,
    iterate_renorm,
    kyy_moment,
    maximal_bound,
    psi_mean,
    pstar,
    run,
    subcommands,
    u_gamma_apply,
    u_gamma_constant,
)

__all__ = [
    "IpslabError",
    "beta_moment",
    "binsplit",
    "cauchy",
    "contact_duality_gap",
    "iterate_renorm",
    "kyy_moment",
    "maximal_bound",
    "psi_mean",
    "pstar",
    "run",
    "subcommands",
    "u_gamma_apply",
    "u_gamma_constant",
]
