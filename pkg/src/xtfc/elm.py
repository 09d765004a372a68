"""Random-feature free function g(x) = sum_j beta_j * sigma(w_j . x + b_j).

Input weights and biases are drawn once from a seeded PCG64 stream and never
trained; only the output weights ``beta`` are unknowns downstream. Inputs can
be mapped affinely onto the unit box before the hidden layer, so the sampled
weights see the same scale on every domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activation import MAX_ORDER, ActivationKind, activate


@dataclass(frozen=True, eq=False)
class ElmBasis:
    """Frozen hidden layer of a single-layer random-feature network.

    Attributes
    ----------
    weights : (L, dim) array
        Input weights, one row per neuron.
    biases : (L,) array
    kind : ActivationKind
    seed : int
    bounds : (lo, hi)
        Interval the weights and biases were sampled from.
    shift, scale : (dim,) arrays
        The hidden layer sees ``(x - shift) * scale``.
    """

    weights: np.ndarray
    biases: np.ndarray
    kind: ActivationKind
    seed: int
    bounds: tuple[float, float]
    shift: np.ndarray | None = None
    scale: np.ndarray | None = None

    @property
    def n_neurons(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def init_elm(n_neurons, dim, bounds, seed, kind=ActivationKind.TANH, domain=None) -> ElmBasis:
    """Sample a reproducible basis with weights and biases ~ unif(lo, hi).

    With ``domain`` (one ``(lo, hi)`` per input) the inputs are mapped onto
    the unit box before the hidden layer.
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if n_neurons < 1 or dim < 1:
        raise ValueError(f"need at least one neuron and one input dimension, got L={n_neurons}, dim={dim}")
    if not lo < hi:
        raise ValueError(f"weight range must satisfy lo < hi, got ({lo}, {hi})")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    weights = rng.uniform(lo, hi, size=(n_neurons, dim))
    biases = rng.uniform(lo, hi, size=n_neurons)
    shift = np.zeros(dim)
    scale = np.ones(dim)
    if domain is not None:
        box = np.asarray(domain, dtype=float).reshape(dim, 2)
        if np.any(box[:, 1] <= box[:, 0]):
            raise ValueError(f"degenerate domain {domain}")
        shift = box[:, 0].copy()
        scale = 1.0 / (box[:, 1] - box[:, 0])
    for arr in (weights, biases, shift, scale):
        arr.setflags(write=False)
    return ElmBasis(weights, biases, ActivationKind(kind), int(seed), (lo, hi), shift, scale)


def _check_orders(basis, d):
    if d is None:
        return (0,) * basis.dim
    d = tuple(int(v) for v in d)
    if len(d) != basis.dim:
        raise ValueError(f"derivative multi-index {d} does not match input dimension {basis.dim}")
    if any(v < 0 for v in d):
        raise ValueError(f"negative derivative order in {d}")
    if sum(d) > MAX_ORDER:
        raise ValueError(f"total derivative order {sum(d)} exceeds {MAX_ORDER}")
    return d


def basis_row(basis: ElmBasis, x, d=None) -> np.ndarray:
    """Hidden-layer outputs (or their partial derivatives) at ``x``.

    ``x`` is a single point of shape ``(dim,)`` or a batch ``(N, dim)``; the
    result has shape ``(L,)`` or ``(N, L)`` respectively. Entry ``j`` is
    ``prod_k w_jk**d_k * sigma^(|d|)(w_j . x + b_j)``.
    """
    d = _check_orders(basis, d)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != basis.dim:
        raise ValueError(f"points have {pts.shape[1]} coordinates, basis expects {basis.dim}")
    weights = basis.weights
    if basis.scale is not None:
        weights = weights * basis.scale
        pts = pts - basis.shift
    z = pts @ weights.T + basis.biases
    out = activate(basis.kind, z, sum(d))
    if any(d):
        out = out * np.prod(weights ** np.asarray(d, dtype=float), axis=1)
    return out[0] if single else out


def eval_g(basis: ElmBasis, beta, x, d=None):
    """Value of the free function (or a partial derivative) at ``x``."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (basis.n_neurons,):
        raise ValueError(f"beta has shape {beta.shape}, expected ({basis.n_neurons},)")
    out = basis_row(basis, x, d) @ beta
    return float(out) if np.ndim(out) == 0 else out
