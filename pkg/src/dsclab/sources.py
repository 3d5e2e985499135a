"""Correlated-source models on finite alphabets: per-letter joint laws,
memoryless block extension, test channels, reproduction maps, and
distortion measures.

Index-set conventions: encoder ids are strings; the lossless ids are a
subset of the encoder ids and the lossy (reproduction) ids are disjoint
from the lossless ones.  Variables inside block tables are named
"x_<id>", "y", "w_<id>", and "z_<id>".
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .blocks import index_to_symbols

STATE_GUARD = 1 << 26

LETTER_TOL = 1e-12
BLOCK_TOL = 1e-10


class StateSpaceError(ValueError):
    """Exact mode was asked for a product space beyond the guard; callers
    should fall back to sampling."""


def _check_table(name, table, tol=LETTER_TOL):
    total = float(table.sum())
    if abs(total - 1.0) > BLOCK_TOL:
        raise ValueError(f"{name} sums to {total}, outside tolerance")
    if abs(total - 1.0) > tol:
        warnings.warn(f"{name} renormalized (drift {total - 1.0:.3g})")
    return table / total


@dataclass
class ProblemSpec:
    """Model description: who encodes, who is lossless, what gets reproduced.

    letter_joint has one axis per encoder (in `encoders` order) plus a final
    axis for the side information Y.  Test channels exist for the non-lossless
    encoders only; lossless encoders carry W_i = X_i implicitly.  Reproduction
    tables map a letter tuple (w over all encoders, y) to a z symbol, and
    distortion tables score (x over all encoders, y, z).
    """

    encoders: list
    lossless: list
    lossy: list
    x_alphabets: dict
    y_alphabet: int
    letter_joint: np.ndarray
    w_alphabets: dict = field(default_factory=dict)
    test_channels: dict = field(default_factory=dict)
    reproductions: dict = field(default_factory=dict)
    distortions: dict = field(default_factory=dict)
    z_alphabets: dict = field(default_factory=dict)
    distortion_levels: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.encoders)) != len(self.encoders):
            raise ValueError("duplicate encoder ids")
        if not set(self.lossless) <= set(self.encoders):
            raise ValueError("lossless ids must be encoder ids")
        if set(self.lossless) & set(self.lossy):
            raise ValueError("lossless and lossy id sets must be disjoint")
        expected = tuple(self.x_alphabets[i] for i in self.encoders) + (self.y_alphabet,)
        self.letter_joint = np.asarray(self.letter_joint, dtype=float)
        if self.letter_joint.shape != expected:
            raise ValueError(f"letter_joint shape {self.letter_joint.shape} != {expected}")
        if np.any(self.letter_joint < 0):
            raise ValueError("negative probability in letter_joint")
        self.letter_joint = _check_table("letter_joint", self.letter_joint)
        for i in self.coded_ids():
            if i not in self.test_channels:
                raise ValueError(f"missing test channel for encoder {i!r}")
            ch = np.asarray(self.test_channels[i], dtype=float)
            if ch.shape != (self.x_alphabets[i], self.w_alphabet(i)):
                raise ValueError(f"test channel {i!r} has shape {ch.shape}")
            if np.any(ch < 0):
                raise ValueError(f"negative entry in test channel {i!r}")
            sums = ch.sum(axis=1)
            if np.any(np.abs(sums - 1.0) > BLOCK_TOL):
                raise ValueError(f"test channel {i!r} rows do not sum to 1")
            self.test_channels[i] = ch / sums[:, None]
        for j in self.lossy:
            rep = np.asarray(self.reproductions[j], dtype=np.int64)
            wshape = tuple(self.w_alphabet(i) for i in self.encoders) + (self.y_alphabet,)
            if rep.shape != wshape:
                raise ValueError(f"reproduction {j!r} has shape {rep.shape}, wanted {wshape}")
            if rep.min() < 0 or rep.max() >= self.z_alphabets[j]:
                raise ValueError(f"reproduction {j!r} maps outside the z alphabet")
            self.reproductions[j] = rep
            dist = np.asarray(self.distortions[j], dtype=float)
            dshape = tuple(self.x_alphabets[i] for i in self.encoders) \
                + (self.y_alphabet, self.z_alphabets[j])
            if dist.shape != dshape:
                raise ValueError(f"distortion {j!r} has shape {dist.shape}, wanted {dshape}")
            if not np.all(np.isfinite(dist)) or np.any(dist < 0):
                raise ValueError(f"distortion {j!r} must be finite and nonnegative")
            self.distortions[j] = dist

    def coded_ids(self):
        """Encoders that quantize through a test channel (the non-lossless ones)."""
        return [i for i in self.encoders if i not in self.lossless]

    def w_alphabet(self, i) -> int:
        if i in self.lossless:
            return self.x_alphabets[i]
        return self.w_alphabets[i]

    def eval_ids(self):
        """Reproduction indexes that the error criterion checks: the lossy ids
        plus the lossless ids (checked with the block mismatch indicator)."""
        return list(self.lossless) + list(self.lossy)


@dataclass
class BlockDistribution:
    """Joint law of named block variables; probs has one axis per variable
    with size alphabet**n."""

    names: list
    alphabets: list
    n: int
    probs: np.ndarray

    def __post_init__(self):
        shape = tuple(a ** self.n for a in self.alphabets)
        if self.probs.shape != shape:
            raise ValueError(f"probs shape {self.probs.shape} does not match {shape}")
        total = float(self.probs.sum())
        if abs(total - 1.0) > BLOCK_TOL:
            raise ValueError(f"block table sums to {total}")

    @property
    def state_count(self) -> int:
        return int(self.probs.size)

    def axis(self, name) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def alphabet(self, name) -> int:
        return self.alphabets[self.axis(name)]


@dataclass
class BlockSample:
    n: int
    symbols: dict
    seed: object = None


def memoryless_extend(spec_or_letter, n: int) -> BlockDistribution:
    """n-fold product of the per-letter source law over (X_I, Y)."""
    if isinstance(spec_or_letter, ProblemSpec):
        letter = spec_or_letter.letter_joint
        names = [f"x_{i}" for i in spec_or_letter.encoders] + ["y"]
    else:
        letter, names = spec_or_letter
        letter = np.asarray(letter, dtype=float)
    alphabets = list(letter.shape)
    if n < 1:
        raise ValueError("block length must be >= 1")
    states = 1
    for a in alphabets:
        states *= a ** n
    if states > STATE_GUARD:
        raise StateSpaceError(
            f"{states} joint states exceed the exact-mode guard; sample instead")
    v = len(alphabets)
    out = reduce(np.multiply.outer, [letter] * n) if n > 1 else letter.copy()
    if n > 1:
        # Outer power ordered the axes letter-by-letter; group them by variable.
        perm = [t * v + k for k in range(v) for t in range(n)]
        out = out.transpose(perm).reshape([a ** n for a in alphabets])
    return BlockDistribution(names=list(names), alphabets=alphabets, n=n, probs=out)


def kron_power(mat: np.ndarray, n: int) -> np.ndarray:
    return reduce(np.kron, [mat] * n)


def attach_test_channels(block: BlockDistribution, spec: ProblemSpec,
                         only=None) -> BlockDistribution:
    """Extend a block law over (X_I, Y) with the quantized descriptions W_i.

    Channels act independently per coordinate; lossless encoders get the
    identity channel, so their W_i duplicates X_i exactly.  `only` restricts
    which encoder ids receive a W variable (default: all).
    """
    ids = list(spec.encoders) if only is None else list(only)
    names = list(block.names)
    alphabets = list(block.alphabets)
    probs = block.probs
    for i in ids:
        x_ax = names.index(f"x_{i}")
        if i in spec.lossless:
            ch = np.eye(spec.x_alphabets[i])
        else:
            ch = spec.test_channels[i]
        kb = kron_power(ch, block.n)
        if probs.size * kb.shape[1] > STATE_GUARD:
            raise StateSpaceError("attaching channels exceeds the state guard")
        moved = np.moveaxis(probs, x_ax, -1)
        ext = moved[..., :, None] * kb
        # New W axis sits at the end; put X back where it was.
        ext = np.moveaxis(ext, -2, x_ax)
        probs = ext
        names.append(f"w_{i}")
        alphabets.append(ch.shape[1])
    return BlockDistribution(names=names, alphabets=alphabets, n=block.n, probs=probs)


def marginalize_condition(block: BlockDistribution, keep, given=None) -> BlockDistribution:
    """Exact marginal of `keep`, optionally conditioned on block-index
    assignments for other variables."""
    given = dict(given or {})
    for name in list(keep) + list(given):
        block.axis(name)
    if set(keep) & set(given):
        raise ValueError("cannot both keep and condition on a variable")
    idx = []
    for name in block.names:
        if name in given:
            idx.append(int(given[name]))
        else:
            idx.append(slice(None))
    sub = block.probs[tuple(idx)]
    remaining = [nm for nm in block.names if nm not in given]
    drop = tuple(k for k, nm in enumerate(remaining) if nm not in keep)
    marg = sub.sum(axis=drop) if drop else sub
    total = float(marg.sum())
    if total <= 0:
        raise ValueError("conditioning event has zero probability")
    if given:
        marg = marg / total
    kept = [nm for nm in remaining if nm in keep]
    # Reorder axes to the caller's requested order.
    order = [kept.index(nm) for nm in keep]
    marg = marg.transpose(order) if marg.ndim > 1 else marg
    return BlockDistribution(names=list(keep),
                             alphabets=[block.alphabet(nm) for nm in keep],
                             n=block.n, probs=marg)


def reproduce(spec: ProblemSpec, j, w_blocks: dict, y_block) -> np.ndarray:
    """Apply the reproduction map for index j coordinatewise.

    For a lossless id this is the projection onto its own W block; lossy ids
    look up their declared letter table for each coordinate.
    """
    if j in spec.lossless:
        return np.asarray(w_blocks[j], dtype=np.int64)
    if j not in spec.lossy or j not in spec.reproductions:
        raise KeyError(f"no reproduction map for id {j!r}")
    table = spec.reproductions[j]
    coords = tuple(np.asarray(w_blocks[i], dtype=np.int64) for i in spec.encoders)
    y = np.asarray(y_block, dtype=np.int64)
    return table[coords + (y,)]


def block_distortion(spec: ProblemSpec, j, x_blocks: dict, y_block, z_block) -> float:
    """Distortion of one block: per-letter average for lossy ids, the whole
    block mismatch indicator for lossless ids."""
    y = np.asarray(y_block, dtype=np.int64)
    z = np.asarray(z_block, dtype=np.int64)
    n = len(y)
    if len(z) != n or any(len(np.asarray(x)) != n for x in x_blocks.values()):
        raise ValueError("block length mismatch")
    if j in spec.lossless:
        x = np.asarray(x_blocks[j], dtype=np.int64)
        return float(np.any(x != z))
    table = spec.distortions[j]
    coords = tuple(np.asarray(x_blocks[i], dtype=np.int64) for i in spec.encoders)
    return float(table[coords + (y, z)].mean())


def max_distortion(spec: ProblemSpec) -> float:
    vals = [float(d.max()) for d in spec.distortions.values()]
    return max(vals) if vals else 1.0


def sample_block(block_or_spec, n=None, count=1, seed=0) -> list:
    """Seeded i.i.d. draws; returns a list of BlockSample.

    A ProblemSpec is sampled letterwise (memoryless, any n); an explicit
    BlockDistribution is sampled from its full table.
    """
    rng = np.random.default_rng(seed)
    if isinstance(block_or_spec, ProblemSpec):
        spec = block_or_spec
        if n is None:
            raise ValueError("sampling a ProblemSpec needs a block length")
        flat = spec.letter_joint.reshape(-1)
        draws = rng.choice(flat.size, size=(count, n), p=flat)
        per_var = np.unravel_index(draws, spec.letter_joint.shape)
        names = [f"x_{i}" for i in spec.encoders] + ["y"]
        out = []
        for t in range(count):
            sym = {nm: per_var[k][t].astype(np.int64) for k, nm in enumerate(names)}
            out.append(BlockSample(n=n, symbols=sym, seed=(seed, t)))
        return out
    block = block_or_spec
    flat = block.probs.reshape(-1)
    draws = rng.choice(flat.size, size=count, p=flat)
    per_var = np.unravel_index(draws, block.probs.shape)
    out = []
    for t in range(count):
        sym = {}
        for k, nm in enumerate(block.names):
            sym[nm] = index_to_symbols(int(per_var[k][t]), block.alphabets[k], block.n)
        out.append(BlockSample(n=block.n, symbols=sym, seed=(seed, t)))
    return out
