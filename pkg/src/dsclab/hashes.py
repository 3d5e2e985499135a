"""Hash-function ensembles over symbol blocks: drawing members, measuring
the pairwise-collision (alpha, beta) parameters, joining ensembles, and the
balanced-coloring / collision-resistance bounds that drive code design.

Three ensemble kinds are supported:

* ``random_binning``: an independent uniform bin for every domain point.
* ``uniform_linear``: a uniform dense matrix over GF(q) applied to blocks.
* ``sparse_linear``: a matrix with exactly ``column_degree`` nonzeros per
  column, uniform positions and values.

The first two are 2-universal, so their parameters are exactly (1, 0); the
sparse family is measured empirically or by exact enumeration at small n.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .blocks import all_blocks, symbols_to_index
from .fields import SparseMatrix, is_prime, matmul_blocks, sample_sparse_matrix

ALPHA_GRID = (1.0, 1.1, 1.25, 1.5, 2.0)
KINDS = ("random_binning", "uniform_linear", "sparse_linear", "product")

_DOMAIN_GUARD = 1 << 24
_EXACT_DOMAIN_GUARD = 1 << 16


class EstimateUnstableError(RuntimeError):
    """Monte Carlo budget ran out before the estimate settled; carries the
    partial result in .partial."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class HashEnsembleSpec:
    kind: str
    alphabet: int
    block_length: int
    image_size: int
    q: int = 2
    column_degree: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.image_size < 1:
            raise ValueError("image size must be >= 1")
        if self.domain_size > _DOMAIN_GUARD:
            raise ValueError("domain too large; keep |W|^n <= 2^24")
        if self.kind in ("uniform_linear", "sparse_linear"):
            if not is_prime(self.q):
                raise ValueError("linear kinds need a prime field modulus")
            if self.alphabet != self.q:
                raise ValueError("linear kinds act on field-valued symbols (alphabet == q)")
            if self.q ** self.rows != self.image_size:
                raise ValueError(f"image size {self.image_size} is not a power of q={self.q}")
            if self.kind == "sparse_linear":
                degree = self.column_degree
                if degree is None:
                    raise ValueError("sparse_linear needs a column_degree")
                if degree > self.rows:
                    raise ValueError("column_degree exceeds matrix rows")

    @property
    def domain_size(self) -> int:
        return self.alphabet ** self.block_length

    @property
    def rows(self) -> int:
        """Matrix row count for linear kinds (log_q of the image size)."""
        r = round(math.log(self.image_size, self.q))
        return int(r)


@dataclass
class DrawnHash:
    """One realized member: either a matrix acting on blocks or a lookup
    table over the whole domain.  Output values are integers in
    [0, image_size), with matrix outputs packed big-endian base q."""

    spec: HashEnsembleSpec
    seed: object = None
    matrix: np.ndarray | None = None
    table: np.ndarray | None = None
    _all: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, block) -> int:
        sym = np.asarray(block, dtype=np.int64)
        if self.table is not None:
            return int(self.table[symbols_to_index(sym, self.spec.alphabet)])
        out = (self.matrix @ sym) % self.spec.q
        return int(symbols_to_index(out, self.spec.q)) if out.size else 0

    def apply_many(self, sym_blocks: np.ndarray) -> np.ndarray:
        """Hash values for an array of blocks, shape (count, n) -> (count,)."""
        if self.table is not None:
            return self.table[symbols_to_index(sym_blocks, self.spec.alphabet)]
        out = matmul_blocks(self.matrix, sym_blocks, self.spec.q)
        if out.shape[1] == 0:
            return np.zeros(len(sym_blocks), dtype=np.int64)
        return symbols_to_index(out, self.spec.q)

    def hash_all(self) -> np.ndarray:
        """Hash value of every domain point, in block-index order (cached)."""
        if self._all is None:
            blocks = all_blocks(self.spec.alphabet, self.spec.block_length)
            self._all = self.apply_many(blocks)
        return self._all


def draw(spec: HashEnsembleSpec, seed) -> DrawnHash:
    rng = np.random.default_rng(seed)
    if spec.kind == "random_binning":
        table = rng.integers(0, spec.image_size, size=spec.domain_size)
        return DrawnHash(spec=spec, seed=seed, table=table)
    if spec.kind == "uniform_linear":
        m = rng.integers(0, spec.q, size=(spec.rows, spec.block_length))
        return DrawnHash(spec=spec, seed=seed, matrix=m.astype(np.int64))
    if spec.kind == "sparse_linear":
        sm = sample_sparse_matrix(spec.rows, spec.block_length, spec.column_degree,
                                  spec.q, rng)
        return DrawnHash(spec=spec, seed=seed, matrix=sm.dense())
    raise ValueError(f"cannot draw from ensemble kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# Pairwise collision probabilities
# ---------------------------------------------------------------------------

def _sparse_zero_probability(spec: HashEnsembleSpec, diff: np.ndarray) -> float:
    """Exact P(M d = 0) for the sparse ensemble, by convolving the per-column
    contribution distributions over the group GF(q)^rows.

    Columns are independent: column c with d_c != 0 adds d_c * v at
    column_degree uniformly chosen distinct rows (values v uniform nonzero).
    """
    q, rows, degree = spec.q, spec.rows, spec.column_degree
    if rows == 0:
        return 1.0
    states = q ** rows
    if states > _EXACT_DOMAIN_GUARD:
        raise ValueError("sparse exact mode needs q^rows <= 2^16")
    supports = list(itertools.combinations(range(rows), degree))
    values = list(itertools.product(range(1, q), repeat=degree))
    place = q ** (rows - 1 - np.arange(rows, dtype=np.int64))
    # Start from the point mass at the zero vector and convolve column by column.
    dist = np.zeros(states)
    dist[0] = 1.0
    for dc in diff:
        if dc == 0:
            continue
        contrib = np.zeros(states)
        w = 1.0 / (len(supports) * len(values))
        for sup in supports:
            for vals in values:
                vec = np.zeros(rows, dtype=np.int64)
                for r, v in zip(sup, vals):
                    vec[r] = (dc * v) % q
                contrib[int((vec * place).sum())] += w
        # Group convolution: new[z] = sum_u contrib[u] * dist[z - u].
        new = np.zeros(states)
        digits = (np.arange(states)[:, None] // place) % q
        for u in np.nonzero(contrib)[0]:
            u_dig = (u // place) % q
            shifted = ((digits - u_dig) % q @ place)
            new += contrib[u] * dist[shifted]
        dist = new
    return float(dist[0])


def collision_probability(spec: HashEnsembleSpec, w, w_prime, mode="exact",
                          trials=10000, seed=0) -> float:
    """Probability over the ensemble that w and w_prime hash together."""
    w = np.asarray(w, dtype=np.int64)
    w_prime = np.asarray(w_prime, dtype=np.int64)
    if np.array_equal(w, w_prime):
        raise ValueError("w == w_prime collides trivially; pass distinct blocks")
    if mode == "exact":
        if spec.kind == "random_binning":
            return 1.0 / spec.image_size
        if spec.kind == "uniform_linear":
            # M (w - w') is uniform over GF(q)^rows for any nonzero difference.
            return float(spec.q) ** (-spec.rows)
        if spec.kind == "sparse_linear":
            diff = (w - w_prime) % spec.q
            return _sparse_zero_probability(spec, diff)
        raise ValueError(f"no exact collision formula for kind {spec.kind!r}")
    if mode == "monte_carlo":
        rng = np.random.default_rng(seed)
        hits = 0
        for t in range(trials):
            f = draw(spec, rng)
            hits += f(w) == f(w_prime)
        return hits / trials
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# (alpha, beta) estimation
# ---------------------------------------------------------------------------

@dataclass
class HashParamEstimate:
    alpha: float
    beta: float
    trials: int
    exact: bool
    profile: dict = field(default_factory=dict)  # grid alpha -> induced beta
    anchors: int = 0


def _exact_diff_probabilities(spec: HashEnsembleSpec) -> np.ndarray:
    """Collision probability for every nonzero difference (linear kinds) or
    the constant pair probability (random binning), indexed by diff block."""
    size = spec.domain_size
    probs = np.zeros(size)
    if spec.kind == "random_binning":
        probs[1:] = 1.0 / spec.image_size
        return probs
    diffs = all_blocks(spec.alphabet, spec.block_length)
    if spec.kind == "uniform_linear":
        probs[1:] = float(spec.q) ** (-spec.rows)
        return probs
    if spec.kind == "sparse_linear":
        for d in range(1, size):
            probs[d] = _sparse_zero_probability(spec, diffs[d])
        return probs
    raise ValueError(f"no exact pair probabilities for kind {spec.kind!r}")


def estimate_hash_params(spec: HashEnsembleSpec, mode="exact", trials=2000,
                         anchors=64, seed=0,
                         alpha_grid=ALPHA_GRID) -> HashParamEstimate:
    """Estimate the pairwise-collision parameters (alpha, beta).

    For each alpha on the grid, beta(alpha) is the largest (over anchor
    points w) total collision probability contributed by partners w' whose
    pair probability strictly exceeds alpha / image_size.  The returned pair
    is the smallest grid alpha with its induced beta; the full profile is
    kept on the estimate.

    Exact mode enumerates pair probabilities (collision probabilities of the
    three built-in kinds depend only on the block difference, so one pass
    over differences covers every anchor).  Monte Carlo mode estimates pair
    probabilities from drawn members and maxes over sampled anchors.
    """
    image = spec.image_size
    if mode == "exact":
        if spec.domain_size > _EXACT_DOMAIN_GUARD:
            raise ValueError("exact mode needs |W|^n <= 2^16; use monte_carlo")
        probs = _exact_diff_probabilities(spec)
        profile = {}
        for a in alpha_grid:
            mask = probs > a / image
            profile[a] = float(probs[mask].sum())
        a0 = min(alpha_grid)
        return HashParamEstimate(alpha=a0, beta=profile[a0], trials=0, exact=True,
                                 profile=profile, anchors=spec.domain_size)

    if mode != "monte_carlo":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    size = spec.domain_size
    n_anchor = min(anchors, size)
    anchor_idx = rng.choice(size, size=n_anchor, replace=False)
    counts = np.zeros((2, n_anchor, size))  # two halves for a stability check
    half = max(trials // 2, 1)
    for t in range(2 * half):
        f = draw(spec, rng)
        values = f.hash_all()
        eq = values[None, :] == values[anchor_idx][:, None]
        counts[t // half] += eq
    pair_hat = counts.sum(axis=0) / (2 * half)
    for k, a in enumerate(anchor_idx):
        pair_hat[k, a] = 0.0  # drop the trivial self pair
    halves = counts / half
    for k, a in enumerate(anchor_idx):
        halves[:, k, a] = 0.0
    profile = {}
    wobble = {}
    for a in alpha_grid:
        thresh = a / image
        beta_full = (pair_hat * (pair_hat > thresh)).sum(axis=1).max()
        b0 = (halves[0] * (halves[0] > thresh)).sum(axis=1).max()
        b1 = (halves[1] * (halves[1] > thresh)).sum(axis=1).max()
        profile[a] = float(beta_full)
        wobble[a] = abs(b0 - b1)
    a0 = min(alpha_grid)
    est = HashParamEstimate(alpha=a0, beta=profile[a0], trials=2 * half,
                            exact=False, profile=profile, anchors=n_anchor)
    if wobble[a0] > 0.25 * max(profile[a0], 0.05):
        raise EstimateUnstableError(
            f"beta estimate still moving between halves ({wobble[a0]:.3g}); "
            "raise the trial budget", est)
    return est


# ---------------------------------------------------------------------------
# Joining ensembles
# ---------------------------------------------------------------------------

def join(spec_a: HashEnsembleSpec, spec_b: HashEnsembleSpec) -> HashEnsembleSpec:
    """Product ensemble on the shared domain: w -> (f(w), g(w)).

    Image sizes multiply.  Independent uniform matrices stack to a uniform
    matrix and independent binning tables pair to a binning table, so those
    kinds are preserved; other combinations are tracked as kind "product".
    """
    if (spec_a.alphabet, spec_a.block_length) != (spec_b.alphabet, spec_b.block_length):
        raise ValueError("joined ensembles must share a domain")
    image = spec_a.image_size * spec_b.image_size
    same = spec_a.kind == spec_b.kind
    if same and spec_a.kind == "uniform_linear" and spec_a.q == spec_b.q:
        return HashEnsembleSpec("uniform_linear", spec_a.alphabet,
                                spec_a.block_length, image, q=spec_a.q)
    if same and spec_a.kind == "random_binning":
        return HashEnsembleSpec("random_binning", spec_a.alphabet,
                                spec_a.block_length, image, q=spec_a.q)
    return HashEnsembleSpec("product", spec_a.alphabet, spec_a.block_length,
                            image, q=spec_a.q)


def join_params(params_a, params_b):
    """(alpha, beta) of a product ensemble: alphas multiply, betas add."""
    (aa, ba), (ab, bb) = params_a, params_b
    return (aa * ab, ba + bb)


def join_drawn(fa: DrawnHash, fb: DrawnHash) -> DrawnHash:
    """Realized product map w -> f(w) * |Im g| + g(w)."""
    spec = join(fa.spec, fb.spec)
    if fa.matrix is not None and fb.matrix is not None and fa.spec.q == fb.spec.q:
        stacked = np.vstack([fa.matrix, fb.matrix])
        return DrawnHash(spec=spec, seed=(fa.seed, fb.seed), matrix=stacked)
    table = fa.hash_all() * fb.spec.image_size + fb.hash_all()
    return DrawnHash(spec=spec, seed=(fa.seed, fb.seed), table=table)


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------

def balanced_coloring_bound(alpha, beta, image_size, q_max, q_total) -> float:
    """Bound on the expected unevenness of hash bins for a weighted set:
    sqrt(alpha - 1 + (beta + 1) * image_size * q_max / q_total)."""
    if q_total <= 0:
        raise ValueError("q_total must be positive")
    radicand = alpha - 1 + (beta + 1) * image_size * (q_max / q_total)
    if radicand < 0:
        raise ValueError(f"negative radicand {radicand}; alpha < 1 is inconsistent")
    return math.sqrt(radicand)


def subset_hash_params(per_encoder: dict) -> tuple[dict, dict]:
    """Per-subset (alpha, beta) built from per-encoder pairs.

    alpha multiplies across the subset; beta combines as
    prod(beta_i + 1) - 1, the parameter of the tuple-product ensemble.
    The empty subset gets (1, 0).
    """
    ids = sorted(per_encoder)
    alphas, betas = {}, {}
    for r in range(len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            key = frozenset(combo)
            a = 1.0
            b = 1.0
            for i in combo:
                a *= per_encoder[i][0]
                b *= per_encoder[i][1] + 1
            alphas[key] = a
            betas[key] = b - 1.0
    return alphas, betas


def overlap_profile(t_set, ids) -> dict:
    """Overlap counts of a tuple set T, keyed by nonempty id subsets.

    For the full set the value is |T|; for a proper subset I' it is the
    largest number of T members sharing any fixed complement coordinate
    pattern.
    """
    ids = list(ids)
    pos = {i: k for k, i in enumerate(ids)}
    t_list = [tuple(t) for t in t_set]
    profile = {}
    full = frozenset(ids)
    for r in range(1, len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            key = frozenset(combo)
            if key == full:
                profile[key] = len(t_list)
                continue
            comp = [pos[i] for i in ids if i not in key]
            counts = {}
            for t in t_list:
                fixed = tuple(t[k] for k in comp)
                counts[fixed] = counts.get(fixed, 0) + 1
            profile[key] = max(counts.values()) if counts else 0
    return profile


def collision_resistance_bound(alphas_by_subset, betas_by_subset,
                               overline_o_by_subset, image_sizes) -> float:
    """Bound on the probability that some other member of a tuple set shares
    every hash value with a given member.

    Sums alpha_{I'} * (beta_{I'^c} + 1) * O_{I'} / prod(image sizes in I')
    over nonempty subsets I', plus beta of the full set.
    """
    ids = sorted(image_sizes)
    full = frozenset(ids)
    total = 0.0
    for r in range(1, len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            key = frozenset(combo)
            try:
                a = alphas_by_subset[key]
                b_comp = betas_by_subset[full - key]
                o = overline_o_by_subset[key]
            except KeyError as exc:
                raise KeyError(f"missing subset entry {sorted(key)}") from exc
            denom = 1.0
            for i in combo:
                denom *= image_sizes[i]
            total += a * (b_comp + 1) * o / denom
    return total + betas_by_subset[full]


# ---------------------------------------------------------------------------
# Exhaustive ensemble enumeration (tiny instances only)
# ---------------------------------------------------------------------------

def enumerate_ensemble(spec: HashEnsembleSpec):
    """Yield every member of the ensemble; members are equiprobable.

    Only feasible for tiny specs, which is exactly where exact expectation
    checks of the coloring and collision bounds live.
    """
    if spec.kind == "random_binning":
        if spec.image_size ** spec.domain_size > _EXACT_DOMAIN_GUARD:
            raise ValueError("ensemble too large to enumerate")
        for values in itertools.product(range(spec.image_size),
                                        repeat=spec.domain_size):
            yield DrawnHash(spec=spec, table=np.array(values, dtype=np.int64))
        return
    if spec.kind == "uniform_linear":
        cells = spec.rows * spec.block_length
        if spec.q ** cells > _EXACT_DOMAIN_GUARD:
            raise ValueError("ensemble too large to enumerate")
        for values in itertools.product(range(spec.q), repeat=cells):
            m = np.array(values, dtype=np.int64).reshape(spec.rows,
                                                         spec.block_length)
            yield DrawnHash(spec=spec, matrix=m)
        return
    if spec.kind == "sparse_linear":
        degree = spec.column_degree
        col_options = []
        for support in itertools.combinations(range(spec.rows), degree):
            for vals in itertools.product(range(1, spec.q), repeat=degree):
                col = np.zeros(spec.rows, dtype=np.int64)
                col[list(support)] = vals
                col_options.append(col)
        total = len(col_options) ** spec.block_length
        if total > _EXACT_DOMAIN_GUARD:
            raise ValueError("ensemble too large to enumerate")
        for cols in itertools.product(col_options, repeat=spec.block_length):
            yield DrawnHash(spec=spec, matrix=np.stack(cols, axis=1))
        return
    raise ValueError(f"cannot enumerate ensemble kind {spec.kind!r}")


def coloring_deviation(drawn: DrawnHash, weights: np.ndarray, member_mask) -> float:
    """For one hash member: sum over colors of |Q(T cap preimage)/Q(T) - 1/Im|."""
    q_total = float(weights[member_mask].sum())
    if q_total <= 0:
        raise ValueError("set T carries no weight")
    values = drawn.hash_all()
    image = drawn.spec.image_size
    dev = 0.0
    for c in range(image):
        mass = float(weights[member_mask & (values == c)].sum())
        dev += abs(mass / q_total - 1.0 / image)
    return dev


def expected_coloring_deviation(spec: HashEnsembleSpec, weights, member_mask) -> float:
    """Exact ensemble expectation of coloring_deviation, by enumeration."""
    devs = [coloring_deviation(h, weights, member_mask)
            for h in enumerate_ensemble(spec)]
    return float(np.mean(devs))


def collision_event_probability(specs_by_id: dict, t_set, w_tuple) -> float:
    """Exact probability, over independent ensemble draws, that some other
    member of t_set shares every per-encoder hash value with w_tuple.

    Tuples are per-encoder block indices, ordered by sorted encoder id.
    """
    ids = sorted(specs_by_id)
    w_tuple = tuple(int(v) for v in w_tuple)
    others = [t for t in (tuple(int(v) for v in row) for row in t_set)
              if t != w_tuple]
    if not others:
        return 0.0
    hits = 0
    total = 0
    members = [list(enumerate_ensemble(specs_by_id[i])) for i in ids]
    for combo in itertools.product(*members):
        total += 1
        tables = [h.hash_all() for h in combo]
        targets = [tab[w] for tab, w in zip(tables, w_tuple)]
        for other in others:
            if all(tab[o] == tv for tab, o, tv in zip(tables, other, targets)):
                hits += 1
                break
    return hits / total
