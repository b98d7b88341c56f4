"""Seeded random network families with MAP variables attached at extreme nodes."""

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from ..config import (
    DEFAULT_SUITE_FILE,
    FAMILY_SHAPES,
    MAX_CARDINALITY,
    MAX_MAP_PARENTS_PER_EXTREME,
    PARTIAL_KTREE_KEEP_PROBABILITY,
    POLYTREE_MAX_PARENTS,
    RANDOM_DAG_MAX_PARENTS,
    SEARCH_SPACE_BUCKETS,
)
from ..core.network import Network, NetworkBuilder, Query, state_space_size

logger = logging.getLogger(__name__)

_TW_FAMILY = re.compile(r"^rand-tw(\d+)$")
_FIXED_FAMILIES = ("poly", "rand", "alarm-like", "insurance-like")


def bucket_label(ss_log2: float) -> str:
    """Search-space bucket holding ``ss_log2``; each bucket includes its lower edge."""
    for label, low, high in SEARCH_SPACE_BUCKETS:
        if low <= ss_log2 < high:
            return label
    raise ValueError(f"search space log2 {ss_log2} is negative")


def bucket_bounds(label: str) -> Tuple[float, float]:
    for name, low, high in SEARCH_SPACE_BUCKETS:
        if name == label:
            return low, high
    raise ValueError(f"unknown search-space bucket {label!r}")


def search_space_log2(net: Network, query: Query) -> float:
    """log2 of z(MAP variables)."""
    return math.log2(state_space_size(net, query.map_vars))


@dataclass(frozen=True)
class SuiteSpec:
    """One family of random instances: ``family.size.maxcard.bucket``."""

    family: str
    base_size: int
    max_card: int = 2
    seed: int = 0
    query_count: int = 10
    ss_bucket: str = "0-10"
    evidence_count: int = 1
    label: Optional[str] = None
    tw_cap: Optional[int] = field(default=None, init=False)

    def __post_init__(self) -> None:
        match = _TW_FAMILY.match(self.family)
        if match:
            object.__setattr__(self, "tw_cap", int(match.group(1)))
            if self.tw_cap < 1:
                raise ValueError(f"treewidth cap must be >= 1 in {self.family!r}")
        elif self.family not in _FIXED_FAMILIES:
            raise ValueError(
                f"unknown family {self.family!r} (expected one of {', '.join(_FIXED_FAMILIES)} or rand-twK)"
            )
        if self.base_size < 2:
            raise ValueError(f"base_size must be at least 2, got {self.base_size}")
        if not 2 <= self.max_card <= MAX_CARDINALITY:
            raise ValueError(f"max_card must lie in 2..{MAX_CARDINALITY}, got {self.max_card}")
        if self.query_count < 1:
            raise ValueError("query_count must be positive")
        bucket_bounds(self.ss_bucket)

    @property
    def name(self) -> str:
        return self.label or f"{self.family}.{self.base_size}.{self.max_card}.{self.ss_bucket}"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SuiteSpec":
        allowed = {
            "family", "base_size", "max_card", "seed", "query_count",
            "ss_bucket", "evidence_count", "label",
        }
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown suite keys: {sorted(unknown)}")
        return cls(**data)


def _skeleton_poly(n: int, rng: np.random.Generator) -> List[List[int]]:
    """Random tree, each edge oriented at random (subject to the parent cap)."""
    parents: List[List[int]] = [[] for _ in range(n)]
    for i in range(1, n):
        j = int(rng.integers(0, i))
        if rng.random() < 0.5 and len(parents[j]) < POLYTREE_MAX_PARENTS:
            parents[j].append(i)
        else:
            parents[i].append(j)
    return parents


def _skeleton_rand(n: int, rng: np.random.Generator) -> List[List[int]]:
    parents: List[List[int]] = [[]]
    for i in range(1, n):
        count = int(rng.integers(1, min(RANDOM_DAG_MAX_PARENTS, i) + 1))
        parents.append(sorted(int(p) for p in rng.choice(i, size=count, replace=False)))
    return parents


def _skeleton_ktree(n: int, k: int, rng: np.random.Generator) -> List[List[int]]:
    """Partial k-tree: random k-tree edges kept with fixed probability, oriented low to high."""
    edges = set()
    cliques: List[Tuple[int, ...]] = []
    start = min(n, k + 1)
    for i in range(start):
        edges.update((j, i) for j in range(i))
    if n > k:
        base = tuple(range(k + 1))
        cliques = [tuple(v for v in base if v != u) for u in base]
    for i in range(start, n):
        clique = cliques[int(rng.integers(0, len(cliques)))]
        edges.update((j, i) for j in clique)
        cliques.extend(tuple(sorted(set(clique) - {u} | {i})) for u in clique)
    parents: List[List[int]] = [[] for _ in range(n)]
    for j, i in sorted(edges):
        if rng.random() < PARTIAL_KTREE_KEEP_PROBABILITY:
            parents[i].append(j)
    return parents


def _skeleton_shaped(n: int, family: str, rng: np.random.Generator) -> List[List[int]]:
    """Random DAG with the edge density and in-degree cap of a reference topology."""
    shape = FAMILY_SHAPES[family]
    target = int(round(n * shape["edges"] / shape["nodes"]))
    cap = shape["max_parents"]
    parents: List[List[int]] = [[] for _ in range(n)]
    pairs = [(j, i) for i in range(1, n) for j in range(i)]
    added = 0
    for idx in rng.permutation(len(pairs)):
        if added >= target:
            break
        j, i = pairs[int(idx)]
        if len(parents[i]) < cap:
            parents[i].append(j)
            added += 1
    for plist in parents:
        plist.sort()
    return parents


def _base_skeleton(spec: SuiteSpec, rng: np.random.Generator) -> List[List[int]]:
    if spec.family == "poly":
        return _skeleton_poly(spec.base_size, rng)
    if spec.family == "rand":
        return _skeleton_rand(spec.base_size, rng)
    if spec.tw_cap is not None:
        return _skeleton_ktree(spec.base_size, spec.tw_cap, rng)
    return _skeleton_shaped(spec.base_size, spec.family, rng)


def _attach_map_roots(
    base_parents: List[List[int]], count: int, rng: np.random.Generator
) -> Dict[int, List[int]]:
    """Assign each added root to a base node, least loaded first.

    Base roots and leaves take added roots until each holds
    MAX_MAP_PARENTS_PER_EXTREME; the rest go to the inner base nodes under
    the same cap, so no added root is left without a child.

    Returns:
        base node -> added-node offsets attached to it
    """
    n = len(base_parents)
    has_child = {p for plist in base_parents for p in plist}
    extremes = sorted(v for v in range(n) if not base_parents[v] or v not in has_child)
    inner = sorted(set(range(n)) - set(extremes))
    load: Dict[int, List[int]] = {v: [] for v in range(n)}
    tiers = [extremes, inner]
    for k in range(count):
        pool: List[int] = []
        for tier in tiers:
            if not tier:
                continue
            least = min(len(load[v]) for v in tier)
            if least < MAX_MAP_PARENTS_PER_EXTREME:
                pool = [v for v in tier if len(load[v]) == least]
                break
        if not pool:
            raise ValueError(f"cannot attach {count} added roots to {n} base nodes")
        load[pool[int(rng.integers(0, len(pool)))]].append(k)
    return {v: offsets for v, offsets in load.items() if offsets}


def _pick_map(
    cards: Sequence[int], low: float, high: float, rng: np.random.Generator
) -> List[int]:
    """Added nodes, in random order, until log2 z(MAP) reaches a target drawn in [low, high).

    The target is uniform over [low, min(high, cap)), cap being log2 of the
    product of all ``cards``; when cap does not exceed ``low`` every node that
    keeps the size below ``high`` is taken.
    """
    cap = sum(math.log2(c) for c in cards)
    upper = min(high, cap)
    target = float(rng.uniform(low, upper)) if upper > low else upper
    chosen: List[int] = []
    log_size = 0.0
    for k in rng.permutation(len(cards)):
        if chosen and log_size >= target:
            break
        step = math.log2(cards[int(k)])
        if log_size + step < high:
            chosen.append(int(k))
            log_size += step
    return sorted(chosen)


def gen_random_instance(spec: SuiteSpec, index: int = 0) -> Tuple[Network, Query]:
    """
    Instance ``index`` of a suite, reproducible from (spec.seed, index).

    The base network of ``base_size`` nodes follows the family's skeleton.
    As many uniform-prior roots are then added as parents of base roots and
    leaves, overflowing onto inner base nodes once every extreme holds its
    share. MAP variables are drawn from those roots up to a search-space
    size drawn uniformly within the requested bucket, and evidence goes on
    random base leaves.

    Args:
        spec: suite description
        index: instance number within the suite

    Returns:
        (network in the float backend, query)
    """
    rng = np.random.default_rng([spec.seed, index])
    n = spec.base_size
    base_parents = _base_skeleton(spec, rng)
    base_cards = [int(c) for c in rng.integers(2, spec.max_card + 1, size=n)]
    added_cards = [int(c) for c in rng.integers(2, spec.max_card + 1, size=n)]
    attachments = _attach_map_roots(base_parents, n, rng)

    builder = NetworkBuilder()
    for i, card in enumerate(base_cards):
        builder.add_variable(f"B{i}", card)
    for k, card in enumerate(added_cards):
        builder.add_variable(f"M{k}", card)
        builder.set_cpt(f"M{k}", [[1.0 / card] * card])

    all_cards = base_cards + added_cards
    for i in range(n):
        plist = [f"B{p}" for p in base_parents[i]] + [f"M{k}" for k in attachments.get(i, [])]
        builder.set_parents(f"B{i}", plist)
        rows = 1
        for p in base_parents[i]:
            rows *= base_cards[p]
        for k in attachments.get(i, []):
            rows *= added_cards[k]
        builder.set_cpt(f"B{i}", rng.dirichlet(np.ones(base_cards[i]), size=rows).tolist())
    net = builder.build("f64")

    low, high = bucket_bounds(spec.ss_bucket)
    map_offsets = _pick_map(added_cards, low, high, rng)
    map_names = [f"M{k}" for k in map_offsets]
    if math.log2(math.prod(added_cards[k] for k in map_offsets)) < low:
        logger.warning(
            f"{spec.name}#{index}: not enough MAP candidates to reach bucket {spec.ss_bucket}"
        )

    has_child = {p for plist in base_parents for p in plist}
    leaves = [v for v in range(n) if v not in has_child]
    count = min(spec.evidence_count, len(leaves))
    observed = sorted(int(v) for v in rng.choice(leaves, size=count, replace=False)) if count else []
    evidence = {f"B{v}": int(rng.integers(0, all_cards[v])) for v in observed}

    query = Query.create(net, map_names, evidence)
    logger.debug(
        f"Generated {spec.name}#{index}: {net.n} variables, {len(map_names)} MAP, "
        f"{len(evidence)} observed"
    )
    return net, query


def load_suite(path: Union[str, Path, None] = None) -> Tuple[List[SuiteSpec], Dict[str, Any]]:
    """
    Read a YAML suite file.

    The file holds ``suites: [...]`` entries (SuiteSpec fields) and optional
    ``solvers`` and ``timeout`` run settings.

    Returns:
        (specs, settings)
    """
    path = Path(path) if path is not None else DEFAULT_SUITE_FILE
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    entries = data.get("suites")
    if not entries:
        raise ValueError(f"{path}: no 'suites' entries")
    specs = [SuiteSpec.from_dict(dict(entry)) for entry in entries]
    settings = {key: data[key] for key in ("solvers", "timeout") if key in data}
    logger.info(f"Loaded {len(specs)} suites from {path}")
    return specs, settings
