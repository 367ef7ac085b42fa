"""Prompt search: steer LLM output toward a target perspective point.

Prompts are a base phrase plus k swappable phrase slots. Two searches
over the assignment grid are provided: exhaustive brute force (guarded
by a combination budget) and greedy coordinate descent that sweeps one
coordinate at a time, adopting the per-coordinate argmin of the L2 loss
in the 2-D perspective space. Both record every evaluation in a trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import itertools
import math

from .embedding import EmbeddingBackendConfig, embed_batch
from .errors import ConfigurationError, InputValidationError
from .llm_client import LlmBackendConfig, complete
from .metric import LabeledDocument, ProjectionModel, project
from .pca import PcaModel, PerspectivePoint, pca_transform

BRUTE_FORCE_MAX_SLOTS = 8
BRUTE_FORCE_MAX_COMBINATIONS = 10_000
DEFAULT_MAX_SWEEPS = 10


@dataclass(frozen=True)
class PromptSpec:
    """Base phrases plus candidate lists for each phrase slot."""

    base_phrases: tuple[str, ...]
    slots: tuple[tuple[str, ...], ...] = ()
    joiner: str = " "

    def __post_init__(self) -> None:
        object.__setattr__(self, "base_phrases", tuple(self.base_phrases))
        object.__setattr__(
            self, "slots", tuple(tuple(s) for s in self.slots)
        )
        if not self.base_phrases:
            raise InputValidationError("prompt spec needs at least one base phrase")
        for i, candidates in enumerate(self.slots):
            if not candidates:
                raise InputValidationError(f"slot {i} has no candidates")

    def combination_count(self) -> int:
        return len(self.base_phrases) * math.prod(len(s) for s in self.slots)


@dataclass(frozen=True)
class PromptAssignment:
    base_index: int
    choices: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "choices", tuple(self.choices))


@dataclass(frozen=True)
class Evaluation:
    assignment: PromptAssignment
    prompt: str
    outputs: tuple[str, ...]
    point: PerspectivePoint
    loss: float


@dataclass
class SearchTrace:
    evaluations: list[Evaluation] = field(default_factory=list)
    best: int = -1

    def record(self, ev: Evaluation) -> int:
        self.evaluations.append(ev)
        idx = len(self.evaluations) - 1
        if self.best < 0 or ev.loss < self.evaluations[self.best].loss:
            self.best = idx
        return idx

    @property
    def best_evaluation(self) -> Evaluation:
        if self.best < 0:
            raise InputValidationError("trace has no evaluations")
        return self.evaluations[self.best]


def render_prompt(spec: PromptSpec, a: PromptAssignment) -> str:
    """Base phrase then each chosen non-empty candidate, joined by the
    spec joiner; empty candidates are elided."""
    if not 0 <= a.base_index < len(spec.base_phrases):
        raise InputValidationError(
            f"base index {a.base_index} out of range"
        )
    if len(a.choices) != len(spec.slots):
        raise InputValidationError(
            f"assignment has {len(a.choices)} choices for "
            f"{len(spec.slots)} slots"
        )
    parts = [spec.base_phrases[a.base_index]]
    for slot, choice in zip(spec.slots, a.choices):
        if not 0 <= choice < len(slot):
            raise InputValidationError(f"slot choice {choice} out of range")
        if slot[choice]:
            parts.append(slot[choice])
    return spec.joiner.join(parts)


def perspective_of_output(
    text: str,
    proj: ProjectionModel,
    pca: PcaModel,
    backend_cfg: EmbeddingBackendConfig,
) -> PerspectivePoint:
    """Where a generated text lands in the 2-D perspective space."""
    return pca_transform(pca, project(proj, embed_batch([text], backend_cfg)[0]))


def loss_to_target(p: PerspectivePoint, target: PerspectivePoint) -> float:
    """L2 distance between two perspective points."""
    return math.hypot(p.x - target.x, p.y - target.y)


def mean_point(points: list[PerspectivePoint]) -> PerspectivePoint:
    return PerspectivePoint(
        x=sum(p.x for p in points) / len(points),
        y=sum(p.y for p in points) / len(points),
    )


def cluster_centroid(
    dataset: list[LabeledDocument],
    cluster: str,
    proj: ProjectionModel,
    pca: PcaModel,
    backend_cfg: EmbeddingBackendConfig,
) -> PerspectivePoint:
    """Mean perspective point of one cluster's documents; the named-cluster
    form of target specification."""
    docs = [doc for doc in dataset if doc.cluster == cluster]
    if not docs:
        raise ConfigurationError(
            f"cluster {cluster!r} has no documents in the dataset"
        )
    embeddings = embed_batch([doc.text for doc in docs], backend_cfg)
    points = [pca_transform(pca, project(proj, e)) for e in embeddings]
    return mean_point(points)


class _Evaluator:
    """Evaluates assignments, memoizing by rendered prompt."""

    def __init__(
        self,
        spec: PromptSpec,
        target: PerspectivePoint,
        proj: ProjectionModel,
        pca: PcaModel,
        llm_cfg: LlmBackendConfig,
        backend_cfg: EmbeddingBackendConfig,
        trace: SearchTrace,
        memoize: bool,
    ) -> None:
        self.spec = spec
        self.target = target
        self.proj = proj
        self.pca = pca
        self.llm_cfg = llm_cfg
        self.backend_cfg = backend_cfg
        self.trace = trace
        self.memoize = memoize
        self._by_prompt: dict[str, int] = {}

    def loss_of(self, assignment: PromptAssignment) -> float:
        prompt = render_prompt(self.spec, assignment)
        if self.memoize and prompt in self._by_prompt:
            return self.trace.evaluations[self._by_prompt[prompt]].loss
        outputs = complete(prompt, self.llm_cfg)
        points = [
            perspective_of_output(o, self.proj, self.pca, self.backend_cfg)
            for o in outputs
        ]
        point = mean_point(points)
        loss = loss_to_target(point, self.target)
        idx = self.trace.record(
            Evaluation(
                assignment=assignment,
                prompt=prompt,
                outputs=tuple(outputs),
                point=point,
                loss=loss,
            )
        )
        if self.memoize:
            self._by_prompt[prompt] = idx
        return loss


def brute_force_search(
    spec: PromptSpec,
    target: PerspectivePoint,
    proj: ProjectionModel,
    pca: PcaModel,
    llm_cfg: LlmBackendConfig,
    backend_cfg: EmbeddingBackendConfig,
) -> SearchTrace:
    """Evaluate every assignment once, in lexicographic order (base index
    major, then slot indices); ties keep the earliest evaluation."""
    if len(spec.slots) > BRUTE_FORCE_MAX_SLOTS:
        raise ConfigurationError(
            f"brute force allows at most {BRUTE_FORCE_MAX_SLOTS} slots, "
            f"spec has {len(spec.slots)}"
        )
    combos = spec.combination_count()
    if combos > BRUTE_FORCE_MAX_COMBINATIONS:
        raise ConfigurationError(
            f"brute force budget exceeded: {combos} combinations "
            f"(limit {BRUTE_FORCE_MAX_COMBINATIONS})"
        )
    trace = SearchTrace()
    evaluator = _Evaluator(
        spec, target, proj, pca, llm_cfg, backend_cfg, trace, memoize=False
    )
    slot_ranges = [range(len(s)) for s in spec.slots]
    for base_index in range(len(spec.base_phrases)):
        for choices in itertools.product(*slot_ranges):
            evaluator.loss_of(PromptAssignment(base_index, choices))
    return trace


def gcd_search(
    spec: PromptSpec,
    target: PerspectivePoint,
    proj: ProjectionModel,
    pca: PcaModel,
    llm_cfg: LlmBackendConfig,
    backend_cfg: EmbeddingBackendConfig,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> SearchTrace:
    """Greedy coordinate descent over (base, slot_0, ..., slot_k-1).

    Starts at the all-zero assignment; each sweep visits coordinates in
    order and adopts the candidate with minimal loss, holding the others
    fixed (ties go to the lowest candidate index). Stops after a sweep
    with no change or after ``max_sweeps``. Repeat visits to an already
    rendered prompt are served from the memo and add no trace entries.
    """
    if max_sweeps < 1:
        raise InputValidationError(f"max_sweeps must be >= 1, got {max_sweeps}")
    trace = SearchTrace()
    evaluator = _Evaluator(
        spec, target, proj, pca, llm_cfg, backend_cfg, trace, memoize=True
    )
    current = [0] * (1 + len(spec.slots))
    coordinate_sizes = [len(spec.base_phrases)] + [len(s) for s in spec.slots]

    for _ in range(max_sweeps):
        changed = False
        for coord, size in enumerate(coordinate_sizes):
            best_candidate = 0
            best_loss = math.inf
            for candidate in range(size):
                trial = current.copy()
                trial[coord] = candidate
                loss = evaluator.loss_of(
                    PromptAssignment(trial[0], tuple(trial[1:]))
                )
                if loss < best_loss:
                    best_loss = loss
                    best_candidate = candidate
            if best_candidate != current[coord]:
                current[coord] = best_candidate
                changed = True
        if not changed:
            break
    return trace
