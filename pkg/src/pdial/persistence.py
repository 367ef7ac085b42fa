"""Versioned JSON/JSONL serialization for every artifact the pipeline
reads or writes.

Formats carry a ``format`` tag and are rejected on mismatch. Floats go
through Python's shortest-round-trip repr, so save/load pairs are
bit-exact; see FORMATS.md for the full schemas.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
import json
import logging
from pathlib import Path

import numpy as np

from .embedding import EmbeddingBackendConfig
from .errors import FormatError
from .evaluation import SimilarityReport, render_report_text
from .llm_client import LlmBackendConfig, _load_mock_table
from .metric import (
    ClusterSimilarityMatrix,
    LabeledDocument,
    ProjectionModel,
    TrainConfig,
    TrainingLog,
)
from .optimizer import Evaluation, PromptAssignment, PromptSpec, SearchTrace
from .pca import PcaModel, PerspectivePoint

logger = logging.getLogger(__name__)

MODEL_FORMAT = "pdial-proj-v1"
PCA_FORMAT = "pdial-pca-v1"
TRAIN_LOG_FORMAT = "pdial-train-log-v1"
REPORT_FORMAT = "pdial-report-v1"


@dataclass(frozen=True)
class RunConfig:
    """Everything one pipeline run needs: backends, training, file paths."""

    embedding: EmbeddingBackendConfig
    llm: LlmBackendConfig
    train: TrainConfig
    paths: dict[str, str]


def _read_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise FormatError(f"{path}: expected a JSON object at top level")
    return data


def _check_format(data: dict, expected: str, path: str | Path) -> None:
    tag = data.get("format")
    if tag != expected:
        raise FormatError(
            f"{path}: format tag is {tag!r}, this reader expects {expected!r}"
        )


def _write_json(path: str | Path, data: dict) -> None:
    Path(path).write_text(
        json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def save_model(path: str | Path, model: ProjectionModel, cfg: TrainConfig) -> None:
    _write_json(
        path,
        {
            "format": MODEL_FORMAT,
            "d_in": model.d_in,
            "d_out": model.d_out,
            "w_row_major": model.W.flatten().tolist(),
            "train_config": asdict(cfg),
        },
    )


def load_model(path: str | Path) -> tuple[ProjectionModel, TrainConfig]:
    data = _read_json(path)
    _check_format(data, MODEL_FORMAT, path)
    try:
        d_in = int(data["d_in"])
        d_out = int(data["d_out"])
        w = np.asarray(data["w_row_major"], dtype=np.float64).reshape(d_out, d_in)
        cfg = TrainConfig(**data["train_config"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed model file: {exc}") from exc
    return ProjectionModel(d_in=d_in, d_out=d_out, W=w), cfg


def save_pca(path: str | Path, model: PcaModel) -> None:
    _write_json(
        path,
        {
            "format": PCA_FORMAT,
            "mean": model.mean.tolist(),
            "components": model.components.tolist(),
            "explained_variance": model.explained_variance.tolist(),
        },
    )


def load_pca(path: str | Path) -> PcaModel:
    data = _read_json(path)
    _check_format(data, PCA_FORMAT, path)
    try:
        return PcaModel(
            mean=np.asarray(data["mean"], dtype=np.float64),
            components=np.asarray(data["components"], dtype=np.float64),
            explained_variance=np.asarray(
                data["explained_variance"], dtype=np.float64
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed PCA file: {exc}") from exc


def load_dataset(path: str | Path) -> list[LabeledDocument]:
    """JSON Lines, one ``{"id", "text", "cluster"}`` object per line.

    Duplicate ids are rejected with both line numbers; an empty file is
    allowed but logged as a warning.
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    docs: list[LabeledDocument] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(
                f"{path}:{lineno}: invalid JSON at column {exc.colno}: {exc.msg}"
            ) from exc
        if not isinstance(obj, dict):
            raise FormatError(f"{path}:{lineno}: expected a JSON object")
        try:
            doc = LabeledDocument(
                id=str(obj["id"]), text=str(obj["text"]), cluster=str(obj["cluster"])
            )
        except KeyError as exc:
            raise FormatError(
                f"{path}:{lineno}: missing field {exc.args[0]!r}"
            ) from exc
        if doc.id in seen:
            raise FormatError(
                f"{path}: duplicate id {doc.id!r} on lines {seen[doc.id]} "
                f"and {lineno}"
            )
        seen[doc.id] = lineno
        docs.append(doc)
    if not docs:
        logger.warning("%s: dataset file is empty", path)
    return docs


def load_matrix(path: str | Path) -> ClusterSimilarityMatrix:
    data = _read_json(path)
    try:
        return ClusterSimilarityMatrix(
            clusters=list(data["clusters"]),
            sim=np.asarray(data["sim"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed cluster matrix: {exc}") from exc


def load_prompt_spec(path: str | Path) -> PromptSpec:
    data = _read_json(path)
    try:
        return PromptSpec(
            base_phrases=tuple(str(p) for p in data["base_phrases"]),
            slots=tuple(
                tuple(str(c) for c in slot) for slot in data.get("slots", [])
            ),
            joiner=str(data.get("joiner", " ")),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: malformed prompt spec: {exc}") from exc


def load_mock_table(path: str | Path):
    return _load_mock_table(str(path))


def save_train_log(path: str | Path, log: TrainingLog) -> None:
    _write_json(
        path,
        {
            "format": TRAIN_LOG_FORMAT,
            "pair_count": log.pair_count,
            "epoch_mean_loss": log.epoch_mean_loss,
            "epoch_skipped_pairs": log.epoch_skipped_pairs,
        },
    )


def save_report(path: str | Path, report: SimilarityReport) -> None:
    _write_json(
        path,
        {
            "format": REPORT_FORMAT,
            "clusters": list(report.clusters),
            "pre": {
                "mean": report.pre_mean.tolist(),
                "std": report.pre_std.tolist(),
            },
            "post": {
                "mean": report.post_mean.tolist(),
                "std": report.post_std.tolist(),
            },
            "std_kind": "population",
        },
    )


def save_report_text(path: str | Path, report: SimilarityReport) -> None:
    Path(path).write_text(render_report_text(report), encoding="utf-8")


def _evaluation_to_obj(index: int, ev: Evaluation, best_so_far: float) -> dict:
    return {
        "index": index,
        "assignment": {
            "base_index": ev.assignment.base_index,
            "choices": list(ev.assignment.choices),
        },
        "prompt": ev.prompt,
        "outputs": list(ev.outputs),
        "point": [ev.point.x, ev.point.y],
        "loss": ev.loss,
        "best_so_far": best_so_far,
    }


def save_trace(
    path: str | Path,
    trace: SearchTrace,
    mode: str,
    target: PerspectivePoint,
) -> None:
    """JSON Lines: one evaluation per line, then one summary object."""
    lines = []
    best_so_far = float("inf")
    for i, ev in enumerate(trace.evaluations):
        best_so_far = min(best_so_far, ev.loss)
        lines.append(
            json.dumps(_evaluation_to_obj(i, ev, best_so_far), ensure_ascii=False)
        )
    best = trace.best_evaluation
    lines.append(
        json.dumps(
            {
                "summary": True,
                "mode": mode,
                "target": [target.x, target.y],
                "evaluations": len(trace.evaluations),
                "best_index": trace.best,
                "best_prompt": best.prompt,
                "best_loss": best.loss,
            },
            ensure_ascii=False,
        )
    )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_trace(path: str | Path) -> tuple[SearchTrace, dict]:
    """Read back a trace JSONL file; returns the trace and the summary."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    trace = SearchTrace()
    summary: dict = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(
                f"{path}:{lineno}: invalid JSON at column {exc.colno}: {exc.msg}"
            ) from exc
        if obj.get("summary"):
            summary = obj
            continue
        try:
            trace.record(
                Evaluation(
                    assignment=PromptAssignment(
                        base_index=int(obj["assignment"]["base_index"]),
                        choices=tuple(obj["assignment"]["choices"]),
                    ),
                    prompt=str(obj["prompt"]),
                    outputs=tuple(obj["outputs"]),
                    point=PerspectivePoint(
                        x=float(obj["point"][0]), y=float(obj["point"][1])
                    ),
                    loss=float(obj["loss"]),
                )
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise FormatError(
                f"{path}:{lineno}: malformed trace line: {exc}"
            ) from exc
    if not summary and trace.evaluations:
        raise FormatError(f"{path}: trace file has no summary line")
    return trace, summary
