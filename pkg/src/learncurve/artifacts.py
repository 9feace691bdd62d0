"""File formats and run artifacts.

Measurements travel as CSV (trainer-agnostic, appendable), computed
results as JSON with canonical serialization (sorted keys, shortest
round-trip floats) so identical inputs reproduce identical bytes.  Every
JSON artifact embeds a content digest of its input file, which makes
stale-artifact misuse detectable, plus a full parameter echo.  Timestamps
are quarantined in the single ``created_at`` field and excluded from
reproducibility comparisons.
"""

from __future__ import annotations

import datetime
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import DataError
from .fitting import PowerLawFit, RegionSegmentation
from .manifest import ImageRecord, SubsetManifest
from .model import Measurement, MeasurementSet
from .planning import NoiseImpactReport

MEASUREMENT_HEADER = "metric,n,replicate,value"
IMAGES_HEADER = "image_id,class,capture_group"


def tool_version() -> str:
    from . import __version__

    return __version__


def utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_path(path: str | Path) -> str:
    return sha256_bytes(Path(path).read_bytes())


def format_float(x: float) -> str:
    """Shortest decimal that round-trips to the same float."""
    return repr(float(x))


def dumps_canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(obj: Any, path: str | Path) -> None:
    Path(path).write_text(dumps_canonical(obj), encoding="utf-8")


def load_json(path: str | Path) -> Any:
    p = Path(path)
    if not p.exists():
        raise DataError(f"no such file: {p}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{p}: not valid JSON ({exc})") from exc


# ---------------------------------------------------------------------------
# Measurement CSV
# ---------------------------------------------------------------------------


def read_measurements(path: str | Path) -> MeasurementSet:
    """Parse a measurement CSV with line-precise diagnostics.

    The header must be exactly ``metric,n,replicate,value``; rows with
    extra columns, malformed numbers, or duplicate (metric, n, replicate)
    keys are rejected with their line number.  Blank lines are ignored.
    """
    p = Path(path)
    if not p.exists():
        raise DataError(f"no such file: {p}")
    points: list[Measurement] = []
    seen: set[tuple[str, int, int]] = set()
    with open(p, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\r\n")
        if header != MEASUREMENT_HEADER:
            raise DataError(f"{p}:1: header must be exactly {MEASUREMENT_HEADER!r}, got {header!r}")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 4:
                raise DataError(f"{p}:{lineno}: expected 4 columns, got {len(fields)}")
            metric, n_s, r_s, v_s = fields
            if not metric:
                raise DataError(f"{p}:{lineno}: empty metric name")
            try:
                n = int(n_s)
                r = int(r_s)
            except ValueError:
                raise DataError(f"{p}:{lineno}: n and replicate must be integers") from None
            try:
                v = float(v_s)
            except ValueError:
                raise DataError(f"{p}:{lineno}: value {v_s!r} is not a number") from None
            if n < 1:
                raise DataError(f"{p}:{lineno}: n must be >= 1, got {n}")
            if r < 0:
                raise DataError(f"{p}:{lineno}: replicate must be >= 0, got {r}")
            if v < 0:
                raise DataError(f"{p}:{lineno}: value must be >= 0, got {v}")
            key = (metric, n, r)
            if key in seen:
                raise DataError(f"{p}:{lineno}: duplicate observation for {key}")
            seen.add(key)
            points.append(Measurement(metric, n, r, v))
    return MeasurementSet(tuple(points))


def measurements_to_csv(ms: MeasurementSet) -> str:
    lines = [MEASUREMENT_HEADER]
    for pt in sorted(ms.points):
        lines.append(f"{pt.metric},{pt.n},{pt.replicate},{format_float(pt.value)}")
    return "\n".join(lines) + "\n"


def write_measurements(ms: MeasurementSet, path: str | Path) -> None:
    Path(path).write_text(measurements_to_csv(ms), encoding="utf-8")


def read_images(path: str | Path) -> list[tuple[str, str, str | None]]:
    """Parse an image-pool CSV: header ``image_id,class,capture_group``."""
    p = Path(path)
    if not p.exists():
        raise DataError(f"no such file: {p}")
    rows: list[tuple[str, str, str | None]] = []
    with open(p, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\r\n")
        if header != IMAGES_HEADER:
            raise DataError(f"{p}:1: header must be exactly {IMAGES_HEADER!r}, got {header!r}")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 3:
                raise DataError(f"{p}:{lineno}: expected 3 columns, got {len(fields)}")
            image_id, class_name, group = fields
            if not image_id or not class_name:
                raise DataError(f"{p}:{lineno}: image_id and class must be non-empty")
            rows.append((image_id, class_name, group or None))
    return rows


# ---------------------------------------------------------------------------
# Fit artifacts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitArtifact:
    """A fit plus everything needed to audit and reproduce it."""

    metric: str
    alpha: float
    c: float
    method: str
    n_range: tuple[int, int]
    rss: float
    r_squared: float | None
    ci_alpha: tuple[float, float] | None
    iterations: int | None
    input_digest: str
    tool_version: str
    created_at: str
    params: dict

    @classmethod
    def from_fit(
        cls,
        fit: PowerLawFit,
        metric: str,
        input_digest: str,
        params: dict,
        created_at: str | None = None,
    ) -> "FitArtifact":
        return cls(
            metric=metric,
            alpha=fit.alpha,
            c=fit.c,
            method=fit.method,
            n_range=fit.n_range,
            rss=fit.rss,
            r_squared=fit.r_squared,
            ci_alpha=fit.ci_alpha,
            iterations=fit.iterations,
            input_digest=input_digest,
            tool_version=tool_version(),
            created_at=created_at if created_at is not None else utc_now(),
            params=dict(params),
        )

    def fit(self) -> PowerLawFit:
        return PowerLawFit(
            alpha=self.alpha,
            c=self.c,
            method=self.method,
            n_range=tuple(self.n_range),
            rss=self.rss,
            r_squared=self.r_squared,
            ci_alpha=tuple(self.ci_alpha) if self.ci_alpha is not None else None,
            iterations=self.iterations,
        )

    def to_dict(self) -> dict:
        return {
            "kind": "fit",
            "metric": self.metric,
            "alpha": self.alpha,
            "c": self.c,
            "method": self.method,
            "n_range": list(self.n_range),
            "rss": self.rss,
            "r_squared": self.r_squared,
            "ci_alpha": list(self.ci_alpha) if self.ci_alpha is not None else None,
            "iterations": self.iterations,
            "input_digest": self.input_digest,
            "tool_version": self.tool_version,
            "created_at": self.created_at,
            "params": self.params,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitArtifact":
        if d.get("kind") != "fit":
            raise DataError(
                f"expected a fit artifact (kind='fit'), got kind={d.get('kind')!r}; "
                "a --method both file holds two fits, pick one"
            )
        return cls(
            metric=d["metric"],
            alpha=float(d["alpha"]),
            c=float(d["c"]),
            method=d["method"],
            n_range=(int(d["n_range"][0]), int(d["n_range"][1])),
            rss=float(d["rss"]),
            r_squared=None if d["r_squared"] is None else float(d["r_squared"]),
            ci_alpha=None if d["ci_alpha"] is None else (float(d["ci_alpha"][0]), float(d["ci_alpha"][1])),
            iterations=None if d.get("iterations") is None else int(d["iterations"]),
            input_digest=d["input_digest"],
            tool_version=d["tool_version"],
            created_at=d["created_at"],
            params=dict(d.get("params", {})),
        )


def load_fit_artifact(path: str | Path) -> FitArtifact:
    d = load_json(path)
    if not isinstance(d, dict):
        raise DataError(f"{path}: expected a JSON object")
    return FitArtifact.from_dict(d)


# ---------------------------------------------------------------------------
# Region / noise-impact artifacts
# ---------------------------------------------------------------------------


def region_to_dict(
    region: RegionSegmentation,
    metric: str,
    input_digest: str,
    params: dict,
    created_at: str | None = None,
) -> dict:
    return {
        "kind": "region",
        "metric": metric,
        "n_start_power_law": region.n_start_power_law,
        "n_end_power_law": region.n_end_power_law,
        "diagnostics": [
            {"candidate_n": n, "r_squared": r2}
            for n, r2 in sorted(region.diagnostics.items())
        ],
        "input_digest": input_digest,
        "tool_version": tool_version(),
        "created_at": created_at if created_at is not None else utc_now(),
        "params": dict(params),
    }


def region_from_dict(d: dict) -> RegionSegmentation:
    if d.get("kind") != "region":
        raise DataError(f"expected a region artifact (kind='region'), got kind={d.get('kind')!r}")
    return RegionSegmentation(
        n_start_power_law=int(d["n_start_power_law"]),
        n_end_power_law=None if d["n_end_power_law"] is None else int(d["n_end_power_law"]),
        diagnostics={int(e["candidate_n"]): e["r_squared"] for e in d.get("diagnostics", [])},
    )


def noise_impact_to_dict(
    report: NoiseImpactReport,
    clean_digest: str,
    noisy_digest: str,
    params: dict,
    created_at: str | None = None,
) -> dict:
    return {
        "kind": "noise_impact",
        "delta_alpha": report.delta_alpha,
        "multipliers": [
            {"target_loss": t, "multiplier": m} for t, m in report.multipliers
        ],
        "clean_digest": clean_digest,
        "noisy_digest": noisy_digest,
        "tool_version": tool_version(),
        "created_at": created_at if created_at is not None else utc_now(),
        "params": dict(params),
    }


# ---------------------------------------------------------------------------
# Manifest JSON
# ---------------------------------------------------------------------------


def manifest_to_dict(m: SubsetManifest, input_digest: str | None = None) -> dict:
    order = {c: i for i, c in enumerate(m.classes)}
    records = sorted(m.records, key=lambda r: (order[r.true_label], r.class_rank))
    return {
        "kind": "manifest",
        "input_digest": input_digest,
        "classes": list(m.classes),
        "per_class_pool": m.per_class_pool,
        "sizes": list(m.sizes),
        "seed": m.seed,
        "diagnostics": dict(m.diagnostics),
        "records": [
            {
                "image_id": r.image_id,
                "true_label": r.true_label,
                "assigned_label": r.assigned_label,
                "noise_flag": r.noise_flag,
                "class_rank": r.class_rank,
            }
            for r in records
        ],
    }


def manifest_from_dict(d: dict) -> SubsetManifest:
    if d.get("kind") != "manifest":
        raise DataError(f"expected a manifest artifact (kind='manifest'), got kind={d.get('kind')!r}")
    return SubsetManifest(
        classes=tuple(d["classes"]),
        per_class_pool=int(d["per_class_pool"]),
        sizes=tuple(int(s) for s in d["sizes"]),
        seed=int(d["seed"]),
        records=tuple(
            ImageRecord(
                image_id=r["image_id"],
                true_label=r["true_label"],
                assigned_label=r["assigned_label"],
                noise_flag=bool(r["noise_flag"]),
                class_rank=int(r["class_rank"]),
            )
            for r in d["records"]
        ),
        diagnostics={str(k): int(v) for k, v in d.get("diagnostics", {}).items()},
    )


def write_manifest(m: SubsetManifest, path: str | Path, input_digest: str | None = None) -> None:
    write_json(manifest_to_dict(m, input_digest), path)


def read_manifest(path: str | Path) -> SubsetManifest:
    d = load_json(path)
    if not isinstance(d, dict):
        raise DataError(f"{path}: expected a JSON object")
    return manifest_from_dict(d)
