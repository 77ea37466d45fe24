"""Batch repair over a corpus of assignments.

Layout: one directory per assignment holding ``manifest.json``::

    {
      "assignment": "prime",
      "topic": "simple loops",
      "reference": "reference.mc",
      "domain": {"slots": [[-50, 200]]},
      "students": [
        {"id": "s1", "path": "student.mc", "tags": ["off-by-one"], "structural_match": true}
      ]
    }

``structural_match`` records whether the pair was built to align; it feeds the
repair rate over matching cases and is otherwise informational.
"""
from __future__ import annotations

import json
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .repair.edge import SM
from .repair.program import Config, RepairReport, repair_program
from .repair.soundness import Domain, Evidence, soundness_check

MANIFEST = "manifest.json"
ERROR = "Error"
REJECTED = "RejectedReference"


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusCase:
    assignment: str
    case_id: str
    reference: Path
    student: Path
    domain: Domain
    topic: str
    tags: tuple = ()
    structural_match: Optional[bool] = None

    @property
    def key(self) -> str:
        return f"{self.assignment}/{self.case_id}"


@dataclass
class CaseResult:
    case: CorpusCase
    status: str
    reason: Optional[str]
    message: str = ""
    report: Optional[RepairReport] = None
    evidence: Optional[Evidence] = None
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status in ("repaired", "verified")

    @property
    def sound(self) -> Optional[bool]:
        return None if self.evidence is None else self.evidence.passed

    def to_json(self, timings: bool = False) -> dict:
        out = {
            "case": self.case.key, "topic": self.case.topic, "tags": list(self.case.tags),
            "structural_match": self.case.structural_match,
            "status": self.status, "reason": self.reason, "message": self.message,
            "rps": self.report.rps if self.report else None,
            "changed_expressions": self.report.changed_expressions if self.report else None,
            "soundness": self.evidence.to_json() if self.evidence else None,
            "diff": self.report.diff if self.report else "",
        }
        if timings:
            out["elapsed"] = round(self.elapsed, 3)
        return out


def load_manifest(path: Path) -> list:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"{path}: {exc}") from exc
    base = path.parent
    try:
        assignment = data.get("assignment", base.name)
        reference = base / data["reference"]
        domain = Domain.parse(data.get("domain", {}))
        topic = data.get("topic", "")
        cases = []
        for i, st in enumerate(data.get("students", [])):
            cases.append(CorpusCase(
                assignment, st.get("id", f"s{i + 1}"), reference, base / st["path"], domain, topic,
                tuple(st.get("tags", ())), st.get("structural_match")))
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"{path}: malformed manifest ({exc})") from exc
    ids = [c.case_id for c in cases]
    if len(set(ids)) != len(ids):
        raise ManifestError(f"{path}: duplicate student ids")
    return cases


def discover(root: Path) -> list:
    """Cases of every assignment under ``root`` (or of one manifest file)."""
    root = Path(root)
    if root.is_file():
        return load_manifest(root)
    cases = []
    for manifest in sorted(root.glob(f"*/{MANIFEST}")):
        cases += load_manifest(manifest)
    if (root / MANIFEST).is_file():
        cases += load_manifest(root / MANIFEST)
    return sorted(cases, key=lambda c: c.key)


def admit_reference(path: Path, config: Config) -> Optional[str]:
    """None when the reference verifies against itself, else why not."""
    try:
        src = path.read_text()
    except OSError as exc:
        return str(exc)
    report = repair_program(src, src, config, verify_only=True)
    if report.status != "verified":
        return f"reference does not verify against itself: {report.reason} {report.message}".strip()
    return None


def run_case(case: CorpusCase, config: Config) -> CaseResult:
    start = time.monotonic()
    try:
        report = repair_program(case.reference.read_text(), case.student.read_text(), config)
    except Exception as exc:  # a crash in one case must not end the batch
        return CaseResult(case, "failed", ERROR, f"{type(exc).__name__}: {exc}",
                          elapsed=time.monotonic() - start)
    result = CaseResult(case, report.status, report.reason, report.message, report,
                        elapsed=report.elapsed)
    if report.ok:
        result.evidence = soundness_check(case.reference.read_text(), report.repaired_source, case.domain)
    return result


@dataclass
class CorpusReport:
    results: list = field(default_factory=list)
    rejected: dict = field(default_factory=dict)     # reference path -> reason

    @property
    def total(self) -> int:
        return len(self.results)

    def _rate(self, pred, among=None) -> Optional[float]:
        pool = [r for r in self.results if among is None or among(r)]
        if not pool:
            return None
        return sum(1 for r in pool if pred(r)) / len(pool)

    @property
    def sm_rate(self) -> Optional[float]:
        return self._rate(lambda r: r.reason != SM)

    @property
    def repair_rate(self) -> Optional[float]:
        return self._rate(lambda r: r.ok)

    @property
    def matched_repair_rate(self) -> Optional[float]:
        """Repair rate over cases built to align structurally."""
        return self._rate(lambda r: r.ok, lambda r: r.case.structural_match is True)

    @property
    def mean_time(self) -> Optional[float]:
        times = [r.elapsed for r in self.results]
        return statistics.fmean(times) if times else None

    def reasons(self) -> dict:
        counts = {}
        for r in self.results:
            if not r.ok:
                counts[r.reason] = counts.get(r.reason, 0) + 1
        return {k: counts[k] / self.total for k in sorted(counts, key=str)}

    def rps_summary(self) -> Optional[dict]:
        values = sorted(r.report.rps for r in self.results if r.status == "repaired")
        if not values:
            return None
        return {"min": values[0], "median": statistics.median(values), "max": values[-1], "n": len(values)}

    def unsound(self) -> list:
        return [r for r in self.results if r.ok and not r.sound]

    def by_topic(self) -> dict:
        topics = {}
        for r in self.results:
            topics.setdefault(r.case.topic, []).append(r)
        return {t: {"cases": len(rs), "repaired": sum(1 for r in rs if r.ok),
                    "structural_match": sum(1 for r in rs if r.reason != SM)}
                for t, rs in sorted(topics.items())}

    def to_json(self, timings: bool = False) -> dict:
        out = {
            "schema": "cfarepair-corpus/1",
            "cases": self.total,
            "sm_rate": self.sm_rate,
            "repair_rate": self.repair_rate,
            "matched_repair_rate": self.matched_repair_rate,
            "failure_reasons": self.reasons(),
            "rps": self.rps_summary(),
            "unsound": [r.case.key for r in self.unsound()],
            "topics": self.by_topic(),
            "rejected_references": dict(sorted(self.rejected.items())),
            "results": [r.to_json(timings) for r in self.results],
        }
        if timings:
            out["mean_time"] = self.mean_time
        return out

    def table(self) -> str:
        """Human-readable summary."""
        def pct(x):
            return "-" if x is None else f"{100 * x:.1f}%"

        lines = [f"{'case':32} {'topic':28} {'status':9} {'reason':22} {'rps':>6}"]
        for r in self.results:
            rps = f"{r.report.rps:.3f}" if r.report and r.report.rps is not None else "-"
            lines.append(f"{r.case.key:32} {r.case.topic:28} {r.status:9} {str(r.reason or ''):22} {rps:>6}")
        lines.append("")
        lines.append(f"cases {self.total}  SM {pct(self.sm_rate)}  repair {pct(self.repair_rate)}"
                     f"  repair|match {pct(self.matched_repair_rate)}")
        if self.mean_time is not None:
            lines.append(f"mean time {self.mean_time:.2f}s")
        for reason, share in self.reasons().items():
            lines.append(f"  {reason:22} {pct(share)}")
        rps = self.rps_summary()
        if rps:
            lines.append(f"RPS min {rps['min']:.3f}  median {rps['median']:.3f}  max {rps['max']:.3f}")
        lines.append(f"unsound claims: {len(self.unsound())}")
        return "\n".join(lines)


def _map(fn, items: list, config: Config, jobs: int) -> list:
    # the oracle is CPU-bound, so parallel work goes to processes
    if jobs <= 1 or len(items) <= 1:
        return [fn(x, config) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, [config] * len(items)))


def run_corpus(root, config: Optional[Config] = None, jobs: int = 1) -> CorpusReport:
    """Repair every admitted case; failures are recorded per case."""
    config = config or Config()
    cases = discover(Path(root))
    report = CorpusReport()
    refs = sorted({c.reference for c in cases})
    verdicts = dict(zip(refs, _map(admit_reference, refs, config, jobs)))
    report.rejected = {str(p): why for p, why in verdicts.items() if why is not None}
    admitted = [c for c in cases if verdicts[c.reference] is None]
    results = _map(run_case, admitted, config, jobs)
    for c in cases:
        if verdicts[c.reference] is not None:
            results.append(CaseResult(c, "failed", REJECTED, verdicts[c.reference]))
    report.results = sorted(results, key=lambda r: r.case.key)
    return report
