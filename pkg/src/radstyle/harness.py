"""Experiment harness: datasets, scoring runs, result tables, style sets.

A dataset is a JSONL file of study records. Sidecar JSON files carry the
per-study resources that normally come from frozen models: report graphs,
pathology indicator vectors, and token embeddings. Generated reports are
scored by exact-text lookup into those same resources, so a mock client
that reproduces a reference report scores perfectly and anything else
simply drops out of the affected metrics.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .client import (ClientConfig, EchoReportTransport, FixedReplyTransport,
                     HttpTransport, Transport, complete_batch)
from .config import ClientSettings, HarnessConfig, MetricsConfig
from .errors import ConfigError, InputError, IoError, SchemaError
from .graph import RadGraph, radgraph_from_document
from .metrics import (MetricReport, PathologyVector, ZTestResult,
                      as_pathology_vector, bert_score, bleu2,
                      chexbert_similarity, load_embeddings,
                      load_pathology_vectors, mean_ci, radcliq, radgraph_f1,
                      tokenize, z_test_proportion)
from .prompting import (PromptChain, StylePair, build_prompt,
                        derive_selection_seed, select_examples)
from .serialize import serialize


@dataclass(frozen=True)
class StudyRecord:
    """One study: the reference report plus optional precomputed fields."""

    study_id: str
    report: str
    split: str = "train"
    serialization: str | None = None
    radiologist_id: str | None = None
    pathology_vector: PathologyVector | None = None


_RECORD_KEYS = {"study_id", "report", "split", "serialization",
                "radiologist_id", "pathology_vector"}


def load_dataset(path) -> list[StudyRecord]:
    """Read study records from JSONL; blank lines are ignored.

    Errors carry 1-based line numbers. Study ids must be unique.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    records: list[StudyRecord] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"line {lineno}: malformed JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise SchemaError(f"line {lineno}: expected an object")
        unknown = sorted(set(doc) - _RECORD_KEYS)
        if unknown:
            raise SchemaError(f"line {lineno}: unknown keys {unknown}")
        for key in ("study_id", "report"):
            if not isinstance(doc.get(key), str) or not doc[key]:
                raise SchemaError(
                    f"line {lineno}: {key} must be a non-empty string")
        sid = doc["study_id"]
        if sid in seen:
            raise SchemaError(
                f"line {lineno}: duplicate study id {sid!r} "
                f"(first seen on line {seen[sid]})")
        seen[sid] = lineno
        vector = None
        if doc.get("pathology_vector") is not None:
            try:
                vector = as_pathology_vector(doc["pathology_vector"])
            except InputError as exc:
                raise SchemaError(f"line {lineno}: {exc}") from exc
        for key in ("split", "serialization", "radiologist_id"):
            value = doc.get(key)
            if value is not None and not isinstance(value, str):
                raise SchemaError(f"line {lineno}: {key} must be a string")
        records.append(StudyRecord(
            study_id=sid,
            report=doc["report"],
            split=doc.get("split", "train"),
            serialization=doc.get("serialization"),
            radiologist_id=doc.get("radiologist_id"),
            pathology_vector=vector,
        ))
    return records


def split_records(records: Sequence[StudyRecord],
                  split: str) -> list[StudyRecord]:
    return [r for r in records if r.split == split]


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed JSON: {exc}") from exc


def load_graph_documents(path) -> dict[str, RadGraph]:
    """Read a JSON sidecar mapping study id to a report-graph document."""
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected a JSON object keyed by study id")
    out: dict[str, RadGraph] = {}
    for study_id, payload in doc.items():
        try:
            out[study_id] = radgraph_from_document(payload)
        except (InputError, SchemaError) as exc:
            raise SchemaError(f"study {study_id}: {exc}") from exc
    return out


@dataclass
class Resources:
    """Per-study reference resources plus exact-text candidate lookups.

    The text-keyed maps resolve a generated report to the resources of
    the study whose reference text it reproduces verbatim; misses mean
    the affected metrics are unavailable for that item.
    """

    graphs: dict[str, RadGraph] = field(default_factory=dict)
    vectors: dict[str, PathologyVector] = field(default_factory=dict)
    embeddings: dict[str, np.ndarray] = field(default_factory=dict)
    graph_by_text: dict[str, RadGraph] = field(default_factory=dict)
    vector_by_text: dict[str, PathologyVector] = field(default_factory=dict)
    embedding_by_text: dict[str, np.ndarray] = field(default_factory=dict)


def build_resources(records: Sequence[StudyRecord],
                    cfg: HarnessConfig) -> Resources:
    res = Resources()
    if cfg.graphs:
        res.graphs = load_graph_documents(cfg.graphs)
    if cfg.vectors:
        res.vectors = load_pathology_vectors(cfg.vectors)
    if cfg.embeddings:
        res.embeddings = load_embeddings(cfg.embeddings)
    for record in records:
        if record.pathology_vector is not None:
            res.vectors.setdefault(record.study_id, record.pathology_vector)
    for record in records:
        sid = record.study_id
        if sid in res.graphs:
            res.graph_by_text.setdefault(record.report, res.graphs[sid])
        if sid in res.vectors:
            res.vector_by_text.setdefault(record.report, res.vectors[sid])
        if sid in res.embeddings:
            res.embedding_by_text.setdefault(record.report,
                                             res.embeddings[sid])
    return res


_BASE_METRICS = ("bleu2", "bert_score", "chexbert", "radgraph_f1")


class Scorer:
    """Computes the configured metrics for one (generated, record) pair.

    A metric whose inputs are unavailable scores None and is excluded
    from that metric's aggregate, shrinking its effective n.
    """

    def __init__(self, cfg: MetricsConfig, resources: Resources) -> None:
        for name in cfg.names:
            if name != "radcliq" and name not in _BASE_METRICS:
                raise ConfigError(f"unknown metric {name!r}")
        for name in cfg.radcliq_weights:
            if name not in _BASE_METRICS:
                raise ConfigError(
                    f"composite weight references unknown metric {name!r}")
        self.cfg = cfg
        self.resources = resources

    def _single(self, name: str, generated: str,
                record: StudyRecord) -> float | None:
        res = self.resources
        if name == "bleu2":
            return bleu2(tokenize(generated), tokenize(record.report))
        if name == "bert_score":
            ref = res.embeddings.get(record.study_id)
            cand = res.embedding_by_text.get(generated)
            if ref is None or cand is None:
                return None
            return bert_score(cand, ref)
        if name == "chexbert":
            ref = record.pathology_vector or res.vectors.get(record.study_id)
            cand = res.vector_by_text.get(generated)
            if ref is None or cand is None:
                return None
            return chexbert_similarity(cand, ref)
        if name == "radgraph_f1":
            ref = res.graphs.get(record.study_id)
            cand = res.graph_by_text.get(generated)
            if ref is None or cand is None:
                return None
            return radgraph_f1(cand, ref).combined
        raise ConfigError(f"unknown metric {name!r}")

    def score(self, generated: str,
              record: StudyRecord) -> dict[str, float | None]:
        needed = {n for n in self.cfg.names if n != "radcliq"}
        if "radcliq" in self.cfg.names:
            needed.update(self.cfg.radcliq_weights)
        base = {name: self._single(name, generated, record)
                for name in sorted(needed)}
        out: dict[str, float | None] = {}
        for name in self.cfg.names:
            if name == "radcliq":
                comps = {c: base[c] for c in self.cfg.radcliq_weights}
                if any(v is None for v in comps.values()):
                    out[name] = None
                else:
                    out[name] = radcliq(comps, self.cfg.radcliq_weights,
                                        self.cfg.radcliq_bias)
            else:
                out[name] = base[name]
        return out


@dataclass(frozen=True)
class RunItem:
    """One scored generation. ``error`` is set when the item failed
    before scoring; its scores dict is then empty."""

    study_id: str
    method: str
    shots: int | None
    source: str
    generated: str | None
    scores: dict[str, float | None]
    error: str | None = None


@dataclass(frozen=True)
class ResultRow:
    method: str
    shots: int | None
    n_items: int
    excluded: int
    metrics: dict[str, MetricReport | None]


@dataclass(frozen=True)
class ResultTable:
    metric_names: tuple[str, ...]
    rows: tuple[ResultRow, ...]


@dataclass(frozen=True)
class RunOutcome:
    table: ResultTable
    items: list[RunItem]


def aggregate_row(method: str, shots: int | None, items: Sequence[RunItem],
                  metric_names: Sequence[str]) -> ResultRow:
    reports: dict[str, MetricReport | None] = {}
    for name in metric_names:
        values = [item.scores[name] for item in items
                  if item.scores.get(name) is not None]
        reports[name] = mean_ci(values, name) if values else None
    excluded = sum(1 for item in items if item.error is not None)
    return ResultRow(method, shots, len(items), excluded, reports)


def render_table(table: ResultTable) -> str:
    """Fixed-width text table; cells are mean and CI half-width to three
    decimals. Full precision lives in the CSV rendering."""
    headers = ["method", "shots", "n", "excl", *table.metric_names]
    body: list[list[str]] = []
    for row in table.rows:
        cells = [row.method,
                 "-" if row.shots is None else str(row.shots),
                 str(row.n_items), str(row.excluded)]
        for name in table.metric_names:
            report = row.metrics.get(name)
            if report is None:
                cells.append("-")
            else:
                # + 0.0 turns a rounded -0.0 into 0.0 so near-zero means
                # do not render with a misleading sign
                mean = round(report.mean, 3) + 0.0
                half = round(report.ci_halfwidth, 3) + 0.0
                cells.append(f"{mean:.3f} ± {half:.3f}")
        body.append(cells)
    widths = [max(len(headers[i]), *(len(r[i]) for r in body))
              if body else len(headers[i]) for i in range(len(headers))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    for cells in body:
        lines.append("  ".join(c.ljust(w)
                               for c, w in zip(cells, widths)).rstrip())
    return "\n".join(lines) + "\n"


def render_table_csv(table: ResultTable) -> str:
    """CSV rendering with per-metric mean/ci/n columns at full precision,
    so the table survives a parse round-trip bit for bit."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["method", "shots", "n", "excluded"]
    for name in table.metric_names:
        header.extend([f"{name}_mean", f"{name}_ci", f"{name}_n"])
    writer.writerow(header)
    for row in table.rows:
        cells = [row.method,
                 "" if row.shots is None else str(row.shots),
                 str(row.n_items), str(row.excluded)]
        for name in table.metric_names:
            report = row.metrics.get(name)
            if report is None:
                cells.extend(["", "", ""])
            else:
                cells.extend([repr(report.mean), repr(report.ci_halfwidth),
                              str(report.n)])
        writer.writerow(cells)
    return buf.getvalue()


def parse_table_csv(text: str) -> ResultTable:
    rows_in = list(csv.reader(io.StringIO(text)))
    if not rows_in:
        raise SchemaError("empty table")
    header = rows_in[0]
    if header[:4] != ["method", "shots", "n", "excluded"]:
        raise SchemaError("unrecognized table header")
    metric_cols = header[4:]
    if len(metric_cols) % 3 != 0:
        raise SchemaError("metric columns must come in mean/ci/n triples")
    names = tuple(metric_cols[i][: -len("_mean")]
                  for i in range(0, len(metric_cols), 3))
    rows: list[ResultRow] = []
    for cells in rows_in[1:]:
        metrics: dict[str, MetricReport | None] = {}
        for j, name in enumerate(names):
            mean_s, ci_s, n_s = cells[4 + 3 * j: 7 + 3 * j]
            if mean_s == "":
                metrics[name] = None
            else:
                metrics[name] = MetricReport(name, float(mean_s),
                                             float(ci_s), int(n_s))
        rows.append(ResultRow(cells[0],
                              None if cells[1] == "" else int(cells[1]),
                              int(cells[2]), int(cells[3]), metrics))
    return ResultTable(names, tuple(rows))


class ChatClient:
    """Thin batch wrapper binding a config to a transport."""

    def __init__(self, cfg: ClientConfig, transport: Transport,
                 parallelism: int = 4) -> None:
        self.cfg = cfg
        self.transport = transport
        self.parallelism = parallelism

    def batch(self, chains: Sequence[PromptChain]):
        return complete_batch(chains, self.cfg, parallelism=self.parallelism,
                              transport=self.transport)


def build_client(settings: ClientSettings,
                 records: Sequence[StudyRecord]) -> ChatClient:
    cfg = ClientConfig(
        endpoint=settings.endpoint, model=settings.model,
        temperature=settings.temperature, max_tokens=settings.max_tokens,
        timeout=settings.timeout, max_retries=settings.max_retries,
        api_key_env=settings.api_key_env, auth_header=settings.auth_header)
    if settings.mode == "http":
        transport: Transport = HttpTransport()
    elif settings.mode == "identity-mock":
        mapping = {r.serialization: r.report
                   for r in records if r.serialization}
        transport = EchoReportTransport(mapping)
    else:
        transport = FixedReplyTransport(settings.fixed_text)
    return ChatClient(cfg, transport, settings.parallelism)


def _check_disjoint(eval_records: Sequence[StudyRecord],
                    pool_records: Sequence[StudyRecord]) -> None:
    overlap = ({r.study_id for r in eval_records}
               & {r.study_id for r in pool_records})
    if overlap:
        raise InputError(
            f"studies present in both pool and eval splits: {sorted(overlap)}")


def _run_generation(pairs: Sequence[tuple[StudyRecord, str]],
                    pool_pairs: Sequence[StylePair], k: int,
                    cfg: HarnessConfig, client: ChatClient, scorer: Scorer,
                    method: str, source: str) -> list[RunItem]:
    chains: list[PromptChain] = []
    chain_records: list[StudyRecord] = []
    failed: dict[str, RunItem] = {}
    for record, serialization in pairs:
        try:
            seed = derive_selection_seed(cfg.experiment.seed, k,
                                         record.study_id)
            examples = select_examples(pool_pairs, k, seed)
            chains.append(build_prompt(examples, serialization))
            chain_records.append(record)
        except InputError as exc:
            failed[record.study_id] = RunItem(
                record.study_id, method, k, source, None, {}, str(exc))
    results = client.batch(chains)
    scored: dict[str, RunItem] = {}
    for record, result in zip(chain_records, results):
        if isinstance(result, Exception):
            scored[record.study_id] = RunItem(
                record.study_id, method, k, source, None, {}, str(result))
        else:
            scored[record.study_id] = RunItem(
                record.study_id, method, k, source, result.text,
                scorer.score(result.text, record))
    items = []
    for record, _ in pairs:
        items.append(scored.get(record.study_id,
                                failed.get(record.study_id)))
    return items


def run_serialization_to_report(eval_records: Sequence[StudyRecord],
                                pool_records: Sequence[StudyRecord],
                                cfg: HarnessConfig, client: ChatClient,
                                scorer: Scorer) -> RunOutcome:
    """Generate reports from the dataset's own serializations and score
    them, one table row per shot count."""
    _check_disjoint(eval_records, pool_records)
    for group, label in ((pool_records, "pool"), (eval_records, "eval")):
        missing = sorted(r.study_id for r in group if not r.serialization)
        if missing:
            raise InputError(
                f"{label} records missing serializations: {missing}")
    pool_pairs = [StylePair(r.serialization, r.report) for r in pool_records]
    pairs = [(r, r.serialization) for r in eval_records]
    rows: list[ResultRow] = []
    items: list[RunItem] = []
    for k in cfg.experiment.shots:
        run_items = _run_generation(pairs, pool_pairs, k, cfg, client,
                                    scorer, "ser2rep", "ground_truth")
        rows.append(aggregate_row("ser2rep", k, run_items, cfg.metrics.names))
        items.extend(run_items)
    return RunOutcome(ResultTable(tuple(cfg.metrics.names), tuple(rows)),
                      items)


def run_end_to_end(eval_records: Sequence[StudyRecord],
                   pool_records: Sequence[StudyRecord], cfg: HarnessConfig,
                   client: ChatClient, scorer: Scorer,
                   resources: Resources) -> RunOutcome:
    """Serialize each eval study's graph, then generate and score. Studies
    without a graph become error items instead of aborting the run."""
    _check_disjoint(eval_records, pool_records)
    missing = sorted(r.study_id for r in pool_records if not r.serialization)
    if missing:
        raise InputError(f"pool records missing serializations: {missing}")
    pool_pairs = [StylePair(r.serialization, r.report) for r in pool_records]
    pairs: list[tuple[StudyRecord, str]] = []
    absent: list[StudyRecord] = []
    for record in eval_records:
        graph = resources.graphs.get(record.study_id)
        if graph is None:
            absent.append(record)
        else:
            pairs.append((record,
                          serialize(graph, cfg.serializer).rendered))
    rows: list[ResultRow] = []
    items: list[RunItem] = []
    for k in cfg.experiment.shots:
        run_items = _run_generation(pairs, pool_pairs, k, cfg, client,
                                    scorer, "end2end", "predicted")
        for record in absent:
            run_items.append(RunItem(
                record.study_id, "end2end", k, "predicted", None, {},
                f"no graph for study {record.study_id}"))
        rows.append(aggregate_row("end2end", k, run_items,
                                  cfg.metrics.names))
        items.extend(run_items)
    return RunOutcome(ResultTable(tuple(cfg.metrics.names), tuple(rows)),
                      items)


def score_fixed_outputs(records: Sequence[StudyRecord],
                        outputs: Mapping[str, str], scorer: Scorer,
                        metric_names: Sequence[str],
                        method: str = "baseline",
                        ) -> tuple[ResultRow, list[RunItem]]:
    """Score precomputed outputs (comparison systems) keyed by study id."""
    items: list[RunItem] = []
    for record in records:
        text = outputs.get(record.study_id)
        if text is None:
            items.append(RunItem(record.study_id, method, None, "provided",
                                 None, {}, "no output for study"))
        else:
            items.append(RunItem(record.study_id, method, None, "provided",
                                 text, scorer.score(text, record)))
    return aggregate_row(method, None, items, metric_names), items


def evaluate(cfg: HarnessConfig, mode: str) -> RunOutcome:
    """Load everything named by the config and execute a full run."""
    if mode not in ("ser2rep", "end2end"):
        raise InputError(f"unknown evaluation mode {mode!r}")
    records = load_dataset(cfg.dataset)
    pool_records = split_records(records, cfg.experiment.pool_split)
    eval_records = split_records(records, cfg.experiment.eval_split)
    if not eval_records:
        raise InputError(
            f"no records in eval split {cfg.experiment.eval_split!r}")
    resources = build_resources(records, cfg)
    scorer = Scorer(cfg.metrics, resources)
    client = build_client(cfg.client, records)
    if mode == "ser2rep":
        outcome = run_serialization_to_report(eval_records, pool_records,
                                              cfg, client, scorer)
    else:
        outcome = run_end_to_end(eval_records, pool_records, cfg, client,
                                 scorer, resources)
    if cfg.baseline:
        outputs = _read_json(cfg.baseline)
        if not isinstance(outputs, dict):
            raise SchemaError(
                f"{cfg.baseline}: expected a JSON object keyed by study id")
        row, baseline_items = score_fixed_outputs(
            eval_records, outputs, scorer, cfg.metrics.names)
        outcome = RunOutcome(
            ResultTable(outcome.table.metric_names,
                        outcome.table.rows + (row,)),
            outcome.items + baseline_items)
    return outcome


def item_to_dict(item: RunItem) -> dict:
    return {"study_id": item.study_id, "method": item.method,
            "shots": item.shots, "source": item.source,
            "generated": item.generated, "scores": item.scores,
            "error": item.error}


def write_scores_jsonl(path, items: Sequence[RunItem]) -> None:
    """Persist per-item scores so every table cell can be audited."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for item in items:
                fh.write(json.dumps(item_to_dict(item)) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_scores_jsonl(path) -> list[dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"line {lineno}: malformed JSON: {exc}") from exc
    return out


def write_outputs(outcome: RunOutcome, cfg: HarnessConfig) -> dict[str, Path]:
    """Write the text table, CSV table, and per-item scores; returns the
    paths keyed by kind."""
    outdir = Path(cfg.output.directory)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {outdir}: {exc}") from exc
    paths = {
        "table_txt": outdir / f"{cfg.output.prefix}_table.txt",
        "table_csv": outdir / f"{cfg.output.prefix}_table.csv",
        "scores": outdir / f"{cfg.output.prefix}_scores.jsonl",
    }
    try:
        paths["table_txt"].write_text(render_table(outcome.table),
                                      encoding="utf-8")
        paths["table_csv"].write_text(render_table_csv(outcome.table),
                                      encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write results: {exc}") from exc
    write_scores_jsonl(paths["scores"], outcome.items)
    return paths


@dataclass(frozen=True)
class StyleEvalSet:
    """Four reports shown to an evaluator: three written by one
    radiologist and one generated in their style, in shuffled order."""

    radiologist_id: str
    reports: tuple[str, str, str, str]
    generated_index: int
    order_seed: int

    def to_dict(self) -> dict:
        return {"radiologist_id": self.radiologist_id,
                "reports": list(self.reports),
                "generated_index": self.generated_index,
                "order_seed": self.order_seed}

    @staticmethod
    def from_dict(doc: dict) -> "StyleEvalSet":
        if not isinstance(doc, dict):
            raise SchemaError("style set must be an object")
        reports = doc.get("reports")
        if (not isinstance(reports, list) or len(reports) != 4
                or not all(isinstance(r, str) for r in reports)):
            raise SchemaError("style set needs exactly four report strings")
        idx = doc.get("generated_index")
        if not isinstance(idx, int) or not 0 <= idx <= 3:
            raise SchemaError("generated_index must be an int in [0, 3]")
        return StyleEvalSet(str(doc.get("radiologist_id", "")),
                            tuple(reports), idx,
                            int(doc.get("order_seed", 0)))


def assemble_style_eval_sets(human: Mapping[str, Sequence[str]],
                             generated: Mapping[str, Sequence[str]],
                             n_sets: int, seed: int) -> list[StyleEvalSet]:
    """Build evaluation sets round-robin over radiologists.

    Each set takes three human reports and one generated report from the
    same radiologist; no report is reused across sets. Shortfalls raise
    with the radiologist named.
    """
    if n_sets < 1:
        raise InputError("n_sets must be at least 1")
    rad_ids = sorted(human)
    if not rad_ids:
        raise InputError("no radiologists in the human report pool")
    assigned = [rad_ids[i % len(rad_ids)] for i in range(n_sets)]
    counts = {rid: assigned.count(rid) for rid in rad_ids}
    for rid, n in counts.items():
        if n == 0:
            continue
        have_h = len(human.get(rid, ()))
        have_g = len(generated.get(rid, ()))
        if have_h < 3 * n or have_g < n:
            raise InputError(
                f"radiologist {rid}: {n} sets need {3 * n} human and {n} "
                f"generated reports, have {have_h} and {have_g}")
    rng = random.Random(seed)
    human_pool = {rid: rng.sample(list(human[rid]), len(human[rid]))
                  for rid in rad_ids}
    gen_pool = {rid: rng.sample(list(generated[rid]), len(generated[rid]))
                for rid in rad_ids if rid in generated}
    sets: list[StyleEvalSet] = []
    for rid in assigned:
        chosen_h = [human_pool[rid].pop() for _ in range(3)]
        chosen_g = gen_pool[rid].pop()
        texts = chosen_h + [chosen_g]
        if len(set(texts)) != 4:
            raise InputError(
                f"radiologist {rid}: duplicate report text in one set")
        order_seed = rng.randrange(2 ** 32)
        perm = random.Random(order_seed).sample(range(4), 4)
        reports = tuple(texts[i] for i in perm)
        sets.append(StyleEvalSet(rid, reports, perm.index(3), order_seed))
    return sets


def render_style_eval_set(style_set: StyleEvalSet) -> str:
    """Display text for one set. Deliberately omits which report is
    generated; that lives only in the set's metadata."""
    blocks = [f"Report {i + 1}:\n{text}"
              for i, text in enumerate(style_set.reports)]
    return "\n\n".join(blocks)


@dataclass(frozen=True)
class StyleEvalScore:
    per_evaluator: dict[str, ZTestResult]
    pooled: ZTestResult


def score_style_eval(answers: Mapping[str, Sequence[int]],
                     sets: Sequence[StyleEvalSet],
                     p0: float = 0.25) -> StyleEvalScore:
    """Test whether evaluators identify the generated report above the
    chance rate p0. Answers are 0-based indices, one per set."""
    if not answers:
        raise InputError("no evaluator answers given")
    if not sets:
        raise InputError("no style sets given")
    per: dict[str, ZTestResult] = {}
    total_x = 0
    for evaluator in sorted(answers):
        choices = answers[evaluator]
        if len(choices) != len(sets):
            raise InputError(
                f"evaluator {evaluator}: expected {len(sets)} answers, "
                f"got {len(choices)}")
        x = 0
        for i, choice in enumerate(choices):
            if not isinstance(choice, int) or not 0 <= choice <= 3:
                raise InputError(
                    f"evaluator {evaluator}, set {i}: answer must be an "
                    f"index in [0, 3], got {choice!r}")
            x += int(choice == sets[i].generated_index)
        per[evaluator] = z_test_proportion(x, len(sets), p0)
        total_x += x
    pooled = z_test_proportion(total_x, len(sets) * len(per), p0)
    return StyleEvalScore(per, pooled)
