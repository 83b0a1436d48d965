"""Render a report graph into its dense, style-free text form.

Each weakly connected component becomes one text span: entities in report
order, with "no" prepended to definitely-absent observations and "maybe"
to uncertain ones. Spans are stratified into findings/impression by where
their entities sit in the source report, or unified when the report has no
recognizable sections, then joined with a configurable delimiter.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import InputError
from .graph import EntityLabel, RadGraph, SectionMap, validate, weakly_connected_components


class Section(Enum):
    FINDINGS = "findings"
    IMPRESSION = "impression"
    UNIFIED = "unified"


@dataclass(frozen=True)
class SerializerConfig:
    delimiter: str = ". "
    findings_header: str = "findings:"
    impression_header: str = "impression:"
    include_headers: bool = True


@dataclass(frozen=True)
class ComponentSpan:
    text: str
    section: Section
    min_start_ix: int


@dataclass(frozen=True)
class Serialization:
    findings: tuple[ComponentSpan, ...]
    impression: tuple[ComponentSpan, ...]
    unified: tuple[ComponentSpan, ...]
    rendered: str

    def spans(self) -> tuple[ComponentSpan, ...]:
        return self.findings + self.impression + self.unified


_KEYWORD = {EntityLabel.OBS_DA: "no", EntityLabel.OBS_U: "maybe"}


def section_of_component(ids: set[str], g: RadGraph) -> Section:
    """Assign a component to the section holding most of its entities.

    Entities outside both ranges count toward findings, and findings wins
    ties, so impression requires a strict majority inside its range.
    """
    if not g.sections.defines_any():
        raise InputError("graph defines no section ranges")
    votes_impression = 0
    votes_findings = 0
    for eid in ids:
        start = g.entities[eid].start_ix
        if SectionMap.contains(g.sections.impression_range, start):
            votes_impression += 1
        else:
            votes_findings += 1
    if votes_impression > votes_findings:
        return Section.IMPRESSION
    return Section.FINDINGS


def serialize_component(ids: set[str], g: RadGraph) -> ComponentSpan:
    """Render one component: entities sorted by report position, joined by
    single spaces, absence/uncertainty keywords prepended."""
    unknown = set(ids) - g.entities.keys()
    if unknown:
        raise InputError(f"ids not in graph: {sorted(unknown)}")
    if not ids:
        raise InputError("empty component")
    # label breaks (start, end, tokens) ties so order never depends on
    # set iteration; full-key ties render identically either way
    entities = sorted((g.entities[i] for i in ids),
                      key=lambda e: (e.start_ix, e.end_ix, e.tokens,
                                     e.label.value))
    parts = []
    for entity in entities:
        keyword = _KEYWORD.get(entity.label)
        parts.append(f"{keyword} {entity.tokens}" if keyword else entity.tokens)
    section = (section_of_component(ids, g) if g.sections.defines_any()
               else Section.UNIFIED)
    return ComponentSpan(" ".join(parts), section, entities[0].start_ix)


def serialize(g: RadGraph, cfg: SerializerConfig = SerializerConfig()) -> Serialization:
    """Serialize a whole graph; deterministic for equal graph and config."""
    problems = validate(g)
    if problems:
        raise InputError("invalid graph: " + "; ".join(problems))

    spans = [serialize_component(component, g)
             for component in weakly_connected_components(g)]
    findings = tuple(s for s in spans if s.section is Section.FINDINGS)
    impression = tuple(s for s in spans if s.section is Section.IMPRESSION)
    unified = tuple(s for s in spans if s.section is Section.UNIFIED)

    if unified:
        rendered = cfg.delimiter.join(s.text for s in unified)
    else:
        parts = []
        for header, section_spans in ((cfg.findings_header, findings),
                                      (cfg.impression_header, impression)):
            if not section_spans:
                continue
            body = cfg.delimiter.join(s.text for s in section_spans)
            parts.append(f"{header} {body}" if cfg.include_headers else body)
        rendered = cfg.delimiter.join(parts)

    return Serialization(findings, impression, unified, rendered)
