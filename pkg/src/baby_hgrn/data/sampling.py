'''
Domain-stratified corpus sampling.

A sampling plan is a list of :class:`DomainSpec` entries whose ratios
sum to one.  :func:`sample_corpus` draws whole documents from each
domain, uniformly without replacement, until the domain's share of the
word budget is met (the last document may overshoot and is counted as
is).  Words are counted by whitespace splitting.

Two plans are registered from the published 10M- and 100M-word Pile
compositions so that ``get_plan('pile-10m').specs()`` reproduces the
same domain ratios at any scale.
'''

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import polars as pl

from baby_hgrn.errors import PlanError
from baby_hgrn.utils.helpers import (
    PathLike,
    count_words,
    read_jsonl,
    write_json,
    write_jsonl,
)

logger = logging.getLogger(__name__)

RATIO_TOLERANCE = 1e-6


@dataclass(frozen=True)
class DomainSpec:
    '''
    One domain of a sampling plan.

    Attributes:
        name: Domain name; matched against the ``domain`` field of
            source records.
        ratio: Target fraction of total words, in ``(0, 1]``.
        source: JSONL file holding the domain's documents.
    '''

    name: str
    ratio: float
    source: Optional[str] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.ratio <= 1.0:
            raise PlanError(
                f'Domain {self.name!r}: ratio must be in (0, 1], got {self.ratio}'
            )


# ---------------------------------------------------------------------------
# Plan registry
# ---------------------------------------------------------------------------


class SamplingPlan:
    '''
    A named domain composition with its reference word counts.

    Args:
        name: Registry key (e.g. ``"pile-10m"``).
        description: Human-readable description.
        counts: Ordered ``(domain, word count)`` pairs; ratios are
            ``count / total``.
    '''

    def __init__(self, name: str, description: str, counts: Sequence[tuple]) -> None:
        self.name = name
        self.description = description
        self.counts = list(counts)

    @property
    def total_words(self) -> int:
        return sum(count for _, count in self.counts)

    def ratios(self) -> Dict[str, float]:
        total = self.total_words
        return {domain: count / total for domain, count in self.counts}

    def specs(self, source: Optional[str] = None) -> List[DomainSpec]:
        '''Build the plan's DomainSpecs, all reading from ``source``.'''
        return [DomainSpec(d, r, source) for d, r in self.ratios().items()]

    def __repr__(self) -> str:
        return f'SamplingPlan({self.name!r}, domains={len(self.counts)})'


PLANS: Dict[str, SamplingPlan] = {}


def _register(plan: SamplingPlan) -> SamplingPlan:
    '''Add a plan to the global registry and return it.'''
    PLANS[plan.name] = plan
    return plan


# ── 10M-word Pile subset ──────────────────────────────────────────────────
_register(
    SamplingPlan(
        name='pile-10m',
        description='10M-word Pile composition (strict-small track)',
        counts=[
            ('Pile-CC', 4_900_155),
            ('OpenWebText2', 3_078_791),
            ('FreeLaw', 946_382),
            ('USPTO Backgrounds', 261_159),
            ('Wikipedia (en)', 187_094),
            ('PubMed Central', 142_698),
            ('PubMed Abstracts', 118_427),
            ('Others', 365_188),
        ],
    )
)

# ── 100M-word Pile subset ─────────────────────────────────────────────────
_register(
    SamplingPlan(
        name='pile-100m',
        description='100M-word Pile composition (strict track)',
        counts=[
            ('Pile-CC', 49_214_555),
            ('OpenWebText2', 30_344_790),
            ('FreeLaw', 9_471_436),
            ('USPTO Backgrounds', 2_519_390),
            ('Wikipedia (en)', 1_855_709),
            ('PubMed Central', 1_449_273),
            ('PubMed Abstracts', 1_175_838),
            ('Others', 3_968_870),
        ],
    )
)


def get_plan(name: str) -> SamplingPlan:
    '''
    Look up a registered sampling plan.

    Raises:
        KeyError: If the plan name is not in the registry.
    '''
    try:
        return PLANS[name]
    except KeyError:
        raise KeyError(
            f'Unknown sampling plan {name!r}. Available: {sorted(PLANS)}'
        ) from None


def list_plans() -> Dict[str, str]:
    '''Return ``{name: description}`` for every registered plan.'''
    return {name: plan.description for name, plan in PLANS.items()}


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------


@dataclass
class DomainManifest:
    '''What was actually drawn from one domain.'''

    name: str
    requested_ratio: float
    requested_words: int
    sampled_words: int = 0
    sampled_documents: int = 0
    available_documents: int = 0
    exhausted: bool = False
    achieved_ratio: float = 0.0


@dataclass
class CorpusManifest:
    '''Per-domain accounting of a sampled corpus.'''

    seed: int
    total_words_requested: int
    domains: List[DomainManifest] = field(default_factory=list)

    @property
    def total_words(self) -> int:
        return sum(d.sampled_words for d in self.domains)

    @property
    def total_documents(self) -> int:
        return sum(d.sampled_documents for d in self.domains)

    def ratios(self) -> Dict[str, float]:
        return {d.name: d.achieved_ratio for d in self.domains}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seed': self.seed,
            'total_words_requested': self.total_words_requested,
            'total_words': self.total_words,
            'total_documents': self.total_documents,
            'domains': [asdict(d) for d in self.domains],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'CorpusManifest':
        return cls(
            seed=data['seed'],
            total_words_requested=data['total_words_requested'],
            domains=[DomainManifest(**d) for d in data.get('domains', [])],
        )

    def to_table(self) -> pl.DataFrame:
        '''Dataset / Count / Ratio (%) table with a Total row.'''
        rows = [
            {
                'Dataset': d.name,
                'Count': d.sampled_words,
                'Ratio (%)': round(100.0 * d.achieved_ratio, 2),
                'Target (%)': round(100.0 * d.requested_ratio, 2),
                'Documents': d.sampled_documents,
                'Exhausted': d.exhausted,
            }
            for d in self.domains
        ]
        rows.append(
            {
                'Dataset': 'Total',
                'Count': self.total_words,
                'Ratio (%)': None,
                'Target (%)': None,
                'Documents': self.total_documents,
                'Exhausted': None,
            }
        )
        return pl.DataFrame(rows)

    def save(self, path: PathLike) -> str:
        return write_json(self.to_dict(), path)


@dataclass
class SampledCorpus:
    '''Sampled documents (``{'text', 'domain'}`` records) plus their manifest.'''

    documents: List[Dict[str, str]]
    manifest: CorpusManifest

    def texts(self) -> List[str]:
        return [doc['text'] for doc in self.documents]

    def save(self, path: PathLike) -> str:
        return write_jsonl_corpus(path, self.documents)


def read_jsonl_corpus(path: PathLike) -> List[Dict[str, str]]:
    '''
    Load ``{'text', 'domain'}`` records, skipping those without text.

    Raises:
        IngestionError: If the file is missing or malformed.
    '''
    documents = []
    for record in read_jsonl(path):
        text = record.get('text')
        if isinstance(text, str):
            documents.append({'text': text, 'domain': str(record.get('domain', ''))})
    return documents


def write_jsonl_corpus(path: PathLike, documents: Sequence[Mapping[str, str]]) -> str:
    return write_jsonl(
        path, ({'text': d['text'], 'domain': d.get('domain', '')} for d in documents)
    )


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def validate_plan(plan: Sequence[DomainSpec]) -> None:
    '''
    Check that a plan is non-empty, has unique names and ratios summing to 1.

    Raises:
        PlanError: On any violation.
    '''
    if not plan:
        raise PlanError('Sampling plan is empty')
    names = [d.name for d in plan]
    if len(set(names)) != len(names):
        raise PlanError(f'Sampling plan repeats domains: {names}')
    total = sum(d.ratio for d in plan)
    if abs(total - 1.0) > RATIO_TOLERANCE:
        raise PlanError(f'Domain ratios sum to {total:.8f}, expected 1')


def load_domain_documents(plan: Sequence[DomainSpec]) -> Dict[str, List[str]]:
    '''
    Read every domain's documents from its source file.

    Records carrying a ``domain`` field are routed to the matching
    spec; records without one belong to every spec reading that file.

    Raises:
        PlanError: If a spec has no source.
        IngestionError: If a source cannot be read.
    '''
    by_source: Dict[str, List[DomainSpec]] = {}
    for spec in plan:
        if not spec.source:
            raise PlanError(f'Domain {spec.name!r} has no source file')
        by_source.setdefault(spec.source, []).append(spec)

    documents: Dict[str, List[str]] = {spec.name: [] for spec in plan}
    for source, specs in by_source.items():
        wanted = {spec.name for spec in specs}
        for record in read_jsonl(source):
            text = record.get('text')
            if not isinstance(text, str):
                continue
            domain = record.get('domain')
            if domain is None:
                for name in wanted:
                    documents[name].append(text)
            elif domain in wanted:
                documents[domain].append(text)
    return documents


def sample_corpus(
    plan: Sequence[DomainSpec],
    total_words: int,
    seed: int = 0,
    documents: Optional[Mapping[str, Sequence[str]]] = None,
) -> SampledCorpus:
    '''
    Draw a ratio-controlled corpus.

    Args:
        plan: Domain specs; ratios must sum to one.
        total_words: Overall word budget (> 0).
        seed: Seed for the per-domain draws and the final interleaving.
        documents: Pre-loaded ``{domain: [text, ...]}``; when omitted the
            specs' source files are read.

    Returns:
        A :class:`SampledCorpus` whose manifest records requested and
        achieved ratios, word and document counts, and exhaustion.

    Raises:
        PlanError: Empty/invalid plan, non-positive budget, or a domain
            with no words to draw from.
        IngestionError: Unreadable source file.
    '''
    validate_plan(plan)
    if total_words <= 0:
        raise PlanError(f'total_words must be positive, got {total_words}')
    if documents is None:
        documents = load_domain_documents(plan)

    manifest = CorpusManifest(seed=seed, total_words_requested=total_words)
    drawn: List[Dict[str, str]] = []

    for index, spec in enumerate(plan):
        pool = list(documents.get(spec.name, ()))
        lengths = [count_words(text) for text in pool]
        if not pool or sum(lengths) == 0:
            raise PlanError(f'Domain {spec.name!r} has no documents to sample from')

        budget = int(round(spec.ratio * total_words))
        entry = DomainManifest(
            name=spec.name,
            requested_ratio=spec.ratio,
            requested_words=budget,
            available_documents=len(pool),
        )
        rng = np.random.default_rng([seed, index])
        for doc_index in rng.permutation(len(pool)):
            if entry.sampled_words >= budget:
                break
            if lengths[doc_index] == 0:
                continue
            drawn.append({'text': pool[doc_index], 'domain': spec.name})
            entry.sampled_words += lengths[doc_index]
            entry.sampled_documents += 1

        if entry.sampled_words < budget:
            entry.exhausted = True
            logger.warning(
                'Domain %r exhausted: %d of %d requested words available',
                spec.name,
                entry.sampled_words,
                budget,
            )
        logger.info(
            'Sampled %d words from %d documents of domain %r',
            entry.sampled_words,
            entry.sampled_documents,
            spec.name,
        )
        manifest.domains.append(entry)

    total = manifest.total_words
    for entry in manifest.domains:
        entry.achieved_ratio = entry.sampled_words / total if total else 0.0

    order = np.random.default_rng(seed).permutation(len(drawn))
    return SampledCorpus(documents=[drawn[i] for i in order], manifest=manifest)
