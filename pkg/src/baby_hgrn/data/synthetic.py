'''
Synthetic text for desk-scale experiments.

:class:`AgreementGrammar` is a tiny English-like grammar with number
agreement between determiner, noun and verb, plus a fixed set of
"where does the animal live" facts.  It generates

* training documents,
* minimal pairs in the task-file record format (``good``, ``bad``, ``tag``),
* 4-way choice instances (``context``, ``candidates``, ``gold``, ``tag``),
* multi-domain corpus records (``text``, ``domain``).

Pair and choice generators are balanced by construction: pairs
alternate singular and plural so a scorer that always prefers one verb
form lands at 50%, and choice instances cycle the gold place uniformly
so a scorer that always prefers one place lands at 25%.
'''

import math
from collections import Counter
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

# (singular, plural)
DETERMINERS: Tuple[Tuple[str, str], ...] = (('this', 'these'), ('that', 'those'))
NOUNS: Tuple[Tuple[str, str], ...] = (
    ('horse', 'horses'),
    ('cow', 'cows'),
    ('fox', 'foxes'),
    ('wolf', 'wolves'),
    ('duck', 'ducks'),
    ('frog', 'frogs'),
    ('mouse', 'mice'),
    ('rabbit', 'rabbits'),
)
VERBS: Tuple[Tuple[str, str], ...] = (
    ('runs', 'run'),
    ('sleeps', 'sleep'),
    ('eats', 'eat'),
    ('jumps', 'jump'),
)
ADJECTIVES = ('small', 'big', 'old', 'young')
ADVERBS = ('quickly', 'quietly', 'often', 'today')
PLACES = ('barn', 'forest', 'river', 'field')
HOMES: Dict[str, str] = {
    'horse': 'barn',
    'cow': 'barn',
    'fox': 'forest',
    'wolf': 'forest',
    'duck': 'river',
    'frog': 'river',
    'mouse': 'field',
    'rabbit': 'field',
}

SUBJECT_VERB = 'subject_verb_agreement'
DETERMINER_NOUN = 'determiner_noun_agreement'
HABITAT = 'animal_habitat'


class AgreementGrammar:
    '''
    Generator for agreement sentences and habitat facts.

    Args:
        adjective_prob: Chance of an adjective before the noun.
        adverb_prob: Chance of an adverb after the verb.
        fact_prob: Chance that a sentence in a document is a habitat fact.
    '''

    def __init__(
        self,
        adjective_prob: float = 0.5,
        adverb_prob: float = 0.5,
        fact_prob: float = 0.25,
    ) -> None:
        self.adjective_prob = adjective_prob
        self.adverb_prob = adverb_prob
        self.fact_prob = fact_prob

    @staticmethod
    def words() -> List[str]:
        '''Every word the grammar can emit, in a fixed order.'''
        vocab: List[str] = []
        for group in (DETERMINERS, NOUNS, VERBS):
            for singular, plural in group:
                vocab.extend((singular, plural))
        vocab.extend(ADJECTIVES)
        vocab.extend(ADVERBS)
        vocab.extend(PLACES)
        vocab.extend(('the', 'lives', 'in', '.'))
        return vocab

    # ------------------------------------------------------------------
    # Sentences
    # ------------------------------------------------------------------

    def _parts(self, rng: np.random.Generator, plural: bool) -> Dict[str, str]:
        number = int(plural)
        det = DETERMINERS[rng.integers(len(DETERMINERS))]
        noun = NOUNS[rng.integers(len(NOUNS))]
        verb = VERBS[rng.integers(len(VERBS))]
        return {
            'det': det[number],
            'det_other': det[1 - number],
            'adj': ADJECTIVES[rng.integers(len(ADJECTIVES))]
            if rng.random() < self.adjective_prob
            else '',
            'noun': noun[number],
            'verb': verb[number],
            'verb_other': verb[1 - number],
            'adv': ADVERBS[rng.integers(len(ADVERBS))]
            if rng.random() < self.adverb_prob
            else '',
        }

    @staticmethod
    def _join(*words: str) -> str:
        return ' '.join(w for w in words if w)

    def sentence(self, rng: np.random.Generator, plural: Optional[bool] = None) -> str:
        '''``Det [Adj] Noun Verb [Adv] .`` with agreeing number.'''
        if plural is None:
            plural = bool(rng.random() < 0.5)
        p = self._parts(rng, plural)
        return self._join(p['det'], p['adj'], p['noun'], p['verb'], p['adv'], '.')

    @staticmethod
    def fact(noun: str) -> str:
        return f'the {noun} lives in the {HOMES[noun]} .'

    def document(self, rng: np.random.Generator, sentences: int = 4) -> str:
        out = []
        for _ in range(sentences):
            if rng.random() < self.fact_prob:
                noun = NOUNS[rng.integers(len(NOUNS))][0]
                out.append(self.fact(noun))
            else:
                out.append(self.sentence(rng))
        return ' '.join(out)

    def corpus(
        self, n_documents: int, sentences_per_document: int = 4, seed: int = 0
    ) -> List[str]:
        '''Deterministic list of documents for ``seed``.'''
        rng = np.random.default_rng(seed)
        return [self.document(rng, sentences_per_document) for _ in range(n_documents)]

    # ------------------------------------------------------------------
    # Evaluation material
    # ------------------------------------------------------------------

    def minimal_pair_records(self, n: int, seed: int = 0) -> List[Dict[str, str]]:
        '''
        Grammatical sentences paired with one agreement violation each.

        Even indices are singular, odd indices plural; the phenomenon
        alternates every two pairs between subject-verb and
        determiner-noun agreement.
        '''
        rng = np.random.default_rng(seed)
        records = []
        for i in range(n):
            p = self._parts(rng, plural=bool(i % 2))
            good = self._join(p['det'], p['adj'], p['noun'], p['verb'], p['adv'], '.')
            if (i // 2) % 2 == 0:
                tag = SUBJECT_VERB
                bad = self._join(
                    p['det'], p['adj'], p['noun'], p['verb_other'], p['adv'], '.'
                )
            else:
                tag = DETERMINER_NOUN
                bad = self._join(
                    p['det_other'], p['adj'], p['noun'], p['verb'], p['adv'], '.'
                )
            records.append({'good': good, 'bad': bad, 'tag': tag})
        return records

    def choice_records(self, n: int) -> List[Dict]:
        '''
        Habitat questions: ``"the fox lives in the"`` with one candidate per place.

        Nouns are cycled in order so every place is gold equally often.
        '''
        records = []
        for i in range(n):
            noun = NOUNS[i % len(NOUNS)][0]
            records.append(
                {
                    'context': f'the {noun} lives in the',
                    'candidates': [f' {place} .' for place in PLACES],
                    'gold': PLACES.index(HOMES[noun]),
                    'tag': HABITAT,
                }
            )
        return records

    def domain_records(
        self,
        domains: Sequence[str],
        words_per_domain: int,
        seed: int = 0,
        sentences_per_document: int = 3,
    ) -> List[Dict[str, str]]:
        '''
        Corpus records for several named domains, at least
        ``words_per_domain`` words each.
        '''
        records = []
        for index, name in enumerate(domains):
            rng = np.random.default_rng([seed, index])
            words = 0
            while words < words_per_domain:
                text = self.document(rng, sentences_per_document)
                words += len(text.split())
                records.append({'text': text, 'domain': name})
        return records


def bigram_entropy(ids: Sequence[int]) -> float:
    '''
    Plug-in conditional entropy ``H(X_t | X_{t-1})`` of a token stream, in nats.

    This is the cross-entropy floor of a model that only sees the
    previous token.
    '''
    ids = list(ids)
    if len(ids) < 2:
        return 0.0
    pairs = Counter(zip(ids, ids[1:]))
    left = Counter(ids[:-1])
    total = len(ids) - 1
    entropy = 0.0
    for (a, _), count in pairs.items():
        entropy -= (count / total) * math.log(count / left[a])
    return entropy
