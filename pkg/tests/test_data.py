'''
Tests for corpus construction.

Covers:
  - BPE training (merge order, determinism, lossless round trip, save/load)
  - Domain-stratified sampling (ratios, exhaustion, plan errors)
  - Concatenate-and-chunk packing and the binary container
  - The synthetic agreement grammar
'''

import numpy as np
import pytest


@pytest.fixture(scope='module')
def grammar_corpus():
    from baby_hgrn.data import AgreementGrammar

    return AgreementGrammar().corpus(300, seed=0)


@pytest.fixture(scope='module')
def small_vocab(grammar_corpus):
    from baby_hgrn.data import train_bpe

    return train_bpe(grammar_corpus, vocab_size=320)


# ======================================================================
# BPE
# ======================================================================


class TestBPE:
    '''Byte-level BPE training and coding.'''

    def test_single_pair_is_merged_first(self):
        from baby_hgrn.data import NUM_BASE_SYMBOLS, train_bpe

        vocab = train_bpe(['aaaa'], vocab_size=NUM_BASE_SYMBOLS + 1)
        assert vocab.merges == [(b'a', b'a')]
        assert vocab.vocab_size == NUM_BASE_SYMBOLS + 1

    def test_most_frequent_pair_wins(self):
        from baby_hgrn.data import NUM_BASE_SYMBOLS, train_bpe

        vocab = train_bpe(['abababab'], vocab_size=NUM_BASE_SYMBOLS + 2)
        assert vocab.merges[0] == (b'a', b'b')

    def test_exact_vocab_size(self, small_vocab):
        assert small_vocab.vocab_size == 320
        assert small_vocab.requested_size == 320
        assert len(small_vocab) == 320

    def test_small_corpus_reports_achieved_size(self, caplog):
        from baby_hgrn.data import NUM_BASE_SYMBOLS, train_bpe

        with caplog.at_level('WARNING', logger='baby_hgrn.data.bpe'):
            vocab = train_bpe(['ab'], vocab_size=NUM_BASE_SYMBOLS + 50)
        assert vocab.vocab_size == NUM_BASE_SYMBOLS + 1
        assert vocab.requested_size == NUM_BASE_SYMBOLS + 50
        assert 'too small' in caplog.text

    def test_vocab_size_must_exceed_base(self):
        from baby_hgrn.data import NUM_BASE_SYMBOLS, train_bpe
        from baby_hgrn.errors import UsageError

        with pytest.raises(UsageError):
            train_bpe(['abc'], vocab_size=NUM_BASE_SYMBOLS)

    def test_training_is_deterministic(self, grammar_corpus, small_vocab):
        from baby_hgrn.data import train_bpe

        again = train_bpe(grammar_corpus, vocab_size=320)
        assert again.merges == small_vocab.merges

    def test_special_ids(self, small_vocab):
        ids = {small_vocab.pad_id, small_vocab.bos_id, small_vocab.eos_id}
        assert ids == {0, 1, 2}
        assert small_vocab.unk_id == 3
        assert small_vocab.decode([small_vocab.bos_id, small_vocab.eos_id]) == ''

    def test_merges_shorten_encoding(self, small_vocab):
        text = 'these horses run quickly .'
        assert len(small_vocab.encode(text)) < len(text.encode('utf-8'))

    def test_rebuilt_symbol_reuses_its_id(self):
        '''Two merges spelling the same bytes share one reachable id.'''
        from baby_hgrn.data import NUM_BASE_SYMBOLS, BPEVocabulary

        vocab = BPEVocabulary(
            [(b'a', b'b'), (b'b', b'c'), (b'ab', b'c'), (b'a', b'bc')]
        )
        assert vocab.vocab_size == NUM_BASE_SYMBOLS + 3
        for idx in range(NUM_BASE_SYMBOLS, vocab.vocab_size):
            text = vocab.id_to_bytes[idx].decode('utf-8')
            assert vocab.encode(text) == [idx]
        assert vocab.encode('abc') == [vocab.token_to_id[b'abc']]

    def test_trained_symbols_are_distinct(self, small_vocab):
        from baby_hgrn.data import SPECIAL_TOKENS

        symbols = small_vocab.id_to_bytes[len(SPECIAL_TOKENS) :]
        assert len(set(symbols)) == len(symbols)

    def test_round_trip_random_unicode(self, small_vocab):
        '''decode(encode(s)) == s on 1,000 random strings.'''
        rng = np.random.default_rng(0)
        pools = [
            (0x20, 0x7F),
            (0xA0, 0x24F),
            (0x370, 0x3FF),
            (0x4E00, 0x4FFF),
            (0x1F300, 0x1F5FF),
        ]
        whitespace = [' ', '\n', '\t', '  ']
        for _ in range(1000):
            chars = []
            for _ in range(int(rng.integers(0, 40))):
                if rng.random() < 0.15:
                    chars.append(whitespace[rng.integers(len(whitespace))])
                else:
                    low, high = pools[rng.integers(len(pools))]
                    chars.append(chr(int(rng.integers(low, high))))
            text = ''.join(chars)
            assert small_vocab.decode(small_vocab.encode(text)) == text

    def test_ids_are_dense(self, small_vocab, grammar_corpus):
        ids = [i for doc in grammar_corpus[:20] for i in small_vocab.encode(doc)]
        assert min(ids) >= 0
        assert max(ids) < small_vocab.vocab_size

    def test_decode_rejects_out_of_range(self, small_vocab):
        from baby_hgrn.errors import DataError

        with pytest.raises(DataError):
            small_vocab.decode([small_vocab.vocab_size])

    def test_save_and_load(self, small_vocab, tmp_path):
        from baby_hgrn.data import BPEVocabulary

        path = small_vocab.save(tmp_path / 'vocab.json')
        loaded = BPEVocabulary.load(path)
        assert loaded.merges == small_vocab.merges
        text = 'that young fox sleeps .'
        assert loaded.encode(text) == small_vocab.encode(text)

    def test_load_rejects_foreign_json(self, tmp_path):
        from baby_hgrn.data import BPEVocabulary
        from baby_hgrn.errors import DataError

        path = tmp_path / 'other.json'
        path.write_text('{"format": "something-else"}')
        with pytest.raises(DataError):
            BPEVocabulary.load(path)


# ======================================================================
# Sampling
# ======================================================================


class TestSampling:
    '''Ratio-controlled document sampling.'''

    def test_registered_plans(self):
        from baby_hgrn.data import get_plan, list_plans

        assert set(list_plans()) >= {'pile-10m', 'pile-100m'}
        ratios = get_plan('pile-10m').ratios()
        assert round(100 * ratios['Pile-CC'], 2) == 49.00
        assert round(100 * ratios['OpenWebText2'], 2) == 30.79
        assert round(100 * ratios['FreeLaw'], 2) == 9.46
        assert get_plan('pile-10m').total_words == 9_999_894
        assert sum(ratios.values()) == pytest.approx(1.0, abs=1e-9)

    def test_unknown_plan(self):
        from baby_hgrn.data import get_plan

        with pytest.raises(KeyError, match='Available'):
            get_plan('pile-1b')

    def test_pile_ratios_reproduced_at_small_scale(self):
        '''The 10M plan at 1/1000 scale lands within 0.5 pp of every ratio.'''
        from baby_hgrn.data import AgreementGrammar, get_plan, sample_corpus

        plan = get_plan('pile-10m')
        names = [name for name, _ in plan.counts]
        records = AgreementGrammar().domain_records(
            names, words_per_domain=6000, sentences_per_document=1
        )
        documents = {name: [] for name in names}
        for record in records:
            documents[record['domain']].append(record['text'])

        budget = 9_999_894 // 1000
        sampled = sample_corpus(plan.specs(), budget, seed=3, documents=documents)
        achieved = sampled.manifest.ratios()
        for name, target in plan.ratios().items():
            assert abs(achieved[name] - target) < 0.005, name
        assert not any(d.exhausted for d in sampled.manifest.domains)

    def test_two_domain_counts(self):
        from baby_hgrn.data import AgreementGrammar, DomainSpec, sample_corpus

        records = AgreementGrammar().domain_records(['a', 'b'], words_per_domain=8000)
        documents = {'a': [], 'b': []}
        for record in records:
            documents[record['domain']].append(record['text'])

        plan = [DomainSpec('a', 0.7), DomainSpec('b', 0.3)]
        manifest = sample_corpus(plan, 10_000, seed=0, documents=documents).manifest
        counts = {d.name: d.sampled_words for d in manifest.domains}
        assert abs(counts['a'] - 7000) <= 50
        assert abs(counts['b'] - 3000) <= 50

    def test_single_domain(self):
        from baby_hgrn.data import DomainSpec, sample_corpus

        docs = {'only': ['one two three'] * 10}
        manifest = sample_corpus([DomainSpec('only', 1.0)], 12, documents=docs).manifest
        assert manifest.ratios() == {'only': 1.0}
        assert manifest.total_words == 12

    def test_same_seed_same_corpus(self):
        from baby_hgrn.data import AgreementGrammar, DomainSpec, sample_corpus

        records = AgreementGrammar().domain_records(['x', 'y'], words_per_domain=800)
        documents = {'x': [], 'y': []}
        for record in records:
            documents[record['domain']].append(record['text'])
        plan = [DomainSpec('x', 0.5), DomainSpec('y', 0.5)]

        first = sample_corpus(plan, 1000, seed=11, documents=documents)
        second = sample_corpus(plan, 1000, seed=11, documents=documents)
        other = sample_corpus(plan, 1000, seed=12, documents=documents)
        assert first.documents == second.documents
        assert first.documents != other.documents

    def test_exhausted_domain_is_reported(self):
        from baby_hgrn.data import DomainSpec, sample_corpus

        docs = {'big': ['w ' * 10] * 100, 'tiny': ['w w']}
        plan = [DomainSpec('big', 0.5), DomainSpec('tiny', 0.5)]
        manifest = sample_corpus(plan, 100, documents=docs).manifest
        tiny = next(d for d in manifest.domains if d.name == 'tiny')
        assert tiny.exhausted
        assert tiny.sampled_words == 2

    def test_empty_domain_is_plan_error(self):
        from baby_hgrn.data import DomainSpec, sample_corpus
        from baby_hgrn.errors import PlanError

        plan = [DomainSpec('a', 0.5), DomainSpec('b', 0.5)]
        with pytest.raises(PlanError, match="'b'"):
            sample_corpus(plan, 100, documents={'a': ['x y z'], 'b': []})

    @pytest.mark.parametrize(
        'ratios',
        [[], [0.5, 0.4], [0.5, 0.5, 0.5]],
    )
    def test_invalid_plans(self, ratios):
        from baby_hgrn.data import DomainSpec, validate_plan
        from baby_hgrn.errors import PlanError

        plan = [DomainSpec(f'd{i}', r) for i, r in enumerate(ratios)]
        with pytest.raises(PlanError):
            validate_plan(plan)

    def test_ratio_out_of_range(self):
        from baby_hgrn.data import DomainSpec
        from baby_hgrn.errors import PlanError

        with pytest.raises(PlanError):
            DomainSpec('a', 0.0)

    def test_unreadable_source(self, tmp_path):
        from baby_hgrn.data import DomainSpec, sample_corpus
        from baby_hgrn.errors import IngestionError

        plan = [DomainSpec('a', 1.0, str(tmp_path / 'missing.jsonl'))]
        with pytest.raises(IngestionError):
            sample_corpus(plan, 10)

    def test_reads_domain_records_from_file(self, tmp_path):
        from baby_hgrn.data import DomainSpec, sample_corpus, write_jsonl_corpus

        source = write_jsonl_corpus(
            tmp_path / 'corpus.jsonl',
            [
                {'text': 'a b c d', 'domain': 'left'},
                {'text': 'e f g h', 'domain': 'right'},
                {'text': 'i j k l', 'domain': 'ignored'},
            ],
        )
        plan = [DomainSpec('left', 0.5, source), DomainSpec('right', 0.5, source)]
        sampled = sample_corpus(plan, 8, documents=None)
        assert sorted(sampled.texts()) == ['a b c d', 'e f g h']

    def test_manifest_table(self):
        from baby_hgrn.data import DomainSpec, sample_corpus

        docs = {'a': ['x y'] * 5, 'b': ['z'] * 5}
        plan = [DomainSpec('a', 0.6), DomainSpec('b', 0.4)]
        table = sample_corpus(plan, 10, documents=docs).manifest.to_table()
        assert table.columns[:3] == ['Dataset', 'Count', 'Ratio (%)']
        assert table['Dataset'].to_list() == ['a', 'b', 'Total']
        assert table['Count'][-1] == table['Count'][:-1].sum()


# ======================================================================
# Packing
# ======================================================================


class TestPacking:
    '''Concatenate-and-chunk packing.'''

    def test_floor_division_and_drop(self):
        from baby_hgrn.data import pack_ids

        dataset = pack_ids([list(range(1, 1031))], vocab_size=2000, eos_id=2)
        assert dataset.chunk_count == 2
        assert dataset.chunk_len == 512
        assert dataset.dropped_tokens == 6

    def test_token_conservation_with_separators(self):
        from baby_hgrn.data import pack_ids

        docs = [[5, 6, 7], [8, 9], [10, 11, 12, 13]]
        dataset = pack_ids(docs, vocab_size=20, eos_id=2, chunk_len=4)
        total = sum(len(d) for d in docs) + len(docs) - 1
        assert dataset.chunk_count * dataset.chunk_len + dataset.dropped_tokens == total
        np.testing.assert_array_equal(
            dataset.chunks, [[5, 6, 7, 2], [8, 9, 2, 10]]
        )

    def test_empty_corpus(self):
        from baby_hgrn.data import pack_ids
        from baby_hgrn.errors import PlanError

        with pytest.raises(PlanError):
            pack_ids([[], []], vocab_size=10, eos_id=2, chunk_len=4)

    def test_short_corpus(self):
        from baby_hgrn.data import pack_ids
        from baby_hgrn.errors import PlanError

        with pytest.raises(PlanError, match='fewer than one chunk'):
            pack_ids([[4, 5]], vocab_size=10, eos_id=2, chunk_len=4)

    def test_chunk_len_minimum(self):
        from baby_hgrn.data import pack_ids
        from baby_hgrn.errors import UsageError

        with pytest.raises(UsageError):
            pack_ids([[4, 5, 6]], vocab_size=10, eos_id=2, chunk_len=1)

    def test_out_of_vocab_ids(self):
        from baby_hgrn.data import pack_ids
        from baby_hgrn.errors import DataError

        with pytest.raises(DataError):
            pack_ids([[4, 50, 6, 7]], vocab_size=10, eos_id=2, chunk_len=2)

    def test_pack_text_respects_vocab(self, grammar_corpus, small_vocab):
        from baby_hgrn.data import pack

        dataset = pack(grammar_corpus, small_vocab, chunk_len=32)
        assert dataset.chunks.shape[1] == 32
        assert int(dataset.chunks.max()) < small_vocab.vocab_size
        assert dataset.vocab_size == small_vocab.vocab_size

    def test_same_inputs_give_identical_bytes(
        self, grammar_corpus, small_vocab, tmp_path
    ):
        from baby_hgrn.data import pack

        first = pack(grammar_corpus, small_vocab, chunk_len=32)
        second = pack(grammar_corpus, small_vocab, chunk_len=32)
        first.save(tmp_path / 'a.bin')
        second.save(tmp_path / 'b.bin')
        assert (tmp_path / 'a.bin').read_bytes() == (tmp_path / 'b.bin').read_bytes()

    def test_save_and_load(self, grammar_corpus, small_vocab, tmp_path):
        from baby_hgrn.data import PackedDataset, pack

        manifest = {'seed': 0, 'domains': []}
        dataset = pack(grammar_corpus, small_vocab, chunk_len=16, manifest=manifest)
        path = dataset.save(tmp_path / 'train.bin')
        loaded = PackedDataset.load(path)
        assert loaded == dataset
        assert loaded.manifest == manifest
        assert loaded.dropped_tokens == dataset.dropped_tokens

    def test_header_layout(self, tmp_path):
        import struct

        from baby_hgrn.data import pack_ids

        dataset = pack_ids([[4, 5, 6, 7, 8]], vocab_size=300, eos_id=2, chunk_len=2)
        blob = dataset.to_bytes()
        header = struct.unpack_from('<4sHIII', blob)
        assert header == (b'BHPD', 1, 300, 2, 2)
        assert len(blob) == struct.calcsize('<4sHIII') + 4 * 4

    def test_corrupt_container(self, tmp_path):
        from baby_hgrn.data import PackedDataset
        from baby_hgrn.errors import CheckpointError

        path = tmp_path / 'bad.bin'
        path.write_bytes(b'NOPE' + b'\0' * 20)
        with pytest.raises(CheckpointError):
            PackedDataset.load(path)

    def test_missing_container(self, tmp_path):
        from baby_hgrn.data import PackedDataset
        from baby_hgrn.errors import IngestionError

        with pytest.raises(IngestionError):
            PackedDataset.load(tmp_path / 'absent.bin')

    def test_split_is_disjoint_and_seeded(self):
        from baby_hgrn.data import pack_ids

        dataset = pack_ids([list(range(4, 104))], vocab_size=200, eos_id=2, chunk_len=5)
        train, valid = dataset.split(0.2, seed=1)
        assert train.chunk_count == 16
        assert valid.chunk_count == 4
        rows = {tuple(r) for r in train.chunks} | {tuple(r) for r in valid.chunks}
        assert len(rows) == dataset.chunk_count
        again, _ = dataset.split(0.2, seed=1)
        assert again == train

    def test_split_rejects_degenerate_fraction(self):
        from baby_hgrn.data import pack_ids
        from baby_hgrn.errors import UsageError

        dataset = pack_ids([[4, 5, 6, 7]], vocab_size=10, eos_id=2, chunk_len=2)
        with pytest.raises(UsageError):
            dataset.split(0.1)
        with pytest.raises(UsageError):
            dataset.split(1.0)


# ======================================================================
# Synthetic grammar
# ======================================================================


class TestSyntheticGrammar:
    '''Agreement grammar generators.'''

    def test_corpus_is_seeded(self):
        from baby_hgrn.data import AgreementGrammar

        grammar = AgreementGrammar()
        assert grammar.corpus(5, seed=1) == grammar.corpus(5, seed=1)
        assert grammar.corpus(5, seed=1) != grammar.corpus(5, seed=2)

    def test_minimal_pairs_differ_in_one_word(self):
        from baby_hgrn.data import AgreementGrammar

        for record in AgreementGrammar().minimal_pair_records(40, seed=0):
            good, bad = record['good'].split(), record['bad'].split()
            assert len(good) == len(bad)
            assert sum(g != b for g, b in zip(good, bad)) == 1

    def test_pairs_alternate_phenomena(self):
        from baby_hgrn.data import AgreementGrammar
        from baby_hgrn.data.synthetic import DETERMINER_NOUN, SUBJECT_VERB

        tags = [r['tag'] for r in AgreementGrammar().minimal_pair_records(8)]
        assert tags.count(SUBJECT_VERB) == tags.count(DETERMINER_NOUN) == 4

    def test_choice_gold_is_balanced(self):
        from collections import Counter

        from baby_hgrn.data import AgreementGrammar

        records = AgreementGrammar().choice_records(16)
        golds = Counter(r['gold'] for r in records)
        assert set(golds.values()) == {4}
        assert all(len(r['candidates']) == 4 for r in records)

    def test_domain_records_meet_word_floor(self):
        from baby_hgrn.data import AgreementGrammar

        records = AgreementGrammar().domain_records(['p', 'q'], words_per_domain=100)
        for name in ('p', 'q'):
            words = sum(len(r['text'].split()) for r in records if r['domain'] == name)
            assert words >= 100

    def test_bigram_entropy(self):
        import math

        from baby_hgrn.data import bigram_entropy

        assert bigram_entropy([1, 2, 1, 2, 1, 2]) == 0.0
        assert bigram_entropy([0, 0, 1, 1, 0]) == pytest.approx(math.log(2))
