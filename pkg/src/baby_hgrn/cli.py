'''
Command-line front end: ``baby-hgrn <command> [options]``.

Commands: ``synth``, ``sample``, ``tokenize``, ``pack``, ``train``,
``distill``, ``sweep``, ``eval`` and ``inspect``.  Every command accepts
``--config`` (JSON or ``key=value`` file), ``--out``, ``--seed``,
``--workers`` and ``--log-level``.  Settings resolve as defaults < preset <
dataset-derived values < config file < explicit flags, and the resolved
mapping is written to ``resolved_config.json`` in the output directory.
'''

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import polars as pl

from baby_hgrn import __version__
from baby_hgrn.data.bpe import DEFAULT_VOCAB_SIZE, BPEVocabulary, train_bpe
from baby_hgrn.data.packing import DEFAULT_CHUNK_LEN, PackedDataset, pack
from baby_hgrn.data.sampling import (
    DomainSpec,
    get_plan,
    list_plans,
    read_jsonl_corpus,
    sample_corpus,
)
from baby_hgrn.data.synthetic import AgreementGrammar, bigram_entropy
from baby_hgrn.errors import BabyHGRNError, ConfigError, UsageError
from baby_hgrn.evaluation import (
    MACRO_CAVEAT,
    NORMS,
    LMScorer,
    choices_from_records,
    eval_minimal_pairs,
    evaluate,
    load_choices,
    load_pairs,
    pairs_from_records,
    write_choices,
    write_pairs,
)
from baby_hgrn.models import (
    ModelConfig,
    build_model,
    get_preset,
    list_presets,
    load_checkpoint,
)
from baby_hgrn.training import (
    DEFAULT_GRID,
    METRICS,
    SCHEDULERS,
    DistillConfig,
    TrainConfig,
    TrainReport,
    distill_pipeline,
    lr_sweep,
    train,
)
from baby_hgrn.utils.helpers import (
    default_workers,
    format_table,
    load_config_file,
    load_json,
    output_root,
    write_json,
    write_jsonl,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

_MODEL_KEYS = {f.name for f in fields(ModelConfig)}
_TRAIN_KEYS = {f.name for f in fields(TrainConfig)}
_DISTILL_KEYS = {f.name for f in fields(DistillConfig)}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON or key=value file of settings')
    common.add_argument(
        '--out', help='Output directory (default: $BABY_HGRN_OUTPUT_ROOT/<command>)'
    )
    common.add_argument(
        '--seed', type=int, default=None, help='Random seed (default 0)'
    )
    common.add_argument(
        '--workers',
        type=int,
        default=None,
        help='Worker cap (default $BABY_HGRN_WORKERS or 1)',
    )
    common.add_argument(
        '--log-level',
        default='INFO',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
        help='Logging verbosity on stderr',
    )
    return common


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        '--preset', default=None, help='Model preset (see --list-presets)'
    )
    parser.add_argument('--hidden-size', type=int, default=None)
    parser.add_argument('--num-layers', type=int, default=None)
    parser.add_argument('--expand-ratio', type=int, default=None)
    parser.add_argument('--block-size', type=int, default=None)


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--data', default=None, help='Packed dataset (.bin)')
    parser.add_argument('--epochs', type=int, default=None)
    parser.add_argument('--batch-size', type=int, default=None)
    parser.add_argument('--lr', type=float, default=None, help='Peak learning rate')
    parser.add_argument('--max-grad-norm', type=float, default=None)
    parser.add_argument('--scheduler', choices=SCHEDULERS, default=None)
    parser.add_argument(
        '--validation-fraction',
        type=float,
        default=None,
        help='Hold out this share of chunks for per-epoch validation CE',
    )


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog='baby-hgrn',
        description='Desk-scale gated linear-RNN language modeling toolkit.',
    )
    parser.add_argument(
        '--version', action='version', version=f'%(prog)s {__version__}'
    )
    sub = parser.add_subparsers(dest='command', required=True)

    def command(name: str, summary: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=summary)

    p = command('synth', 'Write a synthetic grammar corpus and task files')
    p.add_argument('--documents', type=int, help='Corpus documents (default 2000)')
    p.add_argument('--sentences', type=int, help='Sentences per document (default 4)')
    p.add_argument('--pairs', type=int, help='Minimal pairs (default 1000)')
    p.add_argument('--choices', type=int, help='Choice instances (default 400)')
    p.add_argument('--domains', help='Comma-separated names for a multi-domain file')
    p.add_argument('--words-per-domain', type=int)

    p = command('sample', 'Draw a ratio-controlled corpus')
    p.add_argument('--plan', help='Registered plan name (see --list-plans)')
    p.add_argument('--domains', help='Ad-hoc plan: name=ratio,name=ratio')
    p.add_argument('--source', help='JSONL file of {text, domain} records')
    p.add_argument('--total-words', type=int)
    p.add_argument('--list-plans', action='store_true')

    p = command('tokenize', 'Train a BPE vocabulary')
    p.add_argument('--corpus', help='JSONL corpus')
    p.add_argument('--vocab-size', type=int, help=f'Default {DEFAULT_VOCAB_SIZE}')

    p = command('pack', 'Tokenize and pack a corpus into chunks')
    p.add_argument('--corpus', help='JSONL corpus')
    p.add_argument('--vocab', help='vocab.json from tokenize')
    p.add_argument('--chunk-len', type=int, help=f'Default {DEFAULT_CHUNK_LEN}')
    p.add_argument('--manifest', help='Sampling manifest to embed')

    p = command('train', 'Train a language model')
    _add_model_flags(p)
    _add_train_flags(p)
    p.add_argument('--list-presets', action='store_true')
    p.add_argument('--select-pairs', help='Minimal pairs for per-epoch selection')
    p.add_argument('--vocab', help='Vocabulary for --select-pairs')

    p = command('distill', 'Train a student against a teacher')
    _add_model_flags(p)
    _add_train_flags(p)
    p.add_argument('--teacher-checkpoint')
    p.add_argument('--teacher-preset', help='Teacher to train first when no checkpoint')
    p.add_argument('--alpha', type=float, help='KD weight (default 0.5)')
    p.add_argument('--temperature', type=float, help='Softmax temperature (default 1)')
    p.add_argument('--student-seed', type=int)

    p = command('sweep', 'Learning-rate grid search')
    _add_model_flags(p)
    _add_train_flags(p)
    p.add_argument('--grid', help='Comma-separated rates (default 1e-3,1e-4,1e-5,1e-6)')
    p.add_argument('--metric', choices=sorted(METRICS))

    p = command('eval', 'Zero-shot evaluation of a checkpoint')
    p.add_argument('--checkpoint')
    p.add_argument('--vocab')
    p.add_argument('--pairs', action='append', help='Minimal-pair JSONL (repeatable)')
    p.add_argument('--choices', action='append', help='Choice JSONL (repeatable)')
    p.add_argument('--data', help='Packed dataset for perplexity')
    p.add_argument('--norm', choices=NORMS)

    p = command('inspect', 'Parameter counts and forget-gate lower bounds')
    p.add_argument('--checkpoint')
    return parser


# ---------------------------------------------------------------------------
# Settings resolution
# ---------------------------------------------------------------------------


def _apply_config_file(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    '''
    Merge ``--config`` into ``args``.

    Keys naming a flag fill that flag when it was not given; keys naming
    a model, training or distillation field (flat or under ``model`` /
    ``train`` / ``distill`` objects) are returned per section.
    '''
    sections: Dict[str, Dict[str, Any]] = {'model': {}, 'train': {}, 'distill': {}}
    if not args.config:
        return sections
    for key, value in load_config_file(args.config).items():
        if key in sections and isinstance(value, dict):
            sections[key].update(value)
        elif key in ('config', 'command'):
            raise ConfigError(f'Config key {key!r} cannot be set from a file')
        elif hasattr(args, key):
            if getattr(args, key) in (None, False):
                setattr(args, key, value)
        elif key in _MODEL_KEYS:
            sections['model'][key] = value
        elif key in _TRAIN_KEYS:
            sections['train'][key] = value
        elif key in _DISTILL_KEYS:
            sections['distill'][key] = value
        else:
            raise ConfigError(
                f'Unknown config key {key!r} for command {args.command!r}'
            )
    return sections


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [
        '--' + n.replace('_', '-')
        for n in names
        if getattr(args, n, None) in (None, '')
    ]
    if missing:
        raise UsageError(
            f'{args.command}: missing required option(s): {", ".join(missing)}'
        )


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out) if args.out else output_root() / args.command
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_resolved(out: Path, args: argparse.Namespace, **settings: Any) -> str:
    flags = {k: v for k, v in vars(args).items() if k not in ('log_level',)}
    resolved = {'command': args.command, 'flags': flags, **settings}
    return write_json(resolved, out / 'resolved_config.json')


def _model_config(
    args: argparse.Namespace,
    sections: Dict[str, Dict[str, Any]],
    dataset: PackedDataset,
    preset_name: Optional[str] = None,
) -> ModelConfig:
    name = preset_name or args.preset or 'hgrn2-desk'
    try:
        preset = get_preset(name)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    settings = {'vocab_size': dataset.vocab_size}
    settings.update(sections['model'])
    flags = {
        'hidden_size': args.hidden_size,
        'num_layers': args.num_layers,
        'expand_ratio': args.expand_ratio,
        'block_size': args.block_size,
    }
    if preset_name is None:
        settings.update({k: v for k, v in flags.items() if v is not None})
    return preset.config(**settings)


def _train_config(
    args: argparse.Namespace,
    sections: Dict[str, Dict[str, Any]],
    dataset: PackedDataset,
) -> TrainConfig:
    settings: Dict[str, Any] = {'sequence_length': dataset.chunk_len}
    settings.update(sections['train'])
    flags = {
        'epochs': args.epochs,
        'batch_size': args.batch_size,
        'learning_rate': args.lr,
        'max_grad_norm': args.max_grad_norm,
        'scheduler': args.scheduler,
        'seed': args.seed,
    }
    settings.update({k: v for k, v in flags.items() if v is not None})
    return TrainConfig.from_dict(settings)


def _datasets(
    args: argparse.Namespace, seed: int
) -> Tuple[PackedDataset, Optional[PackedDataset]]:
    _require(args, 'data')
    dataset = PackedDataset.load(args.data)
    fraction = args.validation_fraction
    if not fraction:
        return dataset, None
    return dataset.split(float(fraction), seed=seed)


def _print_report(report: TrainReport, title: str = 'Training') -> None:
    rows = [
        {
            'Epoch': e.epoch,
            'Train CE': round(e.train_ce, 4),
            'Train PPL': round(e.train_perplexity, 2),
            'Valid CE': None if e.valid_ce is None else round(e.valid_ce, 4),
            'Score': e.score,
        }
        for e in report.epochs
    ]
    print(
        f'\n{title}: {report.steps} steps, {report.tokens} tokens, '
        f'{report.wall_clock:.1f}s'
    )
    print(format_table(pl.DataFrame(rows)))
    if report.best_epoch is not None:
        print(f'Best epoch: {report.best_epoch}')
    if report.final_checkpoint:
        print(f'Final checkpoint: {report.final_checkpoint}')


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_synth(args: argparse.Namespace, sections: Dict[str, Dict[str, Any]]) -> int:
    out = _out_dir(args)
    seed = args.seed or 0
    grammar = AgreementGrammar()
    documents = grammar.corpus(
        args.documents or 2000, sentences_per_document=args.sentences or 4, seed=seed
    )
    write_jsonl(
        out / 'corpus.jsonl', ({'text': d, 'domain': 'grammar'} for d in documents)
    )
    pair_records = grammar.minimal_pair_records(args.pairs or 1000, seed=seed + 1)
    pairs = pairs_from_records(pair_records)
    choices = choices_from_records(grammar.choice_records(args.choices or 400))
    write_pairs(out / 'pairs.jsonl', pairs)
    write_choices(out / 'choices.jsonl', choices)
    written = ['corpus.jsonl', 'pairs.jsonl', 'choices.jsonl']
    if args.domains:
        names = [d.strip() for d in str(args.domains).split(',') if d.strip()]
        words = args.words_per_domain or 5000
        records = grammar.domain_records(names, words, seed=seed)
        write_jsonl(out / 'domains.jsonl', records)
        written.append('domains.jsonl')
    _write_resolved(out, args)
    print(
        f'Wrote {len(documents)} documents, {len(pairs)} pairs, '
        f'{len(choices)} choices'
    )
    for name in written:
        print(f'  {out / name}')
    return 0


def _parse_domains(raw: str, source: Optional[str]) -> List[DomainSpec]:
    specs = []
    for item in str(raw).split(','):
        item = item.strip()
        if not item:
            continue
        name, sep, ratio = item.partition('=')
        if not sep:
            raise UsageError(f'Domain entry {item!r} must look like name=ratio')
        try:
            specs.append(DomainSpec(name.strip(), float(ratio), source))
        except ValueError as exc:
            raise UsageError(f'Domain entry {item!r}: {exc}') from None
    if not specs:
        raise UsageError('Sampling plan is empty')
    return specs


def cmd_sample(args: argparse.Namespace, sections: Dict[str, Dict[str, Any]]) -> int:
    if args.list_plans:
        for name, description in list_plans().items():
            print(f'{name:12s} {description}')
        return 0
    _require(args, 'source', 'total_words')
    if args.domains is not None:
        plan = _parse_domains(args.domains, args.source)
        plan_name = 'custom'
    else:
        plan_name = args.plan or 'pile-10m'
        try:
            plan = get_plan(plan_name).specs(args.source)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    out = _out_dir(args)
    corpus = sample_corpus(plan, int(args.total_words), seed=args.seed or 0)
    corpus.save(out / 'corpus.jsonl')
    corpus.manifest.save(out / 'manifest.json')
    _write_resolved(
        out,
        args,
        plan=plan_name,
        domains=[{'name': d.name, 'ratio': d.ratio} for d in plan],
    )
    print(format_table(corpus.manifest.to_table()))
    print(f'Corpus: {out / "corpus.jsonl"}')
    return 0


def cmd_tokenize(args: argparse.Namespace, sections: Dict[str, Dict[str, Any]]) -> int:
    _require(args, 'corpus')
    out = _out_dir(args)
    texts = [d['text'] for d in read_jsonl_corpus(args.corpus)]
    vocab = train_bpe(texts, args.vocab_size or DEFAULT_VOCAB_SIZE)
    path = vocab.save(out / 'vocab.json')
    _write_resolved(out, args, vocab_size=vocab.vocab_size)
    print(
        f'Vocabulary: {vocab.vocab_size} tokens '
        f'(requested {vocab.requested_size}) -> {path}'
    )
    return 0


def cmd_pack(args: argparse.Namespace, sections: Dict[str, Dict[str, Any]]) -> int:
    _require(args, 'corpus', 'vocab')
    out = _out_dir(args)
    vocab = BPEVocabulary.load(args.vocab)
    texts = [d['text'] for d in read_jsonl_corpus(args.corpus)]
    manifest = None
    if args.manifest:
        manifest = load_json(args.manifest)
    chunk_len = args.chunk_len or DEFAULT_CHUNK_LEN
    dataset = pack(texts, vocab, chunk_len=chunk_len, manifest=manifest)
    path = dataset.save(out / 'dataset.bin')
    entropy = bigram_entropy(dataset.chunks.reshape(-1).tolist())
    _write_resolved(
        out, args, chunk_len=dataset.chunk_len, vocab_size=dataset.vocab_size
    )
    print(
        f'Packed {dataset.chunk_count} chunks x {dataset.chunk_len} tokens '
        f'({dataset.dropped_tokens} tail tokens dropped) -> {path}'
    )
    print(f'Bigram conditional entropy: {entropy:.4f} nats')
    return 0


def _selection_callback(args: argparse.Namespace, workers: int) -> Optional[Callable]:
    if not args.select_pairs:
        return None
    _require(args, 'vocab')
    vocab = BPEVocabulary.load(args.vocab)
    pairs = load_pairs(args.select_pairs)

    def callback(epoch: int, model) -> float:
        result = eval_minimal_pairs(LMScorer(model, vocab), pairs, workers=workers)
        return result.accuracy

    return callback


def cmd_train(args: argparse.Namespace, sections: Dict[str, Dict[str, Any]]) -> int:
    if args.list_presets:
        for name, description in list_presets().items():
            print(f'{name:18s} {description}')
        return 0
    seed = args.seed or 0
    dataset, validation = _datasets(args, seed)
    model_cfg = _model_config(args, sections, dataset)
    train_cfg = _train_config(args, sections, dataset)
    out = _out_dir(args)
    _write_resolved(out, args, model=model_cfg.to_dict(), train=train_cfg.to_dict())
    model = build_model(model_cfg, seed=train_cfg.seed)
    report = train(
        model,
        dataset,
        train_cfg,
        out_dir=out,
        validation=validation,
        epoch_callback=_selection_callback(args, args.workers),
    )
    _print_report(report)
    return 0


def cmd_distill(args: argparse.Namespace, sections: Dict[str, Dict[str, Any]]) -> int:
    seed = args.seed or 0
    dataset, validation = _datasets(args, seed)
    student_cfg = _model_config(args, sections, dataset)
    train_cfg = _train_config(args, sections, dataset)
    settings = dict(sections['distill'])
    flags = {
        'alpha': args.alpha,
        'temperature': args.temperature,
        'teacher_checkpoint': args.teacher_checkpoint,
        'student_seed': args.student_seed,
    }
    settings.update({k: v for k, v in flags.items() if v is not None})
    distill_cfg = DistillConfig.from_dict(settings)
    teacher_cfg = None
    if not distill_cfg.teacher_checkpoint:
        teacher_cfg = _model_config(
            args,
            sections,
            dataset,
            preset_name=args.teacher_preset or args.preset or 'hgrn2-desk',
        )
    out = _out_dir(args)
    _write_resolved(
        out,
        args,
        student=student_cfg.to_dict(),
        teacher=teacher_cfg.to_dict() if teacher_cfg else None,
        train=train_cfg.to_dict(),
        distill=distill_cfg.to_dict(),
    )
    result = distill_pipeline(
        teacher_cfg,
        student_cfg,
        dataset,
        train_cfg,
        distill_cfg,
        out_dir=out,
        validation=validation,
    )
    if result.teacher_report is not None:
        _print_report(result.teacher_report, title='Teacher')
    _print_report(result.student_report, title='Student')
    return 0


def cmd_sweep(args: argparse.Namespace, sections: Dict[str, Dict[str, Any]]) -> int:
    seed = args.seed or 0
    dataset, validation = _datasets(args, seed)
    model_cfg = _model_config(args, sections, dataset)
    train_cfg = _train_config(args, sections, dataset)
    if args.grid is None:
        grid = list(DEFAULT_GRID)
    elif isinstance(args.grid, list):
        grid = [float(x) for x in args.grid]
    else:
        try:
            grid = [float(x) for x in str(args.grid).split(',') if x.strip()]
        except ValueError as exc:
            raise UsageError(f'Invalid --grid {args.grid!r}: {exc}') from None
    metric = args.metric or ('valid_ce' if validation is not None else 'train_ce')
    out = _out_dir(args)
    _write_resolved(
        out,
        args,
        model=model_cfg.to_dict(),
        train=train_cfg.to_dict(),
        grid=grid,
        metric=metric,
    )
    report = lr_sweep(
        lambda: build_model(model_cfg, seed=train_cfg.seed),
        dataset,
        train_cfg,
        grid=grid,
        metric=metric,
        out_dir=out,
        validation=validation,
    )
    print(format_table(report.to_table()))
    print(f'Winner: {report.winner}')
    return 0 if report.winner is not None else 1


def cmd_eval(args: argparse.Namespace, sections: Dict[str, Dict[str, Any]]) -> int:
    _require(args, 'checkpoint')
    pair_files = _as_list(args.pairs)
    choice_files = _as_list(args.choices)
    if not (pair_files or choice_files or args.data):
        raise UsageError('eval: give at least one of --pairs, --choices or --data')
    model = load_checkpoint(args.checkpoint)
    scorer = None
    if pair_files or choice_files:
        _require(args, 'vocab')
        scorer = LMScorer(model, BPEVocabulary.load(args.vocab))
    dataset = PackedDataset.load(args.data) if args.data else None
    norm = args.norm or 'none'
    report = evaluate(
        scorer,
        pair_tasks={Path(p).stem: load_pairs(p) for p in pair_files},
        choice_tasks={Path(p).stem: load_choices(p) for p in choice_files},
        norm=norm,
        workers=args.workers,
        model=model,
        dataset=dataset,
        model_id=str(args.checkpoint),
    )
    out = _out_dir(args)
    _write_resolved(out, args, norm=norm)
    report.save(out / 'eval_report.json')
    if report.tasks:
        print(format_table(report.to_table()))
        print(f'Macro average: {report.macro:.1f}  ({MACRO_CAVEAT})')
    if report.perplexity is not None:
        print(f'Perplexity: {report.perplexity:.3f}')
    return 0


def cmd_inspect(args: argparse.Namespace, sections: Dict[str, Dict[str, Any]]) -> int:
    _require(args, 'checkpoint')
    model = load_checkpoint(args.checkpoint)
    config = model.config
    counts = model.num_parameters(by_module=True)
    print(f'{config.architecture}: {model.num_parameters():,} parameters')
    sizes = pl.DataFrame({'Module': list(counts), 'Parameters': list(counts.values())})
    print(format_table(sizes))
    bounds = model.lower_bounds()
    if bounds is None:
        print('No forget-gate lower bounds (not a gated linear-RNN checkpoint)')
        return 0
    means = bounds.mean(axis=1)
    table = pl.DataFrame(
        {
            'Layer': list(range(1, len(bounds) + 1)),
            'Mean': means.round(4).tolist(),
            'Min': bounds.min(axis=1).round(4).tolist(),
            'Max': bounds.max(axis=1).round(4).tolist(),
        }
    )
    print(format_table(table))
    monotone = bool(np.all(bounds[1:] >= bounds[:-1] - 1e-6))
    print(f'Lower bounds non-decreasing with depth: {"yes" if monotone else "no"}')
    if args.out:
        out = _out_dir(args)
        write_json(
            {
                'parameters': counts,
                'lower_bounds': bounds.tolist(),
                'monotone': monotone,
            },
            out / 'inspect.json',
        )
        _write_resolved(out, args)
    return 0


def _as_list(value: Any) -> List[str]:
    if value is None:
        return []
    return [value] if isinstance(value, str) else list(value)


COMMANDS: Dict[str, Callable[[argparse.Namespace, Dict[str, Dict[str, Any]]], int]] = {
    'synth': cmd_synth,
    'sample': cmd_sample,
    'tokenize': cmd_tokenize,
    'pack': cmd_pack,
    'train': cmd_train,
    'distill': cmd_distill,
    'sweep': cmd_sweep,
    'eval': cmd_eval,
    'inspect': cmd_inspect,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    '''
    Run one command.

    Returns:
        0 on success; a :class:`BabyHGRNError` is reported as
        ``error [<category>]: <message>`` on stderr and its exit code is
        returned.
    '''
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level, format=LOG_FORMAT, stream=sys.stderr, force=True
    )
    try:
        sections = _apply_config_file(args)
        if args.workers is None:
            args.workers = default_workers()
        if args.workers < 1:
            raise UsageError(f'--workers must be >= 1, got {args.workers}')
        return COMMANDS[args.command](args, sections)
    except BabyHGRNError as exc:
        print(f'error [{exc.category}]: {exc}', file=sys.stderr)
        return exc.exit_code
