"""Bundled desk-scale reference languages and the benchmark runner.

The reference grammars are original constructions sized after the public
corpora the paper-scale tools were trained on; their builtin oracles stand
in for the closed-source parsers.  Training and golden corpora are
regenerated from the references per seed, so every benchmark number here
is a calibration target against these grammars, not the originals.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from importlib import resources

from .grammar import Grammar
from .oracle import BuiltinOracle
from .rng import Rng, derive_seed
from .sampler import LPP10, sample_pair


class RefBenchError(Exception):
    pass


@dataclass(frozen=True)
class RefLanguage:
    resource: str
    train_count: int  # examples per training corpus, after the public sets
    avg_chars: float  # average example size of those sets, guides sampling


LANGUAGES: dict[str, RefLanguage] = {
    "arith": RefLanguage("arith.gram", 17, 2.3),
    "json": RefLanguage("json.gram", 71, 3.9),
    "lisp": RefLanguage("lisp.gram", 26, 2.5),
    "turtle": RefLanguage("turtle.gram", 33, 7.7),
    "while": RefLanguage("while.gram", 10, 15.5),
    "xml": RefLanguage("xml.gram", 40, 11.6),
    "tinyc": RefLanguage("tinyc.gram", 25, 80.5),
}


def _size_band(name: str) -> tuple[int, int]:
    """Length band for generated examples, around the public-set average."""
    target = LANGUAGES[canonical_name(name)].avg_chars
    low = int(target / 3) if target > 20 else 1
    return low, int(target * 3)

_ALIAS_SUFFIXES = ("-subset", "-like", "_subset", "_like")


def canonical_name(name: str) -> str:
    n = name.strip().lower()
    for suf in _ALIAS_SUFFIXES:
        if n.endswith(suf):
            n = n[: -len(suf)]
    if n not in LANGUAGES:
        raise RefBenchError(f"unknown language {name!r} (have: {', '.join(sorted(LANGUAGES))})")
    return n


def available_languages() -> list[str]:
    return sorted(LANGUAGES)


_grammar_cache: dict[str, Grammar] = {}


def load_reference(name: str) -> Grammar:
    key = canonical_name(name)
    if key not in _grammar_cache:
        from .grammar_io import parse_grammar

        text = resources.files("gramforge.refs").joinpath(LANGUAGES[key].resource).read_text()
        _grammar_cache[key] = parse_grammar(text)
    return _grammar_cache[key]


def builtin_oracle(name: str, max_cache: int | None = None) -> BuiltinOracle:
    return BuiltinOracle(load_reference(name), max_cache=max_cache)


def train_count(name: str) -> int:
    return LANGUAGES[canonical_name(name)].train_count


def _language_seed(base_seed: int, name: str, purpose: int) -> int:
    return derive_seed(base_seed, purpose, *canonical_name(name).encode())


def generate_golden(name: str, count: int, seed: int, purpose: int = 0) -> list[str]:
    """`count` distinct oracle-accepted production-limited samples.

    Draws outside the language's size band are discarded (matching the
    scale of the public example sets), as are oracle rejects (a random
    identifier can collide with a keyword) and duplicates; drawing
    continues until the count is reached.  Deterministic per
    (language, count, seed).
    """
    g = load_reference(name)
    oracle = builtin_oracle(name)
    rng = Rng(_language_seed(seed, name, purpose))
    low, high = _size_band(name)
    out: list[str] = []
    seen: set[str] = set()
    attempts = 0
    limit = max(2000, count * 400)
    while len(out) < count:
        if attempts >= limit:
            raise RefBenchError(
                f"could not generate {count} distinct samples for {name!r} "
                f"in {limit} draws"
            )
        attempts += 1
        _, s = sample_pair(g, LPP10, rng)
        if not (low <= len(s) <= high) or s in seen:
            continue
        if not oracle.check(s):
            continue
        seen.add(s)
        out.append(s)
    return out


def generate_train(name: str, seed: int, count: int | None = None) -> list[str]:
    n = count if count is not None else train_count(name)
    return generate_golden(name, n, seed, purpose=1)


# ---------------------------------------------------------------------------
# end-to-end benchmark


@dataclass
class SeedResult:
    seed: int
    grammar_text: str
    report: "object"  # evaluate.EvalReport
    run_report: dict
    error: str | None = None


def run_language(name: str, seed: int, config=None, golden_count: int = 500, eval_n: int = 500):
    """One full pipeline run: corpora, tokenize, decompose, infer, eval."""
    from . import decompose as decompose_mod
    from . import evaluate, infer, tokenizer
    from .grammar_io import serialize_grammar
    from .sampler import LPP10 as lpp

    key = canonical_name(name)
    train = generate_train(key, seed)
    golden = generate_golden(key, golden_count, seed, purpose=2)
    oracle = builtin_oracle(key)

    cfg = config or infer.InferConfig(seed=seed)
    if cfg.seed != seed:
        cfg = infer.replace_seed(cfg, seed)

    corpus = tokenizer.tokenize_corpus([(f"train{i}", t) for i, t in enumerate(train)], oracle)
    dec = decompose_mod.decompose(corpus, oracle)
    grammar, run_report = infer.infer_grammar(dec, corpus.table, oracle, cfg)
    report = evaluate.report(grammar, oracle, golden, lpp, eval_n, seed=seed)
    return SeedResult(
        seed=seed,
        grammar_text=serialize_grammar(grammar),
        report=report,
        run_report=run_report,
    )


def run_benchmark(name: str, seeds, config=None, golden_count: int = 500, eval_n: int = 500):
    """Per-seed results plus mean/stddev aggregates over the successes."""
    results: list[SeedResult] = []
    for seed in seeds:
        try:
            results.append(run_language(name, seed, config, golden_count, eval_n))
        except Exception as e:  # aggregate still produced over successes
            results.append(SeedResult(seed=seed, grammar_text="", report=None, run_report={}, error=f"{type(e).__name__}: {e}"))
    ok = [r for r in results if r.error is None]

    def agg(vals):
        vals = list(vals)
        if not vals:
            return (float("nan"), float("nan"))
        mean = statistics.fmean(vals)
        std = statistics.pstdev(vals) if len(vals) > 1 else 0.0
        return (mean, std)

    aggregate = {
        "language": canonical_name(name),
        "runs": len(results),
        "failures": sum(1 for r in results if r.error is not None),
        "precision": agg(float(r.report.precision) for r in ok),
        "recall": agg(float(r.report.recall) for r in ok),
        "f1": agg(float(r.report.f1) for r in ok),
        "size_sum": agg(r.report.metrics.size_sum for r in ok),
    }
    return results, aggregate
